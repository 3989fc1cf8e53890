//! Trace images: one black spot per visited node, one stroke per traversed edge.

pub mod radius;
pub mod raster;

use alloc::string::String;
use alloc::vec::Vec;

pub use radius::{radius, solve_radius_params, RadiusError, RadiusParams};
use raster::{Canvas, FixedPoint, BLACK, SUBPIXEL};

use crate::request::Label;
use crate::sitemap::{NodeId, Point, Sitemap};
use crate::subgraph::SessionSubgraph;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderConfig {
    /// Side length of the square image in pixels.
    pub image_size: u32,
    /// Fraction of the side left empty on each border.
    pub padding_fraction: f64,
    /// Stroke width in pixels; 0 disables edges.
    pub line_width: u32,
    pub radius: RadiusParams,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            image_size: 256,
            padding_fraction: 0.05,
            line_width: 2,
            radius: RadiusParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("site map has no coordinates; run the layout first")]
    LayoutRequired,
    #[error("subgraph references node {0} missing from the site map")]
    UnknownNode(NodeId),
    #[error("invalid render config: {0}")]
    Config(&'static str),
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.image_size == 0 {
            return Err(RenderError::Config("image_size must be positive"));
        }
        if !(0.0..0.4).contains(&self.padding_fraction) {
            return Err(RenderError::Config("padding_fraction must lie in [0, 0.4)"));
        }
        if f64::from(self.image_size) < 2.0 * self.radius.r_max {
            return Err(RenderError::Config("image_size must be at least 2 * r_max"));
        }
        if (1.0 - 2.0 * self.padding_fraction) * f64::from(self.image_size) < 1.0 {
            return Err(RenderError::Config("padding leaves no drawable area"));
        }
        Ok(())
    }

    /// Maps a unit-square coordinate into the padded pixel region.
    pub fn to_pixel(&self, p: Point) -> FixedPoint {
        let s = f64::from(self.image_size);
        let pad = self.padding_fraction * s;
        let span = (1.0 - 2.0 * self.padding_fraction) * s;
        FixedPoint::from_pixels(pad + p.x * span, pad + p.y * span)
    }
}

/// Grayscale raster, row-major, 0 = black and 255 = white.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceImage {
    pub size: u32,
    pub pixels: Vec<u8>,
    pub session_id: String,
    pub label: Option<Label>,
}

impl TraceImage {
    pub fn get(&self, col: u32, row: u32) -> u8 {
        self.pixels[row as usize * self.size as usize + col as usize]
    }

    pub fn black_count(&self) -> usize {
        self.pixels.iter().filter(|&&p| p == BLACK).count()
    }
}

/// Rasterizes a subgraph over a laid-out site map.
///
/// Strokes are drawn first and spots on top; since both are solid black the
/// result is the union of all shapes.
pub fn render(sitemap: &Sitemap, subgraph: &SessionSubgraph, config: &RenderConfig) -> Result<TraceImage, RenderError> {
    config.validate()?;
    let coords = sitemap.coordinates().ok_or(RenderError::LayoutRequired)?;
    let centre = |id: NodeId| -> Result<FixedPoint, RenderError> {
        coords.get(id.index()).map(|&p| config.to_pixel(p)).ok_or(RenderError::UnknownNode(id))
    };

    let mut canvas = Canvas::new(config.image_size);
    if config.line_width > 0 {
        let half_width = i64::from(config.line_width) * SUBPIXEL / 2;
        for &(from, to) in &subgraph.edges {
            canvas.fill_segment(centre(from)?, centre(to)?, half_width);
        }
    }
    for (&node, &freq) in &subgraph.frequencies {
        let r = raster::to_fixed(config.radius.radius(f64::from(freq)));
        canvas.fill_disc(centre(node)?, r);
    }

    Ok(TraceImage {
        size: config.image_size,
        pixels: canvas.into_pixels(),
        session_id: subgraph.session_id.clone(),
        label: subgraph.label,
    })
}
