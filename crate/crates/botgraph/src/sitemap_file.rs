//! JSON site map files.
//!
//! ```json
//! {"nodes": ["/", "/page?id=*", "INVALID"],
//!  "edges": [["/", "/page?id=*"]],
//!  "coordinates": {"/": [0.1, 0.9], ...}}
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use botgraph_core::{Point, Sitemap, SitemapError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct SitemapDoc {
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coordinates: Option<BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, thiserror::Error)]
pub enum SitemapFileError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("malformed site map json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid site map: {0}")]
    Format(#[from] SitemapError),
}

pub fn load_from_reader<R: Read>(reader: R) -> Result<Sitemap, SitemapFileError> {
    let doc: SitemapDoc = serde_json::from_reader(reader)?;
    let coords = doc
        .coordinates
        .map(|c| c.into_iter().map(|(k, [x, y])| (k, Point::new(x, y))).collect::<BTreeMap<_, _>>());
    Ok(Sitemap::from_parts(&doc.nodes, &doc.edges, coords.as_ref())?)
}

/// Self-provided site map: exactly the listed nodes and edges, plus INVALID.
pub fn load_from_file(path: &Path) -> Result<Sitemap, SitemapFileError> {
    load_from_reader(BufReader::new(File::open(path)?))
}

pub fn to_writer<W: Write>(mut w: W, sitemap: &Sitemap) -> Result<(), SitemapFileError> {
    let doc = SitemapDoc {
        nodes: sitemap.patterns().map(String::from).collect(),
        edges: sitemap
            .edges()
            .map(|(f, t)| (sitemap.pattern(f).to_string(), sitemap.pattern(t).to_string()))
            .collect(),
        coordinates: sitemap.coordinates().map(|pts| {
            sitemap.patterns().zip(pts).map(|(p, pt)| (p.to_string(), [pt.x, pt.y])).collect()
        }),
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_to_file(path: &Path, sitemap: &Sitemap) -> Result<(), SitemapFileError> {
    to_writer(BufWriter::new(File::create(path)?), sitemap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use botgraph_core::layout::{run_layout, LayoutConfig};

    #[test]
    fn listed_nodes_plus_invalid() {
        let m = load_from_reader(&br#"{"nodes": ["/", "/page?id=*"], "edges": [["/", "/page?id=*"]]}"#[..]).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.edge_count(), 1);
    }

    #[test]
    fn explicit_invalid_not_duplicated() {
        let m = load_from_reader(&br#"{"nodes": ["INVALID", "/"], "edges": []}"#[..]).unwrap();
        assert_eq!(m.len(), 2);
        m.validate().unwrap();
    }

    #[test]
    fn duplicate_and_unknown() {
        let err = load_from_reader(&br#"{"nodes": ["/", "/"]}"#[..]).unwrap_err();
        assert!(matches!(err, SitemapFileError::Format(SitemapError::DuplicateNode(_))));
        let err = load_from_reader(&br#"{"nodes": ["/"], "edges": [["/", "/ghost"]]}"#[..]).unwrap_err();
        assert!(err.to_string().contains("/ghost"), "{err}");
        assert!(matches!(load_from_reader(&b"{nodes"[..]), Err(SitemapFileError::Json(_))));
    }

    #[test]
    fn coordinates_round_trip_exactly() {
        let m = load_from_reader(&br#"{"nodes": ["/", "/a", "/b"], "edges": [["/", "/a"], ["/a", "/b"]]}"#[..]).unwrap();
        let laid = run_layout(m, &LayoutConfig::default()).unwrap();
        let mut buf = Vec::new();
        to_writer(&mut buf, &laid).unwrap();
        let back = load_from_reader(&buf[..]).unwrap();
        assert_eq!(back, laid);
        let mut again = Vec::new();
        to_writer(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn partial_coordinates_rejected() {
        let err = load_from_reader(&br#"{"nodes": ["/"], "coordinates": {"/": [0.5, 0.5]}}"#[..]).unwrap_err();
        assert!(matches!(err, SitemapFileError::Format(SitemapError::MissingCoordinate(_))));
    }
}
