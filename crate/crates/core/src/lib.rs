//! Behavior-based bot detection primitives.
//!
//! Sessions of HTTP requests are projected onto a site map of URL patterns,
//! laid out in the plane with a force-directed simulation, and rasterized
//! into grayscale trace images that a small CNN can classify.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, crawling and
//! the command-line pipeline live in the `botgraph` companion crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod layout;
pub mod metrics;
pub mod render;
pub mod request;
pub mod sitemap;
pub mod subgraph;
pub mod synth;
pub mod urlpattern;

pub use layout::{initial_positions, run_layout, LayoutConfig, LayoutError};
pub use metrics::{bot_shares, evaluate, EvalReport, MetricsError};
pub use render::{render, solve_radius_params, RadiusParams, RenderConfig, RenderError, TraceImage};
pub use request::{sessionize, HttpMethod, Label, Request, Session, SessionError, Timestamp};
pub use sitemap::{NodeId, Point, Sitemap, SitemapBuilder, SitemapError, INVALID_PATTERN};
pub use subgraph::{filter_min_spots, map_request, map_session, SessionSubgraph, SubgraphError, DEFAULT_MIN_SPOTS};
pub use urlpattern::{normalize, UrlPattern, UrlPatternError};
pub use synth::{generate, Behavior, ProfileKind, SynthError, TrafficProfile};
