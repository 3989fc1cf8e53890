//! File formats, crawling and the batch pipeline around `botgraph-core`.

pub mod config;
pub mod crawl;
pub mod dataset;
pub mod eval;
pub mod logs;
pub mod pipeline;
pub mod sitemap_file;
