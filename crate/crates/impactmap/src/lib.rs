//! Command-line pipeline around `impactmap-core`: parses citation tables
//! and usage clickstream logs (or generates a synthetic corpus), builds
//! the citation and usage networks, evaluates the full battery of
//! journal impact measures, correlates the resulting rankings, and
//! reduces the correlation structure to a 2-D measure map plus
//! hierarchical and k-means clusterings.
//!
//! Every run writes a self-describing bundle: per-stage data files, a
//! summary table, and a manifest with content digests for all of them.
//! Given the same config and seed, bundles are byte-identical.

pub mod cache;
pub mod config;
pub mod error;
pub mod fmt;
pub mod io;
pub mod pipeline;
