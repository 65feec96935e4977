//! Core algorithms for ranking journals by citation- and usage-based impact
//! measures, and for comparing the rankings those measures produce.
//!
//! The crate covers the full analysis chain on in-memory data:
//!
//! * [`corpus`] — validated collections parsed from raw inputs: a journal
//!   registry, journal-to-journal citation tuples, an article map, and
//!   usage requests grouped into per-session clickstreams.
//! * [`net`] — sparse weighted directed networks over a journal universe:
//!   a citation-count network and a usage transition-probability network,
//!   with directed/undirected × weighted/unweighted views.
//! * [`centrality`] — degree, closeness, betweenness (exact), and PageRank
//!   over network views.
//! * [`measures`] — the catalogue of 39 impact measures and the battery
//!   that evaluates all of them over a common journal universe.
//! * [`stats`] — average ranks, tie-aware Spearman correlation, the
//!   measure-by-measure correlation matrix, and significance filtering.
//! * [`factor`] — eigendecomposition of the correlation matrix, varimax
//!   rotation, and projection of measures onto a 2-D map.
//! * [`cluster`] — agglomerative clustering with dendrogram cuts, and
//!   seeded k-means over correlation rows.
//! * [`synth`] — a deterministic corpus generator with planted field
//!   structure for end-to-end testing without proprietary data.
//!
//! File parsing, serialization formats, and the command-line pipeline live
//! in the companion `impactmap` crate. This crate is `no_std`-compatible
//! (with `alloc`); the default `std` and `parallel` features enable
//! multi-threaded betweenness/closeness and k-means restarts via rayon.
//! All results are deterministic: parallel runs partition work into fixed
//! chunks and reduce in a fixed order, so thread count never changes
//! output bits.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod centrality;
pub mod cluster;
pub mod corpus;
pub mod factor;
pub mod matrix;
pub mod measures;
pub mod net;
pub mod stats;
pub mod synth;

mod math;
mod rng;
