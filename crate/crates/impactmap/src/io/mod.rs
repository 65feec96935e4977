//! File formats: corpus flat files, network edge lists, ranking and
//! correlation CSVs, stage documents, Newick trees, and the map SVG.

pub mod corpus_files;
pub mod correlation;
pub mod docs;
pub mod network;
pub mod newick;
pub mod rankings;
pub mod svg;
