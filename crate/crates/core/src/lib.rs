//! Master data link prediction toolkit.

pub mod anonymize;
pub mod datagen;
pub mod explain;
pub mod graph;
pub mod graphsheet;
pub mod linkpred;
pub mod matching;
pub mod pipeline;
pub mod rng;
pub mod service;
pub mod sources;
pub mod tables;
pub mod text;
pub mod unionfind;
