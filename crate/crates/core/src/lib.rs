//! Core library for crack-pattern analysis.
//!
//! The processing chain turns a grayscale photograph of a crack network into
//! a graph and a set of descriptors:
//!
//! ```text
//! image -> imaging (bottom-hat, threshold, clean, skeletonize)
//!       -> graphx  (skeleton to graph, border/merge corrections)
//!       -> topology (O/Y/X node labels, ternary coordinates)
//!       -> edgefit  (endpoint-constrained polynomial per crack)
//!       -> stats    (whole-network feature vector)
//!       -> gin      (graph neural network embeddings)
//!       -> learn    (SVM classification, cross-validation)
//! ```
//!
//! Everything is deterministic given a seed; all operations are pure
//! functions of immutable inputs and safe to run concurrently on
//! different images.

pub mod config;
pub mod edgefit;
pub mod gin;
pub mod graphx;
pub mod imaging;
pub mod jsonio;
pub mod learn;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod topology;
pub mod wl;

pub use config::PipelineConfig;
pub use edgefit::{EdgeFit, PolyEdge};
pub use graphx::{CrackGraph, Edge, Node};
pub use imaging::{BinaryMask, GrayImage, SegmentationParams};
pub use stats::StatFeatures;
pub use topology::{NodeType, TernaryCoords};
