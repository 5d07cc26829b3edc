//! Feature selection for regression under concept shift, driven by the signed
//! Shapley effects of each feature on under-, over- and correctly predicted
//! validation rows.

pub mod bench;
pub mod dataset;
pub mod error;
pub mod gbdt;
pub mod matrix;
pub mod selector;
pub mod shapley;
pub mod stats;
pub mod synth;

pub use dataset::{Dataset, LagSource, SplitIndices};
pub use error::{Error, Result};
pub use gbdt::{GbdtModel, GbdtParams, Tree, TreeNode};
pub use matrix::Matrix;
pub use shapley::{CoalitionValue, ShapMatrix};
