//! Scan, symbol decomposition and BR context modelling.

mod baseline;
mod eval;
mod model;
mod scan;
mod schemes;
mod simplified;
mod symbols;
mod tree;

pub use baseline::{
    ctx_baseline, neighbor_sum, region_class, sum_category, BaselineContexter, BASELINE_CONTEXTS, BASELINE_OFFSETS,
    REGION_CLASSES, SUM_CATEGORIES,
};
pub use eval::{compare, eval_hts, in_top_left, tally, Comparison, ComparisonRow, EntropyReport, PositionEntropy};
pub use model::{entropy_sum, train, Counts, ProbabilityModel, Smoothing, PROB_FLOOR};
pub use scan::{zigzag, ScanOrder};
pub use schemes::{fit_trees, FittedTrees, TreeContexter};
pub use simplified::{build_cts, CtsGroup, SimplifiedScheme, TemplateClass, MIN_GROUP_SUPPORT};
pub use symbols::{br_symbol, decompose, recompose, SymbolDecomposition, BR_ALPHABET, LR_CEILING, LR_SYMBOLS, MAX_HR, MAX_LEVEL};
pub use tree::{
    conditions, ctx_full, full_leaf, leaf_count, merge, Conditions, ContextTree, LeafSpec, MergeStep, TreeKind, C3_LEVELS,
    C3_MAX, FULL_NC_MIN, ZERO_LOSS,
};

use crate::transform::CoefficientBlock;

/// `(group, leaf)`: a group owns one distribution per leaf.
pub type ContextId = (usize, usize);

/// Assigns BR contexts. Implementations read only positions below or to
/// the right of `(row, col)`, which precede it in coding order.
pub trait Contexter: Send + Sync {
    /// `(width, height)` of the coefficient grid.
    fn dims(&self) -> (usize, usize);
    fn group_count(&self) -> usize;
    fn leaf_count(&self, group: usize) -> usize;
    fn context(&self, block: &CoefficientBlock, row: usize, col: usize) -> ContextId;
}
