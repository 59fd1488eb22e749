//! Per-position context trees (full and merged).

use serde::{Deserialize, Serialize};

use super::model::{ProbabilityModel, Smoothing};
use super::tree::{merge, ContextTree, MergeStep};
use super::{ContextId, Contexter};
use crate::dictionary::{neighborhood_map, PartitionedDictionary};
use crate::error::Result;
use crate::transform::CoefficientBlock;

/// One context tree per coefficient position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeContexter {
    pub width: usize,
    pub height: usize,
    pub n_nbd: usize,
    pub th_c: f64,
    /// Row-major over the coefficient grid.
    pub trees: Vec<ContextTree>,
}

impl TreeContexter {
    pub fn full(dict: &PartitionedDictionary, n_nbd: usize, th_c: f64) -> Result<Self> {
        let trees = neighborhood_map(dict, n_nbd, th_c)?.iter().map(ContextTree::from_partition).collect();
        Ok(TreeContexter { width: dict.width(), height: dict.height(), n_nbd, th_c, trees })
    }

    /// Merges every position's tree against full-tree training counts and
    /// returns the merged contexter with its folded counts.
    pub fn merged(&self, full_model: &ProbabilityModel, delta: f64) -> Result<(TreeContexter, ProbabilityModel, Vec<Vec<MergeStep>>)> {
        let mut trees = Vec::with_capacity(self.trees.len());
        let mut counts = Vec::with_capacity(self.trees.len());
        let mut steps = Vec::with_capacity(self.trees.len());
        for (t, c) in self.trees.iter().zip(&full_model.counts) {
            let (m, s) = merge(t, c, delta)?;
            counts.push(m.fold_counts(c));
            trees.push(m);
            steps.push(s);
        }
        let ctx = TreeContexter { trees, ..self.clone() };
        Ok((ctx, ProbabilityModel::with_counts(counts, full_model.smoothing), steps))
    }

    pub fn total_leaves(&self) -> usize {
        self.trees.iter().map(ContextTree::leaf_count).sum()
    }

    pub fn rebuild_maps(&mut self) {
        self.trees.iter_mut().for_each(ContextTree::rebuild_map);
    }
}

impl Contexter for TreeContexter {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn group_count(&self) -> usize {
        self.trees.len()
    }

    fn leaf_count(&self, group: usize) -> usize {
        self.trees[group].leaf_count()
    }

    fn context(&self, block: &CoefficientBlock, row: usize, col: usize) -> ContextId {
        let g = row * self.width + col;
        (g, self.trees[g].leaf(block, row, col))
    }
}

/// Full and merged per-position schemes fitted on one training set.
#[derive(Clone, Debug)]
pub struct FittedTrees {
    pub full: TreeContexter,
    pub full_model: ProbabilityModel,
    pub merged: TreeContexter,
    pub merged_model: ProbabilityModel,
    pub steps: Vec<Vec<MergeStep>>,
}

pub fn fit_trees(
    dict: &PartitionedDictionary,
    train_blocks: &[CoefficientBlock],
    n_nbd: usize,
    th_c: f64,
    delta: f64,
    smoothing: Smoothing,
) -> Result<FittedTrees> {
    let full = TreeContexter::full(dict, n_nbd, th_c)?;
    let full_model = super::model::train(train_blocks, &full, smoothing);
    let (merged, merged_model, steps) = full.merged(&full_model, delta)?;
    Ok(FittedTrees { full, full_model, merged, merged_model, steps })
}
