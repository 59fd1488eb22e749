//! AV1-style BR contexts: 5-neighbour magnitude sum in coarse frequency regions.

use serde::{Deserialize, Serialize};

use super::{ContextId, Contexter};
use crate::transform::CoefficientBlock;

pub const BASELINE_OFFSETS: [(usize, usize); 5] = [(0, 1), (1, 0), (1, 1), (0, 2), (2, 0)];
pub const REGION_CLASSES: usize = 4;
pub const SUM_CATEGORIES: usize = 5;
/// DC plus three AC bands of five sum categories.
pub const BASELINE_CONTEXTS: usize = 1 + (REGION_CLASSES - 1) * SUM_CATEGORIES;

/// 0 for DC, then bands by anti-diagonal index: `< 2`, `< 4`, the rest.
pub fn region_class(row: usize, col: usize) -> usize {
    match row + col {
        0 => 0,
        1 => 1,
        2 | 3 => 2,
        _ => 3,
    }
}

/// `[0, {1,2}, {3,4}, {5,6}, >=7]`
pub fn sum_category(sum: u32) -> usize {
    match sum {
        0 => 0,
        1 | 2 => 1,
        3 | 4 => 2,
        5 | 6 => 3,
        _ => 4,
    }
}

pub fn neighbor_sum(block: &CoefficientBlock, row: usize, col: usize) -> u32 {
    BASELINE_OFFSETS
        .iter()
        .filter_map(|&(dr, dc)| {
            let (r, c) = (row + dr, col + dc);
            (r < block.height && c < block.width).then(|| block.get(r, c).unsigned_abs())
        })
        .sum()
}

/// Flat baseline context in `0..BASELINE_CONTEXTS`; DC owns context 0.
pub fn ctx_baseline(block: &CoefficientBlock, row: usize, col: usize) -> usize {
    let class = region_class(row, col);
    if class == 0 {
        return 0;
    }
    1 + (class - 1) * SUM_CATEGORIES + sum_category(neighbor_sum(block, row, col))
}

/// Baseline contexter. Per-position mode trains a separate distribution
/// for every position; shared mode pools positions through the region map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineContexter {
    pub width: usize,
    pub height: usize,
    pub per_position: bool,
}

impl BaselineContexter {
    pub fn per_position(width: usize, height: usize) -> Self {
        BaselineContexter { width, height, per_position: true }
    }

    pub fn shared(width: usize, height: usize) -> Self {
        BaselineContexter { width, height, per_position: false }
    }
}

impl Contexter for BaselineContexter {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn group_count(&self) -> usize {
        if self.per_position {
            self.width * self.height
        } else {
            1
        }
    }

    fn leaf_count(&self, _group: usize) -> usize {
        if self.per_position {
            SUM_CATEGORIES
        } else {
            BASELINE_CONTEXTS
        }
    }

    fn context(&self, block: &CoefficientBlock, row: usize, col: usize) -> ContextId {
        if self.per_position {
            let leaf = if row + col == 0 { 0 } else { sum_category(neighbor_sum(block, row, col)) };
            (row * self.width + col, leaf)
        } else {
            (0, ctx_baseline(block, row, col))
        }
    }
}
