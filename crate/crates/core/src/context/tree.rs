//! Context trees over the conditions of the causal neighbourhood:
//! C1 (all zero), C2 (non-zeros in N_c) and C3 (clipped l1 norm over N_o).

use serde::{Deserialize, Serialize};

use super::model::{entropy_sum, Counts};
use crate::dictionary::NeighborhoodPartition;
use crate::error::{Error, Result};
use crate::transform::CoefficientBlock;

pub const C3_MAX: usize = 12;
pub const C3_LEVELS: usize = C3_MAX + 1;
/// A C2 node collapses to a single leaf once N_c has this many offsets and
/// is fully occupied.
pub const FULL_NC_MIN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conditions {
    pub c1_zero: bool,
    pub c2: usize,
    pub c3: usize,
}

/// Evaluates the conditions at `(row, col)`; offsets past the block edge
/// are skipped.
pub fn conditions(block: &CoefficientBlock, row: usize, col: usize, nc: &[(usize, usize)], no: &[(usize, usize)]) -> Conditions {
    let level = |&(dr, dc): &(usize, usize)| {
        let (r, c) = (row + dr, col + dc);
        if r < block.height && c < block.width {
            block.get(r, c).unsigned_abs() as usize
        } else {
            0
        }
    };
    let c2 = nc.iter().filter(|o| level(o) != 0).count();
    let l1: usize = no.iter().map(level).sum();
    Conditions { c1_zero: c2 == 0 && l1 == 0, c2, c3: l1.min(C3_MAX) }
}

/// Leaves of the full tree, C1 leaf included.
pub fn leaf_count(nc: usize) -> usize {
    1 + if nc < FULL_NC_MIN { (nc + 1) * C3_LEVELS } else { nc * C3_LEVELS + 1 }
}

/// Number of C2 nodes that branch on C3.
fn branch_nodes(nc: usize) -> usize {
    if nc < FULL_NC_MIN {
        nc + 1
    } else {
        nc
    }
}

/// Full-tree leaf id: 0 for the C1 leaf, `1 + c2 * 13 + c3` for branch
/// leaves, and `1 + |N_c| * 13` for the occupied-N_c leaf.
pub fn full_leaf(nc: usize, cond: Conditions) -> usize {
    if cond.c1_zero {
        0
    } else if nc >= FULL_NC_MIN && cond.c2 == nc {
        1 + nc * C3_LEVELS
    } else {
        1 + cond.c2 * C3_LEVELS + cond.c3
    }
}

pub fn ctx_full(block: &CoefficientBlock, pos: (usize, usize), partition: &NeighborhoodPartition) -> usize {
    let cond = conditions(block, pos.0, pos.1, &partition.nc, &partition.no);
    full_leaf(partition.nc.len(), cond)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeKind {
    Full,
    Merged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafSpec {
    Zero,
    /// C3 values `c3_lo..=c3_hi` under one C2 value.
    Interval { c2: usize, c3_lo: usize, c3_hi: usize },
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextTree {
    pub nc: Vec<(usize, usize)>,
    pub no: Vec<(usize, usize)>,
    pub kind: TreeKind,
    /// Per branching C2 node, the first C3 value of every leaf.
    starts: Vec<Vec<usize>>,
    #[serde(skip)]
    map: Vec<usize>,
}

impl ContextTree {
    pub fn full(nc: Vec<(usize, usize)>, no: Vec<(usize, usize)>) -> Self {
        let starts = vec![(0..C3_LEVELS).collect(); branch_nodes(nc.len())];
        Self::with_starts(nc, no, TreeKind::Full, starts)
    }

    pub fn from_partition(p: &NeighborhoodPartition) -> Self {
        Self::full(p.nc.clone(), p.no.clone())
    }

    fn with_starts(nc: Vec<(usize, usize)>, no: Vec<(usize, usize)>, kind: TreeKind, starts: Vec<Vec<usize>>) -> Self {
        let mut t = ContextTree { nc, no, kind, starts, map: Vec::new() };
        t.rebuild_map();
        t
    }

    /// Restores the lookup table after deserialization.
    pub fn rebuild_map(&mut self) {
        let n = self.nc.len();
        let mut map = vec![0; leaf_count(n)];
        let mut next = 1;
        for (c2, starts) in self.starts.iter().enumerate() {
            for (i, &lo) in starts.iter().enumerate() {
                let hi = starts.get(i + 1).copied().unwrap_or(C3_LEVELS);
                for c3 in lo..hi {
                    map[1 + c2 * C3_LEVELS + c3] = next;
                }
                next += 1;
            }
        }
        if n >= FULL_NC_MIN {
            map[1 + n * C3_LEVELS] = next;
        }
        self.map = map;
    }

    pub fn nc_size(&self) -> usize {
        self.nc.len()
    }

    pub fn full_leaf_count(&self) -> usize {
        leaf_count(self.nc.len())
    }

    pub fn leaf_count(&self) -> usize {
        1 + self.starts.iter().map(Vec::len).sum::<usize>() + usize::from(self.nc.len() >= FULL_NC_MIN)
    }

    /// Leaf of this tree holding a full-tree leaf.
    pub fn map_full(&self, full: usize) -> usize {
        self.map[full]
    }

    pub fn leaf(&self, block: &CoefficientBlock, row: usize, col: usize) -> usize {
        let cond = conditions(block, row, col, &self.nc, &self.no);
        self.map[full_leaf(self.nc.len(), cond)]
    }

    pub fn leaves(&self) -> Vec<LeafSpec> {
        let mut out = vec![LeafSpec::Zero];
        for (c2, starts) in self.starts.iter().enumerate() {
            for (i, &lo) in starts.iter().enumerate() {
                let hi = starts.get(i + 1).copied().unwrap_or(C3_LEVELS) - 1;
                out.push(LeafSpec::Interval { c2, c3_lo: lo, c3_hi: hi });
            }
        }
        if self.nc.len() >= FULL_NC_MIN {
            out.push(LeafSpec::Full);
        }
        out
    }

    /// Sums full-tree counts into this tree's leaves.
    pub fn fold_counts(&self, full: &[Counts]) -> Vec<Counts> {
        let mut out = vec![[0u64; 4]; self.leaf_count()];
        for (f, c) in full.iter().enumerate() {
            let l = self.map[f];
            for s in 0..4 {
                out[l][s] += c[s];
            }
        }
        out
    }

    /// Conditional entropy in bits per symbol of the leaves under `full` counts.
    pub fn conditional_entropy(&self, full: &[Counts]) -> f64 {
        let folded = self.fold_counts(full);
        let n: u64 = folded.iter().flat_map(|c| c.iter()).sum();
        if n == 0 {
            return 0.0;
        }
        folded.iter().map(entropy_sum).sum::<f64>() / n as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub c2: usize,
    pub left: (usize, usize),
    pub right: (usize, usize),
    /// Increase of the tree's conditional entropy, bits per symbol.
    pub loss: f64,
}

/// Losses this small count as exact; they absorb rounding in the entropy sums.
pub const ZERO_LOSS: f64 = 1e-12;

/// Greedy left-to-right merging of adjacent C3 leaves under every C2 node.
///
/// `full_counts` are BR counts per full-tree leaf. A merge is kept when it
/// raises the conditional entropy of the tree by less than `delta` bits
/// per symbol (or by no more than rounding noise).
pub fn merge(tree: &ContextTree, full_counts: &[Counts], delta: f64) -> Result<(ContextTree, Vec<MergeStep>)> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!("merge threshold {delta} < 0")));
    }
    if full_counts.len() != tree.full_leaf_count() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} leaf counts", tree.full_leaf_count()),
            actual: format!("{}", full_counts.len()),
        });
    }
    let total: u64 = full_counts.iter().flat_map(|c| c.iter()).sum();
    let norm = total.max(1) as f64;
    let mut steps = Vec::new();
    let mut starts = Vec::with_capacity(tree.starts.len());
    for (c2, node) in tree.starts.iter().enumerate() {
        // counts of each current leaf of this node
        let bounds: Vec<(usize, usize)> = node
            .iter()
            .enumerate()
            .map(|(i, &lo)| (lo, node.get(i + 1).copied().unwrap_or(C3_LEVELS) - 1))
            .collect();
        let leaf_counts = |lo: usize, hi: usize| {
            let mut acc = [0u64; 4];
            for c3 in lo..=hi {
                let c = &full_counts[1 + c2 * C3_LEVELS + c3];
                for s in 0..4 {
                    acc[s] += c[s];
                }
            }
            acc
        };
        let mut out = vec![bounds[0].0];
        let mut cur = bounds[0];
        for &next in &bounds[1..] {
            let a = leaf_counts(cur.0, cur.1);
            let b = leaf_counts(next.0, next.1);
            let ab = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
            let loss = (entropy_sum(&ab) - entropy_sum(&a) - entropy_sum(&b)) / norm;
            if loss < delta || loss <= ZERO_LOSS {
                steps.push(MergeStep { c2, left: cur, right: next, loss });
                cur = (cur.0, next.1);
            } else {
                out.push(next.0);
                cur = next;
            }
        }
        starts.push(out);
    }
    Ok((ContextTree::with_starts(tree.nc.clone(), tree.no.clone(), TreeKind::Merged, starts), steps))
}
