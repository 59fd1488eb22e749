use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbols::{br_symbol, BR_ALPHABET};
use super::{ContextId, Contexter};
use crate::transform::CoefficientBlock;

pub type Counts = [u64; BR_ALPHABET];

/// Minimum probability of any BR symbol under smoothed models.
pub const PROB_FLOOR: f64 = 1.0 / 32768.0;

/// `n log2 n - sum n_i log2 n_i`: total code length of a leaf in bits
/// under its own empirical distribution.
pub fn entropy_sum(c: &Counts) -> f64 {
    let n: u64 = c.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let xlogx = |v: u64| if v == 0 { 0.0 } else { v as f64 * (v as f64).log2() };
    xlogx(n) - c.iter().map(|&v| xlogx(v)).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothing {
    /// Relative frequencies; unseen symbols get probability 0.
    MaximumLikelihood,
    /// Add-1/2 estimate mixed with a 2^-15 floor.
    KrichevskyTrofimov,
    /// 1/4 for every symbol, ignoring counts.
    Uniform,
}

/// BR counts per context `(group, leaf)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityModel {
    pub smoothing: Smoothing,
    pub counts: Vec<Vec<Counts>>,
}

impl ProbabilityModel {
    pub fn empty(contexter: &dyn Contexter, smoothing: Smoothing) -> Self {
        let counts = (0..contexter.group_count()).map(|g| vec![[0; BR_ALPHABET]; contexter.leaf_count(g)]).collect();
        ProbabilityModel { smoothing, counts }
    }

    pub fn with_counts(counts: Vec<Vec<Counts>>, smoothing: Smoothing) -> Self {
        ProbabilityModel { smoothing, counts }
    }

    pub fn add(&mut self, ctx: ContextId, symbol: usize) {
        self.counts[ctx.0][ctx.1][symbol] += 1;
    }

    pub fn absorb(&mut self, other: &ProbabilityModel) {
        for (g, og) in self.counts.iter_mut().zip(&other.counts) {
            for (l, ol) in g.iter_mut().zip(og) {
                for s in 0..BR_ALPHABET {
                    l[s] += ol[s];
                }
            }
        }
    }

    pub fn counts(&self, ctx: ContextId) -> &Counts {
        &self.counts[ctx.0][ctx.1]
    }

    pub fn global_counts(&self) -> Counts {
        let mut g = [0; BR_ALPHABET];
        for c in self.counts.iter().flatten() {
            for s in 0..BR_ALPHABET {
                g[s] += c[s];
            }
        }
        g
    }

    pub fn total(&self) -> u64 {
        self.global_counts().iter().sum()
    }

    /// Contexts that received at least one symbol.
    pub fn used_contexts(&self) -> usize {
        self.counts.iter().flatten().filter(|c| c.iter().any(|&v| v > 0)).count()
    }

    fn estimate(&self, c: &Counts) -> [f64; BR_ALPHABET] {
        let n: u64 = c.iter().sum();
        let mut p = [0.0; BR_ALPHABET];
        match self.smoothing {
            Smoothing::Uniform => p = [1.0 / BR_ALPHABET as f64; BR_ALPHABET],
            Smoothing::MaximumLikelihood => {
                for s in 0..BR_ALPHABET {
                    p[s] = c[s] as f64 / n as f64;
                }
            }
            Smoothing::KrichevskyTrofimov => {
                let denom = n as f64 + 0.5 * BR_ALPHABET as f64;
                let keep = 1.0 - BR_ALPHABET as f64 * PROB_FLOOR;
                for s in 0..BR_ALPHABET {
                    p[s] = keep * (c[s] as f64 + 0.5) / denom + PROB_FLOOR;
                }
            }
        }
        p
    }

    /// Conditional BR distribution of a context. Contexts without training
    /// data fall back to the pooled distribution of the whole model.
    pub fn probabilities(&self, ctx: ContextId) -> [f64; BR_ALPHABET] {
        let c = self.counts(ctx);
        if self.smoothing != Smoothing::Uniform && c.iter().all(|&v| v == 0) {
            let g = self.global_counts();
            if g.iter().all(|&v| v == 0) {
                return [1.0 / BR_ALPHABET as f64; BR_ALPHABET];
            }
            return self.estimate(&g);
        }
        self.estimate(c)
    }

    pub fn with_smoothing(&self, smoothing: Smoothing) -> Self {
        ProbabilityModel { smoothing, counts: self.counts.clone() }
    }
}

/// Accumulates BR counts over blocks in coding order. Blocks are processed
/// in parallel; counts are additive so the result does not depend on
/// order or thread count.
pub fn train(blocks: &[CoefficientBlock], contexter: &dyn Contexter, smoothing: Smoothing) -> ProbabilityModel {
    let (w, h) = contexter.dims();
    let scan = super::scan::zigzag(w, h);
    blocks
        .par_chunks(256)
        .map(|chunk| {
            let mut m = ProbabilityModel::empty(contexter, smoothing);
            for b in chunk {
                for (r, c) in scan.coding_order() {
                    m.add(contexter.context(b, r, c), br_symbol(b.get(r, c)));
                }
            }
            m
        })
        .reduce(
            || ProbabilityModel::empty(contexter, smoothing),
            |mut a, b| {
                a.absorb(&b);
                a
            },
        )
}
