//! Cross conditional entropy of test data under trained models.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{Counts, ProbabilityModel};
use super::scan::zigzag;
use super::symbols::{br_symbol, BR_ALPHABET};
use super::{ContextId, Contexter};
use crate::error::{Error, Result};
use crate::transform::CoefficientBlock;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionEntropy {
    pub row: usize,
    pub col: usize,
    pub scan_index: usize,
    pub n_symbols: u64,
    /// H_ts at this position, bits per BR symbol.
    pub bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub width: usize,
    pub height: usize,
    /// In scan order.
    pub positions: Vec<PositionEntropy>,
}

impl EntropyReport {
    pub fn total_symbols(&self) -> u64 {
        self.positions.iter().map(|p| p.n_symbols).sum()
    }

    /// Total code length of the test set in bits.
    pub fn total_bits(&self) -> f64 {
        self.positions.iter().map(|p| p.bits * p.n_symbols as f64).sum()
    }

    /// Symbol-weighted H_ts of the whole system.
    pub fn bits_per_symbol(&self) -> f64 {
        self.total_bits() / self.total_symbols().max(1) as f64
    }

    /// Sum of per-position H_ts.
    pub fn position_sum(&self) -> f64 {
        self.positions.iter().map(|p| p.bits).sum()
    }
}

/// Tallies `(context, BR)` pairs of the test blocks at every position.
pub fn tally(blocks: &[CoefficientBlock], contexter: &dyn Contexter) -> Vec<HashMap<ContextId, Counts>> {
    let (w, h) = contexter.dims();
    (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (r, c) = (i / w, i % w);
            let mut m: HashMap<ContextId, Counts> = HashMap::new();
            for b in blocks {
                m.entry(contexter.context(b, r, c)).or_insert([0; BR_ALPHABET])[br_symbol(b.get(r, c))] += 1;
            }
            m
        })
        .collect()
}

/// H_ts = -sum p_ts(i, j) log2 p_tr(i | j) per position, with p_tr from
/// `model` and p_ts the empirical joint of the test set.
pub fn eval_hts(model: &ProbabilityModel, test: &[CoefficientBlock], contexter: &dyn Contexter) -> EntropyReport {
    let (w, h) = contexter.dims();
    let scan = zigzag(w, h);
    let tallies = tally(test, contexter);
    let mut positions = Vec::with_capacity(w * h);
    for (i, &(r, c)) in scan.order.iter().enumerate() {
        let t = &tallies[r * w + c];
        let mut keys: Vec<&ContextId> = t.keys().collect();
        keys.sort();
        let mut n = 0u64;
        let mut bits = 0.0;
        for k in keys {
            let p = model.probabilities(*k);
            for s in 0..BR_ALPHABET {
                let cnt = t[k][s];
                if cnt > 0 {
                    n += cnt;
                    bits -= cnt as f64 * p[s].log2();
                }
            }
        }
        positions.push(PositionEntropy { row: r, col: c, scan_index: i, n_symbols: n, bits: if n == 0 { 0.0 } else { bits / n as f64 } });
    }
    EntropyReport { width: w, height: h, positions }
}

/// Top-left diagonal region: anti-diagonal index below `max(w, h)`.
pub fn in_top_left(row: usize, col: usize, width: usize, height: usize) -> bool {
    row + col < width.max(height)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub row: usize,
    pub col: usize,
    pub scan_index: usize,
    pub h_base: f64,
    pub h_prop: f64,
    /// `h_base - h_prop`; positive is a saving.
    pub delta: f64,
    pub in_top_left: bool,
    pub n_symbols: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn delta_total(&self) -> f64 {
        self.rows.iter().map(|r| r.delta).sum()
    }

    pub fn delta_top_left(&self) -> f64 {
        self.rows.iter().filter(|r| r.in_top_left).map(|r| r.delta).sum()
    }

    /// Positions with a loss.
    pub fn np(&self) -> usize {
        self.rows.iter().filter(|r| r.delta < 0.0).count()
    }

    pub fn np_top_left(&self) -> usize {
        self.rows.iter().filter(|r| r.in_top_left && r.delta < 0.0).count()
    }

    /// Share of positions where the proposal is no worse than the base.
    pub fn no_worse_share(&self) -> f64 {
        let ok = self.rows.iter().filter(|r| r.delta >= 0.0).count();
        ok as f64 / self.rows.len().max(1) as f64
    }
}

pub fn compare(base: &EntropyReport, prop: &EntropyReport) -> Result<Comparison> {
    if (base.width, base.height) != (prop.width, prop.height) || base.positions.len() != prop.positions.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} report", base.width, base.height),
            actual: format!("{}x{} report", prop.width, prop.height),
        });
    }
    let mut rows = Vec::with_capacity(base.positions.len());
    for (a, b) in base.positions.iter().zip(&prop.positions) {
        if (a.row, a.col) != (b.row, b.col) {
            return Err(Error::InvalidParameter(format!("position sets differ at scan index {}", a.scan_index)));
        }
        rows.push(ComparisonRow {
            row: a.row,
            col: a.col,
            scan_index: a.scan_index,
            h_base: a.bits,
            h_prop: b.bits,
            delta: a.bits - b.bits,
            in_top_left: in_top_left(a.row, a.col, base.width, base.height),
            n_symbols: a.n_symbols,
        });
    }
    Ok(Comparison { rows })
}
