//! Sparse NR transform: OMP in a partitioned dictionary, the scaling method
//! and reconstruction through a regular inverse DCT.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::{dot, PartitionedDictionary};
use crate::error::{Error, Result};

pub const MAX_CONDITION: f64 = 1e8;

/// Residual samples over a shape support, in support raster order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NrSignal {
    pub shape_id: usize,
    pub samples: Vec<f64>,
}

impl NrSignal {
    pub fn new(shape_id: usize, samples: Vec<f64>) -> Self {
        NrSignal { shape_id, samples }
    }

    pub fn norm(&self) -> f64 {
        dot(&self.samples, &self.samples).sqrt()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseCode {
    /// Atom indices in selection order.
    pub selected: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    /// Residual norm before the first and after every selection.
    pub residual_history: Vec<f64>,
    /// Pursuit stopped because the selected sub-Gram became ill conditioned.
    pub ill_conditioned: bool,
}

impl SparseCode {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// `sum c_k a_k` over the support.
    pub fn approximation(&self, dict: &PartitionedDictionary) -> Vec<f64> {
        let mut out = vec![0.0; dict.area()];
        for (&k, &c) in self.selected.iter().zip(&self.coefficients) {
            for (o, a) in out.iter_mut().zip(dict.atom_values(k)) {
                *o += c * a;
            }
        }
        out
    }
}

/// Lower-triangular Cholesky factor of the selected sub-Gram, grown one row
/// per selected atom.
struct Cholesky {
    n: usize,
    l: Vec<f64>,
    cap: usize,
}

impl Cholesky {
    fn new(cap: usize) -> Self {
        Cholesky { n: 0, l: vec![0.0; cap * cap], cap }
    }

    /// Appends a row given the new column of the sub-Gram; returns the new
    /// diagonal entry squared.
    fn push(&mut self, col: &[f64], diag: f64) -> f64 {
        let n = self.n;
        let cap = self.cap;
        for i in 0..n {
            let mut s = col[i];
            for j in 0..i {
                s -= self.l[i * cap + j] * self.l[n * cap + j];
            }
            self.l[n * cap + i] = s / self.l[i * cap + i];
        }
        let row = &self.l[n * cap..n * cap + n];
        let d2 = diag - dot(row, row);
        self.l[n * cap + n] = d2.max(0.0).sqrt();
        self.n += 1;
        d2
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, cap) = (self.n, self.cap);
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.l[i * cap + j] * z[j];
            }
            z[i] = s / self.l[i * cap + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.l[j * cap + i] * z[j];
            }
            z[i] = s / self.l[i * cap + i];
        }
        z
    }

    fn condition_estimate(&self) -> f64 {
        let d = (0..self.n).map(|i| self.l[i * self.cap + i]);
        let (lo, hi) = d.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        (hi / lo).powi(2)
    }
}

/// Orthogonal matching pursuit.
///
/// Stops when the residual norm drops to `eps_res * ||signal||`, after
/// `k_max` atoms, when no admissible atom is left, or when the selected set
/// becomes ill conditioned.
pub fn omp(dict: &PartitionedDictionary, signal: &NrSignal, eps_res: f64, k_max: usize) -> Result<SparseCode> {
    let x = &signal.samples;
    if x.len() != dict.area() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} samples", dict.area()),
            actual: format!("{} samples", x.len()),
        });
    }
    if !(eps_res >= 0.0) {
        return Err(Error::InvalidParameter(format!("eps_res {eps_res} < 0")));
    }
    if k_max == 0 || k_max > dict.atom_count() {
        return Err(Error::InvalidParameter(format!("k_max {k_max} outside 1..={}", dict.atom_count())));
    }
    let x2 = dot(x, x);
    let x_norm = x2.sqrt();
    let mut code = SparseCode { residual_norm: x_norm, residual_history: vec![x_norm], ..Default::default() };
    if x_norm == 0.0 {
        return Ok(code);
    }
    let target = eps_res * x_norm;
    let n = dict.atom_count();
    let b = dict.analyze(x);
    let mut corr = b.clone();
    let mut used = vec![false; n];
    for k in 0..n {
        used[k] = dict.is_degenerate(k);
    }
    let mut chol = Cholesky::new(k_max);
    let mut b_sel: Vec<f64> = Vec::with_capacity(k_max);
    let mut coeffs: Vec<f64> = Vec::new();
    let gram = dict.gram();
    let mut gram_cols: Vec<&[f64]> = Vec::with_capacity(k_max);

    while code.selected.len() < k_max && code.residual_norm > target {
        let mut best = None;
        let mut best_v = 0.0;
        for k in 0..n {
            if !used[k] && corr[k].abs() > best_v {
                best_v = corr[k].abs();
                best = Some(k);
            }
        }
        let Some(k) = best else { break };
        let col = &gram[k * n..(k + 1) * n];
        let sub: Vec<f64> = code.selected.iter().map(|&j| col[j]).collect();
        let d2 = chol.push(&sub, 1.0);
        if d2 <= 0.0 || chol.condition_estimate() > MAX_CONDITION {
            code.ill_conditioned = true;
            break;
        }
        used[k] = true;
        code.selected.push(k);
        b_sel.push(b[k]);
        gram_cols.push(col);
        coeffs = chol.solve(&b_sel);
        corr.copy_from_slice(&b);
        for (gc, &a) in gram_cols.iter().zip(&coeffs) {
            for (c, &g) in corr.iter_mut().zip(gc.iter()) {
                *c -= a * g;
            }
        }
        let mut r2 = (x2 - dot(&b_sel, &coeffs)).max(0.0);
        // the energy difference cancels badly near exact recovery
        if r2 < 1e-6 * x2 {
            let mut res = x.clone();
            for (&j, &a) in code.selected.iter().zip(&coeffs) {
                for (v, &d) in res.iter_mut().zip(dict.atom_values(j)) {
                    *v -= a * d;
                }
            }
            r2 = dot(&res, &res);
        }
        let r = r2.sqrt().min(code.residual_norm);
        code.residual_norm = r;
        code.residual_history.push(r);
    }
    code.coefficients = coeffs;
    Ok(code)
}

/// Default stopping: near-lossless tolerance and a quarter of the support.
pub fn default_k_max(dict: &PartitionedDictionary) -> usize {
    (dict.area() / 4).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub step: f64,
}

impl QuantParams {
    pub fn new(step: f64) -> Result<Self> {
        if step > 0.0 && step.is_finite() {
            Ok(QuantParams { step })
        } else {
            Err(Error::InvalidParameter(format!("quantizer step {step} must be positive")))
        }
    }

    /// Uniform quantizer, rounding half away from zero.
    pub fn quantize(&self, t: f64) -> i32 {
        (t / self.step).round() as i32
    }
}

/// Quantized levels on the bounding-box grid, `(row, col)` row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoefficientBlock {
    pub width: usize,
    pub height: usize,
    pub levels: Vec<i32>,
}

impl CoefficientBlock {
    pub fn zeros(width: usize, height: usize) -> Self {
        CoefficientBlock { width, height, levels: vec![0; width * height] }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.levels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: i32) {
        self.levels[row * self.width + col] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.levels.iter().all(|&l| l == 0)
    }

    pub fn nonzero_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l != 0).count()
    }
}

/// Real-valued coefficient grid `t = c / s` of the scaling method.
pub fn scaled_coefficients(code: &SparseCode, dict: &PartitionedDictionary) -> Result<Vec<f64>> {
    let mut t = vec![0.0; dict.atom_count()];
    for (&k, &c) in code.selected.iter().zip(&code.coefficients) {
        if dict.is_degenerate(k) {
            return Err(Error::DegenerateAtom(dict.freq(k)));
        }
        t[k] = c / dict.restriction_norm(k);
    }
    Ok(t)
}

pub fn to_coefficient_block(code: &SparseCode, dict: &PartitionedDictionary, q: QuantParams) -> Result<CoefficientBlock> {
    let t = scaled_coefficients(code, dict)?;
    Ok(CoefficientBlock { width: dict.width(), height: dict.height(), levels: t.iter().map(|&v| q.quantize(v)).collect() })
}

/// Inverse DCT of a real coefficient grid, keeping only the support.
/// OMP over a batch of signals; output order follows input order.
pub fn omp_batch(dict: &PartitionedDictionary, signals: &[NrSignal], eps_res: f64, k_max: usize) -> Result<Vec<SparseCode>> {
    dict.gram();
    signals.par_iter().map(|s| omp(dict, s, eps_res, k_max)).collect()
}

pub fn quantize_batch(codes: &[SparseCode], dict: &PartitionedDictionary, q: QuantParams) -> Result<Vec<CoefficientBlock>> {
    codes.par_iter().map(|c| to_coefficient_block(c, dict, q)).collect()
}

pub fn inverse_restricted(grid: &[f64], dict: &PartitionedDictionary) -> Vec<f64> {
    let img = dict.basis().inverse(grid);
    let w = dict.width();
    dict.support().iter().map(|&(x, y)| img[y * w + x]).collect()
}

pub fn reconstruct(block: &CoefficientBlock, q: QuantParams, dict: &PartitionedDictionary) -> Result<NrSignal> {
    if (block.width, block.height) != (dict.width(), dict.height()) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", dict.width(), dict.height()),
            actual: format!("{}x{}", block.width, block.height),
        });
    }
    let grid: Vec<f64> = block.levels.iter().map(|&l| l as f64 * q.step).collect();
    Ok(NrSignal::new(dict.shape_id().unwrap_or(usize::MAX), inverse_restricted(&grid, dict)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    pub sse: f64,
    /// `+inf` when the signals are identical.
    pub psnr: f64,
}

pub fn distortion(a: &NrSignal, b: &NrSignal, peak: f64) -> Result<Distortion> {
    if a.samples.len() != b.samples.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} samples", a.samples.len()),
            actual: format!("{} samples", b.samples.len()),
        });
    }
    let sse: f64 = a.samples.iter().zip(&b.samples).map(|(x, y)| (x - y) * (x - y)).sum();
    let psnr = if sse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak * a.samples.len() as f64 / sse).log10()
    };
    Ok(Distortion { sse, psnr })
}
