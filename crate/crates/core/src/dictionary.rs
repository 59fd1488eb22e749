//! Partitioned DCT dictionaries over NR supports.
//!
//! Atoms are indexed by their parent frequency pair, stored as `(row, col)`
//! of the coefficient grid (vertical frequency first). Atom `k` lives at
//! `row = k / width`, `col = k % width`.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CanonicalShape, NrMask};

/// Restriction norms below this are treated as zero.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Orthonormal DCT-II matrix, `m[k * n + i]` = basis `k` at sample `i`.
pub fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let nf = n as f64;
    for k in 0..n {
        let a = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
        for i in 0..n {
            m[k * n + i] = a * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos();
        }
    }
    m
}

/// Separable 2D DCT-II on a `width x height` grid.
#[derive(Clone, Debug)]
pub struct DctBasis {
    pub width: usize,
    pub height: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl DctBasis {
    pub fn new(width: usize, height: usize) -> Self {
        DctBasis { width, height, rows: dct_matrix(height), cols: dct_matrix(width) }
    }

    /// Basis `(row, col)` sampled at pixel `(x, y)`.
    #[inline]
    pub fn value(&self, row: usize, col: usize, x: usize, y: usize) -> f64 {
        self.rows[row * self.height + y] * self.cols[col * self.width + x]
    }

    /// Full basis image in raster order.
    pub fn basis(&self, row: usize, col: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.value(row, col, x, y));
            }
        }
        out
    }

    /// Forward transform of a raster image into a `(row, col)` grid.
    pub fn forward(&self, image: &[f64]) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        assert_eq!(image.len(), w * h);
        // along x first
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            for c in 0..w {
                tmp[y * w + c] = (0..w).map(|x| self.cols[c * w + x] * image[y * w + x]).sum();
            }
        }
        let mut out = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                out[r * w + c] = (0..h).map(|y| self.rows[r * h + y] * tmp[y * w + c]).sum();
            }
        }
        out
    }

    /// Inverse transform of a `(row, col)` coefficient grid into a raster image.
    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let (w, h) = (self.width, self.height);
        assert_eq!(coeffs.len(), w * h);
        let mut tmp = vec![0.0; w * h];
        for y in 0..h {
            for c in 0..w {
                tmp[y * w + c] = (0..h).map(|r| self.rows[r * h + y] * coeffs[r * w + c]).sum();
            }
        }
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                out[y * w + x] = (0..w).map(|c| self.cols[c * w + x] * tmp[y * w + c]).sum();
            }
        }
        out
    }
}

/// One dictionary element.
#[derive(Clone, Debug)]
pub struct Atom<'a> {
    pub freq: (usize, usize),
    pub values: &'a [f64],
    pub restriction_norm: f64,
}

/// DCT bases of a bounding box restricted to an NR support and unit-normalized.
#[derive(Debug)]
pub struct PartitionedDictionary {
    shape_id: Option<usize>,
    mask: NrMask,
    support: Vec<(usize, usize)>,
    basis: DctBasis,
    /// atom-major, `atom_count x area`
    atoms: Vec<f64>,
    norms: Vec<f64>,
    gram: OnceLock<Vec<f64>>,
}

impl Clone for PartitionedDictionary {
    fn clone(&self) -> Self {
        let gram = OnceLock::new();
        if let Some(g) = self.gram.get() {
            let _ = gram.set(g.clone());
        }
        PartitionedDictionary {
            shape_id: self.shape_id,
            mask: self.mask.clone(),
            support: self.support.clone(),
            basis: self.basis.clone(),
            atoms: self.atoms.clone(),
            norms: self.norms.clone(),
            gram,
        }
    }
}

pub fn build_dictionary(shape: &CanonicalShape) -> PartitionedDictionary {
    let mut d = PartitionedDictionary::from_mask(&shape.mask);
    d.shape_id = Some(shape.id);
    d
}

impl PartitionedDictionary {
    pub fn from_mask(mask: &NrMask) -> Self {
        let (w, h) = (mask.width(), mask.height());
        let basis = DctBasis::new(w, h);
        let support = mask.support();
        let area = support.len();
        let mut atoms = vec![0.0; w * h * area];
        let mut norms = vec![0.0; w * h];
        for r in 0..h {
            for c in 0..w {
                let k = r * w + c;
                let a = &mut atoms[k * area..(k + 1) * area];
                for (i, &(x, y)) in support.iter().enumerate() {
                    a[i] = basis.value(r, c, x, y);
                }
                let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                norms[k] = n;
                if n >= DEGENERATE_EPS {
                    a.iter_mut().for_each(|v| *v /= n);
                } else {
                    a.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        PartitionedDictionary { shape_id: None, mask: mask.clone(), support, basis, atoms, norms, gram: OnceLock::new() }
    }

    pub fn shape_id(&self) -> Option<usize> {
        self.shape_id
    }

    pub fn mask(&self) -> &NrMask {
        &self.mask
    }

    pub fn basis(&self) -> &DctBasis {
        &self.basis
    }

    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    /// Support pixels `(x, y)` in raster order; signals are laid out this way.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    pub fn area(&self) -> usize {
        self.support.len()
    }

    pub fn atom_count(&self) -> usize {
        self.norms.len()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width() + col
    }

    pub fn freq(&self, k: usize) -> (usize, usize) {
        (k / self.width(), k % self.width())
    }

    pub fn atom_values(&self, k: usize) -> &[f64] {
        let a = self.area();
        &self.atoms[k * a..(k + 1) * a]
    }

    pub fn atom(&self, k: usize) -> Atom<'_> {
        Atom { freq: self.freq(k), values: self.atom_values(k), restriction_norm: self.norms[k] }
    }

    pub fn restriction_norm(&self, k: usize) -> f64 {
        self.norms[k]
    }

    pub fn restriction_norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn is_degenerate(&self, k: usize) -> bool {
        self.norms[k] < DEGENERATE_EPS
    }

    /// Inner products of every atom with a support signal.
    pub fn analyze(&self, signal: &[f64]) -> Vec<f64> {
        let a = self.area();
        assert_eq!(signal.len(), a);
        self.atoms.chunks_exact(a).map(|atom| dot(atom, signal)).collect()
    }

    /// Full Gram matrix, computed on first use.
    pub fn gram(&self) -> &[f64] {
        self.gram.get_or_init(|| {
            let n = self.atom_count();
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let ai = self.atom_values(i);
                    (0..n).map(|j| dot(ai, self.atom_values(j))).collect()
                })
                .collect();
            rows.concat()
        })
    }

    pub fn gram_entry(&self, i: usize, j: usize) -> f64 {
        match self.gram.get() {
            Some(g) => g[i * self.atom_count() + j],
            None => dot(self.atom_values(i), self.atom_values(j)),
        }
    }

    /// Absolute normalized inner product of two atoms; 0 when either is degenerate.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.gram_entry(i, j).abs()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|corr|` between the atom at `pos` and its neighbours at offsets
/// `-radius..=radius` in both directions; `None` outside the grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub position: (usize, usize),
    pub radius: usize,
    pub values: Vec<Option<f64>>,
}

impl CorrelationMap {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn get(&self, dr: isize, dc: isize) -> Option<f64> {
        let r = self.radius as isize;
        if dr.abs() > r || dc.abs() > r {
            return None;
        }
        self.values[((dr + r) as usize) * self.side() + (dc + r) as usize]
    }

    /// Larger over smaller of the mean `|corr|` at odd and even l1 offsets,
    /// excluding the centre.
    pub fn checkerboard_ratio(&self) -> f64 {
        let r = self.radius as isize;
        let (mut odd, mut n_odd, mut even, mut n_even) = (0.0, 0usize, 0.0, 0usize);
        for dr in -r..=r {
            for dc in -r..=r {
                if dr == 0 && dc == 0 {
                    continue;
                }
                if let Some(v) = self.get(dr, dc) {
                    if (dr + dc).rem_euclid(2) == 1 {
                        odd += v;
                        n_odd += 1;
                    } else {
                        even += v;
                        n_even += 1;
                    }
                }
            }
        }
        let odd = odd / n_odd.max(1) as f64;
        let even = even / n_even.max(1) as f64;
        odd.max(even) / odd.min(even)
    }
}

pub fn correlation_map(dict: &PartitionedDictionary, position: (usize, usize), radius: usize) -> Result<CorrelationMap> {
    let (h, w) = (dict.height(), dict.width());
    if position.0 >= h || position.1 >= w {
        return Err(Error::InvalidParameter(format!("position {position:?} outside {w}x{h}")));
    }
    let center = dict.index(position.0, position.1);
    let r = radius as isize;
    let mut values = Vec::with_capacity((2 * radius + 1).pow(2));
    for dr in -r..=r {
        for dc in -r..=r {
            let (pr, pc) = (position.0 as isize + dr, position.1 as isize + dc);
            values.push(if pr < 0 || pc < 0 || pr >= h as isize || pc >= w as isize {
                None
            } else {
                Some(dict.correlation(center, dict.index(pr as usize, pc as usize)))
            });
        }
    }
    Ok(CorrelationMap { position, radius, values })
}

/// Causal bottom-right offsets `(dr, dc)` with `dr, dc >= 0` and
/// `1 <= dr + dc <= n_nbd`, ordered by l1 distance then row offset.
pub fn causal_offsets(n_nbd: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in 1..=n_nbd {
        for dr in 0..=d {
            out.push((dr, d - dr));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodPartition {
    pub position: (usize, usize),
    pub n_nbd: usize,
    pub th_c: f64,
    pub nc: Vec<(usize, usize)>,
    pub no: Vec<(usize, usize)>,
}

impl NeighborhoodPartition {
    /// The in-bounds neighbourhood `N_t`, in `causal_offsets` order.
    pub fn nt(&self) -> Vec<(usize, usize)> {
        let mut all: Vec<_> = self.nc.iter().chain(&self.no).copied().collect();
        all.sort_by_key(|&(dr, dc)| (dr + dc, dr));
        all
    }
}

pub fn split_neighborhood(
    dict: &PartitionedDictionary,
    position: (usize, usize),
    n_nbd: usize,
    th_c: f64,
) -> Result<NeighborhoodPartition> {
    if n_nbd == 0 {
        return Err(Error::InvalidParameter("n_nbd must be at least 1".into()));
    }
    if !(th_c > 0.0 && th_c <= 1.0) {
        return Err(Error::InvalidParameter(format!("th_c {th_c} outside (0, 1]")));
    }
    let (h, w) = (dict.height(), dict.width());
    if position.0 >= h || position.1 >= w {
        return Err(Error::InvalidParameter(format!("position {position:?} outside {w}x{h}")));
    }
    let center = dict.index(position.0, position.1);
    let (mut nc, mut no) = (Vec::new(), Vec::new());
    for (dr, dc) in causal_offsets(n_nbd) {
        let (r, c) = (position.0 + dr, position.1 + dc);
        if r >= h || c >= w {
            continue;
        }
        if dict.correlation(center, dict.index(r, c)) >= th_c {
            nc.push((dr, dc));
        } else {
            no.push((dr, dc));
        }
    }
    Ok(NeighborhoodPartition { position, n_nbd, th_c, nc, no })
}

/// Partitions for every grid position, row-major.
pub fn neighborhood_map(dict: &PartitionedDictionary, n_nbd: usize, th_c: f64) -> Result<Vec<NeighborhoodPartition>> {
    let mut out = Vec::with_capacity(dict.atom_count());
    for r in 0..dict.height() {
        for c in 0..dict.width() {
            out.push(split_neighborhood(dict, (r, c), n_nbd, th_c)?);
        }
    }
    Ok(out)
}
