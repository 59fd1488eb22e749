//! Residual-block datasets: synthetic AR(1) fields, block-matching
//! residuals from frame pairs, seeded splits and the file formats.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CanonicalShape, NrMask};
use crate::transform::{CoefficientBlock, NrSignal};

/// One residual block on its shape's bounding box; cells outside the
/// support are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidualBlock {
    pub shape_id: usize,
    pub width: usize,
    pub height: usize,
    pub values: Vec<i16>,
}

impl ResidualBlock {
    pub fn signal(&self, mask: &NrMask) -> NrSignal {
        let samples = mask.support().iter().map(|&(x, y)| self.values[y * self.width + x] as f64).collect();
        NrSignal::new(self.shape_id, samples)
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|&v| (v as f64).powi(2)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusSource {
    Synthetic { rho: f64, sigma: f64, seed: u64 },
    Frames { current: String, previous: String, radius: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub source: CorpusSource,
    pub shapes: Vec<usize>,
    pub blocks_per_shape: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one block, independent of generation order.
pub fn block_seed(seed: u64, shape_id: usize, index: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ shape_id as u64) ^ index as u64)
}

fn ar1_filter(v: &mut [f64], stride: usize, n: usize, rho: f64) {
    let innov = (1.0 - rho * rho).sqrt();
    for i in 1..n {
        v[i * stride] = rho * v[(i - 1) * stride] + innov * v[i * stride];
    }
}

/// Stationary separable AR(1) field with unit variance.
pub fn ar1_field(width: usize, height: usize, rho: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut f: Vec<f64> = (0..width * height).map(|_| StandardNormal.sample(rng)).collect();
    for y in 0..height {
        ar1_filter(&mut f[y * width..], 1, width, rho);
    }
    for x in 0..width {
        ar1_filter(&mut f[x..], width, height, rho);
    }
    f
}

fn to_i16(v: f64) -> i16 {
    v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn gen_synthetic(shape: &CanonicalShape, rho: f64, sigma: f64, seed: u64, count: usize) -> Result<Vec<ResidualBlock>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("rho {rho} outside [0, 1)")));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma {sigma} must be positive")));
    }
    let (w, h) = (shape.width(), shape.height());
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(block_seed(seed, shape.id, i));
            let f = ar1_field(w, h, rho, &mut rng);
            let values = (0..w * h).map(|k| if shape.mask.get(k % w, k / w) { to_i16(sigma * f[k]) } else { 0 }).collect();
            ResidualBlock { shape_id: shape.id, width: w, height: h, values }
        })
        .collect())
}

/// 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayFrame {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

fn pgm_token(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadContainer("malformed PGM header".into()))
}

/// Reads a binary (P5) PGM with maxval below 256.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayFrame> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::BadContainer("not a binary PGM".into()));
    }
    let mut pos = 2;
    let width = pgm_token(bytes, &mut pos)?;
    let height = pgm_token(bytes, &mut pos)?;
    let maxval = pgm_token(bytes, &mut pos)?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::BadContainer(format!("unsupported PGM maxval {maxval}")));
    }
    pos += 1;
    let n = width * height;
    let data = bytes.get(pos..pos + n).ok_or_else(|| Error::BadContainer("truncated PGM raster".into()))?;
    Ok(GrayFrame { width, height, pixels: data.to_vec() })
}

pub fn write_pgm(width: usize, height: usize, maxval: u8, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// `cur(x, y)` is predicted from `prev(x - dx, y - dy)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

/// Full-search block matching minimizing SAD. Candidates must lie inside
/// the previous frame; ties go to the shorter vector, then raster order.
pub fn block_match(cur: &GrayFrame, prev: &GrayFrame, x0: usize, y0: usize, w: usize, h: usize, radius: usize) -> (MotionVector, u64) {
    let r = radius as i32;
    let mut best = (u64::MAX, i32::MAX, MotionVector::default());
    for dy in -r..=r {
        for dx in -r..=r {
            let (px, py) = (x0 as i32 - dx, y0 as i32 - dy);
            if px < 0 || py < 0 || px as usize + w > prev.width || py as usize + h > prev.height {
                continue;
            }
            let mut sad = 0u64;
            for y in 0..h {
                for x in 0..w {
                    let a = cur.get(x0 + x, y0 + y) as i32;
                    let b = prev.get(px as usize + x, py as usize + y) as i32;
                    sad += a.abs_diff(b) as u64;
                }
            }
            let key = (sad, dx.abs() + dy.abs());
            if key < (best.0, best.1) {
                best = (sad, key.1, MotionVector { dx, dy });
            }
        }
    }
    (best.2, best.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameBlock {
    pub block: ResidualBlock,
    pub x: usize,
    pub y: usize,
    pub mv: MotionVector,
    /// Energy of the current-frame pixels on the support.
    pub source_energy: f64,
}

/// Motion-compensated residuals for every bounding-box tile of the frame
/// pair, restricted to the shape support.
pub fn gen_from_frames(shape: &CanonicalShape, cur: &GrayFrame, prev: &GrayFrame, radius: usize) -> Result<Vec<FrameBlock>> {
    if (cur.width, cur.height) != (prev.width, prev.height) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", cur.width, cur.height),
            actual: format!("{}x{}", prev.width, prev.height),
        });
    }
    let (w, h) = (shape.width(), shape.height());
    let tiles: Vec<(usize, usize)> =
        (0..cur.height / h).flat_map(|ty| (0..cur.width / w).map(move |tx| (tx * w, ty * h))).collect();
    Ok(tiles
        .into_par_iter()
        .map(|(x0, y0)| {
            let (mv, _) = block_match(cur, prev, x0, y0, w, h, radius);
            let mut values = vec![0i16; w * h];
            let mut source_energy = 0.0;
            for y in 0..h {
                for x in 0..w {
                    if !shape.mask.get(x, y) {
                        continue;
                    }
                    let c = cur.get(x0 + x, y0 + y) as i32;
                    let p = prev.get((x0 as i32 + x as i32 - mv.dx) as usize, (y0 as i32 + y as i32 - mv.dy) as usize) as i32;
                    values[y * w + x] = (c - p) as i16;
                    source_energy += (c * c) as f64;
                }
            }
            FrameBlock { block: ResidualBlock { shape_id: shape.id, width: w, height: h, values }, x: x0, y: y0, mv, source_energy }
        })
        .collect())
}

/// Smooth textured frame and a copy moved by `mv` with added noise; a
/// stand-in for a natural frame pair.
pub fn synthetic_frame_pair(width: usize, height: usize, mv: MotionVector, noise: f64, seed: u64) -> (GrayFrame, GrayFrame) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ar1_field(width, height, 0.95, &mut rng);
    let prev: Vec<u8> = f.iter().map(|v| (128.0 + 40.0 * v).round().clamp(0.0, 255.0) as u8).collect();
    let mut cur = vec![0u8; width * height];
    for y in 0..height {
        for x in 0..width {
            let sx = (x as i32 - mv.dx).clamp(0, width as i32 - 1) as usize;
            let sy = (y as i32 - mv.dy).clamp(0, height as i32 - 1) as usize;
            let n: f64 = StandardNormal.sample(&mut rng);
            cur[y * width + x] = (prev[sy * width + sx] as f64 + noise * n).round().clamp(0.0, 255.0) as u8;
        }
    }
    (GrayFrame { width, height, pixels: cur }, GrayFrame { width, height, pixels: prev })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    pub fn select<T: Clone>(&self, items: &[T]) -> (Vec<T>, Vec<T>) {
        (self.train.iter().map(|&i| items[i].clone()).collect(), self.test.iter().map(|&i| items[i].clone()).collect())
    }
}

/// Seeded shuffle and an 8:2 cut.
pub fn split(n: usize, seed: u64) -> Result<DatasetSplit> {
    if n < 5 {
        return Err(Error::InvalidParameter(format!("need at least 5 blocks to split, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = (4 * n + 2) / 5;
    let test = idx.split_off(n_train);
    Ok(DatasetSplit { seed, train: idx, test })
}

pub const NRTX_MAGIC: &[u8; 4] = b"NRTX";

/// Little-endian int16 grids behind an 8-byte header: magic "NRTX",
/// width u8, height u8, count u16.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockFile {
    pub width: usize,
    pub height: usize,
    pub grids: Vec<Vec<i16>>,
}

impl BlockFile {
    pub fn from_residuals(blocks: &[ResidualBlock]) -> Result<Self> {
        let (w, h) = blocks.first().map_or((0, 0), |b| (b.width, b.height));
        if blocks.iter().any(|b| (b.width, b.height) != (w, h)) {
            return Err(Error::InvalidParameter("mixed block sizes in one file".into()));
        }
        Ok(BlockFile { width: w, height: h, grids: blocks.iter().map(|b| b.values.clone()).collect() })
    }

    pub fn from_coefficients(blocks: &[CoefficientBlock]) -> Result<Self> {
        let (w, h) = blocks.first().map_or((0, 0), |b| (b.width, b.height));
        let mut grids = Vec::with_capacity(blocks.len());
        for b in blocks {
            if (b.width, b.height) != (w, h) {
                return Err(Error::InvalidParameter("mixed block sizes in one file".into()));
            }
            grids.push(
                b.levels.iter().map(|&l| i16::try_from(l).map_err(|_| Error::LevelOutOfRange(l as i64))).collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(BlockFile { width: w, height: h, grids })
    }

    pub fn residuals(&self, shape_id: usize) -> Vec<ResidualBlock> {
        self.grids
            .iter()
            .map(|g| ResidualBlock { shape_id, width: self.width, height: self.height, values: g.clone() })
            .collect()
    }

    pub fn coefficients(&self) -> Vec<CoefficientBlock> {
        self.grids
            .iter()
            .map(|g| CoefficientBlock { width: self.width, height: self.height, levels: g.iter().map(|&v| v as i32).collect() })
            .collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let w = u8::try_from(self.width).map_err(|_| Error::BadContainer("width exceeds 255".into()))?;
        let h = u8::try_from(self.height).map_err(|_| Error::BadContainer("height exceeds 255".into()))?;
        let n = u16::try_from(self.grids.len()).map_err(|_| Error::BadContainer("more than 65535 blocks".into()))?;
        let mut out = Vec::with_capacity(8 + self.grids.len() * self.width * self.height * 2);
        out.extend_from_slice(NRTX_MAGIC);
        out.push(w);
        out.push(h);
        out.extend_from_slice(&n.to_le_bytes());
        for g in &self.grids {
            for v in g {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != NRTX_MAGIC {
            return Err(Error::BadContainer("missing NRTX header".into()));
        }
        let (width, height) = (bytes[4] as usize, bytes[5] as usize);
        let count = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
        let cells = width * height;
        if bytes.len() != 8 + count * cells * 2 {
            return Err(Error::BadContainer(format!("NRTX payload is {} bytes, expected {}", bytes.len() - 8, count * cells * 2)));
        }
        let grids = bytes[8..]
            .chunks_exact(cells * 2)
            .map(|g| g.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect())
            .collect();
        Ok(BlockFile { width, height, grids })
    }
}
