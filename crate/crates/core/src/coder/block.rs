//! Coefficient block coding: all-zero flag, then BR / LR / HR / sign per
//! position in reverse zig-zag order.

use serde::{Deserialize, Serialize};

use super::cdf::Cdf15;
use super::range::{RangeDecoder, RangeEncoder};
use crate::context::{br_symbol, zigzag, Contexter, ProbabilityModel, ScanOrder, BR_ALPHABET, LR_CEILING, LR_SYMBOLS, MAX_HR};
use crate::error::{Error, Result};
use crate::transform::CoefficientBlock;

pub const LR_CLASSES: usize = 3;
pub const LR_CATEGORIES: usize = 7;
const LR_OFFSETS: [(usize, usize); 3] = [(0, 1), (1, 0), (1, 1)];
/// Longest Exp-Golomb prefix accepted by the decoder.
const MAX_EG_PREFIX: u32 = 16;

/// Ideal code length per symbol class, in bits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BitAccount {
    pub zero_flag: f64,
    pub br: f64,
    pub lr: f64,
    pub hr: f64,
    pub sign: f64,
    pub br_symbols: u64,
}

impl BitAccount {
    pub fn total(&self) -> f64 {
        self.zero_flag + self.br + self.lr + self.hr + self.sign
    }

    pub fn add(&mut self, o: &BitAccount) {
        self.zero_flag += o.zero_flag;
        self.br += o.br;
        self.lr += o.lr;
        self.hr += o.hr;
        self.sign += o.sign;
        self.br_symbols += o.br_symbols;
    }
}

fn lr_context(block: &CoefficientBlock, row: usize, col: usize) -> usize {
    let class = if row + col == 0 {
        0
    } else if row < 2 && col < 2 {
        1
    } else {
        2
    };
    let sum: u32 = LR_OFFSETS
        .iter()
        .filter_map(|&(dr, dc)| {
            let (r, c) = (row + dr, col + dc);
            (r < block.height && c < block.width).then(|| block.get(r, c).unsigned_abs().min(LR_CEILING))
        })
        .sum();
    class * LR_CATEGORIES + ((sum as usize + 1) >> 1).min(LR_CATEGORIES - 1)
}

fn eg_bits(v: u32) -> u32 {
    32 - (v + 1).leading_zeros()
}

/// Coding state for one stream: BR tables per context, adaptive LR tables
/// and the all-zero flag.
#[derive(Clone)]
pub struct BlockCoder<'a> {
    contexter: &'a dyn Contexter,
    scan: ScanOrder,
    br: Vec<Vec<Cdf15>>,
    lr: Vec<Cdf15>,
    zero: Cdf15,
}

impl<'a> BlockCoder<'a> {
    /// Fixed BR tables quantized from a trained model.
    pub fn with_static_model(contexter: &'a dyn Contexter, model: &ProbabilityModel) -> Result<Self> {
        let mut br = Vec::with_capacity(contexter.group_count());
        for g in 0..contexter.group_count() {
            let leaves = (0..contexter.leaf_count(g))
                .map(|l| Cdf15::from_probabilities(&model.probabilities((g, l)), false))
                .collect::<Result<Vec<_>>>()?;
            br.push(leaves);
        }
        Ok(Self::with_br(contexter, br))
    }

    /// Uniform BR tables that adapt as symbols are coded.
    pub fn adaptive(contexter: &'a dyn Contexter) -> Self {
        let br = (0..contexter.group_count())
            .map(|g| vec![Cdf15::uniform(BR_ALPHABET, true); contexter.leaf_count(g)])
            .collect();
        Self::with_br(contexter, br)
    }

    fn with_br(contexter: &'a dyn Contexter, br: Vec<Vec<Cdf15>>) -> Self {
        let (w, h) = contexter.dims();
        BlockCoder {
            contexter,
            scan: zigzag(w, h),
            br,
            lr: vec![Cdf15::uniform(4, true); LR_CLASSES * LR_CATEGORIES],
            zero: Cdf15::uniform(2, true),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.contexter.dims()
    }

    /// Checksum of every adaptive table.
    pub fn checksum(&self) -> u64 {
        let mut h = self.zero.checksum(0);
        for c in self.br.iter().flatten().chain(&self.lr) {
            h = c.checksum(h);
        }
        h
    }

    pub fn encode_block(&mut self, enc: &mut RangeEncoder, block: &CoefficientBlock) -> Result<BitAccount> {
        let (w, h) = self.dims();
        if (block.width, block.height) != (w, h) {
            return Err(Error::DimensionMismatch { expected: format!("{w}x{h}"), actual: format!("{}x{}", block.width, block.height) });
        }
        let mut acc = BitAccount::default();
        let zero = block.is_zero();
        acc.zero_flag += enc.encode_symbol(&mut self.zero, usize::from(zero));
        if zero {
            return Ok(acc);
        }
        for i in (0..self.scan.len()).rev() {
            let (r, c) = self.scan.order[i];
            let level = block.get(r, c);
            let a = level.unsigned_abs();
            if a as i64 > crate::context::MAX_LEVEL {
                return Err(Error::LevelOutOfRange(level as i64));
            }
            let (g, l) = self.contexter.context(block, r, c);
            acc.br += enc.encode_symbol(&mut self.br[g][l], br_symbol(level));
            acc.br_symbols += 1;
            if a >= 3 {
                let ctx = lr_context(block, r, c);
                let mut rem = a - 3;
                for _ in 0..LR_SYMBOLS {
                    let s = rem.min(3);
                    acc.lr += enc.encode_symbol(&mut self.lr[ctx], s as usize);
                    rem -= s;
                    if s < 3 {
                        break;
                    }
                }
                if a >= LR_CEILING {
                    let v = a - LR_CEILING;
                    let n = eg_bits(v);
                    enc.encode_bits(0, n - 1);
                    enc.encode_bits(v + 1, n);
                    acc.hr += (2 * n - 1) as f64;
                }
            }
            if a != 0 {
                enc.encode_bits(u32::from(level < 0), 1);
                acc.sign += 1.0;
            }
        }
        Ok(acc)
    }

    pub fn decode_block(&mut self, dec: &mut RangeDecoder<'_>) -> Result<CoefficientBlock> {
        let (w, h) = self.dims();
        let mut block = CoefficientBlock::zeros(w, h);
        if dec.decode_symbol(&mut self.zero)? == 1 {
            return Ok(block);
        }
        for i in (0..self.scan.len()).rev() {
            let (r, c) = self.scan.order[i];
            let (g, l) = self.contexter.context(&block, r, c);
            let mut a = dec.decode_symbol(&mut self.br[g][l])? as u32;
            if a == 3 {
                let ctx = lr_context(&block, r, c);
                for _ in 0..LR_SYMBOLS {
                    let s = dec.decode_symbol(&mut self.lr[ctx])? as u32;
                    a += s;
                    if s < 3 {
                        break;
                    }
                }
                if a == LR_CEILING {
                    let mut zeros = 0;
                    while dec.decode_bits(1)? == 0 {
                        zeros += 1;
                        if zeros > MAX_EG_PREFIX {
                            return Err(Error::CorruptStream("high-range prefix too long"));
                        }
                    }
                    let v = ((1 << zeros) | dec.decode_bits(zeros)?) - 1;
                    if v >= MAX_HR {
                        return Err(Error::CorruptStream("high-range value out of range"));
                    }
                    a += v;
                }
            }
            if a != 0 {
                let neg = dec.decode_bits(1)? == 1;
                block.set(r, c, if neg { -(a as i32) } else { a as i32 });
            }
        }
        if block.is_zero() {
            return Err(Error::CorruptStream("non-zero block flag with all-zero levels"));
        }
        Ok(block)
    }

    /// Codes only the BR symbols of the blocks.
    pub fn encode_br_only(&mut self, enc: &mut RangeEncoder, block: &CoefficientBlock) -> f64 {
        let mut bits = 0.0;
        for i in (0..self.scan.len()).rev() {
            let (r, c) = self.scan.order[i];
            let (g, l) = self.contexter.context(block, r, c);
            bits += enc.encode_symbol(&mut self.br[g][l], br_symbol(block.get(r, c)));
        }
        bits
    }

    pub fn decode_br_only(&mut self, dec: &mut RangeDecoder<'_>) -> Result<CoefficientBlock> {
        let (w, h) = self.dims();
        let mut block = CoefficientBlock::zeros(w, h);
        for i in (0..self.scan.len()).rev() {
            let (r, c) = self.scan.order[i];
            let (g, l) = self.contexter.context(&block, r, c);
            block.set(r, c, dec.decode_symbol(&mut self.br[g][l])? as i32);
        }
        Ok(block)
    }
}
