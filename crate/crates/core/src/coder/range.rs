//! Carry-propagating range coder over 15-bit cumulative frequencies.
//!
//! 32-bit range, 33-bit low with a cache byte for carries. The encoder
//! emits exactly as many bytes as the decoder consumes.

use super::cdf::{Cdf15, PROB_BITS, PROB_TOTAL};
use crate::error::{Error, Result};

const TOP: u32 = 1 << 24;

#[derive(Debug)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    pending: u64,
    out: Vec<u8>,
    /// Ideal code length of everything encoded so far, in bits.
    ideal_bits: f64,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        RangeEncoder { low: 0, range: u32::MAX, cache: 0, pending: 1, out: Vec::new(), ideal_bits: 0.0 }
    }

    fn shift_low(&mut self) {
        if self.low < 0xFF00_0000 || self.low > 0xFFFF_FFFF {
            let carry = (self.low >> 32) as u8;
            let mut c = self.cache;
            loop {
                self.out.push(c.wrapping_add(carry));
                c = 0xFF;
                self.pending -= 1;
                if self.pending == 0 {
                    break;
                }
            }
            self.cache = ((self.low >> 24) & 0xFF) as u8;
        }
        self.pending += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    /// Encodes the interval `[low, low + freq)` of a `2^15` total.
    pub fn encode_interval(&mut self, low: u32, freq: u32) {
        debug_assert!(freq > 0 && low + freq <= PROB_TOTAL);
        let r = self.range >> PROB_BITS;
        self.low += r as u64 * low as u64;
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
        self.ideal_bits -= (freq as f64 / PROB_TOTAL as f64).log2();
    }

    /// Encodes `s` and adapts the table when it is adaptive. Returns the
    /// ideal code length in bits.
    pub fn encode_symbol(&mut self, cdf: &mut Cdf15, s: usize) -> f64 {
        let f = cdf.freq(s);
        self.encode_interval(cdf.low(s), f);
        cdf.update(s);
        -(f as f64 / PROB_TOTAL as f64).log2()
    }

    /// Equiprobable bits, most significant first.
    pub fn encode_bits(&mut self, value: u32, n: u32) {
        for i in (0..n).rev() {
            let b = (value >> i) & 1;
            self.encode_interval(b * (PROB_TOTAL / 2), PROB_TOTAL / 2);
        }
    }

    /// Bytes emitted so far, excluding the final flush.
    pub fn bytes_so_far(&self) -> usize {
        self.out.len()
    }

    pub fn ideal_bits(&self) -> f64 {
        self.ideal_bits
    }

    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self> {
        if data.len() < 5 {
            return Err(Error::CorruptStream("stream shorter than the coder preamble"));
        }
        if data[0] != 0 {
            return Err(Error::CorruptStream("bad coder preamble"));
        }
        let code = u32::from_be_bytes([data[1], data[2], data[3], data[4]]);
        Ok(RangeDecoder { data, pos: 5, code, range: u32::MAX })
    }

    fn next_byte(&mut self) -> Result<u8> {
        let b = *self.data.get(self.pos).ok_or(Error::CorruptStream("read past end of stream"))?;
        self.pos += 1;
        Ok(b)
    }

    /// Scaled target value in `0..2^15`; consume it with `consume`.
    fn target(&self) -> Result<(u32, u32)> {
        let r = self.range >> PROB_BITS;
        let v = self.code / r;
        if v >= PROB_TOTAL {
            return Err(Error::CorruptStream("code value outside the coding range"));
        }
        Ok((v, r))
    }

    fn consume(&mut self, r: u32, low: u32, freq: u32) -> Result<()> {
        self.code -= r * low;
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.code = (self.code << 8) | self.next_byte()? as u32;
        }
        Ok(())
    }

    pub fn decode_symbol(&mut self, cdf: &mut Cdf15) -> Result<usize> {
        let (v, r) = self.target()?;
        let s = cdf.find(v);
        self.consume(r, cdf.low(s), cdf.freq(s))?;
        cdf.update(s);
        Ok(s)
    }

    pub fn decode_bits(&mut self, n: u32) -> Result<u32> {
        let mut out = 0;
        for _ in 0..n {
            let (v, r) = self.target()?;
            let b = u32::from(v >= PROB_TOTAL / 2);
            self.consume(r, b * (PROB_TOTAL / 2), PROB_TOTAL / 2)?;
            out = (out << 1) | b;
        }
        Ok(out)
    }

    /// True once every byte of the stream has been read.
    pub fn is_exhausted(&self) -> bool {
        self.pos == self.data.len()
    }
}
