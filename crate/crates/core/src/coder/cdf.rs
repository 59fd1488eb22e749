use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PROB_BITS: u32 = 15;
pub const PROB_TOTAL: u32 = 1 << PROB_BITS;
pub const MAX_ALPHABET: usize = 16;

/// Cumulative frequencies with a `2^15` total. Symbol `s` owns
/// `cum[s]..cum[s + 1]`, the last symbol runs up to `2^15`, and every
/// interval is at least one unit wide.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cdf15 {
    cum: Vec<u16>,
    count: u8,
    adaptive: bool,
}

impl Cdf15 {
    pub fn uniform(m: usize, adaptive: bool) -> Self {
        assert!((2..=MAX_ALPHABET).contains(&m));
        let cum = (0..m).map(|i| ((i as u32 * PROB_TOTAL) / m as u32) as u16).collect();
        Cdf15 { cum, count: 0, adaptive }
    }

    /// Quantizes a distribution, giving every symbol at least one unit.
    pub fn from_probabilities(p: &[f64], adaptive: bool) -> Result<Self> {
        let m = p.len();
        if !(2..=MAX_ALPHABET).contains(&m) || p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(format!("bad distribution {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidParameter("distribution has no mass".into()));
        }
        let spare = (PROB_TOTAL - m as u32) as f64;
        let mut freq: Vec<u32> = p.iter().map(|v| 1 + (v / sum * spare).floor() as u32).collect();
        // hand rounding leftovers to the most probable symbol
        let used: u32 = freq.iter().sum();
        let top = (0..m).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap();
        freq[top] += PROB_TOTAL - used;
        let mut cum = vec![0u16; m];
        for s in 1..m {
            cum[s] = cum[s - 1] + freq[s - 1] as u16;
        }
        Ok(Cdf15 { cum, count: 0, adaptive })
    }

    pub fn alphabet(&self) -> usize {
        self.cum.len()
    }

    pub fn is_adaptive(&self) -> bool {
        self.adaptive
    }

    /// Lower bound of symbol `s`.
    #[inline]
    pub fn low(&self, s: usize) -> u32 {
        self.cum[s] as u32
    }

    /// Upper bound of symbol `s`; the last one is `2^15`.
    #[inline]
    pub fn high(&self, s: usize) -> u32 {
        if s + 1 == self.alphabet() {
            PROB_TOTAL
        } else {
            self.cum[s + 1] as u32
        }
    }

    pub fn freq(&self, s: usize) -> u32 {
        self.high(s) - self.low(s)
    }

    pub fn probability(&self, s: usize) -> f64 {
        self.freq(s) as f64 / PROB_TOTAL as f64
    }

    /// Symbol whose interval holds `v`.
    pub fn find(&self, v: u32) -> usize {
        let m = self.alphabet();
        (1..m).find(|&s| v < self.low(s)).map_or(m - 1, |s| s - 1)
    }

    fn rate(&self) -> u32 {
        let m = self.alphabet() as u32;
        let speed = (31 - m.leading_zeros()).min(2);
        3 + u32::from(self.count > 15) + u32::from(self.count > 31) + speed
    }

    /// Moves the distribution toward `s`. No-op for static tables.
    pub fn update(&mut self, s: usize) {
        if !self.adaptive {
            return;
        }
        let m = self.alphabet();
        let rate = self.rate();
        for i in 1..m {
            let c = self.cum[i] as i32;
            let target = if i > s { PROB_TOTAL as i32 } else { 0 };
            self.cum[i] = (c + ((target - c) >> rate)) as u16;
        }
        // keep every interval at least one unit wide
        for i in 1..m {
            let lo = self.cum[i - 1] + 1;
            if self.cum[i] < lo {
                self.cum[i] = lo;
            }
        }
        for i in (1..m).rev() {
            let hi = (PROB_TOTAL - (m - i) as u32) as u16;
            if self.cum[i] > hi {
                self.cum[i] = hi;
            }
        }
        if self.count < 32 {
            self.count += 1;
        }
    }

    /// Folds the state into a running checksum.
    pub fn checksum(&self, acc: u64) -> u64 {
        let mut h = acc ^ 0xcbf2_9ce4_8422_2325;
        for &c in &self.cum {
            h = (h ^ c as u64).wrapping_mul(0x0000_0100_0000_01b3);
        }
        (h ^ self.count as u64).wrapping_mul(0x0000_0100_0000_01b3)
    }
}
