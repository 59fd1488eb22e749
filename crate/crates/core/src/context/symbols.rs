use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BR_ALPHABET: usize = 4;
pub const LR_SYMBOLS: usize = 4;
/// Largest magnitude reachable by BR + LR.
pub const LR_CEILING: u32 = 15;
pub const MAX_HR: u32 = 1 << 15;
pub const MAX_LEVEL: i64 = (1 << 15) + 14;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolDecomposition {
    /// `min(|level|, 3)`, 3 standing for "> 2".
    pub br: u8,
    pub lr: Vec<u8>,
    pub hr: u32,
    /// `Some(true)` for negative levels.
    pub negative: Option<bool>,
}

#[inline]
pub fn br_symbol(level: i32) -> usize {
    level.unsigned_abs().min(3) as usize
}

pub fn decompose(level: i64) -> Result<SymbolDecomposition> {
    if level.abs() > MAX_LEVEL {
        return Err(Error::LevelOutOfRange(level));
    }
    let a = level.unsigned_abs() as u32;
    let br = a.min(3) as u8;
    let mut lr = Vec::new();
    let mut hr = 0;
    if br == 3 {
        let mut rem = a - 3;
        while lr.len() < LR_SYMBOLS {
            let s = rem.min(3);
            lr.push(s as u8);
            rem -= s;
            if s < 3 {
                break;
            }
        }
        if lr.len() == LR_SYMBOLS && lr[LR_SYMBOLS - 1] == 3 {
            hr = rem;
        }
    }
    let negative = (level != 0).then_some(level < 0);
    Ok(SymbolDecomposition { br, lr, hr, negative })
}

pub fn recompose(d: &SymbolDecomposition) -> i64 {
    let a = d.br as i64 + d.lr.iter().map(|&s| s as i64).sum::<i64>() + d.hr as i64;
    if d.negative == Some(true) {
        -a
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_levels() {
        let z = decompose(0).unwrap();
        assert_eq!((z.br, z.negative), (0, None));
        let m = decompose(-2).unwrap();
        assert_eq!((m.br, m.negative, m.lr.len(), m.hr), (2, Some(true), 0, 0));
    }

    #[test]
    fn twenty_peels_into_high_range() {
        let d = decompose(20).unwrap();
        assert_eq!((d.br, d.lr.clone(), d.hr), (3, vec![3, 3, 3, 3], 5));
        assert_eq!(recompose(&d), 20);
        let e = decompose(7).unwrap();
        assert_eq!((e.br, e.lr.clone(), e.hr), (3, vec![3, 1], 0));
    }

    #[test]
    fn round_trip_and_bounds() {
        for l in -1000..=1000 {
            assert_eq!(recompose(&decompose(l).unwrap()), l);
        }
        assert_eq!(decompose(MAX_LEVEL).unwrap().hr, MAX_HR - 1);
        assert!(decompose(MAX_LEVEL + 1).is_err());
    }
}
