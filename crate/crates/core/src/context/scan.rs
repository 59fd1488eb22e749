use serde::{Deserialize, Serialize};

/// Zig-zag scan over a `width x height` coefficient grid. Positions are
/// `(row, col)`; the coding order is the reverse of the scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOrder {
    pub width: usize,
    pub height: usize,
    pub order: Vec<(usize, usize)>,
    rank: Vec<usize>,
}

impl ScanOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Scan index of a position.
    pub fn rank(&self, row: usize, col: usize) -> usize {
        self.rank[row * self.width + col]
    }

    pub fn coding_order(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.iter().rev().copied()
    }
}

/// Anti-diagonal zig-zag starting at DC. Odd diagonals run up-right (row
/// decreasing), even diagonals down-left.
pub fn zigzag(width: usize, height: usize) -> ScanOrder {
    assert!(width >= 1 && height >= 1);
    let mut order = Vec::with_capacity(width * height);
    for d in 0..width + height - 1 {
        let lo = d.saturating_sub(width - 1);
        let hi = d.min(height - 1);
        if d % 2 == 1 {
            for r in (lo..=hi).rev() {
                order.push((r, d - r));
            }
        } else {
            for r in lo..=hi {
                order.push((r, d - r));
            }
        }
    }
    let mut rank = vec![0; width * height];
    for (i, &(r, c)) in order.iter().enumerate() {
        rank[r * width + c] = i;
    }
    ScanOrder { width, height, order, rank }
}
