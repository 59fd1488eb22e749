//! AV1 wedge codebooks rasterized as sharp binary partitions.
//!
//! Each wedge is a line through an anchor point given in eighths of the
//! block dimensions. Oblique lines have slope 1:2 or 2:1, exactly as in the
//! AV1 master masks, but there is no blending band: a cell belongs to the
//! side its centre lies on. Centres never fall on a line because the anchor
//! is integral and the slopes are dyadic.

use serde::{Deserialize, Serialize};

use super::mask::NrMask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockSize {
    pub width: usize,
    pub height: usize,
}

impl BlockSize {
    pub const fn new(width: usize, height: usize) -> Self {
        BlockSize { width, height }
    }

    /// The nine wedge-enabled block sizes, in AV1 block-size order.
    pub const ALL: [BlockSize; 9] = [
        BlockSize::new(8, 8),
        BlockSize::new(8, 16),
        BlockSize::new(16, 8),
        BlockSize::new(16, 16),
        BlockSize::new(16, 32),
        BlockSize::new(32, 16),
        BlockSize::new(32, 32),
        BlockSize::new(8, 32),
        BlockSize::new(32, 8),
    ];

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

impl std::fmt::Display for BlockSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WedgeDirection {
    Horizontal,
    Vertical,
    Oblique27,
    Oblique63,
    Oblique117,
    Oblique153,
}

impl WedgeDirection {
    pub fn angle_degrees(self) -> u32 {
        match self {
            WedgeDirection::Horizontal => 0,
            WedgeDirection::Vertical => 90,
            WedgeDirection::Oblique27 => 27,
            WedgeDirection::Oblique63 => 63,
            WedgeDirection::Oblique117 => 117,
            WedgeDirection::Oblique153 => 153,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WedgeCode {
    pub direction: WedgeDirection,
    pub x_offset: u8,
    pub y_offset: u8,
}

const fn wc(direction: WedgeDirection, x_offset: u8, y_offset: u8) -> WedgeCode {
    WedgeCode { direction, x_offset, y_offset }
}

use WedgeDirection::*;

const CODEBOOK_HGTW: [WedgeCode; 16] = [
    wc(Oblique27, 4, 4),
    wc(Oblique63, 4, 4),
    wc(Oblique117, 4, 4),
    wc(Oblique153, 4, 4),
    wc(Horizontal, 4, 2),
    wc(Horizontal, 4, 4),
    wc(Horizontal, 4, 6),
    wc(Vertical, 4, 4),
    wc(Oblique27, 4, 2),
    wc(Oblique27, 4, 6),
    wc(Oblique153, 4, 2),
    wc(Oblique153, 4, 6),
    wc(Oblique63, 2, 4),
    wc(Oblique63, 6, 4),
    wc(Oblique117, 2, 4),
    wc(Oblique117, 6, 4),
];

const CODEBOOK_HLTW: [WedgeCode; 16] = [
    wc(Oblique27, 4, 4),
    wc(Oblique63, 4, 4),
    wc(Oblique117, 4, 4),
    wc(Oblique153, 4, 4),
    wc(Vertical, 2, 4),
    wc(Vertical, 4, 4),
    wc(Vertical, 6, 4),
    wc(Horizontal, 4, 4),
    wc(Oblique27, 4, 2),
    wc(Oblique27, 4, 6),
    wc(Oblique153, 4, 2),
    wc(Oblique153, 4, 6),
    wc(Oblique63, 2, 4),
    wc(Oblique63, 6, 4),
    wc(Oblique117, 2, 4),
    wc(Oblique117, 6, 4),
];

const CODEBOOK_HEQW: [WedgeCode; 16] = [
    wc(Oblique27, 4, 4),
    wc(Oblique63, 4, 4),
    wc(Oblique117, 4, 4),
    wc(Oblique153, 4, 4),
    wc(Horizontal, 4, 2),
    wc(Horizontal, 4, 6),
    wc(Vertical, 2, 4),
    wc(Vertical, 6, 4),
    wc(Oblique27, 4, 2),
    wc(Oblique27, 4, 6),
    wc(Oblique153, 4, 2),
    wc(Oblique153, 4, 6),
    wc(Oblique63, 2, 4),
    wc(Oblique63, 6, 4),
    wc(Oblique117, 2, 4),
    wc(Oblique117, 6, 4),
];

const SIGNFLIP_SQUARE: [bool; 16] = {
    let mut t = [true; 16];
    t[12] = false;
    t
};

const SIGNFLIP_RECT: [bool; 16] = {
    let mut t = [true; 16];
    t[4] = false;
    t[12] = false;
    t
};

pub const WEDGES_PER_BLOCK: u8 = 16;

pub fn codebook(bs: BlockSize) -> &'static [WedgeCode; 16] {
    use std::cmp::Ordering;
    match bs.height.cmp(&bs.width) {
        Ordering::Greater => &CODEBOOK_HGTW,
        Ordering::Less => &CODEBOOK_HLTW,
        Ordering::Equal => &CODEBOOK_HEQW,
    }
}

fn signflip(bs: BlockSize, wedge_index: u8) -> bool {
    if bs.width == bs.height {
        SIGNFLIP_SQUARE[wedge_index as usize]
    } else {
        SIGNFLIP_RECT[wedge_index as usize]
    }
}

/// One of the two regions of a wedge partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WedgeSpec {
    pub block_size: BlockSize,
    pub wedge_index: u8,
    pub region: u8,
}

impl WedgeSpec {
    pub fn new(width: usize, height: usize, wedge_index: u8, region: u8) -> Self {
        WedgeSpec { block_size: BlockSize::new(width, height), wedge_index, region }
    }

    pub fn code(&self) -> WedgeCode {
        codebook(self.block_size)[self.wedge_index as usize]
    }
}

impl std::fmt::Display for WedgeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.block_size, self.wedge_index, self.region)
    }
}

/// Binary mask of one wedge region.
///
/// Panics on a wedge index outside `0..16` or a region outside `{0, 1}`.
pub fn wedge_mask(spec: WedgeSpec) -> NrMask {
    assert!(spec.wedge_index < WEDGES_PER_BLOCK && spec.region < 2, "invalid wedge spec {spec:?}");
    let BlockSize { width, height } = spec.block_size;
    let code = spec.code();
    let ax = (code.x_offset as i64 * width as i64) >> 3;
    let ay = (code.y_offset as i64 * height as i64) >> 3;
    // The master side (mask index 0) is the positive half-plane; the
    // sign-flip table decides which region number it carries.
    let want_positive = (spec.region == 1) == signflip(spec.block_size, spec.wedge_index);
    NrMask::from_fn(width, height, |x, y| {
        // doubled coordinates relative to the anchor, always odd
        let dx = 2 * x as i64 + 1 - 2 * ax;
        let dy = 2 * y as i64 + 1 - 2 * ay;
        let v = match code.direction {
            Horizontal => dy,
            Vertical => dx,
            Oblique63 => 2 * dx + dy,
            Oblique117 => 2 * dx - dy,
            Oblique27 => dx + 2 * dy,
            Oblique153 => 2 * dy - dx,
        };
        debug_assert!(v != 0);
        (v > 0) == want_positive
    })
}

#[derive(Clone, Debug)]
pub struct Region {
    pub spec: WedgeSpec,
    pub mask: NrMask,
    pub rectangular: bool,
}

/// All 16 x 2 regions of every wedge-enabled block size.
pub fn enumerate_regions() -> Vec<Region> {
    let mut out = Vec::with_capacity(BlockSize::ALL.len() * 32);
    for bs in BlockSize::ALL {
        for wedge_index in 0..WEDGES_PER_BLOCK {
            for region in 0..2 {
                let spec = WedgeSpec { block_size: bs, wedge_index, region };
                let mask = wedge_mask(spec);
                let rectangular = mask.is_rectangle();
                out.push(Region { spec, mask, rectangular });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_counts() {
        let regions = enumerate_regions();
        assert_eq!(regions.len(), 288);
        assert_eq!(regions.iter().filter(|r| r.rectangular).count(), 72);
        let nr = regions.iter().filter(|r| !r.rectangular).count();
        assert_eq!(nr, 216);
        assert!(regions.iter().all(|r| r.mask.is_non_rectangular_fill()));
    }

    #[test]
    fn vertical_center_split_region0_is_left_half() {
        let spec = WedgeSpec::new(8, 16, 7, 0);
        assert_eq!(spec.code().direction, Vertical);
        let m = wedge_mask(spec);
        assert_eq!(m.area(), 64);
        assert_eq!(m, NrMask::from_fn(8, 16, |x, _| x < 4));
    }

    #[test]
    fn regions_are_complements() {
        for bs in BlockSize::ALL {
            for w in 0..16 {
                let a = wedge_mask(WedgeSpec { block_size: bs, wedge_index: w, region: 0 });
                let b = wedge_mask(WedgeSpec { block_size: bs, wedge_index: w, region: 1 });
                assert_eq!(a.complement(), b, "{bs} wedge {w}");
            }
        }
    }

    #[test]
    fn type1_exemplar_area() {
        let m = wedge_mask(WedgeSpec::new(16, 8, 9, 1));
        let ratio = m.area() as f64 / 128.0;
        assert!((ratio - 0.25).abs() <= 0.1, "{ratio}");
    }

    #[test]
    fn oblique_slopes_match_master_masks() {
        // 8x16 central 63-degree wedge is the box anti-diagonal
        let m = wedge_mask(WedgeSpec::new(8, 16, 1, 0));
        assert_eq!(m.area(), 64);
        for y in 0..16 {
            let right = (y + 1) / 2;
            assert_eq!(m.row_count(y), if m.get(0, 0) { 8 - right } else { right });
        }
    }
}
