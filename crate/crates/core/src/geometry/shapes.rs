use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mask::{NrMask, Rect};
use super::wedge::{enumerate_regions, Region, WedgeSpec};
use crate::error::{Error, Result};

fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}

/// Tight extent rounded up to power-of-two dimensions.
///
/// The window starts at the tight extent's origin and is shifted back
/// inside the grid when the rounded size would overhang it.
pub fn bounding_window(mask: &NrMask) -> Result<Rect> {
    let e = mask.extent().ok_or(Error::EmptyMask)?;
    let w = next_pow2(e.width);
    let h = next_pow2(e.height);
    let x = e.x.min(mask.width().saturating_sub(w));
    let y = e.y.min(mask.height().saturating_sub(h));
    Ok(Rect::new(x, y, w.min(mask.width()), h.min(mask.height())))
}

/// Crops a mask to its power-of-two bounding box.
pub fn bounding_box(mask: &NrMask) -> Result<NrMask> {
    let r = bounding_window(mask)?;
    let out = mask.crop(r);
    debug_assert_eq!(out.area(), mask.area());
    Ok(out)
}

/// Split of a 1:4 region into a rectangular part and an NR part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subdivision {
    pub rect_part: NrMask,
    pub nr_part: NrMask,
    /// Window of the input holding every mixed row (or column).
    pub window: Rect,
}

/// Splits a 1:4 mask whose oblique boundary is confined to a window of half
/// the long side, placed at a multiple of a quarter of the long side.
/// Outside that window every line across the short side is fully inside or
/// fully outside the region.
pub fn subdivide(mask: &NrMask) -> Option<Subdivision> {
    let (w, h) = (mask.width(), mask.height());
    let vertical = if h == 4 * w {
        true
    } else if w == 4 * h {
        false
    } else {
        return None;
    };
    let (long, short) = if vertical { (h, w) } else { (w, h) };
    let line_count = |i: usize| if vertical { mask.row_count(i) } else { mask.col_count(i) };
    let mixed: Vec<usize> = (0..long).filter(|&i| (1..short).contains(&line_count(i))).collect();
    let (&lo, &hi) = (mixed.first()?, mixed.last()?);
    let half = long / 2;
    let quarter = long / 4;
    let offset = (0..=half).step_by(quarter).find(|&off| off <= lo && hi < off + half)?;
    let window = if vertical {
        Rect::new(0, offset, w, half)
    } else {
        Rect::new(offset, 0, half, h)
    };
    let nr_part = NrMask::from_fn(w, h, |x, y| window.contains(x, y) && mask.get(x, y));
    let rect_part = NrMask::from_fn(w, h, |x, y| !window.contains(x, y) && mask.get(x, y));
    if rect_part.area() == 0 {
        return None;
    }
    debug_assert!(rect_part.is_rectangle());
    Some(Subdivision { rect_part, nr_part, window })
}

/// Element of the dihedral group of the rectangle: an optional transpose
/// followed by optional mirrors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dihedral {
    pub transpose: bool,
    pub mirror_h: bool,
    pub mirror_v: bool,
}

impl Dihedral {
    pub const IDENTITY: Dihedral = Dihedral { transpose: false, mirror_h: false, mirror_v: false };

    pub fn all() -> [Dihedral; 8] {
        let mut out = [Dihedral::IDENTITY; 8];
        for (i, d) in out.iter_mut().enumerate() {
            *d = Dihedral { transpose: i & 4 != 0, mirror_h: i & 1 != 0, mirror_v: i & 2 != 0 };
        }
        out
    }

    pub fn apply(&self, mask: &NrMask) -> NrMask {
        let mut m = if self.transpose { mask.transpose() } else { mask.clone() };
        if self.mirror_h {
            m = m.mirror_h();
        }
        if self.mirror_v {
            m = m.mirror_v();
        }
        m
    }

    pub fn inverse(&self) -> Dihedral {
        if !self.transpose {
            return *self;
        }
        // (M . T)^-1 = T . M = M' . T with the mirror axes swapped
        Dihedral { transpose: true, mirror_h: self.mirror_v, mirror_v: self.mirror_h }
    }

    pub fn chain(&self) -> Vec<ChainStep> {
        let mut out = Vec::new();
        if self.transpose {
            out.push(ChainStep::Transpose);
        }
        if self.mirror_h {
            out.push(ChainStep::MirrorH);
        }
        if self.mirror_v {
            out.push(ChainStep::MirrorV);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainStep {
    Rotate90,
    MirrorH,
    MirrorV,
    Transpose,
    /// The region is the NR part of a subdivided 1:4 region; the
    /// rectangular remainder is added back.
    SubdivideRemainder,
}

pub fn apply_chain(mask: &NrMask, chain: &[ChainStep]) -> NrMask {
    chain.iter().fold(mask.clone(), |m, step| match step {
        ChainStep::Rotate90 => m.rotate90(),
        ChainStep::MirrorH => m.mirror_h(),
        ChainStep::MirrorV => m.mirror_v(),
        ChainStep::Transpose => m.transpose(),
        ChainStep::SubdivideRemainder => m,
    })
}

/// Orientation-normalized representative of a mask and the element taking
/// the representative back to the input.
///
/// The representative is portrait (width <= height) and lexicographically
/// largest in raster order among the portrait orientations.
pub fn canonical_form(mask: &NrMask) -> (NrMask, Dihedral) {
    let mut best: Option<(NrMask, Dihedral)> = None;
    for g in Dihedral::all() {
        let v = g.apply(mask);
        if v.width() > v.height() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((b, _)) => v.cells() > b.cells(),
        };
        if better {
            best = Some((v, g));
        }
    }
    let (canon, g) = best.expect("some orientation is portrait");
    (canon, g.inverse())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeType {
    Type1,
    Type2,
    Type3,
    Type4,
    Type5,
}

impl ShapeType {
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<ShapeType> {
        Some(match n {
            1 => ShapeType::Type1,
            2 => ShapeType::Type2,
            3 => ShapeType::Type3,
            4 => ShapeType::Type4,
            5 => ShapeType::Type5,
            _ => return None,
        })
    }
}

impl std::fmt::Display for ShapeType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SideFill {
    Empty,
    Partial,
    Full,
}

fn side_fill(count: usize, len: usize) -> SideFill {
    if count + 1 >= len {
        SideFill::Full
    } else if count <= 1 {
        SideFill::Empty
    } else {
        SideFill::Partial
    }
}

/// True for trapezoids whose two parallel edges run between opposite box
/// sides: one box side is covered, the opposite one is not, and the cut
/// leaves both remaining sides partially covered. Single-cell slack absorbs
/// the staircase at the ends of an oblique edge.
pub fn is_rectangle_like(mask: &NrMask) -> bool {
    let (w, h) = (mask.width(), mask.height());
    let top = side_fill(mask.row_count(0), w);
    let bottom = side_fill(mask.row_count(h - 1), w);
    let left = side_fill(mask.col_count(0), h);
    let right = side_fill(mask.col_count(w - 1), h);
    let opposed = |a: SideFill, b: SideFill| {
        matches!((a, b), (SideFill::Full, SideFill::Empty) | (SideFill::Empty, SideFill::Full))
    };
    let partial = |a: SideFill, b: SideFill| a == SideFill::Partial && b == SideFill::Partial;
    (opposed(top, bottom) && partial(left, right)) || (opposed(left, right) && partial(top, bottom))
}

/// Assigns a shape class from the area ratio inside the box and the
/// diagonal-versus-rectangle character of the cut.
pub fn classify_mask(mask: &NrMask) -> Result<ShapeType> {
    let ra = mask.fill_ratio();
    let rect_like = is_rectangle_like(mask);
    if (0.15..0.35).contains(&ra) {
        Ok(ShapeType::Type1)
    } else if (0.35..0.65).contains(&ra) {
        Ok(if rect_like { ShapeType::Type3 } else { ShapeType::Type2 })
    } else if (0.65..0.90).contains(&ra) {
        Ok(if rect_like { ShapeType::Type5 } else { ShapeType::Type4 })
    } else {
        Err(Error::UnclassifiableRatio(ra))
    }
}

pub fn classify(shape: &CanonicalShape) -> Result<ShapeType> {
    classify_mask(&shape.mask)
}

/// Where a region sits relative to its canonical shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPlacement {
    pub shape_id: usize,
    /// Takes the canonical mask to the region's boxed mask.
    pub orientation: Dihedral,
    /// Box of the NR part, in block coordinates.
    pub window: Rect,
    /// Rectangular remainder split off a 1:4 region, in block coordinates.
    pub remainder: Option<Rect>,
}

impl RegionPlacement {
    pub fn transform_chain(&self) -> Vec<ChainStep> {
        let mut c = self.orientation.chain();
        if self.remainder.is_some() {
            c.push(ChainStep::SubdivideRemainder);
        }
        c
    }

    /// Rebuilds the block-sized region mask from the canonical mask.
    pub fn reproduce(&self, canonical: &NrMask, block_width: usize, block_height: usize) -> NrMask {
        let boxed = self.orientation.apply(canonical);
        let mut m = boxed.embed(block_width, block_height, self.window.x, self.window.y);
        if let Some(r) = self.remainder {
            let rect = NrMask::full(r.width, r.height).embed(block_width, block_height, r.x, r.y);
            m = m.union(&rect);
        }
        m
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalShape {
    pub id: usize,
    pub mask: NrMask,
    pub r_a: f64,
    pub shape_class: ShapeType,
    /// First region (in enumeration order) mapping to this shape.
    pub representative: WedgeSpec,
    pub transform_chain: Vec<ChainStep>,
    pub occurrences: usize,
}

impl CanonicalShape {
    pub fn width(&self) -> usize {
        self.mask.width()
    }

    pub fn height(&self) -> usize {
        self.mask.height()
    }

    pub fn area(&self) -> usize {
        self.mask.area()
    }

    /// Box dimensions with the shorter side first.
    pub fn box_dims(&self) -> (usize, usize) {
        let (w, h) = (self.width(), self.height());
        (w.min(h), w.max(h))
    }

    /// Type 1-3 shapes in a square or 1:2 box.
    pub fn is_simplified_candidate(&self) -> bool {
        let (a, b) = self.box_dims();
        matches!(self.shape_class, ShapeType::Type1 | ShapeType::Type2 | ShapeType::Type3)
            && (b == a || b == 2 * a)
    }
}

/// Boxes a region, subdividing 1:4 boxes when possible.
fn normalize_region(mask: &NrMask) -> Result<(NrMask, Rect, Option<Rect>)> {
    let win = bounding_window(mask)?;
    let boxed = mask.crop(win);
    if let Some(sub) = subdivide(&boxed) {
        // box the NR part inside the split window, not the whole 1:4 grid
        let part = sub.nr_part.crop(sub.window);
        let inner = bounding_window(&part)?;
        let rem = sub.rect_part.extent().expect("non-empty remainder");
        let window = Rect::new(
            win.x + sub.window.x + inner.x,
            win.y + sub.window.y + inner.y,
            inner.width,
            inner.height,
        );
        let remainder = Rect::new(win.x + rem.x, win.y + rem.y, rem.width, rem.height);
        return Ok((part.crop(inner), window, Some(remainder)));
    }
    Ok((boxed, win, None))
}

#[derive(Clone, Debug)]
pub struct ShapeInventory {
    pub shapes: Vec<CanonicalShape>,
    pub placements: BTreeMap<WedgeSpec, RegionPlacement>,
    pub rectangular: Vec<WedgeSpec>,
}

/// Deduplicates all NR regions into canonical shapes.
pub fn canonicalize(regions: &[Region]) -> Result<ShapeInventory> {
    struct Pending {
        mask: NrMask,
        representative: WedgeSpec,
        members: Vec<(WedgeSpec, Dihedral, Rect, Option<Rect>)>,
    }
    let mut by_mask: BTreeMap<NrMask, usize> = BTreeMap::new();
    let mut pending: Vec<Pending> = Vec::new();
    let mut rectangular = Vec::new();
    for r in regions {
        if r.rectangular {
            rectangular.push(r.spec);
            continue;
        }
        let (boxed, window, remainder) = normalize_region(&r.mask)?;
        let (canon, g) = canonical_form(&boxed);
        let idx = *by_mask.entry(canon.clone()).or_insert_with(|| {
            pending.push(Pending { mask: canon, representative: r.spec, members: Vec::new() });
            pending.len() - 1
        });
        pending[idx].members.push((r.spec, g, window, remainder));
    }

    let mut keyed: Vec<(ShapeType, (usize, usize), usize, Pending)> = pending
        .into_iter()
        .map(|p| {
            let t = classify_mask(&p.mask)?;
            let dims = (p.mask.width(), p.mask.height());
            let area = p.mask.area();
            Ok((t, dims, area, p))
        })
        .collect::<Result<_>>()?;
    keyed.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)).then_with(|| a.3.mask.cmp(&b.3.mask)));

    let mut shapes = Vec::with_capacity(keyed.len());
    let mut placements = BTreeMap::new();
    for (id, (t, _, _, p)) in keyed.into_iter().enumerate() {
        let first = &p.members[0];
        let placement0 = RegionPlacement { shape_id: id, orientation: first.1, window: first.2, remainder: first.3 };
        shapes.push(CanonicalShape {
            id,
            r_a: p.mask.fill_ratio(),
            shape_class: t,
            representative: p.representative,
            transform_chain: placement0.transform_chain(),
            occurrences: p.members.len(),
            mask: p.mask,
        });
        for (spec, g, window, remainder) in p.members {
            placements.insert(spec, RegionPlacement { shape_id: id, orientation: g, window, remainder });
        }
    }
    Ok(ShapeInventory { shapes, placements, rectangular })
}

impl ShapeInventory {
    /// Inventory of every AV1 wedge region.
    pub fn build() -> Self {
        canonicalize(&enumerate_regions()).expect("wedge regions are well formed")
    }

    pub fn shape(&self, id: usize) -> Result<&CanonicalShape> {
        self.shapes.get(id).ok_or(Error::UnknownShape(id))
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Canonical id and orientation of an already boxed mask.
    pub fn lookup(&self, boxed: &NrMask) -> Option<(usize, Dihedral)> {
        let (canon, g) = canonical_form(boxed);
        self.shapes.iter().find(|s| s.mask == canon).map(|s| (s.id, g))
    }

    pub fn shape_of(&self, spec: &WedgeSpec) -> Option<&CanonicalShape> {
        self.placements.get(spec).map(|p| &self.shapes[p.shape_id])
    }

    /// Occurrence counts keyed by (short side, long side) of the box and type.
    pub fn occurrence_table(&self) -> BTreeMap<((usize, usize), ShapeType), usize> {
        let mut t = BTreeMap::new();
        for p in self.placements.values() {
            let s = &self.shapes[p.shape_id];
            *t.entry((s.box_dims(), s.shape_class)).or_insert(0) += 1;
        }
        t
    }

    pub fn simplified_shapes(&self) -> Vec<&CanonicalShape> {
        self.shapes.iter().filter(|s| s.is_simplified_candidate()).collect()
    }

    /// Finds a shape by the wedge that produces it.
    pub fn find(&self, width: usize, height: usize, wedge_index: u8, region: u8) -> Result<&CanonicalShape> {
        let spec = WedgeSpec::new(width, height, wedge_index, region);
        self.shape_of(&spec)
            .ok_or_else(|| Error::InvalidParameter(format!("{spec} is not a non-rectangular region")))
    }
}
