use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in cell coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Rect { x, y, width, height }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

/// Binary support grid, row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NrMask {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl std::fmt::Debug for NrMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "NrMask {}x{} area {}", self.width, self.height, self.area())?;
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| if self.get(x, y) { '#' } else { '.' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

impl NrMask {
    pub fn empty(width: usize, height: usize) -> Self {
        NrMask { width, height, cells: vec![false; width * height] }
    }

    pub fn full(width: usize, height: usize) -> Self {
        NrMask { width, height, cells: vec![true; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                cells.push(f(x, y));
            }
        }
        NrMask { width, height, cells }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: format!("{} cells", width * height),
                actual: format!("{} cells", cells.len()),
            });
        }
        Ok(NrMask { width, height, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.cells[y * self.width + x] = v;
    }

    pub fn area(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Fraction of the grid covered by the support.
    pub fn fill_ratio(&self) -> f64 {
        self.area() as f64 / (self.width * self.height) as f64
    }

    /// Strictly partial coverage: neither empty nor the whole grid.
    pub fn is_non_rectangular_fill(&self) -> bool {
        let a = self.area();
        a > 0 && a < self.width * self.height
    }

    /// Support cells in raster order, as `(x, y)`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.area());
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Tight axis-aligned extent of the support.
    pub fn extent(&self) -> Option<Rect> {
        let mut x0 = usize::MAX;
        let mut y0 = usize::MAX;
        let mut x1 = 0;
        let mut y1 = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        (x0 != usize::MAX).then(|| Rect::new(x0, y0, x1 - x0, y1 - y0))
    }

    /// True when the support exactly fills its own tight extent.
    pub fn is_rectangle(&self) -> bool {
        match self.extent() {
            Some(r) => r.area() == self.area(),
            None => false,
        }
    }

    pub fn crop(&self, r: Rect) -> NrMask {
        assert!(r.x + r.width <= self.width && r.y + r.height <= self.height);
        NrMask::from_fn(r.width, r.height, |x, y| self.get(r.x + x, r.y + y))
    }

    /// Places `self` at `(x, y)` inside an empty grid of the given size.
    pub fn embed(&self, width: usize, height: usize, x: usize, y: usize) -> NrMask {
        assert!(x + self.width <= width && y + self.height <= height);
        let mut out = NrMask::empty(width, height);
        for yy in 0..self.height {
            for xx in 0..self.width {
                if self.get(xx, yy) {
                    out.set(x + xx, y + yy, true);
                }
            }
        }
        out
    }

    pub fn union(&self, other: &NrMask) -> NrMask {
        assert_eq!((self.width, self.height), (other.width, other.height));
        NrMask {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersects(&self, other: &NrMask) -> bool {
        self.cells.iter().zip(&other.cells).any(|(a, b)| *a && *b)
    }

    pub fn complement(&self) -> NrMask {
        NrMask {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().map(|c| !c).collect(),
        }
    }

    pub fn transpose(&self) -> NrMask {
        NrMask::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }

    /// Left-right mirror.
    pub fn mirror_h(&self) -> NrMask {
        NrMask::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Top-bottom mirror.
    pub fn mirror_v(&self) -> NrMask {
        NrMask::from_fn(self.width, self.height, |x, y| self.get(x, self.height - 1 - y))
    }

    /// Quarter turn clockwise.
    pub fn rotate90(&self) -> NrMask {
        self.transpose().mirror_h()
    }

    pub fn row_count(&self, y: usize) -> usize {
        (0..self.width).filter(|&x| self.get(x, y)).count()
    }

    pub fn col_count(&self, x: usize) -> usize {
        (0..self.height).filter(|&y| self.get(x, y)).count()
    }
}
