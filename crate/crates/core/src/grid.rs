//! Dense row-major grid storage shared by every map layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer cell address; `x` is the column, `y` the row (rows grow downward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellCoord {
    pub x: i32,
    pub y: i32,
}

impl CellCoord {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: CellCoord) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy)
    }

    /// The 8-connected neighborhood, in a fixed order.
    pub fn neighbors8(self) -> impl Iterator<Item = CellCoord> {
        const OFFSETS: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        OFFSETS.into_iter().map(move |(dx, dy)| CellCoord::new(self.x + dx, self.y + dy))
    }
}

impl std::fmt::Display for CellCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Object class label. `ClassId::EMPTY` (0) means "no label".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct ClassId(pub u16);

impl ClassId {
    pub const EMPTY: ClassId = ClassId(0);

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl std::fmt::Display for ClassId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayer<V> {
    width: usize,
    height: usize,
    resolution: f64,
    cells: Vec<V>,
}

impl<V: Clone> GridLayer<V> {
    pub fn new(width: usize, height: usize, resolution: f64, fill: V) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self { width, height, resolution, cells: vec![fill; width * height] }
    }

    pub fn fill(&mut self, value: V) {
        self.cells.iter_mut().for_each(|c| *c = value.clone());
    }
}

impl<V> GridLayer<V> {
    pub fn from_vec(width: usize, height: usize, resolution: f64, cells: Vec<V>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::DimensionMismatch { expected: (width, height), got: (cells.len(), 1) });
        }
        assert!(resolution > 0.0, "resolution must be positive");
        Ok(Self { width, height, resolution, cells })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, c: CellCoord) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn index(&self, c: CellCoord) -> Option<usize> {
        self.in_bounds(c).then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn coord(&self, index: usize) -> CellCoord {
        CellCoord::new((index % self.width) as i32, (index / self.width) as i32)
    }

    pub fn check(&self, c: CellCoord) -> Result<usize> {
        self.index(c).ok_or(Error::OutOfBounds { cell: c, width: self.width, height: self.height })
    }

    pub fn get(&self, c: CellCoord) -> Option<&V> {
        self.index(c).map(|i| &self.cells[i])
    }

    pub fn get_mut(&mut self, c: CellCoord) -> Option<&mut V> {
        self.index(c).map(move |i| &mut self.cells[i])
    }

    /// Panics when `c` is out of bounds.
    pub fn at(&self, c: CellCoord) -> &V {
        let i = self.index(c).unwrap_or_else(|| panic!("cell {c} out of bounds"));
        &self.cells[i]
    }

    pub fn set(&mut self, c: CellCoord, value: V) {
        let i = self.index(c).unwrap_or_else(|| panic!("cell {c} out of bounds"));
        self.cells[i] = value;
    }

    pub fn cells(&self) -> &[V] {
        &self.cells
    }

    pub fn cells_mut(&mut self) -> &mut [V] {
        &mut self.cells
    }

    /// Row-major iteration over `(coord, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (CellCoord, &V)> {
        self.cells.iter().enumerate().map(|(i, v)| (self.coord(i), v))
    }

    pub fn same_dims<U>(&self, other: &GridLayer<U>) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dims(), got: other.dims() })
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&V) -> U) -> GridLayer<U> {
        GridLayer {
            width: self.width,
            height: self.height,
            resolution: self.resolution,
            cells: self.cells.iter().map(f).collect(),
        }
    }

    /// Diagonal length of the grid in cells.
    pub fn diagonal(&self) -> f64 {
        (self.width as f64).hypot(self.height as f64)
    }

    pub fn center(&self) -> CellCoord {
        CellCoord::new((self.width / 2) as i32, (self.height / 2) as i32)
    }
}

pub type BitLayer = GridLayer<bool>;

impl BitLayer {
    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn ones(&self) -> impl Iterator<Item = CellCoord> + '_ {
        self.iter().filter(|(_, &b)| b).map(|(c, _)| c)
    }

    /// Out-of-grid cells read as `false`.
    pub fn is_set(&self, c: CellCoord) -> bool {
        self.get(c).copied().unwrap_or(false)
    }
}
