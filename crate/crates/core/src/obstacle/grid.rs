use crate::error::{Error, Result};

/// Uniform cartesian grid over a rectangle; only interior nodes carry
/// unknowns. Interior node `(i, j)` sits at
/// `(x_min + (i + 1) dx, y_min + (j + 1) dy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl Grid2D {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Grid(format!(
                "need at least 2 interior points per direction, got {nx}x{ny}"
            )));
        }
        if !(x_range.1 > x_range.0) || !(y_range.1 > y_range.0) {
            return Err(Error::Grid("empty domain".into()));
        }
        Ok(Grid2D {
            x_range,
            y_range,
            nx,
            ny,
            dx: (x_range.1 - x_range.0) / (nx + 1) as f64,
            dy: (y_range.1 - y_range.0) / (ny + 1) as f64,
        })
    }

    /// Number of interior unknowns.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major interior index, `x` fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_range.0 + self.dx * (i + 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_range.0 + self.dy * (j + 1) as f64
    }

    /// Coordinate of full-grid column `i` in `0..=nx+1`, boundaries
    /// included; the last column is pinned to `x_max`.
    pub fn x_full(&self, i: usize) -> f64 {
        if i == self.nx + 1 {
            self.x_range.1
        } else {
            self.x_range.0 + self.dx * i as f64
        }
    }

    pub fn y_full(&self, j: usize) -> f64 {
        if j == self.ny + 1 {
            self.y_range.1
        } else {
            self.y_range.0 + self.dy * j as f64
        }
    }
}
