//! Uniform periodic grids over up to three degrees of freedom.
//!
//! Fields live in flat `Vec`s in row-major order: the last axis varies
//! fastest, so index = ((i0 * n1) + i1) * n2 + i2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 8;
pub const MAX_DIMS: usize = 3;

/// One periodic axis. `x_max` is identified with `x_min`, so the sample
/// points are `x_min + i * spacing` for `i in 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dim {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Dim {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Self {
        Dim {
            x_min,
            x_max,
            n_points,
        }
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    /// Wrap `x` into `[center - L/2, center + L/2)`.
    pub fn wrap_around(&self, x: f64, center: f64) -> f64 {
        let l = self.length();
        let mut d = (x - center) % l;
        if d >= 0.5 * l {
            d -= l;
        } else if d < -0.5 * l {
            d += l;
        }
        center + d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct GridSpec {
    dims: Vec<Dim>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRecord {
    dims: Vec<Dim>,
}

impl TryFrom<GridRecord> for GridSpec {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        GridSpec::new(r.dims)
    }
}

impl From<GridSpec> for GridRecord {
    fn from(g: GridSpec) -> Self {
        GridRecord { dims: g.dims }
    }
}

impl GridSpec {
    /// Validate the axis records and precompute spacings and strides.
    pub fn new(dims: Vec<Dim>) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_DIMS {
            return Err(Error::InvalidGrid(format!(
                "dimension count must be 1..={MAX_DIMS}, got {}",
                dims.len()
            )));
        }
        for (axis, d) in dims.iter().enumerate() {
            if d.n_points < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: n_points = {} < {MIN_POINTS}",
                    d.n_points
                )));
            }
            if !(d.x_min.is_finite() && d.x_max.is_finite()) || d.x_max <= d.x_min {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis}: extent [{}, {}) is not positive",
                    d.x_min, d.x_max
                )));
            }
        }
        let spacing = dims.iter().map(Dim::spacing).collect();
        let mut strides = vec![1; dims.len()];
        for a in (0..dims.len() - 1).rev() {
            strides[a] = strides[a + 1] * dims[a + 1].n_points;
        }
        let len = dims.iter().map(|d| d.n_points).product();
        Ok(GridSpec {
            dims,
            spacing,
            strides,
            len,
        })
    }

    pub fn uniform_1d(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        Self::new(vec![Dim::new(x_min, x_max, n_points)])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Dim] {
        &self.dims
    }

    pub fn dim(&self, axis: usize) -> &Dim {
        &self.dims[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacing[axis]
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Volume element: product of the spacings.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Per-axis index of flat position `flat`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.dims[axis].n_points
    }

    pub fn coord(&self, flat: usize, axis: usize) -> f64 {
        self.dims[axis].coord(self.axis_index(flat, axis))
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinate field of one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        (0..self.len).map(|k| self.coord(k, axis)).collect()
    }

    /// Σ f·ΔV.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    /// Σ f·g·ΔV.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume()
    }

    /// Flat index of the periodic neighbour `offset` steps along `axis`.
    pub fn neighbor(&self, flat: usize, axis: usize, offset: isize) -> usize {
        let n = self.dims[axis].n_points as isize;
        let i = self.axis_index(flat, axis) as isize;
        let j = (i + offset).rem_euclid(n) as usize;
        flat - (i as usize) * self.strides[axis] + j * self.strides[axis]
    }

    pub(crate) fn check_field(&self, what: &str, n: usize) -> Result<()> {
        if n != self.len {
            return Err(Error::InvalidState(format!(
                "{what} has {n} values, grid has {}",
                self.len
            )));
        }
        Ok(())
    }
}
