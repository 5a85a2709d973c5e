//! Velocity grids on the periodic box.
//!
//! All spectral work happens on the scaled box `[-π, π]^d`. A physical
//! velocity `v` maps to the scaled coordinate `x = v·π/L`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Result, SpectralError};

/// Ratio between the collision truncation radius and the box half-width,
/// `λ = 2/(3+√2)`. With this choice the supports of neighbouring periods
/// of the collision integrand never overlap.
pub const LAMBDA: f64 = 2.0 / (3.0 + SQRT_2);

/// A Fourier mode `k`. For one-dimensional grids the second component is 0.
pub type Mode = [i64; 2];

/// Discretization frame: dimension, retained modes, physical half-width and
/// collocation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    dim: usize,
    modes: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl VelocityGrid {
    pub fn new(dim: usize, modes: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(SpectralError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if modes < 1 {
            return Err(SpectralError::InvalidGrid("need at least one mode (N >= 1)".into()));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if points_per_axis < 2 * modes + 2 {
            return Err(SpectralError::InvalidGrid(format!(
                "{points_per_axis} collocation points cannot carry {modes} modes (need >= {})",
                2 * modes + 2
            )));
        }
        Ok(Self { dim, modes, half_width, points_per_axis })
    }

    /// Grid with the smallest legal collocation count `2N+2`.
    pub fn with_default_points(dim: usize, modes: usize, half_width: f64) -> Result<Self> {
        Self::new(dim, modes, half_width, 2 * modes + 2)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest retained wavenumber `N` per axis.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// `2N+1`.
    pub fn modes_per_axis(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn num_modes(&self) -> usize {
        self.modes_per_axis().pow(self.dim as u32)
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Collision truncation radius `λπ` on the scaled box.
    pub fn support_radius(&self) -> f64 {
        LAMBDA * PI
    }

    /// Physical length per scaled unit, `L/π`.
    pub fn scale(&self) -> f64 {
        self.half_width / PI
    }

    /// Scaled coordinate of collocation node `j`: `-π + 2πj/n`.
    pub fn node_scaled(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / self.points_per_axis as f64
    }

    /// Physical coordinate of collocation node `j`.
    pub fn node(&self, j: usize) -> f64 {
        self.scale() * self.node_scaled(j)
    }

    /// Physical velocity of the flat node index (row-major, last axis fastest).
    pub fn node_velocity(&self, flat: usize) -> [f64; 2] {
        let n = self.points_per_axis;
        match self.dim {
            1 => [self.node(flat), 0.0],
            _ => [self.node(flat / n), self.node(flat % n)],
        }
    }

    /// Flat index of mode `k`, or `None` if it is not retained.
    pub fn mode_index(&self, k: Mode) -> Option<usize> {
        let n = self.modes as i64;
        let m = self.modes_per_axis();
        let axis = |kj: i64| (kj.abs() <= n).then(|| (kj + n) as usize);
        match self.dim {
            1 => (k[1] == 0).then(|| axis(k[0])).flatten(),
            _ => Some(axis(k[0])? * m + axis(k[1])?),
        }
    }

    /// Mode stored at flat index `idx`.
    pub fn mode_at(&self, idx: usize) -> Mode {
        let n = self.modes as i64;
        let m = self.modes_per_axis();
        match self.dim {
            1 => [idx as i64 - n, 0],
            _ => [(idx / m) as i64 - n, (idx % m) as i64 - n],
        }
    }

    /// Flat index of `-k` for the mode at `idx`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        self.num_modes() - 1 - idx
    }

    /// Iterator over all retained modes in storage order.
    pub fn mode_iter(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.num_modes()).map(|i| self.mode_at(i))
    }

    pub fn ensure_same(&self, other: &VelocityGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(SpectralError::GridMismatch)
        }
    }
}
