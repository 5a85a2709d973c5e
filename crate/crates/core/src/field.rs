use std::ops::{Add, Mul, Sub};

use rustfft::num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::grid::{Mode, VelocityGrid};

/// Fourier coefficients `f̂_k`, `|k_j| ≤ N`, of a velocity distribution on
/// the scaled box. Storage is row-major over `k_1, …, k_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: VelocityGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &VelocityGrid) -> Self {
        Self { grid: grid.clone(), coeffs: vec![Complex64::new(0.0, 0.0); grid.num_modes()] }
    }

    pub fn from_coeffs(grid: &VelocityGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.num_modes() {
            return Err(SpectralError::ShapeMismatch {
                expected: grid.num_modes(),
                actual: coeffs.len(),
            });
        }
        Ok(Self { grid: grid.clone(), coeffs })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `k`; zero outside the retained band.
    pub fn coeff(&self, k: Mode) -> Complex64 {
        self.grid
            .mode_index(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: Mode, value: Complex64) {
        if let Some(i) = self.grid.mode_index(k) {
            self.coeffs[i] = value;
        }
    }

    /// Largest `|f̂_{-k} - conj(f̂_k)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.mirror_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Hermitian symmetry to `tol` relative to the largest coefficient.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Replaces every pair by its Hermitian-symmetric part.
    pub fn symmetrize(&mut self) {
        let n = self.coeffs.len();
        for i in 0..=n / 2 {
            let j = self.grid.mirror_index(i);
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
    }

    /// Coefficients of `v ↦ f(-v)`.
    pub fn reflected(&self) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        Self { grid: self.grid.clone(), coeffs }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |f̂_k|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + y * a).collect();
        Ok(Self { grid: self.grid.clone(), coeffs })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), coeffs: self.coeffs.iter().map(|c| c * a).collect() }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    /// Panics on grid mismatch; use [`SpectralField::axpy`] for a checked sum.
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs).expect("grid mismatch in field addition")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs).expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}
