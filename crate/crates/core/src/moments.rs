//! Collision invariants `Φ = (1, v_1, …, v_d, |v|²)` and the moments of
//! spectral fields.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::VelocityGrid;
use crate::transform::SpectralTransform;

/// Relative imaginary residue tolerated when pairing a field with `Φ̂`.
pub const MOMENT_IMAG_TOL: f64 = 1e-13;

/// Mass, momentum and energy in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
}

impl MomentVector {
    pub fn new(mass: f64, momentum: Vec<f64>, energy: f64) -> Self {
        Self { mass, momentum, energy }
    }

    /// Moments of `ρ·M(u, T)` in `dim` dimensions.
    pub fn from_macroscopic(density: f64, velocity: &[f64], temperature: f64) -> Self {
        let dim = velocity.len() as f64;
        let u2: f64 = velocity.iter().map(|u| u * u).sum();
        Self {
            mass: density,
            momentum: velocity.iter().map(|u| density * u).collect(),
            energy: density * (u2 + dim * temperature),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self { mass: 0.0, momentum: vec![0.0; dim], energy: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.momentum.len()
    }

    /// `(mass, momentum…, energy)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim() + 2);
        v.push(self.mass);
        v.extend_from_slice(&self.momentum);
        v.push(self.energy);
        v
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if !(3..=4).contains(&values.len()) {
            return Err(SpectralError::InvalidMoments(format!(
                "expected 3 or 4 components, got {}",
                values.len()
            )));
        }
        let last = values.len() - 1;
        Ok(Self { mass: values[0], momentum: values[1..last].to_vec(), energy: values[last] })
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.momentum.iter().map(|p| p / self.mass).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.to_vec().iter().all(|x| x.is_finite())
    }

    /// Componentwise absolute difference.
    pub fn abs_diff(&self, other: &MomentVector) -> Vec<f64> {
        self.to_vec().iter().zip(other.to_vec()).map(|(a, b)| (a - b).abs()).collect()
    }
}

/// Fourier coefficients of `Φ` on the scaled box, plus the factors that
/// turn scaled moments into physical ones.
#[derive(Debug, Clone)]
pub struct MomentBasis {
    grid: VelocityGrid,
    rows: Vec<Vec<Complex64>>,
    scale_factors: Vec<f64>,
}

fn alternating(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl MomentBasis {
    /// Exact coefficients under `f̂_k = (2π)^{-d} ∫ f e^{-ik·x} dx`:
    /// `(x_j)^_k = i(-1)^{k_j}/k_j` and `(x_j²)^_k = 2(-1)^{k_j}/k_j²` on the
    /// `j`-th axis, `(|x|²)^_0 = dπ²/3`.
    pub fn new(grid: &VelocityGrid) -> Self {
        let d = grid.dim();
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); grid.num_modes()]; d + 2];
        for (idx, k) in grid.mode_iter().enumerate() {
            let k = &k[..d];
            let nonzero: Vec<usize> = (0..d).filter(|&j| k[j] != 0).collect();
            match nonzero.as_slice() {
                [] => {
                    rows[0][idx] = Complex64::new(1.0, 0.0);
                    rows[d + 1][idx] = Complex64::new(d as f64 * PI * PI / 3.0, 0.0);
                }
                &[j] => {
                    let kj = k[j];
                    let sign = alternating(kj);
                    rows[1 + j][idx] = Complex64::new(0.0, sign / kj as f64);
                    rows[d + 1][idx] = Complex64::new(2.0 * sign / (kj * kj) as f64, 0.0);
                }
                _ => {}
            }
        }
        let s = grid.scale();
        let vol = s.powi(d as i32);
        let mut scale_factors = vec![vol];
        scale_factors.extend(std::iter::repeat_n(vol * s, d));
        scale_factors.push(vol * s * s);
        Self { grid: grid.clone(), rows, scale_factors }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// Number of invariants, `d+2`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `Φ̂_{j,·}` for invariant `j`.
    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// Physical moment = scaled moment × factor (`(L/π)^{d+p}` for velocity power `p`).
    pub fn scale_factors(&self) -> &[f64] {
        &self.scale_factors
    }

    /// `(2π)^d Σ_k f̂_k conj(Φ̂_{j,k})` for every `j`, on the scaled box.
    pub fn scaled_moments(&self, field: &SpectralField) -> Result<Vec<f64>> {
        self.grid.ensure_same(field.grid())?;
        let vol = (2.0 * PI).powi(self.grid.dim() as i32);
        self.rows
            .iter()
            .map(|row| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut magnitude = 0.0;
                for (c, p) in field.coeffs().iter().zip(row) {
                    if p.re != 0.0 || p.im != 0.0 {
                        let term = c * p.conj();
                        acc += term;
                        magnitude += term.norm();
                    }
                }
                let tolerance = MOMENT_IMAG_TOL * magnitude.max(f64::MIN_POSITIVE);
                if acc.im.abs() > tolerance {
                    return Err(SpectralError::NotHermitian { residue: acc.im.abs(), tolerance });
                }
                Ok(vol * acc.re)
            })
            .collect()
    }

    pub fn to_physical(&self, scaled: &[f64]) -> Result<MomentVector> {
        let v: Vec<f64> = scaled.iter().zip(&self.scale_factors).map(|(m, s)| m * s).collect();
        MomentVector::from_slice(&v)
    }

    pub fn to_scaled(&self, moments: &MomentVector) -> Result<Vec<f64>> {
        let v = moments.to_vec();
        if v.len() != self.len() {
            return Err(SpectralError::InvalidMoments(format!(
                "moment vector has dimension {}, grid has {}",
                moments.dim(),
                self.grid.dim()
            )));
        }
        Ok(v.iter().zip(&self.scale_factors).map(|(m, s)| m / s).collect())
    }

    pub fn moments(&self, field: &SpectralField) -> Result<MomentVector> {
        self.to_physical(&self.scaled_moments(field)?)
    }
}

/// Physical moments of a spectral field.
pub fn moments(field: &SpectralField, basis: &MomentBasis) -> Result<MomentVector> {
    basis.moments(field)
}

/// Density, velocity and temperature `T = (E/ρ - |u|²)/d` of a moment vector.
pub fn macroscopic(target: &MomentVector) -> Result<(f64, Vec<f64>, f64)> {
    if !(target.mass > 0.0) {
        return Err(SpectralError::InvalidMoments(format!(
            "mass must be positive, got {}",
            target.mass
        )));
    }
    let u = target.velocity();
    let u2: f64 = u.iter().map(|x| x * x).sum();
    let t = (target.energy / target.mass - u2) / target.dim() as f64;
    if !(t > 0.0) {
        return Err(SpectralError::InvalidMoments(format!("temperature must be positive, got {t}")));
    }
    Ok((target.mass, u, t))
}

/// `ρ (2πT)^{-d/2} exp(-|v-u|²/2T)`.
pub fn maxwellian(density: f64, velocity: &[f64], temperature: f64, v: [f64; 2]) -> f64 {
    let d = velocity.len();
    let r2: f64 = velocity.iter().zip(v).map(|(u, x)| (x - u) * (x - u)).sum();
    density / (2.0 * PI * temperature).powf(d as f64 / 2.0) * (-r2 / (2.0 * temperature)).exp()
}

/// Maxwellian with the given moments, sampled on the nodes and transformed.
pub fn maxwellian_field_with(
    target: &MomentVector,
    transform: &SpectralTransform,
) -> Result<SpectralField> {
    if target.dim() != transform.grid().dim() {
        return Err(SpectralError::InvalidMoments("moment dimension does not match grid".into()));
    }
    let (rho, u, t) = macroscopic(target)?;
    transform.sample(|v| maxwellian(rho, &u, t, v))
}

pub fn maxwellian_field(
    target: &MomentVector,
    grid: &VelocityGrid,
    basis: &MomentBasis,
) -> Result<SpectralField> {
    grid.ensure_same(basis.grid())?;
    maxwellian_field_with(target, &SpectralTransform::new(grid))
}
