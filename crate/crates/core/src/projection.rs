//! Moment-constrained best approximation in the space of trigonometric
//! polynomials.
//!
//! Among all `g_N` of degree `N` with prescribed moments, the closest to
//! `f_N` in `L²` is `f̂_k + Ĉ_k·r`, where `r` is the moment residual and
//! `Ĉ_k = (2π)^{-d} M^{-1} Φ̂_k` with the Gram matrix
//! `M = Σ_k conj(Φ̂_k) Φ̂_kᵀ`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rustfft::num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::moments::{MomentBasis, MomentVector};

#[derive(Debug, Clone)]
pub struct ConstraintOperator {
    basis: MomentBasis,
    gram: DMatrix<f64>,
    gram_factor: Cholesky<f64, Dyn>,
    /// `Ĉ`, row-major `modes × (d+2)`.
    correction: Vec<Complex64>,
}

impl ConstraintOperator {
    pub fn new(basis: &MomentBasis) -> Result<Self> {
        let q = basis.len();
        let rows = basis.rows();
        let mut gram = DMatrix::<f64>::zeros(q, q);
        for i in 0..q {
            for j in 0..q {
                let s: Complex64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a.conj() * b).sum();
                gram[(i, j)] = s.re;
            }
        }
        // exact symmetry; the imaginary parts cancel pairwise
        let gram = (&gram + gram.transpose()) * 0.5;
        let gram_factor = Cholesky::new(gram.clone()).ok_or(SpectralError::NotPositiveDefinite)?;
        let inv = gram_factor.inverse();

        let n_modes = basis.grid().num_modes();
        let norm = (2.0 * PI).powi(-(basis.grid().dim() as i32));
        let mut correction = vec![Complex64::new(0.0, 0.0); n_modes * q];
        for k in 0..n_modes {
            for j in 0..q {
                let mut c = Complex64::new(0.0, 0.0);
                for l in 0..q {
                    c += rows[l][k] * inv[(j, l)];
                }
                correction[k * q + j] = c * norm;
            }
        }
        Ok(Self { basis: basis.clone(), gram, gram_factor, correction })
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_factor(&self) -> &Cholesky<f64, Dyn> {
        &self.gram_factor
    }

    /// `Ĉ_k` for the mode at flat index `k`.
    pub fn correction(&self, k: usize) -> &[Complex64] {
        let q = self.basis.len();
        &self.correction[k * q..(k + 1) * q]
    }

    /// Adds `Σ_j Ĉ_{k,j} r_j` to every mode, `r` in scaled units.
    pub fn apply_scaled_residual(&self, field: &mut SpectralField, residual: &[f64]) {
        let q = self.basis.len();
        for (k, c) in field.coeffs_mut().iter_mut().enumerate() {
            let corr = &self.correction[k * q..(k + 1) * q];
            for (cj, rj) in corr.iter().zip(residual) {
                *c += cj * *rj;
            }
        }
    }

    /// Moves `field` onto the given scaled moments.
    pub fn project_scaled(&self, field: &SpectralField, target: &[f64]) -> Result<SpectralField> {
        let current = self.basis.scaled_moments(field)?;
        let residual: Vec<f64> = target.iter().zip(&current).map(|(t, c)| t - c).collect();
        let mut out = field.clone();
        self.apply_scaled_residual(&mut out, &residual);
        Ok(out)
    }

    /// Removes every moment of `field`: `f - Σ_k Ĉ_k ⟨f, Φ⟩`.
    pub fn remove_moments(&self, field: &SpectralField) -> Result<SpectralField> {
        self.project_scaled(field, &vec![0.0; self.basis.len()])
    }
}

/// Conservative projection: the `L²`-closest field with the physical
/// moments `target`.
pub fn conservative_project(
    field: &SpectralField,
    target: &MomentVector,
    op: &ConstraintOperator,
) -> Result<SpectralField> {
    field.grid().ensure_same(op.basis().grid())?;
    if !target.is_finite() {
        return Err(SpectralError::InvalidMoments("target moments must be finite".into()));
    }
    op.project_scaled(field, &op.basis().to_scaled(target)?)
}

pub fn build_constraint_operator(basis: &MomentBasis) -> Result<ConstraintOperator> {
    ConstraintOperator::new(basis)
}

/// One isotropic Gaussian of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center: Vec<f64>,
    pub variance: f64,
}

impl GaussianComponent {
    pub fn new(weight: f64, center: Vec<f64>, variance: f64) -> Self {
        Self { weight, center, variance }
    }

    /// Density at `v` (only the first `center.len()` components are read).
    pub fn density(&self, v: [f64; 2]) -> f64 {
        let d = self.center.len() as f64;
        let r2: f64 = self.center.iter().zip(v).map(|(c, x)| (x - c) * (x - c)).sum();
        self.weight * (-r2 / (2.0 * self.variance)).exp()
            / (2.0 * PI * self.variance).powf(d / 2.0)
    }
}

/// Closed-form moments of a Gaussian mixture on all of `ℝ^d`.
pub fn exact_moments_gaussian_mixture(
    spec: &[GaussianComponent],
    dim: usize,
) -> Result<MomentVector> {
    if spec.is_empty() {
        return Err(SpectralError::InvalidArgument("empty Gaussian mixture".into()));
    }
    let mut m = MomentVector::zero(dim);
    for g in spec {
        if !(g.weight > 0.0 && g.variance > 0.0) || g.center.len() != dim {
            return Err(SpectralError::InvalidArgument(format!(
                "invalid mixture component {g:?} for dimension {dim}"
            )));
        }
        let c2: f64 = g.center.iter().map(|c| c * c).sum();
        m.mass += g.weight;
        for (p, c) in m.momentum.iter_mut().zip(&g.center) {
            *p += g.weight * c;
        }
        m.energy += g.weight * (c2 + dim as f64 * g.variance);
    }
    Ok(m)
}
