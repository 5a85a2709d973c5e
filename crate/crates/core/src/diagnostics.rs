//! Exact solutions, error norms and observables.

use std::f64::consts::PI;

use crate::collision::{collide_fast, KernelDecomposition, SchemeEvaluator};
use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::VelocityGrid;
use crate::moments::{maxwellian_field_with, MomentBasis, MomentVector};
use crate::transform::SpectralTransform;

/// One line of an experiment's time series.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub time: f64,
    pub mass: f64,
    pub momentum: Vec<f64>,
    pub energy: f64,
    pub temperature: f64,
    /// `|T(t) - T(0)|`.
    pub temperature_error: f64,
    /// Distance to the Maxwellian with the instantaneous moments.
    pub l2_to_maxwellian: f64,
    pub l2_to_exact: Option<f64>,
    /// `|⟨Q, Φ⟩|₂` of the uncorrected collision term.
    pub moment_loss_of_q: f64,
}

impl DiagnosticsRow {
    pub fn is_finite(&self) -> bool {
        [self.time, self.mass, self.energy, self.temperature, self.temperature_error]
            .iter()
            .chain(&self.momentum)
            .chain([&self.l2_to_maxwellian, &self.moment_loss_of_q])
            .chain(self.l2_to_exact.as_ref())
            .all(|x| x.is_finite())
    }
}

/// `S(t) = 1 - e^{-t/8}/2`.
pub fn bkw_s(t: f64) -> f64 {
    1.0 - 0.5 * (-t / 8.0).exp()
}

/// Two-dimensional BKW solution for Maxwell molecules.
pub fn bkw_exact(t: f64, v: [f64; 2]) -> f64 {
    let s = bkw_s(t);
    let v2 = v[0] * v[0] + v[1] * v[1];
    (-v2 / (2.0 * s)).exp() / (2.0 * PI * s * s) * (2.0 * s - 1.0 + (1.0 - s) / (2.0 * s) * v2)
}

/// `∂_t f_BKW`, used to check the time derivative oracle.
pub fn bkw_time_derivative(t: f64, v: [f64; 2]) -> f64 {
    let s = bkw_s(t);
    let ds = (1.0 - s) / 8.0;
    let v2 = v[0] * v[0] + v[1] * v[1];
    let g = (-v2 / (2.0 * s)).exp() / (2.0 * PI);
    // f = g(s)/s² · (2s - 1 + (1-s)v²/(2s))
    let bracket = 2.0 * s - 1.0 + (1.0 - s) / (2.0 * s) * v2;
    let d_bracket = 2.0 - v2 / (2.0 * s * s);
    let d_prefactor = g / (s * s) * (v2 / (2.0 * s * s) - 2.0 / s);
    ds * (d_prefactor * bracket + g / (s * s) * d_bracket)
}

/// Spectral coefficients of the BKW solution sampled at time `t`.
pub fn bkw_field(t: f64, transform: &SpectralTransform) -> Result<SpectralField> {
    transform.sample(|v| bkw_exact(t, v))
}

/// `(energy/mass - |momentum/mass|²) / dim`.
pub fn temperature(m: &MomentVector, dim: usize) -> Result<f64> {
    if !(m.mass > 0.0) {
        return Err(SpectralError::InvalidMoments(format!("mass must be positive, got {}", m.mass)));
    }
    if dim == 0 {
        return Err(SpectralError::InvalidArgument("dimension must be positive".into()));
    }
    let u2: f64 = m.momentum.iter().map(|p| (p / m.mass).powi(2)).sum();
    Ok((m.energy / m.mass - u2) / dim as f64)
}

/// Physical `L²([-L, L]^d)` norm of `a - b` by Parseval:
/// `‖·‖² = (2L)^d Σ_k |â_k - b̂_k|²`.
pub fn l2_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    a.grid().ensure_same(b.grid())?;
    Ok(l2_scale(a) * a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt())
}

/// Physical `L²` norm of a field.
pub fn l2_norm(a: &SpectralField) -> f64 {
    l2_scale(a) * a.norm_sqr().sqrt()
}

fn l2_scale(a: &SpectralField) -> f64 {
    (2.0 * a.grid().half_width()).powi(a.grid().dim() as i32).sqrt()
}

/// Continuous `L²([-L, L]^d)` distance between the trigonometric
/// polynomial of `field` and the density `f`, by the trapezoid rule on
/// `oversample` times the collocation nodes.
pub fn l2_error_against<F: Fn([f64; 2]) -> f64>(
    field: &SpectralField,
    f: F,
    oversample: usize,
) -> Result<f64> {
    if oversample == 0 {
        return Err(SpectralError::InvalidArgument("oversample must be positive".into()));
    }
    let g = field.grid();
    let fine = VelocityGrid::new(g.dim(), g.modes(), g.half_width(), oversample * g.points_per_axis())?;
    let values = SpectralTransform::new(&fine)
        .inverse(&SpectralField::from_coeffs(&fine, field.coeffs().to_vec())?)?;
    let h = 2.0 * g.half_width() / fine.points_per_axis() as f64;
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(i, p)| (p - f(fine.node_velocity(i))).powi(2))
        .sum();
    Ok((sum * h.powi(g.dim() as i32)).sqrt())
}

/// Euclidean norm of the physical moments of the raw collision term.
pub fn moment_loss_of_q(
    field: &SpectralField,
    kernel: &KernelDecomposition,
    basis: &MomentBasis,
) -> Result<f64> {
    kernel.grid().ensure_same(basis.grid())?;
    let q = collide_fast(field, kernel, true)?;
    moment_norm(&q, basis)
}

fn moment_norm(q: &SpectralField, basis: &MomentBasis) -> Result<f64> {
    Ok(basis.moments(q)?.to_vec().iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Builds a diagnostics row for `field` at `time`.
pub fn diagnostics_row(
    time: f64,
    field: &SpectralField,
    evaluator: &SchemeEvaluator,
    initial_temperature: f64,
    exact: Option<&SpectralField>,
) -> Result<DiagnosticsRow> {
    let dim = field.grid().dim();
    let m = evaluator.basis().moments(field)?;
    let t = temperature(&m, dim)?;
    let maxw = maxwellian_field_with(&m, evaluator.transform())?;
    let q = evaluator.collide(field)?;
    Ok(DiagnosticsRow {
        time,
        mass: m.mass,
        momentum: m.momentum.clone(),
        energy: m.energy,
        temperature: t,
        temperature_error: (t - initial_temperature).abs(),
        l2_to_maxwellian: l2_distance(field, &maxw)?,
        l2_to_exact: exact.map(|e| l2_distance(field, e)).transpose()?,
        moment_loss_of_q: moment_norm(&q, evaluator.basis())?,
    })
}

/// Residual of the BKW solution in the discrete equation,
/// `‖(f(t+h) - f(t-h))/2h - Q(f(t))‖_{L²}`.
pub fn bkw_residual(evaluator: &SchemeEvaluator, t: f64, h: f64) -> Result<f64> {
    let (d, q) = bkw_residual_parts(evaluator, t, h)?;
    l2_distance(&d, &q)
}

fn bkw_residual_parts(
    evaluator: &SchemeEvaluator,
    t: f64,
    h: f64,
) -> Result<(SpectralField, SpectralField)> {
    if !(h > 0.0 && t - h >= 0.0) {
        return Err(SpectralError::InvalidArgument(format!("need 0 < h <= t, got t={t}, h={h}")));
    }
    let tr = evaluator.transform();
    let d = bkw_field(t + h, tr)?.axpy(-1.0, &bkw_field(t - h, tr)?)?.scaled(0.5 / h);
    let q = evaluator.collide(&bkw_field(t, tr)?)?;
    Ok((d, q))
}

/// Least-squares `b₀` for which the BKW residual at time `t` is smallest.
///
/// `Q` is linear in `b₀`, so the minimizer of `‖D - b₀ Q₁‖` is
/// `Re⟨D, Q₁⟩ / ‖Q₁‖²` with `Q₁` computed for the evaluator's own `b₀`
/// and rescaled.
pub fn calibrate_b0(evaluator: &SchemeEvaluator, t: f64, h: f64) -> Result<f64> {
    let (d, q) = bkw_residual_parts(evaluator, t, h)?;
    let num: f64 = d.coeffs().iter().zip(q.coeffs()).map(|(x, y)| (x * y.conj()).re).sum();
    let den = q.norm_sqr();
    if den == 0.0 {
        return Err(SpectralError::InvalidArgument("collision term vanishes".into()));
    }
    Ok(evaluator.kernel().b0() * num / den)
}
