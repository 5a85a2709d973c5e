//! Truncated, periodized Boltzmann collision operator for two-dimensional
//! Maxwell molecules.
//!
//! In the Carleman form the kernel is constant, `B̃ = 2b₀`, and the Fourier
//! weights
//!
//! ```text
//! B_F(l, m) = ∫_0^π φ(l·e_θ) φ(m·e_{θ+π/2}) dθ,    φ(s) = 2R sinc(Rs)
//! ```
//!
//! split under an `A`-point angular rule into `(π/A) Σ_p α_p(l) α'_p(m)`.
//! The gain term is then a sum of `A` convolutions and the loss term one
//! more, each evaluated with FFTs.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::{Mode, VelocityGrid};
use crate::moments::{maxwellian_field_with, MomentBasis};
use crate::parallel::{self, Execution};
use crate::projection::{conservative_project, ConstraintOperator};
use crate::transform::{wrapped_slots, SpectralTransform, SquareFft};

/// Default angular discretization.
pub const DEFAULT_ANGLES: usize = 8;

/// Maxwell kernel constant for which the BKW solution has
/// `S(t) = 1 - e^{-t/8}/2`.
pub const DEFAULT_B0: f64 = 1.0 / (2.0 * PI);

/// Upper bound on `(2N+1)^{2d}` for [`collide_direct`].
pub const DIRECT_SUM_LIMIT: u128 = 100_000_000;

/// `φ_R²(s) = ∫_{-R}^{R} e^{iρs} dρ = 2R sinc(Rs)`.
pub fn phi_r2(s: f64, r: f64) -> f64 {
    let x = r * s;
    if x.abs() < 1e-8 {
        // sinc(x) = 1 - x²/6 + O(x⁴)
        2.0 * r * (1.0 - x * x / 6.0)
    } else {
        2.0 * r * x.sin() / x
    }
}

fn dot(k: Mode, theta: f64) -> f64 {
    k[0] as f64 * theta.cos() + k[1] as f64 * theta.sin()
}

/// `B_F(l, m)` by an `n_theta`-point trapezoid rule on `[0, π)`. The
/// integrand is π-periodic and entire, so the rule converges spectrally.
pub fn angular_kernel_quadrature(l: Mode, m: Mode, r: f64, n_theta: usize) -> f64 {
    let h = PI / n_theta as f64;
    (0..n_theta)
        .map(|p| {
            let theta = h * p as f64;
            phi_r2(dot(l, theta), r) * phi_r2(dot(m, theta + FRAC_PI_2), r)
        })
        .sum::<f64>()
        * h
}

/// Scheme variants built on the fast spectral collision term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeVariant {
    /// Plain fast spectral.
    Fs,
    /// Moment preserving.
    Mpfs,
    /// Equilibrium preserving.
    Epfs,
    /// Moment and equilibrium preserving.
    Mepfs,
}

impl SchemeVariant {
    pub const ALL: [SchemeVariant; 4] =
        [SchemeVariant::Fs, SchemeVariant::Mpfs, SchemeVariant::Epfs, SchemeVariant::Mepfs];

    pub fn name(self) -> &'static str {
        match self {
            SchemeVariant::Fs => "fs",
            SchemeVariant::Mpfs => "mpfs",
            SchemeVariant::Epfs => "epfs",
            SchemeVariant::Mepfs => "mepfs",
        }
    }

    /// Whether the scheme enforces the collision invariants.
    pub fn is_conservative(self) -> bool {
        matches!(self, SchemeVariant::Mpfs | SchemeVariant::Mepfs)
    }
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeVariant {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fs" => Ok(SchemeVariant::Fs),
            "mpfs" => Ok(SchemeVariant::Mpfs),
            "epfs" => Ok(SchemeVariant::Epfs),
            "mepfs" => Ok(SchemeVariant::Mepfs),
            other => Err(SpectralError::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Convolution buffers of one size: FFT plan and slot of each mode.
#[derive(Debug, Clone)]
struct ConvolutionGrid {
    fft: SquareFft,
    slots: Vec<usize>,
}

impl ConvolutionGrid {
    fn new(grid: &VelocityGrid, len: usize) -> Self {
        Self { fft: SquareFft::new(2, len), slots: wrapped_slots(grid, len) }
    }

    /// Node values of `Σ_k w_k f̂_k e^{ik·x}`.
    fn to_nodes<W: Fn(usize) -> Complex64>(&self, f: &[Complex64], w: W) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.total_len()];
        for (i, (&slot, c)) in self.slots.iter().zip(f).enumerate() {
            buf[slot] = c * w(i);
        }
        self.fft.process(&mut buf, FftDirection::Inverse);
        buf
    }

    fn to_modes(&self, mut nodes: Vec<Complex64>) -> Vec<Complex64> {
        self.fft.process(&mut nodes, FftDirection::Forward);
        let norm = 1.0 / self.fft.total_len() as f64;
        self.slots.iter().map(|&s| nodes[s] * norm).collect()
    }
}

/// Smallest `n ≥ min` of the form `2^a 3^b 5^c`.
fn fast_len(min: usize) -> usize {
    (min.max(1)..)
        .find(|&n| {
            let mut m = n;
            for p in [2, 3, 5] {
                while m % p == 0 {
                    m /= p;
                }
            }
            m == 1
        })
        .expect("unbounded search")
}

/// Precomputed angular weights of the fast collision sum.
#[derive(Debug, Clone)]
pub struct KernelDecomposition {
    grid: VelocityGrid,
    angles: usize,
    radius: f64,
    b0: f64,
    prefactor: f64,
    /// `α_p(l)`, row-major `A × modes`.
    alpha: Vec<f64>,
    /// `α'_p(m)`, row-major `A × modes`.
    alpha_perp: Vec<f64>,
    loss_diag: Vec<f64>,
    padded: ConvolutionGrid,
    cyclic: ConvolutionGrid,
}

impl KernelDecomposition {
    pub fn new(grid: &VelocityGrid, angles: usize, b0: f64) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(SpectralError::InvalidArgument(
                "the collision operator is implemented for d = 2 only".into(),
            ));
        }
        if angles == 0 {
            return Err(SpectralError::InvalidArgument("need at least one angle".into()));
        }
        if !(b0.is_finite() && b0 > 0.0) {
            return Err(SpectralError::InvalidArgument(format!("b0 must be positive, got {b0}")));
        }
        let radius = grid.support_radius();
        let n_modes = grid.num_modes();
        let mut alpha = Vec::with_capacity(angles * n_modes);
        let mut alpha_perp = Vec::with_capacity(angles * n_modes);
        for p in 1..=angles {
            let theta = PI * p as f64 / angles as f64;
            alpha.extend(grid.mode_iter().map(|l| phi_r2(dot(l, theta), radius)));
            alpha_perp.extend(grid.mode_iter().map(|m| phi_r2(dot(m, theta + FRAC_PI_2), radius)));
        }
        let weight = PI / angles as f64;
        let loss_diag = (0..n_modes)
            .map(|m| {
                weight
                    * (0..angles)
                        .map(|p| alpha[p * n_modes + m] * alpha_perp[p * n_modes + m])
                        .sum::<f64>()
            })
            .collect();
        let n = grid.modes();
        // Linear convolution restricted to |k| ≤ N needs more than 3N points.
        let padded = ConvolutionGrid::new(grid, fast_len(3 * n + 1));
        let cyclic = ConvolutionGrid::new(grid, grid.points_per_axis());
        let scale = grid.scale();
        Ok(Self {
            grid: grid.clone(),
            angles,
            radius,
            b0,
            // B̃ = 2b₀; the dilation v = (L/π)x contributes (L/π)^d.
            prefactor: 2.0 * b0 * scale * scale,
            alpha,
            alpha_perp,
            loss_diag,
            padded,
            cyclic,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    /// Truncation radius `λπ` on the scaled box.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// Factor turning the scaled-box sum into `∂_t f̂` in physical time:
    /// `2b₀(L/π)²`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn alpha(&self, p: usize) -> &[f64] {
        let n = self.grid.num_modes();
        &self.alpha[p * n..(p + 1) * n]
    }

    pub fn alpha_perp(&self, p: usize) -> &[f64] {
        let n = self.grid.num_modes();
        &self.alpha_perp[p * n..(p + 1) * n]
    }

    /// `B_F(m, m)` under the same angular rule as the gain term.
    pub fn loss_diag(&self) -> &[f64] {
        &self.loss_diag
    }

    /// Padded convolution length per axis.
    pub fn padded_len(&self) -> usize {
        self.padded.fft.len()
    }

    /// `(π/A) Σ_p α_p(l) α'_p(m)` for flat mode indices.
    pub fn weight(&self, l: usize, m: usize) -> f64 {
        let n = self.grid.num_modes();
        (0..self.angles).map(|p| self.alpha[p * n + l] * self.alpha_perp[p * n + m]).sum::<f64>()
            * PI
            / self.angles as f64
    }
}

pub fn precompute_kernel(grid: &VelocityGrid, angles: usize, b0: f64) -> Result<KernelDecomposition> {
    KernelDecomposition::new(grid, angles, b0)
}

/// Hermitian tolerance below which the packed real evaluation is used.
const PACKED_TOL: f64 = 1e-12;

/// Fast evaluation of `Q̂_k = Σ_{l+m=k} [B_F(l,m) - B_F(m,m)] f̂_l f̂_m`.
///
/// With `pad` the convolutions are exact linear convolutions truncated to
/// `|k| ≤ N`; without it they are cyclic on the collocation grid and alias.
pub fn collide_fast(
    field: &SpectralField,
    kernel: &KernelDecomposition,
    pad: bool,
) -> Result<SpectralField> {
    collide_fast_with(field, kernel, pad, Execution::default())
}

pub fn collide_fast_with(
    field: &SpectralField,
    kernel: &KernelDecomposition,
    pad: bool,
    exec: Execution,
) -> Result<SpectralField> {
    kernel.grid.ensure_same(field.grid())?;
    let conv = if pad { &kernel.padded } else { &kernel.cyclic };
    let f = field.coeffs();
    let a = kernel.angles;

    // A Hermitian f̂ times an even real weight is Hermitian, so two real
    // node functions can share one complex transform as real and imaginary
    // parts.
    let packed = field.is_hermitian(PACKED_TOL);
    let product = |w1: &[f64], w2: &[f64]| -> Vec<Complex64> {
        if packed {
            conv.to_nodes(f, |k| Complex64::new(w1[k], w2[k]))
                .into_iter()
                .map(|z| Complex64::new(z.re * z.im, 0.0))
                .collect()
        } else {
            let x = conv.to_nodes(f, |k| Complex64::new(w1[k], 0.0));
            let y = conv.to_nodes(f, |k| Complex64::new(w2[k], 0.0));
            x.into_iter().zip(y).map(|(x, y)| x * y).collect()
        }
    };

    let ones = vec![1.0; f.len()];
    let (gains, loss) = parallel::join(
        exec,
        || parallel::map_indexed(a, exec, |p| product(kernel.alpha(p), kernel.alpha_perp(p))),
        || product(&ones, &kernel.loss_diag),
    );
    let weight = PI / a as f64;
    let mut total = loss;
    for t in total.iter_mut() {
        *t = -*t;
    }
    // fixed summation order over p
    for g in &gains {
        for (t, x) in total.iter_mut().zip(g) {
            *t += x * weight;
        }
    }
    let coeffs: Vec<Complex64> =
        conv.to_modes(total).into_iter().map(|c| c * kernel.prefactor).collect();
    let mut q = SpectralField::from_coeffs(&kernel.grid, coeffs)?;
    if packed {
        q.symmetrize();
    }
    Ok(q)
}

/// Reference `O(n²)` evaluation of the truncated sum with the kernel's
/// angular rule.
pub fn collide_direct(field: &SpectralField, kernel: &KernelDecomposition) -> Result<SpectralField> {
    collide_direct_by(field, kernel, |l, m| kernel.weight(l, m))
}

/// Direct sum with an arbitrary weight `B_F(l, m)` on flat mode indices.
pub fn collide_direct_by<B: Fn(usize, usize) -> f64>(
    field: &SpectralField,
    kernel: &KernelDecomposition,
    weight: B,
) -> Result<SpectralField> {
    let grid = &kernel.grid;
    grid.ensure_same(field.grid())?;
    let pairs = (grid.num_modes() as u128).pow(2);
    if pairs > DIRECT_SUM_LIMIT {
        return Err(SpectralError::TooLarge { pairs, limit: DIRECT_SUM_LIMIT });
    }
    let f = field.coeffs();
    let n_modes = grid.num_modes();
    let diag: Vec<f64> = (0..n_modes).map(|m| weight(m, m)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n_modes];
    for l in 0..n_modes {
        let kl = grid.mode_at(l);
        for m in 0..n_modes {
            let km = grid.mode_at(m);
            if let Some(k) = grid.mode_index([kl[0] + km[0], kl[1] + km[1]]) {
                out[k] += f[l] * f[m] * (weight(l, m) - diag[m]);
            }
        }
    }
    for c in out.iter_mut() {
        *c *= kernel.prefactor;
    }
    SpectralField::from_coeffs(grid, out)
}

/// Everything needed to evaluate a scheme's right-hand side repeatedly.
#[derive(Debug, Clone)]
pub struct SchemeEvaluator {
    kernel: KernelDecomposition,
    basis: MomentBasis,
    constraint: ConstraintOperator,
    transform: SpectralTransform,
    pad: bool,
    exec: Execution,
}

impl SchemeEvaluator {
    pub fn new(kernel: KernelDecomposition, pad: bool) -> Result<Self> {
        let basis = MomentBasis::new(kernel.grid());
        let constraint = ConstraintOperator::new(&basis)?;
        let transform = SpectralTransform::new(kernel.grid());
        Ok(Self { kernel, basis, constraint, transform, pad, exec: Execution::default() })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn kernel(&self) -> &KernelDecomposition {
        &self.kernel
    }

    pub fn basis(&self) -> &MomentBasis {
        &self.basis
    }

    pub fn constraint(&self) -> &ConstraintOperator {
        &self.constraint
    }

    pub fn transform(&self) -> &SpectralTransform {
        &self.transform
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.kernel.grid()
    }

    /// Raw fast collision term.
    pub fn collide(&self, field: &SpectralField) -> Result<SpectralField> {
        collide_fast_with(field, &self.kernel, self.pad, self.exec)
    }

    /// Collision term with all moments removed.
    pub fn collide_conservative(&self, field: &SpectralField) -> Result<SpectralField> {
        self.constraint.remove_moments(&self.collide(field)?)
    }

    /// The equilibrium subtracted by EPFS/MEPFS: the projected Maxwellian
    /// with the moments of `field`, conservatively corrected for MEPFS.
    pub fn equilibrium(&self, field: &SpectralField, variant: SchemeVariant) -> Result<SpectralField> {
        let m = self.basis.moments(field)?;
        let maxw = maxwellian_field_with(&m, &self.transform)?;
        match variant {
            SchemeVariant::Mepfs => conservative_project(&maxw, &m, &self.constraint),
            _ => Ok(maxw),
        }
    }

    /// Scheme right-hand side.
    pub fn apply(&self, field: &SpectralField, variant: SchemeVariant) -> Result<SpectralField> {
        match variant {
            SchemeVariant::Fs | SchemeVariant::Mpfs => self.apply_with_equilibrium(field, variant, None),
            SchemeVariant::Epfs | SchemeVariant::Mepfs => {
                let eq = self.equilibrium(field, variant)?;
                self.apply_with_equilibrium(field, variant, Some(&eq))
            }
        }
    }

    /// Scheme right-hand side with the subtracted equilibrium supplied by
    /// the caller (ignored by FS/MPFS).
    pub fn apply_with_equilibrium(
        &self,
        field: &SpectralField,
        variant: SchemeVariant,
        equilibrium: Option<&SpectralField>,
    ) -> Result<SpectralField> {
        let collide = |g: &SpectralField| match variant {
            SchemeVariant::Fs | SchemeVariant::Epfs => self.collide(g),
            SchemeVariant::Mpfs | SchemeVariant::Mepfs => self.collide_conservative(g),
        };
        match (variant, equilibrium) {
            (SchemeVariant::Fs | SchemeVariant::Mpfs, _) => collide(field),
            (_, Some(eq)) => {
                let (q, qe) = parallel::join(self.exec, || collide(field), || collide(eq));
                q?.axpy(-1.0, &qe?)
            }
            (_, None) => Err(SpectralError::InvalidArgument(format!(
                "{variant} requires an equilibrium"
            ))),
        }
    }
}

/// One-shot scheme evaluation. MPFS and MEPFS need `op`.
pub fn apply_scheme(
    field: &SpectralField,
    variant: SchemeVariant,
    kernel: &KernelDecomposition,
    op: Option<&ConstraintOperator>,
    basis: &MomentBasis,
    pad: bool,
) -> Result<SpectralField> {
    kernel.grid().ensure_same(basis.grid())?;
    if variant.is_conservative() && op.is_none() {
        return Err(SpectralError::InvalidArgument(format!(
            "{variant} requires a constraint operator"
        )));
    }
    let q = collide_fast(field, kernel, pad)?;
    let correct = |q: SpectralField| match (variant.is_conservative(), op) {
        (true, Some(op)) => op.remove_moments(&q),
        _ => Ok(q),
    };
    match variant {
        SchemeVariant::Fs | SchemeVariant::Mpfs => correct(q),
        SchemeVariant::Epfs | SchemeVariant::Mepfs => {
            let transform = SpectralTransform::new(kernel.grid());
            let m = basis.moments(field)?;
            let mut eq = maxwellian_field_with(&m, &transform)?;
            if let (SchemeVariant::Mepfs, Some(op)) = (variant, op) {
                eq = conservative_project(&eq, &m, op)?;
            }
            let qe = collide_fast(&eq, kernel, pad)?;
            correct(q)?.axpy(-1.0, &correct(qe)?)
        }
    }
}
