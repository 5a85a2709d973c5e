#![allow(dead_code)]

use std::f64::consts::PI;

use conspec::{MomentVector, SpectralField, VelocityGrid};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use conspec::Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random Hermitian coefficients with `|f̂_k| ~ e^{-decay |k|²}`.
pub fn random_hermitian(grid: &VelocityGrid, rng: &mut impl Rng, decay: f64) -> SpectralField {
    let coeffs = grid
        .mode_iter()
        .map(|k| {
            let w = (-decay * (k[0] * k[0] + k[1] * k[1]) as f64).exp();
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w
        })
        .collect();
    let mut f = SpectralField::from_coeffs(grid, coeffs).unwrap();
    f.symmetrize();
    f
}

/// Gauss-Legendre nodes and weights on `[a, b]` by Newton iteration.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w));
    }
    out
}

/// Value at physical velocity `v` of the trigonometric polynomial of `f`.
pub fn evaluate(f: &SpectralField, v: [f64; 2]) -> f64 {
    let g = f.grid();
    let s = g.scale();
    let x = [v[0] / s, v[1] / s];
    g.mode_iter()
        .zip(f.coeffs())
        .map(|(k, c)| {
            let phase = k[0] as f64 * x[0] + if g.dim() == 2 { k[1] as f64 * x[1] } else { 0.0 };
            (c * Complex64::new(phase.cos(), phase.sin())).re
        })
        .sum()
}

/// `∫ h(v) dv` over `[-L, L]^d` by tensor Gauss-Legendre with `n` nodes per axis.
pub fn integrate_box<H: Fn([f64; 2]) -> f64>(dim: usize, half_width: f64, n: usize, h: H) -> f64 {
    let q = gauss_legendre(n, -half_width, half_width);
    match dim {
        1 => q.iter().map(|&(x, w)| w * h([x, 0.0])).sum(),
        _ => q
            .iter()
            .map(|&(x, wx)| q.iter().map(|&(y, wy)| wx * wy * h([x, y])).sum::<f64>())
            .sum(),
    }
}

/// Hand-written `Φ̂_k` for `d = 1`: δ, `i(-1)^k/k`, `2(-1)^k/k²` and `π²/3`.
pub fn phi_hat_1d(k: i64) -> [Complex64; 3] {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    if k == 0 {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(PI * PI / 3.0, 0.0)]
    } else {
        let kf = k as f64;
        [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, sign / kf),
            Complex64::new(2.0 * sign / (kf * kf), 0.0),
        ]
    }
}

/// Minimizes `Σ|c_k - f̂_k|²` over real and imaginary parts subject to the
/// three moment constraints by solving the full KKT system.
pub fn kkt_projection(f: &SpectralField, target: &MomentVector) -> SpectralField {
    let g = f.grid();
    let s = g.scale();
    let n = g.num_modes();
    let scaled = [target.mass / s, target.momentum[0] / (s * s), target.energy / (s * s * s)];
    let size = 2 * n + 3;
    let mut kkt = DMatrix::<f64>::zeros(size, size);
    let mut rhs = DVector::<f64>::zeros(size);
    for (i, k) in g.mode_iter().enumerate() {
        kkt[(2 * i, 2 * i)] = 2.0;
        kkt[(2 * i + 1, 2 * i + 1)] = 2.0;
        rhs[2 * i] = 2.0 * f.coeffs()[i].re;
        rhs[2 * i + 1] = 2.0 * f.coeffs()[i].im;
        // moment_j = 2π Σ Re(c conj φ) = 2π Σ (c.re φ.re + c.im φ.im)
        for (j, p) in phi_hat_1d(k[0]).iter().enumerate() {
            let row = 2 * n + j;
            for (col, a) in [(2 * i, 2.0 * PI * p.re), (2 * i + 1, 2.0 * PI * p.im)] {
                kkt[(row, col)] = a;
                kkt[(col, row)] = a;
            }
        }
    }
    for j in 0..3 {
        rhs[2 * n + j] = scaled[j];
    }
    let x = kkt.lu().solve(&rhs).expect("KKT system is regular");
    let coeffs = (0..n).map(|i| Complex64::new(x[2 * i], x[2 * i + 1])).collect();
    SpectralField::from_coeffs(g, coeffs).unwrap()
}
