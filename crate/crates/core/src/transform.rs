//! Discrete Fourier transforms between collocation samples and retained
//! Fourier coefficients.
//!
//! Nodes sit at `x_j = -π + 2πj/n`, so `e^{-ik·x_j}` differs from the plain
//! DFT twiddle by the sign `(-1)^{k_1+…+k_d}`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::VelocityGrid;

/// Imaginary residue (relative to the largest sample) tolerated by
/// [`SpectralTransform::inverse`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-13;

/// Square `n^d` complex FFT with cached plans, for `d ∈ {1, 2}`.
#[derive(Clone)]
pub struct SquareFft {
    dim: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SquareFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SquareFft").field("dim", &self.dim).field("len", &self.len).finish()
    }
}

impl SquareFft {
    pub fn new(dim: usize, len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dim,
            len,
            forward: planner.plan_fft(len, FftDirection::Forward),
            inverse: planner.plan_fft(len, FftDirection::Inverse),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total_len(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    /// Unnormalized in-place transform of a row-major buffer.
    pub fn process(&self, buf: &mut [Complex64], direction: FftDirection) {
        debug_assert_eq!(buf.len(), self.total_len());
        let fft = match direction {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        // rows
        fft.process_with_scratch(buf, &mut scratch);
        if self.dim == 2 {
            let n = self.len;
            let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
            transpose(buf, &mut t, n);
            fft.process_with_scratch(&mut t, &mut scratch);
            transpose(&t, buf, n);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Maps retained modes onto the slots of an `n^d` FFT buffer (`k mod n`).
pub(crate) fn wrapped_slots(grid: &VelocityGrid, n: usize) -> Vec<usize> {
    let wrap = |k: i64| k.rem_euclid(n as i64) as usize;
    grid.mode_iter()
        .map(|k| match grid.dim() {
            1 => wrap(k[0]),
            _ => wrap(k[0]) * n + wrap(k[1]),
        })
        .collect()
}

fn node_sign(k: [i64; 2]) -> f64 {
    if (k[0] + k[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Forward/inverse transforms on the collocation nodes of one grid.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    grid: VelocityGrid,
    fft: SquareFft,
    slots: Vec<usize>,
    signs: Vec<f64>,
}

impl SpectralTransform {
    pub fn new(grid: &VelocityGrid) -> Self {
        let n = grid.points_per_axis();
        Self {
            grid: grid.clone(),
            fft: SquareFft::new(grid.dim(), n),
            slots: wrapped_slots(grid, n),
            signs: grid.mode_iter().map(node_sign).collect(),
        }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    /// `f̂_k ≈ (2π)^{-d} ∫ f e^{-ik·x} dx` by the trapezoid rule on the nodes.
    pub fn forward(&self, samples: &[f64]) -> Result<SpectralField> {
        let total = self.grid.num_points();
        if samples.len() != total {
            return Err(SpectralError::ShapeMismatch { expected: total, actual: samples.len() });
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.fft.process(&mut buf, FftDirection::Forward);
        let norm = 1.0 / total as f64;
        let coeffs = self
            .slots
            .iter()
            .zip(&self.signs)
            .map(|(&slot, &sign)| buf[slot] * (sign * norm))
            .collect();
        // real data: remove the rounding-level asymmetry of the FFT
        let mut field = SpectralField::from_coeffs(&self.grid, coeffs)?;
        field.symmetrize();
        Ok(field)
    }

    /// Evaluates `Σ_k f̂_k e^{ik·x}` at the nodes.
    pub fn inverse(&self, field: &SpectralField) -> Result<Vec<f64>> {
        let buf = self.inverse_complex(field)?;
        let peak = buf.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let tolerance = IMAG_RESIDUE_TOL * peak.max(f64::MIN_POSITIVE);
        if residue > tolerance {
            return Err(SpectralError::NotHermitian { residue, tolerance });
        }
        Ok(buf.into_iter().map(|c| c.re).collect())
    }

    /// Complex node values, without the realness check.
    pub fn inverse_complex(&self, field: &SpectralField) -> Result<Vec<Complex64>> {
        self.grid.ensure_same(field.grid())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.num_points()];
        for ((&slot, &sign), c) in self.slots.iter().zip(&self.signs).zip(field.coeffs()) {
            buf[slot] = c * sign;
        }
        self.fft.process(&mut buf, FftDirection::Inverse);
        Ok(buf)
    }

    /// Samples `f(v)` at the physical node velocities and transforms.
    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Result<SpectralField> {
        let samples: Vec<f64> =
            (0..self.grid.num_points()).map(|i| f(self.grid.node_velocity(i))).collect();
        self.forward(&samples)
    }
}

/// One-shot forward transform; prefer [`SpectralTransform`] in loops.
pub fn forward_transform(samples: &[f64], grid: &VelocityGrid) -> Result<SpectralField> {
    SpectralTransform::new(grid).forward(samples)
}

/// One-shot inverse transform.
pub fn inverse_transform(field: &SpectralField) -> Result<Vec<f64>> {
    SpectralTransform::new(field.grid()).inverse(field)
}
