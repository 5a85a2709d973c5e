//! RK4 time integration of the homogeneous equation and initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::collision::{SchemeEvaluator, SchemeVariant, DEFAULT_ANGLES, DEFAULT_B0};
use crate::diagnostics::{bkw_exact, diagnostics_row, temperature, DiagnosticsRow};
use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::VelocityGrid;
use crate::moments::{MomentBasis, MomentVector};
use crate::parallel::Execution;
use crate::projection::{conservative_project, ConstraintOperator};
use crate::transform::SpectralTransform;
use crate::collision::KernelDecomposition;

/// Parameters of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: SchemeVariant,
    pub dt: f64,
    pub t_final: f64,
    pub grid: VelocityGrid,
    pub angles: usize,
    pub b0: f64,
    pub pad: bool,
    pub diagnostic_stride: usize,
    pub execution: Execution,
}

impl SolverConfig {
    /// `dt = 0.01`, eight angles, padding on, one row per unit time.
    pub fn new(scheme: SchemeVariant, grid: VelocityGrid, t_final: f64) -> Self {
        Self {
            scheme,
            dt: 0.01,
            t_final,
            grid,
            angles: DEFAULT_ANGLES,
            b0: DEFAULT_B0,
            pad: true,
            diagnostic_stride: 100,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SpectralError::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(SpectralError::InvalidArgument(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if self.diagnostic_stride == 0 {
            return Err(SpectralError::InvalidArgument("diagnostic_stride must be at least 1".into()));
        }
        if self.angles == 0 {
            return Err(SpectralError::InvalidArgument("angles must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; a final partial step is never taken, so
    /// `t_final` is rounded to the nearest multiple of `dt`.
    pub fn num_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn evaluator(&self) -> Result<SchemeEvaluator> {
        self.validate()?;
        let kernel = KernelDecomposition::new(&self.grid, self.angles, self.b0)?;
        Ok(SchemeEvaluator::new(kernel, self.pad)?.with_execution(self.execution))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub time: f64,
    pub field: SpectralField,
    /// Moments at `t = 0`, the target of the conservative schemes.
    pub initial_moments: MomentVector,
}

/// Classical four-stage RK4 step. The result is made exactly Hermitian.
pub fn rk4_step<F>(state: &SolverState, dt: f64, mut rhs: F) -> Result<SolverState>
where
    F: FnMut(&SpectralField) -> Result<SpectralField>,
{
    let f = &state.field;
    let k1 = rhs(f)?;
    let k2 = rhs(&f.axpy(0.5 * dt, &k1)?)?;
    let k3 = rhs(&f.axpy(0.5 * dt, &k2)?)?;
    let k4 = rhs(&f.axpy(dt, &k3)?)?;
    let mut next = f.clone();
    let w = dt / 6.0;
    for ((((y, a), b), c), d) in next
        .coeffs_mut()
        .iter_mut()
        .zip(k1.coeffs())
        .zip(k2.coeffs())
        .zip(k3.coeffs())
        .zip(k4.coeffs())
    {
        *y += (a + b * 2.0 + c * 2.0 + d) * w;
    }
    let time = state.time + dt;
    if !next.is_finite() {
        return Err(SpectralError::BlowUp { time });
    }
    next.symmetrize();
    Ok(SolverState { time, field: next, initial_moments: state.initial_moments.clone() })
}

/// Time integrator bound to one configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    evaluator: SchemeEvaluator,
    target: Option<MomentVector>,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        let evaluator = config.evaluator()?;
        Ok(Self { config, evaluator, target: None })
    }

    /// Exact moments of the initial datum. Conservative schemes start from
    /// the projection onto these instead of the moments of the sampled
    /// field, which carry the truncation error.
    pub fn with_target_moments(mut self, target: MomentVector) -> Self {
        self.target = Some(target);
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn evaluator(&self) -> &SchemeEvaluator {
        &self.evaluator
    }

    /// State at `t = 0`. Conservative schemes start from the conservative
    /// projection of `initial` onto the target moments (its own moments if
    /// none were given).
    pub fn initial_state(&self, initial: &SpectralField) -> Result<SolverState> {
        self.config.grid.ensure_same(initial.grid())?;
        let field = match (&self.target, self.config.scheme.is_conservative()) {
            (Some(target), true) => conservative_project(initial, target, self.evaluator.constraint())?,
            (None, true) => {
                let own = self.evaluator.basis().moments(initial)?;
                conservative_project(initial, &own, self.evaluator.constraint())?
            }
            (_, false) => initial.clone(),
        };
        let initial_moments = self.evaluator.basis().moments(&field)?;
        Ok(SolverState { time: 0.0, field, initial_moments })
    }

    pub fn rhs(&self, field: &SpectralField) -> Result<SpectralField> {
        self.evaluator.apply(field, self.config.scheme)
    }

    pub fn step(&self, state: &SolverState) -> Result<SolverState> {
        rk4_step(state, self.config.dt, |f| self.rhs(f))
    }

    /// Integrates to `t_final`, passing a row to `emit` at `t = 0`, every
    /// `diagnostic_stride` steps and at the final step. `exact` supplies an
    /// optional reference solution for the `l2_to_exact` column.
    pub fn integrate<E, X>(&self, initial: &SpectralField, exact: X, mut emit: E) -> Result<SolverState>
    where
        E: FnMut(&DiagnosticsRow),
        X: Fn(f64) -> Option<Result<SpectralField>>,
    {
        let mut state = self.initial_state(initial)?;
        let t0 = temperature(&state.initial_moments, initial.grid().dim())?;
        let row = |state: &SolverState| -> Result<DiagnosticsRow> {
            let reference = exact(state.time).transpose()?;
            diagnostics_row(state.time, &state.field, &self.evaluator, t0, reference.as_ref())
        };
        emit(&row(&state)?);
        let steps = self.config.num_steps();
        for i in 1..=steps {
            state = self.step(&state)?;
            // avoid accumulating round-off in the clock
            state.time = i as f64 * self.config.dt;
            if i % self.config.diagnostic_stride == 0 || i == steps {
                emit(&row(&state)?);
            }
        }
        Ok(state)
    }
}

/// Integrates `initial` under `config`, collecting all diagnostics rows.
/// `target` are the exact moments of the initial datum, if known.
pub fn integrate(
    initial: &SpectralField,
    config: &SolverConfig,
    target: Option<&MomentVector>,
) -> Result<(SolverState, Vec<DiagnosticsRow>)> {
    let mut solver = Solver::new(config.clone())?;
    if let Some(t) = target {
        solver = solver.with_target_moments(t.clone());
    }
    let mut rows = Vec::new();
    let state = solver.integrate(initial, |_| None, |r| rows.push(r.clone()))?;
    Ok((state, rows))
}

/// Named initial densities of the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialCondition {
    /// `e^{-v²/2}/√(2π)` in one dimension.
    Gauss1d,
    /// Two unit-variance Gaussians at `v = 4` and `v = -2`, equal weights.
    Bumps1d,
    /// BKW solution at `t = 0`.
    Bkw2d,
    /// Two unit-variance Gaussians at `(1, 2)` and `(-2, -1)`.
    Bumps2d,
}

impl InitialCondition {
    pub const ALL: [InitialCondition; 4] = [
        InitialCondition::Gauss1d,
        InitialCondition::Bumps1d,
        InitialCondition::Bkw2d,
        InitialCondition::Bumps2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InitialCondition::Gauss1d => "gauss1d",
            InitialCondition::Bumps1d => "bumps1d",
            InitialCondition::Bkw2d => "bkw2d",
            InitialCondition::Bumps2d => "bumps2d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            InitialCondition::Gauss1d | InitialCondition::Bumps1d => 1,
            InitialCondition::Bkw2d | InitialCondition::Bumps2d => 2,
        }
    }

    /// Density at physical velocity `v` (only the first component is read
    /// in one dimension).
    pub fn density(self, v: [f64; 2]) -> f64 {
        let g1 = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        match self {
            InitialCondition::Gauss1d => g1(v[0]),
            InitialCondition::Bumps1d => 0.5 * (g1(v[0] - 4.0) + g1(v[0] + 2.0)),
            InitialCondition::Bkw2d => bkw_exact(0.0, v),
            InitialCondition::Bumps2d => {
                let g = |a: f64, b: f64| (-0.5 * ((v[0] - a).powi(2) + (v[1] - b).powi(2))).exp();
                (g(1.0, 2.0) + g(-2.0, -1.0)) / (4.0 * PI)
            }
        }
    }

    /// Exact moments on the whole space.
    pub fn exact_moments(self) -> MomentVector {
        match self {
            InitialCondition::Gauss1d => MomentVector::new(1.0, vec![0.0], 1.0),
            InitialCondition::Bumps1d => MomentVector::new(1.0, vec![1.0], 11.0),
            InitialCondition::Bkw2d => MomentVector::new(1.0, vec![0.0, 0.0], 2.0),
            InitialCondition::Bumps2d => MomentVector::new(1.0, vec![-0.5, 0.5], 7.0),
        }
    }

    /// Half-width of the velocity box used by the experiments.
    pub fn default_half_width(self) -> f64 {
        match self {
            InitialCondition::Gauss1d => 6.0,
            _ => 12.0,
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialCondition {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SpectralError::InvalidArgument(format!("unknown initial condition '{s}'")))
    }
}

/// Samples `condition` at the collocation nodes of `grid` and transforms.
pub fn initial_condition(condition: InitialCondition, grid: &VelocityGrid) -> Result<SpectralField> {
    if grid.dim() != condition.dim() {
        return Err(SpectralError::InvalidArgument(format!(
            "{condition} is {}-dimensional, grid is {}-dimensional",
            condition.dim(),
            grid.dim()
        )));
    }
    SpectralTransform::new(grid).sample(|v| condition.density(v))
}

/// Conservative projection of a named initial condition onto its exact
/// moments.
pub fn projected_initial_condition(
    condition: InitialCondition,
    grid: &VelocityGrid,
    op: &ConstraintOperator,
) -> Result<SpectralField> {
    let f = initial_condition(condition, grid)?;
    conservative_project(&f, &condition.exact_moments(), op)
}

/// Moments of a named initial condition as seen by `basis`.
pub fn initial_moments(condition: InitialCondition, basis: &MomentBasis) -> Result<MomentVector> {
    basis.moments(&initial_condition(condition, basis.grid())?)
}
