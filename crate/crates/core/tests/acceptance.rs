//! Acceptance suite. Every test prints one `PASS`/`FAIL` line with the
//! measured quantities and then asserts the same condition. Run with
//! `cargo test --release -p conspec --test acceptance`.

mod common;

use std::io::Write;
use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use common::{kkt_projection, random_hermitian, rng};
use conspec::diagnostics::{bkw_field, bkw_residual, l2_distance, l2_error_against, l2_norm, DiagnosticsRow};
use conspec::dynamics::{initial_condition, InitialCondition, Solver, SolverConfig};
use conspec::{
    angular_kernel_quadrature, build_constraint_operator, collide_direct, collide_fast,
    conservative_project, maxwellian_field, precompute_kernel, MomentBasis, MomentVector,
    SchemeEvaluator, SchemeVariant, SpectralTransform, VelocityGrid,
};
use rand::Rng;

const B0: f64 = conspec::collision::DEFAULT_B0;

// criteria run one at a time so that their wall-clock budgets are meaningful
static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(id: u32, name: &str, pass: bool, started: Instant, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let secs = started.elapsed().as_secs_f64();
    // written to the raw handle so the line survives output capture
    let mut out = std::io::stdout().lock();
    writeln!(out, "\nacceptance {id} {verdict} {name} ({secs:.1} s): {detail}").unwrap();
    out.flush().unwrap();
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.1e}")).collect::<Vec<_>>().join(", ")
}

fn bkw_grid() -> VelocityGrid {
    VelocityGrid::with_default_points(2, 32, 12.0).unwrap()
}

/// Runs `scheme` on `condition` and collects the diagnostics rows.
fn run(condition: InitialCondition, scheme: SchemeVariant, grid: &VelocityGrid, t_final: f64, stride: usize) -> Vec<DiagnosticsRow> {
    let mut config = SolverConfig::new(scheme, grid.clone(), t_final);
    config.diagnostic_stride = stride;
    let solver = Solver::new(config).unwrap().with_target_moments(condition.exact_moments());
    let transform = SpectralTransform::new(grid);
    let with_exact = condition == InitialCondition::Bkw2d;
    let mut rows = Vec::new();
    solver
        .integrate(
            &initial_condition(condition, grid).unwrap(),
            |t| with_exact.then(|| bkw_field(t, &transform)),
            |r| rows.push(r.clone()),
        )
        .unwrap();
    rows
}

#[test]
fn criterion_1_projection_table() {
    let _serial = serial();
    let started = Instant::now();
    let cases = [
        (InitialCondition::Gauss1d, 6.0, [1.654e-9, 1.443e-13, 3.342e-16]),
        (InitialCondition::Bumps1d, 12.0, [8.402e-5, 1.545e-11, 6.007e-15]),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (cond, l, reported) in cases {
        for (n, rep) in [8, 16, 32].into_iter().zip(reported) {
            let g = VelocityGrid::with_default_points(1, n, l).unwrap();
            let b = MomentBasis::new(&g);
            let op = build_constraint_operator(&b).unwrap();
            let exact = cond.exact_moments();
            let f = conservative_project(&initial_condition(cond, &g).unwrap(), &exact, &op).unwrap();
            let moment_err = b.moments(&f).unwrap().abs_diff(&exact).into_iter().fold(0.0, f64::max);
            let l2 = l2_error_against(&f, |v| cond.density(v), 16).unwrap();
            let ok = moment_err <= 1e-14 && l2 <= 10.0 * rep;
            pass &= ok;
            detail.push(format!("{cond} N={n} moments {moment_err:.1e} L2 {l2:.3e} (10x {rep:.3e})"));
        }
    }
    pass &= started.elapsed().as_secs_f64() < 1.0;
    report(1, "projection table", pass, started, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_2_exact_conservation() {
    let _serial = serial();
    let started = Instant::now();
    // arbitrary targets
    let mut worst_target = 0.0f64;
    let mut r = rng(21);
    for trial in 0..200 {
        let dim = 1 + trial % 2;
        let g = VelocityGrid::with_default_points(dim, 8, r.gen_range(1.0..20.0)).unwrap();
        let b = MomentBasis::new(&g);
        let op = build_constraint_operator(&b).unwrap();
        let f = random_hermitian(&g, &mut r, 0.05);
        let momentum = (0..dim).map(|_| r.gen_range(-10.0..10.0)).collect();
        let target = MomentVector::new(r.gen_range(-10.0..10.0), momentum, r.gen_range(-50.0..50.0));
        let got = b.moments(&conservative_project(&f, &target, &op).unwrap()).unwrap();
        let own = b.moments(&f).unwrap().to_vec();
        let want = target.to_vec();
        let scale = want.iter().chain(&own).map(|x| x.abs()).fold(1.0, f64::max);
        for (a, w) in got.to_vec().iter().zip(&want) {
            worst_target = worst_target.max((a - w).abs() / scale);
        }
    }

    // MPFS right-hand side
    let g = bkw_grid();
    let ev = SchemeEvaluator::new(precompute_kernel(&g, 8, B0).unwrap(), true).unwrap();
    let mut worst_rhs = 0.0f64;
    let mut fields = vec![bkw_field(1.0, ev.transform()).unwrap()];
    fields.extend((0..3).map(|s| random_hermitian(&g, &mut rng(100 + s), 0.02)));
    for f in &fields {
        let q = ev.apply(f, SchemeVariant::Mpfs).unwrap();
        let scale = ev.basis().scaled_moments(f).unwrap().iter().map(|x| x.abs()).fold(1.0, f64::max);
        for m in ev.basis().scaled_moments(&q).unwrap() {
            worst_rhs = worst_rhs.max(m.abs() / scale);
        }
    }

    // 1000 RK4 steps
    let rows = run(InitialCondition::Bkw2d, SchemeVariant::Mpfs, &g, 10.0, 100);
    let m0 = [rows[0].mass, rows[0].momentum[0], rows[0].momentum[1], rows[0].energy];
    let mut drift = 0.0f64;
    for row in &rows {
        let m = [row.mass, row.momentum[0], row.momentum[1], row.energy];
        for (a, b) in m.iter().zip(m0) {
            drift = drift.max((a - b).abs() / b.abs().max(m0[0].abs()));
        }
    }
    let pass = worst_target <= 1e-13 && worst_rhs <= 1e-13 && drift <= 1e-12 && started.elapsed().as_secs_f64() < 120.0;
    let detail = format!("targets {worst_target:.1e}, MPFS rhs {worst_rhs:.1e}, 1000-step drift {drift:.1e}");
    report(2, "exact conservation", pass, started, &detail);
    assert!(pass);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let _serial = serial();
    let started = Instant::now();
    let g = VelocityGrid::with_default_points(2, 8, 6.0).unwrap();
    let k = precompute_kernel(&g, 8, B0).unwrap();
    let mut r = rng(3);
    let mut worst_q = 0.0f64;
    for _ in 0..20 {
        let f = random_hermitian(&g, &mut r, 0.05);
        let fast = collide_fast(&f, &k, true).unwrap();
        let direct = collide_direct(&f, &k).unwrap();
        worst_q = worst_q.max(l2_distance(&fast, &direct).unwrap() / l2_norm(&direct));
    }

    let g1 = VelocityGrid::with_default_points(1, 4, 3.0).unwrap();
    let op = build_constraint_operator(&MomentBasis::new(&g1)).unwrap();
    let mut worst_kkt = 0.0f64;
    for _ in 0..20 {
        let f = random_hermitian(&g1, &mut r, 0.1);
        let target = MomentVector::new(r.gen_range(0.5..1.5), vec![r.gen_range(-0.5..0.5)], r.gen_range(2.5..3.5));
        let fast = conservative_project(&f, &target, &op).unwrap();
        let brute = kkt_projection(&f, &target);
        let err = fast.coeffs().iter().zip(brute.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst_kkt = worst_kkt.max(err);
    }
    let pass = worst_q < 1e-11 && worst_kkt < 1e-10 && started.elapsed().as_secs_f64() < 60.0;
    report(3, "oracle equivalence", pass, started, &format!("fast vs direct {worst_q:.1e}, KKT {worst_kkt:.1e}"));
    assert!(pass);
}

/// Every doubling whose coarse error is above the round-off floor must
/// drop by three orders or reach the floor.
fn spectral_slope_ok(errors: &[f64]) -> bool {
    const FLOOR: f64 = 1e-13;
    errors.windows(2).all(|w| w[0] <= FLOOR || w[1] <= (1e-3 * w[0]).max(FLOOR))
}

#[test]
fn criterion_4_spectral_slopes() {
    let _serial = serial();
    let started = Instant::now();
    let gauss: Vec<f64> = [4, 8, 16]
        .into_iter()
        .map(|n| {
            let g = VelocityGrid::with_default_points(1, n, 6.0).unwrap();
            let f = initial_condition(InitialCondition::Gauss1d, &g).unwrap();
            l2_error_against(&f, |v| InitialCondition::Gauss1d.density(v), 16).unwrap()
        })
        .collect();

    let g = VelocityGrid::with_default_points(2, 4, 12.0).unwrap();
    let angular: Vec<f64> = [8, 16, 32]
        .into_iter()
        .map(|a| {
            let k = precompute_kernel(&g, a, B0).unwrap();
            let mut worst = 0.0f64;
            let mut peak = 0.0f64;
            for l in 0..g.num_modes() {
                for m in 0..g.num_modes() {
                    let reference = angular_kernel_quadrature(g.mode_at(l), g.mode_at(m), k.radius(), 512);
                    worst = worst.max((k.weight(l, m) - reference).abs());
                    peak = peak.max(reference.abs());
                }
            }
            worst / peak
        })
        .collect();
    let pass = spectral_slope_ok(&gauss) && spectral_slope_ok(&angular);
    let detail = format!("gaussian N=4,8,16 {}; angular A=8,16,32 {}", sci(&gauss), sci(&angular));
    report(4, "spectral slopes", pass, started, &detail);
    assert!(pass);
}

#[test]
fn criterion_5_equilibrium_annihilation() {
    let _serial = serial();
    let started = Instant::now();
    let g = bkw_grid();
    let ev = SchemeEvaluator::new(precompute_kernel(&g, 8, B0).unwrap(), true).unwrap();
    let target = MomentVector::new(1.0, vec![0.0, 0.0], 2.0);
    let maxwellian = maxwellian_field(&target, &g, ev.basis()).unwrap();
    let projected = conservative_project(&maxwellian, &target, ev.constraint()).unwrap();
    let mut exact_zero = true;
    for (variant, eq) in [(SchemeVariant::Epfs, &maxwellian), (SchemeVariant::Mepfs, &projected)] {
        let q = ev.apply_with_equilibrium(eq, variant, Some(eq)).unwrap();
        exact_zero &= q.coeffs().iter().all(|c| c.re == 0.0 && c.im == 0.0);
    }

    let norms: Vec<f64> = [8, 16, 32]
        .into_iter()
        .map(|n| {
            let g = VelocityGrid::with_default_points(2, n, 12.0).unwrap();
            let k = precompute_kernel(&g, 8, B0).unwrap();
            let m = maxwellian_field(&target, &g, &MomentBasis::new(&g)).unwrap();
            l2_norm(&collide_fast(&m, &k, true).unwrap())
        })
        .collect();
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    let pass = exact_zero && decreasing;
    let detail = format!("EPFS/MEPFS bitwise zero: {exact_zero}; FS |Q(M)| at N=8,16,32 {}", sci(&norms));
    report(5, "equilibrium annihilation", pass, started, &detail);
    assert!(pass);
}

#[test]
fn criterion_6_relaxation_to_equilibrium() {
    let _serial = serial();
    let started = Instant::now();
    let g = bkw_grid();
    let finals: Vec<(SchemeVariant, f64, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = SchemeVariant::ALL
            .into_iter()
            .map(|scheme| {
                let g = &g;
                s.spawn(move || {
                    let rows = run(InitialCondition::Bkw2d, scheme, g, 50.0, 500);
                    (scheme, rows[0].l2_to_maxwellian, rows.last().unwrap().l2_to_maxwellian)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let at = |v: SchemeVariant| finals.iter().find(|f| f.0 == v).unwrap().2;
    let four_orders = finals.iter().all(|&(_, first, last)| last <= 1e-4 * first);
    let fs = at(SchemeVariant::Fs);
    let mpfs = at(SchemeVariant::Mpfs);
    let mepfs = at(SchemeVariant::Mepfs);
    let fs_band = (1e-10..=1e-8).contains(&fs);
    let mpfs_below = mpfs <= fs * 10f64.powf(-1.5);
    let mepfs_le = mepfs <= mpfs;
    let in_time = started.elapsed().as_secs_f64() < 600.0;
    let pass = four_orders && fs_band && mpfs_below && mepfs_le && in_time;
    let values: Vec<String> = finals.iter().map(|(v, a, b)| format!("{v} {a:.2e}->{b:.6e}")).collect();
    let detail = format!(
        "{}; (a) {four_orders} (b) {fs_band} (c) {mpfs_below} (d) {mepfs_le}",
        values.join(", ")
    );
    report(6, "relaxation to equilibrium", pass, started, &detail);
    assert!(pass);
}

/// Least-squares slope and coefficient of determination of `y` on `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 0.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[test]
fn criterion_7_temperature_drift() {
    let _serial = serial();
    let started = Instant::now();
    let g = bkw_grid();
    let runs: Vec<(SchemeVariant, Vec<DiagnosticsRow>)> = std::thread::scope(|s| {
        let handles: Vec<_> = SchemeVariant::ALL
            .into_iter()
            .map(|scheme| {
                let g = &g;
                s.spawn(move || (scheme, run(InitialCondition::Bumps2d, scheme, g, 10.0, 100)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let rows = |v: SchemeVariant| &runs.iter().find(|r| r.0 == v).unwrap().1;
    let fs = rows(SchemeVariant::Fs);
    let (t, e): (Vec<f64>, Vec<f64>) =
        fs.iter().filter(|r| r.time >= 1.0 - 1e-9).map(|r| (r.time, r.temperature_error)).unzip();
    let (slope, r2) = linear_fit(&t, &e);
    let fs_linear = slope > 0.0 && r2 > 0.9;
    let fs_final = fs.last().unwrap().temperature_error;
    let epfs_final = rows(SchemeVariant::Epfs).last().unwrap().temperature_error;
    let epfs_better = epfs_final <= 0.1 * fs_final;
    let max_err = |v| rows(v).iter().map(|r| r.temperature_error).fold(0.0, f64::max);
    let mpfs_max = max_err(SchemeVariant::Mpfs);
    let mepfs_max = max_err(SchemeVariant::Mepfs);
    let conservative_ok = mpfs_max <= 1e-11 && mepfs_max <= 1e-11;
    let pass = fs_linear && epfs_better && conservative_ok && started.elapsed().as_secs_f64() < 600.0;
    let detail = format!(
        "FS slope {slope:.2e} R2 {r2:.3} final {fs_final:.2e}; EPFS final {epfs_final:.2e}; \
         MPFS max {mpfs_max:.1e}; MEPFS max {mepfs_max:.1e}; linear {fs_linear} EPFS better {epfs_better} \
         conservative {conservative_ok}"
    );
    report(7, "temperature drift", pass, started, &detail);
    assert!(pass);
}

// Converged reference with N=64 per axis (same A, dt, b0): residual at t=1
// 4.29e-8; L2 distance to the projected BKW solution 2.23e-8, 6.58e-8,
// 2.155e-7 at t=1,2,4. N=32 gives 4.30e-8 and 2.42e-8, 6.62e-8, 2.155e-7,
// so the remaining error is temporal and angular, not spatial.
#[test]
fn criterion_8_bkw_exactness() {
    let _serial = serial();
    let started = Instant::now();
    let g = bkw_grid();
    let ev = SchemeEvaluator::new(precompute_kernel(&g, 8, B0).unwrap(), true).unwrap();
    let residual = bkw_residual(&ev, 1.0, 1e-3).unwrap();
    let rows = run(InitialCondition::Bkw2d, SchemeVariant::Fs, &g, 4.0, 100);
    let tracked: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| [1.0, 2.0, 4.0].iter().any(|t| (r.time - t).abs() < 1e-9))
        .map(|r| (r.time, r.l2_to_exact.unwrap()))
        .collect();
    let worst = tracked.iter().map(|p| p.1).fold(0.0, f64::max);
    let pass = residual < 1e-4 && tracked.len() == 3 && worst < 1e-5;
    let at: Vec<String> = tracked.iter().map(|(t, e)| format!("t={t} {e:.3e}")).collect();
    let detail = format!("residual {residual:.2e}; tracking {}", at.join(", "));
    report(8, "BKW exactness", pass, started, &detail);
    assert!(pass);
}
