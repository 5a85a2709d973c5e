//! Experiment harness: Test 1 (projection accuracy), Test 2 (trend to
//! equilibrium on BKW data) and Test 3 (temperature conservation on two
//! bumps), written as CSV with the run manifest in `#` header lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use conspec::diagnostics::{bkw_field, l2_error_against, DiagnosticsRow};
use conspec::dynamics::{initial_condition, InitialCondition, Solver, SolverConfig};
use conspec::{
    build_constraint_operator, conservative_project, MomentBasis, SchemeVariant, SpectralError,
    SpectralTransform, VelocityGrid,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Oversampling of the quadrature behind the Test 1 `L²` error.
const L2_OVERSAMPLE: usize = 16;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numerical(#[from] SpectralError),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    /// 0 success, 1 numerical failure, 2 usage error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io { .. } => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "conspec", version, about = "Conservative spectral Boltzmann experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plain and conservative projection errors of a 1D density.
    Test1(RunArgs),
    /// Relaxation of the BKW solution towards equilibrium.
    Test2(RunArgs),
    /// Temperature drift for the two-bumps initial datum.
    Test3(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Test1(_) => "test1",
            Command::Test2(_) => "test2",
            Command::Test3(_) => "test3",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Test1(a) | Command::Test2(a) | Command::Test3(a) => a,
        }
    }
}

/// Flags shared by all experiments. Each one overrides the config file.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Flat `key=value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Test 1 density: gauss1d or bumps1d.
    #[arg(long)]
    pub function: Option<String>,
    /// Test 1 mode counts, comma separated.
    #[arg(long = "n-list")]
    pub n_list: Option<String>,
    /// fs, mpfs, epfs, mepfs or all.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Modes per axis.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tfinal: Option<f64>,
    /// Angular discretization of the collision kernel.
    #[arg(long)]
    pub angles: Option<usize>,
    #[arg(long)]
    pub b0: Option<f64>,
    /// Zero-padded (on) or cyclic (off) convolutions.
    #[arg(long)]
    pub pad: Option<String>,
    /// Time steps between output rows.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Half-width L of the velocity box.
    #[arg(long = "half-width")]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; with `--scheme all` the scheme name is appended to the
    /// file stem. Defaults to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

const KEYS: [&str; 13] = [
    "function", "n_list", "scheme", "n", "dt", "tfinal", "angles", "b0", "pad", "stride",
    "half_width", "seed", "output",
];

/// Reads `key=value` lines; `#` starts a comment. Unknown keys are errors.
pub fn parse_config_str(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage(format!("unknown config key '{key}'")));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

/// Everything that determines an experiment's output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub experiment: String,
    pub function: InitialCondition,
    pub n_list: Vec<usize>,
    pub schemes: Vec<SchemeVariant>,
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub angles: usize,
    pub b0: f64,
    pub pad: bool,
    pub stride: usize,
    pub half_width: f64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub version: String,
}

impl RunManifest {
    /// Defaults of `experiment` with no config and no flags.
    pub fn defaults(experiment: &str) -> Result<Self, CliError> {
        let (function, t_final) = match experiment {
            "test1" => (InitialCondition::Gauss1d, 0.0),
            "test2" => (InitialCondition::Bkw2d, 50.0),
            "test3" => (InitialCondition::Bumps2d, 10.0),
            other => return Err(usage(format!("unknown experiment '{other}'"))),
        };
        Ok(Self {
            experiment: experiment.to_string(),
            function,
            n_list: vec![8, 16, 32],
            schemes: vec![SchemeVariant::Fs],
            n: 32,
            dt: 0.01,
            t_final,
            angles: conspec::collision::DEFAULT_ANGLES,
            b0: conspec::collision::DEFAULT_B0,
            pad: true,
            stride: 100,
            half_width: function.default_half_width(),
            seed: 0,
            output: None,
            version: VERSION.to_string(),
        })
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
            value.parse().map_err(|_| usage(format!("invalid value '{value}' for {key}")))
        }
        match key {
            "function" => {
                let f: InitialCondition = value.parse().map_err(|_| {
                    usage(format!("invalid value '{value}' for function"))
                })?;
                if self.experiment == "test1" && f.dim() != 1 {
                    return Err(usage(format!("test1 needs a 1D function, got {f}")));
                }
                if self.experiment != "test1" {
                    return Err(usage(format!("{} does not take a function", self.experiment)));
                }
                self.function = f;
                self.half_width = f.default_half_width();
            }
            "n_list" => {
                self.n_list = value
                    .split(',')
                    .map(|s| num::<usize>(key, s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "scheme" => {
                self.schemes = if value == "all" {
                    SchemeVariant::ALL.to_vec()
                } else {
                    vec![value.parse().map_err(|_| usage(format!("invalid value '{value}' for scheme")))?]
                };
            }
            "n" => self.n = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "tfinal" => self.t_final = num(key, value)?,
            "angles" => self.angles = num(key, value)?,
            "b0" => self.b0 = num(key, value)?,
            "pad" => {
                self.pad = match value {
                    "on" | "true" | "1" => true,
                    "off" | "false" | "0" => false,
                    _ => return Err(usage(format!("invalid value '{value}' for pad"))),
                }
            }
            "stride" => self.stride = num(key, value)?,
            "half_width" => self.half_width = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(usage(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(usage(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(usage(format!("tfinal must be non-negative, got {}", self.t_final)));
        }
        if !(self.b0.is_finite() && self.b0 > 0.0) {
            return Err(usage(format!("b0 must be positive, got {}", self.b0)));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(usage(format!("half_width must be positive, got {}", self.half_width)));
        }
        if self.n == 0 || self.n_list.is_empty() || self.n_list.contains(&0) {
            return Err(usage("mode counts must be positive"));
        }
        if self.angles == 0 || self.stride == 0 {
            return Err(usage("angles and stride must be positive"));
        }
        Ok(())
    }

    /// Builds the manifest: defaults, then the config file, then flags.
    pub fn resolve(experiment: &str, args: &RunArgs) -> Result<Self, CliError> {
        let mut m = Self::defaults(experiment)?;
        let mut pairs = match &args.config {
            Some(path) => parse_config_str(&fs::read_to_string(path).map_err(|source| {
                CliError::Io { path: path.display().to_string(), source }
            })?)?,
            None => BTreeMap::new(),
        };
        let flags: [(&str, Option<String>); 13] = [
            ("function", args.function.clone()),
            ("n_list", args.n_list.clone()),
            ("scheme", args.scheme.clone()),
            ("n", args.n.map(|v| v.to_string())),
            ("dt", args.dt.map(|v| v.to_string())),
            ("tfinal", args.tfinal.map(|v| v.to_string())),
            ("angles", args.angles.map(|v| v.to_string())),
            ("b0", args.b0.map(|v| v.to_string())),
            ("pad", args.pad.clone()),
            ("stride", args.stride.map(|v| v.to_string())),
            ("half_width", args.half_width.map(|v| v.to_string())),
            ("seed", args.seed.map(|v| v.to_string())),
            ("output", args.output.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.insert(key.to_string(), v);
            }
        }
        // the function sets the default half-width, so it goes first
        if let Some(f) = pairs.remove("function") {
            m.set("function", &f)?;
        }
        for (k, v) in &pairs {
            m.set(k, v)?;
        }
        m.validate()?;
        Ok(m)
    }

    /// `# key=value` lines; the file starts with these.
    pub fn header(&self, scheme: Option<SchemeVariant>) -> String {
        let schemes = match scheme {
            Some(s) => s.to_string(),
            None => self.schemes.iter().map(|s| s.name()).collect::<Vec<_>>().join(","),
        };
        let n_list = self.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let mut h = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(h, "# {k}={v}");
        };
        line("conspec", self.version.clone());
        line("experiment", self.experiment.clone());
        line("function", self.function.to_string());
        if self.experiment == "test1" {
            line("n_list", n_list);
        } else {
            line("scheme", schemes);
            line("n", self.n.to_string());
            line("dt", format!("{:?}", self.dt));
            line("tfinal", format!("{:?}", self.t_final));
            line("angles", self.angles.to_string());
            line("b0", format!("{:?}", self.b0));
            line("pad", if self.pad { "on" } else { "off" }.to_string());
            line("stride", self.stride.to_string());
        }
        line("half_width", format!("{:?}", self.half_width));
        line("seed", self.seed.to_string());
        line(
            "output",
            self.output.as_ref().map_or("-".to_string(), |p| p.display().to_string()),
        );
        h.push_str("# l2 columns: unnormalized L2 norm on [-L,L]^d in physical velocity\n");
        h
    }

    fn solver_config(&self, scheme: SchemeVariant) -> Result<SolverConfig, CliError> {
        let grid = VelocityGrid::with_default_points(2, self.n, self.half_width)?;
        let mut c = SolverConfig::new(scheme, grid, self.t_final);
        c.dt = self.dt;
        c.angles = self.angles;
        c.b0 = self.b0;
        c.pad = self.pad;
        c.diagnostic_stride = self.stride;
        Ok(c)
    }
}

/// Formats with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// One Test 1 row.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionErrors {
    pub projection: &'static str,
    pub n: usize,
    pub err_mass: f64,
    pub err_momentum: f64,
    pub err_energy: f64,
    pub err_l2: f64,
}

/// Plain and conservative projection errors of a 1D density against its
/// exact moments and, in continuous `L²`, against the density itself.
pub fn projection_errors(
    function: InitialCondition,
    n: usize,
    half_width: f64,
) -> Result<[ProjectionErrors; 2], SpectralError> {
    let grid = VelocityGrid::with_default_points(function.dim(), n, half_width)?;
    let basis = MomentBasis::new(&grid);
    let op = build_constraint_operator(&basis)?;
    let exact = function.exact_moments();
    let plain = initial_condition(function, &grid)?;
    let cons = conservative_project(&plain, &exact, &op)?;
    let row = |projection, f| -> Result<ProjectionErrors, SpectralError> {
        let m = basis.moments(f)?;
        let d = m.abs_diff(&exact);
        Ok(ProjectionErrors {
            projection,
            n,
            err_mass: d[0],
            err_momentum: d[1..d.len() - 1].iter().cloned().fold(0.0, f64::max),
            err_energy: d[d.len() - 1],
            err_l2: l2_error_against(f, |v| function.density(v), L2_OVERSAMPLE)?,
        })
    };
    Ok([row("plain", &plain)?, row("conservative", &cons)?])
}

const SERIES_COLUMNS: &str = "time,mass,momentum_1,momentum_2,energy,temperature,temperature_error,l2_to_maxwellian,l2_to_exact,moment_loss_of_q";

fn series_line(r: &DiagnosticsRow) -> String {
    let mut cols = vec![fmt_real(r.time), fmt_real(r.mass)];
    cols.extend(r.momentum.iter().map(|&p| fmt_real(p)));
    cols.extend([r.energy, r.temperature, r.temperature_error, r.l2_to_maxwellian].map(fmt_real));
    cols.push(r.l2_to_exact.map_or(String::new(), fmt_real));
    cols.push(fmt_real(r.moment_loss_of_q));
    cols.join(",")
}

fn output_for(base: &Option<PathBuf>, scheme: SchemeVariant, many: bool) -> Option<PathBuf> {
    let base = base.as_ref()?;
    if !many {
        return Some(base.clone());
    }
    let stem = base.file_stem().map_or("out".into(), |s| s.to_string_lossy().into_owned());
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{scheme}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{scheme}"),
    };
    Some(base.with_file_name(name))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

/// Test 1 CSV: one plain and one conservative row per `N`.
pub fn test1_csv(m: &RunManifest) -> Result<String, CliError> {
    let mut out = m.header(None);
    out.push_str("projection,N,err_mass,err_momentum,err_energy,err_l2\n");
    for &n in &m.n_list {
        for r in projection_errors(m.function, n, m.half_width)? {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.projection,
                r.n,
                fmt_real(r.err_mass),
                fmt_real(r.err_momentum),
                fmt_real(r.err_energy),
                fmt_real(r.err_l2)
            );
        }
    }
    Ok(out)
}

/// Time-series CSV of one scheme for Test 2 or Test 3.
pub fn series_csv(m: &RunManifest, scheme: SchemeVariant) -> Result<String, CliError> {
    let config = m.solver_config(scheme)?;
    let grid = config.grid.clone();
    let solver = Solver::new(config)?.with_target_moments(m.function.exact_moments());
    let initial = initial_condition(m.function, &grid)?;
    let transform = SpectralTransform::new(&grid);
    let with_exact = m.function == InitialCondition::Bkw2d;
    let mut out = m.header(Some(scheme));
    out.push_str(SERIES_COLUMNS);
    out.push('\n');
    solver.integrate(
        &initial,
        |t| with_exact.then(|| bkw_field(t, &transform)),
        |r| {
            out.push_str(&series_line(r));
            out.push('\n');
        },
    )?;
    Ok(out)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let m = RunManifest::resolve(name, cli.command.args())?;
    if name == "test1" {
        return write_text(m.output.as_deref(), &test1_csv(&m)?);
    }
    let many = m.schemes.len() > 1;
    let manifest = &m;
    let results: Vec<Result<String, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = manifest
            .schemes
            .iter()
            .map(|&scheme| s.spawn(move || series_csv(manifest, scheme)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    for (&scheme, text) in m.schemes.iter().zip(results) {
        write_text(output_for(&m.output, scheme, many).as_deref(), &text?)?;
    }
    Ok(())
}
