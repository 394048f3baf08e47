//! Subcommands behind the `cotton-flow` binary: `verify`, `flow`, `horava`
//! and `fixedpoints`. Each returns a [`Report`]; data files go to `--out`.

pub mod config;
pub mod csv;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::chart::samples::PeriodicPerturbation;
use crate::chart::{analyze, ChartError, Point};
use crate::flows::{evolve, fixed_point_residual, AlphaPolicy, FlowError, FlowSpec, Termination};
use crate::functionals::mixed_norm2;
use crate::homogeneous::{cotton_hom, HomMetric};
use crate::horava::{critical_alpha, emergent_constants, ir_coefficients, HoravaError, NewtonConstant};

use config::{Config, ConfigError, ExperimentConfig, FixedPointScan, HoravaScan, VerifyConfig};
use csv::fmt17;
pub use report::{Report, RNG_ALGORITHM};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid flow: {0}")]
    Flow(#[from] FlowError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Every error the front end can raise is a configuration or usage
    /// problem; suite failures are reported through [`CommandOutput::passed`].
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG_ERROR
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Flow,
    Horava,
    FixedPoints,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub report: Report,
    pub passed: bool,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_SUCCESS
        } else {
            EXIT_SUITE_FAILURE
        }
    }
}

fn read_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.to_path_buf(), source })?;
            Ok(config::parse(&text)?)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let n = jobs.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))
}

pub fn run(cmd: Command, opts: &Options) -> Result<CommandOutput, CliError> {
    let cfg = read_config(opts.config.as_deref())?;
    match cmd {
        Command::Verify => {
            let mut vc = VerifyConfig::from_config(&cfg)?;
            if let Some(s) = opts.seed {
                vc.seed = s;
            }
            let out = pool(opts.jobs)?.install(|| cmd_verify(&vc));
            if let Some(p) = &opts.out {
                write_file(p, &out.report.to_string())?;
            }
            Ok(out)
        }
        Command::Flow => {
            let mut exp = ExperimentConfig::from_config(&cfg)?;
            if let Some(p) = &opts.out {
                exp.output = Some(p.clone());
            }
            if let Some(s) = opts.seed {
                exp.seed = s;
            }
            let path = exp
                .output
                .clone()
                .ok_or_else(|| CliError::Usage("flow needs an output path ([output] path or --out)".into()))?;
            let (out, csv_text) = cmd_flow(&exp)?;
            write_file(&path, &csv_text)?;
            Ok(out)
        }
        Command::Horava => {
            let scan = HoravaScan::from_config(&cfg)?;
            let (out, table) = cmd_horava(&scan);
            if let Some(p) = &opts.out {
                write_file(p, &table)?;
            }
            Ok(out)
        }
        Command::FixedPoints => {
            let scan = FixedPointScan::from_config(&cfg)?;
            let (out, table) = pool(opts.jobs)?.install(|| cmd_fixedpoints(&scan));
            if let Some(p) = &opts.out {
                write_file(p, &table)?;
            }
            Ok(out)
        }
    }
}

// ---------------------------------------------------------------- verify

const SYMMETRY_TOL: f64 = 1e-6;
const TRACE_REL_TOL: f64 = 1e-8;
const DIVERGENCE_TOL: f64 = 1e-5;
/// Step at which the absolute tolerances apply; coarser steps get `(h/h_ref)⁴` slack.
const REFERENCE_STEP: f64 = 1.0 / 64.0;
const RATIO_RANGE: (f64, f64) = (12.0, 20.0);
/// Divergences below this are roundoff and carry no convergence information.
const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResiduals {
    pub h: f64,
    pub max_symmetry: f64,
    pub max_trace_rel: f64,
    pub max_divergence: f64,
    pub failures: usize,
}

fn sample_problems(seed: u64, count: usize, amplitude: f64) -> Vec<(PeriodicPerturbation, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pert = PeriodicPerturbation::random(&mut rng, amplitude);
            let p = [0; 3].map(|_: i32| rng.gen_range(0.0..std::f64::consts::TAU));
            (pert, p)
        })
        .collect()
}

fn step_residuals(problems: &[(PeriodicPerturbation, Point)], h: f64) -> Result<StepResiduals, ChartError> {
    let slack = (h / REFERENCE_STEP).max(1.0).powi(4);
    let per: Vec<(f64, f64, f64)> = problems
        .par_iter()
        .map(|(pert, p)| {
            let pc = analyze(&pert.chart(h), *p, true)?;
            let norm = pc.cotton_norm();
            let trace_rel = if norm > 0.0 { pc.trace() / norm } else { pc.trace() };
            Ok((pc.symmetry_residual(), trace_rel, pc.divergence_norm().unwrap_or(0.0)))
        })
        .collect::<Result<_, ChartError>>()?;
    let failures = per
        .iter()
        .filter(|(s, t, d)| *s > SYMMETRY_TOL * slack || *t > TRACE_REL_TOL || *d > DIVERGENCE_TOL * slack)
        .count();
    let max = |f: fn(&(f64, f64, f64)) -> f64| per.iter().map(f).fold(0.0, f64::max);
    Ok(StepResiduals {
        h,
        max_symmetry: max(|x| x.0),
        max_trace_rel: max(|x| x.1),
        max_divergence: max(|x| x.2),
        failures,
    })
}

/// Runs the Cotton structural checks on `count` seeded periodic charts per
/// step. Deterministic for a fixed seed regardless of the thread count.
pub fn cmd_verify(vc: &VerifyConfig) -> CommandOutput {
    let mut r = Report::new();
    r.push("RNG", RNG_ALGORITHM).push("SEED", vc.seed).push("COUNT", vc.count).push("AMPLITUDE", fmt17(vc.amplitude));
    let problems = sample_problems(vc.seed, vc.count, vc.amplitude);
    let mut steps = vc.steps.clone();
    steps.sort_by(|a, b| b.total_cmp(a));
    let mut passed = true;
    let mut results = Vec::new();
    for &h in &steps {
        match step_residuals(&problems, h) {
            Ok(s) => {
                r.push("STEP", fmt17(h))
                    .push("MAX_SYMMETRY", fmt17(s.max_symmetry))
                    .push("MAX_TRACE_REL", fmt17(s.max_trace_rel))
                    .push("MAX_DIVERGENCE", fmt17(s.max_divergence))
                    .push("FAILURES", s.failures);
                passed &= s.failures == 0;
                results.push(s);
            }
            Err(e) => {
                r.push("STEP", fmt17(h)).push("ERROR", e);
                passed = false;
            }
        }
    }
    for w in results.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let refine = a.h / b.h;
        r.push("REFINEMENT", format!("{} -> {}", fmt17(a.h), fmt17(b.h)));
        if a.max_divergence <= ROUNDOFF_FLOOR || b.max_divergence <= ROUNDOFF_FLOOR {
            r.push("DIVERGENCE_RATIO", "n/a (roundoff level)");
            continue;
        }
        let ratio = a.max_divergence / b.max_divergence;
        let order = ratio.ln() / refine.ln();
        // compare against the halving window after normalizing to refinement 2
        let halving_ratio = 2f64.powf(order);
        let ok = (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&halving_ratio);
        r.push("DIVERGENCE_RATIO", fmt17(ratio)).push("OBSERVED_ORDER", format!("{order:.4}")).push(
            "CONVERGENCE",
            if ok { "PASS" } else { "FAIL" },
        );
        passed &= ok;
    }
    r.push("STATUS", if passed { "PASS" } else { "FAIL" });
    CommandOutput { report: r, passed }
}

// ---------------------------------------------------------------- flow

fn format_triple(v: &[f64; 3]) -> String {
    v.map(fmt17).join(", ")
}

/// Integrates one trajectory; returns the summary and the CSV text.
pub fn cmd_flow(exp: &ExperimentConfig) -> Result<(CommandOutput, String), CliError> {
    let traj = evolve(&exp.metric, &exp.flow)?;
    let first = traj.records[0];
    let last = *traj.last();
    let min_df = traj.records.iter().skip(1).map(|x| x.df_step).fold(f64::INFINITY, f64::min);
    let final_metric = last.metric(&exp.metric);

    let mut r = Report::new();
    r.push("CLASS", exp.metric.class)
        .push("G_INITIAL", format_triple(&exp.metric.g))
        .push("ALPHA", config::format_alpha(&exp.flow.alpha))
        .push("ETAS", exp.flow.etas.iter().map(|e| fmt17(*e)).collect::<Vec<_>>().join(", "))
        .push("SEED", exp.seed)
        .push("RECORDS", traj.records.len())
        .push("REJECTED_STEPS", traj.rejected_steps)
        .push("T_FINAL", fmt17(last.t))
        .push("G_FINAL", format_triple(&last.g))
        .push("FINAL_ANISOTROPY", fmt17(final_metric.anisotropy()))
        .push("DELTA_F_TOTAL", fmt17(last.f_cs - first.f_cs))
        .push("MIN_DF_STEP", if min_df.is_finite() { fmt17(min_df) } else { "n/a".into() })
        .push("VOLUME_DRIFT", fmt17((last.volume - first.volume) / first.volume))
        .push("TERMINATION", traj.termination.reason());
    if let Termination::Degenerate(d) = &traj.termination {
        r.push("COLLAPSE_KIND", d.kind.name())
            .push("COLLAPSE_AXIS", d.collapsing_axis + 1)
            .push("LOG_RATES", format_triple(&d.log_rates));
    }
    let text = csv::trajectory_to_string(&traj.records, exp.stride);
    Ok((CommandOutput { report: r, passed: true }, text))
}

// ---------------------------------------------------------------- horava

pub const HORAVA_HEADER: &str = "alpha,c,G_N,Lambda,coef_R,coef_const,flag";

fn scan_alphas(scan: &HoravaScan, alpha_star: f64) -> Vec<f64> {
    let n = scan.steps;
    let mut alphas: Vec<f64> = match n {
        0 => Vec::new(),
        1 => vec![scan.alpha_min],
        _ => (0..n)
            .map(|i| scan.alpha_min + (scan.alpha_max - scan.alpha_min) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let inside = (scan.alpha_min..=scan.alpha_max).contains(&alpha_star);
    if n > 0 && inside && !alphas.contains(&alpha_star) {
        alphas.push(alpha_star);
        alphas.sort_by(f64::total_cmp);
    }
    alphas
}

/// Scans the gauge parameter; the critical row carries the flag `critical`.
pub fn cmd_horava(scan: &HoravaScan) -> (CommandOutput, String) {
    let b = &scan.base;
    let alpha_star = critical_alpha(b.mu, b.w2, b.lambda_w).expect("validated parameters");
    let alphas = scan_alphas(scan, alpha_star);
    let mut table = String::from(HORAVA_HEADER);
    table.push('\n');
    let (mut critical, mut complex) = (0, 0);
    let mut g_times_c = None;
    for &a in &alphas {
        let p = b.with_alpha(a);
        let ir = ir_coefficients(&p).expect("validated parameters");
        let lambda = p.shifted_lambda();
        let (c, gn, flag) = match emergent_constants(&p) {
            Ok(e) => {
                g_times_c = Some(e.g_times_c);
                let flag = if a == alpha_star {
                    critical += 1;
                    "critical"
                } else {
                    "ok"
                };
                let gn = match e.g_newton {
                    NewtonConstant::Finite(g) => fmt17(g),
                    NewtonConstant::Infinite => "INF".into(),
                };
                (fmt17(e.c), gn, flag)
            }
            Err(HoravaError::ComplexSpeed { .. }) => {
                complex += 1;
                ("NA".into(), "NA".into(), "complex_speed")
            }
            Err(e) => unreachable!("parameters validated up front: {e}"),
        };
        table.push_str(&format!(
            "{},{c},{gn},{},{},{},{flag}\n",
            fmt17(a),
            fmt17(lambda),
            fmt17(ir.coef_r),
            fmt17(ir.coef_const)
        ));
    }
    let mut r = Report::new();
    r.push("ROWS", alphas.len())
        .push("ALPHA_STAR", fmt17(alpha_star))
        .push("CRITICAL_ROWS", critical)
        .push("COMPLEX_ROWS", complex)
        .push("GN_TIMES_C", g_times_c.map_or("n/a".into(), fmt17));
    (CommandOutput { report: r, passed: true }, table)
}

// ---------------------------------------------------------------- fixed points

pub const FIXEDPOINT_HEADER: &str = "g1,g2,g3,residual,cotton_norm";

/// Geometric lattice `g_min … g_max` per axis, residual of the stationarity
/// condition `η₀ C + η₁ (C³)_traceless` at every node.
pub fn cmd_fixedpoints(scan: &FixedPointScan) -> (CommandOutput, String) {
    let n = scan.steps;
    let axis: Vec<f64> = (0..n)
        .map(|i| if n == 1 { scan.g_min } else { scan.g_min * (scan.g_max / scan.g_min).powf(i as f64 / (n - 1) as f64) })
        .collect();
    let nodes: Vec<[f64; 3]> = (0..n * n * n).map(|k| [axis[k / (n * n)], axis[(k / n) % n], axis[k % n]]).collect();
    let spec = FlowSpec::new(AlphaPolicy::Zero, vec![scan.eta0, scan.eta1]);
    let rows: Vec<([f64; 3], f64, f64)> = nodes
        .par_iter()
        .map(|g| {
            let m = HomMetric::new(scan.class, *g).expect("lattice is positive");
            let res = fixed_point_residual(&m, &spec).expect("two coefficients");
            (*g, res, mixed_norm2(&cotton_hom(&m)).abs().sqrt())
        })
        .collect();

    let mut table = String::from(FIXEDPOINT_HEADER);
    table.push('\n');
    for (g, res, cn) in &rows {
        table.push_str(&format!("{},{},{},{},{}\n", fmt17(g[0]), fmt17(g[1]), fmt17(g[2]), fmt17(*res), fmt17(*cn)));
    }
    let (min_g, min_res, _) = *rows.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("lattice is nonempty");
    let max_res = rows.iter().map(|x| x.1).fold(0.0, f64::max);
    let tol = scan.tolerance;
    let flat = rows.iter().filter(|x| x.2 <= tol).count();
    let candidates = rows.iter().filter(|x| x.1 <= tol && x.2 > tol).count();
    let isotropic = min_g.iter().all(|g| (g - min_g[0]).abs() <= 1e-12 * min_g[0]);

    let mut r = Report::new();
    r.push("CLASS", scan.class)
        .push("ETA0", fmt17(scan.eta0))
        .push("ETA1", fmt17(scan.eta1))
        .push("LATTICE_POINTS", rows.len())
        .push("MIN_RESIDUAL", fmt17(min_res))
        .push("MIN_AT", format_triple(&min_g))
        .push("MIN_IS_ISOTROPIC", isotropic)
        .push("MAX_RESIDUAL", fmt17(max_res))
        .push("COTTON_FLAT_POINTS", flat)
        .push("NONFLAT_CANDIDATES", candidates);
    (CommandOutput { report: r, passed: true }, table)
}
