//! Command dispatch and artifacts: one CSV per result table and a JSON
//! manifest with the resolved config, kernel checks, every tolerance used,
//! results, assertions and the outcome.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::control::{solve_control, ControlReport, CostSpec};
use crate::error::{Error, Result};
use crate::form::energy;
use crate::kernel::{Kernel, KernelFamily};
use crate::local::{residual_tol, solve_local, LocalGrid};
use crate::optim::{C1, FLAT_TOL};
use crate::state::{
    default_initial_guess, solve_state_from, Control, Optimizer, SolveReport, MAX_ITERS_PER_NODE, MIN_MAX_ITERS,
    NEWTON_FLOOR_ABSOLUTE, NEWTON_FLOOR_RELATIVE,
};
use crate::sweep::{
    run_delta_sweep_control, run_delta_sweep_state, run_gconv_experiment, Assertion, ConvergenceRecord, Instance,
    OSCILLATION_KEPT, STRONG_DECREASE, SWEEP_DECREASE,
};

/// Version string in `git describe` form, fixed at build time.
pub const VERSION: &str = env!("NLCTL_VERSION");

/// Exit codes of a run.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ASSERTION_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const NOT_CONVERGED: i32 = 3;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    AssertionFailure,
    ConfigError,
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => exit::PASS,
            Status::AssertionFailure => exit::ASSERTION_FAILURE,
            Status::ConfigError => exit::CONFIG_ERROR,
            Status::NotConverged => exit::NOT_CONVERGED,
        }
    }

    /// Classification of an error that ended a run.
    pub fn of_error(e: &Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::NotPositiveDefinite { .. } | Error::OffManifold { .. } => {
                Status::NotConverged
            }
            _ => Status::ConfigError,
        }
    }
}

/// Independent check of a kernel's normalization on one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct KernelCheck {
    pub delta: f64,
    pub dx: f64,
    pub kernel: Kernel,
    pub exponent: f64,
    /// `(1/C_N) int k` by a substitution quadrature independent of the assembly.
    pub continuous_mass: f64,
    pub continuous_mass_error: f64,
    /// Kernel mass seen by the pair weights (1 when moment matched).
    pub discrete_mass: f64,
    /// Factor applied to the punched weights.
    pub calibration: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub wall_time_seconds: f64,
    pub config: Option<RunConfig>,
    pub kernel_checks: Vec<KernelCheck>,
    pub tolerances: BTreeMap<String, f64>,
    pub regularization_floor: Option<f64>,
    pub results: BTreeMap<String, Value>,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
}

impl Manifest {
    /// Manifest of a run rejected before it started.
    pub fn config_error(command: &str, seed: u64, error: &Error) -> Self {
        Manifest {
            version: VERSION.to_string(),
            command: command.to_string(),
            seed,
            status: Status::ConfigError,
            exit_code: exit::CONFIG_ERROR,
            wall_time_seconds: 0.0,
            config: None,
            kernel_checks: Vec::new(),
            tolerances: BTreeMap::new(),
            regularization_floor: None,
            results: BTreeMap::new(),
            assertions: Vec::new(),
            artifacts: Vec::new(),
            error: Some(error.to_string()),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Accumulates artifacts and results while a command runs.
struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<String>,
    results: BTreeMap<String, Value>,
    assertions: Vec<Assertion>,
    tolerances: BTreeMap<String, f64>,
    kernel_checks: Vec<KernelCheck>,
    reg_floor: Option<f64>,
    converged: bool,
}

impl Artifacts<'_> {
    fn table(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(f64::to_string))?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn record(&mut self, name: &str, rec: &ConvergenceRecord) -> Result<()> {
        rec.write_csv(&self.dir.join(name))?;
        self.files.push(name.to_string());
        self.results.insert("experiment".into(), json!(rec.experiment));
        self.results.insert("rows".into(), json!(rec.rows.len()));
        self.results.insert("columns".into(), json!(rec.columns));
        for (k, v) in &rec.scalars {
            self.results.insert(k.clone(), json!(v));
        }
        self.assertions.extend(rec.assertions.iter().cloned());
        Ok(())
    }

    fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), json!(value));
    }

    fn tol(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.to_string(), value);
    }

    fn assert(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.to_string(), passed, detail });
    }

    fn kernel(&mut self, inst: &Instance) {
        self.kernel_checks.push(kernel_check(inst));
    }
}

/// `(1/C_N) 2 int_0^delta k(r) dr` with `r = delta t^q` chosen to make the
/// fractional integrand constant, midpoint rule in `t`.
pub fn continuous_kernel_mass(kernel: &Kernel) -> f64 {
    let q = match kernel.family {
        KernelFamily::FractionalTruncated => 1.0 / (1.0 - kernel.exponent()),
        KernelFamily::Constant => 1.0,
    };
    let n = 4096;
    let dt = 1.0 / n as f64;
    let integral: f64 = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) * dt;
            kernel.value(kernel.delta * t.powf(q)) * kernel.delta * q * t.powf(q - 1.0) * dt
        })
        .sum();
    2.0 * integral / kernel.c_n
}

fn kernel_check(inst: &Instance) -> KernelCheck {
    let mass = continuous_kernel_mass(&inst.kernel);
    KernelCheck {
        delta: inst.kernel.delta,
        dx: inst.grid.dx(),
        kernel: inst.kernel.clone(),
        exponent: inst.kernel.exponent(),
        continuous_mass: mass,
        continuous_mass_error: (mass - 1.0).abs(),
        discrete_mass: inst.kernel_mass(),
        calibration: inst.table.calibration(),
    }
}

/// Run a validated config, writing artifacts to `out_dir`. Errors are folded
/// into the manifest; only failure to write it is returned.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Manifest> {
    fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let mut art = Artifacts {
        dir: out_dir,
        files: Vec::new(),
        results: BTreeMap::new(),
        assertions: Vec::new(),
        tolerances: BTreeMap::new(),
        kernel_checks: Vec::new(),
        reg_floor: None,
        converged: true,
    };
    line_search_tolerances(&mut art);
    let outcome = match config.command() {
        Command::SolveState => solve_state_cmd(config, &mut art),
        Command::SolveLocal => solve_local_cmd(config, &mut art),
        Command::SolveControl => solve_control_cmd(config, &mut art),
        Command::SweepState => sweep_state_cmd(config, &mut art),
        Command::SweepControl => sweep_control_cmd(config, &mut art),
        Command::Gconv => gconv_cmd(config, &mut art),
    };
    let (status, error) = match outcome {
        Err(e) => {
            if matches!(e, Error::NotConverged { .. }) {
                art.result("converged", false);
            }
            (Status::of_error(&e), Some(e.to_string()))
        }
        Ok(()) if !art.converged => (Status::NotConverged, None),
        Ok(()) if art.assertions.iter().any(|a| !a.passed) => (Status::AssertionFailure, None),
        Ok(()) => (Status::Pass, None),
    };
    let manifest = Manifest {
        version: VERSION.to_string(),
        command: config.command().to_string(),
        seed: config.seed,
        status,
        exit_code: status.exit_code(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config: Some(config.clone()),
        kernel_checks: art.kernel_checks,
        tolerances: art.tolerances,
        regularization_floor: art.reg_floor,
        results: art.results,
        assertions: art.assertions,
        artifacts: art.files,
        error,
    };
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn line_search_tolerances(art: &mut Artifacts<'_>) {
    art.tol("line_search_armijo_c1", C1);
    art.tol("line_search_flat_relative", FLAT_TOL);
    art.tol("line_search_wolfe_c2_lbfgs", 0.9);
    art.tol("line_search_wolfe_c2_ncg", 0.1);
}

fn single_instance(config: &RunConfig) -> Result<Instance> {
    let (delta, dx) = config.delta_dx().ok_or_else(|| Error::Config("domain.delta: required".into()))?;
    config.sweep_problem().instance(delta, dx)
}

/// `interior` is the node count of a single-horizon run; sweeps report the rule.
fn state_tolerances(config: &RunConfig, art: &mut Artifacts<'_>, interior: Option<usize>) {
    let cfg = config.solver_config();
    art.tol("state_grad_tol", cfg.grad_tol);
    match (cfg.max_iters, interior) {
        (Some(m), _) => art.tol("state_max_iters", m as f64),
        (None, Some(n)) => art.tol("state_max_iters", (MAX_ITERS_PER_NODE * n).max(MIN_MAX_ITERS) as f64),
        (None, None) => {
            art.tol("state_max_iters_per_node", MAX_ITERS_PER_NODE as f64);
            art.tol("state_max_iters_minimum", MIN_MAX_ITERS as f64);
        }
    }
    if cfg.optimizer == Optimizer::Newton {
        art.tol("newton_floor_relative", NEWTON_FLOOR_RELATIVE);
        art.tol("newton_floor_absolute", NEWTON_FLOOR_ABSOLUTE);
    }
    if let Some(tol) = config.solver.as_ref().and_then(|s| s.uniqueness_tol) {
        art.tol("uniqueness_tol", tol);
    }
}

fn configured_starts(config: &RunConfig) -> (usize, f64) {
    match (&config.solver, &config.control) {
        (_, Some(c)) => (c.starts, c.uniqueness_tol.unwrap_or(1e-6)),
        (Some(s), None) => (s.starts, s.uniqueness_tol.unwrap_or(1e-6)),
        (None, None) => (1, 1e-6),
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn report_state(art: &mut Artifacts<'_>, r: &SolveReport) {
    art.result("energy", r.energy_value);
    art.result("variational_residual", r.variational_residual);
    art.result("iterations", r.iterations);
    art.result("converged", r.converged);
}

fn solve_state_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    let inst = single_instance(config)?;
    art.kernel(&inst);
    let grid = &inst.grid;
    let cfg = config.solver_config();
    state_tolerances(config, art, Some(grid.interior_count()));
    let g_profile = &config.source.as_ref().expect("validated").g;
    let g = Control::from_fn(grid, |x| g_profile.eval(x));
    let r = solve_state_from(&g, &inst.u0, &inst.table, grid, &cfg, None)?;
    report_state(art, &r);
    art.result("bh_energy", config.p * energy(&inst.table, &r.state.values, config.p));
    art.converged &= r.converged;
    art.assert(
        "variational residual within tolerance",
        r.converged,
        format!("residual {:e}, tol {:e}", r.variational_residual, cfg.grad_tol),
    );

    let (starts, tol) = configured_starts(config);
    if starts > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let base = default_initial_guess(grid, &inst.u0);
        let mut spread = 0.0f64;
        for _ in 1..starts {
            let x0: Vec<f64> = base.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
            let other = solve_state_from(&g, &inst.u0, &inst.table, grid, &cfg, Some(&x0))?;
            art.converged &= other.converged;
            spread = spread.max(max_diff(&other.state.values, &r.state.values));
        }
        art.result("multi_start_spread", spread);
        art.assert(
            "multi-start solutions agree",
            spread <= tol,
            format!("{starts} starts, spread {spread:e}, tol {tol:e}"),
        );
    }

    let mask = grid.interior_mask();
    let rows =
        grid.nodes().iter().zip(&r.state.values).zip(mask).map(|((x, u), m)| vec![*x, *u, f64::from(u8::from(*m))]);
    art.table("state.csv", &["x", "u", "mask"], rows)
}

fn solve_local_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    let c = config.coefficient();
    let (a, b) = (config.domain.a, config.domain.b);
    let dx = config.domain.dx.expect("validated spacing");
    let lg = LocalGrid::new(a, b, dx, (c.u0.eval(a), c.u0.eval(b)))?;
    let h = c.h.sample(lg.nodes());
    let g = config.source.as_ref().expect("validated").g.sample(lg.interior_nodes());
    art.tol("local_residual_tol", residual_tol(config.p));
    let r = solve_local(&g, &h, &lg, config.p)?;
    art.result("bh_local", r.bh_local);
    art.result("energy", r.energy);
    art.result("residual", r.residual);
    art.result("converged", r.converged);
    art.converged &= r.converged;
    art.assert(
        "Euler-Lagrange residual within tolerance",
        r.converged,
        format!("residual {:e}, tol {:e}", r.residual, residual_tol(config.p)),
    );
    let rows = lg.nodes().iter().zip(&r.u).map(|(x, u)| vec![*x, *u]);
    art.table("local.csv", &["x", "u"], rows)
}

fn control_tolerances(config: &RunConfig, art: &mut Artifacts<'_>) {
    let cfg = config.control_config();
    art.tol("control_grad_tol", cfg.tol);
    art.tol("control_max_iters", cfg.max_iters as f64);
    art.tol("lbfgs_memory", cfg.memory as f64);
    if config.p != 2.0 {
        art.tol("inner_state_grad_tol", cfg.state.grad_tol);
        if let Some(m) = cfg.state.max_iters {
            art.tol("inner_state_max_iters", m as f64);
        }
        art.tol("newton_floor_relative", NEWTON_FLOOR_RELATIVE);
        art.tol("newton_floor_absolute", NEWTON_FLOOR_ABSOLUTE);
        art.reg_floor = Some(cfg.reg_floor);
    }
}

fn report_control(art: &mut Artifacts<'_>, r: &ControlReport) {
    art.result("cost", r.cost);
    art.result("reduced_grad_norm", r.reduced_grad_norm);
    art.result("iterations", r.iterations);
    art.result("converged", r.converged);
    art.result("state_residual", r.state_residual);
}

fn solve_control_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    let inst = single_instance(config)?;
    art.kernel(&inst);
    let (delta, dx) = config.delta_dx().expect("validated");
    let problem = config.control_problem().expect("validated");
    let h0 = config.sweep_problem().gamma_instance(delta, dx, &problem.h0)?;
    let grid = &inst.grid;
    let interior = &grid.nodes()[grid.interior_range()];
    let spec = CostSpec::new(
        problem.tracking,
        problem.u_d.sample(interior),
        problem.beta,
        problem.gamma,
        config.p,
        problem.experimental_gamma,
    )?;
    let cfg = config.control_config();
    control_tolerances(config, art);
    let r = solve_control(&spec, &inst.u0, &inst.table, &h0.table, grid, &cfg, None)?;
    report_control(art, &r);
    if problem.gamma > 0.0 {
        art.result("gamma_energy", config.p * energy(&h0.table, &r.u_opt.values, config.p));
    }
    art.converged &= r.converged;
    art.assert(
        "reduced gradient within tolerance",
        r.converged,
        format!("gradient {:e}, tol {:e}", r.reduced_grad_norm, cfg.tol),
    );

    let (starts, tol) = configured_starts(config);
    art.tol("uniqueness_tol", tol);
    if starts > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (mut spread_g, mut spread_u) = (0.0f64, 0.0f64);
        for _ in 1..starts {
            let start = Control::new(grid, (0..grid.interior_count()).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let other = solve_control(&spec, &inst.u0, &inst.table, &h0.table, grid, &cfg, Some(&start))?;
            art.converged &= other.converged;
            spread_g = spread_g.max(max_diff(&other.g_opt, &r.g_opt));
            spread_u = spread_u.max(max_diff(&other.u_opt.values, &r.u_opt.values));
        }
        art.result("multi_start_spread_g", spread_g);
        art.result("multi_start_spread_u", spread_u);
        art.assert(
            "multi-start optima agree",
            spread_g <= tol && spread_u <= tol,
            format!("{starts} starts, spread g {spread_g:e}, u {spread_u:e}, tol {tol:e}"),
        );
    }

    let range = grid.interior_range();
    let rows = range
        .clone()
        .zip(&r.g_opt)
        .zip(&spec.u_d)
        .map(|((i, g), ud)| vec![grid.nodes()[i], *g, r.u_opt.values[i], *ud]);
    art.table("control.csv", &["x", "g", "u", "u_d"], rows)?;
    let mask = grid.interior_mask();
    let rows =
        grid.nodes().iter().zip(&r.u_opt.values).zip(mask).map(|((x, u), m)| vec![*x, *u, f64::from(u8::from(*m))]);
    art.table("state.csv", &["x", "u", "mask"], rows)?;
    let rows = r.history.iter().enumerate().map(|(k, c)| vec![k as f64, *c]);
    art.table("history.csv", &["iteration", "cost"], rows)
}

fn schedule_instances(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    let schedule = config.schedule().expect("validated schedule");
    let problem = config.sweep_problem();
    for &delta in schedule.deltas() {
        let inst = problem.instance(delta, schedule.dx(delta))?;
        art.kernel(&inst);
    }
    art.tol("sweep_decrease_factor", SWEEP_DECREASE);
    Ok(())
}

fn sweep_state_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    schedule_instances(config, art)?;
    let schedule = config.schedule().expect("validated schedule");
    state_tolerances(config, art, None);
    art.tol("local_residual_tol", residual_tol(config.p));
    let g = &config.source.as_ref().expect("validated").g;
    let rec = run_delta_sweep_state(&config.sweep_problem(), g, &schedule, &config.solver_config())?;
    art.record("sweep_state.csv", &rec)
}

fn sweep_control_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    schedule_instances(config, art)?;
    let schedule = config.schedule().expect("validated schedule");
    control_tolerances(config, art);
    let problem = config.control_problem().expect("validated");
    if problem.gamma == 0.0 {
        art.tol("pairing_decrease_factor", STRONG_DECREASE);
    }
    let rec = run_delta_sweep_control(&config.sweep_problem(), &problem, &schedule, &config.control_config())?;
    art.record("sweep_control.csv", &rec)
}

fn gconv_cmd(config: &RunConfig, art: &mut Artifacts<'_>) -> Result<()> {
    let inst = single_instance(config)?;
    art.kernel(&inst);
    let (delta, dx) = config.delta_dx().expect("validated");
    state_tolerances(config, art, Some(inst.grid.interior_count()));
    art.tol("gconv_decrease_factor", STRONG_DECREASE);
    art.tol("oscillation_kept_fraction", OSCILLATION_KEPT);
    let seq = config.oscillating_sources().expect("validated");
    let rec = run_gconv_experiment(&config.sweep_problem(), &seq, delta, dx, &config.solver_config())?;
    art.record("gconv.csv", &rec)
}
