//! Run configuration: TOML parsing, defaults and parse-time validation.
//!
//! Every section rejects unknown keys. Validation builds the grids and
//! kernels a run will use, so module invariants fail here with the field
//! and the violated rule named, before any solve starts.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::{ControlConfig, CostSpec, Tracking};
use crate::error::{Error, Result};
use crate::form::{CoefficientField, KernelQuadrature};
use crate::grid::{build_grid, Domain, Grid};
use crate::kernel::{build_kernel, KernelFamily};
use crate::local::LocalGrid;
use crate::profile::Profile;
use crate::state::{Optimizer, SolverConfig};
use crate::sweep::{ControlProblem, DeltaSchedule, OscillatingSourceSeq, SweepProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SolveState,
    SolveLocal,
    SolveControl,
    SweepState,
    SweepControl,
    Gconv,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::SolveState,
        Command::SolveLocal,
        Command::SolveControl,
        Command::SweepState,
        Command::SweepControl,
        Command::Gconv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SolveState => "solve-state",
            Command::SolveLocal => "solve-local",
            Command::SolveControl => "solve-control",
            Command::SweepState => "sweep-state",
            Command::SweepControl => "sweep-control",
            Command::Gconv => "gconv",
        }
    }

    fn is_sweep(self) -> bool {
        matches!(self, Command::SweepState | Command::SweepControl)
    }

    fn is_control(self) -> bool {
        matches!(self, Command::SolveControl | Command::SweepControl)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

const DEFAULT_KAPPA: f64 = 16.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    /// Horizon of single-horizon commands; sweeps take theirs from `[schedule]`.
    pub delta: Option<f64>,
    /// Node spacing; derived as `delta / kappa` when absent.
    pub dx: Option<f64>,
    pub kappa: Option<f64>,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection { a: 0.0, b: 1.0, delta: None, dx: None, kappa: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default = "default_family")]
    pub family: KernelFamily,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub quadrature: KernelQuadrature,
    /// Lower-bound constant the kernel is checked against, if any.
    pub c0_floor: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            family: default_family(),
            s: default_s(),
            quadrature: KernelQuadrature::default(),
            c0_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    #[serde(default = "unit_profile")]
    pub h: Profile,
    /// Bounds of the admissible class; default to the range of `h` on the domain.
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    /// Volume constraint on the collar (boundary data of the local problem).
    #[serde(default = "zero_profile")]
    pub u0: Profile,
}

impl Default for CoefficientSection {
    fn default() -> Self {
        CoefficientSection { h: unit_profile(), h_min: None, h_max: None, u0: zero_profile() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub g: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub optimizer: Option<Optimizer>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    /// Independent solves from seeded random starts (1 means the default start only).
    #[serde(default = "one_usize")]
    pub starts: usize,
    /// Largest admissible max-norm spread between multi-start solutions.
    pub uniqueness_tol: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { optimizer: None, tol: None, max_iters: None, starts: 1, uniqueness_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default = "default_tracking")]
    pub tracking: Tracking,
    pub u_d: Profile,
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "unit_profile")]
    pub h0: Profile,
    #[serde(default)]
    pub experimental_gamma: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub memory: Option<usize>,
    /// Tolerance of the inner state solves for `p != 2`.
    pub state_tol: Option<f64>,
    pub state_max_iters: Option<usize>,
    #[serde(default = "one_usize")]
    pub starts: usize,
    pub uniqueness_tol: Option<f64>,
}

impl Default for ControlSection {
    fn default() -> Self {
        ControlSection {
            tol: None,
            max_iters: None,
            memory: None,
            state_tol: None,
            state_max_iters: None,
            starts: 1,
            uniqueness_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_deltas")]
    pub deltas: Vec<f64>,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_refine")]
    pub local_refine: usize,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection { deltas: default_deltas(), kappa: DEFAULT_KAPPA, local_refine: default_refine() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GconvSection {
    /// Sources are `g + amplitude sin(j pi x)` for `j` in `frequencies`.
    pub amplitude: f64,
    #[serde(default = "default_frequencies")]
    pub frequencies: Vec<u32>,
}

/// A validated run. Optional fields are filled with the values actually used,
/// so serializing it echoes every default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub domain: DomainSection,
    pub kernel: Option<KernelSection>,
    pub coefficient: Option<CoefficientSection>,
    pub source: Option<SourceSection>,
    pub solver: Option<SolverSection>,
    pub cost: Option<CostSection>,
    pub control: Option<ControlSection>,
    pub schedule: Option<ScheduleSection>,
    pub gconv: Option<GconvSection>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_family() -> KernelFamily {
    KernelFamily::Constant
}

fn default_s() -> f64 {
    0.25
}

fn unit_profile() -> Profile {
    Profile::constant(1.0)
}

fn zero_profile() -> Profile {
    Profile::constant(0.0)
}

fn default_tracking() -> Tracking {
    Tracking::Huber { width: 0.5 }
}

fn default_deltas() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_refine() -> usize {
    4
}

fn default_frequencies() -> Vec<u32> {
    vec![4, 8, 16, 32, 64]
}

fn field_err(field: &str, e: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {e}"))
}

/// Parse and validate a config whose `command` key names the run.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_for(text, None)
}

/// Parse and validate a config for `command`; a `command` key in the file must agree.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
    cfg.command = match (cfg.command, command) {
        (Some(file), Some(cli)) if file != cli => {
            return Err(field_err("command", format!("config is for {file}, but {cli} was requested")));
        }
        (Some(c), _) | (None, Some(c)) => Some(c),
        (None, None) => return Err(field_err("command", "missing; name it in the config or on the command line")),
    };
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn command(&self) -> Command {
        self.command.expect("validated config has a command")
    }

    fn validate(&mut self) -> Result<()> {
        let cmd = self.command();
        let p = self.p;
        if !(p > 1.0 && p.is_finite()) {
            return Err(field_err("p", format!("rule p > 1 violated: p = {p}")));
        }
        self.check_sections(cmd)?;
        if cmd != Command::SolveLocal {
            self.kernel.get_or_insert_with(KernelSection::default);
        }
        self.coefficient.get_or_insert_with(CoefficientSection::default);
        if cmd.is_sweep() {
            self.schedule.get_or_insert_with(ScheduleSection::default);
        }
        if cmd.is_control() {
            self.control.get_or_insert_with(ControlSection::default);
        } else {
            self.solver.get_or_insert_with(SolverSection::default);
        }

        self.validate_coefficient()?;
        self.validate_domain(cmd)?;
        if let Some(src) = &self.source {
            src.g.check().map_err(|e| field_err("source.g", e))?;
        }
        if let Some(kernel) = &self.kernel {
            if let Some(c0) = kernel.c0_floor {
                if !(c0 > 0.0) {
                    return Err(field_err("kernel.c0_floor", format!("rule c0_floor > 0 violated: {c0}")));
                }
            }
        }
        for delta in self.horizons() {
            let kernel = self.kernel.as_ref().expect("kernel section is filled");
            build_kernel(kernel.family, delta, p, kernel.s, kernel.c0_floor, 1).map_err(|e| field_err("kernel", e))?;
        }
        if let Some(sched) = &self.schedule {
            DeltaSchedule::new(sched.deltas.clone(), sched.kappa).map_err(|e| field_err("schedule", e))?;
            if sched.local_refine == 0 {
                return Err(field_err("schedule.local_refine", "rule local_refine >= 1 violated"));
            }
            for &delta in &sched.deltas {
                self.grid_for(delta, sched.kappa.recip() * delta).map_err(|e| field_err("schedule", e))?;
            }
        }
        self.validate_solver()?;
        self.validate_cost()?;
        self.validate_control()?;
        if let Some(gc) = &self.gconv {
            let base = self.source.as_ref().expect("gconv requires a source").g.clone();
            OscillatingSourceSeq::new(base, gc.amplitude, gc.frequencies.clone()).map_err(|e| field_err("gconv", e))?;
        }
        Ok(())
    }

    fn check_sections(&self, cmd: Command) -> Result<()> {
        let present = [
            ("kernel", self.kernel.is_some()),
            ("source", self.source.is_some()),
            ("solver", self.solver.is_some()),
            ("cost", self.cost.is_some()),
            ("control", self.control.is_some()),
            ("schedule", self.schedule.is_some()),
            ("gconv", self.gconv.is_some()),
        ];
        let (required, allowed): (&[&str], &[&str]) = match cmd {
            Command::SolveState => (&["source"], &["kernel", "source", "solver"]),
            Command::SolveLocal => (&["source"], &["source", "solver"]),
            Command::SolveControl => (&["cost"], &["kernel", "cost", "control"]),
            Command::SweepState => (&["source"], &["kernel", "source", "solver", "schedule"]),
            Command::SweepControl => (&["cost"], &["kernel", "cost", "control", "schedule"]),
            Command::Gconv => (&["source", "gconv"], &["kernel", "source", "solver", "gconv"]),
        };
        for (name, is_present) in present {
            if is_present && !allowed.contains(&name) {
                return Err(field_err(name, format!("section [{name}] is not used by {cmd}")));
            }
            if !is_present && required.contains(&name) {
                return Err(field_err(name, format!("section [{name}] is required by {cmd}")));
            }
        }
        Ok(())
    }

    fn validate_domain(&mut self, cmd: Command) -> Result<()> {
        let d = &mut self.domain;
        if !(d.a.is_finite() && d.b.is_finite() && d.a < d.b) {
            return Err(field_err("domain", format!("rule a < b violated: a = {}, b = {}", d.a, d.b)));
        }
        if cmd.is_sweep() {
            if d.delta.is_some() || d.dx.is_some() || d.kappa.is_some() {
                return Err(field_err(
                    "domain",
                    "sweeps take delta and spacing from [schedule]; remove delta, dx and kappa",
                ));
            }
            return Ok(());
        }
        if d.dx.is_some() && d.kappa.is_some() {
            return Err(field_err("domain", "give either dx or kappa, not both"));
        }
        if let Some(k) = d.kappa {
            if !(k >= 4.0) {
                return Err(field_err("domain.kappa", format!("grid rule dx <= delta/4 violated: kappa = {k}")));
            }
        }
        match (d.delta, d.dx) {
            (Some(delta), dx) => {
                let dx = dx.unwrap_or(delta / d.kappa.unwrap_or(DEFAULT_KAPPA));
                d.dx = Some(dx);
                d.kappa = None;
                self.grid_for(delta, dx).map_err(|e| field_err("domain", e))?;
            }
            (None, Some(dx)) if cmd == Command::SolveLocal => {
                LocalGrid::new(d.a, d.b, dx, (0.0, 0.0)).map_err(|e| field_err("domain", e))?;
            }
            (None, _) if cmd == Command::SolveLocal => {
                return Err(field_err("domain", "solve-local needs dx, or delta with an optional kappa"));
            }
            (None, _) => return Err(field_err("domain.delta", format!("required by {cmd}"))),
        }
        Ok(())
    }

    fn validate_coefficient(&mut self) -> Result<()> {
        let (a, b) = (self.domain.a, self.domain.b);
        let c = self.coefficient.as_mut().expect("coefficient section is filled");
        c.h.check().map_err(|e| field_err("coefficient.h", e))?;
        c.u0.check().map_err(|e| field_err("coefficient.u0", e))?;
        let (lo, hi) = c.h.range_on(a, b);
        // the sampled range can miss grid nodes by rounding-level amounts
        let pad = if matches!(c.h, Profile::Constant { .. }) { 0.0 } else { 1e-9 * lo.abs().max(hi.abs()) };
        let h_min = *c.h_min.get_or_insert(lo - pad);
        let h_max = *c.h_max.get_or_insert(hi + pad);
        if !(h_min > 0.0 && h_max >= h_min && h_max.is_finite()) {
            return Err(field_err(
                "coefficient",
                format!("rule 0 < h_min <= h_max violated: h_min = {h_min}, h_max = {h_max}"),
            ));
        }
        if lo < h_min - pad || hi > h_max + pad {
            return Err(field_err(
                "coefficient.h",
                format!("rule h_min <= h <= h_max violated: h ranges over [{lo}, {hi}], bounds [{h_min}, {h_max}]"),
            ));
        }
        Ok(())
    }

    fn validate_solver(&mut self) -> Result<()> {
        let p = self.p;
        let Some(s) = self.solver.as_mut() else { return Ok(()) };
        let defaults = SolverConfig::new(p);
        let optimizer = *s.optimizer.get_or_insert(defaults.optimizer);
        let tol = *s.tol.get_or_insert(defaults.grad_tol);
        let cfg = SolverConfig { optimizer, grad_tol: tol, max_iters: s.max_iters, ..defaults };
        cfg.validate().map_err(|e| field_err("solver", e))?;
        if s.starts == 0 {
            return Err(field_err("solver.starts", "rule starts >= 1 violated"));
        }
        let u = *s.uniqueness_tol.get_or_insert(if p == 2.0 { 1e-8 } else { 1e-6 });
        if !(u > 0.0) {
            return Err(field_err("solver.uniqueness_tol", format!("rule uniqueness_tol > 0 violated: {u}")));
        }
        if s.starts > 1 && optimizer == Optimizer::DirectLinear {
            return Err(field_err(
                "solver.starts",
                "multi-start needs an iterative optimizer; the direct solve has no starting point",
            ));
        }
        Ok(())
    }

    fn validate_cost(&self) -> Result<()> {
        let Some(cost) = &self.cost else { return Ok(()) };
        cost.u_d.check().map_err(|e| field_err("cost.u_d", e))?;
        cost.h0.check().map_err(|e| field_err("cost.h0", e))?;
        let (lo, hi) = cost.h0.range_on(self.domain.a, self.domain.b);
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(field_err(
                "cost.h0",
                format!("rule h0 > 0 on the domain violated: h0 ranges over [{lo}, {hi}]"),
            ));
        }
        let (a, b) = (self.domain.a, self.domain.b);
        CostSpec::new(
            cost.tracking,
            cost.u_d.sample(&[a, 0.5 * (a + b), b]),
            cost.beta,
            cost.gamma,
            self.p,
            cost.experimental_gamma,
        )
        .map_err(|e| field_err("cost", e))?;
        Ok(())
    }

    fn validate_control(&mut self) -> Result<()> {
        let p = self.p;
        let Some(c) = self.control.as_mut() else { return Ok(()) };
        let d = ControlConfig::new(p);
        let tol = *c.tol.get_or_insert(d.tol);
        c.max_iters.get_or_insert(d.max_iters);
        let memory = *c.memory.get_or_insert(d.memory);
        let state_tol = *c.state_tol.get_or_insert(d.state.grad_tol);
        if let Some(m) = d.state.max_iters {
            c.state_max_iters.get_or_insert(m);
        }
        let u = *c.uniqueness_tol.get_or_insert(1e-6);
        for (name, v) in [("control.tol", tol), ("control.state_tol", state_tol), ("control.uniqueness_tol", u)] {
            if !(v > 0.0) {
                return Err(field_err(name, format!("rule {} > 0 violated: {v}", &name[8..])));
            }
        }
        if memory == 0 {
            return Err(field_err("control.memory", "rule memory >= 1 violated"));
        }
        if c.starts == 0 {
            return Err(field_err("control.starts", "rule starts >= 1 violated"));
        }
        Ok(())
    }

    fn grid_for(&self, delta: f64, dx: f64) -> Result<Grid> {
        let grid = build_grid(Domain::new(self.domain.a, self.domain.b, delta, dx)?)?;
        let c = self.coefficient();
        CoefficientField::from_fn(&grid, c.h_min.expect("filled"), c.h_max.expect("filled"), |x| c.h.eval(x))?;
        Ok(grid)
    }

    /// Every horizon the run assembles a kernel for.
    pub fn horizons(&self) -> Vec<f64> {
        match (&self.schedule, self.domain.delta) {
            (Some(s), _) => s.deltas.clone(),
            (None, Some(d)) if self.kernel.is_some() => vec![d],
            _ => Vec::new(),
        }
    }

    /// Horizon and spacing of a single-horizon nonlocal run.
    pub fn delta_dx(&self) -> Option<(f64, f64)> {
        Some((self.domain.delta?, self.domain.dx?))
    }

    pub fn coefficient(&self) -> &CoefficientSection {
        self.coefficient.as_ref().expect("coefficient section is filled")
    }

    pub fn sweep_problem(&self) -> SweepProblem {
        let kernel = self.kernel.clone().unwrap_or_default();
        let c = self.coefficient();
        SweepProblem {
            a: self.domain.a,
            b: self.domain.b,
            p: self.p,
            family: kernel.family,
            s: kernel.s,
            quadrature: kernel.quadrature,
            h: c.h.clone(),
            h_min: c.h_min.expect("filled"),
            h_max: c.h_max.expect("filled"),
            u0: c.u0.clone(),
            local_refine: self.schedule.as_ref().map_or(default_refine(), |s| s.local_refine),
        }
    }

    pub fn schedule(&self) -> Option<DeltaSchedule> {
        let s = self.schedule.as_ref()?;
        DeltaSchedule::new(s.deltas.clone(), s.kappa).ok()
    }

    pub fn solver_config(&self) -> SolverConfig {
        let defaults = SolverConfig::new(self.p);
        match &self.solver {
            Some(s) => SolverConfig {
                optimizer: s.optimizer.unwrap_or(defaults.optimizer),
                grad_tol: s.tol.unwrap_or(defaults.grad_tol),
                max_iters: s.max_iters,
                ..defaults
            },
            None => defaults,
        }
    }

    pub fn control_config(&self) -> ControlConfig {
        let mut cfg = ControlConfig::new(self.p);
        if let Some(c) = &self.control {
            cfg.tol = c.tol.unwrap_or(cfg.tol);
            cfg.max_iters = c.max_iters.unwrap_or(cfg.max_iters);
            cfg.memory = c.memory.unwrap_or(cfg.memory);
            cfg.state.grad_tol = c.state_tol.unwrap_or(cfg.state.grad_tol);
            cfg.state.max_iters = c.state_max_iters.or(cfg.state.max_iters);
        }
        cfg
    }

    pub fn control_problem(&self) -> Option<ControlProblem> {
        let c = self.cost.as_ref()?;
        Some(ControlProblem {
            tracking: c.tracking,
            u_d: c.u_d.clone(),
            beta: c.beta,
            gamma: c.gamma,
            h0: c.h0.clone(),
            experimental_gamma: c.experimental_gamma,
        })
    }

    pub fn oscillating_sources(&self) -> Option<OscillatingSourceSeq> {
        let gc = self.gconv.as_ref()?;
        OscillatingSourceSeq::new(self.source.as_ref()?.g.clone(), gc.amplitude, gc.frequencies.clone()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        command = "solve-state"
        p = 2.0
        [domain]
        delta = 0.1
        [source]
        g = { kind = "constant", value = 1.0 }
    "#;

    fn config_error(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config(msg)) => msg,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.command(), Command::SolveState);
        assert_eq!(cfg.delta_dx(), Some((0.1, 0.1 / 16.0)));
        assert_eq!(cfg.kernel.as_ref().unwrap().family, KernelFamily::Constant);
        let solver = cfg.solver.as_ref().unwrap();
        assert_eq!(solver.optimizer, Some(Optimizer::DirectLinear));
        assert_eq!(solver.tol, Some(1e-10));
        assert_eq!(cfg.coefficient().h_min, Some(1.0));
        // the echo parses back to the same config
        let echo = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&echo).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let msg = config_error(&format!("{MINIMAL}\nextra = 1\n"));
        assert!(msg.contains("unknown field `extra`"), "{msg}");
        let nested = MINIMAL.replace("delta = 0.1", "delta = 0.1\nhorizon = 0.2");
        assert!(config_error(&nested).contains("unknown field `horizon`"));
        let in_profile = MINIMAL.replace("value = 1.0 }", "value = 1.0, slope = 2.0 }");
        assert!(config_error(&in_profile).contains("slope"));
    }

    #[test]
    fn grid_rule_is_named() {
        let msg = config_error(&MINIMAL.replace("delta = 0.1", "delta = 0.1\ndx = 0.05"));
        assert!(msg.contains("grid rule dx <= delta/4"), "{msg}");
    }

    #[test]
    fn gamma_needs_p_two() {
        let text = r#"
            command = "solve-control"
            p = 3.0
            [domain]
            delta = 0.1
            [cost]
            u_d = { kind = "constant", value = 0.1 }
            beta = 1e-3
            gamma = 1.0
        "#;
        let msg = config_error(text);
        assert!(msg.contains("requires p = 2"), "{msg}");
        let ok = text.replace("gamma = 1.0", "gamma = 1.0\nexperimental_gamma = true");
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn sections_follow_the_command() {
        let msg =
            config_error(&format!("{MINIMAL}\n[cost]\nu_d = {{ kind = \"constant\", value = 0.0 }}\nbeta = 1.0\n"));
        assert!(msg.contains("not used by solve-state"), "{msg}");
        let msg = config_error("command = \"sweep-control\"\np = 2.0\n");
        assert!(msg.contains("[cost] is required"), "{msg}");
        let msg = config_error(&MINIMAL.replace("command = \"solve-state\"", "command = \"sweep-state\""));
        assert!(msg.contains("[schedule]"), "{msg}");
    }

    #[test]
    fn command_must_agree_with_request() {
        let err = parse_config_for(MINIMAL, Some(Command::Gconv)).unwrap_err();
        assert!(err.to_string().contains("requested"));
        let no_command = MINIMAL.replace("command = \"solve-state\"", "");
        assert!(parse_config(&no_command).is_err());
        assert!(parse_config_for(&no_command, Some(Command::SolveState)).is_ok());
    }

    #[test]
    fn coefficient_bounds_are_checked() {
        let text = format!("{MINIMAL}\n[coefficient]\nh = {{ kind = \"sine\", amplitude = 0.5, frequency = 2.0, offset = 1.0 }}\nh_min = 0.8\n");
        let msg = config_error(&text);
        assert!(msg.contains("h_min <= h <= h_max"), "{msg}");
    }

    #[test]
    fn kernel_hypothesis_is_checked() {
        let msg = config_error(&format!("{MINIMAL}\n[kernel]\ns = 0.6\n"));
        assert!(msg.contains("N > p s"), "{msg}");
    }

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("solve".parse::<Command>().is_err());
    }
}
