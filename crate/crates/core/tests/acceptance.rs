//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//!
//! Runs without the libtest harness so the lines are printed under a plain
//! `cargo test`. Set `ACCEPTANCE_SEED` to change the random draws.

mod common;

use std::time::Instant;

use nonlocal_control::control::{reduced_cost, reduced_gradient, solve_control, ControlConfig, CostSpec, Tracking};
use nonlocal_control::form::{assemble_pairs, energy, phi_p, CoefficientField};
use nonlocal_control::grid::{build_grid, Domain};
use nonlocal_control::kernel::{build_kernel, compute_c_n, KernelFamily};
use nonlocal_control::profile::Profile;
use nonlocal_control::state::{
    dirichlet_energy, solve_state, solve_state_from, variational_residual, Control, Optimizer, SolverConfig,
    VolumeConstraint,
};
use nonlocal_control::sweep::{
    run_delta_sweep_control, run_delta_sweep_state, run_fixed_function_limit, run_gconv_experiment, ControlProblem,
    ConvergenceRecord, DeltaSchedule, OscillatingSourceSeq, SweepProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn schedule() -> DeltaSchedule {
    DeltaSchedule::new(vec![0.2, 0.1, 0.05, 0.025], 16.0).unwrap()
}

fn failed_assertions(rec: &ConvergenceRecord) -> Vec<String> {
    rec.assertions.iter().filter(|a| !a.passed).map(|a| format!("{} ({})", a.name, a.detail)).collect()
}

/// Kernel normalization over random admissible parameters, by independent quadrature.
fn kernel_normalization(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = rng.random_range(1.1..4.0);
        let s = rng.random_range(0.02..(1.0 / p - 0.02));
        let delta = rng.random_range(0.01..1.0);
        for family in [KernelFamily::FractionalTruncated, KernelFamily::Constant] {
            let k = build_kernel(family, delta, p, s, None, 1).unwrap();
            worst = worst.max((common::kernel_mass(&k) - 1.0).abs());
        }
        worst = worst.max((compute_c_n(1, p).unwrap().value - 1.0).abs());
    }
    outcome(worst <= 1e-8, format!("max |mass - 1| = {worst:.2e} over 200 draws x 2 families"))
}

fn bbm_limit() -> Outcome {
    let rec = run_fixed_function_limit(
        &SweepProblem::unit(2.0),
        &Profile::polynomial(&[0.0, 0.0, 1.0]),
        4.0 / 3.0,
        &schedule(),
    )
    .unwrap();
    let err = rec.column("relative_error").unwrap();
    let listed: Vec<String> = err.iter().map(|e| format!("{e:.3e}")).collect();
    outcome(rec.all_passed(), format!("relative errors [{}]", listed.join(", ")))
}

/// 30-node linear instance: iterative minimizer vs a dense direct solve.
fn dirichlet_principle() -> Outcome {
    let delta = 4.0 / 21.0;
    let grid = build_grid(Domain::new(0.0, 1.0, delta, delta / 4.0).unwrap()).unwrap();
    assert_eq!(grid.len(), 30);
    let kernel = build_kernel(KernelFamily::Constant, delta, 2.0, 0.25, None, 1).unwrap();
    let h = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.0 + 0.5 * x).unwrap();
    let table = assemble_pairs(&grid, &kernel, Some(&h)).unwrap();
    let u0 = VolumeConstraint::from_fn(&grid, |x| if x < 0.5 { 0.3 } else { -0.2 }).unwrap();
    let g = Control::from_fn(&grid, |x| 1.0 + (3.0 * x).sin());
    let cfg = SolverConfig::new(2.0).with_optimizer(Optimizer::Lbfgs).with_tol(1e-13);
    let it = solve_state(&g, &u0, &table, &grid, &cfg).unwrap();
    let residual = variational_residual(&it.state.values, &g, &table, &grid, 2.0);

    let collar = u0.extend(&grid, &vec![0.0; grid.interior_count()]);
    let (a, b) = common::dense_linear_system(&grid, &kernel, h.values(), &collar, table.calibration());
    let w = &grid.quad_weights()[grid.interior_range()];
    let rhs = nalgebra::DVector::from_iterator(w.len(), w.iter().zip(&g.values).map(|(w, g)| w * g)) + b;
    let direct = a.cholesky().unwrap().solve(&rhs);
    let u_direct = u0.extend(&grid, direct.as_slice());
    let e_direct = dirichlet_energy(&u_direct, &g, &u0, &table, &grid, 2.0).unwrap();
    let gap = (e_direct - it.energy_value).abs();
    outcome(
        residual <= 1e-10 && gap <= 1e-12,
        format!("minimizer residual {residual:.2e}, |E_direct - E_min| = {gap:.2e}"),
    )
}

fn state_uniqueness(rng: &mut ChaCha8Rng) -> Outcome {
    let delta = 0.1;
    let grid = build_grid(Domain::new(0.0, 1.0, delta, delta / 8.0).unwrap()).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let kernel = build_kernel(KernelFamily::Constant, delta, p, 0.25, None, 1).unwrap();
        let h = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.25 + 0.5 * (4.0 * x).sin()).unwrap();
        let table = assemble_pairs(&grid, &kernel, Some(&h)).unwrap();
        let u0 = VolumeConstraint::from_fn(&grid, |x| x).unwrap();
        let g = Control::from_fn(&grid, |x| 2.0 - 3.0 * x);
        let (optimizer, tol) = if p == 2.0 { (Optimizer::Lbfgs, 1e-13) } else { (Optimizer::Lbfgs, 1e-11) };
        let cfg = SolverConfig::new(p).with_optimizer(optimizer).with_tol(tol).with_max_iters(50_000);
        let runs: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let start: Vec<f64> = (0..grid.interior_count()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let r = solve_state_from(&g, &u0, &table, &grid, &cfg, Some(&start)).unwrap();
                assert!(r.converged, "p = {p}: residual {}", r.variational_residual);
                r.state.values
            })
            .collect();
        let mut worst = 0.0f64;
        for i in 0..runs.len() {
            for j in i + 1..runs.len() {
                worst = worst.max(max_dev(&runs[i], &runs[j]));
            }
        }
        let bound = if p == 2.0 { 1e-8 } else { 1e-6 };
        ok &= worst <= bound;
        details.push(format!("p={p}: {worst:.1e} (<= {bound:.0e})"));
    }
    outcome(ok, details.join(", "))
}

fn homogeneity() -> Outcome {
    let delta = 0.1;
    let grid = build_grid(Domain::new(0.0, 1.0, delta, delta / 16.0).unwrap()).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for p in [2.0, 3.0] {
        let kernel = build_kernel(KernelFamily::FractionalTruncated, delta, p, 0.25, None, 1).unwrap();
        let h = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.0 + x).unwrap();
        let table = assemble_pairs(&grid, &kernel, Some(&h)).unwrap();
        let u0 = VolumeConstraint::zero(&grid);
        let cfg = if p == 2.0 {
            SolverConfig::new(p)
        } else {
            SolverConfig::new(p).with_optimizer(Optimizer::Newton).with_tol(1e-13)
        };
        let g = Control::from_fn(&grid, |x| (2.0 * x).cos() - 0.3);
        let g8 = Control { values: g.values.iter().map(|v| 8.0 * v).collect() };
        let u = solve_state(&g, &u0, &table, &grid, &cfg).unwrap().state.values;
        let u8 = solve_state(&g8, &u0, &table, &grid, &cfg).unwrap().state.values;
        let factor = 8f64.powf(1.0 / (p - 1.0));
        let scaled: Vec<f64> = u.iter().map(|v| factor * v).collect();
        let rel = max_dev(&u8, &scaled) / u8.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ok &= rel <= 1e-6;
        details.push(format!("p={p}: rel {rel:.1e}"));
    }
    outcome(ok, details.join(", "))
}

fn poincare(rng: &mut ChaCha8Rng) -> Outcome {
    let delta = 0.1;
    let grid = build_grid(Domain::new(0.0, 1.0, delta, delta / 16.0).unwrap()).unwrap();
    let range = grid.interior_range();
    let w = grid.quad_weights();
    let mut ok = true;
    let mut details = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let kernel = build_kernel(KernelFamily::Constant, delta, p, 0.25, None, 1).unwrap();
        let h = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.25 + 0.5 * (4.0 * x).sin()).unwrap();
        let table = assemble_pairs(&grid, &kernel, Some(&h)).unwrap();
        let mut min_q = f64::INFINITY;
        for _ in 0..100 {
            let mut u = vec![0.0; grid.len()];
            for slot in &mut u[range.clone()] {
                *slot = rng.random_range(-1.0..1.0);
            }
            let b = p * energy(&table, &u, p);
            let norm: f64 = range.clone().map(|i| w[i] * u[i].abs().powf(p)).sum();
            min_q = min_q.min(b / norm);
        }
        ok &= min_q >= 1e-3;
        details.push(format!("p={p}: min quotient {min_q:.3e}"));
    }
    outcome(ok, details.join(", "))
}

fn gradient_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    let mut ok = true;
    let mut worst = [0.0f64; 3];
    for (slot, (p, gamma, bound)) in [(2.0, 0.0, 1e-6), (2.0, 0.7, 1e-6), (3.0, 0.0, 1e-4)].into_iter().enumerate() {
        for _ in 0..5 {
            let delta = 1.0 / rng.random_range(5..13) as f64;
            let grid = build_grid(Domain::new(0.0, 1.0, delta, delta / 8.0).unwrap()).unwrap();
            let s = rng.random_range(0.05..0.3);
            let family = if rng.random_bool(0.5) { KernelFamily::Constant } else { KernelFamily::FractionalTruncated };
            let kernel = build_kernel(family, delta, p, s, None, 1).unwrap();
            let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let h = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.25 + 0.7 * (c[0] * 3.0 * x).sin()).unwrap();
            let h0 = CoefficientField::from_fn(&grid, 0.5, 2.0, |x| 1.0 + 0.5 * x * c[1].abs()).unwrap();
            let table_h = assemble_pairs(&grid, &kernel, Some(&h)).unwrap();
            let table_h0 = assemble_pairs(&grid, &kernel, Some(&h0)).unwrap();
            let u0 = VolumeConstraint::from_fn(&grid, |x| c[2] * x).unwrap();
            let interior = &grid.nodes()[grid.interior_range()];
            let u_d: Vec<f64> = interior.iter().map(|x| c[3] * (std::f64::consts::PI * x).sin()).collect();
            let beta = rng.random_range(0.01..0.5);
            let spec = CostSpec::new(Tracking::Quadratic, u_d, beta, gamma, p, false).unwrap();
            let cfg = ControlConfig::new(p);
            let g = Control { values: interior.iter().map(|_| rng.random_range(-2.0..2.0)).collect() };
            let dir: Vec<f64> = interior.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let grad = reduced_gradient(&g, &spec, &u0, &table_h, &table_h0, &grid, &cfg).unwrap();
            let analytic: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
            let t = 1e-5;
            let at = |sign: f64| {
                let values = g.values.iter().zip(&dir).map(|(g, d)| g + sign * t * d).collect();
                reduced_cost(&Control { values }, &spec, &u0, &table_h, &table_h0, &grid, &cfg).unwrap()
            };
            let fd = (at(1.0) - at(-1.0)) / (2.0 * t);
            let rel = (fd - analytic).abs() / analytic.abs();
            worst[slot] = worst[slot].max(rel);
            ok &= rel <= bound;
        }
    }
    outcome(
        ok,
        format!(
            "worst relative error: p=2 {:.1e}, p=2 with gamma {:.1e} (<= 1e-6); p=3 {:.1e} (<= 1e-4)",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn gconv() -> Outcome {
    let seq = OscillatingSourceSeq::new(Profile::constant(1.0), 0.5, vec![4, 8, 16, 32, 64]).unwrap();
    let rec = run_gconv_experiment(&SweepProblem::unit(2.0), &seq, 0.1, 0.1 / 16.0, &SolverConfig::new(2.0)).unwrap();
    let ratio = |c: &str| {
        let v = rec.column(c).unwrap();
        v[0] / v[v.len() - 1]
    };
    let norms = rec.column("source_gap_norm").unwrap();
    let ok = ratio("min_value_gap") >= 10.0
        && ratio("difference_energy") >= 10.0
        && norms.iter().all(|&v| v >= 0.5 * norms[0]);
    outcome(
        ok && rec.all_passed(),
        format!(
            "|m_j - m| shrinks {:.1}x, B(u_j - u) shrinks {:.1}x, |g_j - g| stays {:.4} (analytic {:.4})",
            ratio("min_value_gap"),
            ratio("difference_energy"),
            norms[norms.len() - 1],
            rec.scalars["oscillation_norm"]
        ),
    )
}

fn state_sweep() -> Outcome {
    let rec =
        run_delta_sweep_state(&SweepProblem::unit(2.0), &Profile::constant(1.0), &schedule(), &SolverConfig::new(2.0))
            .unwrap();
    let l2 = rec.column("state_error_l2").unwrap();
    let gap = rec.column("energy_gap").unwrap();
    let exact = 1.0 / 12.0;
    let ok = l2[0] >= 2.0 * l2[3] && gap[0] >= 2.0 * gap[3] && gap[3] <= 0.05 * exact;
    outcome(
        ok && rec.all_passed(),
        format!(
            "L2 error {:.2e} -> {:.2e}, energy gap {:.2e} -> {:.2e} ({:.2}% of 1/12)",
            l2[0],
            l2[3],
            gap[0],
            gap[3],
            100.0 * gap[3] / exact
        ),
    )
}

const C10_AMPLITUDE: f64 = 0.5;
const C10_BETA: f64 = 1e-4;
const HUBER_WIDTH: f64 = 0.5;

fn control_problem(gamma: f64) -> ControlProblem {
    ControlProblem {
        tracking: Tracking::Huber { width: HUBER_WIDTH },
        u_d: common::flux_free_target(C10_AMPLITUDE, C10_BETA),
        beta: C10_BETA,
        gamma,
        h0: Profile::constant(1.0),
        experimental_gamma: false,
    }
}

fn control_sweep_gamma0() -> Outcome {
    assert!(common::flux_free_residual(C10_AMPLITUDE, C10_BETA) < HUBER_WIDTH);
    let mut ok = true;
    let mut details = Vec::new();
    for p in [2.0, 3.0] {
        let rec =
            run_delta_sweep_control(&SweepProblem::unit(p), &control_problem(0.0), &schedule(), &ControlConfig::new(p))
                .unwrap();
        let ratio = |c: &str| {
            let v = rec.column(c).unwrap();
            v[0] / v[v.len() - 1]
        };
        let pairings: Vec<String> = (0..5).map(|k| format!("{:.1}", ratio(&format!("pairing_x{k}")))).collect();
        ok &= rec.all_passed();
        details.push(format!(
            "p={p}: cost gap shrinks {:.1}x, pairings shrink [{}]x",
            ratio("cost_gap"),
            pairings.join(" ")
        ));
        for f in failed_assertions(&rec) {
            details.push(format!("p={p} failed: {f}"));
        }
    }
    outcome(ok, details.join("; "))
}

fn control_sweep_gamma() -> Outcome {
    let p = 2.0;
    let problem = control_problem(1.0);
    let rec = run_delta_sweep_control(&SweepProblem::unit(p), &problem, &schedule(), &ControlConfig::new(p)).unwrap();
    let ratio = |c: &str| {
        let v = rec.column(c).unwrap();
        v[0] / v[v.len() - 1]
    };
    // multi-start uniqueness at delta = 0.1
    let inst = SweepProblem::unit(p).instance(0.1, 0.1 / 16.0).unwrap();
    let grid = &inst.grid;
    let spec = CostSpec::new(
        problem.tracking,
        problem.u_d.sample(&grid.nodes()[grid.interior_range()]),
        problem.beta,
        problem.gamma,
        p,
        false,
    )
    .unwrap();
    let cfg = ControlConfig::new(p).with_tol(1e-12).with_max_iters(20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let runs: Vec<_> = (0..3)
        .map(|_| {
            let start = Control { values: (0..grid.interior_count()).map(|_| rng.random_range(-50.0..50.0)).collect() };
            solve_control(&spec, &inst.u0, &inst.table, &inst.table, grid, &cfg, Some(&start)).unwrap()
        })
        .collect();
    let mut dg = 0.0f64;
    let mut du = 0.0f64;
    for r in &runs[1..] {
        dg = dg.max(max_dev(&r.g_opt, &runs[0].g_opt));
        du = du.max(max_dev(&r.u_opt.values, &runs[0].u_opt.values));
    }
    let unique = dg <= 1e-6 && du <= 1e-6 && runs.iter().all(|r| r.converged);
    outcome(
        rec.all_passed() && ratio("cost_gap") >= 2.0 && ratio("gamma_energy_gap") >= 2.0 && unique,
        format!(
            "cost gap shrinks {:.1}x, gamma-term gap shrinks {:.1}x, multi-start deviation g {dg:.1e} u {du:.1e}",
            ratio("cost_gap"),
            ratio("gamma_energy_gap")
        ),
    )
}

fn monotonicity(rng: &mut ChaCha8Rng) -> Outcome {
    let mut violations = 0;
    let mut min_strict = f64::INFINITY;
    for k in 0..10_000 {
        let p = rng.random_range(1.01..6.0);
        let a = rng.random_range(-10.0..10.0);
        let b = if k % 10 == 0 { a } else { rng.random_range(-10.0..10.0) };
        let v = (phi_p(a, p) - phi_p(b, p)) * (a - b);
        if a == b {
            violations += usize::from(v != 0.0);
        } else {
            violations += usize::from(v <= 0.0);
            min_strict = min_strict.min(v / (a - b).abs().powf(p.max(2.0)));
        }
    }
    outcome(violations == 0, format!("{violations} violations in 10^4 samples, min scaled product {min_strict:.2e}"))
}

fn determinism() -> Outcome {
    let run = || -> Vec<Vec<u8>> {
        let state = run_delta_sweep_state(
            &SweepProblem::unit(3.0),
            &Profile::constant(1.0),
            &schedule(),
            &SolverConfig::new(3.0),
        )
        .unwrap();
        let seq = OscillatingSourceSeq::new(Profile::constant(1.0), 0.5, vec![4, 8, 16]).unwrap();
        let g = run_gconv_experiment(&SweepProblem::unit(1.5), &seq, 0.1, 0.1 / 8.0, &SolverConfig::new(1.5)).unwrap();
        let c = run_delta_sweep_control(
            &SweepProblem::unit(2.0),
            &control_problem(1.0),
            &schedule(),
            &ControlConfig::new(2.0),
        )
        .unwrap();
        [state, g, c].iter().map(|r| r.to_csv().unwrap()).collect()
    };
    let first = run();
    let second = run();
    let bytes: usize = first.iter().map(Vec::len).sum();
    outcome(first == second, format!("3 experiment CSVs, {bytes} bytes, identical across two runs"))
}

type Criterion = Box<dyn FnOnce(&mut ChaCha8Rng) -> Outcome>;

fn main() {
    let seed = std::env::var("ACCEPTANCE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20_241_014u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("acceptance suite, seed {seed}");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("kernel normalization", Box::new(kernel_normalization)),
        ("fixed-function energy limit", Box::new(|_| bbm_limit())),
        ("Dirichlet-principle equivalence", Box::new(|_| dirichlet_principle())),
        ("state uniqueness", Box::new(state_uniqueness)),
        ("p-homogeneity", Box::new(|_| homogeneity())),
        ("nonlocal Poincare", Box::new(poincare)),
        ("reduced-gradient oracle", Box::new(gradient_oracle)),
        ("G-convergence", Box::new(|_| gconv())),
        ("state horizon limit", Box::new(|_| state_sweep())),
        ("control horizon limit, gamma = 0", Box::new(|_| control_sweep_gamma0())),
        ("control horizon limit, gamma > 0", Box::new(|_| control_sweep_gamma())),
        ("monotonicity inequality", Box::new(monotonicity)),
        ("determinism", Box::new(|_| determinism())),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let r = check(&mut rng);
        failures += usize::from(!r.passed);
        println!(
            "criterion {:>2} {:<36} {}  {} [{:.1}s]",
            k + 1,
            name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 13 criteria passed", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
