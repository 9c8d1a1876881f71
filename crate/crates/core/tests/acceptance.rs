//! Acceptance run: one PASS/FAIL line per criterion. Every tolerance and
//! setting is pinned here. Exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use gkdv_core::continuation::{
    calibrate_epsilon0, globalize, growth_bound_check, CalibrationOptions, GlobalizeConfig, RunMode,
};
use gkdv_core::estimates::{
    commutator_decay_ratio, run_ensemble, windowed_free_wave, EstimateId, EstimateParams, Lab, TrialEnsemble,
};
use gkdv_core::imethod::{loglog_slope, measure_increments, rough_data, MultiplierSpec};
use gkdv_core::norms::sobolev_norm;
use gkdv_core::solver::{evolve, soliton, SolverConfig};
use gkdv_core::spectral::{Field, Grid1D, SpaceTimeField};
use gkdv_core::validation::{
    check_band_limited_commutator, check_parameters, check_regions, check_rescaling, recentred_shape_error,
    run_validation_suite, temporal_convergence_factor, CheckOutcome,
};

const SEED: u64 = 42;

struct Line {
    id: &'static str,
    passed: bool,
    text: String,
}

fn all(checks: &[CheckOutcome]) -> (bool, String) {
    let passed = checks.iter().all(|c| c.passed);
    let text = checks
        .iter()
        .map(|c| format!("{} {:.3e} (tol {:.1e})", c.name, c.value, c.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    (passed, text)
}

fn c1_solver() -> Line {
    let start = Instant::now();
    let g = Grid1D::new(512, 100.0).unwrap();
    let cfg = SolverConfig::new(g, 1e-4).unwrap();
    let u0 = soliton(1.0, &g).unwrap();
    let traj = evolve(&u0, 1.0, &cfg, 1000).unwrap();
    let drift = traj.mass_drift();
    let shape = recentred_shape_error(traj.last(), 1.0, 1.0).unwrap();
    // errors against a dt = 2.5e-5 reference, dt = 2e-4 -> 1e-4
    let factor = temporal_convergence_factor(&u0, 1.0, 2e-4, 2.5e-5).unwrap();
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: "1 solver validity",
        passed: drift <= 1e-8 && shape <= 1e-6 && (12.0..=20.0).contains(&factor) && secs <= 120.0,
        text: format!(
            "mass drift {drift:.2e} (<= 1e-8), shape error {shape:.2e} (<= 1e-6), \
             convergence factor {factor:.2} (in [12, 20]), {secs:.1} s (<= 120 s)"
        ),
    }
}

fn c2_parameters() -> Line {
    let start = Instant::now();
    let (passed, text) = all(&check_parameters(SEED).unwrap());
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: "2 parameter algebra",
        passed: passed && secs <= 1.0,
        text: format!("{text}; {secs:.4} s (<= 1 s)"),
    }
}

fn c3_rescaling() -> Line {
    let (passed, text) = all(&check_rescaling(SEED).unwrap());
    Line { id: "3 rescaling", passed, text }
}

fn c4_almost_conservation() -> Line {
    let start = Instant::now();
    let g = Grid1D::new(1024, 2.0 * PI).unwrap();
    // modes |k| <= 100 with |u^(k)| ~ <k>^{-1}, unit L2 norm
    let u0 = rough_data(&g, -1.0, 100, 1.0, 1).unwrap();
    let cfg = SolverConfig::new(g, 2.5e-6).unwrap();
    let ns = [16.0, 32.0, 64.0, 128.0, 256.0];
    let specs: Vec<_> = ns.iter().map(|&n| MultiplierSpec::new(-0.125, n).unwrap()).collect();
    let inc = measure_increments(&u0, &specs, 1.0, &cfg).unwrap();
    let abs: Vec<f64> = inc.iter().map(|i| i.increment.abs()).collect();
    let slope = loglog_slope(&ns, &abs).unwrap_or(f64::NAN);
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: "4 almost-conservation decay",
        passed: slope <= -0.4 && secs <= 600.0,
        text: format!(
            "|increment| {:?}, slope {slope:.2} (<= -0.4), {secs:.0} s (<= 600 s)",
            abs.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    }
}

/// Returns the line and the decay constant, taken as the largest normalised
/// commutator ratio of the sweep.
fn c5_commutator() -> (Line, f64) {
    let (band_ok, band_text) = all(&check_band_limited_commutator(SEED).unwrap());
    let lab = Lab {
        box_length: 2.0 * PI,
        n: 64,
        n_t: 1024,
        delta: 0.0625,
    };
    let g = lab.grid().unwrap();
    let ns = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut worst = f64::NEG_INFINITY;
    let mut constant = 0.0f64;
    for trial in 0..3u64 {
        let u: Vec<SpaceTimeField> = (0..4)
            .map(|i| windowed_free_wave(&rough_data(&g, -1.0, 24, 1.0, 100 * trial + i).unwrap(), &lab).unwrap())
            .collect();
        let mut nums = Vec::new();
        for &n in &ns {
            let r = commutator_decay_ratio(&u, &MultiplierSpec::new(-0.125, n).unwrap(), 0.55).unwrap();
            nums.push(r.numerator);
            constant = constant.max(r.ratio);
        }
        worst = worst.max(loglog_slope(&ns, &nums).unwrap_or(f64::NAN));
    }
    let line = Line {
        id: "5 commutator",
        passed: band_ok && worst <= -0.4,
        text: format!("{band_text}; generic sweep worst slope {worst:.2} (<= -0.4), C = {constant:.3e}"),
    };
    (line, constant)
}

fn stability_line(id: &'static str, estimates: &[EstimateId]) -> Line {
    let lab = Lab::default();
    let ens = TrialEnsemble::gaussian(100, SEED);
    let params = EstimateParams::with_s(-0.05);
    let mut passed = true;
    let mut parts = Vec::new();
    for &e in estimates {
        let r = run_ensemble(e, &ens, &params, &lab, true).unwrap();
        let factor = r.refinement_factor.unwrap_or(f64::NAN);
        let ok = r.max_ratio.is_finite() && r.trials.len() == 100 && (factor - 1.0) < 0.10;
        passed &= ok;
        parts.push(format!("{e} max {:.4e} growth {:+.2e} (< 0.10)", r.max_ratio, factor - 1.0));
    }
    Line {
        id,
        passed,
        text: parts.join("; "),
    }
}

fn c8_regions() -> Line {
    let (passed, text) = all(&check_regions(SEED).unwrap());
    Line { id: "8 region/resonance", passed, text }
}

fn c9_globalization(decay_constant: f64) -> Line {
    let start = Instant::now();
    let s = -1.0 / 84.0;
    let g = Grid1D::new(128, 40.0).unwrap();
    let dt = 0.01;
    let cfg = SolverConfig::new(g, dt).unwrap();
    let cal = calibrate_epsilon0(&cfg, s, 16.0, decay_constant, &CalibrationOptions::default()).unwrap();
    let eps = cal.epsilon0;
    let bump = Field::from_fn(g, |x| (-(x / 1.5).powi(2)).exp());
    let u0 = bump.scale(0.515 * eps / sobolev_norm(&bump, s));
    let run = GlobalizeConfig {
        epsilon0: eps,
        decay_constant,
        cap_steps: 1000,
        dt,
    };
    let mut ratios = Vec::new();
    let mut budget_ok = true;
    let mut steps = Vec::new();
    for t in [2.0, 4.0, 8.0] {
        let r = globalize(&u0, s, t, &run).unwrap();
        budget_ok &= r.success && r.mode != RunMode::Direct && r.steps.iter().all(|j| j.within_budget);
        steps.push(r.steps.len());
        ratios.push(growth_bound_check(&r).map(|c| c.ratio).unwrap_or(f64::NAN));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let stable = ratios.iter().all(|r| r.is_finite() && (r / mean - 1.0).abs() <= 0.5);
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: "9 globalization demo",
        passed: budget_ok && stable && steps.iter().all(|&n| n <= 1000) && secs <= 1800.0,
        text: format!(
            "eps0 {eps:.4}, steps {steps:?} (<= 1000), every step within budget: {budget_ok}, \
             growth ratios {:?} within ±50% of mean: {stable}, {secs:.1} s (<= 1800 s)",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    }
}

fn c10_suite() -> Line {
    let report = run_validation_suite(SEED).unwrap();
    Line {
        id: "10 validate suite",
        passed: report.passed() && report.seconds <= 300.0,
        text: format!(
            "{} checks, all passed: {}, {:.1} s (<= 300 s)",
            report.checks.len(),
            report.passed(),
            report.seconds
        ),
    }
}

fn main() {
    // `cargo test -- --list` and filters should not trigger the full run
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    // the long almost-conservation solve runs alongside the rest
    let c4 = std::thread::spawn(c4_almost_conservation);
    let (c5, decay_constant) = c5_commutator();
    let mut lines = vec![c1_solver(), c2_parameters(), c3_rescaling(), c5];
    lines.extend([
        stability_line("6 four-linear estimate", &[EstimateId::Qual]),
        stability_line("7 linear/bilinear estimates", &[EstimateId::Lin2, EstimateId::Lin4, EstimateId::Bil]),
        c8_regions(),
        c9_globalization(decay_constant),
        c10_suite(),
    ]);
    lines.insert(3, c4.join().expect("criterion 4 thread"));
    let mut failed = 0;
    for l in &lines {
        println!("{} criterion {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.text);
        failed += usize::from(!l.passed);
    }
    println!("acceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
