//! The global iteration: choose `(C_1, N, lambda)`, rescale the data, take
//! unit-time steps while `||I_N u^lambda(j)||_{L^2}` stays within budget, and
//! map back.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imethod::{i_operator, rescale_data, rescaled_grid, unscale_data, MultiplierSpec};
use crate::norms::{lebesgue_norm, sobolev_norm};
use crate::solver::{advance, step_plan, SolverConfig};
use crate::spectral::{bracket, Field, Grid1D};

/// Lower end of the admissible regularity window `s > -1/42`.
pub const S_CRITICAL: f64 = -1.0 / 42.0;

/// Default step cap for desk-scale runs.
pub const DEFAULT_CAP_STEPS: usize = 1000;

/// Largest rescaled grid a run may allocate.
pub const MAX_RESCALED_POINTS: usize = 1 << 20;

/// Tolerances of the post-hoc parameter checks.
const DEFINING_TOL: f64 = 1e-10;
const DERIVED_TOL: f64 = 1e-8;

fn check_s(s: f64) -> Result<()> {
    if s > S_CRITICAL && s < 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "continuation needs -1/42 < s < 0, i.e. s > -1/42 ≈ -0.0238 and s < 0; got {s}"
        )))
    }
}

/// Exponent of `N` in `N^{(1+42s)/(2(1+6s))} = C_1^3 T`.
pub fn n_exponent(s: f64) -> f64 {
    (1.0 + 42.0 * s) / (2.0 * (1.0 + 6.0 * s))
}

/// Exponent of `N` in `lambda = C_1 N^{-6s/(1+6s)}`.
pub fn lambda_exponent(s: f64) -> f64 {
    -6.0 * s / (1.0 + 6.0 * s)
}

/// Exponent of `<T>` in the growth bound.
pub fn growth_exponent(s: f64) -> f64 {
    -2.0 * s / (1.0 + 42.0 * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationParams {
    pub s: f64,
    pub epsilon0: f64,
    /// `||u0||_{H^s}`.
    pub data_norm: f64,
    pub c1: f64,
    pub n_cut: f64,
    pub lambda: f64,
    /// Horizon `T`; in demo mode the horizon implied by the reduced `N`.
    pub horizon: f64,
    /// `floor(lambda^3 T)`.
    pub steps: usize,
    pub decay_constant: f64,
    /// `N` was reduced to keep `steps` below a cap.
    pub demo: bool,
}

impl ContinuationParams {
    fn build(s: f64, epsilon0: f64, data_norm: f64, c1: f64, n_cut: f64, horizon: f64, demo: bool) -> Result<Self> {
        let lambda = c1 * n_cut.powf(lambda_exponent(s));
        let steps = (lambda.powi(3) * horizon * (1.0 + 1e-12)).floor() as usize;
        let p = Self {
            s,
            epsilon0,
            data_norm,
            c1,
            n_cut,
            lambda,
            horizon,
            steps,
            decay_constant: 0.0,
            demo,
        };
        p.verify()?;
        Ok(p)
    }

    /// Relative defects of the three defining equations and of
    /// `N^{1/2} = lambda^3 T`.
    pub fn defects(&self) -> [f64; 4] {
        let s = self.s;
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        [
            rel(2.0 * self.c1.powf(-1.0 / 6.0 - s) * self.data_norm, self.epsilon0),
            rel(self.n_cut.powf(n_exponent(s)), self.c1.powi(3) * self.horizon),
            rel(self.lambda, self.c1 * self.n_cut.powf(lambda_exponent(s))),
            rel(self.n_cut.sqrt(), self.lambda.powi(3) * self.horizon),
        ]
    }

    pub fn verify(&self) -> Result<()> {
        check_s(self.s)?;
        if ![self.c1, self.n_cut, self.lambda, self.horizon].iter().all(|v| v.is_finite()) {
            return Err(Error::Precondition(format!(
                "parameters overflow (C_1 = {}, N = {}); s is too close to -1/42 for this data",
                self.c1, self.n_cut
            )));
        }
        if !(self.c1 >= 1.0) {
            return Err(Error::Precondition(format!("C_1 = {} < 1: use a direct solve", self.c1)));
        }
        if !(self.n_cut >= 1.0) {
            return Err(Error::Precondition(format!("N = {} < 1: use a direct solve", self.n_cut)));
        }
        if !(self.lambda >= 1.0) {
            return Err(Error::Precondition(format!("lambda = {} < 1", self.lambda)));
        }
        let d = self.defects();
        if d[..3].iter().any(|&v| !(v <= DEFINING_TOL)) || !(d[3] <= DERIVED_TOL) {
            return Err(Error::Precondition(format!("parameter identities violated: {d:?}")));
        }
        if 16.0 * self.decay_constant * self.epsilon0.powi(3) > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!(
                "16 C eps0^3 = {} exceeds 1",
                16.0 * self.decay_constant * self.epsilon0.powi(3)
            )));
        }
        Ok(())
    }

    /// Attach the decay constant `C`, enforcing `16 C eps0^3 <= 1`.
    pub fn with_decay_constant(mut self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("decay constant must be >= 0, got {c}")));
        }
        self.decay_constant = c;
        self.verify()?;
        Ok(self)
    }

    /// `eps0 (1 + j N^{-1/2})`.
    pub fn running_budget(&self, j: usize) -> f64 {
        self.epsilon0 * (1.0 + j as f64 / self.n_cut.sqrt())
    }

    pub fn multiplier(&self) -> Result<MultiplierSpec> {
        MultiplierSpec::new(self.s, self.n_cut)
    }
}

fn c1_from(s: f64, data_norm: f64, epsilon0: f64) -> f64 {
    (2.0 * data_norm / epsilon0).powf(1.0 / (1.0 / 6.0 + s))
}

/// Closed-form solution of the three defining equations.
pub fn solve_parameters(s: f64, data_norm: f64, horizon: f64, epsilon0: f64) -> Result<ContinuationParams> {
    check_s(s)?;
    if !(data_norm > 0.0 && data_norm.is_finite()) {
        return Err(Error::Precondition(format!("data norm must be positive, got {data_norm}")));
    }
    if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
        return Err(Error::Config(format!("eps0 must be positive, got {epsilon0}")));
    }
    if !(horizon >= 1.0 && horizon.is_finite()) {
        return Err(Error::Precondition(format!("horizon must satisfy T >= 1, got {horizon}")));
    }
    let c1 = c1_from(s, data_norm, epsilon0);
    let n_cut = (c1.powi(3) * horizon).powf(1.0 / n_exponent(s));
    ContinuationParams::build(s, epsilon0, data_norm, c1, n_cut, horizon, false)
}

/// Parameters with `N` reduced to `cap^2`, so that exactly `cap` unit steps
/// are taken; the horizon is then `N^{1/2} / lambda^3` rather than the
/// requested one. All three defining equations still hold.
pub fn demo_parameters(s: f64, data_norm: f64, epsilon0: f64, cap: usize) -> Result<ContinuationParams> {
    check_s(s)?;
    if cap == 0 {
        return Err(Error::Config("cap_steps must be >= 1".into()));
    }
    let c1 = c1_from(s, data_norm, epsilon0);
    let n_cut = (cap as f64).powi(2);
    let lambda = c1 * n_cut.powf(lambda_exponent(s));
    let horizon = n_cut.sqrt() / lambda.powi(3);
    ContinuationParams::build(s, epsilon0, data_norm, c1, n_cut, horizon, true)
}

/// `delta = c_loc ||I_N u0||^{-18/(6s+1) - eta}`.
pub fn lifespan_estimate(u0: &Field, s: f64, n_cut: f64, c_loc: f64, eta: f64) -> Result<f64> {
    if !(s > -1.0 / 6.0) {
        return Err(Error::Precondition(format!("lifespan needs s > -1/6, got {s}")));
    }
    let spec = MultiplierSpec::new(s.min(0.0), n_cut)?;
    let norm = lebesgue_norm(&i_operator(u0, &spec), 2.0);
    if norm == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(c_loc * norm.powf(-18.0 / (6.0 * s + 1.0) - eta))
}

/// Knobs of [`calibrate_epsilon0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Upper end of the search when the decay constant gives no cap.
    pub epsilon_max: f64,
    pub probes: usize,
    pub seed: u64,
    /// Relative `L^2` drift a unit solve may show and still count as a success.
    pub drift_tolerance: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            epsilon_max: 4.0,
            probes: 8,
            seed: 0,
            drift_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub epsilon0: f64,
    /// `(1/(16 C))^{1/3}`, or `epsilon_max` when `C = 0`.
    pub cap: f64,
    /// `(eps, unit solve succeeded)` in probe order.
    pub probes: Vec<(f64, bool)>,
}

/// Smooth random probe: three Gaussians with random centres, widths and signs.
fn probe_data(grid: &Grid1D, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quarter = 0.25 * grid.box_length();
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-quarter..quarter) * 0.5,
                rng.random_range(1.0..2.0),
                if rng.random_bool(0.5) { 1.0 } else { -1.0 },
            )
        })
        .collect();
    Field::from_fn(*grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, sgn)| sgn * (-((x - c) / w).powi(2)).exp())
            .sum()
    })
}

/// Largest probed `eps0 <= cap` for which a unit-time solve from smooth data
/// with `||I_N phi|| = 2 eps0` succeeds. The cap is probed first, then the
/// interval below it is bisected.
pub fn calibrate_epsilon0(
    cfg: &SolverConfig,
    s: f64,
    n_ref: f64,
    decay_constant: f64,
    opts: &CalibrationOptions,
) -> Result<Calibration> {
    check_s(s)?;
    if !(decay_constant >= 0.0 && decay_constant.is_finite()) {
        return Err(Error::Config(format!("decay constant must be >= 0, got {decay_constant}")));
    }
    let cap = if decay_constant > 0.0 {
        (1.0 / (16.0 * decay_constant)).cbrt().min(opts.epsilon_max)
    } else {
        opts.epsilon_max
    };
    let spec = MultiplierSpec::new(s, n_ref)?;
    let phi = probe_data(&cfg.grid, opts.seed);
    let base = lebesgue_norm(&i_operator(&phi, &spec), 2.0);
    let works = |eps: f64| -> bool {
        let data = phi.scale(2.0 * eps / base);
        let m0 = lebesgue_norm(&data, 2.0).powi(2);
        match advance(&data, 1.0, cfg) {
            Ok(u1) => {
                let m1 = lebesgue_norm(&u1, 2.0).powi(2);
                (m1 - m0).abs() <= opts.drift_tolerance * m0
            }
            Err(_) => false,
        }
    };
    let mut probes = Vec::with_capacity(opts.probes);
    let ok = works(cap);
    probes.push((cap, ok));
    if ok {
        return Ok(Calibration { epsilon0: cap, cap, probes });
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 1..opts.probes.max(1) {
        let mid = 0.5 * (lo + hi);
        let ok = works(mid);
        probes.push((mid, ok));
        if ok {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return Err(Error::Precondition(
            "no admissible eps0 found at this resolution".into(),
        ));
    }
    Ok(Calibration { epsilon0: lo, cap, probes })
}

/// How a run was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Full parameter set, `floor(lambda^3 T)` unit steps.
    Iteration,
    /// `N` reduced to respect the step cap; horizon reinterpreted.
    Demo,
    /// Parameters degenerate (`C_1 < 1` or `N < 1`): plain solve on `[0, T]`.
    Direct,
    /// Zero data.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub j: usize,
    /// `||I_N u^lambda(j)||_{L^2}`.
    pub i_norm: f64,
    /// `eps0 (1 + j N^{-1/2})`.
    pub budget: f64,
    pub within_budget: bool,
}

/// Settings of one [`globalize`] run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalizeConfig {
    pub epsilon0: f64,
    pub decay_constant: f64,
    pub cap_steps: usize,
    /// Time step of the unit solves.
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalRunReport {
    pub mode: RunMode,
    pub s: f64,
    pub requested_horizon: f64,
    pub params: Option<ContinuationParams>,
    /// Points of the rescaled grid (memory footprint of one state).
    pub rescaled_points: usize,
    pub initial_i_norm: f64,
    pub steps: Vec<StepRecord>,
    /// `sup ||u(t)||_{H^s}` over the recorded times.
    pub sup_hs_norm: f64,
    pub data_norm: f64,
    /// `<T>^{-2s/(1+42s)} ||u0||_{H^s}` with `T` the horizon actually covered.
    pub bound: f64,
    /// First step at which `||I_N u^lambda(j)|| > 2 eps0`.
    pub violation_step: Option<usize>,
    pub success: bool,
}

impl GlobalRunReport {
    pub fn covered_horizon(&self) -> f64 {
        self.params.map_or(self.requested_horizon, |p| p.horizon)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    pub fn write_steps_csv<W: Write>(&self, preamble: &[String], mut w: W) -> std::io::Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "j,i_norm,budget,within_budget")?;
        for r in &self.steps {
            writeln!(w, "{},{},{},{}", r.j, r.i_norm, r.budget, r.within_budget)?;
        }
        Ok(())
    }
}

fn bound_value(s: f64, horizon: f64, data_norm: f64) -> f64 {
    bracket(horizon).powf(growth_exponent(s)) * data_norm
}

fn direct_run(u0: &Field, s: f64, horizon: f64, solver: &SolverConfig, data_norm: f64) -> Result<GlobalRunReport> {
    let (units, dt) = step_plan(horizon, 1.0);
    let mut u = u0.clone();
    let mut sup = data_norm;
    for _ in 0..units {
        u = advance(&u, dt, solver)?;
        sup = sup.max(sobolev_norm(&u, s));
    }
    Ok(GlobalRunReport {
        mode: RunMode::Direct,
        s,
        requested_horizon: horizon,
        params: None,
        rescaled_points: u0.grid().n(),
        initial_i_norm: data_norm,
        steps: Vec::new(),
        sup_hs_norm: sup,
        data_norm,
        bound: bound_value(s, horizon, data_norm),
        violation_step: None,
        success: true,
    })
}

/// Run the rescaled iteration for `u0` up to horizon `T`.
pub fn globalize(u0: &Field, s: f64, horizon: f64, cfg: &GlobalizeConfig) -> Result<GlobalRunReport> {
    check_s(s)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Precondition(format!("horizon must be positive, got {horizon}")));
    }
    let data_norm = sobolev_norm(u0, s);
    if data_norm == 0.0 {
        return Ok(GlobalRunReport {
            mode: RunMode::Trivial,
            s,
            requested_horizon: horizon,
            params: None,
            rescaled_points: u0.grid().n(),
            initial_i_norm: 0.0,
            steps: Vec::new(),
            sup_hs_norm: 0.0,
            data_norm: 0.0,
            bound: 0.0,
            violation_step: None,
            success: true,
        });
    }
    let base_solver = SolverConfig::new(*u0.grid(), cfg.dt)?;
    let params = match solve_parameters(s, data_norm, horizon.max(1.0), cfg.epsilon0) {
        Ok(p) if horizon >= 1.0 => p,
        Ok(_) | Err(Error::Precondition(_)) => return direct_run(u0, s, horizon, &base_solver, data_norm),
        Err(e) => return Err(e),
    };
    let (params, mode) = if params.steps > cfg.cap_steps {
        (demo_parameters(s, data_norm, cfg.epsilon0, cfg.cap_steps)?, RunMode::Demo)
    } else {
        (params, RunMode::Iteration)
    };
    let params = params.with_decay_constant(cfg.decay_constant)?;
    let spec = params.multiplier()?;
    let points = rescaled_grid(u0.grid(), params.lambda)?.n();
    if points > MAX_RESCALED_POINTS {
        return Err(Error::Precondition(format!(
            "rescaled grid needs {points} points (limit {MAX_RESCALED_POINTS}); lower cap_steps or eps0"
        )));
    }
    let mut v = rescale_data(u0, params.lambda)?;
    let solver = base_solver.with_grid(*v.grid());
    let initial_i_norm = lebesgue_norm(&i_operator(&v, &spec), 2.0);
    let mut steps = Vec::with_capacity(params.steps);
    let mut sup = data_norm;
    let mut violation = None;
    for j in 1..=params.steps {
        v = advance(&v, 1.0, &solver)?;
        let i_norm = lebesgue_norm(&i_operator(&v, &spec), 2.0);
        let budget = params.running_budget(j);
        steps.push(StepRecord {
            j,
            i_norm,
            budget,
            within_budget: i_norm <= budget,
        });
        sup = sup.max(sobolev_norm(&unscale_data(&v, params.lambda, u0.grid())?, s));
        if i_norm > 2.0 * params.epsilon0 {
            violation = Some(j);
            break;
        }
    }
    let success = violation.is_none() && steps.iter().all(|r| r.within_budget);
    Ok(GlobalRunReport {
        mode,
        s,
        requested_horizon: horizon,
        params: Some(params),
        rescaled_points: v.grid().n(),
        initial_i_norm,
        steps,
        sup_hs_norm: sup,
        data_norm,
        bound: bound_value(s, params.horizon, data_norm),
        violation_step: violation,
        success,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub observed: f64,
    pub bound: f64,
    pub ratio: f64,
}

pub fn growth_bound_check(report: &GlobalRunReport) -> Result<GrowthCheck> {
    if !report.success {
        return Err(Error::Precondition("growth check needs a successful run".into()));
    }
    let ratio = if report.bound == 0.0 {
        0.0
    } else {
        report.sup_hs_norm / report.bound
    };
    Ok(GrowthCheck {
        observed: report.sup_hs_norm,
        bound: report.bound,
        ratio,
    })
}
