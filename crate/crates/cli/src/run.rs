//! Command execution. Every artifact is written only after its computation
//! finishes, in a fixed order, so identical configurations produce
//! identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use gkdv_core::continuation::{
    calibrate_epsilon0, globalize, growth_bound_check, CalibrationOptions, GlobalRunReport, GlobalizeConfig,
};
use gkdv_core::estimates::run_ensemble;
use gkdv_core::imethod::{increment_sweep, loglog_slope, rough_data, write_sweep_csv};
use gkdv_core::norms::sobolev_norm;
use gkdv_core::solver::{encode_spectral_dump, evolve, pde_residual, soliton, write_trajectory_csv};
use gkdv_core::spectral::Field;
use gkdv_core::validation::{recentred_shape_error, run_validation_suite};

use crate::config::{Command, Preset, RunConfig};
use crate::error::CliError;
use crate::manifest::Manifest;

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub manifest_hash: String,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

struct Sink<'a> {
    dir: &'a Path,
    manifest: &'a Manifest,
    written: Vec<PathBuf>,
}

impl Sink<'_> {
    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, report: Value) -> Result<(), CliError> {
        let text = self.manifest.wrap(report);
        self.bytes(name, text.as_bytes())
    }

    fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(&[String], &mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&self.manifest.csv_preamble(), &mut buf).map_err(|e| CliError::io(self.dir.join(name), e))?;
        self.bytes(name, &buf)
    }
}

fn value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report is serialisable")
}

/// Validate the output directory, write the manifest and run the command.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    let manifest = Manifest::new(cfg);
    let mut sink = Sink {
        dir: &cfg.out,
        manifest: &manifest,
        written: Vec::new(),
    };
    sink.bytes("manifest.json", manifest.to_json().as_bytes())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| match cfg.command {
        Command::Solve => solve(cfg, &mut sink),
        Command::Almost => almost(cfg, &mut sink),
        Command::Estimate => estimate(cfg, &mut sink),
        Command::Globalize => run_globalize(cfg, &mut sink),
        Command::Validate => validate(cfg, &mut sink),
    });
    let summary = result?;
    let artifacts = sink.written;
    Ok(Outcome {
        manifest_hash: manifest.hash,
        artifacts,
        summary,
    })
}

fn initial_data(cfg: &RunConfig) -> Result<Field, CliError> {
    let g = cfg.solver.grid;
    let d = &cfg.data;
    Ok(match cfg.solve.preset {
        Preset::Soliton => soliton(cfg.solve.c, &g)?,
        Preset::Rough => rough_data(&g, d.slope, d.k_max, d.l2, cfg.seed)?,
        Preset::Gaussian => Field::from_fn(g, |x| d.amplitude * (-(x / d.width).powi(2)).exp()),
    })
}

fn solve(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let u0 = initial_data(cfg)?;
    let opts = &cfg.solve;
    let traj = evolve(&u0, opts.horizon, &cfg.solver, opts.stride)?;
    sink.csv("trajectory.csv", |p, w| write_trajectory_csv(&traj, p, w))?;
    sink.csv("conservation.csv", |p, w| {
        use std::io::Write;
        for line in p {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "t,mass,energy")?;
        for s in &traj.snapshots {
            writeln!(w, "{},{},{}", s.t, s.mass, s.energy)?;
        }
        Ok(())
    })?;
    if opts.dump {
        sink.bytes("trajectory.gksd", &encode_spectral_dump(&traj))?;
    }
    let t_end = traj.snapshots.last().map_or(0.0, |s| s.t);
    let shape_error = match opts.preset {
        Preset::Soliton => Some(recentred_shape_error(traj.last(), opts.c, t_end)?),
        _ => None,
    };
    // needs uniformly spaced snapshots
    let residual = pde_residual(&traj).ok();
    let report = json!({
        "preset": format!("{:?}", opts.preset).to_lowercase(),
        "final_time": t_end,
        "snapshots": traj.snapshots.len(),
        "mass_drift": traj.mass_drift(),
        "energy_drift": traj.energy_drift(),
        "pde_residual": residual,
        "shape_error": shape_error,
    });
    sink.json("solve.json", report)?;
    Ok(format!(
        "solve: T = {t_end}, mass drift {:.3e}, energy drift {:.3e}",
        traj.mass_drift(),
        traj.energy_drift()
    ))
}

fn almost(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let g = cfg.solver.grid;
    let d = &cfg.data;
    let u0 = rough_data(&g, d.slope, d.k_max, d.l2, cfg.seed)?;
    let a = &cfg.almost;
    let rows = increment_sweep(&u0, a.s, &a.n_list, a.delta, &cfg.solver)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n_cut).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.increment.abs()).collect();
    let slope = loglog_slope(&xs, &ys);
    sink.csv("sweep.csv", |p, w| write_sweep_csv(&rows, p, w))?;
    sink.json(
        "almost.json",
        json!({ "s": a.s, "delta": a.delta, "rows": value(&rows), "slope": slope }),
    )?;
    Ok(match slope {
        Some(m) => format!("almost: {} cut-offs, fitted slope {m:.3}", rows.len()),
        None => format!("almost: {} cut-offs, no slope (need two non-zero increments)", rows.len()),
    })
}

fn estimate(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let e = &cfg.estimate;
    let mut summary = Vec::new();
    let mut failed = Vec::new();
    let mut text = String::new();
    for &id in &e.ids {
        let r = run_ensemble(id, &e.ensemble, &e.params, &e.lab, e.refine)?;
        sink.json(&format!("estimate_{id}.json"), value(&r))?;
        sink.csv(&format!("estimate_{id}.csv"), |p, w| r.write_csv(p, w))?;
        if !r.verified() {
            failed.push(id.to_string());
        }
        let _ = writeln!(
            text,
            "{id}: max ratio {:.4e}, refinement factor {}, verified {}",
            r.max_ratio,
            r.refinement_factor.map_or("-".into(), |f| format!("{f:.4}")),
            r.verified()
        );
        summary.push(json!({
            "estimate_id": id.to_string(),
            "max_ratio": r.max_ratio,
            "refined_max_ratio": r.refined_max_ratio,
            "refinement_factor": r.refinement_factor,
            "rejected": r.rejected,
            "verified": r.verified(),
        }));
    }
    sink.json("estimates.json", Value::Array(summary))?;
    if !failed.is_empty() {
        return Err(CliError::Estimate(format!("not verified: {}", failed.join(", "))));
    }
    Ok(text.trim_end().to_string())
}

fn run_globalize(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let g = &cfg.globalize;
    let epsilon0 = match g.epsilon0_override {
        Some(e) => e,
        None => {
            let opts = CalibrationOptions {
                seed: cfg.seed,
                ..CalibrationOptions::default()
            };
            let cal = calibrate_epsilon0(&cfg.solver, g.s, g.n_ref, g.decay_constant, &opts)?;
            sink.json("calibration.json", value(&cal))?;
            cal.epsilon0
        }
    };
    let grid = cfg.solver.grid;
    let bump = Field::from_fn(grid, |x| (-(x / g.data_width).powi(2)).exp());
    let u0 = bump.scale(g.data_ratio * epsilon0 / sobolev_norm(&bump, g.s));
    let run_cfg = GlobalizeConfig {
        epsilon0,
        decay_constant: g.decay_constant,
        cap_steps: g.cap_steps,
        dt: cfg.solver.dt,
    };
    let reports: Vec<GlobalRunReport> = g
        .t_list
        .par_iter()
        .map(|&t| globalize(&u0, g.s, t, &run_cfg))
        .collect::<Result<_, _>>()?;
    let mut failures = Vec::new();
    let mut growth = Vec::new();
    for (t, r) in g.t_list.iter().zip(&reports) {
        sink.json(&format!("globalize_T{t}.json"), value(r))?;
        sink.csv(&format!("steps_T{t}.csv"), |p, w| r.write_steps_csv(p, w))?;
        let check = growth_bound_check(r).ok();
        if !r.success {
            failures.push(match r.violation_step {
                Some(j) => format!("T = {t}: ||I_N u^lambda({j})|| > 2 eps0"),
                None => format!("T = {t}: running budget exceeded"),
            });
        }
        growth.push((*t, r, check));
    }
    sink.csv("growth.csv", |p, w| {
        use std::io::Write;
        for line in p {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "T,mode,steps,observed,bound,ratio,success")?;
        for (t, r, c) in &growth {
            let (o, b, q) = c.map_or((f64::NAN, f64::NAN, f64::NAN), |c| (c.observed, c.bound, c.ratio));
            let mode = serde_json::to_value(r.mode).ok().and_then(|v| v.as_str().map(String::from));
            writeln!(w, "{t},{},{},{o},{b},{q},{}", mode.unwrap_or_default(), r.steps.len(), r.success)?;
        }
        Ok(())
    })?;
    if !failures.is_empty() {
        return Err(CliError::Budget(failures.join("; ")));
    }
    let ratios: Vec<String> = growth
        .iter()
        .map(|(t, _, c)| format!("T={t}: {:.4}", c.map_or(f64::NAN, |c| c.ratio)))
        .collect();
    Ok(format!("globalize: eps0 {epsilon0:.4}, growth ratios {}", ratios.join(", ")))
}

fn validate(cfg: &RunConfig, sink: &mut Sink) -> Result<String, CliError> {
    let report = run_validation_suite(cfg.seed)?;
    sink.json("validation.json", value(&report))?;
    let mut text = String::new();
    for c in &report.checks {
        let _ = writeln!(
            text,
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    if !report.passed() {
        return Err(CliError::Estimate(format!("validation suite failed\n{}", text.trim_end())));
    }
    Ok(text.trim_end().to_string())
}
