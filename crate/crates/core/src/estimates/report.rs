//! Ensemble runs and their JSON / CSV reports.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_ratio, EstimateId, EstimateParams, Lab, TrialEnsemble};
use crate::error::{Error, Result};

/// Allowed relative growth of the ensemble maximum under one refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Ensemble seed; the trial index selects the generator stream.
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate_id: EstimateId,
    pub params: EstimateParams,
    pub lab: Lab,
    pub ensemble: TrialEnsemble,
    pub trials: Vec<TrialRecord>,
    pub rejected: usize,
    pub max_ratio: f64,
    /// Ensemble maximum on the refined lab, when requested.
    pub refined_max_ratio: Option<f64>,
    /// `refined_max_ratio / max_ratio`.
    pub refinement_factor: Option<f64>,
}

impl EstimateReport {
    /// Finite maximum and, when refined, growth below [`REFINEMENT_TOLERANCE`].
    pub fn verified(&self) -> bool {
        self.max_ratio.is_finite()
            && self
                .refinement_factor
                .is_none_or(|f| f.is_finite() && f < 1.0 + REFINEMENT_TOLERANCE)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    pub fn write_csv<W: Write>(&self, preamble: &[String], mut w: W) -> std::io::Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "estimate_id,trial,seed,lhs,rhs,ratio")?;
        for t in &self.trials {
            writeln!(w, "{},{},{},{},{},{}", self.estimate_id, t.trial, t.seed, t.lhs, t.rhs, t.ratio)?;
        }
        Ok(())
    }
}

fn run_lab(
    id: EstimateId,
    ensemble: &TrialEnsemble,
    params: &EstimateParams,
    lab: &Lab,
) -> Result<(Vec<TrialRecord>, usize)> {
    let results: Vec<Result<Option<TrialRecord>>> = (0..ensemble.count)
        .into_par_iter()
        .map(|trial| {
            let inputs = ensemble.inputs(trial, id.arity(), lab)?;
            match estimate_ratio(id, &inputs, params) {
                Ok(r) => Ok(Some(TrialRecord {
                    trial,
                    seed: ensemble.seed,
                    lhs: r.lhs,
                    rhs: r.rhs,
                    ratio: r.ratio,
                })),
                Err(Error::DegenerateTrial) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut records = Vec::new();
    let mut rejected = 0;
    for r in results {
        match r? {
            Some(rec) => records.push(rec),
            None => rejected += 1,
        }
    }
    Ok((records, rejected))
}

fn max_ratio(records: &[TrialRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Precondition("every trial was rejected".into()));
    }
    let mut best = 0.0f64;
    for r in records {
        if !r.ratio.is_finite() {
            return Err(Error::Precondition(format!("non-finite ratio in trial {}", r.trial)));
        }
        best = best.max(r.ratio);
    }
    Ok(best)
}

/// Run `id` over the ensemble on `lab` and, if `refine`, once more on
/// `lab.refined()`.
pub fn run_ensemble(
    id: EstimateId,
    ensemble: &TrialEnsemble,
    params: &EstimateParams,
    lab: &Lab,
    refine: bool,
) -> Result<EstimateReport> {
    params.validate_for(id)?;
    ensemble.validate()?;
    lab.validate()?;
    let (trials, rejected) = run_lab(id, ensemble, params, lab)?;
    let max = max_ratio(&trials)?;
    let refined = if refine {
        let (fine, _) = run_lab(id, ensemble, params, &lab.refined())?;
        Some(max_ratio(&fine)?)
    } else {
        None
    };
    Ok(EstimateReport {
        estimate_id: id,
        params: *params,
        lab: *lab,
        ensemble: *ensemble,
        trials,
        rejected,
        max_ratio: max,
        refined_max_ratio: refined,
        refinement_factor: refined.map(|r| r / max),
    })
}
