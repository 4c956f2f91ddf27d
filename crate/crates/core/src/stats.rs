//! Summary statistics, group comparisons and power estimation.
//!
//! Tests are normal-approximation z tests, one-sided toward positive spread.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::design::{
    mix_seed, Arm, DesignConfig, DesignKind, Experiment, SubjectModel, TrialRecord, TruthModel,
};
use crate::error::{input, parameter, Error, Result};

/// Resamples used for the E3 assignment-bootstrap standard error.
pub const E3_BOOTSTRAP_RESAMPLES: usize = 1000;

const BOOTSTRAP_SALT: u64 = 0xB007;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadSummary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; `None` for a single observation.
    pub sd: Option<f64>,
    pub se: Option<f64>,
}

pub fn summarize(spreads: &[i64]) -> Result<SpreadSummary> {
    summarize_f64(&spreads.iter().map(|&x| x as f64).collect::<Vec<_>>())
}

pub fn summarize_f64(values: &[f64]) -> Result<SpreadSummary> {
    let count = values.len();
    if count == 0 {
        return Err(input("cannot summarize an empty sample"));
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    let (sd, se) = if count >= 2 {
        let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
        let sd = (ss / (count - 1) as f64).sqrt();
        (Some(sd), Some(sd / (count as f64).sqrt()))
    } else {
        (None, None)
    };
    Ok(SpreadSummary {
        count,
        mean,
        sd,
        se,
    })
}

impl SpreadSummary {
    /// One-sample z statistic against zero; `None` when the standard error
    /// is missing or zero.
    pub fn z(&self) -> Option<f64> {
        self.se.filter(|&se| se > 0.0).map(|se| self.mean / se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupComparison {
    pub difference: f64,
    pub se: f64,
    pub z: f64,
}

/// Welch-style comparison of two independent groups.
pub fn compare(a: &SpreadSummary, b: &SpreadSummary) -> Result<GroupComparison> {
    let (Some(se_a), Some(se_b)) = (a.se, b.se) else {
        return Err(input("both groups need at least two observations"));
    };
    let se = (se_a * se_a + se_b * se_b).sqrt();
    if se == 0.0 {
        return Err(Error::DegenerateComparison);
    }
    let difference = a.mean - b.mean;
    Ok(GroupComparison {
        difference,
        se,
        z: difference / se,
    })
}

/// Summary of one simulated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordsSummary {
    pub design: DesignKind,
    pub overall: SpreadSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experimental: Option<SpreadSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<SpreadSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<GroupComparison>,
    /// Subjects whose choice agreed with their first ranking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistent_only: Option<SpreadSummary>,
    pub consistent_fraction: f64,
}

pub fn summarize_records(design: DesignKind, records: &[TrialRecord]) -> Result<RecordsSummary> {
    let all: Vec<i64> = records.iter().map(|r| r.spread).collect();
    let overall = summarize(&all)?;
    let arm = |which: Arm| -> Option<SpreadSummary> {
        let xs: Vec<i64> = records
            .iter()
            .filter(|r| r.arm == which)
            .map(|r| r.spread)
            .collect();
        summarize(&xs).ok()
    };
    let (experimental, control) = if design == DesignKind::E0 {
        (arm(Arm::Experimental), arm(Arm::Control))
    } else {
        (None, None)
    };
    let difference = match (&experimental, &control) {
        (Some(a), Some(b)) => compare(a, b).ok(),
        _ => None,
    };
    let consistent: Vec<i64> = records
        .iter()
        .filter(|r| r.consistent && r.arm != Arm::Control)
        .map(|r| r.spread)
        .collect();
    let consistent_fraction =
        records.iter().filter(|r| r.consistent).count() as f64 / records.len() as f64;
    Ok(RecordsSummary {
        design,
        overall,
        experimental,
        control,
        difference,
        consistent_only: summarize(&consistent).ok(),
        consistent_fraction,
    })
}

/// Test statistic of one experiment and the estimate it standardizes.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Outcome {
    estimate: f64,
    se: f64,
}

impl Outcome {
    fn z(&self) -> Option<f64> {
        (self.se > 0.0).then(|| self.estimate / self.se)
    }
}

fn outcome(design: DesignKind, records: &[TrialRecord]) -> Result<Outcome> {
    let summary = summarize_records(design, records)?;
    if design == DesignKind::E0 {
        let (Some(a), Some(b)) = (summary.experimental, summary.control) else {
            return Err(input("E0 needs at least two subjects per arm"));
        };
        return Ok(match compare(&a, &b) {
            Ok(c) => Outcome {
                estimate: c.difference,
                se: c.se,
            },
            Err(Error::DegenerateComparison) => Outcome {
                estimate: a.mean - b.mean,
                se: 0.0,
            },
            Err(e) => return Err(e),
        });
    }
    Ok(Outcome {
        estimate: summary.overall.mean,
        se: summary.overall.se.unwrap_or(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub design: String,
    pub model: String,
    pub subjects: usize,
    pub replications: usize,
    pub alpha: f64,
    pub rejection_rate: f64,
    /// Average over replications of the mean spread (E0: of the difference).
    pub mean: f64,
    /// Average over replications of the usual standard error.
    pub se: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se_bootstrap: Option<f64>,
}

/// Upper-tail critical value of the standard normal.
pub fn critical_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(parameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha))
}

/// Fraction of `replications` independent experiments whose one-sided z test
/// rejects at level `alpha`. A zero standard error never rejects.
pub fn power_estimate(
    config: &DesignConfig,
    model: SubjectModel,
    truths: TruthModel,
    replications: usize,
    alpha: f64,
    seed: u64,
) -> Result<PowerReport> {
    if replications == 0 {
        return Err(parameter("need at least one replication"));
    }
    let critical = critical_z(alpha)?;
    let outcomes: Vec<Outcome> = (0..replications)
        .into_par_iter()
        .map(|rep| {
            let exp = Experiment::new(config.clone(), model, truths, mix_seed(seed, rep as u64))?;
            outcome(config.kind(), &exp.run()?)
        })
        .collect::<Result<_>>()?;
    let rejections = outcomes
        .iter()
        .filter(|o| o.z().is_some_and(|z| z > critical))
        .count();
    let reps = replications as f64;
    let se_bootstrap = if config.kind() == DesignKind::E3 {
        Some(assignment_bootstrap_se(
            config,
            model,
            truths,
            mix_seed(seed, 0),
            E3_BOOTSTRAP_RESAMPLES,
        )?)
    } else {
        None
    };
    Ok(PowerReport {
        design: config.kind().to_string(),
        model: model.to_string(),
        subjects: config.subjects(),
        replications,
        alpha,
        rejection_rate: rejections as f64 / reps,
        mean: outcomes.iter().map(|o| o.estimate).sum::<f64>() / reps,
        se: outcomes.iter().map(|o| o.se).sum::<f64>() / reps,
        se_bootstrap,
    })
}

/// Standard deviation of the E3 mean spread over re-randomized
/// subject-to-pair assignments, each subject keeping its own random stream.
pub fn assignment_bootstrap_se(
    config: &DesignConfig,
    model: SubjectModel,
    truths: TruthModel,
    seed: u64,
    resamples: usize,
) -> Result<f64> {
    if config.kind() != DesignKind::E3 {
        return Err(input("assignment bootstrap applies to E3 only"));
    }
    if resamples < 2 {
        return Err(parameter("need at least two resamples"));
    }
    let means: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let assignment_seed = mix_seed(seed ^ BOOTSTRAP_SALT, b as u64);
            let exp = Experiment::with_assignment_seed(
                config.clone(),
                model,
                truths,
                seed,
                assignment_seed,
            )?;
            let records = exp.run()?;
            Ok(records.iter().map(|r| r.spread as f64).sum::<f64>() / records.len() as f64)
        })
        .collect::<Result<_>>()?;
    Ok(summarize_f64(&means)?.sd.unwrap_or(0.0))
}
