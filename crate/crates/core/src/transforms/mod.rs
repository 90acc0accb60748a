//! Protocol rewrites with measured cost and error contracts.
//!
//! Each transform returns the rewritten protocol together with a report that
//! holds the bound it promises and the quantity measured on the result by
//! exact enumeration. [`run_pipeline`] chains them and turns every report
//! into pass/fail [`Check`]s.

mod bk;
mod compress;
mod newman;
mod truncate;

#[cfg(test)]
mod tests;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::smp::{Evaluator, FunctionTable, Model, SmpProtocol};
use crate::{Error, Result};

pub use bk::{bk_derandomize_alice, bk_t, BkReport};
pub use compress::{
    hjmr_compress, hjmr_compress_with, ic_to_ccav, ic_to_ccav_with, CompressReport, SimulatorReport, DEFAULT_CAP,
};
pub use newman::{newman_derandomize, newman_t, DerandomizationReport, NewmanReport};
pub use truncate::{markov_truncate, TruncateReport, TRUNCATE_SLACK};

/// Total-variation distance still counted as an exact match.
pub const EXACT_TV: f64 = 1e-12;

/// Slack granted to measured errors against their bounds.
pub const ERROR_TOL: f64 = 1e-12;

/// Default number of candidate sets tried by the derandomizers.
pub const DEFAULT_RESTARTS: usize = 1000;

/// Largest output-distribution distance between two protocols over all inputs.
pub fn max_tv(before: &Evaluator, after: &Evaluator) -> f64 {
    let p = before.protocol();
    let mut worst: f64 = 0.0;
    for x in 0..p.x.len() {
        for y in 0..p.y.len() {
            let d = crate::infotheory::total_variation(&before.output_probs(x, y), &after.output_probs(x, y));
            worst = worst.max(d);
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum PipelineStage {
    Compress,
    Truncate { delta: f64 },
    Newman { delta: f64 },
    Bk { delta: f64, t: Option<usize> },
}

impl fmt::Display for PipelineStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineStage::Compress => write!(f, "compress"),
            PipelineStage::Truncate { delta } => write!(f, "truncate:{delta}"),
            PipelineStage::Newman { delta } => write!(f, "newman:{delta}"),
            PipelineStage::Bk { delta, t: None } => write!(f, "bk:{delta}"),
            PipelineStage::Bk { delta, t: Some(t) } => write!(f, "bk:{delta},{t}"),
        }
    }
}

impl FromStr for PipelineStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let num = |v: &str| -> Result<f64> {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::domain(format!("stage `{s}`: `{v}` is not a number")))
        };
        match name.trim() {
            "compress" if args.is_empty() => Ok(PipelineStage::Compress),
            "truncate" => Ok(PipelineStage::Truncate { delta: num(args)? }),
            "newman" => Ok(PipelineStage::Newman { delta: num(args)? }),
            "bk" => {
                let (d, t) = match args.split_once(',') {
                    Some((d, t)) => {
                        let t = t
                            .trim()
                            .parse::<usize>()
                            .map_err(|_| Error::domain(format!("stage `{s}`: `{t}` is not a sample count")))?;
                        (d, Some(t))
                    }
                    None => (args, None),
                };
                Ok(PipelineStage::Bk { delta: num(d)?, t })
            }
            _ => Err(Error::domain(format!(
                "unknown stage `{s}` (expected compress, truncate:δ, newman:δ or bk:δ[,t])"
            ))),
        }
    }
}

/// Parses `compress -> truncate:0.25 -> newman:0.25`. Stages may also be
/// separated by `→` or `;`. An empty string is the empty pipeline.
pub fn parse_pipeline(spec: &str) -> Result<Vec<PipelineStage>> {
    spec.replace("->", ";")
        .replace('→', ";")
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, measured: f64, bound: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            bound,
            pass: measured <= bound + tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub model_before: Model,
    pub model_after: Model,
    pub checks: Vec<Check>,
    pub detail: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<StageReport>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub restarts: usize,
    pub cap: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            cap: DEFAULT_CAP,
        }
    }
}

fn detail<T: Serialize>(report: &T) -> serde_json::Value {
    serde_json::to_value(report).expect("reports serialize")
}

/// Applies `stages` in order. Stage `i` seeds its search with `cfg.seed + i`.
pub fn run_pipeline(
    p: &SmpProtocol,
    f: &FunctionTable,
    stages: &[PipelineStage],
    cfg: &PipelineConfig,
) -> Result<(SmpProtocol, PipelineReport)> {
    p.validate()?;
    let mut cur = p.clone();
    let mut reports = Vec::with_capacity(stages.len());
    for (i, stage) in stages.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let model_before = cur.model;
        let (next, checks, value) = match *stage {
            PipelineStage::Compress => {
                let (q, r) = ic_to_ccav_with(&cur, cfg.cap)?;
                let checks = vec![
                    Check::at_most("max_tv", r.max_tv, 0.0, EXACT_TV),
                    Check::at_most("cc_av <= ic + 2 g1(ic)", r.cc_av, r.bound, 0.0),
                ];
                (q, checks, detail(&r))
            }
            PipelineStage::Truncate { delta } => {
                let (q, r) = markov_truncate(&cur, f, delta)?;
                let checks = vec![
                    Check::at_most("worst_error <= eps + delta", r.worst_error, r.error_bound, ERROR_TOL),
                    Check::at_most("cc_sh <= cc_av / delta + 4", r.cc_sh_after as f64, r.cost_bound, 0.0),
                ];
                (q, checks, detail(&r))
            }
            PipelineStage::Newman { delta } => {
                let (q, r) = newman_derandomize(&cur, f, delta, cfg.restarts, seed)?;
                let checks = vec![
                    Check::at_most("worst_error <= eps + delta", r.worst_error, r.error_bound, ERROR_TOL),
                    Check::at_most(
                        "cc_priv <= cc_sh + 2 ceil(log2 t)",
                        r.cc_priv_after as f64,
                        r.cost_bound,
                        0.0,
                    ),
                ];
                (q, checks, detail(&r))
            }
            PipelineStage::Bk { delta, t } => {
                let (q, r) = bk_derandomize_alice(&cur, f, delta, t, cfg.restarts, seed)?;
                let checks = vec![
                    Check::at_most("worst_error <= eps + delta", r.worst_error, r.error_bound, ERROR_TOL),
                    Check::at_most(
                        "alice length <= t c_A",
                        r.alice_len_after as f64,
                        r.length_bound as f64,
                        0.0,
                    ),
                ];
                (q, checks, detail(&r))
            }
        };
        reports.push(StageReport {
            stage: stage.to_string(),
            model_before,
            model_after: next.model,
            checks,
            detail: value,
        });
        cur = next;
    }
    let pass = reports.iter().all(|r| r.checks.iter().all(|c| c.pass));
    Ok((cur, PipelineReport { stages: reports, pass }))
}
