use serde::{Deserialize, Serialize};

use crate::smp::{Evaluator, FunctionTable, Model, SmpProtocol, Stage, TruncateStage};
use crate::{Error, Result};

/// Additive slack of the truncation cost bound.
pub const TRUNCATE_SLACK: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncateReport {
    pub delta: f64,
    pub epsilon: f64,
    pub worst_error: f64,
    /// `ε + δ`.
    pub error_bound: f64,
    pub cc_av_before: f64,
    pub cc_sh_after: u32,
    /// `CC_av / δ + 4`.
    pub cost_bound: f64,
    /// Whether `ε + δ < 1/2`, under which the error bound is meaningful.
    pub nontrivial: bool,
    pub thresholds_alice: Vec<f64>,
    pub thresholds_bob: Vec<f64>,
}

/// Cuts every message longer than `c(x)/δ` to an abort flag, where `c(x)` is
/// the party's expected length on its own input. The referee answers
/// uniformly at random on any abort.
pub fn markov_truncate(p: &SmpProtocol, f: &FunctionTable, delta: f64) -> Result<(SmpProtocol, TruncateReport)> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::domain(format!("truncation needs δ ∈ (0, 1/2], got {delta}")));
    }
    if p.model != Model::Average {
        return Err(Error::protocol("truncation expects an average-model protocol"));
    }
    let before = Evaluator::new(p)?;
    let epsilon = before.worst_error(f)?;
    let costs = before.costs();
    let mut q = p.clone();
    let mut thresholds = [Vec::new(), Vec::new()];
    for (k, (side, expected)) in [(&mut q.alice, &costs.alice_expected), (&mut q.bob, &costs.bob_expected)]
        .into_iter()
        .enumerate()
    {
        let top = *side
            .level_models(Model::Average)?
            .last()
            .expect("at least the base level");
        if top != Model::Average {
            continue;
        }
        let thr: Vec<f64> = expected.iter().map(|c| c / delta).collect();
        thresholds[k] = thr.clone();
        side.stages.push(Stage::Truncate(TruncateStage { thresholds: thr }));
    }
    q.model = Model::Shared;
    q.validate()?;
    let after = Evaluator::new(&q)?;
    let worst = after.worst_error(f)?;
    let cc_sh = after.costs().cc_sh;
    let [ta, tb] = thresholds;
    Ok((
        q,
        TruncateReport {
            delta,
            epsilon,
            worst_error: worst,
            error_bound: epsilon + delta,
            cc_av_before: costs.cc_av,
            cc_sh_after: cc_sh,
            cost_bound: costs.cc_av / delta + TRUNCATE_SLACK,
            nontrivial: epsilon + delta < 0.5,
            thresholds_alice: ta,
            thresholds_bob: tb,
        },
    ))
}
