use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::newman::DerandomizationReport;
use crate::smp::{Evaluator, FunctionTable, Model, Outcome, SmpProtocol, Stage, TupleItem, TupleStage, View};
use crate::{Error, Result};

const LOG2E: f64 = std::f64::consts::LOG2_E;

/// `⌈(c_B + 2) / (2 δ² log e)⌉` samples for a Bob message of `c_B` bits.
pub fn bk_t(c_b: u32, delta: f64) -> usize {
    ((c_b as f64 + 2.0) / (2.0 * delta * delta * LOG2E)).ceil().max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BkReport {
    pub delta: f64,
    pub epsilon: f64,
    pub derandomization: DerandomizationReport,
    /// `max_{x, m_B} |Q̄(x, m_B) − P(x, m_B)|` over reachable Bob views.
    pub max_deviation: f64,
    pub worst_error: f64,
    /// `ε + δ`.
    pub error_bound: f64,
    pub alice_len_before: u32,
    pub alice_len_after: u32,
    /// `t · c_A`.
    pub length_bound: u32,
    pub nontrivial: bool,
}

/// Makes Alice deterministic: on input `x` she sends `t` messages sampled
/// once and for all from her law on `x`, and the referee accepts with the
/// average of its acceptance probabilities over them.
///
/// Each tuple is resampled until `|Q̄ − P| < δ` holds against every Bob view
/// that can occur, so the error moves by less than `δ` on every input.
pub fn bk_derandomize_alice(
    p: &SmpProtocol,
    f: &FunctionTable,
    delta: f64,
    t: Option<usize>,
    restarts: usize,
    seed: u64,
) -> Result<(SmpProtocol, BkReport)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("derandomization needs δ ∈ (0, 1), got {delta}")));
    }
    if p.z.len() != 2 {
        return Err(Error::protocol("tuple derandomization needs a Boolean output"));
    }
    let alice_model = *p.alice.level_models(p.model)?.last().expect("base level");
    if alice_model != Model::Private {
        return Err(Error::protocol("tuple derandomization needs a private-coin Alice"));
    }
    let e = Evaluator::new(p)?;
    let epsilon = e.worst_error(f)?;
    let c_a = p.alice.max_len(p.alice.top_level());
    let c_b = p.bob.max_len(p.bob.top_level());
    let top = p.alice.top_level();
    let laws: Vec<Vec<Outcome>> = (0..p.x.len())
        .map(|x| p.alice.law_at(top, x, None, true))
        .collect::<Result<_>>()?;
    if laws.iter().all(|l| l.len() == 1) {
        let rep = BkReport {
            delta,
            epsilon,
            derandomization: DerandomizationReport {
                t: 1,
                achieved_error: epsilon,
                target_error: epsilon + delta,
                restarts_used: 0,
            },
            max_deviation: 0.0,
            worst_error: epsilon,
            error_bound: epsilon + delta,
            alice_len_before: c_a,
            alice_len_after: c_a,
            length_bound: c_a,
            nontrivial: epsilon + delta < 0.5,
        };
        return Ok((p.clone(), rep));
    }
    let t = t.unwrap_or_else(|| bk_t(c_b, delta));
    if t == 0 {
        return Err(Error::domain("tuple size must be positive"));
    }

    let mut bob_views: Vec<View> = (0..p.y.len())
        .flat_map(|y| e.bob_law(y).iter().filter(|o| o.prob > 0.0).map(|o| o.view.clone()))
        .collect();
    bob_views.sort();
    bob_views.dedup();
    let accept = |a: &View, b: &View| {
        let mut out = [0.0; 2];
        e.decide(a, b, 1.0, &mut out);
        out[1]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tuples = Vec::with_capacity(p.x.len());
    let mut used = 0;
    let mut max_dev: f64 = 0.0;
    for (x, law) in laws.iter().enumerate() {
        for o in law {
            if matches!(o.view, View::Tuple(_)) {
                return Err(Error::Unsupported("tupling an already tupled side".into()));
            }
        }
        let target: Vec<f64> = bob_views
            .iter()
            .map(|b| law.iter().map(|o| o.prob * accept(&o.view, b)).sum())
            .collect();
        let pick = WeightedIndex::new(law.iter().map(|o| o.prob)).map_err(|err| Error::InvalidDist(err.to_string()))?;
        let mut found = None;
        let mut best = f64::INFINITY;
        for attempt in 1..=restarts {
            let sample: Vec<&Outcome> = (0..t).map(|_| &law[pick.sample(&mut rng)]).collect();
            let dev = bob_views
                .iter()
                .zip(&target)
                .map(|(b, &pb)| {
                    let qbar = sample.iter().map(|o| accept(&o.view, b)).sum::<f64>() / t as f64;
                    (qbar - pb).abs()
                })
                .fold(0.0, f64::max);
            best = best.min(dev);
            if dev < delta {
                used = used.max(attempt);
                max_dev = max_dev.max(dev);
                found = Some(sample);
                break;
            }
        }
        let Some(sample) = found else {
            return Err(Error::SearchFailed {
                restarts,
                reason: format!("input {x}: best tuple deviates by {best}, not below δ = {delta}"),
            });
        };
        tuples.push(
            sample
                .into_iter()
                .map(|o| TupleItem {
                    view: match o.view {
                        View::Base(v) => Some(v),
                        _ => None,
                    },
                    message: o.msg,
                })
                .collect(),
        );
    }

    let mut q = p.clone();
    q.alice.stages.push(Stage::Tuple(TupleStage { tuples }));
    q.validate()?;
    let after = Evaluator::new(&q)?;
    let worst = after.worst_error(f)?;
    let len_after = q.alice.max_len(q.alice.top_level());
    Ok((
        q,
        BkReport {
            delta,
            epsilon,
            derandomization: DerandomizationReport {
                t,
                achieved_error: worst,
                target_error: epsilon + delta,
                restarts_used: used,
            },
            max_deviation: max_dev,
            worst_error: worst,
            error_bound: epsilon + delta,
            alice_len_before: c_a,
            alice_len_after: len_after,
            length_bound: t as u32 * c_a,
            nontrivial: epsilon + delta < 0.5,
        },
    ))
}
