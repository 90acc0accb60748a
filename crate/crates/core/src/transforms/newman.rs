use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{ceil_log2, gamma_len};
use crate::smp::{
    Evaluator, FunctionTable, Model, Outcome, SeedStage, SharedKind, SharedValue, Side, SmpProtocol, Stage,
};
use crate::{Error, Exec, Result};

const LOG2E: f64 = std::f64::consts::LOG2_E;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerandomizationReport {
    pub t: usize,
    pub achieved_error: f64,
    pub target_error: f64,
    pub restarts_used: usize,
}

/// `⌈(n_A + n_B) / (2 (δ/2)² log e)⌉` samples per side.
pub fn newman_t(n_a: u32, n_b: u32, delta: f64) -> usize {
    let h = delta / 2.0;
    ((n_a + n_b) as f64 / (2.0 * h * h * LOG2E)).ceil().max(1.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewmanReport {
    pub delta: f64,
    pub epsilon: f64,
    pub t: usize,
    pub alice: DerandomizationReport,
    pub bob: DerandomizationReport,
    pub worst_error: f64,
    /// `ε + δ`.
    pub error_bound: f64,
    pub cc_sh_before: u32,
    pub cc_priv_after: u32,
    /// `CC_sh + 2⌈log2 t⌉`.
    pub cost_bound: f64,
    pub nontrivial: bool,
}

/// Samples one value of a side's top-level shared register.
enum Sampler {
    Finite(WeightedIndex<f64>),
    Stream {
        symbols: WeightedIndex<f64>,
        horizon: usize,
    },
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> SharedValue {
        match self {
            Sampler::Finite(w) => SharedValue::Index(w.sample(rng) as u32),
            Sampler::Stream { symbols, horizon } => {
                SharedValue::Stream((0..*horizon).map(|_| symbols.sample(rng) as u32).collect())
            }
        }
    }
}

/// Stream positions that a truncated simulation can still reach.
fn stream_horizon(side: &Side) -> Result<usize> {
    let mut limit = f64::INFINITY;
    for stage in side.stages.iter().rev() {
        match stage {
            Stage::Truncate(t) => limit = limit.min(t.max_threshold()),
            Stage::Simulate(s) => {
                if s.escape_len() as f64 <= limit {
                    return Ok(s.cap as usize);
                }
                let reach = (1..=s.cap as u64).take_while(|&i| gamma_len(i) as f64 <= limit).count();
                return Ok(reach);
            }
            _ => break,
        }
    }
    Err(Error::protocol("sample stream without a simulation stage"))
}

fn sampler(side: &Side) -> Result<Option<Sampler>> {
    let weights = |p: &[f64]| WeightedIndex::new(p.to_vec()).map_err(|e| Error::InvalidDist(e.to_string()));
    Ok(match side.shared_kind(side.top_level()) {
        SharedKind::None => None,
        SharedKind::Finite(d) => Some(Sampler::Finite(weights(d.probs())?)),
        SharedKind::Stream { reference } => Some(Sampler::Stream {
            symbols: weights(reference)?,
            horizon: stream_horizon(side)?,
        }),
    })
}

fn same_law(a: &[Outcome], b: &[Outcome]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(u, v)| u.view == v.view && u.len == v.len && (u.prob - v.prob).abs() <= 1e-12)
}

/// True when no value of the finite shared register changes the side's law.
fn ignores_shared(side: &Side, inputs: usize) -> Result<bool> {
    let top = side.top_level();
    let SharedKind::Finite(d) = side.shared_kind(top) else {
        return Ok(false);
    };
    for x in 0..inputs {
        let marginal = side.law_at(top, x, None, false)?;
        for r in 0..d.len() {
            if d.probs()[r] > 0.0
                && !same_law(
                    &side.law_at(top, x, Some(&SharedValue::Index(r as u32)), false)?,
                    &marginal,
                )
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Party {
    Alice,
    Bob,
}

/// Searches for `t` seeds of one party's shared register whose uniform
/// mixture keeps every input's error at most `target`.
#[allow(clippy::too_many_arguments)]
fn search(
    p: &SmpProtocol,
    f: &FunctionTable,
    party: Party,
    t: usize,
    target: f64,
    restarts: usize,
    rng: &mut ChaCha8Rng,
    exec: Exec,
) -> Result<(Vec<SharedValue>, DerandomizationReport)> {
    let e = Evaluator::new(p)?;
    let (side, inputs) = match party {
        Party::Alice => (&p.alice, p.x.len()),
        Party::Bob => (&p.bob, p.y.len()),
    };
    let other = match party {
        Party::Alice => p.y.len(),
        Party::Bob => p.x.len(),
    };
    let Some(sampler) = sampler(side)? else {
        let err = e.worst_error(f)?;
        return Ok((Vec::new(), report(1, err, target, 0)));
    };
    if ignores_shared(side, inputs)? {
        let err = e.worst_error(f)?;
        return Ok((vec![SharedValue::Index(0)], report(1, err, target, 0)));
    }
    let top = side.top_level();
    let mut best = f64::INFINITY;
    for attempt in 1..=restarts {
        let seeds: Vec<SharedValue> = (0..t).map(|_| sampler.draw(rng)).collect();
        // errors[j][x * other + y] with the seeded party on x
        let errors = exec.try_map_range(t, |j| -> Result<Vec<f64>> {
            let mut row = vec![0.0; inputs * other];
            for x in 0..inputs {
                let law = side.law_at(top, x, Some(&seeds[j]), false)?;
                for y in 0..other {
                    let (out, want) = match party {
                        Party::Alice => (e.combine(&law, e.bob_law(y)), f.value(x, y)),
                        Party::Bob => (e.combine(e.alice_law(y), &law), f.value(y, x)),
                    };
                    row[x * other + y] = out.iter().enumerate().filter(|(z, _)| *z != want).map(|(_, p)| p).sum();
                }
            }
            Ok(row)
        })?;
        let worst = (0..inputs * other)
            .map(|k| errors.iter().map(|r| r[k]).sum::<f64>() / t as f64)
            .fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= target {
            return Ok((seeds, report(t, worst, target, attempt)));
        }
    }
    Err(Error::SearchFailed {
        restarts,
        reason: format!("best seed set reached error {best} above the target {target}"),
    })
}

fn report(t: usize, achieved: f64, target: f64, restarts: usize) -> DerandomizationReport {
    DerandomizationReport {
        t,
        achieved_error: achieved,
        target_error: target,
        restarts_used: restarts,
    }
}

fn push_seeds(side: &mut Side, seeds: Vec<SharedValue>) {
    if !seeds.is_empty() {
        side.stages.push(Stage::Seed(SeedStage { seeds }));
    }
}

/// Replaces the shared randomness of both parties by `t` fixed seeds each,
/// chosen privately and uniformly and announced as a `⌈log2 t⌉`-bit prefix.
///
/// Alice's seeds are fixed first against slack `δ/2`, then Bob's against the
/// full `δ`, each candidate set checked exactly on every input.
pub fn newman_derandomize(
    p: &SmpProtocol,
    f: &FunctionTable,
    delta: f64,
    restarts: usize,
    seed: u64,
) -> Result<(SmpProtocol, NewmanReport)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("derandomization needs δ ∈ (0, 1), got {delta}")));
    }
    if p.model == Model::Average {
        return Err(Error::protocol("derandomization expects a shared-model protocol"));
    }
    let exec = Exec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let before = Evaluator::new(p)?;
    let epsilon = before.worst_error(f)?;
    let cc_sh = before.costs().cc_sh;
    let t = newman_t(ceil_log2(p.x.len() as u64), ceil_log2(p.y.len() as u64), delta);

    let (seeds_a, rep_a) = search(p, f, Party::Alice, t, epsilon + delta / 2.0, restarts, &mut rng, exec)?;
    let mut q = p.clone();
    push_seeds(&mut q.alice, seeds_a);
    q.validate()?;
    let (seeds_b, rep_b) = search(&q, f, Party::Bob, t, epsilon + delta, restarts, &mut rng, exec)?;
    push_seeds(&mut q.bob, seeds_b);
    q.model = Model::Private;
    q.validate()?;

    let after = Evaluator::new(&q)?;
    let worst = after.worst_error(f)?;
    let cc_priv = after
        .costs()
        .cc_priv
        .ok_or_else(|| Error::protocol("seeded protocol still reads a stream"))?;
    let t_used = rep_a.t.max(rep_b.t);
    Ok((
        q,
        NewmanReport {
            delta,
            epsilon,
            t: t_used,
            alice: rep_a,
            bob: rep_b,
            worst_error: worst,
            error_bound: epsilon + delta,
            cc_sh_before: cc_sh,
            cc_priv_after: cc_priv,
            cost_bound: cc_sh as f64 + 2.0 * ceil_log2(t_used as u64) as f64,
            nontrivial: epsilon + delta < 0.5,
        },
    ))
}
