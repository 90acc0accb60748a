//! Exact per-input laws of what the referee receives from one party.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::protocol::{Model, SharedValue, Side, SimulateStage, Stage};
use crate::coding::{ceil_log2, gamma_len};
use crate::infotheory::Dist;
use crate::{Error, Result};

/// What the referee sees from one party, up to relabelling of messages.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum View {
    /// `(shared value, message)` of the base table, packed as `r_s·|M| + m`.
    Base(u32),
    /// The abort flag of a truncated message.
    Abort,
    /// Concatenated samples; the referee averages its decision over them.
    Tuple(Arc<[View]>),
}

/// One atom of a party's law on a given input.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub view: View,
    /// Length in bits of the transmitted code word.
    pub len: u32,
    /// Message identifier at the top level; zero when identifiers were not requested.
    pub msg: u64,
    /// Index of the shared value seen by the referee at the top level.
    pub shared: u32,
}

/// Length recorded for stream positions past the end of a finite seed prefix.
pub(crate) const BEYOND: u32 = u32::MAX;

pub(crate) enum SharedKind<'a> {
    None,
    Finite(&'a Dist),
    Stream { reference: &'a [f64] },
}

/// Memoized rejection-sampling data for one input.
#[derive(Debug)]
pub(crate) struct SimInput {
    pub(crate) marginal: Vec<Outcome>,
}

pub(crate) fn merge(outcomes: impl IntoIterator<Item = Outcome>) -> Vec<Outcome> {
    let mut acc: BTreeMap<(View, u32, u64, u32), f64> = BTreeMap::new();
    for o in outcomes {
        if o.prob > 0.0 {
            *acc.entry((o.view, o.len, o.msg, o.shared)).or_insert(0.0) += o.prob;
        }
    }
    acc.into_iter()
        .map(|((view, len, msg, shared), prob)| Outcome {
            prob,
            view,
            len,
            msg,
            shared,
        })
        .collect()
}

/// Runs the greedy acceptance schedule for target `p` against reference `q`.
///
/// `visit(i, alpha, rem)` sees step `i` (from 1), the mass `alpha[m]` accepted
/// on symbol `m` at that step and the residual mass `rem` before the step.
/// Returns the residual `p - accepted` after at most `cap` steps.
pub(crate) fn greedy_schedule(p: &[f64], q: &[f64], cap: u32, mut visit: impl FnMut(u32, &[f64], f64)) -> Vec<f64> {
    let mut resid = p.to_vec();
    let mut rem: f64 = resid.iter().sum();
    let mut alpha = vec![0.0; p.len()];
    for i in 1..=cap {
        if rem <= 0.0 {
            break;
        }
        for m in 0..p.len() {
            alpha[m] = resid[m].min(rem * q[m]);
        }
        visit(i, &alpha, rem);
        for m in 0..p.len() {
            if alpha[m] >= resid[m] {
                resid[m] = 0.0;
            } else {
                resid[m] -= alpha[m];
            }
        }
        rem = resid.iter().sum();
    }
    resid
}

impl Side {
    /// Model in force after each stage, starting from the base table.
    pub(crate) fn level_models(&self, top: Model) -> Result<Vec<Model>> {
        let base = match self.stages.first() {
            None => {
                if top == Model::Private && !self.shared.is_trivial() {
                    Model::Shared
                } else {
                    top
                }
            }
            Some(Stage::Simulate(_)) | Some(Stage::Seed(_)) if self.shared.is_trivial() => Model::Private,
            Some(Stage::Simulate(_)) | Some(Stage::Seed(_)) => Model::Shared,
            Some(Stage::Truncate(_)) => Model::Average,
            Some(Stage::Tuple(_)) => Model::Private,
        };
        let mut cur = self.demote(0, base);
        let mut models = vec![cur];
        for (i, stage) in self.stages.iter().enumerate() {
            cur = match (stage, cur) {
                (Stage::Simulate(_), Model::Private | Model::Shared) => Model::Average,
                (Stage::Truncate(_), Model::Average) => Model::Shared,
                (Stage::Seed(_), Model::Shared | Model::Private) => Model::Private,
                (Stage::Tuple(_), Model::Private) => Model::Private,
                (s, m) => {
                    return Err(Error::protocol(format!(
                        "{} stage cannot act on a {m}-model side",
                        stage_name(s)
                    )))
                }
            };
            cur = self.demote(i + 1, cur);
            models.push(cur);
        }
        if !fits(cur, top) {
            return Err(Error::protocol(format!(
                "side ends in the {cur} model, which a {top}-model protocol cannot host"
            )));
        }
        Ok(models)
    }

    /// A shared-model level without shared randomness is a private one.
    fn demote(&self, level: usize, model: Model) -> Model {
        if model == Model::Shared && matches!(self.shared_kind(level), SharedKind::None) {
            Model::Private
        } else {
            model
        }
    }

    pub fn top_level(&self) -> usize {
        self.stages.len()
    }

    pub(crate) fn shared_kind(&self, level: usize) -> SharedKind<'_> {
        if level == 0 {
            return if self.shared.is_trivial() {
                SharedKind::None
            } else {
                SharedKind::Finite(&self.shared)
            };
        }
        match &self.stages[level - 1] {
            Stage::Simulate(s) => SharedKind::Stream {
                reference: &s.reference,
            },
            Stage::Truncate(_) => self.shared_kind(level - 1),
            Stage::Seed(_) | Stage::Tuple(_) => SharedKind::None,
        }
    }

    /// Number of message identifiers used at `level`.
    pub(crate) fn message_count(&self, level: usize) -> u64 {
        if level == 0 {
            return self.messages.len() as u64;
        }
        match &self.stages[level - 1] {
            Stage::Simulate(s) => s.cap as u64 + s.symbols() as u64,
            Stage::Truncate(_) => self.message_count(level - 1) + 1,
            Stage::Seed(s) => s.seeds.len() as u64 * self.message_count(level - 1),
            Stage::Tuple(t) => t.tuples.len() as u64,
        }
    }

    /// Longest code word that can be sent at `level`.
    pub(crate) fn max_len(&self, level: usize) -> u32 {
        if level == 0 {
            return self.lengths.lengths().iter().copied().max().unwrap_or(0);
        }
        match &self.stages[level - 1] {
            Stage::Simulate(s) => s.escape_len().max(s.index_len(s.cap)),
            Stage::Truncate(t) => ceil_log2(self.kept_messages(level - 1, t.max_threshold()) + 1),
            Stage::Seed(s) => ceil_log2(s.seeds.len() as u64) + self.max_len(level - 1),
            Stage::Tuple(t) => t.tuples[0].len() as u32 * self.max_len(level - 1),
        }
    }

    /// Messages at `level` whose code word fits in `limit` bits.
    pub(crate) fn kept_messages(&self, level: usize, limit: f64) -> u64 {
        if level == 0 {
            return self.lengths.lengths().iter().filter(|&&l| l as f64 <= limit).count() as u64;
        }
        match &self.stages[level - 1] {
            Stage::Simulate(s) => {
                let steps = (1..=s.cap as u64).filter(|&i| gamma_len(i) as f64 <= limit).count() as u64;
                let escapes = if s.escape_len() as f64 <= limit {
                    s.symbols() as u64
                } else {
                    0
                };
                steps + escapes
            }
            _ => self.message_count(level),
        }
    }

    /// Shared randomness the referee must read at `level`, in bits; `None`
    /// for an unbounded sample stream.
    pub(crate) fn shared_bits(&self, level: usize) -> Option<u32> {
        match self.shared_kind(level) {
            SharedKind::None => Some(0),
            SharedKind::Finite(d) => Some(ceil_log2(d.len() as u64)),
            SharedKind::Stream { .. } => None,
        }
    }

    /// Law of the referee's view at `level` on input `x`.
    ///
    /// With `seed` the shared register of that level is fixed. Message
    /// identifiers and shared indices are only tracked when `keep_msg` is set.
    pub(crate) fn law_at(
        &self,
        level: usize,
        x: usize,
        seed: Option<&SharedValue>,
        keep_msg: bool,
    ) -> Result<Vec<Outcome>> {
        if level == 0 {
            return self.base_law(x, seed, keep_msg);
        }
        match &self.stages[level - 1] {
            Stage::Simulate(s) => match seed {
                None if keep_msg => Err(Error::Unsupported(
                    "message registers of an unseeded sample stream".into(),
                )),
                None => Ok(self.sim_input(level, s, x)?.marginal.clone()),
                Some(SharedValue::Stream(stream)) => self.sim_seeded(level, s, x, stream, keep_msg),
                Some(SharedValue::Index(_)) => Err(Error::protocol("index seed for a sample stream")),
            },
            Stage::Truncate(t) => {
                let inner = self.law_at(level - 1, x, seed, keep_msg)?;
                let thr = t.thresholds[x];
                let bits = self.max_len(level);
                let abort = self.message_count(level - 1);
                Ok(merge(inner.into_iter().map(|o| {
                    if o.len == BEYOND || o.len as f64 > thr {
                        Outcome {
                            prob: o.prob,
                            view: View::Abort,
                            len: bits,
                            msg: if keep_msg { abort } else { 0 },
                            shared: o.shared,
                        }
                    } else {
                        Outcome { len: bits, ..o }
                    }
                })))
            }
            Stage::Seed(s) => {
                if seed.is_some() {
                    return Err(Error::protocol("seed stage has no shared register to fix"));
                }
                let t = s.seeds.len();
                let inner_count = self.message_count(level - 1);
                let prefix = ceil_log2(t as u64);
                let mut all = Vec::new();
                for (j, sv) in s.seeds.iter().enumerate() {
                    let inner = match self.shared_kind(level - 1) {
                        SharedKind::None => self.law_at(level - 1, x, None, keep_msg)?,
                        _ => self.law_at(level - 1, x, Some(sv), keep_msg)?,
                    };
                    all.extend(inner.into_iter().map(|o| Outcome {
                        prob: o.prob / t as f64,
                        len: if o.len == BEYOND { BEYOND } else { prefix + o.len },
                        msg: if keep_msg { j as u64 * inner_count + o.msg } else { 0 },
                        shared: 0,
                        view: o.view,
                    }));
                }
                Ok(merge(all))
            }
            Stage::Tuple(t) => {
                let row = &t.tuples[x];
                let canonical = t.tuples.iter().position(|r| r == row).unwrap_or(x);
                let views: Vec<View> = row
                    .iter()
                    .map(|it| it.view.map(View::Base).unwrap_or(View::Abort))
                    .collect();
                Ok(vec![Outcome {
                    prob: 1.0,
                    view: View::Tuple(views.into()),
                    len: self.max_len(level),
                    msg: if keep_msg { canonical as u64 } else { 0 },
                    shared: 0,
                }])
            }
        }
    }

    fn base_law(&self, x: usize, seed: Option<&SharedValue>, keep_msg: bool) -> Result<Vec<Outcome>> {
        let fixed = match seed {
            None => None,
            Some(SharedValue::Index(r)) => Some(*r as usize),
            Some(SharedValue::Stream(_)) => return Err(Error::protocol("stream seed for a finite register")),
        };
        let ns = self.shared.len();
        let mut out = Vec::with_capacity(self.private.len() * ns);
        for (rp, &pp) in self.private.probs().iter().enumerate() {
            if pp <= 0.0 {
                continue;
            }
            let shared_range: Box<dyn Iterator<Item = usize>> = match fixed {
                Some(r) => Box::new(std::iter::once(r)),
                None => Box::new(0..ns),
            };
            for rs in shared_range {
                let ps = if fixed.is_some() { 1.0 } else { self.shared.probs()[rs] };
                let m = self.message_of(x, rp, rs);
                out.push(Outcome {
                    prob: pp * ps,
                    view: View::Base(self.base_view(rs, m)),
                    len: self.lengths.get(m),
                    msg: if keep_msg { m as u64 } else { 0 },
                    shared: if keep_msg && fixed.is_none() { rs as u32 } else { 0 },
                });
            }
        }
        Ok(merge(out))
    }

    /// Target law over base views that the simulation at `level` reproduces.
    pub(crate) fn sim_target(&self, level: usize, views: usize, x: usize) -> Result<Vec<f64>> {
        let mut row = vec![0.0; views];
        for o in self.law_at(level - 1, x, None, false)? {
            match o.view {
                View::Base(v) if (v as usize) < views => row[v as usize] += o.prob,
                _ => return Err(Error::protocol("simulation target must be a base view")),
            }
        }
        Ok(row)
    }

    fn sim_input(&self, level: usize, s: &SimulateStage, x: usize) -> Result<Arc<SimInput>> {
        if let Some(hit) = s.cache.0.read().expect("cache lock").get(&x) {
            return Ok(hit.clone());
        }
        let p = self.sim_target(level, s.symbols(), x)?;
        let mut out = Vec::new();
        let resid = greedy_schedule(&p, &s.reference, s.cap, |i, alpha, _| {
            let len = s.index_len(i);
            for (m, &a) in alpha.iter().enumerate() {
                if a > 0.0 {
                    out.push(Outcome {
                        prob: a,
                        view: View::Base(m as u32),
                        len,
                        msg: 0,
                        shared: 0,
                    });
                }
            }
        });
        let esc = s.escape_len();
        for (m, &r) in resid.iter().enumerate() {
            if r > 0.0 {
                out.push(Outcome {
                    prob: r,
                    view: View::Base(m as u32),
                    len: esc,
                    msg: 0,
                    shared: 0,
                });
            }
        }
        let entry = Arc::new(SimInput { marginal: merge(out) });
        s.cache.0.write().expect("cache lock").insert(x, entry.clone());
        Ok(entry)
    }

    /// Law of the simulated message when the sample stream starts with `stream`.
    fn sim_seeded(
        &self,
        level: usize,
        s: &SimulateStage,
        x: usize,
        stream: &[u32],
        keep_msg: bool,
    ) -> Result<Vec<Outcome>> {
        let p = self.sim_target(level, s.symbols(), x)?;
        let horizon = (stream.len() as u64).min(s.cap as u64) as u32;
        let mut out = Vec::new();
        let mut pending = 1.0;
        let resid = greedy_schedule(&p, &s.reference, horizon, |i, alpha, rem| {
            let m = stream[i as usize - 1] as usize;
            let qm = s.reference[m];
            let beta = if qm > 0.0 {
                (alpha[m] / (rem * qm)).min(1.0)
            } else {
                0.0
            };
            out.push(Outcome {
                prob: pending * beta,
                view: View::Base(m as u32),
                len: s.index_len(i),
                msg: if keep_msg { i as u64 - 1 } else { 0 },
                shared: 0,
            });
            pending *= 1.0 - beta;
        });
        let total: f64 = resid.iter().sum();
        if pending > 0.0 {
            if horizon == s.cap && total > 0.0 {
                let esc = s.escape_len();
                for (m, &r) in resid.iter().enumerate() {
                    out.push(Outcome {
                        prob: pending * r / total,
                        view: View::Base(m as u32),
                        len: esc,
                        msg: if keep_msg { s.cap as u64 + m as u64 } else { 0 },
                        shared: 0,
                    });
                }
            } else if total > 0.0 {
                out.push(Outcome {
                    prob: pending,
                    view: View::Abort,
                    len: BEYOND,
                    msg: if keep_msg { u64::MAX } else { 0 },
                    shared: 0,
                });
            }
        }
        Ok(merge(out))
    }
}

impl super::protocol::TruncateStage {
    pub fn max_threshold(&self) -> f64 {
        self.thresholds.iter().copied().fold(0.0, f64::max)
    }
}

fn fits(side: Model, protocol: Model) -> bool {
    use Model::*;
    matches!(
        (side, protocol),
        (Private, _) | (Shared, Shared | Average) | (Average, Average)
    )
}

fn stage_name(s: &Stage) -> &'static str {
    match s {
        Stage::Simulate(_) => "simulate",
        Stage::Truncate(_) => "truncate",
        Stage::Seed(_) => "seed",
        Stage::Tuple(_) => "tuple",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_schedule_covers_target() {
        let p = [0.7, 0.2, 0.1];
        let q = [0.2, 0.3, 0.5];
        let mut accepted = [0.0; 3];
        let resid = greedy_schedule(&p, &q, 1000, |_, a, rem| {
            for m in 0..3 {
                assert!(a[m] <= rem * q[m] + 1e-18);
                accepted[m] += a[m];
            }
        });
        for m in 0..3 {
            assert!((accepted[m] + resid[m] - p[m]).abs() < 1e-15);
        }
        assert!(resid.iter().sum::<f64>() < 1e-12);
    }

    #[test]
    fn greedy_schedule_stops_on_match() {
        let p = [0.25, 0.75];
        let mut steps = 0;
        greedy_schedule(&p, &p, 100, |_, _, _| steps += 1);
        assert_eq!(steps, 1);
    }

    #[test]
    fn merge_sums_equal_atoms() {
        let o = |p| Outcome {
            prob: p,
            view: View::Base(1),
            len: 2,
            msg: 0,
            shared: 0,
        };
        let m = merge([o(0.25), o(0.5), o(0.0)]);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].prob, 0.75);
    }
}
