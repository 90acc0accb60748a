use serde::{Deserialize, Serialize};

use super::{check_probs, entropy_of, kl_divergence, Alphabet, Dist};
use crate::{Error, Result};

/// Input-indexed family of output distributions over a common alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(input: Alphabet, output: Alphabet, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != input.len() {
            return Err(Error::InvalidDist(format!(
                "{} rows for {} inputs",
                rows.len(),
                input.len()
            )));
        }
        for row in &rows {
            check_probs(row, output.len())?;
        }
        Ok(Channel { input, output, rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Channel {
            input: Alphabet::indexed(n),
            output: Alphabet::indexed(n),
            rows,
        }
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    /// Output distribution `q = p W` for an input prior `p`.
    pub fn output_dist(&self, prior: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; self.output.len()];
        for (row, &p) in self.rows.iter().zip(prior) {
            if p > 0.0 {
                for (qi, &w) in q.iter_mut().zip(row) {
                    *qi += p * w;
                }
            }
        }
        q
    }
}

/// `I(X; M)` for the channel at a given input prior.
pub fn mutual_info_at(ch: &Channel, prior: &[f64]) -> f64 {
    let q = ch.output_dist(prior);
    let cond: f64 = ch.rows.iter().zip(prior).map(|(row, &p)| p * entropy_of(row)).sum();
    entropy_of(&q) - cond
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityResult {
    /// Certified lower end of the bracket, `I(X; M)` at `optimal_prior`.
    pub capacity: f64,
    pub optimal_prior: Dist,
    /// Output distribution induced by `optimal_prior`.
    pub output: Vec<f64>,
    /// Width of the bracket `max_x D(W_x || q) − I(p; W)`.
    pub lower_gap: f64,
    pub iterations: usize,
}

impl CapacityResult {
    pub fn upper(&self) -> f64 {
        self.capacity + self.lower_gap
    }
}

/// Largest exponent multiplier tried by the accelerated update.
const MAX_STEP: f64 = 1048576.0;

/// Iterations at which a stalled run tries a pruned support.
const PRUNE_AT: [usize; 4] = [1_000, 4_000, 16_000, 64_000];

/// Relative masses below which an input is dropped when pruning.
const PRUNE_THRESHOLDS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-6];

/// Iteration budget of one pruned run.
const PRUNE_BUDGET: usize = 20_000;

enum Run {
    Done {
        p: Vec<f64>,
        q: Vec<f64>,
        lower: f64,
        gap: f64,
        iterations: usize,
    },
    Stalled {
        lower: f64,
        upper: f64,
        iterations: usize,
    },
}

/// Blahut–Arimoto iteration with the standard capacity bracket
/// `I(p; W) ≤ C ≤ max_x D(W_x || pW)` as stopping rule.
///
/// The update `p_x ← p_x 2^{λ D_x}` starts at the classical `λ = 1` and
/// doubles `λ` while the mutual information keeps increasing; a step that
/// loses information is retried with a smaller `λ`, down to the classical
/// one, which never does.
///
/// When an unused input has `D_x = C` at the optimum the upper end of the
/// bracket closes only like `1/k`. A stalled run therefore also solves the
/// channel restricted to the inputs that still carry mass; its prior and
/// output certify a bracket for the full channel just as well.
pub fn capacity(ch: &Channel, tol: f64, max_iter: usize) -> Result<CapacityResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("capacity tolerance must be positive"));
    }
    let support: Vec<usize> = (0..ch.input.len()).collect();
    match run(ch, &support, tol, tol, max_iter, true) {
        Run::Done {
            p,
            q,
            lower,
            gap,
            iterations,
        } => Ok(CapacityResult {
            capacity: lower,
            optimal_prior: Dist::new(ch.input.clone(), p)?,
            output: q,
            lower_gap: gap,
            iterations,
        }),
        Run::Stalled {
            lower,
            upper,
            iterations,
        } => Err(Error::NotConverged {
            lower,
            upper,
            iterations,
        }),
    }
}

/// Iterates on the inputs in `support` until their own bracket is within
/// `local_tol`, then certifies against every input of the channel.
fn run(ch: &Channel, support: &[usize], local_tol: f64, tol: f64, max_iter: usize, prune: bool) -> Run {
    let k = support.len();
    let mut p = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    let mut div = vec![0.0; k];
    let mut lower = 0.0;
    let mut upper = f64::INFINITY;
    let mut step = 1.0;
    let full = |p: &[f64]| {
        let mut prior = vec![0.0; ch.input.len()];
        for (&x, &px) in support.iter().zip(p) {
            prior[x] = px;
        }
        prior
    };
    for it in 0..=max_iter {
        let prior = full(&p);
        let q = ch.output_dist(&prior);
        for (d, &x) in div.iter_mut().zip(support) {
            *d = kl_divergence(&ch.rows[x], &q);
        }
        lower = p.iter().zip(&div).map(|(pi, di)| pi * di).sum::<f64>().max(0.0);
        let local = div.iter().copied().fold(0.0, f64::max);
        upper = ch.rows.iter().map(|row| kl_divergence(row, &q)).fold(local, f64::max);
        if local - lower <= local_tol {
            let gap = (upper - lower).max(0.0);
            if gap <= tol {
                return Run::Done {
                    p: prior,
                    q,
                    lower,
                    gap,
                    iterations: it,
                };
            }
            if k < ch.input.len() {
                // the dropped inputs were needed
                return Run::Stalled {
                    lower,
                    upper,
                    iterations: it,
                };
            }
        }
        if it == max_iter {
            break;
        }
        if prune && PRUNE_AT.contains(&it) {
            let top = p.iter().copied().fold(0.0, f64::max);
            let mut tried = k;
            for thr in PRUNE_THRESHOLDS {
                let sub: Vec<usize> = support
                    .iter()
                    .zip(&p)
                    .filter(|&(_, &px)| px >= thr * top)
                    .map(|(&x, _)| x)
                    .collect();
                if sub.len() >= tried {
                    continue;
                }
                tried = sub.len();
                if let Run::Done {
                    p,
                    q,
                    lower,
                    gap,
                    iterations,
                } = run(ch, &sub, tol / 10.0, tol, PRUNE_BUDGET, false)
                {
                    return Run::Done {
                        p,
                        q,
                        lower,
                        gap,
                        iterations: it + iterations,
                    };
                }
            }
        }
        loop {
            // shifted by the maximum for stability
            let mut total = 0.0;
            for ((ni, pi), di) in next.iter_mut().zip(&p).zip(&div) {
                *ni = pi * (step * (di - local)).exp2();
                total += *ni;
            }
            next.iter_mut().for_each(|v| *v /= total);
            // an input pushed to exactly zero could never come back
            let kept = next.iter().zip(&p).all(|(ni, pi)| *ni > 0.0 || *pi == 0.0);
            if step == 1.0 || (kept && mutual_info_at_subset(ch, support, &next) >= lower) {
                break;
            }
            step = (step / 2.0).max(1.0);
        }
        std::mem::swap(&mut p, &mut next);
        step = (step * 2.0).min(MAX_STEP);
    }
    Run::Stalled {
        lower,
        upper,
        iterations: max_iter,
    }
}

fn mutual_info_at_subset(ch: &Channel, support: &[usize], p: &[f64]) -> f64 {
    let mut prior = vec![0.0; ch.input.len()];
    for (&x, &px) in support.iter().zip(p) {
        prior[x] = px;
    }
    mutual_info_at(ch, &prior)
}
