//! Brute-force searches over input priors, used to cross-check the
//! capacity-based worst-case values.

use rand::Rng;

use super::Registers;
use crate::infotheory::mutual_info_at;
use crate::Result;

/// Calls `visit` on every point of the simplex over `dim` symbols whose
/// coordinates are multiples of `1/parts`.
pub fn for_each_simplex_point(dim: usize, parts: usize, mut visit: impl FnMut(&[f64])) {
    let mut counts = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    fn rec(
        i: usize,
        left: usize,
        counts: &mut [usize],
        point: &mut [f64],
        parts: usize,
        visit: &mut dyn FnMut(&[f64]),
    ) {
        if i + 1 == counts.len() {
            counts[i] = left;
            for (p, &c) in point.iter_mut().zip(counts.iter()) {
                *p = c as f64 / parts as f64;
            }
            visit(point);
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, point, parts, visit);
        }
    }
    rec(0, parts, &mut counts, &mut point, parts, &mut visit);
}

/// Maximum of `IC(Π, μ_X × μ_Y)` over grid product priors.
///
/// Over product priors the two terms decouple, so each simplex is searched
/// on its own.
pub fn ic_product_grid(regs: &Registers, step: f64) -> Result<f64> {
    let parts = (1.0 / step).round() as usize;
    let mut total = 0.0;
    for side in [&regs.alice, &regs.bob] {
        let ch = side.channel()?;
        let mut best: f64 = 0.0;
        for_each_simplex_point(side.law.len(), parts, |p| best = best.max(mutual_info_at(&ch, p)));
        total += best;
    }
    Ok(total)
}

/// Local search over joint priors: repeatedly moves mass between two input
/// pairs while `IL` improves, halving the move size down to `min_step`.
pub fn hill_climb(regs: &Registers, start: &[f64], step: f64, min_step: f64) -> (f64, Vec<f64>) {
    let mut mu = start.to_vec();
    let mut best = regs.il(&mu);
    let n = mu.len();
    let mut h = step;
    while h >= min_step {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..n {
                for j in 0..n {
                    if i == j || mu[j] <= 0.0 {
                        continue;
                    }
                    let d = h.min(mu[j]);
                    mu[i] += d;
                    mu[j] -= d;
                    let v = regs.il(&mu);
                    if v > best + 1e-15 {
                        best = v;
                        improved = true;
                    } else {
                        mu[i] -= d;
                        mu[j] += d;
                    }
                }
            }
        }
        h /= 2.0;
    }
    (best, mu)
}

/// Largest `IL(Π, μ)` found over joint priors on `X × Y`.
///
/// Small input sets are covered by the full grid at `step`; larger ones by
/// random grid points plus local refinement from the best of them.
pub fn il_joint_search<R: Rng>(regs: &Registers, step: f64, samples: usize, rng: &mut R) -> f64 {
    let dim = regs.alice.law.len() * regs.bob.law.len();
    let parts = (1.0 / step).round() as usize;
    let mut best = 0.0f64;
    let mut best_mu = vec![1.0 / dim as f64; dim];
    let consider = |mu: &[f64], best: &mut f64, best_mu: &mut Vec<f64>| {
        let v = regs.il(mu);
        if v > *best {
            *best = v;
            best_mu.copy_from_slice(mu);
        }
    };
    if dim <= 4 {
        for_each_simplex_point(dim, parts, |mu| consider(mu, &mut best, &mut best_mu));
    } else {
        let mut mu = vec![0.0; dim];
        for _ in 0..samples {
            // uniform point of the grid simplex via sorted cut positions
            let mut cuts: Vec<usize> = (0..dim - 1).map(|_| rng.gen_range(0..=parts)).collect();
            cuts.sort_unstable();
            let mut prev = 0;
            for (k, m) in mu.iter_mut().enumerate() {
                let c = if k + 1 < dim { cuts[k] } else { parts };
                *m = (c - prev) as f64 / parts as f64;
                prev = c;
            }
            consider(&mu, &mut best, &mut best_mu);
        }
        let uniform = vec![1.0 / dim as f64; dim];
        consider(&uniform, &mut best, &mut best_mu);
    }
    let (refined, _) = hill_climb(regs, &best_mu, step, 1e-4);
    best.max(refined)
}
