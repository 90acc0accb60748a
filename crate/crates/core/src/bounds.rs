//! Finite-size lower bounds for equality and the quantum leakage curve.
//!
//! Raw bound values may be negative; reported values clamp at zero and keep
//! the raw number alongside.

use serde::{Deserialize, Serialize};

use crate::{Error, Exec, Result};

const LOG2E: f64 = std::f64::consts::LOG2_E;

/// `g1(x) = 2 log(x + 1) + 10`.
pub fn g1(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("g1 needs x ≥ 0, got {x}")));
    }
    Ok(2.0 * (x + 1.0).log2() + 10.0)
}

/// `g2(x, y, z) = 2 log(2(x + y) / (z² log e) + 1) + 2`.
pub fn g2(x: f64, y: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !(x + y >= 0.0) || !(x + y).is_finite() {
        return Err(Error::domain(format!(
            "g2 needs z > 0 and x + y ≥ 0, got ({x}, {y}, {z})"
        )));
    }
    Ok(2.0 * (2.0 * (x + y) / (z * z * LOG2E) + 1.0).log2() + 2.0)
}

/// `g3(x) = 2 (1/2 − x)² log e`.
pub fn g3(x: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&x) {
        return Err(Error::domain(format!("g3 needs x ∈ [0, 1/2], got {x}")));
    }
    Ok(2.0 * (0.5 - x).powi(2) * LOG2E)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..0.5).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon must lie in [0, 1/2), got {epsilon}")));
    }
    Ok(())
}

fn check_n(n: f64) -> Result<()> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::domain(format!("n must be a positive count, got {n}")));
    }
    Ok(())
}

/// Unclamped `2√g3(ε)·√n − g3(ε) − 6`.
pub fn cc_priv_lower_eq_raw(n: f64, epsilon: f64) -> Result<f64> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let g = g3(epsilon)?;
    Ok(2.0 * g.sqrt() * n.sqrt() - g - 6.0)
}

/// Private-coin communication lower bound for `EQ_n` at error `ε`, clamped at 0.
pub fn cc_priv_lower_eq(n: f64, epsilon: f64) -> Result<f64> {
    Ok(cc_priv_lower_eq_raw(n, epsilon)?.max(0.0))
}

/// The constant-`0.1√n` reference bound at `ε = 0.01`.
pub fn babai_kimmel_reference(n: f64) -> f64 {
    0.1 * n.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: f64,
    pub epsilon: f64,
    pub delta1: f64,
    pub delta2: f64,
}

impl BoundParams {
    pub fn new(n: f64, epsilon: f64, delta1: f64, delta2: f64) -> Result<Self> {
        let p = BoundParams {
            n,
            epsilon,
            delta1,
            delta2,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        check_n(self.n)?;
        check_epsilon(self.epsilon)?;
        if !(self.delta1 > 0.0 && self.delta2 > 0.0) || self.epsilon + self.delta1 + self.delta2 >= 0.5 {
            return Err(Error::domain(format!(
                "need δ1, δ2 > 0 and ε + δ1 + δ2 < 1/2, got ({}, {}, {})",
                self.epsilon, self.delta1, self.delta2
            )));
        }
        Ok(())
    }
}

/// Private-coin communication bounds of a function family.
pub trait CcBounds {
    /// A lower bound on `CC_priv(f, ε)`.
    fn lower(&self, epsilon: f64) -> Result<f64>;
    /// An upper bound on `CC_priv(f, ε)`.
    fn upper(&self, epsilon: f64) -> Result<f64>;
}

/// Equality on `n` bits: the unclamped square-root lower bound and the
/// trivial `2n` upper bound.
#[derive(Clone, Copy, Debug)]
pub struct EqualityBounds {
    pub n: f64,
}

impl CcBounds for EqualityBounds {
    fn lower(&self, epsilon: f64) -> Result<f64> {
        cc_priv_lower_eq_raw(self.n, epsilon)
    }

    fn upper(&self, _epsilon: f64) -> Result<f64> {
        Ok(2.0 * self.n)
    }
}

/// Unclamped `δ1 (CC_lb(ε + δ1 + δ2) − g2(n_A, n_B, δ2) − 4) − 2 g1(CC_ub(ε))`.
pub fn il_lower_from_ccpriv(cc: &dyn CcBounds, n_a: f64, n_b: f64, params: &BoundParams) -> Result<f64> {
    params.check()?;
    let lb = cc.lower(params.epsilon + params.delta1 + params.delta2)?;
    let ub = cc.upper(params.epsilon)?;
    Ok(params.delta1 * (lb - g2(n_a, n_b, params.delta2)? - 4.0) - 2.0 * g1(ub)?)
}

/// Leakage lower bound for `EQ_n`, written out in closed form:
/// `δ1 (2√g3(ε+δ1+δ2)·√n − g3(ε+δ1+δ2) − g2(n, n, δ2) − 10) − 2 g1(2n)`.
pub fn il_lower_eq_raw(params: &BoundParams) -> Result<f64> {
    params.check()?;
    let BoundParams {
        n,
        epsilon,
        delta1,
        delta2,
    } = *params;
    let g = g3(epsilon + delta1 + delta2)?;
    Ok(delta1 * (2.0 * g.sqrt() * n.sqrt() - g - g2(n, n, delta2)? - 10.0) - 2.0 * g1(2.0 * n)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    /// Clamped at 0.
    pub value: f64,
    pub raw: f64,
    pub delta1: f64,
    pub delta2: f64,
}

pub const GRID: usize = 200;
pub const REFINE_STEP: f64 = 1e-6;

/// Raw objective without validation, for the optimizer's inner loop.
fn objective(n: f64, epsilon: f64, d1: f64, d2: f64) -> f64 {
    let g = 2.0 * (0.5 - epsilon - d1 - d2).powi(2) * LOG2E;
    let g2 = 2.0 * (4.0 * n / (d2 * d2 * LOG2E) + 1.0).log2() + 2.0;
    let g1 = 2.0 * (2.0 * n + 1.0).log2() + 10.0;
    d1 * (2.0 * g.sqrt() * n.sqrt() - g - g2 - 10.0) - 2.0 * g1
}

/// Maximizes the equality leakage bound over the feasible `(δ1, δ2)`
/// triangle: a 200×200 grid followed by coordinate refinement down to a
/// step of 1e-6.
pub fn il_lower_eq_opt(n: f64, epsilon: f64) -> Result<Optimum> {
    il_lower_eq_opt_with(n, epsilon, Exec::Sequential)
}

pub fn il_lower_eq_opt_with(n: f64, epsilon: f64, exec: Exec) -> Result<Optimum> {
    check_n(n)?;
    check_epsilon(epsilon)?;
    let side = 0.5 - epsilon;
    let h0 = side / GRID as f64;
    let rows = exec.map_range(GRID - 1, |i| {
        let d1 = (i + 1) as f64 * h0;
        let mut best = (f64::NEG_INFINITY, d1, h0);
        for j in 1..GRID - 1 - i {
            let d2 = j as f64 * h0;
            let v = objective(n, epsilon, d1, d2);
            if v > best.0 {
                best = (v, d1, d2);
            }
        }
        best
    });
    let (mut best, mut d1, mut d2) = rows
        .into_iter()
        .fold((f64::NEG_INFINITY, h0, h0), |a, b| if b.0 > a.0 { b } else { a });
    if !best.is_finite() {
        return Ok(Optimum {
            value: 0.0,
            raw: f64::NEG_INFINITY,
            delta1: 0.0,
            delta2: 0.0,
        });
    }
    let feasible = |a: f64, b: f64| a > 0.0 && b > 0.0 && epsilon + a + b < 0.5;
    let mut h = h0;
    while h >= REFINE_STEP {
        let mut moved = false;
        for (da, db) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, -h), (-h, h)] {
            let (a, b) = (d1 + da, d2 + db);
            if feasible(a, b) {
                let v = objective(n, epsilon, a, b);
                if v > best {
                    best = v;
                    d1 = a;
                    d2 = b;
                    moved = true;
                }
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    Ok(Optimum {
        value: best.max(0.0),
        raw: best,
        delta1: d1,
        delta2: d2,
    })
}

/// A leakage curve `n ↦ QIL(n)` of some quantum protocol.
pub trait QilCurve: Sync {
    fn qil(&self, n: f64) -> f64;
}

/// `QIL(n) = scale · μ · log2 n` for a coherent-state fingerprinting protocol.
///
/// The visibility, dark count rate and transmissivity describe the
/// experimental setting and feed an external computation of `μ`; the
/// default formula does not read them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumModel {
    pub mu: f64,
    pub visibility: f64,
    pub dark_rate: f64,
    pub transmissivity: f64,
    pub scale: f64,
}

pub const DEFAULT_MU: f64 = 1000.0;

impl Default for QuantumModel {
    fn default() -> Self {
        QuantumModel {
            mu: DEFAULT_MU,
            visibility: 0.98,
            dark_rate: 0.11,
            transmissivity: 0.3,
            scale: 1.0,
        }
    }
}

impl QuantumModel {
    pub fn with_mu(mu: f64) -> Self {
        QuantumModel { mu, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu >= 0.0
            && self.mu.is_finite()
            && self.visibility > 0.0
            && self.visibility <= 1.0
            && self.dark_rate >= 0.0
            && self.transmissivity > 0.0
            && self.transmissivity <= 1.0
            && self.scale >= 0.0
            && self.scale.is_finite();
        if !ok {
            return Err(Error::domain("quantum model parameters out of range"));
        }
        Ok(())
    }
}

impl QilCurve for QuantumModel {
    fn qil(&self, n: f64) -> f64 {
        self.scale * self.mu * n.log2()
    }
}

pub fn qil_upper(model: &QuantumModel, n: f64) -> f64 {
    model.qil(n)
}

/// A curve given by sample points, interpolated linearly in `log n` and
/// held constant outside the sampled range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedCurve {
    points: Vec<(f64, f64)>,
}

impl TabulatedCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|(n, q)| !(*n >= 1.0) || !q.is_finite()) {
            return Err(Error::domain(
                "tabulated curve needs points with n ≥ 1 and finite values",
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(TabulatedCurve { points })
    }
}

impl QilCurve for TabulatedCurve {
    fn qil(&self, n: f64) -> f64 {
        let pts = &self.points;
        if n <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((n0, q0), (n1, q1)) = (w[0], w[1]);
            if n <= n1 {
                let t = (n.ln() - n0.ln()) / (n1.ln() - n0.ln());
                return q0 + t * (q1 - q0);
            }
        }
        pts[pts.len() - 1].1
    }
}

/// `steps` points spaced evenly in `log n` from `n_min` to `n_max`.
pub fn log_space(n_min: f64, n_max: f64, steps: usize) -> Result<Vec<f64>> {
    check_n(n_min)?;
    check_n(n_max)?;
    if steps == 0 || n_max < n_min {
        return Err(Error::domain("sweep range must be nonempty"));
    }
    if steps == 1 {
        return Ok(vec![n_min]);
    }
    let (a, b) = (n_min.ln(), n_max.ln());
    Ok((0..steps)
        .map(|i| {
            if i == 0 {
                n_min
            } else if i + 1 == steps {
                n_max
            } else {
                (a + (b - a) * i as f64 / (steps - 1) as f64).exp()
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: f64,
    pub cc_lower: f64,
    pub il_lower: f64,
    pub delta1_opt: f64,
    pub delta2_opt: f64,
    pub qil_upper: f64,
    pub cc_lower_raw: f64,
    pub il_lower_raw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub epsilon: f64,
    pub rows: Vec<BoundRow>,
}

pub fn bound_row(n: f64, epsilon: f64, curve: &dyn QilCurve) -> Result<BoundRow> {
    let cc_raw = cc_priv_lower_eq_raw(n, epsilon)?;
    let opt = il_lower_eq_opt(n, epsilon)?;
    Ok(BoundRow {
        n,
        cc_lower: cc_raw.max(0.0),
        il_lower: opt.value,
        delta1_opt: opt.delta1,
        delta2_opt: opt.delta2,
        qil_upper: curve.qil(n),
        cc_lower_raw: cc_raw,
        il_lower_raw: opt.raw,
    })
}

/// Rows at each `n`, computed independently and returned in order.
pub fn sweep(epsilon: f64, ns: &[f64], curve: &dyn QilCurve, exec: Exec) -> Result<BoundCurve> {
    let rows = exec.map_slice(ns, |&n| bound_row(n, epsilon, curve));
    Ok(BoundCurve {
        epsilon,
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub crossover_n: Option<f64>,
    pub qil_at: Option<f64>,
    pub il_at: Option<f64>,
}

/// Smallest integer `n` in `[n_min, n_max]` with `QIL(n) < IL_lower(n)`:
/// a log-spaced scan locates the first bracket, then bisection narrows it
/// to a single integer.
pub fn crossover(
    curve: &dyn QilCurve,
    epsilon: f64,
    n_min: f64,
    n_max: f64,
    steps: usize,
    exec: Exec,
) -> Result<Crossover> {
    let below = |n: f64| -> Result<(bool, f64, f64)> {
        let il = il_lower_eq_opt(n, epsilon)?.value;
        let q = curve.qil(n);
        Ok((q < il, q, il))
    };
    let grid = log_space(n_min.ceil(), n_max.floor().max(n_min.ceil()), steps.max(2))?;
    let marks = exec.map_slice(&grid, |&n| below(n.round()));
    let mut prev: Option<f64> = None;
    for (k, m) in marks.into_iter().enumerate() {
        let (hit, q, il) = m?;
        if hit {
            let n_hit = grid[k].round();
            let (mut lo, mut hi) = match prev {
                None => {
                    return Ok(Crossover {
                        crossover_n: Some(n_hit),
                        qil_at: Some(q),
                        il_at: Some(il),
                    })
                }
                Some(lo) => (lo, n_hit),
            };
            // invariant: lo fails, hi holds
            while hi - lo > 1.0 {
                let mid = ((lo + hi) / 2.0).floor();
                if below(mid)?.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let (_, q, il) = below(hi)?;
            return Ok(Crossover {
                crossover_n: Some(hi),
                qil_at: Some(q),
                il_at: Some(il),
            });
        }
        prev = Some(grid[k].round());
    }
    Ok(Crossover {
        crossover_n: None,
        qil_at: None,
        il_at: None,
    })
}
