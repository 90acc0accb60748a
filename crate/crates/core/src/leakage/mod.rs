//! Information leakage and information complexity of SMP protocols.
//!
//! Distributional quantities are evaluated on the exact joint law of
//! `X, Y, R_AC, M_A, R_BC, M_B, R_C`. Worst-case values use the reduction to
//! product priors, under which `IC` splits into two channel capacities.

pub mod grid;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::infotheory::{capacity, cond_mutual_info, mutual_info, Alphabet, Channel, Dist, JointDist, Register, TOL};
use crate::smp::{Side, SmpProtocol};
use crate::{Error, Result};

const X: &str = "X";
const Y: &str = "Y";
const RAC: &str = "R_AC";
const MA: &str = "M_A";
const RBC: &str = "R_BC";
const MB: &str = "M_B";
const RC: &str = "R_C";

pub const CAPACITY_TOL: f64 = 1e-9;
pub const CAPACITY_MAX_ITER: usize = 100_000;

/// Per-input law of `(R_s, M)` for one side, with messages relabelled densely.
#[derive(Clone, Debug)]
pub struct SideRegisters {
    pub shared: usize,
    pub messages: usize,
    /// `law[x][s * messages + m]`.
    pub law: Vec<Vec<f64>>,
}

impl SideRegisters {
    /// The channel `x ↦ (R_s, M)`.
    pub fn channel(&self) -> Result<Channel> {
        Channel::new(
            Alphabet::indexed(self.law.len()),
            Alphabet::indexed(self.shared * self.messages),
            self.law.clone(),
        )
    }
}

pub fn side_registers(side: &Side, inputs: usize) -> Result<SideRegisters> {
    let top = side.top_level();
    let mut laws = Vec::with_capacity(inputs);
    let mut shared_ids = BTreeMap::new();
    let mut msg_ids = BTreeMap::new();
    for x in 0..inputs {
        let law = side.law_at(top, x, None, true)?;
        for o in &law {
            let n = shared_ids.len();
            shared_ids.entry(o.shared).or_insert(n);
            let n = msg_ids.len();
            msg_ids.entry(o.msg).or_insert(n);
        }
        laws.push(law);
    }
    let (ns, nm) = (shared_ids.len(), msg_ids.len());
    let law = laws
        .into_iter()
        .map(|l| {
            let mut row = vec![0.0; ns * nm];
            for o in l {
                row[shared_ids[&o.shared] * nm + msg_ids[&o.msg]] += o.prob;
            }
            row
        })
        .collect();
    Ok(SideRegisters {
        shared: ns,
        messages: nm,
        law,
    })
}

fn check_prior(p: &SmpProtocol, mu: &JointDist) -> Result<()> {
    let regs = mu.registers();
    if regs.len() != 2 || regs[0].alphabet.len() != p.x.len() || regs[1].alphabet.len() != p.y.len() {
        return Err(Error::domain("input prior must be a joint distribution over X × Y"));
    }
    Ok(())
}

/// Joint prior over `X × Y` from a row-major probability table.
pub fn prior(p: &SmpProtocol, probs: Vec<f64>) -> Result<JointDist> {
    JointDist::new(
        vec![Register::new(X, p.x.clone()), Register::new(Y, p.y.clone())],
        probs,
    )
}

pub fn product_prior(p: &SmpProtocol, px: &[f64], py: &[f64]) -> Result<JointDist> {
    prior(p, px.iter().flat_map(|a| py.iter().map(move |b| a * b)).collect())
}

pub fn uniform_prior(p: &SmpProtocol) -> Result<JointDist> {
    let n = p.x.len() * p.y.len();
    prior(p, vec![1.0 / n as f64; n])
}

/// Precomputed side laws for repeated evaluation under many priors.
#[derive(Clone, Debug)]
pub struct Registers {
    pub alice: SideRegisters,
    pub bob: SideRegisters,
    pub coin: Vec<f64>,
}

impl Registers {
    pub fn new(p: &SmpProtocol) -> Result<Self> {
        p.validate()?;
        let alice = side_registers(&p.alice, p.x.len())?;
        let bob = side_registers(&p.bob, p.y.len())?;
        let cells = (p.x.len() * p.y.len()) as u128
            * (alice.shared * alice.messages) as u128
            * (bob.shared * bob.messages) as u128
            * p.referee.randomness.len() as u128;
        crate::smp::check_cells(cells)?;
        Ok(Registers {
            alice,
            bob,
            coin: p.referee.randomness.probs().to_vec(),
        })
    }

    /// Exact joint law of every leakage register under the input prior `mu`
    /// (row-major over `X × Y`).
    pub fn joint(&self, mu: &[f64]) -> Result<JointDist> {
        let (a, b) = (&self.alice, &self.bob);
        let (nx, ny) = (a.law.len(), b.law.len());
        let va = a.shared * a.messages;
        let vb = b.shared * b.messages;
        let nc = self.coin.len();
        let mut probs = vec![0.0; nx * ny * va * vb * nc];
        for x in 0..nx {
            for y in 0..ny {
                let w = mu[x * ny + y];
                if w <= 0.0 {
                    continue;
                }
                let base = (x * ny + y) * va;
                for (i, &pa) in a.law[x].iter().enumerate() {
                    if pa <= 0.0 {
                        continue;
                    }
                    let row = ((base + i) * vb) * nc;
                    for (j, &pb) in b.law[y].iter().enumerate() {
                        if pb <= 0.0 {
                            continue;
                        }
                        for (c, &pc) in self.coin.iter().enumerate() {
                            probs[row + j * nc + c] += w * pa * pb * pc;
                        }
                    }
                }
            }
        }
        // (R_AC, M_A) and (R_BC, M_B) are packed shared-major, matching the register order
        let regs = vec![
            Register::new(X, Alphabet::indexed(nx)),
            Register::new(Y, Alphabet::indexed(ny)),
            Register::new(RAC, Alphabet::indexed(a.shared)),
            Register::new(MA, Alphabet::indexed(a.messages)),
            Register::new(RBC, Alphabet::indexed(b.shared)),
            Register::new(MB, Alphabet::indexed(b.messages)),
            Register::new(RC, Alphabet::indexed(nc)),
        ];
        JointDist::new(regs, probs)
    }

    pub fn forms(&self, mu: &[f64]) -> Result<Forms> {
        let j = self.joint(mu)?;
        let form1 = mutual_info(&j, &[X, Y], &[MA, MB, RC, RAC, RBC])?;
        let form2 = cond_mutual_info(&j, &[X, Y], &[MA, MB, RC], &[RAC, RBC])?;
        let il = cond_mutual_info(&j, &[X, Y], &[MA, MB], &[RAC, RBC])?;
        let ic = cond_mutual_info(&j, &[X], &[MA], &[RAC])? + cond_mutual_info(&j, &[Y], &[MB], &[RBC])?;
        let cross = cond_mutual_info(&j, &[MA], &[MB], &[RAC, RBC])?;
        Ok(Forms {
            full: form1,
            with_coin: form2,
            il,
            ic,
            cross,
        })
    }

    /// `IL(Π, μ)` without building the full joint table, for grid searches.
    pub fn il(&self, mu: &[f64]) -> f64 {
        il_fast(self, mu)
    }
}

/// The three equivalent forms of `IL`, together with `IC` and the cross term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forms {
    /// `I(XY; M_A M_B R_C R_AC R_BC)`
    pub full: f64,
    /// `I(XY; M_A M_B R_C | R_AC R_BC)`
    pub with_coin: f64,
    /// `I(XY; M_A M_B | R_AC R_BC)`
    pub il: f64,
    /// `I(X; M_A | R_AC) + I(Y; M_B | R_BC)`
    pub ic: f64,
    /// `I(M_A; M_B | R_AC R_BC)`
    pub cross: f64,
}

impl Forms {
    /// Largest deviation among the identities tying the forms together.
    pub fn residual(&self) -> f64 {
        [
            (self.full - self.il).abs(),
            (self.with_coin - self.il).abs(),
            (self.ic - self.il - self.cross).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn il_dist(p: &SmpProtocol, mu: &JointDist) -> Result<f64> {
    check_prior(p, mu)?;
    Ok(Registers::new(p)?.forms(mu.probs())?.il)
}

pub fn il_three_forms(p: &SmpProtocol, mu: &JointDist) -> Result<[f64; 3]> {
    check_prior(p, mu)?;
    let f = Registers::new(p)?.forms(mu.probs())?;
    Ok([f.full, f.with_coin, f.il])
}

pub fn ic_dist(p: &SmpProtocol, mu: &JointDist) -> Result<f64> {
    check_prior(p, mu)?;
    Ok(Registers::new(p)?.forms(mu.probs())?.ic)
}

pub fn cross_term(p: &SmpProtocol, mu: &JointDist) -> Result<f64> {
    check_prior(p, mu)?;
    Ok(Registers::new(p)?.forms(mu.probs())?.cross)
}

fn xlogx(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// `IL = H(M_A M_B | R) − H(M_A M_B | X Y R)`, with the conditional law of the
/// messages given the inputs factorizing over the two sides.
fn il_fast(r: &Registers, mu: &[f64]) -> f64 {
    let (a, b) = (&r.alice, &r.bob);
    let ny = b.law.len();
    let (va, vb) = (a.shared * a.messages, b.shared * b.messages);
    let mut pair = vec![0.0; va * vb];
    let mut cond = 0.0;
    let mut rs = vec![0.0; a.shared * b.shared];
    for (x, la) in a.law.iter().enumerate() {
        for (y, lb) in b.law.iter().enumerate() {
            let w = mu[x * ny + y];
            if w <= 0.0 {
                continue;
            }
            for (i, &pa) in la.iter().enumerate() {
                if pa <= 0.0 {
                    continue;
                }
                for (j, &pb) in lb.iter().enumerate() {
                    pair[i * vb + j] += w * pa * pb;
                }
            }
            let ha: f64 = la.iter().map(|&p| xlogx(p)).sum();
            let hb: f64 = lb.iter().map(|&p| xlogx(p)).sum();
            cond += w * (ha + hb);
        }
    }
    for sa in 0..a.shared {
        for sb in 0..b.shared {
            let mut t = 0.0;
            for ma in 0..a.messages {
                for mb in 0..b.messages {
                    t += pair[(sa * a.messages + ma) * vb + sb * b.messages + mb];
                }
            }
            rs[sa * b.shared + sb] = t;
        }
    }
    let h_pair: f64 = -pair.iter().map(|&p| xlogx(p)).sum::<f64>();
    let h_r: f64 = -rs.iter().map(|&p| xlogx(p)).sum::<f64>();
    // H(M|R) − H(M|XYR) = [H(MR) − H(R)] − [H(MR|XY) − H(R)]
    (h_pair - h_r) - (-cond - h_r)
}

/// Worst-case leakage report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub il: f64,
    pub ic: f64,
    /// Cross term at the witness prior.
    pub cross_term: f64,
    pub alice_capacity: f64,
    pub bob_capacity: f64,
    /// Certified upper end of the capacity brackets.
    pub ic_upper: f64,
    pub witness_x: Dist,
    pub witness_y: Dist,
    /// `IL(Π, μ*)` at the product witness; never above `ic`.
    pub il_at_witness: f64,
}

impl LeakageReport {
    pub fn witness_prior(&self) -> JointDist {
        JointDist::from_dist(X, &self.witness_x)
            .product(&JointDist::from_dist(Y, &self.witness_y))
            .expect("distinct register names")
    }
}

/// `IC(Π) = max_μ IC(Π, μ)`, computed as the sum of the capacities of
/// `x ↦ (R_AC, M_A)` and `y ↦ (R_BC, M_B)`.
pub fn ic_worst(p: &SmpProtocol) -> Result<LeakageReport> {
    let regs = Registers::new(p)?;
    let ca = capacity(&regs.alice.channel()?, CAPACITY_TOL, CAPACITY_MAX_ITER)?;
    let cb = capacity(&regs.bob.channel()?, CAPACITY_TOL, CAPACITY_MAX_ITER)?;
    let wx = Dist::new(p.x.clone(), ca.optimal_prior.probs().to_vec())?;
    let wy = Dist::new(p.y.clone(), cb.optimal_prior.probs().to_vec())?;
    let mu: Vec<f64> = wx
        .probs()
        .iter()
        .flat_map(|a| wy.probs().iter().map(move |b| a * b))
        .collect();
    let forms = regs.forms(&mu)?;
    let ic = ca.capacity + cb.capacity;
    Ok(LeakageReport {
        il: ic,
        ic,
        cross_term: forms.cross,
        alice_capacity: ca.capacity,
        bob_capacity: cb.capacity,
        ic_upper: ca.upper() + cb.upper(),
        witness_x: wx,
        witness_y: wy,
        il_at_witness: forms.il,
    })
}

/// `IL(Π)`; equal to `IC(Π)`, with the witness cross-checked.
pub fn il_worst(p: &SmpProtocol) -> Result<LeakageReport> {
    let r = ic_worst(p)?;
    if r.il_at_witness > r.ic_upper + TOL {
        return Err(Error::domain(format!(
            "leakage at the witness prior ({}) exceeds the capacity bound ({})",
            r.il_at_witness, r.ic_upper
        )));
    }
    Ok(r)
}

#[cfg(test)]
mod tests;
