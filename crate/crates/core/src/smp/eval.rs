use serde::{Deserialize, Serialize};

use super::law::{Outcome, View, BEYOND};
use super::protocol::{Side, SmpProtocol};
use super::{check_cells, FunctionTable};
use crate::infotheory::{Dist, JointDist, Register};
use crate::{Error, Exec, Result};

/// Exact evaluator holding both parties' per-input laws and the referee's
/// decision table over base views.
pub struct Evaluator<'p> {
    p: &'p SmpProtocol,
    /// `[view_a][view_b][z]`, probabilities over the referee's coin.
    table: Vec<f64>,
    views_b: usize,
    alice: Vec<Vec<Outcome>>,
    bob: Vec<Vec<Outcome>>,
}

impl<'p> Evaluator<'p> {
    pub fn new(p: &'p SmpProtocol) -> Result<Self> {
        Self::with_exec(p, Exec::default())
    }

    pub fn with_exec(p: &'p SmpProtocol, exec: Exec) -> Result<Self> {
        p.validate()?;
        let table = referee_table(p)?;
        let alice = side_laws(&p.alice, p.x.len(), exec)?;
        let bob = side_laws(&p.bob, p.y.len(), exec)?;
        let atoms_a: usize = alice.iter().map(Vec::len).sum();
        let atoms_b: usize = bob.iter().map(Vec::len).sum();
        check_cells(atoms_a as u128 * atoms_b as u128 * p.z.len() as u128)?;
        Ok(Evaluator {
            p,
            table,
            views_b: p.bob.base_views(),
            alice,
            bob,
        })
    }

    pub fn protocol(&self) -> &SmpProtocol {
        self.p
    }

    pub fn alice_law(&self, x: usize) -> &[Outcome] {
        &self.alice[x]
    }

    pub fn bob_law(&self, y: usize) -> &[Outcome] {
        &self.bob[y]
    }

    /// Output distribution on input `(x, y)` as a probability vector over Z.
    pub fn output_probs(&self, x: usize, y: usize) -> Vec<f64> {
        self.combine(&self.alice[x], &self.bob[y])
    }

    /// Output law for arbitrary laws of the two parties' views.
    pub fn combine(&self, la: &[Outcome], lb: &[Outcome]) -> Vec<f64> {
        let mut out = vec![0.0; self.p.z.len()];
        for a in la {
            for b in lb {
                self.decide(&a.view, &b.view, a.prob * b.prob, &mut out);
            }
        }
        out
    }

    /// Adds `w` times the referee's output law on views `(va, vb)` to `out`.
    pub fn decide(&self, va: &View, vb: &View, w: f64, out: &mut [f64]) {
        match (va, vb) {
            (View::Abort, _) | (_, View::Abort) => {
                let share = w / out.len() as f64;
                out.iter_mut().for_each(|o| *o += share);
            }
            (View::Tuple(vs), _) => {
                let share = w / vs.len() as f64;
                for v in vs.iter() {
                    self.decide(v, vb, share, out);
                }
            }
            (_, View::Tuple(vs)) => {
                let share = w / vs.len() as f64;
                for v in vs.iter() {
                    self.decide(va, v, share, out);
                }
            }
            (View::Base(a), View::Base(b)) => {
                let nz = out.len();
                let start = (*a as usize * self.views_b + *b as usize) * nz;
                for (o, q) in out.iter_mut().zip(&self.table[start..start + nz]) {
                    *o += w * q;
                }
            }
        }
    }

    /// `Pr[Π(x, y) ≠ f(x, y)]`, summed over wrong outputs.
    pub fn error(&self, f: &FunctionTable, x: usize, y: usize) -> f64 {
        let want = f.value(x, y);
        self.output_probs(x, y)
            .iter()
            .enumerate()
            .filter(|(z, _)| *z != want)
            .map(|(_, p)| p)
            .sum()
    }

    /// Per-input errors, row-major over `(x, y)`.
    pub fn error_table(&self, f: &FunctionTable, exec: Exec) -> Result<Vec<Vec<f64>>> {
        check_function(self.p, f)?;
        Ok(exec.map_range(self.p.x.len(), |x| {
            (0..self.p.y.len()).map(|y| self.error(f, x, y)).collect()
        }))
    }

    pub fn worst_error(&self, f: &FunctionTable) -> Result<f64> {
        Ok(self
            .error_table(f, Exec::default())?
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max))
    }
}

fn side_laws(side: &Side, inputs: usize, exec: Exec) -> Result<Vec<Vec<Outcome>>> {
    let top = side.top_level();
    exec.try_map_range(inputs, |x| side.law_at(top, x, None, false))
}

fn referee_table(p: &SmpProtocol) -> Result<Vec<f64>> {
    let (a, b) = (&p.alice, &p.bob);
    let nz = p.z.len();
    let coin = p.referee.randomness.probs();
    check_cells(a.base_views() as u128 * b.base_views() as u128 * coin.len() as u128)?;
    let mut table = vec![0.0; a.base_views() * b.base_views() * nz];
    for rac in 0..a.shared.len() {
        for ma in 0..a.messages.len() {
            let va = a.base_view(rac, ma) as usize;
            for rbc in 0..b.shared.len() {
                for mb in 0..b.messages.len() {
                    let vb = b.base_view(rbc, mb) as usize;
                    let start = (va * b.base_views() + vb) * nz;
                    for (rc, &pc) in coin.iter().enumerate() {
                        let z = p.referee_output(ma, mb, rc, rac, rbc);
                        table[start + z] += pc;
                    }
                }
            }
        }
    }
    Ok(table)
}

pub(crate) fn check_function(p: &SmpProtocol, f: &FunctionTable) -> Result<()> {
    if f.x_size != p.x.len() || f.y_size != p.y.len() || f.z_size > p.z.len() {
        return Err(Error::protocol(format!(
            "function table is {}×{}→{}, protocol is {}×{}→{}",
            f.x_size,
            f.y_size,
            f.z_size,
            p.x.len(),
            p.y.len(),
            p.z.len()
        )));
    }
    Ok(())
}

/// Exact output distribution of `Π(x, y)`.
pub fn output_dist(p: &SmpProtocol, x: usize, y: usize) -> Result<Dist> {
    check_input(p, x, y)?;
    let e = Evaluator::new(p)?;
    Dist::new(p.z.clone(), e.output_probs(x, y))
}

/// Full joint law of every register of a table protocol on input `(x, y)`,
/// over `R_A, R_AC, R_B, R_BC, R_C, M_A, M_B, Z`.
pub fn output_joint(p: &SmpProtocol, x: usize, y: usize) -> Result<JointDist> {
    check_input(p, x, y)?;
    p.validate()?;
    if p.has_stages() {
        return Err(Error::Unsupported("register tables of staged sides".into()));
    }
    let (a, b) = (&p.alice, &p.bob);
    let dims = [
        a.private.len(),
        a.shared.len(),
        b.private.len(),
        b.shared.len(),
        p.referee.randomness.len(),
        a.messages.len(),
        b.messages.len(),
        p.z.len(),
    ];
    let cells: u128 = dims.iter().map(|&d| d as u128).product();
    check_cells(cells)?;
    let mut probs = vec![0.0; cells as usize];
    for (ra, &pa) in a.private.probs().iter().enumerate() {
        for (rac, &pac) in a.shared.probs().iter().enumerate() {
            let ma = a.message_of(x, ra, rac);
            for (rb, &pb) in b.private.probs().iter().enumerate() {
                for (rbc, &pbc) in b.shared.probs().iter().enumerate() {
                    let mb = b.message_of(y, rb, rbc);
                    for (rc, &pc) in p.referee.randomness.probs().iter().enumerate() {
                        let z = p.referee_output(ma, mb, rc, rac, rbc);
                        let idx = [ra, rac, rb, rbc, rc, ma, mb, z]
                            .iter()
                            .zip(&dims)
                            .fold(0usize, |acc, (&i, &d)| acc * d + i);
                        probs[idx] += pa * pac * pb * pbc * pc;
                    }
                }
            }
        }
    }
    let regs = vec![
        Register::new("R_A", a.private.alphabet().clone()),
        Register::new("R_AC", a.shared.alphabet().clone()),
        Register::new("R_B", b.private.alphabet().clone()),
        Register::new("R_BC", b.shared.alphabet().clone()),
        Register::new("R_C", p.referee.randomness.alphabet().clone()),
        Register::new("M_A", a.messages.clone()),
        Register::new("M_B", b.messages.clone()),
        Register::new("Z", p.z.clone()),
    ];
    JointDist::new(regs, probs)
}

fn check_input(p: &SmpProtocol, x: usize, y: usize) -> Result<()> {
    if x >= p.x.len() || y >= p.y.len() {
        return Err(Error::domain(format!("input ({x}, {y}) outside X × Y")));
    }
    Ok(())
}

pub fn error(p: &SmpProtocol, f: &FunctionTable, x: usize, y: usize) -> Result<f64> {
    check_input(p, x, y)?;
    check_function(p, f)?;
    Ok(Evaluator::new(p)?.error(f, x, y))
}

pub fn worst_error(p: &SmpProtocol, f: &FunctionTable) -> Result<f64> {
    Evaluator::new(p)?.worst_error(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    /// Worst-case bits when every shared value is sent along with the
    /// message; absent when a side reads an unbounded sample stream.
    pub cc_priv: Option<u32>,
    /// Worst-case message bits.
    pub cc_sh: u32,
    /// `cc_av_per_input[x][y]`: expected total message length.
    pub cc_av_per_input: Vec<Vec<f64>>,
    pub cc_av: f64,
    /// Expected length of Alice's message per input, `c_A(x)`.
    pub alice_expected: Vec<f64>,
    pub bob_expected: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_input_error: Option<Vec<Vec<f64>>>,
}

/// `E[ℓ]` as the shortest live length plus the mean excess over it, so a
/// side with one length reports exactly that length.
fn expected_len(law: &[Outcome]) -> f64 {
    let live = law.iter().filter(|o| o.prob > 0.0);
    if live.clone().any(|o| o.len == BEYOND) {
        return f64::INFINITY;
    }
    let Some(base) = live.clone().map(|o| o.len).min() else {
        return 0.0;
    };
    let total: f64 = live.clone().map(|o| o.prob).sum();
    let excess: f64 = live.map(|o| o.prob * (o.len - base) as f64).sum();
    base as f64 + excess / total
}

impl Evaluator<'_> {
    pub fn costs(&self) -> CostReport {
        let (a, b) = (&self.p.alice, &self.p.bob);
        let alice_expected: Vec<f64> = self.alice.iter().map(|l| expected_len(l)).collect();
        let bob_expected: Vec<f64> = self.bob.iter().map(|l| expected_len(l)).collect();
        let cc_av_per_input: Vec<Vec<f64>> = alice_expected
            .iter()
            .map(|ca| bob_expected.iter().map(|cb| ca + cb).collect())
            .collect();
        let cc_av = cc_av_per_input.iter().flatten().copied().fold(0.0, f64::max);
        let (ta, tb) = (a.top_level(), b.top_level());
        let cc_sh = a.max_len(ta) + b.max_len(tb);
        let cc_priv = match (a.shared_bits(ta), b.shared_bits(tb)) {
            (Some(sa), Some(sb)) => Some(cc_sh + sa + sb),
            _ => None,
        };
        CostReport {
            cc_priv,
            cc_sh,
            cc_av_per_input,
            cc_av,
            alice_expected,
            bob_expected,
            worst_error: None,
            per_input_error: None,
        }
    }
}

pub fn costs(p: &SmpProtocol) -> Result<CostReport> {
    Ok(Evaluator::new(p)?.costs())
}

/// [`costs`] together with the per-input and worst-case error against `f`.
pub fn costs_with_error(p: &SmpProtocol, f: &FunctionTable) -> Result<CostReport> {
    let e = Evaluator::new(p)?;
    let mut r = e.costs();
    let table = e.error_table(f, Exec::default())?;
    r.worst_error = Some(table.iter().flatten().copied().fold(0.0, f64::max));
    r.per_input_error = Some(table);
    Ok(r)
}
