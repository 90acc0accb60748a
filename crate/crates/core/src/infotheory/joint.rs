use std::collections::HashSet;

use super::{check_probs, entropy_of, Alphabet, Dist};
use crate::{Error, Result};

/// A named register of a [`JointDist`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Register {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Register {
            name: name.into(),
            alphabet,
        }
    }
}

/// Dense joint table over named registers, row-major with the last register
/// varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    registers: Vec<Register>,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(registers: Vec<Register>, probs: Vec<f64>) -> Result<Self> {
        let mut names = HashSet::new();
        for r in &registers {
            if !names.insert(r.name.as_str()) {
                return Err(Error::InvalidDist(format!("duplicate register `{}`", r.name)));
            }
        }
        if registers.is_empty() {
            return Err(Error::InvalidDist("joint distribution needs a register".into()));
        }
        let cells: usize = registers.iter().map(|r| r.alphabet.len()).product();
        check_probs(&probs, cells)?;
        Ok(JointDist { registers, probs })
    }

    pub fn from_dist(name: impl Into<String>, d: &Dist) -> Self {
        JointDist {
            registers: vec![Register::new(name, d.alphabet().clone())],
            probs: d.probs().to_vec(),
        }
    }

    /// Independent product; the registers of `other` become the fastest-varying.
    pub fn product(&self, other: &JointDist) -> Result<Self> {
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        JointDist::new(registers, probs)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn register_index(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let i = self.register_index(n)?;
            if out.contains(&i) {
                return Err(Error::OverlappingGroups(n.to_string()));
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Marginal probabilities over the registers at `idx`, in that order.
    fn marginal_probs(&self, idx: &[usize]) -> Vec<f64> {
        let sizes: Vec<usize> = self.registers.iter().map(|r| r.alphabet.len()).collect();
        let mut out_strides = vec![0usize; sizes.len()];
        let mut stride = 1;
        for &i in idx.iter().rev() {
            out_strides[i] = stride;
            stride *= sizes[i];
        }
        let mut out = vec![0.0; stride];
        let mut digits = vec![0usize; sizes.len()];
        let mut target = 0usize;
        for &p in &self.probs {
            out[target] += p;
            // odometer increment, last register fastest
            for k in (0..sizes.len()).rev() {
                digits[k] += 1;
                target += out_strides[k];
                if digits[k] < sizes[k] {
                    break;
                }
                target -= out_strides[k] * sizes[k];
                digits[k] = 0;
            }
        }
        out
    }

    pub fn marginal(&self, names: &[&str]) -> Result<JointDist> {
        let idx = self.indices(names)?;
        if idx.is_empty() {
            return Err(Error::InvalidDist("empty marginal".into()));
        }
        let registers = idx.iter().map(|&i| self.registers[i].clone()).collect();
        Ok(JointDist {
            registers,
            probs: self.marginal_probs(&idx),
        })
    }

    /// Joint entropy of the named registers; the empty set has entropy 0.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let idx = self.indices(names)?;
        if idx.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal_probs(&idx)))
    }
}

fn check_disjoint(groups: &[&[&str]]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        for n in *g {
            if !seen.insert(*n) {
                return Err(Error::OverlappingGroups(n.to_string()));
            }
        }
    }
    Ok(())
}

fn concat<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// `I(A; B) = H(A) + H(B) − H(AB)`.
pub fn mutual_info(j: &JointDist, a: &[&str], b: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b])?;
    Ok(j.entropy(a)? + j.entropy(b)? - j.entropy(&concat(&[a, b]))?)
}

/// `I(A; B | C) = H(AC) + H(BC) − H(ABC) − H(C)`.
pub fn cond_mutual_info(j: &JointDist, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    check_disjoint(&[a, b, c])?;
    Ok(j.entropy(&concat(&[a, c]))? + j.entropy(&concat(&[b, c]))? - j.entropy(&concat(&[a, b, c]))? - j.entropy(c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::TOL;
    use proptest::prelude::*;

    fn bits(names: &[&str], probs: Vec<f64>) -> JointDist {
        let regs = names.iter().map(|n| Register::new(*n, Alphabet::indexed(2))).collect();
        JointDist::new(regs, probs).unwrap()
    }

    #[test]
    fn independent_bits_share_nothing() {
        let j = bits(&["A", "B"], vec![0.25; 4]);
        assert!(mutual_info(&j, &["A"], &["B"]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn copied_bit_shares_one_bit() {
        let j = bits(&["A", "B"], vec![0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_info(&j, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn binary_symmetric_channel() {
        let f = 0.11;
        let j = bits(&["X", "Y"], vec![0.5 * (1.0 - f), 0.5 * f, 0.5 * f, 0.5 * (1.0 - f)]);
        let h = -(f * f.log2() + (1.0 - f) * (1.0 - f).log2());
        let i = mutual_info(&j, &["X"], &["Y"]).unwrap();
        assert!((i - (1.0 - h)).abs() < 1e-12);
        assert!((i - 0.50009).abs() < 1e-4);
    }

    #[test]
    fn three_copies_condition_to_zero() {
        let j = bits(&["A", "B", "C"], vec![0.5, 0., 0., 0., 0., 0., 0., 0.5]);
        assert!(cond_mutual_info(&j, &["A"], &["B"], &["C"]).unwrap().abs() < 1e-15);
        assert!((mutual_info(&j, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn irrelevant_conditioning() {
        let ab = bits(&["A", "B"], vec![0.4, 0.1, 0.2, 0.3]);
        let c = JointDist::from_dist("C", &Dist::new(Alphabet::indexed(3), vec![0.2, 0.3, 0.5]).unwrap());
        let j = ab.product(&c).unwrap();
        let plain = mutual_info(&ab, &["A"], &["B"]).unwrap();
        let cond = cond_mutual_info(&j, &["A"], &["B"], &["C"]).unwrap();
        assert!((plain - cond).abs() < TOL);
    }

    #[test]
    fn group_errors() {
        let j = bits(&["A", "B"], vec![0.25; 4]);
        assert!(matches!(
            mutual_info(&j, &["A"], &["A"]),
            Err(Error::OverlappingGroups(_))
        ));
        assert!(matches!(
            mutual_info(&j, &["A"], &["Q"]),
            Err(Error::UnknownRegister(_))
        ));
        assert!(matches!(
            cond_mutual_info(&j, &["A"], &["B"], &["B"]),
            Err(Error::OverlappingGroups(_))
        ));
    }

    #[test]
    fn marginal_order_follows_request() {
        let regs = vec![
            Register::new("A", Alphabet::indexed(2)),
            Register::new("B", Alphabet::indexed(3)),
        ];
        let probs = vec![0.1, 0.2, 0.3, 0.05, 0.15, 0.2];
        let j = JointDist::new(regs, probs).unwrap();
        let ba = j.marginal(&["B", "A"]).unwrap();
        assert_eq!(ba.registers()[0].name, "B");
        let expect = [0.1, 0.05, 0.2, 0.15, 0.3, 0.2];
        for (a, b) in ba.probs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    /// Brute-force `Σ_c p(c) I(A;B | C=c)` over an explicit 3-index table.
    fn brute_cmi(t: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
        let at = |a: usize, b: usize, c: usize| t[(a * nb + b) * nc + c];
        let mut total = 0.0;
        for c in 0..nc {
            let pc: f64 = (0..na)
                .flat_map(|a| (0..nb).map(move |b| (a, b)))
                .map(|(a, b)| at(a, b, c))
                .sum();
            if pc <= 0.0 {
                continue;
            }
            for a in 0..na {
                let pa: f64 = (0..nb).map(|b| at(a, b, c)).sum::<f64>() / pc;
                for b in 0..nb {
                    let pb: f64 = (0..na).map(|a2| at(a2, b, c)).sum::<f64>() / pc;
                    let pab = at(a, b, c) / pc;
                    if pab > 0.0 {
                        total += pc * pab * (pab / (pa * pb)).log2();
                    }
                }
            }
        }
        total
    }

    fn table(sizes: [usize; 3]) -> impl Strategy<Value = (Vec<f64>, [usize; 3])> {
        let n = sizes.iter().product::<usize>();
        proptest::collection::vec(0.0f64..1.0, n).prop_map(move |w| {
            let s: f64 = w.iter().sum::<f64>().max(1e-12);
            (w.into_iter().map(|x| x / s).collect(), sizes)
        })
    }

    fn any_table() -> impl Strategy<Value = (Vec<f64>, [usize; 3])> {
        (1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(a, b, c)| table([a, b, c]))
    }

    fn joint3(t: &[f64], s: [usize; 3]) -> JointDist {
        let regs = vec![
            Register::new("A", Alphabet::indexed(s[0])),
            Register::new("B", Alphabet::indexed(s[1])),
            Register::new("C", Alphabet::indexed(s[2])),
        ];
        let total: f64 = t.iter().sum();
        let probs = if total > 0.0 {
            t.iter().map(|p| p / total).collect()
        } else {
            vec![1.0 / t.len() as f64; t.len()]
        };
        JointDist::new(regs, probs).unwrap()
    }

    #[test]
    fn cmi_matches_brute_force_on_2x2x2() {
        let t = [0.05, 0.1, 0.2, 0.05, 0.15, 0.1, 0.05, 0.3];
        let j = joint3(&t, [2, 2, 2]);
        let lib = cond_mutual_info(&j, &["A"], &["B"], &["C"]).unwrap();
        assert!((lib - brute_cmi(j.probs(), 2, 2, 2)).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn symmetry_and_bounds((t, s) in any_table()) {
            let j = joint3(&t, s);
            let ab = mutual_info(&j, &["A"], &["B"]).unwrap();
            let ba = mutual_info(&j, &["B"], &["A"]).unwrap();
            prop_assert!((ab - ba).abs() < TOL);
            prop_assert!(ab >= -TOL);
            let ha = j.entropy(&["A"]).unwrap();
            let hb = j.entropy(&["B"]).unwrap();
            prop_assert!(ab <= ha.min(hb) + TOL);
        }

        #[test]
        fn chain_rule((t, s) in any_table()) {
            let j = joint3(&t, s);
            let lhs = mutual_info(&j, &["A"], &["B", "C"]).unwrap();
            let rhs = mutual_info(&j, &["A"], &["B"]).unwrap()
                + cond_mutual_info(&j, &["A"], &["C"], &["B"]).unwrap();
            prop_assert!((lhs - rhs).abs() < TOL);
        }

        #[test]
        fn cmi_matches_summation_oracle((t, s) in any_table()) {
            let j = joint3(&t, s);
            let lib = cond_mutual_info(&j, &["A"], &["B"], &["C"]).unwrap();
            prop_assert!(lib >= -TOL);
            prop_assert!((lib - brute_cmi(j.probs(), s[0], s[1], s[2])).abs() < TOL);
        }
    }
}
