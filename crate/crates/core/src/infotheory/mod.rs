//! Exact finite information theory.
//!
//! All quantities are in bits. Probabilities are `f64` and identities are
//! expected to hold within [`TOL`]. The convention `0 · log(1/0) = 0` is used
//! throughout.

mod capacity;
mod joint;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use capacity::{capacity, mutual_info_at, CapacityResult, Channel};
pub use joint::{cond_mutual_info, mutual_info, JointDist, Register};

/// Tolerance on normalization and on information identities.
pub const TOL: f64 = 1e-9;

/// An ordered list of distinct opaque labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet must be nonempty".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate label `{s}`")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Labels `"0"`, `"1"`, ..., `"n-1"`.
    pub fn indexed(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Alphabet {
            symbols: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    /// All binary strings of length `bits`, in lexicographic order.
    /// Zero bits gives the one-symbol alphabet `[""]`, rendered as `"-"`.
    pub fn binary(bits: u32) -> Self {
        if bits == 0 {
            return Self::singleton();
        }
        let n = 1usize << bits;
        Alphabet {
            symbols: (0..n)
                .map(|i| format!("{:0width$b}", i, width = bits as usize))
                .collect(),
        }
    }

    pub fn singleton() -> Self {
        Alphabet {
            symbols: vec!["-".to_string()],
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == label)
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Self> {
        Alphabet::new(v)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// A probability distribution over an [`Alphabet`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist", into = "RawDist")]
pub struct Dist {
    alphabet: Alphabet,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawDist {
    symbols: Alphabet,
    probs: Vec<f64>,
}

impl TryFrom<RawDist> for Dist {
    type Error = Error;

    fn try_from(r: RawDist) -> Result<Self> {
        Dist::new(r.symbols, r.probs)
    }
}

impl From<Dist> for RawDist {
    fn from(d: Dist) -> Self {
        RawDist {
            symbols: d.alphabet,
            probs: d.probs,
        }
    }
}

impl Dist {
    pub fn new(alphabet: Alphabet, probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, alphabet.len())?;
        Ok(Dist { alphabet, probs })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let n = alphabet.len();
        Dist {
            alphabet,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(alphabet: Alphabet, index: usize) -> Self {
        let mut probs = vec![0.0; alphabet.len()];
        probs[index] = 1.0;
        Dist { alphabet, probs }
    }

    /// The one-symbol distribution used for absent randomness registers.
    pub fn trivial() -> Self {
        Dist::point(Alphabet::singleton(), 0)
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(alphabet: Alphabet, weights: &[f64]) -> Result<Self> {
        if weights.len() != alphabet.len() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidDist(
                "weights must be nonnegative and match the alphabet".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDist("weights sum to zero".into()));
        }
        Ok(Dist {
            alphabet,
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the distribution lives on a single symbol of a one-symbol alphabet.
    pub fn is_trivial(&self) -> bool {
        self.probs.len() == 1
    }

    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }
}

pub(crate) fn check_probs(probs: &[f64], len: usize) -> Result<()> {
    if probs.len() != len {
        return Err(Error::InvalidDist(format!(
            "{} probabilities for {} symbols",
            probs.len(),
            len
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDist(format!("entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > TOL {
        return Err(Error::InvalidDist(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Shannon entropy of `d` in bits.
pub fn entropy(d: &Dist) -> f64 {
    d.entropy()
}

/// Entropy of an unchecked probability vector.
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Kullback–Leibler divergence `D(p || q)` in bits; infinite when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            d += pi * (pi / qi).log2();
        }
    }
    d
}

/// Total variation distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        let two = Dist::uniform(Alphabet::indexed(2));
        assert!((entropy(&two) - 1.0).abs() < 1e-15);
        let point = Dist::point(Alphabet::indexed(5), 3);
        assert_eq!(entropy(&point), 0.0);
        let biased = Dist::new(Alphabet::indexed(2), vec![0.11, 0.89]).unwrap();
        // -0.11 log2 0.11 - 0.89 log2 0.89, evaluated term by term.
        let direct = 0.11 * (1.0f64 / 0.11).log2() + 0.89 * (1.0f64 / 0.89).log2();
        assert!((entropy(&biased) - direct).abs() < 1e-15);
        assert!((entropy(&biased) - 0.49991).abs() < 1e-5);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(Dist::new(Alphabet::indexed(2), vec![0.5, 0.6]).is_err());
        assert!(Dist::new(Alphabet::indexed(2), vec![1.5, -0.5]).is_err());
        assert!(Dist::new(Alphabet::indexed(3), vec![0.5, 0.5]).is_err());
        assert!(Dist::new(Alphabet::indexed(2), vec![f64::NAN, 1.0]).is_err());
        // within tolerance is accepted
        assert!(Dist::new(Alphabet::indexed(2), vec![0.5, 0.5 + 1e-12]).is_ok());
    }

    #[test]
    fn alphabet_labels_are_distinct() {
        assert!(Alphabet::new(["a", "b", "a"]).is_err());
        assert!(Alphabet::new(Vec::<String>::new()).is_err());
        let b = Alphabet::binary(2);
        assert_eq!(b.symbols(), &["00", "01", "10", "11"]);
        assert_eq!(b.index_of("10"), Some(2));
    }

    #[test]
    fn dist_json_shape() {
        let d = Dist::new(Alphabet::new(["h", "t"]).unwrap(), vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"symbols":["h","t"],"probs":[0.25,0.75]}"#);
        let back: Dist = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
        let bad = r#"{"symbols":["h","t"],"probs":[0.25,0.25]}"#;
        assert!(serde_json::from_str::<Dist>(bad).is_err());
    }

    #[test]
    fn entropy_bounded_by_log_alphabet() {
        let d = Dist::from_weights(Alphabet::indexed(6), &[1.0, 2.0, 3.0, 0.0, 5.0, 1.0]).unwrap();
        let h = entropy(&d);
        assert!(h >= 0.0 && h <= 6f64.log2());
    }
}
