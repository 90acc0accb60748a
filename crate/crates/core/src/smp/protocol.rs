use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::law::SimInput;
use crate::coding::{ceil_log2, kraft_sum};
use crate::infotheory::{check_probs, Alphabet, Dist};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Private,
    Shared,
    Average,
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Private => "private",
            Model::Shared => "shared",
            Model::Average => "average",
        })
    }
}

/// Bit lengths of the messages of one party, constrained by the Kraft
/// inequality so that a prefix-free encoding exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct LengthFunction(Vec<u32>);

impl LengthFunction {
    pub fn new(lengths: Vec<u32>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::protocol("length function needs at least one message"));
        }
        let k = kraft_sum(lengths.iter().copied());
        if k > 1.0 + 1e-12 {
            return Err(Error::protocol(format!(
                "lengths violate the Kraft inequality (sum {k})"
            )));
        }
        Ok(LengthFunction(lengths))
    }

    /// Fixed-width encoding: `⌈log2 count⌉` bits for every message.
    pub fn uniform(count: usize) -> Self {
        LengthFunction(vec![ceil_log2(count as u64); count])
    }

    pub fn get(&self, m: usize) -> u32 {
        self.0[m]
    }

    pub fn lengths(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let w = ceil_log2(self.0.len() as u64);
        self.0.iter().all(|&l| l == w)
    }

    /// `Σ_m p(m) ℓ(m)`.
    pub fn expected(&self, probs: &[f64]) -> f64 {
        probs.iter().zip(&self.0).map(|(p, &l)| p * l as f64).sum()
    }
}

impl TryFrom<Vec<u32>> for LengthFunction {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        LengthFunction::new(v)
    }
}

impl From<LengthFunction> for Vec<u32> {
    fn from(l: LengthFunction) -> Self {
        l.0
    }
}

/// One party's half of a protocol: a deterministic message map over the
/// party's input, private randomness and randomness shared with the referee,
/// optionally rewritten by a chain of [`Stage`]s.
///
/// `map` is laid out as `[input][private][shared]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub private: Dist,
    pub shared: Dist,
    pub messages: Alphabet,
    pub lengths: LengthFunction,
    pub map: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<Stage>,
}

impl Side {
    /// A deterministic side: no randomness, `message(x)` per input.
    pub fn deterministic(inputs: usize, messages: Alphabet, message: impl Fn(usize) -> usize) -> Self {
        let lengths = LengthFunction::uniform(messages.len());
        Side {
            private: Dist::trivial(),
            shared: Dist::trivial(),
            messages,
            lengths,
            map: (0..inputs).map(|x| message(x) as u32).collect(),
            stages: Vec::new(),
        }
    }

    /// Builds the map from `message(x, r_private, r_shared)` with uniform lengths.
    pub fn from_fn(
        inputs: usize,
        private: Dist,
        shared: Dist,
        messages: Alphabet,
        message: impl Fn(usize, usize, usize) -> usize,
    ) -> Self {
        let mut map = Vec::with_capacity(inputs * private.len() * shared.len());
        for x in 0..inputs {
            for rp in 0..private.len() {
                for rs in 0..shared.len() {
                    map.push(message(x, rp, rs) as u32);
                }
            }
        }
        let lengths = LengthFunction::uniform(messages.len());
        Side {
            private,
            shared,
            messages,
            lengths,
            map,
            stages: Vec::new(),
        }
    }

    pub fn message_of(&self, x: usize, rp: usize, rs: usize) -> usize {
        self.map[(x * self.private.len() + rp) * self.shared.len() + rs] as usize
    }

    /// Size of the referee-facing register pair `(shared, message)` of the base table.
    pub fn base_views(&self) -> usize {
        self.shared.len() * self.messages.len()
    }

    pub fn base_view(&self, rs: usize, m: usize) -> u32 {
        (rs * self.messages.len() + m) as u32
    }
}

/// The referee's map over `[m_a][m_b][r_c][r_ac][r_bc]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Referee {
    pub randomness: Dist,
    pub map: Vec<u32>,
}

/// A rewrite applied on top of a side's base table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    /// Exact channel simulation by rejection sampling against a shared
    /// stream drawn from `reference`.
    Simulate(SimulateStage),
    /// Abort on messages longer than the per-input threshold.
    Truncate(TruncateStage),
    /// Replace the shared randomness by a privately chosen index into fixed seeds.
    Seed(SeedStage),
    /// Deterministic concatenation of sampled messages, one tuple per input.
    Tuple(TupleStage),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateStage {
    /// Output distribution the shared samples are drawn from.
    pub reference: Vec<f64>,
    /// Number of stream positions tried before the escape code is used.
    pub cap: u32,
    #[serde(skip)]
    pub(crate) cache: SimCache,
}

impl SimulateStage {
    pub fn new(reference: Vec<f64>, cap: u32) -> Self {
        SimulateStage {
            reference,
            cap,
            cache: SimCache::default(),
        }
    }

    pub fn symbols(&self) -> usize {
        self.reference.len()
    }

    /// Length of the escape code word followed by a fixed-width symbol.
    pub fn escape_len(&self) -> u32 {
        crate::coding::gamma_len(self.cap as u64 + 1) + ceil_log2(self.reference.len() as u64)
    }

    pub fn index_len(&self, i: u32) -> u32 {
        crate::coding::gamma_len(i as u64)
    }
}

impl PartialEq for SimulateStage {
    fn eq(&self, other: &Self) -> bool {
        self.reference == other.reference && self.cap == other.cap
    }
}

/// Per-input memo of the rejection-sampling tree.
#[derive(Default)]
pub(crate) struct SimCache(pub(crate) RwLock<BTreeMap<usize, Arc<SimInput>>>);

impl Clone for SimCache {
    fn clone(&self) -> Self {
        SimCache(RwLock::new(self.0.read().expect("cache lock").clone()))
    }
}

impl std::fmt::Debug for SimCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SimCache")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncateStage {
    /// Longest message kept, per input, in bits.
    pub thresholds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStage {
    pub seeds: Vec<SharedValue>,
}

/// A fixed value of a shared randomness register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SharedValue {
    Index(u32),
    /// Prefix of a sample stream; positions past the end are never reached
    /// without exceeding the truncation threshold.
    Stream(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleStage {
    /// `tuples[x]` holds the sampled messages sent on input `x`.
    pub tuples: Vec<Vec<TupleItem>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleItem {
    /// Base view of the sampled message; `None` for an abort flag.
    pub view: Option<u32>,
    pub message: u64,
}

/// A simultaneous-message-passing protocol `(Π_A, Π_B, Π_C)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmpProtocol {
    pub schema: u32,
    pub model: Model,
    pub x: Alphabet,
    pub y: Alphabet,
    pub z: Alphabet,
    pub alice: Side,
    pub bob: Side,
    pub referee: Referee,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
}

impl SmpProtocol {
    pub fn new(
        model: Model,
        x: Alphabet,
        y: Alphabet,
        z: Alphabet,
        alice: Side,
        bob: Side,
        referee: Referee,
    ) -> Result<Self> {
        let p = SmpProtocol {
            schema: SCHEMA_VERSION,
            model,
            x,
            y,
            z,
            alice,
            bob,
            referee,
            notes: BTreeMap::new(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Referee table from `output(m_a, m_b, r_c, r_ac, r_bc)`.
    pub fn referee_from_fn(
        alice: &Side,
        bob: &Side,
        randomness: Dist,
        output: impl Fn(usize, usize, usize, usize, usize) -> usize,
    ) -> Referee {
        let mut map = Vec::new();
        for ma in 0..alice.messages.len() {
            for mb in 0..bob.messages.len() {
                for rc in 0..randomness.len() {
                    for rac in 0..alice.shared.len() {
                        for rbc in 0..bob.shared.len() {
                            map.push(output(ma, mb, rc, rac, rbc) as u32);
                        }
                    }
                }
            }
        }
        Referee { randomness, map }
    }

    pub fn referee_index(&self, ma: usize, mb: usize, rc: usize, rac: usize, rbc: usize) -> usize {
        let nb = self.bob.messages.len();
        let nc = self.referee.randomness.len();
        let nac = self.alice.shared.len();
        let nbc = self.bob.shared.len();
        (((ma * nb + mb) * nc + rc) * nac + rac) * nbc + rbc
    }

    pub fn referee_output(&self, ma: usize, mb: usize, rc: usize, rac: usize, rbc: usize) -> usize {
        self.referee.map[self.referee_index(ma, mb, rc, rac, rbc)] as usize
    }

    pub fn has_stages(&self) -> bool {
        !self.alice.stages.is_empty() || !self.bob.stages.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::protocol(format!("unsupported schema version {}", self.schema)));
        }
        validate_table("alice", &self.alice, self.x.len())?;
        validate_table("bob", &self.bob, self.y.len())?;
        let expect = self.alice.messages.len()
            * self.bob.messages.len()
            * self.referee.randomness.len()
            * self.alice.shared.len()
            * self.bob.shared.len();
        if self.referee.map.len() != expect {
            return Err(Error::protocol(format!(
                "referee map has {} entries, expected {expect}",
                self.referee.map.len()
            )));
        }
        if let Some(z) = self.referee.map.iter().find(|&&z| z as usize >= self.z.len()) {
            return Err(Error::protocol(format!("referee output {z} outside Z")));
        }
        for (name, side, inputs) in [("alice", &self.alice, self.x.len()), ("bob", &self.bob, self.y.len())] {
            let models = side.level_models(self.model)?;
            let base = models[0];
            if base != Model::Average && !side.lengths.is_uniform() {
                return Err(Error::protocol(format!(
                    "{name}: {base} model requires uniform lengths of ⌈log2 |M|⌉ bits"
                )));
            }
            if base == Model::Private && !side.shared.is_trivial() {
                return Err(Error::protocol(format!(
                    "{name}: private model requires a trivial shared register"
                )));
            }
            validate_stages(name, side, inputs)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("protocol serializes");
        s.push('\n');
        s
    }

    /// Parses and validates a protocol document, reporting the failing field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: SmpProtocol = super::parse_json(text)?;
        p.validate()?;
        Ok(p)
    }
}

fn validate_table(name: &str, side: &Side, inputs: usize) -> Result<()> {
    let expect = inputs * side.private.len() * side.shared.len();
    if side.map.len() != expect {
        return Err(Error::protocol(format!(
            "{name}: map has {} entries, expected {expect}",
            side.map.len()
        )));
    }
    if let Some(m) = side.map.iter().find(|&&m| m as usize >= side.messages.len()) {
        return Err(Error::protocol(format!("{name}: message {m} outside the alphabet")));
    }
    if side.lengths.len() != side.messages.len() {
        return Err(Error::protocol(format!(
            "{name}: {} lengths for {} messages",
            side.lengths.len(),
            side.messages.len()
        )));
    }
    Ok(())
}

fn validate_stages(name: &str, side: &Side, inputs: usize) -> Result<()> {
    use super::law::SharedKind;
    let views = side.base_views();
    for (i, stage) in side.stages.iter().enumerate() {
        let level = i + 1;
        match stage {
            Stage::Simulate(s) => {
                if s.reference.len() != views {
                    return Err(Error::protocol(format!(
                        "{name}: simulation reference has {} entries for {views} views",
                        s.reference.len()
                    )));
                }
                check_probs(&s.reference, views)
                    .map_err(|e| Error::protocol(format!("{name}: simulation reference: {e}")))?;
                if s.cap == 0 {
                    return Err(Error::protocol(format!("{name}: simulation cap must be positive")));
                }
                if !matches!(side.stages.get(i.wrapping_sub(1)), None | Some(Stage::Seed(_))) && i > 0 {
                    return Err(Error::protocol(format!(
                        "{name}: simulation must act on a table or seeded side"
                    )));
                }
            }
            Stage::Truncate(t) => {
                if t.thresholds.len() != inputs || t.thresholds.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::protocol(format!(
                        "{name}: truncation needs one threshold per input"
                    )));
                }
            }
            Stage::Seed(s) => {
                if s.seeds.is_empty() {
                    return Err(Error::protocol(format!("{name}: seed stage needs at least one seed")));
                }
                let kind = side.shared_kind(level - 1);
                for seed in &s.seeds {
                    let ok = match (&kind, seed) {
                        (SharedKind::None, SharedValue::Index(0)) => true,
                        (SharedKind::Finite(d), SharedValue::Index(r)) => (*r as usize) < d.len(),
                        (SharedKind::Stream { reference, .. }, SharedValue::Stream(v)) => {
                            v.iter().all(|&m| (m as usize) < reference.len())
                        }
                        _ => false,
                    };
                    if !ok {
                        return Err(Error::protocol(format!(
                            "{name}: seed incompatible with shared register"
                        )));
                    }
                }
            }
            Stage::Tuple(t) => {
                if t.tuples.len() != inputs {
                    return Err(Error::protocol(format!(
                        "{name}: tuple stage needs one tuple per input"
                    )));
                }
                let width = t.tuples.first().map(Vec::len).unwrap_or(0);
                if width == 0 || t.tuples.iter().any(|row| row.len() != width) {
                    return Err(Error::protocol(format!("{name}: tuples must share a positive width")));
                }
                if t.tuples
                    .iter()
                    .flatten()
                    .any(|it| it.view.is_some_and(|v| v as usize >= views))
                {
                    return Err(Error::protocol(format!("{name}: tuple view outside base views")));
                }
            }
        }
    }
    Ok(())
}
