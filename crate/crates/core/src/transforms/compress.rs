use serde::{Deserialize, Serialize};

use super::{max_tv, EXACT_TV};
use crate::bounds::g1;
use crate::infotheory::{capacity, total_variation, Alphabet, Channel};
use crate::leakage::{CAPACITY_MAX_ITER, CAPACITY_TOL};
use crate::smp::fixtures::channel_protocol;
use crate::smp::{Evaluator, Model, Side, SimulateStage, SmpProtocol, Stage};
use crate::{Error, Result};

/// Stream positions tried before the escape code.
pub const DEFAULT_CAP: u32 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatorReport {
    pub capacity: f64,
    pub expected_length_per_input: Vec<f64>,
    pub tv_distance_per_input: Vec<f64>,
    /// `C + g1(C)`.
    pub bound: f64,
    pub max_expected_length: f64,
    pub exact: bool,
    pub within_bound: bool,
}

/// Channel `x ↦ (R_s, M)` seen by the referee from one table side.
pub(crate) fn view_channel(side: &Side, inputs: usize) -> Result<Channel> {
    if !side.stages.is_empty() {
        return Err(Error::Unsupported(
            "compressing a side that already carries stages".into(),
        ));
    }
    let views = side.base_views();
    let rows = (0..inputs)
        .map(|x| side.sim_target(1, views, x))
        .collect::<Result<Vec<_>>>()?;
    Channel::new(Alphabet::indexed(inputs), Alphabet::indexed(views), rows)
}

/// Adds an exact simulation stage aligned to the capacity-achieving output
/// distribution of the side's channel; returns the capacity.
fn compress_side(side: &mut Side, inputs: usize, cap: u32) -> Result<f64> {
    let ch = view_channel(side, inputs)?;
    let c = capacity(&ch, CAPACITY_TOL, CAPACITY_MAX_ITER)?;
    // renormalize away the round-off of the final iteration
    let mut q = c.output.clone();
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    side.stages.push(Stage::Simulate(SimulateStage::new(q, cap)));
    Ok(c.capacity)
}

/// One-message exact simulator of a channel with shared sample streams.
pub fn hjmr_compress(ch: &Channel) -> Result<(SmpProtocol, SimulatorReport)> {
    hjmr_compress_with(ch, DEFAULT_CAP)
}

pub fn hjmr_compress_with(ch: &Channel, cap: u32) -> Result<(SmpProtocol, SimulatorReport)> {
    let mut p = channel_protocol(ch)?;
    let inputs = ch.input().len();
    let c = compress_side(&mut p.alice, inputs, cap)?;
    p.model = Model::Average;
    p.notes.insert("stream_cap".into(), cap.to_string());
    p.validate()?;
    let e = Evaluator::new(&p)?;
    let costs = e.costs();
    let tv: Vec<f64> = (0..inputs)
        .map(|x| total_variation(&e.output_probs(x, 0), ch.row(x)))
        .collect();
    let bound = c + g1(c)?;
    let max_len = costs.alice_expected.iter().copied().fold(0.0, f64::max);
    let report = SimulatorReport {
        capacity: c,
        tv_distance_per_input: tv.clone(),
        expected_length_per_input: costs.alice_expected,
        bound,
        max_expected_length: max_len,
        exact: tv.iter().all(|&d| d <= EXACT_TV),
        within_bound: max_len <= bound,
    };
    Ok((p, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressReport {
    pub alice_capacity: f64,
    pub bob_capacity: f64,
    pub ic: f64,
    /// `IC + 2 g1(IC)`.
    pub bound: f64,
    pub cc_av: f64,
    pub max_tv: f64,
    pub exact: bool,
    pub within_bound: bool,
}

/// Replaces each side of a shared-model protocol by an exact simulation of
/// its channel `x ↦ (R_AC, M_A)`, giving an average-model protocol.
pub fn ic_to_ccav(p: &SmpProtocol) -> Result<(SmpProtocol, CompressReport)> {
    ic_to_ccav_with(p, DEFAULT_CAP)
}

pub fn ic_to_ccav_with(p: &SmpProtocol, cap: u32) -> Result<(SmpProtocol, CompressReport)> {
    p.validate()?;
    if p.model == Model::Average {
        return Err(Error::protocol(
            "compression expects a private or shared model protocol",
        ));
    }
    let mut q = p.clone();
    let ca = compress_side(&mut q.alice, p.x.len(), cap)?;
    let cb = compress_side(&mut q.bob, p.y.len(), cap)?;
    q.model = Model::Average;
    q.notes.insert("stream_cap".into(), cap.to_string());
    q.validate()?;
    let before = Evaluator::new(p)?;
    let after = Evaluator::new(&q)?;
    let tv = max_tv(&before, &after);
    let costs = after.costs();
    let ic = ca + cb;
    let bound = ic + 2.0 * g1(ic)?;
    Ok((
        q,
        CompressReport {
            alice_capacity: ca,
            bob_capacity: cb,
            ic,
            bound,
            cc_av: costs.cc_av,
            max_tv: tv,
            exact: tv <= EXACT_TV,
            within_bound: costs.cc_av <= bound,
        },
    ))
}
