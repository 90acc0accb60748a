//! Randomized identity checks over generated protocols.
//!
//! Fixture `i` is drawn from its own ChaCha stream of `seed`, so results do
//! not depend on the execution order and `count` only appends fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::leakage::grid::il_joint_search;
use crate::leakage::{il_worst, Registers};
use crate::smp::fixtures::{random_protocol, RandomShape};
use crate::smp::{output_joint, Evaluator, Model};
use crate::transforms::ic_to_ccav;
use crate::{Exec, Result};

/// Tolerance of the exact identities.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Allowance of the grid search over joint priors.
pub const GRID_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    pub shape: RandomShape,
    /// Simplex step of the joint-prior grid search.
    pub grid_step: f64,
    /// Random grid points tried when the joint simplex is too large to cover.
    pub grid_samples: usize,
    /// Also run the compression exactness check.
    pub compress: bool,
}

impl SuiteConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        SuiteConfig {
            seed,
            count,
            shape: RandomShape {
                max_inputs: 4,
                max_register: 4,
                ..RandomShape::default()
            },
            grid_step: 0.02,
            grid_samples: 300,
            compress: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub count: usize,
    pub identities: Vec<IdentityResult>,
    pub pass: bool,
}

const NAMES: [(&str, f64); 10] = [
    ("three_forms", IDENTITY_TOL),
    ("ic_eq_il_plus_cross", IDENTITY_TOL),
    ("il_le_ic", IDENTITY_TOL),
    ("ic_le_2il", IDENTITY_TOL),
    ("ic_le_expected_cc_av", IDENTITY_TOL),
    ("chain_av_sh_priv", 0.0),
    ("output_normalization", IDENTITY_TOL),
    ("joint_vs_output", IDENTITY_TOL),
    ("grid_il_le_il_worst", GRID_TOL),
    ("compression_tv", crate::transforms::EXACT_TV),
];

fn random_prior<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

fn fixture_residuals(cfg: &SuiteConfig, i: usize) -> Result<[f64; 10]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(i as u64);
    let mut shape = cfg.shape;
    shape.model = if i.is_multiple_of(2) {
        Model::Shared
    } else {
        Model::Private
    };
    let p = random_protocol(&mut rng, &shape);
    let regs = Registers::new(&p)?;
    let e = Evaluator::with_exec(&p, Exec::Sequential)?;
    let costs = e.costs();
    let (nx, ny) = (p.x.len(), p.y.len());
    let mut r = [0.0f64; 10];

    let uniform = vec![1.0 / (nx * ny) as f64; nx * ny];
    for mu in [uniform, random_prior(&mut rng, nx * ny)] {
        let f = regs.forms(&mu)?;
        r[0] = r[0].max((f.full - f.il).abs()).max((f.with_coin - f.il).abs());
        r[1] = r[1].max((f.ic - f.il - f.cross).abs());
        r[2] = r[2].max(f.il - f.ic);
        r[3] = r[3].max(f.ic - 2.0 * f.il);
        let expected: f64 = (0..nx * ny)
            .map(|k| mu[k] * costs.cc_av_per_input[k / ny][k % ny])
            .sum();
        r[4] = r[4].max(f.ic - expected);
    }

    let cc_priv = costs.cc_priv.expect("table protocols have a private cost") as f64;
    r[5] = r[5]
        .max(costs.cc_av - costs.cc_sh as f64)
        .max(costs.cc_sh as f64 - cc_priv);

    for x in 0..nx {
        for y in 0..ny {
            let out = e.output_probs(x, y);
            r[6] = r[6].max((out.iter().sum::<f64>() - 1.0).abs());
            let z = output_joint(&p, x, y)?.marginal(&["Z"])?;
            for (a, b) in z.probs().iter().zip(&out) {
                r[7] = r[7].max((a - b).abs());
            }
        }
    }

    let worst = il_worst(&p)?;
    let grid = il_joint_search(&regs, cfg.grid_step, cfg.grid_samples, &mut rng);
    r[8] = r[8].max(grid - worst.il);

    if cfg.compress {
        let (q, _) = ic_to_ccav(&p)?;
        let after = Evaluator::with_exec(&q, Exec::Sequential)?;
        r[9] = crate::transforms::max_tv(&e, &after);
    }
    Ok(r.map(|v| v.max(0.0)))
}

/// Runs every identity on `cfg.count` fixtures and keeps the largest residual.
pub fn run_suite(cfg: &SuiteConfig, exec: Exec) -> Result<SuiteReport> {
    let rows = exec.try_map_range(cfg.count, |i| fixture_residuals(cfg, i))?;
    let identities: Vec<IdentityResult> = NAMES
        .iter()
        .enumerate()
        .filter(|&(k, _)| cfg.compress || k != 9)
        .map(|(k, &(name, tol))| {
            let max = rows.iter().map(|r| r[k]).fold(0.0, f64::max);
            IdentityResult {
                name: name.into(),
                max_residual: max,
                tolerance: tol,
                pass: max <= tol,
            }
        })
        .collect();
    let pass = identities.iter().all(|r| r.pass);
    Ok(SuiteReport {
        seed: cfg.seed,
        count: cfg.count,
        identities,
        pass,
    })
}
