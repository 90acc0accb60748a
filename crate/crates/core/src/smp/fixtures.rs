//! Small protocols used by tests, benches and the CLI.

use rand::Rng;

use super::protocol::{LengthFunction, Model, Referee, Side, SmpProtocol};
use super::{cell_dist, realize_rows, FunctionTable};
use crate::coding::ceil_log2;
use crate::infotheory::{Alphabet, Channel, Dist};
use crate::Result;

fn input_alphabet(n: usize) -> Alphabet {
    if n.is_power_of_two() && n > 1 {
        Alphabet::binary(n.trailing_zeros())
    } else {
        Alphabet::indexed(n)
    }
}

fn output_alphabet(n: usize) -> Alphabet {
    Alphabet::indexed(n)
}

/// Both parties send their inputs; the referee evaluates `f`.
pub fn verbatim(f: &FunctionTable) -> SmpProtocol {
    let x = input_alphabet(f.x_size);
    let y = input_alphabet(f.y_size);
    let alice = Side::deterministic(f.x_size, x.clone(), |x| x);
    let bob = Side::deterministic(f.y_size, y.clone(), |y| y);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |a, b, _, _, _| f.value(a, b));
    SmpProtocol::new(Model::Private, x, y, output_alphabet(f.z_size), alice, bob, referee)
        .expect("verbatim protocol is valid")
}

/// Empty messages; the referee outputs a fresh uniform symbol of Z.
pub fn constant_messages(f: &FunctionTable) -> SmpProtocol {
    let alice = Side::deterministic(f.x_size, Alphabet::singleton(), |_| 0);
    let bob = Side::deterministic(f.y_size, Alphabet::singleton(), |_| 0);
    let coin = Dist::uniform(Alphabet::indexed(f.z_size));
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, coin, |_, _, rc, _, _| rc);
    SmpProtocol::new(
        Model::Private,
        input_alphabet(f.x_size),
        input_alphabet(f.y_size),
        output_alphabet(f.z_size),
        alice,
        bob,
        referee,
    )
    .expect("constant protocol is valid")
}

fn parity(v: usize) -> usize {
    (v.count_ones() & 1) as usize
}

/// `k×n` matrix over GF(2) packed row-wise in `r`; returns `A·v`.
fn hash(r: usize, v: usize, n: u32, k: u32) -> usize {
    let mask = (1usize << n) - 1;
    (0..k).fold(0, |acc, j| {
        let row = (r >> (j * n)) & mask;
        acc | (parity(row & v) << j)
    })
}

fn matrices(n: u32, k: u32) -> Dist {
    Dist::uniform(Alphabet::indexed(1usize << (n * k)))
}

/// Equality on `n`-bit inputs: Alice sends `k` random parities `A·x` with `A`
/// shared with the referee, Bob sends `y`, the referee accepts iff `A·y = A·x`.
/// Errs only on `x ≠ y`, with probability `2^-k`.
pub fn shared_hash_equality(n: u32, k: u32) -> SmpProtocol {
    assert!(n >= 1 && k >= 1 && n * k <= 20, "hash fixture too large");
    let size = 1usize << n;
    let alice = Side::from_fn(size, Dist::trivial(), matrices(n, k), Alphabet::binary(k), |x, _, r| {
        hash(r, x, n, k)
    });
    let bob = Side::deterministic(size, Alphabet::binary(n), |y| y);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |ma, mb, _, rac, _| {
        (hash(rac, mb, n, k) == ma) as usize
    });
    SmpProtocol::new(
        Model::Shared,
        Alphabet::binary(n),
        Alphabet::binary(n),
        Alphabet::indexed(2),
        alice,
        bob,
        referee,
    )
    .expect("hash protocol is valid")
}

/// As [`shared_hash_equality`] with the matrix drawn privately by Alice and
/// sent alongside the hash.
pub fn private_hash_equality(n: u32, k: u32) -> SmpProtocol {
    assert!(n >= 1 && k >= 1 && n * k <= 12, "hash fixture too large");
    let size = 1usize << n;
    let hashes = 1usize << k;
    let mats = 1usize << (n * k);
    let alice = Side::from_fn(
        size,
        matrices(n, k),
        Dist::trivial(),
        Alphabet::indexed(mats * hashes),
        |x, r, _| r * hashes + hash(r, x, n, k),
    );
    let bob = Side::deterministic(size, Alphabet::binary(n), |y| y);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |ma, mb, _, _, _| {
        let (r, h) = (ma / hashes, ma % hashes);
        (hash(r, mb, n, k) == h) as usize
    });
    SmpProtocol::new(
        Model::Private,
        Alphabet::binary(n),
        Alphabet::binary(n),
        Alphabet::indexed(2),
        alice,
        bob,
        referee,
    )
    .expect("hash protocol is valid")
}

/// Alice sends a uniform private bit regardless of `x ∈ {0,1}`, Bob sends
/// `y`, and the referee accepts iff the two bits agree.
pub fn uniform_bit_alice() -> SmpProtocol {
    let bit = Alphabet::binary(1);
    let alice = Side::from_fn(
        2,
        Dist::uniform(Alphabet::indexed(2)),
        Dist::trivial(),
        bit.clone(),
        |_, r, _| r,
    );
    let bob = Side::deterministic(2, bit.clone(), |y| y);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |a, b, _, _, _| (a == b) as usize);
    SmpProtocol::new(
        Model::Private,
        bit.clone(),
        bit,
        Alphabet::indexed(2),
        alice,
        bob,
        referee,
    )
    .expect("uniform bit protocol is valid")
}

/// Average-model equality on 2-bit inputs with a two-valued length function.
///
/// Alice sends `x` with a 3-bit code word, except with probability `p_long`
/// when she uses a `long_len`-bit one. Bob sends `y` but flips its low bit
/// with probability `flip`, so the protocol errs with probability `flip` on
/// every input.
pub fn two_length_equality(p_long: f64, long_len: u32, flip: f64) -> Result<SmpProtocol> {
    let x = Alphabet::binary(2);
    let coins = Dist::new(Alphabet::new(["short", "long"])?, vec![1.0 - p_long, p_long])?;
    let labels: Vec<String> = (0..4)
        .map(|v| format!("s{v:02b}"))
        .chain((0..4).map(|v| format!("l{v:02b}")))
        .collect();
    let mut alice = Side::from_fn(4, coins, Dist::trivial(), Alphabet::new(labels)?, |x, r, _| r * 4 + x);
    alice.lengths = LengthFunction::new([vec![3; 4], vec![long_len; 4]].concat())?;
    let flips = Dist::new(Alphabet::new(["keep", "flip"])?, vec![1.0 - flip, flip])?;
    let bob = Side::from_fn(4, flips, Dist::trivial(), x.clone(), |y, r, _| y ^ r);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |a, b, _, _, _| ((a % 4) == b) as usize);
    SmpProtocol::new(Model::Average, x.clone(), x, Alphabet::indexed(2), alice, bob, referee)
}

/// A channel as a one-party protocol: Alice's message is the channel output,
/// realized over her private randomness, and the referee outputs it.
pub fn channel_protocol(ch: &Channel) -> Result<SmpProtocol> {
    let (weights, map) = realize_rows(ch.rows());
    let coins = cell_dist(&weights)?;
    let inputs = ch.input().len();
    let alice = Side::from_fn(inputs, coins, Dist::trivial(), ch.output().clone(), |x, r, _| {
        map[x][r] as usize
    });
    let bob = Side::deterministic(1, Alphabet::singleton(), |_| 0);
    let referee = SmpProtocol::referee_from_fn(&alice, &bob, Dist::trivial(), |ma, _, _, _, _| ma);
    SmpProtocol::new(
        Model::Private,
        ch.input().clone(),
        Alphabet::singleton(),
        ch.output().clone(),
        alice,
        bob,
        referee,
    )
}

/// Shape of [`random_protocol`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomShape {
    pub model: Model,
    pub max_inputs: usize,
    pub max_register: usize,
    pub max_messages: usize,
    /// Extra bits drawn on top of `⌈log2 |M|⌉` in the average model.
    pub max_extra_len: u32,
    /// Probability that a drawn register weight is exactly zero.
    pub zero_weight: f64,
}

impl Default for RandomShape {
    fn default() -> Self {
        RandomShape {
            model: Model::Shared,
            max_inputs: 3,
            max_register: 3,
            max_messages: 3,
            max_extra_len: 3,
            zero_weight: 0.1,
        }
    }
}

fn random_dist<R: Rng>(rng: &mut R, n: usize, zero: f64) -> Dist {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(zero) {
                0.0
            } else {
                -rng.gen::<f64>().max(1e-12).ln()
            }
        })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    Dist::from_weights(Alphabet::indexed(n), &w).expect("positive weights")
}

fn random_register<R: Rng>(rng: &mut R, shape: &RandomShape) -> Dist {
    let n = rng.gen_range(1..=shape.max_register);
    random_dist(rng, n, shape.zero_weight)
}

fn random_side<R: Rng>(rng: &mut R, inputs: usize, shape: &RandomShape, shared_ok: bool) -> Side {
    let private = random_register(rng, shape);
    let shared = if shared_ok {
        random_register(rng, shape)
    } else {
        Dist::trivial()
    };
    let nm = rng.gen_range(1..=shape.max_messages);
    let mut side = Side::from_fn(inputs, private, shared, Alphabet::indexed(nm), |_, _, _| 0);
    for m in side.map.iter_mut() {
        *m = rng.gen_range(0..nm as u32);
    }
    if shape.model == Model::Average {
        let base = ceil_log2(nm as u64);
        let lengths = (0..nm).map(|_| base + rng.gen_range(0..=shape.max_extra_len)).collect();
        side.lengths = LengthFunction::new(lengths).expect("lengths above ⌈log2 |M|⌉ satisfy Kraft");
    }
    side
}

/// A random small protocol with Boolean output.
pub fn random_protocol<R: Rng>(rng: &mut R, shape: &RandomShape) -> SmpProtocol {
    let nx = rng.gen_range(2..=shape.max_inputs.max(2));
    let ny = rng.gen_range(2..=shape.max_inputs.max(2));
    let shared_ok = shape.model != Model::Private;
    let alice = random_side(rng, nx, shape, shared_ok);
    let bob = random_side(rng, ny, shape, shared_ok);
    let coin = random_register(rng, shape);
    let mut referee = SmpProtocol::referee_from_fn(&alice, &bob, coin, |_, _, _, _, _| 0);
    for z in referee.map.iter_mut() {
        *z = rng.gen_range(0..2);
    }
    SmpProtocol::new(
        shape.model,
        Alphabet::indexed(nx),
        Alphabet::indexed(ny),
        Alphabet::indexed(2),
        alice,
        bob,
        referee,
    )
    .expect("random protocol is valid")
}

/// A random Boolean function on the protocol's input sets.
pub fn random_function<R: Rng>(rng: &mut R, p: &SmpProtocol) -> FunctionTable {
    FunctionTable::from_fn(p.x.len(), p.y.len(), 2, |_, _| rng.gen_range(0..2)).expect("valid table")
}

/// A random channel with strictly positive or sparse rows.
pub fn random_channel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Channel {
    let rows = (0..inputs)
        .map(|_| random_dist(rng, outputs, 0.2).probs().to_vec())
        .collect();
    Channel::new(Alphabet::indexed(inputs), Alphabet::indexed(outputs), rows).expect("valid channel")
}

/// Referee that outputs `referee(ma, mb)` without randomness.
pub fn plain_referee(alice: &Side, bob: &Side, f: impl Fn(usize, usize) -> usize) -> Referee {
    SmpProtocol::referee_from_fn(alice, bob, Dist::trivial(), |a, b, _, _, _| f(a, b))
}
