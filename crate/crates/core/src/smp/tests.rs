use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixtures::*;
use super::*;
use crate::infotheory::{entropy_of, Alphabet};

fn eq(n: u32) -> FunctionTable {
    make_equality(n).unwrap()
}

#[test]
fn equality_tables() {
    let t = eq(1);
    assert_eq!(t.values(), &[1, 0, 0, 1]);
    let t = eq(2);
    assert_eq!(t.value(0b01, 0b01), 1);
    assert_eq!(t.value(0b01, 0b10), 0);
    assert!(make_equality(13).is_err());
}

#[test]
fn deterministic_protocol_is_a_point_mass() {
    let f = eq(2);
    let p = verbatim(&f);
    for x in 0..4 {
        for y in 0..4 {
            let d = output_dist(&p, x, y).unwrap();
            assert_eq!(d.probs()[f.value(x, y)], 1.0);
        }
    }
    assert_eq!(worst_error(&p, &f).unwrap(), 0.0);
}

#[test]
fn referee_coin_is_input_independent() {
    let f = eq(1);
    let p = constant_messages(&f);
    for x in 0..2 {
        for y in 0..2 {
            assert_eq!(output_dist(&p, x, y).unwrap().probs(), &[0.5, 0.5]);
        }
    }
    assert_eq!(worst_error(&p, &f).unwrap(), 0.5);
}

#[test]
fn shared_hash_error_is_two_to_minus_k() {
    for (n, k) in [(2, 1), (2, 2), (3, 2), (2, 3)] {
        let p = shared_hash_equality(n, k);
        let e = Evaluator::new(&p).unwrap();
        let f = eq(n);
        let size = 1usize << n;
        for x in 0..size {
            for y in 0..size {
                let err = e.error(&f, x, y);
                let want = if x == y { 0.0 } else { (-(k as f64)).exp2() };
                assert!((err - want).abs() < 1e-12, "n={n} k={k} x={x} y={y}: {err}");
            }
        }
    }
}

#[test]
fn private_hash_matches_shared_hash() {
    let a = Evaluator::new(&shared_hash_equality(2, 2))
        .unwrap()
        .worst_error(&eq(2))
        .unwrap();
    let b = Evaluator::new(&private_hash_equality(2, 2))
        .unwrap()
        .worst_error(&eq(2))
        .unwrap();
    assert!((a - 0.25).abs() < 1e-12 && (b - 0.25).abs() < 1e-12);
}

#[test]
fn hash_output_matches_sampling() {
    let p = shared_hash_equality(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 1_000_000;
    let (x, y) = (0b01, 0b11);
    let mut ones = 0u64;
    for _ in 0..samples {
        let rac = rng.gen_range(0..p.alice.shared.len());
        let ma = p.alice.message_of(x, 0, rac);
        let mb = p.bob.message_of(y, 0, 0);
        ones += p.referee_output(ma, mb, 0, rac, 0) as u64;
    }
    let exact = output_dist(&p, x, y).unwrap().probs()[1];
    let sigma = (exact * (1.0 - exact) / samples as f64).sqrt();
    let freq = ones as f64 / samples as f64;
    assert!((freq - exact).abs() <= 3.0 * sigma, "{freq} vs {exact}");
}

#[test]
fn costs_of_one_bit_messages() {
    let p = uniform_bit_alice();
    let c = costs(&p).unwrap();
    assert_eq!(c.cc_priv, Some(2));
    assert_eq!(c.cc_sh, 2);
    assert!((c.cc_av - 2.0).abs() < 1e-12);
}

#[test]
fn expected_length_matches_hand_sum() {
    // ℓ_A ∈ {1, 3}: message 0 has one bit, messages 1 and 2 three bits, so
    // E[ℓ] is summed directly from the message marginal.
    let coins = Dist::new(Alphabet::indexed(3), vec![0.5, 0.3, 0.2]).unwrap();
    let mut alice = Side::from_fn(2, coins, Dist::trivial(), Alphabet::indexed(3), |x, r, _| (x + r) % 3);
    alice.lengths = LengthFunction::new(vec![1, 3, 3]).unwrap();
    let bob = Side::deterministic(2, Alphabet::singleton(), |_| 0);
    let referee = plain_referee(&alice, &bob, |_, _| 0);
    let p = SmpProtocol::new(
        Model::Average,
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        Alphabet::indexed(2),
        alice,
        bob,
        referee,
    )
    .unwrap();
    let c = costs(&p).unwrap();
    // x = 0: messages 0,1,2 w.p. .5,.3,.2 -> .5 + .9 + .6 = 2.0
    // x = 1: messages 1,2,0 w.p. .5,.3,.2 -> 1.5 + .9 + .2 = 2.6
    assert!((c.alice_expected[0] - 2.0).abs() < 1e-12);
    assert!((c.alice_expected[1] - 2.6).abs() < 1e-12);
    assert!((c.cc_av - 2.6).abs() < 1e-12);
    assert_eq!(c.cc_sh, 3);
}

#[test]
fn length_at_least_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shape = RandomShape {
        model: Model::Average,
        ..RandomShape::default()
    };
    for _ in 0..50 {
        let p = random_protocol(&mut rng, &shape);
        let e = Evaluator::new(&p).unwrap();
        for x in 0..p.x.len() {
            let mut marg = vec![0.0; p.alice.messages.len()];
            for rp in 0..p.alice.private.len() {
                for rs in 0..p.alice.shared.len() {
                    marg[p.alice.message_of(x, rp, rs)] += p.alice.private.probs()[rp] * p.alice.shared.probs()[rs];
                }
            }
            let el = e.costs().alice_expected[x];
            assert!(el + 1e-9 >= entropy_of(&marg));
            assert!((el - p.alice.lengths.expected(&marg)).abs() < 1e-12);
        }
    }
}

#[test]
fn chain_on_uniform_lengths() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for model in [Model::Private, Model::Shared] {
        let shape = RandomShape {
            model,
            ..RandomShape::default()
        };
        for _ in 0..30 {
            let c = costs(&random_protocol(&mut rng, &shape)).unwrap();
            let priv_ = c.cc_priv.unwrap();
            assert!(c.cc_av <= c.cc_sh as f64 && c.cc_sh <= priv_);
        }
    }
}

#[test]
fn message_marginals_ignore_the_other_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = random_protocol(&mut rng, &RandomShape::default());
        for x in 0..p.x.len() {
            let base = output_joint(&p, x, 0).unwrap().marginal(&["M_A"]).unwrap();
            for y in 1..p.y.len() {
                let other = output_joint(&p, x, y).unwrap().marginal(&["M_A"]).unwrap();
                assert_eq!(base.probs(), other.probs());
            }
        }
    }
}

#[test]
fn joint_law_agrees_with_output_dist() {
    let p = shared_hash_equality(2, 1);
    let j = output_joint(&p, 1, 2).unwrap();
    let z = j.marginal(&["Z"]).unwrap();
    let d = output_dist(&p, 1, 2).unwrap();
    for (a, b) in z.probs().iter().zip(d.probs()) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn json_round_trip_is_lossless() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut ps = vec![
        shared_hash_equality(2, 2),
        two_length_equality(0.05, 12, 0.05).unwrap(),
        uniform_bit_alice(),
    ];
    ps.push(random_protocol(&mut rng, &RandomShape::default()));
    for p in ps {
        let text = p.to_json();
        let back = SmpProtocol::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn json_errors_name_the_field() {
    let p = uniform_bit_alice();
    let mut v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
    v["alice"]["private"]["probs"] = serde_json::json!([0.5, 0.7]);
    match SmpProtocol::from_json(&v.to_string()) {
        Err(Error::Parse { path, .. }) => assert!(path.starts_with("alice.private"), "{path}"),
        other => panic!("expected a parse error, got {other:?}"),
    }
    v["alice"]["private"]["probs"] = serde_json::json!([0.5, 0.5]);
    v["referee"]["map"] = serde_json::json!([0, 1]);
    assert!(matches!(
        SmpProtocol::from_json(&v.to_string()),
        Err(Error::InvalidProtocol(_))
    ));
}

#[test]
fn kraft_violations_are_rejected() {
    assert!(LengthFunction::new(vec![1, 1, 1]).is_err());
    assert!(LengthFunction::new(vec![1, 2, 2]).is_ok());
    let mut p = uniform_bit_alice();
    p.alice.lengths = LengthFunction::new(vec![1, 2]).unwrap();
    // non-uniform lengths outside the average model
    assert!(p.validate().is_err());
}

#[test]
fn cell_cap_guards_enumeration() {
    let p = private_hash_equality(2, 2);
    let old = cell_cap();
    set_cell_cap(10);
    let r = Evaluator::new(&p);
    set_cell_cap(old);
    assert!(matches!(r, Err(Error::CellCap { .. })));
}

#[test]
fn refinement_realizes_rows() {
    let rows = vec![vec![0.2, 0.5, 0.3], vec![0.0, 0.1, 0.9], vec![1.0 / 3.0; 3]];
    let (w, map) = realize_rows(&rows);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    for (row, m) in rows.iter().zip(&map) {
        let mut got = [0.0; 3];
        for (c, &wi) in w.iter().enumerate() {
            got[m[c] as usize] += wi;
        }
        for (a, b) in got.iter().zip(row) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}

#[test]
fn two_length_fixture_errs_at_flip_rate() {
    let p = two_length_equality(0.05, 12, 0.05).unwrap();
    let f = eq(2);
    let c = costs_with_error(&p, &f).unwrap();
    assert!((c.worst_error.unwrap() - 0.05).abs() < 1e-12);
    assert!((c.alice_expected[0] - (0.95 * 3.0 + 0.05 * 12.0)).abs() < 1e-12);
}
