use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::bounds::g1;
use crate::infotheory::{Alphabet, Channel};
use crate::leakage::ic_worst;
use crate::smp::fixtures::{
    constant_messages, private_hash_equality, random_channel, shared_hash_equality, two_length_equality,
    uniform_bit_alice, verbatim,
};
use crate::smp::{make_equality, Evaluator, FunctionTable, Model, Stage, View};

fn eq2() -> FunctionTable {
    make_equality(2).unwrap()
}

#[test]
fn constant_channel_costs_at_most_g1_zero() {
    let row = vec![0.5, 0.25, 0.25];
    let ch = Channel::new(
        Alphabet::indexed(3),
        Alphabet::indexed(3),
        vec![row.clone(), row.clone(), row],
    )
    .unwrap();
    let (_, r) = hjmr_compress(&ch).unwrap();
    assert!(r.capacity.abs() < 1e-9);
    assert!(r.exact, "{:?}", r.tv_distance_per_input);
    assert!(r.max_expected_length <= 10.0);
}

#[test]
fn identity_channel_within_thirteen_bits() {
    let (_, r) = hjmr_compress(&Channel::identity(2)).unwrap();
    assert!((r.capacity - 1.0).abs() < 1e-9);
    assert!(r.exact);
    assert!((r.bound - (1.0 + g1(1.0).unwrap())).abs() < 1e-9);
    assert!(r.max_expected_length <= 13.0, "{}", r.max_expected_length);
}

#[test]
fn random_channels_are_simulated_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let ch = random_channel(&mut rng, 3, 3);
        let (p, r) = hjmr_compress(&ch).unwrap();
        assert_eq!(p.model, Model::Average);
        assert!(r.exact, "{:?}", r.tv_distance_per_input);
        assert!(r.within_bound, "{} > {}", r.max_expected_length, r.bound);
        for &l in &r.expected_length_per_input {
            assert!(l <= r.bound);
        }
    }
}

#[test]
fn small_cap_still_exact_through_escape() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ch = random_channel(&mut rng, 3, 4);
    let (_, r) = hjmr_compress_with(&ch, 2).unwrap();
    assert!(r.exact, "{:?}", r.tv_distance_per_input);
}

#[test]
fn compressing_deterministic_protocol_is_exact() {
    let p = verbatim(&eq2());
    let (q, r) = ic_to_ccav(&p).unwrap();
    assert_eq!(q.model, Model::Average);
    assert!(r.exact, "{}", r.max_tv);
    assert!((r.ic - 4.0).abs() < 1e-6);
    assert!(r.within_bound, "{} > {}", r.cc_av, r.bound);
}

#[test]
fn compressing_shared_hash_is_exact() {
    let p = shared_hash_equality(2, 1);
    let (q, r) = ic_to_ccav(&p).unwrap();
    assert!(r.exact, "{}", r.max_tv);
    assert!(r.within_bound, "{} > {}", r.cc_av, r.bound);
    let ic = ic_worst(&p).unwrap().ic;
    assert!(r.ic + 1e-6 >= ic);
    let f = eq2();
    let before = Evaluator::new(&p).unwrap().worst_error(&f).unwrap();
    let after = Evaluator::new(&q).unwrap().worst_error(&f).unwrap();
    assert!((before - after).abs() < 1e-12);
}

#[test]
fn compressing_constant_messages_costs_at_most_twenty() {
    let (_, r) = ic_to_ccav(&constant_messages(&eq2())).unwrap();
    assert!(r.ic.abs() < 1e-9);
    assert!(r.cc_av <= 20.0);
    assert!(r.exact);
}

#[test]
fn compress_rejects_average_model() {
    let p = two_length_equality(0.1, 8, 0.0).unwrap();
    assert!(ic_to_ccav(&p).is_err());
}

#[test]
fn truncation_of_constant_lengths_is_a_no_op() {
    let f = eq2();
    let p = two_length_equality(0.0, 5, 0.05).unwrap();
    for delta in [0.1, 0.25, 0.5] {
        let (_, r) = markov_truncate(&p, &f, delta).unwrap();
        assert!((r.worst_error - r.epsilon).abs() < 1e-12);
        assert!(r.cc_sh_after as f64 <= r.cost_bound);
    }
}

#[test]
fn truncation_of_two_lengths_meets_both_bounds() {
    let f = eq2();
    let p = two_length_equality(0.1, 40, 0.05).unwrap();
    for delta in [0.1, 0.25, 0.5] {
        let (q, r) = markov_truncate(&p, &f, delta).unwrap();
        assert_eq!(q.model, Model::Shared);
        assert!(
            r.worst_error <= r.error_bound + 1e-12,
            "δ={delta}: {} > {}",
            r.worst_error,
            r.error_bound
        );
        assert!(
            r.cc_sh_after as f64 <= r.cost_bound,
            "δ={delta}: {} > {}",
            r.cc_sh_after,
            r.cost_bound
        );
    }
    // c(x) = 6.7 bits, so at δ = 0.25 the threshold 26.8 cuts the 40-bit words
    let (_, r) = markov_truncate(&p, &f, 0.25).unwrap();
    assert!(r.cc_sh_after < 40);
    assert!(r.worst_error > r.epsilon);
}

#[test]
fn truncation_cost_bound_at_cc_av_eight() {
    assert_eq!(8.0 / 0.5 + TRUNCATE_SLACK, 20.0);
}

#[test]
fn truncation_rejects_bad_delta_and_model() {
    let f = eq2();
    let p = two_length_equality(0.1, 8, 0.0).unwrap();
    assert!(markov_truncate(&p, &f, 0.0).is_err());
    assert!(markov_truncate(&p, &f, 0.6).is_err());
    assert!(markov_truncate(&verbatim(&f), &f, 0.25).is_err());
}

#[test]
fn newman_sample_counts() {
    assert_eq!(newman_t(2, 2, 0.5), 23);
    assert_eq!(newman_t(2, 2, 0.25), 89);
}

#[test]
fn newman_on_shared_hash() {
    let f = eq2();
    let p = shared_hash_equality(2, 2);
    let (q, r) = newman_derandomize(&p, &f, 0.25, 1000, 3).unwrap();
    assert_eq!(q.model, Model::Private);
    assert_eq!(r.t, 89);
    assert!((r.epsilon - 0.25).abs() < 1e-12);
    assert!(r.worst_error <= r.error_bound + 1e-12);
    assert!(r.alice.achieved_error <= r.alice.target_error);
    assert!(r.cc_priv_after as f64 <= r.cost_bound);
    assert!(Evaluator::new(&q).unwrap().worst_error(&f).unwrap() <= 0.5);
}

#[test]
fn newman_is_reproducible() {
    let f = eq2();
    let p = shared_hash_equality(2, 2);
    let a = newman_derandomize(&p, &f, 0.25, 1000, 9).unwrap();
    let b = newman_derandomize(&p, &f, 0.25, 1000, 9).unwrap();
    assert_eq!(a.0.to_json(), b.0.to_json());
    assert_eq!(a.1, b.1);
}

#[test]
fn newman_without_shared_randomness_keeps_error() {
    let f = eq2();
    let mut p = verbatim(&f);
    p.model = Model::Shared;
    let (_, r) = newman_derandomize(&p, &f, 0.25, 10, 0).unwrap();
    assert_eq!(r.t, 1);
    assert_eq!(r.worst_error, r.epsilon);
    assert_eq!(r.cc_priv_after, r.cc_sh_before);
}

#[test]
fn newman_reports_failure() {
    let f = eq2();
    let p = shared_hash_equality(2, 2);
    match newman_derandomize(&p, &f, 0.25, 0, 0) {
        Err(crate::Error::SearchFailed { restarts, .. }) => assert_eq!(restarts, 0),
        other => panic!("expected a search failure, got {other:?}"),
    }
}

#[test]
fn bk_sample_count() {
    assert_eq!(bk_t(1, 0.3), 12);
    assert_eq!(bk_t(2, 0.3), 16);
}

#[test]
fn bk_on_deterministic_alice_is_identity() {
    let f = eq2();
    let p = verbatim(&f);
    let (q, r) = bk_derandomize_alice(&p, &f, 0.3, None, 10, 0).unwrap();
    assert_eq!(q, p);
    assert_eq!(r.derandomization.t, 1);
}

#[test]
fn bk_concentrates_a_uniform_bit() {
    let f = FunctionTable::from_fn(2, 2, 2, |x, y| (x == y) as usize).unwrap();
    let p = uniform_bit_alice();
    let (q, r) = bk_derandomize_alice(&p, &f, 0.3, None, 1000, 1).unwrap();
    assert_eq!(r.derandomization.t, 12);
    assert!(r.max_deviation < 0.3);
    // every input of Alice now yields a single tuple
    let e = Evaluator::new(&q).unwrap();
    for x in 0..2 {
        let law = e.alice_law(x);
        assert_eq!(law.len(), 1);
        assert!(matches!(law[0].view, View::Tuple(ref items) if items.len() == 12));
    }
    assert!(matches!(q.alice.stages.last(), Some(Stage::Tuple(_))));
    assert_eq!(r.alice_len_after, 12);
}

#[test]
fn bk_on_equality_fixture() {
    let f = eq2();
    let p = private_hash_equality(2, 2);
    let (q, r) = bk_derandomize_alice(&p, &f, 0.3, None, 1000, 2).unwrap();
    assert!((r.epsilon - 0.25).abs() < 1e-12);
    assert!(r.worst_error <= r.error_bound + 1e-12);
    assert!(r.alice_len_after <= r.length_bound);
    assert_eq!(r.derandomization.t, 16);
    let json = q.to_json();
    let back = crate::smp::SmpProtocol::from_json(&json).unwrap();
    assert_eq!(back.to_json(), json);
}

#[test]
fn bk_needs_boolean_output_and_private_alice() {
    let f = eq2();
    let p = shared_hash_equality(2, 1);
    assert!(bk_derandomize_alice(&p, &f, 0.3, None, 10, 0).is_err());
}

#[test]
fn pipeline_parsing() {
    let s = parse_pipeline("compress -> truncate:0.25 → newman:0.25; bk:0.3,40").unwrap();
    assert_eq!(
        s,
        vec![
            PipelineStage::Compress,
            PipelineStage::Truncate { delta: 0.25 },
            PipelineStage::Newman { delta: 0.25 },
            PipelineStage::Bk {
                delta: 0.3,
                t: Some(40)
            },
        ]
    );
    assert_eq!(parse_pipeline("  ").unwrap(), vec![]);
    assert_eq!(
        parse_pipeline("bk:0.3").unwrap(),
        vec![PipelineStage::Bk { delta: 0.3, t: None }]
    );
    assert!(parse_pipeline("squash:1").is_err());
    assert!(parse_pipeline("truncate:abc").is_err());
    let round: Vec<String> = s.iter().map(|st| st.to_string()).collect();
    assert_eq!(parse_pipeline(&round.join(";")).unwrap(), s);
}

#[test]
fn empty_pipeline_is_identity() {
    let f = eq2();
    let p = shared_hash_equality(2, 1);
    let (q, r) = run_pipeline(&p, &f, &[], &PipelineConfig::default()).unwrap();
    assert_eq!(q.to_json(), p.to_json());
    assert!(r.pass && r.stages.is_empty());
}

#[test]
fn pipeline_stage_model_mismatch_is_an_error() {
    let f = eq2();
    let p = shared_hash_equality(2, 1);
    let stages = parse_pipeline("truncate:0.25").unwrap();
    assert!(run_pipeline(&p, &f, &stages, &PipelineConfig::default()).is_err());
}

#[test]
fn compress_truncate_newman_chain() {
    let f = eq2();
    let p = shared_hash_equality(2, 2);
    let stages = parse_pipeline("compress -> truncate:0.25 -> newman:0.25").unwrap();
    let (q, r) = run_pipeline(&p, &f, &stages, &PipelineConfig::default()).unwrap();
    assert!(r.pass, "{}", serde_json::to_string_pretty(&r).unwrap());
    assert_eq!(r.stages.len(), 3);
    assert_eq!(q.model, Model::Private);
    assert_eq!(
        r.stages.iter().map(|s| s.model_after).collect::<Vec<_>>(),
        vec![Model::Average, Model::Shared, Model::Private]
    );
    let json = q.to_json();
    assert_eq!(crate::smp::SmpProtocol::from_json(&json).unwrap().to_json(), json);
}
