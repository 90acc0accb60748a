//! End-to-end use of the public API: build, serialize, transform, re-read.

use smpleak::bounds::{log_space, sweep, QuantumModel};
use smpleak::leakage::{ic_worst, il_three_forms, il_worst, uniform_prior};
use smpleak::smp::fixtures::{private_hash_equality, shared_hash_equality, verbatim};
use smpleak::smp::{costs, make_equality, worst_error, Model, SmpProtocol};
use smpleak::transforms::{bk_derandomize_alice, parse_pipeline, run_pipeline, PipelineConfig};
use smpleak::Exec;

fn reread(p: &SmpProtocol) -> SmpProtocol {
    SmpProtocol::from_json(&p.to_json()).unwrap()
}

#[test]
fn fixtures_survive_serialization() {
    for p in [
        verbatim(&make_equality(2).unwrap()),
        shared_hash_equality(2, 2),
        private_hash_equality(2, 2),
    ] {
        assert_eq!(reread(&p), p);
        assert_eq!(reread(&p).to_json(), p.to_json());
    }
}

#[test]
fn worst_case_leakage_of_a_hash_protocol() {
    let p = shared_hash_equality(2, 2);
    let il = il_worst(&p).unwrap();
    let ic = ic_worst(&p).unwrap();
    assert!(il.il <= ic.ic + 1e-9);
    assert!(il.il_at_witness <= il.il + 1e-9);
    let forms = il_three_forms(&p, &uniform_prior(&p).unwrap()).unwrap();
    assert!((forms[0] - forms[1]).abs() < 1e-12 && (forms[1] - forms[2]).abs() < 1e-12);
    // two hash bits per side can reveal at most four bits in total
    assert!(ic.ic <= 4.0 + 1e-9);
}

#[test]
fn pipeline_output_is_a_valid_standalone_protocol() {
    let f = make_equality(2).unwrap();
    let p = shared_hash_equality(2, 2);
    let stages = parse_pipeline("compress -> truncate:0.25 -> newman:0.25").unwrap();
    let (q, report) = run_pipeline(&p, &f, &stages, &PipelineConfig::default()).unwrap();
    assert!(report.pass);
    assert_eq!(q.model, Model::Private);

    let back = reread(&q);
    let eps = worst_error(&p, &f).unwrap();
    let err = worst_error(&back, &f).unwrap();
    assert_eq!(err, worst_error(&q, &f).unwrap());
    assert!(err <= eps + 0.25 + 0.25 + 1e-12);
    assert!(costs(&back).unwrap().cc_priv.is_some());
}

#[test]
fn bk_output_round_trips() {
    let f = make_equality(2).unwrap();
    let p = private_hash_equality(2, 2);
    let (q, r) = bk_derandomize_alice(&p, &f, 0.3, None, 1000, 11).unwrap();
    let back = reread(&q);
    assert_eq!(worst_error(&back, &f).unwrap(), r.worst_error);
    assert!(r.worst_error <= r.epsilon + 0.3 + 1e-12);
}

#[test]
fn execution_mode_does_not_change_results() {
    let ns = log_space(1e4, 1e12, 17).unwrap();
    let m = QuantumModel::default();
    let a = sweep(0.01, &ns, &m, Exec::Sequential).unwrap();
    let b = sweep(0.01, &ns, &m, Exec::default()).unwrap();
    assert_eq!(a, b);
}
