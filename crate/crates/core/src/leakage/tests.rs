use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::{ic_product_grid, il_joint_search};
use super::*;
use crate::smp::fixtures::*;
use crate::smp::make_equality;

fn random_prior(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
    let w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-12).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

#[test]
fn point_prior_leaks_nothing() {
    let p = verbatim(&make_equality(2).unwrap());
    let mut probs = vec![0.0; 16];
    probs[5] = 1.0;
    let mu = prior(&p, probs).unwrap();
    assert!(il_dist(&p, &mu).unwrap().abs() < 1e-12);
    assert!(ic_dist(&p, &mu).unwrap().abs() < 1e-12);
}

#[test]
fn verbatim_leaks_the_inputs() {
    let p = verbatim(&make_equality(2).unwrap());
    let mu = uniform_prior(&p).unwrap();
    assert!((il_dist(&p, &mu).unwrap() - 4.0).abs() < 1e-12);
    assert!((ic_dist(&p, &mu).unwrap() - 4.0).abs() < 1e-12);
    let r = il_worst(&p).unwrap();
    assert!((r.il - 4.0).abs() < 1e-8);
    assert!((r.ic - 4.0).abs() < 1e-8);
}

#[test]
fn constant_messages_leak_nothing() {
    let p = constant_messages(&make_equality(2).unwrap());
    let mu = uniform_prior(&p).unwrap();
    assert_eq!(il_dist(&p, &mu).unwrap(), 0.0);
    assert_eq!(ic_dist(&p, &mu).unwrap(), 0.0);
    let r = il_worst(&p).unwrap();
    assert!(r.il.abs() < 1e-12 && r.ic.abs() < 1e-12);
}

#[test]
fn three_forms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut ps = vec![
        shared_hash_equality(2, 1),
        constant_messages(&make_equality(1).unwrap()),
    ];
    for _ in 0..50 {
        ps.push(random_protocol(&mut rng, &RandomShape::default()));
    }
    for p in &ps {
        let mu = prior(p, random_prior(&mut rng, p.x.len() * p.y.len())).unwrap();
        let [a, b, c] = il_three_forms(p, &mu).unwrap();
        assert!((a - c).abs() < 1e-9 && (b - c).abs() < 1e-9, "{a} {b} {c}");
    }
}

#[test]
fn fast_leakage_matches_joint_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let p = random_protocol(&mut rng, &RandomShape::default());
        let regs = Registers::new(&p).unwrap();
        let mu = random_prior(&mut rng, p.x.len() * p.y.len());
        let f = regs.forms(&mu).unwrap();
        assert!((regs.il(&mu) - f.il).abs() < 1e-10);
    }
}

#[test]
fn three_form_relations() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let p = random_protocol(&mut rng, &RandomShape::default());
        let regs = Registers::new(&p).unwrap();
        let mu = random_prior(&mut rng, p.x.len() * p.y.len());
        let f = regs.forms(&mu).unwrap();
        assert!((f.ic - f.il - f.cross).abs() < 1e-9);
        assert!(f.il <= f.ic + 1e-9 && f.ic <= 2.0 * f.il + 1e-9);
    }
}

#[test]
fn worst_case_matches_product_grid() {
    let p = shared_hash_equality(2, 1);
    let regs = Registers::new(&p).unwrap();
    let r = ic_worst(&p).unwrap();
    let g = ic_product_grid(&regs, 0.02).unwrap();
    assert!(r.ic + 1e-9 >= g, "{} < {g}", r.ic);
    assert!(r.ic - g < 0.02, "{} vs {g}", r.ic);
}

#[test]
fn joint_priors_never_beat_capacity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let p = random_protocol(&mut rng, &RandomShape::default());
        let regs = Registers::new(&p).unwrap();
        let r = il_worst(&p).unwrap();
        let g = il_joint_search(&regs, 0.02, 2000, &mut rng);
        assert!(g <= r.ic_upper + 1e-6, "{g} > {}", r.ic_upper);
        assert!(r.il_at_witness <= r.ic + 1e-9);
    }
}

#[test]
fn leakage_below_expected_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let shape = RandomShape {
        model: crate::smp::Model::Average,
        ..RandomShape::default()
    };
    for _ in 0..40 {
        let p = random_protocol(&mut rng, &shape);
        let c = crate::smp::costs(&p).unwrap();
        let mu = random_prior(&mut rng, p.x.len() * p.y.len());
        let ic = Registers::new(&p).unwrap().forms(&mu).unwrap().ic;
        let mean: f64 = (0..p.x.len())
            .flat_map(|x| (0..p.y.len()).map(move |y| (x, y)))
            .map(|(x, y)| mu[x * p.y.len() + y] * c.cc_av_per_input[x][y])
            .sum();
        assert!(ic <= mean + 1e-9);
    }
}

#[test]
fn prior_shape_is_checked() {
    let p = shared_hash_equality(2, 1);
    let q = uniform_bit_alice();
    assert!(il_dist(&p, &uniform_prior(&q).unwrap()).is_err());
}
