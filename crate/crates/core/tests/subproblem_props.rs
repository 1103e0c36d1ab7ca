mod common;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sensopt::subproblem::CertStatus;
use sensopt::{compile, BasisConfig, Certifier, Experiment, History, SobolConstraint, TensorBasis};

fn certifier(constraints: &[SobolConstraint]) -> Certifier {
    let basis = Arc::new(TensorBasis::new(BasisConfig::new(3, 4).unwrap()).unwrap());
    let cc = compile(constraints, &basis).unwrap();
    Certifier::new(basis, cc)
}

fn rosenbrock_history(rng: &mut ChaCha8Rng, n: usize) -> History {
    let mut h = History::new(3);
    for _ in 0..n {
        let x = common::uniform_point(rng, 3);
        let y = common::rosenbrock3_oracle(&x);
        h.push(x, y).unwrap();
    }
    h
}

#[test]
fn bound_is_pinned_at_history_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = rosenbrock_history(&mut rng, 12);
    for exp in [Experiment::A, Experiment::D] {
        let cert = certifier(&exp.constraints());
        for (x, y) in h.points() {
            let lb = cert.lower_bound(x, &h).unwrap();
            assert_eq!(lb.status, CertStatus::Optimal);
            assert!((lb.value - y).abs() < 1e-6, "{exp}: {} vs {y}", lb.value);
        }
    }
}

#[test]
fn more_constraints_raise_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = rosenbrock_history(&mut rng, 15);
    let loose = certifier(&Experiment::D.constraints());
    let tight = certifier(&Experiment::C.constraints());
    let none = certifier(&[]);
    for _ in 0..15 {
        let x = common::uniform_point(&mut rng, 3);
        let m0 = none.lower_bound(&x, &h).unwrap().value;
        let m1 = loose.lower_bound(&x, &h).unwrap().value;
        let m2 = tight.lower_bound(&x, &h).unwrap().value;
        assert!(m1 >= m0 - 1e-6 && m2 >= m1 - 1e-6, "{m0} {m1} {m2}");
    }
}

#[test]
fn more_history_raises_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cert = certifier(&Experiment::D.constraints());
    let queries: Vec<Vec<f64>> = (0..8).map(|_| common::uniform_point(&mut rng, 3)).collect();
    let mut h = rosenbrock_history(&mut rng, 5);
    let mut prev: Vec<f64> = queries.iter().map(|q| cert.lower_bound(q, &h).unwrap().value).collect();
    for _ in 0..6 {
        let x = common::uniform_point(&mut rng, 3);
        let y = common::rosenbrock3_oracle(&x);
        h.push(x, y).unwrap();
        for (q, p) in queries.iter().zip(prev.iter_mut()) {
            let m = cert.lower_bound(q, &h).unwrap().value;
            assert!(m >= *p - 1e-6, "{m} < {p}");
            *p = m;
        }
    }
}

#[test]
fn bound_never_exceeds_an_admissible_interpolant() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let h = rosenbrock_history(&mut rng, 10);
    let cert = certifier(&Experiment::D.constraints());
    // minimizers at other queries are admissible interpolants
    let witnesses: Vec<_> = (0..5)
        .map(|_| {
            let q = common::uniform_point(&mut rng, 3);
            cert.minimizer(&q, &h).unwrap().unwrap()
        })
        .collect();
    for a in &witnesses {
        assert!(cert.compiled().is_feasible(a.coeffs()));
        for (x, y) in h.points() {
            assert!((a.eval(x).unwrap() - y).abs() < 1e-7);
        }
    }
    for _ in 0..10 {
        let x = common::uniform_point(&mut rng, 3);
        let m = cert.lower_bound(&x, &h).unwrap().value;
        for a in &witnesses {
            assert!(m <= a.eval(&x).unwrap() + 1e-6);
        }
    }
}

#[test]
fn small_history_is_unbounded() {
    // one point cannot pin the constant coefficient away from the query
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = rosenbrock_history(&mut rng, 1);
    let cert = certifier(&[]);
    let x = common::uniform_point(&mut rng, 3);
    let lb = cert.lower_bound(&x, &h).unwrap();
    assert_eq!(lb.status, CertStatus::Optimal);
    assert!(lb.value < h.best());
    assert_eq!(cert.lower_bound(&x, &History::new(3)).unwrap().status, CertStatus::Unbounded);
}
