mod common;

use proptest::prelude::*;
use qgraph_core::linalg::{C64, CMat};
use qgraph_core::propagation::{closeness_bound, propagate, step_propagator, Coefficient, Term, TimeDependentHamiltonian};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn piecewise(r: &mut ChaCha8Rng, cells: usize, t: f64) -> Coefficient {
    Coefficient::PiecewiseConstant {
        knots: (0..=cells).map(|j| t * j as f64 / cells as f64).collect(),
        values: (0..cells).map(|_| r.gen_range(-2.0..2.0)).collect(),
    }
}

fn spd(r: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| C64::new(r.gen_range(-0.3..0.3), r.gen_range(-0.3..0.3)));
    CMat::identity(n, n) + &a * a.adjoint()
}

fn system(r: &mut ChaCha8Rng, n: usize, mass: bool, f: Coefficient) -> TimeDependentHamiltonian {
    let m = mass.then(|| spd(r, n));
    TimeDependentHamiltonian::new(
        vec![Term::new(Coefficient::Constant(1.0), common::hermitian(r, n)), Term::new(f, common::hermitian(r, n))],
        m,
        (0.0, 1.0),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn steps_preserve_the_mass_norm(seed: u64, n in 1usize..8, mass: bool, s in 0.0f64..0.5, len in 0.001f64..0.5) {
        let mut r = common::rng(seed);
        let f = Coefficient::Constant(r.gen_range(-2.0..2.0));
        let h = system(&mut r, n, mass, f);
        let u = step_propagator(&h, s, s + len).unwrap();
        for _ in 0..4 {
            let psi = common::cvec(&mut r, n);
            let a = h.m_norm(&psi);
            prop_assert!((h.m_norm(&(&u * &psi)) - a).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn propagation_composes_at_partition_points(seed: u64, n in 1usize..6, mass: bool, k in 1usize..16, j in 1usize..16) {
        let mut r = common::rng(seed);
        let f = piecewise(&mut r, 4, 1.0);
        let h = system(&mut r, n, mass, f);
        let k = 2 * k;
        let j = j.min(2 * k - 1);
        // r = j / (2k) is a node of the uniform 2k partition
        let mid = j as f64 / (2 * k) as f64;
        let psi = common::cvec(&mut r, n);
        let whole = propagate(&h, &psi, 0.0, 1.0, 2 * k).unwrap().final_state;
        let first = propagate(&h, &psi, 0.0, mid, j).unwrap().final_state;
        let split = propagate(&h, &first, mid, 1.0, 2 * k - j).unwrap().final_state;
        prop_assert!(h.m_norm(&(whole - split)) <= 1e-12 * h.m_norm(&psi).max(1.0));
    }

    #[test]
    fn trajectory_closeness_bound_holds(seed: u64, n in 2usize..6, amp in 0.001f64..0.1) {
        let mut r = common::rng(seed);
        let (h0, h1) = (common::hermitian(&mut r, n), common::hermitian(&mut r, n));
        let f = piecewise(&mut r, 6, 1.0);
        let (f2, phase) = (f.clone(), r.gen_range(0.0..6.0));
        let g = Coefficient::function(move |t| f2.eval(t) + amp * (7.0 * t + phase).sin(), f.breakpoints());
        let build = |c: Coefficient| TimeDependentHamiltonian::new(
            vec![Term::new(Coefficient::Constant(1.0), h0.clone()), Term::new(c, h1.clone())],
            None,
            (0.0, 1.0),
        ).unwrap();
        let psi = common::cvec(&mut r, n);
        let c = closeness_bound(&build(f), &build(g), &psi, 0.0, 1.0, 512).unwrap();
        prop_assert!(c.actual <= c.trajectory_bound, "{:?}", c);
    }
}
