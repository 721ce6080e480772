mod common;

use proptest::prelude::*;
use qgraph_core::assembly::uniform_elements;
use qgraph_core::control::boundary::reconstruct_boundary_control;
use qgraph_core::control::perturb::{perturb, Rational};
use qgraph_core::control::relations::{find_relation, satisfies};
use qgraph_core::control::synthesis::{synthesize_pulse, ControlPulse, SynthesisOptions};
use qgraph_core::control::{BilinearSystem, SystemOptions};
use qgraph_core::gauge::{apply_gauge, simple_subspace, EdgePotential, GaugeDirection, GaugePhase};
use qgraph_core::graph::{catalog, GridFunction};
use qgraph_core::linalg::C64;
use qgraph_core::propagation::{closeness_bound, Coefficient, Term, TimeDependentHamiltonian};
use rand::Rng;

fn scaled(c: &Coefficient, k: f64) -> Coefficient {
    let f = c.clone();
    Coefficient::function(move |t| k * f.eval(t), c.breakpoints())
}

fn loop_system(levels: usize) -> BilinearSystem {
    let opts = SystemOptions { levels, frame_levels: levels, elements_per_unit: 64, richardson: false };
    BilinearSystem::new(&catalog::loop_graph(1.0), 0.0, &EdgePotential::from_a(vec![1.0]), &[1.0], 5.0, opts).unwrap()
}

#[test]
fn synthesized_pulses_stay_admissible() {
    let sys = loop_system(4);
    for seed in 0..3 {
        for target in 1..3 {
            let opts = SynthesisOptions { cells: 4, restarts: 2, seed, max_evaluations: 4000, ..SynthesisOptions::default() };
            let psi0 = BilinearSystem::basis_state(4, 0);
            let tgt = BilinearSystem::basis_state(4, target);
            let res = synthesize_pulse(&sys, &psi0, &tgt, 0.1, 40.0, &opts).unwrap();
            assert!(res.pulse.values.iter().all(|&u| u > 0.0 && u < sys.c), "{:?}", res.pulse.values);
            assert!(res.pulse.duration() <= 40.0);
        }
    }
}

#[test]
fn perturbation_stays_within_closeness_bound() {
    let sys = loop_system(6);
    // a large coupling threshold perturbs every link
    let p = perturb(&sys, Rational::new(1, 1000).unwrap(), 1e-3, 10.0).unwrap();
    let d0 = &p.h0 - &sys.h0;
    let d1 = &p.h1 - &sys.h1;
    assert!(d1.norm() > 0.0);
    let mut r = common::rng(3);
    for _ in 0..5 {
        let values: Vec<f64> = (0..6).map(|_| r.gen_range(0.5..4.5)).collect();
        let u = ControlPulse::uniform(2.0, values, sys.c).unwrap().coefficient();
        let build = |on: f64| {
            TimeDependentHamiltonian::new(
                vec![
                    Term::new(Coefficient::Constant(1.0), sys.h0.clone()),
                    Term::new(Coefficient::Constant(on), d0.clone()),
                    Term::new(u.clone(), sys.h1.clone()),
                    Term::new(scaled(&u, on), d1.clone()),
                ],
                None,
                (0.0, 2.0),
            )
            .unwrap()
        };
        let psi = common::cvec(&mut r, 6).normalize();
        let c = closeness_bound(&build(0.0), &build(1.0), &psi, 0.0, 2.0, 1024).unwrap();
        assert!(c.actual <= c.trajectory_bound, "{c:?}");
        assert!(c.actual <= 1e-2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reported_relations_satisfy_their_tolerance(seed: u64, m in 2usize..6, plant: bool) {
        let mut r = common::rng(seed);
        let mut g: Vec<f64> = (0..m).map(|_| r.gen_range(1.0..50.0)).collect();
        if plant {
            let c: Vec<i64> = (0..m - 1).map(|_| r.gen_range(-3..=3)).collect();
            g[m - 1] = c.iter().zip(&g).map(|(&a, b)| a as f64 * b).sum::<f64>();
        }
        let out = find_relation(&g, 6, 1e-9);
        if let Some(rel) = out.relation {
            prop_assert!(satisfies(&rel.coefficients, &g, 1e-9));
            prop_assert!(rel.coefficients.iter().all(|c| c.abs() <= 6));
        }
    }

    #[test]
    fn window_deviation_is_bounded(seed: u64, cells in 1usize..12, windows in 1usize..40, c in 0.5f64..10.0) {
        let mut r = common::rng(seed);
        let g = catalog::g2();
        let basis = simple_subspace(&g);
        let mut beta = vec![0.0; g.edge_count()];
        for v in &basis {
            let w = r.gen_range(-1.0..1.0);
            beta.iter_mut().zip(v).for_each(|(x, y)| *x += w * y);
        }
        let scale = beta.iter().map(|b: &f64| b.abs()).fold(0.0, f64::max).max(1.0);
        beta.iter_mut().for_each(|b| *b /= scale);
        let a = EdgePotential::from_a(beta.iter().map(|b| 2.0 * b).collect());
        let t = r.gen_range(0.1..5.0);
        let values: Vec<f64> = (0..cells).map(|_| r.gen_range(0.0..1.0) * c).map(|v: f64| v.clamp(1e-9, c * (1.0 - 1e-9))).collect();
        let u = ControlPulse::uniform(t, values, c).unwrap();
        let tau = t / windows as f64;
        let s = reconstruct_boundary_control(&g, &u, &a, &beta, tau, 8).unwrap();
        prop_assert!(s.sup_deviation <= c * tau + 1e-12);
    }

    #[test]
    fn fidelity_is_gauge_invariant(g in common::graph(), seed: u64) {
        let mut r = common::rng(seed);
        let n = uniform_elements(&g, 8);
        let random = |r: &mut rand_chacha::ChaCha8Rng| GridFunction {
            values: n.iter().map(|&k| (0..=k).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()).collect(),
        };
        let psi = random(&mut r);
        let target = random(&mut r);
        let r2 = &mut r;
        let e = g.edge_count();
        let chi = GaugePhase { a: (0..e).map(|_| r2.gen_range(-5.0..5.0)).collect(), b: (0..e).map(|_| r2.gen_range(-5.0..5.0)).collect() };
        let before = target.inner(&psi, &g).norm();
        let gp = apply_gauge(&psi, &chi, &g, GaugeDirection::Forward).unwrap();
        let gt = apply_gauge(&target, &chi, &g, GaugeDirection::Forward).unwrap();
        let after = gt.inner(&gp, &g).norm();
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0));
    }
}
