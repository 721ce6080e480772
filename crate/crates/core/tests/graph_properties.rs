mod common;

use proptest::prelude::*;
use qgraph_core::graph::{boundary_form, GridFunction, MetricGraph};
use qgraph_core::linalg::{cis, C64};
use rand::Rng;

/// A smooth function per edge: a few random Fourier modes plus a quadratic.
fn smooth(g: &MetricGraph, seed: u64) -> Vec<Vec<[f64; 4]>> {
    let mut r = common::rng(seed);
    (0..g.edge_count()).map(|_| (0..3).map(|_| [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0)]).collect()).collect()
}

fn eval(c: &[[f64; 4]], x: f64) -> C64 {
    c.iter().map(|m| C64::new(m[0], m[1]) * cis(m[2] * x) + C64::new(m[3] * x * x, 0.0)).sum()
}

fn grid(g: &MetricGraph, coeffs: &[Vec<[f64; 4]>], flip: &[bool], n: usize) -> GridFunction {
    GridFunction::from_fn(g, &vec![n; g.edge_count()], |e, x| {
        let x = if flip[e] { g.length(e) - x } else { x };
        eval(&coeffs[e], x)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn slots_biject_with_edge_ends(g in common::graph()) {
        let total: usize = (0..g.vertex_count()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
        prop_assert_eq!(g.slot_count(), 2 * g.edge_count());
        for v in 0..g.vertex_count() {
            prop_assert_eq!(g.slots().vertex_range(v).len(), g.degree(v));
        }
    }

    #[test]
    fn boundary_form_ignores_orientation(g in common::graph(), s1: u64, s2: u64, flips: u64) {
        let (f, h) = (smooth(&g, s1), smooth(&g, s2));
        let none = vec![false; g.edge_count()];
        let flip: Vec<bool> = (0..g.edge_count()).map(|e| flips >> e & 1 == 1).collect();
        let r = g.reoriented(&flip);
        let a = boundary_form(&grid(&g, &f, &none, 400), &grid(&g, &h, &none, 400), &g).unwrap();
        let b = boundary_form(&grid(&r, &f, &flip, 400), &grid(&r, &h, &flip, 400), &r).unwrap();
        prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn boundary_form_diagonal_is_imaginary(g in common::graph(), s: u64) {
        let f = smooth(&g, s);
        let psi = grid(&g, &f, &vec![false; g.edge_count()], 200);
        let z = boundary_form(&psi, &psi, &g).unwrap();
        prop_assert!(z.re.abs() <= 1e-12 * z.norm().max(1.0), "{}", z);
    }
}
