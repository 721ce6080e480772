#![allow(dead_code)]

use proptest::prelude::*;
use qgraph_core::graph::{Edge, MetricGraph};
use qgraph_core::linalg::{expm_hermitian, C64, CMat, CVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random multigraph with loops and parallel edges; vertices may be isolated.
pub fn graph() -> impl Strategy<Value = MetricGraph> {
    (1usize..5, 1usize..6, any::<u64>()).prop_map(|(nv, ne, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vertices: Vec<String> = (1..=nv).map(|i| format!("v{i}")).collect();
        let edges = (1..=ne)
            .map(|i| Edge {
                id: format!("e{i}"),
                from: vertices[rng.gen_range(0..nv)].clone(),
                to: vertices[rng.gen_range(0..nv)].clone(),
                length: rng.gen_range(0.5..3.0),
            })
            .collect();
        MetricGraph::new(vertices, edges).unwrap()
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cvec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    expm_hermitian(&hermitian(rng, n), 2.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
