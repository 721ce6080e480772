//! Gauge maps between quasi-δ standard Laplacians and magnetic δ-type
//! Laplacians, edge-constant potentials and the simplicity test.
//!
//! Conventions. A gauge phase is affine per edge, `chi_e(x) = A_e x + b_e`, and
//! `T` multiplies by `e^{i chi}`. At a vertex `T(v) = diag(e^{i chi_e(v)})`.
//!
//! * [`conjugate_conditions`] returns `T(v)^{-1} U T(v)`.
//! * [`to_magnetic_frame`] returns `T(v) U T(v)^{-1}`; it maps the quasi-δ
//!   conditions of [`crate::extensions::quasi_delta_conditions`] (projector on
//!   `e^{-i chi}(v)`) to plain δ-type conditions, and a quasi-δ function `phi`
//!   corresponds to the magnetic function `T phi` with potential `A = chi'`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::VertexConditions;
use crate::graph::{BoundaryTrace, End, GridFunction, MetricGraph};
use crate::linalg::{cis, CMat, CVec};

/// Absolute tolerance of the vertex sums in [`is_simple`].
pub const SIMPLE_TOL: f64 = 1e-12;

/// Edge-constant magnetic potential `A` and offset `b`, indexed by edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePotential {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl EdgePotential {
    pub fn zeros(edges: usize) -> Self {
        EdgePotential { a: vec![0.0; edges], b: vec![0.0; edges] }
    }

    pub fn from_a(a: Vec<f64>) -> Self {
        let b = vec![0.0; a.len()];
        EdgePotential { a, b }
    }

    pub fn check(&self, g: &MetricGraph) -> Result<()> {
        if self.a.len() != g.edge_count() || self.b.len() != g.edge_count() {
            return Err(Error::DimensionMismatch { expected: g.edge_count(), found: self.a.len() });
        }
        if self.a.iter().chain(&self.b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("potential has non-finite entries".into()));
        }
        Ok(())
    }

    /// The gauge phase `chi = A x + b` generating this potential.
    pub fn phase(&self) -> GaugePhase {
        GaugePhase { a: self.a.clone(), b: self.b.clone() }
    }
}

/// Affine phase `chi_e(x) = a_e x + b_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugePhase {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl GaugePhase {
    pub fn zeros(edges: usize) -> Self {
        GaugePhase { a: vec![0.0; edges], b: vec![0.0; edges] }
    }

    pub fn value(&self, edge: usize, x: f64) -> f64 {
        self.a[edge] * x + self.b[edge]
    }

    /// `chi` evaluated at every edge-end slot.
    pub fn slot_phases(&self, g: &MetricGraph) -> Vec<f64> {
        g.slots()
            .slots()
            .iter()
            .map(|s| match s.end {
                End::Minus => self.value(s.edge, 0.0),
                End::Plus => self.value(s.edge, g.length(s.edge)),
            })
            .collect()
    }

    pub fn potential(&self) -> EdgePotential {
        EdgePotential { a: self.a.clone(), b: self.b.clone() }
    }

    fn check(&self, g: &MetricGraph) -> Result<()> {
        if self.a.len() != g.edge_count() || self.b.len() != g.edge_count() {
            return Err(Error::DimensionMismatch { expected: g.edge_count(), found: self.a.len() });
        }
        Ok(())
    }
}

/// Affine phase through the given endpoint values (one per slot).
pub fn chi_from_vertex_phases(g: &MetricGraph, chi: &[f64]) -> Result<GaugePhase> {
    if chi.len() != g.slot_count() {
        return Err(Error::DimensionMismatch { expected: g.slot_count(), found: chi.len() });
    }
    let mut out = GaugePhase::zeros(g.edge_count());
    for e in 0..g.edge_count() {
        let lo = chi[g.slots().slot_of(e, End::Minus)];
        let hi = chi[g.slots().slot_of(e, End::Plus)];
        out.a[e] = (hi - lo) / g.length(e);
        out.b[e] = lo;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaugeDirection {
    /// Multiply by `e^{i chi}`.
    Forward,
    /// Multiply by `e^{-i chi}`.
    Inverse,
}

impl GaugeDirection {
    fn sign(self) -> f64 {
        match self {
            GaugeDirection::Forward => 1.0,
            GaugeDirection::Inverse => -1.0,
        }
    }
}

pub fn apply_gauge(
    psi: &GridFunction,
    chi: &GaugePhase,
    g: &MetricGraph,
    direction: GaugeDirection,
) -> Result<GridFunction> {
    psi.check(g)?;
    chi.check(g)?;
    let s = direction.sign();
    let values = psi
        .values
        .iter()
        .enumerate()
        .map(|(e, v)| {
            let h = g.length(e) / (v.len() - 1) as f64;
            v.iter().enumerate().map(|(j, z)| z * cis(s * chi.value(e, j as f64 * h))).collect()
        })
        .collect();
    Ok(GridFunction { values })
}

/// Gauge a boundary trace: values and (magnetic) normal derivatives are both
/// multiplied by `e^{±i chi}` at each slot.
pub fn gauge_trace(t: &BoundaryTrace, chi: &GaugePhase, g: &MetricGraph, direction: GaugeDirection) -> BoundaryTrace {
    let s = direction.sign();
    let ph: Vec<_> = chi.slot_phases(g).into_iter().map(|c| cis(s * c)).collect();
    let n = ph.len();
    BoundaryTrace {
        values: CVec::from_iterator(n, t.values.iter().zip(&ph).map(|(v, p)| v * p)),
        derivs: CVec::from_iterator(n, t.derivs.iter().zip(&ph).map(|(v, p)| v * p)),
    }
}

fn vertex_gauge(chi: &GaugePhase, g: &MetricGraph, v: usize, sign: f64) -> CMat {
    let phases = chi.slot_phases(g);
    let r = g.slots().vertex_range(v);
    CMat::from_diagonal(&CVec::from_iterator(r.len(), phases[r].iter().map(|&c| cis(sign * c))))
}

/// `V_v = T(v)^{-1} U_v T(v)`.
pub fn conjugate_conditions(u: &VertexConditions, chi: &GaugePhase, g: &MetricGraph) -> Result<VertexConditions> {
    chi.check(g)?;
    u.map_blocks(|v, b| vertex_gauge(chi, g, v, -1.0) * b * vertex_gauge(chi, g, v, 1.0))
}

/// `V_v = T(v) U_v T(v)^{-1}`: quasi-δ conditions to the magnetic δ frame.
pub fn to_magnetic_frame(u: &VertexConditions, chi: &GaugePhase, g: &MetricGraph) -> Result<VertexConditions> {
    chi.check(g)?;
    u.map_blocks(|v, b| vertex_gauge(chi, g, v, 1.0) * b * vertex_gauge(chi, g, v, -1.0))
}

/// Mean potential per edge and the residual phase that removes the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedPotential {
    pub potential: EdgePotential,
    /// `chi_e(x_j) = int_0^{x_j} (A_e - mean_e)`, zero at both ends.
    pub chi: Vec<Vec<f64>>,
}

/// Edge averages by the composite trapezoid rule on uniform nodal samples.
pub fn average_potential(g: &MetricGraph, samples: &[Vec<f64>]) -> Result<AveragedPotential> {
    if samples.len() != g.edge_count() {
        return Err(Error::DimensionMismatch { expected: g.edge_count(), found: samples.len() });
    }
    let mut mean = Vec::with_capacity(samples.len());
    let mut chi = Vec::with_capacity(samples.len());
    for (e, s) in samples.iter().enumerate() {
        if s.len() < 2 {
            return Err(Error::GridMismatch(format!("edge {e} needs at least two samples")));
        }
        let n = s.len() - 1;
        let len = g.length(e);
        let h = len / n as f64;
        let total: f64 = h * (0.5 * (s[0] + s[n]) + s[1..n].iter().sum::<f64>());
        let m = total / len;
        let mut c = vec![0.0; n + 1];
        for j in 1..=n {
            c[j] = c[j - 1] + 0.5 * h * (s[j - 1] + s[j]) - m * h;
        }
        c[n] = 0.0;
        mean.push(m);
        chi.push(c);
    }
    Ok(AveragedPotential { potential: EdgePotential::from_a(mean), chi })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplicity {
    pub simple: bool,
    /// `(vertex id, sum of oriented potentials)` per vertex.
    pub residuals: Vec<(String, f64)>,
}

/// Signed incidence sums: row `v`, column `e` holds the sum over the ends of
/// `e` at `v` of -1 (initial end) or +1 (terminal end). Loops give zero.
pub fn incidence_sum_matrix(g: &MetricGraph) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(g.vertex_count(), g.edge_count());
    for s in g.slots().slots() {
        m[(s.vertex, s.edge)] += s.end.sign();
    }
    m
}

pub fn is_simple(a: &EdgePotential, g: &MetricGraph) -> Simplicity {
    let m = incidence_sum_matrix(g);
    let residuals: Vec<(String, f64)> = (0..g.vertex_count())
        .map(|v| {
            let r: f64 = (0..g.edge_count()).map(|e| m[(v, e)] * a.a[e]).sum();
            (g.vertices()[v].clone(), r)
        })
        .collect();
    let simple = residuals.iter().all(|(_, r)| r.abs() <= SIMPLE_TOL);
    Simplicity { simple, residuals }
}

/// Orthonormal basis (one vector per row of the output) of the simple
/// potentials. The basis is the Gram-Schmidt orthonormalisation of the
/// reduced-row-echelon null-space basis, so it is deterministic.
pub fn simple_subspace(g: &MetricGraph) -> Vec<Vec<f64>> {
    let mut m = incidence_sum_matrix(g);
    let (rows, cols) = m.shape();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows).map(|i| (i, m[(i, c)].abs())).fold((r, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= 1e-12 {
            continue;
        }
        m.swap_rows(r, p);
        let piv = m[(r, c)];
        for j in 0..cols {
            m[(r, j)] /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[(i, c)];
                if f != 0.0 {
                    for j in 0..cols {
                        m[(i, j)] -= f * m[(r, j)];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &f in &free {
        let mut v = vec![0.0; cols];
        v[f] = 1.0;
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -m[(i, f)];
        }
        for b in &basis {
            let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= n;
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extensions::{delta_type_conditions, quasi_delta_conditions};
    use crate::graph::catalog;
    use crate::linalg::{C64, ONE, ZERO};

    #[test]
    fn affine_phase_from_endpoints() {
        let g = catalog::loop_graph(1.0);
        let chi = chi_from_vertex_phases(&g, &[0.0, 0.9]).unwrap();
        assert_eq!((chi.a[0], chi.b[0]), (0.9, 0.0));
        let i = catalog::interval(2.0);
        let chi = chi_from_vertex_phases(&i, &[1.0, 3.0]).unwrap();
        assert_eq!((chi.a[0], chi.b[0]), (1.0, 1.0));
        let flat = chi_from_vertex_phases(&i, &[0.4, 0.4]).unwrap();
        assert_eq!(flat.a[0], 0.0);
    }

    #[test]
    fn gauge_round_trip_and_isometry() {
        let g = catalog::bouquet(2);
        let psi = GridFunction::from_fn(&g, &[16, 24], |e, x| C64::new(x.sin() + e as f64, x * x)).unwrap();
        let chi = GaugePhase { a: vec![1.3, -0.4], b: vec![0.2, 2.0] };
        let fwd = apply_gauge(&psi, &chi, &g, GaugeDirection::Forward).unwrap();
        let back = apply_gauge(&fwd, &chi, &g, GaugeDirection::Inverse).unwrap();
        for (a, b) in back.values.iter().flatten().zip(psi.values.iter().flatten()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!((fwd.norm(&g) - psi.norm(&g)).abs() < 1e-14);
        let id = apply_gauge(&psi, &GaugePhase::zeros(2), &g, GaugeDirection::Forward).unwrap();
        assert_eq!(id, psi);
    }

    #[test]
    fn loop_quasi_matrix_maps_to_kirchhoff() {
        let g = catalog::loop_graph(1.0);
        let alpha = 1.1;
        let chi = chi_from_vertex_phases(&g, &[0.0, alpha]).unwrap();
        // the display form [[0, e^{-ia}], [e^{ia}, 0]]
        let u = VertexConditions::local(
            vec![CMat::from_row_slice(2, 2, &[ZERO, cis(-alpha), cis(alpha), ZERO])],
            &g,
        )
        .unwrap();
        let v = conjugate_conditions(&u, &chi, &g).unwrap().matrix();
        let swap = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert!((v - swap).norm() < 1e-15);
        // the constructor's conditions reach Kirchhoff through the magnetic frame
        let q = quasi_delta_conditions(&g, 0.0, &[0.0, alpha]).unwrap();
        let m = to_magnetic_frame(&q, &chi, &g).unwrap();
        assert!((m.matrix() - delta_type_conditions(&g, 0.0).unwrap().matrix()).norm() < 1e-15);
        let same = conjugate_conditions(&q, &GaugePhase::zeros(1), &g).unwrap();
        assert_eq!(same.matrix(), q.matrix());
    }

    #[test]
    fn averaging() {
        let g = catalog::loop_graph(1.0);
        let n = 256;
        let xs: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        let c = average_potential(&g, &[vec![0.7; n + 1]]).unwrap();
        assert!((c.potential.a[0] - 0.7).abs() < 1e-13);
        assert!(c.chi[0].iter().all(|x| x.abs() < 1e-13));
        let s = average_potential(&g, &[xs.iter().map(|x| (std::f64::consts::TAU * x).sin()).collect()]).unwrap();
        assert!(s.potential.a[0].abs() < 1e-13);
        let lin = average_potential(&g, &[xs.clone()]).unwrap();
        assert!((lin.potential.a[0] - 0.5).abs() < 1e-6);
        // chi(x) = x^2 / 2 - x / 2 for A = x
        for (x, c) in xs.iter().zip(&lin.chi[0]) {
            assert!((c - (x * x - x) / 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn simplicity_examples() {
        let b3 = catalog::bouquet(3);
        assert!(is_simple(&EdgePotential::from_a(vec![0.3, -1.0, 2.5]), &b3).simple);
        let g1 = catalog::g1();
        assert!(!is_simple(&EdgePotential::from_a(vec![0.0, 0.5, 0.0]), &g1).simple);
        assert!(is_simple(&EdgePotential::from_a(vec![1.0, 0.0, -2.0]), &g1).simple);
        let g2 = catalog::g2();
        assert!(!is_simple(&EdgePotential::from_a(vec![1.0, 0.0, 0.0, 0.5, 0.0, 0.0]), &g2).simple);
    }

    #[test]
    fn subspace_dimensions() {
        assert_eq!(simple_subspace(&catalog::loop_graph(1.0)).len(), 1);
        for n in 1..5 {
            assert_eq!(simple_subspace(&catalog::bouquet(n)).len(), n);
        }
        assert_eq!(simple_subspace(&catalog::g1()).len(), 2);
        // rank of the 4x6 constraint matrix is 3 (rows are dependent)
        assert_eq!(simple_subspace(&catalog::g2()).len(), 3);
        for u in simple_subspace(&catalog::g2()) {
            assert!((u[0] - u[3]).abs() < 1e-14);
        }
        for g in [catalog::g1(), catalog::g2()] {
            let basis = simple_subspace(&g);
            for (i, u) in basis.iter().enumerate() {
                assert!(is_simple(&EdgePotential::from_a(u.clone()), &g).simple);
                for (j, w) in basis.iter().enumerate() {
                    let d: f64 = u.iter().zip(w).map(|(x, y)| x * y).sum();
                    assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }
}
