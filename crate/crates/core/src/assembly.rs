//! Piecewise-linear finite elements for magnetic Laplacians with δ-type vertex
//! conditions, the position operator, eigensolvers and reference spectra.
//!
//! Each edge carries a uniform mesh; vertex nodes are shared degrees of freedom
//! so continuity holds by construction, and the δ coupling enters through the
//! quadratic form `sum_v deg(v) tan(delta/2) |psi(v)|^2`.
//!
//! The magnetic form `int |psi' - i A psi|^2` splits as
//! `K_A = K_0 + sum_e A_e C_e + sum_e A_e^2 M_e` with the element matrices
//! `C = [[0, i], [-i, 0]]` (row index is the test function).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extensions::{delta_type_conditions, quasi_delta_conditions};
use crate::gauge::{to_magnetic_frame, EdgePotential, GaugePhase};
use crate::graph::{GridFunction, MetricGraph};
use crate::linalg::{
    fix_phase, generalized_eigen, hermitian_eigen, hermitian_part, C64, CMat, CVec, ONE, ZERO,
};
use crate::sparse::{Csr, EnvelopeLdl};

/// Degree-of-freedom numbering: one per non-isolated vertex, then the
/// interior nodes of each edge in edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    vertex_dof: Vec<Option<usize>>,
    edge_offset: Vec<usize>,
    elements: Vec<usize>,
    ends: Vec<(usize, usize)>,
    total: usize,
}

impl DofLayout {
    pub fn new(g: &MetricGraph, elements: &[usize]) -> Result<Self> {
        if elements.len() != g.edge_count() {
            return Err(Error::GridMismatch(format!(
                "{} grid sizes for {} edges",
                elements.len(),
                g.edge_count()
            )));
        }
        if let Some(e) = elements.iter().position(|&n| n < 2) {
            return Err(Error::InvalidParameter(format!(
                "edge {:?} has {} elements (need at least 2)",
                g.edges()[e].id,
                elements[e]
            )));
        }
        let mut vertex_dof = vec![None; g.vertex_count()];
        let mut next = 0;
        for (v, slot) in vertex_dof.iter_mut().enumerate() {
            if g.degree(v) > 0 {
                *slot = Some(next);
                next += 1;
            }
        }
        let mut edge_offset = Vec::with_capacity(elements.len());
        for &n in elements {
            edge_offset.push(next);
            next += n - 1;
        }
        let ends = (0..g.edge_count()).map(|e| g.endpoints(e)).collect();
        Ok(DofLayout { vertex_dof, edge_offset, elements: elements.to_vec(), ends, total: next })
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    /// DOF of node `j` (0..=n) on edge `e`.
    pub fn node_dof(&self, e: usize, j: usize) -> usize {
        let n = self.elements[e];
        if j == 0 {
            self.vertex_dof[self.ends[e].0].unwrap()
        } else if j == n {
            self.vertex_dof[self.ends[e].1].unwrap()
        } else {
            self.edge_offset[e] + j - 1
        }
    }
}

/// Grid sizes giving roughly `per_unit` elements per unit length (at least 2).
pub fn uniform_elements(g: &MetricGraph, per_unit: usize) -> Vec<usize> {
    g.edges()
        .iter()
        .map(|e| ((e.length * per_unit as f64).round() as usize).max(2))
        .collect()
}

/// Finite element matrices of one graph and grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub graph: MetricGraph,
    pub delta: f64,
    pub layout: DofLayout,
    /// Default potential supplied at assembly.
    pub potential: EdgePotential,
    pub beta: Vec<f64>,
    pub mass: Csr,
    /// Kinetic form including the vertex δ term.
    pub k0: Csr,
    /// The vertex δ term alone (diagonal).
    pub vertex_term: Csr,
    /// A-linear part per edge.
    pub coupling: Vec<Csr>,
    /// A-quadratic part per edge (the edge's mass block).
    pub edge_mass: Vec<Csr>,
    /// `int x_e psi^* phi` per edge.
    pub edge_position: Vec<Csr>,
    /// `sum_e beta_e int x_e psi^* phi`.
    pub x_beta: Csr,
}

pub fn assemble(
    g: &MetricGraph,
    delta: f64,
    a: &EdgePotential,
    beta: &[f64],
    elements: &[usize],
) -> Result<DiscreteOperator> {
    if !delta.is_finite() || delta.abs() >= PI {
        return Err(Error::InvalidParameter(format!("delta = {delta} is outside (-pi, pi)")));
    }
    a.check(g)?;
    if beta.len() != g.edge_count() {
        return Err(Error::DimensionMismatch { expected: g.edge_count(), found: beta.len() });
    }
    let layout = DofLayout::new(g, elements)?;
    let n = layout.dim();
    let mut mass = Vec::new();
    let mut stiff = Vec::new();
    let mut coupling = Vec::with_capacity(g.edge_count());
    let mut edge_mass = Vec::with_capacity(g.edge_count());
    let mut edge_position = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let ne = elements[e];
        let h = g.length(e) / ne as f64;
        let mut c_e = Vec::new();
        let mut m_e = Vec::new();
        let mut x_e = Vec::new();
        for j in 0..ne {
            let dofs = [layout.node_dof(e, j), layout.node_dof(e, j + 1)];
            let xa = j as f64 * h;
            let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
            let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
            let ce = [[ZERO, C64::new(0.0, 1.0)], [C64::new(0.0, -1.0), ZERO]];
            let xe = [
                [h * (xa / 3.0 + h / 12.0), h * (xa / 6.0 + h / 12.0)],
                [h * (xa / 6.0 + h / 12.0), h * (xa / 3.0 + h / 4.0)],
            ];
            for p in 0..2 {
                for q in 0..2 {
                    let (r, c) = (dofs[p], dofs[q]);
                    mass.push((r, c, C64::new(me[p][q], 0.0)));
                    m_e.push((r, c, C64::new(me[p][q], 0.0)));
                    stiff.push((r, c, C64::new(ke[p][q], 0.0)));
                    c_e.push((r, c, ce[p][q]));
                    x_e.push((r, c, C64::new(xe[p][q], 0.0)));
                }
            }
        }
        coupling.push(Csr::from_triplets(n, c_e));
        edge_mass.push(Csr::from_triplets(n, m_e));
        edge_position.push(Csr::from_triplets(n, x_e));
    }
    let t = (delta / 2.0).tan();
    let vertex_entries: Vec<_> = (0..g.vertex_count())
        .filter_map(|v| layout.vertex_dof(v).map(|d| (d, d, C64::new(g.degree(v) as f64 * t, 0.0))))
        .filter(|e| e.2 != ZERO)
        .collect();
    let vertex_term = Csr::from_triplets(n, vertex_entries.clone());
    stiff.extend(vertex_entries);
    let x_terms: Vec<(C64, &Csr)> =
        beta.iter().zip(&edge_position).map(|(&b, x)| (C64::new(b, 0.0), x)).collect();
    let x_beta = if x_terms.is_empty() { Csr::zeros(n) } else { Csr::combine(&x_terms) };
    Ok(DiscreteOperator {
        graph: g.clone(),
        delta,
        layout,
        potential: a.clone(),
        beta: beta.to_vec(),
        mass: Csr::from_triplets(n, mass),
        k0: Csr::from_triplets(n, stiff),
        vertex_term,
        coupling,
        edge_mass,
        edge_position,
        x_beta,
    })
}

/// Discretise the quasi-δ Laplacian whose vertex phases are the slot values
/// of `chi` through its gauge realisation: `e^{i chi}` maps it to the
/// magnetic δ-type operator with `A = chi'`, which is what gets assembled. The
/// mapped conditions are checked against the δ-type ones first.
pub fn assemble_quasi_delta(
    g: &MetricGraph,
    delta: f64,
    chi: &GaugePhase,
    elements: &[usize],
) -> Result<(DiscreteOperator, EdgePotential)> {
    let quasi = quasi_delta_conditions(g, delta, &chi.slot_phases(g))?;
    let mapped = to_magnetic_frame(&quasi, chi, g)?.matrix();
    let plain = delta_type_conditions(g, delta)?.matrix();
    let dev = (&mapped - &plain).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(Error::InvalidConditions(format!("gauge does not map to δ-type conditions (deviation {dev:.3e})")));
    }
    let a = chi.potential();
    let beta = vec![0.0; g.edge_count()];
    Ok((assemble(g, delta, &a, &beta, elements)?, a))
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `K_0 + sum_e A_e C_e + sum_e A_e^2 M_e`.
    pub fn magnetic_stiffness(&self, a: &[f64]) -> Csr {
        let mut terms: Vec<(C64, &Csr)> = vec![(ONE, &self.k0)];
        for (e, &ae) in a.iter().enumerate() {
            if ae != 0.0 {
                terms.push((C64::new(ae, 0.0), &self.coupling[e]));
                terms.push((C64::new(ae * ae, 0.0), &self.edge_mass[e]));
            }
        }
        Csr::combine(&terms)
    }

    /// Kinetic form without the vertex term.
    pub fn k0_bare(&self) -> Csr {
        Csr::combine(&[(ONE, &self.k0), (-ONE, &self.vertex_term)])
    }

    /// `sum_e w_e X_e` for arbitrary edge weights.
    pub fn position(&self, weights: &[f64]) -> Csr {
        let terms: Vec<(C64, &Csr)> =
            weights.iter().zip(&self.edge_position).map(|(&b, x)| (C64::new(b, 0.0), x)).collect();
        Csr::combine(&terms)
    }

    /// Nodal values of a DOF vector as a grid function.
    pub fn grid_function(&self, v: &CVec) -> GridFunction {
        let values = (0..self.graph.edge_count())
            .map(|e| (0..=self.layout.elements[e]).map(|j| v[self.layout.node_dof(e, j)]).collect())
            .collect();
        GridFunction { values }
    }

    /// Sample `f(edge, x)` at the nodes. Shared vertex nodes take the value of
    /// the first incident edge-end in slot order.
    pub fn interpolate(&self, f: impl Fn(usize, f64) -> C64) -> CVec {
        let mut v = CVec::zeros(self.dim());
        let mut seen = vec![false; self.dim()];
        for s in self.graph.slots().slots() {
            let e = s.edge;
            let (j, x) = match s.end {
                crate::graph::End::Minus => (0, 0.0),
                crate::graph::End::Plus => (self.layout.elements[e], self.graph.length(e)),
            };
            let d = self.layout.node_dof(e, j);
            if !seen[d] {
                v[d] = f(e, x);
                seen[d] = true;
            }
        }
        for e in 0..self.graph.edge_count() {
            let ne = self.layout.elements[e];
            let h = self.graph.length(e) / ne as f64;
            for j in 1..ne {
                v[self.layout.node_dof(e, j)] = f(e, j as f64 * h);
            }
        }
        v
    }
}

/// Eigenpairs of `K_A phi = lambda M phi`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors, one per column.
    pub vectors: CMat,
    /// Normwise backward error `|K phi - lambda M phi| / ((|K| + |lambda| |M|) |phi|)`.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Problems with fewer DOFs use the dense solver.
    pub dense_cutover: usize,
    /// Relative change of the Ritz values between sweeps at which the
    /// iterative solver stops.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { dense_cutover: 400, tol: 1e-11, max_iter: 2000 }
    }
}

pub fn eigensolve(op: &DiscreteOperator, a: &EdgePotential, count: usize) -> Result<EigenSystem> {
    eigensolve_with(op, a, count, &SolverOptions::default())
}

pub fn eigensolve_with(
    op: &DiscreteOperator,
    a: &EdgePotential,
    count: usize,
    opts: &SolverOptions,
) -> Result<EigenSystem> {
    a.check(&op.graph)?;
    let n = op.dim();
    if count > n {
        return Err(Error::InvalidParameter(format!("requested {count} eigenpairs of a {n}-dimensional problem")));
    }
    let k = op.magnetic_stiffness(&a.a);
    let (values, mut vectors) = if n < opts.dense_cutover {
        let (vals, vecs) = generalized_eigen(&k.to_dense(), &op.mass.to_dense())?;
        (vals[..count].to_vec(), vecs.columns(0, count).into_owned())
    } else {
        subspace_iteration(&k, &op.mass, count, opts)?
    };
    for j in 0..count {
        let mut col: Vec<C64> = vectors.column(j).iter().cloned().collect();
        fix_phase(&mut col);
        vectors.set_column(j, &CVec::from_vec(col));
    }
    let residuals = residuals(&k, &op.mass, &values, &vectors);
    Ok(EigenSystem { values, vectors, residuals })
}

fn residuals(k: &Csr, m: &Csr, values: &[f64], vectors: &CMat) -> Vec<f64> {
    let (kn, mn) = (row_sum_norm(k), row_sum_norm(m));
    values
        .iter()
        .enumerate()
        .map(|(j, &lam)| backward_error(k, m, kn, mn, lam, &vectors.column(j).into_owned()))
        .collect()
}

fn row_sum_norm(a: &Csr) -> f64 {
    (0..a.dim()).map(|i| a.row(i).map(|(_, z)| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `|K v - lambda M v| / ((|K| + |lambda| |M|) |v|)`, all infinity norms.
fn backward_error(k: &Csr, m: &Csr, kn: f64, mn: f64, lam: f64, v: &CVec) -> f64 {
    let r = k.mul_vec(v) - m.mul_vec(v) * C64::new(lam, 0.0);
    let inf = |x: &CVec| x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    inf(&r) / ((kn + lam.abs() * mn) * inf(v)).max(1e-300)
}

/// M-orthonormalise columns by modified Gram-Schmidt (two passes).
fn m_orthonormalize(y: &mut CMat, m: &Csr) {
    for j in 0..y.ncols() {
        for _ in 0..2 {
            let mv = m.mul_vec(&y.column(j).into_owned());
            for i in 0..j {
                let qi = y.column(i).into_owned();
                let c = qi.dotc(&mv);
                let mut col = y.column_mut(j);
                col -= qi * c;
            }
        }
        let v = y.column(j).into_owned();
        let nrm = v.dotc(&m.mul_vec(&v)).re.max(1e-300).sqrt();
        let mut col = y.column_mut(j);
        col /= C64::new(nrm, 0.0);
    }
}

/// Backward error every returned Ritz pair must reach.
const BACKWARD_TOL: f64 = 1e-10;

/// Shift-invert subspace iteration with Rayleigh-Ritz for the lowest
/// eigenpairs. The shift is lowered until `K - sigma M` is positive definite.
fn subspace_iteration(k: &Csr, m: &Csr, count: usize, opts: &SolverOptions) -> Result<(Vec<f64>, CMat)> {
    let n = k.dim();
    let p = (2 * count).max(count + 8).min(n);
    let mut sigma = -1.0;
    let factor = loop {
        let shifted = Csr::combine(&[(ONE, k), (C64::new(-sigma, 0.0), m)]);
        match EnvelopeLdl::factor(&shifted) {
            Ok(f) if f.negative_pivots() == 0 => break f,
            _ => {
                sigma = 4.0 * sigma - 1.0;
                if sigma < -1e12 {
                    return Err(Error::Factorization("no positive definite shift found".into()));
                }
            }
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = CMat::from_fn(n, p, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m_orthonormalize(&mut x, m);
    let (kn, mn) = (row_sum_norm(k), row_sum_norm(m));
    let mut previous: Option<Vec<f64>> = None;
    for _ in 0..opts.max_iter {
        let mut y = factor.solve_mat(&m.mul_mat(&x));
        m_orthonormalize(&mut y, m);
        let ky = k.mul_mat(&y);
        let reduced = hermitian_part(&(y.adjoint() * &ky));
        let (values, w) = hermitian_eigen(&reduced);
        x = &y * &w;
        let settled = previous.as_ref().is_some_and(|old| {
            (0..count).all(|j| (values[j] - old[j]).abs() <= opts.tol * (values[j].abs() + 1.0))
        });
        if settled
            && (0..count).all(|j| backward_error(k, m, kn, mn, values[j], &x.column(j).into_owned()) < BACKWARD_TOL)
        {
            return Ok((values[..count].to_vec(), x.columns(0, count).into_owned()));
        }
        previous = Some(values);
    }
    Err(Error::Factorization(format!("subspace iteration did not converge in {} sweeps", opts.max_iter)))
}

/// Analytic spectra used as oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    /// Neumann interval `[0, length]`.
    IntervalNeumann { length: f64 },
    /// Loop with `psi(l) = e^{-i alpha} psi(0)` and the same for `psi'`.
    LoopQuasiperiodic { length: f64, alpha: f64 },
}

/// 2x2 edge-matching matrix of the plane-wave ansatz at wave number `k > 0`.
fn matching_matrix(kind: ReferenceKind, k: f64) -> [[C64; 2]; 2] {
    let ik = C64::new(0.0, k);
    match kind {
        ReferenceKind::IntervalNeumann { length } => {
            // psi = c1 cos kx + c2 sin kx; psi'(0) = 0, psi'(l) = 0
            [
                [ZERO, C64::new(k, 0.0)],
                [C64::new(-k * (k * length).sin(), 0.0), C64::new(k * (k * length).cos(), 0.0)],
            ]
        }
        ReferenceKind::LoopQuasiperiodic { length, alpha } => {
            // psi = c1 e^{ikx} + c2 e^{-ikx}
            let w = C64::from_polar(1.0, -alpha);
            let p = C64::from_polar(1.0, k * length);
            let q = C64::from_polar(1.0, -k * length);
            [[p - w, q - w], [ik * (p - w), -ik * (q - w)]]
        }
    }
}

fn det2(m: &[[C64; 2]; 2]) -> C64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Real secular function whose zeros in `k > 0` are the eigenvalues `k^2`.
fn secular(kind: ReferenceKind, k: f64) -> f64 {
    let d = det2(&matching_matrix(kind, k));
    match kind {
        // det = k^2 sin(kl)
        ReferenceKind::IntervalNeumann { .. } => d.re / (k * k),
        // det = -2 i k (p - w)(q - w) = -4 i k w (cos alpha - cos kl)
        ReferenceKind::LoopQuasiperiodic { alpha, .. } => {
            let w = C64::from_polar(1.0, -alpha);
            (d / (C64::new(0.0, 4.0 * k) * w)).re
        }
    }
}

fn nullity(m: &[[C64; 2]; 2], scale: f64) -> usize {
    let a = nalgebra::Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]);
    a.singular_values().iter().filter(|&&s| s <= 1e-7 * scale).count()
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues by root finding on the edge-matching determinant, with
/// multiplicities from the nullity of the matching matrix.
pub fn reference_spectrum(kind: ReferenceKind, count: usize) -> Vec<f64> {
    let length = match kind {
        ReferenceKind::IntervalNeumann { length } => length,
        ReferenceKind::LoopQuasiperiodic { length, .. } => length,
    };
    let mut out = Vec::new();
    // k = 0: constants (and linear functions, which never satisfy these conditions)
    let zero_mode = match kind {
        ReferenceKind::IntervalNeumann { .. } => true,
        ReferenceKind::LoopQuasiperiodic { alpha, .. } => (C64::from_polar(1.0, -alpha) - ONE).norm() < 1e-12,
    };
    if zero_mode {
        out.push(0.0);
    }
    let f = |k: f64| secular(kind, k);
    let df = |k: f64| (f(k * (1.0 + 1e-7) + 1e-9) - f(k * (1.0 - 1e-7) - 1e-9)) / (2e-7 * k + 2e-9);
    let step = PI / (16.0 * length);
    let mut k0 = 1e-9;
    while out.len() < count {
        let k1 = k0 + step;
        let (f0, f1) = (f(k0), f(k1));
        let mut roots = Vec::new();
        if (f0 > 0.0) != (f1 > 0.0) {
            roots.push(bisect(f, k0, k1));
        } else {
            // tangential zero: locate the extremum between samples
            let (d0, d1) = (df(k0), df(k1));
            if (d0 > 0.0) != (d1 > 0.0) {
                let kc = bisect(df, k0, k1);
                if f(kc).abs() < 1e-9 {
                    roots.push(kc);
                }
            }
        }
        for r in roots {
            let m = nullity(&matching_matrix(kind, r), 1.0 + r);
            for _ in 0..m.max(1) {
                out.push(r * r);
            }
        }
        k0 = k1;
    }
    out.truncate(count);
    out
}

/// Closed forms `(n pi / l)^2` and `((2 pi n - alpha) / l)^2`.
pub fn closed_form_spectrum(kind: ReferenceKind, count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = match kind {
        ReferenceKind::IntervalNeumann { length } => {
            (0..count).map(|n| (n as f64 * PI / length).powi(2)).collect()
        }
        ReferenceKind::LoopQuasiperiodic { length, alpha } => {
            let r = count as i64 + 2;
            (-r..=r).map(|n| ((2.0 * PI * n as f64 - alpha) / length).powi(2)).collect()
        }
    };
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

/// Empirical constant `sup |K_0' psi|_{M^-1} / (|K_A psi|_{M^-1} + |psi|_M)` over
/// seeded random trials; `K_0'` is the kinetic form without the vertex term.
/// Trial `i` depends only on `(seed, i)`, so more trials never lower the result.
pub fn elliptic_constant_probe(op: &DiscreteOperator, a: &EdgePotential, trials: usize, seed: u64) -> Result<f64> {
    a.check(&op.graph)?;
    let bare = op.k0_bare();
    let ka = op.magnetic_stiffness(&a.a);
    let mfac = EnvelopeLdl::factor(&op.mass)?;
    let smooth = EnvelopeLdl::factor(&Csr::combine(&[(ONE, &bare), (ONE, &op.mass)]))?;
    let dual = |v: &CVec| v.dotc(&mfac.solve(v)).re.max(0.0).sqrt();
    let n = op.dim();
    let mut best = 0.0f64;
    for i in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut psi = CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        for _ in 0..(i % 4) {
            psi = smooth.solve(&op.mass.mul_vec(&psi));
        }
        let mnorm = psi.dotc(&op.mass.mul_vec(&psi)).re.max(0.0).sqrt();
        let ratio = dual(&bare.mul_vec(&psi)) / (dual(&ka.mul_vec(&psi)) + mnorm);
        best = best.max(ratio);
    }
    Ok(best)
}
