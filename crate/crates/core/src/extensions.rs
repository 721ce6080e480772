//! Self-adjoint vertex conditions `psi - i psi_dot = U (psi + i psi_dot)`.

use std::f64::consts::PI;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::graph::{BoundaryTrace, MetricGraph};
use crate::linalg::{cis, hermitian_eigen, hermitian_part, unitary_defect, C64, CMat, CVec, I, ONE};

/// Unitarity tolerance enforced at construction.
pub const UNITARY_TOL: f64 = 1e-12;
/// Eigenvalues within this distance of ±1 are assigned to P₁ / P₋₁.
pub const CLUSTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Form {
    Global(CMat),
    Local(Vec<CMat>),
}

/// Vertex conditions on the total vertex space, either one global unitary or
/// one unitary per vertex acting on that vertex's slots.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexConditions {
    form: Form,
    ranges: Vec<Range<usize>>,
    dim: usize,
}

impl VertexConditions {
    pub fn global(u: CMat, g: &MetricGraph) -> Result<Self> {
        let n = g.slot_count();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
        }
        let d = unitary_defect(&u);
        if d > UNITARY_TOL {
            return Err(Error::NotUnitary(d));
        }
        Ok(VertexConditions { form: Form::Global(u), ranges: ranges(g), dim: n })
    }

    pub fn local(blocks: Vec<CMat>, g: &MetricGraph) -> Result<Self> {
        if blocks.len() != g.vertex_count() {
            return Err(Error::DimensionMismatch { expected: g.vertex_count(), found: blocks.len() });
        }
        for (v, b) in blocks.iter().enumerate() {
            let d = g.degree(v);
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: b.nrows() });
            }
            let defect = unitary_defect(b);
            if defect > UNITARY_TOL {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(VertexConditions { form: Form::Local(blocks), ranges: ranges(g), dim: g.slot_count() })
    }

    pub fn is_local(&self) -> bool {
        matches!(self.form, Form::Local(_))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Per-vertex block, if local.
    pub fn block(&self, v: usize) -> Option<&CMat> {
        match &self.form {
            Form::Local(b) => b.get(v),
            Form::Global(_) => None,
        }
    }

    pub fn blocks(&self) -> Option<&[CMat]> {
        match &self.form {
            Form::Local(b) => Some(b),
            Form::Global(_) => None,
        }
    }

    pub fn vertex_range(&self, v: usize) -> Range<usize> {
        self.ranges[v].clone()
    }

    /// Full `2|E| x 2|E|` unitary; local blocks are embedded block-diagonally.
    pub fn matrix(&self) -> CMat {
        match &self.form {
            Form::Global(u) => u.clone(),
            Form::Local(blocks) => {
                let mut u = CMat::zeros(self.dim, self.dim);
                for (b, r) in blocks.iter().zip(&self.ranges) {
                    u.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(b);
                }
                u
            }
        }
    }

    /// Apply `f` to every local block, keeping the slot layout.
    pub(crate) fn map_blocks(&self, f: impl Fn(usize, &CMat) -> CMat) -> Result<Self> {
        match &self.form {
            Form::Local(blocks) => {
                let out: Vec<CMat> = blocks.iter().enumerate().map(|(v, b)| f(v, b)).collect();
                for b in &out {
                    let d = unitary_defect(b);
                    if d > UNITARY_TOL {
                        return Err(Error::NotUnitary(d));
                    }
                }
                Ok(VertexConditions { form: Form::Local(out), ranges: self.ranges.clone(), dim: self.dim })
            }
            Form::Global(_) => Err(Error::InvalidConditions("operation requires local conditions".into())),
        }
    }
}

fn ranges(g: &MetricGraph) -> Vec<Range<usize>> {
    (0..g.vertex_count()).map(|v| g.slots().vertex_range(v)).collect()
}

fn check_delta(delta: f64) -> Result<()> {
    if !delta.is_finite() || delta.abs() >= PI {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} is outside (-pi, pi); the Dirichlet limit is not a delta-type condition"
        )));
    }
    Ok(())
}

/// `e^{i delta} P + (-1)(I - P)` for the rank-one projector `P = w w^H / |w|^2`.
fn rank_one_block(w: &CVec, delta: f64) -> CMat {
    let d = w.len();
    let p = (w * w.adjoint()) / C64::new(w.norm_squared(), 0.0);
    p * (cis(delta) + ONE) - CMat::identity(d, d)
}

/// δ-type conditions: continuity plus `sum psi_dot = -deg tan(delta/2) psi(v)`.
pub fn delta_type_conditions(g: &MetricGraph, delta: f64) -> Result<VertexConditions> {
    check_delta(delta)?;
    let blocks = (0..g.vertex_count())
        .map(|v| rank_one_block(&CVec::from_element(g.degree(v), ONE), delta))
        .collect();
    VertexConditions::local(blocks, g)
}

/// Quasi-δ conditions: the rank-one projector is built on `e^{-i chi}(v)`.
///
/// `chi` holds one phase per slot; the first slot of each vertex is the
/// reference edge-end and must carry phase zero.
pub fn quasi_delta_conditions(g: &MetricGraph, delta: f64, chi: &[f64]) -> Result<VertexConditions> {
    check_delta(delta)?;
    if chi.len() != g.slot_count() {
        return Err(Error::DimensionMismatch { expected: g.slot_count(), found: chi.len() });
    }
    let mut blocks = Vec::with_capacity(g.vertex_count());
    for v in 0..g.vertex_count() {
        let r = g.slots().vertex_range(v);
        if let Some(&c0) = chi.get(r.start).filter(|_| !r.is_empty()) {
            if c0 != 0.0 {
                return Err(Error::InvalidConditions(format!(
                    "reference phase at vertex {:?} is {c0}, expected 0",
                    g.vertices()[v]
                )));
            }
        }
        if chi[r.clone()].iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConditions("non-finite phase".into()));
        }
        let w = CVec::from_iterator(r.len(), chi[r].iter().map(|&c| cis(-c)));
        blocks.push(rank_one_block(&w, delta));
    }
    VertexConditions::local(blocks, g)
}

/// Spectral projectors of a vertex unitary and its Robin part.
#[derive(Debug, Clone)]
pub struct ProjectorTriple {
    /// Projector onto the eigenvalue -1 eigenspace (Dirichlet part).
    pub p_minus: CMat,
    /// Projector onto the eigenvalue +1 eigenspace (Neumann part).
    pub p_plus: CMat,
    /// `I - P₁ - P₋₁`.
    pub p_perp: CMat,
    /// `-i (I + U)⊥^{-1} (I - U)` on the range of `p_perp`, zero elsewhere.
    pub robin: CMat,
}

impl ProjectorTriple {
    /// Rebuild the unitary: `P₁ - P₋₁ + (P⊥ - iL)(P⊥ + iL)^{-1}` on `P⊥`.
    pub fn reconstruct(&self) -> CMat {
        let n = self.p_perp.nrows();
        let id = CMat::identity(n, n);
        let a = &self.p_perp - &self.robin * I;
        let b = &self.p_perp + &self.robin * I + (&id - &self.p_perp);
        let b_inv = b.try_inverse().expect("Cayley denominator is invertible");
        &self.p_plus - &self.p_minus + a * b_inv * &self.p_perp
    }
}

/// Eigen-decomposition of a normal matrix through a Hermitian combination of
/// its real and imaginary parts; returns (eigenvalues, orthonormal vectors).
fn normal_eigen(u: &CMat) -> (Vec<C64>, CMat) {
    let x = hermitian_part(u);
    let y = (u - u.adjoint()) * C64::new(0.0, -0.5);
    let mut best: Option<(f64, Vec<C64>, CMat)> = None;
    for &c in &[0.5772156649015329, 1.6180339887498949, 0.3183098861837907, 2.718281828459045] {
        let h = &x + &y * C64::new(c, 0.0);
        let (_, v) = hermitian_eigen(&h);
        let mut mus = Vec::with_capacity(v.ncols());
        let mut worst = 0.0f64;
        for j in 0..v.ncols() {
            let col = v.column(j).into_owned();
            let uv = u * &col;
            let mu = col.dotc(&uv);
            worst = worst.max((uv - &col * mu).norm());
            mus.push(mu);
        }
        let better = best.as_ref().map(|b| worst < b.0).unwrap_or(true);
        if better {
            best = Some((worst, mus, v));
        }
        if worst < 1e-13 {
            break;
        }
    }
    let (_, mus, v) = best.unwrap();
    (mus, v)
}

pub fn decompose_matrix(u: &CMat) -> ProjectorTriple {
    let n = u.nrows();
    let (mus, v) = normal_eigen(u);
    let mut p_plus = CMat::zeros(n, n);
    let mut p_minus = CMat::zeros(n, n);
    let mut p_perp = CMat::zeros(n, n);
    for (j, mu) in mus.iter().enumerate() {
        let col = v.column(j).into_owned();
        let proj = &col * col.adjoint();
        if (mu - ONE).norm() <= CLUSTER_TOL {
            p_plus += proj;
        } else if (mu + ONE).norm() <= CLUSTER_TOL {
            p_minus += proj;
        } else {
            p_perp += proj;
        }
    }
    let p_plus = hermitian_part(&p_plus);
    let p_minus = hermitian_part(&p_minus);
    let p_perp = hermitian_part(&p_perp);
    let id = CMat::identity(n, n);
    let plus_part = &p_perp * (&id + u) * &p_perp + (&id - &p_perp);
    let minus_part = &p_perp * (&id - u) * &p_perp;
    let robin = match plus_part.try_inverse() {
        Some(inv) => hermitian_part(&(&p_perp * (inv * minus_part) * &p_perp * C64::new(0.0, -1.0))),
        None => CMat::zeros(n, n),
    };
    ProjectorTriple { p_minus, p_plus, p_perp, robin }
}

/// Projector decomposition; local conditions are decomposed vertex by vertex.
pub fn decompose(u: &VertexConditions) -> ProjectorTriple {
    match u.blocks() {
        None => decompose_matrix(&u.matrix()),
        Some(blocks) => {
            let n = u.dim();
            let mut out = ProjectorTriple {
                p_minus: CMat::zeros(n, n),
                p_plus: CMat::zeros(n, n),
                p_perp: CMat::zeros(n, n),
                robin: CMat::zeros(n, n),
            };
            for (v, b) in blocks.iter().enumerate() {
                let r = u.vertex_range(v);
                if r.is_empty() {
                    continue;
                }
                let t = decompose_matrix(b);
                let (s, d) = (r.start, r.len());
                out.p_minus.view_mut((s, s), (d, d)).copy_from(&t.p_minus);
                out.p_plus.view_mut((s, s), (d, d)).copy_from(&t.p_plus);
                out.p_perp.view_mut((s, s), (d, d)).copy_from(&t.p_perp);
                out.robin.view_mut((s, s), (d, d)).copy_from(&t.robin);
            }
            out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub residual: f64,
}

/// Residual of `psi - i psi_dot = U (psi + i psi_dot)`; membership holds when
/// the residual is at most `tol (|psi| + |psi_dot| + 1)`.
pub fn check_membership(t: &BoundaryTrace, u: &VertexConditions, tol: f64) -> Result<Membership> {
    if t.values.len() != u.dim() || t.derivs.len() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: t.values.len() });
    }
    let plus = &t.values + &t.derivs * I;
    let minus = &t.values - &t.derivs * I;
    let residual = (minus - u.matrix() * plus).norm();
    let scale = t.values.norm() + t.derivs.norm() + 1.0;
    Ok(Membership { member: residual <= tol * scale, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;
    use crate::linalg::ZERO;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kirchhoff_on_degree_two_is_swap() {
        let g = catalog::loop_graph(1.0);
        let u = delta_type_conditions(&g, 0.0).unwrap().matrix();
        let swap = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert!((u - swap).norm() < 1e-15);
    }

    #[test]
    fn kirchhoff_on_degree_three() {
        let g = catalog::bouquet(3);
        let u = delta_type_conditions(&g, 0.0).unwrap().matrix();
        // bouquet B3 has degree 6; check the (2/deg) 1 - I formula there
        let want = CMat::from_element(6, 6, c(2.0 / 6.0, 0.0)) - CMat::identity(6, 6);
        assert!((u - want).norm() < 1e-15);
        let star = crate::graph::MetricGraph::new(
            vec!["c".into(), "a".into(), "b".into(), "d".into()],
            ["a", "b", "d"]
                .iter()
                .map(|l| crate::graph::Edge { id: format!("e{l}"), from: "c".into(), to: l.to_string(), length: 1.0 })
                .collect(),
        )
        .unwrap();
        let u = delta_type_conditions(&star, 0.0).unwrap();
        let cidx = star.vertex_index("c").unwrap();
        let want = CMat::from_element(3, 3, c(2.0 / 3.0, 0.0)) - CMat::identity(3, 3);
        assert!((u.block(cidx).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn delta_spectrum_is_one_phase_and_minus_ones() {
        for deg in 1..=5 {
            let w = CVec::from_element(deg, ONE);
            for &delta in &[0.0, 0.4, -1.2, 2.9] {
                let u = rank_one_block(&w, delta);
                let (mus, _) = normal_eigen(&u);
                let hits = mus.iter().filter(|m| (**m - cis(delta)).norm() < 1e-12).count();
                let minus = mus.iter().filter(|m| (**m + ONE).norm() < 1e-12).count();
                assert_eq!(hits, 1);
                assert_eq!(minus, deg - 1);
            }
        }
    }

    #[test]
    fn dirichlet_limit_rejected() {
        let g = catalog::loop_graph(1.0);
        assert!(delta_type_conditions(&g, PI).is_err());
        assert!(delta_type_conditions(&g, -PI).is_err());
    }

    #[test]
    fn quasi_delta_on_loop() {
        let g = catalog::loop_graph(1.0);
        let alpha = 0.7;
        let u = quasi_delta_conditions(&g, 0.0, &[0.0, alpha]).unwrap().matrix();
        let want = CMat::from_row_slice(2, 2, &[ZERO, cis(alpha), cis(-alpha), ZERO]);
        assert!((u - want).norm() < 1e-15);
        let zero = quasi_delta_conditions(&g, 0.3, &[0.0, 0.0]).unwrap();
        assert!((zero.matrix() - delta_type_conditions(&g, 0.3).unwrap().matrix()).norm() < 1e-15);
        let period = quasi_delta_conditions(&g, 0.0, &[0.0, 2.0 * PI]).unwrap();
        let base = quasi_delta_conditions(&g, 0.0, &[0.0, 0.0]).unwrap();
        assert!((period.matrix() - base.matrix()).norm() < 1e-14);
        assert!(matches!(quasi_delta_conditions(&g, 0.0, &[0.5, 0.0]), Err(Error::InvalidConditions(_))));
    }

    #[test]
    fn decompose_identity_and_minus_identity() {
        let g = catalog::loop_graph(1.0);
        let id = VertexConditions::global(CMat::identity(2, 2), &g).unwrap();
        let t = decompose(&id);
        assert!((t.p_plus - CMat::identity(2, 2)).norm() < 1e-14);
        assert!(t.p_minus.norm() < 1e-14 && t.p_perp.norm() < 1e-14);
        let mid = VertexConditions::global(-CMat::identity(2, 2), &g).unwrap();
        let t = decompose(&mid);
        assert!((t.p_minus - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn robin_value_for_quarter_turn() {
        let g = catalog::loop_graph(1.0);
        let delta = PI / 2.0;
        let u = delta_type_conditions(&g, delta).unwrap();
        let t = decompose(&u);
        assert!((t.p_perp.trace().re - 1.0).abs() < 1e-12);
        let w = CVec::from_element(2, c(1.0 / 2f64.sqrt(), 0.0));
        let lw = &t.robin * &w;
        // -i (1 + e^{i delta})^{-1} (1 - e^{i delta}) = -tan(delta / 2)
        assert!((lw - &w * c(-(delta / 2.0).tan(), 0.0)).norm() < 1e-12);
        assert!((t.reconstruct() - u.matrix()).norm() < 1e-12);
    }

    #[test]
    fn membership_of_zero_and_kirchhoff_traces() {
        let g = catalog::loop_graph(1.0);
        let u = delta_type_conditions(&g, 0.0).unwrap();
        let zero = BoundaryTrace::zeros(2);
        let m = check_membership(&zero, &u, 1e-12).unwrap();
        assert!(m.member && m.residual == 0.0);
        let ok = BoundaryTrace {
            values: CVec::from_vec(vec![c(0.3, 0.1), c(0.3, 0.1)]),
            derivs: CVec::from_vec(vec![c(1.5, -2.0), c(-1.5, 2.0)]),
        };
        assert!(check_membership(&ok, &u, 1e-12).unwrap().member);
    }

    #[test]
    fn membership_detects_violation() {
        let g = catalog::loop_graph(1.0);
        let delta = 0.6;
        let u = delta_type_conditions(&g, delta).unwrap();
        let psi = c(0.8, -0.2);
        let k = -2.0 * (delta / 2.0).tan();
        let good = BoundaryTrace {
            values: CVec::from_vec(vec![psi, psi]),
            derivs: CVec::from_vec(vec![psi * 0.5 * k + 0.7, psi * 0.5 * k - 0.7]),
        };
        assert!(check_membership(&good, &u, 1e-12).unwrap().member);
        let mut bad = good.clone();
        bad.derivs[0] += 0.1;
        let m = check_membership(&bad, &u, 1e-12).unwrap();
        assert!(!m.member);
        // direct application: residual = |(-i e) - U (i e)| for the slot-0 bump e
        let mut e = CVec::zeros(2);
        e[0] = c(0.1, 0.0);
        let direct = (&e * c(0.0, -1.0) - u.matrix() * (&e * I)).norm();
        assert!((m.residual - direct).abs() < 1e-14);
        assert!(m.residual >= 0.1);
    }

    #[test]
    fn non_unitary_rejected() {
        let g = catalog::loop_graph(1.0);
        let bad = CMat::identity(2, 2) * c(1.1, 0.0);
        assert!(matches!(VertexConditions::global(bad, &g), Err(Error::NotUnitary(_))));
    }
}
