//! Bilinear control systems `i psi' = (H_0 + u(t) H_1) psi` on a graph, their
//! Galerkin truncation, controllability diagnostics, pulse synthesis and the
//! boundary-control reconstruction.
//!
//! `H_0` is the magnetic δ-type operator with a simple edge-constant potential
//! `a`, and `H_1 = -beta x` is multiplication by `-beta_e x_e`. The Galerkin
//! frame is spanned by the lowest eigenfunctions of `H_0`, so `H_0` is
//! diagonal there and the frame is orthonormal.

pub mod boundary;
pub mod chambrion;
pub mod demo;
pub mod perturb;
pub mod relations;
pub mod synthesis;

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, eigensolve, uniform_elements, DiscreteOperator};
use crate::error::{Error, Result};
use crate::gauge::{is_simple, EdgePotential};
use crate::graph::MetricGraph;
use crate::linalg::{hermitian_part, C64, CMat, CVec, ONE};
use crate::propagation::{Coefficient, Term, TimeDependentHamiltonian};
use crate::sparse::Csr;

pub use perturb::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemOptions {
    /// Galerkin level `N`.
    pub levels: usize,
    /// Eigenpairs kept for the extended frame used by leakage monitoring and
    /// the full magnetic model; at least `levels`.
    pub frame_levels: usize,
    /// Elements per unit length of the coarsest of the three grids.
    pub elements_per_unit: usize,
    /// Extrapolate the energies from grids `n`, `2n`, `4n`; otherwise use the
    /// finest grid alone.
    pub richardson: bool,
}

impl Default for SystemOptions {
    fn default() -> Self {
        SystemOptions { levels: 8, frame_levels: 8, elements_per_unit: 256, richardson: true }
    }
}

/// Frame matrices of the magnetic form along `A = a + s beta`:
/// `K(s) = k0 + s k1 + s^2 k2`.
#[derive(Debug, Clone)]
pub struct MagneticExpansion {
    pub k0: CMat,
    pub k1: CMat,
    pub k2: CMat,
}

#[derive(Debug, Clone)]
pub struct BilinearSystem {
    pub graph: MetricGraph,
    pub delta: f64,
    pub potential: EdgePotential,
    pub beta: Vec<f64>,
    /// Control bound: admissible controls take values in `(0, c)`.
    pub c: f64,
    pub options: SystemOptions,
    /// Energies of the extended frame plus any perturbation shift. The first
    /// `levels` are extrapolated when requested, the rest come from the
    /// finest grid.
    pub energies: Vec<f64>,
    /// Galerkin `H_0`, `levels x levels`.
    pub h0: CMat,
    /// Galerkin `H_1 = -<phi_m, beta x phi_n>`, `levels x levels`.
    pub h1: CMat,
    /// `H_1` in the extended frame.
    pub frame_h1: CMat,
    /// M-orthonormal eigenvectors on the finest grid, one per column.
    pub modes: CMat,
    pub operator: DiscreteOperator,
    pub perturbation: Option<perturb::Perturbation>,
}

impl BilinearSystem {
    pub fn new(
        g: &MetricGraph,
        delta: f64,
        a: &EdgePotential,
        beta: &[f64],
        c: f64,
        options: SystemOptions,
    ) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("control bound c = {c} must be positive")));
        }
        if options.levels == 0 || options.frame_levels < options.levels || options.elements_per_unit == 0 {
            return Err(Error::InvalidParameter("need 1 <= levels <= frame_levels and a positive grid".into()));
        }
        a.check(g)?;
        let s = is_simple(a, g);
        if !s.simple {
            return Err(Error::NotSimple(s.residuals));
        }
        let sb = is_simple(&EdgePotential::from_a(beta.to_vec()), g);
        if !sb.simple {
            return Err(Error::NotSimple(sb.residuals));
        }
        let m = options.frame_levels;
        let per = options.elements_per_unit;
        let grids: Vec<usize> = if options.richardson { vec![per, 2 * per, 4 * per] } else { vec![per] };
        let n = options.levels;
        let mut coarse = Vec::new();
        let mut finest = None;
        for (i, &ne) in grids.iter().enumerate() {
            let op = assemble(g, delta, a, beta, &uniform_elements(g, ne))?;
            if i + 1 == grids.len() {
                finest = Some((op.clone(), eigensolve(&op, a, m)?));
            } else {
                coarse.push(eigensolve(&op, a, n)?.values);
            }
        }
        let fine = finest.as_ref().map(|f| f.1.values.clone()).expect("at least one grid");
        let mut energies = fine.clone();
        if options.richardson {
            // only the Galerkin levels: high frame modes are not resolved on
            // the coarse grids
            for i in 0..n {
                let r1 = (4.0 * coarse[1][i] - coarse[0][i]) / 3.0;
                let r2 = (4.0 * fine[i] - coarse[1][i]) / 3.0;
                energies[i] = (16.0 * r2 - r1) / 15.0;
            }
        }
        let (operator, es) = finest.expect("at least one grid");
        let modes = es.vectors;
        let frame_h1 = -project(&operator.x_beta, &modes);
        let h0 = CMat::from_diagonal(&CVec::from_iterator(n, energies[..n].iter().map(|&e| C64::new(e, 0.0))));
        let h1 = frame_h1.view((0, 0), (n, n)).into_owned();
        Ok(BilinearSystem {
            graph: g.clone(),
            delta,
            potential: a.clone(),
            beta: beta.to_vec(),
            c,
            options,
            energies,
            h0,
            h1,
            frame_h1,
            modes,
            operator,
            perturbation: None,
        })
    }

    pub fn levels(&self) -> usize {
        self.h0.nrows()
    }

    pub fn frame_levels(&self) -> usize {
        self.frame_h1.nrows()
    }

    /// Unit vector of level `k` in Galerkin coordinates of dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> CVec {
        let mut v = CVec::zeros(dim);
        v[k] = ONE;
        v
    }

    /// `H_0 + u(t) H_1` in the Galerkin frame.
    pub fn hamiltonian(&self, u: Coefficient, duration: f64) -> Result<TimeDependentHamiltonian> {
        TimeDependentHamiltonian::new(
            vec![Term::new(Coefficient::Constant(1.0), self.h0.clone()), Term::new(u, self.h1.clone())],
            None,
            (0.0, duration),
        )
    }

    /// The same system in the extended frame, with `diag(energies)` as `H_0`.
    pub fn frame_hamiltonian(&self, u: Coefficient, duration: f64) -> Result<TimeDependentHamiltonian> {
        let m = self.frame_levels();
        let h0 = CMat::from_diagonal(&CVec::from_iterator(m, self.energies.iter().map(|&e| C64::new(e, 0.0))));
        TimeDependentHamiltonian::new(
            vec![Term::new(Coefficient::Constant(1.0), h0), Term::new(u, self.frame_h1.clone())],
            None,
            (0.0, duration),
        )
    }

    /// Frame matrices of `K_{a + s beta}` on the finest grid:
    /// `k1 = sum_e beta_e (C_e + 2 a_e M_e)` and `k2 = sum_e beta_e^2 M_e`.
    pub fn magnetic_expansion(&self) -> MagneticExpansion {
        let op = &self.operator;
        let k0 = project(&op.magnetic_stiffness(&self.potential.a), &self.modes);
        let mut t1: Vec<(C64, &Csr)> = Vec::new();
        let mut t2: Vec<(C64, &Csr)> = Vec::new();
        for (e, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                t1.push((C64::new(b, 0.0), &op.coupling[e]));
                t1.push((C64::new(2.0 * b * self.potential.a[e], 0.0), &op.edge_mass[e]));
                t2.push((C64::new(b * b, 0.0), &op.edge_mass[e]));
            }
        }
        let m = self.frame_levels();
        let proj = |t: &[(C64, &Csr)]| if t.is_empty() { CMat::zeros(m, m) } else { project(&Csr::combine(t), &self.modes) };
        MagneticExpansion { k0, k1: proj(&t1), k2: proj(&t2) }
    }

    /// Map Galerkin coordinates to a finite element vector.
    pub fn to_dofs(&self, coeffs: &CVec) -> CVec {
        self.modes.columns(0, coeffs.len()) * coeffs
    }
}

/// `Phi^H A Phi`, symmetrised.
pub(crate) fn project(a: &Csr, phi: &CMat) -> CMat {
    hermitian_part(&(phi.adjoint() * a.mul_mat(phi)))
}

/// `|<target, psi>|^2`.
pub fn fidelity(psi: &CVec, target: &CVec) -> f64 {
    target.dotc(psi).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::catalog;

    #[test]
    fn loop_system_galerkin_structure() {
        let g = catalog::loop_graph(1.0);
        let opts = SystemOptions { levels: 4, frame_levels: 6, elements_per_unit: 64, richardson: true };
        let sys = BilinearSystem::new(&g, 0.0, &EdgePotential::from_a(vec![1.0]), &[1.0], 5.0, opts).unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        let want = [1.0, (tau - 1.0).powi(2), (tau + 1.0).powi(2), (2.0 * tau - 1.0).powi(2)];
        for (e, w) in sys.energies.iter().zip(want) {
            assert!((e - w).abs() < 1e-6 * w, "{e} vs {w}");
        }
        // <e_m, x e_n> = 1/2 on the diagonal, -i / (2 pi (n - m)) off it
        assert!((sys.h1[(0, 0)].re + 0.5).abs() < 1e-4);
        assert!((sys.h1[(1, 0)].norm() - 1.0 / tau).abs() < 1e-4);
        assert!(crate::linalg::hermitian_defect(&sys.h1) < 1e-14);
        let ex = sys.magnetic_expansion();
        // k1 = sum beta (C + 2 a M) projected; k2 = beta^2 times the identity
        assert!((&ex.k2 - CMat::identity(6, 6)).norm() < 1e-10);
        for i in 0..6 {
            assert!((ex.k0[(i, i)].re - sys.energies[i]).abs() < 2e-2 * sys.energies[i]);
        }
    }

    #[test]
    fn rejects_non_simple_data() {
        let g = catalog::g1();
        let ok = EdgePotential::from_a(vec![1.0, 0.0, 0.5]);
        let r = BilinearSystem::new(&g, 0.0, &ok, &[0.0, 1.0, 0.0], 1.0, SystemOptions::default());
        match r {
            Err(Error::NotSimple(res)) => assert!(res.iter().any(|(_, x)| x.abs() > 0.5)),
            other => panic!("expected rejection, got {other:?}"),
        }
    }
}
