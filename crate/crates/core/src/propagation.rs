//! Propagation of `i dpsi/dt = H(t) psi` with `H(t) = sum_i f_i(t) H_i` by
//! piecewise-constant approximate propagators.
//!
//! With a mass matrix `M = L L^H` the matrices `H_i` are sesquilinear forms and
//! the evolution operator is `exp(-i tau M^{-1} H)`. Everything is computed in
//! the coordinates `y = L^H psi`, where that operator becomes the unitary
//! `exp(-i tau L^{-1} H L^{-H})` and the M-norm becomes the Euclidean norm.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, congruence_inverse, expm_hermitian, hermitian_defect, solve_lower, solve_lower_adjoint, spectral_norm,
    C64, CMat, CVec, I,
};

/// Hard limit on the total M-norm drift of a run.
pub const DRIFT_LIMIT: f64 = 1e-8;

/// Scalar time dependence of one term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// `values[j]` on `[knots[j], knots[j + 1])`; right-continuous, and the
    /// last value also holds at the final knot.
    PiecewiseConstant { knots: Vec<f64>, values: Vec<f64> },
    /// Linear interpolation of `(times[j], values[j])`, constant outside.
    PiecewiseLinear { times: Vec<f64>, values: Vec<f64> },
    /// Arbitrary function, C¹ between the listed breakpoints.
    Function { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, breakpoints: Vec<f64> },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::PiecewiseConstant { knots, values } => {
                write!(f, "PiecewiseConstant({} pieces on [{:?}, {:?}])", values.len(), knots.first(), knots.last())
            }
            Coefficient::PiecewiseLinear { times, .. } => write!(f, "PiecewiseLinear({} samples)", times.len()),
            Coefficient::Function { breakpoints, .. } => write!(f, "Function({} breakpoints)", breakpoints.len()),
        }
    }
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static, breakpoints: Vec<f64>) -> Self {
        Coefficient::Function { f: Arc::new(f), breakpoints }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PiecewiseConstant { knots, values } => {
                let j = knots.partition_point(|&k| k <= t);
                values[j.saturating_sub(1).min(values.len() - 1)]
            }
            Coefficient::PiecewiseLinear { times, values } => {
                let j = times.partition_point(|&k| k <= t);
                if j == 0 {
                    values[0]
                } else if j >= times.len() {
                    values[values.len() - 1]
                } else {
                    let (t0, t1) = (times[j - 1], times[j]);
                    let w = (t - t0) / (t1 - t0);
                    values[j - 1] * (1.0 - w) + values[j] * w
                }
            }
            Coefficient::Function { f, .. } => f(t),
        }
    }

    /// Points where the coefficient may fail to be C¹.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Coefficient::Constant(_) => Vec::new(),
            Coefficient::PiecewiseConstant { knots, .. } => knots.clone(),
            Coefficient::PiecewiseLinear { times, .. } => times.clone(),
            Coefficient::Function { breakpoints, .. } => breakpoints.clone(),
        }
    }

    fn validate(&self) -> Result<()> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] <= w[1]) && v.iter().all(|x| x.is_finite());
        match self {
            Coefficient::Constant(c) if !c.is_finite() => Err(Error::InvalidParameter("non-finite coefficient".into())),
            Coefficient::PiecewiseConstant { knots, values } => {
                if knots.len() != values.len() + 1 || values.is_empty() || !sorted(knots) {
                    return Err(Error::InvalidParameter("piecewise constant needs sorted knots, one more than values".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite coefficient".into()));
                }
                Ok(())
            }
            Coefficient::PiecewiseLinear { times, values } => {
                if times.len() != values.len() || times.is_empty() || !sorted(times) {
                    return Err(Error::InvalidParameter("piecewise linear needs sorted sample times".into()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite coefficient".into()));
                }
                Ok(())
            }
            Coefficient::Function { breakpoints, .. } if !sorted(breakpoints) => {
                Err(Error::InvalidParameter("breakpoints must be sorted".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub coefficient: Coefficient,
    pub matrix: CMat,
}

impl Term {
    pub fn new(coefficient: Coefficient, matrix: CMat) -> Self {
        Term { coefficient, matrix }
    }
}

#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    terms: Vec<Term>,
    mass: Option<CMat>,
    chol: Option<CMat>,
    reduced: Vec<CMat>,
    interval: (f64, f64),
    breakpoints: Vec<f64>,
}

impl TimeDependentHamiltonian {
    pub fn new(terms: Vec<Term>, mass: Option<CMat>, interval: (f64, f64)) -> Result<Self> {
        let (s, t) = interval;
        if !(s.is_finite() && t.is_finite() && s <= t) {
            return Err(Error::InvalidParameter(format!("bad interval [{s}, {t}]")));
        }
        let n = terms.first().map(|t| t.matrix.nrows()).unwrap_or(0);
        for term in &terms {
            if term.matrix.nrows() != n || term.matrix.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: term.matrix.nrows() });
            }
            let scale = term.matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let d = hermitian_defect(&term.matrix);
            if d > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!("term is not Hermitian (defect {d:.3e})")));
            }
            term.coefficient.validate()?;
        }
        let chol = match &mass {
            Some(m) => {
                if m.nrows() != n {
                    return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
                }
                Some(cholesky(m)?)
            }
            None => None,
        };
        let reduced = terms
            .iter()
            .map(|term| match &chol {
                Some(l) => congruence_inverse(l, &term.matrix),
                None => crate::linalg::hermitian_part(&term.matrix),
            })
            .collect();
        let mut breakpoints: Vec<f64> = terms
            .iter()
            .flat_map(|t| t.coefficient.breakpoints())
            .filter(|&b| b > s && b < t)
            .collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(TimeDependentHamiltonian { terms, mass, chol, reduced, interval, breakpoints })
    }

    pub fn dim(&self) -> usize {
        self.terms.first().map(|t| t.matrix.nrows()).unwrap_or(0)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn mass(&self) -> Option<&CMat> {
        self.mass.as_ref()
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    /// Interior breakpoints of all coefficients, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coefficients_at(&self, t: f64) -> Vec<f64> {
        self.terms.iter().map(|term| term.coefficient.eval(t)).collect()
    }

    /// `sum_i f_i(t) H_i` as a form.
    pub fn matrix_at(&self, t: f64) -> CMat {
        let n = self.dim();
        let mut h = CMat::zeros(n, n);
        for term in &self.terms {
            h += &term.matrix * C64::new(term.coefficient.eval(t), 0.0);
        }
        h
    }

    fn reduced_with(&self, coeffs: &[f64]) -> CMat {
        let n = self.dim();
        let mut h = CMat::zeros(n, n);
        for (r, &c) in self.reduced.iter().zip(coeffs) {
            if c != 0.0 {
                h += r * C64::new(c, 0.0);
            }
        }
        h
    }

    /// The operator at time `t` in orthonormal coordinates.
    pub fn reduced_at(&self, t: f64) -> CMat {
        self.reduced_with(&self.coefficients_at(t))
    }

    /// `L^H psi`.
    pub fn to_reduced(&self, psi: &CVec) -> CVec {
        match &self.chol {
            Some(l) => l.adjoint() * psi,
            None => psi.clone(),
        }
    }

    /// `L^{-H} y`.
    pub fn from_reduced(&self, y: &CVec) -> CVec {
        match &self.chol {
            Some(l) => solve_lower_adjoint(l, &CMat::from_column_slice(y.len(), 1, y.as_slice())).column(0).into_owned(),
            None => y.clone(),
        }
    }

    pub fn m_norm(&self, psi: &CVec) -> f64 {
        self.to_reduced(psi).norm()
    }

    /// `|M^{-1} H_i psi|_M`, i.e. the M^{-1}-norm of `H_i psi`.
    pub fn term_norm(&self, i: usize, psi: &CVec) -> f64 {
        let v = &self.terms[i].matrix * psi;
        match &self.chol {
            Some(l) => solve_lower(l, &CMat::from_column_slice(v.len(), 1, v.as_slice())).norm(),
            None => v.norm(),
        }
    }

    fn same_family(&self, other: &Self) -> Result<()> {
        if self.terms.len() != other.terms.len() {
            return Err(Error::FamilyMismatch(format!("{} vs {} terms", self.terms.len(), other.terms.len())));
        }
        for (i, (a, b)) in self.terms.iter().zip(&other.terms).enumerate() {
            if a.matrix.shape() != b.matrix.shape() || (&a.matrix - &b.matrix).norm() > 1e-12 * (1.0 + a.matrix.norm()) {
                return Err(Error::FamilyMismatch(format!("term {i} differs")));
            }
        }
        match (&self.mass, &other.mass) {
            (None, None) => Ok(()),
            (Some(a), Some(b)) if (a - b).norm() <= 1e-12 * (1.0 + a.norm()) => Ok(()),
            _ => Err(Error::FamilyMismatch("mass matrices differ".into())),
        }
    }
}

/// Where inside each cell the coefficients are frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// `H(t_j)` on `[t_j, t_{j+1})`.
    #[default]
    LeftEndpoint,
    /// `H((t_j + t_{j+1}) / 2)`; offered for accuracy comparisons.
    Midpoint,
}

/// `exp(-i (t - s) M^{-1} H(s))`, acting on `psi`-coordinates.
pub fn step_propagator(h: &TimeDependentHamiltonian, s: f64, t: f64) -> Result<CMat> {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    if let Some(&b) = h.breakpoints.iter().find(|&&b| b > lo && b < hi) {
        return Err(Error::BreakpointInsideStep(b));
    }
    let e = expm_hermitian(&h.reduced_at(s), t - s);
    Ok(match &h.chol {
        Some(l) => solve_lower_adjoint(l, &(e * l.adjoint())),
        None => e,
    })
}

/// Uniform `k`-cell grid on `[s, t]` merged with the interior breakpoints.
pub fn partition(h: &TimeDependentHamiltonian, s: f64, t: f64, k: usize) -> Vec<f64> {
    let k = k.max(1);
    let mut pts: Vec<f64> = (0..=k).map(|j| if j == k { t } else { s + (t - s) * j as f64 / k as f64 }).collect();
    let tol = 1e-13 * (1.0 + s.abs().max(t.abs()));
    for &b in &h.breakpoints {
        if b > s + tol && b < t - tol {
            // a node within roundoff of a jump is moved onto it, so the cell
            // after the jump samples the new value
            match pts[1..k].iter_mut().find(|p| (**p - b).abs() <= tol) {
                Some(p) => *p = b,
                None => pts.push(b),
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub sampling: Sampling,
    /// Number of trajectory samples kept (besides the initial state).
    pub samples: usize,
    pub drift_limit: f64,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        PropagateOptions { sampling: Sampling::LeftEndpoint, samples: 0, drift_limit: DRIFT_LIMIT }
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub times: Vec<f64>,
    pub trajectory: Vec<CVec>,
    pub final_state: CVec,
    /// `| |psi_{j+1}|_M - |psi_j|_M |` per step.
    pub drift: Vec<f64>,
    /// Requested uniform cell count.
    pub k: usize,
    /// Actual number of steps after merging breakpoints.
    pub steps: usize,
}

impl PropagationResult {
    pub fn max_step_drift(&self) -> f64 {
        self.drift.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn propagate(h: &TimeDependentHamiltonian, psi0: &CVec, s: f64, t: f64, k: usize) -> Result<PropagationResult> {
    propagate_with(h, psi0, s, t, k, &PropagateOptions::default())
}

pub fn propagate_with(
    h: &TimeDependentHamiltonian,
    psi0: &CVec,
    s: f64,
    t: f64,
    k: usize,
    opts: &PropagateOptions,
) -> Result<PropagationResult> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.len() });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("partition count must be positive".into()));
    }
    let pts = partition(h, s, t, k);
    let steps = pts.len() - 1;
    let stride = if opts.samples == 0 { usize::MAX } else { (steps / opts.samples).max(1) };
    let mut y = h.to_reduced(psi0);
    let n0 = y.norm();
    let mut last_norm = n0;
    let mut drift = Vec::with_capacity(steps);
    let mut times = vec![s];
    let mut trajectory = vec![psi0.clone()];
    let mut cache: Option<(Vec<u64>, u64, CMat)> = None;
    for j in 0..steps {
        let (a, b) = (pts[j], pts[j + 1]);
        let at = match opts.sampling {
            Sampling::LeftEndpoint => a,
            Sampling::Midpoint => 0.5 * (a + b),
        };
        let coeffs = h.coefficients_at(at);
        let key: Vec<u64> = coeffs.iter().map(|c| c.to_bits()).collect();
        let tau = b - a;
        let hit = matches!(&cache, Some((kk, tt, _)) if *kk == key && *tt == tau.to_bits());
        if !hit {
            cache = Some((key, tau.to_bits(), expm_hermitian(&h.reduced_with(&coeffs), tau)));
        }
        y = &cache.as_ref().unwrap().2 * y;
        let nrm = y.norm();
        drift.push((nrm - last_norm).abs());
        last_norm = nrm;
        if (nrm - n0).abs() > opts.drift_limit * n0.max(1e-300) {
            return Err(Error::NormDrift { drift: (nrm - n0).abs(), step: j });
        }
        if (j + 1) % stride == 0 && j + 1 < steps {
            times.push(b);
            trajectory.push(h.from_reduced(&y));
        }
    }
    let final_state = h.from_reduced(&y);
    if opts.samples > 0 {
        times.push(t);
        trajectory.push(final_state.clone());
    }
    Ok(PropagationResult { times, trajectory, final_state, drift, k, steps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closeness {
    pub actual: f64,
    /// `(t - s) sum_i |f_i - g_i|_inf |H_i psi|` with the initial state.
    pub bound: f64,
    pub holds: bool,
    /// The same with `|H_i psi|` replaced by its sup along the second
    /// trajectory (sampled at every step), which bounds the Duhamel integral
    /// `int |(H_1(r) - H_2(r)) U_2(r, s) psi| dr`.
    pub trajectory_bound: f64,
}

/// Sup-norm of `f - g` over `[s, t]`, sampled at the merged partition points,
/// just left of each of them and at eight interior points per cell.
pub fn coefficient_distance(f: &Coefficient, g: &Coefficient, s: f64, t: f64, k: usize) -> f64 {
    let mut pts: Vec<f64> = (0..=k).map(|j| s + (t - s) * j as f64 / k as f64).collect();
    pts.extend(f.breakpoints().into_iter().chain(g.breakpoints()).filter(|&b| b >= s && b <= t));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut worst = 0.0f64;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        for q in 0..8 {
            let x = a + (b - a) * q as f64 / 8.0;
            worst = worst.max((f.eval(x) - g.eval(x)).abs());
        }
        let left = b - (b - a) * 1e-9;
        worst = worst.max((f.eval(left) - g.eval(left)).abs());
    }
    worst.max((f.eval(t) - g.eval(t)).abs())
}

/// Distance of the two final states and the bound
/// `(t - s) sum_i |f_i - g_i|_inf |H_i psi|`.
pub fn closeness_bound(
    h1: &TimeDependentHamiltonian,
    h2: &TimeDependentHamiltonian,
    psi: &CVec,
    s: f64,
    t: f64,
    k: usize,
) -> Result<Closeness> {
    h1.same_family(h2)?;
    let opts = PropagateOptions { samples: usize::MAX, ..Default::default() };
    let (a, b) = rayon::join(|| propagate(h1, psi, s, t, k), || propagate_with(h2, psi, s, t, k, &opts));
    let (a, b) = (a?, b?);
    let mut bound = 0.0;
    let mut trajectory_bound = 0.0;
    for i in 0..h1.terms.len() {
        let d = coefficient_distance(&h1.terms[i].coefficient, &h2.terms[i].coefficient, s, t, 4 * k);
        if d > 0.0 {
            bound += d * h1.term_norm(i, psi);
            let sup = b.trajectory.iter().map(|v| h1.term_norm(i, v)).fold(0.0, f64::max);
            trajectory_bound += d * sup;
        }
    }
    bound *= t - s;
    trajectory_bound *= t - s;
    let actual = h1.m_norm(&(a.final_state - &b.final_state));
    Ok(Closeness { actual, bound, holds: actual <= bound, trajectory_bound })
}

/// `|(iH(t) + I)(iH(s) + I)^{-1} - I|` (spectral norm, orthonormal
/// coordinates) and its divided difference by `|t - s|`.
pub fn commutation_defect(h: &TimeDependentHamiltonian, t: f64, s: f64) -> Result<(f64, f64)> {
    let n = h.dim();
    let id = CMat::identity(n, n);
    let at = h.reduced_at(t) * I + &id;
    let as_ = h.reduced_at(s) * I + &id;
    let inv = as_
        .try_inverse()
        .ok_or_else(|| Error::Factorization("iH + I is singular".into()))?;
    let c = at * inv - id;
    let nrm = spectral_norm(&c);
    let divided = if t == s { 0.0 } else { nrm / (t - s).abs() };
    Ok((nrm, divided))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cis, ONE, ZERO};

    fn pauli() -> (CMat, CMat) {
        let z = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        (z, x)
    }

    fn rabi(u: f64) -> TimeDependentHamiltonian {
        let (z, x) = pauli();
        TimeDependentHamiltonian::new(
            vec![Term::new(Coefficient::Constant(1.0), z), Term::new(Coefficient::Constant(u), x)],
            None,
            (0.0, 3.0),
        )
        .unwrap()
    }

    #[test]
    fn rabi_closed_form_at_single_step() {
        // exp(-i t (sz + u sx)) = cos(w t) I - i sin(w t) (sz + u sx) / w
        let u = 0.8;
        let h = rabi(u);
        let psi0 = CVec::from_vec(vec![ONE, ZERO]);
        let t = 2.3;
        let r = propagate(&h, &psi0, 0.0, t, 1).unwrap();
        let w = (1.0 + u * u).sqrt();
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let want = [C64::new(c, -s / w), C64::new(0.0, -s * u / w)];
        assert!((r.final_state[0] - want[0]).norm() < 1e-10);
        assert!((r.final_state[1] - want[1]).norm() < 1e-10);
    }

    #[test]
    fn constant_hamiltonian_independent_of_k() {
        let h = rabi(0.3);
        let psi0 = CVec::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let a = propagate(&h, &psi0, 0.0, 3.0, 1).unwrap();
        let b = propagate(&h, &psi0, 0.0, 3.0, 37).unwrap();
        assert!((a.final_state - b.final_state).norm() < 1e-12);
    }

    #[test]
    fn step_identity_and_breakpoint_error() {
        let (z, x) = pauli();
        let h = TimeDependentHamiltonian::new(
            vec![
                Term::new(Coefficient::Constant(1.0), z),
                Term::new(Coefficient::PiecewiseConstant { knots: vec![0.0, 1.0, 2.0], values: vec![0.2, 0.9] }, x),
            ],
            None,
            (0.0, 2.0),
        )
        .unwrap();
        let u = step_propagator(&h, 0.4, 0.4).unwrap();
        assert!((u - CMat::identity(2, 2)).norm() < 1e-15);
        assert!(matches!(step_propagator(&h, 0.5, 1.5), Err(Error::BreakpointInsideStep(_))));
        // composition inside one piece
        let ab = step_propagator(&h, 0.25, 0.5).unwrap() * step_propagator(&h, 0.0, 0.25).unwrap();
        let direct = step_propagator(&h, 0.0, 0.5).unwrap();
        assert!((ab - direct).norm() < 1e-12);
    }

    #[test]
    fn mass_weighted_steps_are_unitary_in_m_norm() {
        let m = CMat::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), ONE]);
        let (z, x) = pauli();
        let h = TimeDependentHamiltonian::new(
            vec![Term::new(Coefficient::Constant(1.0), z), Term::new(Coefficient::function(|t| t.sin(), vec![]), x)],
            Some(m),
            (0.0, 1.0),
        )
        .unwrap();
        let psi = CVec::from_vec(vec![cis(0.3), C64::new(0.2, -0.1)]);
        let u = step_propagator(&h, 0.3, 0.7).unwrap();
        assert!((h.m_norm(&(u * &psi)) - h.m_norm(&psi)).abs() < 1e-13);
        let r = propagate(&h, &psi, 0.0, 1.0, 50).unwrap();
        assert!(r.max_step_drift() < 1e-13);
    }

    #[test]
    fn closeness_identical_families_give_zero() {
        let h = rabi(0.5);
        let psi = CVec::from_vec(vec![ONE, ZERO]);
        let c = closeness_bound(&h, &h, &psi, 0.0, 1.0, 16).unwrap();
        assert_eq!((c.actual, c.bound), (0.0, 0.0));
        let other = TimeDependentHamiltonian::new(vec![Term::new(Coefficient::Constant(1.0), pauli().0)], None, (0.0, 1.0)).unwrap();
        assert!(matches!(closeness_bound(&h, &other, &psi, 0.0, 1.0, 4), Err(Error::FamilyMismatch(_))));
    }

    #[test]
    fn defect_vanishes_for_constant_h() {
        let h = rabi(0.5);
        assert_eq!(commutation_defect(&h, 0.2, 0.2).unwrap().0, 0.0);
        assert!(commutation_defect(&h, 0.9, 0.2).unwrap().0 < 1e-15);
    }

    #[test]
    fn coefficients_are_right_continuous() {
        let c = Coefficient::PiecewiseConstant { knots: vec![0.0, 1.0, 2.0], values: vec![3.0, 4.0] };
        assert_eq!(c.eval(0.0), 3.0);
        assert_eq!(c.eval(1.0), 4.0);
        assert_eq!(c.eval(2.0), 4.0);
        let l = Coefficient::PiecewiseLinear { times: vec![0.0, 2.0], values: vec![0.0, 1.0] };
        assert_eq!(l.eval(1.0), 0.5);
    }
}
