//! Dense complex linear algebra helpers.
//!
//! Storage is nalgebra; the Hermitian eigensolver is delegated to faer, which is
//! an order of magnitude faster on the matrix sizes used by the dense path.

use std::sync::Once;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

static SERIAL: Once = Once::new();

/// Pin faer to a single thread so results do not depend on scheduling.
fn serial_faer() {
    SERIAL.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
}

/// `e^{i theta}`.
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Largest entry of `|A - A^H|`.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest entry of `|U U^H - I|`.
pub fn unitary_defect(u: &CMat) -> f64 {
    let prod = u * u.adjoint();
    let mut worst = 0.0f64;
    for j in 0..prod.ncols() {
        for i in 0..prod.nrows() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Only the lower triangle is read after symmetrisation.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    serial_faer();
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let fa = faer::Mat::<faer::complex_native::c64>::from_fn(n, n, |i, j| {
        let z = if i >= j { a[(i, j)] } else { a[(j, i)].conj() };
        faer::complex_native::c64::new(z.re, z.im)
    });
    let evd = fa.selfadjoint_eigendecomposition(faer::Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| s.read(i).re).collect();
    order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]));
    let values = order.iter().map(|&i| vals[i]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| {
        let z = u.read(i, order[j]);
        C64::new(z.re, z.im)
    });
    (values, vectors)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMat) -> Result<CMat> {
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::Factorization("mass matrix is not positive definite".into()))
}

/// Solve `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: &CMat, b: &CMat) -> CMat {
    l.solve_lower_triangular(b).expect("triangular factor with zero diagonal")
}

/// Solve `L^H X = B` for lower-triangular `L`.
pub fn solve_lower_adjoint(l: &CMat, b: &CMat) -> CMat {
    l.adjoint()
        .solve_upper_triangular(b)
        .expect("triangular factor with zero diagonal")
}

/// `L^{-1} A L^{-H}` for a Hermitian `A`.
pub fn congruence_inverse(l: &CMat, a: &CMat) -> CMat {
    let y = solve_lower(l, a);
    let z = solve_lower(l, &y.adjoint());
    hermitian_part(&z.adjoint())
}

/// Generalised Hermitian eigenproblem `K v = lambda M v`, eigenvectors
/// M-orthonormal, eigenvalues ascending.
pub fn generalized_eigen(k: &CMat, m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let l = cholesky(m)?;
    let reduced = congruence_inverse(&l, k);
    let (vals, w) = hermitian_eigen(&reduced);
    let v = solve_lower_adjoint(&l, &w);
    Ok((vals, v))
}

/// `exp(-i t H)` for Hermitian `H`, built from its eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, v) = hermitian_eigen(h);
    let n = vals.len();
    let mut scaled = v.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let ph = cis(-t * lam);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * v.adjoint()
}

/// Rotate a vector so that its largest-magnitude entry is real and positive.
/// Ties go to the lowest index.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_abs = -1.0f64;
    for (i, z) in v.iter().enumerate() {
        let a = z.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let rot = v[best].conj() / best_abs;
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[best] = C64::new(v[best].re, 0.0);
}

/// `a^H M b`.
pub fn m_inner(m: &CMat, a: &CVec, b: &CVec) -> C64 {
    a.dotc(&(m * b))
}

/// `sqrt(a^H M a)`.
pub fn m_norm(m: &CMat, a: &CVec) -> f64 {
    m_inner(m, a, a).re.max(0.0).sqrt()
}

/// Spectral norm via singular values.
pub fn spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Embed a real matrix.
pub fn complexify(a: &DMatrix<f64>) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}
