//! Rank-structured perturbations that separate the spectrum and complete the
//! coupling chain.
//!
//! `H_0 -> H_0 + mu_0 sum_k nu_k phi_k phi_k^H` with `nu_k = 2^{-k} / sqrt(p_k)`
//! (`p_k` the k-th prime, `k = 1, 2, ...` for levels `0, 1, ...`), and
//! `H_1 -> H_1 + mu_1 sum_n alpha_n (phi_{n+1} phi_n^H + phi_n phi_{n+1}^H)` with
//! `alpha_n = 2^{-n-1}`, applied only where `|<phi_{n+1}, H_1 phi_n>| < tau_coup`.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::BilinearSystem;
use crate::error::{Error, Result};
use crate::linalg::{C64, CMat};

/// Exact rational `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub num: i64,
    pub den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("rational with zero denominator".into()));
        }
        let (mut n, mut d) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i64;
        if g > 1 {
            n /= g;
            d /= g;
        }
        Ok(Rational { num: n, den: d })
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => Rational::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => Rational::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// The first `n` primes.
pub fn primes(n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|&&p| p * p <= c).all(|&p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// `nu_k = 2^{-k} / sqrt(p_k)` for `k = 1..=n`.
pub fn nu_sequence(n: usize) -> Vec<f64> {
    primes(n).iter().enumerate().map(|(i, &p)| 0.5f64.powi(i as i32 + 1) / (p as f64).sqrt()).collect()
}

/// `alpha_n = 2^{-n-1}`.
pub fn alpha(n: usize) -> f64 {
    0.5f64.powi(n as i32 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub mu0: Rational,
    pub mu1: f64,
    pub nu: Vec<f64>,
    /// Levels `n` whose link `n -> n + 1` received `mu_1 alpha_n`.
    pub completed_links: Vec<usize>,
}

/// `H_{0,p}` in the Galerkin frame of dimension `n`.
pub fn h0_perturbation(n: usize) -> CMat {
    let nu = nu_sequence(n);
    CMat::from_fn(n, n, |i, j| if i == j { C64::new(nu[i], 0.0) } else { C64::new(0.0, 0.0) })
}

/// `H_{1,p}` restricted to the links listed.
pub fn h1_perturbation(n: usize, links: &[usize]) -> CMat {
    let mut p = CMat::zeros(n, n);
    for &k in links {
        if k + 1 < n {
            p[(k + 1, k)] = C64::new(alpha(k), 0.0);
            p[(k, k + 1)] = C64::new(alpha(k), 0.0);
        }
    }
    p
}

/// Links of the chain whose coupling is below `tau_coup`.
pub fn weak_links(h1: &CMat, tau_coup: f64) -> Vec<usize> {
    (0..h1.nrows().saturating_sub(1)).filter(|&k| h1[(k + 1, k)].norm() < tau_coup).collect()
}

pub fn perturb(sys: &BilinearSystem, mu0: Rational, mu1: f64, tau_coup: f64) -> Result<BilinearSystem> {
    if !mu1.is_finite() {
        return Err(Error::InvalidParameter("mu1 must be finite".into()));
    }
    let mut out = sys.clone();
    let n = sys.levels();
    let m = sys.frame_levels();
    let nu = nu_sequence(m);
    let mu0v = mu0.value();
    for k in 0..m {
        out.energies[k] += mu0v * nu[k];
    }
    for k in 0..n {
        out.h0[(k, k)] = C64::new(out.energies[k], 0.0);
    }
    let links = weak_links(&sys.h1, tau_coup);
    if mu1 != 0.0 {
        let p = h1_perturbation(n, &links) * C64::new(mu1, 0.0);
        out.h1 += &p;
        let mut pf = CMat::zeros(m, m);
        pf.view_mut((0, 0), (n, n)).copy_from(&p);
        out.frame_h1 += pf;
    }
    out.perturbation = Some(Perturbation { mu0, mu1, nu: nu[..n].to_vec(), completed_links: links });
    Ok(out)
}
