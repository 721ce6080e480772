//! Search for small integer relations `sum_j c_j g_j ~ 0` among real numbers.
//!
//! A vector `c != 0` is accepted when `|sum c_j g_j| <= tau |g|_2 |c|_1`.
//! Bounds are tried in stages so the reported relation has the smallest
//! possible `|c|_inf`. Each stage is exhaustive (meet in the middle) while the
//! half tables fit the budget; beyond that an LLL-reduced basis is scanned,
//! which can miss relations.

use serde::{Deserialize, Serialize};

/// Largest half table enumerated by the exhaustive search.
pub const TABLE_BUDGET: usize = 4_000_000;

const STAGES: [i64; 7] = [1, 2, 3, 5, 8, 13, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub coefficients: Vec<i64>,
    /// `|sum c_j g_j|`.
    pub residual: f64,
    /// `residual / (|g|_2 |c|_1)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Exhaustive,
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub relation: Option<Relation>,
    /// Largest `|c|_inf` covered exhaustively.
    pub exhaustive_bound: i64,
    pub method: SearchMethod,
}

/// `|sum c_j g_j| / (|g|_2 |c|_1)`, summed in index order.
pub fn relation_ratio(c: &[i64], g: &[f64]) -> f64 {
    let l1: i64 = c.iter().map(|x| x.abs()).sum();
    if l1 == 0 {
        return f64::INFINITY;
    }
    let s: f64 = c.iter().zip(g).map(|(&ci, &gi)| ci as f64 * gi).sum();
    s.abs() / (norm2(g) * l1 as f64)
}

pub fn satisfies(c: &[i64], g: &[f64], tau: f64) -> bool {
    relation_ratio(c, g) <= tau
}

fn norm2(g: &[f64]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn find_relation(g: &[f64], bound: i64, tau: f64) -> SearchOutcome {
    let m = g.len();
    let mut exhaustive_bound = 0;
    if m == 0 || bound < 1 {
        return SearchOutcome { relation: None, exhaustive_bound, method: SearchMethod::Exhaustive };
    }
    let mut stages: Vec<i64> = STAGES.iter().cloned().filter(|&b| b < bound).collect();
    stages.push(bound);
    for &b in &stages {
        let side = (2 * b + 1) as f64;
        if side.powi(m.div_ceil(2) as i32) > TABLE_BUDGET as f64 {
            let relation = lattice_search(g, bound, tau);
            return SearchOutcome { relation, exhaustive_bound, method: SearchMethod::Lattice };
        }
        if let Some(r) = meet_in_the_middle(g, b, tau) {
            return SearchOutcome { relation: Some(r), exhaustive_bound: b, method: SearchMethod::Exhaustive };
        }
        exhaustive_bound = b;
    }
    SearchOutcome { relation: None, exhaustive_bound, method: SearchMethod::Exhaustive }
}

/// Sums `sum c_j g_j` over all `c` in `[-b, b]^len`, indexed so that
/// [`decode`] recovers `c`.
fn enumerate(g: &[f64], b: i64) -> Vec<f64> {
    let mut sums = vec![0.0];
    for &gi in g.iter().rev() {
        let mut next = Vec::with_capacity(sums.len() * (2 * b as usize + 1));
        for x in -b..=b {
            next.extend(sums.iter().map(|s| x as f64 * gi + s));
        }
        sums = next;
    }
    sums
}

fn decode(mut idx: usize, len: usize, b: i64, out: &mut Vec<i64>) {
    let side = (2 * b + 1) as usize;
    let mut digits = vec![0i64; len];
    for d in digits.iter_mut().rev() {
        *d = (idx % side) as i64 - b;
        idx /= side;
    }
    out.extend(digits);
}

fn better(a: &Relation, b: &Relation) -> bool {
    let l1 = |r: &Relation| r.coefficients.iter().map(|x| x.abs()).sum::<i64>();
    (a.ratio, l1(a), &a.coefficients) < (b.ratio, l1(b), &b.coefficients)
}

fn meet_in_the_middle(g: &[f64], b: i64, tau: f64) -> Option<Relation> {
    let m = g.len();
    let h = m / 2;
    let gn = norm2(g);
    let ls = enumerate(&g[..h], b);
    let rs = enumerate(&g[h..], b);
    let mut order: Vec<usize> = (0..rs.len()).collect();
    order.sort_by(|&i, &j| rs[i].total_cmp(&rs[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| rs[i]).collect();
    let slack = tau * gn * (m as f64 * b as f64) * (1.0 + 1e-12);
    let mut best: Option<Relation> = None;
    for (li, &v) in ls.iter().enumerate() {
        let lo = sorted.partition_point(|&x| x < -v - slack);
        for q in lo..sorted.len() {
            if sorted[q] > -v + slack {
                break;
            }
            let ri = order[q];
            let mut c = Vec::with_capacity(m);
            decode(li, h, b, &mut c);
            decode(ri, m - h, b, &mut c);
            // keep one of each +-c pair: first nonzero entry positive
            match c.iter().find(|&&x| x != 0) {
                Some(&x) if x > 0 => {}
                _ => continue,
            }
            let ratio = relation_ratio(&c, g);
            if ratio <= tau {
                let residual = ratio * gn * c.iter().map(|x| x.abs()).sum::<i64>() as f64;
                let cand = Relation { coefficients: c, residual, ratio };
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    best = Some(cand);
                }
            }
        }
    }
    best
}

/// Scan an LLL-reduced basis of `{(c, W sum c_j g_j)}` for relations.
fn lattice_search(g: &[f64], bound: i64, tau: f64) -> Option<Relation> {
    let m = g.len();
    let gn = norm2(g);
    let w = 1.0 / (tau * gn).max(1e-300);
    let mut basis: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let mut r = vec![0.0; m + 1];
            r[i] = 1.0;
            r[m] = w * g[i];
            r
        })
        .collect();
    lll(&mut basis, 0.99);
    let mut best: Option<Relation> = None;
    for row in &basis {
        let c: Vec<i64> = row[..m].iter().map(|x| x.round() as i64).collect();
        if c.iter().all(|&x| x == 0) || c.iter().any(|x| x.abs() > bound) {
            continue;
        }
        let sign = if c.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) { -1 } else { 1 };
        let c: Vec<i64> = c.iter().map(|x| x * sign).collect();
        let ratio = relation_ratio(&c, g);
        if ratio <= tau {
            let residual = ratio * gn * c.iter().map(|x| x.abs()).sum::<i64>() as f64;
            let cand = Relation { coefficients: c, residual, ratio };
            if best.as_ref().is_none_or(|b| better(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram_schmidt(b: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            let d = dot(&star[j], &star[j]);
            mu[i][j] = if d > 0.0 { dot(&b[i], &star[j]) / d } else { 0.0 };
            for (x, y) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * y;
            }
        }
        star.push(v);
    }
    (star, mu)
}

/// Textbook LLL reduction in floating point.
pub fn lll(b: &mut [Vec<f64>], delta: f64) {
    let n = b.len();
    if n < 2 {
        return;
    }
    let (mut star, mut mu) = gram_schmidt(b);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let bj = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= q * y;
                }
                for l in 0..=j {
                    let mjl = if l == j { 1.0 } else { mu[j][l] };
                    mu[k][l] -= q * mjl;
                }
            }
        }
        let lhs = dot(&star[k], &star[k]);
        let rhs = (delta - mu[k][k - 1].powi(2)) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            let r = gram_schmidt(b);
            star = r.0;
            mu = r.1;
            k = (k - 1).max(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_planted_relation() {
        let s2 = 2f64.sqrt();
        let g = [1.0, s2, 3.0 - 2.0 * s2, 3f64.sqrt()];
        let out = find_relation(&g, 5, 1e-12);
        let r = out.relation.expect("relation");
        assert_eq!(out.method, SearchMethod::Exhaustive);
        assert!(satisfies(&r.coefficients, &g, 1e-12));
        assert_eq!(r.coefficients, vec![3, -2, -1, 0]);
    }

    #[test]
    fn independent_surds_have_no_small_relation() {
        let g: Vec<f64> = [2.0f64, 3.0, 5.0, 7.0].iter().map(|p| p.sqrt()).collect();
        let out = find_relation(&g, 20, 1e-12);
        assert!(out.relation.is_none());
        assert_eq!(out.exhaustive_bound, 20);
    }

    #[test]
    fn lattice_recovers_large_coefficients() {
        let base: Vec<f64> = [2.0f64, 3.0, 5.0, 7.0, 11.0].iter().map(|p| p.sqrt()).collect();
        let mut g = base.clone();
        g.push(17.0 * base[0] - 13.0 * base[3]);
        let r = lattice_search(&g, 20, 1e-12).expect("relation");
        assert!(satisfies(&r.coefficients, &g, 1e-12));
        assert_eq!(r.coefficients, vec![17, 0, 0, -13, 0, -1]);
    }
}
