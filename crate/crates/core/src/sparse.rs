//! Compressed sparse row matrices and an envelope LDL^H factorisation for the
//! banded-with-spikes Hermitian systems produced by graph assembly.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::linalg::{C64, CMat, CVec, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    /// Square matrix from (row, col, value) entries; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn zeros(n: usize) -> Self {
        Csr { n, row_ptr: vec![0; n + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().cloned().zip(self.vals[a..b].iter().cloned())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.row(i).find(|&(c, _)| c == j).map(|(_, v)| v).unwrap_or(ZERO)
    }

    pub fn mul_vec(&self, x: &CVec) -> CVec {
        assert_eq!(x.len(), self.n);
        let mut y = CVec::zeros(self.n);
        for i in 0..self.n {
            let mut acc = ZERO;
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn mul_mat(&self, x: &CMat) -> CMat {
        assert_eq!(x.nrows(), self.n);
        let mut y = CMat::zeros(self.n, x.ncols());
        for c in 0..x.ncols() {
            for i in 0..self.n {
                let mut acc = ZERO;
                for (j, v) in self.row(i) {
                    acc += v * x[(j, c)];
                }
                y[(i, c)] = acc;
            }
        }
        y
    }

    pub fn to_dense(&self) -> CMat {
        let mut d = CMat::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            d[(i, j)] += v;
        }
        d
    }

    /// `sum_k w_k A_k`; all terms must share the dimension.
    pub fn combine(terms: &[(C64, &Csr)]) -> Csr {
        let n = terms.first().map(|t| t.1.n).unwrap_or(0);
        let mut entries = Vec::new();
        for (w, a) in terms {
            assert_eq!(a.n, n, "dimension mismatch in combination");
            if *w == ZERO {
                continue;
            }
            for (i, j, v) in a.triplets() {
                entries.push((i, j, *w * v));
            }
        }
        Csr::from_triplets(n, entries)
    }

    /// Largest `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i).conj()).norm());
        }
        worst
    }

    /// `P^T A P` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Csr {
        let mut inv = vec![0usize; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let entries = self.triplets().into_iter().map(|(i, j, v)| (inv[i], inv[j], v)).collect();
        Csr::from_triplets(self.n, entries)
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &Csr) -> Vec<usize> {
    let n = a.n;
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut nb: Vec<usize> = a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .unwrap();
        let start = pseudo_peripheral(&adj, start, &visited);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().cloned().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    level[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for &w in &adj[v] {
            if !blocked[w] && level[w].is_none() {
                level[w] = Some(lv + 1);
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], start: usize, blocked: &[bool]) -> usize {
    let mut current = start;
    let mut ecc = 0usize;
    for _ in 0..8 {
        let levels = bfs_levels(adj, current, blocked);
        let (far, depth) = levels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|d| (i, d)))
            .max_by_key(|&(i, d)| (d, std::cmp::Reverse(adj[i].len()), std::cmp::Reverse(i)))
            .unwrap();
        if depth <= ecc {
            break;
        }
        ecc = depth;
        current = far;
    }
    current
}

/// Envelope (skyline) LDL^H factorisation of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeLdl {
    perm: Vec<usize>,
    first: Vec<usize>,
    /// Row `i` holds `L[i, first[i]..i]`.
    rows: Vec<Vec<C64>>,
    diag: Vec<f64>,
}

impl EnvelopeLdl {
    /// Factor `a` after reverse Cuthill-McKee reordering.
    pub fn factor(a: &Csr) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &Csr, perm: Vec<usize>) -> Result<Self> {
        let p = a.permuted(&perm);
        let n = p.n;
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for (j, _) in p.row(i) {
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut rows: Vec<Vec<C64>> = (0..n).map(|i| vec![ZERO; i - first[i]]).collect();
        let mut diag = vec![0.0f64; n];
        for i in 0..n {
            let fi = first[i];
            let mut a_ii = ZERO;
            for (j, v) in p.row(i) {
                if j < i {
                    rows[i][j - fi] = v;
                } else if j == i {
                    a_ii = v;
                }
            }
            let mut row = std::mem::take(&mut rows[i]);
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = row[j - fi];
                for k in lo..j {
                    s -= row[k - fi] * diag[k] * rows[j][k - fj].conj();
                }
                row[j - fi] = s / diag[j];
            }
            let mut d = a_ii.re;
            for k in fi..i {
                d -= row[k - fi].norm_sqr() * diag[k];
            }
            if !d.is_finite() || d.abs() < 1e-300 {
                return Err(Error::Factorization(format!("zero pivot at row {i}")));
            }
            diag[i] = d;
            rows[i] = row;
        }
        Ok(EnvelopeLdl { perm, first, rows, diag })
    }

    /// Number of negative pivots, i.e. eigenvalues below zero (Sylvester).
    pub fn negative_pivots(&self) -> usize {
        self.diag.iter().filter(|&&d| d < 0.0).count()
    }

    pub fn solve(&self, b: &CVec) -> CVec {
        let n = self.diag.len();
        let mut x: Vec<C64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let mut s = x[i];
            for (k, l) in self.rows[i].iter().enumerate() {
                s -= l * x[fi + k];
            }
            x[i] = s;
        }
        for i in 0..n {
            x[i] /= self.diag[i];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = x[i];
            for (k, l) in self.rows[i].iter().enumerate() {
                x[fi + k] -= l.conj() * xi;
            }
        }
        let mut out = CVec::zeros(n);
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        let mut out = CMat::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            let col = self.solve(&b.column(c).into_owned());
            out.set_column(c, &col);
        }
        out
    }

    /// Stored envelope size.
    pub fn envelope(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }
}
