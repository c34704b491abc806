//! Exact and floating-point linear algebra for Laplacian minors.
//!
//! Exact determinants use fraction-free (Bareiss) elimination over big integers.
//! Floating work uses a Cholesky factorization stored in envelope (skyline) form after
//! a reverse Cuthill–McKee reordering; reduced Laplacians of lattice graphs have narrow
//! envelopes, so factoring a 64x64 box or torus is cheap.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut prev = BigInt::from(1);
    let mut negate = false;
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (head, tail) = m.split_at_mut(k + 1);
        let pivot_row = &head[k];
        for row in tail.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Natural log of a positive big integer without overflowing `f64`.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_bigint(x: &BigInt) -> f64 {
    match x.sign() {
        Sign::Plus => ln_biguint(x.magnitude()),
        _ => f64::NEG_INFINITY,
    }
}

/// Symmetric sparse matrix assembled from entries; duplicate entries are summed.
#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    n: usize,
    diag: Vec<f64>,
    // strictly lower/upper entries, stored once per unordered pair per row in both rows
    off: Vec<Vec<(usize, f64)>>,
}

impl SymmetricMatrix {
    pub fn new(n: usize) -> Self {
        SymmetricMatrix {
            n,
            diag: vec![0.0; n],
            off: vec![Vec::new(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_diagonal(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    /// Adds `v` at `(i, j)` and `(j, i)`; `i != j`.
    pub fn add_off_diagonal(&mut self, i: usize, j: usize, v: f64) {
        debug_assert_ne!(i, j);
        self.off[i].push((j, v));
        self.off[j].push((i, v));
    }

    fn compress(&mut self) {
        for row in &mut self.off {
            row.sort_unstable_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some((lj, lv)) if *lj == j => *lv += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.diag[i] * x[i] + self.off[i].iter().map(|&(j, v)| v * x[j]).sum::<f64>())
            .collect()
    }
}

/// Reverse Cuthill–McKee ordering of an adjacency structure. Returns `order[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(adj, &degree, seed);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            nbrs.dedup();
            for w in nbrs {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([start]);
    dist[start] = 0;
    let mut last_level = vec![start];
    let mut ecc = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                if dist[w] > ecc {
                    ecc = dist[w];
                    last_level.clear();
                }
                if dist[w] == ecc {
                    last_level.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    (ecc, last_level)
}

fn pseudo_peripheral(adj: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut v = seed;
    let (mut ecc, mut last) = bfs_levels(adj, v);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&w| (degree[w], w)).unwrap();
        let (e2, l2) = bfs_levels(adj, cand);
        if e2 <= ecc {
            break;
        }
        v = cand;
        ecc = e2;
        last = l2;
    }
    v
}

/// Cholesky factor `P A P^T = L L^T` of a symmetric positive definite matrix, with `L`
/// stored row-wise from each row's first nonzero column.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    order: Vec<usize>,
    position: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(mut a: SymmetricMatrix) -> Result<Self> {
        a.compress();
        let n = a.n;
        let adj: Vec<Vec<usize>> = a
            .off
            .iter()
            .map(|row| row.iter().map(|&(j, _)| j).collect())
            .collect();
        let order = reverse_cuthill_mckee(&adj);
        let mut position = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }

        let mut first: Vec<usize> = (0..n).collect();
        for (old, row) in a.off.iter().enumerate() {
            let i = position[old];
            for &(oj, _) in row {
                let j = position[oj];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0usize);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; start[n]];
        for old in 0..n {
            let i = position[old];
            data[start[i] + i - first[i]] = a.diag[old];
            for &(oj, v) in &a.off[old] {
                let j = position[oj];
                if j < i {
                    data[start[i] + j - first[i]] += v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (before, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &before[start[j]..start[j] + (j - fj + 1)];
                let dot: f64 = row_i[k0 - fi..j - fi]
                    .iter()
                    .zip(&row_j[k0 - fj..j - fj])
                    .map(|(x, y)| x * y)
                    .sum();
                row_i[j - fi] = (row_i[j - fi] - dot) / row_j[j - fj];
            }
            let sq: f64 = row_i[..i - fi].iter().map(|x| x * x).sum();
            let d = row_i[i - fi] - sq;
            if d.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !d.is_finite() {
                return Err(Error::Singular { pivot: order[i] });
            }
            row_i[i - fi] = d.sqrt();
        }

        Ok(EnvelopeCholesky {
            n,
            order,
            position,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn diag(&self, i: usize) -> f64 {
        self.data[self.start[i] + i - self.first[i]]
    }

    /// `ln det A`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.diag(i).ln()).sum::<f64>()
    }

    /// Stored envelope entries (a measure of fill).
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut z: Vec<f64> = self.order.iter().map(|&old| b[old]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi]
                .iter()
                .zip(&z[fi..i])
                .map(|(l, x)| l * x)
                .sum();
            z[i] = (z[i] - dot) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            z[i] /= row[i - fi];
            let xi = z[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                z[k] -= l * xi;
            }
        }
        (0..self.n).map(|old| z[self.position[old]]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn bareiss_small() {
        assert_eq!(bareiss_det(vec![]), BigInt::from(1));
        assert_eq!(bareiss_det(big(&[&[3]])), BigInt::from(3));
        assert_eq!(bareiss_det(big(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(
            bareiss_det(big(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]])),
            BigInt::from(4)
        );
        assert_eq!(bareiss_det(big(&[&[1, 2], &[2, 4]])), BigInt::zero());
        assert_eq!(
            bareiss_det(big(&[&[0, 2, 1], &[3, 0, 0], &[1, 1, 1]])),
            BigInt::from(-3)
        );
    }

    #[test]
    fn ln_big_values() {
        let x = BigUint::from(1u64) << 200u32;
        assert!((ln_biguint(&x) - 200.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_biguint(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn cholesky_matches_dense() {
        // path Laplacian plus identity: tridiagonal SPD
        let n = 30;
        let mut a = SymmetricMatrix::new(n);
        for i in 0..n {
            a.add_diagonal(i, 3.0);
            if i + 1 < n {
                a.add_off_diagonal(i, i + 1, -1.0);
            }
        }
        a.add_off_diagonal(0, n - 1, -0.5);
        let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                3.0
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else if (i, j) == (0, n - 1) || (i, j) == (n - 1, 0) {
                -0.5
            } else {
                0.0
            }
        });
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let chol = EnvelopeCholesky::factor(a.clone()).unwrap();
        let x = chol.solve(&b);
        let y = a.mul_vec(&x);
        for i in 0..n {
            assert!((y[i] - b[i]).abs() < 1e-12);
        }
        let det: f64 = dense.determinant();
        assert!((chol.log_det() - det.ln()).abs() < 1e-10);
    }

    #[test]
    fn singular_detected() {
        let mut a = SymmetricMatrix::new(2);
        a.add_diagonal(0, 1.0);
        a.add_diagonal(1, 1.0);
        a.add_off_diagonal(0, 1, -1.0);
        assert!(matches!(
            EnvelopeCholesky::factor(a),
            Err(Error::Singular { .. })
        ));
    }
}
