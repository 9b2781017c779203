//! Sparse storage, a sparse LU for diagonally dominant systems, and a small
//! dense solver for the closed-form linkage systems.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Neumaier-compensated sum; insensitive to grouping up to the final rounding.
pub fn accurate_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Compressed sparse row matrix with sorted column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row entry lists. Duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                debug_assert!(c < n);
                let end = k + row[k..].iter().take_while(|e| e.0 == c).count();
                cols.push(c);
                vals.push(accurate_sum(row[k..end].iter().map(|e| e.1)));
                k = end;
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::Parse(format!("triplet ({r}, {c}) outside {n}x{n}")));
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(rows))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum()
            })
            .collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    /// `shift_i I - self` with a per-row shift.
    pub fn shifted_negation(&self, shift: impl Fn(usize) -> f64) -> CsrMatrix {
        let rows = (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut row: Vec<(usize, f64)> =
                    cols.iter().zip(vals).map(|(&c, &v)| (c, -v)).collect();
                row.push((i, shift(i)));
                row
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }
}

/// LU factors of `P A Pᵀ` computed without pivoting.
///
/// Stable for strictly row-diagonally-dominant `A`: every Schur complement
/// inherits the dominance, so pivots stay bounded away from zero.
#[derive(Clone, Debug)]
pub struct SparseLu {
    n: usize,
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_cols: Vec<usize>,
    l_vals: Vec<f64>,
    u_ptr: Vec<usize>,
    u_cols: Vec<usize>,
    u_vals: Vec<f64>,
    u_diag: Vec<f64>,
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix, order: Option<&[usize]>) -> Result<Self> {
        let n = a.dim();
        let perm: Vec<usize> = match order {
            Some(p) => {
                if p.len() != n {
                    return Err(Error::InvalidParameter(format!(
                        "elimination order has {} entries for a {n}x{n} matrix",
                        p.len()
                    )));
                }
                p.to_vec()
            }
            None => (0..n).collect(),
        };
        let mut inv = vec![usize::MAX; n];
        for (p, &old) in perm.iter().enumerate() {
            if old >= n || inv[old] != usize::MAX {
                return Err(Error::InvalidParameter("elimination order is not a permutation".into()));
            }
            inv[old] = p;
        }

        let mut lu = SparseLu {
            n,
            perm,
            l_ptr: vec![0],
            l_cols: Vec::new(),
            l_vals: Vec::new(),
            u_ptr: vec![0],
            u_cols: Vec::new(),
            u_vals: Vec::new(),
            u_diag: Vec::with_capacity(n),
        };

        let mut work = vec![0.0; n];
        let mut stamp = vec![usize::MAX; n];
        let mut pattern: Vec<usize> = Vec::new();
        let mut pending: BinaryHeap<Reverse<usize>> = BinaryHeap::new();

        for p in 0..n {
            pattern.clear();
            let (cols, vals) = a.row(lu.perm[p]);
            for (&c, &v) in cols.iter().zip(vals) {
                let q = inv[c];
                if stamp[q] != p {
                    stamp[q] = p;
                    work[q] = 0.0;
                    pattern.push(q);
                    if q < p {
                        pending.push(Reverse(q));
                    }
                }
                work[q] += v;
            }
            while let Some(Reverse(j)) = pending.pop() {
                let l = work[j] / lu.u_diag[j];
                if l == 0.0 {
                    continue;
                }
                lu.l_cols.push(j);
                lu.l_vals.push(l);
                for k in lu.u_ptr[j]..lu.u_ptr[j + 1] {
                    let q = lu.u_cols[k];
                    if stamp[q] != p {
                        stamp[q] = p;
                        work[q] = 0.0;
                        pattern.push(q);
                        if q < p {
                            pending.push(Reverse(q));
                        }
                    }
                    work[q] -= l * lu.u_vals[k];
                }
            }
            lu.l_ptr.push(lu.l_cols.len());

            if stamp[p] != p || work[p] == 0.0 || !work[p].is_finite() {
                return Err(Error::SingularSystem(p));
            }
            lu.u_diag.push(work[p]);
            let mut upper: Vec<usize> = pattern.iter().copied().filter(|&q| q > p).collect();
            upper.sort_unstable();
            for q in upper {
                if work[q] != 0.0 {
                    lu.u_cols.push(q);
                    lu.u_vals.push(work[q]);
                }
            }
            lu.u_ptr.push(lu.u_cols.len());
        }
        Ok(lu)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of both factors.
    pub fn fill(&self) -> usize {
        self.l_cols.len() + self.u_cols.len() + self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side has the wrong length");
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for p in 0..self.n {
            let mut s = y[p];
            for k in self.l_ptr[p]..self.l_ptr[p + 1] {
                s -= self.l_vals[k] * y[self.l_cols[k]];
            }
            y[p] = s;
        }
        for p in (0..self.n).rev() {
            let mut s = y[p];
            for k in self.u_ptr[p]..self.u_ptr[p + 1] {
                s -= self.u_vals[k] * y[self.u_cols[k]];
            }
            y[p] = s / self.u_diag[p];
        }
        let mut x = vec![0.0; self.n];
        for (p, &old) in self.perm.iter().enumerate() {
            x[old] = y[p];
        }
        x
    }
}

/// Dense `A x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("dense system is not square".into()));
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return Err(Error::SingularSystem(col));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x)
            .iter()
            .zip(b)
            .fold(0.0_f64, |m, (ax, bi)| m.max((ax - bi).abs()))
    }

    #[test]
    fn duplicates_are_summed() {
        let m = CsrMatrix::from_rows(vec![vec![(1, 1.0), (0, 2.0), (1, 0.5)], vec![(1, 3.0)]]);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(0, 0), 2.0);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn tridiagonal_solve() {
        let n = 5;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t).unwrap();
        let x = SparseLu::factor(&a, None).unwrap().solve(&[1.0; 5]);
        let expected = [
            0.611_111_111_111_111_2,
            0.833_333_333_333_333_4,
            0.888_888_888_888_888_8,
            0.833_333_333_333_333_3,
            0.611_111_111_111_111,
        ];
        for (got, want) in x.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = CsrMatrix::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0)]]);
        assert!(matches!(SparseLu::factor(&a, None), Err(Error::SingularSystem(0))));
    }

    #[test]
    fn dense_matches_known_solution() {
        let a = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x = dense_solve(a, vec![5.0, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.4, 1.6, 1.8]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    proptest! {
        // Random strictly diagonally dominant matrices with long-range entries,
        // under random elimination orders.
        #[test]
        fn lu_solves_dominant_systems(
            n in 3usize..40,
            seed_entries in proptest::collection::vec((0usize..1000, 0usize..1000, 0.0..1.0f64), 0..120),
            rhs in proptest::collection::vec(-5.0..5.0f64, 40),
            shuffle in proptest::collection::vec(0usize..1000, 40),
            shift in 0.01..2.0f64,
        ) {
            let mut rows = vec![Vec::new(); n];
            let mut off = vec![0.0; n];
            for (i, j, v) in seed_entries {
                let (i, j) = (i % n, j % n);
                if i != j {
                    rows[i].push((j, -v));
                    off[i] += v;
                }
            }
            for i in 0..n {
                rows[i].push((i, off[i] + shift));
            }
            let a = CsrMatrix::from_rows(rows);
            let mut order: Vec<usize> = (0..n).collect();
            for (k, s) in shuffle.iter().take(n).enumerate() {
                order.swap(k, s % n);
            }
            let b = &rhs[..n];
            let x = SparseLu::factor(&a, Some(&order)).unwrap().solve(b);
            prop_assert!(residual(&a, &x, b) < 1e-10);
        }
    }
}
