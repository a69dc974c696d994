//! Right-looking sparse LU with symmetric (diagonal) pivoting.
//!
//! Pivots are taken in Markowitz order, i.e. the active diagonal entry with
//! the smallest `(row_count - 1) * (col_count - 1)` goes first. Diagonal
//! pivoting is only safe for matrices that need no row exchanges; reduced
//! Laplacians qualify: they are SPD when undirected and nonsingular
//! column-diagonally-dominant M-matrices when directed, and both properties
//! survive Schur complementation.
//!
//! Graphs with large separators fill the Schur complement in; once the
//! active block is denser than [`DENSE_SWITCH`] the remaining pivots are
//! eliminated on a contiguous dense copy.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::sparse::SparseMatrix;

/// Fraction of nonzeros in the active block that triggers the dense tail.
pub(crate) const DENSE_SWITCH: f64 = 0.2;
/// Active blocks smaller than this stay sparse.
const DENSE_MIN: usize = 48;

#[derive(Debug, Clone)]
pub(crate) struct SparseLu {
    order: Vec<usize>,
    /// Below-pivot multipliers of step `k`, keyed by original row.
    l_cols: Vec<Vec<(usize, f64)>>,
    /// Right-of-pivot entries of step `k`, keyed by original column.
    u_rows: Vec<Vec<(usize, f64)>>,
    pivots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct PivotBreakdown {
    pub step: usize,
    pub index: usize,
    pub pivot: f64,
}

impl SparseLu {
    /// Fails when a pivot falls to `pivot_tol * max|a_ij|` or below.
    pub fn factor(a: &SparseMatrix, pivot_tol: f64) -> Result<Self, PivotBreakdown> {
        let n = a.dim();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut rows: Vec<BTreeMap<usize, f64>> = (0..n)
            .map(|i| a.row(i).iter().copied().collect())
            .collect();
        let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, j, _) in a.iter() {
            cols[j].insert(i);
        }
        let mut active = vec![true; n];
        let cost = |rows: &[BTreeMap<usize, f64>], cols: &[BTreeSet<usize>], i: usize| {
            rows[i].len().saturating_sub(1) * cols[i].len().saturating_sub(1)
        };
        let mut current: Vec<usize> = (0..n).map(|i| cost(&rows, &cols, i)).collect();
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
            (0..n).map(|i| Reverse((current[i], i))).collect();

        let mut lu = Self {
            order: Vec::with_capacity(n),
            l_cols: Vec::with_capacity(n),
            u_rows: Vec::with_capacity(n),
            pivots: Vec::with_capacity(n),
        };

        let mut nnz = a.iter().count();
        while let Some(Reverse((c, p))) = heap.pop() {
            if !active[p] || c != current[p] {
                continue;
            }
            let step = lu.order.len();
            let remaining = n - step;
            if remaining >= DENSE_MIN && nnz as f64 > DENSE_SWITCH * (remaining * remaining) as f64 {
                let tail: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
                lu.factor_dense_tail(&rows, &tail, pivot_tol * scale)?;
                return Ok(lu);
            }
            let pivot = rows[p].get(&p).copied().unwrap_or(0.0);
            if !(pivot.abs() > pivot_tol * scale) {
                return Err(PivotBreakdown {
                    step,
                    index: p,
                    pivot,
                });
            }
            active[p] = false;

            let u_row: Vec<(usize, f64)> = rows[p]
                .iter()
                .filter(|&(&j, _)| j != p)
                .map(|(&j, &x)| (j, x))
                .collect();
            let below: Vec<usize> = cols[p].iter().copied().filter(|&i| i != p).collect();
            let mut l_col = Vec::with_capacity(below.len());
            for &i in &below {
                let a_ip = rows[i].remove(&p).unwrap_or(0.0);
                nnz -= 1;
                let l = a_ip / pivot;
                l_col.push((i, l));
                for &(j, u) in &u_row {
                    let entry = rows[i].entry(j).or_insert_with(|| {
                        nnz += 1;
                        0.0
                    });
                    *entry -= l * u;
                    cols[j].insert(i);
                }
            }
            for &(j, _) in &u_row {
                cols[j].remove(&p);
            }
            nnz -= rows[p].len();
            cols[p].clear();
            rows[p].clear();

            for &i in below.iter().chain(u_row.iter().map(|(j, _)| j)) {
                if active[i] {
                    let c = cost(&rows, &cols, i);
                    if c != current[i] {
                        current[i] = c;
                        heap.push(Reverse((c, i)));
                    }
                }
            }

            lu.order.push(p);
            lu.l_cols.push(l_col);
            lu.u_rows.push(u_row);
            lu.pivots.push(pivot);
        }
        Ok(lu)
    }

    /// Eliminates the active block `tail` in index order on a dense copy.
    fn factor_dense_tail(
        &mut self,
        rows: &[BTreeMap<usize, f64>],
        tail: &[usize],
        threshold: f64,
    ) -> Result<(), PivotBreakdown> {
        let m = tail.len();
        let mut local = vec![usize::MAX; rows.len()];
        for (a, &i) in tail.iter().enumerate() {
            local[i] = a;
        }
        let mut d = vec![0.0; m * m];
        for (a, &i) in tail.iter().enumerate() {
            for (&j, &x) in &rows[i] {
                d[a * m + local[j]] = x;
            }
        }
        let mut pivot_row = vec![0.0; m];
        for k in 0..m {
            let pivot = d[k * m + k];
            if !(pivot.abs() > threshold) {
                return Err(PivotBreakdown {
                    step: self.order.len(),
                    index: tail[k],
                    pivot,
                });
            }
            pivot_row[k + 1..].copy_from_slice(&d[k * m + k + 1..(k + 1) * m]);
            let mut l_col = Vec::new();
            for i in k + 1..m {
                let l = d[i * m + k] / pivot;
                if l != 0.0 {
                    l_col.push((tail[i], l));
                    let row = &mut d[i * m + k + 1..(i + 1) * m];
                    for (x, &u) in row.iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= l * u;
                    }
                }
            }
            let u_row = (k + 1..m)
                .filter(|&j| pivot_row[j] != 0.0)
                .map(|j| (tail[j], pivot_row[j]))
                .collect();
            self.order.push(tail[k]);
            self.l_cols.push(l_col);
            self.u_rows.push(u_row);
            self.pivots.push(pivot);
        }
        Ok(())
    }

    /// `(sign, ln|det|)`; the symmetric permutation does not change the sign.
    pub fn log_det(&self) -> (f64, f64) {
        self.pivots.iter().fold((1.0, 0.0), |(s, l), &p| (s * p.signum(), l + p.abs().ln()))
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        for (k, &p) in self.order.iter().enumerate() {
            let yp = y[p];
            if yp != 0.0 {
                for &(i, l) in &self.l_cols[k] {
                    y[i] -= l * yp;
                }
            }
        }
        for (k, &p) in self.order.iter().enumerate().rev() {
            let s: f64 = self.u_rows[k].iter().map(|&(j, u)| u * y[j]).sum();
            y[p] = (y[p] - s) / self.pivots[k];
        }
        y
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut z = b.to_vec();
        for (k, &p) in self.order.iter().enumerate() {
            z[p] /= self.pivots[k];
            let zp = z[p];
            if zp != 0.0 {
                for &(j, u) in &self.u_rows[k] {
                    z[j] -= u * zp;
                }
            }
        }
        for (k, &p) in self.order.iter().enumerate().rev() {
            let s: f64 = self.l_cols[k].iter().map(|&(i, l)| l * z[i]).sum();
            z[p] -= s;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
        let x = a
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(b))
            .unwrap();
        x.iter().copied().collect()
    }

    #[test]
    fn solves_match_dense_for_a_nonsymmetric_m_matrix() {
        let a = SparseMatrix::from_triplets(
            4,
            [
                (0, 0, 3.0),
                (1, 0, -1.0),
                (2, 0, -1.0),
                (1, 1, 2.0),
                (3, 1, -1.5),
                (2, 2, 4.0),
                (0, 2, -2.0),
                (3, 3, 1.0),
                (0, 3, -0.5),
            ],
        );
        let lu = SparseLu::factor(&a, 1e-14).unwrap();
        let b = [1.0, -2.0, 0.5, 3.0];
        let x = lu.solve(&b);
        let expect = dense_solve(&a, &b);
        for (p, q) in x.iter().zip(&expect) {
            assert!((p - q).abs() < 1e-12);
        }
        let xt = lu.solve_transpose(&b);
        let expect_t = dense_solve(&a.transpose(), &b);
        for (p, q) in xt.iter().zip(&expect_t) {
            assert!((p - q).abs() < 1e-12);
        }
        let (sign, ln) = lu.log_det();
        assert!((sign * ln.exp() - a.to_dense().determinant()).abs() < 1e-10);
    }

    #[test]
    fn dense_tail_matches_dense_solve() {
        // Column-dominant M-matrix dense enough to switch at the first step.
        let n = 70;
        let mut triplets = Vec::new();
        let mut col_sum = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j && (i + 2 * j) % 3 != 0 {
                    let x = 0.5 + ((i * 7 + j * 3) % 5) as f64;
                    triplets.push((i, j, -x));
                    col_sum[j] += x;
                }
            }
        }
        triplets.extend((0..n).map(|j| (j, j, col_sum[j] + 1.0)));
        let a = SparseMatrix::from_triplets(n, triplets);
        let lu = SparseLu::factor(&a, 1e-14).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        for (p, q) in lu.solve(&b).iter().zip(&dense_solve(&a, &b)) {
            assert!((p - q).abs() < 1e-12);
        }
        for (p, q) in lu.solve_transpose(&b).iter().zip(&dense_solve(&a.transpose(), &b)) {
            assert!((p - q).abs() < 1e-12);
        }
        let (_, ln) = lu.log_det();
        let expect = a.to_dense().determinant().ln();
        assert!((ln - expect).abs() < 1e-10 * expect.abs());
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseMatrix::from_triplets(2, [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)]);
        assert!(SparseLu::factor(&a, 1e-12).is_err());
    }
}
