use nalgebra::DMatrix;

/// Square sparse matrix, row-major, columns sorted within each row.
///
/// Exact zeros produced while assembling are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    /// Sums duplicate `(row, col, value)` triplets.
    ///
    /// # Panics
    /// If an index is out of range.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (i, j, x) in triplets {
            assert!(i < dim && j < dim, "entry ({i}, {j}) outside a {dim}x{dim} matrix");
            rows[i].push((j, x));
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, x) in row.iter() {
                match merged.last_mut() {
                    Some((k, acc)) if *k == j => *acc += x,
                    _ => merged.push((j, x)),
                }
            }
            merged.retain(|&(_, x)| x != 0.0);
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, 1.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    /// `(row, col, value)` over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, x)| (i, j, x)))
    }

    /// Sorted indices of rows or columns holding at least one entry.
    pub fn support(&self) -> Vec<usize> {
        let mut used = vec![false; self.dim];
        for (i, j, _) in self.iter() {
            used[i] = true;
            used[j] = true;
        }
        (0..self.dim).filter(|&i| used[i]).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * x[j]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, x)| (j, i, x)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|(i, j, x)| self.get(j, i) == x)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, (_, _, x)| m.max(x.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut cols = vec![0.0f64; self.dim];
        for (_, j, x) in self.iter() {
            cols[j] += x.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, x) in self.iter() {
            m[(i, j)] = x;
        }
        m
    }
}
