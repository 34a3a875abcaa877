//! Thin wrapper over `faer`'s sparse LU with residual-checked solves.

use faer::linalg::solvers::Solve;
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Relative residual accepted by [`Factorization::solve`].
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Coordinate-format accumulator; duplicate entries are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn build(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.rows, self.cols, &self.entries)
    }
}

/// Compressed sparse row matrix with sorted, merged columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(rows: usize, cols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<(usize, usize, f64)> = entries.to_vec();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let entries: Vec<(usize, usize, f64)> = (0..self.rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        CsrMatrix::from_triplets(self.cols, self.rows, &entries)
    }

    /// True if the sparsity pattern is structurally symmetric.
    pub fn pattern_is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let t = self.transpose();
        t.row_ptr == self.row_ptr && t.col_idx == self.col_idx
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                d[i][j] += v;
            }
        }
        d
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let trips: Vec<Triplet<usize, usize, f64>> = (0..self.rows)
            .flat_map(|i| self.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.rows, self.cols, &trips).map_err(|e| Error::Solver {
            reason: format!("matrix construction: {e:?}"),
            residual: f64::NAN,
            refinements: 0,
        })
    }

    pub fn factorize(&self) -> Result<Factorization> {
        Factorization::new(self.clone())
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Sparse LU factorization keeping the original matrix for residual checks.
pub struct Factorization {
    matrix: CsrMatrix,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
}

impl Factorization {
    pub fn new(matrix: CsrMatrix) -> Result<Self> {
        if matrix.rows != matrix.cols {
            return Err(Error::Solver {
                reason: "matrix is not square".into(),
                residual: f64::NAN,
                refinements: 0,
            });
        }
        if matrix.rows == 0 {
            return Ok(Self { matrix, lu: None });
        }
        let lu = matrix.to_faer()?.sp_lu().map_err(|e| Error::Solver {
            reason: format!("LU factorization: {e:?}"),
            residual: f64::NAN,
            refinements: 0,
        })?;
        Ok(Self {
            matrix,
            lu: Some(lu),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    fn raw_solve(&self, b: &[f64], transpose: bool) -> Vec<f64> {
        let lu = self.lu.as_ref().expect("non-empty system");
        let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
        let x = if transpose {
            lu.solve_transpose(&rhs)
        } else {
            lu.solve(&rhs)
        };
        (0..b.len()).map(|i| x[i]).collect()
    }

    /// Solves `A x = b`, refining until the relative residual is below [`SOLVE_TOLERANCE`].
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, false)
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_impl(b, true)
    }

    fn solve_impl(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.dim());
        if b.is_empty() {
            return Ok(Vec::new());
        }
        let bnorm = norm(b);
        if bnorm == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let apply = |x: &[f64]| {
            if transpose {
                self.matrix.matvec_transpose(x)
            } else {
                self.matrix.matvec(x)
            }
        };
        let mut x = self.raw_solve(b, transpose);
        let mut rel = f64::INFINITY;
        for step in 0..=3 {
            let ax = apply(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            rel = norm(&r) / bnorm;
            if !rel.is_finite() {
                break;
            }
            if rel <= SOLVE_TOLERANCE {
                return Ok(x);
            }
            if step == 3 {
                break;
            }
            let dx = self.raw_solve(&r, transpose);
            for (xi, di) in x.iter_mut().zip(dx) {
                *xi += di;
            }
        }
        Err(Error::Solver {
            reason: "residual above tolerance".into(),
            residual: rel,
            refinements: 3,
        })
    }
}


/// Least-squares line `y = slope x + intercept`; `None` for fewer than two distinct abscissae.
pub fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
