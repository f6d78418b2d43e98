//! Dense real matrices and vectors with the handful of operations the
//! simplex-derivative formulas need: Moore–Penrose pseudoinverse, Hadamard
//! product, the induced 2-norm and the diagonal / strictly-upper /
//! off-diagonal parts of a square matrix.
//!
//! Storage is backed by `nalgebra` and the SVD by `faer`; the wrappers
//! exist to keep every value finite from construction onwards.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// A finite real matrix with at least one row and one column.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Builds an `nrows × ncols` matrix from entries listed row by row.
    pub fn from_row_slice(nrows: usize, ncols: usize, entries: &[f64]) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(Error::Parameter(format!(
                "matrix shape must be positive, got {nrows}x{ncols}"
            )));
        }
        if entries.len() != nrows * ncols {
            return Err(Error::dimension("Matrix::from_row_slice", nrows * ncols, entries.len()));
        }
        check_finite(entries)?;
        Ok(Matrix(DMatrix::from_row_slice(nrows, ncols, entries)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
            return Err(Error::dimension("Matrix::from_rows", ncols, bad.len()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(rows.len(), ncols, &flat)
    }

    pub fn from_columns(columns: &[Vector]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vector::len);
        if nrows == 0 {
            return Err(Error::Parameter("matrix needs at least one column".into()));
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != nrows) {
            return Err(Error::dimension("Matrix::from_columns", nrows, bad.len()));
        }
        let cols: Vec<DVector<f64>> = columns.iter().map(|c| c.0.clone()).collect();
        Ok(Matrix(DMatrix::from_columns(&cols)))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity dimension must be positive");
        Matrix(DMatrix::identity(n, n))
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        assert!(nrows > 0 && ncols > 0, "matrix shape must be positive");
        Matrix(DMatrix::zeros(nrows, ncols))
    }

    /// Wraps an `nalgebra` matrix, rejecting empty shapes and non-finite entries.
    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::Parameter("matrix shape must be positive".into()));
        }
        check_finite(inner.as_slice())?;
        Ok(Matrix(inner))
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector(self.0.column(j).into_owned())
    }

    pub fn columns(&self) -> impl Iterator<Item = Vector> + '_ {
        (0..self.ncols()).map(move |j| self.column(j))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn scaled(&self, factor: f64) -> Result<Matrix> {
        Self::from_dmatrix(&self.0 * factor)
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::dimension("matmul", self.ncols(), rhs.nrows()));
        }
        Self::from_dmatrix(&self.0 * &rhs.0)
    }

    pub fn mul_vec(&self, rhs: &Vector) -> Result<Vector> {
        if self.ncols() != rhs.len() {
            return Err(Error::dimension("mul_vec", self.ncols(), rhs.len()));
        }
        Vector::from_dvector(&self.0 * &rhs.0)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same_shape("add", rhs)?;
        Self::from_dmatrix(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.check_same_shape("sub", rhs)?;
        Self::from_dmatrix(&self.0 - &rhs.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn rank(&self) -> usize {
        Svd::new(self).rank()
    }

    fn check_same_shape(&self, op: &'static str, rhs: &Matrix) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::dimension(
                op,
                format!("{:?}", self.shape()),
                format!("{:?}", rhs.shape()),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols())
                .map(|j| format!("{:>14.6e}", self.get(i, j)))
                .collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// A finite real vector of positive dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn from_vec(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("vector dimension must be positive".into()));
        }
        check_finite(&entries)?;
        Ok(Vector(DVector::from_vec(entries)))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::from_vec(entries.to_vec())
    }

    pub fn from_dvector(inner: DVector<f64>) -> Result<Self> {
        if inner.is_empty() {
            return Err(Error::Parameter("vector dimension must be positive".into()));
        }
        check_finite(inner.as_slice())?;
        Ok(Vector(inner))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "vector dimension must be positive");
        Vector(DVector::zeros(n))
    }

    /// The all-ones vector.
    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "vector dimension must be positive");
        Vector(DVector::from_element(n, 1.0))
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.as_slice().to_vec()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn dot(&self, rhs: &Vector) -> Result<f64> {
        if self.len() != rhs.len() {
            return Err(Error::dimension("dot", self.len(), rhs.len()));
        }
        Ok(self.0.dot(&rhs.0))
    }

    pub fn sub(&self, rhs: &Vector) -> Result<Vector> {
        if self.len() != rhs.len() {
            return Err(Error::dimension("sub", self.len(), rhs.len()));
        }
        Vector::from_dvector(&self.0 - &rhs.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Vector> {
        Vector::from_dvector(&self.0 * factor)
    }

    /// The diagonal matrix with this vector on its diagonal.
    pub fn to_diagonal_matrix(&self) -> Matrix {
        Matrix(DMatrix::from_diagonal(&self.0))
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self.0.iter().map(|v| format!("{v:.10e}")).collect();
        write!(f, "({})", entries.join(", "))
    }
}

/// Singular value decomposition `A = U Σ Vᵀ` with the rank cutoff used for
/// pseudoinversion.
///
/// Both the pseudoinverse and the 2-norm come from the same decomposition, so
/// callers needing both (the error bound does) decompose once.
#[derive(Clone, Debug)]
pub struct Svd {
    shape: (usize, usize),
    u: DMatrix<f64>,
    singular_values: Vec<f64>,
    v_t: DMatrix<f64>,
}

impl Svd {
    /// Decomposes with `faer`. nalgebra's SVD is only a fallback: it can
    /// return factors that do not reproduce `A` on rank-deficient inputs.
    pub fn new(a: &Matrix) -> Self {
        let (n, k) = a.shape();
        let fa = faer::Mat::<f64>::from_fn(n, k, |i, j| a.0[(i, j)]);
        match fa.thin_svd() {
            Ok(svd) => {
                let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
                let p = s.nrows();
                Svd {
                    shape: (n, k),
                    u: DMatrix::from_fn(n, p, |i, j| u[(i, j)]),
                    singular_values: (0..p).map(|i| s[i]).collect(),
                    v_t: DMatrix::from_fn(p, k, |i, j| v[(j, i)]),
                }
            }
            Err(_) => {
                let svd = a.0.clone().svd(true, true);
                Svd {
                    shape: (n, k),
                    u: svd.u.expect("left singular vectors requested"),
                    singular_values: svd.singular_values.iter().copied().collect(),
                    v_t: svd.v_t.expect("right singular vectors requested"),
                }
            }
        }
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Singular values at or below `max(n, k) · σ_max · ε` count as zero.
    pub fn cutoff(&self) -> f64 {
        let (n, k) = self.shape;
        n.max(k) as f64 * self.max_singular_value() * f64::EPSILON
    }

    pub fn rank(&self) -> usize {
        let cutoff = self.cutoff();
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }

    /// Induced ℓ2 norm, i.e. the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.max_singular_value()
    }

    /// `V Σ⁺ Uᵀ`, with `Σ⁺` inverting only the singular values above the cutoff.
    pub fn pseudoinverse(&self) -> Matrix {
        let (n, k) = self.shape;
        let cutoff = self.cutoff();
        let mut out = DMatrix::<f64>::zeros(k, n);
        for (idx, &s) in self.singular_values.iter().enumerate() {
            if s <= cutoff {
                continue;
            }
            let v = self.v_t.row(idx).transpose();
            let u = self.u.column(idx);
            out += (v * u.transpose()) / s;
        }
        Matrix(out)
    }
}

/// Moore–Penrose pseudoinverse `A†` (k×n for an n×k input).
pub fn pseudoinverse(a: &Matrix) -> Matrix {
    Svd::new(a).pseudoinverse()
}

/// Component-wise product `A ⊙ B`.
pub fn hadamard(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.check_same_shape("hadamard", b)?;
    Matrix::from_dmatrix(a.0.component_mul(&b.0))
}

/// Induced ℓ2 norm `max ‖Ax‖` over unit `x`.
pub fn operator_norm_l2(a: &Matrix) -> f64 {
    Svd::new(a).operator_norm()
}

/// The pieces of a square matrix `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixParts {
    /// `diag[M]`, the diagonal as a vector.
    pub diag: Vector,
    /// `Diag[M]`, the diagonal-only matrix.
    pub diag_matrix: Matrix,
    /// `U[M]`, the strictly upper triangular part.
    pub upper: Matrix,
    /// `N[M] = M − Diag[M]`.
    pub off_diagonal: Matrix,
}

pub fn matrix_parts(m: &Matrix) -> Result<MatrixParts> {
    if !m.is_square() {
        return Err(Error::dimension(
            "matrix_parts",
            "a square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ));
    }
    let diag = Vector(m.0.diagonal());
    let diag_matrix = diag.to_diagonal_matrix();
    let upper = Matrix(m.0.upper_triangle() - &diag_matrix.0);
    let off_diagonal = Matrix(&m.0 - &diag_matrix.0);
    Ok(MatrixParts {
        diag,
        diag_matrix,
        upper,
        off_diagonal,
    })
}
