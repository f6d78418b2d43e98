//! Direction matrices `S = [s¹ … sᵏ]` for centered sampling: the coordinate
//! basis, the regular basis, the two minimal positive bases, and user
//! supplied matrices.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{hadamard, Matrix, Vector};

/// Relative magnitude below which an entry of a custom matrix counts as zero
/// for the lonely-matrix test.
pub const CUSTOM_ZERO_TOLERANCE: f64 = 1e-14;

/// The families of direction matrices available to experiments.
#[derive(Clone, Debug, PartialEq)]
pub enum SetKind {
    /// Coordinate basis `Id_n`.
    Cb,
    /// Regular basis: n unit vectors with equal pairwise angles.
    Rb,
    /// Coordinate minimal positive basis `[Id_n, −𝟙_n]`.
    Cmpb,
    /// Regular minimal positive basis `[RB, −RB·𝟙_n]`.
    Rmpb,
    /// An explicit matrix, scaled by `h` like the others.
    Custom(Matrix),
}

impl SetKind {
    pub fn name(&self) -> &'static str {
        match self {
            SetKind::Cb => "cb",
            SetKind::Rb => "rb",
            SetKind::Cmpb => "cmpb",
            SetKind::Rmpb => "rmpb",
            SetKind::Custom(_) => "custom",
        }
    }

    /// Parses `cb|rb|cmpb|rmpb|custom:PATH`, loading the file for custom sets.
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim().to_ascii_lowercase().as_str() {
            "cb" => Ok(SetKind::Cb),
            "rb" => Ok(SetKind::Rb),
            "cmpb" => Ok(SetKind::Cmpb),
            "rmpb" => Ok(SetKind::Rmpb),
            _ => match spec.trim().strip_prefix("custom:") {
                Some(path) => Ok(SetKind::Custom(load_matrix_file(path)?)),
                None => Err(Error::Parse(format!(
                    "unknown set `{spec}` (expected cb, rb, cmpb, rmpb or custom:PATH)"
                ))),
            },
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A matrix of nonzero, pairwise distinct direction columns with its radius
/// `Δ_S = maxᵢ ‖sⁱ‖`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDirections {
    matrix: Matrix,
    radius: f64,
    zero_tolerance: f64,
}

impl SampleDirections {
    /// Validates a user-supplied matrix. Entries with magnitude at most
    /// `1e-14 · Δ_S` are treated as zero by [`is_lonely`](Self::is_lonely).
    pub fn new(matrix: Matrix) -> Result<Self> {
        let mut set = Self::validated(matrix)?;
        set.zero_tolerance = CUSTOM_ZERO_TOLERANCE * set.radius;
        Ok(set)
    }

    fn validated(matrix: Matrix) -> Result<Self> {
        let columns: Vec<Vector> = matrix.columns().collect();
        for (i, c) in columns.iter().enumerate() {
            if c.as_slice().iter().all(|&v| v == 0.0) {
                return Err(Error::Directions(format!("column {} is the zero vector", i + 1)));
            }
        }
        for i in 0..columns.len() {
            for j in i + 1..columns.len() {
                if columns[i] == columns[j] {
                    return Err(Error::Directions(format!(
                        "columns {} and {} are identical",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let radius = columns.iter().map(Vector::norm).fold(0.0, f64::max);
        Ok(SampleDirections {
            matrix,
            radius,
            zero_tolerance: 0.0,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Ambient dimension n.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of directions k.
    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn direction(&self, i: usize) -> Vector {
        self.matrix.column(i)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `h · S`, keeping the zero tolerance relative to the radius.
    pub fn scaled(&self, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Parameter(format!("scale must be positive and finite, got {h}")));
        }
        let matrix = self.matrix.scaled(h)?;
        let mut out = Self::validated(matrix)?;
        out.zero_tolerance = self.zero_tolerance * h;
        Ok(out)
    }

    /// True when each column has exactly one nonzero entry.
    pub fn is_lonely(&self) -> bool {
        let tol = self.zero_tolerance;
        self.matrix
            .columns()
            .all(|c| c.as_slice().iter().filter(|v| v.abs() > tol).count() == 1)
    }

    pub fn has_full_row_rank(&self) -> bool {
        self.matrix.rank() == self.dim()
    }

    /// `W = S ⊙ S`, whose columns are the squared directions `sⁱ ⊙ sⁱ`.
    pub fn squared_set(&self) -> Matrix {
        hadamard(&self.matrix, &self.matrix).expect("same shape")
    }

    /// `W̃ = W / Δ_S²`.
    pub fn normalized_squared_set(&self) -> Matrix {
        self.squared_set()
            .scaled(1.0 / (self.radius * self.radius))
            .expect("finite after normalization")
    }

    /// The unit-radius directions `ŝⁱ = sⁱ / Δ_S`.
    pub fn unit_directions(&self) -> Matrix {
        self.matrix
            .scaled(1.0 / self.radius)
            .expect("finite after normalization")
    }
}

/// Regular basis `√((n+1)/n) (Id_n − (1/n)(1 − √(1/(n+1))) 𝟙𝟙ᵀ)`.
pub fn regular_basis(n: usize) -> Matrix {
    let nf = n as f64;
    let scale = ((nf + 1.0) / nf).sqrt();
    let shift = (1.0 - (1.0 / (nf + 1.0)).sqrt()) / nf;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            entries.push(scale * (id - shift));
        }
    }
    Matrix::from_row_slice(n, n, &entries).expect("finite regular basis")
}

/// Unscaled direction matrix of a built-in family.
pub fn base_matrix(kind: &SetKind, n: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::Parameter("dimension n must be at least 1".into()));
    }
    let m = match kind {
        SetKind::Cb => Matrix::identity(n),
        SetKind::Rb => regular_basis(n),
        SetKind::Cmpb => {
            let mut cols: Vec<Vector> = Matrix::identity(n).columns().collect();
            cols.push(Vector::ones(n).scaled(-1.0)?);
            Matrix::from_columns(&cols)?
        }
        SetKind::Rmpb => {
            let rb = regular_basis(n);
            let mut cols: Vec<Vector> = rb.columns().collect();
            // Negated row sums, i.e. −RB·𝟙.
            let tail: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| rb.get(i, j)).sum::<f64>()).collect();
            cols.push(Vector::from_vec(tail)?);
            Matrix::from_columns(&cols)?
        }
        SetKind::Custom(m) => {
            if m.nrows() != n {
                return Err(Error::dimension("custom set", n, m.nrows()));
            }
            m.clone()
        }
    };
    Ok(m)
}

/// `h · T` for the family `T` in dimension `n`.
pub fn build_set(kind: &SetKind, n: usize, h: f64) -> Result<SampleDirections> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("h must be positive and finite, got {h}")));
    }
    let base = base_matrix(kind, n)?;
    let unit = match kind {
        SetKind::Custom(_) => SampleDirections::new(base)?,
        _ => SampleDirections::validated(base)?,
    };
    unit.scaled(h)
}

/// Parses the plain-text matrix format: a header line `n k` followed by `n`
/// rows of `k` whitespace-separated decimals. Blank lines and `#` comments
/// are ignored.
pub fn parse_matrix_text(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(usize::from_str)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("bad header `{header}`: {e}")))?;
    let [n, k] = dims[..] else {
        return Err(Error::Parse(format!("header must be `n k`, got `{header}`")));
    };
    let mut rows = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(f64::from_str)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", i + 1)))?;
        if row.len() != k {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {k}",
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
    }
    Matrix::from_rows(&rows)
}

pub fn load_matrix_file(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix_text(&text)
}
