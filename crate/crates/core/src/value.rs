//! The mixed scalar/matrix value model shared by every node function.
//!
//! A [`Value`] is either a real scalar or a non-empty 2-D matrix stored in
//! row-major order. Node outputs are always passed through [`constrain`],
//! which keeps every element finite and inside `[-1, 1]`.

use std::fmt;
use std::sync::Arc;

/// Dense row-major matrix with at least one row and one column.
///
/// Element storage is shared, so cloning a matrix is cheap.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Arc<[f64]>,
}

impl Matrix {
    /// Builds a matrix from row-major data.
    ///
    /// Panics if either dimension is zero or `data.len() != rows * cols`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Matrix {
            rows,
            cols,
            data: data.into(),
        }
    }

    /// A `1 × n` row vector. Panics on empty input.
    pub fn row(data: Vec<f64>) -> Self {
        let n = data.len();
        Matrix::new(1, n, data)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major element slice.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&e| f(e)).collect(),
        }
    }

    /// Top-left `rows × cols` submatrix. The requested dims must not exceed
    /// the matrix's own.
    pub fn top_left(&self, rows: usize, cols: usize) -> Matrix {
        debug_assert!(rows <= self.rows && cols <= self.cols);
        if (rows, cols) == self.dims() {
            return self.clone();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let start = r * self.cols;
            data.extend_from_slice(&self.data[start..start + cols]);
        }
        Matrix::new(rows, cols, data)
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.get(r, c));
            }
        }
        Matrix::new(self.cols, self.rows, data)
    }

    /// Arithmetic mean, summed in row-major order.
    pub fn mean(&self) -> f64 {
        let mut sum = 0.0;
        for &e in self.data.iter() {
            sum += e;
        }
        sum / self.len() as f64
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for (i, e) in row.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
        }
        write!(f, "]")
    }
}

/// Operand and result type of every node function.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Scalar(f64),
    Matrix(Matrix),
}

impl Value {
    pub const ZERO: Value = Value::Scalar(0.0);

    pub fn is_scalar(&self) -> bool {
        matches!(self, Value::Scalar(_))
    }

    pub fn as_matrix(&self) -> Option<&Matrix> {
        match self {
            Value::Matrix(m) => Some(m),
            Value::Scalar(_) => None,
        }
    }

    /// Applies `f` to the scalar or to every matrix element.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Value {
        match self {
            Value::Scalar(s) => Value::Scalar(f(*s)),
            Value::Matrix(m) => Value::Matrix(m.map(f)),
        }
    }

    /// Row-major elements; a scalar is a single element.
    pub fn elements(&self) -> &[f64] {
        match self {
            Value::Scalar(s) => std::slice::from_ref(s),
            Value::Matrix(m) => m.as_slice(),
        }
    }

    /// True when every element is finite and inside `[-1, 1]`.
    pub fn is_constrained(&self) -> bool {
        self.elements()
            .iter()
            .all(|e| e.is_finite() && (-1.0..=1.0).contains(e))
    }
}

impl From<f64> for Value {
    fn from(s: f64) -> Self {
        Value::Scalar(s)
    }
}

impl From<Matrix> for Value {
    fn from(m: Matrix) -> Self {
        Value::Matrix(m)
    }
}

/// Non-finite elements become 0, everything else is clamped to `[-1, 1]`.
pub fn constrain_element(e: f64) -> f64 {
    if e.is_finite() {
        e.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Element-wise [`constrain_element`]; shape is preserved.
pub fn constrain(v: Value) -> Value {
    if v.is_constrained() {
        return v;
    }
    v.map(constrain_element)
}

/// The scalar itself, or the mean of a matrix.
pub fn scalar_of(v: &Value) -> f64 {
    match v {
        Value::Scalar(s) => *s,
        Value::Matrix(m) => m.mean(),
    }
}

/// Crops both matrices to the element-wise minimum of their dimensions,
/// keeping the top-left region of each.
pub fn crop_to_common(a: &Matrix, b: &Matrix) -> (Matrix, Matrix) {
    let rows = a.rows().min(b.rows());
    let cols = a.cols().min(b.cols());
    (a.top_left(rows, cols), b.top_left(rows, cols))
}

/// Maps a position in `[0, 1]` onto `0..length`, clamping `u = 1` to the
/// last element.
pub fn index_from_unit(u: f64, length: usize) -> usize {
    debug_assert!(length >= 1);
    let scaled = (u * length as f64).floor();
    if scaled <= 0.0 || scaled.is_nan() {
        0
    } else {
        (scaled as usize).min(length - 1)
    }
}

/// Maps a value in `[-1, 1]` onto `[0, 1]` as `(g + 1) / 2`.
pub fn unit_from_signed(g: f64) -> f64 {
    (g + 1.0) / 2.0
}
