//! Dense frame matrices over the real or complex field.
//!
//! Entries are always stored as complex pairs; the [`Field::Real`] tag pins
//! every imaginary part to zero so that the numerical code is written once.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

pub type Scalar = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl std::str::FromStr for Field {
    type Err = FrameError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "real" | "r" => Ok(Field::Real),
            "complex" | "c" => Ok(Field::Complex),
            other => Err(FrameError::Parse(format!("unknown field {other:?}"))),
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

/// A d×n matrix whose columns are the frame vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    field: Field,
    data: DMatrix<Scalar>,
}

impl FrameMatrix {
    /// Wraps a matrix, validating finiteness and (for the real field) that
    /// every imaginary part is zero.
    pub fn new(field: Field, data: DMatrix<Scalar>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(FrameError::InvalidDimensions(format!(
                "frame must be at least 1x1, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if let Some(z) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FrameError::Parse(format!("non-finite entry {z}")));
        }
        if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(FrameError::Parse(
                "real frame has an entry with nonzero imaginary part".into(),
            ));
        }
        Ok(Self { field, data })
    }

    /// Used by numerical routines that already guarantee the field invariant
    /// up to rounding; imaginary parts are cleared under the real tag.
    pub(crate) fn from_parts(field: Field, mut data: DMatrix<Scalar>) -> Self {
        if field == Field::Real {
            data.iter_mut().for_each(|z| z.im = 0.0);
        }
        Self { field, data }
    }

    pub fn from_real_rows(d: usize, n: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != d * n {
            return Err(FrameError::DimensionMismatch(format!(
                "expected {} entries for a {d}x{n} frame, got {}",
                d * n,
                row_major.len()
            )));
        }
        let data = DMatrix::from_row_iterator(d, n, row_major.iter().map(|&x| Scalar::new(x, 0.0)));
        Self::new(Field::Real, data)
    }

    pub fn from_complex_rows(d: usize, n: usize, row_major: &[Scalar]) -> Result<Self> {
        if row_major.len() != d * n {
            return Err(FrameError::DimensionMismatch(format!(
                "expected {} entries for a {d}x{n} frame, got {}",
                d * n,
                row_major.len()
            )));
        }
        Self::new(Field::Complex, DMatrix::from_row_slice(d, n, row_major))
    }

    pub fn zeros(field: Field, d: usize, n: usize) -> Self {
        Self::from_parts(field, DMatrix::zeros(d, n))
    }

    /// The d×n matrix with ones on the main diagonal.
    pub fn identity(field: Field, d: usize, n: usize) -> Self {
        Self::from_parts(field, DMatrix::identity(d, n))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn d(&self) -> usize {
        self.data.nrows()
    }

    pub fn n(&self) -> usize {
        self.data.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> Scalar {
        self.data[(row, col)]
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        self.data.column(j).iter().copied().collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<Scalar> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Scalar> {
        self.data
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<Scalar> {
        let mut out = Vec::with_capacity(self.d() * self.n());
        for i in 0..self.d() {
            for j in 0..self.n() {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    /// Frame operator FF*.
    pub fn frame_operator(&self) -> DMatrix<Scalar> {
        &self.data * self.data.adjoint()
    }

    /// Gram matrix F*F.
    pub fn gram(&self) -> DMatrix<Scalar> {
        self.data.adjoint() * &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Indices of columns whose entries are all exactly zero.
    pub fn exact_zero_columns(&self) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.data.column(j).iter().all(|z| z.re == 0.0 && z.im == 0.0))
            .collect()
    }

    /// Keeps only the listed columns, in the order given.
    pub fn select_columns(&self, cols: &[usize]) -> DMatrix<Scalar> {
        self.data.select_columns(cols)
    }

    /// Real Frobenius inner product Re tr(A* B).
    pub fn inner(&self, other: &FrameMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// ‖FF* − I_d‖²_Fr.
pub fn frobenius_distance_to_identity(frame: &FrameMatrix) -> f64 {
    let mut s = frame.frame_operator();
    for i in 0..frame.d() {
        s[(i, i)] -= Scalar::new(1.0, 0.0);
    }
    s.iter().map(|z| z.norm_sqr()).sum()
}

/// Squared column norms ‖f_i‖².
pub fn column_norms_sq(frame: &FrameMatrix) -> Vec<f64> {
    frame
        .data
        .column_iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}
