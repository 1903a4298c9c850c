//! JSON encodings shared by the library and the CLI.
//!
//! Complex numbers are objects `{"re": f64, "im": f64}`; matrices are
//! row-major arrays of rows.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cx {
    fn from(z: Complex64) -> Self {
        Cx { re: z.re, im: z.im }
    }
}

impl From<Cx> for Complex64 {
    fn from(z: Cx) -> Self {
        Complex64::new(z.re, z.im)
    }
}

pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<Cx>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Cx::from(m[(i, j)])).collect())
        .collect()
}

/// Builds a matrix from rows; every row must have `ncols` entries.
pub fn rows_to_matrix(rows: &[Vec<Cx>], ncols: usize) -> Result<CMat> {
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "row {i} has {} entries, expected {ncols}",
            r.len()
        )));
    }
    Ok(CMat::from_fn(rows.len(), ncols, |i, j| rows[i][j].into()))
}

/// Serde adapter for `CMat` fields encoded as arrays of rows.
pub mod cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows: Vec<Vec<Cx>> = Vec::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        rows_to_matrix(&rows, ncols).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Option<CMat>`.
pub mod opt_cmat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<CMat>, D::Error> {
        let rows: Option<Vec<Vec<Cx>>> = Option::deserialize(d)?;
        rows.map(|rows| {
            let ncols = rows.first().map_or(0, Vec::len);
            rows_to_matrix(&rows, ncols).map_err(serde::de::Error::custom)
        })
        .transpose()
    }
}

/// Serde adapter for complex scalars.
pub mod cplx {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
        Cx::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
        Cx::deserialize(d).map(Into::into)
    }
}
