//! Wire format for complex matrices: JSON arrays of `[re, im]` pairs,
//! row-major, with the dimension explicit. All CLI-facing reports use this
//! schema.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{approx_f64, real, Real};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    /// Row-major `[re, im]` pairs, `dim * dim` of them.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_matrix<T: Real>(m: &CMatrix<T>) -> Self {
        let dim = m.nrows();
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let z = m[(i, j)];
                entries.push([approx_f64(z.re), approx_f64(z.im)]);
            }
        }
        MatrixJson { dim, entries }
    }

    pub fn to_matrix<T: Real>(&self) -> Result<CMatrix<T>> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::InvalidInput(format!(
                "matrix payload has {} entries, expected {}",
                self.entries.len(),
                self.dim * self.dim
            )));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.entries[i * self.dim + j];
            Complex::new(real(re), real(im))
        }))
    }
}
