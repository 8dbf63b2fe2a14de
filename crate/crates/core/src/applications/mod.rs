//! Invariant elliptic polytopes: Lyapunov functions for one matrix and the
//! joint spectral radius of a family.

pub mod eigen;
mod invariant;
pub mod jsr;
pub mod lyapunov;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Ellipse;

pub use invariant::{image_bound, ImageBound, InvariantPolytopeCert, IterationOptions};
pub use jsr::{example_pair, jsr_invariant_polytope, smp_search, JsrOptions, JsrReport, SmpCandidate};
pub use lyapunov::lyapunov_single;

/// Square matrices of a common size with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct MatrixFamily {
    matrices: Vec<DMatrix<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawFamily {
    matrices: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawFamily> for MatrixFamily {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        let ms = r
            .matrices
            .iter()
            .enumerate()
            .map(|(k, rows)| {
                let d = rows.len();
                if rows.iter().any(|row| row.len() != d) {
                    return Err(Error::Dimension(format!("matrix {k} is not square")));
                }
                Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixFamily::new(ms)
    }
}

impl From<MatrixFamily> for RawFamily {
    fn from(f: MatrixFamily) -> Self {
        RawFamily {
            matrices: f
                .matrices
                .iter()
                .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
        }
    }
}

impl MatrixFamily {
    pub fn new(matrices: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::Invalid("the family has no matrices".into()));
        };
        let d = first.nrows();
        if d < 2 {
            return Err(Error::Invalid(format!("dimension {d} < 2")));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!(
                    "matrix {k} is {}×{}, expected {d}×{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if !m.iter().all(|v| v.is_finite()) {
                return Err(Error::Invalid(format!("matrix {k} has non-finite entries")));
            }
        }
        Ok(MatrixFamily { matrices })
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn scaled(&self, c: f64) -> MatrixFamily {
        MatrixFamily {
            matrices: self.matrices.iter().map(|m| m * c).collect(),
        }
    }

    /// `A_{w_k} ⋯ A_{w_1}`: the first letter acts first.
    pub fn product(&self, word: &[usize]) -> DMatrix<f64> {
        let d = self.dim();
        word.iter()
            .fold(DMatrix::identity(d, d), |acc, &i| &self.matrices[i] * acc)
    }
}

/// `E(Ma, Mb)`.
pub fn image(m: &DMatrix<f64>, e: &Ellipse) -> Ellipse {
    let a = m * nalgebra::DVector::from_column_slice(e.a());
    let b = m * nalgebra::DVector::from_column_slice(e.b());
    Ellipse::new(a.as_slice().to_vec(), b.as_slice().to_vec()).expect("image of a valid ellipse")
}
