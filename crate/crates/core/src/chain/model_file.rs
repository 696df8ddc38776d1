//! JSON model files: `{ "p": int, "degree": int, "coeff": [C_1, ..., C_d] }`.
//!
//! Each coefficient matrix is a row-major array, either flat (`p*p` numbers)
//! or nested (`p` rows of `p` numbers). Unknown keys are rejected.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::PolynomialKernel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixLiteral {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub p: usize,
    pub degree: usize,
    pub coeff: Vec<MatrixLiteral>,
}

impl MatrixLiteral {
    fn to_matrix(&self, p: usize, which: usize) -> Result<DMatrix<f64>> {
        let flat: Vec<f64> = match self {
            MatrixLiteral::Flat(v) => v.clone(),
            MatrixLiteral::Nested(rows) => {
                if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                    return Err(Error::Parse(format!(
                        "coeff[{which}] must have {p} rows of {p} entries"
                    )));
                }
                rows.concat()
            }
        };
        if flat.len() != p * p {
            return Err(Error::Parse(format!(
                "coeff[{which}] has {} entries, expected {}",
                flat.len(),
                p * p
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("coeff[{which}] has a non-finite entry")));
        }
        Ok(DMatrix::from_row_slice(p, p, &flat))
    }
}

impl ModelSpec {
    pub fn from_kernel(kernel: &PolynomialKernel) -> Self {
        let p = kernel.dim();
        ModelSpec {
            p,
            degree: kernel.degree(),
            coeff: kernel
                .coefficients()
                .iter()
                .map(|c| {
                    MatrixLiteral::Nested((0..p).map(|i| c.row(i).iter().copied().collect()).collect())
                })
                .collect(),
        }
    }

    pub fn to_kernel(&self) -> Result<PolynomialKernel> {
        if self.p < 2 {
            return Err(Error::Parse(format!("p must be >= 2, got {}", self.p)));
        }
        if self.degree < 1 || self.degree != self.coeff.len() {
            return Err(Error::Parse(format!(
                "degree {} does not match {} coefficient matrices",
                self.degree,
                self.coeff.len()
            )));
        }
        let mats = self
            .coeff
            .iter()
            .enumerate()
            .map(|(j, m)| m.to_matrix(self.p, j))
            .collect::<Result<Vec<_>>>()?;
        PolynomialKernel::new(mats)
    }
}

pub fn parse_model(json: &str) -> Result<PolynomialKernel> {
    let spec: ModelSpec = serde_json::from_str(json)?;
    spec.to_kernel()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PolynomialKernel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

pub fn model_to_json(kernel: &PolynomialKernel) -> String {
    serde_json::to_string_pretty(&ModelSpec::from_kernel(kernel)).expect("model spec serializes")
}
