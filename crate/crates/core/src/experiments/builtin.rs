use nalgebra::DMatrix;

use crate::chain::{validate_kernel, PolynomialKernel, StochasticMatrix};
use crate::error::{Error, Result};

const EXAMPLE1: [[f64; 4]; 4] = [
    [0.4, 0.2, 0.2, 0.2],
    [0.3, 0.4, 0.2, 0.1],
    [0.2, 0.2, 0.4, 0.2],
    [0.2, 0.1, 0.2, 0.5],
];

const EXAMPLE2: [[f64; 5]; 5] = [
    [0.4, 0.3, 0.1, 0.1, 0.1],
    [0.2, 0.4, 0.2, 0.1, 0.1],
    [0.1, 0.2, 0.4, 0.2, 0.1],
    [0.1, 0.1, 0.2, 0.4, 0.2],
    [0.1, 0.1, 0.1, 0.3, 0.4],
];

/// Sign pattern of the `kappa` terms in the second coefficient of Example 2.
const EXAMPLE2_PERTURBATION: [[f64; 5]; 5] = [
    [1.0, -1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0, -1.0],
    [0.0, 0.0, 0.0, -1.0, 1.0],
];

/// How the row-3 entry `0.2 - kappa * mu(.)` of Example 2 is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Example2Variant {
    /// Driven by the row's own coordinate like every other entry.
    #[default]
    RowConsistent,
    /// Driven by coordinate 4. Row 3 then sums to `1 + kappa (mu3 - mu4)`,
    /// so the kernel is only valid where those coordinates coincide.
    CrossDriven,
}

fn matrix<const N: usize>(rows: &[[f64; N]; N]) -> DMatrix<f64> {
    DMatrix::from_fn(N, N, |i, j| rows[i][j])
}

/// Linear part of Example 1.
pub fn example1_matrix() -> StochasticMatrix {
    StochasticMatrix::new(matrix(&EXAMPLE1)).expect("example 1 is stochastic")
}

/// Linear part of Example 2.
pub fn example2_matrix() -> StochasticMatrix {
    StochasticMatrix::new(matrix(&EXAMPLE2)).expect("example 2 is stochastic")
}

/// Degree-2 kernel of built-in example `id` with perturbation size `kappa`.
///
/// Example 1 moves `kappa * mu1` of row 1 from state 1 to state 3.
/// Example 2 adds `kappa * mu_x` to each diagonal entry and removes it from
/// one neighbour in the same row.
pub fn builtin_example(id: u8, kappa: f64) -> Result<PolynomialKernel> {
    builtin_example_variant(id, kappa, Example2Variant::RowConsistent)
}

pub fn builtin_example_variant(
    id: u8,
    kappa: f64,
    variant: Example2Variant,
) -> Result<PolynomialKernel> {
    if !kappa.is_finite() {
        return Err(Error::InvalidArgument("kappa must be finite".into()));
    }
    let kernel = match id {
        1 => {
            let mut c2 = DMatrix::zeros(4, 4);
            c2[(0, 0)] = -kappa;
            c2[(0, 2)] = kappa;
            PolynomialKernel::new(vec![matrix(&EXAMPLE1), c2])?
        }
        2 => {
            let c2 = matrix(&EXAMPLE2_PERTURBATION) * kappa;
            let k = PolynomialKernel::new(vec![matrix(&EXAMPLE2), c2])?;
            match variant {
                Example2Variant::RowConsistent => k,
                Example2Variant::CrossDriven => {
                    let mut drivers: Vec<usize> =
                        (0..25).map(|i| i / 5).collect();
                    drivers[2 * 5 + 3] = 3;
                    return k.with_drivers(drivers);
                }
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown built-in example {other} (expected 1 or 2)"
            )))
        }
    };
    let report = validate_kernel(&kernel, 200)?;
    if !report.pass {
        return Err(Error::InvalidKernel(format!(
            "example {id} with kappa = {kappa} is not a transition kernel (min entry {})",
            report.min_entry
        )));
    }
    Ok(kernel)
}
