use nalgebra::DMatrix;
use rand::SeedableRng;
use serde::Serialize;

use super::distribution::Distribution;
use super::matrix::{check_stochastic, StochasticMatrix, ROW_TOL};
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Tolerance used when checking an evaluated kernel matrix.
pub const KERNEL_TOL: f64 = 1e-9;

/// Distribution-dependent transition kernel whose entries are polynomials in
/// a single coordinate of the current law:
///
/// `P_mu(x, y) = sum_{j=0}^{d-1} C_{j+1}(x, y) * mu(c(x, y))^j`
///
/// where the driver coordinate `c(x, y)` is the row state `x` unless an
/// explicit driver table was supplied. `C_1` is the linear part and must be
/// stochastic on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialKernel {
    coeff: Vec<DMatrix<f64>>,
    drivers: Option<Vec<usize>>,
}

impl PolynomialKernel {
    pub fn new(coeff: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = coeff
            .first()
            .ok_or_else(|| Error::InvalidKernel("degree must be at least 1".into()))?;
        check_stochastic(first, ROW_TOL)
            .map_err(|e| Error::InvalidKernel(format!("linear part: {e}")))?;
        let p = first.nrows();
        for (j, c) in coeff.iter().enumerate() {
            if c.nrows() != p || c.ncols() != p {
                return Err(Error::InvalidKernel(format!(
                    "coefficient {} is {}x{}, expected {p}x{p}",
                    j + 1,
                    c.nrows(),
                    c.ncols()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidKernel(format!(
                    "coefficient {} has a non-finite entry",
                    j + 1
                )));
            }
        }
        Ok(PolynomialKernel {
            coeff,
            drivers: None,
        })
    }

    /// Degree-1 kernel: a plain linear chain.
    pub fn linear(p: StochasticMatrix) -> Self {
        PolynomialKernel {
            coeff: vec![p.as_matrix().clone()],
            drivers: None,
        }
    }

    /// Overrides the driver coordinate of each entry (row-major `p*p` table).
    pub fn with_drivers(mut self, drivers: Vec<usize>) -> Result<Self> {
        let p = self.dim();
        if drivers.len() != p * p || drivers.iter().any(|&c| c >= p) {
            return Err(Error::InvalidKernel(format!(
                "driver table must hold {} indices below {p}",
                p * p
            )));
        }
        self.drivers = Some(drivers);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.coeff[0].nrows()
    }

    pub fn degree(&self) -> usize {
        self.coeff.len()
    }

    pub fn coefficients(&self) -> &[DMatrix<f64>] {
        &self.coeff
    }

    /// Linear part `C_1`.
    pub fn linear_part(&self) -> StochasticMatrix {
        StochasticMatrix::new_unchecked(self.coeff[0].clone())
    }

    /// True when every nonlinear coefficient vanishes.
    pub fn is_linear(&self) -> bool {
        self.coeff[1..].iter().all(|c| c.iter().all(|v| *v == 0.0))
    }

    fn driver(&self, x: usize, y: usize) -> usize {
        match &self.drivers {
            Some(t) => t[x * self.dim() + y],
            None => x,
        }
    }

    /// Entries of `P_mu` without validation.
    pub fn evaluate_raw(&self, mu: &Distribution) -> Result<DMatrix<f64>> {
        let p = self.dim();
        if mu.dim() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: mu.dim(),
            });
        }
        Ok(DMatrix::from_fn(p, p, |x, y| {
            let m = mu[self.driver(x, y)];
            // Horner in m.
            self.coeff
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * m + c[(x, y)])
        }))
    }

    /// `P_mu` as a validated stochastic matrix.
    pub fn evaluate(&self, mu: &Distribution) -> Result<StochasticMatrix> {
        let mut m = self.evaluate_raw(mu)?;
        let p = self.dim();
        for x in 0..p {
            let mut total = 0.0;
            for y in 0..p {
                let v = m[(x, y)];
                if v < -KERNEL_TOL {
                    return Err(Error::KernelInvalidAt {
                        mu: mu.probs().to_vec(),
                        row: x,
                        col: y,
                        reason: format!("is negative ({v})"),
                    });
                }
                if v < 0.0 {
                    m[(x, y)] = 0.0;
                }
                total += v;
            }
            if (total - 1.0).abs() > KERNEL_TOL {
                return Err(Error::KernelInvalidAt {
                    mu: mu.probs().to_vec(),
                    row: x,
                    col: p - 1,
                    reason: format!("row sums to {total}"),
                });
            }
        }
        Ok(StochasticMatrix::new_unchecked(m))
    }
}

/// Outcome of [`validate_kernel`].
#[derive(Debug, Clone, Serialize)]
pub struct KernelValidation {
    /// Smallest entry seen over all probed distributions.
    pub min_entry: f64,
    /// Largest `|row sum - 1|` seen.
    pub max_row_deviation: f64,
    /// Distribution at which the smallest entry occurred.
    pub worst_mu: Vec<f64>,
    pub points_checked: usize,
    pub pass: bool,
}

/// Probes `P_mu` at every simplex vertex, the barycenter, and `grid` flat
/// random simplex points (fixed internal seed).
pub fn validate_kernel(kernel: &PolynomialKernel, grid: usize) -> Result<KernelValidation> {
    if grid == 0 {
        return Err(Error::InvalidArgument("grid must be >= 1".into()));
    }
    let p = kernel.dim();
    let mut rng = Stream::seed_from_u64(0x5eed_6a1d);
    let mut points: Vec<Distribution> = (0..p)
        .map(|i| Distribution::vertex(p, i))
        .collect::<Result<_>>()?;
    points.push(Distribution::uniform(p)?);
    for _ in 0..grid {
        points.push(Distribution::random(p, &mut rng)?);
    }

    let mut report = KernelValidation {
        min_entry: f64::INFINITY,
        max_row_deviation: 0.0,
        worst_mu: points[0].probs().to_vec(),
        points_checked: points.len(),
        pass: true,
    };
    for mu in &points {
        let m = kernel.evaluate_raw(mu)?;
        for x in 0..p {
            let row = m.row(x);
            let dev = (row.sum() - 1.0).abs();
            report.max_row_deviation = report.max_row_deviation.max(dev);
            let lo = row.min();
            if lo < report.min_entry {
                report.min_entry = lo;
                report.worst_mu = mu.probs().to_vec();
            }
        }
    }
    report.pass = report.min_entry >= -KERNEL_TOL && report.max_row_deviation <= KERNEL_TOL;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::builtin_example;

    #[test]
    fn example1_row_one_at_first_vertex() {
        let k = builtin_example(1, 0.1).unwrap();
        let m = k.evaluate(&Distribution::vertex(4, 0).unwrap()).unwrap();
        let expect = [
            [0.3, 0.2, 0.3, 0.2],
            [0.3, 0.4, 0.2, 0.1],
            [0.2, 0.2, 0.4, 0.2],
            [0.2, 0.1, 0.2, 0.5],
        ];
        for x in 0..4 {
            for y in 0..4 {
                assert!((m.get(x, y) - expect[x][y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn example2_at_barycenter() {
        let k = builtin_example(2, 0.1).unwrap();
        let m = k.evaluate(&Distribution::uniform(5).unwrap()).unwrap();
        assert!((m.get(0, 0) - 0.42).abs() < 1e-15);
        assert!((m.get(0, 1) - 0.28).abs() < 1e-15);
    }

    #[test]
    fn degree_one_evaluates_to_linear_part() {
        let p = builtin_example(1, 0.0).unwrap().linear_part();
        let k = PolynomialKernel::linear(p.clone());
        let mu = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(k.evaluate(&mu).unwrap(), p);
        assert!(validate_kernel(&k, 50).unwrap().pass);
    }

    #[test]
    fn validation_examples() {
        let report = validate_kernel(&builtin_example(1, 0.1).unwrap(), 1000).unwrap();
        assert!(report.pass);
        assert!((report.min_entry - 0.1).abs() < 1e-12);

        let p = builtin_example(1, 0.0).unwrap().linear_part();
        let mut c2 = DMatrix::zeros(4, 4);
        c2[(0, 0)] = -1.0;
        let bad = PolynomialKernel::new(vec![p.as_matrix().clone(), c2]).unwrap();
        let report = validate_kernel(&bad, 100).unwrap();
        assert!(!report.pass);
        assert_eq!(report.worst_mu, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            bad.evaluate(&Distribution::vertex(4, 0).unwrap()),
            Err(Error::KernelInvalidAt { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn rejects_malformed_coefficients() {
        assert!(PolynomialKernel::new(vec![]).is_err());
        let p = builtin_example(1, 0.0).unwrap().linear_part();
        assert!(PolynomialKernel::new(vec![p.as_matrix().clone(), DMatrix::zeros(3, 3)]).is_err());
        assert!(PolynomialKernel::new(vec![DMatrix::from_element(2, 2, 0.6)]).is_err());
    }
}
