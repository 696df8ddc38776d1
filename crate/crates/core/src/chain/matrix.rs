use nalgebra::DMatrix;
use rand::Rng;

use super::distribution::{sample_index, Distribution};
use crate::error::{Error, Result};

/// Tolerance on each row's total mass.
pub const ROW_TOL: f64 = 1e-12;

/// Square row-stochastic matrix. States are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_stochastic(&m, ROW_TOL).map_err(Error::InvalidMatrix)?;
        Ok(StochasticMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidMatrix(format!("rows are not all of length {p}")));
        }
        StochasticMatrix::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Self {
        StochasticMatrix(DMatrix::identity(p, p))
    }

    /// Bypasses validation; callers have already checked the entries.
    pub(crate) fn new_unchecked(m: DMatrix<f64>) -> Self {
        StochasticMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0[(x, y)]
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        self.0.row(x).iter().copied().collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `mu^T P`.
    pub fn step(&self, mu: &Distribution) -> Result<Distribution> {
        if mu.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: mu.dim(),
            });
        }
        let p = self.dim();
        let out: Vec<f64> = (0..p)
            .map(|y| (0..p).map(|x| mu[x] * self.0[(x, y)]).sum())
            .collect();
        Distribution::renormalized(out)
    }

    /// `k`-th matrix power.
    pub fn power(&self, k: usize) -> StochasticMatrix {
        let p = self.dim();
        let mut acc = DMatrix::identity(p, p);
        for _ in 0..k {
            acc = &acc * &self.0;
        }
        StochasticMatrix(acc)
    }

    /// Draws the successor of state `x`.
    pub fn sample_next<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let row = self.row(x);
        sample_index(&row, rng)
    }

    /// Stationary law of the linear chain by direct elimination on
    /// `pi^T (P - I) = 0`, `sum pi = 1`. Requires a unique stationary law.
    pub fn stationary_exact(&self) -> Result<Distribution> {
        let p = self.dim();
        let mut a = self.0.transpose() - DMatrix::identity(p, p);
        for j in 0..p {
            a[(p - 1, j)] = 1.0;
        }
        let mut b = nalgebra::DVector::zeros(p);
        b[p - 1] = 1.0;
        let sol = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numeric("stationary system is singular".into()))?;
        Distribution::renormalized(sol.iter().copied().collect())
    }
}

pub(crate) fn check_stochastic(m: &DMatrix<f64>, tol: f64) -> std::result::Result<(), String> {
    if m.nrows() != m.ncols() {
        return Err(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
    }
    if m.nrows() < 2 {
        return Err("need at least 2 states".into());
    }
    for i in 0..m.nrows() {
        let mut total = 0.0;
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(format!("entry ({i}, {j}) = {v} not in [0, 1]"));
            }
            total += v;
        }
        if (total - 1.0).abs() > tol {
            return Err(format!("row {i} sums to {total}"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[
            vec![0.4, 0.2, 0.2, 0.2],
            vec![0.3, 0.4, 0.2, 0.1],
            vec![0.2, 0.2, 0.4, 0.2],
            vec![0.2, 0.1, 0.2, 0.5],
        ])
        .unwrap()
    }

    #[test]
    fn validation() {
        assert!(StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.2, 0.7]]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![1.2, -0.2], vec![0.5, 0.5]]).is_err());
        assert!(StochasticMatrix::from_rows(&[vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn stationary_solves_balance() {
        let p = example1();
        let pi = p.stationary_exact().unwrap();
        let next = p.step(&pi).unwrap();
        for (a, b) in pi.probs().iter().zip(next.probs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn power_matches_repeated_steps() {
        let p = example1();
        let mu = Distribution::vertex(4, 0).unwrap();
        let via_power = p.power(3).step(&mu).unwrap();
        let via_steps = p.step(&p.step(&p.step(&mu).unwrap()).unwrap()).unwrap();
        for (a, b) in via_power.probs().iter().zip(via_steps.probs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
