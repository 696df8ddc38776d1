use nalgebra::DMatrix;
use serde::Serialize;

use super::construction::kappa;
use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};

/// Sub-stochastic matrix of the not-yet-met pair chain, indexed by ordered
/// pairs `(x1, x2)` with `x1 != x2` in row-major order (diagonal skipped).
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    states: usize,
    pairs: Vec<(usize, usize)>,
    entries: DMatrix<f64>,
}

impl CouplingMatrix {
    /// Wraps an arbitrary nonnegative square matrix (used for diagnostics and
    /// tests of the spectral estimator). The pair map is left empty.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::InvalidArgument("coupling matrix must be square".into()));
        }
        if entries.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidArgument(
                "coupling matrix entries must be finite and nonnegative".into(),
            ));
        }
        Ok(CouplingMatrix {
            states: 0,
            pairs: Vec::new(),
            entries,
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of underlying chain states (0 for wrapped raw matrices).
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Row index of the ordered pair `(x1, x2)`.
    pub fn index_of(&self, x1: usize, x2: usize) -> Option<usize> {
        let p = self.states;
        if x1 >= p || x2 >= p || x1 == x2 {
            return None;
        }
        Some(x1 * (p - 1) + if x2 > x1 { x2 - 1 } else { x2 })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.entries.row(i).sum()
    }
}

/// Builds the `p(p-1) x p(p-1)` matrix with entries
/// `(P(x1,y1) - P(x1,y1)^P(x2,y1)) (P(x2,y2) - P(x1,y2)^P(x2,y2)) / (1 - kappa(x1,x2))`
/// over off-diagonal source and target pairs. Rows with `kappa = 1` are zero.
pub fn build_coupling_matrix(p: &StochasticMatrix) -> CouplingMatrix {
    let n = p.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
        .collect();
    let dim = pairs.len();
    let mut entries = DMatrix::zeros(dim, dim);
    for (i, &(x1, x2)) in pairs.iter().enumerate() {
        let k = kappa(p, x1, x2);
        if 1.0 - k <= 1e-15 {
            continue;
        }
        let left: Vec<f64> = (0..n)
            .map(|y| p.get(x1, y) - p.get(x1, y).min(p.get(x2, y)))
            .collect();
        let right: Vec<f64> = (0..n)
            .map(|y| p.get(x2, y) - p.get(x1, y).min(p.get(x2, y)))
            .collect();
        for (j, &(y1, y2)) in pairs.iter().enumerate() {
            entries[(i, j)] = left[y1] * right[y2] / (1.0 - k);
        }
    }
    CouplingMatrix {
        states: n,
        pairs,
        entries,
    }
}

/// Maximum row sum (all entries are nonnegative).
pub fn matrix_one_norm(m: &CouplingMatrix) -> f64 {
    (0..m.dim()).map(|i| m.row_sum(i)).fold(0.0, f64::max)
}

/// Gelfand estimate of the spectral radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    /// `||M^N||^(1/N)` at the largest power reached; an upper estimate of `r(M)`.
    pub radius: f64,
    /// Last decrease between successive estimates, floored at 0.
    pub residual: f64,
    /// Number of squarings performed.
    pub squarings: u32,
}

pub const DEFAULT_POWER_CAP: u64 = 1 << 20;

/// `r_k = ||M^(2^k)||^(1/2^k)` by repeated squaring, rescaling after each
/// squaring and tracking the log scale separately. Stops once `2^k` reaches
/// `power_cap` (rounded down to a power of two).
pub fn spectral_radius(m: &CouplingMatrix, power_cap: u64) -> Result<SpectralEstimate> {
    if m.dim() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let max_k = 63 - power_cap.max(1).leading_zeros();
    let norm = |a: &DMatrix<f64>| {
        (0..a.nrows())
            .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };

    let first = norm(m.entries());
    if !first.is_finite() {
        return Err(Error::Numeric("non-finite matrix norm".into()));
    }
    if first == 0.0 {
        return Ok(SpectralEstimate {
            radius: 0.0,
            residual: 0.0,
            squarings: 0,
        });
    }
    let mut a = m.entries() / first;
    let mut log_scale = first.ln();
    let mut estimate = first;
    let mut residual = 0.0;
    let mut power = 1.0_f64;
    for k in 1..=max_k {
        let b = &a * &a;
        power *= 2.0;
        let c = norm(&b);
        if !c.is_finite() {
            return Err(Error::Numeric(format!("non-finite norm after {k} squarings")));
        }
        if c == 0.0 {
            // Nilpotent.
            return Ok(SpectralEstimate {
                radius: 0.0,
                residual: 0.0,
                squarings: k,
            });
        }
        log_scale = 2.0 * log_scale + c.ln();
        a = b / c;
        let next = (log_scale / power).exp();
        residual = (estimate - next).max(0.0);
        estimate = next.min(estimate);
    }
    Ok(SpectralEstimate {
        radius: estimate,
        residual,
        squarings: max_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{builtin_example, example1_matrix};

    /// `(5 + sqrt 5) / 20`, the dominant eigenvalue of the Example 1 matrix
    /// (independent eigen-decomposition).
    const EXAMPLE1_RADIUS: f64 = 0.361_803_398_874_989_5;

    fn eig_radius(m: &DMatrix<f64>) -> f64 {
        m.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn example1_shape_and_rows() {
        let p = example1_matrix();
        let m = build_coupling_matrix(&p);
        assert_eq!(m.dim(), 12);
        for (i, &(a, b)) in m.pairs().iter().enumerate() {
            assert_eq!(m.index_of(a, b), Some(i));
            assert!(m.row_sum(i) <= 1.0 - kappa(&p, a, b) + 1e-9);
        }
        assert_eq!(m.index_of(1, 1), None);
    }

    #[test]
    fn identical_rows_give_zero_matrix() {
        let r = vec![0.2, 0.5, 0.3];
        let p = StochasticMatrix::from_rows(&[r.clone(), r.clone(), r]).unwrap();
        let m = build_coupling_matrix(&p);
        assert!(m.entries().iter().all(|v| *v == 0.0));
        assert_eq!(spectral_radius(&m, DEFAULT_POWER_CAP).unwrap().radius, 0.0);
    }

    #[test]
    fn example2_row_sums() {
        let p = builtin_example(2, 0.0).unwrap().linear_part();
        let m = build_coupling_matrix(&p);
        assert_eq!(m.dim(), 20);
        for (i, &(a, b)) in m.pairs().iter().enumerate() {
            // sum over all targets (including diagonal ones) equals 1 - kappa
            let k = kappa(&p, a, b);
            let full: f64 = (0..5)
                .flat_map(|y1| (0..5).map(move |y2| (y1, y2)))
                .map(|(y1, y2)| {
                    (p.get(a, y1) - p.get(a, y1).min(p.get(b, y1)))
                        * (p.get(b, y2) - p.get(a, y2).min(p.get(b, y2)))
                        / (1.0 - k)
                })
                .sum();
            assert!((full - (1.0 - k)).abs() < 1e-12);
            assert!(m.row_sum(i) <= full + 1e-12);
        }
    }

    #[test]
    fn spectral_examples() {
        let diag = CouplingMatrix::from_matrix(DMatrix::from_diagonal(
            &nalgebra::DVector::from_vec(vec![0.3, 0.1]),
        ))
        .unwrap();
        let est = spectral_radius(&diag, DEFAULT_POWER_CAP).unwrap();
        assert!((est.radius - 0.3).abs() < 1e-12);
        assert!((matrix_one_norm(&diag) - 0.3).abs() < 1e-15);

        let zero = CouplingMatrix::from_matrix(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(spectral_radius(&zero, DEFAULT_POWER_CAP).unwrap().radius, 0.0);
        assert_eq!(matrix_one_norm(&zero), 0.0);
    }

    #[test]
    fn example1_radius_matches_eigensolver() {
        let m = build_coupling_matrix(&example1_matrix());
        let est = spectral_radius(&m, DEFAULT_POWER_CAP).unwrap();
        assert!((eig_radius(m.entries()) - EXAMPLE1_RADIUS).abs() < 1e-12);
        assert!((est.radius - EXAMPLE1_RADIUS).abs() < 1e-5, "{est:?}");
        assert!(est.radius >= EXAMPLE1_RADIUS - 1e-12);
        assert!(est.residual < 1e-6);
        let norm = matrix_one_norm(&m);
        assert!(est.radius < norm && norm <= 1.0);
        let bound = 1.5 * (est.radius + est.residual);
        assert!((bound - 0.54).abs() < 0.005);
    }

    #[test]
    fn nilpotent_matrix() {
        let m = CouplingMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]))
            .unwrap();
        assert_eq!(spectral_radius(&m, 1 << 10).unwrap().radius, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CouplingMatrix::from_matrix(DMatrix::from_element(2, 2, -0.1)).is_err());
        let empty = CouplingMatrix::from_matrix(DMatrix::zeros(0, 0)).unwrap();
        assert!(spectral_radius(&empty, 16).is_err());
    }
}
