use rand::Rng;
use serde::Serialize;

use crate::chain::{overlap, sample_index, Distribution, StochasticMatrix};
use crate::error::{Error, Result};

/// Below this residual mass two laws are treated as identical.
const FULL_OVERLAP_TOL: f64 = 1e-15;

/// The coupled quadruple `(eta1, eta2, xi, zeta)`.
///
/// `zeta == true` means the two coordinates have not met yet; once it turns
/// false it stays false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CouplingState {
    pub eta1: usize,
    pub eta2: usize,
    pub xi: usize,
    pub zeta: bool,
}

impl CouplingState {
    pub fn new(p: usize, eta1: usize, eta2: usize, xi: usize, zeta: bool) -> Result<Self> {
        if eta1 >= p || eta2 >= p || xi >= p {
            return Err(Error::InvalidArgument(format!(
                "coupling state ({eta1}, {eta2}, {xi}) out of range for p = {p}"
            )));
        }
        Ok(CouplingState {
            eta1,
            eta2,
            xi,
            zeta,
        })
    }

    /// Observed pair `(X~1, X~2)`.
    pub fn observed(&self) -> (usize, usize) {
        if self.zeta {
            (self.eta1, self.eta2)
        } else {
            (self.xi, self.xi)
        }
    }
}

/// Laws of `eta1`, `eta2`, `xi` and the overlap `q` for a pair of laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitLaws {
    pub eta1: Distribution,
    pub eta2: Distribution,
    pub xi: Distribution,
    pub q: f64,
}

/// `sum_x min(mu(x), nu(x))`.
pub fn overlap_q(mu: &Distribution, nu: &Distribution) -> Result<f64> {
    overlap(mu, nu)
}

/// Splits `(mu, nu)` into the residual laws `(mu - mu^nu)/(1-q)`,
/// `(nu - mu^nu)/(1-q)` and the common law `(mu^nu)/q`. The degenerate cases
/// `q = 1` and `q = 0` return `(mu, mu, mu)` and `(mu, nu, mu)`.
pub fn split_densities(mu: &Distribution, nu: &Distribution) -> Result<SplitLaws> {
    let q = overlap(mu, nu)?;
    let common: Vec<f64> = mu
        .probs()
        .iter()
        .zip(nu.probs())
        .map(|(a, b)| a.min(*b))
        .collect();
    let rest1: Vec<f64> = mu.probs().iter().zip(&common).map(|(a, m)| a - m).collect();
    let rest2: Vec<f64> = nu.probs().iter().zip(&common).map(|(b, m)| b - m).collect();
    let residual: f64 = rest1.iter().sum();

    if residual <= FULL_OVERLAP_TOL {
        return Ok(SplitLaws {
            eta1: mu.clone(),
            eta2: mu.clone(),
            xi: mu.clone(),
            q: 1.0,
        });
    }
    if q == 0.0 {
        return Ok(SplitLaws {
            eta1: mu.clone(),
            eta2: nu.clone(),
            xi: mu.clone(),
            q: 0.0,
        });
    }
    Ok(SplitLaws {
        eta1: Distribution::from_weights(rest1)?,
        eta2: Distribution::from_weights(rest2)?,
        xi: Distribution::from_weights(common)?,
        q,
    })
}

/// Row overlap `sum_y min(P(x1, y), P(x2, y))`.
pub fn kappa(p: &StochasticMatrix, x1: usize, x2: usize) -> f64 {
    (0..p.dim()).map(|y| p.get(x1, y).min(p.get(x2, y))).sum()
}

/// One-step laws of each coordinate of the quadruple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalLaws {
    pub eta1: Vec<f64>,
    pub eta2: Vec<f64>,
    pub xi: Vec<f64>,
    /// `[P(zeta' = 0), P(zeta' = 1)]`.
    pub zeta: [f64; 2],
    pub kappa: f64,
}

/// Transition laws of `(eta1, eta2, xi, zeta)` from state `s`, including the
/// resets at `kappa = 0` (xi follows `P(xi, .)`) and `kappa = 1`
/// (`eta1` and `eta2` both follow `P(eta1, .)`).
pub fn marginal_kernels(p: &StochasticMatrix, s: &CouplingState) -> MarginalLaws {
    let dim = p.dim();
    let (x1, x2) = (s.eta1, s.eta2);
    let k = kappa(p, x1, x2);
    let row1 = p.row(x1);
    let row2 = p.row(x2);
    let common: Vec<f64> = row1.iter().zip(&row2).map(|(a, b)| a.min(*b)).collect();
    let own_row = p.row(s.xi);

    let full = 1.0 - k <= FULL_OVERLAP_TOL;
    let (eta1, eta2) = if full {
        (row1.clone(), row1.clone())
    } else {
        let scale = 1.0 - k;
        (
            (0..dim).map(|y| (row1[y] - common[y]) / scale).collect(),
            (0..dim).map(|y| (row2[y] - common[y]) / scale).collect(),
        )
    };
    let xi = if s.zeta && k > 0.0 {
        common.iter().map(|c| c / k).collect()
    } else {
        own_row
    };
    let zeta = if s.zeta { [k, 1.0 - k] } else { [1.0, 0.0] };
    MarginalLaws {
        eta1,
        eta2,
        xi,
        zeta,
        kappa: k,
    }
}

/// Advances the quadruple one step.
pub fn step_coupled<R: Rng + ?Sized>(
    p: &StochasticMatrix,
    s: &CouplingState,
    rng: &mut R,
) -> CouplingState {
    let laws = marginal_kernels(p, s);
    let eta1 = sample_index(&laws.eta1, rng);
    let eta2 = sample_index(&laws.eta2, rng);
    let xi = sample_index(&laws.xi, rng);
    let zeta = s.zeta && rng.random::<f64>() < laws.zeta[1];
    CouplingState {
        eta1,
        eta2,
        xi,
        zeta,
    }
}

/// One draw of the quadruple for the laws `(mu, nu)`.
pub fn sample_coupled_state<R: Rng + ?Sized>(
    mu: &Distribution,
    nu: &Distribution,
    rng: &mut R,
) -> Result<CouplingState> {
    let split = split_densities(mu, nu)?;
    let zeta = rng.random::<f64>() < 1.0 - split.q;
    Ok(CouplingState {
        eta1: split.eta1.sample(rng),
        eta2: split.eta2.sample(rng),
        xi: split.xi.sample(rng),
        zeta,
    })
}

/// `(X~1, X~2, zeta)` with `X~1 ~ mu`, `X~2 ~ nu` and `P(X~1 = X~2) >= q`.
pub fn sample_coupled_pair<R: Rng + ?Sized>(
    mu: &Distribution,
    nu: &Distribution,
    rng: &mut R,
) -> Result<(usize, usize, bool)> {
    let s = sample_coupled_state(mu, nu, rng)?;
    let (a, b) = s.observed();
    Ok((a, b, s.zeta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledRun {
    pub x1: Vec<usize>,
    pub x2: Vec<usize>,
    pub zeta: Vec<bool>,
    /// First step with `zeta = false`, if any within the horizon.
    pub meet: Option<usize>,
}

/// Coupled pair of linear chains with common matrix `p`, started from
/// `(mu0, nu0)` and run for `n` steps.
pub fn simulate_coupled_chain<R: Rng + ?Sized>(
    p: &StochasticMatrix,
    mu0: &Distribution,
    nu0: &Distribution,
    n: usize,
    rng: &mut R,
) -> Result<CoupledRun> {
    if mu0.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: mu0.dim(),
        });
    }
    let mut s = sample_coupled_state(mu0, nu0, rng)?;
    let mut run = CoupledRun {
        x1: Vec::with_capacity(n + 1),
        x2: Vec::with_capacity(n + 1),
        zeta: Vec::with_capacity(n + 1),
        meet: None,
    };
    for t in 0..=n {
        if t > 0 {
            s = step_coupled(p, &s, rng);
        }
        let (a, b) = s.observed();
        run.x1.push(a);
        run.x2.push(b);
        run.zeta.push(s.zeta);
        if !s.zeta && run.meet.is_none() {
            run.meet = Some(t);
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::example1_matrix;
    use crate::rng::stream;

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn overlap_examples() {
        let mu = d(&[0.2, 0.3, 0.5]);
        assert!((overlap_q(&mu, &mu).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(overlap_q(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(overlap_q(&d(&[0.5, 0.5]), &d(&[0.75, 0.25])).unwrap(), 0.75);
    }

    #[test]
    fn split_example() {
        let s = split_densities(&d(&[0.5, 0.5]), &d(&[0.75, 0.25])).unwrap();
        assert_eq!(s.q, 0.75);
        assert!((s.xi[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.xi[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.eta1.probs(), &[0.0, 1.0]);
        assert_eq!(s.eta2.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn split_degenerate_branches() {
        let mu = d(&[0.2, 0.3, 0.5]);
        let s = split_densities(&mu, &mu).unwrap();
        assert_eq!((s.eta1.clone(), s.eta2.clone(), s.xi.clone(), s.q), (mu.clone(), mu.clone(), mu.clone(), 1.0));
        let a = d(&[0.5, 0.5, 0.0]);
        let b = d(&[0.0, 0.0, 1.0]);
        let s = split_densities(&a, &b).unwrap();
        assert_eq!((s.eta1, s.eta2, s.xi, s.q), (a.clone(), b, a, 0.0));
    }

    #[test]
    fn kappa_examples() {
        let p = example1_matrix();
        assert!((kappa(&p, 2, 2) - 1.0).abs() < 1e-15);
        assert!((kappa(&p, 1, 3) - 0.6).abs() < 1e-15);
        let disjoint = StochasticMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(kappa(&disjoint, 0, 1), 0.0);
    }

    #[test]
    fn marginal_kernel_examples() {
        let p = example1_matrix();
        // States 2 and 4 in 1-based numbering.
        let s = CouplingState::new(4, 1, 3, 0, true).unwrap();
        let m = marginal_kernels(&p, &s);
        let expect = [0.1 / 0.4, 0.3 / 0.4, 0.0, 0.0];
        for (a, b) in m.eta1.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((m.zeta[0] - 0.6).abs() < 1e-15);

        let met = CouplingState::new(4, 1, 3, 2, false).unwrap();
        assert_eq!(marginal_kernels(&p, &met).zeta, [1.0, 0.0]);
        assert_eq!(marginal_kernels(&p, &met).xi, p.row(2));

        let same = CouplingState::new(4, 2, 2, 0, true).unwrap();
        let m = marginal_kernels(&p, &same);
        assert_eq!(m.eta1, p.row(2));
        assert_eq!(m.eta2, p.row(2));
    }

    #[test]
    fn marginal_laws_are_distributions() {
        let p = example1_matrix();
        for x1 in 0..4 {
            for x2 in 0..4 {
                for zeta in [true, false] {
                    let s = CouplingState::new(4, x1, x2, (x1 + 1) % 4, zeta).unwrap();
                    let m = marginal_kernels(&p, &s);
                    for law in [&m.eta1, &m.eta2, &m.xi] {
                        assert!(law.iter().all(|v| *v >= 0.0));
                        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kappa_zero_resets_xi() {
        let p = StochasticMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.2, 0.3, 0.5],
        ])
        .unwrap();
        let s = CouplingState::new(3, 0, 1, 2, true).unwrap();
        let m = marginal_kernels(&p, &s);
        assert_eq!(m.kappa, 0.0);
        assert_eq!(m.xi, p.row(2));
        assert_eq!(m.zeta, [0.0, 1.0]);
    }

    #[test]
    fn coupled_pair_edge_cases() {
        let mut rng = stream(1);
        let mu = d(&[0.3, 0.7]);
        for _ in 0..200 {
            let (a, b, z) = sample_coupled_pair(&mu, &mu, &mut rng).unwrap();
            assert_eq!(a, b);
            assert!(!z);
        }
        let a = d(&[1.0, 0.0]);
        let b = d(&[0.0, 1.0]);
        for _ in 0..200 {
            let (x, y, z) = sample_coupled_pair(&a, &b, &mut rng).unwrap();
            assert!(z);
            assert_ne!(x, y);
        }
    }

    #[test]
    fn coupled_pair_meets_with_probability_q() {
        let mut rng = stream(2);
        let (mu, nu) = (d(&[0.5, 0.5]), d(&[0.75, 0.25]));
        let n = 100_000;
        let mut equal = 0;
        let mut first = 0;
        let mut second = 0;
        for _ in 0..n {
            let (a, b, _) = sample_coupled_pair(&mu, &nu, &mut rng).unwrap();
            equal += (a == b) as usize;
            first += (a == 0) as usize;
            second += (b == 0) as usize;
        }
        assert!((equal as f64 / n as f64 - 0.75).abs() < 0.01);
        assert!((first as f64 / n as f64 - 0.5).abs() < 0.01);
        assert!((second as f64 / n as f64 - 0.75).abs() < 0.01);
    }

    #[test]
    fn coupled_chain_edge_cases() {
        let p = example1_matrix();
        let mu = d(&[0.1, 0.2, 0.3, 0.4]);
        let run = simulate_coupled_chain(&p, &mu, &mu, 10, &mut stream(3)).unwrap();
        assert_eq!(run.meet, Some(0));
        assert_eq!(run.x1, run.x2);

        let id = StochasticMatrix::identity(3);
        let run = simulate_coupled_chain(
            &id,
            &Distribution::vertex(3, 0).unwrap(),
            &Distribution::vertex(3, 2).unwrap(),
            50,
            &mut stream(4),
        )
        .unwrap();
        assert_eq!(run.meet, None);
        assert!(run.x1.iter().zip(&run.x2).all(|(a, b)| a != b));
    }

    #[test]
    fn coupling_never_unmeets() {
        let p = example1_matrix();
        let mut rng = stream(5);
        for _ in 0..500 {
            let run = simulate_coupled_chain(
                &p,
                &Distribution::vertex(4, 0).unwrap(),
                &Distribution::vertex(4, 3).unwrap(),
                20,
                &mut rng,
            )
            .unwrap();
            if let Some(m) = run.meet {
                assert!(run.zeta[m..].iter().all(|z| !z));
                assert!(run.x1[m..] == run.x2[m..]);
            }
            // Before meeting the coordinates always differ.
            let stop = run.meet.unwrap_or(21);
            assert!((0..stop).all(|t| run.x1[t] != run.x2[t]));
        }
    }
}
