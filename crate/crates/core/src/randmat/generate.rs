use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use super::{DenseMatrix, MatrixError};
use crate::rng;

/// Entry distribution for random matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRandomSpec {
    /// `{0,1}` with probability 1/2 each. Not tau-random: the mean is 1/2.
    Bernoulli01,
    /// `{-1,1}` with probability 1/2 each; tau = 1.
    Rademacher,
    /// Uniform on `[-w, w]` with `0 < w <= 1`; tau = w / sqrt(3).
    UniformSymmetric { half_width: f64 },
}

impl TauRandomSpec {
    /// Standard deviation of a centered entry; `None` for the non-centered kind.
    pub fn tau(&self) -> Option<f64> {
        match *self {
            TauRandomSpec::Bernoulli01 => None,
            TauRandomSpec::Rademacher => Some(1.0),
            TauRandomSpec::UniformSymmetric { half_width } => Some(half_width / 3f64.sqrt()),
        }
    }

    pub fn is_tau_random(&self) -> bool {
        self.tau().is_some()
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        if let TauRandomSpec::UniformSymmetric { half_width } = *self {
            if !(half_width > 0.0 && half_width <= 1.0) {
                return Err(MatrixError::Shape(format!(
                    "uniform half-width {half_width} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut rng::Rng) -> f64 {
        match *self {
            TauRandomSpec::Bernoulli01 => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    0.0
                }
            }
            TauRandomSpec::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            TauRandomSpec::UniformSymmetric { half_width } => {
                rng.random_range(-half_width..=half_width)
            }
        }
    }
}

impl fmt::Display for TauRandomSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauRandomSpec::Bernoulli01 => f.write_str("bernoulli01"),
            TauRandomSpec::Rademacher => f.write_str("rademacher"),
            TauRandomSpec::UniformSymmetric { half_width } => write!(f, "uniform({half_width})"),
        }
    }
}

impl FromStr for TauRandomSpec {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let spec = match s {
            "bernoulli01" => TauRandomSpec::Bernoulli01,
            "rademacher" => TauRandomSpec::Rademacher,
            "uniform" => TauRandomSpec::UniformSymmetric { half_width: 1.0 },
            _ => {
                let inner = s
                    .strip_prefix("uniform(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| MatrixError::Parse(format!("unknown distribution {s:?}")))?;
                let half_width = inner
                    .parse()
                    .map_err(|_| MatrixError::Parse(format!("bad half-width {inner:?}")))?;
                TauRandomSpec::UniformSymmetric { half_width }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// A `d x n` matrix with i.i.d. entries, deterministic in `seed`. Entries are drawn
/// in row-major order.
pub fn gen_matrix(spec: TauRandomSpec, d: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng::seeded(seed);
    DenseMatrix::from_fn(d, n, |_, _| spec.sample(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = gen_matrix(TauRandomSpec::Bernoulli01, 3, 3, 42);
        let b = gen_matrix(TauRandomSpec::Bernoulli01, 3, 3, 42);
        assert_eq!(a, b);
        assert!(a.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        assert_ne!(a, gen_matrix(TauRandomSpec::Bernoulli01, 3, 3, 43));
    }

    #[test]
    fn rademacher_mean_is_small() {
        // std of the mean is 1/sqrt(1000) ~ 0.032, so 0.1 is > 3 sigma
        for seed in 0..20 {
            let m = gen_matrix(TauRandomSpec::Rademacher, 1000, 1, seed);
            let mean = m.as_slice().iter().sum::<f64>() / 1000.0;
            assert!(mean.abs() <= 0.1, "seed {seed}: mean {mean}");
        }
    }

    #[test]
    fn uniform_support() {
        let m = gen_matrix(TauRandomSpec::UniformSymmetric { half_width: 1.0 }, 50, 40, 9);
        assert!(m.as_slice().iter().all(|v| (-1.0..=1.0).contains(v)));
        let w = gen_matrix(TauRandomSpec::UniformSymmetric { half_width: 0.25 }, 50, 40, 9);
        assert!(w.as_slice().iter().all(|v| v.abs() <= 0.25));
    }

    #[test]
    fn declared_tau() {
        assert_eq!(TauRandomSpec::Rademacher.tau(), Some(1.0));
        assert!(!TauRandomSpec::Bernoulli01.is_tau_random());
        let t = TauRandomSpec::UniformSymmetric { half_width: 0.6 }.tau().unwrap();
        assert!((t - 0.6 / 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn parse_and_display() {
        for text in ["bernoulli01", "rademacher", "uniform(0.5)"] {
            let spec: TauRandomSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("uniform(1.5)".parse::<TauRandomSpec>().is_err());
        assert!("gaussian".parse::<TauRandomSpec>().is_err());
    }
}
