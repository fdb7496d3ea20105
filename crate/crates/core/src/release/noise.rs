use std::fmt;

use rand::seq::index;
use rand::Rng as _;

use super::ReleaseError;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    None,
    /// i.i.d. uniform on `[-beta, beta]`.
    BoundedUniform { beta: f64 },
    /// Exactly `floor(gamma * m)` entries get error `±gross_magnitude`; the rest
    /// uniform on `[-beta, beta]`.
    GrossPlusBounded {
        gamma: f64,
        beta: f64,
        gross_magnitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { kind: NoiseKind::None, seed: 0 }
    }

    pub fn bounded(beta: f64, seed: u64) -> Self {
        Self { kind: NoiseKind::BoundedUniform { beta }, seed }
    }

    pub fn gross(gamma: f64, beta: f64, gross_magnitude: f64, seed: u64) -> Self {
        Self {
            kind: NoiseKind::GrossPlusBounded { gamma, beta, gross_magnitude },
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ReleaseError> {
        let bad_beta = |beta: f64| !(beta >= 0.0 && beta.is_finite());
        match self.kind {
            NoiseKind::None => Ok(()),
            NoiseKind::BoundedUniform { beta } if bad_beta(beta) => {
                Err(ReleaseError::Noise(format!("beta must be >= 0, got {beta}")))
            }
            NoiseKind::BoundedUniform { .. } => Ok(()),
            NoiseKind::GrossPlusBounded { gamma, beta, gross_magnitude } => {
                if bad_beta(beta) {
                    Err(ReleaseError::Noise(format!("beta must be >= 0, got {beta}")))
                } else if !(0.0..1.0).contains(&gamma) {
                    Err(ReleaseError::Noise(format!("gamma must lie in [0, 1), got {gamma}")))
                } else if !(gross_magnitude >= 0.0 && gross_magnitude.is_finite()) {
                    Err(ReleaseError::Noise(format!("bad gross magnitude {gross_magnitude}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn kind_tag(&self) -> &'static str {
        match self.kind {
            NoiseKind::None => "none",
            NoiseKind::BoundedUniform { .. } => "bounded-uniform",
            NoiseKind::GrossPlusBounded { .. } => "gross-plus-bounded",
        }
    }

    /// `beta` of the spec, 0 for no noise.
    pub fn beta(&self) -> f64 {
        match self.kind {
            NoiseKind::None => 0.0,
            NoiseKind::BoundedUniform { beta } | NoiseKind::GrossPlusBounded { beta, .. } => beta,
        }
    }

    /// `gamma` of the spec, 0 unless gross corruption is configured.
    pub fn gamma(&self) -> f64 {
        match self.kind {
            NoiseKind::GrossPlusBounded { gamma, .. } => gamma,
            _ => 0.0,
        }
    }

    pub fn gross_magnitude(&self) -> f64 {
        match self.kind {
            NoiseKind::GrossPlusBounded { gross_magnitude, .. } => gross_magnitude,
            _ => 0.0,
        }
    }
}

impl fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NoiseKind::None => write!(f, "none"),
            NoiseKind::BoundedUniform { beta } => write!(f, "bounded-uniform(beta={beta})"),
            NoiseKind::GrossPlusBounded { gamma, beta, gross_magnitude } => write!(
                f,
                "gross-plus-bounded(gamma={gamma},beta={beta},magnitude={gross_magnitude})"
            ),
        }
    }
}

/// Noisy values together with the error that was added.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyVector {
    pub values: Vec<f64>,
    pub error: Vec<f64>,
}

fn uniform(r: &mut rng::Rng, beta: f64) -> f64 {
    if beta == 0.0 {
        0.0
    } else {
        r.random_range(-beta..=beta)
    }
}

pub fn apply_noise(y: &[f64], spec: &NoiseSpec) -> Result<NoisyVector, ReleaseError> {
    spec.validate()?;
    let m = y.len();
    let mut r = rng::seeded(spec.seed);
    let error: Vec<f64> = match spec.kind {
        NoiseKind::None => vec![0.0; m],
        NoiseKind::BoundedUniform { beta } => (0..m).map(|_| uniform(&mut r, beta)).collect(),
        NoiseKind::GrossPlusBounded { gamma, beta, gross_magnitude } => {
            let gross = (gamma * m as f64).floor() as usize;
            let mut err: Vec<f64> = (0..m).map(|_| uniform(&mut r, beta)).collect();
            for i in index::sample(&mut r, m, gross) {
                err[i] = if r.random::<bool>() { gross_magnitude } else { -gross_magnitude };
            }
            err
        }
    };
    let values = y.iter().zip(&error).map(|(v, e)| v + e).collect();
    Ok(NoisyVector { values, error })
}

/// Whether at least a `1 - a` fraction of entries have magnitude at most `b`.
pub fn is_small(error: &[f64], a: f64, b: f64) -> bool {
    let large = error.iter().filter(|e| e.abs() > b).count();
    large as f64 <= a * error.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_is_identity() {
        let y = vec![1.5, -2.0, 3.0];
        let out = apply_noise(&y, &NoiseSpec::none()).unwrap();
        assert_eq!(out.values, y);
        assert!(out.error.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn bounded_support_and_determinism() {
        let y = vec![0.0; 500];
        let spec = NoiseSpec::bounded(0.3, 17);
        let a = apply_noise(&y, &spec).unwrap();
        assert!(a.error.iter().all(|e| e.abs() <= 0.3));
        assert_eq!(a, apply_noise(&y, &spec).unwrap());
    }

    #[test]
    fn gross_count_is_exact() {
        let y = vec![0.0; 100];
        let out = apply_noise(&y, &NoiseSpec::gross(0.1, 0.5, 100.0, 3)).unwrap();
        assert_eq!(out.error.iter().filter(|e| e.abs() == 100.0).count(), 10);
        assert!(is_small(&out.error, 0.1, 0.5));
        assert!(!is_small(&out.error, 0.09, 0.5));
    }

    #[test]
    fn invalid_specs() {
        assert!(apply_noise(&[0.0], &NoiseSpec::bounded(-1.0, 0)).is_err());
        assert!(apply_noise(&[0.0], &NoiseSpec::gross(1.0, 0.1, 1.0, 0)).is_err());
        assert!(apply_noise(&[0.0], &NoiseSpec::gross(-0.1, 0.1, 1.0, 0)).is_err());
    }
}
