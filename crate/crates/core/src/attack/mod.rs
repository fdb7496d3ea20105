//! Reconstruction attacks: turn a release into a linear system in the secret
//! column and decode it.

mod builders;

pub use builders::{
    build_block_linreg_system, build_boolean_system, build_linreg_system, build_logreg_system,
    build_mest_system, build_pm_boolean_system,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::boolfunc::BooleanFunction;
use crate::decode::{
    l1_decode_with, least_squares_decode, DecodeError, DecodeResult, L1Options, LinearSystem,
    LpCertificate,
};
use crate::randmat::{MatrixError, DEFAULT_ROW_CAP};
use crate::release::{
    loss_by_id, release_block_linreg, release_boolean, release_estimators, BooleanReleaseOptions,
    Database, EstimatorKind, FitOptions, Mechanism, NoiseKind, NoiseSpec, ReleaseBundle,
    ReleaseError, SimulatedRelease,
};
use crate::rng::{derive_seed, stream_seed, Stream};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("config error: {0}")]
    Config(String),
    #[error("release stage: {0}")]
    Release(#[from] ReleaseError),
    #[error("build stage: {0}")]
    Build(String),
    #[error("decode stage: {0}")]
    Decode(#[from] DecodeError),
}

impl From<MatrixError> for AttackError {
    fn from(e: MatrixError) -> Self {
        AttackError::Build(e.to_string())
    }
}

impl From<crate::boolfunc::BoolFuncError> for AttackError {
    fn from(e: crate::boolfunc::BoolFuncError) -> Self {
        AttackError::Build(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Decoder {
    #[default]
    Ls,
    Lp,
}

impl Decoder {
    pub fn tag(self) -> &'static str {
        match self {
            Decoder::Ls => "ls",
            Decoder::Lp => "lp",
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Decoder {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ls" | "least-squares" => Ok(Decoder::Ls),
            "lp" | "l1" => Ok(Decoder::Lp),
            other => Err(AttackError::Config(format!("unknown decoder {other:?}"))),
        }
    }
}

/// What gets released.
#[derive(Debug, Clone, PartialEq)]
pub enum MechanismConfig {
    BooleanCount { f: BooleanFunction },
    /// `k = 1` is the per-column estimator; larger `k` regresses on blocks of columns.
    LinReg { k: usize },
    LogReg,
    MEst { loss: String },
}

impl MechanismConfig {
    pub fn mechanism(&self) -> Mechanism {
        match self {
            MechanismConfig::BooleanCount { .. } => Mechanism::BooleanCount,
            MechanismConfig::LinReg { .. } => Mechanism::LinReg,
            MechanismConfig::LogReg => Mechanism::LogReg,
            MechanismConfig::MEst { .. } => Mechanism::MEst,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            MechanismConfig::BooleanCount { f } => f.arity() - 1,
            MechanismConfig::LinReg { k } => *k,
            _ => 1,
        }
    }

    fn is_boolean(&self) -> bool {
        matches!(self, MechanismConfig::BooleanCount { .. })
    }

    pub fn validate(&self, decoder: Decoder) -> Result<(), AttackError> {
        match self {
            MechanismConfig::BooleanCount { f } if f.arity() < 2 => {
                Err(AttackError::Config("f needs at least two variables".into()))
            }
            MechanismConfig::LinReg { k: 0 } => Err(AttackError::Config("k must be positive".into())),
            MechanismConfig::MEst { loss } => {
                loss_by_id(loss).map_err(|e| AttackError::Config(e.to_string()))?;
                if decoder == Decoder::Lp {
                    return Err(AttackError::Config(
                        "the M-estimator attack supports least squares only".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackOptions {
    pub fit: FitOptions,
    pub l1: L1Options,
    pub row_cap: usize,
}

impl Default for AttackOptions {
    fn default() -> Self {
        Self { fit: FitOptions::default(), l1: L1Options::default(), row_cap: DEFAULT_ROW_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    pub mechanism: Mechanism,
    pub decoder: Decoder,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub s_hat: Vec<bool>,
    pub hamming: usize,
    pub hamming_fraction: f64,
    pub sigma_min: f64,
    pub rows_used: usize,
    pub rows_dropped: usize,
    /// `max_i |e_i|` of the system error `y - b - A s` over kept rows.
    pub realized_max_error: f64,
    /// `4 m β^2 / σ_min^2` with the realized `β`; least squares only.
    pub ls_bound: Option<f64>,
    pub lp: Option<LpCertificate>,
    pub wall_ms: f64,
}

pub const ATTACK_CSV_HEADER: &str =
    "mechanism,decoder,n,d,k,beta,gamma,seed,hamming_fraction,sigma_min,wall_ms";

impl AttackReport {
    pub fn csv_row(&self, with_timing: bool) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.mechanism,
            self.decoder,
            self.n,
            self.d,
            self.k,
            self.noise.beta(),
            self.noise.gamma(),
            self.seed,
            self.hamming_fraction,
            self.sigma_min,
            if with_timing { format!("{:.3}", self.wall_ms) } else { String::new() }
        )
    }
}

pub fn hamming(a: &[bool], b: &[bool]) -> Result<usize, AttackError> {
    if a.len() != b.len() {
        return Err(AttackError::Build(format!("bit vectors of lengths {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

pub fn hamming_fraction(a: &[bool], b: &[bool]) -> Result<f64, AttackError> {
    let h = hamming(a, b)?;
    Ok(if a.is_empty() { 0.0 } else { h as f64 / a.len() as f64 })
}

/// The linear system an attacker derives from a release and the public columns `U`.
pub fn build_system(
    u: &crate::randmat::DenseMatrix,
    mech: &MechanismConfig,
    bundle: &ReleaseBundle,
    decoder: Decoder,
) -> Result<LinearSystem, AttackError> {
    let mask = bundle.unusable_mask();
    match mech {
        MechanismConfig::BooleanCount { f } => {
            let y = bundle.values_on_count_scale(u.rows());
            let mut sys = match decoder {
                Decoder::Ls => build_boolean_system(u, f, &y)?,
                Decoder::Lp => build_pm_boolean_system(u, f, &y)?,
            };
            if mask.iter().any(|&m| m) {
                sys = sys.with_mask(mask)?;
            }
            Ok(sys)
        }
        MechanismConfig::LinReg { k: 1 } => build_linreg_system(u, &bundle.values, Some(&mask)),
        MechanismConfig::LinReg { k } => build_block_linreg_system(u, &bundle.values, *k, Some(&mask)),
        MechanismConfig::LogReg => build_logreg_system(u, &bundle.values, Some(&mask)),
        MechanismConfig::MEst { loss } => {
            let loss = loss_by_id(loss)?;
            build_mest_system(u, &bundle.values, loss.as_ref(), Some(&mask))
        }
    }
}

pub fn decode(sys: &LinearSystem, decoder: Decoder, opts: &AttackOptions) -> Result<DecodeResult, AttackError> {
    Ok(match decoder {
        Decoder::Ls => least_squares_decode(sys)?,
        Decoder::Lp => l1_decode_with(sys, &opts.l1)?,
    })
}

pub fn simulate_release(
    db: &Database,
    mech: &MechanismConfig,
    noise: &NoiseSpec,
    opts: &AttackOptions,
) -> Result<SimulatedRelease, AttackError> {
    Ok(match mech {
        MechanismConfig::BooleanCount { f } => release_boolean(
            db,
            f,
            noise,
            &BooleanReleaseOptions { normalize: false, row_cap: opts.row_cap },
        )?,
        MechanismConfig::LinReg { k: 1 } => release_estimators(db, &EstimatorKind::Linear, noise, &opts.fit)?,
        MechanismConfig::LinReg { k } => release_block_linreg(db, *k, noise)?,
        MechanismConfig::LogReg => release_estimators(db, &EstimatorKind::Logistic, noise, &opts.fit)?,
        MechanismConfig::MEst { loss } => {
            release_estimators(db, &EstimatorKind::MEstimator(loss.clone()), noise, &opts.fit)?
        }
    })
}

/// Release, build, decode and score against the true secret.
pub fn run_attack(
    db: &Database,
    mech: &MechanismConfig,
    noise: &NoiseSpec,
    decoder: Decoder,
    opts: &AttackOptions,
) -> Result<AttackReport, AttackError> {
    mech.validate(decoder)?;
    let start = Instant::now();
    let release = simulate_release(db, mech, noise, opts)?;
    let sys = build_system(db.u(), mech, &release.bundle, decoder)?;
    let result = decode(&sys, decoder, opts)?;

    let truth: Vec<f64> = db.s().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let pred = sys.a.mul_vec(&truth);
    let realized_max_error = sys
        .kept_rows()
        .iter()
        .map(|&i| (sys.y[i] - sys.b[i] - pred[i]).abs())
        .fold(0.0, f64::max);
    let ls_bound = (decoder == Decoder::Ls).then(|| {
        4.0 * result.rows_used as f64 * realized_max_error.powi(2) / result.sigma_min.powi(2)
    });
    let h = hamming(&result.s_bits, db.s())?;
    Ok(AttackReport {
        mechanism: mech.mechanism(),
        decoder,
        n: db.n(),
        d: db.d(),
        k: mech.k(),
        noise: *noise,
        seed: noise.seed,
        hamming_fraction: h as f64 / db.n().max(1) as f64,
        hamming: h,
        s_hat: result.s_bits,
        sigma_min: result.sigma_min,
        rows_used: result.rows_used,
        rows_dropped: result.rows_dropped,
        realized_max_error,
        ls_bound,
        lp: result.lp,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One simulated trial: everything random is derived from `(master_seed, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub mechanism: MechanismConfig,
    pub decoder: Decoder,
    pub n: usize,
    pub d: usize,
    pub noise: NoiseKind,
    pub options: AttackOptions,
}

impl TrialSpec {
    pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
        derive_seed(master_seed, trial)
    }

    pub fn database(&self, trial_seed: u64) -> Database {
        if self.mechanism.is_boolean() {
            Database::synthetic_binary(self.n, self.d, trial_seed)
        } else {
            Database::synthetic_real(self.n, self.d, trial_seed)
        }
    }

    pub fn run(&self, trial_seed: u64) -> Result<AttackReport, AttackError> {
        let db = self.database(trial_seed);
        let noise = NoiseSpec { kind: self.noise, seed: stream_seed(trial_seed, Stream::Noise) };
        let mut report = run_attack(&db, &self.mechanism, &noise, self.decoder, &self.options)?;
        report.seed = trial_seed;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mechanism: MechanismConfig, decoder: Decoder, n: usize, d: usize, noise: NoiseKind) -> TrialSpec {
        TrialSpec { mechanism, decoder, n, d, noise, options: AttackOptions::default() }
    }

    #[test]
    fn noiseless_boolean_recovers_exactly() {
        let f = BooleanFunction::named("and3").unwrap();
        for decoder in [Decoder::Ls, Decoder::Lp] {
            let s = spec(MechanismConfig::BooleanCount { f: f.clone() }, decoder, 30, 12, NoiseKind::None);
            let r = s.run(7).unwrap();
            assert_eq!(r.hamming, 0, "{decoder}");
            assert!(r.realized_max_error < 1e-9);
        }
    }

    #[test]
    fn noiseless_estimators_recover_exactly() {
        for mech in [
            MechanismConfig::LinReg { k: 1 },
            MechanismConfig::LinReg { k: 2 },
            MechanismConfig::LogReg,
            MechanismConfig::MEst { loss: "squared".into() },
            MechanismConfig::MEst { loss: "logistic".into() },
        ] {
            let r = spec(mech.clone(), Decoder::Ls, 30, 60, NoiseKind::None).run(3).unwrap();
            assert_eq!(r.hamming, 0, "{mech:?}");
        }
    }

    #[test]
    fn ls_bound_holds() {
        let f = BooleanFunction::named("and3").unwrap();
        let s = spec(
            MechanismConfig::BooleanCount { f },
            Decoder::Ls,
            20,
            20,
            NoiseKind::BoundedUniform { beta: 3.0 },
        );
        for t in 0..5 {
            let r = s.run(TrialSpec::trial_seed(11, t)).unwrap();
            assert!(r.hamming as f64 <= r.ls_bound.unwrap() + 1e-9);
        }
    }

    #[test]
    fn mest_lp_rejected() {
        let mech = MechanismConfig::MEst { loss: "squared".into() };
        assert!(matches!(mech.validate(Decoder::Lp), Err(AttackError::Config(_))));
        assert!(MechanismConfig::MEst { loss: "huber".into() }.validate(Decoder::Ls).is_err());
    }

    #[test]
    fn hamming_helpers() {
        assert_eq!(hamming_fraction(&[true, false, true, true], &[true, true, true, false]).unwrap(), 0.5);
        assert!(hamming(&[true], &[]).is_err());
    }

    #[test]
    fn trials_are_deterministic() {
        let s = spec(MechanismConfig::LogReg, Decoder::Lp, 20, 40, NoiseKind::BoundedUniform { beta: 0.01 });
        assert_eq!(s.run(5).unwrap().s_hat, s.run(5).unwrap().s_hat);
    }

    #[test]
    fn decoder_parse() {
        assert_eq!("LP".parse::<Decoder>().unwrap(), Decoder::Lp);
        assert!("qp".parse::<Decoder>().is_err());
    }
}
