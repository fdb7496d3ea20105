//! Simulated mechanisms: exact statistics of a database `(U | s)` followed by
//! configurable noise.

mod bundle;
mod fit;
mod noise;

pub use bundle::{
    release_block_linreg, release_boolean, release_estimators, BooleanReleaseOptions,
    EntryStatus, EstimatorKind, ReleaseBundle, SimulatedRelease,
};
pub use fit::{
    ell2_variance, fit_block_linear_regression, fit_linear_regression, fit_logistic_regression,
    fit_mestimator_1d, loss_by_id, monte_carlo_ell2_variance, sigmoid, FitOptions, LogisticFit,
    LogisticLoss, Loss, MestFit, SquaredLoss, VARIANCE_FLOOR,
};
pub use noise::{apply_noise, is_small, NoiseKind, NoiseSpec, NoisyVector};

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use thiserror::Error;

use crate::boolfunc::{BoolFuncError, BooleanFunction};
use crate::randmat::{self, index_tuples, DenseMatrix, MatrixError, RowOrder, TauRandomSpec};
use crate::rng;

#[derive(Debug, Error)]
pub enum ReleaseError {
    #[error("U entry {value} at ({row},{col}) is not binary")]
    NonBinary { row: usize, col: usize, value: f64 },
    #[error("{rows} released entries exceeds the row cap of {cap}")]
    RowCap { rows: u128, cap: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid noise: {0}")]
    Noise(String),
    #[error("degenerate regressor: column is all zeros")]
    DegenerateRegressor,
    #[error("no convergence after {iterations} iterations: theta={theta}, |gradient|={gradient}")]
    NonConvergence {
        theta: f64,
        gradient: f64,
        iterations: usize,
    },
    #[error("no stationary point in range [-{cap}, {cap}]")]
    NoStationaryPoint { cap: f64 },
    #[error("unknown loss {0:?}")]
    UnknownLoss(String),
    #[error("cannot parse release: {0}")]
    Parse(String),
    #[error(transparent)]
    BoolFunc(#[from] BoolFuncError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which statistic a release publishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    /// `Σ_f(D)`: counts of a boolean function over all `k`-tuples of columns plus `s`.
    BooleanCount,
    /// Per-column linear-regression coefficients of `s` on `U`.
    LinReg,
    /// Per-column logistic-regression coefficients.
    LogReg,
    /// Per-column M-estimators of a named loss.
    MEst,
}

impl Mechanism {
    pub fn tag(self) -> &'static str {
        match self {
            Mechanism::BooleanCount => "boolean-count",
            Mechanism::LinReg => "linreg",
            Mechanism::LogReg => "logreg",
            Mechanism::MEst => "mest",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Mechanism {
    type Err = ReleaseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "boolean-count" | "boolean" => Ok(Mechanism::BooleanCount),
            "linreg" => Ok(Mechanism::LinReg),
            "logreg" => Ok(Mechanism::LogReg),
            "mest" => Ok(Mechanism::MEst),
            other => Err(ReleaseError::Parse(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Nonsensitive attributes `U` (`n x d`) and the secret column `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct Database {
    u: DenseMatrix,
    s: Vec<bool>,
}

impl Database {
    pub fn new(u: DenseMatrix, s: Vec<bool>) -> Result<Self, ReleaseError> {
        if u.rows() != s.len() {
            return Err(ReleaseError::Shape(format!(
                "U has {} rows but s has {} entries",
                u.rows(),
                s.len()
            )));
        }
        if !u.is_finite() {
            return Err(MatrixError::NonFinite.into());
        }
        Ok(Self { u, s })
    }

    /// Binary `U` with fair-coin entries and a uniformly random secret.
    pub fn synthetic_binary(n: usize, d: usize, seed: u64) -> Self {
        let u = randmat::gen_matrix(
            TauRandomSpec::Bernoulli01,
            n,
            d,
            rng::stream_seed(seed, rng::Stream::Data),
        );
        Self { u, s: random_bits(n, seed) }
    }

    /// Real `U` uniform on `[-1, 1]` and a uniformly random secret.
    pub fn synthetic_real(n: usize, d: usize, seed: u64) -> Self {
        let u = randmat::gen_matrix(
            TauRandomSpec::UniformSymmetric { half_width: 1.0 },
            n,
            d,
            rng::stream_seed(seed, rng::Stream::Data),
        );
        Self { u, s: random_bits(n, seed) }
    }

    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn d(&self) -> usize {
        self.u.cols()
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn s(&self) -> &[bool] {
        &self.s
    }

    /// Same `U`, complemented secret.
    pub fn with_complemented_secret(&self) -> Self {
        Self {
            u: self.u.clone(),
            s: self.s.iter().map(|b| !b).collect(),
        }
    }

    pub fn check_binary(&self) -> Result<(), ReleaseError> {
        check_binary(&self.u)
    }
}

fn random_bits(n: usize, seed: u64) -> Vec<bool> {
    let mut r = rng::seeded(rng::stream_seed(seed, rng::Stream::Secret));
    (0..n).map(|_| r.random::<bool>()).collect()
}

pub(crate) fn check_binary(u: &DenseMatrix) -> Result<(), ReleaseError> {
    for i in 0..u.rows() {
        for (j, &v) in u.row(i).iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                return Err(ReleaseError::NonBinary { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// `Σ_f(D)`: for every `J = (j_1..j_k)` in lexicographic order, the count
/// `sum_i f(U[i,j_1], ..., U[i,j_k], s_i)`.
pub fn sigma_f(db: &Database, f: &BooleanFunction, row_cap: usize) -> Result<Vec<i64>, ReleaseError> {
    db.check_binary()?;
    if f.arity() < 2 {
        return Err(BoolFuncError::TooSmall { needed: 2, got: f.arity() }.into());
    }
    let k = f.arity() - 1;
    let d = db.d();
    randmat::checked_row_count(d, k, row_cap).map_err(|e| match e {
        MatrixError::RowCap { rows, cap } => ReleaseError::RowCap { rows, cap },
        other => other.into(),
    })?;
    let u = db.u();
    let out = index_tuples(d, k, RowOrder::AllTuples)
        .iter()
        .map(|tuple| {
            (0..db.n())
                .filter(|&i| {
                    let mut point = (db.s[i] as usize) << k;
                    for (t, &j) in tuple.iter().enumerate() {
                        point |= (u.get(i, j) as usize) << t;
                    }
                    f.eval_index(point)
                })
                .count() as i64
        })
        .collect();
    Ok(out)
}
