use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::fit::{
    ell2_variance, fit_block_linear_regression, fit_linear_regression, fit_logistic_regression,
    fit_mestimator_1d, loss_by_id, FitOptions, VARIANCE_FLOOR,
};
use super::noise::{apply_noise, NoiseSpec};
use super::{sigma_f, Database, Mechanism, ReleaseError};
use crate::boolfunc::BooleanFunction;
use crate::randmat::{DenseMatrix, DEFAULT_ROW_CAP};
use crate::rng::GENERATOR_ID;

/// Fit outcome for one released entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Ok,
    /// Logistic fit clamped at the cap; the value is released but unreliable.
    Separated,
    /// The fitter failed; no value is released.
    Failed,
}

/// A released vector plus everything needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseBundle {
    pub mechanism: Mechanism,
    pub k: usize,
    pub values: Vec<Option<f64>>,
    pub status: Vec<EntryStatus>,
    /// Boolean counts divided by `n`.
    pub normalized: bool,
    pub metadata: BTreeMap<String, String>,
}

/// A bundle together with the noiseless values and the added error, for tests and audits.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRelease {
    pub bundle: ReleaseBundle,
    pub exact: Vec<Option<f64>>,
    pub error: Vec<f64>,
}

impl ReleaseBundle {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries the attack should not use: failed or separated fits.
    pub fn unusable_mask(&self) -> Vec<bool> {
        self.status.iter().map(|s| *s != EntryStatus::Ok).collect()
    }

    /// Released values on the count scale (undoing normalization), with missing
    /// entries as `NaN`.
    pub fn values_on_count_scale(&self, n: usize) -> Vec<f64> {
        let scale = if self.normalized { n as f64 } else { 1.0 };
        self.values.iter().map(|v| v.map_or(f64::NAN, |x| x * scale)).collect()
    }

    /// `#schema=1`, the `index,value` header, then one line per entry; missing
    /// values are written as an empty field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#schema=1")?;
        writeln!(out, "index,value")?;
        for (i, v) in self.values.iter().enumerate() {
            match v {
                Some(x) => writeln!(out, "{i},{x}")?,
                None => writeln!(out, "{i},")?,
            }
        }
        Ok(())
    }

    /// `key=value` lines; entry statuses go under `separated` and `failed` as index lists.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut meta = self.metadata.clone();
        meta.insert("mechanism".into(), self.mechanism.tag().into());
        meta.insert("k".into(), self.k.to_string());
        meta.insert("normalized".into(), self.normalized.to_string());
        for (key, which) in [("separated", EntryStatus::Separated), ("failed", EntryStatus::Failed)] {
            let idx: Vec<String> = self
                .status
                .iter()
                .enumerate()
                .filter(|(_, s)| **s == which)
                .map(|(i, _)| i.to_string())
                .collect();
            meta.insert(key.into(), idx.join(";"));
        }
        for (k, v) in &meta {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn read(csv: impl BufRead, sidecar: impl BufRead) -> Result<Self, ReleaseError> {
        let mut lines = csv.lines();
        let schema = lines.next().ok_or_else(|| ReleaseError::Parse("empty release file".into()))??;
        if schema.trim() != "#schema=1" {
            return Err(ReleaseError::Parse(format!("unsupported schema line {schema:?}")));
        }
        let header = lines.next().ok_or_else(|| ReleaseError::Parse("missing header".into()))??;
        if header.trim() != "index,value" {
            return Err(ReleaseError::Parse(format!("unexpected header {header:?}")));
        }
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (idx, val) = line
                .split_once(',')
                .ok_or_else(|| ReleaseError::Parse(format!("bad line {line:?}")))?;
            if idx.trim().parse::<usize>().ok() != Some(values.len()) {
                return Err(ReleaseError::Parse(format!("out-of-order index {idx:?}")));
            }
            let v = val.trim();
            values.push(if v.is_empty() {
                None
            } else {
                Some(v.parse().map_err(|_| ReleaseError::Parse(format!("bad value {v:?}")))?)
            });
        }

        let mut metadata = BTreeMap::new();
        for line in sidecar.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ReleaseError::Parse(format!("bad metadata line {line:?}")))?;
            metadata.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| {
            metadata
                .remove(key)
                .ok_or_else(|| ReleaseError::Parse(format!("metadata lacks {key}")))
        };
        let mechanism = take("mechanism")?.parse()?;
        let k = take("k")?
            .parse()
            .map_err(|_| ReleaseError::Parse("bad k".into()))?;
        let normalized = take("normalized")?
            .parse()
            .map_err(|_| ReleaseError::Parse("bad normalized flag".into()))?;
        let mut status = vec![EntryStatus::Ok; values.len()];
        for (key, which) in [("separated", EntryStatus::Separated), ("failed", EntryStatus::Failed)] {
            for idx in take(key)?.split(';').filter(|t| !t.is_empty()) {
                let i: usize = idx
                    .parse()
                    .map_err(|_| ReleaseError::Parse(format!("bad index {idx:?} in {key}")))?;
                *status
                    .get_mut(i)
                    .ok_or_else(|| ReleaseError::Parse(format!("index {i} out of range")))? = which;
            }
        }
        Ok(Self { mechanism, k, values, status, normalized, metadata })
    }
}

fn base_metadata(db: &Database, noise: &NoiseSpec) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("n".into(), db.n().to_string());
    m.insert("d".into(), db.d().to_string());
    m.insert("noise".into(), noise.kind_tag().into());
    m.insert("beta".into(), noise.beta().to_string());
    m.insert("gamma".into(), noise.gamma().to_string());
    m.insert("gross_magnitude".into(), noise.gross_magnitude().to_string());
    m.insert("seed".into(), noise.seed.to_string());
    m.insert("generator".into(), GENERATOR_ID.into());
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BooleanReleaseOptions {
    pub normalize: bool,
    pub row_cap: usize,
}

impl Default for BooleanReleaseOptions {
    fn default() -> Self {
        Self { normalize: false, row_cap: DEFAULT_ROW_CAP }
    }
}

/// Noisy `Σ_f(D)`. Noise is added on the count scale, before any normalization.
pub fn release_boolean(
    db: &Database,
    f: &BooleanFunction,
    noise: &NoiseSpec,
    opts: &BooleanReleaseOptions,
) -> Result<SimulatedRelease, ReleaseError> {
    let counts: Vec<f64> = sigma_f(db, f, opts.row_cap)?.into_iter().map(|c| c as f64).collect();
    let noisy = apply_noise(&counts, noise)?;
    let scale = if opts.normalize { 1.0 / db.n() as f64 } else { 1.0 };
    let mut metadata = base_metadata(db, noise);
    metadata.insert("f".into(), f.to_string());
    let m = counts.len();
    Ok(SimulatedRelease {
        bundle: ReleaseBundle {
            mechanism: Mechanism::BooleanCount,
            k: f.arity() - 1,
            values: noisy.values.iter().map(|v| Some(v * scale)).collect(),
            status: vec![EntryStatus::Ok; m],
            normalized: opts.normalize,
            metadata,
        },
        exact: counts.iter().map(|v| Some(v * scale)).collect(),
        error: noisy.error.iter().map(|e| e * scale).collect(),
    })
}

/// Per-column estimator of `s` on `U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimatorKind {
    Linear,
    Logistic,
    /// M-estimator of a loss named by [`loss_by_id`].
    MEstimator(String),
}

impl EstimatorKind {
    pub fn mechanism(&self) -> Mechanism {
        match self {
            EstimatorKind::Linear => Mechanism::LinReg,
            EstimatorKind::Logistic => Mechanism::LogReg,
            EstimatorKind::MEstimator(_) => Mechanism::MEst,
        }
    }
}

/// Fits every column independently (in parallel), then perturbs the released
/// estimators. Failed fits are released as missing; separated logistic fits are
/// released but flagged.
pub fn release_estimators(
    db: &Database,
    kind: &EstimatorKind,
    noise: &NoiseSpec,
    opts: &FitOptions,
) -> Result<SimulatedRelease, ReleaseError> {
    noise.validate()?;
    let loss = match kind {
        EstimatorKind::MEstimator(id) => Some(loss_by_id(id)?),
        _ => None,
    };
    let columns: Vec<Vec<f64>> = (0..db.d()).map(|j| db.u().column(j)).collect();
    let fits: Vec<(Option<f64>, EntryStatus)> = columns
        .par_iter()
        .map(|x| {
            let s = db.s();
            let r = match kind {
                EstimatorKind::Linear => fit_linear_regression(x, s).map(|t| (t, EntryStatus::Ok)),
                EstimatorKind::Logistic => fit_logistic_regression(x, s, opts).map(|f| {
                    let st = if f.separated { EntryStatus::Separated } else { EntryStatus::Ok };
                    (f.theta, st)
                }),
                EstimatorKind::MEstimator(_) => {
                    let loss = loss.as_deref().expect("loss resolved above");
                    fit_mestimator_1d(loss, x, s, opts).map(|f| (f.theta, EntryStatus::Ok))
                }
            };
            match r {
                Ok((t, st)) => (Some(t), st),
                Err(e) => {
                    log::debug!("column fit failed: {e}");
                    (None, EntryStatus::Failed)
                }
            }
        })
        .collect();

    let mut metadata = base_metadata(db, noise);
    match kind {
        EstimatorKind::Linear => metadata.insert("estimator".into(), "linear".into()),
        EstimatorKind::Logistic => metadata.insert("estimator".into(), "logistic".into()),
        EstimatorKind::MEstimator(id) => metadata.insert("loss".into(), id.clone()),
    };
    if let Some(loss) = &loss {
        let low = fits
            .iter()
            .zip(&columns)
            .filter(|((t, _), x)| t.is_some_and(|t| ell2_variance(loss.as_ref(), t, x) < VARIANCE_FLOOR))
            .count();
        if low > 0 {
            log::warn!("{low} columns have ell2 variance below {VARIANCE_FLOOR}");
        }
        metadata.insert("low_variance_columns".into(), low.to_string());
    }
    let failed = fits.iter().filter(|(_, s)| *s == EntryStatus::Failed).count();
    if failed > 0 {
        log::warn!("{failed} of {} column fits failed", fits.len());
    }

    let exact: Vec<Option<f64>> = fits.iter().map(|(t, _)| *t).collect();
    let status: Vec<EntryStatus> = fits.iter().map(|(_, s)| *s).collect();
    let noisy = apply_noise(&exact.iter().map(|t| t.unwrap_or(0.0)).collect::<Vec<_>>(), noise)?;
    let values = exact
        .iter()
        .zip(&noisy.values)
        .map(|(t, v)| t.map(|_| *v))
        .collect();
    Ok(SimulatedRelease {
        bundle: ReleaseBundle {
            mechanism: kind.mechanism(),
            k: 1,
            values,
            status,
            normalized: false,
            metadata,
        },
        exact,
        error: noisy.error,
    })
}

/// Linear regression of `s` on consecutive blocks of `k` columns; the released
/// vector stacks the `d/k` coefficient vectors.
pub fn release_block_linreg(
    db: &Database,
    k: usize,
    noise: &NoiseSpec,
) -> Result<SimulatedRelease, ReleaseError> {
    noise.validate()?;
    if k == 0 || !db.d().is_multiple_of(k) {
        return Err(ReleaseError::Shape(format!("block size {k} does not divide d={}", db.d())));
    }
    let mut exact = Vec::with_capacity(db.d());
    let mut status = Vec::with_capacity(db.d());
    for b in 0..db.d() / k {
        let block = DenseMatrix::from_fn(db.n(), k, |i, j| db.u().get(i, b * k + j));
        match fit_block_linear_regression(&block, db.s()) {
            Ok(theta) => {
                exact.extend(theta.into_iter().map(Some));
                status.extend(std::iter::repeat_n(EntryStatus::Ok, k));
            }
            Err(_) => {
                exact.extend(std::iter::repeat_n(None, k));
                status.extend(std::iter::repeat_n(EntryStatus::Failed, k));
            }
        }
    }
    let noisy = apply_noise(&exact.iter().map(|t| t.unwrap_or(0.0)).collect::<Vec<_>>(), noise)?;
    let values = exact.iter().zip(&noisy.values).map(|(t, v)| t.map(|_| *v)).collect();
    let mut metadata = base_metadata(db, noise);
    metadata.insert("estimator".into(), "linear-block".into());
    Ok(SimulatedRelease {
        bundle: ReleaseBundle {
            mechanism: Mechanism::LinReg,
            k,
            values,
            status,
            normalized: false,
            metadata,
        },
        exact,
        error: noisy.error,
    })
}
