use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::attack::{AttackOptions, Decoder, MechanismConfig, TrialSpec};
use crate::boolfunc::{
    decompose_last_variable, decompose_pm, to_pm_function, BooleanFunction, Domain, SignedFunction,
};
use crate::randmat::{
    checked_row_count, row_function_matrix, DenseMatrix, MatrixError, RowOrder, TauRandomSpec,
    DEFAULT_ROW_CAP,
};
use crate::release::{Mechanism, NoiseKind, NoiseSpec};

use super::CliError;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Flat `key=value` lines; `#` starts a comment. Keys are consumed with
/// [`KeyValues::take`] and [`KeyValues::finish`] rejects leftovers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(config_err(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(config_err(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            entries: pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.take(key)
            .map(|v| v.parse::<T>().map_err(|e| config_err(format!("{key}={v}: {e}"))))
            .transpose()
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.take_parsed(key)?.ok_or_else(|| config_err(format!("missing required key {key:?}")))
    }

    pub fn finish(self) -> Result<(), CliError> {
        match self.entries.keys().next() {
            Some(k) => Err(config_err(format!("unknown key {k:?}"))),
            None => Ok(()),
        }
    }
}

/// How `beta` in a config is scaled by the number of rows `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaUnits {
    #[default]
    Absolute,
    SqrtN,
    InvSqrtN,
}

impl BetaUnits {
    pub fn scale(self, n: usize) -> f64 {
        let r = (n as f64).sqrt();
        match self {
            BetaUnits::Absolute => 1.0,
            BetaUnits::SqrtN => r,
            BetaUnits::InvSqrtN => 1.0 / r,
        }
    }
}

impl FromStr for BetaUnits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "absolute" => Ok(BetaUnits::Absolute),
            "sqrt_n" => Ok(BetaUnits::SqrtN),
            "inv_sqrt_n" => Ok(BetaUnits::InvSqrtN),
            other => Err(format!("unknown beta units {other:?}")),
        }
    }
}

fn parse_bool(key: &str, v: Option<String>) -> Result<bool, CliError> {
    match v.as_deref() {
        None | Some("false") | Some("0") => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some(other) => Err(config_err(format!("{key}={other}: expected true or false"))),
    }
}

/// One attack experiment: `trials` independent trials from `master_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: TrialSpec,
    pub trials: usize,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    /// Fill the `wall_ms` column. Off by default so reruns are byte-identical.
    pub timing: bool,
}

pub const EXPERIMENT_KEYS: &[&str] = &[
    "mechanism", "f", "loss", "n", "d", "k", "noise", "beta", "beta_units", "gamma",
    "gross_magnitude", "decoder", "trials", "master_seed", "output", "timing", "row_cap",
    "max_iter", "theta_cap", "lp_max_iter",
];

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        Self::from_key_values(KeyValues::parse(text)?)
    }

    pub fn from_key_values(mut kv: KeyValues) -> Result<Self, CliError> {
        let mechanism: Mechanism =
            kv.require("mechanism").map_err(|e| config_err(e.to_string()))?;
        let n: usize = kv.require("n")?;
        let d: usize = kv.require("d")?;
        let k: Option<usize> = kv.take_parsed("k")?;
        let f = kv.take("f");
        let loss = kv.take("loss");
        if f.is_some() && mechanism != Mechanism::BooleanCount {
            return Err(config_err("f only applies to mechanism=boolean-count"));
        }
        if loss.is_some() && mechanism != Mechanism::MEst {
            return Err(config_err("loss only applies to mechanism=mest"));
        }
        let mech = match mechanism {
            Mechanism::BooleanCount => {
                let f: BooleanFunction = f
                    .ok_or_else(|| config_err("boolean-count needs f"))?
                    .parse()
                    .map_err(|e| config_err(format!("f: {e}")))?;
                if f.arity() < 2 {
                    return Err(config_err("f needs at least two variables"));
                }
                if let Some(k) = k {
                    if k != f.arity() - 1 {
                        return Err(config_err(format!("k={k} but f has arity {}", f.arity())));
                    }
                }
                MechanismConfig::BooleanCount { f }
            }
            Mechanism::LinReg => MechanismConfig::LinReg { k: k.unwrap_or(1) },
            Mechanism::LogReg | Mechanism::MEst => {
                if k.is_some_and(|k| k != 1) {
                    return Err(config_err(format!("{mechanism} releases need k=1")));
                }
                if mechanism == Mechanism::LogReg {
                    MechanismConfig::LogReg
                } else {
                    MechanismConfig::MEst { loss: loss.ok_or_else(|| config_err("mest needs loss"))? }
                }
            }
        };
        if n == 0 || d == 0 {
            return Err(config_err("n and d must be positive"));
        }
        if mech.k() == 0 {
            return Err(config_err("k must be at least 1"));
        }
        if let MechanismConfig::LinReg { k } = mech {
            if !d.is_multiple_of(k) {
                return Err(config_err(format!("block size k={k} does not divide d={d}")));
            }
        }

        let units: BetaUnits = kv.take_parsed("beta_units")?.unwrap_or_default();
        let beta: Option<f64> = kv.take_parsed("beta")?;
        let gamma: Option<f64> = kv.take_parsed("gamma")?;
        let gross: Option<f64> = kv.take_parsed("gross_magnitude")?;
        let beta_abs = beta.map(|b| b * units.scale(n));
        let noise = match kv.take("noise").as_deref().unwrap_or("none") {
            "none" => {
                if beta.is_some() || gamma.is_some() || gross.is_some() {
                    return Err(config_err("noise=none takes no beta, gamma or gross_magnitude"));
                }
                NoiseKind::None
            }
            "bounded" => {
                if gamma.is_some() || gross.is_some() {
                    return Err(config_err("noise=bounded takes only beta"));
                }
                NoiseKind::BoundedUniform {
                    beta: beta_abs.ok_or_else(|| config_err("noise=bounded needs beta"))?,
                }
            }
            "gross" => NoiseKind::GrossPlusBounded {
                gamma: gamma.ok_or_else(|| config_err("noise=gross needs gamma"))?,
                beta: beta_abs.unwrap_or(0.0),
                gross_magnitude: gross.unwrap_or(1e6),
            },
            other => return Err(config_err(format!("unknown noise kind {other:?}"))),
        };
        NoiseSpec { kind: noise, seed: 0 }.validate().map_err(|e| config_err(e.to_string()))?;

        let decoder: Decoder = kv
            .take_parsed::<Decoder>("decoder")?
            .unwrap_or_default();
        mech.validate(decoder).map_err(|e| config_err(e.to_string()))?;

        let trials: usize = kv.take_parsed("trials")?.unwrap_or(1);
        if trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        let master_seed: u64 = kv.take_parsed("master_seed")?.unwrap_or(0);
        let output = kv.take("output").map(PathBuf::from);
        let timing = parse_bool("timing", kv.take("timing"))?;

        let mut options = AttackOptions::default();
        if let Some(cap) = kv.take_parsed("row_cap")? {
            options.row_cap = cap;
        }
        if let Some(it) = kv.take_parsed("max_iter")? {
            options.fit.max_iter = it;
        }
        if let Some(cap) = kv.take_parsed::<f64>("theta_cap")? {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(config_err("theta_cap must be positive"));
            }
            options.fit.theta_cap = cap;
        }
        if let Some(it) = kv.take_parsed("lp_max_iter")? {
            options.l1.max_iter = it;
        }
        kv.finish()?;

        if let MechanismConfig::BooleanCount { .. } = mech {
            checked_row_count(d, mech.k(), options.row_cap).map_err(|e| config_err(e.to_string()))?;
        }
        Ok(Self {
            spec: TrialSpec { mechanism: mech, decoder, n, d, noise, options },
            trials,
            master_seed,
            output,
            timing,
        })
    }
}

/// The row function of a spectral config: `f0(name)`, `f2(name)`, `g2(name)`,
/// `g3(name)` or a bare function used as `h` on `{0,1}`.
pub enum RowFunctionSpec {
    Boolean(BooleanFunction),
    Signed(SignedFunction),
}

impl RowFunctionSpec {
    pub fn matrix(&self, factors: &[&DenseMatrix]) -> Result<DenseMatrix, MatrixError> {
        match self {
            RowFunctionSpec::Boolean(b) => row_function_matrix(b, factors, RowOrder::AllTuples),
            RowFunctionSpec::Signed(s) => row_function_matrix(s, factors, RowOrder::AllTuples),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            RowFunctionSpec::Boolean(_) => Domain::ZeroOne,
            RowFunctionSpec::Signed(s) => s.domain(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            RowFunctionSpec::Boolean(b) => b.arity(),
            RowFunctionSpec::Signed(s) => s.arity(),
        }
    }
}

impl std::fmt::Debug for RowFunctionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RowFunctionSpec::Boolean(b) => write!(f, "Boolean({b})"),
            RowFunctionSpec::Signed(s) => write!(f, "Signed({:?})", s.table()),
        }
    }
}

impl FromStr for RowFunctionSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parse_f = |inner: &str| {
            inner.parse::<BooleanFunction>().map_err(|e| config_err(format!("h: {e}")))
        };
        if let Some((part, rest)) = s.split_once('(') {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| config_err(format!("h: missing ')' in {s:?}")))?;
            let f = parse_f(inner)?;
            if f.arity() < 2 {
                return Err(config_err("h: the outer function needs at least two variables"));
            }
            let bf = |e: crate::boolfunc::BoolFuncError| config_err(format!("h: {e}"));
            return Ok(match part.trim() {
                "f0" => RowFunctionSpec::Boolean(decompose_last_variable(&f).map_err(bf)?.f0),
                "f2" => RowFunctionSpec::Signed(decompose_last_variable(&f).map_err(bf)?.f2),
                "g2" => RowFunctionSpec::Signed(decompose_pm(&to_pm_function(&f)).map_err(bf)?.g2),
                "g3" => RowFunctionSpec::Signed(decompose_pm(&to_pm_function(&f)).map_err(bf)?.g3),
                other => return Err(config_err(format!("h: unknown part {other:?}"))),
            });
        }
        Ok(RowFunctionSpec::Boolean(parse_f(s)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Identity,
    Random(TauRandomSpec),
    RowFunction,
    Perturbed,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Random(TauRandomSpec::Bernoulli01) => "bernoulli01",
            Family::Random(TauRandomSpec::Rademacher) => "rademacher",
            Family::Random(TauRandomSpec::UniformSymmetric { .. }) => "uniform",
            Family::RowFunction => "rowfunc",
            Family::Perturbed => "perturbed",
        }
    }
}

#[derive(Debug)]
pub struct SpectralConfig {
    pub family: Family,
    /// The family name as written in the config.
    pub family_tag: String,
    pub h: Option<(String, RowFunctionSpec)>,
    /// Entry distribution of the factor matrices of a row-function family.
    pub base: TauRandomSpec,
    pub d: Vec<usize>,
    /// `None` means `n = d`.
    pub n: Option<Vec<usize>>,
    pub k: usize,
    pub seeds: usize,
    pub probes: usize,
    pub rank1_scale: f64,
    pub master_seed: u64,
    pub output: Option<PathBuf>,
    pub row_cap: usize,
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let out: Vec<T> = v
        .split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| config_err(format!("{key}: {e}"))))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(config_err(format!("{key} is empty")));
    }
    Ok(out)
}

impl SpectralConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut kv = KeyValues::parse(text)?;
        let family_tag: String = kv.require("family")?;
        let h_text = kv.take("h");
        let h = h_text
            .map(|t| t.parse::<RowFunctionSpec>().map(|spec| (t.trim().to_string(), spec)))
            .transpose()?;
        let explicit_base: Option<TauRandomSpec> = kv
            .take("base")
            .map(|b| b.parse().map_err(|e: MatrixError| config_err(format!("base: {e}"))))
            .transpose()?;
        let family = match family_tag.as_str() {
            "identity" => Family::Identity,
            "uniform" => Family::Random(TauRandomSpec::UniformSymmetric { half_width: 1.0 }),
            "rowfunc" | "rowfunc_pm" => Family::RowFunction,
            "perturbed" => Family::Perturbed,
            other => Family::Random(
                other.parse().map_err(|_| config_err(format!("unknown family {other:?}")))?,
            ),
        };
        let base = match (&family, &h) {
            (Family::RowFunction, Some((_, spec))) => {
                let natural = match spec.domain() {
                    Domain::ZeroOne => TauRandomSpec::Bernoulli01,
                    Domain::PlusMinus => TauRandomSpec::Rademacher,
                };
                let base = if family_tag == "rowfunc_pm" {
                    TauRandomSpec::Rademacher
                } else {
                    explicit_base.unwrap_or(natural)
                };
                if base != natural {
                    return Err(config_err(format!(
                        "h is defined on the {} cube but base={base}",
                        spec.domain()
                    )));
                }
                base
            }
            (Family::RowFunction, None) => return Err(config_err("rowfunc needs h")),
            (_, Some(_)) => return Err(config_err("h only applies to rowfunc families")),
            _ => {
                if explicit_base.is_some() {
                    return Err(config_err("base only applies to rowfunc families"));
                }
                TauRandomSpec::Rademacher
            }
        };
        let d = parse_list::<usize>("d", &kv.take("d").ok_or_else(|| config_err("missing d"))?)?;
        let n = match kv.take("n").as_deref() {
            None | Some("d") => None,
            Some(v) => Some(parse_list::<usize>("n", v)?),
        };
        let k = match (&h, kv.take_parsed::<usize>("k")?) {
            (Some((_, spec)), Some(k)) if k != spec.arity() => {
                return Err(config_err(format!("k={k} but h has arity {}", spec.arity())))
            }
            (Some((_, spec)), _) => spec.arity(),
            (None, Some(k)) if k != 1 => return Err(config_err("k only applies to rowfunc families")),
            (None, _) => 1,
        };
        let seeds: usize = kv.take_parsed("seeds")?.unwrap_or(1);
        let probes: usize = kv.take_parsed("probes")?.unwrap_or(64);
        let rank1_scale: f64 = kv.take_parsed("rank1_scale")?.unwrap_or(0.0);
        let master_seed: u64 = kv.take_parsed("master_seed")?.unwrap_or(0);
        let output = kv.take("output").map(PathBuf::from);
        let row_cap: usize = kv.take_parsed("row_cap")?.unwrap_or(DEFAULT_ROW_CAP);
        kv.finish()?;

        if seeds == 0 || probes == 0 {
            return Err(config_err("seeds and probes must be at least 1"));
        }
        if family != Family::Perturbed && rank1_scale != 0.0 {
            return Err(config_err("rank1_scale only applies to family=perturbed"));
        }
        if !(rank1_scale >= 0.0 && rank1_scale.is_finite()) {
            return Err(config_err("rank1_scale must be finite and non-negative"));
        }
        let cfg = Self { family, family_tag, h, base, d, n, k, seeds, probes, rank1_scale, master_seed, output, row_cap };
        for (d, n) in cfg.shapes() {
            if d == 0 || n == 0 {
                return Err(config_err("d and n must be positive"));
            }
            let m = match cfg.family {
                Family::RowFunction => {
                    checked_row_count(d, cfg.k, cfg.row_cap).map_err(|e| config_err(e.to_string()))?
                }
                _ => d,
            };
            if cfg.family == Family::Identity && d != n {
                return Err(config_err(format!("identity needs d = n, got d={d}, n={n}")));
            }
            if m < n {
                return Err(config_err(format!("matrix would have {m} rows < n={n} columns")));
            }
        }
        Ok(cfg)
    }

    /// `(d, n)` pairs in output order.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &d in &self.d {
            match &self.n {
                None => out.push((d, d)),
                Some(ns) => out.extend(ns.iter().map(|&n| (d, n))),
            }
        }
        out
    }
}

/// A sweep: any experiment key may hold a comma-separated list of values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// `(key, values)` for every key with more than one value, in key order.
    pub grid: Vec<(String, Vec<String>)>,
    pub cells: Vec<SweepCell>,
    pub output: Option<PathBuf>,
    pub master_seed: u64,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    /// `key=value;...` over the grid keys; `single` for a 1x1 grid.
    pub key: String,
    pub values: Vec<String>,
    pub config: ExperimentConfig,
}

pub const MAX_SWEEP_CELLS: usize = 10_000;
const SCALAR_KEYS: &[&str] = &["trials", "master_seed", "output", "timing"];

impl SweepConfig {
    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let kv = KeyValues::parse(text)?;
        let mut grid = Vec::new();
        let mut fixed = Vec::new();
        for key in kv.keys() {
            if !EXPERIMENT_KEYS.contains(&key) {
                return Err(config_err(format!("unknown key {key:?}")));
            }
            let value = kv.get(key).expect("key listed");
            let values: Vec<String> = value.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(config_err(format!("{key}: empty grid value")));
            }
            if values.len() > 1 {
                if SCALAR_KEYS.contains(&key) {
                    return Err(config_err(format!("{key} cannot be a grid")));
                }
                grid.push((key.to_string(), values));
            } else {
                fixed.push((key.to_string(), value.to_string()));
            }
        }
        let count = grid
            .iter()
            .try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len()))
            .unwrap_or(usize::MAX);
        if count > MAX_SWEEP_CELLS {
            return Err(config_err(format!("grid has {count} cells, more than {MAX_SWEEP_CELLS}")));
        }
        let mut cells = Vec::with_capacity(count);
        for index in 0..count {
            let mut rem = index;
            let mut picks = vec![0; grid.len()];
            for (slot, (_, values)) in picks.iter_mut().zip(&grid).rev() {
                *slot = rem % values.len();
                rem /= values.len();
            }
            let mut cell_kv = KeyValues::from_pairs(fixed.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            let values: Vec<String> = grid.iter().zip(&picks).map(|((_, v), &p)| v[p].clone()).collect();
            for ((key, _), v) in grid.iter().zip(&values) {
                cell_kv.set(key, v.clone());
            }
            let key = if grid.is_empty() {
                "single".to_string()
            } else {
                grid.iter()
                    .zip(&values)
                    .map(|((k, _), v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(";")
            };
            let config = ExperimentConfig::from_key_values(cell_kv)
                .map_err(|e| config_err(format!("cell {key}: {e}")))?;
            cells.push(SweepCell { key, values, config });
        }
        let first = &cells[0].config;
        Ok(Self {
            output: first.output.clone(),
            master_seed: first.master_seed,
            timing: first.timing,
            grid,
            cells,
        })
    }
}
