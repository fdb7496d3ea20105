//! Decoders for noisy linear systems `A s ≈ y - b`: least squares through the SVD
//! pseudo-inverse and ℓ1 minimization as a linear program, each followed by
//! rounding to bits.

mod lp;

pub use lp::{l1_minimize, L1Options, LpCertificate, LpSolution};

use std::time::Instant;

use thiserror::Error;

use crate::randmat::DenseMatrix;

/// Relative tolerance below which `sigma_n / sigma_1` counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("system has non-finite entries")]
    NonFinite,
    #[error("rank deficient: numerical rank {rank} < {n} (sigma_min={sigma_min:e}, sigma_max={sigma_max:e})")]
    RankDeficient {
        rank: usize,
        n: usize,
        sigma_min: f64,
        sigma_max: f64,
    },
    #[error("LP iteration cap {iterations} reached; incumbent objective {objective}")]
    IterationCap {
        iterations: usize,
        incumbent: Vec<f64>,
        objective: f64,
    },
    #[error("LP optimality certificate failed: gap={gap:e}, equality residual={equality_residual:e}")]
    Certificate { gap: f64, equality_residual: f64 },
}

/// `A s ≈ y - b`, with optionally dropped rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub y: Vec<f64>,
    /// `true` marks a dropped row.
    pub row_mask: Option<Vec<bool>>,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: Vec<f64>, y: Vec<f64>) -> Result<Self, DecodeError> {
        let sys = Self { a, b, y, row_mask: None };
        sys.validate()?;
        Ok(sys)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self, DecodeError> {
        self.row_mask = Some(mask);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let m = self.a.rows();
        if self.b.len() != m || self.y.len() != m {
            return Err(DecodeError::Shape(format!(
                "A has {m} rows, b has {}, y has {}",
                self.b.len(),
                self.y.len()
            )));
        }
        if let Some(mask) = &self.row_mask {
            if mask.len() != m {
                return Err(DecodeError::Shape(format!("mask has {} entries for {m} rows", mask.len())));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Indices of the rows kept after masking.
    pub fn kept_rows(&self) -> Vec<usize> {
        (0..self.a.rows())
            .filter(|&i| self.row_mask.as_ref().is_none_or(|m| !m[i]))
            .collect()
    }

    /// Kept rows of `A` and of `y - b`.
    pub fn active(&self) -> Result<(DenseMatrix, Vec<f64>), DecodeError> {
        self.validate()?;
        let keep = self.kept_rows();
        let a = self.a.select_rows(&keep);
        let z: Vec<f64> = keep.iter().map(|&i| self.y[i] - self.b[i]).collect();
        if !a.is_finite() || z.iter().any(|v| !v.is_finite()) {
            return Err(DecodeError::NonFinite);
        }
        if a.rows() < a.cols() {
            return Err(DecodeError::Shape(format!(
                "{} rows after masking, need at least n={}",
                a.rows(),
                a.cols()
            )));
        }
        Ok((a, z))
    }

    /// `||A s - (y - b)||_1` over the kept rows.
    pub fn l1_residual(&self, s: &[f64]) -> Result<f64, DecodeError> {
        let (a, z) = self.active()?;
        Ok(a.mul_vec(s).iter().zip(&z).map(|(p, q)| (p - q).abs()).sum())
    }
}

/// Output of a decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub s_real: Vec<f64>,
    pub s_bits: Vec<bool>,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub residual_l2: f64,
    pub residual_l1: f64,
    pub wall_ms: f64,
    pub rows_used: usize,
    pub rows_dropped: usize,
    pub rank_tolerance: f64,
    /// Present for ℓ1 decodes.
    pub lp: Option<LpCertificate>,
}

impl DecodeResult {
    /// `n,m,sigma_min,res_l2,res_l1,hamming,seed,wall_ms`. The Hamming distance and
    /// timing are left empty when not supplied.
    pub fn csv_row(&self, hamming: Option<usize>, seed: u64, wall_ms: Option<f64>) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.s_real.len(),
            self.rows_used,
            self.sigma_min,
            self.residual_l2,
            self.residual_l1,
            hamming.map(|h| h.to_string()).unwrap_or_default(),
            seed,
            wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default()
        )
    }
}

pub const DECODE_CSV_HEADER: &str = "n,m,sigma_min,res_l2,res_l1,hamming,seed,wall_ms";

/// Bit `i` is 1 iff `v_i >= 1/2`.
pub fn round_to_bits(v: &[f64]) -> Vec<bool> {
    v.iter().map(|&x| x >= 0.5).collect()
}

fn residuals(a: &DenseMatrix, s: &[f64], z: &[f64]) -> (f64, f64) {
    let r: Vec<f64> = a.mul_vec(s).iter().zip(z).map(|(p, q)| p - q).collect();
    (
        r.iter().map(|v| v * v).sum::<f64>().sqrt(),
        r.iter().map(|v| v.abs()).sum(),
    )
}

fn extreme_singular_values(a: &DenseMatrix) -> (f64, f64) {
    let sv = a.to_nalgebra().singular_values();
    (sv.min(), sv.max())
}

fn check_rank(sigma_min: f64, sigma_max: f64, values: &[f64], n: usize) -> Result<(), DecodeError> {
    if sigma_min <= RANK_TOLERANCE * sigma_max {
        let rank = values.iter().filter(|&&v| v > RANK_TOLERANCE * sigma_max).count();
        return Err(DecodeError::RankDeficient { rank, n, sigma_min, sigma_max });
    }
    Ok(())
}

/// `s = Q Γ^{-1} P^T (y - b)` from the thin SVD `A = P Γ Q^T`, then rounded.
pub fn least_squares_decode(sys: &LinearSystem) -> Result<DecodeResult, DecodeError> {
    let start = Instant::now();
    let (a, z) = sys.active()?;
    let n = a.cols();
    let svd = a.to_nalgebra().svd(true, true);
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    check_rank(sigma_min, sigma_max, &values, n)?;

    let p = svd.u.as_ref().expect("requested U");
    let q_t = svd.v_t.as_ref().expect("requested V^T");
    let zv = nalgebra::DVector::from_column_slice(&z);
    let mut coords = p.transpose() * zv;
    for (c, g) in coords.iter_mut().zip(svd.singular_values.iter()) {
        *c /= g;
    }
    let s_real: Vec<f64> = (q_t.transpose() * coords).iter().copied().collect();
    let (residual_l2, residual_l1) = residuals(&a, &s_real, &z);
    Ok(DecodeResult {
        s_bits: round_to_bits(&s_real),
        s_real,
        sigma_min,
        sigma_max,
        residual_l2,
        residual_l1,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        rows_used: a.rows(),
        rows_dropped: sys.a.rows() - a.rows(),
        rank_tolerance: RANK_TOLERANCE,
        lp: None,
    })
}

/// `argmin_s ||A s - (y - b)||_1` over real `s`, then rounded.
pub fn l1_decode(sys: &LinearSystem) -> Result<DecodeResult, DecodeError> {
    l1_decode_with(sys, &L1Options::default())
}

pub fn l1_decode_with(sys: &LinearSystem, opts: &L1Options) -> Result<DecodeResult, DecodeError> {
    let start = Instant::now();
    let (a, z) = sys.active()?;
    let (sigma_min, sigma_max) = extreme_singular_values(&a);
    if !opts.box_constrained {
        let values = a.to_nalgebra().singular_values();
        check_rank(sigma_min, sigma_max, values.as_slice(), a.cols())?;
    }
    let y_l1: f64 = sys.kept_rows().iter().map(|&i| sys.y[i].abs()).sum();
    let sol = l1_minimize(&a, &z, opts, 1e-7 * (1.0 + y_l1))?;
    let (residual_l2, residual_l1) = residuals(&a, &sol.s, &z);
    Ok(DecodeResult {
        s_bits: round_to_bits(&sol.s),
        s_real: sol.s,
        sigma_min,
        sigma_max,
        residual_l2,
        residual_l1,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        rows_used: a.rows(),
        rows_dropped: sys.a.rows() - a.rows(),
        rank_tolerance: RANK_TOLERANCE,
        lp: Some(sol.certificate),
    })
}
