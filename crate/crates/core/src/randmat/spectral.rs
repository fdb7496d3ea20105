use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{gen_matrix, DenseMatrix, MatrixError, TauRandomSpec};
use crate::rng::{self, Stream};

/// Summary of the spectral and geometric probes of one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub m: usize,
    pub n: usize,
    pub sigma_min: f64,
    pub op_norm: f64,
    /// Upper-bound estimate of the Euclidean-section constant.
    pub euclid_ratio_min: f64,
    pub probes_used: usize,
    pub rank_deficient: bool,
}

/// Result of [`euclidean_ratio_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanProbe {
    /// `min ||Mx||_1 / (sqrt(m) ||Mx||_2)` over the probes; 0 if some probe hit the kernel.
    pub ratio: f64,
    pub rank_deficient: bool,
    pub probes_used: usize,
}

struct Svd {
    /// Descending.
    values: Vec<f64>,
    /// Right singular vectors, matching `values`.
    right: Vec<DVector<f64>>,
    residual: f64,
}

fn check_tall(m: &DenseMatrix) -> Result<(), MatrixError> {
    if !m.is_finite() {
        return Err(MatrixError::NonFinite);
    }
    if m.rows() < m.cols() || m.cols() == 0 {
        return Err(MatrixError::Shape(format!(
            "need m >= n >= 1, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn svd(m: &DenseMatrix) -> Svd {
    let a = m.to_nalgebra();
    let dec = a.clone().svd(true, true);
    let u = dec.u.as_ref().expect("requested U");
    let v_t = dec.v_t.as_ref().expect("requested V^T");
    let sigma = &dec.singular_values;

    let recon = u * DMatrix::from_diagonal(sigma) * v_t;
    let norm = a.norm();
    let residual = if norm > 0.0 { (&a - recon).norm() / norm } else { 0.0 };

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    Svd {
        values: order.iter().map(|&i| sigma[i]).collect(),
        right: order.iter().map(|&i| v_t.row(i).transpose()).collect(),
        residual,
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>, MatrixError> {
    check_tall(m)?;
    let mut values: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `sigma_n(M)` for an `m x n` matrix with `m >= n`.
pub fn least_singular_value(m: &DenseMatrix) -> Result<f64, MatrixError> {
    Ok(*singular_values(m)?.last().expect("n >= 1"))
}

/// Largest singular value.
pub fn op_norm(m: &DenseMatrix) -> Result<f64, MatrixError> {
    Ok(singular_values(m)?[0])
}

/// Relative Frobenius residual `||M - P Σ Q^T|| / ||M||` of the decomposition.
pub fn svd_residual(m: &DenseMatrix) -> Result<f64, MatrixError> {
    check_tall(m)?;
    Ok(svd(m).residual)
}

fn ratio_of(mx: &[f64], scale: f64) -> Option<f64> {
    let l1: f64 = mx.iter().map(|v| v.abs()).sum();
    let l2 = mx.iter().map(|v| v * v).sum::<f64>().sqrt();
    if l2 <= scale {
        None
    } else {
        Some((l1 / (l2 * (mx.len() as f64).sqrt())).min(1.0))
    }
}

fn probe_with(m: &DenseMatrix, num_probes: usize, seed: u64, svd: &Svd) -> EuclideanProbe {
    let n = m.cols();
    // directions mapped to (numerically) zero count as kernel hits
    let kernel_scale = 1e-12 * svd.values[0].max(f64::MIN_POSITIVE);
    let mut rng = rng::seeded(seed);
    let mut best = 1.0f64;
    let mut rank_deficient = false;
    let mut used = 0;
    let mut visit = |x: &[f64]| {
        used += 1;
        match ratio_of(&m.mul_vec(x), kernel_scale) {
            Some(r) => best = best.min(r),
            None => rank_deficient = true,
        }
    };
    for _ in 0..num_probes {
        let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        visit(&x);
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        visit(&e);
    }
    let v_min = svd.right.last().expect("n >= 1");
    visit(v_min.as_slice());
    EuclideanProbe {
        ratio: if rank_deficient { 0.0 } else { best },
        rank_deficient,
        probes_used: used,
    }
}

/// Probe-based upper bound on the Euclidean-section constant of `M`: the minimum
/// of `||Mx||_1 / (sqrt(m) ||Mx||_2)` over `num_probes` Gaussian unit vectors, the
/// `n` canonical basis vectors and the right singular vector of `sigma_n`.
pub fn euclidean_ratio_probe(
    m: &DenseMatrix,
    num_probes: usize,
    seed: u64,
) -> Result<EuclideanProbe, MatrixError> {
    check_tall(m)?;
    if num_probes == 0 {
        return Err(MatrixError::Shape("need at least one random probe".into()));
    }
    Ok(probe_with(m, num_probes, seed, &svd(m)))
}

/// One SVD, all the measurements.
pub fn spectral_report(
    m: &DenseMatrix,
    num_probes: usize,
    seed: u64,
) -> Result<SpectralReport, MatrixError> {
    check_tall(m)?;
    if num_probes == 0 {
        return Err(MatrixError::Shape("need at least one random probe".into()));
    }
    let dec = svd(m);
    let probe = probe_with(m, num_probes, seed, &dec);
    Ok(SpectralReport {
        m: m.rows(),
        n: m.cols(),
        sigma_min: *dec.values.last().expect("n >= 1"),
        op_norm: dec.values[0],
        euclid_ratio_min: probe.ratio,
        probes_used: probe.probes_used,
        rank_deficient: probe.rank_deficient,
    })
}

/// The Rademacher matrix `R` and rank-one perturbation `u 1^T` for one seed, with
/// `u` uniform on `[0, rank1_scale]^d`. `R` uses `seed` directly, so a zero scale
/// reproduces `gen_matrix(Rademacher, d, n, seed)`.
pub fn perturbed_matrix(d: usize, n: usize, rank1_scale: f64, seed: u64) -> DenseMatrix {
    let r = gen_matrix(TauRandomSpec::Rademacher, d, n, seed);
    if rank1_scale == 0.0 {
        return r;
    }
    let mut prng = rng::seeded(rng::stream_seed(seed, Stream::Perturbation));
    let unit = Uniform::new_inclusive(0.0, 1.0).expect("valid range");
    let u: Vec<f64> = (0..d).map(|_| rank1_scale * unit.sample(&mut prng)).collect();
    DenseMatrix::from_fn(d, n, |i, j| r.get(i, j) + u[i])
}

/// `sigma_n(R + u 1^T)` for each seed; see [`perturbed_matrix`].
pub fn perturbed_sigma_probe(
    d: usize,
    n: usize,
    rank1_scale: f64,
    seeds: &[u64],
) -> Result<Vec<f64>, MatrixError> {
    if n == 0 || d < 2 * n {
        return Err(MatrixError::Shape(format!("need d >= 2n, got d={d}, n={n}")));
    }
    if !(rank1_scale >= 0.0 && rank1_scale.is_finite()) {
        return Err(MatrixError::Shape(format!("bad rank-one scale {rank1_scale}")));
    }
    seeds
        .iter()
        .map(|&s| least_singular_value(&perturbed_matrix(d, n, rank1_scale, s)))
        .collect()
}
