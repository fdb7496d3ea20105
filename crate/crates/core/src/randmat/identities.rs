//! Exact checks of the derivative identities behind the singular-value bounds.
//!
//! For `h` on `{0,1}^k` with full-monomial coefficient `1/c_h`:
//! `prod_j (delta_j - delta'_j) = c_h * sum_I (-1)^|I| h(delta(I))`, where `delta(I)`
//! takes `delta'` on `I` and `delta` elsewhere. For `h` on `{-1,1}^k`:
//! `prod_j phi_j = c_h * (sum_{I proper} (-1)^(k-|I|) P_I(phi) + h(phi))`, with `P_I`
//! the representing polynomial with variables outside `I` set to zero.

use num_rational::Rational64;
use rand::Rng as _;

use super::{row_function_matrix, row_product, DenseMatrix, MatrixError, RowOrder};
use crate::boolfunc::{to_multilinear, CubeFunction, Domain, MultilinearPoly, SignedFunction};
use crate::rng;

fn c_h(poly: &MultilinearPoly) -> Result<Rational64, MatrixError> {
    let top = poly.top_coefficient();
    if top == Rational64::from_integer(0) {
        return Err(MatrixError::DegenerateKernel);
    }
    Ok(top.recip())
}

fn expect_domain(h: &SignedFunction, domain: Domain) -> Result<(), MatrixError> {
    if h.domain() != domain {
        return Err(MatrixError::Shape(format!(
            "identity needs a function on the {domain} cube, got {}",
            h.domain()
        )));
    }
    Ok(())
}

/// Both sides of the `{0,1}` identity at points `p` (delta) and `q` (delta').
fn derivative_sides(h: &SignedFunction, c: Rational64, p: usize, q: usize) -> (Rational64, Rational64) {
    let k = h.arity();
    let lhs: i64 = (0..k)
        .map(|j| ((p >> j) & 1) as i64 - ((q >> j) & 1) as i64)
        .product();
    let mut sum = 0i64;
    for set in 0..(1usize << k) {
        let point = (q & set) | (p & !set);
        let sign = if set.count_ones() % 2 == 0 { 1 } else { -1 };
        sum += sign * h.value_at(point);
    }
    (Rational64::from_integer(lhs), c * Rational64::from_integer(sum))
}

/// Both sides of the `{-1,1}` identity at point `p`.
fn pm_sides(h: &SignedFunction, poly: &MultilinearPoly, c: Rational64, p: usize) -> (Rational64, Rational64) {
    let k = h.arity();
    let full = (1usize << k) - 1;
    let phi: Vec<i64> = (0..k).map(|j| Domain::PlusMinus.coordinate(p, j)).collect();
    let lhs: i64 = phi.iter().product();
    let mut sum = Rational64::from_integer(h.value_at(p));
    for set in 0..full {
        let sign = if (k - set.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
        sum += Rational64::from_integer(sign) * poly.restrict(set).eval_exact(&phi);
    }
    (Rational64::from_integer(lhs), c * sum)
}

/// The `{0,1}` identity at every pair of points.
pub fn derivative_identity_exhaustive(h: &SignedFunction) -> Result<bool, MatrixError> {
    expect_domain(h, Domain::ZeroOne)?;
    let c = c_h(&to_multilinear(h))?;
    let len = 1usize << h.arity();
    Ok((0..len).all(|p| {
        (0..len).all(|q| {
            let (l, r) = derivative_sides(h, c, p, q);
            l == r
        })
    }))
}

/// The `{-1,1}` identity at every point.
pub fn pm_identity_exhaustive(h: &SignedFunction) -> Result<bool, MatrixError> {
    expect_domain(h, Domain::PlusMinus)?;
    let poly = to_multilinear(h);
    let c = c_h(&poly)?;
    Ok((0..1usize << h.arity()).all(|p| {
        let (l, r) = pm_sides(h, &poly, c, p);
        l == r
    }))
}

fn random_cube_matrix(rng: &mut rng::Rng, d: usize, n: usize, domain: Domain) -> DenseMatrix {
    DenseMatrix::from_fn(d, n, |_, _| {
        let bit = rng.random::<bool>() as usize;
        Domain::coordinate(domain, bit, 0) as f64
    })
}

/// Integer matrix to exact rationals; entries here are small integers.
fn exact(m: &DenseMatrix) -> Vec<Rational64> {
    m.as_slice()
        .iter()
        .map(|&v| {
            debug_assert_eq!(v.fract(), 0.0);
            Rational64::from_integer(v as i64)
        })
        .collect()
}

/// `{0,1}` identity at `trials` random point pairs, then its matrix form
/// `(T_1 - T'_1) ⊙ ... ⊙ (T_k - T'_k) = c_h sum_I (-1)^|I| Π_h(T(I))` for random
/// `0/1` matrices with `d, n <= 4`, where `T(I)` uses `T'` on `I`.
pub fn check_derivative_identity(
    h: &SignedFunction,
    trials: usize,
    seed: u64,
) -> Result<bool, MatrixError> {
    expect_domain(h, Domain::ZeroOne)?;
    let c = c_h(&to_multilinear(h))?;
    let k = h.arity();
    let len = 1usize << k;
    let mut rng = rng::seeded(seed);
    for _ in 0..trials {
        let (p, q) = (rng.random_range(0..len), rng.random_range(0..len));
        let (l, r) = derivative_sides(h, c, p, q);
        if l != r {
            return Ok(false);
        }
    }
    for _ in 0..trials.clamp(1, 20) {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let t: Vec<DenseMatrix> = (0..k).map(|_| random_cube_matrix(&mut rng, d, n, Domain::ZeroOne)).collect();
        let tp: Vec<DenseMatrix> = (0..k).map(|_| random_cube_matrix(&mut rng, d, n, Domain::ZeroOne)).collect();
        let diffs: Vec<DenseMatrix> = t
            .iter()
            .zip(&tp)
            .map(|(a, b)| DenseMatrix::from_fn(d, n, |i, j| a.get(i, j) - b.get(i, j)))
            .collect();
        let lhs = exact(&row_product(&diffs.iter().collect::<Vec<_>>())?);
        let mut rhs = vec![Rational64::from_integer(0); lhs.len()];
        for set in 0..len {
            let factors: Vec<&DenseMatrix> = (0..k)
                .map(|j| if (set >> j) & 1 == 1 { &tp[j] } else { &t[j] })
                .collect();
            let pi = exact(&row_function_matrix(h, &factors, RowOrder::AllTuples)?);
            let sign = Rational64::from_integer(if set.count_ones() % 2 == 0 { 1 } else { -1 });
            for (acc, v) in rhs.iter_mut().zip(pi) {
                *acc += sign * v;
            }
        }
        if rhs.iter().zip(&lhs).any(|(r, l)| c * *r != *l) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `{-1,1}` identity at `trials` random points, then its matrix form
/// `V_1 ⊙ ... ⊙ V_k = c_h (sum_{I proper} (-1)^(k-|I|) Π_{P_I}(V) + Π_h(V))` for
/// random `±1` matrices with `d, n <= 4`.
pub fn check_pm_identity(h: &SignedFunction, trials: usize, seed: u64) -> Result<bool, MatrixError> {
    expect_domain(h, Domain::PlusMinus)?;
    let poly = to_multilinear(h);
    let c = c_h(&poly)?;
    let k = h.arity();
    let len = 1usize << k;
    let mut rng = rng::seeded(seed);
    for _ in 0..trials {
        let (l, r) = pm_sides(h, &poly, c, rng.random_range(0..len));
        if l != r {
            return Ok(false);
        }
    }
    let scale = Rational64::new(1, 1i64 << poly.scale_log2());
    for _ in 0..trials.clamp(1, 20) {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=4);
        let v: Vec<DenseMatrix> = (0..k).map(|_| random_cube_matrix(&mut rng, d, n, Domain::PlusMinus)).collect();
        let factors: Vec<&DenseMatrix> = v.iter().collect();
        let lhs = exact(&row_product(&factors)?);
        let mut rhs = exact(&row_function_matrix(h, &factors, RowOrder::AllTuples)?);
        for set in 0..len - 1 {
            // evaluate numerators (integers on ±1 inputs), then rescale exactly
            let restricted = poly.restrict(set);
            let numer = MultilinearPoly::from_numerators(k, Domain::PlusMinus, 0, restricted.numerators().to_vec())
                .expect("same arity");
            let pi = exact(&row_function_matrix(&numer, &factors, RowOrder::AllTuples)?);
            let sign = Rational64::from_integer(if (k - set.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 });
            for (acc, v) in rhs.iter_mut().zip(pi) {
                *acc += sign * scale * v;
            }
        }
        if rhs.iter().zip(&lhs).any(|(r, l)| c * *r != *l) {
            return Ok(false);
        }
    }
    Ok(true)
}
