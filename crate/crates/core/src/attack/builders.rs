use crate::boolfunc::{decompose_last_variable, decompose_pm, to_pm_function, BooleanFunction};
use crate::decode::LinearSystem;
use crate::randmat::{row_function_matrix, DenseMatrix, RowOrder};
use crate::release::{check_binary, sigmoid, Loss};

use super::AttackError;

fn expect_len(what: &str, got: usize, want: usize) -> Result<(), AttackError> {
    if got != want {
        return Err(AttackError::Build(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

fn arity_k(f: &BooleanFunction) -> Result<usize, AttackError> {
    if f.arity() < 2 {
        return Err(AttackError::Build("f needs at least two variables".into()));
    }
    if !f.is_nondegenerate_by_degree() {
        log::warn!("f is degenerate; the attack matrix may be singular");
    }
    Ok(f.arity() - 1)
}

fn rows_of(m: &DenseMatrix) -> Vec<f64> {
    m.row_sums()
}

/// `{0,1}` system `y = b_f + Π_{f2}(T, ..., T) s` with `T = U^T`,
/// `b_f = Π_{f0}(T, ..., T) 1`.
pub fn build_boolean_system(
    u: &DenseMatrix,
    f: &BooleanFunction,
    y: &[f64],
) -> Result<LinearSystem, AttackError> {
    check_binary(u)?;
    let k = arity_k(f)?;
    let split = decompose_last_variable(f)?;
    let t = u.transpose();
    let factors = vec![&t; k];
    let a = row_function_matrix(&split.f2, &factors, RowOrder::AllTuples)?;
    expect_len("released vector", y.len(), a.rows())?;
    let b = rows_of(&row_function_matrix(&split.f0, &factors, RowOrder::AllTuples)?);
    Ok(LinearSystem::new(a, b, y.to_vec())?)
}

/// `±1` system `y = q_g + Π_{g2}(V, ..., V) s` with `V = 2U^T - 1` and
/// `q_g = (Π_{g3} 1 + n - Π_{g2} 1) / 2`.
pub fn build_pm_boolean_system(
    u: &DenseMatrix,
    f: &BooleanFunction,
    y: &[f64],
) -> Result<LinearSystem, AttackError> {
    check_binary(u)?;
    let k = arity_k(f)?;
    let split = decompose_pm(&to_pm_function(f))?;
    let v = u.transpose().map(|x| 2.0 * x - 1.0);
    let factors = vec![&v; k];
    let a = row_function_matrix(&split.g2, &factors, RowOrder::AllTuples)?;
    expect_len("released vector", y.len(), a.rows())?;
    let g3_rows = rows_of(&row_function_matrix(&split.g3, &factors, RowOrder::AllTuples)?);
    let n = u.rows() as f64;
    let b = g3_rows
        .iter()
        .zip(rows_of(&a))
        .map(|(g3, g2)| (g3 + n - g2) / 2.0)
        .collect();
    Ok(LinearSystem::new(a, b, y.to_vec())?)
}

fn mask_of(theta: &[Option<f64>], extra: Option<&[bool]>) -> Result<Vec<bool>, AttackError> {
    if let Some(m) = extra {
        expect_len("mask", m.len(), theta.len())?;
    }
    Ok(theta
        .iter()
        .enumerate()
        .map(|(i, t)| t.is_none() || extra.is_some_and(|m| m[i]))
        .collect())
}

fn estimator_system(
    a: DenseMatrix,
    b: Vec<f64>,
    y: Vec<f64>,
    mask: Vec<bool>,
) -> Result<LinearSystem, AttackError> {
    let sys = LinearSystem::new(a, b, y)?;
    Ok(if mask.iter().any(|&m| m) { sys.with_mask(mask)? } else { sys })
}

/// `U^T s = (<U_i, U_i> θ_i)_i`. Missing estimates and rows flagged in `mask` are dropped.
pub fn build_linreg_system(
    u: &DenseMatrix,
    theta: &[Option<f64>],
    mask: Option<&[bool]>,
) -> Result<LinearSystem, AttackError> {
    expect_len("released estimators", theta.len(), u.cols())?;
    let ut = u.transpose();
    let y = theta
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let norm2: f64 = ut.row(i).iter().map(|v| v * v).sum();
            t.map_or(0.0, |t| norm2 * t)
        })
        .collect();
    estimator_system(ut, vec![0.0; u.cols()], y, mask_of(theta, mask)?)
}

/// Block variant: columns grouped `k` at a time, `U_b^T s = U_b^T U_b θ_b`.
pub fn build_block_linreg_system(
    u: &DenseMatrix,
    theta: &[Option<f64>],
    k: usize,
    mask: Option<&[bool]>,
) -> Result<LinearSystem, AttackError> {
    expect_len("released estimators", theta.len(), u.cols())?;
    if k == 0 || !u.cols().is_multiple_of(k) {
        return Err(AttackError::Build(format!("block size {k} does not divide d={}", u.cols())));
    }
    let ut = u.transpose();
    let mut y = vec![0.0; u.cols()];
    for b in 0..u.cols() / k {
        let cols: Vec<usize> = (b * k..(b + 1) * k).collect();
        if cols.iter().any(|&c| theta[c].is_none()) {
            continue;
        }
        for &r in &cols {
            y[r] = cols
                .iter()
                .map(|&c| {
                    let gram: f64 = ut.row(r).iter().zip(ut.row(c)).map(|(p, q)| p * q).sum();
                    gram * theta[c].expect("checked above")
                })
                .sum();
        }
    }
    let mut m = mask_of(theta, mask)?;
    // a missing entry invalidates its whole block
    for b in 0..u.cols() / k {
        if m[b * k..(b + 1) * k].iter().any(|&x| x) {
            m[b * k..(b + 1) * k].iter_mut().for_each(|x| *x = true);
        }
    }
    estimator_system(ut, vec![0.0; u.cols()], y, m)
}

/// `U^T s = (<U_i, ζ_i(θ_i)>)_i` with `ζ_i(θ)_j = sigmoid(θ U_ji)`.
pub fn build_logreg_system(
    u: &DenseMatrix,
    theta: &[Option<f64>],
    mask: Option<&[bool]>,
) -> Result<LinearSystem, AttackError> {
    expect_len("released estimators", theta.len(), u.cols())?;
    let ut = u.transpose();
    let y = theta
        .iter()
        .enumerate()
        .map(|(i, t)| {
            t.map_or(0.0, |t| ut.row(i).iter().map(|&x| x * sigmoid(t * x)).sum())
        })
        .collect();
    estimator_system(ut, vec![0.0; u.cols()], y, mask_of(theta, mask)?)
}

/// Stationarity rows `sum_j ell0(θ_i; U_ji) + ell2(θ_i; U_ji) s_j = 0`: design row `i`
/// holds the `ell2` values, `b_i` the summed `ell0`, and the observation is zero.
pub fn build_mest_system(
    u: &DenseMatrix,
    theta: &[Option<f64>],
    loss: &dyn Loss,
    mask: Option<&[bool]>,
) -> Result<LinearSystem, AttackError> {
    expect_len("released estimators", theta.len(), u.cols())?;
    let ut = u.transpose();
    let (n, d) = (u.rows(), u.cols());
    let a = DenseMatrix::from_fn(d, n, |i, j| theta[i].map_or(0.0, |t| loss.ell2(t, ut.get(i, j))));
    let b = (0..d)
        .map(|i| theta[i].map_or(0.0, |t| ut.row(i).iter().map(|&x| loss.ell0(t, x)).sum()))
        .collect();
    estimator_system(a, b, vec![0.0; d], mask_of(theta, mask)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::release::{sigma_f, Database, LogisticLoss, SquaredLoss};

    fn bits(s: &[bool]) -> Vec<f64> {
        s.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    fn exact_check(sys: &LinearSystem, s: &[bool], tol: f64) {
        let pred = sys.a.mul_vec(&bits(s));
        for (i, ((p, b), y)) in pred.iter().zip(&sys.b).zip(&sys.y).enumerate() {
            if sys.row_mask.as_ref().is_some_and(|m| m[i]) {
                continue;
            }
            assert!((p + b - y).abs() <= tol, "row {i}: {p} + {b} != {y}");
        }
    }

    #[test]
    fn and_builder_is_transpose() {
        let db = Database::synthetic_binary(6, 4, 1);
        let f = BooleanFunction::and(2).unwrap();
        let y: Vec<f64> = sigma_f(&db, &f, 100).unwrap().iter().map(|&c| c as f64).collect();
        let sys = build_boolean_system(db.u(), &f, &y).unwrap();
        assert_eq!(sys.a, db.u().transpose());
        assert!(sys.b.iter().all(|&b| b == 0.0));
        exact_check(&sys, db.s(), 0.0);
    }

    #[test]
    fn xor_builder() {
        let db = Database::synthetic_binary(6, 4, 2);
        let f = BooleanFunction::xor(2).unwrap();
        let y: Vec<f64> = sigma_f(&db, &f, 100).unwrap().iter().map(|&c| c as f64).collect();
        let sys = build_boolean_system(db.u(), &f, &y).unwrap();
        assert_eq!(sys.a, db.u().transpose().map(|x| 1.0 - 2.0 * x));
        assert_eq!(sys.b, db.u().transpose().row_sums());
        exact_check(&sys, db.s(), 0.0);
        exact_check(&build_pm_boolean_system(db.u(), &f, &y).unwrap(), db.s(), 0.0);
    }

    #[test]
    fn secret_dictator_gives_ones() {
        let db = Database::synthetic_binary(5, 3, 3);
        let f = BooleanFunction::dictator(2, 1).unwrap();
        let y: Vec<f64> = sigma_f(&db, &f, 100).unwrap().iter().map(|&c| c as f64).collect();
        let sys = build_pm_boolean_system(db.u(), &f, &y).unwrap();
        assert_eq!(sys.a, DenseMatrix::filled(3, 5, 1.0));
        exact_check(&sys, db.s(), 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let db = Database::synthetic_binary(5, 3, 3);
        let f = BooleanFunction::and(3).unwrap();
        assert!(build_boolean_system(db.u(), &f, &[0.0; 3]).is_err());
        let real = Database::synthetic_real(5, 3, 3);
        assert!(build_boolean_system(real.u(), &f, &[0.0; 9]).is_err());
    }

    #[test]
    fn linreg_and_logreg_noiseless() {
        use crate::release::{fit_linear_regression, fit_logistic_regression, FitOptions};
        let db = Database::synthetic_real(40, 6, 5);
        let lin: Vec<Option<f64>> = (0..6)
            .map(|j| Some(fit_linear_regression(&db.u().column(j), db.s()).unwrap()))
            .collect();
        exact_check(&build_linreg_system(db.u(), &lin, None).unwrap(), db.s(), 1e-8);
        let opts = FitOptions::default();
        let log: Vec<Option<f64>> = (0..6)
            .map(|j| Some(fit_logistic_regression(&db.u().column(j), db.s(), &opts).unwrap().theta))
            .collect();
        exact_check(&build_logreg_system(db.u(), &log, None).unwrap(), db.s(), 1e-8);
    }

    #[test]
    fn zero_theta_logreg_row_is_half_sum() {
        let db = Database::synthetic_real(10, 2, 5);
        let sys = build_logreg_system(db.u(), &[Some(0.0), Some(0.0)], None).unwrap();
        let sums = db.u().transpose().row_sums();
        for (y, s) in sys.y.iter().zip(sums) {
            assert!((y - s / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mest_squared_is_twice_linreg() {
        let db = Database::synthetic_real(20, 5, 6);
        let theta: Vec<Option<f64>> = (0..5).map(|i| Some(0.1 * i as f64 - 0.2)).collect();
        let lin = build_linreg_system(db.u(), &theta, None).unwrap();
        let mest = build_mest_system(db.u(), &theta, &SquaredLoss, None).unwrap();
        // -2 U^T s + 2 <U_i,U_i> θ_i = 0
        assert_eq!(mest.a, lin.a.scaled(-2.0));
        for (b, y) in mest.b.iter().zip(&lin.y) {
            assert!((b - 2.0 * y).abs() < 1e-12);
        }
        let log = build_logreg_system(db.u(), &theta, None).unwrap();
        let mest = build_mest_system(db.u(), &theta, &LogisticLoss, None).unwrap();
        assert_eq!(mest.a, log.a.scaled(-1.0));
        for (b, y) in mest.b.iter().zip(&log.y) {
            assert!((b - y).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_estimates_are_masked() {
        let db = Database::synthetic_real(10, 3, 7);
        let sys = build_linreg_system(db.u(), &[Some(0.1), None, Some(0.2)], Some(&[false, false, true]))
            .unwrap();
        assert_eq!(sys.row_mask, Some(vec![false, true, true]));
    }

    #[test]
    fn block_linreg_noiseless() {
        use crate::release::fit_block_linear_regression;
        let db = Database::synthetic_real(30, 6, 8);
        let mut theta = Vec::new();
        for b in 0..3 {
            let block = DenseMatrix::from_fn(30, 2, |i, j| db.u().get(i, 2 * b + j));
            theta.extend(fit_block_linear_regression(&block, db.s()).unwrap().into_iter().map(Some));
        }
        exact_check(&build_block_linreg_system(db.u(), &theta, 2, None).unwrap(), db.s(), 1e-8);
    }
}
