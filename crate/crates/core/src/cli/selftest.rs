use crate::attack::{
    build_boolean_system, build_linreg_system, build_logreg_system, build_mest_system,
    build_pm_boolean_system, AttackOptions, Decoder, MechanismConfig, TrialSpec,
};
use crate::boolfunc::{
    all_functions, decompose_last_variable, decompose_pm, nondegenerate_count_formula,
    to_pm_function, BooleanFunction,
};
use crate::decode::LinearSystem;
use crate::randmat::{
    check_derivative_identity, check_pm_identity, derivative_identity_exhaustive,
    pm_identity_exhaustive,
};
use crate::release::{
    fit_linear_regression, fit_logistic_regression, fit_mestimator_1d, sigma_f, Database,
    FitOptions, LogisticLoss, NoiseKind, SquaredLoss,
};
use crate::rng::derive_seed;

use super::SCHEMA_LINE;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name, passed, detail: detail.into() }
}

fn nondegenerate(arity: usize) -> impl Iterator<Item = BooleanFunction> {
    all_functions(arity).filter(|f| f.is_nondegenerate_by_degree())
}

fn nondegeneracy_checks() -> Vec<Check> {
    (1..=4)
        .map(|p| {
            let mut agree = true;
            let mut count = 0u128;
            for f in all_functions(p) {
                let a = f.is_nondegenerate_by_degree();
                agree &= a == f.is_nondegenerate_by_sign_sum();
                count += a as u128;
            }
            let formula = nondegenerate_count_formula(p as u32);
            check(
                "nondegeneracy_tests_agree",
                agree && count == formula,
                format!("p={p} count={count} formula={formula}"),
            )
        })
        .collect()
}

/// `y - b - A s` on the kept rows, as an exact comparison.
fn system_matches(sys: &LinearSystem, s: &[bool], tol: f64) -> bool {
    let x: Vec<f64> = s.iter().map(|&b| b as u8 as f64).collect();
    let pred = sys.a.mul_vec(&x);
    sys.kept_rows().iter().all(|&i| (sys.y[i] - sys.b[i] - pred[i]).abs() <= tol)
}

fn reduction_checks(seed: u64) -> Vec<Check> {
    let mut zero_one = true;
    let mut pm = true;
    let mut instances = 0;
    for arity in 2..=3 {
        for f in nondegenerate(arity).collect::<Vec<_>>() {
            for t in 0..4u64 {
                let s = derive_seed(seed, instances);
                instances += 1;
                let n = 1 + (s % 12) as usize;
                let d = 1 + (s / 12 % 5) as usize;
                let db = Database::synthetic_binary(n, d, derive_seed(s, t));
                let Ok(counts) = sigma_f(&db, &f, 10_000) else {
                    zero_one = false;
                    continue;
                };
                let y: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                zero_one &= build_boolean_system(db.u(), &f, &y).is_ok_and(|sys| system_matches(&sys, db.s(), 0.0));
                pm &= build_pm_boolean_system(db.u(), &f, &y).is_ok_and(|sys| system_matches(&sys, db.s(), 0.0));
            }
        }
    }
    vec![
        check("reduction_zero_one_exact", zero_one, format!("{instances} instances")),
        check("reduction_plus_minus_exact", pm, format!("{instances} instances")),
    ]
}

fn identity_checks(seed: u64) -> Vec<Check> {
    let mut derivative = true;
    let mut plus_minus = true;
    let mut count = 0;
    for arity in 2..=3 {
        for f in nondegenerate(arity) {
            let f2 = decompose_last_variable(&f).expect("arity >= 2").f2;
            let g2 = decompose_pm(&to_pm_function(&f)).expect("arity >= 2").g2;
            let s = derive_seed(seed, count);
            count += 1;
            derivative &= derivative_identity_exhaustive(&f2).unwrap_or(false)
                && check_derivative_identity(&f2, 20, s).unwrap_or(false);
            plus_minus &= pm_identity_exhaustive(&g2).unwrap_or(false)
                && check_pm_identity(&g2, 20, s).unwrap_or(false);
        }
    }
    vec![
        check("derivative_identity", derivative, format!("{count} functions")),
        check("plus_minus_identity", plus_minus, format!("{count} functions")),
    ]
}

fn estimator_checks(seed: u64) -> Vec<Check> {
    let db = Database::synthetic_real(40, 12, seed);
    let opts = FitOptions::default();
    let cols: Vec<Vec<f64>> = (0..db.d()).map(|j| db.u().column(j)).collect();
    let tol = 1e-7 * db.n() as f64;
    let lin: Vec<Option<f64>> = cols.iter().map(|x| fit_linear_regression(x, db.s()).ok()).collect();
    let log: Vec<Option<f64>> = cols
        .iter()
        .map(|x| fit_logistic_regression(x, db.s(), &opts).ok().filter(|f| !f.separated).map(|f| f.theta))
        .collect();
    let mest: Vec<Option<f64>> = cols
        .iter()
        .map(|x| fit_mestimator_1d(&SquaredLoss, x, db.s(), &opts).ok().map(|f| f.theta))
        .collect();
    let ok = |sys: Result<LinearSystem, _>| sys.is_ok_and(|sys| system_matches(&sys, db.s(), tol));
    vec![
        check("linreg_system_exact", ok(build_linreg_system(db.u(), &lin, None)), ""),
        check("logreg_system_exact", ok(build_logreg_system(db.u(), &log, None)), ""),
        check("mest_squared_system_exact", ok(build_mest_system(db.u(), &mest, &SquaredLoss, None)), ""),
        check("mest_logistic_system_exact", ok(build_mest_system(db.u(), &log, &LogisticLoss, None)), ""),
    ]
}

fn noiseless_attack_checks(seed: u64) -> Vec<Check> {
    let f = BooleanFunction::named("and3").expect("named");
    let mut out = Vec::new();
    for decoder in [Decoder::Ls, Decoder::Lp] {
        let spec = TrialSpec {
            mechanism: MechanismConfig::BooleanCount { f: f.clone() },
            decoder,
            n: 24,
            d: 12,
            noise: NoiseKind::None,
            options: AttackOptions::default(),
        };
        let r = spec.run(seed);
        out.push(check(
            "noiseless_boolean_attack",
            r.as_ref().is_ok_and(|r| r.hamming == 0),
            match r {
                Ok(r) => format!("decoder={decoder} hamming={}", r.hamming),
                Err(e) => format!("decoder={decoder} error: {e}"),
            },
        ));
    }
    out
}

pub fn run_checks(seed: u64) -> Vec<Check> {
    let mut all = nondegeneracy_checks();
    all.extend(reduction_checks(seed));
    all.extend(identity_checks(seed));
    all.extend(estimator_checks(seed));
    all.extend(noiseless_attack_checks(seed));
    all
}

pub fn checks_csv(checks: &[Check]) -> String {
    let mut out = format!("{SCHEMA_LINE}\ncheck,passed,detail\n");
    for c in checks {
        out.push_str(&format!("{},{},{}\n", c.name, c.passed, c.detail));
    }
    out
}
