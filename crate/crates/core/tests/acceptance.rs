//! Acceptance suite, criteria 1-9. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;

use reconlab::attack::{
    build_boolean_system, build_pm_boolean_system, AttackOptions, AttackReport, Decoder,
    MechanismConfig, TrialSpec,
};
use reconlab::boolfunc::{
    all_functions, decompose_last_variable, decompose_pm, nondegenerate_count_formula,
    to_pm_function, BooleanFunction, Domain, SignedFunction,
};
use reconlab::randmat::{
    check_derivative_identity, check_pm_identity, euclidean_ratio_probe, gen_matrix,
    least_singular_value, row_function_matrix, DenseMatrix, RowOrder, TauRandomSpec,
};
use reconlab::release::{sigma_f, Database, NoiseKind};
use reconlab::rng::{derive_seed, seeded, stream_seed, Stream};

const MASTER_SEED: u64 = 2024;

// Monte-Carlo thresholds; each must equal its entry in fixtures/thresholds.txt.
const C4_MEAN_HAMMING_MAX: f64 = 0.05;
const C5_MEAN_RECOVERY_MIN: f64 = 0.9;
const C6_MEAN_RECOVERY_MIN: f64 = 0.9;
const C7_SIGMA_SPREAD_MAX: f64 = 3.0;
const C7_EUCLID_RATIO_MIN: f64 = 0.05;

// Runtime limits.
const C1_LIMIT: Duration = Duration::from_secs(10);
const C2_LIMIT: Duration = Duration::from_secs(10);
const C3_LIMIT: Duration = Duration::from_secs(60);
const C4_LIMIT: Duration = Duration::from_secs(5 * 60);
const C5_LIMIT: Duration = Duration::from_secs(15 * 60);
const C6_LIMIT: Duration = Duration::from_secs(10 * 60);
const C7_LIMIT: Duration = Duration::from_secs(10 * 60);
const C8_LIMIT: Duration = Duration::from_secs(30);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.1}s]", o.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            o.passed = false;
            o.detail.push_str(&format!(" exceeds limit {}s", limit.as_secs()));
        }
    }
    o
}

fn fixtures() -> BTreeMap<String, String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/thresholds.txt");
    let text = std::fs::read_to_string(&path).expect("thresholds fixture");
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value");
            (k.trim().to_string(), v.trim().to_string())
        })
        .collect()
}

fn fixture_matches(fx: &BTreeMap<String, String>, key: &str, value: f64) -> bool {
    fx.get(key).and_then(|v| v.parse::<f64>().ok()) == Some(value)
}

fn nondegenerate_up_to_3() -> Vec<BooleanFunction> {
    (2..=3)
        .flat_map(all_functions)
        .filter(|f| f.is_nondegenerate_by_degree())
        .collect()
}

/// `Σ_f` by direct counting over `J` in lexicographic order (first index slowest).
fn brute_sigma(db: &Database, f: &BooleanFunction) -> Vec<i64> {
    let (n, d, k) = (db.n(), db.d(), f.arity() - 1);
    let rows = d.pow(k as u32);
    (0..rows)
        .map(|idx| {
            let mut j = vec![0; k];
            let mut rem = idx;
            for slot in j.iter_mut().rev() {
                *slot = rem % d;
                rem /= d;
            }
            (0..n)
                .filter(|&i| {
                    let mut bits: Vec<bool> = j.iter().map(|&c| db.u().get(i, c) == 1.0).collect();
                    bits.push(db.s()[i]);
                    f.eval(&bits)
                })
                .count() as i64
        })
        .collect()
}

fn as_int(v: f64) -> Option<i64> {
    (v.fract() == 0.0 && v.abs() < 1e15).then_some(v as i64)
}

/// `scale * (A s + b)` in integers, or `None` if an entry of `scale * A` or
/// `scale * b` is not an integer.
fn integer_reconstruction(a: &DenseMatrix, b: &[f64], s: &[bool], scale: f64) -> Option<Vec<i64>> {
    (0..a.rows())
        .map(|r| {
            let mut acc = as_int(scale * b[r])?;
            for (c, &bit) in s.iter().enumerate() {
                acc += as_int(scale * a.get(r, c))? * bit as i64;
            }
            Some(acc)
        })
        .collect()
}

fn random_instances(count: u64) -> Vec<Database> {
    let mut rng = seeded(stream_seed(MASTER_SEED, Stream::Data));
    (0..count)
        .map(|t| {
            let n = rng.random_range(1..=20);
            let d = rng.random_range(1..=6);
            Database::synthetic_binary(n, d, derive_seed(MASTER_SEED, t))
        })
        .collect()
}

fn reduction_criterion(plus_minus: bool) -> Outcome {
    let functions = nondegenerate_up_to_3();
    let instances = random_instances(50);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for (t, db) in instances.iter().enumerate() {
        for f in &functions {
            let truth = brute_sigma(db, f);
            let lib = sigma_f(db, f, 1_000_000).expect("small instance");
            let y: Vec<f64> = truth.iter().map(|&c| c as f64).collect();
            // q_g has halves, so the ±1 route is compared at twice the scale
            let (recon, scale) = if plus_minus {
                (build_pm_boolean_system(db.u(), f, &y), 2)
            } else {
                (build_boolean_system(db.u(), f, &y), 1)
            };
            let recon = recon
                .ok()
                .and_then(|sys| integer_reconstruction(&sys.a, &sys.b, db.s(), scale as f64));
            let scaled: Vec<i64> = truth.iter().map(|c| c * scale).collect();
            checked += 1;
            if lib != truth || recon != Some(scaled) {
                failures.push(format!("instance {t} f={f}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{checked} (instance, f) pairs over {} functions, {} mismatches{}",
            functions.len(),
            failures.len(),
            failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut agree = true;
    let mut counts = BTreeMap::new();
    for p in [2usize, 3, 4] {
        let mut count = 0u128;
        for f in all_functions(p) {
            let by_degree = f.is_nondegenerate_by_degree();
            agree &= by_degree == f.is_nondegenerate_by_sign_sum();
            count += by_degree as u128;
        }
        counts.insert(p, count);
    }
    let formula_ok = counts.iter().all(|(&p, &c)| c == nondegenerate_count_formula(p as u32));
    let passed = agree && formula_ok && counts[&2] == 10;
    outcome(
        passed,
        format!(
            "tests agree on all 16+256+65536 functions: {agree}; counts p=2:{} p=3:{} p=4:{}; formula match: {formula_ok}",
            counts[&2], counts[&3], counts[&4]
        ),
    )
}

fn run_many(spec: &TrialSpec, trials: u64) -> Vec<Result<AttackReport, String>> {
    (0..trials)
        .into_par_iter()
        .map(|t| spec.run(TrialSpec::trial_seed(MASTER_SEED, t)).map_err(|e| e.to_string()))
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn boolean_spec(decoder: Decoder, d: usize, noise: NoiseKind) -> TrialSpec {
    TrialSpec {
        mechanism: MechanismConfig::BooleanCount { f: BooleanFunction::named("and3").unwrap() },
        decoder,
        n: 100,
        d,
        noise,
        options: AttackOptions::default(),
    }
}

fn criterion_4(fx: &BTreeMap<String, String>) -> Outcome {
    let beta = 0.1 * 100f64.sqrt();
    let results = run_many(&boolean_spec(Decoder::Ls, 20, NoiseKind::BoundedUniform { beta }), 100);
    let errors: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let reports: Vec<&AttackReport> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let violations = reports
        .iter()
        .filter(|r| r.hamming as f64 > r.ls_bound.expect("least squares"))
        .count();
    let fractions: Vec<f64> = reports.iter().map(|r| r.hamming_fraction).collect();
    let m = mean(&fractions);
    let passed = errors.is_empty()
        && violations == 0
        && m <= C4_MEAN_HAMMING_MAX
        && fixture_matches(fx, "c4_mean_hamming_max", C4_MEAN_HAMMING_MAX);
    outcome(
        passed,
        format!(
            "100 runs, {} errors, {violations} bound violations, mean hamming_fraction {m:.4} (<= {C4_MEAN_HAMMING_MAX})",
            errors.len()
        ),
    )
}

fn mean_recovery(results: &[Result<AttackReport, String>]) -> (f64, usize) {
    let errors = results.iter().filter(|r| r.is_err()).count();
    let rec: Vec<f64> = results
        .iter()
        .map(|r| r.as_ref().map_or(0.0, |r| 1.0 - r.hamming_fraction))
        .collect();
    (mean(&rec), errors)
}

fn criterion_5(fx: &BTreeMap<String, String>) -> Outcome {
    let noise = NoiseKind::GrossPlusBounded {
        gamma: 0.05,
        beta: 0.05 * 100f64.sqrt(),
        gross_magnitude: 1e6,
    };
    let results = run_many(&boolean_spec(Decoder::Lp, 25, noise), 10);
    let (rec, errors) = mean_recovery(&results);
    let passed = errors == 0
        && rec >= C5_MEAN_RECOVERY_MIN
        && fixture_matches(fx, "c5_mean_recovery_min", C5_MEAN_RECOVERY_MIN);
    outcome(passed, format!("10 seeds, {errors} errors, mean recovery {rec:.4} (>= {C5_MEAN_RECOVERY_MIN})"))
}

fn criterion_6(fx: &BTreeMap<String, String>) -> Outcome {
    let beta = 0.1 / 100f64.sqrt();
    let mut parts = Vec::new();
    let mut passed = fixture_matches(fx, "c6_mean_recovery_min", C6_MEAN_RECOVERY_MIN);
    for mechanism in [MechanismConfig::LinReg { k: 1 }, MechanismConfig::LogReg] {
        for decoder in [Decoder::Ls, Decoder::Lp] {
            let spec = TrialSpec {
                mechanism: mechanism.clone(),
                decoder,
                n: 100,
                d: 300,
                noise: NoiseKind::BoundedUniform { beta },
                options: AttackOptions::default(),
            };
            let (rec, errors) = mean_recovery(&run_many(&spec, 10));
            passed &= errors == 0 && rec >= C6_MEAN_RECOVERY_MIN;
            parts.push(format!("{}/{decoder} {rec:.3}", spec.mechanism.mechanism()));
        }
    }
    let mut identical = 0;
    for t in 0..10 {
        let seed = TrialSpec::trial_seed(MASTER_SEED, t);
        let run = |mechanism| {
            TrialSpec {
                mechanism,
                decoder: Decoder::Ls,
                n: 100,
                d: 300,
                noise: NoiseKind::None,
                options: AttackOptions::default(),
            }
            .run(seed)
        };
        let lin = run(MechanismConfig::LinReg { k: 1 });
        let mest = run(MechanismConfig::MEst { loss: "squared".into() });
        if let (Ok(a), Ok(b)) = (lin, mest) {
            identical += (a.s_hat == b.s_hat && a.hamming == 0) as usize;
        }
    }
    passed &= identical == 10;
    outcome(
        passed,
        format!(
            "mean recovery {} (>= {C6_MEAN_RECOVERY_MIN}); squared-loss M-estimator equals linreg on {identical}/10 noiseless seeds",
            parts.join(", ")
        ),
    )
}

fn criterion_7(fx: &BTreeMap<String, String>) -> Outcome {
    let and3 = BooleanFunction::named("and3").unwrap();
    let f2 = decompose_last_variable(&and3).unwrap().f2;
    let g2 = decompose_pm(&to_pm_function(&and3)).unwrap().g2;
    let seeds: Vec<u64> = (0..10).map(|s| derive_seed(MASTER_SEED, s)).collect();
    let mut means = Vec::new();
    for d in [10usize, 15, 20] {
        let ratios: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| {
                let t = gen_matrix(TauRandomSpec::Bernoulli01, d, d, seed);
                let a = row_function_matrix(&f2, &[&t, &t], RowOrder::AllTuples).unwrap();
                least_singular_value(&a).unwrap() / ((d * d) as f64).sqrt()
            })
            .collect();
        means.push(mean(&ratios));
    }
    let spread = means.iter().copied().fold(0.0, f64::max) / means.iter().copied().fold(f64::INFINITY, f64::min);
    let euclid: Vec<f64> = seeds
        .par_iter()
        .map(|&seed| {
            let v = gen_matrix(TauRandomSpec::Rademacher, 20, 20, seed);
            let a = row_function_matrix(&g2, &[&v, &v], RowOrder::AllTuples).unwrap();
            euclidean_ratio_probe(&a, 64, stream_seed(seed, Stream::Probe)).unwrap().ratio
        })
        .collect();
    let euclid_min = euclid.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = spread.is_finite()
        && spread < C7_SIGMA_SPREAD_MAX
        && euclid_min >= C7_EUCLID_RATIO_MIN
        && fixture_matches(fx, "c7_sigma_spread_max", C7_SIGMA_SPREAD_MAX)
        && fixture_matches(fx, "c7_euclid_ratio_min", C7_EUCLID_RATIO_MIN);
    outcome(
        passed,
        format!(
            "mean sigma_min/sqrt(d^2) at d=10,15,20: {:.4} {:.4} {:.4}, spread {spread:.3} (< {C7_SIGMA_SPREAD_MAX}); min Euclidean ratio {euclid_min:.3} (>= {C7_EUCLID_RATIO_MIN})",
            means[0], means[1], means[2]
        ),
    )
}

// --- criterion 8: independent rational oracles -------------------------------

fn rat(v: i64) -> Rational64 {
    Rational64::from_integer(v)
}

/// Top coefficient of the multilinear form of `h` on `{0,1}^k`, by Möbius inversion.
fn top_zero_one(table: &[i8], k: usize) -> Rational64 {
    let sum: i64 = (0..1usize << k)
        .map(|x| {
            let sign = if (k - x.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
            sign * table[x] as i64
        })
        .sum();
    rat(sum)
}

/// Fourier coefficient of monomial `set` of `h` on `{-1,1}^k` (bit set means +1).
fn walsh(table: &[i8], k: usize, set: usize) -> Rational64 {
    let sum: i64 = (0..1usize << k)
        .map(|x| {
            let minus = (set & !x).count_ones();
            let chi = if minus.is_multiple_of(2) { 1 } else { -1 };
            chi * table[x] as i64
        })
        .sum();
    Rational64::new(sum, 1 << k)
}

fn pm_point(x: usize, k: usize) -> Vec<i64> {
    (0..k).map(|i| if x >> i & 1 == 1 { 1 } else { -1 }).collect()
}

/// `prod (δ_i - δ'_i) == c_h sum_I (-1)^|I| h(δ(I))`, `δ(I)` taking `δ'` on `I`.
fn derivative_holds(table: &[i8], k: usize, p: usize, q: usize) -> bool {
    let c = top_zero_one(table, k).recip();
    let lhs: i64 = (0..k).map(|i| (p >> i & 1) as i64 - (q >> i & 1) as i64).product();
    let rhs: Rational64 = (0..1usize << k)
        .map(|set| {
            let point = (p & !set) | (q & set);
            let sign = if set.count_ones() % 2 == 0 { 1 } else { -1 };
            rat(sign * table[point] as i64)
        })
        .sum();
    rat(lhs) == c * rhs
}

/// `prod φ_i == c_h (sum_{I ⊊ [k]} (-1)^{k-|I|} P_I(φ) + h(φ))`, with `P_I` the
/// multilinear form of `h` keeping only monomials inside `I`.
fn pm_holds(table: &[i8], k: usize, x: usize) -> bool {
    let full = (1usize << k) - 1;
    let c = walsh(table, k, full).recip();
    let phi = pm_point(x, k);
    let chi = |set: usize| -> i64 { (0..k).filter(|i| set >> i & 1 == 1).map(|i| phi[i]).product() };
    let mut sum = rat(table[x] as i64);
    for i_set in 0..full {
        let sign = if (k - i_set.count_ones() as usize).is_multiple_of(2) { 1 } else { -1 };
        let p_i: Rational64 = (0..=full)
            .filter(|s| s & !i_set == 0)
            .map(|s| walsh(table, k, s) * rat(chi(s)))
            .sum();
        sum += rat(sign) * p_i;
    }
    rat(chi(full)) == c * sum
}

/// Matrix form: `(T_1 - T'_1) ⊙ ... ⊙ (T_k - T'_k) == c_h sum_I (-1)^|I| Π_h(T(I))`.
fn matrix_form_holds(h: &SignedFunction, t: &DenseMatrix, t2: &DenseMatrix) -> bool {
    let k = h.arity();
    let c = top_zero_one(h.table(), k).recip();
    let (d, n) = t.shape();
    let mut rhs = vec![rat(0); d.pow(k as u32) * n];
    for set in 0..1usize << k {
        let factors: Vec<&DenseMatrix> = (0..k).map(|i| if set >> i & 1 == 1 { t2 } else { t }).collect();
        let m = row_function_matrix(h, &factors, RowOrder::AllTuples).unwrap();
        let sign = if set.count_ones() % 2 == 0 { 1 } else { -1 };
        for (acc, &v) in rhs.iter_mut().zip(m.as_slice()) {
            *acc += rat(sign * v as i64);
        }
    }
    let diff = DenseMatrix::from_fn(d, n, |i, j| t.get(i, j) - t2.get(i, j));
    let mut idx = 0;
    for row in 0..d.pow(k as u32) {
        let mut j = vec![0; k];
        let mut rem = row;
        for slot in j.iter_mut().rev() {
            *slot = rem % d;
            rem /= d;
        }
        for col in 0..n {
            let prod: i64 = j.iter().map(|&r| diff.get(r, col) as i64).product();
            if c * rhs[idx] != rat(prod) {
                return false;
            }
            idx += 1;
        }
    }
    true
}

fn signed_tables(k: usize) -> impl Iterator<Item = Vec<i8>> {
    let len = 1usize << k;
    (0..3usize.pow(len as u32)).map(move |mut code| {
        (0..len)
            .map(|_| {
                let v = (code % 3) as i8 - 1;
                code /= 3;
                v
            })
            .collect()
    })
}

fn random_01(rng: &mut impl Rng, d: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, n, |_, _| rng.random_range(0..2) as f64)
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut counts = [0usize; 3];
    // k <= 2: every {-1,0,1}-valued h with a nonzero top coefficient, every point (pair).
    for k in 1..=2 {
        for table in signed_tables(k) {
            let len = 1usize << k;
            if top_zero_one(&table, k) != rat(0) {
                let h = SignedFunction::from_table(k, Domain::ZeroOne, table.clone()).unwrap();
                for p in 0..len {
                    for q in 0..len {
                        ok &= derivative_holds(&table, k, p, q);
                        counts[0] += 1;
                    }
                }
                let mut rng = seeded(derive_seed(MASTER_SEED, counts[1] as u64));
                for _ in 0..4 {
                    let (d, n) = (rng.random_range(1..=4), rng.random_range(1..=4));
                    let (t, t2) = (random_01(&mut rng, d, n), random_01(&mut rng, d, n));
                    ok &= matrix_form_holds(&h, &t, &t2);
                    counts[1] += 1;
                }
                ok &= check_derivative_identity(&h, 16, counts[1] as u64).unwrap_or(false);
            }
            if walsh(&table, k, len - 1) != rat(0) {
                let h = SignedFunction::from_table(k, Domain::PlusMinus, table.clone()).unwrap();
                for x in 0..len {
                    ok &= pm_holds(&table, k, x);
                    counts[2] += 1;
                }
                ok &= check_pm_identity(&h, 8, counts[2] as u64).unwrap_or(false);
            }
        }
    }
    // k = 3: 10^3 random probes of each identity.
    let mut rng = seeded(stream_seed(MASTER_SEED, Stream::Probe));
    let k = 3;
    let (mut zero_one, mut plus_minus) = (0, 0);
    while zero_one < 1000 || plus_minus < 1000 {
        let table: Vec<i8> = (0..8).map(|_| rng.random_range(-1..=1)).collect();
        if zero_one < 1000 && top_zero_one(&table, k) != rat(0) {
            let (p, q) = (rng.random_range(0..8), rng.random_range(0..8));
            ok &= derivative_holds(&table, k, p, q);
            if zero_one % 10 == 0 {
                let h = SignedFunction::from_table(k, Domain::ZeroOne, table.clone()).unwrap();
                let (d, n) = (rng.random_range(1..=3), rng.random_range(1..=3));
                let (t, t2) = (random_01(&mut rng, d, n), random_01(&mut rng, d, n));
                ok &= matrix_form_holds(&h, &t, &t2);
                counts[1] += 1;
            }
            zero_one += 1;
        }
        if plus_minus < 1000 && walsh(&table, k, 7) != rat(0) {
            ok &= pm_holds(&table, k, rng.random_range(0..8));
            plus_minus += 1;
        }
    }
    outcome(
        ok,
        format!(
            "k<=2 exhaustive: {} point pairs, {} matrix-form instances, {} +-1 points; k=3: 1000 probes per identity",
            counts[0], counts[1], counts[2]
        ),
    )
}

// --- criterion 9 -------------------------------------------------------------

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_reconlab"))
        .args(args)
        .output()
        .expect("run reconlab");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let configs = [
        (
            "attack",
            "mechanism=boolean-count\nf=and3\nn=40\nd=16\nnoise=gross\ngamma=0.05\nbeta=0.5\ndecoder=lp\ntrials=3\nmaster_seed=7\n",
        ),
        ("attack", "mechanism=logreg\nn=30\nd=90\nnoise=bounded\nbeta=0.02\ntrials=3\nmaster_seed=7\n"),
        ("spectral", "family=rowfunc\nh=g2(maj3)\nd=8,10\nseeds=3\nmaster_seed=7\n"),
        ("sweep", "mechanism=linreg\nn=20\nd=60\nnoise=bounded\nbeta=0,0.05,0.2\ndecoder=ls,lp\ntrials=3\n"),
        ("selftest", ""),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (i, (cmd, text)) in configs.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.cfg"));
        std::fs::write(&cfg, text).unwrap();
        let cfg = cfg.to_str().unwrap();
        let mut outputs = Vec::new();
        for (run, workers) in [(0, "1"), (1, "4")] {
            let out = dir.path().join(format!("c{i}_{run}.csv"));
            let (code, _) = run_cli(&[cmd, "--config", cfg, "--seed", "11", "--workers", workers, "--out", out.to_str().unwrap()]);
            outputs.push((code, std::fs::read(&out).unwrap_or_default()));
        }
        let (code, stdout) = run_cli(&[cmd, "--config", cfg, "--seed", "11"]);
        let same = outputs[0] == outputs[1] && outputs[0].1 == stdout && code == 0 && outputs[0].0 == 0;
        let schema = outputs[0].1.starts_with(b"#schema=1\n");
        ok &= same && schema && !outputs[0].1.is_empty();
        details.push(format!("{cmd}#{i}:{}", if same && schema { "identical" } else { "DIFFERS" }));
    }
    outcome(ok, details.join(" "))
}

fn main() {
    let fx = fixtures();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("1 {0,1} reduction oracle", Box::new(|| timed(Some(C1_LIMIT), || reduction_criterion(false)))),
        ("2 +-1 reduction oracle", Box::new(|| timed(Some(C2_LIMIT), || reduction_criterion(true)))),
        ("3 non-degeneracy equivalence", Box::new(|| timed(Some(C3_LIMIT), criterion_3))),
        ("4 least-squares bound audit", Box::new(|| timed(Some(C4_LIMIT), || criterion_4(&fx)))),
        ("5 LP gross-corruption recovery", Box::new(|| timed(Some(C5_LIMIT), || criterion_5(&fx)))),
        ("6 regression attacks", Box::new(|| timed(Some(C6_LIMIT), || criterion_6(&fx)))),
        ("7 spectral stability", Box::new(|| timed(Some(C7_LIMIT), || criterion_7(&fx)))),
        ("8 identity suites", Box::new(|| timed(Some(C8_LIMIT), criterion_8))),
        ("9 CLI determinism", Box::new(|| timed(None, criterion_9))),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!("{} criterion {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.passed as usize;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
