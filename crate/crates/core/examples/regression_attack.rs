//! Secrets recovered from released regression coefficients.

use reconlab::attack::{AttackOptions, Decoder, MechanismConfig, TrialSpec};
use reconlab::release::NoiseKind;

fn main() {
    let cases = [
        ("linreg", MechanismConfig::LinReg { k: 1 }, 30, 90),
        ("linreg blocks of 3", MechanismConfig::LinReg { k: 3 }, 30, 90),
        ("logreg", MechanismConfig::LogReg, 30, 120),
    ];
    for (name, mechanism, n, d) in cases {
        for beta in [0.0, 0.01, 0.1] {
            let spec = TrialSpec {
                mechanism: mechanism.clone(),
                decoder: Decoder::Ls,
                n,
                d,
                noise: NoiseKind::BoundedUniform { beta },
                options: AttackOptions::default(),
            };
            let r = spec.run(TrialSpec::trial_seed(11, 0)).unwrap();
            println!(
                "{name}, beta {beta}: hamming {:.3}, rows used {}, sigma_min {:.3}",
                r.hamming_fraction, r.rows_used, r.sigma_min
            );
        }
    }
}
