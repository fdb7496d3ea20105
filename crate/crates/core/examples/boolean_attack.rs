//! Least-squares reconstruction from noisy AND counts as the noise grows.

use reconlab::attack::{AttackOptions, Decoder, MechanismConfig, TrialSpec};
use reconlab::boolfunc::BooleanFunction;
use reconlab::release::NoiseKind;

fn main() {
    let (n, d) = (60, 20);
    println!("beta,mean_hamming_fraction,mean_sigma_min");
    for beta in [0.0, 0.5, 2.0, 8.0, 32.0] {
        let spec = TrialSpec {
            mechanism: MechanismConfig::BooleanCount { f: BooleanFunction::and(3).unwrap() },
            decoder: Decoder::Ls,
            n,
            d,
            noise: NoiseKind::BoundedUniform { beta },
            options: AttackOptions::default(),
        };
        let reports: Vec<_> = (0..5).map(|t| spec.run(TrialSpec::trial_seed(1, t)).unwrap()).collect();
        let mean = |f: fn(&reconlab::attack::AttackReport) -> f64| {
            reports.iter().map(f).sum::<f64>() / reports.len() as f64
        };
        println!("{beta},{:.3},{:.2}", mean(|r| r.hamming_fraction), mean(|r| r.sigma_min));
    }
}
