//! A tenth of the releases are wildly wrong: least squares falls apart, the LP
//! decoder does not.

use reconlab::attack::{AttackOptions, Decoder, MechanismConfig, TrialSpec};
use reconlab::boolfunc::BooleanFunction;
use reconlab::release::NoiseKind;

fn main() {
    let noise = NoiseKind::GrossPlusBounded { gamma: 0.1, beta: 0.5, gross_magnitude: 1e4 };
    for decoder in [Decoder::Ls, Decoder::Lp] {
        let spec = TrialSpec {
            mechanism: MechanismConfig::BooleanCount { f: BooleanFunction::and(3).unwrap() },
            decoder,
            n: 40,
            d: 16,
            noise,
            options: AttackOptions::default(),
        };
        for t in 0..3 {
            let r = spec.run(TrialSpec::trial_seed(4, t)).unwrap();
            println!("{decoder}: trial {t} wrong bits {}/{}", r.hamming, r.n);
        }
    }
}
