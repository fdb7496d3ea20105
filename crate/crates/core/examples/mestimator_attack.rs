//! The gradient split `ell0 + ell2 * y` turns any 1-d M-estimator into a linear
//! system in the secret.

use reconlab::attack::{AttackOptions, Decoder, MechanismConfig, TrialSpec};
use reconlab::release::{ell2_variance, loss_by_id, Database, NoiseKind};

fn main() {
    for loss in ["squared", "logistic"] {
        let spec = TrialSpec {
            mechanism: MechanismConfig::MEst { loss: loss.to_string() },
            decoder: Decoder::Ls,
            n: 25,
            d: 100,
            noise: NoiseKind::BoundedUniform { beta: 0.01 },
            options: AttackOptions::default(),
        };
        let r = spec.run(TrialSpec::trial_seed(3, 0)).unwrap();
        let db = Database::synthetic_real(25, 1, 3);
        let xs: Vec<f64> = (0..25).map(|i| db.u().get(i, 0)).collect();
        let var = ell2_variance(loss_by_id(loss).unwrap().as_ref(), 0.2, &xs);
        println!("{loss}: hamming {:.3}, sigma_min {:.3}, var ell2 at 0.2 {var:.4}", r.hamming_fraction, r.sigma_min);
    }
}
