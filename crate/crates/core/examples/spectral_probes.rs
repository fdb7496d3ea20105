//! Least singular value, operator norm and Euclidean-section ratio of a few matrix
//! families at growing sizes.

use reconlab::boolfunc::{decompose_pm, to_pm_function, BooleanFunction};
use reconlab::randmat::{
    gen_matrix, perturbed_matrix, row_function_matrix, spectral_report, RowOrder, TauRandomSpec,
};

fn main() {
    let g2 = decompose_pm(&to_pm_function(&BooleanFunction::and(3).unwrap())).unwrap().g2;
    println!("family,d,n,sigma_min,sigma_min/sqrt(rows),op_norm,euclid_ratio");
    for d in [10, 15, 20] {
        let v = gen_matrix(TauRandomSpec::Rademacher, d, d, d as u64);
        let families = [
            ("rademacher", gen_matrix(TauRandomSpec::Rademacher, d * d, d, d as u64)),
            ("perturbed", perturbed_matrix(d * d, d, 5.0, d as u64)),
            ("rowfunc g2(and3)", row_function_matrix(&g2, &[&v, &v], RowOrder::AllTuples).unwrap()),
        ];
        for (name, m) in families {
            let r = spectral_report(&m, 64, 1).unwrap();
            println!(
                "{name},{d},{d},{:.3},{:.3},{:.3},{:.3}",
                r.sigma_min,
                r.sigma_min / (r.m as f64).sqrt(),
                r.op_norm,
                r.euclid_ratio_min
            );
        }
    }
}
