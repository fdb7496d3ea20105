//! Multilinear expansions, the last-variable splits and nondegeneracy counts.

use reconlab::boolfunc::{
    all_functions, decompose_last_variable, decompose_pm, nondegenerate_count_formula, to_multilinear,
    to_pm_function, BooleanFunction,
};

fn main() {
    for name in ["and3", "xor3", "maj3"] {
        let f = BooleanFunction::named(name).unwrap();
        let p = to_multilinear(&f);
        let split = decompose_last_variable(&f).unwrap();
        let pm = decompose_pm(&to_pm_function(&f)).unwrap();
        println!(
            "{name}: degree {}, top coefficient {}, deg f2 = {}, deg g2 = {}",
            p.degree(),
            p.top_coefficient(),
            to_multilinear(&split.f2).degree(),
            to_multilinear(&pm.g2).degree(),
        );
    }

    for arity in 1..=4u32 {
        let counted = all_functions(arity as usize).filter(|f| f.is_nondegenerate_by_degree()).count();
        println!(
            "arity {arity}: {counted} nondegenerate functions (closed form {})",
            nondegenerate_count_formula(arity)
        );
    }
}
