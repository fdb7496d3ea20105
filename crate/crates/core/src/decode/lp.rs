//! ℓ1 regression `min_s ||A s - z||_1` through its dual linear program
//!
//! ```text
//!     min  -z^T x   s.t.  A^T x = 0,  -1 <= x <= 1
//! ```
//!
//! solved by a bounded-variable dual simplex. A basis is a set of `n` rows of `A`;
//! the multipliers of the equality rows are `-s` where `s` interpolates the basic
//! rows, and the reduced cost of row `j` is its residual `(A s - z)_j`. Every
//! variable is boxed, so placing each nonbasic variable at the bound matching the
//! sign of its reduced cost makes any basis dual feasible and no phase one is
//! needed. The box-constrained problem `0 <= s <= 1` adds columns `±e_i`.

use nalgebra::DMatrix;

use super::DecodeError;
use crate::randmat::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Options {
    /// Restrict `s` to `[0, 1]^n`.
    pub box_constrained: bool,
    pub max_iter: usize,
    /// Rebuild the basis inverse from scratch this often.
    pub refactor_every: usize,
}

impl Default for L1Options {
    fn default() -> Self {
        Self { box_constrained: false, max_iter: 50_000, refactor_every: 64 }
    }
}

/// Optimality evidence for an ℓ1 solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpCertificate {
    pub iterations: usize,
    /// `||A s - z||_1` at the returned `s`.
    pub objective: f64,
    /// Objective of the dual-feasible point recovered from the final basis.
    pub dual_bound: f64,
    pub gap: f64,
    /// `||A^T w||_inf` for the dual point; zero in exact arithmetic.
    pub equality_residual: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub s: Vec<f64>,
    pub certificate: LpCertificate,
}

#[derive(Debug, Clone, Copy)]
enum Col {
    Row(usize),
    /// `+e_i`, cost 0.
    Pos(usize),
    /// `-e_i`, cost 1.
    Neg(usize),
}

struct Problem<'a> {
    a: &'a DenseMatrix,
    z: &'a [f64],
    m: usize,
    n: usize,
    boxed: bool,
    /// Upper bounds of the slack columns, each above `sum_j |A_ji|`.
    slack_cap: Vec<f64>,
}

impl Problem<'_> {
    fn num_cols(&self) -> usize {
        if self.boxed {
            self.m + 2 * self.n
        } else {
            self.m
        }
    }

    fn col(&self, j: usize) -> Col {
        if j < self.m {
            Col::Row(j)
        } else if j < self.m + self.n {
            Col::Pos(j - self.m)
        } else {
            Col::Neg(j - self.m - self.n)
        }
    }

    fn cost(&self, j: usize) -> f64 {
        match self.col(j) {
            Col::Row(i) => -self.z[i],
            Col::Pos(_) => 0.0,
            Col::Neg(_) => 1.0,
        }
    }

    fn bounds(&self, j: usize) -> (f64, f64) {
        match self.col(j) {
            Col::Row(_) => (-1.0, 1.0),
            Col::Pos(i) | Col::Neg(i) => (0.0, self.slack_cap[i]),
        }
    }

    fn dot(&self, j: usize, v: &[f64]) -> f64 {
        match self.col(j) {
            Col::Row(i) => self.a.row(i).iter().zip(v).map(|(p, q)| p * q).sum(),
            Col::Pos(i) => v[i],
            Col::Neg(i) => -v[i],
        }
    }

    fn axpy(&self, j: usize, x: f64, out: &mut [f64]) {
        match self.col(j) {
            Col::Row(i) => {
                for (o, a) in out.iter_mut().zip(self.a.row(i)) {
                    *o += x * a;
                }
            }
            Col::Pos(i) => out[i] += x,
            Col::Neg(i) => out[i] -= x,
        }
    }

    fn column_vec(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        self.axpy(j, 1.0, &mut v);
        v
    }

    fn objective(&self, s: &[f64]) -> f64 {
        self.a
            .mul_vec(s)
            .iter()
            .zip(self.z)
            .map(|(p, q)| (p - q).abs())
            .sum()
    }
}

struct State {
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    at_upper: Vec<bool>,
    /// Inverse of the matrix whose rows are the basic columns.
    ginv: DMatrix<f64>,
}

impl State {
    fn refactor(&mut self, prob: &Problem) -> Result<(), DecodeError> {
        let n = prob.n;
        let mut g = DMatrix::zeros(n, n);
        for (p, &j) in self.basis.iter().enumerate() {
            for (k, v) in prob.column_vec(j).into_iter().enumerate() {
                g[(p, k)] = v;
            }
        }
        self.ginv = g.try_inverse().ok_or_else(|| {
            DecodeError::Shape("basis matrix became singular during refactorization".into())
        })?;
        Ok(())
    }

    /// `s` solving `G s = -c_B`.
    fn primal_s(&self, prob: &Problem) -> Vec<f64> {
        let n = prob.n;
        let c: Vec<f64> = self.basis.iter().map(|&j| -prob.cost(j)).collect();
        (0..n)
            .map(|r| (0..n).map(|k| self.ginv[(r, k)] * c[k]).sum())
            .collect()
    }

    fn nonbasic_value(&self, prob: &Problem, j: usize) -> f64 {
        let (lo, hi) = prob.bounds(j);
        if self.at_upper[j] {
            hi
        } else {
            lo
        }
    }

    /// Basic variable values `x_B = -G^{-T} sum_N x_j M_j`.
    fn basic_values(&self, prob: &Problem) -> Vec<f64> {
        let n = prob.n;
        let mut v = vec![0.0; n];
        for j in 0..prob.num_cols() {
            if !self.in_basis[j] {
                let x = self.nonbasic_value(prob, j);
                if x != 0.0 {
                    prob.axpy(j, x, &mut v);
                }
            }
        }
        (0..n)
            .map(|p| -(0..n).map(|k| self.ginv[(k, p)] * v[k]).sum::<f64>())
            .collect()
    }
}

/// Rows sorted by `|residual|` at the least-squares fit, greedily kept while
/// linearly independent, until `n` are found.
fn initial_rows(a: &DenseMatrix, z: &[f64]) -> Result<Vec<usize>, DecodeError> {
    let (m, n) = a.shape();
    let na = a.to_nalgebra();
    let svd = na.clone().svd(true, true);
    let s0 = svd
        .solve(&nalgebra::DVector::from_column_slice(z), 1e-12)
        .map_err(|e| DecodeError::Shape(e.to_string()))?;
    let r = &na * s0 - nalgebra::DVector::from_column_slice(z);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| r[i].abs().total_cmp(&r[j].abs()).then(i.cmp(&j)));

    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut chosen = Vec::with_capacity(n);
    for i in order {
        let row = a.row(i);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut w = row.to_vec();
        for _ in 0..2 {
            for b in &q {
                let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                for (wk, bk) in w.iter_mut().zip(b) {
                    *wk -= c * bk;
                }
            }
        }
        let wn = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if wn > 1e-9 * norm {
            w.iter_mut().for_each(|v| *v /= wn);
            q.push(w);
            chosen.push(i);
            if chosen.len() == n {
                return Ok(chosen);
            }
        }
    }
    Err(DecodeError::RankDeficient {
        rank: chosen.len(),
        n,
        sigma_min: 0.0,
        sigma_max: svd.singular_values.max(),
    })
}

/// Solves `min ||A s - z||_1` (optionally with `0 <= s <= 1`) and checks the
/// optimality certificate against `tolerance`.
pub fn l1_minimize(
    a: &DenseMatrix,
    z: &[f64],
    opts: &L1Options,
    tolerance: f64,
) -> Result<LpSolution, DecodeError> {
    let (m, n) = a.shape();
    if z.len() != m {
        return Err(DecodeError::Shape(format!("A has {m} rows, z has {}", z.len())));
    }
    if m < n || n == 0 {
        return Err(DecodeError::Shape(format!("need m >= n >= 1, got {m}x{n}")));
    }
    let slack_cap = (0..n)
        .map(|i| (0..m).map(|j| a.get(j, i).abs()).sum::<f64>() + 1.0)
        .collect();
    let prob = Problem { a, z, m, n, boxed: opts.box_constrained, slack_cap };
    let total = prob.num_cols();

    let basis = if prob.boxed {
        (m..m + n).collect()
    } else {
        initial_rows(a, z)?
    };
    let mut in_basis = vec![false; total];
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut st = State {
        basis,
        in_basis,
        at_upper: vec![false; total],
        ginv: DMatrix::zeros(n, n),
    };
    st.refactor(&prob)?;

    let z_scale = 1.0 + z.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol_dual = 1e-12 * z_scale;
    let tol_primal = 1e-9;
    let tol_pivot = 1e-9;

    let mut iterations = 0;
    loop {
        let s = st.primal_s(&prob);
        for j in 0..total {
            if st.in_basis[j] {
                continue;
            }
            let d = prob.cost(j) + prob.dot(j, &s);
            if d > tol_dual {
                st.at_upper[j] = false;
            } else if d < -tol_dual {
                st.at_upper[j] = true;
            }
        }
        let x_b = st.basic_values(&prob);

        // leaving variable: largest bound violation
        let mut leave: Option<(usize, f64, bool)> = None;
        for (p, &xp) in x_b.iter().enumerate() {
            let (lo, hi) = prob.bounds(st.basis[p]);
            let (viol, above) = if xp < lo { (lo - xp, false) } else { (xp - hi, true) };
            if viol > tol_primal && leave.is_none_or(|(_, v, _)| viol > v) {
                leave = Some((p, viol, above));
            }
        }
        let Some((p, _, above)) = leave else {
            return certify(&prob, &st, s, x_b, iterations, tolerance);
        };

        if iterations >= opts.max_iter {
            let objective = prob.objective(&s);
            return Err(DecodeError::IterationCap { iterations, incumbent: s, objective });
        }

        let rho: Vec<f64> = (0..n).map(|k| st.ginv[(k, p)]).collect();
        // candidates move x_p toward its violated bound without breaking dual feasibility
        let mut cands: Vec<(usize, f64, f64)> = Vec::new();
        for j in 0..total {
            if st.in_basis[j] {
                continue;
            }
            let alpha = prob.dot(j, &rho);
            if alpha.abs() <= tol_pivot {
                continue;
            }
            let eligible = if above {
                (!st.at_upper[j] && alpha > 0.0) || (st.at_upper[j] && alpha < 0.0)
            } else {
                (!st.at_upper[j] && alpha < 0.0) || (st.at_upper[j] && alpha > 0.0)
            };
            if eligible {
                let d = prob.cost(j) + prob.dot(j, &s);
                cands.push((j, d.abs(), alpha));
            }
        }
        if cands.is_empty() {
            return Err(DecodeError::Shape("dual ratio test found no entering column".into()));
        }
        let bound = cands
            .iter()
            .map(|&(_, d, a)| (d + tol_dual) / a.abs())
            .fold(f64::INFINITY, f64::min);
        let &(q, _, alpha_q) = cands
            .iter()
            .filter(|&&(_, d, a)| d / a.abs() <= bound)
            .max_by(|x, y| x.2.abs().total_cmp(&y.2.abs()).then(y.0.cmp(&x.0)))
            .expect("the minimizing candidate passes the filter");

        let leaving = st.basis[p];
        st.basis[p] = q;
        st.in_basis[q] = true;
        st.in_basis[leaving] = false;
        st.at_upper[leaving] = above;
        iterations += 1;

        if iterations % opts.refactor_every.max(1) == 0 {
            st.refactor(&prob)?;
        } else {
            // rank-one update for replacing row p of G by column q
            let mq = prob.column_vec(q);
            let mut u: Vec<f64> = (0..n)
                .map(|k| (0..n).map(|l| mq[l] * st.ginv[(l, k)]).sum())
                .collect();
            u[p] -= 1.0;
            for r in 0..n {
                let f = rho[r] / alpha_q;
                if f != 0.0 {
                    for k in 0..n {
                        st.ginv[(r, k)] -= f * u[k];
                    }
                }
            }
        }
    }
}

fn certify(
    prob: &Problem,
    st: &State,
    s: Vec<f64>,
    x_b: Vec<f64>,
    iterations: usize,
    tolerance: f64,
) -> Result<LpSolution, DecodeError> {
    let (m, n) = (prob.m, prob.n);
    let mut x = vec![0.0; prob.num_cols()];
    for j in 0..x.len() {
        if !st.in_basis[j] {
            x[j] = st.nonbasic_value(prob, j);
        }
    }
    for (p, &j) in st.basis.iter().enumerate() {
        x[j] = x_b[p];
    }
    // dual point w = x restricted to the row variables, pulled into the box
    let w: Vec<f64> = x[..m].iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    let mut atw = vec![0.0; n];
    for (i, &wi) in w.iter().enumerate() {
        prob.axpy(i, wi, &mut atw);
    }
    let zw: f64 = prob.z.iter().zip(&w).map(|(a, b)| a * b).sum();

    let (s, dual_bound, equality_residual) = if prob.boxed {
        let s: Vec<f64> = s.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        let bound = zw - atw.iter().map(|v| v.max(0.0)).sum::<f64>();
        (s, bound, 0.0)
    } else {
        let eq = atw.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        (s, zw, eq)
    };
    let objective = prob.objective(&s);
    let gap = objective - dual_bound;
    let certificate = LpCertificate {
        iterations,
        objective,
        dual_bound,
        gap,
        equality_residual,
        tolerance,
    };
    if gap > tolerance || equality_residual > tolerance {
        return Err(DecodeError::Certificate { gap, equality_residual });
    }
    Ok(LpSolution { s, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randmat::{gen_matrix, TauRandomSpec};
    use rand::Rng as _;

    #[test]
    fn two_point_median() {
        // min |s| + |s - 2| is attained on [0, 2] with value 2
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let sol = l1_minimize(&a, &[0.0, 2.0], &L1Options::default(), 1e-9).unwrap();
        assert!((sol.certificate.objective - 2.0).abs() < 1e-12);
        assert!((-1e-12..=2.0 + 1e-12).contains(&sol.s[0]));
    }

    #[test]
    fn odd_median() {
        let a = DenseMatrix::filled(5, 1, 1.0);
        let sol = l1_minimize(&a, &[3.0, -1.0, 10.0, 2.0, 2.5], &L1Options::default(), 1e-9).unwrap();
        assert!((sol.s[0] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn box_variant_clips() {
        let a = DenseMatrix::filled(3, 1, 1.0);
        let opts = L1Options { box_constrained: true, ..Default::default() };
        let sol = l1_minimize(&a, &[3.0, 4.0, 5.0], &opts, 1e-9).unwrap();
        assert!((sol.s[0] - 1.0).abs() < 1e-12);
        assert!((sol.certificate.objective - 9.0).abs() < 1e-9);
        let sol = l1_minimize(&a, &[-3.0, 0.25, 0.5], &opts, 1e-9).unwrap();
        assert!((sol.s[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn beats_truth_on_random_instances() {
        for seed in 0..10u64 {
            let a = gen_matrix(TauRandomSpec::Rademacher, 60, 8, seed);
            let mut r = crate::rng::seeded(seed + 100);
            let s: Vec<f64> = (0..8).map(|_| r.random_range(0..2) as f64).collect();
            let z: Vec<f64> = a
                .mul_vec(&s)
                .iter()
                .map(|v| v + if r.random::<f64>() < 0.2 { 30.0 } else { r.random_range(-0.5..0.5) })
                .collect();
            let sol = l1_minimize(&a, &z, &L1Options::default(), 1e-7).unwrap();
            let at_truth: f64 = a.mul_vec(&s).iter().zip(&z).map(|(p, q)| (p - q).abs()).sum();
            assert!(sol.certificate.objective <= at_truth + 1e-6);
            assert!(sol.certificate.gap.abs() <= 1e-7);
        }
    }

    #[test]
    fn iteration_cap_returns_incumbent() {
        let a = gen_matrix(TauRandomSpec::Rademacher, 80, 10, 4);
        let z: Vec<f64> = (0..80).map(|i| (i as f64).sin() * 10.0).collect();
        let opts = L1Options { max_iter: 1, ..Default::default() };
        match l1_minimize(&a, &z, &opts, 1e-7) {
            Err(DecodeError::IterationCap { incumbent, objective, .. }) => {
                assert_eq!(incumbent.len(), 10);
                assert!(objective.is_finite());
            }
            other => panic!("expected iteration cap, got {other:?}"),
        }
    }
}
