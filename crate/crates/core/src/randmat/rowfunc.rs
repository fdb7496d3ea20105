use crate::boolfunc::{BooleanFunction, CubeFunction, Domain, MultilinearPoly, SignedFunction};

use super::{checked_row_count, DenseMatrix, MatrixError, DEFAULT_ROW_CAP};

/// Which index tuples `J = (j_1, ..., j_k)` become rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowOrder {
    /// All `d^k` tuples, repeats included, lexicographic with `j_1` slowest.
    #[default]
    AllTuples,
    /// Strictly increasing tuples only (`C(d,k)` rows), lexicographic.
    DistinctSorted,
}

/// Index tuples in row order. Each inner vector has length `k`.
pub fn index_tuples(d: usize, k: usize, order: RowOrder) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(d: usize, k: usize, order: RowOrder, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let start = match (order, cur.last()) {
            (RowOrder::DistinctSorted, Some(&last)) => last + 1,
            _ => 0,
        };
        for j in start..d {
            cur.push(j);
            rec(d, k, order, cur, out);
            cur.pop();
        }
    }
    rec(d, k, order, &mut current, &mut out);
    out
}

/// A function applied entrywise across aligned rows of `k` factor matrices.
pub trait RowFunction {
    fn arity(&self) -> usize;
    /// The cube on which the function is tabulated, or `None` if it accepts any real input.
    fn table_domain(&self) -> Option<Domain>;
    /// Value at a cube point index; only called when `table_domain` is `Some`.
    fn table_value(&self, point: usize) -> f64;
    /// Value at real coordinates; only called when `table_domain` is `None`.
    fn real_value(&self, coords: &[f64]) -> f64;
}

impl RowFunction for SignedFunction {
    fn arity(&self) -> usize {
        SignedFunction::arity(self)
    }
    fn table_domain(&self) -> Option<Domain> {
        Some(self.domain())
    }
    fn table_value(&self, point: usize) -> f64 {
        self.eval_index(point) as f64
    }
    fn real_value(&self, _coords: &[f64]) -> f64 {
        unreachable!("table functions are evaluated by index")
    }
}

impl RowFunction for BooleanFunction {
    fn arity(&self) -> usize {
        BooleanFunction::arity(self)
    }
    fn table_domain(&self) -> Option<Domain> {
        Some(Domain::ZeroOne)
    }
    fn table_value(&self, point: usize) -> f64 {
        self.value_at(point) as f64
    }
    fn real_value(&self, _coords: &[f64]) -> f64 {
        unreachable!("table functions are evaluated by index")
    }
}

impl RowFunction for MultilinearPoly {
    fn arity(&self) -> usize {
        MultilinearPoly::arity(self)
    }
    fn table_domain(&self) -> Option<Domain> {
        None
    }
    fn table_value(&self, _point: usize) -> f64 {
        unreachable!("polynomials are evaluated at real coordinates")
    }
    fn real_value(&self, coords: &[f64]) -> f64 {
        self.eval_f64(coords)
    }
}

fn common_cols(factors: &[&DenseMatrix]) -> Result<usize, MatrixError> {
    let first = factors
        .first()
        .ok_or_else(|| MatrixError::Shape("no factor matrices".into()))?;
    let n = first.cols();
    if let Some(bad) = factors.iter().find(|m| m.cols() != n) {
        return Err(MatrixError::Shape(format!(
            "column counts differ: {n} vs {}",
            bad.cols()
        )));
    }
    Ok(n)
}

/// Row product `M_1 ⊙ ... ⊙ M_k`: rows are entrywise products of one row from each
/// factor, tuples in lexicographic order with the first factor's index slowest.
pub fn row_product(factors: &[&DenseMatrix]) -> Result<DenseMatrix, MatrixError> {
    let n = common_cols(factors)?;
    let mut out = factors[0].clone();
    for m in &factors[1..] {
        let rows = out.rows() * m.rows();
        if rows > DEFAULT_ROW_CAP {
            return Err(MatrixError::RowCap {
                rows: rows as u128,
                cap: DEFAULT_ROW_CAP,
            });
        }
        let mut data = Vec::with_capacity(rows * n);
        for i in 0..out.rows() {
            let a = out.row(i);
            for j in 0..m.rows() {
                data.extend(a.iter().zip(m.row(j)).map(|(x, y)| x * y));
            }
        }
        out = DenseMatrix::from_row_major(rows, n, data)?;
    }
    Ok(out)
}

/// Row-function matrix `Π_h(T_1, ..., T_k)` with entry `(J, a)` equal to
/// `h(T_1[j_1, a], ..., T_k[j_k, a])`.
///
/// Tabulated `h` requires every factor entry to lie on its cube; polynomial `h`
/// accepts any real entries.
pub fn row_function_matrix<H: RowFunction + ?Sized>(
    h: &H,
    factors: &[&DenseMatrix],
    order: RowOrder,
) -> Result<DenseMatrix, MatrixError> {
    let k = h.arity();
    if factors.len() != k {
        return Err(MatrixError::Arity {
            arity: k,
            given: factors.len(),
        });
    }
    let n = common_cols(factors)?;
    let d = factors[0].rows();
    if factors.iter().any(|m| m.rows() != d) {
        return Err(MatrixError::Shape("factor matrices must have equal row counts".into()));
    }
    checked_row_count(d, k, DEFAULT_ROW_CAP)?;
    let tuples = index_tuples(d, k, order);
    let mut data = Vec::with_capacity(tuples.len() * n);

    match h.table_domain() {
        Some(domain) => {
            // per factor, the cube bit of every entry
            let bits: Vec<Vec<usize>> = factors
                .iter()
                .map(|m| {
                    m.as_slice()
                        .iter()
                        .enumerate()
                        .map(|(idx, &v)| {
                            domain.bit_of(v).ok_or(MatrixError::Domain {
                                row: idx / n,
                                col: idx % n,
                                value: v,
                                domain,
                            })
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?;
            for tuple in &tuples {
                for a in 0..n {
                    let point = tuple
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (t, &j)| acc | (bits[t][j * n + a] << t));
                    data.push(h.table_value(point));
                }
            }
        }
        None => {
            let mut coords = vec![0.0; k];
            for tuple in &tuples {
                for a in 0..n {
                    for (t, &j) in tuple.iter().enumerate() {
                        coords[t] = factors[t].get(j, a);
                    }
                    data.push(h.real_value(&coords));
                }
            }
        }
    }
    DenseMatrix::from_row_major(tuples.len(), n, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfunc::{decompose_last_variable, to_multilinear};
    use crate::randmat::{gen_matrix, TauRandomSpec};

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_row_product() {
        let i2 = DenseMatrix::identity(2);
        let p = row_product(&[&i2, &i2]).unwrap();
        assert_eq!(p, m(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]));
    }

    #[test]
    fn single_factor_and_ones() {
        let t = gen_matrix(TauRandomSpec::Rademacher, 3, 4, 1);
        assert_eq!(row_product(&[&t]).unwrap(), t);
        let ones = DenseMatrix::filled(3, 2, 1.0);
        assert_eq!(row_product(&[&ones, &ones]).unwrap(), DenseMatrix::filled(9, 2, 1.0));
        assert!(row_product(&[&ones, &DenseMatrix::filled(3, 3, 1.0)]).is_err());
    }

    #[test]
    fn unequal_factor_heights() {
        let a = m(&[&[2.0, 3.0]]);
        let b = m(&[&[1.0, 0.0], &[5.0, 7.0]]);
        assert_eq!(row_product(&[&a, &b]).unwrap(), m(&[&[2.0, 0.0], &[10.0, 21.0]]));
    }

    #[test]
    fn dictator_row_function_is_identity() {
        let h = SignedFunction::from_index_fn(1, Domain::ZeroOne, |p| p as i64).unwrap();
        let t = gen_matrix(TauRandomSpec::Bernoulli01, 4, 3, 5);
        assert_eq!(row_function_matrix(&h, &[&t], RowOrder::AllTuples).unwrap(), t);
    }

    #[test]
    fn product_function_matches_row_product() {
        let and2 = BooleanFunction::and(2).unwrap();
        let t = gen_matrix(TauRandomSpec::Bernoulli01, 4, 5, 2);
        let lhs = row_function_matrix(&and2, &[&t, &t], RowOrder::AllTuples).unwrap();
        assert_eq!(lhs, row_product(&[&t, &t]).unwrap());
    }

    #[test]
    fn xor_f2_row() {
        let split = decompose_last_variable(&BooleanFunction::xor(2).unwrap()).unwrap();
        let t = m(&[&[0.0, 1.0]]);
        let out = row_function_matrix(&split.f2, &[&t], RowOrder::AllTuples).unwrap();
        assert_eq!(out, m(&[&[1.0, -1.0]]));
    }

    #[test]
    fn table_rejects_off_cube_entries() {
        let and2 = BooleanFunction::and(2).unwrap();
        let t = m(&[&[0.0, 0.5]]);
        assert!(matches!(
            row_function_matrix(&and2, &[&t, &t], RowOrder::AllTuples),
            Err(MatrixError::Domain { col: 1, .. })
        ));
        let poly = to_multilinear(&and2);
        let out = row_function_matrix(&poly, &[&t, &t], RowOrder::AllTuples).unwrap();
        assert_eq!(out, m(&[&[0.0, 0.25]]));
    }

    #[test]
    fn distinct_sorted_rows() {
        assert_eq!(index_tuples(4, 2, RowOrder::DistinctSorted).len(), 6);
        assert_eq!(index_tuples(4, 2, RowOrder::AllTuples).len(), 16);
        assert_eq!(index_tuples(3, 2, RowOrder::AllTuples)[1], vec![0, 1]);
        let and2 = BooleanFunction::and(2).unwrap();
        let t = gen_matrix(TauRandomSpec::Bernoulli01, 5, 3, 8);
        let out = row_function_matrix(&and2, &[&t, &t], RowOrder::DistinctSorted).unwrap();
        assert_eq!(out.rows(), 10);
    }

    #[test]
    fn arity_mismatch() {
        let and2 = BooleanFunction::and(2).unwrap();
        let t = DenseMatrix::zeros(2, 2);
        assert!(matches!(
            row_function_matrix(&and2, &[&t], RowOrder::AllTuples),
            Err(MatrixError::Arity { arity: 2, given: 1 })
        ));
    }
}
