//! Boolean functions on the cube, their multilinear representations and the
//! decompositions that make symmetric count releases linear in a secret column.
//!
//! Points of `{0,1}^p` are encoded as integers with the first variable in the
//! least significant bit. On the `{-1,1}^p` domain a set bit means `+1` and a
//! clear bit means `-1`, so `phi = 2*delta - 1` keeps the same index.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use thiserror::Error;

/// Largest supported arity; the truth table then has 65,536 entries.
pub const MAX_ARITY: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolFuncError {
    #[error("arity {0} outside supported range 1..={MAX_ARITY}")]
    Arity(usize),
    #[error("truth table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("value {0} outside {{-1,0,1}}")]
    SignedValue(i64),
    #[error("function must take values in {{-1,1}} for this operation")]
    NotPlusMinusValued,
    #[error("operation needs arity at least {needed}, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("expected a function on the {expected} domain")]
    WrongDomain { expected: Domain },
    #[error("cannot parse boolean function: {0}")]
    Parse(String),
}

/// The cube a function or polynomial lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `{0,1}^p`
    ZeroOne,
    /// `{-1,1}^p`
    PlusMinus,
}

impl Domain {
    /// Coordinate value of variable `var` at cube point `point`.
    #[inline]
    pub fn coordinate(self, point: usize, var: usize) -> i64 {
        let bit = (point >> var) & 1;
        match self {
            Domain::ZeroOne => bit as i64,
            Domain::PlusMinus => 2 * bit as i64 - 1,
        }
    }

    /// Table bit for a real coordinate, if the value lies on this cube.
    #[inline]
    pub fn bit_of(self, value: f64) -> Option<usize> {
        match self {
            Domain::ZeroOne if value == 0.0 => Some(0),
            Domain::ZeroOne if value == 1.0 => Some(1),
            Domain::PlusMinus if value == -1.0 => Some(0),
            Domain::PlusMinus if value == 1.0 => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::ZeroOne => f.write_str("zero-one"),
            Domain::PlusMinus => f.write_str("plus-minus"),
        }
    }
}

fn check_arity(arity: usize) -> Result<usize, BoolFuncError> {
    if arity == 0 || arity > MAX_ARITY {
        return Err(BoolFuncError::Arity(arity));
    }
    Ok(1usize << arity)
}

/// Anything with an integer value at every point of a cube.
pub trait CubeFunction {
    fn arity(&self) -> usize;
    fn domain(&self) -> Domain;
    /// Value at the point with the given index.
    fn value_at(&self, point: usize) -> i64;
}

/// A boolean function `{0,1}^p -> {0,1}` stored as a truth table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BooleanFunction {
    arity: usize,
    table: Vec<bool>,
}

impl BooleanFunction {
    pub fn from_table(arity: usize, table: Vec<bool>) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        if table.len() != len {
            return Err(BoolFuncError::TableLength {
                expected: len,
                got: table.len(),
            });
        }
        Ok(Self { arity, table })
    }

    /// Builds the table by evaluating `f` on every point, given as a slice of bits
    /// `(delta_1, ..., delta_p)`.
    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        let mut bits = vec![false; arity];
        let table = (0..len)
            .map(|point| {
                for (var, b) in bits.iter_mut().enumerate() {
                    *b = (point >> var) & 1 == 1;
                }
                f(&bits)
            })
            .collect();
        Ok(Self { arity, table })
    }

    /// Function whose table is the low `2^p` bits of `bits` (arity at most 6).
    pub fn from_index(arity: usize, bits: u64) -> Result<Self, BoolFuncError> {
        if arity > 6 {
            return Err(BoolFuncError::Arity(arity));
        }
        Self::from_fn(arity, |_| false).map(|mut f| {
            for (i, t) in f.table.iter_mut().enumerate() {
                *t = (bits >> i) & 1 == 1;
            }
            f
        })
    }

    pub fn constant(arity: usize, value: bool) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |_| value)
    }

    pub fn and(arity: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| x.iter().all(|&b| b))
    }

    pub fn or(arity: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| x.iter().any(|&b| b))
    }

    pub fn nand(arity: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| !x.iter().all(|&b| b))
    }

    pub fn xor(arity: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| x.iter().filter(|&&b| b).count() % 2 == 1)
    }

    /// True when strictly more than half of the inputs are set.
    pub fn majority(arity: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| 2 * x.iter().filter(|&&b| b).count() > x.len())
    }

    /// Parity of the variables selected by `mask` (bit `j` selects variable `j+1`).
    pub fn parity_of_subset(arity: usize, mask: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| {
            x.iter()
                .enumerate()
                .filter(|&(j, &b)| b && (mask >> j) & 1 == 1)
                .count()
                % 2
                == 1
        })
    }

    /// The projection `f(delta) = delta_var` (0-based variable index).
    pub fn dictator(arity: usize, var: usize) -> Result<Self, BoolFuncError> {
        Self::from_fn(arity, |x| x[var])
    }

    /// Looks up a named function such as `and3`, `or2`, `xor3`, `maj3`, `nand2`.
    pub fn named(name: &str) -> Result<Self, BoolFuncError> {
        let lower = name.trim().to_ascii_lowercase();
        let split = lower
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| BoolFuncError::Parse(format!("missing arity in {name:?}")))?;
        let (stem, digits) = lower.split_at(split);
        let arity: usize = digits
            .parse()
            .map_err(|_| BoolFuncError::Parse(format!("bad arity in {name:?}")))?;
        match stem {
            "and" => Self::and(arity),
            "or" => Self::or(arity),
            "xor" | "parity" => Self::xor(arity),
            "maj" | "majority" => Self::majority(arity),
            "nand" => Self::nand(arity),
            _ => Err(BoolFuncError::Parse(format!("unknown function name {name:?}"))),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    #[inline]
    pub fn eval_index(&self, point: usize) -> bool {
        self.table[point]
    }

    /// Evaluates at `(delta_1, ..., delta_p)`.
    pub fn eval(&self, bits: &[bool]) -> bool {
        assert_eq!(bits.len(), self.arity, "point has wrong arity");
        let point = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &b)| acc | ((b as usize) << j));
        self.table[point]
    }

    /// Full-degree test via the multilinear representation.
    pub fn is_nondegenerate_by_degree(&self) -> bool {
        to_multilinear(self).top_numerator() != 0
    }

    /// Signed-sum test: `sum (-1)^(f(delta) - sum_j delta_j) != 0`.
    pub fn is_nondegenerate_by_sign_sum(&self) -> bool {
        self.sign_sum() != 0
    }

    pub fn sign_sum(&self) -> i64 {
        self.table
            .iter()
            .enumerate()
            .map(|(point, &v)| {
                if (v as u32 + point.count_ones()).is_multiple_of(2) {
                    1
                } else {
                    -1
                }
            })
            .sum()
    }
}

impl CubeFunction for BooleanFunction {
    fn arity(&self) -> usize {
        self.arity
    }
    fn domain(&self) -> Domain {
        Domain::ZeroOne
    }
    fn value_at(&self, point: usize) -> i64 {
        self.table[point] as i64
    }
}

impl fmt::Display for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={};table=", self.arity)?;
        for &b in &self.table {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BooleanFunction {
    type Err = BoolFuncError;

    /// Parses `p=<arity>;table=<bits>`; named functions are accepted as a fallback.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if !s.contains('=') {
            return Self::named(s);
        }
        let mut arity = None;
        let mut table = None;
        for part in s.split(';') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| BoolFuncError::Parse(format!("malformed field {part:?}")))?;
            match key.trim() {
                "p" => {
                    arity = Some(value.trim().parse::<usize>().map_err(|_| {
                        BoolFuncError::Parse(format!("bad arity {value:?}"))
                    })?)
                }
                "table" => {
                    let bits = value
                        .trim()
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            other => Err(BoolFuncError::Parse(format!(
                                "table character {other:?} is not 0/1"
                            ))),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    table = Some(bits);
                }
                other => return Err(BoolFuncError::Parse(format!("unknown field {other:?}"))),
            }
        }
        match (arity, table) {
            (Some(p), Some(t)) => Self::from_table(p, t),
            _ => Err(BoolFuncError::Parse(format!("need both p and table in {s:?}"))),
        }
    }
}

/// A `{-1,0,1}`-valued function on either cube; holds `f2`, `g`, `g2`, `g3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedFunction {
    arity: usize,
    domain: Domain,
    table: Vec<i8>,
}

impl SignedFunction {
    pub fn from_table(arity: usize, domain: Domain, table: Vec<i8>) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        if table.len() != len {
            return Err(BoolFuncError::TableLength {
                expected: len,
                got: table.len(),
            });
        }
        if let Some(&bad) = table.iter().find(|v| !(-1..=1).contains(*v)) {
            return Err(BoolFuncError::SignedValue(bad as i64));
        }
        Ok(Self {
            arity,
            domain,
            table,
        })
    }

    /// Builds the table from `f(point_index)`.
    pub fn from_index_fn(
        arity: usize,
        domain: Domain,
        f: impl Fn(usize) -> i64,
    ) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        let table = (0..len)
            .map(|p| {
                let v = f(p);
                if (-1..=1).contains(&v) {
                    Ok(v as i8)
                } else {
                    Err(BoolFuncError::SignedValue(v))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            arity,
            domain,
            table,
        })
    }

    /// A boolean function viewed as a `{0,1}`-valued signed function.
    pub fn from_boolean(f: &BooleanFunction) -> Self {
        Self {
            arity: f.arity,
            domain: Domain::ZeroOne,
            table: f.table.iter().map(|&b| b as i8).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn table(&self) -> &[i8] {
        &self.table
    }

    #[inline]
    pub fn eval_index(&self, point: usize) -> i64 {
        self.table[point] as i64
    }

    /// Evaluates at integer coordinates, which must lie on this function's cube.
    pub fn eval(&self, coords: &[i64]) -> Option<i64> {
        if coords.len() != self.arity {
            return None;
        }
        let mut point = 0usize;
        for (j, &c) in coords.iter().enumerate() {
            let bit = self.domain.bit_of(c as f64)?;
            point |= bit << j;
        }
        Some(self.table[point] as i64)
    }

    pub fn is_plus_minus_valued(&self) -> bool {
        self.table.iter().all(|&v| v != 0)
    }
}

impl CubeFunction for SignedFunction {
    fn arity(&self) -> usize {
        self.arity
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn value_at(&self, point: usize) -> i64 {
        self.table[point] as i64
    }
}

/// Unique multilinear polynomial agreeing with a cube function.
///
/// Coefficients are exact: `coefficient(S) = numerator(S) / 2^scale_log2`. Polynomials
/// on `{0,1}^p` of integer-valued functions have integer coefficients
/// (`scale_log2 == 0`); on `{-1,1}^p` the denominator is `2^p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultilinearPoly {
    arity: usize,
    domain: Domain,
    scale_log2: u32,
    numerators: Vec<i64>,
}

impl MultilinearPoly {
    pub fn from_numerators(
        arity: usize,
        domain: Domain,
        scale_log2: u32,
        numerators: Vec<i64>,
    ) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        if numerators.len() != len {
            return Err(BoolFuncError::TableLength {
                expected: len,
                got: numerators.len(),
            });
        }
        Ok(Self {
            arity,
            domain,
            scale_log2,
            numerators,
        })
    }

    /// The monomial `x_1 * ... * x_p`.
    pub fn full_product(arity: usize, domain: Domain) -> Result<Self, BoolFuncError> {
        let len = check_arity(arity)?;
        let mut numerators = vec![0; len];
        numerators[len - 1] = 1;
        Ok(Self {
            arity,
            domain,
            scale_log2: 0,
            numerators,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn scale_log2(&self) -> u32 {
        self.scale_log2
    }

    /// Raw numerators indexed by subset mask.
    pub fn numerators(&self) -> &[i64] {
        &self.numerators
    }

    pub fn coefficient(&self, subset: usize) -> Rational64 {
        Rational64::new(self.numerators[subset], 1i64 << self.scale_log2)
    }

    /// Numerator of the coefficient of the monomial over all variables.
    pub fn top_numerator(&self) -> i64 {
        self.numerators[self.numerators.len() - 1]
    }

    pub fn top_coefficient(&self) -> Rational64 {
        self.coefficient(self.numerators.len() - 1)
    }

    /// Largest `|S|` with a nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.numerators
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(s, _)| s.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Exact value at a point of the polynomial's own cube.
    pub fn eval_point(&self, point: usize) -> Rational64 {
        let values: Vec<i64> = (0..self.arity)
            .map(|j| self.domain.coordinate(point, j))
            .collect();
        self.eval_exact(&values)
    }

    /// Exact value at arbitrary integer coordinates (zeros allowed).
    pub fn eval_exact(&self, coords: &[i64]) -> Rational64 {
        assert_eq!(coords.len(), self.arity, "point has wrong arity");
        let mut num = 0i64;
        for (subset, &c) in self.numerators.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono: i64 = (0..self.arity)
                .filter(|j| (subset >> j) & 1 == 1)
                .map(|j| coords[j])
                .product();
            num += c * mono;
        }
        Rational64::new(num, 1i64 << self.scale_log2)
    }

    /// Floating-point value at real coordinates.
    pub fn eval_f64(&self, coords: &[f64]) -> f64 {
        assert_eq!(coords.len(), self.arity, "point has wrong arity");
        let scale = (1u64 << self.scale_log2) as f64;
        let mut acc = 0.0;
        for (subset, &c) in self.numerators.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mono: f64 = (0..self.arity)
                .filter(|j| (subset >> j) & 1 == 1)
                .map(|j| coords[j])
                .product();
            acc += c as f64 * mono;
        }
        acc / scale
    }

    /// The polynomial with every variable outside `keep` set to zero.
    pub fn restrict(&self, keep: usize) -> Self {
        let numerators = self
            .numerators
            .iter()
            .enumerate()
            .map(|(s, &c)| if s & !keep == 0 { c } else { 0 })
            .collect();
        Self {
            arity: self.arity,
            domain: self.domain,
            scale_log2: self.scale_log2,
            numerators,
        }
    }
}

/// Multilinear representation of a function on its cube.
///
/// On `{0,1}^p` this is Möbius inversion, `c(S) = sum_{T subset S} (-1)^{|S|-|T|} f(1_T)`.
/// On `{-1,1}^p` it is the Walsh expansion with coefficients `2^-p sum_phi f(phi) chi_S(phi)`.
pub fn to_multilinear<F: CubeFunction + ?Sized>(f: &F) -> MultilinearPoly {
    let arity = f.arity();
    let len = 1usize << arity;
    let mut coeffs: Vec<i64> = (0..len).map(|p| f.value_at(p)).collect();
    let scale_log2 = match f.domain() {
        Domain::ZeroOne => {
            for var in 0..arity {
                let bit = 1usize << var;
                for s in 0..len {
                    if s & bit != 0 {
                        coeffs[s] -= coeffs[s ^ bit];
                    }
                }
            }
            0
        }
        Domain::PlusMinus => {
            for var in 0..arity {
                let bit = 1usize << var;
                for lo in 0..len {
                    if lo & bit == 0 {
                        let hi = lo | bit;
                        let (a, b) = (coeffs[lo], coeffs[hi]);
                        coeffs[lo] = b + a;
                        coeffs[hi] = b - a;
                    }
                }
            }
            arity as u32
        }
    };
    MultilinearPoly {
        arity,
        domain: f.domain(),
        scale_log2,
        numerators: coeffs,
    }
}

/// Split of `f(delta, delta_{k+1}) = f0(delta) + f2(delta) * delta_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LastVariableSplit {
    pub f0: BooleanFunction,
    pub f1: BooleanFunction,
    pub f2: SignedFunction,
}

pub fn decompose_last_variable(f: &BooleanFunction) -> Result<LastVariableSplit, BoolFuncError> {
    if f.arity < 2 {
        return Err(BoolFuncError::TooSmall {
            needed: 2,
            got: f.arity,
        });
    }
    let k = f.arity - 1;
    let half = 1usize << k;
    let f0 = BooleanFunction {
        arity: k,
        table: f.table[..half].to_vec(),
    };
    let f1 = BooleanFunction {
        arity: k,
        table: f.table[half..].to_vec(),
    };
    let f2 = SignedFunction {
        arity: k,
        domain: Domain::ZeroOne,
        table: (0..half)
            .map(|p| f1.table[p] as i8 - f0.table[p] as i8)
            .collect(),
    };
    Ok(LastVariableSplit { f0, f1, f2 })
}

/// `g(phi) = 2 f((1+phi)/2) - 1`, a `{-1,1}`-valued function on `{-1,1}^p`.
pub fn to_pm_function(f: &BooleanFunction) -> SignedFunction {
    SignedFunction {
        arity: f.arity,
        domain: Domain::PlusMinus,
        table: f.table.iter().map(|&b| if b { 1 } else { -1 }).collect(),
    }
}

/// Split of `g(phi, phi_{k+1}) = g3(phi) + g2(phi) * phi_{k+1}` on the `{-1,1}` cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmSplit {
    pub g2: SignedFunction,
    pub g3: SignedFunction,
}

pub fn decompose_pm(g: &SignedFunction) -> Result<PmSplit, BoolFuncError> {
    if g.domain != Domain::PlusMinus {
        return Err(BoolFuncError::WrongDomain {
            expected: Domain::PlusMinus,
        });
    }
    if g.arity < 2 {
        return Err(BoolFuncError::TooSmall {
            needed: 2,
            got: g.arity,
        });
    }
    if !g.is_plus_minus_valued() {
        return Err(BoolFuncError::NotPlusMinusValued);
    }
    let k = g.arity - 1;
    let half = 1usize << k;
    let (minus, plus) = g.table.split_at(half);
    let g2 = minus
        .iter()
        .zip(plus)
        .map(|(&m, &p)| (p - m) / 2)
        .collect();
    let g3 = minus
        .iter()
        .zip(plus)
        .map(|(&m, &p)| (p + m) / 2)
        .collect();
    Ok(PmSplit {
        g2: SignedFunction {
            arity: k,
            domain: Domain::PlusMinus,
            table: g2,
        },
        g3: SignedFunction {
            arity: k,
            domain: Domain::PlusMinus,
            table: g3,
        },
    })
}

/// Every boolean function of the given arity (arity at most 4).
pub fn all_functions(arity: usize) -> impl Iterator<Item = BooleanFunction> {
    assert!((1..=4).contains(&arity), "exhaustive enumeration only up to arity 4");
    let count = 1u64 << (1u64 << arity);
    (0..count).map(move |bits| BooleanFunction::from_index(arity, bits).expect("arity checked"))
}

/// Closed-form count of non-degenerate functions of `p` variables,
/// `2^(2^p) - C(2^p, 2^(p-1))`, for `p <= 5`.
pub fn nondegenerate_count_formula(p: u32) -> u128 {
    assert!((1..=5).contains(&p));
    let n = 1u128 << p;
    let half = n / 2;
    let mut binom = 1u128;
    for i in 0..half {
        binom = binom * (n - i) / (i + 1);
    }
    (1u128 << n) - binom
}
