//! Exact algebra over `ℚ[z, z⁻¹]`: Laurent polynomials, polyphase
//! transforms, constant rational matrices and polynomial matrices held in
//! loop-factorized form.
//!
//! A loop factor is the matrix `I − P + w^e P` for an idempotent `P`. Its
//! inverse is `I − P + w^{−e} P`, so a matrix written as
//! `A0 · ∏ (I − P_k + w^{e_k} P_k)` is invertible over Laurent polynomials
//! as soon as the constant `A0` is, and the inverse is again a short
//! product. All inversion of polynomial matrices in this crate goes
//! through that route.

mod matrix;
mod poly;

pub use matrix::RatMatrix;
pub use poly::{LaurentPoly, Var};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

/// `num / den` as a [`Rational`]. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaurentError {
    #[error("polyphase row has {found} components, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("matrix dimensions {found:?} do not match expected {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("constant matrix is singular")]
    Singular,
    #[error("target vector lies in the span of the vectors it is projected along")]
    LinearDependence,
    #[error("{count} vectors cannot be independent in dimension {dim}")]
    TooManyVectors { count: usize, dim: usize },
    #[error(
        "the {count} vector coefficients of the row span only rank {rank}; \
         factoring it needs non-monomial polynomial weights, which are not supported"
    )]
    DependentCoefficients { count: usize, rank: usize },
    #[error("cannot factor the zero row")]
    ZeroRow,
    #[error("matrix is not held in factorized form")]
    NotFactorized,
    #[error("factor matrix is not idempotent")]
    NotIdempotent,
}

/// Splits `h(z)` into `N` polyphase components `A_j(w)`, `w = z^N`, so that
/// `h(z) = Σ_j z^j A_j(z^N)`. The coefficient of `w^m` in `A_j` is the
/// coefficient of `z^{Nm+j}` in `h`.
///
/// Panics if `n < 2`.
pub fn polyphase_decompose(h: &LaurentPoly, n: usize) -> Vec<LaurentPoly> {
    assert!(n >= 2, "dilation must be at least 2");
    let ni = n as i64;
    let mut parts: Vec<Vec<(i64, Rational)>> = vec![Vec::new(); n];
    for (e, c) in h.terms() {
        parts[e.rem_euclid(ni) as usize].push((e.div_euclid(ni), c.clone()));
    }
    parts
        .into_iter()
        .map(|t| LaurentPoly::from_terms(t, Var::W))
        .collect()
}

/// Inverse of [`polyphase_decompose`]: `Σ_j z^j row[j](z^N)`.
pub fn polyphase_reconstruct(row: &[LaurentPoly], n: usize) -> Result<LaurentPoly, LaurentError> {
    if row.len() != n {
        return Err(LaurentError::RowLength {
            expected: n,
            found: row.len(),
        });
    }
    let ni = n as i64;
    let terms = row.iter().enumerate().flat_map(|(j, a)| {
        a.terms()
            .map(move |(m, c)| (m * ni + j as i64, c.clone()))
            .collect::<Vec<_>>()
    });
    Ok(LaurentPoly::from_terms(terms, Var::Z))
}

/// A polyphase row written as a vector-valued Laurent polynomial
/// `α(w) = Σ_j α_j w^j`. Zero vectors are omitted and exponents are
/// strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorCoefficients {
    dim: usize,
    vectors: Vec<(i64, Vec<Rational>)>,
}

impl VectorCoefficients {
    pub fn from_row(row: &[LaurentPoly]) -> Self {
        let dim = row.len();
        let mut map = std::collections::BTreeMap::<i64, Vec<Rational>>::new();
        for (j, p) in row.iter().enumerate() {
            for (e, c) in p.terms() {
                map.entry(e).or_insert_with(|| vec![Rational::zero(); dim])[j] = c.clone();
            }
        }
        Self {
            dim,
            vectors: map.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[(i64, Vec<Rational>)] {
        &self.vectors
    }

    pub fn exponents(&self) -> impl Iterator<Item = i64> + '_ {
        self.vectors.iter().map(|(e, _)| *e)
    }

    /// `α(1) = Σ_j α_j`.
    pub fn sum(&self) -> Vec<Rational> {
        let mut s = vec![Rational::zero(); self.dim];
        for (_, v) in &self.vectors {
            for (a, b) in s.iter_mut().zip(v) {
                *a += b;
            }
        }
        s
    }

    pub fn rank(&self) -> usize {
        if self.vectors.is_empty() {
            return 0;
        }
        RatMatrix::from_rows(self.vectors.iter().map(|(_, v)| v.clone()).collect()).rank()
    }

    pub fn to_row(&self) -> Vec<LaurentPoly> {
        (0..self.dim)
            .map(|j| {
                LaurentPoly::from_terms(
                    self.vectors.iter().map(|(e, v)| (*e, v[j].clone())),
                    Var::W,
                )
            })
            .collect()
    }
}

/// How a set of independent vectors is completed to a basis of `ℚ^N` when
/// building a projection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Complement {
    /// Standard basis vectors `e_j` for every non-pivot column `j` of the
    /// reduced row echelon form of the given vectors, in increasing `j`.
    PivotedStandardBasis,
    /// Caller-supplied completion vectors.
    Explicit(Vec<Vec<Rational>>),
}

/// Rank-one projection `P` acting on row vectors (`x ↦ x·P`) with
/// `target·P = target` and `v·P = 0` for every `v` in `along` and every
/// completion vector.
pub fn make_projection(
    target: &[Rational],
    along: &[Vec<Rational>],
    complement: &Complement,
) -> Result<RatMatrix, LaurentError> {
    let dim = target.len();
    let count = along.len() + 1;
    if count > dim {
        return Err(LaurentError::TooManyVectors { count, dim });
    }
    let mut rows: Vec<Vec<Rational>> = along.to_vec();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(LaurentError::DimensionMismatch {
            expected: (count, dim),
            found: (count, rows.iter().map(Vec::len).max().unwrap_or(0)),
        });
    }
    rows.push(target.to_vec());
    let spanned = RatMatrix::from_rows(rows.clone());
    let (_, pivots) = spanned.rref();
    if pivots.len() < count {
        return Err(LaurentError::LinearDependence);
    }
    match complement {
        Complement::PivotedStandardBasis => {
            for j in (0..dim).filter(|j| !pivots.contains(j)) {
                let mut e = vec![Rational::zero(); dim];
                e[j] = Rational::one();
                rows.push(e);
            }
        }
        Complement::Explicit(extra) => rows.extend(extra.iter().cloned()),
    }
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(LaurentError::DimensionMismatch {
            expected: (dim, dim),
            found: (rows.len(), dim),
        });
    }
    let basis = RatMatrix::from_rows(rows);
    let inv = basis
        .inverse()
        .map_err(|_| LaurentError::LinearDependence)?;
    let mut diag = RatMatrix::zeros(dim, dim);
    diag[(count - 1, count - 1)] = Rational::one();
    Ok(&(&inv * &diag) * &basis)
}

/// The elementary loop `I − P + w^e P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopFactor {
    pub projection: RatMatrix,
    pub exponent: i64,
}

impl LoopFactor {
    pub fn new(projection: RatMatrix, exponent: i64) -> Result<Self, LaurentError> {
        if !projection.is_square() {
            return Err(LaurentError::DimensionMismatch {
                expected: (projection.rows(), projection.rows()),
                found: (projection.rows(), projection.cols()),
            });
        }
        if &projection * &projection != projection {
            return Err(LaurentError::NotIdempotent);
        }
        Ok(Self {
            projection,
            exponent,
        })
    }

    pub fn dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn inverse(&self) -> Self {
        Self {
            projection: self.projection.clone(),
            exponent: -self.exponent,
        }
    }

    pub fn expand(&self) -> PolyMatrix {
        let n = self.dim();
        let id = RatMatrix::identity(n);
        let p = &self.projection;
        let entries = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let c = &id[(i, j)] - &p[(i, j)];
                &LaurentPoly::constant(c, Var::W)
                    + &LaurentPoly::monomial(p[(i, j)].clone(), self.exponent, Var::W)
            })
            .collect();
        PolyMatrix::from_entries(n, n, entries)
    }
}

/// One factor of a factorized polynomial matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Constant(RatMatrix),
    Loop(LoopFactor),
}

impl Factor {
    fn expand(&self) -> PolyMatrix {
        match self {
            Factor::Constant(m) => PolyMatrix::from_constant(m, Var::W),
            Factor::Loop(l) => l.expand(),
        }
    }

    fn inverse(&self) -> Result<Self, LaurentError> {
        Ok(match self {
            Factor::Constant(m) => Factor::Constant(m.inverse()?),
            Factor::Loop(l) => Factor::Loop(l.inverse()),
        })
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            Factor::Constant(m) => (m.rows(), m.cols()),
            Factor::Loop(l) => (l.dim(), l.dim()),
        }
    }
}

/// A matrix of Laurent polynomials, optionally carrying the ordered factor
/// list whose product it is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<LaurentPoly>,
    factors: Option<Vec<Factor>>,
}

impl PolyMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<LaurentPoly>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self {
            rows,
            cols,
            entries,
            factors: None,
        }
    }

    pub fn from_constant(m: &RatMatrix, var: Var) -> Self {
        let entries = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|(i, j)| LaurentPoly::constant(m[(i, j)].clone(), var))
            .collect();
        Self::from_entries(m.rows(), m.cols(), entries)
    }

    pub fn identity(n: usize, var: Var) -> Self {
        Self::from_constant(&RatMatrix::identity(n), var)
    }

    /// `A0 · ∏_k (I − P_k + w^{e_k} P_k)`, expanded and keeping the factors.
    pub fn from_loop(a0: RatMatrix, loops: Vec<LoopFactor>) -> Result<Self, LaurentError> {
        let mut factors = vec![Factor::Constant(a0)];
        factors.extend(loops.into_iter().map(Factor::Loop));
        Self::from_factors(factors)
    }

    pub fn from_factors(factors: Vec<Factor>) -> Result<Self, LaurentError> {
        let Some(first) = factors.first() else {
            return Err(LaurentError::NotFactorized);
        };
        let (rows, mut cols) = first.dims();
        for f in &factors[1..] {
            let (r, c) = f.dims();
            if r != cols {
                return Err(LaurentError::DimensionMismatch {
                    expected: (cols, c),
                    found: (r, c),
                });
            }
            cols = c;
        }
        let mut acc = first.expand();
        for f in &factors[1..] {
            acc = acc.mul(&f.expand());
        }
        debug_assert_eq!((acc.rows, acc.cols), (rows, cols));
        acc.factors = Some(factors);
        Ok(acc)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly {
        assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[LaurentPoly] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<LaurentPoly> {
        (0..self.rows).map(|i| self.entry(i, j).clone()).collect()
    }

    pub fn factors(&self) -> Option<&[Factor]> {
        self.factors.as_deref()
    }

    /// Plain product of the expanded entries; the result is not factorized.
    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let var = self.entries.first().map_or(Var::W, LaurentPoly::var);
        let entries = (0..self.rows * other.cols)
            .map(|k| {
                let (i, j) = (k / other.cols, k % other.cols);
                (0..self.cols).fold(LaurentPoly::zero(var), |acc, t| {
                    &acc + &(self.entry(i, t) * other.entry(t, j))
                })
            })
            .collect();
        PolyMatrix::from_entries(self.rows, other.cols, entries)
    }

    /// Product of two factorized matrices, keeping the concatenated factor
    /// list.
    pub fn factor_mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, LaurentError> {
        let (Some(a), Some(b)) = (&self.factors, &other.factors) else {
            return Err(LaurentError::NotFactorized);
        };
        if self.cols != other.rows {
            return Err(LaurentError::DimensionMismatch {
                expected: (self.cols, other.cols),
                found: (other.rows, other.cols),
            });
        }
        let mut out = self.mul(other);
        out.factors = Some(a.iter().chain(b).cloned().collect());
        Ok(out)
    }

    /// Inverse through the factor list: every loop factor flips the sign of
    /// its exponent and constants are inverted, in reverse order.
    pub fn factor_inverse(&self) -> Result<PolyMatrix, LaurentError> {
        let factors = self.factors.as_ref().ok_or(LaurentError::NotFactorized)?;
        let inv = factors
            .iter()
            .rev()
            .map(Factor::inverse)
            .collect::<Result<Vec<_>, _>>()?;
        PolyMatrix::from_factors(inv)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let entries = (0..self.rows * self.cols)
            .map(|k| {
                let (i, j) = (k / self.rows, k % self.rows);
                self.entry(j, i).clone()
            })
            .collect();
        PolyMatrix::from_entries(self.cols, self.rows, entries)
    }

    /// Entrywise `w ↦ 1/w`.
    pub fn reflect(&self) -> PolyMatrix {
        PolyMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries.iter().map(LaurentPoly::reflect).collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> PolyMatrix {
        PolyMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries.iter().map(|p| p.scale(c)).collect(),
        )
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.entry(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    /// Largest absolute coefficient of `self − I`.
    pub fn identity_residual(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let var = self.entries.first().map_or(Var::W, LaurentPoly::var);
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .map(|(i, j)| {
                let e = self.entry(i, j);
                if i == j {
                    (e - &LaurentPoly::one(var)).max_abs_coeff()
                } else {
                    e.max_abs_coeff()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Loop factorization of a polynomial row, `α(w) = α(1) · ∏_k (I − P_k + w^{e_k} P_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowFactorization {
    /// `α(1)`, the constant row the loop factors act on.
    pub sum: Vec<Rational>,
    pub factors: Vec<LoopFactor>,
}

/// Factors a row with linearly independent vector coefficients.
///
/// Every coefficient `α_e` with `e ≠ 0` receives the factor
/// `I − P_e + w^e P_e`, where `P_e` projects onto `α_e` along all the other
/// coefficients and the pivoted standard-basis completion of their span.
/// All projections share one basis, so the factors commute and
/// `α(1) · P_e = α_e`. Factors are listed with the highest positive exponent
/// first, then negative exponents from the most negative upward.
pub fn factor_row(coeffs: &VectorCoefficients) -> Result<RowFactorization, LaurentError> {
    let vectors = coeffs.vectors();
    if vectors.is_empty() {
        return Err(LaurentError::ZeroRow);
    }
    let rank = coeffs.rank();
    if rank < vectors.len() {
        return Err(LaurentError::DependentCoefficients {
            count: vectors.len(),
            rank,
        });
    }
    let mut order: Vec<usize> = (0..vectors.len()).filter(|&i| vectors[i].0 > 0).collect();
    order.reverse();
    order.extend((0..vectors.len()).filter(|&i| vectors[i].0 < 0));

    let factors = order
        .into_iter()
        .map(|i| {
            let along: Vec<Vec<Rational>> = vectors
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, (_, v))| v.clone())
                .collect();
            let p = make_projection(&vectors[i].1, &along, &Complement::PivotedStandardBasis)?;
            LoopFactor::new(p, vectors[i].0)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RowFactorization {
        sum: coeffs.sum(),
        factors,
    })
}
