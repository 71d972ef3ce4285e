//! Scaling filters `h_n` of the `N`-scale refinement equation
//! `φ(x) = √N Σ h_n φ(Nx − n)` for three families: Haar (indicator of
//! `[0, 1)`), Kotelnikov-Shannon (ideal lowpass) and B-splines.
//!
//! Exact taps are stored pre-multiplied by `√N`, so every B-spline and Haar
//! filter is a list of rationals summing to `N`. The frequency function is
//! `H(z) = (1/√N) Σ h_n z^n = (1/N) Σ (√N h_n) z^n` with `z = e^{−iω}`,
//! which makes `H(1) = 1` and keeps B-spline frequency functions rational.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::laurent::{int, LaurentPoly, Rational, Var};

/// Default upper bound on the B-spline degree accepted by [`bspline_filter`].
pub const DEFAULT_MAX_DEGREE: usize = 8;

/// Upper bound on the number of multi-indices enumerated for one filter.
pub const MAX_COMPOSITIONS: u128 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FilterError {
    #[error("dilation N = {0} is invalid, N must be at least 2")]
    InvalidDilation(usize),
    #[error("B-spline degree {degree} exceeds the configured maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },
    #[error("Shannon half-width must be at least 1")]
    InvalidHalfWidth,
    #[error("filter has no exact taps")]
    NoExactTaps,
    #[error("enumerating degree {degree} with N = {n} needs {count} multi-indices, above the limit {limit}")]
    TooManyTerms {
        degree: usize,
        n: usize,
        count: u128,
        limit: u128,
    },
    #[error("filter has no taps")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Haar,
    /// Truncated to `|n| ≤ half_width`.
    Shannon {
        half_width: usize,
    },
    BSpline {
        degree: usize,
    },
    /// Taps supplied from outside the built-in families.
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Haar => write!(f, "haar"),
            Family::Shannon { half_width } => write!(f, "shannon(half_width={half_width})"),
            Family::BSpline { degree } => write!(f, "bspline(degree={degree})"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

/// A finitely supported filter `h_offset, …, h_{offset+len−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter {
    n: usize,
    offset: i64,
    taps_exact: Option<Vec<Rational>>,
    taps_float: Vec<f64>,
    family: Family,
}

impl Filter {
    /// Builds a filter from `√N·h_n` values; float taps are derived from them.
    pub fn from_exact(
        n: usize,
        offset: i64,
        scaled_taps: Vec<Rational>,
        family: Family,
    ) -> Result<Self, FilterError> {
        check_dilation(n)?;
        if scaled_taps.is_empty() {
            return Err(FilterError::Empty);
        }
        let s = (n as f64).sqrt();
        let taps_float = scaled_taps.iter().map(|t| to_f64(t) / s).collect();
        Ok(Self {
            n,
            offset,
            taps_exact: Some(scaled_taps),
            taps_float,
            family,
        })
    }

    pub fn from_float(
        n: usize,
        offset: i64,
        taps: Vec<f64>,
        family: Family,
    ) -> Result<Self, FilterError> {
        check_dilation(n)?;
        if taps.is_empty() {
            return Err(FilterError::Empty);
        }
        Ok(Self {
            n,
            offset,
            taps_exact: None,
            taps_float: taps,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    /// Index of the last tap.
    pub fn last_index(&self) -> i64 {
        self.offset + self.taps_float.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.taps_float.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps_float.is_empty()
    }

    /// `√N·h_n`, when the taps are rational.
    pub fn taps_exact(&self) -> Option<&[Rational]> {
        self.taps_exact.as_deref()
    }

    pub fn taps_float(&self) -> &[f64] {
        &self.taps_float
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// `h_k`, zero outside the support.
    pub fn tap(&self, k: i64) -> f64 {
        let i = k - self.offset;
        if i < 0 || i as usize >= self.taps_float.len() {
            0.0
        } else {
            self.taps_float[i as usize]
        }
    }

    pub fn indexed_taps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.taps_float
            .iter()
            .enumerate()
            .map(move |(i, &h)| (self.offset + i as i64, h))
    }

    /// `H(ω) = (1/√N) Σ h_n e^{−inω}`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let s = (self.n as f64).sqrt();
        self.indexed_taps()
            .map(|(k, h)| Complex64::from_polar(h, -(k as f64) * omega))
            .sum::<Complex64>()
            / s
    }
}

/// `H(z) = (1/√N) Σ h_n z^n` as a rational Laurent polynomial in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyFunction {
    pub n: usize,
    pub poly: LaurentPoly,
}

impl FrequencyFunction {
    pub fn at_one(&self) -> Rational {
        self.poly.eval_one()
    }

    /// Value at `z = e^{−iω}`.
    pub fn eval(&self, omega: f64) -> Complex64 {
        self.poly.eval_complex(Complex64::from_polar(1.0, -omega))
    }
}

pub fn haar_filter(n: usize) -> Result<Filter, FilterError> {
    check_dilation(n)?;
    Filter::from_exact(n, 0, vec![int(1); n], Family::Haar)
}

/// Truncated Kotelnikov-Shannon filter
/// `h_k = √N·sin(πk/N)/(πk)` for `|k| ≤ half_width`, `h_0 = 1/√N`.
///
/// The ideal filter is infinitely supported and its taps decay only like
/// `O(1/k)`, so truncation error shrinks slowly with `half_width`. Taps at
/// nonzero multiples of `N` are exactly zero.
pub fn shannon_filter(n: usize, half_width: usize) -> Result<Filter, FilterError> {
    check_dilation(n)?;
    if half_width == 0 {
        return Err(FilterError::InvalidHalfWidth);
    }
    let s = (n as f64).sqrt();
    let hw = half_width as i64;
    let taps = (-hw..=hw).map(|k| shannon_tap(n, k, s)).collect();
    Filter::from_float(n, -hw, taps, Family::Shannon { half_width })
}

fn shannon_tap(n: usize, k: i64, s: f64) -> f64 {
    let ni = n as i64;
    if k == 0 {
        1.0 / s
    } else if k % ni == 0 {
        0.0
    } else {
        let x = PI * k as f64;
        s * (x / n as f64).sin() / x
    }
}

/// B-spline scaling filter of the given degree with [`DEFAULT_MAX_DEGREE`].
pub fn bspline_filter(degree: usize, n: usize) -> Result<Filter, FilterError> {
    bspline_filter_bounded(degree, n, DEFAULT_MAX_DEGREE)
}

/// B-spline scaling filter computed by summing multinomial coefficients
/// over all weak compositions `α` of `degree + 1` into `N` parts.
///
/// The composition `α` contributes `(degree+1)! / ∏ α_i!` to the tap at
/// `Σ i·α_i − shift`, scaled by `1/N^degree`. The shift centres odd degrees
/// on `0` and even degrees on `1/2`:
/// `shift = (N−1)(degree+1)/2` for odd degree, `(N−1)·degree/2` for even.
pub fn bspline_filter_bounded(
    degree: usize,
    n: usize,
    max_degree: usize,
) -> Result<Filter, FilterError> {
    check_dilation(n)?;
    if degree > max_degree {
        return Err(FilterError::DegreeTooLarge {
            degree,
            max: max_degree,
        });
    }
    let parts = degree + 1;
    let count = binomial(parts + n - 1, n - 1);
    if count > MAX_COMPOSITIONS {
        return Err(FilterError::TooManyTerms {
            degree,
            n,
            count,
            limit: MAX_COMPOSITIONS,
        });
    }
    let span = (n - 1) * parts;
    let mut sums = vec![BigInt::zero(); span + 1];
    let factorials: Vec<BigInt> = (0..=parts)
        .scan(BigInt::from(1), |acc, k| {
            if k > 0 {
                *acc *= k;
            }
            Some(acc.clone())
        })
        .collect();
    let mut alpha = vec![0usize; n];
    for_each_composition(parts, &mut alpha, 0, &mut |a| {
        let denom = a
            .iter()
            .fold(BigInt::from(1), |acc, &k| acc * &factorials[k]);
        let idx: usize = a.iter().enumerate().map(|(i, &k)| i * k).sum();
        sums[idx] += &factorials[parts] / denom;
    });
    let offset = -(bspline_shift(degree, n) as i64);
    let scale = Rational::from_integer(BigInt::from(n).pow(degree as u32));
    let taps = sums
        .into_iter()
        .map(|c| Rational::from_integer(c) / &scale)
        .collect();
    Filter::from_exact(n, offset, taps, Family::BSpline { degree })
}

fn bspline_shift(degree: usize, n: usize) -> usize {
    if degree % 2 == 1 {
        (n - 1) * (degree + 1) / 2
    } else {
        (n - 1) * degree / 2
    }
}

fn for_each_composition(
    remaining: usize,
    alpha: &mut [usize],
    pos: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if pos + 1 == alpha.len() {
        alpha[pos] = remaining;
        f(alpha);
        return;
    }
    for k in 0..=remaining {
        alpha[pos] = k;
        for_each_composition(remaining - k, alpha, pos + 1, f);
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

/// Linear B-spline taps from the closed rule `√N·h_k = (N − |k|)/N`,
/// `|k| ≤ N − 1`.
pub fn bspline_general_rule(n: usize) -> Result<Filter, FilterError> {
    check_dilation(n)?;
    let ni = n as i64;
    let taps = (-(ni - 1)..ni)
        .map(|k| Rational::new(BigInt::from(ni - k.abs()), BigInt::from(ni)))
        .collect();
    Filter::from_exact(n, -(ni - 1), taps, Family::BSpline { degree: 1 })
}

/// Exact frequency function; only filters with rational taps have one.
pub fn frequency_function(f: &Filter) -> Result<FrequencyFunction, FilterError> {
    let taps = f.taps_exact().ok_or(FilterError::NoExactTaps)?;
    let inv_n = Rational::new(BigInt::from(1), BigInt::from(f.n()));
    let poly = LaurentPoly::from_dense(f.offset(), taps, Var::Z).scale(&inv_n);
    Ok(FrequencyFunction { n: f.n(), poly })
}

fn check_dilation(n: usize) -> Result<(), FilterError> {
    if n < 2 {
        Err(FilterError::InvalidDilation(n))
    } else {
        Ok(())
    }
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::rat;
    use proptest::prelude::*;

    fn ints(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    /// Independent oracle: `N · z^{−shift} ((1 + z + … + z^{N−1})/N)^{degree+1}`.
    fn expansion_oracle(degree: usize, n: usize) -> (i64, Vec<Rational>) {
        let box_ = LaurentPoly::from_dense(0, &vec![rat(1, n as i64); n], Var::Z);
        let mut p = LaurentPoly::one(Var::Z);
        for _ in 0..=degree {
            p = &p * &box_;
        }
        let p = p
            .shift(-(bspline_shift(degree, n) as i64))
            .scale(&int(n as i64));
        p.to_dense()
    }

    #[test]
    fn haar_taps() {
        let f = haar_filter(3).unwrap();
        assert_eq!(f.offset(), 0);
        assert_eq!(f.taps_exact().unwrap(), &ints(&[1, 1, 1])[..]);
        for &h in f.taps_float() {
            assert!((h - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        let f5 = haar_filter(5).unwrap();
        assert!((f5.taps_float().iter().sum::<f64>() - 5f64.sqrt()).abs() < 1e-14);
        assert_eq!(haar_filter(1), Err(FilterError::InvalidDilation(1)));
    }

    #[test]
    fn linear_spline_n3() {
        let f = bspline_filter(1, 3).unwrap();
        assert_eq!(f.offset(), -2);
        assert_eq!(
            f.taps_exact().unwrap(),
            &[rat(1, 3), rat(2, 3), int(1), rat(2, 3), rat(1, 3)][..]
        );
    }

    #[test]
    fn quadratic_spline_n3() {
        let f = bspline_filter(2, 3).unwrap();
        assert_eq!(f.offset(), -2);
        let expected: Vec<Rational> = [1, 3, 6, 7, 6, 3, 1].iter().map(|&k| rat(k, 9)).collect();
        assert_eq!(f.taps_exact().unwrap(), &expected[..]);
        let h_m2 = 1.0 / (9.0 * 3f64.sqrt());
        assert!((f.taps_float()[0] - h_m2).abs() < 1e-16);
    }

    #[test]
    fn linear_spline_n2() {
        let f = bspline_filter(1, 2).unwrap();
        assert_eq!(f.offset(), -1);
        assert_eq!(f.taps_exact().unwrap(), &[rat(1, 2), int(1), rat(1, 2)][..]);
    }

    #[test]
    fn degree_zero_is_haar() {
        for n in 2..6 {
            let b = bspline_filter(0, n).unwrap();
            let h = haar_filter(n).unwrap();
            assert_eq!(b.offset(), h.offset());
            assert_eq!(b.taps_exact(), h.taps_exact());
        }
    }

    #[test]
    fn general_rule_matches_enumeration() {
        for n in 2..=8 {
            let g = bspline_general_rule(n).unwrap();
            let b = bspline_filter(1, n).unwrap();
            assert_eq!(g.offset(), b.offset());
            assert_eq!(g.taps_exact(), b.taps_exact());
        }
        let g4 = bspline_general_rule(4).unwrap();
        let expected: Vec<Rational> = [1, 2, 3, 4, 3, 2, 1].iter().map(|&k| rat(k, 4)).collect();
        assert_eq!(g4.taps_exact().unwrap(), &expected[..]);
    }

    #[test]
    fn enumeration_matches_expansion_oracle() {
        for degree in 0..=4 {
            for n in 2..=4 {
                let f = bspline_filter(degree, n).unwrap();
                let (off, taps) = expansion_oracle(degree, n);
                assert_eq!(f.offset(), off, "degree {degree}, N {n}");
                assert_eq!(f.taps_exact().unwrap(), &taps[..], "degree {degree}, N {n}");
            }
        }
    }

    #[test]
    fn degree_bound() {
        assert_eq!(
            bspline_filter(99, 3).unwrap_err(),
            FilterError::DegreeTooLarge { degree: 99, max: 8 }
        );
        assert!(bspline_filter_bounded(9, 2, 10).is_ok());
        assert!(matches!(
            bspline_filter(8, 200),
            Err(FilterError::TooManyTerms { .. })
        ));
    }

    #[test]
    fn spline_symmetry() {
        for degree in 0..=5 {
            for n in 2..=4 {
                let f = bspline_filter(degree, n).unwrap();
                let t = f.taps_exact().unwrap();
                let first = f.offset();
                let last = f.last_index();
                if degree % 2 == 1 {
                    assert_eq!(first, -last);
                } else {
                    // mirror pairs k ↔ N − 1 − k
                    assert_eq!(first + last, (n as i64 - 1));
                }
                let rev: Vec<_> = t.iter().rev().cloned().collect();
                assert_eq!(t, &rev[..]);
                assert!(f.len() <= (degree + 1) * (n - 1) + 1);
            }
        }
    }

    #[test]
    fn frequency_functions() {
        let h = frequency_function(&bspline_filter(1, 3).unwrap()).unwrap();
        let expected =
            LaurentPoly::from_dense(-2, &ints(&[1, 2, 3, 2, 1]), Var::Z).scale(&rat(1, 9));
        assert_eq!(h.poly, expected);

        let h2 = frequency_function(&bspline_filter(2, 3).unwrap()).unwrap();
        let tri = LaurentPoly::from_dense(0, &ints(&[1, 1, 1]), Var::Z);
        let expected = (&(&tri * &tri) * &tri).shift(-2).scale(&rat(1, 27));
        assert_eq!(h2.poly, expected);

        let hh = frequency_function(&haar_filter(4).unwrap()).unwrap();
        assert_eq!(
            hh.poly,
            LaurentPoly::from_dense(0, &vec![rat(1, 4); 4], Var::Z)
        );
        assert_eq!(hh.at_one(), int(1));

        let s = shannon_filter(2, 8).unwrap();
        assert_eq!(frequency_function(&s), Err(FilterError::NoExactTaps));
    }

    #[test]
    fn shannon_taps() {
        let f = shannon_filter(2, 4).unwrap();
        assert!((f.tap(1) - 2f64.sqrt() / PI).abs() < 1e-15);
        assert!((f.tap(0) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let g = shannon_filter(3, 10).unwrap();
        assert_eq!(g.tap(3), 0.0);
        assert_eq!(g.tap(-6), 0.0);
        assert_eq!(shannon_filter(3, 0), Err(FilterError::InvalidHalfWidth));
    }

    #[test]
    fn haar_response_is_power_complementary() {
        for n in 2..=5 {
            let f = haar_filter(n).unwrap();
            for i in 0..1024 {
                let w = 2.0 * PI * i as f64 / 1024.0;
                let s: f64 = (0..n)
                    .map(|m| f.response(w + 2.0 * PI * m as f64 / n as f64).norm_sqr())
                    .sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn response_agrees_with_frequency_function() {
        let f = bspline_filter(2, 3).unwrap();
        let h = frequency_function(&f).unwrap();
        for w in [0.0, 0.3, 1.7, 3.0] {
            assert!((f.response(w) - h.eval(w)).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn exact_taps_sum_to_n(degree in 0usize..=6, n in 2usize..=5) {
            let f = bspline_filter(degree, n).unwrap();
            let s = f.taps_exact().unwrap().iter().fold(Rational::zero(), |a, b| a + b);
            prop_assert_eq!(s, int(n as i64));
            prop_assert_eq!(frequency_function(&f).unwrap().at_one(), int(1));
            let fs: f64 = f.taps_float().iter().sum();
            prop_assert!((fs - (n as f64).sqrt()).abs() < 10.0 * f64::EPSILON * f.len() as f64);
        }

        #[test]
        fn shannon_sum_approaches_sqrt_n(n in 2usize..=5, hw in 8usize..200) {
            let f = shannon_filter(n, hw).unwrap();
            let s: f64 = f.taps_float().iter().sum();
            // Abel summation bounds the tail by about N^{3/2}/(π·hw).
            prop_assert!((s - (n as f64).sqrt()).abs() < (n as f64).powf(1.5) / hw as f64);
        }
    }
}
