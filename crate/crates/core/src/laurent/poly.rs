//! Laurent polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

/// Name of the indeterminate a polynomial is written in.
///
/// `Z` is the filter variable (`z = e^{-iω}`); `W` is the polyphase
/// variable `w = z^N`. Arithmetic between polynomials in different
/// variables is a programming error and panics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Z,
    W,
}

impl Var {
    pub fn symbol(self) -> char {
        match self {
            Var::Z => 'z',
            Var::W => 'w',
        }
    }
}

/// A finite Laurent polynomial `Σ c_e x^e`, `e ∈ ℤ`, with rational
/// coefficients. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rational>,
    var: Var,
}

impl LaurentPoly {
    pub fn zero(var: Var) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            var,
        }
    }

    pub fn one(var: Var) -> Self {
        Self::constant(Rational::one(), var)
    }

    pub fn constant(c: Rational, var: Var) -> Self {
        Self::monomial(c, 0, var)
    }

    /// `c · x^exp`
    pub fn monomial(c: Rational, exp: i64, var: Var) -> Self {
        let mut p = Self::zero(var);
        p.add_term(exp, c);
        p
    }

    /// Builds `Σ_k coeffs[k] x^{offset+k}`.
    pub fn from_dense(offset: i64, coeffs: &[Rational], var: Var) -> Self {
        let mut p = Self::zero(var);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(offset + k as i64, c.clone());
        }
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I>(terms: I, var: Var) -> Self
    where
        I: IntoIterator<Item = (i64, Rational)>,
    {
        let mut p = Self::zero(var);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn var(&self) -> Var {
        self.var
    }

    /// Same coefficients, relabelled indeterminate.
    pub fn with_var(mut self, var: Var) -> Self {
        self.var = var;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    pub fn coeff(&self, exp: i64) -> Rational {
        self.coeffs
            .get(&exp)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> + '_ {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Dense coefficient list from the lowest to the highest exponent,
    /// together with the lowest exponent. The zero polynomial gives
    /// `(0, [])`.
    pub fn to_dense(&self) -> (i64, Vec<Rational>) {
        match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => (lo, (lo..=hi).map(|e| self.coeff(e)).collect()),
            _ => (0, Vec::new()),
        }
    }

    fn add_term(&mut self, exp: i64, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.var);
        }
        Self {
            coeffs: self.coeffs.iter().map(|(&e, v)| (e, v * c)).collect(),
            var: self.var,
        }
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, v)| (e + k, v.clone()))
                .collect(),
            var: self.var,
        }
    }

    /// `p(x) ↦ p(1/x)`.
    pub fn reflect(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&e, v)| (-e, v.clone())).collect(),
            var: self.var,
        }
    }

    /// `p(x) ↦ p(y^k)` written in the variable `y = var`.
    pub fn substitute_power(&self, k: i64, var: Var) -> Self {
        assert!(k != 0, "substitution exponent must be nonzero");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&e, v)| (e * k, v.clone()))
                .collect(),
            var,
        }
    }

    /// Sum of all coefficients, i.e. the value at `x = 1`.
    pub fn eval_one(&self) -> Rational {
        self.coeffs
            .values()
            .fold(Rational::zero(), |acc, c| acc + c)
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        assert!(!x.is_zero() || self.min_exp().is_none_or(|e| e >= 0));
        self.coeffs.iter().fold(Rational::zero(), |acc, (&e, c)| {
            let p = if e >= 0 {
                num_traits::pow(x.clone(), e as usize)
            } else {
                num_traits::pow(x.recip(), (-e) as usize)
            };
            acc + c * p
        })
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, (&e, c)| {
                acc + x.powi(e as i32) * c.to_f64().unwrap_or(f64::NAN)
            })
    }

    /// Largest absolute coefficient as a float; zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    fn check_var(&self, other: &Self) {
        assert_eq!(
            self.var, other.var,
            "arithmetic between Laurent polynomials in different variables"
        );
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly({self})")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let x = self.var.symbol();
        for (i, (&e, c)) in self.coeffs.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = mag.is_one();
            match e {
                0 => write!(f, "{mag}")?,
                1 if unit => write!(f, "{x}")?,
                1 => write!(f, "{mag}{x}")?,
                _ if unit => write!(f, "{x}^{e}")?,
                _ => write!(f, "{mag}{x}^{e}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.check_var(rhs);
        let mut out = self.clone();
        for (&e, c) in &rhs.coeffs {
            out.add_term(e, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.check_var(rhs);
        let mut out = self.clone();
        for (&e, c) in &rhs.coeffs {
            out.add_term(e, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.check_var(rhs);
        let mut out = LaurentPoly::zero(self.var);
        for (&ea, ca) in &self.coeffs {
            for (&eb, cb) in &rhs.coeffs {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c.clone())).collect(),
            var: self.var,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{int, rat};

    fn zpoly(offset: i64, c: &[i64]) -> LaurentPoly {
        let v: Vec<Rational> = c.iter().map(|&x| int(x)).collect();
        LaurentPoly::from_dense(offset, &v, Var::Z)
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let p = zpoly(-1, &[0, 1, 0, 2, 0]);
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.min_exp(), Some(0));
        assert_eq!(p.max_exp(), Some(2));
        let q = &p - &p;
        assert!(q.is_zero());
        assert_eq!(q.to_dense(), (0, vec![]));
    }

    #[test]
    fn product_of_trinomials() {
        // (1 + z + z^2)^3 = 1 + 3z + 6z^2 + 7z^3 + 6z^4 + 3z^5 + z^6
        let t = zpoly(0, &[1, 1, 1]);
        let cube = &(&t * &t) * &t;
        assert_eq!(cube, zpoly(0, &[1, 3, 6, 7, 6, 3, 1]));
    }

    #[test]
    fn reflect_and_substitute() {
        let p = zpoly(-2, &[1, 2, 3]);
        assert_eq!(p.reflect(), zpoly(0, &[3, 2, 1]));
        let w = LaurentPoly::from_dense(-1, &[int(2), int(5)], Var::W);
        let z = w.substitute_power(3, Var::Z);
        assert_eq!(z.coeff(-3), int(2));
        assert_eq!(z.coeff(0), int(5));
        assert_eq!(z.var(), Var::Z);
    }

    #[test]
    fn evaluation() {
        let p = LaurentPoly::from_dense(-1, &[rat(1, 2), int(1), rat(1, 2)], Var::Z);
        assert_eq!(p.eval_one(), int(2));
        assert_eq!(p.eval_rational(&int(2)), rat(1, 4) + int(1) + int(1));
        let v = p.eval_complex(Complex64::new(-1.0, 0.0));
        assert!((v.re - 0.0).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn display_form() {
        let p = zpoly(-2, &[1, -2, 0, 3]);
        assert_eq!(p.to_string(), "z^-2 - 2z^-1 + 3z");
        assert_eq!(LaurentPoly::zero(Var::W).to_string(), "0");
    }

    #[test]
    #[should_panic(expected = "different variables")]
    fn mixing_variables_panics() {
        let a = LaurentPoly::one(Var::Z);
        let b = LaurentPoly::one(Var::W);
        let _ = &a + &b;
    }
}
