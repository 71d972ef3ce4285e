//! Complete `N`-channel analysis/synthesis filter banks.
//!
//! Three constructions are provided:
//!
//! * [`haar_bank`]: orthonormal completion of the Haar scaling row, one
//!   wavelet per remaining row of an orthogonal `N × N` matrix.
//! * [`shannon_bank`]: ideal band-splitting filters, truncated.
//! * [`bspline_bank`]: biorthogonal bank built from the polyphase row of a
//!   B-spline frequency function. The row is loop-factorized as
//!   `α(w) = α(1) · ∏ (I − P_e + w^e P_e)`, `α(1)` is completed to an
//!   invertible constant matrix `A0`, and the synthesis side is read off the
//!   inverse `A(w)⁻¹`, which the loop form gives without any division.
//!
//! Channel 0 is always the scaling (lowpass) channel. All filters follow
//! one orientation: analysis correlates, `a_k = Σ_n h_n x[n + Nk]`, and
//! synthesis spreads, `y[n + Nk] += g_n a_k`. Perfect reconstruction in that
//! orientation is `Σ_i G_i(z) H_i(z⁻¹) = 1` with every alias term
//! `Σ_i G_i(z) H_i(ρ^{−s} z⁻¹)`, `ρ = e^{2πi/N}`, `s = 1..N−1`, vanishing.
//! Here `H_i(z) = (1/√N) Σ h_n z^n` and likewise for `G_i`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::laurent::{
    factor_row, int, polyphase_decompose, polyphase_reconstruct, LaurentError, LaurentPoly,
    PolyMatrix, RatMatrix, Rational, Var, VectorCoefficients,
};
use crate::scaling_filters::{
    bspline_filter, frequency_function, haar_filter, shannon_filter, Family, Filter, FilterError,
};

/// Tolerance for the float perfect-reconstruction and orthonormality checks.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

/// Number of unit-circle samples used by the float reconstruction check.
pub const FLOAT_GRID: usize = 257;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BankError {
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Algebra(#[from] LaurentError),
    #[error("completion matrix is singular")]
    SingularCompletion,
    #[error("invalid completion matrix: {0}")]
    InvalidCompletion(String),
    #[error("channel {channel} out of range for N = {n}")]
    ChannelOutOfRange { channel: usize, n: usize },
    #[error("inconsistent bank: {0}")]
    Inconsistent(String),
    #[error("exact check requested but the bank has no exact taps")]
    NotExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BankKind {
    Orthogonal,
    Biorthogonal,
}

/// How the constant row `α(1) = (1/N, …, 1/N)` is completed to an
/// invertible matrix `A0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum A0Completion {
    /// Rows `e_1, …, e_{N−1}` scaled by `N^{−(degree+1)}`.
    UnitRows,
    /// Rows `(1, …, 1, −i, 0, …, 0)` with `i` ones, scaled by
    /// `N^{−(degree+1)}`; mutually orthogonal and orthogonal to the first row.
    OrthogonalRows,
    /// A full `N × N` matrix whose first row is a nonzero multiple of
    /// `(1, …, 1)`; the whole matrix is rescaled so that row becomes
    /// `(1/N, …, 1/N)`.
    Custom(Vec<Vec<Rational>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BankFamily {
    Haar,
    Shannon {
        half_width: usize,
    },
    BSpline {
        degree: usize,
        a0: A0Completion,
    },
    /// Loaded from outside the built-in constructions.
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterBank {
    n: usize,
    analysis: Vec<Filter>,
    synthesis: Vec<Filter>,
    kind: BankKind,
    family: BankFamily,
}

impl FilterBank {
    /// Assembles a bank after checking channel counts and dilations.
    pub fn from_parts(
        n: usize,
        analysis: Vec<Filter>,
        synthesis: Vec<Filter>,
        kind: BankKind,
        family: BankFamily,
    ) -> Result<Self, BankError> {
        if n < 2 {
            return Err(FilterError::InvalidDilation(n).into());
        }
        if analysis.len() != n || synthesis.len() != n {
            return Err(BankError::Inconsistent(format!(
                "expected {n} analysis and {n} synthesis filters, found {} and {}",
                analysis.len(),
                synthesis.len()
            )));
        }
        if let Some(f) = analysis.iter().chain(&synthesis).find(|f| f.n() != n) {
            return Err(BankError::Inconsistent(format!(
                "filter with N = {} in a bank with N = {n}",
                f.n()
            )));
        }
        Ok(Self {
            n,
            analysis,
            synthesis,
            kind,
            family,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn analysis(&self) -> &[Filter] {
        &self.analysis
    }

    pub fn synthesis(&self) -> &[Filter] {
        &self.synthesis
    }

    pub fn kind(&self) -> BankKind {
        self.kind
    }

    pub fn family(&self) -> &BankFamily {
        &self.family
    }

    /// True when every filter carries exact taps.
    pub fn is_exact(&self) -> bool {
        self.analysis
            .iter()
            .chain(&self.synthesis)
            .all(|f| f.taps_exact().is_some())
    }

    pub fn scaling_filter(&self) -> &Filter {
        &self.analysis[0]
    }

    /// Analysis filter of wavelet channel `1..N−1`.
    pub fn wavelet_filter(&self, channel: usize) -> Result<&Filter, BankError> {
        self.check_wavelet_channel(channel)?;
        Ok(&self.analysis[channel])
    }

    pub(crate) fn check_wavelet_channel(&self, channel: usize) -> Result<(), BankError> {
        if channel == 0 || channel >= self.n {
            Err(BankError::ChannelOutOfRange { channel, n: self.n })
        } else {
            Ok(())
        }
    }
}

pub fn haar_bank(n: usize) -> Result<FilterBank, BankError> {
    let rows = (1..n)
        .map(|m| {
            let norm = ((m * (m + 1)) as f64).sqrt();
            (0..n)
                .map(|j| match j.cmp(&m) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(m as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect();
    haar_bank_with(n, rows)
}

/// Haar bank with caller-chosen wavelet rows. The rows together with
/// `(1, …, 1)/√N` must form an orthogonal matrix within
/// [`FLOAT_TOLERANCE`].
pub fn haar_bank_with(n: usize, wavelet_rows: Vec<Vec<f64>>) -> Result<FilterBank, BankError> {
    let scaling = haar_filter(n)?;
    if wavelet_rows.len() != n - 1 || wavelet_rows.iter().any(|r| r.len() != n) {
        return Err(BankError::InvalidCompletion(format!(
            "expected {} rows of length {n}",
            n - 1
        )));
    }
    let mut all = vec![scaling.taps_float().to_vec()];
    all.extend(wavelet_rows.iter().cloned());
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = all[i].iter().zip(&all[j]).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot - target).abs() > FLOAT_TOLERANCE {
                return Err(BankError::InvalidCompletion(format!(
                    "rows {i} and {j} have inner product {dot}"
                )));
            }
        }
    }
    let mut analysis = vec![scaling];
    for row in wavelet_rows {
        analysis.push(Filter::from_float(n, 0, row, Family::Custom)?);
    }
    let synthesis = analysis.clone();
    FilterBank::from_parts(
        n,
        analysis,
        synthesis,
        BankKind::Orthogonal,
        BankFamily::Haar,
    )
}

/// Truncated ideal band-splitting bank. Channel `k` passes
/// `kπ/N ≤ |ω| < (k+1)π/N`; its taps are
/// `√N·[sin((k+1)πn/N) − sin(kπn/N)]/(πn)` with value `1/√N` at `n = 0`.
pub fn shannon_bank(n: usize, half_width: usize) -> Result<FilterBank, BankError> {
    let mut analysis = vec![shannon_filter(n, half_width)?];
    let s = (n as f64).sqrt();
    let hw = half_width as i64;
    for k in 1..n {
        let taps = (-hw..=hw).map(|m| shannon_band_tap(n, k, m, s)).collect();
        analysis.push(Filter::from_float(n, -hw, taps, Family::Custom)?);
    }
    let synthesis = analysis.clone();
    FilterBank::from_parts(
        n,
        analysis,
        synthesis,
        BankKind::Orthogonal,
        BankFamily::Shannon { half_width },
    )
}

fn shannon_band_tap(n: usize, k: usize, m: i64, s: f64) -> f64 {
    if m == 0 {
        return 1.0 / s;
    }
    let ni = n as i64;
    let sine = |mult: i64| -> f64 {
        if (mult * m) % ni == 0 {
            0.0
        } else {
            (PI * (mult * m) as f64 / n as f64).sin()
        }
    };
    s * (sine(k as i64 + 1) - sine(k as i64)) / (PI * m as f64)
}

/// `α(1)` for the polyphase row of the degree-`degree` B-spline frequency
/// function. Equals `(1, …, 1)/N` for every B-spline.
pub fn scaling_row_coefficient_sum(degree: usize, n: usize) -> Result<Vec<Rational>, BankError> {
    let h0 = frequency_function(&bspline_filter(degree, n)?)?;
    Ok(VectorCoefficients::from_row(&polyphase_decompose(&h0.poly, n)).sum())
}

/// Biorthogonal B-spline bank.
///
/// Fails with [`LaurentError::DependentCoefficients`] when the vector
/// coefficients of the scaling row are linearly dependent (for example
/// degree 2 with `N = 2`); those rows need non-monomial loop factors.
pub fn bspline_bank(degree: usize, n: usize, a0: A0Completion) -> Result<FilterBank, BankError> {
    let h0 = frequency_function(&bspline_filter(degree, n)?)?;
    let row = polyphase_decompose(&h0.poly, n);
    let fact = factor_row(&VectorCoefficients::from_row(&row))?;

    let a0_matrix = completion_matrix(&a0, degree, n, &fact.sum)?;
    let a = PolyMatrix::from_loop(a0_matrix, fact.factors)?;
    debug_assert_eq!(a.row(0), &row[..]);
    let a_inv = a.factor_inverse()?;

    let mut analysis = Vec::with_capacity(n);
    for i in 0..n {
        let family = if i == 0 {
            Family::BSpline { degree }
        } else {
            Family::Custom
        };
        analysis.push(filter_from_poly(
            &polyphase_reconstruct(a.row(i), n)?,
            n,
            family,
        )?);
    }

    // G_i(z) = (1/N) Σ_j z^j (A⁻¹)_{j,i}(z^{−N})
    let inv_n = Rational::new(BigInt::one(), BigInt::from(n));
    let mut synthesis = Vec::with_capacity(n);
    for i in 0..n {
        let mut g = LaurentPoly::zero(Var::Z);
        for j in 0..n {
            let part = a_inv
                .entry(j, i)
                .substitute_power(-(n as i64), Var::Z)
                .shift(j as i64);
            g = &g + &part;
        }
        synthesis.push(filter_from_poly(&g.scale(&inv_n), n, Family::Custom)?);
    }

    FilterBank::from_parts(
        n,
        analysis,
        synthesis,
        BankKind::Biorthogonal,
        BankFamily::BSpline { degree, a0 },
    )
}

fn completion_matrix(
    a0: &A0Completion,
    degree: usize,
    n: usize,
    first_row: &[Rational],
) -> Result<RatMatrix, BankError> {
    let scale = Rational::new(BigInt::one(), BigInt::from(n).pow(degree as u32 + 1));
    let mut rows = vec![first_row.to_vec()];
    match a0 {
        A0Completion::UnitRows => {
            for i in 1..n {
                let mut r = vec![Rational::zero(); n];
                r[i] = scale.clone();
                rows.push(r);
            }
        }
        A0Completion::OrthogonalRows => {
            for i in 1..n {
                let r = (0..n)
                    .map(|j| match j.cmp(&i) {
                        std::cmp::Ordering::Less => scale.clone(),
                        std::cmp::Ordering::Equal => -&scale * int(i as i64),
                        std::cmp::Ordering::Greater => Rational::zero(),
                    })
                    .collect();
                rows.push(r);
            }
        }
        A0Completion::Custom(m) => {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(BankError::InvalidCompletion(format!(
                    "expected a {n}×{n} matrix"
                )));
            }
            let lead = &m[0][0];
            if lead.is_zero() || m[0].iter().any(|x| x != lead) {
                return Err(BankError::InvalidCompletion(
                    "first row must be a nonzero multiple of (1, …, 1)".into(),
                ));
            }
            let k = &first_row[0] / lead;
            rows = m
                .iter()
                .map(|r| r.iter().map(|x| x * &k).collect())
                .collect();
        }
    }
    let m = RatMatrix::from_rows(rows);
    if m.rank() < n {
        return Err(BankError::SingularCompletion);
    }
    Ok(m)
}

/// Filter with `√N·h_k = N·[z^k]H`.
fn filter_from_poly(h: &LaurentPoly, n: usize, family: Family) -> Result<Filter, BankError> {
    let (offset, coeffs) = h.to_dense();
    let nn = int(n as i64);
    let taps = coeffs.iter().map(|c| c * &nn).collect();
    Ok(Filter::from_exact(n, offset, taps, family)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrMode {
    /// Rational arithmetic on polyphase components; residuals are exactly
    /// zero for a perfect-reconstruction bank.
    Exact,
    /// Frequency responses on a unit-circle grid.
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrReport {
    pub mode: PrMode,
    pub passed: bool,
    /// Largest entry of `(synthesis polyphase)ᴴ·(analysis polyphase) − I`
    /// in exact mode, or the largest of the distortion and alias residuals
    /// in float mode.
    pub residual: f64,
    /// `Σ_i G_i(z) H_i(z⁻¹)`; present in exact mode.
    pub distortion: Option<LaurentPoly>,
    /// Deviation of the distortion term from `1`.
    pub distortion_residual: f64,
    /// `alias_residuals[s − 1]` bounds the alias term for shift `s`.
    pub alias_residuals: Vec<f64>,
}

/// Perfect-reconstruction check, exact when the bank has rational taps.
pub fn verify_pr(bank: &FilterBank) -> PrReport {
    let mode = if bank.is_exact() {
        PrMode::Exact
    } else {
        PrMode::Float
    };
    verify_pr_with(bank, mode).expect("mode chosen to match the bank")
}

pub fn verify_pr_with(bank: &FilterBank, mode: PrMode) -> Result<PrReport, BankError> {
    match mode {
        PrMode::Exact => verify_exact(bank),
        PrMode::Float => Ok(verify_float(bank)),
    }
}

fn exact_poly(f: &Filter) -> Result<LaurentPoly, BankError> {
    Ok(frequency_function(f).map_err(|_| BankError::NotExact)?.poly)
}

#[allow(clippy::needless_range_loop)]
fn verify_exact(bank: &FilterBank) -> Result<PrReport, BankError> {
    let n = bank.n();
    let h: Vec<LaurentPoly> = bank
        .analysis()
        .iter()
        .map(exact_poly)
        .collect::<Result<_, _>>()?;
    let g: Vec<LaurentPoly> = bank
        .synthesis()
        .iter()
        .map(exact_poly)
        .collect::<Result<_, _>>()?;
    let a: Vec<Vec<LaurentPoly>> = h.iter().map(|p| polyphase_decompose(p, n)).collect();
    let b: Vec<Vec<LaurentPoly>> = g.iter().map(|p| polyphase_decompose(p, n)).collect();

    // N Σ_i B_{i,j}(w⁻¹) A_{i,k}(w) = δ_{jk}
    let nn = int(n as i64);
    let mut residual = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let mut s = LaurentPoly::zero(Var::W);
            for i in 0..n {
                s = &s + &(&b[i][j].reflect() * &a[i][k]);
            }
            let mut s = s.scale(&nn);
            if j == k {
                s = &s - &LaurentPoly::one(Var::W);
            }
            residual = residual.max(s.max_abs_coeff());
        }
    }

    let mut distortion = LaurentPoly::zero(Var::Z);
    for i in 0..n {
        distortion = &distortion + &(&g[i] * &h[i].reflect());
    }
    let distortion_residual = (&distortion - &LaurentPoly::one(Var::Z)).max_abs_coeff();

    // C_k(z) = Σ_i G_i(z) z^{−k} A_{i,k}(z^{−N}); alias term s is Σ_k ρ^{−sk} C_k.
    let inv_n = Rational::new(BigInt::one(), BigInt::from(n));
    let errors: Vec<LaurentPoly> = (0..n)
        .map(|k| {
            let mut c = LaurentPoly::zero(Var::Z);
            for i in 0..n {
                let t = a[i][k]
                    .substitute_power(-(n as i64), Var::Z)
                    .shift(-(k as i64));
                c = &c + &(&g[i] * &t);
            }
            &c - &LaurentPoly::constant(inv_n.clone(), Var::Z)
        })
        .collect();
    let alias_residuals = (1..n)
        .map(|s| {
            if errors.iter().all(LaurentPoly::is_zero) {
                return 0.0;
            }
            let lo = errors
                .iter()
                .filter_map(LaurentPoly::min_exp)
                .min()
                .unwrap_or(0);
            let hi = errors
                .iter()
                .filter_map(LaurentPoly::max_exp)
                .max()
                .unwrap_or(0);
            (lo..=hi)
                .map(|e| {
                    errors
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let c = crate::scaling_filters::to_f64(&p.coeff(e));
                            Complex64::from_polar(c, -2.0 * PI * (s * k) as f64 / n as f64)
                        })
                        .sum::<Complex64>()
                        .norm()
                })
                .fold(0.0, f64::max)
        })
        .collect();

    Ok(PrReport {
        mode: PrMode::Exact,
        passed: residual == 0.0 && distortion_residual == 0.0,
        residual,
        distortion: Some(distortion),
        distortion_residual,
        alias_residuals,
    })
}

fn verify_float(bank: &FilterBank) -> PrReport {
    let n = bank.n();
    let rho = 2.0 * PI / n as f64;
    let mut distortion_residual = 0.0f64;
    let mut alias_residuals = vec![0.0f64; n - 1];
    for t in 0..FLOAT_GRID {
        let omega = 2.0 * PI * t as f64 / FLOAT_GRID as f64;
        let gz: Vec<Complex64> = bank.synthesis().iter().map(|f| f.response(omega)).collect();
        for s in 0..n {
            // H_i(ρ^{−s} z⁻¹) with z = e^{−iω} is the response at −ω + 2πs/N.
            let term: Complex64 = bank
                .analysis()
                .iter()
                .zip(&gz)
                .map(|(f, g)| g * f.response(-omega + rho * s as f64))
                .sum();
            if s == 0 {
                distortion_residual = distortion_residual.max((term - 1.0).norm());
            } else {
                alias_residuals[s - 1] = alias_residuals[s - 1].max(term.norm());
            }
        }
    }
    let residual = alias_residuals
        .iter()
        .copied()
        .fold(distortion_residual, f64::max);
    PrReport {
        mode: PrMode::Float,
        passed: residual < FLOAT_TOLERANCE,
        residual,
        distortion: None,
        distortion_residual,
        alias_residuals,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalityReport {
    /// `None` for truncated Shannon banks, whose ideal form is orthonormal
    /// but cannot be realized with finitely many taps.
    pub passed: Option<bool>,
    /// `max |Σ_n f_i[n] f_j[n + Nk] − δ_{ij} δ_{k0}|` over all channel pairs
    /// and shifts.
    pub max_residual: f64,
}

/// Checks orthonormality of the analysis filters under shifts by `N`.
pub fn check_orthonormality(bank: &FilterBank) -> OrthonormalityReport {
    let n = bank.n() as i64;
    let filters = bank.analysis();
    let mut worst = 0.0f64;
    for (i, fi) in filters.iter().enumerate() {
        for (j, fj) in filters.iter().enumerate() {
            // f_j[n + Nk] overlaps f_i[n] only for a bounded range of k.
            let kmin = (fi.offset() - fj.last_index()).div_euclid(n) - 1;
            let kmax = (fi.last_index() - fj.offset()).div_euclid(n) + 1;
            for k in kmin..=kmax {
                let dot: f64 = fi.indexed_taps().map(|(m, h)| h * fj.tap(m + n * k)).sum();
                let target = if i == j && k == 0 { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
    }
    let passed = match bank.family() {
        BankFamily::Shannon { .. } => None,
        _ => Some(worst < FLOAT_TOLERANCE),
    };
    OrthonormalityReport {
        passed,
        max_residual: worst,
    }
}
