//! Rendering of scaling functions and wavelets by the cascade iteration.
//!
//! Starting from the indicator of `[0, 1)` sampled as a single `1`, each
//! step convolves the samples with the refinement coefficients
//! `c_k = √N·h_k` spread out by the current grid factor. After `J` steps
//! the samples live on the grid `(m + μ)/N^J`, where the phase
//! `μ = Σ k·c_k / (N(N−1))` is the centroid offset of the filter:
//! `0` for odd-degree B-splines, `1/2` for even degrees and Haar.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::laurent::Rational;
use crate::scaling_filters::Filter;
use crate::wavelet_construct::{BankError, BankFamily, FilterBank};

/// Largest number of samples a single render may produce.
pub const MAX_SAMPLES: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CascadeError {
    #[error("depth must be at least 1")]
    InvalidDepth,
    #[error("depth {depth} with N = {n} exceeds the sample budget")]
    TooFine { n: usize, depth: usize },
    #[error(transparent)]
    Bank(#[from] BankError),
    #[error("rendered grid has dilation {grid}, filter has {filter}")]
    GridMismatch { grid: usize, filter: usize },
}

/// Samples of a function on the grid `x_i = (first_index + i + phase)/N^depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedFunction {
    pub n: usize,
    pub depth: usize,
    pub first_index: i64,
    pub phase: f64,
    pub values: Vec<f64>,
    /// Closed interval outside which the function vanishes.
    pub support: (Rational, Rational),
}

impl RenderedFunction {
    /// Samples `f` on every grid point inside `support`.
    pub fn from_fn(
        n: usize,
        depth: usize,
        phase: f64,
        support: (Rational, Rational),
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let m = grid_factor(n, depth) as f64;
        let lo = (rational_f64(&support.0) * m - phase).ceil() as i64;
        let hi = (rational_f64(&support.1) * m - phase).floor() as i64;
        let values = (lo..=hi).map(|i| f((i as f64 + phase) / m)).collect();
        Self {
            n,
            depth,
            first_index: lo,
            phase,
            values,
            support,
        }
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / grid_factor(self.n, self.depth) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (self.first_index as f64 + i as f64 + self.phase) * self.grid_step()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.x(i), v))
    }

    /// Linear interpolation between samples, with zeros assumed one grid
    /// step beyond either end.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x * grid_factor(self.n, self.depth) as f64 - self.phase - self.first_index as f64;
        let i = t.floor();
        let frac = t - i;
        let sample = |k: f64| -> f64 {
            if k < 0.0 || k >= self.values.len() as f64 {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        if frac < 1e-9 {
            sample(i)
        } else if frac > 1.0 - 1e-9 {
            sample(i + 1.0)
        } else {
            (1.0 - frac) * sample(i) + frac * sample(i + 1.0)
        }
    }
}

fn grid_factor(n: usize, depth: usize) -> u64 {
    (n as u64).pow(depth as u32)
}

fn rational_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_budget(f: &Filter, depth: usize) -> Result<(), CascadeError> {
    let n = f.n();
    let too_fine = CascadeError::TooFine { n, depth };
    let m = (n as u64)
        .checked_pow(depth as u32)
        .ok_or(too_fine.clone())?;
    let len = (f.len() as u64).saturating_mul(m);
    if len > MAX_SAMPLES as u64 {
        return Err(too_fine);
    }
    Ok(())
}

fn refinement_coeffs(f: &Filter) -> Vec<f64> {
    let s = (f.n() as f64).sqrt();
    f.taps_float().iter().map(|h| h * s).collect()
}

/// `Σ k·c_k / (N(N−1))`, computed exactly when the taps are rational.
fn phase_of(f: &Filter) -> f64 {
    let n = f.n();
    let denom = (n * (n - 1)) as f64;
    match f.taps_exact() {
        Some(t) => {
            let moment = t.iter().enumerate().fold(Rational::zero(), |acc, (i, c)| {
                acc + c * Rational::from_integer(BigInt::from(f.offset() + i as i64))
            });
            rational_f64(&moment) / denom
        }
        None => {
            let s = (n as f64).sqrt();
            f.indexed_taps().map(|(k, h)| k as f64 * h * s).sum::<f64>() / denom
        }
    }
}

fn filter_support(f: &Filter) -> (Rational, Rational) {
    let d = BigInt::from(f.n() - 1);
    (
        Rational::new(BigInt::from(f.offset()), d.clone()),
        Rational::new(BigInt::from(f.last_index()), d),
    )
}

/// One refinement step: `out[m] = Σ_k c_k v[m − k·stride]`.
fn refine(v: &[f64], first: i64, c: &[f64], c_offset: i64, stride: usize) -> (Vec<f64>, i64) {
    let len = v.len() + (c.len() - 1) * stride;
    let mut out = vec![0.0; len];
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let base = k * stride;
        for (i, &vi) in v.iter().enumerate() {
            out[base + i] += ck * vi;
        }
    }
    (out, first + c_offset * stride as i64)
}

/// Renders the scaling function of `f` on the grid `N^{−depth}`.
pub fn cascade_render(f: &Filter, depth: usize) -> Result<RenderedFunction, CascadeError> {
    if depth == 0 {
        return Err(CascadeError::InvalidDepth);
    }
    check_budget(f, depth)?;
    let (values, first_index) = cascade_samples(f, depth);
    Ok(RenderedFunction {
        n: f.n(),
        depth,
        first_index,
        phase: phase_of(f),
        values,
        support: filter_support(f),
    })
}

fn cascade_samples(f: &Filter, depth: usize) -> (Vec<f64>, i64) {
    let c = refinement_coeffs(f);
    let mut v = vec![1.0];
    let mut first = 0i64;
    let mut stride = 1usize;
    for _ in 0..depth {
        (v, first) = refine(&v, first, &c, f.offset(), stride);
        stride *= f.n();
    }
    (v, first)
}

/// Renders wavelet `channel` of the bank: one step with the wavelet
/// coefficients `√N·g_k` applied to the scaling function at `depth − 1`.
///
/// For Shannon banks the scaling function is sampled from `sin(πx)/(πx)`
/// on `|x| ≤ half_width`, since the ideal filter has no compact support.
pub fn wavelet_render(
    bank: &FilterBank,
    channel: usize,
    depth: usize,
) -> Result<RenderedFunction, CascadeError> {
    let g = bank.wavelet_filter(channel)?;
    if depth == 0 {
        return Err(CascadeError::InvalidDepth);
    }
    let scaling = bank.scaling_filter();
    check_budget(scaling, depth)?;
    let n = bank.n();
    let (phi, first, phase, phi_support) = match bank.family() {
        BankFamily::Shannon { half_width } => {
            let hw = Rational::from_integer(BigInt::from(*half_width));
            let r = RenderedFunction::from_fn(n, depth - 1, 0.0, (-hw.clone(), hw), sinc);
            (r.values, r.first_index, 0.0, r.support)
        }
        _ => {
            let (v, first) = cascade_samples(scaling, depth - 1);
            (v, first, phase_of(scaling), filter_support(scaling))
        }
    };
    let stride = grid_factor(n, depth - 1) as usize;
    let (values, first_index) = refine(&phi, first, &refinement_coeffs(g), g.offset(), stride);
    let nr = Rational::from_integer(BigInt::from(n));
    let support = (
        (phi_support.0 + Rational::from_integer(BigInt::from(g.offset()))) / &nr,
        (phi_support.1 + Rational::from_integer(BigInt::from(g.last_index()))) / &nr,
    );
    Ok(RenderedFunction {
        n,
        depth,
        first_index,
        phase,
        values,
        support,
    })
}

/// `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let t = std::f64::consts::PI * x;
        t.sin() / t
    }
}

/// `max_i |φ(x_i) − Σ_k √N h_k φ(N x_i − k)|` over the rendered grid, with
/// `φ` between samples taken by linear interpolation. Grid points map to
/// grid points when the phase is `0`, or `1/2` with odd `N`.
pub fn refinement_residual(f: &Filter, phi: &RenderedFunction) -> Result<f64, CascadeError> {
    if f.n() != phi.n {
        return Err(CascadeError::GridMismatch {
            grid: phi.n,
            filter: f.n(),
        });
    }
    let c = refinement_coeffs(f);
    let n = f.n() as f64;
    Ok(phi
        .points()
        .map(|(x, v)| {
            let rhs: f64 = c
                .iter()
                .enumerate()
                .map(|(i, ck)| ck * phi.eval(n * x - (f.offset() + i as i64) as f64))
                .sum();
            (v - rhs).abs()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::int;
    use crate::scaling_filters::{bspline_filter, haar_filter, Family};
    use crate::wavelet_construct::{haar_bank, shannon_bank};

    fn hat(x: f64) -> f64 {
        (1.0 - x.abs()).max(0.0)
    }

    fn quadratic(x: f64) -> f64 {
        if (0.0..1.0).contains(&x) {
            0.75 - (x - 0.5).powi(2)
        } else if (-1.0..0.0).contains(&x) {
            0.5 * (x + 1.0).powi(2)
        } else if (1.0..2.0).contains(&x) {
            0.5 * (2.0 - x).powi(2)
        } else {
            0.0
        }
    }

    fn max_dev(r: &RenderedFunction, f: impl Fn(f64) -> f64) -> f64 {
        r.points()
            .map(|(x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn hat_from_linear_spline() {
        let r = cascade_render(&bspline_filter(1, 3).unwrap(), 6).unwrap();
        assert_eq!(r.phase, 0.0);
        assert!(max_dev(&r, hat) < 1e-6);
        assert_eq!(r.support, (int(-1), int(1)));
    }

    #[test]
    fn quadratic_spline_n3() {
        let r = cascade_render(&bspline_filter(2, 3).unwrap(), 6).unwrap();
        assert_eq!(r.phase, 0.5);
        assert!(max_dev(&r, quadratic) < 1e-6);
        assert!((r.eval(0.5) - 0.75).abs() < 1e-6);
        assert_eq!(r.support, (int(-1), int(2)));
    }

    #[test]
    fn haar_is_indicator() {
        for n in 2..=4 {
            for depth in 1..=4 {
                let r = cascade_render(&haar_filter(n).unwrap(), depth).unwrap();
                assert!(r.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
                assert_eq!(r.values.len(), n.pow(depth as u32));
                assert!(r.x(0) > 0.0 && r.x(r.values.len() - 1) < 1.0);
            }
        }
    }

    #[test]
    fn closed_forms_satisfy_refinement() {
        for n in 2..=4 {
            let exact = RenderedFunction::from_fn(n, 5, 0.0, (int(-1), int(1)), hat);
            let r = refinement_residual(&bspline_filter(1, n).unwrap(), &exact).unwrap();
            assert!(r < 1e-12, "N {n}: {r}");
        }
        let q = RenderedFunction::from_fn(3, 5, 0.5, (int(-1), int(2)), quadratic);
        assert!(refinement_residual(&bspline_filter(2, 3).unwrap(), &q).unwrap() < 1e-12);
    }

    #[test]
    fn non_scaling_filter_has_residual() {
        let exact = RenderedFunction::from_fn(3, 5, 0.0, (int(-1), int(1)), hat);
        let bad = Filter::from_float(3, -2, vec![0.3, 0.1, 0.9, 0.2, 0.2], Family::Custom).unwrap();
        assert!(refinement_residual(&bad, &exact).unwrap() > 0.01);
        assert_eq!(
            refinement_residual(&bspline_filter(1, 2).unwrap(), &exact),
            Err(CascadeError::GridMismatch { grid: 3, filter: 2 })
        );
    }

    #[test]
    fn partition_of_unity() {
        for degree in 0..=3 {
            for n in 2..=4 {
                let r = cascade_render(&bspline_filter(degree, n).unwrap(), 5).unwrap();
                let m = n.pow(5);
                let mut sums = vec![0.0; m];
                for (i, &v) in r.values.iter().enumerate() {
                    sums[(r.first_index + i as i64).rem_euclid(m as i64) as usize] += v;
                }
                assert!(
                    sums.iter().all(|s| (s - 1.0).abs() < 1e-6),
                    "degree {degree} N {n}"
                );
            }
        }
    }

    #[test]
    fn residual_does_not_grow_with_depth() {
        for degree in 0..=3 {
            for n in 2..=4 {
                let f = bspline_filter(degree, n).unwrap();
                let res: Vec<f64> = (1..=5)
                    .map(|d| refinement_residual(&f, &cascade_render(&f, d).unwrap()).unwrap())
                    .collect();
                for w in res.windows(2) {
                    assert!(w[1] <= w[0] + 1e-9, "degree {degree} N {n}: {res:?}");
                }
            }
        }
    }

    #[test]
    fn support_bound() {
        for degree in 0..=3 {
            for n in 2..=4 {
                let f = bspline_filter(degree, n).unwrap();
                let r = cascade_render(&f, 4).unwrap();
                let width = r.values.len() as f64 * r.grid_step();
                assert!(width <= (f.len() - 1) as f64 / (n - 1) as f64 + r.grid_step());
                let (a, b) = (rational_f64(&r.support.0), rational_f64(&r.support.1));
                assert!(r.x(0) >= a && r.x(r.values.len() - 1) <= b);
            }
        }
    }

    #[test]
    fn haar_wavelets() {
        let r = wavelet_render(&haar_bank(3).unwrap(), 1, 4).unwrap();
        let a = (1.5f64).sqrt();
        for (x, v) in r.points() {
            let expect = if x < 1.0 / 3.0 {
                a
            } else if x < 2.0 / 3.0 {
                -a
            } else {
                0.0
            };
            assert!((v - expect).abs() < 1e-12, "x {x}");
        }
        let r2 = wavelet_render(&haar_bank(2).unwrap(), 1, 3).unwrap();
        assert_eq!(r2.values.len(), 8);
        for (x, v) in r2.points() {
            let expect = if x < 0.5 { 1.0 } else { -1.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn shannon_wavelet_approaches_closed_form() {
        let bank = shannon_bank(2, 256).unwrap();
        let r = wavelet_render(&bank, 1, 3).unwrap();
        let psi = |x: f64| {
            if x == 0.0 {
                1.0
            } else {
                let p = std::f64::consts::PI;
                ((2.0 * p * x).sin() - (p * x).sin()) / (p * x)
            }
        };
        let err = r
            .points()
            .filter(|(x, _)| x.abs() <= 4.0)
            .map(|(x, v)| (v - psi(x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn bad_arguments() {
        let f = bspline_filter(1, 3).unwrap();
        assert_eq!(cascade_render(&f, 0), Err(CascadeError::InvalidDepth));
        assert!(matches!(
            cascade_render(&f, 40),
            Err(CascadeError::TooFine { .. })
        ));
        let b = haar_bank(3).unwrap();
        assert!(matches!(
            wavelet_render(&b, 3, 2),
            Err(CascadeError::Bank(_))
        ));
        assert!(matches!(
            wavelet_render(&b, 0, 2),
            Err(CascadeError::Bank(_))
        ));
        assert_eq!(wavelet_render(&b, 1, 0), Err(CascadeError::InvalidDepth));
    }
}
