//! Multi-level `N`-adic wavelet analysis and synthesis of 1-D signals.
//!
//! One level maps `x` to `N` channels by correlation and decimation,
//! `c_i[k] = Σ_n f_i[n] x[n + Nk]`, and back by upsampling and convolution,
//! `y[n + Nk] += g_i[n] c_i[k]`. Only the lowpass channel is split again.

use std::sync::Arc;

use thiserror::Error;

use crate::scaling_filters::Filter;
use crate::wavelet_construct::FilterBank;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("signal length {len} is not divisible by {n}^{levels}; pad it or use zero-padding")]
    NotDivisible { len: usize, n: usize, levels: usize },
    #[error("{levels} levels need at least {n}^{levels} samples, signal has {len}")]
    TooDeep { len: usize, n: usize, levels: usize },
    #[error("number of levels must be at least 1")]
    InvalidLevels,
    #[error("inconsistent pyramid: {0}")]
    InconsistentPyramid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Indices wrap modulo the level length; reconstruction is exact.
    #[default]
    Periodic,
    /// Samples outside the signal are zero; reconstruction is exact only
    /// away from the ends.
    ZeroPad,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    boundary: Boundary,
}

impl Signal {
    pub fn new(samples: Vec<f64>, boundary: Boundary) -> Self {
        Self { samples, boundary }
    }

    pub fn periodic(samples: Vec<f64>) -> Self {
        Self::new(samples, Boundary::Periodic)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Appends zeros up to the next multiple of `m`.
    pub fn padded_to_multiple(&self, m: usize) -> Self {
        let mut samples = self.samples.clone();
        let target = samples.len().div_ceil(m.max(1)) * m.max(1);
        samples.resize(target.max(m), 0.0);
        Self::new(samples, self.boundary)
    }
}

/// One decomposition level: `input_len` samples split into an approximation
/// and `N − 1` detail arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub input_len: usize,
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformPyramid {
    n: usize,
    levels: Vec<Level>,
    boundary: Boundary,
    bank: Arc<FilterBank>,
}

impl TransformPyramid {
    /// Validated constructor; level `j + 1` must split the approximation of
    /// level `j`.
    pub fn from_parts(
        bank: Arc<FilterBank>,
        boundary: Boundary,
        levels: Vec<Level>,
    ) -> Result<Self, TransformError> {
        let p = Self {
            n: bank.n(),
            levels,
            boundary,
            bank,
        };
        p.check()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    /// Approximation at the coarsest level.
    pub fn approx(&self) -> &[f64] {
        &self.levels.last().expect("nonempty pyramid").approx
    }

    /// Coefficients needed for reconstruction: coarsest approximation plus
    /// every detail array.
    pub fn coefficient_count(&self) -> usize {
        self.approx().len()
            + self
                .levels
                .iter()
                .flat_map(|l| l.details.iter().map(Vec::len))
                .sum::<usize>()
    }

    fn check(&self) -> Result<(), TransformError> {
        let bad = |m: String| Err(TransformError::InconsistentPyramid(m));
        if self.levels.is_empty() {
            return bad("no levels".into());
        }
        for (j, l) in self.levels.iter().enumerate() {
            let expect = l.input_len.div_ceil(self.n);
            if self.boundary == Boundary::Periodic && l.input_len % self.n != 0 {
                return bad(format!(
                    "level {} input length {} not divisible by {}",
                    j + 1,
                    l.input_len,
                    self.n
                ));
            }
            if l.approx.len() != expect {
                return bad(format!(
                    "level {} approximation has {} samples, expected {expect}",
                    j + 1,
                    l.approx.len()
                ));
            }
            if l.details.len() != self.n - 1 {
                return bad(format!(
                    "level {} has {} detail channels, expected {}",
                    j + 1,
                    l.details.len(),
                    self.n - 1
                ));
            }
            if let Some(d) = l.details.iter().find(|d| d.len() != expect) {
                return bad(format!(
                    "level {} detail has {} samples, expected {expect}",
                    j + 1,
                    d.len()
                ));
            }
            if let Some(next) = self.levels.get(j + 1) {
                if next.input_len != l.approx.len() {
                    return bad(format!(
                        "level {} input length does not match level {} output",
                        j + 2,
                        j + 1
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn analyze(
    x: &Signal,
    bank: &FilterBank,
    levels: usize,
) -> Result<TransformPyramid, TransformError> {
    analyze_shared(x, Arc::new(bank.clone()), levels)
}

pub fn analyze_shared(
    x: &Signal,
    bank: Arc<FilterBank>,
    levels: usize,
) -> Result<TransformPyramid, TransformError> {
    let n = bank.n();
    if levels == 0 {
        return Err(TransformError::InvalidLevels);
    }
    let len = x.len();
    let block = n.checked_pow(levels as u32).unwrap_or(usize::MAX);
    if len < block {
        return Err(TransformError::TooDeep { len, n, levels });
    }
    if x.boundary() == Boundary::Periodic && !len.is_multiple_of(block) {
        return Err(TransformError::NotDivisible { len, n, levels });
    }
    let mut out = Vec::with_capacity(levels);
    let mut current = x.samples().to_vec();
    for _ in 0..levels {
        let mut channels: Vec<Vec<f64>> = bank
            .analysis()
            .iter()
            .map(|f| analyze_channel(&current, f, n, x.boundary()))
            .collect();
        let approx = channels.remove(0);
        out.push(Level {
            input_len: current.len(),
            approx: approx.clone(),
            details: channels,
        });
        current = approx;
    }
    Ok(TransformPyramid {
        n,
        levels: out,
        boundary: x.boundary(),
        bank,
    })
}

fn analyze_channel(x: &[f64], f: &Filter, n: usize, boundary: Boundary) -> Vec<f64> {
    let len = x.len() as i64;
    let out_len = x.len().div_ceil(n);
    (0..out_len)
        .map(|k| {
            let base = (n * k) as i64;
            f.indexed_taps()
                .map(|(m, h)| {
                    let idx = base + m;
                    match boundary {
                        Boundary::Periodic => h * x[idx.rem_euclid(len) as usize],
                        Boundary::ZeroPad if (0..len).contains(&idx) => h * x[idx as usize],
                        Boundary::ZeroPad => 0.0,
                    }
                })
                .sum()
        })
        .collect()
}

/// Inverts [`analyze`] from the coarsest approximation and all details.
pub fn synthesize(p: &TransformPyramid) -> Result<Signal, TransformError> {
    p.check()?;
    let n = p.n;
    let bank = p.bank();
    let mut current = p.approx().to_vec();
    for level in p.levels.iter().rev() {
        if current.len() != level.approx.len() {
            return Err(TransformError::InconsistentPyramid(
                "approximation length mismatch".into(),
            ));
        }
        let mut y = vec![0.0; level.input_len];
        let channels = std::iter::once(&current).chain(level.details.iter());
        for (g, c) in bank.synthesis().iter().zip(channels) {
            synthesize_channel(&mut y, c, g, n, p.boundary);
        }
        current = y;
    }
    Ok(Signal::new(current, p.boundary))
}

fn synthesize_channel(y: &mut [f64], c: &[f64], g: &Filter, n: usize, boundary: Boundary) {
    let len = y.len() as i64;
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let base = (n * k) as i64;
        for (m, gm) in g.indexed_taps() {
            let idx = base + m;
            match boundary {
                Boundary::Periodic => y[idx.rem_euclid(len) as usize] += gm * ck,
                Boundary::ZeroPad if (0..len).contains(&idx) => y[idx as usize] += gm * ck,
                Boundary::ZeroPad => {}
            }
        }
    }
}

/// Inserts `N − 1` zeros after every sample.
pub fn upsample(y: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; y.len() * n];
    for (i, &v) in y.iter().enumerate() {
        out[i * n] = v;
    }
    out
}

/// Keeps samples at indices divisible by `N`.
pub fn downsample(y: &[f64], n: usize) -> Vec<f64> {
    y.iter().step_by(n.max(1)).copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet_construct::{bspline_bank, haar_bank, A0Completion};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    fn spline_banks() -> Vec<FilterBank> {
        vec![
            bspline_bank(0, 3, A0Completion::UnitRows).unwrap(),
            bspline_bank(1, 3, A0Completion::UnitRows).unwrap(),
            bspline_bank(2, 3, A0Completion::UnitRows).unwrap(),
            bspline_bank(2, 3, A0Completion::OrthogonalRows).unwrap(),
        ]
    }

    #[test]
    fn up_and_down() {
        assert_eq!(upsample(&[1.0, 2.0], 3), vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert_eq!(
            downsample(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3),
            vec![1.0, 4.0]
        );
    }

    #[test]
    fn constant_signal_through_haar() {
        for n in 2..=5 {
            let bank = haar_bank(n).unwrap();
            let x = Signal::periodic(vec![2.5; n * n]);
            let p = analyze(&x, &bank, 1).unwrap();
            for &a in &p.levels()[0].approx {
                assert!((a - 2.5 * (n as f64).sqrt()).abs() < 1e-12);
            }
            for d in &p.levels()[0].details {
                assert!(d.iter().all(|v| v.abs() < 1e-14));
            }
        }
    }

    #[test]
    fn impulse_gives_reversed_decimated_taps() {
        let bank = bspline_bank(1, 3, A0Completion::UnitRows).unwrap();
        let mut x = vec![0.0; 27];
        x[0] = 1.0;
        let p = analyze(&Signal::periodic(x), &bank, 1).unwrap();
        let chans: Vec<&Vec<f64>> = std::iter::once(&p.levels()[0].approx)
            .chain(&p.levels()[0].details)
            .collect();
        for (f, c) in bank.analysis().iter().zip(chans) {
            for (k, &v) in c.iter().enumerate() {
                let m = -(3 * k as i64);
                let expect = f.tap(m) + f.tap(m + 27);
                assert!((v - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn delta_approximation_places_scaling_taps() {
        let bank = haar_bank(3).unwrap();
        let x = Signal::periodic(vec![0.0; 9]);
        let mut p = analyze(&x, &bank, 1).unwrap();
        p.levels[0].approx[1] = 1.0;
        let y = synthesize(&p).unwrap();
        let h = 1.0 / 3f64.sqrt();
        assert_eq!(y.samples(), &[0.0, 0.0, 0.0, h, h, h, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_pyramid_gives_zero_signal() {
        let bank = bspline_bank(1, 3, A0Completion::UnitRows).unwrap();
        let p = analyze(&Signal::periodic(vec![0.0; 27]), &bank, 3).unwrap();
        assert!(synthesize(&p).unwrap().samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn round_trip_all_banks() {
        let mut banks: Vec<FilterBank> = (2..=5).map(|n| haar_bank(n).unwrap()).collect();
        banks.extend(spline_banks());
        for (b, bank) in banks.iter().enumerate() {
            let n = bank.n();
            for levels in 1..=3 {
                for m in [1, 2, 3] {
                    let len = n.pow(levels as u32) * m;
                    let x = random_signal(len, (b * 100 + levels * 10 + m) as u64);
                    let p = analyze(&Signal::periodic(x.clone()), bank, levels).unwrap();
                    assert_eq!(p.coefficient_count(), len);
                    let y = synthesize(&p).unwrap();
                    assert!(
                        max_err(&x, y.samples()) < 1e-10,
                        "bank {b} L {levels} m {m}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_pad_reconstructs_interior() {
        let bank = bspline_bank(1, 3, A0Completion::UnitRows).unwrap();
        let x = random_signal(80, 5);
        let p = analyze(&Signal::new(x.clone(), Boundary::ZeroPad), &bank, 1).unwrap();
        let y = synthesize(&p).unwrap();
        assert_eq!(y.len(), 80);
        assert!(max_err(&x[10..70], &y.samples()[10..70]) < 1e-10);
    }

    #[test]
    fn errors() {
        let bank = haar_bank(3).unwrap();
        assert_eq!(
            analyze(&Signal::periodic(vec![0.0; 80]), &bank, 1).unwrap_err(),
            TransformError::NotDivisible {
                len: 80,
                n: 3,
                levels: 1
            }
        );
        assert_eq!(
            analyze(&Signal::periodic(vec![0.0; 9]), &bank, 3).unwrap_err(),
            TransformError::TooDeep {
                len: 9,
                n: 3,
                levels: 3
            }
        );
        assert_eq!(
            analyze(&Signal::periodic(vec![0.0; 9]), &bank, 0).unwrap_err(),
            TransformError::InvalidLevels
        );
        let padded = Signal::periodic(vec![1.0; 80]).padded_to_multiple(9);
        assert_eq!(padded.len(), 81);
        assert!(analyze(&padded, &bank, 2).is_ok());

        let mut p = analyze(&Signal::periodic(vec![1.0; 27]), &bank, 2).unwrap();
        p.levels[1].details.pop();
        assert!(matches!(
            synthesize(&p),
            Err(TransformError::InconsistentPyramid(_))
        ));
        let shared = Arc::new(bank);
        let lv = vec![Level {
            input_len: 9,
            approx: vec![0.0; 2],
            details: vec![vec![0.0; 3]; 2],
        }];
        assert!(TransformPyramid::from_parts(shared, Boundary::Periodic, lv).is_err());
    }

    proptest! {
        #[test]
        fn up_down_identity(y in prop::collection::vec(-1e6f64..1e6, 0..40), n in 2usize..6) {
            prop_assert_eq!(downsample(&upsample(&y, n), n), y);
        }

        #[test]
        fn haar_preserves_energy(seed in any::<u64>(), n in 2usize..=5, levels in 1usize..=3) {
            let bank = haar_bank(n).unwrap();
            let x = random_signal(n.pow(levels as u32) * 2, seed);
            let p = analyze(&Signal::periodic(x.clone()), &bank, levels).unwrap();
            let ex: f64 = x.iter().map(|v| v * v).sum();
            let mut ec: f64 = p.approx().iter().map(|v| v * v).sum();
            for l in p.levels() {
                ec += l.details.iter().flatten().map(|v| v * v).sum::<f64>();
            }
            prop_assert!((ex - ec).abs() < 1e-10);
        }

        #[test]
        fn analysis_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, which in 0usize..4) {
            let bank = &spline_banks()[which];
            let x = random_signal(54, seed);
            let y = random_signal(54, seed.wrapping_add(1));
            let z: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let px = analyze(&Signal::periodic(x), bank, 2).unwrap();
            let py = analyze(&Signal::periodic(y), bank, 2).unwrap();
            let pz = analyze(&Signal::periodic(z), bank, 2).unwrap();
            for ((lx, ly), lz) in px.levels().iter().zip(py.levels()).zip(pz.levels()) {
                let cx = std::iter::once(&lx.approx).chain(&lx.details);
                let cy = std::iter::once(&ly.approx).chain(&ly.details);
                let cz = std::iter::once(&lz.approx).chain(&lz.details);
                for ((u, v), w) in cx.zip(cy).zip(cz) {
                    for ((p, q), r) in u.iter().zip(v).zip(w) {
                        prop_assert!((a * p + b * q - r).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn shift_by_n_shifts_coefficients(seed in any::<u64>(), which in 0usize..4) {
            let bank = &spline_banks()[which];
            let x = random_signal(27, seed);
            let mut shifted = x.clone();
            shifted.rotate_right(3);
            let p = analyze(&Signal::periodic(x), bank, 1).unwrap();
            let q = analyze(&Signal::periodic(shifted), bank, 1).unwrap();
            let cp = std::iter::once(&p.levels()[0].approx).chain(&p.levels()[0].details);
            let cq = std::iter::once(&q.levels()[0].approx).chain(&q.levels()[0].details);
            for (u, v) in cp.zip(cq) {
                let mut r = u.clone();
                r.rotate_right(1);
                prop_assert!(max_err(&r, v) < 1e-12);
            }
        }
    }
}
