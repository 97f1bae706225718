//! Additive quantization noise model (AQNM) for low-resolution ADCs.
//!
//! A `b`-bit MMSE scalar quantizer acting on a Gaussian input is linearized as
//! `Q(y) = alpha_b * y + q`, where `q` is uncorrelated with `y`,
//! `beta_b = E|y - Q(y)|^2 / E|y|^2` and `alpha_b = 1 - beta_b`.
//!
//! Besides the analytic model this module carries an empirical Lloyd-Max
//! quantizer, which is used both to check the tabulated `beta_b` constants
//! and to quantize signals directly.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec};

/// Normalized distortion of the Gaussian Lloyd-Max quantizer for 1..=5 bits.
pub const TABULATED_DISTORTION: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];

/// High-resolution distortion `(pi * sqrt(3) / 2) * 2^(-2b)`, used above 5 bits.
pub fn high_resolution_distortion(bits: u32) -> f64 {
    PI * 3.0_f64.sqrt() / 2.0 * 2.0_f64.powi(-2 * bits as i32)
}

/// ADC resolution together with its AQNM distortion factor and gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcModel {
    /// `None` stands for an ideal (infinite-resolution) converter.
    bits: Option<u32>,
    beta: f64,
    alpha: f64,
}

impl AdcModel {
    /// Model for a `bits`-bit MMSE quantizer.
    pub fn new(bits: u32) -> Result<Self> {
        Self::with_table(bits, &TABULATED_DISTORTION)
    }

    /// Same as [`AdcModel::new`] with an explicit low-resolution table.
    pub fn with_table(bits: u32, table: &[f64; 5]) -> Result<Self> {
        if bits == 0 {
            return Err(Error::Domain("ADC needs at least one bit".into()));
        }
        let beta = if bits <= 5 {
            table[bits as usize - 1]
        } else {
            high_resolution_distortion(bits)
        };
        Ok(Self {
            bits: Some(bits),
            beta,
            alpha: 1.0 - beta,
        })
    }

    /// The `b -> infinity` limit: no distortion, unit gain.
    pub fn unquantized() -> Self {
        Self {
            bits: None,
            beta: 0.0,
            alpha: 1.0,
        }
    }

    pub fn bits(&self) -> Option<u32> {
        self.bits
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Real scalar quantizer designed for a unit-variance input.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarCodebook {
    levels: Vec<f64>,
    /// Decision boundaries between consecutive levels (midpoints).
    thresholds: Vec<f64>,
}

impl ScalarCodebook {
    fn from_levels(levels: Vec<f64>) -> Self {
        let thresholds = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Self { levels, thresholds }
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Index of the nearest level; a value on a boundary goes to the upper
    /// level.
    #[inline]
    pub fn index_of(&self, x: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= x)
    }

    #[inline]
    pub fn quantize(&self, x: f64) -> f64 {
        self.levels[self.index_of(x)]
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Level placement of the optimal high-resolution compander for a Gaussian
/// source (density^(1/3) is again Gaussian with variance 3).
fn compander_levels(n_levels: usize) -> Vec<f64> {
    let normal = standard_normal();
    (0..n_levels)
        .map(|i| 3.0_f64.sqrt() * normal.inverse_cdf((i as f64 + 0.5) / n_levels as f64))
        .collect()
}

const CONVERGENCE_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

/// Sorted quasi-random sample of a unit Gaussian: the `(i + 1/2) / n`
/// quantiles.
fn gaussian_quantile_sample(n: usize) -> Vec<f64> {
    let normal = standard_normal();
    (0..n)
        .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
        .collect()
}

/// Result of a Lloyd-Max design run on a finite sample.
#[derive(Debug, Clone)]
pub struct LloydMaxDesign {
    pub codebook: ScalarCodebook,
    /// `sum (y - Q(y))^2 / sum y^2` over the design sample.
    pub distortion: f64,
    pub iterations: usize,
}

/// Runs Lloyd-Max on `sample_count` Gaussian quantile points until no level
/// moves by more than `1e-9`.
pub fn lloyd_max_design(bits: u32, sample_count: usize) -> Result<LloydMaxDesign> {
    if !(1..=5).contains(&bits) {
        return Err(Error::Domain(format!(
            "Lloyd-Max oracle supports 1..=5 bits, got {bits}"
        )));
    }
    if sample_count < 1_000_000 {
        return Err(Error::Domain(format!(
            "Lloyd-Max oracle needs at least 1e6 samples, got {sample_count}"
        )));
    }
    let samples = gaussian_quantile_sample(sample_count);
    let mut s1 = Vec::with_capacity(samples.len() + 1);
    let mut s2 = Vec::with_capacity(samples.len() + 1);
    s1.push(0.0);
    s2.push(0.0);
    for &y in &samples {
        s1.push(s1.last().unwrap() + y);
        s2.push(s2.last().unwrap() + y * y);
    }

    let n_levels = 1usize << bits;
    let mut levels = compander_levels(n_levels);
    let mut iterations = 0;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::Numeric(format!(
                "Lloyd-Max did not converge within {MAX_ITERATIONS} iterations"
            )));
        }
        iterations += 1;
        let cuts = cell_cuts(&samples, &levels);
        let mut shift = 0.0_f64;
        for (i, level) in levels.iter_mut().enumerate() {
            let (lo, hi) = (cuts[i], cuts[i + 1]);
            if hi > lo {
                let centroid = (s1[hi] - s1[lo]) / (hi - lo) as f64;
                shift = shift.max((centroid - *level).abs());
                *level = centroid;
            }
        }
        if shift < CONVERGENCE_TOL {
            break;
        }
    }

    let codebook = ScalarCodebook::from_levels(levels);
    let cuts = cell_cuts(&samples, &codebook.levels);
    let mut err = 0.0;
    for (i, &c) in codebook.levels.iter().enumerate() {
        let (lo, hi) = (cuts[i], cuts[i + 1]);
        let n = (hi - lo) as f64;
        // sum (y - c)^2 over the cell, from prefix sums
        err += (s2[hi] - s2[lo]) - 2.0 * c * (s1[hi] - s1[lo]) + n * c * c;
    }
    Ok(LloydMaxDesign {
        codebook,
        distortion: err / s2[samples.len()],
        iterations,
    })
}

/// Sample-index boundaries of each quantization cell (sorted samples).
fn cell_cuts(sorted: &[f64], levels: &[f64]) -> Vec<usize> {
    let mut cuts = Vec::with_capacity(levels.len() + 1);
    cuts.push(0);
    for w in levels.windows(2) {
        let t = 0.5 * (w[0] + w[1]);
        cuts.push(sorted.partition_point(|&y| y < t));
    }
    cuts.push(sorted.len());
    cuts
}

/// Normalized distortion of the Lloyd-Max quantizer designed on a sampled
/// unit Gaussian.
pub fn lloyd_max_distortion(bits: u32, sample_count: usize) -> Result<f64> {
    lloyd_max_design(bits, sample_count).map(|d| d.distortion)
}

/// Upper-tail probability `P(Y > x)` for a unit Gaussian.
fn upper_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

fn density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Lloyd-Max codebook against the exact Gaussian density. Works on the
/// nonnegative half and mirrors, since the optimum is symmetric.
fn analytic_codebook(bits: u32) -> ScalarCodebook {
    let n_levels = 1usize << bits;
    let half = n_levels / 2;
    let mut pos: Vec<f64> = compander_levels(n_levels)[half..].to_vec();
    let budget = MAX_ITERATIONS.min(40_000_000 / n_levels).max(50);
    let mut bounds = vec![0.0; half + 1];
    for _ in 0..budget {
        bounds[0] = 0.0;
        for i in 1..half {
            bounds[i] = 0.5 * (pos[i - 1] + pos[i]);
        }
        bounds[half] = f64::INFINITY;
        let mut shift = 0.0_f64;
        for i in 0..half {
            let (a, b) = (bounds[i], bounds[i + 1]);
            let mass = upper_tail(a) - upper_tail(b);
            if mass > 0.0 {
                let fb = if b.is_finite() { density(b) } else { 0.0 };
                let centroid = (density(a) - fb) / mass;
                shift = shift.max((centroid - pos[i]).abs());
                pos[i] = centroid;
            }
        }
        if shift < CONVERGENCE_TOL {
            break;
        }
    }
    let mut levels: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    levels.extend_from_slice(&pos);
    ScalarCodebook::from_levels(levels)
}

const CACHED_BITS: usize = 16;

/// Unit-variance Gaussian MMSE codebook for `bits` (cached for up to 16 bits).
pub fn gaussian_codebook(bits: u32) -> ScalarCodebook {
    static CACHE: [OnceLock<ScalarCodebook>; CACHED_BITS] =
        [const { OnceLock::new() }; CACHED_BITS];
    assert!(bits >= 1, "codebook needs at least one bit");
    match CACHE.get(bits as usize - 1) {
        Some(cell) => cell.get_or_init(|| analytic_codebook(bits)).clone(),
        None => analytic_codebook(bits),
    }
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (mut acc, mut n) = (0.0, 0usize);
    for v in values {
        acc += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (acc / n as f64).sqrt()
    }
}

/// Element-wise quantization of a complex vector. Real and imaginary parts
/// are quantized independently with the same Gaussian MMSE codebook, each
/// scaled to the root-mean-square of that component over `y`. A component
/// that is identically zero uses unit scale.
pub fn scalar_quantize(adc: &AdcModel, y: &CVec) -> CVec {
    let Some(bits) = adc.bits() else {
        return y.clone();
    };
    let book = gaussian_codebook(bits);
    let scale = |s: f64| if s > 0.0 { s } else { 1.0 };
    let sr = scale(rms(y.iter().map(|z| z.re)));
    let si = scale(rms(y.iter().map(|z| z.im)));
    y.map(|z| Complex64::new(sr * book.quantize(z.re / sr), si * book.quantize(z.im / si)))
}

/// Diagonal AQNM noise covariance `R_qq`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantNoiseCov {
    diag: Vec<f64>,
}

impl QuantNoiseCov {
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn to_matrix(&self) -> CMat {
        CMat::from_diagonal(&DVector::from_iterator(
            self.diag.len(),
            self.diag.iter().map(|&d| Complex64::new(d, 0.0)),
        ))
    }
}

/// `R_qq = alpha * beta * diag{ rho W^H H H^H W + W^H W }`.
pub fn quant_noise_covariance(
    adc: &AdcModel,
    w_rf: &CMat,
    h: &CMat,
    snr: f64,
) -> Result<QuantNoiseCov> {
    if w_rf.nrows() != h.nrows() {
        return Err(Error::Contract(format!(
            "combiner has {} rows but channel has {}",
            w_rf.nrows(),
            h.nrows()
        )));
    }
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("SNR {snr} must be nonnegative")));
    }
    let wh = w_rf.adjoint() * h;
    let scale = adc.alpha() * adc.beta();
    let diag = (0..w_rf.ncols())
        .map(|i| {
            let signal = wh.row(i).norm_squared();
            let noise = w_rf.column(i).norm_squared();
            scale * (snr * signal + noise)
        })
        .collect();
    Ok(QuantNoiseCov { diag })
}
