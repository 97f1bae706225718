//! Built-in oracle suite behind the `validate` subcommand.
//!
//! Each check compares two independent routes to the same quantity (an
//! oracle against a table, a matrix evaluation against a closed form, or a
//! bound against sampled combiners) and reports the measured value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{generate_channel, ArrayGeometry, ChannelParams};
use crate::combiners::{svd_combiner, theorem_combiner};
use crate::error::Result;
use crate::linalg::{complex_gaussian, random_semi_unitary, CMat, CVec};
use crate::metrics::{
    general_upper_bound, mutual_information, optimal_mi_equal, rate_theorem_form, svd_upper_bound,
    MiContext, SingularProfile,
};
use crate::quantization::{lloyd_max_distortion, scalar_quantize, AdcModel, TABULATED_DISTORTION};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Distortion constants for 1..=5 bits under test.
    pub beta_table: [f64; 5],
    /// Random channels for the consistency and bound checks.
    pub channels: usize,
    /// Haar-random combiners per equal-gain setting.
    pub random_combiners: usize,
    pub seed: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            beta_table: TABULATED_DISTORTION,
            channels: 100,
            random_combiners: 1000,
            seed: 20_240_601,
        }
    }
}

/// `H = U diag(sqrt(lambda)) V^H` with Haar `U` (`n_r x n_u`) and `V`, so
/// every eigenvalue of `H H^H` equals `lambda`.
pub fn equal_gain_channel<R: Rng + ?Sized>(
    n_r: usize,
    n_u: usize,
    lambda: f64,
    rng: &mut R,
) -> CMat {
    let u = random_semi_unitary(n_r, n_u, rng);
    let v = random_semi_unitary(n_u, n_u, rng);
    u * v.adjoint() * num_complex::Complex64::new(lambda.sqrt(), 0.0)
}

/// Lloyd-Max oracle against the table: relative error below 1% for each
/// resolution.
pub fn check_distortion_table(table: &[f64; 5]) -> Result<CheckOutcome> {
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for bits in 1..=5u32 {
        let oracle = lloyd_max_distortion(bits, 1_000_000)?;
        let rel = (table[bits as usize - 1] - oracle).abs() / oracle;
        worst = worst.max(rel);
        parts.push(format!("b{bits}={oracle:.6}"));
    }
    Ok(CheckOutcome {
        name: "lloyd-max distortion table",
        passed: worst < 0.01,
        detail: format!("max rel err {worst:.2e} ({})", parts.join(" ")),
    })
}

/// Empirical distortion of the scalar quantizer on `samples` complex
/// Gaussian draws against the model's `beta` (1% relative).
pub fn check_quantizer(table: &[f64; 5], samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Half as many complex values as real samples.
    let n = samples.div_ceil(2);
    let y = CVec::from_iterator(n, (0..n).map(|_| complex_gaussian(&mut rng)));
    let power: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    let mut worst = 0.0_f64;
    for bits in 1..=5u32 {
        let adc = AdcModel::with_table(bits, table)?;
        let q = scalar_quantize(&adc, &y);
        let err: f64 = y
            .iter()
            .zip(q.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        worst = worst.max(((err / power) - adc.beta()).abs() / adc.beta());
    }
    Ok(CheckOutcome {
        name: "empirical quantizer distortion",
        passed: worst < 0.01,
        detail: format!("max rel err {worst:.2e} over {samples} samples"),
    })
}

/// Matrix MI of the two-stage solution against its closed form.
pub fn check_closed_form_consistency(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let (n_r, n_rf, n_u) = (16, 8, 2);
    let g = ArrayGeometry::half_wavelength(n_r)?;
    let params = ChannelParams::new(n_u, 3.0, g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = 0.0_f64;
    for _ in 0..opts.channels {
        let h = generate_channel(&params, &mut rng).matrix().clone();
        let c = theorem_combiner(&h, n_rf, n_u)?;
        let profile = SingularProfile::from_channel(&h, n_rf);
        for bits in 1..=3 {
            let adc = AdcModel::with_table(bits, &opts.beta_table)?;
            for rho in [0.1, 1.0, 10.0] {
                let ctx = MiContext::new(rho, adc)?;
                let matrix = mutual_information(&h, c.effective(), &ctx)?;
                let closed = rate_theorem_form(&profile, &ctx);
                worst = worst.max((matrix - closed).abs());
            }
        }
    }
    Ok(CheckOutcome {
        name: "matrix MI vs closed-form two-stage rate",
        passed: worst < 1e-8,
        detail: format!("max |delta| = {worst:.3e} over {} channels", opts.channels),
    })
}

/// `MI(SVD) < svd bound` and `MI(W) <= general bound` on random draws.
pub fn check_bound_dominance(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let (n_r, n_rf, n_u) = (32, 16, 4);
    let g = ArrayGeometry::half_wavelength(n_r)?;
    let params = ChannelParams::new(n_u, 3.0, g)?;
    let adc = AdcModel::with_table(2, &opts.beta_table)?;
    let svd_ub = svd_upper_bound(n_u, &adc)?;
    let gen_ub = general_upper_bound(n_u, n_rf, &adc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xb0);
    let mut svd_max = 0.0_f64;
    let mut any_max = 0.0_f64;
    for i in 0..opts.channels {
        let h = generate_channel(&params, &mut rng).matrix().clone();
        let rho = 10f64.powf((-10.0 + 50.0 * (i as f64) / opts.channels as f64) / 10.0);
        let ctx = MiContext::new(rho, adc)?;
        svd_max = svd_max.max(mutual_information(
            &h,
            svd_combiner(&h, n_rf)?.effective(),
            &ctx,
        )?);
        let w = random_semi_unitary(n_r, n_rf, &mut rng);
        any_max = any_max.max(mutual_information(&h, &w, &ctx)?);
        let tw = theorem_combiner(&h, n_rf, n_u)?;
        any_max = any_max.max(mutual_information(&h, tw.effective(), &ctx)?);
    }
    Ok(CheckOutcome {
        name: "bound dominance",
        passed: svd_max < svd_ub && any_max <= gen_ub,
        detail: format!(
            "max MI(SVD) {svd_max:.4} < {svd_ub:.4}; max MI(W) {any_max:.4} <= {gen_ub:.4}"
        ),
    })
}

/// Equal-eigenvalue channels: the two-stage solution reaches the closed-form
/// optimum and no sampled semi-unitary combiner beats it.
pub fn check_equal_gain_optimality(opts: &ValidationOptions) -> Result<CheckOutcome> {
    let (n_r, n_u) = (16, 2);
    let adc = AdcModel::with_table(2, &opts.beta_table)?;
    let ctx = MiContext::new(1.0, adc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xe9);
    let mut closed_err = 0.0_f64;
    let mut worst_gap = f64::NEG_INFINITY;
    for lambda in [1.0, 4.0] {
        for n_rf in [4usize, 8] {
            let h = equal_gain_channel(n_r, n_u, lambda, &mut rng);
            let star = mutual_information(&h, theorem_combiner(&h, n_rf, n_u)?.effective(), &ctx)?;
            closed_err = closed_err.max((star - optimal_mi_equal(n_u, n_rf, lambda, &ctx)).abs());
            for _ in 0..opts.random_combiners {
                let w = random_semi_unitary(n_r, n_rf, &mut rng);
                worst_gap = worst_gap.max(mutual_information(&h, &w, &ctx)? - star);
            }
        }
    }
    Ok(CheckOutcome {
        name: "equal-gain optimality",
        passed: closed_err < 1e-8 && worst_gap <= 1e-9,
        detail: format!(
            "|MI* - closed form| = {closed_err:.3e}; max MI(W) - MI* = {worst_gap:.3e}"
        ),
    })
}

pub fn run_validation(opts: &ValidationOptions) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_distortion_table(&opts.beta_table)?,
        check_quantizer(&opts.beta_table, 1_000_000, opts.seed)?,
        check_closed_form_consistency(opts)?,
        check_bound_dominance(opts)?,
        check_equal_gain_optimality(opts)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_gain_channel_has_flat_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = equal_gain_channel(12, 3, 2.5, &mut rng);
        let p = SingularProfile::from_channel(&h, 4);
        assert!(p.values.iter().all(|v| (v - 2.5).abs() < 1e-10));
    }

    #[test]
    fn perturbed_table_fails_lloyd_max_check() {
        let mut table = TABULATED_DISTORTION;
        assert!(check_distortion_table(&table).unwrap().passed);
        table[1] *= 1.1;
        assert!(!check_distortion_table(&table).unwrap().passed);
    }

    #[test]
    fn fast_suite_passes() {
        let opts = ValidationOptions {
            channels: 10,
            random_combiners: 50,
            ..Default::default()
        };
        for check in [
            check_closed_form_consistency(&opts).unwrap(),
            check_bound_dominance(&opts).unwrap(),
            check_equal_gain_optimality(&opts).unwrap(),
        ] {
            assert!(check.passed, "{check}");
        }
    }
}
