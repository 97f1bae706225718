//! Quantized mutual information and the closed-form rates and bounds that go
//! with it. All values are in bits.

use std::collections::BTreeMap;

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{left_singular, CMat};
use crate::quantization::AdcModel;

/// SNR, ADC model and (optionally) the RF-chain ratio `kappa = N_RF / N_r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiContext {
    snr: f64,
    adc: AdcModel,
    kappa: Option<f64>,
}

impl MiContext {
    /// `snr` is the linear receive SNR per user.
    pub fn new(snr: f64, adc: AdcModel) -> Result<Self> {
        if !(snr >= 0.0 && snr.is_finite()) {
            return Err(Error::Domain(format!("SNR {snr} must be finite and >= 0")));
        }
        Ok(Self {
            snr,
            adc,
            kappa: None,
        })
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Domain(format!("kappa {kappa} outside (0, 1)")));
        }
        self.kappa = Some(kappa);
        Ok(self)
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn adc(&self) -> &AdcModel {
        &self.adc
    }

    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }
}

/// `log2 |I + rho alpha^2 D^-1 W^H H H^H W|` with
/// `D = alpha^2 W^H W + R_qq` and `R_qq = alpha beta diag{rho W^H H H^H W + W^H W}`.
pub fn mutual_information(h: &CMat, w: &CMat, ctx: &MiContext) -> Result<f64> {
    if w.nrows() != h.nrows() {
        return Err(Error::Contract(format!(
            "combiner has {} rows but channel has {}",
            w.nrows(),
            h.nrows()
        )));
    }
    let wh = w.adjoint() * h;
    let gram = w.adjoint() * w;
    mutual_information_from_projection(&wh, &gram, ctx)
}

/// Same as [`mutual_information`] given `W^H H` and `W^H W` directly.
///
/// With `D = L L^H`, the determinant is evaluated as
/// `|I_Nu + rho alpha^2 X^H X|`, `X = L^-1 W^H H`, which is Hermitian
/// positive definite and only `N_u x N_u`.
pub fn mutual_information_from_projection(wh: &CMat, gram: &CMat, ctx: &MiContext) -> Result<f64> {
    let k = wh.nrows();
    if gram.nrows() != k || gram.ncols() != k {
        return Err(Error::Contract(format!(
            "Gram matrix is {}x{}, expected {k}x{k}",
            gram.nrows(),
            gram.ncols()
        )));
    }
    let rho = ctx.snr;
    let alpha = ctx.adc.alpha();
    let beta = ctx.adc.beta();

    let mut d = gram * Complex64::new(alpha * alpha, 0.0);
    for i in 0..k {
        let signal = wh.row(i).norm_squared();
        let rqq = alpha * beta * (rho * signal + gram[(i, i)].re);
        d[(i, i)] += Complex64::new(rqq, 0.0);
    }
    let chol = Cholesky::new(d).ok_or_else(|| {
        Error::Numeric(
            "quantization-noise-plus-signal covariance D is not positive definite".into(),
        )
    })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(wh)
        .ok_or_else(|| Error::Numeric("singular Cholesky factor of D".into()))?;
    let n_u = wh.ncols();
    let mut m = x.adjoint() * &x * Complex64::new(rho * alpha * alpha, 0.0);
    for i in 0..n_u {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let mi = crate::linalg::hermitian_log2_det(&m)?;
    if !mi.is_finite() {
        return Err(Error::Numeric(format!(
            "mutual information evaluated to {mi}"
        )));
    }
    Ok(mi.max(0.0))
}

/// Eigenvalues of `H H^H` with the dimensions they were measured at.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularProfile {
    /// Descending, one per user (trailing zeros for rank-deficient channels).
    pub values: Vec<f64>,
    pub n_r: usize,
    pub n_u: usize,
    pub n_rf: usize,
}

impl SingularProfile {
    pub fn from_channel(h: &CMat, n_rf: usize) -> Self {
        let mut values = left_singular(h).eigenvalues;
        values.resize(h.ncols(), 0.0);
        Self {
            values,
            n_r: h.nrows(),
            n_u: h.ncols(),
            n_rf,
        }
    }

    /// `n_u` equal eigenvalues `lambda`.
    pub fn equal(lambda: f64, n_r: usize, n_u: usize, n_rf: usize) -> Self {
        Self {
            values: vec![lambda; n_u],
            n_r,
            n_u,
            n_rf,
        }
    }
}

/// Closed-form MI of the two-stage solution (singular vectors followed by a
/// constant-modulus unitary):
/// `sum_k log2(1 + alpha rho N_RF lambda_k/N_r / (kappa + (1-alpha) rho sum_i lambda_i/N_r))`.
///
/// `kappa` comes from the context when set, otherwise `N_RF / N_r`.
pub fn rate_theorem_form(profile: &SingularProfile, ctx: &MiContext) -> f64 {
    let n_r = profile.n_r as f64;
    let n_rf = profile.n_rf as f64;
    let kappa = ctx.kappa.unwrap_or(n_rf / n_r);
    let alpha = ctx.adc.alpha();
    let rho = ctx.snr;
    let total: f64 = profile.values.iter().take(profile.n_u).sum();
    let denom = kappa + (1.0 - alpha) * rho * total / n_r;
    profile
        .values
        .iter()
        .take(profile.n_u)
        .map(|&lam| (1.0 + alpha * rho * n_rf * lam / n_r / denom).log2())
        .sum()
}

/// MI of the two-stage solution when all `n_u` eigenvalues equal `lambda`:
/// `N_u log2(1 + alpha lambda N_RF / (lambda N_u (1-alpha) + N_RF/rho))`.
pub fn optimal_mi_equal(n_u: usize, n_rf: usize, lambda: f64, ctx: &MiContext) -> f64 {
    if ctx.snr == 0.0 || lambda == 0.0 {
        return 0.0;
    }
    let alpha = ctx.adc.alpha();
    let n_rf = n_rf as f64;
    let n_u_f = n_u as f64;
    n_u_f * (1.0 + alpha * lambda * n_rf / (lambda * n_u_f * (1.0 - alpha) + n_rf / ctx.snr)).log2()
}

/// Ceiling of the one-stage singular-vector combiner:
/// `N_u log2(1 + alpha/(1-alpha))`. Diverges without quantization.
pub fn svd_upper_bound(n_u: usize, adc: &AdcModel) -> Result<f64> {
    if adc.beta() <= 0.0 {
        return Err(Error::Domain(
            "bound diverges for an ideal (infinite-resolution) ADC".into(),
        ));
    }
    Ok(n_u as f64 * (1.0 + adc.alpha() / adc.beta()).log2())
}

/// `m log2(1 + alpha N_RF / (beta m))`; increasing in `m`, so `m = N_u`
/// bounds every semi-unitary combiner.
pub fn general_upper_bound(m: usize, n_rf: usize, adc: &AdcModel) -> Result<f64> {
    if m == 0 {
        return Err(Error::Contract("bound needs m >= 1".into()));
    }
    let m_f = m as f64;
    Ok(m_f * (1.0 + adc.alpha() * n_rf as f64 / (adc.beta() * m_f)).log2())
}

/// Least-squares fit of MI against `log2 N_RF`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `slope / N_u`; tends to 1 for combiners achieving the optimal law.
    pub slope_per_user: f64,
}

pub fn scaling_slope(mi_at_nrf: &BTreeMap<usize, f64>, n_u: usize) -> Result<ScalingFit> {
    if mi_at_nrf.len() < 3 {
        return Err(Error::Contract(format!(
            "scaling fit needs at least 3 RF-chain counts, got {}",
            mi_at_nrf.len()
        )));
    }
    if mi_at_nrf.contains_key(&0) || n_u == 0 {
        return Err(Error::Contract(
            "RF-chain and user counts must be positive".into(),
        ));
    }
    let n = mi_at_nrf.len() as f64;
    let xs: Vec<f64> = mi_at_nrf.keys().map(|&k| (k as f64).log2()).collect();
    let ys: Vec<f64> = mi_at_nrf.values().copied().collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
        slope_per_user: slope / n_u as f64,
    })
}
