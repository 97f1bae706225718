//! Analog combiner designs.
//!
//! Every design returns a [`Combiner`] holding the first stage `W1`
//! (`N_r x N_RF`), the second stage `W2` (`N_RF x N_RF`) and their product.
//! The two-stage designs use a normalized DFT as `W2`: it is unitary and has
//! constant-modulus entries, so it can be realized with fixed phase shifters
//! while spreading the gain captured by `W1` evenly over all RF chains.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::{steering_vector_unchecked, ArrayGeometry};
use crate::error::{Error, Result};
use crate::linalg::{leading_left_singular_vectors, CMat};
use crate::metrics::{mutual_information_from_projection, MiContext};
use crate::quantization::AdcModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DesignTag {
    /// Codebook gain aggregation followed by the DFT spreading stage.
    ArvTsac,
    /// The same codebook selection without the second stage.
    Arv,
    /// Leading left singular vectors followed by the DFT.
    SvdDft,
    /// Leading left singular vectors only.
    Svd,
    /// Codebook vectors picked one at a time to maximize the quantized MI.
    GreedyMi,
}

impl DesignTag {
    pub const ALL: [DesignTag; 5] = [
        DesignTag::ArvTsac,
        DesignTag::Arv,
        DesignTag::SvdDft,
        DesignTag::Svd,
        DesignTag::GreedyMi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DesignTag::ArvTsac => "ARV_TSAC",
            DesignTag::Arv => "ARV",
            DesignTag::SvdDft => "SVD_DFT",
            DesignTag::Svd => "SVD",
            DesignTag::GreedyMi => "GREEDY_MI",
        }
    }

    /// Whether the design draws its vectors from an angle codebook.
    pub fn uses_codebook(self) -> bool {
        matches!(
            self,
            DesignTag::ArvTsac | DesignTag::Arv | DesignTag::GreedyMi
        )
    }
}

impl fmt::Display for DesignTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DesignTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DesignTag::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Domain(format!("unknown design tag `{s}`")))
    }
}

/// Evenly spaced spatial angles `2n/|V| - 1`, `n = 1..=|V|`, and their array
/// responses (one column per angle).
#[derive(Debug, Clone, PartialEq)]
pub struct AngleCodebook {
    spatial_angles: Vec<f64>,
    vectors: CMat,
}

impl AngleCodebook {
    pub fn new(geometry: &ArrayGeometry, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Domain("codebook must be nonempty".into()));
        }
        let n_r = geometry.n_antennas();
        let spatial_angles: Vec<f64> = (1..=size)
            .map(|n| 2.0 * n as f64 / size as f64 - 1.0)
            .collect();
        let mut vectors = CMat::zeros(n_r, size);
        for (c, &t) in spatial_angles.iter().enumerate() {
            vectors.set_column(c, &steering_vector_unchecked(n_r, t));
        }
        Ok(Self {
            spatial_angles,
            vectors,
        })
    }

    pub fn size(&self) -> usize {
        self.spatial_angles.len()
    }

    pub fn spatial_angles(&self) -> &[f64] {
        &self.spatial_angles
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn n_antennas(&self) -> usize {
        self.vectors.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    w1: CMat,
    w2: CMat,
    effective: CMat,
    design: DesignTag,
    selected_angles: Option<Vec<f64>>,
}

impl Combiner {
    fn new(w1: CMat, w2: CMat, design: DesignTag, selected_angles: Option<Vec<f64>>) -> Self {
        let effective = &w1 * &w2;
        Self {
            w1,
            w2,
            effective,
            design,
            selected_angles,
        }
    }

    pub fn w1(&self) -> &CMat {
        &self.w1
    }

    pub fn w2(&self) -> &CMat {
        &self.w2
    }

    /// `W1 * W2`.
    pub fn effective(&self) -> &CMat {
        &self.effective
    }

    pub fn design(&self) -> DesignTag {
        self.design
    }

    /// Spatial angles picked by a codebook design, in selection order.
    pub fn selected_angles(&self) -> Option<&[f64]> {
        self.selected_angles.as_deref()
    }

    pub fn n_rf(&self) -> usize {
        self.effective.ncols()
    }
}

/// Normalized DFT: entry `(p, q)` is `exp(-j 2 pi p q / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> CMat {
    let scale = 1.0 / (n as f64).sqrt();
    CMat::from_fn(n, n, |p, q| {
        // reduce the exponent first to keep the phase exact for large n
        let k = (p * q) % n;
        Complex64::from_polar(scale, -2.0 * PI * k as f64 / n as f64)
    })
}

fn check_rf(h: &CMat, n_rf: usize) -> Result<()> {
    if n_rf == 0 {
        return Err(Error::Contract("need at least one RF chain".into()));
    }
    if n_rf > h.nrows() {
        return Err(Error::Contract(format!(
            "{n_rf} RF chains exceed {} antennas",
            h.nrows()
        )));
    }
    Ok(())
}

/// One-stage combiner on the `n_rf` leading left singular vectors.
pub fn svd_combiner(h: &CMat, n_rf: usize) -> Result<Combiner> {
    check_rf(h, n_rf)?;
    let w1 = leading_left_singular_vectors(h, n_rf)?;
    Ok(Combiner::new(
        w1,
        CMat::identity(n_rf, n_rf),
        DesignTag::Svd,
        None,
    ))
}

/// Leading left singular vectors followed by the DFT stage.
pub fn svd_dft_combiner(h: &CMat, n_rf: usize) -> Result<Combiner> {
    check_rf(h, n_rf)?;
    let w1 = leading_left_singular_vectors(h, n_rf)?;
    Ok(Combiner::new(w1, dft_matrix(n_rf), DesignTag::SvdDft, None))
}

/// The unconstrained two-stage solution `[U_{1:N_u} U_perp] * W_DFT`.
///
/// `U_perp` continues with the next left singular vectors of `h` and then a
/// deterministic orthonormal completion, so the result coincides with
/// [`svd_dft_combiner`] and carries the same tag.
pub fn theorem_combiner(h: &CMat, n_rf: usize, n_u: usize) -> Result<Combiner> {
    check_rf(h, n_rf)?;
    if n_u > n_rf {
        return Err(Error::Contract(format!(
            "{n_u} users exceed {n_rf} RF chains"
        )));
    }
    let w1 = leading_left_singular_vectors(h, n_rf)?;
    Ok(Combiner::new(w1, dft_matrix(n_rf), DesignTag::SvdDft, None))
}

/// Outcome of the greedy maximum-gain codebook scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ArvSelection {
    /// Codebook indices in selection order.
    pub indices: Vec<usize>,
    /// Gain `||a^H H_rm||^2` of each pick at the time it was chosen.
    pub captured_gains: Vec<f64>,
    /// `||a^H H_rm||` of each pick right after its deflation step.
    pub residual_after_deflation: Vec<f64>,
}

/// Picks `n_rf` codebook vectors one at a time, each maximizing the channel
/// gain left in the residual channel, and projects that direction out of the
/// residual before the next pick. Exact ties go to the lowest index.
pub fn max_gain_aggregation(
    h: &CMat,
    n_rf: usize,
    codebook: &AngleCodebook,
) -> Result<ArvSelection> {
    if codebook.n_antennas() != h.nrows() {
        return Err(Error::Contract(format!(
            "codebook built for {} antennas, channel has {}",
            codebook.n_antennas(),
            h.nrows()
        )));
    }
    if n_rf > codebook.size() {
        return Err(Error::Contract(format!(
            "{n_rf} RF chains exceed codebook size {}",
            codebook.size()
        )));
    }
    check_rf(h, n_rf)?;
    let a = codebook.vectors();
    let mut residual = h.clone();
    let mut available = vec![true; codebook.size()];
    let mut sel = ArvSelection {
        indices: Vec::with_capacity(n_rf),
        captured_gains: Vec::with_capacity(n_rf),
        residual_after_deflation: Vec::with_capacity(n_rf),
    };
    let one = Complex64::new(1.0, 0.0);
    for _ in 0..n_rf {
        let proj = a.adjoint() * &residual;
        let mut best: Option<(usize, f64)> = None;
        for (idx, free) in available.iter().enumerate() {
            if !free {
                continue;
            }
            let gain = proj.row(idx).norm_squared();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((idx, gain));
            }
        }
        let (idx, gain) = best.expect("codebook has a free entry");
        let v = a.column(idx);
        // H_rm <- (I - a a^H) H_rm
        let back = residual.adjoint() * v;
        residual.gerc(-one, &v, &back, one);
        sel.residual_after_deflation
            .push((v.adjoint() * &residual).norm());
        sel.indices.push(idx);
        sel.captured_gains.push(gain);
        available[idx] = false;
    }
    Ok(sel)
}

fn codebook_columns(codebook: &AngleCodebook, indices: &[usize]) -> (CMat, Vec<f64>) {
    let a = codebook.vectors();
    let mut w1 = CMat::zeros(a.nrows(), indices.len());
    for (c, &i) in indices.iter().enumerate() {
        w1.set_column(c, &a.column(i));
    }
    let angles = indices
        .iter()
        .map(|&i| codebook.spatial_angles()[i])
        .collect();
    (w1, angles)
}

/// ARV-based two-stage analog combining: greedy gain aggregation over the
/// codebook, then the DFT spreading stage.
pub fn arv_tsac(h: &CMat, n_rf: usize, codebook: &AngleCodebook) -> Result<Combiner> {
    let sel = max_gain_aggregation(h, n_rf, codebook)?;
    let (w1, angles) = codebook_columns(codebook, &sel.indices);
    Ok(Combiner::new(
        w1,
        dft_matrix(n_rf),
        DesignTag::ArvTsac,
        Some(angles),
    ))
}

/// The ARV-TSAC selection used alone (`W2 = I`).
pub fn arv_only(h: &CMat, n_rf: usize, codebook: &AngleCodebook) -> Result<Combiner> {
    let sel = max_gain_aggregation(h, n_rf, codebook)?;
    let (w1, angles) = codebook_columns(codebook, &sel.indices);
    Ok(Combiner::new(
        w1,
        CMat::identity(n_rf, n_rf),
        DesignTag::Arv,
        Some(angles),
    ))
}

/// One-stage greedy MI maximization: each step appends the codebook vector
/// for which the quantized MI of the partial combiner (with `W2 = I`) is
/// largest. Exact ties go to the lowest index.
pub fn greedy_mi(
    h: &CMat,
    n_rf: usize,
    codebook: &AngleCodebook,
    snr: f64,
    adc: &AdcModel,
) -> Result<Combiner> {
    if codebook.n_antennas() != h.nrows() {
        return Err(Error::Contract(format!(
            "codebook built for {} antennas, channel has {}",
            codebook.n_antennas(),
            h.nrows()
        )));
    }
    if n_rf > codebook.size() {
        return Err(Error::Contract(format!(
            "{n_rf} RF chains exceed codebook size {}",
            codebook.size()
        )));
    }
    check_rf(h, n_rf)?;
    let ctx = MiContext::new(snr, *adc)?;
    let a = codebook.vectors();
    // Row i: a_i^H H. Codebook Gram for W^H W of any subset.
    let proj = a.adjoint() * h;
    let gram = a.adjoint() * a;
    let n_u = h.ncols();

    let mut chosen: Vec<usize> = Vec::with_capacity(n_rf);
    let mut available = vec![true; codebook.size()];
    for step in 0..n_rf {
        let k = step + 1;
        let mut wh = CMat::zeros(k, n_u);
        let mut g = CMat::zeros(k, k);
        for (r, &i) in chosen.iter().enumerate() {
            wh.set_row(r, &proj.row(i));
            for (c, &j) in chosen.iter().enumerate() {
                g[(r, c)] = gram[(i, j)];
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for (idx, free) in available.iter().enumerate() {
            if !free {
                continue;
            }
            wh.set_row(step, &proj.row(idx));
            for (r, &i) in chosen.iter().enumerate() {
                g[(r, step)] = gram[(i, idx)];
                g[(step, r)] = gram[(idx, i)];
            }
            g[(step, step)] = gram[(idx, idx)];
            let mi = mutual_information_from_projection(&wh, &g, &ctx)?;
            if best.is_none_or(|(_, m)| mi > m) {
                best = Some((idx, mi));
            }
        }
        let (idx, _) = best.expect("codebook has a free entry");
        chosen.push(idx);
        available[idx] = false;
    }
    let (w1, angles) = codebook_columns(codebook, &chosen);
    Ok(Combiner::new(
        w1,
        CMat::identity(n_rf, n_rf),
        DesignTag::GreedyMi,
        Some(angles),
    ))
}

/// Builds the combiner for `design`. Only the greedy-MI design depends on the
/// SNR and ADC model.
pub fn build(
    design: DesignTag,
    h: &CMat,
    n_rf: usize,
    codebook: &AngleCodebook,
    snr: f64,
    adc: &AdcModel,
) -> Result<Combiner> {
    match design {
        DesignTag::ArvTsac => arv_tsac(h, n_rf, codebook),
        DesignTag::Arv => arv_only(h, n_rf, codebook),
        DesignTag::SvdDft => svd_dft_combiner(h, n_rf),
        DesignTag::Svd => svd_combiner(h, n_rf),
        DesignTag::GreedyMi => greedy_mi(h, n_rf, codebook, snr, adc),
    }
}

fn format_entry(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}j", z.re, sign, z.im.abs())
}

/// Plain-text matrix dump: a `rows cols` header, then one line per row of
/// whitespace-separated `re+imj` tokens.
pub fn write_matrix<W: Write>(out: &mut W, m: &CMat) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.nrows(), m.ncols())?;
    for r in 0..m.nrows() {
        let line: Vec<String> = (0..m.ncols()).map(|c| format_entry(m[(r, c)])).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

fn parse_entry(tok: &str) -> Option<Complex64> {
    let body = tok.strip_suffix('j')?;
    // the imaginary sign is the last '+' or '-' not belonging to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| {
        (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
    })?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex64::new(re, im))
}

/// Parses the format written by [`write_matrix`].
pub fn read_matrix(text: &str) -> Result<CMat> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Contract(format!("matrix dump missing {what}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let entries: Vec<Complex64> = tokens
        .map(|t| parse_entry(t).ok_or_else(|| Error::Contract(format!("bad matrix entry `{t}`"))))
        .collect::<Result<_>>()?;
    if entries.len() != rows * cols {
        return Err(Error::Contract(format!(
            "matrix dump has {} entries, expected {}",
            entries.len(),
            rows * cols
        )));
    }
    Ok(CMat::from_row_slice(rows, cols, &entries))
}
