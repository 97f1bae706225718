//! Seeded Monte Carlo sweeps over SNR and RF-chain grids.
//!
//! Every trial draws its channel from a generator seeded by
//! [`derive_trial_seed`], so results do not depend on how trials are
//! scheduled across threads. All designs in a trial see the same channel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{generate_channel, ArrayGeometry, ChannelMatrix, ChannelParams};
use crate::combiners::{self, AngleCodebook, DesignTag};
use crate::error::{Error, Result};
use crate::metrics::{mutual_information, MiContext};
use crate::quantization::AdcModel;

/// How the (N_r, N_RF) grid is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum RfGrid {
    /// One array size, explicit RF-chain counts.
    Fixed { n_r: usize, n_rf: Vec<usize> },
    /// Several array sizes with `N_RF = ceil(kappa * N_r)`.
    Kappa { kappa: f64, n_r: Vec<usize> },
}

/// `ceil(kappa * n_r)`, tolerant to the representation error of `kappa`
/// (so `1/3 * 48` gives 16).
pub fn rf_chains_for_kappa(kappa: f64, n_r: usize) -> usize {
    (kappa * n_r as f64 - 1e-9).ceil().max(1.0) as usize
}

impl RfGrid {
    /// `(N_r, [N_RF...])` pairs in configuration order.
    pub fn points(&self) -> Vec<(usize, Vec<usize>)> {
        match self {
            RfGrid::Fixed { n_r, n_rf } => vec![(*n_r, n_rf.clone())],
            RfGrid::Kappa { kappa, n_r } => n_r
                .iter()
                .map(|&n| (n, vec![rf_chains_for_kappa(*kappa, n)]))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: RfGrid,
    pub n_u: usize,
    pub bits: u32,
    pub snr_db: Vec<f64>,
    pub mean_paths: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub designs: Vec<DesignTag>,
    /// Codebook size; `None` means one entry per antenna.
    pub codebook_size: Option<usize>,
}

pub const DEFAULT_TRIALS: usize = 500;

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::config(0, m));
        if self.n_u == 0 {
            return fail("n_u must be at least 1".into());
        }
        if self.bits == 0 {
            return fail("bits must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return fail("snr_db must be a nonempty list of finite values".into());
        }
        if !(self.mean_paths > 0.0 && self.mean_paths.is_finite()) {
            return fail(format!("mean_paths {} must be positive", self.mean_paths));
        }
        if self.designs.is_empty() {
            return fail("no designs selected".into());
        }
        if let RfGrid::Kappa { kappa, .. } = self.grid {
            if !(kappa > 0.0 && kappa < 1.0) {
                return fail(format!("kappa {kappa} outside (0, 1)"));
            }
        }
        let points = self.grid.points();
        if points.is_empty() || points.iter().any(|(_, l)| l.is_empty()) {
            return fail("empty antenna / RF-chain grid".into());
        }
        for (n_r, n_rfs) in &points {
            if *n_r == 0 {
                return fail("n_r must be at least 1".into());
            }
            for &n_rf in n_rfs {
                if n_rf < self.n_u {
                    return fail(format!("n_u = {} exceeds n_rf = {n_rf}", self.n_u));
                }
                if n_rf > *n_r {
                    return fail(format!("n_rf = {n_rf} exceeds n_r = {n_r}"));
                }
                let book = self.codebook_size.unwrap_or(*n_r);
                if book == 0 {
                    return fail("codebook_size must be at least 1".into());
                }
                if book < n_rf && self.designs.iter().any(|d| d.uses_codebook()) {
                    return fail(format!(
                        "codebook_size {book} is smaller than n_rf = {n_rf}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Cell layout shared by [`trial_values`] and [`run_sweep`].
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for (n_r, n_rfs) in self.grid.points() {
            for n_rf in n_rfs {
                for &design in &self.designs {
                    for &snr_db in &self.snr_db {
                        out.push(CellKey {
                            design,
                            n_r,
                            n_rf,
                            snr_db,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub design: DesignTag,
    pub n_r: usize,
    pub n_rf: usize,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub design: DesignTag,
    pub n_r: usize,
    pub n_rf: usize,
    pub snr_db: f64,
    pub bits: u32,
    pub trials: usize,
    pub mi_mean: f64,
    pub mi_std: f64,
    pub mi_sem: f64,
}

/// Aggregated sweep statistics, sorted by (design tag, N_r, N_RF, SNR).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn new(mut rows: Vec<SweepRow>) -> Self {
        rows.sort_by(|a, b| {
            a.design
                .as_str()
                .cmp(b.design.as_str())
                .then(a.n_r.cmp(&b.n_r))
                .then(a.n_rf.cmp(&b.n_rf))
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
        Self { rows }
    }

    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    pub fn find(
        &self,
        design: DesignTag,
        n_r: usize,
        n_rf: usize,
        snr_db: f64,
    ) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.design == design && r.n_r == n_r && r.n_rf == n_rf && r.snr_db == snr_db)
    }
}

/// SplitMix64 output function (a bijection on `u64`).
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Per-trial seed: the SplitMix64 finalizer applied to the mixed master seed
/// advanced by `trial_index + 1` golden-ratio steps. For a fixed master seed
/// the map is injective in `trial_index`.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let base = splitmix64(master_seed);
    splitmix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial_index.wrapping_add(1))))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn draw_channel(
    config: &SweepConfig,
    geometry: ArrayGeometry,
    point: usize,
    trial: usize,
) -> Result<ChannelMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_trial_seed(config.master_seed, trial as u64));
    rng.set_stream(point as u64);
    let params = ChannelParams::new(config.n_u, config.mean_paths, geometry)?;
    Ok(generate_channel(&params, &mut rng))
}

/// The channel that `trial` sees at grid point `point` (index into
/// [`RfGrid::points`]). Each array size draws from its own stream.
pub fn trial_channel(config: &SweepConfig, point: usize, trial: usize) -> Result<ChannelMatrix> {
    config.validate()?;
    let points = config.grid.points();
    let (n_r, _) = points
        .get(point)
        .ok_or_else(|| Error::Contract(format!("grid point {point} out of range")))?;
    draw_channel(config, ArrayGeometry::half_wavelength(*n_r)?, point, trial)
}

/// Precomputed per-configuration state shared by all trials.
struct SweepPlan {
    points: Vec<(ArrayGeometry, Vec<usize>, AngleCodebook)>,
    adc: AdcModel,
    contexts: Vec<MiContext>,
}

impl SweepPlan {
    fn new(config: &SweepConfig) -> Result<Self> {
        config.validate()?;
        let adc = AdcModel::new(config.bits)?;
        let contexts = config
            .snr_db
            .iter()
            .map(|&db| MiContext::new(db_to_linear(db), adc))
            .collect::<Result<_>>()?;
        let points = config
            .grid
            .points()
            .into_iter()
            .map(|(n_r, n_rfs)| {
                let g = ArrayGeometry::half_wavelength(n_r)?;
                let book = AngleCodebook::new(&g, config.codebook_size.unwrap_or(n_r))?;
                Ok((g, n_rfs, book))
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            points,
            adc,
            contexts,
        })
    }

    fn trial(&self, config: &SweepConfig, trial: usize) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for (point, (geometry, n_rfs, book)) in self.points.iter().enumerate() {
            let channel = draw_channel(config, *geometry, point, trial)?;
            let h = channel.matrix();
            for &n_rf in n_rfs {
                for &design in &config.designs {
                    if design == DesignTag::GreedyMi {
                        for ctx in &self.contexts {
                            let c = combiners::greedy_mi(h, n_rf, book, ctx.snr(), &self.adc)?;
                            out.push(mutual_information(h, c.effective(), ctx)?);
                        }
                    } else {
                        let c = combiners::build(design, h, n_rf, book, 1.0, &self.adc)?;
                        for ctx in &self.contexts {
                            out.push(mutual_information(h, c.effective(), ctx)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// MI of every cell (in [`SweepConfig::cells`] order) for a single trial.
pub fn trial_values(config: &SweepConfig, trial: usize) -> Result<Vec<f64>> {
    SweepPlan::new(config)?.trial(config, trial)
}

/// Pairwise summation; the result depends only on the order of `xs`.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Mean, sample standard deviation and standard error of the mean.
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    let std = if n > 1 {
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&dev) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (mean, std, std / (n as f64).sqrt())
}

/// Runs the sweep. Trials execute in parallel; only per-trial MI scalars are
/// kept, and aggregation runs in trial order so the output is bit-identical
/// for identical configurations.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let plan = SweepPlan::new(config)?;
    let per_trial: Vec<Vec<f64>> = (0..config.trials)
        .into_par_iter()
        .map(|t| plan.trial(config, t))
        .collect::<Result<_>>()?;
    let cells = config.cells();
    let rows = cells
        .iter()
        .enumerate()
        .map(|(i, key)| {
            let column: Vec<f64> = per_trial.iter().map(|v| v[i]).collect();
            let (mi_mean, mi_std, mi_sem) = summarize(&column);
            SweepRow {
                design: key.design,
                n_r: key.n_r,
                n_rf: key.n_rf,
                snr_db: key.snr_db,
                bits: config.bits,
                trials: config.trials,
                mi_mean,
                mi_std,
                mi_sem,
            }
        })
        .collect();
    Ok(SweepResult::new(rows))
}
