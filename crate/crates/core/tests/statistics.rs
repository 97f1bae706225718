//! Distributional checks on the channel generator and sweep aggregation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybrid_tsac::channel::{draw_path_count, generate_channel, ArrayGeometry, ChannelParams};
use hybrid_tsac::simulation::{rf_chains_for_kappa, summarize, trial_values, RfGrid};
use hybrid_tsac::{run_sweep, DesignTag, SweepConfig};

#[test]
fn path_count_mean() {
    // E[max(1, Poisson(3))] = 3 + e^-3
    let expected = 3.0 + (-3.0f64).exp();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let n = 1_000_000;
    let total: usize = (0..n).map(|_| draw_path_count(3.0, &mut rng)).sum();
    let mean = total as f64 / n as f64;
    assert!(((mean - expected) / expected).abs() < 0.01, "mean={mean}");
}

#[test]
fn channel_energy_per_entry_is_one() {
    let g = ArrayGeometry::half_wavelength(32).unwrap();
    let params = ChannelParams::new(4, 3.0, g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 5_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += generate_channel(&params, &mut rng).matrix().norm_squared();
    }
    let mean = acc / (draws * 32 * 4) as f64;
    assert!((mean - 1.0).abs() < 0.03, "mean={mean}");
}

fn small_config() -> SweepConfig {
    SweepConfig {
        grid: RfGrid::Fixed {
            n_r: 16,
            n_rf: vec![4, 8],
        },
        n_u: 2,
        bits: 2,
        snr_db: vec![-5.0, 0.0, 10.0],
        mean_paths: 3.0,
        trials: 25,
        master_seed: 123,
        designs: DesignTag::ALL.to_vec(),
        codebook_size: None,
    }
}

#[test]
fn sweep_rows_match_per_trial_values() {
    let cfg = small_config();
    let res = run_sweep(&cfg).unwrap();
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .map(|t| trial_values(&cfg, t).unwrap())
        .collect();
    for (i, key) in cfg.cells().iter().enumerate() {
        let column: Vec<f64> = per_trial.iter().map(|v| v[i]).collect();
        let (mean, std, sem) = summarize(&column);
        let row = res.find(key.design, key.n_r, key.n_rf, key.snr_db).unwrap();
        assert_eq!((row.mi_mean, row.mi_std, row.mi_sem), (mean, std, sem));
    }
    assert_eq!(res.rows().len(), 5 * 2 * 3);
}

#[test]
fn rows_sorted_by_design_then_grid() {
    let res = run_sweep(&small_config()).unwrap();
    let keys: Vec<_> = res
        .rows()
        .iter()
        .map(|r| (r.design.as_str(), r.n_r, r.n_rf, r.snr_db))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
}

#[test]
fn more_trials_extend_rather_than_reshuffle() {
    let mut cfg = small_config();
    let first = trial_values(&cfg, 3).unwrap();
    cfg.trials = 400;
    assert_eq!(trial_values(&cfg, 3).unwrap(), first);
}

#[test]
fn kappa_rounding() {
    assert_eq!(rf_chains_for_kappa(1.0 / 3.0, 48), 16);
    assert_eq!(rf_chains_for_kappa(1.0 / 3.0, 64), 22);
    assert_eq!(rf_chains_for_kappa(0.5, 128), 64);
}
