//! Line-based `key = value` sweep configuration.
//!
//! ```text
//! # Fig.-2 style SNR sweep
//! n_r = 64
//! n_u = 8
//! n_rf = 22
//! bits = 2
//! snr_db = -10, 0, 10
//! mean_paths = 3
//! seed = 7
//! ```
//!
//! Instead of `n_r` + `n_rf`, a fixed-ratio grid can be given with `kappa` and
//! `n_r_list` (`N_RF = ceil(kappa * N_r)`). Defaults: `trials = 500`,
//! `codebook_size = n_r`, `designs` = all five. Blank lines and `#` comments
//! are ignored.

use std::collections::BTreeMap;

use crate::combiners::DesignTag;
use crate::error::{Error, Result};
use crate::simulation::{RfGrid, SweepConfig, DEFAULT_TRIALS};

pub const KNOWN_KEYS: [&str; 12] = [
    "n_r",
    "n_u",
    "n_rf",
    "kappa",
    "n_r_list",
    "bits",
    "snr_db",
    "mean_paths",
    "trials",
    "seed",
    "designs",
    "codebook_size",
];

/// Raw key/value pairs with the line they came from (0 for overrides).
#[derive(Debug, Default)]
struct Entries {
    map: BTreeMap<&'static str, (String, usize)>,
}

fn split_pair(raw: &str) -> Option<(&str, &str)> {
    let (k, v) = raw.split_once('=')?;
    let k = k.trim();
    let v = v.trim();
    if k.is_empty() || v.is_empty() {
        None
    } else {
        Some((k, v))
    }
}

fn known_key(key: &str, line: usize) -> Result<&'static str> {
    KNOWN_KEYS
        .iter()
        .copied()
        .find(|k| *k == key)
        .ok_or_else(|| Error::config(line, format!("unknown key `{key}`")))
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut out = Entries::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = split_pair(body).ok_or_else(|| {
                Error::config(line, format!("expected `key = value`, got `{body}`"))
            })?;
            let key = known_key(k, line)?;
            if out.map.insert(key, (v.to_string(), line)).is_some() {
                return Err(Error::config(line, format!("duplicate key `{key}`")));
            }
        }
        Ok(out)
    }

    fn apply_override(&mut self, raw: &str) -> Result<()> {
        let (k, v) = split_pair(raw)
            .ok_or_else(|| Error::config(0, format!("override `{raw}` is not `key=value`")))?;
        let key = known_key(k, 0)?;
        self.map.insert(key, (v.to_string(), 0));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.map.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(_, l)| *l)
    }

    fn scalar<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(line, format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn required<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        self.scalar(key)?
            .ok_or_else(|| Error::config(0, format!("missing required key `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse().map_err(|_| {
                        Error::config(line, format!("invalid list item `{item}` for `{key}`"))
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

/// Parses a configuration file.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    parse_config_with_overrides::<&str>(text, &[])
}

/// Parses a configuration and then applies `key=value` overrides, which
/// replace file values.
pub fn parse_config_with_overrides<S: AsRef<str>>(
    text: &str,
    overrides: &[S],
) -> Result<SweepConfig> {
    let mut entries = Entries::parse(text)?;
    for o in overrides {
        entries.apply_override(o.as_ref())?;
    }
    build(&entries)
}

fn build(e: &Entries) -> Result<SweepConfig> {
    let has = |k: &str| e.get(k).is_some();
    let grid = match (has("n_rf"), has("kappa")) {
        (true, true) => {
            return Err(Error::config(
                e.line("kappa"),
                "`kappa` cannot be combined with `n_rf`",
            ))
        }
        (true, false) => {
            if has("n_r_list") {
                return Err(Error::config(
                    e.line("n_r_list"),
                    "`n_r_list` requires `kappa`, not `n_rf`",
                ));
            }
            RfGrid::Fixed {
                n_r: e.required("n_r")?,
                n_rf: e.list("n_rf")?.unwrap_or_default(),
            }
        }
        (false, true) => {
            if has("n_r") {
                return Err(Error::config(
                    e.line("n_r"),
                    "use `n_r_list` together with `kappa`",
                ));
            }
            let kappa: f64 = e.required("kappa")?;
            if !(kappa > 0.0 && kappa < 1.0) {
                return Err(Error::config(
                    e.line("kappa"),
                    format!("kappa {kappa} outside (0, 1)"),
                ));
            }
            let n_r = e
                .list("n_r_list")?
                .ok_or_else(|| Error::config(0, "missing required key `n_r_list`"))?;
            RfGrid::Kappa { kappa, n_r }
        }
        (false, false) => {
            return Err(Error::config(
                0,
                "missing `n_rf` (or `kappa` with `n_r_list`)",
            ))
        }
    };

    let bits: u32 = e.required("bits")?;
    if bits == 0 {
        return Err(Error::config(e.line("bits"), "bits must be at least 1"));
    }
    let n_u: usize = e.required("n_u")?;
    if n_u == 0 {
        return Err(Error::config(e.line("n_u"), "n_u must be at least 1"));
    }
    let snr_db: Vec<f64> = e
        .list("snr_db")?
        .ok_or_else(|| Error::config(0, "missing required key `snr_db`"))?;
    if snr_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::config(
            e.line("snr_db"),
            "snr_db values must be finite",
        ));
    }
    let mean_paths: f64 = e.required("mean_paths")?;
    if !(mean_paths > 0.0 && mean_paths.is_finite()) {
        return Err(Error::config(
            e.line("mean_paths"),
            "mean_paths must be positive",
        ));
    }
    let trials: usize = e.scalar("trials")?.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(Error::config(e.line("trials"), "trials must be at least 1"));
    }
    let master_seed: u64 = e.required("seed")?;
    let designs = match e.get("designs") {
        None => DesignTag::ALL.to_vec(),
        Some((v, line)) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                let tag: DesignTag = item.trim().parse().map_err(|_| {
                    Error::config(line, format!("unknown design tag `{}`", item.trim()))
                })?;
                if !out.contains(&tag) {
                    out.push(tag);
                }
            }
            out
        }
    };
    let codebook_size: Option<usize> = e.scalar("codebook_size")?;

    let config = SweepConfig {
        grid,
        n_u,
        bits,
        snr_db,
        mean_paths,
        trials,
        master_seed,
        designs,
        codebook_size,
    };
    // Attribute constraint violations to the most relevant line.
    config.validate().map_err(|err| match err {
        Error::Config { message, .. } => {
            let line = if message.contains("codebook_size") {
                e.line("codebook_size")
            } else if message.contains("n_u") {
                e.line("n_rf").max(e.line("n_u"))
            } else {
                0
            };
            Error::Config { line, message }
        }
        other => other,
    })?;
    Ok(config)
}
