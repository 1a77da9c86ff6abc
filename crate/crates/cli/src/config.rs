use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hyperdyn::{Branch, Space};
use serde::{Deserialize, Serialize};

/// A map given inline instead of a catalog scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMap {
    pub space: Space,
    pub branches: Vec<Branch>,
    /// Starting set; defaults to a lattice net of the whole domain.
    #[serde(default)]
    pub start: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Probes {
    pub attractor: bool,
    pub basins: bool,
    pub stability: bool,
    pub witness: bool,
    pub janos: bool,
}

impl Default for Probes {
    fn default() -> Self {
        Probes {
            attractor: true,
            basins: true,
            stability: true,
            witness: true,
            janos: true,
        }
    }
}

/// Everything a run needs. Unset numeric fields fall back to the
/// scenario's defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub custom: Option<CustomMap>,
    pub h: Option<f64>,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
    pub horizon: Option<usize>,
    pub samples: Option<usize>,
    pub epsilons: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub basin_samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub emit: Option<Vec<String>>,
    pub probes: Probes,
}

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Emit {
    pub json: bool,
    pub csv: bool,
    pub pgm: bool,
    pub svg: bool,
}

impl Emit {
    pub fn parse(items: &[String]) -> Result<Emit> {
        let mut e = Emit::default();
        for item in items.iter().flat_map(|s| s.split(',')) {
            match item.trim() {
                "json" => e.json = true,
                "csv" => e.csv = true,
                "pgm" => e.pgm = true,
                "svg" => e.svg = true,
                "" => {}
                other => bail!("unknown emit format {other:?} (expected json, csv, pgm, svg)"),
            }
        }
        Ok(e)
    }
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("{origin}:{}:{}: {e}", e.line(), e.column())
        })
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        RunConfig::from_json(&text, &path.display().to_string())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(scenario, custom, h, tol, n_max, horizon, samples, epsilons, deltas, basin_samples, seed, out, emit);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.scenario, &self.custom) {
            (None, None) => bail!("no scenario given (use --scenario or a config file)"),
            (Some(_), Some(_)) => bail!("give either a scenario name or a custom map, not both"),
            _ => {}
        }
        if let Some(h) = self.h {
            if !(h > 0.0) || !h.is_finite() {
                bail!("h must be positive, got {h}");
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) || !t.is_finite() {
                bail!("tol must be positive, got {t}");
            }
        }
        Ok(())
    }
}
