//! Run configuration: a flat TOML file, command-line overrides and defaults.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::{Deserialize, Serialize};
use supsob::bubbles::CutoffSpec;
use supsob::optimize::MountainPassConfig;
use supsob::{make_grid, ProblemParams, RadialGrid};

use crate::error::{CliError, CliResult, Context};

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "m",
    "alpha",
    "nodes",
    "grading",
    "seed",
    "gamma",
    "cutoff_inner",
    "cutoff_outer",
    "trials",
    "weight",
    "eps",
    "amplitude",
    "alpha_list",
    "beta",
    "energy_cap",
    "mp_eps",
    "max_iter",
    "output_dir",
];

pub const DEFAULT_ALPHA_LIST: [f64; 7] = [0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0];

/// Optional settings, shared by the file format and the command-line flags.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Dimension
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Derivative order
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Supercritical weight exponent
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Grid nodes (multiple of 16)
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Grid grading toward the origin
    #[arg(long, global = true)]
    pub grading: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Remainder exponent for the alpha >= n expansion branches
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub cutoff_inner: Option<f64>,
    #[arg(long, global = true)]
    pub cutoff_outer: Option<f64>,
    /// Random profiles per inequality suite
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Weight exponent `a` of the Hardy and Rellich inequalities
    #[arg(long, global = true)]
    pub weight: Option<f64>,
    /// Comma-separated concentrations for expansion fits
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Bubble amplitude for the modular expansion
    #[arg(long, global = true)]
    pub amplitude: Option<f64>,
    /// Comma-separated weights for `sweep-alpha`
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha_list: Option<Vec<f64>>,
    /// Fractional dimension (default n/m)
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Energy cap `a` for the pointwise and budget checks
    #[arg(long, global = true)]
    pub energy_cap: Option<f64>,
    /// Bubble concentration spanning the initial mountain-pass path
    #[arg(long, global = true)]
    pub mp_eps: Option<f64>,
    /// Iteration cap of the sharp-constant ascent
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Directory for JSON and CSV reports
    #[arg(long = "out", global = true)]
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// Values set here win over `base`.
    fn over(self, base: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            alpha: self.alpha.or(base.alpha),
            nodes: self.nodes.or(base.nodes),
            grading: self.grading.or(base.grading),
            seed: self.seed.or(base.seed),
            gamma: self.gamma.or(base.gamma),
            cutoff_inner: self.cutoff_inner.or(base.cutoff_inner),
            cutoff_outer: self.cutoff_outer.or(base.cutoff_outer),
            trials: self.trials.or(base.trials),
            weight: self.weight.or(base.weight),
            eps: self.eps.or(base.eps),
            amplitude: self.amplitude.or(base.amplitude),
            alpha_list: self.alpha_list.or(base.alpha_list),
            beta: self.beta.or(base.beta),
            energy_cap: self.energy_cap.or(base.energy_cap),
            mp_eps: self.mp_eps.or(base.mp_eps),
            max_iter: self.max_iter.or(base.max_iter),
            output_dir: self.output_dir.or(base.output_dir),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub two_m_star: f64,
    pub nodes: usize,
    pub grading: f64,
    pub seed: u64,
    pub gamma: f64,
    pub cutoff: CutoffSpec,
    pub trials: usize,
    pub weight: f64,
    pub eps: Option<Vec<f64>>,
    pub amplitude: f64,
    pub alpha_list: Vec<f64>,
    pub beta: Option<f64>,
    pub energy_cap: f64,
    pub mp_eps: f64,
    pub max_iter: usize,
    /// Not part of the reports, so reruns into other directories compare equal.
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn grid(&self) -> CliResult<Arc<RadialGrid>> {
        make_grid(self.nodes, self.grading).ctx("radial_core", "make_grid")
    }

    /// `beta`, defaulting to `n/m`.
    pub fn beta(&self) -> f64 {
        self.beta
            .unwrap_or(self.params.n as f64 / self.params.m as f64)
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        resolve(Overrides::default()).expect("defaults are valid")
    }
}

/// Read a configuration file; unknown keys are rejected all at once.
pub fn read_config_file(path: &Path) -> CliResult<Overrides> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> CliResult<Overrides> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut unknown: Vec<String> = table
        .keys()
        .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        unknown.sort();
        return Err(CliError::UnknownKeys(unknown));
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Merge flags over the file (if any) and fill defaults.
pub fn parse_config(file: Option<&Path>, flags: Overrides) -> CliResult<RunConfig> {
    let base = match file {
        Some(p) => read_config_file(p)?,
        None => Overrides::default(),
    };
    resolve(flags.over(base))
}

fn resolve(o: Overrides) -> CliResult<RunConfig> {
    let params = ProblemParams::new(o.n.unwrap_or(5), o.m.unwrap_or(2), o.alpha.unwrap_or(1.0))
        .ctx("cli", "parse_config")?;
    let cutoff = CutoffSpec::new(
        o.cutoff_inner.unwrap_or(0.5),
        o.cutoff_outer.unwrap_or(0.75),
    )
    .ctx("cli", "parse_config")?;
    let gamma = o.gamma.unwrap_or(0.25);
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(CliError::Config(format!(
            "gamma must lie in (0, 1) (got {gamma})"
        )));
    }
    let trials = o.trials.unwrap_or(100);
    if trials == 0 {
        return Err(CliError::Config("trials >= 1 required".into()));
    }
    let weight = o.weight.unwrap_or(0.0);
    if !(weight >= 0.0) {
        return Err(CliError::Config(format!(
            "weight >= 0 required (got {weight})"
        )));
    }
    let positive = |name: &str, v: f64| -> CliResult<f64> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("{name} > 0 required (got {v})")))
        }
    };
    let cfg = RunConfig {
        params,
        two_m_star: params.two_m_star(),
        nodes: o.nodes.unwrap_or(512),
        grading: o.grading.unwrap_or(2.0),
        seed: o.seed.unwrap_or(42),
        gamma,
        cutoff,
        trials,
        weight,
        eps: o.eps,
        amplitude: positive("amplitude", o.amplitude.unwrap_or(1.0))?,
        alpha_list: o.alpha_list.unwrap_or_else(|| DEFAULT_ALPHA_LIST.to_vec()),
        beta: o.beta,
        energy_cap: positive("energy_cap", o.energy_cap.unwrap_or(1.0))?,
        mp_eps: positive(
            "mp_eps",
            o.mp_eps.unwrap_or(MountainPassConfig::default().eps),
        )?,
        max_iter: o.max_iter.unwrap_or(200),
        output_dir: o.output_dir.unwrap_or_else(|| PathBuf::from("supsob-out")),
    };
    cfg.grid()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = parse_config_str("n = 5\nfoo = 1\nbar = \"x\"\n").unwrap_err();
        assert_eq!(err.to_string(), "unknown configuration keys: bar, foo");
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config_str("n = 6\nm = 2\nalpha = 1\n").unwrap();
        let flags = Overrides {
            alpha: Some(2.0),
            ..Default::default()
        };
        let cfg = resolve(flags.over(file)).unwrap();
        assert_eq!(cfg.params.n, 6);
        assert_eq!(cfg.params.alpha, 2.0);
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::default();
        assert_eq!((cfg.nodes, cfg.grading, cfg.seed), (512, 2.0, 42));
        assert_eq!(cfg.gamma, 0.25);
        assert_eq!(
            (cfg.cutoff.inner_radius, cfg.cutoff.outer_radius),
            (0.5, 0.75)
        );
        assert_eq!(cfg.two_m_star, 10.0);
    }

    #[test]
    fn critical_dimension_is_rejected() {
        let flags = Overrides {
            n: Some(4),
            m: Some(2),
            ..Default::default()
        };
        let err = resolve(flags).unwrap_err();
        assert!(err.to_string().contains("n > 2m required"), "{err}");
    }
}
