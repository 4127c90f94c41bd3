//! Config resolution: preset or TOML file, then env seed, then `--set`
//! overrides, then `--seed`.

use dealer_model::engine::RunConfig;
use dealer_model::params::{ModelParams, Policy, SellerTermMode};
use dealer_model::scenarios;
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

/// Env var consulted when no other source names a seed.
pub const SEED_ENV_VAR: &str = "DEALER_SIM_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or malformed input; exit code 2.
    #[error("{0}")]
    Config(String),
    /// Output I/O failure; exit code 3.
    #[error("{0}")]
    Io(String),
    /// Some sweep runs failed; exit code 1.
    #[error("{0}")]
    Partial(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Partial(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

/// Flat key set accepted in config files and `--set`. Every field is
/// optional; absent keys keep their base value.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub n_dealers: Option<usize>,
    pub spread: Option<f64>,
    pub greed: Option<f64>,
    pub expectation_half_width: Option<f64>,
    pub eps_buyer: Option<f64>,
    pub eps_seller: Option<f64>,
    pub policy: Option<Policy>,
    pub mu_window: Option<usize>,
    pub seller_term_mode: Option<SellerTermMode>,
    pub seed: Option<u64>,
    pub max_steps: Option<u64>,
    pub target_deals: Option<u64>,
    pub record_every_step: Option<bool>,
}

impl ConfigFile {
    fn apply(&self, cfg: &mut RunConfig) {
        let p = &mut cfg.params;
        if let Some(v) = self.n_dealers {
            p.n_dealers = v;
        }
        if let Some(v) = self.spread {
            p.spread = v;
        }
        if let Some(v) = self.greed {
            p.greed = v;
        }
        if let Some(v) = self.expectation_half_width {
            p.expectation_half_width = v;
        }
        if let Some(v) = self.eps_buyer {
            p.eps_buyer = v;
        }
        if let Some(v) = self.eps_seller {
            p.eps_seller = v;
        }
        if let Some(v) = self.policy {
            p.policy = v;
        }
        if let Some(v) = self.mu_window {
            p.mu_window = Some(v);
        }
        if let Some(v) = self.seller_term_mode {
            p.seller_term_mode = v;
        }
        if let Some(v) = self.seed {
            p.seed = v;
        }
        if let Some(v) = self.max_steps {
            cfg.max_steps = v;
        }
        if let Some(v) = self.target_deals {
            cfg.target_deals = Some(v);
        }
        if let Some(v) = self.record_every_step {
            cfg.record_every_step = v;
        }
    }
}

/// A fully resolved run plus the trail of how it was assembled.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub config: RunConfig,
    /// Human-readable source, e.g. `preset fig4-baseline`.
    pub source: String,
    /// Overrides applied on top of the source, in application order.
    pub overrides: Vec<String>,
}

/// Assemble and validate a run config.
///
/// Seed precedence, strongest last applied: preset/built-in default, then
/// `DEALER_SIM_SEED`, then an explicit `seed` key in the config file, then
/// `--set seed=`, then `--seed`.
pub fn resolve_config(
    preset_name: Option<&str>,
    config_path: Option<&Path>,
    sets: &[String],
    seed_flag: Option<u64>,
) -> Result<ResolvedRun, CliError> {
    let mut overrides = Vec::new();

    let (mut cfg, source, seed_from_file) = match (preset_name, config_path) {
        (Some(name), None) => {
            let p = scenarios::preset(name).map_err(|e| CliError::Config(e.to_string()))?;
            (p.config, format!("preset {name}"), false)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            let file: ConfigFile = toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
            let mut cfg = RunConfig::new(ModelParams::default());
            let has_seed = file.seed.is_some();
            file.apply(&mut cfg);
            (cfg, format!("config {}", path.display()), has_seed)
        }
        // clap's arg group enforces exactly one source.
        _ => {
            return Err(CliError::Config(
                "exactly one of --preset/--config required".into(),
            ))
        }
    };

    let seed_in_sets = sets.iter().any(|s| s.trim_start().starts_with("seed="));
    if !seed_from_file && !seed_in_sets && seed_flag.is_none() {
        if let Ok(raw) = std::env::var(SEED_ENV_VAR) {
            let seed: u64 = raw.parse().map_err(|_| {
                CliError::Config(format!(
                    "{SEED_ENV_VAR} must be an unsigned integer, got `{raw}`"
                ))
            })?;
            cfg.params.seed = seed;
            overrides.push(format!("seed={seed} (from {SEED_ENV_VAR})"));
        }
    }

    for pair in sets {
        apply_override(&mut cfg, pair)?;
        overrides.push(pair.clone());
    }
    if let Some(seed) = seed_flag {
        cfg.params.seed = seed;
        overrides.push(format!("seed={seed}"));
    }

    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(ResolvedRun {
        config: cfg,
        source,
        overrides,
    })
}

const OVERRIDE_KEYS: &str = "n_dealers, spread, greed, expectation_half_width, eps_buyer, \
     eps_seller, policy, mu_window, seller_term_mode, seed, max_steps, target_deals, \
     record_every_step";

/// Apply one `key=value` pair. `mu_window` and `target_deals` accept `none`.
pub fn apply_override(cfg: &mut RunConfig, pair: &str) -> Result<(), CliError> {
    let (key, value) = pair.split_once('=').ok_or_else(|| {
        CliError::Config(format!("override `{pair}` is not of the form key=value"))
    })?;
    let key = key.trim();
    let value = value.trim();
    let bad = |what: &str| CliError::Config(format!("override {key}: {what} (got `{value}`)"));

    let p = &mut cfg.params;
    match key {
        "n_dealers" => p.n_dealers = value.parse().map_err(|_| bad("expected a count"))?,
        "spread" => p.spread = value.parse().map_err(|_| bad("expected a real"))?,
        "greed" => p.greed = value.parse().map_err(|_| bad("expected a real"))?,
        "expectation_half_width" => {
            p.expectation_half_width = value.parse().map_err(|_| bad("expected a real"))?
        }
        "eps_buyer" => p.eps_buyer = value.parse().map_err(|_| bad("expected a real"))?,
        "eps_seller" => p.eps_seller = value.parse().map_err(|_| bad("expected a real"))?,
        "policy" => {
            p.policy = value
                .parse()
                .map_err(|e: dealer_model::params::ParamError| CliError::Config(e.to_string()))?
        }
        "mu_window" => {
            p.mu_window = if value == "none" {
                None
            } else {
                Some(
                    value
                        .parse()
                        .map_err(|_| bad("expected a count or `none`"))?,
                )
            }
        }
        "seller_term_mode" => {
            p.seller_term_mode = value
                .parse()
                .map_err(|e: dealer_model::params::ParamError| CliError::Config(e.to_string()))?
        }
        "seed" => {
            p.seed = value
                .parse()
                .map_err(|_| bad("expected an unsigned integer"))?
        }
        "max_steps" => cfg.max_steps = value.parse().map_err(|_| bad("expected a count"))?,
        "target_deals" => {
            cfg.target_deals = if value == "none" {
                None
            } else {
                Some(
                    value
                        .parse()
                        .map_err(|_| bad("expected a count or `none`"))?,
                )
            }
        }
        "record_every_step" => {
            cfg.record_every_step = value.parse().map_err(|_| bad("expected true|false"))?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown config key `{other}`; valid keys: {OVERRIDE_KEYS}"
            )))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dealer_model::params::Policy;
    use std::io::Write;

    #[test]
    fn preset_resolves_without_overrides() {
        let r = resolve_config(Some("fig4-baseline"), None, &[], None).unwrap();
        assert_eq!(r.config.params.policy, Policy::Baseline);
        assert!(r.overrides.is_empty() || r.overrides.iter().all(|o| o.contains(SEED_ENV_VAR)));
    }

    #[test]
    fn unknown_preset_is_a_config_error() {
        let err = resolve_config(Some("nope"), None, &[], None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("fig4-baseline"));
    }

    #[test]
    fn sets_apply_in_order_and_seed_flag_wins() {
        let sets = vec!["eps_buyer=0.001".to_string(), "seed=5".to_string()];
        let r = resolve_config(Some("fig5-down"), None, &sets, Some(9)).unwrap();
        assert_eq!(r.config.params.eps_buyer, 0.001);
        assert_eq!(r.config.params.seed, 9);
        assert_eq!(r.overrides.len(), 3);
    }

    #[test]
    fn overrides_are_validated_after_application() {
        let sets = vec!["greed=2.0".to_string()];
        let err = resolve_config(Some("fig4-baseline"), None, &sets, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_override_key_lists_the_schema() {
        let sets = vec!["greediness=0.4".to_string()];
        let err = resolve_config(Some("fig4-baseline"), None, &sets, None).unwrap_err();
        assert!(err.to_string().contains("greed,"));
    }

    #[test]
    fn config_file_overlays_defaults_and_rejects_unknown_keys() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "policy = \"mingled\"\neps_buyer = -0.031\ntarget_deals = 100"
        )
        .unwrap();
        let r = resolve_config(None, Some(f.path()), &[], None).unwrap();
        assert_eq!(r.config.params.policy, Policy::Mingled);
        assert_eq!(r.config.target_deals, Some(100));
        assert_eq!(r.config.params.n_dealers, 100);

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "greediness = 0.4").unwrap();
        let err = resolve_config(None, Some(g.path()), &[], None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn mu_window_none_clears_the_window() {
        let mut cfg = scenarios::preset("fig7-windowed").unwrap().config;
        apply_override(&mut cfg, "mu_window=none").unwrap();
        assert_eq!(cfg.params.mu_window, None);
        apply_override(&mut cfg, "mu_window=50").unwrap();
        assert_eq!(cfg.params.mu_window, Some(50));
    }
}
