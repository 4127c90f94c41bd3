//! Named experiment presets and the eps x seed sweep generator.
//!
//! Preset names are part of the command-line contract; renaming one breaks
//! downstream scripts.

use crate::engine::RunConfig;
use crate::params::{ModelParams, Policy};
use serde::Serialize;
use thiserror::Error;

/// Deal budget the presets default to, sized to the tick-axis extents the
/// experiments are read at.
pub const PRESET_TARGET_DEALS: u64 = 15_000;
/// Generous step ceiling so the deal target, not the step budget, ends runs.
pub const PRESET_MAX_STEPS: u64 = 10_000_000;

/// Qualitative behaviour a preset is expected to show, for catalogs and
/// sweep summaries. Descriptive only; nothing asserts on it at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpectedBehavior {
    NoTrend,
    MonotonicUp,
    MonotonicDown,
    EmergentTrends,
    Mingled,
}

/// One catalog entry: a ready-to-run config plus its expected character.
#[derive(Debug, Clone)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub config: RunConfig,
    pub expected_behavior: ExpectedBehavior,
    pub notes: &'static str,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown preset `{name}`; available: {}", PRESET_NAMES.join(", "))]
    UnknownPreset { name: String },
    #[error("sweep needs non-empty eps and seed lists")]
    EmptySweep,
}

/// Every preset name, in catalog order.
pub const PRESET_NAMES: [&str; 12] = [
    "fig4-baseline",
    "fig5-up",
    "fig5-down",
    "fig7-unpremeditated",
    "fig7-windowed",
    "fig8-omega",
    "fig8-lambda",
    "fig8-gamma",
    "fig8b-omega",
    "fig8b-lambda",
    "fig8c-omega",
    "fig8c-lambda",
];

fn preset_config(mutate: impl FnOnce(&mut ModelParams)) -> RunConfig {
    let mut params = ModelParams::default();
    mutate(&mut params);
    RunConfig {
        params,
        max_steps: PRESET_MAX_STEPS,
        target_deals: Some(PRESET_TARGET_DEALS),
        record_every_step: false,
    }
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Result<ScenarioPreset, ScenarioError> {
    let entry = match name {
        "fig4-baseline" => ScenarioPreset {
            name: "fig4-baseline",
            config: preset_config(|_| {}),
            expected_behavior: ExpectedBehavior::NoTrend,
            notes: "Reference run: exact seller compensation pins the bid sum; \
                    the price fluctuates around its mean with no long-term drift.",
        },
        "fig5-up" => ScenarioPreset {
            name: "fig5-up",
            config: preset_config(|p| {
                p.policy = Policy::Premeditated;
                p.eps_buyer = -0.002;
                p.eps_seller = 0.0;
            }),
            expected_behavior: ExpectedBehavior::MonotonicUp,
            notes: "Buyer concedes a sliver of its post-deal cut; the bid sum \
                    gains greed*0.002 per deal and the price climbs slowly.",
        },
        "fig5-down" => ScenarioPreset {
            name: "fig5-down",
            config: preset_config(|p| {
                p.policy = Policy::Premeditated;
                p.eps_buyer = 0.002;
                p.eps_seller = 0.0;
            }),
            expected_behavior: ExpectedBehavior::MonotonicDown,
            notes: "Mirror of fig5-up: the buyer cuts deeper and the price \
                    declines slowly.",
        },
        "fig7-unpremeditated" => ScenarioPreset {
            name: "fig7-unpremeditated",
            config: preset_config(|p| {
                p.policy = Policy::Unpremeditated;
            }),
            expected_behavior: ExpectedBehavior::EmergentTrends,
            notes: "Sellers divide by the all-history mean seller count; the \
                    leftover imbalance wanders and long swings emerge with no \
                    directional intent.",
        },
        "fig7-windowed" => ScenarioPreset {
            name: "fig7-windowed",
            config: preset_config(|p| {
                p.policy = Policy::Unpremeditated;
                p.mu_window = Some(100);
            }),
            expected_behavior: ExpectedBehavior::EmergentTrends,
            notes: "Same as fig7-unpremeditated but averaging only the last \
                    100 seller counts.",
        },
        "fig8-omega" => ScenarioPreset {
            name: "fig8-omega",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = -0.031;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Averaged sellers plus a strong upward buyer lean; at this \
                    magnitude the lean usually wins and the price rises.",
        },
        "fig8-lambda" => ScenarioPreset {
            name: "fig8-lambda",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = 0.031;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Mirror of fig8-omega with a strong downward buyer lean.",
        },
        "fig8-gamma" => ScenarioPreset {
            name: "fig8-gamma",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = 0.0;
            }),
            expected_behavior: ExpectedBehavior::EmergentTrends,
            notes: "Zero lean: reduces exactly to the unpremeditated rule; \
                    kept in the family for side-by-side comparison.",
        },
        "fig8b-omega" => ScenarioPreset {
            name: "fig8b-omega",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = -0.0021;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Weak upward lean inside the regime where the emergent \
                    imbalance can override the lean's sign.",
        },
        "fig8b-lambda" => ScenarioPreset {
            name: "fig8b-lambda",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = 0.0021;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Weak downward lean; sign of the outcome is not guaranteed \
                    to follow the lean.",
        },
        "fig8c-omega" => ScenarioPreset {
            name: "fig8c-omega",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = -0.002;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Slightly weaker lean than fig8b-omega.",
        },
        "fig8c-lambda" => ScenarioPreset {
            name: "fig8c-lambda",
            config: preset_config(|p| {
                p.policy = Policy::Mingled;
                p.eps_buyer = 0.002;
            }),
            expected_behavior: ExpectedBehavior::Mingled,
            notes: "Slightly weaker lean than fig8b-lambda.",
        },
        other => {
            return Err(ScenarioError::UnknownPreset {
                name: other.to_string(),
            })
        }
    };
    Ok(entry)
}

/// Cartesian product of eps values and seeds over a base config, eps outer
/// and seed inner, applied to `eps_buyer` and `seed`.
pub fn sweep(
    base: &RunConfig,
    eps_values: &[f64],
    seeds: &[u64],
) -> Result<Vec<RunConfig>, ScenarioError> {
    if eps_values.is_empty() || seeds.is_empty() {
        return Err(ScenarioError::EmptySweep);
    }
    let mut configs = Vec::with_capacity(eps_values.len() * seeds.len());
    for &eps in eps_values {
        for &seed in seeds {
            let mut cfg = base.clone();
            cfg.params.eps_buyer = eps;
            cfg.params.seed = seed;
            configs.push(cfg);
        }
    }
    Ok(configs)
}
