//! Deterministic threshold dealer market.
//!
//! N dealers each quote a buying price; a deal fires when the highest bid
//! reaches the lowest bid plus a fixed spread. The buyer then lowers its bid
//! by a greed constant, the sellers raise theirs by a share of it, and every
//! bid drifts by a fixed per-dealer expectation each step. Four policies for
//! the sellers' share ([`params::Policy`]) span the space from exact
//! compensation (no trend can form) to incomplete-information averaging
//! (trends emerge on their own).
//!
//! - [`market`] — the pure deal/adjustment rules
//! - [`engine`] — seeded initialisation and the step loop
//! - [`analysis`] — trend metrics and conservation audits
//! - [`scenarios`] — named presets and sweep generation
//!
//! Runs are bit-reproducible from their config; see [`rng`] for the pinned
//! generator.

pub mod analysis;
pub mod engine;
pub mod market;
pub mod params;
pub mod rng;
pub mod scenarios;

pub use analysis::{load_external_series, ols_fit, trend_report, TrendReport};
pub use engine::{init_dealers, mu_of_history, run, DealRecord, RunConfig, TickSeries};
pub use market::{DealOutcome, MarketState};
pub use params::{ModelParams, Policy, SellerTermMode};
pub use scenarios::{preset, sweep, ScenarioPreset};
