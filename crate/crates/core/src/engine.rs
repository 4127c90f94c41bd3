//! Seeded initialisation and the simulated time loop.
//!
//! A run is a strict recurrence: identical config (seed included) reproduces
//! the identical tick series bit for bit. Runs never share state, so any
//! number of them can execute in parallel.

use crate::market::{
    apply_update, deal_condition, delta_baseline, delta_mingled, delta_premeditated,
    delta_unpremeditated, resolve_deal, MarketState,
};
use crate::params::{ModelParams, Policy};
use crate::rng::{SplitMix64, RNG_ALGORITHM};
use serde::{Deserialize, Serialize};

/// Everything one run needs: the model constants plus the stop conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: ModelParams,
    /// Hard step budget; the loop never exceeds it.
    pub max_steps: u64,
    /// Stop once this many deals have been recorded. Whichever of the two
    /// limits hits first ends the run; `Some(0)` yields an empty series.
    pub target_deals: Option<u64>,
    /// Also keep a per-step (step, price, bid-sum) trace alongside the
    /// per-deal records. Off by default: the price series of interest is
    /// sampled at deals.
    pub record_every_step: bool,
}

impl RunConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            max_steps: 10_000_000,
            target_deals: None,
            record_every_step: false,
        }
    }

    pub fn validate(&self) -> Result<(), crate::params::ParamError> {
        self.params.validate()?;
        if self.max_steps == 0 {
            return Err(crate::params::ParamError::Invalid {
                field: "max_steps",
                reason: "a run needs at least one step".to_string(),
            });
        }
        Ok(())
    }
}

/// One resolved deal as recorded in the output series.
#[derive(Debug, Clone, PartialEq)]
pub struct DealRecord {
    /// 1-based, contiguous.
    pub deal_index: u64,
    /// Step at which the deal fired.
    pub step: u64,
    /// Transaction price: the buyer's bid before the update.
    pub price: f64,
    pub buyer: usize,
    /// Actual number of sellers in this deal.
    pub n_sellers: usize,
    /// Seller-count value the policy divided by: the mean of past counts for
    /// the averaged policies, the actual count otherwise.
    pub mu_n_used: f64,
    /// Bid sum after the update, accumulated in ascending dealer index.
    pub sum_bids: f64,
}

/// Per-step trace point, kept only when `record_every_step` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPoint {
    pub step: u64,
    pub price: f64,
    pub sum_bids: f64,
}

/// Complete output of one run.
#[derive(Debug, Clone)]
pub struct TickSeries {
    pub records: Vec<DealRecord>,
    /// Empty unless the config asked for the per-step trace.
    pub step_trace: Vec<StepPoint>,
    pub config_echo: RunConfig,
    /// Generator the run drew from; replays must match it.
    pub rng_algorithm: &'static str,
    /// Bid sum right after initialisation, before any step.
    pub initial_sum_bids: f64,
    /// FNV-1a over the final bid vector (see [`bid_digest`]).
    pub final_state_digest: u64,
    /// Set when the run ended with zero deals despite a nonzero deal target.
    pub no_deal_warning: bool,
}

/// Draw the initial bids and the fixed expectation vector from one seed.
///
/// Bids are i.i.d. uniform strictly inside (-spread, spread). Expectations
/// are i.i.d. uniform strictly inside (-half_width, half_width) and then
/// shifted by their sample mean, so they sum to zero (to rounding) and each
/// lies strictly inside (-2*half_width, 2*half_width). The same seed gives
/// the same vectors bit for bit.
pub fn init_dealers(
    seed: u64,
    n_dealers: usize,
    spread: f64,
    expectation_half_width: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut rng = SplitMix64::new(seed);
    let bids: Vec<f64> = (0..n_dealers).map(|_| rng.next_symmetric(spread)).collect();
    let mut expectations: Vec<f64> = (0..n_dealers)
        .map(|_| rng.next_symmetric(expectation_half_width))
        .collect();
    let mean = expectations.iter().sum::<f64>() / n_dealers as f64;
    for a in &mut expectations {
        *a -= mean;
    }
    (bids, expectations)
}

/// Mean of the trailing `window` seller counts (the whole history when
/// `window` is `None`). Returns `None` for an empty history — the caller
/// falls back to the actual count of the deal at hand.
pub fn mu_of_history(history: &[usize], window: Option<usize>) -> Option<f64> {
    if history.is_empty() {
        return None;
    }
    let take = window.map_or(history.len(), |w| w.min(history.len()));
    let tail = &history[history.len() - take..];
    Some(tail.iter().map(|&n| n as f64).sum::<f64>() / take as f64)
}

/// Advance the market by one step. Returns the deal record if one fired.
///
/// No deal: the bids drift by the expectations alone and the price holds.
/// Deal: resolve buyer and sellers, compute the policy's adjustments (the
/// averaged policies use the seller-count history strictly before this deal),
/// update the bids, then append the actual count to the history.
pub fn step(state: &mut MarketState, config: &RunConfig) -> Option<DealRecord> {
    let params = &config.params;
    let t = state.step;

    let dealt = deal_condition(state.bids(), params.spread).expect("state holds dealers");
    if !dealt {
        for i in 0..state.bids.len() {
            state.bids[i] += state.expectations[i];
        }
        state.step += 1;
        return None;
    }

    let outcome = resolve_deal(state.bids(), params.spread).expect("deal condition holds");
    let n = outcome.sellers.len();
    let (deltas, mu_n_used) = match params.policy {
        Policy::Baseline => (
            delta_baseline(&outcome, params.greed, params.n_dealers),
            n as f64,
        ),
        Policy::Premeditated => (
            delta_premeditated(
                &outcome,
                params.greed,
                params.eps_buyer,
                params.eps_seller,
                params.seller_term_mode,
                params.n_dealers,
            ),
            n as f64,
        ),
        Policy::Unpremeditated => {
            let mu =
                mu_of_history(state.seller_count_history(), params.mu_window).unwrap_or(n as f64);
            let d = delta_unpremeditated(&outcome, params.greed, mu, params.n_dealers)
                .expect("means of counts >= 1 stay >= 1");
            (d, mu)
        }
        Policy::Mingled => {
            let mu =
                mu_of_history(state.seller_count_history(), params.mu_window).unwrap_or(n as f64);
            let d = delta_mingled(
                &outcome,
                params.greed,
                params.eps_buyer,
                mu,
                params.n_dealers,
            )
            .expect("means of counts >= 1 stay >= 1");
            (d, mu)
        }
    };

    state.bids = apply_update(state.bids(), &deltas, state.expectations())
        .expect("vectors share one length");
    state.price = outcome.price;
    state.seller_count_history.push(n);
    state.deals_done += 1;
    state.last_deal_step = Some(t);
    state.step += 1;

    Some(DealRecord {
        deal_index: state.deals_done,
        step: t,
        price: outcome.price,
        buyer: outcome.buyer,
        n_sellers: n,
        mu_n_used,
        sum_bids: state.sum_bids(),
    })
}

/// Run a full simulation from a config. The caller is expected to have
/// validated the config; see [`RunConfig::validate`].
pub fn run(config: &RunConfig) -> TickSeries {
    let p = &config.params;
    let (bids, expectations) =
        init_dealers(p.seed, p.n_dealers, p.spread, p.expectation_half_width);
    let mut state = MarketState::new(bids, expectations).expect("centered by construction");
    let initial_sum_bids = state.sum_bids();

    let mut records = Vec::new();
    let mut step_trace = Vec::new();
    for _ in 0..config.max_steps {
        if let Some(target) = config.target_deals {
            if state.deals_done() >= target {
                break;
            }
        }
        if let Some(record) = step(&mut state, config) {
            records.push(record);
        }
        if config.record_every_step {
            step_trace.push(StepPoint {
                step: state.step() - 1,
                price: state.price(),
                sum_bids: state.sum_bids(),
            });
        }
    }

    let no_deal_warning = records.is_empty() && config.target_deals != Some(0);
    TickSeries {
        records,
        step_trace,
        config_echo: config.clone(),
        rng_algorithm: RNG_ALGORITHM,
        initial_sum_bids,
        final_state_digest: bid_digest(state.bids()),
        no_deal_warning,
    }
}

/// FNV-1a (64-bit) over the little-endian IEEE-754 bytes of the bids.
/// Hand-rolled so the digest never shifts under a std or crate upgrade.
pub fn bid_digest(bids: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bids {
        for byte in b.to_bits().to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
