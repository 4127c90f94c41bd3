//! Deal resolution and the post-deal price-adjustment rules.
//!
//! Everything in this module is a pure function of its arguments: no I/O, no
//! randomness, no hidden state. The time loop lives in [`crate::engine`].
//!
//! A market is N dealers, each holding a buying price ("bid") and an implied
//! selling price exactly `spread` above it. A deal fires when the highest bid
//! reaches the lowest bid plus the spread; the top bidder buys from every
//! dealer at least one spread below, at the top bid. Afterwards the buyer
//! lowers its bid by the greed constant and the sellers raise theirs by a
//! share of it — the exact share is what distinguishes the four policies.

use crate::params::SellerTermMode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("bid vector is empty")]
    EmptyBids,
    #[error("no deal possible: max - min bid = {gap} is below the spread {spread}")]
    NoDeal { gap: f64, spread: f64 },
    #[error("mean seller count must be >= 1, got {0}")]
    MeanSellersBelowOne(f64),
    #[error("vector lengths differ: bids {bids}, deltas {deltas}, expectations {expectations}")]
    LengthMismatch {
        bids: usize,
        deltas: usize,
        expectations: usize,
    },
    #[error("expectations must sum to zero: got {sum} for {n} dealers (tolerance {tol})")]
    ExpectationsNotCentered { sum: f64, n: usize, tol: f64 },
}

/// One resolved deal: the buyer, every dealer that sold to it, and the
/// transaction price (the buyer's bid).
#[derive(Debug, Clone, PartialEq)]
pub struct DealOutcome {
    pub buyer: usize,
    /// Ascending dealer indices; never empty and never contains `buyer`.
    pub sellers: Vec<usize>,
    pub price: f64,
}

/// True when a deal can fire: highest bid minus lowest bid reaches the
/// spread (boundary equality counts).
pub fn deal_condition(bids: &[f64], spread: f64) -> Result<bool, MarketError> {
    let (min, max) = min_max(bids)?;
    Ok(max - min >= spread)
}

/// Resolve the deal implied by the current bids.
///
/// The buyer is the highest bidder, ties broken toward the lowest index so
/// replays are deterministic. The sellers are every other dealer at least one
/// spread below the buyer; the lowest bidder always qualifies, so the seller
/// set is never empty.
pub fn resolve_deal(bids: &[f64], spread: f64) -> Result<DealOutcome, MarketError> {
    let (min, max) = min_max(bids)?;
    if max - min < spread {
        return Err(MarketError::NoDeal {
            gap: max - min,
            spread,
        });
    }
    let mut buyer = 0;
    for (i, &b) in bids.iter().enumerate() {
        if b > bids[buyer] {
            buyer = i;
        }
    }
    let price = bids[buyer];
    let sellers: Vec<usize> = (0..bids.len())
        .filter(|&j| j != buyer && price - bids[j] >= spread)
        .collect();
    debug_assert!(!sellers.is_empty());
    Ok(DealOutcome {
        buyer,
        sellers,
        price,
    })
}

/// Baseline adjustments: buyer falls by `greed`, each of the n sellers rises
/// by `greed / n`, everyone else holds. The adjustments sum to zero up to one
/// rounding of the division, which is what pins the bid sum over a run.
pub fn delta_baseline(outcome: &DealOutcome, greed: f64, n_dealers: usize) -> Vec<f64> {
    let mut deltas = vec![0.0; n_dealers];
    let share = greed / outcome.sellers.len() as f64;
    for &s in &outcome.sellers {
        deltas[s] = share;
    }
    deltas[outcome.buyer] = -greed;
    deltas
}

/// Premeditated adjustments: the buyer falls by `greed * (1 + eps_buyer)`
/// and each seller rises by the mode-dependent share (see
/// [`SellerTermMode`]). With both eps at zero, `CompensationConsistent`
/// reduces exactly to [`delta_baseline`].
pub fn delta_premeditated(
    outcome: &DealOutcome,
    greed: f64,
    eps_buyer: f64,
    eps_seller: f64,
    mode: SellerTermMode,
    n_dealers: usize,
) -> Vec<f64> {
    let n = outcome.sellers.len() as f64;
    let share = match mode {
        SellerTermMode::CompensationConsistent => greed * (1.0 + eps_seller) / n,
        SellerTermMode::EpsilonOnly => greed * eps_seller / n,
    };
    let mut deltas = vec![0.0; n_dealers];
    for &s in &outcome.sellers {
        deltas[s] = share;
    }
    deltas[outcome.buyer] = -greed * (1.0 + eps_buyer);
    deltas
}

/// Unpremeditated adjustments: sellers divide the greed by `mu_n`, the mean
/// seller count of past deals, instead of the actual count. The sum over all
/// dealers is `greed * (n / mu_n - 1)`: positive when fewer sellers showed up
/// than average, negative when more did.
pub fn delta_unpremeditated(
    outcome: &DealOutcome,
    greed: f64,
    mu_n: f64,
    n_dealers: usize,
) -> Result<Vec<f64>, MarketError> {
    if mu_n.is_nan() || mu_n < 1.0 {
        return Err(MarketError::MeanSellersBelowOne(mu_n));
    }
    let mut deltas = vec![0.0; n_dealers];
    let share = greed / mu_n;
    for &s in &outcome.sellers {
        deltas[s] = share;
    }
    deltas[outcome.buyer] = -greed;
    Ok(deltas)
}

/// Mingled adjustments: perturbed buyer as in [`delta_premeditated`],
/// averaged seller share as in [`delta_unpremeditated`]. At `eps_buyer = 0`
/// this is exactly the unpremeditated rule.
pub fn delta_mingled(
    outcome: &DealOutcome,
    greed: f64,
    eps_buyer: f64,
    mu_n: f64,
    n_dealers: usize,
) -> Result<Vec<f64>, MarketError> {
    if mu_n.is_nan() || mu_n < 1.0 {
        return Err(MarketError::MeanSellersBelowOne(mu_n));
    }
    let mut deltas = vec![0.0; n_dealers];
    let share = greed / mu_n;
    for &s in &outcome.sellers {
        deltas[s] = share;
    }
    deltas[outcome.buyer] = -greed * (1.0 + eps_buyer);
    Ok(deltas)
}

/// One bid update: `bids[i] + deltas[i] + expectations[i]`, element-wise in
/// that order. On a step with no deal the caller passes a zero delta vector
/// and only the expectations move the bids.
pub fn apply_update(
    bids: &[f64],
    deltas: &[f64],
    expectations: &[f64],
) -> Result<Vec<f64>, MarketError> {
    if bids.len() != deltas.len() || bids.len() != expectations.len() {
        return Err(MarketError::LengthMismatch {
            bids: bids.len(),
            deltas: deltas.len(),
            expectations: expectations.len(),
        });
    }
    Ok(bids
        .iter()
        .zip(deltas)
        .zip(expectations)
        .map(|((b, d), a)| (b + d) + a)
        .collect())
}

/// Full market state recurrence: current bids, the fixed expectation vector,
/// the last transaction price, and the per-deal bookkeeping the averaged
/// policies need.
///
/// The expectation vector is fixed at construction and never changes; sell
/// prices are never stored because they are always `bid + spread`.
#[derive(Debug, Clone)]
pub struct MarketState {
    pub(crate) bids: Vec<f64>,
    pub(crate) expectations: Vec<f64>,
    pub(crate) price: f64,
    pub(crate) last_deal_step: Option<u64>,
    pub(crate) seller_count_history: Vec<usize>,
    pub(crate) step: u64,
    pub(crate) deals_done: u64,
}

/// Absolute tolerance on the expectation sum, per dealer.
pub const EXPECTATION_SUM_TOL_PER_DEALER: f64 = 1e-12;

impl MarketState {
    /// Build the initial state. Fails if the expectation vector is not
    /// centered: a nonzero mean would push every bid the same way each step
    /// and manufacture a trend out of nothing.
    ///
    /// The price starts at the current maximum bid so the series has a
    /// defined origin before the first deal.
    pub fn new(bids: Vec<f64>, expectations: Vec<f64>) -> Result<Self, MarketError> {
        if bids.is_empty() {
            return Err(MarketError::EmptyBids);
        }
        if bids.len() != expectations.len() {
            return Err(MarketError::LengthMismatch {
                bids: bids.len(),
                deltas: bids.len(),
                expectations: expectations.len(),
            });
        }
        let n = expectations.len();
        let sum: f64 = expectations.iter().sum();
        let tol = EXPECTATION_SUM_TOL_PER_DEALER * n as f64;
        if sum.abs() > tol {
            return Err(MarketError::ExpectationsNotCentered { sum, n, tol });
        }
        let price = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            bids,
            expectations,
            price,
            last_deal_step: None,
            seller_count_history: Vec::new(),
            step: 0,
            deals_done: 0,
        })
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn expectations(&self) -> &[f64] {
        &self.expectations
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn last_deal_step(&self) -> Option<u64> {
        self.last_deal_step
    }

    pub fn seller_count_history(&self) -> &[usize] {
        &self.seller_count_history
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn deals_done(&self) -> u64 {
        self.deals_done
    }

    /// Bid sum accumulated in ascending dealer index, so replays reproduce
    /// the exact same floating-point value.
    pub fn sum_bids(&self) -> f64 {
        self.bids.iter().sum()
    }
}

fn min_max(bids: &[f64]) -> Result<(f64, f64), MarketError> {
    if bids.is_empty() {
        return Err(MarketError::EmptyBids);
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &b in bids {
        if b < min {
            min = b;
        }
        if b > max {
            max = b;
        }
    }
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sum(v: &[f64]) -> f64 {
        v.iter().sum()
    }

    // -- deal_condition ------------------------------------------------

    #[test]
    fn deal_condition_fires_when_gap_reaches_spread() {
        assert!(deal_condition(&[0.5, -0.6, 0.2], 1.0).unwrap());
    }

    #[test]
    fn deal_condition_false_on_identical_bids() {
        assert!(!deal_condition(&[0.3, 0.3, 0.3], 1.0).unwrap());
    }

    #[test]
    fn deal_condition_boundary_equality_counts() {
        assert!(deal_condition(&[0.0, -1.0], 1.0).unwrap());
    }

    #[test]
    fn deal_condition_rejects_empty_bids() {
        assert!(matches!(
            deal_condition(&[], 1.0),
            Err(MarketError::EmptyBids)
        ));
    }

    // -- resolve_deal --------------------------------------------------

    #[test]
    fn resolve_single_seller() {
        let d = resolve_deal(&[0.5, -0.6, 0.2], 1.0).unwrap();
        assert_eq!(d.buyer, 0);
        assert_eq!(d.sellers, vec![1]);
        assert_eq!(d.price, 0.5);
    }

    #[test]
    fn resolve_two_sellers() {
        let d = resolve_deal(&[0.5, -0.6, -0.7], 1.0).unwrap();
        assert_eq!(d.buyer, 0);
        assert_eq!(d.sellers, vec![1, 2]);
        assert_eq!(d.price, 0.5);
    }

    #[test]
    fn resolve_ties_break_to_lowest_index() {
        // Independent check: sorting (bid desc, index asc) must give the
        // same buyer the argmax scan picks.
        let bids = [0.5, 0.5, -0.6];
        let mut order: Vec<usize> = (0..bids.len()).collect();
        order.sort_by(|&a, &b| bids[b].partial_cmp(&bids[a]).unwrap().then(a.cmp(&b)));
        assert_eq!(order[0], 0);

        let d = resolve_deal(&bids, 1.0).unwrap();
        assert_eq!(d.buyer, 0);
        assert_eq!(d.sellers, vec![2]);
        assert_eq!(d.price, 0.5);
    }

    #[test]
    fn resolve_fails_without_deal_condition() {
        assert!(matches!(
            resolve_deal(&[0.1, 0.2], 1.0),
            Err(MarketError::NoDeal { .. })
        ));
    }

    // -- delta rules ----------------------------------------------------

    fn outcome(buyer: usize, sellers: Vec<usize>, price: f64) -> DealOutcome {
        DealOutcome {
            buyer,
            sellers,
            price,
        }
    }

    #[test]
    fn baseline_two_sellers() {
        let d = delta_baseline(&outcome(0, vec![1, 2], 0.5), 0.4, 4);
        assert_eq!(d[0], -0.4);
        assert_eq!(d[1], 0.2);
        assert_eq!(d[2], 0.2);
        assert_eq!(d[3], 0.0);
    }

    #[test]
    fn baseline_one_seller_is_symmetric() {
        let d = delta_baseline(&outcome(1, vec![0], 0.5), 0.4, 2);
        assert_eq!(d[1], -0.4);
        assert_eq!(d[0], 0.4);
        assert_eq!(sum(&d), 0.0);
    }

    #[test]
    fn baseline_four_sellers_sums_to_zero() {
        let d = delta_baseline(&outcome(0, vec![1, 2, 3, 4], 0.5), 0.4, 6);
        assert_eq!(d[1], 0.1);
        assert!(sum(&d).abs() <= 4.0 * f64::EPSILON * 0.4);
    }

    #[test]
    fn premeditated_fig_up_values() {
        // greed 0.4, eps_buyer -0.002: buyer loses 0.4 * 0.998 = 0.3992 and
        // the two sellers each gain 0.2; net drift per deal is +0.0008.
        let d = delta_premeditated(
            &outcome(0, vec![1, 2], 0.5),
            0.4,
            -0.002,
            0.0,
            SellerTermMode::CompensationConsistent,
            3,
        );
        assert!((d[0] - (-0.3992)).abs() < 1e-15);
        assert_eq!(d[1], 0.2);
        assert_eq!(d[2], 0.2);
        assert!((sum(&d) - 0.0008).abs() < 1e-15);
    }

    #[test]
    fn premeditated_zero_eps_equals_baseline() {
        let o = outcome(2, vec![0, 3], 0.9);
        let a = delta_premeditated(&o, 0.4, 0.0, 0.0, SellerTermMode::CompensationConsistent, 5);
        let b = delta_baseline(&o, 0.4, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn premeditated_epsilon_only_sellers_get_bare_share() {
        let d = delta_premeditated(
            &outcome(0, vec![1, 2], 0.5),
            0.4,
            -0.002,
            0.0,
            SellerTermMode::EpsilonOnly,
            3,
        );
        assert!((d[0] - (-0.3992)).abs() < 1e-15);
        assert_eq!(d[1], 0.0);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn unpremeditated_share_uses_mean_count() {
        let d = delta_unpremeditated(&outcome(0, vec![1, 2], 0.5), 0.4, 3.0, 4).unwrap();
        assert_eq!(d[0], -0.4);
        assert!((d[1] - 0.4 / 3.0).abs() < 1e-15);
        assert!((sum(&d) - 0.4 * (2.0 / 3.0 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn unpremeditated_matching_mean_restores_balance() {
        let o = outcome(0, vec![1, 2], 0.5);
        let d = delta_unpremeditated(&o, 0.4, 2.0, 4).unwrap();
        assert_eq!(d, delta_baseline(&o, 0.4, 4));
        assert!(sum(&d).abs() <= 4.0 * f64::EPSILON * 0.4);
    }

    #[test]
    fn unpremeditated_overcompensates_at_mean_one() {
        let d = delta_unpremeditated(&outcome(0, vec![1, 2, 3], 0.5), 0.4, 1.0, 4).unwrap();
        assert_eq!(d[1], 0.4);
        assert!((sum(&d) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn unpremeditated_rejects_mean_below_one() {
        assert!(delta_unpremeditated(&outcome(0, vec![1], 0.5), 0.4, 0.5, 2).is_err());
        assert!(delta_unpremeditated(&outcome(0, vec![1], 0.5), 0.4, f64::NAN, 2).is_err());
    }

    #[test]
    fn mingled_hand_values() {
        // Strong upward lean: greed 0.4, eps_buyer -0.031, mean 2, two
        // sellers. Buyer loses 0.4 * 0.969 = 0.3876.
        let d = delta_mingled(&outcome(0, vec![1, 2], 0.5), 0.4, -0.031, 2.0, 3).unwrap();
        assert!((d[0] - (-0.3876)).abs() < 1e-15);
        assert_eq!(d[1], 0.2);
        assert_eq!(d[2], 0.2);
    }

    #[test]
    fn mingled_hand_values_positive_eps() {
        // Hand evaluation: -0.4 * 1.002 = -0.4008, one seller gets 0.4/4 = 0.1.
        let d = delta_mingled(&outcome(0, vec![1], 0.5), 0.4, 0.002, 4.0, 2).unwrap();
        assert!((d[0] - (-0.4008)).abs() < 1e-15);
        assert_eq!(d[1], 0.1);
    }

    #[test]
    fn mingled_zero_eps_equals_unpremeditated() {
        let o = outcome(1, vec![0, 2, 3], 0.5);
        let a = delta_mingled(&o, 0.4, 0.0, 2.5, 5).unwrap();
        let b = delta_unpremeditated(&o, 0.4, 2.5, 5).unwrap();
        assert_eq!(a, b);
    }

    // -- apply_update ----------------------------------------------------

    #[test]
    fn apply_update_no_deal_step() {
        let next = apply_update(&[0.1], &[0.0], &[0.005]).unwrap();
        assert!((next[0] - 0.105).abs() < 1e-15);
    }

    #[test]
    fn apply_update_zero_expectations() {
        let next = apply_update(&[0.5, -0.6], &[-0.4, 0.4], &[0.0, 0.0]).unwrap();
        assert!((next[0] - 0.1).abs() < 1e-15);
        assert!((next[1] - (-0.2)).abs() < 1e-15);
    }

    #[test]
    fn apply_update_elementwise_sum() {
        let next = apply_update(&[0.5, -0.6], &[-0.4, 0.4], &[0.004, -0.004]).unwrap();
        // Oracle: plain per-element additions done longhand.
        assert_eq!(next[0], 0.5 + -0.4 + 0.004);
        assert_eq!(next[1], -0.6 + 0.4 + -0.004);
        assert!((next[0] - 0.104).abs() < 1e-15);
        assert!((next[1] - (-0.204)).abs() < 1e-15);
    }

    #[test]
    fn apply_update_rejects_length_mismatch() {
        assert!(apply_update(&[0.1, 0.2], &[0.0], &[0.0, 0.0]).is_err());
        assert!(apply_update(&[0.1], &[0.0], &[0.0, 0.0]).is_err());
    }

    // -- MarketState ------------------------------------------------------

    #[test]
    fn state_rejects_uncentered_expectations() {
        let r = MarketState::new(vec![0.0, 0.1], vec![0.01, 0.02]);
        assert!(matches!(
            r,
            Err(MarketError::ExpectationsNotCentered { .. })
        ));
    }

    #[test]
    fn state_price_starts_at_max_bid() {
        let s = MarketState::new(vec![0.3, -0.2, 0.7], vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.price(), 0.7);
        assert_eq!(s.deals_done(), 0);
        assert_eq!(s.last_deal_step(), None);
    }

    // -- property tests ----------------------------------------------------

    /// Bid vectors that always satisfy the deal condition: random values
    /// plus forced high and low anchors at least one spread apart.
    fn dealable_bids() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-0.999f64..0.999, 2..40).prop_map(|mut v| {
            v.push(0.6);
            v.push(-1.5);
            v
        })
    }

    proptest! {
        #[test]
        fn resolved_deal_invariants(bids in dealable_bids()) {
            let d = resolve_deal(&bids, 1.0).unwrap();
            let max = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(bids[d.buyer], max);
            prop_assert!(!d.sellers.is_empty());
            prop_assert!(!d.sellers.contains(&d.buyer));
            for &s in &d.sellers {
                prop_assert!(bids[d.buyer] - bids[s] >= 1.0);
            }
            prop_assert_eq!(d.price, max);
        }

        #[test]
        fn baseline_sums_to_zero(
            greed in 0.01f64..0.99,
            n_sellers in 1usize..30,
        ) {
            let sellers: Vec<usize> = (1..=n_sellers).collect();
            let d = delta_baseline(&outcome(0, sellers, 0.5), greed, n_sellers + 2);
            prop_assert!(sum(&d).abs() <= 4.0 * f64::EPSILON * greed);
        }

        #[test]
        fn premeditated_compensation_identity(
            greed in 0.01f64..0.99,
            eps_b in -0.1f64..0.0,
            eps_s in 0.0f64..0.1,
            n_sellers in 1usize..30,
        ) {
            let sellers: Vec<usize> = (1..=n_sellers).collect();
            let d = delta_premeditated(
                &outcome(0, sellers, 0.5),
                greed,
                eps_b,
                eps_s,
                SellerTermMode::CompensationConsistent,
                n_sellers + 2,
            );
            let expected = greed * (eps_s - eps_b);
            prop_assert!((sum(&d) - expected).abs() <= 4.0 * f64::EPSILON * greed);
        }

        #[test]
        fn unpremeditated_imbalance_identity(
            greed in 0.01f64..0.99,
            mu in 1.0f64..20.0,
            n_sellers in 1usize..30,
        ) {
            let sellers: Vec<usize> = (1..=n_sellers).collect();
            let d = delta_unpremeditated(&outcome(0, sellers, 0.5), greed, mu, n_sellers + 2)
                .unwrap();
            let expected = greed * (n_sellers as f64 / mu - 1.0);
            // The n-term share sum carries n rounding steps; scale the
            // allowance with the seller count.
            let tol = (4.0 + n_sellers as f64) * f64::EPSILON * greed * (1.0 + n_sellers as f64 / mu);
            prop_assert!((sum(&d) - expected).abs() <= tol);
        }

        #[test]
        fn premeditated_zero_eps_is_baseline_exactly(
            greed in 0.01f64..0.99,
            n_sellers in 1usize..30,
        ) {
            let sellers: Vec<usize> = (1..=n_sellers).collect();
            let o = outcome(0, sellers, 0.5);
            let a = delta_premeditated(&o, greed, 0.0, 0.0,
                SellerTermMode::CompensationConsistent, n_sellers + 2);
            let b = delta_baseline(&o, greed, n_sellers + 2);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn unpremeditated_matching_mean_is_baseline_exactly(
            greed in 0.01f64..0.99,
            n_sellers in 1usize..30,
        ) {
            let sellers: Vec<usize> = (1..=n_sellers).collect();
            let o = outcome(0, sellers, 0.5);
            let a = delta_unpremeditated(&o, greed, n_sellers as f64, n_sellers + 2).unwrap();
            let b = delta_baseline(&o, greed, n_sellers + 2);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn apply_update_is_linear_to_rounding(
            bids in proptest::collection::vec(-2.0f64..2.0, 1..50),
        ) {
            let n = bids.len();
            let deltas: Vec<f64> = (0..n).map(|i| 0.01 * i as f64 - 0.2).collect();
            let expectations: Vec<f64> = (0..n).map(|i| 1e-3 * (i as f64 - n as f64 / 2.0)).collect();

            let two_pass = apply_update(
                &apply_update(&bids, &deltas, &vec![0.0; n]).unwrap(),
                &vec![0.0; n],
                &expectations,
            ).unwrap();
            let combined: Vec<f64> = deltas.iter().zip(&expectations).map(|(d, a)| d + a).collect();
            let one_pass = apply_update(&bids, &combined, &vec![0.0; n]).unwrap();

            for (i, (x, y)) in two_pass.iter().zip(&one_pass).enumerate() {
                // Each route rounds twice, so the routes agree to one ulp at
                // operand scale (they can differ wildly relative to a
                // cancelled result, which is why the scale matters).
                let scale = bids[i].abs() + deltas[i].abs() + expectations[i].abs();
                prop_assert!((x - y).abs() <= 2.0 * f64::EPSILON * scale, "x = {x}, y = {y}");
            }
        }
    }
}
