//! Static model parameters and their validation.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Seed used by the preset catalog when the caller supplies none.
pub const DEFAULT_SEED: u64 = 12345;

/// Which post-deal price-adjustment rule the run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Buyer drops by the full greed, sellers split it exactly; the bid sum
    /// is conserved and no trend forms.
    Baseline,
    /// Buyer and sellers carry small directional perturbations (eps_buyer,
    /// eps_seller); the bid sum drifts by a fixed amount per deal.
    Premeditated,
    /// Sellers divide the greed by the average seller count of past deals
    /// instead of the actual count; the imbalance wanders without intent.
    Unpremeditated,
    /// Both effects at once: perturbed buyer, averaged seller share.
    Mingled,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Policy::Baseline => "baseline",
            Policy::Premeditated => "premeditated",
            Policy::Unpremeditated => "unpremeditated",
            Policy::Mingled => "mingled",
        };
        f.write_str(s)
    }
}

impl FromStr for Policy {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, ParamError> {
        match s {
            "baseline" => Ok(Policy::Baseline),
            "premeditated" => Ok(Policy::Premeditated),
            "unpremeditated" => Ok(Policy::Unpremeditated),
            "mingled" => Ok(Policy::Mingled),
            other => Err(ParamError::Invalid {
                field: "policy",
                reason: format!(
                    "unknown policy `{other}` (expected baseline|premeditated|unpremeditated|mingled)"
                ),
            }),
        }
    }
}

/// How the premeditated rule computes the sellers' share.
///
/// `CompensationConsistent` gives each seller `greed * (1 + eps_seller) / n`,
/// so at zero eps the sellers exactly compensate the buyer and the per-deal
/// bid-sum drift is `greed * (eps_seller - eps_buyer)`. `EpsilonOnly` gives
/// each seller `greed * eps_seller / n`, the bare perturbation with no base
/// share; at zero eps the sellers receive nothing and the bid sum falls by
/// roughly the full greed every deal. The first is the default; the second is
/// kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SellerTermMode {
    CompensationConsistent,
    EpsilonOnly,
}

impl fmt::Display for SellerTermMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SellerTermMode::CompensationConsistent => "compensation-consistent",
            SellerTermMode::EpsilonOnly => "epsilon-only",
        };
        f.write_str(s)
    }
}

impl FromStr for SellerTermMode {
    type Err = ParamError;

    fn from_str(s: &str) -> Result<Self, ParamError> {
        match s {
            "compensation-consistent" => Ok(SellerTermMode::CompensationConsistent),
            "epsilon-only" => Ok(SellerTermMode::EpsilonOnly),
            other => Err(ParamError::Invalid {
                field: "seller_term_mode",
                reason: format!(
                    "unknown mode `{other}` (expected compensation-consistent|epsilon-only)"
                ),
            }),
        }
    }
}

/// All static constants of one simulated market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of dealers (N).
    pub n_dealers: usize,
    /// Fixed gap between every dealer's selling and buying price (L).
    pub spread: f64,
    /// Post-deal adjustment magnitude (delta); must satisfy 0 < delta < L.
    pub greed: f64,
    /// Half-width of the uniform interval the per-step expectations are
    /// drawn from (alpha).
    pub expectation_half_width: f64,
    /// Buyer perturbation for the premeditated and mingled policies.
    pub eps_buyer: f64,
    /// Seller perturbation for the premeditated policy.
    pub eps_seller: f64,
    pub policy: Policy,
    /// Number of past deals averaged for the seller-count mean; `None`
    /// averages the full history.
    pub mu_window: Option<usize>,
    pub seller_term_mode: SellerTermMode,
    pub seed: u64,
}

impl Default for ModelParams {
    /// Reference parameterization: 100 dealers, unit spread, greed 0.4,
    /// expectation half-width 0.01, baseline policy.
    fn default() -> Self {
        Self {
            n_dealers: 100,
            spread: 1.0,
            greed: 0.4,
            expectation_half_width: 0.01,
            eps_buyer: 0.0,
            eps_seller: 0.0,
            policy: Policy::Baseline,
            mu_window: None,
            seller_term_mode: SellerTermMode::CompensationConsistent,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("{field}: {reason}")]
    Invalid { field: &'static str, reason: String },
}

impl ModelParams {
    /// Check every static invariant. Run configs must pass this before any
    /// simulation starts.
    pub fn validate(&self) -> Result<(), ParamError> {
        fn fail(field: &'static str, reason: String) -> Result<(), ParamError> {
            Err(ParamError::Invalid { field, reason })
        }

        if self.n_dealers < 2 {
            return fail(
                "n_dealers",
                format!("need at least 2 dealers, got {}", self.n_dealers),
            );
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return fail(
                "spread",
                format!("must be a positive real, got {}", self.spread),
            );
        }
        if !(self.greed.is_finite() && self.greed > 0.0 && self.greed < self.spread) {
            return fail(
                "greed",
                format!(
                    "must satisfy 0 < greed < spread ({}), got {}",
                    self.spread, self.greed
                ),
            );
        }
        if !(self.expectation_half_width.is_finite() && self.expectation_half_width > 0.0) {
            return fail(
                "expectation_half_width",
                format!(
                    "must be a positive real, got {}",
                    self.expectation_half_width
                ),
            );
        }
        if !self.eps_buyer.is_finite() || !self.eps_seller.is_finite() {
            return fail(
                "eps_buyer",
                format!(
                    "eps values must be finite, got ({}, {})",
                    self.eps_buyer, self.eps_seller
                ),
            );
        }
        if let Some(w) = self.mu_window {
            if w == 0 {
                return fail("mu_window", "window must be at least 1 deal".to_string());
            }
        }
        match self.policy {
            Policy::Premeditated => {
                // Upward intent: eps_buyer in [-1, 0], eps_seller >= 0.
                // Downward intent: eps_buyer in [0, 1], eps_seller <= 0.
                // Together: |eps_buyer| <= 1 and the two eps never share a
                // strict sign.
                if self.eps_buyer.abs() > 1.0 {
                    return fail(
                        "eps_buyer",
                        format!(
                            "premeditated policy needs |eps_buyer| <= 1, got {}",
                            self.eps_buyer
                        ),
                    );
                }
                if self.eps_buyer * self.eps_seller > 0.0 {
                    return fail(
                        "eps_seller",
                        format!(
                            "premeditated eps values must pull in one direction: \
                             eps_buyer = {} and eps_seller = {} share a sign",
                            self.eps_buyer, self.eps_seller
                        ),
                    );
                }
            }
            Policy::Mingled => {
                if self.eps_buyer.abs() > 1.0 {
                    return fail(
                        "eps_buyer",
                        format!(
                            "mingled policy needs |eps_buyer| <= 1, got {}",
                            self.eps_buyer
                        ),
                    );
                }
            }
            Policy::Baseline | Policy::Unpremeditated => {}
        }
        Ok(())
    }

    /// Per-deal drift of the bid sum implied by the policy, where it is a
    /// fixed constant. The unpremeditated and mingled policies have a
    /// path-dependent imbalance, so this returns 0 and the realized drift is
    /// read off the conservation residual instead.
    pub fn predicted_drift_per_deal(&self) -> f64 {
        match self.policy {
            Policy::Baseline => 0.0,
            Policy::Premeditated => match self.seller_term_mode {
                SellerTermMode::CompensationConsistent => {
                    self.greed * (self.eps_seller - self.eps_buyer)
                }
                // Buyer loses greed*(1+eps_b), sellers collectively gain
                // greed*eps_s: the base share is missing entirely.
                SellerTermMode::EpsilonOnly => {
                    self.greed * (self.eps_seller - self.eps_buyer - 1.0)
                }
            },
            Policy::Unpremeditated | Policy::Mingled => 0.0,
        }
    }
}
