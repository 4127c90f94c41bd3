//! Text rendering of trend reports.

use dealer_model::analysis::TrendReport;
use std::fmt::Write as _;

fn push_row(out: &mut String, label: &str, value: String) {
    let _ = writeln!(out, "  {label:<22} {value}");
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "n/a (degenerate)".to_string()
    } else if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:.6e}")
    } else {
        format!("{v:.6}")
    }
}

/// Full report for an internal tick CSV.
pub fn format_internal(source: &str, skipped: usize, drift: f64, rep: &TrendReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trend report: {source}");
    push_row(&mut out, "n_deals", rep.n_deals.to_string());
    if skipped > 0 {
        push_row(&mut out, "skipped_rows", skipped.to_string());
    }
    push_row(&mut out, "ols_slope", num(rep.ols_slope));
    push_row(&mut out, "ols_intercept", num(rep.ols_intercept));
    push_row(&mut out, "r_squared", num(rep.r_squared));
    push_row(&mut out, "detrended_range", num(rep.detrended_range));
    push_row(&mut out, "price_std", num(rep.price_std));
    push_row(
        &mut out,
        "seller_count_min",
        format!("{:.0}", rep.seller_count_min),
    );
    push_row(
        &mut out,
        "seller_count_max",
        format!("{:.0}", rep.seller_count_max),
    );
    push_row(&mut out, "seller_count_mean", num(rep.seller_count_mean));
    push_row(&mut out, "mu_convergence", num(rep.mu_convergence));
    push_row(&mut out, "predicted_drift", num(drift));
    push_row(
        &mut out,
        "conservation_residual",
        num(rep.conservation_residual),
    );
    if rep.degenerate {
        push_row(
            &mut out,
            "degenerate",
            "true (too few deals for a line fit)".to_string(),
        );
    }
    out
}

/// Metrics of an external two-column series. There are no bid sums and no
/// seller counts, so the audit fields of the report read n/a.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExternalStats {
    pub n_points: usize,
    #[serde(skip)]
    pub skipped_rows: usize,
    pub non_monotonic_dropped: usize,
    pub ols_slope: f64,
    pub ols_intercept: f64,
    pub r_squared: f64,
    pub detrended_range: f64,
    pub price_std: f64,
}

pub fn format_external(source: &str, s: &ExternalStats) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trend report: {source} (external series)");
    push_row(&mut out, "n_points", s.n_points.to_string());
    if s.skipped_rows > 0 {
        push_row(&mut out, "skipped_rows", s.skipped_rows.to_string());
    }
    if s.non_monotonic_dropped > 0 {
        push_row(
            &mut out,
            "non_monotonic_dropped",
            s.non_monotonic_dropped.to_string(),
        );
    }
    push_row(&mut out, "ols_slope", num(s.ols_slope));
    push_row(&mut out, "ols_intercept", num(s.ols_intercept));
    push_row(&mut out, "r_squared", num(s.r_squared));
    push_row(&mut out, "detrended_range", num(s.detrended_range));
    push_row(&mut out, "price_std", num(s.price_std));
    push_row(&mut out, "seller_count_min", "n/a".to_string());
    push_row(&mut out, "seller_count_max", "n/a".to_string());
    push_row(&mut out, "seller_count_mean", "n/a".to_string());
    push_row(&mut out, "mu_convergence", "n/a".to_string());
    push_row(&mut out, "conservation_residual", "n/a".to_string());
    out
}
