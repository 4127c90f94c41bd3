//! Trend metrics, conservation audits, and tick-file loading.
//!
//! Whether a price series "has a trend" is a matter of observation scale, so
//! nothing here classifies. The report carries the raw ingredients — least
//! squares slope, the range left after removing that line, seller-count
//! statistics, and the conservation residual — and leaves the judgement to
//! the caller.

use crate::engine::DealRecord;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("index column has zero variance; a line cannot be fitted")]
    ZeroIndexVariance,
    #[error("series is empty")]
    EmptySeries,
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} contains no data rows")]
    EmptyFile { path: String },
    #[error("{path}: {}", bad_rows_summary(.bad, *.total))]
    BadRows {
        path: String,
        bad: Vec<(usize, String)>,
        total: usize,
    },
}

fn bad_rows_summary(bad: &[(usize, String)], total: usize) -> String {
    let mut s = format!("{} of {} data rows are not numeric:", bad.len(), total);
    for (line, content) in bad.iter().take(8) {
        let _ = write!(s, " line {line}: `{content}`;");
    }
    if bad.len() > 8 {
        let _ = write!(s, " ... ({} more)", bad.len() - 8);
    }
    s
}

/// Quantitative reading of one tick series.
#[derive(Debug, Clone, Serialize)]
pub struct TrendReport {
    pub n_deals: usize,
    /// Least-squares slope of price against deal index, price units per deal.
    pub ols_slope: f64,
    pub ols_intercept: f64,
    /// Fraction of price variance the line explains; 0 by convention for a
    /// flat series.
    pub r_squared: f64,
    /// Max minus min of the residuals after removing the fitted line.
    pub detrended_range: f64,
    /// Population standard deviation of the prices.
    pub price_std: f64,
    pub seller_count_min: f64,
    pub seller_count_max: f64,
    pub seller_count_mean: f64,
    /// Spread of the running seller-count mean over the last 90% of deals,
    /// relative to its final value. Small values mean the mean settled early.
    pub mu_convergence: f64,
    /// Max deviation of the recorded bid sums from the drift law
    /// `sum(k) = sum(1) + (k-1) * predicted_drift_per_deal`.
    pub conservation_residual: f64,
    /// Set when the series is too short for the line fit; the fit fields are
    /// NaN in that case.
    pub degenerate: bool,
}

/// Least-squares line through `(index, price)` pairs. Returns
/// `(slope, intercept, r_squared)`.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<(f64, f64, f64), AnalysisError> {
    if points.len() < 2 {
        return Err(AnalysisError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(AnalysisError::ZeroIndexVariance);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 {
        0.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok((slope, intercept, r_squared))
}

/// Build the full report for a recorded series.
///
/// `predicted_drift_per_deal` anchors the conservation audit: 0 for the
/// conserving baseline, the fixed per-deal drift for the premeditated
/// policy, and 0 for the averaged policies — their residual is then read as
/// the realized imbalance rather than an error.
pub fn trend_report(
    records: &[DealRecord],
    predicted_drift_per_deal: f64,
) -> Result<TrendReport, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptySeries);
    }
    let k = records.len();

    let mut seller_min = f64::INFINITY;
    let mut seller_max = f64::NEG_INFINITY;
    let mut seller_sum = 0.0;
    for r in records {
        let n = r.n_sellers as f64;
        seller_min = seller_min.min(n);
        seller_max = seller_max.max(n);
        seller_sum += n;
    }
    let seller_count_mean = seller_sum / k as f64;

    let mean_price = records.iter().map(|r| r.price).sum::<f64>() / k as f64;
    let price_var = records
        .iter()
        .map(|r| (r.price - mean_price).powi(2))
        .sum::<f64>()
        / k as f64;
    let price_std = price_var.sqrt();

    // Conservation: every recorded bid sum must sit on the drift line
    // anchored at the first record.
    let first_sum = records[0].sum_bids;
    let mut conservation_residual = 0.0f64;
    for (i, r) in records.iter().enumerate() {
        let predicted = first_sum + i as f64 * predicted_drift_per_deal;
        conservation_residual = conservation_residual.max((r.sum_bids - predicted).abs());
    }

    // Running mean of the seller counts, re-derived from the records so the
    // check does not lean on the engine's own mu values.
    let mu_convergence = running_mean_spread(records, (k / 10).max(1));

    if k < 2 {
        return Ok(TrendReport {
            n_deals: k,
            ols_slope: f64::NAN,
            ols_intercept: f64::NAN,
            r_squared: f64::NAN,
            detrended_range: f64::NAN,
            price_std,
            seller_count_min: seller_min,
            seller_count_max: seller_max,
            seller_count_mean,
            mu_convergence,
            conservation_residual,
            degenerate: true,
        });
    }

    let points: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.deal_index as f64, r.price))
        .collect();
    let (ols_slope, ols_intercept, r_squared) = ols_fit(&points)?;

    let mut res_min = f64::INFINITY;
    let mut res_max = f64::NEG_INFINITY;
    for &(x, y) in &points {
        let residual = y - (ols_intercept + ols_slope * x);
        res_min = res_min.min(residual);
        res_max = res_max.max(residual);
    }

    Ok(TrendReport {
        n_deals: k,
        ols_slope,
        ols_intercept,
        r_squared,
        detrended_range: res_max - res_min,
        price_std,
        seller_count_min: seller_min,
        seller_count_max: seller_max,
        seller_count_mean,
        mu_convergence,
        conservation_residual,
        degenerate: false,
    })
}

/// Spread of the running seller-count mean from deal `from_deal` (1-based)
/// to the end, relative to the final mean.
fn running_mean_spread(records: &[DealRecord], from_deal: usize) -> f64 {
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut last = 0.0;
    for (i, r) in records.iter().enumerate() {
        sum += r.n_sellers as f64;
        let mu = sum / (i + 1) as f64;
        last = mu;
        if i + 1 >= from_deal {
            lo = lo.min(mu);
            hi = hi.max(mu);
        }
    }
    (hi - lo) / last
}

/// Parsed external tick file: ordered points plus the count of rows dropped
/// for running backwards.
#[derive(Debug, Clone)]
pub struct ExternalSeries {
    pub points: Vec<(f64, f64)>,
    pub skipped_non_monotonic: usize,
}

/// Load a two-column `index,price` CSV. One leading header line is allowed.
/// Rows whose index does not strictly increase are dropped and counted.
/// Non-numeric rows are tolerated up to `max_bad_fraction` of the data rows;
/// beyond that the load fails and lists the offenders.
pub fn load_external_series(
    path: &Path,
    max_bad_fraction: f64,
) -> Result<ExternalSeries, AnalysisError> {
    let content = std::fs::read_to_string(path).map_err(|source| AnalysisError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;

    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut bad: Vec<(usize, String)> = Vec::new();
    let mut skipped_non_monotonic = 0;
    let mut total_rows = 0;

    for (line_no, raw) in content.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        total_rows += 1;
        match parse_pair(line) {
            Some(pair) => {
                if let Some(&(prev, _)) = points.last() {
                    if pair.0 <= prev {
                        skipped_non_monotonic += 1;
                        continue;
                    }
                }
                points.push(pair);
            }
            None => {
                // A single unparseable first line is a header, not an error.
                if line_no == 0 {
                    total_rows -= 1;
                } else {
                    bad.push((line_no + 1, line.to_string()));
                }
            }
        }
    }

    if total_rows > 0 && bad.len() as f64 > max_bad_fraction * total_rows as f64 {
        return Err(AnalysisError::BadRows {
            path: path.display().to_string(),
            bad,
            total: total_rows,
        });
    }
    if points.is_empty() {
        return Err(AnalysisError::EmptyFile {
            path: path.display().to_string(),
        });
    }
    Ok(ExternalSeries {
        points,
        skipped_non_monotonic,
    })
}

fn parse_pair(line: &str) -> Option<(f64, f64)> {
    let mut fields = line.split(',');
    let x = fields.next()?.trim().parse::<f64>().ok()?;
    let y = fields.next()?.trim().parse::<f64>().ok()?;
    if fields.next().is_some() {
        return None;
    }
    Some((x, y))
}
