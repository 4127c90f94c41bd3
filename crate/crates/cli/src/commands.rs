//! The three subcommands.

use crate::config::{resolve_config, CliError};
use crate::csvio::{read_tick_csv, step_csv_path, write_step_csv, write_tick_csv};
use crate::manifest::{manifest_path, write_manifest, RunManifest};
use crate::report;
use crate::{AnalyzeArgs, SimulateArgs, SweepArgs};
use dealer_model::analysis::{load_external_series, ols_fit, trend_report, TrendReport};
use dealer_model::engine::{run, RunConfig};
use dealer_model::scenarios;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

fn io_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {err}"))
}

/// Run one simulation and write the tick CSV plus its manifest.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let resolved = resolve_config(
        args.preset.as_deref(),
        args.config.as_deref(),
        &args.set,
        args.seed,
    )?;
    let series = run(&resolved.config);

    write_tick_csv(&args.out, &series.records)
        .map_err(|e| io_err(&format!("writing {}", args.out.display()), e))?;
    if resolved.config.record_every_step {
        let steps = step_csv_path(&args.out);
        write_step_csv(&steps, &series.step_trace)
            .map_err(|e| io_err(&format!("writing {}", steps.display()), e))?;
    }
    let manifest = RunManifest::for_series(&series, resolved.overrides.clone(), &args.out);
    let mpath = manifest_path(&args.out);
    write_manifest(&mpath, &manifest)
        .map_err(|e| io_err(&format!("writing {}", mpath.display()), e))?;

    println!(
        "{}: {} deals in {} steps -> {} (digest {})",
        resolved.source,
        series.records.len(),
        series.records.last().map_or(0, |r| r.step + 1),
        args.out.display(),
        manifest.final_state_digest
    );
    if series.no_deal_warning {
        eprintln!(
            "warning: no deals within {} steps; the CSV holds only the header",
            resolved.config.max_steps
        );
    }
    Ok(())
}

const SUMMARY_HEADER: &str = "preset,eps_buyer,seed,file,n_deals,ols_slope,ols_intercept,\
r_squared,detrended_range,price_std,seller_count_min,seller_count_max,seller_count_mean,\
mu_convergence,predicted_drift,conservation_residual,final_state_digest";

fn summary_row(
    preset: &str,
    cfg: &RunConfig,
    file: &str,
    rep: &TrendReport,
    digest: &str,
) -> String {
    let drift = cfg.params.predicted_drift_per_deal();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        preset,
        cfg.params.eps_buyer,
        cfg.params.seed,
        file,
        rep.n_deals,
        rep.ols_slope,
        rep.ols_intercept,
        rep.r_squared,
        rep.detrended_range,
        rep.price_std,
        rep.seller_count_min,
        rep.seller_count_max,
        rep.seller_count_mean,
        rep.mu_convergence,
        drift,
        rep.conservation_residual,
        digest
    )
}

/// Run the eps x seed grid in parallel; one CSV + manifest per run and a
/// summary CSV over all of them.
pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let preset = scenarios::preset(&args.preset).map_err(|e| CliError::Config(e.to_string()))?;
    let configs = scenarios::sweep(&preset.config, &args.eps, &args.seeds)
        .map_err(|e| CliError::Config(e.to_string()))?;
    for cfg in &configs {
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| io_err(&format!("creating {}", args.out_dir.display()), e))?;

    // Runs are independent; each writes only its own files.
    let results: Vec<Result<String, String>> = configs
        .par_iter()
        .map(|cfg| {
            let file = format!(
                "{}_eps{}_seed{}.csv",
                args.preset, cfg.params.eps_buyer, cfg.params.seed
            );
            sweep_one(&args.out_dir, &args.preset, cfg, &file).map_err(|e| format!("{file}: {e}"))
        })
        .collect();

    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(row) => {
                summary.push_str(&row);
                summary.push('\n');
            }
            Err(msg) => failures.push(msg),
        }
    }
    let summary_path = args.out_dir.join("summary.csv");
    std::fs::write(&summary_path, summary)
        .map_err(|e| io_err(&format!("writing {}", summary_path.display()), e))?;

    println!(
        "swept {} runs ({} eps x {} seeds) -> {}",
        configs.len(),
        args.eps.len(),
        args.seeds.len(),
        args.out_dir.display()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        let mut msg = format!("{} of {} runs failed:", failures.len(), configs.len());
        for f in &failures {
            let _ = write!(msg, "\n  {f}");
        }
        Err(CliError::Partial(msg))
    }
}

fn sweep_one(out_dir: &Path, preset: &str, cfg: &RunConfig, file: &str) -> Result<String, String> {
    let series = run(cfg);
    let csv_path = out_dir.join(file);
    write_tick_csv(&csv_path, &series.records).map_err(|e| e.to_string())?;
    let manifest = RunManifest::for_series(&series, Vec::new(), &csv_path);
    write_manifest(&manifest_path(&csv_path), &manifest).map_err(|e| e.to_string())?;
    let rep = trend_report(&series.records, cfg.params.predicted_drift_per_deal())
        .map_err(|e| e.to_string())?;
    Ok(summary_row(
        preset,
        cfg,
        file,
        &rep,
        &manifest.final_state_digest,
    ))
}

/// Report on an existing CSV.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    if args.external {
        analyze_external(args)
    } else {
        analyze_internal(args)
    }
}

fn analyze_internal(args: &AnalyzeArgs) -> Result<(), CliError> {
    let records = read_tick_csv(&args.path).map_err(|e| CliError::Config(e.to_string()))?;
    let skip = args.skip.min(records.len());
    let kept = &records[skip..];
    let rep = trend_report(kept, args.drift).map_err(|e| CliError::Config(e.to_string()))?;
    print!(
        "{}",
        report::format_internal(&args.path.display().to_string(), skip, args.drift, &rep)
    );
    if args.machine {
        let line = serde_json::to_string(&rep).map_err(|e| CliError::Io(e.to_string()))?;
        println!("{line}");
    }
    Ok(())
}

fn analyze_external(args: &AnalyzeArgs) -> Result<(), CliError> {
    let series = load_external_series(&args.path, args.tolerate_bad)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let skip = args.skip.min(series.points.len());
    let points = &series.points[skip..];
    let (slope, intercept, r_squared) =
        ols_fit(points).map_err(|e| CliError::Config(e.to_string()))?;

    let mut res_min = f64::INFINITY;
    let mut res_max = f64::NEG_INFINITY;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let mut var = 0.0;
    for &(x, y) in points {
        let r = y - (intercept + slope * x);
        res_min = res_min.min(r);
        res_max = res_max.max(r);
        var += (y - mean) * (y - mean);
    }

    let stats = report::ExternalStats {
        n_points: points.len(),
        skipped_rows: skip,
        non_monotonic_dropped: series.skipped_non_monotonic,
        ols_slope: slope,
        ols_intercept: intercept,
        r_squared,
        detrended_range: res_max - res_min,
        price_std: (var / points.len() as f64).sqrt(),
    };
    print!(
        "{}",
        report::format_external(&args.path.display().to_string(), &stats)
    );
    if args.machine {
        let line = serde_json::to_string(&stats).map_err(|e| CliError::Io(e.to_string()))?;
        println!("{line}");
    }
    Ok(())
}
