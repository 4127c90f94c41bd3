//! Tick CSV writing and strict re-reading.
//!
//! Floats are written with `{}` (shortest decimal that round-trips), so a
//! written file parses back to bit-identical records and identical configs
//! rewrite byte-identical files. Lines end with `\n` on every platform.

use dealer_model::engine::{DealRecord, StepPoint};
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const TICK_CSV_HEADER: &str = "deal_index,step,price,buyer,n_sellers,mu_n,sum_bids";
pub const STEP_CSV_HEADER: &str = "step,price,sum_bids";

#[derive(Debug, Error)]
pub enum CsvReadError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
}

/// Render the per-deal records as CSV text.
pub fn render_tick_csv(records: &[DealRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TICK_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.deal_index, r.step, r.price, r.buyer, r.n_sellers, r.mu_n_used, r.sum_bids
        );
    }
    out
}

pub fn write_tick_csv(path: &Path, records: &[DealRecord]) -> io::Result<()> {
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(render_tick_csv(records).as_bytes())?;
    file.flush()
}

/// Strictly parse a tick CSV written by [`write_tick_csv`].
pub fn read_tick_csv(path: &Path) -> Result<Vec<DealRecord>, CsvReadError> {
    let content = std::fs::read_to_string(path).map_err(|source| CsvReadError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    let malformed = |line: usize, message: String| CsvReadError::Malformed {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TICK_CSV_HEADER => {}
        Some((_, header)) => {
            return Err(malformed(
                1,
                format!("expected header `{TICK_CSV_HEADER}`, got `{header}`"),
            ))
        }
        None => return Err(malformed(1, "file is empty".to_string())),
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(malformed(
                line_no,
                format!("expected 7 fields, got {}", fields.len()),
            ));
        }
        let record = DealRecord {
            deal_index: parse_field(fields[0], "deal_index", line_no, path)?,
            step: parse_field(fields[1], "step", line_no, path)?,
            price: parse_field(fields[2], "price", line_no, path)?,
            buyer: parse_field(fields[3], "buyer", line_no, path)?,
            n_sellers: parse_field(fields[4], "n_sellers", line_no, path)?,
            mu_n_used: parse_field(fields[5], "mu_n", line_no, path)?,
            sum_bids: parse_field(fields[6], "sum_bids", line_no, path)?,
        };
        records.push(record);
    }
    Ok(records)
}

fn parse_field<T: std::str::FromStr>(
    raw: &str,
    name: &str,
    line: usize,
    path: &Path,
) -> Result<T, CsvReadError> {
    raw.parse().map_err(|_| CsvReadError::Malformed {
        path: path.display().to_string(),
        line,
        message: format!("cannot parse {name} from `{raw}`"),
    })
}

pub fn write_step_csv(path: &Path, trace: &[StepPoint]) -> io::Result<()> {
    let mut out = String::with_capacity(32 * (trace.len() + 1));
    out.push_str(STEP_CSV_HEADER);
    out.push('\n');
    for p in trace {
        let _ = writeln!(out, "{},{},{}", p.step, p.price, p.sum_bids);
    }
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(out.as_bytes())?;
    file.flush()
}

/// Sibling path for the per-step trace: `out.csv` -> `out_steps.csv`.
pub fn step_csv_path(tick_csv: &Path) -> PathBuf {
    let stem = tick_csv.file_stem().unwrap_or_default().to_string_lossy();
    tick_csv.with_file_name(format!("{stem}_steps.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dealer_model::engine::run;
    use dealer_model::scenarios::preset;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut cfg = preset("fig4-baseline").unwrap().config;
        cfg.target_deals = Some(300);
        let series = run(&cfg);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ticks.csv");
        write_tick_csv(&path, &series.records).unwrap();
        let back = read_tick_csv(&path).unwrap();
        assert_eq!(back, series.records);

        // Hence a report recomputed from the file matches the in-memory one
        // to the bit.
        let a = dealer_model::analysis::trend_report(&series.records, 0.0).unwrap();
        let b = dealer_model::analysis::trend_report(&back, 0.0).unwrap();
        assert_eq!(a.ols_slope.to_bits(), b.ols_slope.to_bits());
        assert_eq!(a.detrended_range.to_bits(), b.detrended_range.to_bits());
        assert_eq!(
            a.conservation_residual.to_bits(),
            b.conservation_residual.to_bits()
        );
        assert_eq!(a.mu_convergence.to_bits(), b.mu_convergence.to_bits());
    }

    #[test]
    fn rewriting_identical_records_is_byte_identical() {
        let mut cfg = preset("fig7-unpremeditated").unwrap().config;
        cfg.target_deals = Some(200);
        let a = render_tick_csv(&run(&cfg).records);
        let b = render_tick_csv(&run(&cfg).records);
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        let err = read_tick_csv(&path).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn short_row_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, format!("{TICK_CSV_HEADER}\n1,2,3\n")).unwrap();
        let err = read_tick_csv(&path).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn non_numeric_field_reports_name_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, format!("{TICK_CSV_HEADER}\n1,0,x,0,1,1,0\n")).unwrap();
        let err = read_tick_csv(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("price") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn step_path_is_a_sibling() {
        assert_eq!(
            step_csv_path(Path::new("/tmp/out.csv")),
            Path::new("/tmp/out_steps.csv")
        );
    }
}
