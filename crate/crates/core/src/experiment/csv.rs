//! Long-format CSV output.
//!
//! Every run record becomes one row per episode under [`RUNS_HEADER`]. Floats
//! are printed with 17 significant digits (`%.17g` style), enough for any
//! `f64` to survive a write/read/write cycle byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::aggregate::AggregateCurve;
use super::config::{ExperimentConfig, Representation};
use super::runner::RunRecord;
use crate::agent::Algorithm;

pub const RUNS_HEADER: &str = "experiment_id,algorithm,representation,buffer_size,seed,episode,return,steps";
pub const AGGREGATE_HEADER: &str =
    "experiment_id,algorithm,representation,buffer_size,episode,mean_return,std_error,runs";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("unexpected header {found:?}")]
    Header { found: String },
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment_id: String,
    pub algorithm: Algorithm,
    pub representation: Representation,
    pub buffer_size: usize,
    pub seed: u64,
    pub episode: usize,
    pub ret: f64,
    pub steps: usize,
}

/// Formats `x` like C's `%.17g`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        strip_zeros(&fixed).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn rows_for(cfg: &ExperimentConfig, records: &[RunRecord]) -> Vec<CsvRow> {
    records
        .iter()
        .flat_map(|r| {
            r.episodes.iter().map(move |e| CsvRow {
                experiment_id: cfg.id.clone(),
                algorithm: cfg.algorithm,
                representation: cfg.representation,
                buffer_size: cfg.buffer_capacity,
                seed: r.seed,
                episode: e.episode,
                ret: e.ret,
                steps: e.steps,
            })
        })
        .collect()
}

/// Renders rows, header included, with LF line endings.
pub fn render_rows(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RUNS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.experiment_id,
            r.algorithm,
            r.representation,
            r.buffer_size,
            r.seed,
            r.episode,
            format_float(r.ret),
            r.steps
        );
    }
    out
}

pub fn render_aggregate(cfg: &ExperimentConfig, curve: &AggregateCurve, with_header: bool) -> String {
    let mut out = String::new();
    if with_header {
        out.push_str(AGGREGATE_HEADER);
        out.push('\n');
    }
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cfg.id,
            cfg.algorithm,
            cfg.representation,
            cfg.buffer_capacity,
            p.episode,
            format_float(p.mean),
            format_float(p.std_error),
            p.runs
        );
    }
    out
}

fn field<T: std::str::FromStr>(line: usize, name: &str, value: &str) -> Result<T, CsvError> {
    value.parse().map_err(|_| CsvError::Row {
        line,
        message: format!("invalid {name} {value:?}"),
    })
}

/// Parses text produced by [`render_rows`].
pub fn parse_rows(text: &str) -> Result<Vec<CsvRow>, CsvError> {
    let mut lines = text.split('\n').enumerate();
    let header = lines.next().map(|(_, h)| h).unwrap_or_default();
    if header != RUNS_HEADER {
        return Err(CsvError::Header {
            found: header.to_string(),
        });
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.split(',').collect();
        if cols.len() != 8 {
            return Err(CsvError::Row {
                line,
                message: format!("expected 8 fields, found {}", cols.len()),
            });
        }
        if cols[0].is_empty() {
            return Err(CsvError::Row {
                line,
                message: "empty experiment_id".into(),
            });
        }
        let bad_enum = |e: String| CsvError::Row { line, message: e };
        rows.push(CsvRow {
            experiment_id: cols[0].to_string(),
            algorithm: cols[1].parse().map_err(bad_enum)?,
            representation: cols[2].parse().map_err(bad_enum)?,
            buffer_size: field(line, "buffer_size", cols[3])?,
            seed: field(line, "seed", cols[4])?,
            episode: field(line, "episode", cols[5])?,
            ret: field(line, "return", cols[6])?,
            steps: field(line, "steps", cols[7])?,
        });
    }
    Ok(rows)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CsvError + '_ {
    move |source| CsvError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CsvError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn export_csv(path: &Path, rows: &[CsvRow]) -> Result<(), CsvError> {
    write_text(path, &render_rows(rows))
}

pub fn import_csv(path: &Path) -> Result<Vec<CsvRow>, CsvError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_rows(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn float_formatting_matches_printf() {
        assert_eq!(format_float(-37.0), "-37");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_float(-2.5), "-2.5");
        assert_eq!(format_float(1e17), "1e+17");
        assert_eq!(format_float(123456789012345680.0), "1.2345678901234568e+17");
        assert_eq!(format_float(0.0001), "0.0001");
        assert_eq!(format_float(0.0), "0");
    }

    #[test]
    fn header_is_pinned() {
        assert_eq!(
            render_rows(&[]),
            "experiment_id,algorithm,representation,buffer_size,seed,episode,return,steps\n"
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_rows("a,b\n"), Err(CsvError::Header { .. })));
        let bad = format!("{RUNS_HEADER}\nx,online,tabular,1,2,3,-4\n");
        assert!(matches!(parse_rows(&bad), Err(CsvError::Row { line: 2, .. })));
        let bad = format!("{RUNS_HEADER}\nx,sideways,tabular,1,2,3,-4,4\n");
        assert!(parse_rows(&bad).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(x: f64) {
            prop_assume!(x.is_finite());
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }

        #[test]
        fn export_import_export_is_stable(
            rets in proptest::collection::vec(-1e6f64..1e6, 0..20),
            seed: u64,
        ) {
            let rows: Vec<CsvRow> = rets
                .iter()
                .enumerate()
                .map(|(i, r)| CsvRow {
                    experiment_id: "exp-1".into(),
                    algorithm: Algorithm::Combined,
                    representation: Representation::Mlp,
                    buffer_size: 100,
                    seed,
                    episode: i,
                    ret: *r,
                    steps: i * 3,
                })
                .collect();
            let text = render_rows(&rows);
            let parsed = parse_rows(&text).unwrap();
            prop_assert_eq!(&parsed, &rows);
            prop_assert_eq!(render_rows(&parsed), text);
        }
    }
}
