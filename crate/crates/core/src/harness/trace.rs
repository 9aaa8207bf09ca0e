use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{RunStats, TraceRecord};
use crate::error::{Error, Result};

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// `<method>_k<k>_seed<seed>.csv` with path-hostile characters replaced.
pub fn trace_file_name(method: &str, k: usize, seed: u64) -> String {
    let clean: String = method
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{clean}_k{k}_seed{seed}.csv")
}

pub const TRACE_HEADER: [&str; 6] = ["iteration", "col_access", "f", "eps_obj", "eps_energy", "eps_tan"];

/// Writes the header even for an empty trace.
pub fn write_trace(path: &Path, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(TRACE_HEADER).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    #[serde(rename = "Method")]
    method: &'a str,
    k: usize,
    #[serde(rename = "MinIter")]
    min_iter: u64,
    #[serde(rename = "MedIter")]
    med_iter: u64,
    #[serde(rename = "MaxIter")]
    max_iter: u64,
    #[serde(rename = "TotalColAccess")]
    total_col_access: u64,
}

/// One row per method in table order.
pub fn write_summary(path: &Path, rows: &[RunStats]) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for s in rows {
        w.serialize(SummaryRow {
            method: &s.method,
            k: s.k,
            min_iter: s.min_iters,
            med_iter: s.med_iters,
            max_iter: s.max_iters,
            total_col_access: s.total_col_access,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(trace_file_name("SCD-Grad-LS(1)", 1, 7));
        assert!(path.ends_with("SCD-Grad-LS_1__k1_seed7.csv"));
        let recs = vec![
            TraceRecord {
                iteration: 0,
                column_accesses: 1,
                f_value: 2.5,
                eps_obj: 0.3,
                eps_energy: 0.1,
                eps_tan: 1e-3,
            },
            TraceRecord {
                iteration: 9,
                column_accesses: 10,
                f_value: 1.25e-7,
                eps_obj: 1e-9,
                eps_energy: f64::NAN,
                eps_tan: 0.0,
            },
        ];
        write_trace(&path, &recs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("iteration,col_access,f,eps_obj,eps_energy,eps_tan\n"));
        let back = read_trace(&path).unwrap();
        assert_eq!(back[0], recs[0]);
        assert_eq!(back[1].f_value, recs[1].f_value);
        assert!(back[1].eps_energy.is_nan());
    }

    #[test]
    fn empty_trace_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_trace(&path, &[]).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "iteration,col_access,f,eps_obj,eps_energy,eps_tan\n"
        );
        assert!(read_trace(&path).unwrap().is_empty());
        let missing = dir.path().join("no/such/dir.csv");
        let err = write_trace(&missing, &[]).unwrap_err().to_string();
        assert!(err.contains("dir.csv"), "{err}");
    }

    #[test]
    fn summary_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let s = RunStats {
            method: "GCD-LS-LS".into(),
            k: 1,
            min_iters: 3,
            med_iters: 3,
            max_iters: 3,
            total_col_access: 3,
            seeds_used: 1,
            diverged_count: 0,
            unconverged_count: 0,
        };
        write_summary(&path, &[s]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "Method,k,MinIter,MedIter,MaxIter,TotalColAccess\nGCD-LS-LS,1,3,3,3,3\n"
        );
    }
}
