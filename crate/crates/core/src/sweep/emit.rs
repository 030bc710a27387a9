//! CSV and JSON output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::SweepResult;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 13] = [
    "z_ohm",
    "q",
    "n",
    "j_ghz",
    "eps_d_over_eps_a",
    "g_mhz",
    "delta_mhz",
    "t_g_ns",
    "f_analytic",
    "f_numeric",
    "infidelity_powerlaw",
    "clamped",
    "max_fock_pop",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One header line, one line per row; missing values are empty cells.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in &result.rows {
        w.write_record([
            r.z_ohm.to_string(),
            r.q.to_string(),
            r.n.to_string(),
            cell(r.j_ghz),
            cell(r.eps_d_over_eps_a),
            cell(r.g_mhz),
            cell(r.delta_mhz),
            cell(r.t_g_ns),
            cell(r.f_analytic),
            cell(r.f_numeric),
            cell(r.infidelity_powerlaw),
            r.clamped.to_string(),
            cell(r.max_fock_pop),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_json<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    out.write_all(b"\n").map_err(serde_json::Error::io)?;
    Ok(())
}

pub fn write<W: Write>(result: &SweepResult, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(result, out),
        Format::Json => write_json(result, out),
    }
}

/// Writes to `path`, attaching the path to any failure.
pub fn emit_results(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let io = |source: std::io::Error| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write(result, format, &mut buf).map_err(|e| match e {
        Error::Json(j) => io(j.into()),
        Error::Csv(c) => io(std::io::Error::other(c)),
        other => other,
    })?;
    buf.flush().map_err(io)
}

pub fn load_json(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::config::RunConfig;
    use crate::sweep::optimize::optimize_point;
    use crate::sweep::run::SCHEMA_VERSION;

    fn sample() -> SweepResult {
        let cfg = RunConfig::default();
        let bad = optimize_point(
            &RunConfig {
                beta: 1.0,
                ..cfg.clone()
            },
            vec![],
            0,
        );
        SweepResult {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            rows: vec![optimize_point(&cfg, vec![], 0), bad],
        }
    }

    #[test]
    fn csv_shape() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines.iter().all(|l| l.split(',').count() == 13));
        // failed row keeps its inputs and leaves derived cells empty
        assert!(lines[2].starts_with("5000,20000,2,,"));
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let r = sample();
        emit_results(&r, Format::Json, &path).unwrap();
        assert_eq!(load_json(&path).unwrap(), r);
    }

    #[test]
    fn io_error_names_path() {
        let path = Path::new("/nonexistent-dir/x.csv");
        let e = emit_results(&sample(), Format::Csv, path).unwrap_err();
        assert!(e.to_string().contains("/nonexistent-dir/x.csv"), "{e}");
    }
}
