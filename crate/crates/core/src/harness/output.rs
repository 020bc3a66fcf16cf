//! CSV emission and parsing for experiment tables.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`. Error rows carry `ERR:<code>` in the
//! distance column.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mechanisms::Mechanism;

use super::experiment::{AggregateRow, CellInfo, ExperimentOutput, TrialRow};

pub const TRIAL_HEADER: [&str; 10] =
    ["mechanism", "manifold", "scenario", "n", "p", "alpha", "epsilon", "trial", "distance", "seed"];
pub const AGGREGATE_HEADER: [&str; 10] =
    ["mechanism", "manifold", "scenario", "n", "p", "alpha", "epsilon", "mean_distance", "stderr", "trials"];

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn err_cell(code: &str) -> String {
    format!("ERR:{code}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    }
    csv::Writer::from_path(path).map_err(csv_err(path))
}

fn write_table<I>(path: &Path, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = writer(path)?;
    w.write_record(header).map_err(csv_err(path))?;
    for rec in records {
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Per-trial table.
pub fn emit_csv(rows: &[TrialRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &TRIAL_HEADER,
        rows.iter().map(|r| {
            vec![
                r.mechanism.label().to_string(),
                r.manifold.clone(),
                r.scenario.label().to_string(),
                r.n.to_string(),
                fmt_real(r.p),
                fmt_real(r.alpha),
                fmt_real(r.epsilon),
                r.trial.to_string(),
                r.error.as_deref().map_or_else(|| fmt_real(r.distance), err_cell),
                r.seed.to_string(),
            ]
        }),
    )
}

/// Per-cell mean and standard error.
pub fn emit_aggregates(rows: &[AggregateRow], path: &Path) -> Result<()> {
    write_table(
        path,
        &AGGREGATE_HEADER,
        rows.iter().map(|a| {
            vec![
                a.mechanism.label().to_string(),
                a.manifold.clone(),
                a.scenario.label().to_string(),
                a.n.to_string(),
                fmt_real(a.p),
                fmt_real(a.alpha),
                fmt_real(a.epsilon),
                a.error.as_deref().map_or_else(|| fmt_real(a.mean_distance), err_cell),
                fmt_real(a.stderr),
                a.trials.to_string(),
            ]
        }),
    )
}

/// Calibration log: `Δ` and `t` or `σ` per cell.
pub fn emit_cells(cells: &[CellInfo], path: &Path) -> Result<()> {
    let opt = |x: Option<f64>| x.map(fmt_real).unwrap_or_default();
    write_table(
        path,
        &["mechanism", "n", "epsilon", "delta", "t", "sigma", "n_step", "status"],
        cells.iter().map(|c| {
            vec![
                c.mechanism.label().to_string(),
                c.n.to_string(),
                fmt_real(c.epsilon),
                fmt_real(c.delta),
                opt(c.t),
                opt(c.sigma),
                c.n_step.map(|s| s.to_string()).unwrap_or_default(),
                c.status.clone(),
            ]
        }),
    )
}

/// One plot-data file per `(manifold, scenario, n)` panel:
/// `mechanism,epsilon,mean_distance,stderr`. Error cells are left out.
pub fn emit_panels(rows: &[AggregateRow], dir: &Path) -> Result<Vec<PathBuf>> {
    let mut panels: BTreeMap<(String, String, usize), Vec<&AggregateRow>> = BTreeMap::new();
    for a in rows.iter().filter(|a| !a.is_error()) {
        panels.entry((a.manifold.clone(), a.scenario.label().to_string(), a.n)).or_default().push(a);
    }
    let mut written = Vec::new();
    for ((manifold, scenario, n), rows) in panels {
        let path = dir.join(format!("panel_{manifold}_{scenario}_n{n}.csv"));
        write_table(
            &path,
            &["mechanism", "epsilon", "mean_distance", "stderr"],
            rows.iter().map(|a| {
                vec![a.mechanism.label().to_string(), fmt_real(a.epsilon), fmt_real(a.mean_distance), fmt_real(a.stderr)]
            }),
        )?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `trials.csv`, `aggregates.csv`, `cells.csv` and the panel files
/// into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    let trials = dir.join("trials.csv");
    let aggs = dir.join("aggregates.csv");
    let cells = dir.join("cells.csv");
    emit_csv(&out.rows, &trials)?;
    emit_aggregates(&out.aggregates, &aggs)?;
    emit_cells(&out.cells, &cells)?;
    let mut written = vec![trials, aggs, cells];
    written.extend(emit_panels(&out.aggregates, dir)?);
    Ok(written)
}

fn read_records(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let got = r.headers().map_err(csv_err(path))?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::Config(format!("{}: unexpected header {:?}", path.display(), got)));
    }
    r.records().map(|rec| rec.map_err(csv_err(path))).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Config(format!("{}: cannot parse field {i} `{raw}`", path.display())))
}

/// Splits a distance-like column into value or error code.
fn value_or_error(raw: &str, path: &Path) -> Result<(f64, Option<String>)> {
    match raw.strip_prefix("ERR:") {
        Some(code) => Ok((f64::NAN, Some(code.to_string()))),
        None => raw
            .parse()
            .map(|v| (v, None))
            .map_err(|_| Error::Config(format!("{}: bad value `{raw}`", path.display()))),
    }
}

pub fn read_trials(path: &Path) -> Result<Vec<TrialRow>> {
    read_records(path, &TRIAL_HEADER)?
        .iter()
        .map(|rec| {
            let (distance, error) = value_or_error(rec.get(8).unwrap_or(""), path)?;
            Ok(TrialRow {
                mechanism: Mechanism::parse(rec.get(0).unwrap_or(""))?,
                manifold: rec.get(1).unwrap_or("").to_string(),
                scenario: rec.get(2).unwrap_or("").parse()?,
                n: field(rec, 3, path)?,
                p: field(rec, 4, path)?,
                alpha: field(rec, 5, path)?,
                epsilon: field(rec, 6, path)?,
                trial: field(rec, 7, path)?,
                distance,
                seed: field(rec, 9, path)?,
                error,
            })
        })
        .collect()
}

pub fn read_aggregates(path: &Path) -> Result<Vec<AggregateRow>> {
    read_records(path, &AGGREGATE_HEADER)?
        .iter()
        .map(|rec| {
            let (mean_distance, error) = value_or_error(rec.get(7).unwrap_or(""), path)?;
            Ok(AggregateRow {
                mechanism: Mechanism::parse(rec.get(0).unwrap_or(""))?,
                manifold: rec.get(1).unwrap_or("").to_string(),
                scenario: rec.get(2).unwrap_or("").parse()?,
                n: field(rec, 3, path)?,
                p: field(rec, 4, path)?,
                alpha: field(rec, 5, path)?,
                epsilon: field(rec, 6, path)?,
                mean_distance,
                stderr: field(rec, 8, path)?,
                trials: field(rec, 9, path)?,
                error,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Scenario;

    #[test]
    fn reals_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 123456.789e10] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn error_cells_are_tagged() {
        let (v, e) = value_or_error("ERR:normalization", Path::new("x")).unwrap();
        assert!(v.is_nan());
        assert_eq!(e.as_deref(), Some("normalization"));
        let row = TrialRow {
            mechanism: Mechanism::Rl,
            manifold: "hyperboloid2".into(),
            scenario: Scenario::AnchorAtCenter,
            n: 10,
            p: 2.0,
            alpha: 2.0,
            epsilon: 0.1,
            trial: 0,
            distance: f64::NAN,
            seed: 3,
            error: Some("normalization".into()),
        };
        assert!(row.error.is_some());
    }
}
