//! Aggregation of regret traces into per-iteration statistics.
//!
//! Reads one or more trace CSVs produced by the runner, groups regret by
//! algorithm and iteration across repeats, and reports location and
//! spread both ways: mean with standard deviation, and median with the
//! interquartile range. Regret studies are heavy-tailed enough that the
//! median pair is the headline statistic, but both are always emitted so
//! downstream plots can choose. Mixing traces from different problems in
//! one summary is an error rather than a silently meaningless average.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use mmdbo_core::{Error, Result};

/// Per-(algorithm, iteration) aggregate over repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub algo: String,
    pub iter: usize,
    /// Number of regret values aggregated.
    pub n: usize,
    pub regret_mean: f64,
    pub regret_sd: f64,
    pub regret_median: f64,
    pub regret_q1: f64,
    pub regret_q3: f64,
}

/// Linear-interpolation quantile (the common "type 7" rule) of already
/// sorted values.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

#[derive(Default)]
struct Cell {
    values: Vec<f64>,
}

/// Parses trace CSVs and aggregates them. Column positions are resolved
/// from the header, so traces with and without timing columns mix freely.
pub fn summarize(paths: &[impl AsRef<Path>]) -> Result<Vec<SummaryRow>> {
    if paths.is_empty() {
        return Err(Error::Config("summary needs at least one trace file".into()));
    }
    let mut problem: Option<String> = None;
    let mut cells: BTreeMap<(String, usize), Cell> = BTreeMap::new();

    for path in paths {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Config(format!("bad header in {}: {e}", path.display())))?
            .clone();
        let col = |name: &str| -> Result<usize> {
            headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::Config(format!(
                    "{} lacks required column {name:?}",
                    path.display()
                ))
            })
        };
        let c_problem = col("problem")?;
        let c_algo = col("algo")?;
        let c_iter = col("iter")?;
        let c_regret = col("regret")?;

        for record in reader.records() {
            let record = record
                .map_err(|e| Error::Config(format!("bad row in {}: {e}", path.display())))?;
            let get = |i: usize| -> Result<&str> {
                record.get(i).ok_or_else(|| {
                    Error::Config(format!("short row in {}", path.display()))
                })
            };
            let row_problem = get(c_problem)?;
            match &problem {
                None => problem = Some(row_problem.to_string()),
                Some(p) if p != row_problem => {
                    return Err(Error::Config(format!(
                        "cannot summarize mixed problems: {p:?} and {row_problem:?}"
                    )));
                }
                _ => {}
            }
            let iter: usize = get(c_iter)?
                .parse()
                .map_err(|e| Error::Config(format!("bad iter in {}: {e}", path.display())))?;
            let regret: f64 = get(c_regret)?
                .parse()
                .map_err(|e| Error::Config(format!("bad regret in {}: {e}", path.display())))?;
            cells
                .entry((get(c_algo)?.to_string(), iter))
                .or_default()
                .values
                .push(regret);
        }
    }

    let problem = problem.ok_or_else(|| Error::Config("no trace rows to summarize".into()))?;
    let mut out = Vec::with_capacity(cells.len());
    for ((algo, iter), mut cell) in cells {
        let n = cell.values.len();
        let mean = cell.values.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (cell.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
                .sqrt()
        };
        cell.values.sort_by(|a, b| a.total_cmp(b));
        out.push(SummaryRow {
            problem: problem.clone(),
            algo,
            iter,
            n,
            regret_mean: mean,
            regret_sd: sd,
            regret_median: quantile_sorted(&cell.values, 0.5),
            regret_q1: quantile_sorted(&cell.values, 0.25),
            regret_q3: quantile_sorted(&cell.values, 0.75),
        });
    }
    Ok(out)
}

/// Renders rows as
/// `problem,algo,iter,n,regret_mean,regret_sd,regret_median,regret_q1,regret_q3`.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut text =
        String::from("problem,algo,iter,n,regret_mean,regret_sd,regret_median,regret_q1,regret_q3\n");
    for r in rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.problem,
            r.algo,
            r.iter,
            r.n,
            r.regret_mean,
            r.regret_sd,
            r.regret_median,
            r.regret_q1,
            r.regret_q3
        )
        .expect("string write");
    }
    text
}
