//! Report files: per-configuration Pareto CSVs, metric summaries, the
//! optima-count and load tables, Morris results and the full report JSON.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::suite::{RunKind, SequentialRow, SuiteReport};
use crate::error::{Error, Result};
use crate::metrics::{round_half_up, MetricsReport};
use crate::morris::write_morris_csv;
use crate::pareto::ParetoSet;
use crate::space::DesignSpace;

pub const REPORT_FILE: &str = "report.json";

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<fs::File>>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn finish<W: Write>(w: csv::Writer<W>, path: &Path) -> Result<()> {
    let mut inner = w
        .into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Keeps file names portable: anything outside `[A-Za-z0-9_-]` becomes `-`.
pub fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '-' })
        .collect()
}

/// Option labels, objectives, and `global` / `search` membership (empty
/// without an oracle).
pub fn write_pareto_csv(
    path: &Path,
    space: &DesignSpace,
    objective_names: &[String],
    set: &ParetoSet,
    global: Option<&ParetoSet>,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header: Vec<&str> = space
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .chain(objective_names.iter().map(String::as_str))
        .chain(["classification"])
        .collect();
    w.write_record(&header)?;
    for (v, f) in set {
        let mut record: Vec<String> = space.labels(v).into_iter().map(String::from).collect();
        record.extend(f.values().iter().map(|x| x.to_string()));
        record.push(match global {
            Some(g) if g.contains(v) => "global".into(),
            Some(_) => "search".into(),
            None => String::new(),
        });
        w.write_record(&record)?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    config: String,
    grouping: &'a str,
    bound: &'a str,
    run: &'a str,
    #[serde(flatten)]
    metrics: &'a MetricsReport,
}

#[derive(Serialize)]
struct Summary<'a> {
    name: &'a str,
    version: &'a str,
    seed: u64,
    combination_count: u64,
    n_global_total: Option<usize>,
    oracle_evaluations: Option<u64>,
    sequential: Vec<SummaryRow<'a>>,
    nsga2: Vec<SummaryRow<'a>>,
}

fn grid_rows(report: &SuiteReport) -> Vec<(&str, &str, Option<&SequentialRow>, Option<&SequentialRow>)> {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in &report.sequential {
        let k = (r.grouping.as_str(), r.bound.as_str());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(g, b)| (g, b, report.row(g, b, RunKind::Initial), report.row(g, b, RunKind::Iterative)))
        .collect()
}

fn pct(x: f64) -> String {
    format!("{:.1}", round_half_up(100.0 * x, 1))
}

/// Writes every report file into `dir` and returns the paths written.
/// Identical reports give byte-identical files.
pub fn export_report(report: &SuiteReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let space = report.space()?;
    let global = report.global();
    let names = &report.objective_names;
    let mut written = Vec::new();

    if let Some(g) = global {
        let p = dir.join("pareto_global.csv");
        write_pareto_csv(&p, &space, names, g, Some(g))?;
        written.push(p);
    }
    for row in &report.sequential {
        let p = dir.join(format!("pareto_{}.csv", file_stem(&row.key())));
        write_pareto_csv(&p, &space, names, &row.final_set, global)?;
        written.push(p);
    }
    if let Some(n) = &report.nsga2 {
        for &k in &n.kept {
            let p = dir.join(format!("pareto_nsga2_run{k}.csv"));
            write_pareto_csv(&p, &space, names, &n.runs[k].final_set, global)?;
            written.push(p);
        }
    }

    let summary = Summary {
        name: &report.name,
        version: &report.version,
        seed: report.seed,
        combination_count: report.combination_count,
        n_global_total: global.map(ParetoSet::len),
        oracle_evaluations: report.oracle.evaluations,
        sequential: report
            .sequential
            .iter()
            .map(|r| SummaryRow {
                config: r.key(),
                grouping: &r.grouping,
                bound: &r.bound,
                run: r.run.as_str(),
                metrics: &r.metrics,
            })
            .collect(),
        nsga2: report
            .nsga2
            .iter()
            .flat_map(|n| n.kept.iter().map(move |&k| &n.runs[k]))
            .map(|r| SummaryRow {
                config: format!("nsga2_run{}", r.run_index),
                grouping: "nsga2",
                bound: "",
                run: "",
                metrics: &r.metrics,
            })
            .collect(),
    };
    let p = dir.join("summary.json");
    write_json(&p, &summary)?;
    written.push(p);

    let grid = grid_rows(report);
    let p = dir.join("table5.csv");
    let mut w = csv_writer(&p)?;
    w.write_record(["grouping", "bound", "initial", "iterative", "global_total"])?;
    let found = |r: Option<&SequentialRow>| {
        r.and_then(|r| r.metrics.n_global_found)
            .map(|n| n.to_string())
            .unwrap_or_default()
    };
    let total = global.map(|g| g.len().to_string()).unwrap_or_default();
    for (g, b, init, iter) in &grid {
        w.write_record([*g, *b, &found(*init), &found(*iter), &total])?;
    }
    finish(w, &p)?;
    written.push(p);

    let p = dir.join("table6.csv");
    let mut w = csv_writer(&p)?;
    w.write_record(["grouping", "bound", "initial_load_pct", "iterative_load_pct"])?;
    let load = |r: Option<&SequentialRow>| r.map(|r| pct(r.metrics.computational_load)).unwrap_or_default();
    for (g, b, init, iter) in &grid {
        w.write_record([*g, *b, &load(*init), &load(*iter)])?;
    }
    finish(w, &p)?;
    written.push(p);

    let p = dir.join("morris.csv");
    let file = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
    write_morris_csv(report.morris.as_ref(), BufWriter::new(file))?;
    written.push(p);

    let p = dir.join(REPORT_FILE);
    write_json(&p, report)?;
    written.push(p);
    Ok(written)
}

/// Reads a report written by [`export_report`].
pub fn read_report(path: &Path) -> Result<SuiteReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
