//! Writers for the run artifacts: report.json, report.csv, the per-figure
//! series files, the GA trace, and run.log. Output is timestamp-free so
//! identical runs produce identical bytes.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::EvaluationReport;

use super::Comparison;

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_writer(fs::File::create(path)?))
}

fn finish(mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn write_series(
    dir: &Path,
    name: &str,
    value_column: &str,
    comparison: &Comparison,
    value: impl Fn(&crate::metrics::ClassifierMetrics) -> String,
) -> Result<()> {
    let mut w = csv_writer(&dir.join(name))?;
    w.write_record(["method", "classifier", value_column])
        .map_err(csv_error)?;
    for run in &comparison.runs {
        for c in &run.report.classifiers {
            w.write_record([run.method.label(), c.classifier.id(), &value(c)])
                .map_err(csv_error)?;
        }
    }
    finish(w)
}

fn csv_error(e: csv::Error) -> Error {
    Error::internal(format!("csv write: {e}"))
}

/// Writes every artifact of a comparison under `dir`:
/// `report.json`, `report.csv`, `series/*.csv`, `trace/ga_trace.csv`, and
/// `run.log`.
pub fn write_outputs(dir: &Path, comparison: &Comparison) -> Result<()> {
    let series = dir.join("series");
    let trace = dir.join("trace");
    fs::create_dir_all(&series)?;
    fs::create_dir_all(&trace)?;

    let mut json = serde_json::to_string_pretty(comparison)
        .map_err(|e| Error::internal(format!("report serialize: {e}")))?;
    json.push('\n');
    fs::write(dir.join("report.json"), json)?;

    let mut report = csv_writer(&dir.join("report.csv"))?;
    report
        .write_record(EvaluationReport::csv_header())
        .map_err(csv_error)?;
    for run in &comparison.runs {
        for row in run.report.csv_rows() {
            report.write_record(&row).map_err(csv_error)?;
        }
    }
    finish(report)?;

    write_series(&series, "ms.csv", "ms", comparison, |c| c.ms.to_string())?;
    write_series(&series, "rae.csv", "rae", comparison, |c| c.rae.to_string())?;
    write_series(&series, "tp_rate.csv", "tp_rate", comparison, |c| c.rates.tp_rate.to_string())?;
    write_series(&series, "tn_rate.csv", "tn_rate", comparison, |c| c.rates.tn_rate.to_string())?;
    write_series(&series, "fp_rate.csv", "fp_rate", comparison, |c| c.rates.fp_rate.to_string())?;
    write_series(&series, "fn_rate.csv", "fn_rate", comparison, |c| c.rates.fn_rate.to_string())?;

    let mut group = csv_writer(&series.join("group.csv"))?;
    group.write_record(["method", "parameter", "value"]).map_err(csv_error)?;
    for run in &comparison.runs {
        let g = &run.report.group;
        for (parameter, value) in [
            ("ams", g.ams),
            ("arae", g.arae),
            ("atp_rate", g.atp_rate),
            ("atn_rate", g.atn_rate),
            ("afp_rate", g.afp_rate),
            ("afn_rate", g.afn_rate),
        ] {
            group
                .write_record([run.method.label(), parameter, &value.to_string()])
                .map_err(csv_error)?;
        }
    }
    finish(group)?;

    let mut ga_trace = csv_writer(&trace.join("ga_trace.csv"))?;
    ga_trace
        .write_record(["method", "generation", "best_fitness", "mean_fitness", "best_mask_size"])
        .map_err(csv_error)?;
    for run in &comparison.runs {
        if let Some(ga) = &run.ga {
            for g in &ga.trace {
                ga_trace
                    .write_record([
                        run.method.label(),
                        &g.generation.to_string(),
                        &g.best_fitness.to_string(),
                        &g.mean_fitness.to_string(),
                        &g.best_mask_size.to_string(),
                    ])
                    .map_err(csv_error)?;
            }
        }
    }
    finish(ga_trace)?;

    let mut log = String::new();
    log.push_str(&format!(
        "dataset: {} ({} instances, {} attributes)\nseed: {}\n",
        comparison.dataset, comparison.n_instances, comparison.n_attributes, comparison.seed
    ));
    for run in &comparison.runs {
        log.push('\n');
        for line in &run.log {
            log.push_str(line);
            log.push('\n');
        }
    }
    fs::write(dir.join("run.log"), log)?;
    Ok(())
}
