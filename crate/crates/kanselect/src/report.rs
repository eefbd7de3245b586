//! Benchmark report assembly and serialization: per-cell scores, aggregate
//! tables shaped like the appendix tables, and long-format plot data.

use crate::baselines::SelectorKind;
use crate::data::Task;
use crate::error::{Error, Result};
use crate::predictors::PredictorKind;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One benchmark measurement: selector × retention × predictor × fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreCell {
    pub selector: SelectorKind,
    /// Retention percent; the all-features baseline runs at 100.
    pub retention: u32,
    pub predictor: PredictorKind,
    pub fold: usize,
    /// Macro-F1 or R²; absent when the cell failed.
    pub score: Option<f64>,
    /// Failure description when the cell could not be computed.
    pub error: Option<String>,
}

/// The feature subset a selector chose on one training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub selector: SelectorKind,
    pub retention: u32,
    pub fold: usize,
    /// Selected source-feature indices, ascending.
    pub sources: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub selector: SelectorKind,
    pub retention: u32,
    pub predictor: PredictorKind,
    /// Mean over folds with a score; `None` when every fold failed.
    pub mean: Option<f64>,
    pub folds_counted: usize,
}

/// Per-selector average across retentions, the quantity the summary figures
/// plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionAverage {
    pub selector: SelectorKind,
    pub predictor: PredictorKind,
    pub mean: Option<f64>,
    /// Sample standard deviation of the per-fold retention-averaged scores,
    /// divided by sqrt(F).
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub dataset: String,
    pub task: Task,
    pub n_samples: usize,
    pub n_sources: usize,
    pub n_encoded: usize,
    pub folds: usize,
    pub retentions: Vec<u32>,
    pub seed: u64,
    pub selectors: Vec<SelectorKind>,
    pub predictors: Vec<PredictorKind>,
    /// Hash of the run configuration document, when launched from one.
    pub config_hash: Option<String>,
}

/// Full benchmark output: metadata, raw cells, chosen subsets, and the
/// aggregates derived from the cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub metadata: ReportMetadata,
    pub cells: Vec<ScoreCell>,
    pub selections: Vec<SelectionRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub retention_averages: Vec<RetentionAverage>,
}

impl BenchmarkReport {
    /// Build aggregates and retention averages from raw cells.
    pub fn assemble(
        metadata: ReportMetadata,
        mut cells: Vec<ScoreCell>,
        mut selections: Vec<SelectionRecord>,
    ) -> BenchmarkReport {
        cells.sort_by_key(|c| (c.selector, c.retention, c.predictor, c.fold));
        selections.sort_by_key(|s| (s.selector, s.retention, s.fold));

        let mut grouped: BTreeMap<(SelectorKind, u32, PredictorKind), Vec<f64>> = BTreeMap::new();
        for cell in &cells {
            if let Some(score) = cell.score {
                grouped
                    .entry((cell.selector, cell.retention, cell.predictor))
                    .or_default()
                    .push(score);
            }
        }
        let mut keys: std::collections::BTreeSet<(SelectorKind, u32, PredictorKind)> =
            cells.iter().map(|c| (c.selector, c.retention, c.predictor)).collect();
        keys.extend(grouped.keys().cloned());
        let aggregates: Vec<AggregateRow> = keys
            .into_iter()
            .map(|key| {
                let scores = grouped.get(&key);
                let folds_counted = scores.map_or(0, |s| s.len());
                let mean = scores.and_then(|s| {
                    if s.is_empty() {
                        None
                    } else {
                        Some(s.iter().sum::<f64>() / s.len() as f64)
                    }
                });
                AggregateRow {
                    selector: key.0,
                    retention: key.1,
                    predictor: key.2,
                    mean,
                    folds_counted,
                }
            })
            .collect();

        // Per (selector, predictor): average each fold's scores across
        // retentions, then take mean and stderr over folds.
        let mut fold_values: BTreeMap<(SelectorKind, PredictorKind), BTreeMap<usize, Vec<f64>>> =
            BTreeMap::new();
        for cell in &cells {
            if let Some(score) = cell.score {
                fold_values
                    .entry((cell.selector, cell.predictor))
                    .or_default()
                    .entry(cell.fold)
                    .or_default()
                    .push(score);
            }
        }
        let retention_averages: Vec<RetentionAverage> = fold_values
            .into_iter()
            .map(|((selector, predictor), per_fold)| {
                let fold_means: Vec<f64> = per_fold
                    .values()
                    .map(|scores| scores.iter().sum::<f64>() / scores.len() as f64)
                    .collect();
                let f = fold_means.len() as f64;
                let mean = fold_means.iter().sum::<f64>() / f;
                let stderr = if fold_means.len() > 1 {
                    let var = fold_means
                        .iter()
                        .map(|v| (v - mean) * (v - mean))
                        .sum::<f64>()
                        / (f - 1.0);
                    Some(var.sqrt() / f.sqrt())
                } else {
                    None
                };
                RetentionAverage {
                    selector,
                    predictor,
                    mean: Some(mean),
                    stderr,
                }
            })
            .collect();

        BenchmarkReport {
            metadata,
            cells,
            selections,
            aggregates,
            retention_averages,
        }
    }

    /// Check that stored aggregates equal a fresh recomputation from the cells.
    pub fn verify_aggregates(&self) -> Result<()> {
        let fresh = BenchmarkReport::assemble(
            self.metadata.clone(),
            self.cells.clone(),
            self.selections.clone(),
        );
        if fresh.aggregates != self.aggregates || fresh.retention_averages != self.retention_averages
        {
            return Err(Error::InvalidConfig(
                "aggregates do not match their cells".into(),
            ));
        }
        Ok(())
    }

    pub fn aggregate(
        &self,
        selector: SelectorKind,
        retention: u32,
        predictor: PredictorKind,
    ) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.selector == selector && a.retention == retention && a.predictor == predictor)
            .and_then(|a| a.mean)
    }

    pub fn selection(
        &self,
        selector: SelectorKind,
        retention: u32,
        fold: usize,
    ) -> Option<&[usize]> {
        self.selections
            .iter()
            .find(|s| s.selector == selector && s.retention == retention && s.fold == fold)
            .map(|s| s.sources.as_slice())
    }
}

/// A predictors × selectors grid of mean scores for one retention level, in
/// the appendix-table layout (an "All Features" column first).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub retention: u32,
    /// Column headers after the leading "Models" label.
    pub columns: Vec<String>,
    /// One row per predictor: (row label, per-column means).
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

/// Selector column order for tables: "All Features" first, the rest by their
/// display names.
fn column_order(report: &BenchmarkReport) -> Vec<SelectorKind> {
    let mut selectors: Vec<SelectorKind> = report
        .metadata
        .selectors
        .iter()
        .cloned()
        .filter(|s| *s != SelectorKind::AllFeatures)
        .collect();
    selectors.sort_by_key(|s| s.display_name());
    selectors.dedup();
    let mut columns = vec![SelectorKind::AllFeatures];
    columns.extend(selectors);
    columns
}

/// Mean-score table for one retention level.
pub fn to_table(report: &BenchmarkReport, retention: u32) -> Result<Table> {
    if !report.metadata.retentions.contains(&retention) {
        return Err(Error::UnknownRetention(retention));
    }
    let selectors = column_order(report);
    let mut predictors = report.metadata.predictors.clone();
    predictors.sort_by_key(|p| p.display_name(report.metadata.task));
    predictors.dedup();

    let columns: Vec<String> = selectors
        .iter()
        .map(|s| s.display_name().to_string())
        .collect();
    let rows = predictors
        .iter()
        .map(|&p| {
            let values = selectors
                .iter()
                .map(|&s| {
                    let r = if s == SelectorKind::AllFeatures { 100 } else { retention };
                    report.aggregate(s, r, p)
                })
                .collect();
            (p.display_name(report.metadata.task).to_string(), values)
        })
        .collect();
    Ok(Table {
        retention,
        columns,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    PlotData,
}

/// Serialize the report: `json` is the canonical dump, `csv` is one
/// appendix-style table per retention level, `plotdata` is a long-format
/// (selector, predictor, mean, stderr) file for external plotting.
pub fn emit(report: &BenchmarkReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(report)?),
        Format::Csv => {
            let mut out = String::new();
            for &retention in &report.metadata.retentions {
                let table = to_table(report, retention)?;
                out.push_str(&format!("# retention={retention}%\n"));
                out.push_str("Models");
                for c in &table.columns {
                    out.push(',');
                    out.push_str(c);
                }
                out.push('\n');
                for (label, values) in &table.rows {
                    out.push_str(label);
                    for v in values {
                        out.push(',');
                        match v {
                            Some(v) => out.push_str(&format!("{v:.4}")),
                            None => out.push_str("NA"),
                        }
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
            Ok(out.into_bytes())
        }
        Format::PlotData => {
            let mut out = String::from("selector,predictor,mean,stderr\n");
            for row in &report.retention_averages {
                let mean = row
                    .mean
                    .map_or("NA".to_string(), |v| format!("{v:.6}"));
                let stderr = row
                    .stderr
                    .map_or("NA".to_string(), |v| format!("{v:.6}"));
                out.push_str(&format!(
                    "{},{},{mean},{stderr}\n",
                    row.selector.id(),
                    row.predictor.id(),
                ));
            }
            Ok(out.into_bytes())
        }
    }
}
