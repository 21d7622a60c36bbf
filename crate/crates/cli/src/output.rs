//! Result records and their CSV / JSON renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{ExperimentConfig, Format};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Columns that index rows rather than measure anything.
const INDEX_COLUMNS: &[&str] = &["sample", "kind", "t"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub column: String,
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
    /// Fraction of rows strictly above the record's threshold.
    pub fraction_above: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub seed: u64,
    pub version: String,
    pub threshold: f64,
    pub config: Vec<(String, String)>,
    /// Scalar facts about the run, e.g. a fitted parameter.
    pub notes: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<ColumnSummary>,
}

fn summarize(name: &str, values: &[f64], threshold: f64) -> ColumnSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    ColumnSummary {
        column: name.to_string(),
        min: sorted.first().copied().unwrap_or(f64::NAN),
        median,
        mean: values.iter().sum::<f64>() / n as f64,
        max: sorted.last().copied().unwrap_or(f64::NAN),
        fraction_above: values.iter().filter(|&&v| v > threshold).count() as f64 / n as f64,
    }
}

impl ResultRecord {
    pub fn new(
        config: &ExperimentConfig,
        columns: &[&str],
        rows: Vec<Vec<f64>>,
        notes: Vec<(String, f64)>,
    ) -> Self {
        let summary = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| !INDEX_COLUMNS.contains(c))
            .map(|(k, c)| {
                let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
                summarize(c, &col, config.threshold)
            })
            .collect();
        let mut echo = config.echo.clone();
        echo.retain(|(k, _)| k != "seed");
        echo.insert(0, ("seed".into(), config.seed.to_string()));
        Self {
            experiment: config.experiment.id().to_string(),
            seed: config.seed,
            version: VERSION.to_string(),
            threshold: config.threshold,
            config: echo,
            notes,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
            summary,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn summary_of(&self, name: &str) -> Option<&ColumnSummary> {
        self.summary.iter().find(|s| s.column == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# entrel {}", self.version);
        let _ = writeln!(out, "# experiment = {}", self.experiment);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# config {k} = {v}");
        }
        let _ = writeln!(out, "# threshold = {:?}", self.threshold);
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# note {k} = {v:?}");
        }
        for s in &self.summary {
            let _ = writeln!(
                out,
                "# summary {} min={:?} median={:?} mean={:?} max={:?} fraction_above={:?}",
                s.column, s.min, s.median, s.mean, s.max, s.fraction_above
            );
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}
