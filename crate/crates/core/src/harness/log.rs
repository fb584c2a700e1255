//! CSV metric logs.
//!
//! Layout: a schema comment line, a header row, one row per logged env step,
//! and optionally a trailing `# FAILED: ...` marker. Off-schedule fields are
//! empty strings. Floats use Rust's shortest round-trip formatting, so the
//! same values always produce the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const SCHEMA_LINE: &str = "# peer-lab metrics schema v1";
pub const FAILURE_PREFIX: &str = "# FAILED: ";

pub const COLUMNS: &[&str] = &[
    "seed",
    "env_step",
    "episode",
    "eval_return",
    "pe_loss",
    "peer_loss",
    "mean_similarity",
    "mean_bound",
    "mean_drd",
    "rep_cosine",
    "q_gap",
    "steps_to_goal",
    "degenerate_rep_count",
];

/// One log record. `None` renders as a blank field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricRow {
    pub seed: u64,
    pub env_step: u64,
    pub episode: u64,
    pub eval_return: Option<f64>,
    pub pe_loss: Option<f64>,
    pub peer_loss: Option<f64>,
    pub mean_similarity: Option<f64>,
    pub mean_bound: Option<f64>,
    pub mean_drd: Option<f64>,
    pub rep_cosine: Option<f64>,
    pub q_gap: Option<f64>,
    pub steps_to_goal: Option<u64>,
    pub degenerate_rep_count: Option<u64>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl MetricRow {
    pub fn to_csv_line(&self) -> String {
        [
            self.seed.to_string(),
            self.env_step.to_string(),
            self.episode.to_string(),
            opt(&self.eval_return),
            opt(&self.pe_loss),
            opt(&self.peer_loss),
            opt(&self.mean_similarity),
            opt(&self.mean_bound),
            opt(&self.mean_drd),
            opt(&self.rep_cosine),
            opt(&self.q_gap),
            opt(&self.steps_to_goal),
            opt(&self.degenerate_rep_count),
        ]
        .join(",")
    }

    /// Copy every field that is set in `other` into `self`.
    pub fn merge(&mut self, other: &MetricRow) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            eval_return,
            pe_loss,
            peer_loss,
            mean_similarity,
            mean_bound,
            mean_drd,
            rep_cosine,
            q_gap,
            steps_to_goal,
            degenerate_rep_count
        );
        self.episode = other.episode;
    }
}

/// Accumulates events and emits at most one row per env step.
#[derive(Debug, Default)]
pub struct RowLog {
    rows: Vec<MetricRow>,
}

impl RowLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record fields for `row.env_step`, merging with the previous record
    /// when it has the same step.
    pub fn record(&mut self, row: MetricRow) {
        match self.rows.last_mut() {
            Some(last) if last.env_step == row.env_step => last.merge(&row),
            Some(last) => {
                debug_assert!(
                    last.env_step < row.env_step,
                    "rows must be ordered by env_step"
                );
                self.rows.push(row)
            }
            None => self.rows.push(row),
        }
    }

    pub fn rows(&self) -> &[MetricRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<MetricRow> {
        self.rows
    }
}

/// Render a full CSV document.
pub fn render_csv(rows: &[MetricRow], failure: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    if let Some(msg) = failure {
        let _ = writeln!(out, "{FAILURE_PREFIX}{}", msg.replace(['\n', '\r'], " "));
    }
    out
}

pub fn write_csv(path: &Path, rows: &[MetricRow], failure: Option<&str>) -> Result<()> {
    std::fs::write(path, render_csv(rows, failure)).map_err(|e| Error::io(path, e))
}

/// A parsed log: column names and nullable numeric cells.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub failure: Option<String>,
}

impl LogTable {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format(format!("missing column `{name}`")))
    }

    /// `(env_step, value)` pairs for every row where `name` is non-blank.
    pub fn series(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let col = self.column_index(name)?;
        let step = self.column_index("env_step")?;
        Ok(self
            .rows
            .iter()
            .filter_map(|r| Some((r[step]?, r[col]?)))
            .collect())
    }

    /// Non-blank values of one column, in row order.
    pub fn values(&self, name: &str) -> Result<Vec<f64>> {
        let col = self.column_index(name)?;
        Ok(self.rows.iter().filter_map(|r| r[col]).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<LogTable> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut failure = None;
    for (lineno, line) in text.lines().enumerate() {
        if let Some(msg) = line.strip_prefix(FAILURE_PREFIX) {
            failure = Some(msg.to_string());
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(str::to_string).collect()),
            Some(cols) => {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() != cols.len() {
                    return Err(Error::Format(format!(
                        "line {}: {} fields, header has {}",
                        lineno + 1,
                        cells.len(),
                        cols.len()
                    )));
                }
                let row = cells
                    .iter()
                    .map(|c| {
                        if c.is_empty() {
                            Ok(None)
                        } else {
                            c.parse::<f64>().map(Some).map_err(|e| {
                                Error::Format(format!("line {}: `{c}`: {e}", lineno + 1))
                            })
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::Format("missing header row".into()))?;
    Ok(LogTable {
        columns,
        rows,
        failure,
    })
}

pub fn read_csv(path: &Path) -> Result<LogTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let rows = vec![
            MetricRow {
                seed: 3,
                env_step: 10,
                episode: 1,
                pe_loss: Some(0.25),
                degenerate_rep_count: Some(0),
                ..Default::default()
            },
            MetricRow {
                seed: 3,
                env_step: 20,
                episode: 2,
                eval_return: Some(-1.5),
                ..Default::default()
            },
        ];
        let text = render_csv(&rows, Some("boom\nline"));
        assert!(text.starts_with(SCHEMA_LINE));
        assert!(text.contains("3,10,1,,0.25,,,,,,,,0\n"));
        assert!(!text.contains('\r'));
        let t = parse_csv(&text).unwrap();
        assert_eq!(t.columns, COLUMNS);
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.failure.as_deref(), Some("boom line"));
        assert_eq!(t.series("eval_return").unwrap(), vec![(20.0, -1.5)]);
        assert_eq!(t.values("pe_loss").unwrap(), vec![0.25]);
        assert!(matches!(t.series("nope"), Err(Error::Format(_))));
    }

    #[test]
    fn row_log_merges_same_step() {
        let mut log = RowLog::new();
        log.record(MetricRow {
            env_step: 5,
            pe_loss: Some(1.0),
            ..Default::default()
        });
        log.record(MetricRow {
            env_step: 5,
            episode: 1,
            eval_return: Some(2.0),
            ..Default::default()
        });
        log.record(MetricRow {
            env_step: 6,
            ..Default::default()
        });
        assert_eq!(log.rows().len(), 2);
        assert_eq!(log.rows()[0].pe_loss, Some(1.0));
        assert_eq!(log.rows()[0].eval_return, Some(2.0));
        assert_eq!(log.rows()[0].episode, 1);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let text = format!("{}\n1,2\n", COLUMNS.join(","));
        assert!(matches!(parse_csv(&text), Err(Error::Format(_))));
        assert!(matches!(
            parse_csv("# only comments\n"),
            Err(Error::Format(_))
        ));
    }
}
