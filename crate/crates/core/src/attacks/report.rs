use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttackKind, AttackOutcome};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    /// Sorted in column order.
    pub outcomes: Vec<AttackOutcome>,
}

impl ReportRow {
    pub fn get(&self, kind: AttackKind) -> Option<&AttackOutcome> {
        self.outcomes.iter().find(|o| o.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AblationReport {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    model: String,
    attack: AttackKind,
    clean_accuracy: f64,
    attacked_accuracy: f64,
    degradation_points: f64,
    n_examples: usize,
    n_skipped: usize,
}

impl AblationReport {
    pub fn row(&self, model: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// Attack kinds present in any row, in column order.
    pub fn columns(&self) -> Vec<AttackKind> {
        let kinds: BTreeSet<AttackKind> = self.rows.iter().flat_map(|r| r.outcomes.iter().map(|o| o.kind)).collect();
        kinds.into_iter().collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            for o in &row.outcomes {
                w.serialize(CsvRecord {
                    model: row.model.clone(),
                    attack: o.kind,
                    clean_accuracy: o.clean_accuracy,
                    attacked_accuracy: o.attacked_accuracy,
                    degradation_points: o.degradation_points,
                    n_examples: o.n_examples,
                    n_skipped: o.n_skipped,
                })?;
            }
        }
        if self.rows.iter().all(|r| r.outcomes.is_empty()) {
            w.write_record([
                "model",
                "attack",
                "clean_accuracy",
                "attacked_accuracy",
                "degradation_points",
                "n_examples",
                "n_skipped",
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses [`AblationReport::to_csv`] output. Rows keep first-appearance
    /// order.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut report = AblationReport::default();
        for rec in rdr.deserialize::<CsvRecord>() {
            let rec = rec?;
            let outcome = AttackOutcome {
                kind: rec.attack,
                clean_accuracy: rec.clean_accuracy,
                attacked_accuracy: rec.attacked_accuracy,
                degradation_points: rec.degradation_points,
                n_examples: rec.n_examples,
                n_skipped: rec.n_skipped,
            };
            match report.rows.iter_mut().find(|r| r.model == rec.model) {
                Some(row) => row.outcomes.push(outcome),
                None => report.rows.push(ReportRow {
                    model: rec.model,
                    outcomes: vec![outcome],
                }),
            }
        }
        for row in &mut report.rows {
            row.outcomes.sort_by_key(|o| o.kind);
        }
        Ok(report)
    }

    /// Appends rows of `other`; a row with an existing model name replaces
    /// the earlier one.
    pub fn merge(&mut self, other: AblationReport) {
        for row in other.rows {
            match self.rows.iter_mut().find(|r| r.model == row.model) {
                Some(existing) => *existing = row,
                None => self.rows.push(row),
            }
        }
    }

    /// Aligned plain-text table: degradation points, then clean accuracy,
    /// then admitted/skipped counts.
    pub fn to_text(&self) -> String {
        let cols = self.columns();
        let name_w = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let section = |out: &mut String, title: &str, cell: &dyn Fn(&AttackOutcome) -> String| {
            let _ = writeln!(out, "{title}");
            let _ = write!(out, "{:<name_w$}", "model");
            for c in &cols {
                let _ = write!(out, "  {:>9}", c.name());
            }
            out.push('\n');
            for row in &self.rows {
                let _ = write!(out, "{:<name_w$}", row.model);
                for c in &cols {
                    let s = row.get(*c).map_or_else(|| "-".to_string(), cell);
                    let _ = write!(out, "  {s:>9}");
                }
                out.push('\n');
            }
        };
        section(&mut out, "Accuracy degradation (points)", &|o| format!("{:.1}", o.degradation_points));
        out.push('\n');
        section(&mut out, "Clean accuracy", &|o| format!("{:.4}", o.clean_accuracy));
        out.push('\n');
        section(&mut out, "Attacked accuracy", &|o| format!("{:.4}", o.attacked_accuracy));
        out.push('\n');
        section(&mut out, "Examples (skipped)", &|o| format!("{}({})", o.n_examples, o.n_skipped));
        out
    }

    pub fn write(&self, csv_path: &Path, text_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv()?).map_err(|e| Error::io(csv_path, e))?;
        std::fs::write(text_path, self.to_text()).map_err(|e| Error::io(text_path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> AblationReport {
        let row = |name: &str, d: f64| ReportRow {
            model: name.into(),
            outcomes: AttackKind::ALL
                .iter()
                .map(|&k| AttackOutcome::new(k, 0.9, 0.9 - d, 100, 0))
                .collect(),
        };
        AblationReport {
            rows: vec![row("HS", 0.2), row("SIE", 0.05)],
        }
    }

    #[test]
    fn csv_roundtrip() {
        let r = report();
        let back = AblationReport::from_csv(&r.to_csv().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn text_layout() {
        let text = report().to_text();
        let header = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = header.split_whitespace().collect();
        assert_eq!(cols, vec!["model", "LOO", "LOO-S", "AA-S", "AA-R", "AA-Q"]);
        let hs: Vec<&str> = text.lines().nth(2).unwrap().split_whitespace().collect();
        assert_eq!(hs.len(), 6);
        assert_eq!(hs[1], "20.0");
        assert!(text.contains("Clean accuracy"));
    }

    #[test]
    fn degradation_recomputable() {
        for row in report().rows {
            for o in row.outcomes {
                assert!((o.degradation_points - 100.0 * (o.clean_accuracy - o.attacked_accuracy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn subset_columns() {
        let mut r = report();
        for row in &mut r.rows {
            row.outcomes.retain(|o| matches!(o.kind, AttackKind::Loo | AttackKind::AaQ));
        }
        assert_eq!(r.columns(), vec![AttackKind::Loo, AttackKind::AaQ]);
    }
}
