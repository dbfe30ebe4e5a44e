use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::AnnotationRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guesses the format from a file extension (`.jsonl`/`.json` vs anything else).
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

/// Maps logical fields to the column names (CSV) or keys (JSONL) of an input
/// file. Defaults match the schema written by the synthetic generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub post_text: String,
    pub offensive: String,
    pub intent_to_offend: String,
    pub target_group: String,
    pub stereotype: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            post_text: "post_text".into(),
            offensive: "offensive".into(),
            intent_to_offend: "intent_to_offend".into(),
            target_group: "target_group".into(),
            stereotype: "stereotype".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    /// 1-based record number (data rows, header excluded).
    pub record: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadReport {
    pub rows: Vec<AnnotationRow>,
    pub rejected: Vec<RejectedRow>,
}

impl LoadReport {
    pub fn parsed(&self) -> usize {
        self.rows.len()
    }
}

/// Reads annotator rows. Rows that fail validation are collected in
/// [`LoadReport::rejected`] with the reason; file-level problems (missing
/// file, missing required CSV column) are errors.
pub fn load_rows(path: &Path, format: Format, columns: &ColumnMap) -> Result<LoadReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => load_csv(file, columns),
        Format::Jsonl => load_jsonl(path, file, columns),
    }
}

fn load_csv(file: File, columns: &ColumnMap) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    // An empty file has no header at all; treat it as zero records.
    if headers.is_empty() {
        return Ok(LoadReport {
            rows: Vec::new(),
            rejected: Vec::new(),
        });
    }
    let text_idx = find(&columns.post_text).ok_or_else(|| Error::MissingField(columns.post_text.clone()))?;
    let off_idx = find(&columns.offensive).ok_or_else(|| Error::MissingField(columns.offensive.clone()))?;
    let int_idx = find(&columns.intent_to_offend)
        .ok_or_else(|| Error::MissingField(columns.intent_to_offend.clone()))?;
    let group_idx = find(&columns.target_group);
    let stereo_idx = find(&columns.stereotype);

    let mut report = LoadReport {
        rows: Vec::new(),
        rejected: Vec::new(),
    };
    for (i, record) in reader.records().enumerate() {
        let record_no = i + 1;
        let parsed = record.map_err(|e| e.to_string()).and_then(|rec| {
            let get = |idx: usize| rec.get(idx).unwrap_or("").to_string();
            let row = AnnotationRow {
                post_text: get(text_idx),
                offensive: parse_label(&get(off_idx), &columns.offensive)?,
                intent_to_offend: parse_label(&get(int_idx), &columns.intent_to_offend)?,
                target_group: group_idx.map(get).and_then(non_empty),
                stereotype: stereo_idx.map(get).and_then(non_empty),
            };
            row.validate().map_err(|e| e.to_string())?;
            Ok(row)
        });
        match parsed {
            Ok(row) => report.rows.push(row),
            Err(reason) => report.rejected.push(RejectedRow {
                record: record_no,
                reason,
            }),
        }
    }
    Ok(report)
}

fn load_jsonl(path: &Path, file: File, columns: &ColumnMap) -> Result<LoadReport> {
    let mut report = LoadReport {
        rows: Vec::new(),
        rejected: Vec::new(),
    };
    let mut record_no = 0;
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        record_no += 1;
        match parse_json_row(&line, columns) {
            Ok(row) => report.rows.push(row),
            Err(reason) => report.rejected.push(RejectedRow {
                record: record_no,
                reason,
            }),
        }
    }
    Ok(report)
}

fn parse_json_row(line: &str, columns: &ColumnMap) -> std::result::Result<AnnotationRow, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let field = |key: &str| value.get(key).filter(|v| !v.is_null());
    let text = field(&columns.post_text)
        .and_then(Value::as_str)
        .ok_or_else(|| format!("missing required field `{}`", columns.post_text))?;
    let label = |key: &str| -> std::result::Result<f64, String> {
        match field(key) {
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| format!("bad number in `{key}`")),
            Some(Value::String(s)) => parse_label(s, key),
            Some(_) => Err(format!("field `{key}` is not numeric")),
            None => Err(format!("missing required field `{key}`")),
        }
    };
    let text_field = |key: &str| field(key).and_then(Value::as_str).map(str::to_string).and_then(non_empty);
    let row = AnnotationRow {
        post_text: text.to_string(),
        offensive: label(&columns.offensive)?,
        intent_to_offend: label(&columns.intent_to_offend)?,
        target_group: text_field(&columns.target_group),
        stereotype: text_field(&columns.stereotype),
    };
    row.validate().map_err(|e| e.to_string())?;
    Ok(row)
}

fn parse_label(raw: &str, name: &str) -> std::result::Result<f64, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(format!("missing value for `{name}`"));
    }
    raw.parse::<f64>()
        .map_err(|_| format!("non-numeric value `{raw}` for `{name}`"))
}

fn non_empty(s: String) -> Option<String> {
    let t = s.trim();
    (!t.is_empty()).then(|| t.to_string())
}

/// Writes rows in the same schema `load_rows` reads.
pub fn write_rows(path: &Path, rows: &[AnnotationRow], format: Format, columns: &ColumnMap) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(file);
            w.write_record([
                &columns.post_text,
                &columns.offensive,
                &columns.intent_to_offend,
                &columns.target_group,
                &columns.stereotype,
            ])?;
            for r in rows {
                w.write_record([
                    r.post_text.clone(),
                    r.offensive.to_string(),
                    r.intent_to_offend.to_string(),
                    r.target_group.clone().unwrap_or_default(),
                    r.stereotype.clone().unwrap_or_default(),
                ])?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        Format::Jsonl => {
            let mut w = BufWriter::new(file);
            for r in rows {
                let mut obj = serde_json::Map::new();
                obj.insert(columns.post_text.clone(), r.post_text.clone().into());
                obj.insert(columns.offensive.clone(), r.offensive.into());
                obj.insert(columns.intent_to_offend.clone(), r.intent_to_offend.into());
                obj.insert(columns.target_group.clone(), r.target_group.clone().into());
                obj.insert(columns.stereotype.clone(), r.stereotype.clone().into());
                serde_json::to_writer(&mut w, &Value::Object(obj))?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    Ok(())
}
