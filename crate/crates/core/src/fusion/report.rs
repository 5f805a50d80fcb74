//! Results table in text and CSV form, with the published figures carried
//! alongside as reference rows.

use std::fmt::Write as _;

pub const NOT_REPRODUCED: &str = "reference, not reproduced";
const CSV_HEADER: &str = "row_name,overall,truthful_acc,deceptive_acc,source";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSource {
    Computed,
    Published,
}

impl RowSource {
    pub fn as_str(self) -> &'static str {
        match self {
            RowSource::Computed => "computed",
            RowSource::Published => "paper_reference",
        }
    }
}

/// Accuracies are fractions in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub overall: f64,
    pub truthful: Option<f64>,
    pub deceptive: Option<f64>,
    pub source: RowSource,
}

fn reference(name: &str, overall: f64, truthful: Option<f64>, deceptive: Option<f64>) -> ReportRow {
    ReportRow {
        name: name.to_string(),
        overall: overall / 100.0,
        truthful: truthful.map(|v| v / 100.0),
        deceptive: deceptive.map(|v| v / 100.0),
        source: RowSource::Published,
    }
}

/// Published accuracies, in table order.
pub fn reference_rows() -> Vec<ReportRow> {
    vec![
        reference("human_annotators_baseline", 55.93, None, None),
        reference("manual_gestures_lexical_baseline", 75.20, None, None),
        reference("lexical", 66.12, None, None),
        reference("acoustic", 34.23, None, None),
        reference("visual", 67.20, None, None),
        reference("early_fusion", 78.95, Some(81.10), Some(76.80)),
        reference("decision_fusion", 76.12, None, None),
        reference("utterance_fusion", 74.02, None, None),
    ]
}

/// Interleaves computed rows with the reference rows: the two baselines
/// first, then each method's computed row followed by its published value.
pub fn with_reference_rows(computed: &[ReportRow]) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for r in reference_rows() {
        rows.extend(computed.iter().filter(|c| c.name == r.name).cloned());
        rows.push(r);
    }
    let known: Vec<String> = reference_rows().into_iter().map(|r| r.name).collect();
    rows.extend(computed.iter().filter(|c| !known.contains(&c.name)).cloned());
    rows
}

fn percent(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn optional_percent(v: Option<f64>) -> String {
    v.map(percent).unwrap_or_default()
}

pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.name, percent(r.overall), optional_percent(r.truthful), optional_percent(r.deceptive), r.source.as_str()).unwrap();
    }
    out
}

pub fn render_text(rows: &[ReportRow]) -> String {
    let header = ["row", "overall %", "truthful %", "deceptive %", "source"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            let source = match r.source {
                RowSource::Computed => "computed".to_string(),
                RowSource::Published => NOT_REPRODUCED.to_string(),
            };
            [r.name.clone(), percent(r.overall), optional_percent(r.truthful), optional_percent(r.deceptive), source]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[String]| {
        let mut s = format!("{:<w$}", row[0], w = widths[0]);
        for k in 1..4 {
            write!(s, "  {:>w$}", row[k], w = widths[k]).unwrap();
        }
        write!(s, "  {}", row[4]).unwrap();
        s.trim_end().to_string()
    };
    let mut out = String::new();
    writeln!(out, "{}", line(&header.map(String::from))).unwrap();
    writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 8)).unwrap();
    for row in &cells {
        writeln!(out, "{}", line(row)).unwrap();
    }
    out
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>, String> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| format!("line {line}: {e}"))?;
        let value = |k: usize| -> Result<Option<f64>, String> {
            let cell = record.get(k).unwrap_or("").trim();
            if cell.is_empty() {
                return Ok(None);
            }
            cell.parse::<f64>().map(|v| Some(v / 100.0)).map_err(|_| format!("line {line}: `{cell}` is not a number"))
        };
        let source = match record.get(4) {
            Some("computed") => RowSource::Computed,
            Some("paper_reference") => RowSource::Published,
            other => return Err(format!("line {line}: unknown source `{}`", other.unwrap_or(""))),
        };
        rows.push(ReportRow {
            name: record.get(0).unwrap_or("").to_string(),
            overall: value(1)?.ok_or_else(|| format!("line {line}: overall accuracy is missing"))?,
            truthful: value(2)?,
            deceptive: value(3)?,
            source,
        });
    }
    Ok(rows)
}
