//! Experiment rows and their CSV / markdown renderings.

use std::cmp::Ordering;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact CSV header of an experiment report.
pub const CSV_HEADER: [&str; 11] = [
    "function",
    "point",
    "set",
    "h",
    "delta_s",
    "rer_diag",
    "abs_err_diag",
    "rer_grad",
    "bound_total",
    "bound_cross",
    "evals",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Markdown),
            other => Err(Error::Parse(format!("unknown format `{other}` (expected csv or md)"))),
        }
    }
}

/// One configuration `(function, point, set, h)` and what was measured there.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub function: String,
    pub point: Vec<f64>,
    pub set: String,
    pub h: f64,
    pub delta_s: f64,
    /// `None` when the true Hessian diagonal is zero.
    pub rer_diag: Option<f64>,
    pub abs_err_diag: f64,
    /// `None` when the true gradient is zero.
    pub rer_grad: Option<f64>,
    pub bound_total: Option<f64>,
    /// The bound's cross term `2 Σ |(ŝⁱ)ᵀ U ŝⁱ|`.
    pub bound_cross: Option<f64>,
    pub evals: usize,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn format_point(p: &[f64]) -> String {
    p.iter().map(|v| format_number(*v)).collect::<Vec<_>>().join(";")
}

fn short(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into())
}

impl ReportRow {
    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.function.clone(),
            format_point(&self.point),
            self.set.clone(),
            format_number(self.h),
            format_number(self.delta_s),
            format_opt(self.rer_diag),
            format_number(self.abs_err_diag),
            format_opt(self.rer_grad),
            format_opt(self.bound_total),
            format_opt(self.bound_cross),
            self.evals.to_string(),
        ]
    }

    fn markdown_fields(&self) -> Vec<String> {
        let point = self.point.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ");
        vec![
            self.function.clone(),
            format!("({point})"),
            self.set.clone(),
            format!("{:.3e}", self.h),
            format!("{:.3e}", self.delta_s),
            short(self.rer_diag),
            format!("{:.3e}", self.abs_err_diag),
            short(self.rer_grad),
            short(self.bound_total),
            short(self.bound_cross),
            self.evals.to_string(),
        ]
    }

    fn from_fields(fields: &[&str]) -> Result<Self> {
        if fields.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!(
                "report row has {} fields, expected {}",
                fields.len(),
                CSV_HEADER.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number `{s}`: {e}")))
        };
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        Ok(ReportRow {
            function: fields[0].to_string(),
            point: fields[1].split(';').map(num).collect::<Result<_>>()?,
            set: fields[2].to_string(),
            h: num(fields[3])?,
            delta_s: num(fields[4])?,
            rer_diag: opt(fields[5])?,
            abs_err_diag: num(fields[6])?,
            rer_grad: opt(fields[7])?,
            bound_total: opt(fields[8])?,
            bound_cross: opt(fields[9])?,
            evals: fields[10]
                .parse()
                .map_err(|e| Error::Parse(format!("bad evaluation count `{}`: {e}", fields[10])))?,
        })
    }
}

fn set_rank(name: &str) -> u8 {
    match name {
        "cb" => 0,
        "rb" => 1,
        "cmpb" => 2,
        "rmpb" => 3,
        _ => 4,
    }
}

fn compare_points(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub format: Format,
}

impl ExperimentReport {
    /// Builds a report with rows ordered by function, point, set and
    /// descending `h`.
    pub fn new(mut rows: Vec<ReportRow>, format: Format) -> Self {
        rows.sort_by(|a, b| {
            a.function
                .cmp(&b.function)
                .then_with(|| compare_points(&a.point, &b.point))
                .then_with(|| set_rank(&a.set).cmp(&set_rank(&b.set)))
                .then_with(|| a.set.cmp(&b.set))
                .then_with(|| b.h.total_cmp(&a.h))
        });
        ExperimentReport { rows, format }
    }

    pub fn render(&self) -> String {
        match self.format {
            Format::Csv => self.to_csv(),
            Format::Markdown => self.to_markdown(),
        }
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self.rows.iter().map(ReportRow::csv_fields).collect();
        write_csv(&CSV_HEADER, &rows)
    }

    pub fn to_markdown(&self) -> String {
        let rows: Vec<Vec<String>> = self.rows.iter().map(ReportRow::markdown_fields).collect();
        markdown_table(&CSV_HEADER, &rows)
    }

    /// Parses the first CSV block of `text` (up to the first blank line).
    pub fn parse_csv(text: &str) -> Result<Self> {
        let block: String = text
            .lines()
            .take_while(|l| !l.trim().is_empty())
            .map(|l| format!("{l}\n"))
            .collect();
        let mut reader = csv::ReaderBuilder::new().from_reader(block.as_bytes());
        let header = reader.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Parse(format!(
                "unexpected report header `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let fields: Vec<&str> = record.iter().collect();
            rows.push(ReportRow::from_fields(&fields)?);
        }
        Ok(ExperimentReport {
            rows,
            format: Format::Csv,
        })
    }
}

pub(crate) fn write_csv<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    writer
        .write_record(header.iter().map(AsRef::as_ref))
        .expect("in-memory write");
    for row in rows {
        writer.write_record(row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub(crate) fn markdown_table<S: AsRef<str>>(header: &[S], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let line = |cells: Vec<&str>| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(header.iter().map(AsRef::as_ref).collect()));
    out.push_str(&line(header.iter().map(|_| "---").collect()));
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}
