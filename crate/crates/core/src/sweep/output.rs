//! Table files: CSV or JSON lines, one row per grid point, plus a JSON
//! sidecar echoing the spec. Floats are written as shortest round-trip
//! decimals, so files parse back to the exact values and reruns are
//! byte-identical.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{grid_indices, run_points, summarize, Row, SliceAt, Summary, SweepSpec, Table};
use crate::error::{Error, Result};
use crate::metrics::SbsCandidate;

/// Points evaluated between flushes; an interrupted run loses at most this many.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(Error::arg(format!("unknown output format {other:?} (expected csv or jsonl)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub code_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub spec: SweepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceAt>,
    pub format: OutputFormat,
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Written once the table is complete.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

impl Sidecar {
    fn same_sweep(&self, other: &Sidecar) -> bool {
        self.spec == other.spec && self.slice == other.slice && self.format == other.format && self.columns == other.columns
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn read_sidecar(out: &Path) -> Result<Sidecar> {
    let path = sidecar_path(out);
    let text = fs::read_to_string(&path).map_err(|e| Error::arg(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::arg(format!("malformed sidecar {}: {e}", path.display())))
}

fn write_sidecar(out: &Path, sidecar: &Sidecar) -> Result<()> {
    let mut text = serde_json::to_string_pretty(sidecar).map_err(|e| Error::numeric(e.to_string()))?;
    text.push('\n');
    fs::write(sidecar_path(out), text).map_err(io_error(&sidecar_path(out)))
}

fn io_error(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::arg(format!("{}: {e}", path.display()))
}

const OPTIMUM_COLUMNS: [&str; 6] = ["p_tilde", "x_psi", "y_psi", "x_chi", "y_chi", "basis_alignment"];

pub fn columns(spec: &SweepSpec) -> Vec<String> {
    let mut cols = vec![
        "i".to_string(),
        "j".to_string(),
        spec.axis1.param.name().to_string(),
        spec.axis2.param.name().to_string(),
        spec.quantity.name().to_string(),
    ];
    cols.extend(OPTIMUM_COLUMNS.iter().map(|s| s.to_string()));
    cols.push("error".to_string());
    cols
}

fn float_text(v: f64) -> String {
    // Debug formatting is the shortest decimal that parses back to `v`
    format!("{v:?}")
}

fn optimum_values(o: &SbsCandidate) -> [f64; 6] {
    [o.p_tilde, o.x_psi, o.y_psi, o.x_chi, o.y_chi, o.basis_alignment()]
}

fn csv_fields(row: &Row) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(float_text).unwrap_or_default();
    let mut fields = vec![
        row.i.to_string(),
        row.j.to_string(),
        float_text(row.x1),
        float_text(row.x2),
        opt(row.value),
    ];
    match &row.optimum {
        Some(o) => fields.extend(optimum_values(o).map(float_text)),
        None => fields.extend(std::iter::repeat_n(String::new(), 6)),
    }
    fields.push(row.error.clone().unwrap_or_default());
    fields
}

fn csv_line(fields: &[String]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(fields).map_err(|e| Error::numeric(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::numeric(e.to_string()))
}

fn json_number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => serde_json::to_string(&x).expect("finite floats serialize"),
        _ => "null".to_string(),
    }
}

fn jsonl_line(cols: &[String], row: &Row) -> String {
    let mut values = vec![
        row.i.to_string(),
        row.j.to_string(),
        json_number(Some(row.x1)),
        json_number(Some(row.x2)),
        json_number(row.value),
    ];
    match &row.optimum {
        Some(o) => values.extend(optimum_values(o).map(|v| json_number(Some(v)))),
        None => values.extend(std::iter::repeat_n("null".to_string(), 6)),
    }
    values.push(match &row.error {
        Some(e) => serde_json::to_string(e).expect("strings serialize"),
        None => "null".to_string(),
    });
    let body: Vec<String> = cols
        .iter()
        .zip(values)
        .map(|(k, v)| format!("{}:{v}", serde_json::to_string(k).expect("strings serialize")))
        .collect();
    format!("{{{}}}\n", body.join(","))
}

fn header_text(format: OutputFormat, cols: &[String]) -> Result<String> {
    match format {
        OutputFormat::Csv => csv_line(cols),
        OutputFormat::Jsonl => Ok(String::new()),
    }
}

fn row_text(format: OutputFormat, cols: &[String], row: &Row) -> Result<String> {
    match format {
        OutputFormat::Csv => csv_line(&csv_fields(row)),
        OutputFormat::Jsonl => Ok(jsonl_line(cols, row)),
    }
}

fn parse_float(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::arg(format!("malformed number {s:?} in table")))
}

fn parse_index(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::arg(format!("malformed index {s:?} in table")))
}

fn assemble(i: usize, j: usize, x1: f64, x2: f64, value: Option<f64>, opt: [Option<f64>; 5], error: Option<String>) -> Row {
    let optimum = match opt {
        [Some(p_tilde), Some(x_psi), Some(y_psi), Some(x_chi), Some(y_chi)] => Some(SbsCandidate {
            p_tilde,
            x_psi,
            y_psi,
            x_chi,
            y_chi,
        }),
        _ => None,
    };
    Row { i, j, x1, x2, value, optimum, error }
}

fn parse_csv_rows(body: &str) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(body.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::arg(format!("malformed table row: {e}")))?;
        if r.len() != 12 {
            return Err(Error::arg(format!("table row has {} fields, expected 12", r.len())));
        }
        let opt = |k: usize| -> Result<Option<f64>> {
            let s = &r[k];
            if s.is_empty() {
                Ok(None)
            } else {
                parse_float(s).map(Some)
            }
        };
        let error = (!r[11].is_empty()).then(|| r[11].to_string());
        rows.push(assemble(
            parse_index(&r[0])?,
            parse_index(&r[1])?,
            parse_float(&r[2])?,
            parse_float(&r[3])?,
            opt(4)?,
            [opt(5)?, opt(6)?, opt(7)?, opt(8)?, opt(9)?],
            error,
        ));
    }
    Ok(rows)
}

fn parse_jsonl_rows(cols: &[String], body: &str) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    for line in body.lines() {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::arg(format!("malformed table row: {e}")))?;
        let field = |k: usize| &v[cols[k].as_str()];
        let num = |k: usize| field(k).as_f64();
        let idx = |k: usize| {
            field(k)
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::arg(format!("table row lacks {}", cols[k])))
        };
        let req = |k: usize| num(k).ok_or_else(|| Error::arg(format!("table row lacks {}", cols[k])));
        rows.push(assemble(
            idx(0)?,
            idx(1)?,
            req(2)?,
            req(3)?,
            num(4),
            [num(5), num(6), num(7), num(8), num(9)],
            field(11).as_str().map(str::to_string),
        ));
    }
    Ok(rows)
}

/// Writes a finished table and its sidecar in one go.
pub fn write_table(out: &Path, table: &Table, sidecar: &Sidecar) -> Result<()> {
    let mut text = header_text(sidecar.format, &sidecar.columns)?;
    for row in &table.rows {
        text.push_str(&row_text(sidecar.format, &sidecar.columns, row)?);
    }
    fs::write(out, text).map_err(io_error(out))?;
    write_sidecar(out, sidecar)
}

/// Runs a sweep (or a slice of one) straight to `out`, flushing every few
/// points. With `resume`, rows already present in a file written for the
/// same sweep are kept and only the missing points are evaluated; the
/// finished file is byte-identical to an uninterrupted run.
pub struct SweepWriter<'a> {
    pub spec: &'a SweepSpec,
    pub slice: Option<SliceAt>,
    pub format: OutputFormat,
    pub workers: usize,
    pub preset: Option<String>,
    pub notes: Vec<String>,
}

impl SweepWriter<'_> {
    fn sidecar(&self) -> Sidecar {
        Sidecar {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            preset: self.preset.clone(),
            spec: self.spec.clone(),
            slice: self.slice,
            format: self.format,
            columns: columns(self.spec),
            notes: self.notes.clone(),
            summary: None,
        }
    }

    /// Rows already on disk and the byte length they occupy, or `None` when
    /// there is nothing to resume from.
    fn existing(&self, out: &Path, sidecar: &Sidecar, points: &[(usize, usize)]) -> Result<Option<(Vec<Row>, usize)>> {
        if !out.exists() {
            return Ok(None);
        }
        let previous = read_sidecar(out)?;
        if !previous.same_sweep(sidecar) {
            return Err(Error::arg(format!(
                "{} was written for a different sweep; refusing to resume",
                out.display()
            )));
        }
        let text = fs::read_to_string(out).map_err(io_error(out))?;
        let header = header_text(self.format, &sidecar.columns)?;
        if !text.starts_with(&header) {
            return Err(Error::arg(format!("{} has an unexpected header", out.display())));
        }
        // a partially written last line is dropped and recomputed
        let complete = text.rfind('\n').map_or(0, |k| k + 1).max(header.len());
        let body = &text[header.len()..complete];
        let rows = match self.format {
            OutputFormat::Csv => parse_csv_rows(body)?,
            OutputFormat::Jsonl => parse_jsonl_rows(&sidecar.columns, body)?,
        };
        if rows.len() > points.len() || rows.iter().zip(points).any(|(r, &(i, j))| (r.i, r.j) != (i, j)) {
            return Err(Error::arg(format!("{} does not hold a prefix of this sweep", out.display())));
        }
        Ok(Some((rows, complete)))
    }

    pub fn run(&self, out: &Path, resume: bool) -> Result<(Table, Summary)> {
        self.spec.validate()?;
        let points = grid_indices(self.spec, self.slice.as_ref())?;
        let mut sidecar = self.sidecar();
        let previous = if resume { self.existing(out, &sidecar, &points)? } else { None };
        let (mut rows, file) = match previous {
            Some((rows, len)) => {
                let f = OpenOptions::new().write(true).open(out).map_err(io_error(out))?;
                f.set_len(len as u64).map_err(io_error(out))?;
                let f = OpenOptions::new().append(true).open(out).map_err(io_error(out))?;
                (rows, f)
            }
            None => {
                let mut f = File::create(out).map_err(io_error(out))?;
                f.write_all(header_text(self.format, &sidecar.columns)?.as_bytes())
                    .map_err(io_error(out))?;
                write_sidecar(out, &sidecar)?;
                (Vec::new(), f)
            }
        };
        let mut file = BufWriter::new(file);
        for chunk in points[rows.len()..].chunks(CHUNK) {
            let fresh = run_points(self.spec, self.slice.as_ref(), chunk, self.workers)?;
            for row in &fresh {
                file.write_all(row_text(self.format, &sidecar.columns, row)?.as_bytes())
                    .map_err(io_error(out))?;
            }
            file.flush().map_err(io_error(out))?;
            rows.extend(fresh);
        }
        let table = Table {
            axis1: self.spec.axis1,
            axis2: self.spec.axis2,
            quantity: self.spec.quantity,
            rows,
        };
        let summary = summarize(&table)?;
        sidecar.summary = Some(summary.clone());
        write_sidecar(out, &sidecar)?;
        Ok((table, summary))
    }
}
