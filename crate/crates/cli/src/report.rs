use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CliError, Result};
use crate::run::ReportBundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `norms.csv` and `sweep.csv`.
    Csv,
    /// `certificates.json` and the full `report.json`.
    Json,
    /// `summary.txt`.
    SummaryText,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::SummaryText];
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Pretty printer that writes every float as `{:.16e}`, which round-trips.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` with sorted keys and fixed-width floats.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let sorted = serde_json::to_value(value)?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::new()));
    sorted.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::InvalidData, format!("{other:?}")),
        },
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn summary_text(bundle: &ReportBundle) -> String {
    let mut out = format!("mode: {}\n", bundle.mode);
    for line in &bundle.summary {
        let tag = match line.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "INFO",
        };
        out.push_str(&format!("{tag} {}: {}\n", line.label, line.value));
    }
    out.push_str(&format!(
        "overall: {}\n",
        if bundle.passed() { "PASS" } else { "FAIL" }
    ));
    out
}

/// Writes the requested formats into `dir`, creating it if needed, and
/// returns the written paths.
pub fn emit_report(bundle: &ReportBundle, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            Format::Csv => {
                let p = dir.join("norms.csv");
                write_csv(&p, &["t", "order", "method", "value"], &bundle.norms)?;
                written.push(p);
                let p = dir.join("sweep.csv");
                write_csv(&p, &["s", "t", "n", "partial_sum", "verdict"], &bundle.sweep)?;
                written.push(p);
            }
            Format::Json => {
                let p = dir.join("certificates.json");
                write_text(&p, &to_canonical_json(&bundle.certificates)?)?;
                written.push(p);
                let p = dir.join("report.json");
                write_text(&p, &to_canonical_json(bundle)?)?;
                written.push(p);
            }
            Format::SummaryText => {
                let p = dir.join("summary.txt");
                write_text(&p, &summary_text(bundle))?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
