use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use corrchan::io::{fmt12, write_csv, write_jsonl, CsvRecord, WriteOutcome, BATCH_ROWS};
use corrchan::optimize::Fig3Row;
use serde::Serialize;

use crate::Format;

pub const OUT_DIR_ENV: &str = "CORRCHAN_OUT_DIR";

/// `--out` if given, else `<$CORRCHAN_OUT_DIR or .>/<stem>.<ext>`.
pub fn out_path(out: Option<&Path>, stem: &str, format: Format) -> PathBuf {
    if let Some(p) = out {
        return p.to_path_buf();
    }
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let ext = match format {
        Format::Csv => "csv",
        Format::Jsonl => "jsonl",
    };
    dir.join(format!("{stem}.{ext}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn finish(path: &Path, mut w: BufWriter<File>, outcome: WriteOutcome) -> Result<usize> {
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    if let Some(f) = outcome.failures.first() {
        bail!(
            "writing {}: {} of {} batches failed, first at row {}: {}",
            path.display(),
            outcome.failures.len(),
            outcome.failures.len() + outcome.rows_written.div_ceil(BATCH_ROWS),
            f.first_row,
            f.error
        );
    }
    Ok(outcome.rows_written)
}

pub fn write_rows<R: CsvRecord + Serialize>(path: &Path, rows: &[R], format: Format) -> Result<usize> {
    let mut w = create(path)?;
    let outcome = match format {
        Format::Csv => write_csv(&mut w, rows, BATCH_ROWS),
        Format::Jsonl => write_jsonl(&mut w, rows, BATCH_ROWS),
    };
    finish(path, w, outcome)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

/// A fig3 row tagged with its panel.
#[derive(Serialize)]
pub struct PanelRow {
    pub mu: f64,
    pub lambda: f64,
    #[serde(flatten)]
    pub row: Fig3Row,
}

impl CsvRecord for PanelRow {
    const HEADER: &'static [&'static str] = &["mu", "lambda", "p", "s_p", "source"];

    fn fields(&self) -> Vec<String> {
        let mut f = vec![fmt12(self.mu), fmt12(self.lambda)];
        f.extend(self.row.fields());
        f
    }
}
