//! Input literals, number formatting, and CSV / JSON-lines output.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelParams;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::optimize::{Fig1Row, Fig2Row, Fig3Row, ReportRow};
use crate::states::{bell_state, beta0, MaxEntangled, PureState4};

/// `x` with 12 significant digits, shortest round-trip form.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// Parses a real number, also accepting a fraction such as `1/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::Invalid(format!("cannot parse number '{s}'"));
    let v = match t.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            n / d
        }
        None => t.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// A real given either as a number or as a string (possibly a fraction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealLiteral {
    Number(f64),
    Text(String),
}

impl RealLiteral {
    pub fn value(&self) -> Result<f64> {
        match self {
            RealLiteral::Number(x) => Ok(*x),
            RealLiteral::Text(s) => parse_real(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    Bell,
}

/// `{"basis": "computational" | "bell", "amplitudes": [[re, im] x 4]}`.
/// Bell amplitudes are coefficients of `(I ⊗ sigma_k)|beta_0>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateLiteral {
    pub basis: Basis,
    pub amplitudes: Vec<[f64; 2]>,
}

impl StateLiteral {
    /// The state, rescaled to unit norm.
    pub fn to_state(&self) -> Result<PureState4> {
        if self.amplitudes.len() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                got: self.amplitudes.len(),
            });
        }
        let c: Vec<Complex64> = self
            .amplitudes
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let amps = match self.basis {
            Basis::Computational => [c[0], c[1], c[2], c[3]],
            Basis::Bell => {
                let mut out = [Complex64::new(0.0, 0.0); 4];
                for (k, ck) in c.iter().enumerate() {
                    let b = bell_state(k)?;
                    for (o, a) in out.iter_mut().zip(b.amplitudes()) {
                        *o += ck * a;
                    }
                }
                out
            }
        };
        PureState4::normalized(amps)
    }

    pub fn from_state(psi: &PureState4) -> Self {
        Self {
            basis: Basis::Computational,
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// `|beta>` given by its 2×2 unitary or as `"beta0"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaLiteral {
    Named(String),
    Unitary { unitary: [[[f64; 2]; 2]; 2] },
}

impl BetaLiteral {
    pub fn to_beta(&self) -> Result<MaxEntangled> {
        match self {
            BetaLiteral::Named(n) if n == "beta0" => Ok(MaxEntangled::beta0()),
            BetaLiteral::Named(n) => Err(Error::Invalid(format!("unknown beta '{n}'"))),
            BetaLiteral::Unitary { unitary } => {
                let z = |e: [f64; 2]| Complex64::new(e[0], e[1]);
                let u = CMatrix::from_rows([
                    [z(unitary[0][0]), z(unitary[0][1])],
                    [z(unitary[1][0]), z(unitary[1][1])],
                ]);
                MaxEntangled::new(u)
            }
        }
    }
}

/// `{"mu": .., "lambda": .., "beta": {"unitary": ..} | "beta0"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelLiteral {
    pub mu: RealLiteral,
    pub lambda: RealLiteral,
    #[serde(default = "default_beta")]
    pub beta: BetaLiteral,
}

fn default_beta() -> BetaLiteral {
    BetaLiteral::Named("beta0".into())
}

impl ChannelLiteral {
    pub fn to_params(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.mu.value()?, self.lambda.value()?, self.beta.to_beta()?)
    }
}

/// Names accepted wherever an input state is expected.
pub const NAMED_STATES: [&str; 4] = ["bell0", "singlet", "product00", "product-yy"];

/// `bell0` is `|beta_0>`, `singlet` is `(|01> - |10>)/sqrt 2`, `product00`
/// is `|00>`, and `product-yy` is `|+i>|+i>` with `|+i> = (|0> + i|1>)/sqrt 2`.
pub fn named_state(name: &str) -> Option<PureState4> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| Complex64::new(x, 0.0);
    let i = |x: f64| Complex64::new(0.0, x);
    match name {
        "bell0" => Some(beta0()),
        "singlet" => PureState4::new([r(0.0), r(h), r(-h), r(0.0)]).ok(),
        "product00" => Some(PureState4::product00()),
        "product-yy" => PureState4::new([r(0.5), i(0.5), i(0.5), r(-0.5)]).ok(),
        _ => None,
    }
}

/// Resolves a state argument: a name from [`NAMED_STATES`], an inline JSON
/// literal, or a path to a JSON file holding one.
pub fn resolve_state(arg: &str) -> Result<PureState4> {
    if let Some(s) = named_state(arg) {
        return Ok(s);
    }
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| {
            Error::Invalid(format!(
                "'{arg}' is not a named state ({}), JSON literal, or readable file: {e}",
                NAMED_STATES.join(", ")
            ))
        })?
    };
    let lit: StateLiteral = serde_json::from_str(&text)?;
    lit.to_state()
}

/// A row type with a fixed CSV header.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRecord for Fig1Row {
    const HEADER: &'static [&'static str] = &["mu", "lambda", "p2_norm"];
    fn fields(&self) -> Vec<String> {
        vec![fmt12(self.mu), fmt12(self.lambda), fmt12(self.p2_norm)]
    }
}

impl CsvRecord for Fig2Row {
    const HEADER: &'static [&'static str] = &[
        "mu",
        "lambda",
        "mu_c",
        "theta_opt",
        "linear_entropy",
        "vn_entropy",
    ];
    fn fields(&self) -> Vec<String> {
        [
            self.mu,
            self.lambda,
            self.mu_c,
            self.theta_opt,
            self.linear_entropy,
            self.vn_entropy,
        ]
        .map(fmt12)
        .to_vec()
    }
}

impl CsvRecord for Fig3Row {
    const HEADER: &'static [&'static str] = &["p", "s_p", "source"];
    fn fields(&self) -> Vec<String> {
        vec![self.p.to_string(), fmt12(self.s_p), self.source.to_string()]
    }
}

impl CsvRecord for ReportRow {
    const HEADER: &'static [&'static str] = &[
        "mu",
        "lambda",
        "p",
        "conjectured",
        "best_random",
        "gap",
        "violation_flag",
    ];
    fn fields(&self) -> Vec<String> {
        vec![
            fmt12(self.mu),
            fmt12(self.lambda),
            self.p.to_string(),
            fmt12(self.conjectured),
            fmt12(self.best_random),
            fmt12(self.gap),
            self.violation_flag.to_string(),
        ]
    }
}

/// A batch that could not be written.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchFailure {
    pub batch: usize,
    pub first_row: usize,
    pub rows: usize,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WriteOutcome {
    pub rows_written: usize,
    pub failures: Vec<BatchFailure>,
}

impl WriteOutcome {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Default rows per batch for sink writes.
pub const BATCH_ROWS: usize = 256;

fn write_batched<W: Write, T>(
    sink: &mut W,
    header: Option<Vec<u8>>,
    rows: &[T],
    batch: usize,
    encode: impl Fn(&[T]) -> Result<Vec<u8>>,
) -> WriteOutcome {
    let mut out = WriteOutcome::default();
    if let Some(h) = header {
        if let Err(e) = sink.write_all(&h) {
            out.failures.push(BatchFailure {
                batch: 0,
                first_row: 0,
                rows: 0,
                error: format!("header: {e}"),
            });
        }
    }
    for (i, chunk) in rows.chunks(batch.max(1)).enumerate() {
        let res = encode(chunk).and_then(|buf| sink.write_all(&buf).map_err(Error::from));
        match res {
            Ok(()) => out.rows_written += chunk.len(),
            Err(e) => out.failures.push(BatchFailure {
                batch: i,
                first_row: i * batch.max(1),
                rows: chunk.len(),
                error: e.to_string(),
            }),
        }
    }
    if let Err(e) = sink.flush() {
        out.failures.push(BatchFailure {
            batch: usize::MAX,
            first_row: rows.len(),
            rows: 0,
            error: format!("flush: {e}"),
        });
    }
    out
}

/// Writes a header and the rows in batches. A failed batch is recorded and
/// the remaining batches are still attempted.
pub fn write_csv<W: Write, R: CsvRecord>(sink: &mut W, rows: &[R], batch: usize) -> WriteOutcome {
    let header = {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(R::HEADER).and_then(|_| w.flush().map_err(csv::Error::from)).ok();
        w.into_inner().ok()
    };
    write_batched(sink, header, rows, batch, |chunk| {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for r in chunk {
            w.write_record(r.fields())?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    })
}

/// One JSON object per line, written in batches like [`write_csv`].
pub fn write_jsonl<W: Write, T: Serialize>(sink: &mut W, items: &[T], batch: usize) -> WriteOutcome {
    write_batched(sink, None, items, batch, |chunk| {
        let mut buf = Vec::new();
        for it in chunk {
            serde_json::to_writer(&mut buf, it)?;
            buf.push(b'\n');
        }
        Ok(buf)
    })
}

/// Header and records of a CSV document.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
