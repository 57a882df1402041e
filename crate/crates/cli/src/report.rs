use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const COLUMNS: &str = "case_id,inputs_digest,value,expected,defect,budget,pass";

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex { re: f64, im: f64 },
    Count(u64),
}

impl From<Complex64> for Num {
    fn from(z: Complex64) -> Self {
        Num::Complex { re: z.re, im: z.im }
    }
}

impl Num {
    fn csv(&self) -> String {
        match self {
            Num::Real(v) => format!("{v:e}"),
            Num::Complex { re, im } => format!("{re:e}{}{im:e}i", if im.is_sign_negative() { "" } else { "+" }),
            Num::Count(n) => n.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub case_id: u64,
    pub inputs_digest: String,
    pub value: Num,
    pub expected: Num,
    pub defect: f64,
    pub budget: f64,
    pub pass: bool,
}

impl Row {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:e},{:e},{}",
            self.case_id,
            self.inputs_digest,
            self.value.csv(),
            self.expected.csv(),
            self.defect,
            self.budget,
            self.pass
        )
    }
}

/// First 16 hex digits of SHA-256 over the given byte fields.
pub fn digest(fields: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for f in fields {
        h.update((f.len() as u64).to_le_bytes());
        h.update(f);
    }
    let mut s = String::with_capacity(16);
    for b in &h.finalize()[..8] {
        write!(s, "{b:02x}").unwrap();
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn render_rows(command: &str, rows: &[Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            let mut out = format!("# dg {command} unix_time={stamp}\n{COLUMNS}\n");
            for r in rows {
                out.push_str(&r.csv());
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
