//! Input/output conventions: versioned JSON documents, CSV emission with a
//! fixed numeric format, machine-readable errors, and exit-code mapping.

use std::fs;
use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use freelevy_core::Error as CoreError;

pub const SCHEMA_VERSION: u32 = 1;

/// CLI failure: an exit code (2 validation, 3 numeric) plus a message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        Failure { code: 2, kind: kind.into(), message: message.into() }
    }

    pub fn from_core(err: CoreError) -> Self {
        let code = match err {
            CoreError::NoConvergence { .. }
            | CoreError::QuadratureBudget { .. }
            | CoreError::DivergentIntegral { .. } => 3,
            _ => 2,
        };
        let kind = match err {
            CoreError::NoConvergence { .. } => "no_convergence",
            CoreError::QuadratureBudget { .. } => "quadrature_budget",
            CoreError::DivergentIntegral { .. } => "divergent_integral",
            CoreError::FlavorMismatch => "flavor_mismatch",
            CoreError::OrderTooLarge { .. } => "order_too_large",
            CoreError::DomainError { .. } => "domain_error",
            CoreError::OutOfCarrier => "out_of_carrier",
            CoreError::ZeroLaw => "zero_law",
            CoreError::NotInvertible => "not_invertible",
            CoreError::NotIntegrable => "not_integrable",
            CoreError::MissingMoments { .. } => "missing_moments",
            CoreError::NegativeLawInPositiveMode { .. } => "negative_law",
            CoreError::ModelNotDiffuse => "model_not_diffuse",
            CoreError::NotHermitian { .. } => "not_hermitian",
            CoreError::SizeMismatch { .. } => "size_mismatch",
            CoreError::NotRepresentable { .. } => "not_representable",
            CoreError::Invalid { .. } => "invalid_input",
        };
        Failure { code, kind: kind.into(), message: err.to_string() }
    }

    /// Emit the machine-readable error JSON on stderr.
    pub fn report(&self) {
        let doc = serde_json::json!({
            "error": { "kind": self.kind, "message": self.message }
        });
        let _ = writeln!(std::io::stderr(), "{doc}");
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        Failure::from_core(err)
    }
}

/// Read an input argument: a path, `-` for stdin, or inline JSON when the
/// argument starts with `{`.
pub fn read_input(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    if arg == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::validation("io", format!("reading stdin: {e}")))?;
        return Ok(buf);
    }
    fs::read_to_string(arg).map_err(|e| Failure::validation("io", format!("reading {arg}: {e}")))
}

pub fn parse_doc<T: DeserializeOwned>(raw: &str, what: &str) -> Result<T, Failure> {
    serde_json::from_str(raw).map_err(|e| Failure::validation("parse", format!("parsing {what}: {e}")))
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// Versioned wrapper around any payload document.
#[derive(Debug, Serialize, Deserialize)]
pub struct Doc<T> {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(flatten)]
    pub payload: T,
}

impl<T> Doc<T> {
    pub fn new(payload: T) -> Self {
        Doc { schema: SCHEMA_VERSION, payload }
    }

    pub fn check_schema(&self, what: &str) -> Result<(), Failure> {
        if self.schema != SCHEMA_VERSION {
            return Err(Failure::validation(
                "schema",
                format!("{what}: unsupported schema {} (expected {SCHEMA_VERSION})", self.schema),
            ));
        }
        Ok(())
    }
}

/// Serialize with stable key order (struct order) and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::validation("serialize", e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write to a path, or stdout when `out` is `None`.
pub fn write_output(out: Option<&str>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::validation("io", format!("writing {path}: {e}"))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Fixed numeric CSV format: 17 significant digits, `.` decimal.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with a header row.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse a `lo:hi:n` grid specification into grid points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::validation("grid", format!("grid `{spec}` must be lo:hi:n")));
    }
    let lo: f64 = parts[0].parse().map_err(|e| Failure::validation("grid", format!("{e}")))?;
    let hi: f64 = parts[1].parse().map_err(|e| Failure::validation("grid", format!("{e}")))?;
    let n: usize = parts[2].parse().map_err(|e| Failure::validation("grid", format!("{e}")))?;
    if !(lo < hi) || n < 2 {
        return Err(Failure::validation("grid", "grid needs lo < hi and n >= 2"));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Parse a comma-separated decreasing ladder of positive offsets.
pub fn parse_ladder(spec: &str) -> Result<Vec<f64>, Failure> {
    let ladder: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let ladder = ladder.map_err(|e| Failure::validation("eps", format!("ladder `{spec}`: {e}")))?;
    if ladder.is_empty() || ladder.iter().any(|&e| e <= 0.0) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Failure::validation("eps", "ladder must be positive and strictly decreasing"));
    }
    Ok(ladder)
}

/// Worker count for data-parallel grid evaluation, capped by the
/// `FREELEVY_THREADS` environment variable.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("FREELEVY_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n >= 1 => n.min(available),
            _ => available,
        },
        Err(_) => available,
    }
}
