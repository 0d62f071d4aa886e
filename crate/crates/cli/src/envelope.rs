//! JSON result envelope. Complex numbers are `[re, im]`; non-finite floats
//! become `null`.

use std::collections::BTreeMap;

use serde::Serialize;

use wronskian_lab::{CPoly, Complex64};

use crate::config::RunConfig;

pub const SCHEMA_ID: &str = "wronskian-lab/result-envelope";
pub const SCHEMA_VERSION: u32 = 1;

pub type C = [f64; 2];

pub fn c(z: Complex64) -> C {
    [z.re, z.im]
}

pub fn cs(v: &[Complex64]) -> Vec<C> {
    v.iter().map(|&z| c(z)).collect()
}

/// Ascending coefficients.
pub fn poly(p: &CPoly) -> Vec<C> {
    cs(p.coeffs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Incomplete,
    Mismatch,
    Failed,
    Usage,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Usage => 1,
            Status::Incomplete | Status::Mismatch => 2,
            Status::Failed => 3,
        }
    }

    /// The more severe of two outcomes.
    pub fn worst(self, other: Status) -> Status {
        let rank = |s: Status| match s {
            Status::Ok => 0,
            Status::Mismatch => 1,
            Status::Incomplete => 2,
            Status::Failed => 3,
            Status::Usage => 4,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Spectrum {
        sz: f64,
        index: usize,
        /// Eigenvalue polynomial of the transfer matrix.
        t: Vec<C>,
        energy: Option<C>,
    },
    QPair {
        sz: f64,
        n: usize,
        branch: Vec<usize>,
        qp: Vec<C>,
        qm: Vec<C>,
        roots_p: Vec<C>,
        roots_m: Vec<C>,
        t: Vec<C>,
        wronskian_residual: f64,
        bae_residual: Option<f64>,
        oracle_index: Option<usize>,
        oracle_deviation: Option<f64>,
    },
    PsPair {
        sz: f64,
        n: usize,
        qp: Vec<C>,
        qm: Vec<C>,
        roots_p: Vec<C>,
        t: Vec<C>,
        residual: f64,
        oracle_index: Option<usize>,
    },
    Special {
        qp: Vec<C>,
        t: Vec<C>,
        roots: Vec<C>,
        reduced_residual: f64,
        constraint_defect: f64,
        special1_residual: f64,
        special2_residual: f64,
        conjugate_defect: f64,
        groundstate_pattern: bool,
    },
    TableEntry {
        table: u8,
        label: String,
        computed: C,
        expected: C,
        diff: f64,
        tolerance: f64,
        pass: bool,
    },
    PrintedEntry {
        label: String,
        printed: f64,
        decimals: u32,
        computed: f64,
        misprint: bool,
        agrees: bool,
    },
    Check {
        name: String,
        sites: usize,
        residual: f64,
        tolerance: f64,
        pass: bool,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub schema: &'static str,
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub timestamp: String,
    pub config: RunConfig,
    pub status: Status,
    pub exit_code: u8,
    /// Worst value of each residual kind over all records.
    pub residuals: BTreeMap<String, Option<f64>>,
    pub records: Vec<Record>,
    pub messages: Vec<String>,
}

/// RFC 3339 time; `SOURCE_DATE_EPOCH` pins it for reproducible output.
pub fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl Envelope {
    pub fn new(config: RunConfig) -> Self {
        Envelope {
            schema: SCHEMA_ID,
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
            config,
            status: Status::Ok,
            exit_code: 0,
            residuals: BTreeMap::new(),
            records: Vec::new(),
            messages: Vec::new(),
        }
    }

    pub fn set_status(&mut self, s: Status) {
        self.status = self.status.worst(s);
        self.exit_code = self.status.exit_code();
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        let v = if value.is_finite() { Some(value) } else { None };
        let e = self.residuals.entry(name.to_string()).or_insert(Some(0.0));
        *e = match (*e, v) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelope serializes");
        s.push('\n');
        s
    }
}
