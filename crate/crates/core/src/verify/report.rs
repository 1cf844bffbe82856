use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{ConfigEcho, Suite};
use crate::qseries::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// How a check's value is judged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// The value must be exactly zero.
    Exact,
    Below(f64),
    /// Negative controls: the perturbed residual must exceed the bound.
    Above(f64),
}

impl Threshold {
    pub fn accepts(self, value: &Real) -> bool {
        match self {
            Threshold::Exact => value.is_zero(),
            Threshold::Below(b) => value.is_finite() && value.abs_lt(b),
            Threshold::Above(b) => value.is_finite() && !value.abs_lt(b),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Exact => f.write_str("= 0"),
            Threshold::Below(b) => write!(f, "< {}", short(*b)),
            Threshold::Above(b) => write!(f, "> {}", short(*b)),
        }
    }
}

/// `1e-28` rather than `1.0000000000000001e-28` for powers of ten.
fn short(b: f64) -> String {
    let decade = 10f64.powi(b.log10().round() as i32);
    if ((b - decade) / decade).abs() < 1e-12 {
        format!("{decade:.0e}")
    } else {
        format!("{b:e}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    pub params: BTreeMap<String, String>,
    pub value: Option<String>,
    pub threshold: String,
    pub status: Status,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl CheckRecord {
    pub fn judge<E: fmt::Display>(
        name: impl Into<String>,
        anchor: &str,
        lambda: Option<String>,
        params: BTreeMap<String, String>,
        threshold: Threshold,
        value: Result<Real, E>,
    ) -> Self {
        let (value, status, error) = match value {
            Ok(v) => {
                let status = if threshold.accepts(&v) { Status::Pass } else { Status::Fail };
                (Some(v.to_decimal(20)), status, None)
            }
            Err(e) => (None, Status::Error, Some(e.to_string())),
        };
        Self {
            name: name.into(),
            anchor: anchor.to_string(),
            lambda,
            params,
            value,
            threshold: threshold.to_string(),
            pass: status == Status::Pass,
            status,
            error,
            elapsed_ms: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    pub error_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub artifact: &'static str,
    pub version: &'static str,
    pub suite: Suite,
    pub config: ConfigEcho,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn new(suite: Suite, config: ConfigEcho, records: Vec<CheckRecord>) -> Self {
        let mut summary = Summary { total: records.len(), ..Summary::default() };
        for r in &records {
            match r.status {
                Status::Pass => summary.pass_count += 1,
                Status::Fail => summary.fail_count += 1,
                Status::Error => summary.error_count += 1,
            }
        }
        Self { artifact: "macsep", version: env!("CARGO_PKG_VERSION"), suite, config, records, summary }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per record; params are flattened to `key=value` pairs
    /// joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["name", "anchor", "lambda", "params", "value", "threshold", "status", "error"];
        let timed = self.records.iter().any(|r| r.elapsed_ms.is_some());
        if timed {
            header.push("elapsed_ms");
        }
        writer.write_record(&header).expect("in-memory write");
        for r in &self.records {
            let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let status = match r.status {
                Status::Pass => "pass",
                Status::Fail => "fail",
                Status::Error => "error",
            };
            let mut row = vec![
                r.name.clone(),
                r.anchor.clone(),
                r.lambda.clone().unwrap_or_default(),
                params.join(";"),
                r.value.clone().unwrap_or_default(),
                r.threshold.clone(),
                status.to_string(),
                r.error.clone().unwrap_or_default(),
            ];
            if timed {
                row.push(r.elapsed_ms.map(|x| format!("{x:.3}")).unwrap_or_default());
            }
            writer.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
    }
}
