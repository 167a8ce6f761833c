//! Machine-readable run reports.
//!
//! Reports are pretty-printed JSON. Every float is written in scientific
//! notation with 17 significant digits, so a value read back is bit-identical
//! to the one computed. Non-finite values become `null`.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::inequalities::{InequalityVerdict, SweepItem};
use crate::integrator::{IntegralResult, IntegrationConfig};
use crate::measures::{ClaimedFlags, PropertyAudit};

#[derive(Debug, Clone, Serialize)]
pub struct MeasureInfo {
    pub label: String,
    pub claims: ClaimedFlags,
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedIntegral {
    pub integrand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<String>,
    pub result: IntegralResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaggedSumRecord {
    pub integrand: String,
    pub partition: serde_json::Value,
    pub tags: Vec<u64>,
    pub depth: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRecord {
    pub function: String,
    pub p: f64,
    /// `None` when the underlying integral did not converge.
    pub value: Option<f64>,
    pub integral: IntegralResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<IntegrationConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub audits: Vec<PropertyAudit>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub integrals: Vec<NamedIntegral>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tagged_sums: Vec<TaggedSumRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub norms: Vec<NormRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<InequalityVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepItem>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub exit_code: i32,
    /// Wall-clock milliseconds per item; only present when requested, since
    /// it would make reports differ between runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config: None,
            run: None,
            measure: None,
            audits: Vec::new(),
            integrals: Vec::new(),
            tagged_sums: Vec::new(),
            norms: Vec::new(),
            verdicts: Vec::new(),
            sweep: None,
            error: None,
            exit_code: 0,
            timings_ms: None,
        }
    }
}

/// Pretty printing with full-precision floats.
struct ReportFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for ReportFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Serializes any value in the report format.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let formatter = ReportFormatter {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).expect("reports serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}
