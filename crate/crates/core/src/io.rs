//! JSON codecs for inputs and the report format shared by the CLI and the
//! example registry.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bipoly::{BiPoly, Region, SamplePoint};
use crate::error::{Error, Result};
use crate::numlin::{matrix_json::MatrixJson, CMat};
use crate::pairs::OperatorPair;

/// Reads `input` as JSON text when it looks like JSON, otherwise as a path.
fn load(input: &str) -> Result<(String, String)> {
    let trimmed = input.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(("<text>".to_string(), input.to_string()));
    }
    let text = std::fs::read_to_string(Path::new(input))
        .map_err(|e| Error::Parse { location: input.to_string(), message: e.to_string() })?;
    Ok((input.to_string(), text))
}

fn parse_json<T: DeserializeOwned>(source: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        // validation errors raised after a value is read carry no position
        location: if e.line() == 0 { source.to_string() } else { format!("{source}:{}:{}", e.line(), e.column()) },
        message: e.to_string(),
    })
}

/// Matrix from `{"rows", "cols", "data": [[re, im], …]}` text or a path to it.
pub fn parse_matrix(input: &str) -> Result<CMat> {
    let (source, text) = load(input)?;
    let raw: MatrixJson = parse_json(&source, &text)?;
    raw.to_matrix().map_err(|message| Error::Parse { location: source, message })
}

/// Polynomial from `{"terms": [{"i", "j", "re", "im"}, …]}`; duplicate
/// exponents are summed.
pub fn parse_poly(input: &str) -> Result<BiPoly> {
    let (source, text) = load(input)?;
    parse_json(&source, &text)
}

/// Pair from `{"S": Matrix, "P": Matrix}`; shapes are checked, commutation
/// is left to the consumer.
pub fn parse_pair(input: &str) -> Result<OperatorPair> {
    #[derive(Deserialize)]
    struct RawPair {
        #[serde(rename = "S")]
        s: MatrixJson,
        #[serde(rename = "P")]
        p: MatrixJson,
    }
    let (source, text) = load(input)?;
    let raw: RawPair = parse_json(&source, &text)?;
    let s = raw.s.to_matrix().map_err(|m| Error::Parse { location: format!("{source}:S"), message: m })?;
    let p = raw.p.to_matrix().map_err(|m| Error::Parse { location: format!("{source}:P"), message: m })?;
    if !s.is_square() || !p.is_square() || s.nrows() != p.nrows() {
        return Err(Error::Parse {
            location: source,
            message: format!("S is {}x{} and P is {}x{}; expected equal square sizes", s.nrows(), s.ncols(), p.nrows(), p.ncols()),
        });
    }
    Ok(OperatorPair { s, p })
}

pub fn matrix_to_json(m: &CMat) -> String {
    serde_json::to_string(&MatrixJson::from(m)).expect("matrices serialize")
}

pub fn poly_to_json(p: &BiPoly) -> String {
    serde_json::to_string(p).expect("polynomials serialize")
}

/// One named assertion: `value` compared against `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub comparator: Comparator,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    AtMost,
    AtLeast,
    /// `|value − bound| ≤ 1e-6`, or the tolerance stored in the name.
    Equals,
    /// Boolean checks: `value` is 1 for true.
    IsTrue,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, comparator: Comparator::AtMost, bound, passed: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, comparator: Comparator::AtLeast, bound, passed: value >= bound }
    }

    /// `|value − target| ≤ tol`, stored as a bound on the deviation.
    pub fn close(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: format!("{} (target {target}, tol {tol:e})", name.into()),
            value,
            comparator: Comparator::Equals,
            bound: target,
            passed: (value - target).abs() <= tol,
        }
    }

    pub fn is_true(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            comparator: Comparator::IsTrue,
            bound: 1.0,
            passed: ok,
        }
    }
}

/// Rows of sampled points, the only data emitted as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn from_points(points: &[SamplePoint], region: Region) -> Self {
        let header = match region {
            Region::Gamma => ["re_s", "im_s", "re_p", "im_p"],
            Region::Bidisc => ["re_z1", "im_z1", "re_z2", "im_z2"],
        };
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: points.iter().map(|(a, b)| vec![a.re, a.im, b.re, b.im]).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<SampleTable>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            config: BTreeMap::new(),
            results: BTreeMap::new(),
            checks: Vec::new(),
            summary: Summary::default(),
            samples: None,
        }
    }

    pub fn config(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.config.insert(key.to_string(), serde_json::to_value(value).expect("config serializes"));
        self
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(key.to_string(), serde_json::to_value(value).expect("result serializes"));
        self
    }

    pub fn check(&mut self, check: Check) -> &mut Self {
        if check.passed {
            self.summary.passed += 1;
        } else {
            self.summary.failed += 1;
        }
        self.checks.push(check);
        self
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    /// Folds another report's checks in under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}: {}", c.name);
            self.check(c);
        }
        self.results.insert(prefix.to_string(), Value::Object(other.results.into_iter().collect()));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(Error::Usage(format!("unsupported format '{other}'"))),
        }
    }
}

/// Serializes a report. JSON key order is fixed by the `BTreeMap`s; CSV
/// requires a sample table.
pub fn emit_report(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report).expect("reports serialize") + "\n"),
        Format::Csv => {
            let table = report
                .samples
                .as_ref()
                .ok_or_else(|| Error::Usage("csv output needs a sample table; this command has none".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::Numerical(e.to_string());
            w.write_record(&table.header).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(|x| format!("{x:.17e}"))).map_err(io_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv is utf-8"))
        }
        Format::Text => {
            let mut out = format!("command: {}\n", report.command);
            for (k, v) in &report.config {
                out.push_str(&format!("  {k} = {v}\n"));
            }
            for c in &report.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!("{mark} {} = {:.6e} ({:?} {:.6e})\n", c.name, c.value, c.comparator, c.bound));
            }
            out.push_str(&format!("passed: {}, failed: {}\n", report.summary.passed, report.summary.failed));
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::identity;

    #[test]
    fn matrix_parsing() {
        assert_eq!(parse_matrix(r#"{"rows":1,"cols":1,"data":[[1,0]]}"#).unwrap(), identity(1));
        let e = parse_matrix(r#"{"rows":2,"cols":1,"data":[[1,0]]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
        let e = parse_matrix(r#"{"rows":1,"cols":1,"data":[[NaN,0]]}"#).unwrap_err();
        match e {
            Error::Parse { location, .. } => assert_eq!(location, "<text>:1:29"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn poly_parsing() {
        assert!(parse_poly(r#"{"terms":[]}"#).unwrap().is_zero());
        assert!(parse_poly(r#"{"terms":[{"i":-1,"j":0,"re":1}]}"#).is_err());
        let p = parse_poly(r#"{"terms":[{"i":1,"j":0,"re":1},{"i":1,"j":0,"re":2,"im":1}]}"#).unwrap();
        assert_eq!(p.coeff(1, 0), crate::numlin::c(3.0, 1.0));
    }

    #[test]
    fn csv_and_text() {
        let mut r = Report::new("demo");
        assert!(emit_report(&r, Format::Csv).is_err());
        r.samples = Some(SampleTable::from_points(&[(crate::numlin::c(2.0, 0.0), crate::numlin::c(1.0, 0.0))], Region::Gamma));
        assert!(emit_report(&r, Format::Csv).unwrap().starts_with("re_s,im_s,re_p,im_p\n"));
        r.check(Check::at_most("x", 0.0, 1.0)).check(Check::at_least("y", 0.0, 1.0));
        assert!(emit_report(&r, Format::Text).unwrap().contains("passed: 1, failed: 1"));
    }
}
