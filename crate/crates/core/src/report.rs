//! Text and JSON rendering of verification results.
//!
//! Every number is written as a decimal string: complex values with all
//! significant digits of their precision, residuals and tolerances with the
//! shortest representation that round-trips. Both formats are built from the
//! same [`NumericRecord`]s so they carry identical numeric content.

use std::fmt::Write as _;

use rug::Complex;
use serde::ser::{Serialize, SerializeMap, Serializer};
use serde::Serialize as DeriveSerialize;

use crate::verify::{summarize, IdentityResult, Summary};

/// Full-precision decimal rendering of a complex value.
#[derive(Clone, Debug, PartialEq, Eq, DeriveSerialize)]
pub struct ComplexStr {
    pub re: String,
    pub im: String,
}

impl ComplexStr {
    pub fn new(z: &Complex) -> Self {
        Self {
            re: z.real().to_string_radix(10, None),
            im: z.imag().to_string_radix(10, None),
        }
    }
}

/// Shortest round-trip decimal form of an `f64`.
pub fn float_str(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Named values serialized as a JSON object in insertion order.
#[derive(Clone, Debug)]
pub struct Ordered<V>(pub Vec<(String, V)>);

impl<V: Serialize> Serialize for Ordered<V> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// One result with every number already rendered.
#[derive(Clone, Debug, DeriveSerialize)]
pub struct NumericRecord {
    pub id: String,
    pub trial: usize,
    pub params: Ordered<ComplexStr>,
    pub lhs: Option<ComplexStr>,
    pub rhs: Option<ComplexStr>,
    pub residual: String,
    pub tol: String,
    pub pass: bool,
    pub rejected: usize,
    pub diagnostics: Ordered<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl NumericRecord {
    pub fn new(r: &IdentityResult) -> Self {
        Self {
            id: r.id.clone(),
            trial: r.trial,
            params: Ordered(
                r.params
                    .iter()
                    .map(|(k, v)| (k.clone(), ComplexStr::new(v)))
                    .collect(),
            ),
            lhs: r.lhs.as_ref().map(ComplexStr::new),
            rhs: r.rhs.as_ref().map(ComplexStr::new),
            residual: float_str(r.residual),
            tol: float_str(r.tolerance),
            pass: r.pass,
            rejected: r.rejected,
            diagnostics: Ordered(r.diagnostics.clone()),
            error: r.error.clone(),
        }
    }
}

#[derive(DeriveSerialize)]
struct Meta {
    seed: String,
    precision: String,
    trials: String,
    suites: Vec<String>,
    /// `q` of every draw, in result order.
    q_samples: Vec<ComplexStr>,
}

#[derive(DeriveSerialize)]
struct SummaryOut {
    max_residual: String,
    failures: String,
    total: String,
    rejected: String,
}

#[derive(DeriveSerialize)]
struct JsonReport {
    meta: Meta,
    results: Vec<NumericRecord>,
    summary: SummaryOut,
}

/// A finished run ready for rendering.
#[derive(Clone, Debug)]
pub struct Report {
    pub seed: u64,
    pub precision_bits: u32,
    pub trials: usize,
    pub suites: Vec<String>,
    pub results: Vec<IdentityResult>,
}

impl Report {
    pub fn summary(&self) -> Summary {
        summarize(&self.results)
    }

    /// `q` of each distinct draw, in result order.
    fn q_samples(&self) -> Vec<ComplexStr> {
        let mut out: Vec<ComplexStr> = Vec::new();
        let mut last: Option<(&str, usize)> = None;
        for r in &self.results {
            if last == Some((r.id.as_str(), r.trial)) {
                continue;
            }
            last = Some((r.id.as_str(), r.trial));
            if let Some((_, q)) = r.params.iter().find(|(k, _)| k == "q") {
                let q = ComplexStr::new(q);
                if out.last() != Some(&q) {
                    out.push(q);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let s = self.summary();
        let doc = JsonReport {
            meta: Meta {
                seed: self.seed.to_string(),
                precision: self.precision_bits.to_string(),
                trials: self.trials.to_string(),
                suites: self.suites.clone(),
                q_samples: self.q_samples(),
            },
            results: self.results.iter().map(NumericRecord::new).collect(),
            summary: SummaryOut {
                max_residual: float_str(s.max_residual),
                failures: s.failures.to_string(),
                total: s.total.to_string(),
                rejected: s.rejected.to_string(),
            },
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "seed {} precision {} trials {} suites {}",
            self.seed,
            self.precision_bits,
            self.trials,
            self.suites.join(",")
        );
        for r in self.results.iter().map(NumericRecord::new) {
            let _ = writeln!(
                out,
                "{} {} trial {} residual {} tol {} rejected {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.id,
                r.trial,
                r.residual,
                r.tol,
                r.rejected
            );
            for (k, v) in &r.params.0 {
                let _ = writeln!(out, "    {k} = {} + {}i", v.re, v.im);
            }
            for (name, v) in [("lhs", &r.lhs), ("rhs", &r.rhs)] {
                if let Some(v) = v {
                    let _ = writeln!(out, "    {name} = {} + {}i", v.re, v.im);
                }
            }
            for (k, v) in &r.diagnostics.0 {
                let _ = writeln!(out, "    {k}: {v}");
            }
            if let Some(e) = &r.error {
                let _ = writeln!(out, "    error: {e}");
            }
        }
        let s = self.summary();
        let _ = writeln!(
            out,
            "summary: {} results, {} failures, max residual {}, {} rejected draws",
            s.total,
            s.failures,
            float_str(s.max_residual),
            s.rejected
        );
        out
    }
}

/// Process exit status for a result set: 0 when every result passes, 1 otherwise.
pub fn exit_status(results: &[IdentityResult]) -> i32 {
    if results.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(pass: bool) -> IdentityResult {
        let z = Complex::with_val(128, (1.5, -0.25));
        IdentityResult {
            id: "x".into(),
            trial: 0,
            params: vec![("q".into(), z.clone())],
            lhs: Some(z.clone()),
            rhs: Some(z),
            residual: 1.25e-40,
            tolerance: 1e-30,
            pass,
            rejected: 0,
            diagnostics: vec![("n".into(), "2".into())],
            error: None,
        }
    }

    #[test]
    fn json_numbers_are_strings_and_match_text() {
        let rep = Report {
            seed: 1,
            precision_bits: 128,
            trials: 1,
            suites: vec!["lemmas".into()],
            results: vec![sample(true)],
        };
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        let r = &json["results"][0];
        assert_eq!(r["residual"], "1.25e-40");
        assert_eq!(json["summary"]["failures"], "0");
        let re = r["lhs"]["re"].as_str().unwrap();
        assert!(rep.to_text().contains(re));
        assert!(rep.to_text().contains("1.25e-40"));
        assert_eq!(json["meta"]["q_samples"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn exit_status_is_all_pass() {
        assert_eq!(exit_status(&[]), 0);
        assert_eq!(exit_status(&[sample(true)]), 0);
        assert_eq!(exit_status(&[sample(true), sample(false)]), 1);
    }
}
