//! Query results and their two renderings: JSON for machines and an aligned
//! table for people.

use serde::{Serialize, Serializer};

use crate::linalg::Complex;

/// A real number serialized with 12 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

/// Magnitudes below this are printed as zero.
const DISPLAY_ZERO: f64 = 1e-14;

impl Num {
    pub fn rounded(self) -> f64 {
        let x = self.0;
        if x.abs() < DISPLAY_ZERO {
            return 0.0;
        }
        format!("{x:.11e}").parse().expect("formatted float")
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.rounded())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Real(Num),
    Bool(bool),
    Complex { re: Num, im: Num },
}

impl Value {
    pub fn real(x: f64) -> Self {
        Value::Real(Num(x))
    }

    pub fn complex(z: Complex) -> Self {
        Value::Complex { re: Num(z.re), im: Num(z.im) }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Real(x) => Some(x.0),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry {
    pub label: String,
    pub value: Value,
    /// Sum-rule rows: the probability with the audited slot unmeasured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unmeasured: Option<Num>,
}

impl Entry {
    pub fn new(label: impl Into<String>, value: Value) -> Self {
        Self { label: label.into(), value, unmeasured: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRow {
    pub labels: Vec<String>,
    pub weight: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub query: String,
    pub kind: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Entry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histories: Option<Vec<HistoryRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Value>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub removed: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub added: Option<Vec<Vec<String>>>,
}

impl QueryResult {
    pub fn new(query: String, kind: &str, inputs: Vec<String>) -> Self {
        Self {
            query,
            kind: kind.to_string(),
            inputs,
            value: None,
            values: Vec::new(),
            histories: None,
            matrix: None,
            removed: None,
            added: None,
        }
    }

    pub fn entry(&self, label: &str) -> Option<&Value> {
        self.values.iter().find(|e| e.label == label).map(|e| &e.value)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    scenario: &'a str,
    queries: &'a [QueryResult],
}

pub fn to_json(scenario: &str, results: &[QueryResult]) -> String {
    let mut s = serde_json::to_string_pretty(&Report { scenario, queries: results }).expect("serializable");
    s.push('\n');
    s
}

/// `p/q` for the simplest fraction with `q <= 12` within 1e-9 of `x`,
/// otherwise 12 significant digits.
pub fn human(x: f64) -> String {
    if x.abs() < DISPLAY_ZERO {
        return "0".into();
    }
    for q in 1..=12u32 {
        let p = (x * q as f64).round();
        if (x - p / q as f64).abs() < 1e-9 {
            return if q == 1 { format!("{p}") } else { format!("{p}/{q}") };
        }
    }
    let r = Num(x).rounded();
    format!("{r}")
}

fn human_complex(re: f64, im: f64) -> String {
    let (re0, im0) = (re.abs() < DISPLAY_ZERO, im.abs() < DISPLAY_ZERO);
    match (re0, im0) {
        (_, true) => human(re),
        (true, false) => format!("{}i", human(im)),
        (false, false) if im < 0.0 => format!("{} - {}i", human(re), human(-im)),
        _ => format!("{} + {}i", human(re), human(im)),
    }
}

pub fn human_value(v: &Value) -> String {
    match v {
        Value::Real(x) => human(x.0),
        Value::Bool(b) => b.to_string(),
        Value::Complex { re, im } => human_complex(re.0, im.0),
    }
}

fn path(labels: &[String]) -> String {
    labels.join(" → ")
}

pub fn to_table(scenario: &str, results: &[QueryResult]) -> String {
    let mut out = format!("scenario {scenario}\n");
    for r in results {
        out.push_str(&format!("\nquery {}\n", r.query));
        if let Some(v) = &r.value {
            out.push_str(&format!("  value  {}\n", human_value(v)));
        }
        let width = r.values.iter().map(|e| e.label.chars().count()).max().unwrap_or(0);
        for e in &r.values {
            let pad = width - e.label.chars().count();
            out.push_str(&format!("  {}{}  {}", e.label, " ".repeat(pad), human_value(&e.value)));
            if let Some(u) = e.unmeasured {
                out.push_str(&format!("  (unmeasured {})", human(u.0)));
            }
            out.push('\n');
        }
        if let Some(rows) = &r.histories {
            let paths: Vec<String> = rows.iter().map(|h| path(&h.labels)).collect();
            let width = paths.iter().map(|p| p.chars().count()).max().unwrap_or(0);
            for (p, h) in paths.iter().zip(rows) {
                let pad = width - p.chars().count();
                out.push_str(&format!("  {p}{}  weight {}\n", " ".repeat(pad), human(h.weight.0)));
            }
            if rows.is_empty() {
                out.push_str("  (no histories)\n");
            }
        }
        if let Some(m) = &r.matrix {
            let cells: Vec<Vec<String>> = m.iter().map(|row| row.iter().map(human_value).collect()).collect();
            let width = cells.iter().flatten().map(|c| c.chars().count()).max().unwrap_or(0);
            for row in cells {
                let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
                out.push_str(&format!("  [ {} ]\n", line.join("  ")));
            }
        }
        for (name, list) in [("removed", &r.removed), ("added", &r.added)] {
            if let Some(list) = list {
                for l in list {
                    out.push_str(&format!("  {name} {}\n", path(l)));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(human(0.5), "1/2");
        assert_eq!(human(1.0 / 3.0 + 1e-12), "1/3");
        assert_eq!(human(0.25), "1/4");
        assert_eq!(human(1.0), "1");
        assert_eq!(human(-1e-17), "0");
        assert_eq!(human(0.123456789012345), "0.123456789012");
        assert_eq!(human_complex(0.0, -0.5), "-1/2i");
    }

    #[test]
    fn twelve_digits() {
        let v = serde_json::to_string(&Num(1.0 / 3.0)).unwrap();
        assert_eq!(v, "0.333333333333");
        assert_eq!(serde_json::to_string(&Num(-0.0)).unwrap(), "0.0");
        assert_eq!(serde_json::to_string(&Num(0.49999999999999994)).unwrap(), "0.5");
    }
}
