//! Deterministic report emission.
//!
//! Reports are JSON documents with insertion-ordered keys, computed floats
//! printed with exactly 12 significant digits, and config-echo floats
//! printed in shortest round-trip form (so that re-parsing the echo
//! reproduces the config bit-for-bit). Non-finite values are encoded as
//! the strings "nan", "inf", "-inf". Two runs with the same config produce
//! byte-identical files.

use std::collections::BTreeMap;

use sdl_core::certificates::CertificateReport;

/// Ordered JSON value with the two float flavours.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    /// Computed quantity: fixed 12-significant-digit scientific form.
    Num(f64),
    /// Configuration echo: shortest round-trip form.
    Exact(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        if let Json::Obj(entries) = self {
            entries.push((key.to_string(), value));
        } else {
            panic!("push on non-object JSON value");
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(x) => out.push_str(&fmt_fixed(*x)),
            Json::Exact(x) => out.push_str(&fmt_exact(*x)),
            Json::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        '\r' => out.push_str("\\r"),
                        c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Obj(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in entries.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    Json::Str(k.clone()).write(out, indent + 1);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// 12-significant-digit scientific format, stable across platforms.
pub fn fmt_fixed(x: f64) -> String {
    if x.is_nan() {
        return "\"nan\"".into();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Shortest round-trip decimal form (used for config echoes).
pub fn fmt_exact(x: f64) -> String {
    if x.is_nan() {
        return "\"nan\"".into();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        };
    }
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x}");
    // Keep the value a JSON number (Display omits a decimal point for
    // integral floats, which is still valid JSON).
    s
}

/// Serialize any serde value through `serde_json`, then convert into the
/// ordered representation with exact floats (for config echoes).
pub fn echo<T: serde::Serialize>(value: &T) -> Json {
    let v = serde_json::to_value(value).expect("config serialization is total");
    from_serde(&v)
}

fn from_serde(v: &serde_json::Value) -> Json {
    match v {
        serde_json::Value::Null => Json::Null,
        serde_json::Value::Bool(b) => Json::Bool(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Json::Int(i)
            } else {
                Json::Exact(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        serde_json::Value::String(s) => Json::Str(s.clone()),
        serde_json::Value::Array(items) => Json::Arr(items.iter().map(from_serde).collect()),
        serde_json::Value::Object(map) => {
            // serde_json object iteration is alphabetical (BTreeMap based),
            // which is deterministic; keep that order.
            Json::Obj(
                map.iter()
                    .map(|(k, v)| (k.clone(), from_serde(v)))
                    .collect(),
            )
        }
    }
}

pub fn constants_json(constants: &BTreeMap<String, f64>) -> Json {
    Json::Obj(
        constants
            .iter()
            .map(|(k, v)| (k.clone(), Json::Num(*v)))
            .collect(),
    )
}

pub fn certificate_json(rep: &CertificateReport) -> Json {
    let mut j = Json::obj();
    j.push("id", Json::Str(rep.id.as_str().into()));
    j.push("lhs", Json::Num(rep.lhs));
    j.push("rhs", Json::Num(rep.rhs));
    j.push("strict", Json::Bool(rep.strict));
    j.push("holds", Json::Bool(rep.holds));
    j.push("margin", Json::Num(rep.margin));
    j.push("constants", constants_json(&rep.constants));
    if !rep.note.is_empty() {
        j.push("note", Json::Str(rep.note.clone()));
    }
    j
}

/// A CSV table with fixed float formatting (bare, unquoted tokens).
pub struct Csv {
    header: &'static str,
    rows: Vec<String>,
}

impl Csv {
    pub fn new(header: &'static str) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        let row = cells
            .iter()
            .map(|c| match c {
                CsvCell::Num(x) => fmt_fixed(*x).trim_matches('"').to_string(),
                CsvCell::Str(s) => s.to_string(),
            })
            .collect::<Vec<_>>()
            .join(",");
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 64 + 64);
        out.push_str(self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }
}

pub enum CsvCell<'a> {
    Num(f64),
    Str(&'a str),
}
