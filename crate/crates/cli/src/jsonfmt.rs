//! Deterministic serialization helpers.
//!
//! Every floating-point number is written with 17 significant digits
//! (`{:.16e}`), which round-trips IEEE-754 doubles exactly and keeps output
//! files byte-identical for identical inputs. JSON documents are assembled
//! by hand so the field order and number formatting are fully under our
//! control.

use retropast_core::ComplexMatrix;

/// Format a double with 17 significant digits (exact round-trip).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Escape a string for embedding in a JSON document.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// A JSON value rendered to a string with deterministic formatting.
#[derive(Debug, Clone)]
pub enum Json {
    #[allow(dead_code)]
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(x) => out.push_str(&fmt17(*x)),
            Json::Str(s) => {
                out.push('"');
                out.push_str(&json_escape(s));
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
                    newline(out, indent + 1);
                    item.write(out, indent + 1);
                }
                newline(out, indent);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline(out, indent + 1);
                    out.push('"');
                    out.push_str(&json_escape(key));
                    out.push_str("\": ");
                    value.write(out, indent + 1);
                }
                newline(out, indent);
                out.push('}');
            }
        }
    }
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Serialize a complex matrix in the interchange format: row-major entries
/// as `[re, im]` pairs with declared dimensions.
pub fn matrix_json(m: &ComplexMatrix) -> Json {
    let mut data = Vec::with_capacity(m.rows() * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let z = m[(r, c)];
            data.push(Json::Arr(vec![Json::Num(z.re), Json::Num(z.im)]));
        }
    }
    Json::Obj(vec![
        ("rows".into(), Json::Int(m.rows() as i64)),
        ("cols".into(), Json::Int(m.cols() as i64)),
        ("data".into(), Json::Arr(data)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.25, 1.0 / 3.0, 0.375, 1e-300, 0.0, 123456.789] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn renders_valid_json() {
        let doc = Json::Obj(vec![
            ("a".into(), Json::Num(0.25)),
            ("b".into(), Json::Str("x\"y".into())),
            ("c".into(), Json::Arr(vec![Json::Int(1), Json::Null])),
        ]);
        let parsed: serde_json::Value = serde_json::from_str(&doc.render()).unwrap();
        assert_eq!(parsed["a"].as_f64().unwrap(), 0.25);
        assert_eq!(parsed["b"].as_str().unwrap(), "x\"y");
    }
}
