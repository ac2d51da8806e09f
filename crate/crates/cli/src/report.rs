//! Reports as ordered key/value lists, rendered as text or JSON.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub kind: String,
    entries: Map<String, Value>,
}

impl Report {
    pub fn new(kind: &str) -> Self {
        Report { kind: kind.to_string(), entries: Map::new() }
    }

    pub fn push(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).expect("serialisable report value");
        self.entries.insert(key.to_string(), v);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn text(&self) -> String {
        let mut out = format!("# {}\n", self.kind);
        for (k, v) in &self.entries {
            render(&mut out, k, v, 0);
        }
        out
    }

    pub fn json(&self) -> String {
        let mut m = Map::new();
        m.insert("report".into(), Value::String(self.kind.clone()));
        m.extend(self.entries.clone());
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json");
        s.push('\n');
        s
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.json()
        } else {
            self.text()
        }
    }
}

fn render(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::String(s) => out.push_str(&format!("{pad}{key}: {s}\n")),
        Value::Object(m) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, x) in m {
                render(out, k, x, depth + 1);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object()) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (i, x) in xs.iter().enumerate() {
                render(out, &format!("[{i}]"), x, depth + 1);
            }
        }
        Value::Array(xs) if xs.iter().all(Value::is_string) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for x in xs {
                out.push_str(&format!("{pad}  {}\n", x.as_str().unwrap_or_default()));
            }
        }
        other => out.push_str(&format!("{pad}{key}: {other}\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_keep_order() {
        let mut r = Report::new("demo");
        r.push("zeta", 1).push("alpha", "x").push("nested", serde_json::json!({"b": [1, 2], "a": true}));
        assert_eq!(r.text(), "# demo\nzeta: 1\nalpha: x\nnested:\n  b: [1,2]\n  a: true\n");
        let j: Value = serde_json::from_str(&r.json()).unwrap();
        assert_eq!(j["report"], "demo");
        assert!(r.json().find("zeta").unwrap() < r.json().find("alpha").unwrap());
    }
}
