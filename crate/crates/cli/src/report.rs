//! Deterministic report rendering: JSON with sorted keys and 17-significant-digit floats,
//! and RFC 4180 CSV tables.

use std::time::Duration;

use serde_json::{Map, Value};

/// Column headers plus rows of preformatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub seed: Option<u64>,
    pub results: Value,
    pub table: Option<Table>,
}

/// Key holding the elapsed time; it is always written on a line of its own.
pub const TIMING_KEY: &str = "wall_time_seconds";

pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // JSON has no literal for these
        format!("\"{x}\"")
    }
}

/// CSV cells use the same float format as JSON.
pub fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_float(n.as_f64().unwrap()));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let scalar = items.iter().all(|x| !x.is_array() && !x.is_object());
            if scalar {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent + 1);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (i, x) in items.iter().enumerate() {
                    out.push_str(&pad);
                    write_value(out, x, indent + 1);
                    out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
                }
                out.push_str(&close);
                out.push(']');
            }
        }
        Value::Object(map) => write_object(out, map, indent, None),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, indent: usize, tail: Option<&str>) {
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    if map.is_empty() && tail.is_none() {
        out.push_str("{}");
        return;
    }
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push_str("{\n");
    for (i, k) in keys.iter().enumerate() {
        out.push_str(&pad);
        out.push_str(&Value::String((*k).clone()).to_string());
        out.push_str(": ");
        write_value(out, &map[*k], indent + 1);
        let last = i + 1 == keys.len() && tail.is_none();
        out.push_str(if last { "\n" } else { ",\n" });
    }
    if let Some(t) = tail {
        out.push_str(&pad);
        out.push_str(t);
        out.push('\n');
    }
    out.push_str(&close);
    out.push('}');
}

impl Report {
    /// JSON document; everything but the final timing line is a pure function of the
    /// configuration.
    pub fn to_json(&self, elapsed: Duration) -> String {
        let mut map = Map::new();
        map.insert("command".into(), Value::from(self.command));
        map.insert("config".into(), self.config.clone());
        map.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        map.insert("results".into(), self.results.clone());
        map.insert("version".into(), Value::from(usf_core::VERSION));
        let timing = format!("\"{TIMING_KEY}\": {:.6}", elapsed.as_secs_f64());
        let mut out = String::new();
        write_object(&mut out, &map, 0, Some(&timing));
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> Result<String, String> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| format!("--format: {} has no tabular output", self.command))?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| e.to_string();
        w.write_record(&table.headers).map_err(fail)?;
        for row in &table.rows {
            w.write_record(row).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| e.to_string())?;
        String::from_utf8(bytes).map_err(|e| e.to_string())
    }
}

/// Sorted-key JSON rendering of any value, without the report envelope.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_and_key_order() {
        let v = json!({"b": 1.5, "a": [1, 2], "c": {"z": null, "y": true}});
        let s = render(&v);
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.contains("1.5000000000000000e0"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"], json!(1.5));
    }

    #[test]
    fn timing_is_isolated() {
        let r = Report {
            command: "count",
            config: json!({"graph": "k2.txt"}),
            seed: None,
            results: json!({"count": 1}),
            table: None,
        };
        let a = r.to_json(Duration::from_millis(5));
        let b = r.to_json(Duration::from_millis(900));
        let strip = |s: &str| -> Vec<String> {
            s.lines()
                .filter(|l| !l.contains(TIMING_KEY))
                .map(str::to_string)
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.lines().filter(|l| l.contains(TIMING_KEY)).count(), 1);
        let parsed: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["results"]["count"], json!(1));
        assert!(r.to_csv().is_err());
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(&["name", "value"]);
        t.push(vec!["a,b".into(), "say \"hi\"".into()]);
        let r = Report {
            command: "x",
            config: Value::Null,
            seed: None,
            results: Value::Null,
            table: Some(t),
        };
        assert_eq!(
            r.to_csv().unwrap(),
            "name,value\n\"a,b\",\"say \"\"hi\"\"\"\n"
        );
    }
}
