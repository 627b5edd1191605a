//! Flat key-value report documents.

use std::fmt::Write as _;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "Infinity" } else { "-Infinity" }.to_string()
    } else if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Nums(Vec<f64>),
    Strs(Vec<String>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Value {
        Value::Num(v)
    }
}
impl From<usize> for Value {
    fn from(v: usize) -> Value {
        Value::Int(v as i64)
    }
}
impl From<i64> for Value {
    fn from(v: i64) -> Value {
        Value::Int(v)
    }
}
impl From<u64> for Value {
    fn from(v: u64) -> Value {
        Value::Int(v as i64)
    }
}
impl From<bool> for Value {
    fn from(v: bool) -> Value {
        Value::Bool(v)
    }
}
impl From<&str> for Value {
    fn from(v: &str) -> Value {
        Value::Str(v.to_string())
    }
}
impl From<String> for Value {
    fn from(v: String) -> Value {
        Value::Str(v)
    }
}
impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Value {
        Value::Nums(v)
    }
}
impl From<Vec<String>> for Value {
    fn from(v: Vec<String>) -> Value {
        Value::Strs(v)
    }
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn json_num(v: f64) -> String {
    // JSON has no non-finite numbers
    if v.is_finite() {
        fmt_f64(v)
    } else {
        quote(&fmt_f64(v))
    }
}

impl Value {
    fn json(&self) -> String {
        match self {
            Value::Num(v) => json_num(*v),
            Value::Int(v) => v.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => quote(s),
            Value::Nums(v) => format!("[{}]", v.iter().map(|x| json_num(*x)).collect::<Vec<_>>().join(", ")),
            Value::Strs(v) => format!("[{}]", v.iter().map(|x| quote(x)).collect::<Vec<_>>().join(", ")),
        }
    }

    pub fn text(&self) -> String {
        match self {
            Value::Num(v) => fmt_f64(*v),
            Value::Str(s) => s.clone(),
            Value::Nums(v) => v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" "),
            Value::Strs(v) => v.join(", "),
            other => other.json(),
        }
    }
}

/// Ordered key-value document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(String, Value)>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn set(&mut self, key: impl Into<String>, v: impl Into<Value>) -> &mut Report {
        let key = key.into();
        let v = v.into();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = v,
            None => self.entries.push((key, v)),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        for (i, (k, v)) in self.entries.iter().enumerate() {
            let sep = if i == 0 { "" } else { "," };
            let _ = write!(out, "{sep}\n  {}: {}", quote(k), v.json());
        }
        out.push_str("\n}\n");
        out
    }

    /// Single-line JSON object, for record streams.
    pub fn to_json_line(&self) -> String {
        let body: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| format!("{}: {}", quote(k), v.json()))
            .collect();
        format!("{{{}}}", body.join(", "))
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}: {}", v.text());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 1.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn json_is_valid_and_ordered() {
        let mut r = Report::new();
        r.set("tag", "II0")
            .set("b", vec![1.0, 0.5])
            .set("ok", true)
            .set("a", f64::NAN);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["tag"], "II0");
        assert_eq!(v["b"][1], 0.5);
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["tag", "b", "ok", "a"]);
    }
}
