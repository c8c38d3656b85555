// SPDX-License-Identifier: Apache-2.0

//! Report envelope and deterministic serialization.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

pub const TOOL: &str = "chiralwalk";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Formats a float with 17 significant digits, the textual form used in
/// every report, CSV and digest.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number, or `null` when `x` is not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

struct FixedFloat<F> {
    inner: F,
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.inner.$name(writer $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for FixedFloat<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        end_object_key(),
        begin_object_value(),
        end_object_value(),
    );
}

/// Serializes with sorted keys and fixed float formatting.
pub fn canonical_json(value: &Value, pretty: bool) -> String {
    let mut buf = Vec::new();
    let result = if pretty {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat { inner: PrettyFormatter::new() });
        value.serialize(&mut ser)
    } else {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat { inner: serde_json::ser::CompactFormatter });
        value.serialize(&mut ser)
    };
    result.expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Everything one command invocation reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEnvelope {
    pub command: String,
    pub model_digest: String,
    pub parameters: Map<String, Value>,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl ReportEnvelope {
    pub fn new(command: &str, model_digest: &str, parameters: Map<String, Value>) -> Self {
        Self { command: command.into(), model_digest: model_digest.into(), parameters, results: Value::Null, warnings: Vec::new() }
    }

    pub fn to_value(&self) -> Value {
        let mut o = Map::new();
        o.insert("tool".into(), Value::from(TOOL));
        o.insert("version".into(), Value::from(VERSION));
        o.insert("command".into(), Value::from(self.command.clone()));
        o.insert("model_digest".into(), Value::from(self.model_digest.clone()));
        o.insert("parameters".into(), Value::Object(self.parameters.clone()));
        o.insert("results".into(), self.results.clone());
        o.insert("warnings".into(), Value::from(self.warnings.clone()));
        Value::Object(o)
    }

    pub fn to_json(&self) -> String {
        let mut s = canonical_json(&self.to_value(), true);
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let s = canonical_json(&json!({"b": 1, "a": [0.5, null]}), false);
        assert_eq!(s, r#"{"a":[5.0000000000000000e-1,null],"b":1}"#);
    }

    #[test]
    fn formatted_floats_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -7.25e17, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        let v: Value = serde_json::from_str(&canonical_json(&json!([0.1, 1e300]), true)).unwrap();
        assert_eq!(v, json!([0.1, 1e300]));
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(num(f64::INFINITY), Value::Null);
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
