//! Result documents written to stdout.
//!
//! Every command emits one JSON object:
//!
//! ```json
//! {
//!   "command": "expectation",
//!   "input_digest": "sha256:...",
//!   "root": 0,
//!   "values": {"expectation": 1.5},
//!   "diagnostics": {"condition_estimate": 4, "residual": 0, "warnings": []}
//! }
//! ```
//!
//! Floating-point numbers are printed like C's `%.17g`, which round-trips
//! every `f64`. Non-finite values become `null` with a warning.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{json, Map, Value};

/// `x` with 17 significant digits, `%.17g` style.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_fraction(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa.to_string()), exp.abs())
    }
}

fn trim_fraction(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Pretty printing with `%.17g` floats.
struct G17(PrettyFormatter<'static>);

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_number(value).as_bytes())
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` with two-space indentation and `%.17g` floats.
pub fn to_pretty_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A result under construction.
#[derive(Debug, Clone)]
pub struct ResultDocument {
    pub command: String,
    pub input_digest: String,
    pub root: Option<usize>,
    pub values: Map<String, Value>,
    pub diagnostics: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl ResultDocument {
    pub fn new(command: &str, input_digest: String) -> Self {
        Self {
            command: command.to_string(),
            input_digest,
            root: None,
            values: Map::new(),
            diagnostics: Map::new(),
            warnings: Vec::new(),
        }
    }

    /// Sets a value; non-finite numbers become `null` with a warning.
    pub fn value(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        let v = v.into();
        self.values.insert(key.to_string(), v);
        self
    }

    pub fn number(&mut self, key: &str, x: f64) -> &mut Self {
        if !x.is_finite() {
            self.warnings.push(format!("{key} is {x}, written as null"));
        }
        self.value(key, x)
    }

    pub fn diagnostic(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.diagnostics.insert(key.to_string(), v.into());
        self
    }

    pub fn warn(&mut self, message: impl Into<String>) -> &mut Self {
        self.warnings.push(message.into());
        self
    }

    pub fn to_value(&self) -> Value {
        let mut diagnostics = self.diagnostics.clone();
        diagnostics.insert("warnings".into(), json!(self.warnings));
        json!({
            "command": self.command,
            "input_digest": self.input_digest,
            "root": self.root,
            "values": self.values,
            "diagnostics": diagnostics,
        })
    }

    pub fn render(&self) -> String {
        let mut s = to_pretty_string(&self.to_value());
        s.push('\n');
        s
    }
}
