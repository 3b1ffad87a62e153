//! Scenario reports with deterministic serialization: floats carry 17
//! significant digits so every double round-trips exactly, keys are
//! ordered, and the wall-clock field is omitted in serial mode.

use std::collections::BTreeMap;
use std::io;

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub tables: BTreeMap<String, serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    pub pass: bool,
}

impl Report {
    pub fn new(scenario: &str, config: BTreeMap<String, String>) -> Self {
        Report {
            scenario: scenario.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            checks: Vec::new(),
            tables: BTreeMap::new(),
            wall_time_s: None,
            pass: true,
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, value: f64, threshold: f64) {
        self.pass &= pass;
        self.checks.push(Check {
            name: name.to_string(),
            pass,
            value,
            threshold,
        });
    }

    pub fn table(&mut self, name: &str, value: serde_json::Value) {
        self.tables.insert(name.to_string(), value);
    }

    pub fn merge_prefixed(&mut self, prefix: &str, other: Report) {
        for c in other.checks {
            self.pass &= c.pass;
            self.checks.push(Check {
                name: format!("{prefix}.{}", c.name),
                ..c
            });
        }
        for (k, v) in other.tables {
            self.tables.insert(format!("{prefix}.{k}"), v);
        }
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        let mut serializer =
            serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::default());
        self.serialize(&mut serializer).expect("report serializes");
        buf.push(b'\n');
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// `serde_json` formatter printing every float with 17 significant digits.
#[derive(Default)]
pub struct SignificantDigits {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    // delegate structure to the pretty formatter
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.pretty, w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.pretty, w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, w, first)
    }
    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object_key(&mut self.pretty, w)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, w)
    }
}
