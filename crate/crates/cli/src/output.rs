//! Flat records rendered as json-lines, CSV or plain text.

use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    JsonLines,
    Csv,
    Plain,
}

/// Ordered key/value pairs; key order is output order.
#[derive(Debug, Clone, Default)]
pub struct Record(Vec<(&'static str, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    /// Integers beyond 2^53 are kept exact by writing them as strings.
    pub fn int(self, key: &'static str, value: u128) -> Self {
        let v = if value < (1u128 << 53) { Value::from(value as u64) } else { Value::from(value.to_string()) };
        self.with(key, v)
    }

    fn json(&self) -> String {
        let fields: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("{}:{}", Value::from(*k), v))
            .collect();
        format!("{{{}}}", fields.join(","))
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn write_records(out: &mut dyn Write, format: Format, records: &[Record]) -> io::Result<()> {
    match format {
        Format::JsonLines => {
            for r in records {
                writeln!(out, "{}", r.json())?;
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                w.write_record(first.0.iter().map(|(k, _)| *k))?;
            }
            for r in records {
                w.write_record(r.0.iter().map(|(_, v)| cell(v)))?;
            }
            w.flush()?;
        }
        Format::Plain => {
            for r in records {
                let parts: Vec<String> = r.0.iter().map(|(k, v)| format!("{k}={}", cell(v))).collect();
                writeln!(out, "{}", parts.join(" "))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(format: Format, records: &[Record]) -> String {
        let mut buf = Vec::new();
        write_records(&mut buf, format, records).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn keeps_key_order_and_big_integers() {
        let r = Record::new().with("z", "1/2").int("big", u128::MAX).int("small", 7);
        let line = render(Format::JsonLines, std::slice::from_ref(&r));
        assert_eq!(line, format!("{{\"z\":\"1/2\",\"big\":\"{}\",\"small\":7}}\n", u128::MAX));
        assert_eq!(render(Format::Plain, std::slice::from_ref(&r)), format!("z=1/2 big={} small=7\n", u128::MAX));
        assert_eq!(render(Format::Csv, &[r]), format!("z,big,small\n1/2,{},7\n", u128::MAX));
    }
}
