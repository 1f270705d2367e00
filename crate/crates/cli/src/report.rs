use anyhow::Result;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt::Write as _;

/// Slack used when a measured value sits exactly on its bound.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }
}

/// One comparison of a measured value against the bound it is checked with.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expression: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, expression: &str, value: f64, bound: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expression: expression.into(),
            value,
            relation: Relation::AtMost,
            bound,
            pass: value <= bound + tol,
        }
    }

    pub fn at_least(name: &str, expression: &str, value: f64, bound: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expression: expression.into(),
            value,
            relation: Relation::AtLeast,
            bound,
            pass: value + tol >= bound,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything a run emits. Contains no timestamps, so identical inputs give
/// identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: Map<String, Value>,
    pub measurements: Map<String, Value>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub listing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>, config: Map<String, Value>) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            config,
            measurements: Map::new(),
            listing: Vec::new(),
            table: None,
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn measure<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).expect("measurements serialize");
        self.measurements.insert(key.into(), v);
    }

    pub fn check(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Text => Ok(self.render_text()),
            Format::Csv => self.render_csv(),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        for line in &self.listing {
            let _ = writeln!(s, "{line}");
        }
        let _ = writeln!(s, "command: pmdkit {}", self.command);
        let _ = writeln!(s, "version: {}", self.version);
        match self.seed {
            Some(seed) => {
                let _ = writeln!(s, "seed: {seed}");
            }
            None => s.push_str("seed: none\n"),
        }
        s.push_str("config:\n");
        for (k, v) in &self.config {
            let _ = writeln!(s, "  {k} = {}", scalar_text(v));
        }
        if !self.measurements.is_empty() {
            s.push_str("measurements:\n");
            for (k, v) in &self.measurements {
                let _ = writeln!(s, "  {k} = {}", scalar_text(v));
            }
        }
        if let Some(table) = &self.table {
            let _ = writeln!(s, "table ({} rows):", table.rows.len());
            s.push_str(&aligned(table));
        }
        if !self.checks.is_empty() {
            s.push_str("checks:\n");
            for c in &self.checks {
                let _ = writeln!(
                    s,
                    "  {} {}: {} {} {}  [{}]",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    number(c.value),
                    c.relation.symbol(),
                    number(c.bound),
                    c.expression
                );
            }
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        let _ = writeln!(
            s,
            "result: {} ({passed}/{} checks)",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        s
    }

    /// The table if there is one, otherwise the checks.
    fn render_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(table) => {
                w.write_record(&table.columns)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(scalar_text))?;
                }
            }
            None => {
                w.write_record(["name", "value", "relation", "bound", "pass", "expression"])?;
                for c in &self.checks {
                    w.write_record([
                        c.name.clone(),
                        c.value.to_string(),
                        c.relation.symbol().to_string(),
                        c.bound.to_string(),
                        c.pass.to_string(),
                        c.expression.clone(),
                    ])?;
                }
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest round-trip form, in scientific notation when very small or large.
fn number(x: f64) -> String {
    if x != 0.0 && x.is_finite() && !(1e-4..1e6).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Strings without quotes, everything else as compact JSON.
fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn aligned(table: &Table) -> String {
    let cells: Vec<Vec<String>> = std::iter::once(table.columns.clone())
        .chain(table.rows.iter().map(|r| r.iter().map(scalar_text).collect()))
        .collect();
    let widths: Vec<usize> = (0..table.columns.len())
        .map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in cells {
        s.push_str("  ");
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        s.push_str(line.join("  ").trim_end());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        let mut r = Report::new("demo", Some(3), Map::new());
        r.measure("epsilon", 0.75);
        r.check(Check::at_most("bound", "eps <= 1", 0.75, 1.0, 0.0));
        r
    }

    #[test]
    fn failing_check_fails_the_report() {
        let mut r = sample();
        assert!(r.pass);
        r.check(Check::at_least("fidelity", "F >= 0.9", 0.5, 0.9, CHECK_TOLERANCE));
        assert!(!r.pass);
        assert!(r.render(Format::Text).unwrap().contains("FAIL fidelity"));
    }

    #[test]
    fn tolerance_admits_values_on_the_bound() {
        assert!(Check::at_most("x", "x <= 1", 1.0 + 1e-12, 1.0, CHECK_TOLERANCE).pass);
        assert!(!Check::at_most("x", "x <= 1", 1.0 + 1e-6, 1.0, CHECK_TOLERANCE).pass);
    }

    #[test]
    fn csv_prefers_the_table() {
        let mut r = sample();
        assert!(r.render(Format::Csv).unwrap().starts_with("name,value"));
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![json!(1), json!("x,y")]);
        r.table = Some(t);
        assert_eq!(r.render(Format::Csv).unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn json_report_parses_back() {
        let text = sample().render(Format::Json).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["checks"][0]["relation"], "<=");
        assert_eq!(v["measurements"]["epsilon"], 0.75);
        assert!(v.get("table").is_none());
    }
}
