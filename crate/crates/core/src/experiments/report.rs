//! Sweep results and their CSV/JSON forms.
//!
//! CSV layout: a `#`-prefixed header block (tool version, seed base,
//! scenario digest, truncation flag, then the scenario and sweep echoed as
//! `# scenario.key = value` / `# sweep.key = value` lines), one header row,
//! one row per point × quantity × method. The JSON form carries the same
//! fields plus the wall-clock time. Both re-parse into a [`RunReport`].

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytic::Method;
use crate::error::{QhetError, Result};

use super::sweep::{Parameter, Quantity};

pub const CSV_COLUMNS: &str = "parameter,value,quantity,method,result,std_err,minus_1sigma,plus_1sigma,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Value of the swept parameter.
    pub value: f64,
    pub quantity: Quantity,
    pub method: Method,
    pub result: f64,
    /// One-sigma statistical error; Monte-Carlo records only.
    pub std_err: Option<f64>,
    /// Record seed; Monte-Carlo records only.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub parameter: Parameter,
    pub seed_base: u64,
    /// Canonical scenario text, overrides applied.
    pub scenario: String,
    pub scenario_digest: String,
    /// Canonical sweep text.
    pub sweep: String,
    pub records: Vec<Record>,
    pub truncated: bool,
    pub wall_clock_s: f64,
}

impl RunReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# tool: {}", self.tool_version)?;
        writeln!(w, "# seed_base: {}", self.seed_base)?;
        writeln!(w, "# scenario_digest: {}", self.scenario_digest)?;
        writeln!(w, "# truncated: {}", self.truncated)?;
        for line in self.scenario.lines() {
            writeln!(w, "# scenario.{line}")?;
        }
        for line in self.sweep.lines() {
            writeln!(w, "# sweep.{line}")?;
        }
        writeln!(w, "{CSV_COLUMNS}")?;
        for r in &self.records {
            let (err, lo, hi) = match r.std_err {
                Some(e) => (e.to_string(), (r.result - e).to_string(), (r.result + e).to_string()),
                None => Default::default(),
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                self.parameter.as_str(),
                r.value,
                r.quantity.as_str(),
                r.method.as_str(),
                r.result,
                err,
                lo,
                hi,
                r.seed.map(|s| s.to_string()).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Parses the CSV form. The wall-clock time is not part of the CSV and
    /// comes back as zero.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut header = std::collections::BTreeMap::new();
        let (mut scenario, mut sweep) = (String::new(), String::new());
        let mut records = Vec::new();
        let mut parameter = None;
        let mut seen_columns = false;
        for (idx, line) in text.lines().enumerate() {
            let perr = |message: String| QhetError::Parse { line: idx + 1, message };
            if let Some(rest) = line.strip_prefix("# ") {
                if let Some(kv) = rest.strip_prefix("scenario.") {
                    scenario.push_str(kv);
                    scenario.push('\n');
                } else if let Some(kv) = rest.strip_prefix("sweep.") {
                    sweep.push_str(kv);
                    sweep.push('\n');
                } else if let Some((k, v)) = rest.split_once(": ") {
                    header.insert(k.to_string(), v.to_string());
                }
                continue;
            }
            if !seen_columns {
                if line != CSV_COLUMNS {
                    return Err(perr(format!("expected column row `{CSV_COLUMNS}`")));
                }
                seen_columns = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(perr(format!("expected 9 columns, got {}", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| perr(format!("`{s}` is not a number")));
            let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
            parameter = Some(cols[0].parse::<Parameter>()?);
            records.push(Record {
                value: num(cols[1])?,
                quantity: cols[2].parse()?,
                method: cols[3].parse()?,
                result: num(cols[4])?,
                std_err: opt(cols[5])?,
                seed: if cols[8].is_empty() {
                    None
                } else {
                    Some(cols[8].parse().map_err(|_| perr(format!("bad seed `{}`", cols[8])))?)
                },
            });
        }
        let need = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| QhetError::Parse { line: 0, message: format!("missing header `{k}`") })
        };
        let parameter = match parameter {
            Some(p) => p,
            None => sweep
                .lines()
                .find_map(|l| l.strip_prefix("parameter = "))
                .ok_or_else(|| QhetError::Parse { line: 0, message: "missing sweep parameter".into() })?
                .parse()?,
        };
        Ok(RunReport {
            tool_version: need("tool")?,
            parameter,
            seed_base: need("seed_base")?
                .parse()
                .map_err(|_| QhetError::Parse { line: 0, message: "bad seed_base".into() })?,
            scenario,
            scenario_digest: need("scenario_digest")?,
            sweep,
            records,
            truncated: need("truncated")? == "true",
            wall_clock_s: 0.0,
        })
    }

    /// Equality of everything except the wall-clock time.
    pub fn same_results(&self, other: &RunReport) -> bool {
        RunReport { wall_clock_s: 0.0, ..self.clone() } == RunReport { wall_clock_s: 0.0, ..other.clone() }
    }

    /// Lines of the CSV output after the tool-version line.
    pub fn csv_body(&self) -> String {
        self.to_csv_string().lines().skip(1).collect::<Vec<_>>().join("\n")
    }
}
