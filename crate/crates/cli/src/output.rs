use std::io::Write;

use anyhow::anyhow;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Failure, Format, Global};

/// One command's output in both shapes. `csv` is `None` where rows are not natural.
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub csv: Option<String>,
    pub wall_time: f64,
}

impl Report {
    pub fn new(command: &'static str, config: Value, result: &impl Serialize, wall_time: f64) -> Result<Self, Failure> {
        let mut result = serde_json::to_value(result)?;
        // keep timings out of the payload so reruns are byte-identical
        if let Some(obj) = result.as_object_mut() {
            obj.remove("wall_time");
        }
        Ok(Self { command, config, result, csv: None, wall_time })
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn render(&self, format: Format) -> Result<String, Failure> {
        match format {
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "config": self.config,
                    "result": self.result,
                    "timing": { "wall_time_s": self.wall_time },
                });
                Ok(serde_json::to_string_pretty(&doc)? + "\n")
            }
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| Failure::Input(anyhow!("`{}` has no CSV output; use --format json", self.command))),
        }
    }
}

pub fn write(global: &Global, text: &str) -> Result<(), Failure> {
    match &global.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(anyhow!("writing {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
