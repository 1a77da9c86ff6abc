//! Report serialization: pretty JSON, flat CSV and aligned text.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{
    basin_csv, AttractorReport, BasinOutcome, JanosDiagnosis, StabilityReport, Witness,
};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Text,
}

pub trait Report: Serialize {
    /// `None` when the report has no tabular form.
    fn csv(&self) -> Option<String>;
    fn text(&self) -> String;
}

impl Report for AttractorReport {
    fn csv(&self) -> Option<String> {
        Some(self.attractor.to_csv())
    }

    fn text(&self) -> String {
        self.text_table()
    }
}

impl Report for StabilityReport {
    fn csv(&self) -> Option<String> {
        Some(self.to_csv())
    }

    fn text(&self) -> String {
        self.text_table()
    }
}

impl Report for JanosDiagnosis {
    fn csv(&self) -> Option<String> {
        let mut s = String::from("pair,value,argmax,value_doubled,argmax_doubled\n");
        for (i, p) in self.pairs.iter().enumerate() {
            s.push_str(&format!(
                "{i},{},{},{},{}\n",
                p.value, p.argmax, p.value_doubled, p.argmax_doubled
            ));
        }
        Some(s)
    }

    fn text(&self) -> String {
        self.text_table()
    }
}

impl Report for Vec<BasinOutcome> {
    fn csv(&self) -> Option<String> {
        Some(basin_csv(self))
    }

    fn text(&self) -> String {
        let mut s = format!("{:>6} {:>10} {:>6}\n", "sample", "label", "steps");
        for (i, o) in self.iter().enumerate() {
            s.push_str(&format!("{i:6} {:>10} {:6}\n", o.label.to_string(), o.steps));
        }
        s
    }
}

impl Report for Option<Witness> {
    fn csv(&self) -> Option<String> {
        None
    }

    fn text(&self) -> String {
        match self {
            None => "no witness found\n".to_string(),
            Some(w) => format!(
                "x = {:?}\nx' = {:?}\nd(x, x') = {:.6e}\nd_H(F(x), F(x')) = {:.6e}\nratio = {}\n",
                w.x.coords(),
                w.x_prime.coords(),
                w.point_distance,
                w.image_distance,
                w.ratio
            ),
        }
    }
}

pub fn render_report<R: Report + ?Sized>(report: &R, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => match report.csv() {
            Some(s) => Ok(s),
            None => invalid("this report has no CSV form"),
        },
        ReportFormat::Text => Ok(report.text()),
    }
}

pub fn emit_report<R: Report + ?Sized>(report: &R, format: ReportFormat, path: &Path) -> Result<()> {
    fs::write(path, render_report(report, format)?)?;
    Ok(())
}
