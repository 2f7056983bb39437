use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A measurement with no truth claim attached.
    Reported,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Reported => "reported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub experiment: String,
    pub name: String,
    pub status: Status,
    pub metric: f64,
    /// Human-readable bound, e.g. `<= 1e-6`; empty for reported rows.
    pub threshold: String,
    pub note: String,
}

impl CheckRecord {
    /// Pass when `metric <= bound`.
    pub fn at_most(experiment: &str, name: &str, metric: f64, bound: f64) -> Self {
        Self::judged(experiment, name, metric, metric <= bound, format!("<= {bound:e}"))
    }

    /// Pass when `metric >= bound`.
    pub fn at_least(experiment: &str, name: &str, metric: f64, bound: f64) -> Self {
        Self::judged(experiment, name, metric, metric >= bound, format!(">= {bound}"))
    }

    pub fn judged(experiment: &str, name: &str, metric: f64, ok: bool, threshold: String) -> Self {
        Self {
            experiment: experiment.into(),
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            metric,
            threshold,
            note: String::new(),
        }
    }

    pub fn reported(experiment: &str, name: &str, metric: f64) -> Self {
        Self {
            experiment: experiment.into(),
            name: name.into(),
            status: Status::Reported,
            metric,
            threshold: String::new(),
            note: String::new(),
        }
    }

    pub fn failed(experiment: &str, name: &str, reason: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            name: name.into(),
            status: Status::Fail,
            metric: f64::NAN,
            threshold: String::new(),
            note: reason.into(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub records: Vec<CheckRecord>,
}

impl RunSummary {
    pub fn fail_count(&self) -> usize {
        self.records.iter().filter(|r| r.status == Status::Fail).count()
    }

    /// Process exit status: the number of failed checks, saturated at 255.
    pub fn exit_code(&self) -> i32 {
        self.fail_count().min(255) as i32
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Config(format!("csv write failed: {e}"));
        w.write_record(["experiment", "check", "status", "metric", "threshold", "note"]).map_err(err)?;
        for r in &self.records {
            w.write_record([
                r.experiment.clone(),
                r.name.clone(),
                r.status.to_string(),
                format!("{:.16e}", r.metric),
                r.threshold.clone(),
                r.note.clone(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::Config(format!("csv write failed: {e}")))
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            write!(f, "{:<9} {:<16} {:<34} {:>12.4e} {}", r.status, r.experiment, r.name, r.metric, r.threshold)?;
            if !r.note.is_empty() {
                write!(f, "  ({})", r.note)?;
            }
            writeln!(f)?;
        }
        write!(f, "{} checks, {} failed", self.records.len(), self.fail_count())
    }
}
