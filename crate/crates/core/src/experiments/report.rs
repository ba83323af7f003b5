use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::scenario::ScenarioKind;
use crate::error::{Error, Result};
use crate::stats::LinearFit;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Artifacts go to `<out_dir>/<id>/`; `None` writes nothing.
    pub out_dir: Option<PathBuf>,
    /// Also write whitespace-separated `x y` files for external plotting.
    pub emit_plot_data: bool,
}

/// Outcome of one scenario: pass/fail, the measured numbers and where the
/// artifacts went.
#[derive(Debug, Clone, Serialize)]
pub struct Fragment {
    pub id: String,
    pub kind: ScenarioKind,
    pub pass: bool,
    /// Name of the metric that sweeps regress on.
    pub primary: String,
    /// Measured values, in a fixed per-kind order.
    pub metrics: Vec<(String, f64)>,
    pub artifacts: Vec<PathBuf>,
}

impl Fragment {
    pub(crate) fn new(id: &str, kind: ScenarioKind, primary: &str) -> Self {
        Self {
            id: id.to_string(),
            kind,
            pass: false,
            primary: primary.to_string(),
            metrics: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn primary_value(&self) -> f64 {
        self.metric(&self.primary).unwrap_or(f64::NAN)
    }

    /// Two-column `metric,value` CSV.
    pub fn write_metrics_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["metric", "value"])?;
        w.write_record(["pass", if self.pass { "1" } else { "0" }])?;
        for (name, value) in &self.metrics {
            w.write_record([name.as_str(), &value.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Regression of the primary metric against the swept axis.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRegression {
    /// `linear` (metric vs value), `exponential` (metric = A exp(-gamma
    /// value)) or `inverse_sqrt` (metric vs alpha / sqrt(value)).
    pub model: String,
    pub fit: LinearFit,
    /// Decay rate for the exponential model.
    pub gamma: Option<f64>,
    /// Prefactor for the exponential model.
    pub amplitude: Option<f64>,
    /// The abscissae used, in sweep order.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub value: f64,
    pub fragment: Option<Fragment>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub template_id: String,
    pub axis: String,
    pub entries: Vec<SweepEntry>,
    pub regression: Option<SweepRegression>,
    /// Why no regression was produced, if none was.
    pub regression_note: Option<String>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.fragment.as_ref().is_some_and(|f| f.pass))
    }

    /// `report.csv` (one row per instance) and, when fitted,
    /// `regression.csv`, both in `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("report.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["id", "kind", "axis", "value", "pass", "primary", "primary_value", "error"])?;
        for e in &self.entries {
            let (id, kind, pass, primary, pv) = match &e.fragment {
                Some(f) => (
                    f.id.clone(),
                    f.kind.name(),
                    if f.pass { "1" } else { "0" },
                    f.primary.clone(),
                    f.primary_value().to_string(),
                ),
                None => (String::new(), "", "0", String::new(), String::new()),
            };
            w.write_record([
                id.as_str(),
                kind,
                &self.axis,
                &e.value.to_string(),
                pass,
                &primary,
                &pv,
                e.error.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        let mut out = vec![path];
        if let Some(r) = &self.regression {
            let path = dir.join("regression.csv");
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["axis", "model", "slope", "intercept", "r_squared", "points", "gamma", "amplitude"])?;
            let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
            w.write_record([
                self.axis.clone(),
                r.model.clone(),
                r.fit.slope.to_string(),
                r.fit.intercept.to_string(),
                r.fit.r_squared.to_string(),
                r.fit.points.to_string(),
                opt(r.gamma),
                opt(r.amplitude),
            ])?;
            w.flush().map_err(|e| Error::io(&path, e))?;
            out.push(path);
        }
        Ok(out)
    }
}
