use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::report::{RunOptions, SweepEntry, SweepRegression, SweepReport};
use super::run::run_scenario;
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::stats::{exponential_decay_fit, linear_fit};

/// Scenario keys a sweep may vary.
pub const SWEEP_AXES: [&str; 7] = ["alpha", "separation", "beta", "seed", "n_points", "length", "dt"];

/// A template scenario plus the axis and the values to put on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub template: Scenario,
    pub axis: String,
    pub values: Vec<f64>,
}

fn whole(axis: &str, value: f64) -> Result<u64> {
    if value >= 0.0 && value.fract() == 0.0 && value < 2f64.powi(53) {
        Ok(value as u64)
    } else {
        Err(Error::Config(format!("{axis} = {value} must be a non-negative integer")))
    }
}

/// Copy of `s` with `axis` set to `value` and the id suffixed accordingly.
/// A separation sweep with default centers respaces the solitons.
pub fn set_axis(s: &Scenario, axis: &str, value: f64) -> Result<Scenario> {
    let mut out = s.clone();
    match axis {
        "alpha" => out.alpha = value,
        "separation" => {
            if s.centers.is_some() {
                return Err(Error::Config(
                    "separation sweeps need default (evenly spaced) centers".into(),
                ));
            }
            out.separation = value;
        }
        "beta" => out.beta = value,
        "seed" => out.seed = whole(axis, value)?,
        "n_points" => out.n_points = whole(axis, value)? as usize,
        "length" => out.length = value,
        "dt" => out.dt = value,
        _ => {
            return Err(Error::Config(format!(
                "unknown sweep axis `{axis}`; expected one of {}",
                SWEEP_AXES.join(", ")
            )))
        }
    }
    out.id = format!("{}_{axis}_{value}", s.id);
    out.validate()?;
    Ok(out)
}

/// Parse a sweep file: a scenario table plus `sweep_axis` and
/// `sweep_values`.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let axis = match table.remove("sweep_axis") {
        Some(toml::Value::String(a)) => a,
        Some(_) => return Err(Error::Config("sweep_axis must be a string".into())),
        None => return Err(Error::Config("missing key `sweep_axis`".into())),
    };
    let values = match table.remove("sweep_values") {
        Some(toml::Value::Array(vs)) => vs
            .iter()
            .map(|v| match v {
                toml::Value::Float(f) => Ok(*f),
                toml::Value::Integer(i) => Ok(*i as f64),
                _ => Err(Error::Config("sweep_values must be numbers".into())),
            })
            .collect::<Result<Vec<f64>>>()?,
        Some(_) => return Err(Error::Config("sweep_values must be an array".into())),
        None => return Err(Error::Config("missing key `sweep_values`".into())),
    };
    if values.is_empty() {
        return Err(Error::Config("sweep_values is empty".into()));
    }
    if !SWEEP_AXES.contains(&axis.as_str()) {
        return Err(Error::Config(format!(
            "unknown sweep axis `{axis}`; expected one of {}",
            SWEEP_AXES.join(", ")
        )));
    }
    let template: Scenario = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    template.validate()?;
    Ok(SweepSpec {
        template,
        axis,
        values,
    })
}

pub fn load_sweep(path: &Path) -> Result<SweepSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep(&text)
}

fn regress(axis: &str, template: &Scenario, points: &[(f64, f64)]) -> Result<SweepRegression> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    match axis {
        "alpha" => Ok(SweepRegression {
            model: "linear".into(),
            fit: linear_fit(&xs, &ys)?,
            gamma: None,
            amplitude: None,
            xs,
            ys,
        }),
        "separation" => {
            let (gamma, amplitude, fit) = exponential_decay_fit(&xs, &ys)?;
            Ok(SweepRegression {
                model: "exponential".into(),
                fit,
                gamma: Some(gamma),
                amplitude: Some(amplitude),
                xs,
                ys,
            })
        }
        "beta" => {
            let zs: Vec<f64> = xs.iter().map(|b| template.alpha / b.sqrt()).collect();
            Ok(SweepRegression {
                model: "inverse_sqrt".into(),
                fit: linear_fit(&zs, &ys)?,
                gamma: None,
                amplitude: None,
                xs: zs,
                ys,
            })
        }
        _ => Err(Error::Config(format!("no regression model for axis `{axis}`"))),
    }
}

/// Run every instance of the sweep (in parallel on the current rayon pool),
/// keep failures as entries, and regress the primary metric on the axis.
/// The report lists instances in the order of `spec.values`.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> SweepReport {
    let entries: Vec<SweepEntry> = spec
        .values
        .par_iter()
        .map(|&value| {
            let outcome = set_axis(&spec.template, &spec.axis, value)
                .and_then(|s| run_scenario(&s, opts));
            match outcome {
                Ok(f) => SweepEntry {
                    value,
                    fragment: Some(f),
                    error: None,
                },
                Err(e) => SweepEntry {
                    value,
                    fragment: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let points: Vec<(f64, f64)> = entries
        .iter()
        .filter_map(|e| e.fragment.as_ref().map(|f| (e.value, f.primary_value())))
        .filter(|p| p.1.is_finite())
        .collect();
    let (regression, regression_note) = match regress(&spec.axis, &spec.template, &points) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepReport {
        template_id: spec.template.id.clone(),
        axis: spec.axis.clone(),
        entries,
        regression,
        regression_note,
    }
}
