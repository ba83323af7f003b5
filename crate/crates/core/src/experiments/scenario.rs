use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{AbsorbingLayer, EvolveConfig, Integrator};
use crate::profiles::{max_gardner_speed, SolitonEnsemble};
use crate::spectral::Grid1D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    TransformIdentity,
    LiftingBound,
    KdvStability,
    GardnerH1Stability,
    AsymptoticHalfline,
    NsolitonCollision,
    NegativeTime,
    WeinsteinSweep,
    Intertwining,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::TransformIdentity,
        ScenarioKind::LiftingBound,
        ScenarioKind::KdvStability,
        ScenarioKind::GardnerH1Stability,
        ScenarioKind::AsymptoticHalfline,
        ScenarioKind::NsolitonCollision,
        ScenarioKind::NegativeTime,
        ScenarioKind::WeinsteinSweep,
        ScenarioKind::Intertwining,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::TransformIdentity => "transform_identity",
            ScenarioKind::LiftingBound => "lifting_bound",
            ScenarioKind::KdvStability => "kdv_stability",
            ScenarioKind::GardnerH1Stability => "gardner_h1_stability",
            ScenarioKind::AsymptoticHalfline => "asymptotic_halfline",
            ScenarioKind::NsolitonCollision => "nsoliton_collision",
            ScenarioKind::NegativeTime => "negative_time",
            ScenarioKind::WeinsteinSweep => "weinstein_sweep",
            ScenarioKind::Intertwining => "intertwining",
        }
    }

    /// Pass threshold used when the scenario gives no `tolerance`.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            ScenarioKind::TransformIdentity => 1e-9,
            ScenarioKind::LiftingBound => 1e-8,
            ScenarioKind::KdvStability
            | ScenarioKind::GardnerH1Stability
            | ScenarioKind::NegativeTime
            | ScenarioKind::NsolitonCollision => 0.1,
            ScenarioKind::AsymptoticHalfline => 0.3,
            ScenarioKind::WeinsteinSweep => 1e-6,
            ScenarioKind::Intertwining => 1e-6,
        }
    }

    fn evolves(&self) -> bool {
        !matches!(
            self,
            ScenarioKind::TransformIdentity | ScenarioKind::LiftingBound | ScenarioKind::WeinsteinSweep
        )
    }
}

fn default_n_points() -> usize {
    1024
}
fn default_length() -> f64 {
    200.0
}
fn default_speeds() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_separation() -> f64 {
    40.0
}
fn default_beta() -> f64 {
    0.05
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    50.0
}
fn default_stride() -> usize {
    100
}
fn default_integrator() -> Integrator {
    Integrator::Etdrk4
}
fn default_conservation_tol() -> f64 {
    1e-6
}
fn default_margin() -> f64 {
    15.0
}
fn default_halfline_from() -> f64 {
    5.0
}
fn default_spearman_max() -> f64 {
    -0.8
}
fn default_betas() -> Vec<f64> {
    vec![0.0, 0.01, 0.02, 0.05, 0.1]
}
fn default_dc_factor() -> f64 {
    1e-4
}

/// One experiment: the hypotheses (speeds, centers, separation, alpha,
/// beta), the numerical setup, the seed and the pass threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_length")]
    pub length: f64,
    /// Soliton speeds, increasing.
    #[serde(default = "default_speeds")]
    pub speeds: Vec<f64>,
    /// Soliton centers; defaults to `separation`-spaced centers around 0.
    /// For `nsoliton_collision` these are the Hirota phases.
    #[serde(default)]
    pub centers: Option<Vec<f64>>,
    /// Minimal separation `L` between consecutive centers.
    #[serde(default = "default_separation")]
    pub separation: f64,
    /// L2 size of the initial perturbation.
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Stability distances are taken over `t <= stability_horizon`
    /// (default: the whole run).
    #[serde(default)]
    pub stability_horizon: Option<f64>,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_conservation_tol")]
    pub conservation_tol: f64,
    /// Width of the damping layer at the left edge; 0 disables it.
    #[serde(default)]
    pub absorbing_width: f64,
    #[serde(default)]
    pub absorbing_strength: f64,
    /// Perturbation band limit in modes; defaults to `n_points / 8`.
    #[serde(default)]
    pub perturbation_band: Option<usize>,
    /// Extra width of the perturbation window beyond the soliton span.
    #[serde(default = "default_margin")]
    pub perturbation_margin: f64,
    /// Start of the half-line decay window.
    #[serde(default = "default_halfline_from")]
    pub halfline_from: f64,
    #[serde(default = "default_spearman_max")]
    pub spearman_max: f64,
    /// Gardner parameters for `weinstein_sweep` and `transform_identity`.
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// Weinstein difference step as a fraction of `c`.
    #[serde(default = "default_dc_factor")]
    pub dc_factor: f64,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| e.in_scenario(&path.display().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.kind.default_tolerance())
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.n_points, self.length)
    }

    pub fn centers(&self) -> Vec<f64> {
        match &self.centers {
            Some(c) => c.clone(),
            None => {
                let n = self.speeds.len() as f64;
                (0..self.speeds.len())
                    .map(|j| (j as f64 - 0.5 * (n - 1.0)) * self.separation)
                    .collect()
            }
        }
    }

    pub fn ensemble(&self) -> Result<SolitonEnsemble> {
        SolitonEnsemble::kdv(&self.speeds, &self.centers(), self.separation)
    }

    pub fn band(&self) -> usize {
        self.perturbation_band.unwrap_or(self.n_points / 8)
    }

    pub fn absorbing(&self) -> Option<AbsorbingLayer> {
        (self.absorbing_width > 0.0).then_some(AbsorbingLayer {
            width: self.absorbing_width,
            strength: self.absorbing_strength,
        })
    }

    pub fn evolve_config(&self, t_end: f64) -> EvolveConfig {
        EvolveConfig {
            dt: self.dt,
            t_end,
            integrator: self.integrator,
            snapshot_stride: self.snapshot_stride,
            conservation_tol: self.conservation_tol,
            blowup_factor: 10.0,
            absorbing: self.absorbing(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return bad(format!("id `{}` must be a non-empty file-name component", self.id));
        }
        self.grid()?;
        if self.speeds.is_empty() || self.speeds.len() > 3 {
            return bad("between 1 and 3 solitons are supported".into());
        }
        if self.speeds.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return bad("speeds must be positive".into());
        }
        if let Some(c) = &self.centers {
            if c.len() != self.speeds.len() {
                return bad(format!("{} centers for {} speeds", c.len(), self.speeds.len()));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha = {} must be >= 0", self.alpha));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta = {} must be >= 0", self.beta));
        }
        let needs_beta = matches!(
            self.kind,
            ScenarioKind::LiftingBound | ScenarioKind::GardnerH1Stability
                | ScenarioKind::Intertwining
        );
        if needs_beta {
            if self.beta <= 0.0 {
                return bad(format!("{} needs beta > 0", self.kind.name()));
            }
            let c_max = self.speeds.iter().copied().fold(0.0, f64::max);
            if c_max >= max_gardner_speed(self.beta) {
                return bad(format!(
                    "speed {c_max} inadmissible for beta = {} (limit {})",
                    self.beta,
                    max_gardner_speed(self.beta)
                ));
            }
        }
        if self.kind.evolves() {
            if !(self.dt.is_finite() && self.dt > 0.0) {
                return bad(format!("dt = {} must be > 0", self.dt));
            }
            if !(self.t_end > self.t_start) {
                return bad(format!("t_end = {} must exceed t_start = {}", self.t_end, self.t_start));
            }
            if self.snapshot_stride == 0 {
                return bad("snapshot_stride must be positive".into());
            }
            if self.absorbing_width < 0.0 || self.absorbing_strength < 0.0 {
                return bad("absorbing layer parameters must be >= 0".into());
            }
        }
        if matches!(self.kind, ScenarioKind::WeinsteinSweep | ScenarioKind::TransformIdentity) {
            if self.betas.is_empty() || self.betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                return bad("betas must be a non-empty list of values >= 0".into());
            }
            let c_max = self.speeds.iter().copied().fold(0.0, f64::max);
            if let Some(b) = self.betas.iter().find(|&&b| b > 0.0 && c_max >= max_gardner_speed(b)) {
                return bad(format!("speed {c_max} inadmissible for beta = {b}"));
            }
        }
        if self.kind == ScenarioKind::WeinsteinSweep {
            if !(self.dc_factor > 0.0 && self.dc_factor < 0.5) {
                return bad("dc_factor must lie in (0, 0.5)".into());
            }
        }
        if let Some(t) = self.tolerance {
            if !t.is_finite() {
                return bad("tolerance must be finite".into());
            }
        }
        if self.band() == 0 || self.band() >= self.n_points / 2 {
            return bad(format!("perturbation_band {} out of range", self.band()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = Scenario::from_toml_str("id = \"a\"\nkind = \"kdv_stability\"\nseed = 1\n").unwrap();
        assert_eq!(s.n_points, 1024);
        assert_eq!(s.centers(), vec![-20.0, 20.0]);
        assert_eq!(s.tolerance(), 0.1);
        assert!(s.absorbing().is_none());
    }

    #[test]
    fn seed_and_known_keys_required() {
        assert!(Scenario::from_toml_str("id = \"a\"\nkind = \"kdv_stability\"\n").is_err());
        assert!(Scenario::from_toml_str("id = \"a\"\nkind = \"kdv_stability\"\nseed = 1\nfoo = 2\n").is_err());
        assert!(Scenario::from_toml_str("id = \"a\"\nkind = \"nope\"\nseed = 1\n").is_err());
    }

    #[test]
    fn gardner_kinds_check_admissibility() {
        let text = "id = \"a\"\nkind = \"lifting_bound\"\nseed = 1\nbeta = 0.2\nspeeds = [1.0, 2.0]\n";
        assert!(Scenario::from_toml_str(text).is_err());
        let text = "id = \"a\"\nkind = \"transform_identity\"\nseed = 1\nbetas = [0.02, 0.2]\n";
        assert!(Scenario::from_toml_str(text).is_err());
        let text = "id = \"a\"\nkind = \"transform_identity\"\nseed = 1\nbetas = [0.02, 0.1]\n";
        assert!(Scenario::from_toml_str(text).is_ok());
    }

    #[test]
    fn round_trip() {
        let s = Scenario::from_toml_str("id = \"a\"\nkind = \"lifting_bound\"\nseed = 4\nalpha = 1e-3\n").unwrap();
        let back = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(s, back);
    }
}
