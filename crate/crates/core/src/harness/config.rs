use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::{Knobs, SConcaveParams};
use crate::densities::{Family, Model};
use crate::error::{Error, Result};
use crate::learners::{EvalSizes, Noise};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyGeometry,
    RunAl,
    RunBaum,
    EstimateCoefficient,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyGeometry => "verify-geometry",
            Command::RunAl => "run-al",
            Command::RunBaum => "run-baum",
            Command::EstimateCoefficient => "estimate-coefficient",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub s: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    /// Draws per Monte Carlo check.
    pub mc: usize,
    pub eval: EvalSizes,
    /// Random regions in the reflection experiment.
    pub reflection_regions: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Self { mc: 1_000_000, eval: EvalSizes::default(), reflection_regions: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlSettings {
    pub eps: Vec<f64>,
    pub delta: f64,
    pub noise: Noise,
    /// Also run the passive baseline on every (seed, eps).
    pub passive: bool,
}

impl Default for AlSettings {
    fn default() -> Self {
        Self { eps: vec![0.05], delta: 0.1, noise: Noise::Realizable, passive: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaumSettings {
    pub eps: f64,
    pub delta: f64,
    /// Angle between the two planted normals.
    pub angle: f64,
    pub reflection: bool,
}

impl Default for BaumSettings {
    fn default() -> Self {
        Self { eps: 0.1, delta: 0.1, angle: 2.0 * std::f64::consts::FRAC_PI_3, reflection: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientSettings {
    pub radii: Vec<f64>,
}

impl Default for CoefficientSettings {
    fn default() -> Self {
        Self { radii: vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5] }
    }
}

fn default_family() -> Family {
    Family::Radial
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// A validated experiment description. Every optional section is filled with
/// its defaults so the echoed config is complete.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default = "default_family")]
    pub family: Family,
    /// Shorthand for a single-cell grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub grid: Vec<Cell>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub al: AlSettings,
    #[serde(default)]
    pub baum: BaumSettings,
    #[serde(default)]
    pub coefficient: CoefficientSettings,
}

/// n ∈ {2, 3, 5} crossed with s ∈ {−1e−9, −0.02, −1/(2n+3)}.
pub fn default_grid() -> Vec<Cell> {
    let mut out = Vec::new();
    for n in [2, 3, 5] {
        for s in [-1e-9, -0.02, SConcaveParams::geometry_floor(n)] {
            out.push(Cell { s, n });
        }
    }
    out
}

impl ExperimentConfig {
    pub fn cells(&self) -> &[Cell] {
        &self.grid
    }

    // Folds s/n into the grid and fills the default grid.
    fn resolve(&mut self) {
        if let (Some(s), Some(n)) = (self.s.take(), self.n.take()) {
            self.grid.insert(0, Cell { s, n });
        }
        if self.grid.is_empty() && self.command == Command::VerifyGeometry && self.family == Family::Radial {
            self.grid = default_grid();
        }
    }

    /// Every violation in the document, not only the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.s.is_some() != self.n.is_some() {
            v.push("s and n must be given together".to_owned());
        }
        let default_applies = self.command == Command::VerifyGeometry && self.family == Family::Radial;
        if self.grid.is_empty() && self.s.is_none() && !default_applies {
            v.push(format!("{} needs s and n or a grid", self.command.name()));
        }
        if self.seeds.is_empty() {
            v.push("seeds must not be empty".to_owned());
        }
        let cells: Vec<Cell> = match (self.s, self.n) {
            (Some(s), Some(n)) => std::iter::once(Cell { s, n }).chain(self.grid.iter().copied()).collect(),
            _ => self.grid.clone(),
        };
        let needs_geometry = self.family == Family::Radial || self.command != Command::VerifyGeometry;
        for c in &cells {
            if let Err(e) = SConcaveParams::new(c.s, c.n) {
                v.push(e.to_string());
                continue;
            }
            if needs_geometry && c.s < SConcaveParams::geometry_floor(c.n) {
                v.push(format!(
                    "s < -1/(2n+3): s = {}, n = {}, floor = {}",
                    c.s,
                    c.n,
                    SConcaveParams::geometry_floor(c.n)
                ));
            }
            if let Err(e) = Model::build(self.family, c.s, c.n) {
                v.push(e.to_string());
            }
        }
        if self.command != Command::VerifyGeometry && self.family != Family::Radial {
            v.push(format!("{} needs the radial family", self.command.name()));
        }
        if self.command == Command::RunBaum && cells.iter().any(|c| c.n < 3) {
            v.push("run-baum needs n >= 3".to_owned());
        }
        if self.samples.mc < 1000 {
            v.push("samples.mc must be at least 1000".to_owned());
        }
        if self.samples.eval.error_points < 1000 {
            v.push("samples.eval.error_points must be at least 1000".to_owned());
        }
        v.extend(self.knobs.violations());
        if self.command == Command::RunAl {
            if self.al.eps.is_empty() {
                v.push("al.eps must not be empty".to_owned());
            }
            for &e in &self.al.eps {
                if !(e > 0.0 && e < 0.25) {
                    v.push(format!("al.eps = {e} outside (0, 1/4)"));
                }
            }
            if !(self.al.delta > 0.0 && self.al.delta < 1.0) {
                v.push(format!("al.delta = {} outside (0, 1)", self.al.delta));
            }
            if let Noise::Adversarial { eta, .. } = self.al.noise {
                if !(0.0..1.0).contains(&eta) {
                    v.push(format!("al.noise.eta = {eta} outside [0, 1)"));
                }
                for &e in &self.al.eps {
                    if !(eta < self.knobs.c_noise * e) {
                        v.push(format!("al.noise.eta = {eta} is not below c_noise * eps = {}", self.knobs.c_noise * e));
                    }
                }
            }
        }
        if self.command == Command::RunBaum {
            if !(self.baum.eps > 0.0 && self.baum.eps < 1.0) {
                v.push(format!("baum.eps = {} outside (0, 1)", self.baum.eps));
            }
            if !(self.baum.delta > 0.0 && self.baum.delta < 1.0) {
                v.push(format!("baum.delta = {} outside (0, 1)", self.baum.delta));
            }
            if !(self.baum.angle > 0.0 && self.baum.angle <= std::f64::consts::PI) {
                v.push(format!("baum.angle = {} outside (0, π]", self.baum.angle));
            }
        }
        if self.command == Command::EstimateCoefficient {
            if self.coefficient.radii.is_empty() {
                v.push("coefficient.radii must not be empty".to_owned());
            }
            for &r in &self.coefficient.radii {
                if !(r > 0.0 && r < 1.0) {
                    v.push(format!("coefficient.radii contains {r}, outside (0, 1)"));
                }
            }
        }
        v
    }
}

/// Parses and validates a config document.
pub fn load_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = serde_json::from_str(text)?;
    let violations = cfg.violations();
    if !violations.is_empty() {
        return Err(Error::Config(violations));
    }
    cfg.resolve();
    Ok(cfg)
}
