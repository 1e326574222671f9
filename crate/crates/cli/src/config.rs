//! Run configuration, read from TOML. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use softguide::measure::{area_measure, curve_measure, Geometry, KatoMeasure, Side};
use softguide::resonance::PoleOptions;
use softguide::transverse::TransverseProfile;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub strip: StripConfig,
    pub trap: TrapConfig,
    pub placement: Placement,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripConfig {
    pub width: f64,
    /// Layers from the lower edge up; thicknesses add up to `width`.
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    pub thickness: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub beta: f64,
    /// Shape in local coordinates; [`Placement`] moves it next to the strip.
    pub geometry: Geometry,
}

/// Either a distance `rho` from the strip on the given side, or a
/// translation of the local origin to `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    #[serde(default = "default_side")]
    pub side: Side,
    /// Longitudinal shift used with `rho`.
    #[serde(default)]
    pub x1: f64,
}

fn default_side() -> Side {
    Side::Above
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Quadrature order of the trap measure.
    pub order: usize,
    pub mode_tol: f64,
    pub trap_tol: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Radius of the disc searched for the pole; default from the level gaps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    pub multistart: usize,
    pub regime_limit: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        let p = PoleOptions::default();
        Self {
            order: 10,
            mode_tol: 1e-14,
            trap_tol: 1e-12,
            newton_tol: p.tol,
            max_iter: p.max_iter,
            radius: None,
            multistart: 0,
            regime_limit: p.regime_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rho_min: 3.0,
            rho_max: 6.0,
            points: 6,
            spacing: Spacing::Geometric,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.rho_min];
        }
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                if k == n - 1 {
                    return self.rho_max;
                }
                match self.spacing {
                    Spacing::Geometric => self.rho_min * (self.rho_max / self.rho_min).powf(t),
                    Spacing::Linear => self.rho_min + (self.rho_max - self.rho_min) * t,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        let n = &self.numerics;
        for (name, v) in [
            ("mode_tol", n.mode_tol),
            ("trap_tol", n.trap_tol),
            ("newton_tol", n.newton_tol),
            ("regime_limit", n.regime_limit),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(&format!("numerics.{name} must be positive"));
            }
        }
        if n.order == 0 || n.max_iter == 0 {
            return bad("numerics.order and numerics.max_iter must be positive");
        }
        if matches!(n.radius, Some(r) if !(r > 0.0)) {
            return bad("numerics.radius must be positive");
        }
        let s = &self.sweep;
        if !(s.rho_min > 0.0) || !(s.rho_max >= s.rho_min) || !s.rho_max.is_finite() {
            return bad("sweep needs 0 < rho_min <= rho_max");
        }
        if s.points == 0 {
            return bad("sweep.points must be positive");
        }
        match (&self.placement.rho, &self.placement.center) {
            (Some(r), None) if *r > 0.0 => {}
            (Some(_), None) => return bad("placement.rho must be positive"),
            (None, Some(_)) => {}
            _ => return bad("placement needs exactly one of rho and center"),
        }
        if !(self.trap.beta > 0.0) || !self.trap.beta.is_finite() {
            return bad("trap.beta must be positive");
        }
        self.profile()?;
        self.measure()?;
        Ok(())
    }

    pub fn profile(&self) -> Result<TransverseProfile<f64>> {
        let pieces: Vec<(f64, f64)> = self.strip.layers.iter().map(|l| (l.thickness, l.depth)).collect();
        Ok(TransverseProfile::new(self.strip.width, &pieces)?)
    }

    /// The trap measure at the configured placement.
    pub fn measure(&self) -> Result<KatoMeasure> {
        match (self.placement.rho, self.placement.center) {
            (Some(rho), _) => self.measure_at(rho),
            (None, Some(c)) => build(&self.trap.geometry.translated(c[0], c[1]), self.numerics.order, self.strip.width),
            (None, None) => Err(CliError::Config("placement needs rho or center".into())),
        }
    }

    /// The trap measure at distance `rho` on the configured side.
    pub fn measure_at(&self, rho: f64) -> Result<KatoMeasure> {
        let (lo, hi) = self.trap.geometry.vertical_extent();
        let dy = match self.side() {
            Side::Above => self.strip.width + rho - lo,
            Side::Below => -rho - hi,
        };
        build(&self.trap.geometry.translated(self.placement.x1, dy), self.numerics.order, self.strip.width)
    }

    /// Side of the strip used by sweeps; with `center` it is read off the
    /// placed geometry.
    pub fn side(&self) -> Side {
        match self.placement.center {
            Some(c) if self.placement.rho.is_none() => {
                let (lo, _) = self.trap.geometry.vertical_extent();
                if lo + c[1] > self.strip.width {
                    Side::Above
                } else {
                    Side::Below
                }
            }
            _ => self.placement.side,
        }
    }

    pub fn pole_options(&self) -> PoleOptions {
        let n = &self.numerics;
        PoleOptions {
            tol: n.newton_tol,
            max_iter: n.max_iter,
            radius: n.radius,
            regime_limit: n.regime_limit,
            multistart: n.multistart,
        }
    }

    /// Hash of everything that determines a sweep row: strip, trap, numerics,
    /// side, longitudinal shift and level index.
    pub fn sweep_hash(&self, n: usize) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            strip: &'a StripConfig,
            trap: &'a TrapConfig,
            numerics: &'a Numerics,
            side: Side,
            x1: f64,
            n: usize,
        }
        let x1 = match (self.placement.rho, self.placement.center) {
            (None, Some(c)) => c[0],
            _ => self.placement.x1,
        };
        let key = Key {
            strip: &self.strip,
            trap: &self.trap,
            numerics: &self.numerics,
            side: self.side(),
            x1,
            n,
        };
        let text = serde_json::to_string(&key).expect("key serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn build(g: &Geometry, order: usize, width: f64) -> Result<KatoMeasure> {
    Ok(match g {
        Geometry::Area(r) => area_measure(r, order, width)?,
        Geometry::Curve(c) => curve_measure(c, order, width)?,
    })
}
