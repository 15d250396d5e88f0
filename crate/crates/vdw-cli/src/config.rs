//! JSON run configuration and conversion into domain types.
//!
//! All physical inputs are given either in natural units (frequencies are
//! wavenumbers, c = ħ = ε₀ = 1) or in SI; SI inputs are converted exactly
//! once at parse time and results are reported back in joules. The resolved
//! configuration is echoed into the output sidecar for provenance.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use vdw_core::oracle::QuadratureSpec;
use vdw_core::{AtomPair, PulseParams, Separation, ThreeLevelConfig};

// CODATA 2018
pub const HBAR: f64 = 1.054_571_817e-34; // J s
pub const C_LIGHT: f64 = 299_792_458.0; // m/s
pub const EPS0: f64 = 8.854_187_812_8e-12; // F/m

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    #[default]
    Natural,
    Si,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairBlock {
    pub omega_a: f64,
    pub omega_b: f64,
    #[serde(default)]
    pub gamma_a: f64,
    #[serde(default)]
    pub gamma_b: f64,
    pub mu_a: [f64; 3],
    pub mu_b: [f64; 3],
    pub separation: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThreeLevelBlock {
    pub omega_minus: f64,
    pub omega_0: f64,
    pub omega_plus: f64,
    pub mu_minus: [f64; 3],
    pub mu_plus: [f64; 3],
    pub separation: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PulseBlock {
    pub rabi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForceBlock {
    pub atom: String,
    pub evaluator: String,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepBlock {
    /// One of "R", "t", "omega".
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: SweepScale,
}

fn default_scale() -> SweepScale {
    SweepScale::Linear
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QuadratureBlock {
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub k_window: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<u32>,
    #[serde(default)]
    pub eta_sequence: Option<Vec<f64>>,
    #[serde(default)]
    pub rel_tolerance: Option<f64>,
    #[serde(default)]
    pub max_refinements: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub quantity: String,
    #[serde(default)]
    pub compare_with: Option<String>,
    #[serde(default)]
    pub pair: Option<PairBlock>,
    #[serde(default)]
    pub three_level: Option<ThreeLevelBlock>,
    #[serde(default)]
    pub pulse: Option<PulseBlock>,
    #[serde(default)]
    pub force: Option<ForceBlock>,
    /// Fixed observation time for dynamical quantities when not sweeping t.
    #[serde(default)]
    pub time: Option<f64>,
    pub sweep: SweepBlock,
    #[serde(default)]
    pub quadrature: Option<QuadratureBlock>,
    #[serde(default)]
    pub units: UnitSystem,
    /// Relative tolerance for compare mode (CLI --tolerance overrides).
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Which sweep variable the run iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Separation,
    Time,
    Rabi,
}

impl SweepAxis {
    pub fn parse(axis: &str) -> Result<Self> {
        match axis {
            "R" | "r" => Ok(SweepAxis::Separation),
            "t" | "T" => Ok(SweepAxis::Time),
            "omega" | "Omega" | "rabi" => Ok(SweepAxis::Rabi),
            other => bail!("sweep.axis must be one of R, t, omega (got {other:?})"),
        }
    }
}

/// Natural-unit conversion factors applied once at parse.
#[derive(Debug, Clone, Copy)]
pub struct Units {
    /// multiply input frequencies/rates by this to get wavenumbers
    pub frequency: f64,
    /// multiply input lengths by this to get metres-as-natural-lengths
    pub length: f64,
    /// multiply input times by this to get natural times (lengths)
    pub time: f64,
    /// multiply input dipole components by this to get natural dipoles
    pub dipole: f64,
    /// multiply natural energies by this for output
    pub energy_out: f64,
}

impl Units {
    pub fn for_system(system: UnitSystem) -> Units {
        match system {
            UnitSystem::Natural => Units {
                frequency: 1.0,
                length: 1.0,
                time: 1.0,
                dipole: 1.0,
                energy_out: 1.0,
            },
            UnitSystem::Si => Units {
                frequency: 1.0 / C_LIGHT,
                length: 1.0,
                time: C_LIGHT,
                dipole: 1.0 / (EPS0 * HBAR * C_LIGHT).sqrt(),
                energy_out: HBAR * C_LIGHT,
            },
        }
    }

    fn vec3(&self, v: [f64; 3], factor: f64) -> [f64; 3] {
        [v[0] * factor, v[1] * factor, v[2] * factor]
    }
}

/// Fully resolved inputs in natural units.
pub struct Resolved {
    pub config: RunConfig,
    pub units: Units,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub pair: Option<AtomPair>,
    pub three_level: Option<ThreeLevelConfig>,
    pub pulse: Option<PulseParams>,
    pub time: Option<f64>,
    pub quadrature: QuadratureSpec,
}

impl Resolved {
    pub fn from_config(config: RunConfig) -> Result<Resolved> {
        let units = Units::for_system(config.units);
        let axis = SweepAxis::parse(&config.sweep.axis)?;

        if config.sweep.points < 2 {
            bail!("sweep.points must be >= 2 (got {})", config.sweep.points);
        }
        if !(config.sweep.min < config.sweep.max) {
            bail!(
                "sweep.min must be below sweep.max (got {} >= {})",
                config.sweep.min,
                config.sweep.max
            );
        }
        if config.sweep.scale == SweepScale::Log && config.sweep.min <= 0.0 {
            bail!("log sweeps need sweep.min > 0");
        }
        let n = config.sweep.points;
        let grid: Vec<f64> = (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match config.sweep.scale {
                    SweepScale::Linear => {
                        config.sweep.min + (config.sweep.max - config.sweep.min) * f
                    }
                    SweepScale::Log => (config.sweep.min.ln()
                        + (config.sweep.max.ln() - config.sweep.min.ln()) * f)
                        .exp(),
                }
            })
            .collect();

        let pair = config
            .pair
            .as_ref()
            .map(|p| -> Result<AtomPair> {
                let sep = Separation::new(units.vec3(p.separation, units.length))
                    .map_err(|e| anyhow!("pair.separation: {e}"))?;
                AtomPair::new(
                    p.omega_a * units.frequency,
                    p.omega_b * units.frequency,
                    p.gamma_a * units.frequency,
                    p.gamma_b * units.frequency,
                    units.vec3(p.mu_a, units.dipole),
                    units.vec3(p.mu_b, units.dipole),
                    sep,
                )
                .map_err(|e| anyhow!("pair: {e}"))
            })
            .transpose()?;

        let three_level = config
            .three_level
            .as_ref()
            .map(|c| -> Result<ThreeLevelConfig> {
                let sep = Separation::new(units.vec3(c.separation, units.length))
                    .map_err(|e| anyhow!("three_level.separation: {e}"))?;
                ThreeLevelConfig::new(
                    c.omega_minus * units.frequency,
                    c.omega_0 * units.frequency,
                    c.omega_plus * units.frequency,
                    units.vec3(c.mu_minus, units.dipole),
                    units.vec3(c.mu_plus, units.dipole),
                    sep,
                )
                .map_err(|e| anyhow!("three_level: {e}"))
            })
            .transpose()?;

        let pulse = config
            .pulse
            .as_ref()
            .map(|p| {
                PulseParams::new(p.rabi * units.frequency).map_err(|e| anyhow!("pulse.rabi: {e}"))
            })
            .transpose()?;

        let time = config.time.map(|t| t * units.time);

        let scale_hint = pair
            .as_ref()
            .map(|p| p.detuning().abs())
            .or_else(|| three_level.as_ref().map(|c| c.delta_pm().abs()))
            .unwrap_or(1.0);
        let mut quadrature = QuadratureSpec::for_scale(scale_hint);
        if let Some(q) = &config.quadrature {
            if let Some(eta) = q.eta {
                let eta = eta * units.frequency;
                quadrature.eta = eta;
                quadrature.eta_sequence = vec![8.0 * eta, 4.0 * eta, 2.0 * eta, eta];
            }
            if let Some(w) = q.k_window {
                quadrature.k_window = w;
            }
            if let Some(g) = q.grid_points {
                quadrature.grid_points = g;
            }
            if let Some(seq) = &q.eta_sequence {
                quadrature.eta_sequence = seq.iter().map(|e| e * units.frequency).collect();
            }
            if let Some(tol) = q.rel_tolerance {
                quadrature.rel_tolerance = tol;
            }
            if let Some(m) = q.max_refinements {
                quadrature.max_refinements = m;
            }
        }
        quadrature
            .validate()
            .map_err(|e| anyhow!("quadrature: {e}"))?;

        Ok(Resolved {
            config,
            units,
            axis,
            grid,
            pair,
            three_level,
            pulse,
            time,
            quadrature,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Resolved> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Resolved::from_config(config)
    }

    /// Sweep-axis value converted to natural units.
    pub fn natural_sweep_value(&self, raw: f64) -> f64 {
        match self.axis {
            SweepAxis::Separation => raw * self.units.length,
            SweepAxis::Time => raw * self.units.time,
            SweepAxis::Rabi => raw * self.units.frequency,
        }
    }

    pub fn sweep_name(&self) -> &'static str {
        match self.axis {
            SweepAxis::Separation => "R",
            SweepAxis::Time => "t",
            SweepAxis::Rabi => "omega",
        }
    }
}
