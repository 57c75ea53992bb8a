//! Run configuration: TOML with one table per module, every key optional.
//!
//! Unknown keys are rejected. Overrides are `section.key=value` strings (or
//! the CLI shorthands) applied to the parsed document before it is checked,
//! so they are validated exactly like file contents.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thinflow_core::initial_data::BubbleConfig;
use thinflow_core::key_integral::{Annulus, PolarQuadrature};
use thinflow_core::SolverConfig;

/// Configuration problems, each rendered as one line.
#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Parse(String),
    Override(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "cannot read {}: {e}", p.display()),
            ConfigError::Parse(m) | ConfigError::Override(m) | ConfigError::Invalid(m) => {
                f.write_str(&m.replace('\n', " "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Samples per direction.
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BubbleSection {
    pub l0: u32,
    pub n: u32,
    pub epsilon: f64,
    pub amplitude: f64,
    pub small_scale_amplitude: f64,
    /// Level of the small blob; absent means `2n`.
    pub small_scale_index: Option<u32>,
    pub background: bool,
}

impl Default for BubbleSection {
    fn default() -> Self {
        BubbleSection {
            l0: 1,
            n: 2,
            epsilon: 0.125,
            amplitude: 1.0,
            small_scale_amplitude: 1.0,
            small_scale_index: Some(3),
            background: false,
        }
    }
}

impl BubbleSection {
    pub fn to_core(&self) -> BubbleConfig {
        BubbleConfig {
            l0: self.l0,
            n: self.n,
            epsilon: self.epsilon,
            amplitude: self.amplitude,
            small_scale_amplitude: self.small_scale_amplitude,
            small_scale_index: self.small_scale_index,
            background: self.background,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    /// Final time `T`.
    pub t_end: f64,
    pub cfl: f64,
    pub dealias: bool,
    pub max_dt: f64,
    pub cadence: f64,
    pub fixed_dt: Option<f64>,
    pub tail_threshold: f64,
    /// Write a checkpoint every this many time units (absent: final only).
    pub checkpoint_every: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection {
            nu: 0.0,
            t_end: 1.0,
            cfl: s.cfl,
            dealias: s.dealias,
            max_dt: s.max_dt,
            cadence: s.cadence,
            fixed_dt: s.fixed_dt,
            tail_threshold: s.tail_threshold,
            checkpoint_every: None,
        }
    }
}

impl SolverSection {
    pub fn to_core(&self) -> SolverConfig {
        SolverConfig {
            cfl: self.cfl,
            dealias: self.dealias,
            max_dt: self.max_dt,
            cadence: self.cadence,
            fixed_dt: self.fixed_dt,
            tail_threshold: self.tail_threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracerEvaluation {
    Spectral,
    Interpolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TracerSection {
    /// Track the origin and `Dη(t, 0)`.
    pub origin: bool,
    /// Seed points, one `x1 x2` pair per line (or comma separated).
    pub file: Option<PathBuf>,
    pub evaluation: TracerEvaluation,
    /// Stencil radius for interpolated evaluation.
    pub radius: usize,
    /// Random pairs for the Yudovich check (0 disables it).
    pub yudovich_pairs: usize,
    pub yudovich_c: f64,
    pub seed: u64,
}

impl Default for TracerSection {
    fn default() -> Self {
        TracerSection {
            origin: true,
            file: None,
            evaluation: TracerEvaluation::Spectral,
            radius: 4,
            yudovich_pairs: 0,
            yudovich_c: 1.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub r_min: f64,
    pub r_max: f64,
    pub panels_per_octave: usize,
    pub radial_order: usize,
    pub angular_panels: usize,
    pub angular_order: usize,
    pub exact_node_limit: usize,
    pub upsample: usize,
    /// Radii at which `I(t, r)` is reported.
    pub radii: Vec<f64>,
    /// Report `I` every this many diagnostic samples.
    pub every: usize,
    /// Annulus for the remainder `B`; `r_lo = 0` disables it.
    pub b_r_lo: f64,
    pub b_r_hi: f64,
    pub b_radial_samples: usize,
    pub b_angular_samples: usize,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = PolarQuadrature::default();
        let a = Annulus::default();
        QuadratureSection {
            r_min: q.r_min,
            r_max: q.r_max,
            panels_per_octave: q.panels_per_octave,
            radial_order: q.radial_order,
            angular_panels: q.angular_panels,
            angular_order: q.angular_order,
            exact_node_limit: q.exact_node_limit,
            upsample: q.upsample,
            radii: vec![0.0],
            every: 10,
            b_r_lo: a.r_lo,
            b_r_hi: a.r_hi,
            b_radial_samples: a.radial_samples,
            b_angular_samples: a.angular_samples,
        }
    }
}

impl QuadratureSection {
    pub fn to_core(&self) -> PolarQuadrature {
        PolarQuadrature {
            r_min: self.r_min,
            r_max: self.r_max,
            panels_per_octave: self.panels_per_octave,
            radial_order: self.radial_order,
            angular_panels: self.angular_panels,
            angular_order: self.angular_order,
            exact_node_limit: self.exact_node_limit,
            upsample: self.upsample,
        }
    }

    pub fn annulus(&self) -> Option<Annulus> {
        (self.b_r_lo > 0.0).then_some(Annulus {
            r_lo: self.b_r_lo,
            r_hi: self.b_r_hi,
            radial_samples: self.b_radial_samples,
            angular_samples: self.b_angular_samples,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingRule {
    Explicit,
    GapTargeted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub n_list: Vec<u32>,
    pub pairing: PairingRule,
    /// `ν = prefactor · 2^{-c n}` for the explicit rule.
    pub c: f64,
    pub prefactor: f64,
    /// Target terminal H¹ gap for the gap-targeted rule.
    pub kappa: f64,
    /// Bracket searched by the gap-targeted rule.
    pub nu_min: f64,
    pub nu_max: f64,
    pub max_iterations: usize,
    pub t_end: f64,
    /// `N(n) = 2^{n + grid_offset}`, clamped to `[grid_min, grid_max]`.
    pub grid_offset: u32,
    pub grid_min: usize,
    pub grid_max: usize,
    /// Small blob at level `n + blob_offset` in sweep runs.
    pub blob_offset: Option<u32>,
    pub workers: usize,
}

impl Default for PlanSection {
    fn default() -> Self {
        PlanSection {
            n_list: vec![2, 3, 4, 5],
            pairing: PairingRule::GapTargeted,
            c: 4.0,
            prefactor: 1.0,
            kappa: 0.5,
            nu_min: 1e-9,
            nu_max: 1e-1,
            max_iterations: 30,
            t_end: 1.0,
            grid_offset: 5,
            grid_min: 64,
            grid_max: 2048,
            blob_offset: Some(1),
            workers: 1,
        }
    }
}

/// All sections.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub bubble: BubbleSection,
    pub solver: SolverSection,
    pub tracers: TracerSection,
    pub quadrature: QuadratureSection,
    pub plan: PlanSection,
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` in order, validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Io(p.to_path_buf(), e))?,
            None => String::new(),
        };
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |e: thinflow_core::Error| ConfigError::Invalid(e.to_string());
        thinflow_core::Grid::new(self.grid.n).map_err(bad)?;
        self.bubble.to_core().validate().map_err(bad)?;
        self.solver.to_core().validate().map_err(bad)?;
        self.quadrature.to_core().validate().map_err(bad)?;
        if !(self.solver.nu >= 0.0 && self.solver.nu.is_finite()) {
            return Err(ConfigError::Invalid("solver.nu must be finite and nonnegative".into()));
        }
        if !(self.solver.t_end >= 0.0) {
            return Err(ConfigError::Invalid("solver.t_end must be nonnegative".into()));
        }
        if self.quadrature.radii.iter().any(|r| !(0.0..=0.5).contains(r)) {
            return Err(ConfigError::Invalid("quadrature.radii must lie in [0, 1/2]".into()));
        }
        if self.quadrature.every == 0 {
            return Err(ConfigError::Invalid("quadrature.every must be positive".into()));
        }
        if !(self.plan.t_end > 0.0) {
            return Err(ConfigError::Invalid("plan.t_end must be positive".into()));
        }
        if !(self.plan.kappa > 0.0) || !(self.plan.nu_min > 0.0 && self.plan.nu_min < self.plan.nu_max) {
            return Err(ConfigError::Invalid("plan needs kappa > 0 and 0 < nu_min < nu_max".into()));
        }
        Ok(())
    }

    /// The resolved configuration as TOML.
    pub fn resolved(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }
}

/// Map CLI shorthands onto their dotted keys.
pub fn shorthand(flag: &str) -> Option<&'static str> {
    Some(match flag {
        "nu" => "solver.nu",
        "T" => "solver.t_end",
        "N" => "grid.n",
        "n" => "bubble.n",
        _ => return None,
    })
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(format!("override `{spec}` is not of the form section.key=value")))?;
    let key = key.trim();
    let (section, field) = key
        .split_once('.')
        .ok_or_else(|| ConfigError::Override(format!("override key `{key}` needs a section")))?;
    // Parse the value as TOML; bare words fall back to strings.
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let table = doc
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| ConfigError::Override(format!("`{section}` is not a section")))?;
    table.insert(field.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("", &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn override_beats_file() {
        let c = RunConfig::parse("[solver]\nnu = 1e-2\n", &["solver.nu=1e-4".into()]).unwrap();
        assert_eq!(c.solver.nu, 1e-4);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::parse("[solver]\nviskosity = 1e-3\n", &[]).unwrap_err();
        assert!(e.to_string().contains("viskosity"), "{e}");
        let e = RunConfig::parse("", &["solver.viskosity=1".into()]).unwrap_err();
        assert!(e.to_string().contains("viskosity"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = RunConfig::parse("[grid]\nn = 64\nthis is not toml\n", &[]).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn resolved_round_trips() {
        let c = RunConfig::parse("[solver]\nnu = 0.1\ncadence = 0.3\n", &["grid.n=64".into()]).unwrap();
        let back = RunConfig::parse(&c.resolved(), &[]).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(RunConfig::parse("[grid]\nn = 100\n", &[]).is_err());
        assert!(RunConfig::parse("[solver]\ncfl = 1.5\n", &[]).is_err());
        assert!(RunConfig::parse("", &["nonsense".into()]).is_err());
    }
}
