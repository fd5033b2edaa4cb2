//! Engine configuration: a sectioned TOML file whose keys are unique across
//! sections, so each one doubles as a command-line flag.

use std::path::Path;

use otto_core::asymptotics::{invariant_cycle_state, thermalization_duration};
use otto_core::core_states::{DensityMatrix, PointerSpec, Stage, StrokeHamiltonian, WorkStroke};
use otto_core::thermal_maps::{generalized_gibbs, BathSpec, ThermalMap, ThermalState};
use otto_core::{Engine, Scheme, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Rm,
    Rc1,
    Rc2,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Rm => Scheme::RepeatedMeasurements,
            SchemeName::Rc1 => Scheme::OnePointerContacts,
            SchemeName::Rc2 => Scheme::TwoPointerContacts,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrokeMode {
    Direct,
    LandauZener,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermoMode {
    Lindblad,
    Perfect,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Gibbs,
    GeneralizedGibbs,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Invariant,
    GibbsCold,
    GeneralizedGibbsCold,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub eps_c: f64,
    pub eps_h: f64,
    pub sigma: f64,
    pub cycles: usize,
    pub scheme: SchemeName,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrokeSection {
    pub stroke_mode: StrokeMode,
    pub alpha: f64,
    pub phi: f64,
    /// Work-stroke duration; drives `alpha`, `phi` in Landau-Zener mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermoSection {
    pub thermo_mode: ThermoMode,
    pub beta_c: f64,
    pub beta_h: f64,
    pub gamma: f64,
    pub omega_d: f64,
    pub theta: f64,
    pub targets: TargetKind,
    pub d_c: f64,
    pub q_c_re: f64,
    pub q_c_im: f64,
    pub d_h: f64,
    pub q_h_re: f64,
    pub q_h_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub init: InitKind,
    pub init_d: f64,
    pub init_q_re: f64,
    pub init_q_im: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub engine: EngineSection,
    pub stroke: StrokeSection,
    pub thermo: ThermoSection,
    pub init: InitSection,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection { eps_c: 1.0, eps_h: 3.7, sigma: 0.2, cycles: 5, scheme: SchemeName::Rm }
    }
}

impl Default for StrokeSection {
    fn default() -> Self {
        StrokeSection { stroke_mode: StrokeMode::Direct, alpha: 0.05, phi: 0.0, t1: None }
    }
}

impl Default for ThermoSection {
    fn default() -> Self {
        ThermoSection {
            thermo_mode: ThermoMode::Lindblad,
            beta_c: 0.25,
            beta_h: 0.025,
            gamma: 0.025,
            omega_d: 0.2,
            theta: 8.0,
            targets: TargetKind::GeneralizedGibbs,
            d_c: 0.5,
            q_c_re: 0.0,
            q_c_im: 0.0,
            d_h: 0.5,
            q_h_re: 0.0,
            q_h_im: 0.0,
        }
    }
}

impl Default for InitSection {
    fn default() -> Self {
        InitSection { init: InitKind::Invariant, init_d: 0.5, init_q_re: 0.0, init_q_im: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Float,
    Int,
    Word,
}

/// Every configuration key with its section and value kind.
pub const KEYS: &[(&str, &str, KeyKind)] = &[
    ("eps_c", "engine", KeyKind::Float),
    ("eps_h", "engine", KeyKind::Float),
    ("sigma", "engine", KeyKind::Float),
    ("cycles", "engine", KeyKind::Int),
    ("scheme", "engine", KeyKind::Word),
    ("stroke_mode", "stroke", KeyKind::Word),
    ("alpha", "stroke", KeyKind::Float),
    ("phi", "stroke", KeyKind::Float),
    ("t1", "stroke", KeyKind::Float),
    ("thermo_mode", "thermo", KeyKind::Word),
    ("beta_c", "thermo", KeyKind::Float),
    ("beta_h", "thermo", KeyKind::Float),
    ("gamma", "thermo", KeyKind::Float),
    ("omega_d", "thermo", KeyKind::Float),
    ("theta", "thermo", KeyKind::Float),
    ("targets", "thermo", KeyKind::Word),
    ("d_c", "thermo", KeyKind::Float),
    ("q_c_re", "thermo", KeyKind::Float),
    ("q_c_im", "thermo", KeyKind::Float),
    ("d_h", "thermo", KeyKind::Float),
    ("q_h_re", "thermo", KeyKind::Float),
    ("q_h_im", "thermo", KeyKind::Float),
    ("init", "init", KeyKind::Word),
    ("init_d", "init", KeyKind::Float),
    ("init_q_re", "init", KeyKind::Float),
    ("init_q_im", "init", KeyKind::Float),
];

/// A configuration turned into simulator objects.
#[derive(Clone, Debug)]
pub struct Built {
    pub engine: Engine,
    pub rho: DensityMatrix,
    pub scheme: Scheme,
    pub cycles: usize,
    /// Work- and heat-stroke durations, when the work-stroke duration is known.
    pub durations: Option<(f64, f64)>,
}

impl Config {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Config::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies `key = value` overrides, each parsed by the key's kind.
    pub fn with_overrides<'a>(&self, overrides: impl IntoIterator<Item = (&'a str, &'a str)>) -> CliResult<Self> {
        let mut table = toml::Table::try_from(self).map_err(|e| CliError::Config(e.to_string()))?;
        for (key, raw) in overrides {
            let (_, section, kind) = KEYS
                .iter()
                .find(|(k, _, _)| *k == key)
                .ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
            let bad = |what: &str| CliError::Config(format!("`{key}` expects {what}, got `{raw}`"));
            let value = match kind {
                KeyKind::Float => toml::Value::Float(raw.trim().parse().map_err(|_| bad("a number"))?),
                KeyKind::Int => toml::Value::Integer(raw.trim().parse().map_err(|_| bad("an integer"))?),
                KeyKind::Word => toml::Value::String(raw.trim().to_string()),
            };
            let slot = table
                .entry(section.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            match slot {
                toml::Value::Table(t) => {
                    t.insert(key.to_string(), value);
                }
                _ => return Err(CliError::Config(format!("section `{section}` is not a table"))),
            }
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    pub fn stroke(&self) -> CliResult<WorkStroke> {
        let s = &self.stroke;
        Ok(match s.stroke_mode {
            StrokeMode::Direct => WorkStroke::new(s.alpha, s.phi)?,
            StrokeMode::LandauZener => {
                let t1 = s
                    .t1
                    .ok_or_else(|| CliError::Config("landau_zener strokes need `t1`".into()))?;
                WorkStroke::landau_zener(self.engine.eps_c, self.engine.eps_h, t1)?
            }
        })
    }

    fn baths(&self) -> CliResult<(BathSpec, BathSpec)> {
        let t = &self.thermo;
        Ok((BathSpec::new(t.beta_c, t.gamma, t.omega_d)?, BathSpec::new(t.beta_h, t.gamma, t.omega_d)?))
    }

    pub fn thermal_maps(&self) -> CliResult<(ThermalMap, ThermalMap)> {
        let e = &self.engine;
        let t = &self.thermo;
        let cold = StrokeHamiltonian::new(e.eps_c, Stage::Cold)?;
        let hot = StrokeHamiltonian::new(e.eps_h, Stage::Hot)?;
        let (cold_bath, hot_bath) = self.baths()?;
        Ok(match t.thermo_mode {
            ThermoMode::Lindblad => (
                ThermalMap::lindblad(cold_bath, cold, t.theta)?,
                ThermalMap::lindblad(hot_bath, hot, t.theta)?,
            ),
            ThermoMode::Perfect => {
                let (c, h) = match t.targets {
                    TargetKind::Gibbs => (ThermalState::gibbs(t.beta_c, &cold), ThermalState::gibbs(t.beta_h, &hot)),
                    TargetKind::GeneralizedGibbs => {
                        (generalized_gibbs(&cold_bath, &cold)?, generalized_gibbs(&hot_bath, &hot)?)
                    }
                    TargetKind::Custom => (
                        ThermalState::new(t.d_c, C64::new(t.q_c_re, t.q_c_im))?,
                        ThermalState::new(t.d_h, C64::new(t.q_h_re, t.q_h_im))?,
                    ),
                };
                (ThermalMap::Perfect { target: c }, ThermalMap::Perfect { target: h })
            }
        })
    }

    pub fn engine(&self) -> CliResult<Engine> {
        let e = &self.engine;
        let (cold, hot) = self.thermal_maps()?;
        Ok(Engine::new(e.eps_c, e.eps_h, self.stroke()?, hot, cold, PointerSpec::new(e.sigma)?)?)
    }

    pub fn initial_state(&self, engine: &Engine) -> CliResult<DensityMatrix> {
        let i = &self.init;
        let cold = engine.hamiltonian(Stage::Cold);
        Ok(match i.init {
            InitKind::Invariant => invariant_cycle_state(engine)?,
            InitKind::GibbsCold => ThermalState::gibbs(self.thermo.beta_c, cold).density(),
            InitKind::GeneralizedGibbsCold => generalized_gibbs(&self.baths()?.0, cold)?.density(),
            InitKind::Custom => DensityMatrix::from_populations(i.init_d, C64::new(i.init_q_re, i.init_q_im))?,
        })
    }

    pub fn build(&self) -> CliResult<Built> {
        if self.engine.cycles == 0 {
            return Err(CliError::Config("`cycles` must be at least 1".into()));
        }
        let engine = self.engine()?;
        let rho = self.initial_state(&engine)?;
        let t2 = thermalization_duration(self.thermo.theta, self.engine.eps_c, self.engine.eps_h);
        let durations = self.stroke.t1.filter(|_| t2 > 0.0).map(|t1| (t1, t2));
        Ok(Built { engine, rho, scheme: self.engine.scheme.into(), cycles: self.engine.cycles, durations })
    }
}
