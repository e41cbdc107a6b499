//! `key = value` run configuration.
//!
//! Every economy parameter has a key named after its symbol (`W`, `R`,
//! `epsilon`, `u`, `t`, `c`, `m`, `p_r`, `p_c`, `p_m`) plus a few longer
//! names for the remaining knobs. Blank lines and `#` comments are ignored.

use std::fmt;
use std::path::{Path, PathBuf};

use hayek_core::economy::ParamError;
use hayek_core::engine::ConfigError as CoreConfigError;
use hayek_core::{EnvKind, Injection, RunConfig};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    MissingFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { key: String, origin: Origin },
    #[error("{origin}: bad value {value:?} for {key}: {reason}")]
    TypeError {
        key: String,
        value: String,
        reason: String,
        origin: Origin,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("inconsistent configuration: {0}")]
    Invalid(#[from] CoreConfigError),
}

/// Where a setting came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

/// Every accepted key, in the order effective values are reported.
pub const KEYS: &[&str] = &[
    "env",
    "seed",
    "instances",
    "window",
    "start_level",
    "step_cap",
    "hardwired",
    "hardwired_wealth",
    "birth",
    "mutation",
    "td",
    "cull",
    "carry_memory",
    "carry_ownership",
    "n0",
    "injection",
    "injection_floor",
    "W",
    "R",
    "epsilon",
    "u",
    "t",
    "c",
    "m",
    "p_r",
    "p_c",
    "p_m",
    "birth_threshold",
    "inactivity_limit",
    "td_rate",
];

pub fn parse_settings(text: &str) -> Result<Vec<Setting>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        out.push(Setting {
            key: canonical(key.trim()).to_string(),
            value: value.trim().to_string(),
            origin: Origin::Line(i + 1),
        });
    }
    Ok(out)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(text: &str) -> Result<Setting, String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, found {text:?}"))?;
    Ok(Setting {
        key: canonical(key.trim()).to_string(),
        value: value.trim().to_string(),
        origin: Origin::Flag,
    })
}

fn canonical(key: &str) -> &str {
    match key {
        "ε" | "eps" => "epsilon",
        other => other,
    }
}

/// Reads `path` (if any), applies `overrides` on top and resolves the run
/// configuration. Effective values are logged at info level.
pub fn load_config(path: Option<&Path>, overrides: &[Setting]) -> Result<RunConfig, ConfigError> {
    let mut settings = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::MissingFile {
                path: path.to_path_buf(),
                source,
            })?;
            parse_settings(&text)?
        }
        None => Vec::new(),
    };
    settings.extend_from_slice(overrides);
    let config = resolve(&settings)?;
    for (key, value) in effective_values(&config) {
        log::info!("config {key} = {value}");
    }
    Ok(config)
}

/// Builds a configuration from settings; later settings win.
pub fn resolve(settings: &[Setting]) -> Result<RunConfig, ConfigError> {
    for s in settings {
        if !KEYS.contains(&s.key.as_str()) {
            return Err(ConfigError::UnknownKey {
                key: s.key.clone(),
                origin: s.origin.clone(),
            });
        }
    }
    // The environment picks the defaults, so it is read first.
    let env = match settings.iter().rev().find(|s| s.key == "env") {
        Some(s) => s.value.parse::<EnvKind>().map_err(|e| type_error(s, e))?,
        None => EnvKind::Blockworld,
    };
    let mut config = RunConfig::new(env);
    for s in settings {
        apply(&mut config, s)?;
    }
    config.validate().map_err(|e| match e {
        CoreConfigError::Params(ParamError::OutOfRange { name, value }) => {
            let setting = settings.iter().rev().find(|s| s.key == name);
            ConfigError::TypeError {
                key: name.to_string(),
                value: setting.map_or_else(|| value.to_string(), |s| s.value.clone()),
                reason: "out of range".to_string(),
                origin: setting.map_or(Origin::Flag, |s| s.origin.clone()),
            }
        }
        other => ConfigError::Invalid(other),
    })?;
    Ok(config)
}

fn type_error(s: &Setting, reason: impl fmt::Display) -> ConfigError {
    ConfigError::TypeError {
        key: s.key.clone(),
        value: s.value.clone(),
        reason: reason.to_string(),
        origin: s.origin.clone(),
    }
}

fn number<T: std::str::FromStr>(s: &Setting) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    s.value.parse::<T>().map_err(|e| type_error(s, e))
}

fn flag(s: &Setting) -> Result<bool, ConfigError> {
    match s.value.as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(type_error(s, "expected true or false")),
    }
}

fn apply(config: &mut RunConfig, s: &Setting) -> Result<(), ConfigError> {
    let p = &mut config.params;
    match s.key.as_str() {
        "env" => config.env = s.value.parse().map_err(|e| type_error(s, e))?,
        "seed" => config.seed = number(s)?,
        "instances" => config.instances = number(s)?,
        "window" => config.window = number(s)?,
        "start_level" => config.start_level = number(s)?,
        "step_cap" => {
            config.step_cap = match s.value.as_str() {
                "auto" => None,
                _ => Some(number(s)?),
            }
        }
        "hardwired" => config.hardwired = flag(s)?,
        "hardwired_wealth" => config.hardwired_wealth = number(s)?,
        "birth" => config.modes.birth = flag(s)?,
        "mutation" => config.modes.mutation = flag(s)?,
        "td" => config.modes.td = flag(s)?,
        "cull" => config.modes.cull = flag(s)?,
        "carry_memory" => config.carry_memory = flag(s)?,
        "carry_ownership" => config.carry_ownership = flag(s)?,
        "n0" => config.initial_agents = number(s)?,
        "injection" => config.injection = s.value.parse::<Injection>().map_err(|e| type_error(s, e))?,
        "injection_floor" => config.injection_floor = number(s)?,
        "W" => p.endowment = number(s)?,
        "R" => p.reward = number(s)?,
        "epsilon" => p.epsilon = number(s)?,
        "u" => p.level_threshold = number(s)?,
        "t" => p.tax_rate = number(s)?,
        "c" => p.copyright = number(s)?,
        "m" => p.mutation_rate = number(s)?,
        "p_r" => p.p_random = number(s)?,
        "p_c" => p.p_copy = number(s)?,
        "p_m" => p.p_mutate = number(s)?,
        "birth_threshold" => p.birth_threshold = number(s)?,
        "inactivity_limit" => p.inactivity_limit = number(s)?,
        "td_rate" => p.td_rate = number(s)?,
        _ => {
            return Err(ConfigError::UnknownKey {
                key: s.key.clone(),
                origin: s.origin.clone(),
            })
        }
    }
    Ok(())
}

/// Every key with its resolved value, in [`KEYS`] order.
pub fn effective_values(c: &RunConfig) -> Vec<(&'static str, String)> {
    let p = &c.params;
    let values = [
        c.env.to_string(),
        c.seed.to_string(),
        c.instances.to_string(),
        c.window.to_string(),
        c.start_level.to_string(),
        c.step_cap.map_or_else(|| "auto".to_string(), |v| v.to_string()),
        c.hardwired.to_string(),
        c.hardwired_wealth.to_string(),
        c.modes.birth.to_string(),
        c.modes.mutation.to_string(),
        c.modes.td.to_string(),
        c.modes.cull.to_string(),
        c.carry_memory.to_string(),
        c.carry_ownership.to_string(),
        c.initial_agents.to_string(),
        c.injection.to_string(),
        c.injection_floor.to_string(),
        p.endowment.to_string(),
        p.reward.to_string(),
        p.epsilon.to_string(),
        p.level_threshold.to_string(),
        p.tax_rate.to_string(),
        p.copyright.to_string(),
        p.mutation_rate.to_string(),
        p.p_random.to_string(),
        p.p_copy.to_string(),
        p.p_mutate.to_string(),
        p.birth_threshold.to_string(),
        p.inactivity_limit.to_string(),
        p.td_rate.to_string(),
    ];
    KEYS.iter().copied().zip(values).collect()
}

/// Renders a configuration as a file that [`load_config`] reads back to the
/// same value.
pub fn to_config_text(c: &RunConfig) -> String {
    effective_values(c)
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}
