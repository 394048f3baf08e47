//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [geometry]
//! class = su2
//! g = 1, 1, 4
//!
//! [flow]
//! alpha = volume_preserving
//! etas = 1, 0.5
//! ```
//!
//! Keys before the first header belong to the unnamed root section. There is
//! no nesting, no quoting and no inline comments; a `#` or `;` only starts a
//! comment at the beginning of a line. Duplicate keys and unknown sections or
//! keys are errors, reported with the offending line.

use std::collections::BTreeMap;
use std::path::PathBuf;

use thiserror::Error;

use crate::flows::{AlphaPolicy, FlowSpec};
use crate::homogeneous::{BianchiClass, HomMetric};
use crate::horava::HoravaParams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {field}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the problem is a missing entry.
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { line, field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub value: String,
    pub line: usize,
}

/// Parsed but untyped configuration.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
}

pub fn parse(text: &str) -> Result<Config, ConfigError> {
    let mut cfg = Config::default();
    let mut current = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(line_no, "section", "missing closing ']'"))?
                .trim();
            if !valid_name(name) {
                return Err(ConfigError::new(line_no, "section", format!("invalid section name '{name}'")));
            }
            if cfg.sections.contains_key(name) {
                return Err(ConfigError::new(line_no, name, "section declared twice"));
            }
            current = name.to_string();
            cfg.sections.entry(current.clone()).or_default();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line_no, "syntax", "expected 'key = value' or '[section]'"))?;
        let key = key.trim();
        if !valid_name(key) {
            return Err(ConfigError::new(line_no, key, "invalid key"));
        }
        let section = cfg.sections.entry(current.clone()).or_default();
        if section.contains_key(key) {
            return Err(ConfigError::new(line_no, qualified(&current, key), "duplicate key"));
        }
        section.insert(key.to_string(), Entry { value: value.trim().to_string(), line: line_no });
    }
    Ok(cfg)
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Parses a finite number; `a/b` fractions are accepted.
pub fn parse_number(s: &str) -> Option<f64> {
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.trim().parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

impl Config {
    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    pub fn section_names(&self) -> impl Iterator<Item = &str> {
        self.sections.keys().map(String::as_str)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections.get(section)?.get(key)
    }

    /// Rejects sections outside `allowed` and keys not listed for their section.
    pub fn check_schema(&self, allowed: &[(&str, &[&str])]) -> Result<(), ConfigError> {
        for (name, entries) in &self.sections {
            let Some((_, keys)) = allowed.iter().find(|(s, _)| s == name) else {
                let line = entries.values().map(|e| e.line).min().unwrap_or(0);
                return Err(ConfigError::new(line, name.clone(), "unknown section"));
            };
            for (key, entry) in entries {
                if !keys.contains(&key.as_str()) {
                    return Err(ConfigError::new(entry.line, qualified(name, key), "unknown key"));
                }
            }
        }
        Ok(())
    }

    fn missing(section: &str, key: &str) -> ConfigError {
        ConfigError::new(0, qualified(section, key), "required entry is missing")
    }

    pub fn str_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).map_or(default, |e| e.value.as_str())
    }

    pub fn number(&self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(e) = self.get(section, key) else { return Ok(None) };
        parse_number(&e.value)
            .map(Some)
            .ok_or_else(|| ConfigError::new(e.line, qualified(section, key), format!("'{}' is not a finite number", e.value)))
    }

    pub fn number_or(&self, section: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self.number(section, key)?.unwrap_or(default))
    }

    pub fn require_number(&self, section: &str, key: &str) -> Result<f64, ConfigError> {
        self.number(section, key)?.ok_or_else(|| Self::missing(section, key))
    }

    pub fn integer_or(&self, section: &str, key: &str, default: u64) -> Result<u64, ConfigError> {
        let Some(e) = self.get(section, key) else { return Ok(default) };
        e.value
            .parse::<u64>()
            .map_err(|_| ConfigError::new(e.line, qualified(section, key), format!("'{}' is not a non-negative integer", e.value)))
    }

    pub fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.get(section, key) else { return Ok(None) };
        if e.value.is_empty() {
            return Ok(Some(Vec::new()));
        }
        e.value
            .split(',')
            .map(|item| {
                parse_number(item).ok_or_else(|| {
                    ConfigError::new(e.line, qualified(section, key), format!("'{}' is not a finite number", item.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn error_at(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let line = self.get(section, key).map_or(0, |e| e.line);
        ConfigError::new(line, qualified(section, key), message)
    }
}

pub fn parse_alpha(s: &str) -> Option<AlphaPolicy> {
    let s = s.trim().to_ascii_lowercase();
    let arg = |prefix: &str| -> Option<f64> {
        let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
        parse_number(inner)
    };
    match s.as_str() {
        "zero" | "0" => Some(AlphaPolicy::Zero),
        "volume_preserving" => Some(AlphaPolicy::VolumePreserving),
        _ => arg("constant")
            .map(AlphaPolicy::Constant)
            .or_else(|| arg("curvature").map(AlphaPolicy::ScalarCurvatureProportional)),
    }
}

pub fn format_alpha(a: &AlphaPolicy) -> String {
    match a {
        AlphaPolicy::Zero => "zero".into(),
        AlphaPolicy::VolumePreserving => "volume_preserving".into(),
        AlphaPolicy::Constant(v) => format!("constant({v})"),
        AlphaPolicy::ScalarCurvatureProportional(k) => format!("curvature({k})"),
    }
}

const GEOMETRY_KEYS: &[&str] = &["class", "g", "cell_volume"];
const FLOW_KEYS: &[&str] = &["alpha", "etas", "dt_init", "t_max", "rel_tol", "positivity_margin"];
const OUTPUT_KEYS: &[&str] = &["path", "stride"];
const RUN_KEYS: &[&str] = &["seed"];
const VERIFY_KEYS: &[&str] = &["count", "h", "amplitude"];
const HORAVA_KEYS: &[&str] = &["kappa", "mu", "w2", "lambda_w", "lambda", "alpha_min", "alpha_max", "alpha_steps"];
const FIXEDPOINT_KEYS: &[&str] = &["eta0", "eta1", "g_min", "g_max", "steps", "tolerance"];

/// Every section/key any subcommand understands.
pub const SCHEMA: &[(&str, &[&str])] = &[
    ("geometry", GEOMETRY_KEYS),
    ("flow", FLOW_KEYS),
    ("output", OUTPUT_KEYS),
    ("run", RUN_KEYS),
    ("verify", VERIFY_KEYS),
    ("horava", HORAVA_KEYS),
    ("fixedpoints", FIXEDPOINT_KEYS),
];

/// Geometry, flow and output settings for a single trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub metric: HomMetric,
    pub flow: FlowSpec,
    pub output: Option<PathBuf>,
    pub stride: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        cfg.check_schema(SCHEMA)?;
        let metric = geometry_from(cfg)?;

        let defaults = FlowSpec::default();
        let alpha_text = cfg.str_or("flow", "alpha", "zero");
        let alpha = parse_alpha(alpha_text).ok_or_else(|| {
            cfg.error_at("flow", "alpha", format!("unknown policy '{alpha_text}' (zero, constant(a), volume_preserving, curvature(k))"))
        })?;
        let flow = FlowSpec {
            alpha,
            etas: cfg.list("flow", "etas")?.unwrap_or_else(|| defaults.etas.clone()),
            dt_init: cfg.number_or("flow", "dt_init", defaults.dt_init)?,
            t_max: cfg.number_or("flow", "t_max", defaults.t_max)?,
            rel_tol: cfg.number_or("flow", "rel_tol", defaults.rel_tol)?,
            positivity_margin: cfg.number_or("flow", "positivity_margin", defaults.positivity_margin)?,
        };
        flow.validate().map_err(|e| ConfigError::new(0, "flow", e.to_string()))?;

        let stride = cfg.integer_or("output", "stride", 1)?;
        if stride == 0 {
            return Err(cfg.error_at("output", "stride", "must be >= 1"));
        }
        Ok(Self {
            metric,
            flow,
            output: cfg.get("output", "path").map(|e| PathBuf::from(&e.value)),
            stride: stride as usize,
            seed: cfg.integer_or("run", "seed", 0)?,
        })
    }
}

pub fn geometry_from(cfg: &Config) -> Result<HomMetric, ConfigError> {
    let class_text = cfg.get("geometry", "class").ok_or_else(|| Config::missing("geometry", "class"))?;
    let class: BianchiClass = class_text
        .value
        .parse()
        .map_err(|e: crate::homogeneous::HomError| ConfigError::new(class_text.line, "geometry.class", e.to_string()))?;
    let g = cfg.list("geometry", "g")?.unwrap_or_else(|| vec![1.0; 3]);
    let g: [f64; 3] = g
        .try_into()
        .map_err(|_| cfg.error_at("geometry", "g", "expected exactly three coefficients"))?;
    let v0 = cfg.number_or("geometry", "cell_volume", 1.0)?;
    HomMetric::with_cell_volume(class, g, v0).map_err(|e| cfg.error_at("geometry", "g", e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub count: usize,
    pub steps: Vec<f64>,
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { count: 20, steps: vec![1.0 / 32.0, 1.0 / 64.0], amplitude: 0.25, seed: 0 }
    }
}

impl VerifyConfig {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        cfg.check_schema(SCHEMA)?;
        let d = Self::default();
        let steps = cfg.list("verify", "h")?.unwrap_or(d.steps);
        if steps.is_empty() || steps.iter().any(|h| *h <= 0.0) {
            return Err(cfg.error_at("verify", "h", "need at least one positive step"));
        }
        let amplitude = cfg.number_or("verify", "amplitude", d.amplitude)?;
        if !(0.0..1.0 / 3.0).contains(&amplitude) {
            return Err(cfg.error_at("verify", "amplitude", "must lie in [0, 1/3) to keep metrics SPD"));
        }
        Ok(Self {
            count: cfg.integer_or("verify", "count", d.count as u64)? as usize,
            steps,
            amplitude,
            seed: cfg.integer_or("run", "seed", d.seed)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoravaScan {
    pub base: HoravaParams,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub steps: usize,
}

impl HoravaScan {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        cfg.check_schema(SCHEMA)?;
        let s = "horava";
        let base = HoravaParams {
            kappa: cfg.require_number(s, "kappa")?,
            mu: cfg.require_number(s, "mu")?,
            w2: cfg.require_number(s, "w2")?,
            lambda_w: cfg.require_number(s, "lambda_w")?,
            lambda: cfg.require_number(s, "lambda")?,
            alpha: 0.0,
        };
        base.validate().map_err(|e| ConfigError::new(0, s, e.to_string()))?;
        let alpha_min = cfg.number_or(s, "alpha_min", 0.0)?;
        let alpha_max = cfg.number_or(s, "alpha_max", alpha_min)?;
        if alpha_max < alpha_min {
            return Err(cfg.error_at(s, "alpha_max", "must be >= alpha_min"));
        }
        Ok(Self { base, alpha_min, alpha_max, steps: cfg.integer_or(s, "alpha_steps", 0)? as usize })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointScan {
    pub class: BianchiClass,
    pub eta0: f64,
    pub eta1: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub steps: usize,
    pub tolerance: f64,
}

impl FixedPointScan {
    pub fn from_config(cfg: &Config) -> Result<Self, ConfigError> {
        cfg.check_schema(SCHEMA)?;
        let class = geometry_from(cfg)?.class;
        let s = "fixedpoints";
        let scan = Self {
            class,
            eta0: cfg.number_or(s, "eta0", 1.0)?,
            eta1: cfg.number_or(s, "eta1", 1.0)?,
            g_min: cfg.number_or(s, "g_min", 0.5)?,
            g_max: cfg.number_or(s, "g_max", 2.0)?,
            steps: cfg.integer_or(s, "steps", 9)? as usize,
            tolerance: cfg.number_or(s, "tolerance", 1e-10)?,
        };
        if scan.eta0 < 0.0 || scan.eta1 < 0.0 {
            return Err(cfg.error_at(s, "eta0", "coefficients must be >= 0"));
        }
        if !(scan.g_min > 0.0 && scan.g_max >= scan.g_min) {
            return Err(cfg.error_at(s, "g_min", "need 0 < g_min <= g_max"));
        }
        if scan.steps == 0 {
            return Err(cfg.error_at(s, "steps", "must be >= 1"));
        }
        Ok(scan)
    }
}
