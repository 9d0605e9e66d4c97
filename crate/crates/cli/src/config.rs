//! Flat `key = value` run configuration with per-command schemas.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("unknown key `{key}` for command `{command}`")]
    UnknownKey { key: String, command: &'static str },
    #[error("key `{key}`: cannot parse {value:?} as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("`{key}` must be positive, got {value}")]
    NonPositive { key: String, value: f64 },
    #[error("empty range: {0}")]
    EmptyRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    /// Strictly positive float.
    Positive,
    /// Float or `auto`.
    OptFloat,
    Int,
    Bool,
    /// One of a fixed set of words.
    Word(&'static [&'static str]),
    /// Comma-separated floats, possibly empty.
    FloatList,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    OptFloat(Option<f64>),
    Int(usize),
    Bool(bool),
    Word(String),
    FloatList(Vec<f64>),
}

impl Value {
    /// Canonical text, used both for display and for the config hash.
    fn canonical(&self) -> String {
        match self {
            Value::Float(x) | Value::OptFloat(Some(x)) => format!("{x:?}"),
            Value::OptFloat(None) => "auto".into(),
            Value::Int(n) => n.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Word(w) => w.clone(),
            Value::FloatList(v) => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        }
    }
}

pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
}

const fn key(name: &'static str, kind: Kind, default: &'static str) -> KeySpec {
    KeySpec { name, kind, default }
}

const LAPLACIANS: &[&str] = &["fd2", "fd4", "spectral"];
const SCHEMES: &[&str] = &["etdrk4", "ifrk4"];

const WAVE: &[KeySpec] = &[
    key("omega", Kind::Float, "1"),
    key("a", Kind::Float, "1"),
    key("phi0", Kind::Float, "3"),
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
];

const SPECTRUM: &[KeySpec] = &[
    key("omega", Kind::Float, "1"),
    key("a", Kind::Float, "1"),
    key("phi0", Kind::Float, "3"),
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("laplacian", Kind::Word(LAPLACIANS), "fd4"),
    key("eigenvalues", Kind::Int, "0"),
];

const THETA: &[KeySpec] = &[
    key("omega", Kind::Float, "1"),
    key("a", Kind::Float, "1"),
    key("phi0", Kind::Float, "3"),
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("laplacian", Kind::Word(LAPLACIANS), "fd4"),
];

const TABLE1: &[KeySpec] = &[
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("pass_tol", Kind::Positive, "0.02"),
];

const TABLE2: &[KeySpec] = &[
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("fd_step", Kind::Positive, "1e-3"),
    key("laplacian", Kind::Word(LAPLACIANS), "fd4"),
    key("m_a_abs_tol", Kind::Positive, "0.03"),
    key("m_a_rel_tol", Kind::Positive, "0.02"),
    key("f_omega_rel_tol", Kind::Positive, "0.01"),
    key("m_a_det_rel_tol", Kind::Positive, "0.05"),
];

const PORTRAIT: &[KeySpec] = &[
    key("omega", Kind::Float, "1"),
    key("a", Kind::Float, "0"),
    key("seeds", Kind::FloatList, ""),
    key("grid", Kind::Int, "200"),
    key("horizon", Kind::Positive, "50"),
];

const EVOLVE: &[KeySpec] = &[
    key("omega", Kind::Float, "1"),
    key("a", Kind::Float, "1"),
    key("phi0", Kind::Float, "3"),
    key("grid", Kind::Int, "256"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("delta", Kind::Float, "0"),
    key("horizon", Kind::Positive, "10"),
    key("record_interval", Kind::Positive, "0.1"),
    key("scheme", Kind::Word(SCHEMES), "etdrk4"),
    key("cfl", Kind::Positive, "0.25"),
    key("dt", Kind::OptFloat, "auto"),
    key("epsilon", Kind::OptFloat, "auto"),
    key("tw_tol", Kind::Positive, "1e-4"),
];

const SWEEP: &[KeySpec] = &[
    key("omega_min", Kind::Float, "-2"),
    key("omega_max", Kind::Float, "2"),
    key("omega_steps", Kind::Int, "5"),
    key("a_min", Kind::Float, "-1"),
    key("a_max", Kind::Float, "1"),
    key("a_steps", Kind::Int, "5"),
    key("phi0_fraction", Kind::Positive, "0.5"),
    key("grid", Kind::Int, "128"),
    key("ode_tol", Kind::Positive, "1e-12"),
    key("fd_step", Kind::Positive, "1e-3"),
    key("laplacian", Kind::Word(LAPLACIANS), "fd4"),
    key("richardson", Kind::Bool, "false"),
];

fn is_tolerance_name(name: &str) -> bool {
    name.ends_with("_tol") || name == "fd_step"
}

pub fn schema(command: &str) -> &'static [KeySpec] {
    match command {
        "wave" => WAVE,
        "spectrum" => SPECTRUM,
        "theta" => THETA,
        "table1" => TABLE1,
        "table2" => TABLE2,
        "portrait" => PORTRAIT,
        "evolve" => EVOLVE,
        "sweep" => SWEEP,
        _ => &[],
    }
}

/// Raw `key = value` pairs from a config file, with their line numbers.
pub fn parse_text(text: &str) -> Result<Vec<(usize, String, String)>, ConfigError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: raw.to_string(),
            });
        }
        if seen.insert(k.to_string(), line).is_some() {
            return Err(ConfigError::Duplicate {
                line,
                key: k.to_string(),
            });
        }
        out.push((line, k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn parse_value(name: &str, kind: Kind, text: &str) -> Result<Value, ConfigError> {
    let bad = |expected| ConfigError::BadValue {
        key: name.to_string(),
        value: text.to_string(),
        expected,
    };
    let float = |s: &str| -> Result<f64, ConfigError> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad("a finite number"))
    };
    Ok(match kind {
        Kind::Float => Value::Float(float(text)?),
        Kind::Positive => {
            let x = float(text)?;
            if x <= 0.0 {
                return Err(ConfigError::NonPositive {
                    key: name.to_string(),
                    value: x,
                });
            }
            Value::Float(x)
        }
        Kind::OptFloat if text == "auto" => Value::OptFloat(None),
        Kind::OptFloat => {
            let x = float(text)?;
            if x <= 0.0 {
                return Err(ConfigError::NonPositive {
                    key: name.to_string(),
                    value: x,
                });
            }
            Value::OptFloat(Some(x))
        }
        Kind::Int => Value::Int(text.parse().map_err(|_| bad("a nonnegative integer"))?),
        Kind::Bool => Value::Bool(text.parse().map_err(|_| bad("true or false"))?),
        Kind::Word(words) => {
            if !words.contains(&text) {
                return Err(bad("a known name"));
            }
            Value::Word(text.to_string())
        }
        Kind::FloatList if text.is_empty() => Value::FloatList(Vec::new()),
        Kind::FloatList => Value::FloatList(text.split(',').map(float).collect::<Result<_, _>>()?),
    })
}

/// Resolved parameters of one command: defaults, then the config file, then
/// command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: &'static str,
    values: BTreeMap<&'static str, Value>,
}

impl RunConfig {
    pub fn new(command: &'static str) -> Self {
        let values = schema(command)
            .iter()
            .map(|k| (k.name, parse_value(k.name, k.kind, k.default).expect("valid default")))
            .collect();
        Self { command, values }
    }

    pub fn from_file(command: &'static str, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(command, &text)
    }

    pub fn from_text(command: &'static str, text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::new(command);
        for (_, k, v) in parse_text(text)? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, name: &str, text: &str) -> Result<(), ConfigError> {
        let spec = schema(self.command)
            .iter()
            .find(|k| k.name == name)
            .ok_or_else(|| ConfigError::UnknownKey {
                key: name.to_string(),
                command: self.command,
            })?;
        self.values.insert(spec.name, parse_value(name, spec.kind, text)?);
        Ok(())
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn is_tolerance(&self, name: &str) -> bool {
        self.has(name) && is_tolerance_name(name)
    }

    /// Range and size checks that involve more than one key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.has("grid") {
            let n = self.int("grid");
            if n < 8 || !n.is_multiple_of(2) {
                return Err(ConfigError::EmptyRange(format!("grid must be even and at least 8, got {n}")));
            }
        }
        for axis in ["omega", "a"] {
            let (lo, hi, steps) = (format!("{axis}_min"), format!("{axis}_max"), format!("{axis}_steps"));
            if !self.has(&lo) {
                continue;
            }
            if self.float(&lo) > self.float(&hi) || self.int(&steps) == 0 {
                return Err(ConfigError::EmptyRange(format!(
                    "{axis} range [{}, {}] with {} steps",
                    self.float(&lo),
                    self.float(&hi),
                    self.int(&steps)
                )));
            }
        }
        if self.command == "evolve" && self.float("record_interval") > self.float("horizon") {
            return Err(ConfigError::EmptyRange("record_interval exceeds horizon".into()));
        }
        Ok(())
    }

    pub fn float(&self, name: &str) -> f64 {
        match &self.values[name] {
            Value::Float(x) => *x,
            v => panic!("{name} is not a float: {v:?}"),
        }
    }

    pub fn opt_float(&self, name: &str) -> Option<f64> {
        match &self.values[name] {
            Value::OptFloat(x) => *x,
            v => panic!("{name} is not an optional float: {v:?}"),
        }
    }

    pub fn int(&self, name: &str) -> usize {
        match &self.values[name] {
            Value::Int(n) => *n,
            v => panic!("{name} is not an integer: {v:?}"),
        }
    }

    pub fn boolean(&self, name: &str) -> bool {
        match &self.values[name] {
            Value::Bool(b) => *b,
            v => panic!("{name} is not a boolean: {v:?}"),
        }
    }

    pub fn word(&self, name: &str) -> &str {
        match &self.values[name] {
            Value::Word(w) => w,
            v => panic!("{name} is not a word: {v:?}"),
        }
    }

    pub fn list(&self, name: &str) -> &[f64] {
        match &self.values[name] {
            Value::FloatList(v) => v,
            v => panic!("{name} is not a list: {v:?}"),
        }
    }

    /// `key=value` lines in key order.
    pub fn canonical(&self) -> String {
        let mut s = format!("command={}\n", self.command);
        for (k, v) in &self.values {
            s.push_str(&format!("{k}={}\n", v.canonical()));
        }
        s
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// `name=value` for every tolerance key, space separated.
    pub fn tolerances(&self) -> String {
        schema(self.command)
            .iter()
            .filter(|k| is_tolerance_name(k.name))
            .map(|k| format!("{}={}", k.name, self.values[k.name].canonical()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let cfg = RunConfig::from_text("wave", "# header\n\nomega = 2 # inline\n  a=4\nphi0 = 5\n").unwrap();
        assert_eq!(cfg.float("omega"), 2.0);
        assert_eq!(cfg.float("a"), 4.0);
        assert_eq!(cfg.float("phi0"), 5.0);
        assert_eq!(cfg.int("grid"), 256);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(matches!(
            RunConfig::from_text("wave", "omgea = 1"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            RunConfig::from_text("table1", "omega = 1"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            RunConfig::from_text("wave", "a = 1\na = 2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::from_text("wave", "just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(matches!(
            RunConfig::from_text("wave", "ode_tol = 0"),
            Err(ConfigError::NonPositive { .. })
        ));
        assert!(matches!(
            RunConfig::from_text("table1", "pass_tol = -0.1"),
            Err(ConfigError::NonPositive { .. })
        ));
    }

    #[test]
    fn ranges_must_be_nonempty() {
        assert!(matches!(
            RunConfig::from_text("sweep", "omega_min = 1\nomega_max = 0"),
            Err(ConfigError::EmptyRange(_))
        ));
        assert!(matches!(
            RunConfig::from_text("sweep", "a_steps = 0"),
            Err(ConfigError::EmptyRange(_))
        ));
        assert!(RunConfig::from_text("sweep", "a_min = 0.5\na_max = 0.5\na_steps = 1").is_ok());
    }

    #[test]
    fn hash_depends_on_values_not_spelling() {
        let a = RunConfig::from_text("wave", "omega = 1.0\nphi0 = 3").unwrap();
        let b = RunConfig::from_text("wave", "# same\nphi0=3.000\nomega=1").unwrap();
        let c = RunConfig::from_text("wave", "omega = 1.5").unwrap();
        assert_eq!(a.sha256(), b.sha256());
        assert_ne!(a.sha256(), c.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn lists_and_words_parse() {
        let cfg = RunConfig::from_text("portrait", "seeds = 0.5, 1.5,2").unwrap();
        assert_eq!(cfg.list("seeds"), &[0.5, 1.5, 2.0]);
        assert!(RunConfig::from_text("spectrum", "laplacian = fd3").is_err());
        let e = RunConfig::from_text("evolve", "dt = 1e-3\nscheme = ifrk4").unwrap();
        assert_eq!(e.opt_float("dt"), Some(1e-3));
        assert_eq!(e.opt_float("epsilon"), None);
        assert_eq!(e.word("scheme"), "ifrk4");
    }
}
