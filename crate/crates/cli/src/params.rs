//! Experiment parameters: defaults, TOML config files and `--param`
//! overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Value;

/// Bad configuration. Maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// One tunable parameter with its default value.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: Value,
    pub help: &'static str,
}

pub fn float(name: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Value::Float(default),
        help,
    }
}

pub fn int(name: &'static str, default: i64, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Value::Integer(default),
        help,
    }
}

pub fn text(name: &'static str, default: &str, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Value::String(default.to_string()),
        help,
    }
}

pub fn floats(name: &'static str, default: &[f64], help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Value::Array(default.iter().map(|v| Value::Float(*v)).collect()),
        help,
    }
}

pub fn ints(name: &'static str, default: &[i64], help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        default: Value::Array(default.iter().map(|v| Value::Integer(*v)).collect()),
        help,
    }
}

/// Layout of a config file. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
    }
}

/// Resolved parameter table.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(BTreeMap<String, Value>);

/// Coerce `value` to the type of `default`. Integers are accepted where
/// floats are expected, also inside arrays.
fn coerce(name: &str, default: &Value, value: Value) -> Result<Value, String> {
    let mismatch = |v: &Value| {
        format!(
            "parameter `{name}` expects {}, got {}",
            default.type_str(),
            v.type_str()
        )
    };
    match (default, value) {
        (Value::Float(_), Value::Integer(i)) => Ok(Value::Float(i as f64)),
        (Value::Array(d), Value::Array(items)) => {
            let elem = d.first().cloned().unwrap_or(Value::Float(0.0));
            items
                .into_iter()
                .map(|v| coerce(name, &elem, v))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array)
        }
        (d, v) if d.same_type(&v) => Ok(v),
        (_, v) => Err(mismatch(&v)),
    }
}

/// Parse the right-hand side of `--param key=value` as a TOML value,
/// falling back to a bare string.
pub fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

impl Params {
    pub fn resolve(specs: &[ParamSpec], file: &toml::Table, overrides: &[(String, Value)]) -> anyhow::Result<Self> {
        let mut map: BTreeMap<String, Value> = specs.iter().map(|s| (s.name.to_string(), s.default.clone())).collect();
        let updates = file
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .chain(overrides.iter().cloned());
        for (key, value) in updates {
            let Some(spec) = specs.iter().find(|s| s.name == key) else {
                return Err(config_error(format!("unknown parameter `{key}`")));
            };
            let value = coerce(&key, &spec.default, value).map_err(config_error)?;
            map.insert(key, value);
        }
        Ok(Self(map))
    }

    pub fn table(&self) -> toml::Table {
        self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    fn get(&self, name: &str) -> &Value {
        self.0
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` has no default"))
    }

    pub fn f64(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Float(v) => *v,
            Value::Integer(v) => *v as f64,
            v => panic!("parameter `{name}` is {}", v.type_str()),
        }
    }

    pub fn i64(&self, name: &str) -> i64 {
        match self.get(name) {
            Value::Integer(v) => *v,
            v => panic!("parameter `{name}` is {}", v.type_str()),
        }
    }

    /// A count that must be at least `min`.
    pub fn count(&self, name: &str, min: usize) -> anyhow::Result<usize> {
        let v = self.i64(name);
        if v < min as i64 {
            return Err(config_error(format!("`{name}` must be at least {min}, got {v}")));
        }
        Ok(v as usize)
    }

    pub fn str(&self, name: &str) -> &str {
        match self.get(name) {
            Value::String(s) => s,
            v => panic!("parameter `{name}` is {}", v.type_str()),
        }
    }

    pub fn f64s(&self, name: &str) -> Vec<f64> {
        match self.get(name) {
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Float(f) => *f,
                    Value::Integer(i) => *i as f64,
                    v => panic!("parameter `{name}` holds {}", v.type_str()),
                })
                .collect(),
            v => panic!("parameter `{name}` is {}", v.type_str()),
        }
    }

    pub fn i64s(&self, name: &str) -> Vec<i64> {
        match self.get(name) {
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) => *i,
                    v => panic!("parameter `{name}` holds {}", v.type_str()),
                })
                .collect(),
            v => panic!("parameter `{name}` is {}", v.type_str()),
        }
    }

    /// A positive finite float.
    pub fn positive(&self, name: &str) -> anyhow::Result<f64> {
        let v = self.f64(name);
        if !(v > 0.0) || !v.is_finite() {
            return Err(config_error(format!("`{name}` must be positive, got {v}")));
        }
        Ok(v)
    }

    /// One of the listed words.
    pub fn choice(&self, name: &str, options: &[&str]) -> anyhow::Result<String> {
        let v = self.str(name);
        if !options.contains(&v) {
            return Err(config_error(format!(
                "`{name}` must be one of {}, got `{v}`",
                options.join(", ")
            )));
        }
        Ok(v.to_string())
    }
}
