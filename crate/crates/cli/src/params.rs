use std::collections::BTreeSet;

use lancaster_core::Error as CoreError;
use serde_json::{Map, Value};

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SAMPLER: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub field: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            kind: "validation",
            field: Some(field.into()),
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            kind: "io",
            field: None,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "error": {
                "kind": self.kind,
                "exit_code": self.code,
                "field": self.field,
                "message": self.message,
            }
        })
    }

    /// Classifies a library error. `sampling` marks errors raised while a
    /// chain or sampler was running.
    pub fn from_core(e: CoreError, sampling: bool) -> Self {
        let message = e.to_string();
        let field = match &e {
            CoreError::NonpositiveParameter { name, .. } | CoreError::InvalidParameter { name, .. } => {
                Some(name.to_string())
            }
            CoreError::Domain { what, .. } => Some(what.to_string()),
            CoreError::EtaOutOfRange { .. } => Some("eta".into()),
            CoreError::TOutOfRange { .. } => Some("t".into()),
            CoreError::ParameterBelowHalf(_) => Some("a".into()),
            CoreError::JorgensenViolation { .. } => Some("lambda".into()),
            CoreError::InvalidNormalizationPoint(_) => Some("x0".into()),
            CoreError::InvalidMixingSupport(_) => Some("mixing".into()),
            CoreError::WrongCase { .. } => Some("case".into()),
            _ => None,
        };
        let (code, kind) = match &e {
            CoreError::ResourceBudget(_) => (EXIT_BUDGET, "resource-budget"),
            CoreError::NonpositiveParameter { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::Domain { .. }
            | CoreError::EtaOutOfRange { .. }
            | CoreError::TOutOfRange { .. }
            | CoreError::ParameterBelowHalf(_)
            | CoreError::JorgensenViolation { .. }
            | CoreError::InvalidNormalizationPoint(_)
            | CoreError::InvalidMixingSupport(_)
            | CoreError::WrongCase { .. }
            | CoreError::MarginMismatch(_)
            | CoreError::UnsupportedFamily(_)
            | CoreError::UnsupportedModel(_)
            | CoreError::DegreeOutOfRange { .. }
            | CoreError::DegreeExceedsSupport { .. }
            | CoreError::OrderTooLarge { .. }
            | CoreError::DegenerateDelta(_)
            | CoreError::InsufficientLength { .. }
            | CoreError::InfiniteSupport
                if !sampling =>
            {
                (EXIT_VALIDATION, "validation")
            }
            _ if sampling => (EXIT_SAMPLER, "sampler"),
            _ => (EXIT_SAMPLER, "computation"),
        };
        Self {
            code,
            kind,
            field,
            message,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        Self::from_core(e, false)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Merged command-line and config-file parameters. Every value read through
/// a getter, defaults included, is recorded for the resolved-config echo;
/// keys never read are rejected by [`Params::finish`].
pub struct Params {
    command: &'static str,
    raw: Map<String, Value>,
    used: BTreeSet<String>,
    resolved: Map<String, Value>,
}

impl Params {
    /// `cli` holds the flags given on the command line; keys of `config`
    /// override them.
    pub fn merge(command: &'static str, cli: Value, config: Option<&Value>) -> CliResult<Self> {
        let mut raw = match cli {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        if let Some(cfg) = config {
            let Value::Object(cfg) = cfg else {
                return Err(CliError::validation("config", "config file must hold a JSON object"));
            };
            for (k, v) in cfg {
                if k == "command" {
                    if v.as_str() != Some(command) {
                        return Err(CliError::validation(
                            "command",
                            format!("config is for command {v}, not {command:?}"),
                        ));
                    }
                    continue;
                }
                raw.insert(k.clone(), v.clone());
            }
        }
        raw.retain(|_, v| !v.is_null());
        let mut resolved = Map::new();
        resolved.insert("command".into(), Value::String(command.into()));
        Ok(Self {
            command,
            raw,
            used: BTreeSet::new(),
            resolved,
        })
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.used.insert(key.to_string());
        self.raw.get(key).cloned()
    }

    fn record(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_string(), v);
    }

    pub fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }

    pub fn opt_f64(&mut self, key: &str) -> CliResult<Option<f64>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let x = match &v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.trim().parse::<f64>().ok(),
            _ => None,
        }
        .ok_or_else(|| CliError::validation(key, format!("expected a number, got {v}")))?;
        self.record(key, v);
        Ok(Some(x))
    }

    pub fn f64(&mut self, key: &str) -> CliResult<f64> {
        self.opt_f64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> CliResult<f64> {
        match self.opt_f64(key)? {
            Some(x) => Ok(x),
            None => {
                self.record(key, serde_json::json!(default));
                Ok(default)
            }
        }
    }

    pub fn opt_u64(&mut self, key: &str) -> CliResult<Option<u64>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let x = match &v {
            Value::Number(n) => n.as_u64(),
            Value::String(s) => s.trim().parse::<u64>().ok(),
            _ => None,
        }
        .ok_or_else(|| CliError::validation(key, format!("expected a nonnegative integer, got {v}")))?;
        self.record(key, serde_json::json!(x));
        Ok(Some(x))
    }

    pub fn u64(&mut self, key: &str) -> CliResult<u64> {
        self.opt_u64(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> CliResult<u64> {
        match self.opt_u64(key)? {
            Some(x) => Ok(x),
            None => {
                self.record(key, serde_json::json!(default));
                Ok(default)
            }
        }
    }

    pub fn u32(&mut self, key: &str) -> CliResult<u32> {
        let v = self.u64(key)?;
        u32::try_from(v).map_err(|_| CliError::validation(key, format!("{v} is too large")))
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> CliResult<usize> {
        Ok(self.u64_or(key, default as u64)? as usize)
    }

    pub fn opt_str(&mut self, key: &str) -> CliResult<Option<String>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let s = v
            .as_str()
            .ok_or_else(|| CliError::validation(key, format!("expected a string, got {v}")))?
            .to_string();
        self.record(key, v);
        Ok(Some(s))
    }

    pub fn str(&mut self, key: &str) -> CliResult<String> {
        self.opt_str(key)?.ok_or_else(|| self.missing(key))
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> CliResult<String> {
        match self.opt_str(key)? {
            Some(s) => Ok(s),
            None => {
                self.record(key, Value::String(default.into()));
                Ok(default.into())
            }
        }
    }

    pub fn opt_f64_list(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(v) = self.take(key) else { return Ok(None) };
        let bad = || CliError::validation(key, "expected a list of numbers");
        let list = v
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|x| match x {
                Value::Number(n) => n.as_f64(),
                Value::String(s) => s.trim().parse::<f64>().ok(),
                _ => None,
            })
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(bad)?;
        self.record(key, v);
        Ok(Some(list))
    }

    /// Records a value computed during resolution.
    pub fn set(&mut self, key: &str, v: Value) {
        self.used.insert(key.to_string());
        self.record(key, v);
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::validation(key, format!("{} needs parameter {key:?}", self.command))
    }

    /// Rejects keys that were never read and returns the resolved config.
    pub fn finish(self) -> CliResult<Value> {
        if let Some(k) = self.raw.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::validation(
                k.clone(),
                format!("unknown or unused key {k:?} for this {} configuration", self.command),
            ));
        }
        Ok(Value::Object(self.resolved))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn config_overrides_cli() {
        let cfg = json!({"a": 2.5, "command": "build"});
        let mut p = Params::merge("build", json!({"a": 1.0, "b": 3.0}), Some(&cfg)).unwrap();
        assert_eq!(p.f64("a").unwrap(), 2.5);
        assert_eq!(p.f64("b").unwrap(), 3.0);
        assert_eq!(p.f64_or("c", 0.5).unwrap(), 0.5);
        let echo = p.finish().unwrap();
        assert_eq!(echo, json!({"command": "build", "a": 2.5, "b": 3.0, "c": 0.5}));
    }

    #[test]
    fn unknown_and_missing_keys_name_the_field() {
        let p = Params::merge("build", json!({"zeta": 1.0}), None).unwrap();
        let e = p.finish().unwrap_err();
        assert_eq!(e.field.as_deref(), Some("zeta"));
        assert_eq!(e.code, EXIT_VALIDATION);
        let mut p = Params::merge("build", json!({}), None).unwrap();
        assert_eq!(p.f64("a").unwrap_err().field.as_deref(), Some("a"));
        let cfg = json!({"command": "chain"});
        assert!(Params::merge("build", json!({}), Some(&cfg)).is_err());
    }

    #[test]
    fn library_errors_are_classified() {
        let e = CliError::from_core(CoreError::ResourceBudget("x".into()), false);
        assert_eq!(e.code, EXIT_BUDGET);
        let e = CliError::from_core(CoreError::NonpositiveParameter { name: "a", value: -1.0 }, false);
        assert_eq!((e.code, e.field.as_deref()), (EXIT_VALIDATION, Some("a")));
        let e = CliError::from_core(CoreError::InvalidParameter { name: "sampler", reason: "x".into() }, true);
        assert_eq!(e.code, EXIT_SAMPLER);
    }
}
