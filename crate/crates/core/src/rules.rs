//! The rule collections that drive classification, loaded from JSON.
//!
//! The shipped default (`rules/default_rules.json`) lists the OSM keys and
//! values used by the classifier. Order is significant in `res_aux`,
//! `nonres_aux` and `other_nonres_keys`: the first matching entry is the one
//! recorded in `tag used`.

use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_RULES: &str = include_str!("../rules/default_rules.json");

/// `building` values that say nothing about how a building is used.
pub const UNKNOWN_VALUES: [&str; 5] = ["yes", "service", "roof", "ruins", "construction"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("config error at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            Self::Schema { path, .. } | Self::Invalid { path, .. } => path,
        }
    }
}

fn default_unknown() -> IndexSet<String> {
    UNKNOWN_VALUES.iter().map(|s| s.to_string()).collect()
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSet {
    /// `building` values that mark a footprint residential.
    #[serde(default)]
    pub acc_values: IndexSet<String>,
    /// Footprint keys whose presence marks a building non-residential.
    #[serde(default)]
    pub add_keys: IndexSet<String>,
    /// Per-key values ignored on inherited tags.
    #[serde(default)]
    pub skip_by_key: IndexMap<String, IndexSet<String>>,
    /// Values ignored on inherited tags regardless of key.
    #[serde(default)]
    pub skip_values: IndexSet<String>,
    #[serde(default)]
    pub res_aux: IndexMap<String, Vec<String>>,
    #[serde(default)]
    pub nonres_aux: IndexMap<String, Vec<String>>,
    /// Inherited keys that mark a building non-residential whatever the value.
    #[serde(default)]
    pub other_nonres_keys: IndexSet<String>,
    #[serde(default = "default_unknown")]
    pub unknown_values: IndexSet<String>,
    /// Use the key lists exactly as printed in the source tables, including
    /// the `shopv` entry in place of `shop`.
    #[serde(default, skip_serializing_if = "is_false")]
    pub literal_supplement_lists: bool,
}

/// Parses and validates a JSON rule configuration.
pub fn load_rules(bytes: &[u8]) -> Result<RuleSet, ConfigError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let rules: RuleSet = serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    rules.normalized().validate()
}

/// The shipped default rules.
pub fn default_rules() -> RuleSet {
    load_rules(DEFAULT_RULES.as_bytes()).expect("shipped default rules are valid")
}

/// The shipped default config text.
pub fn default_rules_json() -> &'static str {
    DEFAULT_RULES
}

fn lower_set(s: IndexSet<String>) -> IndexSet<String> {
    s.into_iter().map(|v| v.trim().to_lowercase()).collect()
}

impl RuleSet {
    /// Default rules with the literal printed key lists.
    pub fn literal_supplement() -> RuleSet {
        let mut r = default_rules();
        r.literal_supplement_lists = true;
        r.normalized()
    }

    fn normalized(mut self) -> Self {
        let lower_map = |m: IndexMap<String, Vec<String>>| -> IndexMap<String, Vec<String>> {
            m.into_iter()
                .map(|(k, vs)| {
                    (
                        k.trim().to_lowercase(),
                        vs.into_iter().map(|v| v.trim().to_lowercase()).collect(),
                    )
                })
                .collect()
        };
        self.acc_values = lower_set(self.acc_values);
        self.add_keys = lower_set(self.add_keys);
        self.skip_by_key = self
            .skip_by_key
            .into_iter()
            .map(|(k, v)| (k.trim().to_lowercase(), lower_set(v)))
            .collect();
        self.skip_values = lower_set(self.skip_values);
        self.res_aux = lower_map(self.res_aux);
        self.nonres_aux = lower_map(self.nonres_aux);
        self.other_nonres_keys = lower_set(self.other_nonres_keys);
        self.unknown_values = lower_set(self.unknown_values);
        if self.literal_supplement_lists {
            if let Some(i) = self.other_nonres_keys.get_index_of("shop") {
                let mut keys: Vec<String> = self.other_nonres_keys.into_iter().collect();
                keys[i] = "shopv".to_string();
                self.other_nonres_keys = keys.into_iter().collect();
            }
        }
        self
    }

    fn validate(self) -> Result<Self, ConfigError> {
        if self.acc_values.contains("hotel") {
            return Err(ConfigError::invalid(
                "acc_values",
                "\"hotel\" is not an accommodation value",
            ));
        }
        let expected = default_unknown();
        if self.unknown_values.len() != expected.len() || !expected.iter().all(|v| self.unknown_values.contains(v)) {
            return Err(ConfigError::invalid(
                "unknown_values",
                format!("must be exactly {UNKNOWN_VALUES:?}"),
            ));
        }
        let empty = |path: &str, s: &str| {
            if s.is_empty() {
                Err(ConfigError::invalid(path, "empty string"))
            } else {
                Ok(())
            }
        };
        for v in &self.acc_values {
            empty("acc_values", v)?;
        }
        for v in &self.add_keys {
            empty("add_keys", v)?;
        }
        for v in &self.skip_values {
            empty("skip_values", v)?;
        }
        for v in &self.other_nonres_keys {
            empty("other_nonres_keys", v)?;
        }
        for (k, vs) in &self.skip_by_key {
            empty("skip_by_key", k)?;
            for v in vs {
                empty(&format!("skip_by_key.{k}"), v)?;
            }
        }
        for (name, map) in [("res_aux", &self.res_aux), ("nonres_aux", &self.nonres_aux)] {
            for (k, vs) in map {
                empty(name, k)?;
                for v in vs {
                    empty(&format!("{name}.{k}"), v)?;
                }
            }
        }
        for (k, vs) in &self.nonres_aux {
            if let Some(res) = self.res_aux.get(k) {
                if let Some(v) = vs.iter().find(|v| res.contains(v)) {
                    return Err(ConfigError::invalid(
                        format!("nonres_aux.{k}"),
                        format!("({k}, {v}) is also a residential auxiliary tag"),
                    ));
                }
            }
        }
        Ok(self)
    }

    /// Keys used to acquire data: `building`, `surface`, then `add_keys`.
    pub fn download_keys(&self) -> Vec<String> {
        let mut keys = vec!["building".to_string(), "surface".to_string()];
        keys.extend(
            self.add_keys
                .iter()
                .filter(|k| *k != "building" && *k != "surface")
                .cloned(),
        );
        keys
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule sets serialize")
    }
}
