//! Flat INI-style configuration: one `[scenario]` section of
//! `key = value` lines. Comments start with `#` or `;`.

use std::collections::BTreeMap;

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub scenario: String,
    pub values: BTreeMap<String, String>,
}

pub fn parse(text: &str) -> Result<ParsedConfig, ConfigError> {
    let mut scenario: Option<String> = None;
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let name = stripped.strip_suffix(']').ok_or(ConfigError {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            if scenario.is_some() {
                return Err(ConfigError {
                    line: line_no,
                    message: "only one [scenario] section is allowed".into(),
                });
            }
            scenario = Some(name.trim().to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError {
                line: line_no,
                message: "empty key".into(),
            });
        }
        if scenario.is_none() {
            return Err(ConfigError {
                line: line_no,
                message: "key appears before the [scenario] section".into(),
            });
        }
        if values.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let scenario = scenario.ok_or(ConfigError {
        line: 0,
        message: "missing [scenario] section".into(),
    })?;
    Ok(ParsedConfig { scenario, values })
}
