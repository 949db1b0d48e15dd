//! Flat `key = value` run configuration.

use std::path::{Path, PathBuf};

use vdg_core::statespace::DEFAULT_STATE_CAP;
use vdg_core::GameParams;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: GameParams,
    pub out_dir: PathBuf,
    pub state_cap: u64,
    /// Worker thread hint; results never depend on it.
    pub threads: Option<usize>,
    pub properties: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: GameParams::default(),
            out_dir: PathBuf::from("."),
            state_cap: DEFAULT_STATE_CAP,
            threads: None,
            properties: Vec::new(),
        }
    }
}

pub const KEYS: [&str; 12] = [
    "n",
    "k_max",
    "r_init",
    "r_needed",
    "r_max",
    "f",
    "decay_slope",
    "fractions",
    "out_dir",
    "state_cap",
    "threads",
    "property",
];

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parses config text. Later assignments override earlier ones, except `property`, which
    /// accumulates.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", i + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |what: &str| bad(format!("{key}: `{value}` is not {what}"));
            let p = &mut cfg.params;
            match key {
                "n" => p.n = value.parse().map_err(|_| num("a player count"))?,
                "k_max" => p.k_max = value.parse().map_err(|_| num("a round count"))?,
                "r_init" => p.r_init = value.parse().map_err(|_| num("a non-negative integer"))?,
                "r_needed" => {
                    p.r_needed = value.parse().map_err(|_| num("a non-negative integer"))?
                }
                "r_max" => p.r_max = value.parse().map_err(|_| num("a non-negative integer"))?,
                "f" => p.f = value.parse().map_err(|_| num("a number"))?,
                "decay_slope" => p.decay_slope = value.parse().map_err(|_| num("a number"))?,
                "fractions" => {
                    p.fractions = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| num("a comma-separated list of numbers"))?
                }
                "out_dir" => cfg.out_dir = PathBuf::from(value),
                "state_cap" => cfg.state_cap = value.parse().map_err(|_| num("an integer"))?,
                "threads" => cfg.threads = Some(value.parse().map_err(|_| num("a thread count"))?),
                "property" => cfg.properties.push(value.to_string()),
                other => {
                    return Err(bad(format!(
                        "unknown key `{other}` (known keys: {})",
                        KEYS.join(", ")
                    )))
                }
            }
        }
        cfg.params
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::parse(
            "# comment\nk_max = 2\nfractions = 0, 1 # trailing\nproperty = a\nproperty = b\n",
        )
        .unwrap();
        assert_eq!(cfg.params.k_max, 2);
        assert_eq!(cfg.params.fractions, vec![0.0, 1.0]);
        assert_eq!(cfg.params.r_init, 100);
        assert_eq!(cfg.properties, vec!["a", "b"]);
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse("k_max = 2\nrinit = 5\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`rinit`") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn bad_values() {
        assert!(RunConfig::parse("n = three").is_err());
        assert!(RunConfig::parse("fractions = 0, x").is_err());
        assert!(RunConfig::parse("just words").is_err());
        assert!(RunConfig::parse("n = 0").is_err());
    }
}
