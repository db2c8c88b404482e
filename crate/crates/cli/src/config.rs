//! Runtime limits and output format. Values are layered: built-in defaults, then an optional
//! JSON config file, then `LAURENT_RITT_MAX_DEGREE`, then command-line flags.

use std::path::Path;

use laurent_ritt::Limits;
use serde::{Deserialize, Serialize};

pub const MAX_DEGREE_ENV: &str = "LAURENT_RITT_MAX_DEGREE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub max_degree: u64,
    pub max_conductor: u32,
    pub max_frontier: usize,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_degree: 64,
            max_conductor: 240,
            max_frontier: 10_000,
            format: Format::Json,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("configuration error: {0}")]
pub struct ConfigError(pub String);

/// Command-line overrides; `None` keeps the layered value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub max_degree: Option<u64>,
    pub max_conductor: Option<u32>,
    pub max_frontier: Option<usize>,
    pub format: Option<Format>,
}

impl Config {
    pub fn load(
        file: Option<&Path>,
        env_max_degree: Option<&str>,
        o: &Overrides,
    ) -> Result<Self, ConfigError> {
        let mut c = match file {
            None => Config::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?
            }
        };
        if let Some(v) = env_max_degree {
            c.max_degree = v
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("{MAX_DEGREE_ENV}={v:?} is not an integer")))?;
        }
        c.max_degree = o.max_degree.unwrap_or(c.max_degree);
        c.max_conductor = o.max_conductor.unwrap_or(c.max_conductor);
        c.max_frontier = o.max_frontier.unwrap_or(c.max_frontier);
        c.format = o.format.unwrap_or(c.format);
        if c.max_degree == 0 || c.max_conductor == 0 || c.max_frontier == 0 {
            return Err(ConfigError("limits must be positive".into()));
        }
        Ok(c)
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_degree: self.max_degree,
            max_conductor: self.max_conductor,
            max_frontier: self.max_frontier,
            ..Limits::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn layering_order() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"max_degree": 30, "max_conductor": 60, "format": "text"}}"#
        )
        .unwrap();
        let c = Config::load(Some(f.path()), None, &Overrides::default()).unwrap();
        assert_eq!(
            (c.max_degree, c.max_conductor, c.max_frontier, c.format),
            (30, 60, 10_000, Format::Text)
        );
        let c = Config::load(Some(f.path()), Some("40"), &Overrides::default()).unwrap();
        assert_eq!(c.max_degree, 40);
        let o = Overrides {
            max_degree: Some(50),
            format: Some(Format::Json),
            ..Default::default()
        };
        let c = Config::load(Some(f.path()), Some("40"), &o).unwrap();
        assert_eq!((c.max_degree, c.format), (50, Format::Json));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::load(None, Some("lots"), &Overrides::default()).is_err());
        let o = Overrides {
            max_frontier: Some(0),
            ..Default::default()
        };
        assert!(Config::load(None, None, &o).is_err());
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, r#"{{"max_degre": 30}}"#).unwrap();
        assert!(Config::load(Some(f.path()), None, &Overrides::default()).is_err());
    }
}
