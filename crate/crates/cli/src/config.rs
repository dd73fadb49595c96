//! Flat `key = value` experiment configuration. Command-line flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use onebit_core::Method;
use serde::Deserialize;

/// A value given either once or as a list, e.g. `nx = 1000` or `nx = [1000, 3000]`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub rho: Option<f64>,
    pub r0: Option<f64>,
    pub d: Option<f64>,
    pub sigma: Option<f64>,
    pub nx: Option<OneOrMany<usize>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub lags: Option<usize>,
    pub method: Option<OneOrMany<String>>,
    pub nq: Option<usize>,
    pub nm: Option<usize>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn methods(&self) -> Result<Option<Vec<Method>>> {
        match &self.method {
            None => Ok(None),
            Some(m) => {
                let list = m.to_vec().iter().map(|s| s.parse::<Method>()).collect::<std::result::Result<Vec<_>, _>>()?;
                if list.is_empty() {
                    bail!("config 'method' list is empty");
                }
                Ok(Some(list))
            }
        }
    }
}

/// Pick the flag, then the config value, then the default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_scalars_and_lists() {
        let c = FileConfig::parse("n = 5\nnx = [1000, 3000]\nd = 0.3\nmethod = \"gauss_legendre\"\n").unwrap();
        assert_eq!(c.n, Some(5));
        assert_eq!(c.nx.as_ref().unwrap().to_vec(), vec![1000, 3000]);
        assert_eq!(c.methods().unwrap(), Some(vec![Method::GaussLegendre]));
    }

    #[test]
    fn rejects_unknown_keys_and_methods() {
        assert!(FileConfig::parse("colour = 3\n").is_err());
        let c = FileConfig::parse("method = [\"newton\"]\n").unwrap();
        assert!(c.methods().is_err());
    }

    #[test]
    fn flags_take_precedence() {
        assert_eq!(pick(Some(3), Some(4), 5), 3);
        assert_eq!(pick(None, Some(4), 5), 4);
        assert_eq!(pick(None::<i32>, None, 5), 5);
    }
}
