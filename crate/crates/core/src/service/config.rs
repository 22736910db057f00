use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::fetcher::FetchOptions;
use crate::pipeline::validate_service_base;

pub const ENV_LISTEN: &str = "CLEARLENS_LISTEN";
pub const ENV_PUBLIC_BASE: &str = "CLEARLENS_PUBLIC_BASE";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config file {path} is not valid: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Service settings, read from a TOML file.
///
/// ```toml
/// listen_address = "0.0.0.0:8080"
/// public_base = "https://clearlens.example.org"
/// default_preset = "large-print"
/// max_concurrent_transforms = 16
///
/// [fetch]
/// timeout_ms = 10000
/// ```
///
/// Precedence is environment, then file, then defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub listen_address: String,
    /// External URL of the service; rewritten links point here.
    pub public_base: String,
    pub default_preset: String,
    pub fetch: FetchOptions,
    pub max_concurrent_transforms: usize,
    /// Replaces the built-in preset catalog.
    pub presets_file: Option<PathBuf>,
    /// Built landing page assets, served under `/assets/`.
    pub assets_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            listen_address: "127.0.0.1:8080".into(),
            public_base: "http://127.0.0.1:8080".into(),
            default_preset: "default".into(),
            fetch: FetchOptions::default(),
            max_concurrent_transforms: 8,
            presets_file: None,
            assets_dir: None,
        }
    }
}

impl ServiceConfig {
    /// Reads `path` (or starts from defaults), applies the process
    /// environment and validates.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        Self::load_with_env(path, |k| std::env::var(k).ok())
    }

    pub fn load_with_env(
        path: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(path) => Self::from_file(path)?,
            None => ServiceConfig::default(),
        };
        if let Some(v) = env(ENV_LISTEN) {
            cfg.listen_address = v;
        }
        if let Some(v) = env(ENV_PUBLIC_BASE) {
            cfg.public_base = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file. Relative paths inside it are taken relative
    /// to the file's directory.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: ServiceConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.presets_file, &mut cfg.assets_dir].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let port_ok = self
            .listen_address
            .rsplit_once(':')
            .is_some_and(|(host, port)| !host.is_empty() && port.parse::<u16>().is_ok());
        if !port_ok {
            return invalid(format!(
                "listen_address {:?} is not host:port",
                self.listen_address
            ));
        }
        if let Err(e) = validate_service_base(&self.public_base) {
            return invalid(e.to_string());
        }
        if self.max_concurrent_transforms == 0 {
            return invalid("max_concurrent_transforms must be at least 1".into());
        }
        if let Err(e) = self.fetch.validate() {
            return invalid(e.to_string());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn defaults_are_valid() {
        let cfg = ServiceConfig::load_with_env(None, no_env).unwrap();
        assert_eq!(cfg, ServiceConfig::default());
    }

    #[test]
    fn env_beats_file_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clearlens.toml");
        std::fs::write(
            &path,
            "listen_address = \"0.0.0.0:9000\"\npublic_base = \"http://file:9000\"\npresets_file = \"p.toml\"\n[fetch]\ntimeout_ms = 500\n",
        )
        .unwrap();
        let cfg = ServiceConfig::load_with_env(Some(&path), no_env).unwrap();
        assert_eq!(cfg.listen_address, "0.0.0.0:9000");
        assert_eq!(cfg.public_base, "http://file:9000");
        assert_eq!(cfg.fetch.timeout_ms, 500);
        assert_eq!(cfg.fetch.max_redirects, FetchOptions::default().max_redirects);
        assert_eq!(cfg.default_preset, "default");
        assert_eq!(cfg.presets_file.as_deref(), Some(dir.path().join("p.toml").as_path()));

        let cfg = ServiceConfig::load_with_env(Some(&path), |k| {
            (k == ENV_PUBLIC_BASE).then(|| "https://env.example".to_string())
        })
        .unwrap();
        assert_eq!(cfg.public_base, "https://env.example");
        assert_eq!(cfg.listen_address, "0.0.0.0:9000");
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |f: fn(&mut ServiceConfig)| {
            let mut c = ServiceConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.max_concurrent_transforms = 0));
        assert!(bad(|c| c.public_base = "localhost".into()));
        assert!(bad(|c| c.listen_address = "8080".into()));
        assert!(bad(|c| c.fetch.timeout_ms = 0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "listen = \"x\"").unwrap();
        assert!(matches!(
            ServiceConfig::from_file(&path),
            Err(ConfigError::Parse { .. })
        ));
    }
}
