//! Layered configuration: command-line flags over `ANALOGON_*` environment
//! variables over a TOML file.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub const ENV_PREFIX: &str = "ANALOGON_";
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_HOST: &str = "127.0.0.1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{var}: {message}")]
    Env { var: String, message: String },
    #[error("missing required setting `{0}` (flag, {ENV_PREFIX}* variable or config file)")]
    Missing(&'static str),
    #[error("{name} does not exist: {path}")]
    NoSuchFile { name: &'static str, path: PathBuf },
    #[error("port must be in 1..=65535, got {0}")]
    Port(i64),
    #[error("k_default must be at least 1")]
    ZeroK,
}

/// One layer of settings. Unset fields defer to lower layers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub corpus_path: Option<PathBuf>,
    pub kb_primary_path: Option<PathBuf>,
    pub kb_fallback_path: Option<PathBuf>,
    pub embeddings_path: Option<PathBuf>,
    pub purpmech_path: Option<PathBuf>,
    pub host: Option<String>,
    pub port: Option<i64>,
    pub k_default: Option<usize>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        let mut s: Settings =
            toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        // relative paths in the file are relative to the file itself
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut s.corpus_path,
            &mut s.kb_primary_path,
            &mut s.kb_fallback_path,
            &mut s.embeddings_path,
            &mut s.purpmech_path,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }

    /// Reads `ANALOGON_*` variables from the given pairs.
    pub fn from_env<I, K, V>(vars: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        let mut s = Settings::default();
        for (key, value) in vars {
            let Some(name) = key.as_ref().strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let value: String = value.into();
            let bad = |message: String| ConfigError::Env { var: key.as_ref().to_string(), message };
            match name {
                "CORPUS" => s.corpus_path = Some(value.into()),
                "KB" => s.kb_primary_path = Some(value.into()),
                "KB_FALLBACK" => s.kb_fallback_path = Some(value.into()),
                "EMBEDDINGS" => s.embeddings_path = Some(value.into()),
                "PURPMECH" => s.purpmech_path = Some(value.into()),
                "HOST" => s.host = Some(value),
                "PORT" => s.port = Some(value.trim().parse().map_err(|e| bad(format!("{e}")))?),
                "K" | "K_DEFAULT" => s.k_default = Some(value.trim().parse().map_err(|e| bad(format!("{e}")))?),
                _ => {}
            }
        }
        Ok(s)
    }

    /// Fills unset fields from `lower`.
    pub fn or(self, lower: Settings) -> Settings {
        Settings {
            corpus_path: self.corpus_path.or(lower.corpus_path),
            kb_primary_path: self.kb_primary_path.or(lower.kb_primary_path),
            kb_fallback_path: self.kb_fallback_path.or(lower.kb_fallback_path),
            embeddings_path: self.embeddings_path.or(lower.embeddings_path),
            purpmech_path: self.purpmech_path.or(lower.purpmech_path),
            host: self.host.or(lower.host),
            port: self.port.or(lower.port),
            k_default: self.k_default.or(lower.k_default),
        }
    }

    /// Flags, then the process environment, then the optional file.
    pub fn layered(flags: Settings, config_file: Option<&Path>) -> Result<Settings, ConfigError> {
        let env = Settings::from_env(std::env::vars())?;
        let file = match config_file {
            Some(p) => Settings::from_toml_file(p)?,
            None => Settings::default(),
        };
        Ok(flags.or(env).or(file))
    }

    pub fn require_corpus(&self) -> Result<&Path, ConfigError> {
        existing("corpus_path", self.corpus_path.as_deref())
    }

    pub fn require_kb(&self) -> Result<&Path, ConfigError> {
        existing("kb_primary_path", self.kb_primary_path.as_deref())
    }

    pub fn require_embeddings(&self) -> Result<&Path, ConfigError> {
        existing("embeddings_path", self.embeddings_path.as_deref())
    }

    pub fn kb_fallback(&self) -> Result<Option<&Path>, ConfigError> {
        optional("kb_fallback_path", self.kb_fallback_path.as_deref())
    }

    pub fn purpmech(&self) -> Result<Option<&Path>, ConfigError> {
        optional("purpmech_path", self.purpmech_path.as_deref())
    }

    pub fn k_or_default(&self) -> Result<usize, ConfigError> {
        match self.k_default {
            Some(0) => Err(ConfigError::ZeroK),
            Some(k) => Ok(k),
            None => Ok(analogon_core::search::DEFAULT_K),
        }
    }
}

fn existing<'a>(name: &'static str, path: Option<&'a Path>) -> Result<&'a Path, ConfigError> {
    let path = path.ok_or(ConfigError::Missing(name))?;
    optional(name, Some(path)).map(|p| p.expect("present"))
}

fn optional<'a>(name: &'static str, path: Option<&'a Path>) -> Result<Option<&'a Path>, ConfigError> {
    match path {
        Some(p) if !p.exists() => Err(ConfigError::NoSuchFile { name, path: p.to_path_buf() }),
        other => Ok(other),
    }
}

/// Fully resolved and validated service settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServerConfig {
    pub corpus_path: PathBuf,
    pub kb_primary_path: PathBuf,
    pub kb_fallback_path: Option<PathBuf>,
    pub embeddings_path: PathBuf,
    pub purpmech_path: Option<PathBuf>,
    pub host: String,
    pub port: u16,
    pub k_default: usize,
}

impl TryFrom<Settings> for ServerConfig {
    type Error = ConfigError;

    fn try_from(s: Settings) -> Result<Self, ConfigError> {
        let port = s.port.unwrap_or(i64::from(DEFAULT_PORT));
        let port = u16::try_from(port).ok().filter(|&p| p != 0).ok_or(ConfigError::Port(port))?;
        Ok(ServerConfig {
            corpus_path: s.require_corpus()?.to_path_buf(),
            kb_primary_path: s.require_kb()?.to_path_buf(),
            kb_fallback_path: s.kb_fallback()?.map(Path::to_path_buf),
            embeddings_path: s.require_embeddings()?.to_path_buf(),
            purpmech_path: s.purpmech()?.map(Path::to_path_buf),
            host: s.host.clone().unwrap_or_else(|| DEFAULT_HOST.to_string()),
            port,
            k_default: s.k_or_default()?,
        })
    }
}
