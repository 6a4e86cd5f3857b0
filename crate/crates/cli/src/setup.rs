//! Configuration resolution and provider construction.
//!
//! Precedence: command-line flags > environment variables > config file >
//! built-in defaults. The resolved view is what gets digested into run
//! reports.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use counselkit::provider::{
    ChatProvider, EmbeddingProvider, HashEmbedder, HttpEmbeddingProvider, HttpProvider,
    MockProvider, MockScript, ProviderConfig, TemplateStore,
};

/// Global flags shared by every subcommand.
#[derive(Debug, clap::Args)]
pub struct GlobalArgs {
    /// Provider config file (JSON).
    #[arg(long, global = true, env = "COUNSELKIT_CONFIG")]
    pub config: Option<PathBuf>,

    /// Mock-provider script file; takes precedence over the HTTP provider.
    #[arg(long, global = true)]
    pub mock: Option<PathBuf>,

    /// Chat endpoint URL (overrides config file).
    #[arg(long, global = true, env = "PROVIDER_ENDPOINT_URL")]
    pub endpoint_url: Option<String>,

    /// Provider model id (overrides config file).
    #[arg(long, global = true, env = "PROVIDER_MODEL_ID")]
    pub model_id: Option<String>,

    /// Template directory (layout: <dir>/<stage>/<version>.txt).
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,

    /// Where to write the machine-readable run report.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
}

impl GlobalArgs {
    /// Provider settings after applying the precedence chain.
    pub fn resolve_provider(&self) -> Result<ProviderConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config file {}", path.display()))?;
                serde_json::from_str::<ProviderConfig>(&text)
                    .with_context(|| format!("invalid config file {}", path.display()))?
            }
            None => ProviderConfig::default(),
        };
        if let Some(endpoint) = &self.endpoint_url {
            config.endpoint_url = endpoint.clone();
        }
        if let Some(model) = &self.model_id {
            config.model_id = model.clone();
        }
        Ok(config)
    }

    /// Chat provider: the mock script when given, the HTTP provider otherwise.
    pub fn build_provider(&self) -> Result<Arc<dyn ChatProvider>> {
        if let Some(script_path) = &self.mock {
            let script = MockScript::from_file(script_path)?;
            return Ok(Arc::new(MockProvider::new(script)));
        }
        let config = self.resolve_provider()?;
        let provider = HttpProvider::from_config(config)
            .context("configure a provider (--config / --endpoint-url) or pass --mock")?;
        Ok(Arc::new(provider))
    }

    pub fn template_store(&self) -> TemplateStore {
        match &self.templates {
            Some(root) => TemplateStore::with_root(root),
            None => TemplateStore::builtin(),
        }
    }
}

/// Embedder selection for `eval-auto`.
pub fn build_embedder(kind: &str, globals: &GlobalArgs) -> Result<Box<dyn EmbeddingProvider>> {
    match kind {
        "mock" => Ok(Box::new(HashEmbedder::default())),
        "endpoint" => {
            let config = globals.resolve_provider()?;
            Ok(Box::new(HttpEmbeddingProvider::from_config(config)?))
        }
        other => anyhow::bail!("unknown embedder `{other}` (expected mock or endpoint)"),
    }
}

/// Hex SHA-256 of a serializable configuration view.
pub fn digest_of<T: Serialize>(value: &T) -> Result<String> {
    let canonical = serde_json::to_string(value)?;
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Machine-readable per-run report.
#[derive(Debug, Serialize)]
pub struct RunReportFile {
    pub command: String,
    pub config_digest: String,
    pub status: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl RunReportFile {
    pub fn ok(command: &str, config_digest: String) -> Self {
        RunReportFile {
            command: command.to_string(),
            config_digest,
            status: "ok".to_string(),
            outputs: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    pub fn with_output(mut self, path: &Path) -> Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)
            .with_context(|| format!("cannot write report {}", path.display()))?;
        Ok(())
    }

    /// Writes to the explicit report path, or to the default when given.
    pub fn write_to(&self, explicit: Option<&Path>, default: Option<&Path>) -> Result<()> {
        if let Some(path) = explicit.or(default) {
            self.write(path)?;
        }
        Ok(())
    }
}
