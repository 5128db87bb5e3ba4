//! Run configuration: config-file values merged under command-line
//! flags, validated, and echoed into every output file.

use serde::{Deserialize, Serialize};

use enaqt_core::chain::{build_ramp, sample_disorder, ChainSpec};
use enaqt_core::optimizer::OptimizerConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Default nearest-neighbor gap of the full-bias ramp.
pub fn default_delta(n_sites: usize, half_bias: bool) -> f64 {
    let full = 1.0 / n_sites as f64;
    if half_bias {
        0.5 * full
    } else {
        full
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Ramp,
    Disorder,
    File,
}

/// File-loadable side of the configuration. Every field is optional so
/// flags can override; unknown keys are rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: Option<u32>,
    pub system: Option<SystemKind>,
    pub n_sites: Option<usize>,
    pub delta: Option<f64>,
    pub offset: Option<f64>,
    pub half_bias: Option<bool>,
    pub alphas: Option<Vec<f64>>,
    pub gamma_l: Option<f64>,
    pub j_max: Option<f64>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub strict_paper_stopping: Option<bool>,
    pub chain_file: Option<String>,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_points: Option<usize>,
    pub realizations: Option<usize>,
    pub n_sweep: Option<bool>,
    pub sweep_sizes: Option<Vec<usize>>,
    pub trajectory: Option<bool>,
    pub optimizer: Option<OptimizerConfig>,
}

/// Fully resolved configuration, embedded into every output.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedConfig {
    pub schema_version: u32,
    pub command: String,
    pub system: SystemKind,
    pub n_sites: usize,
    pub delta: f64,
    pub offset: f64,
    pub half_bias: bool,
    pub alphas: Vec<f64>,
    pub gamma_l: f64,
    pub j_max: f64,
    pub seed: u64,
    pub starts: usize,
    pub strict_paper_stopping: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain_file: Option<String>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    pub realizations: usize,
    pub n_sweep: bool,
    pub sweep_sizes: Vec<usize>,
    pub trajectory: bool,
    pub optimizer: OptimizerConfig,
}

impl ResolvedConfig {
    pub fn header_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// CSV reproducibility header: one comment line with the full config.
    pub fn csv_header(&self) -> String {
        format!("# config: {}\n", self.header_json())
    }

    /// Construct the chain for one tunneling exponent.
    pub fn chain(&self, alpha: f64) -> Result<ChainSpec, enaqt_core::Error> {
        match self.system {
            SystemKind::Ramp => build_ramp(self.n_sites, self.delta, self.offset, alpha, self.j_max),
            SystemKind::Disorder => sample_disorder(self.n_sites, self.seed, 0, alpha, self.j_max),
            SystemKind::File => {
                let path = self.chain_file.as_deref().expect("validated");
                let text = std::fs::read_to_string(path).map_err(|e| {
                    enaqt_core::Error::InvalidArgument(format!("cannot read chain file {path}: {e}"))
                })?;
                let spec: ChainSpec = serde_json::from_str(&text).map_err(|e| {
                    enaqt_core::Error::InvalidArgument(format!("invalid chain file {path}: {e}"))
                })?;
                spec.validate()?;
                Ok(spec)
            }
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.system == SystemKind::File && self.chain_file.is_none() {
            return Err("--system file requires --chain-file".into());
        }
        if self.alphas.is_empty() {
            return Err("at least one alpha is required".into());
        }
        if self.n_sites < 2 {
            return Err(format!("n_sites must be >= 2, got {}", self.n_sites));
        }
        if !(self.delta > 0.0) {
            return Err(format!("delta must be > 0, got {}", self.delta));
        }
        if !(self.gamma_l >= 0.0) || !(self.j_max > 0.0) {
            return Err("gamma_l must be >= 0 and j_max > 0".into());
        }
        if self.grid_points < 2 || !(self.grid_lo > 0.0) || self.grid_hi <= self.grid_lo {
            return Err("scan grid needs 0 < lo < hi and at least 2 points".into());
        }
        if self.realizations == 0 {
            return Err("realizations must be >= 1".into());
        }
        if self.starts == 0 {
            return Err("starts must be >= 1".into());
        }
        if self.sweep_sizes.is_empty() || self.sweep_sizes.iter().any(|n| *n < 2) {
            return Err("sweep sizes must all be >= 2".into());
        }
        self.optimizer.validate().map_err(|e| e.to_string())
    }
}
