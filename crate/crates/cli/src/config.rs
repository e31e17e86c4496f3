//! Experiment configuration files.
//!
//! A config is a JSON object whose keys are exactly the fields of [`ExperimentConfig`];
//! unknown keys are rejected so that typos surface as configuration errors.

use std::path::{Path, PathBuf};

use qramsim::channels::{make_channel, ChannelKind, KrausChannel};
use qramsim::circuits::{
    build_bb_circuit, build_fanout_circuit, build_hybrid_circuit, build_qrom_circuit, Circuit, CopyVariant, HybridSub,
    NoisePolicy, RouterLevels,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Largest address width a sweep accepts.
pub const MAX_SWEEP_WIDTH: usize = 12;
/// Largest samples-per-point a sweep accepts.
pub const MAX_SAMPLES: usize = 10_000_000;
/// Largest number of datasets per point.
pub const MAX_DATASETS: usize = 10_000;

/// Circuit family selected by the `variant` key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Fanout,
    Bb2,
    Bb3,
    Bb2Modified,
    Bb3Modified,
    Qrom,
    HybridFanout,
    HybridBb2,
    HybridBb3,
}

impl VariantName {
    pub const ALL: [VariantName; 9] = [
        VariantName::Fanout,
        VariantName::Bb2,
        VariantName::Bb3,
        VariantName::Bb2Modified,
        VariantName::Bb3Modified,
        VariantName::Qrom,
        VariantName::HybridFanout,
        VariantName::HybridBb2,
        VariantName::HybridBb3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantName::Fanout => "fanout",
            VariantName::Bb2 => "bb2",
            VariantName::Bb3 => "bb3",
            VariantName::Bb2Modified => "bb2_modified",
            VariantName::Bb3Modified => "bb3_modified",
            VariantName::Qrom => "qrom",
            VariantName::HybridFanout => "hybrid_fanout",
            VariantName::HybridBb2 => "hybrid_bb2",
            VariantName::HybridBb3 => "hybrid_bb3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, VariantName::HybridFanout | VariantName::HybridBb2 | VariantName::HybridBb3)
    }

    /// Wire dimension of the circuit family.
    pub fn dim(self) -> u8 {
        match self {
            VariantName::Bb3 | VariantName::Bb3Modified | VariantName::HybridBb3 => 3,
            _ => 2,
        }
    }

    /// Builds the circuit for address width `n`.
    ///
    /// `big_m` is the hybrid iteration count and is ignored by other families.
    pub fn build(self, n: usize, big_m: usize, copy: Option<CopyVariant>) -> Result<Circuit, CliError> {
        let bb = |levels: RouterLevels, modified: bool| {
            let default = match levels {
                RouterLevels::Two => CopyVariant::PlusZ,
                RouterLevels::Three => CopyVariant::ZeroXTilde,
            };
            build_bb_circuit(n, levels, modified, copy.unwrap_or(default))
        };
        if self.is_hybrid() && !big_m.is_power_of_two() {
            return Err(CliError::Config(format!("M must be a power of two, got {big_m}")));
        }
        let hybrid = |sub: HybridSub| build_hybrid_circuit(n, big_m.trailing_zeros() as usize, sub);
        let plain_copy = |expected: CopyVariant| match copy {
            Some(c) if c != expected => {
                Err(CliError::Config(format!("copy_variant {c:?} is not available for {}", self.as_str())))
            }
            _ => Ok(()),
        };
        let circuit = match self {
            VariantName::Fanout => {
                plain_copy(CopyVariant::PlusZ)?;
                build_fanout_circuit(n)
            }
            VariantName::Bb2 => bb(RouterLevels::Two, false),
            VariantName::Bb3 => bb(RouterLevels::Three, false),
            VariantName::Bb2Modified => bb(RouterLevels::Two, true),
            VariantName::Bb3Modified => bb(RouterLevels::Three, true),
            VariantName::Qrom => {
                plain_copy(CopyVariant::PlusZ)?;
                build_qrom_circuit(n)
            }
            VariantName::HybridFanout => {
                plain_copy(CopyVariant::PlusZ)?;
                hybrid(HybridSub::Fanout)
            }
            VariantName::HybridBb2 => {
                plain_copy(CopyVariant::PlusZ)?;
                hybrid(HybridSub::Bb2)
            }
            VariantName::HybridBb3 => {
                plain_copy(CopyVariant::ZeroXTilde)?;
                hybrid(HybridSub::Bb3)
            }
        };
        circuit.map_err(|e| CliError::Config(format!("cannot build {} at n = {n}: {e}", self.as_str())))
    }
}

/// Error channel acting on every noisy wire in every noise round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// Wire dimension; defaults to that of the variant and must match it when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u8>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: VariantName,
    /// Inclusive range of address widths `n = log2 N`.
    pub n_range: [usize; 2],
    /// Number of hybrid iterations (power of two, at most `2^n`); hybrids only.
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<usize>,
    pub channel: ChannelConfig,
    /// Trajectories per (n, dataset) point.
    pub samples: usize,
    /// Random datasets per address width.
    pub datasets: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub noise_policy: NoisePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copy_variant: Option<CopyVariant>,
    /// Worker threads; does not influence any result.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_workers() -> usize {
    1
}

/// Command-line and environment overrides, applied in that order of precedence.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Reads `QRAMSIM_WORKERS` and `QRAMSIM_OUT`; explicit flags take precedence.
    pub fn with_env(mut self) -> Result<Self, CliError> {
        if self.workers.is_none() {
            if let Ok(v) = std::env::var("QRAMSIM_WORKERS") {
                let w = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("QRAMSIM_WORKERS must be a positive integer, got {v:?}")))?;
                self.workers = Some(w);
            }
        }
        if self.out.is_none() {
            if let Some(v) = std::env::var_os("QRAMSIM_OUT") {
                self.out = Some(PathBuf::from(v));
            }
        }
        Ok(self)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, CliError> {
        if let Some(s) = o.seed {
            self.master_seed = s;
        }
        if let Some(w) = o.workers {
            self.workers = w;
        }
        if let Some(p) = &o.out {
            self.output = Some(p.clone());
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let [lo, hi] = self.n_range;
        if lo < 1 || lo > hi || hi > MAX_SWEEP_WIDTH {
            return bad(format!("n_range must satisfy 1 <= lo <= hi <= {MAX_SWEEP_WIDTH}, got [{lo}, {hi}]"));
        }
        if !(1..=MAX_SAMPLES).contains(&self.samples) {
            return bad(format!("samples must be in 1..={MAX_SAMPLES}, got {}", self.samples));
        }
        if !(1..=MAX_DATASETS).contains(&self.datasets) {
            return bad(format!("datasets must be in 1..={MAX_DATASETS}, got {}", self.datasets));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        let eps = self.channel.epsilon;
        if !(0.0..1.0).contains(&eps) {
            return bad(format!("channel epsilon must be in [0, 1), got {eps}"));
        }
        if self.channel.kind == ChannelKind::Custom {
            return bad("custom channels cannot be configured from a file".into());
        }
        let dim = self.variant.dim();
        if let Some(d) = self.channel.dim {
            if d != dim {
                return bad(format!("{} uses dimension-{dim} wires but the channel has dim {d}", self.variant.as_str()));
            }
        }
        match (self.variant.is_hybrid(), self.big_m) {
            (true, None) => return bad("hybrid variants need M".into()),
            (true, Some(m)) => {
                if !m.is_power_of_two() || m.trailing_zeros() as usize > lo {
                    return bad(format!("M must be a power of two no larger than 2^{lo}, got {m}"));
                }
            }
            (false, Some(_)) => return bad(format!("M is only meaningful for hybrid variants, not {}", self.variant.as_str())),
            (false, None) => {}
        }
        if self.variant == VariantName::Qrom && hi > 8 {
            return bad(format!("qrom supports n <= 8, got {hi}"));
        }
        if let Some(c) = self.copy_variant {
            self.variant.build(lo, self.big_m.unwrap_or(1), Some(c))?;
        }
        Ok(())
    }

    pub fn channel(&self) -> Result<KrausChannel, CliError> {
        make_channel(self.channel.kind, self.variant.dim(), self.channel.epsilon)
            .map_err(|e| CliError::Config(format!("invalid channel: {e}")))
    }

    pub fn circuit(&self, n: usize) -> Result<Circuit, CliError> {
        Ok(self.variant.build(n, self.big_m.unwrap_or(1), self.copy_variant)?.with_noise_policy(self.noise_policy))
    }

    pub fn widths(&self) -> std::ops::RangeInclusive<usize> {
        self.n_range[0]..=self.n_range[1]
    }

    /// SHA-256 of the canonical JSON of every result-relevant field (workers and
    /// output location excluded), as lowercase hex.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("workers");
            map.remove("output");
        }
        // serde_json maps are ordered by key, so this string is canonical.
        let canonical = serde_json::to_string(&v).expect("value serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
