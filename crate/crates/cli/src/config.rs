//! Run configuration: defaults, preset, TOML file and flag overrides.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use spikedx_core::dataset::SyntheticSpec;
use spikedx_core::evaluation::{ExperimentConfig, PipelineConfig, SelectionConfig, TrainingConfig, PIPELINE_PRESETS};
use spikedx_core::gsn::GsnConfig;
use spikedx_core::spike_codec::EncoderConfig;
use spikedx_core::wta_network::NetworkConfig;

/// Parameters of the built-in synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub majority: usize,
    pub minority: usize,
    pub features: usize,
    /// Leading columns that carry the class signal; 0 means every column.
    pub informative: usize,
    pub separation: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            majority: 300,
            minority: 20,
            features: 11,
            informative: 0,
            separation: 2.0,
        }
    }
}

impl SyntheticConfig {
    pub fn spec(&self) -> SyntheticSpec {
        let spec = SyntheticSpec::new(self.majority, self.minority, self.features, self.separation);
        if self.informative == 0 {
            spec
        } else {
            spec.with_informative(self.informative)
        }
    }

    pub fn informative_columns(&self) -> usize {
        if self.informative == 0 {
            self.features
        } else {
            self.informative
        }
    }
}

/// Every tunable of a run. Serialized next to each command's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub selection: SelectionConfig,
    pub synthetic: SyntheticConfig,
    pub gsn: GsnConfig,
    pub encoder: EncoderConfig,
    pub network: NetworkConfig,
    pub training: TrainingConfig,
    pub experiment: ExperimentConfig,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self> {
        let p = PipelineConfig::preset(name).ok_or_else(|| {
            anyhow!(
                "unknown preset {name:?} (expected one of {})",
                PIPELINE_PRESETS.join(", ")
            )
        })?;
        Ok(Self::from_pipeline(p))
    }

    fn from_pipeline(p: PipelineConfig) -> Self {
        Self {
            selection: p.selection,
            synthetic: SyntheticConfig::default(),
            gsn: p.gsn,
            encoder: p.encoder,
            network: p.network,
            training: p.training,
            experiment: p.experiment,
        }
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            selection: self.selection.clone(),
            gsn: self.gsn.clone(),
            encoder: self.encoder.clone(),
            network: self.network.clone(),
            training: self.training.clone(),
            experiment: self.experiment.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

/// Shape of a config file: the run sections plus an optional preset name.
/// Parsing the raw text against it reports unknown keys with line numbers.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct FileShape {
    preset: Option<String>,
    selection: Option<SelectionConfig>,
    synthetic: Option<SyntheticConfig>,
    gsn: Option<GsnConfig>,
    encoder: Option<EncoderConfig>,
    network: Option<NetworkConfig>,
    training: Option<TrainingConfig>,
    experiment: Option<ExperimentConfig>,
}

/// One `section.key = value` override.
#[derive(Debug, Clone)]
pub struct Override {
    pub key: String,
    pub value: toml::Value,
}

impl Override {
    pub fn new(key: &str, value: toml::Value) -> Self {
        Self {
            key: key.to_string(),
            value,
        }
    }

    /// Parse `section.key=value`; the value is read as TOML and falls back
    /// to a bare string.
    pub fn parse(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects section.key=value, got {s:?}"))?;
        let key = key.trim();
        if key.is_empty() {
            bail!("--set {s:?} has an empty key");
        }
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));
        Ok(Self::new(key, value))
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table) {
    for (k, v) in overlay {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn apply(table: &mut toml::Table, o: &Override) -> Result<()> {
    let mut parts: Vec<&str> = o.key.split('.').collect();
    let last = parts.pop().expect("split yields one part");
    let mut node = table;
    for p in parts {
        node = match node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        {
            toml::Value::Table(t) => t,
            _ => bail!("override {:?}: {p:?} is not a section", o.key),
        };
    }
    node.insert(last.to_string(), o.value.clone());
    Ok(())
}

/// Resolve the configuration of one invocation.
pub fn resolve(
    preset: Option<&str>,
    file: Option<&Path>,
    overrides: &[Override],
) -> Result<(RunConfig, Option<String>)> {
    let mut file_table = match file {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).with_context(|| format!("{}: cannot read config", path.display()))?;
            if let Err(e) = toml::from_str::<FileShape>(&text) {
                bail!("{}: {e}", path.display());
            }
            toml::from_str::<toml::Table>(&text).with_context(|| format!("{}: invalid TOML", path.display()))?
        }
        None => toml::Table::new(),
    };
    let file_preset = match file_table.remove("preset") {
        Some(toml::Value::String(s)) => Some(s),
        Some(other) => bail!("preset must be a string, found {other}"),
        None => None,
    };
    let preset = preset.map(str::to_string).or(file_preset);
    let base = match &preset {
        Some(name) => RunConfig::preset(name)?,
        None => RunConfig::default(),
    };
    let mut table = toml::Table::try_from(&base).expect("run config serializes");
    merge(&mut table, file_table);
    for o in overrides {
        apply(&mut table, o)?;
    }
    let where_ = file.map(|p| format!("{}: ", p.display())).unwrap_or_default();
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| anyhow!("{where_}{}", e.message()))?;
    Ok((cfg, preset))
}

const SECTION_NOTES: [(&str, &str); 7] = [
    (
        "selection",
        "variance filter threshold and number of mRMR-ranked features kept",
    ),
    (
        "synthetic",
        "built-in dataset used with --synthetic (informative = 0 means every column)",
    ),
    (
        "gsn",
        "image size, glyph size range, SOM grid and training, layout source (per-fold | global)",
    ),
    ("encoder", "Poisson rate coding of image pixels"),
    (
        "network",
        "WTA topology, STDP constants, cycle trigger and top-down modulation",
    ),
    ("training", "network epochs and the online logistic readout"),
    (
        "experiment",
        "folds, class-ratio grid, decoders, bias, ablation and k-sweep settings",
    ),
];

/// Help text listing the given sections with their default keys.
pub fn config_help(sections: &[&str]) -> String {
    let table = toml::Table::try_from(RunConfig::default()).expect("run config serializes");
    let mut out = String::from(
        "Configuration (TOML, unknown keys rejected). Precedence: defaults < --preset < --config < --set < flags.\n\
         Keys read by this command, with defaults:\n",
    );
    for name in sections {
        let note = SECTION_NOTES
            .iter()
            .find(|(s, _)| s == name)
            .map(|(_, n)| *n)
            .unwrap_or("");
        out.push_str(&format!("\n[{name}]  # {note}\n"));
        if let Some(section) = table.get(*name) {
            let mut wrapped = toml::Table::new();
            wrapped.insert(name.to_string(), section.clone());
            let text = toml::to_string(&wrapped).expect("table serializes");
            for line in text
                .lines()
                .filter(|l| !l.starts_with(&format!("[{name}]")) && !l.is_empty())
            {
                out.push_str("  ");
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}
