//! Run configuration (TOML).
//!
//! ```toml
//! target_rate = 48000
//! parallelism = 4
//!
//! [[measures]]
//! name = "fwsnrseg"
//!
//! [[measures]]
//! name = "sdr"
//! params = { taps = 512 }
//!
//! [[measures]]
//! name = "si-sa2f"
//! two_f = { params_file = "2f.txt", mov_sidecar = "movs.csv" }
//!
//! [[measures]]
//! name = "pesq"
//!
//! [[adapters]]
//! name = "pesq"
//! executable = "pesq-wrapper"
//! args = ["{ref}", "{test}"]
//! pattern = 'MOS-LQO:\s*(\S+)'
//! timeout_secs = 60
//! required_rate = 16000
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use aqm_core::bss::BssEvalParams;
use aqm_core::models::{
    AdapterConfig, BssMeasure, BssRatioKind, DllrMeasure, ExternalAdapter, FwSnrSegMeasure, Measure, MovProvider,
    MovSidecar, MovTool, MovToolConfig, Registry, SaWrapped, TwoFMeasure, TwoFParams,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Rate the built-in measures run at.
    #[serde(default = "default_rate")]
    pub target_rate: u32,
    /// Worker threads for item-level parallelism; defaults to the CPU count.
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Seed for generated fixtures only; measurement is deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
    pub measures: Vec<MeasureSpec>,
    #[serde(default)]
    pub adapters: Vec<AdapterConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_rate() -> u32 {
    48000
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub results: Option<PathBuf>,
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub name: String,
    /// Overrides of the measure's parameters.
    #[serde(default)]
    pub params: toml::Table,
    /// Required by `2f`, `si-sa2f` and `sa-2f`.
    #[serde(default)]
    pub two_f: Option<TwoFSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoFSpec {
    pub params_file: PathBuf,
    /// CSV keyed by `<test_id>/<item_id>/<condition_id>`.
    #[serde(default)]
    pub mov_sidecar: Option<PathBuf>,
    #[serde(default)]
    pub mov_tool: Option<MovToolConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut c = Self::from_toml(&text).with_context(|| format!("{}", path.display()))?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text).map_err(|e| anyhow!("{e}"))?;
        if c.target_rate == 0 {
            bail!("target_rate must be positive");
        }
        if c.parallelism == Some(0) {
            bail!("parallelism must be at least 1");
        }
        if c.measures.is_empty() {
            bail!("no measures configured");
        }
        Ok(c)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    /// Builds the configured measures in configuration order.
    pub fn build_measures(&self) -> Result<Vec<Arc<dyn Measure>>> {
        let mut registry = Registry::new();
        let mut out = Vec::new();
        for spec in &self.measures {
            let m = self.build(spec, &spec.name).with_context(|| format!("measure {:?}", spec.name))?;
            registry.register(m.clone()).map_err(|e| anyhow!("{e}"))?;
            out.push(m);
        }
        Ok(out)
    }

    fn build(&self, spec: &MeasureSpec, name: &str) -> Result<Arc<dyn Measure>> {
        let rate = self.target_rate;
        let bss = |kind| -> Result<Arc<dyn Measure>> {
            Ok(Arc::new(BssMeasure::new(kind, Some(params::<BssEvalParams>(&spec.params)?), rate)))
        };
        let si = |kind| -> Result<Arc<dyn Measure>> {
            no_params(spec)?;
            Ok(Arc::new(BssMeasure::new(kind, None, rate)))
        };
        Ok(match name {
            "fwsnrseg" => Arc::new(FwSnrSegMeasure::new(params(&spec.params)?, rate).map_err(|e| anyhow!("{e}"))?),
            "dllr" => Arc::new(DllrMeasure::new(params(&spec.params)?, rate)),
            "sdr" => bss(BssRatioKind::Sdr)?,
            "sir" => bss(BssRatioKind::Sir)?,
            "sar" => bss(BssRatioKind::Sar)?,
            "si-sdr" => si(BssRatioKind::Sdr)?,
            "si-sir" => si(BssRatioKind::Sir)?,
            "si-sar" => si(BssRatioKind::Sar)?,
            "2f" => self.two_f(spec)?,
            "si-sa2f" => Arc::new(SaWrapped::new(name, self.two_f(spec)?)),
            _ if name.starts_with("sa-") => Arc::new(SaWrapped::new(name, self.build(spec, &name[3..])?)),
            _ => {
                let cfg = self
                    .adapters
                    .iter()
                    .find(|a| a.name == name)
                    .ok_or_else(|| anyhow!("unknown measure; not built in and no adapter of that name"))?;
                no_params(spec)?;
                Arc::new(ExternalAdapter::new(cfg.clone()).map_err(|e| anyhow!("{e}"))?)
            }
        })
    }

    fn two_f(&self, spec: &MeasureSpec) -> Result<Arc<dyn Measure>> {
        let tf = spec
            .two_f
            .as_ref()
            .ok_or_else(|| anyhow!("needs a `two_f` table with params_file and a MOV source"))?;
        let params = TwoFParams::load(&self.resolve(&tf.params_file)).map_err(|e| anyhow!("{e}"))?;
        let provider: Box<dyn MovProvider> = match (&tf.mov_sidecar, &tf.mov_tool) {
            (Some(p), None) => Box::new(MovSidecar::load(&self.resolve(p)).map_err(|e| anyhow!("{}: {e}", p.display()))?),
            (None, Some(t)) => Box::new(MovTool::new(t.clone()).map_err(|e| anyhow!("{e}"))?),
            _ => bail!("set exactly one of mov_sidecar and mov_tool"),
        };
        Ok(Arc::new(TwoFMeasure::new(params, provider)))
    }
}

fn params<T: DeserializeOwned>(table: &toml::Table) -> Result<T> {
    toml::Value::Table(table.clone())
        .try_into()
        .map_err(|e| anyhow!("bad params: {e}"))
}

fn no_params(spec: &MeasureSpec) -> Result<()> {
    if !spec.params.is_empty() {
        bail!("takes no params");
    }
    Ok(())
}
