use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::adapter::{compile_pattern, extract_scalar, invoke_on_signals, ConcurrencyLimit, MovToolConfig};
use super::builtin::DEFAULT_RATE;
use super::measure::{ChannelPolicy, ItemContext, Measure, MeasureDescriptor, RequiredRate, Scale};
use crate::{AudioSignal, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingKind {
    /// `c0 + c_adb * ADB + c_mod * AvgModDiff1`, clamped to [0, 100].
    Affine,
    /// `100 / (1 + exp(-(c0 + c_adb * ADB + c_mod * AvgModDiff1)))`.
    Logistic,
}

/// Coefficients of the two-MOV mapping.
///
/// The text form has one `key = value` pair per line, `#` comments, and the
/// keys `mapping`, `intercept`, `adb` and `avg_mod_diff_1`, all required.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoFParams {
    pub mapping: MappingKind,
    pub intercept: f64,
    pub adb: f64,
    pub avg_mod_diff_1: f64,
}

impl TwoFParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
            .map_err(|e: Error| Error::InvalidParameter(format!("{}: {e}", path.display())))
    }
}

impl FromStr for TwoFParams {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut values: HashMap<&str, &str> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            if !matches!(k, "mapping" | "intercept" | "adb" | "avg_mod_diff_1") {
                return Err(Error::InvalidParameter(format!("line {}: unknown key {k:?}", n + 1)));
            }
            if values.insert(k, v.trim()).is_some() {
                return Err(Error::InvalidParameter(format!("line {}: duplicate key {k:?}", n + 1)));
            }
        }
        let get = |k: &str| {
            values
                .get(k)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("missing key {k:?}")))
        };
        let num = |k: &str| -> Result<f64> {
            let v = get(k)?;
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::InvalidParameter(format!("{k}: {v:?} is not a finite number"))),
            }
        };
        let mapping = match get("mapping")? {
            "affine" => MappingKind::Affine,
            "logistic" => MappingKind::Logistic,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "mapping must be affine or logistic, got {other:?}"
                )))
            }
        };
        Ok(Self {
            mapping,
            intercept: num("intercept")?,
            adb: num("adb")?,
            avg_mod_diff_1: num("avg_mod_diff_1")?,
        })
    }
}

/// Maps the two MOVs to a score in [0, 100]. Non-finite input gives `NaN`.
pub fn two_f_combine(adb: f64, avg_mod_diff_1: f64, params: &TwoFParams) -> f64 {
    if !adb.is_finite() || !avg_mod_diff_1.is_finite() {
        return f64::NAN;
    }
    let lin = params.intercept + params.adb * adb + params.avg_mod_diff_1 * avg_mod_diff_1;
    let score = match params.mapping {
        MappingKind::Affine => lin,
        MappingKind::Logistic => 100.0 / (1.0 + (-lin).exp()),
    };
    score.clamp(0.0, 100.0)
}

/// The two model output variables consumed by the combiner.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Movs {
    pub adb: f64,
    pub avg_mod_diff_1: f64,
}

/// Source of MOVs for a reference/test pair.
pub trait MovProvider: Send + Sync {
    fn movs(&self, reference: &AudioSignal, test: &AudioSignal, ctx: &ItemContext<'_>) -> Result<Movs>;

    /// Rate the signals are resampled to before [`MovProvider::movs`].
    fn required_rate(&self) -> RequiredRate {
        RequiredRate::Hz(DEFAULT_RATE)
    }
}

/// MOVs precomputed elsewhere, keyed by item id.
///
/// For the artifacts-only variant the sidecar must hold MOVs computed
/// against the `s_target + e_interf` reference.
#[derive(Debug, Clone, Default)]
pub struct MovSidecar {
    rows: HashMap<String, Movs>,
}

#[derive(Deserialize)]
struct SidecarRow {
    item_id: String,
    adb: f64,
    avg_mod_diff_1: f64,
}

impl MovSidecar {
    /// Reads a CSV with header `item_id,adb,avg_mod_diff_1`.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = csv.headers()?.clone();
        if header.iter().collect::<Vec<_>>() != ["item_id", "adb", "avg_mod_diff_1"] {
            return Err(Error::InvalidParameter(format!(
                "MOV sidecar header must be item_id,adb,avg_mod_diff_1, got {}",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = HashMap::new();
        for row in csv.deserialize() {
            let row: SidecarRow = row?;
            let movs = Movs {
                adb: row.adb,
                avg_mod_diff_1: row.avg_mod_diff_1,
            };
            if rows.insert(row.item_id.clone(), movs).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate item {:?} in MOV sidecar", row.item_id)));
            }
        }
        Ok(Self { rows })
    }

    pub fn insert(&mut self, item_id: impl Into<String>, movs: Movs) {
        self.rows.insert(item_id.into(), movs);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl MovProvider for MovSidecar {
    fn movs(&self, _: &AudioSignal, _: &AudioSignal, ctx: &ItemContext<'_>) -> Result<Movs> {
        let id = ctx
            .item_id
            .ok_or_else(|| Error::Measure("MOV sidecar lookup needs an item id".into()))?;
        self.rows
            .get(id)
            .copied()
            .ok_or_else(|| Error::Measure(format!("no MOVs for item {id:?}")))
    }
}

/// MOVs obtained by running an external tool on each pair.
pub struct MovTool {
    config: MovToolConfig,
    adb: Regex,
    avg_mod_diff_1: Regex,
    limit: Arc<ConcurrencyLimit>,
}

impl MovTool {
    pub fn new(config: MovToolConfig) -> Result<Self> {
        Ok(Self {
            adb: compile_pattern(&config.adb_pattern)?,
            avg_mod_diff_1: compile_pattern(&config.avg_mod_diff_1_pattern)?,
            limit: ConcurrencyLimit::new(ConcurrencyLimit::default_limit()),
            config,
        })
    }
}

impl MovProvider for MovTool {
    fn movs(&self, reference: &AudioSignal, test: &AudioSignal, _: &ItemContext<'_>) -> Result<Movs> {
        let stdout = invoke_on_signals(
            &self.config.executable,
            &self.config.args,
            self.config.timeout_secs,
            &self.limit,
            reference,
            test,
        )?;
        Ok(Movs {
            adb: extract_scalar(&self.adb, &stdout)?,
            avg_mod_diff_1: extract_scalar(&self.avg_mod_diff_1, &stdout)?,
        })
    }

    fn required_rate(&self) -> RequiredRate {
        RequiredRate::Hz(self.config.required_rate.unwrap_or(DEFAULT_RATE))
    }
}

/// The two-MOV model as a measure named `2f`.
pub struct TwoFMeasure {
    desc: MeasureDescriptor,
    params: TwoFParams,
    provider: Box<dyn MovProvider>,
}

impl TwoFMeasure {
    pub fn new(params: TwoFParams, provider: Box<dyn MovProvider>) -> Self {
        let rate = provider.required_rate();
        Self {
            desc: MeasureDescriptor {
                name: "2f".into(),
                scale: Scale {
                    min: 0.0,
                    max: 100.0,
                    higher_is_better: true,
                },
                required_rate: rate,
                needs_sources: false,
                channel_policy: ChannelPolicy::Native,
            },
            params,
            provider,
        }
    }

    pub fn params(&self) -> &TwoFParams {
        &self.params
    }
}

impl Measure for TwoFMeasure {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, reference: &AudioSignal, test: &AudioSignal, ctx: &ItemContext<'_>) -> Result<f64> {
        let m = self.provider.movs(reference, test, ctx)?;
        if !m.adb.is_finite() || !m.avg_mod_diff_1.is_finite() {
            return Err(Error::Measure(format!("non-finite MOVs {m:?}")));
        }
        Ok(two_f_combine(m.adb, m.avg_mod_diff_1, &self.params))
    }
}
