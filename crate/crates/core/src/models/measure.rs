use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::signal::{channel_mean, resample};
use crate::{AudioSignal, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
    pub higher_is_better: bool,
}

impl Scale {
    pub fn new(min: f64, max: f64, higher_is_better: bool) -> Result<Self> {
        if !(min < max) {
            return Err(Error::InvalidParameter(format!(
                "scale needs min < max, got [{min}, {max}]"
            )));
        }
        Ok(Self {
            min,
            max,
            higher_is_better,
        })
    }

    pub fn unbounded(higher_is_better: bool) -> Self {
        Self {
            min: f64::NEG_INFINITY,
            max: f64::INFINITY,
            higher_is_better,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RequiredRate {
    Native,
    Hz(u32),
}

/// How a measure treats multichannel input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChannelPolicy {
    /// Score each channel as mono and average.
    PerChannelMean,
    /// The measure handles all channels itself.
    Native,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureDescriptor {
    pub name: String,
    pub scale: Scale,
    pub required_rate: RequiredRate,
    pub needs_sources: bool,
    pub channel_policy: ChannelPolicy,
}

/// Reference sources of a separation item: the target image and any
/// interfering source images.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSet {
    pub target: AudioSignal,
    pub others: Vec<AudioSignal>,
}

impl SourceSet {
    fn resampled(&self, rate: u32) -> Result<Self> {
        Ok(Self {
            target: resample(&self.target, rate)?,
            others: self
                .others
                .iter()
                .map(|o| resample(o, rate))
                .collect::<Result<_>>()?,
        })
    }
}

/// Per-item side information handed to a measure.
#[derive(Debug, Clone, Copy, Default)]
pub struct ItemContext<'a> {
    /// Identifier used by item-keyed data such as MOV sidecars.
    pub item_id: Option<&'a str>,
    pub sources: Option<&'a SourceSet>,
}

/// A full-reference quality measure.
pub trait Measure: Send + Sync {
    fn descriptor(&self) -> &MeasureDescriptor;

    /// Scores `test` against `reference`. Inputs are already at the
    /// required rate, and mono when the policy is
    /// [`ChannelPolicy::PerChannelMean`].
    fn compute(&self, reference: &AudioSignal, test: &AudioSignal, ctx: &ItemContext<'_>) -> Result<f64>;
}

/// One measure's score for one item.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResult {
    pub measure_name: String,
    /// `NaN` when the result is invalid.
    pub value: f64,
    pub valid: bool,
    pub failure_note: Option<String>,
}

impl MeasureResult {
    pub fn ok(measure_name: impl Into<String>, value: f64) -> Self {
        Self {
            measure_name: measure_name.into(),
            value,
            valid: true,
            failure_note: None,
        }
    }

    pub fn invalid(measure_name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            measure_name: measure_name.into(),
            value: f64::NAN,
            valid: false,
            failure_note: Some(note.into()),
        }
    }

    /// The value, if valid.
    pub fn valid_value(&self) -> Option<f64> {
        self.valid.then_some(self.value)
    }
}

/// Runs `measure` on one item.
///
/// Signals are resampled to the measure's required rate and the declared
/// channel policy is applied. Failures of any kind become invalid results
/// carrying a note; valid values are clamped to the measure's scale.
pub fn evaluate(
    measure: &dyn Measure,
    reference: &AudioSignal,
    test: &AudioSignal,
    ctx: &ItemContext<'_>,
) -> MeasureResult {
    let desc = measure.descriptor();
    match evaluate_inner(measure, reference, test, ctx) {
        Ok(v) if v.is_finite() => MeasureResult::ok(&desc.name, v.clamp(desc.scale.min, desc.scale.max)),
        Ok(v) => MeasureResult::invalid(&desc.name, format!("non-finite output {v}")),
        Err(e) => MeasureResult::invalid(&desc.name, e.to_string()),
    }
}

fn evaluate_inner(
    measure: &dyn Measure,
    reference: &AudioSignal,
    test: &AudioSignal,
    ctx: &ItemContext<'_>,
) -> Result<f64> {
    let desc = measure.descriptor();
    if desc.needs_sources && ctx.sources.is_none() {
        return Err(Error::Measure(format!("{} needs reference sources", desc.name)));
    }
    let resampled_sources;
    let (reference, test, ctx) = match desc.required_rate {
        RequiredRate::Hz(rate) => {
            resampled_sources = ctx.sources.map(|s| s.resampled(rate)).transpose()?;
            (
                resample(reference, rate)?,
                resample(test, rate)?,
                ItemContext {
                    item_id: ctx.item_id,
                    sources: resampled_sources.as_ref(),
                },
            )
        }
        RequiredRate::Native => (reference.clone(), test.clone(), *ctx),
    };
    match desc.channel_policy {
        ChannelPolicy::Native => measure.compute(&reference, &test, &ctx),
        ChannelPolicy::PerChannelMean => {
            reference.check_compatible(&test)?;
            let scores = (0..reference.channel_count())
                .map(|c| {
                    measure.compute(&reference.select_channel(c), &test.select_channel(c), &ctx)
                })
                .collect::<Result<Vec<_>>>()?;
            channel_mean(&scores)
        }
    }
}

/// Name-indexed set of measures.
#[derive(Clone, Default)]
pub struct Registry {
    measures: BTreeMap<String, Arc<dyn Measure>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, measure: Arc<dyn Measure>) -> Result<()> {
        let name = measure.descriptor().name.clone();
        if self.measures.contains_key(&name) {
            return Err(Error::InvalidParameter(format!("measure '{name}' is already registered")));
        }
        self.measures.insert(name, measure);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Measure>> {
        self.measures.get(name).cloned()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.measures.keys().map(String::as_str)
    }
}
