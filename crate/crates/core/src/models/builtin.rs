use super::measure::{ChannelPolicy, ItemContext, Measure, MeasureDescriptor, RequiredRate, Scale};
use crate::bss::{decompose_bsseval, decompose_si, raw_ratios, BssEvalParams, RATIO_LIMIT_DB};
use crate::speech::{dllr, fwsnrseg, DllrParams, FwSnrSegParams, LLR_CAP};
use crate::{AudioSignal, Error, Result};

/// Default processing rate for the built-in measures.
pub(crate) const DEFAULT_RATE: u32 = 48000;

pub struct FwSnrSegMeasure {
    desc: MeasureDescriptor,
    params: FwSnrSegParams,
}

impl FwSnrSegMeasure {
    pub fn new(params: FwSnrSegParams, rate: u32) -> Result<Self> {
        params.validate()?;
        let [lo, hi] = params.snr_clamp;
        Ok(Self {
            desc: MeasureDescriptor {
                name: "fwsnrseg".into(),
                scale: Scale::new(lo, hi, true)?,
                required_rate: RequiredRate::Hz(rate),
                needs_sources: false,
                channel_policy: ChannelPolicy::PerChannelMean,
            },
            params,
        })
    }
}

impl Default for FwSnrSegMeasure {
    fn default() -> Self {
        Self::new(FwSnrSegParams::default(), DEFAULT_RATE).expect("default parameters are valid")
    }
}

impl Measure for FwSnrSegMeasure {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, reference: &AudioSignal, test: &AudioSignal, _: &ItemContext<'_>) -> Result<f64> {
        fwsnrseg(reference, test, &self.params)
    }
}

pub struct DllrMeasure {
    desc: MeasureDescriptor,
    params: DllrParams,
}

impl DllrMeasure {
    pub fn new(params: DllrParams, rate: u32) -> Self {
        Self {
            desc: MeasureDescriptor {
                name: "dllr".into(),
                scale: Scale {
                    min: 0.0,
                    max: LLR_CAP,
                    higher_is_better: false,
                },
                required_rate: RequiredRate::Hz(rate),
                needs_sources: false,
                channel_policy: ChannelPolicy::PerChannelMean,
            },
            params,
        }
    }
}

impl Default for DllrMeasure {
    fn default() -> Self {
        Self::new(DllrParams::default(), DEFAULT_RATE)
    }
}

impl Measure for DllrMeasure {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, reference: &AudioSignal, test: &AudioSignal, _: &ItemContext<'_>) -> Result<f64> {
        dllr(reference, test, &self.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BssRatioKind {
    Sdr,
    Sir,
    Sar,
}

/// One of SDR/SIR/SAR (FIR decomposition) or SI-SDR/SI-SIR/SI-SAR.
///
/// The test signal is the estimate; the target image and interferers come
/// from the item's [`SourceSet`](super::SourceSet).
pub struct BssMeasure {
    desc: MeasureDescriptor,
    kind: BssRatioKind,
    /// `None` selects the scale-invariant decomposition.
    fir: Option<BssEvalParams>,
}

impl BssMeasure {
    pub fn new(kind: BssRatioKind, fir: Option<BssEvalParams>, rate: u32) -> Self {
        let base = match kind {
            BssRatioKind::Sdr => "sdr",
            BssRatioKind::Sir => "sir",
            BssRatioKind::Sar => "sar",
        };
        let name = if fir.is_some() {
            base.to_string()
        } else {
            format!("si-{base}")
        };
        Self {
            desc: MeasureDescriptor {
                name,
                scale: Scale {
                    min: -RATIO_LIMIT_DB,
                    max: RATIO_LIMIT_DB,
                    higher_is_better: true,
                },
                required_rate: RequiredRate::Hz(rate),
                needs_sources: true,
                channel_policy: ChannelPolicy::Native,
            },
            kind,
            fir,
        }
    }
}

impl Measure for BssMeasure {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, _reference: &AudioSignal, test: &AudioSignal, ctx: &ItemContext<'_>) -> Result<f64> {
        let sources = ctx
            .sources
            .ok_or_else(|| Error::Measure(format!("{} needs reference sources", self.desc.name)))?;
        let dec = match &self.fir {
            Some(p) => decompose_bsseval(test, &sources.target, &sources.others, p)?,
            None => decompose_si(test, &sources.target, &sources.others)?,
        };
        let r = raw_ratios(&dec).clamped();
        Ok(match self.kind {
            BssRatioKind::Sdr => r.sdr,
            BssRatioKind::Sir => r.sir,
            BssRatioKind::Sar => r.sar,
        })
    }
}
