use std::sync::Arc;

use super::measure::{
    evaluate, ChannelPolicy, ItemContext, Measure, MeasureDescriptor, MeasureResult,
};
use crate::bss::decompose_si;
use crate::{AudioSignal, Error, Result};

/// Scores only the artifacts in `y`.
///
/// `y` is decomposed with the scale-invariant projection, and `base_measure`
/// is run with `s_target + e_interf` (that is, `y - e_artif`) as reference
/// and `y` as test signal. Target scaling and interference are therefore
/// forgiven.
pub fn sa_wrap(
    base_measure: &dyn Measure,
    y: &AudioSignal,
    target_ref: &AudioSignal,
    other_refs: &[AudioSignal],
) -> MeasureResult {
    sa_wrap_item(base_measure, y, target_ref, other_refs, None)
}

/// Like [`sa_wrap`], forwarding `item_id` to the base measure so that
/// item-keyed data (a MOV sidecar computed on the artifacts-only pairing)
/// can be looked up.
pub fn sa_wrap_item(
    base_measure: &dyn Measure,
    y: &AudioSignal,
    target_ref: &AudioSignal,
    other_refs: &[AudioSignal],
    item_id: Option<&str>,
) -> MeasureResult {
    let name = &base_measure.descriptor().name;
    let dec = match decompose_si(y, target_ref, other_refs) {
        Ok(d) => d,
        Err(e) => return MeasureResult::invalid(name, format!("decomposition failed: {e}")),
    };
    let ctx = ItemContext {
        item_id,
        sources: None,
    };
    evaluate(base_measure, &dec.artifact_free(), y, &ctx)
}

/// A registered artifacts-only variant of another measure.
pub struct SaWrapped {
    desc: MeasureDescriptor,
    base: Arc<dyn Measure>,
}

impl SaWrapped {
    pub fn new(name: impl Into<String>, base: Arc<dyn Measure>) -> Self {
        let b = base.descriptor();
        Self {
            desc: MeasureDescriptor {
                name: name.into(),
                scale: b.scale,
                required_rate: b.required_rate,
                needs_sources: true,
                channel_policy: ChannelPolicy::Native,
            },
            base,
        }
    }

    pub fn base(&self) -> &Arc<dyn Measure> {
        &self.base
    }
}

impl Measure for SaWrapped {
    fn descriptor(&self) -> &MeasureDescriptor {
        &self.desc
    }

    fn compute(&self, _reference: &AudioSignal, test: &AudioSignal, ctx: &ItemContext<'_>) -> Result<f64> {
        let sources = ctx
            .sources
            .ok_or_else(|| Error::Measure(format!("{} needs reference sources", self.desc.name)))?;
        let r = sa_wrap_item(self.base.as_ref(), test, &sources.target, &sources.others, ctx.item_id);
        if r.valid {
            Ok(r.value)
        } else {
            Err(Error::Measure(r.failure_note.unwrap_or_default()))
        }
    }
}
