use serde::{Deserialize, Serialize};

use super::projection::{Cholesky, DelayedBasis};
use crate::{AudioSignal, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    /// Time-invariant FIR projection with the given number of taps.
    FullFir { taps: usize },
    /// Single broadband gain on the target.
    ScaleInvariant,
}

/// `y = s_target + e_interf + e_artif`, where `s_target` already includes
/// the spatial distortion term.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub s_target: AudioSignal,
    pub e_interf: AudioSignal,
    pub e_artif: AudioSignal,
    pub mode: DecompositionMode,
}

impl Decomposition {
    /// `s_target + e_interf`, i.e. `y - e_artif`.
    pub fn artifact_free(&self) -> AudioSignal {
        self.s_target
            .add(&self.e_interf)
            .expect("decomposition components share one shape")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BssEvalParams {
    /// Projection filter length.
    pub taps: usize,
    /// Largest allowed `sources × channels × taps`.
    pub max_basis_dim: usize,
}

impl Default for BssEvalParams {
    fn default() -> Self {
        Self {
            taps: 512,
            max_basis_dim: 8192,
        }
    }
}

fn check_inputs(y: &AudioSignal, target: &AudioSignal, others: &[AudioSignal]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::InvalidSignal("cannot decompose an empty signal".into()));
    }
    target.check_compatible(y)?;
    for (i, o) in others.iter().enumerate() {
        o.check_compatible(y)
            .map_err(|e| Error::Mismatch(format!("interferer reference {i}: {e}")))?;
    }
    Ok(())
}

/// BSSEval images-mode decomposition with a time-invariant FIR projection.
///
/// Every channel of `y` is projected separately onto the delayed copies
/// (`0..taps`) of every channel of every reference. The projection onto the
/// target's channels alone is `s_target`; the remainder of the projection
/// onto all references is `e_interf`, and what no reference explains is
/// `e_artif`.
pub fn decompose_bsseval(
    y: &AudioSignal,
    target: &AudioSignal,
    others: &[AudioSignal],
    params: &BssEvalParams,
) -> Result<Decomposition> {
    check_inputs(y, target, others)?;
    let taps = params.taps;
    if taps == 0 {
        return Err(Error::InvalidParameter("taps must be at least 1".into()));
    }
    let channels = y.channel_count();
    let dim = (1 + others.len()) * channels * taps;
    if dim > params.max_basis_dim {
        return Err(Error::DimensionCap {
            dim,
            cap: params.max_basis_dim,
        });
    }

    let refs: Vec<&[f64]> = std::iter::once(target)
        .chain(others)
        .flat_map(|s| s.channels().iter().map(Vec::as_slice))
        .collect();
    let basis = DelayedBasis::new(refs, taps);
    let gram = basis.gram();
    let target_dim = channels * taps;
    let all = Cholesky::factor(&gram);
    let target_only = Cholesky::factor(&gram.leading(target_dim));

    let mut s_target = Vec::with_capacity(channels);
    let mut e_interf = Vec::with_capacity(channels);
    let mut e_artif = Vec::with_capacity(channels);
    for yc in y.channels() {
        let cross = basis.cross(yc);
        let c_target = target_only.solve(&cross[..target_dim]);
        let c_all = all.solve(&cross);
        let st = basis.synthesize(0..channels, &c_target);
        let p_all = basis.synthesize(0..basis.dim() / taps, &c_all);
        e_interf.push(p_all.iter().zip(&st).map(|(p, s)| p - s).collect());
        e_artif.push(yc.iter().zip(&p_all).map(|(v, p)| v - p).collect());
        s_target.push(st);
    }
    let rate = y.sample_rate();
    Ok(Decomposition {
        s_target: AudioSignal::new(s_target, rate)?,
        e_interf: AudioSignal::new(e_interf, rate)?,
        e_artif: AudioSignal::new(e_artif, rate)?,
        mode: DecompositionMode::FullFir { taps },
    })
}

/// Scale-invariant decomposition.
///
/// All channels are treated as one vector. `s_target = α s_t` with
/// `α = ⟨y, s_t⟩ / ⟨s_t, s_t⟩`; `e_interf` is the rest of the orthogonal
/// projection of `y` onto `span{s_t, others}`, and `e_artif` is the residual.
pub fn decompose_si(y: &AudioSignal, target: &AudioSignal, others: &[AudioSignal]) -> Result<Decomposition> {
    check_inputs(y, target, others)?;
    let yv = y.flatten();
    let tv = target.flatten();
    let target_energy: f64 = tv.iter().map(|x| x * x).sum();
    if target_energy <= 0.0 {
        return Err(Error::Degenerate(
            "target reference has zero energy; the scaling factor is undefined".into(),
        ));
    }
    let alpha = yv.iter().zip(&tv).map(|(a, b)| a * b).sum::<f64>() / target_energy;
    let s_target: Vec<f64> = tv.iter().map(|x| alpha * x).collect();

    let projected = if others.is_empty() {
        s_target.clone()
    } else {
        let flat_others: Vec<Vec<f64>> = others.iter().map(AudioSignal::flatten).collect();
        let refs: Vec<&[f64]> = std::iter::once(tv.as_slice())
            .chain(flat_others.iter().map(Vec::as_slice))
            .collect();
        let basis = DelayedBasis::new(refs, 1);
        let coefs = Cholesky::factor(&basis.gram()).solve(&basis.cross(&yv));
        basis.synthesize(0..basis.dim(), &coefs)
    };
    let e_interf: Vec<f64> = projected.iter().zip(&s_target).map(|(p, s)| p - s).collect();
    let e_artif: Vec<f64> = yv.iter().zip(&projected).map(|(v, p)| v - p).collect();

    let (channels, rate) = (y.channel_count(), y.sample_rate());
    Ok(Decomposition {
        s_target: AudioSignal::from_flat(&s_target, channels, rate)?,
        e_interf: AudioSignal::from_flat(&e_interf, channels, rate)?,
        e_artif: AudioSignal::from_flat(&e_artif, channels, rate)?,
        mode: DecompositionMode::ScaleInvariant,
    })
}
