use std::path::Path;

use anyhow::{Context, Result};
use aqm_core::bss::{decompose_bsseval, decompose_si, ratios, BssEvalParams, BssRatios};
use aqm_core::signal::{load_wav, save_wav};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DecomposeMode {
    /// Time-invariant FIR projection.
    Fir,
    /// Scale-invariant projection.
    Si,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecomposeOutput {
    pub mode: DecomposeMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taps: Option<usize>,
    #[serde(flatten)]
    pub ratios: BssRatios,
}

/// Writes `s_target.wav`, `e_interf.wav`, `e_artif.wav` (32-bit float) and
/// `ratios.json` to `outdir`; returns the clamped ratios.
pub fn cmd_decompose(
    test: &Path,
    target: &Path,
    others: &[impl AsRef<Path>],
    mode: DecomposeMode,
    taps: usize,
    outdir: &Path,
) -> Result<DecomposeOutput> {
    let y = load_wav(test)?;
    let t = load_wav(target)?;
    let o = others.iter().map(load_wav).collect::<Result<Vec<_>, _>>()?;
    let dec = match mode {
        DecomposeMode::Fir => decompose_bsseval(
            &y,
            &t,
            &o,
            &BssEvalParams {
                taps,
                ..Default::default()
            },
        )?,
        DecomposeMode::Si => decompose_si(&y, &t, &o)?,
    };
    std::fs::create_dir_all(outdir).with_context(|| format!("cannot create {}", outdir.display()))?;
    save_wav(&dec.s_target, outdir.join("s_target.wav"))?;
    save_wav(&dec.e_interf, outdir.join("e_interf.wav"))?;
    save_wav(&dec.e_artif, outdir.join("e_artif.wav"))?;
    let out = DecomposeOutput {
        mode,
        taps: (mode == DecomposeMode::Fir).then_some(taps),
        ratios: ratios(&dec),
    };
    std::fs::write(outdir.join("ratios.json"), serde_json::to_string_pretty(&out)? + "\n")?;
    Ok(out)
}
