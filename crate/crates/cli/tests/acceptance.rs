//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any fails. Criterion 11 needs external listening-test
//! data and is skipped unless `AQM_SISEC08_MANIFEST` points at a manifest.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use aqm_cli::commands::{cmd_correlate, cmd_measure};
use aqm_core::bss::{decompose_bsseval, decompose_si, raw_ratios, ratios, BssEvalParams, Decomposition};
use aqm_core::models::{
    evaluate, sa_wrap, BssMeasure, BssRatioKind, DllrMeasure, FwSnrSegMeasure, ItemContext, MappingKind,
    MovProvider, MovSidecar, Movs, SaWrapped, SourceSet, TwoFMeasure, TwoFParams,
};
use aqm_core::speech::{dllr, fwsnrseg, DllrParams, FwSnrSegParams};
use aqm_core::stats::{
    aggregate, fisher_z, fisher_z_inv, kendall, kendall_direct, pearson, tau_prime, TestCoefficient,
};
use aqm_core::AudioSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Verdict::*;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn noise(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * gauss(rng)).collect()
}

fn mono(v: Vec<f64>, rate: u32) -> AudioSignal {
    AudioSignal::mono(v, rate).unwrap()
}

fn stereo(rng: &mut ChaCha8Rng, len: usize, scale: f64, rate: u32) -> AudioSignal {
    AudioSignal::new(vec![noise(rng, len, scale), noise(rng, len, scale)], rate).unwrap()
}

// ---------------------------------------------------------------- 1

#[derive(Clone, Copy)]
struct Dd(f64, f64);

impl Dd {
    fn add(self, v: f64) -> Dd {
        let s = self.0 + v;
        let bb = s - self.0;
        let err = (self.0 - (s - bb)) + (v - bb);
        let lo = self.1 + err;
        let hi = s + lo;
        Dd(hi, lo - (hi - s))
    }

    fn add_prod(self, a: f64, b: f64) -> Dd {
        let p = a * b;
        self.add(p).add(a.mul_add(b, -p))
    }

    fn value(self) -> f64 {
        self.0 + self.1
    }
}

fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = |v: &[f64]| v.iter().fold(Dd(0.0, 0.0), |a, &b| a.add(b)).value() / n;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (Dd(0.0, 0.0), Dd(0.0, 0.0), Dd(0.0, 0.0));
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy.add_prod(a - mx, b - my);
        sxx = sxx.add_prod(a - mx, a - mx);
        syy = syy.add_prod(b - my, b - my);
    }
    sxy.value() / (sxx.value() * syy.value()).sqrt()
}

fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut k = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let p = (x[i] - x[j]) * (y[i] - y[j]);
            k += (p > 0.0) as i64 - (p < 0.0) as i64;
        }
    }
    2.0 * k as f64 / (n * (n - 1)) as f64
}

fn correlation_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_p, mut worst_k) = (0.0f64, 0.0f64);
    let mut paths_differ = 0;
    for case in 0..200 {
        let n = rng.random_range(5..=200);
        let r: f64 = rng.random_range(-1.0..1.0);
        let ties = case % 2 == 1;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for _ in 0..n {
            let (a, e) = (gauss(&mut rng), gauss(&mut rng));
            let (mut a, mut b) = (60.0 + 20.0 * a, r * a + (1.0 - r * r).sqrt() * e);
            if ties {
                a = (a / 5.0).round() * 5.0;
                b = (b * 2.0).round();
            }
            x.push(a);
            y.push(b);
        }
        worst_p = worst_p.max((pearson(&x, &y).unwrap() - pearson_oracle(&x, &y)).abs());
        let k = kendall(&x, &y).unwrap();
        worst_k = worst_k.max((k - kendall_oracle(&x, &y)).abs());
        paths_differ += (k != kendall_direct(&x, &y).unwrap()) as usize;
    }
    check(
        worst_p < 1e-12 && worst_k < 1e-12 && paths_differ == 0,
        format!("max |Δρ| = {worst_p:.1e}, max |Δτ| = {worst_k:.1e}, fast/direct mismatches = {paths_differ}"),
    )
}

// ---------------------------------------------------------------- 2

fn tau_prime_spots() -> Verdict {
    let cases = [(-1.0, -1.0), (0.0, 0.0), (0.5, std::f64::consts::FRAC_PI_4.sin()), (1.0, 1.0)];
    let worst = cases.iter().map(|&(t, w)| (tau_prime(t) - w).abs()).fold(0.0, f64::max);
    check(worst <= 1e-15, format!("max error {worst:.1e}"))
}

// ---------------------------------------------------------------- 3

fn fisher_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let round = (0..1000)
        .map(|_| {
            let g: f64 = rng.random_range(-0.9999..0.9999);
            (fisher_z_inv(fisher_z(g)) - g).abs()
        })
        .fold(0.0, f64::max);
    let mut idem = 0.0f64;
    for _ in 0..200 {
        let g: f64 = rng.random_range(0.0..0.9999);
        let k = rng.random_range(1..20);
        let cells: Vec<TestCoefficient> = (0..k)
            .map(|i| TestCoefficient {
                test_id: format!("t{i}"),
                rho: g,
                tau_prime: g,
                n: 10 + i,
            })
            .collect();
        let a = aggregate(&cells, &BTreeSet::new()).unwrap();
        idem = idem.max((a.rho_bar - g).abs()).max((a.tau_prime_bar - g).abs());
    }
    check(
        round < 1e-12 && idem < 1e-12,
        format!("round trip max {round:.1e}, aggregate idempotence max {idem:.1e}"),
    )
}

// ---------------------------------------------------------------- 4

fn si_energy_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let len = rng.random_range(64..1500);
        let channels = 1 + case % 2;
        let sig = |rng: &mut ChaCha8Rng| {
            AudioSignal::new((0..channels).map(|_| noise(rng, len, 0.2)).collect(), 8000).unwrap()
        };
        let s = sig(&mut rng);
        let others: Vec<AudioSignal> = (0..rng.random_range(0..3)).map(|_| sig(&mut rng)).collect();
        let mut y = s.scaled(rng.random_range(0.3..2.0));
        for o in &others {
            y = y.add(&o.scaled(rng.random_range(0.0..1.0))).unwrap();
        }
        y = y.add(&sig(&mut rng).scaled(rng.random_range(0.0..1.0))).unwrap();
        let r = raw_ratios(&decompose_si(&y, &s, &others).unwrap());
        let p = |v: f64| 10f64.powf(-v / 10.0);
        worst = worst.max((p(r.sdr) - p(r.sir) - p(r.sar)).abs());
    }
    check(worst < 1e-10, format!("max |residual| {worst:.1e} over 1000 decompositions"))
}

// ---------------------------------------------------------------- 5

fn delayed(v: &[f64], d: usize) -> Vec<f64> {
    (0..v.len()).map(|n| if n >= d { v[n - d] } else { 0.0 }).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Reconstruction error relative to peak, and the largest normalised
/// inner product between the artifact and any basis vector.
fn decomposition_errors(dec: &Decomposition, y: &AudioSignal, basis: &[Vec<f64>], flat: bool) -> (f64, f64) {
    let sum = dec.artifact_free().add(&dec.e_artif).unwrap();
    let peak = y.peak();
    let recon = sum
        .channels()
        .iter()
        .flatten()
        .zip(y.channels().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / peak;
    let mut ortho = 0.0f64;
    let artifacts: Vec<Vec<f64>> = if flat {
        vec![dec.e_artif.flatten()]
    } else {
        dec.e_artif.channels().to_vec()
    };
    let ys: Vec<Vec<f64>> = if flat { vec![y.flatten()] } else { y.channels().to_vec() };
    for (ea, yc) in artifacts.iter().zip(&ys) {
        for b in basis {
            let nb = norm(b);
            if nb > 0.0 {
                ortho = ortho.max(dot(ea, b).abs() / (norm(yc) * nb));
            }
        }
    }
    (recon, ortho)
}

fn reconstruction_and_orthogonality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut recon, mut ortho) = (0.0f64, 0.0f64);
    let mut deficient = 0;
    for case in 0..100 {
        let len = rng.random_range(200..800);
        let taps = rng.random_range(1..12);
        let channels = 1 + case % 2;
        let sig = |rng: &mut ChaCha8Rng| {
            AudioSignal::new((0..channels).map(|_| noise(rng, len, 0.3)).collect(), 8000).unwrap()
        };
        let target = sig(&mut rng);
        let mut others = vec![sig(&mut rng)];
        match case % 4 {
            1 => others.push(target.scaled(-0.7)),
            2 => others.push(target.map(|_| 0.0)),
            3 => others.push(AudioSignal::new(target.channels().iter().map(|c| delayed(c, 1)).collect(), 8000).unwrap()),
            _ => {}
        }
        deficient += (case % 4 != 0) as usize;
        let mut y = target.scaled(0.9).add(&others[0].scaled(0.5)).unwrap();
        y = y.add(&sig(&mut rng).scaled(0.2)).unwrap();

        let refs: Vec<&AudioSignal> = std::iter::once(&target).chain(&others).collect();
        let fir_basis: Vec<Vec<f64>> = refs
            .iter()
            .flat_map(|r| r.channels().iter())
            .flat_map(|c| (0..taps).map(move |d| delayed(c, d)))
            .collect();
        let params = BssEvalParams {
            taps,
            ..Default::default()
        };
        let dec = decompose_bsseval(&y, &target, &others, &params).unwrap();
        let (r, o) = decomposition_errors(&dec, &y, &fir_basis, false);
        recon = recon.max(r);
        ortho = ortho.max(o);

        let si_basis: Vec<Vec<f64>> = refs.iter().map(|r| r.flatten()).collect();
        let dec = decompose_si(&y, &target, &others).unwrap();
        let (r, o) = decomposition_errors(&dec, &y, &si_basis, true);
        recon = recon.max(r);
        ortho = ortho.max(o);
    }
    check(
        recon <= 1e-9 && ortho < 1e-6,
        format!("max reconstruction error {recon:.1e}·peak, max |⟨e_artif, b⟩| {ortho:.1e} (relative), {deficient} rank-deficient fixtures"),
    )
}

// ---------------------------------------------------------------- 6

fn convolve_truncated(s: &[f64], h: &[f64]) -> Vec<f64> {
    (0..s.len())
        .map(|n| h.iter().enumerate().take(n + 1).map(|(k, hk)| hk * s[n - k]).sum())
        .collect()
}

fn filter_forgiveness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_rel = 0.0f64;
    let mut ratios_ok = true;
    for _ in 0..5 {
        let s = noise(&mut rng, 16000, 0.2);
        let h: Vec<f64> = (0..64).map(|_| gauss(&mut rng) / 8.0).collect();
        let y = mono(convolve_truncated(&s, &h), 16000);
        let dec = decompose_bsseval(&y, &mono(s, 16000), &[], &BssEvalParams::default()).unwrap();
        worst_rel = worst_rel.max(dec.e_artif.energy() / y.energy());
        let r = ratios(&dec);
        ratios_ok &= r.sdr == 30.0 && r.sar == 30.0;
    }

    // 10 s stereo, two sources, 512 taps at 48 kHz
    let len = 480_000;
    let target = stereo(&mut rng, len, 0.2, 48000);
    let other = stereo(&mut rng, len, 0.2, 48000);
    let h: Vec<f64> = (0..32).map(|_| gauss(&mut rng) / 6.0).collect();
    let y = AudioSignal::new(
        (0..2)
            .map(|c| {
                let conv = convolve_truncated(target.channel(c), &h);
                let n = noise(&mut rng, len, 0.01);
                (0..len).map(|i| conv[i] + 0.3 * other.channel(c)[i] + n[i]).collect()
            })
            .collect(),
        48000,
    )
    .unwrap();
    let start = Instant::now();
    let dec = decompose_bsseval(&y, &target, &[other], &BssEvalParams::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let recon = dec
        .artifact_free()
        .add(&dec.e_artif)
        .unwrap()
        .channels()
        .iter()
        .flatten()
        .zip(y.channels().iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(
        worst_rel < 1e-8 && ratios_ok && secs <= 60.0 && recon <= 1e-9 * y.peak(),
        format!(
            "max e_artif energy ratio {worst_rel:.1e}, SDR/SAR clamped to +30: {ratios_ok}, 10 s stereo 512-tap run {secs:.1} s"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn clamping() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let len = 4000;
    let s = mono(noise(&mut rng, len, 0.3), 8000);
    let o = mono(noise(&mut rng, len, 0.3), 8000);
    let n = mono(noise(&mut rng, len, 0.3), 8000);
    let silence = mono(vec![0.0; len], 8000);
    let cases: Vec<(&str, AudioSignal, AudioSignal, Vec<AudioSignal>)> = vec![
        ("silent test", silence.clone(), s.clone(), vec![o.clone()]),
        ("test equals target", s.clone(), s.clone(), vec![o.clone()]),
        ("identical sources", s.add(&o).unwrap(), s.clone(), vec![s.clone()]),
        ("pure noise", n.clone(), s.clone(), vec![o.clone()]),
        ("only interference", o.clone(), s.clone(), vec![o.clone()]),
        ("silent interferer", s.add(&n).unwrap(), s.clone(), vec![silence.clone()]),
        ("huge artifact", s.add(&n.scaled(1e6)).unwrap(), s.clone(), vec![]),
    ];
    let mut values = 0;
    let mut bad = Vec::new();
    for (name, y, t, others) in &cases {
        let mut decs = vec![decompose_bsseval(y, t, others, &BssEvalParams { taps: 16, ..Default::default() })];
        decs.push(decompose_si(y, t, others));
        for dec in decs.into_iter().flatten() {
            let r = ratios(&dec);
            for v in [r.sdr, r.sir, r.sar] {
                values += 1;
                if !(-30.0..=30.0).contains(&v) {
                    bad.push(format!("{name}: {v}"));
                }
            }
        }
        let sources = SourceSet {
            target: t.clone(),
            others: others.clone(),
        };
        let ctx = ItemContext {
            item_id: None,
            sources: Some(&sources),
        };
        for kind in [BssRatioKind::Sdr, BssRatioKind::Sir, BssRatioKind::Sar] {
            for fir in [Some(BssEvalParams { taps: 16, ..Default::default() }), None] {
                let m = BssMeasure::new(kind, fir, 8000);
                let r = evaluate(&m, t, y, &ctx);
                if r.valid {
                    values += 1;
                    if !(-30.0..=30.0).contains(&r.value) {
                        bad.push(format!("{name} {}: {}", r.measure_name, r.value));
                    }
                }
            }
        }
    }
    check(bad.is_empty(), format!("{values} ratio values checked, out of range: {bad:?}"))
}

// ---------------------------------------------------------------- 8

/// Stand-in for an external PEAQ tool: both MOVs vanish for identical
/// signals and grow with the relative error energy.
struct ToyMovs;

impl MovProvider for ToyMovs {
    fn movs(&self, reference: &AudioSignal, test: &AudioSignal, _: &ItemContext<'_>) -> aqm_core::Result<Movs> {
        let d = test.sub(reference)?.energy() / reference.energy();
        Ok(Movs {
            adb: (1.0 + 1e6 * d).log10(),
            avg_mod_diff_1: 100.0 * d.sqrt(),
        })
    }
}

fn two_f_params(intercept: f64) -> TwoFParams {
    TwoFParams {
        mapping: MappingKind::Affine,
        intercept,
        adb: -15.0,
        avg_mod_diff_1: -1.0,
    }
}

fn sa_wrapper_limits() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rate = 48000;
    let s = mono(noise(&mut rng, 24000, 0.2), rate);
    let o = mono(noise(&mut rng, 24000, 0.2), rate);
    let y = s.scaled(0.8).add(&o.scaled(0.6)).unwrap();
    let others = [o.clone()];

    let fw = sa_wrap(&FwSnrSegMeasure::default(), &y, &s, &others);
    let ll = sa_wrap(&DllrMeasure::default(), &y, &s, &others);

    // e_artif is zero only up to rounding (~1e-16 of y), which the MOVs see
    let two_f = Arc::new(TwoFMeasure::new(two_f_params(100.0), Box::new(ToyMovs)));
    let perfect = sa_wrap(two_f.as_ref(), &y, &s, &others);
    let e_artif = decompose_bsseval(&y, &s, &others, &BssEvalParams::default()).unwrap().e_artif;
    let residual = (e_artif.energy() / y.energy()).sqrt();
    // a mapping that overshoots is held at exactly 100 by the clamp
    let overshoot = TwoFMeasure::new(two_f_params(101.0), Box::new(ToyMovs));
    let clamped = sa_wrap(&overshoot, &y, &s, &others);
    // artifacts only: the target is absent from y
    let art = mono(noise(&mut rng, 24000, 0.2), rate);
    let worst = sa_wrap(two_f.as_ref(), &art, &s, &others);

    // the same through a registered measure fed from a MOV sidecar
    let mut sidecar = MovSidecar::default();
    sidecar.insert(
        "t/i/c",
        Movs {
            adb: 0.0,
            avg_mod_diff_1: 0.0,
        },
    );
    let si_sa2f = SaWrapped::new("si-sa2f", Arc::new(TwoFMeasure::new(two_f_params(100.0), Box::new(sidecar))));
    let sources = SourceSet {
        target: s.clone(),
        others: others.to_vec(),
    };
    let ctx = ItemContext {
        item_id: Some("t/i/c"),
        sources: Some(&sources),
    };
    let via_sidecar = evaluate(&si_sa2f, &s, &y, &ctx);

    check(
        fw.value == 35.0
            && ll.valid
            && ll.value.abs() <= 1e-9
            && (perfect.value - 100.0).abs() <= 1e-9
            && clamped.value == 100.0
            && worst.value == 0.0
            && via_sidecar.value == 100.0,
        format!(
            "SA-fwSNRseg {}, SA-dLLR {:.1e}, SA-2f in-span {} (|e_artif|/|y| = {residual:.1e}), clamped {}, artifacts-only {}, sidecar {}",
            fw.value, ll.value, perfect.value, clamped.value, worst.value, via_sidecar.value
        ),
    )
}

// ---------------------------------------------------------------- 9

fn speechlike(rng: &mut ChaCha8Rng, len: usize, rate: u32) -> Vec<f64> {
    let f = rng.random_range(300.0..1800.0);
    let r: f64 = 0.97;
    let w = 2.0 * std::f64::consts::PI * f / rate as f64;
    let (a1, a2) = (2.0 * r * w.cos(), -r * r);
    let (mut y1, mut y2) = (0.0, 0.0);
    let syll = rng.random_range(2.0..6.0);
    (0..len)
        .map(|n| {
            let v = a1 * y1 + a2 * y2 + 0.05 * gauss(rng);
            y2 = y1;
            y1 = v;
            let env = 0.55 + 0.45 * (2.0 * std::f64::consts::PI * syll * n as f64 / rate as f64).sin();
            0.2 * v * env
        })
        .collect()
}

fn speech_identities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fw_params = FwSnrSegParams::default();
    let ll_params = DllrParams::default();
    let fw_m = FwSnrSegMeasure::default();
    let ll_m = DllrMeasure::default();
    let ctx = ItemContext::default();
    let (mut identity_ok, mut in_range) = (true, true);
    let mut gain_dev = 0.0f64;
    for _ in 0..50 {
        let rate = [16000, 44100, 48000][rng.random_range(0..3)];
        let len = rng.random_range(rate as usize / 3..rate as usize);
        let x = mono(speechlike(&mut rng, len, rate), rate);
        let level = rng.random_range(0.0..0.05);
        let y = x.add(&mono(noise(&mut rng, len, level), rate)).unwrap();
        identity_ok &= fwsnrseg(&x, &x, &fw_params).unwrap() == 35.0 && dllr(&x, &x, &ll_params).unwrap() == 0.0;
        identity_ok &= evaluate(&fw_m, &x, &x, &ctx).value == 35.0 && evaluate(&ll_m, &x, &x, &ctx).value == 0.0;
        let f = evaluate(&fw_m, &x, &y, &ctx);
        let d = evaluate(&ll_m, &x, &y, &ctx);
        in_range &= f.valid && (-10.0..=35.0).contains(&f.value) && d.valid && (0.0..=2.0).contains(&d.value);
        let g = rng.random_range(0.05..5.0);
        let base = dllr(&x, &y, &ll_params).unwrap();
        gain_dev = gain_dev.max((dllr(&x.scaled(g), &y.scaled(g), &ll_params).unwrap() - base).abs());
    }
    check(
        identity_ok && in_range && gain_dev < 1e-9,
        format!("identities exact: {identity_ok}, ranges respected: {in_range}, dLLR joint-gain deviation {gain_dev:.1e}"),
    )
}

// ---------------------------------------------------------------- 10

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

fn golden_run(out: &Path, threads: usize) -> anyhow::Result<(Vec<u8>, Vec<u8>, Vec<u8>)> {
    let dir = golden_dir();
    let results = out.join("results.csv");
    cmd_measure(&dir.join("manifest.json"), &dir.join("run.toml"), Some(&results), Some(threads))?;
    cmd_correlate(&results, &dir.join("manifest.json"), out)?;
    Ok((
        std::fs::read(&results)?,
        std::fs::read(out.join("report.csv"))?,
        std::fs::read(out.join("report.md"))?,
    ))
}

fn golden_run_check() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<_> = [(8, "a"), (8, "b"), (1, "c")]
        .iter()
        .map(|&(t, name)| {
            let d = tmp.path().join(name);
            std::fs::create_dir_all(&d).unwrap();
            golden_run(&d, t).unwrap()
        })
        .collect();
    let stable = runs[0] == runs[1] && runs[0] == runs[2];

    let manifest = aqm_cli::manifest::Manifest::load(&golden_dir().join("manifest.json")).unwrap();
    let rows = aqm_cli::results::read_results(runs[0].0.as_slice()).unwrap();
    let report = aqm_cli::commands::correlate(&manifest, &rows).unwrap().report;
    let mut failures = Vec::new();
    for row in &report.rows {
        let cell = row.cells[0].as_ref().unwrap();
        if cell.tau_prime_abs() != 1.0 {
            failures.push(format!("{}: |τ′| = {}", row.measure, cell.tau_prime_abs()));
        }
        // system means must be strictly ordered A, B, C
        let mean = |sys: &str| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.measure == row.measure && r.condition_id == sys)
                .filter_map(|r| r.value)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (a, b, c) = (mean("sysA"), mean("sysB"), mean("sysC"));
        if !((a > b && b > c) || (a < b && b < c)) {
            failures.push(format!("{}: system means {a} {b} {c}", row.measure));
        }
    }
    check(
        stable && failures.is_empty() && report.rows.len() == 10,
        format!(
            "{} measures, all |τ′| = 1 and systems ordered: {}, byte-stable across runs and 1 vs 8 threads: {stable}",
            report.rows.len(),
            if failures.is_empty() { "yes".to_string() } else { failures.join("; ") }
        ),
    )
}

// ---------------------------------------------------------------- 11

fn sisec08_sdr() -> Verdict {
    let Ok(manifest) = std::env::var("AQM_SISEC08_MANIFEST") else {
        return Skip("set AQM_SISEC08_MANIFEST to a manifest of the SiSEC08 listening test to run".into());
    };
    let test_id = std::env::var("AQM_SISEC08_TEST").unwrap_or_else(|_| "SiSEC08".into());
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("run.toml");
    std::fs::write(&config, "[[measures]]\nname = \"sdr\"\n").unwrap();
    let results = tmp.path().join("results.csv");
    if let Err(e) = cmd_measure(Path::new(&manifest), &config, Some(&results), None) {
        return Fail(format!("measure failed: {e:#}"));
    }
    let out = match cmd_correlate(&results, Path::new(&manifest), tmp.path()) {
        Ok(o) => o,
        Err(e) => return Fail(format!("correlate failed: {e:#}")),
    };
    let cell = out
        .report
        .rows
        .iter()
        .flat_map(|r| r.cells.iter().flatten())
        .find(|c| c.measure == "sdr" && c.test_id == test_id);
    match cell {
        Some(c) => check((c.rho_abs() - 0.63).abs() <= 0.05, format!("SDR |ρ| = {:.3} (target 0.63 ± 0.05), cell {}", c.rho_abs(), c.text())),
        None => Fail(format!("no sdr cell for test {test_id:?}")),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("Pearson and Kendall match brute-force oracles", correlation_oracles),
        ("τ′ spot values", tau_prime_spots),
        ("Fisher-z round trip and aggregation idempotence", fisher_round_trip),
        ("SI energy identity", si_energy_identity),
        ("decomposition reconstruction and orthogonality", reconstruction_and_orthogonality),
        ("FIR filter forgiveness and runtime", filter_forgiveness),
        ("ratio clamping on adversarial inputs", clamping),
        ("SA-wrapper limits", sa_wrapper_limits),
        ("fwSNRseg and dLLR identities", speech_identities),
        ("golden end-to-end run", golden_run_check),
        ("SiSEC08 SDR Pearson cell (external data)", sisec08_sdr),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Fail(format!("panicked: {msg}"))
        });
        let (tag, detail) = match verdict {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Skip(d) => ("SKIP", d),
        };
        println!("criterion {:>2} {tag}: {name} ({detail}) [{:.1} s]", i + 1, start.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
