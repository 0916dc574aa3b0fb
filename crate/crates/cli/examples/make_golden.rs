//! Regenerates the golden fixture under `tests/fixtures/golden`.
//!
//! Twelve mono test signals share one target, one interferer and one noise
//! recording: `y_k = s_t + g_i(k) s_o + g_a(k) n` with both gains rising
//! with the severity level `k`. Levels 0..4 form system A, 4..8 system B and
//! 8..12 system C; the subjective score falls by 5 points per level.
//!
//! ```text
//! cargo run -p aqm-cli --example make_golden
//! ```

use std::f64::consts::PI;
use std::path::Path;

use aqm_core::signal::{save_wav_as, SampleFormat};
use aqm_core::AudioSignal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const RATE: u32 = 16000;
const LEN: usize = 24000;
const LEVELS: usize = 12;

/// Noise through two resonators, gated into syllables.
fn voice(rng: &mut ChaCha8Rng, formants: [f64; 2], syllable_hz: f64) -> Vec<f64> {
    let mut state = [[0.0f64; 2]; 2];
    let coefs: Vec<(f64, f64)> = formants
        .iter()
        .map(|f| {
            let r: f64 = 0.985;
            let w = 2.0 * PI * f / RATE as f64;
            (2.0 * r * w.cos(), -r * r)
        })
        .collect();
    let mut out = Vec::with_capacity(LEN);
    for n in 0..LEN {
        let e: f64 = StandardNormal.sample(rng);
        let mut v = 0.0;
        for (s, &(a1, a2)) in state.iter_mut().zip(&coefs) {
            let x = a1 * s[0] + a2 * s[1] + e;
            s[1] = s[0];
            s[0] = x;
            v += x;
        }
        let phase = (2.0 * PI * syllable_hz * n as f64 / RATE as f64).sin();
        out.push(v * (0.15 + 0.85 * phase.max(0.0)));
    }
    let peak = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    out.iter().map(|v| 0.5 * v / peak).collect()
}

fn write(dir: &Path, name: &str, samples: Vec<f64>) {
    let s = AudioSignal::mono(samples, RATE).expect("valid signal");
    save_wav_as(&s, dir.join(name), SampleFormat::Float32).expect("write fixture");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden");
    std::fs::create_dir_all(&dir).expect("create fixture dir");
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let target = voice(&mut rng, [500.0, 1500.0], 3.0);
    let other = voice(&mut rng, [800.0, 2300.0], 4.3);
    let noise: Vec<f64> = (0..LEN).map(|_| 0.1 * rng.random_range(-1.0..1.0)).collect();
    write(&dir, "target.wav", target.clone());
    write(&dir, "other.wav", other.clone());

    let mut items = Vec::new();
    for k in 0..LEVELS {
        let g_i = 0.06 * 1.28f64.powi(k as i32);
        let g_a = 0.04 * 1.28f64.powi(k as i32);
        let y: Vec<f64> = (0..LEN).map(|n| target[n] + g_i * other[n] + g_a * noise[n]).collect();
        let system = ["A", "B", "C"][k / 4];
        let item = k % 4 + 1;
        let file = format!("sys{system}_item{item}.wav");
        write(&dir, &file, y);
        items.push(format!(
            r#"        {{"item_id": "item{item}", "condition_id": "sys{system}", "test_path": "{file}", "ref_target_path": "target.wav", "other_ref_paths": ["other.wav"], "score_mean": {}}}"#,
            95 - 5 * k
        ));
    }
    let manifest = format!(
        "{{\n  \"tests\": [\n    {{\n      \"test_id\": \"golden\",\n      \"items\": [\n{}\n      ]\n    }}\n  ]\n}}\n",
        items.join(",\n")
    );
    std::fs::write(dir.join("manifest.json"), manifest).expect("write manifest");
    println!("wrote {}", dir.display());
}
