use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use aqm_core::models::{evaluate, ItemContext, Measure, MeasureResult, SourceSet};
use aqm_core::signal::load_wav;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::manifest::{Item, ItemKey, Manifest};
use crate::results::{write_results, ResultRow};

#[derive(Debug, Clone)]
pub struct MeasureOutput {
    pub rows: Vec<ResultRow>,
    pub invalid: usize,
}

/// Runs every configured measure on every manifest item and writes the
/// results CSV. Rows follow manifest order, then configuration order, for
/// any thread count.
pub fn cmd_measure(manifest: &Path, config: &Path, out: Option<&Path>, parallelism: Option<usize>) -> Result<MeasureOutput> {
    let manifest = Manifest::load(manifest)?;
    let config = RunConfig::load(config)?;
    let out = match out {
        Some(p) => p.to_path_buf(),
        None => config
            .output
            .results
            .as_ref()
            .map(|p| config.base_dir.join(p))
            .context("no output path: pass --out or set output.results")?,
    };
    let threads = parallelism.or(config.parallelism).unwrap_or_else(|| {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    });
    let measures = config.build_measures()?;
    let output = measure_rows(&manifest, &measures, threads)?;
    let file = std::fs::File::create(&out).with_context(|| format!("cannot create {}", out.display()))?;
    write_results(&output.rows, std::io::BufWriter::new(file))?;
    Ok(output)
}

pub fn measure_rows(manifest: &Manifest, measures: &[Arc<dyn Measure>], threads: usize) -> Result<MeasureOutput> {
    let items: Vec<(ItemKey, &Item)> = manifest.items().collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let per_item: Vec<Vec<ResultRow>> = pool.install(|| {
        items
            .par_iter()
            .map(|(key, item)| score_item(manifest, key, item, measures))
            .collect()
    });
    let rows: Vec<ResultRow> = per_item.into_iter().flatten().collect();
    let invalid = rows.iter().filter(|r| !r.valid).count();
    Ok(MeasureOutput { rows, invalid })
}

fn score_item(manifest: &Manifest, key: &ItemKey, item: &Item, measures: &[Arc<dyn Measure>]) -> Vec<ResultRow> {
    let row = |r: MeasureResult| ResultRow {
        test_id: key.test_id.clone(),
        item_id: key.item_id.clone(),
        condition_id: key.condition_id.clone(),
        measure: r.measure_name.clone(),
        value: r.valid_value(),
        valid: r.valid,
        note: r.failure_note.unwrap_or_default(),
    };
    let load = |p: &str| load_wav(manifest.resolve(p)).map_err(|e| format!("{p}: {e}"));
    let loaded = (|| -> Result<_, String> {
        let test = load(&item.test_path)?;
        let target = load(&item.ref_target_path)?;
        let others = item.other_ref_paths.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
        Ok((test, SourceSet { target, others }))
    })();
    let (test, sources) = match loaded {
        Ok(v) => v,
        Err(note) => {
            return measures
                .iter()
                .map(|m| row(MeasureResult::invalid(&m.descriptor().name, format!("cannot load audio: {note}"))))
                .collect()
        }
    };
    let id = key.to_string();
    let ctx = ItemContext {
        item_id: Some(&id),
        sources: Some(&sources),
    };
    measures
        .iter()
        .map(|m| row(evaluate(m.as_ref(), &sources.target, &test, &ctx)))
        .collect()
}
