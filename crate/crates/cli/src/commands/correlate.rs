use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{bail, Context, Result};
use aqm_core::stats::{build_report, CorrelationCell, CorrelationReport};

use crate::manifest::{ItemKey, Manifest};
use crate::results::{read_results, ResultRow};

#[derive(Debug, Clone)]
pub struct CorrelateOutput {
    pub report: CorrelationReport,
    /// Problems with the inputs, in addition to the report's own warnings.
    pub warnings: Vec<String>,
}

/// Reads results and manifest and writes `report.csv` and `report.md`.
pub fn cmd_correlate(results: &Path, manifest: &Path, out_dir: &Path) -> Result<CorrelateOutput> {
    let manifest = Manifest::load(manifest)?;
    let file = std::fs::File::open(results).with_context(|| format!("cannot read {}", results.display()))?;
    let rows = read_results(std::io::BufReader::new(file)).with_context(|| format!("{}", results.display()))?;
    let out = correlate(&manifest, &rows)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    std::fs::write(out_dir.join("report.csv"), out.report.to_csv()?)?;
    std::fs::write(out_dir.join("report.md"), out.report.to_markdown())?;
    Ok(out)
}

/// Builds the report. Invalid results are dropped pairwise per measure;
/// a measure without any row for a test gets no cell there.
pub fn correlate(manifest: &Manifest, rows: &[ResultRow]) -> Result<CorrelateOutput> {
    let known: BTreeSet<ItemKey> = manifest.items().map(|(k, _)| k).collect();
    let mut values: BTreeMap<(&str, ItemKey), Option<f64>> = BTreeMap::new();
    let mut unknown = BTreeSet::new();
    for r in rows {
        let key = ItemKey {
            test_id: r.test_id.clone(),
            item_id: r.item_id.clone(),
            condition_id: r.condition_id.clone(),
        };
        if !known.contains(&key) {
            unknown.insert(key.to_string());
            continue;
        }
        if values.insert((r.measure.as_str(), key.clone()), r.value.filter(|_| r.valid)).is_some() {
            bail!("two results for {} on {key}", r.measure);
        }
    }
    let measures: BTreeSet<&str> = values.keys().map(|(m, _)| *m).collect();
    if measures.is_empty() {
        bail!("no results match the manifest");
    }

    let mut cells = Vec::new();
    for &m in &measures {
        for test in &manifest.tests {
            let mut seen_any = false;
            let (mut x, mut y) = (Vec::new(), Vec::new());
            for it in &test.items {
                let key = ItemKey {
                    test_id: test.test_id.clone(),
                    item_id: it.item_id.clone(),
                    condition_id: it.condition_id.clone(),
                };
                if let Some(v) = values.get(&(m, key)) {
                    seen_any = true;
                    if let Some(v) = v {
                        x.push(it.score_mean);
                        y.push(*v);
                    }
                }
            }
            if seen_any {
                cells.push(CorrelationCell::compute(m, &test.test_id, &x, &y, test.is_excluded(m)));
            }
        }
    }
    let tests: Vec<String> = manifest.tests.iter().map(|t| t.test_id.clone()).collect();
    let report = build_report(cells, &tests)?;
    let warnings = unknown
        .into_iter()
        .map(|k| format!("results for {k} have no manifest entry and were ignored"))
        .collect();
    Ok(CorrelateOutput { report, warnings })
}
