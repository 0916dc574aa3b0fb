//! Dataset manifests: listening tests, their items and ground-truth scores.
//!
//! JSON is the native format. A flat CSV with one row per item can be
//! imported; see [`Manifest::from_csv`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(deserialize_with = "unique_tests")]
    pub tests: Vec<TestSet>,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// One listening test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSet {
    pub test_id: String,
    /// Measures whose aggregate must ignore this test, e.g. because the
    /// test was used to develop the measure.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exclusions: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(deserialize_with = "unique_items")]
    pub items: Vec<Item>,
}

/// One rated signal. Anchors and hidden references are expected to be
/// left out upstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Item {
    pub item_id: String,
    pub condition_id: String,
    pub test_path: String,
    pub ref_target_path: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub other_ref_paths: Vec<String>,
    /// Mean subjective score on the 0..100 scale.
    #[serde(deserialize_with = "score")]
    pub score_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ratings: Option<u32>,
}

fn score<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if !(0.0..=100.0).contains(&v) {
        return Err(serde::de::Error::custom(format!("score_mean {v} outside [0, 100]")));
    }
    Ok(v)
}

fn unique_items<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Item>, D::Error> {
    let items = Vec::<Item>::deserialize(d)?;
    let mut seen = BTreeSet::new();
    for it in &items {
        if !seen.insert((&it.item_id, &it.condition_id)) {
            return Err(serde::de::Error::custom(format!(
                "duplicate item {:?} condition {:?}",
                it.item_id, it.condition_id
            )));
        }
    }
    Ok(items)
}

fn unique_tests<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<TestSet>, D::Error> {
    let tests = Vec::<TestSet>::deserialize(d)?;
    let mut seen = BTreeSet::new();
    for t in &tests {
        if !seen.insert(&t.test_id) {
            return Err(serde::de::Error::custom(format!("duplicate test_id {:?}", t.test_id)));
        }
    }
    Ok(tests)
}

/// Identifies one rated signal across the pipeline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemKey {
    pub test_id: String,
    pub item_id: String,
    pub condition_id: String,
}

impl fmt::Display for ItemKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.test_id, self.item_id, self.condition_id)
    }
}

/// 1-based line of the first occurrence of `needle`, if any.
fn line_of(text: &str, needle: &str) -> Option<usize> {
    text.find(needle).map(|pos| text[..pos].matches('\n').count() + 1)
}

impl Manifest {
    /// Loads a `.json` or `.csv` manifest and checks that every referenced
    /// file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read manifest {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let mut m = if is_csv {
            Self::from_csv(&text).with_context(|| format!("{}", path.display()))?
        } else {
            Self::from_json(&text).with_context(|| format!("{}", path.display()))?
        };
        m.base_dir = base;
        m.check_paths(&text).with_context(|| format!("{}", path.display()))?;
        Ok(m)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| {
            anyhow::anyhow!("line {} column {}: {}", e.line(), e.column(), strip_position(&e.to_string()))
        })?;
        if m.tests.is_empty() {
            bail!("manifest lists no tests");
        }
        Ok(m)
    }

    /// Imports the flat form with header
    /// `test_id,item_id,condition_id,test_path,ref_target_path,other_ref_paths,score_mean,n_ratings,excluded_measures`.
    /// List columns are `;`-separated; `n_ratings` may be empty. A test's
    /// exclusions are the union over its rows.
    pub fn from_csv(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Row {
            test_id: String,
            item_id: String,
            condition_id: String,
            test_path: String,
            ref_target_path: String,
            other_ref_paths: String,
            score_mean: f64,
            n_ratings: Option<u32>,
            excluded_measures: String,
        }
        let split = |s: &str| -> Vec<String> {
            s.split(';').map(str::trim).filter(|p| !p.is_empty()).map(String::from).collect()
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let mut tests: Vec<TestSet> = Vec::new();
        let mut seen = BTreeSet::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| anyhow::anyhow!("{e}"))?;
            let line = rec.position().map_or(0, |p| p.line());
            let row: Row = rec
                .deserialize(Some(&headers))
                .map_err(|e| anyhow::anyhow!("line {line}: {e}"))?;
            if !(0.0..=100.0).contains(&row.score_mean) {
                bail!("line {line}: score_mean {} outside [0, 100]", row.score_mean);
            }
            if !seen.insert((row.test_id.clone(), row.item_id.clone(), row.condition_id.clone())) {
                bail!("line {line}: duplicate item {:?} condition {:?} in test {:?}", row.item_id, row.condition_id, row.test_id);
            }
            let idx = match tests.iter().position(|t| t.test_id == row.test_id) {
                Some(i) => i,
                None => {
                    tests.push(TestSet {
                        test_id: row.test_id.clone(),
                        exclusions: BTreeMap::new(),
                        notes: None,
                        items: Vec::new(),
                    });
                    tests.len() - 1
                }
            };
            let t = &mut tests[idx];
            for m in split(&row.excluded_measures) {
                t.exclusions.insert(m, true);
            }
            t.items.push(Item {
                item_id: row.item_id,
                condition_id: row.condition_id,
                test_path: row.test_path,
                ref_target_path: row.ref_target_path,
                other_ref_paths: split(&row.other_ref_paths),
                score_mean: row.score_mean,
                n_ratings: row.n_ratings,
            });
        }
        if tests.is_empty() {
            bail!("manifest lists no tests");
        }
        Ok(Self {
            tests,
            base_dir: PathBuf::new(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        self.base_dir.join(path)
    }

    /// Items in manifest order with their keys.
    pub fn items(&self) -> impl Iterator<Item = (ItemKey, &Item)> {
        self.tests.iter().flat_map(|t| {
            t.items.iter().map(move |it| {
                (
                    ItemKey {
                        test_id: t.test_id.clone(),
                        item_id: it.item_id.clone(),
                        condition_id: it.condition_id.clone(),
                    },
                    it,
                )
            })
        })
    }

    pub fn test(&self, test_id: &str) -> Option<&TestSet> {
        self.tests.iter().find(|t| t.test_id == test_id)
    }

    fn check_paths(&self, text: &str) -> Result<()> {
        let mut problems = Vec::new();
        for (key, it) in self.items() {
            let paths = [&it.test_path, &it.ref_target_path].into_iter().chain(&it.other_ref_paths);
            for p in paths {
                if !self.resolve(p).is_file() {
                    let at = line_of(text, p).map_or(String::new(), |l| format!("line {l}: "));
                    problems.push(format!("{at}{key}: file {p:?} not found"));
                }
            }
        }
        if !problems.is_empty() {
            bail!("{}", problems.join("\n"));
        }
        Ok(())
    }
}

impl TestSet {
    pub fn is_excluded(&self, measure: &str) -> bool {
        self.exclusions.get(measure).copied().unwrap_or(false)
    }
}

/// serde_json appends " at line L column C"; the caller reports it first.
fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
  "tests": [
    {
      "test_id": "t1",
      "exclusions": {"2f": true},
      "items": [
        {"item_id": "a", "condition_id": "c1", "test_path": "a1.wav", "ref_target_path": "a.wav", "score_mean": 80.5},
        {"item_id": "a", "condition_id": "c2", "test_path": "a2.wav", "ref_target_path": "a.wav",
         "other_ref_paths": ["b.wav"], "score_mean": 20, "n_ratings": 12}
      ]
    }
  ]
}"#;

    #[test]
    fn parses_and_round_trips() {
        let m = Manifest::from_json(SAMPLE).unwrap();
        assert_eq!(m.tests[0].items.len(), 2);
        assert!(m.tests[0].is_excluded("2f"));
        assert!(!m.tests[0].is_excluded("sdr"));
        let again = Manifest::from_json(&m.to_json()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = SAMPLE.replace("80.5", "180.5");
        let err = Manifest::from_json(&bad).unwrap_err().to_string();
        assert!(err.starts_with("line 7 "), "{err}");
        assert!(err.contains("outside [0, 100]"));

        let dup = SAMPLE.replace("\"c2\"", "\"c1\"");
        let err = Manifest::from_json(&dup).unwrap_err().to_string();
        assert!(err.contains("duplicate item"), "{err}");

        let unknown = SAMPLE.replace("\"n_ratings\"", "\"n_raters\"");
        let err = Manifest::from_json(&unknown).unwrap_err().to_string();
        assert!(err.starts_with("line 9 "), "{err}");
    }

    #[test]
    fn csv_import_matches_json() {
        let csv = "test_id,item_id,condition_id,test_path,ref_target_path,other_ref_paths,score_mean,n_ratings,excluded_measures\n\
                   t1,a,c1,a1.wav,a.wav,,80.5,,2f\n\
                   t1,a,c2,a2.wav,a.wav,b.wav,20,12,\n";
        assert_eq!(Manifest::from_csv(csv).unwrap(), Manifest::from_json(SAMPLE).unwrap());
        let bad = csv.replace("80.5", "-1");
        let err = Manifest::from_csv(&bad).unwrap_err().to_string();
        assert!(err.starts_with("line 2:"), "{err}");
    }

    #[test]
    fn missing_files_are_reported_with_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, SAMPLE).unwrap();
        let err = format!("{:#}", Manifest::load(&path).unwrap_err());
        assert!(err.contains("line 7: t1/a/c1: file \"a1.wav\" not found"), "{err}");
        for f in ["a1.wav", "a2.wav", "a.wav", "b.wav"] {
            std::fs::write(dir.path().join(f), b"").unwrap();
        }
        assert!(Manifest::load(&path).is_ok());
    }
}
