use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::aggregate::{aggregate, aggregate_diff_significant, AggregatedScore, TestCoefficient};
use super::correlation::{kendall, pearson, tau_prime};
use super::significance::{corr_significance, CorrelationKind, ALPHA};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// Constant scores or outputs; reported as zero correlation.
    Degenerate,
    /// Too few valid pairs; left out of the aggregate.
    NotAvailable,
}

/// Correlation of one measure with the ground truth on one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCell {
    pub measure: String,
    pub test_id: String,
    pub n: usize,
    pub status: CellStatus,
    /// Signed; `NaN` when not available.
    pub rho: f64,
    pub tau: f64,
    pub tau_prime: f64,
    pub rho_significant: bool,
    pub tau_significant: bool,
    /// Left out of this measure's aggregate (development data).
    pub excluded: bool,
    pub note: Option<String>,
}

impl CorrelationCell {
    /// Computes the cell from paired scores `x` and outputs `y`.
    pub fn compute(measure: &str, test_id: &str, x: &[f64], y: &[f64], excluded: bool) -> Self {
        let mut cell = Self {
            measure: measure.to_string(),
            test_id: test_id.to_string(),
            n: x.len().min(y.len()),
            status: CellStatus::Ok,
            rho: f64::NAN,
            tau: f64::NAN,
            tau_prime: f64::NAN,
            rho_significant: false,
            tau_significant: false,
            excluded,
            note: None,
        };
        let tau = match kendall(x, y) {
            Ok(t) => t,
            Err(e) => {
                cell.status = CellStatus::NotAvailable;
                cell.note = Some(e.to_string());
                return cell;
            }
        };
        cell.tau = tau;
        cell.tau_prime = tau_prime(tau);
        match pearson(x, y) {
            Ok(r) => cell.rho = r,
            Err(Error::Degenerate(msg)) => {
                cell.status = CellStatus::Degenerate;
                cell.rho = 0.0;
                cell.note = Some(msg);
                return cell;
            }
            Err(e) => unreachable!("inputs already validated: {e}"),
        }
        if cell.n >= 4 {
            cell.rho_significant = corr_significance(cell.rho, CorrelationKind::Pearson, cell.n).unwrap_or(false);
            cell.tau_significant = corr_significance(tau, CorrelationKind::Kendall, cell.n).unwrap_or(false);
        }
        cell
    }

    pub fn rho_abs(&self) -> f64 {
        self.rho.abs()
    }

    pub fn tau_prime_abs(&self) -> f64 {
        self.tau_prime.abs()
    }

    /// Table text such as `94* 95*`, `0 0` or `61 70 (†)`.
    pub fn text(&self) -> String {
        let mut s = match self.status {
            CellStatus::NotAvailable => "n/a".to_string(),
            _ => format!(
                "{}{} {}{}",
                format_percent(self.rho),
                if self.rho_significant { "*" } else { "" },
                format_percent(self.tau_prime),
                if self.tau_significant { "*" } else { "" },
            ),
        };
        if self.excluded {
            s.push_str(" (†)");
        }
        s
    }
}

/// `|v|` in percent, rounded half away from zero: 0.937 gives "94".
pub fn format_percent(v: f64) -> String {
    format!("{}", (v.abs() * 100.0).round() as i64)
}

/// One measure's line in the ranked report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub rank: usize,
    pub measure: String,
    /// Aligned with [`CorrelationReport::tests`].
    pub cells: Vec<Option<CorrelationCell>>,
    pub aggregate: Option<AggregatedScore>,
    /// Symbol shared with the nearest lower-ranked measure whose aggregate
    /// differs significantly.
    pub column_a: Option<String>,
    pub column_b: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub tests: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub warnings: Vec<String>,
}

const VARIANCE_MODEL: &str = "z variance sum(1/(n_i-3))/k^2";

fn symbol(i: usize) -> String {
    let letters = b"abcdefghijklmnopqrstuvwxyz";
    let mut s = String::new();
    let mut i = i + 1;
    while i > 0 {
        i -= 1;
        s.insert(0, letters[i % 26] as char);
        i /= 26;
    }
    s
}

/// Assembles the ranked report.
///
/// Rows are sorted by aggregated ρ̄ descending, then τ̄′ descending, then
/// measure name; measures without an aggregate come last. Columns follow
/// `tests`, with tests only seen in `cells` appended in sorted order.
pub fn build_report(cells: Vec<CorrelationCell>, tests: &[String]) -> Result<CorrelationReport> {
    let mut test_order: Vec<String> = tests.to_vec();
    let known: BTreeSet<&String> = tests.iter().collect();
    let extra: BTreeSet<String> = cells
        .iter()
        .filter(|c| !known.contains(&c.test_id))
        .map(|c| c.test_id.clone())
        .collect();
    test_order.extend(extra);
    let column: BTreeMap<&str, usize> = test_order.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

    let mut by_measure: BTreeMap<String, Vec<Option<CorrelationCell>>> = BTreeMap::new();
    for cell in cells {
        let row = by_measure
            .entry(cell.measure.clone())
            .or_insert_with(|| vec![None; test_order.len()]);
        let slot = &mut row[column[cell.test_id.as_str()]];
        if slot.is_some() {
            return Err(Error::Stats(format!("two cells for {} on {}", cell.measure, cell.test_id)));
        }
        *slot = Some(cell);
    }

    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for (measure, cells) in by_measure {
        let mut coefs = Vec::new();
        let mut exclusions = BTreeSet::new();
        for c in cells.iter().flatten() {
            if c.status == CellStatus::NotAvailable {
                warnings.push(format!(
                    "{measure} on {}: n/a ({}), left out of the aggregate",
                    c.test_id,
                    c.note.as_deref().unwrap_or("")
                ));
                continue;
            }
            if c.status == CellStatus::Degenerate {
                warnings.push(format!("{measure} on {}: degenerate, counted as 0", c.test_id));
            }
            if c.excluded {
                exclusions.insert(c.test_id.clone());
            }
            coefs.push(TestCoefficient {
                test_id: c.test_id.clone(),
                rho: c.rho,
                tau_prime: c.tau_prime,
                n: c.n,
            });
        }
        let agg = if coefs.is_empty() {
            warnings.push(format!("{measure}: no usable test, no aggregate"));
            None
        } else {
            match aggregate(&coefs, &exclusions) {
                Ok(a) => {
                    if a.clipped {
                        warnings.push(format!("{measure}: coefficient clipped before Fisher-z"));
                    }
                    Some(a)
                }
                Err(e) => {
                    warnings.push(format!("{measure}: {e}"));
                    None
                }
            }
        };
        rows.push(ReportRow {
            rank: 0,
            measure,
            cells,
            aggregate: agg,
            column_a: None,
            column_b: Vec::new(),
        });
    }

    rows.sort_by(|a, b| match (&a.aggregate, &b.aggregate) {
        (Some(x), Some(y)) => y
            .rho_bar
            .total_cmp(&x.rho_bar)
            .then(y.tau_prime_bar.total_cmp(&x.tau_prime_bar))
            .then_with(|| a.measure.cmp(&b.measure)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.measure.cmp(&b.measure),
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }

    let mut next_symbol = 0;
    for i in 0..rows.len() {
        let Some(a) = rows[i].aggregate.clone() else { continue };
        let hit = (i + 1..rows.len())
            .find(|&j| rows[j].aggregate.as_ref().is_some_and(|b| aggregate_diff_significant(&a, b)));
        if let Some(j) = hit {
            let s = symbol(next_symbol);
            next_symbol += 1;
            rows[i].column_a = Some(s.clone());
            rows[j].column_b.push(s);
        }
    }

    Ok(CorrelationReport {
        tests: test_order,
        rows,
        warnings,
    })
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

impl CorrelationReport {
    fn header_lines(&self) -> Vec<String> {
        vec![
            format!("alpha = {ALPHA} two-tailed; Pearson t-test df = n-2; Kendall normal approximation"),
            format!("aggregation: Fisher-z mean of |coefficient|; difference test: {VARIANCE_MODEL}"),
            format!("software: aqm-core {}", env!("CARGO_PKG_VERSION")),
        ]
    }

    /// Machine-readable report: `#` header lines, then one record per cell
    /// and one `aggregate` record per measure.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for line in self.header_lines() {
            let _ = writeln!(out, "# {line}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind", "rank", "measure", "test_id", "n", "status", "excluded", "rho", "tau", "tau_prime",
            "rho_significant", "tau_significant", "text", "z_variance", "column_a", "column_b",
        ])?;
        for row in &self.rows {
            let rank = row.rank.to_string();
            for c in row.cells.iter().flatten() {
                w.write_record([
                    "cell",
                    &rank,
                    &row.measure,
                    &c.test_id,
                    &c.n.to_string(),
                    status_name(c.status),
                    &c.excluded.to_string(),
                    &fmt_num(c.rho),
                    &fmt_num(c.tau),
                    &fmt_num(c.tau_prime),
                    &c.rho_significant.to_string(),
                    &c.tau_significant.to_string(),
                    &c.text(),
                    "",
                    "",
                    "",
                ])?;
            }
            let (rho, tau, text, var, n) = match &row.aggregate {
                Some(a) => (
                    fmt_num(a.rho_bar),
                    fmt_num(a.tau_prime_bar),
                    aggregate_text(a),
                    fmt_num(a.z_variance),
                    a.included_tests.len().to_string(),
                ),
                None => (String::new(), String::new(), "n/a".into(), String::new(), "0".into()),
            };
            w.write_record([
                "aggregate",
                &rank,
                &row.measure,
                "",
                &n,
                if row.aggregate.is_some() { "ok" } else { "not_available" },
                "",
                &rho,
                "",
                &tau,
                "",
                "",
                &text,
                &var,
                row.column_a.as_deref().unwrap_or(""),
                &row.column_b.join(" "),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Stats(e.to_string()))?;
        out.push_str(&String::from_utf8_lossy(&bytes));
        Ok(out)
    }

    /// Human-readable ranked table.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Correlation report\n\n");
        for line in self.header_lines() {
            let _ = writeln!(out, "- {line}");
        }
        out.push_str("\nCells give |ρ| and |τ′| in percent; `*` marks significance, `(†)` a test left out of the aggregate.\n\n");
        let mut header = vec!["Rank".to_string(), "Measure".to_string()];
        header.extend(self.tests.iter().map(|t| escape_md(t)));
        header.extend(["Aggregated".to_string(), "A".to_string(), "B".to_string()]);
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
        for row in &self.rows {
            let mut line = vec![row.rank.to_string(), escape_md(&row.measure)];
            line.extend(row.cells.iter().map(|c| c.as_ref().map_or(String::new(), |c| c.text())));
            line.push(row.aggregate.as_ref().map_or("n/a".into(), aggregate_text));
            line.push(row.column_a.clone().unwrap_or_default());
            line.push(row.column_b.join(" "));
            let _ = writeln!(out, "| {} |", line.join(" | "));
        }
        if !self.warnings.is_empty() {
            out.push_str("\n## Warnings\n\n");
            for w in &self.warnings {
                let _ = writeln!(out, "- {}", escape_md(w));
            }
        }
        out
    }
}

fn aggregate_text(a: &AggregatedScore) -> String {
    format!("{} {}", format_percent(a.rho_bar), format_percent(a.tau_prime_bar))
}

fn status_name(s: CellStatus) -> &'static str {
    match s {
        CellStatus::Ok => "ok",
        CellStatus::Degenerate => "degenerate",
        CellStatus::NotAvailable => "not_available",
    }
}

fn escape_md(s: &str) -> String {
    s.replace('|', "\\|")
}
