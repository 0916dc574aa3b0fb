use std::collections::BTreeSet;

use serde::Serialize;

use super::fisher::{clip_for_fisher, fisher_z, fisher_z_inv};
use super::significance::Z_CRITICAL;
use crate::{Error, Result};

/// One test's coefficients for one measure. Signs are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCoefficient {
    pub test_id: String,
    pub rho: f64,
    pub tau_prime: f64,
    pub n: usize,
}

/// Fisher-z mean of per-test coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedScore {
    pub rho_bar: f64,
    pub tau_prime_bar: f64,
    pub rho_z_mean: f64,
    pub tau_prime_z_mean: f64,
    /// Variance of the mean z: `Σ 1/(n_i − 3) / k²`. Infinite when a test
    /// has three or fewer pairs.
    pub z_variance: f64,
    pub included_tests: Vec<String>,
    pub excluded_tests: Vec<String>,
    /// Some coefficient had to be clipped before the transform.
    pub clipped: bool,
}

/// Sum in a fixed order (ascending) with Neumaier compensation, so the
/// result does not depend on the order of the tests.
fn ordered_sum(mut v: Vec<f64>) -> f64 {
    if v.iter().any(|x| !x.is_finite()) {
        return v.iter().sum();
    }
    v.sort_by(f64::total_cmp);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Aggregates the absolute coefficients of all tests not in `exclusions`.
pub fn aggregate(cells: &[TestCoefficient], exclusions: &BTreeSet<String>) -> Result<AggregatedScore> {
    let mut seen = BTreeSet::new();
    for c in cells {
        if !seen.insert(c.test_id.as_str()) {
            return Err(Error::Stats(format!("test {:?} listed twice", c.test_id)));
        }
    }
    let (excluded, included): (Vec<&TestCoefficient>, Vec<&TestCoefficient>) =
        cells.iter().partition(|c| exclusions.contains(&c.test_id));
    if included.is_empty() {
        return Err(Error::Stats("no test left to aggregate".into()));
    }
    let mut clipped = false;
    let mut z_of = |g: f64| -> Result<f64> {
        let (g, c) = clip_for_fisher(g.abs())?;
        clipped |= c;
        Ok(fisher_z(g))
    };
    let rho_z = included.iter().map(|c| z_of(c.rho)).collect::<Result<Vec<_>>>()?;
    let tau_z = included.iter().map(|c| z_of(c.tau_prime)).collect::<Result<Vec<_>>>()?;
    let k = included.len() as f64;
    let rho_z_mean = ordered_sum(rho_z) / k;
    let tau_prime_z_mean = ordered_sum(tau_z) / k;
    let z_variance = ordered_sum(
        included
            .iter()
            .map(|c| if c.n > 3 { 1.0 / (c.n as f64 - 3.0) } else { f64::INFINITY })
            .collect(),
    ) / (k * k);

    let ids = |v: &[&TestCoefficient]| {
        let mut ids: Vec<String> = v.iter().map(|c| c.test_id.clone()).collect();
        ids.sort();
        ids
    };
    Ok(AggregatedScore {
        rho_bar: fisher_z_inv(rho_z_mean),
        tau_prime_bar: fisher_z_inv(tau_prime_z_mean),
        rho_z_mean,
        tau_prime_z_mean,
        z_variance,
        included_tests: ids(&included),
        excluded_tests: ids(&excluded),
        clipped,
    })
}

/// `(z̄_A − z̄_B) / √(Var_A + Var_B)` on the Pearson aggregates.
pub fn aggregate_diff_statistic(a: &AggregatedScore, b: &AggregatedScore) -> f64 {
    let diff = a.rho_z_mean - b.rho_z_mean;
    if diff == 0.0 {
        return 0.0;
    }
    diff / (a.z_variance + b.z_variance).sqrt()
}

/// Whether two Pearson aggregates differ at the two-tailed 5% level.
pub fn aggregate_diff_significant(a: &AggregatedScore, b: &AggregatedScore) -> bool {
    aggregate_diff_statistic(a, b).abs() > Z_CRITICAL
}
