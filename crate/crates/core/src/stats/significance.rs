use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Two-tailed significance level.
pub const ALPHA: f64 = 0.05;

/// Two-tailed 5% critical value of the standard normal distribution.
pub const Z_CRITICAL: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    Pearson,
    Kendall,
}

/// Whether a coefficient from `n` pairs differs from zero at [`ALPHA`].
///
/// Pearson uses the t statistic with `n - 2` degrees of freedom. Kendall's
/// τ (not τ′) uses the normal approximation of its null distribution.
pub fn corr_significance(coefficient: f64, kind: CorrelationKind, n: usize) -> Result<bool> {
    if n < 4 {
        return Err(Error::Stats(format!("significance needs at least 4 pairs, got {n}")));
    }
    if !(coefficient.abs() <= 1.0) {
        return Err(Error::Stats(format!("coefficient {coefficient} outside [-1, 1]")));
    }
    let nf = n as f64;
    match kind {
        CorrelationKind::Pearson => {
            let r = coefficient.abs();
            if r == 1.0 {
                return Ok(true);
            }
            let df = nf - 2.0;
            let t = r * (df / (1.0 - r * r)).sqrt();
            let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Stats(e.to_string()))?;
            Ok(2.0 * dist.sf(t) < ALPHA)
        }
        CorrelationKind::Kendall => {
            let sd = (2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0))).sqrt();
            Ok((coefficient / sd).abs() > Z_CRITICAL)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CorrelationKind::*;

    #[test]
    fn obvious_cases() {
        for n in [4, 10, 40, 1000] {
            assert!(!corr_significance(0.0, Pearson, n).unwrap());
            assert!(!corr_significance(0.0, Kendall, n).unwrap());
        }
        assert!(corr_significance(0.99, Pearson, 40).unwrap());
        assert!(corr_significance(-0.99, Pearson, 40).unwrap());
        assert!(corr_significance(1.0, Pearson, 4).unwrap());
        assert!(corr_significance(0.5, Kendall, 40).unwrap());
    }

    #[test]
    fn pearson_critical_value_n10() {
        // critical |r| for df = 8 is 0.6319
        assert!(!corr_significance(0.631, Pearson, 10).unwrap());
        assert!(corr_significance(0.633, Pearson, 10).unwrap());
    }

    #[test]
    fn kendall_boundary() {
        let n: f64 = 20.0;
        let crit = Z_CRITICAL * (2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0))).sqrt();
        assert!(!corr_significance(crit * 0.999, Kendall, 20).unwrap());
        assert!(corr_significance(crit * 1.001, Kendall, 20).unwrap());
    }

    #[test]
    fn rejects_small_n() {
        assert!(corr_significance(0.9, Pearson, 3).is_err());
        assert!(corr_significance(1.5, Pearson, 10).is_err());
    }
}
