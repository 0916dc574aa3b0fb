use crate::{Error, Result};

/// All-pole model of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Lpc {
    /// Prediction polynomial `a[0..=p]` with `a[0] = 1`.
    pub coefficients: Vec<f64>,
    /// Energy of the prediction residual, `aᵀ R a`.
    pub residual_energy: f64,
}

/// Biased autocorrelation `r[0..=max_lag]`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|lag| {
            if lag >= frame.len() {
                0.0
            } else {
                frame[lag..].iter().zip(frame).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// `aᵀ R a` for the symmetric Toeplitz matrix built from `r`.
pub fn quadratic_form(a: &[f64], r: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, &ai) in a.iter().enumerate() {
        for (j, &aj) in a.iter().enumerate() {
            acc += ai * r[i.abs_diff(j)] * aj;
        }
    }
    acc
}

/// Autocorrelation-method linear prediction of order `order` via the
/// Levinson-Durbin recursion.
///
/// An all-zero frame has no model and is reported as [`Error::Degenerate`].
/// If the recursion reaches a non-positive prediction error (a perfectly
/// predictable frame) the remaining reflection coefficients are zero.
pub fn lpc(frame: &[f64], order: usize) -> Result<Lpc> {
    if frame.len() <= order {
        return Err(Error::InvalidParameter(format!(
            "frame of {} samples is too short for order {order}",
            frame.len()
        )));
    }
    let r = autocorrelation(frame, order);
    levinson_durbin(&r)
}

pub(crate) fn levinson_durbin(r: &[f64]) -> Result<Lpc> {
    let order = r.len() - 1;
    if r[0] <= 0.0 {
        return Err(Error::Degenerate("LPC of an all-zero frame".into()));
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    let mut prev = a.clone();
    for i in 1..=order {
        let acc: f64 = (1..i).map(|j| a[j] * r[i - j]).sum::<f64>() + r[i];
        let k = -acc / err;
        prev[..i].copy_from_slice(&a[..i]);
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        let next = err * (1.0 - k * k);
        if next <= 0.0 || !next.is_finite() {
            // keep the model found so far
            a[..i].copy_from_slice(&prev[..i]);
            a[i] = 0.0;
            break;
        }
        err = next;
    }
    Ok(Lpc {
        residual_energy: quadratic_form(&a, r).max(0.0),
        coefficients: a,
    })
}
