use std::cmp::Ordering;

use crate::{Error, Result};

/// Ground-truth scores `x` paired with one measure's outputs `y` for one
/// test. Pairs with an invalid measure output are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedScores {
    pub test_id: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PairedScores {
    pub fn new(test_id: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check(&x, &y)?;
        Ok(Self {
            test_id: test_id.into(),
            x,
            y,
        })
    }

    /// Keeps the pairs whose `y` is present. Fewer than three remaining
    /// pairs is an error.
    pub fn from_optional(test_id: impl Into<String>, pairs: impl IntoIterator<Item = (f64, Option<f64>)>) -> Result<Self> {
        let (x, y) = pairs.into_iter().filter_map(|(x, y)| Some((x, y?))).unzip();
        Self::new(test_id, x, y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Mismatch(format!("{} scores vs {} outputs", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Stats(format!("need at least 3 pairs, got {}", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Stats("non-finite score".into()));
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

/// Signed Pearson correlation.
///
/// A constant `x` or `y` leaves the coefficient undefined and gives
/// [`Error::Degenerate`].
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate("constant input, correlation undefined".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn sign(v: f64) -> i64 {
    match v.partial_cmp(&0.0) {
        Some(Ordering::Greater) => 1,
        Some(Ordering::Less) => -1,
        _ => 0,
    }
}

fn tau_from_k(k: i64, n: usize) -> f64 {
    let n = n as f64;
    2.0 * k as f64 / (n * (n - 1.0))
}

/// Kendall's τ by enumerating all pairs. Ties contribute nothing to the
/// concordance count and the normalisation is always `n(n-1)/2`.
pub fn kendall_direct(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let n = x.len();
    let mut k = 0i64;
    for i in 0..n - 1 {
        for j in i + 1..n {
            k += sign(x[i] - x[j]) * sign(y[i] - y[j]);
        }
    }
    Ok(tau_from_k(k, n))
}

/// Kendall's τ in O(n log n) by counting inversions.
///
/// The concordance count is an exact integer, so the result is identical to
/// [`kendall_direct`] with or without ties.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    // adding 0.0 maps -0.0 to 0.0 so that total_cmp agrees with ==
    let x: Vec<f64> = x.iter().map(|v| v + 0.0).collect();
    let y: Vec<f64> = y.iter().map(|v| v + 0.0).collect();
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |run: i64| run * (run - 1) / 2;
    let tie_pairs = |same: &dyn Fn(usize, usize) -> bool, order: &[usize]| {
        let mut total = 0i64;
        let mut run = 1i64;
        for w in order.windows(2) {
            if same(w[0], w[1]) {
                run += 1;
            } else {
                total += pairs(run);
                run = 1;
            }
        }
        total + pairs(run)
    };
    let x_ties = tie_pairs(&|a, b| x[a] == x[b], &idx);
    let joint_ties = tie_pairs(&|a, b| x[a] == x[b] && y[a] == y[b], &idx);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let discordant = merge_count(&mut ys, &mut buf);
    let sorted_y: Vec<usize> = (0..n).collect();
    let y_ties = tie_pairs(&|a, b| ys[a] == ys[b], &sorted_y);

    let k = pairs(n as i64) - x_ties - y_ties + joint_ties - 2 * discordant;
    Ok(tau_from_k(k, n))
}

/// Sorts `v` ascending and returns the number of strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut o) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[o] = v[j];
            count += (mid - i) as i64;
            j += 1;
        } else {
            buf[o] = v[i];
            i += 1;
        }
        o += 1;
    }
    buf[o..o + mid - i].copy_from_slice(&v[i..mid]);
    o += mid - i;
    buf[o..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// Maps τ onto a scale comparable with Pearson's ρ: `sin(τπ/2)`.
pub fn tau_prime(tau: f64) -> f64 {
    (tau * std::f64::consts::FRAC_PI_2).sin()
}
