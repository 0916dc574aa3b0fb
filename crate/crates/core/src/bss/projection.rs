use std::ops::Range;

use rustfft::{num_complex::Complex, FftPlanner};

/// Relative Tikhonov weight: `λ = REGULARIZATION · trace(G) / dim(G)`.
const REGULARIZATION: f64 = 1e-10;
/// A squared pivot below this fraction of its diagonal entry marks the
/// basis vector as numerically dependent on the previous ones.
const DEPENDENCE_THRESHOLD: f64 = 1e-10;

/// Dense symmetric matrix, row-major with full storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Leading `n × n` block.
    pub fn leading(&self, n: usize) -> Self {
        let mut out = Self::zeros(n);
        for i in 0..n {
            out.data[i * n..(i + 1) * n].copy_from_slice(&self.row(i)[..n]);
        }
        out
    }
}

/// Cholesky factor of `G + λI` with the fixed relative regularization.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    /// Lower triangle, row-major; `None` when `G` is identically zero.
    lower: Option<Vec<f64>>,
}

impl Cholesky {
    /// Factors `G` directly when it is numerically full rank, and `G + λI`
    /// otherwise.
    pub fn factor(gram: &SymMatrix) -> Self {
        let n = gram.dim();
        let trace = gram.trace();
        if n == 0 || !(trace > 0.0) {
            return Self { dim: n, lower: None };
        }
        if let Some(lower) = try_factor(gram, 0.0, DEPENDENCE_THRESHOLD) {
            return Self {
                dim: n,
                lower: Some(lower),
            };
        }
        let mut lambda = REGULARIZATION * trace / n as f64;
        loop {
            if let Some(lower) = try_factor(gram, lambda, 0.0) {
                return Self {
                    dim: n,
                    lower: Some(lower),
                };
            }
            // only reachable through rounding; a larger ridge restores
            // definiteness
            lambda *= 10.0;
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let Some(l) = &self.lower else {
            return vec![0.0; n];
        };
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            z[i] = (rhs[i] - dot(row, &z[..i])) / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in i + 1..n {
                acc -= l[k * n + i] * x[k];
            }
            x[i] = acc / l[i * n + i];
        }
        x
    }
}

fn try_factor(gram: &SymMatrix, lambda: f64, min_relative_pivot: f64) -> Option<Vec<f64>> {
    let n = gram.dim();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let (head, tail) = l.split_at_mut(i * n);
            let row_i = &tail[..j];
            let s = if j == i {
                dot(row_i, row_i)
            } else {
                dot(row_i, &head[j * n..j * n + j])
            };
            let g = gram.get(i, j) + if i == j { lambda } else { 0.0 };
            if i == j {
                let d = g - s;
                if !(d > min_relative_pivot * g) || !d.is_finite() {
                    return None;
                }
                tail[i] = d.sqrt();
            } else {
                tail[j] = (g - s) / head[j * n + j];
            }
        }
    }
    Some(l)
}

/// Dot product with a fixed four-way accumulation order.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

/// Solves the normal equations `G c = b`, regularized when `G` is
/// numerically singular.
pub fn solve_normal_equations(gram: &SymMatrix, rhs: &[f64]) -> Vec<f64> {
    Cholesky::factor(gram).solve(rhs)
}

/// Least-squares coefficients of `y` on the span of `basis`.
pub fn solve_projection(basis: &DelayedBasis<'_>, y: &[f64]) -> Vec<f64> {
    solve_normal_equations(&basis.gram(), &basis.cross(y))
}

/// The family `b_{k,d}[n] = r_k[n - d]`, `0 <= d < taps`, truncated to the
/// common signal length. Coefficient `k * taps + d` belongs to `b_{k,d}`.
pub struct DelayedBasis<'a> {
    refs: Vec<&'a [f64]>,
    taps: usize,
    len: usize,
    spectra: Vec<Vec<Complex<f64>>>,
    fft_len: usize,
}

impl<'a> DelayedBasis<'a> {
    /// All references must have the same length and `taps >= 1`.
    pub fn new(refs: Vec<&'a [f64]>, taps: usize) -> Self {
        assert!(taps >= 1, "a delayed basis needs at least one tap");
        let len = refs.first().map_or(0, |r| r.len());
        assert!(refs.iter().all(|r| r.len() == len), "references differ in length");
        let fft_len = if taps > 1 {
            (len + taps).next_power_of_two()
        } else {
            0
        };
        let spectra = if taps > 1 {
            refs.iter().map(|r| forward(r, fft_len)).collect()
        } else {
            Vec::new()
        };
        Self {
            refs,
            taps,
            len,
            spectra,
            fft_len,
        }
    }

    pub fn dim(&self) -> usize {
        self.refs.len() * self.taps
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    /// Gram matrix `G[(k,d1),(j,d2)] = ⟨b_{k,d1}, b_{j,d2}⟩`.
    ///
    /// Lag-0 blocks come from FFT cross-correlations; the end-of-signal
    /// truncation is then removed exactly by walking each diagonal.
    pub fn gram(&self) -> SymMatrix {
        let taps = self.taps;
        let t = self.len;
        let mut g = SymMatrix::zeros(self.dim());
        for k in 0..self.refs.len() {
            for j in 0..self.refs.len() {
                // upper part (d2 >= d1) of block (k, j); the lower part is the
                // upper part of block (j, k), filled when that block is visited
                let xc = self.correlation(k, j);
                let (rk, rj) = (self.refs[k], self.refs[j]);
                for delta in 0..taps {
                    let mut v = xc[delta];
                    for d1 in 0..taps - delta {
                        let d2 = d1 + delta;
                        g.set(k * taps + d1, j * taps + d2, v);
                        // remove the sample that falls off the end at the next delay
                        if t > d1 && t >= 1 + d1 + delta {
                            v -= rk[t - 1 - d1] * rj[t - 1 - d1 - delta];
                        }
                    }
                }
            }
        }
        g
    }

    /// `⟨y, b_{k,d}⟩` for every basis vector.
    pub fn cross(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.len, "signal length differs from basis");
        if self.taps == 1 {
            return self.refs.iter().map(|r| dot(y, r)).collect();
        }
        let ys = forward(y, self.fft_len);
        let mut out = Vec::with_capacity(self.dim());
        for spec in &self.spectra {
            let prod: Vec<Complex<f64>> = ys.iter().zip(spec).map(|(a, b)| a * b.conj()).collect();
            out.extend_from_slice(&inverse(prod)[..self.taps]);
        }
        out
    }

    /// `Σ c_{k,d} b_{k,d}` over the references in `refs`, where `coefs`
    /// holds `refs.len() * taps` values laid out like the full basis.
    pub fn synthesize(&self, refs: Range<usize>, coefs: &[f64]) -> Vec<f64> {
        assert_eq!(coefs.len(), refs.len() * self.taps);
        if self.taps == 1 {
            let mut out = vec![0.0; self.len];
            for (c, k) in coefs.iter().zip(refs) {
                for (o, r) in out.iter_mut().zip(self.refs[k]) {
                    *o += c * r;
                }
            }
            return out;
        }
        let mut acc = vec![Complex::default(); self.fft_len];
        for (chunk, k) in coefs.chunks(self.taps).zip(refs) {
            let filt = forward(chunk, self.fft_len);
            for ((a, f), r) in acc.iter_mut().zip(&filt).zip(&self.spectra[k]) {
                *a += f * r;
            }
        }
        let mut out = inverse(acc);
        out.truncate(self.len);
        out
    }

    /// `X_kj(Δ) = Σ_m r_k[m + Δ] r_j[m]` for `Δ` in `0..taps`.
    fn correlation(&self, k: usize, j: usize) -> Vec<f64> {
        if self.taps == 1 {
            return vec![dot(self.refs[k], self.refs[j])];
        }
        let prod: Vec<Complex<f64>> = self.spectra[k]
            .iter()
            .zip(&self.spectra[j])
            .map(|(a, b)| a * b.conj())
            .collect();
        let mut x = inverse(prod);
        x.truncate(self.taps);
        x
    }
}

fn forward(x: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(n, Complex::default());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf
}

fn inverse(mut buf: Vec<Complex<f64>>) -> Vec<f64> {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}
