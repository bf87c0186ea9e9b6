//! Closed-form PCA of the discrete Brownian covariance and its fast sine-transform product.
//!
//! For `C = Δt · min(ℓ, k)` with `N = 2d + 1` the eigenpairs are
//! `λ_k = Δt / (4 sin²((2k−1)π / 2N))` and `u_k(ℓ) = (2/√N) sin((2k−1)ℓπ / N)`.

use std::sync::Arc;

use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::TimeGrid;
use crate::scalar::Real;

/// Eigenvalues in non-increasing order with unit eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpairs<T> {
    pub values: Vec<T>,
    pub vectors: Array2<T>,
}

/// Eigenvalue `k` (0-based) of the covariance on `grid`.
pub(crate) fn eigenvalue<T: Real>(grid: &TimeGrid<T>, k: usize) -> T {
    let n = (2 * grid.steps() + 1) as f64;
    let s = T::c(((2 * k + 1) as f64) * std::f64::consts::PI / (2.0 * n)).sin();
    grid.dt() / (T::c(4.0) * s * s)
}

/// Sign that makes the largest-magnitude entry of eigenvector `k` (0-based) positive,
/// decided in exact integer arithmetic. Ties go to the smallest time index.
pub(crate) fn eigenvector_sign<T: Real>(d: usize, k: usize) -> T {
    let n = 2 * d as u64 + 1;
    let a = 2 * k as u64 + 1;
    // |sin(rπ/N)| grows as r mod 2N approaches N/2 (positive) or 3N/2 (negative).
    let mut best = (u64::MAX, true);
    for l in 1..=d as u64 {
        let r = (a * l) % (2 * n);
        let up = (2 * r).abs_diff(n);
        let down = (2 * r).abs_diff(3 * n);
        let cand = if up <= down {
            (up, true)
        } else {
            (down, false)
        };
        if cand.0 < best.0 {
            best = cand;
        }
    }
    if best.1 {
        T::one()
    } else {
        -T::one()
    }
}

/// Entry `ℓ` (0-based) of the unsigned eigenvector `k` (0-based).
#[inline]
pub(crate) fn eigenvector_entry<T: Real>(d: usize, k: usize, l: usize) -> T {
    let n = (2 * d + 1) as f64;
    let norm = T::c(2.0 / n.sqrt());
    // Reduce the angle in integers first so large d keeps full accuracy.
    let m = ((2 * k + 1) * (l + 1)) % (2 * (2 * d + 1));
    norm * T::c(m as f64 * std::f64::consts::PI / n).sin()
}

/// Eigenpairs of the Brownian covariance on an equally spaced grid, with every eigenvector
/// signed so that its largest-magnitude entry is positive (`u_1` is entrywise positive).
pub fn eigenpairs_closed_form<T: Real>(grid: &TimeGrid<T>) -> Eigenpairs<T> {
    let d = grid.steps();
    let values = (0..d).map(|k| eigenvalue(grid, k)).collect();
    let mut vectors = Array2::zeros((d, d));
    for k in 0..d {
        let s: T = eigenvector_sign(d, k);
        for l in 0..d {
            vectors[[l, k]] = s * eigenvector_entry(d, k, l);
        }
    }
    Eigenpairs { values, vectors }
}

/// `out_ℓ = (2/√N) Σ_k c_k sin((2k−1)ℓπ/N)` for `ℓ, k = 1..d`, `N = 2d+1`, in `O(d log d)`.
///
/// Substituting `m = d + 1 − k` turns the odd frequencies into
/// `(−1)^{ℓ+1} sin(2πmℓ/N)`, which is the imaginary part of a length-`N` DFT.
#[derive(Clone)]
pub struct SineTransform<T: Real> {
    d: usize,
    fft: Arc<dyn Fft<T>>,
    norm: T,
}

impl<T: Real> std::fmt::Debug for SineTransform<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("d", &self.d).finish()
    }
}

impl<T: Real> SineTransform<T> {
    pub fn new(d: usize) -> Self {
        let n = 2 * d + 1;
        let fft = FftPlanner::new().plan_fft_forward(n);
        Self {
            d,
            fft,
            norm: T::c(2.0 / (n as f64).sqrt()),
        }
    }

    pub fn len(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    /// Buffer sizes `(signal, scratch)` needed by [`SineTransform::apply`].
    pub fn buffer_lens(&self) -> (usize, usize) {
        (2 * self.d + 1, self.fft.get_inplace_scratch_len())
    }

    pub fn apply(
        &self,
        coeffs: &[T],
        out: &mut [T],
        buf: &mut [Complex<T>],
        scratch: &mut [Complex<T>],
    ) {
        let d = self.d;
        buf[0] = Complex::default();
        for m in 1..=d {
            buf[m] = Complex::new(coeffs[d - m], T::zero());
        }
        for z in &mut buf[d + 1..] {
            *z = Complex::default();
        }
        self.fft.process_with_scratch(buf, scratch);
        for (l, o) in out.iter_mut().enumerate() {
            let v = self.norm * buf[l + 1].im;
            // Index l is time step l + 1, so the sign is (−1)^{l+1}.
            *o = if l % 2 == 0 { -v } else { v };
        }
    }
}
