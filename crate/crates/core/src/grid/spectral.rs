//! Two-dimensional FFT assembled from one-dimensional row and column passes.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par::for_each_row;

/// Forward/inverse 2-D transform of a row-major `rows × cols` array.
/// The inverse is normalised so that `inverse(forward(a)) = a`.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fft2({}×{})", self.rows, self.cols)
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

fn run_rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], width: usize) {
    for_each_row(data, width, |_, row| fft.process(row));
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut p = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: p.plan_fft_forward(cols),
            row_inv: p.plan_fft_inverse(cols),
            col_fwd: p.plan_fft_forward(rows),
            col_inv: p.plan_fft_inverse(rows),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, true);
        let s = 1.0 / (self.rows * self.cols) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    fn apply(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.rows * self.cols, "FFT buffer size");
        let (rf, cf) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        run_rows(rf, data, self.cols);
        let mut t = vec![Complex64::default(); data.len()];
        transpose(data, &mut t, self.rows, self.cols);
        run_rows(cf, &mut t, self.rows);
        transpose(&t, data, self.cols, self.rows);
    }

    /// Forward transform of every row.
    pub fn rows_forward(&self, data: &mut [Complex64]) {
        run_rows(&self.row_fwd, data, self.cols);
    }

    /// Normalised inverse transform of every row.
    pub fn rows_inverse(&self, data: &mut [Complex64]) {
        run_rows(&self.row_inv, data, self.cols);
        let s = 1.0 / self.cols as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }

    /// Forward transform of a real array.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Real part of the inverse transform, written into `out`.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>, out: &mut [f64]) {
        self.inverse(&mut spec);
        for (o, z) in out.iter_mut().zip(&spec) {
            *o = z.re;
        }
    }
}

/// Signed integer frequency of FFT bin `k` out of `n` (Nyquist taken positive).
#[inline]
pub(crate) fn signed_freq(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_single_mode() {
        let (rows, cols) = (8, 16);
        let fft = Fft2::new(rows, cols);
        let vals: Vec<f64> = (0..rows * cols)
            .map(|k| {
                let (r, c) = (k / cols, k % cols);
                (std::f64::consts::TAU * (3.0 * c as f64 / cols as f64 + r as f64 / rows as f64)).cos()
            })
            .collect();
        let spec = fft.forward_real(&vals);
        // cos(3x + y) puts half the energy in bins (1, 3) and (7, 13)
        let n = (rows * cols) as f64;
        assert!((spec[cols + 3].re - n / 2.0).abs() < 1e-9);
        assert!((spec[7 * cols + 13].re - n / 2.0).abs() < 1e-9);
        let mut back = vec![0.0; vals.len()];
        fft.inverse_real(spec, &mut back);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn frequencies() {
        assert_eq!(signed_freq(0, 8), 0.0);
        assert_eq!(signed_freq(4, 8), 4.0);
        assert_eq!(signed_freq(5, 8), -3.0);
    }
}
