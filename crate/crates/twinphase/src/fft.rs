//! Minimal 2-D FFT helpers on top of rustfft.
//!
//! Forward transform is unnormalised; the inverse divides by the number of
//! samples, so `inverse(forward(x)) == x` up to rounding.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Fft2 {
    ny: usize,
    nx: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(ny: usize, nx: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            ny,
            nx,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    fn transform(&self, data: &mut Array2<Complex64>, forward: bool) {
        assert_eq!(data.dim(), (self.ny, self.nx), "Fft2 size mismatch");
        let (row, col) = if forward {
            (&self.row_fwd, &self.col_fwd)
        } else {
            (&self.row_inv, &self.col_inv)
        };

        let mut scratch = vec![Complex64::default(); row.get_inplace_scratch_len()];
        for mut r in data.rows_mut() {
            let slice = r.as_slice_mut().expect("row-major layout");
            row.process_with_scratch(slice, &mut scratch);
        }

        let mut scratch = vec![Complex64::default(); col.get_inplace_scratch_len()];
        let mut column = vec![Complex64::default(); self.ny];
        for ix in 0..self.nx {
            for iy in 0..self.ny {
                column[iy] = data[[iy, ix]];
            }
            col.process_with_scratch(&mut column, &mut scratch);
            for iy in 0..self.ny {
                data[[iy, ix]] = column[iy];
            }
        }
    }

    pub fn forward(&self, data: &mut Array2<Complex64>) {
        self.transform(data, true);
    }

    pub fn inverse(&self, data: &mut Array2<Complex64>) {
        self.transform(data, false);
        let scale = 1.0 / (self.ny * self.nx) as f64;
        data.mapv_inplace(|c| c * scale);
    }
}
