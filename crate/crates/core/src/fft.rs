//! Thin helpers over rustfft for row and column transforms of dense arrays.

use crate::C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Unnormalized transform of every row of a row-major `rows x ncols` array.
pub(crate) fn rows(data: &mut [C64], ncols: usize, inverse: bool) {
    let fft = plan(ncols, inverse);
    data.par_chunks_mut(ncols).for_each(|row| fft.process(row));
}

/// Unnormalized transform of every column of a row-major array with `ncols` columns.
pub(crate) fn cols(data: &mut [C64], ncols: usize, inverse: bool) {
    let nrows = data.len() / ncols;
    let fft = plan(nrows, inverse);
    let transformed: Vec<Vec<C64>> = (0..ncols)
        .into_par_iter()
        .map(|c| {
            let mut col: Vec<C64> = (0..nrows).map(|r| data[r * ncols + c]).collect();
            fft.process(&mut col);
            col
        })
        .collect();
    for (c, col) in transformed.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            data[r * ncols + c] = *v;
        }
    }
}

/// Signed frequency of DFT bin `j` for length `n`; the Nyquist bin maps to `None`.
pub(crate) fn signed_freq(j: usize, n: usize) -> Option<i64> {
    if 2 * j == n {
        None
    } else if 2 * j < n {
        Some(j as i64)
    } else {
        Some(j as i64 - n as i64)
    }
}

/// DFT bin holding signed frequency `k`.
pub(crate) fn bin(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}
