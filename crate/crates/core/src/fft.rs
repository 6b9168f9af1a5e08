//! In-place N-dimensional complex FFT over row-major data.
//!
//! Every 1-D line is transformed by the same plan with the same scratch
//! layout, so results are bitwise identical regardless of how rayon splits
//! the work.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Lines gathered per block when transforming a strided axis.
const BLOCK: usize = 16;
const GROUP: usize = 64;

pub(crate) fn transform(data: &mut [Complex64], dims: &[usize], direction: FftDirection) {
    debug_assert_eq!(data.len(), dims.iter().product::<usize>());
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..dims.len() {
        let len = dims[axis];
        if len <= 1 {
            continue;
        }
        let plan = planner.plan_fft(len, direction);
        let stride: usize = dims[axis + 1..].iter().product();
        if stride == 1 {
            transform_contiguous(data, len, &plan);
        } else {
            transform_strided(data, len, stride, &plan);
        }
    }
}

fn transform_contiguous(data: &mut [Complex64], len: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    // chunks of whole lines; each line is processed independently
    let lines_per_task = (1 << 14) / len.max(1) + 1;
    data.par_chunks_mut(len * lines_per_task).for_each(|chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        for line in chunk.chunks_exact_mut(len) {
            plan.process_with_scratch(line, &mut scratch);
        }
    });
}

fn transform_strided(data: &mut [Complex64], len: usize, stride: usize, plan: &Arc<dyn Fft<f64>>) {
    let scratch_len = plan.get_inplace_scratch_len();
    let block_len = len * stride;
    data.par_chunks_mut(block_len).for_each(|block| {
        // block is a [len][stride] slab; transform down the columns
        let starts: Vec<usize> = (0..stride).step_by(BLOCK).collect();
        // bounded groups keep the gather buffers small for large slabs
        for group in starts.chunks(GROUP) {
            let results: Vec<(usize, Vec<Complex64>)> = group
                .par_iter()
                .map(|&j0| {
                    let width = BLOCK.min(stride - j0);
                    let mut buf = vec![Complex64::new(0.0, 0.0); width * len];
                    for i in 0..len {
                        let row = &block[i * stride + j0..i * stride + j0 + width];
                        for (w, v) in row.iter().enumerate() {
                            buf[w * len + i] = *v;
                        }
                    }
                    let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
                    for line in buf.chunks_exact_mut(len) {
                        plan.process_with_scratch(line, &mut scratch);
                    }
                    (j0, buf)
                })
                .collect();
            for (j0, buf) in results {
                let width = buf.len() / len;
                for i in 0..len {
                    let row = &mut block[i * stride + j0..i * stride + j0 + width];
                    for (w, v) in row.iter_mut().enumerate() {
                        *v = buf[w * len + i];
                    }
                }
            }
        }
    });
}

/// Smallest `m >= n` whose only prime factors are 2, 3 and 5.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        v * Complex64::from_polar(
                            1.0,
                            -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64,
                        )
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_2d() {
        let dims = [6, 5];
        let data: Vec<Complex64> = (0..30)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).cos()))
            .collect();
        let mut out = data.clone();
        transform(&mut out, &dims, FftDirection::Forward);
        // separable naive: rows then columns
        let mut tmp = data.clone();
        for r in 0..6 {
            let row = naive_dft(&tmp[r * 5..r * 5 + 5]);
            tmp[r * 5..r * 5 + 5].copy_from_slice(&row);
        }
        for c in 0..5 {
            let col: Vec<_> = (0..6).map(|r| tmp[r * 5 + c]).collect();
            let col = naive_dft(&col);
            for r in 0..6 {
                tmp[r * 5 + c] = col[r];
            }
        }
        for (a, b) in out.iter().zip(&tmp) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_lengths() {
        assert_eq!(next_fast_len(583), 600);
        assert_eq!(next_fast_len(256), 256);
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(1), 1);
    }
}
