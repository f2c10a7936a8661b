use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::GridSpec;

// columns gathered per pass when transforming a strided axis
const BLOCK: usize = 16;

type Plan = Arc<dyn Fft<f64>>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, plans) = &mut *guard;
    let key = (len, direction == FftDirection::Forward);
    plans
        .entry(key)
        .or_insert_with(|| planner.plan_fft(len, direction))
        .clone()
}

/// Unnormalised in-place DFT over every axis of a row-major array.
pub(crate) fn transform(grid: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let shape = grid.points();
    let dim = shape.len();
    for axis in 0..dim {
        let n = shape[axis];
        let p = plan(n, direction);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        if stride == 1 {
            let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
            p.process_with_scratch(data, &mut scratch);
            continue;
        }
        let mut buf = vec![Complex64::default(); n * BLOCK];
        let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * n * stride;
            let mut col = 0;
            while col < stride {
                let width = BLOCK.min(stride - col);
                for i in 0..n {
                    let row = base + i * stride + col;
                    for b in 0..width {
                        buf[b * n + i] = data[row + b];
                    }
                }
                p.process_with_scratch(&mut buf[..width * n], &mut scratch);
                for i in 0..n {
                    let row = base + i * stride + col;
                    for b in 0..width {
                        data[row + b] = buf[b * n + i];
                    }
                }
                col += width;
            }
        }
    }
}

/// `(−1)^{k₁+…+k_d}` for each DFT index, which shifts the origin to the box centre.
pub(crate) fn centre_phase(grid: GridSpec) -> impl Fn(usize) -> f64 {
    move |flat: usize| {
        let mut rem = flat;
        let mut parity = 0usize;
        for &n in grid.points().iter().rev() {
            parity += rem % n;
            rem /= n;
        }
        if parity % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}
