use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::TorusGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place d-dimensional transform, one axis at a time. The forward
/// direction divides by `M^d` so that slot 0 holds the mean.
pub(crate) fn transform(data: &mut [Complex64], grid: &TorusGrid, inverse: bool) {
    let m = grid.points();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(m)
        } else {
            p.plan_fft_forward(m)
        }
    });
    let mut line = vec![Complex64::default(); m];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for a in 0..grid.dim() {
        let stride = grid.stride(a);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, z) in line.iter_mut().enumerate() {
                    *z = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, z) in line.iter().enumerate() {
                    data[start + i * stride] = *z;
                }
            }
        }
    }
    if !inverse {
        let norm = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= norm;
        }
    }
}
