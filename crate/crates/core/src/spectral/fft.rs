//! Thread-local FFT plans.
//!
//! Plans and scratch buffers are cached per thread so that pure functions on
//! fields can transform without threading a planner through every call.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    planner: FftPlanner<f64>,
    plans: HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    scratch: Vec<Complex64>,
}

thread_local! {
    static PLANS: RefCell<Plans> = RefCell::new(Plans {
        planner: FftPlanner::new(),
        plans: HashMap::new(),
        scratch: Vec::new(),
    });
}

fn with_plan(n: usize, inverse: bool, buf: &mut [Complex64]) {
    PLANS.with(|cell| {
        let mut p = cell.borrow_mut();
        let Plans {
            planner,
            plans,
            scratch,
        } = &mut *p;
        let (fwd, inv) = plans
            .entry(n)
            .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)));
        let plan = if inverse { inv } else { fwd };
        let need = plan.get_inplace_scratch_len();
        if scratch.len() < need {
            scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        plan.process_with_scratch(buf, &mut scratch[..need]);
    });
}

/// Unnormalized forward DFT, `X_k = sum_j x_j exp(-2 pi i jk/n)`.
pub(crate) fn fft(buf: &mut [Complex64]) {
    with_plan(buf.len(), false, buf);
}

/// Normalized inverse DFT (divides by `n`).
pub(crate) fn ifft(buf: &mut [Complex64]) {
    let n = buf.len();
    with_plan(n, true, buf);
    let scale = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Forward DFT of real samples.
pub(crate) fn fft_real(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    buf
}

/// Inverse DFT keeping the real part.
pub(crate) fn ifft_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    ifft(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}
