//! Three-dimensional FFTs on cubic grids, built from `rustfft` line transforms.
//!
//! `forward` implements `f̂(k) = Σₓ e^{+ik·x} f(x)` (unscaled), `inverse` the
//! matching `f(x) = n⁻³ Σₖ e^{−ik·x} f̂(k)`. Every line transform is independent,
//! so results do not depend on scheduling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft3 {
    n: usize,
    plus: Arc<dyn Fft<f64>>,
    minus: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        // rustfft's "inverse" direction uses e^{+2πi jk/n}
        let plus = planner.plan_fft_inverse(n);
        let minus = planner.plan_fft_forward(n);
        Self { n, plus, minus }
    }

    /// Process-wide plan cache keyed by the axis length.
    pub fn shared(n: usize) -> Arc<Fft3> {
        static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
        let plans = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = plans.lock().expect("fft plan cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(Fft3::new(n))).clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.plus);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.minus);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer length does not match grid");
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); n * n];

        // last axis is contiguous
        plan.process_with_scratch(data, &mut scratch);

        // middle axis: transpose each plane
        for plane in data.chunks_exact_mut(n * n) {
            transpose_into(plane, &mut buf, n);
            plan.process_with_scratch(&mut buf, &mut scratch);
            transpose_into(&buf, plane, n);
        }

        // first axis: gather the (i, l) slab for each j
        for j in 0..n {
            for i in 0..n {
                let row = &data[(i * n + j) * n..(i * n + j + 1) * n];
                for (l, z) in row.iter().enumerate() {
                    buf[l * n + i] = *z;
                }
            }
            plan.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                let row = &mut data[(i * n + j) * n..(i * n + j + 1) * n];
                for (l, z) in row.iter_mut().enumerate() {
                    *z = buf[l * n + i];
                }
            }
        }
    }
}

fn transpose_into(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in 0..n {
            dst[c * n + r] = src[r * n + c];
        }
    }
}
