//! Multi-dimensional DFT over a [`GridSpec`] built from 1-D rustfft plans.
//!
//! `forward` computes Σ_x e^{−ik·x} u(x) (unnormalized); `inverse` applies
//! the conjugate sum with the 1/N factor. Every kernel in this crate is real
//! and even in k, so the sign of the exponent never shows up in results.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::GridSpec;

pub struct FftPlan {
    n: [usize; 3],
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("n", &self.n).finish()
    }
}

impl FftPlan {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.extents();
        let mut planner = FftPlanner::new();
        let dims = grid.dim();
        let fwd = (0..dims).map(|a| planner.plan_fft_forward(n[a])).collect();
        let inv = (0..dims).map(|a| planner.plan_fft_inverse(n[a])).collect();
        Self { n, fwd, inv }
    }

    fn len(&self) -> usize {
        self.n.iter().product()
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT plan");
        let [nx, ny, nz] = self.n;
        let mut buf: Vec<Complex64> = Vec::new();
        for (axis, plan) in plans.iter().enumerate() {
            let len = self.n[axis];
            if len == 1 {
                continue;
            }
            // stride of this axis in the row-major layout
            let stride = match axis {
                0 => ny * nz,
                1 => nz,
                _ => 1,
            };
            if stride == 1 {
                plan.process(data);
                continue;
            }
            // gather every line along `axis` into contiguous storage
            let lines = self.len() / len;
            buf.resize(self.len(), Complex64::default());
            let outer = match axis {
                0 => 1,
                _ => nx,
            };
            let inner = stride;
            let block = len * stride;
            let mut line = 0;
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * block + i;
                    for t in 0..len {
                        buf[line * len + t] = data[base + t * stride];
                    }
                    line += 1;
                }
            }
            debug_assert_eq!(line, lines);
            plan.process(&mut buf);
            let mut line = 0;
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * block + i;
                    for t in 0..len {
                        data[base + t * stride] = buf[line * len + t];
                    }
                    line += 1;
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// Inverse transform including the 1/N normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data);
        data
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }
}
