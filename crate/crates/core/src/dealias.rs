//! Fast-transform evaluation of the 2D quadratic tendency.
//!
//! The mode set is embedded in a periodic grid of side at least
//! `3 K_max + 1`, so products of retained modes (wavenumbers up to
//! `2 K_max`) never alias back onto retained modes: the transform result
//! equals the direct pair sum to roundoff.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::lattice::TruncationSet;
use crate::state::{velocity_from_vorticity_2d, Spectrum2D};

#[derive(Debug, Error)]
pub enum DealiasError {
    #[error("grid side {grid} is too small for exact dealiasing; need at least {needed}")]
    GridTooSmall { grid: usize, needed: usize },
}

pub struct FastNonlinearity2D {
    trunc: Arc<TruncationSet<2>>,
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FastNonlinearity2D {
    /// Smallest power-of-two grid with exact dealiasing for this set.
    pub fn default_grid(trunc: &TruncationSet<2>) -> usize {
        let needed = 3 * trunc.k_max().ceil() as usize + 1;
        needed.next_power_of_two()
    }

    pub fn new(trunc: Arc<TruncationSet<2>>, grid: usize) -> Result<Self, DealiasError> {
        let needed = 3 * trunc.k_max().ceil() as usize + 1;
        if grid < needed {
            return Err(DealiasError::GridTooSmall { grid, needed });
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid);
        let inverse = planner.plan_fft_inverse(grid);
        Ok(Self {
            trunc,
            grid,
            forward,
            inverse,
        })
    }

    pub fn with_default_grid(trunc: Arc<TruncationSet<2>>) -> Self {
        let grid = Self::default_grid(&trunc);
        Self::new(trunc, grid).expect("default grid satisfies the dealiasing bound")
    }

    fn index(&self, k: [i64; 2]) -> usize {
        let m = self.grid as i64;
        let i = k[0].rem_euclid(m) as usize;
        let j = k[1].rem_euclid(m) as usize;
        i * self.grid + j
    }

    fn fft2(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.grid;
        for row in buf.chunks_exact_mut(m) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..m {
            for i in 0..m {
                col[i] = buf[i * m + j];
            }
            plan.process(&mut col);
            for i in 0..m {
                buf[i * m + j] = col[i];
            }
        }
    }

    /// Same quadratic tendency as the direct pair sum: the advective
    /// derivative is formed on the grid and transformed back.
    pub fn nonlinear(&self, s: &Spectrum2D) -> Spectrum2D {
        debug_assert!(Arc::ptr_eq(s.trunc(), &self.trunc));
        let m = self.grid;
        let n = m * m;
        let zero = Complex64::new(0.0, 0.0);
        let mut u1 = vec![zero; n];
        let mut u2 = vec![zero; n];
        let mut d1w = vec![zero; n];
        let mut d2w = vec![zero; n];
        let vel = velocity_from_vorticity_2d(s);
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        for &k in self.trunc.members() {
            let w = s.amp(k);
            let uv = vel.get(k);
            let idx = self.index(k.components());
            let [k1, k2] = k.components();
            u1[idx] = uv[0];
            u2[idx] = uv[1];
            d1w[idx] = two_pi_i * k1 as f64 * w;
            d2w[idx] = two_pi_i * k2 as f64 * w;
        }
        self.fft2(&mut u1, &self.inverse);
        self.fft2(&mut u2, &self.inverse);
        self.fft2(&mut d1w, &self.inverse);
        self.fft2(&mut d2w, &self.inverse);
        let mut advect: Vec<Complex64> = (0..n)
            .map(|i| u1[i] * d1w[i] + u2[i] * d2w[i])
            .collect();
        self.fft2(&mut advect, &self.forward);
        let norm = 1.0 / n as f64;
        let mut out = Spectrum2D::zeros(Arc::clone(&self.trunc));
        let modes = Arc::clone(&self.trunc);
        for (slot, &k) in modes.canonical_modes().iter().enumerate() {
            let coeff = advect[self.index(k.components())] * norm;
            out.amps_mut()[slot] = two_pi_i * coeff;
        }
        out
    }
}

/// One-shot fast evaluation (plans the transforms every call; hold a
/// [`FastNonlinearity2D`] for repeated use).
pub fn nonlinear_2d_fast(s: &Spectrum2D) -> Spectrum2D {
    FastNonlinearity2D::with_default_grid(Arc::clone(s.trunc())).nonlinear(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::nonlinear_2d;
    use crate::oracle::random_spectrum_2d;

    #[test]
    fn grid_validation() {
        let trunc = Arc::new(TruncationSet::<2>::disk(8.0).unwrap());
        assert!(matches!(
            FastNonlinearity2D::new(Arc::clone(&trunc), 24),
            Err(DealiasError::GridTooSmall { needed: 25, .. })
        ));
        assert!(FastNonlinearity2D::new(trunc, 25).is_ok());
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let trunc = Arc::new(TruncationSet::<2>::disk(4.0).unwrap());
        let s = Spectrum2D::zeros(trunc);
        let n = nonlinear_2d_fast(&s);
        assert!(n.amps().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn fast_path_matches_direct_path() {
        let trunc = Arc::new(TruncationSet::<2>::disk(6.0).unwrap());
        let fast = FastNonlinearity2D::with_default_grid(Arc::clone(&trunc));
        for seed in 0..5u64 {
            let s = random_spectrum_2d(Arc::clone(&trunc), 1.0, 1.0, 1000 + seed);
            let direct = nonlinear_2d(&s);
            let quick = fast.nonlinear(&s);
            let mut err = 0.0;
            let mut scale = 0.0;
            for (a, b) in direct.amps().iter().zip(quick.amps()) {
                err += (a - b).norm_sqr();
                scale += a.norm_sqr();
            }
            let rel = (err / scale.max(1e-300)).sqrt();
            assert!(rel <= 1e-10, "relative deviation {rel}");
        }
    }
}
