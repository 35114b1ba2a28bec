//! Time integration of the stiff Galerkin systems.
//!
//! Two schemes: classical RK4 on the full tendency (subject to the
//! explicit stability limit of the dissipation term) and an
//! integrating-factor RK4 in which the linear part is applied through the
//! exact per-mode decay factor `exp(-4 pi^2 nu |k|^alpha h)`, leaving only
//! the nonlinearity and forcing to the explicit stages. All decay factors
//! are of the form `exp(-x)` with `x >= 0`, so no stage can overflow.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Galerkin2D, Galerkin3D, PhysicalParams};
use crate::state::{Spectrum2D, Spectrum3D};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    IfRk4,
    Rk4,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub observer_stride: usize,
}

#[derive(Debug, Error)]
pub enum StepError {
    #[error("step {dt} exceeds the explicit stability bound {bound} for rk4")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("step size must be positive, got {dt}")]
    NonPositiveStep { dt: f64 },
}

#[derive(Debug, Error)]
pub enum RunError<St> {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("non-finite amplitude detected at t = {t}; last good state attached")]
    Diverged { t: f64, last_good: Box<St> },
}

/// Largest stable plain-RK4 step for the stiffest retained mode:
/// `c / (4 pi^2 nu K_max^alpha)` with `c = 2.7`, inside the RK4 real-axis
/// stability interval (about 2.785).
pub fn stability_bound(params: &PhysicalParams, k_max: f64) -> f64 {
    let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    2.7 / (four_pi_sq * params.nu * k_max.powf(params.alpha))
}

/// Linear-combination and per-slot scaling operations the stepper needs.
pub trait StateOps: Clone {
    /// `self += c * other`.
    fn axpy(&mut self, c: f64, other: &Self);
    /// Componentwise multiply by one factor per canonical slot.
    fn scale_slots(&mut self, factors: &[f64]);
    fn all_finite(&self) -> bool;
}

pub trait System {
    type State: StateOps;
    /// Tendency without the stiff linear term (nonlinearity plus forcing).
    fn stiff_free_rhs(&self, s: &Self::State, t: f64) -> Self::State;
    /// Full tendency.
    fn rhs(&self, s: &Self::State, t: f64) -> Self::State;
    /// `exp(-lambda_k dt)` per canonical slot.
    fn decay_factors(&self, dt: f64) -> Vec<f64>;
    fn k_max(&self) -> f64;
    fn params(&self) -> &PhysicalParams;
}

impl StateOps for Spectrum2D {
    fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.amps_mut().iter_mut().zip(other.amps()) {
            *a += b * c;
        }
    }

    fn scale_slots(&mut self, factors: &[f64]) {
        for (a, &f) in self.amps_mut().iter_mut().zip(factors) {
            *a *= f;
        }
    }

    fn all_finite(&self) -> bool {
        Spectrum2D::all_finite(self)
    }
}

impl StateOps for Spectrum3D {
    fn axpy(&mut self, c: f64, other: &Self) {
        for (a, b) in self.amps_mut().iter_mut().zip(other.amps()) {
            for i in 0..3 {
                a[i] += b[i] * c;
            }
        }
    }

    fn scale_slots(&mut self, factors: &[f64]) {
        for (a, &f) in self.amps_mut().iter_mut().zip(factors) {
            for c in a.iter_mut() {
                *c *= f;
            }
        }
    }

    fn all_finite(&self) -> bool {
        Spectrum3D::all_finite(self)
    }
}

impl System for Galerkin2D {
    type State = Spectrum2D;

    fn stiff_free_rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        Galerkin2D::stiff_free_rhs(self, s, t)
    }

    fn rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        Galerkin2D::rhs(self, s, t)
    }

    fn decay_factors(&self, dt: f64) -> Vec<f64> {
        Galerkin2D::decay_factors(self, dt)
    }

    fn k_max(&self) -> f64 {
        self.trunc().k_max()
    }

    fn params(&self) -> &PhysicalParams {
        &self.params
    }
}

impl System for Galerkin3D {
    type State = Spectrum3D;

    fn stiff_free_rhs(&self, s: &Spectrum3D, t: f64) -> Spectrum3D {
        Galerkin3D::stiff_free_rhs(self, s, t)
    }

    fn rhs(&self, s: &Spectrum3D, t: f64) -> Spectrum3D {
        Galerkin3D::rhs(self, s, t)
    }

    fn decay_factors(&self, dt: f64) -> Vec<f64> {
        Galerkin3D::decay_factors(self, dt)
    }

    fn k_max(&self) -> f64 {
        self.trunc().k_max()
    }

    fn params(&self) -> &PhysicalParams {
        &self.params
    }
}

fn rk4_step<S: System>(sys: &S, s: &S::State, t: f64, dt: f64) -> S::State {
    let k1 = sys.rhs(s, t);
    let mut s2 = s.clone();
    s2.axpy(0.5 * dt, &k1);
    let k2 = sys.rhs(&s2, t + 0.5 * dt);
    let mut s3 = s.clone();
    s3.axpy(0.5 * dt, &k2);
    let k3 = sys.rhs(&s3, t + 0.5 * dt);
    let mut s4 = s.clone();
    s4.axpy(dt, &k3);
    let k4 = sys.rhs(&s4, t + dt);
    let mut out = s.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    out
}

fn if_rk4_step<S: System>(
    sys: &S,
    s: &S::State,
    t: f64,
    dt: f64,
    half: &[f64],
    full: &[f64],
) -> S::State {
    // RK4 applied in the variable v(tau) = exp(L tau) w(t + tau), written
    // out in w so that only decaying exponentials appear
    let f1 = sys.stiff_free_rhs(s, t);

    let mut u2 = s.clone();
    u2.axpy(0.5 * dt, &f1);
    u2.scale_slots(half);
    let f2 = sys.stiff_free_rhs(&u2, t + 0.5 * dt);

    let mut u3 = s.clone();
    u3.scale_slots(half);
    u3.axpy(0.5 * dt, &f2);
    let f3 = sys.stiff_free_rhs(&u3, t + 0.5 * dt);

    let mut u4 = s.clone();
    u4.scale_slots(full);
    let mut f3_half = f3.clone();
    f3_half.scale_slots(half);
    u4.axpy(dt, &f3_half);
    let f4 = sys.stiff_free_rhs(&u4, t + dt);

    let mut out = s.clone();
    out.scale_slots(full);
    let mut f1_full = f1;
    f1_full.scale_slots(full);
    out.axpy(dt / 6.0, &f1_full);
    let mut f2_half = f2;
    f2_half.scale_slots(half);
    out.axpy(dt / 3.0, &f2_half);
    out.axpy(dt / 3.0, &f3_half);
    out.axpy(dt / 6.0, &f4);
    out
}

/// One step of the selected scheme from `t` to `t + dt`.
pub fn step<S: System>(
    sys: &S,
    s: &S::State,
    t: f64,
    dt: f64,
    scheme: Scheme,
) -> Result<S::State, StepError> {
    if !(dt > 0.0) {
        return Err(StepError::NonPositiveStep { dt });
    }
    match scheme {
        Scheme::Rk4 => {
            let bound = stability_bound(sys.params(), sys.k_max());
            if dt > bound {
                return Err(StepError::StabilityViolation { dt, bound });
            }
            Ok(rk4_step(sys, s, t, dt))
        }
        Scheme::IfRk4 => {
            let half = sys.decay_factors(0.5 * dt);
            let full = sys.decay_factors(dt);
            Ok(if_rk4_step(sys, s, t, dt, &half, &full))
        }
    }
}

pub struct RunResult<St> {
    pub final_state: St,
    pub final_t: f64,
    pub steps: usize,
}

/// Advances from `t = 0` to `control.t_end` with fixed steps, invoking the
/// observer at `t = 0`, every `observer_stride` steps, and at the end.
/// Fails fast on non-finite amplitudes, returning the last good state.
pub fn run<S, F>(
    sys: &S,
    state0: S::State,
    control: &StepControl,
    mut observe: F,
) -> Result<RunResult<S::State>, RunError<S::State>>
where
    S: System,
    F: FnMut(usize, f64, &S::State),
{
    if control.t_end < 0.0 {
        return Err(StepError::NonPositiveStep { dt: control.t_end }.into());
    }
    observe(0, 0.0, &state0);
    if control.t_end == 0.0 {
        return Ok(RunResult {
            final_state: state0,
            final_t: 0.0,
            steps: 0,
        });
    }
    if !(control.dt > 0.0) {
        return Err(StepError::NonPositiveStep { dt: control.dt }.into());
    }
    if control.scheme == Scheme::Rk4 {
        let bound = stability_bound(sys.params(), sys.k_max());
        if control.dt > bound {
            return Err(StepError::StabilityViolation {
                dt: control.dt,
                bound,
            }
            .into());
        }
    }
    let n_full = (control.t_end / control.dt + 1e-9).floor() as usize;
    let remainder = control.t_end - n_full as f64 * control.dt;
    let stride = control.observer_stride.max(1);

    let (half, full) = match control.scheme {
        Scheme::IfRk4 => (
            sys.decay_factors(0.5 * control.dt),
            sys.decay_factors(control.dt),
        ),
        Scheme::Rk4 => (Vec::new(), Vec::new()),
    };

    let mut state = state0;
    let mut steps = 0usize;
    let mut t = 0.0;
    for i in 0..n_full {
        t = i as f64 * control.dt;
        let next = match control.scheme {
            Scheme::Rk4 => rk4_step(sys, &state, t, control.dt),
            Scheme::IfRk4 => if_rk4_step(sys, &state, t, control.dt, &half, &full),
        };
        if !next.all_finite() {
            return Err(RunError::Diverged {
                t: t + control.dt,
                last_good: Box::new(state),
            });
        }
        state = next;
        steps += 1;
        t = (i + 1) as f64 * control.dt;
        if steps % stride == 0 && !(remainder <= 1e-12 && i + 1 == n_full) {
            observe(steps, t, &state);
        }
    }
    if remainder > 1e-12 {
        let next = step(sys, &state, t, remainder, control.scheme)?;
        if !next.all_finite() {
            return Err(RunError::Diverged {
                t: control.t_end,
                last_good: Box::new(state),
            });
        }
        state = next;
        steps += 1;
    }
    observe(steps, control.t_end, &state);
    Ok(RunResult {
        final_state: state,
        final_t: control.t_end,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingSpec;
    use crate::lattice::{TruncationSet, WaveVector};
    use num_complex::Complex64;
    use std::sync::Arc;

    fn single_mode_system(nu: f64, alpha: f64) -> (Galerkin2D, Spectrum2D) {
        let trunc = Arc::new(TruncationSet::<2>::disk(1.0).unwrap());
        let sys = Galerkin2D::new(
            Arc::clone(&trunc),
            PhysicalParams::new(nu, alpha).unwrap(),
            ForcingSpec::zero(),
        );
        let s = Spectrum2D::from_modes(
            trunc,
            [(WaveVector::new([1, 0]), Complex64::new(0.8, -0.3))],
        )
        .unwrap();
        (sys, s)
    }

    #[test]
    fn stability_bound_formula() {
        let p = PhysicalParams::new(1.0, 2.0).unwrap();
        let b = stability_bound(&p, 4.0);
        let expected = 2.7 / (4.0 * std::f64::consts::PI.powi(2) * 16.0);
        assert!((b - expected).abs() < 1e-18);
        // 10x smaller viscosity gives a 10x larger bound
        let p2 = PhysicalParams::new(0.1, 2.0).unwrap();
        assert!((stability_bound(&p2, 4.0) - 10.0 * b).abs() < 1e-13 * b);
        // doubling K_max with alpha = 2 divides the bound by 4
        assert!((stability_bound(&p, 8.0) - b / 4.0).abs() < 1e-18);
    }

    #[test]
    fn rk4_rejects_unstable_step() {
        let (sys, s) = single_mode_system(1.0, 2.0);
        let bound = stability_bound(sys.params(), sys.k_max());
        assert!(matches!(
            step(&sys, &s, 0.0, bound * 1.01, Scheme::Rk4),
            Err(StepError::StabilityViolation { .. })
        ));
        assert!(step(&sys, &s, 0.0, bound * 0.9, Scheme::Rk4).is_ok());
    }

    #[test]
    fn integrating_factor_is_exact_on_linear_flow() {
        let (sys, s) = single_mode_system(0.7, 2.4);
        let dt = 0.013;
        let stepped = step(&sys, &s, 0.0, dt, Scheme::IfRk4).unwrap();
        let k = WaveVector::new([1, 0]);
        let exact = s.amp(k) * (-sys.params.dissipation_rate(k) * dt).exp();
        let got = stepped.amp(k);
        assert!(
            (got - exact).norm() <= 1e-14 * exact.norm(),
            "per-step relative error {}",
            (got - exact).norm() / exact.norm()
        );
    }

    #[test]
    fn zero_state_is_fixed_point_for_both_schemes() {
        let trunc = Arc::new(TruncationSet::<2>::disk(2.0).unwrap());
        let sys = Galerkin2D::new(
            Arc::clone(&trunc),
            PhysicalParams::new(1.0, 2.0).unwrap(),
            ForcingSpec::zero(),
        );
        let s = Spectrum2D::zeros(trunc);
        for scheme in [Scheme::IfRk4, Scheme::Rk4] {
            let out = step(&sys, &s, 0.0, 1e-3, scheme).unwrap();
            assert!(out.amps().iter().all(|a| a.norm() == 0.0));
        }
    }

    #[test]
    fn run_with_zero_horizon_returns_initial_state() {
        let (sys, s) = single_mode_system(1.0, 2.0);
        let control = StepControl {
            dt: 0.01,
            scheme: Scheme::IfRk4,
            t_end: 0.0,
            observer_stride: 1,
        };
        let mut calls = 0;
        let out = run(&sys, s.clone(), &control, |_, _, _| calls += 1).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(calls, 1);
        assert_eq!(out.final_state.amps()[0], s.amps()[0]);
    }

    #[test]
    fn isolated_mode_run_matches_closed_form_decay() {
        let (sys, s) = single_mode_system(0.5, 2.0);
        let control = StepControl {
            dt: 0.02,
            scheme: Scheme::IfRk4,
            t_end: 1.0,
            observer_stride: 10,
        };
        let k = WaveVector::new([1, 0]);
        let w0 = s.amp(k);
        let lambda = sys.params.dissipation_rate(k);
        let mut worst = 0.0f64;
        let out = run(&sys, s, &control, |_, t, state| {
            let exact = w0 * (-lambda * t).exp();
            let err = (state.amp(k) - exact).norm() / exact.norm();
            worst = worst.max(err);
        })
        .unwrap();
        assert_eq!(out.steps, 50);
        assert!(worst <= 1e-12, "observed relative error {worst}");
    }

    #[test]
    fn observer_sees_monotone_times_and_final_point() {
        let (sys, s) = single_mode_system(1.0, 2.0);
        let control = StepControl {
            dt: 0.01,
            scheme: Scheme::IfRk4,
            t_end: 0.095, // forces a partial final step
            observer_stride: 3,
        };
        let mut times = Vec::new();
        run(&sys, s, &control, |_, t, _| times.push(t)).unwrap();
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*times.first().unwrap(), 0.0);
        assert!((times.last().unwrap() - 0.095).abs() < 1e-15);
    }
}
