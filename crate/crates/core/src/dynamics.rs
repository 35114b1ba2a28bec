//! Right-hand sides of the truncated vorticity systems.
//!
//! The convolution over ordered pairs `l1 + l2 = k` is evaluated through a
//! precomputed plan (one flat pass per tendency, fixed order, so results
//! are bit-reproducible). The quarter-turn coupling coefficient
//! `(k, l2_perp) / (l2, l2)` is an exact small rational evaluated once per
//! pair at plan build time.
//!
//! The 2D quadratic tendency is `N_k = sum w_{l1} w_{l2} (k,l2_perp)/(l2,l2)`,
//! the Fourier form of `-(u . grad w)` under the basis `exp(2 pi i (k,x))`;
//! the prefactor is real, which is forced by the reality symmetry
//! `N_{-k} = conj(N_k)` (an imaginary prefactor cannot satisfy it). The
//! transform path in [`crate::dealias`] cross-checks the sign and scale
//! against a physical-space evaluation.
//!
//! Tendencies are assembled for the canonical half only, which preserves
//! the reality constraint structurally. The 3D tendency is projected onto
//! the plane orthogonal to `k` after assembly to pin the transversality
//! invariant against floating-point drift.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forcing::ForcingSpec;
use crate::lattice::{dot, TruncationSet, WaveVector};
use crate::state::{
    project_perp, velocity_from_vorticity_3d_unchecked, Spectrum2D, Spectrum3D, StateError,
};

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("viscosity must be positive, got {nu}")]
    InvalidViscosity { nu: f64 },
    #[error("dissipation exponent must exceed 1, got {alpha}")]
    InvalidDissipationExponent { alpha: f64 },
    #[error(transparent)]
    State(#[from] StateError),
}

/// Viscosity and generalized dissipation exponent of `|grad|^alpha`.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub nu: f64,
    pub alpha: f64,
}

impl PhysicalParams {
    pub fn new(nu: f64, alpha: f64) -> Result<Self, DynamicsError> {
        let p = Self { nu, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if !(self.nu > 0.0) {
            return Err(DynamicsError::InvalidViscosity { nu: self.nu });
        }
        if !(self.alpha > 1.0) {
            return Err(DynamicsError::InvalidDissipationExponent { alpha: self.alpha });
        }
        Ok(())
    }

    /// `4 pi^2 nu |k|^alpha`.
    pub fn dissipation_rate<const D: usize>(&self, k: WaveVector<D>) -> f64 {
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        four_pi_sq * self.nu * pow_norm(k.norm_sq(), self.alpha)
    }
}

/// `(nsq)^(alpha/2)` with an exact fast path for alpha = 2.
fn pow_norm(nsq: i64, alpha: f64) -> f64 {
    let nf = nsq as f64;
    if alpha == 2.0 {
        nf
    } else {
        nf.powf(0.5 * alpha)
    }
}

/// One ordered interaction `(l1, l2)` with `l1 + l2 = k`, encoded as the
/// canonical storage slots of the two factors plus conjugation flags.
#[derive(Clone, Copy, Debug)]
struct PairEntry {
    a: u32, // slot << 1 | conjugate flag, factor at l1
    b: u32, // same encoding, factor at l2
    coeff: f64,
}

#[inline]
fn fetch(amps: &[Complex64], code: u32) -> Complex64 {
    let v = amps[(code >> 1) as usize];
    if code & 1 == 1 {
        v.conj()
    } else {
        v
    }
}

#[inline]
fn fetch_parts(re: &[f64], im: &[f64], code: u32) -> (f64, f64) {
    let slot = (code >> 1) as usize;
    if code & 1 == 1 {
        (re[slot], -im[slot])
    } else {
        (re[slot], im[slot])
    }
}

fn encode<const D: usize>(trunc: &TruncationSet<D>, k: WaveVector<D>) -> u32 {
    let (slot, conj) = trunc
        .canonical_slot(k)
        .expect("plan entries reference set members only");
    ((slot as u32) << 1) | (conj as u32)
}

/// Precomputed interaction table for a truncation set: for each canonical
/// output mode, the list of ordered pairs feeding it.
#[derive(Clone, Debug)]
pub struct ConvolutionPlan2D {
    offsets: Vec<u32>,
    entries: Vec<PairEntry>,
}

impl ConvolutionPlan2D {
    pub fn build(trunc: &TruncationSet<2>) -> Self {
        let mut offsets = Vec::with_capacity(trunc.canonical_modes().len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for &k in trunc.canonical_modes() {
            for (l1, l2) in trunc.convolution_pairs(k) {
                let coeff = dot(k, l2.perp()) as f64 / l2.norm_sq() as f64;
                entries.push(PairEntry {
                    a: encode(trunc, l1),
                    b: encode(trunc, l2),
                    coeff,
                });
            }
            offsets.push(entries.len() as u32);
        }
        Self { offsets, entries }
    }

    fn group(&self, slot: usize) -> &[PairEntry] {
        &self.entries[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }
}

#[derive(Clone, Debug)]
pub struct ConvolutionPlan3D {
    offsets: Vec<u32>,
    entries: Vec<PairEntry>, // coeff unused; interactions carry vectors
}

impl ConvolutionPlan3D {
    pub fn build(trunc: &TruncationSet<3>) -> Self {
        let mut offsets = Vec::with_capacity(trunc.canonical_modes().len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for &k in trunc.canonical_modes() {
            for (l1, l2) in trunc.convolution_pairs(k) {
                entries.push(PairEntry {
                    a: encode(trunc, l1),
                    b: encode(trunc, l2),
                    coeff: 0.0,
                });
            }
            offsets.push(entries.len() as u32);
        }
        Self { offsets, entries }
    }

    fn group(&self, slot: usize) -> &[PairEntry] {
        &self.entries[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }
}

/// 2D Galerkin system bound to one truncation set.
pub struct Galerkin2D {
    trunc: Arc<TruncationSet<2>>,
    pub params: PhysicalParams,
    pub forcing: ForcingSpec,
    plan: ConvolutionPlan2D,
}

impl Galerkin2D {
    pub fn new(trunc: Arc<TruncationSet<2>>, params: PhysicalParams, forcing: ForcingSpec) -> Self {
        let plan = ConvolutionPlan2D::build(&trunc);
        Self {
            trunc,
            params,
            forcing,
            plan,
        }
    }

    pub fn trunc(&self) -> &Arc<TruncationSet<2>> {
        &self.trunc
    }

    /// Quadratic tendency `N_k = sum w_{l1} w_{l2} (k,l2_perp)/(l2,l2)`,
    /// the advection term moved to the right-hand side.
    pub fn nonlinear(&self, s: &Spectrum2D) -> Spectrum2D {
        debug_assert!(Arc::ptr_eq(s.trunc(), &self.trunc));
        let mut out = Spectrum2D::zeros(Arc::clone(&self.trunc));
        let amps = s.amps();
        for slot in 0..self.trunc.canonical_modes().len() {
            let mut acc = Complex64::new(0.0, 0.0);
            for e in self.plan.group(slot) {
                acc += fetch(amps, e.a) * fetch(amps, e.b) * e.coeff;
            }
            out.amps_mut()[slot] = acc;
        }
        out
    }

    /// Nonlinearity plus forcing: the tendency without the stiff linear part.
    pub fn stiff_free_rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        let mut out = self.nonlinear(s);
        if !self.forcing.is_zero() {
            let modes = Arc::clone(&self.trunc);
            for (slot, &k) in modes.canonical_modes().iter().enumerate() {
                out.amps_mut()[slot] += self.forcing.sample_2d(k, t).expect("nonzero mode");
            }
        }
        out
    }

    /// Full tendency `dw_k/dt = N_k - 4 pi^2 nu |k|^alpha w_k + g_k(t)`.
    pub fn rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        let mut out = self.stiff_free_rhs(s, t);
        let modes = Arc::clone(&self.trunc);
        for (slot, &k) in modes.canonical_modes().iter().enumerate() {
            out.amps_mut()[slot] -= s.amps()[slot] * self.params.dissipation_rate(k);
        }
        out
    }

    /// `exp(-4 pi^2 nu |k|^alpha dt)` per canonical slot.
    pub fn decay_factors(&self, dt: f64) -> Vec<f64> {
        self.trunc
            .canonical_modes()
            .iter()
            .map(|&k| (-self.params.dissipation_rate(k) * dt).exp())
            .collect()
    }
}

/// Real-split tendency of the 2D system, algebraically identical to the
/// complex form under `w_k = w1_k + i w2_k` (the quadratic splits by
/// `w w' = (w1 w1' - w2 w2') + i (w1 w2' + w2 w1')`):
///
/// ```text
/// dw1_k/dt = sum [w1 w1' - w2 w2'] c(k,l2) - 4 pi^2 nu |k|^alpha w1_k + g1_k
/// dw2_k/dt = sum [w1 w2' + w2 w1'] c(k,l2) - 4 pi^2 nu |k|^alpha w2_k + g2_k
/// ```
///
/// Arrays are aligned with the canonical mode list. Computed entirely in
/// real arithmetic as an independent route for cross-validation.
pub fn rhs_2d_real_split(
    re: &[f64],
    im: &[f64],
    trunc: &TruncationSet<2>,
    params: &PhysicalParams,
    forcing: &ForcingSpec,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = trunc.canonical_modes().len();
    assert_eq!(re.len(), n);
    assert_eq!(im.len(), n);
    let plan = ConvolutionPlan2D::build(trunc);
    let mut dre = vec![0.0; n];
    let mut dim = vec![0.0; n];
    for (slot, &k) in trunc.canonical_modes().iter().enumerate() {
        let mut diag = 0.0; // w1 w1' - w2 w2'
        let mut cross = 0.0; // w1 w2' + w2 w1'
        for e in plan.group(slot) {
            let (a1, a2) = fetch_parts(re, im, e.a);
            let (b1, b2) = fetch_parts(re, im, e.b);
            diag += (a1 * b1 - a2 * b2) * e.coeff;
            cross += (a1 * b2 + a2 * b1) * e.coeff;
        }
        let lambda = params.dissipation_rate(k);
        let g = if forcing.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            forcing.sample_2d(k, t).expect("nonzero mode")
        };
        dre[slot] = diag - lambda * re[slot] + g.re;
        dim[slot] = cross - lambda * im[slot] + g.im;
    }
    (dre, dim)
}

/// 3D Galerkin system bound to one truncation set.
pub struct Galerkin3D {
    trunc: Arc<TruncationSet<3>>,
    pub params: PhysicalParams,
    pub forcing: ForcingSpec,
    plan: ConvolutionPlan3D,
}

impl Galerkin3D {
    pub fn new(trunc: Arc<TruncationSet<3>>, params: PhysicalParams, forcing: ForcingSpec) -> Self {
        let plan = ConvolutionPlan3D::build(&trunc);
        Self {
            trunc,
            params,
            forcing,
            plan,
        }
    }

    pub fn trunc(&self) -> &Arc<TruncationSet<3>> {
        &self.trunc
    }

    /// Quadratic tendency
    /// `N_k = -2 pi i sum [(u_{l1},k) w_{l2} - (w_{l1},k) u_{l2}]`,
    /// with `u` recovered from the vorticity, projected orthogonal to `k`.
    pub fn nonlinear(&self, s: &Spectrum3D) -> Spectrum3D {
        debug_assert!(Arc::ptr_eq(s.trunc(), &self.trunc));
        let vel = velocity_from_vorticity_3d_unchecked(s);
        let u = vel.slots();
        let w = s.amps();
        let mut out = Spectrum3D::zeros(Arc::clone(&self.trunc));
        let minus_two_pi_i = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
        let modes = self.trunc.canonical_modes();
        for (slot, &k) in modes.iter().enumerate() {
            let kf = k.components().map(|x| x as f64);
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for e in self.plan.group(slot) {
                let ua = fetch3(u, e.a);
                let wa = fetch3(w, e.a);
                let ub = fetch3(u, e.b);
                let wb = fetch3(w, e.b);
                let du = ua[0] * kf[0] + ua[1] * kf[1] + ua[2] * kf[2];
                let dw = wa[0] * kf[0] + wa[1] * kf[1] + wa[2] * kf[2];
                for i in 0..3 {
                    acc[i] += du * wb[i] - dw * ub[i];
                }
            }
            let mut v = acc.map(|c| minus_two_pi_i * c);
            project_perp(&k, &mut v);
            out.amps_mut()[slot] = v;
        }
        out
    }

    pub fn stiff_free_rhs(&self, s: &Spectrum3D, t: f64) -> Spectrum3D {
        let mut out = self.nonlinear(s);
        if !self.forcing.is_zero() {
            let modes = Arc::clone(&self.trunc);
            for (slot, &k) in modes.canonical_modes().iter().enumerate() {
                let g = self.forcing.sample_3d(k, t).expect("nonzero mode");
                for i in 0..3 {
                    out.amps_mut()[slot][i] += g[i];
                }
            }
        }
        out
    }

    pub fn rhs(&self, s: &Spectrum3D, t: f64) -> Spectrum3D {
        let mut out = self.stiff_free_rhs(s, t);
        let modes = Arc::clone(&self.trunc);
        for (slot, &k) in modes.canonical_modes().iter().enumerate() {
            let lambda = self.params.dissipation_rate(k);
            for i in 0..3 {
                out.amps_mut()[slot][i] -= s.amps()[slot][i] * lambda;
            }
        }
        out
    }

    pub fn decay_factors(&self, dt: f64) -> Vec<f64> {
        self.trunc
            .canonical_modes()
            .iter()
            .map(|&k| (-self.params.dissipation_rate(k) * dt).exp())
            .collect()
    }
}

#[inline]
fn fetch3(amps: &[[Complex64; 3]], code: u32) -> [Complex64; 3] {
    let v = amps[(code >> 1) as usize];
    if code & 1 == 1 {
        crate::state::conj3(v)
    } else {
        v
    }
}

/// Quadratic 2D tendency for a free-standing state (builds a plan on the
/// fly; use [`Galerkin2D`] for repeated evaluations).
pub fn nonlinear_2d(s: &Spectrum2D) -> Spectrum2D {
    let sys = Galerkin2D::new(
        Arc::clone(s.trunc()),
        PhysicalParams { nu: 1.0, alpha: 2.0 },
        ForcingSpec::zero(),
    );
    sys.nonlinear(s)
}

/// Full 2D tendency for a free-standing state.
pub fn rhs_2d(s: &Spectrum2D, params: &PhysicalParams, forcing: &ForcingSpec, t: f64) -> Spectrum2D {
    let sys = Galerkin2D::new(Arc::clone(s.trunc()), *params, forcing.clone());
    sys.rhs(s, t)
}

/// Quadratic 3D tendency; errors if the state violates transversality.
pub fn nonlinear_3d(s: &Spectrum3D) -> Result<Spectrum3D, DynamicsError> {
    s.check_transversal(crate::state::TRANSVERSALITY_TOL)?;
    let sys = Galerkin3D::new(
        Arc::clone(s.trunc()),
        PhysicalParams { nu: 1.0, alpha: 2.0 },
        ForcingSpec::zero(),
    );
    Ok(sys.nonlinear(s))
}

/// Full 3D tendency; errors if the state violates transversality.
pub fn rhs_3d(
    s: &Spectrum3D,
    params: &PhysicalParams,
    forcing: &ForcingSpec,
    t: f64,
) -> Result<Spectrum3D, DynamicsError> {
    s.check_transversal(crate::state::TRANSVERSALITY_TOL)?;
    let sys = Galerkin3D::new(Arc::clone(s.trunc()), *params, forcing.clone());
    Ok(sys.rhs(s, t))
}
