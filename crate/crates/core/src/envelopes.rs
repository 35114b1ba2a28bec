//! Decay-envelope families and trapping-region diagnostics.
//!
//! An envelope bounds the real and imaginary parts of every mode above the
//! low-mode cutoff `K0`; modes at or below `K0` are controlled by the
//! enstrophy/energy estimate instead and are exempt from membership.
//!
//! Membership allows a relative slack of `1e-9` at the boundary: the
//! trapping argument is strict mathematically, but discrete trajectories
//! may graze the boundary by roundoff, and ratios in `(1, 1 + 1e-9]` are
//! flagged as grazing rather than escaped.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::WaveVector;
use crate::state::{Spectrum2D, Spectrum3D};

pub const BOUNDARY_SLACK: f64 = 1e-9;

/// Exponent magnitude beyond which weighted transforms refuse to run.
pub const WEIGHT_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("weight exponent {exponent} exceeds {WEIGHT_EXPONENT_LIMIT}; transform would overflow")]
    WeightOverflow { exponent: f64 },
    #[error("no nonzero modes at or above the requested cutoff")]
    NoQualifyingModes,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnvelopeKind {
    /// `D / |k|^r`.
    Algebraic { amplitude: f64, decay: f64 },
    /// `D exp(-rate |k|) / |k|^r`.
    Exponential {
        amplitude: f64,
        decay: f64,
        rate: f64,
    },
    /// `D exp(-rate t |k|) / |k|^r`, a weight growing linearly in time.
    Gevrey {
        amplitude: f64,
        decay: f64,
        rate: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct Envelope {
    #[serde(flatten)]
    pub kind: EnvelopeKind,
    /// Modes with `|k| <= low_mode_cutoff` are exempt from membership.
    pub low_mode_cutoff: f64,
}

impl Envelope {
    pub fn value(&self, k_norm: f64, t: f64) -> f64 {
        match self.kind {
            EnvelopeKind::Algebraic { amplitude, decay } => amplitude * k_norm.powf(-decay),
            EnvelopeKind::Exponential {
                amplitude,
                decay,
                rate,
            } => amplitude * (-rate * k_norm).exp() * k_norm.powf(-decay),
            EnvelopeKind::Gevrey {
                amplitude,
                decay,
                rate,
            } => amplitude * (-rate * t * k_norm).exp() * k_norm.powf(-decay),
        }
    }

    pub fn amplitude(&self) -> f64 {
        match self.kind {
            EnvelopeKind::Algebraic { amplitude, .. }
            | EnvelopeKind::Exponential { amplitude, .. }
            | EnvelopeKind::Gevrey { amplitude, .. } => amplitude,
        }
    }

    pub fn decay(&self) -> f64 {
        match self.kind {
            EnvelopeKind::Algebraic { decay, .. }
            | EnvelopeKind::Exponential { decay, .. }
            | EnvelopeKind::Gevrey { decay, .. } => decay,
        }
    }
}

/// Result of a membership scan.
#[derive(Clone, Copy, Debug)]
pub struct Membership<const D: usize> {
    pub inside: bool,
    /// Ratio exceeded 1 but stayed within the boundary slack.
    pub grazing: bool,
    /// Largest componentwise ratio `|w_k^(j)| / env(k, t)` above the cutoff.
    pub worst_ratio: f64,
    pub worst_mode: Option<WaveVector<D>>,
    /// Secondary diagnostic: largest complex-modulus ratio.
    pub worst_modulus_ratio: f64,
}

fn scan_membership<const D: usize>(
    modes: impl Iterator<Item = (WaveVector<D>, [f64; 2], f64)>,
    env: &Envelope,
    t: f64,
) -> Membership<D> {
    let mut worst_ratio = 0.0f64;
    let mut worst_mode = None;
    let mut worst_modulus = 0.0f64;
    for (k, parts, modulus) in modes {
        let kn = k.norm();
        if kn <= env.low_mode_cutoff {
            continue;
        }
        let bound = env.value(kn, t);
        let ratio = parts[0].abs().max(parts[1].abs()) / bound;
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_mode = Some(k);
        }
        worst_modulus = worst_modulus.max(modulus / bound);
    }
    Membership {
        inside: worst_ratio <= 1.0 + BOUNDARY_SLACK,
        grazing: worst_ratio > 1.0 && worst_ratio <= 1.0 + BOUNDARY_SLACK,
        worst_ratio,
        worst_mode,
        worst_modulus_ratio: worst_modulus,
    }
}

/// Componentwise membership of a 2D state, scanning all members in
/// lexicographic order (ties keep the first mode seen).
pub fn membership_2d(s: &Spectrum2D, env: &Envelope, t: f64) -> Membership<2> {
    scan_membership(
        s.trunc().members().iter().map(|&k| {
            let a = s.amp(k);
            (k, [a.re, a.im], a.norm())
        }),
        env,
        t,
    )
}

/// Membership of a 3D state; the two "parts" per mode are the Euclidean
/// norms of the real and imaginary component vectors.
pub fn membership_3d(s: &Spectrum3D, env: &Envelope, t: f64) -> Membership<3> {
    scan_membership(
        s.trunc().members().iter().map(|&k| {
            let a = s.amp(k);
            let re = a.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
            let im = a.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
            let modulus = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            (k, [re, im], modulus)
        }),
        env,
        t,
    )
}

/// Multiplies every mode by `exp(rate * t * |k|)`. Pass a negative rate
/// (or negated time) for the inverse transform.
pub fn weighted_transform_2d(
    s: &Spectrum2D,
    rate: f64,
    t: f64,
) -> Result<Spectrum2D, EnvelopeError> {
    let mut out = s.clone();
    let modes = std::sync::Arc::clone(s.trunc());
    for (slot, &k) in modes.canonical_modes().iter().enumerate() {
        let exponent = rate * t * k.norm();
        if exponent.abs() > WEIGHT_EXPONENT_LIMIT {
            return Err(EnvelopeError::WeightOverflow { exponent });
        }
        out.amps_mut()[slot] *= exponent.exp();
    }
    Ok(out)
}

pub fn weighted_transform_3d(
    s: &Spectrum3D,
    rate: f64,
    t: f64,
) -> Result<Spectrum3D, EnvelopeError> {
    let mut out = s.clone();
    let modes = std::sync::Arc::clone(s.trunc());
    for (slot, &k) in modes.canonical_modes().iter().enumerate() {
        let exponent = rate * t * k.norm();
        if exponent.abs() > WEIGHT_EXPONENT_LIMIT {
            return Err(EnvelopeError::WeightOverflow { exponent });
        }
        let f = exponent.exp();
        for c in out.amps_mut()[slot].iter_mut() {
            *c *= f;
        }
    }
    Ok(out)
}

const LN_CLIP_FLOOR: f64 = 1e-300;

fn fitted_gamma_impl(
    modes: impl Iterator<Item = (f64, f64)>,
    decay: f64,
    amplitude: f64,
    k_min: f64,
) -> Result<f64, EnvelopeError> {
    let mut best = f64::INFINITY;
    let mut qualifying = false;
    let mut any_nonzero = false;
    for (kn, magnitude) in modes {
        if kn < k_min {
            continue;
        }
        qualifying = true;
        if magnitude > 0.0 {
            any_nonzero = true;
        }
        let m = magnitude.max(LN_CLIP_FLOOR);
        let est = -(m * kn.powf(decay) / amplitude).ln() / kn;
        best = best.min(est);
    }
    if !qualifying || !any_nonzero {
        return Err(EnvelopeError::NoQualifyingModes);
    }
    Ok(best)
}

/// Empirical exponential decay rate of a spectrum relative to the
/// algebraic envelope `amplitude / |k|^decay`:
/// `inf over |k| >= k_min of -ln(|w_k| |k|^decay / amplitude) / |k|`.
/// Nonnegative exactly when the state sits inside the corresponding
/// exponential envelope.
pub fn fitted_gamma_2d(
    s: &Spectrum2D,
    decay: f64,
    amplitude: f64,
    k_min: f64,
) -> Result<f64, EnvelopeError> {
    fitted_gamma_impl(
        s.trunc()
            .canonical_modes()
            .iter()
            .zip(s.amps())
            .map(|(k, a)| (k.norm(), a.norm())),
        decay,
        amplitude,
        k_min,
    )
}

pub fn fitted_gamma_3d(
    s: &Spectrum3D,
    decay: f64,
    amplitude: f64,
    k_min: f64,
) -> Result<f64, EnvelopeError> {
    fitted_gamma_impl(
        s.trunc().canonical_modes().iter().zip(s.amps()).map(|(k, a)| {
            (
                k.norm(),
                a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
            )
        }),
        decay,
        amplitude,
        k_min,
    )
}
