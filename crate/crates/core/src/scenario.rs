//! Experiment runner: named trapping scenarios binding configuration to
//! estimates, simulations, and output files.
//!
//! A scenario run computes the certified constants (enstrophy/energy
//! bound, envelope amplitude, critical wavenumber), generates an initial
//! state saturating the configured envelope at seeded random phases,
//! simulates on two truncation sets, and emits a time series, spectrum
//! snapshots, the estimate reports, and a verdict. All outputs are
//! deterministic: rerunning the same configuration reproduces them byte
//! for byte.

use std::cell::Cell;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dealias::FastNonlinearity2D;
use crate::dynamics::{DynamicsError, Galerkin2D, Galerkin3D, PhysicalParams};
use crate::envelopes::{
    fitted_gamma_2d, fitted_gamma_3d, membership_2d, membership_3d, Envelope, EnvelopeKind,
    BOUNDARY_SLACK,
};
use crate::estimates::{
    d_prime_3d, d_prime_algebraic, energy_bound_3d, enstrophy_bound, envelope_l2_bound_all,
    gamma2_prime, gamma3, kcrit_2d_algebraic, kcrit_2d_exponential, kcrit_2d_gevrey, kcrit_3d,
    EstimateError, EstimateReport, Kcrit3dVariant, RhsFactor,
};
use crate::forcing::{splitmix64, ForcingError, ForcingKind, ForcingSpec};
use crate::integrator::{run, stability_bound, RunError, Scheme, StepControl, System};
use crate::io::{f17, series_to_csv, spectrum_to_json_2d, spectrum_to_json_3d, SeriesRow};
use crate::lattice::{LatticeError, TruncationSet, TruncationShape};
use crate::state::{Spectrum2D, Spectrum3D};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Forcing(#[from] ForcingError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("integration failed: {0}")]
    Step(String),
    #[error("simulation diverged at t = {t}; checkpoint written to {checkpoint}")]
    Diverged { t: f64, checkpoint: PathBuf },
}

fn cfg_err(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ScenarioKind {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm2")]
    Thm2,
    #[serde(rename = "thm3")]
    Thm3,
    #[serde(rename = "thm4_3d")]
    Thm4_3d,
    #[serde(rename = "thm7_3d")]
    Thm7_3d,
    #[serde(rename = "thm8_3d")]
    Thm8_3d,
    #[serde(rename = "custom")]
    Custom,
}

impl ScenarioKind {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "thm1" => Some(Self::Thm1),
            "thm2" => Some(Self::Thm2),
            "thm3" => Some(Self::Thm3),
            "thm4_3d" => Some(Self::Thm4_3d),
            "thm7_3d" => Some(Self::Thm7_3d),
            "thm8_3d" => Some(Self::Thm8_3d),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    pub fn names() -> &'static [&'static str] {
        &["thm1", "thm2", "thm3", "thm4_3d", "thm7_3d", "thm8_3d", "custom"]
    }

    fn fixed_dimension(&self) -> Option<usize> {
        match self {
            Self::Thm1 | Self::Thm2 | Self::Thm3 => Some(2),
            Self::Thm4_3d | Self::Thm7_3d | Self::Thm8_3d => Some(3),
            Self::Custom => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub shape: TruncationShape,
    pub k_max: f64,
    /// Second set for the truncation-independence check of the constants.
    pub k_max_check: f64,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialKind {
    Zero,
    /// `|w_k(0)| = amplitude / |k|^decay`.
    Algebraic { amplitude: f64, decay: f64 },
    /// `|w_k(0)| = amplitude * exp(-rate |k|) / |k|^decay`.
    Exponential {
        amplitude: f64,
        decay: f64,
        rate: f64,
    },
}

impl InitialKind {
    pub fn magnitude(&self, kn: f64) -> f64 {
        match *self {
            InitialKind::Zero => 0.0,
            InitialKind::Algebraic { amplitude, decay } => amplitude / kn.powf(decay),
            InitialKind::Exponential {
                amplitude,
                decay,
                rate,
            } => amplitude * (-rate * kn).exp() / kn.powf(decay),
        }
    }

    fn decay(&self) -> Option<f64> {
        match *self {
            InitialKind::Zero => None,
            InitialKind::Algebraic { decay, .. } | InitialKind::Exponential { decay, .. } => {
                Some(decay)
            }
        }
    }

    fn amplitude(&self) -> f64 {
        match *self {
            InitialKind::Zero => 0.0,
            InitialKind::Algebraic { amplitude, .. }
            | InitialKind::Exponential { amplitude, .. } => amplitude,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct InitialConfig {
    #[serde(flatten)]
    pub kind: InitialKind,
    pub seed: u64,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_end: f64,
    pub observer_stride: usize,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// Force the low-mode cutoff instead of `max(K_crit, k0_floor)`.
    /// Below the critical wavenumber the envelope check is an empirical
    /// diagnostic rather than a certificate.
    pub k0_override: Option<f64>,
    pub k0_floor: f64,
    pub snapshot_times: Vec<f64>,
    /// Dissipation factor on the right-hand side of the algebraic
    /// trapping condition.
    pub rhs_factor: RhsFactor,
    /// Free rate constant of the time-weighted estimate.
    pub gamma0: f64,
    /// Fallback envelope decay for zero initial data.
    pub envelope_decay: f64,
    /// Hypothesized uniform enstrophy bound for the conditional 3D
    /// scenarios; the run verifies it held.
    pub assumed_enstrophy_bound: Option<f64>,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub dimension: usize,
    pub truncation: TruncationConfig,
    pub physical: PhysicalParams,
    pub forcing: ForcingSpec,
    pub initial: InitialConfig,
    pub step: StepConfig,
    pub diagnostics: DiagnosticsConfig,
    pub reproducible: bool,
    pub fast_nonlinearity: bool,
    /// With the fast path enabled, compare against the direct path every
    /// this many tendency evaluations.
    pub spot_check_stride: u64,
}

fn base_diagnostics() -> DiagnosticsConfig {
    DiagnosticsConfig {
        k0_override: None,
        k0_floor: 4.0,
        snapshot_times: vec![],
        rhs_factor: RhsFactor::FourPiNu,
        gamma0: 0.5,
        envelope_decay: 2.0,
        assumed_enstrophy_bound: None,
    }
}

/// Built-in defaults for each scenario, tuned so the critical wavenumber
/// lands inside the simulated truncations and the runs finish at desk
/// scale.
pub fn default_config(kind: ScenarioKind) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        scenario: kind,
        dimension: kind.fixed_dimension().unwrap_or(2),
        truncation: TruncationConfig {
            shape: TruncationShape::Disk,
            k_max: 12.0,
            k_max_check: 16.0,
        },
        physical: PhysicalParams { nu: 1.0, alpha: 2.0 },
        forcing: ForcingSpec::zero(),
        initial: InitialConfig {
            kind: InitialKind::Zero,
            seed: 11,
        },
        step: StepConfig {
            dt: 0.005,
            scheme: Scheme::IfRk4,
            t_end: 10.0,
            observer_stride: 20,
        },
        diagnostics: base_diagnostics(),
        reproducible: true,
        fast_nonlinearity: false,
        spot_check_stride: 100,
    };
    match kind {
        ScenarioKind::Thm1 => {
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::PowerLaw {
                    amplitude: 0.25,
                    decay: 3.0,
                    epsilon: 0.5,
                    alpha_ref: 2.0,
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Algebraic {
                amplitude: 0.01,
                decay: 3.0,
            };
            cfg.diagnostics.snapshot_times = vec![0.0, 5.0, 10.0];
        }
        ScenarioKind::Thm2 => {
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::Exponential {
                    amplitude: 2e-3,
                    decay: 3.0,
                    epsilon: 0.5,
                    alpha_ref: 2.0,
                    gamma: 0.2,
                    delta: 0.5,
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Exponential {
                amplitude: 5e-5,
                decay: 3.0,
                rate: 0.3,
            };
            cfg.step.t_end = 5.0;
            cfg.diagnostics.snapshot_times = vec![0.0, 5.0];
        }
        ScenarioKind::Thm3 => {
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::Exponential {
                    amplitude: 2e-3,
                    decay: 3.0,
                    epsilon: 0.5,
                    alpha_ref: 2.0,
                    gamma: 0.2,
                    delta: 0.5,
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Algebraic {
                amplitude: 5e-5,
                decay: 3.0,
            };
            cfg.step.t_end = 1.0;
            cfg.step.dt = 0.002;
            cfg.step.observer_stride = 25;
            cfg.diagnostics.snapshot_times = vec![0.0, 1.0];
        }
        ScenarioKind::Thm4_3d => {
            cfg.truncation.k_max = 4.0;
            cfg.truncation.k_max_check = 5.0;
            cfg.physical = PhysicalParams { nu: 1.0, alpha: 3.0 };
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::TrigPoly {
                    amplitude: 1e-4,
                    band: crate::forcing::BandSpec::Ball { k_max: 2.0 },
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Algebraic {
                amplitude: 1e-3,
                decay: 2.0,
            };
            cfg.step.t_end = 2.0;
            cfg.step.observer_stride = 10;
            cfg.diagnostics.k0_floor = 2.0;
            cfg.diagnostics.snapshot_times = vec![0.0, 2.0];
        }
        ScenarioKind::Thm7_3d => {
            cfg.truncation.k_max = 4.0;
            cfg.truncation.k_max_check = 5.0;
            cfg.physical = PhysicalParams { nu: 1.0, alpha: 2.0 };
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::TrigPoly {
                    amplitude: 1e-5,
                    band: crate::forcing::BandSpec::Ball { k_max: 2.0 },
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Algebraic {
                amplitude: 1e-3,
                decay: 3.0,
            };
            cfg.step.t_end = 2.0;
            cfg.step.observer_stride = 10;
            cfg.diagnostics.k0_floor = 2.0;
            cfg.diagnostics.k0_override = Some(2.0);
            cfg.diagnostics.assumed_enstrophy_bound = Some(1e-4);
            cfg.diagnostics.snapshot_times = vec![0.0, 2.0];
        }
        ScenarioKind::Thm8_3d => {
            cfg.truncation.k_max = 4.0;
            cfg.truncation.k_max_check = 5.0;
            cfg.physical = PhysicalParams { nu: 1.0, alpha: 2.0 };
            cfg.forcing = ForcingSpec {
                kind: ForcingKind::TrigPoly {
                    amplitude: 1e-5,
                    band: crate::forcing::BandSpec::Ball { k_max: 2.0 },
                },
                temporal: crate::forcing::Temporal::Constant,
                phase_seed: 7,
            };
            cfg.initial.kind = InitialKind::Exponential {
                amplitude: 1e-3,
                decay: 3.0,
                rate: 0.3,
            };
            cfg.step.t_end = 2.0;
            cfg.step.observer_stride = 10;
            cfg.diagnostics.k0_floor = 2.0;
            cfg.diagnostics.k0_override = Some(2.0);
            cfg.diagnostics.assumed_enstrophy_bound = Some(1e-4);
            cfg.diagnostics.snapshot_times = vec![0.0, 2.0];
        }
        ScenarioKind::Custom => {
            cfg.truncation.k_max = 4.0;
            cfg.truncation.k_max_check = 6.0;
            cfg.step.t_end = 1.0;
        }
    }
    cfg
}

fn forcing_envelope_params(f: &ForcingSpec) -> (f64, f64, f64, f64, f64) {
    // (G, forcing decay r, epsilon, gamma, delta)
    match f.kind {
        ForcingKind::Zero => (0.0, 0.0, 1.0, 0.0, 0.0),
        ForcingKind::PowerLaw {
            amplitude,
            decay,
            epsilon,
            ..
        } => (amplitude, decay, epsilon, 0.0, 0.0),
        ForcingKind::Exponential {
            amplitude,
            decay,
            epsilon,
            gamma,
            delta,
            ..
        } => (amplitude, decay, epsilon, gamma, delta),
        ForcingKind::TrigPoly { amplitude, .. } => (amplitude, 0.0, 1.0, 0.0, 0.0),
    }
}

fn forcing_band_radius(f: &ForcingSpec) -> f64 {
    match &f.kind {
        ForcingKind::TrigPoly { band, .. } => band.outer_radius(),
        _ => 0.0,
    }
}

pub fn validate(cfg: &ScenarioConfig) -> Result<(), ScenarioError> {
    cfg.physical
        .validate()
        .map_err(|e| cfg_err("physical", e.to_string()))?;
    if let Some(d) = cfg.scenario.fixed_dimension() {
        if cfg.dimension != d {
            return Err(cfg_err(
                "dimension",
                format!("scenario requires dimension {d}"),
            ));
        }
    }
    if cfg.dimension != 2 && cfg.dimension != 3 {
        return Err(cfg_err("dimension", "must be 2 or 3"));
    }
    if !(cfg.truncation.k_max >= 1.0) || !(cfg.truncation.k_max_check >= 1.0) {
        return Err(cfg_err("truncation", "both radii must be at least 1"));
    }
    if !(cfg.step.dt > 0.0) {
        return Err(cfg_err("step.dt", "must be positive"));
    }
    if cfg.step.t_end < 0.0 {
        return Err(cfg_err("step.t_end", "must be nonnegative"));
    }
    if cfg.step.scheme == Scheme::Rk4 {
        let k = cfg.truncation.k_max.max(cfg.truncation.k_max_check);
        let bound = stability_bound(&cfg.physical, k);
        if cfg.step.dt > bound {
            return Err(cfg_err(
                "step.dt",
                format!("exceeds the rk4 stability bound {bound:.3e}"),
            ));
        }
    }
    // forcing envelopes are tied to the dissipation exponent they were
    // configured against
    match cfg.forcing.kind {
        ForcingKind::PowerLaw { alpha_ref, .. } | ForcingKind::Exponential { alpha_ref, .. } => {
            if alpha_ref != cfg.physical.alpha {
                return Err(cfg_err(
                    "forcing.alpha_ref",
                    "must equal physical.alpha so the envelope matches the system",
                ));
            }
        }
        _ => {}
    }
    let ic_decay = cfg.initial.kind.decay();
    match cfg.scenario {
        ScenarioKind::Thm1 => {
            let r = match (cfg.forcing.kind.clone(), cfg.initial.kind) {
                (ForcingKind::PowerLaw { decay, .. }, InitialKind::Algebraic { decay: ri, .. }) => {
                    if decay != ri {
                        return Err(cfg_err(
                            "forcing.decay",
                            "must match the initial decay exponent",
                        ));
                    }
                    decay
                }
                (ForcingKind::Zero, InitialKind::Algebraic { decay, .. }) => decay,
                _ => {
                    return Err(cfg_err(
                        "scenario",
                        "algebraic trapping needs power-law (or zero) forcing and algebraic initial data",
                    ))
                }
            };
            if !(r > 1.0) {
                return Err(cfg_err("initial.decay", "must exceed 1"));
            }
        }
        ScenarioKind::Thm2 => match (cfg.forcing.kind.clone(), cfg.initial.kind) {
            (
                ForcingKind::Exponential { decay, .. },
                InitialKind::Exponential { decay: ri, rate, .. },
            ) => {
                if decay != ri {
                    return Err(cfg_err(
                        "forcing.decay",
                        "must match the initial decay exponent",
                    ));
                }
                if !(ri > 1.0) {
                    return Err(cfg_err("initial.decay", "must exceed 1"));
                }
                if !(rate > 0.0) {
                    return Err(cfg_err("initial.rate", "must be positive"));
                }
            }
            _ => {
                return Err(cfg_err(
                    "scenario",
                    "exponential trapping needs exponential forcing and exponential initial data",
                ))
            }
        },
        ScenarioKind::Thm3 => match (cfg.forcing.kind.clone(), cfg.initial.kind) {
            (ForcingKind::Exponential { decay, .. }, InitialKind::Algebraic { decay: ri, .. }) => {
                if decay != ri {
                    return Err(cfg_err(
                        "forcing.decay",
                        "must match the initial decay exponent",
                    ));
                }
                if !(ri > 2.0) {
                    return Err(cfg_err("initial.decay", "must exceed 2"));
                }
                if !(cfg.step.t_end > 0.0) {
                    return Err(cfg_err("step.t_end", "must be positive"));
                }
                if !(cfg.diagnostics.gamma0 > 0.0) {
                    return Err(cfg_err("diagnostics.gamma0", "must be positive"));
                }
            }
            _ => {
                return Err(cfg_err(
                    "scenario",
                    "instantaneous-analyticity runs need exponential forcing and algebraic initial data",
                ))
            }
        },
        ScenarioKind::Thm4_3d => {
            if !(cfg.physical.alpha > 2.5) {
                return Err(cfg_err(
                    "physical.alpha",
                    "must exceed 2.5 for the unconditional 3D envelope",
                ));
            }
            let r = ic_decay.ok_or_else(|| cfg_err("initial", "needs algebraic initial data"))?;
            if !(r > 1.5) {
                return Err(cfg_err("initial.decay", "must exceed 1.5"));
            }
        }
        ScenarioKind::Thm7_3d | ScenarioKind::Thm8_3d => {
            if !(cfg.physical.alpha > 1.5) {
                return Err(cfg_err("physical.alpha", "must exceed 1.5"));
            }
            let r = ic_decay.ok_or_else(|| cfg_err("initial", "needs decaying initial data"))?;
            if !(r > 2.0) {
                return Err(cfg_err("initial.decay", "must exceed 2"));
            }
            if cfg.diagnostics.assumed_enstrophy_bound.is_none() {
                return Err(cfg_err(
                    "diagnostics.assumed_enstrophy_bound",
                    "this conditional scenario needs a hypothesized enstrophy bound",
                ));
            }
            if cfg.scenario == ScenarioKind::Thm8_3d
                && !matches!(cfg.initial.kind, InitialKind::Exponential { .. })
            {
                return Err(cfg_err("initial", "needs exponential initial data"));
            }
        }
        ScenarioKind::Custom => {}
    }
    if cfg.fast_nonlinearity && cfg.dimension != 2 {
        return Err(cfg_err(
            "fast_nonlinearity",
            "the transform path is implemented for the 2D system",
        ));
    }
    Ok(())
}

/// Constants derived for a scenario; identical across truncations by
/// construction, which the runner verifies.
#[derive(Clone, PartialEq, Debug, Serialize)]
pub struct ScenarioEstimates {
    pub g_star: f64,
    pub e0_bound: f64,
    pub e_star: f64,
    pub k_crit: f64,
    pub k0: f64,
    pub d_prime: f64,
    pub gamma_prime: f64,
    pub envelope: Envelope,
    pub reports: Vec<EstimateReport>,
}

/// Runs the estimate pipeline for a configuration. The truncation radius
/// is accepted (and echoed) purely so the caller can confirm the results
/// do not depend on it.
pub fn compute_estimates(
    cfg: &ScenarioConfig,
    _context_k_max: f64,
) -> Result<ScenarioEstimates, ScenarioError> {
    let d = cfg.dimension;
    let nu = cfg.physical.nu;
    let alpha = cfg.physical.alpha;
    let (g_amp, _fr, eps, f_gamma, f_delta) = forcing_envelope_params(&cfg.forcing);
    let g_star = cfg.forcing.g_star_all(d)?;
    let floor = cfg.diagnostics.k0_floor.max(forcing_band_radius(&cfg.forcing));
    let mut reports = Vec::new();

    // l2 bound of the initial envelope over the whole lattice
    let ic = cfg.initial.kind;
    let ic_decay = ic.decay().unwrap_or(cfg.diagnostics.envelope_decay);
    let e0_bound = match (d, ic) {
        (_, InitialKind::Zero) => 0.0,
        (2, InitialKind::Algebraic { amplitude, decay }) => {
            envelope_l2_bound_all(2, amplitude, decay, 0.0, 1.0)?
        }
        (2, InitialKind::Exponential { amplitude, decay, rate }) => {
            envelope_l2_bound_all(2, amplitude, decay, rate, 1.0)?
        }
        // 3D scenarios are controlled through the energy norm:
        // |u_k| <= |w_k| / (2 pi |k|)
        (3, InitialKind::Algebraic { amplitude, decay }) => envelope_l2_bound_all(
            3,
            amplitude / (2.0 * std::f64::consts::PI),
            decay + 1.0,
            0.0,
            1.0,
        )?,
        (3, InitialKind::Exponential { amplitude, decay, rate }) => envelope_l2_bound_all(
            3,
            amplitude / (2.0 * std::f64::consts::PI),
            decay + 1.0,
            rate,
            1.0,
        )?,
        _ => unreachable!("dimension validated"),
    };
    let bound_report = if d == 2 {
        enstrophy_bound(e0_bound, g_star, nu)
    } else {
        energy_bound_3d(e0_bound, g_star, nu)
    };
    let e_star = bound_report.value;
    reports.push(bound_report);

    let pick_k0 = |k_crit: f64, cfg: &ScenarioConfig| -> f64 {
        cfg.diagnostics
            .k0_override
            .unwrap_or_else(|| k_crit.max(floor))
    };

    let (k_crit, k0, d_prime, gamma_prime, envelope_kind) = match cfg.scenario {
        ScenarioKind::Thm1 | ScenarioKind::Custom if d == 2 => {
            let r = ic_decay;
            let report = kcrit_2d_algebraic(e_star, r, alpha, eps, nu, cfg.diagnostics.rhs_factor)?;
            let k_crit = report.value;
            reports.push(report);
            let k0 = pick_k0(k_crit, cfg);
            let mut dp = d_prime_algebraic(k0, e_star, r, g_amp);
            if dp == 0.0 {
                dp = 1.0; // zero data, zero forcing: any positive envelope traps
            }
            (k_crit, k0, dp, 0.0, EnvelopeKind::Algebraic { amplitude: dp, decay: r })
        }
        ScenarioKind::Thm2 => {
            let r = ic_decay;
            // first control the modes algebraically, then tighten to the
            // static exponential weight
            let alg = kcrit_2d_algebraic(e_star, r, alpha, eps, nu, cfg.diagnostics.rhs_factor)?;
            let k0_alg = alg.value.max(floor);
            reports.push(alg);
            let d_bar = d_prime_algebraic(k0_alg, e_star, r, g_amp);
            let d2 = (2.0 * d_bar).max(g_amp);
            let probe = kcrit_2d_exponential(d2, g_amp, f_gamma, f_delta, 0.0, r, alpha, eps, nu)?;
            let k_crit = probe.value.max(k0_alg);
            let k0 = pick_k0(k_crit, cfg);
            let g2 = gamma2_prime(k0, d_bar, d2, f_gamma, f_delta);
            let report =
                kcrit_2d_exponential(d2, g_amp, f_gamma, f_delta, g2, r, alpha, eps, nu)?;
            reports.push(report);
            (
                k_crit,
                k0,
                d2,
                g2,
                EnvelopeKind::Exponential {
                    amplitude: d2,
                    decay: r,
                    rate: g2,
                },
            )
        }
        ScenarioKind::Thm3 => {
            let r = ic_decay;
            let alg = kcrit_2d_algebraic(e_star, r, alpha, eps, nu, cfg.diagnostics.rhs_factor)?;
            let k0_alg = alg.value.max(floor);
            reports.push(alg);
            let d_bar = d_prime_algebraic(k0_alg, e_star, r, g_amp);
            let d3 = (2.0 * d_bar).max(g_amp);
            let report = kcrit_2d_gevrey(d3, g_amp, cfg.diagnostics.gamma0, r, alpha, nu)?;
            let k_crit = report.value.max(k0_alg);
            reports.push(report);
            let k0 = pick_k0(k_crit, cfg);
            let g3 = gamma3(k0, cfg.step.t_end, f_gamma, f_delta, cfg.diagnostics.gamma0);
            (
                k_crit,
                k0,
                d3,
                g3,
                EnvelopeKind::Gevrey {
                    amplitude: d3,
                    decay: r,
                    rate: g3,
                },
            )
        }
        ScenarioKind::Thm4_3d => {
            let r = ic_decay;
            let report = kcrit_3d(r, alpha, nu, Kcrit3dVariant::EnergyControlled { e_star })?;
            let k_crit = report.value;
            reports.push(report);
            let k0 = pick_k0(k_crit, cfg);
            let dp = d_prime_3d(k0, e_star, r, ic.amplitude());
            (k_crit, k0, dp, 0.0, EnvelopeKind::Algebraic { amplitude: dp, decay: r })
        }
        ScenarioKind::Thm7_3d => {
            let r = ic_decay;
            let e_omega = cfg
                .diagnostics
                .assumed_enstrophy_bound
                .expect("validated");
            let k0_pre = floor;
            let d7 = 2.0 * ic.amplitude().max(e_omega.sqrt() * k0_pre.powf(r));
            let t1 = cfg.step.t_end.max(f64::MIN_POSITIVE);
            let gamma_pre = std::f64::consts::LN_2 / (t1 * k0_pre);
            let report = kcrit_3d(
                r,
                alpha,
                nu,
                Kcrit3dVariant::Weighted {
                    gamma_w: gamma_pre,
                    d7_prime: d7,
                },
            )?;
            let k_crit = report.value;
            reports.push(report);
            let k0 = pick_k0(k_crit.max(k0_pre), cfg);
            let g7 = std::f64::consts::LN_2 / (t1 * k0);
            (
                k_crit,
                k0,
                d7,
                g7,
                EnvelopeKind::Gevrey {
                    amplitude: d7,
                    decay: r,
                    rate: g7,
                },
            )
        }
        ScenarioKind::Thm8_3d => {
            let r = ic_decay;
            let e_omega = cfg
                .diagnostics
                .assumed_enstrophy_bound
                .expect("validated");
            let ic_rate = match ic {
                InitialKind::Exponential { rate, .. } => rate,
                _ => unreachable!("validated"),
            };
            let k0_pre = floor;
            let d8 = 2.0 * ic.amplitude().max(e_omega.sqrt() * k0_pre.powf(r));
            let report = kcrit_3d(
                r,
                alpha,
                nu,
                Kcrit3dVariant::Weighted {
                    gamma_w: 0.0,
                    d7_prime: d8,
                },
            )?;
            let k_crit = report.value;
            reports.push(report);
            let k0 = pick_k0(k_crit.max(k0_pre), cfg);
            let g8 = ic_rate.min(std::f64::consts::LN_2 / k0);
            (
                k_crit,
                k0,
                d8,
                g8,
                EnvelopeKind::Exponential {
                    amplitude: d8,
                    decay: r,
                    rate: g8,
                },
            )
        }
        ScenarioKind::Custom => {
            // 3D custom: algebraic envelope from the energy bound
            let r = ic_decay;
            let k0 = pick_k0(floor, cfg);
            let mut dp = d_prime_3d(k0, e_star, r, ic.amplitude());
            if dp == 0.0 {
                dp = 1.0;
            }
            (
                floor,
                k0,
                dp,
                0.0,
                EnvelopeKind::Algebraic { amplitude: dp, decay: r },
            )
        }
        _ => unreachable!("dimension/scenario combinations validated"),
    };

    Ok(ScenarioEstimates {
        g_star,
        e0_bound,
        e_star,
        k_crit,
        k0,
        d_prime,
        gamma_prime,
        envelope: Envelope {
            kind: envelope_kind,
            low_mode_cutoff: k0,
        },
        reports,
    })
}

// ---------------------------------------------------------------------
// initial states
// ---------------------------------------------------------------------

fn mode_phase(seed: u64, components: &[i64]) -> f64 {
    let mut h = seed ^ 0x243f_6a88_85a3_08d3;
    for &c in components {
        h = splitmix64(h ^ (c as u64));
    }
    2.0 * std::f64::consts::PI * ((h >> 11) as f64 / (1u64 << 53) as f64)
}

/// State saturating the configured envelope at seeded random phases.
pub fn initial_state_2d(trunc: Arc<TruncationSet<2>>, init: &InitialConfig) -> Spectrum2D {
    let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
    for (slot, &k) in trunc.canonical_modes().iter().enumerate() {
        let mag = init.kind.magnitude(k.norm());
        let phase = mode_phase(init.seed, &k.components());
        s.amps_mut()[slot] = Complex64::from_polar(mag, phase);
    }
    s
}

/// Transversal 3D state saturating the configured envelope.
pub fn initial_state_3d(trunc: Arc<TruncationSet<3>>, init: &InitialConfig) -> Spectrum3D {
    let mut s = Spectrum3D::zeros(Arc::clone(&trunc));
    let modes: Vec<_> = trunc.canonical_modes().to_vec();
    for (slot, k) in modes.iter().enumerate() {
        let mag = init.kind.magnitude(k.norm());
        let phase = mode_phase(init.seed, &k.components());
        let dir = crate::forcing::transversal_direction(*k);
        let scalar = Complex64::from_polar(mag, phase);
        s.amps_mut()[slot] = [scalar * dir[0], scalar * dir[1], scalar * dir[2]];
    }
    s
}

// ---------------------------------------------------------------------
// fast-path wrapper with mandatory spot checks
// ---------------------------------------------------------------------

struct FastChecked2D {
    inner: Galerkin2D,
    fast: FastNonlinearity2D,
    stride: u64,
    calls: Cell<u64>,
}

impl FastChecked2D {
    fn nonlinear(&self, s: &Spectrum2D) -> Spectrum2D {
        let out = self.fast.nonlinear(s);
        let n = self.calls.get() + 1;
        self.calls.set(n);
        if self.stride > 0 && n % self.stride == 0 {
            let direct = self.inner.nonlinear(s);
            let mut err = 0.0;
            let mut scale = 0.0;
            for (a, b) in direct.amps().iter().zip(out.amps()) {
                err += (a - b).norm_sqr();
                scale += a.norm_sqr();
            }
            let rel = (err / scale.max(1e-300)).sqrt();
            assert!(
                rel <= 1e-10,
                "fast nonlinearity deviates from the direct path by {rel:.3e}"
            );
        }
        out
    }
}

impl System for FastChecked2D {
    type State = Spectrum2D;

    fn stiff_free_rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        let mut out = self.nonlinear(s);
        if !self.inner.forcing.is_zero() {
            let modes = Arc::clone(self.inner.trunc());
            for (slot, &k) in modes.canonical_modes().iter().enumerate() {
                out.amps_mut()[slot] += self.inner.forcing.sample_2d(k, t).expect("nonzero mode");
            }
        }
        out
    }

    fn rhs(&self, s: &Spectrum2D, t: f64) -> Spectrum2D {
        let mut out = self.stiff_free_rhs(s, t);
        let modes = Arc::clone(self.inner.trunc());
        for (slot, &k) in modes.canonical_modes().iter().enumerate() {
            out.amps_mut()[slot] -= s.amps()[slot] * self.inner.params.dissipation_rate(k);
        }
        out
    }

    fn decay_factors(&self, dt: f64) -> Vec<f64> {
        self.inner.decay_factors(dt)
    }

    fn k_max(&self) -> f64 {
        self.inner.trunc().k_max()
    }

    fn params(&self) -> &PhysicalParams {
        &self.inner.params
    }
}

// ---------------------------------------------------------------------
// the runner
// ---------------------------------------------------------------------

#[derive(Clone, Debug)]
struct SingleRunSummary {
    sup_ratio: f64,
    worst_mode: Vec<i64>,
    sup_enstrophy: f64,
    sup_energy: f64,
    grazing: bool,
}

#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub pass: bool,
    pub reasons: Vec<String>,
    pub worst_ratio: f64,
    pub constants_match: bool,
    pub estimates: ScenarioEstimates,
    pub out_dir: PathBuf,
}

fn snapshot_name(t: f64) -> String {
    format!("spectrum_t{t:.6}.json")
}

struct SnapshotSchedule {
    pending: Vec<f64>,
}

impl SnapshotSchedule {
    fn new(times: &[f64], dt: f64, t_end: f64) -> Self {
        let mut pending: Vec<f64> = times
            .iter()
            .copied()
            .filter(|&t| t <= t_end + 0.5 * dt)
            .collect();
        pending.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Self { pending }
    }

    /// Times due at observation time `t` (within half a step).
    fn due(&mut self, t: f64, dt: f64) -> Vec<f64> {
        let mut out = Vec::new();
        while let Some(&next) = self.pending.first() {
            if t + 0.5 * dt >= next {
                out.push(next);
                self.pending.remove(0);
            } else {
                break;
            }
        }
        out
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), ScenarioError> {
    fs::write(path, contents)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_single_2d(
    cfg: &ScenarioConfig,
    est: &ScenarioEstimates,
    k_max: f64,
    dir: &Path,
) -> Result<SingleRunSummary, ScenarioError> {
    fs::create_dir_all(dir)?;
    let trunc = Arc::new(TruncationSet::<2>::build(cfg.truncation.shape, k_max)?);
    let state0 = initial_state_2d(Arc::clone(&trunc), &cfg.initial);
    let control = StepControl {
        dt: cfg.step.dt,
        scheme: cfg.step.scheme,
        t_end: cfg.step.t_end,
        observer_stride: cfg.step.observer_stride,
    };
    let env = est.envelope;
    let k_min_fit = est.k0 + 1.0;
    let mut rows: Vec<SeriesRow> = Vec::new();
    let mut schedule = SnapshotSchedule::new(&cfg.diagnostics.snapshot_times, cfg.step.dt, cfg.step.t_end);
    let mut summary = SingleRunSummary {
        sup_ratio: 0.0,
        worst_mode: Vec::new(),
        sup_enstrophy: 0.0,
        sup_energy: 0.0,
        grazing: false,
    };
    let mut snapshots: Vec<(String, String)> = Vec::new();
    let mut observe = |_step: usize, t: f64, s: &Spectrum2D| {
        let m = membership_2d(s, &env, t);
        let fitted = fitted_gamma_2d(s, env.decay(), env.amplitude(), k_min_fit)
            .unwrap_or(f64::NAN);
        let enstrophy = s.enstrophy();
        let energy = s.energy();
        if m.worst_ratio > summary.sup_ratio {
            summary.sup_ratio = m.worst_ratio;
            summary.worst_mode = m
                .worst_mode
                .map(|k| k.components().to_vec())
                .unwrap_or_default();
        }
        summary.grazing |= m.grazing;
        summary.sup_enstrophy = summary.sup_enstrophy.max(enstrophy);
        summary.sup_energy = summary.sup_energy.max(energy);
        rows.push(SeriesRow {
            t,
            enstrophy,
            energy,
            envelope_ratio: m.worst_ratio,
            worst_k: m
                .worst_mode
                .map(|k| k.components().to_vec())
                .unwrap_or_default(),
            fitted_gamma: fitted,
            dt: cfg.step.dt,
            step_rejections: 0,
        });
        for due in schedule.due(t, cfg.step.dt) {
            snapshots.push((snapshot_name(due), spectrum_to_json_2d(s)));
        }
    };

    let result = if cfg.fast_nonlinearity {
        let sys = FastChecked2D {
            inner: Galerkin2D::new(Arc::clone(&trunc), cfg.physical, cfg.forcing.clone()),
            fast: FastNonlinearity2D::with_default_grid(Arc::clone(&trunc)),
            stride: cfg.spot_check_stride,
            calls: Cell::new(0),
        };
        run(&sys, state0, &control, &mut observe)
    } else {
        let sys = Galerkin2D::new(Arc::clone(&trunc), cfg.physical, cfg.forcing.clone());
        run(&sys, state0, &control, &mut observe)
    };

    write_file(&dir.join("series.csv"), &series_to_csv(&rows))?;
    for (name, contents) in &snapshots {
        write_file(&dir.join(name), contents)?;
    }
    match result {
        Ok(_) => Ok(summary),
        Err(RunError::Diverged { t, last_good }) => {
            let checkpoint = dir.join("checkpoint.json");
            let body = format!(
                "{{\n\"t\": {},\n\"spectrum\": {}}}\n",
                f17(t),
                spectrum_to_json_2d(&last_good)
            );
            write_file(&checkpoint, &body)?;
            Err(ScenarioError::Diverged { t, checkpoint })
        }
        Err(RunError::Step(e)) => Err(ScenarioError::Step(e.to_string())),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_single_3d(
    cfg: &ScenarioConfig,
    est: &ScenarioEstimates,
    k_max: f64,
    dir: &Path,
) -> Result<SingleRunSummary, ScenarioError> {
    fs::create_dir_all(dir)?;
    let trunc = Arc::new(TruncationSet::<3>::build(cfg.truncation.shape, k_max)?);
    let state0 = initial_state_3d(Arc::clone(&trunc), &cfg.initial);
    let control = StepControl {
        dt: cfg.step.dt,
        scheme: cfg.step.scheme,
        t_end: cfg.step.t_end,
        observer_stride: cfg.step.observer_stride,
    };
    let env = est.envelope;
    let k_min_fit = est.k0 + 1.0;
    let mut rows: Vec<SeriesRow> = Vec::new();
    let mut schedule = SnapshotSchedule::new(&cfg.diagnostics.snapshot_times, cfg.step.dt, cfg.step.t_end);
    let mut summary = SingleRunSummary {
        sup_ratio: 0.0,
        worst_mode: Vec::new(),
        sup_enstrophy: 0.0,
        sup_energy: 0.0,
        grazing: false,
    };
    let mut snapshots: Vec<(String, String)> = Vec::new();
    let mut observe = |_step: usize, t: f64, s: &Spectrum3D| {
        let m = membership_3d(s, &env, t);
        let fitted = fitted_gamma_3d(s, env.decay(), env.amplitude(), k_min_fit)
            .unwrap_or(f64::NAN);
        let enstrophy = s.enstrophy();
        let energy = s.energy();
        if m.worst_ratio > summary.sup_ratio {
            summary.sup_ratio = m.worst_ratio;
            summary.worst_mode = m
                .worst_mode
                .map(|k| k.components().to_vec())
                .unwrap_or_default();
        }
        summary.grazing |= m.grazing;
        summary.sup_enstrophy = summary.sup_enstrophy.max(enstrophy);
        summary.sup_energy = summary.sup_energy.max(energy);
        rows.push(SeriesRow {
            t,
            enstrophy,
            energy,
            envelope_ratio: m.worst_ratio,
            worst_k: m
                .worst_mode
                .map(|k| k.components().to_vec())
                .unwrap_or_default(),
            fitted_gamma: fitted,
            dt: cfg.step.dt,
            step_rejections: 0,
        });
        for due in schedule.due(t, cfg.step.dt) {
            snapshots.push((snapshot_name(due), spectrum_to_json_3d(s)));
        }
    };

    let sys = Galerkin3D::new(Arc::clone(&trunc), cfg.physical, cfg.forcing.clone());
    let result = run(&sys, state0, &control, &mut observe);

    write_file(&dir.join("series.csv"), &series_to_csv(&rows))?;
    for (name, contents) in &snapshots {
        write_file(&dir.join(name), contents)?;
    }
    match result {
        Ok(_) => Ok(summary),
        Err(RunError::Diverged { t, last_good }) => {
            let checkpoint = dir.join("checkpoint.json");
            let body = format!(
                "{{\n\"t\": {},\n\"spectrum\": {}}}\n",
                f17(t),
                spectrum_to_json_3d(&last_good)
            );
            write_file(&checkpoint, &body)?;
            Err(ScenarioError::Diverged { t, checkpoint })
        }
        Err(RunError::Step(e)) => Err(ScenarioError::Step(e.to_string())),
    }
}

fn estimates_json(est: &ScenarioEstimates) -> String {
    let mut text = serde_json::to_string_pretty(est).expect("serializable");
    text.push('\n');
    text
}

/// Runs the full scenario pipeline into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioOutcome, ScenarioError> {
    validate(cfg)?;
    fs::create_dir_all(out_dir)?;
    // materialized configuration, so runs are self-describing
    let mut echo = serde_json::to_string_pretty(cfg).expect("serializable");
    echo.push('\n');
    write_file(&out_dir.join("config.json"), &echo)?;

    // constants computed once per truncation; they must agree exactly
    let est_primary = compute_estimates(cfg, cfg.truncation.k_max)?;
    let est_check = compute_estimates(cfg, cfg.truncation.k_max_check)?;
    let constants_match = est_primary == est_check;
    write_file(&out_dir.join("estimates.json"), &estimates_json(&est_primary))?;

    let primary_dir = out_dir.join("primary");
    let check_dir = out_dir.join("check");
    let (sum_a, sum_b) = if cfg.dimension == 2 {
        (
            run_single_2d(cfg, &est_primary, cfg.truncation.k_max, &primary_dir)?,
            run_single_2d(cfg, &est_check, cfg.truncation.k_max_check, &check_dir)?,
        )
    } else {
        (
            run_single_3d(cfg, &est_primary, cfg.truncation.k_max, &primary_dir)?,
            run_single_3d(cfg, &est_check, cfg.truncation.k_max_check, &check_dir)?,
        )
    };

    let mut reasons = Vec::new();
    let worst_ratio = sum_a.sup_ratio.max(sum_b.sup_ratio);
    if worst_ratio > 1.0 + BOUNDARY_SLACK {
        let offender = if sum_a.sup_ratio >= sum_b.sup_ratio {
            (&sum_a, "primary")
        } else {
            (&sum_b, "check")
        };
        reasons.push(format!(
            "envelope ratio {} at mode {:?} ({})",
            f17(offender.0.sup_ratio),
            offender.0.worst_mode,
            offender.1
        ));
    }
    if !constants_match {
        reasons.push("constants differ between truncations".into());
    }
    let bound_tol = 1.0 + 1e-9;
    for (sum, label) in [(&sum_a, "primary"), (&sum_b, "check")] {
        let (observed, name) = if cfg.dimension == 2 {
            (sum.sup_enstrophy, "enstrophy")
        } else {
            (sum.sup_energy, "energy")
        };
        if observed > est_primary.e_star * bound_tol {
            reasons.push(format!(
                "{name} {} exceeds the uniform bound {} ({label})",
                f17(observed),
                f17(est_primary.e_star)
            ));
        }
        if let Some(assumed) = cfg.diagnostics.assumed_enstrophy_bound {
            if sum.sup_enstrophy > assumed * bound_tol {
                reasons.push(format!(
                    "enstrophy {} exceeds the hypothesized bound {} ({label})",
                    f17(sum.sup_enstrophy),
                    f17(assumed)
                ));
            }
        }
    }
    let pass = reasons.is_empty();

    let mut verdict = String::new();
    verdict.push_str(if pass { "PASS" } else { "FAIL" });
    if !pass {
        verdict.push_str(": ");
        verdict.push_str(&reasons.join("; "));
    }
    verdict.push('\n');
    verdict.push_str(&format!("worst_envelope_ratio = {}\n", f17(worst_ratio)));
    verdict.push_str(&format!(
        "constants_identical_across_truncations = {constants_match}\n"
    ));
    verdict.push_str(&format!("k_crit = {}\n", f17(est_primary.k_crit)));
    verdict.push_str(&format!("k0 = {}\n", f17(est_primary.k0)));
    verdict.push_str(&format!("d_prime = {}\n", f17(est_primary.d_prime)));
    verdict.push_str(&format!(
        "sup_enstrophy = {} / {}\n",
        f17(sum_a.sup_enstrophy),
        f17(sum_b.sup_enstrophy)
    ));
    verdict.push_str(&format!(
        "sup_energy = {} / {}\n",
        f17(sum_a.sup_energy),
        f17(sum_b.sup_energy)
    ));
    if sum_a.grazing || sum_b.grazing {
        verdict.push_str("note: boundary grazed within roundoff slack\n");
    }
    write_file(&out_dir.join("verdict.txt"), &verdict)?;

    Ok(ScenarioOutcome {
        pass,
        reasons,
        worst_ratio,
        constants_match,
        estimates: est_primary,
        out_dir: out_dir.to_path_buf(),
    })
}

/// Estimates-only pipeline: writes the configuration echo and the
/// estimate reports without simulating.
pub fn certify(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioEstimates, ScenarioError> {
    validate(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut echo = serde_json::to_string_pretty(cfg).expect("serializable");
    echo.push('\n');
    write_file(&out_dir.join("config.json"), &echo)?;
    let est = compute_estimates(cfg, cfg.truncation.k_max)?;
    let est_check = compute_estimates(cfg, cfg.truncation.k_max_check)?;
    if est != est_check {
        return Err(cfg_err(
            "truncation",
            "constants unexpectedly depend on the truncation",
        ));
    }
    write_file(&out_dir.join("estimates.json"), &estimates_json(&est))?;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configs_validate() {
        for &kind in &[
            ScenarioKind::Thm1,
            ScenarioKind::Thm2,
            ScenarioKind::Thm3,
            ScenarioKind::Thm4_3d,
            ScenarioKind::Thm7_3d,
            ScenarioKind::Thm8_3d,
            ScenarioKind::Custom,
        ] {
            let cfg = default_config(kind);
            validate(&cfg).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
        }
    }

    #[test]
    fn weak_dissipation_3d_is_rejected() {
        let mut cfg = default_config(ScenarioKind::Thm4_3d);
        cfg.physical.alpha = 2.4;
        let err = validate(&cfg).unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = default_config(ScenarioKind::Thm2);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn zero_custom_scenario_passes_trivially() {
        let mut cfg = default_config(ScenarioKind::Custom);
        cfg.truncation.k_max = 2.0;
        cfg.truncation.k_max_check = 3.0;
        cfg.step.t_end = 0.05;
        cfg.step.dt = 0.01;
        let dir = tempfile::tempdir().unwrap();
        let outcome = run_scenario(&cfg, dir.path()).unwrap();
        assert!(outcome.pass);
        assert_eq!(outcome.worst_ratio, 0.0);
        assert!(dir.path().join("verdict.txt").exists());
        assert!(dir.path().join("primary/series.csv").exists());
        assert!(dir.path().join("estimates.json").exists());
    }

    #[test]
    fn initial_state_saturates_the_configured_envelope() {
        let trunc = Arc::new(TruncationSet::<2>::disk(6.0).unwrap());
        let init = InitialConfig {
            kind: InitialKind::Algebraic {
                amplitude: 0.3,
                decay: 2.0,
            },
            seed: 5,
        };
        let s = initial_state_2d(Arc::clone(&trunc), &init);
        for &k in trunc.members() {
            let expected = 0.3 / k.norm().powi(2);
            assert!((s.amp(k).norm() - expected).abs() <= 1e-14 * expected);
        }
        // deterministic in the seed
        let again = initial_state_2d(trunc, &init);
        assert_eq!(s.amps(), again.amps());
    }

    #[test]
    fn initial_state_3d_is_transversal() {
        let trunc = Arc::new(TruncationSet::<3>::disk(3.0).unwrap());
        let init = InitialConfig {
            kind: InitialKind::Algebraic {
                amplitude: 0.1,
                decay: 2.0,
            },
            seed: 9,
        };
        let s = initial_state_3d(trunc, &init);
        assert!(s.check_transversal(1e-12).is_ok());
    }

    #[test]
    fn scenario_names_round_trip() {
        for &name in ScenarioKind::names() {
            let kind = ScenarioKind::from_name(name).unwrap();
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{name}\""));
        }
    }
}
