//! Brute-force ground truth backing the analytic estimates: direct shell
//! sums, boundary inward-field checks, and conservation identities of the
//! truncated nonlinearity.
//!
//! Everything here is deliberately computed along a different path than
//! the production code (double loops over ordered pairs, no interaction
//! plans), so agreement is evidence rather than tautology.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::{nonlinear_2d, rhs_2d, PhysicalParams};
use crate::envelopes::{Envelope, EnvelopeKind, BOUNDARY_SLACK};
use crate::estimates::RhsFactor;
use crate::forcing::{splitmix64, ForcingSpec};
use crate::lattice::{dot, shell_of, Shell, TruncationSet, WaveVector};
use crate::state::{
    cross_int_complex, velocity_from_vorticity_3d_unchecked,
    Spectrum2D, Spectrum3D,
};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("state is not on the envelope boundary at the designated component: |{found}| vs {expected}")]
    NotOnBoundary { found: f64, expected: f64 },
    #[error("state leaves the envelope at a non-designated component (ratio {ratio})")]
    NotInsideEnvelope { ratio: f64 },
    #[error("the pinned boundary component alone exceeds the enstrophy budget {budget}")]
    BoundaryExceedsBudget { budget: f64 },
    #[error("mode {k:?} is outside the truncation set")]
    ModeOutside { k: String },
}

/// Small deterministic generator for audit trials.
#[derive(Clone, Debug)]
pub struct TrialRng(u64);

impl TrialRng {
    pub fn new(seed: u64) -> Self {
        Self(splitmix64(seed ^ 0x51a5_97cb_33f0_11d7))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = splitmix64(self.0);
        self.0
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }
}

// ---------------------------------------------------------------------
// shell sums
// ---------------------------------------------------------------------

/// Direct summation of `|a_{l1}| |b_{l2}| |k| / |l2|` over the three
/// shells of the convolution pairs of `k` in `Z`.
pub fn brute_shell_sums<const D: usize>(
    a: &dyn Fn(WaveVector<D>) -> f64,
    b: &dyn Fn(WaveVector<D>) -> f64,
    k: WaveVector<D>,
    trunc: &TruncationSet<D>,
) -> (f64, f64, f64) {
    let kn = k.norm();
    let mut sums = [0.0f64; 3];
    for (l1, l2) in trunc.convolution_pairs(k) {
        let term = a(l1) * b(l2) * kn / l2.norm();
        match shell_of(k, l2) {
            Shell::Near => sums[0] += term,
            Shell::Mid => sums[1] += term,
            Shell::Far => sums[2] += term,
        }
    }
    (sums[0], sums[1], sums[2])
}

/// Unpartitioned double-loop total of the same weighted sum, for the
/// additivity check.
pub fn brute_total<const D: usize>(
    a: &dyn Fn(WaveVector<D>) -> f64,
    b: &dyn Fn(WaveVector<D>) -> f64,
    k: WaveVector<D>,
    trunc: &TruncationSet<D>,
) -> f64 {
    let kn = k.norm();
    let mut total = 0.0;
    for &l2 in trunc.members() {
        let l1 = k - l2;
        if trunc.contains(l1) {
            total += a(l1) * b(l2) * kn / l2.norm();
        }
    }
    total
}

/// Envelope-compliant random magnitudes `u * C / |k|^r` with `u` in
/// `[0, 1)`, seeded; one value per member of the set.
pub struct MagnitudeMap<const D: usize> {
    trunc: Arc<TruncationSet<D>>,
    values: Vec<f64>,
}

impl<const D: usize> MagnitudeMap<D> {
    pub fn random_under_envelope(
        trunc: Arc<TruncationSet<D>>,
        c_amp: f64,
        r: f64,
        seed: u64,
    ) -> Self {
        let mut rng = TrialRng::new(seed);
        let values = trunc
            .members()
            .iter()
            .map(|k| rng.unit() * c_amp / k.norm().powf(r))
            .collect();
        Self { trunc, values }
    }

    pub fn get(&self, k: WaveVector<D>) -> f64 {
        match self.trunc.members().binary_search(&k) {
            Ok(i) => self.values[i],
            Err(_) => 0.0,
        }
    }
}

// ---------------------------------------------------------------------
// conservation identities
// ---------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ConservationRates2D {
    /// `Re sum conj(w_k) N_k` over the full symmetric set.
    pub enstrophy_rate: f64,
    /// `sum |w_k| |N_k|`, the natural scale for the relative test.
    pub enstrophy_scale: f64,
    /// `Re sum conj(w_k) N_k / |k|^2`.
    pub energy_rate: f64,
    pub energy_scale: f64,
}

pub fn conservation_rates_2d(s: &Spectrum2D) -> ConservationRates2D {
    let n = nonlinear_2d(s);
    let mut rate = 0.0;
    let mut scale = 0.0;
    let mut rate_w = 0.0;
    let mut scale_w = 0.0;
    for (slot, k) in s.trunc().canonical_modes().iter().enumerate() {
        let w = s.amps()[slot];
        let t = n.amps()[slot];
        let prod = (w.conj() * t).re;
        let mag = w.norm() * t.norm();
        let inv_ksq = 1.0 / k.norm_sq() as f64;
        rate += prod;
        scale += mag;
        rate_w += prod * inv_ksq;
        scale_w += mag * inv_ksq;
    }
    // both signs contribute equally
    ConservationRates2D {
        enstrophy_rate: 2.0 * rate,
        enstrophy_scale: 2.0 * scale,
        energy_rate: 2.0 * rate_w,
        energy_scale: 2.0 * scale_w,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConservationRates3D {
    /// `Re sum conj(u_k) . dHat(u_k)/dt` under the nonlinear-only flow.
    pub energy_rate: f64,
    pub energy_scale: f64,
}

pub fn conservation_rates_3d(s: &Spectrum3D) -> ConservationRates3D {
    let sys = crate::dynamics::Galerkin3D::new(
        Arc::clone(s.trunc()),
        PhysicalParams { nu: 1.0, alpha: 2.0 },
        ForcingSpec::zero(),
    );
    let n = sys.nonlinear(s);
    let vel = velocity_from_vorticity_3d_unchecked(s);
    let two_pi = 2.0 * std::f64::consts::PI;
    let i = Complex64::new(0.0, 1.0);
    let mut rate = 0.0;
    let mut scale = 0.0;
    for (slot, k) in s.trunc().canonical_modes().iter().enumerate() {
        let u = vel.slots()[slot];
        let nk = n.amps()[slot];
        // velocity tendency mirrors the vorticity tendency
        let cross = cross_int_complex(k, &nk);
        let denom = two_pi * k.norm_sq() as f64;
        let mut prod = Complex64::new(0.0, 0.0);
        let mut un = 0.0;
        let mut tn = 0.0;
        for c in 0..3 {
            let du = cross[c] * i / denom;
            prod += u[c].conj() * du;
            un += u[c].norm_sqr();
            tn += du.norm_sqr();
        }
        rate += prod.re;
        scale += un.sqrt() * tn.sqrt();
    }
    ConservationRates3D {
        energy_rate: 2.0 * rate,
        energy_scale: 2.0 * scale,
    }
}

// ---------------------------------------------------------------------
// 3D nonlinearity, unreduced form
// ---------------------------------------------------------------------

/// Double-loop evaluation of the 3D quadratic tendency in its unreduced
/// form `-2 pi i sum [(u_{l1}, l2) w_{l2} - (w_{l1}, l2) u_{l2}]`,
/// without projection. On transversal states this equals the reduced
/// form in which `l2` is replaced by `k`.
pub fn nonlinear_3d_unreduced(s: &Spectrum3D) -> Spectrum3D {
    let vel = velocity_from_vorticity_3d_unchecked(s);
    let mut out = Spectrum3D::zeros(Arc::clone(s.trunc()));
    let minus_two_pi_i = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
    let modes: Vec<_> = s.trunc().canonical_modes().to_vec();
    for (slot, &k) in modes.iter().enumerate() {
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for &l2 in s.trunc().members() {
            let l1 = k - l2;
            if !s.trunc().contains(l1) {
                continue;
            }
            let u1 = vel.get(l1);
            let w1 = s.amp(l1);
            let u2 = vel.get(l2);
            let w2 = s.amp(l2);
            let l2f = l2.components().map(|x| x as f64);
            let mut du = Complex64::new(0.0, 0.0);
            let mut dw = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                du += u1[c] * l2f[c];
                dw += w1[c] * l2f[c];
            }
            for c in 0..3 {
                acc[c] += du * w2[c] - dw * u2[c];
            }
        }
        out.amps_mut()[slot] = acc.map(|c| minus_two_pi_i * c);
    }
    out
}

/// Reduced-form double loop (`l2` replaced by the output mode), also
/// unprojected; the independent reference for the plan-based evaluator.
pub fn nonlinear_3d_reduced_brute(s: &Spectrum3D) -> Spectrum3D {
    let vel = velocity_from_vorticity_3d_unchecked(s);
    let mut out = Spectrum3D::zeros(Arc::clone(s.trunc()));
    let minus_two_pi_i = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
    let modes: Vec<_> = s.trunc().canonical_modes().to_vec();
    for (slot, &k) in modes.iter().enumerate() {
        let kf = k.components().map(|x| x as f64);
        let mut acc = [Complex64::new(0.0, 0.0); 3];
        for &l2 in s.trunc().members() {
            let l1 = k - l2;
            if !s.trunc().contains(l1) {
                continue;
            }
            let u1 = vel.get(l1);
            let w1 = s.amp(l1);
            let u2 = vel.get(l2);
            let w2 = s.amp(l2);
            let mut du = Complex64::new(0.0, 0.0);
            let mut dw = Complex64::new(0.0, 0.0);
            for c in 0..3 {
                du += u1[c] * kf[c];
                dw += w1[c] * kf[c];
            }
            for c in 0..3 {
                acc[c] += du * w2[c] - dw * u2[c];
            }
        }
        out.amps_mut()[slot] = acc.map(|c| minus_two_pi_i * c);
    }
    out
}

// ---------------------------------------------------------------------
// inward-field audit
// ---------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SignDir {
    Plus,
    Minus,
}

impl SignDir {
    fn value(&self) -> f64 {
        match self {
            SignDir::Plus => 1.0,
            SignDir::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct InwardCheck {
    /// `d(env)/dt - sign * d(w^part)/dt`; positive iff the field points
    /// inward at the pinned boundary component.
    pub margin: f64,
    pub holds: bool,
    /// Shell-sum side of the sufficient condition (nonlinearity bound
    /// plus forcing share).
    pub paper_lhs: f64,
    /// Dissipation side of the sufficient condition.
    pub paper_rhs: f64,
}

/// Checks the inward-field condition at a state pinned to the envelope
/// boundary at `(k_bar, part, sign)`. The direct margin uses the actual
/// tendency; the sufficient-condition pair reproduces the shell-estimate
/// comparison for the same point.
pub fn verify_inward_2d(
    s: &Spectrum2D,
    env: &Envelope,
    params: &PhysicalParams,
    forcing: &ForcingSpec,
    t: f64,
    k_bar: WaveVector<2>,
    part: Part,
    sign: SignDir,
    algebraic_factor: RhsFactor,
) -> Result<InwardCheck, OracleError> {
    let bound = env.value(k_bar.norm(), t);
    let w = s.amp(k_bar);
    let component = match part {
        Part::Re => w.re,
        Part::Im => w.im,
    };
    let expected = sign.value() * bound;
    if (component - expected).abs() > 1e-9 * bound {
        return Err(OracleError::NotOnBoundary {
            found: component,
            expected,
        });
    }
    // every non-designated component above the cutoff must be inside
    let membership = crate::envelopes::membership_2d(s, env, t);
    if membership.worst_ratio > 1.0 + BOUNDARY_SLACK {
        return Err(OracleError::NotInsideEnvelope {
            ratio: membership.worst_ratio,
        });
    }

    let tendency = rhs_2d(s, params, forcing, t);
    let tk = tendency.amp(k_bar);
    let t_part = match part {
        Part::Re => tk.re,
        Part::Im => tk.im,
    };
    let env_dot = match env.kind {
        EnvelopeKind::Gevrey { rate, .. } => -rate * k_bar.norm() * bound,
        _ => 0.0,
    };
    let margin = env_dot - sign.value() * t_part;

    // sufficient-condition sides: per-pair absolute bracket sums
    let mut bracket_sum = 0.0;
    for (l1, l2) in s.trunc().convolution_pairs(k_bar) {
        let a = s.amp(l1);
        let b = s.amp(l2);
        let coeff = (dot(k_bar, l2.perp()) as f64 / l2.norm_sq() as f64).abs();
        let bracket = match part {
            Part::Re => (a.re * b.im + a.im * b.re).abs(),
            Part::Im => (a.re * b.re - a.im * b.im).abs(),
        };
        bracket_sum += bracket * coeff;
    }
    let g = if forcing.is_zero() {
        Complex64::new(0.0, 0.0)
    } else {
        forcing.sample_2d(k_bar, t).expect("nonzero mode")
    };
    let g_part = match part {
        Part::Re => g.re.abs(),
        Part::Im => g.im.abs(),
    };
    let paper_lhs = 2.0 * std::f64::consts::PI * bracket_sum + g_part;
    let dissipation_factor = match env.kind {
        EnvelopeKind::Algebraic { .. } => algebraic_factor.value(params.nu),
        _ => 4.0 * std::f64::consts::PI * std::f64::consts::PI * params.nu,
    };
    let paper_rhs =
        dissipation_factor * k_bar.norm().powf(params.alpha) * bound + env_dot.min(0.0);
    Ok(InwardCheck {
        margin,
        holds: margin > 0.0,
        paper_lhs,
        paper_rhs,
    })
}

/// Builds a random state inside the envelope, pins one component of
/// `k_bar` to the boundary, and optionally rescales the rest so the total
/// enstrophy stays below a budget (the premise of the shell estimates).
#[allow(clippy::too_many_arguments)]
pub fn boundary_state_2d(
    trunc: Arc<TruncationSet<2>>,
    env: &Envelope,
    t: f64,
    k_bar: WaveVector<2>,
    part: Part,
    sign: SignDir,
    seed: u64,
    enstrophy_budget: Option<f64>,
) -> Result<Spectrum2D, OracleError> {
    if !trunc.contains(k_bar) {
        return Err(OracleError::ModeOutside {
            k: format!("{:?}", k_bar.components()),
        });
    }
    let mut rng = TrialRng::new(seed);
    let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
    for (slot, &k) in trunc.canonical_modes().iter().enumerate() {
        let bound = env.value(k.norm(), t);
        // strictly inside so only the pinned component sits on the boundary
        let re = 0.95 * rng.symmetric() * bound;
        let im = 0.95 * rng.symmetric() * bound;
        s.amps_mut()[slot] = Complex64::new(re, im);
    }
    let pinned = sign.value() * env.value(k_bar.norm(), t);
    let (slot, conj) = trunc.canonical_slot(k_bar).expect("member");
    let set_pinned = |s: &mut Spectrum2D| {
        let a = &mut s.amps_mut()[slot];
        match (part, conj) {
            (Part::Re, _) => a.re = pinned,
            (Part::Im, false) => a.im = pinned,
            (Part::Im, true) => a.im = -pinned,
        }
    };
    set_pinned(&mut s);
    if let Some(budget) = enstrophy_budget {
        let pinned_total = 2.0 * pinned * pinned;
        if pinned_total >= budget {
            return Err(OracleError::BoundaryExceedsBudget { budget });
        }
        let rest = s.enstrophy() - pinned_total;
        let target = 0.98 * budget - pinned_total;
        if rest > target {
            let scale = (target / rest).sqrt();
            for a in s.amps_mut() {
                *a *= scale;
            }
            set_pinned(&mut s);
        }
    }
    Ok(s)
}

/// Random transversal 3D state with componentwise magnitudes under the
/// given envelope (used by the conservation and equivalence audits).
pub fn random_transversal_3d(
    trunc: Arc<TruncationSet<3>>,
    amplitude: f64,
    decay: f64,
    seed: u64,
) -> Spectrum3D {
    let mut rng = TrialRng::new(seed);
    let mut s = Spectrum3D::zeros(Arc::clone(&trunc));
    let modes: Vec<_> = trunc.canonical_modes().to_vec();
    for (slot, k) in modes.iter().enumerate() {
        let bound = amplitude / k.norm().powf(decay);
        let mut v = [
            Complex64::new(rng.symmetric(), rng.symmetric()),
            Complex64::new(rng.symmetric(), rng.symmetric()),
            Complex64::new(rng.symmetric(), rng.symmetric()),
        ];
        crate::state::project_perp(k, &mut v);
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            let scale = bound * rng.unit() / norm;
            for c in v.iter_mut() {
                *c *= scale;
            }
        }
        s.amps_mut()[slot] = v;
    }
    s
}

/// Random 2D state with componentwise magnitudes under the envelope.
pub fn random_spectrum_2d(
    trunc: Arc<TruncationSet<2>>,
    amplitude: f64,
    decay: f64,
    seed: u64,
) -> Spectrum2D {
    let mut rng = TrialRng::new(seed);
    let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
    for (slot, &k) in trunc.canonical_modes().iter().enumerate() {
        let bound = amplitude / k.norm().powf(decay);
        s.amps_mut()[slot] = Complex64::new(
            rng.symmetric() * bound,
            rng.symmetric() * bound,
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::velocity_from_vorticity_3d;

    fn wv2(x: i64, y: i64) -> WaveVector<2> {
        WaveVector::new([x, y])
    }

    #[test]
    fn brute_sums_zero_sequences() {
        let trunc = TruncationSet::<2>::disk(3.0).unwrap();
        let zero = |_: WaveVector<2>| 0.0;
        let (s1, s2, s3) = brute_shell_sums(&zero, &zero, wv2(2, 0), &trunc);
        assert_eq!((s1, s2, s3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn brute_sums_single_supported_pair() {
        // a supported on (1,0), b on (1,0): the only pair for k=(2,0) is
        // ((1,0),(1,0)) with weight |k|/|l2| = 2, so the term is 2ab.
        // |l2| = |k|/2 exactly, which the non-strict threshold puts in the
        // near shell.
        let trunc = TruncationSet::<2>::disk(1.0).unwrap();
        let a = |k: WaveVector<2>| if k == wv2(1, 0) { 0.7 } else { 0.0 };
        let b = |k: WaveVector<2>| if k == wv2(1, 0) { 0.4 } else { 0.0 };
        let (s1, s2, s3) = brute_shell_sums(&a, &b, wv2(2, 0), &trunc);
        assert!((s1 - 2.0 * 0.7 * 0.4).abs() < 1e-15);
        assert_eq!(s2, 0.0);
        assert_eq!(s3, 0.0);
    }

    #[test]
    fn shell_sums_add_up_to_total() {
        let trunc = Arc::new(TruncationSet::<2>::disk(12.0).unwrap());
        let a = MagnitudeMap::random_under_envelope(Arc::clone(&trunc), 1.0, 2.0, 5);
        let b = MagnitudeMap::random_under_envelope(Arc::clone(&trunc), 1.0, 2.0, 6);
        for (i, k) in [wv2(3, 1), wv2(-5, 2), wv2(0, 7), wv2(10, -3)].iter().enumerate() {
            let _ = i;
            let af = |x| a.get(x);
            let bf = |x| b.get(x);
            let (s1, s2, s3) = brute_shell_sums(&af, &bf, *k, &trunc);
            let total = brute_total(&af, &bf, *k, &trunc);
            assert!((s1 + s2 + s3 - total).abs() <= 1e-12 * total.max(1e-30));
        }
    }

    #[test]
    fn conservation_rates_vanish_on_random_state() {
        let trunc = Arc::new(TruncationSet::<2>::disk(6.0).unwrap());
        let s = random_spectrum_2d(trunc, 1.0, 1.0, 99);
        let rates = conservation_rates_2d(&s);
        assert!(rates.enstrophy_rate.abs() <= 1e-12 * rates.enstrophy_scale);
        assert!(rates.energy_rate.abs() <= 1e-12 * rates.energy_scale);
    }

    #[test]
    fn conservation_rates_zero_cases() {
        let trunc = Arc::new(TruncationSet::<2>::disk(2.0).unwrap());
        let zero = Spectrum2D::zeros(Arc::clone(&trunc));
        let r = conservation_rates_2d(&zero);
        assert_eq!(r.enstrophy_rate, 0.0);
        let single =
            Spectrum2D::from_modes(trunc, [(wv2(1, 0), Complex64::new(0.5, 0.5))]).unwrap();
        let r = conservation_rates_2d(&single);
        assert_eq!(r.enstrophy_rate, 0.0);
        assert_eq!(r.enstrophy_scale, 0.0);
    }

    #[test]
    fn unreduced_form_matches_reduced_on_transversal_states() {
        let trunc = Arc::new(TruncationSet::<3>::disk(2.0).unwrap());
        let s = random_transversal_3d(trunc, 1.0, 1.0, 17);
        velocity_from_vorticity_3d(&s).unwrap();
        let un = nonlinear_3d_unreduced(&s);
        let red = nonlinear_3d_reduced_brute(&s);
        let scale: f64 = red
            .amps()
            .iter()
            .map(|v| v.iter().map(|c| c.norm()).sum::<f64>())
            .sum();
        for (a, b) in un.amps().iter().zip(red.amps()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).norm() <= 1e-12 * scale.max(1e-30));
            }
        }
    }

    #[test]
    fn pure_dissipation_boundary_points_inward() {
        // single conjugate pair at the boundary, no forcing: the margin is
        // exactly the dissipation pull
        let trunc = Arc::new(TruncationSet::<2>::disk(4.0).unwrap());
        let env = Envelope {
            kind: EnvelopeKind::Algebraic {
                amplitude: 1.0,
                decay: 2.0,
            },
            low_mode_cutoff: 1.0,
        };
        let k_bar = wv2(3, 1);
        let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
        let bound = env.value(k_bar.norm(), 0.0);
        s.set_amp(k_bar, Complex64::new(bound, 0.0)).unwrap();
        let params = PhysicalParams::new(0.8, 2.0).unwrap();
        let check = verify_inward_2d(
            &s,
            &env,
            &params,
            &ForcingSpec::zero(),
            0.0,
            k_bar,
            Part::Re,
            SignDir::Plus,
            RhsFactor::FourPiNu,
        )
        .unwrap();
        assert!(check.holds);
        let expected = params.dissipation_rate(k_bar) * bound;
        assert!((check.margin - expected).abs() <= 1e-12 * expected);
        // paper-side margin is positive and weaker than the direct one
        assert!(check.paper_rhs - check.paper_lhs > 0.0);
        assert!(check.margin >= check.paper_rhs - check.paper_lhs - 1e-12 * expected);
    }

    #[test]
    fn boundary_precondition_is_enforced() {
        let trunc = Arc::new(TruncationSet::<2>::disk(3.0).unwrap());
        let env = Envelope {
            kind: EnvelopeKind::Algebraic {
                amplitude: 1.0,
                decay: 2.0,
            },
            low_mode_cutoff: 1.0,
        };
        let s = Spectrum2D::zeros(Arc::clone(&trunc));
        let params = PhysicalParams::new(1.0, 2.0).unwrap();
        assert!(matches!(
            verify_inward_2d(
                &s,
                &env,
                &params,
                &ForcingSpec::zero(),
                0.0,
                wv2(2, 1),
                Part::Re,
                SignDir::Plus,
                RhsFactor::FourPiNu,
            ),
            Err(OracleError::NotOnBoundary { .. })
        ));
    }

    #[test]
    fn boundary_state_respects_budget_and_pin() {
        let trunc = Arc::new(TruncationSet::<2>::disk(6.0).unwrap());
        let env = Envelope {
            kind: EnvelopeKind::Algebraic {
                amplitude: 2.0,
                decay: 2.0,
            },
            low_mode_cutoff: 2.0,
        };
        let k_bar = wv2(3, 2);
        let budget = 0.5;
        let s = boundary_state_2d(
            Arc::clone(&trunc),
            &env,
            0.0,
            k_bar,
            Part::Im,
            SignDir::Minus,
            1234,
            Some(budget),
        )
        .unwrap();
        assert!(s.enstrophy() <= budget);
        let expected = -env.value(k_bar.norm(), 0.0);
        assert!((s.amp(k_bar).im - expected).abs() <= 1e-12 * expected.abs());
        let m = crate::envelopes::membership_2d(&s, &env, 0.0);
        assert!(m.worst_ratio <= 1.0 + BOUNDARY_SLACK);
    }
}
