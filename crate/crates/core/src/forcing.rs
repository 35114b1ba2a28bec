//! Deterministic forcing generators with prescribed Fourier envelopes.
//!
//! Every sample is `envelope(k) * exp(i*theta(k)) * m(t)` with a seeded
//! hash phase satisfying `theta(-k) = -theta(k)` and `|m(t)| <= 1`, so the
//! configured amplitude constant is an exact envelope bound, not a fit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{lattice_sum, LatticeError, SumRegion, TruncationSet, WaveVector};

#[derive(Debug, Error)]
pub enum ForcingError {
    #[error("forcing is not defined at the zero mode")]
    ZeroMode,
    #[error("forcing envelope squared exponent {q} does not decay fast enough in dimension {d}")]
    EnvelopeNotSquareSummable { d: usize, q: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Temporal {
    Constant,
    Sinusoid { frequency: f64 },
}

impl Temporal {
    /// `|m(t)| <= 1` by construction.
    pub fn modulation(&self, t: f64) -> f64 {
        match self {
            Temporal::Constant => 1.0,
            Temporal::Sinusoid { frequency } => {
                (2.0 * std::f64::consts::PI * frequency * t).cos()
            }
        }
    }
}

/// Mode band of a trigonometric-polynomial forcing.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "band")]
pub enum BandSpec {
    /// All nonzero modes with `|k| <= k_max`.
    Ball { k_max: f64 },
    /// An explicit list of representatives; `-k` is implied for each entry.
    Modes { modes: Vec<Vec<i64>> },
}

impl BandSpec {
    fn contains<const D: usize>(&self, k: WaveVector<D>) -> bool {
        match self {
            BandSpec::Ball { k_max } => (k.norm_sq() as f64) <= k_max * k_max,
            BandSpec::Modes { modes } => {
                let c = k.components();
                let n = (-k).components();
                modes
                    .iter()
                    .any(|m| m.len() == D && (m.iter().eq(c.iter()) || m.iter().eq(n.iter())))
            }
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            BandSpec::Ball { k_max } => *k_max,
            BandSpec::Modes { modes } => modes
                .iter()
                .map(|m| m.iter().map(|x| (x * x) as f64).sum::<f64>().sqrt())
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ForcingKind {
    /// No forcing.
    Zero,
    /// `|g_k| <= G / |k|^(r - alpha_ref + epsilon)`.
    PowerLaw {
        amplitude: f64,
        decay: f64,
        epsilon: f64,
        alpha_ref: f64,
    },
    /// `|g_k| <= G * exp(-gamma |k|^(1+delta)) / |k|^(r - alpha_ref + epsilon)`.
    Exponential {
        amplitude: f64,
        decay: f64,
        epsilon: f64,
        alpha_ref: f64,
        gamma: f64,
        delta: f64,
    },
    /// Constant amplitude on a finite band, zero outside.
    TrigPoly { amplitude: f64, band: BandSpec },
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ForcingSpec {
    #[serde(flatten)]
    pub kind: ForcingKind,
    pub temporal: Temporal,
    pub phase_seed: u64,
}

impl ForcingSpec {
    pub fn zero() -> Self {
        Self {
            kind: ForcingKind::Zero,
            temporal: Temporal::Constant,
            phase_seed: 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ForcingKind::Zero)
    }

    /// Envelope value at a mode; the exact bound on `|g_k(t)|` for all `t`.
    pub fn envelope<const D: usize>(&self, k: WaveVector<D>) -> f64 {
        let kn = k.norm();
        match &self.kind {
            ForcingKind::Zero => 0.0,
            ForcingKind::PowerLaw {
                amplitude,
                decay,
                epsilon,
                alpha_ref,
            } => amplitude * kn.powf(-(decay - alpha_ref + epsilon)),
            ForcingKind::Exponential {
                amplitude,
                decay,
                epsilon,
                alpha_ref,
                gamma,
                delta,
            } => {
                amplitude
                    * (-gamma * kn.powf(1.0 + delta)).exp()
                    * kn.powf(-(decay - alpha_ref + epsilon))
            }
            ForcingKind::TrigPoly { amplitude, band } => {
                if band.contains(k) {
                    *amplitude
                } else {
                    0.0
                }
            }
        }
    }

    /// Seeded phase with `theta(-k) = -theta(k)`.
    fn phase<const D: usize>(&self, k: WaveVector<D>) -> f64 {
        let (rep, negated) = k.canonical();
        let mut h = self.phase_seed ^ 0x6a09e667f3bcc908;
        for &c in rep.components().iter() {
            h = splitmix64(h ^ (c as u64));
        }
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        let theta = 2.0 * std::f64::consts::PI * u;
        if negated {
            -theta
        } else {
            theta
        }
    }

    /// Scalar forcing sample for the 2D system.
    pub fn sample_2d(&self, k: WaveVector<2>, t: f64) -> Result<Complex64, ForcingError> {
        if k.is_zero() {
            return Err(ForcingError::ZeroMode);
        }
        let mag = self.envelope(k) * self.temporal.modulation(t);
        Ok(Complex64::from_polar(mag, self.phase(k)))
    }

    /// Transversal vector forcing sample for the 3D system: the seeded
    /// phase times a real unit vector orthogonal to `k`, so `(k, g_k) = 0`
    /// and `g_{-k} = conj(g_k)`. The direction is taken from the canonical
    /// representative of `{k, -k}` so it is even in `k`.
    pub fn sample_3d(&self, k: WaveVector<3>, t: f64) -> Result<[Complex64; 3], ForcingError> {
        if k.is_zero() {
            return Err(ForcingError::ZeroMode);
        }
        let mag = self.envelope(k) * self.temporal.modulation(t);
        let scalar = Complex64::from_polar(mag, self.phase(k));
        let dir = transversal_direction(k.canonical().0);
        Ok([scalar * dir[0], scalar * dir[1], scalar * dir[2]])
    }

    /// Certified upper bound of `sup_t (sum_{k in Z} |g_k(t)|^2)^(1/2)`:
    /// the envelope's l2 norm over the set.
    pub fn g_star<const D: usize>(&self, trunc: &TruncationSet<D>) -> f64 {
        trunc
            .members()
            .iter()
            .map(|&k| {
                let e = self.envelope(k);
                e * e
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Certified upper bound of the envelope's l2 norm over all of
    /// `Z^d \ 0`, independent of any truncation. Used wherever constants
    /// must not depend on the Galerkin set.
    pub fn g_star_all(&self, d: usize) -> Result<f64, ForcingError> {
        match &self.kind {
            ForcingKind::Zero => Ok(0.0),
            ForcingKind::TrigPoly { amplitude, band } => {
                let radius = band.outer_radius();
                let trunc_big = match d {
                    2 => TruncationSet::<2>::disk(radius.max(1.0))
                        .map(|z| {
                            z.members()
                                .iter()
                                .filter(|&&k| band.contains(k))
                                .count() as f64
                        })
                        .map_err(ForcingError::from)?,
                    3 => TruncationSet::<3>::disk(radius.max(1.0))
                        .map(|z| {
                            z.members()
                                .iter()
                                .filter(|&&k| band.contains(k))
                                .count() as f64
                        })
                        .map_err(ForcingError::from)?,
                    _ => panic!("only dimensions 2 and 3 are supported"),
                };
                Ok(amplitude * trunc_big.sqrt())
            }
            ForcingKind::PowerLaw {
                amplitude,
                decay,
                epsilon,
                alpha_ref,
            } => {
                let q = 2.0 * (decay - alpha_ref + epsilon);
                if q <= d as f64 {
                    return Err(ForcingError::EnvelopeNotSquareSummable { d, q });
                }
                Ok(amplitude * lattice_sum(d, q, SumRegion::All)?.sqrt())
            }
            ForcingKind::Exponential {
                amplitude,
                decay,
                epsilon,
                alpha_ref,
                gamma,
                delta,
            } => {
                let q = 2.0 * (decay - alpha_ref + epsilon);
                let r0 = 32.0;
                let head: f64 = {
                    // exact enumeration of the squared envelope over |k| <= r0
                    let mut total = 0.0;
                    let sq = |kn: f64| {
                        ((-gamma * kn.powf(1.0 + delta)).exp() * kn.powf(-0.5 * q)).powi(2)
                    };
                    match d {
                        2 => {
                            let t = TruncationSet::<2>::disk(r0)?;
                            for k in t.members() {
                                total += sq(k.norm());
                            }
                        }
                        3 => {
                            let t = TruncationSet::<3>::disk(r0)?;
                            for k in t.members() {
                                total += sq(k.norm());
                            }
                        }
                        _ => panic!("only dimensions 2 and 3 are supported"),
                    }
                    total
                };
                // tail: envelope^2 = |k|^{-(d+1)} * h(|k|) with
                // h(t) = t^{d+1-q} exp(-2 gamma t^{1+delta}), bounded by its
                // supremum over [r0, inf)
                let m = (d as f64) + 1.0 - q;
                let two_gamma = 2.0 * gamma;
                let h = |t: f64| t.powf(m) * (-two_gamma * t.powf(1.0 + delta)).exp();
                let sup = if m <= 0.0 {
                    h(r0)
                } else {
                    let t_crit = (m / (two_gamma * (1.0 + delta))).powf(1.0 / (1.0 + delta));
                    h(t_crit.max(r0))
                };
                let tail =
                    sup * lattice_sum(d, (d as f64) + 1.0, SumRegion::ComplementBall(r0))?;
                Ok(amplitude * (head + tail).sqrt())
            }
        }
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic real unit vector orthogonal to the integer vector `k`:
/// the normalized cross product of `k` with the axis of its smallest
/// absolute component.
pub(crate) fn transversal_direction(k: WaveVector<3>) -> [f64; 3] {
    let c = k.components();
    let mut axis = 0;
    for i in 1..3 {
        if c[i].abs() < c[axis].abs() {
            axis = i;
        }
    }
    let mut e = [0i64; 3];
    e[axis] = 1;
    let cross = [
        c[1] * e[2] - c[2] * e[1],
        c[2] * e[0] - c[0] * e[2],
        c[0] * e[1] - c[1] * e[0],
    ];
    let n = cross.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
    cross.map(|x| x as f64 / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TruncationSet;

    fn wv2(x: i64, y: i64) -> WaveVector<2> {
        WaveVector::new([x, y])
    }

    fn power_law_spec() -> ForcingSpec {
        ForcingSpec {
            kind: ForcingKind::PowerLaw {
                amplitude: 1.0,
                decay: 3.0,
                epsilon: 0.5,
                alpha_ref: 2.0,
            },
            temporal: Temporal::Constant,
            phase_seed: 42,
        }
    }

    #[test]
    fn zero_forcing_is_zero() {
        let spec = ForcingSpec::zero();
        for t in [0.0, 1.3, 100.0] {
            assert_eq!(spec.sample_2d(wv2(1, 2), t).unwrap().norm(), 0.0);
        }
        let z = TruncationSet::<2>::disk(4.0).unwrap();
        assert_eq!(spec.g_star(&z), 0.0);
        assert_eq!(spec.g_star_all(2).unwrap(), 0.0);
    }

    #[test]
    fn power_law_magnitude_formula() {
        let spec = power_law_spec();
        let g = spec.sample_2d(wv2(2, 0), 0.0).unwrap();
        // |g| = 1 / 2^(3 - 2 + 0.5) = 2^(-1.5)
        assert!((g.norm() - 2.0f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn exponential_magnitude_formula() {
        let spec = ForcingSpec {
            kind: ForcingKind::Exponential {
                amplitude: 1.0,
                decay: 3.0,
                epsilon: 0.5,
                alpha_ref: 2.0,
                gamma: 0.1,
                delta: 0.5,
            },
            temporal: Temporal::Constant,
            phase_seed: 42,
        };
        let g = spec.sample_2d(wv2(4, 0), 0.0).unwrap();
        let expected = 4.0f64.powf(-1.5) * (-0.1 * 4.0f64.powf(1.5)).exp();
        assert!((g.norm() - expected).abs() < 1e-15);
        assert!((expected - 0.125 * (-0.8f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn zero_mode_is_a_domain_error() {
        let spec = power_law_spec();
        assert!(matches!(
            spec.sample_2d(wv2(0, 0), 0.0),
            Err(ForcingError::ZeroMode)
        ));
    }

    #[test]
    fn reality_symmetry_is_exact() {
        let spec = power_law_spec();
        for k in [wv2(1, 0), wv2(-2, 3), wv2(0, -4), wv2(5, 5)] {
            for t in [0.0, 0.37] {
                let a = spec.sample_2d(k, t).unwrap();
                let b = spec.sample_2d(-k, t).unwrap();
                assert_eq!(a.conj(), b);
            }
        }
    }

    #[test]
    fn envelope_compliance_over_many_samples() {
        let specs = [
            power_law_spec(),
            ForcingSpec {
                kind: ForcingKind::Exponential {
                    amplitude: 2.0,
                    decay: 3.0,
                    epsilon: 0.5,
                    alpha_ref: 2.0,
                    gamma: 0.2,
                    delta: 0.5,
                },
                temporal: Temporal::Sinusoid { frequency: 1.3 },
                phase_seed: 7,
            },
            ForcingSpec {
                kind: ForcingKind::TrigPoly {
                    amplitude: 0.5,
                    band: BandSpec::Ball { k_max: 2.0 },
                },
                temporal: Temporal::Sinusoid { frequency: 0.4 },
                phase_seed: 9,
            },
        ];
        let mut rng = 0xfeedu64;
        let mut next = || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            rng
        };
        for spec in &specs {
            for _ in 0..1_000_000 {
                let x = (next() % 21) as i64 - 10;
                let y = (next() % 21) as i64 - 10;
                if x == 0 && y == 0 {
                    continue;
                }
                let t = (next() % 10_000) as f64 / 100.0;
                let k = wv2(x, y);
                let g = spec.sample_2d(k, t).unwrap();
                assert!(
                    g.norm() <= spec.envelope(k) * (1.0 + 1e-15),
                    "envelope violated at {k:?}"
                );
            }
        }
    }

    #[test]
    fn trig_poly_3d_is_transversal_and_real_symmetric() {
        let spec = ForcingSpec {
            kind: ForcingKind::TrigPoly {
                amplitude: 1.5,
                band: BandSpec::Ball { k_max: 2.0 },
            },
            temporal: Temporal::Constant,
            phase_seed: 3,
        };
        let z = TruncationSet::<3>::disk(2.0).unwrap();
        for &k in z.members() {
            let g = spec.sample_3d(k, 0.5).unwrap();
            let gn = g.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let kc = k.components();
            let mut d = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                d += g[i] * kc[i] as f64;
            }
            assert!(d.norm() <= 1e-14 * gn.max(1e-300) * k.norm());
            let gm = spec.sample_3d(-k, 0.5).unwrap();
            for i in 0..3 {
                assert_eq!(g[i].conj(), gm[i]);
            }
        }
    }

    #[test]
    fn g_star_trig_two_modes() {
        let a = 0.7;
        let spec = ForcingSpec {
            kind: ForcingKind::TrigPoly {
                amplitude: a,
                band: BandSpec::Modes {
                    modes: vec![vec![1, 0]],
                },
            },
            temporal: Temporal::Constant,
            phase_seed: 0,
        };
        let z = TruncationSet::<2>::disk(3.0).unwrap();
        assert!((spec.g_star(&z) - (2.0 * a * a).sqrt()).abs() < 1e-15);
        assert!((spec.g_star_all(2).unwrap() - (2.0 * a * a).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn g_star_power_law_matches_direct_enumeration() {
        let spec = ForcingSpec {
            kind: ForcingKind::PowerLaw {
                amplitude: 1.0,
                decay: 3.0,
                epsilon: 1.0,
                alpha_ref: 2.0,
            },
            temporal: Temporal::Constant,
            phase_seed: 0,
        };
        let z = TruncationSet::<2>::disk(8.0).unwrap();
        // envelope = |k|^{-2}, so g*^2 = sum |k|^{-4} over Z
        let direct: f64 = z.members().iter().map(|k| (k.norm_sq() as f64).powi(-2)).sum();
        assert!((spec.g_star(&z) - direct.sqrt()).abs() <= 1e-13);
        // the truncation-free bound dominates every truncated one
        assert!(spec.g_star_all(2).unwrap() >= spec.g_star(&z));
    }

    #[test]
    fn g_star_exponential_all_dominates_truncations() {
        let spec = ForcingSpec {
            kind: ForcingKind::Exponential {
                amplitude: 1.0,
                decay: 3.0,
                epsilon: 0.5,
                alpha_ref: 2.0,
                gamma: 0.2,
                delta: 0.5,
            },
            temporal: Temporal::Constant,
            phase_seed: 0,
        };
        let bound = spec.g_star_all(2).unwrap();
        for r in [4.0, 12.0, 40.0] {
            let z = TruncationSet::<2>::disk(r).unwrap();
            assert!(bound >= spec.g_star(&z));
        }
    }

    #[test]
    fn power_law_divergent_envelope_rejected() {
        let spec = ForcingSpec {
            kind: ForcingKind::PowerLaw {
                amplitude: 1.0,
                decay: 2.0,
                epsilon: 0.5,
                alpha_ref: 2.0,
            },
            temporal: Temporal::Constant,
            phase_seed: 0,
        };
        // q = 2*(2 - 2 + 0.5) = 1 <= 2
        assert!(matches!(
            spec.g_star_all(2),
            Err(ForcingError::EnvelopeNotSquareSummable { .. })
        ));
    }
}
