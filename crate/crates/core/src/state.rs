//! Fourier coefficient states for 2D scalar vorticity and 3D vector
//! vorticity, with velocity recovery.
//!
//! Only the canonical half of the mode set is stored (one representative
//! per `{k, -k}` pair, first nonzero component positive), so the reality
//! constraint `w_{-k} = conj(w_k)` holds structurally and cannot be
//! broken by arithmetic.
//!
//! Sign conventions: the scalar 2D vorticity is `dU1/dx2 - dU2/dx1`
//! (note the order), and with the Fourier basis `exp(2*pi*i*(k,x))` the
//! exact vorticity/velocity relation carries a `2*pi` factor:
//! `|w_k| = 2*pi*|k|*|u_k|`.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{TruncationSet, WaveVector};

pub const TRANSVERSALITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("mode {k:?} is not a member of the truncation set")]
    ModeOutsideTruncation { k: String },
    #[error("the zero mode carries no amplitude (zero-mean constraint)")]
    ZeroMode,
    #[error("transversality violated at mode {k:?}: |(k,w_k)| = {residual:.3e} > {tol:.3e} * |w_k|")]
    NotTransversal { k: String, residual: f64, tol: f64 },
}

/// Scalar vorticity spectrum on a 2D truncation set.
#[derive(Clone, Debug)]
pub struct Spectrum2D {
    trunc: Arc<TruncationSet<2>>,
    amps: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(trunc: Arc<TruncationSet<2>>) -> Self {
        let n = trunc.canonical_modes().len();
        Self {
            trunc,
            amps: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_modes<I>(trunc: Arc<TruncationSet<2>>, modes: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (WaveVector<2>, Complex64)>,
    {
        let mut s = Self::zeros(trunc);
        for (k, v) in modes {
            s.set_amp(k, v)?;
        }
        Ok(s)
    }

    pub fn trunc(&self) -> &Arc<TruncationSet<2>> {
        &self.trunc
    }

    /// Raw canonical-slot amplitudes, ordered as `trunc.canonical_modes()`.
    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Amplitude at any lattice point; zero outside the set, conjugated for
    /// non-canonical representatives.
    pub fn amp(&self, k: WaveVector<2>) -> Complex64 {
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.amps[slot],
            Some((slot, true)) => self.amps[slot].conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Sets the amplitude at `k` (and implicitly `conj` at `-k`).
    pub fn set_amp(&mut self, k: WaveVector<2>, v: Complex64) -> Result<(), StateError> {
        if k.is_zero() {
            return Err(StateError::ZeroMode);
        }
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.amps[slot] = v,
            Some((slot, true)) => self.amps[slot] = v.conj(),
            None => {
                return Err(StateError::ModeOutsideTruncation {
                    k: format!("{:?}", k.components()),
                })
            }
        }
        Ok(())
    }

    /// `sum over the full symmetric set of |w_k|^2`.
    pub fn enstrophy(&self) -> f64 {
        2.0 * self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    /// `sum over the full symmetric set of |u_k|^2` with
    /// `|u_k| = |w_k| / (2 pi |k|)`.
    pub fn energy(&self) -> f64 {
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        2.0 * self
            .trunc
            .canonical_modes()
            .iter()
            .zip(&self.amps)
            .map(|(k, a)| a.norm_sqr() / (four_pi_sq * k.norm_sq() as f64))
            .sum::<f64>()
    }

    /// Copies amplitudes onto another truncation set, dropping modes
    /// outside it. Idempotent and enstrophy-non-increasing.
    pub fn restrict(&self, target: Arc<TruncationSet<2>>) -> Spectrum2D {
        let mut out = Spectrum2D::zeros(target);
        for (slot, &k) in out.trunc.canonical_modes().iter().enumerate() {
            out.amps[slot] = self.amp(k);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Velocity field recovered from a 2D vorticity spectrum.
#[derive(Clone, Debug)]
pub struct Velocity2D {
    trunc: Arc<TruncationSet<2>>,
    vels: Vec<[Complex64; 2]>,
}

impl Velocity2D {
    pub fn get(&self, k: WaveVector<2>) -> [Complex64; 2] {
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.vels[slot],
            Some((slot, true)) => {
                let v = self.vels[slot];
                [v[0].conj(), v[1].conj()]
            }
            None => [Complex64::new(0.0, 0.0); 2],
        }
    }

    pub fn slots(&self) -> &[[Complex64; 2]] {
        &self.vels
    }
}

/// `u_k = w_k (k2, -k1) / (2 pi i |k|^2)`; satisfies `(k, u_k) = 0` and
/// reproduces `w_k = 2 pi i (k2 u_{k,1} - k1 u_{k,2})` exactly.
pub fn velocity_from_vorticity_2d(s: &Spectrum2D) -> Velocity2D {
    let two_pi = 2.0 * std::f64::consts::PI;
    let vels = s
        .trunc
        .canonical_modes()
        .iter()
        .zip(&s.amps)
        .map(|(k, &w)| {
            let [k1, k2] = k.components();
            let denom = two_pi * k.norm_sq() as f64;
            // division by i = multiplication by -i
            let base = w * Complex64::new(0.0, -1.0) / denom;
            [base * k2 as f64, base * (-k1) as f64]
        })
        .collect();
    Velocity2D {
        trunc: Arc::clone(&s.trunc),
        vels,
    }
}

/// Vector vorticity spectrum on a 3D truncation set. Amplitudes are kept
/// transversal (`(k, w_k) = 0`) by the dynamics.
#[derive(Clone, Debug)]
pub struct Spectrum3D {
    trunc: Arc<TruncationSet<3>>,
    amps: Vec<[Complex64; 3]>,
}

impl Spectrum3D {
    pub fn zeros(trunc: Arc<TruncationSet<3>>) -> Self {
        let n = trunc.canonical_modes().len();
        Self {
            trunc,
            amps: vec![[Complex64::new(0.0, 0.0); 3]; n],
        }
    }

    pub fn from_modes<I>(trunc: Arc<TruncationSet<3>>, modes: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (WaveVector<3>, [Complex64; 3])>,
    {
        let mut s = Self::zeros(trunc);
        for (k, v) in modes {
            s.set_amp(k, v)?;
        }
        Ok(s)
    }

    pub fn trunc(&self) -> &Arc<TruncationSet<3>> {
        &self.trunc
    }

    pub fn amps(&self) -> &[[Complex64; 3]] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [[Complex64; 3]] {
        &mut self.amps
    }

    pub fn amp(&self, k: WaveVector<3>) -> [Complex64; 3] {
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.amps[slot],
            Some((slot, true)) => conj3(self.amps[slot]),
            None => [Complex64::new(0.0, 0.0); 3],
        }
    }

    pub fn set_amp(&mut self, k: WaveVector<3>, v: [Complex64; 3]) -> Result<(), StateError> {
        if k.is_zero() {
            return Err(StateError::ZeroMode);
        }
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.amps[slot] = v,
            Some((slot, true)) => self.amps[slot] = conj3(v),
            None => {
                return Err(StateError::ModeOutsideTruncation {
                    k: format!("{:?}", k.components()),
                })
            }
        }
        Ok(())
    }

    /// `sum over the full set of |w_k|^2` (all three components).
    pub fn enstrophy(&self) -> f64 {
        2.0 * self
            .amps
            .iter()
            .map(|v| v.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum::<f64>()
    }

    /// `sum over the full set of |u_k|^2 = |w_k|^2 / (4 pi^2 |k|^2)`.
    pub fn energy(&self) -> f64 {
        let four_pi_sq = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        2.0 * self
            .trunc
            .canonical_modes()
            .iter()
            .zip(&self.amps)
            .map(|(k, v)| {
                v.iter().map(|c| c.norm_sqr()).sum::<f64>() / (four_pi_sq * k.norm_sq() as f64)
            })
            .sum::<f64>()
    }

    /// Worst relative transversality residual `|(k, w_k)| / |w_k|` over
    /// nonzero modes.
    pub fn transversality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, v) in self.trunc.canonical_modes().iter().zip(&self.amps) {
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let kc = k.components();
            let mut d = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                d += v[i] * kc[i] as f64;
            }
            worst = worst.max(d.norm() / (norm * k.norm()));
        }
        worst
    }

    pub fn check_transversal(&self, tol: f64) -> Result<(), StateError> {
        for (k, v) in self.trunc.canonical_modes().iter().zip(&self.amps) {
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let kc = k.components();
            let mut d = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                d += v[i] * kc[i] as f64;
            }
            let residual = d.norm() / k.norm();
            if residual > tol * norm {
                return Err(StateError::NotTransversal {
                    k: format!("{:?}", kc),
                    residual,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// Removes the component of every amplitude along its wave vector.
    pub fn project_transversal(&mut self) {
        let modes = Arc::clone(&self.trunc);
        for (k, v) in modes.canonical_modes().iter().zip(self.amps.iter_mut()) {
            project_perp(k, v);
        }
    }

    pub fn restrict(&self, target: Arc<TruncationSet<3>>) -> Spectrum3D {
        let mut out = Spectrum3D::zeros(target);
        for (slot, &k) in out.trunc.canonical_modes().iter().enumerate() {
            out.amps[slot] = self.amp(k);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.amps
            .iter()
            .all(|v| v.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}

pub(crate) fn conj3(v: [Complex64; 3]) -> [Complex64; 3] {
    [v[0].conj(), v[1].conj(), v[2].conj()]
}

/// In-place projection of a complex 3-vector onto the plane orthogonal
/// to the integer vector `k`.
pub(crate) fn project_perp(k: &WaveVector<3>, v: &mut [Complex64; 3]) {
    let kc = k.components();
    let nsq = k.norm_sq() as f64;
    let mut d = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        d += v[i] * kc[i] as f64;
    }
    let scale = d / nsq;
    for i in 0..3 {
        v[i] -= scale * kc[i] as f64;
    }
}

/// Cross product of an integer vector with a complex vector.
pub(crate) fn cross_int_complex(k: &WaveVector<3>, v: &[Complex64; 3]) -> [Complex64; 3] {
    let [k1, k2, k3] = k.components().map(|x| x as f64);
    [
        v[2] * k2 - v[1] * k3,
        v[0] * k3 - v[2] * k1,
        v[1] * k1 - v[0] * k2,
    ]
}

/// Velocity field recovered from a 3D vorticity spectrum.
#[derive(Clone, Debug)]
pub struct Velocity3D {
    trunc: Arc<TruncationSet<3>>,
    vels: Vec<[Complex64; 3]>,
}

impl Velocity3D {
    pub fn get(&self, k: WaveVector<3>) -> [Complex64; 3] {
        match self.trunc.canonical_slot(k) {
            Some((slot, false)) => self.vels[slot],
            Some((slot, true)) => conj3(self.vels[slot]),
            None => [Complex64::new(0.0, 0.0); 3],
        }
    }

    pub fn slots(&self) -> &[[Complex64; 3]] {
        &self.vels
    }
}

/// `u_k = i (k x w_k) / (2 pi |k|^2)`; inverts `w_k = 2 pi i k x u_k` on
/// transversal data and satisfies `(k, u_k) = 0`, `|w_k| = 2 pi |k| |u_k|`.
///
/// Returns an error if the state violates the transversality invariant.
pub fn velocity_from_vorticity_3d(s: &Spectrum3D) -> Result<Velocity3D, StateError> {
    s.check_transversal(TRANSVERSALITY_TOL)?;
    Ok(velocity_from_vorticity_3d_unchecked(s))
}

pub(crate) fn velocity_from_vorticity_3d_unchecked(s: &Spectrum3D) -> Velocity3D {
    let two_pi = 2.0 * std::f64::consts::PI;
    let i = Complex64::new(0.0, 1.0);
    let vels = s
        .trunc()
        .canonical_modes()
        .iter()
        .zip(s.amps())
        .map(|(k, w)| {
            let cross = cross_int_complex(k, w);
            let denom = two_pi * k.norm_sq() as f64;
            [
                cross[0] * i / denom,
                cross[1] * i / denom,
                cross[2] * i / denom,
            ]
        })
        .collect();
    Ok::<_, StateError>(Velocity3D {
        trunc: Arc::clone(s.trunc()),
        vels,
    })
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::TruncationSet;
    use proptest::prelude::*;

    fn wv2(x: i64, y: i64) -> WaveVector<2> {
        WaveVector::new([x, y])
    }

    fn wv3(x: i64, y: i64, z: i64) -> WaveVector<3> {
        WaveVector::new([x, y, z])
    }

    fn random_spectrum_2d(k_max: f64, seed: u64) -> Spectrum2D {
        let trunc = Arc::new(TruncationSet::<2>::disk(k_max).unwrap());
        let mut s = Spectrum2D::zeros(Arc::clone(&trunc));
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for slot in 0..trunc.canonical_modes().len() {
            s.amps_mut()[slot] = Complex64::new(next(), next());
        }
        s
    }

    #[test]
    fn velocity_2d_axis_mode() {
        let trunc = Arc::new(TruncationSet::<2>::disk(1.0).unwrap());
        let s = Spectrum2D::from_modes(trunc, [(wv2(1, 0), Complex64::new(1.0, 0.0))]).unwrap();
        let u = velocity_from_vorticity_2d(&s);
        let v = u.get(wv2(1, 0));
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((v[0] - Complex64::new(0.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::new(0.0, 1.0 / two_pi)).norm() < 1e-15);
    }

    #[test]
    fn velocity_2d_round_trip() {
        let s = random_spectrum_2d(4.0, 7);
        let u = velocity_from_vorticity_2d(&s);
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let mut worst = 0.0f64;
        for &k in s.trunc().members() {
            let w = s.amp(k);
            if w.norm() == 0.0 {
                continue;
            }
            let [k1, k2] = k.components();
            let v = u.get(k);
            let back = two_pi_i * (v[0] * k2 as f64 - v[1] * k1 as f64);
            worst = worst.max((back - w).norm() / w.norm());
            // incompressibility
            let div = v[0] * k1 as f64 + v[1] * k2 as f64;
            assert!(div.norm() < 1e-14);
        }
        assert!(worst <= 1e-13, "round trip error {worst}");
    }

    #[test]
    fn velocity_3d_axis_mode() {
        let trunc = Arc::new(TruncationSet::<3>::disk(1.0).unwrap());
        let c = 2.5;
        let s = Spectrum3D::from_modes(
            trunc,
            [(
                wv3(1, 0, 0),
                [
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(c, 0.0),
                ],
            )],
        )
        .unwrap();
        let u = velocity_from_vorticity_3d(&s).unwrap();
        let v = u.get(wv3(1, 0, 0));
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!(v[0].norm() < 1e-15);
        assert!((v[1] - Complex64::new(0.0, -c / two_pi)).norm() < 1e-15);
        assert!(v[2].norm() < 1e-15);
    }

    fn random_transversal_3d(k_max: f64, seed: u64) -> Spectrum3D {
        let trunc = Arc::new(TruncationSet::<3>::disk(k_max).unwrap());
        let mut s = Spectrum3D::zeros(Arc::clone(&trunc));
        let mut state = seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(11);
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let modes: Vec<_> = trunc.canonical_modes().to_vec();
        for (slot, k) in modes.iter().enumerate() {
            let mut v = [
                Complex64::new(next(), next()),
                Complex64::new(next(), next()),
                Complex64::new(next(), next()),
            ];
            project_perp(k, &mut v);
            s.amps_mut()[slot] = v;
        }
        s
    }

    #[test]
    fn velocity_3d_round_trip() {
        let s = random_transversal_3d(3.0, 3);
        let u = velocity_from_vorticity_3d(&s).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let i = Complex64::new(0.0, 1.0);
        let mut worst = 0.0f64;
        for &k in s.trunc().members() {
            let w = s.amp(k);
            let wn = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if wn == 0.0 {
                continue;
            }
            let v = u.get(k);
            let back = cross_int_complex(&k, &v).map(|c| c * i * two_pi);
            let err = back
                .iter()
                .zip(&w)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(err / wn);
            // |w_k| = 2 pi |k| |u_k|
            let un = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            assert!((wn - two_pi * k.norm() * un).abs() <= 1e-12 * wn);
        }
        assert!(worst <= 1e-13, "round trip error {worst}");
    }

    #[test]
    fn transversality_violation_is_reported() {
        let trunc = Arc::new(TruncationSet::<3>::disk(1.0).unwrap());
        let s = Spectrum3D::from_modes(
            trunc,
            [(
                wv3(1, 0, 0),
                [
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ],
            )],
        )
        .unwrap();
        assert!(matches!(
            velocity_from_vorticity_3d(&s),
            Err(StateError::NotTransversal { .. })
        ));
    }

    #[test]
    fn zero_maps_to_zero() {
        let trunc = Arc::new(TruncationSet::<2>::disk(3.0).unwrap());
        let s = Spectrum2D::zeros(trunc);
        let u = velocity_from_vorticity_2d(&s);
        assert!(u.slots().iter().all(|v| v[0].norm() == 0.0 && v[1].norm() == 0.0));
        assert_eq!(s.enstrophy(), 0.0);
        assert_eq!(s.energy(), 0.0);
    }

    #[test]
    fn enstrophy_counts_both_signs() {
        let trunc = Arc::new(TruncationSet::<2>::disk(1.0).unwrap());
        let a = 0.75;
        let s = Spectrum2D::from_modes(trunc, [(wv2(1, 0), Complex64::new(a, 0.0))]).unwrap();
        assert!((s.enstrophy() - 2.0 * a * a).abs() < 1e-15);
    }

    #[test]
    fn enstrophy_matches_full_set_brute_force() {
        let s = random_spectrum_2d(5.0, 19);
        let brute: f64 = s.trunc().members().iter().map(|&k| s.amp(k).norm_sqr()).sum();
        assert!((s.enstrophy() - brute).abs() <= 1e-12 * brute.max(1.0));
    }

    #[test]
    fn restrict_projects_and_reembeds() {
        let s = random_spectrum_2d(4.0, 23);
        let same = s.restrict(Arc::clone(s.trunc()));
        for (a, b) in s.amps().iter().zip(same.amps()) {
            assert_eq!(a, b);
        }
        let small = Arc::new(TruncationSet::<2>::disk(2.0).unwrap());
        let restricted = s.restrict(Arc::clone(&small));
        assert!(restricted.enstrophy() <= s.enstrophy());
        for &k in small.members() {
            assert_eq!(restricted.amp(k), s.amp(k));
        }
        // re-embedding equals zero-padding of the tail
        let back = restricted.restrict(Arc::clone(s.trunc()));
        for &k in s.trunc().members() {
            if small.contains(k) {
                assert_eq!(back.amp(k), s.amp(k));
            } else {
                assert_eq!(back.amp(k).norm(), 0.0);
            }
        }
        // idempotence
        let twice = restricted.restrict(small);
        for (a, b) in restricted.amps().iter().zip(twice.amps()) {
            assert_eq!(a, b);
        }
    }

    proptest! {
        #[test]
        fn reality_is_structural(x in -4i64..=4, y in -4i64..=4, re in -1.0f64..1.0, im in -1.0f64..1.0) {
            prop_assume!(x != 0 || y != 0);
            let trunc = Arc::new(TruncationSet::<2>::disk(6.0).unwrap());
            let k = wv2(x, y);
            let mut s = Spectrum2D::zeros(trunc);
            s.set_amp(k, Complex64::new(re, im)).unwrap();
            let a = s.amp(k);
            let b = s.amp(-k);
            prop_assert_eq!(a.conj(), b);
            prop_assert_eq!(a, Complex64::new(re, im));
        }
    }
}
