//! Integer wave-vector arithmetic, centrally symmetric truncation sets,
//! convolution-pair enumeration, shell decompositions, and certified
//! lattice-sum bounds.
//!
//! All shell comparisons are done on exact integer squares (scaled by 4)
//! so that boundary classification is deterministic across platforms.
//! Lattice sums over infinite regions are returned as rigorous *upper*
//! bounds: direct enumeration up to a cutoff plus an outward-rounded
//! integral comparison for the tail.

use std::collections::HashMap;
use std::ops::{Add, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer lattice point in `Z^D` (`D` is 2 or 3 throughout this crate).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct WaveVector<const D: usize> {
    c: [i64; D],
}

impl<const D: usize> WaveVector<D> {
    pub fn new(c: [i64; D]) -> Self {
        Self { c }
    }

    pub fn components(&self) -> [i64; D] {
        self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    /// Exact squared Euclidean norm.
    pub fn norm_sq(&self) -> i64 {
        self.c.iter().map(|&x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    /// A vector is canonical when its first nonzero component is positive.
    /// Exactly one of `k`, `-k` is canonical for every `k != 0`.
    pub fn is_canonical(&self) -> bool {
        for &x in &self.c {
            if x > 0 {
                return true;
            }
            if x < 0 {
                return false;
            }
        }
        false
    }

    /// Returns the canonical representative of `{k, -k}` and whether the
    /// input had to be negated.
    pub fn canonical(&self) -> (Self, bool) {
        if self.is_canonical() || self.is_zero() {
            (*self, false)
        } else {
            (-*self, true)
        }
    }
}

impl WaveVector<2> {
    /// `(-k2, k1)`, the counterclockwise quarter turn.
    pub fn perp(&self) -> Self {
        Self::new([-self.c[1], self.c[0]])
    }
}

/// Exact integer inner product.
pub fn dot<const D: usize>(a: WaveVector<D>, b: WaveVector<D>) -> i64 {
    let (a, b) = (a.components(), b.components());
    (0..D).map(|i| a[i] * b[i]).sum()
}

impl<const D: usize> Add for WaveVector<D> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c) {
            *x += y;
        }
        Self { c }
    }
}

impl<const D: usize> Sub for WaveVector<D> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(rhs.c) {
            *x -= y;
        }
        Self { c }
    }
}

impl<const D: usize> Neg for WaveVector<D> {
    type Output = Self;
    fn neg(self) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Self { c }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationShape {
    Disk,
    Square,
}

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("truncation radius {k_max} is below 1; the mode set would be empty")]
    EmptyTruncation { k_max: f64 },
    #[error("lattice sum with exponent {p} diverges in dimension {d} over an infinite region")]
    DivergentSum { d: usize, p: f64 },
}

/// Finite, centrally symmetric set of nonzero lattice modes.
///
/// Members are kept in lexicographic order; the canonical half (one
/// representative per `{k, -k}` pair) is the storage layout used by the
/// spectrum types.
#[derive(Clone, Debug)]
pub struct TruncationSet<const D: usize> {
    shape: TruncationShape,
    k_max: f64,
    members: Vec<WaveVector<D>>,
    canonical: Vec<WaveVector<D>>,
    index: HashMap<WaveVector<D>, u32>,
}

impl<const D: usize> TruncationSet<D> {
    pub fn build(shape: TruncationShape, k_max: f64) -> Result<Self, LatticeError> {
        if !(k_max >= 1.0) {
            return Err(LatticeError::EmptyTruncation { k_max });
        }
        let reach = k_max.floor() as i64;
        let mut members = Vec::new();
        let mut cursor = [-reach; D];
        'outer: loop {
            let k = WaveVector::new(cursor);
            if !k.is_zero() && Self::shape_contains(shape, k_max, k) {
                members.push(k);
            }
            // odometer increment over the bounding cube, last axis fastest
            for axis in (0..D).rev() {
                if cursor[axis] < reach {
                    cursor[axis] += 1;
                    continue 'outer;
                }
                cursor[axis] = -reach;
            }
            break;
        }
        members.sort_unstable();
        let canonical: Vec<_> = members.iter().copied().filter(|k| k.is_canonical()).collect();
        let index = canonical
            .iter()
            .enumerate()
            .map(|(i, &k)| (k, i as u32))
            .collect();
        Ok(Self {
            shape,
            k_max,
            members,
            canonical,
            index,
        })
    }

    pub fn disk(k_max: f64) -> Result<Self, LatticeError> {
        Self::build(TruncationShape::Disk, k_max)
    }

    pub fn square(k_max: f64) -> Result<Self, LatticeError> {
        Self::build(TruncationShape::Square, k_max)
    }

    fn shape_contains(shape: TruncationShape, k_max: f64, k: WaveVector<D>) -> bool {
        match shape {
            TruncationShape::Disk => (k.norm_sq() as f64) <= k_max * k_max,
            TruncationShape::Square => {
                let reach = k_max.floor() as i64;
                k.components().iter().all(|&x| x.abs() <= reach)
            }
        }
    }

    pub fn shape(&self) -> TruncationShape {
        self.shape
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// Number of modes including both signs.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// All members in lexicographic order.
    pub fn members(&self) -> &[WaveVector<D>] {
        &self.members
    }

    /// Canonical half in lexicographic order; storage slots follow this order.
    pub fn canonical_modes(&self) -> &[WaveVector<D>] {
        &self.canonical
    }

    /// O(1) membership test.
    pub fn contains(&self, k: WaveVector<D>) -> bool {
        !k.is_zero() && Self::shape_contains(self.shape, self.k_max, k)
    }

    /// Storage slot of `k`'s pair plus whether `k` is the conjugate
    /// (negated) representative.
    pub fn canonical_slot(&self, k: WaveVector<D>) -> Option<(usize, bool)> {
        let (rep, conj) = k.canonical();
        self.index.get(&rep).map(|&i| (i as usize, conj))
    }

    /// Ordered pairs `(l1, l2)` with `l1 + l2 = k` and both members of the
    /// set. Enumeration is by `l2` in lexicographic order.
    pub fn convolution_pairs(&self, k: WaveVector<D>) -> Vec<(WaveVector<D>, WaveVector<D>)> {
        let mut pairs = Vec::new();
        for &l2 in &self.members {
            let l1 = k - l2;
            if self.contains(l1) {
                pairs.push((l1, l2));
            }
        }
        pairs
    }
}

/// Shell of `l2` relative to the output mode `k`, classified on exact
/// integer squares: near `|l2| <= |k|/2`, mid `|k|/2 < |l2| <= 2|k|`,
/// far `|l2| > 2|k|`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Shell {
    Near,
    Mid,
    Far,
}

pub fn shell_of<const D: usize>(k: WaveVector<D>, l2: WaveVector<D>) -> Shell {
    let k2 = k.norm_sq() as i128;
    let l2sq = l2.norm_sq() as i128;
    if 4 * l2sq <= k2 {
        Shell::Near
    } else if l2sq <= 4 * k2 {
        Shell::Mid
    } else {
        Shell::Far
    }
}

/// Splits convolution pairs of `k` into the three shells. The three parts
/// are disjoint and their concatenation is a permutation of the input.
#[allow(clippy::type_complexity)]
pub fn shell_partition<const D: usize>(
    k: WaveVector<D>,
    pairs: &[(WaveVector<D>, WaveVector<D>)],
) -> (
    Vec<(WaveVector<D>, WaveVector<D>)>,
    Vec<(WaveVector<D>, WaveVector<D>)>,
    Vec<(WaveVector<D>, WaveVector<D>)>,
) {
    let mut near = Vec::new();
    let mut mid = Vec::new();
    let mut far = Vec::new();
    for &(l1, l2) in pairs {
        match shell_of(k, l2) {
            Shell::Near => near.push((l1, l2)),
            Shell::Mid => mid.push((l1, l2)),
            Shell::Far => far.push((l1, l2)),
        }
    }
    (near, mid, far)
}

/// Summation region for [`lattice_sum`].
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum SumRegion {
    /// All of `Z^d \ {0}`.
    All,
    /// `0 < |l| <= R`.
    Ball(f64),
    /// `|l| > R`.
    ComplementBall(f64),
}

/// `x^(-p/2)` for integer `x >= 1`, taking cheap paths for integer and
/// half-integer `p/2`.
fn inv_pow_half(x: i64, p: f64) -> f64 {
    let q = 0.5 * p;
    let xf = x as f64;
    if q == q.floor() && q <= 16.0 {
        1.0 / xf.powi(q as i32)
    } else if (2.0 * q) == (2.0 * q).floor() && q <= 16.5 {
        1.0 / (xf.powi(q.floor() as i32) * xf.sqrt())
    } else {
        xf.powf(-q)
    }
}

/// Exact direct summation of `|l|^{-p}` over `0 < |l| <= rho`.
pub(crate) fn ball_enum_sum(d: usize, p: f64, rho: f64) -> f64 {
    annulus_enum_sum(d, p, 0.0, rho)
}

/// Direct summation over `lo < |l| <= hi` (norms, exclusive/inclusive).
fn annulus_enum_sum(d: usize, p: f64, lo: f64, hi: f64) -> f64 {
    let lo_sq = lo * lo;
    let hi_sq = hi * hi;
    let reach = hi.floor() as i64;
    let mut total = 0.0;
    match d {
        2 => {
            for i in -reach..=reach {
                let isq = i * i;
                let jmax = ((hi_sq - isq as f64).max(0.0)).sqrt().floor() as i64;
                for j in -jmax..=jmax {
                    let nsq = isq + j * j;
                    if nsq == 0 {
                        continue;
                    }
                    let nf = nsq as f64;
                    if nf > lo_sq && nf <= hi_sq {
                        total += inv_pow_half(nsq, p);
                    }
                }
            }
        }
        3 => {
            for i in -reach..=reach {
                let isq = i * i;
                let jreach = ((hi_sq - isq as f64).max(0.0)).sqrt().floor() as i64;
                for j in -jreach..=jreach {
                    let ijsq = isq + j * j;
                    let mmax = ((hi_sq - ijsq as f64).max(0.0)).sqrt().floor() as i64;
                    for m in -mmax..=mmax {
                        let nsq = ijsq + m * m;
                        if nsq == 0 {
                            continue;
                        }
                        let nf = nsq as f64;
                        if nf > lo_sq && nf <= hi_sq {
                            total += inv_pow_half(nsq, p);
                        }
                    }
                }
            }
        }
        _ => panic!("only dimensions 2 and 3 are supported"),
    }
    total
}

/// Number of nonzero lattice points with `|l| <= rho` (test oracle).
pub fn count_ball(d: usize, rho: f64) -> u64 {
    let rho_sq = rho * rho;
    let reach = rho.floor() as i64;
    let mut n = 0u64;
    match d {
        2 => {
            for i in -reach..=reach {
                for j in -reach..=reach {
                    let nsq = i * i + j * j;
                    if nsq != 0 && (nsq as f64) <= rho_sq {
                        n += 1;
                    }
                }
            }
        }
        3 => {
            for i in -reach..=reach {
                for j in -reach..=reach {
                    for m in -reach..=reach {
                        let nsq = i * i + j * j + m * m;
                        if nsq != 0 && (nsq as f64) <= rho_sq {
                            n += 1;
                        }
                    }
                }
            }
        }
        _ => panic!("only dimensions 2 and 3 are supported"),
    }
    n
}

/// Outward integral bound for `sum_{|l| >= rho} |l|^{-p}` with `p > d`.
///
/// Each unit cell centered at a lattice point `l` with `|l| >= rho` lies in
/// `{|x| >= rho - c}` with `c = sqrt(d)/2`, and `|l|^{-p} <= (|x| - c)^{-p}`
/// on the cell, so the sum is at most
/// `S_{d-1} * int_{rho-2c}^{inf} (v + c)^{d-1} v^{-p} dv`.
/// Requires `rho > 2c`.
fn integral_tail(d: usize, p: f64, rho: f64) -> f64 {
    let c = (d as f64).sqrt() * 0.5;
    let a = rho - 2.0 * c;
    assert!(a > 0.0, "integral tail needs rho > sqrt(d)");
    match d {
        2 => {
            let s1 = 2.0 * std::f64::consts::PI;
            s1 * (a.powf(2.0 - p) / (p - 2.0) + c * a.powf(1.0 - p) / (p - 1.0))
        }
        3 => {
            let s2 = 4.0 * std::f64::consts::PI;
            s2 * (a.powf(3.0 - p) / (p - 3.0)
                + 2.0 * c * a.powf(2.0 - p) / (p - 2.0)
                + c * c * a.powf(1.0 - p) / (p - 1.0))
        }
        _ => panic!("only dimensions 2 and 3 are supported"),
    }
}

const TAIL_ENUM_SWITCH: f64 = 64.0;

/// Certified upper bound for `sum_{|l| >= rho} |l|^{-p}`, `p > d`, any
/// `rho >= 1`. Small `rho` gets a partial enumeration so the bound stays
/// tight where the integral comparison alone would be loose.
pub(crate) fn tail_upper(d: usize, p: f64, rho: f64) -> Result<f64, LatticeError> {
    if p <= d as f64 {
        return Err(LatticeError::DivergentSum { d, p });
    }
    if rho >= TAIL_ENUM_SWITCH {
        return Ok(integral_tail(d, p, rho));
    }
    // norms in [rho, switch) enumerated exactly; `annulus_enum_sum` uses an
    // exclusive lower bound, so nudge it just below rho
    let lo = (rho - 1e-9).max(0.0);
    let shell = annulus_enum_sum(d, p, lo, TAIL_ENUM_SWITCH - 1e-9);
    Ok(shell + integral_tail(d, p, TAIL_ENUM_SWITCH))
}

/// Cutoff for full-lattice sums: enumerate until the integral tail drops
/// below `TAIL_TARGET`, within a per-dimension budget.
fn full_sum_cutoff(d: usize, p: f64) -> f64 {
    const TAIL_TARGET: f64 = 8e-4;
    let cap = match d {
        2 => 9000.0,
        _ => 220.0,
    };
    let mut r = TAIL_ENUM_SWITCH;
    while r < cap && integral_tail(d, p, r) > TAIL_TARGET {
        r *= 1.1892071150027210; // 2^(1/4)
    }
    r.min(cap)
}

/// `(enumerated part, tail bound)` of a lattice sum; the public value is
/// their sum. Exposed separately so tests can check the bracket width.
pub(crate) fn lattice_sum_parts(
    d: usize,
    p: f64,
    region: SumRegion,
) -> Result<(f64, f64), LatticeError> {
    assert!(d == 2 || d == 3, "only dimensions 2 and 3 are supported");
    match region {
        SumRegion::All => {
            if p <= d as f64 {
                return Err(LatticeError::DivergentSum { d, p });
            }
            let r0 = full_sum_cutoff(d, p);
            Ok((ball_enum_sum(d, p, r0), integral_tail(d, p, r0)))
        }
        SumRegion::Ball(rho) => {
            let cap = match d {
                2 => 9000.0,
                _ => 220.0,
            };
            if rho <= cap {
                Ok((ball_enum_sum(d, p, rho), 0.0))
            } else {
                if p <= d as f64 {
                    // finite ball, but too large to enumerate: bound the rest
                    // with the band integral, which needs no convergence
                    let band = band_integral_upper(d, p, cap, rho);
                    return Ok((ball_enum_sum(d, p, cap), band));
                }
                let tail_in = integral_tail(d, p, cap) - integral_tail(d, p, rho).min(0.0);
                Ok((ball_enum_sum(d, p, cap), tail_in))
            }
        }
        SumRegion::ComplementBall(rho) => {
            let lo = (rho + 1e-9).max(1.0);
            Ok((0.0, tail_upper(d, p, lo)?))
        }
    }
}

/// Outward bound for `sum_{lo < |l| <= hi} |l|^{-p}` by the same cell
/// comparison, valid for any `p` (the integrand is integrated over a
/// bounded band).
fn band_integral_upper(d: usize, p: f64, lo: f64, hi: f64) -> f64 {
    let c = (d as f64).sqrt() * 0.5;
    let a = lo - 2.0 * c;
    assert!(a > 0.0);
    let b = hi;
    // int_a^b (v + c)^{d-1} v^{-p} dv, expanded termwise
    let term = |e: f64| -> f64 {
        // int_a^b v^{e-p} dv
        let q = e - p + 1.0;
        if q.abs() < 1e-12 {
            (b / a).ln()
        } else {
            (b.powf(q) - a.powf(q)) / q
        }
    };
    match d {
        2 => 2.0 * std::f64::consts::PI * (term(1.0) + c * term(0.0)),
        3 => {
            4.0 * std::f64::consts::PI
                * (term(2.0) + 2.0 * c * term(1.0) + c * c * term(0.0))
        }
        _ => unreachable!(),
    }
}

fn sum_cache() -> &'static Mutex<HashMap<(u8, u64, u8, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, u64, u8, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Upper bound for `sum_{l in region, l != 0} |l|^{-p}`.
///
/// Infinite regions require `p > d`; the result is outward-rounded at the
/// structural level (enumeration plus integral tail). Values are cached.
pub fn lattice_sum(d: usize, p: f64, region: SumRegion) -> Result<f64, LatticeError> {
    let key = match region {
        SumRegion::All => (d as u8, p.to_bits(), 0u8, 0u64),
        SumRegion::Ball(r) => (d as u8, p.to_bits(), 1u8, r.to_bits()),
        SumRegion::ComplementBall(r) => (d as u8, p.to_bits(), 2u8, r.to_bits()),
    };
    if let Some(&v) = sum_cache().lock().unwrap().get(&key) {
        return Ok(v);
    }
    let (head, tail) = lattice_sum_parts(d, p, region)?;
    let v = head + tail;
    sum_cache().lock().unwrap().insert(key, v);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wv2(x: i64, y: i64) -> WaveVector<2> {
        WaveVector::new([x, y])
    }

    #[test]
    fn unit_disk_has_four_members() {
        let z = TruncationSet::<2>::disk(1.0).unwrap();
        assert_eq!(z.len(), 4);
        let expected = [wv2(-1, 0), wv2(0, -1), wv2(0, 1), wv2(1, 0)];
        assert_eq!(z.members(), &expected);
        assert_eq!(z.canonical_modes(), &[wv2(0, 1), wv2(1, 0)]);
    }

    #[test]
    fn disk_one_point_five_has_eight_members() {
        let z = TruncationSet::<2>::disk(1.5).unwrap();
        assert_eq!(z.len(), 8);
        assert!(z.contains(wv2(1, 1)));
        assert!(z.contains(wv2(-1, 1)));
        assert!(!z.contains(wv2(2, 0)));
    }

    #[test]
    fn disk_3d_radius_two_counts_match_cube_enumeration() {
        let z = TruncationSet::<3>::disk(2.0).unwrap();
        // independent count over the bounding cube
        let mut n = 0;
        for i in -2i64..=2 {
            for j in -2i64..=2 {
                for m in -2i64..=2 {
                    let nsq = i * i + j * j + m * m;
                    if nsq != 0 && nsq <= 4 {
                        n += 1;
                    }
                }
            }
        }
        assert_eq!(n, 32);
        assert_eq!(z.len(), 32);
        assert_eq!(count_ball(3, 2.0), 32);
    }

    #[test]
    fn truncation_below_one_is_rejected() {
        assert!(matches!(
            TruncationSet::<2>::disk(0.5),
            Err(LatticeError::EmptyTruncation { .. })
        ));
    }

    #[test]
    fn square_truncation_uses_max_norm() {
        let z = TruncationSet::<2>::square(1.0).unwrap();
        assert_eq!(z.len(), 8);
        assert!(z.contains(wv2(1, 1)));
        assert!(!z.contains(wv2(2, 0)));
    }

    #[test]
    fn convolution_pairs_unit_disk() {
        let z = TruncationSet::<2>::disk(1.0).unwrap();
        let pairs = z.convolution_pairs(wv2(1, 1));
        assert_eq!(pairs, vec![(wv2(1, 0), wv2(0, 1)), (wv2(0, 1), wv2(1, 0))]);
        assert!(z.convolution_pairs(wv2(3, 0)).is_empty());
    }

    #[test]
    fn convolution_pairs_match_double_loop() {
        let z = TruncationSet::<2>::disk(1.5).unwrap();
        let k = wv2(2, 1);
        let fast = z.convolution_pairs(k);
        let mut brute = Vec::new();
        for &l1 in z.members() {
            for &l2 in z.members() {
                if l1 + l2 == k {
                    brute.push((l1, l2));
                }
            }
        }
        assert_eq!(fast.len(), brute.len());
        for pair in &brute {
            assert!(fast.contains(pair));
        }
    }

    #[test]
    fn shell_thresholds() {
        let k = wv2(4, 0);
        assert_eq!(shell_of(k, wv2(1, 0)), Shell::Near);
        assert_eq!(shell_of(k, wv2(2, 0)), Shell::Near); // |l2| = |k|/2 exactly
        assert_eq!(shell_of(k, wv2(4, 4)), Shell::Mid);
        assert_eq!(shell_of(wv2(2, 0), wv2(5, 0)), Shell::Far);
        assert_eq!(shell_of(k, wv2(8, 0)), Shell::Mid); // |l2| = 2|k| exactly
    }

    #[test]
    fn lattice_sum_unit_ball_is_four() {
        let v = lattice_sum(2, 4.0, SumRegion::Ball(1.0)).unwrap();
        assert_eq!(v, 4.0);
    }

    #[test]
    fn lattice_sum_divergent_is_rejected() {
        assert!(lattice_sum(2, 2.0, SumRegion::All).is_err());
        assert!(lattice_sum(3, 3.0, SumRegion::ComplementBall(2.0)).is_err());
        assert!(lattice_sum(2, 1.0, SumRegion::Ball(10.0)).is_ok());
    }

    #[test]
    fn full_sum_bracket_width_d2_p3() {
        let (head, tail) = lattice_sum_parts(2, 3.0, SumRegion::All).unwrap();
        assert!(tail > 0.0);
        assert!(tail < 1e-3, "tail bound {tail} too wide");
        // the bound must exceed every finite enumeration
        let partial = ball_enum_sum(2, 3.0, 200.0);
        assert!(head + tail > partial);
    }

    #[test]
    fn complement_bound_exceeds_partial_enumeration_d3() {
        let bound = lattice_sum(3, 4.0, SumRegion::ComplementBall(2.0)).unwrap();
        let partial = annulus_enum_sum(3, 4.0, 2.0, 100.0);
        assert!(bound > partial, "bound {bound} <= partial {partial}");
    }

    #[test]
    fn sum_additivity_within_tail_slack() {
        for &r in &[3.0, 10.0, 37.5] {
            let (all_head, all_tail) = lattice_sum_parts(2, 4.0, SumRegion::All).unwrap();
            let ball = lattice_sum(2, 4.0, SumRegion::Ball(r)).unwrap();
            let (_, comp_tail) = lattice_sum_parts(2, 4.0, SumRegion::ComplementBall(r)).unwrap();
            let split = ball + comp_tail;
            let all = all_head + all_tail;
            // both are upper bounds of the same sum; they agree within the
            // two tail slacks
            assert!((all - split).abs() <= all_tail + comp_tail + 1e-12);
            // and neither dips below a plain partial enumeration
            let partial = ball_enum_sum(2, 4.0, 60.0);
            assert!(all >= partial && split >= partial);
        }
    }

    #[test]
    fn lattice_sum_monotone_in_exponent() {
        let a = lattice_sum(2, 3.0, SumRegion::All).unwrap();
        let b = lattice_sum(2, 4.0, SumRegion::All).unwrap();
        let c = lattice_sum(2, 6.0, SumRegion::All).unwrap();
        assert!(a > b && b > c);
    }

    #[test]
    fn exact_values_spot_checks() {
        // sum over |l| <= 2 of |l|^{-4} in 2D:
        // 4 at |l|^2=1, 4 at |l|^2=2, 4 at |l|^2=4
        let v = lattice_sum(2, 4.0, SumRegion::Ball(2.0)).unwrap();
        let expected = 4.0 + 4.0 / 4.0 + 4.0 / 16.0;
        assert!((v - expected).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn shells_partition_pairs(kx in -6i64..=6, ky in -6i64..=6, k_max in 1.0f64..5.0) {
            let z = TruncationSet::<2>::disk(k_max).unwrap();
            let k = wv2(kx, ky);
            let pairs = z.convolution_pairs(k);
            let (near, mid, far) = shell_partition(k, &pairs);
            prop_assert_eq!(near.len() + mid.len() + far.len(), pairs.len());
            let mut merged: Vec<_> = near.into_iter().chain(mid).chain(far).collect();
            merged.sort_unstable();
            let mut sorted = pairs.clone();
            sorted.sort_unstable();
            prop_assert_eq!(merged, sorted);
        }

        #[test]
        fn pairs_are_centrally_symmetric(kx in -5i64..=5, ky in -5i64..=5) {
            let z = TruncationSet::<2>::disk(3.5).unwrap();
            let k = wv2(kx, ky);
            let pos = z.convolution_pairs(k);
            let neg = z.convolution_pairs(-k);
            prop_assert_eq!(pos.len(), neg.len());
            for (l1, l2) in pos {
                prop_assert!(neg.contains(&(-l1, -l2)));
            }
        }
    }
}
