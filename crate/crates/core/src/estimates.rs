//! Computable analytic constants for the trapping inequalities.
//!
//! Every symbolic "const" in the decay estimates is realized here as an
//! explicit, outward-rounded lattice sum (or a certified supremum of a
//! scaled tail), so the critical-wavenumber searches return numbers that
//! genuinely dominate the brute-force shell sums. Nothing is hard-coded:
//! the constants are computed at first use and cached.
//!
//! A critical wavenumber is found by scanning integers upward; a
//! candidate `K` is accepted only when the majorant is verified below the
//! threshold on all of `[K, inf)`, using termwise interval bounds across
//! the possible non-monotone onset and monotone decay beyond it.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{lattice_sum, LatticeError, SumRegion, WaveVector};

const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("decay exponent r = {r} must exceed d - 1 = {}", *d as f64 - 1.0)]
    DecayTooWeakForLemma { d: usize, r: f64 },
    #[error("envelope amplitude {d_prime} must dominate the forcing constant {g}")]
    AmplitudeBelowForcing { d_prime: f64, g: f64 },
    #[error("dissipation exponent alpha = {alpha} must exceed {needed} for this estimate")]
    DissipationTooWeak { alpha: f64, needed: f64 },
    #[error("decay exponent r = {r} must exceed {needed} for this estimate")]
    DecayTooWeak { r: f64, needed: f64 },
    #[error("no critical wavenumber found below {limit}")]
    ScanExhausted { limit: u64 },
}

/// Identifier of the inequality a report certifies. The serialized names
/// are part of the report file schema.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum InequalityId {
    #[serde(rename = "enstrophy_gronwall")]
    EnstrophyGronwall,
    #[serde(rename = "energy_gronwall")]
    EnergyGronwall,
    #[serde(rename = "lemma1")]
    Lemma1,
    #[serde(rename = "eq8_2d_algebraic")]
    Algebraic2d,
    #[serde(rename = "inward5_2d_exponential")]
    Exponential2d,
    #[serde(rename = "T3in2_gevrey")]
    Gevrey2d,
    #[serde(rename = "thm4_3d")]
    Energy3d,
    #[serde(rename = "thm7_3d")]
    Weighted3d,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LatticeConstant {
    pub name: String,
    pub value: f64,
    pub definition: String,
}

/// A computed constant together with the inequality it certifies and the
/// inputs it was derived from; reproducible byte-for-byte from the inputs.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub quantity: String,
    pub value: f64,
    pub inequality_id: InequalityId,
    pub inputs: BTreeMap<String, f64>,
    pub constants: Vec<LatticeConstant>,
}

fn inputs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Which dissipation factor bounds the right-hand side of the algebraic
/// trapping condition. `FourPiNu` is the weaker printed form and the
/// default; `FourPiSqNu` matches the dissipation coefficient itself.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum RhsFactor {
    #[serde(rename = "4pi_nu")]
    FourPiNu,
    #[serde(rename = "4pi2_nu")]
    FourPiSqNu,
}

impl RhsFactor {
    pub fn value(&self, nu: f64) -> f64 {
        match self {
            RhsFactor::FourPiNu => 4.0 * PI * nu,
            RhsFactor::FourPiSqNu => 4.0 * PI * PI * nu,
        }
    }
}

// ---------------------------------------------------------------------
// certified suprema of scaled tails
// ---------------------------------------------------------------------

fn sup_cache() -> &'static Mutex<HashMap<(u8, u64, u64, u64, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, u64, u64, u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn tail(d: usize, p: f64, rho: f64) -> f64 {
    lattice_sum(d, p, SumRegion::ComplementBall(rho - 1e-9))
        .expect("tail exponent checked by caller")
}

/// Certified `sup over kappa >= kappa0 of kappa^s * tail(d, p, m*kappa)`,
/// requiring `s <= p - d` so the quantity stays bounded. Evaluated on
/// geometric brackets (the tail is nonincreasing, the power increasing,
/// so `b^s * tail(m*a)` bounds each bracket `[a, b]`) plus a monotone cap
/// beyond a large pivot.
fn sup_scaled_tail(d: usize, p: f64, m: f64, s: f64, kappa0: f64) -> f64 {
    let key = (d as u8, p.to_bits(), m.to_bits(), s.to_bits(), kappa0.to_bits());
    if let Some(&v) = sup_cache().lock().unwrap().get(&key) {
        return v;
    }
    let v = sup_of_product_tail(d, &[(p, m)], s, kappa0);
    sup_cache().lock().unwrap().insert(key, v);
    v
}

/// Same certified supremum for `kappa^s * prod_i tail(d, p_i, m_i kappa)^(1/n)`
/// style products; `factors` holds `(p_i, m_i)` and the product is taken
/// at equal weights (square root for two factors). Requires
/// `s <= sum_i (p_i - d) / n`.
fn sup_of_product_tail(d: usize, factors: &[(f64, f64)], s: f64, kappa0: f64) -> f64 {
    let n = factors.len() as f64;
    let eval_upper = |a: f64, b: f64| -> f64 {
        let mut prod = 1.0;
        for &(p, m) in factors {
            prod *= tail(d, p, m * a);
        }
        b.powf(s) * prod.powf(1.0 / n)
    };
    const BIG: f64 = 65536.0;
    const RATIO: f64 = 1.0905077326652577; // 2^(1/8)
    let mut best: f64 = 0.0;
    let mut a = kappa0;
    while a < BIG {
        let b = (a * RATIO).min(BIG);
        best = best.max(eval_upper(a, b));
        a = b;
    }
    // beyond BIG: every term of every integral tail has decay exponent at
    // least p - d >= s (on average), so the scaled product is nonincreasing
    best = best.max(eval_upper(BIG, BIG));
    best
}

/// Certified constant for the logarithmic low-shell sum in 2D:
/// `sum over 0 < |l| <= kappa/2 of |l|^{-2} <= c^2 * ln(kappa)` for every
/// `kappa >= 2`. The supremum is taken over the jump points of the step
/// function up to a pivot and capped analytically beyond it.
fn log_ball_constant_2d() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        const R0: i64 = 512;
        let m_max = (R0 * R0) as usize;
        let mut counts = vec![0u32; m_max + 1];
        for i in -R0..=R0 {
            for j in -R0..=R0 {
                let nsq = (i * i + j * j) as usize;
                if nsq != 0 && nsq <= m_max {
                    counts[nsq] += 1;
                }
            }
        }
        let mut best: f64 = 0.0;
        let mut running = 0.0;
        for (m, &c) in counts.iter().enumerate().skip(1) {
            if c == 0 {
                continue;
            }
            running += c as f64 / m as f64;
            // the bound must hold the moment kappa/2 reaches this norm
            let kappa = 2.0 * (m as f64).sqrt();
            if kappa >= 2.0 {
                best = best.max(running / kappa.ln());
            }
        }
        // cap for kappa > 2 R0 via the band integral comparison
        let r0 = R0 as f64;
        let c = std::f64::consts::SQRT_2 / 2.0;
        let c0 = running + 2.0 * PI * c / (r0 - 2.0 * c) - 2.0 * PI * (r0 - 2.0 * c).ln();
        let cap = 2.0 * PI + (c0 - 2.0 * PI * std::f64::consts::LN_2).max(0.0) / (2.0 * r0).ln();
        best.max(cap).sqrt()
    })
}

// ---------------------------------------------------------------------
// majorants and the critical-wavenumber scan
// ---------------------------------------------------------------------

/// Sum of terms `coeff * kappa^power * sqrt(ln kappa)?`, compared against
/// a constant threshold. All powers must be negative, so the majorant is
/// nonincreasing beyond the logarithmic hump.
#[derive(Clone, Debug)]
pub struct Majorant {
    terms: Vec<(f64, f64, bool)>, // (coeff, power, sqrt_log)
    pub threshold: f64,
}

impl Majorant {
    fn new(terms: Vec<(f64, f64, bool)>, threshold: f64) -> Self {
        for &(coeff, power, _) in &terms {
            assert!(coeff >= 0.0 && power < 0.0, "majorant terms must decay");
        }
        Self { terms, threshold }
    }

    pub fn eval(&self, kappa: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, p, lg)| {
                let base = c * kappa.powf(p);
                if lg {
                    base * kappa.ln().max(0.0).sqrt()
                } else {
                    base
                }
            })
            .sum()
    }

    pub fn holds_at(&self, kappa: f64) -> bool {
        self.eval(kappa) <= self.threshold
    }

    /// Margin `threshold - value`; positive when the condition holds.
    pub fn margin(&self, kappa: f64) -> f64 {
        self.threshold - self.eval(kappa)
    }

    /// Upper bound of the majorant on `[a, b]`: powers peak at `a`, the
    /// log factor at `b`.
    fn interval_upper(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, p, lg)| {
                let base = c * a.powf(p);
                if lg {
                    base * b.ln().max(0.0).sqrt()
                } else {
                    base
                }
            })
            .sum()
    }

    /// Last point where any `kappa^p sqrt(ln kappa)` term can still be
    /// increasing.
    fn hump_end(&self) -> f64 {
        self.terms
            .iter()
            .filter(|&&(_, _, lg)| lg)
            .map(|&(_, p, _)| (-1.0 / (2.0 * p)).exp())
            .fold(1.0, f64::max)
    }

    /// True when the condition holds at every `kappa >= k`: interval
    /// covering across the hump, monotone decay beyond it.
    pub fn holds_for_all_above(&self, k: f64) -> bool {
        if !self.holds_at(k) {
            return false;
        }
        let hump = self.hump_end();
        if hump > k {
            let mut a = k;
            while a < hump {
                let b = (a * 1.01).min(hump);
                if self.interval_upper(a, b) > self.threshold {
                    return false;
                }
                a = b;
            }
        }
        true
    }
}

const SCAN_LIMIT: u64 = 1 << 40;

/// Smallest integer `K >= 2` with the condition verified on `[K, inf)`.
/// "Holds for all above" is monotone in `K`, so a doubling phase followed
/// by a binary search finds the exact threshold.
fn kcrit_scan(m: &Majorant) -> Result<u64, EstimateError> {
    if m.holds_for_all_above(2.0) {
        return Ok(2);
    }
    let mut hi = 4u64;
    while !m.holds_for_all_above(hi as f64) {
        hi *= 2;
        if hi > SCAN_LIMIT {
            return Err(EstimateError::ScanExhausted { limit: SCAN_LIMIT });
        }
    }
    let mut lo = hi / 2; // known to fail
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if m.holds_for_all_above(mid as f64) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------
// enstrophy / energy bounds
// ---------------------------------------------------------------------

/// Uniform-in-truncation enstrophy bound `E* = max(E0, (g*/(4 pi^2 nu))^2)`
/// from the Gronwall estimate `dE/dt <= -8 pi^2 nu E + 2 g* sqrt(E)` (the
/// smallest retained frequency is `|k| = 1`).
pub fn enstrophy_bound(e0: f64, g_star: f64, nu: f64) -> EstimateReport {
    let value = e0.max((g_star / (4.0 * PI * PI * nu)).powi(2));
    EstimateReport {
        quantity: "enstrophy_bound".into(),
        value,
        inequality_id: InequalityId::EnstrophyGronwall,
        inputs: inputs(&[("e0", e0), ("g_star", g_star), ("nu", nu)]),
        constants: Vec::new(),
    }
}

/// Same construction on the velocity norm for the 3D system.
pub fn energy_bound_3d(e0: f64, g_star: f64, nu: f64) -> EstimateReport {
    let value = e0.max((g_star / (4.0 * PI * PI * nu)).powi(2));
    EstimateReport {
        quantity: "energy_bound".into(),
        value,
        inequality_id: InequalityId::EnergyGronwall,
        inputs: inputs(&[("e0", e0), ("g_star", g_star), ("nu", nu)]),
        constants: Vec::new(),
    }
}

/// Envelope amplitude that absorbs the low-mode band: with
/// `|w_k^(j)| <= sqrt(E*)` everywhere, `D' = max(G, sqrt(E*) K0^r)` gives
/// `|w_k^(j)| <= D'/|k|^r` for `|k| <= K0` and keeps `D' >= G`.
pub fn d_prime_algebraic(k0: f64, e_star: f64, r: f64, g: f64) -> f64 {
    g.max(e_star.sqrt() * k0.powf(r))
}

/// 3D analogue: componentwise `|w_k^(j)| <= 2 pi |k| sqrt(E*)` from the
/// energy bound, so `D' = max(D_init, 2 pi sqrt(E*) K0^(r+1))` absorbs the
/// band `|k| <= K0`.
pub fn d_prime_3d(k0: f64, e_star_energy: f64, r: f64, d_init: f64) -> f64 {
    d_init.max(2.0 * PI * e_star_energy.sqrt() * k0.powf(r + 1.0))
}

// ---------------------------------------------------------------------
// convolution lemma constant and bound
// ---------------------------------------------------------------------

fn lemma_cache() -> &'static Mutex<HashMap<(u8, u64), (f64, [f64; 3])>> {
    static CACHE: OnceLock<Mutex<HashMap<(u8, u64), (f64, [f64; 3])>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The single constant multiplying the convolution-lemma bracket: the
/// maximum of the three shell constants (low-shell full sum, mid-shell
/// Cauchy-Schwarz sum, far-shell scaled tail product). Requires `r > d-1`.
pub fn lemma1_constant(d: usize, r: f64) -> Result<(f64, Vec<LatticeConstant>), EstimateError> {
    if !(r > d as f64 - 1.0) {
        return Err(EstimateError::DecayTooWeakForLemma { d, r });
    }
    let key = (d as u8, r.to_bits());
    let cached = lemma_cache().lock().unwrap().get(&key).copied();
    let (value, parts) = match cached {
        Some(v) => v,
        None => {
            let c_low = lattice_sum(d, r + 1.0, SumRegion::All)?;
            let c_mid = lattice_sum(d, 2.0 * r, SumRegion::All)?.sqrt();
            let s = 2.0 * r + 1.0 - d as f64;
            let c_far = sup_of_product_tail(d, &[(2.0 * r, 1.0), (2.0 * r + 2.0, 2.0)], s, 1.0);
            let v = (c_low.max(c_mid).max(c_far), [c_low, c_mid, c_far]);
            lemma_cache().lock().unwrap().insert(key, v);
            v
        }
    };
    let constants = vec![
        LatticeConstant {
            name: "c_low_shell".into(),
            value: parts[0],
            definition: format!("sum over Z^{d} of |l|^-{}", r + 1.0),
        },
        LatticeConstant {
            name: "c_mid_shell".into(),
            value: parts[1],
            definition: format!("sqrt of sum over Z^{d} of |l|^-{}", 2.0 * r),
        },
        LatticeConstant {
            name: "c_far_shell".into(),
            value: parts[2],
            definition: format!(
                "sup of k^{} * sqrt(tail_{}(k) * tail_{}(2k))",
                2.0 * r + 1.0 - d as f64,
                2.0 * r,
                2.0 * r + 2.0
            ),
        },
    ];
    Ok((value, constants))
}

/// Closed-form bound for the weighted convolution of two envelope-bounded
/// sequences:
/// `const * (2^r |k| + 2^(r+1) (6|k|+1)^(d/2) + |k|^(d-1-r)/2) * C^2 / |k|^r`.
pub fn lemma1_bound(
    c_amp: f64,
    r: f64,
    d: usize,
    k: WaveVector<2>,
) -> Result<EstimateReport, EstimateError> {
    let kappa = k.norm();
    lemma1_bound_norm(c_amp, r, d, kappa)
}

/// Same bound given the norm of `k` directly (3D callers pass the norm).
pub fn lemma1_bound_norm(
    c_amp: f64,
    r: f64,
    d: usize,
    kappa: f64,
) -> Result<EstimateReport, EstimateError> {
    let (c, constants) = lemma1_constant(d, r)?;
    let bracket = 2f64.powf(r) * kappa
        + 2f64.powf(r + 1.0) * (6.0 * kappa + 1.0).powf(d as f64 / 2.0)
        + 0.5 * kappa.powf(d as f64 - 1.0 - r);
    let value = c * bracket * c_amp * c_amp / kappa.powf(r);
    Ok(EstimateReport {
        quantity: "lemma1_bound".into(),
        value,
        inequality_id: InequalityId::Lemma1,
        inputs: inputs(&[("c_amp", c_amp), ("r", r), ("d", d as f64), ("k_norm", kappa)]),
        constants,
    })
}

// ---------------------------------------------------------------------
// critical wavenumbers
// ---------------------------------------------------------------------

/// Majorant of the algebraic trapping condition, normalized by the
/// envelope. Terms: shell-sum bound `2^(r+2) E* cbar |k| sqrt(ln|k|) / |k|^alpha`
/// plus the forcing share `|k|^-epsilon`; threshold `4 pi nu` (printed
/// form) or `4 pi^2 nu`.
pub fn algebraic_condition_2d(
    e_star: f64,
    r: f64,
    alpha: f64,
    epsilon: f64,
    nu: f64,
    factor: RhsFactor,
) -> Result<(Majorant, Vec<LatticeConstant>), EstimateError> {
    if !(alpha > 1.0) {
        return Err(EstimateError::DissipationTooWeak { alpha, needed: 1.0 });
    }
    let c_log = log_ball_constant_2d();
    let c_far = sup_scaled_tail(2, 2.0 * r + 2.0, 2.0, 2.0 * r, 2.0).sqrt();
    // coefficient of the shell-sum term A kappa^(1-alpha) sqrt(ln kappa):
    // 2 pi sqrt(E*) times the low/mid/far pieces, each normalized by
    // kappa sqrt(ln kappa); the kappa-dependent shares are decreasing on
    // [2, inf), so their supremum sits at kappa = 2
    let sqrt_e = e_star.sqrt();
    let two = 2.0f64;
    let ln2_sqrt = std::f64::consts::LN_2.sqrt();
    let shell_coeff = 2.0
        * PI
        * sqrt_e
        * (two.powf(r + 1.0) * c_log
            + two.powf(r + 2.0) * 13.0 / (2.0 * ln2_sqrt)
            + 2.0 * c_far / ln2_sqrt);
    // the reported combined constant in the shape the condition is stated
    let c_bar = if e_star > 0.0 {
        shell_coeff / (two.powf(r + 2.0) * e_star)
    } else {
        0.0
    };
    let constants = vec![
        LatticeConstant {
            name: "c_log_shell".into(),
            value: c_log,
            definition: "sup over kappa>=2 of sqrt(ball_sum_2(kappa/2) / ln kappa)".into(),
        },
        LatticeConstant {
            name: "c_far_shell".into(),
            value: c_far,
            definition: format!("sup of k^{} * sqrt(tail_{}(2k))", r, 2.0 * r + 2.0),
        },
        LatticeConstant {
            name: "c_bar".into(),
            value: c_bar,
            definition: "combined shell constant of the algebraic trapping majorant".into(),
        },
    ];
    let m = Majorant::new(
        vec![(shell_coeff, 1.0 - alpha, true), (1.0, -epsilon, false)],
        factor.value(nu),
    );
    Ok((m, constants))
}

/// Smallest integer `K >= 2` above which the algebraic trapping condition
/// holds for every wavenumber.
pub fn kcrit_2d_algebraic(
    e_star: f64,
    r: f64,
    alpha: f64,
    epsilon: f64,
    nu: f64,
    factor: RhsFactor,
) -> Result<EstimateReport, EstimateError> {
    let (m, constants) = algebraic_condition_2d(e_star, r, alpha, epsilon, nu, factor)?;
    let k = kcrit_scan(&m)?;
    Ok(EstimateReport {
        quantity: "k_crit".into(),
        value: k as f64,
        inequality_id: InequalityId::Algebraic2d,
        inputs: inputs(&[
            ("e_star", e_star),
            ("r", r),
            ("alpha", alpha),
            ("epsilon", epsilon),
            ("nu", nu),
            ("rhs_factor", m.threshold / nu),
        ]),
        constants,
    })
}

/// Static exponential weight compatible with both the low-band absorption
/// and the forcing envelope:
/// `gamma2' = min(gamma K0^delta, ln(D2'/D_bar) / K0)`.
pub fn gamma2_prime(k0: f64, d_bar: f64, d2_prime: f64, gamma: f64, delta: f64) -> f64 {
    (gamma * k0.powf(delta)).min((d2_prime / d_bar).ln() / k0)
}

/// Majorant of the exponential trapping condition in weighted variables,
/// with the weight ratio replaced by its certified bound 1.
pub fn exponential_condition_2d(
    d2_prime: f64,
    g: f64,
    r: f64,
    alpha: f64,
    epsilon: f64,
    nu: f64,
) -> Result<(Majorant, Vec<LatticeConstant>), EstimateError> {
    if d2_prime < g {
        return Err(EstimateError::AmplitudeBelowForcing {
            d_prime: d2_prime,
            g,
        });
    }
    let (c, constants) = lemma1_constant(2, r)?;
    let two = 2.0f64;
    // 2 pi c (2^(r+1) k + 2^(r+2) (6k+1) + 2 k^(1-r)) D2' + (G/D2') k^(alpha-eps)
    // all divided by k^alpha, with (6k+1) split into 6k + 1
    let a = 2.0 * PI * c * d2_prime;
    let m = Majorant::new(
        vec![
            (a * (two.powf(r + 1.0) + two.powf(r + 2.0) * 6.0), 1.0 - alpha, false),
            (a * two.powf(r + 2.0), -alpha, false),
            (a * 2.0, 1.0 - r - alpha, false),
            (g / d2_prime, -epsilon, false),
        ],
        4.0 * PI * PI * nu,
    );
    Ok((m, constants))
}

pub fn kcrit_2d_exponential(
    d2_prime: f64,
    g: f64,
    gamma: f64,
    delta: f64,
    gamma2_prime: f64,
    r: f64,
    alpha: f64,
    epsilon: f64,
    nu: f64,
) -> Result<EstimateReport, EstimateError> {
    let (m, constants) = exponential_condition_2d(d2_prime, g, r, alpha, epsilon, nu)?;
    let k = kcrit_scan(&m)?;
    Ok(EstimateReport {
        quantity: "k_crit".into(),
        value: k as f64,
        inequality_id: InequalityId::Exponential2d,
        inputs: inputs(&[
            ("d2_prime", d2_prime),
            ("g", g),
            ("gamma", gamma),
            ("delta", delta),
            ("gamma2_prime", gamma2_prime),
            ("r", r),
            ("alpha", alpha),
            ("epsilon", epsilon),
            ("nu", nu),
        ]),
        constants,
    })
}

/// Time-linear weight rate for the instantaneous-analyticity run:
/// `gamma3 = min(gamma0, gamma K0^delta / t0)`, so the weight never
/// exceeds the forcing envelope's exponential on `[0, t0]` above `K0`.
pub fn gamma3(k0: f64, t0: f64, gamma: f64, delta: f64, gamma0: f64) -> f64 {
    gamma0.min(gamma * k0.powf(delta) / t0)
}

/// Majorant of the time-weighted trapping condition.
pub fn gevrey_condition_2d(
    d3_prime: f64,
    g: f64,
    gamma0: f64,
    r: f64,
    alpha: f64,
    nu: f64,
) -> Result<(Majorant, Vec<LatticeConstant>), EstimateError> {
    if !(r > 2.0) {
        return Err(EstimateError::DecayTooWeak { r, needed: 2.0 });
    }
    if d3_prime < g {
        return Err(EstimateError::AmplitudeBelowForcing {
            d_prime: d3_prime,
            g,
        });
    }
    let (c, constants) = lemma1_constant(2, r)?;
    let two = 2.0f64;
    let a = 2.0 * PI * c * d3_prime;
    let m = Majorant::new(
        vec![
            (gamma0, 1.0 - alpha, false),
            (a * (two.powf(r + 1.0) + two.powf(r + 2.0) * 7.0), 1.0 - alpha, false),
            (a, 1.0 - r - alpha, false),
            (g / d3_prime, -alpha, false),
        ],
        4.0 * PI * PI * nu,
    );
    Ok((m, constants))
}

pub fn kcrit_2d_gevrey(
    d3_prime: f64,
    g: f64,
    gamma0: f64,
    r: f64,
    alpha: f64,
    nu: f64,
) -> Result<EstimateReport, EstimateError> {
    let (m, constants) = gevrey_condition_2d(d3_prime, g, gamma0, r, alpha, nu)?;
    let k = kcrit_scan(&m)?;
    Ok(EstimateReport {
        quantity: "k_crit".into(),
        value: k as f64,
        inequality_id: InequalityId::Gevrey2d,
        inputs: inputs(&[
            ("d3_prime", d3_prime),
            ("g", g),
            ("gamma0", gamma0),
            ("r", r),
            ("alpha", alpha),
            ("nu", nu),
        ]),
        constants,
    })
}

/// Variant selector for the 3D critical wavenumber.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Kcrit3dVariant {
    /// Unweighted envelope, controlled by the energy bound; needs
    /// `alpha > 2.5`.
    EnergyControlled { e_star: f64 },
    /// Time-weighted envelope with rate `gamma_w` and fixed amplitude;
    /// needs `alpha > 1.5`.
    Weighted { gamma_w: f64, d7_prime: f64 },
}

/// Shell-sum constant of the 3D energy-controlled estimate:
/// `sum |u_{l1}| |w_{l2}| |k| <= C sqrt(E*) D' |k|^(5/2) / |k|^r`.
pub fn energy_shell_constant_3d(r: f64) -> (f64, Vec<LatticeConstant>) {
    let two = 2.0f64;
    let c_count = two.powf(1.5); // sqrt((kappa+1)^3 / kappa^3) at kappa = 1
    let c_mid = 3.0 * 7f64.powf(1.5); // 3 * sqrt((6 kappa + 1)^3 / kappa^3), kappa >= 1
    let c_far = sup_scaled_tail(3, 2.0 * r, 1.0, 2.0 * r - 3.0, 1.0).sqrt();
    let value = two.powf(r) * c_count + two.powf(r + 1.0) * c_mid + c_far;
    let constants = vec![
        LatticeConstant {
            name: "c_count".into(),
            value: c_count,
            definition: "sqrt of lattice-point count bound (kappa+1)^3 <= 8 kappa^3".into(),
        },
        LatticeConstant {
            name: "c_mid_count".into(),
            value: c_mid,
            definition: "3 * sqrt of count bound (6 kappa + 1)^3 <= 343 kappa^3".into(),
        },
        LatticeConstant {
            name: "c_far_tail".into(),
            value: c_far,
            definition: format!("sup of k^{} * sqrt(tail_{}(k))", r - 1.5, 2.0 * r),
        },
    ];
    (value, constants)
}

pub fn kcrit_3d(
    r: f64,
    alpha: f64,
    nu: f64,
    variant: Kcrit3dVariant,
) -> Result<EstimateReport, EstimateError> {
    match variant {
        Kcrit3dVariant::EnergyControlled { e_star } => {
            if !(alpha > 2.5) {
                return Err(EstimateError::DissipationTooWeak { alpha, needed: 2.5 });
            }
            if !(r > 1.5) {
                return Err(EstimateError::DecayTooWeak { r, needed: 1.5 });
            }
            let (c, constants) = energy_shell_constant_3d(r);
            // 8 pi C sqrt(E*) k^(5/2) < 4 pi^2 nu k^alpha
            let m = Majorant::new(
                vec![(8.0 * PI * c * e_star.sqrt(), 2.5 - alpha, false)],
                4.0 * PI * PI * nu,
            );
            let k = kcrit_scan(&m)?;
            Ok(EstimateReport {
                quantity: "k_crit".into(),
                value: k as f64,
                inequality_id: InequalityId::Energy3d,
                inputs: inputs(&[
                    ("e_star", e_star),
                    ("r", r),
                    ("alpha", alpha),
                    ("nu", nu),
                ]),
                constants,
            })
        }
        Kcrit3dVariant::Weighted { gamma_w, d7_prime } => {
            if !(alpha > 1.5) {
                return Err(EstimateError::DissipationTooWeak { alpha, needed: 1.5 });
            }
            if !(r > 2.0) {
                return Err(EstimateError::DecayTooWeak { r, needed: 2.0 });
            }
            let (c, constants) = lemma1_constant(3, r)?;
            let two = 2.0f64;
            let a = 8.0 * PI * c * d7_prime;
            // 8 pi c (2^r k + 2^(r+1) (6k+1)^(3/2) + k^(2-r)/2) D7'
            //   < 4 pi^2 nu k^alpha - gamma_w k,
            // with (6k+1)^(3/2) <= (7k)^(3/2) for k >= 1
            let m = Majorant::new(
                vec![
                    (a * two.powf(r), 1.0 - alpha, false),
                    (a * two.powf(r + 1.0) * 7f64.powf(1.5), 1.5 - alpha, false),
                    (a * 0.5, 2.0 - r - alpha, false),
                    (gamma_w, 1.0 - alpha, false),
                ],
                4.0 * PI * PI * nu,
            );
            let k = kcrit_scan(&m)?;
            Ok(EstimateReport {
                quantity: "k_crit".into(),
                value: k as f64,
                inequality_id: InequalityId::Weighted3d,
                inputs: inputs(&[
                    ("gamma_w", gamma_w),
                    ("d7_prime", d7_prime),
                    ("r", r),
                    ("alpha", alpha),
                    ("nu", nu),
                ]),
                constants,
            })
        }
    }
}

// ---------------------------------------------------------------------
// envelope l2 norms over the infinite lattice
// ---------------------------------------------------------------------

/// Certified upper bound of
/// `sum over k != 0 of (A exp(-rate |k|^q) / |k|^r)^2`,
/// truncation-independent. With `rate = 0` this requires `2r > d`.
pub fn envelope_l2_bound_all(
    d: usize,
    amplitude: f64,
    r: f64,
    rate: f64,
    q: f64,
) -> Result<f64, EstimateError> {
    if rate == 0.0 {
        let p = 2.0 * r;
        if p <= d as f64 {
            return Err(EstimateError::Lattice(LatticeError::DivergentSum { d, p }));
        }
        return Ok(amplitude * amplitude * lattice_sum(d, p, SumRegion::All)?);
    }
    let r0 = 32.0;
    let head = {
        let mut total = 0.0;
        let term = |kn: f64| {
            let e = (-rate * kn.powf(q)).exp() * kn.powf(-r);
            e * e
        };
        match d {
            2 => {
                let z = crate::lattice::TruncationSet::<2>::disk(r0)
                    .expect("radius above 1");
                for k in z.members() {
                    total += term(k.norm());
                }
            }
            3 => {
                let z = crate::lattice::TruncationSet::<3>::disk(r0)
                    .expect("radius above 1");
                for k in z.members() {
                    total += term(k.norm());
                }
            }
            _ => panic!("only dimensions 2 and 3 are supported"),
        }
        total
    };
    // tail: envelope^2 = |k|^{-(d+1)} * h(|k|),
    // h(t) = t^(d+1-2r) exp(-2 rate t^q) bounded by its supremum
    let m = d as f64 + 1.0 - 2.0 * r;
    let two_rate = 2.0 * rate;
    let h = |t: f64| t.powf(m) * (-two_rate * t.powf(q)).exp();
    let sup = if m <= 0.0 {
        h(r0)
    } else {
        let t_crit = (m / (two_rate * q)).powf(1.0 / q);
        h(t_crit.max(r0))
    };
    let tail = sup * lattice_sum(d, d as f64 + 1.0, SumRegion::ComplementBall(r0))?;
    Ok(amplitude * amplitude * (head + tail))
}
