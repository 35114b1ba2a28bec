use modetrap::lattice::{dot, TruncationSet, WaveVector};
use modetrap::oracle::random_spectrum_2d;
use num_complex::Complex64;
use std::sync::Arc;

fn main() {
    let trunc = Arc::new(TruncationSet::<2>::disk(3.0).unwrap());
    let s = random_spectrum_2d(Arc::clone(&trunc), 1.0, 1.0, 42);
    let minus_two_pi_i = Complex64::new(0.0, -2.0 * std::f64::consts::PI);
    // total triple sum, term by term
    let mut total = Complex64::new(0.0, 0.0);
    let mut worst_pair = 0.0f64;
    let mut example_shown = false;
    for &k in trunc.members() {
        for (l1, l2) in trunc.convolution_pairs(k) {
            let c = dot(k, l2.perp()) as f64 / l2.norm_sq() as f64;
            let term = s.amp(k).conj() * minus_two_pi_i * s.amp(l1) * s.amp(l2) * c;
            total += term;
            // partner: output -l1, pair (-k, l2)
            let kp = -l1;
            let cp = dot(kp, l2.perp()) as f64 / l2.norm_sq() as f64;
            let partner = s.amp(kp).conj() * minus_two_pi_i * s.amp(-k) * s.amp(l2) * cp;
            let resid = (term + partner).norm();
            if resid > worst_pair {
                worst_pair = resid;
                if resid > 1e-12 && !example_shown {
                    example_shown = true;
                    println!("k={:?} l1={:?} l2={:?} c={} cp={}", k.components(), l1.components(), l2.components(), c, cp);
                    println!("  term={term:?} partner={partner:?}");
                    println!("  in Z: kp {} -k {}", trunc.contains(kp), trunc.contains(-k));
                }
            }
        }
    }
    println!("triple total = {total:?}, worst pair residual = {worst_pair:.3e}");
}
