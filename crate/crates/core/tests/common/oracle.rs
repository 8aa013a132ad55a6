//! Pair-enumeration reference for the discrete collision operator.
//!
//! Every ordered pair of grid directions is classified by the real angle
//! between them. Pairs closer than a right angle whose midpoint is a grid
//! direction align there; pairs further apart than a right angle both
//! reverse. Nothing here shares code with the production operator.

use std::f64::consts::PI;

pub fn brute_force_collide(n: usize, rod: bool, f: &[f64]) -> Vec<f64> {
    let m = 2 * n;
    let dphi = PI / n as f64;
    let angle = |k: usize| k as f64 * dphi;
    let rate = |delta: f64| if rod { delta.sin().abs() } else { 1.0 };
    let mut out = vec![0.0; m];
    for a in 0..m {
        for c in 0..m {
            // angle from a to c, wrapped into (-pi, pi]
            let mut delta = (angle(c) - angle(a)).rem_euclid(2.0 * PI);
            if delta > PI + 1e-9 {
                delta -= 2.0 * PI;
            }
            if delta.abs() < 1e-9 {
                continue;
            }
            let flux = f[a] * f[c] * rate(delta);
            if delta.abs() < PI / 2.0 {
                let mid = (angle(a) + delta / 2.0).rem_euclid(2.0 * PI) / dphi;
                let k = mid.round();
                if (mid - k).abs() > 1e-6 {
                    continue;
                }
                let k = k as usize % m;
                out[k] += 2.0 * dphi * flux;
                out[a] -= 2.0 * dphi * flux;
            } else {
                out[(a + n) % m] += dphi * flux;
                out[a] -= dphi * flux;
            }
        }
    }
    out
}
