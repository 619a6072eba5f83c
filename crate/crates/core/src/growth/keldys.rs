//! The outer function F with log|F| = −Λ(|1 − e^{it}|) on the circle.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lambda::LambdaMajorant;
use super::GrowthError;
use crate::grid::DiskPoint;
use crate::quad;

/// Levels after which a piece ratio near one counts as divergence.
pub const DIVERGENCE_LEVELS: usize = 30;
const RATIO_ONE: f64 = 1.0 - 1e-3;
const MAX_LEVELS: usize = 1000;
const TAIL_REL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeldysResult {
    pub log_value: Complex64,
    /// dyadic levels integrated before the tail was extrapolated
    pub levels: usize,
    /// estimated geometric ratio of successive pieces at the cutoff
    pub ratio: f64,
}

/// log F(z) = −(1/2π)∫₀^{2π} (e^{it}+z)/(e^{it}−z)·Λ(|1−e^{it}|) dt.
///
/// The circle is cut into dyadic pieces [π2^{−l−1}, π2^{−l}] and their
/// mirrors near 2π. Once successive piece sizes settle into a geometric
/// ratio below one the remaining tail is summed in closed form; a ratio
/// that stays at one means the integral diverges.
pub fn keldys_outer_f(lam: &LambdaMajorant, z: Complex64) -> Result<KeldysResult, GrowthError> {
    if !(z.norm() < 1.0) {
        return Err(GrowthError::OutsideDisk);
    }
    if lam.is_zero() {
        return Ok(KeldysResult {
            log_value: Complex64::new(0.0, 0.0),
            levels: 0,
            ratio: 0.0,
        });
    }
    let p = DiskPoint::from_z(z);
    let mut th = p.theta;
    if th < 0.0 {
        th += TAU;
    }
    // both sides are parametrized by the distance s to t = 0 so that
    // |1 − e^{it}| = 2 sin(s/2) keeps full precision near 2π
    let side = |sign: f64, s: f64| {
        let e = Complex64::from_polar(1.0, sign * s);
        (e + z) / (e - z) * lam.value(2.0 * (s / 2.0).sin())
    };
    let piece = |lo: f64, hi: f64| -> Result<Complex64, GrowthError> {
        let a = quad::integrate_with(|s| side(1.0, s), lo, hi, &[th], 1e-12, 1e-300)?;
        let b = quad::integrate_with(|s| side(-1.0, s), lo, hi, &[TAU - th], 1e-12, 1e-300)?;
        Ok(a.value + b.value)
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut sizes: Vec<f64> = Vec::new();
    let mut ratio = f64::NAN;
    for level in 0..MAX_LEVELS {
        let hi = PI * 0.5f64.powi(level as i32);
        let lo = 0.5 * hi;
        let v = piece(lo, hi)?;
        total += v;
        sizes.push(v.norm());
        let n = sizes.len();
        if n < 3 {
            continue;
        }
        let r1 = sizes[n - 1] / sizes[n - 2];
        let r0 = sizes[n - 2] / sizes[n - 3];
        ratio = r1;
        if level + 1 >= DIVERGENCE_LEVELS && r1 >= RATIO_ONE {
            return Err(GrowthError::Divergent {
                prev: sizes[n - 2],
                last: sizes[n - 1],
                levels: level + 1,
            });
        }
        if r1 < RATIO_ONE && (r1 - r0).abs() < 1e-3 {
            let tail = v * (r1 / (1.0 - r1));
            if tail.norm() <= TAIL_REL * total.norm().max(f64::MIN_POSITIVE) {
                total += tail;
                return Ok(KeldysResult {
                    log_value: -total / TAU,
                    levels: level + 1,
                    ratio,
                });
            }
        }
    }
    // ran out of levels: accept a settled ratio, otherwise report divergence
    if ratio < RATIO_ONE {
        return Ok(KeldysResult {
            log_value: -total / TAU,
            levels: MAX_LEVELS,
            ratio,
        });
    }
    let n = sizes.len();
    Err(GrowthError::Divergent {
        prev: sizes[n - 2],
        last: sizes[n - 1],
        levels: MAX_LEVELS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Γ(3/4)
    const GAMMA_3_4: f64 = 1.225_416_702_465_177_6;

    #[test]
    fn half_power_at_origin() {
        // ∫₀^{2π}|2 sin(t/2)|^{−1/2} dt = 2π·Γ(1/2)/Γ(3/4)²
        let lam = LambdaMajorant::power(0.5);
        let r = keldys_outer_f(&lam, Complex64::new(0.0, 0.0)).unwrap();
        let exact = -PI.sqrt() / (GAMMA_3_4 * GAMMA_3_4);
        assert!((r.log_value.re - exact).abs() < 1e-9, "{} vs {exact}", r.log_value.re);
        assert!(r.log_value.im.abs() < 1e-9);
    }

    #[test]
    fn bounded_by_one_off_origin() {
        let lam = LambdaMajorant::power(0.5);
        for &z in &[Complex64::new(0.9, 0.0), Complex64::new(-0.5, 0.5), Complex64::new(0.99, 0.1)] {
            let r = keldys_outer_f(&lam, z).unwrap();
            assert!(r.log_value.re <= 0.0);
        }
    }

    #[test]
    fn zero_and_divergent() {
        let r = keldys_outer_f(&LambdaMajorant::zero(), Complex64::new(0.4, 0.1)).unwrap();
        assert_eq!(r.log_value, Complex64::new(0.0, 0.0));
        let e = keldys_outer_f(&LambdaMajorant::power(1.0), Complex64::new(0.0, 0.0));
        assert!(matches!(e, Err(GrowthError::Divergent { .. })));
    }
}
