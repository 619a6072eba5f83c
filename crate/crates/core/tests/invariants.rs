use std::f64::consts::{PI, TAU};

use cyclab::bergman::{cyclicity_scan, truncation_tail_bound};
use cyclab::grid::DiskPoint;
use cyclab::growth::outer::arc_measure;
use cyclab::growth::{moment_weights, LambdaMajorant, OuterFdelta};
use cyclab::pipeline::{lambda_ladder, plan_theorem1, ConstantSource};
use cyclab::series::{inner_abs, inner_coeffs, multiply, AtomicSingularMeasure};
use cyclab::weights::{concave_at, make_family, weight_ladder, FamilySpec, WeightSequence};
use cyclab::Complex64;
use proptest::prelude::*;

fn family(spec: &str, horizon: usize) -> WeightSequence {
    let spec: FamilySpec = spec.parse().unwrap();
    make_family(&spec, horizon, false, None).unwrap()
}

#[test]
fn scan_distance_is_nonincreasing_and_bracketed() {
    let w = family("stretched,c=1,beta=0.5", 2049);
    let nu: AtomicSingularMeasure = "1.0@0.0;0.5@3.0".parse().unwrap();
    let res = cyclicity_scan(&w, &nu, &[0, 2, 8, 32, 128], 2048).unwrap();
    for p in res.windows(2) {
        assert!(p[1].dist <= p[0].dist + 1e-12);
    }
    for r in &res {
        assert!(r.dist <= 1.0 + 1e-12);
        let tail = truncation_tail_bound(&w, inner_coeffs(&nu, 2048).h2_mass(), 2048, r.n).unwrap();
        assert!(r.tail_bound <= tail + 1e-15);
    }
}

#[test]
fn theorem1_plan_on_square_root_weight() {
    // log ω = √n: ladder 1, 4, 16, …, each term (log ω)²/n is 1, and block j
    // sits on rung j0 + j
    let w = family("stretched,c=1,beta=0.5", 1 << 16);
    let nu = AtomicSingularMeasure::point_mass(0.25).unwrap();
    let plan = plan_theorem1(&w, &nu, 1, 1.0, ConstantSource::Override).unwrap();
    assert_eq!(plan.threshold, 4.0);
    assert_eq!(plan.n_blocks, 4);
    assert_eq!(plan.rungs, vec![16, 64, 256, 1024]);
    assert!((plan.lambda_sq_sum() - 1.0).abs() < 1e-15);
    let mass: f64 = plan.masses.iter().sum();
    assert!((mass - 0.25).abs() < 1e-15);
}

#[test]
fn lambda_ladder_reaches_large_indices() {
    let l = lambda_ladder(&LambdaMajorant::power(1.0), 63);
    assert_eq!(l.len(), 63);
    // exact doubling while 1/n is exact; near 2⁶² rounding of 1/n may
    // move a rung by a few ulps
    for (j, &n) in l.iter().enumerate().take(53) {
        assert_eq!(n, 1u64 << j);
    }
    let last = *l.last().unwrap() as f64;
    assert!((last / 2f64.powi(62) - 1.0).abs() < 1e-12);
}

#[test]
fn outer_factor_taylor_matches_boundary_modulus() {
    let f = OuterFdelta::new(2.0, 0.3);
    let t = f.taylor(4096, false);
    for &(h, th) in &[(0.5, 1.0), (0.2, -2.0), (0.1, 0.2)] {
        let p = DiskPoint::polar(h, th);
        assert!((t.eval(p.z()).norm().ln() - f.log_abs(&p)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ladder_doubles_and_is_minimal(c in 0.2f64..3.0, beta in 0.1f64..0.9) {
        let w = family(&format!("stretched,c={c},beta={beta}"), 1 << 14);
        let l = weight_ladder(&w, 10).unwrap();
        for p in l.rungs.windows(2) {
            let base = w.log_weight(p[0]);
            prop_assert!(w.log_weight(p[1]) >= 2.0 * base);
            prop_assert!((p[0] + 1..p[1]).all(|n| w.log_weight(n) < 2.0 * base));
        }
    }

    #[test]
    fn theorem1_weights_sum_to_one(alpha in 0.5f64..3.0, a in 0.05f64..0.5, mass in 0.1f64..2.0, j0 in 1usize..4) {
        let w = family(&format!("stretched,c={alpha},beta=0.5"), 1 << 16);
        let nu = AtomicSingularMeasure::point_mass(mass).unwrap();
        if let Ok(plan) = plan_theorem1(&w, &nu, j0, a, ConstantSource::Override) {
            prop_assert!((plan.lambda_sq_sum() - 1.0).abs() < 1e-12);
            prop_assert!(plan.partial_sum >= plan.threshold);
            prop_assert_eq!(plan.rungs.len(), plan.n_blocks);
            prop_assert!(plan.rungs.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn moment_weights_are_log_concave(alpha in 0.2f64..1.5) {
        let w = moment_weights(&LambdaMajorant::power(alpha), 24).unwrap();
        prop_assert!(w.is_monotone());
        for n in 1..24 {
            prop_assert!(concave_at(w.values(), n));
        }
    }

    #[test]
    fn harmonic_measure_is_additive(h in 1e-6f64..1.0, th in -PI..PI, a in 0.0f64..TAU, s in 0.01f64..0.99) {
        let p = DiskPoint::polar(h, th);
        let b = a + s * TAU;
        let whole = arc_measure(&p, a, b) + arc_measure(&p, b, a + TAU);
        prop_assert!((whole - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inner_semigroup(c1 in 0.1f64..1.5, c2 in 0.1f64..1.5) {
        let m = 128;
        let a = inner_coeffs(&AtomicSingularMeasure::point_mass(c1).unwrap(), m);
        let b = inner_coeffs(&AtomicSingularMeasure::point_mass(c2).unwrap(), m);
        let ab = inner_coeffs(&AtomicSingularMeasure::point_mass(c1 + c2).unwrap(), m);
        let prod = multiply(&a, &b, m);
        for n in 0..=m {
            prop_assert!((prod.coeff(n) - ab.coeff(n)).norm() < 1e-10);
        }
    }

    #[test]
    fn inner_modulus_below_one(h in 1e-8f64..1.0, th in -PI..PI, c in 0.0f64..3.0) {
        let nu = AtomicSingularMeasure::point_mass(c.max(1e-3)).unwrap();
        let z = Complex64::from_polar(1.0 - h, th);
        prop_assert!(inner_abs(&nu, z).unwrap() <= 1.0);
    }
}
