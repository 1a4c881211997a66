//! Randomized invariants for norms, nets, and certificates.

use bochner_compact::ambient::{greedy_net, AmbientSpace, NormKind};
use bochner_compact::bfspace::{DiscreteBFS, OrliczPhi};
use bochner_compact::bochner::VectorFunction;
use bochner_compact::criteria::ui_modulus;
use bochner_compact::measure::{lp_norm, MeasureSpace, ScalarSample};
use proptest::prelude::*;

fn weights_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..1.0_f64, 2..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chebyshev_inequality(
        weights in weights_strategy(),
        seed in 0u64..1000,
        p in 1.0..3.5_f64,
        r in 0.1..4.0_f64,
    ) {
        let space = MeasureSpace::probability(&weights).unwrap();
        let n = weights.len();
        let values: Vec<f64> = (0..n).map(|i| {
            let x = ((seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64 * 1442695040888963407)) >> 11) as f64;
            (x / (1u64 << 53) as f64) * 6.0 - 3.0
        }).collect();
        let sample = ScalarSample::new(space.clone(), values).unwrap();
        let lhs = space.subset_measure(&sample.strict_tail_mask(r)).unwrap();
        let rhs = (lp_norm(&sample, p).unwrap() / r).powf(p);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn lp_norm_monotone_in_values(
        weights in weights_strategy(),
        p in 1.0..3.5_f64,
        scale in 0.0..1.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        let big: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let small: Vec<f64> = big.iter().map(|v| v * scale).collect();
        let a = lp_norm(&ScalarSample::new(space.clone(), small).unwrap(), p).unwrap();
        let b = lp_norm(&ScalarSample::new(space, big).unwrap(), p).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn lp_norms_nested_on_probability_spaces(
        weights in weights_strategy(),
        values_seed in 1.0..4.0_f64,
        p1 in 1.0..3.0_f64,
        gap in 0.0..2.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        let values: Vec<f64> = (0..n).map(|i| values_seed * (1.0 + 0.3 * i as f64)).collect();
        let sample = ScalarSample::new(space, values).unwrap();
        let p2 = p1 + gap;
        let a = lp_norm(&sample, p1).unwrap();
        let b = lp_norm(&sample, p2).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn greedy_net_covers_and_separates(
        raw_points in prop::collection::vec(prop::collection::vec(-2.0..2.0_f64, 2..=2), 1..40),
        eps in 0.05..1.0_f64,
    ) {
        let ambient = AmbientSpace::canonical(2, NormKind::l2()).unwrap();
        let cover = greedy_net(&ambient, &raw_points, eps).unwrap();
        // covering: every input point lies within eps of a center
        for pt in &raw_points {
            let d = bochner_compact::ambient::cover_distance(&ambient, pt, &cover).unwrap();
            prop_assert!(d <= eps + 1e-12);
        }
        // separation: centers are pairwise more than eps apart
        for (i, a) in cover.centers.iter().enumerate() {
            for b in &cover.centers[i + 1..] {
                let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                prop_assert!(d > eps - 1e-12);
            }
        }
    }

    #[test]
    fn luxemburg_norm_defining_inequality(
        weights in weights_strategy(),
        exponent in 1.0..4.0_f64,
        scale in 0.1..5.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        let e = DiscreteBFS::luxemburg(space.clone(), OrliczPhi::Power(exponent)).unwrap();
        let values: Vec<f64> = (0..n).map(|i| scale * (0.2 + i as f64 * 0.4)).collect();
        let sample = ScalarSample::new(space.clone(), values.clone()).unwrap();
        let norm = e.e_norm(&sample).unwrap();
        prop_assert!(norm > 0.0);
        // modular at the computed norm is at most 1 (Luxemburg definition)
        let modular: f64 = space
            .weights()
            .iter()
            .zip(&values)
            .map(|(&w, &v)| w * (v.abs() / norm).powf(exponent))
            .sum();
        prop_assert!(modular <= 1.0 + 1e-9);
        // and exceeds 1 slightly below the norm (infimum property)
        let modular_below: f64 = space
            .weights()
            .iter()
            .zip(&values)
            .map(|(&w, &v)| w * (v.abs() / (norm * (1.0 - 1e-6))).powf(exponent))
            .sum();
        prop_assert!(modular_below >= 1.0 - 1e-4);
    }

    #[test]
    fn e_norm_lattice_property(
        weights in weights_strategy(),
        q in 1.0..3.0_f64,
        shrink in 0.0..1.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        for e in [
            DiscreteBFS::weighted_lq(space.clone(), q).unwrap(),
            DiscreteBFS::luxemburg(space.clone(), OrliczPhi::Power(2.0)).unwrap(),
        ] {
            let big: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.7).collect();
            let small: Vec<f64> = big.iter().map(|v| v * shrink).collect();
            let a = e.e_norm(&ScalarSample::new(space.clone(), small).unwrap()).unwrap();
            let b = e.e_norm(&ScalarSample::new(space.clone(), big).unwrap()).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-9));
        }
    }

    #[test]
    fn tail_modulus_nonincreasing_in_radius(
        weights in weights_strategy(),
        p in 1.0..3.0_f64,
        r in 0.1..2.0_f64,
        bump in 0.01..2.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        let ambient = AmbientSpace::canonical(1, NormKind::l2()).unwrap();
        let prefix: Vec<VectorFunction> = (0..5)
            .map(|k| {
                let values = (0..n).map(|i| vec![(k + i) as f64 * 0.6 - 1.0]).collect();
                VectorFunction::new(space.clone(), ambient.clone(), values).unwrap()
            })
            .collect();
        let a = ui_modulus(&prefix, p, r + bump).unwrap();
        let b = ui_modulus(&prefix, p, r).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn bochner_distance_triangle_inequality(
        weights in weights_strategy(),
        p in 1.0..3.0_f64,
        s in -2.0..2.0_f64,
        t in -2.0..2.0_f64,
    ) {
        let n = weights.len();
        let space = MeasureSpace::probability(&weights).unwrap();
        let ambient = AmbientSpace::canonical(2, NormKind::l2()).unwrap();
        let make = |c: f64| {
            let values = (0..n).map(|i| vec![c + i as f64 * 0.3, c * 0.5]).collect();
            VectorFunction::new(space.clone(), ambient.clone(), values).unwrap()
        };
        let (f, g, h) = (make(s), make(t), make(0.25 * (s + t)));
        let fg = bochner_compact::bochner::bochner_distance(&f, &g, p).unwrap();
        let fh = bochner_compact::bochner::bochner_distance(&f, &h, p).unwrap();
        let hg = bochner_compact::bochner::bochner_distance(&h, &g, p).unwrap();
        prop_assert!(fg <= fh + hg + 1e-9);
    }
}
