use std::sync::Arc;

use cspoly::bounds::bound_b0;
use cspoly::critical::{all_critical_points, SolverConfig};
use cspoly::genericity::{certify_1d, genericity_report, GenericityTols};
use cspoly::selections::{
    active_set, decompose_1d, enumerate_selections_1d, Location, Selection, SelectionSpec,
};
use cspoly::slope_bounds::{coercivity_check, dist_to_s, sublevel_set_1d};
use cspoly::subdifferential::{min_norm_point, slope};
use cspoly::univariate::{rat, real_roots_rat, RatPoly, RootRange};
use cspoly::{Instance, Polynomial};
use num_bigint::BigUint;
use proptest::prelude::*;

/// Univariate families with half-integer coefficients, no duplicates.
fn family(max_r: usize, max_d: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec(prop::collection::vec(-4i32..=4, 1..=max_d + 1), 1..=max_r)
        .prop_map(|polys| {
            let polys: Vec<Polynomial> = polys
                .iter()
                .map(|c| {
                    Polynomial::univariate(&c.iter().map(|v| *v as f64 / 2.0).collect::<Vec<_>>())
                })
                .collect();
            Instance::from_polys(polys).unwrap()
        })
        .prop_filter("distinct polynomials", |inst| {
            inst.find_duplicate().is_none()
        })
}

fn vertices(max_n: usize, max_m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_n).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), 1..=max_m)
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn min_norm_point_is_optimal(v in vertices(4, 6)) {
        let res = min_norm_point(&v, 1e-12).unwrap();
        let w_sum: f64 = res.weights.iter().sum();
        prop_assert!((w_sum - 1.0).abs() < 1e-9);
        prop_assert!(res.weights.iter().all(|w| *w >= -1e-12));
        let n = v[0].len();
        let p: Vec<f64> = (0..n).map(|k| v.iter().zip(&res.weights).map(|(x, w)| w * x[k]).sum()).collect();
        for k in 0..n {
            prop_assert!((p[k] - res.point[k]).abs() < 1e-9);
        }
        let pp = dot(&p, &p);
        let scale = v.iter().map(|x| dot(x, x)).fold(1.0, f64::max);
        for x in &v {
            prop_assert!(dot(&p, x) - pp >= -1e-8 * scale);
        }
    }

    #[test]
    fn min_norm_ignores_vertex_order(v in vertices(3, 5), rot in 0usize..5) {
        let mut w = v.clone();
        let len = w.len();
        w.rotate_left(rot % len);
        let a = min_norm_point(&v, 1e-12).unwrap().norm;
        let b = min_norm_point(&w, 1e-12).unwrap().norm;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn catalog_points_are_critical(inst in family(3, 3)) {
        let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
        prop_assert!(BigUint::from(cat.points.len()) <= bound_b0(1, inst.d(), inst.r()).unwrap());
        for p in &cat.points {
            prop_assert!(slope(&inst, &p.active, &p.x).unwrap() <= 1e-7);
            let seen = active_set(&inst, p.value, &p.x, 1e-6).unwrap();
            prop_assert_eq!(&seen, &p.active);
        }
    }

    #[test]
    fn catalog_and_report_are_permutation_invariant(inst in family(3, 2), rot in 0usize..3) {
        let r = inst.r();
        let perm: Vec<usize> = (0..r).map(|i| (i + rot) % r).collect();
        let other = inst.permuted(&perm);
        let cfg = SolverConfig::default();
        let a = all_critical_points(&inst, &cfg).unwrap();
        let b = all_critical_points(&other, &cfg).unwrap();
        let xa: Vec<f64> = a.points.iter().map(|p| p.x[0]).collect();
        let xb: Vec<f64> = b.points.iter().map(|p| p.x[0]).collect();
        prop_assert_eq!(xa, xb);
        let tols = GenericityTols::default();
        let ra = genericity_report(&inst, &a, &tols);
        let rb = genericity_report(&other, &b, &tols);
        prop_assert_eq!(ra.failed(), rb.failed());
    }

    #[test]
    fn enumeration_matches_labeling_oracle(inst in family(3, 2)) {
        let e = enumerate_selections_1d(&inst, 100_000).unwrap();
        let dec = decompose_1d(&inst).unwrap();
        let xs: Vec<f64> = dec.breakpoints.iter().map(|b| b.x()).collect();
        let r = inst.r();
        let intervals = xs.len() + 1;
        let mut count = 0usize;
        for code in 0..r.pow(intervals as u32) {
            let labels: Vec<usize> = (0..intervals).map(|k| code / r.pow(k as u32) % r).collect();
            let ok = xs.iter().enumerate().all(|(i, &t)| {
                let a = inst.poly(labels[i]).eval(&[t]).unwrap();
                let b = inst.poly(labels[i + 1]).eval(&[t]).unwrap();
                (a - b).abs() <= 1e-7 * (1.0 + a.abs())
            });
            count += ok as usize;
        }
        prop_assert_eq!(e.count, BigUint::from(count));
    }

    #[test]
    fn certificates_imply_numeric_checks(inst in family(3, 2)) {
        let cert = certify_1d(&inst).unwrap();
        if cert.certified {
            let cat = all_critical_points(&inst, &SolverConfig::default()).unwrap();
            let rep = genericity_report(&inst, &cat, &GenericityTols::default());
            prop_assert!(rep.check("active_set_bound").unwrap().passed);
            prop_assert!(rep.check("affine_independence").unwrap().passed);
        }
    }

    #[test]
    fn coercive_implies_bounded_below(inst in family(3, 3), use_max in any::<bool>()) {
        let spec: SelectionSpec = if use_max { "max" } else { "min" }.parse().unwrap();
        let s = Selection::resolve(&spec, &inst).unwrap();
        let v = coercivity_check(&inst, &s, 0).unwrap();
        prop_assert!(!v.coercive || v.bounded_below);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sublevel_membership_matches_sign(inst in family(3, 3), use_max in any::<bool>(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let spec: SelectionSpec = if use_max { "max" } else { "min" }.parse().unwrap();
        let s = Selection::resolve(&spec, &inst).unwrap();
        let sel = s.as_univariate().unwrap();
        let set = sublevel_set_1d(sel).unwrap();
        let exact: Vec<RatPoly> = inst.polys().iter().map(|p| RatPoly::from_poly(p).unwrap()).collect();
        let dec = sel.decomposition();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(-6.0..6.0);
            let loc = dec.locate(x).unwrap();
            let label = match loc {
                Location::Interval(k) | Location::Breakpoint(k) => sel.labels()[k],
            };
            let inside = exact[label].sign_at(&rat(x).unwrap()) <= 0;
            prop_assert_eq!(set.contains(x).unwrap(), inside, "x = {}", x);
            if !set.is_empty() {
                let d = dist_to_s(x, &set).unwrap();
                prop_assert_eq!(d == 0.0, inside);
                if let Some((y, dy)) = prev {
                    prop_assert!((d - dy).abs() <= (x - y).abs() + 1e-12);
                }
                prev = Some((x, d));
            }
        }
    }
}

proptest! {
    #[test]
    fn isolates_known_rational_roots(mut roots in prop::collection::btree_set(-20i64..=20, 1..6)) {
        let roots: Vec<i64> = std::mem::take(&mut roots).into_iter().collect();
        let p = roots.iter().fold(RatPoly::from_i64(&[1]), |acc, &t| acc.mul(&RatPoly::from_i64(&[-t, 2])));
        let found = real_roots_rat(&p, RootRange::Line).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        for (t, root) in roots.iter().zip(&found.roots) {
            prop_assert_eq!(root.approx(), *t as f64 / 2.0);
        }
    }

    #[test]
    fn coefficient_vector_round_trip(c in prop::collection::vec(-3.0f64..3.0, 6)) {
        let inst = Instance::from_coeff_vector(&c, 2, 1, 2).unwrap();
        prop_assert_eq!(inst.coeff_vector(), c);
    }
}

#[test]
fn univariate_selection_active_sets_are_exact() {
    let inst = Instance::from_polys(vec![
        Polynomial::univariate(&[0.0, 1.0]),
        Polynomial::univariate(&[0.0, -1.0]),
    ])
    .unwrap();
    let dec = Arc::new(decompose_1d(&inst).unwrap());
    let sel = cspoly::selections::UnivariateSelection::new(dec, vec![1, 0]).unwrap();
    assert_eq!(sel.active_set(0.0).unwrap().one_based(), vec![1, 2]);
    assert_eq!(sel.active_set(1e-300).unwrap().one_based(), vec![1]);
}
