use std::f64::consts::FRAC_PI_2;

use corrchan::analysis::{
    boundary_eigenvalues, identity_check_sums, lemma_p_shift, lemma_q_shift, majorization_check,
    perturb_eigen_scan, root_shift_predict, shifted_cubic_roots, summarize_scan,
    unit_block_matrix_check, trumping_scan, DominanceFailure, ScanGrid, Side,
};
use corrchan::purity::{decoupled_eigenvalue, delta_matrix};
use corrchan::verify::example_pair;
use corrchan::{Exec, PurityOrder, ReducedParams};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Signed margin of `x` inside the convex hull of the permutations of `y`
/// (dimension 3, projected to the first two coordinates). Positive inside.
fn hull_margin(x: &[f64], y: &[f64]) -> f64 {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut pts: Vec<(f64, f64)> = perms.iter().map(|p| (y[p[0]], y[p[1]])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
    // monotone chain, counter-clockwise
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let q = (x[0], x[1]);
    (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            cross(a, b, q) / len
        })
        .fold(f64::INFINITY, f64::min)
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        sorted_desc(v.into_iter().map(|x| x / s).collect())
    })
}

fn oracle_eigs(m: &corrchan::CMatrix) -> Vec<f64> {
    let n = m.dim();
    let na = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    sorted_desc(SymmetricEigen::new(na).eigenvalues.iter().copied().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn doubly_stochastic_images_are_majorized(y in simplex(3), w in prop::collection::vec(0.0f64..1.0, 6)) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let tot: f64 = w.iter().sum();
        prop_assume!(tot > 1e-6);
        let mut x = vec![0.0; 3];
        for (p, wk) in perms.iter().zip(&w) {
            for i in 0..3 {
                x[i] += wk / tot * y[p[i]];
            }
        }
        let rep = majorization_check(&x, &y).unwrap();
        prop_assert!(rep.majorized && rep.p_dominated);
    }

    #[test]
    fn partial_sums_agree_with_permutation_hull(x in simplex(3), y in simplex(3)) {
        let margin = hull_margin(&x, &y);
        prop_assume!(margin.abs() > 1e-9);
        let rep = majorization_check(&x, &y).unwrap();
        prop_assert_eq!(rep.majorized, margin > 0.0);
        if !rep.majorized {
            let is_partial = matches!(rep.first_violation, Some(DominanceFailure::PartialSum { .. }));
            prop_assert!(is_partial);
        }
    }

    #[test]
    fn weak_majorization_implies_norm_dominance(x in simplex(4), y in simplex(4), s in 0.3f64..1.0) {
        let xs: Vec<f64> = x.iter().map(|v| v * s).collect();
        let rep = majorization_check(&xs, &y).unwrap();
        if rep.weakly_majorized {
            prop_assert!(rep.p_dominated);
        }
    }

    #[test]
    fn identity_sums_vanish(a in 0.0f64..1.0, g1 in 0.05f64..1.0, g2 in 0.05f64..1.0) {
        let r = [a + g1 + g2, a + g1, a];
        let (s0, s1) = identity_check_sums(r).unwrap();
        prop_assert!(s0.abs() < 1e-9 && s1.abs() < 1e-9);
    }

    #[test]
    fn root_shift_is_second_order(
        a in 0.0f64..1.0, g1 in 0.1f64..1.0, g2 in 0.1f64..1.0,
        c1 in -1.0f64..1.0, c2 in -1.0f64..1.0,
    ) {
        let r = [a + g1 + g2, a + g1, a];
        let err = |d: f64| {
            let pred = root_shift_predict(r, c1 * d, c2 * d).unwrap();
            let exact = shifted_cubic_roots(r, c1 * d, c2 * d).unwrap();
            // exact roots really are roots of the shifted cubic
            for x in exact {
                let q = -(x - r[0]) * (x - r[1]) * (x - r[2]) + c1 * d * x + c2 * d;
                assert!(q.abs() < 1e-12);
            }
            pred.predicted.iter().zip(exact).map(|(p, e)| (p - e).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-4), err(1e-5));
        prop_assume!(e1 > 1e-13);
        let slope = (e1 / e2).log10();
        prop_assert!((slope - 2.0).abs() < 0.2, "{e1} {e2}");
    }

    #[test]
    fn lemma_shifts_move_norms_as_claimed(
        v3 in 0.05f64..1.0, g1 in 0.05f64..1.0, g2 in 0.05f64..1.0,
        scale in 1e-6f64..1.0, p_lo in 1.05f64..1.95, p_hi in 2.05f64..10.0,
    ) {
        let v = [v3 + g1 + g2, v3 + g2, v3];
        let g = g1.min(g2);
        let eps = 1e-3 * g * g * scale;
        let ps = lemma_p_shift(v, eps).unwrap();
        let qs = lemma_q_shift(v, eps).unwrap();
        for s in [&ps, &qs] {
            prop_assert!(s.sum_change().abs() < 1e-15);
        }
        for p in [p_lo, p_hi] {
            prop_assert!(ps.norm_change(p) > 0.0);
            // direct difference of powers agrees where it is resolvable
            let direct: f64 = ps.w.iter().zip(&ps.v).map(|(w, v)| w.powf(p) - v.powf(p)).sum();
            let size: f64 = ps.v.iter().map(|v| v.powf(p)).sum();
            prop_assert!((direct - ps.norm_change(p)).abs() < 1e-13 * size);
        }
        prop_assert!(qs.norm_change(p_lo) < 0.0);
        prop_assert!(qs.norm_change(p_hi) > 0.0);
    }

    #[test]
    fn boundary_columns_match_eigensolver(
        mu in 0.01f64..0.95, lambda in 0.01f64..0.99, theta in 0.0f64..FRAC_PI_2,
    ) {
        for (side, a) in [(Side::A0, 0.0), (Side::A1, 1.0)] {
            let closed = sorted_desc(boundary_eigenvalues(mu, lambda, theta, side).unwrap().to_vec());
            let m = delta_matrix(mu, lambda, &ReducedParams::new(theta, 0.0, a).unwrap()).unwrap();
            for (x, y) in closed.iter().zip(oracle_eigs(&m)) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unit_sine_closed_form(mu in 0.01f64..0.95, lambda in 0.01f64..0.99, a in 0.0f64..1.0) {
        let c = unit_block_matrix_check(mu, lambda, a).unwrap();
        let m = delta_matrix(mu, lambda, &ReducedParams::new(FRAC_PI_2, 0.0, a).unwrap()).unwrap();
        for (x, y) in c.closed_form.values().iter().zip(oracle_eigs(&m)) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn lemma_inputs_are_validated() {
    assert!(lemma_p_shift([0.3, 0.5, 0.1], 1e-6).is_err());
    assert!(lemma_p_shift([0.5, 0.3, 0.1], 1.0).is_err());
    assert!(identity_check_sums([0.5, 0.5, 0.1]).is_err());
}

#[test]
fn example_pairs_are_not_majorized() {
    for (mu, lambda) in [(0.5, 1.0 / 3.0), (0.25, 0.5)] {
        let (product, optimal) = example_pair(mu, lambda).unwrap();
        let rep = majorization_check(product.values(), optimal.values()).unwrap();
        assert!(!rep.majorized && rep.p_dominated);
        match rep.first_violation {
            Some(DominanceFailure::PartialSum { k, x_sum, y_sum }) => {
                let xs: f64 = product.values()[..k].iter().sum();
                let ys: f64 = optimal.values()[..k].iter().sum();
                assert!((xs - x_sum).abs() < 1e-15 && (ys - y_sum).abs() < 1e-15 && xs > ys);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn catalysis_control_and_reduced_spectra() {
    // a classic catalysis pair: no direct majorization, but a two-level
    // catalyst exists
    let x = [0.4, 0.4, 0.1, 0.1];
    let y = [0.5, 0.25, 0.25, 0.0];
    assert!(!majorization_check(&x, &y).unwrap().majorized);
    let rep = trumping_scan(&x, &y, 2).unwrap();
    let z = rep.catalyst.expect("catalyst on the lattice");
    let xz = sorted_desc(x.iter().flat_map(|a| z.iter().map(move |b| a * b)).collect());
    let yz = sorted_desc(y.iter().flat_map(|a| z.iter().map(move |b| a * b)).collect());
    let mut acc = (0.0, 0.0);
    for (a, b) in xz.iter().zip(&yz) {
        acc = (acc.0 + a, acc.1 + b);
        assert!(acc.0 <= acc.1 + 1e-12);
    }

    for (mu, lambda) in [(0.5, 1.0 / 3.0), (0.25, 0.5)] {
        let (product, optimal) = example_pair(mu, lambda).unwrap();
        let d = decoupled_eigenvalue(mu, lambda);
        let drop = |v: &[f64]| -> Vec<f64> {
            let mut v = v.to_vec();
            let i = v.iter().position(|x| (x - d).abs() < 1e-12).unwrap();
            v.remove(i);
            v
        };
        let rep = trumping_scan(&drop(product.values()), &drop(optimal.values()), 4).unwrap();
        assert!(rep.catalyst.is_none());
        assert!(rep.p_dominance.p_dominated);
    }
}

#[test]
fn small_scan_supports_every_claim() {
    let grid = ScanGrid {
        mus: vec![0.2, 0.6],
        lambdas: vec![0.3, 0.7],
        thetas: vec![0.3, 0.9, 1.4],
        phis: vec![0.0, 1.0],
        a_mods: vec![0.3, 0.8],
        orders: ["1.2", "1.7", "2", "4", "inf"]
            .iter()
            .map(|p| p.parse::<PurityOrder>().unwrap())
            .collect(),
        epsilon: 1e-8,
    };
    let a = perturb_eigen_scan(&grid, Exec::Sequential).unwrap();
    let b = perturb_eigen_scan(&grid, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    let s = summarize_scan(&a);
    assert!(s.reports > 0);
    assert_eq!(s.sign_agree, s.sign_reliable);
    assert!(s.first_failure.is_none());
    for t in &s.claims {
        assert_eq!(t.agreement(), 1.0, "{t:?}");
    }
}
