use std::f64::consts::FRAC_PI_2;

use corrchan::exec::cell_rng;
use corrchan::optimize::{
    classify, fig1, fig3, sweep, Cells, Source, SweepSpec, TrivialCase,
};
use corrchan::purity::p_norm_spectrum;
use corrchan::states::{psi_theta, random_pure, random_unitary2};
use corrchan::linalg::CMatrix;
use corrchan::{
    beta0, conjectured_optimum, mu_critical, numeric_optimize, output_spectrum, theta_optimal,
    two_norm_optimum, Budget, ChannelParams, Exec, MaxEntangled, PurityOrder, Regime,
};
use proptest::prelude::*;

fn two_norm_of(mu: f64, lambda: f64, psi: &corrchan::PureState4) -> f64 {
    let s = output_spectrum(&ChannelParams::with_beta0(mu, lambda).unwrap(), psi);
    s.values().iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_value_is_the_witness_value(mu in 0.01f64..0.99, lambda in 0.01f64..0.99) {
        let opt = two_norm_optimum(mu, lambda).unwrap();
        prop_assert!((two_norm_of(mu, lambda, &opt.witness) - opt.value).abs() < 1e-12);
        // sin(theta_opt) formula, capped at 1
        let l2 = lambda * lambda;
        let s = (mu / ((1.0 - mu) * (1.0 - l2))).min(1.0);
        prop_assert!((opt.theta_opt.sin() - s).abs() < 1e-12);
    }

    #[test]
    fn no_theta_beats_the_optimum(mu in 0.01f64..0.99, lambda in 0.01f64..0.99) {
        let opt = two_norm_optimum(mu, lambda).unwrap();
        for k in 0..=64 {
            let theta = k as f64 * FRAC_PI_2 / 64.0;
            prop_assert!(two_norm_of(mu, lambda, &psi_theta(theta)) <= opt.value + 1e-12);
        }
    }

    #[test]
    fn witness_family_keeps_the_spectrum(
        mu in 0.01f64..0.99, lambda in 0.01f64..0.99, seed in any::<u64>()
    ) {
        let opt = two_norm_optimum(mu, lambda).unwrap();
        let v = random_unitary2(&mut cell_rng(seed, 0));
        let p = ChannelParams::with_beta0(mu, lambda).unwrap();
        let moved = opt.witness.apply_local(&v.transpose(), &v.adjoint());
        prop_assert!(output_spectrum(&p, &moved).max_abs_diff(&opt.spectrum) < 1e-10);
    }

    #[test]
    fn maximally_entangled_input_loses_below_threshold(
        lambda in 0.05f64..0.95, frac in 0.05f64..0.95, p in 1.01f64..2.0
    ) {
        let mu = frac * mu_critical(lambda).unwrap();
        let order = PurityOrder::finite(p).unwrap();
        let opt = conjectured_optimum(mu, lambda, order).unwrap();
        let s = output_spectrum(&ChannelParams::with_beta0(mu, lambda).unwrap(), &beta0());
        let b = p_norm_spectrum(s.values(), order).unwrap();
        prop_assert!(opt.value > b, "{} vs {b}", opt.value);
    }

    #[test]
    fn optimum_does_not_depend_on_beta(
        mu in 0.01f64..0.99, lambda in 0.01f64..0.99, seed in any::<u64>()
    ) {
        let mut rng = cell_rng(seed, 1);
        let w = random_unitary2(&mut rng);
        let beta = MaxEntangled::new(w.clone()).unwrap();
        let p = ChannelParams::new(mu, lambda, beta).unwrap();
        let opt = two_norm_optimum(mu, lambda).unwrap();
        let moved = opt.witness.apply_local(&CMatrix::identity(2), &w);
        let s = output_spectrum(&p, &moved);
        prop_assert!(s.max_abs_diff(&opt.spectrum) < 1e-10);
        for _ in 0..50 {
            let r = output_spectrum(&p, &random_pure(&mut rng));
            let n = r.values().iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!(n <= opt.value + 1e-9);
        }
    }
}

#[test]
fn conjugate_family_is_not_invariant() {
    // V^T ⊗ V moves the spectrum for generic V
    let (mu, lambda) = (0.2, 0.6);
    let opt = two_norm_optimum(mu, lambda).unwrap();
    let p = ChannelParams::with_beta0(mu, lambda).unwrap();
    let worst = (0..20)
        .map(|i| {
            let v = random_unitary2(&mut cell_rng(5, i));
            let moved = opt.witness.apply_local(&v.transpose(), &v);
            output_spectrum(&p, &moved).max_abs_diff(&opt.spectrum)
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn continuous_across_threshold() {
    for lambda in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let mc = mu_critical(lambda).unwrap();
        let (lo, hi) = (mc - 1e-10, mc + 1e-10);
        assert!(matches!(classify(lo, lambda).unwrap(), Regime::BelowThreshold));
        assert!(matches!(classify(hi, lambda).unwrap(), Regime::AtOrAbove));
        let (tl, th) = (theta_optimal(lo, lambda).unwrap(), theta_optimal(hi, lambda).unwrap());
        assert!((tl.sin() - th.sin()).abs() < 1e-8);
        let t = (tl - th).abs();
        // sin is flat at pi/2, so theta moves like the square root of the step
        assert!(t < 1e-4, "{t}");
        let v = (two_norm_optimum(lo, lambda).unwrap().value
            - two_norm_optimum(hi, lambda).unwrap().value)
            .abs();
        assert!(v < 1e-8, "{v}");
    }
}

#[test]
fn trivial_regimes() {
    assert!(matches!(classify(0.0, 0.5).unwrap(), Regime::Trivial(TrivialCase::NoCorrelation)));
    assert!(matches!(classify(1.0, 0.5).unwrap(), Regime::Trivial(TrivialCase::FullCorrelation)));
    assert!(matches!(classify(0.5, 0.0).unwrap(), Regime::Trivial(TrivialCase::Erasing)));
    assert!(matches!(classify(0.5, 1.0).unwrap(), Regime::Trivial(TrivialCase::Noiseless)));
    // product input through two independent depolarizers
    let o = two_norm_optimum(0.0, 0.5).unwrap();
    assert!((o.value - 0.5 * (1.0 + 0.25)).abs() < 1e-12);
    assert_eq!(o.theta_opt, 0.0);
    assert!((two_norm_optimum(1.0, 0.5).unwrap().value - 1.0).abs() < 1e-12);
    assert!(mu_critical(0.0).is_err() && mu_critical(1.0).is_err());
}

#[test]
fn numeric_finds_maximal_entanglement_above_threshold() {
    let o = numeric_optimize(0.5, 1.0 / 3.0, PurityOrder::Finite(3.0), &Budget::default(), 1).unwrap();
    let rp = o.reduced.expect("polished optimum carries reduced coordinates");
    assert!((rp.a_mod - 1.0).abs() < 1e-4, "{rp:?}");
    assert!((rp.theta.sin() - 1.0).abs() < 1e-6, "{rp:?}");
    let conj = conjectured_optimum(0.5, 1.0 / 3.0, PurityOrder::Finite(3.0)).unwrap();
    assert!((o.value - conj.value).abs() < 1e-9);
}

#[test]
fn numeric_finds_product_input_without_correlation() {
    let o = numeric_optimize(0.0, 0.6, PurityOrder::Finite(2.0), &Budget::default(), 2).unwrap();
    assert!(o.theta_opt < 1e-4, "{}", o.theta_opt);
}

#[test]
fn numeric_matches_conjecture_at_other_orders() {
    for (mu, lambda) in [(0.1, 0.5), (0.3, 0.7), (0.6, 0.4)] {
        for p in ["1.5", "3", "inf"] {
            let order: PurityOrder = p.parse().unwrap();
            let conj = conjectured_optimum(mu, lambda, order).unwrap();
            let num = numeric_optimize(mu, lambda, order, &Budget::default(), 3).unwrap();
            assert!(num.value <= conj.value + 1e-9, "{mu} {lambda} {p}");
            assert!(num.value >= conj.value - 1e-6, "{mu} {lambda} {p}: {} vs {}", num.value, conj.value);
        }
    }
}

#[test]
fn figure_rows() {
    let mus = [0.0, 0.25, 0.5, 1.0];
    let lambdas = [0.0, 0.5, 1.0];
    let rows = fig1(&mus, &lambdas, Exec::Sequential).unwrap();
    assert_eq!(rows.len(), 12);
    assert_eq!((rows[1].mu, rows[1].lambda), (0.0, 0.5));
    assert!(rows.iter().all(|r| r.p2_norm > 0.0 && r.p2_norm <= 1.0 + 1e-12));
    assert!(rows.iter().all(|r| r.p2_norm >= 0.5 - 1e-12));

    let orders: Vec<PurityOrder> = ["2", "inf"].iter().map(|p| p.parse().unwrap()).collect();
    let a = fig3(0.25, 0.5, &orders, 30, 9, Exec::Sequential).unwrap();
    let b = fig3(0.25, 0.5, &orders, 30, 9, Exec::Parallel).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2 * 31);
    assert_eq!(a[0].source, Source::Conjectured);
    assert_eq!(a.iter().filter(|r| r.source == Source::Conjectured).count(), 2);
}

#[test]
fn sweep_is_deterministic_and_clean() {
    let spec = SweepSpec {
        cells: Cells::Grid { mus: vec![0.1, 0.4, 0.8], lambdas: vec![0.2, 0.9] },
        orders: ["1.1", "2", "inf"].iter().map(|p| p.parse().unwrap()).collect(),
        trials: 40,
        lattice: Some([5, 3, 5]),
        seed: 17,
    };
    let a = sweep(&spec, Exec::Sequential).unwrap();
    let b = sweep(&spec, Exec::Parallel).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 18);
    assert!(a.violations.is_empty());
    assert!(a.rows.iter().all(|r| r.gap <= 1e-9 && !r.violation_flag));

    let bad = SweepSpec { trials: 0, lattice: None, ..spec };
    assert!(sweep(&bad, Exec::Sequential).is_err());
}
