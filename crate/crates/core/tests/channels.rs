use corrchan::channels::{apply_channel_matrix, covariance_transport};
use corrchan::exec::cell_rng;
use corrchan::linalg::{CMatrix, C64};
use corrchan::optimize::input_for_reduced;
use corrchan::purity::{
    decoupled_eigenvalue, p_norm_spectrum, reduce_input, reduced_output_spectrum,
    renyi_spectrum, two_norm_sq_closed_form, unit_modulus_pair,
};
use corrchan::states::{pauli, random_pure, random_unitary2};
use corrchan::verify::random_density;
use corrchan::{
    apply_channel, beta0, output_spectrum, p_norm, ChannelParams, DensityMatrix4, MaxEntangled,
    PurityOrder, ReducedParams,
};
use proptest::prelude::*;
use rand::Rng;

/// Channel written out by hand: each qubit's Bloch vector shrinks by
/// `lambda`, then the result is mixed with `|beta><beta|`.
fn oracle_channel(mu: f64, lambda: f64, beta: &MaxEntangled, r: &CMatrix) -> CMatrix {
    let paulis: Vec<CMatrix> = (0..4).map(pauli).collect();
    let mut out = CMatrix::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let pij = paulis[i].kron(&paulis[j]);
            let coeff = pij.matmul(r).trace() * 0.25;
            let fi = if i == 0 { 1.0 } else { lambda };
            let fj = if j == 0 { 1.0 } else { lambda };
            out = &out + &pij.scale(coeff * (fi * fj));
        }
    }
    let b = beta.state().projector();
    &(&out * (1.0 - mu)) + &(&b * (mu * r.trace().re))
}

fn params(seed: u64) -> (ChannelParams, rand_chacha::ChaCha8Rng) {
    let mut rng = cell_rng(seed, 0);
    let mu: f64 = rng.random();
    let lambda: f64 = rng.random();
    let beta = MaxEntangled::new(random_unitary2(&mut rng)).unwrap();
    (ChannelParams::new(mu, lambda, beta).unwrap(), rng)
}

fn orders() -> Vec<PurityOrder> {
    ["1.5", "2", "3", "inf"].iter().map(|p| p.parse().unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_pauli_expansion(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let rho = random_density(&mut rng);
        let ours = apply_channel(&p, &rho);
        let want = oracle_channel(p.mu(), p.lambda(), p.beta(), rho.matrix());
        prop_assert!(ours.matrix().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn outputs_are_states(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let out = apply_channel(&p, &DensityMatrix4::pure(&random_pure(&mut rng)));
        prop_assert!(out.matrix().hermitian_deviation() < 1e-12);
        prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        prop_assert!(out.spectrum().min() >= -1e-10);
    }

    #[test]
    fn decoupled_eigenvalue_always_present(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let d = 0.25 * (1.0 - p.mu()) * (1.0 - p.lambda().powi(2));
        prop_assert!((decoupled_eigenvalue(p.mu(), p.lambda()) - d).abs() < 1e-15);
        let s = output_spectrum(&p, &random_pure(&mut rng));
        prop_assert!(s.values().iter().any(|x| (x - d).abs() < 1e-10));
    }

    #[test]
    fn norms_follow_local_unitaries(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let rho = random_density(&mut rng);
        let u = random_unitary2(&mut rng);
        let v = random_unitary2(&mut rng);
        let (moved, beta) = covariance_transport(&p, &u, &v, &rho).unwrap();
        let direct = apply_channel(&ChannelParams::new(p.mu(), p.lambda(), beta).unwrap(), &rho);
        for order in orders() {
            let a = p_norm(&moved, order).unwrap();
            let b = p_norm(&direct, order).unwrap();
            prop_assert!((a - b).abs() < 1e-9, "{order}: {a} vs {b}");
        }
    }

    #[test]
    fn singlet_is_uu_covariant(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let sp = ChannelParams::new(p.mu(), p.lambda(), MaxEntangled::new(pauli(2)).unwrap()).unwrap();
        let rho = random_density(&mut rng);
        let u = random_unitary2(&mut rng);
        let rotated = DensityMatrix4::new(rho.matrix().conjugate_by(&u.kron(&u))).unwrap();
        let a = apply_channel(&sp, &rotated).spectrum();
        let b = apply_channel(&sp, &rho).spectrum();
        prop_assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn reduced_form_reproduces_full_spectrum(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        let psi = random_pure(&mut rng);
        let rp = reduce_input(&psi, p.beta());
        let full = output_spectrum(&p, &psi);
        let reduced = reduced_output_spectrum(p.mu(), p.lambda(), &rp).unwrap();
        prop_assert!(full.max_abs_diff(&reduced) < 1e-10);
    }

    #[test]
    fn two_norm_closed_form(
        mu in 0.0f64..0.99, lambda in 0.01f64..0.99,
        theta in 0.0f64..std::f64::consts::FRAC_PI_2,
        phi in 0.0f64..std::f64::consts::TAU, a in 0.0f64..1.0,
    ) {
        let rp = ReducedParams::new(theta, phi, a).unwrap();
        let p = ChannelParams::with_beta0(mu, lambda).unwrap();
        let r = DensityMatrix4::pure(&input_for_reduced(&rp)).into_matrix();
        let out = apply_channel_matrix(&p, &r);
        let purity = out.matmul(&out).trace().re;
        let closed = two_norm_sq_closed_form(mu, lambda, &rp).unwrap();
        prop_assert!((purity - closed).abs() < 1e-12, "{purity} vs {closed}");
    }

    #[test]
    fn unit_modulus_block(
        mu in 0.0f64..0.99, lambda in 0.01f64..0.99,
        theta in 0.0f64..std::f64::consts::FRAC_PI_2, phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let rp = ReducedParams::new(theta, phi, 1.0).unwrap();
        let p = ChannelParams::with_beta0(mu, lambda).unwrap();
        let s = output_spectrum(&p, &input_for_reduced(&rp));
        let d = decoupled_eigenvalue(mu, lambda);
        let [hi, lo] = unit_modulus_pair(mu, lambda, theta, phi).unwrap();
        let mut want = vec![hi, lo, d, d];
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (x, y) in s.values().iter().zip(&want) {
            prop_assert!((x - y).abs() < 1e-10, "{:?} vs {want:?}", s.values());
        }
    }

    #[test]
    fn mixing_inputs_never_beats_the_purer_end(seed in any::<u64>(), t in 0.0f64..1.0) {
        let (p, mut rng) = params(seed);
        let r1 = random_density(&mut rng);
        let r2 = random_density(&mut rng);
        let mix = DensityMatrix4::new(&(r1.matrix() * t) + &(r2.matrix() * (1.0 - t))).unwrap();
        for order in orders() {
            let m = p_norm(&apply_channel(&p, &mix), order).unwrap();
            let e1 = p_norm(&apply_channel(&p, &r1), order).unwrap();
            let e2 = p_norm(&apply_channel(&p, &r2), order).unwrap();
            prop_assert!(m <= e1.max(e2) + 1e-9);
        }
    }

    #[test]
    fn renyi_decreases_in_p(seed in any::<u64>()) {
        let (p, mut rng) = params(seed);
        prop_assume!(p.mu() < 0.999 && p.lambda() < 0.999);
        let s = output_spectrum(&p, &random_pure(&mut rng));
        let grid = [1.1, 1.3, 1.7, 2.0, 2.5, 4.0, 8.0];
        let h: Vec<f64> = grid
            .iter()
            .map(|&q| renyi_spectrum(s.values(), PurityOrder::finite(q).unwrap()).unwrap())
            .collect();
        let inf = renyi_spectrum(s.values(), PurityOrder::Infinity).unwrap();
        prop_assert!(h.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(inf < h[h.len() - 1]);
        let vn = renyi_spectrum(s.values(), PurityOrder::VonNeumann).unwrap();
        prop_assert!(vn > h[0]);
    }
}

#[test]
fn extreme_parameters() {
    let psi = beta0();
    // full correlation replaces every input by |beta>
    let p = ChannelParams::with_beta0(1.0, 0.3).unwrap();
    let s = output_spectrum(&p, &random_pure(&mut cell_rng(1, 0)));
    assert!((s.max() - 1.0).abs() < 1e-12);
    // lambda = 1, mu = 0 is the identity channel
    let p = ChannelParams::with_beta0(0.0, 1.0).unwrap();
    let s = output_spectrum(&p, &psi);
    assert!((s.max() - 1.0).abs() < 1e-12);
    // lambda = 0, mu = 0 erases to the maximally mixed state
    let p = ChannelParams::with_beta0(0.0, 0.0).unwrap();
    let s = output_spectrum(&p, &psi);
    assert!(s.values().iter().all(|x| (x - 0.25).abs() < 1e-12));
    assert!((p_norm_spectrum(s.values(), PurityOrder::Finite(2.0)).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn rejects_bad_inputs() {
    assert!(ChannelParams::with_beta0(1.2, 0.5).is_err());
    assert!(ChannelParams::with_beta0(0.5, -0.4).is_err());
    assert!(ChannelParams::with_beta0(0.5, -0.3).is_ok());
    assert!(MaxEntangled::new(CMatrix::from_real([[1.0, 1.0], [0.0, 1.0]])).is_err());
    let not_psd = CMatrix::diag(&[1.5, -0.5, 0.0, 0.0]);
    assert!(DensityMatrix4::new(not_psd).is_err());
    let not_herm = CMatrix::from_fn(4, |i, j| if (i, j) == (0, 1) { C64::new(0.1, 0.0) } else if i == j { C64::new(0.25, 0.0) } else { C64::new(0.0, 0.0) });
    assert!(DensityMatrix4::new(not_herm).is_err());
}
