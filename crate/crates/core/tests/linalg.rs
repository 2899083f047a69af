use corrchan::linalg::{cubic_roots, eig_hermitian, svd2, CMatrix, C64};
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn entries(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
}

fn hermitian(n: usize, e: &[(f64, f64)]) -> CMatrix {
    let raw = CMatrix::from_fn(n, |i, j| C64::new(e[i * n + j].0, e[i * n + j].1));
    &raw + &raw.adjoint()
}

fn to_na(m: &CMatrix) -> DMatrix<Complex<f64>> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

fn from_na(m: &DMatrix<Complex<f64>>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

fn oracle_eigs(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(to_na(m)).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

/// Unitary Q factor of a random complex matrix.
fn unitary(n: usize, e: &[(f64, f64)]) -> CMatrix {
    let g = DMatrix::from_fn(n, n, |i, j| Complex::new(e[i * n + j].0, e[i * n + j].1));
    from_na(&g.qr().q())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigenvalues_match_nalgebra(n in 1usize..=4, e in entries(4)) {
        let m = hermitian(n, &e);
        let ours = eig_hermitian(&m).unwrap();
        for (x, y) in ours.values().iter().zip(oracle_eigs(&m)) {
            prop_assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn trace_equals_eigenvalue_sum(e in entries(4)) {
        let m = hermitian(4, &e);
        let s = eig_hermitian(&m).unwrap();
        prop_assert!((m.trace().re - s.sum()).abs() < 1e-10);
    }

    #[test]
    fn spectrum_is_unitarily_invariant(e in entries(4), w in entries(4)) {
        let m = hermitian(4, &e);
        let u = unitary(4, &w);
        prop_assume!(u.unitary_deviation() < 1e-10);
        let a = eig_hermitian(&m).unwrap();
        let b = eig_hermitian(&m.conjugate_by(&u)).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
    }

    #[test]
    fn svd2_reconstructs(e in entries(2)) {
        let a = CMatrix::from_fn(2, |i, j| C64::new(e[i * 2 + j].0, e[i * 2 + j].1));
        let s = svd2(&a).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&a) < 1e-10);
        prop_assert!(s.u.unitary_deviation() < 1e-10 && s.v.unitary_deviation() < 1e-10);
        let [d1, d2] = s.singular_values();
        prop_assert!(d1 >= d2 && d2 >= 0.0);
        // d is what v a u^T gives
        let d = s.v.matmul(&a).matmul(&s.u.transpose());
        prop_assert!(d.max_abs_diff(&s.d) < 1e-10);
    }

    #[test]
    fn cubic_roots_match_eigenvalues(e in entries(3)) {
        let m = hermitian(3, &e);
        // det(x I - m) = x^3 - tr x^2 + c1 x - det
        let tr = m.trace().re;
        let m2 = m.matmul(&m).trace().re;
        let c1 = 0.5 * (tr * tr - m2);
        let det = to_na(&m).determinant().re;
        let roots = cubic_roots(1.0, -tr, c1, -det).unwrap();
        let eig = oracle_eigs(&m);
        prop_assume!(eig[0] - eig[2] > 1e-6);
        for (r, x) in roots.iter().zip(&eig) {
            prop_assert!((r - x).abs() < 1e-8, "{roots:?} vs {eig:?}");
        }
    }
}

#[test]
fn degenerate_and_diagonal_spectra() {
    let m = CMatrix::diag(&[0.25, 0.25, 0.25, 0.25]);
    assert!(eig_hermitian(&m).unwrap().values().iter().all(|x| (x - 0.25).abs() < 1e-15));
    let r = cubic_roots(1.0, -3.0, 3.0, -1.0).unwrap();
    assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-5), "{r:?}");
}

#[test]
fn rejects_non_hermitian() {
    let m = CMatrix::from_real([[1.0, 2.0], [0.0, 1.0]]);
    assert!(eig_hermitian(&m).is_err());
}
