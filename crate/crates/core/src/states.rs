//! Two-qubit pure states: the Bell basis, the vector/matrix correspondence
//! `|psi> = (I ⊗ A)|beta_0>` with `A = sum_k a_k sigma_k`, the Schmidt
//! canonical form `|psi_theta>`, and entanglement measures.
//!
//! Amplitudes are stored in the computational basis `|00>, |01>, |10>, |11>`
//! with the first qubit as the most significant index.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, svd2, CMatrix, C64, I, ONE, ZERO};

/// Normalization tolerance for pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Schmidt angles below this are reported as product states.
pub const PRODUCT_THETA_TOL: f64 = 1e-8;

/// Pauli matrix `sigma_k`, with `sigma_0 = I`.
pub fn pauli(k: usize) -> CMatrix {
    match k {
        0 => CMatrix::identity(2),
        1 => CMatrix::from_real([[0.0, 1.0], [1.0, 0.0]]),
        2 => CMatrix::from_rows([[ZERO, -I], [I, ZERO]]),
        3 => CMatrix::from_real([[1.0, 0.0], [0.0, -1.0]]),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// Normalized vector in C^4.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureState4 {
    amps: [C64; 4],
}

impl PureState4 {
    /// Accepts amplitudes already normalized within [`NORM_TOL`].
    pub fn new(amps: [C64; 4]) -> Result<Self> {
        check_finite(&amps)?;
        let dev = (norm(&amps) - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(Self { amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amps: [C64; 4]) -> Result<Self> {
        check_finite(&amps)?;
        let n = norm(&amps);
        if n == 0.0 {
            return Err(Error::Invalid("zero vector cannot be normalized".into()));
        }
        Ok(Self {
            amps: amps.map(|a| a / n),
        })
    }

    pub fn amplitudes(&self) -> &[C64; 4] {
        &self.amps
    }

    /// `|00>`.
    pub fn product00() -> Self {
        Self {
            amps: [ONE, ZERO, ZERO, ZERO],
        }
    }

    pub fn inner(&self, other: &PureState4) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::outer(&self.amps)
    }

    /// `(u ⊗ v)|psi>`.
    pub fn apply_local(&self, u: &CMatrix, v: &CMatrix) -> PureState4 {
        self.apply(&u.kron(v))
    }

    /// `w|psi>` for a 4×4 unitary `w`; the result is renormalized to absorb
    /// rounding.
    pub fn apply(&self, w: &CMatrix) -> PureState4 {
        let out = w.mul_vec(&self.amps);
        let amps = [out[0], out[1], out[2], out[3]];
        let n = norm(&amps);
        Self {
            amps: amps.map(|a| a / n),
        }
    }

    /// Global phase fixed so that the largest-magnitude amplitude (first one
    /// on ties) is real and positive.
    pub fn canonical_phase(&self) -> PureState4 {
        let mut best = 0;
        for k in 1..4 {
            if self.amps[k].norm() > self.amps[best].norm() + 1e-15 {
                best = k;
            }
        }
        let a = self.amps[best];
        let ph = a.conj() / a.norm();
        Self {
            amps: self.amps.map(|z| z * ph),
        }
    }

    /// Distance between the two rays, `max_k |psi_k - phi_k|` after phase
    /// canonicalization.
    pub fn distance_up_to_phase(&self, other: &PureState4) -> f64 {
        let a = self.canonical_phase();
        let b = other.canonical_phase();
        a.amps
            .iter()
            .zip(&b.amps)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Reduced density matrix of the second qubit (trace over the first).
    pub fn reduced_density(&self) -> CMatrix {
        let m = self.coefficient_matrix();
        // rho_B = M^T conj(M) with M[i][j] = <ij|psi>
        m.transpose().matmul(&m.conj())
    }

    /// The 2×2 matrix `M[i][j] = <ij|psi>`.
    pub fn coefficient_matrix(&self) -> CMatrix {
        let a = &self.amps;
        CMatrix::from_rows([[a[0], a[1]], [a[2], a[3]]])
    }
}

fn norm(a: &[C64; 4]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_finite(a: &[C64; 4]) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "amplitude" })
    }
}

/// Bell state `|beta_k> = (I ⊗ sigma_k)|beta_0>`.
pub fn bell_state(k: usize) -> Result<PureState4> {
    if k > 3 {
        return Err(Error::Invalid(format!("Bell index {k} not in 0..=3")));
    }
    let beta0 = beta0();
    Ok(PureState4 {
        amps: apply_right(&pauli(k), &beta0.amps),
    })
}

/// `(|00> + |11>)/sqrt 2`.
pub fn beta0() -> PureState4 {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    PureState4 {
        amps: [h, ZERO, ZERO, h],
    }
}

fn apply_right(a: &CMatrix, v: &[C64; 4]) -> [C64; 4] {
    let w = CMatrix::identity(2).kron(a).mul_vec(v);
    [w[0], w[1], w[2], w[3]]
}

/// Coefficients of a state in the Bell basis, `|psi> = sum_k a_k |beta_k>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCoeffs {
    pub a: [C64; 4],
}

impl PauliCoeffs {
    pub fn new(a: [C64; 4]) -> Result<Self> {
        check_finite(&a)?;
        let dev = (norm(&a) - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized { deviation: dev });
        }
        Ok(Self { a })
    }

    /// `A = sum_k a_k sigma_k`.
    pub fn matrix(&self) -> CMatrix {
        (0..4).fold(CMatrix::zeros(2), |acc, k| &acc + &pauli(k).scale(self.a[k]))
    }

    /// Inverse of [`PauliCoeffs::matrix`]: `a_k = Tr(sigma_k A) / 2`.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: m.dim(),
            });
        }
        let a = [0, 1, 2, 3].map(|k| pauli(k).matmul(m).trace() * 0.5);
        Self::new(a)
    }
}

pub fn to_pauli(psi: &PureState4) -> PauliCoeffs {
    let a = [0, 1, 2, 3].map(|k| {
        bell_state(k)
            .expect("index in range")
            .inner(psi)
    });
    PauliCoeffs { a }
}

pub fn from_pauli(c: &PauliCoeffs) -> PureState4 {
    let mut amps = [ZERO; 4];
    for k in 0..4 {
        let b = bell_state(k).expect("index in range");
        for (x, y) in amps.iter_mut().zip(b.amplitudes()) {
            *x += c.a[k] * y;
        }
    }
    PureState4 { amps }
}

/// `(I ⊗ A)|beta_0>` for a 2×2 matrix with `Tr(A^dagger A)/2 = 1`.
pub fn state_from_matrix(a: &CMatrix) -> Result<PureState4> {
    if a.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: a.dim(),
        });
    }
    PureState4::new(apply_right(a, &beta0().amps))
}

/// `(A^T ⊗ I)|beta_0>`; equal to [`state_from_matrix`] for every `A`.
pub fn state_from_matrix_left(a: &CMatrix) -> Result<PureState4> {
    let w = a.transpose().kron(&CMatrix::identity(2)).mul_vec(&beta0().amps);
    PureState4::new([w[0], w[1], w[2], w[3]])
}

/// The canonical state of Schmidt angle `theta`:
/// `((c+s)|beta_0> + (c-s)|beta_3>)/sqrt 2` with `c, s = cos, sin(theta/2)`,
/// i.e. `cos(theta/2)|00> + sin(theta/2)|11>`.
pub fn psi_theta(theta: f64) -> PureState4 {
    let (s, c) = (theta / 2.0).sin_cos();
    PureState4 {
        amps: [C64::new(c, 0.0), ZERO, ZERO, C64::new(s, 0.0)],
    }
}

/// Local unitaries bringing a state to canonical form:
/// `(u ⊗ v)|psi> = |psi_theta>` with `theta` in `[0, pi/2]`.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub theta: f64,
    pub u: CMatrix,
    pub v: CMatrix,
}

impl SchmidtForm {
    pub fn is_product(&self) -> bool {
        self.theta < PRODUCT_THETA_TOL
    }
}

pub fn schmidt_canonicalize(psi: &PureState4) -> SchmidtForm {
    let a = to_pauli(psi).matrix();
    let svd = svd2(&a).expect("2x2 Gram matrix is Hermitian");
    let [d1, d2] = svd.singular_values();
    // d1 = sqrt2 cos(theta/2), d2 = sqrt2 sin(theta/2)
    let theta = (2.0 * d2.atan2(d1)).clamp(0.0, FRAC_PI_2);
    SchmidtForm {
        theta,
        u: svd.u,
        v: svd.v,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementKind {
    VonNeumann,
    Linear,
}

/// `h(x)` in nats, with `0 ln 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let f = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.ln() };
    f((1.0 + x) / 2.0) + f((1.0 - x) / 2.0)
}

pub fn entanglement(psi: &PureState4, kind: EntanglementKind) -> f64 {
    let gamma = psi.reduced_density();
    match kind {
        EntanglementKind::Linear => {
            let purity = gamma.matmul(&gamma).trace().re;
            (2.0 * (1.0 - purity)).max(0.0)
        }
        EntanglementKind::VonNeumann => {
            let spec = eig_hermitian(&gamma).expect("reduced density matrix is Hermitian");
            spec.values()
                .iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| -x * x.ln())
                .sum()
        }
    }
}

/// Entanglement of the canonical state `|psi_theta>` in closed form.
pub fn entanglement_of_theta(theta: f64, kind: EntanglementKind) -> f64 {
    match kind {
        EntanglementKind::Linear => theta.sin().powi(2),
        EntanglementKind::VonNeumann => binary_entropy(theta.cos()),
    }
}

/// Haar-random pure state from eight independent standard normals.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> PureState4 {
    let mut amps = [ZERO; 4];
    for a in amps.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *a = C64::new(re, im);
    }
    let n = norm(&amps);
    PureState4 {
        amps: amps.map(|a| a / n),
    }
}

/// Haar-random 2×2 unitary (QR of a complex Gaussian matrix with phases
/// fixed).
pub fn random_unitary2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let mut g = [ZERO; 4];
    for z in g.iter_mut() {
        *z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    // Gram-Schmidt on columns
    let c1 = [g[0], g[2]];
    let n1 = (c1[0].norm_sqr() + c1[1].norm_sqr()).sqrt();
    let e1 = [c1[0] / n1, c1[1] / n1];
    let c2 = [g[1], g[3]];
    let proj = e1[0].conj() * c2[0] + e1[1].conj() * c2[1];
    let r2 = [c2[0] - e1[0] * proj, c2[1] - e1[1] * proj];
    let n2 = (r2[0].norm_sqr() + r2[1].norm_sqr()).sqrt();
    let e2 = [r2[0] / n2, r2[1] / n2];
    CMatrix::from_rows([[e1[0], e2[0]], [e1[1], e2[1]]])
}

/// A maximally entangled state stored as the unitary `u` with
/// `|beta> = (I ⊗ u)|beta_0>`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxEntangled {
    u: CMatrix,
}

impl MaxEntangled {
    pub const UNITARY_TOL: f64 = 1e-12;

    pub fn new(u: CMatrix) -> Result<Self> {
        if u.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: u.dim(),
            });
        }
        u.check_unitary(Self::UNITARY_TOL)?;
        Ok(Self { u })
    }

    pub fn beta0() -> Self {
        Self {
            u: CMatrix::identity(2),
        }
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.u
    }

    pub fn state(&self) -> PureState4 {
        PureState4 {
            amps: apply_right(&self.u, &beta0().amps),
        }
    }

    /// Whether this is `|beta_0>` up to a global phase.
    pub fn is_beta0(&self, tol: f64) -> bool {
        self.state().distance_up_to_phase(&beta0()) <= tol
    }

    /// The pair `(a, b)` with `u = e^{i chi} [[a, conj b], [-b, conj a]]`,
    /// `|a|^2 + |b|^2 = 1`. The overall sign of `(a, b)` is not fixed.
    pub fn su2_entries(&self) -> (C64, C64) {
        let u = &self.u;
        let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
        // e^{-i chi} with e^{2 i chi} = det
        let half = C64::from_polar(1.0, -det.arg() / 2.0);
        (u[(0, 0)] * half, -u[(1, 0)] * half)
    }
}

pub fn max_entangled_from_unitary(u: &CMatrix) -> Result<PureState4> {
    MaxEntangled::new(u.clone()).map(|b| b.state())
}
