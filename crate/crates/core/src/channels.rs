//! The qubit depolarizing channel and the correlated two-qubit channel
//!
//! ```text
//! Phi(R) = (1 - mu) (Psi_l ⊗ Psi_l)(R) + mu Tr(R) |beta><beta|
//! ```
//!
//! where `Psi_l(g) = (1 - l) Tr(g) I/2 + l g` and `|beta>` is maximally
//! entangled.

use crate::error::{check_range, Error, Result};
use crate::linalg::{eig_hermitian, CMatrix, Spectrum, C64};
use crate::states::{MaxEntangled, PureState4};

pub const DENSITY_TOL: f64 = 1e-10;

/// Parameters of the correlated channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    mu: f64,
    lambda: f64,
    beta: MaxEntangled,
}

impl ChannelParams {
    /// Accepts `mu` in `[0, 1]` and `lambda` in `[-1/3, 1]`.
    pub fn new(mu: f64, lambda: f64, beta: MaxEntangled) -> Result<Self> {
        check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
        check_range("lambda", lambda, -1.0 / 3.0, 1.0, "[-1/3, 1]")?;
        Ok(Self { mu, lambda, beta })
    }

    pub fn with_beta0(mu: f64, lambda: f64) -> Result<Self> {
        Self::new(mu, lambda, MaxEntangled::beta0())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> &MaxEntangled {
        &self.beta
    }

    /// Range used by the optimization routines: `lambda` in `(0, 1)`,
    /// `mu` in `[0, 1)`.
    pub fn check_analysis_range(&self) -> Result<()> {
        check_open_lambda(self.lambda)?;
        check_range("mu", self.mu, 0.0, 1.0 - f64::EPSILON, "[0, 1)")
    }
}

pub(crate) fn check_open_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "lambda",
            value: lambda,
            range: "(0, 1)",
        })
    }
}

/// A 4×4 density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix4 {
    m: CMatrix,
}

impl DensityMatrix4 {
    /// Validates Hermiticity, unit trace and positivity within
    /// [`DENSITY_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::Dimension {
                expected: 4,
                got: m.dim(),
            });
        }
        let spec = eig_hermitian(&m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::Invalid(format!("trace {tr} differs from 1")));
        }
        if spec.min() < -DENSITY_TOL {
            return Err(Error::NegativeEigenvalue { value: spec.min() });
        }
        Ok(Self { m })
    }

    /// Skips validation; for matrices that are density matrices by
    /// construction (channel outputs).
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        debug_assert_eq!(m.dim(), 4);
        Self { m }
    }

    pub fn pure(psi: &PureState4) -> Self {
        Self {
            m: psi.projector(),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn spectrum(&self) -> Spectrum {
        eig_hermitian(&self.m).expect("density matrix is Hermitian")
    }
}

/// `Psi_lambda` on a 2×2 matrix.
pub fn depolarize(gamma: &CMatrix, lambda: f64) -> Result<CMatrix> {
    if gamma.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: gamma.dim(),
        });
    }
    check_range("lambda", lambda, -1.0 / 3.0, 1.0, "[-1/3, 1]")?;
    let tr = gamma.trace();
    Ok(CMatrix::from_fn(2, |i, j| {
        let mixed = if i == j { tr * (0.5 * (1.0 - lambda)) } else { C64::new(0.0, 0.0) };
        mixed + gamma[(i, j)] * lambda
    }))
}

/// `(Psi_lambda ⊗ Psi_lambda)(R)` for any 4×4 `R`.
pub fn depolarize_pair(r: &CMatrix, lambda: f64) -> CMatrix {
    assert_eq!(r.dim(), 4, "depolarize_pair expects a 4x4 matrix");
    // index (i, j) with i = 2 i1 + i2; act on qubit 1 then qubit 2
    let idx = |a: usize, b: usize| 2 * a + b;
    let w = 0.5 * (1.0 - lambda);
    let mut first = CMatrix::zeros(4);
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    let mut v = r[(idx(i1, i2), idx(j1, j2))] * lambda;
                    if i1 == j1 {
                        let t = r[(idx(0, i2), idx(0, j2))] + r[(idx(1, i2), idx(1, j2))];
                        v += t * w;
                    }
                    first[(idx(i1, i2), idx(j1, j2))] = v;
                }
            }
        }
    }
    let mut out = CMatrix::zeros(4);
    for i1 in 0..2 {
        for i2 in 0..2 {
            for j1 in 0..2 {
                for j2 in 0..2 {
                    let mut v = first[(idx(i1, i2), idx(j1, j2))] * lambda;
                    if i2 == j2 {
                        let t = first[(idx(i1, 0), idx(j1, 0))] + first[(idx(i1, 1), idx(j1, 1))];
                        v += t * w;
                    }
                    out[(idx(i1, i2), idx(j1, j2))] = v;
                }
            }
        }
    }
    out
}

/// Action of the correlated channel on an arbitrary 4×4 matrix.
pub fn apply_channel_matrix(params: &ChannelParams, r: &CMatrix) -> CMatrix {
    let local = depolarize_pair(r, params.lambda);
    let shift = params.beta.state().projector().scale(r.trace() * params.mu);
    &(&local * (1.0 - params.mu)) + &shift
}

pub fn apply_channel(params: &ChannelParams, rho: &DensityMatrix4) -> DensityMatrix4 {
    DensityMatrix4::from_trusted(apply_channel_matrix(params, rho.matrix()))
}

/// Output spectrum for a pure input.
pub fn output_spectrum(params: &ChannelParams, psi: &PureState4) -> Spectrum {
    apply_channel(params, &DensityMatrix4::pure(psi)).spectrum()
}

/// Closed form of `(Psi_lambda ⊗ Psi_lambda)(|psi_theta><psi_theta|)`.
pub fn product_output_theta(lambda: f64, theta: f64) -> Result<DensityMatrix4> {
    check_range("theta", theta, 0.0, std::f64::consts::FRAC_PI_2, "[0, pi/2]")?;
    check_range("lambda", lambda, -1.0 / 3.0, 1.0, "[-1/3, 1]")?;
    let l2 = lambda * lambda;
    let (s, c) = theta.sin_cos();
    let corner = 2.0 * l2 * s;
    let m = CMatrix::from_real([
        [1.0 + l2 + 2.0 * lambda * c, 0.0, 0.0, corner],
        [0.0, 1.0 - l2, 0.0, 0.0],
        [0.0, 0.0, 1.0 - l2, 0.0],
        [corner, 0.0, 0.0, 1.0 + l2 - 2.0 * lambda * c],
    ]);
    Ok(DensityMatrix4::from_trusted(&m * 0.25))
}

/// Moves local unitaries through the channel.
///
/// Returns `Phi_beta'((u ⊗ v) rho (u ⊗ v)^dagger)`, where `beta'` is the
/// shift state of `params`, together with the shift state `beta` for which
/// that matrix equals `(u ⊗ v) Phi_beta(rho) (u ⊗ v)^dagger`. With
/// `beta' = (I ⊗ w)|beta_0>` this is `beta = (I ⊗ v^dagger w conj(u))|beta_0>`.
pub fn covariance_transport(
    params: &ChannelParams,
    u: &CMatrix,
    v: &CMatrix,
    rho: &DensityMatrix4,
) -> Result<(DensityMatrix4, MaxEntangled)> {
    for m in [u, v] {
        if m.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: m.dim(),
            });
        }
        m.check_unitary(MaxEntangled::UNITARY_TOL)?;
    }
    let uv = u.kron(v);
    let rotated = rho.matrix().conjugate_by(&uv);
    let out = apply_channel_matrix(params, &rotated);
    let w = params.beta.unitary();
    let beta = MaxEntangled::new(v.adjoint().matmul(w).matmul(&u.conj()))?;
    Ok((DensityMatrix4::from_trusted(out), beta))
}
