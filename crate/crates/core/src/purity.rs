//! Output purity functionals and the reduced form of the channel output.
//!
//! For a canonical input `|psi_theta>` and shift state
//! `|beta> = (I ⊗ W)|beta_0>` with `W ∝ [[a, conj b], [-b, conj a]]`, the
//! output is unitarily equivalent to a 4×4 matrix depending only on
//! `theta`, `|a|` and the phase `phi = 2 arg a`. One eigenvalue,
//! `(1-mu)(1-lambda^2)/4`, always decouples; the rest is the spectrum of the
//! 3×3 operator `Delta` scaled by `(1-mu)/4`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{check_open_lambda, DensityMatrix4};
use crate::error::{check_range, Error, Result};
use crate::linalg::{cubic_roots, eig_hermitian, CMatrix, Spectrum, C64};
use crate::states::{schmidt_canonicalize, MaxEntangled, PureState4};

/// Spectra entries in `[-CLIP_TOL, 0)` are treated as zero.
pub const CLIP_TOL: f64 = 1e-10;

/// Order of a purity functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PurityOrder {
    /// Schatten `p`-norm with `p > 1`.
    Finite(f64),
    /// Operator norm (largest eigenvalue).
    Infinity,
    /// The `p -> 1` limit: von Neumann entropy.
    VonNeumann,
}

impl PurityOrder {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p > 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidOrder(p))
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            Self::Finite(p) => Self::finite(p),
            other => Ok(other),
        }
    }
}

impl fmt::Display for PurityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => f.write_str("inf"),
            Self::VonNeumann => f.write_str("entropy"),
        }
    }
}

impl FromStr for PurityOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            "entropy" | "vn" | "von_neumann" | "1" => Ok(Self::VonNeumann),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Invalid(format!("cannot parse order '{s}'")))?;
                Self::finite(p)
            }
        }
    }
}

impl Serialize for PurityOrder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PurityOrder {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => PurityOrder::finite(p).map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Clips tiny negative eigenvalues to zero; rejects anything below
/// `-CLIP_TOL`.
pub fn clip_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    values
        .iter()
        .map(|&x| {
            if x >= 0.0 {
                Ok(x)
            } else if x >= -CLIP_TOL {
                Ok(0.0)
            } else {
                Err(Error::NegativeEigenvalue { value: x })
            }
        })
        .collect()
}

/// `(sum x^p)^(1/p)` over a nonnegative spectrum. The entropy order returns
/// the 1-norm.
pub fn p_norm_spectrum(values: &[f64], order: PurityOrder) -> Result<f64> {
    let x = clip_spectrum(values)?;
    let top = x.iter().copied().fold(0.0, f64::max);
    Ok(match order.validate()? {
        PurityOrder::Infinity => top,
        PurityOrder::VonNeumann => x.iter().sum(),
        PurityOrder::Finite(p) => {
            if top == 0.0 {
                return Ok(0.0);
            }
            let s: f64 = x.iter().map(|&v| (v / top).powf(p)).sum();
            top * s.powf(1.0 / p)
        }
    })
}

/// Rényi entropy `ln(sum x^p) / (1 - p)` (natural log); von Neumann for the
/// entropy order and `-ln max x` for `p = inf`.
pub fn renyi_spectrum(values: &[f64], order: PurityOrder) -> Result<f64> {
    let x = clip_spectrum(values)?;
    let top = x.iter().copied().fold(0.0, f64::max);
    Ok(match order.validate()? {
        PurityOrder::Infinity => -top.ln(),
        PurityOrder::VonNeumann => x
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -v * v.ln())
            .sum(),
        PurityOrder::Finite(p) => {
            let s: f64 = x.iter().map(|&v| (v / top).powf(p)).sum();
            (p * top.ln() + s.ln()) / (1.0 - p)
        }
    })
}

/// Figure of merit where larger means purer: the `p`-norm for finite and
/// infinite `p`, minus the von Neumann entropy for the entropy order.
pub fn purity_score(values: &[f64], order: PurityOrder) -> Result<f64> {
    match order {
        PurityOrder::VonNeumann => renyi_spectrum(values, order).map(|s| -s),
        _ => p_norm_spectrum(values, order),
    }
}

pub fn p_norm(rho: &DensityMatrix4, order: PurityOrder) -> Result<f64> {
    p_norm_spectrum(rho.spectrum().values(), order)
}

pub fn renyi_entropy(rho: &DensityMatrix4, order: PurityOrder) -> Result<f64> {
    renyi_spectrum(rho.spectrum().values(), order)
}

/// The three real variables left after the local-unitary reduction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    /// Schmidt angle in `[0, pi/2]`.
    pub theta: f64,
    /// Phase entering `cos phi`, `sin phi`; equals `2 arg a`.
    pub phi: f64,
    /// Modulus `|a|` in `[0, 1]`.
    pub a_mod: f64,
}

impl ReducedParams {
    pub fn new(theta: f64, phi: f64, a_mod: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, FRAC_PI_2, "[0, pi/2]")?;
        check_range("a_mod", a_mod, 0.0, 1.0, "[0, 1]")?;
        if !phi.is_finite() {
            return Err(Error::NonFinite { what: "phi" });
        }
        Ok(Self { theta, phi, a_mod })
    }
}

/// Derived shorthands: `S = 2 lambda sin theta`, `C = 2 lambda cos theta`,
/// `M = 4 mu / (1 - mu)`.
#[derive(Clone, Copy, Debug)]
pub struct ReducedTerms {
    pub lambda: f64,
    pub s: f64,
    pub c: f64,
    pub m: f64,
    pub cos_phi: f64,
    pub sin_phi: f64,
    pub a2: f64,
}

impl ReducedTerms {
    pub fn new(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<Self> {
        check_range("mu", mu, 0.0, 1.0 - f64::EPSILON, "[0, 1)")?;
        check_open_lambda(lambda)?;
        let rp = ReducedParams::new(rp.theta, rp.phi, rp.a_mod)?;
        Ok(Self::unchecked(mu, lambda, &rp))
    }

    pub(crate) fn unchecked(mu: f64, lambda: f64, rp: &ReducedParams) -> Self {
        let (st, ct) = rp.theta.sin_cos();
        let (sp, cp) = rp.phi.sin_cos();
        Self {
            lambda,
            s: 2.0 * lambda * st,
            c: 2.0 * lambda * ct,
            m: m_mu(mu),
            cos_phi: cp,
            sin_phi: sp,
            a2: rp.a_mod * rp.a_mod,
        }
    }

    fn coupling(&self) -> f64 {
        self.m * (self.a2 * (1.0 - self.a2)).max(0.0).sqrt()
    }

    /// `Delta - (1 + lambda^2) I`.
    fn shifted_delta(&self) -> CMatrix {
        let l = self.lambda;
        let ls = l * self.s;
        let r = self.coupling();
        let off = C64::new(self.c, self.sin_phi * ls);
        let z = C64::new(0.0, 0.0);
        CMatrix::from_rows([
            [C64::new(self.cos_phi * ls + self.m * self.a2, 0.0), off, C64::new(r, 0.0)],
            [off.conj(), C64::new(-self.cos_phi * ls, 0.0), z],
            [C64::new(r, 0.0), z, C64::new(-2.0 * l * l + self.m * (1.0 - self.a2), 0.0)],
        ])
    }

    pub fn delta(&self) -> CMatrix {
        let shift = 1.0 + self.lambda * self.lambda;
        &self.shifted_delta() + &(&CMatrix::identity(3) * shift)
    }
}

/// `4 mu / (1 - mu)`.
pub fn m_mu(mu: f64) -> f64 {
    4.0 * mu / (1.0 - mu)
}

/// The eigenvalue `(1 - mu)(1 - lambda^2)/4` present in every output.
pub fn decoupled_eigenvalue(mu: f64, lambda: f64) -> f64 {
    0.25 * (1.0 - mu) * (1.0 - lambda * lambda)
}

/// The transformed 4×4 output matrix; requires `mu` in `[0, 1)` and
/// `lambda` in `(0, 1)`.
pub fn reduced_output(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<DensityMatrix4> {
    let t = ReducedTerms::new(mu, lambda, rp)?;
    let d = t.delta();
    let scale = 0.25 * (1.0 - mu);
    let mut m = CMatrix::zeros(4);
    // Delta occupies rows/cols {0, 1, 3}; row/col 2 decouples
    let map = [0usize, 1, 3];
    for (i, &mi) in map.iter().enumerate() {
        for (j, &mj) in map.iter().enumerate() {
            m[(mi, mj)] = d[(i, j)] * scale;
        }
    }
    m[(2, 2)] = C64::new(scale * (1.0 - lambda * lambda), 0.0);
    Ok(DensityMatrix4::from_trusted(m))
}

/// The effective 3×3 operator `Delta`.
pub fn delta_matrix(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<CMatrix> {
    Ok(ReducedTerms::new(mu, lambda, rp)?.delta())
}

/// Spectrum of `Delta` (descending).
pub fn delta_spectrum(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<Spectrum> {
    eig_hermitian(&delta_matrix(mu, lambda, rp)?)
}

/// Full output spectrum through the 3×3 route.
pub fn reduced_output_spectrum(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<Spectrum> {
    let d = delta_spectrum(mu, lambda, rp)?;
    let scale = 0.25 * (1.0 - mu);
    let mut v: Vec<f64> = d.values().iter().map(|x| x * scale).collect();
    v.push(decoupled_eigenvalue(mu, lambda));
    Ok(Spectrum::from_unsorted(v))
}

/// Cubic `c3 x^3 + c2 x^2 + c1 x + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicCoeffs {
    pub fn eval(&self, x: f64) -> f64 {
        ((self.c3 * x + self.c2) * x + self.c1) * x + self.c0
    }

    pub fn roots(&self) -> Result<[f64; 3]> {
        cubic_roots(self.c3, self.c2, self.c1, self.c0)
    }

    pub fn max_coeff(&self) -> f64 {
        [self.c3, self.c2, self.c1, self.c0]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// `R_0(zeta)`: the part of the characteristic polynomial of
/// `Delta - (1+lambda^2) I` that does not depend on `|a|`.
pub fn r0_poly(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<CubicCoeffs> {
    let t = ReducedTerms::new(mu, lambda, rp)?;
    let l2 = lambda * lambda;
    let k = t.c * t.c + l2 * t.s * t.s;
    Ok(CubicCoeffs {
        c3: -1.0,
        c2: t.m - 2.0 * l2,
        c1: k,
        c0: k * (2.0 * l2 - t.m),
    })
}

/// Characteristic polynomial `R(x) = det(Delta - x I)` in expanded form,
/// built from `R_0(x - 1 - lambda^2)` plus the `|a|^2` correction and using
/// `C^2 + S^2 = 4 lambda^2`.
pub fn char_poly_delta(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<CubicCoeffs> {
    let t = ReducedTerms::new(mu, lambda, rp)?;
    let l2 = lambda * lambda;
    let h = 1.0 + l2;
    let k = t.c * t.c + l2 * t.s * t.s;
    let a = t.m - 2.0 * l2;
    let cls = t.cos_phi * lambda * t.s;
    let ma2 = t.m * t.a2;
    Ok(CubicCoeffs {
        c3: -1.0,
        c2: 3.0 * h + a,
        c1: -3.0 * h * h - 2.0 * a * h + k + ma2 * (2.0 * l2 + cls),
        c0: h * h * h + a * h * h - k * h - k * a
            + ma2 * (1.0 - l2) * (2.0 * l2 - cls - t.s * t.s),
    })
}

/// Squared 2-norm of the output in closed form.
pub fn two_norm_sq_closed_form(mu: f64, lambda: f64, rp: &ReducedParams) -> Result<f64> {
    let t = ReducedTerms::new(mu, lambda, rp)?;
    let l2 = lambda * lambda;
    let pref = (0.25 * (1.0 - mu)).powi(2);
    let inner = t.m * t.m
        + 2.0 * t.m * ((2.0 * l2 + t.cos_phi * lambda * t.s) * t.a2 + (1.0 - l2))
        + 4.0 * (1.0 + l2).powi(2)
        - 2.0 * t.s * t.s * (1.0 - l2);
    Ok(pref * inner)
}

/// At `|a| = 1` the output block-diagonalizes; these are the two
/// eigenvalues not equal to `(1-mu)(1-lambda^2)/4`, larger first.
pub fn unit_modulus_pair(mu: f64, lambda: f64, theta: f64, phi: f64) -> Result<[f64; 2]> {
    let rp = ReducedParams::new(theta, phi, 1.0)?;
    let t = ReducedTerms::new(mu, lambda, &rp)?;
    let l2 = lambda * lambda;
    let centre = 0.25 * (1.0 - mu) * (1.0 + l2) + 0.5 * mu;
    let root = (0.25 * t.m * t.m + 4.0 * l2 - (1.0 - l2) * t.s * t.s
        + t.m * t.cos_phi * lambda * t.s)
        .max(0.0)
        .sqrt();
    let half = 0.25 * (1.0 - mu) * root;
    Ok([centre + half, centre - half])
}

/// Reduced coordinates of `Phi_beta(|psi><psi|)`: with
/// `(u ⊗ v)|psi> = |psi_theta>` and `|beta> = (I ⊗ w)|beta_0>`, the output
/// is unitarily equivalent to the reduced form of `|psi_theta>` with shift
/// unitary `v w u^T`, whose SU(2) entry `a` gives `|a|` and `phi = 2 arg a`.
pub fn reduce_input(psi: &PureState4, beta: &MaxEntangled) -> ReducedParams {
    let sf = schmidt_canonicalize(psi);
    let shift = sf.v.matmul(beta.unitary()).matmul(&sf.u.transpose());
    let shifted = MaxEntangled::new(shift).expect("product of unitaries is unitary");
    let (a, _) = shifted.su2_entries();
    ReducedParams {
        theta: sf.theta,
        phi: 2.0 * a.arg(),
        a_mod: a.norm().min(1.0),
    }
}
