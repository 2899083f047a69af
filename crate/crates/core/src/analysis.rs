//! Checks of the eigenvalue arguments behind the optimality conjecture:
//! first-order root shifts of the characteristic polynomial of `Delta`,
//! the comparison lemmas for shifted 3-vectors, the closed-form
//! eigenvalues at `|a| in {0, 1}`, and majorization/trumping comparisons
//! of output spectra.

use serde::Serialize;

use crate::error::{check_range, Error, Result};
use crate::exec::Exec;
use crate::linalg::{cubic_roots, eig_hermitian, Spectrum};
use crate::optimize::{mu_critical, theta_optimal};
use crate::purity::{
    delta_spectrum, p_norm_spectrum, PurityOrder, ReducedParams, ReducedTerms,
};

/// Orders used for `p`-dominance in [`majorization_check`].
pub const DOMINANCE_ORDERS: [f64; 7] = [1.05, 1.1, 1.5, 2.0, 3.0, 5.0, 10.0];

/// Lemma shifts are only trusted when the smallest root gap exceeds this
/// multiple of the perturbation size.
pub const DEGENERACY_FACTOR: f64 = 1e3;

fn check_distinct(r: &[f64; 3]) -> Result<()> {
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "root" });
    }
    if r[0] == r[1] || r[1] == r[2] || r[0] == r[2] {
        return Err(Error::Invalid(format!("roots must be distinct, got {r:?}")));
    }
    Ok(())
}

fn check_decreasing_positive(v: &[f64; 3]) -> Result<()> {
    check_distinct(v)?;
    if !(v[0] > v[1] && v[1] > v[2] && v[2] > 0.0) {
        return Err(Error::Invalid(format!(
            "expected v1 > v2 > v3 > 0, got {v:?}"
        )));
    }
    Ok(())
}

/// `(r_m - r_k)(r_n - r_k)` for each `k`.
fn gap_products(r: &[f64; 3]) -> [f64; 3] {
    [
        (r[1] - r[0]) * (r[2] - r[0]),
        (r[0] - r[1]) * (r[2] - r[1]),
        (r[0] - r[2]) * (r[1] - r[2]),
    ]
}

fn min_gap(r: &[f64; 3]) -> f64 {
    (r[0] - r[1])
        .abs()
        .min((r[1] - r[2]).abs())
        .min((r[0] - r[2]).abs())
}

/// The two weighted sums `sum_k 1/prod_k` and `sum_k r_k/prod_k`, both
/// identically zero.
pub fn identity_check_sums(r: [f64; 3]) -> Result<(f64, f64)> {
    check_distinct(&r)?;
    let g = gap_products(&r);
    let s0 = g.iter().map(|x| 1.0 / x).sum();
    let s1 = r.iter().zip(&g).map(|(x, y)| x / y).sum();
    Ok((s0, s1))
}

/// First-order root positions of `Q(x) = P(x) + d1 x + d2` with
/// `P(x) = -(x - r1)(x - r2)(x - r3)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootShift {
    pub predicted: [f64; 3],
    /// False when the roots are too close for the first-order formula.
    pub reliable: bool,
}

pub fn root_shift_predict(r: [f64; 3], d1: f64, d2: f64) -> Result<RootShift> {
    check_distinct(&r)?;
    let g = gap_products(&r);
    let predicted = [0, 1, 2].map(|k| r[k] + (r[k] * d1 + d2) / g[k]);
    let reliable = min_gap(&r) >= DEGENERACY_FACTOR * d1.abs().max(d2.abs());
    Ok(RootShift {
        predicted,
        reliable,
    })
}

/// Exact roots of `-(x - r1)(x - r2)(x - r3) + d1 x + d2`, descending.
pub fn shifted_cubic_roots(r: [f64; 3], d1: f64, d2: f64) -> Result<[f64; 3]> {
    let e1 = r[0] + r[1] + r[2];
    let e2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2];
    let e3 = r[0] * r[1] * r[2];
    cubic_roots(-1.0, e1, -e2 + d1, e3 + d2)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("need at least two matched points".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan() || *v <= 0.0 || !v.is_finite()) {
        return Err(Error::Invalid("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// A shifted 3-vector with its per-entry shifts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaShift {
    pub v: [f64; 3],
    pub w: [f64; 3],
    pub shifts: [f64; 3],
}

impl LemmaShift {
    /// `||w||_p^p - ||v||_p^p`, computed from the relative shifts so that
    /// small changes are not lost to cancellation.
    pub fn norm_change(&self, p: f64) -> f64 {
        self.v
            .iter()
            .zip(&self.shifts)
            .map(|(v, d)| v.powf(p) * (p * (d / v).ln_1p()).exp_m1())
            .sum()
    }

    pub fn sum_change(&self) -> f64 {
        self.shifts.iter().sum()
    }
}

fn lemma_shift(v: [f64; 3], eps: f64, proportional: bool) -> Result<LemmaShift> {
    check_decreasing_positive(&v)?;
    let g = min_gap(&v);
    if !(eps > 0.0 && eps <= 1e-3 * g * g) {
        return Err(Error::OutOfRange {
            name: "eps",
            value: eps,
            range: "(0, 1e-3 min_gap^2]",
        });
    }
    let gp = gap_products(&v);
    let shifts = [0, 1, 2].map(|k| {
        let num = if proportional { eps * v[k] } else { eps };
        num / gp[k]
    });
    let w = [0, 1, 2].map(|k| v[k] + shifts[k]);
    Ok(LemmaShift { v, w, shifts })
}

/// `w_k = v_k + eps v_k / ((v_m - v_k)(v_n - v_k))`: preserves the sum and
/// increases every `p`-norm with `p > 1`.
pub fn lemma_p_shift(v: [f64; 3], eps: f64) -> Result<LemmaShift> {
    lemma_shift(v, eps, true)
}

/// `w_k = v_k + eps / ((v_m - v_k)(v_n - v_k))`: preserves the sum,
/// increases `p`-norms for `p > 2` and decreases them for `1 < p < 2`.
pub fn lemma_q_shift(v: [f64; 3], eps: f64) -> Result<LemmaShift> {
    lemma_shift(v, eps, false)
}

/// Which parameter of `Delta` is perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `cos phi -> cos phi + eps`
    CosPhi,
    /// `|a|^2 -> |a|^2 + eps`
    AbsA2,
}

/// Regimes where the norm is argued to increase under the shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// `cos phi` shift, `1 < p <= 2`.
    CosPhiSmallP,
    /// `|a|^2` shift, `1 < p < 2`, `sin theta >= 1/2`, `cos phi = 1`.
    AbsA2SmallP,
    /// `|a|^2` shift, `p > 2`, `sin theta < 1/2`.
    AbsA2LargeP,
    /// Either shift, largest eigenvalue.
    TopEigenvalue,
}

impl Claim {
    pub const ALL: [Claim; 4] = [
        Claim::CosPhiSmallP,
        Claim::AbsA2SmallP,
        Claim::AbsA2LargeP,
        Claim::TopEigenvalue,
    ];

    fn applies(direction: Direction, order: PurityOrder, sin_theta: f64, cos_phi: f64) -> Option<Claim> {
        match (direction, order) {
            (_, PurityOrder::Infinity) => Some(Claim::TopEigenvalue),
            (Direction::CosPhi, PurityOrder::Finite(p)) if p > 1.0 && p <= 2.0 => {
                Some(Claim::CosPhiSmallP)
            }
            (Direction::AbsA2, PurityOrder::Finite(p))
                if p > 1.0 && p < 2.0 && sin_theta >= 0.5 && (cos_phi - 1.0).abs() < 1e-12 =>
            {
                Some(Claim::AbsA2SmallP)
            }
            (Direction::AbsA2, PurityOrder::Finite(p)) if p > 2.0 && sin_theta < 0.5 => {
                Some(Claim::AbsA2LargeP)
            }
            _ => None,
        }
    }
}

/// A point of the reduced parameter space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub mu: f64,
    pub lambda: f64,
    pub theta: f64,
    pub phi: f64,
    pub a_mod: f64,
}

impl ScanPoint {
    fn reduced(&self) -> ReducedParams {
        ReducedParams {
            theta: self.theta,
            phi: self.phi,
            a_mod: self.a_mod,
        }
    }
}

/// Mean-value quantities of the heuristic bracket for the `|a|^2` shift.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Heuristic {
    /// Mean values `(v́_1, v́_2, v́_3)` of `x^(p-1)` differences.
    pub acute: [f64; 3],
    /// Mean values `(v̀_1, v̀_3)` of `x^(p-2)` differences.
    pub grave: [f64; 2],
    /// `v́_k` and `v̀_k` agree within 10% of `v_1 - v_3`.
    pub close: bool,
    /// `v́_2 >= 1 - lambda^2`.
    pub mid_above: bool,
    /// Approximate bracket; nonnegative by construction when the
    /// assumptions hold.
    pub approx_bracket: f64,
}

/// One perturbation of `Delta` at one order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub index: usize,
    pub point: ScanPoint,
    pub direction: Direction,
    pub epsilon: f64,
    pub p: PurityOrder,
    pub mu_c: f64,
    /// `(1 - lambda^2)/(3 - lambda^2)`.
    pub mu_inner: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Eigenvalues of `Delta`, descending.
    pub eigenvalues: [f64; 3],
    pub predicted_shifts: [f64; 3],
    pub measured_shifts: [f64; 3],
    pub shift_error: f64,
    /// Root gaps are large enough for the first-order formula.
    pub reliable: bool,
    /// Predicted change of `||Delta||_p^p` (top eigenvalue for `p = inf`).
    pub predicted_change: f64,
    pub measured_change: f64,
    pub predicted_sign: i8,
    pub measured_sign: i8,
    /// The `delta1` and `delta2` contributions to `predicted_change`.
    pub bracket: [f64; 2],
    pub claim: Option<Claim>,
    /// Both signs positive, when a claim applies.
    pub claim_holds: Option<bool>,
    pub heuristic: Option<Heuristic>,
}


/// Grid for [`perturb_eigen_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGrid {
    pub mus: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub a_mods: Vec<f64>,
    pub orders: Vec<PurityOrder>,
    pub epsilon: f64,
}

impl Default for ScanGrid {
    fn default() -> Self {
        use std::f64::consts::PI;
        Self {
            mus: vec![0.1, 0.3, 0.5, 0.7],
            lambdas: vec![0.2, 0.4, 0.6, 0.8],
            thetas: (1..=6).map(|i| i as f64 * PI / 12.0).collect(),
            phis: vec![0.0, PI / 6.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0],
            a_mods: vec![0.15, 0.4, 0.65, 0.9],
            orders: [1.1, 1.5, 2.0, 3.0, 5.0]
                .into_iter()
                .map(PurityOrder::Finite)
                .chain([PurityOrder::Infinity])
                .collect(),
            epsilon: 1e-8,
        }
    }
}

impl ScanGrid {
    fn points(&self) -> Vec<ScanPoint> {
        let mut out = Vec::new();
        for &mu in &self.mus {
            for &lambda in &self.lambdas {
                for &theta in &self.thetas {
                    for &phi in &self.phis {
                        for &a_mod in &self.a_mods {
                            out.push(ScanPoint { mu, lambda, theta, phi, a_mod });
                        }
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.mus.is_empty()
            || self.lambdas.is_empty()
            || self.thetas.is_empty()
            || self.phis.is_empty()
            || self.a_mods.is_empty()
            || self.orders.is_empty()
        {
            return Err(Error::Invalid("scan grid must be nonempty".into()));
        }
        for &mu in &self.mus {
            check_range("mu", mu, f64::MIN_POSITIVE, 1.0 - f64::EPSILON, "(0, 1)")?;
        }
        for &l in &self.lambdas {
            check_range("lambda", l, f64::MIN_POSITIVE, 1.0 - f64::EPSILON, "(0, 1)")?;
        }
        for o in &self.orders {
            if let PurityOrder::VonNeumann = o {
                return Err(Error::InvalidOrder(1.0));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1e-2) {
            return Err(Error::OutOfRange {
                name: "epsilon",
                value: self.epsilon,
                range: "(0, 0.01)",
            });
        }
        Ok(())
    }
}

/// `(delta1, delta2)` of the characteristic-polynomial change, or `None` if
/// the shift leaves the parameter domain.
fn poly_shift(t: &ReducedTerms, direction: Direction, eps: f64) -> Option<(f64, f64)> {
    let l = t.lambda;
    let l2 = l * l;
    let ls = l * t.s;
    match direction {
        Direction::CosPhi => {
            if t.cos_phi + eps > 1.0 {
                return None;
            }
            let k = eps * t.m * t.a2 * ls;
            Some((k, -k * (1.0 - l2)))
        }
        Direction::AbsA2 => {
            if t.a2 + eps > 1.0 {
                return None;
            }
            let d1 = eps * t.m * (2.0 * l2 + t.cos_phi * ls);
            let d2 = eps * t.m * (1.0 - l2) * (2.0 * l2 - t.cos_phi * ls - t.s * t.s);
            Some((d1, d2))
        }
    }
}

fn shifted_point(pt: &ScanPoint, cos_phi: f64, direction: Direction, eps: f64) -> ScanPoint {
    let mut q = *pt;
    match direction {
        Direction::CosPhi => q.phi = (cos_phi + eps).clamp(-1.0, 1.0).acos(),
        Direction::AbsA2 => q.a_mod = (pt.a_mod * pt.a_mod + eps).min(1.0).sqrt(),
    }
    q
}

fn sign_of(x: f64, noise: f64) -> i8 {
    if x > noise {
        1
    } else if x < -noise {
        -1
    } else {
        0
    }
}

/// Mean value `xi` with `f'(xi) (b - a) = f(b) - f(a)` for `f = x^q`.
fn power_mean_value(a: f64, b: f64, q: f64) -> f64 {
    let slope = (b.powf(q) - a.powf(q)) / (b - a);
    (slope / q).powf(1.0 / (q - 1.0))
}

fn heuristic(v: &[f64; 3], p: f64, lambda: f64, sin_theta: f64, cos_phi: f64) -> Option<Heuristic> {
    if p.is_nan() || p <= 1.0 || (p - 2.0).abs() < 1e-9 {
        return None;
    }
    let a1 = power_mean_value(v[1], v[0], p);
    let a3 = power_mean_value(v[2], v[1], p);
    let g1 = power_mean_value(v[1], v[0], p - 1.0);
    let g3 = power_mean_value(v[2], v[1], p - 1.0);
    let a2 = power_mean_value(a3, a1, p - 1.0);
    let l2 = lambda * lambda;
    let close = (a1 - g1).abs().max((a3 - g3).abs()) <= 0.1 * (v[0] - v[2]);
    let approx = if p < 2.0 {
        (p - 1.0) * (a1 - a3) / (a2 * a2)
            * (1.0 - l2)
            * 2.0
            * ((p - 1.0) * (1.0 - sin_theta) + sin_theta)
    } else {
        (p - 2.0) * (1.0 - sin_theta * sin_theta) + (1.0 + cos_phi * sin_theta)
    };
    Some(Heuristic {
        acute: [a1, a2, a3],
        grave: [g1, g3],
        close,
        mid_above: a2 >= 1.0 - l2,
        approx_bracket: approx,
    })
}

/// Perturbs one point in one direction and reports every order.
fn perturb_point(
    index: usize,
    pt: &ScanPoint,
    direction: Direction,
    eps: f64,
    orders: &[PurityOrder],
) -> Result<Vec<PerturbationReport>> {
    let rp = pt.reduced();
    let t = ReducedTerms::new(pt.mu, pt.lambda, &rp)?;
    let Some((d1, d2)) = poly_shift(&t, direction, eps) else {
        return Ok(Vec::new());
    };
    let v: [f64; 3] = delta_spectrum(pt.mu, pt.lambda, &rp)?
        .values()
        .try_into()
        .expect("Delta is 3x3");
    let q = shifted_point(pt, t.cos_phi, direction, eps);
    let vq: [f64; 3] = delta_spectrum(q.mu, q.lambda, &q.reduced())?
        .values()
        .try_into()
        .expect("Delta is 3x3");
    let gp = gap_products(&v);
    let predicted = [0, 1, 2].map(|k| (v[k] * d1 + d2) / gp[k]);
    let measured = [0, 1, 2].map(|k| vq[k] - v[k]);
    let shift_error = (0..3)
        .map(|k| (predicted[k] - measured[k]).abs())
        .fold(0.0, f64::max);
    let reliable = min_gap(&v) >= DEGENERACY_FACTOR * d1.abs().max(d2.abs());
    let sin_theta = pt.theta.sin();
    let mu_c = mu_critical(pt.lambda)?;
    let l2 = pt.lambda * pt.lambda;
    let mu_inner = (1.0 - l2) / (3.0 - l2);

    let mut out = Vec::with_capacity(orders.len());
    for &order in orders {
        let (bracket, measured_change, scale) = match order {
            PurityOrder::Finite(p) => {
                let b1 = d1 * p * (0..3).map(|k| v[k].powf(p) / gp[k]).sum::<f64>();
                let b2 = d2 * p * (0..3).map(|k| v[k].powf(p - 1.0) / gp[k]).sum::<f64>();
                let m: f64 = (0..3)
                    .map(|k| v[k].powf(p) * (p * (measured[k] / v[k]).ln_1p()).exp_m1())
                    .sum();
                let scale: f64 = v.iter().map(|x| x.powf(p)).sum::<f64>() * p;
                ([b1, b2], m, scale)
            }
            PurityOrder::Infinity => ([v[0] * d1 / gp[0], d2 / gp[0]], measured[0], v[0]),
            PurityOrder::VonNeumann => return Err(Error::InvalidOrder(1.0)),
        };
        let predicted_change = bracket[0] + bracket[1];
        let noise = 1e-13 * scale;
        let ps = sign_of(predicted_change, noise);
        let ms = sign_of(measured_change, noise);
        let claim = Claim::applies(direction, order, sin_theta, t.cos_phi);
        let heuristic = match (direction, order) {
            (Direction::AbsA2, PurityOrder::Finite(p)) => {
                heuristic(&v, p, pt.lambda, sin_theta, t.cos_phi)
            }
            _ => None,
        };
        out.push(PerturbationReport {
            index,
            point: *pt,
            direction,
            epsilon: eps,
            p: order,
            mu_c,
            mu_inner,
            delta1: d1,
            delta2: d2,
            eigenvalues: v,
            predicted_shifts: predicted,
            measured_shifts: measured,
            shift_error,
            reliable,
            predicted_change,
            measured_change,
            predicted_sign: ps,
            measured_sign: ms,
            bracket,
            claim,
            claim_holds: claim.map(|_| ps > 0 && ms > 0),
            heuristic,
        });
    }
    Ok(out)
}

/// First-order eigenvalue shifts of `Delta` under `cos phi` and `|a|^2`
/// perturbations, compared with re-diagonalization at every grid point.
/// Points whose shift would leave the domain (`cos phi + eps > 1`,
/// `|a|^2 + eps > 1`) are skipped.
pub fn perturb_eigen_scan(grid: &ScanGrid, exec: Exec) -> Result<Vec<PerturbationReport>> {
    grid.validate()?;
    let points = grid.points();
    let per_point = exec.map(points.len(), |i| {
        let mut reports = perturb_point(i, &points[i], Direction::CosPhi, grid.epsilon, &grid.orders)?;
        reports.extend(perturb_point(i, &points[i], Direction::AbsA2, grid.epsilon, &grid.orders)?);
        Ok::<_, Error>(reports)
    });
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// Tally of one claim over a scan.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClaimTally {
    pub claim: Option<Claim>,
    pub points: usize,
    pub holds: usize,
    /// Excluded by the near-degeneracy guard.
    pub unreliable: usize,
    /// Predicted change indistinguishable from zero.
    pub unresolved: usize,
}

impl ClaimTally {
    /// Fraction of reliable, resolved points where the claim held.
    pub fn agreement(&self) -> f64 {
        let n = self.points - self.unreliable - self.unresolved;
        if n == 0 {
            1.0
        } else {
            self.holds as f64 / n as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScanSummary {
    pub reports: usize,
    /// Reliable reports where predicted and measured signs agree.
    pub sign_agree: usize,
    pub sign_reliable: usize,
    pub claims: Vec<ClaimTally>,
    /// First reliable, resolved report contradicting its claim.
    pub first_failure: Option<PerturbationReport>,
}

pub fn summarize_scan(reports: &[PerturbationReport]) -> ScanSummary {
    let mut s = ScanSummary {
        reports: reports.len(),
        claims: Claim::ALL
            .iter()
            .map(|c| ClaimTally {
                claim: Some(*c),
                ..Default::default()
            })
            .collect(),
        ..Default::default()
    };
    for r in reports {
        if r.reliable && r.predicted_sign != 0 {
            s.sign_reliable += 1;
            if r.predicted_sign == r.measured_sign {
                s.sign_agree += 1;
            }
        }
        let Some(c) = r.claim else { continue };
        let tally = s
            .claims
            .iter_mut()
            .find(|t| t.claim == Some(c))
            .expect("all claims tallied");
        tally.points += 1;
        if !r.reliable {
            tally.unreliable += 1;
        } else if r.predicted_sign == 0 && r.measured_sign == 0 {
            tally.unresolved += 1;
        } else if r.claim_holds == Some(true) {
            tally.holds += 1;
        } else if s.first_failure.is_none() {
            s.first_failure = Some(r.clone());
        }
    }
    s
}

/// Which boundary column of the `|a| in {0, 1}` table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A0,
    A1,
}

/// Closed-form eigenvalues of `Delta` at `|a| = 0` or `1` with
/// `cos phi = 1`, in table row order (top, middle, bottom at `a = 0`).
pub fn boundary_eigenvalues(mu: f64, lambda: f64, theta: f64, side: Side) -> Result<[f64; 3]> {
    let rp = ReducedParams::new(theta, 0.0, 0.0)?;
    let t = ReducedTerms::new(mu, lambda, &rp)?;
    let l2 = lambda * lambda;
    let h = 1.0 + l2;
    let base = 4.0 * l2 - (1.0 - l2) * t.s * t.s;
    Ok(match side {
        Side::A0 => {
            let r = base.max(0.0).sqrt();
            [h + r, 1.0 - l2 + t.m, h - r]
        }
        Side::A1 => {
            let r = (0.25 * t.m * t.m + base + t.m * (lambda * t.s).abs()).max(0.0).sqrt();
            [h + 0.5 * t.m + r, 1.0 - l2, h + 0.5 * t.m - r]
        }
    })
}

/// Both boundary columns at one `(mu, lambda, theta)` with solver check
/// and the row-wise comparisons.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub mu: f64,
    pub lambda: f64,
    pub theta: f64,
    pub a0: [f64; 3],
    pub a1: [f64; 3],
    /// Max deviation of either column from the eigensolver.
    pub solver_error: f64,
    /// Row 1 grows from `a = 0` to `a = 1`.
    pub top_up: bool,
    /// Row 2 shrinks.
    pub middle_down: bool,
    /// Row 3 does not shrink.
    pub bottom_up: bool,
    /// The largest eigenvalue (whatever its row) is larger at `a = 1`.
    pub largest_up: bool,
}

pub fn boundary_table(mu: f64, lambda: f64, theta: f64) -> Result<BoundaryRow> {
    let a0 = boundary_eigenvalues(mu, lambda, theta, Side::A0)?;
    let a1 = boundary_eigenvalues(mu, lambda, theta, Side::A1)?;
    let s0 = delta_spectrum(mu, lambda, &ReducedParams::new(theta, 0.0, 0.0)?)?;
    let s1 = delta_spectrum(mu, lambda, &ReducedParams::new(theta, 0.0, 1.0)?)?;
    let e0 = Spectrum::from_unsorted(a0.to_vec()).max_abs_diff(&s0);
    let e1 = Spectrum::from_unsorted(a1.to_vec()).max_abs_diff(&s1);
    Ok(BoundaryRow {
        mu,
        lambda,
        theta,
        a0,
        a1,
        solver_error: e0.max(e1),
        top_up: a1[0] > a0[0],
        middle_down: a1[1] < a0[1],
        bottom_up: a1[2] >= a0[2] - 1e-12,
        largest_up: s1.max() > s0.max(),
    })
}

/// Output eigenvalues of the optimal `p = 2` input, descending.
pub fn optimal_eigenvalue_table(mu: f64, lambda: f64) -> Result<[f64; 4]> {
    let mu_c = mu_critical(lambda)?;
    theta_optimal(mu, lambda)?;
    let l2 = lambda * lambda;
    let low = 0.25 * (1.0 - mu) * (1.0 - l2);
    Ok(if mu < mu_c {
        let centre = 0.25 * (1.0 - mu) * (1.0 + l2) + 0.5 * mu;
        let r = 0.5 * (mu * mu / (1.0 - l2) + (1.0 - mu).powi(2) * l2).sqrt();
        [centre + r, low, low, centre - r]
    } else {
        [0.25 * (1.0 - mu) * (1.0 + 3.0 * l2) + mu, low, low, low]
    })
}

/// Where a dominance relation first fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DominanceFailure {
    /// Partial sum of the `k` largest entries (1-based) of `x` exceeds
    /// that of `y`.
    PartialSum { k: usize, x_sum: f64, y_sum: f64 },
    /// Totals differ.
    Total { x_sum: f64, y_sum: f64 },
    /// `||x||_p > ||y||_p`.
    Norm { p: String, x_norm: f64, y_norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub x: Spectrum,
    pub y: Spectrum,
    pub majorized: bool,
    pub weakly_majorized: bool,
    pub p_dominated: bool,
    /// First failing partial sum (or total) for majorization.
    pub first_violation: Option<DominanceFailure>,
    /// First order at which `p`-dominance fails.
    pub first_norm_violation: Option<DominanceFailure>,
}

fn check_probability_like(v: &[f64]) -> Result<()> {
    for &x in v {
        if !x.is_finite() {
            return Err(Error::NonFinite { what: "vector entry" });
        }
        if x < 0.0 {
            return Err(Error::NegativeEigenvalue { value: x });
        }
    }
    Ok(())
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    Spectrum::from_unsorted(v.to_vec()).into_vec()
}

/// Majorization `x ≺ y`, weak majorization, and `p`-norm dominance on
/// [`DOMINANCE_ORDERS`] plus `p = inf`.
pub fn majorization_check(x: &[f64], y: &[f64]) -> Result<DominanceReport> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    check_probability_like(x)?;
    check_probability_like(y)?;
    let xs = sorted_desc(x);
    let ys = sorted_desc(y);
    let scale = xs.iter().sum::<f64>().max(ys.iter().sum::<f64>()).max(1.0);
    let tol = 1e-12 * scale;

    let (mut sx, mut sy) = (0.0, 0.0);
    let mut weak = true;
    let mut first = None;
    for k in 0..xs.len() {
        sx += xs[k];
        sy += ys[k];
        if sx > sy + tol {
            weak = false;
            if first.is_none() {
                first = Some(DominanceFailure::PartialSum {
                    k: k + 1,
                    x_sum: sx,
                    y_sum: sy,
                });
            }
        }
    }
    let equal_totals = (sx - sy).abs() <= tol;
    if weak && !equal_totals {
        first = Some(DominanceFailure::Total { x_sum: sx, y_sum: sy });
    }

    let mut norm_fail = None;
    let orders = DOMINANCE_ORDERS
        .iter()
        .map(|&p| PurityOrder::Finite(p))
        .chain([PurityOrder::Infinity]);
    for order in orders {
        let nx = p_norm_spectrum(&xs, order)?;
        let ny = p_norm_spectrum(&ys, order)?;
        if nx > ny + 1e-12 {
            norm_fail = Some(DominanceFailure::Norm {
                p: order.to_string(),
                x_norm: nx,
                y_norm: ny,
            });
            break;
        }
    }
    Ok(DominanceReport {
        x: Spectrum::from_unsorted(xs),
        y: Spectrum::from_unsorted(ys),
        majorized: weak && equal_totals,
        weakly_majorized: weak,
        p_dominated: norm_fail.is_none(),
        first_violation: first,
        first_norm_violation: norm_fail,
    })
}

/// Outcome of a finite catalyst search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrumpingReport {
    pub p_dominance: DominanceReport,
    /// A catalyst `z` with `x ⊗ z ≺ y ⊗ z`, if one was found.
    pub catalyst: Option<Vec<f64>>,
    /// Number of catalysts tried.
    pub searched: usize,
    pub max_catalyst_dim: usize,
}

/// Lattice denominator of catalyst entries.
pub const CATALYST_DENOMINATOR: u32 = 32;

/// Nonincreasing positive compositions of `n` into exactly `parts` parts.
fn partitions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(n: u32, parts: usize, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 0 {
            if n == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let lo = n.div_ceil(parts as u32).max(1);
        for first in (lo..=max.min(n)).rev() {
            prefix.push(first);
            go(n - first, parts - 1, first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, parts, n, &mut Vec::new(), &mut out);
    out
}

fn tensor(x: &[f64], z: &[f64]) -> Vec<f64> {
    x.iter().flat_map(|a| z.iter().map(move |b| a * b)).collect()
}

/// Searches catalysts with entries on the `1/32` lattice (sorted, strictly
/// positive) of dimension up to `max_catalyst_dim` for `x ⊗ z ≺ y ⊗ z`.
///
/// The lattice is small enough to enumerate completely at every allowed
/// dimension. Finding nothing says nothing about infinite catalysts or the
/// closure of the trumping relation.
pub fn trumping_scan(x: &[f64], y: &[f64], max_catalyst_dim: usize) -> Result<TrumpingReport> {
    if max_catalyst_dim == 0 || max_catalyst_dim > 6 {
        return Err(Error::OutOfRange {
            name: "max_catalyst_dim",
            value: max_catalyst_dim as f64,
            range: "[1, 6]",
        });
    }
    let p_dominance = majorization_check(x, y)?;
    let mut searched = 0;
    let mut catalyst = None;
    'dims: for d in 1..=max_catalyst_dim {
        for part in partitions(CATALYST_DENOMINATOR, d) {
            let z: Vec<f64> = part
                .iter()
                .map(|&k| k as f64 / CATALYST_DENOMINATOR as f64)
                .collect();
            searched += 1;
            if majorization_check(&tensor(x, &z), &tensor(y, &z))?.majorized {
                catalyst = Some(z);
                break 'dims;
            }
        }
    }
    Ok(TrumpingReport {
        p_dominance,
        catalyst,
        searched,
        max_catalyst_dim,
    })
}

/// Closed-form and solver eigenvalues of `Delta` at `sin theta = 1`,
/// `cos phi = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnitBlockCheck {
    pub a_mod: f64,
    /// `{1 - lambda^2, 1 + lambda^2 + M/2 ± sqrt(M^2/4 + 4 lambda^4 - 2 lambda^2 M (1 - 2|a|^2))}`, descending.
    pub closed_form: Spectrum,
    pub solver: Spectrum,
    pub max_error: f64,
}

pub fn unit_block_matrix_check(mu: f64, lambda: f64, a_mod: f64) -> Result<UnitBlockCheck> {
    let rp = ReducedParams::new(std::f64::consts::FRAC_PI_2, 0.0, a_mod)?;
    let t = ReducedTerms::new(mu, lambda, &rp)?;
    let l2 = lambda * lambda;
    let m = t.m;
    let r = (0.25 * m * m + 4.0 * l2 * l2 - 2.0 * l2 * m * (1.0 - 2.0 * t.a2))
        .max(0.0)
        .sqrt();
    let closed_form = Spectrum::from_unsorted(vec![
        1.0 - l2,
        1.0 + l2 + 0.5 * m + r,
        1.0 + l2 + 0.5 * m - r,
    ]);
    let solver = eig_hermitian(&t.delta())?;
    let max_error = closed_form.max_abs_diff(&solver);
    Ok(UnitBlockCheck {
        a_mod,
        closed_form,
        solver,
        max_error,
    })
}
