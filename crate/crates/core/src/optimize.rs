//! Maximal output purity.
//!
//! For `p = 2` the optimum is known in closed form: the best input is
//! `|psi_theta>` with `sin theta = min(1, mu / ((1-mu)(1-lambda^2)))`, which
//! reaches `|beta_0>` at the threshold `mu_c = (1-lambda^2)/(2-lambda^2)`.
//! The same input is conjectured optimal for every order; the numerical
//! optimizer and the sweeps here exist to test that.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::channels::{check_open_lambda, output_spectrum, ChannelParams};
use crate::error::{check_range, Error, Result};
use crate::exec::{cell_rng, Exec};
use crate::linalg::{CMatrix, Spectrum};
use crate::purity::{
    purity_score, reduced_output_spectrum, renyi_spectrum, PurityOrder, ReducedParams,
};
use crate::states::{
    beta0, entanglement_of_theta, psi_theta, random_pure, schmidt_canonicalize,
    EntanglementKind, PureState4,
};

/// A sampled input beats the conjectured optimum only if its score is
/// larger by more than this.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Which of the degenerate parameter corners applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrivialCase {
    /// `mu = 0`: every product state is optimal.
    NoCorrelation,
    /// `lambda = 0`: every input has the same output.
    Erasing,
    /// `lambda = 1`: `|beta_0>` gives a pure output.
    Noiseless,
    /// `mu = 1`: every input is sent to `|beta_0>`.
    FullCorrelation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    BelowThreshold,
    AtOrAbove,
    Trivial(TrivialCase),
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::BelowThreshold => "below_threshold",
            Regime::AtOrAbove => "at_or_above",
            Regime::Trivial(TrivialCase::NoCorrelation) => "trivial(mu=0)",
            Regime::Trivial(TrivialCase::Erasing) => "trivial(lambda=0)",
            Regime::Trivial(TrivialCase::Noiseless) => "trivial(lambda=1)",
            Regime::Trivial(TrivialCase::FullCorrelation) => "trivial(mu=1)",
        })
    }
}

impl Serialize for Regime {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `(1 - lambda^2) / (2 - lambda^2)` for `lambda` in `(0, 1)`.
pub fn mu_critical(lambda: f64) -> Result<f64> {
    check_open_lambda(lambda)?;
    Ok(mu_critical_formula(lambda))
}

fn mu_critical_formula(lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    (1.0 - l2) / (2.0 - l2)
}

/// Classifies `(mu, lambda)` in `[0, 1]^2`.
pub fn classify(mu: f64, lambda: f64) -> Result<Regime> {
    check_range("mu", mu, 0.0, 1.0, "[0, 1]")?;
    check_range("lambda", lambda, 0.0, 1.0, "[0, 1]")?;
    Ok(if mu == 1.0 {
        Regime::Trivial(TrivialCase::FullCorrelation)
    } else if lambda == 0.0 {
        Regime::Trivial(TrivialCase::Erasing)
    } else if mu == 0.0 {
        Regime::Trivial(TrivialCase::NoCorrelation)
    } else if lambda == 1.0 {
        Regime::Trivial(TrivialCase::Noiseless)
    } else if mu < mu_critical_formula(lambda) {
        Regime::BelowThreshold
    } else {
        Regime::AtOrAbove
    })
}

/// Schmidt angle of the optimal `p = 2` input; `pi/2` at and above the
/// threshold.
pub fn theta_optimal(mu: f64, lambda: f64) -> Result<f64> {
    check_open_lambda(lambda)?;
    check_range("mu", mu, 0.0, 1.0 - f64::EPSILON, "[0, 1)")?;
    if mu >= mu_critical_formula(lambda) {
        return Ok(FRAC_PI_2);
    }
    let s = mu / ((1.0 - mu) * (1.0 - lambda * lambda));
    Ok(s.min(1.0).asin())
}

/// An optimal (or best found) input and its output.
#[derive(Clone, Debug, Serialize)]
pub struct Optimum {
    /// `p`-norm (largest eigenvalue for `p = inf`) or, for the entropy
    /// order, the minimal von Neumann entropy.
    pub value: f64,
    pub order: PurityOrder,
    pub theta_opt: f64,
    pub regime: Regime,
    pub witness: PureState4,
    pub spectrum: Spectrum,
    /// Reduced coordinates of the witness when it came from the reduced
    /// search.
    pub reduced: Option<ReducedParams>,
}


/// Reports a spectrum at `order` in the units of [`Optimum::value`].
pub fn order_value(spectrum: &[f64], order: PurityOrder) -> Result<f64> {
    match order {
        PurityOrder::VonNeumann => renyi_spectrum(spectrum, order),
        _ => purity_score(spectrum, order),
    }
}

/// The `p = 2` optimal input: `(theta, witness, regime)`.
fn two_norm_witness(mu: f64, lambda: f64) -> Result<(f64, PureState4, Regime)> {
    let regime = classify(mu, lambda)?;
    Ok(match regime {
        Regime::Trivial(TrivialCase::NoCorrelation) => (0.0, PureState4::product00(), regime),
        Regime::Trivial(_) | Regime::AtOrAbove => (FRAC_PI_2, beta0(), regime),
        Regime::BelowThreshold => {
            let theta = theta_optimal(mu, lambda)?;
            (theta, psi_theta(theta), regime)
        }
    })
}

/// Closed-form maximal squared 2-norm at `|a| = 1`, `cos phi = 1` as a
/// quadratic in `sin theta`.
pub fn max_two_norm_sq(mu: f64, lambda: f64, sin_theta: f64) -> f64 {
    let l2 = lambda * lambda;
    let m = 4.0 * mu / (1.0 - mu);
    let pref = (0.25 * (1.0 - mu)).powi(2);
    pref * (m * m + 2.0 * m * (1.0 + l2 + 2.0 * l2 * sin_theta) + 4.0 * (1.0 + l2).powi(2)
        - 8.0 * l2 * (1.0 - l2) * sin_theta * sin_theta)
}

/// Exact maximal output 2-norm. Accepts `mu, lambda` in `[0, 1]`; the
/// corners are handled as trivial regimes.
pub fn two_norm_optimum(mu: f64, lambda: f64) -> Result<Optimum> {
    let (theta, witness, regime) = two_norm_witness(mu, lambda)?;
    let params = ChannelParams::with_beta0(mu, lambda)?;
    let spectrum = output_spectrum(&params, &witness);
    let value = match regime {
        Regime::BelowThreshold | Regime::AtOrAbove => max_two_norm_sq(mu, lambda, theta.sin()).sqrt(),
        Regime::Trivial(_) => purity_score(spectrum.values(), PurityOrder::Finite(2.0))?,
    };
    Ok(Optimum {
        value,
        order: PurityOrder::Finite(2.0),
        theta_opt: theta,
        regime,
        witness,
        spectrum,
        reduced: None,
    })
}

/// The `p = 2` optimal input evaluated at another order.
pub fn conjectured_optimum(mu: f64, lambda: f64, order: PurityOrder) -> Result<Optimum> {
    let (theta, witness, regime) = two_norm_witness(mu, lambda)?;
    let params = ChannelParams::with_beta0(mu, lambda)?;
    let spectrum = output_spectrum(&params, &witness);
    let value = order_value(spectrum.values(), order)?;
    Ok(Optimum {
        value,
        order,
        theta_opt: theta,
        regime,
        witness,
        spectrum,
        reduced: None,
    })
}

/// Effort for [`numeric_optimize`].
#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    /// Haar-random inputs evaluated through the full channel.
    pub random_states: usize,
    /// Lattice sizes over `(theta, phi, |a|)` on the reduced form.
    pub lattice: [usize; 3],
    /// Pattern search stops once every step is below this.
    pub step_tol: f64,
    pub max_iters: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            random_states: 200,
            lattice: [21, 13, 21],
            step_tol: 1e-8,
            max_iters: 20_000,
        }
    }
}

const BOUNDS: [(f64, f64); 3] = [(0.0, FRAC_PI_2), (0.0, PI), (0.0, 1.0)];

fn reduced_score(mu: f64, lambda: f64, x: &[f64; 3], order: PurityOrder) -> f64 {
    let rp = ReducedParams {
        theta: x[0],
        phi: x[1],
        a_mod: x[2],
    };
    reduced_output_spectrum(mu, lambda, &rp)
        .and_then(|s| purity_score(s.values(), order))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Compass search maximizing `f` inside the box `BOUNDS`.
fn pattern_search(
    f: impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    steps: [f64; 3],
    tol: f64,
    max_iters: usize,
) -> ([f64; 3], f64) {
    let mut x = start;
    let mut fx = f(&x);
    let mut h = steps;
    for _ in 0..max_iters {
        if h.iter().all(|&s| s < tol) {
            break;
        }
        let mut improved = false;
        for k in 0..3 {
            if h[k] < tol {
                continue;
            }
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] = (x[k] + dir * h[k]).clamp(BOUNDS[k].0, BOUNDS[k].1);
                if y[k] == x[k] {
                    continue;
                }
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            for s in h.iter_mut() {
                *s *= 0.5;
            }
        }
    }
    (x, fx)
}

/// Vertex of the parabola through `(x_i, y_i)`, if it opens downward.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curv = (d2 - d1) / (x[2] - x[0]);
    if curv.is_nan() || curv >= 0.0 {
        return None;
    }
    Some(0.5 * (x[0] + x[1]) - d1 / (2.0 * curv))
}

/// Polishes each coordinate with parabolic fits through points a fixed
/// fraction of the range apart. In flat directions the compass search can
/// only resolve the maximizer to about `sqrt(machine eps)`; the fit uses
/// value differences well above rounding noise instead.
fn parabolic_polish(f: impl Fn(&[f64; 3]) -> f64, start: [f64; 3], fstart: f64) -> ([f64; 3], f64) {
    let (mut x, mut fx) = (start, fstart);
    for frac in [1e-3, 1e-4] {
        for k in 0..3 {
            let (lo, hi) = BOUNDS[k];
            let h = frac * (hi - lo);
            let c = x[k].clamp(lo + h, hi - h);
            let ts = [c - h, c, c + h];
            let ys = ts.map(|t| {
                let mut y = x;
                y[k] = t;
                f(&y)
            });
            let Some(v) = parabola_vertex(ts, ys) else { continue };
            let mut y = x;
            y[k] = v.clamp(lo, hi);
            let fy = f(&y);
            if fy >= fx - 1e-14 * fx.abs().max(1.0) {
                x = y;
                fx = fy;
            }
        }
    }
    (x, fx)
}

/// Input realizing reduced coordinates through `Phi_{beta_0}`:
/// `(I ⊗ W^dagger)|psi_theta>` with `W = [[a, conj b], [-b, conj a]]`,
/// `a = |a| e^{i phi/2}`, `b = sqrt(1 - |a|^2)`.
pub fn input_for_reduced(rp: &ReducedParams) -> PureState4 {
    let a = Complex64::from_polar(rp.a_mod, rp.phi / 2.0);
    let b = Complex64::new((1.0 - rp.a_mod * rp.a_mod).max(0.0).sqrt(), 0.0);
    let w = CMatrix::from_rows([[a, b.conj()], [-b, a.conj()]]);
    psi_theta(rp.theta).apply_local(&CMatrix::identity(2), &w.adjoint())
}

/// Derivative-free search for the maximal output purity at `order`.
///
/// Takes the best of Haar-random inputs, a lattice over the reduced
/// coordinates, and a compass search started from the best lattice point.
/// Deterministic for a given seed. Requires `lambda` in `(0, 1)` and `mu`
/// in `[0, 1)`.
pub fn numeric_optimize(
    mu: f64,
    lambda: f64,
    order: PurityOrder,
    budget: &Budget,
    seed: u64,
) -> Result<Optimum> {
    check_open_lambda(lambda)?;
    check_range("mu", mu, 0.0, 1.0 - f64::EPSILON, "[0, 1)")?;
    let [nt, np, na] = budget.lattice;
    if budget.random_states == 0 && (nt < 2 || np < 2 || na < 2) {
        return Err(Error::Invalid("budget must include random states or a lattice".into()));
    }
    let regime = classify(mu, lambda)?;
    let params = ChannelParams::with_beta0(mu, lambda)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_random: Option<(f64, PureState4)> = None;
    for _ in 0..budget.random_states {
        let psi = random_pure(&mut rng);
        let s = purity_score(output_spectrum(&params, &psi).values(), order)?;
        if best_random.as_ref().is_none_or(|(b, _)| s > *b) {
            best_random = Some((s, psi));
        }
    }

    let mut best_reduced: Option<(f64, [f64; 3])> = None;
    if nt >= 2 && np >= 2 && na >= 2 {
        let grid = |k: usize, n: usize, i: usize| {
            BOUNDS[k].0 + (BOUNDS[k].1 - BOUNDS[k].0) * i as f64 / (n - 1) as f64
        };
        let mut best = (f64::NEG_INFINITY, [0.0; 3]);
        for i in 0..nt {
            for j in 0..np {
                for k in 0..na {
                    let x = [grid(0, nt, i), grid(1, np, j), grid(2, na, k)];
                    let s = reduced_score(mu, lambda, &x, order);
                    if s > best.0 {
                        best = (s, x);
                    }
                }
            }
        }
        let steps = [
            (BOUNDS[0].1 - BOUNDS[0].0) / (nt - 1) as f64,
            (BOUNDS[1].1 - BOUNDS[1].0) / (np - 1) as f64,
            (BOUNDS[2].1 - BOUNDS[2].0) / (na - 1) as f64,
        ];
        let (x, fx) = pattern_search(
            |x| reduced_score(mu, lambda, x, order),
            best.1,
            steps,
            budget.step_tol,
            budget.max_iters,
        );
        let (x, fx) = parabolic_polish(|x| reduced_score(mu, lambda, x, order), x, fx);
        best_reduced = Some((fx, x));
    }

    let use_reduced = match (&best_random, &best_reduced) {
        (Some((r, _)), Some((g, _))) => g >= r,
        (None, Some(_)) => true,
        _ => false,
    };
    let (witness, theta, reduced) = if use_reduced {
        let x = best_reduced.expect("checked above").1;
        let rp = ReducedParams {
            theta: x[0],
            phi: x[1],
            a_mod: x[2],
        };
        (input_for_reduced(&rp), x[0], Some(rp))
    } else {
        let psi = best_random.expect("checked above").1;
        (psi, schmidt_canonicalize(&psi).theta, None)
    };
    let spectrum = output_spectrum(&params, &witness);
    let value = order_value(spectrum.values(), order)?;
    Ok(Optimum {
        value,
        order,
        theta_opt: theta,
        regime,
        witness,
        spectrum,
        reduced,
    })
}

/// Row of the 2-norm surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig1Row {
    pub mu: f64,
    pub lambda: f64,
    pub p2_norm: f64,
}

/// Row of the optimal-input entanglement surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Row {
    pub mu: f64,
    pub lambda: f64,
    pub mu_c: f64,
    pub theta_opt: f64,
    pub linear_entropy: f64,
    pub vn_entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Random,
    Conjectured,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Random => "random",
            Source::Conjectured => "conjectured",
        })
    }
}

/// One point of the Rényi-entropy scatter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    pub p: PurityOrder,
    pub s_p: f64,
    pub source: Source,
}

fn grid_cells(mus: &[f64], lambdas: &[f64]) -> Vec<(f64, f64)> {
    mus.iter()
        .flat_map(|&m| lambdas.iter().map(move |&l| (m, l)))
        .collect()
}

/// Maximal output 2-norm over a `(mu, lambda)` grid.
pub fn fig1(mus: &[f64], lambdas: &[f64], exec: Exec) -> Result<Vec<Fig1Row>> {
    let cells = grid_cells(mus, lambdas);
    exec.map(cells.len(), |i| {
        let (mu, lambda) = cells[i];
        two_norm_optimum(mu, lambda).map(|o| Fig1Row {
            mu,
            lambda,
            p2_norm: o.value,
        })
    })
    .into_iter()
    .collect()
}

/// Threshold and entanglement of the optimal `p = 2` input over a grid.
/// `lambda` must lie in `(0, 1)`.
pub fn fig2(mus: &[f64], lambdas: &[f64], exec: Exec) -> Result<Vec<Fig2Row>> {
    let cells = grid_cells(mus, lambdas);
    exec.map(cells.len(), |i| {
        let (mu, lambda) = cells[i];
        let mu_c = mu_critical(lambda)?;
        let theta = two_norm_optimum(mu, lambda)?.theta_opt;
        Ok(Fig2Row {
            mu,
            lambda,
            mu_c,
            theta_opt: theta,
            linear_entropy: entanglement_of_theta(theta, EntanglementKind::Linear),
            vn_entropy: entanglement_of_theta(theta, EntanglementKind::VonNeumann),
        })
    })
    .into_iter()
    .collect()
}

/// Rényi entropies of random inputs and of the conjectured optimal input
/// for each order.
pub fn fig3(
    mu: f64,
    lambda: f64,
    orders: &[PurityOrder],
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<Vec<Fig3Row>> {
    let params = ChannelParams::with_beta0(mu, lambda)?;
    let spectra: Vec<Spectrum> = exec.map(trials, |t| {
        let mut rng = cell_rng(seed, t as u64);
        output_spectrum(&params, &random_pure(&mut rng))
    });
    let mut rows = Vec::with_capacity(orders.len() * (trials + 1));
    for &p in orders {
        let conj = conjectured_optimum(mu, lambda, p)?;
        rows.push(Fig3Row {
            p,
            s_p: renyi_spectrum(conj.spectrum.values(), p)?,
            source: Source::Conjectured,
        });
        for s in &spectra {
            rows.push(Fig3Row {
                p,
                s_p: renyi_spectrum(s.values(), p)?,
                source: Source::Random,
            });
        }
    }
    Ok(rows)
}

/// Where the `(mu, lambda)` cells of a sweep come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Cells {
    Grid { mus: Vec<f64>, lambdas: Vec<f64> },
    /// `count` cells with `mu, lambda` uniform in `(0, 1)`, drawn from each
    /// cell's own substream.
    Random { count: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub cells: Cells,
    pub orders: Vec<PurityOrder>,
    /// Random inputs per cell.
    pub trials: usize,
    /// Optional lattice over reduced coordinates searched in every cell.
    pub lattice: Option<[usize; 3]>,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = match &self.cells {
            Cells::Grid { mus, lambdas } => mus.is_empty() || lambdas.is_empty(),
            Cells::Random { count } => *count == 0,
        };
        if empty || self.orders.is_empty() {
            return Err(Error::Invalid("sweep grids must be nonempty".into()));
        }
        if self.trials == 0 && self.lattice.is_none() {
            return Err(Error::Invalid("sweep needs at least one trial per cell".into()));
        }
        Ok(())
    }
}

/// Comparison of the conjectured optimum with the best sampled input.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub mu: f64,
    pub lambda: f64,
    pub p: PurityOrder,
    /// Value of the conjectured optimal input (see [`Optimum::value`]).
    pub conjectured: f64,
    /// Value of the best sampled input, same units.
    pub best_random: f64,
    /// Purity advantage of the best sample; positive means the sample is
    /// purer (larger norm, or smaller entropy).
    pub gap: f64,
    pub violation_flag: bool,
}

/// A sampled input that beat the conjectured optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub mu: f64,
    pub lambda: f64,
    pub p: PurityOrder,
    pub gap: f64,
    pub state: PureState4,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub violations: Vec<Violation>,
    pub max_gap: f64,
}

struct CellResult {
    rows: Vec<ReportRow>,
    violations: Vec<Violation>,
}

fn sweep_cell(spec: &SweepSpec, index: usize, cells: &[(f64, f64)]) -> Result<CellResult> {
    let mut rng = cell_rng(spec.seed, index as u64);
    let (mu, lambda) = match &spec.cells {
        Cells::Grid { .. } => cells[index],
        Cells::Random { .. } => {
            let mu: f64 = rng.random_range(f64::EPSILON..1.0);
            let lambda: f64 = rng.random_range(f64::EPSILON..1.0);
            (mu, lambda)
        }
    };
    let params = ChannelParams::with_beta0(mu, lambda)?;
    let samples: Vec<(PureState4, Spectrum)> = (0..spec.trials)
        .map(|_| {
            let psi = random_pure(&mut rng);
            let s = output_spectrum(&params, &psi);
            (psi, s)
        })
        .collect();

    let mut rows = Vec::with_capacity(spec.orders.len());
    let mut violations = Vec::new();
    for &p in &spec.orders {
        let conj = conjectured_optimum(mu, lambda, p)?;
        let conj_score = purity_score(conj.spectrum.values(), p)?;
        let mut best: Option<(f64, PureState4)> = None;
        for (psi, s) in &samples {
            let sc = purity_score(s.values(), p)?;
            if best.as_ref().is_none_or(|(b, _)| sc > *b) {
                best = Some((sc, *psi));
            }
        }
        if let (Some([nt, np, na]), true) = (spec.lattice, lambda < 1.0 && mu < 1.0) {
            for i in 0..nt.max(2) {
                for j in 0..np.max(2) {
                    for k in 0..na.max(2) {
                        let f = |b: usize, n: usize, t: usize| {
                            BOUNDS[b].0 + (BOUNDS[b].1 - BOUNDS[b].0) * t as f64 / (n.max(2) - 1) as f64
                        };
                        let x = [f(0, nt, i), f(1, np, j), f(2, na, k)];
                        let sc = reduced_score(mu, lambda, &x, p);
                        if best.as_ref().is_none_or(|(b, _)| sc > *b) {
                            let rp = ReducedParams { theta: x[0], phi: x[1], a_mod: x[2] };
                            best = Some((sc, input_for_reduced(&rp)));
                        }
                    }
                }
            }
        }
        let (best_score, best_state) = best.expect("sweep spec validated");
        let gap = best_score - conj_score;
        let flag = gap > VIOLATION_TOL;
        let best_value = match p {
            PurityOrder::VonNeumann => -best_score,
            _ => best_score,
        };
        rows.push(ReportRow {
            mu,
            lambda,
            p,
            conjectured: conj.value,
            best_random: best_value,
            gap,
            violation_flag: flag,
        });
        if flag {
            violations.push(Violation {
                mu,
                lambda,
                p,
                gap,
                state: best_state,
            });
        }
    }
    Ok(CellResult { rows, violations })
}

/// Runs a conjecture sweep. Cells are independent and evaluated by `exec`;
/// row order follows cell index, then order.
pub fn sweep(spec: &SweepSpec, exec: Exec) -> Result<SweepReport> {
    spec.validate()?;
    let (n, cells) = match &spec.cells {
        Cells::Grid { mus, lambdas } => {
            let c = grid_cells(mus, lambdas);
            (c.len(), c)
        }
        Cells::Random { count } => (*count, Vec::new()),
    };
    let results = exec.map(n, |i| sweep_cell(spec, i, &cells));
    let mut report = SweepReport {
        max_gap: f64::NEG_INFINITY,
        ..Default::default()
    };
    for r in results {
        let r = r?;
        for row in &r.rows {
            report.max_gap = report.max_gap.max(row.gap);
        }
        report.rows.extend(r.rows);
        report.violations.extend(r.violations);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert!((mu_critical(0.5).unwrap() - 3.0 / 7.0).abs() <= 1e-15);
        assert!((mu_critical(1.0 / 3.0).unwrap() - 8.0 / 17.0).abs() <= 1e-15);
        assert!(mu_critical(1.0 - 1e-9).unwrap() < 1e-8);
        assert!(mu_critical(0.0).is_err() && mu_critical(1.0).is_err());
        for l in [0.01, 0.3, 0.7, 0.99] {
            let m = mu_critical(l).unwrap();
            assert!(m > 0.0 && m < 0.5);
        }
    }

    #[test]
    fn optimal_angles() {
        assert_eq!(theta_optimal(0.0, 0.5).unwrap(), 0.0);
        let t = theta_optimal(0.25, 0.5).unwrap();
        assert!((t.sin() - 4.0 / 9.0).abs() < 1e-15);
        let mc = mu_critical(0.5).unwrap();
        assert_eq!(theta_optimal(mc, 0.5).unwrap(), FRAC_PI_2);
        assert_eq!(theta_optimal(0.9, 0.5).unwrap(), FRAC_PI_2);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify(0.25, 0.5).unwrap(), Regime::BelowThreshold);
        assert_eq!(classify(0.5, 1.0 / 3.0).unwrap(), Regime::AtOrAbove);
        assert_eq!(classify(0.0, 0.5).unwrap(), Regime::Trivial(TrivialCase::NoCorrelation));
        assert_eq!(classify(1.0, 0.5).unwrap(), Regime::Trivial(TrivialCase::FullCorrelation));
        assert_eq!(classify(0.5, 0.0).unwrap(), Regime::Trivial(TrivialCase::Erasing));
        assert_eq!(classify(0.5, 1.0).unwrap(), Regime::Trivial(TrivialCase::Noiseless));
        assert_eq!(Regime::BelowThreshold.to_string(), "below_threshold");
    }

    #[test]
    fn closed_form_value_matches_witness_spectrum() {
        for &(mu, l) in &[(0.25, 0.5), (0.5, 1.0 / 3.0), (0.1, 0.9), (0.6, 0.2)] {
            let o = two_norm_optimum(mu, l).unwrap();
            let direct = purity_score(o.spectrum.values(), PurityOrder::Finite(2.0)).unwrap();
            assert!((o.value - direct).abs() < 1e-12, "{mu} {l}");
        }
    }

    #[test]
    fn erasing_limit() {
        // lambda -> 0: Tr gamma^2 -> (4 + 12 mu^2)/16
        for mu in [0.1, 0.4, 0.8] {
            let o = two_norm_optimum(mu, 1e-9).unwrap();
            let want = (4.0 + 12.0 * mu * mu) / 16.0;
            assert!((o.value.powi(2) - want).abs() < 1e-9);
            let exact = two_norm_optimum(mu, 0.0).unwrap();
            assert!((exact.value.powi(2) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn witness_of_reduced_point() {
        let rp = ReducedParams::new(0.9, 1.3, 0.4).unwrap();
        let psi = input_for_reduced(&rp);
        let (mu, l) = (0.3, 0.6);
        let p = ChannelParams::with_beta0(mu, l).unwrap();
        let full = output_spectrum(&p, &psi);
        let red = reduced_output_spectrum(mu, l, &rp).unwrap();
        assert!(full.max_abs_diff(&red) < 1e-12);
    }

    #[test]
    fn numeric_is_deterministic() {
        let b = Budget {
            random_states: 20,
            lattice: [5, 4, 5],
            ..Budget::default()
        };
        let o1 = numeric_optimize(0.2, 0.4, PurityOrder::Finite(3.0), &b, 5).unwrap();
        let o2 = numeric_optimize(0.2, 0.4, PurityOrder::Finite(3.0), &b, 5).unwrap();
        assert_eq!(o1.value, o2.value);
        assert_eq!(o1.witness, o2.witness);
    }

    #[test]
    fn sweep_spec_validation() {
        let spec = SweepSpec {
            cells: Cells::Random { count: 0 },
            orders: vec![PurityOrder::Finite(2.0)],
            trials: 1,
            lattice: None,
            seed: 0,
        };
        assert!(sweep(&spec, Exec::Sequential).is_err());
    }
}
