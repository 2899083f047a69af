//! Self-check suites behind `corrchan verify`. Each suite returns named
//! checks with a metric, the tolerance it was held to, and the first
//! counterexample when a check fails.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{
    boundary_table, identity_check_sums, lemma_p_shift, lemma_q_shift, loglog_slope,
    majorization_check, optimal_eigenvalue_table, perturb_eigen_scan, root_shift_predict,
    shifted_cubic_roots, summarize_scan, unit_block_matrix_check, trumping_scan, Claim, ScanGrid,
};
use crate::channels::{apply_channel, covariance_transport, output_spectrum, ChannelParams, DensityMatrix4};
use crate::error::{Error, Result};
use crate::exec::{cell_rng, Exec};
use crate::linalg::{CMatrix, Spectrum, C64};
use crate::optimize::two_norm_optimum;
use crate::purity::{decoupled_eigenvalue, ReducedParams};
use crate::states::{random_pure, random_unitary2, MaxEntangled, PureState4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Covariance,
    Majorization,
    Tables,
    Perturbation,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemmas,
        Suite::Covariance,
        Suite::Majorization,
        Suite::Tables,
        Suite::Perturbation,
    ];
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemmas => "lemmas",
            Suite::Covariance => "covariance",
            Suite::Majorization => "majorization",
            Suite::Tables => "tables",
            Suite::Perturbation => "perturbation",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub metric: f64,
    pub tolerance: f64,
    /// Number of cases examined.
    pub cases: usize,
    pub counterexample: Option<Value>,
}

impl Check {
    /// Passes when `metric <= tolerance`.
    fn at_most(name: &str, metric: f64, tolerance: f64, cases: usize, cx: Option<Value>) -> Self {
        let passed = metric <= tolerance;
        Check {
            name: name.into(),
            passed,
            metric,
            tolerance,
            cases,
            counterexample: if passed { None } else { cx },
        }
    }

    /// Passes when `failures == 0`; the metric is the failure count.
    fn no_failures(name: &str, failures: usize, cases: usize, cx: Option<Value>) -> Self {
        Self::at_most(name, failures as f64, 0.0, cases, cx)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random draws for sampled checks.
    pub samples: usize,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 10_000,
            exec: Exec::default(),
        }
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Lemmas => lemmas(cfg)?,
        Suite::Covariance => covariance(cfg)?,
        Suite::Majorization => majorization(cfg)?,
        Suite::Tables => tables()?,
        Suite::Perturbation => perturbation(cfg)?,
    };
    Ok(SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn random_triple(rng: &mut impl Rng, min_gap: f64) -> [f64; 3] {
    let v3: f64 = rng.random_range(0.05..1.0);
    let v2 = v3 + rng.random_range(min_gap..1.0);
    let v1 = v2 + rng.random_range(min_gap..1.0);
    [v1, v2, v3]
}

/// Orders avoiding a neighbourhood of `p = 2`, where the second lemma's
/// first-order term vanishes.
fn random_order(rng: &mut impl Rng) -> f64 {
    if rng.random_bool(0.5) {
        rng.random_range(1.05..1.95)
    } else {
        rng.random_range(2.05..10.0)
    }
}

/// Error slope of the first-order root shift for one root set, with
/// `delta_i = eps c_i g^3` (`g` the smallest root gap) and `eps` in
/// `1e-2 .. 1e-5`.
pub fn root_shift_slope(r: [f64; 3], c1: f64, c2: f64) -> Result<f64> {
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let g = (r[0] - r[1]).abs().min((r[1] - r[2]).abs());
    let k = g * g * g;
    let mut errs = Vec::with_capacity(eps.len());
    for &e in &eps {
        let pred = root_shift_predict(r, c1 * e * k, c2 * e * k)?.predicted;
        let exact = shifted_cubic_roots(r, c1 * e * k, c2 * e * k)?;
        let err = (0..3).map(|k| (pred[k] - exact[k]).abs()).fold(0.0, f64::max);
        errs.push(err);
    }
    loglog_slope(&eps, &errs)
}

fn lemmas(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.samples.max(1);

    let mut worst_sum = 0.0f64;
    let mut worst_sum_at = None;
    for _ in 0..n {
        let r = random_triple(&mut rng, 1e-3);
        let (a, b) = identity_check_sums(r)?;
        let scale = r[0].max(1.0);
        let m = a.abs().max(b.abs() / scale);
        if m > worst_sum {
            worst_sum = m;
            worst_sum_at = Some(json!({ "r": r, "sums": [a, b] }));
        }
    }

    let slopes_n = n.min(200);
    let mut worst_slope = 0.0f64;
    let mut slope_cx = None;
    for _ in 0..slopes_n {
        let r = random_triple(&mut rng, 0.2);
        let c1 = rng.random_range(0.5..1.5);
        let c2 = rng.random_range(0.5..1.5);
        let s = root_shift_slope(r, c1, c2)?;
        if (s - 2.0).abs() > worst_slope {
            worst_slope = (s - 2.0).abs();
            slope_cx = Some(json!({ "roots": r, "delta_per_eps": [c1, c2], "slope": s }));
        }
    }

    let mut p_fail = 0;
    let mut q_fail = 0;
    let mut sum_drift = 0.0f64;
    let mut lemma_cx = None;
    for _ in 0..n {
        let v = random_triple(&mut rng, 0.05);
        let g = (v[0] - v[1]).min(v[1] - v[2]);
        let eps = 1e-3 * g * g * 10f64.powf(-rng.random_range(0.0..6.0));
        let p = random_order(&mut rng);
        let a = lemma_p_shift(v, eps)?;
        let b = lemma_q_shift(v, eps)?;
        sum_drift = sum_drift.max(a.sum_change().abs() / eps).max(b.sum_change().abs() / eps);
        let dp = a.norm_change(p);
        let dq = b.norm_change(p);
        let ok_q = if p > 2.0 { dq > 0.0 } else { dq < 0.0 };
        if dp <= 0.0 {
            p_fail += 1;
        }
        if !ok_q {
            q_fail += 1;
        }
        if (dp <= 0.0 || !ok_q) && lemma_cx.is_none() {
            lemma_cx = Some(json!({ "v": v, "eps": eps, "p": p, "p_change": dp, "q_change": dq }));
        }
    }

    Ok(vec![
        Check::at_most("sum_identities", worst_sum, 1e-9, n, worst_sum_at),
        Check::at_most("root_shift_slope", worst_slope, 0.2, slopes_n, slope_cx),
        Check::at_most("lemma_sum_preserved", sum_drift, 1e-9, n, None),
        Check::no_failures("lemma_p_sign", p_fail, n, lemma_cx.clone()),
        Check::no_failures("lemma_q_sign", q_fail, n, lemma_cx),
    ])
}

/// A random full-rank density matrix: a random mixture of four Haar states.
pub fn random_density(rng: &mut impl Rng) -> DensityMatrix4 {
    let w: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut m = CMatrix::zeros(4);
    for wi in &w {
        let p = random_pure(rng).projector();
        m = &m + &(&p * (wi / total));
    }
    DensityMatrix4::new(m).expect("convex mixture of projectors")
}

fn random_channel(rng: &mut impl Rng) -> Result<ChannelParams> {
    let mu = rng.random_range(0.0..1.0);
    let lambda = rng.random_range(-1.0 / 3.0..1.0);
    ChannelParams::new(mu, lambda, MaxEntangled::new(random_unitary2(rng))?)
}

fn covariance(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let n = cfg.samples.clamp(1, 1000);
    let results = cfg.exec.map(n, |i| -> Result<(f64, f64, f64, Value)> {
        let mut rng = cell_rng(cfg.seed, i as u64);
        let params = random_channel(&mut rng)?;
        let u = random_unitary2(&mut rng);
        let v = random_unitary2(&mut rng);
        let rho = random_density(&mut rng);
        let (lhs, beta) = covariance_transport(&params, &u, &v, &rho)?;
        let moved = ChannelParams::new(params.mu(), params.lambda(), beta)?;
        let rhs = apply_channel(&moved, &rho);
        let transport = lhs.spectrum().max_abs_diff(&rhs.spectrum());

        let singlet = MaxEntangled::new(CMatrix::from_rows([
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
        ]))?;
        let sp = ChannelParams::new(params.mu(), params.lambda(), singlet)?;
        let uu = u.kron(&u);
        let rotated = DensityMatrix4::new(rho.matrix().conjugate_by(&uu))?;
        let a = apply_channel(&sp, &rotated).spectrum();
        let b = apply_channel(&sp, &rho).spectrum();
        let singlet_err = a.max_abs_diff(&b);

        // every pure input keeps the decoupled eigenvalue
        let psi = random_pure(&mut rng);
        let (mu, lambda) = (params.mu(), params.lambda());
        let s = output_spectrum(&params, &psi);
        let d = decoupled_eigenvalue(mu, lambda);
        let dec = s.values().iter().map(|x| (x - d).abs()).fold(f64::INFINITY, f64::min);

        let cx = json!({ "index": i, "mu": mu, "lambda": lambda });
        Ok((transport, singlet_err, dec, cx))
    });
    let mut worst = [0.0f64; 3];
    let mut cx: [Option<Value>; 3] = [None, None, None];
    for r in results {
        let (a, b, c, x) = r?;
        for (k, v) in [a, b, c].into_iter().enumerate() {
            if v > worst[k] {
                worst[k] = v;
                cx[k] = Some(x.clone());
            }
        }
    }
    let [c0, c1, c2] = cx;
    Ok(vec![
        Check::at_most("local_unitary_transport", worst[0], 1e-10, n, c0),
        Check::at_most("singlet_uu_covariance", worst[1], 1e-10, n, c1),
        Check::at_most("decoupled_eigenvalue", worst[2], 1e-10, n, c2),
    ])
}

/// Output spectra of `|beta_0>`-optimal input and of `|+i>|+i>`.
pub fn example_pair(mu: f64, lambda: f64) -> Result<(Spectrum, Spectrum)> {
    let params = ChannelParams::with_beta0(mu, lambda)?;
    let opt = two_norm_optimum(mu, lambda)?;
    let h = 0.5;
    let product = PureState4::new([
        C64::new(h, 0.0),
        C64::new(0.0, h),
        C64::new(0.0, h),
        C64::new(-h, 0.0),
    ])?;
    Ok((output_spectrum(&params, &product), opt.spectrum))
}

fn majorization(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (label, mu, lambda) in [("example_above", 0.5, 1.0 / 3.0), ("example_below", 0.25, 0.5)] {
        let (x, y) = example_pair(mu, lambda)?;
        let rep = majorization_check(x.values(), y.values())?;
        let cx = json!({
            "product": x, "optimal": y,
            "first_violation": rep.first_violation,
            "first_norm_violation": rep.first_norm_violation,
        });
        checks.push(Check {
            name: format!("{label}_not_majorized"),
            passed: !rep.majorized && rep.first_violation.is_some(),
            metric: rep.majorized as u8 as f64,
            tolerance: 0.0,
            cases: 1,
            counterexample: Some(cx.clone()),
        });
        checks.push(Check {
            name: format!("{label}_p_dominated"),
            passed: rep.p_dominated,
            metric: (!rep.p_dominated) as u8 as f64,
            tolerance: 0.0,
            cases: 1,
            counterexample: if rep.p_dominated { None } else { Some(cx) },
        });
        let d = decoupled_eigenvalue(mu, lambda);
        let drop_one = |s: &Spectrum| -> Vec<f64> {
            let mut v = s.values().to_vec();
            if let Some(i) = v.iter().position(|x| (x - d).abs() < 1e-12) {
                v.remove(i);
            }
            v
        };
        let t = trumping_scan(&drop_one(&x), &drop_one(&y), 6)?;
        checks.push(Check {
            name: format!("{label}_reduced_no_finite_catalyst"),
            passed: t.catalyst.is_none(),
            metric: t.catalyst.is_some() as u8 as f64,
            tolerance: 0.0,
            cases: t.searched,
            counterexample: t.catalyst.map(|z| json!({ "catalyst": z })),
        });
    }

    // Ky Fan: weak majorization implies p-dominance
    let n = cfg.samples.clamp(1, 2000);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6b79);
    let mut fails = 0;
    let mut weak = 0;
    let mut cx = None;
    for _ in 0..n {
        let mu = rng.random_range(0.0..1.0);
        let lambda = rng.random_range(0.0..1.0);
        let params = ChannelParams::with_beta0(mu, lambda)?;
        let x = output_spectrum(&params, &random_pure(&mut rng));
        let y = output_spectrum(&params, &random_pure(&mut rng));
        let r = majorization_check(x.values(), y.values())?;
        if r.weakly_majorized {
            weak += 1;
            if !r.p_dominated {
                fails += 1;
                cx.get_or_insert(json!({ "x": x, "y": y }));
            }
        }
        if r.majorized && !r.weakly_majorized {
            fails += 1;
            cx.get_or_insert(json!({ "x": x, "y": y }));
        }
    }
    checks.push(Check::no_failures("ky_fan_consistency", fails, weak, cx));
    Ok(checks)
}

fn tables() -> Result<Vec<Check>> {
    let mus = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
    let lambdas = [0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 0.95];
    let thetas: Vec<f64> = (0..=8).map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / 8.0).collect();
    let mut worst = 0.0f64;
    let mut worst_cx = None;
    let mut arrow_fail = 0;
    let mut arrow_cx = None;
    let mut largest_fail = 0;
    let mut cases = 0;
    for &mu in &mus {
        for &lambda in &lambdas {
            for &theta in &thetas {
                let row = boundary_table(mu, lambda, theta)?;
                cases += 1;
                if row.solver_error > worst {
                    worst = row.solver_error;
                    worst_cx = Some(json!(row));
                }
                if !(row.top_up && row.middle_down) {
                    arrow_fail += 1;
                    arrow_cx.get_or_insert(json!(row));
                }
                if !row.largest_up {
                    largest_fail += 1;
                }
            }
        }
    }

    let mut opt_err = 0.0f64;
    let mut opt_cx = None;
    let mut opt_cases = 0;
    for &mu in &mus {
        for &lambda in &lambdas {
            let table = optimal_eigenvalue_table(mu, lambda)?;
            let spec = two_norm_optimum(mu, lambda)?.spectrum;
            let e = Spectrum::from_unsorted(table.to_vec()).max_abs_diff(&spec);
            opt_cases += 1;
            if e > opt_err {
                opt_err = e;
                opt_cx = Some(json!({ "mu": mu, "lambda": lambda, "table": table, "solver": spec }));
            }
        }
    }

    let mut t3_err = 0.0f64;
    let mut t3_mono_fail = 0;
    let mut t3_cases = 0;
    for &mu in &mus {
        for &lambda in &lambdas {
            let mut prev_top = f64::NEG_INFINITY;
            for k in 0..=10 {
                let a = (k as f64 / 10.0).sqrt();
                let c = unit_block_matrix_check(mu, lambda, a)?;
                t3_err = t3_err.max(c.max_error);
                if c.solver.max() <= prev_top {
                    t3_mono_fail += 1;
                }
                prev_top = c.solver.max();
                t3_cases += 1;
            }
        }
    }

    Ok(vec![
        Check::at_most("boundary_closed_forms", worst, 1e-10, cases, worst_cx),
        Check::no_failures("boundary_arrows", arrow_fail, cases, arrow_cx),
        Check::no_failures("boundary_largest_eigenvalue_up", largest_fail, cases, None),
        Check::at_most("optimal_eigenvalue_table", opt_err, 1e-12, opt_cases, opt_cx),
        Check::at_most("unit_sine_closed_form", t3_err, 1e-10, t3_cases, None),
        Check::no_failures("unit_sine_top_increasing", t3_mono_fail, t3_cases, None),
    ])
}

/// Ratio of measured to predicted eigenvalue shifts as `eps -> 0` at a
/// fixed generic point; returns the worst `|ratio - 1|` at the smallest
/// `eps` and the fitted error slope.
pub fn shift_convergence() -> Result<(f64, f64)> {
    use crate::purity::{delta_spectrum, ReducedTerms};
    let (mu, lambda) = (0.3, 0.5);
    let rp = ReducedParams::new(0.8, 0.9, 0.6)?;
    let t = ReducedTerms::new(mu, lambda, &rp)?;
    let v = delta_spectrum(mu, lambda, &rp)?;
    let v: [f64; 3] = v.values().try_into().expect("3 eigenvalues");
    let l2 = lambda * lambda;
    let eps_list = [1e-2, 1e-3, 1e-4, 1e-5];
    let mut errs = Vec::new();
    let mut ratio_dev = 0.0;
    for &eps in &eps_list {
        let d1 = eps * t.m * (2.0 * l2 + t.cos_phi * lambda * t.s);
        let d2 = eps * t.m * (1.0 - l2) * (2.0 * l2 - t.cos_phi * lambda * t.s - t.s * t.s);
        let pred = root_shift_predict(v, d1, d2)?.predicted;
        let q = ReducedParams::new(rp.theta, rp.phi, (rp.a_mod.powi(2) + eps).sqrt())?;
        let w = delta_spectrum(mu, lambda, &q)?;
        let w = w.values();
        errs.push((0..3).map(|k| (pred[k] - w[k]).abs()).fold(0.0, f64::max));
        ratio_dev = (0..3)
            .map(|k| ((w[k] - v[k]) / (pred[k] - v[k]) - 1.0).abs())
            .fold(0.0, f64::max);
    }
    Ok((ratio_dev, loglog_slope(&eps_list, &errs)?))
}

fn perturbation(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let reports = perturb_eigen_scan(&ScanGrid::default(), cfg.exec)?;
    let s = summarize_scan(&reports);
    let mut checks = vec![Check::no_failures(
        "first_order_sign_agreement",
        s.sign_reliable - s.sign_agree,
        s.sign_reliable,
        None,
    )];
    for t in &s.claims {
        let claim = t.claim.expect("tallies carry a claim");
        let name = match claim {
            Claim::CosPhiSmallP => "cos_phi_increases_norm_p_le_2",
            Claim::AbsA2SmallP => "abs_a_increases_norm_p_lt_2_large_theta",
            Claim::AbsA2LargeP => "abs_a_increases_norm_p_gt_2_small_theta",
            Claim::TopEigenvalue => "top_eigenvalue_increases",
        };
        let resolved = t.points - t.unreliable - t.unresolved;
        let cx = s
            .first_failure
            .as_ref()
            .filter(|f| f.claim == Some(claim))
            .map(|f| json!(f));
        checks.push(Check::no_failures(name, resolved - t.holds, resolved, cx));
    }
    let (ratio, slope) = shift_convergence()?;
    checks.push(Check::at_most("shift_ratio_convergence", ratio, 0.05, 4, None));
    checks.push(Check::at_most("shift_error_slope", (slope - 2.0).abs(), 0.2, 4, None));
    Ok(checks)
}
