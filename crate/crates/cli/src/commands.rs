use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use corrchan::io::{parse_real, resolve_state, BetaLiteral, StateLiteral, NAMED_STATES};
use corrchan::io::named_state;
use corrchan::optimize::{fig1, fig2, fig3, sweep, Cells, SweepSpec};
use corrchan::purity::{p_norm_spectrum, renyi_spectrum};
use corrchan::states::{entanglement, pauli, EntanglementKind};
use corrchan::verify::{run_suite, Suite, SuiteReport, VerifyConfig};
use corrchan::{
    apply_channel, conjectured_optimum, mu_critical, numeric_optimize, two_norm_optimum, Budget,
    ChannelParams, DensityMatrix4, Exec, MaxEntangled, Optimum, PureState4, PurityOrder,
};
use serde::Serialize;
use serde_json::json;

use crate::output::{out_path, write_json, write_rows, PanelRow};
use crate::{CheckArgs, FigureArgs, Figure, Format, Method, NormArgs, OptimizeArgs, VerifyArgs};

/// `println!` that ends the process quietly once the reader of stdout goes away.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($t)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }};
}

const DEFAULT_P_GRID: &str = "1.1,1.5,2,3,5,inf";
const FIG3_P_GRID: &str = "1.1,1.25,1.5,2,2.5,3,4,5,7,10,inf";
const FIG3_PANELS: [(f64, f64); 2] = [(0.25, 0.5), (0.5, 1.0 / 3.0)];

fn real(name: &str, v: Option<&str>) -> Result<f64> {
    let s = v.ok_or_else(|| anyhow!("--{name} is required"))?;
    parse_real(s).with_context(|| format!("--{name}"))
}

fn reals(name: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| parse_real(x).with_context(|| format!("--{name}")))
        .collect()
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma list.
fn grid(name: &str, s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [a, b, n] => {
            let (a, b) = (parse_real(a)?, parse_real(b)?);
            let n: usize = n.trim().parse().with_context(|| format!("--{name}: count '{n}'"))?;
            match n {
                0 => bail!("--{name}: empty grid"),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        [_] => reals(name, s),
        _ => bail!("--{name}: expected start:stop:count or a comma list, got '{s}'"),
    }
}

fn order(s: &str) -> Result<PurityOrder> {
    s.parse().with_context(|| "--p".to_string())
}

fn orders(name: &str, s: &str) -> Result<Vec<PurityOrder>> {
    s.split(',')
        .map(|x| x.parse().with_context(|| format!("--{name}")))
        .collect()
}

fn lattice(s: &str) -> Result<Option<[usize; 3]>> {
    if s.trim() == "none" {
        return Ok(None);
    }
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("--lattice '{s}'"))?;
    match v[..] {
        [a, b, c] if a > 0 && b > 0 && c > 0 => Ok(Some([a, b, c])),
        _ => bail!("--lattice takes three positive sizes, got '{s}'"),
    }
}

fn beta(s: &str) -> Result<MaxEntangled> {
    let named = match s {
        "beta0" | "bell0" => Some(0),
        "bell1" => Some(1),
        "bell2" | "singlet" => Some(2),
        "bell3" => Some(3),
        _ => None,
    };
    if let Some(k) = named {
        return Ok(MaxEntangled::new(pauli(k))?);
    }
    let lit: BetaLiteral = serde_json::from_str(s)
        .with_context(|| format!("--beta '{s}' is not a Bell name or a JSON unitary"))?;
    Ok(lit.to_beta()?)
}

fn state_name(psi: &PureState4) -> Option<&'static str> {
    NAMED_STATES
        .iter()
        .find(|n| named_state(n).is_some_and(|s| s.distance_up_to_phase(psi) < 1e-9))
        .copied()
}

fn num(x: f64) -> String {
    corrchan::io::fmt12(x + 0.0)
}

fn nums(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(" ")
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

pub fn norm(a: &NormArgs) -> Result<ExitCode> {
    let mu = real("mu", a.mu.as_deref())?;
    let lambda = match a.lambda.as_deref() {
        Some(s) => parse_real(s).context("--lambda")?,
        // the output is |beta> whatever lambda is
        None if mu == 1.0 => 1.0,
        None => bail!("--lambda is required unless --mu is 1"),
    };
    let p = order(a.p.as_deref().unwrap_or("2"))?;
    let input = a.input.as_deref().ok_or_else(|| anyhow!("--input is required"))?;
    let psi = resolve_state(input).with_context(|| format!("--input '{input}'"))?;
    let b = beta(a.beta.as_deref().unwrap_or("beta0"))?;
    let params = ChannelParams::new(mu, lambda, b)?;

    let spectrum = apply_channel(&params, &DensityMatrix4::pure(&psi)).spectrum();
    let value = p_norm_spectrum(spectrum.values(), p)?;
    let entropy = renyi_spectrum(spectrum.values(), p)?;
    if a.json {
        print_json(&json!({
            "mu": mu, "lambda": lambda, "p": p,
            "norm": value, "renyi_entropy": entropy, "spectrum": spectrum,
        }))?;
    } else {
        out!("p         {p}");
        out!("norm      {}", num(value));
        out!("entropy   {}", num(entropy));
        out!("spectrum  {}", nums(spectrum.values()));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OptimumReport {
    method: &'static str,
    mu: f64,
    lambda: f64,
    p: PurityOrder,
    mu_c: Option<f64>,
    regime: String,
    value: f64,
    theta_opt: f64,
    witness: StateLiteral,
    witness_name: Option<&'static str>,
    linear_entanglement: f64,
    vn_entanglement: f64,
    spectrum: Vec<f64>,
}

impl OptimumReport {
    fn new(method: &'static str, mu: f64, lambda: f64, o: &Optimum) -> Self {
        let w = o.witness.canonical_phase();
        OptimumReport {
            method,
            mu,
            lambda,
            p: o.order,
            mu_c: mu_critical(lambda).ok(),
            regime: o.regime.to_string(),
            value: o.value,
            theta_opt: o.theta_opt,
            witness: StateLiteral::from_state(&w),
            witness_name: state_name(&w),
            linear_entanglement: entanglement(&w, EntanglementKind::Linear),
            vn_entanglement: entanglement(&w, EntanglementKind::VonNeumann),
            spectrum: o.spectrum.values().to_vec(),
        }
    }

    fn print(&self, indent: &str) {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), num);
        out!("{indent}method        {}", self.method);
        out!("{indent}p             {}", self.p);
        out!("{indent}mu_c          {}", opt(self.mu_c));
        out!("{indent}regime        {}", self.regime);
        out!("{indent}value         {}", num(self.value));
        out!("{indent}theta_opt     {}", num(self.theta_opt));
        let amps: Vec<String> = self
            .witness
            .amplitudes
            .iter()
            .map(|[re, im]| format!("{}{:+}i", num(*re), num(*im).parse::<f64>().unwrap_or(*im)))
            .collect();
        out!(
            "{indent}witness       [{}]{}",
            amps.join(", "),
            self.witness_name.map(|n| format!(" ({n})")).unwrap_or_default()
        );
        out!("{indent}entanglement  linear {} von_neumann {}", num(self.linear_entanglement), num(self.vn_entanglement));
        out!("{indent}spectrum      {}", nums(&self.spectrum));
    }
}

pub fn optimize(a: &OptimizeArgs) -> Result<ExitCode> {
    let mu = real("mu", a.mu.as_deref())?;
    let lambda = real("lambda", a.lambda.as_deref())?;
    let p = order(a.p.as_deref().unwrap_or("2"))?;
    let method = a.method.unwrap_or(Method::Analytic);
    let mut budget = Budget::default();
    if let Some(n) = a.budget {
        budget.random_states = n;
    }
    if let Some(s) = a.lattice.as_deref() {
        budget.lattice = lattice(s)?.ok_or_else(|| anyhow!("--lattice none is not allowed here"))?;
    }
    let seed = a.seed.unwrap_or(0);
    ChannelParams::with_beta0(mu, lambda)?;

    let analytic = || -> Result<OptimumReport> {
        let o = match p {
            PurityOrder::Finite(2.0) => two_norm_optimum(mu, lambda)?,
            PurityOrder::Infinity | PurityOrder::VonNeumann => conjectured_optimum(mu, lambda, p)?,
            PurityOrder::Finite(_) => bail!(
                "no closed form for p = {p}: the analytic method covers p = 2 exactly and \
                 p = inf or entropy through the conjectured optimum; use --method numeric"
            ),
        };
        let label = if matches!(p, PurityOrder::Finite(_)) { "analytic" } else { "conjectured" };
        Ok(OptimumReport::new(label, mu, lambda, &o))
    };
    let numeric = || -> Result<OptimumReport> {
        let o = numeric_optimize(mu, lambda, p, &budget, seed)
            .context("numeric search needs lambda in (0, 1) and mu in [0, 1)")?;
        Ok(OptimumReport::new("numeric", mu, lambda, &o))
    };

    match method {
        Method::Analytic => {
            let r = analytic()?;
            if a.json { print_json(&r)? } else { r.print("") }
        }
        Method::Numeric => {
            let r = numeric()?;
            if a.json { print_json(&r)? } else { r.print("") }
        }
        Method::Both => {
            let (x, y) = (analytic()?, numeric()?);
            let gap = y.value - x.value;
            if a.json {
                print_json(&json!({ "analytic": x, "numeric": y, "gap": gap }))?;
            } else {
                out!("analytic:");
                x.print("  ");
                out!("numeric:");
                y.print("  ");
                out!("gap           {}", num(gap));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn figures(a: &FigureArgs, exec: Exec) -> Result<ExitCode> {
    let which = a.which.ok_or_else(|| anyhow!("figure name required: fig1, fig2 or fig3"))?;
    let format = a.format.unwrap_or(Format::Csv);
    let stem = match which {
        Figure::Fig1 => "fig1",
        Figure::Fig2 => "fig2",
        Figure::Fig3 => "fig3",
    };
    let path = out_path(a.out.as_deref(), stem, format);
    let n = match which {
        Figure::Fig1 | Figure::Fig2 => {
            let (dm, dl) = if which == Figure::Fig1 {
                ("0:1:51", "0:1:51")
            } else {
                ("0:1:101", "0.05:0.95:19")
            };
            let mus = grid("mu-grid", a.mu_grid.as_deref().unwrap_or(dm))?;
            let lambdas = grid("lambda-grid", a.lambda_grid.as_deref().unwrap_or(dl))?;
            if which == Figure::Fig1 {
                write_rows(&path, &fig1(&mus, &lambdas, exec)?, format)?
            } else {
                write_rows(&path, &fig2(&mus, &lambdas, exec)?, format)?
            }
        }
        Figure::Fig3 => {
            let panels = match (a.mu.as_deref(), a.lambda.as_deref()) {
                (Some(m), Some(l)) => vec![(parse_real(m).context("--mu")?, parse_real(l).context("--lambda")?)],
                (None, None) => FIG3_PANELS.to_vec(),
                _ => bail!("fig3 takes --mu and --lambda together"),
            };
            let ps = orders("p-grid", a.p_grid.as_deref().unwrap_or(FIG3_P_GRID))?;
            let trials = a.trials.unwrap_or(500);
            let seed = a.seed.unwrap_or(0);
            let mut rows = Vec::new();
            for (mu, lambda) in panels {
                for row in fig3(mu, lambda, &ps, trials, seed, exec)? {
                    rows.push(PanelRow { mu, lambda, row });
                }
            }
            write_rows(&path, &rows, format)?
        }
    };
    out!("wrote {n} rows to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: &VerifyArgs, exec: Exec) -> Result<ExitCode> {
    let suites: Vec<Suite> = if a.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suites
            .iter()
            .map(|s| s.parse::<Suite>())
            .collect::<Result<_, _>>()?
    };
    let defaults = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: a.seed.unwrap_or(defaults.seed),
        samples: a.trials.unwrap_or(defaults.samples),
        exec,
    };
    if cfg.samples == 0 {
        bail!("--trials must be at least 1");
    }
    let reports: Vec<SuiteReport> = suites
        .iter()
        .map(|s| run_suite(*s, &cfg))
        .collect::<Result<_, _>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let summary = json!({
        "passed": passed, "seed": cfg.seed, "trials": cfg.samples, "suites": reports,
    });

    eprintln!("{:<14} {:<44} {:>12} {:>10} {:>7}  result", "suite", "check", "metric", "tolerance", "cases");
    for r in &reports {
        for c in &r.checks {
            eprintln!(
                "{:<14} {:<44} {:>12.3e} {:>10.0e} {:>7}  {}",
                r.suite.to_string(),
                c.name,
                c.metric,
                c.tolerance,
                c.cases,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
    }
    print_json(&summary)?;
    if let Some(p) = &a.out {
        write_json(p, &summary)?;
    }
    if passed {
        return Ok(ExitCode::SUCCESS);
    }
    let first = reports.iter().flat_map(|r| r.checks.iter()).find(|c| !c.passed);
    if let Some(c) = first {
        eprintln!(
            "first failure: {} (metric {:e} > {:e}); counterexample: {}",
            c.name,
            c.metric,
            c.tolerance,
            c.counterexample.as_ref().map_or("none".to_string(), |v| v.to_string())
        );
    }
    Ok(ExitCode::from(1))
}

pub fn check_conjecture(a: &CheckArgs, exec: Exec) -> Result<ExitCode> {
    let cells = match (a.mu.as_deref(), a.lambda.as_deref()) {
        (Some(m), Some(l)) => Cells::Grid {
            mus: reals("mu", m)?,
            lambdas: reals("lambda", l)?,
        },
        (None, None) => Cells::Random {
            count: a.cells.unwrap_or(2000),
        },
        _ => bail!("--mu and --lambda go together"),
    };
    let per_cell = a.per_cell.unwrap_or(50);
    if per_cell == 0 || a.cells == Some(0) {
        bail!("--cells and --per-cell must be at least 1");
    }
    let spec = SweepSpec {
        cells,
        orders: orders("p-grid", a.p_grid.as_deref().unwrap_or(DEFAULT_P_GRID))?,
        trials: per_cell,
        lattice: lattice(a.lattice.as_deref().unwrap_or("7,5,7"))?,
        seed: a.seed.unwrap_or(0),
    };
    spec.validate()?;
    let format = a.format.unwrap_or(Format::Csv);
    let path = out_path(a.out.as_deref(), "conjecture", format);

    let report = sweep(&spec, exec)?;
    write_rows(&path, &report.rows, format)?;
    let violations: Vec<_> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "mu": v.mu, "lambda": v.lambda, "p": v.p, "gap": v.gap,
                "state": StateLiteral::from_state(&v.state),
            })
        })
        .collect();
    print_json(&json!({
        "rows": report.rows.len(),
        "report": path.display().to_string(),
        "max_gap": report.max_gap,
        "violations": violations,
    }))?;
    Ok(ExitCode::SUCCESS)
}
