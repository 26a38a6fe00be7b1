//! Running a scenario: solvers, witnesses and the table of results.

use pmme_core::linalg;
use pmme_core::models::{appendix_state, f1, f2, AmplitudeDampingParams, DephasingParams};
use pmme_core::solver::{cp_min_eigenvalue, evolve, solve_volterra, XiMethod, XiSet};
use pmme_core::witnesses::{
    blp_aggregate, default_pair_sampler, divisibility_report, sigma_trace, windows_where, BACKFLOW_TOL, RATE_MASK_TOL,
};

use crate::config::{ModelSpec, Scenario};
use crate::report::*;

/// Choi eigenvalues below `−CP_TOL` count as CP violations.
pub const CP_TOL: f64 = 1e-10;
/// Rates below `−RATE_TOL` count as negative.
pub const RATE_TOL: f64 = 1e-6;
/// Allowed trace defect of evolved states before the run is aborted.
pub const STATE_TRACE_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("solver failure: {0}")]
    Solver(#[from] pmme_core::Error),
    #[error("invariant breach: {0}")]
    Invariant(String),
}

/// One column of the results table; `None` entries are masked.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub times: Vec<f64>,
    /// `f`, `dfdt`, then the enabled witnesses.
    pub columns: Vec<Column>,
}

impl RunOutput {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

fn window_list(w: Vec<(f64, f64)>) -> Vec<Window> {
    w.into_iter().map(|(a, b)| [a, b]).collect()
}

/// Index of the non-stationary eigenvalue with the fastest decay, whose `ξ`
/// is reported as the coherence factor. For dephasing this is `ξ` at `−a`;
/// for amplitude damping it is the population factor.
fn coherence_index(xis: &XiSet) -> usize {
    let ev = xis.basis().eigenvalues();
    (0..ev.len())
        .filter(|&i| ev[i].norm() > 0.0)
        .min_by(|&i, &j| ev[i].re.total_cmp(&ev[j].re).then(i.cmp(&j)))
        .unwrap_or(0)
}

/// `(f, f′)` on the grid; `f′` by central differences with step
/// `min(spacing, 1e-4)`, second-order one-sided at `t < h`.
fn coherence_columns(
    xis: &XiSet,
    index: usize,
    times: &[f64],
    spacing: f64,
) -> pmme_core::Result<(Vec<f64>, Vec<f64>)> {
    let h = spacing.min(1e-4);
    let f = |t: f64| xis.eval_index(index, t).map(|z| z.re);
    let mut values = Vec::with_capacity(times.len());
    let mut derivs = Vec::with_capacity(times.len());
    for &t in times {
        let v = f(t)?;
        let d = if t < h {
            (-3.0 * v + 4.0 * f(t + h)? - f(t + 2.0 * h)?) / (2.0 * h)
        } else {
            (f(t + h)? - f(t - h)?) / (2.0 * h)
        };
        values.push(v);
        derivs.push(d);
    }
    Ok((values, derivs))
}

fn closed_form_residual(s: &Scenario, xis: &XiSet, index: usize, times: &[f64]) -> pmme_core::Result<Option<f64>> {
    let cfg = &s.config;
    let p = &cfg.kernel.params;
    match (&cfg.model, cfg.kernel.name.as_str()) {
        (ModelSpec::Dephasing { a }, "exponential") => {
            let Ok(params) = DephasingParams::new(p["A"], *a, p["gamma"], 1.0) else { return Ok(None) };
            sup(times, |t| Ok((xis.eval_index(index, t)?.re - f1(t, &params)).abs())).map(Some)
        }
        (ModelSpec::Dephasing { a }, "damped_oscillatory") if p["a"] == *a => {
            let Ok(params) = DephasingParams::new(p["A"], *a, p["gamma"], p["mu"]) else { return Ok(None) };
            sup(times, |t| Ok((xis.eval_index(index, t)?.re - f2(t, &params)).abs())).map(Some)
        }
        (ModelSpec::AmplitudeDamping { gamma0, mean_excitation }, "appendix") => {
            let params = AmplitudeDampingParams::new(*gamma0, *mean_excitation, p["gamma"])?;
            let mut worst = 0.0f64;
            for rho0 in &s.states {
                worst = worst.max(sup(times, |t| {
                    let exact = appendix_state(&params, rho0, t)?;
                    let got = evolve(xis, rho0, t)?.state;
                    Ok(linalg::max_abs(&(got.matrix() - exact.matrix())))
                })?);
            }
            Ok(Some(worst))
        }
        _ => Ok(None),
    }
}

fn sup(times: &[f64], f: impl Fn(f64) -> pmme_core::Result<f64>) -> pmme_core::Result<f64> {
    times.iter().try_fold(0.0f64, |acc, &t| Ok(acc.max(f(t)?)))
}

fn fmt_time(t: f64) -> String {
    format!("{t:.6}")
}

/// Run every enabled witness for a validated scenario.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput, RunError> {
    let cfg = &s.config;
    let flags = cfg.witnesses;
    let times = s.grid.points();
    let spacing = s.grid.spacing();
    let t_max = s.grid.t_max();
    let mut warnings = Vec::new();

    let xis = XiSet::from_generator(&s.generator, &s.kernel, &s.solver)?;
    if let Some(re) = xis.max_pole_real_part().filter(|re| *re > 1e-12) {
        warnings.push(format!("transform has a pole with positive real part {re:.3e}; xi grows exponentially"));
    }

    // States first: everything downstream assumes finite, normalized states.
    for (k, rho0) in s.states.iter().enumerate() {
        let mut flagged = false;
        for &t in &times {
            let out = evolve(&xis, rho0, t)?;
            let m = out.state.matrix();
            let trace = m.trace();
            if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
                || (trace.re - 1.0).abs() > STATE_TRACE_TOL
                || trace.im.abs() > STATE_TRACE_TOL
            {
                return Err(RunError::Invariant(format!("state {k} is not a finite unit-trace matrix at t = {t}")));
            }
            if let (Some(min), false) = (out.cp_violation, flagged) {
                warnings.push(format!("state {k} loses positivity at t = {} (min eigenvalue {min:.3e})", fmt_time(t)));
                flagged = true;
            }
        }
    }

    let index = coherence_index(&xis);
    let lambda = xis.basis().eigenvalues()[index];
    let (f, df) = coherence_columns(&xis, index, &times, spacing)?;
    let product_windows = window_list(windows_where(&times, |i| f[i] * df[i] > BACKFLOW_TOL));
    let mut columns = vec![
        Column { name: "f".into(), values: f.iter().map(|&v| Some(v)).collect() },
        Column { name: "dfdt".into(), values: df.iter().map(|&v| Some(v)).collect() },
    ];

    let mut backflow = None;
    let sigma = if flags.sigma {
        let mut pairs = Vec::new();
        for i in 0..s.states.len() {
            for j in i + 1..s.states.len() {
                let trace = sigma_trace(&xis, &s.states[i], &s.states[j], &times, None)?;
                pairs.push(PairSummary {
                    pair: format!("{i}_{j}"),
                    positive_windows: window_list(trace.positive_windows.clone()),
                    max_sigma: trace.sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    positive_integral: trace.positive_integral(),
                });
                columns.push(Column {
                    name: format!("sigma_{i}_{j}"),
                    values: trace.sigma.iter().map(|&v| Some(v)).collect(),
                });
            }
        }
        if pairs.is_empty() {
            warnings.push("sigma needs at least two initial states".into());
        }
        backflow = Some(pairs.iter().any(|p| !p.positive_windows.is_empty()));
        Some(pairs)
    } else {
        None
    };

    let blp = if flags.blp {
        let pairs = default_pair_sampler();
        let est = blp_aggregate(&xis, &pairs, &times)?;
        backflow = Some(backflow.unwrap_or(false) || est.value > 0.0);
        Some(BlpSummary {
            lower_bound: est.value,
            pairs: pairs.len(),
            best_pair: est.best_pair,
            max_sigma: est.max_sigma,
        })
    } else {
        None
    };

    let rates = if flags.rates {
        let gamma: Vec<Option<f64>> =
            f.iter().zip(&df).map(|(&v, &d)| (v.abs() >= RATE_MASK_TOL).then(|| -d / v)).collect();
        // γ(t) = −f′(t)/f(t), masked where |f| is small.
        let masked = gamma.iter().filter(|g| g.is_none()).count();
        if masked > 0 {
            warnings.push(format!("{masked} time-local rate samples masked where |f| < {RATE_MASK_TOL}"));
        }
        let summary = RateSummary {
            tolerance: RATE_TOL,
            negative_windows: window_list(windows_where(&times, |i| gamma[i].is_some_and(|g| g < -RATE_TOL))),
            min_rate: gamma.iter().flatten().copied().reduce(f64::min),
            masked_points: masked,
        };
        columns.push(Column { name: "gamma_t".into(), values: gamma });
        Some(summary)
    } else {
        None
    };

    let cp_condition = if flags.cp_condition {
        let values: Vec<f64> = times.iter().map(|&t| cp_min_eigenvalue(&xis, t)).collect::<pmme_core::Result<_>>()?;
        let violation_windows = window_list(windows_where(&times, |i| values[i] < -CP_TOL));
        if !violation_windows.is_empty() {
            warnings.push(format!("dynamical map is not completely positive on {} window(s)", violation_windows.len()));
        }
        let summary = CpSummary {
            tolerance: CP_TOL,
            min_eigenvalue: values.iter().copied().fold(f64::INFINITY, f64::min),
            violation_windows,
        };
        columns.push(Column { name: "cp_min_eig".into(), values: values.into_iter().map(Some).collect() });
        Some(summary)
    } else {
        None
    };

    let divisibility = if flags.divisibility {
        let dt = cfg.solver.divisibility_dt;
        let report = divisibility_report(&xis, &times, dt)?;
        let singular = report.spectrum.iter().filter(|s| s.is_none()).count();
        if singular > 0 {
            warnings.push(format!("{singular} grid points skipped where the map is not invertible"));
        }
        let summary = DivisibilitySummary {
            dt,
            tolerance: report.tolerance,
            violation_windows: window_list(report.violation_windows.clone()),
            min_eigenvalue: report.min_overall(),
            min_choi_eigenvalue: report.min_choi_eig.iter().flatten().copied().reduce(f64::min),
            singular_points: singular,
            half_step_disagreements: report.half_step_disagreements,
        };
        columns.push(Column { name: "div_min_eig".into(), values: report.min_spectrum() });
        Some(summary)
    } else {
        None
    };

    let mut oracle =
        OracleSummary { closed_form_residual: closed_form_residual(s, &xis, index, &times)?, ..Default::default() };
    if flags.volterra {
        let rho0 = &s.states[0];
        let traj = solve_volterra(&s.kernel, &s.generator, rho0, &s.grid, &s.solver)?;
        let mut worst = 0.0f64;
        for (t, state) in traj.times().iter().zip(traj.states()) {
            let spectral = evolve(&xis, rho0, *t)?.state;
            worst = worst.max(linalg::max_abs(&(state.matrix() - spectral.matrix())));
        }
        oracle.volterra_residual = Some(worst);
        oracle.volterra_error_estimate = Some(traj.meta().error_estimate);
    }

    let verdicts = Verdicts {
        backflow: backflow.map(|b| if b { "backflow detected" } else { "no backflow detected" }.to_string()),
        divisibility: divisibility.as_ref().map(|d| {
            if d.violation_windows.is_empty() { "no divisibility violation detected" } else { "not CP-divisible" }
                .to_string()
        }),
        cp_condition: cp_condition.as_ref().map(|c| {
            if c.violation_windows.is_empty() { "completely positive" } else { "not completely positive" }.to_string()
        }),
    };

    let report = RunReport {
        scenario: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        model: cfg.model.type_name().to_string(),
        kernel: KernelSummary { name: cfg.kernel.name.clone(), params: cfg.kernel.params.clone() },
        t_max,
        steps: s.grid.steps(),
        xi_method: match xis.method() {
            XiMethod::PartialFractions => "partial-fractions",
            XiMethod::NumericalInversion => "numerical-inversion",
        }
        .to_string(),
        coherence_index: index,
        coherence_eigenvalue: [lambda.re, lambda.im],
        verdicts,
        product_windows,
        sigma,
        blp,
        divisibility,
        rates,
        cp_condition,
        oracle,
        warnings,
    };

    for col in &columns {
        if col.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(RunError::Invariant(format!("column {} has non-finite values", col.name)));
        }
    }
    if let Some(w) = report.all_windows().iter().find(|w| !(0.0 <= w[0] && w[0] <= w[1] && w[1] <= t_max)) {
        return Err(RunError::Invariant(format!("window [{}, {}] outside [0, {t_max}]", w[0], w[1])));
    }
    Ok(RunOutput { report, times, columns })
}
