use std::fmt::Write;
use std::fs;
use std::path::{Path, PathBuf};

use psqfim::distill::REGIME_WARNING_THRESHOLD;
use psqfim::estimator::{CrbRun, DEFAULT_SEARCH_RADIUS};
use psqfim::reference::ReferenceExample;
use psqfim::{
    distillation_report, geometric_quantumness, kd_analysis, kraus_from_estimate, learnability_interval,
    qfim_pure, run_crb, t_sweep, uhlmann_curvature, DistillationReport, Error, RMatrix, Scenario,
};

use crate::format::{self, csv, matrix, matrix_csv, scalar_csv, text};

/// Soft CRB acceptance: slack no worse than this fraction of the bound.
pub const CRB_SLACK_FRACTION: f64 = 0.1;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io { path: PathBuf, source: std::io::Error },
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// What a command produced. `code` is 0 or 1 (pinned-check failure).
#[derive(Debug, Default)]
pub struct Output {
    pub text: String,
    pub warnings: Vec<String>,
    pub csv: String,
    pub code: i32,
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let raw = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Scenario::from_json(&raw)?)
}

pub fn parse_t_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let values = raw
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--t-list: cannot parse '{s}' as a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("--t-list: no values given".into()));
    }
    Ok(values)
}

fn interval(out: &mut String, label: &str, risk: &psqfim::Result<(f64, f64)>) {
    match risk {
        Ok((lo, hi)) => writeln!(out, "{label}: [{}, {}]", text(*lo), text(*hi)).unwrap(),
        Err(e) => writeln!(out, "{label}: unavailable ({e})").unwrap(),
    }
}

fn vector(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|x| text(*x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn qfim(scenario: &Scenario) -> Result<Output, CliError> {
    let theta = &scenario.theta_true;
    let qfim = qfim_pure(&scenario.circuit, theta)?;
    let curvature = uhlmann_curvature(&scenario.circuit, theta)?;
    let quantumness = geometric_quantumness(&qfim, &curvature);
    let trials = scenario.trials.unwrap_or(1);
    let risk = learnability_interval(&qfim, &scenario.weight, trials);

    let mut out = Output::default();
    let t = &mut out.text;
    writeln!(t, "theta: {}", vector(theta.as_slice())).unwrap();
    writeln!(t, "quantum Fisher information matrix:").unwrap();
    t.push_str(&matrix(qfim.matrix()));
    writeln!(t, "Uhlmann curvature:").unwrap();
    t.push_str(&matrix(curvature.matrix()));
    match &quantumness {
        Ok(q) => writeln!(t, "geometric quantumness: {}", text(*q)).unwrap(),
        Err(e) => writeln!(t, "geometric quantumness: unavailable ({e})").unwrap(),
    }
    interval(t, &format!("learnability interval (N = {trials})"), &risk);

    let c = &mut out.csv;
    c.push_str("quantity,i,j,value\n");
    matrix_csv(c, "qfim", qfim.matrix());
    matrix_csv(c, "curvature", curvature.matrix());
    if let Ok(q) = quantumness {
        scalar_csv(c, "quantumness", q);
    }
    if let Ok((lo, hi)) = risk {
        scalar_csv(c, "risk_lower", lo);
        scalar_csv(c, "risk_upper", hi);
    }
    Ok(out)
}

fn regime_warning(report: &DistillationReport) -> Option<String> {
    report.regime_warning().then(|| {
        format!(
            "warning: regime ratio {} exceeds {REGIME_WARNING_THRESHOLD}; the 1/t^2 prediction is only first-order accurate",
            text(report.regime_ratio)
        )
    })
}

fn write_distillation(out: &mut Output, report: &DistillationReport, weight: &RMatrix, trials: u64) {
    let t = &mut out.text;
    if report.is_noop() {
        writeln!(t, "no-op distillation (t = 1): the filter passes every state").unwrap();
    }
    writeln!(t, "transmissivity t: {}", text(report.t)).unwrap();
    writeln!(t, "success probability p_ps: {} (t^2 = {})", text(report.p_ps), text(report.t * report.t)).unwrap();
    writeln!(t, "regime ratio sum(delta^2)/t^2: {}", text(report.regime_ratio)).unwrap();
    writeln!(t, "distilled QFIM (exact):").unwrap();
    t.push_str(&matrix(report.qfim_exact.matrix()));
    writeln!(t, "distilled QFIM (predicted, QFIM/t^2):").unwrap();
    t.push_str(&matrix(report.qfim_predicted.matrix()));
    writeln!(t, "undistilled QFIM:").unwrap();
    t.push_str(&matrix(report.qfim_undistilled.matrix()));
    writeln!(t, "prediction error max|exact - predicted|: {}", text(report.prediction_error())).unwrap();
    writeln!(t, "lossless residual max|p_ps * exact - undistilled|: {}", text(report.lossless_residual)).unwrap();
    let (before, after) = report.risks(weight, trials);
    interval(t, &format!("learnability interval before (N = {trials})"), &before);
    interval(t, &format!("learnability interval after (N = {trials})"), &after);
    let (q_before, q_after) = report.quantumness();
    for (label, q) in [("before", q_before), ("after", q_after)] {
        match q {
            Ok(q) => writeln!(t, "geometric quantumness {label}: {}", text(q)).unwrap(),
            Err(e) => writeln!(t, "geometric quantumness {label}: unavailable ({e})").unwrap(),
        }
    }
    out.warnings.extend(regime_warning(report));

    let c = &mut out.csv;
    c.push_str("quantity,i,j,value\n");
    scalar_csv(c, "t", report.t);
    scalar_csv(c, "p_ps", report.p_ps);
    scalar_csv(c, "regime_ratio", report.regime_ratio);
    scalar_csv(c, "lossless_residual", report.lossless_residual);
    matrix_csv(c, "qfim_exact", report.qfim_exact.matrix());
    matrix_csv(c, "qfim_predicted", report.qfim_predicted.matrix());
    matrix_csv(c, "qfim_undistilled", report.qfim_undistilled.matrix());
}

pub fn distill(scenario: &Scenario) -> Result<Output, CliError> {
    let t = scenario.require_t()?;
    let report = distillation_report(&scenario.circuit, &scenario.theta_true, &scenario.theta_guess, t)?;
    let mut out = Output::default();
    write_distillation(&mut out, &report, &scenario.weight, scenario.trials.unwrap_or(1));
    Ok(out)
}

pub fn kd(scenario: &Scenario) -> Result<Output, CliError> {
    let (i, j) = scenario.require_kd_pair()?;
    let (effect, source) = match &scenario.postselection {
        Some(effect) => (effect.clone(), "scenario postselection effect".to_string()),
        None => {
            let t = scenario.require_t()?;
            let plan = kraus_from_estimate(&scenario.circuit, &scenario.theta_guess, t)?;
            (plan.postselection_effect, format!("filter at t = {}", text(t)))
        }
    };
    let analysis = kd_analysis(&scenario.circuit, &scenario.theta_true, &effect, i, j)?;
    let report = &analysis.report;
    let (rows, cols) = analysis.conditioned.shape();

    let mut out = Output::default();
    let w = &mut out.text;
    writeln!(w, "parameter pair: ({i}, {j})").unwrap();
    writeln!(w, "postselection: {source}").unwrap();
    writeln!(w, "success probability p_ps: {}", text(analysis.conditioned.success_prob)).unwrap();
    writeln!(w, "eigenvalues of conjugated generator {i}: {}", vector(&analysis.eigenvalues_i)).unwrap();
    writeln!(w, "eigenvalues of conjugated generator {j}: {}", vector(&analysis.eigenvalues_j)).unwrap();
    writeln!(w, "conditioned quasiprobabilities (row k: eigenvalue of {i}, column l: eigenvalue of {j}):").unwrap();
    let re = RMatrix::from_fn(rows, cols, |k, l| analysis.conditioned.get(k, l).re);
    let im = RMatrix::from_fn(rows, cols, |k, l| analysis.conditioned.get(k, l).im);
    writeln!(w, " real part:").unwrap();
    w.push_str(&matrix(&re));
    writeln!(w, " imaginary part:").unwrap();
    w.push_str(&matrix(&im));
    writeln!(w, "min real part: {}", text(report.min_real_part)).unwrap();
    writeln!(w, "max modulus: {}", text(report.max_abs_value)).unwrap();
    writeln!(w, "total negativity: {}", text(report.total_negativity)).unwrap();
    writeln!(w, "spectral gaps: {} x {} = {}", text(analysis.gap_i), text(analysis.gap_j), text(analysis.gap_i * analysis.gap_j)).unwrap();
    writeln!(w, "distilled QFIM entry ({i}, {j}): {}", text(analysis.entry)).unwrap();
    let verdict = if report.is_classical { "classical" } else { "nonclassical" };
    writeln!(w, "distribution: {verdict}").unwrap();
    writeln!(w, "entry exceeds classical bound: {}", if analysis.anomalous() { "yes" } else { "no" }).unwrap();
    writeln!(w, "anomaly requires nonclassicality: {}", if analysis.consistent() { "satisfied" } else { "VIOLATED" }).unwrap();

    let c = &mut out.csv;
    c.push_str("k,l,re,im\n");
    for k in 0..rows {
        for l in 0..cols {
            let q = analysis.conditioned.get(k, l);
            writeln!(c, "{k},{l},{},{}", csv(q.re), csv(q.im)).unwrap();
        }
    }
    Ok(out)
}

pub const SWEEP_HEADER: &str =
    "t,p_ps,det_qfim_exact,det_qfim_pred,lossless_residual,risk_lower,risk_upper,regime_ratio,error";

pub fn sweep(scenario: &Scenario, t_values: &[f64]) -> Result<Output, CliError> {
    let trials = scenario.trials.unwrap_or(1);
    let reports = t_sweep(&scenario.circuit, &scenario.theta_true, &scenario.theta_guess, t_values);
    let mut out = Output::default();
    writeln!(out.csv, "{SWEEP_HEADER}").unwrap();
    let mut first_error = None;
    let mut succeeded = 0;
    for (&t, result) in t_values.iter().zip(reports) {
        match result {
            Ok(report) => {
                succeeded += 1;
                let (lo, hi) = match report.risks(&scenario.weight, trials).1 {
                    Ok((lo, hi)) => (csv(lo), csv(hi)),
                    Err(_) => (String::new(), String::new()),
                };
                writeln!(
                    out.csv,
                    "{},{},{},{},{},{lo},{hi},{},",
                    csv(t),
                    csv(report.p_ps),
                    csv(report.qfim_exact.determinant()),
                    csv(report.qfim_predicted.determinant()),
                    csv(report.lossless_residual),
                    csv(report.regime_ratio),
                )
                .unwrap();
                out.warnings.extend(regime_warning(&report).map(|w| format!("t = {}: {w}", text(t))));
            }
            Err(e) => {
                writeln!(out.csv, "{},,,,,,,,{}", csv(t), csv_field(&e.to_string())).unwrap();
                first_error.get_or_insert(e);
            }
        }
    }
    if succeeded == 0 {
        return Err(first_error.expect("non-empty t list").into());
    }
    out.text = out.csv.clone();
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn paper_example(theta1: Option<f64>, t: Option<f64>) -> Result<Output, CliError> {
    let mut example = ReferenceExample::default();
    if let Some(theta1) = theta1 {
        if !theta1.is_finite() {
            return Err(CliError::Usage("--theta1 must be finite".into()));
        }
        example.theta.0[0] = theta1;
    }
    if let Some(t) = t {
        example.t = t;
    }
    let run = example.run()?;
    let mut out = Output::default();
    let w = &mut out.text;
    writeln!(w, "qubit benchmark: |0>, generators sigma_x then (sigma_x + sigma_z)/sqrt(2)").unwrap();
    writeln!(w, "theta: {}", vector(example.theta.as_slice())).unwrap();
    writeln!(w, "initial estimate: {}", vector(example.theta_guess().as_slice())).unwrap();
    writeln!(w, "quantum Fisher information matrix:").unwrap();
    w.push_str(&matrix(run.qfim.matrix()));
    writeln!(w, "closed form [[4, 2 sqrt 2], [2 sqrt 2, 3 - cos 4 theta_1]]:").unwrap();
    w.push_str(&matrix(&run.closed_form));
    interval(w, "learnability interval (W = 1, N = 1)", &run.risk);
    match &run.distillation {
        Ok(report) => {
            writeln!(out.text, "distillation factor 1/t^2: {}", text(1.0 / (report.t * report.t))).unwrap();
            write_distillation(&mut out, report, &RMatrix::identity(2, 2), 1);
        }
        Err(e) => writeln!(out.text, "distillation: unavailable ({e})").unwrap(),
    }
    writeln!(out.text, "checks:").unwrap();
    for check in &run.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        writeln!(out.text, "  [{status}] {}: {}", check.name, check.detail).unwrap();
    }
    if !run.all_passed() {
        out.code = 1;
    }
    Ok(out)
}

pub fn crb(scenario: &Scenario) -> Result<Output, CliError> {
    let povm = scenario.require_povm()?;
    let trials = scenario.require_trials()?;
    let seed = scenario.require_seed()?;
    let run = CrbRun {
        trials,
        batches: scenario.batches,
        master_seed: seed,
        search_radius: DEFAULT_SEARCH_RADIUS,
    };
    let outcome = run_crb(&scenario.circuit, &scenario.theta_true, &scenario.theta_guess, povm, &run)?;
    let cmp = &outcome.comparison;
    let within = cmp.within_soft_bound(CRB_SLACK_FRACTION);

    let mut out = Output::default();
    let w = &mut out.text;
    writeln!(w, "trials per batch N: {trials}").unwrap();
    writeln!(w, "batches: {} (master seed {seed})", cmp.batches).unwrap();
    writeln!(w, "theta: {}", vector(scenario.theta_true.as_slice())).unwrap();
    writeln!(w, "mean estimate: {}", vector(cmp.mean.as_slice())).unwrap();
    writeln!(w, "empirical covariance:").unwrap();
    w.push_str(&matrix(&cmp.empirical_cov));
    writeln!(w, "Cramer-Rao bound [N I]^-1:").unwrap();
    w.push_str(&matrix(&cmp.bound));
    let ratios: Vec<f64> = (0..cmp.mean.len()).map(|m| cmp.variance_ratio(m)).collect();
    writeln!(w, "variance / bound (diagonal): {}", vector(&ratios)).unwrap();
    writeln!(w, "slack (min eigenvalue of covariance - bound): {}", text(cmp.slack)).unwrap();
    writeln!(
        w,
        "soft check slack >= -{}% of bound norm {}: {}",
        format::text(100.0 * CRB_SLACK_FRACTION),
        text(cmp.bound_norm()),
        if within { "pass" } else { "fail" }
    )
    .unwrap();

    let c = &mut out.csv;
    let m = scenario.theta_true.len();
    let header: Vec<String> = (0..m).map(|k| format!("theta_{k}")).collect();
    writeln!(c, "batch,seed,{}", header.join(",")).unwrap();
    for (b, estimate) in outcome.estimates.iter().enumerate() {
        let values: Vec<String> = estimate.0.iter().map(|x| csv(*x)).collect();
        writeln!(c, "{b},{},{}", seed.wrapping_add(b as u64), values.join(",")).unwrap();
    }
    Ok(out)
}
