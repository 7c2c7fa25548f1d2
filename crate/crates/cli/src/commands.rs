use std::io;

use curvprobe::detector::{
    channel_weights, curvature_corrected_state, gapped_probability_minkowski, DetectorError,
};
use curvprobe::oracle::OracleError;
use curvprobe::presets::{preset_chart, PresetSpec};
use curvprobe::synge::{
    determinant_scaling, rnc_chart, scaling_test, GeodesicOptions, SyngeError,
    SIGMA_CURVATURE_COEFFICIENT,
};
use curvprobe::validation::{
    coefficient_rows, pln_rows, Status, ValidationError, ValidationRow,
};
use curvprobe::variance::{variance_breakdown, VarianceError, VarianceOptions};
use curvprobe::{CurvatureData, GaussianSmearing, VarianceBreakdown};
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{
    Command, DetectorArgs, Spacing, SweepArgs, SyngeArgs, ValidateArgs, VarianceArgs,
};
use crate::config::{self, ConfigError};
use crate::output::{float, value, Envelope, Table, SCHEMA_VERSION, UNITS};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Variance(#[from] VarianceError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Synge(#[from] SyngeError),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            _ => "compute",
        }
    }
}

pub struct Report {
    pub inputs_echo: Value,
    pub results: Value,
    pub diagnostics: Value,
    pub warnings: Vec<String>,
    pub table: Table,
    /// False when a graded check failed.
    pub passed: bool,
}

impl Report {
    pub fn envelope<'a>(&self, command: &'a str) -> Envelope<'a> {
        Envelope {
            schema_version: SCHEMA_VERSION,
            command,
            units: UNITS,
            inputs_echo: self.inputs_echo.clone(),
            results: self.results.clone(),
            diagnostics: self.diagnostics.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

pub fn name(c: &Command) -> &'static str {
    match c {
        Command::Variance(_) => "variance",
        Command::Detector(_) => "detector",
        Command::Validate(_) => "validate",
        Command::Synge(_) => "synge",
        Command::Sweep(_) => "sweep",
    }
}

pub fn run(c: &Command) -> Result<Report, CliError> {
    match c {
        Command::Variance(a) => variance(a),
        Command::Detector(a) => detector(a),
        Command::Validate(a) => validate(a),
        Command::Synge(a) => synge(a),
        Command::Sweep(a) => sweep(a),
    }
}

const BREAKDOWN_COLUMNS: [&str; 13] = [
    "T",
    "sigma",
    "l0",
    "minkowski",
    "ricci_term",
    "riemann_term",
    "log_term",
    "state_term",
    "total",
    "curvature_correction",
    "p_ln",
    "ell_times_sqrt_curvature",
    "validity_warning",
];

fn breakdown_cells(s: &GaussianSmearing, b: &VarianceBreakdown) -> Vec<String> {
    let mut cells: Vec<String> = [
        s.t_width,
        s.sigma,
        s.l0,
        b.minkowski,
        b.ricci_term,
        b.riemann_term,
        b.log_term,
        b.state_term,
        b.total,
        b.curvature_correction(),
        b.diagnostics.p_ln,
        b.diagnostics.ell_times_sqrt_curvature,
    ]
    .iter()
    .map(|v| float(*v))
    .collect();
    cells.push(b.diagnostics.validity_warning.to_string());
    cells
}

fn breakdown_results(b: &VarianceBreakdown) -> Value {
    json!({
        "minkowski": b.minkowski,
        "ricci_term": b.ricci_term,
        "riemann_term": b.riemann_term,
        "log_term": b.log_term,
        "state_term": b.state_term,
        "total": b.total,
        "curvature_correction": b.curvature_correction(),
    })
}

fn curvature_summary(c: &CurvatureData) -> Value {
    json!({
        "scalar": c.scalar(),
        "r00": c.ricci()[0][0],
        "traces": value(&c.curvature_sums()),
        "max_abs_component": c.max_abs_component(),
        "bianchi_residual": c.bianchi_residual(),
    })
}

fn variance(a: &VarianceArgs) -> Result<Report, CliError> {
    let curvature = config::resolve_curvature(&a.curvature)?;
    let s = config::smearing(&a.smearing)?;
    let state = config::finite("state-term", a.state_term)?;
    let opts = config::variance_options(&a.numeric)?;
    let b = variance_breakdown(&curvature.data, &s, state, &opts)?;

    let mut table = Table::new(&BREAKDOWN_COLUMNS);
    table.push(breakdown_cells(&s, &b));
    Ok(Report {
        inputs_echo: json!({
            "curvature": curvature.echo(),
            "smearing": config::smearing_echo(&s),
            "state_term": state,
            "numeric": config::numeric_echo(&a.numeric, &opts),
        }),
        results: breakdown_results(&b),
        diagnostics: json!({
            "variance": value(&b.diagnostics),
            "curvature": curvature_summary(&curvature.data),
        }),
        warnings: b.warnings(),
        table,
        passed: true,
    })
}

fn detector(a: &DetectorArgs) -> Result<Report, CliError> {
    let curvature = config::resolve_curvature(&a.curvature)?;
    let s = config::smearing(&a.smearing)?;
    let state = config::finite("state-term", a.state_term)?;
    let lambda = config::finite("lambda", a.lambda)?;
    let gap = config::finite("gap-omega", a.gap_omega)?;
    if gap < 0.0 {
        return Err(ConfigError::Invalid(format!("--gap-omega must be non-negative, got {gap}")).into());
    }
    let rho0 = config::parse_state(&a.rho0)?;
    let opts = config::variance_options(&a.numeric)?;
    let q = config::quadrature(a.numeric.tolerance, a.numeric.max_evaluations, a.numeric.seed)?;

    let out = curvature_corrected_state(lambda, &s, &curvature.data, state, &rho0, &opts)?;
    let gapped = gapped_probability_minkowski(lambda, gap, s.t_width, s.sigma, &q)?;
    let (keep, flip) = channel_weights(out.strength.xi);
    let m = out.final_state.matrix();

    let mut header = BREAKDOWN_COLUMNS.to_vec();
    header.extend([
        "lambda",
        "xi",
        "keep_weight",
        "flip_weight",
        "rho_gg",
        "rho_ge_re",
        "rho_ge_im",
        "rho_ee",
        "excited_population",
        "gap_omega",
        "gapped_probability_minkowski",
    ]);
    let mut table = Table::new(&header);
    let mut row = breakdown_cells(&s, &out.breakdown);
    row.extend(
        [
            lambda,
            out.strength.xi,
            keep,
            flip,
            m[(0, 0)].re,
            m[(0, 1)].re,
            m[(0, 1)].im,
            m[(1, 1)].re,
            out.final_state.excited_population(),
            gap,
            gapped.value,
        ]
        .map(float),
    );
    table.push(row);

    Ok(Report {
        inputs_echo: json!({
            "curvature": curvature.echo(),
            "smearing": config::smearing_echo(&s),
            "state_term": state,
            "lambda": lambda,
            "gap_omega": gap,
            "rho0": value(&rho0),
            "numeric": config::numeric_echo(&a.numeric, &opts),
        }),
        results: json!({
            "final_state": value(&out.final_state),
            "excited_population": out.final_state.excited_population(),
            "xi": out.strength.xi,
            "channel_weights": { "keep": keep, "flip": flip },
            "variance": breakdown_results(&out.breakdown),
            "gapped_probability_minkowski": {
                "value": gapped.value,
                "error_estimate": gapped.error,
                "evaluations": gapped.evaluations,
            },
        }),
        diagnostics: json!({
            "variance": value(&out.breakdown.diagnostics),
            "curvature": curvature_summary(&curvature.data),
            "final_state_hermiticity_error": out.final_state.hermiticity_error(),
            "final_state_min_eigenvalue": out.final_state.min_eigenvalue(),
        }),
        warnings: out.breakdown.warnings(),
        table,
        passed: true,
    })
}

const GRID: [f64; 3] = [0.5, 1.0, 2.0];

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Info => "info",
    }
}

fn validation_cells(t: f64, sigma: f64, r: &ValidationRow) -> Vec<String> {
    vec![
        float(t),
        float(sigma),
        r.coefficient.clone(),
        value(&r.kind).as_str().unwrap_or_default().to_string(),
        float(r.closed_form),
        float(r.oracle),
        float(r.abs_diff),
        float(r.rel_diff),
        float(r.tolerance),
        status_name(r.status).to_string(),
    ]
}

fn validate(a: &ValidateArgs) -> Result<Report, CliError> {
    let points: Vec<(f64, f64)> = if a.grid {
        GRID.iter().flat_map(|&t| GRID.iter().map(move |&s| (t, s))).collect()
    } else {
        GaussianSmearing::new(a.t, a.sigma, 1.0).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        vec![(a.t, a.sigma)]
    };
    if a.samples < 2 {
        return Err(ConfigError::Invalid("--samples must be at least 2".into()).into());
    }
    let q = config::quadrature(a.tolerance, a.max_evaluations, a.seed)?;
    let defaults = VarianceOptions::default().limits;
    let limits = curvprobe::quadrature::Limits::new(
        defaults.abs_tol,
        a.tolerance.unwrap_or(defaults.rel_tol),
        a.max_evaluations.unwrap_or(defaults.max_evaluations),
    );

    let mut table = Table::new(&[
        "T",
        "sigma",
        "coefficient",
        "kind",
        "closed_form",
        "oracle",
        "abs_diff",
        "rel_diff",
        "tolerance",
        "status",
    ]);
    let mut warnings = Vec::new();
    let (mut pass, mut fail, mut info) = (0usize, 0usize, 0usize);
    let mut tally = |rows: &[ValidationRow], t: f64, s: f64, warnings: &mut Vec<String>| {
        for r in rows {
            match r.status {
                Status::Pass => pass += 1,
                Status::Info => info += 1,
                Status::Fail => {
                    fail += 1;
                    warnings.push(format!(
                        "{} at T={t}, sigma={s}: expected {:.6e}, got {:.6e}, rel diff {:.2e} > {:.2e}",
                        r.coefficient, r.closed_form, r.oracle, r.rel_diff, r.tolerance
                    ));
                }
            }
        }
    };

    let mut per_point = Vec::new();
    for &(t, s) in &points {
        let rows = coefficient_rows(t, s, &q)?;
        tally(&rows, t, s, &mut warnings);
        for r in &rows {
            table.push(validation_cells(t, s, r));
        }
        per_point.push(json!({
            "T": t,
            "sigma": s,
            "all_pass": rows.iter().all(ValidationRow::passed),
            "rows": value(&rows),
        }));
    }

    // P_ln at T = σ = ℓ₀; the value is scale-free
    let ell = points[0].0;
    let (rows, check) = pln_rows(ell, a.samples, a.seed, &limits)?;
    tally(&rows, ell, ell, &mut warnings);
    for r in &rows {
        table.push(validation_cells(ell, ell, r));
    }

    Ok(Report {
        inputs_echo: json!({
            "points": points.iter().map(|(t, s)| json!({ "T": t, "sigma": s })).collect::<Vec<_>>(),
            "tolerance": q.tolerance,
            "max_evaluations": q.max_evaluations,
            "p_ln_tolerance": limits.rel_tol,
            "samples": a.samples,
            "seed": a.seed,
        }),
        results: json!({
            "coefficients": per_point,
            "p_ln": {
                "ell": ell,
                "rows": value(&rows),
                "check": value(&check),
            },
            "summary": { "pass": pass, "fail": fail, "info": info },
        }),
        diagnostics: json!({
            "graded_rows": pass + fail,
            "informational_rows": info,
        }),
        warnings,
        table,
        passed: fail == 0,
    })
}

fn default_pair(spec: &PresetSpec) -> ([f64; 4], [f64; 4]) {
    match spec {
        PresetSpec::Schwarzschild { .. } => ([0.6, 2.0, -0.9, 1.1], [-1.0, -1.3, 1.6, 1.2]),
        _ => ([0.3, 1.2, -0.4, 0.5], [-0.5, -0.6, 0.9, 0.7]),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn synge(a: &SyngeArgs) -> Result<Report, CliError> {
    let curvature = config::resolve_curvature(&a.curvature)?;
    let spec = *curvature.preset().ok_or_else(|| {
        ConfigError::Invalid("synge needs an analytic chart; use --preset".into())
    })?;
    let (dx, dxp) = default_pair(&spec);
    let x = match &a.x {
        Some(s) => config::parse_vector::<4>("x", s)?,
        None => dx,
    };
    let xp = match &a.xp {
        Some(s) => config::parse_vector::<4>("xp", s)?,
        None => dxp,
    };
    let scales = config::parse_list("scales", &a.scales)?;
    if scales.iter().any(|s| *s <= 0.0) {
        return Err(ConfigError::Invalid("--scales must be positive".into()).into());
    }
    if !(a.h_fraction.is_finite() && a.h_fraction > 0.0) {
        return Err(ConfigError::Invalid("--h-fraction must be positive".into()).into());
    }
    let mut opts = GeodesicOptions::default();
    if let Some(t) = a.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(ConfigError::Invalid(format!("--tolerance must be positive, got {t}")).into());
        }
        opts.tolerance = t;
        opts.ode.rtol = t;
    }
    let chart = preset_chart(&spec).map_err(ConfigError::from)?;
    let rnc = rnc_chart(chart, spec.event(), opts)?;
    let sigma = scaling_test(&rnc, &curvature.data, (&x, &xp), &scales)?;
    let det = determinant_scaling(&rnc, &curvature.data, &x, &scales, a.h_fraction)?;

    let mut table = Table::new(&[
        "quantity",
        "scale",
        "numeric",
        "expansion",
        "abs_err",
        "rel_err",
        "fitted_exponent",
    ]);
    for r in &sigma.rows {
        table.push(vec![
            "sigma".into(),
            float(r.scale),
            float(r.numeric),
            float(r.expansion),
            float(r.abs_err),
            float(r.rel_err),
            cell(sigma.fitted_exponent),
        ]);
    }
    for r in &det.rows {
        table.push(vec![
            "sqrt_minus_g".into(),
            float(r.scale),
            float(r.sqrt_minus_g_numeric),
            float(r.sqrt_minus_g_expansion),
            float(r.sqrt_minus_g_error),
            float(r.sqrt_minus_g_error / r.sqrt_minus_g_numeric.abs()),
            cell(det.sqrt_minus_g_exponent),
        ]);
    }
    for r in &det.rows {
        table.push(vec![
            "van_vleck_times_sqrt_minus_g".into(),
            float(r.scale),
            String::new(),
            float(1.0),
            float(r.product_deviation),
            float(r.product_deviation),
            cell(det.product_exponent),
        ]);
    }

    let mut warnings = Vec::new();
    if sigma.fitted_exponent.is_none() {
        warnings.push("world-function errors are at round-off level; no exponent fitted".into());
    }
    if det.product_exponent.is_none() {
        warnings.push("determinant product deviation is at round-off level; no exponent fitted".into());
    }
    Ok(Report {
        inputs_echo: json!({
            "curvature": curvature.echo(),
            "x": x,
            "xp": xp,
            "scales": scales,
            "h_fraction": a.h_fraction,
            "tolerance": opts.tolerance,
        }),
        results: json!({
            "sigma_scaling": value(&sigma),
            "determinant_scaling": value(&det),
        }),
        diagnostics: json!({
            "base_event": spec.event(),
            "frame": rnc.frame,
            "sigma_curvature_coefficient": SIGMA_CURVATURE_COEFFICIENT,
            "curvature": curvature_summary(&curvature.data),
        }),
        warnings,
        table,
        passed: true,
    })
}

fn sweep_grid(a: &SweepArgs) -> Result<Vec<f64>, ConfigError> {
    let (lo, hi, n) = (a.ell_min, a.ell_max, a.points);
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(ConfigError::Invalid(format!(
            "need 0 < --ell-min <= --ell-max, got {lo} and {hi}"
        )));
    }
    if n == 0 || (n == 1 && hi != lo) {
        return Err(ConfigError::Invalid(
            "--points must be at least 1, and at least 2 for a range".into(),
        ));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match (i, a.spacing) {
            (0, _) => lo,
            (i, _) if i == n - 1 => hi,
            (i, Spacing::Linear) => lo + (hi - lo) * step(i),
            (i, Spacing::Log) => (lo.ln() + (hi.ln() - lo.ln()) * step(i)).exp(),
        })
        .collect())
}

fn sweep(a: &SweepArgs) -> Result<Report, CliError> {
    let curvature = config::resolve_curvature(&a.curvature)?;
    let grid = sweep_grid(a)?;
    let state = config::finite("state-term", a.state_term)?;
    let opts = config::variance_options(&a.numeric)?;
    let mut header = vec!["ell"];
    header.extend(BREAKDOWN_COLUMNS);
    header.push("relative_correction");
    let mut table = Table::new(&header);
    let mut points = Vec::with_capacity(grid.len());
    let mut flagged = 0;
    for &ell in &grid {
        let s = GaussianSmearing::new(ell, ell, a.l0).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let b = variance_breakdown(&curvature.data, &s, state, &opts)?;
        flagged += usize::from(b.diagnostics.validity_warning);
        let relative = b.curvature_correction() / b.minkowski;
        let mut row = vec![float(ell)];
        row.extend(breakdown_cells(&s, &b));
        row.push(float(relative));
        table.push(row);
        let mut entry = breakdown_results(&b);
        entry["ell"] = json!(ell);
        entry["relative_correction"] = json!(relative);
        entry["p_ln"] = json!(b.diagnostics.p_ln);
        entry["ell_times_sqrt_curvature"] = json!(b.diagnostics.ell_times_sqrt_curvature);
        points.push(entry);
    }
    let mut warnings = Vec::new();
    if flagged > 0 {
        warnings.push(format!(
            "{flagged} of {} points exceed the validity threshold of the leading-order expansion",
            grid.len()
        ));
    }
    Ok(Report {
        inputs_echo: json!({
            "curvature": curvature.echo(),
            "ell_min": a.ell_min,
            "ell_max": a.ell_max,
            "points": a.points,
            "spacing": match a.spacing { Spacing::Log => "log", Spacing::Linear => "linear" },
            "l0": a.l0,
            "state_term": state,
            "numeric": config::numeric_echo(&a.numeric, &opts),
        }),
        results: json!({ "points": points }),
        diagnostics: json!({
            "curvature": curvature_summary(&curvature.data),
            "points_over_validity_threshold": flagged,
        }),
        warnings,
        table,
        passed: true,
    })
}
