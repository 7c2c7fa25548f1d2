//! Synge's world function from boundary-value geodesics, Riemann normal
//! coordinates through the exponential map, and the short-distance
//! expansions they are checked against.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;
use thiserror::Error;

use crate::ode::{integrate, OdeError, OdeOptions, Trajectory};
use crate::presets::{orthonormal_frame, Frame, FrameError, MetricChart};
use crate::tensor::{CurvatureData, MinkowskiMetric};

/// Coefficient of `R_acbd x^a x^b x′^c x′^d` in the expansion of σ about
/// the RNC origin.
pub const SIGMA_CURVATURE_COEFFICIENT: f64 = -1.0 / 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyngeError {
    #[error("shooting did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("geodesic left the chart domain at affine parameter {lambda}")]
    DomainExit { lambda: f64 },
    #[error("point {0:?} is outside the chart domain")]
    OutsideDomain([f64; 4]),
    #[error("endpoint map has a singular Jacobian")]
    SingularJacobian,
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("integrator failure: {0}")]
    Integrator(OdeError),
}

impl From<OdeError> for SyngeError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::DomainExit { t } => Self::DomainExit { lambda: t },
            other => Self::Integrator(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicOptions {
    /// Endpoint residual accepted by the shooting iteration, relative to
    /// `max(1, |x′ − x|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(skip)]
    pub ode: OdeOptions,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 40,
            ode: OdeOptions {
                rtol: 1e-13,
                atol: 1e-15,
                max_steps: 200_000,
                initial_step: 0.05,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathNode {
    pub lambda: f64,
    pub position: [f64; 4],
    pub velocity: [f64; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    /// Largest accepted scaled local error estimate.
    pub est_error: f64,
    pub shooting_iterations: usize,
    pub endpoint_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSolution {
    pub initial_point: [f64; 4],
    pub final_point: [f64; 4],
    pub initial_velocity: [f64; 4],
    pub affine_span: (f64, f64),
    pub path: Vec<PathNode>,
    pub integrator_stats: IntegratorStats,
}

impl GeodesicSolution {
    /// `max |g(ẋ,ẋ) − g(ẋ₀,ẋ₀)|` over the path nodes.
    pub fn norm_drift(&self, chart: &dyn MetricChart) -> f64 {
        let norm = |n: &PathNode| metric_dot(&chart.metric(&n.position), &n.velocity, &n.velocity);
        let first = norm(&self.path[0]);
        self.path
            .iter()
            .map(|n| (norm(n) - first).abs())
            .fold(0.0, f64::max)
    }
}

fn metric_dot(g: &Matrix4<f64>, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            s += g[(m, n)] * u[m] * v[n];
        }
    }
    s
}

fn max_abs(v: &[f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Integrates the geodesic equation over `λ ∈ [0, 1]`.
pub fn shoot(
    chart: &dyn MetricChart,
    x: &[f64; 4],
    v: &[f64; 4],
    ode: &OdeOptions,
) -> Result<Trajectory<8>, SyngeError> {
    let mut y0 = [0.0; 8];
    y0[..4].copy_from_slice(x);
    y0[4..].copy_from_slice(v);
    let rhs = |_: f64, y: &[f64; 8]| {
        let pos = [y[0], y[1], y[2], y[3]];
        if !chart.in_domain(&pos) {
            return None;
        }
        let gamma = chart.christoffel(&pos);
        let mut d = [0.0; 8];
        for m in 0..4 {
            d[m] = y[4 + m];
            let mut acc = 0.0;
            for n in 0..4 {
                for r in 0..4 {
                    acc += gamma[m][n][r] * y[4 + n] * y[4 + r];
                }
            }
            d[4 + m] = -acc;
        }
        Some(d)
    };
    Ok(integrate(rhs, 0.0, 1.0, y0, ode)?)
}

fn endpoint(traj: &Trajectory<8>) -> [f64; 4] {
    let y = traj.last().y;
    [y[0], y[1], y[2], y[3]]
}

/// Boundary-value geodesic from `x` (λ = 0) to `xp` (λ = 1) by damped
/// Newton shooting on the initial velocity, seeded with the coordinate
/// chord and using a finite-difference Jacobian of the endpoint map.
pub fn geodesic_connect(
    chart: &dyn MetricChart,
    x: &[f64; 4],
    xp: &[f64; 4],
    opts: &GeodesicOptions,
) -> Result<GeodesicSolution, SyngeError> {
    for p in [x, xp] {
        if !chart.in_domain(p) {
            return Err(SyngeError::OutsideDomain(*p));
        }
    }
    let chord: [f64; 4] = std::array::from_fn(|m| xp[m] - x[m]);
    let threshold = opts.tolerance * max_abs(&chord).max(1.0);
    let residual_of = |traj: &Trajectory<8>| {
        let e = endpoint(traj);
        let r: [f64; 4] = std::array::from_fn(|m| e[m] - xp[m]);
        r
    };

    let mut v = chord;
    let mut traj = shoot(chart, x, &v, &opts.ode)?;
    let mut r = residual_of(&traj);
    let mut iterations = 0;
    while max_abs(&r) > threshold {
        if iterations >= opts.max_iterations {
            return Err(SyngeError::NoConvergence {
                residual: max_abs(&r),
                iterations,
            });
        }
        iterations += 1;
        let mut jac = Matrix4::zeros();
        let base_end = endpoint(&traj);
        for j in 0..4 {
            let h = 1e-7 * max_abs(&v).max(1e-3);
            let mut vp = v;
            vp[j] += h;
            let e = endpoint(&shoot(chart, x, &vp, &opts.ode)?);
            for i in 0..4 {
                jac[(i, j)] = (e[i] - base_end[i]) / h;
            }
        }
        let step = jac
            .lu()
            .solve(&Vector4::from(r))
            .ok_or(SyngeError::SingularJacobian)?;
        let current = max_abs(&r);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: [f64; 4] = std::array::from_fn(|m| v[m] - alpha * step[m]);
            if let Ok(t) = shoot(chart, x, &trial, &opts.ode) {
                let rt = residual_of(&t);
                if max_abs(&rt) < current {
                    v = trial;
                    traj = t;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SyngeError::NoConvergence {
                residual: current,
                iterations,
            });
        }
    }

    let path = traj
        .nodes
        .iter()
        .map(|n| PathNode {
            lambda: n.t,
            position: [n.y[0], n.y[1], n.y[2], n.y[3]],
            velocity: [n.y[4], n.y[5], n.y[6], n.y[7]],
        })
        .collect();
    Ok(GeodesicSolution {
        initial_point: *x,
        final_point: *xp,
        initial_velocity: v,
        affine_span: (0.0, 1.0),
        path,
        integrator_stats: IntegratorStats {
            steps: traj.steps,
            rejected: traj.rejected,
            est_error: traj.max_error_estimate,
            shooting_iterations: iterations,
            endpoint_residual: max_abs(&r),
        },
    })
}

/// `σ(x, x′) = ½ g(v₀, v₀)` for the connecting geodesic on `λ ∈ [0, 1]`.
pub fn world_function_numeric(
    chart: &dyn MetricChart,
    x: &[f64; 4],
    xp: &[f64; 4],
    opts: &GeodesicOptions,
) -> Result<f64, SyngeError> {
    let sol = geodesic_connect(chart, x, xp, opts)?;
    let v = sol.initial_velocity;
    Ok(0.5 * metric_dot(&chart.metric(x), &v, &v))
}

/// `max √(2|σ|)` over all pairs of events.
pub fn geodesic_size(
    chart: &dyn MetricChart,
    events: &[[f64; 4]],
    opts: &GeodesicOptions,
) -> Result<f64, SyngeError> {
    let mut size: f64 = 0.0;
    for (i, a) in events.iter().enumerate() {
        for b in &events[i + 1..] {
            let s = world_function_numeric(chart, a, b, opts)?;
            size = size.max((2.0 * s.abs()).sqrt());
        }
    }
    Ok(size)
}

/// Riemann normal coordinates about `base`, with the coordinate-aligned
/// Gram–Schmidt frame.
#[derive(Debug, Clone)]
pub struct RncChart<C> {
    pub chart: C,
    pub base: [f64; 4],
    pub frame: Frame,
    pub options: GeodesicOptions,
}

pub fn rnc_chart<C: MetricChart>(
    chart: C,
    base: [f64; 4],
    options: GeodesicOptions,
) -> Result<RncChart<C>, SyngeError> {
    if !chart.in_domain(&base) {
        return Err(SyngeError::OutsideDomain(base));
    }
    let frame = orthonormal_frame(&chart.metric(&base))?;
    Ok(RncChart {
        chart,
        base,
        frame,
        options,
    })
}

impl<C: MetricChart> RncChart<C> {
    fn frame_vector(&self, x: &[f64; 4]) -> [f64; 4] {
        std::array::from_fn(|m| (0..4).map(|a| x[a] * self.frame[a][m]).sum())
    }

    /// Exponential map: chart coordinates of the RNC point `x`.
    pub fn forward(&self, x: &[f64; 4]) -> Result<[f64; 4], SyngeError> {
        if x.iter().all(|&c| c == 0.0) {
            return Ok(self.base);
        }
        let v = self.frame_vector(x);
        let traj = shoot(&self.chart, &self.base, &v, &self.options.ode)?;
        Ok(endpoint(&traj))
    }

    /// RNC of a chart point: frame components of the initial velocity of
    /// the geodesic from the base point.
    pub fn inverse(&self, p: &[f64; 4]) -> Result<[f64; 4], SyngeError> {
        if *p == self.base {
            return Ok([0.0; 4]);
        }
        let sol = geodesic_connect(&self.chart, &self.base, p, &self.options)?;
        let g = self.chart.metric(&self.base);
        Ok(std::array::from_fn(|a| {
            MinkowskiMetric::DIAGONAL[a] * metric_dot(&g, &sol.initial_velocity, &self.frame[a])
        }))
    }

    /// Numeric σ between two RNC points.
    pub fn world_function(&self, x: &[f64; 4], xp: &[f64; 4]) -> Result<f64, SyngeError> {
        let (a, b) = (self.forward(x)?, self.forward(xp)?);
        world_function_numeric(&self.chart, &a, &b, &self.options)
    }

    /// `√−g` of the metric in RNC at `x`, from a fourth-order
    /// finite-difference Jacobian of the exponential map.
    pub fn sqrt_minus_g(&self, x: &[f64; 4], h: f64) -> Result<f64, SyngeError> {
        let mut jac = Matrix4::zeros();
        for a in 0..4 {
            let at = |s: f64| {
                let mut y = *x;
                y[a] += s * h;
                self.forward(&y)
            };
            let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
            for m in 0..4 {
                jac[(m, a)] = (m2[m] - 8.0 * m1[m] + 8.0 * p1[m] - p2[m]) / (12.0 * h);
            }
        }
        let g = self.chart.metric(&self.forward(x)?);
        let pulled = jac.transpose() * g * jac;
        Ok((-pulled.determinant()).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaExpansion {
    pub sigma: f64,
    /// `∂σ/∂x^a` (lower index).
    pub grad_x: [f64; 4],
    /// `∂σ/∂x′^a` (lower index).
    pub grad_xprime: [f64; 4],
}

/// `σ ≈ ½ η(x−x′)(x−x′) + κ R_acbd x^a x^b x′^c x′^d` in RNC about the
/// origin, `κ =` [`SIGMA_CURVATURE_COEFFICIENT`], with its exact gradients.
pub fn expansion_sigma(c: &CurvatureData, x: &[f64; 4], xp: &[f64; 4]) -> SigmaExpansion {
    let k = SIGMA_CURVATURE_COEFFICIENT;
    let r = c.riemann();
    let delta: [f64; 4] = std::array::from_fn(|m| x[m] - xp[m]);
    let delta_low = MinkowskiMetric::lower(&delta);
    let mut quartic = 0.0;
    let mut gx = [0.0; 4];
    let mut gxp = [0.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            for e in 0..4 {
                for d in 0..4 {
                    let v = r[a][e][b][d];
                    if v == 0.0 {
                        continue;
                    }
                    quartic += v * x[a] * x[b] * xp[e] * xp[d];
                    // R_{a e b d} with a free: x^b x′^e x′^d
                    gx[a] += v * x[b] * xp[e] * xp[d];
                    // R_{a e b d} with e free: x^a x^b x′^d
                    gxp[e] += v * x[a] * x[b] * xp[d];
                }
            }
        }
    }
    SigmaExpansion {
        sigma: 0.5 * MinkowskiMetric::dot(&delta, &delta) + k * quartic,
        grad_x: std::array::from_fn(|m| delta_low[m] + 2.0 * k * gx[m]),
        grad_xprime: std::array::from_fn(|m| -delta_low[m] + 2.0 * k * gxp[m]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantExpansion {
    /// `Δ ≈ 1 + ⅙ R_ab v^a v^b`.
    pub delta: f64,
    /// `√−g ≈ 1 − ⅙ R_ab v^a v^b`.
    pub sqrt_minus_g: f64,
}

pub fn expansion_vanvleck_and_detg(c: &CurvatureData, v: &[f64; 4]) -> DeterminantExpansion {
    let ric = c.ricci();
    let mut q = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            q += ric[a][b] * v[a] * v[b];
        }
    }
    DeterminantExpansion {
        delta: 1.0 + q / 6.0,
        sqrt_minus_g: 1.0 - q / 6.0,
    }
}

/// `Δ = −det(−σ_{μν′}) / (√−g(x) √−g(x′))` with the mixed second
/// derivatives of the numeric world function by central differences.
/// Slow (16 × 4 boundary-value solves); validation only.
pub fn numeric_van_vleck(
    chart: &dyn MetricChart,
    x: &[f64; 4],
    xp: &[f64; 4],
    h: f64,
    opts: &GeodesicOptions,
) -> Result<f64, SyngeError> {
    let mut mixed = Matrix4::zeros();
    for m in 0..4 {
        for n in 0..4 {
            let mut acc = 0.0;
            for (sm, sn, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                let mut a = *x;
                let mut b = *xp;
                a[m] += sm * h;
                b[n] += sn * h;
                acc += w * world_function_numeric(chart, &a, &b, opts)?;
            }
            mixed[(m, n)] = acc / (4.0 * h * h);
        }
    }
    let sg = |p: &[f64; 4]| (-chart.metric(p).determinant()).sqrt();
    Ok(-(-mixed).determinant() / (sg(x) * sg(xp)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub scale: f64,
    pub numeric: f64,
    pub expansion: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln abs_err` against `ln scale`; `None` when
    /// every error is at round-off level.
    pub fitted_exponent: Option<f64>,
}

/// Errors below this are treated as round-off when fitting.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > ROUNDOFF_FLOOR)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Compares numeric σ between the RNC points `s·x`, `s·x′` with the
/// curvature expansion at each scale and fits the error exponent.
pub fn scaling_test<C: MetricChart>(
    rnc: &RncChart<C>,
    curvature: &CurvatureData,
    pair: (&[f64; 4], &[f64; 4]),
    scales: &[f64],
) -> Result<ScalingReport, SyngeError> {
    let mut rows = Vec::with_capacity(scales.len());
    for &s in scales {
        let x: [f64; 4] = pair.0.map(|c| s * c);
        let xp: [f64; 4] = pair.1.map(|c| s * c);
        let numeric = rnc.world_function(&x, &xp)?;
        let expansion = expansion_sigma(curvature, &x, &xp).sigma;
        let abs_err = (numeric - expansion).abs();
        rows.push(ScalingRow {
            scale: s,
            numeric,
            expansion,
            abs_err,
            rel_err: abs_err / numeric.abs().max(f64::MIN_POSITIVE),
        });
    }
    let fitted_exponent = fit_log_slope(&rows.iter().map(|r| (r.scale, r.abs_err)).collect::<Vec<_>>());
    Ok(ScalingReport {
        rows,
        fitted_exponent,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantRow {
    pub scale: f64,
    /// `|Δ·√−g − 1|` from the two expansions.
    pub product_deviation: f64,
    pub sqrt_minus_g_numeric: f64,
    pub sqrt_minus_g_expansion: f64,
    pub sqrt_minus_g_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantReport {
    pub rows: Vec<DeterminantRow>,
    pub product_exponent: Option<f64>,
    pub sqrt_minus_g_exponent: Option<f64>,
}

/// Scaling of the Van Vleck and `√−g` expansions along `s·v`; the numeric
/// `√−g` uses a Jacobian step of `h_fraction · s · |v|`.
pub fn determinant_scaling<C: MetricChart>(
    rnc: &RncChart<C>,
    curvature: &CurvatureData,
    v: &[f64; 4],
    scales: &[f64],
    h_fraction: f64,
) -> Result<DeterminantReport, SyngeError> {
    let norm = max_abs(v);
    let mut rows = Vec::with_capacity(scales.len());
    for &s in scales {
        let x = v.map(|c| s * c);
        let e = expansion_vanvleck_and_detg(curvature, &x);
        let numeric = rnc.sqrt_minus_g(&x, h_fraction * s * norm)?;
        rows.push(DeterminantRow {
            scale: s,
            product_deviation: (e.delta * e.sqrt_minus_g - 1.0).abs(),
            sqrt_minus_g_numeric: numeric,
            sqrt_minus_g_expansion: e.sqrt_minus_g,
            sqrt_minus_g_error: (numeric - e.sqrt_minus_g).abs(),
        });
    }
    let fit = |f: fn(&DeterminantRow) -> f64| {
        fit_log_slope(&rows.iter().map(|r| (r.scale, f(r))).collect::<Vec<_>>())
    };
    Ok(DeterminantReport {
        product_exponent: fit(|r| r.product_deviation),
        sqrt_minus_g_exponent: fit(|r| r.sqrt_minus_g_error),
        rows,
    })
}
