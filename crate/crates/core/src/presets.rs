//! Analytic spacetimes: curvature at a chosen event and full metric charts.
//!
//! The event for each preset is fixed: the spatial origin for the
//! Minkowski and constant-curvature charts, and `(t, r, θ, φ) = (0, r, π/2, 0)`
//! for Schwarzschild. Frame components are taken in the coordinate-aligned
//! Gram–Schmidt frame at that event, time leg along `∂_t`, so the
//! Schwarzschild frame has leg 1 radial.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use nalgebra::Matrix4;
use serde::Serialize;
use thiserror::Error;

use crate::tensor::{CurvatureData, MinkowskiMetric, Rank4, TensorError, ZERO_RANK4};

/// `Γ^μ_{νρ}` indexed `[μ][ν][ρ]`.
pub type Christoffel = [[[f64; 4]; 4]; 4];
/// Orthonormal frame, `frame[a]` holds the chart components of `e_a`.
pub type Frame = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PresetError {
    #[error("outside the preset's domain: {0}")]
    DomainError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PresetSpec {
    Minkowski,
    DeSitter { hubble: f64 },
    Schwarzschild { mass: f64, radius: f64 },
    ConstantCurvature { k: f64 },
}

impl PresetSpec {
    pub const NAMES: [&'static str; 4] =
        ["minkowski", "de_sitter", "schwarzschild", "constant_curvature"];

    /// Looks a preset up by name. Parameter keys: `hubble`, `mass`, `radius`, `k`.
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self, PresetError> {
        let get = |key: &str| {
            params
                .get(key)
                .copied()
                .ok_or_else(|| PresetError::InvalidParameter(format!("{name} requires `{key}`")))
        };
        let spec = match name {
            "minkowski" => Self::Minkowski,
            "de_sitter" => Self::DeSitter {
                hubble: get("hubble")?,
            },
            "schwarzschild" => Self::Schwarzschild {
                mass: get("mass")?,
                radius: get("radius")?,
            },
            "constant_curvature" => Self::ConstantCurvature { k: get("k")? },
            other => return Err(PresetError::UnknownPreset(other.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Minkowski => "minkowski",
            Self::DeSitter { .. } => "de_sitter",
            Self::Schwarzschild { .. } => "schwarzschild",
            Self::ConstantCurvature { .. } => "constant_curvature",
        }
    }

    pub fn validate(&self) -> Result<(), PresetError> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(PresetError::InvalidParameter(format!("{key} must be finite")))
            }
        };
        match *self {
            Self::Minkowski => Ok(()),
            Self::DeSitter { hubble } => {
                finite("hubble", hubble)?;
                if hubble <= 0.0 {
                    return Err(PresetError::InvalidParameter(format!(
                        "de_sitter requires hubble > 0, got {hubble}"
                    )));
                }
                Ok(())
            }
            Self::Schwarzschild { mass, radius } => {
                finite("mass", mass)?;
                finite("radius", radius)?;
                if mass < 0.0 {
                    return Err(PresetError::InvalidParameter(format!(
                        "schwarzschild requires mass >= 0, got {mass}"
                    )));
                }
                if radius <= 2.0 * mass || radius <= 0.0 {
                    return Err(PresetError::DomainError(format!(
                        "schwarzschild requires r > 2M (r = {radius}, M = {mass})"
                    )));
                }
                Ok(())
            }
            Self::ConstantCurvature { k } => finite("k", k),
        }
    }

    /// The base event in the preset's chart.
    pub fn event(&self) -> [f64; 4] {
        match *self {
            Self::Schwarzschild { radius, .. } => [0.0, radius, FRAC_PI_2, 0.0],
            _ => [0.0; 4],
        }
    }
}

/// Orthonormal-frame curvature at the preset's event.
pub fn preset_curvature(spec: &PresetSpec) -> Result<CurvatureData, PresetError> {
    spec.validate()?;
    Ok(match *spec {
        PresetSpec::Minkowski => CurvatureData::zero(),
        PresetSpec::DeSitter { hubble } => CurvatureData::constant_curvature(hubble * hubble),
        PresetSpec::ConstantCurvature { k } => CurvatureData::constant_curvature(k),
        PresetSpec::Schwarzschild { mass, radius } => {
            let u = mass / radius.powi(3);
            CurvatureData::from_components(&[
                ([0, 1, 0, 1], -2.0 * u),
                ([0, 2, 0, 2], u),
                ([0, 3, 0, 3], u),
                ([1, 2, 1, 2], -u),
                ([1, 3, 1, 3], -u),
                ([2, 3, 2, 3], 2.0 * u),
            ])?
        }
    })
}

/// A four-dimensional coordinate chart with an analytic metric.
pub trait MetricChart: Send + Sync {
    fn metric(&self, x: &[f64; 4]) -> Matrix4<f64>;

    /// `∂_λ g_{μν}`, indexed `[λ]`.
    fn metric_derivatives(&self, x: &[f64; 4]) -> [Matrix4<f64>; 4];

    fn in_domain(&self, x: &[f64; 4]) -> bool;

    fn christoffel(&self, x: &[f64; 4]) -> Christoffel {
        christoffel_from_derivatives(&self.metric(x), &self.metric_derivatives(x))
    }
}

/// `Γ^μ_{νρ} = ½ g^{μλ} (∂_ν g_{λρ} + ∂_ρ g_{λν} − ∂_λ g_{νρ})`.
pub fn christoffel_from_derivatives(g: &Matrix4<f64>, dg: &[Matrix4<f64>; 4]) -> Christoffel {
    let ginv = g.try_inverse().unwrap_or_else(|| Matrix4::from_element(f64::NAN));
    let mut lowered = [[[0.0; 4]; 4]; 4];
    for (l, row) in lowered.iter_mut().enumerate() {
        for (n, col) in row.iter_mut().enumerate() {
            for (r, v) in col.iter_mut().enumerate() {
                *v = 0.5 * (dg[n][(l, r)] + dg[r][(l, n)] - dg[l][(n, r)]);
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for (m, gm) in gamma.iter_mut().enumerate() {
        for n in 0..4 {
            for r in n..4 {
                let v: f64 = (0..4).map(|l| ginv[(m, l)] * lowered[l][n][r]).sum();
                gm[n][r] = v;
                gm[r][n] = v;
            }
        }
    }
    gamma
}

/// The analytic charts backing the presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticChart {
    /// Inertial coordinates `(t, x, y, z)`.
    Minkowski,
    /// Static coordinates `(t, x, y, z)` of a maximally symmetric spacetime:
    /// `ds² = −(1 − K r²) dt² + dx² + K (x·dx)² / (1 − K r²)`.
    /// `K = H²` is the de Sitter static patch, `K < 0` anti-de Sitter.
    StaticConstantCurvature { k: f64 },
    /// Schwarzschild coordinates `(t, r, θ, φ)`.
    Schwarzschild { mass: f64 },
}

pub fn preset_chart(spec: &PresetSpec) -> Result<AnalyticChart, PresetError> {
    spec.validate()?;
    Ok(match *spec {
        PresetSpec::Minkowski => AnalyticChart::Minkowski,
        PresetSpec::DeSitter { hubble } => AnalyticChart::StaticConstantCurvature {
            k: hubble * hubble,
        },
        PresetSpec::ConstantCurvature { k } => AnalyticChart::StaticConstantCurvature { k },
        PresetSpec::Schwarzschild { mass, .. } => AnalyticChart::Schwarzschild { mass },
    })
}

fn eta_matrix() -> Matrix4<f64> {
    Matrix4::from_diagonal(&MinkowskiMetric::DIAGONAL.into())
}

impl MetricChart for AnalyticChart {
    fn metric(&self, x: &[f64; 4]) -> Matrix4<f64> {
        match *self {
            Self::Minkowski => eta_matrix(),
            Self::StaticConstantCurvature { k } => {
                let r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
                let f = 1.0 - k * r2;
                let mut g = eta_matrix();
                g[(0, 0)] = -f;
                for i in 1..4 {
                    for j in 1..4 {
                        g[(i, j)] += k * x[i] * x[j] / f;
                    }
                }
                g
            }
            Self::Schwarzschild { mass } => {
                let (r, th) = (x[1], x[2]);
                let f = 1.0 - 2.0 * mass / r;
                let s = th.sin();
                Matrix4::from_diagonal(&[-f, 1.0 / f, r * r, r * r * s * s].into())
            }
        }
    }

    fn metric_derivatives(&self, x: &[f64; 4]) -> [Matrix4<f64>; 4] {
        let mut dg = [Matrix4::zeros(); 4];
        match *self {
            Self::Minkowski => {}
            Self::StaticConstantCurvature { k } => {
                let r2 = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
                let f = 1.0 - k * r2;
                for (l, d) in dg.iter_mut().enumerate().skip(1) {
                    d[(0, 0)] = 2.0 * k * x[l];
                    for i in 1..4 {
                        for j in 1..4 {
                            let mut v = 2.0 * k * k * x[i] * x[j] * x[l] / (f * f);
                            if i == l {
                                v += k * x[j] / f;
                            }
                            if j == l {
                                v += k * x[i] / f;
                            }
                            d[(i, j)] = v;
                        }
                    }
                }
            }
            Self::Schwarzschild { mass } => {
                let (r, th) = (x[1], x[2]);
                let f = 1.0 - 2.0 * mass / r;
                let fp = 2.0 * mass / (r * r);
                let (s, c) = th.sin_cos();
                dg[1][(0, 0)] = -fp;
                dg[1][(1, 1)] = -fp / (f * f);
                dg[1][(2, 2)] = 2.0 * r;
                dg[1][(3, 3)] = 2.0 * r * s * s;
                dg[2][(3, 3)] = 2.0 * r * r * s * c;
            }
        }
        dg
    }

    fn in_domain(&self, x: &[f64; 4]) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match *self {
            Self::Minkowski => true,
            Self::StaticConstantCurvature { k } => {
                1.0 - k * (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]) > 0.0
            }
            Self::Schwarzschild { mass } => {
                x[1] > 2.0 * mass && x[2] > 0.0 && x[2] < std::f64::consts::PI
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("∂_t is not timelike at the event (g_tt = {0})")]
    TimeLegNotTimelike(f64),
    #[error("coordinate leg {0} is not spacelike after orthogonalization")]
    DegenerateLeg(usize),
}

fn g_dot(g: &Matrix4<f64>, u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            s += g[(m, n)] * u[m] * v[n];
        }
    }
    s
}

/// Coordinate-aligned Gram–Schmidt frame: `e_0 ∝ ∂_t`, then `∂_1, ∂_2, ∂_3`
/// orthogonalized in order.
pub fn orthonormal_frame(g: &Matrix4<f64>) -> Result<Frame, FrameError> {
    let mut frame = [[0.0; 4]; 4];
    let gtt = g[(0, 0)];
    if gtt >= 0.0 {
        return Err(FrameError::TimeLegNotTimelike(gtt));
    }
    frame[0][0] = 1.0 / (-gtt).sqrt();
    for i in 1..4 {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        for a in 0..i {
            let proj = MinkowskiMetric::DIAGONAL[a] * g_dot(g, &v, &frame[a]);
            for m in 0..4 {
                v[m] -= proj * frame[a][m];
            }
        }
        let n2 = g_dot(g, &v, &v);
        if n2 <= 0.0 {
            return Err(FrameError::DegenerateLeg(i));
        }
        let n = n2.sqrt();
        frame[i] = v.map(|c| c / n);
    }
    Ok(frame)
}

/// `g(e_a, e_b)` for a frame.
pub fn frame_gram(g: &Matrix4<f64>, frame: &Frame) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = g_dot(g, &frame[a], &frame[b]);
        }
    }
    out
}

/// Fourth-order central difference of a vector-valued function.
fn five_point<const N: usize>(
    f: impl Fn(&[f64; 4]) -> [f64; N],
    x: &[f64; 4],
    dir: usize,
    h: f64,
) -> [f64; N] {
    let at = |s: f64| {
        let mut y = *x;
        y[dir] += s * h;
        f(&y)
    };
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    }
    out
}

fn flatten_metric(g: &Matrix4<f64>) -> [f64; 16] {
    let mut out = [0.0; 16];
    for m in 0..4 {
        for n in 0..4 {
            out[4 * m + n] = g[(m, n)];
        }
    }
    out
}

/// Christoffel symbols from finite differences of the metric alone.
pub fn christoffel_fd(chart: &dyn MetricChart, x: &[f64; 4], h: f64) -> Christoffel {
    let mut dg = [Matrix4::zeros(); 4];
    for (l, d) in dg.iter_mut().enumerate() {
        let flat = five_point(|y| flatten_metric(&chart.metric(y)), x, l, h);
        *d = Matrix4::from_row_slice(&flat);
    }
    christoffel_from_derivatives(&chart.metric(x), &dg)
}

/// Frame components `R_{abcd}` at `x` from nested finite differences of the
/// metric (no analytic derivatives involved). Test oracle for
/// [`preset_curvature`].
pub fn riemann_fd(chart: &dyn MetricChart, x: &[f64; 4], frame: &Frame, h: f64) -> Rank4 {
    let flat_gamma = |y: &[f64; 4]| {
        let gm = christoffel_fd(chart, y, h);
        let mut out = [0.0; 64];
        for m in 0..4 {
            for n in 0..4 {
                for r in 0..4 {
                    out[16 * m + 4 * n + r] = gm[m][n][r];
                }
            }
        }
        out
    };
    let gamma = christoffel_fd(chart, x, h);
    let mut dgamma = [[0.0; 64]; 4];
    for (l, d) in dgamma.iter_mut().enumerate() {
        *d = five_point(flat_gamma, x, l, h);
    }
    let dg = |l: usize, m: usize, n: usize, r: usize| dgamma[l][16 * m + 4 * n + r];

    // R^m_{nrs} in chart components
    let mut mixed = ZERO_RANK4;
    for m in 0..4 {
        for n in 0..4 {
            for r in 0..4 {
                for s in 0..4 {
                    let mut v = dg(r, m, n, s) - dg(s, m, n, r);
                    for e in 0..4 {
                        v += gamma[m][r][e] * gamma[e][n][s] - gamma[m][s][e] * gamma[e][n][r];
                    }
                    mixed[m][n][r][s] = v;
                }
            }
        }
    }
    let g = chart.metric(x);
    let mut lowered = ZERO_RANK4;
    for m in 0..4 {
        for n in 0..4 {
            for r in 0..4 {
                for s in 0..4 {
                    lowered[m][n][r][s] = (0..4).map(|e| g[(m, e)] * mixed[e][n][r][s]).sum();
                }
            }
        }
    }
    project_to_frame(&lowered, frame)
}

/// `R_{abcd} = R_{μνρσ} e_a^μ e_b^ν e_c^ρ e_d^σ`.
pub fn project_to_frame(chart_components: &Rank4, frame: &Frame) -> Rank4 {
    // one index at a time keeps this O(4^5)
    let mut t = *chart_components;
    for slot in 0..4 {
        let mut next = ZERO_RANK4;
        for i0 in 0..4 {
            for i1 in 0..4 {
                for i2 in 0..4 {
                    for i3 in 0..4 {
                        let idx = [i0, i1, i2, i3];
                        let mut v = 0.0;
                        for m in 0..4 {
                            let mut src = idx;
                            src[slot] = m;
                            v += frame[idx[slot]][m] * t[src[0]][src[1]][src[2]][src[3]];
                        }
                        next[i0][i1][i2][i3] = v;
                    }
                }
            }
        }
        t = next;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_presets() -> Vec<PresetSpec> {
        vec![
            PresetSpec::Minkowski,
            PresetSpec::DeSitter { hubble: 0.1 },
            PresetSpec::DeSitter { hubble: 0.8 },
            PresetSpec::ConstantCurvature { k: -0.3 },
            PresetSpec::Schwarzschild {
                mass: 1.0,
                radius: 10.0,
            },
            PresetSpec::Schwarzschild {
                mass: 0.5,
                radius: 1.7,
            },
        ]
    }

    #[test]
    fn de_sitter_scalar_curvature() {
        let c = preset_curvature(&PresetSpec::DeSitter { hubble: 0.1 }).unwrap();
        assert!((c.scalar() - 0.12).abs() < 1e-15);
    }

    #[test]
    fn schwarzschild_is_vacuum() {
        let c = preset_curvature(&PresetSpec::Schwarzschild {
            mass: 1.0,
            radius: 10.0,
        })
        .unwrap();
        assert_eq!(c.component(0, 1, 0, 1), -2e-3);
        assert!(c.is_ricci_flat(1e-12));
        for (m, r) in [(0.1, 0.25), (3.0, 50.0), (1e-3, 1e3)] {
            let c = preset_curvature(&PresetSpec::Schwarzschild { mass: m, radius: r }).unwrap();
            assert!(c.is_ricci_flat(1e-12));
        }
    }

    #[test]
    fn minkowski_preset_is_flat() {
        assert_eq!(
            preset_curvature(&PresetSpec::Minkowski).unwrap(),
            CurvatureData::zero()
        );
        let g = AnalyticChart::Minkowski.metric(&[3.0, -1.0, 2.0, 0.5]);
        assert_eq!(g, eta_matrix());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            preset_curvature(&PresetSpec::Schwarzschild {
                mass: 1.0,
                radius: 2.0
            }),
            Err(PresetError::DomainError(_))
        ));
        assert!(matches!(
            preset_chart(&PresetSpec::DeSitter { hubble: -1.0 }),
            Err(PresetError::InvalidParameter(_))
        ));
        let mut params = BTreeMap::new();
        params.insert("hubble".to_string(), f64::NAN);
        assert!(PresetSpec::from_name("de_sitter", &params).is_err());
        assert!(matches!(
            PresetSpec::from_name("kerr", &params),
            Err(PresetError::UnknownPreset(_))
        ));
    }

    #[test]
    fn schwarzschild_line_element() {
        let chart = preset_chart(&PresetSpec::Schwarzschild {
            mass: 1.0,
            radius: 10.0,
        })
        .unwrap();
        let g = chart.metric(&[0.0, 10.0, FRAC_PI_2, 0.0]);
        assert!((g[(0, 0)] + 0.8).abs() < 1e-15);
        assert!((g[(1, 1)] - 1.25).abs() < 1e-15);
        assert!(!chart.in_domain(&[0.0, 1.9, 1.0, 0.0]));
    }

    #[test]
    fn de_sitter_static_patch_center_is_flat() {
        let chart = preset_chart(&PresetSpec::DeSitter { hubble: 0.1 }).unwrap();
        assert_eq!(chart.metric(&[0.0; 4]), eta_matrix());
        assert!(chart.in_domain(&[0.0, 9.0, 0.0, 0.0]));
        assert!(!chart.in_domain(&[0.0, 10.0, 0.1, 0.0]));
    }

    #[test]
    fn analytic_christoffels_match_finite_differences() {
        let points: [(PresetSpec, [f64; 4]); 3] = [
            (PresetSpec::DeSitter { hubble: 0.4 }, [0.3, 0.5, -0.7, 0.2]),
            (PresetSpec::ConstantCurvature { k: -0.5 }, [1.0, -0.4, 0.3, 0.9]),
            (
                PresetSpec::Schwarzschild {
                    mass: 1.0,
                    radius: 10.0,
                },
                [0.0, 7.5, 1.1, 0.4],
            ),
        ];
        for (spec, x) in points {
            let chart = preset_chart(&spec).unwrap();
            let exact = chart.christoffel(&x);
            // second-order stencil: error must shrink ~4x when h halves
            let central = |h: f64| {
                let mut dg = [Matrix4::zeros(); 4];
                for (l, d) in dg.iter_mut().enumerate() {
                    let mut xp = x;
                    let mut xm = x;
                    xp[l] += h;
                    xm[l] -= h;
                    *d = (chart.metric(&xp) - chart.metric(&xm)) / (2.0 * h);
                }
                christoffel_from_derivatives(&chart.metric(&x), &dg)
            };
            let err = |h: f64| {
                let approx = central(h);
                let mut e = 0.0_f64;
                for m in 0..4 {
                    for n in 0..4 {
                        for r in 0..4 {
                            e = e.max((approx[m][n][r] - exact[m][n][r]).abs());
                        }
                    }
                }
                e
            };
            let (e1, e2) = (err(1e-2), err(5e-3));
            assert!(e1 < 1e-4, "{spec:?}: {e1}");
            assert!(e2 < e1 / 3.0, "{spec:?}: not O(h^2): {e1} -> {e2}");
        }
    }

    #[test]
    fn frames_are_orthonormal() {
        for spec in all_presets() {
            let chart = preset_chart(&spec).unwrap();
            let g = chart.metric(&spec.event());
            let frame = orthonormal_frame(&g).unwrap();
            let gram = frame_gram(&g, &frame);
            for a in 0..4 {
                for b in 0..4 {
                    assert!((gram[a][b] - MinkowskiMetric::component(a, b)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn preset_curvature_matches_chart_curvature() {
        for spec in all_presets() {
            let chart = preset_chart(&spec).unwrap();
            let z = spec.event();
            let frame = orthonormal_frame(&chart.metric(&z)).unwrap();
            let h = 1e-3 * z[1].abs().max(1.0);
            let numeric = riemann_fd(&chart, &z, &frame, h);
            let exact = preset_curvature(&spec).unwrap();
            let scale = exact.max_abs_component().max(1e-300);
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        for d in 0..4 {
                            let diff = (numeric[a][b][c][d] - exact.component(a, b, c, d)).abs();
                            let tol = if exact.max_abs_component() == 0.0 {
                                1e-9
                            } else {
                                1e-6 * scale
                            };
                            assert!(diff <= tol, "{spec:?} R_{a}{b}{c}{d}: {diff}");
                        }
                    }
                }
            }
        }
    }
}
