//! Closed-form coefficients and the curvature-corrected variance
//! `⟨φ(Λ)²⟩ = minkowski + ricci + riemann + log + state`.
//!
//! With `D = T² + σ²`:
//!
//! * `L^{00} = T²/(4π²D)`, `L^{ij} = σ²δ^{ij}/(4π²D)`;
//! * `A^{00} = T²σ²/(8π²D²)`, `A^{ij} = δ^{ij}(3T²σ² + 2σ⁴)/(24π²D²)`;
//! * `B^{0i0j}`, `B^{i00j}`, `B^{0ij0}` and `B^{ijkl}` as filled in by
//!   [`closed_form_coefficients`], every other component zero;
//! * `L̃^{abcd} = (B^{abcd} + δ^{ad}A^{bc}) / 8π²`.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{integrate_tanh_sinh, integrate_to_infinity, Limits, QuadratureError};
use crate::smearing::{GaussianSmearing, SmearingError};
use crate::tensor::{CurvatureData, CurvatureSums, Rank2, Rank4, ZERO_RANK2, ZERO_RANK4};

/// Above this value of `ℓ·√max|R_abcd|` the leading-order expansion is
/// flagged as unreliable.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VarianceError {
    #[error(transparent)]
    Smearing(#[from] SmearingError),
    #[error("P_ln quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("state term must be finite, got {0}")]
    NonFiniteStateTerm(f64),
}

/// Which logarithm the `P_ln` average uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogConvention {
    /// `ln((x−x′)²/ℓ₀²)`.
    #[default]
    Standard,
    /// `ln((x−x′)²/(2ℓ₀²))`: the standard value minus `ln 2`.
    HalfInterval,
}

impl LogConvention {
    pub fn offset(self) -> f64 {
        match self {
            Self::Standard => 0.0,
            Self::HalfInterval => -std::f64::consts::LN_2,
        }
    }
}

fn check_widths(t: f64, sigma: f64) -> Result<f64, VarianceError> {
    // l0 does not enter here
    GaussianSmearing::new(t, sigma, 1.0)?;
    Ok(t * t + sigma * sigma)
}

/// `1/(8π²(σ² + T²))`.
pub fn minkowski_variance(t: f64, sigma: f64) -> Result<f64, VarianceError> {
    let d = check_widths(t, sigma)?;
    Ok(1.0 / (8.0 * PI * PI * d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    pub l2: Rank2,
    pub a2: Rank2,
    pub b4: Rank4,
    pub ltilde4: Rank4,
    pub p_ln: Option<f64>,
}

pub fn closed_form_coefficients(t: f64, sigma: f64) -> Result<CoefficientSet, VarianceError> {
    let d = check_widths(t, sigma)?;
    let (t2, s2) = (t * t, sigma * sigma);
    let (t4, s4) = (t2 * t2, s2 * s2);
    let pi2 = PI * PI;
    let d2 = d * d;
    let d3 = d2 * d;

    let mut l2 = ZERO_RANK2;
    let mut a2 = ZERO_RANK2;
    l2[0][0] = t2 / (4.0 * pi2 * d);
    a2[0][0] = t2 * s2 / (8.0 * pi2 * d2);
    for i in 1..4 {
        l2[i][i] = s2 / (4.0 * pi2 * d);
        a2[i][i] = (3.0 * t2 * s2 + 2.0 * s4) / (24.0 * pi2 * d2);
    }

    let mut b4 = ZERO_RANK4;
    for i in 1..4 {
        b4[0][i][0][i] = t2 * s4 / (12.0 * pi2 * d3);
        b4[i][0][0][i] = -t2 * s2 * (2.0 * t2 + s2) / (12.0 * pi2 * d3);
        b4[0][i][i][0] = s4 * (2.0 * t2 + s2) / (12.0 * pi2 * d3);
    }
    // only slots with i ≠ j and k ≠ l survive contraction with R_ijkl
    for i in 1..4 {
        for j in 1..4 {
            for k in 1..4 {
                for l in 1..4 {
                    if i == j || k == l {
                        continue;
                    }
                    let dil_djk = f64::from(u8::from(i == l && j == k));
                    let dik_djl = f64::from(u8::from(i == k && j == l));
                    b4[i][j][k][l] = -s2
                        * (dil_djk * (15.0 * t4 + 20.0 * t2 * s2 + 7.0 * s4)
                            + 2.0 * s4 * dik_djl)
                        / (120.0 * pi2 * d3);
                }
            }
        }
    }

    let mut ltilde4 = ZERO_RANK4;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for e in 0..4 {
                    let delta = if a == e { a2[b][c] } else { 0.0 };
                    ltilde4[a][b][c][e] = (b4[a][b][c][e] + delta) / (8.0 * pi2);
                }
            }
        }
    }

    Ok(CoefficientSet {
        l2,
        a2,
        b4,
        ltilde4,
        p_ln: None,
    })
}

/// `E[ln|(x−x′)²|] − 2 ln ℓ₀` for `x, x′` drawn independently from `Λ`.
///
/// The difference has `Δt ~ N(0, 2T²)` and `Δx^i ~ N(0, 2σ²)`. In polar
/// variables `|Δt| = R cos α`, `|Δ𝐱| = R sin α` the average is a 2D integral
/// whose only singularity is `ln|cos 2α|` on the light cone `α = π/4`;
/// each half of the angular range is integrated with tanh-sinh in the
/// distance to the light cone, and `R` with Gauss–Kronrod.
pub fn p_ln(
    t: f64,
    sigma: f64,
    l0: f64,
    convention: LogConvention,
    limits: &Limits,
) -> Result<f64, VarianceError> {
    GaussianSmearing::new(t, sigma, l0)?;
    let st2 = 2.0 * t * t;
    let sx2 = 2.0 * sigma * sigma;
    let norm = 2.0 / (PI * st2.sqrt() * sx2 * sx2.sqrt());
    let inner_limits = Limits::new(0.0, 0.1 * limits.rel_tol, limits.max_evaluations);
    let failure: Cell<Option<QuadratureError>> = Cell::new(None);

    // side = −1: α = π/4 − δ (timelike half); side = +1: α = π/4 + δ
    let angular = |side: f64| {
        let failure = &failure;
        let inner_limits = &inner_limits;
        move |delta: f64| -> f64 {
            let alpha = std::f64::consts::FRAC_PI_4 + side * delta;
            let (sa, ca) = alpha.sin_cos();
            let c = ca * ca / (2.0 * st2) + sa * sa / (2.0 * sx2);
            let light_cone = (2.0 * delta).sin().ln();
            // R = u/√c keeps the radial Gaussian at unit width
            let scale = c.sqrt().recip();
            let radial = integrate_to_infinity(
                |u| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    let r = u * scale;
                    u * u * u * (-u * u).exp() * (2.0 * r.ln() + light_cone)
                },
                0.0,
                inner_limits,
            );
            match radial {
                Ok(e) => norm * sa * sa * e.value * scale.powi(4),
                Err(err) => {
                    failure.set(Some(err));
                    0.0
                }
            }
        }
    };

    let mut total = 0.0;
    for side in [-1.0, 1.0] {
        let est = integrate_tanh_sinh(angular(side), 0.0, std::f64::consts::FRAC_PI_4, limits)?;
        if let Some(err) = failure.take() {
            return Err(err.into());
        }
        total += est.value;
    }
    Ok(total - 2.0 * l0.ln() + convention.offset())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureCorrections {
    pub ricci_term: f64,
    /// Trace-sum form.
    pub riemann_term: f64,
    /// Full contraction `−(4π²/3) R_abcd L̃^abcd`.
    pub riemann_term_contracted: f64,
    pub log_term: f64,
}

/// `−(1/12) R_ab L^ab`, `−(4π²/3) R_abcd L̃^abcd` by two routes, and
/// `(1/12) R P_ln`.
pub fn curvature_corrections(
    c: &CurvatureData,
    t: f64,
    sigma: f64,
    p_ln: f64,
) -> Result<CurvatureCorrections, VarianceError> {
    let d = check_widths(t, sigma)?;
    let CurvatureSums {
        sum_0i0i,
        sum_ijij,
        r00,
        r_spatial_trace,
    } = c.curvature_sums();
    let (t2, s2) = (t * t, sigma * sigma);
    let pi2 = PI * PI;

    let ricci_term = -(t2 * r00 + s2 * r_spatial_trace) / (48.0 * pi2 * d);
    let riemann_term = s2 * (t2 * t2 + 4.0 * t2 * s2 + 2.0 * s2 * s2) / (72.0 * pi2 * d * d * d)
        * sum_0i0i
        + s2 * s2 / (144.0 * pi2 * d * d) * sum_ijij;

    let coeffs = closed_form_coefficients(t, sigma)?;
    let r = c.riemann();
    let mut contraction = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for e in 0..4 {
                for f in 0..4 {
                    contraction += r[a][b][e][f] * coeffs.ltilde4[a][b][e][f];
                }
            }
        }
    }
    Ok(CurvatureCorrections {
        ricci_term,
        riemann_term,
        riemann_term_contracted: -(4.0 * pi2 / 3.0) * contraction,
        log_term: c.scalar() * p_ln / 12.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceDiagnostics {
    /// `max(T, σ) · √max|R_abcd|`.
    pub ell_times_sqrt_curvature: f64,
    pub p_ln: f64,
    pub log_convention: LogConvention,
    /// `|trace-sum − full contraction|` for the Riemann term.
    pub riemann_path_difference: f64,
    pub validity_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceBreakdown {
    pub minkowski: f64,
    pub ricci_term: f64,
    pub riemann_term: f64,
    pub log_term: f64,
    pub state_term: f64,
    pub total: f64,
    pub diagnostics: VarianceDiagnostics,
}

impl VarianceBreakdown {
    pub fn curvature_correction(&self) -> f64 {
        self.ricci_term + self.riemann_term + self.log_term
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.diagnostics.validity_warning {
            out.push(format!(
                "smearing size times curvature scale is {:.3e} (> {VALIDITY_THRESHOLD}); leading-order expansion may be unreliable",
                self.diagnostics.ell_times_sqrt_curvature
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceOptions {
    pub log_convention: LogConvention,
    pub limits: Limits,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            log_convention: LogConvention::Standard,
            limits: Limits::new(1e-13, 1e-11, 2_000_000),
        }
    }
}

pub fn variance_breakdown(
    c: &CurvatureData,
    s: &GaussianSmearing,
    state_term: f64,
    options: &VarianceOptions,
) -> Result<VarianceBreakdown, VarianceError> {
    s.validate()?;
    if !state_term.is_finite() {
        return Err(VarianceError::NonFiniteStateTerm(state_term));
    }
    let minkowski = minkowski_variance(s.t_width, s.sigma)?;
    let pln = p_ln(
        s.t_width,
        s.sigma,
        s.l0,
        options.log_convention,
        &options.limits,
    )?;
    let corr = curvature_corrections(c, s.t_width, s.sigma, pln)?;
    let total = minkowski + corr.ricci_term + corr.riemann_term + corr.log_term + state_term;
    let ell = s.size() * c.max_abs_component().sqrt();
    Ok(VarianceBreakdown {
        minkowski,
        ricci_term: corr.ricci_term,
        riemann_term: corr.riemann_term,
        log_term: corr.log_term,
        state_term,
        total,
        diagnostics: VarianceDiagnostics {
            ell_times_sqrt_curvature: ell,
            p_ln: pln,
            log_convention: options.log_convention,
            riemann_path_difference: (corr.riemann_term - corr.riemann_term_contracted).abs(),
            validity_warning: ell > VALIDITY_THRESHOLD,
        },
    })
}
