//! Unruh-DeWitt detector: the gapless bit-flip channel driven by
//! `ξ = λ²⟨φ(Λ)²⟩` and the gapped excitation probability of a static
//! detector in the Minkowski vacuum.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::oracle::QuadratureOptions;
use crate::quadrature::{integrate_to_infinity, Estimate, Limits, QuadratureError};
use crate::smearing::{GaussianSmearing, SmearingError};
use crate::tensor::CurvatureData;
use crate::variance::{variance_breakdown, VarianceBreakdown, VarianceError, VarianceOptions};

pub const STATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectorError {
    #[error("invalid detector state: {0}")]
    InvalidState(String),
    #[error("variance is negative ({0:e}); the curvature expansion is outside its regime")]
    NegativeVariance(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Variance(#[from] VarianceError),
    #[error(transparent)]
    Smearing(#[from] SmearingError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Density matrix in the `{|g⟩, |e⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Matrix2<Complex64>);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl QubitState {
    pub fn new(m: Matrix2<Complex64>) -> Result<Self, DetectorError> {
        let s = Self(m);
        s.check(STATE_TOLERANCE)?;
        Ok(s)
    }

    pub fn ground() -> Self {
        Self(Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.0)))
    }

    pub fn excited() -> Self {
        Self(Matrix2::new(c(0.0), c(0.0), c(0.0), c(1.0)))
    }

    /// `½(1 + r·σ)`, requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self, DetectorError> {
        let off = Complex64::new(0.5 * r[0], -0.5 * r[1]);
        Self::new(Matrix2::new(
            c(0.5 * (1.0 + r[2])),
            off,
            off.conj(),
            c(0.5 * (1.0 - r[2])),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0[(0, 0)] + self.0[(1, 1)]
    }

    pub fn excited_population(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.0[(0, 0)].re;
        let d = self.0[(1, 1)].re;
        let b = 0.5 * (self.0[(0, 1)] + self.0[(1, 0)].conj());
        0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    }

    pub fn check(&self, tol: f64) -> Result<(), DetectorError> {
        if self.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(DetectorError::InvalidState("non-finite entry".into()));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(DetectorError::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(DetectorError::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(DetectorError::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `μρμ` with `μ = σ⁺ + σ⁻`.
    pub fn flipped(&self) -> Self {
        let m = &self.0;
        Self(Matrix2::new(m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)]))
    }

    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        (self.0 - other.0).iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl Serialize for QubitState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let part = |f: fn(&Complex64) -> f64| {
            [[f(&self.0[(0, 0)]), f(&self.0[(0, 1)])], [f(&self.0[(1, 0)]), f(&self.0[(1, 1)])]]
        };
        let mut s = serializer.serialize_struct("QubitState", 2)?;
        s.serialize_field("re", &part(|z| z.re))?;
        s.serialize_field("im", &part(|z| z.im))?;
        s.end()
    }
}

/// `(e^{−ξ} cosh ξ, e^{−ξ} sinh ξ)`, evaluated as `((1 + e^{−2ξ})/2, (1 − e^{−2ξ})/2)`.
pub fn channel_weights(xi: f64) -> (f64, f64) {
    let flip = -0.5 * (-2.0 * xi).exp_m1();
    (1.0 - flip, flip)
}

/// `ρ = e^{−ξ}cosh ξ ρ₀ + e^{−ξ}sinh ξ μρ₀μ`.
pub fn gapless_channel(xi: f64, rho0: &QubitState) -> Result<QubitState, DetectorError> {
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(DetectorError::InvalidParameter(format!(
            "xi must be finite and non-negative, got {xi}"
        )));
    }
    rho0.check(STATE_TOLERANCE)?;
    let (keep, flip) = channel_weights(xi);
    Ok(QubitState(rho0.0 * c(keep) + rho0.flipped().0 * c(flip)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelStrength {
    pub xi: f64,
    pub lambda_coupling: f64,
    pub variance: f64,
}

/// `ξ = λ² ⟨φ(Λ)²⟩`.
pub fn xi_from_variance(
    lambda_coupling: f64,
    v: &VarianceBreakdown,
) -> Result<ChannelStrength, DetectorError> {
    if !lambda_coupling.is_finite() {
        return Err(DetectorError::InvalidParameter(
            "coupling must be finite".into(),
        ));
    }
    if v.total < 0.0 {
        return Err(DetectorError::NegativeVariance(v.total));
    }
    Ok(ChannelStrength {
        xi: lambda_coupling * lambda_coupling * v.total,
        lambda_coupling,
        variance: v.total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectedState {
    pub final_state: QubitState,
    pub strength: ChannelStrength,
    pub breakdown: VarianceBreakdown,
}

pub fn curvature_corrected_state(
    lambda_coupling: f64,
    s: &GaussianSmearing,
    curvature: &CurvatureData,
    state_term: f64,
    rho0: &QubitState,
    options: &VarianceOptions,
) -> Result<CorrectedState, DetectorError> {
    let breakdown = variance_breakdown(curvature, s, state_term, options)?;
    let strength = xi_from_variance(lambda_coupling, &breakdown)?;
    let final_state = gapless_channel(strength.xi, rho0)?;
    Ok(CorrectedState {
        final_state,
        strength,
        breakdown,
    })
}

/// `P = λ² (2π)⁻³ ∫ d³k/(2|k|) e^{−T²(|k|+Ω)²} e^{−σ²|k|²}` for a static
/// detector in the Minkowski vacuum.
pub fn gapped_probability_minkowski(
    lambda_coupling: f64,
    gap_omega: f64,
    t: f64,
    sigma: f64,
    q: &QuadratureOptions,
) -> Result<Estimate, DetectorError> {
    GaussianSmearing::new(t, sigma, 1.0)?;
    if !(gap_omega.is_finite() && gap_omega >= 0.0) {
        return Err(DetectorError::InvalidParameter(format!(
            "gap must be finite and non-negative, got {gap_omega}"
        )));
    }
    if !lambda_coupling.is_finite() {
        return Err(DetectorError::InvalidParameter(
            "coupling must be finite".into(),
        ));
    }
    let pref = lambda_coupling * lambda_coupling / (4.0 * PI * PI);
    let (t2, s2) = (t * t, sigma * sigma);
    let est = integrate_to_infinity(
        |k| pref * k * (-t2 * (k + gap_omega).powi(2) - s2 * k * k).exp(),
        0.0,
        &Limits::new(0.0, q.tolerance, q.max_evaluations),
    )?;
    Ok(est)
}
