//! The Gaussian spacetime smearing and its Fourier data.
//!
//! Fourier convention: `Λ̃(k) = ∫ d⁴x e^{i k·x} Λ(x)` with
//! `k·x = −k⁰t + 𝐤·𝐱`, evaluated on shell at `k⁰ = |𝐤|` unless stated
//! otherwise. Every transform here has the form `P(k) · Φ(k)` where
//! `Φ(k) = exp(−T²k⁰²/2 − σ²|𝐤|²/2 + i k·c)` and `P` is a complex
//! polynomial in `(k⁰, k¹, k², k³)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::tensor::MinkowskiMetric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmearingError {
    #[error("{name} must be positive and finite, got {value}")]
    InvalidWidth { name: &'static str, value: f64 },
    #[error("center coordinates must be finite")]
    NonFiniteCenter,
    #[error("monomial degree {0} exceeds 2")]
    MonomialDegree(u32),
    #[error("derivative index {0} out of range")]
    DerivativeIndex(usize),
}

/// `Λ(x) = exp(−(t−c⁰)²/2T² − |𝐱−𝐜|²/2σ²) / ((2π)² T σ³)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianSmearing {
    pub t_width: f64,
    pub sigma: f64,
    /// Length scale inside the Hadamard logarithm.
    pub l0: f64,
    pub center: [f64; 4],
}

impl GaussianSmearing {
    pub fn new(t_width: f64, sigma: f64, l0: f64) -> Result<Self, SmearingError> {
        let s = Self {
            t_width,
            sigma,
            l0,
            center: [0.0; 4],
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_center(mut self, center: [f64; 4]) -> Result<Self, SmearingError> {
        self.center = center;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), SmearingError> {
        for (name, value) in [("T", self.t_width), ("sigma", self.sigma), ("l0", self.l0)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SmearingError::InvalidWidth { name, value });
            }
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(SmearingError::NonFiniteCenter);
        }
        Ok(())
    }

    /// Widths per coordinate, `(T, σ, σ, σ)`.
    pub fn widths(&self) -> [f64; 4] {
        [self.t_width, self.sigma, self.sigma, self.sigma]
    }

    /// Effective region size `max(T, σ)`.
    pub fn size(&self) -> f64 {
        self.t_width.max(self.sigma)
    }

    pub fn peak(&self) -> f64 {
        1.0 / (4.0 * PI * PI * self.t_width * self.sigma.powi(3))
    }

    pub fn value(&self, x: &[f64; 4]) -> f64 {
        let w = self.widths();
        let q: f64 = (0..4)
            .map(|m| {
                let d = (x[m] - self.center[m]) / w[m];
                d * d
            })
            .sum();
        self.peak() * (-0.5 * q).exp()
    }

    /// Base transform on shell.
    pub fn fourier(&self, k: &[f64; 3]) -> Complex64 {
        EffectiveSmearing::plain(*self).fourier(k)
    }
}

/// Complex polynomial in `(k⁰, k¹, k², k³)`, keyed by exponent.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KPolynomial {
    terms: BTreeMap<[u8; 4], Complex64>,
}

impl KPolynomial {
    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert([0; 4], c);
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u8; 4], &Complex64)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&p| p as u32).sum())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, exp: [u8; 4], c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        *self.terms.entry(exp).or_default() += c;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::default();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(*e, *v);
        }
        out
    }

    /// Multiply by the variable `k_mu`.
    pub fn times_variable(&self, mu: usize) -> Self {
        let mut out = Self::default();
        for (e, v) in &self.terms {
            let mut e = *e;
            e[mu] += 1;
            out.add_term(e, *v);
        }
        out
    }

    pub fn derivative(&self, mu: usize) -> Self {
        let mut out = Self::default();
        for (e, v) in &self.terms {
            if e[mu] > 0 {
                let mut d = *e;
                d[mu] -= 1;
                out.add_term(d, v * e[mu] as f64);
            }
        }
        out
    }

    /// `self · conj(other)` (coefficients conjugated; variables are real).
    pub fn times_conj(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, va * vb.conj());
            }
        }
        out
    }

    pub fn eval(&self, k: &[f64; 4]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, v)| v * (0..4).map(|m| k[m].powi(e[m] as i32)).product::<f64>())
            .sum()
    }
}

/// `x^monomial · Λ` or `x^monomial · ∂^a Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveSmearing {
    pub base: GaussianSmearing,
    /// Exponents of `(t, x¹, x², x³)`, total degree at most 2.
    pub monomial: [u8; 4],
    /// Contravariant derivative index.
    pub derivative: Option<usize>,
}

const SPATIAL_SIGN: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

impl EffectiveSmearing {
    pub fn new(
        base: GaussianSmearing,
        monomial: [u8; 4],
        derivative: Option<usize>,
    ) -> Result<Self, SmearingError> {
        base.validate()?;
        let degree: u32 = monomial.iter().map(|&p| p as u32).sum();
        if degree > 2 {
            return Err(SmearingError::MonomialDegree(degree));
        }
        if let Some(a) = derivative {
            if a > 3 {
                return Err(SmearingError::DerivativeIndex(a));
            }
        }
        Ok(Self {
            base,
            monomial,
            derivative,
        })
    }

    pub fn plain(base: GaussianSmearing) -> Self {
        Self {
            base,
            monomial: [0; 4],
            derivative: None,
        }
    }

    /// Monomial `x^a x^b` (or `x^a` alone) as an exponent array.
    pub fn monomial_of(indices: &[usize]) -> [u8; 4] {
        let mut m = [0u8; 4];
        for &i in indices {
            m[i] += 1;
        }
        m
    }

    pub fn value(&self, x: &[f64; 4]) -> f64 {
        let poly: f64 = (0..4).map(|m| x[m].powi(self.monomial[m] as i32)).product();
        let base = self.base.value(x);
        match self.derivative {
            None => poly * base,
            Some(a) => {
                let w = self.base.widths()[a];
                let d = -(x[a] - self.base.center[a]) / (w * w) * base;
                poly * MinkowskiMetric::DIAGONAL[a] * d
            }
        }
    }

    /// `P` in `Λ̃_eff = P · Φ`.
    ///
    /// `∂^aΛ ↦ −i k^a`, and a factor `x^μ` acts as `−i s_μ ∂/∂k_μ` with
    /// `s = (−1, 1, 1, 1)`; on `P·Φ` this is
    /// `∂(PΦ) = (∂P + (i s_μ c^μ − w_μ² k_μ) P) Φ`.
    pub fn fourier_polynomial(&self) -> KPolynomial {
        let i = Complex64::new(0.0, 1.0);
        let mut p = match self.derivative {
            None => KPolynomial::one(),
            Some(a) => KPolynomial::one().times_variable(a).scale(-i),
        };
        let w = self.base.widths();
        for mu in 0..4 {
            for _ in 0..self.monomial[mu] {
                let s = SPATIAL_SIGN[mu];
                let shift = p.scale(i * s * self.base.center[mu]);
                let damp = p.times_variable(mu).scale(Complex64::new(-w[mu] * w[mu], 0.0));
                p = p.derivative(mu).add(&shift).add(&damp).scale(-i * s);
            }
        }
        p
    }

    /// `Φ(k)` for an arbitrary (possibly off-shell) four-momentum.
    pub fn envelope(&self, k: &[f64; 4]) -> Complex64 {
        let w = self.base.widths();
        let c = self.base.center;
        let mut re = 0.0;
        let mut ph = 0.0;
        for m in 0..4 {
            re -= 0.5 * w[m] * w[m] * k[m] * k[m];
            ph += SPATIAL_SIGN[m] * k[m] * c[m];
        }
        Complex64::from_polar(re.exp(), ph)
    }

    pub fn fourier_offshell(&self, k: &[f64; 4]) -> Complex64 {
        self.fourier_polynomial().eval(k) * self.envelope(k)
    }

    /// On-shell transform, `k⁰ = |𝐤|`.
    pub fn fourier(&self, k: &[f64; 3]) -> Complex64 {
        self.fourier_offshell(&on_shell(k))
    }
}

pub fn on_shell(k: &[f64; 3]) -> [f64; 4] {
    [(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt(), k[0], k[1], k[2]]
}
