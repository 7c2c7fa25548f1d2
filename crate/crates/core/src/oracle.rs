//! Brute-force evaluations of the smeared integrals, independent of the
//! closed forms in [`crate::variance`].
//!
//! Momentum-space oracles integrate `(2π)⁻³ ∫ d³k/(2|k|) Λ̃₁ Λ̃₂*` with the
//! transforms built by [`crate::smearing`]; the radial and polar integrals
//! are done by adaptive quadrature and the azimuth in closed form.
//! Monte-Carlo oracles draw from counter-based ChaCha streams keyed by
//! `(seed, chunk index)`, so results do not depend on the thread count.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quadrature::{integrate, integrate_to_infinity, Estimate, Limits, QuadratureError};
use crate::smearing::{EffectiveSmearing, GaussianSmearing, KPolynomial, SmearingError};
use crate::variance::LogConvention;

/// Samples per Monte-Carlo chunk; fixed so chunk streams are reproducible.
pub const CHUNK_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid quadrature options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Smearing(#[from] SmearingError),
    #[error("invalid indices {indices:?} for {target:?}")]
    Index {
        target: CoefficientTarget,
        indices: Vec<usize>,
    },
    #[error("epsilon extrapolation unstable: per-epsilon means {means:?}")]
    ExtrapolationUnstable { means: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    DeterministicRadial,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureOptions {
    pub method: Method,
    /// Relative tolerance (deterministic methods).
    pub tolerance: f64,
    /// Integrand-evaluation budget; the sample count for Monte Carlo.
    pub max_evaluations: usize,
    pub seed: u64,
    /// Regulator values for the position-space kernel, strictly decreasing.
    pub epsilon_sequence: Vec<f64>,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            method: Method::DeterministicRadial,
            tolerance: 1e-10,
            max_evaluations: 2_000_000,
            seed: 42,
            epsilon_sequence: vec![0.4, 0.2, 0.1, 0.05],
        }
    }
}

impl QuadratureOptions {
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            max_evaluations: samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(OracleError::InvalidOptions(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.epsilon_sequence.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(OracleError::InvalidOptions(
                "epsilon_sequence entries must be positive".into(),
            ));
        }
        if self.epsilon_sequence.windows(2).any(|w| w[1] >= w[0]) {
            return Err(OracleError::InvalidOptions(
                "epsilon_sequence must be strictly decreasing".into(),
            ));
        }
        Ok(())
    }

    fn limits(&self, abs_tol: f64) -> Limits {
        Limits::new(abs_tol, self.tolerance, self.max_evaluations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoefficientTarget {
    L2,
    A2,
    B4,
}

/// `∫₀^{2π} cos^p φ sin^q φ dφ`.
fn azimuthal_moment(p: u8, q: u8) -> f64 {
    if p % 2 == 1 || q % 2 == 1 {
        return 0.0;
    }
    let odd_double_factorial = |n: i32| (1..=n).rev().step_by(2).map(f64::from).product::<f64>();
    let even_double_factorial = |n: i32| (2..=n).rev().step_by(2).map(f64::from).product::<f64>();
    2.0 * PI * odd_double_factorial(p as i32 - 1) * odd_double_factorial(q as i32 - 1)
        / even_double_factorial(p as i32 + q as i32)
}

/// `(2π)⁻³ ∫ d³k/(2|k|) Re[P(k)] e^{−D|k|²}` on shell.
fn on_shell_integral(
    poly: &KPolynomial,
    d: f64,
    q: &QuadratureOptions,
    abs_tol: f64,
) -> Result<Estimate, OracleError> {
    // (power of |k|, power of sin θ, power of cos θ, coefficient incl. azimuth)
    let terms: Vec<(i32, i32, i32, f64)> = poly
        .terms()
        .filter_map(|(e, c)| {
            let az = azimuthal_moment(e[1], e[2]);
            (az != 0.0 && c.re != 0.0).then(|| {
                let n = e.iter().map(|&p| p as i32).sum();
                (n, (e[1] + e[2]) as i32, e[3] as i32, c.re * az)
            })
        })
        .collect();
    let norm = 1.0 / (8.0 * PI * PI * PI);
    // each term factorises; the polar moments are integrated once, up front
    let inner_limits = Limits::new(1e-15, 1e-3 * q.tolerance, q.max_evaluations);
    let mut radial_terms: Vec<(i32, f64)> = Vec::with_capacity(terms.len());
    for &(n, ps, pc, coef) in &terms {
        let polar = integrate(
            |theta| {
                let (s, c) = theta.sin_cos();
                s.powi(ps + 1) * c.powi(pc)
            },
            0.0,
            PI,
            &inner_limits,
        )?;
        radial_terms.push((n, coef * polar.value));
    }
    let radial = |r: f64| {
        let poly: f64 = radial_terms.iter().map(|&(n, w)| w * r.powi(n)).sum();
        norm * 0.5 * r * (-d * r * r).exp() * poly
    };
    let est = integrate_to_infinity(radial, 0.0, &q.limits(abs_tol))?;
    Ok(est)
}

/// `(2π)⁻³ ∫ d³k/(2|k|) |Λ̃(k)|²`.
pub fn variance_momentum_quadrature(
    s: &GaussianSmearing,
    q: &QuadratureOptions,
) -> Result<Estimate, OracleError> {
    s.validate()?;
    q.validate()?;
    let norm = 4.0 * PI / (8.0 * PI * PI * PI);
    let est = integrate_to_infinity(
        |k| norm * 0.5 * k * s.fourier(&[0.0, 0.0, k]).norm_sqr(),
        0.0,
        &q.limits(0.0),
    )?;
    Ok(est)
}

/// The `(Λ^eff₁, Λ^eff₂)` pairs whose two-point integrals sum to one
/// coefficient component.
pub fn effective_pairs(
    base: &GaussianSmearing,
    target: CoefficientTarget,
    indices: &[usize],
) -> Result<Vec<(EffectiveSmearing, EffectiveSmearing)>, OracleError> {
    let bad = || OracleError::Index {
        target,
        indices: indices.to_vec(),
    };
    let expected = match target {
        CoefficientTarget::L2 | CoefficientTarget::A2 => 2,
        CoefficientTarget::B4 => 4,
    };
    if indices.len() != expected || indices.iter().any(|&i| i > 3) {
        return Err(bad());
    }
    let mono = EffectiveSmearing::monomial_of;
    let eff = |m: [u8; 4], d: Option<usize>| EffectiveSmearing::new(*base, m, d);
    Ok(match target {
        CoefficientTarget::L2 => {
            let (a, b) = (indices[0], indices[1]);
            vec![
                (eff(mono(&[a, b]), None)?, eff([0; 4], None)?),
                (eff(mono(&[a]), None)?, eff(mono(&[b]), None)?),
                (eff(mono(&[b]), None)?, eff(mono(&[a]), None)?),
                (eff([0; 4], None)?, eff(mono(&[a, b]), None)?),
            ]
        }
        CoefficientTarget::A2 => {
            let (b, c) = (indices[0], indices[1]);
            vec![(eff([0; 4], None)?, eff(mono(&[b, c]), None)?)]
        }
        CoefficientTarget::B4 => {
            let [a, b, c, d] = [indices[0], indices[1], indices[2], indices[3]];
            vec![(eff(mono(&[d]), Some(a))?, eff(mono(&[b, c]), None)?)]
        }
    })
}

/// Deterministic momentum-space value of one component of `L`, `A` or `B`.
///
/// The coefficients are dimensionless and of order `10⁻²`, so an absolute
/// floor of `10⁻³ × tolerance` is used alongside the relative tolerance.
pub fn coefficient_oracle(
    t: f64,
    sigma: f64,
    target: CoefficientTarget,
    indices: &[usize],
    q: &QuadratureOptions,
) -> Result<Estimate, OracleError> {
    q.validate()?;
    let base = GaussianSmearing::new(t, sigma, 1.0)?;
    let mut poly = KPolynomial::default();
    for (f1, f2) in effective_pairs(&base, target, indices)? {
        poly = poly.add(&f1.fourier_polynomial().times_conj(&f2.fourier_polynomial()));
    }
    on_shell_integral(&poly, t * t + sigma * sigma, q, 1e-3 * q.tolerance)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn estimate(&self) -> MonteCarloEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = (self.sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
        MonteCarloEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: self.n,
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `sample` over `total` draws in fixed-size chunks, each with its own
/// stream, and merges the per-chunk moments in chunk order.
fn chunked<const K: usize>(
    total: usize,
    seed: u64,
    sample: impl Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
) -> [Moments; K] {
    let chunks = total.div_ceil(CHUNK_SIZE);
    let partial: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let n = CHUNK_SIZE.min(total - c * CHUNK_SIZE);
            let mut m = [Moments::default(); K];
            for _ in 0..n {
                let v = sample(&mut rng);
                for k in 0..K {
                    m[k].push(v[k]);
                }
            }
            m
        })
        .collect();
    let mut out = [Moments::default(); K];
    for p in &partial {
        for k in 0..K {
            out[k].merge(&p[k]);
        }
    }
    out
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Monte-Carlo `E[ln|(x−x′)²|] − 2 ln ℓ₀`, sampling the difference directly.
pub fn pln_oracle(
    t: f64,
    sigma: f64,
    l0: f64,
    convention: LogConvention,
    q: &QuadratureOptions,
) -> Result<MonteCarloEstimate, OracleError> {
    GaussianSmearing::new(t, sigma, l0)?;
    q.validate()?;
    if q.method != Method::MonteCarlo || q.max_evaluations < 2 {
        return Err(OracleError::InvalidOptions(
            "pln_oracle needs method = monte_carlo and at least 2 samples".into(),
        ));
    }
    let (st, sx) = (std::f64::consts::SQRT_2 * t, std::f64::consts::SQRT_2 * sigma);
    let [m] = chunked(q.max_evaluations, q.seed, |rng| {
        let dt = st * normal(rng);
        let (a, b, c) = (sx * normal(rng), sx * normal(rng), sx * normal(rng));
        [(-dt * dt + a * a + b * b + c * c).abs().ln()]
    });
    let mut est = m.estimate();
    est.mean += -2.0 * l0.ln() + convention.offset();
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PositionKernel {
    /// `Re W₀`.
    W0,
    /// `(x+x′)^a (x+x′)^b Re W₀`.
    W0Monomial { a: usize, b: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionSpaceEstimate {
    /// Extrapolated to `ε → 0`.
    pub value: MonteCarloEstimate,
    /// `(ε, estimate)` for every regulator value.
    pub per_epsilon: Vec<(f64, MonteCarloEstimate)>,
}

/// Lagrange weights that extrapolate values at `eps` to `ε = 0`.
pub fn extrapolation_weights(eps: &[f64]) -> Vec<f64> {
    (0..eps.len())
        .map(|k| {
            (0..eps.len())
                .filter(|&j| j != k)
                .map(|j| eps[j] / (eps[j] - eps[k]))
                .product()
        })
        .collect()
}

const MAX_EPSILONS: usize = 8;

/// `∫∫ Λ(x)Λ(x′) K(x, x′) d⁴x d⁴x′` with the regulated Wightman kernel
/// `Re W₀ = Re[1/(4π² s)]`, `s = −(Δt − iε)² + |Δ𝐱|²`, extrapolated to
/// `ε → 0` by polynomial (Richardson) extrapolation applied per sample.
pub fn position_space_mc(
    s: &GaussianSmearing,
    kernel: PositionKernel,
    q: &QuadratureOptions,
) -> Result<PositionSpaceEstimate, OracleError> {
    s.validate()?;
    q.validate()?;
    let eps = q.epsilon_sequence.clone();
    if eps.is_empty() || eps.len() > MAX_EPSILONS {
        return Err(OracleError::InvalidOptions(format!(
            "epsilon_sequence needs 1 to {MAX_EPSILONS} entries"
        )));
    }
    if q.max_evaluations < 2 {
        return Err(OracleError::InvalidOptions("need at least 2 samples".into()));
    }
    if let PositionKernel::W0Monomial { a, b } = kernel {
        if a > 3 || b > 3 {
            return Err(OracleError::InvalidOptions(format!(
                "monomial indices ({a}, {b}) out of range"
            )));
        }
    }
    let weights = extrapolation_weights(&eps);
    let w = s.widths();
    let c = s.center;
    let k = eps.len();
    let inv_4pi2 = 1.0 / (4.0 * PI * PI);

    // slots: [extrapolated, per-ε values, successive per-ε differences]
    let moments = chunked::<{ 2 * MAX_EPSILONS }>(q.max_evaluations, q.seed, |rng| {
        // x − x′ and x + x′ are independent for equal Gaussians
        let mut u = [0.0; 4];
        let mut v = [0.0; 4];
        for m in 0..4 {
            u[m] = std::f64::consts::SQRT_2 * w[m] * normal(rng);
            v[m] = 2.0 * c[m] + std::f64::consts::SQRT_2 * w[m] * normal(rng);
        }
        let insertion = match kernel {
            PositionKernel::W0 => 1.0,
            PositionKernel::W0Monomial { a, b } => v[a] * v[b],
        };
        let spatial = u[1] * u[1] + u[2] * u[2] + u[3] * u[3];
        let mut out = [0.0; 2 * MAX_EPSILONS];
        let mut values = [0.0; MAX_EPSILONS];
        for (j, &e) in eps.iter().enumerate() {
            let re = -u[0] * u[0] + e * e + spatial;
            let im = 2.0 * e * u[0];
            values[j] = insertion * inv_4pi2 * re / (re * re + im * im);
        }
        out[0] = (0..k).map(|j| weights[j] * values[j]).sum();
        out[1..=k].copy_from_slice(&values[..k]);
        for j in 0..k.saturating_sub(1) {
            out[1 + k + j] = values[j + 1] - values[j];
        }
        out
    });

    let per_epsilon: Vec<(f64, MonteCarloEstimate)> = eps
        .iter()
        .enumerate()
        .map(|(j, &e)| (e, moments[1 + j].estimate()))
        .collect();
    let diffs: Vec<MonteCarloEstimate> = (0..k.saturating_sub(1))
        .map(|j| moments[1 + k + j].estimate())
        .collect();
    // a sign flip between two significant successive differences
    for pair in diffs.windows(2) {
        let significant = |d: &MonteCarloEstimate| d.mean.abs() > 3.0 * d.std_error;
        if significant(&pair[0]) && significant(&pair[1]) && pair[0].mean * pair[1].mean < 0.0 {
            return Err(OracleError::ExtrapolationUnstable {
                means: per_epsilon.iter().map(|(_, m)| m.mean).collect(),
            });
        }
    }
    Ok(PositionSpaceEstimate {
        value: moments[0].estimate(),
        per_epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azimuth_moments() {
        assert!((azimuthal_moment(0, 0) - 2.0 * PI).abs() < 1e-15);
        assert!((azimuthal_moment(2, 0) - PI).abs() < 1e-15);
        assert!((azimuthal_moment(2, 2) - PI / 4.0).abs() < 1e-15);
        assert!((azimuthal_moment(4, 0) - 3.0 * PI / 4.0).abs() < 1e-15);
        assert_eq!(azimuthal_moment(1, 2), 0.0);
    }

    #[test]
    fn richardson_weights() {
        let w = extrapolation_weights(&[0.4, 0.2, 0.1, 0.05]);
        let expected = [-1.0 / 21.0, 2.0 / 3.0, -8.0 / 3.0, 64.0 / 21.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(extrapolation_weights(&[0.3]), vec![1.0]);
    }

    #[test]
    fn options_validation() {
        let mut q = QuadratureOptions::default();
        q.epsilon_sequence = vec![0.1, 0.2];
        assert!(q.validate().is_err());
        q.epsilon_sequence = vec![0.2, -0.1];
        assert!(q.validate().is_err());
        q.epsilon_sequence = vec![0.2];
        q.tolerance = 0.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn index_errors() {
        let q = QuadratureOptions::default();
        assert!(matches!(
            coefficient_oracle(1.0, 1.0, CoefficientTarget::B4, &[0, 1], &q),
            Err(OracleError::Index { .. })
        ));
        assert!(matches!(
            coefficient_oracle(1.0, 1.0, CoefficientTarget::L2, &[0, 4], &q),
            Err(OracleError::Index { .. })
        ));
    }

    #[test]
    fn chunking_is_deterministic() {
        let q = QuadratureOptions::monte_carlo(3 * CHUNK_SIZE + 17, 7);
        let a = pln_oracle(1.0, 1.0, 1.0, LogConvention::Standard, &q).unwrap();
        let b = pln_oracle(1.0, 1.0, 1.0, LogConvention::Standard, &q).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 3 * CHUNK_SIZE + 17);
    }
}
