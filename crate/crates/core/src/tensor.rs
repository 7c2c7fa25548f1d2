//! Point curvature data in an orthonormal frame.
//!
//! Conventions, fixed for the whole crate:
//!
//! * signature (−,+,+,+), `η = diag(−1, 1, 1, 1)`;
//! * `R^a_{bcd} = ∂_c Γ^a_{bd} − ∂_d Γ^a_{bc} + Γ^a_{ce} Γ^e_{bd} − Γ^a_{de} Γ^e_{bc}`;
//! * `R_{ab} = η^{cd} R_{cadb}`, `R = η^{ab} R_{ab}`.
//!
//! With these choices a sphere-like (de Sitter) geometry has `R > 0` and
//! `Σ_i R_{0i0i} = R_{00}`.

use serde::Serialize;
use thiserror::Error;

/// Dense rank-4 array indexed `[a][b][c][d]`.
pub type Rank4 = [[[[f64; 4]; 4]; 4]; 4];
/// Dense rank-2 array indexed `[a][b]`.
pub type Rank2 = [[f64; 4]; 4];

pub const ZERO_RANK4: Rank4 = [[[[0.0; 4]; 4]; 4]; 4];
pub const ZERO_RANK2: Rank2 = [[0.0; 4]; 4];

/// Relative tolerance for contradictory symmetry-related inputs.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for the first Bianchi identity.
pub const BIANCHI_TOLERANCE: f64 = 1e-10;

/// The flat metric `η = diag(−1, 1, 1, 1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinkowskiMetric;

impl MinkowskiMetric {
    pub const DIAGONAL: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

    #[inline]
    pub fn component(a: usize, b: usize) -> f64 {
        if a == b {
            Self::DIAGONAL[a]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn lower(v: &[f64; 4]) -> [f64; 4] {
        [-v[0], v[1], v[2], v[3]]
    }

    /// `η` is its own inverse, so raising and lowering coincide.
    #[inline]
    pub fn raise(v: &[f64; 4]) -> [f64; 4] {
        Self::lower(v)
    }

    #[inline]
    pub fn dot(u: &[f64; 4], v: &[f64; 4]) -> f64 {
        -u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3]
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("index {index:?} out of range (expected 0..=3)")]
    IndexOutOfRange { index: [usize; 4] },
    #[error("component R_{index:?} is not finite")]
    NonFinite { index: [usize; 4] },
    #[error(
        "component R_{index:?} = {given} contradicts the value {implied} implied by Riemann symmetries"
    )]
    SymmetryViolation {
        index: [usize; 4],
        given: f64,
        implied: f64,
    },
    #[error("first Bianchi identity violated: relative residual {residual:e}")]
    BianchiViolation { residual: f64 },
}

/// The four curvature traces used by the Gaussian coefficient formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSums {
    /// `Σ_i R_{0i0i}`
    pub sum_0i0i: f64,
    /// `Σ_{i,j} R_{ijij}`
    pub sum_ijij: f64,
    /// `R_{00}`
    pub r00: f64,
    /// `Σ_i R_{ii}`
    pub r_spatial_trace: f64,
}

/// Riemann tensor at a single event, with its Ricci contractions.
///
/// Immutable once built; every constructor checks the algebraic symmetries.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    riemann: Rank4,
    ricci: Rank2,
    scalar: f64,
}

/// The six bivector index pairs `(a, b)` with `a < b`.
pub const BIVECTORS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl CurvatureData {
    pub fn zero() -> Self {
        Self {
            riemann: ZERO_RANK4,
            ricci: ZERO_RANK2,
            scalar: 0.0,
        }
    }

    /// Maximally symmetric curvature `R_{abcd} = K (η_{ac} η_{bd} − η_{ad} η_{bc})`.
    pub fn constant_curvature(k: f64) -> Self {
        let mut r = ZERO_RANK4;
        for (a, ra) in r.iter_mut().enumerate() {
            for (b, rb) in ra.iter_mut().enumerate() {
                for (c, rc) in rb.iter_mut().enumerate() {
                    for (d, v) in rc.iter_mut().enumerate() {
                        *v = k
                            * (MinkowskiMetric::component(a, c) * MinkowskiMetric::component(b, d)
                                - MinkowskiMetric::component(a, d)
                                    * MinkowskiMetric::component(b, c));
                    }
                }
            }
        }
        Self::with_derived(r)
    }

    /// Builds the full tensor from a list of components.
    ///
    /// Each entry fills its whole symmetry orbit (antisymmetry in each pair
    /// and pair exchange). Entries that disagree with a value already implied
    /// by an earlier entry are rejected, as is a result that fails the first
    /// Bianchi identity.
    pub fn from_components(components: &[([usize; 4], f64)]) -> Result<Self, TensorError> {
        let mut r = ZERO_RANK4;
        let mut set = [[[[false; 4]; 4]; 4]; 4];
        let scale = components
            .iter()
            .map(|(_, v)| v.abs())
            .fold(0.0_f64, f64::max);

        for &(idx, value) in components {
            if idx.iter().any(|&i| i > 3) {
                return Err(TensorError::IndexOutOfRange { index: idx });
            }
            if !value.is_finite() {
                return Err(TensorError::NonFinite { index: idx });
            }
            let [a, b, c, d] = idx;
            if (a == b || c == d) && value != 0.0 {
                return Err(TensorError::SymmetryViolation {
                    index: idx,
                    given: value,
                    implied: 0.0,
                });
            }
            for (slot, sign) in orbit(idx) {
                let target = sign * value;
                let [p, q, s, t] = slot;
                if set[p][q][s][t] {
                    let existing = r[p][q][s][t];
                    if (existing - target).abs() > SYMMETRY_TOLERANCE * scale.max(f64::MIN_POSITIVE)
                    {
                        return Err(TensorError::SymmetryViolation {
                            index: idx,
                            given: value,
                            implied: sign * existing,
                        });
                    }
                } else {
                    r[p][q][s][t] = target;
                    set[p][q][s][t] = true;
                }
            }
        }
        Self::from_dense(r)
    }

    /// Validates a dense array and derives Ricci and scalar curvature.
    pub fn from_dense(riemann: Rank4) -> Result<Self, TensorError> {
        let scale = max_abs(&riemann);
        let tol = SYMMETRY_TOLERANCE * scale;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let v = riemann[a][b][c][d];
                        if !v.is_finite() {
                            return Err(TensorError::NonFinite {
                                index: [a, b, c, d],
                            });
                        }
                        for implied in [
                            -riemann[b][a][c][d],
                            -riemann[a][b][d][c],
                            riemann[c][d][a][b],
                        ] {
                            if (v - implied).abs() > tol {
                                return Err(TensorError::SymmetryViolation {
                                    index: [a, b, c, d],
                                    given: v,
                                    implied,
                                });
                            }
                        }
                    }
                }
            }
        }
        let residual = bianchi_residual(&riemann);
        if scale > 0.0 && residual / scale > BIANCHI_TOLERANCE {
            return Err(TensorError::BianchiViolation {
                residual: residual / scale,
            });
        }
        Ok(Self::with_derived(riemann))
    }

    /// Builds a valid tensor from an arbitrary 6×6 matrix over the bivector
    /// basis [`BIVECTORS`]: the matrix is symmetrized and the totally
    /// antisymmetric part (the only Bianchi obstruction in four dimensions)
    /// is projected out.
    pub fn from_bivector_matrix(m: &[[f64; 6]; 6]) -> Self {
        let mut r = ZERO_RANK4;
        for (i, &(a, b)) in BIVECTORS.iter().enumerate() {
            for (j, &(c, d)) in BIVECTORS.iter().enumerate() {
                let v = 0.5 * (m[i][j] + m[j][i]);
                for (slot, sign) in orbit([a, b, c, d]) {
                    let [p, q, s, t] = slot;
                    r[p][q][s][t] = sign * v;
                }
            }
        }
        // R_{0123} + R_{0231} + R_{0312} is the only independent cyclic sum.
        let cyclic = (r[0][1][2][3] + r[0][2][3][1] + r[0][3][1][2]) / 3.0;
        for idx in [[0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]] {
            let v = r[idx[0]][idx[1]][idx[2]][idx[3]] - cyclic;
            for (slot, sign) in orbit(idx) {
                let [p, q, s, t] = slot;
                r[p][q][s][t] = sign * v;
            }
        }
        Self::with_derived(r)
    }

    fn with_derived(riemann: Rank4) -> Self {
        let (ricci, scalar) = contract(&riemann);
        Self {
            riemann,
            ricci,
            scalar,
        }
    }

    #[inline]
    pub fn riemann(&self) -> &Rank4 {
        &self.riemann
    }

    #[inline]
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.riemann[a][b][c][d]
    }

    #[inline]
    pub fn ricci(&self) -> &Rank2 {
        &self.ricci
    }

    #[inline]
    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    /// `R_{ab} = η^{cd} R_{cadb}` and `R = η^{ab} R_{ab}`, recomputed from the
    /// stored Riemann components.
    pub fn ricci_and_scalar(&self) -> (Rank2, f64) {
        contract(&self.riemann)
    }

    pub fn curvature_sums(&self) -> CurvatureSums {
        let r = &self.riemann;
        let sum_0i0i = (1..4).map(|i| r[0][i][0][i]).sum();
        let sum_ijij = (1..4)
            .flat_map(|i| (1..4).map(move |j| (i, j)))
            .map(|(i, j)| r[i][j][i][j])
            .sum();
        CurvatureSums {
            sum_0i0i,
            sum_ijij,
            r00: self.ricci[0][0],
            r_spatial_trace: (1..4).map(|i| self.ricci[i][i]).sum(),
        }
    }

    /// The 21 components `R_{abcd}` with `(a,b) ≤ (c,d)` in bivector order.
    /// Feeding them back through [`from_components`](Self::from_components)
    /// reproduces the tensor.
    pub fn independent_components(&self) -> Vec<([usize; 4], f64)> {
        let mut out = Vec::with_capacity(21);
        for (i, &(a, b)) in BIVECTORS.iter().enumerate() {
            for &(c, d) in &BIVECTORS[i..] {
                out.push(([a, b, c, d], self.riemann[a][b][c][d]));
            }
        }
        out
    }

    pub fn max_abs_component(&self) -> f64 {
        max_abs(&self.riemann)
    }

    /// Largest absolute value of `R_{abcd} + R_{acdb} + R_{adbc}`.
    pub fn bianchi_residual(&self) -> f64 {
        bianchi_residual(&self.riemann)
    }

    pub fn is_ricci_flat(&self, tol: f64) -> bool {
        let scale = self.max_abs_component().max(f64::MIN_POSITIVE);
        self.ricci.iter().flatten().all(|v| v.abs() <= tol * scale)
    }
}

/// Symmetry orbit of an index quadruple with the sign relating each slot to
/// the original component.
fn orbit(idx: [usize; 4]) -> [([usize; 4], f64); 8] {
    let [a, b, c, d] = idx;
    [
        ([a, b, c, d], 1.0),
        ([b, a, c, d], -1.0),
        ([a, b, d, c], -1.0),
        ([b, a, d, c], 1.0),
        ([c, d, a, b], 1.0),
        ([d, c, a, b], -1.0),
        ([c, d, b, a], -1.0),
        ([d, c, b, a], 1.0),
    ]
}

fn contract(r: &Rank4) -> (Rank2, f64) {
    let mut ricci = ZERO_RANK2;
    for (a, row) in ricci.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            *v = (0..4)
                .map(|c| MinkowskiMetric::DIAGONAL[c] * r[c][a][c][b])
                .sum();
        }
    }
    let scalar = (0..4)
        .map(|a| MinkowskiMetric::DIAGONAL[a] * ricci[a][a])
        .sum();
    (ricci, scalar)
}

fn max_abs(r: &Rank4) -> f64 {
    r.iter()
        .flatten()
        .flatten()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn bianchi_residual(r: &Rank4) -> f64 {
    let mut worst = 0.0_f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let s = r[a][b][c][d] + r[a][c][d][b] + r[a][d][b][c];
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn schwarzschild_components(m: f64, r: f64) -> Vec<([usize; 4], f64)> {
        let u = m / r.powi(3);
        vec![
            ([0, 1, 0, 1], -2.0 * u),
            ([0, 2, 0, 2], u),
            ([0, 3, 0, 3], u),
            ([1, 2, 1, 2], -u),
            ([1, 3, 1, 3], -u),
            ([2, 3, 2, 3], 2.0 * u),
        ]
    }

    #[test]
    fn eta_is_an_involution() {
        let v = [1.5, -2.0, 0.25, 7.0];
        assert_eq!(MinkowskiMetric::raise(&MinkowskiMetric::lower(&v)), v);
    }

    #[test]
    fn constant_curvature_unit() {
        let c = CurvatureData::constant_curvature(1.0);
        assert_eq!(c.component(0, 1, 0, 1), -1.0);
        assert_eq!(c.component(1, 2, 1, 2), 1.0);
        let rebuilt = CurvatureData::from_components(&c.independent_components()).unwrap();
        assert_eq!(rebuilt, c);
    }

    #[test]
    fn contradictory_antisymmetric_pair_rejected() {
        let err =
            CurvatureData::from_components(&[([0, 1, 0, 1], 1.0), ([1, 0, 0, 1], 1.0)]).unwrap_err();
        assert!(matches!(err, TensorError::SymmetryViolation { .. }));
    }

    #[test]
    fn diagonal_pair_must_vanish() {
        let err = CurvatureData::from_components(&[([0, 0, 1, 2], 0.5)]).unwrap_err();
        assert!(matches!(err, TensorError::SymmetryViolation { .. }));
    }

    #[test]
    fn bad_index_and_nan() {
        assert!(matches!(
            CurvatureData::from_components(&[([0, 4, 0, 1], 1.0)]),
            Err(TensorError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            CurvatureData::from_components(&[([0, 1, 0, 1], f64::NAN)]),
            Err(TensorError::NonFinite { .. })
        ));
    }

    #[test]
    fn cyclic_component_violates_bianchi() {
        let err = CurvatureData::from_components(&[([0, 1, 2, 3], 1.0)]).unwrap_err();
        assert!(matches!(err, TensorError::BianchiViolation { .. }));
    }

    #[test]
    fn schwarzschild_components_are_consistent() {
        let c = CurvatureData::from_components(&schwarzschild_components(1.0, 10.0)).unwrap();
        assert!(c.bianchi_residual() < 1e-12 * c.max_abs_component());
        assert!(c.is_ricci_flat(1e-12));
        assert!(c.scalar().abs() < 1e-15);
        let s = c.curvature_sums();
        for v in [s.sum_0i0i, s.sum_ijij, s.r00, s.r_spatial_trace] {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn de_sitter_contractions_by_brute_force() {
        let h: f64 = 0.7;
        let c = CurvatureData::constant_curvature(h * h);
        // brute-force contraction written out independently of `contract`
        for a in 0..4 {
            for b in 0..4 {
                let mut v = 0.0;
                for cc in 0..4 {
                    for dd in 0..4 {
                        v += MinkowskiMetric::component(cc, dd) * c.component(cc, a, dd, b);
                    }
                }
                let expected = 3.0 * h * h * MinkowskiMetric::component(a, b);
                assert!((v - expected).abs() < 1e-14);
                assert!((c.ricci()[a][b] - expected).abs() < 1e-14);
            }
        }
        assert!((c.scalar() - 12.0 * h * h).abs() < 1e-13);
    }

    #[test]
    fn de_sitter_sums() {
        let s = CurvatureData::constant_curvature(1.0).curvature_sums();
        assert_eq!(
            (s.sum_0i0i, s.sum_ijij, s.r00, s.r_spatial_trace),
            (-3.0, 6.0, -3.0, 9.0)
        );
    }

    #[test]
    fn minkowski_is_all_zero() {
        let c = CurvatureData::zero();
        assert_eq!(c.scalar(), 0.0);
        assert_eq!(c.ricci_and_scalar(), (ZERO_RANK2, 0.0));
    }

    fn bivector_matrix() -> impl Strategy<Value = [[f64; 6]; 6]> {
        proptest::array::uniform6(proptest::array::uniform6(-5.0..5.0f64))
    }

    proptest! {
        #[test]
        fn random_tensors_satisfy_trace_identities(m in bivector_matrix()) {
            let c = CurvatureData::from_bivector_matrix(&m);
            let scale = c.max_abs_component().max(1.0);
            prop_assert!(c.bianchi_residual() <= 1e-12 * scale);
            let s = c.curvature_sums();
            prop_assert!((s.sum_0i0i - s.r00).abs() <= 1e-12 * scale);
            prop_assert!((s.sum_ijij - s.r_spatial_trace - s.r00).abs() <= 1e-12 * scale);
        }

        #[test]
        fn rebuilding_from_independent_components_is_idempotent(m in bivector_matrix()) {
            let c = CurvatureData::from_bivector_matrix(&m);
            let once = CurvatureData::from_components(&c.independent_components()).unwrap();
            let twice = CurvatureData::from_components(&once.independent_components()).unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert_eq!(once.riemann(), c.riemann());
        }
    }
}
