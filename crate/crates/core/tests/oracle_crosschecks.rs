use std::f64::consts::PI;

use curvprobe::oracle::{
    coefficient_oracle, pln_oracle, position_space_mc, variance_momentum_quadrature,
    CoefficientTarget, OracleError, PositionKernel, QuadratureOptions,
};
use curvprobe::validation::{coefficient_rows, RowKind, Status};
use curvprobe::variance::{minkowski_variance, p_ln, LogConvention, VarianceOptions};
use curvprobe::GaussianSmearing;

fn unit() -> GaussianSmearing {
    GaussianSmearing::new(1.0, 1.0, 1.0).unwrap()
}

#[test]
fn momentum_quadrature_examples() {
    let q = QuadratureOptions::default();
    let v = variance_momentum_quadrature(&unit(), &q).unwrap().value;
    assert!((v - 1.0 / (16.0 * PI * PI)).abs() < 1e-8 * v);
    let s = GaussianSmearing::new(2.0, 1.0, 1.0).unwrap();
    let v = variance_momentum_quadrature(&s, &q).unwrap().value;
    assert!((v - 1.0 / (40.0 * PI * PI)).abs() < 1e-8 * v);

    let starved = QuadratureOptions {
        max_evaluations: 1,
        ..QuadratureOptions::default()
    };
    assert!(matches!(
        variance_momentum_quadrature(&unit(), &starved),
        Err(OracleError::Quadrature(_))
    ));
}

#[test]
fn coefficient_examples() {
    let q = QuadratureOptions::default();
    let l00 = coefficient_oracle(1.0, 1.0, CoefficientTarget::L2, &[0, 0], &q).unwrap().value;
    assert!((l00 - 1.0 / (8.0 * PI * PI)).abs() < 1e-6 * l00);
    let a11 = coefficient_oracle(1.0, 2.0, CoefficientTarget::A2, &[1, 1], &q).unwrap().value;
    assert!((a11 - 44.0 / (600.0 * PI * PI)).abs() < 1e-6 * a11);
    let b = coefficient_oracle(1.0, 1.0, CoefficientTarget::B4, &[0, 1, 1, 0], &q).unwrap().value;
    assert!((b - 1.0 / (32.0 * PI * PI)).abs() < 1e-6 * b);
}

#[test]
fn anisotropic_widths_pass_every_graded_row() {
    let q = QuadratureOptions::default();
    let rows = coefficient_rows(0.7, 1.6, &q).unwrap();
    let failures: Vec<_> = rows.iter().filter(|r| r.status == Status::Fail).collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(rows.iter().any(|r| r.kind == RowKind::Ltilde));
    assert!(rows.iter().filter(|r| r.kind == RowKind::Zero).all(|r| r.oracle.abs() < 1e-8));
}

#[test]
fn position_space_variance() {
    let q = QuadratureOptions::monte_carlo(4_000_000, 42);
    let est = position_space_mc(&unit(), PositionKernel::W0, &q).unwrap();
    let exact = minkowski_variance(1.0, 1.0).unwrap();
    let rel = (est.value.mean - exact).abs() / exact;
    assert!(rel < 0.01, "{} vs {exact} ({rel:.3e})", est.value.mean);
}

#[test]
fn position_space_l00() {
    let q = QuadratureOptions::monte_carlo(4_000_000, 43);
    let est = position_space_mc(&unit(), PositionKernel::W0Monomial { a: 0, b: 0 }, &q).unwrap();
    let exact = 1.0 / (8.0 * PI * PI);
    let rel = (est.value.mean - exact).abs() / exact;
    assert!(rel < 0.02, "{} vs {exact} ({rel:.3e})", est.value.mean);
}

#[test]
fn single_regulator_is_biased() {
    let exact = minkowski_variance(1.0, 1.0).unwrap();
    let mut q = QuadratureOptions::monte_carlo(2_000_000, 5);
    q.epsilon_sequence = vec![0.4];
    let single = position_space_mc(&unit(), PositionKernel::W0, &q).unwrap().value;
    q.epsilon_sequence = vec![0.4, 0.2, 0.1, 0.05];
    let extrapolated = position_space_mc(&unit(), PositionKernel::W0, &q).unwrap().value;
    let bias = (single.mean - exact).abs();
    assert!(bias > 5.0 * single.std_error, "bias {bias:e}, s.e. {:e}", single.std_error);
    assert!((extrapolated.mean - exact).abs() < bias);
}

#[test]
fn position_space_is_seed_deterministic() {
    let q = QuadratureOptions::monte_carlo(300_000, 9);
    let a = position_space_mc(&unit(), PositionKernel::W0, &q).unwrap();
    let b = position_space_mc(&unit(), PositionKernel::W0, &q).unwrap();
    assert_eq!(a, b);
}

#[test]
fn p_ln_scale_and_shift_laws() {
    let limits = VarianceOptions::default().limits;
    let base = p_ln(1.3, 0.6, 0.9, LogConvention::Standard, &limits).unwrap();
    let scaled = p_ln(2.6, 1.2, 1.8, LogConvention::Standard, &limits).unwrap();
    assert!((base - scaled).abs() < 1e-9);
    let shifted = p_ln(1.3, 0.6, 2.7, LogConvention::Standard, &limits).unwrap();
    assert!((shifted - (base - 2.0 * 3f64.ln())).abs() < 1e-9);
    let half = p_ln(1.3, 0.6, 0.9, LogConvention::HalfInterval, &limits).unwrap();
    assert!((base - half - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn p_ln_monte_carlo_agrees_off_diagonal() {
    let limits = VarianceOptions::default().limits;
    for (t, s, l0) in [(2.0, 1.0, 1.0), (0.5, 2.0, 1.0)] {
        let det = p_ln(t, s, l0, LogConvention::Standard, &limits).unwrap();
        let mc = pln_oracle(t, s, l0, LogConvention::Standard, &QuadratureOptions::monte_carlo(2_000_000, 3))
            .unwrap();
        assert!((det - mc.mean).abs() < 4.0 * mc.std_error, "{det} vs {mc:?}");
    }
}
