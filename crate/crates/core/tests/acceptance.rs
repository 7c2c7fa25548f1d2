//! Acceptance checks, one test per criterion. Each prints a single
//! `criterion N: PASS|FAIL` line with the measured figures.

use std::f64::consts::{LN_2, PI};
use std::time::{Duration, Instant};

use curvprobe::detector::{channel_weights, gapless_channel, gapped_probability_minkowski, QubitState};
use curvprobe::oracle::{pln_oracle, variance_momentum_quadrature, QuadratureOptions};
use curvprobe::presets::{preset_chart, preset_curvature, AnalyticChart, PresetSpec};
use curvprobe::synge::{
    determinant_scaling, rnc_chart, scaling_test, world_function_numeric, GeodesicOptions,
};
use curvprobe::tensor::{CurvatureData, MinkowskiMetric};
use curvprobe::validation::{coefficient_rows, RowKind, Status, REFERENCE_P_LN, REFERENCE_P_LN_TOLERANCE};
use curvprobe::variance::{
    curvature_corrections, minkowski_variance, p_ln, variance_breakdown, LogConvention,
    VarianceOptions,
};
use curvprobe::GaussianSmearing;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const GRID: [f64; 3] = [0.5, 1.0, 2.0];
const SCALES: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

fn report(n: u32, title: &str, pass: bool, detail: String, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict} [{title}] {detail} ({:.2?})", elapsed);
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
}

#[test]
fn criterion_1_minkowski_variance() {
    let start = Instant::now();
    let q = QuadratureOptions::default();
    let mut worst: f64 = 0.0;
    for t in GRID {
        for s in GRID {
            let smear = GaussianSmearing::new(t, s, 1.0).unwrap();
            let oracle = variance_momentum_quadrature(&smear, &q).unwrap().value;
            let exact = minkowski_variance(t, s).unwrap();
            worst = worst.max((oracle - exact).abs() / exact);
        }
    }
    let elapsed = start.elapsed();
    report(
        1,
        "Minkowski variance",
        worst < 1e-8 && elapsed < Duration::from_secs(1),
        format!("max rel err {worst:.2e} over 3x3 grid"),
        elapsed,
    );
}

#[test]
fn criterion_2_coefficient_oracles() {
    let start = Instant::now();
    let q = QuadratureOptions::default();
    let (mut listed, mut zeros, mut ltilde, mut failed) = (0, 0, 0, Vec::new());
    let (mut worst_rel, mut worst_zero): (f64, f64) = (0.0, 0.0);
    for t in GRID {
        for s in GRID {
            for row in coefficient_rows(t, s, &q).unwrap() {
                match row.kind {
                    RowKind::Listed => {
                        listed += 1;
                        worst_rel = worst_rel.max(row.rel_diff);
                    }
                    RowKind::Ltilde => {
                        ltilde += 1;
                        worst_rel = worst_rel.max(row.rel_diff);
                    }
                    RowKind::Zero => {
                        zeros += 1;
                        worst_zero = worst_zero.max(row.oracle.abs());
                    }
                    _ => {}
                }
                if row.status == Status::Fail {
                    failed.push(format!("{} at T={t}, sigma={s}", row.coefficient));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        2,
        "closed-form coefficients vs oracle",
        failed.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{listed} listed + {ltilde} L-tilde rows max rel err {worst_rel:.2e}; {zeros} zero rows max |oracle| {worst_zero:.2e}; failures {failed:?}"
        ),
        elapsed,
    );
}

#[test]
fn criterion_3_p_ln() {
    let start = Instant::now();
    let limits = VarianceOptions::default().limits;
    let standard = p_ln(1.0, 1.0, 1.0, LogConvention::Standard, &limits).unwrap();
    let half = p_ln(1.0, 1.0, 1.0, LogConvention::HalfInterval, &limits).unwrap();
    let mc = pln_oracle(
        1.0,
        1.0,
        1.0,
        LogConvention::Standard,
        &QuadratureOptions::monte_carlo(10_000_000, 42),
    )
    .unwrap();
    let reproduces = |v: f64| (v - REFERENCE_P_LN).abs() <= REFERENCE_P_LN_TOLERANCE;
    let mc_agrees = (mc.mean - standard).abs() <= 3.0 * mc.std_error;
    let exact = 1.0 - EULER_GAMMA + LN_2;
    let elapsed = start.elapsed();
    report(
        3,
        "P_ln",
        (reproduces(standard) || reproduces(half)) && mc_agrees && elapsed < Duration::from_secs(60),
        format!(
            "deterministic {standard:.10} (analytic 1-gamma+ln2 = {exact:.10}), half-interval variant {half:.10}, reference {REFERENCE_P_LN} +/- {REFERENCE_P_LN_TOLERANCE}: reproduced = {}; Monte Carlo {:.6} +/- {:.1e} agrees within 3 s.e. = {mc_agrees}",
            reproduces(standard) || reproduces(half),
            mc.mean,
            mc.std_error
        ),
        elapsed,
    );
}

fn random_curvature(rng: &mut ChaCha8Rng) -> CurvatureData {
    let mut m = [[0.0; 6]; 6];
    let scale = 10f64.powf(rng.random_range(-4.0..1.0));
    for row in &mut m {
        for v in row.iter_mut() {
            *v = scale * rng.random_range(-1.0..1.0);
        }
    }
    CurvatureData::from_bivector_matrix(&m)
}

#[test]
fn criterion_4_equal_width_reduction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = random_curvature(&mut rng);
        let ell = rng.random_range(0.2..3.0);
        let corr = curvature_corrections(&c, ell, ell, 0.0).unwrap();
        let r00 = c.ricci()[0][0];
        let expected = -(5.0 * c.scalar() + 3.0 * r00) / (576.0 * PI * PI);
        let scale = (5.0 * c.scalar().abs() + 3.0 * r00.abs()) / (576.0 * PI * PI);
        let err = (corr.ricci_term + corr.riemann_term - expected).abs() / expected.abs().max(scale);
        worst = worst.max(err);
    }
    let elapsed = start.elapsed();
    report(
        4,
        "T = sigma reduction",
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("1000 random tensors, max rel err {worst:.2e}"),
        elapsed,
    );
}

#[test]
fn criterion_5_vacuum_nulling() {
    let start = Instant::now();
    let limits = VarianceOptions::default().limits;
    let mut worst: f64 = 0.0;
    for (mass, radius) in [(1.0, 10.0), (0.3, 0.7), (2.0, 4.5), (1e-3, 50.0)] {
        let c = preset_curvature(&PresetSpec::Schwarzschild { mass, radius }).unwrap();
        for (t, s) in [(0.5, 2.0), (1.0, 1.0), (3.0, 0.2)] {
            let pln = p_ln(t, s, 1.0, LogConvention::Standard, &limits).unwrap();
            let corr = curvature_corrections(&c, t, s, pln).unwrap();
            for v in [corr.ricci_term, corr.riemann_term, corr.riemann_term_contracted, corr.log_term] {
                worst = worst.max(v.abs());
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        5,
        "vacuum nulling",
        worst < 1e-12 && elapsed < Duration::from_secs(1),
        format!("Schwarzschild corrections max |term| {worst:.2e}"),
        elapsed,
    );
}

#[test]
fn criterion_6_de_sitter_end_to_end() {
    let start = Instant::now();
    // P_ln at T = σ = ℓ₀ in closed form
    let pln_exact = 1.0 - EULER_GAMMA + LN_2;
    let mut worst: f64 = 0.0;
    for h in [0.1, 0.05, 0.3] {
        for ell in [0.1, 1.0] {
            let c = preset_curvature(&PresetSpec::DeSitter { hubble: h }).unwrap();
            let s = GaussianSmearing::new(ell, ell, ell).unwrap();
            let b = variance_breakdown(&c, &s, 0.0, &VarianceOptions::default()).unwrap();
            let expected = -51.0 * h * h / (576.0 * PI * PI) + h * h * pln_exact;
            worst = worst.max((b.curvature_correction() - expected).abs() / expected.abs());
        }
    }
    let elapsed = start.elapsed();
    report(
        6,
        "de Sitter end to end",
        worst < 1e-9 && elapsed < Duration::from_secs(1),
        format!("max rel err vs -51H^2/(576 pi^2) + H^2 P_ln: {worst:.2e}"),
        elapsed,
    );
}

#[test]
fn criterion_7_synge_scaling() {
    let start = Instant::now();
    let opts = GeodesicOptions::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (spec, x, xp, bound) in [
        (
            PresetSpec::DeSitter { hubble: 0.3 },
            [0.3, 1.2, -0.4, 0.5],
            [-0.5, -0.6, 0.9, 0.7],
            5.5,
        ),
        (
            PresetSpec::Schwarzschild {
                mass: 1.0,
                radius: 10.0,
            },
            [0.6, 2.0, -0.9, 1.1],
            [-1.0, -1.3, 1.6, 1.2],
            4.5,
        ),
    ] {
        let c = preset_curvature(&spec).unwrap();
        let rnc = rnc_chart(preset_chart(&spec).unwrap(), spec.event(), opts).unwrap();
        let rep = scaling_test(&rnc, &c, (&x, &xp), &SCALES).unwrap();
        let exponent = rep.fitted_exponent.unwrap_or(f64::NAN);
        let smallest = rep.rows.last().unwrap().rel_err;
        pass &= exponent >= bound && smallest < 0.01;
        lines.push(format!(
            "{} exponent {exponent:.3} (>= {bound}), rel mismatch at s=1/16 {smallest:.1e}",
            spec.name()
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut flat_worst: f64 = 0.0;
    for _ in 0..100 {
        let x: [f64; 4] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let xp: [f64; 4] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let d: [f64; 4] = std::array::from_fn(|m| xp[m] - x[m]);
        let exact = 0.5 * MinkowskiMetric::dot(&d, &d);
        let numeric = world_function_numeric(&AnalyticChart::Minkowski, &x, &xp, &opts).unwrap();
        flat_worst = flat_worst.max((numeric - exact).abs() / exact.abs().max(1e-300));
    }
    pass &= flat_worst < 1e-9;
    lines.push(format!("flat max rel err {flat_worst:.1e}"));
    let elapsed = start.elapsed();
    report(
        7,
        "Synge scaling",
        pass && elapsed < Duration::from_secs(300),
        lines.join("; "),
        elapsed,
    );
}

#[test]
fn criterion_8_van_vleck_and_determinant() {
    let start = Instant::now();
    let opts = GeodesicOptions::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (spec, v) in [
        (PresetSpec::DeSitter { hubble: 0.3 }, [0.3, 1.2, -0.4, 0.5]),
        (PresetSpec::DeSitter { hubble: 0.5 }, [0.8, -0.2, 0.5, 0.3]),
        (
            PresetSpec::Schwarzschild {
                mass: 1.0,
                radius: 10.0,
            },
            [0.6, 2.0, -0.9, 1.1],
        ),
    ] {
        let c = preset_curvature(&spec).unwrap();
        let rnc = rnc_chart(preset_chart(&spec).unwrap(), spec.event(), opts).unwrap();
        let rep = determinant_scaling(&rnc, &c, &v, &SCALES, 0.05).unwrap();
        let detg = rep.sqrt_minus_g_exponent.unwrap_or(f64::NAN);
        pass &= detg >= 3.5;
        // Ricci-flat: both expansions are exactly 1 and the product has no error to fit
        let product = if c.is_ricci_flat(1e-15) {
            "product identically 1".to_string()
        } else {
            let p = rep.product_exponent.unwrap_or(f64::NAN);
            pass &= p >= 3.5;
            format!("product order {p:.3}")
        };
        lines.push(format!("{}: {product}, sqrt(-g) order {detg:.3}", spec.name()));
    }
    let elapsed = start.elapsed();
    report(
        8,
        "Van Vleck and metric determinant",
        pass && elapsed < Duration::from_secs(120),
        lines.join("; "),
        elapsed,
    );
}

#[test]
fn criterion_9_detector_channel() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut trace, mut herm, mut neg, mut comp): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..1000 {
        let r = loop {
            let r: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            if r.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                break r;
            }
        };
        let rho = QubitState::from_bloch(r).unwrap();
        let xi1 = rng.random_range(0.0..20.0);
        let xi2 = rng.random_range(0.0..20.0);
        let out = gapless_channel(xi1, &rho).unwrap();
        trace = trace.max((out.trace() - 1.0).norm());
        herm = herm.max(out.hermiticity_error());
        neg = neg.max(-out.min_eigenvalue());
        let twice = gapless_channel(xi2, &out).unwrap();
        let once = gapless_channel(xi1 + xi2, &rho).unwrap();
        comp = comp.max(twice.max_abs_difference(&once));
    }
    let q = QuadratureOptions::default();
    let mut gapped: f64 = 0.0;
    for t in GRID {
        for s in GRID {
            for lambda in [0.5, 1.0, 3.0] {
                let p = gapped_probability_minkowski(lambda, 0.0, t, s, &q).unwrap().value;
                let expected = lambda * lambda * minkowski_variance(t, s).unwrap();
                gapped = gapped.max((p - expected).abs() / expected);
            }
        }
    }
    let mut weights: f64 = 0.0;
    for i in 0..=2000 {
        let (k, f) = channel_weights(0.01 * i as f64);
        weights = weights.max((k + f - 1.0).abs());
    }
    let pass = trace <= 1e-12
        && herm <= 1e-12
        && neg <= 1e-12
        && comp <= 1e-12
        && gapped <= 1e-8
        && weights <= f64::EPSILON;
    let elapsed = start.elapsed();
    report(
        9,
        "detector channel",
        pass && elapsed < Duration::from_secs(10),
        format!(
            "trace {trace:.1e}, hermiticity {herm:.1e}, min eigenvalue deficit {neg:.1e}, composition {comp:.1e}, gapped(0) rel err {gapped:.1e}, weight sum err {weights:.1e}"
        ),
        elapsed,
    );
}
