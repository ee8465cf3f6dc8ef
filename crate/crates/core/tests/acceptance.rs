//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantities. Desk scale is N = 201 (K = 100), b = 100,
//! M = 32, 256 realizations per point unless a criterion needs a larger
//! matrix to reach its regime.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the per-criterion lines.

mod common;

use brmdd::ensemble::{drive_frequency, sample_realization, ModelParams};
use brmdd::experiments::{
    self, weak_field_coefficient, CohortThresholds, HistogramConfig, PointConfig, PointResult,
    ReferenceConfig, SweepAxis, SweepConfig,
};
use brmdd::fitting::{self, ContourKind};
use brmdd::floquet::{
    diagonalize, drive_hamiltonian, floquet_operator, stroboscopic_correlation, unitarity_defect,
};
use brmdd::spectral::field_free_reference;
use brmdd::tssil::{self, TssilParams};
use brmdd::{Cplx, Real};
use common::*;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn point_config(
    params: ModelParams,
    bins: usize,
    span: Option<Real>,
) -> PointConfig {
    PointConfig {
        params,
        histogram: HistogramConfig { bins, span },
        reference: ReferenceConfig::default(),
        uniform_weights: false,
    }
}

/// Criterion 1: exactness suite. Unitarity below 1e-9, completeness of the
/// probe weights below 1e-10, spectral correlation equal to direct matrix
/// powers below 1e-10 for n <= 64, and the N = 3, M = 4 product equal to an
/// independent exponential oracle below 1e-8 elementwise.
#[test]
fn criterion_01_exactness() {
    // Small-instance oracle.
    let small = params(3, 0.9, 2, 1.7, 4, 101);
    let r = sample_realization(&small, 0).unwrap();
    let u = floquet_operator(&r, &small).unwrap();
    let drive = drive_frequency(&small).unwrap();
    let tau = drive.period / 4.0;
    let mut oracle = cmat_identity(4);
    for m in 1..=4 {
        let h = drive_hamiltonian(&r, &small, m).unwrap();
        let gen: Vec<Vec<Cplx>> = (0..4)
            .map(|i| (0..4).map(|j| Cplx::new(0.0, -h[(i, j)] * tau)).collect())
            .collect();
        oracle = cmat_mul(&cmat_expm(&gen), &oracle);
    }
    let oracle_diff = max_abs_diff(&u, &oracle);

    // Desk scale and the larger cross-check size.
    let mut worst_defect: Real = 0.0;
    let mut worst_completeness: Real = 0.0;
    let mut worst_correlation: Real = 0.0;
    for p in [
        params(201, 1.79, 100, 5.0, 32, 102),
        params(401, 2.0, 200, 3.0, 32, 103),
    ] {
        let r = sample_realization(&p, 0).unwrap();
        let u = floquet_operator(&r, &p).unwrap();
        worst_defect = worst_defect.max(unitarity_defect(&u));
        let spec = diagonalize(&u, &r, &p).unwrap();
        let total: Real = spec.weights_g.iter().sum();
        worst_completeness = worst_completeness.max((total - 1.0).abs());

        let dim = u.nrows();
        let mut state: Vec<Cplx> = (0..dim)
            .map(|i| {
                if i == r.g_index {
                    Cplx::new(1.0, 0.0)
                } else {
                    Cplx::new(0.0, 0.0)
                }
            })
            .collect();
        for n in 1..=64usize {
            let mut next = vec![Cplx::new(0.0, 0.0); dim];
            for i in 0..dim {
                let mut acc = Cplx::new(0.0, 0.0);
                for k in 0..dim {
                    acc += u[(i, k)] * state[k];
                }
                next[i] = acc;
            }
            state = next;
            let diff = (state[r.g_index] - stroboscopic_correlation(&spec, n)).norm();
            worst_correlation = worst_correlation.max(diff);
        }
    }

    let pass = oracle_diff < 1e-8
        && worst_defect < 1e-9
        && worst_completeness < 1e-10
        && worst_correlation < 1e-10;
    report(
        "1 exactness",
        pass,
        &format!(
            "oracle {oracle_diff:.2e}, unitarity {worst_defect:.2e}, \
             completeness {worst_completeness:.2e}, correlation {worst_correlation:.2e}"
        ),
    );
    assert!(oracle_diff < 1e-8, "small-instance oracle: {oracle_diff:.3e}");
    assert!(worst_defect < 1e-9, "unitarity defect: {worst_defect:.3e}");
    assert!(
        worst_completeness < 1e-10,
        "completeness: {worst_completeness:.3e}"
    );
    assert!(
        worst_correlation < 1e-10,
        "spectral vs direct correlation: {worst_correlation:.3e}"
    );
}

/// Criterion 2: contour algebra. Coefficient identities to 1e-12 relative
/// over 1e3 random pairs, quadrature of the weak contour to 1 and the strong
/// contour to 1/4 within 1e-6, and continuity across the regime boundary
/// within 1% after amplitude normalization.
#[test]
fn criterion_02_contour_algebra() {
    let mut state = 0x5eed_cafe_u64;
    let mut unit = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as Real / (1u64 << 53) as Real
    };
    let mut worst_sum: Real = 0.0;
    let mut worst_product: Real = 0.0;
    for _ in 0..1000 {
        let gamma0 = 10f64.powf(-2.0 + 4.0 * unit());
        let rabi = 0.4999 * gamma0 * unit();
        let p = TssilParams::new(gamma0, rabi).unwrap();
        let (a1, a2) = tssil::weak_coefficients(&p).unwrap();
        worst_sum = worst_sum.max(((a1 + a2) - gamma0).abs() / gamma0);
        if rabi > 0.0 {
            worst_product = worst_product.max((a1 * a2 - rabi * rabi).abs() / (rabi * rabi));
        }
    }

    let weak = TssilParams::new(2.0, 0.5).unwrap();
    let (a1, a2) = tssil::weak_coefficients(&weak).unwrap();
    let weak_mass = adaptive_simpson(&|w| tssil::weak_contour(w, a1, a2), -2000.0, 2000.0, 1e-9);
    let strong = TssilParams::new(2.0, 4.0).unwrap();
    let strong_mass = adaptive_simpson(
        &|w| tssil::strong_contour(w, &strong).unwrap(),
        -2000.0,
        2000.0,
        1e-9,
    );

    // Boundary continuity after unit normalization on a grid.
    let eps = 1e-3;
    let below = TssilParams::new(2.0, 1.0 - eps).unwrap();
    let (b1, b2) = tssil::weak_coefficients(&below).unwrap();
    let above = TssilParams::new(2.0, 1.0 + eps).unwrap();
    let mut worst_boundary: Real = 0.0;
    for i in 0..400 {
        let w = -6.0 + 12.0 * i as Real / 399.0;
        let lo = tssil::weak_contour(w, b1, b2);
        let hi = tssil::strong_contour_normalized(w, &above).unwrap();
        worst_boundary = worst_boundary.max((lo - hi).abs() / hi);
    }

    let pass = worst_sum < 1e-12
        && worst_product < 1e-12
        && (weak_mass - 1.0).abs() < 1e-6
        && (strong_mass - 0.25).abs() < 1e-6
        && worst_boundary < 0.01;
    report(
        "2 contour algebra",
        pass,
        &format!(
            "identities {worst_sum:.1e}/{worst_product:.1e}, masses {weak_mass:.8}/{strong_mass:.8}, \
             boundary {worst_boundary:.2e}"
        ),
    );
    assert!(worst_sum < 1e-12 && worst_product < 1e-12);
    assert!((weak_mass - 1.0).abs() < 1e-6, "weak mass {weak_mass}");
    assert!((strong_mass - 0.25).abs() < 1e-6, "strong mass {strong_mass}");
    assert!(worst_boundary < 0.01, "boundary mismatch {worst_boundary}");
}

/// Criterion 3: the field-off limit has unit IPR within 1e-6 and a
/// single-bin LSD.
#[test]
fn criterion_03_field_off_limit() {
    let mut p = params(201, 1.79, 100, 0.0, 32, 301);
    p.realizations = 32;
    let result = experiments::run_point(&point_config(p, 201, None)).unwrap();
    let xi_err = (result.xi - 1.0).abs();
    let occupied: Vec<&brmdd::spectral::LsdSample> = result
        .samples
        .iter()
        .filter(|s| s.rho * result.delta_omega > 1e-9)
        .collect();
    let single_bin = occupied.len() == 1 && occupied[0].omega.abs() < result.span / 201.0;
    let pass = xi_err < 1e-6 && single_bin && result.gamma == 0.0;
    report(
        "3 field-off limit",
        pass,
        &format!(
            "xi deviation {xi_err:.2e}, occupied bins {}, gamma {}",
            occupied.len(),
            result.gamma
        ),
    );
    assert!(xi_err < 1e-6, "xi = {}", result.xi);
    assert!(single_bin, "occupied bins: {}", occupied.len());
    assert_eq!(result.gamma, 0.0);
}

/// Criterion 4: lineshape fits at Gamma_0/Delta_omega ~ 20. The driven LSD
/// fits the weak-field contour at 2 Omega/Gamma_0 = 0.5 and the strong-field
/// contour at ratios 2 and 4, each with weighted RMS residual below 15% of
/// the peak height.
#[test]
fn criterion_04_lineshape_fits() {
    let mut base = params(201, 1.79, 100, 0.0, 32, 401);
    base.realizations = 256;
    let reference = field_free_reference(&base, None, None).unwrap();
    assert!(reference.resolved);
    let gamma0 = reference.gamma0;

    let mut pass = true;
    let mut details = format!("gamma0 {gamma0:.2}");
    for (ratio, expected_kind) in [
        (0.5, ContourKind::WeakField),
        (2.0, ContourKind::StrongField),
        (4.0, ContourKind::StrongField),
    ] {
        let mut p = base.clone();
        p.rabi = ratio * gamma0 / 2.0;
        p.realizations = 256;
        let result = experiments::run_point(&point_config(p, 801, None)).unwrap();
        let fit = result.fit.as_ref().expect("fit present");
        let ok =
            fit.params.kind() == expected_kind && fit.converged && fit.residual < 0.15;
        details.push_str(&format!(
            "; ratio {ratio}: {} residual {:.3}",
            fit.params.kind().label(),
            fit.residual
        ));
        pass &= ok;
        assert_eq!(fit.params.kind(), expected_kind, "ratio {ratio}");
        assert!(fit.converged, "ratio {ratio} did not converge");
        assert!(
            fit.residual < 0.15,
            "ratio {ratio}: residual {:.3} >= 0.15",
            fit.residual
        );
    }
    report("4 lineshape fits", pass, &details);
}

/// Criterion 5: the perturbative linear law. At Gamma_0/Delta_omega ~ 0.2
/// the width should follow Gamma = 2 Omega within 25% across a weak-field
/// sweep.
///
/// Known red: the measured widths follow Gamma = (1.0 +/- 0.1) * Omega. The
/// linearity is reproduced but the prefactor is half the asserted one; the
/// right-slope halfwidth rule applied to the measured ratio-estimator LSD
/// yields the dressed-weight profile whose full width at half maximum is
/// Omega, as the fitted strong-contour d1 values (equal to Omega) confirm.
#[test]
fn criterion_05_perturbative_linear_law() {
    let base = params(201, 0.108, 100, 0.0, 32, 501);
    let mut reference_params = base.clone();
    reference_params.realizations = 256;
    let reference = field_free_reference(&reference_params, None, None).unwrap();
    let gamma0 = reference.gamma0;
    assert!(
        gamma0 < 0.4 * reference.delta_omega,
        "perturbative regime: gamma0 = {gamma0}"
    );

    let mut ratios = Vec::new();
    let mut details = format!("gamma0 {gamma0:.3}");
    for field_ratio in [0.3, 0.5, 0.8] {
        let mut p = base.clone();
        p.rabi = field_ratio * gamma0 / 2.0;
        p.realizations = 256;
        let result =
            experiments::run_point(&point_config(p.clone(), 3501, Some(10.0))).unwrap();
        let ratio = result.gamma / (2.0 * p.rabi);
        details.push_str(&format!(
            "; 2R/G0 {field_ratio}: gamma/(2 rabi) = {ratio:.3}"
        ));
        ratios.push(ratio);
    }
    let pass = ratios.iter().all(|r| (r - 1.0).abs() <= 0.25);
    report("5 perturbative linear law", pass, &details);
    for (i, r) in ratios.iter().enumerate() {
        assert!(
            (r - 1.0).abs() <= 0.25,
            "sweep point {i}: gamma/(2 Omega) = {r:.3}, outside 1 +/- 0.25 \
             (measured prefactor is ~1.0 * Omega; see the project notes on the \
             weak-field prefactor)"
        );
    }
}

/// Criterion 6: the weak-field linear-law coefficient. For
/// Gamma_0/Delta_omega in {2.5, 20} and the L < 0.3 cohort, the recovered
/// A = Gamma / (Omega sqrt(Delta_omega/Gamma_0)) lies in [0.5, 0.9].
#[test]
fn criterion_06_weak_field_coefficient() {
    let mut points: Vec<PointResult> = Vec::new();
    for (v, rabis) in [(1.79, [0.9, 1.3]), (0.635, [0.3, 0.45])] {
        for rabi in rabis {
            let mut p = params(201, v, 100, rabi, 32, 601);
            p.realizations = 192;
            points.push(experiments::run_point(&point_config(p, 3001, None)).unwrap());
        }
    }
    let thresholds = CohortThresholds::default();
    let coefficient = weak_field_coefficient(&points, &thresholds).expect("cohort non-empty");
    assert_eq!(
        coefficient.values.len(),
        points.len(),
        "all points must fall in the non-perturbative weak-field L < 0.3 cohort"
    );
    let pass = coefficient.values.iter().all(|a| (0.5..=0.9).contains(a))
        && (0.5..=0.9).contains(&coefficient.mean);
    report(
        "6 weak-field coefficient",
        pass,
        &format!("A values {:?}, mean {:.3}", coefficient.values, coefficient.mean),
    );
    for a in &coefficient.values {
        assert!((0.5..=0.9).contains(a), "A = {a:.3} outside [0.5, 0.9]");
    }
    assert!(
        (0.5..=0.9).contains(&coefficient.mean),
        "mean A = {:.3}",
        coefficient.mean
    );
}

/// Criterion 7: the quadratic trend. For Gamma_0/Delta_omega around 200 and
/// the L > 3 cohort, the log-log slope of Gamma against Omega is 2.0 +/- 0.3.
#[test]
fn criterion_07_quadratic_trend() {
    let base = params(601, 5.65, 300, 0.0, 32, 701);
    let mut data = Vec::new();
    let mut gamma0 = 0.0;
    for rabi in [26.0, 33.0, 41.0, 50.0] {
        let mut p = base.clone();
        p.rabi = rabi;
        p.realizations = 40;
        let result = experiments::run_point(&point_config(p, 1001, None)).unwrap();
        gamma0 = result.gamma0;
        assert!(
            result.loc_length > 3.0,
            "rabi {rabi}: L = {:.2} not in the L > 3 cohort",
            result.loc_length
        );
        assert!(result.field_ratio() < 1.0, "rabi {rabi}: not weak field");
        data.push((rabi, result.gamma));
    }
    assert!(gamma0 > 150.0, "gamma0 = {gamma0:.1}, regime too shallow");
    let law = fitting::fit_power_law(&data).unwrap();
    let pass = (law.exponent - 2.0).abs() <= 0.3;
    report(
        "7 quadratic trend",
        pass,
        &format!(
            "gamma0 {gamma0:.1}, slope {:.3}, r2 {:.4}",
            law.exponent, law.r_squared
        ),
    );
    assert!(
        pass,
        "log-log slope {:.3} outside 2.0 +/- 0.3",
        law.exponent
    );
}

/// Criterion 8: the strong-field plateau. At Gamma_0 > Delta_omega and 2
/// Omega/Gamma_0 in [4, 20] the width satisfies Gamma/Gamma_0 = 0.5 +/- 0.1;
/// in the perturbative branch the measured width exceeds the model curve by
/// a factor 1.4 +/- 0.35.
#[test]
fn criterion_08_strong_field_plateau() {
    // Non-perturbative plateau.
    let mut base = params(201, 0.9, 100, 0.0, 32, 801);
    base.realizations = 128;
    let reference = field_free_reference(&base, None, None).unwrap();
    let gamma0 = reference.gamma0;
    assert!(gamma0 > base.delta);
    let mut details = format!("gamma0 {gamma0:.2}");
    let mut pass = true;
    for ratio in [4.0, 10.0, 20.0] {
        let mut p = base.clone();
        p.rabi = ratio * gamma0 / 2.0;
        p.realizations = 128;
        let result = experiments::run_point(&point_config(p, 1001, None)).unwrap();
        let plateau = result.gamma / result.gamma0;
        details.push_str(&format!("; ratio {ratio}: G/G0 {plateau:.3}"));
        pass &= (plateau - 0.5).abs() <= 0.1;
        assert!(
            (plateau - 0.5).abs() <= 0.1,
            "ratio {ratio}: Gamma/Gamma_0 = {plateau:.3} outside 0.5 +/- 0.1"
        );
    }

    // Perturbative branch against the analytic width.
    let base = params(201, 0.1794, 100, 0.0, 32, 802);
    let mut ref_params = base.clone();
    ref_params.realizations = 256;
    let reference = field_free_reference(&ref_params, None, None).unwrap();
    let gamma0 = reference.gamma0;
    assert!(gamma0 < base.delta, "perturbative branch needs gamma0 < delta");
    details.push_str(&format!(" | perturbative gamma0 {gamma0:.3}"));
    for ratio in [4.0, 10.0, 20.0] {
        let mut p = base.clone();
        p.rabi = ratio * gamma0 / 2.0;
        p.realizations = 128;
        let result = experiments::run_point(&point_config(p.clone(), 2001, None)).unwrap();
        let model = tssil::predicted_width(&TssilParams::new(gamma0, p.rabi).unwrap()).unwrap();
        let factor = result.gamma / model;
        details.push_str(&format!("; ratio {ratio}: factor {factor:.3}"));
        pass &= (factor - 1.4).abs() <= 0.35;
        assert!(
            (factor - 1.4).abs() <= 0.35,
            "ratio {ratio}: Gamma/Gamma_model = {factor:.3} outside 1.4 +/- 0.35"
        );
    }
    report("8 strong-field plateau", pass, &details);
}

type IprSweep = (Real, Real, Vec<PointResult>);

/// Sweeps A and B are used by both criterion-9 tests; compute them once.
fn shared_ipr_sweeps() -> &'static (IprSweep, IprSweep) {
    use std::sync::OnceLock;
    static SWEEPS: OnceLock<(IprSweep, IprSweep)> = OnceLock::new();
    SWEEPS.get_or_init(|| {
        let weak_ratios = [0.2, 0.4, 0.7, 1.0];
        let a = ipr_sweep(201, 2.4904, 100, 901, 128, &weak_ratios, 801);
        let b = ipr_sweep(401, 3.914, 200, 42, 48, &[0.4, 0.7], 801);
        (a, b)
    })
}

fn ipr_sweep(
    n: usize,
    v: Real,
    band: usize,
    seed: u64,
    realizations: usize,
    field_ratios: &[Real],
    bins: usize,
) -> (Real, Real, Vec<PointResult>) {
    let base = params(n, v, band, 0.0, 32, seed);
    let mut ref_params = base.clone();
    ref_params.realizations = realizations;
    let reference = field_free_reference(&ref_params, None, None).unwrap();
    let mut points = Vec::new();
    for &ratio in field_ratios {
        let mut p = base.clone();
        p.rabi = ratio * reference.gamma0 / 2.0;
        p.realizations = realizations;
        points.push(experiments::run_point(&point_config(p, bins, None)).unwrap());
    }
    (reference.gamma0, reference.xi0, points)
}

/// Criterion 9, scaling parts that hold: the IPR-law exponent, the
/// strong-field plateau of xi/xi_0, and the proportionality of xi to xi_0
/// across matched pairs.
#[test]
fn criterion_09_ipr_law_exponent_plateau_proportionality() {
    let ((g0_a, xi0_a, points_a), (g0_b, xi0_b, points_b)) = shared_ipr_sweeps().clone();
    let (g0_c, xi0_c, points_c) = ipr_sweep(401, 11.6, 24, 42, 48, &[0.4, 0.7], 801);

    for (label, xi0) in [("A", xi0_a), ("B", xi0_b), ("C", xi0_c)] {
        assert!(
            (30.0..=100.0).contains(&xi0),
            "sweep {label}: xi0 = {xi0:.1} outside the 30..100 window"
        );
    }
    assert!((g0_a - 40.0).abs() < 8.0, "sweep A gamma0 {g0_a:.1}");
    assert!((g0_b - 100.0).abs() < 15.0, "sweep B gamma0 {g0_b:.1}");
    assert!(
        (g0_c - g0_b).abs() / g0_b < 0.08,
        "pair widths must match: {g0_c:.1} vs {g0_b:.1}"
    );

    // Exponent over the pooled weak-field points.
    let pooled: Vec<PointResult> = points_a
        .iter()
        .chain(&points_b)
        .chain(&points_c)
        .cloned()
        .collect();
    let law = experiments::regress_ipr_law(&pooled).expect("ipr law fit");
    let exponent_ok = (0.9..=1.4).contains(&law.exponent);

    // Strong-field plateau at 2 Omega / Gamma_0 = 8.
    let (_, xi0_plateau, plateau_points) = ipr_sweep(201, 2.4904, 100, 901, 128, &[8.0], 801);
    let plateau = plateau_points[0].xi / xi0_plateau;
    let plateau_ok = (plateau - 1.0).abs() <= 0.25;

    // Proportionality across the matched B/C pairs.
    let xi0_ratio = xi0_b / xi0_c;
    let mut pair_checks = Vec::new();
    for (pb, pc) in points_b.iter().zip(&points_c) {
        let xi_ratio = pb.xi / pc.xi;
        pair_checks.push(xi_ratio / xi0_ratio);
    }
    let proportional_ok = pair_checks.iter().all(|r| (r - 1.0).abs() <= 0.2);

    let pass = exponent_ok && plateau_ok && proportional_ok;
    report(
        "9 ipr law (exponent, plateau, proportionality)",
        pass,
        &format!(
            "beta {:.3}, plateau {plateau:.3}, pair ratios {pair_checks:?} \
             (xi0: A {xi0_a:.1} B {xi0_b:.1} C {xi0_c:.1})",
            law.exponent
        ),
    );
    assert!(exponent_ok, "beta = {:.3} outside [0.9, 1.4]", law.exponent);
    assert!(plateau_ok, "xi/xi0 = {plateau:.3} outside 1 +/- 0.25");
    for r in &pair_checks {
        assert!(
            (r - 1.0).abs() <= 0.2,
            "proportionality ratio {r:.3} outside 1 +/- 0.2"
        );
    }
}

/// Criterion 9, coefficient part. The fitted coefficient of
/// xi/xi_0 = B (Omega/Gamma_0)^beta should lie in [1.0, 2.1].
///
/// Known red: the measured coefficient is ~0.6 with beta ~1.0 across both
/// width regimes. Restated in the drive-ratio variable 2 Omega/Gamma_0 the
/// same data give a coefficient of ~1.2-1.3, inside the asserted band, so
/// the discrepancy is a factor 2^beta in the definition of the abscissa;
/// see the project notes.
#[test]
fn criterion_09_ipr_law_coefficient() {
    let ((_, _, points_a), (_, _, points_b)) = shared_ipr_sweeps();
    let pooled: Vec<PointResult> = points_a.iter().chain(points_b).cloned().collect();
    let law = experiments::regress_ipr_law(&pooled).expect("ipr law fit");
    let pass = (1.0..=2.1).contains(&law.coefficient);
    report(
        "9 ipr law (coefficient)",
        pass,
        &format!("B {:.3}, beta {:.3}, r2 {:.4}", law.coefficient, law.exponent, law.r_squared),
    );
    assert!(
        pass,
        "B = {:.3} outside [1.0, 2.1] (the measured law is xi/xi0 ~ 0.6 (Omega/Gamma_0)^1.0, \
         equivalently ~1.2 (2 Omega/Gamma_0)^1.0; see the project notes)",
        law.coefficient
    );
}

/// Criterion 10: determinism. Replaying a sweep configuration, including one
/// loaded back from its manifest, reproduces byte-identical CSV outputs.
#[test]
fn criterion_10_determinism() {
    let mut base = params(21, 0.9, 10, 0.0, 8, 1001);
    base.realizations = 8;
    let sweep = SweepConfig {
        base: point_config(base, 101, None),
        axis: SweepAxis::Rabi,
        values: vec![0.5, 1.0],
        thresholds: CohortThresholds::default(),
        out_dir: None,
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let dir_c = tempfile::tempdir().unwrap();

    let first = experiments::run_sweep(&sweep).unwrap();
    let written_a = experiments::write_outputs(&first, dir_a.path()).unwrap();
    let second = experiments::run_sweep(&sweep).unwrap();
    experiments::write_outputs(&second, dir_b.path()).unwrap();

    // Replay from the manifest.
    let manifest = experiments::load_manifest(&dir_a.path().join("manifest.json")).unwrap();
    let replayed = experiments::run_sweep(&manifest.config).unwrap();
    experiments::write_outputs(&replayed, dir_c.path()).unwrap();

    let mut all_equal = true;
    for path in &written_a {
        let name = path.file_name().unwrap();
        if name == "manifest.json" {
            continue; // carries wall time, not part of the byte contract
        }
        let a = std::fs::read(path).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        let c = std::fs::read(dir_c.path().join(name)).unwrap();
        all_equal &= a == b && a == c;
        assert_eq!(a, b, "{name:?} differs between identical runs");
        assert_eq!(a, c, "{name:?} differs after manifest replay");
    }
    report(
        "10 determinism",
        all_equal,
        &format!("{} files byte-identical across rerun and replay", written_a.len() - 1),
    );
}
