//! Ensemble orchestration: single points, sweeps, scaling-law regressions,
//! and result persistence. This is what the CLI drives.

mod config;
mod output;

pub use config::{
    CohortThresholds, HistogramConfig, PointConfig, ReferenceConfig, SweepAxis, SweepConfig,
};
pub use output::{load_manifest, lsd_csv, results_csv, write_outputs, RunManifest};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::ensemble::{drive_frequency, sample_realization, ModelParams};
use crate::error::{Error, Result};
use crate::fitting::{self, ContourFit, ContourParams, PowerLaw};
use crate::floquet::{diagonalize, floquet_operator, FloquetSpectrum};
use crate::spectral::{
    field_free_reference, FieldFreeReference, LsdAccumulator, LsdSample, Probe,
};
use crate::tssil::{self, TssilParams};
use crate::Real;

/// Everything measured at one ensemble point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub params: ModelParams,
    /// Field-free reference width (see [`FieldFreeReference`]).
    pub gamma0: Real,
    pub xi0: Real,
    pub delta_omega: Real,
    pub reference_resolved: bool,
    pub reference_residual: Real,
    /// Width of the driven LSD from the fitted contour; 0 for a delta-like
    /// spectrum (Omega = 0 or no usable fit).
    pub gamma: Real,
    /// IPR of the driven LSD.
    pub xi: Real,
    /// Localization length L = gamma / delta_omega.
    pub loc_length: Real,
    pub fit: Option<ContourFit<Real>>,
    pub overflow_fraction: Real,
    pub span: Real,
    pub bins: usize,
    /// False when gamma exceeds N * delta_omega / 10, outside the
    /// moderate-width regime the LSD estimator assumes.
    pub moderate_width: bool,
    pub wall_seconds: Real,
    /// Finalized LSD samples for plotting and persistence.
    pub samples: Vec<LsdSample>,
}

impl PointResult {
    /// 2 Omega / Gamma_0 with the measured reference width.
    pub fn field_ratio(&self) -> Real {
        2.0 * self.params.rabi / self.gamma0
    }
}

/// Default histogram half-span: wide enough that the predicted contour
/// leaves at most ~0.2% of its mass outside, with a floor of 20 mean
/// spacings, capped inside the quasienergy Brillouin zone. At strong drive
/// the contour peaks sit near +/- Omega/2, which can exceed the unperturbed
/// band edge, so the cap follows the zone and not the band.
fn default_span(gamma0: Real, rabi: Real, delta_omega: Real, omega_f: Real) -> Real {
    let floor = 20.0 * delta_omega;
    let cap = 0.45 * omega_f;
    let predicted = if rabi > 0.0 {
        TssilParams::new(gamma0.max(1e-9 * delta_omega), rabi)
            .and_then(|p| tssil::span_for_tail(&p, 2e-3))
            .map(|s| 1.15 * s)
            .unwrap_or(0.0)
    } else {
        0.0
    };
    predicted.max(floor).min(cap)
}

/// Run one ensemble point: field-free reference, driven ensemble, LSD fit,
/// width and IPR extraction. Deterministic for a fixed seed.
pub fn run_point(cfg: &PointConfig) -> Result<PointResult> {
    cfg.validate()?;
    let start = Instant::now();
    let params = &cfg.params;
    let drive = drive_frequency(params)?;
    let delta_omega = params.delta_omega();

    let reference: FieldFreeReference =
        field_free_reference(params, cfg.reference.bins, cfg.reference.span)?;

    let span = cfg
        .histogram
        .span
        .unwrap_or_else(|| default_span(reference.gamma0, params.rabi, delta_omega, drive.omega_f));
    let bins = cfg.histogram.bins;
    let mut acc = LsdAccumulator::new(span, bins)?;

    let spectra: Vec<Result<FloquetSpectrum>> = (0..params.realizations)
        .into_par_iter()
        .map(|idx| {
            let realization = sample_realization(params, idx)?;
            let u = floquet_operator(&realization, params)?;
            diagonalize(&u, &realization, params)
        })
        .collect();
    for spectrum in spectra {
        acc.accumulate(&spectrum?, Probe::G);
    }

    let overflow = acc.overflow_fraction();
    if overflow > 0.01 {
        return Err(Error::SpanTooSmall {
            span,
            overflow_percent: overflow * 100.0,
            suggested: 2.0 * span,
        });
    }

    let xi = acc.ipr()?;
    let samples = acc.finalize_lsd(delta_omega)?;

    let mut fit = None;
    let mut gamma = 0.0;
    if params.rabi > 0.0 {
        let fit_samples = acc.fit_samples(delta_omega, cfg.uniform_weights)?;
        let initial = initial_guess(reference.gamma0, params.rabi, acc.bin_width());
        match fitting::fit_contour(&fit_samples, initial) {
            Ok(result) => {
                gamma = result.width;
                fit = Some(result);
            }
            Err(Error::InsufficientData(_)) => {}
            Err(other) => return Err(other),
        }
    }

    let loc_length = gamma / delta_omega;
    let moderate_width = gamma <= params.n_states as Real * delta_omega / 10.0;

    Ok(PointResult {
        params: params.clone(),
        gamma0: reference.gamma0,
        xi0: reference.xi0,
        delta_omega,
        reference_resolved: reference.resolved,
        reference_residual: reference.fit_residual,
        gamma,
        xi,
        loc_length,
        fit,
        overflow_fraction: overflow,
        span,
        bins,
        moderate_width,
        wall_seconds: start.elapsed().as_secs_f64(),
        samples,
    })
}

/// Regime-selected initial guess for the LSD fit, seeded from the analytic
/// contour at the measured reference width.
fn initial_guess(gamma0: Real, rabi: Real, bin_width: Real) -> ContourParams<Real> {
    let gamma0 = gamma0.max(bin_width * 0.5).max(1e-12);
    match TssilParams::new(gamma0, rabi) {
        Ok(p) if p.regime() == tssil::Regime::Weak => match tssil::weak_coefficients(&p) {
            Ok((a1, a2)) => ContourParams::WeakField {
                a1,
                a2: a2.max(1e-3 * a1),
            },
            Err(_) => ContourParams::Lorentzian { gamma0 },
        },
        Ok(p) => match tssil::strong_coefficients(&p) {
            Ok((d1, d2)) => ContourParams::StrongField {
                d1: d1.max(1e-3 * d2),
                d2,
            },
            Err(_) => ContourParams::Lorentzian { gamma0 },
        },
        Err(_) => ContourParams::Lorentzian {
            gamma0: gamma0.max(1e-12),
        },
    }
}

/// One row of the strong-field comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongFieldRow {
    /// 2 Omega / Gamma_0 (measured reference width).
    pub field_ratio: Real,
    /// Measured Gamma / Gamma_0.
    pub gamma_over_gamma0: Real,
    /// Analytic model width / Gamma_0 at the same parameters.
    pub model_over_gamma0: Real,
    /// Measured width / model width.
    pub factor: Real,
    /// True when the reference is perturbative (Gamma_0 < Delta_omega).
    pub perturbative: bool,
}

/// Per-point coefficient of the weak-field linear law A = Gamma / (Omega *
/// sqrt(Delta_omega / Gamma_0)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakFieldCoefficient {
    pub mean: Real,
    pub values: Vec<Real>,
}

/// Scaling-law regressions over one sweep, cohort-classified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SweepAnalysis {
    /// Gamma vs Omega power law in the perturbative cohort; slope ~1,
    /// coefficient ~2 reproduces the linear law.
    pub perturbative_linear: Option<PowerLaw<Real>>,
    /// Weak-field linear-law coefficient in the non-perturbative, L << 1
    /// cohort; ~0.7 reproduces the reported fit.
    pub weak_field_coefficient: Option<WeakFieldCoefficient>,
    /// Gamma vs Omega log-log slope in the L >> 1 cohort; ~2 reproduces the
    /// quadratic trend.
    pub quadratic_slope: Option<PowerLaw<Real>>,
    /// xi/xi_0 vs Omega/Gamma_0 power law; coefficient ~1.54, exponent ~1.18
    /// reproduce the reported IPR law.
    pub ipr_law: Option<PowerLaw<Real>>,
    /// Strong-field width table against the analytic model curve.
    pub strong_field: Vec<StrongFieldRow>,
}

/// Points in the perturbative cohort (Gamma_0 < Delta_omega) with a usable
/// width: regression of Gamma against Omega.
pub fn regress_perturbative_linear(points: &[PointResult]) -> Option<PowerLaw<Real>> {
    let data: Vec<(Real, Real)> = points
        .iter()
        .filter(|p| p.gamma0 < p.delta_omega && p.params.rabi > 0.0 && p.gamma > 0.0)
        .map(|p| (p.params.rabi, p.gamma))
        .collect();
    fitting::fit_power_law(&data).ok()
}

/// Weak-field coefficient over the non-perturbative, weak-field, L << L_small
/// cohort.
pub fn weak_field_coefficient(
    points: &[PointResult],
    thresholds: &CohortThresholds,
) -> Option<WeakFieldCoefficient> {
    let values: Vec<Real> = points
        .iter()
        .filter(|p| {
            p.gamma0 > p.delta_omega
                && p.field_ratio() < 1.0
                && p.loc_length > 0.0
                && p.loc_length < thresholds.l_small
        })
        .map(|p| p.gamma / (p.params.rabi * (p.delta_omega / p.gamma0).sqrt()))
        .collect();
    if values.is_empty() {
        return None;
    }
    let mean = values.iter().sum::<Real>() / values.len() as Real;
    Some(WeakFieldCoefficient { mean, values })
}

/// Log-log slope of Gamma vs Omega over the weak-field, L >> L_large cohort.
pub fn regress_quadratic_cohort(
    points: &[PointResult],
    thresholds: &CohortThresholds,
) -> Option<PowerLaw<Real>> {
    let data: Vec<(Real, Real)> = points
        .iter()
        .filter(|p| {
            p.gamma0 > p.delta_omega
                && p.field_ratio() < 1.0
                && p.loc_length > thresholds.l_large
        })
        .map(|p| (p.params.rabi, p.gamma))
        .collect();
    fitting::fit_power_law(&data).ok()
}

/// Power law of xi/xi_0 against Omega/Gamma_0 over resolved points.
pub fn regress_ipr_law(points: &[PointResult]) -> Option<PowerLaw<Real>> {
    let data: Vec<(Real, Real)> = points
        .iter()
        .filter(|p| p.reference_resolved && p.params.rabi > 0.0 && p.xi > 0.0 && p.xi0 > 0.0)
        .map(|p| (p.params.rabi / p.gamma0, p.xi / p.xi0))
        .collect();
    fitting::fit_power_law(&data).ok()
}

/// Strong-field comparison rows (2 Omega / Gamma_0 >= 1) against the
/// analytic width curve at the measured reference width.
pub fn strong_field_table(points: &[PointResult]) -> Vec<StrongFieldRow> {
    points
        .iter()
        .filter(|p| p.params.rabi > 0.0 && p.gamma > 0.0 && p.field_ratio() >= 1.0)
        .filter_map(|p| {
            let model = TssilParams::new(p.gamma0, p.params.rabi)
                .and_then(|tp| tssil::predicted_width(&tp))
                .ok()?;
            if !(model > 0.0) {
                return None;
            }
            Some(StrongFieldRow {
                field_ratio: p.field_ratio(),
                gamma_over_gamma0: p.gamma / p.gamma0,
                model_over_gamma0: model / p.gamma0,
                factor: p.gamma / model,
                perturbative: p.gamma0 < p.delta_omega,
            })
        })
        .collect()
}

/// All regressions over a set of finished points.
pub fn analyze(points: &[PointResult], thresholds: &CohortThresholds) -> SweepAnalysis {
    SweepAnalysis {
        perturbative_linear: regress_perturbative_linear(points),
        weak_field_coefficient: weak_field_coefficient(points, thresholds),
        quadratic_slope: regress_quadratic_cohort(points, thresholds),
        ipr_law: regress_ipr_law(points),
        strong_field: strong_field_table(points),
    }
}

/// A finished sweep: configuration echo, per-point results, regressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<PointResult>,
    pub analysis: SweepAnalysis,
}

/// Run every point of a sweep and the cohort regressions. Per-point failures
/// caused by undersized spans or degenerate fits abort only that point's
/// entry; hard errors (invalid parameters, I/O) abort the sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let outcomes: Vec<Result<PointResult>> = (0..cfg.len())
        .into_par_iter()
        .map(|i| run_point(&cfg.point(i)?))
        .collect();
    let mut points = Vec::with_capacity(cfg.len());
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(result) => points.push(result),
            Err(err @ (Error::SpanTooSmall { .. } | Error::EmptyAccumulator)) => {
                failures.push((i, err.to_string()));
            }
            Err(other) => return Err(other),
        }
    }
    if points.is_empty() {
        let detail = failures
            .iter()
            .map(|(i, e)| format!("point {i}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::Numeric(format!("every sweep point failed: {detail}")));
    }
    for (i, err) in &failures {
        eprintln!("warning: sweep point {i} skipped: {err}");
    }
    let analysis = analyze(&points, &cfg.thresholds);
    Ok(SweepResult {
        config: cfg.clone(),
        points,
        analysis,
    })
}

/// Search the coupling strength that makes the measured field-free width hit
/// `target_gamma0`, starting from the golden-rule inversion and iterating on
/// the measured width.
pub fn find_v_for_gamma0(
    base: &ModelParams,
    target_gamma0: Real,
    max_iterations: usize,
) -> Result<(Real, FieldFreeReference)> {
    if !(target_gamma0 > 0.0) {
        return Err(Error::InvalidParameter(
            "target gamma0 must be positive".into(),
        ));
    }
    let mut params = base.clone();
    let coupled = params.band.saturating_sub(1).min(params.half_size());
    if coupled == 0 {
        return Err(Error::InvalidParameter(
            "band must be >= 2 so |0> couples to something".into(),
        ));
    }
    let mut v = (target_gamma0 * params.half_size() as Real * params.delta
        / (std::f64::consts::TAU * coupled as Real))
        .sqrt();
    let mut best = None;
    for _ in 0..max_iterations.max(1) {
        params.v_rms = v;
        let reference = field_free_reference(&params, None, None)?;
        if !reference.resolved {
            v *= 2.0;
            continue;
        }
        let ratio = target_gamma0 / reference.gamma0;
        best = Some((v, reference));
        if (ratio - 1.0).abs() < 0.03 {
            break;
        }
        v *= ratio.sqrt();
    }
    best.ok_or_else(|| {
        Error::Numeric("field-free width never resolved during the search".into())
    })
}
