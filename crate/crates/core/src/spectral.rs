//! Disorder-averaged LSD histograms, inverse participation ratios, and the
//! field-free reference quantities Gamma_0, xi_0, Delta_omega.
//!
//! The LSD estimator is the ratio of averaged histograms: the numerator
//! accumulates probe weight per quasienergy bin, the denominator the
//! quasienergy counts, and the density is their ratio divided by the mean
//! spacing. Weight landing outside the span goes to an overflow tally; the
//! participation sum is accumulated over all states regardless of span.

use faer::{Mat, Side};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_realization, ModelParams};
use crate::error::{Error, Result};
use crate::fitting::{self, ContourParams, FitSample};
use crate::floquet::{serial_linalg, FloquetSpectrum};
use crate::Real;

/// Which basis state's weights to accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Probe {
    /// The driven probe state `|g>`.
    G,
    /// The band midpoint state `|0>`.
    K0,
}

/// Binned numerator/denominator histograms plus IPR accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct LsdAccumulator {
    span: Real,
    bin_edges: Vec<Real>,
    numerator: Vec<Real>,
    denominator: Vec<Real>,
    ipr_sum: Real,
    count: u64,
    overflow_weight: Real,
}

/// One finalized LSD sample: bin center, density, and the quasienergy count
/// that entered the bin (used as fit weight).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsdSample {
    pub omega: Real,
    pub rho: Real,
    pub count: Real,
}

impl LsdAccumulator {
    /// Uniform bins spanning [-span, span].
    pub fn new(span: Real, bins: usize) -> Result<Self> {
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "histogram span must be positive, got {span}"
            )));
        }
        if bins < 1 {
            return Err(Error::InvalidParameter("bins must be >= 1".into()));
        }
        let width = 2.0 * span / bins as Real;
        let bin_edges = (0..=bins).map(|i| -span + i as Real * width).collect();
        Ok(Self {
            span,
            bin_edges,
            numerator: vec![0.0; bins],
            denominator: vec![0.0; bins],
            ipr_sum: 0.0,
            count: 0,
            overflow_weight: 0.0,
        })
    }

    pub fn bins(&self) -> usize {
        self.numerator.len()
    }

    pub fn span(&self) -> Real {
        self.span
    }

    pub fn bin_width(&self) -> Real {
        2.0 * self.span / self.bins() as Real
    }

    pub fn bin_edges(&self) -> &[Real] {
        &self.bin_edges
    }

    pub fn numerator(&self) -> &[Real] {
        &self.numerator
    }

    pub fn denominator(&self) -> &[Real] {
        &self.denominator
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn bin_of(&self, omega: Real) -> Option<usize> {
        if omega < -self.span || omega > self.span {
            return None;
        }
        let idx = ((omega + self.span) / self.bin_width()) as usize;
        Some(idx.min(self.bins() - 1))
    }

    /// Add one realization given parallel slices of quasienergies and weights.
    pub fn accumulate_samples(&mut self, omegas: &[Real], weights: &[Real]) {
        debug_assert_eq!(omegas.len(), weights.len());
        for (&omega, &w) in omegas.iter().zip(weights) {
            self.ipr_sum += w * w;
            match self.bin_of(omega) {
                Some(b) => {
                    self.numerator[b] += w;
                    self.denominator[b] += 1.0;
                }
                None => self.overflow_weight += w,
            }
        }
        self.count += 1;
    }

    /// Add one Floquet spectrum for the chosen probe state.
    pub fn accumulate(&mut self, spectrum: &FloquetSpectrum, probe: Probe) {
        let weights = match probe {
            Probe::G => &spectrum.weights_g,
            Probe::K0 => &spectrum.weights_k0,
        };
        self.accumulate_samples(&spectrum.quasienergies, weights);
    }

    /// Merge a partial accumulator; shapes must match. Merging in ascending
    /// realization order keeps floating-point sums reproducible.
    pub fn merge(&mut self, other: &LsdAccumulator) -> Result<()> {
        if self.bins() != other.bins() || self.span != other.span {
            return Err(Error::InvalidParameter(
                "cannot merge accumulators with different binning".into(),
            ));
        }
        for (a, b) in self.numerator.iter_mut().zip(&other.numerator) {
            *a += b;
        }
        for (a, b) in self.denominator.iter_mut().zip(&other.denominator) {
            *a += b;
        }
        self.ipr_sum += other.ipr_sum;
        self.count += other.count;
        self.overflow_weight += other.overflow_weight;
        Ok(())
    }

    /// Fraction of the total accumulated weight that fell outside the span.
    pub fn overflow_fraction(&self) -> Real {
        if self.count == 0 {
            0.0
        } else {
            self.overflow_weight / self.count as Real
        }
    }

    /// IPR xi = count / sum of participation sums: the disorder average of
    /// sum_j W^2 is formed first and then inverted.
    pub fn ipr(&self) -> Result<Real> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        if !(self.ipr_sum > 0.0) {
            return Err(Error::Numeric(
                "degenerate participation sum (zero weights)".into(),
            ));
        }
        Ok(self.count as Real / self.ipr_sum)
    }

    /// Density samples rho = numerator / denominator / delta_omega at bin
    /// centers; bins that collected no quasienergies are omitted.
    pub fn finalize_lsd(&self, delta_omega: Real) -> Result<Vec<LsdSample>> {
        if self.count == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let width = self.bin_width();
        Ok(self
            .numerator
            .iter()
            .zip(&self.denominator)
            .enumerate()
            .filter(|(_, (_, &d))| d > 0.0)
            .map(|(b, (&n, &d))| LsdSample {
                omega: -self.span + (b as Real + 0.5) * width,
                rho: n / d / delta_omega,
                count: d,
            })
            .collect())
    }

    /// Finalized samples converted to fit inputs, optionally with uniform
    /// weights instead of per-bin counts.
    pub fn fit_samples(&self, delta_omega: Real, uniform: bool) -> Result<Vec<FitSample<Real>>> {
        Ok(self
            .finalize_lsd(delta_omega)?
            .into_iter()
            .map(|s| FitSample {
                omega: s.omega,
                rho: s.rho,
                weight: if uniform { 1.0 } else { s.count },
            })
            .collect())
    }
}

/// Field-free reference quantities of the band block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldFreeReference {
    /// Width Gamma_0 of the Lorentzian fit to the LSD of `|0>`. When the
    /// distribution is narrower than one bin this is the bin width, an upper
    /// bound, and `resolved` is false.
    pub gamma0: Real,
    /// IPR of `|0>` over the eigenstates of the band block.
    pub xi0: Real,
    /// Mean quasienergy spacing Delta_omega = delta (hbar = 1).
    pub delta_omega: Real,
    /// Weighted RMS residual of the Lorentzian fit relative to its peak.
    pub fit_residual: Real,
    /// False when the perturbative fallback reported an upper bound.
    pub resolved: bool,
    pub overflow_fraction: Real,
    pub span: Real,
    pub bins: usize,
}

/// Golden-rule estimate of the field-free width: 2 pi v^2 times the density
/// of band states directly coupled to `|0>`.
pub fn golden_rule_gamma0(params: &ModelParams) -> Real {
    let half = params.half_size();
    let coupled = params.band.saturating_sub(1).min(half);
    if coupled == 0 || params.v_rms == 0.0 {
        return 0.0;
    }
    std::f64::consts::TAU * params.v_rms * params.v_rms * coupled as Real
        / (half as Real * params.delta)
}

/// Spectral extent of the band block: the diagonal range plus a margin for
/// the coupling-induced broadening of the edges.
fn band_extent(params: &ModelParams) -> Real {
    let k_delta = params.half_size() as Real * params.delta;
    let edge = 3.0 * params.v_rms * (2.0 * params.band as Real).sqrt();
    k_delta + edge + params.delta
}

fn reference_span(params: &ModelParams) -> Real {
    let estimate = golden_rule_gamma0(params);
    let wide = 64.0 * estimate + 4.0 * params.delta;
    wide.min(band_extent(params))
}

fn reference_bins(params: &ModelParams, span: Real) -> usize {
    let estimate = golden_rule_gamma0(params);
    let target = if estimate > 0.0 {
        (estimate / 8.0).min(params.delta / 2.0)
    } else {
        params.delta / 2.0
    };
    let bins = (2.0 * span / target).ceil() as usize;
    bins.clamp(201, 4001) | 1
}

/// Eigenenergies and `|0>` weights of the band block of one realization.
pub fn band_block_spectrum(params: &ModelParams, index: usize) -> Result<(Vec<Real>, Vec<Real>)> {
    serial_linalg();
    let r = sample_realization(params, index)?;
    let n = params.n_states;
    let block = Mat::from_fn(n, n, |i, j| r.h0[(1 + i, 1 + j)]);
    let evd = block
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("band-block eigensolver failed: {e:?}")))?;
    let v = evd.U();
    let lam = evd.S();
    let probe_row = r.k0_index - 1;
    let energies: Vec<Real> = (0..n).map(|j| lam[j]).collect();
    let weights: Vec<Real> = (0..n).map(|j| {
        let x = v[(probe_row, j)];
        x * x
    }).collect();
    Ok((energies, weights))
}

/// Compute the field-free reference by diagonalizing the band block of each
/// realization directly (equivalent to the Floquet route at Omega = 0 under
/// the resonance convention, and cheaper).
pub fn field_free_reference(
    params: &ModelParams,
    bins_override: Option<usize>,
    span_override: Option<Real>,
) -> Result<FieldFreeReference> {
    params.validate()?;
    let span = span_override.unwrap_or_else(|| reference_span(params));
    let bins = bins_override.unwrap_or_else(|| reference_bins(params, span));
    let mut acc = LsdAccumulator::new(span, bins)?;

    let spectra: Vec<Result<(Vec<Real>, Vec<Real>)>> = (0..params.realizations)
        .into_par_iter()
        .map(|idx| band_block_spectrum(params, idx))
        .collect();
    for spectrum in spectra {
        let (energies, weights) = spectrum?;
        acc.accumulate_samples(&energies, &weights);
    }

    let overflow = acc.overflow_fraction();
    if overflow > 0.01 {
        return Err(Error::SpanTooSmall {
            span,
            overflow_percent: overflow * 100.0,
            suggested: span * 2.0,
        });
    }

    let xi0 = acc.ipr()?;
    let delta_omega = params.delta_omega();
    let bin_width = acc.bin_width();

    let mut gamma0 = bin_width;
    let mut residual = Real::NAN;
    let mut resolved = false;
    if params.v_rms > 0.0 {
        let samples = acc.fit_samples(delta_omega, false)?;
        let init_gamma = golden_rule_gamma0(params).max(bin_width);
        if let Ok(fit) = fitting::fit_contour(
            &samples,
            ContourParams::Lorentzian { gamma0: init_gamma },
        ) {
            residual = fit.residual;
            if fit.converged && fit.width > bin_width {
                gamma0 = fit.width;
                resolved = true;
            }
        }
    }

    Ok(FieldFreeReference {
        gamma0,
        xi0,
        delta_omega,
        fit_residual: residual,
        resolved,
        overflow_fraction: overflow,
        span,
        bins,
    })
}
