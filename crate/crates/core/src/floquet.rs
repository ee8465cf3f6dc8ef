//! Piecewise-constant drive, one-period Floquet operator, and quasienergy
//! spectra.
//!
//! The drive multiplies a rank-two coupling between `|g>` and `|0>` by a
//! sampled sine envelope. Each piece is propagated by the exact exponential
//! of its real symmetric Hamiltonian (spectral decomposition, so the factor
//! is unitary to roundoff), and the one-period operator is the chronological
//! product with m = 1 acting first.

use std::collections::HashMap;
use std::sync::Once;

use faer::{Mat, Side};

use crate::ensemble::{drive_frequency, ModelParams, Realization};
use crate::error::{Error, Result};
use crate::{Cplx, Real};

/// faer is kept sequential so results do not depend on its internal thread
/// scheduling; parallelism lives at the realization level instead.
pub(crate) fn serial_linalg() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// Quasienergies and probe overlaps of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    /// N + 1 quasienergies in (-omega_f/2, omega_f/2], sorted ascending.
    pub quasienergies: Vec<Real>,
    /// W_jg = |<alpha_j|g>|^2.
    pub weights_g: Vec<Real>,
    /// W_j0 = |<alpha_j|0>|^2.
    pub weights_k0: Vec<Real>,
    /// Drive period T_f.
    pub t_period: Real,
}

/// Sine envelope sample sin(2 pi m / pieces) with exact zeros at the half
/// and full period and exact antisymmetry between the half-periods, so the
/// drive has exactly zero mean over one period.
pub fn envelope_sample(m: usize, pieces: usize) -> Real {
    let q = m % pieces;
    if q == 0 || 2 * q == pieces {
        return 0.0;
    }
    let (sign, q) = if 2 * q > pieces {
        (-1.0, pieces - q)
    } else {
        (1.0, q)
    };
    if 4 * q == pieces {
        return sign;
    }
    let folded = if pieces % 2 == 0 {
        q.min(pieces / 2 - q)
    } else {
        q
    };
    sign * (std::f64::consts::TAU * folded as Real / pieces as Real).sin()
}

/// H(0) plus a coupling of strength `c` between `|g>` and `|0>`.
fn coupled_hamiltonian(r: &Realization, c: Real) -> Mat<Real> {
    let mut h = r.h0.clone();
    h[(r.g_index, r.k0_index)] += c;
    h[(r.k0_index, r.g_index)] += c;
    h
}

/// Piece Hamiltonian H(t_m) = H(0) + Omega sin(2 pi m / M) D for 1 <= m <= M.
pub fn drive_hamiltonian(r: &Realization, params: &ModelParams, m: usize) -> Result<Mat<Real>> {
    if m < 1 || m > params.pieces {
        return Err(Error::InvalidParameter(format!(
            "piece index m = {m} outside 1..={}",
            params.pieces
        )));
    }
    Ok(coupled_hamiltonian(
        r,
        params.rabi * envelope_sample(m, params.pieces),
    ))
}

/// exp(-i h tau) for real symmetric `h`, via spectral decomposition.
pub fn step_unitary(h: &Mat<Real>, tau: Real) -> Result<Mat<Cplx>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step duration must be positive, got {tau}"
        )));
    }
    serial_linalg();
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numeric(format!("symmetric eigensolver failed: {e:?}")))?;
    let v = evd.U();
    let lam = evd.S();
    let n = h.nrows();
    let mut v_cos = Mat::<Real>::zeros(n, n);
    let mut v_sin = Mat::<Real>::zeros(n, n);
    for j in 0..n {
        let (s, c) = (-lam[j] * tau).sin_cos();
        for i in 0..n {
            let x = v[(i, j)];
            v_cos[(i, j)] = x * c;
            v_sin[(i, j)] = x * s;
        }
    }
    let re = &v_cos * v.transpose();
    let im = &v_sin * v.transpose();
    Ok(Mat::from_fn(n, n, |i, j| Cplx::new(re[(i, j)], im[(i, j)])))
}

/// Flip the sign of the `probe` row and column off-diagonal entries. This is
/// conjugation by diag(-1 at probe, +1 elsewhere), which maps the step
/// unitary of coupling +c to the one of coupling -c exactly.
fn flip_probe_sign(u: &Mat<Cplx>, probe: usize) -> Mat<Cplx> {
    let n = u.nrows();
    Mat::from_fn(n, n, |i, j| {
        if (i == probe) != (j == probe) {
            -u[(i, j)]
        } else {
            u[(i, j)]
        }
    })
}

/// One-period Floquet operator: the chronological product S_M ... S_1 of the
/// piece propagators, m = 1 acting first.
///
/// Pieces sharing an envelope magnitude reuse one spectral decomposition;
/// opposite signs are related by the exact probe-sign conjugation.
pub fn floquet_operator(r: &Realization, params: &ModelParams) -> Result<Mat<Cplx>> {
    params.validate()?;
    serial_linalg();
    let drive = drive_frequency(params)?;
    let pieces = params.pieces;
    let tau = drive.period / pieces as Real;
    let dim = r.h0.nrows();

    let mut cache: HashMap<u64, Mat<Cplx>> = HashMap::new();
    let mut u = Mat::<Cplx>::identity(dim, dim);
    for m in 1..=pieces {
        let c = params.rabi * envelope_sample(m, pieces);
        let magnitude = c.abs();
        let key = magnitude.to_bits();
        if !cache.contains_key(&key) {
            let step = step_unitary(&coupled_hamiltonian(r, magnitude), tau)?;
            cache.insert(key, step);
        }
        u = if c < 0.0 {
            &flip_probe_sign(&cache[&key], r.g_index) * &u
        } else {
            &cache[&key] * &u
        };
    }
    Ok(u)
}

/// Max-norm of U^dagger U - I.
pub fn unitarity_defect(u: &Mat<Cplx>) -> Real {
    serial_linalg();
    let p = u.adjoint() * u;
    let n = u.nrows();
    let mut worst: Real = 0.0;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j {
                Cplx::new(1.0, 0.0)
            } else {
                Cplx::new(0.0, 0.0)
            };
            worst = worst.max((p[(i, j)] - expected).norm());
        }
    }
    worst
}

/// Eigendecomposition of the one-period operator.
///
/// Eigenvalues map to quasienergies omega_j = -arg(lambda_j) / T_f on the
/// branch (-omega_f/2, omega_f/2]. The eigenvector basis is restored to
/// exact orthonormality by one QR pass over the quasienergy-sorted columns,
/// which also assigns an orthonormal basis inside any numerically degenerate
/// cluster; weights are squared overlap magnitudes against that basis.
pub fn diagonalize(
    u: &Mat<Cplx>,
    r: &Realization,
    params: &ModelParams,
) -> Result<FloquetSpectrum> {
    serial_linalg();
    let drive = drive_frequency(params)?;
    let defect = unitarity_defect(u);
    if defect > 1e-6 {
        return Err(Error::Numeric(format!(
            "refusing to diagonalize: unitarity defect {defect:.3e} exceeds 1e-6"
        )));
    }
    let eig = u
        .eigen()
        .map_err(|e| Error::Numeric(format!("complex eigensolver failed: {e:?}")))?;
    let lam = eig.S();
    let vectors = eig.U();
    let n = u.nrows();
    let half = drive.omega_f / 2.0;

    let omegas_raw: Vec<Real> = (0..n)
        .map(|j| {
            let mut w = -lam[j].arg() / drive.period;
            if w <= -half {
                w += drive.omega_f;
            }
            w
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        omegas_raw[a]
            .partial_cmp(&omegas_raw[b])
            .unwrap()
            .then(a.cmp(&b))
    });

    let sorted = Mat::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    let q = sorted.qr().compute_Q();

    let quasienergies: Vec<Real> = order.iter().map(|&j| omegas_raw[j]).collect();
    let weights_g: Vec<Real> = (0..n).map(|j| q[(r.g_index, j)].norm_sqr()).collect();
    let weights_k0: Vec<Real> = (0..n).map(|j| q[(r.k0_index, j)].norm_sqr()).collect();

    Ok(FloquetSpectrum {
        quasienergies,
        weights_g,
        weights_k0,
        t_period: drive.period,
    })
}

/// Stroboscopic correlation C(n T_f) = sum_j W_jg exp(-i omega_j n T_f).
pub fn stroboscopic_correlation(spectrum: &FloquetSpectrum, n_periods: usize) -> Cplx {
    let t = spectrum.t_period * n_periods as Real;
    spectrum
        .quasienergies
        .iter()
        .zip(&spectrum.weights_g)
        .map(|(&omega, &w)| Cplx::from_polar(w, -omega * t))
        .sum()
}
