//! BRMDD ensemble sampling.
//!
//! One realization is a real symmetric matrix of dimension N + 1 holding the
//! probe state `|g>` at row/column 0 and the band states `|k>` (k = -K..K,
//! N = 2K + 1) at rows/columns 1..=N. The band diagonal is disordered: the
//! levels are drawn i.i.d. uniform on [-K*delta, K*delta] (Poissonian
//! spacings), unsorted, with the middle level pinned at zero. Couplings are
//! uniform on [-V, V] with V = v*sqrt(3) inside the band |k' - k| < b and
//! zero elsewhere. The probe state is statically decoupled and sits at
//! e_g = -omega_f so the drive is exactly resonant with the band midpoint.

use faer::Mat;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

/// Full static description of one ensemble point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of band states N; odd, N = 2K + 1.
    pub n_states: usize,
    /// Mean unperturbed level spacing (energy units, hbar = 1).
    pub delta: Real,
    /// Root-mean-square off-diagonal coupling v.
    pub v_rms: Real,
    /// Band halfwidth b in index space; couplings vanish for |k' - k| >= b.
    pub band: usize,
    /// Rabi frequency of the drive.
    pub rabi: Real,
    /// Time pieces M per drive period.
    #[serde(default = "default_pieces")]
    pub pieces: usize,
    /// Drive frequency factor C_f; omega_f = C_f * N * delta.
    #[serde(default = "default_drive_factor")]
    pub drive_factor: Real,
    /// Master seed of the disorder ensemble.
    pub seed: u64,
    /// Number of disorder realizations to average over.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_pieces() -> usize {
    32
}

fn default_drive_factor() -> Real {
    10.0
}

fn default_realizations() -> usize {
    256
}

impl ModelParams {
    /// K = (N - 1) / 2.
    pub fn half_size(&self) -> usize {
        (self.n_states - 1) / 2
    }

    /// Matrix dimension N + 1 (band states plus the probe state).
    pub fn dim(&self) -> usize {
        self.n_states + 1
    }

    /// Halfwidth V of the uniform coupling distribution, V = v * sqrt(3).
    pub fn coupling_halfwidth(&self) -> Real {
        self.v_rms * Real::sqrt(3.0)
    }

    /// Mean quasienergy spacing (hbar = 1, so it equals `delta`).
    pub fn delta_omega(&self) -> Real {
        self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_states < 3 || self.n_states % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "n_states must be odd and >= 3, got {}",
                self.n_states
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be a positive finite number, got {}",
                self.delta
            )));
        }
        if !(self.v_rms >= 0.0) || !self.v_rms.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "v_rms must be >= 0, got {}",
                self.v_rms
            )));
        }
        if self.band < 1 {
            return Err(Error::InvalidParameter("band must be >= 1".into()));
        }
        if !(self.rabi >= 0.0) || !self.rabi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rabi must be >= 0, got {}",
                self.rabi
            )));
        }
        if self.pieces < 2 {
            return Err(Error::InvalidParameter(format!(
                "pieces must be >= 2, got {}",
                self.pieces
            )));
        }
        if !(self.drive_factor > 2.0) {
            return Err(Error::InvalidParameter(format!(
                "drive_factor must be > 2 so the band fits in half a quasienergy \
                 Brillouin zone, got {}",
                self.drive_factor
            )));
        }
        if self.realizations < 1 {
            return Err(Error::InvalidParameter("realizations must be >= 1".into()));
        }
        // drive_factor > 2 already implies omega_f / 2 > K * delta; keep the
        // physical check explicit in case the derivation changes.
        let drive = self.drive_factor * self.n_states as Real * self.delta;
        if drive / 2.0 <= self.half_size() as Real * self.delta {
            return Err(Error::InvalidParameter(
                "omega_f / 2 must exceed K * delta".into(),
            ));
        }
        Ok(())
    }
}

/// Drive frequency and period derived from the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    /// omega_f = C_f * N * delta.
    pub omega_f: Real,
    /// T_f = 2 pi / omega_f.
    pub period: Real,
}

/// Drive frequency omega_f = C_f * N * delta and period T_f = 2 pi / omega_f.
pub fn drive_frequency(params: &ModelParams) -> Result<Drive> {
    params.validate()?;
    let omega_f = params.drive_factor * params.n_states as Real * params.delta;
    Ok(Drive {
        omega_f,
        period: std::f64::consts::TAU / omega_f,
    })
}

/// One sampled Hamiltonian with index bookkeeping for `|g>` and `|0>`.
#[derive(Debug, Clone)]
pub struct Realization {
    /// Real symmetric matrix of dimension N + 1.
    pub h0: Mat<Real>,
    /// Row/column of the probe state `|g>` (always 0).
    pub g_index: usize,
    /// Row/column of the band midpoint state `|0>` (always K + 1).
    pub k0_index: usize,
    /// Probe level e_g = -omega_f, making the drive exactly resonant.
    pub e_g: Real,
    /// Diagonal band levels E_k in index order k = -K..K.
    pub diag_energies: Vec<Real>,
}

/// Sample one disorder realization.
///
/// The random stream is a pure function of `(params.seed, realization_index)`,
/// so identical inputs reproduce the matrix bit-exactly regardless of thread
/// count or call order.
pub fn sample_realization(params: &ModelParams, realization_index: usize) -> Result<Realization> {
    params.validate()?;
    let n = params.n_states;
    let half = params.half_size();
    let dim = params.dim();
    let drive = drive_frequency(params)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(realization_index as u64);

    let mut h0 = Mat::<Real>::zeros(dim, dim);
    let e_g = -drive.omega_f;
    h0[(0, 0)] = e_g;

    let k_delta = half as Real * params.delta;
    let level = Uniform::new_inclusive(-k_delta, k_delta);
    let mut diag = vec![0.0; n];
    for (i, energy) in diag.iter_mut().enumerate() {
        if i == half {
            continue; // E_0 pinned at the band midpoint
        }
        *energy = level.sample(&mut rng);
    }
    for (i, &energy) in diag.iter().enumerate() {
        h0[(1 + i, 1 + i)] = energy;
    }

    let halfwidth = params.coupling_halfwidth();
    if halfwidth > 0.0 {
        let coupling = Uniform::new_inclusive(-halfwidth, halfwidth);
        for i in 0..n {
            let j_end = (i + params.band).min(n);
            for j in (i + 1)..j_end {
                let v = coupling.sample(&mut rng);
                h0[(1 + i, 1 + j)] = v;
                h0[(1 + j, 1 + i)] = v;
            }
        }
    }

    Ok(Realization {
        h0,
        g_index: 0,
        k0_index: 1 + half,
        e_g,
        diag_energies: diag,
    })
}
