//! Closed-form lineshapes of the driven two-state system with irreversible
//! losses (TSSIL): a lower level without losses coupled by a resonant field
//! of Rabi frequency Omega to an upper level that is Lorentzian-broadened
//! with width Gamma_0.
//!
//! Below the boundary 2*Omega/Gamma_0 = 1 the correlation decays
//! aperiodically and the spectrum is the product of two Lorentzians with
//! coefficients a1 >= a2 satisfying a1 + a2 = Gamma_0 and a1 * a2 = Omega^2.
//! At and above the boundary the decay oscillates and the spectrum is the
//! `strong_contour` form with d1^2 = Omega^2 - Gamma_0^2/4, d2 = Gamma_0/2.
//! As printed, the weak contour integrates to 1 and the strong contour to
//! 1/4, so every fit against data carries a free amplitude; the
//! `*_normalized` variants rescale to unit mass.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Float;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TssilParams<T> {
    /// Loss width Gamma_0 of the broadened upper level.
    pub gamma0: T,
    /// Rabi frequency Omega.
    pub rabi: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// 2*Omega/Gamma_0 < 1.
    Weak,
    /// 2*Omega/Gamma_0 >= 1 (the boundary belongs to the strong branch).
    Strong,
}

impl<T: Float> TssilParams<T> {
    pub fn new(gamma0: T, rabi: T) -> Result<Self> {
        if !(gamma0 > T::zero()) || !gamma0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be > 0, got {gamma0}"
            )));
        }
        if !(rabi >= T::zero()) || !rabi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rabi must be >= 0, got {rabi}"
            )));
        }
        Ok(Self { gamma0, rabi })
    }

    /// Field-strength ratio 2*Omega/Gamma_0.
    pub fn ratio(&self) -> T {
        T::of(2.0) * self.rabi / self.gamma0
    }

    pub fn regime(&self) -> Regime {
        if self.ratio() < T::one() {
            Regime::Weak
        } else {
            Regime::Strong
        }
    }
}

/// Breit-Wigner lineshape of width `gamma0`, normalized to unit mass.
pub fn lorentzian<T: Float>(omega: T, gamma0: T) -> T {
    let half = gamma0 / T::of(2.0);
    gamma0 / (T::of(2.0) * T::PI()) / (omega * omega + half * half)
}

/// Coefficients (a1, a2) of the weak-field contour, a1 >= a2.
///
/// They are the roots of x^2 - Gamma_0 x + Omega^2 = 0, which squares to the
/// textbook form a^2 = Gamma_0^2/2 - Omega^2 +/- Gamma_0 sqrt(Gamma_0^2/4 -
/// Omega^2). The small root is computed as Omega^2 / a1 to avoid the
/// cancellation in the subtractive branch.
pub fn weak_coefficients<T: Float>(p: &TssilParams<T>) -> Result<(T, T)> {
    if p.regime() != Regime::Weak {
        return Err(Error::Regime(format!(
            "weak coefficients need 2*Omega/Gamma_0 < 1, got {}",
            p.ratio()
        )));
    }
    let two = T::of(2.0);
    let discriminant = (p.gamma0 * p.gamma0 - T::of(4.0) * p.rabi * p.rabi).sqrt();
    let a1 = (p.gamma0 + discriminant) / two;
    let a2 = if p.rabi == T::zero() {
        T::zero()
    } else {
        p.rabi * p.rabi / a1
    };
    Ok((a1, a2))
}

/// Weak-field contour in the (a1, a2) parametrization; integrates to 1.
pub fn weak_contour<T: Float>(omega: T, a1: T, a2: T) -> T {
    let four = T::of(4.0);
    let eight_pi = T::of(8.0) * T::PI();
    let q1 = omega * omega + a1 * a1 / four;
    let q2 = omega * omega + a2 * a2 / four;
    a1 * a2 * (a1 + a2) / eight_pi / (q1 * q2)
}

/// Strong-field contour in the (d1, d2) parametrization; integrates to 1/4
/// as printed.
pub fn strong_contour_from<T: Float>(omega: T, d1: T, d2: T) -> T {
    let four = T::of(4.0);
    let core = four * omega * omega + d2 * d2 - d1 * d1;
    let denom = core * core + four * d2 * d2 * d1 * d1;
    d2 * (d2 * d2 + d1 * d1) / T::PI() / denom
}

/// Strong-field coefficients d1 = sqrt(Omega^2 - Gamma_0^2/4), d2 = Gamma_0/2.
pub fn strong_coefficients<T: Float>(p: &TssilParams<T>) -> Result<(T, T)> {
    if p.regime() != Regime::Strong {
        return Err(Error::Regime(format!(
            "strong coefficients need 2*Omega/Gamma_0 >= 1, got {}",
            p.ratio()
        )));
    }
    let four = T::of(4.0);
    let d1 = (p.rabi * p.rabi - p.gamma0 * p.gamma0 / four).max(T::zero()).sqrt();
    Ok((d1, p.gamma0 / T::of(2.0)))
}

/// Strong-field contour for the given parameters; integrates to 1/4.
pub fn strong_contour<T: Float>(omega: T, p: &TssilParams<T>) -> Result<T> {
    let (d1, d2) = strong_coefficients(p)?;
    Ok(strong_contour_from(omega, d1, d2))
}

/// Strong-field contour rescaled to unit mass.
pub fn strong_contour_normalized<T: Float>(omega: T, p: &TssilParams<T>) -> Result<T> {
    Ok(T::of(4.0) * strong_contour(omega, p)?)
}

/// Positions of the strong-contour maxima: +/- sqrt(d1^2 - d2^2)/2 when
/// d1 > d2, a single maximum at 0 otherwise.
pub fn strong_peak_position<T: Float>(d1: T, d2: T) -> T {
    if d1 > d2 {
        (d1 * d1 - d2 * d2).sqrt() / T::of(2.0)
    } else {
        T::zero()
    }
}

/// Regime-appropriate contour, normalized to unit mass, as a closure.
pub fn contour_normalized<T: Float>(p: &TssilParams<T>) -> Result<impl Fn(T) -> T> {
    enum Branch<T> {
        Weak { a1: T, a2: T },
        Strong { d1: T, d2: T },
    }
    let branch = match p.regime() {
        Regime::Weak => {
            let (a1, a2) = weak_coefficients(p)?;
            Branch::Weak { a1, a2 }
        }
        Regime::Strong => {
            let (d1, d2) = strong_coefficients(p)?;
            Branch::Strong { d1, d2 }
        }
    };
    Ok(move |omega: T| match branch {
        Branch::Weak { a1, a2 } => weak_contour(omega, a1, a2),
        Branch::Strong { d1, d2 } => T::of(4.0) * strong_contour_from(omega, d1, d2),
    })
}

/// Spectral mass of the unit-normalized contour outside [-s, s], evaluated
/// in closed form.
pub fn tail_mass<T: Float>(p: &TssilParams<T>, s: T) -> Result<T> {
    if !(s >= T::zero()) {
        return Err(Error::InvalidParameter(format!("span must be >= 0, got {s}")));
    }
    match p.regime() {
        Regime::Weak => {
            let (a1, a2) = weak_coefficients(p)?;
            if a2 == T::zero() {
                // Omega = 0: the spectrum degenerates to a point mass at 0.
                return Ok(T::zero());
            }
            Ok(weak_tail(a1, a2, s))
        }
        Regime::Strong => {
            let (d1, d2) = strong_coefficients(p)?;
            Ok(strong_tail(d1, d2, s))
        }
    }
}

/// Tail of a unit Lorentzian of width `gamma` outside [-s, s].
pub fn lorentzian_tail<T: Float>(gamma: T, s: T) -> T {
    T::one() - T::of(2.0) / T::PI() * (T::of(2.0) * s / gamma).atan()
}

fn weak_tail<T: Float>(a1: T, a2: T, s: T) -> T {
    // The weak contour decomposes as (a1 L_{a2} - a2 L_{a1}) / (a1 - a2)
    // with unit Lorentzians L; near a1 = a2 use the confluent limit.
    let diff = a1 - a2;
    if diff.abs() > T::of(1e-7) * a1 {
        (a1 * lorentzian_tail(a2, s) - a2 * lorentzian_tail(a1, s)) / diff
    } else {
        let a = (a1 + a2) / T::of(2.0);
        let four = T::of(4.0);
        let dtail = four * s / T::PI() / (a * a + four * s * s);
        lorentzian_tail(a, s) - a * dtail
    }
}

fn strong_tail<T: Float>(d1: T, d2: T, s: T) -> T {
    let four = T::of(4.0);
    let prefactor = d2 * (d2 * d2 + d1 * d1) / T::PI();
    let inside = if d1 > T::of(1e-7) * d2 {
        // Partial fractions over the complex roots of the quartic
        // denominator: Im(atan(s/c)/c) / (4 d1 d2) with c = (d2 - i d1)/2.
        let c = Complex::new(d2 / T::of(2.0), -d1 / T::of(2.0));
        let term = (Complex::new(s, T::zero()) / c).atan() / c;
        prefactor * term.im / (four * d1 * d2)
    } else {
        // d1 = 0 boundary: integral of 1/(4 w^2 + d2^2)^2.
        let q = d2 / T::of(2.0);
        let antiderivative = s / (q * q * (s * s + q * q)) + (s / q).atan() / (q * q * q);
        prefactor / T::of(16.0) * antiderivative
    };
    (T::one() - four * inside).max(T::zero())
}

/// Smallest symmetric span s with `tail_mass(p, s) <= epsilon`.
pub fn span_for_tail<T: Float>(p: &TssilParams<T>, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be in (0, 1), got {epsilon}"
        )));
    }
    let mut hi = p.gamma0 + p.rabi;
    let mut grow = 0;
    while tail_mass(p, hi)? > epsilon {
        hi = hi * T::of(2.0);
        grow += 1;
        if grow > 200 {
            return Err(Error::Numeric("tail mass does not decay".into()));
        }
    }
    let mut lo = T::zero();
    for _ in 0..96 {
        let mid = (lo + hi) / T::of(2.0);
        if tail_mass(p, mid)? > epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Shape width predicted by the model: the regime-appropriate contour is
/// evaluated on a dense grid and the same right-slope rule as the data fits
/// is applied (twice the halfwidth right of the positive-frequency peak).
pub fn predicted_width<T: Float>(p: &TssilParams<T>) -> Result<T> {
    if p.rabi == T::zero() {
        // Point spectrum at omega = 0; no width.
        return Ok(T::zero());
    }
    let contour = contour_normalized(p)?;
    let window = T::of(10.0) * (p.gamma0 + p.rabi);
    crate::fitting::extract_width(contour, window)
}

/// Tabulate a contour on `points` evenly spaced frequencies over
/// [-omega_max, omega_max]; used by the CLI curve emitter.
pub fn tabulate<T: Float>(
    contour: impl Fn(T) -> T,
    omega_max: T,
    points: usize,
) -> Vec<(T, T)> {
    let n = points.max(2);
    (0..n)
        .map(|i| {
            let frac = T::from_usize(i).unwrap() / T::from_usize(n - 1).unwrap();
            let omega = -omega_max + T::of(2.0) * omega_max * frac;
            (omega, contour(omega))
        })
        .collect()
}
