//! Least-squares fitting of analytic contours to binned LSD samples, the
//! right-slope width rule, and log-log power-law regression.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Float;
use crate::tssil;

/// Which analytic family a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    Lorentzian,
    WeakField,
    StrongField,
}

impl ContourKind {
    pub fn label(&self) -> &'static str {
        match self {
            ContourKind::Lorentzian => "lorentzian",
            ContourKind::WeakField => "weak_field",
            ContourKind::StrongField => "strong_field",
        }
    }
}

/// Shape parameters of one contour family, at unit amplitude and in the
/// as-printed normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ContourParams<T> {
    Lorentzian { gamma0: T },
    WeakField { a1: T, a2: T },
    StrongField { d1: T, d2: T },
}

impl<T: Float> ContourParams<T> {
    pub fn kind(&self) -> ContourKind {
        match self {
            ContourParams::Lorentzian { .. } => ContourKind::Lorentzian,
            ContourParams::WeakField { .. } => ContourKind::WeakField,
            ContourParams::StrongField { .. } => ContourKind::StrongField,
        }
    }

    /// Contour value at unit amplitude.
    pub fn eval(&self, omega: T) -> T {
        match *self {
            ContourParams::Lorentzian { gamma0 } => tssil::lorentzian(omega, gamma0),
            ContourParams::WeakField { a1, a2 } => tssil::weak_contour(omega, a1, a2),
            ContourParams::StrongField { d1, d2 } => tssil::strong_contour_from(omega, d1, d2),
        }
    }

    /// Characteristic frequency scale, used to size search windows.
    pub fn scale(&self) -> T {
        match *self {
            ContourParams::Lorentzian { gamma0 } => gamma0,
            ContourParams::WeakField { a1, a2 } => a1 + a2,
            ContourParams::StrongField { d1, d2 } => d1 + d2,
        }
    }

    fn to_vec(self) -> Vec<T> {
        match self {
            ContourParams::Lorentzian { gamma0 } => vec![gamma0],
            ContourParams::WeakField { a1, a2 } => vec![a1, a2],
            ContourParams::StrongField { d1, d2 } => vec![d1, d2],
        }
    }

    fn from_vec(kind: ContourKind, v: &[T]) -> Self {
        match kind {
            ContourKind::Lorentzian => ContourParams::Lorentzian { gamma0: v[0] },
            ContourKind::WeakField => ContourParams::WeakField { a1: v[0], a2: v[1] },
            ContourKind::StrongField => ContourParams::StrongField { d1: v[0], d2: v[1] },
        }
    }

    /// Order the weak-field pair so a1 >= a2; the contour is symmetric under
    /// the swap, so this only canonicalizes the representation.
    fn canonicalize(self) -> Self {
        match self {
            ContourParams::WeakField { a1, a2 } if a2 > a1 => {
                ContourParams::WeakField { a1: a2, a2: a1 }
            }
            other => other,
        }
    }
}

/// One binned LSD sample: frequency, density, and fit weight (per-bin
/// quasienergy count by default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample<T> {
    pub omega: T,
    pub rho: T,
    pub weight: T,
}

/// Result of a contour fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourFit<T> {
    pub params: ContourParams<T>,
    /// Free amplitude multiplying the as-printed contour.
    pub amplitude: T,
    /// Weighted RMS residual relative to the fitted peak height.
    pub residual: T,
    /// Width extracted from the fitted contour by the right-slope rule.
    pub width: T,
    pub converged: bool,
}

impl<T: Float> ContourFit<T> {
    /// Fitted density at a given frequency.
    pub fn density(&self, omega: T) -> T {
        self.amplitude * self.params.eval(omega)
    }
}

/// Weighted least-squares fit of a contour family to binned samples.
///
/// The shape parameters are optimized in log space by Nelder-Mead simplex
/// descent restarted from 5 perturbed initial points; the amplitude is
/// solved in closed form at every evaluation (it enters linearly). The best
/// of all restarts is returned. Convergence: relative objective change
/// below 1e-8 within a total budget of 1e4 evaluations.
pub fn fit_contour<T: Float>(
    samples: &[FitSample<T>],
    initial: ContourParams<T>,
) -> Result<ContourFit<T>> {
    let usable: Vec<FitSample<T>> = samples
        .iter()
        .copied()
        .filter(|s| s.weight > T::zero() && s.rho.is_finite())
        .collect();
    let n_params = initial.to_vec().len();
    if usable.len() < 8 || usable.len() <= n_params {
        return Err(Error::InsufficientData(format!(
            "{} usable samples for a {}-parameter contour (need >= 8)",
            usable.len(),
            n_params
        )));
    }
    let init = initial.to_vec();
    if init.iter().any(|p| !(*p > T::zero()) || !p.is_finite()) {
        // The strong-field d1 may legitimately sit at the regime boundary;
        // nudge it off zero so the log parametrization is defined.
        let scale = initial.scale().max(T::of(1e-30));
        let mut fixed = init.clone();
        for p in fixed.iter_mut() {
            if !(*p > T::zero()) {
                *p = scale * T::of(1e-6);
            }
        }
        return fit_contour(samples, ContourParams::from_vec(initial.kind(), &fixed));
    }

    let kind = initial.kind();
    let log_init: Vec<T> = init.iter().map(|p| p.ln()).collect();

    let objective = |log_params: &[T]| -> (T, T) {
        let params: Vec<T> = log_params.iter().map(|p| p.exp()).collect();
        if params.iter().any(|p| !p.is_finite()) {
            return (T::max_value(), T::zero());
        }
        let shape = ContourParams::from_vec(kind, &params);
        // Closed-form optimal amplitude: the model is linear in it.
        let mut num = T::zero();
        let mut den = T::zero();
        for s in &usable {
            let f = shape.eval(s.omega);
            num += s.weight * s.rho * f;
            den += s.weight * f * f;
        }
        if !(den > T::zero()) || !den.is_finite() || !num.is_finite() {
            return (T::max_value(), T::zero());
        }
        let amplitude = (num / den).max(T::zero());
        let mut ssr = T::zero();
        for s in &usable {
            let diff = s.rho - amplitude * shape.eval(s.omega);
            ssr += s.weight * diff * diff;
        }
        if !ssr.is_finite() {
            return (T::max_value(), amplitude);
        }
        (ssr, amplitude)
    };

    // Deterministic log-space offsets for the restarts.
    const PERTURBATIONS: [[f64; 2]; 5] = [
        [0.45, 0.0],
        [0.0, 0.45],
        [-0.45, 0.3],
        [0.3, -0.45],
        [-0.35, -0.35],
    ];

    let budget_total = 10_000usize;
    let tolerance = T::of(1e-8);
    let mut best: Option<nelder_mead::Minimum<T>> = None;
    let mut spent = 0usize;
    for restart in 0..=PERTURBATIONS.len() {
        if spent >= budget_total {
            break;
        }
        let mut start = log_init.clone();
        if restart > 0 {
            for (i, x) in start.iter_mut().enumerate() {
                *x += T::of(PERTURBATIONS[restart - 1][i.min(1)]);
            }
        }
        let run = nelder_mead::minimize(
            |x| objective(x).0,
            &start,
            T::of(0.35),
            tolerance,
            (budget_total - spent).min(2_500),
        );
        spent += run.evaluations;
        let better = match &best {
            None => true,
            Some(b) => run.value < b.value,
        };
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart ran");

    let params: Vec<T> = best.x.iter().map(|p| p.exp()).collect();
    let shape = ContourParams::from_vec(kind, &params).canonicalize();
    let (_, amplitude) = objective(&best.x);

    // Residual relative to the fitted peak height over the sample grid.
    let mut ssr = T::zero();
    let mut wsum = T::zero();
    let mut peak = T::zero();
    for s in &usable {
        let f = amplitude * shape.eval(s.omega);
        let diff = s.rho - f;
        ssr += s.weight * diff * diff;
        wsum += s.weight;
        peak = peak.max(f);
    }
    let residual = if peak > T::zero() {
        (ssr / wsum).sqrt() / peak
    } else {
        T::infinity()
    };

    let span = usable
        .iter()
        .map(|s| s.omega.abs())
        .fold(T::zero(), T::max);
    let window = (T::of(10.0) * shape.scale()).max(span * T::of(1.5));
    let width = extract_width(|w| shape.eval(w), window).unwrap_or(T::zero());

    Ok(ContourFit {
        params: shape,
        amplitude,
        residual,
        width,
        converged: best.converged && width > T::zero(),
    })
}

/// Shape width by the right-slope rule: locate the maximum at omega >= 0,
/// find the crossing of half the peak value on its right slope, and return
/// twice the distance. For a symmetric single peak this is the FWHM.
///
/// The peak is bracketed by a 1e4-point grid scan over [0, window], refined
/// by golden-section search; the half crossing is bisected to full
/// precision.
pub fn extract_width<T: Float>(contour: impl Fn(T) -> T, window: T) -> Result<T> {
    if !(window > T::zero()) || !window.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "search window must be positive and finite, got {window}"
        )));
    }
    const GRID: usize = 10_000;
    let step = window / T::from_usize(GRID).unwrap();
    let mut best_i = 0usize;
    let mut best_v = contour(T::zero());
    for i in 1..=GRID {
        let v = contour(step * T::from_usize(i).unwrap());
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }

    // Golden-section refinement on the bracketing interval.
    let lo = if best_i == 0 {
        T::zero()
    } else {
        step * T::from_usize(best_i - 1).unwrap()
    };
    let hi = step * T::from_usize((best_i + 1).min(GRID)).unwrap();
    let inv_phi = T::of(0.618_033_988_749_894_8);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (contour(c), contour(d));
    for _ in 0..90 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = contour(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = contour(d);
        }
    }
    let peak_pos = (a + b) / T::of(2.0);
    let peak_val = contour(peak_pos);
    if !(peak_val > T::zero()) {
        return Err(Error::WindowExhausted {
            window: window.to_f64_lossy(),
        });
    }
    let half = peak_val / T::of(2.0);

    // Bracket the right-slope half crossing.
    let mut left = peak_pos;
    let mut right = peak_pos;
    let mut found = false;
    let mut i = best_i + 1;
    while i <= GRID {
        let x = step * T::from_usize(i).unwrap();
        if contour(x) < half {
            right = x;
            found = true;
            break;
        }
        left = x;
        i += 1;
    }
    if !found {
        return Err(Error::WindowExhausted {
            window: window.to_f64_lossy(),
        });
    }
    for _ in 0..120 {
        let mid = (left + right) / T::of(2.0);
        if contour(mid) >= half {
            left = mid;
        } else {
            right = mid;
        }
    }
    let half_pos = (left + right) / T::of(2.0);
    Ok(T::of(2.0) * (half_pos - peak_pos))
}

/// Power-law fit y = coefficient * x^exponent by ordinary least squares on
/// (log x, log y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw<T> {
    pub coefficient: T,
    pub exponent: T,
    pub r_squared: T,
}

pub fn fit_power_law<T: Float>(points: &[(T, T)]) -> Result<PowerLaw<T>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(x, y)| !(x > T::zero()) || !(y > T::zero())) {
        return Err(Error::InvalidParameter(
            "power-law fit requires strictly positive coordinates".into(),
        ));
    }
    let n = T::from_usize(points.len()).unwrap();
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<T>() / n;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for &(x, y) in &logs {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    if !(sxx > T::zero()) {
        return Err(Error::InsufficientData(
            "power-law fit needs at least two distinct abscissae".into(),
        ));
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let mut ss_res = T::zero();
    for &(x, y) in &logs {
        let r = y - (intercept + exponent * x);
        ss_res += r * r;
    }
    let r_squared = if syy > T::zero() {
        T::one() - ss_res / syy
    } else {
        T::one()
    };
    Ok(PowerLaw {
        coefficient: intercept.exp(),
        exponent,
        r_squared,
    })
}

/// Plain Nelder-Mead simplex descent; enough for the 1-2 parameter contour
/// shapes fitted here.
pub(crate) mod nelder_mead {
    use crate::scalar::Float;

    pub struct Minimum<T> {
        pub x: Vec<T>,
        pub value: T,
        pub evaluations: usize,
        pub converged: bool,
    }

    pub fn minimize<T: Float>(
        mut f: impl FnMut(&[T]) -> T,
        x0: &[T],
        step: T,
        tolerance: T,
        max_evaluations: usize,
    ) -> Minimum<T> {
        let dim = x0.len();
        let (alpha, gamma, rho, sigma) = (T::one(), T::of(2.0), T::of(0.5), T::of(0.5));

        let mut evals = 0usize;
        let mut eval = |x: &[T], evals: &mut usize| -> T {
            *evals += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                T::max_value()
            }
        };

        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(dim + 1);
        let v0 = eval(x0, &mut evals);
        simplex.push((x0.to_vec(), v0));
        for i in 0..dim {
            let mut x = x0.to_vec();
            x[i] += step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let mut converged = false;
        while evals < max_evaluations {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            let best = simplex[0].1;
            let worst = simplex[dim].1;
            let denom = best.abs().max(T::of(1e-300));
            if (worst - best).abs() / denom < tolerance {
                converged = true;
                break;
            }

            let centroid: Vec<T> = (0..dim)
                .map(|j| {
                    simplex[..dim]
                        .iter()
                        .map(|(x, _)| x[j])
                        .sum::<T>()
                        / T::from_usize(dim).unwrap()
                })
                .collect();

            let reflect: Vec<T> = (0..dim)
                .map(|j| centroid[j] + alpha * (centroid[j] - simplex[dim].0[j]))
                .collect();
            let fr = eval(&reflect, &mut evals);

            if fr < simplex[0].1 {
                let expand: Vec<T> = (0..dim)
                    .map(|j| centroid[j] + gamma * (reflect[j] - centroid[j]))
                    .collect();
                let fe = eval(&expand, &mut evals);
                simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
            } else if fr < simplex[dim - 1].1 {
                simplex[dim] = (reflect, fr);
            } else {
                let contract: Vec<T> = (0..dim)
                    .map(|j| centroid[j] + rho * (simplex[dim].0[j] - centroid[j]))
                    .collect();
                let fc = eval(&contract, &mut evals);
                if fc < simplex[dim].1 {
                    simplex[dim] = (contract, fc);
                } else {
                    let best_x = simplex[0].0.clone();
                    for entry in simplex.iter_mut().skip(1) {
                        let shrunk: Vec<T> = (0..dim)
                            .map(|j| best_x[j] + sigma * (entry.0[j] - best_x[j]))
                            .collect();
                        let fv = eval(&shrunk, &mut evals);
                        *entry = (shrunk, fv);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        Minimum {
            x: simplex[0].0.clone(),
            value: simplex[0].1,
            evaluations: evals,
            converged,
        }
    }
}
