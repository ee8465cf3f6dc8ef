//! Shared helpers for the integration and acceptance suites: an adaptive
//! quadrature oracle, an independent matrix-exponential/product oracle on
//! plain nested vectors, and a characteristic-polynomial eigenphase oracle.

#![allow(dead_code)]

use brmdd::ensemble::ModelParams;
use brmdd::{Cplx, Real};
use faer::Mat;

pub fn params(n: usize, v: Real, band: usize, rabi: Real, pieces: usize, seed: u64) -> ModelParams {
    ModelParams {
        n_states: n,
        delta: 1.0,
        v_rms: v,
        band,
        rabi,
        pieces,
        drive_factor: 10.0,
        seed,
        realizations: 1,
    }
}

/// Adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(Real) -> Real, a: Real, b: Real, tol: Real) -> Real {
    fn simpson(f: &dyn Fn(Real) -> Real, a: Real, fa: Real, b: Real, fb: Real) -> (Real, Real, Real) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(Real) -> Real,
        a: Real,
        fa: Real,
        b: Real,
        fb: Real,
        whole: Real,
        m: Real,
        fm: Real,
        tol: Real,
        depth: u32,
    ) -> Real {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, tol * 0.5, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, tol * 0.5, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

pub type CMat = Vec<Vec<Cplx>>;

pub fn cmat_identity(n: usize) -> CMat {
    let mut m = vec![vec![Cplx::new(0.0, 0.0); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Cplx::new(1.0, 0.0);
    }
    m
}

pub fn cmat_mul(x: &CMat, y: &CMat) -> CMat {
    let n = x.len();
    let mut out = vec![vec![Cplx::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let xik = x[i][k];
            for j in 0..n {
                out[i][j] += xik * y[k][j];
            }
        }
    }
    out
}

/// Taylor-series exponential with scaling and squaring, independent of the
/// spectral-decomposition path under test.
pub fn cmat_expm(a: &CMat) -> CMat {
    let n = a.len();
    let norm: Real = a
        .iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<Real>())
        .fold(0.0, Real::max);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = 1.0 / (1u64 << squarings) as Real;
    let scaled: CMat = a
        .iter()
        .map(|row| row.iter().map(|z| z * scale).collect())
        .collect();
    let mut result = cmat_identity(n);
    let mut term = cmat_identity(n);
    for k in 1..=24 {
        term = cmat_mul(&term, &scaled);
        let inv = 1.0 / k as Real;
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z *= inv;
            }
        }
        for i in 0..n {
            for j in 0..n {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = cmat_mul(&result, &result);
    }
    result
}

pub fn max_abs_diff(u: &Mat<Cplx>, v: &CMat) -> Real {
    let mut worst: Real = 0.0;
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            worst = worst.max((u[(i, j)] - v[i][j]).norm());
        }
    }
    worst
}

pub fn to_cmat(u: &Mat<Cplx>) -> CMat {
    (0..u.nrows())
        .map(|i| (0..u.ncols()).map(|j| u[(i, j)]).collect())
        .collect()
}

/// Eigenvalues of a small complex matrix by Faddeev-LeVerrier coefficients
/// and Durand-Kerner root iteration; an oracle independent of any
/// eigensolver library.
pub fn charpoly_eigenvalues(a: &CMat) -> Vec<Cplx> {
    let n = a.len();
    // Faddeev-LeVerrier: m_1 = a, c_k = -tr(m_k)/k, m_{k+1} = a (m_k + c_k I).
    let mut coeffs = vec![Cplx::new(1.0, 0.0)];
    let mut m = a.clone();
    for k in 1..=n {
        let trace: Cplx = (0..n).map(|i| m[i][i]).sum();
        let c = -trace / k as Real;
        coeffs.push(c);
        if k < n {
            for i in 0..n {
                m[i][i] += c;
            }
            m = cmat_mul(a, &m);
        }
    }
    // p(z) = z^n + coeffs[1] z^{n-1} + ... + coeffs[n]
    let eval = |z: Cplx| -> Cplx {
        let mut acc = Cplx::new(0.0, 0.0);
        for c in &coeffs {
            acc = acc * z + c;
        }
        acc
    };
    let mut roots: Vec<Cplx> = (0..n)
        .map(|k| Cplx::from_polar(0.9, 0.7 + 2.3 * k as Real))
        .collect();
    for _ in 0..400 {
        let mut worst: Real = 0.0;
        let old = roots.clone();
        for i in 0..n {
            let mut denom = Cplx::new(1.0, 0.0);
            for (j, &r) in old.iter().enumerate() {
                if j != i {
                    denom *= old[i] - r;
                }
            }
            let step = eval(old[i]) / denom;
            roots[i] = old[i] - step;
            worst = worst.max(step.norm());
        }
        if worst < 1e-14 {
            break;
        }
    }
    roots
}
