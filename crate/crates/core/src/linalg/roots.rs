//! Polynomial roots as eigenvalues of the companion matrix, computed with a
//! shifted complex QR iteration on the (already Hessenberg) companion form.

use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::CMatrix;
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const MAX_SWEEPS: usize = 60;

/// Eigenvalues of an upper Hessenberg matrix.
pub fn hessenberg_eigenvalues(mut h: CMatrix) -> Result<Vec<C64>> {
    let n = h.rows();
    if !h.is_square() {
        return Err(Error::Dimension { expected: n, found: h.cols() });
    }
    let mut eig = Vec::with_capacity(n);
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    loop {
        if hi == 0 {
            eig.push(h[(0, 0)]);
            break;
        }
        // locate the start of the trailing unreduced block
        let mut lo = hi;
        while lo > 0 {
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig.push(h[(hi, hi)]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS * n {
            return Err(Error::Integration("QR iteration did not converge".into()));
        }
        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + C64::new(h[(hi, hi - 1)].norm() * 0.75, 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_step(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
    let e1 = half_tr + disc;
    let e2 = half_tr - disc;
    if (e1 - d).norm() < (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, shift: C64) {
    for k in lo..=hi {
        h[(k, k)] -= shift;
    }
    let mut rot = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let a = h[(k, k)];
        let b = h[(k + 1, k)];
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (C64::new(1.0, 0.0), ZERO) } else { (a / r, b / r) };
        for col in k..=hi {
            let x = h[(k, col)];
            let y = h[(k + 1, col)];
            h[(k, col)] = c.conj() * x + s.conj() * y;
            h[(k + 1, col)] = -s * x + c * y;
        }
        rot.push((c, s));
    }
    for (i, (c, s)) in rot.into_iter().enumerate() {
        let k = lo + i;
        for row in lo..=(k + 1).min(hi) {
            let x = h[(row, k)];
            let y = h[(row, k + 1)];
            h[(row, k)] = x * c + y * s;
            h[(row, k + 1)] = -x * s.conj() + y * c.conj();
        }
    }
    for k in lo..=hi {
        h[(k, k)] += shift;
    }
}

/// Horner evaluation; `coeffs` in descending powers.
pub fn poly_eval(coeffs: &[C64], s: C64) -> C64 {
    coeffs.iter().fold(ZERO, |acc, &c| acc * s + c)
}

fn poly_eval_with_derivative(coeffs: &[C64], s: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// Roots of a polynomial given in descending powers (`coeffs[0] ≠ 0`).
///
/// Companion eigenvalues followed by two Newton polishing steps on the
/// original polynomial.
pub fn polynomial_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let lead = *coeffs.first().ok_or(Error::InvalidParams("empty polynomial".into()))?;
    if lead == ZERO {
        return Err(Error::InvalidParams("leading coefficient is zero".into()));
    }
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    let n = coeffs.len() - 1;
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let mut comp = CMatrix::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -monic[j + 1];
    }
    for i in 1..n {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    let mut roots = hessenberg_eigenvalues(comp)?;
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = poly_eval_with_derivative(&monic, *r);
            if dp.norm() > 0.0 {
                let step = p / dp;
                let cand = *r - step;
                if poly_eval(&monic, cand).norm() < p.norm() {
                    *r = cand;
                }
            }
        }
    }
    Ok(roots)
}
