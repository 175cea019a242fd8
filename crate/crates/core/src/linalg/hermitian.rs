use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::CMatrix;
use crate::{Error, Result, C64};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending. Only the Hermitian part of `a` is used.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension { expected: a.rows(), found: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("Hermitian eigenvalue input"));
    }
    let n = a.rows();
    let mut m = CMatrix::from_fn(n, n, |r, c| (a[(r, c)] + a[(c, r)].conj()) * 0.5);
    let total: f64 = m.as_slice().iter().map(|z| z.norm_sqr()).sum();
    let tol = f64::EPSILON * f64::EPSILON * total.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)].norm_sqr())
            .sum();
        if off <= tol {
            let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
            eig.sort_by(|x, y| x.total_cmp(y));
            return Ok(eig);
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, p, q);
            }
        }
    }
    Err(Error::Integration("Jacobi eigenvalue iteration did not converge".into()))
}

fn rotate(m: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = [[c, s], [−s·e^{−iα}, c·e^{−iα}]] on (p, q); A ← Jᴴ A J
    let n = m.rows();
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;
    for r in 0..n {
        let x = m[(r, p)];
        let y = m[(r, q)];
        m[(r, p)] = x * c + y * jqp;
        m[(r, q)] = x * s + y * jqq;
    }
    for col in 0..n {
        let x = m[(p, col)];
        let y = m[(q, col)];
        m[(p, col)] = x * c + y * jqp.conj();
        m[(q, col)] = x * s + y * jqq.conj();
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
}
