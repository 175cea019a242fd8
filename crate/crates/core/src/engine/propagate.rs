use alloc::vec;
use alloc::vec::Vec;

use super::coefficients::CoefficientVector;
use super::generator::GeneratorMatrix;
use crate::linalg::{expm, CMatrix};
use crate::{Error, Result, C64};

/// `c(t) = e^{Mt} c₀` at each of `times` (sorted, nonnegative).
///
/// Only the part of the coefficient space reachable from the support of
/// `c₀` is exponentiated; steps of equal length reuse one exponential.
pub fn propagate(gen: &GeneratorMatrix, c0: &CoefficientVector, times: &[f64]) -> Result<Vec<CoefficientVector>> {
    if c0.len() != gen.dim() {
        return Err(Error::Dimension { expected: gen.dim(), found: c0.len() });
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be sorted and nonnegative".into()));
    }
    if c0.values().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("initial coefficients"));
    }
    let seeds: Vec<usize> = (0..c0.len()).filter(|&i| c0.values()[i] != C64::new(0.0, 0.0)).collect();
    let block = gen.matrix().reachable_from(&seeds);
    let m = gen.matrix().dense_submatrix(&block);
    let mut v: Vec<C64> = block.iter().map(|&i| c0.values()[i]).collect();

    let mut out = Vec::with_capacity(times.len());
    let mut now = 0.0;
    let mut cached: Option<(f64, CMatrix)> = None;
    for &t in times {
        let h = t - now;
        if h > 0.0 {
            let reuse = matches!(&cached, Some((ch, _)) if (*ch - h).abs() <= 1e-14 * h);
            if !reuse {
                cached = Some((h, expm(&m.scale(C64::new(h, 0.0)))?));
            }
            v = cached.as_ref().unwrap().1.matvec(&v);
            now = t;
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("propagated coefficients"));
        }
        let mut full = vec![C64::new(0.0, 0.0); gen.dim()];
        for (&i, &x) in block.iter().zip(&v) {
            full[i] = x;
        }
        out.push(CoefficientVector::from_values(gen.n_spins(), full)?);
    }
    Ok(out)
}
