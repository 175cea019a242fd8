use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::{AmplitudeKernel, AmplitudeKernelParams};
use crate::linalg::{poly_eval, polynomial_roots};
use crate::{Error, Result, C64};

/// Roots closer than this (relative to the root scale) are treated as equal.
const CONFLUENT_REL: f64 = 1e-6;

/// The three roots of a monic cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicRoots {
    pub roots: [C64; 3],
    /// Some pair of roots lies within the confluence threshold.
    pub degenerate: bool,
}

/// Roots of `c[0] s³ + c[1] s² + c[2] s + c[3]`, checked against the Vieta
/// identities.
pub fn cubic_roots(coeffs: [C64; 4]) -> Result<CubicRoots> {
    let found = polynomial_roots(&coeffs)?;
    if found.len() != 3 {
        return Err(Error::Dimension { expected: 3, found: found.len() });
    }
    let r = [found[0], found[1], found[2]];
    let lead = coeffs[0];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let scale = 1.0 + monic.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let checks = [
        (r[0] + r[1] + r[2] + monic[1], scale),
        (r[0] * r[1] + r[1] * r[2] + r[0] * r[2] - monic[2], scale * scale),
        (r[0] * r[1] * r[2] + monic[3], scale * scale * scale),
    ];
    let root_scale = r.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let gaps = [(r[0] - r[1]).norm(), (r[1] - r[2]).norm(), (r[0] - r[2]).norm()];
    let degenerate = gaps.iter().any(|&g| g < CONFLUENT_REL * root_scale);
    // coinciding roots are only resolved to about √ε
    let tol = if degenerate { 1e-7 } else { 1e-10 };
    for (defect, s) in checks {
        if defect.norm() > tol * s {
            return Err(Error::Integration(format!("cubic roots fail the Vieta check ({:e})", defect.norm() / s)));
        }
    }
    Ok(CubicRoots { roots: r, degenerate })
}

/// Characteristic polynomial of the amplitude equations with an
/// exponential memory kernel, in descending powers:
/// `s³ + (2iδ+λ)s² + (Ω² − δ² + iδλ + λγ/2)s + Ω²(iδ+λ)`.
pub fn lorentzian_polynomial(params: &AmplitudeKernelParams) -> Result<[C64; 4]> {
    params.validate()?;
    let bath = params
        .lorentzian
        .ok_or_else(|| Error::ValidityDomain("kernel parameters carry no Lorentzian bath".into()))?;
    if bath.offset != 0.0 {
        return Err(Error::ValidityDomain("only a resonant Lorentzian bath (offset 0) is supported".into()));
    }
    let (d, lam, g, w2) = (params.detuning, bath.width, bath.gamma, params.coupling * params.coupling);
    Ok([
        C64::new(1.0, 0.0),
        C64::new(lam, 2.0 * d),
        C64::new(w2 - d * d + 0.5 * lam * g, d * lam),
        C64::new(w2 * lam, w2 * d),
    ])
}

/// Amplitude `G(t) = Σᵢ N(αᵢ) e^{αᵢt} / p'(αᵢ)` with
/// `N(s) = (s+iδ)² + λ(s+iδ) + γλ/2`, evaluated as a second divided
/// difference of `N(s)e^{st}` so coinciding roots stay finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianKernel {
    roots: CubicRoots,
    numer: [C64; 3],
    scale: f64,
}

impl LorentzianKernel {
    pub fn new(params: &AmplitudeKernelParams) -> Result<Self> {
        let p = lorentzian_polynomial(params)?;
        let roots = cubic_roots(p)?;
        let bath = params.lorentzian.unwrap();
        let id = C64::new(0.0, params.detuning);
        // N(s) = s² + (2iδ + λ)s + (iδ)² + λ iδ + γλ/2
        let numer = [
            C64::new(1.0, 0.0),
            id * 2.0 + bath.width,
            id * id + id * bath.width + 0.5 * bath.gamma * bath.width,
        ];
        let scale = roots.roots.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        Ok(Self { roots, numer, scale })
    }

    pub fn roots(&self) -> &CubicRoots {
        &self.roots
    }

    /// `h(s)`, `h'(s)`, `h''(s)` for `h = N(s) e^{st}`.
    fn h(&self, s: C64, t: f64) -> [C64; 3] {
        let n = poly_eval(&self.numer, s);
        let dn = self.numer[0] * s * 2.0 + self.numer[1];
        let ddn = self.numer[0] * 2.0;
        let e = (s * t).exp();
        [n * e, (dn + n * t) * e, (ddn + dn * (2.0 * t) + n * (t * t)) * e]
    }

    fn close(&self, a: C64, b: C64) -> bool {
        (a - b).norm() < CONFLUENT_REL * self.scale
    }

    fn first_difference(&self, a: C64, b: C64, t: f64) -> C64 {
        if self.close(a, b) {
            self.h((a + b) * 0.5, t)[1]
        } else {
            (self.h(a, t)[0] - self.h(b, t)[0]) / (a - b)
        }
    }
}

impl AmplitudeKernel for LorentzianKernel {
    fn amplitude(&self, t: f64) -> C64 {
        let [r0, r1, r2] = self.roots.roots;
        let all_close = self.close(r0, r1) && self.close(r1, r2) && self.close(r0, r2);
        if all_close {
            return self.h((r0 + r1 + r2) / 3.0, t)[2] * 0.5;
        }
        // put the closest pair first so the outer difference has a wide gap
        let pairs = [(r0, r1, r2), (r1, r2, r0), (r0, r2, r1)];
        let (a, b, c) = pairs
            .iter()
            .copied()
            .min_by(|x, y| (x.0 - x.1).norm().total_cmp(&(y.0 - y.1).norm()))
            .unwrap();
        (self.first_difference(b, c, t) - self.first_difference(a, b, t)) / (c - a)
    }

    fn envelope(&self, t: f64) -> f64 {
        let slowest = self.roots.roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
        if self.roots.degenerate {
            let n = self.numer.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + self.scale).powi(2);
            return (slowest * t).exp() * n * (1.0 + t * t);
        }
        let [r0, r1, r2] = self.roots.roots;
        let residue = |a: C64, b: C64, c: C64| (poly_eval(&self.numer, a) / ((a - b) * (a - c))).norm();
        residue(r0, r1, r2) * (r0.re * t).exp()
            + residue(r1, r2, r0) * (r1.re * t).exp()
            + residue(r2, r0, r1) * (r2.re * t).exp()
    }
}

/// `G(t)` for a resonant Lorentzian bath.
pub fn amplitude_lorentzian(params: &AmplitudeKernelParams, t: f64) -> Result<C64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParams("amplitude time must be finite and nonnegative".into()));
    }
    Ok(LorentzianKernel::new(params)?.amplitude(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::LorentzianBath;

    fn params(d: f64, w: f64, lam: f64, g: f64) -> AmplitudeKernelParams {
        AmplitudeKernelParams::lorentzian(d, w, LorentzianBath { width: lam, gamma: g, offset: 0.0 })
    }

    #[test]
    fn starts_at_one() {
        let p = params(0.4, 1.0, 2.0, 1.5);
        assert!((amplitude_lorentzian(&p, 0.0).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_satisfy_polynomial() {
        let p = params(0.7, 1.3, 0.8, 2.0);
        let c = lorentzian_polynomial(&p).unwrap();
        let r = cubic_roots(c).unwrap();
        assert!(!r.degenerate);
        for x in r.roots {
            assert!(poly_eval(&c, x).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_offset_and_flat() {
        let mut p = params(0.0, 1.0, 1.0, 1.0);
        p.lorentzian.as_mut().unwrap().offset = 0.3;
        assert!(matches!(lorentzian_polynomial(&p), Err(Error::ValidityDomain(_))));
        let flat = AmplitudeKernelParams::flat(1.0, 0.0, 1.0);
        assert!(lorentzian_polynomial(&flat).is_err());
    }

    #[test]
    fn confluent_roots_stay_finite() {
        // λ = γ = 0, δ = 0: p(s) = s(s² + Ω²) has distinct roots; shrink Ω to
        // push two roots together
        let p = params(0.0, 1e-9, 1e-3, 0.0);
        let k = LorentzianKernel::new(&p).unwrap();
        let g = k.amplitude(2.0);
        assert!(g.re.is_finite() && (g - C64::new(1.0, 0.0)).norm() < 1e-6);
    }
}
