//! Matrix exponential by Padé approximation with scaling and squaring
//! (Higham 2005 degree selection).


#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;

use super::CMatrix;
use crate::{Error, Result, C64};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn pade_coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30_240.0, 15_120.0, 3_360.0, 420.0, 30.0, 1.0],
        7 => &[17_297_280.0, 8_648_640.0, 1_995_840.0, 277_200.0, 25_200.0, 1_512.0, 56.0, 1.0],
        9 => &[
            17_643_225_600.0,
            8_821_612_800.0,
            2_075_673_600.0,
            302_702_400.0,
            30_270_240.0,
            2_162_160.0,
            110_880.0,
            3_960.0,
            90.0,
            1.0,
        ],
        _ => unreachable!(),
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `e^A` for a square complex matrix.
pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension { expected: a.rows(), found: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix exponential input"));
    }
    let n = a.rows();
    let ident = CMatrix::identity(n);
    let norm = a.norm_one();

    for &(m, theta) in &THETA {
        if norm <= theta {
            let b = pade_coefficients(m);
            let a2 = a.matmul(a);
            let mut u = ident.scale(re(b[1]));
            let mut v = ident.scale(re(b[0]));
            let mut power = ident.clone();
            for k in 1..=m / 2 {
                power = power.matmul(&a2);
                u.axpy(re(b[2 * k + 1]), &power);
                v.axpy(re(b[2 * k]), &power);
            }
            let u = a.matmul(&u);
            return finish(&u, &v);
        }
    }

    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a.scale(re(0.5f64.powi(s)));
    let b = &B13;
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = a6.scale(re(b[13]));
    inner_u.axpy(re(b[11]), &a4);
    inner_u.axpy(re(b[9]), &a2);
    let mut u = a6.matmul(&inner_u);
    u.axpy(re(b[7]), &a6);
    u.axpy(re(b[5]), &a4);
    u.axpy(re(b[3]), &a2);
    u.axpy(re(b[1]), &ident);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale(re(b[12]));
    inner_v.axpy(re(b[10]), &a4);
    inner_v.axpy(re(b[8]), &a2);
    let mut v = a6.matmul(&inner_v);
    v.axpy(re(b[6]), &a6);
    v.axpy(re(b[4]), &a4);
    v.axpy(re(b[2]), &a2);
    v.axpy(re(b[0]), &ident);

    let mut r = finish(&u, &v)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    if !r.is_finite() {
        return Err(Error::NonFinite("matrix exponential"));
    }
    Ok(r)
}

/// Solves `(V − U) R = (V + U)`.
fn finish(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v.add(u);
    let q = v.sub(u);
    q.solve(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Truncated Taylor series with many terms, used as an independent check.
    fn taylor(a: &CMatrix, terms: usize) -> CMatrix {
        let n = a.rows();
        let mut sum = CMatrix::identity(n);
        let mut term = CMatrix::identity(n);
        for k in 1..terms {
            term = term.matmul(a).scale(re(1.0 / k as f64));
            sum = sum.add(&term);
        }
        sum
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::from_row_major(2, 2, vec![c(0.3, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.5)]).unwrap();
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - c(0.3, 1.0).exp()).norm() < 1e-14);
        assert!((e[(1, 1)] - c(-2.0, 0.5).exp()).norm() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-16);
    }

    #[test]
    fn rotation_generator() {
        // exp(θ [[0, -1], [1, 0]]) is a rotation by θ
        let theta = 7.3;
        let a = CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)]).unwrap();
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - theta.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - theta.sin()).abs() < 1e-13);
    }

    #[test]
    fn matches_taylor_for_all_degrees() {
        for &scale in &[1e-3, 0.1, 0.8, 2.0, 4.5, 12.0] {
            let a = CMatrix::from_fn(4, 4, |r, cidx| {
                let x = (r * 4 + cidx) as f64;
                c((x * 0.37).sin(), (x * 0.11).cos() - 0.5).scale(scale / 4.0)
            });
            let e = expm(&a).unwrap();
            let t = taylor(&a, 120);
            let err = e.sub(&t).max_abs() / t.max_abs();
            assert!(err < 1e-12, "scale {scale}: rel err {err:e}");
        }
    }

    #[test]
    fn nilpotent_jordan_block() {
        let a = CMatrix::from_row_major(2, 2, vec![c(0.0, 0.0), c(5.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let e = expm(&a).unwrap();
        assert!((e[(0, 1)] - c(5.0, 0.0)).norm() < 1e-13);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn non_finite_rejected() {
        let a = CMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]).unwrap();
        assert!(matches!(expm(&a), Err(Error::NonFinite(_))));
    }
}
