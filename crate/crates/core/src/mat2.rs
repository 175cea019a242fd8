use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};
#[allow(unused_imports)] // redundant when std is in the build graph
use num_traits::Float;


use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix, row-major, in the `(|+⟩, |−⟩)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMat2(pub [[C64; 2]; 2]);

impl ComplexMat2 {
    pub const ZERO: Self = Self([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    pub const SIGMA_X: Self = Self([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA_Y: Self = Self([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]]);
    pub const SIGMA_Z: Self = Self([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]);
    /// `σ⁺ = |+⟩⟨−|`
    pub const SIGMA_PLUS: Self = Self([[ZERO, ONE], [ZERO, ZERO]]);
    /// `σ⁻ = |−⟩⟨+|`
    pub const SIGMA_MINUS: Self = Self([[ZERO, ZERO], [ONE, ZERO]]);
    /// Excited-state projector `|+⟩⟨+|`.
    pub const PROJ_PLUS: Self = Self([[ONE, ZERO], [ZERO, ZERO]]);
    /// Ground-state projector `|−⟩⟨−|`.
    pub const PROJ_MINUS: Self = Self([[ZERO, ZERO], [ZERO, ONE]]);

    pub const fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Self([[a00, a01], [a10, a11]])
    }

    pub fn from_real(a00: f64, a01: f64, a10: f64, a11: f64) -> Self {
        Self::new(a00.into(), a01.into(), a10.into(), a11.into())
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.adjoint()).max_abs() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = (self.0[0][1] + self.0[1][0].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mean - half_gap, mean + half_gap)
    }
}

impl Index<(usize, usize)> for ComplexMat2 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat2 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Add for ComplexMat2 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl AddAssign for ComplexMat2 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for ComplexMat2 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Neg for ComplexMat2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for ComplexMat2 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<C64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexMat2 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}
