//! Dense 2x2 complex matrices and the 4x4 superoperators acting on them.
//!
//! Index 0 is the ground level `|-⟩`, index 1 the excited level `|+⟩`.
//! Superoperators act on column-stacked matrices: `vec(X) = [X00, X10, X01, X11]`.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Matrix4;
use num_complex::Complex64;

pub type C64 = Complex64;

/// 4x4 complex matrix acting on column-stacked 2x2 operators.
pub type Superop = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn diag(ground: C64, excited: C64) -> Self {
        Mat2::new(ground, ZERO, ZERO, excited)
    }

    /// Matrix unit `|i⟩⟨j|`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Mat2::ZERO;
        m.0[i][j] = ONE;
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn determinant(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn conj(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `u x u†`
    pub fn sandwich(u: &Mat2, x: &Mat2) -> Self {
        *u * *x * u.adjoint()
    }

    pub fn diagonal_part(&self) -> Self {
        Mat2::diag(self.0[0][0], self.0[1][1])
    }

    pub fn off_diagonal_part(&self) -> Self {
        Mat2::new(ZERO, self.0[0][1], self.0[1][0], ZERO)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        let m = &self.0;
        m[0][0].norm().max(m[0][1].norm()).max(m[1][0].norm()).max(m[1][1].norm())
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Sum of singular values, from `s1² + s2² = ‖X‖_F²` and `s1 s2 = |det X|`.
    pub fn trace_norm(&self) -> f64 {
        let m = &self.0;
        let frob = m[0][0].norm_sqr() + m[0][1].norm_sqr() + m[1][0].norm_sqr() + m[1][1].norm_sqr();
        libm::sqrt(frob + 2.0 * self.determinant().norm())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Column-stacked vector.
    pub fn stack(&self) -> [C64; 4] {
        let m = &self.0;
        [m[0][0], m[1][0], m[0][1], m[1][1]]
    }

    pub fn unstack(v: [C64; 4]) -> Self {
        Mat2::new(v[0], v[2], v[1], v[3])
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let h = (*self + self.adjoint()).scale_re(0.5);
        let mean = 0.5 * (h.0[0][0].re + h.0[1][1].re);
        let half = 0.5 * (h.0[0][0].re - h.0[1][1].re);
        let r = libm::hypot(half, h.0[0][1].norm());
        [mean - r, mean + r]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        *self = *self + rhs;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale_re(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Matrix of a linear map on 2x2 operators.
pub fn superop_of<F: Fn(&Mat2) -> Mat2>(map: F) -> Superop {
    let mut s = Superop::zeros();
    for col in 0..4 {
        let mut e = [ZERO; 4];
        e[col] = ONE;
        let image = map(&Mat2::unstack(e)).stack();
        for (row, z) in image.iter().enumerate() {
            s[(row, col)] = *z;
        }
    }
    s
}

pub fn apply_superop(s: &Superop, x: &Mat2) -> Mat2 {
    let v = x.stack();
    let mut out = [ZERO; 4];
    for (row, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|col| s[(row, col)] * v[col]).sum();
    }
    Mat2::unstack(out)
}
