//! Small fixed-size complex matrix kernel used by the propagator.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// A 2x2 complex matrix stored row-major: `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Exponential of a trace-free matrix.
    ///
    /// With `mu^2 = -det A` one has `A^2 = mu^2 I`, hence
    /// `exp(A) = cosh(mu) I + sinh(mu)/mu A`.
    pub fn expm_traceless(&self) -> Mat2 {
        self.expm_traceless_with((-self.det()).sqrt())
    }

    /// [`Mat2::expm_traceless`] with `mu` supplied by the caller, for generators
    /// whose determinant is known more accurately than its rounded entries give.
    pub fn expm_traceless_with(&self, mu: Complex64) -> Mat2 {
        let (ch, shc) = cosh_sinhc(mu);
        Mat2::new(ch + shc * self.a, shc * self.b, shc * self.c, ch + shc * self.d)
    }
}

/// `(cosh mu, sinh(mu)/mu)`, with a series for small `mu`.
fn cosh_sinhc(mu: Complex64) -> (Complex64, Complex64) {
    if mu.norm() < 1e-4 {
        let m2 = mu * mu;
        let ch = ONE + m2 / 2.0 + m2 * m2 / 24.0;
        let shc = ONE + m2 / 6.0 + m2 * m2 / 120.0;
        (ch, shc)
    } else {
        (mu.cosh(), mu.sinh() / mu)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(m: &Mat2) -> Mat2 {
        let mut term = Mat2::identity();
        let mut sum = Mat2::identity();
        for k in 1..60 {
            term = (term * *m).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum + term;
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_series() {
        let m = Mat2::new(
            Complex64::new(0.3, -0.2),
            Complex64::new(1.1, 0.4),
            Complex64::new(-0.7, 0.05),
            Complex64::new(-0.3, 0.2),
        );
        let e = m.expm_traceless();
        let t = taylor_expm(&m);
        assert!((e - t).max_abs() < 1e-13);
        assert!((e.det() - ONE).norm() < 1e-13);
    }

    #[test]
    fn nilpotent_exponential_is_affine() {
        let z = Complex64::new(0.0, 2.5);
        let m = Mat2::new(ZERO, z, ZERO, ZERO);
        let e = m.expm_traceless();
        assert_eq!(e, Mat2::new(ONE, z, ZERO, ONE));
    }

    #[test]
    fn small_mu_branch_is_continuous() {
        let eps = 3e-5;
        let m = Mat2::from_real(eps, 0.0, 0.0, -eps);
        let e = m.expm_traceless();
        assert!((e.a.re - eps.exp()).abs() < 1e-15);
        assert!((e.d.re - (-eps).exp()).abs() < 1e-15);
    }
}
