//! Fixed-size 2×2 linear algebra used by the switch queue solver.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Determinants with magnitude below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Row vector of length two.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2(pub [f64; 2]);

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Vec2 {
    pub const ONES: Vec2 = Vec2([1.0, 1.0]);

    pub fn new(a: f64, b: f64) -> Self {
        Vec2([a, b])
    }

    pub fn sum(&self) -> f64 {
        self.0[0] + self.0[1]
    }

    pub fn dot(&self, other: &Vec2) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    /// Row vector times matrix.
    pub fn mul_mat(&self, m: &Mat2) -> Vec2 {
        let [a, b] = self.0;
        Vec2([a * m.0[0][0] + b * m.0[1][0], a * m.0[0][1] + b * m.0[1][1]])
    }

    pub fn scale(&self, k: f64) -> Vec2 {
        Vec2([self.0[0] * k, self.0[1] * k])
    }
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    /// Outer product `column · row`.
    pub fn outer(column: &Vec2, row: &Vec2) -> Self {
        let mut m = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = column.0[i] * row.0[j];
            }
        }
        m
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Inverse by the adjugate formula.
    pub fn inverse(&self) -> Result<Mat2> {
        let det = self.det();
        if !(det.abs() >= SINGULAR_DET) {
            return Err(Error::Singular { determinant: det });
        }
        let m = self.0;
        Ok(Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(1.0 / det))
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        let m = self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn row_sums(&self) -> Vec2 {
        self.mul_vec(&Vec2::ONES)
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().flatten().fold(f64::INFINITY, |acc, &x| acc.min(x))
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.det();
        if disc >= 0.0 {
            let root = disc.sqrt();
            (half_tr + root).abs().max((half_tr - root).abs())
        } else {
            // Complex pair: |λ|² = det.
            self.det().abs().sqrt()
        }
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
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
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}
