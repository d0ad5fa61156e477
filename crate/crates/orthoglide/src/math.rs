//! Dense 3-vector / 3x3-matrix algebra used throughout the engine.
//!
//! Rotation matrices follow the coordinate-transform convention: `rot_z(phi)`
//! maps coordinates of a vector from the parent frame into a child frame
//! rotated by `phi` about the shared z axis (the transpose of the usual
//! active rotation).

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Relative determinant threshold below which a 3x3 solve is rejected.
pub const SOLVE_SINGULARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const U1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
pub const U2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
pub const U3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        Vec3::new(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        self.scale(s)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub const fn new(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diag(d0: f64, d1: f64, d2: f64) -> Self {
        Mat3([[d0, 0.0, 0.0], [0.0, d1, 0.0], [0.0, 0.0, d2]])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::new(self.0[i][0], self.0[i][1], self.0[i][2])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn set_col(&mut self, j: usize, v: Vec3) {
        self.0[0][j] = v.x;
        self.0[1][j] = v.y;
        self.0[2][j] = v.z;
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest Euclidean row norm, used for the scale-aware singularity test.
    pub fn max_row_norm(&self) -> f64 {
        (0..3).fold(0.0_f64, |acc, i| acc.max(self.row(i).norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][j] + rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][j] - rhs.0[i][j];
            }
        }
        out
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j]
                    + self.0[i][1] * rhs.0[1][j]
                    + self.0[i][2] * rhs.0[2][j];
            }
        }
        out
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// Skew-symmetric matrix S with `S * w == u.cross(w)` for every w.
pub fn skew(u: Vec3) -> Mat3 {
    Mat3([[0.0, -u.z, u.y], [u.z, 0.0, -u.x], [-u.y, u.x, 0.0]])
}

/// Coordinate-transform rotation about z:
/// `[[cos, sin, 0], [-sin, cos, 0], [0, 0, 1]]`.
pub fn rot_z(phi: f64) -> Mat3 {
    let (s, c) = phi.sin_cos();
    Mat3([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
}

/// Solve `A x = b` by Cramer's rule with a scale-aware singularity guard:
/// rejects when `|det A| < SOLVE_SINGULARITY_TOL * max_row_norm(A)^3`.
pub fn solve(a: &Mat3, b: Vec3) -> Result<Vec3> {
    let det = a.det();
    let scale = a.max_row_norm().powi(3);
    if det.abs() < SOLVE_SINGULARITY_TOL * scale || det == 0.0 {
        return Err(Error::SingularMatrix);
    }
    let mut x = Vec3::ZERO;
    for j in 0..3 {
        let mut aj = *a;
        aj.set_col(j, b);
        x[j] = aj.det() / det;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat_close(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn skew_of_u3_matches_reference_layout() {
        let s = skew(U3);
        assert_eq!(
            s,
            Mat3([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        );
    }

    #[test]
    fn skew_of_zero_is_zero() {
        assert_eq!(skew(Vec3::ZERO), Mat3::ZERO);
    }

    #[test]
    fn skew_reproduces_cross_product() {
        assert_eq!(skew(U1) * U2, U3);
        let u = Vec3::new(0.3, -1.2, 0.7);
        let w = Vec3::new(-0.4, 0.9, 2.1);
        assert!((skew(u) * w - u.cross(w)).norm() < 1e-15);
    }

    #[test]
    fn rot_z_zero_is_identity() {
        assert_eq!(rot_z(0.0), Mat3::IDENTITY);
    }

    #[test]
    fn rot_z_quarter_turn_layout() {
        let r = rot_z(std::f64::consts::FRAC_PI_2);
        let expect = Mat3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(mat_close(&r, &expect, 1e-15));
    }

    #[test]
    fn rot_z_inverse_pair() {
        let phi = 0.73;
        assert!(mat_close(&(rot_z(phi) * rot_z(-phi)), &Mat3::IDENTITY, 1e-15));
    }

    #[test]
    fn det_identity_is_one() {
        assert_eq!(Mat3::IDENTITY.det(), 1.0);
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let b = Vec3::new(1.5, -2.0, 0.25);
        assert_eq!(solve(&Mat3::IDENTITY, b).unwrap(), b);
    }

    #[test]
    fn det_of_uniform_diagonal() {
        // direct product: 0.85 * 0.85 * 0.85
        let expect = 0.85 * 0.85 * 0.85;
        assert!((Mat3::diag(0.85, 0.85, 0.85).det() - expect).abs() < 1e-15);
        assert!((expect - 0.614125).abs() < 1e-15);
    }

    #[test]
    fn solve_rejects_singular_matrix() {
        let a = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 0.0]]);
        assert!(matches!(solve(&a, U1), Err(Error::SingularMatrix)));
    }

    #[test]
    fn solve_rejection_is_scale_aware() {
        // nearly-dependent rows at a small overall scale
        let eps = 1e-14;
        let a = Mat3([
            [1e-3, 0.0, 0.0],
            [0.0, 1e-3, 0.0],
            [1e-3, 1e-3, eps * 1e-3],
        ]);
        assert!(solve(&a, U1).is_err());
    }

    proptest! {
        #[test]
        fn skew_is_antisymmetric_in_its_arguments(
            ux in -10.0..10.0f64, uy in -10.0..10.0f64, uz in -10.0..10.0f64,
            vx in -10.0..10.0f64, vy in -10.0..10.0f64, vz in -10.0..10.0f64,
        ) {
            let u = Vec3::new(ux, uy, uz);
            let v = Vec3::new(vx, vy, vz);
            prop_assert!((skew(u) * v + skew(v) * u).norm() < 1e-12);
        }

        #[test]
        fn rot_z_is_orthogonal(phi in -10.0..10.0f64) {
            let r = rot_z(phi);
            prop_assert!(mat_close(&(r.transpose() * r), &Mat3::IDENTITY, 1e-14));
        }

        #[test]
        fn solve_recovers_known_solution(
            entries in proptest::array::uniform9(-2.0..2.0f64),
            xx in -3.0..3.0f64, xy in -3.0..3.0f64, xz in -3.0..3.0f64,
        ) {
            let a = Mat3([
                [entries[0] + 4.0, entries[1], entries[2]],
                [entries[3], entries[4] + 4.0, entries[5]],
                [entries[6], entries[7], entries[8] + 4.0],
            ]);
            // diagonally dominant, hence well-conditioned
            let x = Vec3::new(xx, xy, xz);
            let got = solve(&a, a * x).unwrap();
            prop_assert!((got - x).norm() <= 1e-10 * x.norm().max(1.0));
        }
    }
}
