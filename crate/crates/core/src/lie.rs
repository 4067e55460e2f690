//! Exact algebra on SO(3), S^2, SE(3) and the direct product SO(3) x R^3.
//!
//! Conventions: body velocity `omega = (R^T dR/dt)^vee`, and `hat(w) v = w x v`.
//! The exponential and logarithm use closed Rodrigues forms; every coefficient
//! that suffers cancellation near zero angle switches to its Taylor series.
//! Logarithms refuse rotation angles within `LOG_PI_MARGIN` of pi rather than
//! choosing a branch.

use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type AlgebraVector3 = Vector3<f64>;

/// Rotations closer than this to angle pi have no unique logarithm here.
pub const LOG_PI_MARGIN: f64 = 1e-6;

const ORTHO_TOL: f64 = 1e-12;
const SKEW_TOL: f64 = 1e-10;

/// Element of SO(3) stored as a 3x3 orthonormal matrix with unit determinant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

impl Rotation3 {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    /// Validates orthonormality and orientation to 1e-12.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let ortho = (m.transpose() * m - Matrix3::identity()).amax();
        let det = m.determinant();
        if ortho > ORTHO_TOL || (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::InvalidInput(format!(
                "not a rotation: |R^T R - I| = {ortho:e}, det = {det}"
            )));
        }
        Ok(Self(m))
    }

    /// Nearest rotation in Frobenius norm (polar projection).
    pub fn project(m: &Matrix3<f64>) -> Self {
        let svd = m.svd(true, true);
        let u = svd.u.expect("svd u");
        let v_t = svd.v_t.expect("svd v_t");
        let mut r = u * v_t;
        if r.determinant() < 0.0 {
            let mut fix = Matrix3::identity();
            fix[(2, 2)] = -1.0;
            r = u * fix * v_t;
        }
        Self(r)
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        exp_so3(&(axis.normalize() * angle))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let s = 0.5 * vee_unchecked(&(self.0 - self.0.transpose())).norm();
        let c = 0.5 * (self.0.trace() - 1.0);
        s.atan2(c)
    }

    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Matrix3::identity()).amax()
    }
}

impl Mul for Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

impl Mul<&Rotation3> for &Rotation3 {
    type Output = Rotation3;
    fn mul(self, rhs: &Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

impl Mul<Vector3<f64>> for Rotation3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl Mul<&Vector3<f64>> for &Rotation3 {
    type Output = Vector3<f64>;
    fn mul(self, rhs: &Vector3<f64>) -> Vector3<f64> {
        self.0 * rhs
    }
}

impl fmt::Display for Rotation3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}, {}], [{}, {}, {}], [{}, {}, {}]]",
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)]
        )
    }
}

pub fn hat(w: &AlgebraVector3) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Inverse of [`hat`]; rejects matrices with `|Omega + Omega^T| > 1e-10`.
pub fn vee(omega: &Matrix3<f64>) -> Result<AlgebraVector3> {
    let sym = (omega + omega.transpose()).amax();
    if sym > SKEW_TOL {
        return Err(Error::InvalidInput(format!(
            "vee of non-skew matrix (|M + M^T| = {sym:e})"
        )));
    }
    Ok(vee_unchecked(omega))
}

/// Reads the skew part; used where the input is skew up to roundoff.
pub(crate) fn vee_unchecked(omega: &Matrix3<f64>) -> AlgebraVector3 {
    Vector3::new(
        0.5 * (omega[(2, 1)] - omega[(1, 2)]),
        0.5 * (omega[(0, 2)] - omega[(2, 0)]),
        0.5 * (omega[(1, 0)] - omega[(0, 1)]),
    )
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// (1 - cos x) / x^2, written through sin(x/2) to avoid cancellation.
fn one_minus_cos_over_sq(x: f64) -> f64 {
    let s = sinc(0.5 * x);
    0.5 * s * s
}

/// (x - sin x) / x^3.
fn x_minus_sin_over_cube(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362_880.0
            + x2 * x2 * x2 * x2 / 39_916_800.0
    } else {
        (x - x.sin()) / (x * x * x)
    }
}

/// (1 - (x/2) cot(x/2)) / x^2, the quadratic coefficient of V^-1.
fn left_jacobian_inverse_coeff(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 / 12.0 + x2 / 720.0 + x2 * x2 / 30_240.0 + x2 * x2 * x2 / 1_209_600.0
    } else {
        let h = 0.5 * x;
        (1.0 - h * h.cos() / h.sin()) / (x * x)
    }
}

pub fn exp_so3(w: &AlgebraVector3) -> Rotation3 {
    let theta = w.norm();
    let k = hat(w);
    Rotation3(Matrix3::identity() + k * sinc(theta) + k * k * one_minus_cos_over_sq(theta))
}

/// Principal logarithm; errors when the angle is within `LOG_PI_MARGIN` of pi.
pub fn log_so3(r: &Rotation3) -> Result<AlgebraVector3> {
    let m = r.matrix();
    let axis_part = vee_unchecked(&(m - m.transpose()));
    let s = axis_part.norm() * 0.5;
    let c = 0.5 * (m.trace() - 1.0);
    let theta = s.atan2(c);
    if theta > std::f64::consts::PI - LOG_PI_MARGIN {
        return Err(Error::AmbiguousLogarithm { angle: theta });
    }
    // axis_part = 2 sin(theta) * unit axis
    Ok(axis_part * (0.5 / sinc(theta)))
}

/// The rotation about `a x b` carrying unit vector `a` to unit vector `b`.
///
/// Parallel inputs give the identity; antipodal inputs have no unique answer
/// and are rejected.
pub fn rotation_between(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<Rotation3> {
    check_unit(a)?;
    check_unit(b)?;
    let axis = a.cross(b);
    let s2 = axis.norm_squared();
    if s2.sqrt() <= 1e-9 {
        if a.dot(b) > 0.0 {
            return Ok(Rotation3::identity());
        }
        return Err(Error::DegeneratePair(
            "antipodal vectors: rotation axis is not unique".into(),
        ));
    }
    let k = hat(&axis);
    let m = Matrix3::identity() + k + k * k * ((1.0 - a.dot(b)) / s2);
    Ok(Rotation3(m))
}

fn check_unit(v: &Vector3<f64>) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "expected a unit vector, norm is {}",
            v.norm()
        )));
    }
    Ok(())
}

/// `R0 exp(t log(R0^T R1))`.
pub fn geodesic_so3(r0: &Rotation3, r1: &Rotation3, t: f64) -> Result<Rotation3> {
    let w = log_so3(&(r0.transpose() * *r1))?;
    Ok(*r0 * exp_so3(&(w * t)))
}

/// Constant body angular velocity of the SO(3) geodesic on unit time.
pub fn geodesic_so3_velocity(r0: &Rotation3, r1: &Rotation3) -> Result<AlgebraVector3> {
    log_so3(&(r0.transpose() * *r1))
}

/// Minimal great-circle arc `exp(t log R(a, b)) a` on the unit sphere.
pub fn sphere_geodesic(a: &Vector3<f64>, b: &Vector3<f64>, t: f64) -> Result<Vector3<f64>> {
    let r = rotation_between(a, b)?;
    let w = log_so3(&r)?;
    let u = exp_so3(&(w * t)) * *a;
    Ok(u / u.norm())
}

/// How two poses combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupLaw {
    /// SO(3) x R^3: `(R1 R2, t1 + t2)`.
    Direct,
    /// SE(3): `(R1 R2, R1 t2 + t1)`.
    Semidirect,
}

/// Rotation-translation pair. The group law is chosen per operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3,
    pub translation: Vector3<f64>,
}

/// A pose interpreted in the direct product SO(3) x R^3.
pub type PoseDirect = Pose;
/// A pose interpreted in SE(3).
pub type PoseSE3 = Pose;

impl Pose {
    pub fn new(rotation: Rotation3, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation3::identity(), Vector3::zeros())
    }

    pub fn compose(&self, other: &Pose, law: GroupLaw) -> Pose {
        let rotation = self.rotation * other.rotation;
        let translation = match law {
            GroupLaw::Direct => self.translation + other.translation,
            GroupLaw::Semidirect => self.rotation * other.translation + self.translation,
        };
        Pose::new(rotation, translation)
    }

    pub fn inverse(&self, law: GroupLaw) -> Pose {
        let rt = self.rotation.transpose();
        let translation = match law {
            GroupLaw::Direct => -self.translation,
            GroupLaw::Semidirect => -(rt * self.translation),
        };
        Pose::new(rt, translation)
    }

    /// Max-norm distance between the (R, t) parts.
    pub fn distance_max(&self, other: &Pose) -> f64 {
        (self.rotation.matrix() - other.rotation.matrix())
            .amax()
            .max((self.translation - other.translation).amax())
    }
}

/// Element of se(3): angular part `(R^T dR)^vee` and linear part `R^T dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist6 {
    pub angular: AlgebraVector3,
    pub linear: Vector3<f64>,
}

impl Twist6 {
    pub fn new(angular: AlgebraVector3, linear: Vector3<f64>) -> Self {
        Self { angular, linear }
    }

    pub fn scale(&self, s: f64) -> Twist6 {
        Twist6::new(self.angular * s, self.linear * s)
    }

    pub fn norm_squared(&self) -> f64 {
        self.angular.norm_squared() + self.linear.norm_squared()
    }
}

pub fn exp_se3(xi: &Twist6) -> Pose {
    let theta = xi.angular.norm();
    let k = hat(&xi.angular);
    let v = Matrix3::identity()
        + k * one_minus_cos_over_sq(theta)
        + k * k * x_minus_sin_over_cube(theta);
    Pose::new(exp_so3(&xi.angular), v * xi.linear)
}

pub fn log_se3(g: &Pose) -> Result<Twist6> {
    let w = log_so3(&g.rotation)?;
    let theta = w.norm();
    let k = hat(&w);
    let v_inv = Matrix3::identity() - k * 0.5 + k * k * left_jacobian_inverse_coeff(theta);
    Ok(Twist6::new(w, v_inv * g.translation))
}

/// Paired geodesics on SO(3) x R^3: rotation geodesic, straight translation.
pub fn geodesic_pose_direct(g0: &Pose, g1: &Pose, t: f64) -> Result<PoseDirect> {
    let rotation = geodesic_so3(&g0.rotation, &g1.rotation, t)?;
    let translation = g0.translation + (g1.translation - g0.translation) * t;
    Ok(Pose::new(rotation, translation))
}

/// One-parameter-subgroup path `g0 exp(t log(g0^-1 g1))` in SE(3).
pub fn geodesic_se3(g0: &Pose, g1: &Pose, t: f64) -> Result<PoseSE3> {
    let rel = g0
        .inverse(GroupLaw::Semidirect)
        .compose(g1, GroupLaw::Semidirect);
    let xi = log_se3(&rel)?;
    Ok(g0.compose(&exp_se3(&xi.scale(t)), GroupLaw::Semidirect))
}

/// Constant body twist of the SE(3) geodesic on unit time.
pub fn geodesic_se3_twist(g0: &Pose, g1: &Pose) -> Result<Twist6> {
    let rel = g0
        .inverse(GroupLaw::Semidirect)
        .compose(g1, GroupLaw::Semidirect);
    log_se3(&rel)
}
