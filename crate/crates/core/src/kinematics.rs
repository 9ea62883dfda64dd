//! Rotations, Euler-angle rates and the rigid-grasp coupling between the
//! object frame and the agents' end-effector frames.
//!
//! Orientation is ZYX (yaw-pitch-roll): `R = Rz(ψ) Ry(θ) Rx(φ)`, stored as
//! `(φ, θ, ψ)`. Generalized 6-vectors are `[position; roll, pitch, yaw]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat6 = Matrix6<f64>;

/// Smallest admissible `|cos θ|` before the Euler-rate map is singular.
pub const SINGULARITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KinematicsError {
    #[error("orientation is at the Euler-angle singularity (pitch = {pitch} rad)")]
    SingularOrientation { pitch: f64 },
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerAngles {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl EulerAngles {
    pub fn new(roll: f64, pitch: f64, yaw: f64) -> Self {
        Self {
            roll: wrap_angle(roll),
            pitch: wrap_angle(pitch),
            yaw: wrap_angle(yaw),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vec3) -> Self {
        Self::new(v.x, v.y, v.z)
    }

    pub fn to_vector(self) -> Vec3 {
        Vec3::new(self.roll, self.pitch, self.yaw)
    }

    /// Componentwise sum, re-wrapped.
    pub fn compose(self, other: EulerAngles) -> Self {
        Self::from_vector(&(self.to_vector() + other.to_vector()))
    }

    /// Componentwise `self - other`, each wrapped into `(-π, π]`.
    pub fn wrapped_diff(self, other: EulerAngles) -> Vec3 {
        (self.to_vector() - other.to_vector()).map(wrap_angle)
    }

    pub fn is_singular(self) -> bool {
        self.pitch.cos().abs() < SINGULARITY_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub p: Vec3,
    pub eta: EulerAngles,
}

impl Pose {
    pub fn new(p: Vec3, eta: EulerAngles) -> Self {
        Self { p, eta }
    }

    pub fn to_vector(self) -> Vec6 {
        let e = self.eta.to_vector();
        Vec6::new(self.p.x, self.p.y, self.p.z, e.x, e.y, e.z)
    }

    pub fn from_vector(x: &Vec6) -> Self {
        Self {
            p: x.fixed_rows::<3>(0).into_owned(),
            eta: EulerAngles::from_vector(&x.fixed_rows::<3>(3).into_owned()),
        }
    }
}

/// Where agent `i` holds the object: offset `r` of the grasp point from the
/// object centre in object coordinates, and angular offset `α` of the
/// end-effector frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GraspOffset {
    pub r: Vec3,
    pub alpha: EulerAngles,
}

pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

pub fn euler_to_rotation(eta: EulerAngles) -> Mat3 {
    let (sf, cf) = eta.roll.sin_cos();
    let (st, ct) = eta.pitch.sin_cos();
    let (sp, cp) = eta.yaw.sin_cos();
    Mat3::new(
        cp * ct,
        cp * st * sf - sp * cf,
        cp * st * cf + sp * sf,
        sp * ct,
        sp * st * sf + cp * cf,
        sp * st * cf - cp * sf,
        -st,
        ct * sf,
        ct * cf,
    )
}

fn jacobian_unchecked(eta: EulerAngles) -> Mat3 {
    let (st, ct) = eta.pitch.sin_cos();
    let (sp, cp) = eta.yaw.sin_cos();
    Mat3::new(cp * ct, -sp, 0.0, sp * ct, cp, 0.0, -st, 0.0, 1.0)
}

fn check(eta: EulerAngles) -> Result<(), KinematicsError> {
    if eta.is_singular() {
        Err(KinematicsError::SingularOrientation { pitch: eta.pitch })
    } else {
        Ok(())
    }
}

/// `J(η)` with `ω = J(η) η̇`, angular velocity in world coordinates.
pub fn analytic_jacobian(eta: EulerAngles) -> Result<Mat3, KinematicsError> {
    check(eta)?;
    Ok(jacobian_unchecked(eta))
}

/// Time derivative of `J(η)` along the rate `η̇ = eta_dot`.
pub fn analytic_jacobian_dot(eta: EulerAngles, eta_dot: &Vec3) -> Mat3 {
    let (st, ct) = eta.pitch.sin_cos();
    let (sp, cp) = eta.yaw.sin_cos();
    let (dt, dp) = (eta_dot.y, eta_dot.z);
    Mat3::new(
        -sp * ct * dp - cp * st * dt,
        -cp * dp,
        0.0,
        cp * ct * dp - sp * st * dt,
        -sp * dp,
        0.0,
        -ct * dt,
        0.0,
        0.0,
    )
}

pub fn object_to_agent_pose(x_o: &Pose, g: &GraspOffset) -> Pose {
    Pose {
        p: x_o.p + euler_to_rotation(x_o.eta) * g.r,
        eta: x_o.eta.compose(g.alpha),
    }
}

fn invert3(m: &Mat3, eta: EulerAngles) -> Result<Mat3, KinematicsError> {
    m.try_inverse()
        .ok_or(KinematicsError::SingularOrientation { pitch: eta.pitch })
}

/// `J_Oi`, mapping object velocity to end-effector velocity:
/// `[[I, S(p_O - p_E) J_O], [0, J_E⁻¹ J_O]]`.
pub fn object_agent_jacobian(x_e: &Pose, x_o: &Pose) -> Result<Mat6, KinematicsError> {
    let j_o = analytic_jacobian(x_o.eta)?;
    let j_e = analytic_jacobian(x_e.eta)?;
    let mut m = Mat6::identity();
    m.fixed_view_mut::<3, 3>(0, 3)
        .copy_from(&(skew(&(x_o.p - x_e.p)) * j_o));
    m.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(invert3(&j_e, x_e.eta)? * j_o));
    Ok(m)
}

/// Time derivative of `J_Oi` while the object moves with velocity `v_o`.
/// The end-effector angles follow the object's as `η_E = η_O + α`.
pub fn object_agent_jacobian_dot(
    x_o: &Pose,
    v_o: &Vec6,
    g: &GraspOffset,
) -> Result<Mat6, KinematicsError> {
    let x_e = object_to_agent_pose(x_o, g);
    let eta_dot = v_o.fixed_rows::<3>(3).into_owned();
    let j_o = analytic_jacobian(x_o.eta)?;
    let j_e_inv = invert3(&analytic_jacobian(x_e.eta)?, x_e.eta)?;
    let jd_o = analytic_jacobian_dot(x_o.eta, &eta_dot);
    let jd_e = analytic_jacobian_dot(x_e.eta, &eta_dot);
    let omega = j_o * eta_dot;
    let p_oe = x_o.p - x_e.p;
    let p_oe_dot = omega.cross(&p_oe);
    let upper = skew(&p_oe_dot) * j_o + skew(&p_oe) * jd_o;
    let lower = -j_e_inv * jd_e * j_e_inv * j_o + j_e_inv * jd_o;
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&upper);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&lower);
    Ok(m)
}

/// Per-agent `J_Oi` for the object at `x_o`.
pub fn agent_jacobians(x_o: &Pose, grasps: &[GraspOffset]) -> Result<Vec<Mat6>, KinematicsError> {
    grasps
        .iter()
        .map(|g| object_agent_jacobian(&object_to_agent_pose(x_o, g), x_o))
        .collect()
}

/// `G`, the `6N × 6` stack of the `J_Oi` blocks.
pub fn grasp_matrix(x_o: &Pose, grasps: &[GraspOffset]) -> Result<DMatrix<f64>, KinematicsError> {
    let blocks = agent_jacobians(x_o, grasps)?;
    Ok(stack(&blocks))
}

pub fn stack(blocks: &[Mat6]) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(6 * blocks.len(), 6);
    for (i, b) in blocks.iter().enumerate() {
        g.view_mut((6 * i, 0), (6, 6)).copy_from(b);
    }
    g
}
