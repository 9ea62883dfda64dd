//! Truth model of the object held by `N` agents, integrated with fixed-step
//! RK4 under a zero-order-hold input. Everything here is hidden from the
//! controller.
//!
//! Object: `M_O ẍ + C_O ẋ + g_O + w_O = Gᵀ λ̄`.
//! Agent `i`: `M_i ẍ_Ei + g_i + f_i(x_Ei, ẋ_Ei) + w_i(t) = u_i − λ_i`.
//! Eliminating `λ̄` gives `M̃ ẍ + C̃ ẋ + h̃ + w̃ = Gᵀ ū`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{
    agent_jacobians, analytic_jacobian, analytic_jacobian_dot, euler_to_rotation,
    object_agent_jacobian_dot, object_to_agent_pose, skew, GraspOffset, KinematicsError, Mat3,
    Mat6, Pose, Vec6,
};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("state is no longer finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("integration step {0} is outside (0, 0.01]")]
    BadStep(f64),
    #[error("expected {expected} input entries, got {got}")]
    InputSize { expected: usize, got: usize },
    #[error("coupled inertia is not positive definite")]
    NotPositiveDefinite,
}

/// `a_k sin(ω_k t + φ_k)` per component.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: Vec6,
    pub frequency: Vec6,
    pub phase: Vec6,
}

impl Sinusoid {
    pub fn at(&self, t: f64) -> Vec6 {
        Vec6::from_fn(|k, _| self.amplitude[k] * (self.frequency[k] * t + self.phase[k]).sin())
    }

    pub fn bound(&self) -> f64 {
        self.amplitude.norm()
    }
}

/// Bounded state-dependent model error `a_k sin(x_k + ẋ_k + φ_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Uncertainty {
    pub amplitude: Vec6,
    pub phase: Vec6,
}

impl Uncertainty {
    pub fn at(&self, x: &Vec6, v: &Vec6) -> Vec6 {
        Vec6::from_fn(|k, _| self.amplitude[k] * (x[k] + v[k] + self.phase[k]).sin())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectParams {
    pub mass: f64,
    /// Body-frame inertia about the centre of mass.
    pub inertia: Mat3,
    pub g0: f64,
    pub disturbance: Sinusoid,
}

impl Default for ObjectParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            inertia: Mat3::identity() * 0.1,
            g0: GRAVITY,
            disturbance: Sinusoid::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Constant task-space inertia.
    pub inertia: Mat6,
    pub gravity: Vec6,
    pub uncertainty: Uncertainty,
    pub disturbance: Sinusoid,
    pub grasp: GraspOffset,
}

impl AgentParams {
    pub fn new(inertia: Mat6, grasp: GraspOffset) -> Self {
        Self {
            inertia,
            gravity: Vec6::zeros(),
            uncertainty: Uncertainty::default(),
            disturbance: Sinusoid::default(),
            grasp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoupledState {
    pub x: Pose,
    pub v: Vec6,
    pub t: f64,
}

impl CoupledState {
    pub fn at_rest(x: Pose) -> Self {
        Self {
            x,
            v: Vec6::zeros(),
            t: 0.0,
        }
    }

    fn is_finite(&self) -> bool {
        self.x
            .to_vector()
            .iter()
            .chain(self.v.iter())
            .all(|x| x.is_finite())
            && self.t.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMatrices {
    pub m: Mat6,
    pub c: Mat6,
    pub g: Vec6,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledMatrices {
    pub m: Mat6,
    pub c: Mat6,
    pub h: Vec6,
    pub w: Vec6,
}

pub fn object_matrices(
    x: &Pose,
    v: &Vec6,
    params: &ObjectParams,
) -> Result<ObjectMatrices, KinematicsError> {
    let j = analytic_jacobian(x.eta)?;
    let eta_dot = v.fixed_rows::<3>(3).into_owned();
    let jd = analytic_jacobian_dot(x.eta, &eta_dot);
    let r = euler_to_rotation(x.eta);
    let iw = r * params.inertia * r.transpose();
    let omega = j * eta_dot;
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Mat3::identity() * params.mass));
    let rot = j.transpose() * iw * j;
    m.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&((rot + rot.transpose()) * 0.5));
    let mut c = Mat6::zeros();
    c.fixed_view_mut::<3, 3>(3, 3)
        .copy_from(&(j.transpose() * (iw * jd + skew(&omega) * iw * j)));
    let g = Vec6::new(0.0, 0.0, params.mass * params.g0, 0.0, 0.0, 0.0);
    Ok(ObjectMatrices { m, c, g })
}

/// Per-step kinematic quantities shared by the dynamics terms.
struct Coupling {
    jac: Vec<Mat6>,
    jac_dot: Vec<Mat6>,
    x_e: Vec<Vec6>,
    v_e: Vec<Vec6>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledSystem {
    pub object: ObjectParams,
    pub agents: Vec<AgentParams>,
}

impl CoupledSystem {
    pub fn new(object: ObjectParams, agents: Vec<AgentParams>) -> Self {
        Self { object, agents }
    }

    pub fn grasps(&self) -> Vec<GraspOffset> {
        self.agents.iter().map(|a| a.grasp).collect()
    }

    fn coupling(&self, s: &CoupledState) -> Result<Coupling, KinematicsError> {
        let jac = agent_jacobians(&s.x, &self.grasps())?;
        let jac_dot = self
            .agents
            .iter()
            .map(|a| object_agent_jacobian_dot(&s.x, &s.v, &a.grasp))
            .collect::<Result<Vec<_>, _>>()?;
        let x_e = self
            .agents
            .iter()
            .map(|a| object_to_agent_pose(&s.x, &a.grasp).to_vector())
            .collect();
        let v_e = jac.iter().map(|j| j * s.v).collect();
        Ok(Coupling {
            jac,
            jac_dot,
            x_e,
            v_e,
        })
    }

    pub fn coupled_matrices(&self, s: &CoupledState) -> Result<CoupledMatrices, KinematicsError> {
        let k = self.coupling(s)?;
        self.assemble(s, &k)
    }

    fn assemble(&self, s: &CoupledState, k: &Coupling) -> Result<CoupledMatrices, KinematicsError> {
        let o = object_matrices(&s.x, &s.v, &self.object)?;
        let mut m = o.m;
        let mut c = o.c;
        let mut h = o.g;
        let mut w = self.object.disturbance.at(s.t);
        for (i, a) in self.agents.iter().enumerate() {
            let jt = k.jac[i].transpose();
            let mg = jt * a.inertia * k.jac[i];
            m += (mg + mg.transpose()) * 0.5;
            c += jt * a.inertia * k.jac_dot[i];
            h += jt * (a.gravity + a.uncertainty.at(&k.x_e[i], &k.v_e[i]));
            w += jt * a.disturbance.at(s.t);
        }
        Ok(CoupledMatrices { m, c, h, w })
    }

    fn check_input(&self, u: &DVector<f64>) -> Result<(), DynamicsError> {
        let expected = 6 * self.agents.len();
        if u.len() != expected {
            return Err(DynamicsError::InputSize {
                expected,
                got: u.len(),
            });
        }
        Ok(())
    }

    fn generalized_input(&self, k: &Coupling, u: &DVector<f64>) -> Vec6 {
        k.jac
            .iter()
            .enumerate()
            .map(|(i, j)| j.transpose() * u.fixed_rows::<6>(6 * i))
            .sum()
    }

    /// `ẍ = M̃⁻¹ (Gᵀ ū − C̃ ẋ − h̃ − w̃)`.
    pub fn acceleration(&self, s: &CoupledState, u: &DVector<f64>) -> Result<Vec6, DynamicsError> {
        self.check_input(u)?;
        let k = self.coupling(s)?;
        let cm = self.assemble(s, &k)?;
        let rhs = self.generalized_input(&k, u) - cm.c * s.v - cm.h - cm.w;
        cm.m.cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or(DynamicsError::NotPositiveDefinite)
    }

    /// One RK4 step of length `dt` with `u` held constant.
    pub fn step(
        &self,
        s: &CoupledState,
        u: &DVector<f64>,
        dt: f64,
    ) -> Result<CoupledState, DynamicsError> {
        if !(dt > 0.0 && dt <= 1e-2) {
            return Err(DynamicsError::BadStep(dt));
        }
        // Integrate the angles unwrapped within the step, wrap at the end.
        let x0 = s.x.to_vector();
        let f = |x: &Vec6, v: &Vec6, t: f64| -> Result<(Vec6, Vec6), DynamicsError> {
            let st = CoupledState {
                x: Pose::from_vector(x),
                v: *v,
                t,
            };
            Ok((*v, self.acceleration(&st, u)?))
        };
        let (k1x, k1v) = f(&x0, &s.v, s.t)?;
        let (k2x, k2v) = f(
            &(x0 + k1x * (dt / 2.0)),
            &(s.v + k1v * (dt / 2.0)),
            s.t + dt / 2.0,
        )?;
        let (k3x, k3v) = f(
            &(x0 + k2x * (dt / 2.0)),
            &(s.v + k2v * (dt / 2.0)),
            s.t + dt / 2.0,
        )?;
        let (k4x, k4v) = f(&(x0 + k3x * dt), &(s.v + k3v * dt), s.t + dt)?;
        let x = x0 + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        let v = s.v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        let next = CoupledState {
            x: Pose::from_vector(&x),
            v,
            t: s.t + dt,
        };
        if !next.is_finite() {
            return Err(DynamicsError::NonFiniteState { t: next.t });
        }
        if next.x.eta.is_singular() {
            return Err(KinematicsError::SingularOrientation {
                pitch: next.x.eta.pitch,
            }
            .into());
        }
        Ok(next)
    }

    /// Per-agent interaction wrenches `λ_i = u_i − M_i ẍ_Ei − g_i − f_i − w_i`
    /// for an object acceleration `a`, stacked.
    pub fn interaction_wrenches(
        &self,
        s: &CoupledState,
        u: &DVector<f64>,
        a: &Vec6,
    ) -> Result<DVector<f64>, DynamicsError> {
        self.check_input(u)?;
        let k = self.coupling(s)?;
        let mut out = DVector::zeros(6 * self.agents.len());
        for (i, ag) in self.agents.iter().enumerate() {
            let acc_e = k.jac[i] * a + k.jac_dot[i] * s.v;
            let lambda = u.fixed_rows::<6>(6 * i)
                - ag.inertia * acc_e
                - ag.gravity
                - ag.uncertainty.at(&k.x_e[i], &k.v_e[i])
                - ag.disturbance.at(s.t);
            out.fixed_rows_mut::<6>(6 * i).copy_from(&lambda);
        }
        Ok(out)
    }

    /// `Gᵀ λ̄ − (M_O ẍ + C_O ẋ + g_O + w_O)` and a scale for relative checks.
    pub fn object_residual(
        &self,
        s: &CoupledState,
        lambda: &DVector<f64>,
        a: &Vec6,
    ) -> Result<(Vec6, f64), DynamicsError> {
        let k = self.coupling(s)?;
        let o = object_matrices(&s.x, &s.v, &self.object)?;
        let applied = self.generalized_input(&k, lambda);
        let w = self.object.disturbance.at(s.t);
        let inertial = o.m * a;
        let coriolis = o.c * s.v;
        let expected = inertial + coriolis + o.g + w;
        let scale = [
            applied.norm(),
            inertial.norm(),
            coriolis.norm(),
            o.g.norm(),
            w.norm(),
        ]
        .into_iter()
        .fold(1.0, f64::max);
        Ok((applied - expected, scale))
    }

    /// Dense grasp matrix at the state, for callers that need `G` itself.
    pub fn grasp_matrix(&self, s: &CoupledState) -> Result<DMatrix<f64>, KinematicsError> {
        crate::kinematics::grasp_matrix(&s.x, &self.grasps())
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &Mat6) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}
