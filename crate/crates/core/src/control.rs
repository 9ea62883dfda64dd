//! Distributed prescribed-performance controller.
//!
//! Each axis error is kept inside an exponentially shrinking envelope
//! `|e_k(t)| < ρ_k(t)`. Positions drive a reference velocity through the
//! transformed error `ε = ln((1+ξ)/(1−ξ))` with `ξ = e/ρ`; velocity errors
//! against that reference give each agent's wrench
//! `u_i = −c_i g_v J_Oi⁻ᵀ P_v⁻¹ R_v ε_v`. Only the measured object state, the
//! grasp geometry and the gains enter; no dynamic model is used.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{agent_jacobians, GraspOffset, KinematicsError, Mat6, Pose, Vec6};
use crate::trajectory::{Desired, TransitionTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Position,
    Velocity,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("{level:?} error on axis {axis} starts outside its envelope (ξ = {xi})")]
    EnvelopeViolatedAtStart { level: Level, axis: usize, xi: f64 },
    #[error("{level:?} error on axis {axis} left its envelope at t = {t} (ξ = {xi})")]
    EnvelopeViolated {
        t: f64,
        level: Level,
        axis: usize,
        xi: f64,
    },
    #[error("invalid controller parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// `ρ(t) = (ρ⁰ − ρ^∞) e^{−l (t − t₀)} + ρ^∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceFunction {
    pub rho0: f64,
    pub rho_inf: f64,
    pub decay: f64,
    pub t0: f64,
}

impl PerformanceFunction {
    pub fn new(rho0: f64, rho_inf: f64, decay: f64, t0: f64) -> Result<Self, ControlError> {
        if !(rho_inf > 0.0
            && rho0 > rho_inf
            && decay > 0.0
            && rho0.is_finite()
            && decay.is_finite())
        {
            return Err(ControlError::InvalidParameters(format!(
                "performance function needs ρ⁰ > ρ^∞ > 0 and l > 0, got ρ⁰ = {rho0}, ρ^∞ = {rho_inf}, l = {decay}"
            )));
        }
        Ok(Self {
            rho0,
            rho_inf,
            decay,
            t0,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.rho0 - self.rho_inf) * (-self.decay * (t - self.t0)).exp() + self.rho_inf
    }
}

/// `ln((1+ξ)/(1−ξ))`.
pub fn transformed_error(xi: f64) -> f64 {
    xi.ln_1p() - (-xi).ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeMode {
    /// Position envelopes start at `l0/√3`, so the componentwise bound
    /// implies Euclidean distance below `l0`.
    #[default]
    Conservative,
    /// Position envelopes start at `l0` on every axis.
    PerAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMode {
    /// `ẋ*_d = ẋ_d − g_s ε_s`.
    #[default]
    Feedforward,
    /// `ẋ*_d = −g_s ε_s`.
    Feedback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub l0: f64,
    pub mode: EnvelopeMode,
    pub rho_inf_s: f64,
    pub decay_s: f64,
    /// Initial envelope for the orientation axes.
    pub rho0_orientation: f64,
    pub rho_inf_v: f64,
    pub decay_v: f64,
    /// Velocity envelopes start at `v_scale · |e_v(t_j)| + v_offset`.
    pub v_scale: f64,
    pub v_offset: f64,
}

impl Default for EnvelopeParams {
    fn default() -> Self {
        Self {
            l0: 0.5,
            mode: EnvelopeMode::Conservative,
            rho_inf_s: 0.01,
            decay_s: 1.0,
            rho0_orientation: 0.5,
            rho_inf_v: 0.01,
            decay_v: 1.0,
            v_scale: 2.0,
            v_offset: 0.1,
        }
    }
}

impl EnvelopeParams {
    pub fn rho0_position(&self) -> f64 {
        match self.mode {
            EnvelopeMode::Conservative => self.l0 / 3f64.sqrt(),
            EnvelopeMode::PerAxis => self.l0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub g_s: Vec6,
    pub g_v: f64,
    /// Load share of each agent; they sum to one.
    pub shares: Vec<f64>,
}

impl ControllerGains {
    pub fn validate(&self) -> Result<(), ControlError> {
        let bad = |m: String| Err(ControlError::InvalidParameters(m));
        if !self.g_s.iter().all(|g| *g > 0.0 && g.is_finite()) {
            return bad(format!(
                "g_s must be positive, got {:?}",
                self.g_s.as_slice()
            ));
        }
        if !(self.g_v > 0.0 && self.g_v.is_finite()) {
            return bad(format!("g_v must be positive, got {}", self.g_v));
        }
        if self.shares.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("load shares must lie in [0, 1]".into());
        }
        let sum: f64 = self.shares.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("load shares sum to {sum}, not 1"));
        }
        Ok(())
    }
}

/// `−g_s ε(ξ_s)` per axis.
pub fn reference_velocity(xi_s: &Vec6, g_s: &Vec6) -> Result<Vec6, ControlError> {
    check_inside(xi_s, Level::Position, None)?;
    Ok(Vec6::from_fn(|k, _| -g_s[k] * transformed_error(xi_s[k])))
}

/// `−g_v P_v⁻¹ R_v ε_v`, the wrench every agent's share is taken from.
pub fn common_wrench(xi_v: &Vec6, rho_v: &Vec6, g_v: f64) -> Vec6 {
    Vec6::from_fn(|k, _| {
        let x = xi_v[k];
        -g_v * (2.0 / (1.0 - x * x)) * transformed_error(x) / rho_v[k]
    })
}

/// `u_i = c_i J_Oi⁻ᵀ w` for the common wrench `w`.
pub fn agent_control(jac: &Mat6, share: f64, common: &Vec6) -> Result<Vec6, ControlError> {
    let lu = jac.transpose().lu();
    lu.solve(common)
        .map(|y| y * share)
        .ok_or(ControlError::Kinematics(
            KinematicsError::SingularOrientation { pitch: f64::NAN },
        ))
}

fn check_inside(xi: &Vec6, level: Level, t: Option<f64>) -> Result<(), ControlError> {
    for (axis, &x) in xi.iter().enumerate() {
        if !(x.abs() < 1.0) {
            return Err(match t {
                Some(t) => ControlError::EnvelopeViolated {
                    t,
                    level,
                    axis,
                    xi: x,
                },
                None => ControlError::EnvelopeViolatedAtStart { level, axis, xi: x },
            });
        }
    }
    Ok(())
}

/// Envelopes and target of the transition currently being executed.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState {
    pub trajectory: TransitionTrajectory,
    pub rho_s: [PerformanceFunction; 6],
    pub rho_v: [PerformanceFunction; 6],
}

/// Every intermediate of one controller evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub desired: Desired,
    pub e_s: Vec6,
    pub rho_s: Vec6,
    pub xi_s: Vec6,
    pub v_ref: Vec6,
    pub e_v: Vec6,
    pub rho_v: Vec6,
    pub xi_v: Vec6,
    pub common: Vec6,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Controller {
    pub gains: ControllerGains,
    pub envelopes: EnvelopeParams,
    pub reference: ReferenceMode,
    pub grasps: Vec<GraspOffset>,
}

fn pose_error(x: &Pose, desired: &Vec6) -> Vec6 {
    let d = Pose::from_vector(desired);
    let mut e = Vec6::zeros();
    e.fixed_rows_mut::<3>(0).copy_from(&(x.p - d.p));
    e.fixed_rows_mut::<3>(3)
        .copy_from(&x.eta.wrapped_diff(d.eta));
    e
}

impl Controller {
    pub fn new(
        gains: ControllerGains,
        envelopes: EnvelopeParams,
        reference: ReferenceMode,
        grasps: Vec<GraspOffset>,
    ) -> Result<Self, ControlError> {
        gains.validate()?;
        if gains.shares.len() != grasps.len() {
            return Err(ControlError::InvalidParameters(format!(
                "{} load shares for {} agents",
                gains.shares.len(),
                grasps.len()
            )));
        }
        Ok(Self {
            gains,
            envelopes,
            reference,
            grasps,
        })
    }

    fn reference(&self, xi_s: &Vec6, desired: &Desired) -> Result<Vec6, ControlError> {
        let fb = reference_velocity(xi_s, &self.gains.g_s)?;
        Ok(match self.reference {
            ReferenceMode::Feedforward => desired.v + fb,
            ReferenceMode::Feedback => fb,
        })
    }

    /// Fresh envelopes for a transition starting at `t0`.
    pub fn init_transition(
        &self,
        x: &Pose,
        v: &Vec6,
        trajectory: TransitionTrajectory,
        t0: f64,
    ) -> Result<ControllerState, ControlError> {
        let env = &self.envelopes;
        let desired = trajectory.eval(t0);
        let e_s = pose_error(x, &desired.x);
        let mut rho_s = [PerformanceFunction::new(1.0, 0.5, 1.0, t0)?; 6];
        for (k, rho) in rho_s.iter_mut().enumerate() {
            let rho0 = if k < 3 {
                env.rho0_position()
            } else {
                env.rho0_orientation
            };
            *rho = PerformanceFunction::new(rho0, env.rho_inf_s, env.decay_s, t0)?;
        }
        let xi_s = Vec6::from_fn(|k, _| e_s[k] / rho_s[k].rho0);
        check_inside(&xi_s, Level::Position, None)?;
        let e_v = v - self.reference(&xi_s, &desired)?;
        let mut rho_v = rho_s;
        for (k, rho) in rho_v.iter_mut().enumerate() {
            let rho0 = env.v_scale * e_v[k].abs() + env.v_offset;
            *rho = PerformanceFunction::new(rho0, env.rho_inf_v, env.decay_v, t0)?;
        }
        Ok(ControllerState {
            trajectory,
            rho_s,
            rho_v,
        })
    }

    /// Per-agent wrenches, stacked, for the measured object state at `t`.
    pub fn tick(
        &self,
        state: &ControllerState,
        x: &Pose,
        v: &Vec6,
        t: f64,
    ) -> Result<(DVector<f64>, Diagnostics), ControlError> {
        let desired = state.trajectory.eval(t);
        let e_s = pose_error(x, &desired.x);
        let rho_s = Vec6::from_fn(|k, _| state.rho_s[k].value(t));
        let xi_s = e_s.component_div(&rho_s);
        check_inside(&xi_s, Level::Position, Some(t))?;
        let v_ref = self.reference(&xi_s, &desired)?;
        let e_v = v - v_ref;
        let rho_v = Vec6::from_fn(|k, _| state.rho_v[k].value(t));
        let xi_v = e_v.component_div(&rho_v);
        check_inside(&xi_v, Level::Velocity, Some(t))?;
        let common = common_wrench(&xi_v, &rho_v, self.gains.g_v);
        let jac = agent_jacobians(x, &self.grasps)?;
        let mut u = DVector::zeros(6 * jac.len());
        for (i, j) in jac.iter().enumerate() {
            let ui = agent_control(j, self.gains.shares[i], &common)?;
            u.fixed_rows_mut::<6>(6 * i).copy_from(&ui);
        }
        let diag = Diagnostics {
            desired,
            e_s,
            rho_s,
            xi_s,
            v_ref,
            e_v,
            rho_v,
            xi_v,
            common,
        };
        Ok((u, diag))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{EulerAngles, Vec3};
    use crate::partition::{Partition, PartitionConfig, RegionId};
    use approx::assert_relative_eq;

    fn controller(mode: ReferenceMode) -> (Controller, Partition) {
        let grasps = [-0.2, 0.2, 0.0]
            .iter()
            .map(|&x| GraspOffset {
                r: Vec3::new(x, 0.0, 0.0),
                alpha: EulerAngles::zero(),
            })
            .collect();
        let gains = ControllerGains {
            g_s: Vec6::repeat(0.1),
            g_v: 2.5,
            shares: vec![0.5, 0.35, 0.15],
        };
        let c = Controller::new(gains, EnvelopeParams::default(), mode, grasps).unwrap();
        let p = Partition::build(PartitionConfig {
            l_hat: 1.5,
            l0: 0.5,
            nx: 4,
            ny: 4,
            origin: Vec3::new(2.0, 2.0, 2.0),
        })
        .unwrap();
        (c, p)
    }

    #[test]
    fn performance_function_values() {
        let rho = PerformanceFunction::new(0.5, 0.01, 1.0, 2.0).unwrap();
        assert_eq!(rho.value(2.0), 0.5);
        assert_relative_eq!(rho.value(7.0), 0.49 * (-5f64).exp() + 0.01, epsilon = 1e-15);
        assert_relative_eq!(rho.value(7.0), 0.013302, epsilon = 1e-6);
        assert_relative_eq!(rho.value(42.0), 0.01, epsilon = 1e-12);
        assert!(PerformanceFunction::new(0.01, 0.01, 1.0, 0.0).is_err());
    }

    #[test]
    fn reference_velocity_values() {
        let g = Vec6::repeat(0.1);
        assert_eq!(
            reference_velocity(&Vec6::zeros(), &g).unwrap(),
            Vec6::zeros()
        );
        let v = reference_velocity(&Vec6::repeat(0.5), &g).unwrap();
        assert_relative_eq!(v[0], -0.109861, epsilon = 1e-6);
        let w = reference_velocity(&Vec6::repeat(-0.5), &g).unwrap();
        assert_eq!(v, -w);
        assert!(reference_velocity(&Vec6::repeat(1.0), &g).is_err());
    }

    #[test]
    fn agent_wrench_values() {
        let common = common_wrench(&Vec6::repeat(0.5), &Vec6::repeat(1.0), 1.0);
        let u = agent_control(&Mat6::identity(), 1.0, &common).unwrap();
        for k in 0..6 {
            assert_relative_eq!(u[k], -2.929633, epsilon = 1e-6);
        }
        let zero = common_wrench(&Vec6::zeros(), &Vec6::repeat(1.0), 1.0);
        assert_eq!(
            agent_control(&Mat6::identity(), 1.0, &zero).unwrap(),
            Vec6::zeros()
        );
    }

    #[test]
    fn start_at_centre_is_inside() {
        let (c, p) = controller(ReferenceMode::Feedforward);
        let tr = TransitionTrajectory::between(
            &p,
            RegionId(1),
            RegionId(2),
            5.0,
            0.0,
            EulerAngles::zero(),
        )
        .unwrap();
        let x = Pose::new(Vec3::new(2.0, 2.0, 2.0), EulerAngles::zero());
        let st = c.init_transition(&x, &Vec6::zeros(), tr, 0.0).unwrap();
        let (u, d) = c.tick(&st, &x, &Vec6::zeros(), 0.0).unwrap();
        assert_eq!(d.xi_s, Vec6::zeros());
        assert_eq!(u, DVector::zeros(18));
    }

    #[test]
    fn start_on_the_envelope_is_rejected() {
        let (mut c, p) = controller(ReferenceMode::Feedback);
        c.envelopes.mode = EnvelopeMode::PerAxis;
        let tr =
            TransitionTrajectory::hold(&p, RegionId(1), 5.0, 0.0, EulerAngles::zero()).unwrap();
        let x = Pose::new(Vec3::new(2.5, 2.0, 2.0), EulerAngles::zero());
        assert!(matches!(
            c.init_transition(&x, &Vec6::zeros(), tr, 0.0),
            Err(ControlError::EnvelopeViolatedAtStart {
                level: Level::Position,
                axis: 0,
                ..
            })
        ));
    }

    #[test]
    fn load_is_shared_in_proportion() {
        let (c, p) = controller(ReferenceMode::Feedforward);
        let tr = TransitionTrajectory::between(
            &p,
            RegionId(1),
            RegionId(2),
            5.0,
            0.0,
            EulerAngles::zero(),
        )
        .unwrap();
        let x = Pose::new(
            Vec3::new(2.1, 1.95, 2.05),
            EulerAngles::new(0.05, -0.02, 0.1),
        );
        let v = Vec6::new(0.1, -0.05, 0.02, 0.01, 0.0, -0.01);
        let st = c.init_transition(&x, &v, tr, 0.0).unwrap();
        let (u, d) = c.tick(&st, &x, &v, 0.3).unwrap();
        let jac = agent_jacobians(&x, &c.grasps).unwrap();
        for (i, j) in jac.iter().enumerate() {
            let back = j.transpose() * u.fixed_rows::<6>(6 * i) / c.gains.shares[i];
            assert_relative_eq!(back, d.common, max_relative = 1e-12);
        }
    }
}
