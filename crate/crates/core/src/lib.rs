//! Cooperative transportation of a rigidly grasped object by a team of
//! agents, driven through a partitioned workspace so that the resulting
//! timed run satisfies a Metric Interval Temporal Logic mission.
//!
//! The pieces, bottom up:
//!
//! * [`kinematics`]: poses, ZYX Euler angles and the object-to-agent maps.
//! * [`dynamics`]: the coupled object/agent model and its RK4 integrator.
//! * [`partition`]: the grid of regions and the membership tests.
//! * [`trajectory`]: smooth centre-to-centre reference motions.
//! * [`control`]: the decentralized prescribed performance controller.
//! * [`planner`]: the weighted transition system and the run search.
//! * [`executive`]: scenario files, plan execution, traces and verification.

pub mod control;
pub mod dynamics;
pub mod executive;
pub mod kinematics;
pub mod partition;
pub mod planner;
pub mod trajectory;
