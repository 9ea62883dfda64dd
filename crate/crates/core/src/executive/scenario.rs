use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use mitl::{parse, Formula};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{
    ControlError, Controller, ControllerGains, EnvelopeMode, EnvelopeParams, ReferenceMode,
};
use crate::dynamics::{
    AgentParams, CoupledState, CoupledSystem, ObjectParams, Sinusoid, Uncertainty, GRAVITY,
};
use crate::kinematics::{EulerAngles, GraspOffset, Mat3, Mat6, Pose, Vec3, Vec6};
use crate::partition::{body_points, Partition, PartitionConfig, PartitionError, RegionId};
use crate::planner::{PlannerError, Wts};

const DEFAULT_SCENARIO: &str = include_str!("../../../../scenarios/transport.toml");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("formula: {0}")]
    Formula(#[from] mitl::SyntaxError),
    #[error("label key `{0}` is not a region index")]
    LabelKey(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Control(#[from] ControlError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub l_hat: f64,
    pub l0: f64,
    pub nx: usize,
    pub ny: usize,
    pub origin: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationOverride {
    pub from: usize,
    pub to: usize,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    pub default: f64,
    #[serde(default)]
    pub overrides: Vec<DurationOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSection {
    pub mass: f64,
    /// Principal moments of inertia in the object frame.
    pub inertia: [f64; 3],
    pub rod_length: f64,
    pub position: [f64; 3],
    #[serde(default)]
    pub orientation: [f64; 3],
    #[serde(default)]
    pub velocity: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    pub offset: [f64; 3],
    #[serde(default)]
    pub alpha: [f64; 3],
    pub share: f64,
    pub inertia: [f64; 6],
    #[serde(default)]
    pub gravity: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub enabled: bool,
    pub object: [f64; 2],
    pub agent: [f64; 2],
    pub uncertainty: [f64; 2],
    pub frequency: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub g_s: [f64; 6],
    pub g_v: f64,
    #[serde(default)]
    pub reference: ReferenceMode,
    #[serde(default)]
    pub envelope_mode: EnvelopeMode,
    pub rho_inf_s: f64,
    pub decay_s: f64,
    pub rho0_orientation: f64,
    pub rho_inf_v: f64,
    pub decay_v: f64,
    pub v_scale: f64,
    pub v_offset: f64,
}

fn default_loop_periods() -> usize {
    1
}

fn default_saturation() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub formula: String,
    pub initial_region: usize,
    pub seed: u64,
    pub dt: f64,
    #[serde(default = "default_loop_periods")]
    pub loop_periods: usize,
    #[serde(default = "default_saturation")]
    pub saturation: f64,
    #[serde(default)]
    pub eta_d: [f64; 3],
    pub partition: PartitionSection,
    #[serde(default)]
    pub labels: BTreeMap<String, Vec<String>>,
    pub timing: TimingSection,
    pub object: ObjectSection,
    pub agents: Vec<AgentSection>,
    pub disturbances: DisturbanceSection,
    pub control: ControlSection,
}

impl Scenario {
    /// The built-in three-agent scenario on the 4 × 4 grid.
    pub fn transport() -> Self {
        Self::from_toml(DEFAULT_SCENARIO).expect("built-in scenario parses")
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios always serialize")
    }
}

fn split(pair: [f64; 2]) -> Vec6 {
    Vec6::new(pair[0], pair[0], pair[0], pair[1], pair[1], pair[1])
}

/// Draws frequencies and phases for the sinusoidal truth-model terms.
struct Draws {
    rng: ChaCha8Rng,
    freq: [f64; 2],
}

impl Draws {
    fn vec(&mut self, lo: f64, hi: f64) -> Vec6 {
        Vec6::from_fn(|_, _| {
            if hi > lo {
                self.rng.random_range(lo..hi)
            } else {
                lo
            }
        })
    }

    fn sinusoid(&mut self, amplitude: Vec6) -> Sinusoid {
        let frequency = self.vec(self.freq[0], self.freq[1]);
        let phase = self.vec(0.0, 2.0 * PI);
        Sinusoid {
            amplitude,
            frequency,
            phase,
        }
    }

    fn uncertainty(&mut self, amplitude: Vec6) -> Uncertainty {
        Uncertainty {
            amplitude,
            phase: self.vec(0.0, 2.0 * PI),
        }
    }
}

/// Everything needed to plan, execute and verify, built from a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub scenario: Scenario,
    pub formula: Formula,
    pub wts: Wts,
    pub system: CoupledSystem,
    pub controller: Controller,
    pub initial_state: CoupledState,
    pub initial_region: RegionId,
    pub eta_d: EulerAngles,
}

impl Setup {
    pub fn new(scenario: Scenario) -> Result<Self, ScenarioError> {
        let sc = &scenario;
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(sc.dt > 0.0 && sc.dt <= 1e-2) {
            return invalid(format!("dt must lie in (0, 0.01], got {}", sc.dt));
        }
        if sc.agents.is_empty() {
            return invalid("at least one agent is required".into());
        }
        if !(sc.object.rod_length >= 0.0) {
            return invalid("rod length must be non-negative".into());
        }
        let formula = parse(&sc.formula)?;

        let p = &sc.partition;
        let mut labels = Vec::new();
        for (key, props) in &sc.labels {
            let id: usize = key
                .parse()
                .map_err(|_| ScenarioError::LabelKey(key.clone()))?;
            labels.push((RegionId(id), props.clone()));
        }
        let partition = Partition::build(PartitionConfig {
            l_hat: p.l_hat,
            l0: p.l0,
            nx: p.nx,
            ny: p.ny,
            origin: Vec3::from(p.origin),
        })?
        .with_labels(labels)?;
        let overrides = sc
            .timing
            .overrides
            .iter()
            .map(|o| ((RegionId(o.from), RegionId(o.to)), o.duration))
            .collect();
        let wts = Wts::build(partition, sc.timing.default, overrides)?;

        let d = &sc.disturbances;
        let on = if d.enabled { 1.0 } else { 0.0 };
        let mut draws = Draws {
            rng: ChaCha8Rng::seed_from_u64(sc.seed),
            freq: d.frequency,
        };
        let object = ObjectParams {
            mass: sc.object.mass,
            inertia: Mat3::from_diagonal(&Vec3::from(sc.object.inertia)),
            g0: GRAVITY,
            disturbance: draws.sinusoid(split(d.object) * on),
        };
        if !(object.mass > 0.0) || object.inertia.diagonal().iter().any(|i| !(*i > 0.0)) {
            return invalid("object mass and inertia must be positive".into());
        }
        let mut agents = Vec::with_capacity(sc.agents.len());
        for a in &sc.agents {
            if a.inertia.iter().any(|m| !(*m > 0.0)) {
                return invalid("agent inertia must be positive".into());
            }
            let grasp = GraspOffset {
                r: Vec3::from(a.offset),
                alpha: EulerAngles::from_vector(&Vec3::from(a.alpha)),
            };
            let mut params = AgentParams::new(Mat6::from_diagonal(&Vec6::from(a.inertia)), grasp);
            params.gravity = Vec6::from(a.gravity);
            params.disturbance = draws.sinusoid(split(d.agent) * on);
            params.uncertainty = draws.uncertainty(split(d.uncertainty) * on);
            agents.push(params);
        }
        let system = CoupledSystem::new(object, agents);

        let c = &sc.control;
        let envelopes = EnvelopeParams {
            l0: p.l0,
            mode: c.envelope_mode,
            rho_inf_s: c.rho_inf_s,
            decay_s: c.decay_s,
            rho0_orientation: c.rho0_orientation,
            rho_inf_v: c.rho_inf_v,
            decay_v: c.decay_v,
            v_scale: c.v_scale,
            v_offset: c.v_offset,
        };
        let gains = ControllerGains {
            g_s: Vec6::from(c.g_s),
            g_v: c.g_v,
            shares: sc.agents.iter().map(|a| a.share).collect(),
        };
        let controller = Controller::new(gains, envelopes, c.reference, system.grasps())?;

        let initial_region = RegionId(sc.initial_region);
        wts.partition().region(initial_region)?;
        let x0 = Pose::new(
            Vec3::from(sc.object.position),
            EulerAngles::from_vector(&Vec3::from(sc.object.orientation)),
        );
        let initial_state = CoupledState {
            x: x0,
            v: Vec6::from(sc.object.velocity),
            t: 0.0,
        };
        let setup = Self {
            formula,
            wts,
            system,
            controller,
            initial_state,
            initial_region,
            eta_d: EulerAngles::from_vector(&Vec3::from(sc.eta_d)),
            scenario,
        };
        if !setup.in_region(&setup.initial_state.x, initial_region) {
            return invalid(format!(
                "initial object pose is not inside {initial_region} (every body point in the cell and the centre within l0 of the cell centre)"
            ));
        }
        Ok(setup)
    }

    pub fn partition(&self) -> &Partition {
        self.wts.partition()
    }

    pub fn body_points(&self, x: &Pose) -> Vec<Vec3> {
        let grasps: Vec<Vec3> = self.controller.grasps.iter().map(|g| g.r).collect();
        body_points(x, self.scenario.object.rod_length / 2.0, &grasps)
    }

    pub fn in_region(&self, x: &Pose, r: RegionId) -> bool {
        self.partition()
            .system_in_region(&x.p, &self.body_points(x), r)
    }
}
