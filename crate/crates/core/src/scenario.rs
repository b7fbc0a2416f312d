//! Scenario files: workspace, agents with starts and goals, and the
//! factorization heuristic to use.
//!
//! Files are JSON. Coordinates are given in the scenario's own units inside
//! square `bounds` and are normalized to the unit square at load:
//!
//! ```json
//! {
//!   "name": "example",
//!   "bounds": { "min": [0, 0], "max": [10, 10] },
//!   "agent_radius": 0.5,
//!   "obstacles": [ { "min": [4, 4], "max": [6, 6] } ],
//!   "agents": [
//!     { "name": "P1", "start": [1, 5], "goal": { "min": [8.5, 4.5], "max": [9.5, 5.5] } }
//!   ],
//!   "heuristic": { "kind": "cone", "half_angle": 0.3927 }
//! }
//! ```
//!
//! `heuristic` is optional (default: cone with half-angle pi/8); `kind` is
//! `cone` or `never`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::{AgentSet, BlockConfig};
use crate::environment::{Environment, Rect, Workspace, DIM};
use crate::factorization::{
    ConeHeuristic, FactorizationHeuristic, NeverFactorize, DEFAULT_HALF_ANGLE,
};

/// Largest agent count a scenario may declare.
pub const MAX_AGENTS: usize = 6;

const CROSS4: &str = include_str!("../assets/cross4.json");
const TWO_LANES: &str = include_str!("../assets/two_lanes.json");

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Validation(String),
}

impl ScenarioError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Io { .. } => "io",
            ScenarioError::Parse(_) => "parse",
            ScenarioError::Validation(_) => "validation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HeuristicSpec {
    Cone {
        #[serde(default = "default_half_angle")]
        half_angle: f64,
    },
    Never,
}

fn default_half_angle() -> f64 {
    DEFAULT_HALF_ANGLE
}

impl Default for HeuristicSpec {
    fn default() -> Self {
        HeuristicSpec::Cone {
            half_angle: DEFAULT_HALF_ANGLE,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    #[serde(default)]
    name: Option<String>,
    start: [f64; 2],
    goal: Rect,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    bounds: Rect,
    agent_radius: f64,
    #[serde(default)]
    obstacles: Vec<Rect>,
    agents: Vec<RawAgent>,
    #[serde(default)]
    heuristic: HeuristicSpec,
}

/// A validated scenario in unit-square coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub agent_names: Vec<String>,
    pub starts: Vec<[f64; 2]>,
    pub goals: Vec<Rect>,
    pub obstacles: Vec<Rect>,
    pub agent_radius: f64,
    pub heuristic: HeuristicSpec,
    #[serde(skip)]
    env: Environment,
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(msg.into())
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let raw: RawScenario =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// The bundled four-corridor intersection.
    pub fn builtin_cross4() -> Self {
        Self::from_json(CROSS4).expect("bundled scenario is valid")
    }

    /// Two agents in separate horizontal lanes whose goal cones never meet.
    pub fn builtin_two_lanes() -> Self {
        Self::from_json(TWO_LANES).expect("bundled scenario is valid")
    }

    fn from_raw(raw: RawScenario) -> Result<Self, ScenarioError> {
        let b = raw.bounds;
        let (w, h) = (b.max[0] - b.min[0], b.max[1] - b.min[1]);
        if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
            return Err(invalid("bounds must have positive size"));
        }
        if (w - h).abs() > 1e-9 * w {
            return Err(invalid(format!("bounds must be square, got {w} x {h}")));
        }
        let norm = |p: [f64; 2]| [(p[0] - b.min[0]) / w, (p[1] - b.min[1]) / w];
        let norm_rect = |r: Rect| Rect::new(norm(r.min), norm(r.max));
        let inside =
            |r: &Rect| r.min[0] >= 0.0 && r.min[1] >= 0.0 && r.max[0] <= 1.0 && r.max[1] <= 1.0;

        let radius = raw.agent_radius / w;
        if !(radius > 0.0 && radius < 0.5) {
            return Err(invalid(format!(
                "agent_radius {} out of range",
                raw.agent_radius
            )));
        }
        let n = raw.agents.len();
        if n == 0 || n > MAX_AGENTS {
            return Err(invalid(format!("{n} agents; expected 1 to {MAX_AGENTS}")));
        }
        let mut obstacles = Vec::with_capacity(raw.obstacles.len());
        for (i, o) in raw.obstacles.iter().enumerate() {
            let o = norm_rect(*o);
            if !(o.min[0] <= o.max[0] && o.min[1] <= o.max[1]) || !inside(&o) {
                return Err(invalid(format!(
                    "obstacle {i} is empty or outside the bounds"
                )));
            }
            obstacles.push(o);
        }
        let mut names = Vec::with_capacity(n);
        let mut starts = Vec::with_capacity(n);
        let mut goals = Vec::with_capacity(n);
        for (i, a) in raw.agents.iter().enumerate() {
            names.push(a.name.clone().unwrap_or_else(|| format!("P{}", i + 1)));
            starts.push(norm(a.start));
            goals.push(norm_rect(a.goal));
        }
        let env = Environment::new(
            Workspace {
                obstacles: obstacles.clone(),
                agent_radius: radius,
            },
            goals.clone(),
        );
        for (i, s) in starts.iter().enumerate() {
            if !env.point_free(*s) {
                return Err(invalid(format!("start of {} is in collision", names[i])));
            }
            for j in 0..i {
                let d = (s[0] - starts[j][0]).hypot(s[1] - starts[j][1]);
                if d <= 2.0 * radius {
                    return Err(invalid(format!(
                        "starts of {} and {} overlap",
                        names[j], names[i]
                    )));
                }
            }
        }
        for (i, g) in goals.iter().enumerate() {
            if g.area() <= 0.0 || !inside(g) {
                return Err(invalid(format!(
                    "goal of {} is empty or outside the bounds",
                    names[i]
                )));
            }
            if !goal_has_free_point(&env, g) {
                return Err(invalid(format!("goal of {} has no free point", names[i])));
            }
        }
        if let HeuristicSpec::Cone { half_angle } = raw.heuristic {
            if !(half_angle > 0.0 && half_angle <= std::f64::consts::FRAC_PI_2) {
                return Err(invalid(format!(
                    "cone half_angle {half_angle} outside (0, pi/2]"
                )));
            }
        }
        Ok(Scenario {
            name: raw.name,
            agent_names: names,
            starts,
            goals,
            obstacles,
            agent_radius: radius,
            heuristic: raw.heuristic,
            env,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.starts.len()
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    /// Joint start configuration over all agents.
    pub fn start(&self) -> BlockConfig {
        let coords = self.starts.iter().flatten().copied().collect();
        BlockConfig::new(AgentSet::first_n(self.n_agents()), DIM, coords).expect("start dimensions")
    }

    /// The first `k` agents, in declaration order.
    pub fn with_agents(&self, k: usize) -> Result<Self, ScenarioError> {
        if k == 0 || k > self.n_agents() {
            return Err(invalid(format!(
                "cannot take {k} of {} agents",
                self.n_agents()
            )));
        }
        let mut s = self.clone();
        s.agent_names.truncate(k);
        s.starts.truncate(k);
        s.goals.truncate(k);
        s.env.goals.truncate(k);
        Ok(s)
    }

    pub fn with_heuristic(&self, spec: HeuristicSpec) -> Self {
        Scenario {
            heuristic: spec,
            ..self.clone()
        }
    }

    pub fn heuristic(&self) -> crate::Result<Box<dyn FactorizationHeuristic>> {
        Ok(match self.heuristic {
            HeuristicSpec::Cone { half_angle } => {
                Box::new(ConeHeuristic::new(&self.env, half_angle)?)
            }
            HeuristicSpec::Never => Box::new(NeverFactorize),
        })
    }
}

fn goal_has_free_point(env: &Environment, g: &Rect) -> bool {
    const STEPS: usize = 20;
    (0..=STEPS).any(|i| {
        (0..=STEPS).any(|j| {
            let p = [
                g.min[0] + (g.max[0] - g.min[0]) * i as f64 / STEPS as f64,
                g.min[1] + (g.max[1] - g.min[1]) * j as f64 / STEPS as f64,
            ];
            env.point_free(p)
        })
    })
}
