//! Parameter grids for `plan gain`, e.g. `f=0:1:0.1;agents=2,3,5;disp=0.7;p=0.7;d=2;mu=1`.
//!
//! Each `key=value` entry is either a comma list or an inclusive
//! `start:stop:step` range. Missing keys take the defaults below.

use std::fmt;

use factplan::analysis::{self, GainInputs};

#[derive(Debug, Clone, PartialEq)]
pub struct GainGrid {
    pub f: Vec<f64>,
    pub agents: Vec<usize>,
    pub disp: Vec<f64>,
    pub p: Vec<f64>,
    pub d: Vec<usize>,
    pub mu: Vec<f64>,
}

impl Default for GainGrid {
    fn default() -> Self {
        GainGrid {
            f: range(0.0, 1.0, 0.1).unwrap(),
            agents: vec![2, 3, 5],
            disp: vec![0.7],
            p: vec![0.7],
            d: vec![2],
            mu: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(msg: impl Into<String>) -> GridError {
    GridError(msg.into())
}

/// Inclusive range; the end point is kept when it lies within rounding of a step.
fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, GridError> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad(format!("bad range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(bad("range has more than a million points"));
    }
    // integer stepping avoids drift from repeated addition
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

fn reals(key: &str, text: &str) -> Result<Vec<f64>, GridError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("{key}: {s:?} is not a number")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => range(num(a)?, num(b)?, num(c)?),
        [_] => text.split(',').map(num).collect(),
        _ => Err(bad(format!("{key}: expected a list or start:stop:step"))),
    }
}

fn counts(key: &str, text: &str) -> Result<Vec<usize>, GridError> {
    reals(key, text)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(format!("{key}: {v} is not a positive integer")))
            }
        })
        .collect()
}

impl std::str::FromStr for GainGrid {
    type Err = GridError;

    fn from_str(spec: &str) -> Result<Self, GridError> {
        let mut grid = GainGrid::default();
        for entry in spec.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| bad(format!("entry {entry:?} lacks '='")))?;
            let key = key.trim();
            match key {
                "f" => grid.f = reals(key, value)?,
                "agents" => grid.agents = counts(key, value)?,
                "disp" => grid.disp = reals(key, value)?,
                "p" => grid.p = reals(key, value)?,
                "d" => grid.d = counts(key, value)?,
                "mu" => grid.mu = reals(key, value)?,
                _ => {
                    return Err(bad(format!(
                        "unknown key {key:?}; expected f, agents, disp, p, d or mu"
                    )))
                }
            }
        }
        Ok(grid)
    }
}

impl GainGrid {
    /// Every combination, `f` varying fastest.
    pub fn points(&self) -> Vec<GainInputs> {
        let mut out = Vec::new();
        for &mu in &self.mu {
            for &d_i in &self.d {
                for &p_bar in &self.p {
                    for &disp_bar in &self.disp {
                        for &n_agents in &self.agents {
                            for &f in &self.f {
                                out.push(GainInputs {
                                    mu,
                                    disp_bar,
                                    p_bar,
                                    d_i,
                                    n_agents,
                                    f,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub const HEADER: [&str; 8] = [
    "f",
    "agents",
    "disp_bar",
    "p_bar",
    "n_joint",
    "n_fact",
    "gain_exact",
    "gain_asymptotic",
];

/// One CSV row per grid point.
pub fn rows(grid: &GainGrid) -> factplan::Result<Vec<[String; 8]>> {
    grid.points()
        .iter()
        .map(|g| {
            let r = analysis::factorization_gain(g)?;
            Ok([
                g.f.to_string(),
                g.n_agents.to_string(),
                g.disp_bar.to_string(),
                g.p_bar.to_string(),
                r.n_joint.to_string(),
                r.n_fact.to_string(),
                r.gain_exact.to_string(),
                r.gain_asymptotic.to_string(),
            ])
        })
        .collect()
}
