//! Closed-form sample complexity of uniform sampling, the factorization gain
//! for PRM*, an l-infinity dispersion estimator and the epsilon-composition
//! checks for products and concatenations of paths.
//!
//! Sample counts are reals; callers ceil them where an integer is needed.

// `!(x > 0.0)` style guards are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack allowed when comparing composed and per-part epsilons.
pub const EPSILON_SLACK: f64 = 1e-12;

fn check_probability(p_bar: f64) -> Result<()> {
    if p_bar >= 1.0 {
        return Err(Error::Domain(format!(
            "probability level {p_bar} makes the bound diverge"
        )));
    }
    if !(p_bar >= 0.0) {
        return Err(Error::Domain(format!("probability level {p_bar} below 0")));
    }
    Ok(())
}

fn check_dispersion(disp_bar: f64) -> Result<()> {
    if !(disp_bar > 0.0 && disp_bar <= 1.0) {
        return Err(Error::Domain(format!(
            "dispersion {disp_bar} outside (0,1]"
        )));
    }
    Ok(())
}

/// Uniform samples sufficient for l-infinity dispersion at most `disp_bar`
/// with probability `p_bar`: `m * ln(m / (1 - p_bar))` with `m = mu / disp_bar^d`.
pub fn sufficient_samples(mu: f64, d: f64, disp_bar: f64, p_bar: f64) -> Result<f64> {
    check_probability(p_bar)?;
    check_dispersion(disp_bar)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("measure {mu} must be positive")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!("dimension {d} must be positive")));
    }
    let m = mu / disp_bar.powf(d);
    Ok(m * (m / (1.0 - p_bar)).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainInputs {
    /// Measure of the joint free space.
    pub mu: f64,
    pub disp_bar: f64,
    pub p_bar: f64,
    /// Per-agent dimension.
    pub d_i: usize,
    pub n_agents: usize,
    /// Fraction of the free space that is fully factorizable.
    pub f: f64,
}

impl GainInputs {
    fn validate(&self) -> Result<()> {
        check_probability(self.p_bar)?;
        check_dispersion(self.disp_bar)?;
        if !(self.mu > 0.0) || self.d_i == 0 || self.n_agents == 0 {
            return Err(Error::Domain(
                "mu, d_i and n_agents must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.f) {
            return Err(Error::Domain(format!(
                "factorization factor {} outside [0,1]",
                self.f
            )));
        }
        Ok(())
    }

    fn joint_dim(&self) -> f64 {
        (self.d_i * self.n_agents) as f64
    }
}

/// Samples PRM* needs in the joint space.
pub fn prm_star_joint_samples(g: &GainInputs) -> Result<f64> {
    g.validate()?;
    sufficient_samples(g.mu, g.joint_dim(), g.disp_bar, g.p_bar)
}

/// `x * ln(x / denom)` with the convention `0 * ln 0 = 0`.
fn x_log(x: f64, denom: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / denom).ln()
    }
}

/// Samples the factorized PRM* needs: the non-factorizable part of the joint
/// space at full dimension plus one per-agent problem over measure
/// `(f mu)^(1/|A|)` at the strengthened probability `p_bar^(1/|A|)`.
pub fn fact_prm_star_samples(g: &GainInputs) -> Result<f64> {
    g.validate()?;
    let cell = g.disp_bar.powf(g.joint_dim());
    let joint = x_log((1.0 - g.f) * g.mu / cell, 1.0 - g.p_bar);
    let k = g.n_agents as f64;
    let cell_i = g.disp_bar.powf(g.d_i as f64);
    let p_i = g.p_bar.powf(1.0 / k);
    let single = x_log((g.f * g.mu).powf(1.0 / k) / cell_i, 1.0 - p_i);
    Ok(joint + single)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainReport {
    pub n_joint: f64,
    pub n_fact: f64,
    /// `1 - n_fact / n_joint`.
    pub gain_exact: f64,
    /// Leading-order form, without the `O(disp_bar^(d_i (|A|-1)))` remainder.
    pub gain_asymptotic: f64,
    /// Inputs fall outside the regime where the bounds are meaningful: a log
    /// argument at or below 1, or more factorized than joint samples.
    pub flagged: bool,
}

pub fn factorization_gain(g: &GainInputs) -> Result<GainReport> {
    let n_joint = prm_star_joint_samples(g)?;
    let n_fact = fact_prm_star_samples(g)?;
    let log_joint = (g.mu / (g.disp_bar.powf(g.joint_dim()) * (1.0 - g.p_bar))).ln();
    let tail = if g.f == 1.0 {
        0.0
    } else {
        (1.0 - g.f) * (1.0 - g.f).ln() / log_joint
    };
    let k = g.n_agents as f64;
    let single_arg = (g.f * g.mu).powf(1.0 / k)
        / (g.disp_bar.powf(g.d_i as f64) * (1.0 - g.p_bar.powf(1.0 / k)));
    let joint_arg = (1.0 - g.f) * g.mu / (g.disp_bar.powf(g.joint_dim()) * (1.0 - g.p_bar));
    let flagged =
        n_fact > n_joint || (g.f > 0.0 && single_arg <= 1.0) || (g.f < 1.0 && joint_arg <= 1.0);
    Ok(GainReport {
        n_joint,
        n_fact,
        gain_exact: 1.0 - n_fact / n_joint,
        gain_asymptotic: g.f - tail,
        flagged,
    })
}

/// Estimate the l-infinity dispersion of `points` (flat, `dim` coordinates
/// each, inside `[0,1]^dim`) as the largest distance from a node of the
/// regular grid `{0, 1/k, ..., 1}^dim` to its nearest point. Converges to
/// the true dispersion from below as `resolution` grows.
pub fn linf_dispersion(points: &[f64], dim: usize, resolution: usize) -> Result<f64> {
    if dim == 0 || dim > 3 {
        return Err(Error::Domain(format!(
            "dispersion estimator supports 1 to 3 dimensions, got {dim}"
        )));
    }
    if points.is_empty() || !points.len().is_multiple_of(dim) {
        return Err(Error::Domain("empty or ragged point set".into()));
    }
    if resolution == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    let per_axis = resolution + 1;
    let total = per_axis.pow(dim as u32);
    let mut q = vec![0.0; dim];
    let mut worst: f64 = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        for c in q.iter_mut() {
            *c = (rest % per_axis) as f64 / resolution as f64;
            rest /= per_axis;
        }
        let nearest = points
            .chunks(dim)
            .map(|p| {
                p.iter()
                    .zip(&q)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonReport {
    /// Relative suboptimality of the summed cost.
    pub epsilon_joint: f64,
    /// Largest relative suboptimality of a single part.
    pub epsilon_max: f64,
}

impl EpsilonReport {
    /// The composed epsilon does not exceed the worst part (up to rounding).
    pub fn holds(&self) -> bool {
        self.epsilon_joint <= self.epsilon_max + EPSILON_SLACK * self.epsilon_max.abs().max(1.0)
    }
}

/// Relative suboptimality of a product of per-agent solutions against the
/// worst per-agent suboptimality.
pub fn epsilon_composition_check(costs: &[f64], optimal_costs: &[f64]) -> Result<EpsilonReport> {
    if costs.is_empty() || costs.len() != optimal_costs.len() {
        return Err(Error::Domain(
            "cost vectors must be non-empty and of equal length".into(),
        ));
    }
    if let Some(c) = optimal_costs.iter().find(|&&c| !(c > 0.0)) {
        return Err(Error::Domain(format!("optimal cost {c} must be positive")));
    }
    let total: f64 = costs.iter().sum();
    let total_opt: f64 = optimal_costs.iter().sum();
    let epsilon_max = costs
        .iter()
        .zip(optimal_costs)
        .map(|(c, o)| (c - o) / o)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(EpsilonReport {
        epsilon_joint: (total - total_opt) / total_opt,
        epsilon_max,
    })
}

/// The same check for a path made of consecutive segments: segment costs
/// against the optimal cost of each segment.
pub fn epsilon_concatenation_check(
    segment_costs: &[f64],
    optimal_segment_costs: &[f64],
) -> Result<EpsilonReport> {
    epsilon_composition_check(segment_costs, optimal_segment_costs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(f: f64) -> GainInputs {
        GainInputs {
            mu: 1.0,
            disp_bar: 0.5,
            p_bar: 0.81,
            d_i: 2,
            n_agents: 2,
            f,
        }
    }

    #[test]
    fn sufficient_samples_examples() {
        let one = sufficient_samples(1.0, 1.0, 1.0, 1.0 - (-1f64).exp()).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        // 16 cells need a four-dimensional space at dispersion 0.5
        let v = sufficient_samples(1.0, 4.0, 0.5, 0.9).unwrap();
        assert!((v - 16.0 * (160f64).ln()).abs() < 1e-9);
        assert!((v - 81.2).abs() < 0.05);
        let v = sufficient_samples(1.0, 2.0, 0.5, 0.9).unwrap();
        assert!((v - 4.0 * (40f64).ln()).abs() < 1e-9);
        assert!(sufficient_samples(1.0, 2.0, 0.5, 1.0).is_err());
        assert!(sufficient_samples(1.0, 2.0, 0.0, 0.5).is_err());
        assert!(sufficient_samples(0.0, 2.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn sufficient_samples_monotonicity() {
        for d in [1.0, 2.0, 4.0] {
            for i in 1..20 {
                let p = i as f64 / 20.0;
                for j in 1..19 {
                    let (a, b) = (j as f64 / 20.0, (j + 1) as f64 / 20.0);
                    let (na, nb) = (
                        sufficient_samples(1.0, d, a, p).unwrap(),
                        sufficient_samples(1.0, d, b, p).unwrap(),
                    );
                    assert!(nb < na, "not decreasing in dispersion");
                    let q = (i + 1) as f64 / 21.0;
                    if q > p {
                        assert!(sufficient_samples(1.0, d, a, q).unwrap() > na);
                    }
                }
            }
        }
    }

    #[test]
    fn joint_samples_examples() {
        let g = inputs(0.0);
        assert_eq!(
            prm_star_joint_samples(&g).unwrap(),
            sufficient_samples(1.0, 4.0, 0.5, 0.81).unwrap()
        );
        let v = prm_star_joint_samples(&g).unwrap();
        assert!((v - 16.0 * (16.0f64 / 0.19).ln()).abs() < 1e-9);
        assert!((v - 70.9).abs() < 0.05);
        let counts: Vec<f64> = (1..=5)
            .map(|k| prm_star_joint_samples(&GainInputs { n_agents: k, ..g }).unwrap())
            .collect();
        assert!(counts.windows(2).all(|w| w[1] / w[0] > 4.0));
    }

    #[test]
    fn factorized_samples_examples() {
        assert_eq!(
            fact_prm_star_samples(&inputs(0.0)).unwrap(),
            prm_star_joint_samples(&inputs(0.0)).unwrap()
        );
        let v = fact_prm_star_samples(&inputs(1.0)).unwrap();
        let oracle = 4.0 * (4.0f64 / (1.0 - 0.81f64.sqrt())).ln();
        assert!((v - oracle).abs() < 1e-9);
        assert!((v - 14.76).abs() < 0.01);
        // continuity at both ends
        let near0 = fact_prm_star_samples(&inputs(1e-12)).unwrap();
        let near1 = fact_prm_star_samples(&inputs(1.0 - 1e-12)).unwrap();
        assert!((near0 - fact_prm_star_samples(&inputs(0.0)).unwrap()).abs() < 1e-3);
        assert!((near1 - v).abs() < 1e-3);
        assert!(fact_prm_star_samples(&inputs(1.5)).is_err());
    }

    #[test]
    fn gain_examples() {
        assert_eq!(factorization_gain(&inputs(0.0)).unwrap().gain_exact, 0.0);
        let r = factorization_gain(&inputs(1.0)).unwrap();
        let oracle = 1.0 - (4.0 * 40f64.ln()) / (16.0 * (16.0f64 / 0.19).ln());
        assert!((r.gain_exact - oracle).abs() < 1e-12);
        assert!((r.gain_exact - 0.792).abs() < 0.001);
        assert_eq!(r.gain_asymptotic, 1.0);
        for k in 1..10 {
            let f = k as f64 / 10.0;
            let g = GainInputs {
                disp_bar: 1e-6,
                ..inputs(f)
            };
            assert!((factorization_gain(&g).unwrap().gain_exact - f).abs() < 0.05);
        }
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(linf_dispersion(&[0.5, 0.5], 2, 10).unwrap(), 0.5);
        // 4x4 lattice at cell centers, spacing 0.25
        let pts: Vec<f64> = (0..4)
            .flat_map(|i| {
                (0..4).flat_map(move |j| [0.125 + 0.25 * i as f64, 0.125 + 0.25 * j as f64])
            })
            .collect();
        assert!((linf_dispersion(&pts, 2, 40).unwrap() - 0.125).abs() < 1e-12);
        assert!(linf_dispersion(&[], 2, 10).is_err());
        assert!(linf_dispersion(&[0.5; 4], 4, 10).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let r = epsilon_composition_check(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!((r.epsilon_joint, r.epsilon_max), (0.0, 0.0));
        assert!(r.holds());
        let r = epsilon_composition_check(&[1.1, 1.3], &[1.0, 1.0]).unwrap();
        assert!((r.epsilon_joint - 0.2).abs() < 1e-12);
        assert!((r.epsilon_max - 0.3).abs() < 1e-12);
        assert!(r.holds());
        assert!(epsilon_composition_check(&[1.0], &[0.0]).is_err());
        assert!(epsilon_composition_check(&[1.0, 2.0], &[1.0]).is_err());
    }
}
