//! Throughput: what a per-second resource pool means per task instance, the
//! distortion frontier as the arrival rate grows, and how replication eats
//! into the sustainable rate.

use serde::{Deserialize, Serialize};

use crate::error::{LimitsError, Result};
use crate::supply_converse::nonneg;
use crate::task_demand::{
    conditional_variance, scalar_demand, scalar_distortion_at_supply, ScalarGaussianSource,
};

/// Per-second resource pool: `channel_uses_per_sec` (B) and
/// `primitives_per_sec` (G).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerSecondBudget {
    pub channel_uses_per_sec: f64,
    pub primitives_per_sec: f64,
}

impl PerSecondBudget {
    pub fn new(channel_uses_per_sec: f64, primitives_per_sec: f64) -> Result<Self> {
        let ps = PerSecondBudget { channel_uses_per_sec, primitives_per_sec };
        ps.validate()?;
        Ok(ps)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("channel_uses_per_sec", self.channel_uses_per_sec),
            ("primitives_per_sec", self.primitives_per_sec),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(LimitsError::Domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Replication throughput bounds. `lambda_max` is the min of the two sides;
/// both are reported, `binding` names the smaller one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaThroughput {
    pub lambda_max: f64,
    pub channel_bound: f64,
    pub compute_bound: f64,
    pub binding: String,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(LimitsError::Domain(format!(
            "arrival rate lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(())
}

/// Per-instance budgets (n, m) = (B/lambda, G/lambda).
pub fn per_instance_budgets(ps: &PerSecondBudget, lambda: f64) -> Result<(f64, f64)> {
    ps.validate()?;
    check_lambda(lambda)?;
    Ok((ps.channel_uses_per_sec / lambda, ps.primitives_per_sec / lambda))
}

/// Distortion floor at arrival rate lambda: the per-sample supply is
/// min(B c_ch, G c_gate) / lambda, pushed through the scalar Gaussian
/// distortion formula. Increasing in lambda, from the conditional-variance
/// floor up to the prior variance.
pub fn distortion_floor_vs_lambda(
    src: &ScalarGaussianSource,
    ps: &PerSecondBudget,
    c_ch: f64,
    c_gate: f64,
    lambda: f64,
) -> Result<f64> {
    src.validate()?;
    ps.validate()?;
    nonneg("c_ch", c_ch)?;
    nonneg("c_gate", c_gate)?;
    check_lambda(lambda)?;
    let per_sec = (ps.channel_uses_per_sec * c_ch).min(ps.primitives_per_sec * c_gate);
    scalar_distortion_at_supply(src, per_sec / lambda)
}

/// Largest arrival rate that still meets `target_d`:
/// 2 min(B c_ch, [1 or 1/2] G c_gate) / log2((var_x - floor)/(D - floor)).
/// The `hard_separation` flag halves the compute side, the interface tax in
/// per-second form.
pub fn lambda_max_estimation(
    src: &ScalarGaussianSource,
    target_d: f64,
    ps: &PerSecondBudget,
    c_ch: f64,
    c_gate: f64,
    hard_separation: bool,
) -> Result<f64> {
    src.validate()?;
    ps.validate()?;
    nonneg("c_ch", c_ch)?;
    nonneg("c_gate", c_gate)?;
    let floor = conditional_variance(src);
    if !(target_d > floor) {
        return Err(LimitsError::Domain(format!(
            "target distortion {target_d} does not exceed the conditional-variance floor {floor}"
        )));
    }
    if !(target_d < src.var_x) {
        return Err(LimitsError::Domain(format!(
            "target distortion {target_d} is already met at zero rate: it reaches the prior variance {}",
            src.var_x
        )));
    }
    let demand = scalar_demand(src, target_d)?;
    let compute_scale = if hard_separation { 0.5 } else { 1.0 };
    let per_sec =
        (ps.channel_uses_per_sec * c_ch).min(compute_scale * ps.primitives_per_sec * c_gate);
    Ok(per_sec / demand)
}

/// Throughput with r-fold replication: each extra replica consumes
/// (r-1) L_if primitives per instance before any useful work, so
/// lambda <= G / ((r-1) L_if + demand/c_gate) on the compute side, against
/// the plain B c_ch / demand on the channel side. Unconstrained sides are
/// reported as +inf.
pub fn lambda_max_with_replicas(
    demand_bits: f64,
    replicas: u32,
    iface_bits: f64,
    ps: &PerSecondBudget,
    c_gate: f64,
    c_ch: f64,
) -> Result<ReplicaThroughput> {
    nonneg("demand_bits", demand_bits)?;
    if replicas == 0 {
        return Err(LimitsError::Domain("replica count must be at least 1".into()));
    }
    nonneg("iface_bits", iface_bits)?;
    ps.validate()?;
    nonneg("c_gate", c_gate)?;
    nonneg("c_ch", c_ch)?;

    let channel_bound = if demand_bits == 0.0 {
        f64::INFINITY
    } else {
        ps.channel_uses_per_sec * c_ch / demand_bits
    };
    let gate_term = if demand_bits == 0.0 { 0.0 } else { demand_bits / c_gate };
    let overhead = (replicas - 1) as f64 * iface_bits;
    let denom = overhead + gate_term;
    let compute_bound =
        if denom == 0.0 { f64::INFINITY } else { ps.primitives_per_sec / denom };

    let lambda_max = channel_bound.min(compute_bound);
    let binding = if channel_bound <= compute_bound { "channel" } else { "compute" };
    Ok(ReplicaThroughput {
        lambda_max,
        channel_bound,
        compute_bound,
        binding: binding.to_string(),
    })
}
