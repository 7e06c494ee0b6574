//! Supply side of the limit calculus: how many useful bits per instance an
//! architecture can move from the observation to the task output, given a
//! channel budget and a compute budget.
//!
//! Every supply here is a min over cuts. `check_feasibility` names the cut
//! that binds so callers can report which resource to grow.

use serde::{Deserialize, Serialize};

use crate::channel_models::bsc_capacity;
use crate::error::{LimitsError, Result};

/// Per-instance resource budgets: `n` channel uses at capacity `c_ch` and
/// `m` gate evaluations at capacity `c_gate`. All real-valued; fractional
/// budgets arise from amortization across instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub n: f64,
    pub c_ch: f64,
    pub m: f64,
    pub c_gate: f64,
}

impl BudgetSpec {
    pub fn new(n: f64, c_ch: f64, m: f64, c_gate: f64) -> Result<Self> {
        let spec = BudgetSpec { n, c_ch, m, c_gate };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("c_ch", self.c_ch),
            ("m", self.m),
            ("c_gate", self.c_gate),
        ] {
            nonneg(name, v)?;
        }
        Ok(())
    }
}

/// Architectures whose converses differ. Capacities live in the variant when
/// the stages are allowed to run at different gate qualities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ArchitectureSpec {
    /// Single stage, all gates work on the task directly.
    TaskDirect,
    /// Task-direct plus `bypass_bits` of protected side information per
    /// instance (cached activations, a clean shortcut wire, ...).
    Bypass { bypass_bits: f64 },
    /// Decode-then-compute with a hard representational interface.
    HardSeparation {
        m_dec: f64,
        m_task: f64,
        c_dec: f64,
        c_task: f64,
        bypass_bits: f64,
    },
    /// Pipeline of `(m_k, c_k)` stages; information cannot re-enter once lost.
    KStage { stages: Vec<(f64, f64)> },
    /// `m_int` gates are spent maintaining the interface itself.
    SoftInterface { m_int: f64 },
    /// Two-stage split where the decode stage additionally receives `m_rel`
    /// bits per instance of fully reliable scratch output.
    ReliableIsland {
        m_dec: f64,
        m_task: f64,
        m_rel: f64,
        c_dec: f64,
        c_task: f64,
    },
    /// Gates flip with probability `delta`, fan-in `k_fan`, circuit depth
    /// `d_logic`. `q_inputs` is recorded for reporting only.
    NoisyLogic {
        delta: f64,
        k_fan: f64,
        d_logic: f64,
        q_inputs: Option<f64>,
    },
}

/// Outcome of `check_feasibility`. `margin = supply - demand`, negative when
/// infeasible; `binding_cut` is the lexicographically first cut within 1e-12
/// of the minimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub supply: f64,
    pub margin: f64,
    pub binding_cut: String,
}

/// Best split found by `optimal_split_hard_separation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOutcome {
    pub m_dec: f64,
    pub m_task: f64,
    pub supply: f64,
}

/// Which branch limits a noisy gate's effective capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GateBinding {
    Capacity,
    Propagation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSupply {
    pub c_logic: f64,
    pub binding: GateBinding,
}

pub(crate) fn nonneg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(LimitsError::Domain(format!(
            "{name} must be finite and nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// min(n c_ch, m c_gate): the two-cut converse for a single-stage system.
pub fn supply_task_direct(budget: &BudgetSpec) -> f64 {
    (budget.n * budget.c_ch).min(budget.m * budget.c_gate)
}

/// Bypass bits raise only the compute cut; the channel cut is unchanged
/// because protected bits still had to cross the channel at some point.
pub fn supply_bypass(budget: &BudgetSpec, bypass_bits: f64) -> Result<f64> {
    nonneg("bypass_bits", bypass_bits)?;
    Ok((budget.n * budget.c_ch).min(bypass_bits + budget.m * budget.c_gate))
}

/// Three-cut converse for a fixed decode/task split, each stage optionally
/// assisted by the same bypass.
pub fn supply_hard_separation(
    n: f64,
    c_ch: f64,
    m_dec: f64,
    c_dec: f64,
    m_task: f64,
    c_task: f64,
    bypass_bits: f64,
) -> Result<f64> {
    for (name, v) in [
        ("n", n),
        ("c_ch", c_ch),
        ("m_dec", m_dec),
        ("c_dec", c_dec),
        ("m_task", m_task),
        ("c_task", c_task),
        ("bypass_bits", bypass_bits),
    ] {
        nonneg(name, v)?;
    }
    Ok((n * c_ch)
        .min(bypass_bits + m_dec * c_dec)
        .min(bypass_bits + m_task * c_task))
}

/// Maximize min(m_dec c_dec, m_rel + (m - m_dec) c_task) over m_dec in
/// [0, m]. The first arm rises and the second falls, so the optimum is the
/// equalizing intersection, clamped to the interval.
pub fn optimal_split_hard_separation(
    m_total: f64,
    c_dec: f64,
    c_task: f64,
    m_rel: f64,
) -> Result<SplitOutcome> {
    for (name, v) in [
        ("m_total", m_total),
        ("c_dec", c_dec),
        ("c_task", c_task),
        ("m_rel", m_rel),
    ] {
        nonneg(name, v)?;
    }
    if c_dec == 0.0 {
        // the decode arm pins the min at zero regardless of the split
        let m_dec = if c_task == 0.0 { m_total / 2.0 } else { 0.0 };
        return Ok(SplitOutcome {
            m_dec,
            m_task: m_total - m_dec,
            supply: 0.0,
        });
    }
    let m_star = (m_rel + m_total * c_task) / (c_dec + c_task);
    let m_dec = m_star.min(m_total);
    let supply = (m_dec * c_dec).min(m_rel + (m_total - m_dec) * c_task);
    Ok(SplitOutcome {
        m_dec,
        m_task: m_total - m_dec,
        supply,
    })
}

/// Pipeline converse: the channel cut and every stage cut.
pub fn supply_k_stage(n: f64, c_ch: f64, stages: &[(f64, f64)]) -> Result<f64> {
    nonneg("n", n)?;
    nonneg("c_ch", c_ch)?;
    if stages.is_empty() {
        return Err(LimitsError::Domain("k-stage pipeline needs at least one stage".into()));
    }
    let mut min_stage = f64::INFINITY;
    for (i, &(m_k, c_k)) in stages.iter().enumerate() {
        nonneg(&format!("stages[{i}].m"), m_k)?;
        nonneg(&format!("stages[{i}].c"), c_k)?;
        min_stage = min_stage.min(m_k * c_k);
    }
    Ok((n * c_ch).min(min_stage))
}

/// Interface upkeep eats `m_int` of the gate budget before any task work.
pub fn supply_soft_interface(n: f64, c_ch: f64, m: f64, m_int: f64, c_gate: f64) -> Result<f64> {
    for (name, v) in [("n", n), ("c_ch", c_ch), ("m", m), ("m_int", m_int), ("c_gate", c_gate)] {
        nonneg(name, v)?;
    }
    if m_int > m {
        return Err(LimitsError::Domain(format!(
            "interface budget m_int = {m_int} exceeds total gate budget m = {m}"
        )));
    }
    Ok((n * c_ch).min((m - m_int) * c_gate))
}

/// Effective per-gate capacity under flip noise and depth-d propagation.
/// The capacity branch is 1 - h2(delta); the propagation branch decays as
/// beta^d with beta = k_fan (1 - 2 delta)^2, capped at 1.
pub fn noisy_logic_gate_supply(delta: f64, k_fan: f64, d_logic: f64) -> Result<GateSupply> {
    if !(delta > 0.0 && delta < 0.5) || !delta.is_finite() {
        return Err(LimitsError::Domain(format!(
            "gate flip probability must lie in (0, 0.5), got {delta}"
        )));
    }
    if !k_fan.is_finite() || k_fan < 1.0 {
        return Err(LimitsError::Domain(format!("fan-in must be at least 1, got {k_fan}")));
    }
    nonneg("d_logic", d_logic)?;
    let c_gate = bsc_capacity(&crate::channel_models::BscSpec { epsilon: delta });
    let beta = k_fan * (1.0 - 2.0 * delta).powi(2);
    let propagation = beta.powf(d_logic).min(1.0);
    if c_gate <= propagation {
        Ok(GateSupply { c_logic: c_gate, binding: GateBinding::Capacity })
    } else {
        Ok(GateSupply { c_logic: propagation, binding: GateBinding::Propagation })
    }
}

/// Noisy-logic system supply: channel cut against m gates at `c_logic`.
pub fn supply_noisy_logic(
    n: f64,
    c_ch: f64,
    m: f64,
    delta: f64,
    k_fan: f64,
    d_logic: f64,
) -> Result<f64> {
    nonneg("n", n)?;
    nonneg("c_ch", c_ch)?;
    nonneg("m", m)?;
    let gate = noisy_logic_gate_supply(delta, k_fan, d_logic)?;
    Ok((n * c_ch).min(m * gate.c_logic))
}

/// Gates needed to carry `demand` bits at effective capacity `c_logic`.
/// Zero capacity against positive demand is reported as +infinity.
pub fn required_gate_budget(demand: f64, c_logic: f64) -> Result<f64> {
    if demand.is_nan() || demand < 0.0 {
        return Err(LimitsError::Domain(format!("demand must be nonnegative, got {demand}")));
    }
    nonneg("c_logic", c_logic)?;
    if demand == 0.0 {
        return Ok(0.0);
    }
    if c_logic == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(demand / c_logic)
}

/// Open demand interval where task-direct succeeds but every symmetric
/// equal-capacity two-stage separation fails. Empty when the channel is the
/// bottleneck or the compute budget is degenerate.
pub fn strict_gap_interval(budget: &BudgetSpec) -> Option<(f64, f64)> {
    let compute = budget.m * budget.c_gate;
    if compute > 0.0 && compute <= budget.n * budget.c_ch {
        Some((0.5 * compute, compute))
    } else {
        None
    }
}

/// Fano-style lower bound on task error when a model of `model_bits` bits of
/// task-relevant description must be reconstructed from `stored_bits` stored
/// at gate capacity `c_gate`.
pub fn model_storage_error_lb(model_bits: f64, stored_bits: f64, c_gate: f64) -> Result<f64> {
    if !model_bits.is_finite() || model_bits <= 0.0 {
        return Err(LimitsError::Domain(format!(
            "model description length must be positive, got {model_bits}"
        )));
    }
    nonneg("stored_bits", stored_bits)?;
    nonneg("c_gate", c_gate)?;
    Ok((1.0 - (stored_bits * c_gate + 1.0) / model_bits).max(0.0))
}

/// Accounting proxy mapping network shape to a bypass budget in bits:
/// kappa_w P b + kappa_a b_act + kappa_r b_route.
pub fn budget_from_network(
    params: f64,
    bits_per_weight: f64,
    activation_bits: f64,
    routing_bits: f64,
    kappas: (f64, f64, f64),
) -> Result<f64> {
    for (name, v) in [
        ("params", params),
        ("bits_per_weight", bits_per_weight),
        ("activation_bits", activation_bits),
        ("routing_bits", routing_bits),
        ("kappa_w", kappas.0),
        ("kappa_a", kappas.1),
        ("kappa_r", kappas.2),
    ] {
        nonneg(name, v)?;
    }
    Ok(kappas.0 * params * bits_per_weight + kappas.1 * activation_bits + kappas.2 * routing_bits)
}

/// Evaluate an architecture's cuts against a demand. Cut labels:
/// "channel", "compute", "decode-stage", "task-stage", "stage-k" (1-based),
/// "propagation". Ties within 1e-12 resolve to the lexicographically first.
pub fn check_feasibility(
    arch: &ArchitectureSpec,
    budget: &BudgetSpec,
    demand: f64,
) -> Result<FeasibilityVerdict> {
    if demand.is_nan() || demand < 0.0 {
        return Err(LimitsError::Domain(format!("demand must be nonnegative, got {demand}")));
    }
    budget.validate()?;
    let channel = budget.n * budget.c_ch;
    let mut cuts: Vec<(String, f64)> = vec![("channel".into(), channel)];
    let slack = 1e-9 * budget.m.max(1.0);
    match arch {
        ArchitectureSpec::TaskDirect => {
            cuts.push(("compute".into(), budget.m * budget.c_gate));
        }
        ArchitectureSpec::Bypass { bypass_bits } => {
            nonneg("bypass_bits", *bypass_bits)?;
            cuts.push(("compute".into(), bypass_bits + budget.m * budget.c_gate));
        }
        ArchitectureSpec::HardSeparation { m_dec, m_task, c_dec, c_task, bypass_bits } => {
            for (name, v) in [
                ("m_dec", *m_dec),
                ("m_task", *m_task),
                ("c_dec", *c_dec),
                ("c_task", *c_task),
                ("bypass_bits", *bypass_bits),
            ] {
                nonneg(name, v)?;
            }
            if m_dec + m_task > budget.m + slack {
                return Err(LimitsError::InvalidSpec(format!(
                    "stage budgets {m_dec} + {m_task} exceed total gate budget {}",
                    budget.m
                )));
            }
            cuts.push(("decode-stage".into(), bypass_bits + m_dec * c_dec));
            cuts.push(("task-stage".into(), bypass_bits + m_task * c_task));
        }
        ArchitectureSpec::KStage { stages } => {
            if stages.is_empty() {
                return Err(LimitsError::Domain("k-stage pipeline needs at least one stage".into()));
            }
            let mut total = 0.0;
            for (i, &(m_k, c_k)) in stages.iter().enumerate() {
                nonneg(&format!("stages[{i}].m"), m_k)?;
                nonneg(&format!("stages[{i}].c"), c_k)?;
                total += m_k;
                cuts.push((format!("stage-{}", i + 1), m_k * c_k));
            }
            if total > budget.m + slack {
                return Err(LimitsError::InvalidSpec(format!(
                    "stage budgets sum to {total}, exceeding total gate budget {}",
                    budget.m
                )));
            }
        }
        ArchitectureSpec::SoftInterface { m_int } => {
            nonneg("m_int", *m_int)?;
            if *m_int > budget.m {
                return Err(LimitsError::Domain(format!(
                    "interface budget m_int = {m_int} exceeds total gate budget m = {}",
                    budget.m
                )));
            }
            cuts.push(("compute".into(), (budget.m - m_int) * budget.c_gate));
        }
        ArchitectureSpec::ReliableIsland { m_dec, m_task, m_rel, c_dec, c_task } => {
            for (name, v) in [
                ("m_dec", *m_dec),
                ("m_task", *m_task),
                ("m_rel", *m_rel),
                ("c_dec", *c_dec),
                ("c_task", *c_task),
            ] {
                nonneg(name, v)?;
            }
            if m_dec + m_task > budget.m + slack {
                return Err(LimitsError::InvalidSpec(format!(
                    "stage budgets {m_dec} + {m_task} exceed total gate budget {}",
                    budget.m
                )));
            }
            cuts.push(("decode-stage".into(), m_dec * c_dec));
            cuts.push(("task-stage".into(), m_rel + m_task * c_task));
        }
        ArchitectureSpec::NoisyLogic { delta, k_fan, d_logic, q_inputs } => {
            if let Some(q) = q_inputs {
                if !q.is_finite() || *q <= 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "q_inputs must be positive when given, got {q}"
                    )));
                }
            }
            // the architecture's own gate model replaces budget.c_gate
            let gate = noisy_logic_gate_supply(*delta, *k_fan, *d_logic)?;
            let label = match gate.binding {
                GateBinding::Capacity => "compute",
                GateBinding::Propagation => "propagation",
            };
            cuts.push((label.into(), budget.m * gate.c_logic));
        }
    }

    let supply = cuts.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let mut binding: Vec<&str> = cuts
        .iter()
        .filter(|&&(_, v)| v <= supply + 1e-12)
        .map(|(name, _)| name.as_str())
        .collect();
    binding.sort_unstable();
    Ok(FeasibilityVerdict {
        feasible: demand <= supply,
        supply,
        margin: supply - demand,
        binding_cut: binding[0].to_string(),
    })
}
