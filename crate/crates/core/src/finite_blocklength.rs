//! Normal-approximation (dispersion-corrected) supplies and demand.
//!
//! Everything here is a finite-T benchmark, not a converse: the O(log T / T)
//! residual of the underlying expansions is dropped, so reported values carry
//! the [`NA_BENCHMARK_LABEL`] tag when they surface in reports. As T grows
//! each quantity approaches its first-order counterpart at a 1/sqrt(T) rate.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::channel_models::{
    bsc_capacity, bsc_dispersion, mcu_effective_capacity, mcu_effective_dispersion,
    random_coding_exponent_bsc, BscSpec, WordMcuSpec,
};
use crate::error::{LimitsError, Result};
use crate::supply_converse::{nonneg, ArchitectureSpec, BudgetSpec};
use crate::task_demand::{scalar_distortion_at_supply, ScalarGaussianSource};

/// Rate-dispersion constant of the Gaussian MSE task, 0.5 (log2 e)^2.
pub const GAUSSIAN_TASK_DISPERSION: f64 =
    0.5 * std::f64::consts::LOG2_E * std::f64::consts::LOG2_E;

/// How NA outputs must be labeled wherever they are reported.
pub const NA_BENCHMARK_LABEL: &str = "benchmark, not converse";

/// Per-event error targets. `eps_src` and `eps_ch` are always needed; the
/// remaining entries are consumed by whichever architecture uses them
/// (`eps_comp` by task-direct and noisy-logic, `eps_dec`/`eps_task` by
/// hard separation). When `total` is present the active subset must sum to
/// at most that value; without it the targets stand on their own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBudget {
    #[serde(default)]
    pub total: Option<f64>,
    pub eps_src: f64,
    pub eps_ch: f64,
    #[serde(default)]
    pub eps_comp: Option<f64>,
    #[serde(default)]
    pub eps_dec: Option<f64>,
    #[serde(default)]
    pub eps_task: Option<f64>,
}

impl ErrorBudget {
    /// Symmetric three-way split of `total` for the task-direct stack
    /// (source, channel, compute).
    pub fn task_direct(total: f64) -> Result<Self> {
        check_eps("total", total)?;
        let e = total / 3.0;
        Ok(ErrorBudget {
            total: Some(total),
            eps_src: e,
            eps_ch: e,
            eps_comp: Some(e),
            eps_dec: None,
            eps_task: None,
        })
    }

    /// Symmetric four-way split of `total` for hard separation
    /// (source, channel, decode stage, task stage).
    pub fn hard_separation(total: f64) -> Result<Self> {
        check_eps("total", total)?;
        let e = total / 4.0;
        Ok(ErrorBudget {
            total: Some(total),
            eps_src: e,
            eps_ch: e,
            eps_comp: None,
            eps_dec: Some(e),
            eps_task: Some(e),
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_eps("eps_src", self.eps_src)?;
        check_eps("eps_ch", self.eps_ch)?;
        for (name, v) in [
            ("total", self.total),
            ("eps_comp", self.eps_comp),
            ("eps_dec", self.eps_dec),
            ("eps_task", self.eps_task),
        ] {
            if let Some(v) = v {
                check_eps(name, v)?;
            }
        }
        Ok(())
    }

    fn require(&self, name: &str) -> Result<f64> {
        let v = match name {
            "eps_comp" => self.eps_comp,
            "eps_dec" => self.eps_dec,
            "eps_task" => self.eps_task,
            _ => unreachable!(),
        };
        v.ok_or_else(|| {
            LimitsError::InvalidSpec(format!(
                "this architecture needs {name} in the error budget"
            ))
        })
    }

    fn check_total(&self, active: &[f64]) -> Result<()> {
        if let Some(total) = self.total {
            let sum: f64 = active.iter().sum();
            if sum > total + 1e-12 {
                return Err(LimitsError::InvalidSpec(format!(
                    "error split sums to {sum}, exceeding the total budget {total}"
                )));
            }
        }
        Ok(())
    }
}

fn check_eps(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v >= 1.0 {
        return Err(LimitsError::Domain(format!(
            "{name} must be a probability in (0, 1), got {v}"
        )));
    }
    Ok(())
}

/// Block length plus the first-order budgets and the dispersions that pair
/// with them: `v_ch` per channel use, `v_gate` per gate instance, `v_task`
/// per source sample (all in bits^2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaConfig {
    pub block_len: u64,
    pub budgets: BudgetSpec,
    pub v_ch: f64,
    pub v_gate: f64,
    pub v_task: f64,
}

impl NaConfig {
    pub fn new(
        block_len: u64,
        budgets: BudgetSpec,
        v_ch: f64,
        v_gate: f64,
        v_task: f64,
    ) -> Result<Self> {
        let cfg = NaConfig { block_len, budgets, v_ch, v_gate, v_task };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(LimitsError::Domain("block length must be at least 1".into()));
        }
        self.budgets.validate()?;
        nonneg("v_ch", self.v_ch)?;
        nonneg("v_gate", self.v_gate)?;
        nonneg("v_task", self.v_task)?;
        Ok(())
    }
}

/// NA feasibility outcome. `supply` and `demand` are the dispersion-corrected
/// values; `clamped` records that the raw supply fell below zero and was
/// truncated (the `[x]_+` in the rate expressions).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaFeasibilityVerdict {
    pub feasible: bool,
    pub supply: f64,
    pub demand: f64,
    pub margin: f64,
    pub binding_cut: String,
    pub clamped: bool,
}

/// Gaussian finite-T benchmark: the architecture-limited distortion along
/// with the two classical reliable baselines evaluated at the same block
/// length and total error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianNaBenchmark {
    pub distortion: f64,
    pub r_eff: f64,
    pub jscc_baseline: f64,
    pub sscc_baseline: f64,
}

/// Standard Gaussian upper tail Q(x).
pub fn q_func(x: f64) -> f64 {
    erfc(x / std::f64::consts::SQRT_2) / 2.0
}

/// Inverse Gaussian tail, bisected on `q_func` down to an interval of width
/// 1e-12. No closed-form rational approximation is used, so the error budget
/// of the inverse is exactly the bisection tolerance plus the tail-function
/// rounding.
pub fn q_inv(p: f64) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(LimitsError::Domain(format!(
            "q_inv needs a probability in (0, 1), got {p}"
        )));
    }
    let mut lo = -40.0f64;
    let mut hi = 40.0f64;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if q_func(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// n C_ch - sqrt(n V_ch / T) Q^{-1}(eps_ch). May be negative; callers clamp.
pub fn na_channel_rate(cfg: &NaConfig, eps_ch: f64) -> Result<f64> {
    cfg.validate()?;
    check_eps("eps_ch", eps_ch)?;
    let t = cfg.block_len as f64;
    let n = cfg.budgets.n;
    Ok(n * cfg.budgets.c_ch - (n * cfg.v_ch / t).sqrt() * q_inv(eps_ch)?)
}

/// m C_gate - sqrt(m V_gate / T) Q^{-1}(eps_comp). With an MCU word law the
/// effective capacity and the enumerated effective dispersion replace the
/// configured per-gate pair. May be negative; callers clamp.
pub fn na_compute_rate(cfg: &NaConfig, eps_comp: f64, mcu: Option<&WordMcuSpec>) -> Result<f64> {
    cfg.validate()?;
    check_eps("eps_comp", eps_comp)?;
    let (c, v) = match mcu {
        None => (cfg.budgets.c_gate, cfg.v_gate),
        Some(spec) => {
            spec.validate()?;
            (mcu_effective_capacity(spec).value, mcu_effective_dispersion(spec)?)
        }
    };
    let t = cfg.block_len as f64;
    let m = cfg.budgets.m;
    Ok(m * c - (m * v / t).sqrt() * q_inv(eps_comp)?)
}

/// A single stage's NA supply m_k c_k - sqrt(m_k v_gate / T) Q^{-1}(eps),
/// unclamped. Bypass bits, when any, are added by the caller.
pub fn na_stage_supply(m_k: f64, c_k: f64, v_gate: f64, block_len: u64, eps: f64) -> Result<f64> {
    nonneg("m_k", m_k)?;
    nonneg("c_k", c_k)?;
    nonneg("v_gate", v_gate)?;
    if block_len == 0 {
        return Err(LimitsError::Domain("block length must be at least 1".into()));
    }
    check_eps("eps", eps)?;
    let t = block_len as f64;
    Ok(m_k * c_k - (m_k * v_gate / t).sqrt() * q_inv(eps)?)
}

/// R_{X|Y}(D) + sqrt(v_task / T) Q^{-1}(eps_src); the demand side only ever
/// moves up at finite T.
pub fn na_task_demand(demand: f64, v_task: f64, block_len: u64, eps_src: f64) -> Result<f64> {
    nonneg("demand", demand)?;
    nonneg("v_task", v_task)?;
    if block_len == 0 {
        return Err(LimitsError::Domain("block length must be at least 1".into()));
    }
    check_eps("eps_src", eps_src)?;
    Ok(demand + (v_task / block_len as f64).sqrt() * q_inv(eps_src)?)
}

/// Raw (unclamped) NA cut list for the architectures with a dispersion
/// model: task-direct, hard separation, and noisy logic.
fn na_supply_cuts(
    arch: &ArchitectureSpec,
    cfg: &NaConfig,
    budget: &ErrorBudget,
) -> Result<Vec<(String, f64)>> {
    let t = cfg.block_len;
    let slack = 1e-9 * cfg.budgets.m.max(1.0);
    let mut cuts = vec![("channel".to_string(), na_channel_rate(cfg, budget.eps_ch)?)];
    match arch {
        ArchitectureSpec::TaskDirect => {
            let eps_comp = budget.require("eps_comp")?;
            budget.check_total(&[budget.eps_src, budget.eps_ch, eps_comp])?;
            cuts.push(("compute".into(), na_compute_rate(cfg, eps_comp, None)?));
        }
        ArchitectureSpec::HardSeparation { m_dec, m_task, c_dec, c_task, bypass_bits } => {
            let eps_dec = budget.require("eps_dec")?;
            let eps_task = budget.require("eps_task")?;
            budget.check_total(&[budget.eps_src, budget.eps_ch, eps_dec, eps_task])?;
            nonneg("bypass_bits", *bypass_bits)?;
            if m_dec + m_task > cfg.budgets.m + slack {
                return Err(LimitsError::InvalidSpec(format!(
                    "stage budgets {m_dec} + {m_task} exceed total gate budget {}",
                    cfg.budgets.m
                )));
            }
            cuts.push((
                "decode-stage".into(),
                bypass_bits + na_stage_supply(*m_dec, *c_dec, cfg.v_gate, t, eps_dec)?,
            ));
            cuts.push((
                "task-stage".into(),
                bypass_bits + na_stage_supply(*m_task, *c_task, cfg.v_gate, t, eps_task)?,
            ));
        }
        ArchitectureSpec::NoisyLogic { delta, k_fan, d_logic, q_inputs } => {
            let eps_comp = budget.require("eps_comp")?;
            budget.check_total(&[budget.eps_src, budget.eps_ch, eps_comp])?;
            if let Some(q) = q_inputs {
                if !q.is_finite() || *q <= 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "q_inputs must be positive when given, got {q}"
                    )));
                }
            }
            if !(*delta > 0.0 && *delta < 0.5) {
                return Err(LimitsError::Domain(format!(
                    "gate flip probability delta must lie in (0, 0.5), got {delta}"
                )));
            }
            if !k_fan.is_finite() || *k_fan < 1.0 {
                return Err(LimitsError::Domain(format!(
                    "fan-in k_fan must be at least 1, got {k_fan}"
                )));
            }
            if !d_logic.is_finite() || *d_logic < 0.0 {
                return Err(LimitsError::Domain(format!(
                    "logic depth must be finite and nonnegative, got {d_logic}"
                )));
            }
            let gate = BscSpec::new(*delta)?;
            let m = cfg.budgets.m;
            let per_gate =
                m * bsc_capacity(&gate) - (m * bsc_dispersion(&gate) / t as f64).sqrt()
                    * q_inv(eps_comp)?;
            cuts.push(("compute".into(), per_gate));
            // deterministic propagation ceiling; no dispersion backoff
            let beta = k_fan * (1.0 - 2.0 * delta) * (1.0 - 2.0 * delta);
            cuts.push(("propagation".into(), m * beta.powf(*d_logic).min(1.0)));
        }
        _ => {
            return Err(LimitsError::Unsupported(
                "the normal approximation covers task-direct, hard-separation, and \
                 noisy-logic architectures"
                    .into(),
            ))
        }
    }
    Ok(cuts)
}

/// Dispersion-corrected feasibility: NA demand against the architecture's NA
/// supply, with the binding cut named as in the first-order check. The raw
/// minimum decides the binding label; the reported supply is clamped at 0
/// and `clamped` says whether that happened.
pub fn na_feasibility(
    arch: &ArchitectureSpec,
    cfg: &NaConfig,
    budget: &ErrorBudget,
    demand: f64,
) -> Result<NaFeasibilityVerdict> {
    cfg.validate()?;
    budget.validate()?;
    nonneg("demand", demand)?;

    let na_demand = na_task_demand(demand, cfg.v_task, cfg.block_len, budget.eps_src)?;
    let cuts = na_supply_cuts(arch, cfg, budget)?;
    let raw = cuts.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let supply = raw.max(0.0);
    let mut binding: Vec<&str> = cuts
        .iter()
        .filter(|(_, v)| *v <= raw + 1e-12)
        .map(|(name, _)| name.as_str())
        .collect();
    binding.sort_unstable();
    Ok(NaFeasibilityVerdict {
        feasible: na_demand <= supply,
        supply,
        demand: na_demand,
        margin: supply - na_demand,
        binding_cut: binding[0].to_string(),
        clamped: raw < 0.0,
    })
}

/// Finite-T Gaussian benchmark curve: R_eff = [R_sup,NA - source backoff]_+
/// pushed through the scalar distortion formula, plus the two reliable
/// baselines from the budget's total:
/// JSCC takes one combined backoff Q^{-1}(eps) sqrt((n V_ch + v_task)/T),
/// SSCC pays Q^{-1}(eps/2) separately on each of the two sqrt terms.
pub fn gaussian_na_distortion(
    src: &ScalarGaussianSource,
    arch: &ArchitectureSpec,
    cfg: &NaConfig,
    budget: &ErrorBudget,
) -> Result<GaussianNaBenchmark> {
    src.validate()?;
    cfg.validate()?;
    budget.validate()?;

    let t = cfg.block_len as f64;
    let cuts = na_supply_cuts(arch, cfg, budget)?;
    let r_sup = cuts.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let backoff = (cfg.v_task / t).sqrt() * q_inv(budget.eps_src)?;
    let r_eff = (r_sup - backoff).max(0.0);
    let distortion = scalar_distortion_at_supply(src, r_eff)?;

    let total = budget.total.ok_or_else(|| {
        LimitsError::InvalidSpec(
            "the JSCC and SSCC baselines need the total error budget".into(),
        )
    })?;
    let n = cfg.budgets.n;
    let c_ch = cfg.budgets.c_ch;
    let r_jscc = (n * c_ch - q_inv(total)? * ((n * cfg.v_ch + cfg.v_task) / t).sqrt()).max(0.0);
    let q_half = q_inv(total / 2.0)?;
    let r_sscc = (n * c_ch
        - q_half * (n * cfg.v_ch / t).sqrt()
        - q_half * (cfg.v_task / t).sqrt())
    .max(0.0);
    Ok(GaussianNaBenchmark {
        distortion,
        r_eff,
        jscc_baseline: scalar_distortion_at_supply(src, r_jscc)?,
        sscc_baseline: scalar_distortion_at_supply(src, r_sscc)?,
    })
}

/// Random-coding bound on the compute error event, 2^{-m T E_r(R/m)}. At or
/// above the per-gate capacity the exponent is zero and the bound is the
/// trivial 1.
pub fn comp_error_exponent_bound(
    rate_per_sample: f64,
    m: f64,
    spec: &BscSpec,
    block_len: u64,
) -> Result<f64> {
    spec.validate()?;
    if !m.is_finite() || m <= 0.0 {
        return Err(LimitsError::Domain(format!(
            "gate budget m must be positive, got {m}"
        )));
    }
    if block_len == 0 {
        return Err(LimitsError::Domain("block length must be at least 1".into()));
    }
    let per_gate = rate_per_sample / m;
    if per_gate >= bsc_capacity(spec) {
        return Ok(1.0);
    }
    let er = random_coding_exponent_bsc(per_gate, spec)?;
    Ok((-(m * block_len as f64) * er).exp2())
}
