//! OK/ER/UE outcome calculus: an instance either completes correctly,
//! trips a detector and falls back, or silently delivers a wrong value.
//! This module carries the distortion and tail decompositions over those
//! three branches, the duplication-and-compare and hashing detectors, and
//! the sizing rules that pick detector parameters for a tail budget.

use serde::{Deserialize, Serialize};

use crate::channel_models::WordMcuSpec;
use crate::error::{LimitsError, Result};

/// Probabilities of the three outcome branches. Always a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeModel {
    pub p_ok: f64,
    pub p_ue: f64,
    pub p_er: f64,
}

impl OutcomeModel {
    pub fn new(p_ok: f64, p_ue: f64, p_er: f64) -> Result<Self> {
        for (name, p) in [("p_ok", p_ok), ("p_ue", p_ue), ("p_er", p_er)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(LimitsError::Domain(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if (p_ok + p_ue + p_er - 1.0).abs() > 1e-12 {
            return Err(LimitsError::Domain(format!(
                "outcome probabilities must sum to 1, got {}",
                p_ok + p_ue + p_er
            )));
        }
        Ok(OutcomeModel { p_ok, p_ue, p_er })
    }
}

/// Conditional statistics per branch. Distortions are means, deltas are
/// conditional tail probabilities at the caller's threshold; each bound
/// needs only a subset, so unknown entries stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchStats {
    pub d_ok: f64,
    pub d_fb: f64,
    pub d_ue: Option<f64>,
    pub delta_ok: Option<f64>,
    pub delta_fb: Option<f64>,
    pub beta_ue: Option<f64>,
}

impl BranchStats {
    fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("d_ok", Some(self.d_ok)),
            ("d_fb", Some(self.d_fb)),
            ("d_ue", self.d_ue),
        ] {
            if let Some(d) = d {
                if !d.is_finite() || d < 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "{name} must be finite and nonnegative, got {d}"
                    )));
                }
            }
        }
        for (name, p) in [
            ("delta_ok", self.delta_ok),
            ("delta_fb", self.delta_fb),
            ("beta_ue", self.beta_ue),
        ] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(LimitsError::Domain(format!(
                        "{name} must lie in [0, 1], got {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Duplication-and-compare detector: `replicas` independent evaluations,
/// accept only on full agreement. The common-mode mixture (all replicas hit
/// by one shared fault with probability theta) exists only for r = 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub replicas: u32,
    pub common_mode_theta: f64,
}

impl DetectorSpec {
    pub fn new(replicas: u32, common_mode_theta: f64) -> Result<Self> {
        if replicas < 2 {
            return Err(LimitsError::Domain(format!(
                "duplication needs at least 2 replicas, got {replicas}"
            )));
        }
        if !(0.0..=1.0).contains(&common_mode_theta) {
            return Err(LimitsError::Domain(format!(
                "common-mode theta must lie in [0, 1], got {common_mode_theta}"
            )));
        }
        if common_mode_theta > 0.0 && replicas > 2 {
            return Err(LimitsError::Unsupported(
                "the common-mode mixture is defined only for r = 2".into(),
            ));
        }
        Ok(DetectorSpec { replicas, common_mode_theta })
    }
}

/// Interface message shape: `message_bits` split into `word_count` words of
/// `word_bits` each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub message_bits: u64,
    pub word_bits: u64,
    pub word_count: u64,
}

impl InterfaceSpec {
    pub fn new(message_bits: u64, word_bits: u64) -> Result<Self> {
        if message_bits == 0 || word_bits == 0 {
            return Err(LimitsError::Domain(
                "message and word lengths must be positive".into(),
            ));
        }
        if !message_bits.is_multiple_of(word_bits) {
            return Err(LimitsError::Domain(format!(
                "word length {word_bits} must divide message length {message_bits}"
            )));
        }
        Ok(InterfaceSpec { message_bits, word_bits, word_count: message_bits / word_bits })
    }
}

/// Replica counts chosen by `size_replicas_for_tail`. `None` means no
/// r <= 64 meets the budget (unsatisfiable in the searched range).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaSizing {
    pub message_r: Option<u32>,
    pub per_word_r: Option<u32>,
}

/// End-to-end mean distortion over the three branches:
/// p_ok d_ok + p_er d_fb + p_ue d_ue. The UE mean is required whenever the
/// UE branch carries mass; use `clipping_ue_bound` to supply one.
pub fn mse_three_outcome(model: &OutcomeModel, stats: &BranchStats) -> Result<f64> {
    stats.validate()?;
    let ue_term = if model.p_ue > 0.0 {
        let d_ue = stats.d_ue.ok_or_else(|| {
            LimitsError::InvalidSpec(
                "d_ue is required when p_ue > 0; substitute clipping_ue_bound(A, moment)".into(),
            )
        })?;
        model.p_ue * d_ue
    } else {
        0.0
    };
    Ok(model.p_ok * stats.d_ok + model.p_er * stats.d_fb + ue_term)
}

/// Tail-probability sandwich at the caller's distortion threshold:
/// beta_ue p_ue from below, (1 - p_ue - p_er) delta_ok + p_er delta_fb + p_ue
/// from above, and the block-level union bound T times the upper side.
pub fn tail_sandwich(
    model: &OutcomeModel,
    stats: &BranchStats,
    block_len: u64,
) -> Result<(f64, f64, f64)> {
    stats.validate()?;
    let (delta_ok, delta_fb, beta_ue) = match (stats.delta_ok, stats.delta_fb, stats.beta_ue) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => {
            return Err(LimitsError::InvalidSpec(
                "tail_sandwich needs delta_ok, delta_fb, and beta_ue".into(),
            ))
        }
    };
    let lower = beta_ue * model.p_ue;
    let upper = (1.0 - model.p_ue - model.p_er) * delta_ok + model.p_er * delta_fb + model.p_ue;
    Ok((lower, upper, block_len as f64 * upper))
}

/// Plain block Markov bound D / D0.
pub fn plain_markov_bound(distortion: f64, threshold: f64) -> Result<f64> {
    if !distortion.is_finite() || distortion < 0.0 {
        return Err(LimitsError::Domain(format!(
            "distortion must be finite and nonnegative, got {distortion}"
        )));
    }
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(LimitsError::Domain(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    Ok(distortion / threshold)
}

/// Markov-type tail bound at threshold D0. Without a UE mean the UE branch
/// is priced at probability 1; with `d_ue_ub` the whole mean goes through
/// Markov. The result is a bound, so values above 1 are vacuous but valid.
pub fn markov_tail_bound(
    model: &OutcomeModel,
    stats: &BranchStats,
    threshold: f64,
    d_ue_ub: Option<f64>,
) -> Result<f64> {
    stats.validate()?;
    if !threshold.is_finite() || threshold <= 0.0 {
        return Err(LimitsError::Domain(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let safe_mean = model.p_ok * stats.d_ok + model.p_er * stats.d_fb;
    Ok(match d_ue_ub {
        Some(ub) => {
            if !ub.is_finite() || ub < 0.0 {
                return Err(LimitsError::Domain(format!(
                    "d_ue_ub must be finite and nonnegative, got {ub}"
                )));
            }
            (safe_mean + model.p_ue * ub) / threshold
        }
        None => model.p_ue + safe_mean / threshold,
    })
}

/// Conditional UE distortion bound from output clipping to [-A, A]:
/// 2 E[X^2 | UE] + 2 A^2. De-condition the moment with E[X^2]/p_ue when only
/// the unconditional moment is known.
pub fn clipping_ue_bound(clip_range: f64, ue_second_moment: f64) -> Result<f64> {
    if !clip_range.is_finite() || clip_range < 0.0 {
        return Err(LimitsError::Domain(format!(
            "clip range must be finite and nonnegative, got {clip_range}"
        )));
    }
    if !ue_second_moment.is_finite() || ue_second_moment < 0.0 {
        return Err(LimitsError::Domain(format!(
            "second moment must be finite and nonnegative, got {ue_second_moment}"
        )));
    }
    Ok(2.0 * ue_second_moment + 2.0 * clip_range * clip_range)
}

fn check_pmf(pmf: &[f64]) -> Result<()> {
    if pmf.is_empty() {
        return Err(LimitsError::Domain("error pmf must be nonempty".into()));
    }
    let mut sum = 0.0;
    for &p in pmf {
        if !p.is_finite() || p < 0.0 {
            return Err(LimitsError::Domain(format!("pmf entry {p} is invalid")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(LimitsError::Domain(format!("error pmf sums to {sum}, not 1")));
    }
    Ok(())
}

fn outcome_from_parts(p_ok: f64, p_ue: f64) -> Result<OutcomeModel> {
    OutcomeModel::new(p_ok, p_ue, (1.0 - p_ok - p_ue).max(0.0))
}

/// Outcomes of r-fold duplication over an explicit error-pattern pmf.
/// `error_pmf[0]` is the probability of the zero pattern; acceptance
/// requires all replicas to agree, so an undetected error needs the same
/// nonzero pattern r times.
pub fn dup_compare_outcomes(error_pmf: &[f64], detector: &DetectorSpec) -> Result<OutcomeModel> {
    check_pmf(error_pmf)?;
    let r = detector.replicas as i32;
    let theta = detector.common_mode_theta;
    let p0 = error_pmf[0];
    let collide: f64 = error_pmf[1..].iter().map(|&p| p.powi(r)).sum();
    if theta > 0.0 {
        // r = 2 guaranteed by DetectorSpec
        let p_ok = theta * p0 + (1.0 - theta) * p0 * p0;
        let p_ue = theta * (1.0 - p0) + (1.0 - theta) * collide;
        outcome_from_parts(p_ok, p_ue)
    } else {
        outcome_from_parts(p0.powi(r), collide)
    }
}

/// Same detector specialized to the word MCU law, in closed form:
/// p_ok = (1-alpha)^r and p_ue = alpha^r sum_k P_k^r / N_k^(r-1).
pub fn mcu_dup_outcomes(spec: &WordMcuSpec, detector: &DetectorSpec) -> Result<OutcomeModel> {
    spec.validate()?;
    let r = detector.replicas as i32;
    let theta = detector.common_mode_theta;
    let alpha = spec.alpha;
    let collide: f64 = spec
        .classes
        .iter()
        .map(|c| c.prob.powi(r) / (c.multiplicity as f64).powi(r - 1))
        .sum();
    if theta > 0.0 {
        let pair: f64 = spec
            .classes
            .iter()
            .map(|c| c.prob * c.prob / c.multiplicity as f64)
            .sum();
        let p_ok = theta * (1.0 - alpha) + (1.0 - theta) * (1.0 - alpha) * (1.0 - alpha);
        let p_ue = theta * alpha + (1.0 - theta) * alpha * alpha * pair;
        outcome_from_parts(p_ok, p_ue)
    } else {
        outcome_from_parts((1.0 - alpha).powi(r), alpha.powi(r) * collide)
    }
}

/// Lift a per-word outcome model to an M-word message: all words must be OK
/// for the message to be OK, and a message is UE when every word is OK or UE
/// with at least one UE. Evaluated through logs so large M cannot underflow
/// the difference.
pub fn message_outcomes(word_model: &OutcomeModel, word_count: u64) -> Result<OutcomeModel> {
    if word_count == 0 {
        return Err(LimitsError::Domain("word count must be at least 1".into()));
    }
    let m = word_count as f64;
    let a = word_model.p_ok;
    let b = word_model.p_ue;
    let s = (a + b).min(1.0);

    let p_ok = a.powf(m);
    let p_ue = if b == 0.0 {
        0.0
    } else if a == 0.0 {
        b.powf(m)
    } else {
        let z = m * (b / a).ln_1p();
        if z > 700.0 {
            // the all-OK term is negligible next to (a+b)^M
            s.powf(m) - p_ok
        } else {
            // a^M (e^z - 1), assembled in log domain against underflow
            let log_ue = m * a.ln() + z.exp_m1().ln();
            log_ue.exp()
        }
    };
    let p_er = if s == 0.0 { 1.0 } else { -(m * s.ln()).exp_m1() };
    OutcomeModel::new(p_ok, p_ue.clamp(0.0, 1.0), p_er.clamp(0.0, 1.0))
}

/// Undetected-error bound of an h-bit 2-universal hash tag.
pub fn hash_ue_bound(tag_bits: u32) -> Result<f64> {
    if tag_bits == 0 {
        return Err(LimitsError::Domain("hash tag needs at least one bit".into()));
    }
    Ok((-(tag_bits as f64)).exp2())
}

/// Smallest tag width with T 2^(-h) <= budget: ceil(log2(T/budget)).
pub fn hash_bits_for_target(block_len: u64, budget: f64) -> Result<u32> {
    if block_len == 0 {
        return Err(LimitsError::Domain("block length must be at least 1".into()));
    }
    if !(budget > 0.0 && budget < 1.0) {
        return Err(LimitsError::Domain(format!(
            "tail budget must lie in (0, 1), got {budget}"
        )));
    }
    let t = block_len as f64;
    let mut h = (t / budget).log2().ceil().max(1.0) as u32;
    while t * (-(h as f64)).exp2() > budget {
        h += 1;
    }
    Ok(h)
}

/// Smallest replica counts meeting a block tail budget in the safe-branch
/// regime (delta_ok = delta_fb = 0, so only undetected errors leak past the
/// threshold). `message_r` enforces message-level p_ue <= budget/T exactly;
/// `per_word_r` uses the cruder per-word union-bound target budget/(T M).
pub fn size_replicas_for_tail(
    spec: &WordMcuSpec,
    iface: &InterfaceSpec,
    block_len: u64,
    budget: f64,
) -> Result<ReplicaSizing> {
    if block_len == 0 {
        return Err(LimitsError::Domain("block length must be at least 1".into()));
    }
    if !(budget > 0.0 && budget < 1.0) {
        return Err(LimitsError::Domain(format!(
            "tail budget must lie in (0, 1), got {budget}"
        )));
    }
    let t = block_len as f64;
    let msg_target = budget / t;
    let word_target = budget / (t * iface.word_count as f64);

    let mut message_r = None;
    let mut per_word_r = None;
    for r in 2..=64u32 {
        let det = DetectorSpec::new(r, 0.0)?;
        let word = mcu_dup_outcomes(spec, &det)?;
        if per_word_r.is_none() && word.p_ue <= word_target {
            per_word_r = Some(r);
        }
        if message_r.is_none() {
            let msg = message_outcomes(&word, iface.word_count)?;
            if msg.p_ue <= msg_target {
                message_r = Some(r);
            }
        }
        if message_r.is_some() && per_word_r.is_some() {
            break;
        }
    }
    Ok(ReplicaSizing { message_r, per_word_r })
}
