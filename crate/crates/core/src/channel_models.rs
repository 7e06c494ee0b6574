//! Capacities, dispersions, and error exponents for the physical channel and
//! the compute primitives.
//!
//! Everything is in bits (base 2); natural logs only appear inside kernels.

use serde::{Deserialize, Serialize};

use crate::error::{LimitsError, Result};

/// Binary symmetric channel model for a noisy primitive (per-bit flip rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BscSpec {
    pub epsilon: f64,
}

impl BscSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        let spec = Self { epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 0.5) {
            return Err(LimitsError::InvalidSpec(format!(
                "BSC crossover probability must lie in [0, 0.5), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Real AWGN channel at linear SNR rho.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwgnSpec {
    pub snr: f64,
}

impl AwgnSpec {
    pub fn new(snr: f64) -> Result<Self> {
        let spec = Self { snr };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(LimitsError::InvalidSpec(format!(
                "AWGN snr must be finite and > 0, got {}",
                self.snr
            )));
        }
        Ok(())
    }
}

/// One class of the word-level upset law: conditional probability `prob` of
/// landing in the class given an upset, uniform over `multiplicity` distinct
/// nonzero patterns. Class labels themselves are opaque.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McuClass {
    pub prob: f64,
    pub multiplicity: u64,
}

/// Word-level upset model: with probability alpha a w-bit word suffers an
/// upset whose pattern is drawn from the class mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordMcuSpec {
    pub word_bits: u32,
    pub alpha: f64,
    pub classes: Vec<McuClass>,
}

impl WordMcuSpec {
    pub fn new(word_bits: u32, alpha: f64, classes: Vec<McuClass>) -> Result<Self> {
        let spec = Self { word_bits, alpha, classes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_bits == 0 {
            return Err(LimitsError::InvalidSpec("word_bits must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(LimitsError::InvalidSpec(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        let mut total_prob = 0.0;
        let mut total_patterns: u128 = 0;
        for class in &self.classes {
            if !(class.prob >= 0.0 && class.prob <= 1.0) {
                return Err(LimitsError::InvalidSpec(format!(
                    "class probability must lie in [0, 1], got {}",
                    class.prob
                )));
            }
            if class.multiplicity == 0 {
                return Err(LimitsError::InvalidSpec(
                    "class multiplicity must be >= 1".into(),
                ));
            }
            total_prob += class.prob;
            total_patterns += class.multiplicity as u128;
        }
        if (total_prob - 1.0).abs() > 1e-12 {
            return Err(LimitsError::InvalidSpec(format!(
                "class probabilities must sum to 1 within 1e-12, got {total_prob}"
            )));
        }
        if self.word_bits < 128 {
            let nonzero_patterns = (1u128 << self.word_bits) - 1;
            if total_patterns > nonzero_patterns {
                return Err(LimitsError::InvalidSpec(format!(
                    "classes claim {total_patterns} nonzero patterns but a {}-bit word has only {nonzero_patterns}",
                    self.word_bits
                )));
            }
        }
        Ok(())
    }
}

/// A noisy primitive class for heterogeneous supplies: per-use capacity and
/// per-instance use budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveClass {
    pub capacity: f64,
    pub budget: f64,
}

/// Effective per-bit capacity of a word-level primitive. The value is the raw
/// 1 - H(E)/w; under the pattern-count invariant it cannot actually go
/// negative, but it is reported unclamped with a flag so downstream code can
/// decide (supplies treat a flagged value as 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McuEffectiveCapacity {
    pub value: f64,
    pub negative: bool,
}

/// Binary entropy in bits, with 0 log 0 = 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LimitsError::Domain(format!(
            "binary entropy needs a probability in [0, 1], got {p}"
        )));
    }
    Ok(h2(p))
}

/// Internal entropy kernel. log2(1-p) goes through ln_1p so values near the
/// endpoints keep full precision.
fn h2(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    let log2_q = (-p).ln_1p() / std::f64::consts::LN_2;
    -(p * p.log2() + q * log2_q)
}

/// C_gate = 1 - h2(eps), bits per primitive use.
pub fn bsc_capacity(spec: &BscSpec) -> f64 {
    1.0 - h2(spec.epsilon)
}

/// C_ch = (1/2) log2(1 + rho), bits per channel use.
pub fn awgn_capacity(spec: &AwgnSpec) -> f64 {
    0.5 * spec.snr.ln_1p() / std::f64::consts::LN_2
}

/// V_BSC = eps(1-eps) log2^2((1-eps)/eps); 0 at the degenerate flip rates.
pub fn bsc_dispersion(spec: &BscSpec) -> f64 {
    let eps = spec.epsilon;
    if eps == 0.0 || eps == 0.5 {
        return 0.0;
    }
    let log_ratio = ((1.0 - eps) / eps).log2();
    eps * (1.0 - eps) * log_ratio * log_ratio
}

/// V_AWGN = rho(rho+2)/(2(rho+1)^2) * log2^2(e).
pub fn awgn_dispersion(spec: &AwgnSpec) -> f64 {
    let rho = spec.snr;
    let log2e = std::f64::consts::LOG2_E;
    (rho * (rho + 2.0)) / (2.0 * (rho + 1.0) * (rho + 1.0)) * log2e * log2e
}

/// Gallager E0 for the BSC with uniform input, in exponent-bits.
pub fn gallager_e0_bsc(rho_g: f64, spec: &BscSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_g) {
        return Err(LimitsError::Domain(format!(
            "Gallager tilt rho_g must lie in [0, 1], got {rho_g}"
        )));
    }
    Ok(e0_bsc(rho_g, spec.epsilon))
}

fn e0_bsc(rho_g: f64, eps: f64) -> f64 {
    let inv = 1.0 / (1.0 + rho_g);
    rho_g - (1.0 + rho_g) * ((1.0 - eps).powf(inv) + eps.powf(inv)).log2()
}

/// Random-coding exponent E_r(rate) = max_{rho_g in [0,1]} E0(rho_g) - rho_g rate.
///
/// 256-point coarse grid followed by golden-section refinement of the best
/// bracket down to width 1e-9; grid ties go to the smaller tilt.
pub fn random_coding_exponent_bsc(rate: f64, spec: &BscSpec) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(LimitsError::Domain(format!(
            "rate must be nonnegative, got {rate}"
        )));
    }
    let eps = spec.epsilon;
    let f = |rho: f64| e0_bsc(rho, eps) - rho * rate;

    const GRID: usize = 256;
    let mut best_i = 0;
    let mut best_v = f(0.0);
    for i in 1..GRID {
        let v = f(i as f64 / (GRID - 1) as f64);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let step = 1.0 / (GRID - 1) as f64;
    let mut lo = (best_i as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_i + 1) as f64 * step).min(1.0);

    // golden-section maximization on the bracket
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-9 {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    // the grid includes rho=0 where the objective is 0, so the max is >= 0
    Ok(best_v.max(f1).max(f2))
}

/// Word-level error entropy H(E) of the upset law, in bits:
/// h2(alpha) + alpha (H(P) + sum_k P_k log2 N_k).
pub fn mcu_error_entropy(spec: &WordMcuSpec) -> f64 {
    let alpha = spec.alpha;
    let mut class_term = 0.0;
    for class in &spec.classes {
        if class.prob > 0.0 {
            class_term += class.prob * (-(class.prob.log2()) + (class.multiplicity as f64).log2());
        }
    }
    h2(alpha) + alpha * class_term
}

/// Effective capacity per bit materialization, 1 - H(E)/w, unclamped.
pub fn mcu_effective_capacity(spec: &WordMcuSpec) -> McuEffectiveCapacity {
    let value = 1.0 - mcu_error_entropy(spec) / spec.word_bits as f64;
    McuEffectiveCapacity { value, negative: value < 0.0 }
}

/// Effective per-bit dispersion Var[-log2 P_E(E)] / w of the upset law.
///
/// Exact enumeration over the pattern pmf, grouped by class (all patterns in
/// a class share one probability). Words wider than 16 bits are rejected:
/// the contract promises enumerated exactness only on that range.
pub fn mcu_effective_dispersion(spec: &WordMcuSpec) -> Result<f64> {
    if spec.word_bits > 16 {
        return Err(LimitsError::Unsupported(format!(
            "effective dispersion is enumerated exactly only for word_bits <= 16, got {}",
            spec.word_bits
        )));
    }
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut tally = |p: f64, count: f64| {
        if p > 0.0 {
            let v = -p.log2();
            mean += count * p * v;
            second += count * p * v * v;
        }
    };
    tally(1.0 - spec.alpha, 1.0);
    for class in &spec.classes {
        let per_pattern = spec.alpha * class.prob / class.multiplicity as f64;
        tally(per_pattern, class.multiplicity as f64);
    }
    Ok((second - mean * mean) / spec.word_bits as f64)
}

/// Heterogeneous compute supply: sum of budget x capacity over primitive classes.
pub fn hetero_supply(classes: &[PrimitiveClass]) -> f64 {
    classes.iter().map(|c| c.budget * c.capacity).sum()
}
