//! Monte Carlo validation of the analytic limits on the committed
//! (no-bypass) bit-flip substrate.
//!
//! Randomness scheme (v1, fixed for reproducibility): every trial gets its
//! own ChaCha12 stream. The 256-bit trial key is produced by a SplitMix64
//! walk seeded with `master_seed XOR (trial_index * 0xD1B54A32D192ED03)`,
//! taking four consecutive outputs in little-endian byte order. ChaCha12 is
//! counter-based, so streams are splittable and platform-independent.
//! Uniform doubles take the top 53 bits of a 64-bit draw; Gaussians use the
//! Marsaglia polar method. Trials are aggregated in index order with
//! commutative integer counters wherever the statistic allows, so estimates
//! are bit-identical regardless of how trials are scheduled.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use infolim_core::channel_models::{bsc_capacity, BscSpec, WordMcuSpec};
use infolim_core::error::{LimitsError, Result};
use infolim_core::task_demand::{fano_error_lower_bound, ClassificationTask, ScalarGaussianSource};

const SPLITMIX_GAMMA: u64 = 0x9E3779B97F4A7C15;
const INDEX_SALT: u64 = 0xD1B54A32D192ED03;

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(SPLITMIX_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha12Rng {
    let mut state = master_seed ^ trial_index.wrapping_mul(INDEX_SALT);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

fn uniform(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn bernoulli(rng: &mut ChaCha12Rng, p: f64) -> bool {
    uniform(rng) < p
}

/// Unbiased-enough integer below n (fixed-point multiply; bias < 2^-64).
fn below(rng: &mut ChaCha12Rng, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

fn gaussian_pair(rng: &mut ChaCha12Rng) -> (f64, f64) {
    loop {
        let u = 2.0 * uniform(rng) - 1.0;
        let v = 2.0 * uniform(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let mul = (-2.0 * s.ln() / s).sqrt();
            return (u * mul, v * mul);
        }
    }
}

fn check_flip_prob(name: &str, eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(LimitsError::Domain(format!(
            "{name} must lie in [0, 0.5), got {eps}"
        )));
    }
    Ok(())
}

/// Trial count, master seed, and an advisory parallelism hint. The hint
/// never influences results: per-trial streams make scheduling irrelevant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub parallelism_hint: Option<u32>,
}

impl TrialConfig {
    pub fn new(trials: u64, master_seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(LimitsError::Domain("trial count must be at least 1".into()));
        }
        Ok(TrialConfig { trials, master_seed, parallelism_hint: None })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(LimitsError::Domain("trial count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sample mean with its standard error and a symmetric 95% interval. No
/// empirical number leaves this crate without the trials count attached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub trials: u64,
}

impl EmpiricalEstimate {
    pub fn from_bernoulli(successes: u64, trials: u64) -> Self {
        let t = trials as f64;
        let mean = successes as f64 / t;
        let var = if trials > 1 {
            successes as f64 * (t - successes as f64) / (t * (t - 1.0))
        } else {
            0.0
        };
        Self::from_moments(mean, var, trials)
    }

    pub fn from_sums(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let t = trials as f64;
        let mean = sum / t;
        let var = if trials > 1 {
            ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self::from_moments(mean, var, trials)
    }

    fn from_moments(mean: f64, sample_var: f64, trials: u64) -> Self {
        let std_err = (sample_var / trials as f64).sqrt();
        EmpiricalEstimate {
            mean,
            std_err,
            ci95_low: mean - 1.96 * std_err,
            ci95_high: mean + 1.96 * std_err,
            trials,
        }
    }
}

/// Word-error law driving the detector simulations: a single bit through a
/// BSC or a word-level MCU upset law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ErrorLaw {
    Bsc(BscSpec),
    Mcu(WordMcuSpec),
}

impl ErrorLaw {
    fn validate(&self) -> Result<()> {
        match self {
            ErrorLaw::Bsc(s) => s.validate(),
            ErrorLaw::Mcu(s) => s.validate(),
        }
    }

    /// Sample one error pattern id; 0 is the clean pattern, class patterns
    /// are numbered consecutively after it.
    fn sample(&self, rng: &mut ChaCha12Rng) -> u64 {
        match self {
            ErrorLaw::Bsc(s) => u64::from(bernoulli(rng, s.epsilon)),
            ErrorLaw::Mcu(s) => {
                if !bernoulli(rng, s.alpha) {
                    return 0;
                }
                let u = uniform(rng);
                let mut cum = 0.0;
                let mut offset = 1u64;
                for (i, class) in s.classes.iter().enumerate() {
                    cum += class.prob;
                    if u < cum || i + 1 == s.classes.len() {
                        return offset + below(rng, class.multiplicity);
                    }
                    offset += class.multiplicity;
                }
                0
            }
        }
    }
}

/// Empirical three-outcome split; `counts` are (OK, UE, ER) and always
/// partition the trial count exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulatedOutcomes {
    pub ok: EmpiricalEstimate,
    pub ue: EmpiricalEstimate,
    pub er: EmpiricalEstimate,
    pub counts: [u64; 3],
}

/// One stage of a classification chain: `budget_m` primitive uses shared
/// round-robin by the label bits, each a BSC(epsilon) materialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub budget_m: u64,
    pub epsilon: f64,
}

/// Classification run outcome plus the Fano floor it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub error: EmpiricalEstimate,
    pub fano_bound: f64,
    pub supply_bits: f64,
}

/// Clipped-estimator outcome. The UE fields are absent when no trial was
/// corrupted; `clipping_bound` is 2 E[X^2 | UE] + 2 A^2 with the conditional
/// moment estimated from the corrupted trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClippedResult {
    pub mse: EmpiricalEstimate,
    pub ue_mse: Option<EmpiricalEstimate>,
    pub ue_second_moment: Option<f64>,
    pub clipping_bound: Option<f64>,
}

/// Flip each bit independently with probability epsilon; deterministic for
/// a given seed.
pub fn simulate_materializations(bits: &[bool], epsilon: f64, seed: u64) -> Result<Vec<bool>> {
    check_flip_prob("epsilon", epsilon)?;
    let mut rng = trial_rng(seed, 0);
    Ok(bits.iter().map(|&b| b ^ bernoulli(&mut rng, epsilon)).collect())
}

/// r-replica duplicate-and-compare: per trial, r i.i.d. error patterns; all
/// equal and clean is OK, all equal and corrupted is UE, disagreement is ER.
pub fn simulate_dup_compare(
    law: &ErrorLaw,
    replicas: u32,
    cfg: &TrialConfig,
) -> Result<SimulatedOutcomes> {
    law.validate()?;
    cfg.validate()?;
    if replicas < 2 {
        return Err(LimitsError::Domain(format!(
            "duplicate-and-compare needs at least 2 replicas, got {replicas}"
        )));
    }
    let mut counts = [0u64; 3];
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.master_seed, i);
        let first = law.sample(&mut rng);
        let mut agree = true;
        for _ in 1..replicas {
            if law.sample(&mut rng) != first {
                agree = false;
            }
        }
        let slot = if !agree {
            2
        } else if first == 0 {
            0
        } else {
            1
        };
        counts[slot] += 1;
    }
    Ok(SimulatedOutcomes {
        ok: EmpiricalEstimate::from_bernoulli(counts[0], cfg.trials),
        ue: EmpiricalEstimate::from_bernoulli(counts[1], cfg.trials),
        er: EmpiricalEstimate::from_bernoulli(counts[2], cfg.trials),
        counts,
    })
}

fn majority_vote(rng: &mut ChaCha12Rng, sent: bool, reps: u64, eps: f64) -> bool {
    if reps == 0 {
        return bernoulli(rng, 0.5);
    }
    let mut ones = 0u64;
    for _ in 0..reps {
        if sent ^ bernoulli(rng, eps) {
            ones += 1;
        }
    }
    match (2 * ones).cmp(&reps) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => bernoulli(rng, 0.5),
    }
}

/// floor(m/k)-fold repetition with majority vote (coin-flip ties) on each of
/// the k message bits; reports the empirical block error rate. An achievable
/// point, deliberately far from optimal coding.
pub fn simulate_repetition_code(
    message_bits: u64,
    budget_m: u64,
    epsilon: f64,
    cfg: &TrialConfig,
) -> Result<EmpiricalEstimate> {
    if message_bits == 0 {
        return Err(LimitsError::Domain("message must have at least one bit".into()));
    }
    if budget_m < message_bits {
        return Err(LimitsError::Domain(format!(
            "budget {budget_m} cannot repeat each of {message_bits} bits even once"
        )));
    }
    check_flip_prob("epsilon", epsilon)?;
    cfg.validate()?;
    let reps = budget_m / message_bits;
    let mut errors = 0u64;
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.master_seed, i);
        for _ in 0..message_bits {
            let sent = bernoulli(&mut rng, 0.5);
            if majority_vote(&mut rng, sent, reps, epsilon) != sent {
                errors += 1;
                break;
            }
        }
    }
    Ok(EmpiricalEstimate::from_bernoulli(errors, cfg.trials))
}

/// Symbol-by-symbol analog baseline: scale the observation Y = X + V to the
/// channel power, add unit-variance noise, MMSE-estimate X, and average the
/// squared error.
pub fn simulate_uncoded_gaussian(
    src: &ScalarGaussianSource,
    snr: f64,
    cfg: &TrialConfig,
) -> Result<EmpiricalEstimate> {
    src.validate()?;
    cfg.validate()?;
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(LimitsError::Domain(format!("snr must be positive, got {snr}")));
    }
    let var_y = src.var_x + src.var_v;
    let scale = (snr / var_y).sqrt();
    // E[X | Z] = scale var_x / (snr + 1) * Z for Z = scale Y + W
    let wiener = scale * src.var_x / (snr + 1.0);
    let (sx, sv) = (src.var_x.sqrt(), src.var_v.sqrt());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.master_seed, i);
        let (gx, gv) = gaussian_pair(&mut rng);
        let (gw, _) = gaussian_pair(&mut rng);
        let x = sx * gx;
        let y = x + sv * gv;
        let z = scale * y + gw;
        let err = wiener * z - x;
        sum += err * err;
        sum_sq += err * err * err * err;
    }
    Ok(EmpiricalEstimate::from_sums(sum, sum_sq, cfg.trials))
}

/// Uniform q-bit labels through a chain of repetition-coded BSC stages.
/// Stage budgets are shared round-robin (the first `m mod q` bits get the
/// extra use); a bit with no uses at all is a fresh coin flip. The empirical
/// error is checked against the Fano floor at the chain's bottleneck supply,
/// and a violation beyond 3 sigma is a hard error carrying the seed.
pub fn simulate_classification(
    label_bits: u32,
    stages: &[StageSpec],
    cfg: &TrialConfig,
) -> Result<ClassificationResult> {
    if label_bits == 0 {
        return Err(LimitsError::Domain("labels need at least one bit".into()));
    }
    if stages.is_empty() {
        return Err(LimitsError::Domain("the pipeline needs at least one stage".into()));
    }
    for s in stages {
        check_flip_prob("stage epsilon", s.epsilon)?;
    }
    cfg.validate()?;

    let q = label_bits as u64;
    let mut supply_bits = f64::INFINITY;
    for s in stages {
        let c = bsc_capacity(&BscSpec::new(s.epsilon)?);
        supply_bits = supply_bits.min(s.budget_m as f64 * c);
    }

    let mut errors = 0u64;
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.master_seed, i);
        let label: Vec<bool> = (0..q).map(|_| bernoulli(&mut rng, 0.5)).collect();
        let mut current = label.clone();
        for s in stages {
            let base = s.budget_m / q;
            let extra = s.budget_m % q;
            current = current
                .iter()
                .enumerate()
                .map(|(j, &bit)| {
                    let reps = base + u64::from((j as u64) < extra);
                    majority_vote(&mut rng, bit, reps, s.epsilon)
                })
                .collect();
        }
        if current != label {
            errors += 1;
        }
    }
    let error = EmpiricalEstimate::from_bernoulli(errors, cfg.trials);
    let fano_bound = fano_error_lower_bound(&ClassificationTask::new(q as f64)?, supply_bits);
    if error.mean < fano_bound - 3.0 * error.std_err {
        return Err(LimitsError::Violation(format!(
            "empirical classification error {} fell below the Fano floor {fano_bound} \
             (master_seed {}, trials {})",
            error.mean, cfg.master_seed, cfg.trials
        )));
    }
    Ok(ClassificationResult { error, fano_bound, supply_bits })
}

/// MMSE estimate of X from Y = X + V, corrupted to a huge adversarial value
/// with the given probability, then clipped to [-A, A]. Verifies the clipped
/// UE branch against 2 E[X^2 | UE] + 2 A^2.
pub fn simulate_clipped_estimator(
    src: &ScalarGaussianSource,
    corruption_prob: f64,
    clip_range: f64,
    cfg: &TrialConfig,
) -> Result<ClippedResult> {
    src.validate()?;
    cfg.validate()?;
    if !(0.0..=1.0).contains(&corruption_prob) || !corruption_prob.is_finite() {
        return Err(LimitsError::Domain(format!(
            "corruption probability must lie in [0, 1], got {corruption_prob}"
        )));
    }
    if !(clip_range > 0.0 && clip_range.is_finite()) {
        return Err(LimitsError::Domain(format!(
            "clip range must be positive, got {clip_range}"
        )));
    }
    let a = src.var_x / (src.var_x + src.var_v);
    let (sx, sv) = (src.var_x.sqrt(), src.var_v.sqrt());
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let (mut ue_sum, mut ue_sum_sq, mut ue_x_sq) = (0.0, 0.0, 0.0);
    let mut ue_trials = 0u64;
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.master_seed, i);
        let (gx, gv) = gaussian_pair(&mut rng);
        let x = sx * gx;
        let mut est = a * (x + sv * gv);
        let corrupted = bernoulli(&mut rng, corruption_prob);
        if corrupted {
            est = 1e300;
        }
        est = est.clamp(-clip_range, clip_range);
        let sq = (est - x) * (est - x);
        sum += sq;
        sum_sq += sq * sq;
        if corrupted {
            ue_trials += 1;
            ue_sum += sq;
            ue_sum_sq += sq * sq;
            ue_x_sq += x * x;
        }
    }
    let mse = EmpiricalEstimate::from_sums(sum, sum_sq, cfg.trials);
    if ue_trials == 0 {
        return Ok(ClippedResult { mse, ue_mse: None, ue_second_moment: None, clipping_bound: None });
    }
    let ue_mse = EmpiricalEstimate::from_sums(ue_sum, ue_sum_sq, ue_trials);
    let second = ue_x_sq / ue_trials as f64;
    let bound = 2.0 * second + 2.0 * clip_range * clip_range;
    if ue_mse.mean > bound + 3.0 * ue_mse.std_err {
        return Err(LimitsError::Violation(format!(
            "clipped UE MSE {} exceeded the bound {bound} (master_seed {}, trials {})",
            ue_mse.mean, cfg.master_seed, cfg.trials
        )));
    }
    Ok(ClippedResult {
        mse,
        ue_mse: Some(ue_mse),
        ue_second_moment: Some(second),
        clipping_bound: Some(bound),
    })
}
