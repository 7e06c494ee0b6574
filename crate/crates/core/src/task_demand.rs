//! Indirect rate-distortion demand for Gaussian estimation and Fano demand
//! for classification.
//!
//! Infeasible demands (target below the MMSE floor) are reported as
//! f64::INFINITY so supply-demand comparisons stay a total order; trivially
//! satisfied targets report 0 bits.

use serde::{Deserialize, Serialize};

use crate::error::{LimitsError, Result};

/// Scalar source X with observation Y = X + V, both Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarGaussianSource {
    pub var_x: f64,
    pub var_v: f64,
}

impl ScalarGaussianSource {
    pub fn new(var_x: f64, var_v: f64) -> Result<Self> {
        let src = Self { var_x, var_v };
        src.validate()?;
        Ok(src)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.var_x > 0.0 && self.var_x.is_finite()) {
            return Err(LimitsError::InvalidSpec(format!(
                "var_x must be finite and > 0, got {}",
                self.var_x
            )));
        }
        if !(self.var_v >= 0.0 && self.var_v.is_finite()) {
            return Err(LimitsError::InvalidSpec(format!(
                "var_v must be finite and >= 0, got {}",
                self.var_v
            )));
        }
        Ok(())
    }
}

/// Vector source with commuting (diagonal) covariances, componentwise
/// Y_i = X_i + V_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalGaussianSource {
    var_x: Vec<f64>,
    var_v: Vec<f64>,
}

impl DiagonalGaussianSource {
    pub fn new(var_x: Vec<f64>, var_v: Vec<f64>) -> Result<Self> {
        if var_x.is_empty() || var_x.len() != var_v.len() {
            return Err(LimitsError::InvalidSpec(format!(
                "variance lists must be nonempty and equal length, got {} and {}",
                var_x.len(),
                var_v.len()
            )));
        }
        for (&x, &v) in var_x.iter().zip(&var_v) {
            ScalarGaussianSource::new(x, v)?;
        }
        Ok(Self { var_x, var_v })
    }

    pub fn dim(&self) -> usize {
        self.var_x.len()
    }

    pub fn var_x(&self) -> &[f64] {
        &self.var_x
    }

    pub fn var_v(&self) -> &[f64] {
        &self.var_v
    }

    /// Eigenvalues of the estimand covariance: lam_i = var_x_i^2 / (var_x_i + var_v_i).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.var_x
            .iter()
            .zip(&self.var_v)
            .map(|(&x, &v)| x * x / (x + v))
            .collect()
    }

    /// Trace of the conditional covariance, the unremovable estimation floor.
    pub fn mmse_floor(&self) -> f64 {
        self.var_x
            .iter()
            .zip(&self.var_v)
            .map(|(&x, &v)| x * v / (x + v))
            .sum()
    }
}

/// Classification into 2^label_bits uniform labels; label_bits is the task
/// entropy in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationTask {
    pub label_bits: f64,
}

impl ClassificationTask {
    pub fn new(label_bits: f64) -> Result<Self> {
        if !(label_bits > 0.0 && label_bits.is_finite()) {
            return Err(LimitsError::InvalidSpec(format!(
                "label_bits must be finite and > 0, got {label_bits}"
            )));
        }
        Ok(Self { label_bits })
    }
}

/// Var(X | Y) for the scalar source.
pub fn conditional_variance(src: &ScalarGaussianSource) -> f64 {
    src.var_x * src.var_v / (src.var_x + src.var_v)
}

/// Scalar remote rate-distortion demand R(D) in bits per sample.
pub fn scalar_demand(src: &ScalarGaussianSource, distortion: f64) -> Result<f64> {
    if !(distortion > 0.0) {
        return Err(LimitsError::Domain(format!(
            "distortion target must be > 0, got {distortion}"
        )));
    }
    let floor = conditional_variance(src);
    if distortion <= floor {
        return Ok(f64::INFINITY);
    }
    if distortion >= src.var_x {
        return Ok(0.0);
    }
    Ok(0.5 * ((src.var_x - floor) / (distortion - floor)).log2())
}

/// Distortion reached when `supply` bits per sample survive end to end.
pub fn scalar_distortion_at_supply(src: &ScalarGaussianSource, supply: f64) -> Result<f64> {
    if !(supply >= 0.0) {
        return Err(LimitsError::Domain(format!(
            "supply must be nonnegative, got {supply}"
        )));
    }
    let floor = conditional_variance(src);
    Ok(floor + (src.var_x - floor) * (-2.0 * supply).exp2())
}

/// Water level for a rate target, found by bisection per the contract.
/// The bracket [min lam 2^{-2R}, max lam] always straddles the solution.
fn water_level_for_rate(lam: &[f64], rate: f64) -> f64 {
    let rate_at = |nu: f64| -> f64 {
        lam.iter()
            .filter(|&&l| l > nu)
            .map(|&l| 0.5 * (l / nu).log2())
            .sum()
    };
    let max_lam = lam.iter().cloned().fold(f64::MIN, f64::max);
    let min_lam = lam.iter().cloned().fold(f64::MAX, f64::min);
    let mut lo = min_lam * (-2.0 * rate).exp2();
    let mut hi = max_lam;
    for _ in 0..200 {
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if rate_at(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Water-filling distortion D(R) = floor + sum_i min(nu, lam_i).
pub fn waterfill_distortion(src: &DiagonalGaussianSource, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(LimitsError::Domain(format!(
            "rate must be nonnegative, got {rate}"
        )));
    }
    let lam = src.eigenvalues();
    if rate == 0.0 {
        return Ok(src.mmse_floor() + lam.iter().sum::<f64>());
    }
    let nu = water_level_for_rate(&lam, rate);
    Ok(src.mmse_floor() + lam.iter().map(|&l| l.min(nu)).sum::<f64>())
}

/// Inverse water-filling R(D): bisection on the (monotone) water level so
/// that the flooded mass matches the distortion excess over the floor.
pub fn waterfill_rate(src: &DiagonalGaussianSource, distortion: f64) -> Result<f64> {
    if !(distortion > 0.0) {
        return Err(LimitsError::Domain(format!(
            "distortion target must be > 0, got {distortion}"
        )));
    }
    let floor = src.mmse_floor();
    if distortion <= floor {
        return Ok(f64::INFINITY);
    }
    let lam = src.eigenvalues();
    let excess_at = |nu: f64| lam.iter().map(|&l| l.min(nu)).sum::<f64>();
    let max_lam = lam.iter().cloned().fold(f64::MIN, f64::max);
    let target = distortion - floor;
    if target >= excess_at(max_lam) {
        return Ok(0.0);
    }
    let mut lo = 0.0f64;
    let mut hi = max_lam;
    for _ in 0..200 {
        if (hi - lo) <= 1e-12 * max_lam {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    Ok(lam
        .iter()
        .filter(|&&l| l > nu)
        .map(|&l| 0.5 * (l / nu).log2())
        .sum())
}

/// Closed-form isotropic D(R): every mode stays active at every rate.
pub fn isotropic_distortion(p: usize, var_x: f64, var_v: f64, rate: f64) -> Result<f64> {
    if p == 0 {
        return Err(LimitsError::Domain("dimension must be >= 1".into()));
    }
    if !(rate >= 0.0) {
        return Err(LimitsError::Domain(format!(
            "rate must be nonnegative, got {rate}"
        )));
    }
    ScalarGaussianSource::new(var_x, var_v)?;
    let p_f = p as f64;
    let floor = var_x * var_v / (var_x + var_v);
    let lam = var_x * var_x / (var_x + var_v);
    Ok(p_f * floor + p_f * lam * (-2.0 * rate / p_f).exp2())
}

/// Symbol-by-symbol analog (uncoded) baseline at one channel use per
/// coordinate: floor + (sum lam) 2^{-2 C_ch}.
pub fn uncoded_vector_mse(src: &DiagonalGaussianSource, channel_capacity: f64) -> Result<f64> {
    if !(channel_capacity >= 0.0) {
        return Err(LimitsError::Domain(format!(
            "channel capacity must be nonnegative, got {channel_capacity}"
        )));
    }
    let lam_sum: f64 = src.eigenvalues().iter().sum();
    Ok(src.mmse_floor() + lam_sum * (-2.0 * channel_capacity).exp2())
}

/// Fano lower bound on classification error given the surviving supply.
pub fn fano_error_lower_bound(task: &ClassificationTask, supply: f64) -> f64 {
    (1.0 - (supply + 1.0) / task.label_bits).max(0.0)
}
