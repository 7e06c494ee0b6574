//! Scenario files: versioned JSON, strict about unknown fields so a typo
//! cannot silently fake a verdict. Loading resolves and validates every
//! referenced component, including the optional graph file, so commands can
//! assume a well-formed scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};

use infolim_core::channel_models::{
    awgn_capacity, awgn_dispersion, bsc_capacity, bsc_dispersion, mcu_effective_capacity,
    mcu_effective_dispersion, AwgnSpec, BscSpec, WordMcuSpec,
};
use infolim_core::compute_graph::{ComputationGraph, GraphSpec};
use infolim_core::error::{LimitsError, Result};
use infolim_core::finite_blocklength::ErrorBudget;
use infolim_core::supply_converse::{check_feasibility, ArchitectureSpec, BudgetSpec};
use infolim_core::task_demand::{DiagonalGaussianSource, ScalarGaussianSource};
use infolim_core::throughput::PerSecondBudget;
use infolim_sim::StageSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SourceSpec {
    Scalar { var_x: f64, var_v: f64 },
    Diagonal { var_x: Vec<f64>, var_v: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ChannelSpec {
    Awgn { snr: f64 },
    Bsc { epsilon: f64 },
    Fixed {
        capacity: f64,
        #[serde(default)]
        dispersion: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PrimitiveSpec {
    Bsc { epsilon: f64 },
    Mcu(WordMcuSpec),
    Fixed {
        capacity: f64,
        #[serde(default)]
        dispersion: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThroughputBlock {
    pub channel_uses_per_sec: f64,
    pub primitives_per_sec: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub replicas: Option<u32>,
    #[serde(default)]
    pub interface_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum SimOp {
    Uncoded,
    DupCompare { replicas: u32 },
    Repetition { message_bits: u64 },
    Classification { label_bits: u32, stages: Vec<StageSpec> },
    Clipped { corruption_prob: f64, clip_range: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub parallelism_hint: Option<u32>,
    pub op: SimOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub channel_uses: f64,
    pub primitive: PrimitiveSpec,
    pub gate_budget: f64,
    pub architecture: ArchitectureSpec,
    #[serde(default)]
    pub distortion_target: Option<f64>,
    #[serde(default)]
    pub block_len: Option<u64>,
    #[serde(default)]
    pub graph_file: Option<String>,
    #[serde(default)]
    pub error_budget: Option<ErrorBudget>,
    #[serde(default)]
    pub throughput: Option<ThroughputBlock>,
    #[serde(default)]
    pub simulation: Option<SimulationBlock>,
}

/// A scenario with its referenced graph already parsed and validated.
#[derive(Debug)]
pub struct Loaded {
    pub scn: Scenario,
    pub graph: Option<ComputationGraph>,
}

impl ChannelSpec {
    pub fn capacity(&self) -> Result<f64> {
        match self {
            ChannelSpec::Awgn { snr } => Ok(awgn_capacity(&AwgnSpec::new(*snr)?)),
            ChannelSpec::Bsc { epsilon } => Ok(bsc_capacity(&BscSpec::new(*epsilon)?)),
            ChannelSpec::Fixed { capacity, .. } => {
                if !capacity.is_finite() || *capacity < 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "fixed channel capacity must be finite and nonnegative, got {capacity}"
                    )));
                }
                Ok(*capacity)
            }
        }
    }

    pub fn dispersion(&self) -> Result<f64> {
        match self {
            ChannelSpec::Awgn { snr } => Ok(awgn_dispersion(&AwgnSpec::new(*snr)?)),
            ChannelSpec::Bsc { epsilon } => Ok(bsc_dispersion(&BscSpec::new(*epsilon)?)),
            ChannelSpec::Fixed { dispersion: Some(v), .. } if v.is_finite() && *v >= 0.0 => Ok(*v),
            ChannelSpec::Fixed { .. } => Err(LimitsError::InvalidSpec(
                "the fixed channel model needs a nonnegative dispersion for finite-T analysis"
                    .into(),
            )),
        }
    }
}

impl PrimitiveSpec {
    /// Per-use information supply. A negative MCU effective capacity clamps
    /// to zero: such a word carries nothing useful.
    pub fn capacity(&self) -> Result<f64> {
        match self {
            PrimitiveSpec::Bsc { epsilon } => Ok(bsc_capacity(&BscSpec::new(*epsilon)?)),
            PrimitiveSpec::Mcu(spec) => {
                spec.validate()?;
                Ok(mcu_effective_capacity(spec).value.max(0.0))
            }
            PrimitiveSpec::Fixed { capacity, .. } => {
                if !capacity.is_finite() || *capacity < 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "fixed gate capacity must be finite and nonnegative, got {capacity}"
                    )));
                }
                Ok(*capacity)
            }
        }
    }

    pub fn dispersion(&self) -> Result<f64> {
        match self {
            PrimitiveSpec::Bsc { epsilon } => Ok(bsc_dispersion(&BscSpec::new(*epsilon)?)),
            PrimitiveSpec::Mcu(spec) => mcu_effective_dispersion(spec),
            PrimitiveSpec::Fixed { dispersion: Some(v), .. } if v.is_finite() && *v >= 0.0 => {
                Ok(*v)
            }
            PrimitiveSpec::Fixed { .. } => Err(LimitsError::InvalidSpec(
                "the fixed gate model needs a nonnegative dispersion for finite-T analysis".into(),
            )),
        }
    }
}

impl Scenario {
    /// Per-instance budgets with capacities resolved from the models.
    pub fn budget(&self) -> Result<BudgetSpec> {
        BudgetSpec::new(
            self.channel_uses,
            self.channel.capacity()?,
            self.gate_budget,
            self.primitive.capacity()?,
        )
    }

    pub fn scalar_source(&self) -> Result<ScalarGaussianSource> {
        match &self.source {
            SourceSpec::Scalar { var_x, var_v } => ScalarGaussianSource::new(*var_x, *var_v),
            SourceSpec::Diagonal { .. } => Err(LimitsError::Unsupported(
                "this operation needs a scalar source; the scenario declares a diagonal one"
                    .into(),
            )),
        }
    }

    pub fn diagonal_source(&self) -> Result<DiagonalGaussianSource> {
        match &self.source {
            SourceSpec::Scalar { var_x, var_v } => {
                DiagonalGaussianSource::new(vec![*var_x], vec![*var_v])
            }
            SourceSpec::Diagonal { var_x, var_v } => {
                DiagonalGaussianSource::new(var_x.clone(), var_v.clone())
            }
        }
    }

    pub fn distortion_target(&self) -> Result<f64> {
        self.distortion_target.ok_or_else(|| {
            LimitsError::InvalidSpec(
                "no distortion target: set distortion_target in the scenario or pass --distortion"
                    .into(),
            )
        })
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LimitsError::InvalidSpec(format!(
                "unsupported scenario schema version {} (this tool reads version {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.diagonal_source()?;
        let budget = self.budget()?;
        // exercises the architecture invariants (nonnegative fields, stage
        // sums within the gate budget, noisy-logic parameter ranges)
        check_feasibility(&self.architecture, &budget, 0.0)?;
        if let Some(d) = self.distortion_target {
            if !(d > 0.0 && d.is_finite()) {
                return Err(LimitsError::Domain(format!(
                    "distortion_target must be positive, got {d}"
                )));
            }
        }
        if let Some(t) = self.block_len {
            if t == 0 {
                return Err(LimitsError::Domain("block_len must be at least 1".into()));
            }
        }
        if let Some(eb) = &self.error_budget {
            eb.validate()?;
        }
        if let Some(tp) = &self.throughput {
            PerSecondBudget::new(tp.channel_uses_per_sec, tp.primitives_per_sec)?;
            if let Some(l) = tp.lambda {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(LimitsError::Domain(format!(
                        "throughput lambda must be positive, got {l}"
                    )));
                }
            }
            if let Some(b) = tp.interface_bits {
                if !b.is_finite() || b < 0.0 {
                    return Err(LimitsError::Domain(format!(
                        "interface_bits must be finite and nonnegative, got {b}"
                    )));
                }
            }
            if tp.replicas == Some(0) {
                return Err(LimitsError::Domain("replicas must be at least 1".into()));
            }
        }
        if let Some(sim) = &self.simulation {
            infolim_sim::TrialConfig::new(sim.trials, sim.master_seed)?;
        }
        Ok(())
    }
}

/// Read, parse, and validate a scenario file; the optional graph reference
/// is resolved relative to the scenario's directory and parsed eagerly.
pub fn load(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        LimitsError::InvalidSpec(format!("cannot read scenario {}: {e}", path.display()))
    })?;
    let scn: Scenario = serde_json::from_str(&text).map_err(|e| {
        LimitsError::InvalidSpec(format!("scenario parse error in {}: {e}", path.display()))
    })?;
    scn.validate()?;
    let graph = match &scn.graph_file {
        None => None,
        Some(rel) => {
            let gpath = path.parent().unwrap_or(Path::new(".")).join(rel);
            let gtext = std::fs::read_to_string(&gpath).map_err(|e| {
                LimitsError::InvalidSpec(format!(
                    "referenced graph file {} is not readable: {e}",
                    gpath.display()
                ))
            })?;
            let spec: GraphSpec = serde_json::from_str(&gtext).map_err(|e| {
                LimitsError::InvalidSpec(format!(
                    "graph parse error in {}: {e}",
                    gpath.display()
                ))
            })?;
            Some(spec.validate()?)
        }
    };
    Ok(Loaded { scn, graph })
}
