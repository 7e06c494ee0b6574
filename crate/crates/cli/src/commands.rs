//! One function per subcommand. Each returns a [`Report`]; verdict-style
//! commands mark infeasibility so the binary can honor `--strict`.

use clap::ValueEnum;

use infolim_core::channel_models::{
    awgn_capacity, bsc_capacity, bsc_dispersion, AwgnSpec, BscSpec, McuClass, WordMcuSpec,
};
use infolim_core::compute_graph::{combined_supply, min_cut_supply};
use infolim_core::error::{LimitsError, Result};
use infolim_core::finite_blocklength::{
    gaussian_na_distortion, na_feasibility, q_inv, ErrorBudget, NaConfig,
    GAUSSIAN_TASK_DISPERSION, NA_BENCHMARK_LABEL,
};
use infolim_core::supply_converse::{
    check_feasibility, noisy_logic_gate_supply, optimal_split_hard_separation,
    required_gate_budget, strict_gap_interval, ArchitectureSpec, BudgetSpec,
};
use infolim_core::tail_reliability::{
    dup_compare_outcomes, hash_bits_for_target, hash_ue_bound, mcu_dup_outcomes,
    message_outcomes, size_replicas_for_tail, DetectorSpec, InterfaceSpec,
};
use infolim_core::task_demand::{
    conditional_variance, fano_error_lower_bound, isotropic_distortion, scalar_demand,
    scalar_distortion_at_supply, uncoded_vector_mse, waterfill_distortion, waterfill_rate,
    ClassificationTask, DiagonalGaussianSource, ScalarGaussianSource,
};
use infolim_core::throughput::{
    distortion_floor_vs_lambda, lambda_max_estimation, lambda_max_with_replicas,
    per_instance_budgets, PerSecondBudget,
};
use infolim_sim::{
    simulate_classification, simulate_clipped_estimator, simulate_dup_compare,
    simulate_repetition_code, simulate_uncoded_gaussian, ErrorLaw, StageSpec, TrialConfig,
};

use crate::report::{Report, ReportRow};
use crate::scenario::{ChannelSpec, Loaded, PrimitiveSpec, SimOp, SourceSpec};

const P_CH_CUT: &str = "supply_converse::check_feasibility: channel cut n C_ch";
const P_COMP_CUT: &str = "supply_converse::check_feasibility: compute cut m C_gate";
const P_MIN_CUTS: &str = "supply_converse::check_feasibility: min over architecture cuts";
const P_HARD_SEP: &str =
    "supply_converse::supply_hard_separation: min(n C_ch, b + m_dec c_dec, b + m_task c_task)";
const P_K_STAGE: &str = "supply_converse::supply_k_stage: min(n C_ch, min_k m_k c_k)";
const P_SPLIT: &str =
    "supply_converse::optimal_split_hard_separation: equalize m_dec c_dec = m_rel + (m - m_dec) c_task";
const P_GAP: &str = "supply_converse::strict_gap_interval: ((m/2) C_gate, m C_gate)";
const P_LOGIC: &str =
    "supply_converse::noisy_logic_gate_supply: C_logic = min(1 - h2(delta), beta^d), beta = k_fan (1 - 2 delta)^2";
const P_REQ: &str = "supply_converse::required_gate_budget: m = demand / C_logic";
const P_FLOOR: &str = "task_demand::conditional_variance: floor = var_x var_v / (var_x + var_v)";
const P_SC_DEMAND: &str =
    "task_demand::scalar_demand: R(D) = max(0, (1/2) log2((var_x - floor)/(D - floor)))";
const P_SC_DIST: &str = "task_demand::scalar_distortion_at_supply: D = floor + (var_x - floor) 2^(-2 R)";
const P_VEC_FLOOR: &str = "task_demand::mmse_floor: floor = sum_i var_x,i var_v,i / (var_x,i + var_v,i)";
const P_EIGEN: &str = "task_demand::eigenvalues: lam_i = var_x,i^2 / (var_x,i + var_v,i)";
const P_WF_RATE: &str =
    "task_demand::waterfill_rate: R(D) = sum over lam_i > nu of (1/2) log2(lam_i / nu)";
const P_WF_DIST: &str = "task_demand::waterfill_distortion: D(R) = floor + sum_i min(nu, lam_i)";
const P_ISO: &str = "task_demand::isotropic_distortion: D(R) = p floor + p lam 2^(-2R/p)";
const P_ISO_RATIO: &str = "task_demand::isotropic_distortion: excess ratio 2^(2 dR / p) between supplies";
const P_UNCODED: &str = "task_demand::uncoded_vector_mse: D = floor + (sum_i lam_i) 2^(-2 C_ch)";
const P_FANO: &str = "task_demand::fano_error_lower_bound: Pe >= max(0, 1 - (R_sup + 1)/q)";
const P_MINCUT: &str = "compute_graph::min_cut_supply: min over s-t cuts of sum(m_e c_gate + b_e)";
const P_MAXFLOW: &str = "compute_graph::min_cut_supply: max-flow value (duality certificate)";
const P_COMBINED: &str = "compute_graph::combined_supply: min(n C_ch, compute min-cut)";
const P_DUP: &str = "tail_reliability::dup_compare_outcomes: p_ok, p_ue, p_er of r-way compare";
const P_MCU_DUP: &str = "tail_reliability::mcu_dup_outcomes: word OK/UE/ER under the MCU law";
const P_MSG: &str = "tail_reliability::message_outcomes: message OK/UE/ER across independent words";
const P_HASH_BITS: &str = "tail_reliability::hash_bits_for_target: least h with T 2^(-h) <= budget";
const P_HASH_UE: &str = "tail_reliability::hash_ue_bound: p_ue <= 2^(-h)";
const P_SIZING: &str = "tail_reliability::size_replicas_for_tail: least r <= 64 meeting the tail budget";
const P_CLIP: &str = "tail_reliability::clipping_ue_bound: d_ue <= 2 E[X^2 | UE] + 2 A^2";
const P_NA_DEMAND: &str = "finite_blocklength::na_task_demand: R + sqrt(v / T) Qinv(eps_src)";
const P_NA_FEAS: &str = "finite_blocklength::na_feasibility: NA demand vs min over NA cuts";
const P_NA_DIST: &str =
    "finite_blocklength::gaussian_na_distortion: D = floor + (var_x - floor) 2^(-2 R_eff)";
const P_JSCC: &str = "finite_blocklength::gaussian_na_distortion: JSCC baseline, one combined backoff";
const P_SSCC: &str = "finite_blocklength::gaussian_na_distortion: SSCC baseline, two eps/2 backoffs";
const P_QINV: &str = "finite_blocklength::q_inv: bisected inverse Gaussian tail";
const P_PER_INST: &str = "throughput::per_instance_budgets: (B/lambda, G/lambda)";
const P_D_LAMBDA: &str =
    "throughput::distortion_floor_vs_lambda: D = floor + (var_x - floor) 2^(-2 min(B c_ch, G c_gate)/lambda)";
const P_LMAX: &str = "throughput::lambda_max_estimation: lambda_max = min(B c_ch, s G c_gate) / R(D)";
const P_REPLICA: &str =
    "throughput::lambda_max_with_replicas: min(B c_ch/R, G/((r - 1) L_if + R/c_gate))";
const P_SIM_DUP: &str = "sim::simulate_dup_compare: Monte Carlo OK/UE/ER frequencies";
const P_SIM_MSE: &str = "sim::simulate_uncoded_gaussian: Monte Carlo mean squared error";
const P_SIM_REP: &str = "sim::simulate_repetition_code: Monte Carlo majority-vote block error";
const P_SIM_CLASS: &str = "sim::simulate_classification: Monte Carlo label error with Fano check";
const P_SIM_CLIP: &str = "sim::simulate_clipped_estimator: Monte Carlo clipped MSE with UE bound check";
const P_EST: &str = "sim::EmpiricalEstimate: mean, standard error, 95% interval, trials";
const P_INPUT: &str = "scenario input (not derived)";

fn prov_channel_capacity(spec: &ChannelSpec) -> &'static str {
    match spec {
        ChannelSpec::Awgn { .. } => "channel_models::awgn_capacity: C = (1/2) log2(1 + snr)",
        ChannelSpec::Bsc { .. } => "channel_models::bsc_capacity: C = 1 - h2(eps)",
        ChannelSpec::Fixed { .. } => P_INPUT,
    }
}

fn prov_channel_dispersion(spec: &ChannelSpec) -> &'static str {
    match spec {
        ChannelSpec::Awgn { .. } => {
            "channel_models::awgn_dispersion: V = (snr (snr + 2) / (2 (snr + 1)^2)) (log2 e)^2"
        }
        ChannelSpec::Bsc { .. } => {
            "channel_models::bsc_dispersion: V = eps (1 - eps) (log2((1 - eps)/eps))^2"
        }
        ChannelSpec::Fixed { .. } => P_INPUT,
    }
}

fn prov_gate_capacity(spec: &PrimitiveSpec) -> &'static str {
    match spec {
        PrimitiveSpec::Bsc { .. } => "channel_models::bsc_capacity: C = 1 - h2(eps)",
        PrimitiveSpec::Mcu(_) => "channel_models::mcu_effective_capacity: C_eff = w - H(E)",
        PrimitiveSpec::Fixed { .. } => P_INPUT,
    }
}

fn prov_gate_dispersion(spec: &PrimitiveSpec) -> &'static str {
    match spec {
        PrimitiveSpec::Bsc { .. } => {
            "channel_models::bsc_dispersion: V = eps (1 - eps) (log2((1 - eps)/eps))^2"
        }
        PrimitiveSpec::Mcu(_) => "channel_models::mcu_effective_dispersion: V_eff = Var(iota(E))",
        PrimitiveSpec::Fixed { .. } => P_INPUT,
    }
}

fn gate_units(spec: &PrimitiveSpec) -> &'static str {
    match spec {
        PrimitiveSpec::Mcu(_) => "bits/word",
        _ => "bits/gate",
    }
}

pub fn capacity(l: &Loaded) -> Result<Report> {
    let scn = &l.scn;
    let c_ch = scn.channel.capacity()?;
    let c_gate = scn.primitive.capacity()?;
    let mut rows = vec![
        ReportRow::new("channel capacity", c_ch, "bits/use", prov_channel_capacity(&scn.channel)),
    ];
    if let Ok(v) = scn.channel.dispersion() {
        rows.push(ReportRow::new(
            "channel dispersion",
            v,
            "bits^2/use",
            prov_channel_dispersion(&scn.channel),
        ));
    }
    rows.push(ReportRow::new(
        "gate capacity",
        c_gate,
        gate_units(&scn.primitive),
        prov_gate_capacity(&scn.primitive),
    ));
    if let Ok(v) = scn.primitive.dispersion() {
        rows.push(ReportRow::new(
            "gate dispersion",
            v,
            "bits^2/use",
            prov_gate_dispersion(&scn.primitive),
        ));
    }
    rows.push(ReportRow::new(
        "channel information supply",
        scn.channel_uses * c_ch,
        "bits/instance",
        P_CH_CUT,
    ));
    rows.push(ReportRow::new(
        "compute information supply",
        scn.gate_budget * c_gate,
        "bits/instance",
        P_COMP_CUT,
    ));
    Ok(Report::new(rows))
}

pub fn demand(l: &Loaded, distortion: Option<f64>) -> Result<Report> {
    let scn = &l.scn;
    let target = match distortion {
        Some(d) => d,
        None => scn.distortion_target()?,
    };
    let mut rows = vec![ReportRow::new("distortion target", target, "MSE", P_INPUT)];
    match &scn.source {
        SourceSpec::Scalar { .. } => {
            let src = scn.scalar_source()?;
            let dem = scalar_demand(&src, target)?;
            rows.push(ReportRow::new("mmse floor", conditional_variance(&src), "MSE", P_FLOOR));
            rows.push(ReportRow::new("task demand", dem, "bits/instance", P_SC_DEMAND));
            rows.push(ReportRow::new(
                "distortion at the demand",
                scalar_distortion_at_supply(&src, dem)?,
                "MSE",
                P_SC_DIST,
            ));
        }
        SourceSpec::Diagonal { .. } => {
            let src = scn.diagonal_source()?;
            let dem = waterfill_rate(&src, target)?;
            rows.push(ReportRow::new("mmse floor", src.mmse_floor(), "MSE", P_VEC_FLOOR));
            rows.push(ReportRow::new("task demand", dem, "bits/vector", P_WF_RATE));
            rows.push(ReportRow::new(
                "distortion at the demand",
                waterfill_distortion(&src, dem)?,
                "MSE",
                P_WF_DIST,
            ));
        }
    }
    Ok(Report::new(rows))
}

pub fn supply(l: &Loaded) -> Result<Report> {
    let scn = &l.scn;
    let budget = scn.budget()?;
    let verdict = check_feasibility(&scn.architecture, &budget, 0.0)?;
    let mut rows = vec![ReportRow::new(
        "channel cut",
        budget.n * budget.c_ch,
        "bits/instance",
        P_CH_CUT,
    )];
    match &scn.architecture {
        ArchitectureSpec::TaskDirect => {
            rows.push(ReportRow::new(
                "compute cut",
                budget.m * budget.c_gate,
                "bits/instance",
                P_COMP_CUT,
            ));
            if let Some((lo, hi)) = strict_gap_interval(&budget) {
                rows.push(ReportRow::new("strict-gap lower edge", lo, "bits/instance", P_GAP));
                rows.push(ReportRow::new("strict-gap upper edge", hi, "bits/instance", P_GAP));
            }
        }
        ArchitectureSpec::Bypass { bypass_bits } => {
            rows.push(ReportRow::new(
                "compute cut (bypass included)",
                bypass_bits + budget.m * budget.c_gate,
                "bits/instance",
                P_COMP_CUT,
            ));
        }
        ArchitectureSpec::HardSeparation { m_dec, m_task, c_dec, c_task, bypass_bits } => {
            rows.push(ReportRow::new(
                "decode-stage cut",
                bypass_bits + m_dec * c_dec,
                "bits/instance",
                P_HARD_SEP,
            ));
            rows.push(ReportRow::new(
                "task-stage cut",
                bypass_bits + m_task * c_task,
                "bits/instance",
                P_HARD_SEP,
            ));
            let split = optimal_split_hard_separation(m_dec + m_task, *c_dec, *c_task, 0.0)?;
            rows.push(ReportRow::new("optimal decode budget", split.m_dec, "gates", P_SPLIT));
            rows.push(ReportRow::new(
                "optimal split compute supply",
                split.supply,
                "bits/instance",
                P_SPLIT,
            ));
        }
        ArchitectureSpec::KStage { stages } => {
            for (i, (m_k, c_k)) in stages.iter().enumerate() {
                rows.push(ReportRow::new(
                    format!("stage {} cut", i + 1),
                    m_k * c_k,
                    "bits/instance",
                    P_K_STAGE,
                ));
            }
        }
        ArchitectureSpec::SoftInterface { m_int } => {
            rows.push(ReportRow::new(
                "compute cut (after interface upkeep)",
                (budget.m - m_int) * budget.c_gate,
                "bits/instance",
                P_COMP_CUT,
            ));
        }
        ArchitectureSpec::ReliableIsland { .. } => {}
        ArchitectureSpec::NoisyLogic { delta, k_fan, d_logic, .. } => {
            let gate = noisy_logic_gate_supply(*delta, *k_fan, *d_logic)?;
            rows.push(ReportRow::new(
                "per-gate effective capacity",
                gate.c_logic,
                "bits/gate",
                P_LOGIC,
            ));
        }
    }
    rows.push(
        ReportRow::new("architecture supply", verdict.supply, "bits/instance", P_MIN_CUTS)
            .with_binding(verdict.binding_cut),
    );
    Ok(Report::new(rows))
}

pub fn mincut(l: &Loaded) -> Result<Report> {
    let graph = l.graph.as_ref().ok_or_else(|| {
        LimitsError::InvalidSpec("the mincut analysis needs a graph_file in the scenario".into())
    })?;
    let budget = l.scn.budget()?;
    let cut = min_cut_supply(graph, budget.c_gate)?;
    let edges = cut
        .cut_edges
        .iter()
        .map(|(t, h)| format!("{t}->{h}"))
        .collect::<Vec<_>>()
        .join("; ");
    let combined = combined_supply(graph, budget.c_gate, budget.n, budget.c_ch)?;
    Ok(Report::new(vec![
        ReportRow::new("compute min-cut supply", cut.cut_value, "bits/instance", P_MINCUT)
            .with_binding(edges),
        ReportRow::new("max-flow certificate", cut.flow_value, "bits/instance", P_MAXFLOW),
        ReportRow::new("combined supply", combined.supply, "bits/instance", P_COMBINED)
            .with_binding(combined.binding),
    ]))
}

#[derive(Debug, Clone)]
pub struct TailOpts {
    pub replicas: u32,
    pub message_bits: u64,
    pub word_bits: Option<u64>,
    pub tail_budget: f64,
    pub block_len: Option<u64>,
}

impl Default for TailOpts {
    fn default() -> Self {
        TailOpts {
            replicas: 2,
            message_bits: 64,
            word_bits: None,
            tail_budget: 1e-6,
            block_len: None,
        }
    }
}

fn as_mcu(spec: &PrimitiveSpec) -> Result<WordMcuSpec> {
    match spec {
        PrimitiveSpec::Mcu(m) => {
            m.validate()?;
            Ok(m.clone())
        }
        PrimitiveSpec::Bsc { epsilon } => {
            BscSpec::new(*epsilon)?;
            WordMcuSpec::new(1, *epsilon, vec![McuClass { prob: 1.0, multiplicity: 1 }])
        }
        PrimitiveSpec::Fixed { .. } => Err(LimitsError::Unsupported(
            "the tail analysis needs a bit-flip or word-upset primitive model".into(),
        )),
    }
}

pub fn tail(l: &Loaded, opts: &TailOpts) -> Result<Report> {
    let scn = &l.scn;
    let mcu = as_mcu(&scn.primitive)?;
    let det = DetectorSpec::new(opts.replicas, 0.0)?;
    let word = mcu_dup_outcomes(&mcu, &det)?;
    let word_bits = opts.word_bits.unwrap_or(u64::from(mcu.word_bits));
    let iface = InterfaceSpec::new(opts.message_bits, word_bits)?;
    let message = message_outcomes(&word, iface.word_count)?;
    let block_len = opts.block_len.or(scn.block_len).unwrap_or(1000);
    let tag_bits = hash_bits_for_target(block_len, opts.tail_budget)?;
    let sizing = size_replicas_for_tail(&mcu, &iface, block_len, opts.tail_budget)?;
    let as_count = |r: Option<u32>| r.map_or(f64::INFINITY, f64::from);
    Ok(Report::new(vec![
        ReportRow::new("word p_ok", word.p_ok, "probability", P_MCU_DUP),
        ReportRow::new("word p_ue", word.p_ue, "probability", P_MCU_DUP),
        ReportRow::new("word p_er", word.p_er, "probability", P_MCU_DUP),
        ReportRow::new("message p_ok", message.p_ok, "probability", P_MSG),
        ReportRow::new("message p_ue", message.p_ue, "probability", P_MSG),
        ReportRow::new("message p_er", message.p_er, "probability", P_MSG),
        ReportRow::new("hash tag bits for the tail budget", f64::from(tag_bits), "bits", P_HASH_BITS),
        ReportRow::new("hash undetected-error bound", hash_ue_bound(tag_bits)?, "probability", P_HASH_UE),
        ReportRow::new(
            "replicas for message-level target",
            as_count(sizing.message_r),
            "replicas",
            P_SIZING,
        ),
        ReportRow::new(
            "replicas for per-word target",
            as_count(sizing.per_word_r),
            "replicas",
            P_SIZING,
        ),
    ]))
}

pub fn fbl(l: &Loaded, block_len: Option<u64>) -> Result<Report> {
    let scn = &l.scn;
    let t = block_len.or(scn.block_len).ok_or_else(|| {
        LimitsError::InvalidSpec(
            "no block length: set block_len in the scenario or pass --block-len".into(),
        )
    })?;
    let eb = scn.error_budget.as_ref().ok_or_else(|| {
        LimitsError::InvalidSpec("the finite-T analysis needs an error_budget block".into())
    })?;
    let cfg = NaConfig::new(
        t,
        scn.budget()?,
        scn.channel.dispersion()?,
        scn.primitive.dispersion()?,
        GAUSSIAN_TASK_DISPERSION,
    )?;
    let src = scn.scalar_source()?;
    let demand = scalar_demand(&src, scn.distortion_target()?)?;
    let verdict = na_feasibility(&scn.architecture, &cfg, eb, demand)?;
    let mut rows = vec![
        ReportRow::new("na task demand", verdict.demand, "bits/instance", P_NA_DEMAND),
        ReportRow::new("na supply", verdict.supply, "bits/instance", P_NA_FEAS)
            .with_binding(verdict.binding_cut.clone()),
        ReportRow::new("na margin", verdict.margin, "bits/instance", P_NA_FEAS),
        ReportRow::new(
            "na supply clamped at zero",
            f64::from(u8::from(verdict.clamped)),
            "indicator",
            P_NA_FEAS,
        ),
        ReportRow::new(
            "na feasible",
            f64::from(u8::from(verdict.feasible)),
            "indicator",
            P_NA_FEAS,
        ),
    ];
    if eb.total.is_some() {
        let bench = gaussian_na_distortion(&src, &scn.architecture, &cfg, eb)?;
        rows.push(ReportRow::new(
            format!("na effective rate ({NA_BENCHMARK_LABEL})"),
            bench.r_eff,
            "bits/instance",
            P_NA_DIST,
        ));
        rows.push(ReportRow::new(
            format!("na distortion ({NA_BENCHMARK_LABEL})"),
            bench.distortion,
            "MSE",
            P_NA_DIST,
        ));
        rows.push(ReportRow::new("jscc baseline distortion", bench.jscc_baseline, "MSE", P_JSCC));
        rows.push(ReportRow::new("sscc baseline distortion", bench.sscc_baseline, "MSE", P_SSCC));
    }
    Ok(Report::with_verdict(rows, verdict.feasible))
}

pub fn throughput(l: &Loaded) -> Result<Report> {
    let scn = &l.scn;
    let tp = scn.throughput.as_ref().ok_or_else(|| {
        LimitsError::InvalidSpec("the throughput analysis needs a throughput block".into())
    })?;
    let ps = PerSecondBudget::new(tp.channel_uses_per_sec, tp.primitives_per_sec)?;
    let budget = scn.budget()?;
    let mut rows = Vec::new();
    if let Some(lambda) = tp.lambda {
        let (n_inst, m_inst) = per_instance_budgets(&ps, lambda)?;
        rows.push(ReportRow::new("channel uses per instance", n_inst, "uses", P_PER_INST));
        rows.push(ReportRow::new("gate uses per instance", m_inst, "gates", P_PER_INST));
        if let Ok(src) = scn.scalar_source() {
            rows.push(ReportRow::new(
                "distortion at lambda",
                distortion_floor_vs_lambda(&src, &ps, budget.c_ch, budget.c_gate, lambda)?,
                "MSE",
                P_D_LAMBDA,
            ));
        }
    }
    let hard_separation = matches!(scn.architecture, ArchitectureSpec::HardSeparation { .. });
    if let (Ok(src), Some(target)) = (scn.scalar_source(), scn.distortion_target) {
        let lmax = lambda_max_estimation(&src, target, &ps, budget.c_ch, budget.c_gate, hard_separation)?;
        rows.push(ReportRow::new("max instance rate", lmax, "instances/sec", P_LMAX));
        if let Some(replicas) = tp.replicas {
            let demand = scalar_demand(&src, target)?;
            let rt = lambda_max_with_replicas(
                demand,
                replicas,
                tp.interface_bits.unwrap_or(0.0),
                &ps,
                budget.c_gate,
                budget.c_ch,
            )?;
            rows.push(
                ReportRow::new("replica-aware max rate", rt.lambda_max, "instances/sec", P_REPLICA)
                    .with_binding(rt.binding),
            );
            rows.push(ReportRow::new("replica channel bound", rt.channel_bound, "instances/sec", P_REPLICA));
            rows.push(ReportRow::new("replica compute bound", rt.compute_bound, "instances/sec", P_REPLICA));
        }
    }
    if rows.is_empty() {
        return Err(LimitsError::InvalidSpec(
            "the throughput block needs a lambda or a distortion target to analyze".into(),
        ));
    }
    Ok(Report::new(rows))
}

fn estimate_rows(
    label: &str,
    est: &infolim_sim::EmpiricalEstimate,
    units: &'static str,
    prov: &'static str,
) -> Vec<ReportRow> {
    vec![
        ReportRow::new(label, est.mean, units, prov),
        ReportRow::new(format!("{label} standard error"), est.std_err, units, P_EST),
        ReportRow::new(format!("{label} ci95 low"), est.ci95_low, units, P_EST),
        ReportRow::new(format!("{label} ci95 high"), est.ci95_high, units, P_EST),
    ]
}

pub fn simulate(l: &Loaded) -> Result<Report> {
    let scn = &l.scn;
    let sim = scn.simulation.as_ref().ok_or_else(|| {
        LimitsError::InvalidSpec("the simulate subcommand needs a simulation block".into())
    })?;
    let mut cfg = TrialConfig::new(sim.trials, sim.master_seed)?;
    cfg.parallelism_hint = sim.parallelism_hint;
    let mut rows = Vec::new();
    match &sim.op {
        SimOp::Uncoded => {
            let src = scn.scalar_source()?;
            let snr = match scn.channel {
                ChannelSpec::Awgn { snr } => snr,
                _ => {
                    return Err(LimitsError::Unsupported(
                        "the uncoded simulation needs an AWGN channel model".into(),
                    ))
                }
            };
            let est = simulate_uncoded_gaussian(&src, snr, &cfg)?;
            rows.extend(estimate_rows("empirical mse", &est, "MSE", P_SIM_MSE));
            let analytic = uncoded_vector_mse(
                &scn.diagonal_source()?,
                awgn_capacity(&AwgnSpec::new(snr)?),
            )?;
            rows.push(ReportRow::new("analytic mse", analytic, "MSE", P_UNCODED));
        }
        SimOp::DupCompare { replicas } => {
            let (law, closed, prov_closed) = match &scn.primitive {
                PrimitiveSpec::Mcu(m) => {
                    let det = DetectorSpec::new(*replicas, 0.0)?;
                    (ErrorLaw::Mcu(m.clone()), mcu_dup_outcomes(m, &det)?, P_MCU_DUP)
                }
                PrimitiveSpec::Bsc { epsilon } => {
                    let det = DetectorSpec::new(*replicas, 0.0)?;
                    let spec = BscSpec::new(*epsilon)?;
                    (
                        ErrorLaw::Bsc(spec),
                        dup_compare_outcomes(&[1.0 - epsilon, *epsilon], &det)?,
                        P_DUP,
                    )
                }
                PrimitiveSpec::Fixed { .. } => {
                    return Err(LimitsError::Unsupported(
                        "the duplicate-and-compare simulation needs a bit-flip or word-upset primitive"
                            .into(),
                    ))
                }
            };
            let out = simulate_dup_compare(&law, *replicas, &cfg)?;
            rows.extend(estimate_rows("empirical p_ok", &out.ok, "probability", P_SIM_DUP));
            rows.extend(estimate_rows("empirical p_ue", &out.ue, "probability", P_SIM_DUP));
            rows.extend(estimate_rows("empirical p_er", &out.er, "probability", P_SIM_DUP));
            rows.push(ReportRow::new("closed-form p_ok", closed.p_ok, "probability", prov_closed));
            rows.push(ReportRow::new("closed-form p_ue", closed.p_ue, "probability", prov_closed));
            rows.push(ReportRow::new("closed-form p_er", closed.p_er, "probability", prov_closed));
        }
        SimOp::Repetition { message_bits } => {
            let epsilon = match &scn.primitive {
                PrimitiveSpec::Bsc { epsilon } => *epsilon,
                _ => {
                    return Err(LimitsError::Unsupported(
                        "the repetition simulation needs a bit-flip primitive".into(),
                    ))
                }
            };
            if scn.gate_budget.fract() != 0.0 || scn.gate_budget < 0.0 {
                return Err(LimitsError::Domain(format!(
                    "the repetition budget must be a whole gate count, got {}",
                    scn.gate_budget
                )));
            }
            let est =
                simulate_repetition_code(*message_bits, scn.gate_budget as u64, epsilon, &cfg)?;
            rows.extend(estimate_rows("empirical block error", &est, "probability", P_SIM_REP));
        }
        SimOp::Classification { label_bits, stages } => {
            let res = simulate_classification(*label_bits, stages, &cfg)?;
            rows.extend(estimate_rows("empirical label error", &res.error, "probability", P_SIM_CLASS));
            rows.push(ReportRow::new("fano floor", res.fano_bound, "probability", P_FANO));
            rows.push(ReportRow::new("bottleneck supply", res.supply_bits, "bits/instance", P_SIM_CLASS));
        }
        SimOp::Clipped { corruption_prob, clip_range } => {
            let src = scn.scalar_source()?;
            let res = simulate_clipped_estimator(&src, *corruption_prob, *clip_range, &cfg)?;
            rows.extend(estimate_rows("empirical mse", &res.mse, "MSE", P_SIM_CLIP));
            if let Some(ue) = &res.ue_mse {
                rows.extend(estimate_rows("ue conditional mse", ue, "MSE", P_SIM_CLIP));
            }
            if let Some(bound) = res.clipping_bound {
                rows.push(ReportRow::new("clipping bound", bound, "MSE", P_CLIP));
            }
        }
    }
    rows.push(ReportRow::new("trials", sim.trials as f64, "trials", P_EST));
    Ok(Report::new(rows))
}

pub fn feasible(l: &Loaded) -> Result<Report> {
    let scn = &l.scn;
    let budget = scn.budget()?;
    let target = scn.distortion_target()?;
    let (demand, demand_units, demand_prov): (f64, &'static str, &'static str) =
        match &scn.source {
            SourceSpec::Scalar { .. } => {
                (scalar_demand(&scn.scalar_source()?, target)?, "bits/instance", P_SC_DEMAND)
            }
            SourceSpec::Diagonal { .. } => {
                (waterfill_rate(&scn.diagonal_source()?, target)?, "bits/vector", P_WF_RATE)
            }
        };
    let verdict = check_feasibility(&scn.architecture, &budget, demand)?;
    let rows = vec![
        ReportRow::new("distortion target", target, "MSE", P_INPUT),
        ReportRow::new("task demand", demand, demand_units, demand_prov),
        ReportRow::new("architecture supply", verdict.supply, demand_units, P_MIN_CUTS)
            .with_binding(verdict.binding_cut),
        ReportRow::new("margin", verdict.margin, demand_units, P_MIN_CUTS),
        ReportRow::new(
            "feasible",
            f64::from(u8::from(verdict.feasible)),
            "indicator",
            P_MIN_CUTS,
        ),
    ];
    Ok(Report::with_verdict(rows, verdict.feasible))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    P2,
    P8,
    Iso16,
    FiniteT,
    BinaryFano,
}

fn reproduce_p2() -> Result<Report> {
    let src = DiagonalGaussianSource::new(vec![4.0, 1.0], vec![1.0, 1.0])?;
    let lam = src.eigenvalues();
    let r0 = 0.5 * (lam[0] / lam[1]).log2();
    // bandwidth-matched channel: n = 2 uses at 1 bit/use, compute supply 2
    // bits/vector; hard separation halves the compute arm to 1 bit/vector
    Ok(Report::new(vec![
        ReportRow::new("mode-1 eigenvalue", lam[0], "MSE", P_EIGEN),
        ReportRow::new("mode-2 eigenvalue", lam[1], "MSE", P_EIGEN),
        ReportRow::new("mmse floor", src.mmse_floor(), "MSE", P_VEC_FLOOR),
        ReportRow::new("mode activation threshold", r0, "bits/vector", P_WF_RATE),
        ReportRow::new("channel information supply", 2.0, "bits/vector", P_CH_CUT),
        ReportRow::new("compute information supply", 2.0, "bits/vector", P_COMP_CUT),
        ReportRow::new(
            "task-direct distortion at supply 2",
            waterfill_distortion(&src, 2.0)?,
            "MSE",
            P_WF_DIST,
        ),
        ReportRow::new(
            "hard-separation distortion at supply 1",
            waterfill_distortion(&src, 1.0)?,
            "MSE",
            P_WF_DIST,
        )
        .with_binding("task-stage"),
        ReportRow::new("uncoded analog baseline", uncoded_vector_mse(&src, 1.0)?, "MSE", P_UNCODED),
    ]))
}

fn reproduce_p8() -> Result<Report> {
    let src = DiagonalGaussianSource::new(
        vec![8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.125, 0.0625],
        vec![1.0; 8],
    )?;
    // n = p = 8 uses at 2 bits/use; compute supply 8 bits/vector, so hard
    // separation is held at 4 while task-direct gets the full 8
    let uncoded = uncoded_vector_mse(&src, 2.0)?;
    let d_hard = waterfill_distortion(&src, 4.0)?;
    Ok(Report::new(vec![
        ReportRow::new("channel information supply", 16.0, "bits/vector", P_CH_CUT),
        ReportRow::new("compute information supply", 8.0, "bits/vector", P_COMP_CUT),
        ReportRow::new("mmse floor", src.mmse_floor(), "MSE", P_VEC_FLOOR),
        ReportRow::new("uncoded analog baseline", uncoded, "MSE", P_UNCODED),
        ReportRow::new(
            "task-direct distortion at supply 8",
            waterfill_distortion(&src, 8.0)?,
            "MSE",
            P_WF_DIST,
        ),
        ReportRow::new("hard-separation distortion at supply 4", d_hard, "MSE", P_WF_DIST)
            .with_binding("task-stage"),
        ReportRow::new(
            "hard-separation gap over the uncoded baseline",
            d_hard - uncoded,
            "MSE",
            P_WF_DIST,
        ),
    ]))
}

fn reproduce_iso16() -> Result<Report> {
    let (p, var_x, var_v) = (16usize, 1.0, 0.25);
    let floor = p as f64 * var_x * var_v / (var_x + var_v);
    let d48 = isotropic_distortion(p, var_x, var_v, 48.0)?;
    let d24 = isotropic_distortion(p, var_x, var_v, 24.0)?;
    Ok(Report::new(vec![
        ReportRow::new("mmse floor", floor, "MSE", P_VEC_FLOOR),
        ReportRow::new("distortion at supply 48", d48, "MSE", P_ISO),
        ReportRow::new("distortion at supply 24 (halved compute arm)", d24, "MSE", P_ISO)
            .with_binding("task-stage"),
        ReportRow::new("excess distortion at supply 48", d48 - floor, "MSE", P_ISO),
        ReportRow::new("excess distortion at supply 24", d24 - floor, "MSE", P_ISO),
        ReportRow::new(
            "excess-distortion ratio",
            (d24 - floor) / (d48 - floor),
            "dimensionless",
            P_ISO_RATIO,
        ),
    ]))
}

fn reproduce_finite_t() -> Result<Report> {
    let c_gate = bsc_capacity(&BscSpec::new(0.1)?);
    let v_gate = bsc_dispersion(&BscSpec::new(0.1)?);
    let awgn = AwgnSpec::new(15.0)?;
    let c_ch = awgn_capacity(&awgn);
    let v_ch = infolim_core::channel_models::awgn_dispersion(&awgn);
    let src = ScalarGaussianSource::new(1.0, 1.0)?;
    let budgets = BudgetSpec::new(1.0, c_ch, 2.0, c_gate)?;
    let hard = ArchitectureSpec::HardSeparation {
        m_dec: 1.0,
        m_task: 1.0,
        c_dec: c_gate,
        c_task: c_gate,
        bypass_bits: 0.0,
    };
    let big_t = 10_000_000_000_000_000u64;
    let bench_at = |t: u64, arch: &ArchitectureSpec, eb: &ErrorBudget| {
        let cfg = NaConfig::new(t, budgets, v_ch, v_gate, GAUSSIAN_TASK_DISPERSION)?;
        gaussian_na_distortion(&src, arch, &cfg, eb)
    };
    let eb_td = ErrorBudget::task_direct(0.01)?;
    let eb_hs = ErrorBudget::hard_separation(0.01)?;
    let sample = bench_at(200, &ArchitectureSpec::TaskDirect, &eb_td)?;
    let sample_hs = bench_at(200, &hard, &eb_hs)?;
    let limit = bench_at(big_t, &ArchitectureSpec::TaskDirect, &eb_td)?;
    let limit_hs = bench_at(big_t, &hard, &eb_hs)?;
    Ok(Report::new(vec![
        ReportRow::new("channel capacity", c_ch, "bits/use", prov_channel_capacity(&ChannelSpec::Awgn { snr: 15.0 })),
        ReportRow::new("channel dispersion", v_ch, "bits^2/use", prov_channel_dispersion(&ChannelSpec::Awgn { snr: 15.0 })),
        ReportRow::new("gate capacity", c_gate, "bits/gate", "channel_models::bsc_capacity: C = 1 - h2(eps)"),
        ReportRow::new("gate dispersion", v_gate, "bits^2/use", "channel_models::bsc_dispersion: V = eps (1 - eps) (log2((1 - eps)/eps))^2"),
        ReportRow::new("Qinv at eps = 0.01", q_inv(0.01)?, "dimensionless", P_QINV),
        ReportRow::new("Qinv at eps = 0.01/3", q_inv(0.01 / 3.0)?, "dimensionless", P_QINV),
        ReportRow::new("Qinv at eps = 0.0025", q_inv(0.0025)?, "dimensionless", P_QINV),
        ReportRow::new(
            format!("task-direct distortion at T = 200 ({NA_BENCHMARK_LABEL})"),
            sample.distortion,
            "MSE",
            P_NA_DIST,
        ),
        ReportRow::new(
            format!("hard-separation distortion at T = 200 ({NA_BENCHMARK_LABEL})"),
            sample_hs.distortion,
            "MSE",
            P_NA_DIST,
        ),
        ReportRow::new("jscc baseline at T = 200", sample.jscc_baseline, "MSE", P_JSCC),
        ReportRow::new("sscc baseline at T = 200", sample.sscc_baseline, "MSE", P_SSCC),
        ReportRow::new("task-direct limit", limit.distortion, "MSE", P_NA_DIST),
        ReportRow::new("hard-separation limit", limit_hs.distortion, "MSE", P_NA_DIST),
        ReportRow::new("reliable-coding limit", limit.jscc_baseline, "MSE", P_JSCC),
    ]))
}

fn reproduce_binary_fano() -> Result<Report> {
    let q_bits = 10u32;
    let epsilon = 0.1;
    let c_gate = bsc_capacity(&BscSpec::new(epsilon)?);
    let task = ClassificationTask::new(f64::from(q_bits))?;
    // generous channel: only the compute side binds at m = 12 gates
    let m = 12.0;
    let td_floor = fano_error_lower_bound(&task, m * c_gate);
    let hs_floor = fano_error_lower_bound(&task, 0.5 * m * c_gate);
    let req_td = required_gate_budget(f64::from(q_bits) - 1.0, c_gate)?;
    let req_hs = 2.0 * req_td;
    let cfg = TrialConfig::new(20_000, 11)?;
    let one = simulate_classification(q_bits, &[StageSpec { budget_m: 12, epsilon }], &cfg)?;
    let two = simulate_classification(
        q_bits,
        &[
            StageSpec { budget_m: 6, epsilon },
            StageSpec { budget_m: 6, epsilon },
        ],
        &cfg,
    )?;
    Ok(Report::new(vec![
        ReportRow::new("gate capacity", c_gate, "bits/gate", "channel_models::bsc_capacity: C = 1 - h2(eps)"),
        ReportRow::new("task-direct Fano floor (m = 12)", td_floor, "probability", P_FANO),
        ReportRow::new(
            "hard-separation Fano floor (m = 12, equal split)",
            hs_floor,
            "probability",
            P_FANO,
        ),
        ReportRow::new("required gates, task-direct", req_td, "gates", P_REQ),
        ReportRow::new("required gates, hard-separation", req_hs, "gates", P_REQ),
        ReportRow::new("budget inflation under hard separation", req_hs / req_td, "dimensionless", P_REQ),
        ReportRow::new("empirical error, one stage (m = 12)", one.error.mean, "probability", P_SIM_CLASS),
        ReportRow::new("empirical error, two stages (m = 6 + 6)", two.error.mean, "probability", P_SIM_CLASS),
    ]))
}

pub fn reproduce(case: Case) -> Result<Report> {
    match case {
        Case::P2 => reproduce_p2(),
        Case::P8 => reproduce_p8(),
        Case::Iso16 => reproduce_iso16(),
        Case::FiniteT => reproduce_finite_t(),
        Case::BinaryFano => reproduce_binary_fano(),
    }
}
