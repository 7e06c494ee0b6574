//! Report rows and the three output renderings. Every row carries units and
//! a provenance string naming the implementing formula; rows refusing to
//! identify their formula are a bug, so construction asserts registry
//! membership.

use clap::ValueEnum;
use serde::Serialize;

/// Every provenance string a command may attach to a row. The registry is
/// the anti-orphan check: a label outside this list panics at construction.
pub const PROVENANCE: &[&str] = &[
    "channel_models::awgn_capacity: C = (1/2) log2(1 + snr)",
    "channel_models::bsc_capacity: C = 1 - h2(eps)",
    "channel_models::awgn_dispersion: V = (snr (snr + 2) / (2 (snr + 1)^2)) (log2 e)^2",
    "channel_models::bsc_dispersion: V = eps (1 - eps) (log2((1 - eps)/eps))^2",
    "channel_models::mcu_effective_capacity: C_eff = w - H(E)",
    "channel_models::mcu_effective_dispersion: V_eff = Var(iota(E))",
    "scenario input (not derived)",
    "supply_converse::check_feasibility: channel cut n C_ch",
    "supply_converse::check_feasibility: compute cut m C_gate",
    "supply_converse::check_feasibility: min over architecture cuts",
    "supply_converse::supply_hard_separation: min(n C_ch, b + m_dec c_dec, b + m_task c_task)",
    "supply_converse::supply_k_stage: min(n C_ch, min_k m_k c_k)",
    "supply_converse::optimal_split_hard_separation: equalize m_dec c_dec = m_rel + (m - m_dec) c_task",
    "supply_converse::strict_gap_interval: ((m/2) C_gate, m C_gate)",
    "supply_converse::noisy_logic_gate_supply: C_logic = min(1 - h2(delta), beta^d), beta = k_fan (1 - 2 delta)^2",
    "supply_converse::required_gate_budget: m = demand / C_logic",
    "task_demand::conditional_variance: floor = var_x var_v / (var_x + var_v)",
    "task_demand::scalar_demand: R(D) = max(0, (1/2) log2((var_x - floor)/(D - floor)))",
    "task_demand::scalar_distortion_at_supply: D = floor + (var_x - floor) 2^(-2 R)",
    "task_demand::mmse_floor: floor = sum_i var_x,i var_v,i / (var_x,i + var_v,i)",
    "task_demand::eigenvalues: lam_i = var_x,i^2 / (var_x,i + var_v,i)",
    "task_demand::waterfill_rate: R(D) = sum over lam_i > nu of (1/2) log2(lam_i / nu)",
    "task_demand::waterfill_distortion: D(R) = floor + sum_i min(nu, lam_i)",
    "task_demand::isotropic_distortion: D(R) = p floor + p lam 2^(-2R/p)",
    "task_demand::isotropic_distortion: excess ratio 2^(2 dR / p) between supplies",
    "task_demand::uncoded_vector_mse: D = floor + (sum_i lam_i) 2^(-2 C_ch)",
    "task_demand::fano_error_lower_bound: Pe >= max(0, 1 - (R_sup + 1)/q)",
    "compute_graph::min_cut_supply: min over s-t cuts of sum(m_e c_gate + b_e)",
    "compute_graph::min_cut_supply: max-flow value (duality certificate)",
    "compute_graph::combined_supply: min(n C_ch, compute min-cut)",
    "tail_reliability::dup_compare_outcomes: p_ok, p_ue, p_er of r-way compare",
    "tail_reliability::mcu_dup_outcomes: word OK/UE/ER under the MCU law",
    "tail_reliability::message_outcomes: message OK/UE/ER across independent words",
    "tail_reliability::hash_bits_for_target: least h with T 2^(-h) <= budget",
    "tail_reliability::hash_ue_bound: p_ue <= 2^(-h)",
    "tail_reliability::size_replicas_for_tail: least r <= 64 meeting the tail budget",
    "finite_blocklength::na_channel_rate: n C - sqrt(n V / T) Qinv(eps)",
    "finite_blocklength::na_compute_rate: m C_gate - sqrt(m V_gate / T) Qinv(eps)",
    "finite_blocklength::na_task_demand: R + sqrt(v / T) Qinv(eps_src)",
    "finite_blocklength::na_feasibility: NA demand vs min over NA cuts",
    "finite_blocklength::gaussian_na_distortion: D = floor + (var_x - floor) 2^(-2 R_eff)",
    "finite_blocklength::gaussian_na_distortion: JSCC baseline, one combined backoff",
    "finite_blocklength::gaussian_na_distortion: SSCC baseline, two eps/2 backoffs",
    "finite_blocklength::q_inv: bisected inverse Gaussian tail",
    "throughput::per_instance_budgets: (B/lambda, G/lambda)",
    "throughput::distortion_floor_vs_lambda: D = floor + (var_x - floor) 2^(-2 min(B c_ch, G c_gate)/lambda)",
    "throughput::lambda_max_estimation: lambda_max = min(B c_ch, s G c_gate) / R(D)",
    "throughput::lambda_max_with_replicas: min(B c_ch/R, G/((r - 1) L_if + R/c_gate))",
    "sim::simulate_dup_compare: Monte Carlo OK/UE/ER frequencies",
    "sim::simulate_uncoded_gaussian: Monte Carlo mean squared error",
    "sim::simulate_repetition_code: Monte Carlo majority-vote block error",
    "sim::simulate_classification: Monte Carlo label error with Fano check",
    "sim::simulate_clipped_estimator: Monte Carlo clipped MSE with UE bound check",
    "sim::EmpiricalEstimate: mean, standard error, 95% interval, trials",
];

/// One reported quantity. `binding` names the cut (or cut edges) that set
/// the value when there is one.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub quantity: String,
    pub value: f64,
    pub units: &'static str,
    pub provenance: &'static str,
    pub binding: Option<String>,
}

impl ReportRow {
    pub fn new(
        quantity: impl Into<String>,
        value: f64,
        units: &'static str,
        provenance: &'static str,
    ) -> Self {
        assert!(!units.is_empty(), "report rows must carry units");
        assert!(
            PROVENANCE.contains(&provenance),
            "orphan provenance label: {provenance}"
        );
        ReportRow {
            quantity: quantity.into(),
            value,
            units,
            provenance,
            binding: None,
        }
    }

    pub fn with_binding(mut self, binding: impl Into<String>) -> Self {
        self.binding = Some(binding.into());
        self
    }
}

#[derive(Debug)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    /// Set by verdict-producing commands; `--strict` turns it into exit 2.
    pub infeasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// 10 significant digits, scientific; infinities become "inf"/"-inf" so
/// unbounded quantities survive CSV and JSON.
pub fn fmt_sci(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.9e}")
    }
}

/// 4 significant digits for tables.
pub fn fmt_brief(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.3e}")
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    quantity: &'a str,
    value: String,
    units: &'a str,
    provenance: &'a str,
    binding: Option<&'a str>,
}

impl Report {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        Report { rows, infeasible: false }
    }

    pub fn with_verdict(rows: Vec<ReportRow>, feasible: bool) -> Self {
        Report { rows, infeasible: !feasible }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.render_table(),
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_table(&self) -> String {
        let header = ["quantity", "value", "units", "binding", "provenance"];
        let body: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.quantity.clone(),
                    fmt_brief(r.value),
                    r.units.to_string(),
                    r.binding.clone().unwrap_or_default(),
                    r.provenance.to_string(),
                ]
            })
            .collect();
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row.iter()) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let fmt_line = |cells: &[String], widths: &[usize]| {
            let mut line = String::new();
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(cell);
                if i + 1 < cells.len() {
                    line.push_str(&" ".repeat(w - cell.len()));
                }
            }
            line.push('\n');
            line
        };
        let header_cells: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        out.push_str(&fmt_line(&header_cells, &widths));
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &body {
            out.push_str(&fmt_line(row.as_slice(), &widths));
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("quantity,value,units,provenance,binding\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_escape(&r.quantity),
                fmt_sci(r.value),
                csv_escape(r.units),
                csv_escape(r.provenance),
                csv_escape(r.binding.as_deref().unwrap_or("")),
            ));
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<JsonRow> = self
            .rows
            .iter()
            .map(|r| JsonRow {
                quantity: &r.quantity,
                value: fmt_sci(r.value),
                units: r.units,
                provenance: r.provenance,
                binding: r.binding.as_deref(),
            })
            .collect();
        let doc = serde_json::json!({ "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
        s.push('\n');
        s
    }
}
