//! Grid sweeps over one numeric scenario field, rendered as plain CSV.

use infolim_core::error::{LimitsError, Result};
use infolim_core::finite_blocklength::{
    gaussian_na_distortion, ErrorBudget, NaConfig, GAUSSIAN_TASK_DISPERSION,
};
use infolim_core::supply_converse::{
    check_feasibility, supply_hard_separation, supply_task_direct, ArchitectureSpec, BudgetSpec,
};
use infolim_core::task_demand::{waterfill_distortion, waterfill_rate};
use infolim_core::throughput::{
    distortion_floor_vs_lambda, per_instance_budgets, PerSecondBudget,
};

use crate::report::fmt_sci;
use crate::scenario::Loaded;

/// Accepts `a,b,c` lists, `lo:hi:count` linear grids, and `lo:hi:count:log`
/// geometric grids (inclusive endpoints).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| LimitsError::InvalidSpec(msg);
    if text.trim().is_empty() {
        return Err(bad("empty grid".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 1 {
        return text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("bad grid value {v:?}: {e}")))
            })
            .collect();
    }
    if parts.len() != 3 && parts.len() != 4 {
        return Err(bad(format!(
            "grid {text:?} must be a comma list, lo:hi:count, or lo:hi:count:log"
        )));
    }
    let lo: f64 = parts[0].trim().parse().map_err(|e| bad(format!("bad grid start: {e}")))?;
    let hi: f64 = parts[1].trim().parse().map_err(|e| bad(format!("bad grid end: {e}")))?;
    let count: usize =
        parts[2].trim().parse().map_err(|e| bad(format!("bad grid count: {e}")))?;
    if count == 0 {
        return Err(bad("grid count must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(bad("grid endpoints must be finite".into()));
    }
    let log = match parts.get(3).map(|s| s.trim()) {
        None => false,
        Some("log") => true,
        Some(other) => return Err(bad(format!("unknown grid mode {other:?}, expected log"))),
    };
    if log && (lo <= 0.0 || hi <= 0.0) {
        return Err(bad("log grids need positive endpoints".into()));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let pts = (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect();
    Ok(pts)
}

fn render(header: &str, rows: Vec<Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_sci(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn sweep_block_len(l: &Loaded, grid: &[f64]) -> Result<String> {
    let scn = &l.scn;
    let total = scn
        .error_budget
        .as_ref()
        .and_then(|eb| eb.total)
        .ok_or_else(|| {
            LimitsError::InvalidSpec(
                "the block_len sweep needs an error_budget with a total".into(),
            )
        })?;
    let eb_td = ErrorBudget::task_direct(total)?;
    let eb_hs = ErrorBudget::hard_separation(total)?;
    let budgets = scn.budget()?;
    let hard = ArchitectureSpec::HardSeparation {
        m_dec: 0.5 * budgets.m,
        m_task: 0.5 * budgets.m,
        c_dec: budgets.c_gate,
        c_task: budgets.c_gate,
        bypass_bits: 0.0,
    };
    let v_ch = scn.channel.dispersion()?;
    let v_gate = scn.primitive.dispersion()?;
    let src = scn.scalar_source()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &v in grid {
        let t = v.round();
        if !(t >= 1.0) {
            return Err(LimitsError::Domain(format!(
                "block_len grid values must be at least 1, got {v}"
            )));
        }
        let cfg = NaConfig::new(t as u64, budgets, v_ch, v_gate, GAUSSIAN_TASK_DISPERSION)?;
        let td = gaussian_na_distortion(&src, &ArchitectureSpec::TaskDirect, &cfg, &eb_td)?;
        let hs = gaussian_na_distortion(&src, &hard, &cfg, &eb_hs)?;
        rows.push(vec![t, td.distortion, hs.distortion, td.jscc_baseline, td.sscc_baseline]);
    }
    Ok(render("block_len,d_task_direct,d_hard_separation,d_jscc,d_sscc", rows))
}

fn sweep_budget(l: &Loaded, axis: &str, grid: &[f64]) -> Result<String> {
    let scn = &l.scn;
    let base = scn.budget()?;
    let src = scn.diagonal_source()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &v in grid {
        let (n, m) = match axis {
            "gate_budget" => (base.n, v),
            _ => (v, base.m),
        };
        let budget = BudgetSpec::new(n, base.c_ch, m, base.c_gate)?;
        let s_td = supply_task_direct(&budget);
        let s_hs = supply_hard_separation(
            n,
            base.c_ch,
            0.5 * m,
            base.c_gate,
            0.5 * m,
            base.c_gate,
            0.0,
        )?;
        rows.push(vec![
            v,
            s_td,
            s_hs,
            waterfill_distortion(&src, s_td)?,
            waterfill_distortion(&src, s_hs)?,
        ]);
    }
    let header = format!("{axis},supply_task_direct,supply_hard_separation,d_task_direct,d_hard_separation");
    Ok(render(&header, rows))
}

fn sweep_lambda(l: &Loaded, grid: &[f64]) -> Result<String> {
    let scn = &l.scn;
    let tp = scn.throughput.as_ref().ok_or_else(|| {
        LimitsError::InvalidSpec("the lambda sweep needs a throughput block".into())
    })?;
    let ps = PerSecondBudget::new(tp.channel_uses_per_sec, tp.primitives_per_sec)?;
    let budget = scn.budget()?;
    let src = scn.scalar_source()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let (n_inst, m_inst) = per_instance_budgets(&ps, lambda)?;
        let d = distortion_floor_vs_lambda(&src, &ps, budget.c_ch, budget.c_gate, lambda)?;
        rows.push(vec![lambda, n_inst, m_inst, d]);
    }
    Ok(render("lambda,channel_uses_per_instance,gate_uses_per_instance,distortion", rows))
}

fn sweep_distortion(l: &Loaded, grid: &[f64]) -> Result<String> {
    let scn = &l.scn;
    let budget = scn.budget()?;
    let src = scn.diagonal_source()?;
    let mut rows = Vec::with_capacity(grid.len());
    for &d in grid {
        let demand = waterfill_rate(&src, d)?;
        let verdict = check_feasibility(&scn.architecture, &budget, demand)?;
        rows.push(vec![
            d,
            demand,
            verdict.supply,
            verdict.margin,
            f64::from(u8::from(verdict.feasible)),
        ]);
    }
    Ok(render("distortion_target,demand,supply,margin,feasible", rows))
}

pub fn run_sweep(l: &Loaded, axis: &str, grid: &[f64]) -> Result<String> {
    if grid.is_empty() {
        return Err(LimitsError::InvalidSpec("empty sweep grid".into()));
    }
    match axis {
        "block_len" => sweep_block_len(l, grid),
        "gate_budget" | "channel_uses" => sweep_budget(l, axis, grid),
        "lambda" => sweep_lambda(l, grid),
        "distortion_target" => sweep_distortion(l, grid),
        other => Err(LimitsError::InvalidSpec(format!(
            "axis {other:?} is not a numeric scenario field (choose block_len, gate_budget, channel_uses, lambda, or distortion_target)"
        ))),
    }
}
