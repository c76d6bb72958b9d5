use num_complex::Complex64 as C64;
use serde_json::json;
use std::sync::Arc;

use super::{Command, CommandOutput, ExperimentConfig};
use crate::bers::{aw_section, bers_projection, LaurentSeries};
use crate::circle::{holder_seminorm_of, liouville_norm, symmetry_ladder};
use crate::error::Result;
use crate::fields::{lp_norm_hyperbolic, sup_norm_weighted, DiskGrid, HolomorphicField};
use crate::moebius::{pullback, MobiusMap};
use crate::rigidity::{decay_class_check, orbit_series, OrbitOptions};
use crate::solver::solve_principal;
use crate::wp::subdivision::sandwich_lower;
use crate::wp::{inequality_suite, segment_length, wp_upper_bound_subdivision, Constants};

/// Weighted-sup error allowed against the closed-form Schwarzian.
pub const BERS_ORACLE_TOL: f64 = 1e-4;
/// Error allowed against `z + k z̄` and `z + k/z`.
pub const SOLVE_ORACLE_TOL: f64 = 1e-3;
/// Slack on `residual <= tail`.
pub const RESIDUAL_SLACK: f64 = 1e-8;

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let grid = Arc::new(cfg.grid.build()?);
    match command {
        Command::Solve => solve(cfg, &grid),
        Command::Bers => bers(cfg, &grid),
        Command::Aw => aw(cfg, &grid),
        Command::Rigidity => rigidity(cfg, &grid),
        Command::WpBound => wp_bound(cfg, &grid),
        Command::Qs => qs(cfg),
        Command::Cocycle => cocycle(cfg),
        Command::Verify => verify(cfg),
    }
}

fn series_csv(series: &LaurentSeries, terms: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["power", "re", "im"])?;
    for (k, c) in series.coeffs.iter().take(terms).enumerate() {
        w.write_record([
            format!("-{k}"),
            format!("{:.17e}", c.re),
            format!("{:.17e}", c.im),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

fn diff(a: &HolomorphicField, b: &HolomorphicField) -> Result<HolomorphicField> {
    a.combine(C64::new(1.0, 0.0), b, C64::new(-1.0, 0.0))
}

fn solve(cfg: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let mu = cfg.solve.mu.build(grid, cfg.seed)?;
    let sol = solve_principal(&mu, &cfg.solver)?;
    let dil = sol.dilatation()?;
    let inner = grid.rings_within(0.9) * grid.angles;
    let round_trip = (0..inner)
        .map(|i| (dil.values()[i] - mu.values()[i]).norm())
        .fold(0.0, f64::max);
    out.put("mu_sup", mu.sup())?;
    out.put("iterations", sol.diagnostics.iterations)?;
    out.put("converged", sol.diagnostics.converged)?;
    out.put("residual_trace", &sol.diagnostics.residual_trace)?;
    out.put("dilatation_round_trip", round_trip)?;
    if let Some(k) = cfg.solve.mu.full_disk_constant() {
        let interior = (0..grid.len())
            .map(|i| {
                let z = grid.node_at(i);
                (sol.values()[i] - (z + k * z.conj())).norm()
            })
            .fold(0.0, f64::max);
        let exterior = (0..grid.len())
            .map(|i| {
                let z = grid.exterior_node_at(i);
                (sol.eval(z) - (z + k / z)).norm()
            })
            .fold(0.0, f64::max);
        out.put("oracle_interior_error", interior)?;
        out.put("oracle_exterior_error", exterior)?;
        out.flag("constant_oracle", interior.max(exterior) < SOLVE_ORACLE_TOL);
    }
    if let Some(series) = sol.exterior_laurent() {
        out.file("exterior_series.csv", series_csv(series, 64)?);
    }
    Ok(out)
}

fn bers(cfg: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let mu = cfg.bers.mu.build(grid, cfg.seed)?;
    let phi = bers_projection(&mu, &cfg.solver)?;
    out.put("mu_sup", mu.sup())?;
    out.put("phi_sup", sup_norm_weighted(&phi, -2.0)?.value)?;
    out.put("phi_l2", lp_norm_hyperbolic(&phi, 2.0)?.value)?;
    if let Some(series) = phi.laurent() {
        let head: Vec<[f64; 2]> = series
            .coeffs
            .iter()
            .take(cfg.bers.terms)
            .map(|c| [c.re, c.im])
            .collect();
        out.put("series", head)?;
        out.file("series.csv", series_csv(series, cfg.bers.terms)?);
    }
    if let Some(k) = cfg.bers.mu.full_disk_constant() {
        let exact = HolomorphicField::from_fn(grid.clone(), move |z| {
            let d = z * z - k;
            -6.0 * k / (d * d)
        });
        let err = sup_norm_weighted(&diff(&phi, &exact)?, -2.0)?.value;
        out.put("oracle_sup_error", err)?;
        out.flag("closed_form", err < BERS_ORACLE_TOL);
    }
    Ok(out)
}

fn aw(cfg: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let phi = cfg.aw.phi.build(grid)?;
    let mu = aw_section(&phi)?;
    let back = bers_projection(&mu, &cfg.solver)?;
    let norm = sup_norm_weighted(&phi, -2.0)?.value;
    let err = sup_norm_weighted(&diff(&back, &phi)?, -2.0)?.value;
    out.put("phi_sup", norm)?;
    out.put("mu_sup", mu.sup())?;
    out.put("round_trip_error", err)?;
    out.put("relative_error", err / norm)?;
    out.flag("round_trip", err <= cfg.aw.tolerance * norm);
    Ok(out)
}

fn rigidity(cfg: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let r = &cfg.rigidity;
    let gamma = MobiusMap::exterior_hyperbolic(r.lambda, r.attract_angle, r.repel_angle)?;
    let phi0 = r.phi.build(grid)?;
    let psi = if r.coboundary {
        diff(&pullback(&phi0, &gamma)?, &phi0)?
    } else {
        phi0
    };
    let opts = OrbitOptions {
        alpha: r.alpha,
        rel_tol: r.rel_tol,
        direction: r.direction,
        exclusion: r.exclusion,
        ..Default::default()
    };
    let mut res = orbit_series(&psi, &gamma, &opts)?;
    let residual = res.verify(&gamma, &psi, r.exclusion)?;
    let decay = decay_class_check(&res.phi, r.alpha)?;
    out.put("certificate", &res.certificate)?;
    out.put("decay", decay)?;
    out.put(
        "fixed_points",
        res.fixed_points()
            .iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>(),
    )?;
    out.flag(
        "residual_within_tail",
        residual <= res.tail() + RESIDUAL_SLACK,
    );
    out.flag(
        "tail_below_tolerance",
        res.tail() <= r.rel_tol * res.certificate.psi_norm * (1.0 + 1e-9),
    );
    out.file("certificate.json", res.certificate_json()?);
    Ok(out)
}

fn wp_bound(cfg: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let w = &cfg.wp_bound;
    let consts = Constants::new(w.p)?;
    let mu = w.mu.build(grid, cfg.seed)?;
    let trace = wp_upper_bound_subdivision(&mu, &consts, &cfg.solver)?;
    let phi = bers_projection(&mu, &cfg.solver)?;
    let lower = sandwich_lower(&phi, w.p)?;
    let phi_sup = sup_norm_weighted(&phi, -2.0)?.value;
    out.put("constants", consts)?;
    out.put("trace", &trace)?;
    out.put("phi_sup", phi_sup)?;
    out.put("lower_bound", lower)?;
    out.flag(
        "steps_in_ball",
        trace.steps.iter().all(|s| s.phi_sup < consts.delta0),
    );
    out.flag("dominates_lower", trace.bound >= lower);
    if phi_sup < consts.delta0 {
        let zero = HolomorphicField::zero(grid.clone());
        let seg = segment_length(&zero, &phi, &consts, w.segment_nodes, &cfg.solver)?;
        out.put("segment_length", &seg)?;
        out.flag("segment_dominates_lower", seg.value >= lower);
        out.flag("dominates_segment", trace.bound >= seg.value);
    }
    let mut csv = csv::Writer::from_writer(vec![]);
    csv.write_record([
        "step",
        "t_prev",
        "t",
        "step_sup",
        "step_limit",
        "phi_sup",
        "phi_p",
    ])?;
    for (i, s) in trace.steps.iter().enumerate() {
        csv.write_record([
            (i + 1).to_string(),
            s.t_prev.to_string(),
            s.t.to_string(),
            format!("{:.10e}", s.step_sup),
            format!("{:.10e}", s.step_limit),
            format!("{:.10e}", s.phi_sup),
            format!("{:.10e}", s.phi_p),
        ])?;
    }
    out.file(
        "steps.csv",
        String::from_utf8(csv.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
    );
    Ok(out)
}

fn qs(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let c = &cfg.qs;
    c.map.validate(c.samples)?;
    let ladder = symmetry_ladder(&c.map, c.levels, c.samples)?;
    out.put("map", &c.map)?;
    out.put("ladder", &ladder)?;
    out.put("decreasing", ladder.decreasing())?;
    if c.map.has_derivative() {
        out.put(
            "holder_seminorm",
            holder_seminorm_of(&c.map, c.alpha, c.samples)?,
        )?;
    }
    let mut csv = csv::Writer::from_writer(vec![]);
    csv.write_record(["t", "modulus", "max_quotient", "min_quotient"])?;
    for i in 0..ladder.t.len() {
        csv.write_record([
            ladder.t[i].to_string(),
            format!("{:.12e}", ladder.modulus[i]),
            format!("{:.12e}", ladder.max_quotient[i]),
            format!("{:.12e}", ladder.min_quotient[i]),
        ])?;
    }
    out.file(
        "ladder.csv",
        String::from_utf8(csv.into_inner().map_err(|e| e.into_error())?).expect("utf-8"),
    );
    Ok(out)
}

fn cocycle(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let c = &cfg.cocycle;
    c.map.validate(c.samples)?;
    let report = liouville_norm(&c.map, c.samples, c.band)?;
    out.put("map", &c.map)?;
    out.put("total", report.total())?;
    out.put("liouville", &report)?;
    Ok(out)
}

fn verify(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let mut out = CommandOutput::default();
    let report = inequality_suite(&cfg.suite())?;
    for c in &report.checks {
        if let Some(ok) = c.pass {
            let key = match c.p {
                Some(p) => format!("{}_p{p}", c.name),
                None => c.name.clone(),
            };
            out.flag(&key, ok);
        }
    }
    out.put("report", &report)?;
    let mut csv = vec![];
    report.write_csv(&mut csv)?;
    out.file("ratios.csv", String::from_utf8(csv).expect("utf-8"));
    out.file("report.json", serde_json::to_string_pretty(&report)?);
    out.put(
        "summary",
        json!({ "all_certified_pass": report.all_certified_pass, "checks": report.checks.len() }),
    )?;
    Ok(out)
}
