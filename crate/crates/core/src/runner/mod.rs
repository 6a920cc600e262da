//! Scenario orchestration, reports and the built-in suite. The only module
//! that touches the filesystem.

mod config;
mod report;
mod suite;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    key_reference, parse_config, CheckList, ConfigError, IdentityId, ManifoldSpec, Profile, ScenarioConfig, Tolerances,
    KEYS,
};
pub use report::{emit_report, margin_table, timeseries_csv, CSV_FIXED_COLUMNS};
pub use suite::{dumbbell, standard_suite, STANDARD_NAMES};

use crate::error::Result;
use crate::geometry::{gradient_norm_sq, scalar_curvature, ScalarField};
use crate::harnack::{
    attribute_refinement, constants, default_t_min, lnvv_check, lyh_check, margin_series, path_sweep, theorem_margin,
    HarnackConstants, MarginReport, PathSweep, Refinement, Variant,
};
use crate::identities::{
    assign_orders, bochner_residual, f_evolution_residual, f_rearranged_residual, quotient_rule_residual,
    yz_decomposition_check, IdentityResidual,
};
use crate::pme::{mass, pressure_consistency, run, Trajectory};
use crate::ricci_flow::{verify_hypotheses, FlowHypothesisReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Identity residuals must shrink at least this fast under refinement.
pub const MIN_IDENTITY_ORDER: f64 = 1.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    HypothesisInvalid,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail | Status::Error => 2,
            Status::HypothesisInvalid => 3,
        }
    }
}

/// Exit code of a batch: any failure wins over invalid hypotheses.
pub fn batch_exit_code(summaries: &[RunSummary]) -> i32 {
    summaries.iter().map(|s| s.status).max().unwrap_or(Status::Pass).exit_code()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub stored_states: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub cells: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// `max |v_t - pressure equation|` with the stored second-order `v_t`.
    pub pressure_consistency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub initial: f64,
    pub max_relative_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// One row per stored time; `worst_f_margin[i]` belongs to `margin_b[i]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub margin_b: Vec<f64>,
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub r_max_t: Vec<f64>,
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    pub v_min: Vec<f64>,
    pub v_max: Vec<f64>,
    pub worst_f_margin: Vec<Vec<Option<f64>>>,
}

/// `pass` compares against the tolerance, or against the measured orders
/// when the run was refined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub residual: IdentityResidual,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: u32,
    pub cells: usize,
    pub dt: f64,
    pub store_every: usize,
    pub margins: Vec<MarginReport>,
    pub identities: Vec<IdentityResidual>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginRefinement {
    pub estimate: String,
    pub coarse: f64,
    pub fine: f64,
    pub attribution: Refinement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOrders {
    pub id: String,
    pub residuals: Vec<f64>,
    pub orders: Vec<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<LevelReport>,
    pub margins: Vec<MarginRefinement>,
    pub identities: Vec<IdentityOrders>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub code_version: String,
    pub scenario: String,
    pub status: Status,
    pub error: Option<String>,
    pub hypotheses: Option<FlowHypothesisReport>,
    pub trajectory: Option<TrajectoryStats>,
    pub mass: Option<MassReport>,
    pub margins: Vec<MarginReport>,
    pub paths: Vec<PathSweep>,
    pub identities: Vec<IdentityCheck>,
    pub refinement: Option<RefinementReport>,
    /// Checks not run, with the reason.
    pub skipped: Vec<String>,
    pub series: TimeSeries,
    pub config: ScenarioConfig,
    /// The only field that differs between identical runs.
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    fn failed(cfg: &ScenarioConfig, error: String, started: Instant) -> RunSummary {
        RunSummary {
            schema_version: SCHEMA_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario: cfg.name.clone(),
            status: Status::Error,
            error: Some(error),
            hypotheses: None,
            trajectory: None,
            mass: None,
            margins: vec![],
            paths: vec![],
            identities: vec![],
            refinement: None,
            skipped: vec![],
            series: TimeSeries::default(),
            config: cfg.clone(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        }
    }

    /// Worst theorem margin with this estimate name, e.g. `general_b_b2`.
    pub fn margin(&self, estimate: &str) -> Option<&MarginReport> {
        self.margins.iter().find(|m| m.estimate == estimate)
    }
}

/// Harnack constants requested by the check list, in order: each variant
/// with a fixed `b` once, the general family at every listed `b`.
pub fn requested_constants(cfg: &ScenarioConfig, n: usize) -> Result<Vec<HarnackConstants>> {
    let mut out = Vec::new();
    for &variant in &cfg.checks.variants {
        match variant.fixed_b() {
            Some(b) => out.push(constants(n, cfg.pme.p, b, variant)?),
            None => {
                for &b in &cfg.checks.b_values {
                    out.push(constants(n, cfg.pme.p, b, variant)?);
                }
            }
        }
    }
    Ok(out)
}

/// `b` values of the per-time margin columns.
fn series_b(cfg: &ScenarioConfig) -> Vec<f64> {
    let mut bs: Vec<f64> = Vec::new();
    let fixed = cfg.checks.variants.iter().filter_map(|v| v.fixed_b());
    for b in cfg.checks.b_values.iter().copied().chain(fixed) {
        if !bs.contains(&b) {
            bs.push(b);
        }
    }
    bs
}

enum Job {
    Margin(HarnackConstants),
    Lnvv(f64),
    Lyh,
    Paths(HarnackConstants),
    Identity(IdentityId, f64),
}

enum Outcome {
    Margin(MarginReport),
    Paths(PathSweep),
    Identity(Vec<IdentityResidual>),
}

fn identity_b(cfg: &ScenarioConfig) -> Vec<f64> {
    if cfg.checks.b_values.is_empty() {
        vec![2.0]
    } else {
        cfg.checks.b_values.clone()
    }
}

fn plan(cfg: &ScenarioConfig, n: usize, hypotheses_ok: bool, skipped: &mut Vec<String>) -> Result<Vec<Job>> {
    let mut jobs = Vec::new();
    let consts = requested_constants(cfg, n)?;
    if hypotheses_ok {
        jobs.extend(consts.iter().map(|c| Job::Margin(*c)));
        if cfg.checks.lyh {
            jobs.push(Job::Lyh);
        }
        if cfg.checks.curves > 0 {
            for &b in &cfg.checks.b_values {
                jobs.push(Job::Paths(constants(n, cfg.pme.p, b, Variant::GeneralB)?));
            }
        }
    } else {
        for c in &consts {
            skipped.push(format!("{}_b{}: curvature hypotheses fail", c.variant.name(), c.b));
        }
        if cfg.checks.lyh {
            skipped.push("lyh_trace: curvature hypotheses fail".into());
        }
        if cfg.checks.curves > 0 && !cfg.checks.b_values.is_empty() {
            skipped.push("path checks: curvature hypotheses fail".into());
        }
    }
    jobs.extend(cfg.checks.lnvv_alpha.iter().map(|&a| Job::Lnvv(a)));
    for &id in &cfg.checks.identities {
        match id {
            IdentityId::Bochner | IdentityId::QuotientRule => jobs.push(Job::Identity(id, 0.0)),
            _ => jobs.extend(identity_b(cfg).into_iter().map(|b| Job::Identity(id, b))),
        }
    }
    Ok(jobs)
}

fn renamed(mut r: IdentityResidual, id: String) -> IdentityResidual {
    r.id = id;
    r
}

fn identity(traj: &Trajectory, id: IdentityId, b: f64) -> Result<Vec<IdentityResidual>> {
    let tag = |name: &str| format!("{name}_b{b}");
    Ok(match id {
        IdentityId::FEvolution => {
            vec![renamed(f_evolution_residual(traj, traj.a, b, 1.0 - b)?, tag("f_evolution"))]
        }
        IdentityId::FRearranged => vec![renamed(f_rearranged_residual(traj, b)?, tag("f_rearranged"))],
        IdentityId::QuotientRule => {
            let f = traj
                .states
                .iter()
                .map(|s| gradient_norm_sq(&s.v, &s.manifold))
                .collect::<Result<Vec<ScalarField>>>()?;
            let g: Vec<ScalarField> = traj.states.iter().map(|s| s.u.clone()).collect();
            let r = quotient_rule_residual(&f, &g, traj)?;
            vec![renamed(r, "quotient_rule".into())]
        }
        IdentityId::Bochner => {
            let s = &traj.states[traj.len() / 2];
            vec![bochner_residual(&s.v, &s.manifold)?]
        }
        IdentityId::YzDecomposition => {
            let yz = yz_decomposition_check(traj, b)?;
            vec![renamed(yz.decomposition, tag("yz_decomposition")), renamed(yz.pressure_form, "yz_pressure_form".into())]
        }
    })
}

fn execute(traj: &Trajectory, cfg: &ScenarioConfig, jobs: &[Job]) -> Result<Vec<Outcome>> {
    let tol = &cfg.tolerances;
    let t_min = cfg.checks.t_min.unwrap_or_else(|| default_t_min(traj));
    jobs.par_iter()
        .map(|job| {
            Ok(match job {
                Job::Margin(c) => Outcome::Margin(theorem_margin(traj, c, t_min, tol.ineq)?),
                Job::Lnvv(alpha) => Outcome::Margin(lnvv_check(traj, *alpha, t_min, tol.ineq)?),
                Job::Lyh => Outcome::Margin(lyh_check(traj, tol.lyh)?),
                Job::Paths(c) => Outcome::Paths(path_sweep(traj, c, cfg.checks.seed, cfg.checks.curves, t_min, tol.path)?),
                Job::Identity(id, b) => Outcome::Identity(identity(traj, *id, *b)?),
            })
        })
        .collect()
}

fn stats(traj: &Trajectory) -> Result<TrajectoryStats> {
    let fold = |f: &dyn Fn(&crate::pme::StoredState) -> f64, min: bool| {
        traj.states.iter().map(f).fold(if min { f64::INFINITY } else { f64::NEG_INFINITY }, |a, b| {
            if min {
                a.min(b)
            } else {
                a.max(b)
            }
        })
    };
    Ok(TrajectoryStats {
        stored_states: traj.len(),
        t_start: traj.states[0].time(),
        t_end: traj.last().time(),
        cells: traj.states[0].manifold.cells(),
        u_min: fold(&|s| s.u.min(), true),
        u_max: fold(&|s| s.u.max(), false),
        v_min: fold(&|s| s.v.min(), true),
        v_max: fold(&|s| s.v.max(), false),
        pressure_consistency: pressure_consistency(traj)?,
    })
}

fn series(traj: &Trajectory, cfg: &ScenarioConfig, hypotheses_ok: bool) -> Result<TimeSeries> {
    let masses = mass(traj)?;
    let margin_b = series_b(cfg);
    let worst_f_margin = margin_b
        .iter()
        .map(|&b| {
            if hypotheses_ok {
                margin_series(traj, &constants(traj.dim(), traj.p, b, Variant::GeneralB)?)
            } else {
                Ok(vec![None; traj.len()])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries {
        margin_b,
        t: masses.iter().map(|m| m.0).collect(),
        mass: masses.iter().map(|m| m.1).collect(),
        r_max_t: traj.states.iter().map(|s| scalar_curvature(&s.manifold).max()).collect(),
        u_min: traj.states.iter().map(|s| s.u.min()).collect(),
        u_max: traj.states.iter().map(|s| s.u.max()).collect(),
        v_min: traj.states.iter().map(|s| s.v.min()).collect(),
        v_max: traj.states.iter().map(|s| s.v.max()).collect(),
        worst_f_margin,
    })
}

/// Trajectory of a scenario.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory> {
    run(&cfg.pme, &cfg.manifold.build()?)
}

struct Level {
    margins: Vec<MarginReport>,
    paths: Vec<PathSweep>,
    identities: Vec<IdentityResidual>,
    hypotheses: FlowHypothesisReport,
    skipped: Vec<String>,
}

fn evaluate(traj: &Trajectory, cfg: &ScenarioConfig) -> Result<Level> {
    let hypotheses = verify_hypotheses(&traj.manifolds())?;
    let mut skipped = Vec::new();
    let jobs = plan(cfg, traj.dim(), hypotheses.satisfied(), &mut skipped)?;
    let mut level = Level { margins: vec![], paths: vec![], identities: vec![], hypotheses, skipped };
    for outcome in execute(traj, cfg, &jobs)? {
        match outcome {
            Outcome::Margin(m) => level.margins.push(m),
            Outcome::Paths(p) => level.paths.push(p),
            Outcome::Identity(rs) => {
                for r in rs {
                    // the pressure form does not depend on b
                    if !level.identities.iter().any(|x| x.id == r.id) {
                        level.identities.push(r);
                    }
                }
            }
        }
    }
    Ok(level)
}

fn summarize(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let traj = simulate(cfg)?;
    let level = evaluate(&traj, cfg)?;
    let masses = mass(&traj)?;
    let initial = masses[0].1;
    let drift = masses.iter().map(|(_, m)| (m / initial - 1.0).abs()).fold(0.0, f64::max);
    let mass = MassReport {
        initial,
        max_relative_drift: drift,
        tolerance: cfg.tolerances.mass,
        pass: drift <= cfg.tolerances.mass,
    };
    let identities = level
        .identities
        .into_iter()
        .map(|residual| {
            let pass = residual.max_abs_residual <= cfg.tolerances.identity;
            IdentityCheck { residual, tolerance: cfg.tolerances.identity, pass }
        })
        .collect();
    let hypotheses_ok = level.hypotheses.satisfied();
    let mut summary = RunSummary {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.name.clone(),
        status: Status::Pass,
        error: None,
        hypotheses: Some(level.hypotheses),
        trajectory: Some(stats(&traj)?),
        mass: Some(mass),
        margins: level.margins,
        paths: level.paths,
        identities,
        refinement: None,
        skipped: level.skipped,
        series: series(&traj, cfg, hypotheses_ok)?,
        config: cfg.clone(),
        wall_clock_seconds: 0.0,
    };
    summary.status = status_of(&summary);
    Ok(summary)
}

fn status_of(s: &RunSummary) -> Status {
    let checks_pass = s.mass.as_ref().is_none_or(|m| m.pass)
        && s.margins.iter().all(|m| m.pass)
        && s.paths.iter().all(|p| p.multiplicative.pass && p.additive.pass)
        && s.identities.iter().all(|i| i.pass)
        && s.refinement.as_ref().is_none_or(|r| r.margins.iter().all(|m| m.attribution != Refinement::Violation));
    if !checks_pass {
        Status::Fail
    } else if s.hypotheses.as_ref().is_some_and(|h| !h.satisfied()) {
        Status::HypothesisInvalid
    } else {
        Status::Pass
    }
}

/// Run one scenario. Failures are reported in the summary, never raised.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunSummary {
    run_refined(cfg, 0)
}

/// Run a scenario and, for `k > 0`, the same scenario at `k` successive
/// refinements `(h/2, dt/4)`. Positive margins are attributed to
/// discretization if they shrink threefold at the first refinement; the
/// identities must converge at order [`MIN_IDENTITY_ORDER`] unless already
/// within tolerance.
pub fn run_refined(cfg: &ScenarioConfig, k: u32) -> RunSummary {
    let started = Instant::now();
    let mut summary = match summarize(cfg) {
        Ok(s) => s,
        Err(e) => return RunSummary::failed(cfg, format!("scenario {}: {e}", cfg.name), started),
    };
    if k > 0 {
        match refinement(cfg, &summary, k) {
            Ok(r) => {
                for (check, orders) in summary.identities.iter_mut().zip(&r.identities) {
                    check.pass = orders.pass;
                }
                summary.refinement = Some(r);
            }
            Err(e) => {
                summary.error = Some(format!("scenario {} refinement: {e}", cfg.name));
                summary.status = Status::Error;
            }
        }
        if summary.status != Status::Error {
            summary.status = status_of(&summary);
        }
    }
    summary.wall_clock_seconds = started.elapsed().as_secs_f64();
    summary
}

fn refinement(cfg: &ScenarioConfig, base: &RunSummary, k: u32) -> Result<RefinementReport> {
    let mut levels = vec![LevelReport {
        level: 0,
        cells: cfg.manifold.cells(),
        dt: cfg.pme.dt,
        store_every: cfg.pme.store_every,
        margins: base.margins.clone(),
        identities: base.identities.iter().map(|i| i.residual.clone()).collect(),
    }];
    for level in 1..=k {
        let fine = cfg.refined(level).ok_or_else(|| {
            crate::Error::InvalidParameter("tabulated data cannot be refined".into())
        })?;
        let traj = simulate(&fine)?;
        let out = evaluate(&traj, &fine)?;
        levels.push(LevelReport {
            level,
            cells: fine.manifold.cells(),
            dt: fine.pme.dt,
            store_every: fine.pme.store_every,
            margins: out.margins,
            identities: out.identities,
        });
    }
    let margins = levels[0]
        .margins
        .iter()
        .zip(&levels[1].margins)
        .map(|(c, f)| MarginRefinement {
            estimate: c.estimate.clone(),
            coarse: c.worst_margin,
            fine: f.worst_margin,
            attribution: attribute_refinement(c, f),
        })
        .collect();
    let identities = (0..levels[0].identities.len())
        .map(|i| {
            let mut seq: Vec<IdentityResidual> = levels.iter().map(|l| l.identities[i].clone()).collect();
            assign_orders(&mut seq);
            let residuals: Vec<f64> = seq.iter().map(|r| r.max_abs_residual).collect();
            let orders: Vec<f64> = seq.iter().filter_map(|r| r.measured_order).collect();
            let converged = orders.iter().all(|&o| o >= MIN_IDENTITY_ORDER);
            let negligible = residuals.iter().all(|&r| r <= cfg.tolerances.identity);
            IdentityOrders { id: seq[0].id.clone(), residuals, orders, pass: converged || negligible }
        })
        .collect();
    Ok(RefinementReport { levels, margins, identities })
}

/// Run scenarios concurrently; results keep the input order.
pub fn run_batch(configs: &[ScenarioConfig], refine: u32) -> Vec<RunSummary> {
    configs.par_iter().map(|c| run_refined(c, refine)).collect()
}
