//! Scenario execution: one staging directory per run, published atomically.

use super::artifact::{
    publish, snapshot_name, staging_dir, write_csv, write_snapshot, write_text, RunArtifact, RunStatus,
    CERTIFICATES, CONFIG_ECHO, INVARIANTS, SLOPES, SNAPSHOT_DIR, SUMMARY, VERDICT,
};
use super::config::{LoadedConfig, ScenarioConfig, ScenarioKind};
use super::report::emit_report;
use super::HarnessError;
use crate::evolution::{
    evolve, multipeakon_evolve, positivity_certificate_tol, MultipeakonOutcome, Termination, Trajectory,
};
use crate::field::{Field, Grid};
use crate::functionals::{Calculus, InvariantRecord};
use crate::profiles::{
    field_from_measure, field_from_signed_measure, mollified_peakon, momentum_from_measure,
    multipeakon_field_resolved, perturbed_peakon_with_width, random_measure, BumpShape, MeasureComponent, MeasureSpec,
    PeakonState, SignedMeasureSpec,
};
use crate::stability::{gh_certificate, refinement_study, shock_weak_residual, theorem1_verify};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Full run including time evolution.
    Simulate,
    /// Static certificates on the initial data only.
    Verify,
}

/// What a scenario body reports back to the runner.
struct Outcome {
    status: RunStatus,
    verdict: String,
    message: String,
}

fn pass_fail(ok: bool) -> RunStatus {
    if ok {
        RunStatus::Pass
    } else {
        RunStatus::Fail
    }
}

/// Runs the scenario of `loaded` into its output directory.
pub fn run_scenario(loaded: &LoadedConfig, mode: Mode) -> Result<RunArtifact, HarnessError> {
    let cfg = &loaded.config;
    cfg.validate()?;
    let target = cfg.output.clone();
    let staging = staging_dir(&target)?;
    let result = if cfg.kind == ScenarioKind::StabilityRun && !cfg.sweep.seeds.is_empty() {
        run_seed_sweep(cfg, &loaded.source, &staging, mode)
    } else {
        run_into(cfg, &loaded.source, &staging, mode)
    };
    match result {
        Ok(art) => {
            publish(&staging, &target)?;
            Ok(art)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            Err(e)
        }
    }
}

fn run_seed_sweep(cfg: &ScenarioConfig, source: &str, dir: &Path, mode: Mode) -> Result<RunArtifact, HarnessError> {
    write_text(&dir.join(CONFIG_ECHO), &cfg.echo(source)?)?;
    let children: Vec<(u64, RunArtifact)> = cfg
        .sweep
        .seeds
        .par_iter()
        .map(|&seed| {
            let mut child = cfg.clone();
            child.seed = seed;
            child.sweep.seeds.clear();
            let sub = dir.join(format!("seed_{seed}"));
            fs::create_dir_all(&sub).map_err(|e| HarnessError::io(&sub, e))?;
            run_into(&child, source, &sub, mode).map(|a| (seed, a))
        })
        .collect::<Result<_, _>>()?;
    let mut art = RunArtifact::new(cfg.kind.name());
    let mut verdict = String::new();
    let mut summary = String::new();
    let mut status = RunStatus::Pass;
    for (seed, child) in &children {
        status = status.worst(child.status);
        let _ = writeln!(verdict, "seed_{seed} = {:?}", child.status);
        let child_summary = dir.join(format!("seed_{seed}")).join(SUMMARY);
        if let Ok(text) = fs::read_to_string(&child_summary) {
            let _ = writeln!(summary, "[seed_{seed}]\n{text}");
        }
        art.children.push(PathBuf::from(format!("seed_{seed}")));
    }
    verdict.insert_str(0, &format!("verdict = {}\n", status_word(status)));
    write_text(&dir.join(VERDICT), &verdict)?;
    write_text(&dir.join(SUMMARY), &summary)?;
    art.summary = Some(PathBuf::from(SUMMARY));
    art.set_status(status);
    art.write(dir)?;
    Ok(art)
}

fn status_word(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Pass => "pass",
        RunStatus::Fail => "fail",
        RunStatus::NumericFailure => "numeric_failure",
    }
}

fn run_into(cfg: &ScenarioConfig, source: &str, dir: &Path, mode: Mode) -> Result<RunArtifact, HarnessError> {
    write_text(&dir.join(CONFIG_ECHO), &cfg.echo(source)?)?;
    let mut art = RunArtifact::new(cfg.kind.name());
    let body = match cfg.kind {
        ScenarioKind::StabilityRun => stability_run(cfg, dir, mode, &mut art),
        ScenarioKind::PeakonTranslation => peakon_translation(cfg, dir, mode, &mut art),
        ScenarioKind::Collision => collision(cfg, dir, mode, &mut art),
        ScenarioKind::Blowup => blowup(cfg, dir, mode, &mut art),
        ScenarioKind::CertificateSweep => certificate_sweep(cfg, dir, &mut art),
        ScenarioKind::ShockResidual => shock_residual(cfg, dir, &mut art),
    };
    let outcome = match body {
        Ok(o) => o,
        Err(HarnessError::Numeric(e)) => {
            art.partial = true;
            Outcome {
                status: RunStatus::NumericFailure,
                verdict: format!("verdict = numeric_failure\nmessage = {e}\n"),
                message: e.to_string(),
            }
        }
        Err(e) => return Err(e),
    };
    write_text(&dir.join(VERDICT), &outcome.verdict)?;
    art.message = outcome.message;
    art.set_status(outcome.status);
    if outcome.status == RunStatus::NumericFailure {
        art.partial = true;
    }
    if mode == Mode::Simulate && cfg.kind.evolves() && art.snapshots.is_some() && art.invariants.is_some() {
        art.write(dir)?;
        let (plots, summary) = emit_report(dir)?;
        art.plots = plots;
        art.summary = Some(summary);
    }
    art.write(dir)?;
    Ok(art)
}

#[derive(Serialize)]
struct SlopeRow {
    t: f64,
    min_slope: f64,
    threshold: f64,
}

/// Invariant log, per-step slopes and kept snapshots.
fn write_trajectory(cfg: &ScenarioConfig, dir: &Path, traj: &Trajectory, art: &mut RunArtifact) -> Result<(), HarnessError> {
    write_csv::<InvariantRecord>(&dir.join(INVARIANTS), "invariants", &traj.records)?;
    art.invariants = Some(PathBuf::from(INVARIANTS));
    let slopes: Vec<SlopeRow> = traj
        .step_slopes
        .iter()
        .map(|&(t, min_slope)| SlopeRow { t, min_slope, threshold: cfg.solver.blowup_slope_threshold })
        .collect();
    write_csv(&dir.join(SLOPES), "slopes", &slopes)?;
    let snap_dir = dir.join(SNAPSHOT_DIR);
    fs::create_dir_all(&snap_dir).map_err(|e| HarnessError::io(&snap_dir, e))?;
    if traj.has_all_snapshots() {
        for (i, (t, u)) in traj.states().enumerate() {
            write_snapshot(&snap_dir.join(snapshot_name(i)), t, u)?;
        }
    } else {
        write_snapshot(&snap_dir.join(snapshot_name(0)), traj.final_time(), traj.final_field())?;
    }
    art.snapshots = Some(PathBuf::from(SNAPSHOT_DIR));
    Ok(())
}

fn termination_text(traj: &Trajectory) -> String {
    match &traj.termination {
        Termination::Completed => format!("termination = completed\nsteps = {}\n", traj.steps),
        Termination::BlowupDetected { t, min_slope } => {
            format!("termination = blowup_detected\nblowup_t = {t}\nblowup_min_slope = {min_slope}\nsteps = {}\n", traj.steps)
        }
        Termination::Error { t, message } => format!("termination = error\nerror_t = {t}\nerror = {message}\n"),
    }
}

fn numeric_error(traj: &Trajectory) -> Option<Outcome> {
    if let Termination::Error { t, message } = &traj.termination {
        return Some(Outcome {
            status: RunStatus::NumericFailure,
            verdict: format!("verdict = numeric_failure\n{}", termination_text(traj)),
            message: format!("solver stopped at t = {t}: {message}"),
        });
    }
    None
}

fn max_drift(records: &[InvariantRecord], pick: fn(&InvariantRecord) -> f64) -> f64 {
    let first = records.first().map(pick).unwrap_or(0.0);
    let scale = first.abs().max(f64::MIN_POSITIVE);
    records.iter().map(|r| (pick(r) - first).abs() / scale).fold(0.0, f64::max)
}

#[derive(Serialize)]
struct ProximityRow {
    t: f64,
    xi1: f64,
    distance: f64,
    direct_distance: f64,
    m1: f64,
    an: f64,
    sum_sq: f64,
    e2: f64,
    e3: f64,
    m1_deviation: f64,
    c: f64,
    eps: f64,
    distance_bound: f64,
    m1_halfwidth: f64,
    sum_bound: f64,
}

fn stability_run(cfg: &ScenarioConfig, dir: &Path, mode: Mode, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let grid = cfg.grid()?;
    let (c, eps) = (cfg.profile.c, cfg.profile.eps);
    let pert = perturbed_peakon_with_width(c, eps, cfg.seed, grid, cfg.profile.width)?;
    let traj = match mode {
        Mode::Verify => Trajectory::from_snapshots(vec![0.0], vec![pert.u0.clone()])?,
        Mode::Simulate => {
            let mut solver = cfg.solver.clone();
            solver.keep_snapshots = true;
            let traj = evolve(&pert.u0, &solver)?;
            write_trajectory(cfg, dir, &traj, art)?;
            if let Some(o) = numeric_error(&traj) {
                return Ok(o);
            }
            traj
        }
    };
    let verdict = theorem1_verify(&traj, c, eps)?;
    let rows: Vec<ProximityRow> = verdict
        .snapshots
        .iter()
        .map(|s| {
            let p = &s.proximity;
            ProximityRow {
                t: s.t,
                xi1: p.xi1,
                distance: p.distance,
                direct_distance: p.direct_distance,
                m1: p.m1,
                an: p.an,
                sum_sq: p.sum_sq,
                e2: p.e2,
                e3: p.e3,
                m1_deviation: s.m1_deviation(),
                c,
                eps,
                distance_bound: verdict.bounds.distance,
                m1_halfwidth: verdict.bounds.m1_halfwidth,
                sum_bound: verdict.bounds.sum_sq,
            }
        })
        .collect();
    write_csv(&dir.join(CERTIFICATES), "proximity", &rows)?;
    art.certificates = Some(PathBuf::from(CERTIFICATES));

    let mut text = verdict.to_text();
    let _ = writeln!(text, "seed = {}\nperturbation_scale = {:e}\nhalvings = {}", cfg.seed, pert.scale, pert.halvings);
    let mut ok = verdict.passed();
    if mode == Mode::Verify {
        let cert = gh_certificate(&pert.u0)?;
        let mut parts = vec![peakon_bump(c, cfg.profile.width)];
        parts.extend(pert.perturbation.components.iter().copied());
        let (y_min, pos) = measure_positivity(parts, grid, cfg.tolerances.positivity)?;
        let _ = writeln!(
            text,
            "margin_318 = {:e}\nresidual_e2 = {:e}\nresidual_e3 = {:e}\nmomentum_min = {y_min:e}\npositivity = {pos}",
            cert.margin_318,
            cert.relative_residual_e2(),
            cert.relative_residual_e3(),
        );
        ok &= cert.margin_318 >= -cfg.tolerances.margin && pos;
    } else {
        text.push_str(&termination_text(&traj));
        let _ = writeln!(
            text,
            "drift_e2 = {:e}\ndrift_e3 = {:e}",
            max_drift(&traj.records, |r| r.e2),
            max_drift(&traj.records, |r| r.e3)
        );
        ok &= traj.termination == Termination::Completed;
    }
    let status = pass_fail(ok);
    text.replace_range(..text.find('\n').unwrap_or(0), &format!("verdict = {}", status_word(status)));
    Ok(Outcome { status, verdict: text, message: String::new() })
}

/// Momentum of the mollified peakon `c φ`.
fn peakon_bump(c: f64, width: f64) -> MeasureComponent {
    MeasureComponent { center: 0.0, mass: 2.0 * c, width, shape: BumpShape::Gaussian }
}

/// Sign of the momentum a peakon-based profile is built from. The kink is narrower than the grid,
/// so the certificate applies to the measure, not to derivatives of the interpolant.
fn measure_positivity(components: Vec<MeasureComponent>, grid: Grid, tol: f64) -> Result<(f64, bool), HarnessError> {
    let y = momentum_from_measure(&MeasureSpec { components }, grid)?;
    let min = y.values().iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min, min >= -tol * y.max_abs()))
}

/// `u(x - s)` through the Fourier phase.
fn translate(u: &Field, s: f64) -> Field {
    u.apply_multiplier(|k| Complex64::from_polar(1.0, -k * s), |k| Complex64::new((k * s).cos(), 0.0))
}

fn peakon_translation(cfg: &ScenarioConfig, dir: &Path, mode: Mode, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let grid = cfg.grid()?;
    let c = cfg.profile.c;
    let u0 = mollified_peakon(c, 0.0, cfg.profile.width, grid)?;
    if mode == Mode::Verify {
        let (y_min, pos) = measure_positivity(vec![peakon_bump(c, cfg.profile.width)], grid, cfg.tolerances.positivity)?;
        let status = pass_fail(pos);
        return Ok(Outcome {
            status,
            verdict: format!("verdict = {}\nmomentum_min = {y_min:e}\npositivity = {pos}\n", status_word(status)),
            message: String::new(),
        });
    }
    let traj = evolve(&u0, &cfg.solver)?;
    write_trajectory(cfg, dir, &traj, art)?;
    if let Some(o) = numeric_error(&traj) {
        return Ok(o);
    }
    let t = traj.final_time();
    let exact = translate(&u0, c * t);
    let err = traj.final_field().sub(&exact)?.norm_l2() / u0.norm_l2();
    let (d2, d3) = (max_drift(&traj.records, |r| r.e2), max_drift(&traj.records, |r| r.e3));
    let tol = &cfg.tolerances;
    let ok = traj.termination == Termination::Completed && err < tol.translation && d2 < tol.drift && d3 < tol.drift;
    let status = pass_fail(ok);
    let mut text = format!("verdict = {}\n", status_word(status));
    let _ = writeln!(text, "t = {t}\nrelative_l2_error = {err:e}\nerror_bound = {:e}", tol.translation);
    let _ = writeln!(text, "drift_e2 = {d2:e}\ndrift_e3 = {d3:e}\ndrift_bound = {:e}", tol.drift);
    text.push_str(&termination_text(&traj));
    Ok(Outcome { status, verdict: text, message: String::new() })
}

#[derive(Serialize)]
struct ParticleRow {
    t: f64,
    index: usize,
    p: f64,
    q: f64,
}

#[derive(Serialize)]
struct GapRow {
    t: f64,
    l2_gap: f64,
}

fn collision(cfg: &ScenarioConfig, dir: &Path, mode: Mode, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let grid = cfg.grid()?;
    let state = PeakonState::new(cfg.profile.particles.clone())?;
    let u0 = multipeakon_field_resolved(&state, grid);
    if mode == Mode::Verify {
        let signs = state.particles.iter().map(|p| p.p.signum()).collect::<Vec<_>>();
        let text = format!("verdict = pass\nparticles = {}\namplitude_signs = {signs:?}\nE2 = {:e}\n", state.len(), crate::functionals::e2(&u0));
        return Ok(Outcome { status: RunStatus::Pass, verdict: text, message: String::new() });
    }
    let hist = multipeakon_evolve(&state, cfg.solver.t_end)?;
    let rows: Vec<ParticleRow> = hist
        .times
        .iter()
        .zip(&hist.states)
        .flat_map(|(&t, s)| s.particles.iter().enumerate().map(move |(index, pt)| ParticleRow { t, index, p: pt.p, q: pt.q }))
        .collect();
    write_csv(&dir.join("particles.csv"), "particles", &rows)?;

    let t_pde = match hist.outcome {
        MultipeakonOutcome::CollisionDetected { t, .. } => 0.9 * t,
        MultipeakonOutcome::Completed => cfg.solver.t_end,
    };
    let mut solver = cfg.solver.clone();
    solver.keep_snapshots = true;
    solver.t_end = t_pde;
    let traj = evolve(&u0, &solver)?;
    write_trajectory(cfg, dir, &traj, art)?;
    if let Some(o) = numeric_error(&traj) {
        return Ok(o);
    }
    let gaps = traj
        .states()
        .map(|(t, u)| {
            let particles = hist.state_at(t)?;
            Ok(GapRow { t, l2_gap: u.sub(&multipeakon_field_resolved(&particles, grid))?.norm_l2() })
        })
        .collect::<crate::Result<Vec<_>>>()?;
    write_csv(&dir.join(CERTIFICATES), "pde_gap", &gaps)?;
    art.certificates = Some(PathBuf::from(CERTIFICATES));
    let worst = gaps.iter().map(|g| g.l2_gap).fold(0.0, f64::max);
    let status = pass_fail(worst < cfg.tolerances.pde_gap);
    let mut text = format!("verdict = {}\n", status_word(status));
    match hist.outcome {
        MultipeakonOutcome::CollisionDetected { t, left, position } => {
            let _ = writeln!(text, "collision = true\ncollision_t = {t}\ncollision_left = {left}\ncollision_position = {position}");
        }
        MultipeakonOutcome::Completed => text.push_str("collision = false\n"),
    }
    let _ = writeln!(text, "pde_t_end = {t_pde}\nmax_l2_gap = {worst:e}\ngap_bound = {:e}", cfg.tolerances.pde_gap);
    text.push_str(&termination_text(&traj));
    Ok(Outcome { status, verdict: text, message: String::new() })
}

/// A positive sample of `y` to the left of a negative one, both above `floor`.
fn plus_to_minus(y: &Field, floor: f64) -> bool {
    let v = y.values();
    let first_pos = v.iter().position(|&s| s > floor);
    let last_neg = v.iter().rposition(|&s| s < -floor);
    matches!((first_pos, last_neg), (Some(i), Some(j)) if i < j)
}

fn blowup(cfg: &ScenarioConfig, dir: &Path, mode: Mode, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let grid = cfg.grid()?;
    let spec = SignedMeasureSpec { components: cfg.profile.measure.clone() };
    let u0 = field_from_signed_measure(&spec, grid)?;
    let expect = cfg.profile.expect_blowup;
    if mode == Mode::Verify {
        let y0 = u0.momentum();
        let sign_change = plus_to_minus(&y0, 1e-8 * y0.max_abs());
        let status = pass_fail(sign_change == expect);
        let text = format!(
            "verdict = {}\nplus_to_minus_sign_change = {sign_change}\nexpect_blowup = {expect}\n",
            status_word(status)
        );
        return Ok(Outcome { status, verdict: text, message: String::new() });
    }
    let mut solver = cfg.solver.clone();
    solver.keep_snapshots = true;
    let traj = evolve(&u0, &solver)?;
    write_trajectory(cfg, dir, &traj, art)?;
    if let Some(o) = numeric_error(&traj) {
        return Ok(o);
    }
    let tail = &traj.step_slopes[traj.step_slopes.len() * 4 / 5..];
    let monotone = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let ok = if expect { traj.blew_up() && monotone } else { traj.termination == Termination::Completed };
    let status = pass_fail(ok);
    let mut text = format!("verdict = {}\nexpect_blowup = {expect}\n", status_word(status));
    let _ = writeln!(text, "tail_nonincreasing = {monotone}\nthreshold = {}", cfg.solver.blowup_slope_threshold);
    text.push_str(&termination_text(&traj));
    Ok(Outcome { status, verdict: text, message: String::new() })
}

#[derive(Serialize)]
struct SweepRow {
    seed: u64,
    n: usize,
    m1: f64,
    an: f64,
    bn: f64,
    e2: f64,
    e3: f64,
    residual_e2: f64,
    residual_e3: f64,
    margin_318: f64,
    chain: bool,
    positivity_worst: f64,
    passed: bool,
}

fn certificate_sweep(cfg: &ScenarioConfig, dir: &Path, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let grid = cfg.grid()?;
    let tol = cfg.tolerances;
    let rows: Vec<SweepRow> = (0..cfg.sweep.count as u64)
        .into_par_iter()
        .map(|i| sweep_row(cfg.seed.wrapping_add(i), grid, &tol))
        .collect::<crate::Result<_>>()?;
    write_csv(&dir.join(CERTIFICATES), "certificate_sweep", &rows)?;
    art.certificates = Some(PathBuf::from(CERTIFICATES));
    let failures: Vec<u64> = rows.iter().filter(|r| !r.passed).map(|r| r.seed).collect();
    let status = pass_fail(failures.is_empty());
    let fold = |f: fn(&SweepRow) -> f64, init: f64, op: fn(f64, f64) -> f64| rows.iter().map(f).fold(init, op);
    let summary = format!(
        "fields = {}\nfailures = {}\nmax_residual_e2 = {:e}\nmax_residual_e3 = {:e}\nmin_margin_318 = {:e}\nmin_positivity = {:e}\n",
        rows.len(),
        failures.len(),
        fold(|r| r.residual_e2, 0.0, f64::max),
        fold(|r| r.residual_e3, 0.0, f64::max),
        fold(|r| r.margin_318, f64::INFINITY, f64::min),
        fold(|r| r.positivity_worst, f64::INFINITY, f64::min),
    );
    write_text(&dir.join(SUMMARY), &summary)?;
    art.summary = Some(PathBuf::from(SUMMARY));
    let verdict = format!("verdict = {}\nfailed_seeds = {failures:?}\n{summary}", status_word(status));
    Ok(Outcome { status, verdict, message: String::new() })
}

fn sweep_row(seed: u64, grid: Grid, tol: &super::config::Tolerances) -> crate::Result<SweepRow> {
    let u = field_from_measure(&random_measure(seed, grid), grid)?;
    let cert = gh_certificate(&u)?;
    let pos = positivity_certificate_tol(&u, 1.0, 2.0, Calculus::Spectral, tol.positivity)?;
    let chain = cert.m1 > 0.0 && cert.m1 <= cert.an + 1e-10 && cert.an <= (cert.e2 / 12.0).sqrt() + 1e-10;
    let (r2, r3) = (cert.relative_residual_e2(), cert.relative_residual_e3());
    let passed = r2 < tol.residual && r3 < tol.residual && cert.margin_318 >= -tol.margin && chain && pos.passed();
    Ok(SweepRow {
        seed,
        n: cert.n,
        m1: cert.m1,
        an: cert.an,
        bn: cert.bn,
        e2: cert.e2,
        e3: cert.e3,
        residual_e2: r2,
        residual_e3: r3,
        margin_318: cert.margin_318,
        chain,
        positivity_worst: pos.worst().worst,
        passed,
    })
}

#[derive(Serialize)]
struct ResidualCsvRow {
    points: usize,
    t: f64,
    center: f64,
    half_width: f64,
    away_from_jump: bool,
    residual: f64,
}

#[derive(Serialize)]
struct RefinementRow {
    points: usize,
    max_residual: f64,
    order: Option<f64>,
}

fn shock_residual(cfg: &ScenarioConfig, dir: &Path, art: &mut RunArtifact) -> Result<Outcome, HarnessError> {
    let (k, times) = (cfg.profile.k, &cfg.profile.times);
    let study = refinement_study(cfg.grid.l, &cfg.sweep.points, |g| Ok(shock_weak_residual(k, g, times)?.max_residual()))?;
    let report = shock_weak_residual(k, cfg.grid()?, times)?;
    let rows: Vec<ResidualCsvRow> = report
        .rows
        .iter()
        .map(|r| ResidualCsvRow {
            points: report.points,
            t: r.t,
            center: r.center,
            half_width: r.half_width,
            away_from_jump: r.away_from_jump,
            residual: r.residual,
        })
        .collect();
    write_csv(&dir.join(CERTIFICATES), "weak_residual", &rows)?;
    art.certificates = Some(PathBuf::from(CERTIFICATES));
    let refinement: Vec<RefinementRow> = study
        .points
        .iter()
        .zip(&study.residuals)
        .enumerate()
        .map(|(i, (&points, &max_residual))| RefinementRow {
            points,
            max_residual,
            order: i.checked_sub(1).map(|j| study.orders[j]),
        })
        .collect();
    write_csv(&dir.join("refinement.csv"), "refinement", &refinement)?;
    let away = report.max_away().unwrap_or(0.0);
    let ok = study.decreasing() && study.min_order() >= cfg.tolerances.min_order && away < cfg.tolerances.away;
    let status = pass_fail(ok);
    let summary = format!(
        "points = {:?}\nmax_residuals = {:?}\norders = {:?}\nmin_order = {}\ndecreasing = {}\nmax_away_residual = {away:e}\naway_points = {}\n",
        study.points,
        study.residuals,
        study.orders,
        study.min_order(),
        study.decreasing(),
        report.points
    );
    write_text(&dir.join(SUMMARY), &summary)?;
    art.summary = Some(PathBuf::from(SUMMARY));
    Ok(Outcome { status, verdict: format!("verdict = {}\n{summary}", status_word(status)), message: String::new() })
}
