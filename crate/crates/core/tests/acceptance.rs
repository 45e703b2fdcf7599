//! The twelve acceptance criteria; one PASS/FAIL line each, nonzero exit on any failure.

use dplab::evolution::{
    characteristics_evolve, evolve, multipeakon_evolve, positivity_certificate, MultipeakonOutcome, SolverConfig,
    Termination, TimeStep,
};
use dplab::field::{Field, Grid};
use dplab::functionals::{invariant_suite_with, Calculus, Profile};
use dplab::profiles::{
    field_from_measure, field_from_signed_measure, mollified_peakon, multipeakon_field_resolved, peakon_field,
    perturbed_peakon, random_measure, BumpShape, MeasureComponent, Particle, PeakonState, SignedMeasureSpec,
    DEFAULT_MOLLIFIER_WIDTH,
};
use dplab::stability::{
    ch_refined_inequality, cubic_p, cubic_roots, extrema_scan_with, gh_certificate, gh_certificate_with,
    refinement_study, sequence_inequalities, shock_weak_residual, theorem1_verify, Refinement, RootStructure,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Check = std::result::Result<String, String>;

fn grid(n: usize) -> Grid {
    Grid::new(40.0, n).expect("valid grid")
}

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn peakon_constants() -> Check {
    let u = peakon_field(1.0, 0.0, grid(8192));
    let rec = invariant_suite_with(&u, 0.0, Calculus::KinkAware).map_err(|e| e.to_string())?;
    let prof = Profile::new(&u, Calculus::KinkAware).map_err(|e| e.to_string())?;
    let ex = extrema_scan_with(&prof.v, None, Refinement::LocalPolynomial).map_err(|e| e.to_string())?;
    let top = ex.top();
    let errs = [(rec.e2 - 1.0 / 3.0).abs(), (rec.e3 - 2.0 / 3.0).abs(), (top.value - 1.0 / 6.0).abs(), top.x.abs()];
    require(
        ex.n() == 1 && errs.iter().all(|&e| e < 1e-6),
        format!("|E2-1/3|={:.2e} |E3-2/3|={:.2e} |max v-1/6|={:.2e} |xi1|={:.2e}", errs[0], errs[1], errs[2], errs[3]),
    )
}

fn equality_case() -> Check {
    let u = peakon_field(1.0, 0.0, grid(8192));
    let c = gh_certificate_with(&u, Calculus::KinkAware).map_err(|e| e.to_string())?;
    require(
        c.residual_e2 < 1e-6 && c.residual_e3 < 1e-6 && c.margin_318.abs() <= 1e-6,
        format!("res_E2={:.2e} res_E3={:.2e} margin_318={:.2e}", c.residual_e2, c.residual_e3, c.margin_318),
    )
}

fn cubic_identity() -> Check {
    let (e2, e3) = (1.0 / 3.0, 2.0 / 3.0);
    let worst = (0..=20_000)
        .map(|i| -1.0 + i as f64 * 1e-4)
        .map(|y| (cubic_p(e2, e3, y) - (y - 1.0 / 6.0).powi(2) * (y + 1.0 / 3.0)).abs())
        .fold(0.0, f64::max);
    let r = cubic_roots(e2, e3);
    let double = r.double_root.unwrap_or(f64::NAN);
    let simple = r.roots.iter().copied().find(|&y| (y - double).abs() > 1e-3).unwrap_or(f64::NAN);
    require(
        worst < 1e-12
            && r.structure == RootStructure::DoubleAndSimple
            && (double - 1.0 / 6.0).abs() < 1e-8
            && (simple + 1.0 / 3.0).abs() < 1e-8,
        format!("max|P-P0|={worst:.2e} double={double:.12} simple={simple:.12}"),
    )
}

fn admissible_family() -> Check {
    let g = grid(4096);
    let mut worst = (0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = Vec::new();
    for seed in 0..200u64 {
        let u = field_from_measure(&random_measure(seed, g), g).map_err(|e| e.to_string())?;
        let c = match gh_certificate(&u) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let (r2, r3) = (c.relative_residual_e2(), c.relative_residual_e3());
        worst = (worst.0.max(r2), worst.1.max(r3), worst.2.min(c.margin_318));
        let chain = c.m1 > 0.0 && c.m1 <= c.an + 1e-10 && c.an <= (c.e2 / 12.0).sqrt() + 1e-10;
        let pos = positivity_certificate(&u, 1.0, 2.0);
        if !(r2 < 1e-6 && r3 < 1e-6 && c.margin_318 >= -1e-8 && chain && pos.passed()) {
            failures.push(format!("seed {seed}: r2={r2:.2e} r3={r3:.2e} m={:.2e} chain={chain} pos={}", c.margin_318, pos.passed()));
        }
    }
    require(
        failures.is_empty(),
        format!(
            "200 fields, max rel res E2={:.2e} E3={:.2e}, min margin_318={:.2e}{}",
            worst.0,
            worst.1,
            worst.2,
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join(" | ")) }
        ),
    )
}

fn sequence_fuzz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=10);
        let mut big: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        big.sort_by(|a, b| b.total_cmp(a));
        let mut small: Vec<f64> = (1..n).map(|i| big[i] * rng.gen_range(0.0..1.0)).collect();
        small.sort_by(|a, b| b.total_cmp(a));
        let r = sequence_inequalities(&big, &small).map_err(|e| e.to_string())?;
        worst = worst.min(r.easy_margin()).min(r.ab_margin());
    }
    require(worst >= -1e-12, format!("1000 tuples, min margin {worst:.3e}"))
}

fn solver_quality() -> Check {
    let g = grid(4096);
    let u0 = mollified_peakon(1.0, 0.0, DEFAULT_MOLLIFIER_WIDTH, g).map_err(|e| e.to_string())?;
    let cfg = SolverConfig { t_end: 10.0, record_every: 1000, keep_snapshots: false, ..SolverConfig::default() };
    let tr = evolve(&u0, &cfg).map_err(|e| e.to_string())?;
    let shift = (10.0 / g.dx()).round() as isize;
    let exact = u0.shifted(shift);
    let err = tr.final_field().sub(&exact).map_err(|e| e.to_string())?.norm_l2() / u0.norm_l2();
    let (r0, r1) = (tr.records[0], *tr.records.last().expect("records"));
    let d2 = (r1.e2 - r0.e2).abs() / r0.e2;
    let d3 = (r1.e3 - r0.e3).abs() / r0.e3;

    let h = cfg.cfl * g.dx() / u0.max_abs().max(1.0);
    let run = |dt: f64| -> std::result::Result<Field, String> {
        let c = SolverConfig { dt: TimeStep::Fixed(dt), ..cfg.clone() };
        Ok(evolve(&u0, &c).map_err(|e| e.to_string())?.final_field().clone())
    };
    let reference = run(h / 8.0)?;
    let coarse = run(h)?.sub(&reference).map_err(|e| e.to_string())?.norm_l2();
    let fine = run(h / 2.0)?.sub(&reference).map_err(|e| e.to_string())?.norm_l2();
    let ratio = coarse / fine;
    require(
        err < 1e-3 && d2 < 1e-6 && d3 < 1e-6 && (10.0..=24.0).contains(&ratio),
        format!("rel L2 err={err:.3e} drift E2={d2:.2e} E3={d3:.2e} dt-halving ratio={ratio:.2}"),
    )
}

fn theorem_one() -> Check {
    let g = grid(4096);
    let mut lines = Vec::new();
    let mut ok = true;
    for seed in 1..=5u64 {
        let p = perturbed_peakon(1.0, 0.01, seed, g).map_err(|e| e.to_string())?;
        let cfg = SolverConfig { t_end: 50.0, record_every: 200, ..SolverConfig::default() };
        let tr = evolve(&p.u0, &cfg).map_err(|e| e.to_string())?;
        let v = theorem1_verify(&tr, 1.0, 0.01).map_err(|e| e.to_string())?;
        ok &= v.passed() && tr.termination == Termination::Completed;
        lines.push(format!(
            "seed {seed}: dist {:.4} |M1-1/6| {:.4} sum {:.4}",
            v.worst_distance.1, v.worst_m1_deviation.1, v.worst_sum_sq.1
        ));
    }
    require(ok, format!("bounds 0.94868/0.14142/0.2; {}", lines.join("; ")))
}

fn blowup() -> Check {
    let g = Grid::new(10.0, 4096).map_err(|e| e.to_string())?;
    let bump = |center: f64, mass: f64| MeasureComponent { center, mass, width: 0.3, shape: BumpShape::Gaussian };
    let breaking = field_from_signed_measure(&SignedMeasureSpec { components: vec![bump(-1.0, 3.0), bump(1.0, -3.0)] }, g)
        .map_err(|e| e.to_string())?;
    let cfg = SolverConfig { t_end: 20.0, record_every: 1000, keep_snapshots: false, ..SolverConfig::default() };
    let tr = evolve(&breaking, &cfg).map_err(|e| e.to_string())?;
    let tail = &tr.step_slopes[tr.step_slopes.len() * 4 / 5..];
    let monotone = tail.windows(2).all(|w| w[1].1 <= w[0].1);
    let control_u = field_from_measure(
        &dplab::profiles::MeasureSpec { components: vec![bump(-1.0, 3.0), bump(1.0, 3.0)] },
        g,
    )
    .map_err(|e| e.to_string())?;
    let control = evolve(&control_u, &cfg).map_err(|e| e.to_string())?;
    let t_blow = match tr.termination {
        Termination::BlowupDetected { t, .. } => t,
        _ => f64::NAN,
    };
    require(
        tr.blew_up() && monotone && control.termination == Termination::Completed,
        format!(
            "blow-up at t={t_blow:.4} after {} steps, tail monotone={monotone}, control={:?}",
            tr.steps, control.termination
        ),
    )
}

fn characteristics() -> Check {
    let g = grid(4096);
    let u0 = mollified_peakon(1.0, 0.0, 0.25, g).map_err(|e| e.to_string())?;
    let cfg = SolverConfig { t_end: 1.0, record_every: 1, ..SolverConfig::default() };
    let tr = evolve(&u0, &cfg).map_err(|e| e.to_string())?;
    let labels: Vec<f64> = (0..41).map(|i| -4.0 + 0.2 * i as f64).collect();
    let h = characteristics_evolve(&tr, &labels, 1.0).map_err(|e| e.to_string())?;
    require(
        h.max_relative_residual < 1e-5 && h.min_qx > 0.0 && h.monotone,
        format!("max rel residual={:.2e} min qx={:.4} monotone={}", h.max_relative_residual, h.min_qx, h.monotone),
    )
}

fn multipeakon() -> Check {
    let g = grid(4096);
    let state = PeakonState::new(vec![Particle { p: 1.0, q: -5.0 }, Particle { p: 0.5, q: 5.0 }])
        .map_err(|e| e.to_string())?;
    let hist = multipeakon_evolve(&state, 4.0).map_err(|e| e.to_string())?;
    let mut u = multipeakon_field_resolved(&state, g);
    let mut worst = 0.0f64;
    for step in 1..=4 {
        let cfg = SolverConfig { t_end: 1.0, record_every: 100_000, keep_snapshots: false, ..SolverConfig::default() };
        u = evolve(&u, &cfg).map_err(|e| e.to_string())?.final_field().clone();
        let particles = hist.state_at(step as f64).map_err(|e| e.to_string())?;
        let d = u.sub(&multipeakon_field_resolved(&particles, g)).map_err(|e| e.to_string())?.norm_l2();
        worst = worst.max(d);
    }

    let pair = PeakonState::new(vec![Particle { p: 1.0, q: -2.0 }, Particle { p: -1.0, q: 2.0 }])
        .map_err(|e| e.to_string())?;
    let ph = multipeakon_evolve(&pair, 10.0).map_err(|e| e.to_string())?;
    let anti = ph
        .states
        .iter()
        .map(|s| (s.particles[0].q + s.particles[1].q).abs().max((s.particles[0].p + s.particles[1].p).abs()))
        .fold(0.0, f64::max);
    let (collided, at) = match ph.outcome {
        MultipeakonOutcome::CollisionDetected { position, t, .. } => (true, (position, t)),
        _ => (false, (f64::NAN, f64::NAN)),
    };
    require(
        worst < 1e-2 && anti <= 1e-10 && collided && at.0.abs() < 1e-10,
        format!("max L2 gap to PDE={worst:.2e}; antisymmetry={anti:.1e}; collision at x={:.1e}, t={:.6}", at.0, at.1),
    )
}

fn shock() -> Check {
    let study = refinement_study(40.0, &[1024, 2048, 4096, 8192], |g| {
        Ok(shock_weak_residual(1.0, g, &[0.5])?.max_residual())
    })
    .map_err(|e| e.to_string())?;
    let away = shock_weak_residual(1.0, grid(4096), &[0.0, 0.5, 2.0])
        .map_err(|e| e.to_string())?
        .max_away()
        .unwrap_or(f64::INFINITY);
    require(
        study.decreasing() && study.min_order() >= 1.0 && away < 1e-8,
        format!(
            "residuals {:?} orders {:?}; away-from-jump {away:.2e}",
            study.residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>(),
            study.orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()
        ),
    )
}

fn ch_inequality() -> Check {
    let g = grid(4096);
    let mut worst = f64::INFINITY;
    for seed in 1000..1100u64 {
        let u = field_from_measure(&random_measure(seed, g), g).map_err(|e| e.to_string())?;
        let r = ch_refined_inequality(&u, Calculus::Spectral).map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst.min(r.margin());
    }
    let fine = grid(8192);
    let mut eq = 0.0f64;
    for c in [1.0, 2.0, 0.5] {
        let r = ch_refined_inequality(&peakon_field(c, 0.0, fine), Calculus::KinkAware).map_err(|e| e.to_string())?;
        eq = eq.max(r.margin().abs());
    }
    require(worst >= -1e-8 && eq < 1e-5, format!("min margin over 100 fields={worst:.3e}; peakon |margin|={eq:.2e}"))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Check); 12] = [
        ("1 peakon constants", peakon_constants),
        ("2 equality case of the certificate", equality_case),
        ("3 cubic identity and roots", cubic_identity),
        ("4 admissible family properties", admissible_family),
        ("5 sequence inequalities", sequence_fuzz),
        ("6 solver quality", solver_quality),
        ("7 orbital stability bounds", theorem_one),
        ("8 blow-up scenario", blowup),
        ("9 characteristics invariant", characteristics),
        ("10 multipeakon consistency", multipeakon),
        ("11 shock-peakon weak residual", shock),
        ("12 CH refined inequality", ch_inequality),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  criterion {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
