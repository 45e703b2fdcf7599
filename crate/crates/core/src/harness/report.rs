//! Plots and the summary of a finished run, rebuilt from its CSVs and snapshots alone.

use super::artifact::{read_snapshot, snapshot_files, write_text, CsvTable, RunArtifact, CERTIFICATES, INVARIANTS, SLOPES, SUMMARY};
use super::plot::Plot;
use super::HarnessError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WATERFALL_CURVES: usize = 12;

fn relative_drift(t: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let first = values.first().copied().unwrap_or(0.0);
    let scale = first.abs().max(f64::MIN_POSITIVE);
    t.iter().zip(values).map(|(&t, &v)| (t, (v - first) / scale)).collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn at_max(t: &[f64], v: &[f64]) -> f64 {
    v.iter().zip(t).fold((f64::NEG_INFINITY, f64::NAN), |b, (&x, &t)| if x > b.0 { (x, t) } else { b }).1
}

/// Writes the SVG plots and `summary.txt`; returns their paths relative to `dir`.
pub fn emit_report(dir: &Path) -> Result<(Vec<PathBuf>, PathBuf), HarnessError> {
    let art = RunArtifact::read(dir)?;
    let snaps = snapshot_files(dir)?;
    if snaps.is_empty() {
        return Err(HarnessError::Report(format!("{}: artifact has no snapshots", dir.display())));
    }
    let inv = CsvTable::read(&dir.join(INVARIANTS))?;
    let t = inv.column("t")?;
    let mut plots = Vec::new();
    let mut summary = format!("kind = {}\nfinal_t = {}\n", art.kind, t.last().copied().unwrap_or(0.0));

    let mut drift_plot = Plot::new("Invariant drift", "t", "(E(t) - E(0)) / |E(0)|");
    for name in ["E1", "E2", "E3"] {
        let d = relative_drift(&t, &inv.column(name)?);
        let worst = d.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let _ = writeln!(summary, "max_drift_{} = {worst:e}", name.to_lowercase());
        drift_plot = drift_plot.line(name, d);
    }
    plots.push(save(dir, "invariants.svg", &drift_plot)?);

    let cert_path = dir.join(CERTIFICATES);
    if cert_path.exists() {
        let cert = CsvTable::read(&cert_path)?;
        let ct = cert.column("t")?;
        if cert.has("distance") {
            let dist = cert.column("distance")?;
            let dev = cert.column("m1_deviation")?;
            let sum = cert.column("sum_sq")?;
            let m1 = cert.column("m1")?;
            let c = cert.column("c")?[0];
            let dist_bound = cert.column("distance_bound")?[0];
            let half = cert.column("m1_halfwidth")?[0];
            let sum_bound = cert.column("sum_bound")?[0];
            let points = |v: &[f64]| ct.iter().copied().zip(v.iter().copied()).collect::<Vec<_>>();
            plots.push(save(
                dir,
                "distance.svg",
                &Plot::new("Distance to the aligned peakon", "t", "X-distance")
                    .line("distance", points(&dist))
                    .level("3c eps^(1/4)", dist_bound),
            )?);
            plots.push(save(
                dir,
                "extrema.svg",
                &Plot::new("Largest maximum of v", "t", "M1")
                    .line("M1", points(&m1))
                    .line("sum (M_i^2 - m_(i-1)^2)", points(&sum))
                    .level("c/6 + c sqrt(2 eps)", c / 6.0 + half)
                    .level("c/6", c / 6.0)
                    .level("c/6 - c sqrt(2 eps)", c / 6.0 - half),
            )?);
            let _ = writeln!(
                summary,
                "sup_distance = {:e} @ {}\ndistance_bound = {dist_bound:e}\ndistance_margin = {:e}",
                max_of(&dist),
                at_max(&ct, &dist),
                dist_bound - max_of(&dist)
            );
            let _ = writeln!(
                summary,
                "max_m1_deviation = {:e} @ {}\nm1_halfwidth = {half:e}\nm1_margin = {:e}",
                max_of(&dev),
                at_max(&ct, &dev),
                half - max_of(&dev)
            );
            let _ = writeln!(
                summary,
                "max_sum_sq = {:e} @ {}\nsum_bound = {sum_bound:e}\nsum_margin = {:e}",
                max_of(&sum),
                at_max(&ct, &sum),
                sum_bound - max_of(&sum)
            );
        } else if cert.has("l2_gap") {
            let gap = cert.column("l2_gap")?;
            plots.push(save(
                dir,
                "pde_gap.svg",
                &Plot::new("PDE against particle dynamics", "t", "L2 gap")
                    .line("gap", ct.iter().copied().zip(gap.iter().copied()).collect()),
            )?);
            let _ = writeln!(summary, "max_l2_gap = {:e} @ {}", max_of(&gap), at_max(&ct, &gap));
        }
    }

    let slopes_path = dir.join(SLOPES);
    if art.kind == "blowup" && slopes_path.exists() {
        let s = CsvTable::read(&slopes_path)?;
        let st = s.column("t")?;
        let slope = s.column("min_slope")?;
        let threshold = s.column("threshold")?.first().copied().unwrap_or(f64::NAN);
        plots.push(save(
            dir,
            "min_slope.svg",
            &Plot::new("Steepest slope", "t", "min u_x")
                .line("min u_x", st.iter().copied().zip(slope.iter().copied()).collect())
                .level("threshold", threshold),
        )?);
        let _ = writeln!(
            summary,
            "min_slope = {:e} @ {}\nthreshold = {threshold}",
            min_of(&slope),
            st.last().copied().unwrap_or(f64::NAN)
        );
    }

    let step = snaps.len().div_ceil(WATERFALL_CURVES).max(1);
    let mut chosen: Vec<&PathBuf> = snaps.iter().step_by(step).collect();
    if chosen.last() != snaps.last().as_ref() {
        chosen.push(snaps.last().expect("nonempty"));
    }
    let mut fall = Plot::new("Snapshots of u", "x", "u(t, x) + offset");
    fall.legend = false;
    let mut offset = 0.0;
    let mut lift = 0.0;
    for path in chosen {
        let (ts, u) = read_snapshot(path)?;
        if lift == 0.0 {
            lift = 0.5 * u.max_abs().max(1e-12);
        }
        let g = *u.grid();
        let pts = (0..u.len()).step_by((u.len() / 1024).max(1)).map(|j| (g.x(j), u.values()[j] + offset)).collect();
        fall = fall.line(&format!("t = {ts:.3}"), pts);
        offset += lift;
    }
    plots.push(save(dir, "waterfall.svg", &fall)?);
    let _ = writeln!(summary, "snapshots = {}", snaps.len());

    write_text(&dir.join(SUMMARY), &summary)?;
    Ok((plots, PathBuf::from(SUMMARY)))
}

fn save(dir: &Path, name: &str, plot: &Plot) -> Result<PathBuf, HarnessError> {
    write_text(&dir.join(name), &plot.to_svg())?;
    Ok(PathBuf::from(name))
}

/// Regenerates the report of an existing run directory and records it in the manifest.
pub fn report_dir(dir: &Path) -> Result<RunArtifact, HarnessError> {
    let mut art = RunArtifact::read(dir)?;
    art.plots.clear();
    art.summary = None;
    let missing = art.missing(dir);
    if !missing.is_empty() {
        return Err(HarnessError::Report(format!("artifact is missing {missing:?}")));
    }
    let (plots, summary) = emit_report(dir)?;
    art.plots = plots;
    art.summary = Some(summary);
    art.write(dir)?;
    Ok(art)
}
