//! Scenario files: TOML with strict key checking, CLI overrides and the resolved echo.

use super::HarnessError;
use crate::evolution::SolverConfig;
use crate::field::{Grid, DEFAULT_HALF_LENGTH, DEFAULT_POINTS};
use crate::profiles::{MeasureComponent, Particle, DEFAULT_MOLLIFIER_WIDTH};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    StabilityRun,
    PeakonTranslation,
    Collision,
    Blowup,
    CertificateSweep,
    ShockResidual,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::StabilityRun => "stability_run",
            ScenarioKind::PeakonTranslation => "peakon_translation",
            ScenarioKind::Collision => "collision",
            ScenarioKind::Blowup => "blowup",
            ScenarioKind::CertificateSweep => "certificate_sweep",
            ScenarioKind::ShockResidual => "shock_residual",
        }
    }

    pub fn evolves(self) -> bool {
        matches!(
            self,
            ScenarioKind::StabilityRun | ScenarioKind::PeakonTranslation | ScenarioKind::Collision | ScenarioKind::Blowup
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridParams {
    pub n: usize,
    /// Half-length of the periodic cell.
    pub l: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { n: DEFAULT_POINTS, l: DEFAULT_HALF_LENGTH }
    }
}

impl GridParams {
    const FIELDS: &'static [&'static str] = &["n", "l"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileParams {
    pub c: f64,
    pub eps: f64,
    /// Mollifier width of the base peakon.
    pub width: f64,
    /// Shock-peakon offset in `1/(t + k)`.
    pub k: f64,
    pub times: Vec<f64>,
    pub particles: Vec<Particle>,
    pub measure: Vec<MeasureComponent>,
    pub expect_blowup: bool,
}

impl Default for ProfileParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            eps: 0.01,
            width: DEFAULT_MOLLIFIER_WIDTH,
            k: 1.0,
            times: vec![0.0, 0.5],
            particles: Vec::new(),
            measure: Vec::new(),
            expect_blowup: true,
        }
    }
}

impl ProfileParams {
    const FIELDS: &'static [&'static str] =
        &["c", "eps", "width", "k", "times", "particles", "measure", "expect_blowup"];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    /// Stability runs for these seeds, one directory each, in parallel.
    pub seeds: Vec<u64>,
    /// Random admissible fields in a certificate sweep.
    pub count: usize,
    /// Grid sizes of the shock refinement study.
    pub points: Vec<usize>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self { seeds: Vec::new(), count: 200, points: vec![1024, 2048, 4096, 8192] }
    }
}

impl SweepParams {
    const FIELDS: &'static [&'static str] = &["seeds", "count", "points"];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub translation: f64,
    pub drift: f64,
    pub positivity: f64,
    pub margin: f64,
    pub residual: f64,
    pub pde_gap: f64,
    pub away: f64,
    pub min_order: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            translation: 1e-3,
            drift: 1e-6,
            positivity: 1e-8,
            margin: 1e-8,
            residual: 1e-6,
            pde_gap: 1e-2,
            away: 1e-8,
            min_order: 1.0,
        }
    }
}

impl Tolerances {
    const FIELDS: &'static [&'static str] =
        &["translation", "drift", "positivity", "margin", "residual", "pde_gap", "away", "min_order"];

    fn all(&self) -> [(&'static str, f64); 8] {
        [
            ("translation", self.translation),
            ("drift", self.drift),
            ("positivity", self.positivity),
            ("margin", self.margin),
            ("residual", self.residual),
            ("pde_gap", self.pde_gap),
            ("away", self.away),
            ("min_order", self.min_order),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub profile: ProfileParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/latest")
}

const TOP_FIELDS: &[&str] = &["kind", "seed", "output", "grid", "solver", "profile", "sweep", "tolerances"];
const PARTICLE_FIELDS: &[&str] = &["p", "q"];
const MEASURE_FIELDS: &[&str] = &["center", "mass", "width", "shape"];

/// Values given on the command line; each replaces the file's value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub seed: Option<u64>,
    pub t_end: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A parsed scenario together with the text it came from.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub source: String,
    /// Keys dropped in non-strict mode.
    pub ignored: Vec<String>,
}

fn walk_table(table: &mut toml::Table, allowed: &[&str], prefix: &str, strict: bool, found: &mut Vec<String>) {
    let unknown: Vec<String> = table.keys().filter(|k| !allowed.contains(&k.as_str())).cloned().collect();
    for key in unknown {
        found.push(format!("{prefix}{key}"));
        if !strict {
            table.remove(&key);
        }
    }
}

fn walk_array(value: Option<&mut toml::Value>, allowed: &[&str], prefix: &str, strict: bool, found: &mut Vec<String>) {
    if let Some(toml::Value::Array(items)) = value {
        for (i, item) in items.iter_mut().enumerate() {
            if let toml::Value::Table(t) = item {
                walk_table(t, allowed, &format!("{prefix}[{i}]."), strict, found);
            }
        }
    }
}

/// Unknown keys by dotted path; in non-strict mode they are removed from `root`.
fn unknown_keys(root: &mut toml::Table, strict: bool) -> Vec<String> {
    let mut found = Vec::new();
    walk_table(root, TOP_FIELDS, "", strict, &mut found);
    let sections: [(&str, &[&str]); 5] = [
        ("grid", GridParams::FIELDS),
        ("solver", SolverConfig::FIELDS),
        ("profile", ProfileParams::FIELDS),
        ("sweep", SweepParams::FIELDS),
        ("tolerances", Tolerances::FIELDS),
    ];
    for (name, fields) in sections {
        if let Some(toml::Value::Table(t)) = root.get_mut(name) {
            walk_table(t, fields, &format!("{name}."), strict, &mut found);
            if name == "profile" {
                walk_array(t.get_mut("particles"), PARTICLE_FIELDS, "profile.particles", strict, &mut found);
                walk_array(t.get_mut("measure"), MEASURE_FIELDS, "profile.measure", strict, &mut found);
            }
        }
    }
    found
}

impl ScenarioConfig {
    pub fn parse(text: &str, strict: bool) -> Result<LoadedConfig, HarnessError> {
        let mut root: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        let ignored = unknown_keys(&mut root, strict);
        if strict {
            if let Some(first) = ignored.first() {
                return Err(HarnessError::UnknownKey(first.clone()));
            }
        }
        let config: ScenarioConfig =
            toml::Value::Table(root).try_into().map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
        Ok(LoadedConfig { config, source: text.to_string(), ignored })
    }

    pub fn load(path: &Path, strict: bool) -> Result<LoadedConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text, strict)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.grid_n {
            self.grid.n = n;
        }
        if let Some(l) = o.grid_l {
            self.grid.l = l;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.t_end {
            self.solver.t_end = t;
        }
        if let Some(out) = &o.out {
            self.output = out.clone();
        }
    }

    pub fn grid(&self) -> Result<Grid, HarnessError> {
        Grid::new(self.grid.l, self.grid.n).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Kind-specific requirements and positivity of every tolerance.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.grid()?;
        self.solver.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        for (name, v) in self.tolerances.all() {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarnessError::Config(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        let p = &self.profile;
        match self.kind {
            ScenarioKind::StabilityRun => {
                if !(p.c > 0.0 && p.eps > 0.0 && p.eps < 0.5) {
                    return Err(HarnessError::Config(format!(
                        "stability_run needs c > 0 and eps in (0, 1/2), got c = {}, eps = {}",
                        p.c, p.eps
                    )));
                }
            }
            ScenarioKind::PeakonTranslation => {
                if !(p.c > 0.0 && p.width > 0.0) {
                    return Err(HarnessError::Config("peakon_translation needs c > 0 and width > 0".into()));
                }
            }
            ScenarioKind::Collision => {
                if p.particles.is_empty() {
                    return Err(HarnessError::Config("collision needs profile.particles".into()));
                }
            }
            ScenarioKind::Blowup => {
                if p.measure.is_empty() {
                    return Err(HarnessError::Config("blowup needs profile.measure".into()));
                }
            }
            ScenarioKind::CertificateSweep => {
                if self.sweep.count == 0 {
                    return Err(HarnessError::Config("certificate_sweep needs sweep.count > 0".into()));
                }
            }
            ScenarioKind::ShockResidual => {
                if !(p.k > 0.0) || p.times.is_empty() || self.sweep.points.len() < 2 {
                    return Err(HarnessError::Config(
                        "shock_residual needs k > 0, at least one time and two grid sizes".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Input text verbatim, then the resolved configuration as comment lines.
    pub fn echo(&self, source: &str) -> Result<String, HarnessError> {
        let resolved = toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut out = source.to_string();
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str("\n# resolved\n");
        for line in resolved.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let c = ScenarioConfig::parse("kind = \"stability_run\"\n", true).unwrap().config;
        assert_eq!(c.seed, 0);
        assert_eq!(c.grid, GridParams::default());
        assert_eq!(c.profile.eps, 0.01);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "kind = \"stability_run\"\n[profile]\nepz = 0.1\n";
        match ScenarioConfig::parse(text, true) {
            Err(HarnessError::UnknownKey(k)) => assert_eq!(k, "profile.epz"),
            other => panic!("{other:?}"),
        }
        let loose = ScenarioConfig::parse(text, false).unwrap();
        assert_eq!(loose.ignored, vec!["profile.epz".to_string()]);
    }

    #[test]
    fn nested_array_keys_are_checked() {
        let text = "kind = \"collision\"\n[[profile.particles]]\np = 1.0\nq = 0.0\nr = 2.0\n";
        assert!(matches!(ScenarioConfig::parse(text, true), Err(HarnessError::UnknownKey(k)) if k == "profile.particles[0].r"));
    }

    #[test]
    fn unknown_kind_is_a_config_error() {
        assert!(matches!(ScenarioConfig::parse("kind = \"nope\"\n", true), Err(HarnessError::Config(_))));
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let c = ScenarioConfig::parse("kind = \"stability_run\"\n[tolerances]\ndrift = 0.0\n", true).unwrap().config;
        assert!(c.validate().is_err());
    }

    #[test]
    fn echo_starts_with_the_input() {
        let text = "kind = \"shock_residual\"\n";
        let c = ScenarioConfig::parse(text, true).unwrap().config;
        let echo = c.echo(text).unwrap();
        assert!(echo.starts_with(text));
        assert!(echo.contains("# kind = \"shock_residual\""));
    }
}
