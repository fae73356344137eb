//! Configuration-driven reproduction runs.
//!
//! Every command is a pure function from a [`RunConfig`] to a list of CSV
//! [`Artifact`]s. [`write_run`] persists them and, once all are on disk,
//! one [`RunManifest`] sidecar per artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{
    coherence_measure, default_window, random_phases, uniform_grid, InitialState, QuenchSystem, QuenchTrace,
};
use crate::operators::{HamiltonianSpec, Model, TransverseField};
use crate::spectral::{rratio_sweep, Sector, SweepOptions, SWEEP_HEADER};
use crate::theory;
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    RratioSweep,
    QuenchLimits,
    CoherenceTable,
    IprTrace,
    TransitionCurve,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::RratioSweep => "rratio_sweep",
            Experiment::QuenchLimits => "quench_limits",
            Experiment::CoherenceTable => "coherence_table",
            Experiment::IprTrace => "ipr_trace",
            Experiment::TransitionCurve => "transition_curve",
        }
    }

    fn default_grid(self) -> TimeGrid {
        match self {
            Experiment::CoherenceTable | Experiment::IprTrace => TimeGrid { start: 0.0, stop: 100.0, points: 2000 },
            _ => TimeGrid { start: 0.0, stop: 10.0, points: 1000 },
        }
    }
}

/// Uniform time grid, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn samples(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.stop > self.start) || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::arg(format!(
                "time grid needs finite start < stop and at least 2 points, got {self:?}"
            )));
        }
        Ok(uniform_grid(self.start, self.stop, self.points))
    }
}

/// Ring parameters of one limiting-case quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSet {
    pub label: String,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub h: f64,
}

fn default_limit_sets() -> Vec<LimitSet> {
    vec![
        LimitSet { label: "weak".into(), hopping: 1.0, h: 0.1 },
        LimitSet { label: "strong".into(), hopping: 0.1, h: 1.0 },
    ]
}

fn default_ladder() -> Vec<usize> {
    (1..=9).map(|k| 1usize << k).collect()
}

fn fifty() -> usize {
    50
}

fn tenth() -> f64 {
    0.1
}

fn plus_one() -> i8 {
    1
}

fn four() -> f64 {
    4.0
}

/// JSON run configuration. `spec.seed` is replaced by `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    pub spec: HamiltonianSpec,
    #[serde(default)]
    pub kappa_grid: Vec<f64>,
    #[serde(default)]
    pub time_grid: Option<TimeGrid>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_ladder")]
    pub coherence_ladder: Vec<usize>,
    #[serde(default = "fifty")]
    pub realizations: usize,
    #[serde(default = "tenth")]
    pub trim_fraction: f64,
    #[serde(default = "plus_one")]
    pub sector: i8,
    /// Disorder strength `D` of the XXZ variants.
    #[serde(default = "four")]
    pub xxz_disorder: f64,
    #[serde(default = "default_limit_sets")]
    pub limit_sets: Vec<LimitSet>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(experiment: Experiment, spec: HamiltonianSpec) -> Self {
        RunConfig {
            experiment: Some(experiment),
            spec,
            kappa_grid: Vec::new(),
            time_grid: None,
            window: None,
            coherence_ladder: default_ladder(),
            realizations: fifty(),
            trim_fraction: tenth(),
            sector: plus_one(),
            xxz_disorder: four(),
            limit_sets: default_limit_sets(),
            seed: 0,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.experiment.ok_or_else(|| Error::arg("config does not name an experiment"))
    }

    /// Base spec with the run seed applied.
    pub fn seeded_spec(&self) -> HamiltonianSpec {
        self.spec.clone().with_seed(self.seed)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.time_grid.unwrap_or(self.experiment()?.default_grid()).samples()
    }

    /// Averaging window, defaulting to `[0.2 T, T]`.
    pub fn averaging_window(&self, times: &[f64]) -> Result<(f64, f64)> {
        let w = self.window.map(|[a, b]| (a, b)).unwrap_or_else(|| default_window(times));
        let (first, last) = (times[0], times[times.len() - 1]);
        if !(w.0 <= w.1) || w.0 < first || w.1 > last {
            return Err(Error::arg(format!("window [{}, {}] outside the time grid [{first}, {last}]", w.0, w.1)));
        }
        Ok(w)
    }
}

/// One output file of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, contents: String) -> Self {
        Artifact { name: name.into(), contents }
    }

    pub fn sha256(&self) -> String {
        sha256_hex(self.contents.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Sidecar describing a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub duration_seconds: f64,
    /// SHA-256 of every output of the run, keyed by file name.
    pub checksums: BTreeMap<String, String>,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Writes the artifacts into `dir`, then their manifests. Returns the
/// artifact paths.
pub fn write_run(config: &RunConfig, artifacts: &[Artifact], dir: &Path, elapsed: Duration) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents)?;
        paths.push(path);
    }
    let manifest = RunManifest {
        config: config.clone(),
        version: VERSION.to_string(),
        duration_seconds: elapsed.as_secs_f64(),
        checksums: artifacts.iter().map(|a| (a.name.clone(), a.sha256())).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    for path in &paths {
        fs::write(manifest_path(path), &text)?;
    }
    Ok(paths)
}

/// Dispatches on the configured experiment.
pub fn run(config: &RunConfig) -> Result<Vec<Artifact>> {
    match config.experiment()? {
        Experiment::RratioSweep => cmd_rratio(config),
        Experiment::QuenchLimits => cmd_quench_limits(config),
        Experiment::CoherenceTable => cmd_coherence_table(config),
        Experiment::IprTrace => cmd_ipr_trace(config),
        Experiment::TransitionCurve => cmd_transition_curve(config),
    }
}

fn validate_all(specs: &[&HamiltonianSpec]) -> Result<()> {
    specs.iter().try_for_each(|s| s.validate())
}

fn xxz_variant(base: &HamiltonianSpec, disorder: f64) -> HamiltonianSpec {
    HamiltonianSpec { model: Model::SunburstXXZ, disorder, field: TransverseField::Uniform(0.0), ..base.clone() }
}

fn ising_variant(base: &HamiltonianSpec) -> HamiltonianSpec {
    HamiltonianSpec { model: Model::SunburstIsing, disorder: 0.0, ..base.clone() }
}

/// Mean spacing ratio against κ for the Ising and XXZ rings.
pub fn cmd_rratio(config: &RunConfig) -> Result<Vec<Artifact>> {
    if config.kappa_grid.is_empty() {
        return Err(Error::arg("kappa grid is empty"));
    }
    let base = config.seeded_spec();
    let variants = [ising_variant(&base), xxz_variant(&base, config.xxz_disorder)];
    for v in &variants {
        for &k in &config.kappa_grid {
            v.clone().with_kappa(k).validate()?;
        }
    }
    let options = SweepOptions {
        realizations: config.realizations,
        trim_fraction: config.trim_fraction,
        sector: Sector::from_sign(config.sector),
    };
    let mut csv = format!("model,{SWEEP_HEADER}\n");
    for v in &variants {
        for row in rratio_sweep(v, &config.kappa_grid, &options)? {
            let _ = writeln!(csv, "{},{}", v.model, row.csv_line());
        }
    }
    Ok(vec![Artifact::new("rratio_sweep.csv", csv)])
}

fn quench(spec: &HamiltonianSpec, initial: &InitialState, times: &[f64]) -> Result<QuenchTrace> {
    crate::dynamics::run_quench(spec, initial, times)
}

/// Single-qubit quenches in the weak- and strong-field limits plus a κ = 0
/// control, each with its closed-form prediction.
pub fn cmd_quench_limits(config: &RunConfig) -> Result<Vec<Artifact>> {
    let times = config.times()?;
    let base = ising_variant(&config.seeded_spec());
    if config.limit_sets.is_empty() {
        return Err(Error::arg("no limit sets configured"));
    }
    let mut runs: Vec<(String, HamiltonianSpec)> = config
        .limit_sets
        .iter()
        .map(|s| (s.label.clone(), base.clone().with_hopping(s.hopping).with_h(s.h)))
        .collect();
    let control = runs[0].1.clone().with_kappa(0.0);
    runs.push(("control".into(), control));
    validate_all(&runs.iter().map(|(_, s)| s).collect::<Vec<_>>())?;
    runs.iter()
        .map(|(label, spec)| {
            let trace = quench(spec, &InitialState::Incoherent, &times)?;
            Ok(Artifact::new(format!("quench_limits_{label}.csv"), trace.to_csv()))
        })
        .collect()
}

pub const TABLE_HEADER: &str = "coherence,mean_SL_n1,var_SL_n1,mean_SL_n3,var_SL_n3";

/// Time-averaged entropy and its variance against initial-state coherence,
/// for one and three qubits.
pub fn cmd_coherence_table(config: &RunConfig) -> Result<Vec<Artifact>> {
    let times = config.times()?;
    let window = config.averaging_window(&times)?;
    let base = ising_variant(&config.seeded_spec());
    let specs: Vec<HamiltonianSpec> = [1, 3]
        .iter()
        .map(|&n| HamiltonianSpec { qubits: n, ..base.clone() })
        .collect();
    validate_all(&specs.iter().collect::<Vec<_>>())?;
    let ring_dim = 1usize << base.ring_len;
    if config.coherence_ladder.is_empty() {
        return Err(Error::arg("coherence ladder is empty"));
    }
    if let Some(&bad) = config.coherence_ladder.iter().find(|&&c| c == 0 || c > ring_dim) {
        return Err(Error::arg(format!("ladder entry {bad} outside 1..={ring_dim}")));
    }
    let phases: Vec<Vec<f64>> = config
        .coherence_ladder
        .iter()
        .map(|&c| random_phases(c, config.seed, c as u64))
        .collect();

    let mut stats = Vec::new();
    let mut coherence = Vec::new();
    for (i, spec) in specs.iter().enumerate() {
        let system = QuenchSystem::new(spec, &spec.ring_fields(0))?;
        let rows: Vec<Result<(f64, f64, f64)>> = config
            .coherence_ladder
            .par_iter()
            .zip(&phases)
            .map(|(&count, p)| {
                let recipe = InitialState::MaximallyCoherent { count, phases: Some(p.clone()) };
                let state = system.prepare(&recipe)?;
                let c2 = coherence_measure(&state, &system.pre)?;
                let (mean, var) = system.trace(&state, &times, false)?.statistics(window)?;
                Ok((c2, mean, var))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        if i == 0 {
            coherence = rows.iter().map(|r| r.0).collect();
        }
        stats.push(rows);
    }

    let mut csv = format!("{TABLE_HEADER}\n");
    for (k, c2) in coherence.iter().enumerate() {
        let (a, b) = (stats[0][k], stats[1][k]);
        let _ = writeln!(csv, "{c2:.10},{},{},{},{}", a.1, a.2, b.1, b.2);
    }
    let mut log = String::from("N,m,phi\n");
    for (&count, p) in config.coherence_ladder.iter().zip(&phases) {
        for (m, phi) in p.iter().enumerate() {
            let _ = writeln!(log, "{count},{m},{phi}");
        }
    }
    Ok(vec![Artifact::new("coherence_table.csv", csv), Artifact::new("coherence_phases.csv", log)])
}

pub const IPR_HEADER: &str = "t,S_L_n1,one_minus_ipr_n1,S_L_n3,one_minus_ipr_n3,S_L_coherent,ipr_coherent";

/// Entropy and `1 - IPR` for the incoherent state (one and three qubits),
/// and the IPR of the single-qubit maximally coherent state.
pub fn cmd_ipr_trace(config: &RunConfig) -> Result<Vec<Artifact>> {
    let times = config.times()?;
    let base = ising_variant(&config.seeded_spec());
    let one = HamiltonianSpec { qubits: 1, ..base.clone() };
    let three = HamiltonianSpec { qubits: 3, ..base.clone() };
    validate_all(&[&one, &three])?;
    let full = InitialState::MaximallyCoherent { count: 1 << base.ring_len, phases: None };
    let a = quench(&one, &InitialState::Incoherent, &times)?;
    let b = quench(&three, &InitialState::Incoherent, &times)?;
    let c = quench(&one, &full, &times)?;
    let ipr = |t: &QuenchTrace| t.ipr.clone().ok_or_else(|| Error::Numeric("trace lacks an IPR series".into()));
    let (ia, ib, ic) = (ipr(&a)?, ipr(&b)?, ipr(&c)?);
    let mut csv = format!("{IPR_HEADER}\n");
    for (i, t) in times.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{t},{},{},{},{},{},{}",
            a.linear_entropy[i],
            1.0 - ia[i],
            b.linear_entropy[i],
            1.0 - ib[i],
            c.linear_entropy[i],
            ic[i]
        );
    }
    Ok(vec![Artifact::new("ipr_trace.csv", csv)])
}

pub const TRANSITION_HEADER: &str = "t,S_L_ising_n1,S_L_ising_n3,S_L_xxz_n1,S_L_xxz_n3,curve_n1,curve_n3";

/// Maximally coherent quenches of the Ising and XXZ rings with one and
/// three qubits, against the Gaussian transition curve.
pub fn cmd_transition_curve(config: &RunConfig) -> Result<Vec<Artifact>> {
    let times = config.times()?;
    let base = config.seeded_spec();
    let ising = ising_variant(&base);
    let xxz = xxz_variant(&base, config.xxz_disorder);
    let specs: Vec<HamiltonianSpec> = [&ising, &xxz]
        .iter()
        .flat_map(|s| [1, 3].map(|n| HamiltonianSpec { qubits: n, ..(*s).clone() }))
        .collect();
    validate_all(&specs.iter().collect::<Vec<_>>())?;
    let full = InitialState::MaximallyCoherent { count: 1 << base.ring_len, phases: None };
    let traces = specs
        .iter()
        .map(|s| quench(s, &full, &times))
        .collect::<Result<Vec<_>>>()?;
    let kappa = base.kappa;
    let mut csv = format!("{TRANSITION_HEADER}\n");
    for (i, &t) in times.iter().enumerate() {
        let c1 = theory::full_transition_curve(t, kappa, 1, theory::lubkin_value(1));
        let c3 = theory::full_transition_curve(t, kappa, 3, theory::lubkin_value(3));
        let _ = write!(csv, "{t}");
        for tr in &traces {
            let _ = write!(csv, ",{}", tr.linear_entropy[i]);
        }
        let _ = writeln!(csv, ",{c1},{c3}");
    }
    Ok(vec![Artifact::new("transition_curve.csv", csv)])
}
