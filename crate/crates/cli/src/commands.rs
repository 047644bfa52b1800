//! Per-command defaults and result tables.

use std::path::PathBuf;

use serde_json::{json, Value};

use kicktop_core::classical::{stroboscopic_map, StroboscopicCloud};
use kicktop_core::experiments::{
    self, AverageMode, Backend, EntropyMap, GridSpec, ScanConfig, ScanMode, DEFAULT_CLOUD_STEPS,
    DEFAULT_CLOUD_TRAJECTORIES, DEFAULT_FULL_CHAOS_STEPS, DEFAULT_SCALING_WINDOW, ERGODIC_INITIALS,
    HIGH_ENTROPY_INSET, LOW_ENTROPY_INSET, REGULAR_INITIAL, SCALING_INITIAL,
};
use kicktop_core::metrics;
use kicktop_core::open_system::NoiseParameters;
use kicktop_core::{AverageWindow, FloquetParameters, OverlapSeries, PauliCorrelations, SphericalDirection};

use crate::args::{Command, Format, Options};
use crate::output::{self, Part, Table};
use crate::CliError;

const DEFAULT_T1_NS: f64 = 15_000.0;
const DEFAULT_TPHI_NS: f64 = 3_000.0;
const DEFAULT_ROTATION_NS: f64 = 20.0;
const DEFAULT_INTERACTION_NS: f64 = 25.0;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn parse_grid(s: &str) -> Result<GridSpec, CliError> {
    let (t, p) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| usage(format!("grid must look like 31x61, got {s:?}")))?;
    let t = t.trim().parse().map_err(|_| usage(format!("bad grid {s:?}")))?;
    let p = p.trim().parse().map_err(|_| usage(format!("bad grid {s:?}")))?;
    Ok(GridSpec::new(t, p)?)
}

pub fn parse_mode(s: &str) -> Result<ScanMode, CliError> {
    match s.replace('_', "-").as_str() {
        "full" => Ok(ScanMode::Full),
        "rotations-only" => Ok(ScanMode::RotationsOnly),
        "interactions-only" => Ok(ScanMode::InteractionsOnly),
        "idle" => Ok(ScanMode::Idle),
        _ => Err(usage(format!("unknown mode {s:?}"))),
    }
}

pub fn parse_backend(s: &str) -> Result<Backend, CliError> {
    match s {
        "dicke" => Ok(Backend::Dicke),
        "register" => Ok(Backend::Register),
        _ => Err(usage(format!("unknown backend {s:?}"))),
    }
}

/// `4..10` (inclusive) or `4,6,8`.
pub fn parse_qubit_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || usage(format!("bad qubit list {s:?}"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect()
}

pub fn parse_window(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || usage(format!("window must look like 10:500, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn parse_average_window(s: &str) -> Result<AverageWindow, CliError> {
    match s.replace('_', "-").as_str() {
        "include-initial" => Ok(AverageWindow::IncludeInitial),
        "exclude-initial" => Ok(AverageWindow::ExcludeInitial),
        _ => Err(usage(format!("unknown average window {s:?}"))),
    }
}

/// Options resolved against one command's defaults.
struct Resolved<'a> {
    o: &'a Options,
    command: Command,
    kappa: f64,
    qubits: Option<usize>,
    steps: Option<usize>,
    grid: Option<GridSpec>,
    backend: Option<Backend>,
    mode: Option<ScanMode>,
    seed: Option<u64>,
}

impl<'a> Resolved<'a> {
    fn new(command: Command, o: &'a Options, kappa: f64) -> Result<Self, CliError> {
        Ok(Self {
            o,
            command,
            kappa: o.kappa.unwrap_or(kappa),
            qubits: o.qubits,
            steps: o.steps,
            grid: o.grid.as_deref().map(parse_grid).transpose()?,
            backend: o.backend.as_deref().map(parse_backend).transpose()?,
            mode: o.mode.as_deref().map(parse_mode).transpose()?,
            seed: o.seed,
        })
    }

    fn params(&self) -> Result<FloquetParameters, CliError> {
        Ok(FloquetParameters::new(self.kappa)?)
    }

    fn qubits(&mut self, default: usize) -> usize {
        *self.qubits.get_or_insert(default)
    }

    fn steps(&mut self, default: usize) -> usize {
        *self.steps.get_or_insert(default)
    }

    fn grid(&mut self, default: GridSpec) -> GridSpec {
        *self.grid.get_or_insert(default)
    }

    fn backend(&mut self) -> Backend {
        *self.backend.get_or_insert(Backend::Dicke)
    }

    fn mode(&mut self) -> ScanMode {
        *self.mode.get_or_insert(ScanMode::Full)
    }

    fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert(0)
    }

    fn initial(&self, default: SphericalDirection) -> SphericalDirection {
        match (self.o.theta, self.o.phi) {
            (None, None) => default,
            (t, p) => SphericalDirection::new(t.unwrap_or(default.theta()), p.unwrap_or(default.phi())),
        }
    }

    fn custom_initial(&self) -> bool {
        self.o.theta.is_some() || self.o.phi.is_some()
    }

    /// Noise from explicit flags, or `None` when neither time is set.
    fn noise_if_requested(&self) -> Result<Option<NoiseParameters>, CliError> {
        if self.o.t1.is_none() && self.o.tphi.is_none() {
            return Ok(None);
        }
        self.noise(f64::INFINITY, f64::INFINITY).map(Some)
    }

    fn noise(&self, t1: f64, tphi: f64) -> Result<NoiseParameters, CliError> {
        Ok(NoiseParameters::uniform(
            self.o.t1.unwrap_or(t1),
            self.o.tphi.unwrap_or(tphi),
            self.o.rotation_ns.unwrap_or(DEFAULT_ROTATION_NS),
            self.o.interaction_ns.unwrap_or(DEFAULT_INTERACTION_NS),
        )?)
    }

    fn meta(&self) -> Value {
        json!({
            "schema_version": output::SCHEMA_VERSION,
            "artifact_version": kicktop_core::ARTIFACT_VERSION,
            "command": self.command.name(),
            "kappa": self.kappa,
            "qubits": self.qubits,
            "steps": self.steps,
            "backend": self.backend.map(Backend::name),
            "mode": self.mode.map(ScanMode::name),
            "seed": self.seed,
            "grid": self.grid.map(|g| format!("{}x{}", g.theta_points, g.phi_points)),
        })
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("plain data serializes")
}

fn map_part(label: String, map: &EntropyMap) -> Part {
    let mut table = Table::new(&["theta", "phi", "entropy"]);
    for (t, p, v) in map.entries() {
        table.push(vec![t.into(), p.into(), v.into()]);
    }
    Part {
        label,
        table,
        json: to_json(map),
    }
}

fn series_part(label: String, values: impl Iterator<Item = (usize, f64)>) -> Part {
    let mut table = Table::new(&["step", "value"]);
    let mut points = Vec::new();
    for (s, v) in values {
        table.push(vec![s.into(), v.into()]);
        points.push(json!([s, v]));
    }
    Part {
        label,
        table,
        json: Value::Array(points),
    }
}

fn pauli_part(label: &str, t: &PauliCorrelations) -> Part {
    let mut table = Table::new(&["pauli_string", "expectation"]);
    let mut obj = serde_json::Map::new();
    for (name, v) in t.entries() {
        table.push(vec![name.clone().into(), v.into()]);
        obj.insert(name, json!(v));
    }
    Part {
        label: label.to_string(),
        table,
        json: Value::Object(obj),
    }
}

fn cloud_part(label: &str, cloud: &StroboscopicCloud) -> Part {
    let mut table = Table::new(&["traj", "step", "theta", "phi"]);
    for p in &cloud.points {
        table.push(vec![p.traj.into(), p.step.into(), p.theta.into(), p.phi.into()]);
    }
    Part {
        label: label.to_string(),
        table,
        json: to_json(cloud),
    }
}

pub fn execute(command: Command, o: &Options) -> Result<Vec<PathBuf>, CliError> {
    let format = o.format.unwrap_or(Format::Csv);
    let (parts, meta) = match command {
        Command::EntropyMap => entropy_map(o)?,
        Command::Snapshots => snapshots(o)?,
        Command::Trajectory => trajectory(o)?,
        Command::ClassicalMap => classical_map(o)?,
        Command::Ergodicity => ergodicity(o)?,
        Command::FiniteSize => finite_size(o)?,
        Command::FullChaos => full_chaos(o)?,
        Command::PauliBars => pauli_bars(o)?,
        Command::Purity => purity(o)?,
        Command::TomographyDemo => tomography_demo(o)?,
    };
    output::emit(&parts, meta, format, o.out.as_deref())
}

type Outcome = (Vec<Part>, Value);

fn entropy_map(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::EntropyMap, o, 0.5)?;
    let cfg = ScanConfig {
        params: r.params()?,
        qubits: r.qubits(3),
        steps: r.steps(20),
        grid: r.grid(GridSpec::default()),
        mode: r.mode(),
        noise: r.noise_if_requested()?,
        average: AverageMode::TimeAverage,
        backend: r.backend(),
        seed: Some(r.seed()),
    };
    let map = experiments::entropy_map_scan(&cfg)?.remove(0);
    r.backend = Some(map.metadata.backend);
    Ok((vec![map_part("map".into(), &map)], r.meta()))
}

fn snapshots(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::Snapshots, o, 0.5)?;
    let cfg = ScanConfig {
        params: r.params()?,
        qubits: r.qubits(3),
        steps: r.steps(19),
        grid: r.grid(GridSpec::default()),
        mode: r.mode(),
        noise: r.noise_if_requested()?,
        average: AverageMode::PerStepSnapshots,
        backend: r.backend(),
        seed: Some(r.seed()),
    };
    let maps = experiments::entropy_map_scan(&cfg)?;
    r.backend = Some(maps[0].metadata.backend);
    let parts = maps
        .iter()
        .enumerate()
        .map(|(step, m)| map_part(format!("step{step}"), m))
        .collect();
    Ok((parts, r.meta()))
}

fn trajectory(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::Trajectory, o, 0.5)?;
    let (n, steps, backend) = (r.qubits(3), r.steps(20), r.backend());
    let points = experiments::trajectory_experiment(r.initial(HIGH_ENTROPY_INSET), &r.params()?, n, steps, backend)?;
    let mut table = Table::new(&["step", "x", "y", "z", "entropy"]);
    for p in &points {
        table.push(vec![
            p.step.into(),
            p.bloch.x.into(),
            p.bloch.y.into(),
            p.bloch.z.into(),
            p.entropy.into(),
        ]);
    }
    let part = Part {
        label: "trajectory".into(),
        table,
        json: to_json(&points),
    };
    Ok((vec![part], r.meta()))
}

fn classical_map(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::ClassicalMap, o, 0.5)?;
    let steps = r.steps(DEFAULT_CLOUD_STEPS);
    let trajectories = o.trajectories.unwrap_or(DEFAULT_CLOUD_TRAJECTORIES);
    let cloud = stroboscopic_map(r.kappa, trajectories, steps, r.seed())?;
    Ok((vec![cloud_part("cloud", &cloud)], r.meta()))
}

fn ergodicity(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::Ergodicity, o, 2.5)?;
    let n = r.qubits(3);
    let n_max = o.n_max.unwrap_or_else(|| r.steps(10));
    r.steps = Some(n_max);
    let window = o
        .average_window
        .as_deref()
        .map(parse_average_window)
        .transpose()?
        .unwrap_or(AverageWindow::IncludeInitial);
    let (labels, initials): (Vec<&str>, Vec<SphericalDirection>) = if r.custom_initial() {
        (vec!["custom"], vec![r.initial(ERGODIC_INITIALS[0])])
    } else {
        (
            vec!["chaotic_a", "chaotic_b", "regular"],
            vec![ERGODIC_INITIALS[0], ERGODIC_INITIALS[1], REGULAR_INITIAL],
        )
    };
    let series: Vec<OverlapSeries> = experiments::ergodicity_experiment(&r.params()?, n, &initials, n_max, window)?;
    let parts = labels
        .iter()
        .zip(&series)
        .map(|(l, s)| series_part(l.to_string(), s.points.iter().copied()))
        .collect();
    Ok((parts, r.meta()))
}

fn finite_size(o: &Options) -> Result<Outcome, CliError> {
    let r = Resolved::new(Command::FiniteSize, o, 2.5)?;
    let n_list = match &o.qubit_list {
        Some(s) => parse_qubit_list(s)?,
        None => (4..=10).collect(),
    };
    let window = o.window.as_deref().map(parse_window).transpose()?.unwrap_or(DEFAULT_SCALING_WINDOW);
    let table = experiments::finite_size_experiment(&r.params()?, &n_list, window, r.initial(SCALING_INITIAL))?;
    let mut csv = Table::new(&["qubits", "sigma"]);
    for &(n, s) in &table.rows {
        csv.push(vec![n.into(), s.into()]);
    }
    let mut json = to_json(&table);
    json["log_log_slope"] = json!(table.log_log_slope());
    Ok((
        vec![Part {
            label: "scaling".into(),
            table: csv,
            json,
        }],
        r.meta(),
    ))
}

fn full_chaos(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::FullChaos, o, 5.0)?;
    let n_list = match &o.qubit_list {
        Some(s) => parse_qubit_list(s)?,
        None => vec![4, 8, 10],
    };
    let grid = r.grid(GridSpec::new(16, 16)?);
    let steps = r.steps(DEFAULT_FULL_CHAOS_STEPS);
    let cloud = (
        o.trajectories.unwrap_or(DEFAULT_CLOUD_TRAJECTORIES),
        o.cloud_steps.unwrap_or(DEFAULT_CLOUD_STEPS),
        r.seed(),
    );
    r.backend = Some(Backend::Dicke);
    let result = experiments::full_chaos_experiment(r.kappa, &n_list, grid, steps, cloud)?;
    let mut parts: Vec<Part> = result
        .maps
        .iter()
        .map(|m| map_part(format!("n{}", m.metadata.qubits), m))
        .collect();
    parts.push(cloud_part("cloud", &result.cloud));
    Ok((parts, r.meta()))
}

fn pauli_bars(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::PauliBars, o, 0.5)?;
    let (n, steps) = (r.qubits(3), r.steps(10));
    r.backend = Some(Backend::Register);
    let [low, high] =
        experiments::pauli_bars_experiment([LOW_ENTROPY_INSET, HIGH_ENTROPY_INSET], &r.params()?, n, steps)?;
    Ok((vec![pauli_part("low", &low), pauli_part("high", &high)], r.meta()))
}

fn purity(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::Purity, o, 0.5)?;
    let (n, steps) = (r.qubits(3), r.steps(10));
    r.backend = Some(Backend::Register);
    let noise = r.noise(DEFAULT_T1_NS, DEFAULT_TPHI_NS)?;
    let [low, high] =
        experiments::purity_experiment([LOW_ENTROPY_INSET, HIGH_ENTROPY_INSET], &r.params()?, &noise, n, steps)?;
    let parts = vec![
        series_part("low".into(), low.into_iter().enumerate()),
        series_part("high".into(), high.into_iter().enumerate()),
    ];
    Ok((parts, r.meta()))
}

fn tomography_demo(o: &Options) -> Result<Outcome, CliError> {
    let mut r = Resolved::new(Command::TomographyDemo, o, 2.5)?;
    let (n, steps, seed) = (r.qubits(3), r.steps(5), r.seed());
    r.backend = Some(Backend::Register);
    let shots = o.shots.unwrap_or(10_000);
    let demo = experiments::tomography_demo(r.initial(HIGH_ENTROPY_INSET), &r.params()?, n, steps, shots, seed)?;
    let truth = metrics::pauli_correlations(&demo.truth)?;
    let recon = metrics::pauli_correlations(&demo.reconstructed)?;
    let mut summary = Table::new(&["metric", "value"]);
    let metrics_list = [
        ("fidelity", demo.fidelity),
        ("purity_truth", metrics::purity(&demo.truth)),
        ("purity_reconstructed", metrics::purity(&demo.reconstructed)),
    ];
    let mut summary_json = serde_json::Map::new();
    for (name, v) in metrics_list {
        summary.push(vec![name.to_string().into(), v.into()]);
        summary_json.insert(name.into(), json!(v));
    }
    summary_json.insert("shots".into(), json!(shots));
    summary_json.insert("records".into(), to_json(&demo.records));
    let parts = vec![
        Part {
            label: "summary".into(),
            table: summary,
            json: Value::Object(summary_json),
        },
        pauli_part("truth", &truth),
        pauli_part("reconstructed", &recon),
    ];
    Ok((parts, r.meta()))
}
