//! Scripted experiments: entropy maps, overlap series, finite-size scaling,
//! purity under noise, Pauli tables and a tomography round trip.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::classical::{stroboscopic_map, StroboscopicCloud};
use crate::error::{Error, Result};
use crate::floquet::{self, dicke_bloch_vector, single_qubit_rdm_density, single_qubit_rdm_register};
use crate::floquet::{FloquetParameters, FloquetState};
use crate::metrics::{self, AverageWindow, OverlapSeries, PauliCorrelations};
use crate::open_system::{self, CountRecord, NoiseParameters};
use crate::spin::{
    bloch_from_density, coherent_state_dicke, coherent_state_register, BlochVector, DensityOperator, SphericalDirection,
    Spin,
};

/// Pure-state norm drift that aborts an experiment.
const NORM_DRIFT_TOL: f64 = 1e-8;
const ENTROPY_CEILING: f64 = 1.0 + 1e-9;

pub const DEFAULT_CLOUD_TRAJECTORIES: usize = 500;
pub const DEFAULT_CLOUD_STEPS: usize = 200;
pub const DEFAULT_FULL_CHAOS_STEPS: usize = 100;
pub const DEFAULT_SCALING_WINDOW: (usize, usize) = (10, 500);

/// Initial state that stays near `-y`, where subsystem entropy remains low.
pub const LOW_ENTROPY_INSET: SphericalDirection = SphericalDirection::from_raw(FRAC_PI_2, FRAC_PI_2);
/// Initial state on the equator at `+x`, inside the chaotic sea.
pub const HIGH_ENTROPY_INSET: SphericalDirection = SphericalDirection::from_raw(FRAC_PI_2, 0.0);
pub const ERGODIC_INITIALS: [SphericalDirection; 2] =
    [SphericalDirection::from_raw(FRAC_PI_2, 0.0), SphericalDirection::from_raw(2.618, 0.942)];
/// Initial state at `+y`.
pub const REGULAR_INITIAL: SphericalDirection = SphericalDirection::from_raw(FRAC_PI_2, -FRAC_PI_2);
pub const SCALING_INITIAL: SphericalDirection = SphericalDirection::from_raw(FRAC_PI_2 - 0.3, 0.6);

/// Inclusive `theta x phi` grid over `[0, pi] x [-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub theta_points: usize,
    pub phi_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            theta_points: 31,
            phi_points: 61,
        }
    }
}

impl GridSpec {
    pub fn new(theta_points: usize, phi_points: usize) -> Result<Self> {
        if theta_points < 2 || phi_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points per axis, got {theta_points}x{phi_points}"
            )));
        }
        Ok(Self {
            theta_points,
            phi_points,
        })
    }

    pub fn cells(&self) -> usize {
        self.theta_points * self.phi_points
    }

    pub fn theta(&self, i: usize) -> f64 {
        PI * i as f64 / (self.theta_points - 1) as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * j as f64 / (self.phi_points - 1) as f64
    }

    /// Row-major (theta outer) cell coordinates.
    pub fn coordinates(&self, cell: usize) -> (f64, f64) {
        (self.theta(cell / self.phi_points), self.phi(cell % self.phi_points))
    }

    pub fn direction(&self, cell: usize) -> SphericalDirection {
        let (theta, phi) = self.coordinates(cell);
        SphericalDirection::new(theta, phi)
    }

    /// Column holding `pi - phi_j` modulo `2 pi`, if the grid has one.
    pub fn mirrored_phi(&self, j: usize) -> Option<usize> {
        let target = PI - self.phi(j);
        (0..self.phi_points).find(|&k| {
            let d = (self.phi(k) - target).rem_euclid(2.0 * PI);
            d < 1e-9 || 2.0 * PI - d < 1e-9
        })
    }
}

/// Which parts of the Floquet step are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    #[default]
    Full,
    RotationsOnly,
    InteractionsOnly,
    /// No pulses; only decoherence acts.
    Idle,
}

impl ScanMode {
    pub fn parameters(self, p: &FloquetParameters) -> FloquetParameters {
        let (kappa, rotation_angle) = match self {
            ScanMode::Full => (p.kappa, p.rotation_angle),
            ScanMode::RotationsOnly => (0.0, p.rotation_angle),
            ScanMode::InteractionsOnly => (p.kappa, 0.0),
            ScanMode::Idle => (0.0, 0.0),
        };
        FloquetParameters {
            kappa,
            rotation_angle,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScanMode::Full => "full",
            ScanMode::RotationsOnly => "rotations_only",
            ScanMode::InteractionsOnly => "interactions_only",
            ScanMode::Idle => "idle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AverageMode {
    #[default]
    TimeAverage,
    PerStepSnapshots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Dicke,
    Register,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Dicke => "dicke",
            Backend::Register => "register",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetadata {
    pub kappa: f64,
    pub rotation_angle: f64,
    pub steps: usize,
    /// Set on per-step snapshots.
    pub snapshot_step: Option<usize>,
    pub backend: Backend,
    pub mode: ScanMode,
    pub average: AverageMode,
    pub qubits: usize,
    pub seed: Option<u64>,
    pub noise: Option<NoiseParameters>,
    pub artifact_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyMap {
    pub grid: GridSpec,
    /// Row-major, theta outer.
    pub values: Vec<f64>,
    pub metadata: MapMetadata,
}

impl EntropyMap {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.phi_points + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `(i, j)` of the first smallest value.
    pub fn argmin(&self) -> (usize, usize) {
        let k = (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .unwrap_or(0);
        (k / self.grid.phi_points, k % self.grid.phi_points)
    }

    pub fn argmax(&self) -> (usize, usize) {
        let k = (0..self.values.len())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        (k / self.grid.phi_points, k % self.grid.phi_points)
    }

    /// `(theta, phi, value)` in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| {
            let (t, p) = self.grid.coordinates(k);
            (t, p, v)
        })
    }

    /// Largest difference between cells related by a half turn about `y`:
    /// `(theta, phi) -> (pi - theta, pi - phi)`.
    pub fn symmetry_error(&self) -> f64 {
        let g = self.grid;
        let mut err = 0.0f64;
        for i in 0..g.theta_points {
            for j in 0..g.phi_points {
                if let Some(jm) = g.mirrored_phi(j) {
                    err = err.max((self.get(i, j) - self.get(g.theta_points - 1 - i, jm)).abs());
                }
            }
        }
        err
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub params: FloquetParameters,
    pub qubits: usize,
    pub steps: usize,
    pub grid: GridSpec,
    pub mode: ScanMode,
    pub noise: Option<NoiseParameters>,
    pub average: AverageMode,
    pub backend: Backend,
    pub seed: Option<u64>,
}

impl ScanConfig {
    pub fn new(params: FloquetParameters, qubits: usize, steps: usize) -> Self {
        Self {
            params,
            qubits,
            steps,
            grid: GridSpec::default(),
            mode: ScanMode::Full,
            noise: None,
            average: AverageMode::TimeAverage,
            backend: Backend::Dicke,
            seed: None,
        }
    }
}

fn check_norm(norm_sqr: f64) -> Result<()> {
    if (norm_sqr - 1.0).abs() > NORM_DRIFT_TOL {
        return Err(Error::InvariantViolation(format!("state norm drifted to {}", norm_sqr.sqrt())));
    }
    Ok(())
}

fn mean_qubit_entropy(rdms: impl Iterator<Item = Result<DensityOperator>>) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for rho in rdms {
        sum += metrics::entanglement_entropy(&rho?)?;
        count += 1;
    }
    Ok(sum / count as f64)
}

/// Single-qubit entropy after `0..=steps` periods, averaged over qubits.
pub fn entropy_series(
    initial: SphericalDirection,
    p: &FloquetParameters,
    n: usize,
    steps: usize,
    backend: Backend,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(steps + 1);
    match backend {
        Backend::Dicke => {
            let start = coherent_state_dicke(Spin::from_qubits(n)?, initial);
            floquet::for_each_step(&start, p, steps, |_, s| {
                check_norm(s.norm_sqr())?;
                // all qubits share one reduced state
                out.push(metrics::binary_entropy_of_length(dicke_bloch_vector(s).length()));
                Ok(())
            })?;
        }
        Backend::Register => {
            let start = coherent_state_register(n, initial)?;
            floquet::for_each_step(&start, p, steps, |_, s| {
                check_norm(s.norm_sqr())?;
                out.push(mean_qubit_entropy((0..n).map(|q| single_qubit_rdm_register(s, q)))?);
                Ok(())
            })?;
        }
    }
    Ok(out)
}

fn noisy_entropy_series(
    initial: SphericalDirection,
    p: &FloquetParameters,
    n: usize,
    steps: usize,
    noise: &NoiseParameters,
) -> Result<Vec<f64>> {
    open_system::noisy_evolve(initial, n, p, noise, steps)?
        .iter()
        .map(|rho| mean_qubit_entropy((0..n).map(|q| single_qubit_rdm_density(rho, q))))
        .collect()
}

/// Time-averaged map, or one map per step `0..=steps` for snapshots.
pub fn entropy_map_scan(cfg: &ScanConfig) -> Result<Vec<EntropyMap>> {
    if cfg.mode == ScanMode::Idle && cfg.noise.is_none() {
        return Err(Error::InvalidArgument(
            "idle mode needs noise parameters; without them every entropy is zero".into(),
        ));
    }
    if cfg.average == AverageMode::TimeAverage && cfg.steps == 0 {
        return Err(Error::InvalidArgument("time average needs at least one step".into()));
    }
    GridSpec::new(cfg.grid.theta_points, cfg.grid.phi_points)?;
    let params = cfg.mode.parameters(&cfg.params);
    let backend = if cfg.noise.is_some() { Backend::Register } else { cfg.backend };

    let series: Vec<Vec<f64>> = (0..cfg.grid.cells())
        .into_par_iter()
        .map(|cell| {
            let dir = cfg.grid.direction(cell);
            match &cfg.noise {
                Some(noise) => noisy_entropy_series(dir, &params, cfg.qubits, cfg.steps, noise),
                None => entropy_series(dir, &params, cfg.qubits, cfg.steps, backend),
            }
        })
        .collect::<Result<_>>()?;

    let metadata = |snapshot_step| MapMetadata {
        kappa: params.kappa,
        rotation_angle: params.rotation_angle,
        steps: cfg.steps,
        snapshot_step,
        backend,
        mode: cfg.mode,
        average: cfg.average,
        qubits: cfg.qubits,
        seed: cfg.seed,
        noise: cfg.noise.clone(),
        artifact_version: crate::ARTIFACT_VERSION.to_string(),
    };
    let maps = match cfg.average {
        AverageMode::TimeAverage => vec![EntropyMap {
            grid: cfg.grid,
            values: series
                .iter()
                .map(|s| s[1..].iter().sum::<f64>() / cfg.steps as f64)
                .collect(),
            metadata: metadata(None),
        }],
        AverageMode::PerStepSnapshots => (0..=cfg.steps)
            .map(|step| EntropyMap {
                grid: cfg.grid,
                values: series.iter().map(|s| s[step]).collect(),
                metadata: metadata(Some(step)),
            })
            .collect(),
    };
    for m in &maps {
        if let Some(v) = m.values.iter().find(|v| !(-1e-12..=ENTROPY_CEILING).contains(*v)) {
            return Err(Error::InvariantViolation(format!("entropy {v} outside [0, 1]")));
        }
    }
    Ok(maps)
}

/// Per-step maps for `N = 0..=steps`.
pub fn snapshots_experiment(
    p: &FloquetParameters,
    n: usize,
    steps: usize,
    grid: GridSpec,
    backend: Backend,
) -> Result<Vec<EntropyMap>> {
    let cfg = ScanConfig {
        grid,
        backend,
        average: AverageMode::PerStepSnapshots,
        ..ScanConfig::new(*p, n, steps)
    };
    entropy_map_scan(&cfg)
}

pub fn ergodicity_experiment(
    p: &FloquetParameters,
    n: usize,
    initials: &[SphericalDirection],
    n_max: usize,
    window: AverageWindow,
) -> Result<Vec<OverlapSeries>> {
    initials
        .par_iter()
        .map(|&d| metrics::ergodicity_overlap_series(d, p, n, n_max, window))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    /// `(n, sigma)` with `n` strictly increasing.
    pub rows: Vec<(usize, f64)>,
    pub window: (usize, usize),
    pub kappa: f64,
    pub initial: SphericalDirection,
}

impl ScalingTable {
    /// Least-squares slope of `ln sigma` against `ln n`.
    pub fn log_log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|&(n, s)| ((n as f64).ln(), s.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

pub const MAX_SCALING_QUBITS: usize = 64;

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k).sqrt()
}

/// Entropy fluctuations over steps `window.0..=window.1` for each qubit count.
pub fn finite_size_experiment(
    p: &FloquetParameters,
    n_list: &[usize],
    window: (usize, usize),
    initial: SphericalDirection,
) -> Result<ScalingTable> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("qubit counts must be non-empty and strictly increasing".into()));
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0 || n > MAX_SCALING_QUBITS) {
        return Err(Error::QubitCount {
            n,
            max: MAX_SCALING_QUBITS,
        });
    }
    if window.0 > window.1 {
        return Err(Error::InvalidArgument(format!("empty step window {window:?}")));
    }
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let series = entropy_series(initial, p, n, window.1, Backend::Dicke)?;
            Ok((n, std_dev(&series[window.0..=window.1])))
        })
        .collect::<Result<_>>()?;
    Ok(ScalingTable {
        rows,
        window,
        kappa: p.kappa,
        initial,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullChaos {
    pub maps: Vec<EntropyMap>,
    pub cloud: StroboscopicCloud,
}

/// Time-averaged maps for each qubit count plus a classical cloud at the
/// same kick strength.
pub fn full_chaos_experiment(
    kappa: f64,
    n_list: &[usize],
    grid: GridSpec,
    steps: usize,
    cloud: (usize, usize, u64),
) -> Result<FullChaos> {
    let p = FloquetParameters::new(kappa)?;
    let maps = n_list
        .iter()
        .map(|&n| {
            let cfg = ScanConfig {
                grid,
                seed: Some(cloud.2),
                ..ScanConfig::new(p, n, steps)
            };
            Ok(entropy_map_scan(&cfg)?.remove(0))
        })
        .collect::<Result<_>>()?;
    Ok(FullChaos {
        maps,
        cloud: stroboscopic_map(kappa, cloud.0, cloud.1, cloud.2)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub bloch: BlochVector,
    pub entropy: f64,
}

/// Bloch vector and entropy of qubit 0 after each of `0..=steps` periods.
pub fn trajectory_experiment(
    initial: SphericalDirection,
    p: &FloquetParameters,
    n: usize,
    steps: usize,
    backend: Backend,
) -> Result<Vec<TrajectoryPoint>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut record = |step: usize, rho: DensityOperator| -> Result<()> {
        out.push(TrajectoryPoint {
            step,
            bloch: bloch_from_density(&rho)?,
            entropy: metrics::entanglement_entropy(&rho)?,
        });
        Ok(())
    };
    match backend {
        Backend::Dicke => {
            let start = coherent_state_dicke(Spin::from_qubits(n)?, initial);
            floquet::for_each_step(&start, p, steps, |step, s| {
                check_norm(s.norm_sqr())?;
                record(step, s.qubit_rdm(0)?)
            })?;
        }
        Backend::Register => {
            let start = coherent_state_register(n, initial)?;
            floquet::for_each_step(&start, p, steps, |step, s| {
                check_norm(s.norm_sqr())?;
                record(step, s.qubit_rdm(0)?)
            })?;
        }
    }
    Ok(out)
}

/// Pauli tables of two initial states after `steps` periods.
pub fn pauli_bars_experiment(
    insets: [SphericalDirection; 2],
    p: &FloquetParameters,
    n: usize,
    steps: usize,
) -> Result<[PauliCorrelations; 2]> {
    let table = |d: SphericalDirection| -> Result<PauliCorrelations> {
        let mut psi = coherent_state_register(n, d)?;
        for _ in 0..steps {
            psi = floquet::step_register(&psi, p);
        }
        check_norm(psi.norm_sqr())?;
        metrics::pauli_correlations(&DensityOperator::from_register(&psi))
    };
    Ok([table(insets[0])?, table(insets[1])?])
}

/// `Tr rho^2` after `0..=steps` noisy periods for each initial state.
pub fn purity_experiment(
    insets: [SphericalDirection; 2],
    p: &FloquetParameters,
    noise: &NoiseParameters,
    n: usize,
    steps: usize,
) -> Result<[Vec<f64>; 2]> {
    let series = |d| -> Result<Vec<f64>> {
        Ok(open_system::noisy_evolve(d, n, p, noise, steps)?
            .iter()
            .map(metrics::purity)
            .collect())
    };
    Ok([series(insets[0])?, series(insets[1])?])
}

#[derive(Debug, Clone)]
pub struct TomographyDemo {
    pub truth: DensityOperator,
    pub reconstructed: DensityOperator,
    pub fidelity: f64,
    pub records: Vec<CountRecord>,
}

/// Evolves a coherent state, samples tomography counts from it and
/// reconstructs it by maximum likelihood.
pub fn tomography_demo(
    initial: SphericalDirection,
    p: &FloquetParameters,
    n: usize,
    steps: usize,
    shots: u64,
    seed: u64,
) -> Result<TomographyDemo> {
    let mut psi = coherent_state_register(n, initial)?;
    for _ in 0..steps {
        psi = floquet::step_register(&psi, p);
    }
    check_norm(psi.norm_sqr())?;
    let truth = DensityOperator::from_register(&psi);
    let settings = open_system::tomography_settings(n)?;
    let records = open_system::simulate_counts(&truth, &settings, shots, seed)?;
    let reconstructed = open_system::mle_reconstruct(&records)?;
    let fidelity = open_system::overlap_with_theory(&reconstructed, &truth)?;
    Ok(TomographyDemo {
        truth,
        reconstructed,
        fidelity,
        records,
    })
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ties share the mean of their positions
        let r = 0.5 * (i + j) as f64;
        for &k in &order[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with tied values given averaged ranks.
pub fn spearman_rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let k = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / k;
    let mb = rb.iter().sum::<f64>() / k;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    Ok(cov / (va * vb).sqrt())
}
