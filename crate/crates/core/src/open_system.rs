//! Decoherence channels, noisy evolution, and state tomography.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::floquet::{step_register_density, FloquetParameters};
use crate::linalg::{self, CMatrix, Gate2, C64, ONE, ZERO};
use crate::metrics;
use crate::spin::{coherent_state_register, Basis, DensityOperator, SphericalDirection};

pub const MAX_NOISY_QUBITS: usize = 7;
pub const MAX_TOMOGRAPHY_QUBITS: usize = 5;

/// `kappa = 3 g t` for a coupling `g` in rad/s applied for `t` seconds.
pub fn kappa_from_pulse(g: f64, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 || !g.is_finite() || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("invalid pulse g={g}, t={t}")));
    }
    Ok(3.0 * g * t)
}

/// Per-qubit time constant, or one value for every qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecayTime {
    Uniform(f64),
    PerQubit(Vec<f64>),
}

impl DecayTime {
    pub fn for_qubit(&self, q: usize) -> f64 {
        match self {
            DecayTime::Uniform(t) => *t,
            DecayTime::PerQubit(ts) => ts[q],
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            DecayTime::Uniform(t) => std::slice::from_ref(t),
            DecayTime::PerQubit(ts) => ts,
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        match self {
            DecayTime::PerQubit(ts) if ts.len() != n => Err(Error::DimensionMismatch {
                left: ts.len(),
                right: n,
            }),
            _ => Ok(()),
        }
    }
}

/// Decoherence times and pulse durations, all in nanoseconds.
/// An infinite time constant disables that channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseParameters {
    pub t1: DecayTime,
    pub tphi: DecayTime,
    pub rotation_duration: f64,
    pub interaction_duration: f64,
}

impl NoiseParameters {
    pub fn uniform(t1: f64, tphi: f64, rotation_duration: f64, interaction_duration: f64) -> Result<Self> {
        let noise = Self {
            t1: DecayTime::Uniform(t1),
            tphi: DecayTime::Uniform(tphi),
            rotation_duration,
            interaction_duration,
        };
        noise.validate()?;
        Ok(noise)
    }

    /// Both channels off.
    pub fn disabled(rotation_duration: f64, interaction_duration: f64) -> Result<Self> {
        Self::uniform(f64::INFINITY, f64::INFINITY, rotation_duration, interaction_duration)
    }

    pub fn validate(&self) -> Result<()> {
        for &t in self.t1.values().iter().chain(self.tphi.values()) {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidArgument(format!("decay time must be positive, got {t}")));
            }
        }
        for d in [self.rotation_duration, self.interaction_duration] {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::InvalidArgument(format!("pulse duration must be positive, got {d}")));
            }
        }
        Ok(())
    }

    pub fn step_duration(&self) -> f64 {
        self.rotation_duration + self.interaction_duration
    }

    pub fn is_disabled(&self) -> bool {
        self.t1.values().iter().chain(self.tphi.values()).all(|t| t.is_infinite())
    }
}

fn register_qubits(rho: &DensityOperator) -> Result<usize> {
    match rho.basis() {
        Basis::Register(n) => Ok(n),
        Basis::SingleQubit => Ok(1),
        other => Err(Error::Basis(format!("expected register basis, got {other:?}"))),
    }
}

fn kraus_pair(rho: &CMatrix, q: usize, k0: &Gate2, k1: &Gate2) -> CMatrix {
    let mut a = rho.clone();
    linalg::conjugate_gate(&mut a, q, k0);
    let mut b = rho.clone();
    linalg::conjugate_gate(&mut b, q, k1);
    a + b
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Amplitude damping followed by pure dephasing on every qubit.
pub fn apply_channels(rho: &DensityOperator, noise: &NoiseParameters, duration: f64) -> Result<DensityOperator> {
    let n = register_qubits(rho)?;
    if n > MAX_NOISY_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_NOISY_QUBITS,
        });
    }
    if duration.is_nan() || duration < 0.0 {
        return Err(Error::InvalidArgument(format!("duration must be non-negative, got {duration}")));
    }
    noise.validate()?;
    noise.t1.check_len(n)?;
    noise.tphi.check_len(n)?;

    let mut m = rho.matrix().clone();
    for q in 0..n {
        let gamma = -(-duration / noise.t1.for_qubit(q)).exp_m1();
        if gamma > 0.0 {
            let k0 = [[ONE, ZERO], [ZERO, real((1.0 - gamma).sqrt())]];
            let k1 = [[ZERO, real(gamma.sqrt())], [ZERO, ZERO]];
            m = kraus_pair(&m, q, &k0, &k1);
        }
    }
    for q in 0..n {
        let lambda = -(-2.0 * duration / noise.tphi.for_qubit(q)).exp_m1();
        if lambda > 0.0 {
            let k0 = [[ONE, ZERO], [ZERO, real((1.0 - lambda).sqrt())]];
            let k1 = [[ZERO, ZERO], [ZERO, real(lambda.sqrt())]];
            m = kraus_pair(&m, q, &k0, &k1);
        }
    }
    Ok(DensityOperator::from_parts(rho.basis(), m))
}

/// Density operators after `0..=steps` noisy periods starting from a
/// coherent state of `n` qubits.
pub fn noisy_evolve(
    initial: SphericalDirection,
    n: usize,
    p: &FloquetParameters,
    noise: &NoiseParameters,
    steps: usize,
) -> Result<Vec<DensityOperator>> {
    if n == 0 || n > MAX_NOISY_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_NOISY_QUBITS,
        });
    }
    let rho = DensityOperator::from_register(&coherent_state_register(n, initial)?);
    noisy_evolve_density(&rho, p, noise, steps)
}

pub fn noisy_evolve_density(
    initial: &DensityOperator,
    p: &FloquetParameters,
    noise: &NoiseParameters,
    steps: usize,
) -> Result<Vec<DensityOperator>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    let mut rho = initial.clone();
    for _ in 0..steps {
        rho = step_register_density(&rho, p)?;
        rho = apply_channels(&rho, noise, noise.step_duration())?;
        out.push(rho.clone());
    }
    Ok(out)
}

/// Fidelity of a measured or simulated state against the ideal one.
pub fn overlap_with_theory(rho_expmt: &DensityOperator, rho_thy: &DensityOperator) -> Result<f64> {
    metrics::fidelity(rho_expmt, rho_thy)
}

/// Pre-measurement rotation on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TomographyRotation {
    I,
    X90,
    Y90,
    X180,
}

/// Pauli axis read out by a z measurement after a rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MeasuredAxis {
    X,
    Y,
    Z,
}

impl TomographyRotation {
    pub const ALL: [TomographyRotation; 4] = [Self::I, Self::X90, Self::Y90, Self::X180];

    pub fn gate(self) -> Gate2 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            Self::I => [[ONE, ZERO], [ZERO, ONE]],
            Self::X90 => linalg::rx_gate(FRAC_PI_2),
            Self::Y90 => linalg::ry_gate(FRAC_PI_2),
            Self::X180 => linalg::rx_gate(PI),
        }
    }

    fn axis(self) -> MeasuredAxis {
        match self {
            Self::I | Self::X180 => MeasuredAxis::Z,
            Self::X90 => MeasuredAxis::Y,
            Self::Y90 => MeasuredAxis::X,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::X90 => "X90",
            Self::Y90 => "Y90",
            Self::X180 => "X180",
        }
    }
}

/// One rotation per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TomographySetting {
    rotations: Vec<TomographyRotation>,
}

impl TomographySetting {
    pub fn new(rotations: Vec<TomographyRotation>) -> Result<Self> {
        if rotations.is_empty() {
            return Err(Error::InvalidArgument("setting needs at least one qubit".into()));
        }
        Ok(Self { rotations })
    }

    pub fn rotations(&self) -> &[TomographyRotation] {
        &self.rotations
    }

    pub fn qubits(&self) -> usize {
        self.rotations.len()
    }

    /// `U rho U^dagger` for the product of this setting's gates.
    fn rotate(&self, rho: &CMatrix) -> CMatrix {
        let mut m = rho.clone();
        for (q, r) in self.rotations.iter().enumerate() {
            if *r != TomographyRotation::I {
                linalg::conjugate_gate(&mut m, q, &r.gate());
            }
        }
        m
    }

    /// `U^dagger D U`.
    fn unrotate(&self, m: &mut CMatrix) {
        for (q, r) in self.rotations.iter().enumerate() {
            if *r != TomographyRotation::I {
                linalg::conjugate_gate(m, q, &linalg::gate_adjoint(&r.gate()));
            }
        }
    }

    /// z-basis outcome probabilities after the rotation; bit `q` of the
    /// outcome index is set when qubit `q` is found excited.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        let n = register_qubits(rho)?;
        if n != self.qubits() {
            return Err(Error::DimensionMismatch {
                left: self.qubits(),
                right: n,
            });
        }
        Ok(outcome_probabilities(&self.rotate(rho.matrix())))
    }
}

impl fmt::Display for TomographySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<_> = self.rotations.iter().map(|r| r.label()).collect();
        f.write_str(&labels.join(","))
    }
}

fn outcome_probabilities(rotated: &CMatrix) -> Vec<f64> {
    let raw: Vec<f64> = rotated.diagonal().iter().map(|z| z.re.max(0.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// All `4^n` settings, qubit 0 as the most significant digit.
pub fn tomography_settings(n: usize) -> Result<Vec<TomographySetting>> {
    if n == 0 || n > MAX_TOMOGRAPHY_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_TOMOGRAPHY_QUBITS,
        });
    }
    Ok((0..1usize << (2 * n))
        .map(|index| TomographySetting {
            rotations: (0..n)
                .map(|q| TomographyRotation::ALL[(index >> (2 * (n - 1 - q))) & 3])
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: TomographySetting,
    pub shots: u64,
    pub counts: Vec<u64>,
}

impl CountRecord {
    pub fn new(setting: TomographySetting, counts: Vec<u64>) -> Result<Self> {
        let record = Self {
            shots: counts.iter().sum(),
            setting,
            counts,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = 1usize << self.setting.qubits();
        if self.counts.len() != dim {
            return Err(Error::DimensionMismatch {
                left: self.counts.len(),
                right: dim,
            });
        }
        if self.shots == 0 || self.counts.iter().sum::<u64>() != self.shots {
            return Err(Error::InvalidArgument(format!(
                "counts sum to {}, shots = {}",
                self.counts.iter().sum::<u64>(),
                self.shots
            )));
        }
        Ok(())
    }
}

/// Exact outcome probabilities for one setting, standing in for infinite shots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub setting: TomographySetting,
    pub probabilities: Vec<f64>,
}

pub fn exact_frequencies(rho: &DensityOperator, settings: &[TomographySetting]) -> Result<Vec<FrequencyRecord>> {
    settings
        .iter()
        .map(|s| {
            Ok(FrequencyRecord {
                setting: s.clone(),
                probabilities: s.probabilities(rho)?,
            })
        })
        .collect()
}

fn multinomial(rng: &mut ChaCha8Rng, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() || mass <= 0.0 {
            counts[k] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, q).expect("probability in [0, 1]").sample(rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    counts
}

/// Seeded synthetic counts; setting `i` draws from its own stream.
pub fn simulate_counts(
    rho: &DensityOperator,
    settings: &[TomographySetting],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let probs = settings
        .par_iter()
        .map(|s| s.probabilities(rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(settings
        .par_iter()
        .zip(probs)
        .enumerate()
        .map(|(i, (s, p))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            CountRecord {
                setting: s.clone(),
                shots,
                counts: multinomial(&mut rng, shots, &p),
            }
        })
        .collect())
}

fn check_complete(settings: &[&TomographySetting], n: usize) -> Result<()> {
    let axes: std::collections::HashSet<Vec<MeasuredAxis>> = settings
        .iter()
        .map(|s| s.rotations.iter().map(|r| r.axis()).collect())
        .collect();
    // a Pauli string is readable from a setting when each non-identity
    // factor matches that qubit's measured axis
    for index in 1..1usize << (2 * n) {
        let covered = axes.iter().any(|ax| {
            (0..n).all(|q| match (index >> (2 * (n - 1 - q))) & 3 {
                0 => true,
                1 => ax[q] == MeasuredAxis::X,
                2 => ax[q] == MeasuredAxis::Y,
                _ => ax[q] == MeasuredAxis::Z,
            })
        });
        if !covered {
            return Err(Error::TomographicallyIncomplete);
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MleOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub initial: Option<DensityOperator>,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MleOutcome {
    pub rho: DensityOperator,
    pub iterations: usize,
    pub converged: bool,
    pub log_likelihood: f64,
    /// Largest element change in the final iteration.
    pub last_update: f64,
}

/// Weighted observed frequencies for one setting.
struct Observation<'a> {
    setting: &'a TomographySetting,
    weight: f64,
    freqs: Vec<f64>,
}

/// Probabilities below this are floored when an outcome was observed.
const PROB_FLOOR: f64 = 1e-300;

fn log_likelihood(obs: &[Observation<'_>], rho: &CMatrix) -> f64 {
    obs.iter()
        .map(|o| {
            let p = outcome_probabilities(&o.setting.rotate(rho));
            o.freqs
                .iter()
                .zip(&p)
                .filter(|(f, _)| **f > 0.0)
                .map(|(f, p)| o.weight * f * p.max(PROB_FLOOR).ln())
                .sum::<f64>()
        })
        .sum()
}

/// `R = sum_s w_s sum_k (f_sk / p_sk) Pi_sk / sum_s w_s`.
fn r_operator(obs: &[Observation<'_>], rho: &CMatrix) -> CMatrix {
    let dim = rho.nrows();
    let total: f64 = obs.iter().map(|o| o.weight).sum();
    let mut r = CMatrix::zeros(dim, dim);
    for o in obs {
        let p = outcome_probabilities(&o.setting.rotate(rho));
        let ratios = o
            .freqs
            .iter()
            .zip(&p)
            .map(|(f, p)| if *f > 0.0 { real(o.weight * f / (total * p.max(PROB_FLOOR))) } else { ZERO });
        let mut d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, ratios));
        o.setting.unrotate(&mut d);
        r += d;
    }
    r
}

fn sandwich(m: &CMatrix, rho: &CMatrix) -> CMatrix {
    let out = m * rho * m.adjoint();
    let sym = (&out + out.adjoint()) * real(0.5);
    let tr = linalg::trace(&sym).re;
    sym / real(tr)
}

fn run_mle(obs: Vec<Observation<'_>>, n: usize, options: &MleOptions) -> Result<MleOutcome> {
    let refs: Vec<&TomographySetting> = obs.iter().map(|o| o.setting).collect();
    check_complete(&refs, n)?;
    let dim = 1usize << n;
    let basis = Basis::Register(n);
    let mut rho = match &options.initial {
        Some(init) => {
            if init.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: init.dim(),
                    right: dim,
                });
            }
            init.matrix().clone()
        }
        None => CMatrix::identity(dim, dim) / real(dim as f64),
    };
    let identity = CMatrix::identity(dim, dim);
    let mut ll = log_likelihood(&obs, &rho);
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        iterations += 1;
        let r = r_operator(&obs, &rho);
        let slack = 1e-12 * ll.abs().max(1.0);
        let mut candidate = sandwich(&r, &rho);
        let mut candidate_ll = log_likelihood(&obs, &candidate);
        let mut epsilon = 1.0;
        // diluted update (I + eps R) rho (I + eps R) when the plain one overshoots
        while candidate_ll < ll - slack && epsilon > 1e-12 {
            let m = &identity + &r * real(epsilon);
            candidate = sandwich(&m, &rho);
            candidate_ll = log_likelihood(&obs, &candidate);
            epsilon *= 0.5;
        }
        if candidate_ll < ll - slack {
            // no ascent direction left at this precision
            converged = true;
            break;
        }
        last_update = linalg::max_abs_diff(&candidate, &rho);
        rho = candidate;
        ll = candidate_ll;
        if last_update < options.tolerance {
            converged = true;
            break;
        }
    }
    let rho = DensityOperator::from_parts(basis, rho).renormalized();
    rho.validate()?;
    Ok(MleOutcome {
        rho,
        iterations,
        converged,
        log_likelihood: ll,
        last_update,
    })
}

fn record_qubits<'a>(settings: impl Iterator<Item = &'a TomographySetting>) -> Result<usize> {
    let mut n = None;
    for s in settings {
        match n {
            None => n = Some(s.qubits()),
            Some(m) if m != s.qubits() => {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: s.qubits(),
                })
            }
            _ => {}
        }
    }
    let n = n.ok_or(Error::TomographicallyIncomplete)?;
    if n > MAX_TOMOGRAPHY_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_TOMOGRAPHY_QUBITS,
        });
    }
    Ok(n)
}

/// Maximum-likelihood density matrix for measured counts.
pub fn mle_reconstruct(records: &[CountRecord]) -> Result<DensityOperator> {
    Ok(mle_reconstruct_with(records, &MleOptions::default())?.rho)
}

pub fn mle_reconstruct_with(records: &[CountRecord], options: &MleOptions) -> Result<MleOutcome> {
    let n = record_qubits(records.iter().map(|r| &r.setting))?;
    let mut obs = Vec::with_capacity(records.len());
    for r in records {
        r.validate()?;
        obs.push(Observation {
            setting: &r.setting,
            weight: r.shots as f64,
            freqs: r.counts.iter().map(|&c| c as f64 / r.shots as f64).collect(),
        });
    }
    run_mle(obs, n, options)
}

pub fn mle_reconstruct_frequencies(records: &[FrequencyRecord], options: &MleOptions) -> Result<MleOutcome> {
    let n = record_qubits(records.iter().map(|r| &r.setting))?;
    let mut obs = Vec::with_capacity(records.len());
    for r in records {
        if r.probabilities.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                left: r.probabilities.len(),
                right: 1 << n,
            });
        }
        let total: f64 = r.probabilities.iter().sum();
        if r.probabilities.iter().any(|p| p.is_nan() || *p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("frequencies must be a distribution (sum {total})")));
        }
        obs.push(Observation {
            setting: &r.setting,
            weight: 1.0,
            freqs: r.probabilities.clone(),
        });
    }
    run_mle(obs, n, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{evolve, step_register};
    use crate::metrics::{fidelity, purity};
    use crate::spin::RegisterVector;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ket(n: usize, amps: &[(usize, C64)]) -> DensityOperator {
        let mut v = vec![ZERO; 1 << n];
        for &(i, a) in amps {
            v[i] = a;
        }
        DensityOperator::from_register(&RegisterVector::new(n, v).unwrap())
    }

    fn ghz3() -> DensityOperator {
        let h = real(1.0 / 2f64.sqrt());
        ket(3, &[(0, h), (7, h)])
    }

    fn random_density(n: usize, seed: u64) -> DensityOperator {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n;
        let a = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = linalg::trace(&m).re;
        DensityOperator::new(Basis::Register(n), m / real(tr)).unwrap()
    }

    fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> f64 {
        let diff = a.matrix() - b.matrix();
        0.5 * linalg::eigvalsh(&diff).iter().map(|l| l.abs()).sum::<f64>()
    }

    fn hardware_noise() -> NoiseParameters {
        NoiseParameters::uniform(15_000.0, 3_000.0, 20.0, 25.0).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let k = kappa_from_pulse(2.0 * PI * 5e6, 5e-9).unwrap();
        assert!((k - 0.471).abs() < 1e-3);
        assert_eq!(kappa_from_pulse(2.0 * PI * 5e6, 0.0).unwrap(), 0.0);
        let k = kappa_from_pulse(2.0 * PI * 5.3e6, 25e-9).unwrap();
        assert!((k - 2.50).abs() < 0.01);
        assert!(kappa_from_pulse(1.0, -1.0).is_err());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseParameters::uniform(0.0, 1.0, 20.0, 25.0).is_err());
        assert!(NoiseParameters::uniform(1.0, -1.0, 20.0, 25.0).is_err());
        assert!(NoiseParameters::uniform(1.0, 1.0, 0.0, 25.0).is_err());
        assert!(NoiseParameters::disabled(20.0, 25.0).unwrap().is_disabled());
        assert_eq!(hardware_noise().step_duration(), 45.0);
    }

    #[test]
    fn disabled_channels_do_nothing() {
        let rho = random_density(3, 1);
        let out = apply_channels(&rho, &NoiseParameters::disabled(20.0, 25.0).unwrap(), 45.0).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn half_decay_of_excited_qubit() {
        let excited = ket(1, &[(1, ONE)]);
        // gamma = 0.5 when duration = T1 ln 2
        let t1 = 1000.0;
        let noise = NoiseParameters::uniform(t1, f64::INFINITY, 20.0, 25.0).unwrap();
        let out = apply_channels(&excited, &noise, t1 * 2f64.ln()).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!((out.matrix()[(1, 1)].re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn long_wait_relaxes_to_ground() {
        let rho = random_density(3, 2);
        let out = apply_channels(&rho, &hardware_noise(), 1e9).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((purity(&out) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_shrinks_coherence_only() {
        let plus = ket(1, &[(0, real(0.6)), (1, real(0.8))]);
        let noise = NoiseParameters::uniform(f64::INFINITY, 100.0, 20.0, 25.0).unwrap();
        let out = apply_channels(&plus, &noise, 50.0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.36).abs() < 1e-12);
        // off-diagonal decays as exp(-t / T_phi)
        assert!((out.matrix()[(0, 1)].re - 0.48 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn channel_size_limit() {
        let big = DensityOperator::maximally_mixed(Basis::Register(8));
        assert!(matches!(apply_channels(&big, &hardware_noise(), 45.0), Err(Error::QubitCount { .. })));
    }

    #[test]
    fn noiseless_evolution_matches_unitary_backend() {
        let p = FloquetParameters::new(2.5).unwrap();
        let dir = SphericalDirection::new(1.0, 0.4);
        let noisy = noisy_evolve(dir, 3, &p, &NoiseParameters::disabled(20.0, 25.0).unwrap(), 10).unwrap();
        let pure = evolve(&coherent_state_register(3, dir).unwrap(), &p, 10).unwrap();
        assert_eq!(noisy.len(), 11);
        for (rho, psi) in noisy.iter().zip(pure.states()) {
            assert!((purity(rho) - 1.0).abs() < 1e-10);
            let f = fidelity(rho, &DensityOperator::from_register(psi)).unwrap();
            assert!(f > 1.0 - 1e-10);
        }
    }

    #[test]
    fn purity_decreases_under_noise() {
        let p = FloquetParameters::new(2.5).unwrap();
        let series = noisy_evolve(SphericalDirection::new(PI / 2.0, 0.0), 3, &p, &hardware_noise(), 10).unwrap();
        let purities: Vec<f64> = series.iter().map(purity).collect();
        for w in purities.windows(2) {
            assert!(w[1] < w[0], "{purities:?}");
        }
    }

    #[test]
    fn overlap_with_theory_drops_over_time() {
        let p = FloquetParameters::new(2.5).unwrap();
        let dir = SphericalDirection::new(PI / 2.0, 0.0);
        let noisy = noisy_evolve(dir, 3, &p, &hardware_noise(), 10).unwrap();
        let mut psi = coherent_state_register(3, dir).unwrap();
        let mut last = 1.0 + 1e-12;
        for rho in &noisy[1..] {
            psi = step_register(&psi, &p);
            let f = overlap_with_theory(rho, &DensityOperator::from_register(&psi)).unwrap();
            assert!(f > 0.0 && f < 1.0 && f < last);
            last = f;
        }
        let a = ket(1, &[(0, ONE)]);
        let b = ket(1, &[(1, ONE)]);
        assert!(overlap_with_theory(&a, &b).unwrap().abs() < 1e-12);
        assert!((overlap_with_theory(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn settings_order() {
        assert_eq!(tomography_settings(1).unwrap().len(), 4);
        let three = tomography_settings(3).unwrap();
        assert_eq!(three.len(), 64);
        assert!(three[0].rotations().iter().all(|r| *r == TomographyRotation::I));
        assert_eq!(three[1].to_string(), "I,I,X90");
        assert_eq!(three[16].to_string(), "X90,I,I");
        assert_eq!(three[63].to_string(), "X180,X180,X180");
        assert!(tomography_settings(6).is_err());
    }

    #[test]
    fn rotations_read_the_named_axes() {
        // +x, +y, +z eigenstates must give outcome 0 with certainty under Y90, X90, I
        let h = 1.0 / 2f64.sqrt();
        let cases = [
            (ket(1, &[(0, real(h)), (1, real(h))]), TomographyRotation::Y90),
            (ket(1, &[(0, real(h)), (1, C64::new(0.0, h))]), TomographyRotation::X90),
            (ket(1, &[(0, ONE)]), TomographyRotation::I),
            (ket(1, &[(1, ONE)]), TomographyRotation::X180),
        ];
        for (rho, rot) in cases {
            let p = TomographySetting::new(vec![rot]).unwrap().probabilities(&rho).unwrap();
            let certain = p[0].max(p[1]);
            assert!((certain - 1.0).abs() < 1e-12, "{rot:?}: {p:?}");
        }
    }

    #[test]
    fn ground_state_counts() {
        let zero = ket(3, &[(0, ONE)]);
        let settings = tomography_settings(3).unwrap();
        let records = simulate_counts(&zero, &settings[..1], 1000, 7).unwrap();
        assert_eq!(records[0].counts[0], 1000);
    }

    #[test]
    fn mixed_state_counts_are_uniform() {
        let mixed = DensityOperator::maximally_mixed(Basis::Register(3));
        let settings = tomography_settings(3).unwrap();
        let shots = 1_000_000u64;
        let records = simulate_counts(&mixed, &settings[5..6], shots, 9).unwrap();
        let sigma = (shots as f64 * 0.125 * 0.875).sqrt();
        for &c in &records[0].counts {
            assert!((c as f64 - shots as f64 / 8.0).abs() < 3.0 * sigma, "{c}");
        }
    }

    #[test]
    fn ghz_outcome_parity() {
        // <XXX> = 1 on GHZ; Y90 sends +x to the excited state, so only
        // odd-weight outcomes survive
        let y90 = vec![TomographySetting::new(vec![TomographyRotation::Y90; 3]).unwrap()];
        let p = y90[0].probabilities(&ghz3()).unwrap();
        for (k, pk) in p.iter().enumerate() {
            let expected = if k.count_ones() % 2 == 1 { 0.25 } else { 0.0 };
            assert!((pk - expected).abs() < 1e-12, "{k}: {pk}");
        }
        let records = simulate_counts(&ghz3(), &y90, 10_000, 1).unwrap();
        for (k, &c) in records[0].counts.iter().enumerate() {
            if k.count_ones() % 2 == 0 {
                assert_eq!(c, 0);
            }
        }
        // every Y-only correlator of GHZ vanishes, so X90 on all qubits is flat
        let x90 = TomographySetting::new(vec![TomographyRotation::X90; 3]).unwrap();
        for pk in x90.probabilities(&ghz3()).unwrap() {
            assert!((pk - 0.125).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_are_deterministic() {
        let rho = random_density(2, 3);
        let settings = tomography_settings(2).unwrap();
        let a = simulate_counts(&rho, &settings, 500, 5).unwrap();
        let b = simulate_counts(&rho, &settings, 500, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.validate().is_ok()));
        assert!(simulate_counts(&rho, &settings, 0, 5).is_err());
    }

    #[test]
    fn count_record_validation() {
        let s = TomographySetting::new(vec![TomographyRotation::I]).unwrap();
        assert!(CountRecord::new(s.clone(), vec![3, 4]).is_ok());
        assert!(CountRecord::new(s.clone(), vec![3, 4, 5]).is_err());
        let bad = CountRecord {
            setting: s,
            shots: 10,
            counts: vec![3, 4],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn incomplete_settings_rejected() {
        let zero = ket(2, &[(0, ONE)]);
        let settings: Vec<_> = tomography_settings(2)
            .unwrap()
            .into_iter()
            .filter(|s| !s.rotations().contains(&TomographyRotation::Y90))
            .collect();
        let records = simulate_counts(&zero, &settings, 100, 1).unwrap();
        assert!(matches!(mle_reconstruct(&records), Err(Error::TomographicallyIncomplete)));
        assert!(matches!(mle_reconstruct(&[]), Err(Error::TomographicallyIncomplete)));
    }

    #[test]
    fn mle_on_exact_probabilities() {
        let truth = random_density(3, 11);
        let freqs = exact_frequencies(&truth, &tomography_settings(3).unwrap()).unwrap();
        let out = mle_reconstruct_frequencies(&freqs, &MleOptions::default()).unwrap();
        let f = fidelity(&out.rho, &truth).unwrap();
        assert!(f > 0.999, "fidelity {f}");
    }

    #[test]
    fn mle_truth_is_a_fixed_point() {
        let truth = random_density(2, 4);
        let freqs = exact_frequencies(&truth, &tomography_settings(2).unwrap()).unwrap();
        let options = MleOptions {
            max_iterations: 1,
            initial: Some(truth.clone()),
            ..MleOptions::default()
        };
        let out = mle_reconstruct_frequencies(&freqs, &options).unwrap();
        assert!(linalg::max_abs_diff(out.rho.matrix(), truth.matrix()) < 1e-10);
    }

    #[test]
    fn mle_from_ground_state_counts() {
        let zero = ket(3, &[(0, ONE)]);
        let records = simulate_counts(&zero, &tomography_settings(3).unwrap(), 10_000, 3).unwrap();
        let rho = mle_reconstruct(&records).unwrap();
        rho.validate().unwrap();
        assert!(fidelity(&rho, &zero).unwrap() > 0.99);
    }

    #[test]
    fn mle_from_mixed_counts() {
        let mixed = DensityOperator::maximally_mixed(Basis::Register(3));
        let records = simulate_counts(&mixed, &tomography_settings(3).unwrap(), 10_000, 4).unwrap();
        let rho = mle_reconstruct(&records).unwrap();
        assert!(trace_distance(&rho, &mixed) < 0.05);
    }

    #[test]
    fn mle_likelihood_never_decreases() {
        let truth = random_density(2, 8);
        let records = simulate_counts(&truth, &tomography_settings(2).unwrap(), 2000, 8).unwrap();
        let mut last = f64::NEG_INFINITY;
        let mut rho = None;
        for _ in 0..30 {
            let options = MleOptions {
                max_iterations: 1,
                initial: rho.clone(),
                ..MleOptions::default()
            };
            let out = mle_reconstruct_with(&records, &options).unwrap();
            assert!(out.log_likelihood >= last - 1e-9 * last.abs().max(1.0));
            last = out.log_likelihood;
            rho = Some(out.rho);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn channels_preserve_trace_and_positivity(
            seed in 0u64..1000,
            t1 in 100.0f64..1e5,
            tphi in 100.0f64..1e5,
            duration in 0.0f64..1e4,
        ) {
            let rho = random_density(3, seed);
            let noise = NoiseParameters::uniform(t1, tphi, 20.0, 25.0).unwrap();
            let out = apply_channels(&rho, &noise, duration).unwrap();
            prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-12);
            prop_assert!(out.min_eigenvalue() >= -1e-10);
        }
    }
}
