//! Entropy, purity, fidelity, Pauli correlators and the microcanonical
//! ensemble.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, FloquetParameters, FloquetState, Trajectory};
use crate::linalg::{self, CMatrix, C64};
use crate::spin::{coherent_state_dicke, Basis, DensityOperator, SphericalDirection, Spin};

/// Eigenvalues below this contribute nothing to the entropy.
const ENTROPY_CUTOFF: f64 = 1e-15;
/// Eigenvalues below this are roundoff when taking square roots.
const SQRT_CUTOFF: f64 = 1e-14;

pub const MAX_MICROCANONICAL_QUBITS: usize = 12;
pub const MAX_PAULI_QUBITS: usize = 8;

/// Von Neumann entropy in bits.
pub fn entanglement_entropy(rho: &DensityOperator) -> Result<f64> {
    let vals = rho.eigenvalues();
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -DensityOperator::PSD_TOL {
        return Err(Error::NotPositive(min));
    }
    Ok(entropy_of_spectrum(&vals))
}

pub(crate) fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Entropy of a qubit whose Bloch vector has length `r`.
pub fn binary_entropy_of_length(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    entropy_of_spectrum(&[0.5 * (1.0 + r), 0.5 * (1.0 - r)])
}

/// `Tr rho^2`.
pub fn purity(rho: &DensityOperator) -> f64 {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Uhlmann fidelity `Tr sqrt(sqrt(sigma) rho sqrt(sigma))`.
///
/// Evaluated as the sum of singular values of `sqrt(rho) sqrt(sigma)`, which
/// keeps roundoff at machine precision instead of its square root.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let product = truncated_sqrt(rho.matrix()) * truncated_sqrt(sigma.matrix());
    let f: f64 = product.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

fn truncated_sqrt(m: &CMatrix) -> CMatrix {
    linalg::hermitian_map(m, |l| if l > SQRT_CUTOFF { l.sqrt() } else { 0.0 })
}

/// Normalized projector onto the symmetric (`j = n/2`) subspace of `n` qubits.
pub fn microcanonical(n: usize) -> Result<DensityOperator> {
    if n == 0 || n > MAX_MICROCANONICAL_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_MICROCANONICAL_QUBITS,
        });
    }
    let dim = 1usize << n;
    let table = linalg::ln_factorials(n);
    let weight: Vec<f64> = (0..=n)
        .map(|k| 1.0 / (linalg::ln_binomial(&table, n, k).exp() * (n + 1) as f64))
        .collect();
    let m = CMatrix::from_fn(dim, dim, |r, c| {
        let k = r.count_ones();
        if k == c.count_ones() {
            C64::new(weight[k as usize], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(DensityOperator::from_parts(Basis::Register(n), m))
}

/// The same ensemble expressed in the Dicke basis: `I / (2j + 1)`.
pub fn microcanonical_dicke(spin: Spin) -> DensityOperator {
    DensityOperator::maximally_mixed(Basis::Dicke(spin))
}

/// Which states enter a time average over `N` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AverageWindow {
    /// States after steps `1..=N`.
    #[default]
    ExcludeInitial,
    /// States after steps `0..=N`.
    IncludeInitial,
}

impl AverageWindow {
    fn first_step(self) -> usize {
        match self {
            AverageWindow::ExcludeInitial => 1,
            AverageWindow::IncludeInitial => 0,
        }
    }
}

/// Mean of the pure-state projectors after steps `1..=upto`.
pub fn time_averaged_density<S: FloquetState>(traj: &Trajectory<S>, upto: usize) -> Result<DensityOperator> {
    time_averaged_density_with(traj, upto, AverageWindow::ExcludeInitial)
}

pub fn time_averaged_density_with<S: FloquetState>(
    traj: &Trajectory<S>,
    upto: usize,
    window: AverageWindow,
) -> Result<DensityOperator> {
    if upto == 0 || upto > traj.steps() {
        return Err(Error::InvalidArgument(format!(
            "time average up to step {upto} outside 1..={}",
            traj.steps()
        )));
    }
    let states = &traj.states()[window.first_step()..=upto];
    let mut acc = ProjectorSum::default();
    for s in states {
        acc.add(&s.projector());
    }
    Ok(acc.mean().expect("non-empty window"))
}

/// Running sum of density matrices.
#[derive(Debug, Clone, Default)]
struct ProjectorSum {
    basis: Option<Basis>,
    sum: Option<CMatrix>,
    count: usize,
}

impl ProjectorSum {
    fn add(&mut self, rho: &DensityOperator) {
        match &mut self.sum {
            Some(s) => *s += rho.matrix(),
            None => {
                self.sum = Some(rho.matrix().clone());
                self.basis = Some(rho.basis());
            }
        }
        self.count += 1;
    }

    fn mean(&self) -> Option<DensityOperator> {
        let sum = self.sum.as_ref()?;
        let m = sum / C64::new(self.count as f64, 0.0);
        Some(DensityOperator::from_parts(self.basis?, m).renormalized())
    }
}

/// Expectation values of all `4^n` Pauli strings.
///
/// Strings are enumerated base 4 with qubit 0 as the most significant digit
/// and digits ordered `I, X, Y, Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliCorrelations {
    n: usize,
    values: Vec<f64>,
}

const PAULI_LETTERS: [char; 4] = ['I', 'X', 'Y', 'Z'];

impl PauliCorrelations {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pauli letter (0..4) acting on `qubit` in string `index`.
    pub fn digit(&self, index: usize, qubit: usize) -> usize {
        (index >> (2 * (self.n - 1 - qubit))) & 3
    }

    pub fn label(&self, index: usize) -> String {
        (0..self.n).map(|q| PAULI_LETTERS[self.digit(index, q)]).collect()
    }

    /// Number of non-identity factors.
    pub fn weight(&self, index: usize) -> usize {
        (0..self.n).filter(|&q| self.digit(index, q) != 0).count()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        if label.chars().count() != self.n {
            return None;
        }
        label.chars().try_fold(0usize, |acc, ch| {
            let d = PAULI_LETTERS.iter().position(|&p| p == ch.to_ascii_uppercase())?;
            Some(acc * 4 + d)
        })
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.index_of(label).map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.label(i), v))
    }

    /// `sum_P <P>^2`.
    pub fn square_sum(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

pub fn pauli_correlations(rho: &DensityOperator) -> Result<PauliCorrelations> {
    let n = match rho.basis() {
        Basis::Register(n) => n,
        Basis::SingleQubit => 1,
        other => return Err(Error::Basis(format!("expected register basis, got {other:?}"))),
    };
    if n > MAX_PAULI_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_PAULI_QUBITS,
        });
    }
    let m = rho.matrix();
    let dim = 1usize << n;
    let values = (0..1usize << (2 * n))
        .into_par_iter()
        .map(|index| {
            // P|i> = phase(i) |i ^ flip>; Tr(rho P) = sum_i phase(i) rho[i, i ^ flip]
            let mut flip = 0usize;
            let mut sign_mask = 0usize;
            let mut y_count = 0u32;
            for q in 0..n {
                let digit = (index >> (2 * (n - 1 - q))) & 3;
                let bit = 1usize << q;
                match digit {
                    1 => flip |= bit,
                    2 => {
                        flip |= bit;
                        sign_mask |= bit;
                        y_count += 1;
                    }
                    3 => sign_mask |= bit,
                    _ => {}
                }
            }
            let global = C64::new(0.0, 1.0).powu(y_count);
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                let term = m[(i, i ^ flip)];
                if (i & sign_mask).count_ones().is_multiple_of(2) {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            (global * acc).re
        })
        .collect();
    Ok(PauliCorrelations { n, values })
}

/// Overlap with the microcanonical ensemble after each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSeries {
    pub kappa: f64,
    pub initial: SphericalDirection,
    pub window: AverageWindow,
    /// `(N, overlap)` for `N = 1..=N_max`.
    pub points: Vec<(usize, f64)>,
}

impl OverlapSeries {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, v)| v)
    }

    pub fn at(&self, step: usize) -> Option<f64> {
        self.points.iter().find(|(s, _)| *s == step).map(|&(_, v)| v)
    }
}

/// Fidelity between the time-averaged state and the microcanonical ensemble
/// for `N = 1..=n_max`.
///
/// The dynamics never leave the symmetric subspace and fidelity is invariant
/// under the isometric embedding, so the average is formed in the Dicke basis
/// against `I / (n + 1)`.
pub fn ergodicity_overlap_series(
    initial: SphericalDirection,
    p: &FloquetParameters,
    n: usize,
    n_max: usize,
    window: AverageWindow,
) -> Result<OverlapSeries> {
    if n == 0 || n > MAX_MICROCANONICAL_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_MICROCANONICAL_QUBITS,
        });
    }
    let spin = Spin::from_qubits(n)?;
    let mc = microcanonical_dicke(spin);
    let start = coherent_state_dicke(spin, initial);
    let mut acc = ProjectorSum::default();
    let mut points = Vec::with_capacity(n_max);
    floquet::for_each_step(&start, p, n_max, |step, s| {
        if step >= window.first_step() {
            acc.add(&s.projector());
        }
        if step >= 1 {
            let avg = acc.mean().expect("at least one state");
            points.push((step, fidelity(&avg, &mc)?));
        }
        Ok(())
    })?;
    Ok(OverlapSeries {
        kappa: p.kappa,
        initial,
        window,
        points,
    })
}
