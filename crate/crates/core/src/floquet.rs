//! One period of the kicked top: a rotation about `y` followed by the
//! `J_z^2` twist.
//!
//! Two backends advance states. The Dicke backend multiplies the
//! `(2j+1)`-dimensional state by a cached dense rotation matrix and a
//! diagonal of twist phases. The register backend sweeps one single-qubit
//! rotation over every qubit and then applies the twist as a phase that
//! depends only on the Hamming weight of each basis index, since
//! `m = n/2 - weight`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};
use crate::spin::{
    collective_operator, Axis, Basis, DensityOperator, DickeVector, RegisterVector, Spin,
};

/// Largest `2j` for which the dense rotation is built.
pub const MAX_KICK_TWICE_J: u32 = 1024;
/// Longest trajectory `evolve` accepts.
pub const MAX_STEPS: usize = 100_000;
/// Default memory budget for stored trajectories.
pub const DEFAULT_TRAJECTORY_BUDGET: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloquetParameters {
    /// Dimensionless kick strength. Negative values are accepted.
    pub kappa: f64,
    /// Rotation about `y` per period, radians.
    pub rotation_angle: f64,
}

impl FloquetParameters {
    pub fn new(kappa: f64) -> Result<Self> {
        Self::with_rotation(kappa, FRAC_PI_2)
    }

    pub fn with_rotation(kappa: f64, rotation_angle: f64) -> Result<Self> {
        if !kappa.is_finite() || !rotation_angle.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite Floquet parameters: kappa={kappa}, angle={rotation_angle}"
            )));
        }
        Ok(Self {
            kappa,
            rotation_angle,
        })
    }

    /// True when the kick strength is negative (the hardware sign convention);
    /// every shipped experiment uses positive values.
    pub fn is_signed_negative(&self) -> bool {
        self.kappa < 0.0
    }
}

/// `exp(-i kappa m^2 / 2j)` for each Dicke index.
pub fn twist_phases(spin: Spin, kappa: f64) -> Vec<C64> {
    let scale = kappa / (2.0 * spin.j());
    (0..spin.dim())
        .map(|k| {
            let m = spin.m(k);
            C64::from_polar(1.0, -scale * m * m)
        })
        .collect()
}

type KickKey = (u32, u64);

fn kick_cache() -> &'static RwLock<HashMap<KickKey, Arc<CMatrix>>> {
    static CACHE: OnceLock<RwLock<HashMap<KickKey, Arc<CMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `exp(-i angle J_y)` in the Dicke basis, built from the eigendecomposition
/// of `J_y` and cached per `(j, angle)`.
pub fn kick_rotation_dicke(spin: Spin, angle: f64) -> Result<Arc<CMatrix>> {
    if spin.twice() > MAX_KICK_TWICE_J {
        return Err(Error::InvalidArgument(format!(
            "2j = {} exceeds the dense rotation limit {MAX_KICK_TWICE_J}",
            spin.twice()
        )));
    }
    let key = (spin.twice(), angle.to_bits());
    if let Some(hit) = kick_cache().read().expect("kick cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let jy = collective_operator(spin, Axis::Y);
    let (vals, vecs) = linalg::eigh(&jy);
    let phases = CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&w| C64::from_polar(1.0, -angle * w)),
    );
    let built = Arc::new(&vecs * DMatrix::from_diagonal(&phases) * vecs.adjoint());
    let mut cache = kick_cache().write().expect("kick cache poisoned");
    Ok(Arc::clone(cache.entry(key).or_insert(built)))
}

/// One Floquet period in the Dicke basis: rotation, then twist.
pub fn step_dicke(state: &DickeVector, p: &FloquetParameters) -> Result<DickeVector> {
    let spin = state.spin();
    let rotation = kick_rotation_dicke(spin, p.rotation_angle)?;
    let mut out = rotation.as_ref() * state.amplitudes();
    for (a, t) in out.iter_mut().zip(twist_phases(spin, p.kappa)) {
        *a *= t;
    }
    Ok(DickeVector::from_parts(spin, out))
}

/// Twist phase for each Hamming weight `0..=n` of a register index.
fn register_twist_by_weight(n: usize, kappa: f64) -> Vec<C64> {
    // m = n/2 - w, so weight w plays the role of Dicke index k
    match Spin::from_qubits(n) {
        Ok(spin) => twist_phases(spin, kappa),
        Err(_) => vec![C64::new(1.0, 0.0); n + 1],
    }
}

/// One Floquet period on the full register.
pub fn step_register(state: &RegisterVector, p: &FloquetParameters) -> RegisterVector {
    let mut next = state.clone();
    step_register_in_place(&mut next, p);
    next
}

pub(crate) fn step_register_in_place(state: &mut RegisterVector, p: &FloquetParameters) {
    let n = state.qubits();
    let gate = linalg::ry_gate(p.rotation_angle);
    let twist = register_twist_by_weight(n, p.kappa);
    let amps = state.amplitudes_mut();
    for q in 0..n {
        linalg::apply_gate(amps, q, &gate);
    }
    for (i, a) in amps.iter_mut().enumerate() {
        *a *= twist[i.count_ones() as usize];
    }
}

/// One Floquet period as a similarity transform of a register density matrix.
pub fn step_register_density(rho: &DensityOperator, p: &FloquetParameters) -> Result<DensityOperator> {
    let n = match rho.basis() {
        Basis::Register(n) => n,
        other => return Err(Error::Basis(format!("expected register basis, got {other:?}"))),
    };
    let gate = linalg::ry_gate(p.rotation_angle);
    let twist = register_twist_by_weight(n, p.kappa);
    let mut m = rho.matrix().clone();
    for q in 0..n {
        linalg::conjugate_gate(&mut m, q, &gate);
    }
    let dim = m.nrows();
    for c in 0..dim {
        let tc = twist[c.count_ones() as usize].conj();
        for r in 0..dim {
            m[(r, c)] *= twist[r.count_ones() as usize] * tc;
        }
    }
    Ok(DensityOperator::from_parts(rho.basis(), m))
}

/// A pure state that the Floquet map can advance.
pub trait FloquetState: Clone + Send + Sync {
    fn floquet_step(&self, p: &FloquetParameters) -> Result<Self>;
    fn norm_sqr(&self) -> f64;
    /// Single-qubit reduced density matrix of qubit `qubit`.
    fn qubit_rdm(&self, qubit: usize) -> Result<DensityOperator>;
    fn qubits(&self) -> usize;
    fn projector(&self) -> DensityOperator;
    /// Bytes occupied by the amplitudes.
    fn size_bytes(&self) -> usize;
}

impl FloquetState for DickeVector {
    fn floquet_step(&self, p: &FloquetParameters) -> Result<Self> {
        step_dicke(self, p)
    }

    fn norm_sqr(&self) -> f64 {
        DickeVector::norm_sqr(self)
    }

    fn qubit_rdm(&self, qubit: usize) -> Result<DensityOperator> {
        let n = self.spin().qubits();
        if qubit >= n {
            return Err(Error::QubitIndex { index: qubit, n });
        }
        Ok(single_qubit_rdm_dicke(self))
    }

    fn qubits(&self) -> usize {
        self.spin().qubits()
    }

    fn projector(&self) -> DensityOperator {
        DensityOperator::from_dicke(self)
    }

    fn size_bytes(&self) -> usize {
        self.spin().dim() * std::mem::size_of::<C64>()
    }
}

impl FloquetState for RegisterVector {
    fn floquet_step(&self, p: &FloquetParameters) -> Result<Self> {
        Ok(step_register(self, p))
    }

    fn norm_sqr(&self) -> f64 {
        RegisterVector::norm_sqr(self)
    }

    fn qubit_rdm(&self, qubit: usize) -> Result<DensityOperator> {
        single_qubit_rdm_register(self, qubit)
    }

    fn qubits(&self) -> usize {
        RegisterVector::qubits(self)
    }

    fn projector(&self) -> DensityOperator {
        DensityOperator::from_register(self)
    }

    fn size_bytes(&self) -> usize {
        std::mem::size_of_val(self.amplitudes())
    }
}

/// States after `0, 1, ..., N` Floquet periods.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub parameters: FloquetParameters,
    states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Number of Floquet periods applied to reach the last state.
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    pub fn get(&self, step: usize) -> Option<&S> {
        self.states.get(step)
    }
}

pub fn evolve<S: FloquetState>(initial: &S, p: &FloquetParameters, steps: usize) -> Result<Trajectory<S>> {
    evolve_with_budget(initial, p, steps, DEFAULT_TRAJECTORY_BUDGET)
}

/// Like [`evolve`] with an explicit cap on the bytes a trajectory may hold;
/// use [`for_each_step`] to stream longer runs.
pub fn evolve_with_budget<S: FloquetState>(
    initial: &S,
    p: &FloquetParameters,
    steps: usize,
    budget_bytes: usize,
) -> Result<Trajectory<S>> {
    check_steps(steps)?;
    let needed = initial.size_bytes().saturating_mul(steps + 1);
    if needed > budget_bytes {
        return Err(Error::InvalidArgument(format!(
            "trajectory needs {needed} bytes, budget is {budget_bytes}; stream with for_each_step"
        )));
    }
    let mut states = Vec::with_capacity(steps + 1);
    for_each_step(initial, p, steps, |_, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        parameters: *p,
        states,
    })
}

/// Streams the states after `0..=steps` periods to `visit` without storing them.
pub fn for_each_step<S, F>(initial: &S, p: &FloquetParameters, steps: usize, mut visit: F) -> Result<()>
where
    S: FloquetState,
    F: FnMut(usize, &S) -> Result<()>,
{
    check_steps(steps)?;
    let mut current = initial.clone();
    visit(0, &current)?;
    for step in 1..=steps {
        current = current.floquet_step(p)?;
        visit(step, &current)?;
    }
    Ok(())
}

fn check_steps(steps: usize) -> Result<()> {
    if steps > MAX_STEPS {
        return Err(Error::InvalidArgument(format!(
            "{steps} steps exceeds the limit {MAX_STEPS}"
        )));
    }
    Ok(())
}

/// Partial trace of a register state down to one qubit.
pub fn single_qubit_rdm_register(state: &RegisterVector, qubit: usize) -> Result<DensityOperator> {
    let n = state.qubits();
    if qubit >= n {
        return Err(Error::QubitIndex { index: qubit, n });
    }
    let mask = 1usize << qubit;
    let amps = state.amplitudes();
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    let mut coh = ZERO;
    for i in (0..amps.len()).filter(|i| i & mask == 0) {
        let a0 = amps[i];
        let a1 = amps[i | mask];
        p0 += a0.norm_sqr();
        p1 += a1.norm_sqr();
        coh += a1 * a0.conj();
    }
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(p0, 0.0), coh.conj(), coh, C64::new(p1, 0.0)],
    );
    Ok(DensityOperator::from_parts(Basis::SingleQubit, m))
}

/// Single-qubit state of a permutation-symmetric spin via `<sigma> = <J>/j`.
pub fn single_qubit_rdm_dicke(state: &DickeVector) -> DensityOperator {
    DensityOperator::from_bloch(dicke_bloch_vector(state))
}

pub(crate) fn dicke_bloch_vector(state: &DickeVector) -> crate::spin::BlochVector {
    let j = state.spin().j();
    let [x, y, z] = state.spin_expectation();
    crate::spin::BlochVector {
        x: x / j,
        y: y / j,
        z: z / j,
    }
}

/// Single-qubit reduced density matrix of a register density operator.
pub fn single_qubit_rdm_density(rho: &DensityOperator, qubit: usize) -> Result<DensityOperator> {
    let n = match rho.basis() {
        Basis::Register(n) => n,
        other => return Err(Error::Basis(format!("expected register basis, got {other:?}"))),
    };
    if qubit >= n {
        return Err(Error::QubitIndex { index: qubit, n });
    }
    let mask = 1usize << qubit;
    let m = rho.matrix();
    let mut out = CMatrix::zeros(2, 2);
    for rest in (0..m.nrows()).filter(|i| i & mask == 0) {
        for a in 0..2 {
            for b in 0..2 {
                let r = rest | (a * mask);
                let c = rest | (b * mask);
                out[(a, b)] += m[(r, c)];
            }
        }
    }
    Ok(DensityOperator::from_parts(Basis::SingleQubit, out))
}
