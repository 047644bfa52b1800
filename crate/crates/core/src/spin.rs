//! Spin states and collective angular-momentum operators.
//!
//! Two pictures of the same physics live here: the `(2j+1)`-dimensional Dicke
//! basis of a single large spin and the `2^n` computational basis of `n`
//! spin-1/2 qubits. Dicke index `k` counts spin flips away from `|+z...+z>`,
//! so it carries magnetic number `m = j - k`. In the register picture, bit `i`
//! of a basis index set means qubit `i` is in `|-z>`.
//!
//! Units: hbar = 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ZERO};

/// Largest register handled by the state-vector routines.
pub const MAX_REGISTER_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-10;

/// Total spin `j`, stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(two_j: u32) -> Result<Self> {
        if two_j == 0 {
            return Err(Error::InvalidSpin(two_j));
        }
        Ok(Self(two_j))
    }

    /// The maximal spin `j = n/2` of `n` qubits.
    pub fn from_qubits(n: usize) -> Result<Self> {
        let two_j = u32::try_from(n).map_err(|_| Error::InvalidSpin(u32::MAX))?;
        Self::from_twice(two_j)
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn j(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// Number of spin-1/2 constituents, `2j`.
    pub fn qubits(self) -> usize {
        self.0 as usize
    }

    /// Magnetic quantum number of Dicke index `k`.
    pub fn m(self, k: usize) -> f64 {
        self.j() - k as f64
    }
}

/// Orientation on the Bloch sphere.
///
/// `theta` is clamped to `[0, pi]` and `phi` wrapped to `[-pi, pi)`. The
/// coherent state built from a direction carries the phase `exp(-i phi)` on
/// its `|-z>` component, which places its Bloch vector at
/// `(sin theta cos phi, -sin theta sin phi, cos theta)`; see [`Self::axis`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalDirection {
    theta: f64,
    phi: f64,
}

impl SphericalDirection {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta: theta.clamp(0.0, PI),
            phi: wrap_angle(phi),
        }
    }

    /// For constants already inside the canonical ranges.
    pub(crate) const fn from_raw(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit Bloch vector of the coherent state pointing along this direction.
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, -st * sp, ct]
    }

    /// Inverse of [`Self::axis`]; the input need not be normalized.
    pub fn from_axis(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let z = if r > 0.0 { v[2] / r } else { 1.0 };
        Self::new(z.clamp(-1.0, 1.0).acos(), (-v[1]).atan2(v[0]))
    }

    /// Angle between the Bloch axes of two directions.
    pub fn angle_to(&self, other: &Self) -> f64 {
        let a = self.axis();
        let b = other.axis();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        dot.clamp(-1.0, 1.0).acos()
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let tau = 2.0 * PI;
    let w = (phi + PI).rem_euclid(tau) - PI;
    if w >= PI {
        w - tau
    } else {
        w
    }
}

/// Amplitudes of a spin-`j` state in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeVector {
    spin: Spin,
    amplitudes: CVector,
}

impl DickeVector {
    pub fn new(spin: Spin, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != spin.dim() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: spin.dim(),
            });
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { spin, amplitudes })
    }

    pub(crate) fn from_parts(spin: Spin, amplitudes: CVector) -> Self {
        debug_assert_eq!(amplitudes.len(), spin.dim());
        Self { spin, amplitudes }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    /// `<J_x>, <J_y>, <J_z>` computed from the ladder-operator matrix elements.
    pub fn spin_expectation(&self) -> [f64; 3] {
        let spin = self.spin;
        let j = spin.j();
        let a = &self.amplitudes;
        let mut jz = 0.0;
        let mut jplus = ZERO;
        for k in 0..spin.dim() {
            let m = spin.m(k);
            jz += m * a[k].norm_sqr();
            if k > 0 {
                // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and m+1 sits at k-1
                let c = (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
                jplus += a[k - 1].conj() * a[k] * c;
            }
        }
        [jplus.re, jplus.im, jz]
    }
}

/// Amplitudes of an `n`-qubit pure state in the computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisterVector {
    n: usize,
    amplitudes: Vec<C64>,
}

impl RegisterVector {
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_register_size(n)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: 1 << n,
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amplitudes })
    }

    pub(crate) fn from_parts(n: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n);
        Self { n, amplitudes }
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Swaps qubits `a` and `b` by permuting amplitudes.
    pub fn swap_qubits(&self, a: usize, b: usize) -> Result<Self> {
        for q in [a, b] {
            if q >= self.n {
                return Err(Error::QubitIndex { index: q, n: self.n });
            }
        }
        let amps = (0..self.amplitudes.len())
            .map(|i| {
                let ba = (i >> a) & 1;
                let bb = (i >> b) & 1;
                let src = if ba != bb { i ^ (1 << a) ^ (1 << b) } else { i };
                self.amplitudes[src]
            })
            .collect();
        Ok(Self::from_parts(self.n, amps))
    }
}

pub(crate) fn check_register_size(n: usize) -> Result<()> {
    if n == 0 || n > MAX_REGISTER_QUBITS {
        return Err(Error::QubitCount {
            n,
            max: MAX_REGISTER_QUBITS,
        });
    }
    Ok(())
}

/// Expectation values of the Pauli operators on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Which Hilbert space a density operator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    SingleQubit,
    Register(usize),
    Dicke(Spin),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::SingleQubit => 2,
            Basis::Register(n) => 1 << n,
            Basis::Dicke(s) => s.dim(),
        }
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    basis: Basis,
    elements: CMatrix,
}

impl DensityOperator {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const PSD_TOL: f64 = 1e-9;

    /// Validates every invariant before accepting the matrix.
    pub fn new(basis: Basis, elements: CMatrix) -> Result<Self> {
        let rho = Self::checked_shape(basis, elements)?;
        rho.validate()?;
        Ok(rho)
    }

    fn checked_shape(basis: Basis, elements: CMatrix) -> Result<Self> {
        let dim = basis.dim();
        if elements.nrows() != dim || elements.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: elements.nrows(),
                right: dim,
            });
        }
        Ok(Self { basis, elements })
    }

    pub(crate) fn from_parts(basis: Basis, elements: CMatrix) -> Self {
        debug_assert_eq!(elements.nrows(), basis.dim());
        Self { basis, elements }
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermiticity_error(&self.elements);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&self.elements).re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::Trace(tr));
        }
        let min = self.min_eigenvalue();
        if min < -Self::PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    /// `|psi><psi|` of a register state.
    pub fn from_register(state: &RegisterVector) -> Self {
        let v = CVector::from_column_slice(state.amplitudes());
        Self::from_parts(Basis::Register(state.qubits()), &v * v.adjoint())
    }

    pub fn from_dicke(state: &DickeVector) -> Self {
        let v = state.amplitudes();
        Self::from_parts(Basis::Dicke(state.spin()), v * v.adjoint())
    }

    /// `(I + x sigma_x + y sigma_y + z sigma_z) / 2`.
    pub fn from_bloch(b: BlochVector) -> Self {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * (1.0 + b.z), 0.0),
                C64::new(0.5 * b.x, -0.5 * b.y),
                C64::new(0.5 * b.x, 0.5 * b.y),
                C64::new(0.5 * (1.0 - b.z), 0.0),
            ],
        );
        Self::from_parts(Basis::SingleQubit, m)
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        let d = basis.dim();
        Self::from_parts(basis, CMatrix::identity(d, d) / C64::new(d as f64, 0.0))
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.elements
    }

    pub fn into_matrix(self) -> CMatrix {
        self.elements
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.elements)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Rescales to unit trace and symmetrizes away anti-Hermitian roundoff.
    pub(crate) fn renormalized(mut self) -> Self {
        let sym = (&self.elements + self.elements.adjoint()) * C64::new(0.5, 0.0);
        let tr = linalg::trace(&sym).re;
        self.elements = sym / C64::new(tr, 0.0);
        self
    }
}

/// `|theta, phi>` of a single spin `j`.
///
/// Amplitude at `m = j - k` is
/// `sqrt(C(2j, k)) cos(theta/2)^(2j-k) (exp(-i phi) sin(theta/2))^k`,
/// evaluated in log space so that large `j` does not overflow.
pub fn coherent_state_dicke(spin: Spin, dir: SphericalDirection) -> DickeVector {
    let two_j = spin.qubits();
    let table = linalg::ln_factorials(two_j);
    let c = (0.5 * dir.theta()).cos();
    let s = (0.5 * dir.theta()).sin();
    let amps = (0..=two_j).map(|k| {
        let log_mag = 0.5 * linalg::ln_binomial(&table, two_j, k)
            + ln_pow(c, two_j - k)
            + ln_pow(s, k);
        let mag = log_mag.exp();
        C64::from_polar(mag, -(k as f64) * dir.phi())
    });
    DickeVector::from_parts(spin, CVector::from_iterator(two_j + 1, amps))
}

fn ln_pow(base: f64, exponent: usize) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * base.abs().ln()
    }
}

/// Product state with every qubit in `(cos(theta/2), exp(-i phi) sin(theta/2))`.
pub fn coherent_state_register(n: usize, dir: SphericalDirection) -> Result<RegisterVector> {
    check_register_size(n)?;
    let up = (0.5 * dir.theta()).cos();
    let down = C64::from_polar((0.5 * dir.theta()).sin(), -dir.phi());
    let mut per_weight = Vec::with_capacity(n + 1);
    for w in 0..=n {
        per_weight.push(down.powu(w as u32) * up.powi((n - w) as i32));
    }
    let amps = (0..1usize << n)
        .map(|i| per_weight[i.count_ones() as usize])
        .collect();
    Ok(RegisterVector::from_parts(n, amps))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `J_x`, `J_y` or `J_z` in the Dicke basis.
pub fn collective_operator(spin: Spin, axis: Axis) -> CMatrix {
    let d = spin.dim();
    let j = spin.j();
    let mut out = CMatrix::zeros(d, d);
    match axis {
        Axis::Z => {
            for k in 0..d {
                out[(k, k)] = C64::new(spin.m(k), 0.0);
            }
        }
        Axis::X | Axis::Y => {
            for k in 1..d {
                let m = spin.m(k);
                let c = (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt();
                // <m+1| J+ |m> = c; J_x = (J+ + J-)/2, J_y = (J+ - J-)/(2i)
                let (upper, lower) = match axis {
                    Axis::X => (C64::new(0.5 * c, 0.0), C64::new(0.5 * c, 0.0)),
                    _ => (C64::new(0.0, -0.5 * c), C64::new(0.0, 0.5 * c)),
                };
                out[(k - 1, k)] = upper;
                out[(k, k - 1)] = lower;
            }
        }
    }
    out
}

fn binomial_sqrt_table(n: usize) -> Vec<f64> {
    let table = linalg::ln_factorials(n);
    (0..=n)
        .map(|k| (0.5 * linalg::ln_binomial(&table, n, k)).exp())
        .collect()
}

/// Embeds a Dicke state of `j = n/2` into the `n`-qubit register.
pub fn dicke_to_register(state: &DickeVector) -> Result<RegisterVector> {
    let n = state.spin().qubits();
    check_register_size(n)?;
    let norms = binomial_sqrt_table(n);
    let a = state.amplitudes();
    let amps = (0..1usize << n)
        .map(|i| {
            let k = i.count_ones() as usize;
            a[k] / norms[k]
        })
        .collect();
    Ok(RegisterVector::from_parts(n, amps))
}

/// Projects onto the `j = n/2` subspace and renormalizes.
///
/// Returns the projected state together with the squared norm that the
/// projection discarded.
pub fn register_to_dicke(state: &RegisterVector) -> Result<(DickeVector, f64)> {
    let n = state.qubits();
    let spin = Spin::from_qubits(n)?;
    let norms = binomial_sqrt_table(n);
    let mut c = vec![ZERO; n + 1];
    for (i, a) in state.amplitudes().iter().enumerate() {
        c[i.count_ones() as usize] += *a;
    }
    for (ck, nk) in c.iter_mut().zip(&norms) {
        *ck /= *nk;
    }
    let kept: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    if kept < 1e-12 {
        return Err(Error::OutsideSymmetricSubspace);
    }
    let total = state.norm_sqr();
    let scale = kept.sqrt();
    let amps = CVector::from_iterator(n + 1, c.into_iter().map(|x| x / scale));
    Ok((DickeVector::from_parts(spin, amps), (total - kept).max(0.0)))
}

/// `(Tr rho sigma_x, Tr rho sigma_y, Tr rho sigma_z)` of a single qubit.
pub fn bloch_from_density(rho: &DensityOperator) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: 2,
        });
    }
    let m = rho.matrix();
    let herm = linalg::hermiticity_error(m);
    if herm > DensityOperator::HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let off = m[(1, 0)];
    Ok(BlochVector {
        x: 2.0 * off.re,
        y: 2.0 * off.im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn dir(theta: f64, phi: f64) -> SphericalDirection {
        SphericalDirection::new(theta, phi)
    }

    #[test]
    fn direction_clamps_and_wraps() {
        let d = dir(4.0, PI);
        assert_eq!(d.theta(), PI);
        assert!((d.phi() + PI).abs() < 1e-15);
        let d = dir(-0.2, 3.0 * PI + 0.1);
        assert_eq!(d.theta(), 0.0);
        assert!((d.phi() - (-PI + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn direction_axis_roundtrip() {
        let d = dir(1.1, -2.3);
        let back = SphericalDirection::from_axis(d.axis());
        assert!((back.theta() - 1.1).abs() < 1e-12);
        assert!((back.phi() + 2.3).abs() < 1e-12);
    }

    #[test]
    fn spin_rejects_zero() {
        assert_eq!(Spin::from_twice(0), Err(Error::InvalidSpin(0)));
    }

    #[test]
    fn coherent_pole() {
        let s = coherent_state_dicke(Spin::from_twice(3).unwrap(), dir(0.0, 1.3));
        let a = s.amplitudes();
        assert!(close(a[0], C64::new(1.0, 0.0), EPS));
        for k in 1..4 {
            assert!(a[k].norm() < EPS);
        }
    }

    #[test]
    fn coherent_equator_spin_half() {
        let s = coherent_state_dicke(Spin::from_twice(1).unwrap(), dir(PI / 2.0, 0.0));
        let h = 1.0 / 2f64.sqrt();
        assert!(close(s.amplitudes()[0], C64::new(h, 0.0), EPS));
        assert!(close(s.amplitudes()[1], C64::new(h, 0.0), EPS));
    }

    #[test]
    fn coherent_three_halves_on_y_equator() {
        // binomial expansion: (1/sqrt 8)(1, -i sqrt3, -sqrt3, i)
        let s = coherent_state_dicke(Spin::from_twice(3).unwrap(), dir(PI / 2.0, PI / 2.0));
        let r8 = 1.0 / 8f64.sqrt();
        let r3 = 3f64.sqrt();
        let expected = [
            C64::new(r8, 0.0),
            C64::new(0.0, -r3 * r8),
            C64::new(-r3 * r8, 0.0),
            C64::new(0.0, r8),
        ];
        for (a, e) in s.amplitudes().iter().zip(expected) {
            assert!(close(*a, e, EPS), "{a} vs {e}");
        }
        // cross-check through the tensor-product route
        let reg = coherent_state_register(3, dir(PI / 2.0, PI / 2.0)).unwrap();
        let (back, residual) = register_to_dicke(&reg).unwrap();
        assert!(residual < EPS);
        for (a, e) in back.amplitudes().iter().zip(expected) {
            assert!(close(*a, e, EPS));
        }
    }

    #[test]
    fn coherent_large_spin_is_normalized() {
        let s = coherent_state_dicke(Spin::from_twice(1024).unwrap(), dir(1.3, 0.4));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn register_coherent_examples() {
        let s = coherent_state_register(3, dir(0.0, 0.0)).unwrap();
        assert!(close(s.amplitudes()[0], C64::new(1.0, 0.0), EPS));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() < EPS));

        let s = coherent_state_register(1, dir(PI, 0.0)).unwrap();
        assert!(s.amplitudes()[0].norm() < EPS);
        assert!(close(s.amplitudes()[1], C64::new(1.0, 0.0), EPS));

        let s = coherent_state_register(2, dir(PI / 2.0, 0.0)).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(*a, C64::new(0.5, 0.0), EPS)));
    }

    #[test]
    fn register_size_limits() {
        assert!(matches!(
            coherent_state_register(0, dir(0.0, 0.0)),
            Err(Error::QubitCount { .. })
        ));
        assert!(matches!(
            coherent_state_register(25, dir(0.0, 0.0)),
            Err(Error::QubitCount { .. })
        ));
    }

    #[test]
    fn collective_operator_examples() {
        let half = Spin::from_twice(1).unwrap();
        let jz = collective_operator(half, Axis::Z);
        assert!(close(jz[(0, 0)], C64::new(0.5, 0.0), EPS));
        assert!(close(jz[(1, 1)], C64::new(-0.5, 0.0), EPS));
        let jy = collective_operator(half, Axis::Y);
        assert!(close(jy[(0, 1)], C64::new(0.0, -0.5), EPS));
        assert!(close(jy[(1, 0)], C64::new(0.0, 0.5), EPS));
        assert!(jy[(0, 0)].norm() < EPS);
        let one = Spin::from_twice(2).unwrap();
        let jz = collective_operator(one, Axis::Z);
        for (k, m) in [1.0, 0.0, -1.0].iter().enumerate() {
            assert!(close(jz[(k, k)], C64::new(*m, 0.0), EPS));
        }
    }

    #[test]
    fn angular_momentum_algebra() {
        for two_j in 1..=40 {
            let s = Spin::from_twice(two_j).unwrap();
            let jx = collective_operator(s, Axis::X);
            let jy = collective_operator(s, Axis::Y);
            let jz = collective_operator(s, Axis::Z);
            let comm = &jx * &jy - &jy * &jx;
            let target = &jz * C64::new(0.0, 1.0);
            assert!(linalg::max_abs_diff(&comm, &target) < 1e-12, "2j = {two_j}");
        }
    }

    #[test]
    fn dicke_embedding_examples() {
        let half = Spin::from_twice(1).unwrap();
        let d = DickeVector::new(half, CVector::from_vec(vec![C64::new(1.0, 0.0), ZERO])).unwrap();
        let r = dicke_to_register(&d).unwrap();
        assert!(close(r.amplitudes()[0], C64::new(1.0, 0.0), EPS));
        assert!(r.amplitudes()[1].norm() < EPS);

        let one = Spin::from_twice(2).unwrap();
        let d = DickeVector::new(one, CVector::from_vec(vec![ZERO, C64::new(1.0, 0.0), ZERO])).unwrap();
        let r = dicke_to_register(&d).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let expected = [0.0, h, h, 0.0];
        for (a, e) in r.amplitudes().iter().zip(expected) {
            assert!(close(*a, C64::new(e, 0.0), EPS));
        }
    }

    #[test]
    fn singlet_is_rejected() {
        let h = 1.0 / 2f64.sqrt();
        let singlet =
            RegisterVector::new(2, vec![ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO]).unwrap();
        assert_eq!(register_to_dicke(&singlet).unwrap_err(), Error::OutsideSymmetricSubspace);
    }

    #[test]
    fn partially_symmetric_state_reports_residual() {
        // |01> has half its weight in the triplet
        let s = RegisterVector::new(2, vec![ZERO, C64::new(1.0, 0.0), ZERO, ZERO]).unwrap();
        let (d, residual) = register_to_dicke(&s).unwrap();
        assert!((residual - 0.5).abs() < EPS);
        assert!((d.norm_sqr() - 1.0).abs() < EPS);
    }

    #[test]
    fn bloch_examples() {
        let pure_up = DensityOperator::from_bloch(BlochVector { x: 0.0, y: 0.0, z: 1.0 });
        let b = bloch_from_density(&pure_up).unwrap();
        assert!((b.z - 1.0).abs() < EPS && b.x.abs() < EPS && b.y.abs() < EPS);

        let mixed = DensityOperator::maximally_mixed(Basis::SingleQubit);
        let b = bloch_from_density(&mixed).unwrap();
        assert!(b.length() < EPS);

        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.3, 0.0), C64::new(0.3, 0.0), C64::new(0.5, 0.0)],
        );
        let b = bloch_from_density(&DensityOperator::new(Basis::SingleQubit, m).unwrap()).unwrap();
        assert!((b.x - 0.6).abs() < EPS && b.y.abs() < EPS && b.z.abs() < EPS);
    }

    #[test]
    fn bloch_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.3, 0.0), C64::new(0.1, 0.0), C64::new(0.5, 0.0)],
        );
        let rho = DensityOperator::from_parts(Basis::SingleQubit, m);
        assert!(matches!(bloch_from_density(&rho), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn density_validation() {
        let bad_trace = CMatrix::identity(2, 2) * C64::new(0.6, 0.0);
        assert!(matches!(
            DensityOperator::new(Basis::SingleQubit, bad_trace),
            Err(Error::Trace(_))
        ));
        let negative = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.2, 0.0), ZERO, ZERO, C64::new(-0.2, 0.0)],
        );
        assert!(matches!(
            DensityOperator::new(Basis::SingleQubit, negative),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn coherent_bloch_axis_matches_direction() {
        let d = dir(0.9, 2.1);
        let s = coherent_state_dicke(Spin::from_twice(1).unwrap(), d);
        let rho = DensityOperator::from_parts(Basis::SingleQubit, s.amplitudes() * s.amplitudes().adjoint());
        let b = bloch_from_density(&rho).unwrap();
        let a = d.axis();
        assert!((b.x - a[0]).abs() < EPS && (b.y - a[1]).abs() < EPS && (b.z - a[2]).abs() < EPS);
    }

    #[test]
    fn spin_expectation_matches_operators() {
        let s = Spin::from_twice(7).unwrap();
        let st = coherent_state_dicke(s, dir(1.2, -0.7));
        let fast = st.spin_expectation();
        for (axis, f) in [Axis::X, Axis::Y, Axis::Z].into_iter().zip(fast) {
            let op = collective_operator(s, axis);
            let v = st.amplitudes();
            let e = (v.adjoint() * &op * v)[(0, 0)];
            assert!((e.re - f).abs() < EPS && e.im.abs() < EPS);
        }
    }

    proptest! {
        #[test]
        fn register_and_dicke_coherent_states_agree(
            n in 1usize..=12,
            theta in 0.0..PI,
            phi in -PI..PI,
        ) {
            let d = dir(theta, phi);
            let direct = coherent_state_register(n, d).unwrap();
            let embedded = dicke_to_register(&coherent_state_dicke(Spin::from_qubits(n).unwrap(), d)).unwrap();
            for (a, b) in direct.amplitudes().iter().zip(embedded.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
            prop_assert!((direct.norm_sqr() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn embedding_roundtrip(
            n in 1usize..=10,
            re in proptest::collection::vec(-1.0f64..1.0, 11),
            im in proptest::collection::vec(-1.0f64..1.0, 11),
        ) {
            let raw: Vec<C64> = (0..=n).map(|k| C64::new(re[k], im[k])).collect();
            let norm: f64 = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let spin = Spin::from_qubits(n).unwrap();
            let v = DickeVector::new(spin, CVector::from_iterator(n + 1, raw.iter().map(|a| a / norm))).unwrap();
            let (back, residual) = register_to_dicke(&dicke_to_register(&v).unwrap()).unwrap();
            prop_assert!(residual < 1e-12);
            for (a, b) in v.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
