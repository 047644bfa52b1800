//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A 2x2 complex matrix in row-major order: `[[a, b], [c, d]]`.
pub type Gate2 = [[C64; 2]; 2];

/// Eigendecomposition of a Hermitian matrix. Only the lower triangle is read,
/// so tiny anti-Hermitian roundoff is ignored.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 2 {
        // closed form avoids the iterative solver on the hot single-qubit path
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(1, 0)];
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - half, mean + half];
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| C64::new(f(v), 0.0)));
    let scaled = &vecs * DMatrix::from_diagonal(&d);
    scaled * vecs.adjoint()
}

/// Principal square root of a positive semidefinite matrix; eigenvalues
/// slightly below zero from roundoff are clamped.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    hermitian_map(m, |v| v.max(0.0).sqrt())
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..n {
        for r in c..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Natural logarithms of k! for k = 0..=n.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// ln C(n, k) from a precomputed factorial table.
pub fn ln_binomial(table: &[f64], n: usize, k: usize) -> f64 {
    table[n] - table[k] - table[n - k]
}

/// Applies a 2x2 gate to qubit `q` of a state vector (bit `q` of the index
/// selects the qubit's basis state).
pub fn apply_gate(amps: &mut [C64], q: usize, g: &Gate2) {
    let mask = 1usize << q;
    let block = mask << 1;
    for base in (0..amps.len()).step_by(block) {
        for i in base..base + mask {
            let a0 = amps[i];
            let a1 = amps[i | mask];
            amps[i] = g[0][0] * a0 + g[0][1] * a1;
            amps[i | mask] = g[1][0] * a0 + g[1][1] * a1;
        }
    }
}

/// `rho -> G rho G^dagger` with `G` acting on qubit `q`; `G` need not be unitary.
pub fn conjugate_gate(rho: &mut CMatrix, q: usize, g: &Gate2) {
    let dim = rho.nrows();
    // left multiplication acts on each (contiguous) column
    for col in rho.as_mut_slice().chunks_mut(dim) {
        apply_gate(col, q, g);
    }
    // right multiplication by G^dagger acts on the column index with conj(G)
    let gc = [
        [g[0][0].conj(), g[0][1].conj()],
        [g[1][0].conj(), g[1][1].conj()],
    ];
    let mask = 1usize << q;
    let data = rho.as_mut_slice();
    for c0 in (0..dim).filter(|c| c & mask == 0) {
        let c1 = c0 | mask;
        for r in 0..dim {
            let a0 = data[c0 * dim + r];
            let a1 = data[c1 * dim + r];
            data[c0 * dim + r] = gc[0][0] * a0 + gc[0][1] * a1;
            data[c1 * dim + r] = gc[1][0] * a0 + gc[1][1] * a1;
        }
    }
}

/// `exp(-i angle/2 sigma_y)` in the (|+z>, |-z>) basis.
pub fn ry_gate(angle: f64) -> Gate2 {
    let c = C64::new((0.5 * angle).cos(), 0.0);
    let s = C64::new((0.5 * angle).sin(), 0.0);
    [[c, -s], [s, c]]
}

/// `exp(-i angle/2 sigma_x)`.
pub fn rx_gate(angle: f64) -> Gate2 {
    let c = C64::new((0.5 * angle).cos(), 0.0);
    let s = C64::new(0.0, -(0.5 * angle).sin());
    [[c, s], [s, c]]
}

pub fn gate_adjoint(g: &Gate2) -> Gate2 {
    [
        [g[0][0].conj(), g[1][0].conj()],
        [g[0][1].conj(), g[1][1].conj()],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0)],
        );
        let r = sqrt_psd(&m);
        assert!(max_abs_diff(&(&r * &r), &m) < 1e-12);
    }

    #[test]
    fn closed_form_eigvals_match_solver() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.6, 0.0), C64::new(0.2, -0.1), C64::new(0.2, 0.1), C64::new(0.4, 0.0)],
        );
        let mut solver: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
        solver.sort_by(f64::total_cmp);
        let closed = eigvalsh(&m);
        for (a, b) in solver.iter().zip(&closed) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn conjugate_gate_matches_dense_product() {
        // two qubits, gate on qubit 1 (the high bit): dense operator is G (x) I
        let g = rx_gate(0.7);
        let mut rho = CMatrix::from_fn(4, 4, |r, c| C64::new((r + 2 * c) as f64, (r as f64) - (c as f64)));
        let dense = CMatrix::from_fn(4, 4, |r, c| {
            if r & 1 == c & 1 {
                g[r >> 1][c >> 1]
            } else {
                ZERO
            }
        });
        let expected = &dense * &rho * dense.adjoint();
        conjugate_gate(&mut rho, 1, &g);
        assert!(max_abs_diff(&rho, &expected) < 1e-12);
    }

    #[test]
    fn ln_binomial_small() {
        let t = ln_factorials(10);
        assert!((ln_binomial(&t, 10, 3).exp() - 120.0).abs() < 1e-9);
    }
}
