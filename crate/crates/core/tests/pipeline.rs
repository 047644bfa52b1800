//! End-to-end checks through the public API, crossing module boundaries.

use kicktop_core::experiments::{self, Backend, GridSpec, ScanConfig, HIGH_ENTROPY_INSET};
use kicktop_core::floquet::{evolve, single_qubit_rdm_dicke, single_qubit_rdm_register};
use kicktop_core::metrics::{entanglement_entropy, purity};
use kicktop_core::open_system::{noisy_evolve, overlap_with_theory, NoiseParameters};
use kicktop_core::spin::{coherent_state_dicke, coherent_state_register};
use kicktop_core::{DensityOperator, FloquetParameters, SphericalDirection, Spin};

#[test]
fn entropy_agrees_across_backends_along_a_trajectory() {
    let p = FloquetParameters::new(2.5).unwrap();
    let dir = SphericalDirection::new(0.7, 2.1);
    let dicke = evolve(&coherent_state_dicke(Spin::from_qubits(5).unwrap(), dir), &p, 15).unwrap();
    let register = evolve(&coherent_state_register(5, dir).unwrap(), &p, 15).unwrap();
    for (d, r) in dicke.states().iter().zip(register.states()) {
        let sd = entanglement_entropy(&single_qubit_rdm_dicke(d)).unwrap();
        for q in 0..5 {
            let sr = entanglement_entropy(&single_qubit_rdm_register(r, q).unwrap()).unwrap();
            assert!((sd - sr).abs() < 1e-9);
        }
    }
}

#[test]
fn disabled_noise_reproduces_unitary_states() {
    let p = FloquetParameters::new(0.5).unwrap();
    let noisy = noisy_evolve(HIGH_ENTROPY_INSET, 3, &p, &NoiseParameters::disabled(20.0, 25.0).unwrap(), 6).unwrap();
    let ideal = evolve(&coherent_state_register(3, HIGH_ENTROPY_INSET).unwrap(), &p, 6).unwrap();
    for (rho, psi) in noisy.iter().zip(ideal.states()) {
        assert!((purity(rho) - 1.0).abs() < 1e-10);
        let f = overlap_with_theory(rho, &DensityOperator::from_register(psi)).unwrap();
        assert!(f > 1.0 - 1e-9);
    }
}

#[test]
fn register_and_dicke_maps_match() {
    let mut cfg = ScanConfig::new(FloquetParameters::new(2.5).unwrap(), 4, 5);
    cfg.grid = GridSpec::new(5, 7).unwrap();
    let dicke = experiments::entropy_map_scan(&cfg).unwrap().remove(0);
    cfg.backend = Backend::Register;
    let register = experiments::entropy_map_scan(&cfg).unwrap().remove(0);
    for (a, b) in dicke.values.iter().zip(&register.values) {
        assert!((a - b).abs() < 1e-8);
    }
    assert!(dicke.symmetry_error() < 1e-8);
}

#[test]
fn tomography_round_trip_on_an_evolved_state() {
    let p = FloquetParameters::new(2.5).unwrap();
    let demo = experiments::tomography_demo(HIGH_ENTROPY_INSET, &p, 2, 3, 20_000, 11).unwrap();
    assert_eq!(demo.records.len(), 16);
    assert!(demo.fidelity > 0.99, "fidelity {}", demo.fidelity);
}
