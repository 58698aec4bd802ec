//! Simultaneous tomography of an n-qubit state and its readout noise matrix.

pub mod error;
pub mod linalg;
pub mod pauli;
pub mod povm;
pub mod sim;
pub mod eliminators;
pub mod decoder;
pub mod gauge;
pub mod running_example;
pub mod sweep;

pub use error::{Error, Result};
pub use pauli::{
    commutes, enumerate_basis, pauli_dense, pauli_from_label, synthesize_clifford_map,
    BasisFamily, Circuit, Gate, PauliString,
};
pub use povm::{computational_povm, Povm, PovmKind};
pub use sim::{
    apply_noise, gauge_transform, ideal_distribution, sample_shots, DensityMatrix, NoiseMatrix,
    NoisyOracle, RngStream, ShotRecord, SimulatedDevice, StateCoefficients,
};
pub use decoder::{
    decode_exact, run_exact, run_randomized, ExactOptions, RandomizedConfig, TomographyResult,
};
pub use gauge::{apply_gauge_solution, GaugeMethod, GaugeSolution};
