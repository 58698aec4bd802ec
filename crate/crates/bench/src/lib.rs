//! Fixtures shared by the benchmarks.

use spamtomo::{computational_povm, DensityMatrix, NoiseMatrix, Result, SimulatedDevice};

/// `|0…01⟩` under independent 10% bit flips on every qubit.
pub fn flip_device(n: usize) -> Result<SimulatedDevice> {
    let bits: String = (0..n).map(|q| if q + 1 == n { '1' } else { '0' }).collect();
    SimulatedDevice::new(
        DensityMatrix::basis_state(&bits)?,
        NoiseMatrix::tensor_flip(&vec![0.1; n])?,
        computational_povm(n)?,
    )
}
