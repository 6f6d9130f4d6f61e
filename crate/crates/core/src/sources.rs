//! Providers of Bell samples and of single noisy copies.

use rand::Rng as _;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::circuit::{Circuit, GateKind};
use crate::error::{invalid, Result};
use crate::noise::NoiseSpec;
use crate::rng;
use crate::samples::BellSampleSet;
use crate::stabilizer::{CliffordBellSampler, CopySource};
use crate::statevector::{bell_sample_trajectories, simulate_state, simulate_trajectory, StateVec};
use crate::symplectic::{Pauli, PauliVec};

/// Provider of Bell samples of two copies of one underlying state.
pub trait BellSource: Sync {
    fn num_qubits(&self) -> usize;
    fn bell_samples(&self, m: usize, seed: u64) -> Result<BellSampleSet>;
}

/// Provider of single copies measured after a Clifford and per-qubit
/// Pauli bases. Bit `q` of a record is 1 for eigenvalue −1.
pub trait BasisMeasurer: Sync {
    fn num_qubits(&self) -> usize;
    fn measure_in_bases(&self, u: &Circuit, bases: &[Pauli], shots: usize, seed: u64) -> Result<Vec<BitString>>;
}

impl BellSource for CliffordBellSampler {
    fn num_qubits(&self) -> usize {
        self.noiseless_support().0.num_qubits()
    }

    fn bell_samples(&self, m: usize, seed: u64) -> Result<BellSampleSet> {
        if m == 0 {
            return invalid("need at least one shot");
        }
        Ok(self.sample(m, seed))
    }
}

/// Circuit state simulated densely; noisy copies are drawn as independent
/// Pauli trajectories.
#[derive(Clone, Debug)]
pub struct DenseSource {
    circuit: Circuit,
    noise: NoiseSpec,
    ideal: StateVec,
}

impl DenseSource {
    pub fn new(circuit: &Circuit, noise: &NoiseSpec) -> Result<Self> {
        Ok(Self {
            ideal: simulate_state(circuit)?,
            circuit: circuit.clone(),
            noise: noise.clone(),
        })
    }

    pub fn ideal(&self) -> &StateVec {
        &self.ideal
    }

    fn noisy(&self) -> bool {
        self.noise.has_gate_noise(&self.circuit)
    }

    fn copy(&self, r: &mut rng::Rng) -> Result<StateVec> {
        if self.noisy() {
            simulate_trajectory(&self.circuit, &self.noise, r)
        } else {
            Ok(self.ideal.clone())
        }
    }
}

fn rotate_into_bases(s: &mut StateVec, u: &Circuit, bases: &[Pauli]) -> Result<()> {
    s.apply_circuit(u)?;
    for (q, b) in bases.iter().enumerate() {
        match b {
            Pauli::X => {
                s.apply(&crate::circuit::Gate::new(GateKind::H, vec![q]))?;
            }
            Pauli::Y => {
                s.apply(&crate::circuit::Gate::new(GateKind::Sdg, vec![q]))?;
                s.apply(&crate::circuit::Gate::new(GateKind::H, vec![q]))?;
            }
            _ => {}
        }
    }
    Ok(())
}

impl BellSource for DenseSource {
    fn num_qubits(&self) -> usize {
        self.ideal.num_qubits()
    }

    fn bell_samples(&self, m: usize, seed: u64) -> Result<BellSampleSet> {
        if m == 0 {
            return invalid("need at least one shot");
        }
        bell_sample_trajectories(&self.circuit, &self.noise, m, seed)
    }
}

impl BasisMeasurer for DenseSource {
    fn num_qubits(&self) -> usize {
        self.ideal.num_qubits()
    }

    fn measure_in_bases(&self, u: &Circuit, bases: &[Pauli], shots: usize, seed: u64) -> Result<Vec<BitString>> {
        if bases.len() != self.ideal.num_qubits() || u.num_qubits() != bases.len() {
            return invalid("basis list and Clifford must match the state width");
        }
        if !self.noisy() {
            let mut s = self.ideal.clone();
            rotate_into_bases(&mut s, u, bases)?;
            return Ok(s.sample_computational(shots, &mut rng::stream(seed, 0)));
        }
        (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, i as u64);
                let mut s = self.copy(&mut r)?;
                rotate_into_bases(&mut s, u, bases)?;
                Ok(s.sample_computational(1, &mut r).remove(0))
            })
            .collect()
    }
}

impl CopySource for DenseSource {
    fn num_qubits(&self) -> usize {
        self.ideal.num_qubits()
    }

    fn measure_paulis(&self, paulis: &[PauliVec], seed: u64) -> Result<Vec<bool>> {
        paulis
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let mut r = rng::stream(seed, i as u64);
                let e = self.copy(&mut r)?.pauli_expectation(p)?;
                Ok(r.random::<f64>() < (1.0 - e) / 2.0)
            })
            .collect()
    }

    fn sample_computational(&self, shots: usize, seed: u64) -> Result<Vec<BitString>> {
        let n = self.ideal.num_qubits();
        let id = Circuit::new(n);
        self.measure_in_bases(&id, &vec![Pauli::Z; n], shots, seed)
    }
}
