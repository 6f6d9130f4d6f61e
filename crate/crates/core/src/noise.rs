//! Pauli channels, noise placement and randomized compiling.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{invalid, Result};
use crate::rng;
use crate::stabilizer::PauliTable;
use crate::symplectic::{Pauli, PauliVec};

const SUM_TOL: f64 = 1e-12;

/// `ρ ↦ Σᵢ pᵢ σᵢ ρ σᵢ` with `p = (p_I, p_X, p_Y, p_Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    pub p: [f64; 4],
}

const ORDER: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn index_of(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

/// Label of `σ_i σ_j` up to phase.
fn product_index(i: usize, j: usize) -> usize {
    let (zi, xi) = ORDER[i].bits();
    let (zj, xj) = ORDER[j].bits();
    index_of(Pauli::from_bits(zi ^ zj, xi ^ xj))
}

impl PauliChannel {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|x| !(0.0..=1.0).contains(x) || x.is_nan()) {
            return invalid(format!("channel probabilities {p:?} outside [0, 1]"));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return invalid(format!("channel probabilities sum to {s}"));
        }
        Ok(Self { p })
    }

    /// Channel with the given X, Y, Z probabilities; identity takes the rest.
    pub fn from_xyz(px: f64, py: f64, pz: f64) -> Result<Self> {
        Self::new([1.0 - px - py - pz, px, py, pz])
    }

    pub fn identity() -> Self {
        Self { p: [1.0, 0.0, 0.0, 0.0] }
    }

    pub fn is_identity(&self) -> bool {
        self.p[0] == 1.0
    }

    pub fn prob(&self, p: Pauli) -> f64 {
        self.p[index_of(p)]
    }

    /// Channel of applying `self` then `other`.
    pub fn compose(&self, other: &PauliChannel) -> PauliChannel {
        let mut q = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                q[product_index(i, j)] += self.p[i] * other.p[j];
            }
        }
        PauliChannel { p: q }
    }

    /// Pauli drawn from a uniform `u ∈ [0, 1)`.
    pub fn pick(&self, u: f64) -> Pauli {
        let mut acc = 0.0;
        for (k, &pk) in self.p.iter().enumerate().skip(1) {
            acc += pk;
            if u < acc {
                return ORDER[k];
            }
        }
        Pauli::I
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Pauli {
        if self.is_identity() {
            return Pauli::I;
        }
        self.pick(rng.random::<f64>())
    }

    /// Integer thresholds for sampling from a uniform `u64`: a draw below
    /// `t[0]` is `X`, below `t[1]` is `Y`, below `t[2]` is `Z`.
    pub(crate) fn thresholds(&self) -> [u64; 3] {
        let scale = |x: f64| -> u64 {
            if x >= 1.0 {
                u64::MAX
            } else {
                (x * 18_446_744_073_709_551_616.0) as u64
            }
        };
        let a = self.p[1];
        let b = a + self.p[2];
        let c = b + self.p[3];
        [scale(a), scale(b), scale(c)]
    }
}

/// `p₀ = 1 − 3ε/4`, `p₁ = p₂ = p₃ = ε/4`.
pub fn depolarizing(eps: f64) -> Result<PauliChannel> {
    if !(0.0..=4.0 / 3.0).contains(&eps) {
        return invalid(format!("depolarizing rate {eps} outside [0, 4/3]"));
    }
    Ok(PauliChannel {
        p: [1.0 - 0.75 * eps, eps / 4.0, eps / 4.0, eps / 4.0],
    })
}

/// Channel `q` with `q_k = Σ_{σᵢσⱼ ∝ σ_k} pᵢ pⱼ`: the average purity under
/// `p` equals the average fidelity under `q`.
pub fn purity_to_fidelity_channel(p: &PauliChannel) -> PauliChannel {
    p.compose(p)
}

/// Placement of single-qubit Pauli channels in a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Applied to every qubit of every multi-qubit gate, after the gate.
    pub channel: PauliChannel,
    /// Overrides `channel` for the named gate kinds.
    #[serde(default)]
    pub per_gate: BTreeMap<String, PauliChannel>,
    /// Applied to every qubit before readout.
    #[serde(default)]
    pub measurement: Option<PauliChannel>,
    /// Number of gate-noise locations `E`.
    pub error_locations: usize,
    /// Number of multi-qubit gates `m`.
    pub two_qubit_gates: usize,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            channel: PauliChannel::identity(),
            per_gate: BTreeMap::new(),
            measurement: None,
            error_locations: 0,
            two_qubit_gates: 0,
        }
    }

    /// Channel after `gate`, if any.
    pub fn channel_for(&self, gate: &Gate) -> Option<&PauliChannel> {
        if gate.qubits.len() < 2 {
            return None;
        }
        let ch = self.per_gate.get(gate.kind.name()).unwrap_or(&self.channel);
        (!ch.is_identity()).then_some(ch)
    }

    pub fn measurement_channel(&self) -> Option<&PauliChannel> {
        self.measurement.as_ref().filter(|c| !c.is_identity())
    }

    /// Whether any gate of `c` is followed by a non-identity channel.
    pub fn has_gate_noise(&self, c: &Circuit) -> bool {
        c.gates().iter().any(|g| self.channel_for(g).is_some())
    }

    pub fn is_noiseless(&self) -> bool {
        self.channel.is_identity()
            && self.per_gate.values().all(|c| c.is_identity())
            && self.measurement_channel().is_none()
    }
}

/// Default placement: one channel per qubit after every multi-qubit gate.
pub fn attach_noise(c: &Circuit, channel: PauliChannel, measurement: Option<PauliChannel>) -> NoiseSpec {
    let multi: Vec<&Gate> = c.gates().iter().filter(|g| g.qubits.len() >= 2).collect();
    NoiseSpec {
        channel,
        per_gate: BTreeMap::new(),
        measurement,
        error_locations: multi.iter().map(|g| g.qubits.len()).sum(),
        two_qubit_gates: multi.len(),
    }
}

/// Noise block of an experiment file; the identity probability is implied.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(default)]
    pub channel: Option<XyzProbs>,
    #[serde(default)]
    pub measurement: Option<XyzProbs>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct XyzProbs {
    #[serde(default)]
    pub px: f64,
    #[serde(default)]
    pub py: f64,
    #[serde(default)]
    pub pz: f64,
}

impl XyzProbs {
    pub fn channel(&self) -> Result<PauliChannel> {
        PauliChannel::from_xyz(self.px, self.py, self.pz)
    }
}

impl NoiseConfig {
    pub fn attach(&self, c: &Circuit) -> Result<NoiseSpec> {
        let ch = match &self.channel {
            Some(p) => p.channel()?,
            None => PauliChannel::identity(),
        };
        let meas = self.measurement.as_ref().map(|p| p.channel()).transpose()?;
        Ok(attach_noise(c, ch, meas))
    }
}

/// Result of [`randomized_compile`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    /// Multi-qubit gates left undressed because they are not Clifford.
    pub unwrapped: usize,
}

fn push_pauli_string(c: &mut Circuit, p: &PauliVec, qubits: &[usize]) {
    for (j, &q) in qubits.iter().enumerate() {
        let kind = match p.get(j) {
            Pauli::I => continue,
            Pauli::X => GateKind::X,
            Pauli::Y => GateKind::Y,
            Pauli::Z => GateKind::Z,
        };
        c.add(kind, &[q]);
    }
}

/// Dresses every multi-qubit Clifford gate `G` as `P′ G P` with `P` a
/// uniformly random Pauli on its qubits and `P′ = G P G†`.
pub fn randomized_compile(c: &Circuit, seed: u64) -> Result<CompiledCircuit> {
    let mut r = rng::rng_from_seed(seed);
    let mut out = Circuit::new(c.num_qubits());
    let mut unwrapped = 0;
    let mut layer_ends = c.layers().iter().peekable();
    for (i, g) in c.gates().iter().enumerate() {
        let k = g.qubits.len();
        if k >= 2 && g.kind.is_clifford() {
            let mut p = PauliVec::identity(k);
            for j in 0..k {
                let idx: usize = r.random_range(0..4);
                p.set(j, ORDER[idx]);
            }
            let local: Vec<usize> = (0..k).collect();
            let mut table = PauliTable::from_rows(k, vec![p.clone()], vec![false]);
            table.apply(&Gate::new(g.kind.clone(), local))?;
            push_pauli_string(&mut out, &p, &g.qubits);
            out.push(g.clone())?;
            push_pauli_string(&mut out, &table.rows()[0], &g.qubits);
        } else {
            if k >= 2 {
                unwrapped += 1;
            }
            out.push(g.clone())?;
        }
        while layer_ends.peek().is_some_and(|&&e| e == i + 1) {
            layer_ends.next();
            out.end_layer();
        }
    }
    Ok(CompiledCircuit { circuit: out, unwrapped })
}
