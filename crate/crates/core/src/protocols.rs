//! Composite protocols: depth tests, magic estimation, Clifford+T learning,
//! the BQP gadget estimate and white-noise error-detection helpers.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::circuit::{self, bqp_gadget, Architecture, Circuit, CircuitRecord, GateKind};
use crate::error::{invalid, Error, Result};
use crate::estimators::{pauli_sq_expectation, subsystem_purity, EstimateWithError};
use crate::noise::NoiseSpec;
use crate::rng;
use crate::samples::BellSampleSet;
use crate::sources::{BasisMeasurer, BellSource, DenseSource};
use crate::stabilizer::{exact_subsystem_renyi2, PauliTable};
use crate::statevector::{bell_sample_dense, StateVec};
use crate::symplectic::{F2Subspace, Pauli, PauliVec};

// ---------------------------------------------------------------------------
// Depth tests
// ---------------------------------------------------------------------------

/// `E_A(d) = min{|∂A|·d, |A|, n − |A|, ⌊n/2⌋}`.
pub fn max_entanglement_bound(arch: &Architecture, n: usize, a: &[usize], d: usize) -> Result<usize> {
    let boundary = arch.boundary_edges(n, a)?;
    Ok((boundary * d).min(a.len()).min(n - a.len()).min(n / 2))
}

/// Half-chain subsystem `{1, …, ⌊n/2⌋}`; on a brickwork both of its
/// boundary bonds belong to the first layer.
pub fn default_subsystem(n: usize) -> Vec<usize> {
    (1..=n / 2).filter(|&q| q < n).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthBoundResult {
    pub d_lower: usize,
    /// `−log₂(P̂ + ε)` in bits; infinite when `P̂ + ε ≤ 0`.
    pub entropy_estimate: f64,
    pub subsystem: Vec<usize>,
    pub epsilon: f64,
    pub purity: EstimateWithError,
    /// Set when no depth reaches the entropy estimate; `d_lower` is then
    /// the saturation depth.
    pub saturated: bool,
}

fn entropy_lower(p: f64, eps: f64) -> f64 {
    if p + eps >= 1.0 {
        0.0
    } else if p + eps <= 0.0 {
        f64::INFINITY
    } else {
        -(p + eps).log2()
    }
}

/// Smallest depth whose entanglement bound reaches `s`; otherwise the
/// depth at which `bound` saturates, flagged.
fn smallest_depth(s: f64, mut bound: impl FnMut(usize) -> Result<f64>, max_depth: usize) -> Result<(usize, bool)> {
    let mut best = 0.0;
    let mut best_d = 0;
    for d in 0..=max_depth {
        let e = bound(d)?;
        if e + 1e-12 >= s {
            return Ok((d, false));
        }
        if e > best {
            best = e;
            best_d = d;
        }
    }
    Ok((best_d, true))
}

/// Depth lower bound from the maximal entanglement on subsystem `a`. A
/// `None` tolerance means three standard errors of the purity estimate.
pub fn depth_test_max_on(
    samples: &BellSampleSet,
    arch: &Architecture,
    a: &[usize],
    epsilon: Option<f64>,
) -> Result<DepthBoundResult> {
    let n = samples.num_qubits();
    if a.is_empty() || a.len() >= n {
        return invalid("depth test needs a proper nonempty subsystem");
    }
    let purity = subsystem_purity(samples, a)?;
    let eps = epsilon.unwrap_or(3.0 * purity.std_error);
    if eps < 0.0 {
        return invalid("tolerance must be nonnegative");
    }
    let s = entropy_lower(purity.value, eps);
    let (d_lower, saturated) = smallest_depth(s, |d| Ok(max_entanglement_bound(arch, n, a, d)? as f64), n)?;
    Ok(DepthBoundResult {
        d_lower,
        entropy_estimate: s,
        subsystem: a.to_vec(),
        epsilon: eps,
        purity,
        saturated,
    })
}

/// [`depth_test_max_on`] with the default half-chain subsystem.
pub fn depth_test_max(samples: &BellSampleSet, arch: &Architecture, epsilon: Option<f64>) -> Result<DepthBoundResult> {
    depth_test_max_on(samples, arch, &default_subsystem(samples.num_qubits()), epsilon)
}

/// Average-entanglement table `d ↦ T_A(d) = −log₂ E_C[2^{−S_A}]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PageTable {
    pub arch: Architecture,
    pub n: usize,
    pub subsystem: Vec<usize>,
    pub values: BTreeMap<usize, f64>,
}

impl PageTable {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(circuit::json_error)
    }
}

/// Random circuit of the architecture's standard ensemble at depth `d`.
pub fn architecture_circuit(arch: &Architecture, n: usize, d: usize, seed: u64) -> Result<Circuit> {
    match *arch {
        Architecture::Chain1D { closed } => circuit::brickwork_clifford(n, d, closed, seed),
        Architecture::AllToAll => {
            if d == 0 {
                Ok(Circuit::new(n))
            } else {
                circuit::random_all_to_all_clifford(n, d, seed)
            }
        }
        Architecture::Grid2D { .. } => invalid("no random ensemble is defined for grid architectures"),
    }
}

/// Exact stabilizer average over `circuits` random circuits per depth.
pub fn page_table(arch: &Architecture, n: usize, depths: &[usize], circuits: usize, seed: u64) -> Result<PageTable> {
    if circuits == 0 || depths.is_empty() {
        return invalid("page table needs depths and at least one circuit");
    }
    let a = default_subsystem(n);
    let mut values = BTreeMap::new();
    for &d in depths {
        let pur: Vec<Result<f64>> = (0..circuits)
            .into_par_iter()
            .map(|i| {
                let c = architecture_circuit(arch, n, d, rng::derive_seed(seed, ((d as u64) << 32) | i as u64))?;
                Ok(0.5f64.powi(exact_subsystem_renyi2(&c, &a)? as i32))
            })
            .collect();
        let mut acc = 0.0;
        for p in pur {
            acc += p?;
        }
        values.insert(d, -(acc / circuits as f64).log2());
    }
    Ok(PageTable {
        arch: *arch,
        n,
        subsystem: a,
        values,
    })
}

/// Depth lower bound from average entanglement: averages the purity
/// estimates over circuits, then thresholds against the table.
pub fn depth_test_avg(per_circuit: &[BellSampleSet], table: &PageTable, epsilon: Option<f64>) -> Result<DepthBoundResult> {
    if table.values.is_empty() {
        return invalid("empty page table");
    }
    if per_circuit.is_empty() {
        return invalid("need samples from at least one circuit");
    }
    let mut values = Vec::with_capacity(per_circuit.len());
    let mut shot_var = 0.0;
    let mut m = 0;
    for s in per_circuit {
        if s.num_qubits() != table.n {
            return invalid("sample width differs from table width");
        }
        let e = subsystem_purity(s, &table.subsystem)?;
        values.push(e.value);
        shot_var += e.std_error * e.std_error;
        m += e.m_used;
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    // The spread across circuits already contains the shot noise; the
    // shot-noise term covers the single-circuit case.
    let spread = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    let std_error = (spread / k).max(shot_var / (k * k)).sqrt();
    let purity = EstimateWithError::new(mean, std_error, m);
    let eps = epsilon.unwrap_or(3.0 * purity.std_error);
    let s = entropy_lower(purity.value, eps);
    let mut d_lower = None;
    if s <= 0.0 {
        d_lower = Some(0);
    }
    if d_lower.is_none() {
        d_lower = table.values.iter().find(|(_, t)| **t + 1e-12 >= s).map(|(d, _)| *d);
    }
    let saturated = d_lower.is_none();
    let d_lower = d_lower.unwrap_or_else(|| *table.values.keys().next_back().expect("nonempty"));
    Ok(DepthBoundResult {
        d_lower,
        entropy_estimate: s,
        subsystem: table.subsystem.clone(),
        epsilon: eps,
        purity,
        saturated,
    })
}

// ---------------------------------------------------------------------------
// Magic estimation
// ---------------------------------------------------------------------------

/// Which Bell differences span `G′`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DifferenceMode {
    /// `b^{2i} ⊕ b^{2i+1}`: independent differences.
    Disjoint,
    /// All pairs; spans the same space as `b^0 ⊕ b^j`.
    #[default]
    AllPairs,
}

/// Span of Bell-sample differences.
pub fn difference_span(samples: &BellSampleSet, mode: DifferenceMode) -> Result<F2Subspace> {
    let n = samples.num_qubits();
    let mut g = F2Subspace::zero(n);
    match mode {
        DifferenceMode::AllPairs => {
            if samples.is_empty() {
                return Ok(g);
            }
            let b0 = samples.get(0);
            for s in samples.iter().skip(1) {
                g.insert(&s.xor(&b0));
            }
        }
        DifferenceMode::Disjoint => {
            for i in 0..samples.len() / 2 {
                g.insert(&samples.get(2 * i).xor(&samples.get(2 * i + 1)));
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MagicEstimate {
    /// `dim G′ − n`, or 0 when undersampled.
    pub t_hat: usize,
    pub g_prime: F2Subspace,
    /// `n − dim rad G′`.
    pub nullity: usize,
    pub undersampled: bool,
}

/// T-count lower bound from the span of Bell differences.
pub fn magic_estimate_with(samples: &BellSampleSet, mode: DifferenceMode) -> Result<MagicEstimate> {
    if samples.len() < 2 {
        return invalid("magic estimation needs at least two samples");
    }
    let n = samples.num_qubits();
    let g = difference_span(samples, mode)?;
    let undersampled = g.dim() < n;
    let rad = g.radical().dim();
    Ok(MagicEstimate {
        t_hat: g.dim().saturating_sub(n),
        nullity: n.saturating_sub(rad),
        g_prime: g,
        undersampled,
    })
}

pub fn magic_estimate(samples: &BellSampleSet) -> Result<MagicEstimate> {
    magic_estimate_with(samples, DifferenceMode::AllPairs)
}

// ---------------------------------------------------------------------------
// Clifford synthesis
// ---------------------------------------------------------------------------

/// Clifford `U` with `U σ_i U† = (−1)^{signs[i]} Z_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthesizedClifford {
    pub circuit: Circuit,
    pub signs: Vec<bool>,
}

/// Maps independent commuting generators to `±Z_0, …, ±Z_{k−1}`. The
/// result is verified by conjugation before it is returned.
pub fn clifford_from_isotropic(n: usize, generators: &[PauliVec]) -> Result<SynthesizedClifford> {
    if generators.iter().any(|g| g.num_qubits() != n) {
        return invalid("generator width differs from n");
    }
    for (i, a) in generators.iter().enumerate() {
        for b in &generators[i + 1..] {
            if !a.commutes_with(b) {
                return invalid("generators do not commute");
            }
        }
    }
    let k = generators.len();
    let mut t = PauliTable::from_rows(n, generators.to_vec(), vec![false; k]);
    let mut c = Circuit::new(n);
    let emit = |t: &mut PauliTable, c: &mut Circuit, kind: GateKind, q: &[usize]| -> Result<()> {
        let g = crate::circuit::Gate::new(kind, q.to_vec());
        t.apply(&g)?;
        c.push(g)
    };
    for i in 0..k {
        let row = t.rows()[i].clone();
        if row == PauliVec::single(n, i, Pauli::Z) {
            continue;
        }
        if (i..n).all(|q| !row.x(q) && !row.z(q)) {
            return invalid("generators are linearly dependent");
        }
        if (i..n).all(|q| !row.x(q)) {
            let q = (i..n).find(|&q| row.z(q)).expect("nonidentity on tail");
            emit(&mut t, &mut c, GateKind::H, &[q])?;
        }
        let row = t.rows()[i].clone();
        let p = (i..n).find(|&q| row.x(q)).expect("has X on tail");
        for q in (i..n).filter(|&q| q != p && row.x(q)) {
            emit(&mut t, &mut c, GateKind::Cnot, &[p, q])?;
        }
        if t.rows()[i].z(p) {
            emit(&mut t, &mut c, GateKind::S, &[p])?;
        }
        let row = t.rows()[i].clone();
        for q in (0..n).filter(|&q| q != p && row.z(q)) {
            emit(&mut t, &mut c, GateKind::Cz, &[p, q])?;
        }
        emit(&mut t, &mut c, GateKind::H, &[p])?;
        if p != i {
            emit(&mut t, &mut c, GateKind::Cnot, &[p, i])?;
            emit(&mut t, &mut c, GateKind::Cnot, &[i, p])?;
            emit(&mut t, &mut c, GateKind::Cnot, &[p, i])?;
        }
    }
    // Self-check by conjugating the original generators.
    let mut check = PauliTable::from_rows(n, generators.to_vec(), vec![false; k]);
    check.apply_circuit(&c)?;
    for (i, row) in check.rows().iter().enumerate() {
        if *row != PauliVec::single(n, i, Pauli::Z) {
            return Err(Error::InvalidArgument(format!("synthesis failed on generator {i}")));
        }
    }
    Ok(SynthesizedClifford {
        circuit: c,
        signs: check.signs().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Clifford+T learning
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Largest tomographed register.
    pub t_cap: usize,
    pub mode: DifferenceMode,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            delta: 0.05,
            t_cap: 6,
            mode: DifferenceMode::Disjoint,
            seed: 0,
        }
    }
}

/// Learned description `U†(|x⟩ ⊗ |φ⟩)`: `x` on wires `0..r`, `φ` on the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedState {
    pub clifford: Circuit,
    pub x: BitString,
    pub phi: StateVec,
    pub t_hat: usize,
    pub bell_samples: usize,
    pub copies: usize,
    pub x_frequency: f64,
}

#[derive(Serialize, Deserialize)]
struct LearnedRecord {
    clifford: CircuitRecord,
    x: String,
    phi: Vec<[f64; 2]>,
}

impl LearnedState {
    pub fn to_json(&self) -> String {
        let rec = LearnedRecord {
            clifford: CircuitRecord::from(&self.clifford),
            x: self.x.to_string(),
            phi: self.phi.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        };
        serde_json::to_string_pretty(&rec).expect("serializable")
    }

    /// Reads the serialized fields; counters are not stored and read as 0.
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: LearnedRecord = serde_json::from_str(s).map_err(circuit::json_error)?;
        let clifford = Circuit::try_from(rec.clifford)?;
        let x = if rec.x.is_empty() { BitString::zeros(0) } else { BitString::parse(&rec.x)? };
        let phi = StateVec::from_amplitudes(rec.phi.iter().map(|a| C64::new(a[0], a[1])).collect())?;
        if x.len() + phi.num_qubits() != clifford.num_qubits() {
            return invalid("learned state parts do not add up to the Clifford width");
        }
        Ok(Self {
            t_hat: phi.num_qubits(),
            clifford,
            x,
            phi,
            bell_samples: 0,
            copies: 0,
            x_frequency: 0.0,
        })
    }
}

/// Number of Bell differences, `⌈2n ln(1/δ)/ε⌉`.
pub fn learning_bell_budget(n: usize, epsilon: f64, delta: f64) -> usize {
    (2.0 * n as f64 * (1.0 / delta).ln() / epsilon).ceil() as usize
}

/// Number of single copies, `⌈4·2^k ln(1/δ)/ε²⌉`.
pub fn learning_copy_budget(k: usize, epsilon: f64, delta: f64) -> usize {
    (4.0 * 2f64.powi(k as i32) * (1.0 / delta).ln() / (epsilon * epsilon)).ceil() as usize
}

/// Matrix of a Pauli label on `k` qubits (qubit `j` is bit `j`).
fn pauli_matrix(p: &PauliVec) -> DMatrix<C64> {
    let k = p.num_qubits();
    let d = 1usize << k;
    let (mut xm, mut zm) = (0usize, 0usize);
    for q in 0..k {
        xm |= (p.x(q) as usize) << q;
        zm |= (p.z(q) as usize) << q;
    }
    let ys = (xm & zm).count_ones();
    let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(ys % 4) as usize];
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let s = if (i & zm).count_ones() % 2 == 1 { -phase } else { phase };
        m[(i ^ xm, i)] = s;
    }
    m
}

/// Pure-state tomography from Pauli-basis records: linear inversion, then
/// the dominant eigenvector. `records[s]` holds outcomes for `settings[s]`.
pub fn pure_state_tomography(k: usize, settings: &[Vec<Pauli>], records: &[Vec<BitString>]) -> Result<StateVec> {
    let d = 1usize << k;
    if k == 0 {
        return StateVec::zero(0);
    }
    let mut rho = DMatrix::<C64>::zeros(d, d);
    for idx in 0..(1u64 << (2 * k)) {
        let q = PauliVec::from_index(k, idx);
        let (mut plus, mut total) = (0i64, 0i64);
        for (set, recs) in settings.iter().zip(records) {
            let compatible = (0..k).all(|j| q.get(j) == Pauli::I || q.get(j) == set[j]);
            if !compatible {
                continue;
            }
            for r in recs {
                let odd = (0..k).filter(|&j| q.get(j) != Pauli::I && r.get(j)).count() % 2 == 1;
                plus += if odd { -1 } else { 1 };
                total += 1;
            }
        }
        if total == 0 {
            continue;
        }
        let e = plus as f64 / total as f64;
        rho += pauli_matrix(&q) * C64::new(e / d as f64, 0.0);
    }
    let eig = rho.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let v = eig.eigenvectors.column(top);
    let norm = v.norm();
    StateVec::from_amplitudes(v.iter().map(|a| a / norm).collect())
}

/// Learns a Clifford+T state from Bell samples and single-copy measurements.
pub fn learn_clifford_t(bell: &dyn BellSource, copies: &dyn BasisMeasurer, cfg: &LearnConfig) -> Result<LearnedState> {
    let n = bell.num_qubits();
    if copies.num_qubits() != n {
        return invalid("sources disagree on n");
    }
    if !(cfg.epsilon > 0.0 && cfg.delta > 0.0 && cfg.delta < 1.0) {
        return invalid("need ε > 0 and 0 < δ < 1");
    }
    let diffs = learning_bell_budget(n, cfg.epsilon, cfg.delta);
    let m = match cfg.mode {
        DifferenceMode::Disjoint => 2 * diffs,
        DifferenceMode::AllPairs => diffs + 1,
    };
    let samples = bell.bell_samples(m, rng::derive_seed(cfg.seed, 1))?;
    let g = difference_span(&samples, cfg.mode)?;
    let t_hat = g.dim().saturating_sub(n);
    let rad = g.radical();
    let r = rad.dim().min(n);
    let k = n - r;
    if k > cfg.t_cap {
        return Err(Error::Resource(format!("{k} tomography qubits exceed the cap {}", cfg.t_cap)));
    }
    let synth = clifford_from_isotropic(n, &rad.basis()[..r])?;
    let budget = learning_copy_budget(k, cfg.epsilon, cfg.delta);
    let nsettings = 3usize.pow(k as u32);
    let per = budget.div_ceil(nsettings);
    let settings: Vec<Vec<Pauli>> = (0..nsettings)
        .map(|s| {
            (0..k)
                .map(|j| [Pauli::X, Pauli::Y, Pauli::Z][(s / 3usize.pow(j as u32)) % 3])
                .collect()
        })
        .collect();
    let mut all: Vec<Vec<BitString>> = Vec::with_capacity(nsettings);
    for (i, set) in settings.iter().enumerate() {
        let mut bases = vec![Pauli::Z; r];
        bases.extend_from_slice(set);
        all.push(copies.measure_in_bases(&synth.circuit, &bases, per, rng::derive_seed(cfg.seed, 2 + i as u64))?);
    }
    let head: Vec<usize> = (0..r).collect();
    let tail: Vec<usize> = (r..n).collect();
    let mut counts: HashMap<BitString, usize> = HashMap::new();
    let total: usize = all.iter().map(|v| v.len()).sum();
    for rec in all.iter().flatten() {
        *counts.entry(rec.select(&head)).or_default() += 1;
    }
    let (x, freq) = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.to_string().cmp(&a.0.to_string())))
        .map(|(x, c)| (x, c as f64 / total as f64))
        .expect("at least one record");
    if freq <= 0.5 {
        return Err(Error::Ambiguous(format!("majority outcome frequency {freq:.3} ≤ 1/2")));
    }
    let kept: Vec<Vec<BitString>> = all
        .iter()
        .map(|recs| recs.iter().filter(|b| b.select(&head) == x).map(|b| b.select(&tail)).collect())
        .collect();
    let phi = pure_state_tomography(k, &settings, &kept)?;
    Ok(LearnedState {
        clifford: synth.circuit,
        x,
        phi,
        t_hat,
        bell_samples: m,
        copies: per * nsettings,
        x_frequency: freq,
    })
}

/// `U†(|x⟩ ⊗ |φ⟩)`.
pub fn reconstruct_state(l: &LearnedState) -> Result<StateVec> {
    let r = l.x.len();
    let mut xs = StateVec::basis(r, l.x.to_index() as usize)?;
    if r == 0 {
        xs = StateVec::zero(0)?;
    }
    let mut s = xs.tensor(&l.phi)?;
    s.apply_circuit(&l.clifford.inverse())?;
    Ok(s)
}

// ---------------------------------------------------------------------------
// BQP gadget
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetEstimate {
    /// Estimate of `⟨X₀⟩² = p₁²`.
    pub squared: EstimateWithError,
    /// `√max(ê, 0)` with a delta-method error.
    pub p1: EstimateWithError,
}

/// Estimates `p₁ = Pr[qubit 0 of C|0ⁿ⟩ reads 1]` from Bell samples of the
/// gadget circuit.
pub fn gadget_p1(c: &Circuit, m: usize, seed: u64) -> Result<GadgetEstimate> {
    let g = bqp_gadget(c)?;
    let src = DenseSource::new(&g, &NoiseSpec::noiseless())?;
    let samples = src.bell_samples(m, seed)?;
    let x0 = PauliVec::single(g.num_qubits(), 0, Pauli::X);
    let squared = pauli_sq_expectation(&samples, &x0)?;
    let v = squared.value.max(0.0);
    let p = v.sqrt();
    let se = if p > 0.0 { squared.std_error / (2.0 * p) } else { squared.std_error.sqrt() };
    Ok(GadgetEstimate {
        p1: EstimateWithError::new(p, se, m),
        squared,
    })
}

// ---------------------------------------------------------------------------
// White-noise error detection
// ---------------------------------------------------------------------------

/// `P_e(η) = 1 − (1−η)²`: probability that at least one copy is replaced.
pub fn error_probability(eta: f64) -> f64 {
    2.0 * eta * (1.0 - eta) + eta * eta
}

/// Expected rejected fraction under white noise: a uniformly random outcome
/// has odd Y-parity with probability `(1 − 2^{−n})/2`.
pub fn expected_rejection_rate(n: usize, eta: f64) -> f64 {
    error_probability(eta) * (1.0 - 0.5f64.powi(n as i32)) / 2.0
}

/// Bell samples of two copies of `(1−η)|ψ⟩⟨ψ| + η 1/2ⁿ`. A shot is ideal
/// with probability `(1−η)²` and uniform otherwise.
pub fn white_noise_bell_samples(state: &StateVec, eta: f64, m: usize, seed: u64) -> Result<BellSampleSet> {
    if !(0.0..=1.0).contains(&eta) {
        return invalid("η must lie in [0, 1]");
    }
    let n = state.num_qubits();
    let mut r = rng::stream(seed, 0);
    let keep = (1.0 - eta) * (1.0 - eta);
    let ideal_mask: Vec<bool> = (0..m).map(|_| r.random::<f64>() < keep).collect();
    let ideal_count = ideal_mask.iter().filter(|b| **b).count();
    let ideal = if ideal_count > 0 {
        bell_sample_dense(state, state, ideal_count, rng::derive_seed(seed, 1))?
    } else {
        BellSampleSet::new(n)
    };
    let mut out = BellSampleSet::with_capacity(n, m);
    let mut next = 0;
    for is_ideal in ideal_mask {
        if is_ideal {
            out.push(&ideal.get(next))?;
            next += 1;
        } else {
            let mut v = PauliVec::identity(n);
            for b in 0..2 * n {
                if r.random::<bool>() {
                    v.flip_bit(b);
                }
            }
            out.push(&v)?;
        }
    }
    Ok(out)
}

/// `(1−η)² P_C + P_e(η)/4ⁿ`.
pub fn white_noise_bell_distribution(ideal: &[f64], eta: f64) -> Vec<f64> {
    let keep = (1.0 - eta) * (1.0 - eta);
    let u = (1.0 - keep) / ideal.len() as f64;
    ideal.iter().map(|p| keep * p + u).collect()
}

/// Post-selected (even Y-parity) and renormalized white-noise distribution.
pub fn post_selected_distribution(dist: &[f64], n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = dist
        .iter()
        .enumerate()
        .map(|(i, p)| if PauliVec::from_index(n, i as u64).y_parity() { 0.0 } else { *p })
        .collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    out
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// White-noise rate `η′` whose unfiltered distribution is TVD-closest to
/// `target`. The TVD is convex in `(1−η′)²`, so a ternary search is exact
/// up to its resolution.
pub fn fit_white_noise(target: &[f64], ideal: &[f64]) -> f64 {
    let f = |keep: f64| {
        let eta = 1.0 - keep.sqrt();
        total_variation(target, &white_noise_bell_distribution(ideal, eta))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    1.0 - (0.5 * (lo + hi)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::{bell_sample_clifford, simulate_tableau};
    use crate::statevector::simulate_state;

    fn p(s: &str) -> PauliVec {
        s.parse().unwrap()
    }

    #[test]
    fn bound_examples() {
        let chain = Architecture::Chain1D { closed: true };
        let a: Vec<usize> = (0..4).collect();
        assert_eq!(max_entanglement_bound(&chain, 8, &a, 1).unwrap(), 2);
        assert_eq!(max_entanglement_bound(&chain, 8, &a, 3).unwrap(), 4);
        assert_eq!(max_entanglement_bound(&Architecture::AllToAll, 8, &a, 1).unwrap(), 4);
        assert!(max_entanglement_bound(&chain, 8, &[0, 2], 1).is_err());
    }

    #[test]
    fn depth_product_state() {
        let s = bell_sample_clifford(&Circuit::new(8), &NoiseSpec::noiseless(), 1000, 1).unwrap();
        let r = depth_test_max(&s, &Architecture::Chain1D { closed: true }, None).unwrap();
        assert_eq!(r.d_lower, 0);
    }

    #[test]
    fn depth_vacuous_tolerance() {
        let c = circuit::brickwork_clifford(8, 3, true, 2).unwrap();
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), 1000, 1).unwrap();
        let table = page_table(&Architecture::Chain1D { closed: true }, 8, &[1, 2, 3], 20, 4).unwrap();
        let r = depth_test_avg(&[s], &table, Some(1.0)).unwrap();
        assert_eq!(r.d_lower, 0);
        let back = PageTable::from_json(&table.to_json()).unwrap();
        assert_eq!(back, table);
    }

    #[test]
    fn magic_examples() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]);
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), 200, 1).unwrap();
        assert_eq!(magic_estimate(&s).unwrap().t_hat, 0);
        c.add(GateKind::T, &[0]);
        let src = DenseSource::new(&c, &NoiseSpec::noiseless()).unwrap();
        let s = src.bell_samples(200, 2).unwrap();
        let m = magic_estimate(&s).unwrap();
        assert_eq!(m.t_hat, 1);
        assert_eq!(m.g_prime.dim(), 2);
    }

    #[test]
    fn synthesis_examples() {
        let s = clifford_from_isotropic(1, &[p("X")]).unwrap();
        assert_eq!(s.circuit.gates().len(), 1);
        assert_eq!(s.circuit.gates()[0].kind, GateKind::H);
        let s = clifford_from_isotropic(3, &[p("ZII"), p("IZI")]).unwrap();
        assert!(s.circuit.is_empty());
        let s = clifford_from_isotropic(2, &[p("YY"), p("XX")]).unwrap();
        assert_eq!(s.signs.len(), 2);
        assert!(clifford_from_isotropic(1, &[p("X"), p("Z")]).is_err());
        assert!(clifford_from_isotropic(2, &[p("XX"), p("XX")]).is_err());
    }

    #[test]
    fn synthesis_random_isotropic() {
        for seed in 0..20 {
            let c = circuit::random_all_to_all_clifford(6, 4, seed).unwrap();
            let t = simulate_tableau(&c).unwrap();
            let gens: Vec<PauliVec> = t.stabilizers()[..4].to_vec();
            clifford_from_isotropic(6, &gens).unwrap();
        }
    }

    #[test]
    fn learn_stabilizer_state() {
        let c = circuit::random_all_to_all_clifford(4, 4, 3).unwrap();
        let src = DenseSource::new(&c, &NoiseSpec::noiseless()).unwrap();
        let cfg = LearnConfig { seed: 5, ..LearnConfig::default() };
        let l = learn_clifford_t(&src, &src, &cfg).unwrap();
        assert_eq!(l.t_hat, 0);
        let f = reconstruct_state(&l).unwrap().fidelity(src.ideal()).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "fidelity {f}");
        let back = LearnedState::from_json(&l.to_json()).unwrap();
        assert_eq!(back.clifford, l.clifford);
    }

    #[test]
    fn learn_magic_state() {
        let mut c = Circuit::new(1);
        c.add(GateKind::H, &[0]).add(GateKind::T, &[0]);
        let src = DenseSource::new(&c, &NoiseSpec::noiseless()).unwrap();
        let cfg = LearnConfig { epsilon: 0.01, seed: 1, ..LearnConfig::default() };
        let l = learn_clifford_t(&src, &src, &cfg).unwrap();
        let f = reconstruct_state(&l).unwrap().fidelity(&simulate_state(&c).unwrap()).unwrap();
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn gadget_examples() {
        let mut c = Circuit::new(1);
        c.add(GateKind::X, &[0]);
        assert!((gadget_p1(&c, 2000, 1).unwrap().p1.value - 1.0).abs() < 1e-12);
        assert!(gadget_p1(&Circuit::new(1), 2000, 1).unwrap().squared.value.abs() < 0.1);
    }

    #[test]
    fn white_noise_helpers() {
        assert!((expected_rejection_rate(6, 0.1) - 0.19 * (63.0 / 64.0) / 2.0).abs() < 1e-15);
        let ideal = vec![0.5, 0.5, 0.0, 0.0];
        let d = white_noise_bell_distribution(&ideal, 0.2);
        assert!((fit_white_noise(&d, &ideal) - 0.2).abs() < 1e-6);
    }
}
