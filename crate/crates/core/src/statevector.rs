//! Dense exact simulation for small `n`: state vectors, density matrices,
//! exact Bell distributions and dense Bell sampling.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bits::BitString;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::clifford_group;
use crate::error::{invalid, Error, Result};
use crate::noise::NoiseSpec;
use crate::rng;
use crate::samples::BellSampleSet;
use crate::symplectic::{Pauli, PauliVec};

/// Largest `n` for [`StateVec`].
pub const STATE_CAP: usize = 14;
/// Largest `n` for [`DensityMatrix`].
pub const DENSITY_CAP: usize = 10;
/// Largest `n` for [`bell_distribution_exact`].
pub const EXACT_TABLE_CAP: usize = 8;
/// Largest `n` for two-copy dense Bell tables and sampling (2n ≤ 28).
pub const PAIR_CAP: usize = 14;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn cap(n: usize, limit: usize, what: &str) -> Result<()> {
    if n > limit {
        return Err(Error::Resource(format!("{what} supports n ≤ {limit}, got {n}")));
    }
    Ok(())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Row-major 2×2 matrix of a single-qubit gate kind.
pub(crate) fn matrix_1q(kind: &GateKind) -> Option<[C64; 4]> {
    let s = FRAC_1_SQRT_2;
    let t = C64::from_polar(1.0, FRAC_PI_4);
    Some(match kind {
        GateKind::H => [c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
        GateKind::S => [ONE, ZERO, ZERO, I],
        GateKind::Sdg => [ONE, ZERO, ZERO, -I],
        GateKind::X => [ZERO, ONE, ONE, ZERO],
        GateKind::Y => [ZERO, -I, I, ZERO],
        GateKind::Z => [ONE, ZERO, ZERO, -ONE],
        GateKind::SqrtX => [c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
        GateKind::T => [ONE, ZERO, ZERO, t],
        GateKind::Tdg => [ONE, ZERO, ZERO, t.conj()],
        GateKind::Unitary1(m) => **m,
        _ => return None,
    })
}

/// Row-major 4×4 matrix of a two-qubit gate kind; first qubit is high.
pub(crate) fn matrix_2q(kind: &GateKind) -> Option<[C64; 16]> {
    let mut m = [ZERO; 16];
    match kind {
        GateKind::Cnot => {
            m[0] = ONE;
            m[5] = ONE;
            m[11] = ONE;
            m[14] = ONE;
        }
        GateKind::Cz => {
            m[0] = ONE;
            m[5] = ONE;
            m[10] = ONE;
            m[15] = -ONE;
        }
        GateKind::Iswap => {
            m[0] = ONE;
            m[6] = I;
            m[9] = I;
            m[15] = ONE;
        }
        GateKind::Clifford2(i) => m = *clifford_group::two_qubit_matrix(*i as usize),
        GateKind::Unitary2(u) => m = **u,
        _ => return None,
    }
    Some(m)
}

/// Masks `(x, z)` and the count of `Y` factors of a Pauli label, n ≤ 64.
fn pauli_masks(p: &PauliVec) -> (usize, usize, u32) {
    let (mut xm, mut zm) = (0usize, 0usize);
    for q in 0..p.num_qubits() {
        xm |= (p.x(q) as usize) << q;
        zm |= (p.z(q) as usize) << q;
    }
    (xm, zm, (xm & zm).count_ones())
}

/// `σ|i⟩ = i^{#Y} (−1)^{|i ∧ z|} |i ⊕ x⟩`.
fn apply_pauli_masks(amps: &mut [C64], xm: usize, zm: usize, ys: u32) {
    let phase = [ONE, I, -ONE, -I][(ys % 4) as usize];
    let old = amps.to_vec();
    for (i, a) in old.iter().enumerate() {
        let sign = if (i & zm).count_ones() % 2 == 1 { -phase } else { phase };
        amps[i ^ xm] = sign * a;
    }
}

fn apply_1q_raw(amps: &mut [C64], q: usize, m: &[C64; 4]) {
    let bit = 1usize << q;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }
}

fn apply_2q_raw(amps: &mut [C64], hi: usize, lo: usize, m: &[C64; 16]) {
    let (bh, bl) = (1usize << hi, 1usize << lo);
    for i in 0..amps.len() {
        if i & (bh | bl) == 0 {
            let idx = [i, i | bl, i | bh, i | bh | bl];
            let v = idx.map(|k| amps[k]);
            for r in 0..4 {
                amps[idx[r]] = m[4 * r] * v[0] + m[4 * r + 1] * v[1] + m[4 * r + 2] * v[2] + m[4 * r + 3] * v[3];
            }
        }
    }
}

/// `exp(−iθP/2)` for the Pauli string `axis` on `qubits`.
fn apply_rotation_raw(amps: &mut [C64], n: usize, qubits: &[usize], axis: &[Pauli], theta: f64) {
    let mut p = PauliVec::identity(n);
    for (&q, &a) in qubits.iter().zip(axis) {
        let (z, x) = a.bits();
        p.set_z(q, z);
        p.set_x(q, x);
    }
    let (xm, zm, ys) = pauli_masks(&p);
    let mut pa = amps.to_vec();
    apply_pauli_masks(&mut pa, xm, zm, ys);
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    for (a, b) in amps.iter_mut().zip(pa) {
        *a = *a * cs - I * sn * b;
    }
}

/// Applies `g` with each qubit index shifted by `offset`, optionally with the
/// complex-conjugated matrix.
fn apply_gate_raw(amps: &mut [C64], n: usize, g: &Gate, offset: usize, conj: bool) {
    let q: Vec<usize> = g.qubits.iter().map(|&q| q + offset).collect();
    if let Some(mut m) = matrix_1q(&g.kind) {
        if conj {
            m = m.map(|x| x.conj());
        }
        apply_1q_raw(amps, q[0], &m);
    } else if let Some(mut m) = matrix_2q(&g.kind) {
        if conj {
            m = m.map(|x| x.conj());
        }
        apply_2q_raw(amps, q[0], q[1], &m);
    } else if let GateKind::PauliRot { axis, theta } = &g.kind {
        // conj(exp(−iθP/2)) = exp(+iθ P̄/2) and P̄ = (−1)^{#Y} P.
        let ys = axis.iter().filter(|a| **a == Pauli::Y).count();
        let t = if conj { if ys % 2 == 0 { -theta } else { *theta } } else { *theta };
        apply_rotation_raw(amps, n, &q, axis, t);
    } else {
        unreachable!("every gate kind has a dense action");
    }
}

/// Normalized pure state on `n ≤ 14` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVec {
    n: usize,
    amps: Vec<C64>,
}

impl StateVec {
    /// `|0ⁿ⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        cap(n, STATE_CAP, "state vector")?;
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = ONE;
        Ok(Self { n, amps })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(n)?;
        if index >= s.amps.len() {
            return invalid("basis index out of range");
        }
        s.amps[0] = ZERO;
        s.amps[index] = ONE;
        Ok(s)
    }

    /// Checks length `2ⁿ` and unit norm within 1e-9.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return invalid("amplitude count must be a power of two");
        }
        let n = amps.len().trailing_zeros() as usize;
        cap(n, STATE_CAP, "state vector")?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return invalid(format!("state norm² {norm} differs from 1"));
        }
        Ok(Self { n, amps })
    }

    /// Haar-random state.
    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        cap(n, STATE_CAP, "state vector")?;
        let mut amps: Vec<C64> = (0..1usize << n)
            .map(|_| c(StandardNormal.sample(rng), StandardNormal.sample(rng)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        if g.qubits.iter().any(|&q| q >= self.n) {
            return invalid("gate qubit out of range");
        }
        apply_gate_raw(&mut self.amps, self.n, g, 0, false);
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.num_qubits() != self.n {
            return invalid("circuit width differs from state width");
        }
        for g in c.gates() {
            apply_gate_raw(&mut self.amps, self.n, g, 0, false);
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliVec) -> Result<()> {
        if p.num_qubits() != self.n {
            return invalid("Pauli width differs from state width");
        }
        let (xm, zm, ys) = pauli_masks(p);
        apply_pauli_masks(&mut self.amps, xm, zm, ys);
        Ok(())
    }

    /// Complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            amps: self.amps.iter().map(|a| a.conj()).collect(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVec) -> Result<C64> {
        if other.n != self.n {
            return invalid("state widths differ");
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVec) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn pauli_expectation(&self, p: &PauliVec) -> Result<f64> {
        let mut q = self.clone();
        q.apply_pauli(p)?;
        Ok(self.inner(&q)?.re)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `self ⊗ high` with `self` on the low qubits.
    pub fn tensor(&self, high: &StateVec) -> Result<StateVec> {
        let n = self.n + high.n;
        cap(n, STATE_CAP, "state vector")?;
        let mut amps = Vec::with_capacity(1 << n);
        for h in &high.amps {
            for l in &self.amps {
                amps.push(h * l);
            }
        }
        Ok(StateVec { n, amps })
    }

    /// `tr ρ_A²` of the reduced state on `a`.
    pub fn subsystem_purity(&self, a: &[usize]) -> Result<f64> {
        if a.iter().any(|&q| q >= self.n) {
            return invalid("subsystem index out of range");
        }
        let b: Vec<usize> = (0..self.n).filter(|q| !a.contains(q)).collect();
        let gather = |idx: usize, qs: &[usize]| qs.iter().enumerate().fold(0usize, |acc, (k, &q)| acc | (((idx >> q) & 1) << k));
        let mut m = DMatrix::<C64>::zeros(1 << a.len(), 1 << b.len());
        for (i, amp) in self.amps.iter().enumerate() {
            m[(gather(i, a), gather(i, &b))] = *amp;
        }
        let rho = &m * m.adjoint();
        Ok(rho.iter().map(|x| x.norm_sqr()).sum())
    }

    /// Computational-basis samples.
    pub fn sample_computational<R: rand::Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Vec<BitString> {
        let cdf = cumulative(&self.probabilities());
        (0..shots)
            .map(|_| BitString::from_index(self.n, draw(&cdf, rng) as u64))
            .collect()
    }
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw<R: rand::Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// `C|0ⁿ⟩`.
pub fn simulate_state(c: &Circuit) -> Result<StateVec> {
    let mut s = StateVec::zero(c.num_qubits())?;
    s.apply_circuit(c)?;
    Ok(s)
}

/// One noisy trajectory: each gate followed by Pauli draws from its channel.
pub fn simulate_trajectory<R: rand::Rng + ?Sized>(c: &Circuit, noise: &NoiseSpec, rng: &mut R) -> Result<StateVec> {
    let mut s = StateVec::zero(c.num_qubits())?;
    let n = s.n;
    for g in c.gates() {
        apply_gate_raw(&mut s.amps, n, g, 0, false);
        if let Some(ch) = noise.channel_for(g) {
            for &q in &g.qubits {
                let p = ch.sample(rng);
                if p != Pauli::I {
                    let (z, x) = p.bits();
                    let ys = (z && x) as u32;
                    apply_pauli_masks(&mut s.amps, (x as usize) << q, (z as usize) << q, ys);
                }
            }
        }
    }
    Ok(s)
}

/// In-place unnormalized Walsh-Hadamard transform.
pub(crate) fn wht<T>(v: &mut [T])
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `P(u | v)·P(v)` row for fixed `v`: `|2^{-n/2} Σ_a (−1)^{a·u} ψ_a φ_{a⊕v}|²`.
fn bell_row(psi: &[C64], phi: &[C64], v: usize) -> Vec<f64> {
    let d = psi.len();
    let mut f: Vec<C64> = (0..d).map(|a| psi[a] * phi[a ^ v]).collect();
    wht(&mut f);
    f.iter().map(|x| x.norm_sqr() / d as f64).collect()
}

/// Full two-copy Bell table indexed by `u + (v << n)`, the packed label index.
pub fn bell_distribution_pair(copy1: &StateVec, copy2: &StateVec) -> Result<Vec<f64>> {
    if copy1.n != copy2.n {
        return invalid("copy widths differ");
    }
    cap(copy1.n, 12, "dense Bell table")?;
    let d = copy1.amps.len();
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|v| bell_row(&copy1.amps, &copy2.amps, v))
        .collect();
    Ok(rows.concat())
}

/// `P_C(r) = 2^{-n} |⟨C|σ_r|C̄⟩|²` for `n ≤ 8`.
pub fn bell_distribution_exact(c: &Circuit) -> Result<Vec<f64>> {
    cap(c.num_qubits(), EXACT_TABLE_CAP, "exact Bell distribution")?;
    let s = simulate_state(c)?;
    bell_distribution_pair(&s, &s)
}

/// Marginal of the copy-2 readout `v`: `Σ_a |ψ_a|² |φ_{a⊕v}|²`.
fn v_marginal(psi: &[C64], phi: &[C64]) -> Vec<f64> {
    let d = psi.len();
    let mut p: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
    let mut q: Vec<f64> = phi.iter().map(|a| a.norm_sqr()).collect();
    wht(&mut p);
    wht(&mut q);
    let mut r: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a * b).collect();
    wht(&mut r);
    r.iter().map(|x| (x / d as f64).max(0.0)).collect()
}

/// `M` Bell samples of `copy1 ⊗ copy2`. The copy-2 readouts are drawn from
/// their marginal, then each distinct value is completed from its
/// conditional; the result is shuffled so sample order carries no structure.
pub fn bell_sample_dense(copy1: &StateVec, copy2: &StateVec, m: usize, seed: u64) -> Result<BellSampleSet> {
    if copy1.n != copy2.n {
        return invalid("copy widths differ");
    }
    cap(copy1.n, PAIR_CAP, "dense Bell sampling")?;
    let n = copy1.n;
    let mut r0 = rng::stream(seed, 0);
    let cdf = cumulative(&v_marginal(&copy1.amps, &copy2.amps));
    let mut counts = std::collections::BTreeMap::<usize, usize>::new();
    for _ in 0..m {
        *counts.entry(draw(&cdf, &mut r0)).or_default() += 1;
    }
    let groups: Vec<(usize, usize)> = counts.into_iter().collect();
    let parts: Vec<Vec<(usize, usize)>> = groups
        .par_iter()
        .map(|&(v, k)| {
            let mut r = rng::stream(seed, 1 + v as u64);
            let row = cumulative(&bell_row(&copy1.amps, &copy2.amps, v));
            (0..k).map(|_| (draw(&row, &mut r), v)).collect()
        })
        .collect();
    let mut all: Vec<(usize, usize)> = parts.concat();
    rand::seq::SliceRandom::shuffle(all.as_mut_slice(), &mut r0);
    let mut set = BellSampleSet::with_capacity(n, m);
    for (u, v) in all {
        set.push(&PauliVec::from_index(n, (u as u64) | ((v as u64) << n)))?;
    }
    Ok(set)
}

/// `M` Bell samples of two independently noisy copies of `C`, one pair of
/// trajectories per shot. Measurement noise flips readouts as in the
/// stabilizer engine.
pub fn bell_sample_trajectories(c: &Circuit, noise: &NoiseSpec, m: usize, seed: u64) -> Result<BellSampleSet> {
    let n = c.num_qubits();
    cap(n, PAIR_CAP, "dense Bell sampling")?;
    let mut set = if noise.has_gate_noise(c) {
        let shots: Vec<Result<PauliVec>> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, i as u64);
                let a = simulate_trajectory(c, noise, &mut r)?;
                let b = simulate_trajectory(c, noise, &mut r)?;
                Ok(bell_sample_dense(&a, &b, 1, r.random())?.get(0))
            })
            .collect();
        let mut set = BellSampleSet::with_capacity(n, m);
        for s in shots {
            set.push(&s?)?;
        }
        set
    } else {
        let s = simulate_state(c)?;
        bell_sample_dense(&s, &s, m, seed)?
    };
    if let Some(ch) = noise.measurement_channel() {
        let mut r = rng::stream(seed, u64::MAX);
        let mut out = BellSampleSet::with_capacity(n, m);
        for mut s in set.iter() {
            for q in 0..n {
                if ch.sample(&mut r).bits().0 {
                    s.flip_z(q);
                }
                if ch.sample(&mut r).bits().1 {
                    s.flip_x(q);
                }
            }
            out.push(&s)?;
        }
        set = out;
    }
    Ok(set)
}

/// Density matrix on `n ≤ 10` qubits, row-major `ρ[i][j]`.
///
/// Stored as a `2n`-qubit vector whose high `n` qubits index rows and low
/// `n` qubits index columns, so `U ρ U†` applies `U` to the high half and
/// `Ū` to the low half.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(s: &StateVec) -> Result<Self> {
        cap(s.n, DENSITY_CAP, "density matrix")?;
        let d = s.amps.len();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = s.amps[i] * s.amps[j].conj();
            }
        }
        Ok(Self { n: s.n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        cap(n, DENSITY_CAP, "density matrix")?;
        let d = 1usize << n;
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            data[i * d + i] = c(1.0 / d as f64, 0.0);
        }
        Ok(Self { n, data })
    }

    /// `(1−η)|ψ⟩⟨ψ| + η 1/2ⁿ`.
    pub fn white_noise(s: &StateVec, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return invalid("η must lie in [0, 1]");
        }
        let mut r = Self::from_pure(s)?;
        r.mix(&Self::maximally_mixed(s.n)?, eta)?;
        Ok(r)
    }

    /// `self ← (1−w) self + w other`.
    pub fn mix(&mut self, other: &DensityMatrix, w: f64) -> Result<()> {
        if other.n != self.n {
            return invalid("density widths differ");
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a * (1.0 - w) + b * w;
        }
        Ok(())
    }

    /// Validates trace, Hermiticity and positivity within 1e-9.
    pub fn from_matrix(m: &DMatrix<C64>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() || !d.is_power_of_two() {
            return invalid("density matrix must be square with power-of-two size");
        }
        let n = d.trailing_zeros() as usize;
        cap(n, DENSITY_CAP, "density matrix")?;
        if (m.trace() - ONE).norm() > 1e-9 || (m - m.adjoint()).camax() > 1e-9 {
            return invalid("matrix is not a unit-trace Hermitian matrix");
        }
        let min = m.clone().symmetric_eigenvalues().min();
        if min < -1e-9 {
            return invalid("matrix has a negative eigenvalue");
        }
        let data = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        Ok(Self { n, data })
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.data)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        if g.qubits.iter().any(|&q| q >= self.n) {
            return invalid("gate qubit out of range");
        }
        let n2 = 2 * self.n;
        apply_gate_raw(&mut self.data, n2, g, self.n, false);
        apply_gate_raw(&mut self.data, n2, g, 0, true);
        Ok(())
    }

    /// `ρ ↦ Σ_k p_k σ_k ρ σ_k` on qubit `q`.
    pub fn apply_channel(&mut self, q: usize, ch: &crate::noise::PauliChannel) {
        let n = self.n;
        let mut out: Vec<C64> = self.data.iter().map(|a| a * ch.p[0]).collect();
        for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            let w = ch.p[k + 1];
            if w == 0.0 {
                continue;
            }
            let (z, x) = p.bits();
            let (xm, zm) = ((x as usize) << q, (z as usize) << q);
            let mut t = self.data.clone();
            // σ on rows and σ̄ on columns; their Y phases cancel.
            apply_pauli_masks(&mut t, xm << n, zm << n, 0);
            apply_pauli_masks(&mut t, xm, zm, 0);
            for (o, v) in out.iter_mut().zip(t) {
                *o += v * w;
            }
        }
        self.data = out;
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity(&self, s: &StateVec) -> Result<f64> {
        if s.n != self.n {
            return invalid("state and density widths differ");
        }
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += s.amps[i].conj() * self.data[i * d + j] * s.amps[j];
            }
        }
        Ok(acc.re)
    }

    /// `tr[ρ σ]`.
    pub fn pauli_expectation(&self, p: &PauliVec) -> Result<f64> {
        if p.num_qubits() != self.n {
            return invalid("Pauli width differs from density width");
        }
        let (xm, zm, ys) = pauli_masks(p);
        let phase = [ONE, I, -ONE, -I][(ys % 4) as usize];
        // tr[ρσ] = Σ_j ρ[j][j⊕x]·phase·(−1)^{|j∧z|}
        let d = self.dim();
        let mut acc = ZERO;
        for j in 0..d {
            let s = if (j & zm).count_ones() % 2 == 1 { -phase } else { phase };
            acc += self.data[j * d + (j ^ xm)] * s;
        }
        Ok(acc.re)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }
}

/// Exact noisy state of `C|0ⁿ⟩` under the gate channels of `noise`.
pub fn evolve_density(c: &Circuit, noise: &NoiseSpec) -> Result<DensityMatrix> {
    let mut rho = DensityMatrix::from_pure(&StateVec::zero(c.num_qubits())?)?;
    for g in c.gates() {
        rho.apply(g)?;
        if let Some(ch) = noise.channel_for(g) {
            for &q in &g.qubits {
                rho.apply_channel(q, ch);
            }
        }
    }
    Ok(rho)
}

pub fn exact_purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

pub fn exact_fidelity(rho: &DensityMatrix, c: &Circuit) -> Result<f64> {
    rho.fidelity(&simulate_state(c)?)
}

/// Bell table of `ρ ⊗ σ` indexed like [`bell_distribution_pair`]:
/// `P(u,v) = 2^{-n} Σ_d (−1)^{d·u} Σ_a ρ_{a,a⊕d} σ_{a⊕v,a⊕d⊕v}`.
pub fn bell_distribution_density(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Vec<f64>> {
    if rho.n != sigma.n {
        return invalid("density widths differ");
    }
    cap(rho.n, 8, "density Bell table")?;
    let d = rho.dim();
    let rows: Vec<Vec<f64>> = (0..d)
        .into_par_iter()
        .map(|v| {
            let mut g: Vec<C64> = (0..d)
                .map(|dd| (0..d).map(|a| rho.get(a, a ^ dd) * sigma.get(a ^ v, a ^ dd ^ v)).sum())
                .collect();
            wht(&mut g);
            g.iter().map(|x| (x.re / d as f64).max(0.0)).collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Haar-random `d×d` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng)) * FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let ph = r[(j, j)] / r[(j, j)].norm();
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}
