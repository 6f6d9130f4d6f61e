//! Stabilizer simulation: signed Pauli tables, CHP tableaux, Pauli-frame
//! trajectories and Clifford Bell sampling.

use std::collections::{HashMap, VecDeque};

use rand::Rng as _;
use rayon::prelude::*;

use crate::bits::{AffineSampler, BitString};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::clifford_group::{self, Prim};
use crate::error::{invalid, Error, Result};
use crate::estimators::EstimateWithError;
use crate::noise::NoiseSpec;
use crate::rng;
use crate::samples::BellSampleSet;
use crate::symplectic::{span, F2Subspace, PauliVec};

const ENGINE: &str = "stabilizer";

fn unsupported(g: &Gate) -> Error {
    Error::UnsupportedGate {
        gate: g.kind.name().to_string(),
        engine: ENGINE,
    }
}

/// `target ← src · target` on signed Hermitian Paulis that commute.
fn mul_signed(target: &mut PauliVec, target_sign: &mut bool, src: &PauliVec, src_sign: bool) {
    let phase = src.mul_phase(target) + 2 * (src_sign as u32) + 2 * (*target_sign as u32);
    target.xor_assign(src);
    debug_assert!(phase.is_multiple_of(2), "product of commuting Paulis must be Hermitian");
    *target_sign = phase % 4 == 2;
}

/// Rows of signed Pauli operators evolved by Clifford conjugation
/// `P ↦ U P U†`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliTable {
    n: usize,
    rows: Vec<PauliVec>,
    signs: Vec<bool>,
}

impl PauliTable {
    pub fn from_rows(n: usize, rows: Vec<PauliVec>, signs: Vec<bool>) -> Self {
        assert_eq!(rows.len(), signs.len());
        assert!(rows.iter().all(|r| r.num_qubits() == n));
        Self { n, rows, signs }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliVec] {
        &self.rows
    }

    pub fn signs(&self) -> &[bool] {
        &self.signs
    }

    fn check(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return invalid(format!("qubit {q} out of range for n = {}", self.n));
        }
        Ok(())
    }

    pub fn h(&mut self, q: usize) {
        for (r, s) in self.rows.iter_mut().zip(self.signs.iter_mut()) {
            let (x, z) = (r.x(q), r.z(q));
            *s ^= x & z;
            r.set_x(q, z);
            r.set_z(q, x);
        }
    }

    pub fn s(&mut self, q: usize) {
        for (r, s) in self.rows.iter_mut().zip(self.signs.iter_mut()) {
            let (x, z) = (r.x(q), r.z(q));
            *s ^= x & z;
            r.set_z(q, z ^ x);
        }
    }

    pub fn x(&mut self, q: usize) {
        for (r, s) in self.rows.iter().zip(self.signs.iter_mut()) {
            *s ^= r.z(q);
        }
    }

    pub fn y(&mut self, q: usize) {
        for (r, s) in self.rows.iter().zip(self.signs.iter_mut()) {
            *s ^= r.x(q) ^ r.z(q);
        }
    }

    pub fn z(&mut self, q: usize) {
        for (r, s) in self.rows.iter().zip(self.signs.iter_mut()) {
            *s ^= r.x(q);
        }
    }

    pub fn sdg(&mut self, q: usize) {
        self.s(q);
        self.z(q);
    }

    pub fn sqrt_x(&mut self, q: usize) {
        self.h(q);
        self.s(q);
        self.h(q);
    }

    pub fn cnot(&mut self, a: usize, b: usize) {
        for (r, s) in self.rows.iter_mut().zip(self.signs.iter_mut()) {
            let (xa, za, xb, zb) = (r.x(a), r.z(a), r.x(b), r.z(b));
            *s ^= xa & zb & !(xb ^ za);
            r.set_x(b, xb ^ xa);
            r.set_z(a, za ^ zb);
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        for r in self.rows.iter_mut() {
            let (xa, za, xb, zb) = (r.x(a), r.z(a), r.x(b), r.z(b));
            r.set_x(a, xb);
            r.set_z(a, zb);
            r.set_x(b, xa);
            r.set_z(b, za);
        }
    }

    /// iSWAP = SWAP · CZ · (S ⊗ S).
    pub fn iswap(&mut self, a: usize, b: usize) {
        self.s(a);
        self.s(b);
        self.cz(a, b);
        self.swap(a, b);
    }

    pub fn clifford2(&mut self, idx: usize, a: usize, b: usize) {
        let el = &clifford_group::two_qubit().elements[idx];
        let local = [a, b];
        for p in &el.word {
            match *p {
                Prim::H(l) => self.h(local[l as usize]),
                Prim::S(l) => self.s(local[l as usize]),
                Prim::Cx => self.cnot(a, b),
            }
        }
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        for &q in &g.qubits {
            self.check(q)?;
        }
        let q = &g.qubits;
        match &g.kind {
            GateKind::H => self.h(q[0]),
            GateKind::S => self.s(q[0]),
            GateKind::Sdg => self.sdg(q[0]),
            GateKind::X => self.x(q[0]),
            GateKind::Y => self.y(q[0]),
            GateKind::Z => self.z(q[0]),
            GateKind::SqrtX => self.sqrt_x(q[0]),
            GateKind::Cnot => self.cnot(q[0], q[1]),
            GateKind::Cz => self.cz(q[0], q[1]),
            GateKind::Iswap => self.iswap(q[0], q[1]),
            GateKind::Clifford2(i) => self.clifford2(*i as usize, q[0], q[1]),
            _ => return Err(unsupported(g)),
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.num_qubits() != self.n {
            return invalid("circuit width differs from table width");
        }
        for g in c.gates() {
            self.apply(g)?;
        }
        Ok(())
    }
}

/// CHP tableau: rows `0..n` destabilizers, rows `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    table: PauliTable,
}

impl Tableau {
    /// `|0ⁿ⟩`.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            let mut r = PauliVec::identity(n);
            r.set_x(q, true);
            rows.push(r);
        }
        for q in 0..n {
            let mut r = PauliVec::identity(n);
            r.set_z(q, true);
            rows.push(r);
        }
        Self {
            table: PauliTable::from_rows(n, rows, vec![false; 2 * n]),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.table.n
    }

    pub fn table_mut(&mut self) -> &mut PauliTable {
        &mut self.table
    }

    pub fn apply(&mut self, g: &Gate) -> Result<()> {
        self.table.apply(g)
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        self.table.apply_circuit(c)
    }

    pub fn stabilizers(&self) -> &[PauliVec] {
        &self.table.rows[self.table.n..]
    }

    pub fn stabilizer_signs(&self) -> &[bool] {
        &self.table.signs[self.table.n..]
    }

    pub fn destabilizers(&self) -> &[PauliVec] {
        &self.table.rows[..self.table.n]
    }

    /// Unsigned stabilizer labels as a subspace of F₂^{2n}.
    pub fn stabilizer_subspace(&self) -> F2Subspace {
        span(self.table.n, self.stabilizers()).expect("rows share n")
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let (src, src_sign) = (self.table.rows[i].clone(), self.table.signs[i]);
        let (mut t, mut ts) = (self.table.rows[h].clone(), self.table.signs[h]);
        // Destabilizer rows may anticommute with the source; track the phase
        // mod 4 and keep only its sign bit as CHP does.
        let phase = src.mul_phase(&t) + 2 * (src_sign as u32) + 2 * (ts as u32);
        t.xor_assign(&src);
        ts = phase % 4 == 2 || phase % 4 == 3;
        self.table.rows[h] = t;
        self.table.signs[h] = ts;
    }

    /// Computational-basis measurement of qubit `q`. Random outcomes come
    /// from `rng`, or are forced to 0 when `rng` is `None`. Returns the
    /// outcome and whether it was random.
    pub fn measure<R: rand::Rng + ?Sized>(&mut self, q: usize, rng: Option<&mut R>) -> (bool, bool) {
        let n = self.table.n;
        if let Some(p) = (n..2 * n).find(|&i| self.table.rows[i].x(q)) {
            for i in 0..2 * n {
                if i != p && self.table.rows[i].x(q) {
                    self.rowsum(i, p);
                }
            }
            self.table.rows[p - n] = self.table.rows[p].clone();
            self.table.signs[p - n] = self.table.signs[p];
            let outcome = rng.map(|r| r.random::<bool>()).unwrap_or(false);
            let mut zq = PauliVec::identity(n);
            zq.set_z(q, true);
            self.table.rows[p] = zq;
            self.table.signs[p] = outcome;
            (outcome, true)
        } else {
            let mut acc = PauliVec::identity(n);
            let mut sign = false;
            for i in 0..n {
                if self.table.rows[i].x(q) {
                    mul_signed(&mut acc, &mut sign, &self.table.rows[i + n], self.table.signs[i + n]);
                }
            }
            (sign, false)
        }
    }

    /// `⟨P⟩ ∈ {−1, 0, +1}` for the Hermitian Pauli labelled `p`.
    pub fn pauli_expectation(&self, p: &PauliVec) -> Result<i8> {
        let n = self.table.n;
        if p.num_qubits() != n {
            return invalid("Pauli width differs from tableau width");
        }
        if self.stabilizers().iter().any(|s| !s.commutes_with(p)) {
            return Ok(0);
        }
        let mut acc = PauliVec::identity(n);
        let mut sign = false;
        for i in 0..n {
            if !self.table.rows[i].commutes_with(p) {
                mul_signed(&mut acc, &mut sign, &self.table.rows[i + n], self.table.signs[i + n]);
            }
        }
        debug_assert_eq!(&acc, p);
        Ok(if sign { -1 } else { 1 })
    }

    /// Signed product of the stabilizer generators selected by `mask` bits.
    pub fn stabilizer_element(&self, select: impl Fn(usize) -> bool) -> (PauliVec, bool) {
        let n = self.table.n;
        let mut acc = PauliVec::identity(n);
        let mut sign = false;
        for i in 0..n {
            if select(i) {
                mul_signed(&mut acc, &mut sign, &self.table.rows[i + n], self.table.signs[i + n]);
            }
        }
        (acc, sign)
    }

    /// Reduced signed stabilizer generators; equal iff the states are equal.
    pub fn canonical_stabilizers(&self) -> Vec<(PauliVec, bool)> {
        let n = self.table.n;
        let mut rows: Vec<(PauliVec, bool)> = self
            .stabilizers()
            .iter()
            .cloned()
            .zip(self.stabilizer_signs().iter().copied())
            .collect();
        let mut r = 0;
        let cols = (0..n).map(|q| (true, q)).chain((0..n).map(|q| (false, q)));
        for (is_x, q) in cols {
            let has = |v: &PauliVec| if is_x { v.x(q) } else { v.z(q) };
            let Some(p) = (r..n).find(|&i| has(&rows[i].0)) else {
                continue;
            };
            rows.swap(r, p);
            let (pv, ps) = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && has(&row.0) {
                    mul_signed(&mut row.0, &mut row.1, &pv, ps);
                }
            }
            r += 1;
            if r == n {
                break;
            }
        }
        rows
    }

    /// Uniform computational-basis sampler over the state's support
    /// `x₀ ⊕ span{x-parts of stabilizers}`.
    pub fn support(&self) -> AffineSampler {
        let n = self.table.n;
        let mut basis_space = F2Subspace::zero(n);
        for s in self.stabilizers() {
            // x-part of s stored in the z-half of an n-qubit label
            let mut v = PauliVec::identity(n);
            for q in 0..n {
                v.set_z(q, s.x(q));
            }
            basis_space.insert(&v);
        }
        let basis = basis_space
            .basis()
            .iter()
            .map(|v| {
                let mut b = BitString::zeros(n);
                for q in 0..n {
                    b.set(q, v.z(q));
                }
                b
            })
            .collect();
        let mut t = self.clone();
        let mut offset = BitString::zeros(n);
        for q in 0..n {
            let (o, _) = t.measure::<rng::Rng>(q, None);
            offset.set(q, o);
        }
        AffineSampler { offset, basis }
    }

    /// Rényi-2 entropy (bits) of the reduced state on `a`.
    pub fn renyi2(&self, a: &[usize]) -> Result<usize> {
        let n = self.table.n;
        if a.iter().any(|&q| q >= n) {
            return invalid("subsystem index out of range");
        }
        let restricted: Vec<PauliVec> = self.stabilizers().iter().map(|s| s.restrict(a)).collect();
        let rank = span(a.len(), &restricted)?.dim();
        Ok(rank - a.len())
    }
}

/// Tableau of `C|0ⁿ⟩`.
pub fn simulate_tableau(c: &Circuit) -> Result<Tableau> {
    let mut t = Tableau::new(c.num_qubits());
    t.apply_circuit(c)?;
    Ok(t)
}

/// Rényi-2 entanglement entropy in bits of `C|0ⁿ⟩` across `a`.
pub fn exact_subsystem_renyi2(c: &Circuit, a: &[usize]) -> Result<usize> {
    simulate_tableau(c)?.renyi2(a)
}

// ---------------------------------------------------------------------------
// Pauli frames
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum FrameOp {
    H(usize),
    S(usize),
    SqrtX(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    C2 { a: usize, b: usize, img: [u8; 4] },
    Noise { q: usize, ch: usize },
}

/// Circuit compiled for bit-sliced Pauli-frame propagation, 64 shots per
/// machine word. Frame signs are global phases and are dropped.
#[derive(Clone, Debug)]
pub struct FrameProgram {
    n: usize,
    ops: Vec<FrameOp>,
    channels: Vec<[u64; 3]>,
}

impl FrameProgram {
    pub fn compile(c: &Circuit, noise: &NoiseSpec) -> Result<Self> {
        let mut ops = Vec::new();
        let mut channels: Vec<[u64; 3]> = Vec::new();
        let mut channel_index = |t: [u64; 3]| -> usize {
            if let Some(i) = channels.iter().position(|c| *c == t) {
                i
            } else {
                channels.push(t);
                channels.len() - 1
            }
        };
        for g in c.gates() {
            let q = &g.qubits;
            match &g.kind {
                GateKind::H => ops.push(FrameOp::H(q[0])),
                GateKind::S | GateKind::Sdg => ops.push(FrameOp::S(q[0])),
                GateKind::SqrtX => ops.push(FrameOp::SqrtX(q[0])),
                GateKind::X | GateKind::Y | GateKind::Z => {}
                GateKind::Cnot => ops.push(FrameOp::Cx(q[0], q[1])),
                GateKind::Cz => ops.push(FrameOp::Cz(q[0], q[1])),
                GateKind::Iswap => {
                    ops.push(FrameOp::S(q[0]));
                    ops.push(FrameOp::S(q[1]));
                    ops.push(FrameOp::Cz(q[0], q[1]));
                    ops.push(FrameOp::Swap(q[0], q[1]));
                }
                GateKind::Clifford2(i) => {
                    let el = &clifford_group::two_qubit().elements[*i as usize];
                    let img = [0, 1, 2, 3].map(|k| el.image_bits(k));
                    ops.push(FrameOp::C2 { a: q[0], b: q[1], img });
                }
                _ => return Err(unsupported(g)),
            }
            if let Some(ch) = noise.channel_for(g) {
                let idx = channel_index(ch.thresholds());
                for &qq in q {
                    ops.push(FrameOp::Noise { q: qq, ch: idx });
                }
            }
        }
        Ok(Self {
            n: c.num_qubits(),
            ops,
            channels,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn has_noise(&self) -> bool {
        !self.channels.is_empty()
    }

    /// Propagates 64 frames held bit-sliced in `x[q]`, `z[q]`.
    pub fn run<R: rand::Rng + ?Sized>(&self, x: &mut [u64], z: &mut [u64], rng: &mut R) {
        for op in &self.ops {
            match *op {
                FrameOp::H(q) => std::mem::swap(&mut x[q], &mut z[q]),
                FrameOp::S(q) => z[q] ^= x[q],
                FrameOp::SqrtX(q) => x[q] ^= z[q],
                FrameOp::Cx(a, b) => {
                    x[b] ^= x[a];
                    z[a] ^= z[b];
                }
                FrameOp::Cz(a, b) => {
                    z[a] ^= x[b];
                    z[b] ^= x[a];
                }
                FrameOp::Swap(a, b) => {
                    x.swap(a, b);
                    z.swap(a, b);
                }
                FrameOp::C2 { a, b, img } => {
                    let input = [x[a], z[a], x[b], z[b]];
                    let mut out = [0u64; 4];
                    for (i, w) in input.iter().enumerate() {
                        for (j, o) in out.iter_mut().enumerate() {
                            if (img[i] >> j) & 1 == 1 {
                                *o ^= *w;
                            }
                        }
                    }
                    x[a] = out[0];
                    z[a] = out[1];
                    x[b] = out[2];
                    z[b] = out[3];
                }
                FrameOp::Noise { q, ch } => {
                    let (fx, fz) = sample_pauli_words(&self.channels[ch], rng);
                    x[q] ^= fx;
                    z[q] ^= fz;
                }
            }
        }
    }
}

/// 64 independent draws from a channel as bit-sliced `(x, z)` masks.
fn sample_pauli_words<R: rand::Rng + ?Sized>(t: &[u64; 3], rng: &mut R) -> (u64, u64) {
    let (mut fx, mut fz) = (0u64, 0u64);
    for lane in 0..64 {
        let u: u64 = rng.random();
        if u < t[2] {
            let bit = 1u64 << lane;
            if u < t[0] {
                fx |= bit;
            } else if u < t[1] {
                fx |= bit;
                fz |= bit;
            } else {
                fz |= bit;
            }
        }
    }
    (fx, fz)
}

// ---------------------------------------------------------------------------
// Bell sampling
// ---------------------------------------------------------------------------

/// Noiseless Bell outcomes of `C|0ⁿ⟩ ⊗ C|0ⁿ⟩`, obtained by simulating the
/// 2n-qubit circuit (two copies, transversal CNOTs, Hadamards on copy 1).
/// Returns the forced-zero outcome and a basis of the outcome differences.
fn bell_reference(c: &Circuit) -> Result<(PauliVec, F2Subspace)> {
    let n = c.num_qubits();
    let mut t = Tableau::new(2 * n);
    let copy1: Vec<usize> = (0..n).collect();
    let copy2: Vec<usize> = (n..2 * n).collect();
    let mut big = Circuit::new(2 * n);
    big.append_mapped(c, &copy1)?;
    big.append_mapped(c, &copy2)?;
    for i in 0..n {
        big.add(GateKind::Cnot, &[i, n + i]);
    }
    for i in 0..n {
        big.add(GateKind::H, &[i]);
    }
    t.apply_circuit(&big)?;
    let support = t.support();
    // Readout of qubit i (copy 1) is r_i and of qubit n + i is r_{n+i},
    // which is exactly the packed (z | x) bit order.
    let to_label = |b: &BitString| {
        let mut v = PauliVec::identity(n);
        for k in 0..2 * n {
            if b.get(k) {
                v.flip_bit(k);
            }
        }
        v
    };
    let offset = to_label(&support.offset);
    let basis: Vec<PauliVec> = support.basis.iter().map(to_label).collect();
    Ok((offset, span(n, &basis)?))
}

/// Affine sampler over packed sample words.
#[derive(Clone, Debug)]
struct WordAffine {
    offset: Vec<u64>,
    basis: Vec<Vec<u64>>,
}

impl WordAffine {
    fn new(offset: &PauliVec, space: &F2Subspace) -> Self {
        Self {
            offset: offset.raw_words().to_vec(),
            basis: space.basis().iter().map(|b| b.raw_words().to_vec()).collect(),
        }
    }

    fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [u64]) {
        out.copy_from_slice(&self.offset);
        let mut bits = 0u64;
        for (j, b) in self.basis.iter().enumerate() {
            if j % 64 == 0 {
                bits = rng.random();
            }
            if (bits >> (j % 64)) & 1 == 1 {
                for (o, w) in out.iter_mut().zip(b) {
                    *o ^= *w;
                }
            }
        }
    }
}

const BATCH: usize = 64;

/// Bell sampler for Clifford circuits with Pauli noise.
#[derive(Clone, Debug)]
pub struct CliffordBellSampler {
    n: usize,
    reference: WordAffine,
    coset_offset: PauliVec,
    coset_space: F2Subspace,
    program: FrameProgram,
    measurement: Option<[u64; 3]>,
}

impl CliffordBellSampler {
    pub fn new(c: &Circuit, noise: &NoiseSpec) -> Result<Self> {
        let program = FrameProgram::compile(c, noise)?;
        let (offset, space) = bell_reference(c)?;
        Ok(Self {
            n: c.num_qubits(),
            reference: WordAffine::new(&offset, &space),
            coset_offset: offset,
            coset_space: space,
            program,
            measurement: noise.measurement_channel().map(|m| m.thresholds()),
        })
    }

    /// Noiseless outcome support `S ⊕ k` as (forced-zero sample, `S`).
    pub fn noiseless_support(&self) -> (&PauliVec, &F2Subspace) {
        (&self.coset_offset, &self.coset_space)
    }

    fn batch(&self, lanes: usize, seed: u64, index: u64) -> Vec<u64> {
        let n = self.n;
        let w = n.div_ceil(64);
        let stride = 2 * w;
        let mut r = rng::stream(seed, index);
        let mut out = vec![0u64; lanes * stride];
        let noisy = self.program.has_noise() || self.measurement.is_some();
        let (mut zf, mut xf) = (vec![0u64; n], vec![0u64; n]);
        if noisy {
            let (mut x1, mut z1) = (vec![0u64; n], vec![0u64; n]);
            let (mut x2, mut z2) = (vec![0u64; n], vec![0u64; n]);
            self.program.run(&mut x1, &mut z1, &mut r);
            self.program.run(&mut x2, &mut z2, &mut r);
            for q in 0..n {
                zf[q] = z1[q] ^ z2[q];
                xf[q] = x1[q] ^ x2[q];
            }
            if let Some(t) = &self.measurement {
                for q in 0..n {
                    // Copy 1 is read after a Hadamard, so its Z component
                    // flips r_q; copy 2 is read directly.
                    let (_, fz1) = sample_pauli_words(t, &mut r);
                    let (fx2, _) = sample_pauli_words(t, &mut r);
                    zf[q] ^= fz1;
                    xf[q] ^= fx2;
                }
            }
        }
        for (lane, chunk) in out.chunks_exact_mut(stride).enumerate() {
            self.reference.sample_into(&mut r, chunk);
            if noisy {
                for q in 0..n {
                    chunk[q / 64] ^= ((zf[q] >> lane) & 1) << (q % 64);
                    chunk[w + q / 64] ^= ((xf[q] >> lane) & 1) << (q % 64);
                }
            }
        }
        out
    }

    /// `m` samples; batch `b` uses random stream `(seed, b)`.
    pub fn sample(&self, m: usize, seed: u64) -> BellSampleSet {
        let batches = m.div_ceil(BATCH);
        let parts: Vec<Vec<u64>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let lanes = BATCH.min(m - b * BATCH);
                self.batch(lanes, seed, b as u64)
            })
            .collect();
        let mut set = BellSampleSet::with_capacity(self.n, m);
        let stride = set.stride();
        for p in parts {
            for chunk in p.chunks_exact(stride) {
                set.push_words(chunk);
            }
        }
        set
    }
}

/// `M` Bell samples of two independently noisy copies of Clifford `C`.
pub fn bell_sample_clifford(c: &Circuit, noise: &NoiseSpec, m: usize, seed: u64) -> Result<BellSampleSet> {
    if m == 0 {
        return invalid("need at least one shot");
    }
    Ok(CliffordBellSampler::new(c, noise)?.sample(m, seed))
}

/// Z-type `k` with `|C̄⟩ ∝ σ_k |C⟩`, as the coset representative of a
/// noiseless Bell sample modulo the stabilizer labels. Unsigned.
pub fn conjugation_pauli(c: &Circuit) -> Result<PauliVec> {
    let (offset, space) = bell_reference(c)?;
    let swapped_basis: Vec<PauliVec> = space.basis().iter().map(|b| b.swapped_halves()).collect();
    let swapped = span(c.num_qubits(), &swapped_basis)?;
    let k = swapped.reduce(&offset.swapped_halves()).swapped_halves();
    if !k.is_z_type() {
        return Err(Error::InvalidArgument(format!(
            "coset representative {k} is not Z-type"
        )));
    }
    Ok(k)
}

// ---------------------------------------------------------------------------
// Single-copy sources and direct fidelity estimation
// ---------------------------------------------------------------------------

/// Provider of fresh single copies of a (noisy) state.
pub trait CopySource: Sync {
    fn num_qubits(&self) -> usize;

    /// Measures `paulis[i]` on fresh copy `i`; `true` means eigenvalue −1.
    fn measure_paulis(&self, paulis: &[PauliVec], seed: u64) -> Result<Vec<bool>>;

    /// Computational-basis readouts of `shots` fresh copies.
    fn sample_computational(&self, shots: usize, seed: u64) -> Result<Vec<BitString>>;
}

/// Noisy copies of a Clifford state simulated with Pauli frames.
#[derive(Clone, Debug)]
pub struct CliffordCopySource {
    ideal: Tableau,
    support: AffineSampler,
    program: FrameProgram,
}

impl CliffordCopySource {
    pub fn new(c: &Circuit, noise: &NoiseSpec) -> Result<Self> {
        let ideal = simulate_tableau(c)?;
        Ok(Self {
            support: ideal.support(),
            program: FrameProgram::compile(c, noise)?,
            ideal,
        })
    }

    pub fn ideal(&self) -> &Tableau {
        &self.ideal
    }

    fn frames(&self, r: &mut rng::Rng) -> (Vec<u64>, Vec<u64>) {
        let n = self.ideal.num_qubits();
        let (mut x, mut z) = (vec![0u64; n], vec![0u64; n]);
        self.program.run(&mut x, &mut z, r);
        (x, z)
    }
}

impl CopySource for CliffordCopySource {
    fn num_qubits(&self) -> usize {
        self.ideal.num_qubits()
    }

    fn measure_paulis(&self, paulis: &[PauliVec], seed: u64) -> Result<Vec<bool>> {
        let n = self.num_qubits();
        let parts: Vec<Result<Vec<bool>>> = paulis
            .par_chunks(BATCH)
            .enumerate()
            .map(|(b, chunk)| {
                let mut r = rng::stream(seed, b as u64);
                let (x, z) = self.frames(&mut r);
                let mut out = Vec::with_capacity(chunk.len());
                for (lane, p) in chunk.iter().enumerate() {
                    let e = self.ideal.pauli_expectation(p)?;
                    let ideal = match e {
                        0 => r.random::<bool>(),
                        v => v < 0,
                    };
                    let mut flip = false;
                    for q in 0..n {
                        flip ^= (((x[q] >> lane) & 1 == 1) & p.z(q)) ^ (((z[q] >> lane) & 1 == 1) & p.x(q));
                    }
                    out.push(ideal ^ (flip && e != 0));
                }
                Ok(out)
            })
            .collect();
        let mut out = Vec::with_capacity(paulis.len());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    fn sample_computational(&self, shots: usize, seed: u64) -> Result<Vec<BitString>> {
        let n = self.num_qubits();
        let parts: Vec<Vec<BitString>> = (0..shots.div_ceil(BATCH))
            .into_par_iter()
            .map(|b| {
                let lanes = BATCH.min(shots - b * BATCH);
                let mut r = rng::stream(seed, b as u64);
                let (x, _) = self.frames(&mut r);
                (0..lanes)
                    .map(|lane| {
                        let mut s = self.support.sample(&mut r);
                        for (q, xq) in x.iter().enumerate().take(n) {
                            if (xq >> lane) & 1 == 1 {
                                s.flip(q);
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        Ok(parts.into_iter().flatten().collect())
    }
}

/// Fidelity with the stabilizer state `target`, estimated by measuring
/// uniformly random signed stabilizer-group elements on fresh copies.
pub fn dfe_estimate(target: &Tableau, source: &dyn CopySource, m: usize, seed: u64) -> Result<EstimateWithError> {
    let n = target.num_qubits();
    if source.num_qubits() != n {
        return invalid("source and target widths differ");
    }
    if m == 0 {
        return invalid("need at least one shot");
    }
    let mut r = rng::stream(seed, u64::MAX);
    let mut paulis = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    let mut pick = vec![false; n];
    for _ in 0..m {
        for b in pick.iter_mut() {
            *b = r.random();
        }
        let (p, s) = target.stabilizer_element(|i| pick[i]);
        paulis.push(p);
        signs.push(s);
    }
    let outcomes = source.measure_paulis(&paulis, seed)?;
    let agree = outcomes.iter().zip(&signs).filter(|(o, s)| o == s).count();
    Ok(EstimateWithError::from_sign_counts(agree, m - agree))
}

/// All `n`-qubit stabilizer states (n ≤ 4), each as a preparing circuit in
/// `H`, `S`, `CNOT`, found by breadth-first search from `|0ⁿ⟩`.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<Circuit>> {
    if n == 0 || n > 4 {
        return invalid("stabilizer-state enumeration supports 1 ≤ n ≤ 4");
    }
    let key = |t: &Tableau| -> Vec<u64> {
        let mut k = Vec::new();
        for (v, s) in t.canonical_stabilizers() {
            k.extend_from_slice(v.raw_words());
            k.push(s as u64);
        }
        k
    };
    let mut gens: Vec<Gate> = Vec::new();
    for q in 0..n {
        gens.push(Gate::new(GateKind::H, vec![q]));
        gens.push(Gate::new(GateKind::S, vec![q]));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                gens.push(Gate::new(GateKind::Cnot, vec![a, b]));
            }
        }
    }
    let start = Tableau::new(n);
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut states: Vec<(Tableau, Circuit)> = vec![(start.clone(), Circuit::new(n))];
    seen.insert(key(&start), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &gens {
            let mut t = states[i].0.clone();
            t.apply(g)?;
            let k = key(&t);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(k) {
                let mut c = states[i].1.clone();
                c.push(g.clone())?;
                e.insert(states.len());
                queue.push_back(states.len());
                states.push((t, c));
            }
        }
    }
    Ok(states.into_iter().map(|(_, c)| c).collect())
}
