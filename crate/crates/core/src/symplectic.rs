//! Binary symplectic linear algebra over GF(2).
//!
//! An `n`-qubit Pauli operator without phase is a vector in F₂^{2n}. We use
//! the Bell-outcome layout `(z₁ … zₙ | x₁ … xₙ)`: bit `i` is the Z-component
//! of qubit `i` and bit `n + i` its X-component, so that `(z, x) = (1, 0)` is
//! `Z`, `(0, 1)` is `X` and `(1, 1)` is `Y`. This is also the order in which
//! a transversal Bell measurement reports its outcome string, which lets a
//! Bell sample be used directly as a Pauli label.
//!
//! Both halves are bit-packed into machine words so that elimination, the
//! symplectic form, and Y-parity are word-parallel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(z, x)` bits of the label.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (false, true),
            Pauli::Y => (true, true),
            Pauli::Z => (true, false),
        }
    }

    pub fn from_bits(z: bool, x: bool) -> Self {
        match (z, x) {
            (false, false) => Pauli::I,
            (false, true) => Pauli::X,
            (true, true) => Pauli::Y,
            (true, false) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Phase-free `n`-qubit Pauli label, i.e. a vector in F₂^{2n}.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliVec {
    n: usize,
    // first `w` words hold the z-half, the next `w` words the x-half
    words: Vec<u64>,
}

impl PauliVec {
    /// The identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            words: vec![0; 2 * words_for(n)],
        }
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut v = Self::identity(paulis.len());
        for (q, p) in paulis.iter().enumerate() {
            v.set(q, *p);
        }
        v
    }

    /// Builds a label from its z- and x-halves.
    pub fn from_zx(z: &[bool], x: &[bool]) -> Result<Self> {
        if z.len() != x.len() {
            return invalid("z and x halves differ in length");
        }
        let mut v = Self::identity(z.len());
        for q in 0..z.len() {
            v.set_z(q, z[q]);
            v.set_x(q, x[q]);
        }
        Ok(v)
    }

    /// Single-qubit Pauli `p` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut v = Self::identity(n);
        v.set(q, p);
        v
    }

    /// Packs `index = z + (x << n)` for `n ≤ 32`; the layout used by the dense
    /// Bell-distribution tables.
    pub fn from_index(n: usize, index: u64) -> Self {
        debug_assert!(n <= 32);
        let mask = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
        let mut v = Self::identity(n);
        if n > 0 {
            v.words[0] = index & mask;
            v.words[1] = (index >> n) & mask;
        }
        v
    }

    pub fn to_index(&self) -> u64 {
        debug_assert!(self.n <= 32);
        if self.n == 0 {
            0
        } else {
            self.words[0] | (self.words[1] << self.n)
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn half(&self) -> usize {
        self.words.len() / 2
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        (self.words[self.half() + q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn set_z(&mut self, q: usize, b: bool) {
        let m = 1u64 << (q % 64);
        let w = &mut self.words[q / 64];
        if b {
            *w |= m
        } else {
            *w &= !m
        }
    }

    #[inline]
    pub fn set_x(&mut self, q: usize, b: bool) {
        let h = self.half();
        let m = 1u64 << (q % 64);
        let w = &mut self.words[h + q / 64];
        if b {
            *w |= m
        } else {
            *w &= !m
        }
    }

    #[inline]
    pub fn flip_z(&mut self, q: usize) {
        self.words[q / 64] ^= 1u64 << (q % 64);
    }

    #[inline]
    pub fn flip_x(&mut self, q: usize) {
        let h = self.half();
        self.words[h + q / 64] ^= 1u64 << (q % 64);
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.z(q), self.x(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (z, x) = p.bits();
        self.set_z(q, z);
        self.set_x(q, x);
    }

    /// Bit `k` of the concatenated `(z | x)` layout, `k < 2n`.
    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        if k < self.n {
            self.z(k)
        } else {
            self.x(k - self.n)
        }
    }

    #[inline]
    pub fn flip_bit(&mut self, k: usize) {
        if k < self.n {
            self.flip_z(k)
        } else {
            self.flip_x(k - self.n)
        }
    }

    /// Position of the first set bit in `(z | x)` order.
    pub fn leading_bit(&self) -> Option<usize> {
        let h = self.half();
        for (i, w) in self.words[..h].iter().enumerate() {
            if *w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        for (i, w) in self.words[h..].iter().enumerate() {
            if *w != 0 {
                return Some(self.n + i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// True when the x-half vanishes (a product of `Z`s).
    pub fn is_z_type(&self) -> bool {
        self.words[self.half()..].iter().all(|w| *w == 0)
    }

    pub fn is_x_type(&self) -> bool {
        self.words[..self.half()].iter().all(|w| *w == 0)
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> usize {
        let h = self.half();
        (0..h)
            .map(|i| (self.words[i] | self.words[h + i]).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &PauliVec) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &PauliVec) -> PauliVec {
        let mut v = self.clone();
        v.xor_assign(other);
        v
    }

    /// Symplectic form ω without the length check.
    #[inline]
    pub(crate) fn omega(&self, other: &PauliVec) -> bool {
        let h = self.half();
        let mut acc = 0u32;
        for i in 0..h {
            acc ^= (self.words[i] & other.words[h + i]).count_ones()
                ^ (self.words[h + i] & other.words[i]).count_ones();
        }
        acc & 1 == 1
    }

    /// Exponent `k` (mod 4) with `σ_self · σ_other = i^k σ_{self ⊕ other}`,
    /// where labels denote the Hermitian Paulis `X`, `Y`, `Z`.
    pub(crate) fn mul_phase(&self, other: &PauliVec) -> u32 {
        let h = self.half();
        let (mut plus, mut minus) = (0u32, 0u32);
        for i in 0..h {
            let (z1, x1) = (self.words[i], self.words[h + i]);
            let (z2, x2) = (other.words[i], other.words[h + i]);
            let p = (x1 & z1 & z2 & !x2) | (x1 & !z1 & z2 & x2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
        }
        (plus + 3 * minus) % 4
    }

    /// `true` iff the two Paulis commute.
    pub fn commutes_with(&self, other: &PauliVec) -> bool {
        !self.omega(other)
    }

    /// Parity of positions carrying `Y`.
    pub fn y_parity(&self) -> bool {
        let h = self.half();
        let mut acc = 0u32;
        for i in 0..h {
            acc ^= (self.words[i] & self.words[h + i]).count_ones();
        }
        acc & 1 == 1
    }

    /// Number of `Y` factors.
    pub fn y_count(&self) -> usize {
        let h = self.half();
        (0..h)
            .map(|i| (self.words[i] & self.words[h + i]).count_ones() as usize)
            .sum()
    }

    /// Y-parity of the restriction to `qubits`.
    pub fn y_parity_on(&self, mask: &QubitMask) -> bool {
        let h = self.half();
        let mut acc = 0u32;
        for i in 0..h {
            acc ^= (self.words[i] & self.words[h + i] & mask.words[i]).count_ones();
        }
        acc & 1 == 1
    }

    /// Restriction to the listed qubits, re-indexed in the given order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliVec {
        let mut v = PauliVec::identity(qubits.len());
        for (j, &q) in qubits.iter().enumerate() {
            v.set_z(j, self.z(q));
            v.set_x(j, self.x(q));
        }
        v
    }

    /// Embeds this label into `n` qubits at the given positions.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> PauliVec {
        let mut v = PauliVec::identity(n);
        for (j, &q) in qubits.iter().enumerate() {
            v.set_z(q, self.z(j));
            v.set_x(q, self.x(j));
        }
        v
    }

    /// Exchanges the z- and x-halves.
    pub fn swapped_halves(&self) -> PauliVec {
        let h = self.half();
        let mut words = Vec::with_capacity(self.words.len());
        words.extend_from_slice(&self.words[h..]);
        words.extend_from_slice(&self.words[..h]);
        PauliVec { n: self.n, words }
    }

    /// Raw outcome string `r₁ … r_{2n}` (z-half first).
    pub fn to_bit_string(&self) -> String {
        (0..2 * self.n)
            .map(|k| if self.bit(k) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.trim().chars().collect();
        if !chars.len().is_multiple_of(2) {
            return invalid(format!("bit string of odd length {}", chars.len()));
        }
        let n = chars.len() / 2;
        let mut v = PauliVec::identity(n);
        for (k, c) in chars.iter().enumerate() {
            match c {
                '0' => {}
                '1' => v.flip_bit(k),
                _ => {
                    return Err(Error::Parse {
                        line: 1,
                        column: k + 1,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
        Ok(v)
    }

    pub(crate) fn raw_words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn raw_words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }
}

/// Symplectic product ω(a, b) = Σᵢ aᵢ b_{n+i} − bᵢ a_{n+i} mod 2.
pub fn symplectic_product(a: &PauliVec, b: &PauliVec) -> Result<bool> {
    if a.n != b.n {
        return invalid(format!(
            "symplectic product of {}- and {}-qubit labels",
            a.n, b.n
        ));
    }
    Ok(a.omega(b))
}

/// Parity of `Y` positions; odd parity marks an antisymmetric Bell outcome.
pub fn y_parity(r: &PauliVec) -> bool {
    r.y_parity()
}

impl fmt::Display for PauliVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliVec({self})")
    }
}

impl FromStr for PauliVec {
    type Err = Error;

    /// Accepts either an `IXYZ` string (qubit 0 leftmost) or a raw `0/1`
    /// outcome string of length `2n`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.is_empty() && s.chars().all(|c| c == '0' || c == '1') {
            return PauliVec::from_bit_string(s);
        }
        let mut paulis = Vec::with_capacity(s.len());
        for (i, c) in s.chars().enumerate() {
            match Pauli::from_char(c) {
                Some(p) => paulis.push(p),
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        column: i + 1,
                        message: format!("unexpected Pauli character `{c}`"),
                    })
                }
            }
        }
        Ok(PauliVec::from_paulis(&paulis))
    }
}

impl Serialize for PauliVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bit mask over qubits, used for subsystem restrictions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitMask {
    n: usize,
    words: Vec<u64>,
}

impl QubitMask {
    pub fn new(n: usize, qubits: &[usize]) -> Result<Self> {
        let mut words = vec![0u64; words_for(n)];
        for &q in qubits {
            if q >= n {
                return invalid(format!("qubit {q} out of range for n = {n}"));
            }
            words[q / 64] |= 1 << (q % 64);
        }
        Ok(Self { n, words })
    }

    pub fn full(n: usize) -> Self {
        let all: Vec<usize> = (0..n).collect();
        Self::new(n, &all).expect("in range")
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, q: usize) -> bool {
        (self.words[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        let rest: Vec<usize> = (0..self.n).filter(|&q| !self.contains(q)).collect();
        Self::new(self.n, &rest).expect("in range")
    }

    pub fn qubits(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.contains(q)).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Subspace of F₂^{2n} held in reduced row-echelon form with leftmost pivots
/// over the `(z | x)` layout. Two subspaces are equal iff their bases are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct F2Subspace {
    n: usize,
    basis: Vec<PauliVec>,
    pivots: Vec<usize>,
}

impl F2Subspace {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[PauliVec] {
        &self.basis
    }

    /// Canonical representative of `v` modulo this subspace.
    pub fn reduce(&self, v: &PauliVec) -> PauliVec {
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        r
    }

    fn reduce_in_place(&self, v: &mut PauliVec) {
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if v.bit(p) {
                v.xor_assign(row);
            }
        }
    }

    pub fn contains(&self, v: &PauliVec) -> bool {
        debug_assert_eq!(v.num_qubits(), self.n);
        self.reduce(v).is_identity()
    }

    /// Adds `v`; returns `true` if the dimension grew.
    pub fn insert(&mut self, v: &PauliVec) -> bool {
        debug_assert_eq!(v.num_qubits(), self.n);
        let mut r = v.clone();
        self.reduce_in_place(&mut r);
        let Some(p) = r.leading_bit() else {
            return false;
        };
        for row in self.basis.iter_mut() {
            if row.bit(p) {
                row.xor_assign(&r);
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.basis.insert(at, r);
        true
    }

    pub fn is_isotropic(&self) -> bool {
        for i in 0..self.basis.len() {
            for j in i + 1..self.basis.len() {
                if self.basis[i].omega(&self.basis[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// All `2^dim` elements; only sensible for small dimensions.
    pub fn elements(&self) -> Vec<PauliVec> {
        let mut out = vec![PauliVec::identity(self.n)];
        for b in &self.basis {
            let ext: Vec<PauliVec> = out.iter().map(|v| v.xor(b)).collect();
            out.extend(ext);
        }
        out
    }

    /// Radical `{c ∈ H : ω(c, h) = 0 ∀ h ∈ H}` of this subspace `H`.
    pub fn radical(&self) -> F2Subspace {
        let k = self.basis.len();
        // Gram matrix of ω over the basis; its kernel gives the radical.
        let gram: Vec<BitRow> = (0..k)
            .map(|i| {
                let mut row = BitRow::zeros(k);
                for j in 0..k {
                    if self.basis[i].omega(&self.basis[j]) {
                        row.set(j);
                    }
                }
                row
            })
            .collect();
        let mut out = F2Subspace::zero(self.n);
        for c in kernel(&gram, k) {
            let mut v = PauliVec::identity(self.n);
            for j in 0..k {
                if c.get(j) {
                    v.xor_assign(&self.basis[j]);
                }
            }
            out.insert(&v);
        }
        out
    }

    /// Symplectic complement `{v : ω(v, h) = 0 ∀ h ∈ H}`.
    pub fn symplectic_complement(&self) -> F2Subspace {
        let two_n = 2 * self.n;
        // ω(v, h) = v · J h, so solve the linear system with rows J h.
        let rows: Vec<BitRow> = self
            .basis
            .iter()
            .map(|h| {
                let mut row = BitRow::zeros(two_n);
                for q in 0..self.n {
                    if h.x(q) {
                        row.set(q);
                    }
                    if h.z(q) {
                        row.set(self.n + q);
                    }
                }
                row
            })
            .collect();
        let mut out = F2Subspace::zero(self.n);
        for c in kernel(&rows, two_n) {
            let mut v = PauliVec::identity(self.n);
            for k in 0..two_n {
                if c.get(k) {
                    v.flip_bit(k);
                }
            }
            out.insert(&v);
        }
        out
    }
}

/// Reduced basis of the span of `vectors`.
pub fn span<'a, I>(n: usize, vectors: I) -> Result<F2Subspace>
where
    I: IntoIterator<Item = &'a PauliVec>,
{
    let mut s = F2Subspace::zero(n);
    for v in vectors {
        if v.num_qubits() != n {
            return invalid(format!(
                "span over {n} qubits given a {}-qubit vector",
                v.num_qubits()
            ));
        }
        if s.dim() == 2 * n {
            break;
        }
        s.insert(v);
    }
    Ok(s)
}

pub fn membership(v: &PauliVec, s: &F2Subspace) -> Result<bool> {
    if v.num_qubits() != s.num_qubits() {
        return invalid("membership test across different qubit counts");
    }
    Ok(s.contains(v))
}

pub fn radical(h: &F2Subspace) -> F2Subspace {
    h.radical()
}

/// Affine space `S ⊕ k` with `k` reduced modulo `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineCoset {
    pub subspace: F2Subspace,
    pub offset: PauliVec,
}

impl AffineCoset {
    pub fn new(subspace: F2Subspace, offset: &PauliVec) -> Self {
        let offset = subspace.reduce(offset);
        Self { subspace, offset }
    }

    pub fn contains(&self, v: &PauliVec) -> bool {
        self.subspace.reduce(v) == self.offset
    }

    pub fn dim(&self) -> usize {
        self.subspace.dim()
    }
}

/// Smallest affine space containing all samples: the span of their pairwise
/// differences, offset by any one of them.
pub fn coset_extract(samples: &[PauliVec]) -> Result<AffineCoset> {
    let Some(first) = samples.first() else {
        return invalid("coset extraction needs at least one sample");
    };
    let n = first.num_qubits();
    let mut s = F2Subspace::zero(n);
    for v in &samples[1..] {
        if v.num_qubits() != n {
            return invalid("samples of mixed qubit counts");
        }
        s.insert(&v.xor(first));
    }
    Ok(AffineCoset::new(s, first))
}

/// Dense GF(2) row used for small linear systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub(crate) fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len).max(1)],
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn xor_assign(&mut self, o: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= *b;
        }
    }
}

/// Basis of `{c : A c = 0}` for the matrix with the given rows and `cols` columns.
pub(crate) fn kernel(rows: &[BitRow], cols: usize) -> Vec<BitRow> {
    let mut m: Vec<BitRow> = rows.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i].get(c)) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row.get(c) {
                row.xor_assign(&pivot);
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let mut is_pivot = vec![false; cols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let mut out = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = BitRow::zeros(cols);
        v.set(free);
        for (i, &pc) in pivot_cols.iter().enumerate() {
            if m[i].get(free) {
                v.set(pc);
            }
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliVec {
        s.parse().unwrap()
    }

    #[test]
    fn symplectic_examples() {
        assert!(symplectic_product(&p("X"), &p("Z")).unwrap());
        assert!(!symplectic_product(&p("XZ"), &p("XZ")).unwrap());
        assert!(symplectic_product(&p("YI"), &p("ZX")).unwrap());
        assert!(symplectic_product(&p("X"), &p("XX")).is_err());
    }

    #[test]
    fn y_parity_examples() {
        assert!(!y_parity(&p("III")));
        assert!(y_parity(&p("IYI")));
        assert!(!y_parity(&p("YY")));
    }

    #[test]
    fn text_forms_agree() {
        // Z on qubit 0, X on qubit 1: z-half "10", x-half "01"
        assert_eq!(p("1001"), p("ZX"));
        assert_eq!(p("ZX").to_bit_string(), "1001");
        assert_eq!(p("Y").to_bit_string(), "11");
        assert!(matches!(
            "XQ".parse::<PauliVec>(),
            Err(Error::Parse { column: 2, .. })
        ));
    }

    #[test]
    fn span_examples() {
        assert_eq!(span(1, []).unwrap().dim(), 0);
        let s = span(1, &[p("X"), p("Z"), p("Y")]).unwrap();
        assert_eq!(s.dim(), 2);
        for v in [p("X"), p("Z"), p("Y")] {
            assert!(s.contains(&v));
        }
    }

    #[test]
    fn radical_examples() {
        let h = span(1, &[p("Z")]).unwrap();
        assert_eq!(h.radical(), h);
        let h = span(1, &[p("X"), p("Z")]).unwrap();
        assert_eq!(h.radical().dim(), 0);
        let h = span(2, &[p("ZI"), p("IX"), p("IZ")]).unwrap();
        let r = h.radical();
        assert_eq!(r, span(2, &[p("ZI")]).unwrap());
    }

    #[test]
    fn coset_examples() {
        let c = coset_extract(&[p("XZ")]).unwrap();
        assert_eq!(c.dim(), 0);
        assert_eq!(c.offset, p("XZ"));
        let c = coset_extract(&[p("I"), p("Z")]).unwrap();
        assert_eq!(c.subspace, span(1, &[p("Z")]).unwrap());
        assert_eq!(c.offset, p("I"));
        assert!(coset_extract(&[]).is_err());
    }

    #[test]
    fn membership_examples() {
        let s = span(1, &[p("Z")]).unwrap();
        assert!(membership(&p("I"), &s).unwrap());
        assert!(!membership(&p("X"), &s).unwrap());
        assert!(membership(&s.basis()[0], &s).unwrap());
    }

    #[test]
    fn product_phases() {
        // XZ = −iY, ZX = iY, YZ = iX, XX = 1
        assert_eq!(p("X").mul_phase(&p("Z")), 3);
        assert_eq!(p("Z").mul_phase(&p("X")), 1);
        assert_eq!(p("Y").mul_phase(&p("Z")), 1);
        assert_eq!(p("X").mul_phase(&p("X")), 0);
        // (X⊗X)(Z⊗Z) = (−iY)(−iY) = −Y⊗Y
        assert_eq!(p("XX").mul_phase(&p("ZZ")), 2);
    }

    #[test]
    fn wide_vectors_cross_word_boundary() {
        let n = 70;
        let mut a = PauliVec::identity(n);
        a.set(65, Pauli::X);
        let mut b = PauliVec::identity(n);
        b.set(65, Pauli::Z);
        assert!(a.omega(&b));
        assert_eq!(a.leading_bit(), Some(n + 65));
        let s = span(n, &[a.clone(), b.clone()]).unwrap();
        assert!(s.contains(&a.xor(&b)));
        assert_eq!(s.radical().dim(), 0);
    }
}
