//! Circuit intermediate representation, random ensembles and JSON I/O.
//!
//! Qubit `i` is bit `i` of a computational-basis index (little-endian). For
//! two-qubit matrices the first listed qubit is the high local bit, so
//! `CNOT` on `[c, t]` has the textbook matrix with control `c`.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::clifford_group::{self, Prim};
use crate::error::{invalid, Error, Result};
use crate::rng;
use crate::symplectic::Pauli;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    SqrtX,
    T,
    Tdg,
    Cnot,
    Cz,
    Iswap,
    /// Element of the enumerated two-qubit Clifford group.
    Clifford2(u16),
    Unitary1(Box<[C64; 4]>),
    Unitary2(Box<[C64; 16]>),
    /// `exp(−iθP/2)` for the Pauli string `axis` over the gate's qubits.
    PauliRot { axis: Vec<Pauli>, theta: f64 },
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::SqrtX => "SX",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Iswap => "ISWAP",
            GateKind::Clifford2(_) => "C2",
            GateKind::Unitary1(_) => "U1",
            GateKind::Unitary2(_) => "U2",
            GateKind::PauliRot { .. } => "PROT",
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(
            self,
            GateKind::T
                | GateKind::Tdg
                | GateKind::Unitary1(_)
                | GateKind::Unitary2(_)
                | GateKind::PauliRot { .. }
        )
    }

    /// Required qubit count, `None` for variable-arity kinds.
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Cnot
            | GateKind::Cz
            | GateKind::Iswap
            | GateKind::Clifford2(_)
            | GateKind::Unitary2(_) => Some(2),
            GateKind::PauliRot { axis, .. } => Some(axis.len()),
            _ => Some(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Some(a) = self.kind.arity() {
            if a != self.qubits.len() {
                return invalid(format!(
                    "gate {} expects {a} qubits, got {}",
                    self.kind.name(),
                    self.qubits.len()
                ));
            }
        }
        if self.qubits.is_empty() {
            return invalid(format!("gate {} acts on no qubits", self.kind.name()));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n {
                return invalid(format!("qubit {q} out of range for n = {n}"));
            }
            if self.qubits[..i].contains(&q) {
                return invalid(format!("repeated qubit {q} in gate {}", self.kind.name()));
            }
        }
        match &self.kind {
            GateKind::Unitary1(m) => check_unitary(&m[..], 2)?,
            GateKind::Unitary2(m) => check_unitary(&m[..], 4)?,
            GateKind::Clifford2(idx) if *idx as usize >= clifford_group::TWO_QUBIT_ORDER => {
                return invalid(format!("two-qubit Clifford index {idx} out of range"))
            }
            GateKind::PauliRot { theta, .. } if !theta.is_finite() => {
                return invalid("rotation angle is not finite")
            }
            _ => {}
        }
        Ok(())
    }
}

fn check_unitary(m: &[C64], d: usize) -> Result<()> {
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += m[d * k + r].conj() * m[d * k + c];
            }
            let want = if r == c { 1.0 } else { 0.0 };
            if (acc - want).norm() > UNITARY_TOL {
                return invalid(format!("{d}×{d} matrix is not unitary"));
            }
        }
    }
    Ok(())
}

/// Ordered gate list on `n` qubits.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    /// `layers[i]` is the gate index one past the end of layer `i`.
    layers: Vec<usize>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
            layers: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.n)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends a gate known to be valid.
    ///
    /// # Panics
    /// If the gate is invalid for this circuit.
    pub fn add(&mut self, kind: GateKind, qubits: &[usize]) -> &mut Self {
        self.push(Gate::new(kind, qubits.to_vec()))
            .unwrap_or_else(|e| panic!("{e}"));
        self
    }

    /// Closes the current layer; empty layers are ignored.
    pub fn end_layer(&mut self) {
        let end = self.gates.len();
        if self.layers.last().is_none_or(|&l| l < end) {
            self.layers.push(end);
        }
    }

    /// Replaces the layer boundaries.
    pub fn set_layers(&mut self, layers: Vec<usize>) -> Result<()> {
        if layers.windows(2).any(|w| w[0] > w[1]) {
            return invalid("layer boundaries must be monotone");
        }
        if layers.last().is_some_and(|&l| l > self.gates.len()) {
            return invalid("layer boundary beyond the last gate");
        }
        self.layers = layers;
        Ok(())
    }

    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_clifford())
    }

    /// Number of gates acting on two or more qubits.
    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.qubits.len() >= 2).count()
    }

    pub fn count_kind(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.kind.name() == name).count()
    }

    /// Appends all gates of `other`, relabelling qubit `q` as `map[q]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() != other.n {
            return invalid("qubit map length differs from circuit width");
        }
        for g in &other.gates {
            let qubits = g.qubits.iter().map(|&q| map[q]).collect();
            self.push(Gate::new(g.kind.clone(), qubits))?;
        }
        Ok(())
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        let map: Vec<usize> = (0..other.n).collect();
        self.append_mapped(other, &map)
    }

    /// Circuit implementing the inverse unitary (up to global phase).
    pub fn inverse(&self) -> Circuit {
        let mut out = Circuit::new(self.n);
        for g in self.gates.iter().rev() {
            let q = &g.qubits;
            match &g.kind {
                GateKind::S => {
                    out.add(GateKind::Sdg, q);
                }
                GateKind::Sdg => {
                    out.add(GateKind::S, q);
                }
                GateKind::T => {
                    out.add(GateKind::Tdg, q);
                }
                GateKind::Tdg => {
                    out.add(GateKind::T, q);
                }
                GateKind::SqrtX => {
                    out.add(GateKind::SqrtX, q).add(GateKind::X, q);
                }
                GateKind::Iswap => {
                    for _ in 0..3 {
                        out.add(GateKind::Iswap, q);
                    }
                }
                GateKind::Clifford2(idx) => {
                    let inv = clifford_group::two_qubit().elements[*idx as usize].inverse;
                    out.add(GateKind::Clifford2(inv as u16), q);
                }
                GateKind::Unitary1(m) => {
                    out.add(GateKind::Unitary1(Box::new(adjoint::<4, 2>(m))), q);
                }
                GateKind::Unitary2(m) => {
                    out.add(GateKind::Unitary2(Box::new(adjoint::<16, 4>(m))), q);
                }
                GateKind::PauliRot { axis, theta } => {
                    out.add(
                        GateKind::PauliRot {
                            axis: axis.clone(),
                            theta: -theta,
                        },
                        q,
                    );
                }
                k => {
                    out.add(k.clone(), q);
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CircuitRecord::from(self)).expect("circuit serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&CircuitRecord::from(self)).expect("circuit serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: CircuitRecord = serde_json::from_str(text).map_err(json_error)?;
        rec.try_into()
    }
}

fn adjoint<const N: usize, const D: usize>(m: &[C64; N]) -> [C64; N] {
    let mut out = [C64::new(0.0, 0.0); N];
    for r in 0..D {
        for c in 0..D {
            out[D * r + c] = m[D * c + r].conj();
        }
    }
    out
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    g: String,
    q: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    axis: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    idx: Option<u16>,
    /// Row-major matrix entries as `[re, im]` pairs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    m: Option<Vec<[f64; 2]>>,
}

/// JSON document form of a circuit.
#[derive(Serialize, Deserialize)]
pub struct CircuitRecord {
    n: usize,
    gates: Vec<GateRecord>,
    #[serde(default)]
    layers: Vec<usize>,
}

impl From<&Circuit> for CircuitRecord {
    fn from(c: &Circuit) -> Self {
        let gates = c
            .gates
            .iter()
            .map(|g| {
                let mut rec = GateRecord {
                    g: g.kind.name().to_string(),
                    q: g.qubits.clone(),
                    axis: None,
                    theta: None,
                    idx: None,
                    m: None,
                };
                match &g.kind {
                    GateKind::Clifford2(i) => rec.idx = Some(*i),
                    GateKind::Unitary1(m) => rec.m = Some(m.iter().map(|z| [z.re, z.im]).collect()),
                    GateKind::Unitary2(m) => rec.m = Some(m.iter().map(|z| [z.re, z.im]).collect()),
                    GateKind::PauliRot { axis, theta } => {
                        rec.axis = Some(axis.iter().map(|p| p.as_char()).collect());
                        rec.theta = Some(*theta);
                    }
                    _ => {}
                }
                rec
            })
            .collect();
        Self {
            n: c.n,
            gates,
            layers: c.layers.clone(),
        }
    }
}

impl TryFrom<CircuitRecord> for Circuit {
    type Error = Error;

    fn try_from(rec: CircuitRecord) -> Result<Self> {
        let mut c = Circuit::new(rec.n);
        for (i, g) in rec.gates.into_iter().enumerate() {
            let ctx = |msg: String| Error::InvalidArgument(format!("gate {i}: {msg}"));
            let matrix = |len: usize| -> Result<Vec<C64>> {
                let m = g.m.as_ref().ok_or_else(|| ctx("missing matrix `m`".into()))?;
                if m.len() != len {
                    return Err(ctx(format!("matrix needs {len} entries, got {}", m.len())));
                }
                Ok(m.iter().map(|p| C64::new(p[0], p[1])).collect())
            };
            let kind = match g.g.to_ascii_uppercase().as_str() {
                "H" => GateKind::H,
                "S" => GateKind::S,
                "SDG" => GateKind::Sdg,
                "X" => GateKind::X,
                "Y" => GateKind::Y,
                "Z" => GateKind::Z,
                "SX" | "SQRTX" => GateKind::SqrtX,
                "T" => GateKind::T,
                "TDG" => GateKind::Tdg,
                "CNOT" | "CX" => GateKind::Cnot,
                "CZ" => GateKind::Cz,
                "ISWAP" => GateKind::Iswap,
                "C2" => GateKind::Clifford2(g.idx.ok_or_else(|| ctx("missing `idx`".into()))?),
                "U1" => {
                    let v = matrix(4)?;
                    GateKind::Unitary1(Box::new(v.try_into().expect("length checked")))
                }
                "U2" => {
                    let v = matrix(16)?;
                    GateKind::Unitary2(Box::new(v.try_into().expect("length checked")))
                }
                "PROT" => {
                    let axis_text = g.axis.as_ref().ok_or_else(|| ctx("missing `axis`".into()))?;
                    let axis = axis_text
                        .chars()
                        .map(|ch| Pauli::from_char(ch).ok_or_else(|| ctx(format!("bad axis `{ch}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    let theta = g.theta.ok_or_else(|| ctx("missing `theta`".into()))?;
                    GateKind::PauliRot { axis, theta }
                }
                other => return Err(ctx(format!("unknown gate `{other}`"))),
            };
            c.push(Gate::new(kind, g.q)).map_err(|e| ctx(e.to_string()))?;
        }
        c.set_layers(rec.layers)?;
        Ok(c)
    }
}

fn push_single_clifford(c: &mut Circuit, q: usize, idx: usize) {
    for p in &clifford_group::single_qubit().elements[idx].word {
        match p {
            Prim::H(_) => c.add(GateKind::H, &[q]),
            Prim::S(_) => c.add(GateKind::S, &[q]),
            Prim::Cx => unreachable!("single-qubit words contain no CNOT"),
        };
    }
}

fn random_two_qubit_clifford<R: rand::Rng + ?Sized>(rng: &mut R) -> GateKind {
    GateKind::Clifford2(rng.random_range(0..clifford_group::TWO_QUBIT_ORDER) as u16)
}

/// `layers` rounds of uniformly random two-qubit Cliffords on a uniformly
/// random perfect matching of the qubits.
pub fn random_all_to_all_clifford(n: usize, layers: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return invalid("all-to-all circuits need n ≥ 2");
    }
    if layers == 0 {
        return invalid("layers must be at least 1");
    }
    let mut r = rng::rng_from_seed(seed);
    let mut c = Circuit::new(n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..layers {
        perm.shuffle(&mut r);
        for pair in perm.chunks_exact(2) {
            let kind = random_two_qubit_clifford(&mut r);
            c.add(kind, pair);
        }
        c.end_layer();
    }
    Ok(c)
}

/// Bonds of one brickwork sublayer; `parity` 0 starts at (0,1), 1 at (1,2).
pub fn brick_bonds(n: usize, parity: usize, closed: bool) -> Vec<(usize, usize)> {
    let mut bonds = Vec::new();
    let mut i = parity;
    while i + 1 < n {
        bonds.push((i, i + 1));
        i += 2;
    }
    if closed && parity == 1 && n.is_multiple_of(2) && n > 2 {
        bonds.push((n - 1, 0));
    }
    bonds
}

/// 1D brickwork of random two-qubit Cliffords. One unit of `depth` is a
/// brickwork period: a layer on even bonds followed by a layer on odd bonds.
pub fn brickwork_clifford(n: usize, depth: usize, closed: bool, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return invalid("brickwork circuits need n ≥ 2");
    }
    let mut r = rng::rng_from_seed(seed);
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        for parity in 0..2 {
            for (a, b) in brick_bonds(n, parity, closed) {
                let kind = random_two_qubit_clifford(&mut r);
                c.add(kind, &[a, b]);
            }
            c.end_layer();
        }
    }
    Ok(c)
}

/// Open-chain iSWAP brickwork; layer `t` acts on even bonds for even `t`.
/// With `scrambling`, every iSWAP is followed by √X on both its qubits.
pub fn crystalline_floquet(n: usize, depth: usize, scrambling: bool) -> Result<Circuit> {
    if !n.is_multiple_of(2) {
        return invalid("crystalline circuits need even n");
    }
    if depth == 0 {
        return invalid("depth must be at least 1");
    }
    let mut c = Circuit::new(n);
    for t in 0..depth {
        for (a, b) in brick_bonds(n, t % 2, false) {
            c.add(GateKind::Iswap, &[a, b]);
            if scrambling {
                c.add(GateKind::SqrtX, &[a]).add(GateKind::SqrtX, &[b]);
            }
        }
        c.end_layer();
    }
    Ok(c)
}

/// Random Clifford block: per layer a random single-qubit Clifford on every
/// qubit, then random two-qubit Cliffords on a random matching.
pub fn random_clifford_block<R: rand::Rng + ?Sized>(n: usize, layers: usize, rng: &mut R) -> Circuit {
    let mut c = Circuit::new(n);
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..layers {
        for q in 0..n {
            let idx = rng.random_range(0..clifford_group::single_qubit().len());
            push_single_clifford(&mut c, q, idx);
        }
        perm.shuffle(rng);
        for pair in perm.chunks_exact(2) {
            let kind = random_two_qubit_clifford(rng);
            c.add(kind, pair);
        }
        c.end_layer();
    }
    c
}

/// `C_t T C_{t−1} ⋯ T C_0`: `t + 1` random Clifford blocks of
/// `clifford_depth` layers interleaved with `t` T gates on random qubits.
pub fn clifford_plus_t_random(n: usize, t: usize, clifford_depth: usize, seed: u64) -> Result<Circuit> {
    if n == 0 {
        return invalid("need at least one qubit");
    }
    let mut r = rng::rng_from_seed(seed);
    let mut c = Circuit::new(n);
    for block in 0..=t {
        let b = random_clifford_block(n, clifford_depth, &mut r);
        c.append(&b)?;
        if block < t {
            let q = r.random_range(0..n);
            c.add(GateKind::T, &[q]);
        }
        c.end_layer();
    }
    Ok(c)
}

/// `e^{−iπ/8 (Z₀Z₁ + Z₀)} (H ⊗ C)` on `n + 1` qubits; ancilla is qubit 0.
pub fn bqp_gadget(c: &Circuit) -> Result<Circuit> {
    if c.n == 0 {
        return invalid("gadget needs a circuit on at least one qubit");
    }
    let mut out = Circuit::new(c.n + 1);
    out.add(GateKind::H, &[0]);
    out.end_layer();
    let map: Vec<usize> = (1..=c.n).collect();
    out.append_mapped(c, &map)?;
    out.end_layer();
    out.add(
        GateKind::PauliRot {
            axis: vec![Pauli::Z, Pauli::Z],
            theta: FRAC_PI_4,
        },
        &[0, 1],
    );
    out.add(
        GateKind::PauliRot {
            axis: vec![Pauli::Z, Pauli::I],
            theta: FRAC_PI_4,
        },
        &[0, 1],
    );
    out.end_layer();
    Ok(out)
}

/// Connectivity used by depth tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Architecture {
    Chain1D { closed: bool },
    AllToAll,
    Grid2D { rows: usize, cols: usize },
}

impl Architecture {
    /// Number of coupling edges with exactly one endpoint in `a`.
    pub fn boundary_edges(&self, n: usize, a: &[usize]) -> Result<usize> {
        let mut inside = vec![false; n];
        for &q in a {
            if q >= n {
                return invalid(format!("qubit {q} out of range for n = {n}"));
            }
            inside[q] = true;
        }
        let k = inside.iter().filter(|b| **b).count();
        match *self {
            Architecture::Chain1D { closed } => {
                let mut edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
                if closed && n > 2 {
                    edges.push((n - 1, 0));
                }
                let cut = edges.iter().filter(|(i, j)| inside[*i] != inside[*j]).count();
                let runs = if closed {
                    (0..n).filter(|&q| inside[q] && !inside[(q + n - 1) % n]).count()
                } else {
                    (0..n).filter(|&q| inside[q] && (q == 0 || !inside[q - 1])).count()
                };
                if k > 0 && k < n && runs > 1 {
                    return invalid("subsystem must be contiguous on a chain");
                }
                Ok(cut)
            }
            Architecture::AllToAll => Ok(k * (n - k)),
            Architecture::Grid2D { rows, cols } => {
                if rows * cols != n {
                    return invalid(format!("grid {rows}×{cols} does not hold {n} qubits"));
                }
                let mut cut = 0;
                for r in 0..rows {
                    for c in 0..cols {
                        let q = r * cols + c;
                        if c + 1 < cols && inside[q] != inside[q + 1] {
                            cut += 1;
                        }
                        if r + 1 < rows && inside[q] != inside[q + cols] {
                            cut += 1;
                        }
                    }
                }
                Ok(cut)
            }
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Chain1D { closed: true } => write!(f, "chain-closed"),
            Architecture::Chain1D { closed: false } => write!(f, "chain-open"),
            Architecture::AllToAll => write!(f, "all-to-all"),
            Architecture::Grid2D { rows, cols } => write!(f, "grid-{rows}x{cols}"),
        }
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain-closed" => Ok(Architecture::Chain1D { closed: true }),
            "chain-open" => Ok(Architecture::Chain1D { closed: false }),
            "all-to-all" => Ok(Architecture::AllToAll),
            _ => {
                let dims = s
                    .strip_prefix("grid-")
                    .and_then(|d| d.split_once('x'))
                    .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)));
                match dims {
                    Some((rows, cols)) => Ok(Architecture::Grid2D { rows, cols }),
                    None => invalid(format!("unknown architecture `{s}`")),
                }
            }
        }
    }
}

impl Serialize for Architecture {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Architecture {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
