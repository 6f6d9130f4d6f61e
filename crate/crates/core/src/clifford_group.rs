//! Enumerated one- and two-qubit Clifford groups.
//!
//! Elements are found by breadth-first search over words in the generators
//! `{H, S}` (and `CNOT` for two qubits) acting on a signed tableau, so each
//! element carries a shortest generating word. Group elements are identified
//! modulo global phase by the signed images of `X_q` and `Z_q`.

use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;

/// Primitive generator; qubit labels are local (0 or 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prim {
    H(u8),
    S(u8),
    Cx,
}

// Signed local Pauli: bit 0 = x0, 1 = z0, 2 = x1, 3 = z1, 4 = sign.
type Row = u8;

fn bit(r: Row, k: u8) -> u8 {
    (r >> k) & 1
}

fn apply_prim(r: Row, g: Prim) -> Row {
    match g {
        Prim::H(q) => {
            let (xk, zk) = (2 * q, 2 * q + 1);
            let (x, z) = (bit(r, xk), bit(r, zk));
            let mut out = r & !((1 << xk) | (1 << zk));
            out |= (z << xk) | (x << zk);
            out ^ ((x & z) << 4)
        }
        Prim::S(q) => {
            let (xk, zk) = (2 * q, 2 * q + 1);
            let (x, z) = (bit(r, xk), bit(r, zk));
            (r ^ ((x & z) << 4)) ^ (x << zk)
        }
        Prim::Cx => {
            let (x0, z0, x1, z1) = (bit(r, 0), bit(r, 1), bit(r, 2), bit(r, 3));
            let flip = x0 & z1 & (x1 ^ z0 ^ 1);
            (r ^ (flip << 4)) ^ (x0 << 2) ^ (z1 << 1)
        }
    }
}

/// One group element.
#[derive(Clone, Debug)]
pub struct CliffordElement {
    /// Shortest generating word, applied left to right.
    pub word: Vec<Prim>,
    /// Signed images of `X0, Z0, X1, Z1` (only the first two for one qubit),
    /// encoded as local rows.
    images: [Row; 4],
    /// Index of the inverse element.
    pub inverse: usize,
}

impl CliffordElement {
    /// Phase-free image bits `(x0, z0, x1, z1)` of the generator `k`.
    pub fn image_bits(&self, k: usize) -> u8 {
        self.images[k] & 0x0F
    }

    pub fn image_sign(&self, k: usize) -> bool {
        self.images[k] & 0x10 != 0
    }
}

/// Enumerated group.
pub struct CliffordGroup {
    pub qubits: usize,
    pub elements: Vec<CliffordElement>,
}

impl CliffordGroup {
    fn enumerate(qubits: usize) -> Self {
        let gens: Vec<Prim> = if qubits == 1 {
            vec![Prim::H(0), Prim::S(0)]
        } else {
            vec![Prim::H(0), Prim::H(1), Prim::S(0), Prim::S(1), Prim::Cx]
        };
        let start: [Row; 4] = [0b0001, 0b0010, 0b0100, 0b1000];
        let key = |rows: &[Row; 4]| -> u32 {
            rows.iter()
                .enumerate()
                .map(|(i, r)| (*r as u32) << (5 * i))
                .fold(0, |a, b| a | b)
        };
        let mut index: HashMap<u32, usize> = HashMap::new();
        let mut elements: Vec<CliffordElement> = Vec::new();
        let mut queue = VecDeque::new();
        index.insert(key(&start), 0);
        elements.push(CliffordElement {
            word: Vec::new(),
            images: start,
            inverse: 0,
        });
        queue.push_back(0usize);
        while let Some(i) = queue.pop_front() {
            for &g in &gens {
                let mut rows = elements[i].images;
                for r in rows.iter_mut() {
                    *r = apply_prim(*r, g);
                }
                let k = key(&rows);
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(k) {
                    let mut word = elements[i].word.clone();
                    word.push(g);
                    e.insert(elements.len());
                    queue.push_back(elements.len());
                    elements.push(CliffordElement {
                        word,
                        images: rows,
                        inverse: 0,
                    });
                }
            }
        }
        // S⁻¹ = S³; H and CNOT are involutions.
        for el in elements.iter_mut() {
            let mut rows = start;
            for &g in el.word.iter().rev() {
                let reps = if matches!(g, Prim::S(_)) { 3 } else { 1 };
                for _ in 0..reps {
                    for r in rows.iter_mut() {
                        *r = apply_prim(*r, g);
                    }
                }
            }
            el.inverse = index[&key(&rows)];
        }
        Self { qubits, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<&CliffordElement> {
        self.elements.get(idx)
    }
}

/// The 24-element single-qubit Clifford group.
pub fn single_qubit() -> &'static CliffordGroup {
    static G: OnceLock<CliffordGroup> = OnceLock::new();
    G.get_or_init(|| CliffordGroup::enumerate(1))
}

/// The 11520-element two-qubit Clifford group.
pub fn two_qubit() -> &'static CliffordGroup {
    static G: OnceLock<CliffordGroup> = OnceLock::new();
    G.get_or_init(|| CliffordGroup::enumerate(2))
}

pub const TWO_QUBIT_ORDER: usize = 11520;

/// Local 4×4 matrix of a primitive; the first local qubit is the high bit.
fn prim_matrix(g: Prim) -> [C64; 16] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = [C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)];
    let ph = [l, o, o, C64::new(0.0, 1.0)];
    let id = [l, o, o, l];
    let kron = |a: &[C64; 4], b: &[C64; 4]| {
        let mut m = [o; 16];
        for r in 0..4 {
            for c in 0..4 {
                m[4 * r + c] = a[2 * (r >> 1) + (c >> 1)] * b[2 * (r & 1) + (c & 1)];
            }
        }
        m
    };
    match g {
        Prim::H(0) => kron(&h, &id),
        Prim::H(_) => kron(&id, &h),
        Prim::S(0) => kron(&ph, &id),
        Prim::S(_) => kron(&id, &ph),
        Prim::Cx => {
            let mut m = [o; 16];
            m[0] = l;
            m[5] = l;
            m[11] = l;
            m[14] = l;
            m
        }
    }
}

fn matmul4(a: &[C64; 16], b: &[C64; 16]) -> [C64; 16] {
    let mut m = [C64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += a[4 * r + k] * b[4 * k + c];
            }
            m[4 * r + c] = acc;
        }
    }
    m
}

/// Unitary of two-qubit element `idx` (first local qubit is the high bit).
pub fn two_qubit_matrix(idx: usize) -> &'static [C64; 16] {
    static M: OnceLock<Vec<[C64; 16]>> = OnceLock::new();
    let all = M.get_or_init(|| {
        two_qubit()
            .elements
            .iter()
            .map(|e| {
                let mut u = prim_matrix(Prim::H(0));
                u = matmul4(&u, &u); // identity
                for &g in &e.word {
                    u = matmul4(&prim_matrix(g), &u);
                }
                u
            })
            .collect()
    });
    &all[idx]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(single_qubit().len(), 24);
        assert_eq!(two_qubit().len(), TWO_QUBIT_ORDER);
    }

    #[test]
    fn inverses_are_involutive() {
        let g = two_qubit();
        for (i, e) in g.elements.iter().enumerate().step_by(97) {
            assert_eq!(g.elements[e.inverse].inverse, i);
        }
        assert_eq!(g.elements[0].inverse, 0);
    }

    #[test]
    fn matrices_are_unitary() {
        for idx in [0usize, 1, 500, 11519] {
            let u = two_qubit_matrix(idx);
            for r in 0..4 {
                for c in 0..4 {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..4 {
                        acc += u[4 * k + r].conj() * u[4 * k + c];
                    }
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((acc - want).norm() < 1e-12);
                }
            }
        }
    }
}
