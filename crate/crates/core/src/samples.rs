//! Bell sample sets and their text format.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{invalid, Error, Result};
use crate::symplectic::{words_for, PauliVec};

pub const PAIRING_TAG: &str = "zx";

/// `M` Bell outcomes `r ∈ {0,1}^{2n}`; bit `i` is the copy-1 readout of
/// qubit `i` after the Hadamard and bit `n + i` the copy-2 readout. Each
/// outcome is stored in the packed [`PauliVec`] layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellSampleSet {
    n: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BellSampleSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            stride: 2 * words_for(n),
            data: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, m: usize) -> Self {
        let mut s = Self::new(n);
        s.data.reserve(m * s.stride);
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Words per sample: `w` z-words followed by `w` x-words.
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn iter_words(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.data.chunks_exact(self.stride.max(1)).take(self.len())
    }

    pub fn get(&self, i: usize) -> PauliVec {
        let mut v = PauliVec::identity(self.n);
        v.raw_words_mut().copy_from_slice(self.words(i));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = PauliVec> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    pub fn push(&mut self, r: &PauliVec) -> Result<()> {
        if r.num_qubits() != self.n {
            return invalid(format!(
                "sample on {} qubits pushed into a {}-qubit set",
                r.num_qubits(),
                self.n
            ));
        }
        self.data.extend_from_slice(r.raw_words());
        Ok(())
    }

    pub(crate) fn push_words(&mut self, w: &[u64]) {
        debug_assert_eq!(w.len(), self.stride);
        self.data.extend_from_slice(w);
    }

    pub fn extend(&mut self, other: &BellSampleSet) -> Result<()> {
        if other.n != self.n {
            return invalid("cannot merge sample sets of different widths");
        }
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    /// First `m` samples.
    pub fn truncated(&self, m: usize) -> BellSampleSet {
        let m = m.min(self.len());
        Self {
            n: self.n,
            stride: self.stride,
            data: self.data[..m * self.stride].to_vec(),
        }
    }

    /// Samples for which `keep` holds.
    pub fn filter(&self, mut keep: impl FnMut(&[u64]) -> bool) -> BellSampleSet {
        let mut out = BellSampleSet::new(self.n);
        for w in self.iter_words() {
            if keep(w) {
                out.push_words(w);
            }
        }
        out
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "bellsamples v1 n={} pairing={PAIRING_TAG}", self.n)?;
        let mut line = String::with_capacity(2 * self.n + 1);
        for r in self.iter() {
            line.clear();
            let _ = write!(line, "{}", r.to_bit_string());
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| parse_err(1, 1, "missing header"))??;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("bellsamples") || parts.next() != Some("v1") {
            return Err(parse_err(1, 1, "expected `bellsamples v1`"));
        }
        let mut n = None;
        let mut pairing = None;
        for p in parts {
            if let Some(v) = p.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|_| parse_err(1, 1, "bad qubit count"))?);
            } else if let Some(v) = p.strip_prefix("pairing=") {
                pairing = Some(v.to_string());
            }
        }
        let n = n.ok_or_else(|| parse_err(1, 1, "header lacks n="))?;
        if pairing.as_deref() != Some(PAIRING_TAG) {
            return Err(parse_err(1, 1, "unsupported pairing convention"));
        }
        let mut set = BellSampleSet::new(n);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if t.len() != 2 * n {
                return Err(parse_err(i + 2, 1, &format!("expected {} bits, got {}", 2 * n, t.len())));
            }
            let v = PauliVec::from_bit_string(t).map_err(|e| match e {
                Error::Parse { column, message, .. } => Error::Parse {
                    line: i + 2,
                    column,
                    message,
                },
                other => other,
            })?;
            set.push(&v)?;
        }
        Ok(set)
    }

    pub fn from_text(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }
}

fn parse_err(line: usize, column: usize, message: &str) -> Error {
    Error::Parse {
        line,
        column,
        message: message.to_string(),
    }
}
