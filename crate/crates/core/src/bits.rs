//! Packed computational-basis bit strings.

use std::fmt;


use crate::error::{invalid, Result};
use crate::symplectic::words_for;

/// Bit string `b₀ b₁ … b_{n−1}`; bit `i` is the readout of qubit `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    n: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn from_words(n: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(n), 0);
        if !n.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
        Self { n, words }
    }

    /// Little-endian integer form; qubit `i` is bit `i`. Requires `n ≤ 64`.
    pub fn from_index(n: usize, index: u64) -> Self {
        debug_assert!(n <= 64);
        Self::from_words(n, vec![index])
    }

    pub fn to_index(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let words = (0..words_for(n)).map(|_| rng.random::<u64>()).collect();
        Self::from_words(n, words)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        let m = 1u64 << (i % 64);
        if b {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, o: &BitString) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= *b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Sub-string on the listed positions.
    pub fn select(&self, positions: &[usize]) -> BitString {
        let mut out = BitString::zeros(positions.len());
        for (j, &p) in positions.iter().enumerate() {
            out.set(j, self.get(p));
        }
        out
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut b = BitString::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => b.set(i, true),
                _ => return invalid(format!("bit string contains `{c}`")),
            }
        }
        Ok(b)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Uniform sampler over an affine space `offset ⊕ span(basis)` of bit strings.
#[derive(Clone, Debug)]
pub struct AffineSampler {
    pub offset: BitString,
    pub basis: Vec<BitString>,
}

impl AffineSampler {
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let mut out = self.offset.clone();
        self.sample_into(rng, &mut out);
        out
    }

    /// Overwrites `out` with a fresh uniform element.
    pub fn sample_into<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut BitString) {
        out.words.copy_from_slice(&self.offset.words);
        let mut bits = 0u64;
        for (j, b) in self.basis.iter().enumerate() {
            if j % 64 == 0 {
                bits = rng.random();
            }
            if (bits >> (j % 64)) & 1 == 1 {
                out.xor_assign(b);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}
