//! Estimators over Bell samples, plus XEB.
//!
//! Every sign-type estimator is a fold over per-sample signs computed with
//! word-parallel popcounts. Standard errors use binomial or delta-method
//! formulas so results are deterministic given the samples.

use serde::{Deserialize, Serialize};

use crate::bits::{AffineSampler, BitString};
use crate::error::{invalid, Error, Result};
use crate::samples::BellSampleSet;
use crate::symplectic::{PauliVec, QubitMask};

pub const FLAG_FLOOR_CLIPPED: &str = "floor-clipped";
pub const FLAG_DEGENERATE: &str = "degenerate";

/// Estimate with its standard error and the sample count used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub m_used: usize,
    #[serde(default)]
    pub flags: Vec<String>,
}

impl EstimateWithError {
    pub fn new(value: f64, std_error: f64, m_used: usize) -> Self {
        Self {
            value,
            std_error,
            m_used,
            flags: Vec::new(),
        }
    }

    /// Mean of `plus` copies of +1 and `minus` copies of −1.
    pub fn from_sign_counts(plus: usize, minus: usize) -> Self {
        let m = plus + minus;
        let v = (plus as f64 - minus as f64) / m as f64;
        Self::new(v, ((1.0 - v * v).max(0.0) / m as f64).sqrt(), m)
    }

    pub fn with_flag(mut self, flag: &str) -> Self {
        self.flags.push(flag.to_string());
        self
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }
}

fn parity(words: impl Iterator<Item = u64>) -> bool {
    words.fold(0u32, |acc, w| acc ^ w.count_ones()) & 1 == 1
}

/// `π_Y` of a packed sample restricted to `mask` (all qubits when `None`).
fn y_parity_words(s: &[u64], mask: Option<&[u64]>) -> bool {
    let w = s.len() / 2;
    match mask {
        None => parity((0..w).map(|i| s[i] & s[w + i])),
        Some(m) => parity((0..w).map(|i| s[i] & s[w + i] & m[i])),
    }
}

/// `ω(P, r)` on packed words.
fn omega_words(p: &[u64], s: &[u64]) -> bool {
    let w = s.len() / 2;
    parity((0..w).map(|i| (p[i] & s[w + i]) ^ (p[w + i] & s[i])))
}

fn nonempty(s: &BellSampleSet) -> Result<()> {
    if s.is_empty() {
        return invalid("need at least one sample");
    }
    Ok(())
}

fn check_width(s: &BellSampleSet, p: &PauliVec) -> Result<()> {
    if p.num_qubits() != s.num_qubits() {
        return invalid("Pauli width differs from sample width");
    }
    Ok(())
}

fn sign_estimate(s: &BellSampleSet, negative: impl Fn(&[u64]) -> bool) -> EstimateWithError {
    let minus = s.iter_words().filter(|w| negative(w)).count();
    EstimateWithError::from_sign_counts(s.len() - minus, minus)
}

/// `tr[ρσ]` as the mean of `(−1)^{π_Y(r)}`.
pub fn overlap_estimate(s: &BellSampleSet) -> Result<EstimateWithError> {
    nonempty(s)?;
    Ok(sign_estimate(s, |w| y_parity_words(w, None)))
}

/// `tr ρ_A²` as the mean of `(−1)^{π_Y(r_A)}`. Empty `A` gives exactly 1.
pub fn subsystem_purity(s: &BellSampleSet, a: &[usize]) -> Result<EstimateWithError> {
    nonempty(s)?;
    if a.is_empty() {
        return Ok(EstimateWithError::new(1.0, 0.0, s.len()).with_flag(FLAG_DEGENERATE));
    }
    let mask = QubitMask::new(s.num_qubits(), a)?;
    if mask.count() == s.num_qubits() {
        return overlap_estimate(s);
    }
    let m = mask.words();
    Ok(sign_estimate(s, |w| y_parity_words(w, Some(m))))
}

/// `P̂^x` with `P̂` clipped below at `1/4ⁿ`; delta-method standard error.
pub fn purity_power(purity: &EstimateWithError, exponent: f64, n: usize) -> EstimateWithError {
    let floor = 0.25f64.powi(n as i32);
    let clipped = purity.value <= floor;
    let p = purity.value.max(floor);
    let value = p.powf(exponent);
    let se = exponent * p.powf(exponent - 1.0) * purity.std_error;
    let mut out = EstimateWithError::new(value, se, purity.m_used);
    out.flags = purity.flags.clone();
    if clipped {
        out.flags.push(FLAG_FLOOR_CLIPPED.to_string());
    }
    out
}

/// `√P̂`.
pub fn root_purity_fidelity(s: &BellSampleSet) -> Result<EstimateWithError> {
    Ok(purity_power(&overlap_estimate(s)?, 0.5, s.num_qubits()))
}

/// `m / (n (2m/n + 2/3))`, tending to 1/2 as `m → ∞`.
pub fn corrected_fidelity_exponent(m: usize, n: usize) -> f64 {
    let (m, n) = (m as f64, n as f64);
    m / (n * (2.0 * m / n + 2.0 / 3.0))
}

/// `P̂^x` with the measurement-noise-corrected exponent.
pub fn corrected_fidelity(s: &BellSampleSet, m: usize, n: usize) -> Result<EstimateWithError> {
    if m == 0 {
        return invalid("need at least one two-qubit gate");
    }
    if n != s.num_qubits() {
        return invalid("n differs from sample width");
    }
    Ok(purity_power(&overlap_estimate(s)?, corrected_fidelity_exponent(m, n), n))
}

/// `⟨ψ|P|ψ⟩²` from the `P⊗P` eigenvalue `(−1)^{ω(P,r) + π_Y(P)}` of each
/// Bell outcome.
pub fn pauli_sq_expectation(s: &BellSampleSet, p: &PauliVec) -> Result<EstimateWithError> {
    nonempty(s)?;
    check_width(s, p)?;
    let pw = p.raw_words();
    let py = p.y_parity();
    Ok(sign_estimate(s, |w| omega_words(pw, w) ^ py))
}

/// Keeps even-Y-parity outcomes; returns them and the rejected fraction.
pub fn error_detect_filter(s: &BellSampleSet) -> (BellSampleSet, f64) {
    let accepted = s.filter(|w| !y_parity_words(w, None));
    let rate = if s.is_empty() {
        0.0
    } else {
        (s.len() - accepted.len()) as f64 / s.len() as f64
    };
    (accepted, rate)
}

/// `tr[PρPρ] / tr[ρ²]` as the ratio of sign means of `(P⊗P)𝕊` and `𝕊`.
/// Fails when the denominator is below `min_denominator`.
pub fn virtual_distillation(s: &BellSampleSet, p: &PauliVec, min_denominator: f64) -> Result<EstimateWithError> {
    nonempty(s)?;
    check_width(s, p)?;
    let pw = p.raw_words();
    let py = p.y_parity();
    let m = s.len() as f64;
    let (mut num, mut den, mut cross) = (0i64, 0i64, 0i64);
    for w in s.iter_words() {
        let a = if omega_words(pw, w) ^ py ^ y_parity_words(w, None) { -1 } else { 1 };
        let b = if y_parity_words(w, None) { -1 } else { 1 };
        num += a;
        den += b;
        cross += a * b;
    }
    let (a, b) = (num as f64 / m, den as f64 / m);
    if b < min_denominator {
        return Err(Error::Unstable(format!(
            "denominator {b:.4} below threshold {min_denominator}"
        )));
    }
    let r = a / b;
    // Delta method for a ratio of correlated means of ±1 variables.
    let (va, vb, cab) = (1.0 - a * a, 1.0 - b * b, cross as f64 / m - a * b);
    let var = (va - 2.0 * r * cab + r * r * vb) / (b * b * m);
    Ok(EstimateWithError::new(r, var.max(0.0).sqrt(), s.len()))
}

/// Median of `k` group means over contiguous groups; `k = 1` is the mean.
pub fn median_of_means(values: &[f64], k: usize) -> Result<f64> {
    if values.is_empty() || k == 0 {
        return invalid("median of means needs values and k ≥ 1");
    }
    let k = k.min(values.len());
    let mut means: Vec<f64> = (0..k)
        .map(|g| {
            let lo = g * values.len() / k;
            let hi = (g + 1) * values.len() / k;
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    Ok(if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    })
}

/// Ideal output distribution consulted by XEB.
pub trait IdealDistribution {
    fn num_qubits(&self) -> usize;
    fn prob(&self, x: &BitString) -> f64;
    /// `Σ_x p(x)²`.
    fn collision(&self) -> f64;
}

/// Dense table indexed by `x.to_index()`.
impl IdealDistribution for [f64] {
    fn num_qubits(&self) -> usize {
        self.len().trailing_zeros() as usize
    }

    fn prob(&self, x: &BitString) -> f64 {
        self[x.to_index() as usize]
    }

    fn collision(&self) -> f64 {
        self.iter().map(|p| p * p).sum()
    }
}

/// Uniform distribution over an affine support, as for stabilizer states.
impl IdealDistribution for AffineSampler {
    fn num_qubits(&self) -> usize {
        self.offset.len()
    }

    fn prob(&self, x: &BitString) -> f64 {
        let mut d = x.clone();
        d.xor_assign(&self.offset);
        // Reduce d by the basis in echelon order of leading bits.
        let mut basis: Vec<BitString> = self.basis.clone();
        let n = d.len();
        let mut rows: Vec<BitString> = Vec::new();
        for q in 0..n {
            if let Some(i) = basis.iter().position(|b| b.get(q)) {
                let pivot = basis.swap_remove(i);
                for b in basis.iter_mut() {
                    if b.get(q) {
                        b.xor_assign(&pivot);
                    }
                }
                rows.push(pivot);
            }
        }
        for r in &rows {
            let lead = (0..n).find(|&q| r.get(q)).expect("nonzero row");
            if d.get(lead) {
                d.xor_assign(r);
            }
        }
        if d.is_zero() {
            0.5f64.powi(self.dim() as i32)
        } else {
            0.0
        }
    }

    fn collision(&self) -> f64 {
        0.5f64.powi(self.dim() as i32)
    }
}

/// Linear cross-entropy benchmark values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XebResult {
    pub chi: f64,
    pub chi_std_error: f64,
    pub chi_ideal: f64,
    /// `None` when `χ_ideal = 0`.
    pub f_xeb: Option<f64>,
    pub m_used: usize,
}

/// `χ = 2ⁿ E_q[p(x)] − 1`, `χ_ideal = 2ⁿ Σ p² − 1`, `F = χ/χ_ideal`.
pub fn xeb<D: IdealDistribution + ?Sized>(samples: &[BitString], ideal: &D) -> Result<XebResult> {
    if samples.is_empty() {
        return invalid("need at least one sample");
    }
    let n = ideal.num_qubits();
    if samples.iter().any(|s| s.len() != n) {
        return invalid("sample width differs from distribution width");
    }
    let scale = 2f64.powi(n as i32);
    let vals: Vec<f64> = samples.iter().map(|s| scale * ideal.prob(s)).collect();
    let m = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / m;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let chi = mean - 1.0;
    let chi_ideal = scale * ideal.collision() - 1.0;
    let f_xeb = (chi_ideal.abs() > 1e-12).then(|| chi / chi_ideal);
    Ok(XebResult {
        chi,
        chi_std_error: (var / m).sqrt(),
        chi_ideal,
        f_xeb,
        m_used: samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, items: &[&str]) -> BellSampleSet {
        let mut s = BellSampleSet::new(n);
        for i in items {
            s.push(&i.parse().unwrap()).unwrap();
        }
        s
    }

    #[test]
    fn overlap_examples() {
        let s = set(2, &["II", "ZX", "YY"]);
        assert_eq!(overlap_estimate(&s).unwrap().value, 1.0);
        let s = set(1, &["I", "X", "Y", "Z"]);
        assert_eq!(overlap_estimate(&s).unwrap().value, 0.5);
        assert!(overlap_estimate(&BellSampleSet::new(1)).is_err());
    }

    #[test]
    fn subsystem_examples() {
        let s = set(2, &["YI", "IY", "YY", "II"]);
        assert_eq!(subsystem_purity(&s, &[0]).unwrap().value, 0.0);
        assert_eq!(subsystem_purity(&s, &[0, 1]).unwrap(), overlap_estimate(&s).unwrap());
        let e = subsystem_purity(&s, &[]).unwrap();
        assert!(e.value == 1.0 && e.has_flag(FLAG_DEGENERATE));
    }

    #[test]
    fn power_maps() {
        let p = EstimateWithError::new(0.64, 0.01, 100);
        assert!((purity_power(&p, 0.5, 3).value - 0.8).abs() < 1e-12);
        let x = corrected_fidelity_exponent(60, 10);
        assert!((x - 0.473684).abs() < 1e-5);
        assert!((purity_power(&p, x, 10).value - 0.8095).abs() < 1e-4);
        assert!((corrected_fidelity_exponent(1_000_000, 4) - 0.5).abs() < 1e-5);
        let neg = EstimateWithError::new(-0.1, 0.01, 100);
        assert!(purity_power(&neg, 0.5, 1).has_flag(FLAG_FLOOR_CLIPPED));
    }

    #[test]
    fn pauli_sq_examples() {
        // |0⟩ gives outcomes I and Z.
        let s = set(1, &["I", "Z", "Z", "I"]);
        assert_eq!(pauli_sq_expectation(&s, &"Z".parse().unwrap()).unwrap().value, 1.0);
        assert_eq!(pauli_sq_expectation(&s, &"X".parse().unwrap()).unwrap().value, 0.0);
        // |+i⟩ gives X and Z; Y has eigenvalue 1 on both.
        let s = set(1, &["X", "Z"]);
        assert_eq!(pauli_sq_expectation(&s, &"Y".parse().unwrap()).unwrap().value, 1.0);
    }

    #[test]
    fn filter_and_vd() {
        let s = set(1, &["I", "Y", "Z", "X"]);
        let (acc, rate) = error_detect_filter(&s);
        assert_eq!((acc.len(), rate), (3, 0.25));
        assert_eq!(error_detect_filter(&acc).0, acc);
        let id = PauliVec::identity(1);
        assert_eq!(virtual_distillation(&s, &id, 0.1).unwrap().value, 1.0);
        let bad = set(1, &["Y", "I"]);
        assert!(matches!(virtual_distillation(&bad, &id, 0.1), Err(Error::Unstable(_))));
    }

    #[test]
    fn median_examples() {
        assert_eq!(median_of_means(&[2.0; 10], 3).unwrap(), 2.0);
        assert_eq!(median_of_means(&[1.0, 2.0, 6.0], 1).unwrap(), 3.0);
        let mut v = vec![1.0; 99];
        v.push(1e6);
        assert_eq!(median_of_means(&v, 5).unwrap(), 1.0);
    }

    #[test]
    fn xeb_examples() {
        let uniform = vec![0.25; 4];
        let xs: Vec<BitString> = (0..4).map(|i| BitString::from_index(2, i)).collect();
        let r = xeb(&xs, uniform.as_slice()).unwrap();
        assert!(r.chi.abs() < 1e-12 && r.f_xeb.is_none());
        let delta = vec![0.0, 0.0, 1.0, 0.0];
        let xs = vec![BitString::from_index(2, 2); 5];
        let r = xeb(&xs, delta.as_slice()).unwrap();
        assert_eq!((r.chi, r.chi_ideal, r.f_xeb), (3.0, 3.0, Some(1.0)));
    }

    #[test]
    fn affine_ideal() {
        let a = AffineSampler {
            offset: BitString::parse("100").unwrap(),
            basis: vec![BitString::parse("011").unwrap()],
        };
        assert_eq!(a.prob(&BitString::parse("111").unwrap()), 0.5);
        assert_eq!(a.prob(&BitString::parse("110").unwrap()), 0.0);
        assert_eq!(a.collision(), 0.5);
    }
}
