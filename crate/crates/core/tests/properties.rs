//! Property suites for the invariants of every module.

use bellsim::circuit::{self, Circuit, GateKind};
use bellsim::estimators::{
    error_detect_filter, overlap_estimate, pauli_sq_expectation, subsystem_purity, virtual_distillation,
};
use bellsim::noise::{attach_noise, purity_to_fidelity_channel, randomized_compile, PauliChannel};
use bellsim::protocols::{self, clifford_from_isotropic, depth_test_max_on, magic_estimate, DifferenceMode};
use bellsim::rng;
use bellsim::stabilizer::{bell_sample_clifford, exact_subsystem_renyi2, simulate_tableau};
use bellsim::statevector::{
    bell_distribution_exact, evolve_density, exact_fidelity, simulate_state, DensityMatrix, StateVec,
};
use bellsim::symplectic::{span, symplectic_product, F2Subspace, PauliVec};
use bellsim::{BellSampleSet, NoiseSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng as _;

fn pauli(n: usize) -> impl Strategy<Value = PauliVec> {
    (0u64..1 << (2 * n)).prop_map(move |i| PauliVec::from_index(n, i))
}

fn clifford() -> impl Strategy<Value = Circuit> {
    (2usize..=6, 1usize..6, any::<u64>()).prop_map(|(n, l, s)| circuit::random_all_to_all_clifford(n, l, s).unwrap())
}

fn small_universal() -> impl Strategy<Value = Circuit> {
    (1usize..=4, 0usize..3, 1usize..4, any::<u64>())
        .prop_map(|(n, t, d, s)| circuit::clifford_plus_t_random(n, t, d, s).unwrap())
}

fn channel() -> impl Strategy<Value = PauliChannel> {
    prop::array::uniform4(0.0f64..1.0).prop_map(|w| {
        let s: f64 = w.iter().sum::<f64>().max(1e-9);
        PauliChannel::new([w[0] / s, w[1] / s, w[2] / s, 1.0 - (w[0] + w[1] + w[2]) / s]).unwrap()
    })
}

fn subset(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), n).prop_map(|b| (0..b.len()).filter(|&i| b[i]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // circuit_model

    #[test]
    fn generators_round_trip_and_are_deterministic(n in 2usize..8, d in 1usize..5, t in 0usize..3, seed: u64) {
        let circuits = [
            circuit::random_all_to_all_clifford(n, d, seed).unwrap(),
            circuit::brickwork_clifford(n, d, n > 2, seed).unwrap(),
            circuit::clifford_plus_t_random(n, t, d, seed).unwrap(),
        ];
        let again = [
            circuit::random_all_to_all_clifford(n, d, seed).unwrap(),
            circuit::brickwork_clifford(n, d, n > 2, seed).unwrap(),
            circuit::clifford_plus_t_random(n, t, d, seed).unwrap(),
        ];
        for (c, c2) in circuits.iter().zip(&again) {
            prop_assert_eq!(c, c2);
            prop_assert_eq!(&Circuit::from_json(&c.to_json()).unwrap(), c);
            let layers = c.layers();
            prop_assert!(layers.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(layers.last().is_none_or(|&e| e <= c.len()));
            prop_assert!(c.gates().iter().all(|g| g.qubits.iter().all(|&q| q < n)));
        }
        prop_assert!(circuit::clifford_plus_t_random(n, 0, d, seed).unwrap().is_clifford());
        let g = circuit::bqp_gadget(&circuits[2]).unwrap();
        prop_assert_eq!(g.num_qubits(), n + 1);
        let last = g.gates().last().unwrap();
        let diagonal = matches!(&last.kind, GateKind::PauliRot { axis, .. }
            if axis.iter().all(|p| matches!(p, bellsim::Pauli::I | bellsim::Pauli::Z)));
        prop_assert!(diagonal);
        prop_assert_eq!(last.qubits[0], 0);
    }

    #[test]
    fn boundary_is_positive_for_proper_subsystems(n in 2usize..10, a in subset(10), start in 0usize..10, len in 1usize..10) {
        let a: Vec<usize> = a.into_iter().filter(|&q| q < n).collect();
        if !a.is_empty() && a.len() < n {
            prop_assert!(circuit::Architecture::AllToAll.boundary_edges(n, &a).unwrap() >= 1);
        }
        let len = len.min(n - 1);
        let start = start.min(n - len);
        let interval: Vec<usize> = (start..start + len).collect();
        for closed in [false, true] {
            let arch = circuit::Architecture::Chain1D { closed };
            prop_assert!(arch.boundary_edges(n, &interval).unwrap() >= 1);
        }
    }

    // f2_symplectic

    #[test]
    fn omega_is_bilinear_and_alternating(a in pauli(5), b in pauli(5), c in pauli(5)) {
        let w = |x: &PauliVec, y: &PauliVec| symplectic_product(x, y).unwrap();
        prop_assert!(!w(&a, &a));
        prop_assert_eq!(w(&a, &b), w(&b, &a));
        prop_assert_eq!(w(&a.xor(&b), &c), w(&a, &c) ^ w(&b, &c));
        prop_assert_eq!(a.commutes_with(&b), !w(&a, &b));
    }

    #[test]
    fn radical_is_orthogonal_part(n in 1usize..=4, raw in prop::collection::vec(any::<u64>(), 0..8)) {
        let vs: Vec<PauliVec> = raw.iter().map(|r| PauliVec::from_index(n, r & ((1 << (2 * n)) - 1))).collect();
        let h = span(n, &vs).unwrap();
        let rad = h.radical();
        let elems = h.elements();
        for c in rad.elements() {
            prop_assert!(h.contains(&c));
            prop_assert!(elems.iter().all(|e| c.commutes_with(e)));
        }
        let brute = elems.iter().filter(|c| elems.iter().all(|e| c.commutes_with(e))).count();
        prop_assert_eq!(brute, 1 << rad.dim());
        // rad = H ∩ H^⊥, and H / rad carries a nondegenerate form.
        prop_assert!(rad.dim() + h.dim() <= 2 * n);
        prop_assert_eq!((h.dim() - rad.dim()) % 2, 0);
        prop_assert_eq!(span(n, h.basis()).unwrap(), h.clone());
        prop_assert!(h.dim() <= 2 * n);
    }

    #[test]
    fn radical_bound_over_stabilizer_groups(c in clifford(), extra in prop::collection::vec(any::<u64>(), 0..4)) {
        let n = c.num_qubits();
        let t = simulate_tableau(&c).unwrap();
        let mut h = t.stabilizer_subspace();
        for e in &extra {
            h.insert(&PauliVec::from_index(n, e & ((1 << (2 * n)) - 1)));
        }
        // H contains a Lagrangian S, so H^⊥ ⊆ S ⊆ H and rad = H^⊥.
        prop_assert_eq!(h.radical().dim() + h.dim(), 2 * n);
    }

    // stabilizer_engine

    #[test]
    fn tableau_rows_are_a_valid_frame(c in clifford()) {
        let n = c.num_qubits();
        let t = simulate_tableau(&c).unwrap();
        let (s, d) = (t.stabilizers(), t.destabilizers());
        prop_assert_eq!(t.stabilizer_subspace().dim(), n);
        for i in 0..n {
            for j in 0..n {
                prop_assert!(s[i].commutes_with(&s[j]));
                prop_assert_eq!(d[i].commutes_with(&s[j]), i != j);
            }
        }
    }

    #[test]
    fn noiseless_bell_samples_have_even_parity(c in clifford(), m in 1usize..3000, seed: u64) {
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), m, seed).unwrap();
        prop_assert_eq!(s.len(), m);
        prop_assert!(s.iter().all(|r| !r.y_parity()));
        prop_assert_eq!(error_detect_filter(&s).1, 0.0);
    }

    #[test]
    fn renyi2_duality(c in clifford(), a in subset(6)) {
        let n = c.num_qubits();
        let a: Vec<usize> = a.into_iter().filter(|&q| q < n).collect();
        let comp: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
        prop_assert_eq!(exact_subsystem_renyi2(&c, &a).unwrap(), exact_subsystem_renyi2(&c, &comp).unwrap());
    }

    #[test]
    fn tableau_agrees_with_statevector(n in 2usize..=4, l in 1usize..5, seed: u64, p in pauli(4)) {
        let c = circuit::random_all_to_all_clifford(n, l, seed).unwrap();
        let p = p.restrict(&(0..n).collect::<Vec<_>>());
        let t = simulate_tableau(&c).unwrap().pauli_expectation(&p).unwrap() as f64;
        let s = simulate_state(&c).unwrap().pauli_expectation(&p).unwrap();
        prop_assert!((t - s).abs() < 1e-9);
    }

    // statevector_engine

    #[test]
    fn exact_bell_table_is_a_distribution(c in small_universal()) {
        let n = c.num_qubits();
        let t = bell_distribution_exact(&c).unwrap();
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (i, p) in t.iter().enumerate() {
            prop_assert!(*p >= 0.0);
            if PauliVec::from_index(n, i as u64).y_parity() {
                prop_assert!(*p < 1e-12);
            }
        }
    }

    #[test]
    fn states_and_densities_are_physical(c in small_universal(), ch in channel(), eps in 0.0f64..0.3) {
        let s = simulate_state(&c).unwrap();
        let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-9);
        let pure = DensityMatrix::from_pure(&s).unwrap();
        prop_assert!((exact_fidelity(&pure, &c).unwrap() - 1.0).abs() < 1e-9);
        let ch = PauliChannel::new([1.0 - eps + eps * ch.p[0], eps * ch.p[1], eps * ch.p[2], eps * ch.p[3]]).unwrap();
        let rho = evolve_density(&c, &attach_noise(&c, ch, None)).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-9 && rho.trace().im.abs() < 1e-9);
        let m = rho.to_matrix();
        prop_assert!((&m - m.adjoint()).camax() < 1e-9);
        let lambda_min = m.symmetric_eigenvalues().min();
        prop_assert!(lambda_min >= -1e-9);
        let f = exact_fidelity(&rho, &c).unwrap();
        prop_assert!(f <= 1.0 + 1e-9);
        // Fidelity with a pure target is bounded by the largest eigenvalue.
        prop_assert!(f <= m.symmetric_eigenvalues().max() + 1e-9);
        if c.two_qubit_count() > 0 && eps > 1e-3 && ch.p[0] < 1.0 - 1e-6 {
            prop_assert!(f < 1.0 - 1e-12);
        }
    }

    // noise_model

    #[test]
    fn channels_are_normalized(ch in channel(), other in channel()) {
        for c in [ch, ch.compose(&other), purity_to_fidelity_channel(&ch)] {
            prop_assert!(c.p.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((c.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(purity_to_fidelity_channel(&ch), ch.compose(&ch));
    }

    #[test]
    fn default_placement_has_two_locations_per_gate(c in clifford(), ch in channel()) {
        let spec = attach_noise(&c, ch, None);
        let locations: usize = c.gates().iter().filter(|g| spec.channel_for(g).is_some()).map(|g| g.qubits.len()).sum();
        prop_assert_eq!(locations, 2 * c.two_qubit_count());
    }

    #[test]
    fn randomized_compile_preserves_the_state(c in clifford(), seed: u64) {
        let compiled = randomized_compile(&c, seed).unwrap();
        prop_assert_eq!(compiled.unwrapped, 0);
        let a = simulate_tableau(&c).unwrap().canonical_stabilizers();
        let b = simulate_tableau(&compiled.circuit).unwrap().canonical_stabilizers();
        prop_assert_eq!(a, b);
        let mut r = rng::rng_from_seed(seed);
        let x = StateVec::random(c.num_qubits(), &mut r).unwrap();
        let (mut y1, mut y2) = (x.clone(), x);
        y1.apply_circuit(&c).unwrap();
        y2.apply_circuit(&compiled.circuit).unwrap();
        prop_assert!((y1.fidelity(&y2).unwrap() - 1.0).abs() < 1e-9);
    }

    // estimators

    #[test]
    fn overlap_is_a_signed_count(c in clifford(), ch in channel(), seed: u64) {
        let noise = attach_noise(&c, PauliChannel::new([0.9 + 0.1 * ch.p[0], 0.1 * ch.p[1], 0.1 * ch.p[2], 0.1 * ch.p[3]]).unwrap(), None);
        let s = bell_sample_clifford(&c, &noise, 500, seed).unwrap();
        let est = overlap_estimate(&s).unwrap();
        let odd = s.iter().filter(|r| r.y_parity()).count() as f64;
        prop_assert_eq!(est.value, (500.0 - 2.0 * odd) / 500.0);
        prop_assert!(est.std_error >= 0.0 && est.m_used <= 500);
        let mut rows: Vec<PauliVec> = s.iter().collect();
        rows.shuffle(&mut rng::rng_from_seed(seed));
        let mut shuffled = BellSampleSet::new(s.num_qubits());
        for r in &rows {
            shuffled.push(r).unwrap();
        }
        prop_assert_eq!(overlap_estimate(&shuffled).unwrap(), est.clone());
        let all: Vec<usize> = (0..s.num_qubits()).collect();
        prop_assert_eq!(subsystem_purity(&s, &all).unwrap(), est);
        let (kept, _) = error_detect_filter(&s);
        prop_assert!(kept.iter().all(|r| !r.y_parity()));
        let (again, rate) = error_detect_filter(&kept);
        prop_assert_eq!(rate, 0.0);
        prop_assert_eq!(again.len(), kept.len());
        let id = PauliVec::identity(s.num_qubits());
        if let Ok(vd) = virtual_distillation(&s, &id, 0.0) {
            prop_assert_eq!(vd.value, 1.0);
        }
    }

    #[test]
    fn pure_state_duality_on_shared_samples(c in clifford(), a in subset(6), seed: u64) {
        let n = c.num_qubits();
        let a: Vec<usize> = a.into_iter().filter(|&q| q < n).collect();
        prop_assume!(!a.is_empty() && a.len() < n);
        let comp: Vec<usize> = (0..n).filter(|q| !a.contains(q)).collect();
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), 4000, seed).unwrap();
        let pa = subsystem_purity(&s, &a).unwrap();
        let pc = subsystem_purity(&s, &comp).unwrap();
        let exact = 0.5f64.powi(exact_subsystem_renyi2(&c, &a).unwrap() as i32);
        let se = (pa.std_error.powi(2) + pc.std_error.powi(2)).sqrt().max(1e-3);
        prop_assert!((pa.value - pc.value).abs() <= 5.0 * se);
        prop_assert!((pa.value - exact).abs() <= 5.0 * pa.std_error.max(1e-3));
    }

    #[test]
    fn stabilizer_squares_are_exact(c in clifford(), pick: u64, seed: u64) {
        let t = simulate_tableau(&c).unwrap();
        let (p, _) = t.stabilizer_element(|i| pick >> i & 1 == 1);
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), 300, seed).unwrap();
        let e = pauli_sq_expectation(&s, &p).unwrap();
        prop_assert_eq!(e.value, 1.0);
        prop_assert_eq!(e.std_error, 0.0);
    }

    // protocols

    #[test]
    fn magic_span_is_monotone(c in small_universal(), seed: u64, cut in 2usize..200) {
        let s = bellsim::statevector::bell_sample_dense(&simulate_state(&c).unwrap(), &simulate_state(&c).unwrap(), 200, seed).unwrap();
        let sub = s.truncated(cut);
        for mode in [DifferenceMode::AllPairs, DifferenceMode::Disjoint] {
            let big = protocols::difference_span(&s, mode).unwrap();
            let small = protocols::difference_span(&sub, mode).unwrap();
            prop_assert!(small.basis().iter().all(|b| big.contains(b)));
        }
        let small = magic_estimate(&sub).unwrap();
        let big = magic_estimate(&s).unwrap();
        prop_assert!(small.t_hat <= big.t_hat);
        prop_assert!(big.t_hat <= c.count_kind("T") + c.count_kind("TDG"));
        prop_assert!(big.g_prime.dim() <= c.num_qubits() + c.num_qubits());
    }

    #[test]
    fn radical_elements_have_unit_squares(c in small_universal(), seed: u64) {
        let psi = simulate_state(&c).unwrap();
        let s = bellsim::statevector::bell_sample_dense(&psi, &psi, 400, seed).unwrap();
        let g = protocols::difference_span(&s, DifferenceMode::AllPairs).unwrap();
        for r in g.radical().elements() {
            prop_assert_eq!(pauli_sq_expectation(&s, &r).unwrap().value, 1.0);
        }
    }

    #[test]
    fn synthesis_conjugates_to_z(c in clifford(), k in 1usize..6, pick: u64) {
        let n = c.num_qubits();
        let k = k.min(n);
        let t = simulate_tableau(&c).unwrap();
        // A random basis of a k-dimensional subgroup of the stabilizer group.
        let mut gens: Vec<PauliVec> = Vec::new();
        let mut space = F2Subspace::zero(n);
        let mut salt = pick;
        while gens.len() < k {
            salt = rng::splitmix64(salt);
            let (p, _) = t.stabilizer_element(|i| salt >> i & 1 == 1);
            if space.insert(&p) {
                gens.push(p);
            }
        }
        let synth = clifford_from_isotropic(n, &gens).unwrap();
        let mut tab = bellsim::stabilizer::PauliTable::from_rows(n, gens, vec![false; k]);
        tab.apply_circuit(&synth.circuit).unwrap();
        for (i, row) in tab.rows().iter().enumerate() {
            prop_assert_eq!(row, &PauliVec::single(n, i, bellsim::Pauli::Z));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn depth_test_is_sound(d in 1usize..=4, seed: u64) {
        let n = 8;
        let arch = circuit::Architecture::Chain1D { closed: true };
        let c = circuit::brickwork_clifford(n, d, true, seed).unwrap();
        let s = bell_sample_clifford(&c, &NoiseSpec::noiseless(), 100_000, seed).unwrap();
        let r = depth_test_max_on(&s, &arch, &protocols::default_subsystem(n), None).unwrap();
        prop_assert!(r.d_lower <= d);
    }

    #[test]
    fn t_count_bounds_nullity(n in 1usize..=4, t in 0usize..=2, seed: u64) {
        let c = circuit::clifford_plus_t_random(n, t, 3, seed).unwrap();
        let psi = simulate_state(&c).unwrap();
        let s = bellsim::statevector::bell_sample_dense(&psi, &psi, 2000, seed).unwrap();
        let m = magic_estimate(&s).unwrap();
        prop_assert!(m.t_hat <= t);
        prop_assert!(m.nullity <= t);
    }
}

/// Missed weight of the difference span on a planted nonuniform law over a
/// subspace stays below ε in at least a 1 − δ fraction of trials.
#[test]
fn weighted_subspace_generation() {
    let n = 8usize;
    let (eps, delta) = (0.05f64, 0.1f64);
    let nf = n as f64;
    let m = (2.0 * nf * nf.ln() * (2.0 / delta).ln() / eps).ceil() as usize;
    let trials = 200;
    let mut r = rng::rng_from_seed(17);
    let mut bad = 0;
    for _ in 0..trials {
        let k = r.random_range(3..=8);
        let mut basis = Vec::new();
        let mut space = F2Subspace::zero(n);
        while basis.len() < k {
            let v = PauliVec::from_index(n, r.random::<u64>() & 0xffff);
            if space.insert(&v) {
                basis.push(v);
            }
        }
        let elems = space.elements();
        // Geometric weights in a random order give a heavy head and a light tail.
        let mut w: Vec<f64> = (0..elems.len()).map(|i| 0.7f64.powi(i as i32)).collect();
        w.shuffle(&mut r);
        let total: f64 = w.iter().sum();
        let cdf: Vec<f64> = w
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x / total;
                Some(*acc)
            })
            .collect();
        let draw = |r: &mut rng::Rng| {
            let u: f64 = r.random();
            let i = cdf.partition_point(|c| *c < u).min(elems.len() - 1);
            elems[i].clone()
        };
        let mut g = F2Subspace::zero(n);
        for _ in 0..m {
            g.insert(&draw(&mut r));
        }
        let missed: f64 = elems.iter().zip(&w).filter(|(e, _)| !g.contains(e)).map(|(_, x)| x / total).sum();
        if missed >= eps {
            bad += 1;
        }
    }
    assert!((bad as f64) <= delta * trials as f64, "{bad}/{trials} trials missed ≥ ε weight with M = {m}");
}
