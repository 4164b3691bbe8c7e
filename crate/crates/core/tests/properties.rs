use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rsed::circuits::{parse, serialize, Gate, GateCircuit};
use rsed::linalg::max_abs_diff;
use rsed::otoc;
use rsed::prs::{self, DensityMatrix};
use rsed::randomness::streams;
use rsed::subsystem;
use rsed::{Evolution, PauliAxis, PauliString, PermutationBackend, RngSeed, RsedOperator, SignBackend, SignFunction, StateVector, SubsetPermutation, SystemShape};

fn shape_strategy() -> impl Strategy<Value = SystemShape> {
    (1u32..=10).prop_flat_map(|n| (Just(n), 1..=n)).prop_map(|(n, k)| SystemShape::new(n, k).unwrap())
}

fn state(n: u32, amps: &[(f64, f64)]) -> StateVector {
    let v = amps.iter().take(1 << n).map(|&(a, b)| C64::new(a, b)).collect();
    let mut psi = StateVector::from_amplitudes(n, v).unwrap();
    psi.normalize();
    psi
}

fn amps(n: u32) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1usize << n).prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a * a + b * b > 1e-6))
}

fn gate(n: u32) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::S),
        q.clone().prop_map(Gate::T),
        (q.clone(), q.clone()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Gate::Cx(a, b)),
        (q.clone(), q.clone(), q).prop_filter("distinct", |(a, b, c)| a != b && b != c && a != c).prop_map(|(a, b, c)| Gate::Ccx(a, b, c)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_join_round_trip(s in shape_strategy(), x in any::<usize>()) {
        let x = x % s.full_dim();
        let (b, a) = s.split(x).unwrap();
        prop_assert!(b < s.sub_dim() && a < s.num_seeds());
        prop_assert_eq!(s.join(b, a).unwrap(), x);
    }

    #[test]
    fn permutations_invert(s in shape_strategy(), seed in any::<u64>(), rounds in 3u32..6, x in any::<usize>()) {
        let x = x % s.full_dim();
        for backend in [PermutationBackend::ExplicitTable, PermutationBackend::Feistel { rounds }] {
            let p = SubsetPermutation::sample(s, RngSeed::new(seed, streams::PERMUTATION), backend).unwrap();
            prop_assert_eq!(p.invert(p.permute(x).unwrap()).unwrap(), x);
            prop_assert_eq!(p.permute(p.invert(x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn operator_preserves_norm(k in 1u32..=4, extra in 0u32..=3, seed in any::<u64>(), a in amps(7)) {
        let n = k + extra;
        let s = SystemShape::new(n, k).unwrap();
        let p = SubsetPermutation::sample(s, RngSeed::new(seed, streams::PERMUTATION), PermutationBackend::Auto).unwrap();
        let f = SignFunction::sample(s, RngSeed::new(seed, streams::SIGN), SignBackend::Auto).unwrap();
        let u = subsystem::random_sign_hadamard(k, RngSeed::new(seed, streams::SUB_SIGN)).unwrap();
        let op = RsedOperator::new(p, f, u).unwrap();
        let psi = state(n, &a);
        let out = op.apply(&psi).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        prop_assert!(op.apply_adjoint(&out).unwrap().max_abs_diff(&psi) < 1e-12);
    }

    #[test]
    fn otoc_is_bounded(k in 1u32..=4, extra in 1u32..=3, seed in any::<u64>(), t in 0.0..4.0f64, i in 0u32..8, j in 0u32..8) {
        let n = k + extra;
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let s = SystemShape::new(n, k).unwrap();
        let p = SubsetPermutation::sample(s, RngSeed::new(seed, streams::PERMUTATION), PermutationBackend::Auto).unwrap();
        let f = SignFunction::sample(s, RngSeed::new(seed, streams::SIGN), SignBackend::Auto).unwrap();
        let u = subsystem::unitary_power(&subsystem::random_sign_hadamard(k, RngSeed::new(seed, streams::SUB_SIGN)).unwrap(), t).unwrap();
        let op = RsedOperator::new(p, f, u).unwrap();
        let o = otoc::otoc_zz_exact(&op, i, j).unwrap();
        prop_assert!(o.value.norm() <= 1.0 + 1e-12);
        let c = o.poisson_bracket();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&c));
    }

    #[test]
    fn pauli_text_round_trip(ops in prop::collection::btree_map(0u32..40, 0u8..3, 0..6)) {
        let ops: Vec<(u32, PauliAxis)> = ops.into_iter().map(|(q, a)| (q, [PauliAxis::X, PauliAxis::Y, PauliAxis::Z][a as usize])).collect();
        let p = PauliString::new(ops).unwrap();
        let back: PauliString = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn circuit_text_round_trip(n in 3u32..8, gates in prop::collection::vec(gate(3), 0..40)) {
        let c = GateCircuit::from_gates(n, gates).unwrap();
        prop_assert_eq!(parse(&serialize(&c)).unwrap(), c);
    }

    #[test]
    fn evolution_group_law(k in 2u32..=5, seed in any::<u64>(), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let h = subsystem::pauli_syk(k, RngSeed::new(seed, streams::COUPLINGS), None).unwrap();
        let a = subsystem::evolve(&h, s).compose(&subsystem::evolve(&h, t)).unwrap();
        let b = subsystem::evolve(&h, s + t);
        prop_assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn trace_distance_is_a_metric(a in amps(3), b in amps(3), c in amps(3)) {
        let rho = |v: &[(f64, f64)]| DensityMatrix::from_pure(&state(3, v)).unwrap();
        let (x, y, z) = (rho(&a), rho(&b), rho(&c));
        let xy = prs::trace_distance(&x, &y).unwrap();
        prop_assert!((xy - prs::trace_distance(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&xy));
        prop_assert!(prs::trace_distance(&x, &x).unwrap() < 1e-9);
        let yz = prs::trace_distance(&y, &z).unwrap();
        let xz = prs::trace_distance(&x, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-9);
    }
}
