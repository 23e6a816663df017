use std::collections::BTreeMap;

use modqec::decoders::{decode, DecoderKind, DefectGraph};
use modqec::noise::{CircuitNoise, CoherenceSet, OperationTimes};
use modqec::quantum::{DensityMatrix, Pauli};
use modqec::schemes::SchemeResult;
use modqec::superop::{build_table, Architecture, StabilizerType, SuperoperatorTable, N_ERRORS};
use modqec::surface::{compute_defects, run_trial, ErrorSampler, PauliFrame, SubRound, ToricLayout, Trial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arch_strategy() -> impl Strategy<Value = Architecture> {
    prop_oneof![Just(Architecture::Wt4), Just(Architecture::Wt3)]
}

fn noisy_table(arch: Architecture, p: f64) -> SuperoperatorTable {
    let n = arch.ghz_size();
    let mut state = DensityMatrix::ghz(n).scaled(0.95);
    state.add_scaled(&DensityMatrix::maximally_mixed(n), 0.05);
    let ghz = SchemeResult { state, p_succ: 0.5, duration: 1.0 };
    let coherence = CoherenceSet::resolve("Set-1").unwrap();
    build_table(arch, &ghz, &CircuitNoise::uniform(p).unwrap(), &OperationTimes::default(), &coherence, 4.0, BTreeMap::new())
        .unwrap()
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|q| b.contains(q)).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn layout_is_a_toric_code(arch in arch_strategy(), half in 2usize..=5) {
        let d = 2 * half;
        let layout = ToricLayout::new(arch, d).unwrap();
        for stab in StabilizerType::BOTH {
            let mut count = vec![0; layout.n_data()];
            for s in 0..layout.n_stabilizers() {
                for &q in layout.support(stab, s) {
                    count[q] += 1;
                }
            }
            prop_assert!(count.iter().all(|&c| c == 2));
        }
        for p in 0..layout.n_stabilizers() {
            for v in 0..layout.n_stabilizers() {
                let o = overlap(layout.support(StabilizerType::Plaquette, p), layout.support(StabilizerType::Vertex, v));
                prop_assert_eq!(o % 2, 0);
            }
        }
        let logicals = layout.logicals();
        for (pauli, support) in &logicals {
            prop_assert_eq!(support.len(), d);
            let commuting = if *pauli == Pauli::Z { StabilizerType::Vertex } else { StabilizerType::Plaquette };
            for s in 0..layout.n_stabilizers() {
                prop_assert_eq!(overlap(support, layout.support(commuting, s)) % 2, 0);
            }
        }
        // Z_1 pairs with X_2 and Z_2 with X_1
        let parity = |a: usize, b: usize| overlap(&logicals[a].1, &logicals[b].1) % 2;
        prop_assert_eq!((parity(0, 3), parity(1, 2), parity(0, 2), parity(1, 3)), (1, 1, 0, 0));
        let expected_modules = if arch == Architecture::Wt4 { 2 * d * d } else { d * d };
        prop_assert_eq!(layout.n_modules(), expected_modules);
        let mut measured = vec![vec![0; layout.n_stabilizers()]; 2];
        for sub in &layout.subrounds {
            for &s in &sub.stabilizers {
                measured[modqec::surface::type_index(sub.stab)][s] += 1;
            }
        }
        prop_assert!(measured.iter().flatten().all(|&m| m == 1));
    }

    #[test]
    fn defects_come_in_pairs(
        arch in arch_strategy(),
        errors in proptest::collection::vec((0usize..4, 0usize..72, 1usize..4), 0..20),
    ) {
        let layout = ToricLayout::new(arch, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut trial = Trial::new(&layout);
        for layer in 0..layout.d {
            for &(at, q, p) in &errors {
                if at == layer % 4 {
                    trial.frame.apply(q, Pauli::ALL[p]);
                }
            }
            trial.run_layer(None, &mut rng);
        }
        trial.run_layer(None, &mut rng);
        for (t, defects) in compute_defects(&trial.history, layout.d).iter().enumerate() {
            prop_assert_eq!(defects.len() % 2, 0);
            let stab = StabilizerType::BOTH[t];
            let flipped = layout.syndrome(&trial.frame, stab).iter().filter(|&&b| b).count();
            prop_assert!(defects.len() >= flipped);
        }
    }

    #[test]
    fn decoding_clears_the_syndrome(arch in arch_strategy(), seed in any::<u64>(), mwpm in any::<bool>()) {
        let layout = ToricLayout::new(arch, 4).unwrap();
        let sampler = ErrorSampler::new(&noisy_table(arch, 0.01)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (history, frame) = run_trial(&layout, &sampler, &mut rng).unwrap();
        let kind = if mwpm { DecoderKind::Mwpm } else { DecoderKind::UnionFind };
        let mut correction = PauliFrame::new(layout.n_data());
        for (t, defects) in compute_defects(&history, layout.d).into_iter().enumerate() {
            prop_assert_eq!(defects.len() % 2, 0);
            let graph = DefectGraph::new(layout.d, layout.d + 1, StabilizerType::BOTH[t], defects).unwrap();
            decode(kind, &layout, &graph).unwrap().apply_to(&mut correction);
        }
        let residual = frame.xor(&correction);
        for stab in StabilizerType::BOTH {
            prop_assert!(layout.syndrome(&residual, stab).iter().all(|&b| !b));
        }
    }
}

/// Observed category of one sampled stabilizer: (error index, ghz success, flag). Flags are
/// unobservable on failure, so failures collapse onto flag = false.
fn observe(layout: &ToricLayout, sampler: &ErrorSampler, stab: StabilizerType, rng: &mut ChaCha8Rng) -> (usize, bool, bool) {
    let mut trial = Trial::new(layout);
    trial.run_subround(&SubRound { stab, stabilizers: vec![0] }, Some(sampler), rng);
    trial.end_layer();
    let t = modqec::surface::type_index(stab);
    let support = layout.support(stab, 0);
    let error = support.iter().fold(0usize, |acc, &q| {
        let p = Pauli::from_bits(trial.frame.x[q], trial.frame.z[q]);
        acc * 4 + p.index()
    });
    let ghz = !trial.history.ghz_failures[0][t][0];
    let flag = ghz && (trial.history.outcomes[0][t][0] != trial.frame.parity(stab, support));
    (error, ghz, flag)
}

#[test]
fn sampled_rows_follow_the_table() {
    let table = noisy_table(Architecture::Wt4, 0.02);
    let sampler = ErrorSampler::new(&table).unwrap();
    let layout = ToricLayout::new(Architecture::Wt4, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let samples = 200_000usize;
    for stab in StabilizerType::BOTH {
        let mut expected: BTreeMap<(usize, bool, bool), f64> = BTreeMap::new();
        for row in &table.rows {
            let key = (row.error.index(), row.ghz_success, row.ghz_success && row.meas_error);
            *expected.entry(key).or_default() += row.probability(stab);
        }
        let mut observed: BTreeMap<(usize, bool, bool), usize> = BTreeMap::new();
        for _ in 0..samples {
            *observed.entry(observe(&layout, &sampler, stab, &mut rng)).or_default() += 1;
        }
        // chi-square over well-populated cells, everything else lumped
        let (mut chi2, mut df) = (0.0, 0usize);
        let (mut rest_e, mut rest_o) = (0.0, 0.0);
        for (key, &p) in &expected {
            let e = p * samples as f64;
            let o = *observed.get(key).unwrap_or(&0) as f64;
            if e >= 10.0 {
                chi2 += (o - e).powi(2) / e;
                df += 1;
            } else {
                rest_e += e;
                rest_o += o;
            }
        }
        for (key, &o) in &observed {
            if !expected.contains_key(key) {
                panic!("sampled impossible category {key:?} ({o} times)");
            }
        }
        if rest_e > 0.0 {
            chi2 += (rest_o - rest_e).powi(2) / rest_e;
            df += 1;
        }
        let df = (df - 1) as f64;
        assert!(df > 10.0, "too few populated cells");
        // about five standard deviations above the mean
        let limit = df + 5.0 * (2.0 * df).sqrt();
        assert!(chi2 < limit, "{stab:?}: chi2 = {chi2:.1} with {df} dof");
    }
    assert_eq!(table.rows.len(), N_ERRORS * 4);
}
