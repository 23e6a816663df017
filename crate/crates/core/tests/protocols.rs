use std::path::PathBuf;

use modqec::noise::{CircuitNoise, CoherenceSet, OperationTimes};
use modqec::protocols::{load_protocol, Protocol, ProtocolNode};
use modqec::quantum::{ghz_fidelity, DensityMatrix};
use modqec::schemes::SchemeResult;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/protocols").join(name)
}

/// Isotropic Bell pair λ|Φ+><Φ+| + (1-λ)I/4 with the given fidelity.
fn werner_pair(fidelity: f64) -> SchemeResult {
    let lambda = (4.0 * fidelity - 1.0) / 3.0;
    let mut state = DensityMatrix::ghz(2).scaled(lambda);
    state.add_scaled(&DensityMatrix::maximally_mixed(2), 1.0 - lambda);
    SchemeResult { state, p_succ: 1.0, duration: 1.0 }
}

fn noiseless_run(p: &Protocol, bell: &SchemeResult) -> SchemeResult {
    p.execute(bell, &CircuitNoise::noiseless(), &OperationTimes::default(), &CoherenceSet::infinite()).unwrap()
}

/// Real 4-qubit density matrix on (A, B1, B2, C), qubit 0 most significant.
type Real16 = [[f64; 16]; 16];

fn werner_real(fidelity: f64) -> [[f64; 4]; 4] {
    let lambda = (4.0 * fidelity - 1.0) / 3.0;
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += (1.0 - lambda) / 4.0;
    }
    for &i in &[0, 3] {
        for &j in &[0, 3] {
            m[i][j] += lambda / 2.0;
        }
    }
    m
}

/// Two pairs fused at B by CNOT(B1 -> B2), Z readout of B2 and an X fix on C.
fn fused_fidelity_oracle(fidelity: f64) -> f64 {
    let w = werner_real(fidelity);
    let mut rho: Real16 = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            rho[i][j] = w[i >> 2][j >> 2] * w[i & 3][j & 3];
        }
    }
    let cnot = |x: usize| if x & 0b0100 != 0 { x ^ 0b0010 } else { x };
    let mut after: Real16 = [[0.0; 16]; 16];
    for i in 0..16 {
        for j in 0..16 {
            after[cnot(i)][cnot(j)] = rho[i][j];
        }
    }
    // keep (A, B1, C) after conditioning on B2 and flipping C when B2 = 1
    let mut out = [[0.0; 8]; 8];
    for i in 0..16 {
        for j in 0..16 {
            let (bi, bj) = (i >> 1 & 1, j >> 1 & 1);
            if bi != bj {
                continue;
            }
            let reduce = |x: usize| {
                let c = (x & 1) ^ (x >> 1 & 1);
                ((x >> 2) << 1) | c
            };
            out[reduce(i)][reduce(j)] += after[i][j];
        }
    }
    (out[0][0] + out[7][7] + out[0][7] + out[7][0]) / 2.0
}

#[test]
fn werner_fusion_matches_direct_simulation() {
    let p: Protocol = "(protocol (k 2) (max-aux 2) (fuse B (link A B) (link B C)))".parse().unwrap();
    for f in [0.9, 0.75, 0.99] {
        let got = noiseless_run(&p, &werner_pair(f)).fidelity();
        let want = fused_fidelity_oracle(f);
        assert!((got - want).abs() < 1e-12, "F={f}: {got} vs {want}");
    }
}

#[test]
fn example_protocols_are_valid() {
    for (file, k, modules) in [
        ("ghz3_abc.proto", 5, 3),
        ("ghz3_plain.proto", 2, 3),
        ("ghz4_chain.proto", 3, 4),
        ("ghz4_distilled.proto", 6, 4),
    ] {
        let p = load_protocol(&example(file)).unwrap_or_else(|e| panic!("{file}: {e}"));
        assert_eq!(p.k, k, "{file}");
        assert_eq!(p.modules().len(), modules, "{file}");
        let r = noiseless_run(&p, &werner_pair(1.0));
        assert!((r.fidelity() - 1.0).abs() < 1e-10, "{file}");
    }
}

#[test]
fn duration_matches_sampled_link_waiting() {
    let p = load_protocol(&example("ghz3_abc.proto")).unwrap();
    let times = OperationTimes::default();
    let p_link = 0.1;
    let overhead = p.expected_duration(1.0, &times).unwrap() - p.k as f64 * times.t_link;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let samples = 200_000;
    let mut total = 0.0;
    for _ in 0..samples {
        let mut t = overhead;
        for _ in 0..p.k {
            let mut attempts = 1;
            while rng.random::<f64>() >= p_link {
                attempts += 1;
            }
            t += attempts as f64 * times.t_link;
        }
        total += t;
    }
    let sampled = total / samples as f64;
    let model = p.expected_duration(p_link, &times).unwrap();
    assert!((model - sampled).abs() / sampled < 0.02, "{model} vs {sampled}");
}

const LABELS: [&str; 4] = ["A", "B", "C", "D"];

fn module_set(node: &ProtocolNode) -> Vec<String> {
    node.modules().iter().map(|m| m.as_str().to_string()).collect()
}

/// Every tree with exactly k links over modules A..D whose distillation operators stabilize a GHZ state.
fn trees(k: usize) -> Vec<ProtocolNode> {
    let mut out = Vec::new();
    if k == 1 {
        for i in 0..LABELS.len() {
            for j in i + 1..LABELS.len() {
                out.push(ProtocolNode::link(LABELS[i], LABELS[j]).unwrap());
            }
        }
        return out;
    }
    for k1 in 1..k {
        let (left, right) = (trees(k1), trees(k - k1));
        for a in &left {
            let ma = module_set(a);
            for b in &right {
                let mb = module_set(b);
                let shared: Vec<&String> = ma.iter().filter(|m| mb.contains(m)).collect();
                if shared.len() == 1 {
                    if let Ok(f) = ProtocolNode::fuse(shared[0], a.clone(), b.clone()) {
                        out.push(f);
                    }
                }
                if mb.iter().all(|m| ma.contains(m)) {
                    let mut ops = vec!["Z".repeat(mb.len())];
                    if mb.len() == ma.len() {
                        ops.push("X".repeat(mb.len()));
                    }
                    for op in ops {
                        if mb.len() == 2 || op.starts_with('X') {
                            if let Ok(d) = ProtocolNode::distill(a.clone(), b.clone(), &op) {
                                out.push(d);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[test]
fn noiseless_inputs_give_perfect_ghz_for_small_protocols() {
    let bell = werner_pair(1.0);
    let mut checked = 0;
    for k in 1..=4 {
        for root in trees(k) {
            let p = Protocol::new(root, 2);
            if p.validate().is_err() {
                continue;
            }
            let r = noiseless_run(&p, &bell);
            assert!((r.fidelity() - 1.0).abs() < 1e-10, "{p}: F = {}", r.fidelity());
            assert!((r.p_succ - 1.0).abs() < 1e-10, "{p}: p_succ = {}", r.p_succ);
            checked += 1;
        }
    }
    assert!(checked > 100, "only {checked} protocols enumerated");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zz_distillation_raises_werner_fidelity(f in 0.55f64..0.99) {
        let p: Protocol = "(protocol (k 2) (max-aux 2) (distill (link A B) (link A B) ZZ))".parse().unwrap();
        let r = noiseless_run(&p, &werner_pair(f));
        prop_assert!(r.p_succ > 0.0 && r.p_succ <= 1.0);
        prop_assert!(r.state.trace() <= 1.0 + 1e-9);
        prop_assert!(ghz_fidelity(&r.state) > f);
    }

    #[test]
    fn noisy_execution_stays_physical(f in 0.6f64..1.0, p in 0.0f64..0.02, t in 10.0f64..1e4) {
        let proto = load_protocol(&example("ghz3_abc.proto")).unwrap();
        let coherence = CoherenceSet { t1_link: t, t2_link: t / 10.0, t1_idle: 10.0 * t, t2_idle: t, ..CoherenceSet::infinite() };
        let r = proto
            .execute(&werner_pair(f), &CircuitNoise::uniform(p).unwrap(), &OperationTimes::default(), &coherence)
            .unwrap();
        prop_assert!(r.p_succ > 0.0 && r.p_succ <= 1.0);
        prop_assert!(r.state.validate().is_ok());
        prop_assert!((r.state.trace() - 1.0).abs() < 1e-9);
        prop_assert!(r.duration > 0.0);
    }
}
