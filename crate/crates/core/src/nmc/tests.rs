use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::codes::reed_solomon_code;
use crate::prob::to_f64;
use crate::seed::SeedTree;
use crate::tamper::{ao_sample, privacy_breaker, tamper_sample, AoTamperFunction, SampleMode, TamperFunction};
use crate::wiretap::mc_half_width;

fn rs_construction2() -> NmCode {
    let field = Field::new(4).unwrap();
    let wt = wt_build(&reed_solomon_code(&field, 5, 3).unwrap(), 0).unwrap();
    NmCode::construction2(wt, amd_for_bits(8).unwrap(), 1, 5).unwrap()
}

fn binary_adversaries(code: &NmCode, read: usize, count: u64, seed: u64) -> Vec<TamperFunction> {
    let n = code.n();
    let root = SeedTree::new(seed);
    (0..count)
        .map(|i| {
            let mode = if i % 2 == 0 { SampleMode::Uniform } else { SampleMode::Structured };
            let rw = (1 + i as usize % n) as f64 / n as f64;
            tamper_sample(n, read as f64 / n as f64, rw, mode, &root.index(i)).unwrap()
        })
        .collect()
}

fn qary_adversaries(code: &NmCode, read: usize, count: u64, seed: u64) -> Vec<AoTamperFunction> {
    let root = SeedTree::new(seed);
    (0..count)
        .map(|i| {
            let mode = if i % 2 == 0 { SampleMode::Uniform } else { SampleMode::Structured };
            ao_sample(code.field(), code.n(), read, mode, &root.index(i)).unwrap()
        })
        .collect()
}

fn all_messages(code: &NmCode) -> impl Iterator<Item = u64> {
    0..1u64 << code.k()
}

fn check_against_reference<A: Adversary>(code: &NmCode, f: &A) {
    for m in all_messages(code) {
        let fast = tamper_experiment(code, f, m, &EvalMode::Exact).unwrap();
        let slow = reference_tamper_experiment(code, f, m).unwrap();
        assert_eq!(fast, slow, "tamper m={m} f={}", f.describe());
        let fast = strong_experiment(code, f, m, &EvalMode::Exact).unwrap();
        let slow = reference_strong_experiment(code, f, m).unwrap();
        assert_eq!(fast, slow, "strong m={m} f={}", f.describe());
    }
    let fast = simulator(code, f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
    let slow = reference_simulator(code, f, SameStarRule::ZeroLabel).unwrap();
    assert_eq!(statistical_distance(&fast, &slow, false).unwrap(), exact(0, 1), "simulator f={}", f.describe());
}

#[test]
fn packed_matches_vector_path() {
    for code in [hamming_construction2(3, 3, 7).unwrap(), reed_muller_construction1(2, 16).unwrap(), rs_construction2()] {
        let p = code.packed();
        let bits = code.randomness_bits();
        for m in all_messages(&code) {
            for rand in (0..1u64 << bits).step_by(1 + (1usize << bits) / 512) {
                let x = CodingScheme::encode(&code, m, rand).unwrap();
                let (key, rnd) = code.split_randomness(rand);
                assert_eq!(x.to_word(), p.encode(m, key, rnd));
                assert_eq!(nm_decode(&code, &x).unwrap(), Outcome::Message(m));
                assert_eq!(p.decode(x.to_word()), Outcome::Message(m));
            }
        }
        let mut rng = SeedTree::new(5).rng();
        for _ in 0..2000 {
            let word = rng.gen::<u64>() & ((1u64 << p.n_bits()) - 1);
            let x = FieldVector::from_word(code.field(), word, code.n());
            assert_eq!(nm_decode(&code, &x).unwrap(), p.decode(word));
        }
    }
}

#[test]
fn zero_message_zero_randomness_is_zero_word() {
    let code = hamming_construction2(4, 4, 15).unwrap();
    let x = CodingScheme::encode(&code, 0, 0).unwrap();
    assert!(x.is_zero());
}

#[test]
fn engine_matches_reference_hamming3() {
    let code = hamming_construction2(3, 3, 7).unwrap();
    for read in 0..=3 {
        for f in binary_adversaries(&code, read, 12, 11 + read as u64) {
            check_against_reference(&code, &f);
        }
    }
}

#[test]
fn engine_matches_reference_hamming4() {
    let code = hamming_construction2(4, 4, 15).unwrap();
    for f in binary_adversaries(&code, 4, 8, 21) {
        check_against_reference(&code, &f);
    }
}

#[test]
fn engine_matches_reference_reed_muller() {
    let code = reed_muller_construction1(2, 16).unwrap();
    for read in 0..=2 {
        for f in binary_adversaries(&code, read, 10, 31 + read as u64) {
            check_against_reference(&code, &f);
        }
    }
}

#[test]
fn engine_matches_reference_qary() {
    let code = rs_construction2();
    for f in qary_adversaries(&code, 1, 8, 41) {
        check_against_reference(&code, &f);
    }
}

#[test]
fn c1_simulator_needs_t_above_read() {
    let code = reed_muller_construction1(3, 16).unwrap();
    let f = binary_adversaries(&code, 3, 1, 1).remove(0);
    assert!(matches!(simulator(&code, &f, SameStarRule::ZeroLabel, &EvalMode::Exact), Err(Error::OutsideRegime(_))));
}

#[test]
fn identity_gives_same_star() {
    let code = hamming_construction2(4, 4, 15).unwrap();
    let id = TamperFunction::identity(code.n());
    let d = simulator(&code, &id, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
    assert!(d.is_point(Outcome::SameStar));
    for m in all_messages(&code) {
        let t = tamper_experiment(&code, &id, m, &EvalMode::Exact).unwrap();
        assert!(t.is_point(Outcome::Message(m)));
        let s = strong_experiment(&code, &id, m, &EvalMode::Exact).unwrap();
        assert!(s.is_point(Outcome::SameStar));
    }
}

#[test]
fn overwrite_all_is_a_point_mass() {
    let code = hamming_construction2(3, 0, 7).unwrap();
    let p = code.packed();
    for v in [0u64, 0b1010101, 0b1111111, p.encode(1, 1, 3)] {
        let f = TamperFunction::overwrite_all(code.n(), v);
        let expect = p.decode(v);
        let d = simulator(&code, &f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
        assert!(d.is_point(expect));
        for m in all_messages(&code) {
            let t = tamper_experiment(&code, &f, m, &EvalMode::Exact).unwrap();
            assert!(t.is_point(expect));
            assert_eq!(statistical_distance(&t, &patch(&d, m), false).unwrap(), exact(0, 1));
        }
    }
}

#[test]
fn flip_all_matches_reference_and_simulator() {
    let code = hamming_construction2(3, 0, 7).unwrap();
    let f = TamperFunction::xor_offset(code.n(), 0b1111111);
    check_against_reference(&code, &f);
    let d = simulator(&code, &f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
    for m in all_messages(&code) {
        let t = tamper_experiment(&code, &f, m, &EvalMode::Exact).unwrap();
        assert!(statistical_distance(&t, &patch(&d, m), false).unwrap() <= code.amd().effective_bound());
    }
}

#[test]
fn zero_offset_rule_breaks_on_codeword_offsets() {
    // adding a nonzero codeword of the underlying code leaves every label unchanged
    let code = hamming_construction2(3, 0, 7).unwrap();
    let InnerCode::Wiretap(w) = code.inner() else { unreachable!() };
    let delta = w.code().generator().row_vector(0).to_word();
    assert_ne!(delta, 0);
    let f = TamperFunction::xor_offset(code.n(), delta);
    let label = simulator(&code, &f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
    let offset = simulator(&code, &f, SameStarRule::ZeroOffset, &EvalMode::Exact).unwrap();
    let slow = reference_simulator(&code, &f, SameStarRule::ZeroOffset).unwrap();
    assert_eq!(statistical_distance(&offset, &slow, false).unwrap(), exact(0, 1));
    for m in all_messages(&code) {
        let t = tamper_experiment(&code, &f, m, &EvalMode::Exact).unwrap();
        assert_eq!(statistical_distance(&t, &patch(&label, m), false).unwrap(), exact(0, 1));
        assert_eq!(statistical_distance(&t, &patch(&offset, m), false).unwrap(), exact(1, 1));
    }
}

fn same_star_mass(d: &OutcomeDistribution) -> Exact {
    d.prob(Outcome::SameStar)
}

#[test]
fn privacy_breaker_gap_follows_leakage() {
    let code = hamming_construction2(3, 7, 7).unwrap();
    let p = code.packed();
    let mut d = BTreeSet::new();
    for rand in 0..1u64 << code.randomness_bits() {
        let (key, rnd) = code.split_randomness(rand);
        d.insert(p.encode(0, key, rnd));
    }
    let f = privacy_breaker(code.n(), &d, (0..code.n()).collect()).unwrap();
    let s0 = strong_experiment(&code, &f, 0, &EvalMode::Exact).unwrap();
    let s1 = strong_experiment(&code, &f, 1, &EvalMode::Exact).unwrap();
    assert_eq!(same_star_mass(&s0), exact(1, 1));
    assert_eq!(same_star_mass(&s1), exact(0, 1));
    assert_eq!(s0, reference_strong_experiment(&code, &f, 0).unwrap());

    // three positions are private: no distinguisher moves the same* mass
    let read = vec![1, 2, 4];
    for mask in [0b1u64, 0b1011_0110, 0b0101_0101] {
        let set: BTreeSet<u64> = (0..8).filter(|a| mask >> a & 1 == 1).collect();
        let f = privacy_breaker(code.n(), &set, read.clone()).unwrap();
        let a = strong_experiment(&code, &f, 0, &EvalMode::Exact).unwrap();
        let b = strong_experiment(&code, &f, 1, &EvalMode::Exact).unwrap();
        assert_eq!(same_star_mass(&a), same_star_mass(&b));
    }
}

#[test]
fn monte_carlo_tracks_exact() {
    let code = hamming_construction2(5, 5, 31).unwrap();
    let samples = 1u64 << 16;
    let bins = (1usize << code.k()) + 2;
    for (i, f) in binary_adversaries(&code, 5, 4, 51).iter().enumerate() {
        let seed = SeedTree::new(9).index(i as u64);
        let exact_t = tamper_experiment(&code, f, 1, &EvalMode::Exact).unwrap();
        let mc_t = tamper_experiment(&code, f, 1, &EvalMode::MonteCarlo { samples, seed: seed.clone() }).unwrap();
        assert_eq!(mc_t.total(), samples as u128);
        let sd = statistical_distance(&exact_t, &mc_t, true).unwrap();
        assert!(to_f64(&sd) <= mc_half_width(samples, bins), "tamper sd {sd}");
        let exact_d = simulator(&code, f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
        let mc_d = simulator(&code, f, SameStarRule::ZeroLabel, &EvalMode::MonteCarlo { samples, seed }).unwrap();
        let sd = statistical_distance(&exact_d, &mc_d, true).unwrap();
        assert!(to_f64(&sd) <= mc_half_width(samples, bins), "simulator sd {sd}");
    }
}

#[test]
fn monte_carlo_is_reproducible() {
    let code = hamming_construction2(4, 4, 15).unwrap();
    let f = binary_adversaries(&code, 4, 1, 61).remove(0);
    let mode = EvalMode::MonteCarlo { samples: 100_000, seed: SeedTree::new(3) };
    let a = tamper_experiment(&code, &f, 2, &mode).unwrap();
    let b = tamper_experiment(&code, &f, 2, &mode).unwrap();
    assert_eq!(a.canonical(), b.canonical());
}

#[test]
fn exact_mode_reports_infeasible_cells() {
    // 11 AMD key bits and two 8-bit read symbols exceed the exact cell limit
    let field = Field::new(8).unwrap();
    let wt = wt_build(&reed_solomon_code(&field, 8, 5).unwrap(), 0).unwrap();
    let code = NmCode::construction2(wt, amd_for_bits(24).unwrap(), 2, 8).unwrap();
    assert_eq!(code.amd().u(), 11);
    let f = ao_sample(&field, 8, 2, SampleMode::Structured, &SeedTree::new(1)).unwrap();
    assert!(matches!(tamper_experiment(&code, &f, 0, &EvalMode::Exact), Err(Error::Infeasible(_))));
    let mc = EvalMode::MonteCarlo { samples: 1000, seed: SeedTree::new(2) };
    assert_eq!(tamper_experiment(&code, &f, 0, &mc).unwrap().total(), 1000);
    let wide = tamper_sample(31, 24.0 / 31.0, 1.0, SampleMode::Uniform, &SeedTree::new(1)).unwrap();
    let small = hamming_construction2(5, 24, 31).unwrap();
    assert!(matches!(tamper_experiment(&small, &wide, 0, &mc), Err(Error::BudgetExceeded(_))));
}

#[test]
fn audit_reports_identical_simulators() {
    let code = hamming_construction2(4, 4, 15).unwrap();
    let opts = AuditOptions { adversaries: 6, ..AuditOptions::default() };
    let rep = nm_security_audit(&code, &opts).unwrap();
    assert!(rep.df_identical);
    assert_eq!(rep.per_adversary.len(), 6);
    assert_eq!(rep.histogram.iter().sum::<u64>(), 6);
    assert_eq!(rep, nm_security_audit(&code, &opts).unwrap());
}

#[test]
fn c1_case_rows_carry_unit_mass() {
    let code = reed_muller_construction1(2, 16).unwrap();
    for f in binary_adversaries(&code, 2, 6, 71) {
        let rows = c1_case_analysis(&code, &f, 1).unwrap();
        let mass = rows.iter().fold(exact(0, 1), |a, r| a + r.mass);
        assert_eq!(mass, exact(1, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn strong_patched_equals_tamper(seed in any::<u64>(), read in 0usize..=3, m in 0u64..2) {
        let code = hamming_construction2(3, 3, 7).unwrap();
        let f = binary_adversaries(&code, read, 1, seed).remove(0);
        let t = tamper_experiment(&code, &f, m, &EvalMode::Exact).unwrap();
        let s = strong_experiment(&code, &f, m, &EvalMode::Exact).unwrap();
        prop_assert_eq!(patch(&s, m), t);
    }

    #[test]
    fn simulator_is_a_distribution(seed in any::<u64>(), read in 0usize..=4) {
        let code = hamming_construction2(4, 4, 15).unwrap();
        let f = binary_adversaries(&code, read, 1, seed).remove(0);
        let d = simulator(&code, &f, SameStarRule::ZeroLabel, &EvalMode::Exact).unwrap();
        let mass = d.support().fold(exact(0, 1), |a, (o, _)| a + d.prob(o));
        prop_assert_eq!(mass, exact(1, 1));
    }
}
