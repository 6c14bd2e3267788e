//! For linear codes, adaptivity and activity give the eavesdropper nothing
//! beyond the best fixed tap set.

mod common;

use std::cmp::Ordering;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secnet_core::attack::{active_sweep, optimal_with_table, AttackClass, SweepConfig};
use secnet_core::capacity::RelayParams;
use secnet_core::codegen::{onehop_code, relay_code, RelayMode};
use secnet_core::netmodel::{build_fixture, NetworkCode, NetworkSpec};
use secnet_core::secrecy::{LogSum, WorldTable};

const CODES_PER_FIELD: usize = 60;

fn leakage(spec: &NetworkSpec, table: &WorldTable, class: AttackClass) -> LogSum {
    optimal_with_table(spec, table, class).unwrap().1.scaled_leakage()
}

fn random_corpus() -> Vec<(NetworkSpec, NetworkCode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11ea_c0de);
    let mut out = Vec::new();
    for q in [2u32, 3] {
        for _ in 0..CODES_PER_FIELD {
            let source = rng.gen_range(0..=2);
            let relay = rng.gen_range(0..=1);
            out.push(common::random_relay_code(&mut rng, q, source, relay));
        }
    }
    out
}

#[test]
fn adaptive_and_active_attacks_match_passive_on_linear_codes() {
    let start = Instant::now();
    let corpus = random_corpus();
    assert!(corpus.len() >= 100);
    let config = SweepConfig { exhaustive_limit: 1 << 20, ..SweepConfig::default() };
    let mut leakage_mismatch = 0;
    let mut distribution_mismatch = 0;
    let mut strategies = 0;
    for (spec, code) in &corpus {
        assert!(code.is_linear());
        let table = WorldTable::enumerate(spec, code).unwrap();
        let passive = leakage(spec, &table, AttackClass::A0);
        let adaptive = leakage(spec, &table, AttackClass::A2);
        if passive.cmp_exact(&adaptive) != Ordering::Equal {
            leakage_mismatch += 1;
        }
        let sweep = active_sweep(spec, code, &table, &config).unwrap();
        assert!(sweep.summary.exhaustive, "sweep fell back to sampling");
        let (_, worst) = sweep.worst.as_ref().unwrap();
        assert_ne!(worst.scaled_leakage().cmp_exact(&passive), Ordering::Greater);
        strategies += sweep.summary.strategies;
        distribution_mismatch += sweep.summary.not_reducible;
    }
    eprintln!(
        "{} codes, {strategies} active strategies, {:.1}s",
        corpus.len(),
        start.elapsed().as_secs_f64()
    );
    assert_eq!(leakage_mismatch, 0);
    assert_eq!(distribution_mismatch, 0);
    assert!(strategies > 0);
}

#[test]
fn zero_passive_leakage_means_zero_adaptive_leakage() {
    let mut corpus = random_corpus();
    corpus.push(build_fixture("five_node").unwrap());
    for (k, r, q) in [(2, 1, 2), (3, 1, 5), (3, 2, 3), (4, 2, 2)] {
        let built = onehop_code(k, r, q, 1).unwrap();
        corpus.push((built.spec, built.code));
    }
    for (k, r) in [([2u64, 2], [1u64, 1]), ([3, 2], [1, 0]), ([2, 3], [0, 1])] {
        let params = RelayParams::new(&k, &r, 2, &[1, 1]).unwrap();
        for mode in [RelayMode::FullRandom, RelayMode::NoRandom, RelayMode::Limited] {
            let built = relay_code(&params, mode).unwrap();
            corpus.push((built.spec, built.code));
        }
    }
    let mut zero_cases = 0;
    for (spec, code) in &corpus {
        let table = WorldTable::enumerate(spec, code).unwrap();
        if leakage(spec, &table, AttackClass::A0).is_zero() {
            zero_cases += 1;
            assert!(leakage(spec, &table, AttackClass::A2).is_zero());
        }
    }
    assert!(zero_cases >= 10, "only {zero_cases} codes with zero passive leakage");
}

#[test]
fn attack_classes_are_ordered() {
    let mut corpus = random_corpus();
    corpus.push(build_fixture("fig1_nonlinear").unwrap());
    corpus.push(build_fixture("five_node").unwrap());
    for (spec, code) in &corpus {
        let table = WorldTable::enumerate(spec, code).unwrap();
        let a0 = leakage(spec, &table, AttackClass::A0);
        let a1 = leakage(spec, &table, AttackClass::A1);
        let a2 = leakage(spec, &table, AttackClass::A2);
        assert_ne!(a0.cmp_exact(&a1), Ordering::Greater);
        assert_ne!(a1.cmp_exact(&a2), Ordering::Greater);
    }
}

#[test]
fn nonlinear_fixture_has_no_passive_reduction() {
    let (spec, code) = build_fixture("fig1_nonlinear").unwrap();
    let table = WorldTable::enumerate(&spec, &code).unwrap();
    let config = SweepConfig { exhaustive_limit: 1 << 20, ..SweepConfig::default() };
    let sweep = active_sweep(&spec, &code, &table, &config).unwrap();
    assert!(sweep.summary.exhaustive);
    assert!(sweep.summary.not_reducible > 0);
    assert!(sweep.first_irreducible.is_some());
}
