//! Acceptance suite. Criteria run one after another in a single test so the
//! runtime limits are measured without competing test threads; each prints a
//! PASS/FAIL line and the test fails if any criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::cmp::Ordering;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secnet_cli::reproduce::{lemma_entropy, nonlinear_summary, scalar_impossibility, DEFAULT_SEED};
use secnet_core::attack::{active_sweep, optimal_adaptive_leakage, optimal_with_table, AttackClass, AttackStrategy, SweepConfig, TreeNode};
use secnet_core::capacity::{
    is_subregion, max_prime_power, multicast_region, multimulticast_region, region_contains, relay_capacity,
    wiretap_mincut_capacity, MulticastParams, Randomness, Rational, RelayParams,
};
use secnet_core::codegen::{onehop_code, relay_code, scalar_linear_search, verify_code, wiretap2_vectors, RelayMode};
use secnet_core::netmodel::{build_fixture, mincuts, subsets, NetworkCode, NetworkSpec};
use secnet_core::secrecy::{classify_security, Verdict, WorldTable};

type Check = Result<String, String>;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fig1() -> (NetworkSpec, NetworkCode) {
    build_fixture("fig1_nonlinear").unwrap()
}

fn deterministic_leakage() -> Check {
    let (spec, code) = fig1();
    let report = classify_security(&spec, &code, AttackClass::A0).map_err(|e| e.to_string())?;
    let ids: Vec<&str> = report.strategies.iter().map(|s| s.id.as_str()).collect();
    ensure(ids == ["{1,3}", "{1,4}", "{2,3}", "{2,4}"], || format!("tap sets {ids:?}"))?;
    for s in &report.strategies {
        ensure((s.leakage_bits - 0.5).abs() <= 1e-12, || format!("{}: I = {}", s.id, s.leakage_bits))?;
        ensure(s.d1 == rat(1, 2), || format!("{}: d1 = {}", s.id, s.d1))?;
    }
    ensure(report.verdict == Verdict::ImperfectlySecure, || format!("verdict {:?}", report.verdict))?;
    Ok("I = 0.5 bits and d1 = 1/2 on all four tap sets".into())
}

fn adaptive_break() -> Check {
    let (spec, code) = fig1();
    let (bits, strategy) = optimal_adaptive_leakage(&spec, &code, AttackClass::A2).map_err(|e| e.to_string())?;
    ensure(bits == 1.0, || format!("optimal leakage {bits}"))?;
    let attack_i = TreeNode::with_children(1, [(1, TreeNode::leaf(3)), (0, TreeNode::leaf(4))]);
    let attack_ii = TreeNode::with_children(2, [(1, TreeNode::leaf(4)), (0, TreeNode::leaf(3))]);
    let tree = strategy.tree().cloned();
    ensure(matches!(strategy, AttackStrategy::GeneralAdaptive { .. }), || format!("{strategy:?}"))?;
    ensure(tree == Some(attack_i) || tree == Some(attack_ii), || format!("witness {tree:?}"))?;
    let report = classify_security(&spec, &code, AttackClass::A2).map_err(|e| e.to_string())?;
    ensure(report.verdict == Verdict::Insecure, || format!("verdict {:?}", report.verdict))?;
    Ok("1 bit exactly, witness is attack (i)".into())
}

fn table_rows(report: secnet_cli::reproduce::TableReport) -> Check {
    let lines: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("[{}] {}: {}", if r.pass { "ok" } else { "bad" }, r.name, r.observed))
        .collect();
    ensure(report.pass, || lines.join("; "))?;
    Ok(lines.join("; "))
}

fn nonlinear_table() -> Check {
    let report = nonlinear_summary().map_err(|e| e.to_string())?;
    ensure(report.rows.len() == 3, || format!("{} rows", report.rows.len()))?;
    table_rows(report)
}

fn linear_corpus() -> Vec<(NetworkSpec, NetworkCode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_97);
    let mut out = Vec::new();
    for q in [2u32, 3] {
        for _ in 0..60 {
            let source = rng.gen_range(0..=2);
            let relay = rng.gen_range(0..=1);
            out.push(common::random_relay_code(&mut rng, q, source, relay));
        }
    }
    out
}

fn linear_reduction() -> Check {
    let corpus = linear_corpus();
    let config = SweepConfig { exhaustive_limit: 1 << 20, ..SweepConfig::default() };
    let (mut leak_violations, mut dist_violations, mut strategies) = (0, 0, 0);
    for (spec, code) in &corpus {
        let table = WorldTable::enumerate(spec, code).map_err(|e| e.to_string())?;
        let a0 = optimal_with_table(spec, &table, AttackClass::A0).map_err(|e| e.to_string())?.1;
        let a2 = optimal_with_table(spec, &table, AttackClass::A2).map_err(|e| e.to_string())?.1;
        if a0.scaled_leakage().cmp_exact(&a2.scaled_leakage()) != Ordering::Equal {
            leak_violations += 1;
        }
        let sweep = active_sweep(spec, code, &table, &config).map_err(|e| e.to_string())?;
        ensure(sweep.summary.exhaustive, || "active sweep was sampled".into())?;
        strategies += sweep.summary.strategies;
        dist_violations += sweep.summary.not_reducible;
    }
    ensure(leak_violations == 0 && dist_violations == 0, || {
        format!("{leak_violations} leakage and {dist_violations} distribution violations")
    })?;
    Ok(format!("{} codes, {strategies} active strategies, zero violations", corpus.len()))
}

fn corollary_corpus() -> Vec<(NetworkSpec, NetworkCode)> {
    let mut corpus = linear_corpus();
    corpus.push(fig1());
    corpus.push(build_fixture("five_node").unwrap());
    for (k, r, q) in [(2, 1, 2), (3, 1, 5), (3, 2, 3), (4, 2, 2)] {
        let b = onehop_code(k, r, q, 1).unwrap();
        corpus.push((b.spec, b.code));
    }
    for (k, r) in [([2u64, 2], [1u64, 1]), ([3, 2], [1, 0]), ([2, 3], [0, 1])] {
        let params = RelayParams::new(&k, &r, 2, &[1, 1]).unwrap();
        for mode in [RelayMode::FullRandom, RelayMode::NoRandom, RelayMode::Limited] {
            let b = relay_code(&params, mode).unwrap();
            corpus.push((b.spec, b.code));
        }
    }
    corpus
}

fn zero_leakage_transfers() -> Check {
    let (mut zero, mut violations) = (0, 0);
    for (spec, code) in corollary_corpus() {
        let table = WorldTable::enumerate(&spec, &code).map_err(|e| e.to_string())?;
        let a0 = optimal_with_table(&spec, &table, AttackClass::A0).map_err(|e| e.to_string())?.1;
        if a0.scaled_leakage().is_zero() {
            zero += 1;
            let a2 = optimal_with_table(&spec, &table, AttackClass::A2).map_err(|e| e.to_string())?.1;
            if !a2.scaled_leakage().is_zero() {
                violations += 1;
            }
        }
    }
    ensure(violations == 0, || format!("{violations} violations"))?;
    ensure(zero > 0, || "no zero-leakage codes in the corpus".into())?;
    Ok(format!("{zero} zero-leakage codes, zero violations"))
}

fn relay_grid() -> Vec<(Vec<u64>, Vec<u64>, u64, Vec<u64>)> {
    let hop: Vec<(u64, u64)> = [2u64, 3].iter().flat_map(|&k| [0u64, 1].map(|r| (k, r))).collect();
    let mut out = Vec::new();
    for q in [2u64, 3, 5] {
        let mut shapes: Vec<Vec<(u64, u64)>> = hop.iter().map(|&h| vec![h]).collect();
        shapes.extend(hop.iter().flat_map(|&a| hop.iter().map(move |&b| vec![a, b])));
        for shape in shapes {
            for g in [0u64, 1] {
                let k = shape.iter().map(|h| h.0).collect();
                let r = shape.iter().map(|h| h.1).collect();
                out.push((k, r, q, vec![g; shape.len()]));
            }
        }
    }
    out
}

fn construction_agreement() -> Check {
    let mut built_count = 0;
    for (k, r, q, g) in relay_grid() {
        let params = RelayParams::new(&k, &r, q, &g).map_err(|e| e.to_string())?;
        let caps = relay_capacity(&params).map_err(|e| e.to_string())?;
        for (mode, want) in
            [(RelayMode::FullRandom, &caps.c1), (RelayMode::NoRandom, &caps.c2), (RelayMode::Limited, &caps.c_gamma)]
        {
            let tag = format!("k={k:?} r={r:?} q={q} gamma={g:?} {mode}");
            let built = relay_code(&params, mode).map_err(|e| format!("{tag}: {e}"))?;
            ensure(&built.total_rate() == want, || format!("{tag}: rate {} vs {want}", built.total_rate()))?;
            let v = verify_code(&built.spec, &built.code).map_err(|e| format!("{tag}: {e}"))?;
            ensure(v.perfectly_secure(), || format!("{tag}: {v:?}"))?;
            built_count += 1;
        }
    }
    Ok(format!("{built_count} codes match their capacity and verify perfectly secure"))
}

fn wiretap_selections() -> Check {
    let mut checked = 0;
    for q in [2u64, 3, 4] {
        for k in 1..=6usize {
            for r in 0..k {
                let v = wiretap2_vectors(k, r, q).map_err(|e| e.to_string())?;
                let m = v.matrix();
                let cols: Vec<usize> = (0..k).collect();
                for s in if r == 0 { Vec::new() } else { subsets(&cols, r) } {
                    checked += 1;
                    ensure(m.select_columns(&s).is_invertible(), || format!("k={k} r={r} q={q}: {s:?} singular"))?;
                }
            }
        }
    }
    Ok(format!("{checked} selections invertible"))
}

fn entropy_lemmas() -> Check {
    let report = lemma_entropy(DEFAULT_SEED, 1000).map_err(|e| e.to_string())?;
    let all = report.rows.last().expect("summary row");
    ensure(all.observed == "1000/1000 holds", || all.observed.clone())?;
    table_rows(report)
}

fn scalar_bound() -> Check {
    let params = RelayParams::new(&[2, 2], &[1, 1], 2, &[0, 0]).map_err(|e| e.to_string())?;
    let found = scalar_linear_search(&params, 2).map_err(|e| e.to_string())?;
    ensure(found.bound == 0 && found.max_secure_symbols == 0 && found.witness.is_none(), || {
        format!("bound {} found {}", found.bound, found.max_secure_symbols)
    })?;
    let examined: u64 = found.examined.iter().map(|e| e.1).sum();
    table_rows(scalar_impossibility().map_err(|e| e.to_string())?)?;
    Ok(format!("{examined} scalar codes examined, none secure; bound 0"))
}

fn capacities_and_regions() -> Check {
    let relay = |k: &[u64], r: &[u64], g: &[u64]| relay_capacity(&RelayParams::new(k, r, 2, g).unwrap()).unwrap();
    let c = relay(&[2, 2], &[1, 1], &[0, 0]);
    ensure(c.c1 == rat(1, 1) && c.c2 == rat(1, 2) && c.c_gamma == rat(1, 2), || format!("{c:?}"))?;
    let c = relay(&[2, 2], &[1, 1], &[0, 1]);
    ensure(c.h == vec![rat(2, 1), rat(2, 1)] && c.c_gamma == rat(1, 1) && c.c_gamma == c.c1, || format!("{c:?}"))?;
    let c = relay(&[3, 2, 4], &[0, 0, 0], &[0, 0, 0]);
    ensure(c.c1 == rat(2, 1) && c.c2 == rat(2, 1) && c.c_gamma == rat(2, 1), || format!("{c:?}"))?;

    let p = MulticastParams::new(1, 2, &[2], &[2, 1], &[1, 1], 2).unwrap();
    let none = multicast_region(&p, Randomness::None).unwrap();
    let full = multicast_region(&p, Randomness::Full).unwrap();
    ensure(none.constant("A1") == Some(&rat(1, 1)) && none.constant("A2") == Some(&rat(1, 1)), || {
        format!("{:?}", none.constants)
    })?;
    ensure(is_subregion(&none, &full).unwrap() && is_subregion(&full, &none).unwrap(), || "regions differ".into())?;
    let bad = MulticastParams::new(1, 2, &[2], &[2, 2], &[1, 1], 2).unwrap();
    ensure(multicast_region(&bad, Randomness::Full).is_err(), || "non-integral r/k accepted".into())?;
    let open = MulticastParams::new(1, 3, &[2], &[2, 3], &[0, 0], 2).unwrap();
    let open = multicast_region(&open, Randomness::None).unwrap();
    ensure(open.constant("A1") == Some(&rat(4, 1)) && open.constant("A2") == Some(&rat(6, 1)), || {
        format!("{:?}", open.constants)
    })?;

    let mm = MulticastParams::new(2, 2, &[2, 2, 2], &[2, 2, 2], &[1, 1, 2], 2).unwrap();
    let mm = multimulticast_region(&mm, Randomness::Full).unwrap();
    for (name, want) in [("B4", 3), ("B5", 2), ("B3", 2)] {
        ensure(mm.constant(name) == Some(&rat(want, 1)), || format!("{name}: {:?}", mm.constant(name)))?;
    }
    ensure(region_contains(&none, &[rat(1, 2), rat(1, 2)]).unwrap().0, || "(1/2,1/2) outside".into())?;
    let (inside, violated) = region_contains(&none, &[rat(1, 1), rat(1, 4)]).unwrap();
    ensure(!inside && violated.is_some(), || "(1,1/4) inside".into())?;
    ensure(region_contains(&none, &[rat(0, 1), rat(0, 1)]).unwrap().0, || "zero outside".into())?;

    let (five, _) = build_fixture("five_node").unwrap();
    ensure(mincuts(&five).unwrap() == (2, 1), || format!("{:?}", mincuts(&five)))?;
    let w = wiretap_mincut_capacity(&five, 1).unwrap();
    ensure(w.c2_exact == 0 && w.c1_lower == 0 && w.c1_upper == 1, || format!("{w:?}"))?;

    let mut nested = 0;
    for b in 1..=2u64 {
        for g in 1..=2u64 {
            for k1 in 1..=3u64 {
                for k2 in 1..=3u64 {
                    for r1 in 0..=k1 {
                        for r2 in 0..=k2 {
                            let p = MulticastParams::new(1, b, &[g], &[k1, k2], &[r1, r2], 2).unwrap();
                            let Ok(full) = multicast_region(&p, Randomness::Full) else { continue };
                            let none = multicast_region(&p, Randomness::None).unwrap();
                            ensure(is_subregion(&none, &full).unwrap(), || format!("{p:?}"))?;
                            nested += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("relay, multicast and multi-source examples exact; nesting on {nested} parameter sets"))
}

fn prime_powers() -> Check {
    ensure(max_prime_power(6, 1).unwrap() == 5, || "d=6 n=1".into())?;
    ensure(max_prime_power(6, 2).unwrap() == 32, || "d=6 n=2".into())?;
    ensure(max_prime_power(2, 10).unwrap() == 1024, || "d=2 n=10".into())?;
    let mut last = Vec::new();
    for d in [6u64, 10, 12] {
        let log_d = (d as f64).log2();
        for n in 1..=10u32 {
            let per_use = (max_prime_power(d, n).unwrap() as f64).log2() / n as f64;
            ensure(per_use <= log_d + 1e-12, || format!("d={d} n={n}: {per_use} above log d"))?;
            if n == 10 {
                ensure(per_use > 0.9 * log_d, || format!("d={d}: {per_use} <= 0.9 log d"))?;
                last.push(format!("d={d}: {:.4}/{:.4}", per_use, log_d));
            }
        }
    }
    Ok(format!("n=10 rates {}", last.join(", ")))
}

#[test]
fn acceptance_criteria() {
    let criteria: Vec<(u32, Option<f64>, fn() -> Check)> = vec![
        (1, Some(1.0), deterministic_leakage),
        (2, Some(1.0), adaptive_break),
        (3, Some(300.0), nonlinear_table),
        (4, Some(600.0), linear_reduction),
        (5, None, zero_leakage_transfers),
        (6, Some(1800.0), construction_agreement),
        (7, None, wiretap_selections),
        (8, None, entropy_lemmas),
        (9, Some(600.0), scalar_bound),
        (10, None, capacities_and_regions),
        (11, None, prime_powers),
    ];
    let mut failed = Vec::new();
    for (id, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(max)) if secs >= max => Err(format!("took {secs:.2}s, limit {max}s")),
            (o, _) => o,
        };
        match &outcome {
            Ok(detail) => println!("criterion {id}: PASS ({secs:.2}s) {detail}"),
            Err(why) => {
                println!("criterion {id}: FAIL ({secs:.2}s) {why}");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
