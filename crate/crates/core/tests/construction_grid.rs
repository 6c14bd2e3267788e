//! Built relay codes meet their capacity formula and verify perfectly secure.
//! GF(5) is covered by the acceptance run, whose large cases take minutes.

use std::time::Instant;

use secnet_core::capacity::{relay_capacity, RelayParams};
use secnet_core::codegen::{relay_code, verify_code, RelayMode};

fn grid() -> Vec<(Vec<u64>, Vec<u64>, u64, Vec<u64>)> {
    let mut out = Vec::new();
    for q in [2u64, 3] {
        for c in 1..=2usize {
            let choices: Vec<(u64, u64)> = [2u64, 3].iter().flat_map(|&k| [0u64, 1].map(|r| (k, r))).collect();
            let mut idx = vec![0usize; c];
            loop {
                let k: Vec<u64> = idx.iter().map(|&i| choices[i].0).collect();
                let r: Vec<u64> = idx.iter().map(|&i| choices[i].1).collect();
                for g in [0u64, 1] {
                    out.push((k.clone(), r.clone(), q, vec![g; c]));
                }
                let mut p = 0;
                while p < c {
                    idx[p] += 1;
                    if idx[p] < choices.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == c {
                    break;
                }
            }
        }
    }
    out
}

#[test]
fn relay_grid_agrees_with_formulas() {
    let start = Instant::now();
    let mut checked = 0;
    for (k, r, q, g) in grid() {
        let params = RelayParams::new(&k, &r, q, &g).unwrap();
        let caps = relay_capacity(&params).unwrap();
        for (mode, want) in [
            (RelayMode::FullRandom, &caps.c1),
            (RelayMode::NoRandom, &caps.c2),
            (RelayMode::Limited, &caps.c_gamma),
        ] {
            let t = Instant::now();
            let built = relay_code(&params, mode).unwrap_or_else(|e| panic!("{k:?} {r:?} q={q} {g:?} {mode}: {e}"));
            assert_eq!(&built.total_rate(), want, "{k:?} {r:?} q={q} {g:?} {mode}");
            let v = verify_code(&built.spec, &built.code).unwrap();
            assert!(v.perfectly_secure(), "{k:?} {r:?} q={q} {g:?} {mode}: {v:?}");
            checked += 1;
            let el = t.elapsed().as_secs_f64();
            if el > 1.0 {
                eprintln!("{k:?} {r:?} q={q} {g:?} {mode}: n={} worlds={} {el:.1}s", built.code.n, v.worlds);
            }
        }
    }
    eprintln!("{checked} codes in {:.1}s", start.elapsed().as_secs_f64());
}
