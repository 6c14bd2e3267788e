//! Every choice of `r` columns of the wiretap matrix is invertible, checked
//! by direct rank computation over the code field.

use secnet_core::codegen::wiretap2_vectors;
use secnet_core::netmodel::subsets;

#[test]
fn every_column_selection_is_invertible() {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for q in [2u64, 3, 4] {
        for k in 1..=6usize {
            for r in 0..k {
                let v = wiretap2_vectors(k, r, q).unwrap();
                assert_eq!((v.k, v.r), (k, r));
                let m = v.matrix();
                assert_eq!((m.rows, m.cols), (r, k));
                if r == 0 {
                    continue;
                }
                assert_eq!(m.rank(), r, "k={k} r={r} q={q}");
                let cols: Vec<usize> = (0..k).collect();
                for s in subsets(&cols, r) {
                    checked += 1;
                    if !m.select_columns(&s).is_invertible() {
                        failures.push((k, r, q, s));
                    }
                }
                assert!(v.verify().unwrap() > 0);
            }
        }
    }
    assert!(failures.is_empty(), "singular selections: {failures:?}");
    assert!(checked > 0);
}

#[test]
fn field_is_large_enough() {
    for q in [2u64, 3, 4, 5] {
        for k in 1..=6usize {
            for r in 0..k {
                let v = wiretap2_vectors(k, r, q).unwrap();
                let size = v.field.q() as u64;
                assert!(size >= q);
                if r >= 2 && k > r + 1 {
                    assert!(size >= k as u64, "k={k} r={r} q={q}: field of {size}");
                }
            }
        }
    }
}
