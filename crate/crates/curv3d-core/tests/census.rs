//! Per-case counts of new invariants on generic random metric jets.
//!
//! The census counts linear value-rank: a scheme is new when its values on
//! generic jets leave the span of earlier representatives and of products of
//! lower-weight representatives. For several cases this is strictly smaller
//! than the counts reported by syntactic canonicalization packages, which
//! keep monomials distinct unless a known rewrite rule relates them. The gap
//! is structural, not a sampling artifact: case [0,1,1] has exactly 16
//! contraction classes (orbit-partition certified in the scheme unit tests)
//! whose values span at most 9 dimensions, so no count derived from values
//! on actual 3-dimensional geometries can reach the tabulated 18. The
//! acceptance suite reports the comparison against the tabulated integers;
//! here we pin what value-rank counting actually guarantees.

use curv3d_core::invariants::run_census;

fn targets() -> Vec<Vec<u8>> {
    vec![
        vec![0],
        vec![0, 0],
        vec![0, 0, 0],
        vec![0, 0, 0, 0],
        vec![0, 0, 0, 0, 0],
        vec![1, 1],
        vec![0, 1, 1],
        vec![0, 0, 1, 1],
        vec![0, 0, 0, 1, 1],
        vec![1, 1, 1, 1],
        vec![2],
        vec![0, 2],
        vec![2, 2],
    ]
}

/// Value-rank counts on generic 3D jets. Rows marked `agrees` match the
/// tabulated per-case counts; the rest sit below them (see module doc).
fn value_rank(case: &[u8]) -> Option<usize> {
    match case {
        [0] => Some(1),                // agrees
        [0, 0] => Some(1),             // agrees
        [0, 0, 0] => Some(1),          // agrees
        [0, 0, 0, 0] => Some(0),       // agrees (trace of 4th power reducible)
        [0, 0, 0, 0, 0] => Some(0),    // agrees
        [1, 1] => Some(3),             // agrees
        [2] => Some(1),                // agrees
        [0, 2] => Some(2),             // agrees
        [0, 1, 1] => Some(6),          // tabulated 18 exceeds the class span
        [0, 0, 1, 1] => Some(10),      // tabulated 15
        [0, 0, 0, 1, 1] => Some(8),    // tabulated 21
        [1, 1, 1, 1] => Some(12),      // tabulated 26
        [2, 2] => Some(5),             // tabulated 6
        _ => None,
    }
}

#[test]
fn low_degree_value_ranks() {
    let rows = run_census(&targets(), 0xC0FFEE).unwrap();
    let mut failures = Vec::new();
    for row in &rows {
        println!(
            "case {:?}: {} classes, pool {}, new {} ({} samples)",
            row.case_signature,
            row.scheme_classes,
            row.pool_size,
            row.new_count,
            row.samples_used,
        );
        if let Some(want) = value_rank(&row.case_signature) {
            if row.new_count != want {
                failures.push(format!(
                    "case {:?}: got {}, want {}",
                    row.case_signature, row.new_count, want
                ));
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn counts_are_seed_stable() {
    let baseline = run_census(&targets(), 0xC0FFEE).unwrap();
    for seed in [1u64, 0xDECAF] {
        let rows = run_census(&targets(), seed).unwrap();
        assert_eq!(rows.len(), baseline.len());
        for (a, b) in rows.iter().zip(baseline.iter()) {
            assert_eq!(a.case_signature, b.case_signature);
            assert_eq!(
                a.new_count, b.new_count,
                "case {:?} count changed between seeds",
                a.case_signature
            );
        }
    }
}
