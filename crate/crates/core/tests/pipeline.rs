use std::sync::LazyLock;

use num_rational::BigRational;
use proptest::prelude::*;

use aimg_core::classifier::{check_curve, classify, parse_catalog, Bucket, CatalogLoad, CurveVerdict, SAMPLE_CATALOG};
use aimg_core::opengroup::OpenSubgroup;
use aimg_core::ratfunc::{q, Proj};

static SAMPLE: LazyLock<CatalogLoad> = LazyLock::new(|| parse_catalog(SAMPLE_CATALOG).unwrap());

fn sample() -> CatalogLoad {
    SAMPLE.clone()
}

#[test]
fn report_is_stable_under_permutation() {
    let load = sample();
    let a = classify(&load);
    let mut rev = load.clone();
    rev.entries.reverse();
    let b = classify(&rev);
    for e in &a.entries {
        assert_eq!(Some(e), b.entry(&e.label));
    }
    let labels: Vec<&str> = a.entries.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels, ["2A-2A", "X0(2)", "X(2)"]);
}

/// Index of the finite derived subgroup inside the SL2 part at a level.
fn brute_index(g: &OpenSubgroup, level: u64) -> u64 {
    let img = g.image_at(level).unwrap();
    let sl = img.intersect_sl2().unwrap().order().unwrap();
    let d = img.derived_subgroup().unwrap().order().unwrap();
    (sl / d) as u64
}

#[test]
fn buckets_match_brute_force_derived_subgroups() {
    let load = sample();
    let report = classify(&load);
    for e in &load.entries {
        let r = report.entry(e.label()).unwrap().group.clone().unwrap();
        let lvl = r.saturation_level.unwrap();
        let t = e.group.transpose_group();
        assert_eq!(brute_index(&t, lvl), r.index.unwrap(), "{}", e.label());
        assert_eq!(brute_index(&t, 2 * lvl), r.index.unwrap(), "{}", e.label());
    }
    let x02 = report.entry("X0(2)").unwrap().group.clone().unwrap();
    assert_eq!((x02.index, x02.bucket), (Some(4), Bucket::Excluded));
}

#[test]
fn g0_and_level_bounds_in_report() {
    let report = classify(&sample());
    let two_a = report.entry("2A-2A").unwrap();
    let g0 = two_a.g0.as_ref().unwrap();
    assert_eq!((g0.source.as_str(), g0.level), ("j-line", 1));
    assert_eq!(two_a.level_bound_b, Some(4));
    assert_eq!(two_a.extra_levels, vec![2, 4, 8]);
    let x2 = report.entry("X(2)").unwrap();
    assert_eq!(x2.g0.as_ref().unwrap().source, "X0(2)");
    assert!(report.to_table().contains("2A-2A"));
    assert!(!report.has_invariant_violation());
}

#[test]
fn bad_entries_are_reported_not_fatal() {
    let text = SAMPLE_CATALOG.replacen(
        "\"entries\": [",
        "\"entries\": [{\"label\": \"7X\", \"group\": {\"level\": 7, \"gens\": [[1,0,0,1]]}, \"pi\": \"t\", \"u\": \"t\"},",
        1,
    );
    let report = classify(&parse_catalog(&text).unwrap());
    assert!(report.has_invariant_violation());
    assert_eq!(report.entries.len(), 4);
    assert!(report.entry("7X").unwrap().invariant_violation.as_ref().unwrap().contains("genus"));
    assert!(report.entry("2A-2A").unwrap().invariant_violation.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn images_of_pi_are_members(n in -80i64..80, d in 1i64..16, which in 0usize..3) {
        let load = &*SAMPLE;
        let e = &load.entries[which];
        let t = Proj::Finite(BigRational::new(n.into(), d.into()));
        if let Proj::Finite(j) = e.pi.evaluate(&t) {
            let v = check_curve(e.label(), &j, &load.entries).unwrap();
            if j == q(0) || j == q(1728) {
                prop_assert_eq!(v, CurveVerdict::ExcludedJ);
            } else {
                prop_assert!(matches!(v, CurveVerdict::Member { .. }), "{} at {}", e.label(), j);
            }
        }
    }
}
