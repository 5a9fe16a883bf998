use aimg_core::matgroup::{subgroups_up_to_conjugacy, FiniteMatrixGroup};
use aimg_core::surjectivity::{quo_disjointness, quo_simple_quotients, SimpleTag};

/// Every simple factor of a subgroup divides the order of one of the group's.
fn lemma_holds(n: u64) -> usize {
    let g = FiniteMatrixGroup::gl2(n).unwrap();
    let big = quo_simple_quotients(&g).unwrap();
    let mut checked = 0;
    for h in subgroups_up_to_conjugacy(&g, &g).unwrap() {
        for nh in quo_simple_quotients(&h).unwrap() {
            assert!(
                big.iter().any(|ng| ng.order % nh.order == 0),
                "mod {n}: {nh:?} divides nothing in {big:?}"
            );
            checked += 1;
        }
    }
    checked
}

#[test]
fn subgroup_lemma_mod_4_and_5() {
    assert_eq!(lemma_holds(4), 0);
    assert!(lemma_holds(5) > 0);
}

#[test]
fn gl2_of_prime_powers_have_one_factor() {
    for n in [5u64, 7, 25] {
        let p = if n == 25 { 5 } else { n };
        let q = quo_simple_quotients(&FiniteMatrixGroup::gl2(n).unwrap()).unwrap();
        assert_eq!(q.into_iter().collect::<Vec<_>>(), vec![SimpleTag::from_order(p * (p * p - 1) / 2)]);
    }
    let g5 = FiniteMatrixGroup::gl2(5).unwrap();
    let g7 = FiniteMatrixGroup::gl2(7).unwrap();
    let g25 = FiniteMatrixGroup::gl2(25).unwrap();
    assert!(quo_disjointness(&g5, &g7).unwrap());
    assert!(!quo_disjointness(&g5, &g25).unwrap());
}
