use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use wvg_core::cnf::{count_models, decide_eexasat, decide_emajsat, decide_eminsat};
use wvg_core::{parse_dimacs, seed_suite, CnfFormula, PartialAssignment};

fn models_by_loop(f: &CnfFormula, prefix: &[bool]) -> u64 {
    let n = f.num_vars();
    let k = prefix.len();
    (0..1u64 << (n - k))
        .filter(|rest| {
            let a: Vec<bool> = (0..n)
                .map(|i| if i < k { prefix[i] } else { rest >> (i - k) & 1 == 1 })
                .collect();
            f.eval(&a)
        })
        .count() as u64
}

fn formula_strategy(max_vars: usize, max_clauses: usize) -> impl Strategy<Value = CnfFormula> {
    (1..=max_vars)
        .prop_flat_map(move |n| {
            let clause = prop::collection::vec(0u8..3, n);
            (Just(n), prop::collection::vec(clause, 1..=max_clauses))
        })
        .prop_filter_map("every variable occurs", |(n, codes)| {
            let clauses: Vec<Vec<i64>> = codes
                .iter()
                .map(|c| {
                    (0..n)
                        .filter_map(|v| match c[v] {
                            1 => Some(v as i64 + 1),
                            2 => Some(-(v as i64 + 1)),
                            _ => None,
                        })
                        .collect::<Vec<i64>>()
                })
                .filter(|c| !c.is_empty())
                .collect();
            CnfFormula::new(n, &clauses).ok()
        })
}

#[test]
fn dimacs_parsing() {
    let f = parse_dimacs("c example\np cnf 3 2\n1 -2 0\n2 3\n0\n").unwrap();
    assert_eq!(f.num_vars(), 3);
    assert_eq!(f.num_clauses(), 2);
    assert!(f.eval(&[true, true, false]));
    assert!(!f.eval(&[false, true, false]));

    for bad in [
        "",
        "1 2 0\n",
        "p cnf 2 1\n1 -1 2 0\n",
        "p cnf 2 1\n1 3 0\n",
        "p cnf 2 2\n1 2 0\n",
        "p cnf 3 1\n1 2 0\n",
        "p cnf 2 1\n0\n",
        "p cnf 2 1\n1 x 0\n",
    ] {
        assert!(parse_dimacs(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn decider_witnesses() {
    let f = CnfFormula::new(2, &[vec![1, 2]]).unwrap();
    let yes = decide_emajsat(&f, 1).unwrap();
    assert!(yes.answer);
    assert_eq!(yes.witness, Some(PartialAssignment(vec![true])));
    assert_eq!(yes.witness_count, Some(BigUint::from(2u32)));
    let min = decide_eminsat(&f, 1).unwrap();
    assert_eq!(min.witness, Some(PartialAssignment(vec![false])));
    assert!(!decide_eexasat(&f, 1, &BigUint::from(3u32)).unwrap().answer);
    assert!(decide_emajsat(&f, 3).is_err());

    let text = serde_json::to_value(&yes).unwrap();
    assert_eq!(text["answer"], "yes");
    assert_eq!(text["witness_count"], "2");
}

#[test]
fn seed_suite_shape() {
    let suite = seed_suite(3, 3);
    assert_eq!(suite.len(), 2773);
    assert_eq!(suite.iter().filter(|f| f.num_vars() == 1).count(), 3);
    let distinct: BTreeSet<String> = suite.iter().map(|f| f.to_dimacs()).collect();
    assert_eq!(distinct.len(), suite.len());
    assert!(suite.iter().all(|f| f.num_clauses() <= 3));
    for f in &suite {
        let mut clauses: Vec<_> = f.clauses().to_vec();
        clauses.dedup();
        assert_eq!(clauses.len(), f.num_clauses());
    }
}

proptest! {
    #[test]
    fn dimacs_round_trip(f in formula_strategy(8, 8)) {
        prop_assert_eq!(parse_dimacs(&f.to_dimacs()).unwrap(), f);
    }

    #[test]
    fn model_counts_match_loop(f in formula_strategy(9, 10), bits in any::<u64>(), k in 0usize..=9) {
        let k = k.min(f.num_vars());
        let prefix = PartialAssignment::nth(k, bits & ((1u64 << k) - 1));
        let got = count_models(&f, &prefix).unwrap();
        prop_assert_eq!(got, BigUint::from(models_by_loop(&f, prefix.values())));
    }

    #[test]
    fn deciders_match_loop(f in formula_strategy(8, 8), k in 0usize..=8) {
        let n = f.num_vars();
        let k = k.min(n);
        let counts: Vec<u64> = (0..1u64 << k)
            .map(|i| models_by_loop(&f, PartialAssignment::nth(k, i).values()))
            .collect();
        let half = 1u64 << (n - k);
        prop_assert_eq!(decide_emajsat(&f, k).unwrap().answer, counts.iter().any(|&c| 2 * c > half));
        prop_assert_eq!(decide_eminsat(&f, k).unwrap().answer, counts.iter().any(|&c| 2 * c <= half));
        for ell in 0..=half {
            let d = decide_eexasat(&f, k, &BigUint::from(ell)).unwrap();
            let first = counts.iter().position(|&c| c == ell);
            prop_assert_eq!(d.witness, first.map(|i| PartialAssignment::nth(k, i as u64)));
        }
    }
}
