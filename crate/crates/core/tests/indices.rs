use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use proptest::prelude::*;
use wvg_core::counting::{count_subsets_in_band, count_subsets_in_band_by_size};
use wvg_core::{
    banzhaf, is_pivotal, shapley_shubik, Coalition, CountingStrategy, Game, RationalIndex, Weight,
};

fn all_strategies() -> Vec<CountingStrategy> {
    vec![
        CountingStrategy::enumerate(),
        CountingStrategy::meet_in_the_middle(),
        CountingStrategy::sparse_dp(),
        CountingStrategy::auto(),
    ]
}

fn ratio(n: u64, d: u64) -> RationalIndex {
    RationalIndex::new(n.into(), d.into())
}

/// Swing count over all coalitions of the other players.
fn naive_banzhaf(weights: &[u64], quota: u64, p: usize) -> Ratio<BigUint> {
    let n = weights.len();
    let mut swings = 0u64;
    for mask in 0u64..1 << n {
        if mask >> p & 1 == 1 {
            continue;
        }
        let s: u64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
        if s < quota && s + weights[p] >= quota {
            swings += 1;
        }
    }
    Ratio::new(swings.into(), BigUint::one() << (n - 1))
}

/// Fraction of player orderings in which `p` turns the running sum winning.
fn naive_shapley(weights: &[u64], quota: u64, p: usize) -> Ratio<BigUint> {
    fn permute(order: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
        if k == order.len() {
            visit(order);
            return;
        }
        for i in k..order.len() {
            order.swap(k, i);
            permute(order, k + 1, visit);
            order.swap(k, i);
        }
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    let (mut hits, mut total) = (0u64, 0u64);
    permute(&mut order, 0, &mut |o| {
        total += 1;
        let mut s = 0;
        for &i in o {
            if i == p {
                if s < quota && s + weights[p] >= quota {
                    hits += 1;
                }
                break;
            }
            s += weights[i];
        }
    });
    Ratio::new(hits.into(), total.into())
}

fn game_strategy(max_players: usize, max_weight: u64) -> impl Strategy<Value = (Vec<u64>, u64)> {
    prop::collection::vec(0..=max_weight, 1..=max_players).prop_flat_map(|w| {
        let total: u64 = w.iter().sum();
        (Just(w), 1..=total + 2)
    })
}

#[test]
fn small_game_values() {
    let g = Game::from_u64(&[2, 1, 1], 3).unwrap();
    let s = CountingStrategy::auto();
    assert_eq!(banzhaf(&g, 0, &s).unwrap(), ratio(3, 4));
    assert_eq!(shapley_shubik(&g, 0, &s).unwrap(), ratio(2, 3));
    assert_eq!(shapley_shubik(&g, 1, &s).unwrap(), ratio(1, 6));
    assert_eq!(banzhaf(&g, 1, &s).unwrap(), ratio(1, 4));

    let dictator = Game::from_u64(&[5, 1, 1], 5).unwrap();
    assert_eq!(banzhaf(&dictator, 0, &s).unwrap(), RationalIndex::one());
    assert_eq!(shapley_shubik(&dictator, 1, &s).unwrap(), RationalIndex::zero());
}

#[test]
fn index_rejects_unknown_player() {
    let g = Game::from_u64(&[1, 1], 2).unwrap();
    assert!(banzhaf(&g, 2, &CountingStrategy::auto()).is_err());
    assert!(Game::from_u64(&[1], 0).is_err());
    assert!(Game::from_u64(&[], 1).is_err());
}

#[test]
fn huge_weights_stay_exact() {
    let big: BigUint = BigUint::one() << 200u32;
    let weights = vec![
        Weight::new(&big * 2u32),
        Weight::new(big.clone()),
        Weight::new(big.clone()),
    ];
    let g = Game::new(weights, &big * 3u32).unwrap();
    for s in all_strategies() {
        assert_eq!(banzhaf(&g, 0, &s).unwrap(), ratio(3, 4));
        assert_eq!(shapley_shubik(&g, 2, &s).unwrap(), ratio(1, 6));
    }
}

#[test]
fn rational_index_text_form() {
    let r: RationalIndex = "6/8".parse().unwrap();
    assert_eq!(r, ratio(3, 4));
    assert_eq!(r.to_string(), "3/4");
    assert_eq!(serde_json::to_string(&r).unwrap(), "\"3/4\"");
    assert!("1/0".parse::<RationalIndex>().is_err());
}

#[test]
fn strategy_caps_are_errors() {
    let g = Game::from_u64(&[1; 6], 3).unwrap();
    let mut s = CountingStrategy::enumerate();
    s.enumerate_cap = 4;
    assert!(banzhaf(&g, 0, &s).is_err());
    s.enumerate_cap = 5;
    assert!(banzhaf(&g, 0, &s).is_ok());
    let mut dp = CountingStrategy::sparse_dp();
    dp.sparse_state_cap = 2;
    let spread = Game::from_u64(&[1, 2, 4, 8, 16, 32], 40).unwrap();
    assert!(banzhaf(&spread, 5, &dp).is_err());
    dp.sparse_state_cap = 1 << 10;
    assert!(banzhaf(&spread, 5, &dp).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn banzhaf_matches_subset_oracle((weights, quota) in game_strategy(9, 40)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        for p in 0..weights.len() {
            let want = naive_banzhaf(&weights, quota, p);
            for s in all_strategies() {
                prop_assert_eq!(banzhaf(&g, p, &s).unwrap().as_ratio().clone(), want.clone());
            }
        }
    }

    #[test]
    fn shapley_matches_permutation_oracle((weights, quota) in game_strategy(6, 40)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        for p in 0..weights.len() {
            let want = naive_shapley(&weights, quota, p);
            for s in all_strategies() {
                prop_assert_eq!(shapley_shubik(&g, p, &s).unwrap().as_ratio().clone(), want.clone());
            }
        }
    }

    #[test]
    fn shapley_is_efficient((weights, quota) in game_strategy(12, 1_000_000)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        let s = CountingStrategy::auto();
        let sum: Ratio<BigUint> = (0..weights.len())
            .map(|p| shapley_shubik(&g, p, &s).unwrap().as_ratio().clone())
            .sum();
        let wins = weights.iter().sum::<u64>() >= quota;
        prop_assert_eq!(sum, if wins { Ratio::one() } else { Ratio::zero() });
    }

    #[test]
    fn equal_weights_get_equal_indices((weights, quota) in game_strategy(10, 30)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        let s = CountingStrategy::auto();
        for i in 0..weights.len() {
            for j in i + 1..weights.len() {
                if weights[i] == weights[j] {
                    prop_assert_eq!(banzhaf(&g, i, &s).unwrap(), banzhaf(&g, j, &s).unwrap());
                    prop_assert_eq!(shapley_shubik(&g, i, &s).unwrap(), shapley_shubik(&g, j, &s).unwrap());
                }
            }
        }
    }

    #[test]
    fn heavier_players_are_not_weaker((weights, quota) in game_strategy(10, 30)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        let s = CountingStrategy::auto();
        for i in 0..weights.len() {
            for j in 0..weights.len() {
                if weights[i] > weights[j] {
                    prop_assert!(banzhaf(&g, i, &s).unwrap() >= banzhaf(&g, j, &s).unwrap());
                    prop_assert!(shapley_shubik(&g, i, &s).unwrap() >= shapley_shubik(&g, j, &s).unwrap());
                }
            }
        }
    }

    #[test]
    fn zero_weight_is_null((weights, quota) in game_strategy(10, 30)) {
        let mut weights = weights;
        weights.push(0);
        let g = Game::from_u64(&weights, quota).unwrap();
        let p = weights.len() - 1;
        for s in all_strategies() {
            prop_assert!(banzhaf(&g, p, &s).unwrap().is_zero());
            prop_assert!(shapley_shubik(&g, p, &s).unwrap().is_zero());
        }
    }

    #[test]
    fn relabelling_permutes_indices(
        (weights, quota) in game_strategy(10, 50),
        seed in any::<u64>(),
    ) {
        let n = weights.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let shuffled: Vec<u64> = perm.iter().map(|&i| weights[i]).collect();
        let g = Game::from_u64(&weights, quota).unwrap();
        let h = Game::from_u64(&shuffled, quota).unwrap();
        let s = CountingStrategy::auto();
        for (pos, &orig) in perm.iter().enumerate() {
            prop_assert_eq!(banzhaf(&h, pos, &s).unwrap(), banzhaf(&g, orig, &s).unwrap());
            prop_assert_eq!(shapley_shubik(&h, pos, &s).unwrap(), shapley_shubik(&g, orig, &s).unwrap());
        }
    }

    #[test]
    fn band_counts_by_size_add_up(
        weights in prop::collection::vec(0u64..=25, 0..=14),
        lo in 0u64..=80,
        width in 0u64..=40,
    ) {
        let ws: Vec<Weight> = weights.iter().map(|&w| Weight::from(w)).collect();
        let (lo_b, hi_b) = (BigUint::from(lo), BigUint::from(lo + width));
        let mut want = vec![0u64; weights.len() + 1];
        for mask in 0u64..1 << weights.len() {
            let s: u64 = (0..weights.len()).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum();
            if s >= lo && s <= lo + width {
                want[mask.count_ones() as usize] += 1;
            }
        }
        for s in all_strategies() {
            let by_size = count_subsets_in_band_by_size(&ws, &lo_b, &hi_b, &s).unwrap();
            let got: Vec<BigUint> = by_size.as_slice().to_vec();
            let want_big: Vec<BigUint> = want.iter().map(|&c| c.into()).collect();
            prop_assert_eq!(&got, &want_big);
            prop_assert_eq!(count_subsets_in_band(&ws, &lo_b, &hi_b, &s).unwrap(), by_size.total());
        }
    }

    #[test]
    fn pivot_predicate_matches_banzhaf((weights, quota) in game_strategy(8, 20)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        let n = weights.len();
        for p in 0..n {
            let mut swings = 0u64;
            for mask in 0u64..1 << n {
                if mask >> p & 1 == 1 {
                    continue;
                }
                let c: Coalition = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                swings += is_pivotal(&g, p, &c).unwrap() as u64;
            }
            let beta = banzhaf(&g, p, &CountingStrategy::auto()).unwrap();
            prop_assert_eq!(beta.as_ratio(), &Ratio::new(swings.into(), BigUint::one() << (n - 1)));
        }
    }

    #[test]
    fn game_json_round_trip((weights, quota) in game_strategy(8, 1_000_000)) {
        let g = Game::from_u64(&weights, quota).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: Game = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, g);
    }
}
