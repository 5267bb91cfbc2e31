use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use wvg_core::reductions::{
    build, reduce_decrease_banzhaf, reduce_decrease_shapley, reduce_increase_banzhaf,
    reduce_increase_shapley, reduce_maintain_banzhaf, reduce_maintain_shapley,
    reduce_nondecrease_banzhaf, validate_instance, ControlInstance, Goal, TheoremTag,
};
use wvg_core::{banzhaf, CnfFormula, CountingStrategy, Game, RationalIndex, Weight};

fn or2() -> CnfFormula {
    CnfFormula::new(2, &[vec![1, 2]]).unwrap()
}

fn wide(n: usize) -> CnfFormula {
    CnfFormula::new(n, &[(1..=n as i64).collect()]).unwrap()
}

fn u(v: u64) -> BigUint {
    BigUint::from(v)
}

fn weights_of(inst: &ControlInstance, label: &str) -> Vec<BigUint> {
    inst.group_weights(label).iter().map(|w| w.value().clone()).collect()
}

fn assert_valid(inst: &ControlInstance) {
    let report = validate_instance(inst);
    let failures: Vec<_> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

fn sizes(inst: &ControlInstance) -> Vec<(String, usize)> {
    inst.groups.iter().map(|g| (g.label.clone(), g.len)).collect()
}

#[test]
fn increase_banzhaf_example() {
    let inst = reduce_increase_banzhaf(&or2(), 1).unwrap();
    assert_eq!(inst.game.num_players(), 7);
    assert_eq!(*inst.game.quota(), u(44065));
    assert_eq!(weights_of(&inst, "W"), vec![u(33043)]);
    assert_eq!(weights_of(&inst, "Y"), vec![u(44064)]);
    assert_eq!(inst.constants.uint("q1").unwrap(), u(11020));
    let want: Vec<(String, usize)> = [("p", 1), ("A", 2), ("C", 1), ("W", 1), ("X", 1), ("Y", 1), ("Z", 0)]
        .iter()
        .map(|(l, s)| (l.to_string(), *s))
        .collect();
    assert_eq!(sizes(&inst), want);
    assert_eq!(inst.goal, Goal::Increase);
    assert_valid(&inst);
    let beta = banzhaf(&inst.game, 0, &CountingStrategy::enumerate()).unwrap();
    assert_eq!(beta, RationalIndex::new(u(1), u(64)));
}

#[test]
fn increase_banzhaf_rejects_full_prefix() {
    assert!(reduce_increase_banzhaf(&or2(), 2).is_err());
}

#[test]
fn nondecrease_banzhaf_example() {
    let inst = reduce_nondecrease_banzhaf(&or2(), 1).unwrap();
    assert_eq!(inst.game.num_players(), 8);
    let heavy = inst
        .game
        .weights()
        .iter()
        .filter(|w| *w.value() == u(44064))
        .count();
    assert_eq!(heavy, 2);
    assert_eq!(inst.group_len("Y"), 2);
    assert_valid(&inst);
    let beta = banzhaf(&inst.game, 0, &CountingStrategy::enumerate()).unwrap();
    assert_eq!(beta, RationalIndex::new(u(2), u(128)));
    assert!(reduce_nondecrease_banzhaf(&or2(), 0).is_err());
}

#[test]
fn increase_shapley_example() {
    let inst = reduce_increase_shapley(&or2(), 1).unwrap();
    let c = &inst.constants;
    assert_eq!(c.int("P").unwrap(), BigInt::from(187));
    assert_eq!(c.int("delta").unwrap(), BigInt::from(81));
    assert_eq!(c.int("x").unwrap(), BigInt::from(93));
    assert_eq!(c.rational("k_prime").unwrap(), BigRational::from_integer(2.into()));
    assert_eq!(c.uint("z").unwrap(), u(3));
    assert_eq!(c.exponents("z_exponents").unwrap(), &[1, 0]);
    assert_eq!(inst.game.num_players(), 187);
    assert!(!inst.game.quota().bit(0));
    let report = validate_instance(&inst);
    assert!(report.passed(), "{:#?}", report.failures().collect::<Vec<_>>());
    assert!(report.check("x_is_half").unwrap().passed);
    assert!(report.check("size_identity_S").unwrap().passed);
}

#[test]
fn decrease_banzhaf_example() {
    let inst = reduce_decrease_banzhaf(&wide(3), 2).unwrap();
    let c = &inst.constants;
    assert_eq!(c.uint("h_prime").unwrap(), u(8));
    assert_eq!(c.uint("h").unwrap(), u(24));
    assert_eq!(c.uint("z").unwrap(), u(48));
    assert_eq!(c.uint("e").unwrap(), u(240));
    assert_eq!(c.small("t").unwrap(), 3);
    assert_eq!(inst.game.num_players(), 51);
    assert_valid(&inst);
    assert!(reduce_decrease_banzhaf(&wide(3), 1).is_err());
}

#[test]
fn decrease_shapley_example() {
    let inst = reduce_decrease_shapley(&wide(4), 3).unwrap();
    let c = &inst.constants;
    assert_eq!(c.int("P_prime").unwrap(), BigInt::from(1960));
    assert_eq!(c.int("delta").unwrap(), BigInt::from(2410));
    assert_eq!(c.int("P").unwrap(), BigInt::from(4370));
    assert_eq!(c.int("s").unwrap(), BigInt::from(2428));
    let kp = c.rational("k_prime").unwrap();
    assert!(kp > BigRational::from_integer(9.into()) && kp < BigRational::from_integer(64.into()));
    assert_eq!(inst.game.num_players(), 4370);
    assert_eq!(inst.group_len("S_prime"), 4 * 3 - 2);
    assert_valid(&inst);
    assert!(reduce_decrease_shapley(&wide(4), 2).is_err());
}

#[test]
fn maintain_banzhaf_examples() {
    let inst = reduce_maintain_banzhaf(&or2(), 1, &u(2)).unwrap();
    assert_eq!(inst.constants.exponents("ell_exponents").unwrap(), &[1]);
    assert_eq!(inst.constants.uint("z_1").unwrap(), u(2));
    assert_eq!(inst.constants.small("t").unwrap(), 1);
    assert_eq!(*inst.game.quota(), u(44069));
    assert_eq!(inst.game.num_players(), 9);
    assert_valid(&inst);
    let beta = banzhaf(&inst.game, 0, &CountingStrategy::enumerate()).unwrap();
    assert_eq!(beta, RationalIndex::new(u(2), u(256)));

    let one = reduce_maintain_banzhaf(&or2(), 1, &u(1)).unwrap();
    let q = one.game.quota().clone();
    assert_eq!(weights_of(&one, "Y_1"), vec![q - 1u32]);
    assert_eq!(one.group_len("Z_1"), 0);
    assert_valid(&one);

    assert!(reduce_maintain_banzhaf(&or2(), 1, &u(0)).is_err());
}

#[test]
fn maintain_shapley_example() {
    let inst = reduce_maintain_shapley(&wide(3), 1, &u(1)).unwrap();
    let c = &inst.constants;
    assert_eq!(c.uint("alpha").unwrap(), u(302));
    assert_eq!(c.uint("P").unwrap(), u(91203));
    assert_eq!(c.small("z_star").unwrap(), 16);
    assert_eq!(c.small("s").unwrap(), 22);
    assert_eq!(c.uint("z").unwrap(), u(23));
    assert_eq!(c.exponents("z_exponents").unwrap(), &[4, 2, 1, 0]);
    let y1 = c.exponents("y_exponents").unwrap()[0] as f64;
    assert!(y1 < 2.0 * 302f64.log2());
    assert_eq!(inst.game.num_players(), 91203);
    assert_valid(&inst);
    assert!(reduce_maintain_shapley(&or2(), 1, &u(1)).is_err());
}

fn corrupt(inst: &mut ControlInstance, label: &str, index: usize) {
    let g = inst.group(label).unwrap().clone();
    let mut weights = inst.game.weights().to_vec();
    let w = weights[g.start + index].value() + 1u32;
    weights[g.start + index] = Weight::new(w);
    inst.game = Game::new(weights, inst.game.quota().clone()).unwrap();
}

#[test]
fn perturbed_weight_breaks_size_identity() {
    let mut inst = reduce_increase_shapley(&or2(), 1).unwrap();
    corrupt(&mut inst, "S", 0);
    let report = validate_instance(&inst);
    assert!(!report.check("size_identity_S").unwrap().passed);

    let mut inst = reduce_maintain_shapley(&wide(3), 1, &u(1)).unwrap();
    corrupt(&mut inst, "X_1_1", 0);
    let report = validate_instance(&inst);
    assert!(!report.check("size_identity_X").unwrap().passed);
}

#[test]
fn perturbed_weight_breaks_banzhaf_audit() {
    let mut inst = reduce_increase_banzhaf(&or2(), 1).unwrap();
    corrupt(&mut inst, "Y", 0);
    assert!(!validate_instance(&inst).passed());
    let mut inst = reduce_decrease_banzhaf(&wide(3), 2).unwrap();
    corrupt(&mut inst, "A", 0);
    assert!(!validate_instance(&inst).check("quota").unwrap().passed);
}

#[test]
fn json_round_trip_keeps_validation() {
    for inst in [
        reduce_increase_banzhaf(&or2(), 1).unwrap(),
        reduce_maintain_banzhaf(&or2(), 1, &u(1)).unwrap(),
        reduce_increase_shapley(&or2(), 1).unwrap(),
    ] {
        let text = inst.to_json().unwrap();
        let back = ControlInstance::from_json(&text).unwrap();
        assert_eq!(back.game, inst.game);
        assert_eq!(back.theorem(), inst.theorem());
        assert_eq!(back.distinguished, 0);
        assert_valid(&back);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["distinguished"], 1);
        assert!(value["constants"]["q"].is_string());
    }
}

#[test]
fn dispatcher_requires_ell() {
    assert!(build(TheoremTag::Thm3dBanzhaf, &or2(), 1, None).is_err());
    let inst = build(TheoremTag::Thm3dBanzhaf, &or2(), 1, Some(&u(3))).unwrap();
    assert_eq!(inst.theorem(), Some(TheoremTag::Thm3dBanzhaf));
    assert_eq!("thm3bc_shapley".parse::<TheoremTag>().unwrap(), TheoremTag::Thm3bcShapley);
    assert!("thm9".parse::<TheoremTag>().is_err());
}

#[test]
fn small_suite_validates() {
    let formulas = [
        or2(),
        CnfFormula::new(2, &[vec![1], vec![2]]).unwrap(),
        CnfFormula::new(3, &[vec![1, -2], vec![2, 3]]).unwrap(),
        CnfFormula::new(3, &[vec![-1, 2, 3], vec![1, -3], vec![-2]]).unwrap(),
    ];
    for f in &formulas {
        let n = f.num_vars();
        for k in 1..n {
            assert_valid(&reduce_increase_banzhaf(f, k).unwrap());
            assert_valid(&reduce_nondecrease_banzhaf(f, k).unwrap());
            assert_valid(&reduce_increase_shapley(f, k).unwrap());
            if k >= 2 {
                assert_valid(&reduce_decrease_banzhaf(f, k).unwrap());
            }
        }
        for k in 1..=n {
            for ell in 1..=(1u64 << n) {
                assert_valid(&reduce_maintain_banzhaf(f, k, &u(ell)).unwrap());
            }
        }
    }
}
