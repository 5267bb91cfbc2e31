use num_bigint::BigUint;
use wvg_core::reductions::{
    reduce_increase_banzhaf, reduce_maintain_banzhaf, ControlInstance, Goal, IndexKind,
    ReductionConstants,
};
use wvg_core::{
    decide_control, verify_reduction, CnfFormula, CountingStrategy, Game, RationalIndex, VerifyMode,
    Weight,
};

fn or2() -> CnfFormula {
    CnfFormula::new(2, &[vec![1, 2]]).unwrap()
}

fn u(v: u64) -> BigUint {
    BigUint::from(v)
}

fn plain(weights: &[u64], quota: u64, addable: &[u64], budget: usize, goal: Goal) -> ControlInstance {
    ControlInstance {
        game: Game::from_u64(weights, quota).unwrap(),
        addable: addable.iter().map(|&w| Weight::from(w)).collect(),
        distinguished: 0,
        budget,
        goal,
        index: IndexKind::Banzhaf,
        groups: Vec::new(),
        constants: ReductionConstants::default(),
    }
}

#[test]
fn increase_witness_on_or2() {
    let inst = reduce_increase_banzhaf(&or2(), 1).unwrap();
    let d = decide_control(&inst, &CountingStrategy::enumerate()).unwrap();
    assert!(d.answer);
    assert_eq!(d.witness, Some(vec![0]));
    assert_eq!(d.before, RationalIndex::new(u(1), u(64)));
    assert_eq!(d.after, Some(RationalIndex::new(u(3), u(128))));
    let json = serde_json::to_value(&d).unwrap();
    assert_eq!(json["answer"], "yes");
    assert_eq!(json["witness"], serde_json::json!([1]));
    assert_eq!(json["before"], "1/64");
}

#[test]
fn null_player_maintains_banzhaf() {
    let inst = plain(&[2, 1, 1], 3, &[0], 1, Goal::Maintain);
    let d = decide_control(&inst, &CountingStrategy::auto()).unwrap();
    assert!(d.answer);
    assert_eq!(d.before, d.after.unwrap());
}

#[test]
fn maintain_with_unreachable_count_is_no() {
    let inst = reduce_maintain_banzhaf(&or2(), 1, &u(4)).unwrap();
    let d = decide_control(&inst, &CountingStrategy::enumerate()).unwrap();
    assert!(!d.answer);
    assert!(d.witness.is_none());
    assert!(d.candidate.is_some());
}

#[test]
fn extremal_candidate_on_no() {
    // Adding heavy players only dilutes player 1.
    let inst = plain(&[1, 1], 2, &[5, 1], 2, Goal::Increase);
    let d = decide_control(&inst, &CountingStrategy::auto()).unwrap();
    assert!(!d.answer);
    let best = d.after.unwrap();
    for set in [vec![5u64], vec![1], vec![5, 1]] {
        let mut w = vec![1u64, 1];
        w.extend(&set);
        let g = Game::from_u64(&w, 2).unwrap();
        let b = wvg_core::banzhaf(&g, 0, &CountingStrategy::auto()).unwrap();
        assert!(b <= best);
    }
}

#[test]
fn goals_are_consistent() {
    let inst = plain(&[3, 2, 2], 4, &[1, 2, 3], 2, Goal::Increase);
    let s = CountingStrategy::auto();
    let with = |goal| {
        let mut i = inst.clone();
        i.goal = goal;
        decide_control(&i, &s).unwrap()
    };
    let inc = with(Goal::Increase);
    if inc.answer {
        assert!(with(Goal::Nondecrease).answer);
    }
    let maintain = with(Goal::Maintain);
    if maintain.answer {
        assert!(with(Goal::Nondecrease).answer && with(Goal::Nonincrease).answer);
    }
}

#[test]
fn verify_examples() {
    let s = CountingStrategy::enumerate();
    let r = verify_reduction("thm1".parse().unwrap(), &or2(), 1, None, &s).unwrap();
    assert_eq!(r.mode, VerifyMode::Full);
    assert!(r.sat.answer && r.control.as_ref().unwrap().answer);
    assert_eq!(r.agree, Some(true));

    let units = CnfFormula::new(2, &[vec![1], vec![2]]).unwrap();
    let r = verify_reduction("thm1".parse().unwrap(), &units, 1, None, &s).unwrap();
    assert!(!r.sat.answer && !r.control.as_ref().unwrap().answer);
    assert_eq!(r.agree, Some(true));

    let r = verify_reduction("thm3d_banzhaf".parse().unwrap(), &or2(), 1, Some(&u(2)), &s).unwrap();
    assert!(r.sat.answer);
    assert_eq!(r.agree, Some(true));

    let r = verify_reduction("thm2".parse().unwrap(), &or2(), 1, None, &s).unwrap();
    assert_eq!(r.mode, VerifyMode::Structural);
    assert!(r.agree.is_none() && r.ok());
}
