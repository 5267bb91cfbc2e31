//! Exhaustive control deciders and the reduction verification harness.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cnf::{decide_eexasat, decide_emajsat, decide_eminsat, CnfFormula, SatDecision};
use crate::counting::CountingStrategy;
use crate::error::{Error, Result};
use crate::game::{banzhaf, shapley_shubik, Game, RationalIndex, Weight};
use crate::reductions::{
    build, validate_instance, ControlInstance, Goal, IndexKind, TheoremTag, ValidationReport,
};

/// Index of `player` in `game`.
pub fn power_index(
    game: &Game,
    player: usize,
    kind: IndexKind,
    strategy: &CountingStrategy,
) -> Result<RationalIndex> {
    match kind {
        IndexKind::Banzhaf => banzhaf(game, player, strategy),
        IndexKind::ShapleyShubik => shapley_shubik(game, player, strategy),
    }
}

/// Outcome of a control query.
///
/// `candidate` is the witness on "yes" and the extremal subset on "no"
/// (largest index for Increase/Nondecrease, smallest for
/// Decrease/Nonincrease, closest for Maintain). Positions are 0-based
/// indices into the addable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlDecision {
    pub answer: bool,
    pub witness: Option<Vec<usize>>,
    pub candidate: Option<Vec<usize>>,
    pub before: RationalIndex,
    pub after: Option<RationalIndex>,
}

fn one_based(v: &Option<Vec<usize>>) -> Option<Vec<usize>> {
    v.as_ref().map(|s| s.iter().map(|i| i + 1).collect())
}

impl Serialize for ControlDecision {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            answer: &'static str,
            witness: Option<Vec<usize>>,
            candidate: Option<Vec<usize>>,
            before: &'a RationalIndex,
            after: Option<&'a RationalIndex>,
        }
        Repr {
            answer: if self.answer { "yes" } else { "no" },
            witness: one_based(&self.witness),
            candidate: one_based(&self.candidate),
            before: &self.before,
            after: self.after.as_ref(),
        }
        .serialize(serializer)
    }
}

/// Nonempty subsets of `0..n` with at most `budget` elements, in
/// lexicographic order of their sorted element lists.
fn subsets(n: usize, budget: usize) -> Vec<Vec<usize>> {
    fn walk(n: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let from = cur.last().map_or(0, |&l| l + 1);
        for i in from..n {
            cur.push(i);
            out.push(cur.clone());
            if cur.len() < budget {
                walk(n, budget, cur, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if budget > 0 {
        walk(n, budget, &mut Vec::new(), &mut out);
    }
    out
}

/// Decides whether adding at most `budget` (and at least one) of the
/// addable players achieves the goal for the distinguished player.
pub fn decide_control(
    instance: &ControlInstance,
    strategy: &CountingStrategy,
) -> Result<ControlDecision> {
    let game = &instance.game;
    let p = instance.distinguished;
    if p >= game.num_players() {
        return Err(Error::PlayerOutOfRange {
            player: p,
            players: game.num_players(),
        });
    }
    let budget = instance.budget.min(instance.addable.len());
    strategy.resolve(game.num_players() + budget)?;
    let before = power_index(game, p, instance.index, strategy)?;

    let candidates = subsets(instance.addable.len(), budget);
    let afters: Vec<RationalIndex> = candidates
        .par_iter()
        .map(|set| {
            let extra: Vec<Weight> = set.iter().map(|&i| instance.addable[i].clone()).collect();
            power_index(&game.with_added(&extra), p, instance.index, strategy)
        })
        .collect::<Result<_>>()?;

    let goal = instance.goal;
    if let Some(i) = afters.iter().position(|a| goal.holds(a, &before)) {
        return Ok(ControlDecision {
            answer: true,
            witness: Some(candidates[i].clone()),
            candidate: Some(candidates[i].clone()),
            before,
            after: Some(afters[i].clone()),
        });
    }
    let better = |a: &RationalIndex, b: &RationalIndex| match goal {
        Goal::Increase | Goal::Nondecrease => a > b,
        Goal::Decrease | Goal::Nonincrease => a < b,
        Goal::Maintain => a.abs_diff(&before) < b.abs_diff(&before),
    };
    let mut best: Option<usize> = None;
    for (i, a) in afters.iter().enumerate() {
        if best.map_or(true, |b| better(a, &afters[b])) {
            best = Some(i);
        }
    }
    Ok(ControlDecision {
        answer: false,
        witness: None,
        candidate: best.map(|i| candidates[i].clone()),
        before,
        after: best.map(|i| afters[i].clone()),
    })
}

/// SAT-side decision matching `theorem`.
pub fn decide_sat_side(
    theorem: TheoremTag,
    formula: &CnfFormula,
    k: usize,
    ell: Option<&BigUint>,
) -> Result<SatDecision> {
    match theorem {
        TheoremTag::Thm1 | TheoremTag::Thm2 | TheoremTag::Thm3a => decide_emajsat(formula, k),
        TheoremTag::Thm3bcBanzhaf | TheoremTag::Thm3bcShapley => decide_eminsat(formula, k),
        TheoremTag::Thm3dBanzhaf | TheoremTag::Thm3dShapley => {
            let ell = ell.ok_or_else(|| {
                Error::Parameter(format!("{theorem} needs a value for ell"))
            })?;
            decide_eexasat(formula, k, ell)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    /// Both sides decided and compared.
    Full,
    /// Control side too large to count; structural checks only.
    Structural,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Largest `players + budget` for which the control side is counted.
    pub full_limit: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { full_limit: 40 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub theorem: TheoremTag,
    pub mode: VerifyMode,
    pub players: usize,
    pub sat: SatDecision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlDecision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agree: Option<bool>,
    pub structural: ValidationReport,
    pub note: String,
}

impl VerificationReport {
    /// Agreement in full mode, clean validation in structural mode.
    pub fn ok(&self) -> bool {
        self.agree.unwrap_or(true) && self.structural.passed()
    }
}

/// Builds the instance for `theorem`, decides both sides where feasible and
/// reports whether the answers agree.
pub fn verify_reduction(
    theorem: TheoremTag,
    formula: &CnfFormula,
    k: usize,
    ell: Option<&BigUint>,
    strategy: &CountingStrategy,
) -> Result<VerificationReport> {
    verify_reduction_with(theorem, formula, k, ell, strategy, VerifyOptions::default())
}

pub fn verify_reduction_with(
    theorem: TheoremTag,
    formula: &CnfFormula,
    k: usize,
    ell: Option<&BigUint>,
    strategy: &CountingStrategy,
    options: VerifyOptions,
) -> Result<VerificationReport> {
    let instance = build(theorem, formula, k, ell)?;
    let sat = decide_sat_side(theorem, formula, k, ell)?;
    let structural = validate_instance(&instance);
    let players = instance.game.num_players();
    let size = players + instance.budget;
    let countable = matches!(
        theorem,
        TheoremTag::Thm1 | TheoremTag::Thm3a | TheoremTag::Thm3dBanzhaf | TheoremTag::Thm3bcBanzhaf
    ) && size <= options.full_limit;

    if !countable {
        let note = if theorem.index() == IndexKind::ShapleyShubik {
            format!("structural only: {players}-player Shapley-Shubik instance is beyond counting")
        } else {
            format!("structural only: {size} players exceed the full-check limit {}", options.full_limit)
        };
        return Ok(VerificationReport {
            theorem,
            mode: VerifyMode::Structural,
            players,
            sat,
            control: None,
            agree: None,
            structural,
            note,
        });
    }
    let control = decide_control(&instance, strategy)?;
    let agree = control.answer == sat.answer;
    Ok(VerificationReport {
        theorem,
        mode: VerifyMode::Full,
        players,
        sat,
        agree: Some(agree),
        control: Some(control),
        structural,
        note: format!("both sides decided on {players} players"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_in_lexicographic_order() {
        let s = subsets(3, 2);
        assert_eq!(
            s,
            vec![vec![0], vec![0, 1], vec![0, 2], vec![1], vec![1, 2], vec![2]]
        );
        assert!(subsets(3, 0).is_empty());
        assert_eq!(subsets(4, 4).len(), 15);
    }
}
