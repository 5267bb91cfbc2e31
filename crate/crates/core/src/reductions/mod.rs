//! Control instances built from CNF formulas.
//!
//! Each builder turns a formula (plus the prefix length `k`, and `ell` for
//! the exact-count variants) into a [`ControlInstance`] whose control answer
//! matches the formula's quantified counting answer. Builders also record
//! every derived constant so [`validate_instance`] can audit an instance
//! without counting coalitions.

mod banzhaf;
mod constants;
mod layout;
mod shapley;
mod validate;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Game, Weight};

pub use banzhaf::{
    reduce_decrease_banzhaf, reduce_increase_banzhaf, reduce_maintain_banzhaf,
    reduce_nondecrease_banzhaf,
};
pub use constants::{Constant, ReductionConstants};
pub use layout::Group;
pub use shapley::{reduce_decrease_shapley, reduce_increase_shapley, reduce_maintain_shapley};
pub use validate::{validate_instance, Check, ValidationReport};

/// Relation required between the index after and before the addition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Increase,
    Decrease,
    Nonincrease,
    Nondecrease,
    Maintain,
}

impl Goal {
    pub const ALL: [Goal; 5] = [
        Goal::Increase,
        Goal::Decrease,
        Goal::Nonincrease,
        Goal::Nondecrease,
        Goal::Maintain,
    ];

    pub fn holds<T: Ord>(self, after: &T, before: &T) -> bool {
        match self {
            Goal::Increase => after > before,
            Goal::Decrease => after < before,
            Goal::Nonincrease => after <= before,
            Goal::Nondecrease => after >= before,
            Goal::Maintain => after == before,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Goal::Increase => "increase",
            Goal::Decrease => "decrease",
            Goal::Nonincrease => "nonincrease",
            Goal::Nondecrease => "nondecrease",
            Goal::Maintain => "maintain",
        }
    }
}

impl FromStr for Goal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Goal::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown goal `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexKind {
    #[serde(rename = "banzhaf")]
    Banzhaf,
    #[serde(rename = "shapley")]
    ShapleyShubik,
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "banzhaf" | "beta" => Ok(IndexKind::Banzhaf),
            "shapley" | "shapley-shubik" | "phi" => Ok(IndexKind::ShapleyShubik),
            _ => Err(Error::Parameter(format!("unknown index `{s}`"))),
        }
    }
}

/// The seven reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TheoremTag {
    /// Increase-β from E-MajSAT.
    Thm1,
    /// Increase/Nondecrease-φ from E-MajSAT.
    Thm2,
    /// Nondecrease-β from E-MajSAT.
    Thm3a,
    /// Decrease/Nonincrease-β from E-MinSAT.
    Thm3bcBanzhaf,
    /// Decrease/Nonincrease-φ from E-MinSAT.
    Thm3bcShapley,
    /// Maintain-β from E-ExaSAT.
    Thm3dBanzhaf,
    /// Maintain-φ from E-ExaSAT.
    Thm3dShapley,
}

impl TheoremTag {
    pub const ALL: [TheoremTag; 7] = [
        TheoremTag::Thm1,
        TheoremTag::Thm2,
        TheoremTag::Thm3a,
        TheoremTag::Thm3bcBanzhaf,
        TheoremTag::Thm3bcShapley,
        TheoremTag::Thm3dBanzhaf,
        TheoremTag::Thm3dShapley,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            TheoremTag::Thm1 => "thm1",
            TheoremTag::Thm2 => "thm2",
            TheoremTag::Thm3a => "thm3a",
            TheoremTag::Thm3bcBanzhaf => "thm3bc_banzhaf",
            TheoremTag::Thm3bcShapley => "thm3bc_shapley",
            TheoremTag::Thm3dBanzhaf => "thm3d_banzhaf",
            TheoremTag::Thm3dShapley => "thm3d_shapley",
        }
    }

    pub fn index(self) -> IndexKind {
        match self {
            TheoremTag::Thm1
            | TheoremTag::Thm3a
            | TheoremTag::Thm3bcBanzhaf
            | TheoremTag::Thm3dBanzhaf => IndexKind::Banzhaf,
            _ => IndexKind::ShapleyShubik,
        }
    }

    /// Goal the builder writes into the instance.
    pub fn default_goal(self) -> Goal {
        match self {
            TheoremTag::Thm1 | TheoremTag::Thm2 => Goal::Increase,
            TheoremTag::Thm3a => Goal::Nondecrease,
            TheoremTag::Thm3bcBanzhaf | TheoremTag::Thm3bcShapley => Goal::Decrease,
            TheoremTag::Thm3dBanzhaf | TheoremTag::Thm3dShapley => Goal::Maintain,
        }
    }

    /// Goals for which the same instance is answer-preserving.
    pub fn goals(self) -> &'static [Goal] {
        match self {
            TheoremTag::Thm1 => &[Goal::Increase],
            TheoremTag::Thm3a => &[Goal::Nondecrease],
            TheoremTag::Thm2 => &[Goal::Increase, Goal::Nondecrease],
            TheoremTag::Thm3bcBanzhaf | TheoremTag::Thm3bcShapley => {
                &[Goal::Decrease, Goal::Nonincrease]
            }
            TheoremTag::Thm3dBanzhaf | TheoremTag::Thm3dShapley => &[Goal::Maintain],
        }
    }

    pub fn needs_ell(self) -> bool {
        matches!(self, TheoremTag::Thm3dBanzhaf | TheoremTag::Thm3dShapley)
    }
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TheoremTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremTag::ALL
            .into_iter()
            .find(|t| t.tag() == s)
            .ok_or_else(|| Error::UnknownTheorem(s.to_string()))
    }
}

impl Serialize for TheoremTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for TheoremTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A control-by-adding-players instance.
///
/// `distinguished` and group members are 0-based positions in `game`;
/// the JSON form uses 1-based positions.
#[derive(Clone, Debug)]
pub struct ControlInstance {
    pub game: Game,
    /// Weights of the players that may be added (the pool `M`).
    pub addable: Vec<Weight>,
    pub distinguished: usize,
    /// Maximum number of players to add.
    pub budget: usize,
    pub goal: Goal,
    pub index: IndexKind,
    pub groups: Vec<Group>,
    pub constants: ReductionConstants,
}

impl ControlInstance {
    pub fn theorem(&self) -> Option<TheoremTag> {
        self.constants.theorem()
    }

    pub fn group(&self, label: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.label == label)
    }

    /// Weights of the players in group `label`.
    pub fn group_weights(&self, label: &str) -> &[Weight] {
        match self.group(label) {
            Some(g) => &self.game.weights()[g.range()],
            None => &[],
        }
    }

    pub fn group_sum(&self, label: &str) -> BigUint {
        self.group_weights(label).iter().map(|w| w.value()).sum()
    }

    pub fn group_len(&self, label: &str) -> usize {
        self.group(label).map_or(0, |g| g.len)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theorem: Option<TheoremTag>,
    game: Game,
    addable: Vec<Weight>,
    distinguished: usize,
    budget: usize,
    goal: Goal,
    index: IndexKind,
    #[serde(default)]
    groups: serde_json::Map<String, serde_json::Value>,
    #[serde(default)]
    constants: serde_json::Map<String, serde_json::Value>,
}

impl Serialize for ControlInstance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut groups = serde_json::Map::new();
        for g in &self.groups {
            let members: Vec<serde_json::Value> =
                g.range().map(|i| serde_json::Value::from(i + 1)).collect();
            groups.insert(g.label.clone(), serde_json::Value::Array(members));
        }
        InstanceRepr {
            theorem: self.constants.theorem(),
            game: self.game.clone(),
            addable: self.addable.clone(),
            distinguished: self.distinguished + 1,
            budget: self.budget,
            goal: self.goal,
            index: self.index,
            groups,
            constants: self.constants.to_json_map(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ControlInstance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = InstanceRepr::deserialize(deserializer)?;
        if repr.distinguished == 0 || repr.distinguished > repr.game.num_players() {
            return Err(D::Error::custom(format!(
                "distinguished player {} out of range 1..={}",
                repr.distinguished,
                repr.game.num_players()
            )));
        }
        let mut groups = Vec::with_capacity(repr.groups.len());
        for (label, members) in &repr.groups {
            let members: Vec<usize> =
                serde_json::from_value(members.clone()).map_err(D::Error::custom)?;
            groups.push(Group::from_members(label, &members).map_err(D::Error::custom)?);
        }
        groups.sort_by_key(|g| (g.start, g.len));
        let constants = ReductionConstants::from_json_map(repr.theorem, &repr.constants)
            .map_err(D::Error::custom)?;
        Ok(ControlInstance {
            game: repr.game,
            addable: repr.addable,
            distinguished: repr.distinguished - 1,
            budget: repr.budget,
            goal: repr.goal,
            index: repr.index,
            groups,
            constants,
        })
    }
}

/// Builds the instance for `theorem`. `ell` is required by the two
/// exact-count reductions and ignored otherwise.
pub fn build(
    theorem: TheoremTag,
    formula: &crate::cnf::CnfFormula,
    k: usize,
    ell: Option<&BigUint>,
) -> Result<ControlInstance> {
    let need_ell = || {
        ell.ok_or_else(|| Error::Parameter(format!("{theorem} needs a value for ell")))
    };
    match theorem {
        TheoremTag::Thm1 => reduce_increase_banzhaf(formula, k),
        TheoremTag::Thm2 => reduce_increase_shapley(formula, k),
        TheoremTag::Thm3a => reduce_nondecrease_banzhaf(formula, k),
        TheoremTag::Thm3bcBanzhaf => reduce_decrease_banzhaf(formula, k),
        TheoremTag::Thm3bcShapley => reduce_decrease_shapley(formula, k),
        TheoremTag::Thm3dBanzhaf => reduce_maintain_banzhaf(formula, k, need_ell()?),
        TheoremTag::Thm3dShapley => reduce_maintain_shapley(formula, k, need_ell()?),
    }
}
