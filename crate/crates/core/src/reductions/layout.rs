use std::ops::Range;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::game::Weight;

/// A labeled run of consecutive player positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub label: String,
    pub start: usize,
    pub len: usize,
}

impl Group {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    /// From 1-based member positions, which must form a consecutive run.
    pub(crate) fn from_members(label: &str, members: &[usize]) -> std::result::Result<Self, String> {
        let Some(&first) = members.first() else {
            return Ok(Group {
                label: label.to_string(),
                start: 0,
                len: 0,
            });
        };
        if first == 0 {
            return Err(format!("group `{label}`: positions are 1-based"));
        }
        if members.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(format!("group `{label}` is not a consecutive run of positions"));
        }
        Ok(Group {
            label: label.to_string(),
            start: first - 1,
            len: members.len(),
        })
    }
}

/// Accumulates weights group by group.
#[derive(Default)]
pub(crate) struct Layout {
    weights: Vec<Weight>,
    groups: Vec<Group>,
}

impl Layout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn group<I>(&mut self, label: impl Into<String>, weights: I)
    where
        I: IntoIterator<Item = BigUint>,
    {
        self.group_of(label, weights.into_iter().map(Weight::new));
    }

    pub fn group_of<I>(&mut self, label: impl Into<String>, weights: I)
    where
        I: IntoIterator<Item = Weight>,
    {
        let start = self.weights.len();
        self.weights.extend(weights);
        self.groups.push(Group {
            label: label.into(),
            start,
            len: self.weights.len() - start,
        });
    }

    /// `count` players sharing one weight.
    pub fn repeat(&mut self, label: impl Into<String>, count: usize, weight: &BigUint) {
        let w = Weight::new(weight.clone());
        self.group_of(label, std::iter::repeat(w).take(count));
    }

    pub fn finish(self) -> (Vec<Weight>, Vec<Group>) {
        (self.weights, self.groups)
    }
}

/// `q - x`, which must stay positive for a defining player's weight.
pub(crate) fn below(q: &BigUint, x: &BigUint) -> Result<BigUint> {
    if x >= q {
        return Err(Error::Infeasible(format!(
            "a defining weight would be nonpositive (q = {q}, deficit = {x})"
        )));
    }
    Ok(q - x)
}
