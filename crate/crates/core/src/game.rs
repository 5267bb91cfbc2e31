//! Weighted voting games, coalitions and the two power indices.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::counting::{self, CountingStrategy};
use crate::error::{Error, Result};

/// A nonnegative vote weight.
///
/// Reduction instances repeat a handful of huge weights millions of times,
/// so the value sits behind an `Arc` and clones are cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Weight(Arc<BigUint>);

impl Weight {
    pub fn new(value: BigUint) -> Self {
        Weight(Arc::new(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl Deref for Weight {
    type Target = BigUint;

    fn deref(&self) -> &BigUint {
        &self.0
    }
}

impl From<BigUint> for Weight {
    fn from(value: BigUint) -> Self {
        Weight::new(value)
    }
}

impl From<&BigUint> for Weight {
    fn from(value: &BigUint) -> Self {
        Weight::new(value.clone())
    }
}

impl From<u64> for Weight {
    fn from(value: u64) -> Self {
        Weight::new(BigUint::from(value))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_decimal(s).map(Weight::new)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&self.0)
    }
}

/// Accepts decimal strings and, for hand-written files, plain integers.
impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl serde::de::Visitor<'_> for Visitor {
            type Value = Weight;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative decimal integer")
            }

            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<Weight, E> {
                s.parse().map_err(E::custom)
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Weight, E> {
                Ok(Weight::from(v))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

/// Serde adapters writing big integers as decimal strings.
pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub mod option {
        use num_bigint::BigUint;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.collect_str(v),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| super::super::parse_decimal(&t).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

pub(crate) fn parse_decimal(s: &str) -> Result<BigUint> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::InvalidGame(format!("`{s}` is not a decimal integer")));
    }
    Ok(s.parse().expect("digits only"))
}

/// A set of player positions (0-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(BTreeSet<usize>);

impl Coalition {
    pub fn new() -> Self {
        Coalition(BTreeSet::new())
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, player: usize) -> bool {
        self.0.contains(&player)
    }

    pub fn insert(&mut self, player: usize) -> bool {
        self.0.insert(player)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<usize> for Coalition {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Coalition(iter.into_iter().collect())
    }
}

/// A weighted voting game `(w_1, ..., w_n; q)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Game {
    weights: Vec<Weight>,
    quota: BigUint,
}

impl Game {
    pub fn new(weights: Vec<Weight>, quota: BigUint) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidGame("a game needs at least one player".into()));
        }
        if quota.is_zero() {
            return Err(Error::InvalidGame("quota must be at least 1".into()));
        }
        Ok(Game { weights, quota })
    }

    /// Convenience constructor for small literal games.
    pub fn from_u64(weights: &[u64], quota: u64) -> Result<Self> {
        Game::new(
            weights.iter().map(|&w| Weight::from(w)).collect(),
            BigUint::from(quota),
        )
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weight(&self, player: usize) -> Result<&Weight> {
        self.weights.get(player).ok_or(Error::PlayerOutOfRange {
            player,
            players: self.weights.len(),
        })
    }

    pub fn quota(&self) -> &BigUint {
        &self.quota
    }

    pub fn num_players(&self) -> usize {
        self.weights.len()
    }

    pub fn total_weight(&self) -> BigUint {
        self.weights.iter().map(|w| w.value()).sum()
    }

    /// The game with `extra` appended after the existing players.
    pub fn with_added(&self, extra: &[Weight]) -> Game {
        let mut weights = self.weights.clone();
        weights.extend_from_slice(extra);
        Game {
            weights,
            quota: self.quota.clone(),
        }
    }

    pub fn coalition_weight(&self, coalition: &Coalition) -> Result<BigUint> {
        let mut sum = BigUint::zero();
        for player in coalition.members() {
            sum += self.weight(player)?.value();
        }
        Ok(sum)
    }

    /// Weights of every player except `player`, in order.
    pub(crate) fn others(&self, player: usize) -> Vec<Weight> {
        let mut rest = Vec::with_capacity(self.weights.len() - 1);
        rest.extend_from_slice(&self.weights[..player]);
        rest.extend_from_slice(&self.weights[player + 1..]);
        rest
    }
}

impl fmt::Debug for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ";{})", self.quota)
    }
}

#[derive(Serialize, Deserialize)]
struct GameRepr {
    weights: Vec<Weight>,
    quota: Weight,
}

impl Serialize for Game {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GameRepr {
            weights: self.weights.clone(),
            quota: Weight::new(self.quota.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Game {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = GameRepr::deserialize(deserializer)?;
        Game::new(repr.weights, repr.quota.value().clone()).map_err(serde::de::Error::custom)
    }
}

/// An exact power-index value in `[0, 1]`, always kept in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalIndex(Ratio<BigUint>);

impl RationalIndex {
    pub fn new(numer: BigUint, denom: BigUint) -> Self {
        RationalIndex(Ratio::new(numer, denom))
    }

    pub fn zero() -> Self {
        RationalIndex(Ratio::zero())
    }

    pub fn one() -> Self {
        RationalIndex(Ratio::one())
    }

    pub fn numer(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &Ratio<BigUint> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Self) -> Ratio<BigUint> {
        if self.0 >= other.0 {
            &self.0 - &other.0
        } else {
            &other.0 - &self.0
        }
    }
}

impl From<Ratio<BigUint>> for RationalIndex {
    fn from(r: Ratio<BigUint>) -> Self {
        RationalIndex(r)
    }
}

impl fmt::Display for RationalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for RationalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for RationalIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("`{s}` is not a rational `num/den`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n = parse_decimal(n).map_err(|_| bad())?;
        let d = parse_decimal(d).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(RationalIndex::new(n, d))
    }
}

impl Serialize for RationalIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RationalIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_winning(game: &Game, coalition: &Coalition) -> Result<bool> {
    Ok(game.coalition_weight(coalition)? >= *game.quota())
}

pub fn is_pivotal(game: &Game, player: usize, coalition: &Coalition) -> Result<bool> {
    let w = game.weight(player)?;
    if coalition.contains(player) {
        return Err(Error::PlayerInCoalition(player));
    }
    let sum = game.coalition_weight(coalition)?;
    Ok(sum < *game.quota() && &sum + w.value() >= *game.quota())
}

/// The band `[q - w_i, q - 1]` of coalition weights for which `player` swings.
fn swing_band(game: &Game, player: usize) -> Result<Option<(BigUint, BigUint)>> {
    let w = game.weight(player)?;
    if w.is_zero() {
        return Ok(None);
    }
    let q = game.quota();
    let lower = if w.value() >= q {
        BigUint::zero()
    } else {
        q - w.value()
    };
    Ok(Some((lower, q - 1u32)))
}

/// Number of coalitions `S ⊆ N \ {player}` for which `player` is pivotal.
pub fn swing_count(game: &Game, player: usize, strategy: &CountingStrategy) -> Result<BigUint> {
    match swing_band(game, player)? {
        None => Ok(BigUint::zero()),
        Some((lower, upper)) => {
            counting::count_subsets_in_band(&game.others(player), &lower, &upper, strategy)
        }
    }
}

/// Probabilistic Penrose–Banzhaf index of `player`.
pub fn banzhaf(game: &Game, player: usize, strategy: &CountingStrategy) -> Result<RationalIndex> {
    let swings = swing_count(game, player, strategy)?;
    let denom = BigUint::one() << (game.num_players() - 1);
    Ok(RationalIndex::new(swings, denom))
}

/// Shapley–Shubik index of `player`.
pub fn shapley_shubik(
    game: &Game,
    player: usize,
    strategy: &CountingStrategy,
) -> Result<RationalIndex> {
    let n = game.num_players();
    let Some((lower, upper)) = swing_band(game, player)? else {
        return Ok(RationalIndex::zero());
    };
    let by_size =
        counting::count_subsets_in_band_by_size(&game.others(player), &lower, &upper, strategy)?;
    let fact = factorials(n);
    let mut numer = BigUint::zero();
    for (size, count) in by_size.iter() {
        if !count.is_zero() {
            numer += count * &fact[size] * &fact[n - 1 - size];
        }
    }
    let denom = fact[n].clone();
    let g = numer.gcd(&denom);
    Ok(RationalIndex::new(numer / &g, denom / g))
}

pub(crate) fn factorials(n: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(BigUint::one());
    for i in 1..=n {
        let next = &out[i - 1] * BigUint::from(i);
        out.push(next);
    }
    out
}
