//! Exact subset-sum counting kernels.
//!
//! Every kernel answers the same question: how many index subsets of a weight
//! list have a sum inside `[lower, upper]`, optionally split by subset size.
//! Sums run on `u128` when the total weight fits and on `BigUint` otherwise.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Gray-code walk over all `2^n` subsets.
    Enumerate,
    /// Sorted half-sums of one side joined against a walk over the other.
    MeetInTheMiddle,
    /// Ordered map of reachable sums, one step per distinct weight.
    SparseDp,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Enumerate => "enumerate",
            Method::MeetInTheMiddle => "mitm",
            Method::SparseDp => "sparse-dp",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "enumerate" => Ok(Method::Enumerate),
            "mitm" | "meet-in-the-middle" => Ok(Method::MeetInTheMiddle),
            "sparse-dp" | "sparse" | "dp" => Ok(Method::SparseDp),
            other => Err(Error::Parameter(format!("unknown counting method `{other}`"))),
        }
    }
}

/// Which kernel to run, plus the caps that turn oversized requests into errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingStrategy {
    /// A fixed method, or `None` to pick by player count.
    pub method: Option<Method>,
    /// Automatic selection uses enumeration up to this many players.
    pub enumerate_up_to: usize,
    /// Automatic selection uses meet-in-the-middle up to this many players.
    pub mitm_up_to: usize,
    /// Hard cap for enumeration (32 players is a `2^32` subset space).
    pub enumerate_cap: usize,
    /// Hard cap for meet-in-the-middle.
    pub mitm_cap: usize,
    /// Hard cap on live partial sums in the sparse DP.
    pub sparse_state_cap: usize,
}

/// Largest half stored in memory by meet-in-the-middle; the rest is streamed.
const MITM_STORED_MAX: usize = 24;

impl Default for CountingStrategy {
    fn default() -> Self {
        CountingStrategy {
            method: None,
            enumerate_up_to: 26,
            mitm_up_to: 54,
            enumerate_cap: 32,
            mitm_cap: 58,
            sparse_state_cap: 1 << 24,
        }
    }
}

impl CountingStrategy {
    pub fn auto() -> Self {
        Self::default()
    }

    pub fn with_method(method: Method) -> Self {
        CountingStrategy {
            method: Some(method),
            ..Self::default()
        }
    }

    pub fn enumerate() -> Self {
        Self::with_method(Method::Enumerate)
    }

    pub fn meet_in_the_middle() -> Self {
        Self::with_method(Method::MeetInTheMiddle)
    }

    pub fn sparse_dp() -> Self {
        Self::with_method(Method::SparseDp)
    }

    /// The method that will run on `players` weights, or a cap error.
    pub fn resolve(&self, players: usize) -> Result<Method> {
        let method = self.method.unwrap_or(if players <= self.enumerate_up_to {
            Method::Enumerate
        } else if players <= self.mitm_up_to {
            Method::MeetInTheMiddle
        } else {
            Method::SparseDp
        });
        let cap = match method {
            Method::Enumerate => self.enumerate_cap,
            Method::MeetInTheMiddle => self.mitm_cap,
            Method::SparseDp => usize::MAX,
        };
        if players > cap {
            return Err(Error::StrategyCap {
                method: method.name(),
                players,
                cap,
            });
        }
        Ok(method)
    }
}

/// Counts of subsets with a sum in some band, indexed by subset size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotalCountBySize {
    counts: Vec<BigUint>,
}

impl PivotalCountBySize {
    /// Count for subsets of exactly `size` elements (zero past the end).
    pub fn get(&self, size: usize) -> BigUint {
        self.counts.get(size).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &BigUint)> {
        self.counts.iter().enumerate()
    }

    /// Sizes with a nonzero count.
    pub fn nonzero(&self) -> BTreeMap<usize, BigUint> {
        self.iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| (s, c.clone()))
            .collect()
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[BigUint] {
        &self.counts
    }
}

pub fn count_subsets_with_sum(
    weights: &[Weight],
    target: &BigUint,
    strategy: &CountingStrategy,
) -> Result<BigUint> {
    count_subsets_in_band(weights, target, target, strategy)
}

pub fn count_subsets_in_band(
    weights: &[Weight],
    lower: &BigUint,
    upper: &BigUint,
    strategy: &CountingStrategy,
) -> Result<BigUint> {
    let counts = band_counts(weights, lower, upper, strategy, false)?;
    Ok(counts.into_iter().sum())
}

pub fn count_subsets_in_band_by_size(
    weights: &[Weight],
    lower: &BigUint,
    upper: &BigUint,
    strategy: &CountingStrategy,
) -> Result<PivotalCountBySize> {
    let mut counts = band_counts(weights, lower, upper, strategy, true)?;
    counts.resize(weights.len() + 1, BigUint::zero());
    Ok(PivotalCountBySize { counts })
}

/// Every subset (as a bitmask over positions) whose weights sum to `target`,
/// in increasing mask order. Enumeration only; `cap` bounds the player count.
pub fn enumerate_subsets_with_sum(
    weights: &[Weight],
    target: &BigUint,
    cap: usize,
) -> Result<Vec<u64>> {
    if weights.len() > cap.min(63) {
        return Err(Error::StrategyCap {
            method: Method::Enumerate.name(),
            players: weights.len(),
            cap: cap.min(63),
        });
    }
    let total: BigUint = weights.iter().map(|w| w.value()).sum();
    if target > &total {
        return Ok(Vec::new());
    }
    let mut hits = if total.bits() <= 127 {
        let w = to_u128(weights);
        enumerate_hits(&w, &target.to_u128().expect("fits"))
    } else {
        let w: Vec<BigUint> = weights.iter().map(|w| w.value().clone()).collect();
        enumerate_hits(&w, target)
    };
    hits.par_sort_unstable();
    Ok(hits)
}

fn band_counts(
    weights: &[Weight],
    lower: &BigUint,
    upper: &BigUint,
    strategy: &CountingStrategy,
    by_size: bool,
) -> Result<Vec<BigUint>> {
    if lower > upper {
        return Err(Error::InvalidBand {
            lower: lower.to_string(),
            upper: upper.to_string(),
        });
    }
    let method = strategy.resolve(weights.len())?;
    let total: BigUint = weights.iter().map(|w| w.value()).sum();
    let upper = upper.min(&total);
    let slots = if by_size { weights.len() + 1 } else { 1 };
    if lower > upper {
        return Ok(vec![BigUint::zero(); slots]);
    }
    if total.bits() <= 127 {
        let w = to_u128(weights);
        let lo = lower.to_u128().expect("bounded by total");
        let hi = upper.to_u128().expect("bounded by total");
        run::<u128>(method, &w, &lo, &hi, by_size, strategy)
    } else {
        let w: Vec<BigUint> = weights.iter().map(|w| w.value().clone()).collect();
        run::<BigUint>(method, &w, lower, upper, by_size, strategy)
    }
}

fn to_u128(weights: &[Weight]) -> Vec<u128> {
    weights
        .iter()
        .map(|w| w.value().to_u128().expect("total fits in u128"))
        .collect()
}

fn run<T: SumValue>(
    method: Method,
    w: &[T],
    lo: &T,
    hi: &T,
    by_size: bool,
    strategy: &CountingStrategy,
) -> Result<Vec<BigUint>> {
    let small = match method {
        Method::Enumerate => enumerate_band(w, lo, hi, by_size),
        Method::MeetInTheMiddle => mitm_band(w, lo, hi, by_size),
        Method::SparseDp => return sparse_band(w, lo, hi, by_size, strategy.sparse_state_cap),
    };
    Ok(small.into_iter().map(BigUint::from).collect())
}

/// Arithmetic the kernels need from a sum type.
trait SumValue: Clone + Ord + Send + Sync {
    fn empty_sum() -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn sub_assign_ref(&mut self, other: &Self);
    /// `self - other`, floored at zero.
    fn saturating_minus(&self, other: &Self) -> Self;
}

impl SumValue for u128 {
    fn empty_sum() -> Self {
        0
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= *other;
    }
    fn saturating_minus(&self, other: &Self) -> Self {
        self.saturating_sub(*other)
    }
}

impl SumValue for BigUint {
    fn empty_sum() -> Self {
        Zero::zero()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
    fn saturating_minus(&self, other: &Self) -> Self {
        if self > other {
            self - other
        } else {
            Zero::zero()
        }
    }
}

/// Number of high positions split off for parallel chunks of a Gray walk.
fn chunk_bits(n: usize) -> usize {
    if n >= 16 {
        8.min(n - 12)
    } else {
        0
    }
}

/// Walks every subset of `w` in Gray-code order, split into `2^p` parallel
/// chunks over the top `p` positions. `visit` sees (chunk state, sum, size,
/// mask) and folds into a per-chunk accumulator.
fn gray_walk<T, A, F, R>(w: &[T], init: impl Fn() -> A + Sync + Send, visit: F, reduce: R) -> A
where
    T: SumValue,
    A: Send,
    F: Fn(&mut A, &T, usize, u64) + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    let n = w.len();
    let p = chunk_bits(n);
    let low = n - p;
    (0..1u64 << p)
        .into_par_iter()
        .map(|prefix| {
            let mut acc = init();
            let mut sum = T::empty_sum();
            let mut size = 0usize;
            for b in 0..p {
                if prefix >> b & 1 == 1 {
                    sum.add_assign_ref(&w[low + b]);
                    size += 1;
                }
            }
            let base = prefix << low;
            let mut gray = 0u64;
            visit(&mut acc, &sum, size, base);
            for i in 1..1u64 << low {
                let bit = i.trailing_zeros() as usize;
                if gray >> bit & 1 == 1 {
                    sum.sub_assign_ref(&w[bit]);
                    size -= 1;
                } else {
                    sum.add_assign_ref(&w[bit]);
                    size += 1;
                }
                gray ^= 1 << bit;
                visit(&mut acc, &sum, size, base | gray);
            }
            acc
        })
        .reduce_with(reduce)
        .expect("at least one chunk")
}

fn add_vecs(mut a: Vec<u128>, b: Vec<u128>) -> Vec<u128> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

fn enumerate_band<T: SumValue>(w: &[T], lo: &T, hi: &T, by_size: bool) -> Vec<u128> {
    let slots = if by_size { w.len() + 1 } else { 1 };
    gray_walk(
        w,
        || vec![0u128; slots],
        |acc, sum, size, _| {
            if sum >= lo && sum <= hi {
                acc[if by_size { size } else { 0 }] += 1;
            }
        },
        add_vecs,
    )
}

fn enumerate_hits<T: SumValue>(w: &[T], target: &T) -> Vec<u64> {
    gray_walk(
        w,
        Vec::new,
        |acc, sum, _, mask| {
            if sum == target {
                acc.push(mask);
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    )
}

fn mitm_band<T: SumValue>(w: &[T], lo: &T, hi: &T, by_size: bool) -> Vec<u128> {
    let n = w.len();
    let stored_n = (n / 2).min(MITM_STORED_MAX);
    let (streamed, stored) = w.split_at(n - stored_n);

    // All subset sums of the stored side that do not already exceed `hi`.
    let mut table: Vec<(usize, T)> = vec![(0, T::empty_sum())];
    for x in stored {
        let len = table.len();
        for i in 0..len {
            let mut s = table[i].1.clone();
            s.add_assign_ref(x);
            if &s <= hi {
                table.push((table[i].0 + 1, s));
            }
        }
    }
    let classes: Vec<Vec<T>> = if by_size {
        let mut classes = vec![Vec::new(); stored_n + 1];
        for (size, s) in table {
            classes[size].push(s);
        }
        classes
    } else {
        vec![table.into_iter().map(|(_, s)| s).collect()]
    };
    let classes: Vec<Vec<T>> = classes
        .into_par_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();

    let slots = if by_size { n + 1 } else { 1 };
    gray_walk(
        streamed,
        || vec![0u128; slots],
        |acc, a, size, _| {
            if a > hi {
                return;
            }
            let need_lo = lo.saturating_minus(a);
            let mut need_hi = hi.clone();
            need_hi.sub_assign_ref(a);
            for (extra, class) in classes.iter().enumerate() {
                if class.is_empty() {
                    continue;
                }
                let start = class.partition_point(|s| s < &need_lo);
                let end = class.partition_point(|s| s <= &need_hi);
                if end > start {
                    let slot = if by_size { size + extra } else { 0 };
                    acc[slot] += (end - start) as u128;
                }
            }
        },
        add_vecs,
    )
}

fn binomials(c: usize) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(c + 1);
    let mut cur = BigUint::from(1u32);
    row.push(cur.clone());
    for j in 1..=c {
        cur = cur * BigUint::from(c + 1 - j) / BigUint::from(j);
        row.push(cur.clone());
    }
    row
}

fn sparse_band<T: SumValue>(
    w: &[T],
    lo: &T,
    hi: &T,
    by_size: bool,
    cap: usize,
) -> Result<Vec<BigUint>> {
    let mut sorted = w.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut groups: Vec<(T, usize)> = Vec::new();
    for x in sorted {
        match groups.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => groups.push((x, 1)),
        }
    }
    // rest[g] = total weight of groups g.. (for dropping sums that cannot reach `lo`).
    let mut rest = vec![T::empty_sum(); groups.len() + 1];
    for g in (0..groups.len()).rev() {
        let mut r = rest[g + 1].clone();
        for _ in 0..groups[g].1 {
            r.add_assign_ref(&groups[g].0);
        }
        rest[g] = r;
    }

    let mut state: BTreeMap<T, Vec<BigUint>> = BTreeMap::new();
    state.insert(T::empty_sum(), vec![BigUint::from(1u32)]);
    for (g, (x, c)) in groups.iter().enumerate() {
        let binom = binomials(*c);
        let mut next: BTreeMap<T, Vec<BigUint>> = BTreeMap::new();
        for (s, counts) in &state {
            let mut s2 = s.clone();
            for (j, b) in binom.iter().enumerate() {
                if j > 0 {
                    s2.add_assign_ref(x);
                }
                if &s2 > hi {
                    break;
                }
                let mut reach = s2.clone();
                reach.add_assign_ref(&rest[g + 1]);
                if &reach < lo {
                    continue;
                }
                let entry = next.entry(s2.clone()).or_default();
                if by_size {
                    if entry.len() < counts.len() + j {
                        entry.resize(counts.len() + j, BigUint::zero());
                    }
                    for (size, cnt) in counts.iter().enumerate() {
                        if !cnt.is_zero() {
                            entry[size + j] += cnt * b;
                        }
                    }
                } else {
                    if entry.is_empty() {
                        entry.push(BigUint::zero());
                    }
                    entry[0] += &counts[0] * b;
                }
            }
        }
        if next.len() > cap {
            return Err(Error::StateCap { cap });
        }
        state = next;
    }

    let slots = if by_size { w.len() + 1 } else { 1 };
    let mut out = vec![BigUint::zero(); slots];
    for (_, counts) in state.range(lo.clone()..=hi.clone()) {
        for (size, cnt) in counts.iter().enumerate() {
            out[size] += cnt;
        }
    }
    Ok(out)
}
