//! Structural audit of built control instances.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::shapley::{decrease_constants, epsilon_in_range, EPSILON_RANGES};
use super::{ControlInstance, TheoremTag};
use crate::error::Result;
use crate::gadgets::{ceil_log2, pow10};

/// One named audit result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every check run against one instance.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremTag>,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

fn big(v: usize) -> BigUint {
    BigUint::from(v)
}

fn resum(exps: &[u64]) -> BigUint {
    exps.iter().map(|&e| BigUint::one() << e).sum()
}

fn strictly_descending(exps: &[u64]) -> bool {
    exps.windows(2).all(|w| w[0] > w[1])
}

/// Audits `instance`. Generic checks always run; theorem-specific checks run
/// when the instance records which reduction produced it.
pub fn validate_instance(instance: &ControlInstance) -> ValidationReport {
    let mut report = ValidationReport {
        theorem: instance.theorem(),
        checks: Vec::new(),
    };
    generic_checks(instance, &mut report);
    if let Some(theorem) = instance.theorem() {
        report.push(
            "goal",
            theorem.goals().contains(&instance.goal),
            format!("goal {} for {theorem}", instance.goal.name()),
        );
        report.push(
            "index",
            theorem.index() == instance.index,
            format!("{:?}", instance.index),
        );
        if let Err(e) = theorem_checks(theorem, instance, &mut report) {
            report.push("constants", false, e.to_string());
        }
    }
    report
}

fn generic_checks(inst: &ControlInstance, report: &mut ValidationReport) {
    let n = inst.game.num_players();
    report.push(
        "distinguished",
        inst.distinguished < n,
        format!("player {} of {n}", inst.distinguished + 1),
    );

    let mut groups: Vec<_> = inst.groups.iter().filter(|g| g.len > 0).collect();
    groups.sort_by_key(|g| g.start);
    let mut pos = 0;
    let mut gap = None;
    for g in &groups {
        if g.start != pos && gap.is_none() {
            gap = Some(format!("group `{}` starts at {} instead of {}", g.label, g.start + 1, pos + 1));
        }
        pos = g.start + g.len;
    }
    let partition = if inst.groups.is_empty() {
        None
    } else if let Some(gap) = gap {
        Some(gap)
    } else if pos != n {
        Some(format!("groups cover {pos} of {n} players"))
    } else {
        None
    };
    report.push(
        "group_partition",
        partition.is_none(),
        partition.unwrap_or_else(|| format!("{} groups", inst.groups.len())),
    );

    let zero = inst.game.weights().iter().position(|w| w.is_zero());
    let zero_add = inst.addable.iter().position(|w| w.is_zero());
    report.push(
        "positive_weights",
        zero.is_none() && zero_add.is_none(),
        match (zero, zero_add) {
            (Some(i), _) => format!("player {} has weight 0", i + 1),
            (_, Some(i)) => format!("addable player {} has weight 0", i + 1),
            _ => "all weights positive".into(),
        },
    );
    report.push(
        "budget",
        inst.budget >= 1 && inst.budget <= inst.addable.len(),
        format!("budget {} with {} addable players", inst.budget, inst.addable.len()),
    );
}

/// Parameters shared by every reduction.
struct Base {
    n: usize,
    m: usize,
    k: usize,
    r: usize,
    mr: usize,
    q: BigUint,
}

fn sum_of(inst: &ControlInstance, label: &str) -> BigUint {
    inst.group_sum(label)
}

fn addable_sum(inst: &ControlInstance) -> BigUint {
    inst.addable.iter().map(|w| w.value()).sum()
}

fn theorem_checks(
    theorem: TheoremTag,
    inst: &ControlInstance,
    report: &mut ValidationReport,
) -> Result<()> {
    let c = &inst.constants;
    let n = c.small("n")?;
    let m = c.small("m")?;
    let k = c.small("k")?;
    let r = c.small("r")?;
    let base = Base {
        n,
        m,
        k,
        r,
        mr: m * (r + 1),
        q: c.uint("q")?,
    };
    report.push(
        "parameters",
        n >= 2 && r + 1 == ceil_log2(n) as usize && k >= 1 && k <= n,
        format!("n = {n}, m = {m}, k = {k}, r = {r}"),
    );
    report.push(
        "quota_constant",
        base.q == *inst.game.quota(),
        format!("q = {}", inst.game.quota()),
    );
    let even = matches!(theorem, TheoremTag::Thm2 | TheoremTag::Thm3bcShapley);
    let q_even = !inst.game.quota().bit(0);
    report.push(
        "quota_parity",
        q_even == even,
        format!("q is {}", if q_even { "even" } else { "odd" }),
    );
    report.push(
        "addable_pool",
        inst.addable.len() == 2 * k && inst.budget == k,
        format!("{} addable players, budget {}", inst.addable.len(), inst.budget),
    );

    let layout = match theorem {
        TheoremTag::Thm1 | TheoremTag::Thm3a => majority_checks(theorem, inst, &base, report)?,
        TheoremTag::Thm3bcBanzhaf => decrease_banzhaf_checks(inst, &base, report)?,
        TheoremTag::Thm3dBanzhaf => maintain_banzhaf_checks(inst, &base, report)?,
        TheoremTag::Thm2 => increase_shapley_checks(inst, &base, report)?,
        TheoremTag::Thm3bcShapley => decrease_shapley_checks(inst, &base, report)?,
        TheoremTag::Thm3dShapley => maintain_shapley_checks(inst, &base, report)?,
    };
    layout_check(inst, &layout, report);
    Ok(())
}

/// Compares the instance's groups with the expected `(label, size)` list.
fn layout_check(inst: &ControlInstance, expected: &[(String, usize)], report: &mut ValidationReport) {
    let actual: BTreeMap<&str, usize> =
        inst.groups.iter().map(|g| (g.label.as_str(), g.len)).collect();
    let mut problem = None;
    for (label, len) in expected {
        match actual.get(label.as_str()) {
            Some(l) if l == len => {}
            Some(l) => {
                problem.get_or_insert(format!("group `{label}` has {l} players, expected {len}"));
            }
            None if *len == 0 => {}
            None => {
                problem.get_or_insert(format!("group `{label}` is missing"));
            }
        }
    }
    if problem.is_none() {
        let known: std::collections::BTreeSet<&str> =
            expected.iter().map(|(l, _)| l.as_str()).collect();
        if let Some(extra) = actual.keys().find(|l| !known.contains(*l)) {
            problem = Some(format!("unexpected group `{extra}`"));
        }
    }
    if problem.is_none() {
        let mut nonempty: Vec<_> = inst.groups.iter().filter(|g| g.len > 0).collect();
        nonempty.sort_by_key(|g| g.start);
        let want: Vec<&str> = expected
            .iter()
            .filter(|(_, l)| *l > 0)
            .map(|(l, _)| l.as_str())
            .collect();
        let got: Vec<&str> = nonempty.iter().map(|g| g.label.as_str()).collect();
        if want != got {
            problem = Some("groups are not in construction order".into());
        }
    }
    report.push(
        "group_sizes",
        problem.is_none(),
        problem.unwrap_or_else(|| format!("{} groups as expected", expected.len())),
    );
}

/// Records a check comparing every player of each group with its expected
/// weight.
fn weight_check(
    inst: &ControlInstance,
    expected: &[(String, Vec<BigUint>)],
    report: &mut ValidationReport,
) {
    let mut problem = None;
    'outer: for (label, want) in expected {
        let got = inst.group_weights(label);
        if got.len() != want.len() {
            problem = Some(format!("group `{label}` has {} players, expected {}", got.len(), want.len()));
            break;
        }
        for (i, (g, w)) in got.iter().zip(want).enumerate() {
            if g.value() != w {
                problem = Some(format!("group `{label}` player {}: weight {} expected {w}", i + 1, g.value()));
                break 'outer;
            }
        }
    }
    report.push(
        "defining_weights",
        problem.is_none(),
        problem.unwrap_or_else(|| "all recomputed weights match".into()),
    );
}

fn sub_or_zero(a: &BigUint, b: &BigUint) -> BigUint {
    if a > b {
        a - b
    } else {
        BigUint::zero()
    }
}

fn gadget_layout(base: &Base, complement: bool) -> Vec<(String, usize)> {
    let mut v = vec![
        ("p".to_string(), 1),
        ("A".to_string(), 2 * (base.n - base.k)),
        ("C".to_string(), base.mr),
    ];
    if complement {
        v.push(("C_prime".to_string(), base.mr));
    }
    v
}

fn count_check(inst: &ControlInstance, expected: usize, report: &mut ValidationReport) {
    report.push(
        "player_count",
        inst.game.num_players() == expected,
        format!("{} players, expected {expected}", inst.game.num_players()),
    );
}

fn quota_check(inst: &ControlInstance, expected: BigUint, report: &mut ValidationReport) {
    let q = inst.game.quota();
    report.push(
        "quota",
        *q == expected,
        if *q == expected {
            "quota matches the group sums".to_string()
        } else {
            format!("quota {q}, recomputed {expected}")
        },
    );
}

fn majority_checks(
    theorem: TheoremTag,
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let (n, k) = (b.n, b.k);
    if k >= n {
        report.push("parameters", false, "k must be below n");
        return Ok(Vec::new());
    }
    let extra = usize::from(theorem == TheoremTag::Thm3a);
    count_check(inst, 4 * n - 2 * k + b.mr + extra, report);
    let core = sum_of(inst, "A") + addable_sum(inst) + sum_of(inst, "C");
    quota_check(inst, 2u32 * (core + big((n - k) * (k + 1))) + 1u32, report);
    let q = &b.q;
    let q1 = inst.constants.uint("q1")?;
    let mut y: Vec<BigUint> = (0..n - k).map(|j| sub_or_zero(q, &big(1 + j * (k + 1)))).collect();
    if extra == 1 {
        y.insert(1, q - 1u32);
    }
    weight_check(
        inst,
        &[
            ("p".into(), vec![BigUint::one()]),
            ("W".into(), (1..=k).map(|j| sub_or_zero(q, &(&q1 + big(j + 1)))).collect()),
            ("X".into(), vec![BigUint::one(); k]),
            ("Y".into(), y),
            ("Z".into(), vec![big(k + 1); n - k - 1]),
        ],
        report,
    );
    let mut layout = gadget_layout(b, false);
    for (l, s) in [("W", k), ("X", k), ("Y", n - k + extra), ("Z", n - k - 1)] {
        layout.push((l.to_string(), s));
    }
    Ok(layout)
}

fn decrease_banzhaf_checks(
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let (n, k) = (b.n, b.k);
    if k < 2 || k >= n {
        report.push("parameters", false, "needs 2 <= k < n");
        return Ok(Vec::new());
    }
    let c = &inst.constants;
    let h1 = big(2 * k * k);
    let h = big(k + 1) * &h1;
    let z = big(2 * n - 2 * k) * &h;
    let e = big(2 * n - k + 1) * &z;
    report.push(
        "chain_constants",
        c.uint("h_prime")? == h1 && c.uint("h")? == h && c.uint("z")? == z && c.uint("e")? == e,
        format!("h' = {h1}, h = {h}, z = {z}, e = {e}"),
    );
    count_check(inst, 14 * n + 4 * n * k + b.mr + 1 - 3 * k * k - 3 * k, report);
    let t = c.small("t")? as u32;
    let lead = |i: usize| pow10(t * (b.m as u32 + 1) + 2 * i as u32);
    let lead_sum: BigUint = (1..=k).map(lead).sum();
    let w_c = sum_of(inst, "C");
    let core = sum_of(inst, "A") + addable_sum(inst) + &w_c;
    quota_check(inst, 2u32 * (core + 9u32 * &lead_sum + pow10(t)) + 1u32, report);
    let q = &b.q;
    let q3 = c.uint("q3")?;
    let mut g = Vec::new();
    for i1 in 0..=k {
        for i2 in 1..=2 * n - 2 * k - 1 {
            let x = &lead_sum + big(i1) * &h1 + &w_c + big(k) + big(i2) * &h + 1u32;
            g.push(sub_or_zero(q, &x));
        }
    }
    let mut v: Vec<BigUint> = (k + 2..=2 * k).map(big).collect();
    for i in 1..=k {
        for f in [4u32, 3, 2] {
            v.push(f * lead(i));
        }
    }
    let mut x = Vec::new();
    for i1 in 1..=k {
        for i2 in 0..=2 * n - k {
            x.push(sub_or_zero(q, &(5u32 * lead(i1) + &w_c + 3u32 + big(i2) * &z)));
        }
    }
    weight_check(
        inst,
        &[
            ("p".into(), vec![BigUint::one()]),
            ("D".into(), (1..=k).map(|i| sub_or_zero(q, &(lead(i) + &w_c + 2u32))).collect()),
            ("E".into(), vec![e.clone(); n]),
            ("F".into(), (0..=n).map(|j| sub_or_zero(q, &(&q3 + big(j) * &e + 1u32))).collect()),
            ("G".into(), g),
            ("H".into(), vec![h.clone(); 2 * n - 2 * k - 1]),
            ("H_prime".into(), vec![h1.clone(); k]),
            (
                "U".into(),
                (0..=2 * n - k)
                    .map(|i| {
                        sub_or_zero(q, &(4u32 * &lead_sum + &w_c + big(2 * k + 2) + big(i) * &z))
                    })
                    .collect(),
            ),
            ("V".into(), v),
            ("X".into(), x),
            ("Y".into(), (0..=2 * n - k).map(|j| sub_or_zero(q, &(1u32 + big(j) * &z))).collect()),
            ("Z".into(), vec![z.clone(); 2 * n - k]),
        ],
        report,
    );
    let mut layout = gadget_layout(b, false);
    for (l, s) in [
        ("D", k),
        ("E", n),
        ("F", n + 1),
        ("G", (k + 1) * (2 * n - 2 * k - 1)),
        ("H", 2 * n - 2 * k - 1),
        ("H_prime", k),
        ("U", 2 * n - k + 1),
        ("V", 4 * k - 1),
        ("X", k * (2 * n - k + 1)),
        ("Y", 2 * n - k + 1),
        ("Z", 2 * n - k),
    ] {
        layout.push((l.to_string(), s));
    }
    Ok(layout)
}

fn decomposition_check(
    name: &str,
    value: &BigUint,
    exps: &[u64],
    report: &mut ValidationReport,
) {
    report.push(
        &format!("decomposition_{name}"),
        resum(exps) == *value && strictly_descending(exps) && !exps.is_empty(),
        format!("{name} = {value} from {exps:?}"),
    );
}

fn maintain_banzhaf_checks(
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let c = &inst.constants;
    let k = b.k;
    let ell = c.uint("ell")?;
    let ells = c.exponents("ell_exponents")?.to_vec();
    decomposition_check("ell", &ell, &ells, report);
    report.push(
        "ell_range",
        ell >= BigUint::one() && ell <= BigUint::one() << b.n,
        format!("ell = {ell}"),
    );
    let mut z = Vec::with_capacity(ells.len());
    let mut weighted = BigUint::zero();
    for &li in &ells {
        let zi = big(k + 1) + &weighted;
        weighted += BigUint::from(li) * &zi;
        z.push(zi);
    }
    let stored: Vec<BigUint> = (1..=ells.len())
        .map(|i| c.uint(&format!("z_{i}")))
        .collect::<Result<_>>()?;
    report.push("chain_constants", stored == z, format!("z = {z:?}"));
    let ell_total: usize = ells.iter().map(|&l| l as usize).sum();
    count_check(inst, 2 * b.n + b.mr + 2 * ell_total + ells.len() + 1, report);
    let core = sum_of(inst, "A") + addable_sum(inst) + sum_of(inst, "C");
    let zsum: BigUint = (1..=ells.len()).map(|i| sum_of(inst, &format!("Z_{i}"))).sum();
    quota_check(inst, 2u32 * (core + zsum + big(k + 1)) + 1u32, report);
    let q = &b.q;
    let q1 = c.uint("q1")?;
    let mut expected = vec![
        ("p".to_string(), vec![BigUint::one()]),
        ("W".to_string(), (1..=k).map(|j| sub_or_zero(q, &(&q1 + big(j + 1)))).collect()),
        ("X".to_string(), vec![BigUint::one(); k]),
    ];
    let mut layout = gadget_layout(b, false);
    layout.push(("W".into(), k));
    layout.push(("X".into(), k));
    for (i, (&li, zi)) in ells.iter().zip(&z).enumerate() {
        let li = li as usize;
        expected.push((
            format!("Y_{}", i + 1),
            (0..=li).map(|j| sub_or_zero(q, &(1u32 + big(j) * zi))).collect(),
        ));
        expected.push((format!("Z_{}", i + 1), vec![zi.clone(); li]));
        layout.push((format!("Y_{}", i + 1), li + 1));
        layout.push((format!("Z_{}", i + 1), li));
    }
    weight_check(inst, &expected, report);
    Ok(layout)
}

/// Distinct weights of the players in the matching groups, largest first,
/// with multiplicities.
fn pool(inst: &ControlInstance, include: impl Fn(&str) -> bool) -> Vec<(BigUint, usize)> {
    let mut counts: BTreeMap<&BigUint, usize> = BTreeMap::new();
    for g in inst.groups.iter().filter(|g| include(&g.label)) {
        for w in &inst.game.weights()[g.range()] {
            *counts.entry(w.value()).or_default() += 1;
        }
    }
    counts.into_iter().rev().map(|(w, c)| (w.clone(), c)).collect()
}

/// Every distinct weight exceeds the total of all smaller players.
fn superincreasing(pool: &[(BigUint, usize)]) -> bool {
    let mut below = BigUint::zero();
    for (w, c) in pool.iter().rev() {
        if *w <= below {
            return false;
        }
        below += w * big(*c);
    }
    true
}

/// Number of pool players in the greedy representation of `residual`, or
/// `None` when it has none.
fn greedy_size(pool: &[(BigUint, usize)], mut residual: BigUint) -> Option<usize> {
    let mut taken = 0;
    let mut idx = 0;
    while !residual.is_zero() {
        idx += pool[idx..].partition_point(|(w, _)| *w > residual);
        let (w, c) = pool.get(idx)?;
        let take = (&residual / w).min(big(*c));
        residual -= w * &take;
        taken += usize::try_from(take).ok()?;
        idx += 1;
    }
    Some(taken)
}

/// Checks that every player of the `defining` groups completes, together
/// with exactly `offset` fixed players and a greedy pick from `pool`, a
/// coalition of weight `q - 1` with `target` players.
fn size_identity(
    inst: &ControlInstance,
    name: &str,
    pool: &[(BigUint, usize)],
    defining: &[&str],
    subtract: &BigUint,
    offset: usize,
    target: &BigUint,
    report: &mut ValidationReport,
) {
    let q = inst.game.quota();
    let players: Vec<(String, usize, &BigUint)> = defining
        .iter()
        .filter_map(|l| inst.group(l))
        .flat_map(|g| {
            g.range()
                .map(move |i| (g.label.clone(), i, inst.game.weights()[i].value()))
        })
        .collect();
    let bad = players.par_iter().find_map_first(|(label, i, w)| {
        let deficit = q.checked_sub_to(w)?;
        let residual = deficit.checked_sub_to(&(subtract + 1u32))?;
        match greedy_size(pool, residual).map(|t| t + offset + 1) {
            Some(s) if big(s) == *target => None,
            Some(s) => Some(format!(
                "{label} player {}: coalition size {s}, expected {target}",
                i + 1
            )),
            None => Some(format!("{label} player {}: deficit has no representation", i + 1)),
        }
    });
    report.push(
        name,
        bad.is_none() && !players.is_empty(),
        bad.unwrap_or_else(|| format!("{} defining players complete to size {target}", players.len())),
    );
}

trait CheckedSubTo {
    fn checked_sub_to(&self, rhs: &BigUint) -> Option<BigUint>;
}

impl CheckedSubTo for BigUint {
    fn checked_sub_to(&self, rhs: &BigUint) -> Option<BigUint> {
        (self >= rhs).then(|| self - rhs)
    }
}

fn pool_check(name: &str, pool: &[(BigUint, usize)], report: &mut ValidationReport) {
    report.push(
        name,
        superincreasing(pool),
        format!("{} distinct auxiliary weights", pool.len()),
    );
}

fn increase_shapley_checks(
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let c = &inst.constants;
    let (n, m, k) = (b.n as i128, b.m as i128, b.k as i128);
    let p = 6 * n * n * m + 26 * n * n + 8 * k * k + 8 * n * m + 18 * n + 4 * k - 2 * m - 3;
    let delta = 3 * n * n * m + 13 * n * n + 4 * k * k + 3 * n * m + 5 * n + 4 * k - 2 * m - 5;
    let x = delta + n * m + 4 * n - 2 * k + m + 3;
    report.push(
        "closed_forms",
        c.int("P")? == BigInt::from(p)
            && c.int("delta")? == BigInt::from(delta)
            && c.int("x")? == BigInt::from(x),
        format!("P = {p}, delta = {delta}, x = {x}"),
    );
    report.push(
        "x_is_half",
        p % 2 == 1 && x == (p - 1) / 2,
        format!("x = {x}, (P - 1)/2 = {}", (p - 1) / 2),
    );
    let mut kp = BigRational::one();
    for i in 0..k {
        kp *= BigRational::one() + BigRational::new((x + 1).into(), (p - x + i).into());
    }
    let two_k = BigRational::from_integer(BigInt::one() << b.k);
    report.push(
        "k_prime",
        c.rational("k_prime")? == kp
            && kp >= BigRational::from_integer(2.into())
            && kp <= two_k,
        format!("k' = {kp}"),
    );
    let scaled = BigRational::from_integer(BigInt::one() << (b.n - b.k + 1)) * (&kp - BigRational::one());
    let z_expected = scaled.ceil().to_integer() - 1;
    let z = c.uint("z")?;
    let zs = c.exponents("z_exponents")?.to_vec();
    report.push("z", BigInt::from(z.clone()) == z_expected, format!("z = {z}"));
    decomposition_check("z", &z, &zs, report);

    let t_prime = c.small("t_prime")? as u32;
    let core = sum_of(inst, "A") + addable_sum(inst) + sum_of(inst, "C") + sum_of(inst, "C_prime");
    quota_check(inst, 2u32 * (core + pow10(t_prime) + 1u32), report);

    let (nu, mu, ku, r) = (b.n, b.m, b.k, b.r);
    let y1 = zs.first().copied().unwrap_or(0) as usize;
    let alpha: Vec<usize> = (0..=2 * nu - 2 * ku)
        .map(|i| (nu * mu + 4 * nu + mu + 2).saturating_sub(2 * ku + i))
        .collect();
    let beta: Vec<usize> = (0..=y1)
        .map(|i| ((nu - r) * mu + 3 * nu + 2).saturating_sub(2 * ku + i))
        .collect();
    let delta_u = delta as usize;
    let mut layout = gadget_layout(b, true);
    layout.push(("D".into(), delta_u));
    layout.push(("S".into(), zs.iter().map(|&y| y as usize + 1).sum()));
    for (i, &bi) in beta.iter().enumerate() {
        layout.push((format!("V_{i}"), bi));
    }
    for (i, &yi) in zs.iter().enumerate() {
        layout.push((format!("V_prime_{}", i + 1), yi as usize));
    }
    layout.push(("T".into(), 2 * nu - 2 * ku + 1));
    for (i, &ai) in alpha.iter().enumerate() {
        layout.push((format!("W_star_{i}"), ai));
    }
    layout.push(("W_prime".into(), 2 * nu - 2 * ku));
    finish_filler(&mut layout, "Z", p as usize, report);
    count_check(inst, p as usize, report);

    let pl = pool(inst, |l| {
        l == "D" || l.starts_with("V_") || l.starts_with("W_star_") || l == "W_prime"
    });
    pool_check("superincreasing", &pl, report);
    let x = big(x as usize);
    let gadget = b.n + b.mr;
    let q2 = c.uint("q2")?;
    size_identity(inst, "size_identity_S", &pl, &["S"], &q2, gadget, &x, report);
    size_identity(inst, "size_identity_T", &pl, &["T"], &BigUint::zero(), 0, &x, report);
    Ok(layout)
}

fn finish_filler(layout: &mut Vec<(String, usize)>, label: &str, total: usize, report: &mut ValidationReport) {
    let used: usize = layout.iter().map(|(_, s)| s).sum();
    report.push(
        "filler",
        used <= total,
        format!("{used} explicit players of {total}"),
    );
    layout.push((label.to_string(), total.saturating_sub(used)));
}

fn decrease_shapley_checks(
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let c = &inst.constants;
    let (n, k, mr) = (b.n, b.k, b.mr);
    if k < 3 || k >= n {
        report.push("parameters", false, "needs 3 <= k < n");
        return Ok(Vec::new());
    }
    let dc = decrease_constants(n, b.m, k);
    let mut same = c.int("P_prime")? == dc.p_prime
        && c.int("delta")? == dc.delta
        && c.int("P")? == dc.p
        && c.int("s")? == dc.s
        && c.rational("k_prime")? == dc.k_prime
        && c.rational("y")? == dc.y;
    for i in 0..5 {
        same &= c.int(&format!("gamma_{}", i + 1))? == dc.gamma[i];
    }
    for i in 0..4 {
        same &= c.rational(&format!("epsilon_{}", i + 1))? == dc.epsilon[i];
    }
    report.push("closed_forms", same, format!("P' = {}, delta = {}, P = {}, s = {}", dc.p_prime, dc.delta, dc.p, dc.s));

    let kp = &dc.k_prime;
    let lower = BigRational::from_integer(BigInt::from(9) << (k - 3));
    let upper = BigRational::from_integer(BigInt::one() << (2 * k));
    report.push("k_prime_bounds", lower < *kp && *kp < upper, format!("k' = {kp}"));
    let p = BigRational::from_integer(dc.p.clone());
    let s = BigRational::from_integer(dc.s.clone());
    let lo = &p * BigRational::new(5.into(), 9.into());
    let hi = &p * BigRational::new(2.into(), 3.into()) - BigRational::one();
    report.push("s_bounds", lo <= s && s <= hi, format!("s = {}, P = {}", dc.s, dc.p));
    let eps_ok = dc
        .epsilon
        .iter()
        .zip(EPSILON_RANGES)
        .all(|(e, range)| epsilon_in_range(e, range));
    report.push("epsilon_ranges", eps_ok, "residuals within their ranges");

    let mut alpha: Vec<Vec<usize>> = Vec::with_capacity(5);
    for i in 1..=5 {
        let g = c.uint(&format!("gamma_{i}"))?;
        let e = c.exponents(&format!("gamma_{i}_exponents"))?.to_vec();
        decomposition_check(&format!("gamma_{i}"), &g, &e, report);
        alpha.push(e.into_iter().map(|x| x as usize).collect());
    }
    if alpha.iter().any(|a| a.is_empty()) {
        return Ok(Vec::new());
    }
    let d = (5 * k * k - 7 * k) / 2 - 2;
    report.push("d", c.small("d")? == d, format!("d = {d}"));

    let t = c.small("t")? as u32;
    let lead_sum: BigUint = (1..=k).map(|i| pow10(t * (b.m as u32 + 1) + 2 * i as u32)).sum();
    let core = sum_of(inst, "A") + addable_sum(inst) + sum_of(inst, "C");
    quota_check(inst, 2u32 * (core + 9u32 * lead_sum + pow10(t) + 1u32), report);

    let [a1, a2, a3, a4, a5] = [&alpha[0], &alpha[1], &alpha[2], &alpha[3], &alpha[4]];
    let top = (2 * n - 2 * k - 1 + a1[0]).max(a3[0]);
    let delta = c.small("delta")?;
    let sizes = |v: &[usize]| v.iter().map(|a| a + 1).sum::<usize>();
    let mut layout = gadget_layout(b, true);
    let mut push = |l: String, s: usize| layout.push((l, s));
    push("D".into(), delta);
    for (i, &a) in a4.iter().enumerate() {
        push(format!("E_{}", i + 1), a);
    }
    for i in 0..=a4[0] {
        push(format!("E_star_{i}"), (3 * n - 1).saturating_sub(i));
    }
    push("R".into(), sizes(a4));
    push("S".into(), (2 * n - 2 * k) * sizes(a1));
    push("S_prime".into(), 4 * k - 2);
    push("T".into(), 2 * n - 2 * k - 1);
    for (i, &a) in a1.iter().enumerate() {
        push(format!("T_{}", i + 1), a);
    }
    for i in 1..k {
        push(format!("T_star_{i}"), i);
    }
    for i in 0..=top {
        push(format!("T_2star_{i}"), (4 * n - 2 * k).saturating_sub(i));
    }
    push("U".into(), k * sizes(a2));
    for (i, &a) in a2.iter().enumerate() {
        push(format!("U_{}", i + 1), a);
    }
    for i in 0..=a2[0] {
        push(format!("U_star_{i}"), (4 * n - 2).saturating_sub(i));
    }
    push("V".into(), sizes(a3));
    for (i, &a) in a3.iter().enumerate() {
        push(format!("V_{}", i + 1), a);
    }
    push("X".into(), 2 * n - k);
    for i in 0..2 * n - k {
        push(format!("X_star_{i}"), 4 * n - 2 * k - i);
    }
    push("Y".into(), k * (2 * n - k + 1) * sizes(a5));
    push("Y_prime".into(), 2 * n - k);
    for (i, &a) in a5.iter().enumerate() {
        push(format!("Y_{}", i + 1), a);
    }
    for i in 0..=2 * n - k + a5[0] {
        push(format!("Y_star_{i}"), (4 * n - 4).saturating_sub(i));
    }
    push("Z".into(), 2 * n - k);
    push("Z_prime".into(), 2 * n - k - 1);
    for i in 0..2 * n - k {
        push(format!("Z_star_{i}"), 4 * n + mr - 1 - i);
    }
    let p_count = c.small("P")?;
    finish_filler(&mut layout, "filler", p_count, report);
    count_check(inst, p_count, report);

    let defining = ["p", "A", "C", "C_prime", "R", "S", "S_prime", "U", "V", "X", "Y", "Z", "filler"];
    let pl = pool(inst, |l| !defining.contains(&l));
    pool_check("superincreasing", &pl, report);
    let s = c.uint("s")?;
    let q4 = c.uint("q4")?;
    size_identity(inst, "size_identity_R", &pl, &["R"], &q4, n + mr, &s, report);
    size_identity(inst, "size_identity_Z", &pl, &["Z"], &BigUint::zero(), 0, &s, report);
    Ok(layout)
}

fn maintain_shapley_checks(
    inst: &ControlInstance,
    b: &Base,
    report: &mut ValidationReport,
) -> Result<Vec<(String, usize)>> {
    let c = &inst.constants;
    let (n, k, mr) = (b.n, b.k, b.mr);
    let alpha = big(n.pow(4) + 2 * n.pow(3) + 13 * n * n + 8 * n + (3 * n + 3) * mr + 2);
    let p = &alpha * &alpha - big(k);
    let ell = c.uint("ell")?;
    let ells = c.exponents("ell_exponents")?.to_vec();
    decomposition_check("ell", &ell, &ells, report);
    let l1 = ells.first().copied().unwrap_or(0) as usize;
    let z_star = 2 * k * (alpha.bits() as usize - 1) + l1;
    let s = n + mr + z_star + 1;
    let mut y = BigUint::one();
    let mut top = BigUint::one();
    for i in 0..k {
        y *= &p + big(i) - big(s);
        top *= &p + big(i + 1);
    }
    let z = sub_or_zero(&top, &y);
    report.push(
        "closed_forms",
        c.uint("alpha")? == alpha
            && c.uint("P")? == p
            && c.small("z_star")? == z_star
            && c.small("s")? == s
            && c.uint("y")? == y
            && c.uint("z")? == z,
        format!("alpha = {alpha}, P = {p}, z* = {z_star}, s = {s}"),
    );
    report.push("alpha_bound", alpha >= big(256), format!("alpha = {alpha}"));
    let ys = c.exponents("y_exponents")?.to_vec();
    let zs = c.exponents("z_exponents")?.to_vec();
    decomposition_check("y", &y, &ys, report);
    decomposition_check("z", &z, &zs, report);
    if ells.is_empty() || ys.is_empty() || zs.is_empty() {
        return Ok(Vec::new());
    }

    let aux_labels = |l: &str| {
        l.starts_with("U_") || l.starts_with("V_") || l.starts_with("W_")
    };
    let aux: BigUint = inst
        .groups
        .iter()
        .filter(|g| aux_labels(&g.label))
        .map(|g| sum_of(inst, &g.label))
        .sum();
    let q_star = 1u32
        + sum_of(inst, "A")
        + sum_of(inst, "C")
        + sum_of(inst, "C_prime")
        + aux
        + addable_sum(inst);
    quota_check(inst, 2u32 * q_star + 1u32, report);

    let z1 = zs[0] as usize;
    let w_len = l1 + ys[0] as usize + 1;
    let mut layout = gadget_layout(b, true);
    for (i, &zi) in zs.iter().enumerate() {
        layout.push((format!("T_{}", i + 1), zi as usize + 1));
    }
    for (i, &zi) in zs.iter().enumerate() {
        layout.push((format!("U_{}", i + 1), zi as usize));
    }
    for i in 0..=z1 {
        layout.push((format!("U_prime_{i}"), z_star.saturating_sub(i)));
    }
    for (i, &li) in ells.iter().enumerate() {
        layout.push((format!("V_{}", i + 1), li as usize));
    }
    for (i, &yi) in ys.iter().enumerate() {
        layout.push((format!("W_{}", i + 1), yi as usize));
    }
    for i in 1..=w_len {
        layout.push((format!("W_prime_{i}"), s.saturating_sub(i)));
    }
    for (i, &li) in ells.iter().enumerate() {
        for (j, &yj) in ys.iter().enumerate() {
            layout.push((format!("X_{}_{}", i + 1, j + 1), (li as usize + 1) * (yj as usize + 1)));
        }
    }
    let p_count = c.small("P")?;
    finish_filler(&mut layout, "Y", p_count, report);
    count_check(inst, p_count, report);

    let pl = pool(inst, aux_labels);
    pool_check("superincreasing", &pl, report);
    let t_labels: Vec<String> = (1..=zs.len()).map(|i| format!("T_{i}")).collect();
    let x_labels: Vec<String> = inst
        .groups
        .iter()
        .filter(|g| g.label.starts_with("X_"))
        .map(|g| g.label.clone())
        .collect();
    let t_refs: Vec<&str> = t_labels.iter().map(String::as_str).collect();
    let x_refs: Vec<&str> = x_labels.iter().map(String::as_str).collect();
    let q2 = c.uint("q2")?;
    let s_big = big(s);
    size_identity(inst, "size_identity_T", &pl, &t_refs, &q2, n + mr, &s_big, report);
    size_identity(inst, "size_identity_X", &pl, &x_refs, &BigUint::zero(), 0, &s_big, report);
    Ok(layout)
}
