//! Reductions whose control side uses the Penrose–Banzhaf index.

use num_bigint::BigUint;
use num_traits::One;

use super::constants::binary_exponents;
use super::layout::{below, Layout};
use super::{ControlInstance, ReductionConstants, TheoremTag};
use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::gadgets::{pow10, GadgetWeights, WeightSet};
use crate::game::Game;

fn big(v: usize) -> BigUint {
    BigUint::from(v)
}

pub(super) fn require_k(formula: &CnfFormula, k: usize, min_k: usize, allow_full: bool) -> Result<()> {
    let n = formula.num_vars();
    let max_k = if allow_full { n } else { n - 1 };
    if n < 2 || k < min_k || k > max_k {
        let upper = if allow_full { "k <= n" } else { "k < n" };
        return Err(Error::Parameter(format!(
            "this reduction needs n >= 2 and {min_k} <= k, {upper} (n = {n}, k = {k})"
        )));
    }
    Ok(())
}

/// Records the parameters every reduction shares.
pub(super) fn base_constants(theorem: TheoremTag, gw: &GadgetWeights) -> ReductionConstants {
    let mut c = ReductionConstants::new(theorem);
    c.set_int("n", gw.n());
    c.set_int("m", gw.m());
    c.set_int("k", gw.k());
    c.set_int("r", gw.r());
    c.set_int("t", gw.t());
    if let Some(tp) = gw.t_prime() {
        c.set_int("t_prime", tp);
    }
    c.set_int(format!("q{}", gw.set().id()), gw.q_target().clone());
    c
}

/// Wraps a finished layout into an instance whose addable pool is `W_M`.
pub(super) fn assemble(
    theorem: TheoremTag,
    layout: Layout,
    quota: BigUint,
    gw: &GadgetWeights,
    mut constants: ReductionConstants,
) -> Result<ControlInstance> {
    constants.set_int("q", quota.clone());
    let (weights, groups) = layout.finish();
    Ok(ControlInstance {
        game: Game::new(weights, quota)?,
        addable: gw.m_players().iter().map(|p| p.weight.clone()).collect(),
        distinguished: 0,
        budget: gw.k(),
        goal: theorem.default_goal(),
        index: theorem.index(),
        groups,
        constants,
    })
}

pub(super) fn gadget_groups(layout: &mut Layout, gw: &GadgetWeights) {
    layout.group_of("A", gw.a_players().iter().map(|p| p.weight.clone()));
    layout.group_of("C", gw.c_players().iter().map(|p| p.weight.clone()));
    if gw.set().has_complement() {
        layout.group_of("C_prime", gw.c_prime_players().iter().map(|p| p.weight.clone()));
    }
}

/// Increase-β instance from an E-MajSAT instance.
pub fn reduce_increase_banzhaf(formula: &CnfFormula, k: usize) -> Result<ControlInstance> {
    majority(formula, k, TheoremTag::Thm1)
}

/// Nondecrease-β instance from an E-MajSAT instance. Identical to the
/// increase construction except for a second player of weight `q - 1`.
pub fn reduce_nondecrease_banzhaf(formula: &CnfFormula, k: usize) -> Result<ControlInstance> {
    majority(formula, k, TheoremTag::Thm3a)
}

fn majority(formula: &CnfFormula, k: usize, theorem: TheoremTag) -> Result<ControlInstance> {
    require_k(formula, k, 1, false)?;
    let n = formula.num_vars();
    let bound = big(k + (n - k - 1) * (k + 1));
    let gw = GadgetWeights::build(formula, k, WeightSet::One, Some(&bound), None)?;
    let q1 = gw.q_target();
    let q = 2u32 * (gw.w_a() + gw.w_m() + gw.w_c() + big((n - k) * (k + 1))) + 1u32;

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    let w: Vec<BigUint> = (1..=k)
        .map(|j| below(&q, &(q1 + big(j + 1))))
        .collect::<Result<_>>()?;
    layout.group("W", w);
    layout.repeat("X", k, &BigUint::one());
    let mut y: Vec<BigUint> = (0..n - k).map(|j| &q - 1u32 - big(j * (k + 1))).collect();
    if theorem == TheoremTag::Thm3a {
        y.insert(1, &q - 1u32);
    }
    layout.group("Y", y);
    layout.repeat("Z", n - k - 1, &big(k + 1));

    let constants = base_constants(theorem, &gw);
    assemble(theorem, layout, q, &gw, constants)
}

/// Decrease-β instance from an E-MinSAT instance (`2 <= k < n`).
pub fn reduce_decrease_banzhaf(formula: &CnfFormula, k: usize) -> Result<ControlInstance> {
    require_k(formula, k, 2, false)?;
    let n = formula.num_vars();
    let m = formula.num_clauses() as u32;
    let h1 = big(2 * k * k);
    let h = big(k + 1) * &h1;
    let z = big(2 * n - 2 * k) * &h;
    let e = big(2 * n - k + 1) * &z;
    let bound = big(n + 1) * &e;
    let gw = GadgetWeights::build(formula, k, WeightSet::Three, Some(&bound), None)?;
    let t = gw.t();
    let lead = |i: usize| pow10(t * (m + 1) + 2 * i as u32);
    let lead_sum: BigUint = (1..=k).map(lead).sum();
    let w_c = gw.w_c();
    let q3 = gw.q_target().clone();
    let q = 2u32 * (gw.w_a() + gw.w_m() + &w_c + 9u32 * &lead_sum + pow10(t)) + 1u32;

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    let d: Vec<BigUint> = (1..=k)
        .map(|i| below(&q, &(lead(i) + &w_c + 2u32)))
        .collect::<Result<_>>()?;
    layout.group("D", d);
    layout.repeat("E", n, &e);
    let f: Vec<BigUint> = (0..=n)
        .map(|j| below(&q, &(&q3 + big(j) * &e + 1u32)))
        .collect::<Result<_>>()?;
    layout.group("F", f);
    let mut g = Vec::with_capacity((k + 1) * (2 * n - 2 * k - 1));
    for i1 in 0..=k {
        for i2 in 1..=2 * n - 2 * k - 1 {
            let x = &lead_sum + big(i1) * &h1 + &w_c + big(k) + big(i2) * &h + 1u32;
            g.push(below(&q, &x)?);
        }
    }
    layout.group("G", g);
    layout.repeat("H", 2 * n - 2 * k - 1, &h);
    layout.repeat("H_prime", k, &h1);
    let u: Vec<BigUint> = (0..=2 * n - k)
        .map(|i| below(&q, &(4u32 * &lead_sum + &w_c + big(2 * k + 1) + big(i) * &z + 1u32)))
        .collect::<Result<_>>()?;
    layout.group("U", u);
    let mut v: Vec<BigUint> = (k + 2..=2 * k).map(big).collect();
    for i in 1..=k {
        for factor in [4u32, 3, 2] {
            v.push(factor * lead(i));
        }
    }
    layout.group("V", v);
    let mut x = Vec::with_capacity(k * (2 * n - k + 1));
    for i1 in 1..=k {
        for i2 in 0..=2 * n - k {
            let deficit = 5u32 * lead(i1) + &w_c + 2u32 + big(i2) * &z + 1u32;
            x.push(below(&q, &deficit)?);
        }
    }
    layout.group("X", x);
    layout.group("Y", (0..=2 * n - k).map(|j| &q - 1u32 - big(j) * &z));
    layout.repeat("Z", 2 * n - k, &z);

    let mut constants = base_constants(TheoremTag::Thm3bcBanzhaf, &gw);
    constants.set_int("h_prime", h1);
    constants.set_int("h", h);
    constants.set_int("z", z);
    constants.set_int("e", e);
    assemble(TheoremTag::Thm3bcBanzhaf, layout, q, &gw, constants)
}

/// Maintain-β instance from an E-ExaSAT instance (`1 <= k <= n`,
/// `1 <= ell <= 2^n`).
pub fn reduce_maintain_banzhaf(
    formula: &CnfFormula,
    k: usize,
    ell: &BigUint,
) -> Result<ControlInstance> {
    require_k(formula, k, 1, true)?;
    let n = formula.num_vars();
    if *ell < BigUint::one() || *ell > BigUint::one() << n {
        return Err(Error::Parameter(format!("ell must be in 1..=2^{n}, got {ell}")));
    }
    let ells = binary_exponents(ell);
    let mut z: Vec<BigUint> = Vec::with_capacity(ells.len());
    let mut weighted = BigUint::default();
    for &li in &ells {
        let zi = big(k + 1) + &weighted;
        weighted += BigUint::from(li) * &zi;
        z.push(zi);
    }
    let bound = big(k) + &weighted;
    let gw = GadgetWeights::build(formula, k, WeightSet::One, Some(&bound), None)?;
    let q1 = gw.q_target();
    let q = 2u32 * (gw.w_a() + gw.w_m() + gw.w_c() + &weighted + big(k + 1)) + 1u32;

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    let w: Vec<BigUint> = (1..=k)
        .map(|j| below(&q, &(q1 + big(j + 1))))
        .collect::<Result<_>>()?;
    layout.group("W", w);
    layout.repeat("X", k, &BigUint::one());
    for (i, (&li, zi)) in ells.iter().zip(&z).enumerate() {
        let li = li as usize;
        layout.group(
            format!("Y_{}", i + 1),
            (0..=li).map(|j| &q - 1u32 - big(j) * zi),
        );
        layout.repeat(format!("Z_{}", i + 1), li, zi);
    }

    let mut constants = base_constants(TheoremTag::Thm3dBanzhaf, &gw);
    constants.set_int("ell", ell.clone());
    constants.set_exponents("ell_exponents", ells);
    for (i, zi) in z.into_iter().enumerate() {
        constants.set_int(format!("z_{}", i + 1), zi);
    }
    assemble(TheoremTag::Thm3dBanzhaf, layout, q, &gw, constants)
}
