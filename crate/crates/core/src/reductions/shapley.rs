//! Reductions whose control side uses the Shapley–Shubik index.
//!
//! These instances have hundreds to millions of players. Most weights come
//! from superincreasing chains: each new weight exceeds the total of all
//! smaller auxiliary players, so a target deficit has exactly one
//! representation and the coalition sizes can be audited greedily.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::banzhaf::{assemble, base_constants, gadget_groups, require_k};
use super::constants::binary_exponents;
use super::layout::{below, Layout};
use super::{ControlInstance, TheoremTag};
use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::gadgets::{ceil_log2, pow10, GadgetWeights, WeightSet};

fn big(v: usize) -> BigUint {
    BigUint::from(v)
}

fn int(v: i128) -> BigInt {
    BigInt::from(v)
}

fn ratio(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

fn pow2r(e: usize) -> BigRational {
    ratio(&(BigInt::one() << e))
}

fn to_nat(v: &BigInt, what: &str) -> Result<BigUint> {
    v.to_biguint()
        .ok_or_else(|| Error::Infeasible(format!("{what} is negative ({v})")))
}

fn to_count(v: i128, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Infeasible(format!("{what} is negative ({v})")))
}

/// `w_i = base + sum_{j<i} mult[j] * w_j` for every entry of `mult`.
pub(super) fn chain(base: &BigUint, mult: &[usize]) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::with_capacity(mult.len());
    let mut acc = base.clone();
    for &c in mult {
        out.push(acc.clone());
        acc += big(c) * out.last().expect("just pushed");
    }
    out
}

fn exps_usize(v: &BigUint) -> Vec<usize> {
    binary_exponents(v).into_iter().map(|e| e as usize).collect()
}

fn filler(layout: &mut Layout, label: &str, total: usize, quota: &BigUint) -> Result<()> {
    let used = layout.len();
    if used > total {
        return Err(Error::Infeasible(format!(
            "explicit groups use {used} players but the construction allows {total}"
        )));
    }
    layout.repeat(label, total - used, quota);
    Ok(())
}

/// Increase-φ (and Nondecrease-φ) instance from an E-MajSAT instance.
pub fn reduce_increase_shapley(formula: &CnfFormula, k: usize) -> Result<ControlInstance> {
    require_k(formula, k, 1, false)?;
    let n = formula.num_vars();
    let m = formula.num_clauses();
    let r = ceil_log2(n) as usize - 1;
    let (ni, mi, ki) = (n as i128, m as i128, k as i128);
    let p = 6 * ni * ni * mi + 26 * ni * ni + 8 * ki * ki + 8 * ni * mi + 18 * ni + 4 * ki
        - 2 * mi
        - 3;
    let delta =
        3 * ni * ni * mi + 13 * ni * ni + 4 * ki * ki + 3 * ni * mi + 5 * ni + 4 * ki - 2 * mi - 5;
    let x = delta + ni * mi + 4 * ni - 2 * ki + mi + 3;
    let p_count = to_count(p, "P")?;
    let delta_count = to_count(delta, "delta")?;

    let mut k_prime = BigRational::one();
    for i in 0..ki {
        k_prime *= BigRational::one() + BigRational::new(int(x + 1), int(p - x + i));
    }
    let scaled = pow2r(n - k + 1) * (&k_prime - BigRational::one());
    let z = to_nat(&(scaled.ceil().to_integer() - 1), "z")?;
    let ys = exps_usize(&z);
    let Some(&y1) = ys.first() else {
        return Err(Error::Infeasible("z has no binary digits".into()));
    };
    let u = ys.len();

    let alpha: Vec<usize> = (0..=2 * n - 2 * k)
        .map(|i| to_count(ni * mi + 4 * ni - 2 * ki + mi + 2 - i as i128, "alpha_i"))
        .collect::<Result<_>>()?;
    let beta: Vec<usize> = (0..=y1)
        .map(|i| to_count((ni - r as i128) * mi + 3 * ni - 2 * ki + 2 - i as i128, "beta_i"))
        .collect::<Result<_>>()?;

    let v = chain(&big(1 + delta_count), &beta);
    let v_last = big(beta[y1] + 1) * &v[y1];
    let v_prime = chain(&v_last, &ys);
    let w_star = chain(&(big(ys[u - 1] + 1) * &v_prime[u - 1]), &alpha);
    let last = 2 * n - 2 * k;
    let w_prime = big(alpha[last] + 1) * &w_star[last];
    let bound = big(2 * n - 2 * k + 1) * &w_prime;

    let gw = GadgetWeights::build(formula, k, WeightSet::Two, None, Some(&bound))?;
    let tp = gw.t_prime().expect("set 2 has t'");
    let q2 = gw.q_target().clone();
    let q = 2u32 * (gw.w_a() + gw.w_m() + gw.w_c() + gw.w_c_prime() + pow10(tp) + 1u32);

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    layout.repeat("D", delta_count, &BigUint::one());
    let mut s = Vec::new();
    for (i, &yi) in ys.iter().enumerate() {
        for j in 0..=yi {
            let deficit = &q2 + big(beta[j]) * &v[j] + big(j) * &v_prime[i] + big(delta_count + 1);
            s.push(below(&q, &deficit)?);
        }
    }
    layout.group("S", s);
    for (i, vi) in v.iter().enumerate() {
        layout.repeat(format!("V_{i}"), beta[i], vi);
    }
    for (i, vpi) in v_prime.iter().enumerate() {
        layout.repeat(format!("V_prime_{}", i + 1), ys[i], vpi);
    }
    let t: Vec<BigUint> = (0..=last)
        .map(|i| {
            let deficit = big(alpha[i]) * &w_star[i] + big(i) * &w_prime + big(delta_count + 1);
            below(&q, &deficit)
        })
        .collect::<Result<_>>()?;
    layout.group("T", t);
    for (i, wi) in w_star.iter().enumerate() {
        layout.repeat(format!("W_star_{i}"), alpha[i], wi);
    }
    layout.repeat("W_prime", last, &w_prime);
    filler(&mut layout, "Z", p_count, &q)?;

    let mut c = base_constants(TheoremTag::Thm2, &gw);
    c.set_int("P", p);
    c.set_int("delta", delta);
    c.set_int("x", x);
    c.set_rational("k_prime", k_prime);
    c.set_int("z", z);
    c.set_exponents("z_exponents", ys.iter().map(|&e| e as u64).collect());
    c.set_int("w_prime", w_prime);
    assemble(TheoremTag::Thm2, layout, q, &gw, c)
}

/// The rational constants of the decrease-φ construction.
pub(super) struct DecreaseConstants {
    pub p_prime: BigInt,
    pub delta: BigInt,
    pub p: BigInt,
    pub s: BigInt,
    pub k_prime: BigRational,
    pub y: BigRational,
    pub gamma: [BigInt; 5],
    pub epsilon: [BigRational; 4],
}

pub(super) fn decrease_constants(n: usize, m: usize, k: usize) -> DecreaseConstants {
    let r = ceil_log2(n) as i128 - 1;
    let (ni, ki, mr) = (n as i128, k as i128, m as i128 * (r + 1));
    let p_prime = 8 * ni * ki.pow(3) - 4 * ki.pow(4) + 4 * ni * ni * ki + 12 * ni * ki * ki
        - 6 * ki.pow(3)
        + 53 * ni * ni
        - 7 * ni * ki
        + 12 * ki * ki
        + 10 * ni
        + 11 * ki
        + (2 * ni - ki + 2) * mr
        - 1;
    let delta = BigRational::new(int(5 * p_prime - 36 * ni - 9 * mr), int(4))
        .ceil()
        .to_integer();
    let p_prime = int(p_prime);
    let p = &p_prime + &delta;
    let s = int(4 * ni + mr) + &delta;

    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..ki {
        num *= &p + int(i + 1);
        den *= &p + int(i) - &s;
    }
    let k_prime = BigRational::new(num, den);
    let y = &k_prime - pow2r(k);
    let a = pow2r(2 * n - 2 * k - 1);
    let one = BigRational::one();

    let g1 = (&k_prime - &one).ceil().to_integer();
    let e1 = &k_prime - ratio(&g1);
    let g2 = (&a * &y + &one).floor().to_integer();
    let e2 = ratio(&g2) - &a * &y;
    let g3 = (&a * &e1).ceil().to_integer();
    let e3 = ratio(&g3) - &a * &e1;
    let v = pow2r(n - k + 1) * &y + pow2r(n)
        - (ratio(&int(ki)) * &e2 + ratio(&(int(1i128 << k) - int(ki) - 2)) * &e3)
            / pow2r(n - k - 1);
    let g4 = (&v - &one).ceil().to_integer();
    let e4 = &v - ratio(&g4);
    let g5 = y.ceil().to_integer();

    DecreaseConstants {
        p_prime,
        delta,
        p,
        s,
        k_prime,
        y,
        gamma: [g1, g2, g3, g4, g5],
        epsilon: [e1, e2, e3, e4],
    }
}

/// Admissible ranges of the four residuals within `[0, 1]`, as
/// `(zero allowed, one allowed)`.
pub(super) const EPSILON_RANGES: [(bool, bool); 4] = [
    (false, true),
    (false, true),
    (true, false),
    (false, true),
];

pub(super) fn epsilon_in_range(e: &BigRational, (zero_ok, one_ok): (bool, bool)) -> bool {
    let above = if zero_ok { !e.is_negative() } else { e.is_positive() };
    let below = if one_ok { *e <= BigRational::one() } else { *e < BigRational::one() };
    above && below
}

/// Decrease-φ (and Nonincrease-φ) instance from an E-MinSAT instance
/// (`3 <= k < n`).
pub fn reduce_decrease_shapley(formula: &CnfFormula, k: usize) -> Result<ControlInstance> {
    require_k(formula, k, 3, false)?;
    let n = formula.num_vars();
    let m = formula.num_clauses();
    let r = ceil_log2(n) as usize - 1;
    let mr = m * (r + 1);
    let dc = decrease_constants(n, m, k);

    for (i, e) in dc.epsilon.iter().enumerate() {
        if !epsilon_in_range(e, EPSILON_RANGES[i]) {
            return Err(Error::Infeasible(format!("epsilon_{} = {e} out of range", i + 1)));
        }
    }
    let gammas: Vec<BigUint> = dc
        .gamma
        .iter()
        .enumerate()
        .map(|(i, g)| to_nat(g, &format!("gamma_{}", i + 1)))
        .collect::<Result<_>>()?;
    let alpha: Vec<Vec<usize>> = gammas.iter().map(exps_usize).collect();
    if let Some(i) = alpha.iter().position(|a| a.is_empty()) {
        return Err(Error::Infeasible(format!("gamma_{} is zero", i + 1)));
    }
    let [a1, a2, a3, a4, a5] = [&alpha[0], &alpha[1], &alpha[2], &alpha[3], &alpha[4]];
    let p_count = dc
        .p
        .to_usize()
        .ok_or_else(|| Error::Infeasible("P out of range".into()))?;
    let delta = dc
        .delta
        .to_usize()
        .ok_or_else(|| Error::Infeasible("delta is negative".into()))?;
    let d = (5 * k * k - 7 * k) / 2 - 2;
    let dd = big(delta * d);

    let cnt = |v: i128, what: &str| to_count(v, what);
    let (ni, ki, mri) = (n as i128, k as i128, mr as i128);
    let top = (2 * n - 2 * k - 1 + a1[0]).max(a3[0]);

    let e = chain(&(big(1) + big(delta + 1) * big(d)), a4);
    let e_star_mult: Vec<usize> = (0..=a4[0])
        .map(|j| cnt(3 * ni - 1 - j as i128, "|E*_i|"))
        .collect::<Result<_>>()?;
    let e_star = chain(
        &(big(1) + big(a4[a4.len() - 1] + 1) * &e[e.len() - 1]),
        &e_star_mult,
    );
    let t2 = big(cnt(3 * ni - a4[0] as i128, "|E*|+1")?) * &e_star[a4[0]];
    let tt = chain(&(big(1) + big(2 * n - 2 * k) * &t2), a1);
    let t_star_mult: Vec<usize> = (1..k).collect();
    let t_star = chain(
        &(big(1) + big(a1[a1.len() - 1] + 1) * &tt[tt.len() - 1]),
        &t_star_mult,
    );
    let t_star_at = |i: usize| &t_star[i - 1];
    let t2s_count: Vec<usize> = (0..=top)
        .map(|i| cnt(4 * ni - 2 * ki - i as i128, "|T**_i|"))
        .collect::<Result<_>>()?;
    let t2s_mult: Vec<usize> = (0..=top).map(|j| 4 * n - 2 - j).collect();
    let t2s = chain(&(big(1) + big(k) * t_star_at(k - 1)), &t2s_mult);
    let uu = chain(
        &(big(1) + big(t2s_count[top] + 1) * &t2s[top]),
        a2,
    );
    let u_star_mult: Vec<usize> = (0..=a2[0])
        .map(|j| cnt(4 * ni - 2 - j as i128, "|U*_i|"))
        .collect::<Result<_>>()?;
    let u_star = chain(
        &(big(1) + big(a2[a2.len() - 1] + 1) * &uu[uu.len() - 1]),
        &u_star_mult,
    );
    let vv = chain(
        &(big(1) + big(u_star_mult[a2[0]] + 1) * &u_star[a2[0]]),
        a3,
    );
    let x_star_mult: Vec<usize> = (0..2 * n - k)
        .map(|j| cnt(4 * ni - 2 * ki - j as i128, "|X*_i|"))
        .collect::<Result<_>>()?;
    let x_star = chain(
        &(big(1) + big(a3[a3.len() - 1] + 1) * &vv[vv.len() - 1]),
        &x_star_mult,
    );
    let y_prime = big(2 * n - k + 2) * &x_star[2 * n - k - 1];
    let yy = chain(&(big(1) + big(2 * n - k + 1) * &y_prime), a5);
    let y_top = 2 * n - k + a5[0];
    let y_star_mult: Vec<usize> = (0..=y_top)
        .map(|j| cnt(4 * ni - 4 - j as i128, "|Y*_i|"))
        .collect::<Result<_>>()?;
    let y_star = chain(
        &(big(1) + big(a5[a5.len() - 1] + 1) * &yy[yy.len() - 1]),
        &y_star_mult,
    );
    let z = big(y_star_mult[y_top] + 1) * &y_star[y_top];
    let z_star_mult: Vec<usize> = (0..2 * n - k)
        .map(|j| cnt(4 * ni + mri - 1 - j as i128, "|Z*_i|"))
        .collect::<Result<_>>()?;
    let z_star = chain(&(big(1) + big(2 * n - k) * &z), &z_star_mult);
    let t_star_total = big(2 * n + mr + k + 1) * &z_star[2 * n - k - 1];
    let bound = big(k - 1) * (&t_star_total + big(2 * k + 3));

    let gw = GadgetWeights::build(formula, k, WeightSet::Four, None, Some(&bound))?;
    let q4 = gw.q_target().clone();
    let w_c = gw.w_c();
    let lead = |i: usize| gw.lead(i);
    let lead_sum: BigUint = (1..=k).map(lead).sum();
    let q = 2u32 * (gw.w_a() + gw.w_m() + 9u32 * &lead_sum + &w_c + pow10(gw.t()) + 1u32);
    let tail = &dd + 1u32;

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    layout.repeat("D", delta, &big(d));
    for (i, ei) in e.iter().enumerate() {
        layout.repeat(format!("E_{}", i + 1), a4[i], ei);
    }
    for (i, ei) in e_star.iter().enumerate() {
        layout.repeat(format!("E_star_{i}"), e_star_mult[i], ei);
    }
    let mut rr = Vec::new();
    for (i, ei) in e.iter().enumerate() {
        for j in 0..=a4[i] {
            let deficit = &q4 + big(j) * ei + big(e_star_mult[j]) * &e_star[j] + &tail;
            rr.push(below(&q, &deficit)?);
        }
    }
    layout.group("R", rr);
    let big_part = 4u32 * &lead_sum + &w_c + &t_star_total + big(3 * k + 1);
    let mut ss = Vec::new();
    for i1 in 0..2 * n - 2 * k {
        for (i2, ti) in tt.iter().enumerate() {
            for j in 0..=a1[i2] {
                let deficit = &big_part
                    + big(i1) * &t2
                    + big(j) * ti
                    + big(t2s_count[i1 + j]) * &t2s[i1 + j]
                    + &tail;
                ss.push(below(&q, &deficit)?);
            }
        }
    }
    layout.group("S", ss);
    let mut s_prime = Vec::with_capacity(4 * k - 2);
    for i in 0..=k - 3 {
        let sub = if i == 0 { BigUint::zero() } else { big(i) * t_star_at(i) };
        if sub > &t_star_total + big(2 * k + 3 + i) {
            return Err(Error::Infeasible("S' weight would be negative".into()));
        }
        s_prime.push(&t_star_total - sub + big(2 * k + 3 + i));
    }
    for i in 1..=k {
        for f in [4u32, 3, 2] {
            s_prime.push(f * lead(i));
        }
    }
    layout.group("S_prime", s_prime);
    layout.repeat("T", 2 * n - 2 * k - 1, &t2);
    for (i, ti) in tt.iter().enumerate() {
        layout.repeat(format!("T_{}", i + 1), a1[i], ti);
    }
    for i in 1..k {
        layout.repeat(format!("T_star_{i}"), i, t_star_at(i));
    }
    for (i, ti) in t2s.iter().enumerate() {
        layout.repeat(format!("T_2star_{i}"), t2s_count[i], ti);
    }
    let mut uu_def = Vec::new();
    for i1 in 1..=k {
        for (i2, ui) in uu.iter().enumerate() {
            for j in 0..=a2[i2] {
                let deficit = lead(i1)
                    + 1u32
                    + &w_c
                    + big(j) * ui
                    + big(u_star_mult[j]) * &u_star[j]
                    + &tail;
                uu_def.push(below(&q, &deficit)?);
            }
        }
    }
    layout.group("U", uu_def);
    for (i, ui) in uu.iter().enumerate() {
        layout.repeat(format!("U_{}", i + 1), a2[i], ui);
    }
    for (i, ui) in u_star.iter().enumerate() {
        layout.repeat(format!("U_star_{i}"), u_star_mult[i], ui);
    }
    let mut vv_def = Vec::new();
    for (i, vi) in vv.iter().enumerate() {
        for j in 0..=a3[i] {
            let deficit =
                &big_part + big(j) * vi + big(t2s_count[j]) * &t2s[j] + &tail;
            vv_def.push(below(&q, &deficit)?);
        }
    }
    layout.group("V", vv_def);
    for (i, vi) in vv.iter().enumerate() {
        layout.repeat(format!("V_{}", i + 1), a3[i], vi);
    }
    let x_def: Vec<BigUint> = (0..2 * n - k)
        .map(|i| {
            let deficit = 4u32 * &lead_sum
                + &w_c
                + big(k - 1)
                + big(i) * &z
                + big(x_star_mult[i]) * &x_star[i]
                + &tail;
            below(&q, &deficit)
        })
        .collect::<Result<_>>()?;
    layout.group("X", x_def);
    for (i, xi) in x_star.iter().enumerate() {
        layout.repeat(format!("X_star_{i}"), x_star_mult[i], xi);
    }
    let mut y_def = Vec::new();
    for i1 in 1..=k {
        for i2 in 0..=2 * n - k {
            for (i3, yi) in yy.iter().enumerate() {
                for j in 0..=a5[i3] {
                    let deficit = 5u32 * lead(i1)
                        + 2u32
                        + &w_c
                        + big(i2) * &y_prime
                        + big(j) * yi
                        + big(y_star_mult[i2 + j]) * &y_star[i2 + j]
                        + &tail;
                    y_def.push(below(&q, &deficit)?);
                }
            }
        }
    }
    layout.group("Y", y_def);
    layout.repeat("Y_prime", 2 * n - k, &y_prime);
    for (i, yi) in yy.iter().enumerate() {
        layout.repeat(format!("Y_{}", i + 1), a5[i], yi);
    }
    for (i, yi) in y_star.iter().enumerate() {
        layout.repeat(format!("Y_star_{i}"), y_star_mult[i], yi);
    }
    let z_def: Vec<BigUint> = (0..2 * n - k)
        .map(|i| {
            let deficit = big(i) * &z + big(z_star_mult[i]) * &z_star[i] + &tail;
            below(&q, &deficit)
        })
        .collect::<Result<_>>()?;
    layout.group("Z", z_def);
    layout.repeat("Z_prime", 2 * n - k - 1, &z);
    for (i, zi) in z_star.iter().enumerate() {
        layout.repeat(format!("Z_star_{i}"), z_star_mult[i], zi);
    }
    filler(&mut layout, "filler", p_count, &q)?;

    let mut c = base_constants(TheoremTag::Thm3bcShapley, &gw);
    c.set_int("P_prime", dc.p_prime);
    c.set_int("delta", dc.delta);
    c.set_int("P", dc.p);
    c.set_int("s", dc.s);
    c.set_rational("k_prime", dc.k_prime);
    c.set_rational("y", dc.y);
    for (i, g) in gammas.into_iter().enumerate() {
        c.set_exponents(
            format!("gamma_{}_exponents", i + 1),
            alpha[i].iter().map(|&e| e as u64).collect(),
        );
        c.set_int(format!("gamma_{}", i + 1), g);
    }
    for (i, e) in dc.epsilon.into_iter().enumerate() {
        c.set_rational(format!("epsilon_{}", i + 1), e);
    }
    c.set_int("d", d);
    c.set_int("t_star", t_star_total);
    assemble(TheoremTag::Thm3bcShapley, layout, q, &gw, c)
}

/// `floor(log2 v)` for `v >= 1`.
fn floor_log2(v: &BigUint) -> u64 {
    v.bits() - 1
}

/// Maintain-φ instance from an E-ExaSAT instance (`n >= 3`, `1 <= k <= n`,
/// `1 <= ell <= 2^n`).
pub fn reduce_maintain_shapley(
    formula: &CnfFormula,
    k: usize,
    ell: &BigUint,
) -> Result<ControlInstance> {
    require_k(formula, k, 1, true)?;
    let n = formula.num_vars();
    if n < 3 {
        return Err(Error::Parameter(format!("this reduction needs n >= 3 (n = {n})")));
    }
    if *ell < BigUint::one() || *ell > BigUint::one() << n {
        return Err(Error::Parameter(format!("ell must be in 1..=2^{n}, got {ell}")));
    }
    let m = formula.num_clauses();
    let r = ceil_log2(n) as usize - 1;
    let mr = m * (r + 1);
    let alpha = big(n.pow(4) + 2 * n.pow(3) + 13 * n * n + 8 * n + (3 * n + 3) * mr + 2);
    if alpha < big(256) {
        return Err(Error::Parameter(format!("alpha = {alpha} must be at least 256")));
    }
    let p = &alpha * &alpha - big(k);
    let p_count = p
        .to_usize()
        .ok_or_else(|| Error::Infeasible("P out of range".into()))?;
    let ells = exps_usize(ell);
    let l1 = ells[0];
    let z_star = 2 * k * floor_log2(&alpha) as usize + l1;
    let s = n + mr + z_star + 1;

    let mut y = BigUint::one();
    let mut top = BigUint::one();
    for i in 0..k {
        y *= &p - big(s) + big(i);
        top *= &p + big(i + 1);
    }
    if top <= y {
        return Err(Error::Infeasible("z would be nonpositive".into()));
    }
    let z = &top - &y;
    let ys = exps_usize(&y);
    let zs = exps_usize(&z);
    let z1 = zs[0];
    if z1 > z_star {
        return Err(Error::Infeasible(format!("z_1 = {z1} exceeds z* = {z_star}")));
    }
    let (h, h1, h2) = (ells.len(), ys.len(), zs.len());

    let u = chain(&BigUint::one(), &zs);
    // u_prime[i] is the weight of group U'_i, which has z* - i players.
    let u_prime_mult: Vec<usize> = (0..=z1).map(|i| z_star - i).collect();
    let u_prime = chain(&(big(zs[h2 - 1] + 1) * &u[h2 - 1]), &u_prime_mult);
    let v = chain(&(big(z_star - z1 + 1) * &u_prime[z1]), &ells);
    let w = chain(&(big(ells[h - 1] + 1) * &v[h - 1]), &ys);
    let w_len = l1 + ys[0] + 1;
    if w_len >= s {
        return Err(Error::Infeasible("W' groups would be empty or negative".into()));
    }
    let w_prime_mult: Vec<usize> = (1..=w_len).map(|i| s - i).collect();
    // w_prime[i - 1] is w'_i.
    let w_prime = chain(&(big(ys[h1 - 1] + 1) * &w[h1 - 1]), &w_prime_mult);
    let bound = big(w_len + 1) * &w_prime[w_len - 1];

    let gw = GadgetWeights::build(formula, k, WeightSet::Two, None, Some(&bound))?;
    let q2 = gw.q_target().clone();
    let aux: BigUint = zs.iter().zip(&u).map(|(&c, x)| big(c) * x).sum::<BigUint>()
        + u_prime_mult.iter().zip(&u_prime).map(|(&c, x)| big(c) * x).sum::<BigUint>()
        + ells.iter().zip(&v).map(|(&c, x)| big(c) * x).sum::<BigUint>()
        + ys.iter().zip(&w).map(|(&c, x)| big(c) * x).sum::<BigUint>()
        + w_prime_mult.iter().zip(&w_prime).map(|(&c, x)| big(c) * x).sum::<BigUint>();
    let q_star = BigUint::one() + gw.w_a() + gw.w_c() + gw.w_c_prime() + &aux + gw.w_m();
    let q = 2u32 * &q_star + 1u32;

    let mut layout = Layout::new();
    layout.group("p", [BigUint::one()]);
    gadget_groups(&mut layout, &gw);
    for (i, ui) in u.iter().enumerate() {
        let t: Vec<BigUint> = (0..=zs[i])
            .map(|j| {
                let deficit =
                    &q2 + big(j) * ui + big(z_star - j) * &u_prime[j] + 1u32;
                below(&q, &deficit)
            })
            .collect::<Result<_>>()?;
        layout.group(format!("T_{}", i + 1), t);
    }
    for (i, ui) in u.iter().enumerate() {
        layout.repeat(format!("U_{}", i + 1), zs[i], ui);
    }
    for (i, ui) in u_prime.iter().enumerate() {
        layout.repeat(format!("U_prime_{i}"), u_prime_mult[i], ui);
    }
    for (i, vi) in v.iter().enumerate() {
        layout.repeat(format!("V_{}", i + 1), ells[i], vi);
    }
    for (i, wi) in w.iter().enumerate() {
        layout.repeat(format!("W_{}", i + 1), ys[i], wi);
    }
    for (i, wi) in w_prime.iter().enumerate() {
        layout.repeat(format!("W_prime_{}", i + 1), w_prime_mult[i], wi);
    }
    for (i, vi) in v.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            let mut x = Vec::with_capacity((ells[i] + 1) * (ys[j] + 1));
            for a in 0..=ells[i] {
                for b in 0..=ys[j] {
                    let deficit = big(a) * vi
                        + big(b) * wj
                        + big(s - 1 - a - b) * &w_prime[a + b]
                        + 1u32;
                    x.push(below(&q, &deficit)?);
                }
            }
            layout.group(format!("X_{}_{}", i + 1, j + 1), x);
        }
    }
    filler(&mut layout, "Y", p_count, &q)?;

    let mut c = base_constants(TheoremTag::Thm3dShapley, &gw);
    c.set_int("ell", ell.clone());
    c.set_exponents("ell_exponents", ells.iter().map(|&e| e as u64).collect());
    c.set_int("alpha", alpha);
    c.set_int("P", p);
    c.set_int("z_star", z_star);
    c.set_int("s", s);
    c.set_int("y", y);
    c.set_exponents("y_exponents", ys.iter().map(|&e| e as u64).collect());
    c.set_int("z", z);
    c.set_exponents("z_exponents", zs.iter().map(|&e| e as u64).collect());
    c.set_int("q_star", q_star);
    assemble(TheoremTag::Thm3dShapley, layout, q, &gw, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_recursion() {
        let c = chain(&big(1), &[2, 3]);
        assert_eq!(c, vec![big(1), big(3)]);
    }

    #[test]
    fn decrease_constants_example() {
        let dc = decrease_constants(4, 1, 3);
        assert_eq!(dc.p_prime, int(1960));
        assert_eq!(dc.delta, int(2410));
        assert_eq!(dc.p, int(4370));
        assert_eq!(dc.s, int(2428));
    }
}
