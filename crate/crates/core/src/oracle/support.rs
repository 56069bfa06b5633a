//! Exact equilibria by guessing which `x_ij` and `s_i` are positive.
//!
//! With `q_j = 1/p_j` the optimality conditions restricted to a guessed
//! support become a square linear system: one clearing equation per good,
//! `u_ij m_i q_j = w_i + s_i` per positive `x_ij`, and `w_i + s_i = m_i` per
//! positive `s_i`. Guesses are tried by size, smallest first; each solution is
//! kept only if the full verifier accepts it.

use itertools::Itertools;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kkt::verify_arctic_kkt;
use crate::linalg;
use crate::market::{validate_instance, Equilibrium, MarketInstance};
use crate::rational::{serde_rat, to_f64, Rational};

/// Largest number of candidate support elements (positive-utility pairs
/// plus buyers) the enumeration accepts.
pub const MAX_SUPPORT_ELEMENTS: usize = 24;

const SCREEN_TOL: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportGuess {
    /// `(buyer, good)` pairs with `x_ij > 0`.
    pub positive_x: Vec<(usize, usize)>,
    pub positive_s: Vec<usize>,
    /// `1/p_j` as solved.
    #[serde(with = "serde_rat::vec")]
    pub q: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleSolution {
    pub equilibrium: Equilibrium,
    pub support: SupportGuess,
    /// Supports of the accepted size that also passed.
    pub agreeing_supports: usize,
}

#[derive(Clone, Copy)]
enum Elem {
    X(usize, usize),
    S(usize),
}

pub fn oracle_solve(inst: &MarketInstance) -> Result<Equilibrium> {
    oracle_solve_detailed(inst).map(|s| s.equilibrium)
}

pub fn oracle_solve_detailed(inst: &MarketInstance) -> Result<OracleSolution> {
    validate_instance(inst).into_result()?;
    let (n, m) = (inst.num_buyers(), inst.num_goods());
    // a pair with zero utility can never carry goods at an optimum: its ratio
    // would have to match a strictly positive level
    let mut elems: Vec<Elem> = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if inst.utilities[i][j].is_positive() {
                elems.push(Elem::X(i, j));
            }
        }
    }
    elems.extend((0..n).map(Elem::S));
    if elems.len() > MAX_SUPPORT_ELEMENTS || n > 64 || m > 64 {
        return Err(Error::SizeGuard(format!(
            "{} support elements (limit {MAX_SUPPORT_ELEMENTS})",
            elems.len()
        )));
    }
    let (good_mask, buyer_mask): (Vec<u64>, Vec<u64>) = elems
        .iter()
        .map(|e| match *e {
            Elem::X(i, j) => (1u64 << j, 1u64 << i),
            Elem::S(i) => (0, 1u64 << i),
        })
        .unzip();
    let all_goods = (1u64 << m) - 1;
    let all_buyers = (1u64 << n) - 1;

    for size in m.max(n)..=elems.len() {
        let mut found: Option<OracleSolution> = None;
        for combo in (0..elems.len()).combinations(size) {
            let goods = combo.iter().fold(0, |acc, &k| acc | good_mask[k]);
            let buyers = combo.iter().fold(0, |acc, &k| acc | buyer_mask[k]);
            if goods != all_goods || buyers != all_buyers {
                continue;
            }
            let chosen: Vec<Elem> = combo.iter().map(|&k| elems[k]).collect();
            let Some(sol) = try_support(inst, &chosen)? else { continue };
            match &mut found {
                None => found = Some(sol),
                Some(first) => {
                    if first.equilibrium.prices != sol.equilibrium.prices {
                        return Err(Error::OracleDisagreement);
                    }
                    first.agreeing_supports += 1;
                }
            }
        }
        if let Some(sol) = found {
            return Ok(sol);
        }
    }
    Err(Error::NoSupport)
}

struct System {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
}

/// Unknowns: `q_0..q_{m-1}`, then one per chosen element in order.
fn build_system(inst: &MarketInstance, chosen: &[Elem]) -> System {
    let m = inst.num_goods();
    let dim = m + chosen.len();
    let zero_row = || vec![Rational::zero(); dim];
    let mut a = Vec::with_capacity(dim);
    let mut b = Vec::with_capacity(dim);
    for j in 0..m {
        let mut row = zero_row();
        for (k, e) in chosen.iter().enumerate() {
            if matches!(*e, Elem::X(_, jj) if jj == j) {
                row[m + k] = Rational::from_integer(1.into());
            }
        }
        a.push(row);
        b.push(Rational::from_integer(1.into()));
    }
    // coefficients of w_i + s_i for buyer i
    let level_row = |i: usize, row: &mut Vec<Rational>, sign: i64| {
        for (k, e) in chosen.iter().enumerate() {
            match *e {
                Elem::X(ii, jj) if ii == i => row[m + k] += &inst.utilities[i][jj] * Rational::from_integer(sign.into()),
                Elem::S(ii) if ii == i => row[m + k] += Rational::from_integer(sign.into()),
                _ => {}
            }
        }
    };
    for e in chosen {
        let mut row = zero_row();
        match *e {
            Elem::X(i, j) => {
                row[j] = &inst.utilities[i][j] * &inst.money[i];
                level_row(i, &mut row, -1);
                b.push(Rational::zero());
            }
            Elem::S(i) => {
                level_row(i, &mut row, 1);
                b.push(inst.money[i].clone());
            }
        }
        a.push(row);
    }
    System { a, b }
}

/// Cheap floating-point rejection of supports whose solution clearly
/// violates a sign constraint or one of the optimality inequalities.
/// Returns `true` when the exact solve is still worth doing.
fn screen(inst: &MarketInstance, chosen: &[Elem], sys: &System) -> bool {
    let a: Vec<Vec<f64>> = sys.a.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let b: Vec<f64> = sys.b.iter().map(to_f64).collect();
    let Some(v) = linalg::solve_f64(a, b, 1e-9) else {
        // near-singular in floating point: let the exact solve decide
        return true;
    };
    let m = inst.num_goods();
    if v[..m].iter().any(|&q| q <= SCREEN_TOL) || v[m..].iter().any(|&x| x < -SCREEN_TOL) {
        return false;
    }
    let n = inst.num_buyers();
    let mut level = vec![0.0; n];
    for (k, e) in chosen.iter().enumerate() {
        match *e {
            Elem::X(i, j) => level[i] += to_f64(&inst.utilities[i][j]) * v[m + k],
            Elem::S(i) => level[i] += v[m + k],
        }
    }
    for i in 0..n {
        let money = to_f64(&inst.money[i]);
        let lv = level[i] / money;
        // λ = 1 bounds the level from below
        if lv < 1.0 - SCREEN_TOL * (1.0 + lv.abs()) {
            return false;
        }
        for j in 0..m {
            let ratio = to_f64(&inst.utilities[i][j]) * v[j];
            if ratio > lv + SCREEN_TOL * (1.0 + lv.abs()) {
                return false;
            }
        }
    }
    true
}

fn try_support(inst: &MarketInstance, chosen: &[Elem]) -> Result<Option<OracleSolution>> {
    let sys = build_system(inst, chosen);
    if !screen(inst, chosen, &sys) {
        return Ok(None);
    }
    let Some(v) = linalg::solve(sys.a, sys.b) else { return Ok(None) };
    let (n, m) = (inst.num_buyers(), inst.num_goods());
    if v[..m].iter().any(|q| !q.is_positive()) {
        return Ok(None);
    }
    let prices: Vec<Rational> = v[..m].iter().map(Rational::recip).collect();
    let mut x = vec![vec![Rational::zero(); m]; n];
    let mut s = vec![Rational::zero(); n];
    let mut positive_x = Vec::new();
    let mut positive_s = Vec::new();
    for (k, e) in chosen.iter().enumerate() {
        match *e {
            Elem::X(i, j) => {
                x[i][j] = v[m + k].clone();
                positive_x.push((i, j));
            }
            Elem::S(i) => {
                s[i] = v[m + k].clone();
                positive_s.push(i);
            }
        }
    }
    let eq = Equilibrium::assemble(inst, prices, x, s);
    if !verify_arctic_kkt(inst, &eq)?.overall {
        return Ok(None);
    }
    let support = SupportGuess { positive_x, positive_s, q: v[..m].to_vec() };
    Ok(Some(OracleSolution { equilibrium: eq, support, agreeing_supports: 1 }))
}
