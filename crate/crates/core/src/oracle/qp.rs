//! Least-norm surplus by exact quadratic programming.
//!
//! A vector `y` of buyer inflows is routable iff `0 ≤ y ≤ c` and
//! `y(T) ≤ p(Γ(T))` for every buyer set `T`. Minimising `½‖c − y‖²` over that
//! region is solved with a primal active-set method in rationals, starting
//! from `y = 0` and using the lowest index to break ties (which rules out
//! cycling). Intended for at most six buyers, i.e. 63 set constraints.

use num_traits::{Signed, Zero};

use crate::balanced::SurplusVector;
use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::linalg;
use crate::rational::{self, Rational};

pub const MAX_BUYERS: usize = 6;

struct Constraint {
    coef: Vec<Rational>,
    rhs: Rational,
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn constraints(net: &FlowNetwork) -> Vec<Constraint> {
    let k = net.num_buyers();
    let one = Rational::from_integer(1.into());
    let mut out = Vec::new();
    for mask in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).collect();
        let goods = net.goods_of(&members);
        let rhs = rational::sum(goods.iter().map(|&g| &net.source_caps()[g]));
        let coef = (0..k).map(|b| if mask & (1 << b) != 0 { one.clone() } else { Rational::zero() }).collect();
        out.push(Constraint { coef, rhs });
    }
    for b in 0..k {
        let mut coef = vec![Rational::zero(); k];
        coef[b] = -one.clone();
        out.push(Constraint { coef, rhs: Rational::zero() });
        let mut coef = vec![Rational::zero(); k];
        coef[b] = one.clone();
        out.push(Constraint { coef, rhs: net.sink_caps()[b].clone() });
    }
    out
}

/// Projection of `g` onto the null space of the working rows, and the
/// multipliers `μ` with `g = d + A_Wᵀ μ`.
fn project(rows: &[&Constraint], g: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    if rows.is_empty() {
        return (g.to_vec(), Vec::new());
    }
    let gram: Vec<Vec<Rational>> = rows.iter().map(|a| rows.iter().map(|b| dot(&a.coef, &b.coef)).collect()).collect();
    let rhs: Vec<Rational> = rows.iter().map(|a| dot(&a.coef, g)).collect();
    let mu = linalg::solve(gram, rhs).expect("working rows stay independent");
    let mut d = g.to_vec();
    for (a, m) in rows.iter().zip(&mu) {
        for (dk, ak) in d.iter_mut().zip(&a.coef) {
            *dk -= ak * m;
        }
    }
    (d, mu)
}

pub fn oracle_balanced_surplus(net: &FlowNetwork) -> Result<SurplusVector> {
    let k = net.num_buyers();
    if k > MAX_BUYERS {
        return Err(Error::SizeGuard(format!("{k} buyers (limit {MAX_BUYERS})")));
    }
    let cons = constraints(net);
    let c = net.sink_caps().to_vec();
    let mut y = vec![Rational::zero(); k];
    let mut working: Vec<usize> = Vec::new();
    // each step either strictly improves or changes the working set; the
    // bound is generous
    for _ in 0..100_000 {
        let g: Vec<Rational> = c.iter().zip(&y).map(|(c, y)| c - y).collect();
        let rows: Vec<&Constraint> = working.iter().map(|&w| &cons[w]).collect();
        let (d, mu) = project(&rows, &g);
        if d.iter().all(Zero::is_zero) {
            match working.iter().zip(&mu).filter(|(_, m)| m.is_negative()).map(|(&w, _)| w).min() {
                None => return Ok(SurplusVector(g)),
                Some(drop) => working.retain(|&w| w != drop),
            }
            continue;
        }
        let mut step = Rational::from_integer(1.into());
        let mut blocking = None;
        for (idx, con) in cons.iter().enumerate() {
            if working.contains(&idx) {
                continue;
            }
            let ad = dot(&con.coef, &d);
            if !ad.is_positive() {
                continue;
            }
            let t = (&con.rhs - dot(&con.coef, &y)) / ad;
            if t < step || (t == step && blocking.is_none()) {
                step = t;
                blocking = Some(idx);
            }
        }
        for (yk, dk) in y.iter_mut().zip(&d) {
            *yk += &step * dk;
        }
        if let Some(b) = blocking {
            working.push(b);
            working.sort_unstable();
        }
    }
    Err(Error::Contract("active-set iteration did not converge".into()))
}
