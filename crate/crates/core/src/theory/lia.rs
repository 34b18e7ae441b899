//! Conjunctions of linear integer constraints: equality elimination followed
//! by Fourier–Motzkin with integer tightening.
//!
//! `Unsat` is always sound. `Sat` carries a model which the caller re-checks.
//! When the real shadow is feasible but back-substitution cannot find an
//! integer point, the answer is `Unknown`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

/// `Σ coeffs[x]·x + constant`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Lin {
    pub coeffs: BTreeMap<usize, i128>,
    pub constant: i128,
}

#[derive(Debug, PartialEq, Eq)]
pub enum LiaResult {
    Sat(BTreeMap<usize, i128>),
    Unsat,
    Unknown,
}

/// Upper bound on the number of constraints produced by elimination.
const MAX_CONSTRAINTS: usize = 4000;

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Lin {
    fn coeff(&self, x: usize) -> i128 {
        self.coeffs.get(&x).copied().unwrap_or(0)
    }

    fn scaled_add(&self, k: i128, other: &Lin, m: i128) -> Option<Lin> {
        let mut out = Lin {
            coeffs: BTreeMap::new(),
            constant: self.constant.checked_mul(k)?.checked_add(other.constant.checked_mul(m)?)?,
        };
        for (&x, &c) in &self.coeffs {
            out.coeffs.insert(x, c.checked_mul(k)?);
        }
        for (&x, &c) in &other.coeffs {
            let e = out.coeffs.entry(x).or_insert(0);
            *e = e.checked_add(c.checked_mul(m)?)?;
        }
        out.coeffs.retain(|_, c| *c != 0);
        Some(out)
    }

    /// Replace `x` by `def` (which must not mention `x`).
    fn substitute(&self, x: usize, def: &Lin) -> Option<Lin> {
        let c = self.coeff(x);
        if c == 0 {
            return Some(self.clone());
        }
        let mut without = self.clone();
        without.coeffs.remove(&x);
        without.scaled_add(1, def, c)
    }

    fn eval(&self, model: &BTreeMap<usize, i128>) -> Option<i128> {
        let mut acc = self.constant;
        for (x, c) in &self.coeffs {
            acc = acc.checked_add(c.checked_mul(model.get(x).copied().unwrap_or(0))?)?;
        }
        Some(acc)
    }

    /// Divide by the coefficient gcd, rounding the constant down (sound for `≥ 0`).
    fn tighten(mut self) -> Lin {
        let g = self.coeffs.values().fold(0, |g, c| gcd(g, *c));
        if g > 1 {
            for c in self.coeffs.values_mut() {
                *c /= g;
            }
            self.constant = self.constant.div_euclid(g);
        }
        self
    }
}

enum Stage {
    /// `x = def`, applied after later stages are solved.
    Defined(usize, Lin),
    /// `x` eliminated by Fourier–Motzkin between these bounds.
    Bounded(usize, Vec<Lin>),
}

/// Decide `∧ ineqs ≥ 0 ∧ ∧ eqs = 0` over the integers.
pub fn solve(ineqs: Vec<Lin>, eqs: Vec<Lin>) -> LiaResult {
    match solve_inner(ineqs, eqs) {
        Some(r) => r,
        None => LiaResult::Unknown,
    }
}

fn solve_inner(mut ineqs: Vec<Lin>, mut eqs: Vec<Lin>) -> Option<LiaResult> {
    let mut stages: Vec<Stage> = Vec::new();

    // Equalities: pivot on a unit coefficient when possible.
    while let Some(eq) = eqs.pop() {
        if eq.coeffs.is_empty() {
            if eq.constant != 0 {
                return Some(LiaResult::Unsat);
            }
            continue;
        }
        let g = eq.coeffs.values().fold(0, |g, c| gcd(g, *c));
        if eq.constant % g != 0 {
            return Some(LiaResult::Unsat);
        }
        let pivot = eq.coeffs.iter().find(|(_, c)| c.abs() == 1).map(|(x, c)| (*x, *c));
        match pivot {
            Some((x, c)) => {
                // c·x + rest = 0  ⇒  x = -c·rest (c = ±1)
                let mut rest = eq.clone();
                rest.coeffs.remove(&x);
                let def = rest.scaled_add(-c, &Lin::default(), 0)?;
                for e in eqs.iter_mut() {
                    *e = e.substitute(x, &def)?;
                }
                for i in ineqs.iter_mut() {
                    *i = i.substitute(x, &def)?;
                }
                stages.push(Stage::Defined(x, def));
            }
            None => {
                ineqs.push(eq.clone());
                ineqs.push(eq.scaled_add(-1, &Lin::default(), 0)?);
            }
        }
    }

    let mut current: BTreeSet<Lin> = BTreeSet::new();
    for i in ineqs {
        let i = i.tighten();
        if i.coeffs.is_empty() {
            if i.constant < 0 {
                return Some(LiaResult::Unsat);
            }
        } else {
            current.insert(i);
        }
    }

    loop {
        let vars: BTreeSet<usize> = current.iter().flat_map(|l| l.coeffs.keys().copied()).collect();
        // Eliminate the variable producing the fewest new constraints.
        let Some(x) = vars.iter().copied().min_by_key(|&x| {
            let lo = current.iter().filter(|l| l.coeff(x) > 0).count();
            let hi = current.iter().filter(|l| l.coeff(x) < 0).count();
            lo * hi
        }) else {
            break;
        };
        let (with, without): (Vec<Lin>, Vec<Lin>) = current.into_iter().partition(|l| l.coeff(x) != 0);
        let mut next: BTreeSet<Lin> = without.into_iter().collect();
        for lo in with.iter().filter(|l| l.coeff(x) > 0) {
            for hi in with.iter().filter(|l| l.coeff(x) < 0) {
                let a = lo.coeff(x);
                let b = -hi.coeff(x);
                let combined = lo.scaled_add(b, hi, a)?.tighten();
                if combined.coeffs.is_empty() {
                    if combined.constant < 0 {
                        return Some(LiaResult::Unsat);
                    }
                } else {
                    next.insert(combined);
                }
                if next.len() > MAX_CONSTRAINTS {
                    return None;
                }
            }
        }
        stages.push(Stage::Bounded(x, with));
        current = next;
    }

    let mut model: BTreeMap<usize, i128> = BTreeMap::new();
    for stage in stages.iter().rev() {
        match stage {
            Stage::Bounded(x, bounds) => {
                let mut lo: Option<i128> = None;
                let mut hi: Option<i128> = None;
                for l in bounds {
                    let a = l.coeff(*x);
                    let mut rest = l.clone();
                    rest.coeffs.remove(x);
                    let r = rest.eval(&model)?;
                    if a > 0 {
                        // a·x + r ≥ 0  ⇒  x ≥ ceil(-r / a)
                        let v = -r.div_euclid(a);
                        lo = Some(lo.map_or(v, |w: i128| w.max(v)));
                    } else {
                        // -b·x + r ≥ 0  ⇒  x ≤ floor(r / b)
                        let v = r.div_euclid(-a);
                        hi = Some(hi.map_or(v, |w: i128| w.min(v)));
                    }
                }
                let v = match (lo, hi) {
                    (Some(l), Some(h)) if l > h => return None,
                    (Some(l), Some(h)) => 0.clamp(l, h),
                    (Some(l), None) => l.max(0),
                    (None, Some(h)) => h.min(0),
                    (None, None) => 0,
                };
                model.insert(*x, v);
            }
            Stage::Defined(x, def) => {
                let v = def.eval(&model)?;
                model.insert(*x, v);
            }
        }
    }
    Some(LiaResult::Sat(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(coeffs: &[(usize, i128)], c: i128) -> Lin {
        Lin {
            coeffs: coeffs.iter().copied().filter(|(_, c)| *c != 0).collect(),
            constant: c,
        }
    }

    #[test]
    fn tightening_closes_integer_gaps() {
        // 2x ≥ 1 and 2x ≤ 1 has a real solution but no integer one.
        let r = solve(alloc::vec![lin(&[(0, 2)], -1), lin(&[(0, -2)], 1)], alloc::vec![]);
        assert_eq!(r, LiaResult::Unsat);
    }

    #[test]
    fn equality_gcd_test() {
        let r = solve(alloc::vec![], alloc::vec![lin(&[(0, 2), (1, 4)], 1)]);
        assert_eq!(r, LiaResult::Unsat);
    }

    #[test]
    fn chain_model_satisfies_constraints() {
        // x ≥ 3, y ≥ x + 2, y ≤ 10
        let cs = alloc::vec![lin(&[(0, 1)], -3), lin(&[(1, 1), (0, -1)], -2), lin(&[(1, -1)], 10)];
        match solve(cs.clone(), alloc::vec![]) {
            LiaResult::Sat(m) => {
                for c in &cs {
                    assert!(c.eval(&m).unwrap() >= 0);
                }
            }
            other => panic!("{other:?}"),
        }
    }
}
