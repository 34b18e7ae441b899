//! Canonical multivariate polynomials with integer coefficients.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::term::{Head, Sort, Symbol, Term, TheoryOp, Type, Var};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("`{0}` is not a polynomial expression")]
    NonPolynomial(String),
    #[error("coefficient overflow")]
    Overflow,
}

/// A product of variables with positive exponents, sorted by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<(Arc<str>, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(name: Arc<str>) -> Self {
        Monomial(alloc::vec![(name, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn factors(&self) -> &[(Arc<str>, u32)] {
        &self.0
    }

    pub fn is_square(&self) -> bool {
        self.0.iter().all(|(_, e)| e % 2 == 0)
    }

    /// The variable if this monomial is linear.
    pub fn as_var(&self) -> Option<&Arc<str>> {
        match self.0.as_slice() {
            [(v, 1)] => Some(v),
            _ => None,
        }
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut m: BTreeMap<Arc<str>, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *m.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(m.into_iter().collect())
    }

    fn eval(&self, env: &dyn Fn(&str) -> Option<i128>) -> Option<i128> {
        let mut acc: i128 = 1;
        for (v, e) in &self.0 {
            let x = env(v)?;
            for _ in 0..*e {
                acc = acc.checked_mul(x)?;
            }
        }
        Some(acc)
    }
}

/// Sum of monomials with non-zero coefficients. Two polynomial expressions
/// denote the same function on ℤ iff their normal forms are equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly(BTreeMap<Monomial, i128>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: i128) -> Self {
        let mut p = Poly::zero();
        if c != 0 {
            p.0.insert(Monomial::one(), c);
        }
        p
    }

    pub fn var(name: Arc<str>) -> Self {
        let mut p = Poly::zero();
        p.0.insert(Monomial::var(name), 1);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, i128)> {
        self.0.iter().map(|(m, c)| (m, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn constant_part(&self) -> i128 {
        self.0.get(&Monomial::one()).copied().unwrap_or(0)
    }

    pub fn as_constant(&self) -> Option<i128> {
        match self.0.len() {
            0 => Some(0),
            1 => self.0.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    fn add_term(&mut self, m: Monomial, c: i128) -> Result<(), PolyError> {
        if c == 0 {
            return Ok(());
        }
        let entry = self.0.entry(m.clone()).or_insert(0);
        *entry = entry.checked_add(c).ok_or(PolyError::Overflow)?;
        if *entry == 0 {
            self.0.remove(&m);
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: i128) -> Result<Poly, PolyError> {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            out.add_term(m.clone(), c.checked_mul(k).ok_or(PolyError::Overflow)?)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.scale(-1)?)
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.add_term(m1.mul(m2), c1.checked_mul(*c2).ok_or(PolyError::Overflow)?)?;
            }
        }
        Ok(out)
    }

    /// Normal form of an integer theory term over `+ - *`, literals and variables.
    pub fn from_term(t: &Term) -> Result<Poly, PolyError> {
        let bad = || PolyError::NonPolynomial(alloc::format!("{t}"));
        if *t.ty() != Type::INT {
            return Err(bad());
        }
        match t.head() {
            Head::Var(v) if t.args().is_empty() && v.ty.base_sort() == Some(&Sort::Int) => Ok(Poly::var(v.name.clone())),
            Head::Sym(Symbol::Theory(op)) => {
                let args = t.args();
                match (op, args.len()) {
                    (TheoryOp::Int(n), 0) => Ok(Poly::constant(*n)),
                    (TheoryOp::Add, 2) => Poly::from_term(&args[0])?.add(&Poly::from_term(&args[1])?),
                    (TheoryOp::Sub, 2) => Poly::from_term(&args[0])?.sub(&Poly::from_term(&args[1])?),
                    (TheoryOp::Mul, 2) => Poly::from_term(&args[0])?.mul(&Poly::from_term(&args[1])?),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> Option<i128>) -> Option<i128> {
        let mut acc: i128 = 0;
        for (m, c) in &self.0 {
            acc = acc.checked_add(c.checked_mul(m.eval(env)?)?)?;
        }
        Some(acc)
    }

    /// Replaces the variables bound in `env` by their values.
    pub fn substitute(&self, env: &BTreeMap<Arc<str>, i128>) -> Result<Poly, PolyError> {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let mut k = *c;
            let mut rest = Vec::new();
            for (v, e) in &m.0 {
                match env.get(v) {
                    Some(x) => {
                        for _ in 0..*e {
                            k = k.checked_mul(*x).ok_or(PolyError::Overflow)?;
                        }
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial(rest), k)?;
        }
        Ok(out)
    }

    /// A canonical term denoting this polynomial (monomials in normal-form order).
    pub fn to_term(&self) -> Term {
        use crate::theory::{add, mul, sub};
        let mut acc: Option<Term> = None;
        for (m, c) in &self.0 {
            let mut factors: Vec<Term> = Vec::new();
            for (v, e) in &m.0 {
                for _ in 0..*e {
                    factors.push(Term::var(Var {
                        name: v.clone(),
                        ty: Type::INT,
                    }));
                }
            }
            let magnitude = c.unsigned_abs() as i128;
            let body = match factors.split_first() {
                None => Term::int(magnitude),
                Some((first, rest)) => {
                    let prod = rest.iter().fold(first.clone(), |a, b| mul(a, b.clone()));
                    if magnitude == 1 {
                        prod
                    } else {
                        mul(Term::int(magnitude), prod)
                    }
                }
            };
            acc = Some(match acc {
                None if *c < 0 => sub(Term::int(0), body),
                None => body,
                Some(a) if *c < 0 => sub(a, body),
                Some(a) => add(a, body),
            });
        }
        acc.unwrap_or_else(|| Term::int(0))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        // Highest degree first reads more naturally.
        let mut items: Vec<(&Monomial, &i128)> = self.0.iter().collect();
        items.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then(a.0.cmp(b.0)));
        for (i, (m, c)) in items.into_iter().enumerate() {
            let c = *c;
            if i == 0 {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0 { " - " } else { " + " })?;
            }
            let mag = c.unsigned_abs();
            if m.0.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag != 1 {
                write!(f, "{mag}*")?;
            }
            for (j, (v, e)) in m.0.iter().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                if *e == 1 {
                    write!(f, "{v}")?;
                } else {
                    write!(f, "{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}
