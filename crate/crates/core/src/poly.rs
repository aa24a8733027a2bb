//! Sparse multivariate polynomials over arbitrary-precision integers and
//! polynomial interpretations of terms.
//!
//! Polynomials are always kept in canonical form: no zero coefficients and
//! no zero exponents are stored, so structural equality is polynomial
//! equality and every coefficient test is a single pass over the map.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::term::{Rule, Symbol, Term, Var};

/// Variable indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<usize, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(index: usize) -> Self {
        Monomial(BTreeMap::from([(index, 1)]))
    }

    pub fn from_exponents(exps: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut m = BTreeMap::new();
        for (i, e) in exps {
            if e > 0 {
                *m.entry(i).or_insert(0) += e;
            }
        }
        Monomial(m)
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(i)` if this monomial is exactly `X_i`.
    pub fn as_linear(&self) -> Option<usize> {
        match self.0.iter().next() {
            Some((&i, &1)) if self.0.len() == 1 => Some(i),
            _ => None,
        }
    }

    pub fn exponents(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|(&i, &e)| (i, e))
    }

    pub fn max_index(&self) -> usize {
        self.0.keys().next_back().copied().unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.0.clone();
        for (&i, &e) in &other.0 {
            *m.entry(i).or_insert(0) += e;
        }
        Monomial(m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, BigInt>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_terms([(c.into(), Monomial::one())])
    }

    pub fn var(index: usize) -> Self {
        Self::from_terms([(BigInt::one(), Monomial::var(index))])
    }

    /// Sums `coefficient * monomial` over the input, merging like terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (BigInt, Monomial)>) -> Self {
        let mut p = Polynomial::zero();
        for (c, m) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Largest variable index mentioned, 0 for constants.
    pub fn max_index(&self) -> usize {
        self.terms.keys().map(Monomial::max_index).max().unwrap_or(0)
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::constant(1);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitutes `args[i-1]` for `X_i` simultaneously. Indices beyond
    /// `args` are left untouched.
    pub fn compose(&self, args: &[Polynomial]) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut prod = Polynomial::constant(c.clone());
            for (i, e) in m.exponents() {
                let factor = match args.get(i.wrapping_sub(1)) {
                    Some(a) => a.pow(e),
                    None => Polynomial::from_terms([(BigInt::one(), Monomial::from_exponents([(i, e)]))]),
                };
                prod = &prod * &factor;
            }
            out = &out + &prod;
        }
        out
    }

    /// Evaluates under `alpha`, which maps 1-based indices to values.
    pub fn eval(&self, alpha: impl Fn(usize) -> BigInt) -> BigInt {
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, e) in m.exponents() {
                v *= num_traits::pow(alpha(i), e as usize);
            }
            total += v;
        }
        total
    }

    pub fn all_coefficients_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // Highest-degree terms first reads more naturally.
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_constant() {
                write!(f, "{abs}")?;
                continue;
            }
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            for (j, (i, e)) in m.exponents().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                write!(f, "X{i}")?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Sufficient criterion for strict monotonicity in each of `X_1..X_arity`
/// over the naturals: no negative coefficient and every `X_i` present
/// linearly with coefficient at least 1.
pub fn check_monotone_strict(p: &Polynomial, arity: usize) -> bool {
    p.all_coefficients_nonnegative() && (1..=arity).all(|i| p.coefficient(&Monomial::var(i)) >= BigInt::one())
}

pub fn check_monotone_weak(p: &Polynomial) -> bool {
    p.all_coefficients_nonnegative()
}

/// `p > q` for all natural valuations, decided by absolute positiveness of
/// `p - q - 1`. Sound, not complete.
pub fn check_gt(p: &Polynomial, q: &Polynomial) -> bool {
    (&(p - q) - &Polynomial::constant(1)).all_coefficients_nonnegative()
}

pub fn check_ge(p: &Polynomial, q: &Polynomial) -> bool {
    (p - q).all_coefficients_nonnegative()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpretError {
    #[error("no interpretation for symbol {0}")]
    UnassignedSymbol(Symbol),
    #[error("symbol {symbol} is interpreted with arity {declared} but used with {used} arguments")]
    ArityMismatch {
        symbol: Symbol,
        declared: usize,
        used: usize,
    },
    #[error("variable {0} has no index")]
    UnmappedVariable(Var),
    #[error("interpretation of {symbol} mentions X{index} but its arity is {arity}")]
    IndexOutOfRange { symbol: Symbol, index: usize, arity: usize },
    #[error("symbol {0} is interpreted twice")]
    DuplicateSymbol(Symbol),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PolyInterpretation {
    assign: BTreeMap<Symbol, (usize, Polynomial)>,
}

impl PolyInterpretation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, symbol: Symbol, arity: usize, poly: Polynomial) -> Result<(), InterpretError> {
        let index = poly.max_index();
        if index > arity {
            return Err(InterpretError::IndexOutOfRange { symbol, index, arity });
        }
        if self.assign.contains_key(&symbol) {
            return Err(InterpretError::DuplicateSymbol(symbol));
        }
        self.assign.insert(symbol, (arity, poly));
        Ok(())
    }

    pub fn get(&self, symbol: &Symbol) -> Option<(usize, &Polynomial)> {
        self.assign.get(symbol).map(|(n, p)| (*n, p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, usize, &Polynomial)> {
        self.assign.iter().map(|(s, (n, p))| (s, *n, p))
    }

    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }
}

/// `[[t]]` as a polynomial in the indices given by `varmap`.
pub fn interpret_term(
    phi: &PolyInterpretation,
    t: &Term,
    varmap: &BTreeMap<Var, usize>,
) -> Result<Polynomial, InterpretError> {
    match t {
        Term::Var(v) => varmap
            .get(v)
            .map(|&i| Polynomial::var(i))
            .ok_or_else(|| InterpretError::UnmappedVariable(v.clone())),
        Term::App(f, args) => {
            let (arity, poly) = phi.get(f).ok_or_else(|| InterpretError::UnassignedSymbol(f.clone()))?;
            if arity != args.len() {
                return Err(InterpretError::ArityMismatch {
                    symbol: f.clone(),
                    declared: arity,
                    used: args.len(),
                });
            }
            let args = args
                .iter()
                .map(|a| interpret_term(phi, a, varmap))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(poly.compose(&args))
        }
    }
}

/// Interprets both sides of a rule, numbering the lhs variables from 1 in
/// order of first occurrence.
pub fn interpret_rule(phi: &PolyInterpretation, rule: &Rule) -> Result<(Polynomial, Polynomial), InterpretError> {
    let mut varmap: BTreeMap<Var, usize> = BTreeMap::new();
    for v in rule.lhs.vars().into_iter().chain(rule.rhs.vars()) {
        let next = varmap.len() + 1;
        varmap.entry(v).or_insert(next);
    }
    Ok((
        interpret_term(phi, &rule.lhs, &varmap)?,
        interpret_term(phi, &rule.rhs, &varmap)?,
    ))
}
