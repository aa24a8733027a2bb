//! First-order terms, rules and rewrite systems.
//!
//! Symbols are taken from a single open vocabulary: a plain name, a marked
//! copy of another symbol, or a labeled symbol. Marking for dependency pairs
//! reuses [`Symbol::Sharp`], so no per-proof symbol table is ever built; only
//! the arity map grows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Name(String),
    Sharp(Box<Symbol>),
    /// A labeled symbol. The label is kept as an opaque canonical XML string.
    Labeled(Box<Symbol>, String),
}

impl Symbol {
    pub fn name(s: impl Into<String>) -> Self {
        Symbol::Name(s.into())
    }

    pub fn sharp(self) -> Self {
        Symbol::Sharp(Box::new(self))
    }

    /// Number of `Sharp` constructors wrapping the outermost layer.
    pub fn sharp_depth(&self) -> usize {
        match self {
            Symbol::Sharp(inner) => 1 + inner.sharp_depth(),
            _ => 0,
        }
    }

    pub fn is_sharp(&self) -> bool {
        matches!(self, Symbol::Sharp(_))
    }

    /// True if a `Labeled` constructor occurs anywhere inside this symbol.
    pub fn has_label(&self) -> bool {
        match self {
            Symbol::Name(_) => false,
            Symbol::Sharp(inner) => inner.has_label(),
            Symbol::Labeled(..) => true,
        }
    }

    pub fn contains_sharp(&self) -> bool {
        match self {
            Symbol::Name(_) => false,
            Symbol::Sharp(_) => true,
            Symbol::Labeled(inner, _) => inner.contains_sharp(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Name(n) => write!(f, "{n}"),
            Symbol::Sharp(inner) => write!(f, "{inner}#"),
            Symbol::Labeled(inner, label) => write!(f, "{inner}[{label}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(String);

impl Var {
    /// Panics on an empty identifier.
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "variable identifiers are nonempty");
        Var(name)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Symbol, Vec<Term>),
}

/// Child indices from the root, 0-based.
pub type Position = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("symbol {symbol} used with arities {first} and {second}")]
    ArityConflict {
        symbol: Symbol,
        first: usize,
        second: usize,
    },
    #[error("invalid position {0:?}")]
    InvalidPosition(Position),
    #[error("left-hand side of rule {0} is a variable")]
    VariableLhs(Rule),
    #[error("rule {rule} has variable {var} on the right but not on the left")]
    ExtraVariable { rule: Rule, var: Var },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(Var::new(name))
    }

    pub fn app(symbol: Symbol, args: Vec<Term>) -> Self {
        Term::App(symbol, args)
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::App(Symbol::name(name), Vec::new())
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Variables in left-to-right order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.collect_vars(&mut seen, &mut out);
        out
    }

    fn collect_vars(&self, seen: &mut BTreeSet<Var>, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(seen, out)),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut |f, _| {
            out.insert(f.clone());
        });
        out
    }

    /// Calls `visit(symbol, depth)` for every function symbol occurrence,
    /// with depth 0 at the root.
    pub fn visit_symbols(&self, visit: &mut impl FnMut(&Symbol, usize)) {
        fn go(t: &Term, depth: usize, visit: &mut impl FnMut(&Symbol, usize)) {
            if let Term::App(f, args) = t {
                visit(f, depth);
                for a in args {
                    go(a, depth + 1, visit);
                }
            }
        }
        go(self, 0, visit)
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::App(_, args) => args.get(i)?.subterm_at(rest),
                Term::Var(_) => None,
            },
        }
    }

    /// All positions in pre-order (root first).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, p)) = stack.pop() {
            if let Term::App(_, args) = t {
                for (i, a) in args.iter().enumerate().rev() {
                    let mut q = p.clone();
                    q.push(i);
                    stack.push((a, q));
                }
            }
            out.push(p);
        }
        out
    }

    /// All subterms in pre-order, the term itself first.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            if let Term::App(_, args) = t {
                stack.extend(args.iter().rev());
            }
        }
        out
    }

    pub fn has_subterm(&self, u: &Term) -> bool {
        self == u
            || match self {
                Term::App(_, args) => args.iter().any(|a| a.has_subterm(u)),
                Term::Var(_) => false,
            }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(sym, args) if args.is_empty() => write!(f, "{sym}"),
            Term::App(sym, args) => {
                write!(f, "{sym}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Replaces the subterm of `t` at `pos` by `u`.
pub fn replace_at(t: &Term, pos: &[usize], u: Term) -> Result<Term, TermError> {
    match pos.split_first() {
        None => Ok(u),
        Some((&i, rest)) => match t {
            Term::App(f, args) if i < args.len() => {
                let mut args = args.clone();
                args[i] = replace_at(&args[i], rest, u).map_err(|_| TermError::InvalidPosition(pos.to_vec()))?;
                Ok(Term::App(f.clone(), args))
            }
            _ => Err(TermError::InvalidPosition(pos.to_vec())),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// Builds a rule without checking the usual side conditions. Use
    /// [`Rule::checked`] for rules that come from untrusted input.
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Rule { lhs, rhs }
    }

    pub fn checked(lhs: Term, rhs: Term) -> Result<Self, TermError> {
        let rule = Rule { lhs, rhs };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<(), TermError> {
        if self.lhs.is_var() {
            return Err(TermError::VariableLhs(self.clone()));
        }
        let lhs_vars: BTreeSet<Var> = self.lhs.vars().into_iter().collect();
        if let Some(var) = self.rhs.vars().into_iter().find(|v| !lhs_vars.contains(v)) {
            return Err(TermError::ExtraVariable {
                rule: self.clone(),
                var,
            });
        }
        Ok(())
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.lhs.symbols();
        s.extend(self.rhs.symbols());
        s
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

pub type Arity = BTreeMap<Symbol, usize>;

fn record_arity(arity: &mut Arity, t: &Term) -> Result<(), TermError> {
    match t {
        Term::Var(_) => Ok(()),
        Term::App(f, args) => {
            match arity.get(f) {
                Some(&n) if n != args.len() => {
                    return Err(TermError::ArityConflict {
                        symbol: f.clone(),
                        first: n,
                        second: args.len(),
                    })
                }
                Some(_) => {}
                None => {
                    arity.insert(f.clone(), args.len());
                }
            }
            args.iter().try_for_each(|a| record_arity(arity, a))
        }
    }
}

/// Infers the arity of every symbol occurring in `rules`.
pub fn infer_signature<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> Result<Arity, TermError> {
    let mut arity = Arity::new();
    for r in rules {
        record_arity(&mut arity, &r.lhs)?;
        record_arity(&mut arity, &r.rhs)?;
    }
    Ok(arity)
}

/// A term rewrite system with its inferred signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trs {
    rules: Vec<Rule>,
    arity: Arity,
}

impl Trs {
    pub fn new(rules: Vec<Rule>) -> Result<Self, TermError> {
        for r in &rules {
            r.validate()?;
        }
        let arity = infer_signature(&rules)?;
        Ok(Trs { rules, arity })
    }

    pub fn empty() -> Self {
        Trs {
            rules: Vec::new(),
            arity: Arity::new(),
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn arity(&self) -> &Arity {
        &self.arity
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.arity.keys()
    }
}

pub type Substitution = BTreeMap<Var, Term>;

pub fn apply_subst(s: &Substitution, t: &Term) -> Term {
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| apply_subst(s, a)).collect()),
    }
}

/// The substitution that applies `first` and then `second`.
pub fn compose(first: &Substitution, second: &Substitution) -> Substitution {
    let mut out: Substitution = first.iter().map(|(v, t)| (v.clone(), apply_subst(second, t))).collect();
    for (v, t) in second {
        out.entry(v.clone()).or_insert_with(|| t.clone());
    }
    out.retain(|v, t| !matches!(t, Term::Var(w) if w == v));
    out
}

/// Syntactic matching: the minimal `s` with `apply_subst(s, pattern) == subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut s = Substitution::new();
    let mut work = vec![(pattern, subject)];
    while let Some((p, t)) = work.pop() {
        match p {
            Term::Var(v) => match s.get(v) {
                Some(bound) if bound != t => return None,
                Some(_) => {}
                None => {
                    s.insert(v.clone(), t.clone());
                }
            },
            Term::App(f, ps) => match t {
                Term::App(g, ts) if f == g && ps.len() == ts.len() => {
                    work.extend(ps.iter().zip(ts));
                }
                _ => return None,
            },
        }
    }
    Some(s)
}

fn occurs(v: &Var, t: &Term) -> bool {
    match t {
        Term::Var(w) => v == w,
        Term::App(_, args) => args.iter().any(|a| occurs(v, a)),
    }
}

/// Robinson unification with occurs check. The result is idempotent.
pub fn unify(t: &Term, u: &Term) -> Option<Substitution> {
    // Solved form kept fully applied: no bound variable occurs in any range term.
    let mut s = Substitution::new();
    let mut work = vec![(t.clone(), u.clone())];
    while let Some((a, b)) = work.pop() {
        let a = apply_subst(&s, &a);
        let b = apply_subst(&s, &b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if occurs(&x, &other) {
                    return None;
                }
                let single = Substitution::from([(x.clone(), other.clone())]);
                for range in s.values_mut() {
                    *range = apply_subst(&single, range);
                }
                s.insert(x, other);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                work.extend(fa.into_iter().zip(ga));
            }
        }
    }
    Some(s)
}

/// All one-step reducts of `t` under `trs`, at any position and by any rule.
pub fn rewrite_step(trs: &Trs, t: &Term) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for pos in t.positions() {
        let Some(sub) = t.subterm_at(&pos) else { continue };
        if sub.is_var() {
            continue;
        }
        for rule in trs.rules() {
            if let Some(s) = match_term(&rule.lhs, sub) {
                let reduct = apply_subst(&s, &rule.rhs);
                if let Ok(u) = replace_at(t, &pos, reduct) {
                    out.insert(u);
                }
            }
        }
    }
    out
}
