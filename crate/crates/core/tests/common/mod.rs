//! Shared fixtures, independent oracles, random generators and the
//! certificate mutation engine used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use cpf_verify::cpf::{parse_cpf, Certificate, Component, DpProof, Proof};
use cpf_verify::poly::{Monomial, PolyInterpretation, Polynomial};
use cpf_verify::term::{Rule, Symbol, Term, Trs, Var};
use cpf_verify::xsd::{TypeGroup, TypeIr};
use num_bigint::BigInt;
use rand::Rng;

pub const CERTIFIED: [&str; 5] = [
    "add_polyint.cpf",
    "add_dp.cpf",
    "add_two_step.cpf",
    "quot_dp.cpf",
    "quot_nested.cpf",
];

pub const ALL_FIXTURES: [&str; 8] = [
    "add_polyint.cpf",
    "add_dp.cpf",
    "add_two_step.cpf",
    "quot_dp.cpf",
    "quot_nested.cpf",
    "add_badpoly.cpf",
    "ab_unsound.cpf",
    "labeled.cpf",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> Certificate {
    parse_cpf(&fixture_bytes(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn sym(name: &str) -> Symbol {
    Symbol::name(name)
}

/// Reads `f(g(x),a)` style terms; `x`, `y`, `z`, `u`, `v`, `w` are variables,
/// a trailing `#` marks a symbol.
pub fn t(s: &str) -> Term {
    fn go(s: &[u8], i: &mut usize) -> Term {
        let start = *i;
        while *i < s.len() && !b"(),".contains(&s[*i]) {
            *i += 1;
        }
        let name = std::str::from_utf8(&s[start..*i]).unwrap().trim().to_string();
        if *i < s.len() && s[*i] == b'(' {
            *i += 1;
            let mut args = Vec::new();
            loop {
                args.push(go(s, i));
                let c = s[*i];
                *i += 1;
                if c == b')' {
                    break;
                }
            }
            Term::app(symbol_of(&name), args)
        } else if ["x", "y", "z", "u", "v", "w"].contains(&name.as_str()) {
            Term::var(name)
        } else {
            Term::app(symbol_of(&name), Vec::new())
        }
    }
    fn symbol_of(name: &str) -> Symbol {
        match name.strip_suffix('#') {
            Some(base) => Symbol::name(base).sharp(),
            None => Symbol::name(name),
        }
    }
    let mut i = 0;
    go(s.as_bytes(), &mut i)
}

pub fn rule(s: &str) -> Rule {
    let (l, r) = s.split_once("->").unwrap();
    Rule::new(t(l.trim()), t(r.trim()))
}

// ---------------------------------------------------------------- oracles

fn oracle_match(pattern: &Term, subject: &Term, binding: &mut Vec<(Var, Term)>) -> bool {
    match pattern {
        Term::Var(v) => match binding.iter().find(|(w, _)| w == v) {
            Some((_, bound)) => bound == subject,
            None => {
                binding.push((v.clone(), subject.clone()));
                true
            }
        },
        Term::App(f, ps) => match subject {
            Term::App(g, ss) if f == g && ps.len() == ss.len() => {
                ps.iter().zip(ss).all(|(p, s)| oracle_match(p, s, binding))
            }
            _ => false,
        },
    }
}

fn oracle_subst(t: &Term, binding: &[(Var, Term)]) -> Term {
    match t {
        Term::Var(v) => binding
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, u)| u.clone())
            .unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::app(f.clone(), args.iter().map(|a| oracle_subst(a, binding)).collect()),
    }
}

/// All one-step reducts, by scanning every node for every rule.
pub fn oracle_rewrite_step(rules: &[Rule], term: &Term) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for r in rules {
        let mut binding = Vec::new();
        if oracle_match(&r.lhs, term, &mut binding) {
            out.insert(oracle_subst(&r.rhs, &binding));
        }
    }
    if let Term::App(f, args) = term {
        for (i, a) in args.iter().enumerate() {
            for reduct in oracle_rewrite_step(rules, a) {
                let mut new_args = args.clone();
                new_args[i] = reduct;
                out.insert(Term::app(f.clone(), new_args));
            }
        }
    }
    out
}

/// Components as sets of mutually reachable nodes, with a flag for
/// trivial components (a single node without a self-loop).
pub fn oracle_sccs(n: usize, edges: &BTreeSet<(usize, usize)>) -> BTreeSet<(BTreeSet<usize>, bool)> {
    let mut reach = vec![vec![false; n]; n];
    for &(u, v) in edges {
        reach[u][v] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            let class: BTreeSet<usize> = (0..n).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
            let trivial = class.len() == 1 && !edges.contains(&(i, i));
            (class, trivial)
        })
        .collect()
}

/// Evaluates a polynomial from its coefficient list; `vals[i - 1]` is X_i.
pub fn raw_eval(p: &Polynomial, vals: &[BigInt]) -> BigInt {
    let mut total = BigInt::from(0);
    for (m, c) in p.terms() {
        let mut term = c.clone();
        for (i, e) in m.exponents() {
            for _ in 0..e {
                term *= &vals[i - 1];
            }
        }
        total += term;
    }
    total
}

/// The value of a term under an interpretation and a variable valuation,
/// computed bottom-up on numbers.
pub fn direct_interpret(phi: &PolyInterpretation, term: &Term, alpha: &BTreeMap<Var, BigInt>) -> BigInt {
    match term {
        Term::Var(v) => alpha[v].clone(),
        Term::App(f, args) => {
            let vals: Vec<BigInt> = args.iter().map(|a| direct_interpret(phi, a, alpha)).collect();
            let (_, p) = phi.get(f).expect("interpreted symbol");
            raw_eval(p, &vals)
        }
    }
}

// ---------------------------------------------------------------- generators

pub const SIG: [(&str, usize); 5] = [("f", 2), ("g", 1), ("h", 3), ("a", 0), ("b", 0)];
pub const VARS: [&str; 3] = ["x", "y", "z"];

pub fn random_term<R: Rng>(rng: &mut R, sig: &[(&str, usize)], vars: &[&str], depth: usize) -> Term {
    let constants: Vec<_> = sig.iter().filter(|(_, a)| *a == 0).collect();
    if depth == 0 || rng.gen_bool(0.25) {
        if !vars.is_empty() && (constants.is_empty() || rng.gen_bool(0.5)) {
            return Term::var(vars[rng.gen_range(0..vars.len())]);
        }
        let (c, _) = constants[rng.gen_range(0..constants.len())];
        return Term::constant(*c);
    }
    let (f, n) = sig[rng.gen_range(0..sig.len())];
    Term::app(sym(f), (0..n).map(|_| random_term(rng, sig, vars, depth - 1)).collect())
}

pub fn random_ground_term<R: Rng>(rng: &mut R, sig: &[(&str, usize)], depth: usize) -> Term {
    random_term(rng, sig, &[], depth)
}

/// A random rule whose lhs is not a variable and whose rhs only uses lhs
/// variables.
pub fn random_rule<R: Rng>(rng: &mut R, sig: &[(&str, usize)], depth: usize) -> Rule {
    let funs: Vec<_> = sig.iter().filter(|(_, a)| *a > 0).collect();
    loop {
        let (f, n) = funs[rng.gen_range(0..funs.len())];
        let lhs = Term::app(
            sym(f),
            (0..*n).map(|_| random_term(rng, sig, &VARS, depth - 1)).collect(),
        );
        let names: Vec<String> = lhs.vars().iter().map(|v| v.as_str().to_string()).collect();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let rhs = random_term(rng, sig, &names, depth);
        if rhs.vars().iter().all(|v| names.contains(&v.as_str())) {
            return Rule::new(lhs, rhs);
        }
    }
}

/// A random term in which, with probability one half, a random position
/// holds an instance of some rule's left side.
pub fn random_term_for<R: Rng>(rng: &mut R, trs: &Trs, sig: &[(&str, usize)], depth: usize) -> Term {
    let t = random_term(rng, sig, &VARS, depth);
    if trs.rules().is_empty() || rng.gen_bool(0.5) {
        return t;
    }
    let r = &trs.rules()[rng.gen_range(0..trs.rules().len())];
    let sigma: cpf_verify::term::Substitution = r
        .lhs
        .vars()
        .into_iter()
        .map(|v| (v, random_term(rng, sig, &VARS, 2)))
        .collect();
    let positions = t.positions();
    let pos = &positions[rng.gen_range(0..positions.len())];
    cpf_verify::term::replace_at(&t, pos, cpf_verify::term::apply_subst(&sigma, &r.lhs)).unwrap()
}

pub fn random_trs<R: Rng>(rng: &mut R, sig: &[(&str, usize)], max_rules: usize, depth: usize) -> Trs {
    let n = rng.gen_range(1..=max_rules);
    Trs::new((0..n).map(|_| random_rule(rng, sig, depth)).collect()).expect("consistent signature")
}

/// Up to `max_terms` monomials over `X1..=nvars`, exponents below 3.
pub fn random_poly<R: Rng>(
    rng: &mut R,
    nvars: usize,
    max_terms: usize,
    coef: std::ops::RangeInclusive<i64>,
) -> Polynomial {
    let k = rng.gen_range(0..=max_terms);
    Polynomial::from_terms((0..k).map(|_| {
        let exps: Vec<(usize, u32)> = (1..=nvars).map(|i| (i, rng.gen_range(0..3))).collect();
        (
            BigInt::from(rng.gen_range(coef.clone())),
            Monomial::from_exponents(exps),
        )
    }))
}

pub fn random_digraph<R: Rng>(rng: &mut R, max_n: usize) -> (usize, BTreeSet<(usize, usize)>) {
    let n = rng.gen_range(0..=max_n);
    let density: f64 = rng.gen_range(0.0..0.5);
    let mut edges = BTreeSet::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) {
                edges.insert((u, v));
            }
        }
    }
    (n, edges)
}

/// A schema with `n` groups, each a sequence or choice of group refs,
/// inline elements and nested models, with random occurrence bounds.
pub fn random_schema<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..=8);
    let mut out = String::from("<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">\n");
    for g in 0..n {
        out.push_str(&format!("<xs:group name=\"T{g}\">"));
        random_model(rng, n, 2, &mut out);
        out.push_str("</xs:group>\n");
    }
    out.push_str("</xs:schema>\n");
    out
}

fn random_model<R: Rng>(rng: &mut R, n: usize, depth: usize, out: &mut String) {
    let choice = rng.gen_bool(0.4);
    let tag = if choice { "xs:choice" } else { "xs:sequence" };
    out.push_str(&format!("<{tag}>"));
    let k = rng.gen_range(if choice { 1..=3 } else { 0..=3 });
    for i in 0..k {
        let occurs = if choice {
            ""
        } else {
            [
                "",
                "",
                " minOccurs=\"0\"",
                " maxOccurs=\"unbounded\"",
                " minOccurs=\"0\" maxOccurs=\"3\"",
            ][rng.gen_range(0..5)]
        };
        match rng.gen_range(0..6) {
            0..=2 => out.push_str(&format!("<xs:group ref=\"T{}\"{occurs}/>", rng.gen_range(0..n))),
            3 => out.push_str(&format!("<xs:element name=\"e{i}\" type=\"xs:string\"{occurs}/>")),
            4 if depth > 0 => {
                out.push_str(&format!("<xs:element name=\"c{i}\"{occurs}><xs:complexType>"));
                random_model(rng, n, depth - 1, out);
                out.push_str("</xs:complexType></xs:element>");
            }
            _ if depth > 0 && occurs.is_empty() => random_model(rng, n, depth - 1, out),
            _ => out.push_str(&format!("<xs:element name=\"s{i}\"{occurs}/>")),
        }
    }
    out.push_str(&format!("</{tag}>"));
}

/// Checks that every definition only refers to its own group or earlier
/// groups, that each definition is in exactly one group, and that groups
/// are exactly the mutually recursive classes.
pub fn check_type_order(ir: &TypeIr, order: &[TypeGroup]) -> Result<(), String> {
    let mut group_of = BTreeMap::new();
    for (k, g) in order.iter().enumerate() {
        for name in &g.names {
            if group_of.insert(name.clone(), k).is_some() {
                return Err(format!("{name} is in two groups"));
            }
        }
    }
    if group_of.len() != ir.defs.len() {
        return Err(format!("{} definitions, {} placed", ir.defs.len(), group_of.len()));
    }
    let index: BTreeMap<&str, usize> = ir.defs.iter().enumerate().map(|(i, d)| (d.name.as_str(), i)).collect();
    let mut edges = BTreeSet::new();
    for (ti, def) in ir.defs.iter().enumerate() {
        for r in def.refs() {
            let (u, tt) = (group_of[&r], group_of[&def.name]);
            if u > tt {
                return Err(format!("{} refers to {r}, which comes later", def.name));
            }
            edges.insert((index[r.as_str()], ti));
        }
    }
    let classes = oracle_sccs(ir.defs.len(), &edges);
    for g in order {
        let members: BTreeSet<usize> = g.names.iter().map(|n| index[n.as_str()]).collect();
        match classes.iter().find(|(c, _)| *c == members) {
            Some((_, trivial)) if *trivial == g.recursive => {
                return Err(format!("group {:?} has the wrong recursive flag", g.names));
            }
            Some(_) => {}
            None => return Err(format!("group {:?} is not a recursive class", g.names)),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- mutations

fn rebuild(
    phi: &PolyInterpretation,
    skip: Option<&Symbol>,
    replace: Option<(&Symbol, Polynomial)>,
) -> PolyInterpretation {
    let mut out = PolyInterpretation::new();
    for (s, a, p) in phi.iter() {
        if Some(s) == skip {
            continue;
        }
        let p = match &replace {
            Some((r, q)) if *r == s => q.clone(),
            _ => p.clone(),
        };
        out.insert(s.clone(), a, p).unwrap();
    }
    out
}

/// Single-point corruptions of an interpretation: each nonzero coefficient
/// negated, each entry for a symbol of `used` removed and, when `strict`,
/// each linear term dropped.
fn interp_mutants(phi: &PolyInterpretation, strict: bool, used: &[Rule]) -> Vec<(String, PolyInterpretation)> {
    let used: BTreeSet<Symbol> = used.iter().flat_map(Rule::symbols).collect();
    let mut out = Vec::new();
    for (s, _, p) in phi.iter() {
        let terms: Vec<(Monomial, BigInt)> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        for (k, (m, _)) in terms.iter().enumerate() {
            let flipped = Polynomial::from_terms(
                terms
                    .iter()
                    .enumerate()
                    .map(|(j, (mm, c))| (if j == k { -c.clone() } else { c.clone() }, mm.clone())),
            );
            out.push((
                format!("negate coefficient of {m:?} in [{s}]"),
                rebuild(phi, None, Some((s, flipped))),
            ));
            if strict && m.as_linear().is_some() {
                let dropped = Polynomial::from_terms(
                    terms
                        .iter()
                        .filter(|(mm, _)| mm != m)
                        .map(|(mm, c)| (c.clone(), mm.clone())),
                );
                out.push((format!("drop {m:?} from [{s}]"), rebuild(phi, None, Some((s, dropped)))));
            }
        }
        if used.contains(s) {
            out.push((format!("remove [{s}]"), rebuild(phi, Some(s), None)));
        }
    }
    out
}

fn alien_rule(rules: &[Rule]) -> Rule {
    let base = rules
        .first()
        .map(|r| r.lhs.clone())
        .unwrap_or_else(|| Term::constant("a"));
    Rule::new(base.clone(), base)
}

fn proof_mutants(p: &Proof, rules: &[Rule]) -> Vec<(String, Proof)> {
    let mut out = Vec::new();
    match p {
        Proof::REmpty => {}
        Proof::RuleRemoval { interp, remaining, sub } => {
            let mk = |interp: PolyInterpretation, remaining: Vec<Rule>, sub: Proof| Proof::RuleRemoval {
                interp,
                remaining,
                sub: Box::new(sub),
            };
            for (what, i) in interp_mutants(interp, true, rules) {
                out.push((
                    format!("ruleRemoval: {what}"),
                    mk(i, remaining.clone(), (**sub).clone()),
                ));
            }
            if remaining.as_slice() != rules {
                out.push((
                    "ruleRemoval: keep every rule".into(),
                    mk(interp.clone(), rules.to_vec(), (**sub).clone()),
                ));
            }
            let mut alien = remaining.clone();
            alien.push(alien_rule(rules));
            out.push((
                "ruleRemoval: add a rule".into(),
                mk(interp.clone(), alien, (**sub).clone()),
            ));
            for (what, s) in proof_mutants(sub, remaining) {
                out.push((format!("ruleRemoval/{what}"), mk(interp.clone(), remaining.clone(), s)));
            }
        }
        Proof::DpTrans { dps, sub } => {
            for k in 0..dps.len() {
                let mut d = dps.clone();
                d.remove(k);
                out.push((
                    format!("dpTrans: delete pair {}", k + 1),
                    Proof::DpTrans {
                        dps: d,
                        sub: sub.clone(),
                    },
                ));
            }
            for (what, s) in dp_mutants(sub, dps, rules) {
                out.push((
                    format!("dpTrans/{what}"),
                    Proof::DpTrans {
                        dps: dps.clone(),
                        sub: Box::new(s),
                    },
                ));
            }
        }
    }
    out
}

fn dp_mutants(p: &DpProof, dps: &[Rule], trs: &[Rule]) -> Vec<(String, DpProof)> {
    let mut out = Vec::new();
    match p {
        DpProof::PEmpty => {}
        DpProof::DepGraphProc(cs) => {
            for k in 0..cs.len() {
                let with = |c: Option<Component>| {
                    let mut v = cs.clone();
                    match c {
                        Some(c) => v[k] = c,
                        None => {
                            v.remove(k);
                        }
                    }
                    DpProof::DepGraphProc(v)
                };
                if cs.len() > 1 {
                    out.push((format!("depGraphProc: drop component {}", k + 1), with(None)));
                }
                let mut flipped = cs[k].clone();
                flipped.real_scc = !flipped.real_scc;
                out.push((
                    format!("depGraphProc: flip realScc of component {}", k + 1),
                    with(Some(flipped)),
                ));
                for j in 0..cs[k].dps.len() {
                    let mut c = cs[k].clone();
                    c.dps.remove(j);
                    out.push((
                        format!("depGraphProc: delete pair {} of component {}", j + 1, k + 1),
                        with(Some(c)),
                    ));
                }
                if let Some(sub) = &cs[k].sub {
                    for (what, s) in dp_mutants(sub, &cs[k].dps, trs) {
                        let mut c = cs[k].clone();
                        c.sub = Some(Box::new(s));
                        out.push((format!("component[{}]/{what}", k + 1), with(Some(c))));
                    }
                }
            }
        }
        DpProof::RedPairProc { interp, remaining, sub } => {
            let mk = |interp: PolyInterpretation, remaining: Vec<Rule>, sub: DpProof| DpProof::RedPairProc {
                interp,
                remaining,
                sub: Box::new(sub),
            };
            let used: Vec<Rule> = dps.iter().chain(trs).cloned().collect();
            for (what, i) in interp_mutants(interp, false, &used) {
                out.push((
                    format!("redPairProc: {what}"),
                    mk(i, remaining.clone(), (**sub).clone()),
                ));
            }
            if remaining.as_slice() != dps {
                out.push((
                    "redPairProc: keep every pair".into(),
                    mk(interp.clone(), dps.to_vec(), (**sub).clone()),
                ));
            }
            let mut alien = remaining.clone();
            alien.push(alien_rule(dps));
            out.push((
                "redPairProc: add a pair".into(),
                mk(interp.clone(), alien, (**sub).clone()),
            ));
            for (what, s) in dp_mutants(sub, remaining, trs) {
                out.push((format!("redPairProc/{what}"), mk(interp.clone(), remaining.clone(), s)));
            }
        }
    }
    out
}

/// Every single-point corruption of a certificate's proof, with a
/// description.
pub fn mutants(cert: &Certificate) -> Vec<(String, Certificate)> {
    proof_mutants(&cert.proof, cert.input.rules())
        .into_iter()
        .map(|(what, proof)| {
            (
                what,
                Certificate {
                    input: cert.input.clone(),
                    proof,
                },
            )
        })
        .collect()
}

// ---------------------------------------------------------------- fuzzing

/// A random corruption of a document: byte flips, deletions, insertions,
/// duplicated slices, or a digit or tag-name swap.
pub fn fuzz_bytes<R: Rng>(rng: &mut R, base: &[u8]) -> Vec<u8> {
    let mut doc = base.to_vec();
    for _ in 0..rng.gen_range(1..=4) {
        if doc.is_empty() {
            doc.push(b'<');
        }
        let len = doc.len();
        let at = rng.gen_range(0..len);
        match rng.gen_range(0..7) {
            0 => doc[at] = rng.gen(),
            1 => {
                let end = (at + rng.gen_range(1..64)).min(len);
                doc.drain(at..end);
            }
            2 => {
                const ALPHABET: &[u8] = b"<>/&;\"'=-x0123456789 \n\xff";
                let junk: Vec<u8> = (0..rng.gen_range(1..8))
                    .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())])
                    .collect();
                doc.splice(at..at, junk);
            }
            3 => {
                let end = (at + rng.gen_range(1..200)).min(len);
                let slice = doc[at..end].to_vec();
                let to = rng.gen_range(0..=doc.len());
                doc.splice(to..to, slice);
            }
            4 => {
                if let Some(p) = doc[at..].iter().position(u8::is_ascii_digit) {
                    doc[at + p] = b"09-71"[rng.gen_range(0..5)];
                }
            }
            5 => {
                const NAMES: [&[u8]; 10] = [
                    b"var",
                    b"funapp",
                    b"name",
                    b"sharp",
                    b"rule",
                    b"sum",
                    b"product",
                    b"variable",
                    b"realScc",
                    b"dps",
                ];
                let from = NAMES[rng.gen_range(0..NAMES.len())];
                let to = NAMES[rng.gen_range(0..NAMES.len())];
                if let Some(p) = doc[at..].windows(from.len()).position(|w| w == from) {
                    doc.splice(at + p..at + p + from.len(), to.iter().copied());
                }
            }
            _ => doc.truncate(at),
        }
    }
    doc
}
