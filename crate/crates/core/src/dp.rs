//! Dependency pairs, dependency-graph estimation and SCC decomposition.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::term::{unify, Rule, Symbol, Term, Trs, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("cannot mark a variable")]
    RootIsVariable,
    #[error("root symbol {0} is already marked")]
    AlreadyMarked(Symbol),
    #[error("marked symbol {symbol} occurs in rule {rule}")]
    SharpInInput { symbol: Symbol, rule: Rule },
    #[error("dependency pair {0} is not marked at both roots")]
    UnmarkedPair(Rule),
    #[error("dependency pair {0} has a marked symbol below the root")]
    NestedMark(Rule),
}

/// The root symbols of the left-hand sides of `trs`.
pub fn defined_symbols(trs: &Trs) -> BTreeSet<Symbol> {
    trs.rules().iter().filter_map(|r| r.lhs.root().cloned()).collect()
}

pub fn mark(t: &Term) -> Result<Term, DpError> {
    match t {
        Term::Var(_) => Err(DpError::RootIsVariable),
        Term::App(f, _) if f.is_sharp() => Err(DpError::AlreadyMarked(f.clone())),
        Term::App(f, args) => Ok(Term::App(f.clone().sharp(), args.clone())),
    }
}

/// Inverse of [`mark`]; returns `None` when the root is not marked.
pub fn unmark(t: &Term) -> Option<Term> {
    match t {
        Term::App(Symbol::Sharp(f), args) => Some(Term::App((**f).clone(), args.clone())),
        _ => None,
    }
}

/// The two standard readings of the dependency-pair set. `refined` drops
/// pairs whose (unmarked) right side is a subterm of some argument of the
/// left side; `full` keeps them. `refined` is always a subset of `full`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpSets {
    pub refined: Vec<Rule>,
    pub full: Vec<Rule>,
}

pub fn compute_dps(trs: &Trs) -> Result<DpSets, DpError> {
    for rule in trs.rules() {
        if let Some(symbol) = rule.symbols().into_iter().find(Symbol::contains_sharp) {
            return Err(DpError::SharpInInput {
                symbol,
                rule: rule.clone(),
            });
        }
    }
    let defined = defined_symbols(trs);
    let mut full = Vec::new();
    let mut refined = Vec::new();
    let mut seen = BTreeSet::new();
    for rule in trs.rules() {
        let Term::App(_, lhs_args) = &rule.lhs else { continue };
        let lhs = mark(&rule.lhs)?;
        for sub in rule.rhs.subterms() {
            let Some(g) = sub.root() else { continue };
            if !defined.contains(g) {
                continue;
            }
            let pair = Rule::new(lhs.clone(), mark(sub)?);
            if !seen.insert(pair.clone()) {
                continue;
            }
            if !lhs_args.iter().any(|l| l.has_subterm(sub)) {
                refined.push(pair.clone());
            }
            full.push(pair);
        }
    }
    Ok(DpSets { refined, full })
}

/// A set of dependency pairs together with the rules they are taken relative to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpProblem {
    dps: Vec<Rule>,
    trs: Trs,
}

impl DpProblem {
    /// Duplicate pairs are dropped, keeping the first occurrence.
    pub fn new(dps: Vec<Rule>, trs: Trs) -> Result<Self, DpError> {
        for r in trs.rules() {
            if let Some(symbol) = r.symbols().into_iter().find(Symbol::contains_sharp) {
                return Err(DpError::SharpInInput {
                    symbol,
                    rule: r.clone(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        let mut unique = Vec::new();
        for dp in dps {
            check_pair_shape(&dp)?;
            if seen.insert(dp.clone()) {
                unique.push(dp);
            }
        }
        Ok(DpProblem { dps: unique, trs })
    }

    pub fn dps(&self) -> &[Rule] {
        &self.dps
    }

    pub fn trs(&self) -> &Trs {
        &self.trs
    }
}

fn check_pair_shape(dp: &Rule) -> Result<(), DpError> {
    for side in [&dp.lhs, &dp.rhs] {
        match side.root() {
            Some(f) if f.sharp_depth() == 1 => {}
            _ => return Err(DpError::UnmarkedPair(dp.clone())),
        }
        let Term::App(_, args) = side else { unreachable!() };
        if args.iter().any(|a| a.symbols().iter().any(Symbol::contains_sharp)) {
            return Err(DpError::NestedMark(dp.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl DepGraph {
    /// Edges with an endpoint `>= n` are ignored.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges.into_iter().filter(|&(i, j)| i < n && j < n).collect();
        DepGraph { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            succ[i].push(j);
        }
        succ
    }
}

struct Fresh {
    next: usize,
}

impl Fresh {
    fn var(&mut self) -> Term {
        self.next += 1;
        // Lhs variables are renamed under an "L" prefix, so an "R" prefix
        // can never clash with them.
        Term::Var(Var::new(format!("R{}", self.next)))
    }
}

/// Replaces every proper subterm rooted by a defined symbol, and every
/// variable, by a fresh variable. This is cap followed by linear renaming.
fn cap_ren(t: &Term, defined: &BTreeSet<Symbol>, fresh: &mut Fresh, at_root: bool) -> Term {
    match t {
        Term::Var(_) => fresh.var(),
        Term::App(f, _) if !at_root && defined.contains(f) => fresh.var(),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| cap_ren(a, defined, fresh, false)).collect(),
        ),
    }
}

fn rename_apart(t: &Term) -> Term {
    match t {
        Term::Var(v) => Term::Var(Var::new(format!("L{}", v.as_str()))),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(rename_apart).collect()),
    }
}

/// Over-approximates the dependency graph: an edge `i -> j` is kept
/// whenever the capped and renamed right side of pair `i` unifies with the
/// left side of pair `j`.
pub fn estimate_graph(dps: &[Rule], trs: &Trs) -> DepGraph {
    let defined = defined_symbols(trs);
    let mut fresh = Fresh { next: 0 };
    let capped: Vec<Term> = dps
        .iter()
        .map(|dp| cap_ren(&dp.rhs, &defined, &mut fresh, true))
        .collect();
    let lhss: Vec<Term> = dps.iter().map(|dp| rename_apart(&dp.lhs)).collect();
    let mut edges = Vec::new();
    for (i, rhs) in capped.iter().enumerate() {
        for (j, lhs) in lhss.iter().enumerate() {
            if unify(rhs, lhs).is_some() {
                edges.push((i, j));
            }
        }
    }
    DepGraph::new(dps.len(), edges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scc {
    /// Sorted node indices.
    pub nodes: Vec<usize>,
    /// A single node without a self-loop.
    pub trivial: bool,
}

/// Strongly connected components in a topological order of the
/// condensation: if there is an edge from a node of component `a` to a
/// node of component `b != a`, then `a` comes first. Among components
/// that are not ordered, the one with the smallest node index goes first.
pub fn sccs(g: &DepGraph) -> Vec<Scc> {
    let succ = g.successors();
    let comp_of = tarjan(&succ);
    let ncomp = comp_of.iter().map(|&c| c + 1).max().unwrap_or(0);

    let mut members = vec![Vec::new(); ncomp];
    for (v, &c) in comp_of.iter().enumerate() {
        members[c].push(v);
    }
    let mut cdeps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ncomp];
    let mut indegree = vec![0usize; ncomp];
    for &(i, j) in g.edges() {
        let (a, b) = (comp_of[i], comp_of[j]);
        if a != b && cdeps[a].insert(b) {
            indegree[b] += 1;
        }
    }

    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..ncomp)
        .filter(|&c| indegree[c] == 0)
        .map(|c| Reverse((members[c][0], c)))
        .collect();
    let mut out = Vec::with_capacity(ncomp);
    while let Some(Reverse((_, c))) = ready.pop() {
        for &d in &cdeps[c] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse((members[d][0], d)));
            }
        }
        let nodes = std::mem::take(&mut members[c]);
        let trivial = nodes.len() == 1 && !g.has_edge(nodes[0], nodes[0]);
        out.push(Scc { nodes, trivial });
    }
    out
}

/// Iterative Tarjan. Returns the component id of every node.
fn tarjan(succ: &[Vec<usize>]) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp_of = vec![UNVISITED; n];
    let mut next_index = 0;
    let mut ncomp = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (node, next successor slot)
        let mut call = vec![(root, 0usize)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut slot)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*slot) {
                *slot += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w] = false;
                    comp_of[w] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
        }
    }
    comp_of
}
