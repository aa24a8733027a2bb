//! Proof-tree checking.
//!
//! Every node of a [`Proof`] is a deduction step whose side conditions are
//! re-established here from scratch; nothing claimed by the certificate is
//! trusted. The walk returns `Ok`, a `Ko` carrying the path of the failing
//! node, or `Unsupported` for input that is well formed but outside the
//! implemented techniques.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::cpf::{Certificate, Component, DpProof, Proof};
use crate::dp::{compute_dps, estimate_graph, sccs, DpProblem};
use crate::poly::{
    check_ge, check_gt, check_monotone_strict, check_monotone_weak, interpret_rule, InterpretError, PolyInterpretation,
};
use crate::term::{infer_signature, Arity, Rule, Symbol, Trs};

/// Location of a node in the proof tree. `indices` are child indices from
/// the root (the root itself has the empty path); `labels` has one entry
/// per node on the way, root included.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofPath {
    pub indices: Vec<usize>,
    pub labels: Vec<String>,
}

impl ProofPath {
    fn root(label: &str) -> Self {
        ProofPath {
            indices: Vec::new(),
            labels: vec![label.to_string()],
        }
    }

    fn child(&self, index: usize, label: String) -> Self {
        let mut p = self.clone();
        p.indices.push(index);
        p.labels.push(label);
        p
    }
}

impl fmt::Display for ProofPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("proof")?;
        for l in &self.labels {
            write!(f, "/{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KoKind {
    NonEmpty,
    NoProgress,
    NotStrictlyDecreasing,
    NotWeaklyDecreasing,
    NotMonotone,
    UnassignedSymbol,
    ArityMismatch,
    RemainingNotSubset,
    SharpInTrs,
    MissingDp,
    AlienDp,
    MalformedDp,
    ComponentMismatch,
    FlagMismatch,
    MissingSubproof,
    UnexpectedSubproof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckError {
    pub kind: KoKind,
    pub path: ProofPath,
    /// Element name of the failing node.
    pub node: &'static str,
    pub message: String,
    /// The offending rule or pair, when there is one.
    pub witness: Option<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedNode {
    pub path: ProofPath,
    pub element: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckResult {
    Ok,
    Ko(CheckError),
    Unsupported(UnsupportedNode),
}

impl CheckResult {
    pub fn is_ok(&self) -> bool {
        matches!(self, CheckResult::Ok)
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckResult::Ok => f.write_str("CERTIFIED"),
            CheckResult::Ko(e) => write!(f, "REJECTED: {}: {}", e.path, e.message),
            CheckResult::Unsupported(u) => write!(f, "UNSUPPORTED: {}: {}", u.path, u.element),
        }
    }
}

enum Failure {
    Ko(CheckError),
    Unsupported(UnsupportedNode),
}

type Step = Result<(), Failure>;

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Worker threads for sibling components; 1 checks sequentially.
    pub jobs: usize,
    /// Record a line per visited node and per side condition.
    pub trace: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { jobs: 1, trace: false }
    }
}

pub fn check_certificate(cert: &Certificate) -> CheckResult {
    check_certificate_with(cert, CheckOptions::default()).0
}

/// Checks `cert` and returns the verdict with the trace lines (empty unless
/// `opts.trace`). The verdict and the trace do not depend on `opts.jobs`.
pub fn check_certificate_with(cert: &Certificate, opts: CheckOptions) -> (CheckResult, Vec<String>) {
    let checker = Checker { opts };
    let mut trace = Vec::new();
    let run = |trace: &mut Vec<String>| {
        let path = ProofPath::root(cert.proof.element_name());
        checker.proof(&path, &cert.input, &cert.proof, trace)
    };
    let step = if opts.jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build() {
            Ok(pool) => pool.install(|| run(&mut trace)),
            Err(_) => run(&mut trace),
        }
    } else {
        run(&mut trace)
    };
    let result = match step {
        Ok(()) => CheckResult::Ok,
        Err(Failure::Ko(e)) => CheckResult::Ko(e),
        Err(Failure::Unsupported(u)) => CheckResult::Unsupported(u),
    };
    (result, trace)
}

struct Checker {
    opts: CheckOptions,
}

fn ko(kind: KoKind, path: &ProofPath, node: &'static str, message: String, witness: Option<Rule>) -> Failure {
    Failure::Ko(CheckError {
        kind,
        path: path.clone(),
        node,
        message,
        witness,
    })
}

fn unsupported_labels<'a>(
    path: &ProofPath,
    rules: impl IntoIterator<Item = &'a Rule>,
    interp: Option<&PolyInterpretation>,
) -> Step {
    let labeled = rules.into_iter().any(|r| r.symbols().iter().any(Symbol::has_label))
        || interp.is_some_and(|i| i.iter().any(|(s, _, _)| s.has_label()));
    if labeled {
        return Err(Failure::Unsupported(UnsupportedNode {
            path: path.clone(),
            element: "labeledSymbol".to_string(),
        }));
    }
    Ok(())
}

fn interpret_error(e: InterpretError, path: &ProofPath, node: &'static str, what: &str, rule: &Rule) -> Failure {
    let kind = match e {
        InterpretError::ArityMismatch { .. } => KoKind::ArityMismatch,
        _ => KoKind::UnassignedSymbol,
    };
    ko(kind, path, node, format!("{what}: {e}"), Some(rule.clone()))
}

impl Checker {
    fn note(&self, trace: &mut Vec<String>, path: &ProofPath, msg: impl FnOnce() -> String) {
        if self.opts.trace {
            trace.push(format!("{path}: {}", msg()));
        }
    }

    fn proof(&self, path: &ProofPath, trs: &Trs, proof: &Proof, trace: &mut Vec<String>) -> Step {
        self.note(trace, path, || {
            format!("visiting {} with {} rules", proof.element_name(), trs.rules().len())
        });
        match proof {
            Proof::REmpty => self.check_empty(path, trs, trace),
            Proof::RuleRemoval { interp, remaining, sub } => {
                self.check_rule_removal(path, trs, interp, remaining, sub, trace)
            }
            Proof::DpTrans { dps, sub } => self.check_dp_trans(path, trs, dps, sub, trace),
        }
    }

    fn check_empty(&self, path: &ProofPath, trs: &Trs, trace: &mut Vec<String>) -> Step {
        unsupported_labels(path, trs.rules(), None)?;
        if let Some(first) = trs.rules().first() {
            let n = trs.rules().len();
            return Err(ko(
                KoKind::NonEmpty,
                path,
                "rIsEmpty",
                format!(
                    "{n} rule{} remain{}",
                    if n == 1 { "" } else { "s" },
                    if n == 1 { "s" } else { "" }
                ),
                Some(first.clone()),
            ));
        }
        self.note(trace, path, || "no rules left: ok".to_string());
        Ok(())
    }

    /// Every symbol of `arity` is interpreted with the same arity, and every
    /// interpretation passes `monotone`.
    fn check_interpretation(
        &self,
        path: &ProofPath,
        node: &'static str,
        arity: &Arity,
        interp: &PolyInterpretation,
        strict: bool,
        trace: &mut Vec<String>,
    ) -> Step {
        for (sym, &n) in arity {
            match interp.get(sym) {
                None => {
                    return Err(ko(
                        KoKind::UnassignedSymbol,
                        path,
                        node,
                        format!("no interpretation for symbol {sym}"),
                        None,
                    ))
                }
                Some((declared, _)) if declared != n => {
                    return Err(ko(
                        KoKind::ArityMismatch,
                        path,
                        node,
                        format!("symbol {sym} has arity {n} but is interpreted with arity {declared}"),
                        None,
                    ))
                }
                Some(_) => {}
            }
        }
        for (sym, n, p) in interp.iter() {
            let ok = if strict {
                check_monotone_strict(p, n)
            } else {
                check_monotone_weak(p)
            };
            self.note(trace, path, || {
                format!(
                    "[{sym}] = {p} is {}monotone: {}",
                    if strict { "strictly " } else { "weakly " },
                    if ok { "ok" } else { "FAILED" }
                )
            });
            if !ok {
                return Err(ko(
                    KoKind::NotMonotone,
                    path,
                    node,
                    format!(
                        "interpretation of {sym} is not {} monotone",
                        if strict { "strictly" } else { "weakly" }
                    ),
                    None,
                ));
            }
        }
        Ok(())
    }

    /// Compares both sides of `rule`; `what` names it in messages.
    #[allow(clippy::too_many_arguments)]
    fn compare(
        &self,
        path: &ProofPath,
        node: &'static str,
        interp: &PolyInterpretation,
        rule: &Rule,
        what: &str,
        strict: bool,
        trace: &mut Vec<String>,
    ) -> Step {
        let (l, r) = interpret_rule(interp, rule).map_err(|e| interpret_error(e, path, node, what, rule))?;
        let ok = if strict { check_gt(&l, &r) } else { check_ge(&l, &r) };
        self.note(trace, path, || {
            format!(
                "{what} {rule}: {l} {} {r}: {}",
                if strict { ">" } else { ">=" },
                if ok { "ok" } else { "FAILED" }
            )
        });
        if ok {
            return Ok(());
        }
        let (kind, adj) = if strict {
            (KoKind::NotStrictlyDecreasing, "strictly")
        } else {
            (KoKind::NotWeaklyDecreasing, "weakly")
        };
        Err(ko(
            kind,
            path,
            node,
            format!("{what} not {adj} decreasing"),
            Some(rule.clone()),
        ))
    }

    fn check_rule_removal(
        &self,
        path: &ProofPath,
        trs: &Trs,
        interp: &PolyInterpretation,
        remaining: &[Rule],
        sub: &Proof,
        trace: &mut Vec<String>,
    ) -> Step {
        const NODE: &str = "ruleRemoval";
        unsupported_labels(path, trs.rules().iter().chain(remaining), Some(interp))?;
        self.check_interpretation(path, NODE, trs.arity(), interp, true, trace)?;

        let kept: BTreeSet<&Rule> = remaining.iter().collect();
        if let Some(alien) = remaining.iter().find(|r| !trs.rules().contains(r)) {
            return Err(ko(
                KoKind::RemainingNotSubset,
                path,
                NODE,
                format!("remaining rule {alien} is not in the current system"),
                Some(alien.clone()),
            ));
        }
        if trs.rules().iter().all(|r| kept.contains(r)) {
            return Err(ko(
                KoKind::NoProgress,
                path,
                NODE,
                "no rule is removed".to_string(),
                None,
            ));
        }
        for (i, rule) in trs.rules().iter().enumerate() {
            let strict = !kept.contains(rule);
            self.compare(path, NODE, interp, rule, &format!("rule {}", i + 1), strict, trace)?;
        }

        let mut seen = BTreeSet::new();
        let rest: Vec<Rule> = remaining.iter().filter(|r| seen.insert(*r)).cloned().collect();
        // Subsets of a well-formed system are well formed.
        let rest = Trs::new(rest).expect("subset of a valid rule set");
        let child = path.child(0, sub.element_name().to_string());
        self.proof(&child, &rest, sub, trace)
    }

    fn check_dp_trans(
        &self,
        path: &ProofPath,
        trs: &Trs,
        dps: &[Rule],
        sub: &DpProof,
        trace: &mut Vec<String>,
    ) -> Step {
        const NODE: &str = "dpTrans";
        unsupported_labels(path, trs.rules().iter().chain(dps), None)?;
        if let Some(rule) = trs
            .rules()
            .iter()
            .find(|r| r.symbols().iter().any(Symbol::contains_sharp))
        {
            return Err(ko(
                KoKind::SharpInTrs,
                path,
                NODE,
                format!("rule {rule} contains a marked symbol"),
                Some(rule.clone()),
            ));
        }
        let sets = compute_dps(trs).map_err(|e| ko(KoKind::SharpInTrs, path, NODE, e.to_string(), None))?;
        if let Some(missing) = sets.refined.iter().find(|d| !dps.contains(d)) {
            return Err(ko(
                KoKind::MissingDp,
                path,
                NODE,
                format!("dependency pair {missing} is missing"),
                Some(missing.clone()),
            ));
        }
        if let Some(alien) = dps.iter().find(|d| !sets.full.contains(d)) {
            return Err(ko(
                KoKind::AlienDp,
                path,
                NODE,
                format!("{alien} is not a dependency pair"),
                Some(alien.clone()),
            ));
        }
        self.note(trace, path, || {
            format!("{} dependency pairs, between the refined and full sets: ok", dps.len())
        });
        let problem = DpProblem::new(dps.to_vec(), trs.clone())
            .map_err(|e| ko(KoKind::MalformedDp, path, NODE, e.to_string(), None))?;
        let child = path.child(0, sub.element_name().to_string());
        self.dp_proof(&child, &problem, sub, trace)
    }

    fn dp_proof(&self, path: &ProofPath, p: &DpProblem, proof: &DpProof, trace: &mut Vec<String>) -> Step {
        self.note(trace, path, || {
            format!("visiting {} with {} pairs", proof.element_name(), p.dps().len())
        });
        unsupported_labels(path, p.dps().iter().chain(p.trs().rules()), None)?;
        match proof {
            DpProof::PEmpty => {
                if let Some(first) = p.dps().first() {
                    return Err(ko(
                        KoKind::NonEmpty,
                        path,
                        "pIsEmpty",
                        format!("{} dependency pairs remain", p.dps().len()),
                        Some(first.clone()),
                    ));
                }
                self.note(trace, path, || "no pairs left: ok".to_string());
                Ok(())
            }
            DpProof::DepGraphProc(components) => self.check_dep_graph(path, p, components, trace),
            DpProof::RedPairProc { interp, remaining, sub } => {
                self.check_red_pair(path, p, interp, remaining, sub, trace)
            }
        }
    }

    fn check_dep_graph(
        &self,
        path: &ProofPath,
        p: &DpProblem,
        components: &[Component],
        trace: &mut Vec<String>,
    ) -> Step {
        const NODE: &str = "depGraphProc";
        for c in components {
            unsupported_labels(path, &c.dps, None)?;
        }
        let graph = estimate_graph(p.dps(), p.trs());
        let parts = sccs(&graph);
        self.note(trace, path, || {
            format!(
                "estimated graph has {} edges and {} components",
                graph.edges().len(),
                parts.len()
            )
        });

        let mut covered = vec![false; parts.len()];
        for (k, c) in components.iter().enumerate() {
            let label = k + 1;
            let mut nodes = BTreeSet::new();
            for dp in &c.dps {
                let Some(i) = p.dps().iter().position(|d| d == dp) else {
                    return Err(ko(
                        KoKind::ComponentMismatch,
                        path,
                        NODE,
                        format!("component {label} contains {dp}, which is not in the problem"),
                        Some(dp.clone()),
                    ));
                };
                nodes.insert(i);
            }
            let nodes: Vec<usize> = nodes.into_iter().collect();
            let Some(s) = parts.iter().position(|scc| scc.nodes == nodes) else {
                return Err(ko(
                    KoKind::ComponentMismatch,
                    path,
                    NODE,
                    format!("component {label} is not a strongly connected component of the estimated graph"),
                    c.dps.first().cloned(),
                ));
            };
            if std::mem::replace(&mut covered[s], true) {
                return Err(ko(
                    KoKind::ComponentMismatch,
                    path,
                    NODE,
                    format!("component {label} is listed twice"),
                    c.dps.first().cloned(),
                ));
            }
            let real = !parts[s].trivial;
            if c.real_scc != real {
                return Err(ko(
                    KoKind::FlagMismatch,
                    path,
                    NODE,
                    format!(
                        "component {label} is flagged realScc={} but is {}",
                        c.real_scc,
                        if real { "cyclic" } else { "trivial" }
                    ),
                    c.dps.first().cloned(),
                ));
            }
            match (&c.sub, c.real_scc) {
                (None, true) => {
                    return Err(ko(
                        KoKind::MissingSubproof,
                        path,
                        NODE,
                        format!("component {label} has no subproof"),
                        None,
                    ))
                }
                (Some(_), false) => {
                    return Err(ko(
                        KoKind::UnexpectedSubproof,
                        path,
                        NODE,
                        format!("trivial component {label} carries a subproof"),
                        None,
                    ))
                }
                _ => {}
            }
        }
        if let Some(s) = covered.iter().position(|c| !c) {
            let dp = &p.dps()[parts[s].nodes[0]];
            return Err(ko(
                KoKind::ComponentMismatch,
                path,
                NODE,
                format!("the component containing {dp} is not listed"),
                Some(dp.clone()),
            ));
        }
        self.note(trace, path, || "components match the estimated graph: ok".to_string());

        let check_one = |(k, c): (usize, &Component)| -> (Step, Vec<String>) {
            let mut local = Vec::new();
            let Some(sub) = &c.sub else { return (Ok(()), local) };
            let child = path.child(k, format!("component[{}]/{}", k + 1, sub.element_name()));
            let step = DpProblem::new(c.dps.clone(), p.trs().clone())
                .map_err(|e| ko(KoKind::MalformedDp, path, NODE, e.to_string(), None))
                .and_then(|sp| self.dp_proof(&child, &sp, sub, &mut local));
            (step, local)
        };
        if self.opts.jobs > 1 {
            let results: Vec<(Step, Vec<String>)> = components.par_iter().enumerate().map(check_one).collect();
            for (step, local) in results {
                trace.extend(local);
                step?;
            }
        } else {
            for item in components.iter().enumerate() {
                let (step, local) = check_one(item);
                trace.extend(local);
                step?;
            }
        }
        Ok(())
    }

    fn check_red_pair(
        &self,
        path: &ProofPath,
        p: &DpProblem,
        interp: &PolyInterpretation,
        remaining: &[Rule],
        sub: &DpProof,
        trace: &mut Vec<String>,
    ) -> Step {
        const NODE: &str = "redPairProc";
        unsupported_labels(path, remaining, Some(interp))?;
        let mut arity = p.trs().arity().clone();
        // Pair arities agree with the rules: checked when the certificate was parsed.
        if let Ok(pairs) = infer_signature(p.dps()) {
            arity.extend(pairs);
        }
        self.check_interpretation(path, NODE, &arity, interp, false, trace)?;

        if let Some(alien) = remaining.iter().find(|r| !p.dps().contains(r)) {
            return Err(ko(
                KoKind::RemainingNotSubset,
                path,
                NODE,
                format!("remaining pair {alien} is not in the problem"),
                Some(alien.clone()),
            ));
        }
        let kept: BTreeSet<&Rule> = remaining.iter().collect();
        if p.dps().iter().all(|d| kept.contains(d)) {
            return Err(ko(
                KoKind::NoProgress,
                path,
                NODE,
                "no pair is removed".to_string(),
                None,
            ));
        }
        for (i, rule) in p.trs().rules().iter().enumerate() {
            self.compare(path, NODE, interp, rule, &format!("rule {}", i + 1), false, trace)?;
        }
        for (i, dp) in p.dps().iter().enumerate() {
            let strict = !kept.contains(dp);
            self.compare(path, NODE, interp, dp, &format!("pair {}", i + 1), strict, trace)?;
        }

        let problem = DpProblem::new(remaining.to_vec(), p.trs().clone())
            .map_err(|e| ko(KoKind::MalformedDp, path, NODE, e.to_string(), None))?;
        let child = path.child(0, sub.element_name().to_string());
        self.dp_proof(&child, &problem, sub, trace)
    }
}
