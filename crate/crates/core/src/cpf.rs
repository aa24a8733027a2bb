//! Reader and writer for the CPF-style certificate format.
//!
//! The accepted vocabulary:
//!
//! ```text
//! certificationProblem ::= <certificationProblem>
//!                            <input><trsInput><trs><rules> rule* </rules></trs></trsInput></input>
//!                            <proof> trsProof </proof>
//!                          </certificationProblem>
//! rule      ::= <rule><lhs> term </lhs><rhs> term </rhs></rule>
//! term      ::= <var>NAME</var> | <funapp> symbol arg* </funapp>
//! arg       ::= <arg> term </arg>
//! symbol    ::= <name>NAME</name> | <sharp> symbol </sharp>
//!             | <labeledSymbol> symbol label </labeledSymbol>
//! trsProof  ::= <rIsEmpty/>
//!             | <ruleRemoval> interpretation <trs><rules> rule* </rules></trs> trsProof </ruleRemoval>
//!             | <dpTrans> <dps><rules> rule* </rules></dps> <markedSymbols>true</markedSymbols> dpProof </dpTrans>
//! dpProof   ::= <pIsEmpty/>
//!             | <depGraphProc> component+ </depGraphProc>
//!             | <redPairProc> interpretation <dps><rules> rule* </rules></dps> dpProof </redPairProc>
//! component ::= <component> <dps><rules> rule* </rules></dps> <realScc>BOOL</realScc> dpProof? </component>
//! interpretation ::= <interpretation> interpret+ </interpretation>
//! interpret ::= <interpret> symbol <arity>NAT</arity> <polynomial> polyexp </polynomial> </interpret>
//! polyexp   ::= <coefficient><integer>INT</integer></coefficient> | <variable>NAT</variable>
//!             | <sum> polyexp* </sum> | <product> polyexp* </product>
//! ```
//!
//! Namespaces are stripped, attributes ignored, whitespace-only text
//! ignored. A `label` is any single element and is kept as an opaque
//! canonical string. Documents with a DOCTYPE are rejected.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_traits::One;
use roxmltree::{Document, Node};
use thiserror::Error;

use crate::poly::{InterpretError, PolyInterpretation, Polynomial};
use crate::term::{infer_signature, Rule, Symbol, Term, TermError, Trs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub input: Trs,
    pub proof: Proof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Proof {
    REmpty,
    RuleRemoval {
        interp: PolyInterpretation,
        remaining: Vec<Rule>,
        sub: Box<Proof>,
    },
    DpTrans {
        dps: Vec<Rule>,
        sub: Box<DpProof>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DpProof {
    PEmpty,
    DepGraphProc(Vec<Component>),
    RedPairProc {
        interp: PolyInterpretation,
        remaining: Vec<Rule>,
        sub: Box<DpProof>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub dps: Vec<Rule>,
    pub real_scc: bool,
    pub sub: Option<Box<DpProof>>,
}

impl Proof {
    pub fn element_name(&self) -> &'static str {
        match self {
            Proof::REmpty => "rIsEmpty",
            Proof::RuleRemoval { .. } => "ruleRemoval",
            Proof::DpTrans { .. } => "dpTrans",
        }
    }
}

impl DpProof {
    pub fn element_name(&self) -> &'static str {
        match self {
            DpProof::PEmpty => "pIsEmpty",
            DpProof::DepGraphProc(_) => "depGraphProc",
            DpProof::RedPairProc { .. } => "redPairProc",
        }
    }
}

/// One element on the way from the document root: its local name and its
/// 1-based index among same-named element siblings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathStep {
    pub name: String,
    pub index: usize,
    pub repeated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XmlPath(pub Vec<PathStep>);

impl fmt::Display for XmlPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            f.write_str(&step.name)?;
            if step.repeated {
                write!(f, "[{}]", step.index)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed XML: {0}")]
    XmlMalformed(String),
    #[error("unexpected element <{got}>, expected {expected}")]
    UnexpectedElement { got: String, expected: String },
    #[error("missing child {expected}")]
    MissingChild { expected: String },
    #[error("unexpected text {0:?}")]
    UnexpectedText(String),
    #[error("bad integer {0:?}")]
    BadInteger(String),
    #[error("bad value {got:?}, expected {expected}")]
    BadValue { expected: String, got: String },
    #[error("unsupported element {0}")]
    Unsupported(String),
    #[error("invalid rule: {0}")]
    InvalidRule(TermError),
    #[error("inconsistent signature: {0}")]
    Signature(TermError),
    #[error("invalid interpretation: {0}")]
    Interpretation(InterpretError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub path: XmlPath,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.0.is_empty() {
            write!(f, "{}:{}: {}", self.line, self.col, self.kind)
        } else {
            write!(f, "{}:{}: {}: {}", self.line, self.col, self.path, self.kind)
        }
    }
}

impl ParseError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self.kind, ParseErrorKind::Unsupported(_))
    }
}

type Result<T> = std::result::Result<T, ParseError>;

pub fn path_of(node: Node) -> XmlPath {
    let mut steps: Vec<PathStep> = node
        .ancestors()
        .filter(Node::is_element)
        .map(|n| {
            let name = n.tag_name().name();
            let same = |s: &Node| s.is_element() && s.tag_name().name() == name;
            let index = 1 + n.prev_siblings().skip(1).filter(same).count();
            let repeated = index > 1 || n.next_siblings().skip(1).any(|s| same(&s));
            PathStep {
                name: name.to_string(),
                index,
                repeated,
            }
        })
        .collect();
    steps.reverse();
    XmlPath(steps)
}

fn error_at(node: Node, kind: ParseErrorKind) -> ParseError {
    let pos = node.document().text_pos_at(node.range().start);
    ParseError {
        kind,
        path: path_of(node),
        line: pos.row,
        col: pos.col,
    }
}

fn name_of<'a>(node: &Node<'a, '_>) -> &'a str {
    node.tag_name().name()
}

/// Element children, rejecting any non-whitespace text.
fn elements<'a, 'i>(node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>> {
    let mut out = Vec::new();
    for child in node.children() {
        if child.is_element() {
            out.push(child);
        } else if child.is_text() {
            let text = child.text().unwrap_or_default();
            if !text.trim().is_empty() {
                return Err(error_at(node, ParseErrorKind::UnexpectedText(text.trim().to_string())));
            }
        }
    }
    Ok(out)
}

/// Checks that `node` has exactly the named children, in order.
fn expect_sequence<'a, 'i>(node: Node<'a, 'i>, names: &[&str]) -> Result<Vec<Node<'a, 'i>>> {
    let children = elements(node)?;
    for (i, expected) in names.iter().enumerate() {
        match children.get(i) {
            None => {
                return Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(c) if name_of(c) != *expected => {
                return Err(error_at(
                    *c,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(c).to_string(),
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = children.get(names.len()) {
        return Err(error_at(
            *extra,
            ParseErrorKind::UnexpectedElement {
                got: name_of(extra).to_string(),
                expected: format!("end of <{}>", name_of(&node)),
            },
        ));
    }
    Ok(children)
}

fn single_child<'a, 'i>(node: Node<'a, 'i>, what: &str) -> Result<Node<'a, 'i>> {
    let children = elements(node)?;
    match children.as_slice() {
        [] => Err(error_at(
            node,
            ParseErrorKind::MissingChild {
                expected: what.to_string(),
            },
        )),
        [only] => Ok(*only),
        [_, extra, ..] => Err(error_at(
            *extra,
            ParseErrorKind::UnexpectedElement {
                got: name_of(extra).to_string(),
                expected: format!("end of <{}>", name_of(&node)),
            },
        )),
    }
}

fn leaf_text(node: Node) -> Result<String> {
    let mut text = String::new();
    for child in node.children() {
        if child.is_element() {
            return Err(error_at(
                child,
                ParseErrorKind::UnexpectedElement {
                    got: name_of(&child).to_string(),
                    expected: "text".to_string(),
                },
            ));
        }
        if child.is_text() {
            text.push_str(child.text().unwrap_or_default());
        }
    }
    Ok(text.trim().to_string())
}

fn nonempty_text(node: Node) -> Result<String> {
    let text = leaf_text(node)?;
    if text.is_empty() {
        return Err(error_at(
            node,
            ParseErrorKind::BadValue {
                expected: "a nonempty identifier".to_string(),
                got: text,
            },
        ));
    }
    Ok(text)
}

fn natural(node: Node) -> Result<usize> {
    let text = leaf_text(node)?;
    text.parse::<usize>()
        .map_err(|_| error_at(node, ParseErrorKind::BadInteger(text)))
}

pub fn parse_cpf(bytes: &[u8]) -> Result<Certificate> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError {
        kind: ParseErrorKind::XmlMalformed(format!("invalid UTF-8: {e}")),
        path: XmlPath::default(),
        line: 1,
        col: 1,
    })?;
    parse_cpf_str(text)
}

pub fn parse_cpf_str(text: &str) -> Result<Certificate> {
    let doc = parse_document(text)?;
    let root = doc.root_element();
    if name_of(&root) != "certificationProblem" {
        return Err(error_at(
            root,
            ParseErrorKind::UnexpectedElement {
                got: name_of(&root).to_string(),
                expected: "<certificationProblem>".to_string(),
            },
        ));
    }
    let top = expect_sequence(root, &["input", "proof"])?;
    let trs_input = expect_sequence(top[0], &["trsInput"])?[0];
    let trs = expect_sequence(trs_input, &["trs"])?[0];
    let rules_node = expect_sequence(trs, &["rules"])?[0];
    let rules = parse_rules(rules_node)?;
    let input = Trs::new(rules).map_err(|e| error_at(rules_node, ParseErrorKind::Signature(e)))?;

    let proof_node = single_child(top[1], "a proof")?;
    let proof = parse_trs_proof(proof_node)?;
    let cert = Certificate { input, proof };

    check_signature(&cert).map_err(|e| error_at(root, ParseErrorKind::Signature(e)))?;
    Ok(cert)
}

pub(crate) fn parse_document(text: &str) -> Result<Document<'_>> {
    let opts = roxmltree::ParsingOptions {
        allow_dtd: false,
        ..Default::default()
    };
    Document::parse_with_options(text, opts).map_err(|e| {
        let pos = e.pos();
        ParseError {
            kind: ParseErrorKind::XmlMalformed(e.to_string()),
            path: XmlPath::default(),
            line: pos.row,
            col: pos.col,
        }
    })
}

/// Every rule embedded anywhere in the certificate must agree on arities,
/// and a marked symbol must have the arity of the symbol it marks.
fn check_signature(cert: &Certificate) -> std::result::Result<(), TermError> {
    let mut all: Vec<&Rule> = cert.input.rules().iter().collect();
    collect_proof_rules(&cert.proof, &mut all);
    let arity = infer_signature(all)?;
    for (sym, &n) in &arity {
        if let Symbol::Sharp(base) = sym {
            if let Some(&m) = arity.get(base.as_ref()) {
                if m != n {
                    return Err(TermError::ArityConflict {
                        symbol: sym.clone(),
                        first: m,
                        second: n,
                    });
                }
            }
        }
    }
    Ok(())
}

fn collect_proof_rules<'a>(proof: &'a Proof, out: &mut Vec<&'a Rule>) {
    match proof {
        Proof::REmpty => {}
        Proof::RuleRemoval { remaining, sub, .. } => {
            out.extend(remaining);
            collect_proof_rules(sub, out);
        }
        Proof::DpTrans { dps, sub } => {
            out.extend(dps);
            collect_dp_proof_rules(sub, out);
        }
    }
}

fn collect_dp_proof_rules<'a>(proof: &'a DpProof, out: &mut Vec<&'a Rule>) {
    match proof {
        DpProof::PEmpty => {}
        DpProof::DepGraphProc(components) => {
            for c in components {
                out.extend(&c.dps);
                if let Some(sub) = &c.sub {
                    collect_dp_proof_rules(sub, out);
                }
            }
        }
        DpProof::RedPairProc { remaining, sub, .. } => {
            out.extend(remaining);
            collect_dp_proof_rules(sub, out);
        }
    }
}

fn parse_rules(node: Node) -> Result<Vec<Rule>> {
    elements(node)?
        .into_iter()
        .map(|c| {
            if name_of(&c) != "rule" {
                return Err(error_at(
                    c,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(&c).to_string(),
                        expected: "<rule>".to_string(),
                    },
                ));
            }
            parse_rule(c)
        })
        .collect()
}

/// `<rules>` wrapped in the given element, e.g. `<trs><rules>..</rules></trs>`.
fn parse_wrapped_rules(node: Node) -> Result<Vec<Rule>> {
    let rules = expect_sequence(node, &["rules"])?[0];
    parse_rules(rules)
}

pub fn parse_rule(node: Node) -> Result<Rule> {
    let sides = expect_sequence(node, &["lhs", "rhs"])?;
    let lhs = parse_term(single_child(sides[0], "a term")?)?;
    let rhs = parse_term(single_child(sides[1], "a term")?)?;
    Rule::checked(lhs, rhs).map_err(|e| error_at(node, ParseErrorKind::InvalidRule(e)))
}

pub fn parse_term(node: Node) -> Result<Term> {
    match name_of(&node) {
        "var" => Ok(Term::var(nonempty_text(node)?)),
        "funapp" => {
            let children = elements(node)?;
            let Some((head, rest)) = children.split_first() else {
                return Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: "a symbol".to_string(),
                    },
                ));
            };
            let symbol = parse_symbol(*head)?;
            let args = rest
                .iter()
                .map(|a| {
                    if name_of(a) != "arg" {
                        return Err(error_at(
                            *a,
                            ParseErrorKind::UnexpectedElement {
                                got: name_of(a).to_string(),
                                expected: "<arg>".to_string(),
                            },
                        ));
                    }
                    parse_term(single_child(*a, "a term")?)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Term::App(symbol, args))
        }
        other => Err(error_at(
            node,
            ParseErrorKind::UnexpectedElement {
                got: other.to_string(),
                expected: "<var> or <funapp>".to_string(),
            },
        )),
    }
}

pub fn parse_symbol(node: Node) -> Result<Symbol> {
    match name_of(&node) {
        "name" => Ok(Symbol::Name(nonempty_text(node)?)),
        "sharp" => Ok(parse_symbol(single_child(node, "a symbol")?)?.sharp()),
        "labeledSymbol" => {
            let children = elements(node)?;
            match children.as_slice() {
                [sym, label] => Ok(Symbol::Labeled(Box::new(parse_symbol(*sym)?), canonical_xml(*label))),
                [] | [_] => Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: if children.is_empty() { "a symbol" } else { "a label" }.to_string(),
                    },
                )),
                [_, _, extra, ..] => Err(error_at(
                    *extra,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(extra).to_string(),
                        expected: "end of <labeledSymbol>".to_string(),
                    },
                )),
            }
        }
        other => Err(error_at(
            node,
            ParseErrorKind::UnexpectedElement {
                got: other.to_string(),
                expected: "<name>, <sharp> or <labeledSymbol>".to_string(),
            },
        )),
    }
}

/// Element-only rendering with trimmed text and no attributes; stable under
/// re-parsing.
fn canonical_xml(node: Node) -> String {
    let mut out = String::new();
    write_canonical(node, &mut out);
    out
}

fn write_canonical(node: Node, out: &mut String) {
    let name = name_of(&node);
    out.push('<');
    out.push_str(name);
    out.push('>');
    for child in node.children() {
        if child.is_element() {
            write_canonical(child, out);
        } else if child.is_text() {
            out.push_str(&escape(child.text().unwrap_or_default().trim()));
        }
    }
    out.push_str("</");
    out.push_str(name);
    out.push('>');
}

fn parse_trs_proof(node: Node) -> Result<Proof> {
    match name_of(&node) {
        "rIsEmpty" => {
            expect_sequence(node, &[])?;
            Ok(Proof::REmpty)
        }
        "ruleRemoval" => {
            let c = expect_sequence_prefix(node, &["interpretation", "trs"], "a proof")?;
            let interp = parse_interpretation(c[0])?;
            let remaining = parse_wrapped_rules(c[1])?;
            let sub = parse_trs_proof(c[2])?;
            Ok(Proof::RuleRemoval {
                interp,
                remaining,
                sub: Box::new(sub),
            })
        }
        "dpTrans" => {
            let c = expect_sequence_prefix(node, &["dps", "markedSymbols"], "a DP proof")?;
            let dps = parse_wrapped_rules(c[0])?;
            match leaf_text(c[1])?.as_str() {
                "true" => {}
                "false" => return Err(error_at(c[1], ParseErrorKind::Unsupported("markedSymbols".to_string()))),
                other => {
                    return Err(error_at(
                        c[1],
                        ParseErrorKind::BadValue {
                            expected: "true".to_string(),
                            got: other.to_string(),
                        },
                    ))
                }
            }
            let sub = parse_dp_proof(c[2])?;
            Ok(Proof::DpTrans {
                dps,
                sub: Box::new(sub),
            })
        }
        other => Err(error_at(node, ParseErrorKind::Unsupported(other.to_string()))),
    }
}

/// Named children followed by exactly one proof element of any name.
fn expect_sequence_prefix<'a, 'i>(node: Node<'a, 'i>, names: &[&str], last: &str) -> Result<Vec<Node<'a, 'i>>> {
    let children = elements(node)?;
    let split = children.len().min(names.len());
    let head = &children[..split];
    for (i, expected) in names.iter().enumerate() {
        match head.get(i) {
            None => {
                return Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(c) if name_of(c) != *expected => {
                return Err(error_at(
                    *c,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(c).to_string(),
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(_) => {}
        }
    }
    match &children[names.len()..] {
        [] => Err(error_at(
            node,
            ParseErrorKind::MissingChild {
                expected: last.to_string(),
            },
        )),
        [_] => Ok(children),
        [_, extra, ..] => Err(error_at(
            *extra,
            ParseErrorKind::UnexpectedElement {
                got: name_of(extra).to_string(),
                expected: format!("end of <{}>", name_of(&node)),
            },
        )),
    }
}

fn parse_dp_proof(node: Node) -> Result<DpProof> {
    match name_of(&node) {
        "pIsEmpty" => {
            expect_sequence(node, &[])?;
            Ok(DpProof::PEmpty)
        }
        "depGraphProc" => {
            let children = elements(node)?;
            if children.is_empty() {
                return Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: "<component>".to_string(),
                    },
                ));
            }
            let components = children
                .into_iter()
                .map(|c| {
                    if name_of(&c) != "component" {
                        return Err(error_at(
                            c,
                            ParseErrorKind::UnexpectedElement {
                                got: name_of(&c).to_string(),
                                expected: "<component>".to_string(),
                            },
                        ));
                    }
                    parse_component(c)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(DpProof::DepGraphProc(components))
        }
        "redPairProc" => {
            let c = expect_sequence_prefix(node, &["interpretation", "dps"], "a DP proof")?;
            let interp = parse_interpretation(c[0])?;
            let remaining = parse_wrapped_rules(c[1])?;
            let sub = parse_dp_proof(c[2])?;
            Ok(DpProof::RedPairProc {
                interp,
                remaining,
                sub: Box::new(sub),
            })
        }
        other => Err(error_at(node, ParseErrorKind::Unsupported(other.to_string()))),
    }
}

fn parse_component(node: Node) -> Result<Component> {
    let children = elements(node)?;
    let (fixed, rest) = children.split_at(children.len().min(2));
    for (i, expected) in ["dps", "realScc"].iter().enumerate() {
        match fixed.get(i) {
            None => {
                return Err(error_at(
                    node,
                    ParseErrorKind::MissingChild {
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(c) if name_of(c) != *expected => {
                return Err(error_at(
                    *c,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(c).to_string(),
                        expected: format!("<{expected}>"),
                    },
                ))
            }
            Some(_) => {}
        }
    }
    let dps = parse_wrapped_rules(fixed[0])?;
    let real_scc = match leaf_text(fixed[1])?.as_str() {
        "true" => true,
        "false" => false,
        other => {
            return Err(error_at(
                fixed[1],
                ParseErrorKind::BadValue {
                    expected: "true or false".to_string(),
                    got: other.to_string(),
                },
            ))
        }
    };
    let sub = match rest {
        [] => None,
        [p] => Some(Box::new(parse_dp_proof(*p)?)),
        [_, extra, ..] => {
            return Err(error_at(
                *extra,
                ParseErrorKind::UnexpectedElement {
                    got: name_of(extra).to_string(),
                    expected: "end of <component>".to_string(),
                },
            ))
        }
    };
    Ok(Component { dps, real_scc, sub })
}

fn parse_interpretation(node: Node) -> Result<PolyInterpretation> {
    let children = elements(node)?;
    if children.is_empty() {
        return Err(error_at(
            node,
            ParseErrorKind::MissingChild {
                expected: "<interpret>".to_string(),
            },
        ));
    }
    let mut interp = PolyInterpretation::new();
    for child in children {
        if name_of(&child) != "interpret" {
            return Err(error_at(
                child,
                ParseErrorKind::UnexpectedElement {
                    got: name_of(&child).to_string(),
                    expected: "<interpret>".to_string(),
                },
            ));
        }
        let parts = elements(child)?;
        let [sym, arity, poly] = parts.as_slice() else {
            if let Some(extra) = parts.get(3) {
                return Err(error_at(
                    *extra,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(extra).to_string(),
                        expected: "end of <interpret>".to_string(),
                    },
                ));
            }
            let expected = ["a symbol", "<arity>", "<polynomial>"][parts.len()];
            return Err(error_at(
                child,
                ParseErrorKind::MissingChild {
                    expected: expected.to_string(),
                },
            ));
        };
        let symbol = parse_symbol(*sym)?;
        for (node, expected) in [(arity, "arity"), (poly, "polynomial")] {
            if name_of(node) != expected {
                return Err(error_at(
                    *node,
                    ParseErrorKind::UnexpectedElement {
                        got: name_of(node).to_string(),
                        expected: format!("<{expected}>"),
                    },
                ));
            }
        }
        let n = natural(*arity)?;
        let p = parse_polyexp(single_child(*poly, "a polynomial expression")?)?;
        interp
            .insert(symbol, n, p)
            .map_err(|e| error_at(child, ParseErrorKind::Interpretation(e)))?;
    }
    Ok(interp)
}

pub fn parse_polyexp(node: Node) -> Result<Polynomial> {
    match name_of(&node) {
        "coefficient" => {
            let int = expect_sequence(node, &["integer"])?[0];
            let text = leaf_text(int)?;
            let value: BigInt = text
                .parse()
                .map_err(|_| error_at(int, ParseErrorKind::BadInteger(text.clone())))?;
            Ok(Polynomial::constant(value))
        }
        "variable" => {
            let index = natural(node)?;
            if index == 0 {
                return Err(error_at(node, ParseErrorKind::BadInteger("0".to_string())));
            }
            Ok(Polynomial::var(index))
        }
        "sum" => elements(node)?
            .into_iter()
            .try_fold(Polynomial::zero(), |acc, c| Ok(&acc + &parse_polyexp(c)?)),
        "product" => elements(node)?
            .into_iter()
            .try_fold(Polynomial::constant(1), |acc, c| Ok(&acc * &parse_polyexp(c)?)),
        other => Err(error_at(
            node,
            ParseErrorKind::UnexpectedElement {
                got: other.to_string(),
                expected: "<coefficient>, <variable>, <sum> or <product>".to_string(),
            },
        )),
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

struct Writer {
    out: String,
    depth: usize,
}

impl Writer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn open(&mut self, name: &str) {
        self.line(&format!("<{name}>"));
        self.depth += 1;
    }

    fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.line(&format!("</{name}>"));
    }

    fn rules(&mut self, wrapper: &str, rules: &[Rule]) {
        self.open(wrapper);
        self.open("rules");
        for r in rules {
            self.line(&rule_xml(r));
        }
        self.close("rules");
        self.close(wrapper);
    }

    fn interpretation(&mut self, interp: &PolyInterpretation) {
        self.open("interpretation");
        for (sym, arity, poly) in interp.iter() {
            self.line(&format!(
                "<interpret>{}<arity>{arity}</arity><polynomial>{}</polynomial></interpret>",
                symbol_xml(sym),
                polynomial_xml(poly)
            ));
        }
        self.close("interpretation");
    }

    fn trs_proof(&mut self, proof: &Proof) {
        match proof {
            Proof::REmpty => self.line("<rIsEmpty/>"),
            Proof::RuleRemoval { interp, remaining, sub } => {
                self.open("ruleRemoval");
                self.interpretation(interp);
                self.rules("trs", remaining);
                self.trs_proof(sub);
                self.close("ruleRemoval");
            }
            Proof::DpTrans { dps, sub } => {
                self.open("dpTrans");
                self.rules("dps", dps);
                self.line("<markedSymbols>true</markedSymbols>");
                self.dp_proof(sub);
                self.close("dpTrans");
            }
        }
    }

    fn dp_proof(&mut self, proof: &DpProof) {
        match proof {
            DpProof::PEmpty => self.line("<pIsEmpty/>"),
            DpProof::DepGraphProc(components) => {
                self.open("depGraphProc");
                for c in components {
                    self.open("component");
                    self.rules("dps", &c.dps);
                    self.line(&format!("<realScc>{}</realScc>", c.real_scc));
                    if let Some(sub) = &c.sub {
                        self.dp_proof(sub);
                    }
                    self.close("component");
                }
                self.close("depGraphProc");
            }
            DpProof::RedPairProc { interp, remaining, sub } => {
                self.open("redPairProc");
                self.interpretation(interp);
                self.rules("dps", remaining);
                self.dp_proof(sub);
                self.close("redPairProc");
            }
        }
    }
}

pub fn symbol_xml(sym: &Symbol) -> String {
    match sym {
        Symbol::Name(n) => format!("<name>{}</name>", escape(n)),
        Symbol::Sharp(inner) => format!("<sharp>{}</sharp>", symbol_xml(inner)),
        Symbol::Labeled(inner, label) => format!("<labeledSymbol>{}{label}</labeledSymbol>", symbol_xml(inner)),
    }
}

pub fn term_xml(t: &Term) -> String {
    match t {
        Term::Var(v) => format!("<var>{}</var>", escape(v.as_str())),
        Term::App(f, args) => {
            let mut s = format!("<funapp>{}", symbol_xml(f));
            for a in args {
                let _ = write!(s, "<arg>{}</arg>", term_xml(a));
            }
            s.push_str("</funapp>");
            s
        }
    }
}

pub fn rule_xml(r: &Rule) -> String {
    format!(
        "<rule><lhs>{}</lhs><rhs>{}</rhs></rule>",
        term_xml(&r.lhs),
        term_xml(&r.rhs)
    )
}

pub fn polynomial_xml(p: &Polynomial) -> String {
    let mut s = String::from("<sum>");
    for (m, c) in p.terms() {
        let monomial_only = c.is_one() && !m.is_constant();
        s.push_str("<product>");
        if !monomial_only {
            let _ = write!(s, "<coefficient><integer>{c}</integer></coefficient>");
        }
        for (i, e) in m.exponents() {
            for _ in 0..e {
                let _ = write!(s, "<variable>{i}</variable>");
            }
        }
        s.push_str("</product>");
    }
    s.push_str("</sum>");
    s
}

/// Serializes a certificate. The output parses back to an equal value.
pub fn to_xml(cert: &Certificate) -> String {
    let mut w = Writer {
        out: String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"),
        depth: 0,
    };
    w.open("certificationProblem");
    w.open("input");
    w.open("trsInput");
    w.rules("trs", cert.input.rules());
    w.close("trsInput");
    w.close("input");
    w.open("proof");
    w.trs_proof(&cert.proof);
    w.close("proof");
    w.close("certificationProblem");
    w.out
}
