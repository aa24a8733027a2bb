//! XSD subset to algebraic datatypes, ordered by type dependency.
//!
//! A schema is read into [`XsdSchema`], lowered to a neutral [`TypeIr`]
//! (choices become sums, sequences become products, occurrence bounds
//! become `option`/`list` fields), and the definitions are grouped into
//! strongly connected components of the "is referenced by" relation and
//! emitted so that every group only refers to itself and earlier groups.
//!
//! Supported XSD: `schema`, `element` (with `name`, `ref`, `type` naming a
//! built-in simple type, `minOccurs`, `maxOccurs`), `complexType` as a
//! transparent wrapper, `sequence`, `choice`, `group` (`name` at top level,
//! `ref` inside content). `annotation` is skipped. Anything else is
//! reported as unsupported. Occurrence bounds are accepted on sequence
//! items only.
//!
//! # Output format
//!
//! One block per group, in dependency order:
//!
//! ```text
//! group symbol recursive
//!   sum symbol
//!     Symbol_name(name)
//!     Symbol_sharp(symbol)
//!     Symbol_labeledSymbol(symbol, label)
//! end
//! group rule
//!   product rule(term, term)
//! end
//! ```
//!
//! A group header lists its members separated by spaces and ends with
//! `recursive` when a member refers to the group itself. Field types are a
//! definition name, `text`, `option<F>` or `list<F>`.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use roxmltree::Node;
use thiserror::Error;

use crate::dp::{sccs, DepGraph};

const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxOccurs {
    Bounded(u32),
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Particle {
    pub ty: XsdType,
    pub min: u32,
    pub max: MaxOccurs,
}

impl Particle {
    pub fn once(ty: XsdType) -> Self {
        Particle {
            ty,
            min: 1,
            max: MaxOccurs::Bounded(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XsdType {
    Element {
        name: String,
        content: Box<XsdType>,
    },
    Sequence(Vec<Particle>),
    Choice(Vec<XsdType>),
    /// A reference to a top-level group or element.
    GroupRef(String),
    /// Simple (character) content.
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub body: XsdType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XsdSchema {
    pub definitions: Vec<Definition>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum XsdError {
    #[error("{line}:{col}: malformed schema: {message}")]
    XmlMalformed { line: u32, col: u32, message: String },
    #[error("unresolved reference {0:?}")]
    UnresolvedRef(String),
    #[error("{line}:{col}: unsupported XSD feature {feature}")]
    Unsupported { feature: String, line: u32, col: u32 },
}

type Result<T> = std::result::Result<T, XsdError>;

fn pos(node: Node) -> (u32, u32) {
    let p = node.document().text_pos_at(node.range().start);
    (p.row, p.col)
}

fn malformed(node: Node, message: impl Into<String>) -> XsdError {
    let (line, col) = pos(node);
    XsdError::XmlMalformed {
        line,
        col,
        message: message.into(),
    }
}

fn unsupported(node: Node, feature: impl Into<String>) -> XsdError {
    let (line, col) = pos(node);
    XsdError::Unsupported {
        feature: feature.into(),
        line,
        col,
    }
}

/// Element children other than annotations; non-whitespace text is an error.
fn content_children<'a, 'i>(node: Node<'a, 'i>) -> Result<Vec<Node<'a, 'i>>> {
    let mut out = Vec::new();
    for c in node.children() {
        if c.is_element() {
            if c.tag_name().name() != "annotation" {
                out.push(c);
            }
        } else if c.is_text() && !c.text().unwrap_or_default().trim().is_empty() {
            return Err(malformed(node, "unexpected text"));
        }
    }
    Ok(out)
}

fn check_attributes(node: Node, allowed: &[&str]) -> Result<()> {
    match node.attributes().find(|a| !allowed.contains(&a.name())) {
        Some(a) => Err(unsupported(node, format!("attribute {}", a.name()))),
        None => Ok(()),
    }
}

fn local(qname: &str) -> &str {
    qname.rsplit(':').next().unwrap_or(qname)
}

fn required_attr<'a>(node: Node<'a, '_>, attr: &str) -> Result<&'a str> {
    node.attribute(attr)
        .ok_or_else(|| malformed(node, format!("<{}> needs a {attr} attribute", node.tag_name().name())))
}

pub fn parse_xsd(bytes: &[u8]) -> Result<XsdSchema> {
    let text = std::str::from_utf8(bytes).map_err(|e| XsdError::XmlMalformed {
        line: 1,
        col: 1,
        message: format!("invalid UTF-8: {e}"),
    })?;
    let doc = roxmltree::Document::parse_with_options(
        text,
        roxmltree::ParsingOptions {
            allow_dtd: false,
            ..Default::default()
        },
    )
    .map_err(|e| XsdError::XmlMalformed {
        line: e.pos().row,
        col: e.pos().col,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "schema" {
        return Err(malformed(root, "root element must be <schema>"));
    }

    let mut definitions: Vec<Definition> = Vec::new();
    for child in content_children(root)? {
        let def = match child.tag_name().name() {
            "element" => {
                check_attributes(child, &["name", "type"])?;
                let name = required_attr(child, "name")?.to_string();
                let body = parse_element(child)?;
                Definition { name, body }
            }
            "group" => {
                check_attributes(child, &["name"])?;
                let name = required_attr(child, "name")?.to_string();
                let body = match content_children(child)?.as_slice() {
                    [inner] if matches!(inner.tag_name().name(), "sequence" | "choice") => {
                        check_attributes(*inner, &[])?;
                        parse_model(*inner)?
                    }
                    [inner] => return Err(unsupported(*inner, inner.tag_name().name())),
                    _ => return Err(malformed(child, "a group holds exactly one sequence or choice")),
                };
                Definition { name, body }
            }
            other => return Err(unsupported(child, other)),
        };
        if definitions.iter().any(|d| d.name == def.name) {
            return Err(malformed(child, format!("duplicate definition {:?}", def.name)));
        }
        definitions.push(def);
    }

    let schema = XsdSchema { definitions };
    let defined: HashSet<&str> = schema.definitions.iter().map(|d| d.name.as_str()).collect();
    for d in &schema.definitions {
        if let Some(missing) = refs_of(&d.body).into_iter().find(|r| !defined.contains(r.as_str())) {
            return Err(XsdError::UnresolvedRef(missing));
        }
    }
    Ok(schema)
}

fn refs_of(t: &XsdType) -> Vec<String> {
    let mut out = Vec::new();
    fn go(t: &XsdType, out: &mut Vec<String>) {
        match t {
            XsdType::Element { content, .. } => go(content, out),
            XsdType::Sequence(items) => items.iter().for_each(|p| go(&p.ty, out)),
            XsdType::Choice(alts) => alts.iter().for_each(|a| go(a, out)),
            XsdType::GroupRef(n) => out.push(n.clone()),
            XsdType::Text => {}
        }
    }
    go(t, &mut out);
    out
}

/// An `<element name=..>` with its content.
fn parse_element(node: Node) -> Result<XsdType> {
    let name = required_attr(node, "name")?.to_string();
    let children = content_children(node)?;
    let content = match (node.attribute("type"), children.as_slice()) {
        (Some(ty), []) => {
            let prefix = ty.split_once(':').map(|(p, _)| p);
            if node.lookup_namespace_uri(prefix) == Some(XSD_NS) {
                XsdType::Text
            } else {
                return Err(unsupported(node, format!("type reference {ty}")));
            }
        }
        (Some(_), _) => return Err(malformed(node, "element has both a type attribute and inline content")),
        (None, []) => XsdType::Text,
        (None, [ct]) if ct.tag_name().name() == "complexType" => parse_complex_type(*ct)?,
        (None, [other]) => return Err(unsupported(*other, other.tag_name().name())),
        (None, [_, extra, ..]) => return Err(malformed(*extra, "element has more than one content child")),
    };
    Ok(XsdType::Element {
        name,
        content: Box::new(content),
    })
}

fn parse_complex_type(node: Node) -> Result<XsdType> {
    check_attributes(node, &[])?;
    let children = content_children(node)?;
    match children.as_slice() {
        [] => Ok(XsdType::Sequence(Vec::new())),
        [inner] => match inner.tag_name().name() {
            "sequence" | "choice" => {
                check_attributes(*inner, &[])?;
                parse_model(*inner)
            }
            "group" => parse_group_ref(*inner, false),
            other => Err(unsupported(*inner, other)),
        },
        many => {
            let odd = many
                .iter()
                .find(|c| !matches!(c.tag_name().name(), "sequence" | "choice" | "group"))
                .unwrap_or(&many[1]);
            match odd.tag_name().name() {
                "sequence" | "choice" | "group" => Err(malformed(*odd, "complexType has more than one content model")),
                other => Err(unsupported(*odd, other)),
            }
        }
    }
}

fn parse_group_ref(node: Node, in_sequence: bool) -> Result<XsdType> {
    let allowed: &[&str] = if in_sequence {
        &["ref", "minOccurs", "maxOccurs"]
    } else {
        &["ref"]
    };
    check_attributes(node, allowed)?;
    if !content_children(node)?.is_empty() {
        return Err(malformed(node, "a group reference has no content"));
    }
    Ok(XsdType::GroupRef(local(required_attr(node, "ref")?).to_string()))
}

/// A `sequence` or `choice`, possibly nested.
fn parse_model(node: Node) -> Result<XsdType> {
    match node.tag_name().name() {
        "sequence" => {
            let items = content_children(node)?
                .into_iter()
                .map(|c| {
                    let (min, max) = occurs(c)?;
                    Ok(Particle {
                        ty: parse_item(c, true)?,
                        min,
                        max,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(XsdType::Sequence(items))
        }
        "choice" => {
            let alts = content_children(node)?
                .into_iter()
                .map(|c| parse_item(c, false))
                .collect::<Result<Vec<_>>>()?;
            if alts.is_empty() {
                return Err(malformed(node, "empty choice"));
            }
            Ok(XsdType::Choice(alts))
        }
        other => Err(unsupported(node, other)),
    }
}

/// An item of a sequence or an alternative of a choice. Occurrence
/// attributes are read by the caller and only allowed in sequences.
fn parse_item(node: Node, in_sequence: bool) -> Result<XsdType> {
    let occurs_attrs: &[&str] = if in_sequence { &["minOccurs", "maxOccurs"] } else { &[] };
    match node.tag_name().name() {
        "element" => {
            if let Some(r) = node.attribute("ref") {
                let allowed: Vec<&str> = ["ref"].iter().chain(occurs_attrs).copied().collect();
                check_attributes(node, &allowed)?;
                if !content_children(node)?.is_empty() {
                    return Err(malformed(node, "an element reference has no content"));
                }
                Ok(XsdType::GroupRef(local(r).to_string()))
            } else {
                let allowed: Vec<&str> = ["name", "type"].iter().chain(occurs_attrs).copied().collect();
                check_attributes(node, &allowed)?;
                parse_element(node)
            }
        }
        "group" => parse_group_ref(node, in_sequence),
        "sequence" | "choice" => {
            check_attributes(node, occurs_attrs)?;
            parse_model(node)
        }
        other => Err(unsupported(node, other)),
    }
}

fn occurs(node: Node) -> Result<(u32, MaxOccurs)> {
    let min = match node.attribute("minOccurs") {
        None => 1,
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| malformed(node, format!("bad minOccurs {s:?}")))?,
    };
    let max = match node.attribute("maxOccurs") {
        None => MaxOccurs::Bounded(1),
        Some(s) if s.trim() == "unbounded" => MaxOccurs::Unbounded,
        Some(s) => MaxOccurs::Bounded(
            s.trim()
                .parse()
                .map_err(|_| malformed(node, format!("bad maxOccurs {s:?}")))?,
        ),
    };
    if let MaxOccurs::Bounded(m) = max {
        if m == 0 || m < min {
            return Err(malformed(node, format!("occurrence bounds {min}..{m} are empty")));
        }
    }
    Ok((min, max))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Field {
    Ref(String),
    Optional(Box<Field>),
    List(Box<Field>),
    Text,
}

impl Field {
    fn refs(&self, out: &mut Vec<String>) {
        match self {
            Field::Ref(n) => out.push(n.clone()),
            Field::Optional(f) | Field::List(f) => f.refs(out),
            Field::Text => {}
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Ref(n) => f.write_str(n),
            Field::Optional(x) => write!(f, "option<{x}>"),
            Field::List(x) => write!(f, "list<{x}>"),
            Field::Text => f.write_str("text"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constructor {
    pub tag: String,
    pub fields: Vec<Field>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeBody {
    Sum(Vec<Constructor>),
    Product(Vec<Field>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub body: TypeBody,
}

impl TypeDef {
    /// Referenced definition names, in order, without duplicates.
    pub fn refs(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.body {
            TypeBody::Sum(cs) => cs.iter().flat_map(|c| &c.fields).for_each(|f| f.refs(&mut out)),
            TypeBody::Product(fs) => fs.iter().for_each(|f| f.refs(&mut out)),
        }
        let mut seen = HashSet::new();
        out.retain(|n| seen.insert(n.clone()));
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeIr {
    pub defs: Vec<TypeDef>,
}

struct Lowerer {
    taken: HashSet<String>,
}

impl Lowerer {
    fn fresh_name(&mut self, base: String) -> String {
        let mut name = base.clone();
        let mut k = 2;
        while self.taken.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    fn body(&mut self, owner: &str, content: &XsdType, aux: &mut Vec<TypeDef>) -> TypeBody {
        match content {
            XsdType::Choice(alts) => TypeBody::Sum(self.constructors(owner, alts, aux)),
            other => TypeBody::Product(self.fields(owner, other, aux)),
        }
    }

    fn constructors(&mut self, owner: &str, alts: &[XsdType], aux: &mut Vec<TypeDef>) -> Vec<Constructor> {
        let prefix = capitalize(owner);
        let mut flat = Vec::new();
        flatten_choice(alts, &mut flat);
        let mut tags = HashSet::new();
        flat.into_iter()
            .map(|alt| {
                let (suffix, fields) = match alt {
                    XsdType::Element { name, content } => {
                        (name.clone(), self.fields(&format!("{owner}_{name}"), content, aux))
                    }
                    XsdType::GroupRef(n) => (n.clone(), vec![Field::Ref(n.clone())]),
                    XsdType::Text => ("text".to_string(), vec![Field::Text]),
                    seq => ("seq".to_string(), self.fields(&format!("{owner}_seq"), seq, aux)),
                };
                let mut tag = format!("{prefix}_{suffix}");
                let mut k = 2;
                while !tags.insert(tag.clone()) {
                    tag = format!("{prefix}_{suffix}_{k}");
                    k += 1;
                }
                Constructor { tag, fields }
            })
            .collect()
    }

    fn fields(&mut self, ctx: &str, content: &XsdType, aux: &mut Vec<TypeDef>) -> Vec<Field> {
        match content {
            XsdType::Sequence(items) => items
                .iter()
                .map(|p| {
                    let f = self.field(ctx, &p.ty, aux);
                    match (p.min, p.max) {
                        (_, MaxOccurs::Unbounded) => Field::List(Box::new(f)),
                        (_, MaxOccurs::Bounded(m)) if m > 1 => Field::List(Box::new(f)),
                        (0, _) => Field::Optional(Box::new(f)),
                        _ => f,
                    }
                })
                .collect(),
            other => vec![self.field(ctx, other, aux)],
        }
    }

    fn field(&mut self, ctx: &str, ty: &XsdType, aux: &mut Vec<TypeDef>) -> Field {
        match ty {
            XsdType::GroupRef(n) => Field::Ref(n.clone()),
            XsdType::Text => Field::Text,
            XsdType::Element { name, content } => {
                let inner = format!("{ctx}_{name}");
                let mut fs = self.fields(&inner, content, aux);
                if fs.len() == 1 {
                    return fs.pop().expect("one field");
                }
                let name = self.fresh_name(inner);
                aux.push(TypeDef {
                    name: name.clone(),
                    body: TypeBody::Product(fs),
                });
                Field::Ref(name)
            }
            XsdType::Choice(alts) => {
                let name = self.fresh_name(format!("{ctx}_choice"));
                // Reserve the slot so the sum precedes the types it spawns.
                let slot = aux.len();
                aux.push(TypeDef {
                    name: name.clone(),
                    body: TypeBody::Sum(Vec::new()),
                });
                let cs = self.constructors(&name, alts, aux);
                aux[slot].body = TypeBody::Sum(cs);
                Field::Ref(name)
            }
            XsdType::Sequence(_) => {
                let inner = format!("{ctx}_seq");
                let mut fs = self.fields(&inner, ty, aux);
                if fs.len() == 1 {
                    return fs.pop().expect("one field");
                }
                let name = self.fresh_name(inner);
                aux.push(TypeDef {
                    name: name.clone(),
                    body: TypeBody::Product(fs),
                });
                Field::Ref(name)
            }
        }
    }
}

fn flatten_choice<'a>(alts: &'a [XsdType], out: &mut Vec<&'a XsdType>) {
    for a in alts {
        match a {
            XsdType::Choice(inner) => flatten_choice(inner, out),
            other => out.push(other),
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Lowers a schema to datatype definitions. Anonymous nested content that
/// cannot be a single field becomes an extra definition named after its
/// position (`owner_element`, `owner_choice`, ...), placed right after its
/// owner.
pub fn lower(schema: &XsdSchema) -> TypeIr {
    let mut lowerer = Lowerer {
        taken: schema.definitions.iter().map(|d| d.name.clone()).collect(),
    };
    let mut defs = Vec::new();
    for d in &schema.definitions {
        let content = match &d.body {
            XsdType::Element { content, .. } => content.as_ref(),
            other => other,
        };
        let mut aux = Vec::new();
        let body = lowerer.body(&d.name, content, &mut aux);
        defs.push(TypeDef {
            name: d.name.clone(),
            body,
        });
        defs.extend(aux);
    }
    TypeIr { defs }
}

/// Edges `(u, t)` between definition indices whenever `t` refers to `u`.
pub fn dependency_edges(ir: &TypeIr) -> BTreeSet<(usize, usize)> {
    let index = |n: &str| ir.defs.iter().position(|d| d.name == n);
    let mut edges = BTreeSet::new();
    for (t, def) in ir.defs.iter().enumerate() {
        for r in def.refs() {
            if let Some(u) = index(&r) {
                edges.insert((u, t));
            }
        }
    }
    edges
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGroup {
    /// Members in definition order.
    pub names: Vec<String>,
    pub recursive: bool,
}

/// Groups mutually recursive definitions and orders the groups so that
/// every definition comes after everything it refers to. Unordered groups
/// keep the order of their first definition.
pub fn order_types(ir: &TypeIr) -> Vec<TypeGroup> {
    let graph = DepGraph::new(ir.defs.len(), dependency_edges(ir));
    sccs(&graph)
        .into_iter()
        .map(|scc| TypeGroup {
            recursive: !scc.trivial,
            names: scc.nodes.iter().map(|&i| ir.defs[i].name.clone()).collect(),
        })
        .collect()
}

pub fn emit_ir(ir: &TypeIr, order: &[TypeGroup]) -> String {
    let mut out = String::new();
    for group in order {
        let _ = write!(out, "group {}", group.names.join(" "));
        if group.recursive {
            out.push_str(" recursive");
        }
        out.push('\n');
        for name in &group.names {
            let Some(def) = ir.defs.iter().find(|d| &d.name == name) else {
                continue;
            };
            match &def.body {
                TypeBody::Product(fields) => {
                    let _ = writeln!(out, "  product {}({})", def.name, join(fields));
                }
                TypeBody::Sum(cs) => {
                    let _ = writeln!(out, "  sum {}", def.name);
                    for c in cs {
                        let _ = writeln!(out, "    {}({})", c.tag, join(&c.fields));
                    }
                }
            }
        }
        out.push_str("end\n");
    }
    out
}

fn join(fields: &[Field]) -> String {
    fields.iter().map(Field::to_string).collect::<Vec<_>>().join(", ")
}

/// Parse, lower, order and render in one go.
pub fn xsd_to_ir_text(bytes: &[u8]) -> Result<String> {
    let schema = parse_xsd(bytes)?;
    let ir = lower(&schema);
    let order = order_types(&ir);
    Ok(emit_ir(&ir, &order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(body: &str) -> String {
        format!("<xs:schema xmlns:xs=\"{XSD_NS}\">{body}</xs:schema>")
    }

    const RULE: &str = r#"
<xs:element name="rule">
  <xs:complexType>
    <xs:sequence>
      <xs:element name="lhs">
        <xs:complexType>
          <xs:group ref="term"/>
        </xs:complexType>
      </xs:element>
      <xs:element name="rhs">
        <xs:complexType>
          <xs:group ref="term"/>
        </xs:complexType>
      </xs:element>
    </xs:sequence>
  </xs:complexType>
</xs:element>"#;

    const SYMBOL: &str = r#"
<xs:group name="symbol">
  <xs:choice>
    <xs:element ref="name"/>
    <xs:element name="sharp">
      <xs:complexType>
        <xs:sequence>
          <xs:group ref="symbol"/>
        </xs:sequence>
      </xs:complexType>
    </xs:element>
    <xs:element name="labeledSymbol">
      <xs:complexType>
        <xs:sequence>
          <xs:group ref="symbol"/>
          <xs:group ref="label"/>
        </xs:sequence>
      </xs:complexType>
    </xs:element>
  </xs:choice>
</xs:group>"#;

    const SUPPORT: &str = r#"
<xs:element name="name" type="xs:string"/>
<xs:group name="label"><xs:sequence><xs:element name="numberLabel" type="xs:integer"/></xs:sequence></xs:group>
<xs:group name="term"><xs:choice><xs:element name="var" type="xs:string"/><xs:element name="funapp"><xs:complexType><xs:sequence>
  <xs:group ref="symbol"/>
  <xs:element name="arg" minOccurs="0" maxOccurs="unbounded"><xs:complexType><xs:group ref="term"/></xs:complexType></xs:element>
</xs:sequence></xs:complexType></xs:element></xs:choice></xs:group>"#;

    fn r(n: &str) -> Field {
        Field::Ref(n.to_string())
    }

    #[test]
    fn parses_rule_element() {
        let s = parse_xsd(schema(&format!("{RULE}{SUPPORT}{SYMBOL}")).as_bytes()).unwrap();
        let rule = &s.definitions[0];
        let elem = |n: &str| {
            Particle::once(XsdType::Element {
                name: n.into(),
                content: Box::new(XsdType::GroupRef("term".into())),
            })
        };
        assert_eq!(
            rule.body,
            XsdType::Element {
                name: "rule".into(),
                content: Box::new(XsdType::Sequence(vec![elem("lhs"), elem("rhs")])),
            }
        );
    }

    #[test]
    fn lowers_symbol_and_rule() {
        let s = parse_xsd(schema(&format!("{RULE}{SUPPORT}{SYMBOL}")).as_bytes()).unwrap();
        let ir = lower(&s);
        let get = |n: &str| ir.defs.iter().find(|d| d.name == n).unwrap().body.clone();
        assert_eq!(get("rule"), TypeBody::Product(vec![r("term"), r("term")]));
        assert_eq!(
            get("symbol"),
            TypeBody::Sum(vec![
                Constructor {
                    tag: "Symbol_name".into(),
                    fields: vec![r("name")]
                },
                Constructor {
                    tag: "Symbol_sharp".into(),
                    fields: vec![r("symbol")]
                },
                Constructor {
                    tag: "Symbol_labeledSymbol".into(),
                    fields: vec![r("symbol"), r("label")]
                },
            ])
        );
        assert_eq!(
            get("term"),
            TypeBody::Sum(vec![
                Constructor {
                    tag: "Term_var".into(),
                    fields: vec![Field::Text]
                },
                Constructor {
                    tag: "Term_funapp".into(),
                    fields: vec![r("symbol"), Field::List(Box::new(r("term")))]
                },
            ])
        );
    }

    #[test]
    fn rules_list() {
        let s = parse_xsd(
            schema(r#"<xs:element name="rule" type="xs:string"/><xs:element name="rules"><xs:complexType><xs:sequence>
                <xs:element ref="rule" minOccurs="0" maxOccurs="unbounded"/></xs:sequence></xs:complexType></xs:element>"#)
            .as_bytes(),
        )
        .unwrap();
        let ir = lower(&s);
        assert_eq!(
            ir.defs[1].body,
            TypeBody::Product(vec![Field::List(Box::new(r("rule")))])
        );
    }

    #[test]
    fn orders_groups() {
        let s = parse_xsd(schema(&format!("{RULE}{SUPPORT}{SYMBOL}")).as_bytes()).unwrap();
        let ir = lower(&s);
        let order = order_types(&ir);
        let pos = |n: &str| order.iter().position(|g| g.names.iter().any(|m| m == n)).unwrap();
        assert!(pos("name") < pos("symbol"));
        assert!(pos("label") < pos("symbol"));
        assert!(pos("symbol") < pos("term"));
        assert!(pos("term") < pos("rule"));
        let sym = &order[pos("symbol")];
        assert_eq!(sym.names, vec!["symbol".to_string()]);
        assert!(sym.recursive);
    }

    #[test]
    fn chains_and_cycles() {
        let s = parse_xsd(
            schema(
                r#"<xs:group name="A"><xs:sequence><xs:group ref="B"/></xs:sequence></xs:group>
                      <xs:group name="B"><xs:sequence><xs:group ref="C"/></xs:sequence></xs:group>
                      <xs:group name="C"><xs:sequence/></xs:group>"#,
            )
            .as_bytes(),
        )
        .unwrap();
        let names: Vec<Vec<String>> = order_types(&lower(&s)).into_iter().map(|g| g.names).collect();
        assert_eq!(
            names,
            vec![vec!["C".to_string()], vec!["B".to_string()], vec!["A".to_string()]]
        );

        let s = parse_xsd(
            schema(
                r#"<xs:group name="A"><xs:sequence><xs:group ref="B"/></xs:sequence></xs:group>
                      <xs:group name="B"><xs:sequence><xs:group ref="A" minOccurs="0"/></xs:sequence></xs:group>"#,
            )
            .as_bytes(),
        )
        .unwrap();
        let order = order_types(&lower(&s));
        assert_eq!(order.len(), 1);
        assert_eq!(order[0].names, vec!["A".to_string(), "B".to_string()]);
        assert!(order[0].recursive);
    }

    #[test]
    fn emits_symbol_block() {
        let text = xsd_to_ir_text(schema(&format!("{RULE}{SUPPORT}{SYMBOL}")).as_bytes()).unwrap();
        assert!(text.contains(
            "group symbol recursive\n  sum symbol\n    Symbol_name(name)\n    Symbol_sharp(symbol)\n    Symbol_labeledSymbol(symbol, label)\nend\n"
        ));
        assert!(text.contains("group rule\n  product rule(term, term)\nend\n"));
        assert_eq!(xsd_to_ir_text(schema("").as_bytes()).unwrap(), "");
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_xsd(schema(r#"<xs:attribute name="a"/>"#).as_bytes()),
            Err(XsdError::Unsupported { .. })
        ));
        assert!(matches!(
            parse_xsd(schema(r#"<xs:group name="A"><xs:sequence><xs:group ref="Z"/></xs:sequence></xs:group>"#).as_bytes()),
            Err(XsdError::UnresolvedRef(n)) if n == "Z"
        ));
        assert!(matches!(
            parse_xsd(
                schema(r#"<xs:group name="A"><xs:choice><xs:element name="x" minOccurs="0"/></xs:choice></xs:group>"#)
                    .as_bytes()
            ),
            Err(XsdError::Unsupported { .. })
        ));
        assert!(matches!(parse_xsd(b"<xs:schema"), Err(XsdError::XmlMalformed { .. })));
    }

    #[test]
    fn anonymous_content_becomes_definitions() {
        let s = parse_xsd(
            schema(r#"<xs:element name="pair"><xs:complexType><xs:sequence>
                <xs:element name="both"><xs:complexType><xs:sequence><xs:element name="a" type="xs:string"/><xs:element name="b" type="xs:string"/></xs:sequence></xs:complexType></xs:element>
                <xs:choice><xs:element name="l" type="xs:string"/><xs:element name="r" type="xs:string"/></xs:choice>
            </xs:sequence></xs:complexType></xs:element>"#)
            .as_bytes(),
        )
        .unwrap();
        let ir = lower(&s);
        let names: Vec<&str> = ir.defs.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, vec!["pair", "pair_both", "pair_choice"]);
        assert_eq!(
            ir.defs[0].body,
            TypeBody::Product(vec![r("pair_both"), r("pair_choice")])
        );
        let order = order_types(&ir);
        assert_eq!(order.last().unwrap().names, vec!["pair".to_string()]);
    }
}
