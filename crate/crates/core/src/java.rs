//! Java method extraction on top of the tree-sitter Java grammar.
//!
//! A compilation unit is split into one [`MethodUnit`] per concrete method or
//! constructor. Each unit can be rendered back into a small, parseable
//! "method file" that keeps the package, the enclosing class headers, the
//! Javadoc and the verbatim declaration, and nothing else.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tree_sitter::{Node, Parser, Tree};

use crate::model::DocField;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JavaError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot build a method file name for `{0}`")]
    UnencodableName(String),
}

/// One concrete method or constructor extracted from a compilation unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodUnit {
    /// Dotted package name, empty for the default package.
    pub package_name: String,
    /// Enclosing type names, outermost first. Anonymous classes appear as
    /// `anon$<n>`, numbered in textual order within the compilation unit.
    pub class_chain: Vec<String>,
    /// Constructors carry the class name.
    pub method_name: String,
    /// Erased simple type names; varargs are rendered as arrays.
    pub param_types: Vec<String>,
    pub javadoc: Option<String>,
    /// Verbatim declaration text, modifiers through the closing brace.
    pub body_text: String,
    pub origin_path: String,
    pub start_line: usize,
    pub end_line: usize,
}

thread_local! {
    static PARSER: RefCell<Parser> = RefCell::new({
        let mut parser = Parser::new();
        parser
            .set_language(&tree_sitter_java::LANGUAGE.into())
            .expect("tree-sitter-java grammar is ABI compatible");
        parser
    });
}

fn parse_lenient(source: &str) -> Tree {
    PARSER.with(|p| {
        p.borrow_mut()
            .parse(source, None)
            .expect("parser has a language and no timeout")
    })
}

/// Parses a compilation unit, failing on any syntax error or missing token.
pub fn parse_java(source: &str) -> Result<Tree, JavaError> {
    let tree = parse_lenient(source);
    if tree.root_node().has_error() {
        let (line, message) = first_error(tree.root_node(), source)
            .unwrap_or((1, "syntax error".to_string()));
        return Err(JavaError::Parse { line, message });
    }
    Ok(tree)
}

fn first_error(node: Node<'_>, source: &str) -> Option<(usize, String)> {
    if node.is_missing() {
        return Some((
            node.start_position().row + 1,
            format!("missing `{}`", node.kind()),
        ));
    }
    if node.is_error() {
        let text = &source[node.byte_range()];
        let snippet: String = text.chars().take(40).collect();
        return Some((
            node.start_position().row + 1,
            format!("unexpected `{}`", snippet.trim()),
        ));
    }
    let mut cursor = node.walk();
    let found = node
        .children(&mut cursor)
        .filter(|c| c.has_error())
        .find_map(|c| first_error(c, source));
    found
}

fn text<'s>(node: Node<'_>, source: &'s str) -> &'s str {
    &source[node.byte_range()]
}

struct Splitter<'s> {
    source: &'s str,
    origin_path: &'s str,
    package_name: String,
    chain: Vec<String>,
    // record component types for the innermost enclosing records
    record_params: Vec<Option<Vec<String>>>,
    anon_count: usize,
    units: Vec<MethodUnit>,
}

const TYPE_DECLARATIONS: [&str; 5] = [
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];

impl<'s> Splitter<'s> {
    fn visit(&mut self, node: Node<'_>) {
        let kind = node.kind();
        if TYPE_DECLARATIONS.contains(&kind) {
            let name = node
                .child_by_field_name("name")
                .map(|n| text(n, self.source).to_string())
                .unwrap_or_default();
            let record = (kind == "record_declaration").then(|| {
                node.child_by_field_name("parameters")
                    .map(|p| self.param_types(p))
                    .unwrap_or_default()
            });
            self.chain.push(name);
            self.record_params.push(record);
            self.visit_children(node);
            self.record_params.pop();
            self.chain.pop();
            return;
        }

        match kind {
            "method_declaration" => {
                if node.child_by_field_name("body").is_some() {
                    let params = node
                        .child_by_field_name("parameters")
                        .map(|p| self.param_types(p))
                        .unwrap_or_default();
                    self.emit(node, params);
                }
                self.visit_children(node);
            }
            "constructor_declaration" => {
                let params = node
                    .child_by_field_name("parameters")
                    .map(|p| self.param_types(p))
                    .unwrap_or_default();
                self.emit(node, params);
                self.visit_children(node);
            }
            "compact_constructor_declaration" => {
                let params = self
                    .record_params
                    .last()
                    .cloned()
                    .flatten()
                    .unwrap_or_default();
                self.emit(node, params);
                self.visit_children(node);
            }
            "object_creation_expression" | "enum_constant" => {
                let mut cursor = node.walk();
                for child in node.children(&mut cursor) {
                    if child.kind() == "class_body" {
                        self.anon_count += 1;
                        self.chain.push(format!("anon${}", self.anon_count));
                        self.record_params.push(None);
                        self.visit_children(child);
                        self.record_params.pop();
                        self.chain.pop();
                    } else {
                        self.visit(child);
                    }
                }
            }
            _ => self.visit_children(node),
        }
    }

    fn visit_children(&mut self, node: Node<'_>) {
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            self.visit(child);
        }
    }

    fn emit(&mut self, node: Node<'_>, param_types: Vec<String>) {
        if self.chain.is_empty() {
            return;
        }
        let method_name = node
            .child_by_field_name("name")
            .map(|n| text(n, self.source).to_string())
            .unwrap_or_default();
        self.units.push(MethodUnit {
            package_name: self.package_name.clone(),
            class_chain: self.chain.clone(),
            method_name,
            param_types,
            javadoc: javadoc_of(node, self.source),
            body_text: text(node, self.source).to_string(),
            origin_path: self.origin_path.to_string(),
            start_line: node.start_position().row + 1,
            end_line: node.end_position().row + 1,
        });
    }

    fn param_types(&self, params: Node<'_>) -> Vec<String> {
        let mut out = Vec::new();
        let mut cursor = params.walk();
        for param in params.named_children(&mut cursor) {
            match param.kind() {
                "formal_parameter" => {
                    let mut ty = param
                        .child_by_field_name("type")
                        .map(|t| erase_type(t, self.source))
                        .unwrap_or_default();
                    if let Some(dims) = param.child_by_field_name("dimensions") {
                        ty.push_str(&"[]".repeat(count_dimensions(dims)));
                    }
                    out.push(ty);
                }
                "spread_parameter" => {
                    let mut inner = param.walk();
                    let ty = param
                        .named_children(&mut inner)
                        .find(|c| is_type_node(c.kind()))
                        .map(|t| erase_type(t, self.source))
                        .unwrap_or_default();
                    out.push(format!("{ty}[]"));
                }
                _ => {}
            }
        }
        out
    }
}

fn is_type_node(kind: &str) -> bool {
    matches!(
        kind,
        "type_identifier"
            | "scoped_type_identifier"
            | "generic_type"
            | "array_type"
            | "integral_type"
            | "floating_point_type"
            | "boolean_type"
            | "void_type"
            | "annotated_type"
    )
}

fn count_dimensions(dims: Node<'_>) -> usize {
    let mut cursor = dims.walk();
    let count = dims.children(&mut cursor).filter(|c| c.kind() == "[").count();
    count
}

/// Raw simple name of a type: generics dropped, packages dropped, arrays kept.
fn erase_type(node: Node<'_>, source: &str) -> String {
    match node.kind() {
        "generic_type" => {
            let mut cursor = node.walk();
            let base = node
                .named_children(&mut cursor)
                .find(|c| c.kind() != "type_arguments");
            base.map(|b| erase_type(b, source)).unwrap_or_default()
        }
        "scoped_type_identifier" => {
            let mut cursor = node.walk();
            let last = node
                .named_children(&mut cursor)
                .filter(|c| c.kind() == "type_identifier")
                .last();
            last.map(|l| text(l, source).to_string())
                .unwrap_or_else(|| squeeze(text(node, source)))
        }
        "array_type" => {
            let element = node
                .child_by_field_name("element")
                .map(|e| erase_type(e, source))
                .unwrap_or_default();
            let dims = node
                .child_by_field_name("dimensions")
                .map(count_dimensions)
                .unwrap_or(1);
            format!("{element}{}", "[]".repeat(dims))
        }
        "annotated_type" => {
            let mut cursor = node.walk();
            let inner = node
                .named_children(&mut cursor)
                .find(|c| !c.kind().ends_with("annotation"));
            inner.map(|i| erase_type(i, source)).unwrap_or_default()
        }
        _ => squeeze(text(node, source)),
    }
}

fn squeeze(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn javadoc_of(node: Node<'_>, source: &str) -> Option<String> {
    let prev = node.prev_sibling()?;
    if prev.kind() != "block_comment" {
        return None;
    }
    let comment = text(prev, source);
    if !comment.starts_with("/**") || comment == "/**/" {
        return None;
    }
    let gap = &source[prev.end_byte()..node.start_byte()];
    gap.trim().is_empty().then(|| comment.to_string())
}

fn package_of(root: Node<'_>, source: &str) -> String {
    let mut cursor = root.walk();
    let package = root
        .named_children(&mut cursor)
        .find(|c| c.kind() == "package_declaration");
    let Some(package) = package else {
        return String::new();
    };
    let mut inner = package.walk();
    let name = package
        .named_children(&mut inner)
        .find(|c| matches!(c.kind(), "scoped_identifier" | "identifier"));
    name.map(|n| squeeze(text(n, source))).unwrap_or_default()
}

/// Extracts every concrete method and constructor of `source`.
///
/// Bodiless declarations (abstract, interface, native, annotation members)
/// produce nothing. Methods of local and anonymous classes are emitted as
/// their own units.
pub fn split_compilation_unit(source: &str, origin_path: &str) -> Result<Vec<MethodUnit>, JavaError> {
    let tree = parse_java(source)?;
    let root = tree.root_node();
    let mut splitter = Splitter {
        source,
        origin_path,
        package_name: package_of(root, source),
        chain: Vec::new(),
        record_params: Vec::new(),
        anon_count: 0,
        units: Vec::new(),
    };
    splitter.visit(root);
    Ok(splitter.units)
}

/// Renders the standalone method file for one unit.
pub fn render_method_file(unit: &MethodUnit) -> String {
    let mut out = String::with_capacity(unit.body_text.len() + 128);
    if !unit.package_name.is_empty() {
        let _ = writeln!(out, "package {};", unit.package_name);
    }
    for class in &unit.class_chain {
        let _ = writeln!(out, "class {class} {{");
    }
    if let Some(doc) = &unit.javadoc {
        out.push_str(doc);
        out.push('\n');
    }
    out.push_str(&unit.body_text);
    out.push('\n');
    for _ in &unit.class_chain {
        out.push_str("}\n");
    }
    out
}

fn is_filename_safe(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b"_$#(),.[]-".contains(&b)
}

fn percent_encode(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for &b in raw.as_bytes() {
        if is_filename_safe(b) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

fn percent_decode(name: &str) -> Option<String> {
    let bytes = name.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = name.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

/// `Outer$Inner#name(T1,T2).java`, with unsafe bytes percent-encoded.
pub fn method_file_name(unit: &MethodUnit) -> Result<String, JavaError> {
    if unit.class_chain.is_empty()
        || unit.class_chain.iter().any(String::is_empty)
        || unit.method_name.is_empty()
    {
        return Err(JavaError::UnencodableName(format!(
            "{}#{}",
            unit.class_chain.join("$"),
            unit.method_name
        )));
    }
    let raw = format!(
        "{}#{}({}).java",
        unit.class_chain.join("$"),
        unit.method_name,
        unit.param_types.join(",")
    );
    Ok(percent_encode(&raw))
}

/// File names for all units of one compilation unit, made unique.
///
/// Erased signatures are distinct for ordinary members, but two local
/// classes of the same name can still collide; later duplicates get a
/// `$<n>` suffix after the parameter list (`C#m()$2.java`).
pub fn method_file_names(units: &[MethodUnit]) -> Result<Vec<String>, JavaError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    units
        .iter()
        .map(|unit| {
            let name = method_file_name(unit)?;
            let count = seen.entry(name.clone()).or_insert(0);
            *count += 1;
            Ok(if *count == 1 {
                name
            } else {
                format!("{}${}.java", name.trim_end_matches(".java"), count)
            })
        })
        .collect()
}

/// The pieces of a method file name, decoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodFileName {
    /// Everything before `#`, i.e. the `$`-joined class chain.
    pub chain: String,
    pub method_name: String,
    pub params: Vec<String>,
}

impl MethodFileName {
    /// Outermost class of the chain.
    pub fn outer_class(&self) -> &str {
        self.chain.split('$').next().unwrap_or(&self.chain)
    }
}

/// Inverse of [`method_file_name`] for the parts the techniques need.
/// Accepts a bare file name or a path whose last component is the file.
pub fn parse_method_file_name(path: &str) -> Option<MethodFileName> {
    let file = path.rsplit('/').next()?;
    let decoded = percent_decode(file.strip_suffix(".java")?)?;
    let (chain, rest) = decoded.split_once('#')?;
    let (method_name, rest) = rest.split_once('(')?;
    let close = rest.rfind(')')?;
    let params = &rest[..close];
    if chain.is_empty() || method_name.is_empty() {
        return None;
    }
    Some(MethodFileName {
        chain: chain.to_string(),
        method_name: method_name.to_string(),
        params: if params.is_empty() {
            Vec::new()
        } else {
            params.split(',').map(str::to_string).collect()
        },
    })
}

/// Class names, method names, other identifiers and comments of a Java
/// source, each joined into one text per field. Syntax errors are tolerated.
pub fn extract_fields(source: &str) -> BTreeMap<DocField, String> {
    let tree = parse_lenient(source);
    let mut buckets: BTreeMap<DocField, Vec<&str>> = DocField::STRUCTURAL
        .iter()
        .map(|f| (*f, Vec::new()))
        .collect();

    let mut stack = vec![tree.root_node()];
    while let Some(node) = stack.pop() {
        let kind = node.kind();
        match kind {
            "line_comment" | "block_comment" => {
                buckets.get_mut(&DocField::Comments).unwrap().push(text(node, source));
                continue;
            }
            "identifier" | "type_identifier" => {
                let field = match node.parent() {
                    Some(p)
                        if p.child_by_field_name("name") == Some(node)
                            && TYPE_DECLARATIONS.contains(&p.kind()) =>
                    {
                        DocField::ClassNames
                    }
                    Some(p)
                        if p.child_by_field_name("name") == Some(node)
                            && matches!(
                                p.kind(),
                                "method_declaration"
                                    | "constructor_declaration"
                                    | "compact_constructor_declaration"
                            ) =>
                    {
                        DocField::MethodNames
                    }
                    _ => DocField::Identifiers,
                };
                buckets.get_mut(&field).unwrap().push(text(node, source));
                continue;
            }
            _ => {}
        }
        let mut cursor = node.walk();
        let children: Vec<Node<'_>> = node.children(&mut cursor).collect();
        // reversed so the stack pops in document order
        stack.extend(children.into_iter().rev());
    }

    buckets
        .into_iter()
        .map(|(field, parts)| (field, parts.join("\n")))
        .collect()
}
