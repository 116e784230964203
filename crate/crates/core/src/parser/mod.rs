//! The `.nsym` input language.
//!
//! See `docs/grammar.md` for the grammar. Files start with `vars` and `deps`
//! declarations; every other identifier is a parameter.

mod ast;
mod grammar;
mod lexer;

use std::fmt;

use thiserror::Error;

pub use ast::{canonicalize, canonicalize_equation, BinOp, Node, Tree};

use crate::expr::{Expr, Jet};
use crate::scope::Scope;
use crate::symmetry::Generator;
use crate::system::{Equation, EquationSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(begin: usize, end: usize, line: usize, column: usize) -> Self {
        SourceSpan { begin, end: end.max(begin), line, column }
    }

    /// Extends the span to end at byte `end`.
    pub fn to(self, end: usize) -> Self {
        SourceSpan { end: end.max(self.begin), ..self }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError { message: message.into(), span }
    }

    /// The error with the offending source line and a caret underline.
    pub fn render(&self, src: &str) -> String {
        let line = src.lines().nth(self.span.line.saturating_sub(1)).unwrap_or("");
        let width = src[self.span.begin.min(src.len())..self.span.end.min(src.len())].chars().count().max(1);
        format!(
            "error at {}: {}\n  | {}\n  | {}{}",
            self.span,
            self.message,
            line,
            " ".repeat(self.span.column.saturating_sub(1)),
            "^".repeat(width)
        )
    }
}

/// `key [label]: values;`
#[derive(Clone, Debug, PartialEq)]
pub struct Item {
    pub key: String,
    pub label: Option<(String, SourceSpan)>,
    pub values: Vec<Tree>,
    pub span: SourceSpan,
}

impl Item {
    pub fn label_str(&self) -> Option<&str> {
        self.label.as_ref().map(|(s, _)| s.as_str())
    }

    pub fn value(&self, idx: usize) -> Result<&Tree, ParseError> {
        self.values
            .get(idx)
            .ok_or_else(|| ParseError::new(format!("`{}` needs at least {} value(s)", self.key, idx + 1), self.span))
    }

    pub fn label_required(&self) -> Result<&str, ParseError> {
        self.label_str().ok_or_else(|| ParseError::new(format!("`{}` needs a label", self.key), self.span))
    }
}

/// `kind [name] { items }`
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub kind: String,
    pub name: Option<String>,
    pub items: Vec<Item>,
    pub span: SourceSpan,
}

impl Block {
    pub fn items_with<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Item> + 'a {
        self.items.iter().filter(move |i| i.key == key)
    }

    pub fn item(&self, key: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.key == key)
    }

    pub fn require(&self, key: &str) -> Result<&Item, ParseError> {
        self.item(key).ok_or_else(|| ParseError::new(format!("block is missing `{key}`"), self.span))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Vars(Vec<(String, SourceSpan)>, SourceSpan),
    Deps(Vec<(String, SourceSpan)>, bool, SourceSpan),
    Solve { jet: Tree, equation: (String, SourceSpan), span: SourceSpan },
    Item(Item),
    Block(Block),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub scope: Scope,
    pub statements: Vec<Statement>,
    pub source_len: usize,
}

pub fn parse_document(src: &str) -> Result<Document, ParseError> {
    let toks = lexer::tokenize(src)?;
    let mut p = grammar::Parser::new(toks);
    let mut statements = Vec::new();
    while !p.at_eof() {
        statements.push(p.statement()?);
    }
    let mut scope = Scope::default();
    for s in &statements {
        match s {
            Statement::Vars(names, _) | Statement::Deps(names, _, _) => {
                for (n, sp) in names {
                    if scope.is_declared(n) || ast::RESERVED.contains(&n.as_str()) {
                        return Err(ParseError::new(format!("`{n}` declared twice or reserved"), *sp));
                    }
                    if let Statement::Vars(..) = s {
                        scope.vars.push(n.as_str().into());
                    } else {
                        scope.deps.push(n.as_str().into());
                    }
                }
                if let Statement::Deps(_, true, _) = s {
                    scope.complex = true;
                }
            }
            _ => {}
        }
    }
    if scope.vars.len() > 31 {
        return Err(ParseError::new("at most 31 independent variables", SourceSpan::default()));
    }
    Ok(Document { scope, statements, source_len: src.len() })
}

impl Document {
    pub fn items(&self) -> impl Iterator<Item = &Item> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Item(i) => Some(i),
            _ => None,
        })
    }

    pub fn items_with<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a Item> + 'a {
        self.items().filter(move |i| i.key == key)
    }

    pub fn blocks<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Block> + 'a {
        self.statements.iter().filter_map(move |s| match s {
            Statement::Block(b) if b.kind == kind => Some(b),
            _ => None,
        })
    }

    pub fn end_span(&self) -> SourceSpan {
        SourceSpan::new(self.source_len, self.source_len, 1, 1)
    }

    /// The equations and `solve` directives of the document.
    pub fn system(&self) -> Result<EquationSystem, ParseError> {
        let mut equations = Vec::new();
        let mut spans = Vec::new();
        for it in self.items_with("eq") {
            let name = it.label_required()?.to_string();
            if it.values.len() != 1 {
                return Err(ParseError::new("`eq` takes one equation", it.span));
            }
            equations.push(Equation { name, expr: canonicalize_equation(&it.values[0], &self.scope)? });
            spans.push(it.span);
        }
        if equations.is_empty() {
            return Err(ParseError::new("empty system: no `eq` statements", self.end_span()));
        }
        let mut sys = EquationSystem::new(self.scope.clone(), equations)
            .map_err(|e| ParseError::new(e.to_string(), spans[0]))?;
        for s in &self.statements {
            if let Statement::Solve { jet, equation, span } = s {
                let j = canonicalize(jet, &self.scope)?;
                let j = match j.as_leaf() {
                    Some(crate::expr::Atom::Jet(j)) => j.clone(),
                    _ => return Err(ParseError::new("`solve` expects a single jet such as D[q,t]", jet.span)),
                };
                sys.solve_for(j, &equation.0).map_err(|e| ParseError::new(e.to_string(), *span))?;
            }
        }
        Ok(sys)
    }

    pub fn generators(&self) -> Result<Vec<Generator>, ParseError> {
        self.blocks("gen").map(|b| generator_from_block(b, &self.scope)).collect()
    }

    /// Values of `param name = value;` items.
    pub fn params(&self) -> Result<Vec<(String, Expr)>, ParseError> {
        self.items_with("param")
            .flat_map(|it| it.values.iter())
            .map(|v| {
                let (l, r) = v
                    .as_equation()
                    .ok_or_else(|| ParseError::new("expected `name = value`", v.span))?;
                let name = l.as_ident().ok_or_else(|| ParseError::new("expected a parameter name", l.span))?;
                Ok((name.to_string(), canonicalize(r, &self.scope)?))
            })
            .collect()
    }
}

pub fn parse_expression(src: &str, scope: &Scope) -> Result<Expr, ParseError> {
    let toks = lexer::tokenize(src)?;
    let mut p = grammar::Parser::new(toks);
    let tree = p.expression()?;
    if !p.at_eof() {
        return Err(ParseError::new("trailing input after expression", tree.span.to(src.len()).with_begin(tree.span.end)));
    }
    canonicalize(&tree, scope)
}

impl SourceSpan {
    fn with_begin(self, begin: usize) -> Self {
        SourceSpan { begin, end: self.end.max(begin), ..self }
    }
}

pub fn parse_system(src: &str) -> Result<EquationSystem, ParseError> {
    parse_document(src)?.system()
}

/// Parses one `gen { ... }` block. When the text has no declarations the
/// given scope is used.
pub fn parse_generator(src: &str, scope: &Scope) -> Result<Generator, ParseError> {
    let mut doc = parse_document(src)?;
    if doc.scope.vars.is_empty() {
        doc.scope = scope.clone();
    }
    let mut gens = doc.generators()?;
    match gens.len() {
        1 => Ok(gens.remove(0)),
        0 => Err(ParseError::new("no `gen` block", doc.end_span())),
        _ => Err(ParseError::new("more than one `gen` block", doc.end_span())),
    }
}

fn generator_from_block(b: &Block, scope: &Scope) -> Result<Generator, ParseError> {
    let dim = scope.dim();
    let mut xi = vec![Expr::zero(); dim];
    let mut phi = vec![Expr::zero(); scope.deps.len()];
    let mut seen = vec![false; dim + scope.deps.len()];
    for it in &b.items {
        let slot = if let Some(v) = it.key.strip_prefix("xi_") {
            scope.var_index(v)
        } else if let Some(d) = it.key.strip_prefix("phi_") {
            scope.dep_index(d).map(|k| dim + k)
        } else {
            None
        };
        let Some(slot) = slot else {
            return Err(ParseError::new(format!("unknown generator component `{}`", it.key), it.span));
        };
        if it.values.len() != 1 {
            return Err(ParseError::new("a component takes one expression", it.span));
        }
        let e = canonicalize(&it.values[0], scope)?;
        if let Some(j) = e.jets().into_iter().find(|j: &Jet| j.order() > 0 || j.mask != 0 || j.has_shift()) {
            let what = if j.order() > 0 { "derivatives" } else { "reflected arguments" };
            return Err(ParseError::new(
                format!("generator components may not contain {what} (point symmetries only)"),
                it.values[0].span,
            ));
        }
        seen[slot] = true;
        if slot < dim {
            xi[slot] = e;
        } else {
            phi[slot - dim] = e;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        let name = if missing < dim {
            format!("xi_{}", scope.vars[missing])
        } else {
            format!("phi_{}", scope.deps[missing - dim])
        };
        return Err(ParseError::new(format!("generator is missing `{name}`"), b.span));
    }
    Ok(Generator { name: b.name.clone(), xi, phi })
}

#[cfg(test)]
mod tests;
