//! Symmetry reductions of nonlocal PDEs to ODEs from declared invariants.
//!
//! A reduction substitutes `u(x,t) = A(x,t)·p(y(x,t))`. Reflected copies of
//! `u` become `p(y)` or `p(-y)` depending on how `y` behaves under the
//! reflection. The result is an ODE in a one-variable scope `(y; p)`.

mod apply;
mod catalog;
mod ode;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Jet};
use crate::parser::{canonicalize, canonicalize_equation, Block, Document, ParseError};
use crate::scope::Scope;
use crate::system::EquationSystem;

pub use apply::{apply_reduction, strip_nonvanishing};
pub use catalog::{builtin_catalog, find_entry, load_entries, run_entry, CatalogEntry, EntryReport, StageReport};
pub use ode::{change_of_variable, compare_canonical, integrate_once, matching_form};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("not an invariant reduction: {0}")]
    NotInvariant(String),
    #[error("parity declaration `{declared}` does not match: reflecting y gives {got}")]
    Parity { declared: &'static str, got: String },
    #[error("not integrable by pattern: {0}")]
    NotIntegrable(String),
    #[error("change of variable is not invertible: {0}")]
    NotInvertible(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
}

pub type Result<T, E = ReductionError> = std::result::Result<T, E>;

/// How the invariant behaves under the reflections of the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    /// `y` does not involve any reflected axis.
    Fixed,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::Fixed => "fixed",
        }
    }

    fn parse(s: &str) -> Option<Parity> {
        match s {
            "even" => Some(Parity::Even),
            "odd" => Some(Parity::Odd),
            "fixed" => Some(Parity::Fixed),
            _ => None,
        }
    }
}

/// A positive auxiliary coordinate `s = expr(x,t)` kept as a parameter,
/// e.g. `s = 2dt - b` on the chart `2dt - b > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    pub name: String,
    pub expr: Expr,
}

/// One stage after the direct reduction.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Integrate once, naming the new constant.
    Integrate { constant: String, expected: Expr },
    /// `y = map(z)`, `p̂(z) = p(y)`.
    Change { variable: String, map: Expr, expected: Expr },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionSpec {
    pub name: String,
    /// Name of the invariant variable (`y`).
    pub variable: String,
    /// Name of the new dependent variable (`p`).
    pub function: String,
    pub invariant: Expr,
    /// `(axis, x_axis = f(y, ...))` eliminating one base variable.
    pub inverse: (usize, Expr),
    pub multiplier: Expr,
    pub parity: Parity,
    pub charts: Vec<Chart>,
    pub expected_local: Option<bool>,
    pub expected: Expr,
    pub steps: Vec<Step>,
}

/// An ODE in the scope `(y; p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedOde {
    pub scope: Scope,
    pub expr: Expr,
}

impl ReducedOde {
    pub fn new(scope: Scope, expr: Expr) -> Self {
        ReducedOde { scope, expr }
    }

    /// True iff no reflected jets of `p` remain.
    pub fn is_local(&self) -> bool {
        self.expr.jets().iter().all(|j| j.mask == 0 && !j.has_shift())
    }

    /// Distinct jet families `(mask, conj)` present.
    pub fn families(&self) -> Vec<(u32, bool)> {
        let mut f: Vec<_> = self.expr.jets().iter().map(|j| (j.mask, j.conj)).collect();
        f.sort();
        f.dedup();
        f
    }

    pub fn to_text(&self) -> String {
        format!("{} = 0", self.expr.display(&self.scope))
    }

    pub fn variable(&self) -> &str {
        &self.scope.vars[0]
    }

    pub fn jet(&self, order: u32) -> Expr {
        Expr::jet(Jet::new(0, vec![order]))
    }
}

pub(crate) fn target_scope(variable: &str, function: &str, complex: bool) -> Scope {
    Scope::new(&[variable], &[function]).complex(complex)
}

fn ident<'a>(b: &'a Block, key: &str) -> Result<&'a str> {
    let it = b.require(key)?;
    it.value(0)?
        .as_ident()
        .ok_or_else(|| ParseError::new(format!("`{key}` expects a name"), it.span).into())
}

/// `name = expr` with `name` returned as a string.
fn named_equation(b: &Block, key: &str, scope: &Scope) -> Result<(String, Expr)> {
    let it = b.require(key)?;
    let v = it.value(0)?;
    let (l, r) = v.as_equation().ok_or_else(|| ParseError::new(format!("`{key}` expects `name = expression`"), v.span))?;
    let name = l.as_ident().ok_or_else(|| ParseError::new("expected a name", l.span))?;
    Ok((name.to_string(), canonicalize(r, scope)?))
}

impl ReductionSpec {
    /// Reads a `reduce name { ... }` block. Expressions in `x, t` use the
    /// document scope; expected ODEs use the target scope `(y; p)`.
    pub fn from_block(b: &Block, doc: &Document) -> Result<ReductionSpec> {
        let scope = &doc.scope;
        let name = b.name.clone().ok_or_else(|| ParseError::new("`reduce` block needs a name", b.span))?;
        let function = ident(b, "function")?.to_string();
        let (variable, invariant) = named_equation(b, "invariant", scope)?;
        let (inv_var, inv_expr) = named_equation(b, "inverse", scope)?;
        let axis = scope
            .var_index(&inv_var)
            .ok_or_else(|| ParseError::new(format!("`inverse` must solve for a variable, not `{inv_var}`"), b.span))?;
        let multiplier = canonicalize(b.require("multiplier")?.value(0)?, scope)?;
        let parity_item = b.require("parity")?;
        let parity = parity_item
            .value(0)?
            .as_ident()
            .and_then(Parity::parse)
            .ok_or_else(|| ParseError::new("`parity` is even, odd or fixed", parity_item.span))?;
        let mut charts = Vec::new();
        for it in b.items_with("chart") {
            for v in &it.values {
                let (l, r) = v.as_equation().ok_or_else(|| ParseError::new("`chart` expects `s = expression`", v.span))?;
                let n = l.as_ident().ok_or_else(|| ParseError::new("expected a name", l.span))?;
                charts.push(Chart { name: n.to_string(), expr: canonicalize(r, scope)? });
            }
        }
        let expected_local = match b.item("local") {
            None => None,
            Some(it) => match it.value(0)?.as_ident() {
                Some("true") => Some(true),
                Some("false") => Some(false),
                _ => return Err(ParseError::new("`local` is true or false", it.span).into()),
            },
        };
        let complex = scope.complex;
        let target = target_scope(&variable, &function, complex);
        let expected = canonicalize_equation(b.require("reduced")?.value(0)?, &target)?;
        let mut steps = Vec::new();
        let mut current = target.clone();
        for it in &b.items {
            match it.key.as_str() {
                "integrate" => {
                    let c = it.value(0)?.as_ident().ok_or_else(|| ParseError::new("`integrate` names the constant", it.span))?;
                    let exp_item = b.require("integrated")?;
                    steps.push(Step::Integrate {
                        constant: c.to_string(),
                        expected: canonicalize_equation(exp_item.value(0)?, &current)?,
                    });
                }
                "change" => {
                    let v = it.value(0)?;
                    let (l, r) = v.as_equation().ok_or_else(|| ParseError::new("`change [z]` expects `y = f(z)`", v.span))?;
                    if l.as_ident() != Some(current.vars[0].as_ref()) {
                        return Err(ParseError::new(format!("`change` must start with `{} =`", current.vars[0]), l.span).into());
                    }
                    let z = it.label_required()?;
                    let next = target_scope(z, &function, complex);
                    let map = canonicalize(r, &next)?;
                    let exp_item = b.require("changed")?;
                    steps.push(Step::Change {
                        variable: z.to_string(),
                        map,
                        expected: canonicalize_equation(exp_item.value(0)?, &next)?,
                    });
                    current = next;
                }
                _ => {}
            }
        }
        Ok(ReductionSpec {
            name,
            variable,
            function,
            invariant,
            inverse: (axis, inv_expr),
            multiplier,
            parity,
            charts,
            expected_local,
            expected,
            steps,
        })
    }

    pub fn target_scope(&self, sys: &EquationSystem) -> Scope {
        target_scope(&self.variable, &self.function, sys.is_complex())
    }
}

/// All `reduce` blocks of a document.
pub fn parse_reductions(doc: &Document) -> Result<Vec<ReductionSpec>> {
    doc.blocks("reduce").map(|b| ReductionSpec::from_block(b, doc)).collect()
}
