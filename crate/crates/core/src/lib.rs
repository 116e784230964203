//! Symbolic and numeric tools for Lie point symmetries of nonlocal
//! differential equations with reflected arguments.

pub mod coeff;
pub mod dde;
pub mod expr;
pub mod linalg;
pub mod numeric;
pub mod parser;
pub mod reduction;
pub mod scope;
pub mod symmetry;
pub mod system;
pub mod testing;

pub use coeff::GaussRat;
pub use expr::{Atom, Expr, ExprError, Func, Jet};
pub use scope::Scope;
pub use system::{EquationSystem, SystemError};
pub use parser::{parse_document, parse_expression, parse_generator, parse_system, ParseError, SourceSpan};
pub use symmetry::Generator;
