use crate::expr::print::Names;
use crate::expr::Symbol;

/// Declared independent and dependent variable names.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Scope {
    pub vars: Vec<Symbol>,
    pub deps: Vec<Symbol>,
    /// Dependent variables declared complex-valued.
    pub complex: bool,
}

impl Scope {
    pub fn new(vars: &[&str], deps: &[&str]) -> Self {
        Scope {
            vars: vars.iter().map(|s| Symbol::from(*s)).collect(),
            deps: deps.iter().map(|s| Symbol::from(*s)).collect(),
            complex: false,
        }
    }

    pub fn complex(mut self, complex: bool) -> Self {
        self.complex = complex;
        self
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| &**v == name)
    }

    pub fn dep_index(&self, name: &str) -> Option<usize> {
        self.deps.iter().position(|v| &**v == name)
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.var_index(name).is_some() || self.dep_index(name).is_some()
    }

    /// `vars x, t; deps q;` header in the input language.
    pub fn header(&self) -> String {
        let join = |v: &[Symbol]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ");
        let complex = if self.complex { " complex" } else { "" };
        format!("vars {};\ndeps {}{};\n", join(&self.vars), join(&self.deps), complex)
    }
}

impl Names for Scope {
    fn var_name(&self, axis: usize) -> String {
        self.vars.get(axis).map(|s| s.to_string()).unwrap_or_else(|| format!("x{axis}"))
    }

    fn dep_name(&self, dep: usize) -> String {
        self.deps.get(dep).map(|s| s.to_string()).unwrap_or_else(|| format!("u{dep}"))
    }
}
