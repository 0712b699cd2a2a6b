//! Interned symbols and role-tagged variable tables.

use crate::error::{Error, Result};
use indexmap::IndexMap;
use std::fmt;
use std::sync::Arc;

/// An interned variable name. Equality, ordering and hashing all go by the
/// name itself, so symbol order is stable across runs regardless of creation
/// order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Intern a name. Names follow identifier syntax: a letter followed by
    /// letters, digits or underscores.
    pub fn new(name: &str) -> Symbol {
        Symbol(Arc::from(name))
    }

    /// The name as a string slice.
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Symbol {
        Symbol::new(s)
    }
}

/// What a variable stands for. Ghost and antifield variables are only legal
/// inside the graded algebra of [`crate::brst`]; the scalar expression parser
/// rejects them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// A chart coordinate with its position in the chart.
    Chart(usize),
    /// A symbolic constant (for example a mass parameter in a metric).
    Param,
    /// A fiber coordinate of some bundle.
    Fiber,
    /// A jet variable (a formal derivative coordinate).
    Jet,
    /// An odd ghost generator.
    Ghost,
    /// An antifield generator.
    Antifield,
}

impl Role {
    /// True for roles admissible inside ordinary scalar expressions.
    pub fn scalar_legal(self) -> bool {
        !matches!(self, Role::Ghost | Role::Antifield)
    }

    fn describe(self) -> &'static str {
        match self {
            Role::Chart(_) => "a chart coordinate",
            Role::Param => "a parameter",
            Role::Fiber => "a fiber coordinate",
            Role::Jet => "a jet variable",
            Role::Ghost => "a ghost",
            Role::Antifield => "an antifield",
        }
    }
}

/// An ordered list of variables with role tags. Declaration order is kept
/// (it determines default sampling order in diagnostics), lookups go by name.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    entries: IndexMap<Symbol, Role>,
}

impl VarTable {
    /// An empty table.
    pub fn new() -> VarTable {
        VarTable::default()
    }

    /// Convenience constructor: every name becomes a parameter.
    pub fn with_vars(names: &[&str]) -> VarTable {
        let mut t = VarTable::new();
        for n in names {
            t.add(Symbol::new(n), Role::Param).expect("duplicate in with_vars");
        }
        t
    }

    /// Register a variable. Duplicate names are an error.
    pub fn add(&mut self, sym: Symbol, role: Role) -> Result<Symbol> {
        if self.entries.contains_key(&sym) {
            return Err(Error::DuplicateVariable(sym.to_string()));
        }
        self.entries.insert(sym.clone(), role);
        Ok(sym)
    }

    /// Look a name up.
    pub fn get(&self, name: &str) -> Option<(Symbol, Role)> {
        self.entries.get_key_value(&Symbol::new(name)).map(|(s, r)| (s.clone(), *r))
    }

    /// The role of a symbol, if registered.
    pub fn role(&self, sym: &Symbol) -> Option<Role> {
        self.entries.get(sym).copied()
    }

    /// Resolve a name for use in a scalar expression, rejecting ghost and
    /// antifield variables.
    pub fn resolve_scalar(&self, name: &str) -> Result<Symbol> {
        match self.get(name) {
            None => Err(Error::UnknownIdentifier(name.to_string())),
            Some((_, role)) if !role.scalar_legal() => {
                Err(Error::IllegalRole(name.to_string(), role.describe()))
            }
            Some((sym, _)) => Ok(sym),
        }
    }

    /// All variables in declaration order.
    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, Role)> {
        self.entries.iter().map(|(s, r)| (s, *r))
    }

    /// The chart coordinates sorted by their chart position.
    pub fn chart_coords(&self) -> Vec<Symbol> {
        let mut coords: Vec<(usize, Symbol)> = self
            .entries
            .iter()
            .filter_map(|(s, r)| match r {
                Role::Chart(i) => Some((*i, s.clone())),
                _ => None,
            })
            .collect();
        coords.sort_by_key(|(i, _)| *i);
        coords.into_iter().map(|(_, s)| s).collect()
    }

    /// Number of registered variables.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when no variable is registered.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merge another table into this one; clashing names must agree on role.
    pub fn absorb(&mut self, other: &VarTable) -> Result<()> {
        for (s, r) in other.iter() {
            match self.entries.get(s) {
                None => {
                    self.entries.insert(s.clone(), r);
                }
                Some(existing) if *existing == r => {}
                Some(_) => return Err(Error::DuplicateVariable(s.to_string())),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_registration_errors() {
        let mut t = VarTable::new();
        t.add(Symbol::new("x"), Role::Chart(0)).unwrap();
        assert!(matches!(
            t.add(Symbol::new("x"), Role::Param),
            Err(Error::DuplicateVariable(_))
        ));
    }

    #[test]
    fn ghost_variables_are_rejected_for_scalars() {
        let mut t = VarTable::new();
        t.add(Symbol::new("c0"), Role::Ghost).unwrap();
        assert!(matches!(t.resolve_scalar("c0"), Err(Error::IllegalRole(..))));
        assert!(matches!(t.resolve_scalar("nope"), Err(Error::UnknownIdentifier(_))));
    }

    #[test]
    fn chart_coords_sorted_by_position() {
        let mut t = VarTable::new();
        t.add(Symbol::new("y"), Role::Chart(1)).unwrap();
        t.add(Symbol::new("x"), Role::Chart(0)).unwrap();
        let names: Vec<String> = t.chart_coords().iter().map(|s| s.to_string()).collect();
        assert_eq!(names, ["x", "y"]);
    }
}
