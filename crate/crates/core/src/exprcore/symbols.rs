//! Coordinates, jet variables and parameters of one chart.

use std::collections::BTreeSet;

use super::expr::{generic_order, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("duplicate symbol name `{0}`")]
    Duplicate(String),
    #[error("invalid symbol name `{0}`")]
    Invalid(String),
    #[error("chart needs at least one coordinate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Coord(usize),
    Dependent,
    Jet1(usize),
    Jet2(usize, usize),
    Param,
}

/// Name registry for a chart `x^1..x^n`, a dependent variable `u`, its first
/// and second jets, free parameters and generic one-argument functions.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    coords: Vec<Symbol>,
    dep: Symbol,
    jet1: Vec<Symbol>,
    jet2: Vec<Vec<Symbol>>,
    params: Vec<Symbol>,
    generics: Vec<Symbol>,
}

fn valid_ident(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic()) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl SymbolTable {
    /// Chart with dependent variable `u` and generic function `F`.
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Self, SymbolError> {
        SymbolTable::with_dependent(coords, "u")
    }

    pub fn with_dependent<S: AsRef<str>>(coords: &[S], dep: &str) -> Result<Self, SymbolError> {
        if coords.is_empty() {
            return Err(SymbolError::Empty);
        }
        let coords: Vec<Symbol> = coords.iter().map(|c| Symbol::new(c.as_ref())).collect();
        let short = coords.iter().all(|c| c.name().chars().count() == 1);
        let join = |idx: &[usize]| -> String {
            let parts: Vec<&str> = idx.iter().map(|&i| coords[i].name()).collect();
            if short {
                format!("{dep}_{}", parts.concat())
            } else {
                format!("{dep}_{}", parts.join("_"))
            }
        };
        let n = coords.len();
        let jet1 = (0..n).map(|i| Symbol::new(&join(&[i]))).collect();
        let jet2 = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Symbol::new(&join(&[i.min(j), i.max(j)])))
                    .collect()
            })
            .collect();
        let t = SymbolTable {
            coords,
            dep: Symbol::new(dep),
            jet1,
            jet2,
            params: Vec::new(),
            generics: vec![Symbol::new("F")],
        };
        t.check()?;
        Ok(t)
    }

    fn names(&self) -> Vec<&Symbol> {
        let mut out: Vec<&Symbol> = self.coords.iter().collect();
        out.push(&self.dep);
        out.extend(self.jet1.iter());
        for i in 0..self.dim() {
            for j in i..self.dim() {
                out.push(&self.jet2[i][j]);
            }
        }
        out.extend(self.params.iter());
        out
    }

    fn check(&self) -> Result<(), SymbolError> {
        let mut seen = BTreeSet::new();
        for s in self.names() {
            if !valid_ident(s.name()) {
                return Err(SymbolError::Invalid(s.name().to_string()));
            }
            if !seen.insert(s.name()) {
                return Err(SymbolError::Duplicate(s.name().to_string()));
            }
        }
        for g in &self.generics {
            if seen.contains(g.name()) || seen.contains(g.name().to_lowercase().as_str()) {
                return Err(SymbolError::Duplicate(g.name().to_string()));
            }
        }
        Ok(())
    }

    pub fn add_param(&mut self, name: &str) -> Result<Symbol, SymbolError> {
        let s = Symbol::new(name);
        if self.params.contains(&s) {
            return Ok(s);
        }
        self.params.push(s.clone());
        if let Err(e) = self.check() {
            self.params.pop();
            return Err(e);
        }
        Ok(s)
    }

    pub fn with_param(mut self, name: &str) -> Result<Self, SymbolError> {
        self.add_param(name)?;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &Symbol {
        &self.coords[i]
    }

    pub fn u(&self) -> &Symbol {
        &self.dep
    }

    pub fn u1(&self, i: usize) -> &Symbol {
        &self.jet1[i]
    }

    pub fn u2(&self, i: usize, j: usize) -> &Symbol {
        &self.jet2[i][j]
    }

    pub fn params(&self) -> &[Symbol] {
        &self.params
    }

    pub fn generic_base(&self) -> &Symbol {
        &self.generics[0]
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolKind> {
        if let Some(i) = self.coords.iter().position(|s| s.name() == name) {
            return Some(SymbolKind::Coord(i));
        }
        if self.dep.name() == name {
            return Some(SymbolKind::Dependent);
        }
        if let Some(i) = self.jet1.iter().position(|s| s.name() == name) {
            return Some(SymbolKind::Jet1(i));
        }
        for i in 0..self.dim() {
            for j in i..self.dim() {
                if self.jet2[i][j].name() == name {
                    return Some(SymbolKind::Jet2(i, j));
                }
            }
        }
        if self.params.iter().any(|s| s.name() == name) {
            return Some(SymbolKind::Param);
        }
        None
    }

    /// Resolves a function-call name to a generic base and derivative order.
    pub fn generic_call(&self, name: &str) -> Option<(Symbol, u32)> {
        self.generics
            .iter()
            .find_map(|g| generic_order(g.name(), name).map(|o| (g.clone(), o)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_names_follow_chart() {
        let t = SymbolTable::new(&["x", "y", "z"]).unwrap();
        assert_eq!(t.u1(1).name(), "u_y");
        assert_eq!(t.u2(2, 0).name(), "u_xz");
        assert_eq!(t.u2(0, 2), t.u2(2, 0));
        assert_eq!(t.lookup("u_yz"), Some(SymbolKind::Jet2(1, 2)));
    }

    #[test]
    fn long_names_use_separators() {
        let t = SymbolTable::new(&["x1", "x2"]).unwrap();
        assert_eq!(t.u2(0, 1).name(), "u_x1_x2");
    }

    #[test]
    fn duplicates_rejected() {
        assert!(SymbolTable::new(&["x", "x"]).is_err());
        let t = SymbolTable::new(&["x", "y"]).unwrap();
        assert!(t.with_param("u_x").is_err());
    }

    #[test]
    fn generic_names_resolve() {
        let t = SymbolTable::new(&["x"]).unwrap();
        assert_eq!(t.generic_call("fp").map(|(_, o)| o), Some(2));
        assert_eq!(t.generic_call("F").map(|(_, o)| o), Some(0));
    }
}
