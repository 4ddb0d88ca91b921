//! The solver-agnostic model: variables, linear constraints, objective.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul};

use super::MilpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

/// `Σ c_i x_i + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(v: VarId, c: f64) -> Self {
        Self {
            terms: vec![(v, c)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, v: VarId, c: f64) -> &mut Self {
        self.terms.push((v, c));
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        self.terms.extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
        self.constant += other.constant * scale;
        self
    }

    /// Merges repeated variables and drops zero coefficients, keeping first
    /// occurrence order.
    pub fn simplified(&self) -> Self {
        let mut order: Vec<VarId> = Vec::new();
        let mut coef: HashMap<VarId, f64> = HashMap::new();
        for &(v, c) in &self.terms {
            let e = coef.entry(v).or_insert_with(|| {
                order.push(v);
                0.0
            });
            *e += c;
        }
        Self {
            terms: order
                .into_iter()
                .filter_map(|v| {
                    let c = coef[&v];
                    (c != 0.0).then_some((v, c))
                })
                .collect(),
            constant: self.constant,
        }
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * values[v.0]).sum::<f64>()
    }
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<&[(VarId, f64)]> for LinExpr {
    fn from(terms: &[(VarId, f64)]) -> Self {
        Self {
            terms: terms.to_vec(),
            constant: 0.0,
        }
    }
}

impl From<Vec<(VarId, f64)>> for LinExpr {
    fn from(terms: Vec<(VarId, f64)>) -> Self {
        Self {
            terms,
            constant: 0.0,
        }
    }
}

impl Add for LinExpr {
    type Output = LinExpr;

    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_expr(&rhs, 1.0);
        self
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;

    fn mul(mut self, rhs: f64) -> LinExpr {
        self.terms.iter_mut().for_each(|t| t.1 *= rhs);
        self.constant *= rhs;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

/// `Σ c_i x_i  sense  rhs`; constants are folded into `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violate the constraint (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => (a - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - a).max(0.0),
            Sense::Eq => (a - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Pure feasibility; written as a constant-zero objective.
    Feasibility,
    Minimize(LinExpr),
    Maximize(LinExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpModel {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Objective,
    names: HashMap<String, VarId>,
    constraint_names: HashMap<String, usize>,
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}

/// Letters, digits, `_` and `.`, starting with a letter.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        && name.len() <= 255
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Objective::Feasibility,
            names: HashMap::new(),
            constraint_names: HashMap::new(),
        }
    }

    pub fn add_var(&mut self, name: &str, kind: VarKind, lower: f64, upper: f64) -> Result<VarId, MilpError> {
        if !is_valid_name(name) {
            return Err(MilpError::InvalidName(name.to_string()));
        }
        if self.names.contains_key(name) || self.constraint_names.contains_key(name) {
            return Err(MilpError::DuplicateName(name.to_string()));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(MilpError::InvalidBounds {
                name: name.to_string(),
                lower,
                upper,
            });
        }
        let id = VarId(self.variables.len());
        self.variables.push(Variable {
            name: name.to_string(),
            kind,
            lower,
            upper,
        });
        self.names.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_binary(&mut self, name: &str) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_integer(&mut self, name: &str, lower: f64, upper: f64) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Integer, lower, upper)
    }

    pub fn add_continuous(&mut self, name: &str, lower: f64, upper: f64) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    pub fn add_constraint(
        &mut self,
        name: &str,
        expr: impl Into<LinExpr>,
        sense: Sense,
        rhs: f64,
    ) -> Result<(), MilpError> {
        if !is_valid_name(name) {
            return Err(MilpError::InvalidName(name.to_string()));
        }
        if self.constraint_names.contains_key(name) || self.names.contains_key(name) {
            return Err(MilpError::DuplicateName(name.to_string()));
        }
        let expr = expr.into().simplified();
        if let Some(&(v, _)) = expr.terms.iter().find(|(v, _)| v.0 >= self.variables.len()) {
            return Err(MilpError::UnknownVariable(format!("#{} in constraint {name}", v.0)));
        }
        let rhs = rhs - expr.constant;
        if !rhs.is_finite() || expr.terms.iter().any(|t| !t.1.is_finite()) {
            return Err(MilpError::NonFinite(name.to_string()));
        }
        self.constraint_names.insert(name.to_string(), self.constraints.len());
        self.constraints.push(Constraint {
            name: name.to_string(),
            terms: expr.terms,
            sense,
            rhs,
        });
        Ok(())
    }

    pub fn set_objective(&mut self, objective: Objective) -> Result<(), MilpError> {
        if let Objective::Minimize(e) | Objective::Maximize(e) = &objective {
            if e.terms.iter().any(|(v, _)| v.0 >= self.variables.len()) {
                return Err(MilpError::UnknownVariable("in objective".into()));
            }
        }
        self.objective = objective;
        Ok(())
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn has_constraint(&self, name: &str) -> bool {
        self.constraint_names.contains_key(name)
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    /// Tightens the bounds of an existing variable.
    pub fn restrict_bounds(&mut self, v: VarId, lower: f64, upper: f64) -> Result<(), MilpError> {
        let var = &mut self.variables[v.0];
        let (lo, hi) = (var.lower.max(lower), var.upper.min(upper));
        if lo > hi {
            return Err(MilpError::InvalidBounds {
                name: var.name.clone(),
                lower: lo,
                upper: hi,
            });
        }
        var.lower = lo;
        var.upper = hi;
        Ok(())
    }

    /// Copies every variable and constraint of `other` under `prefix.`
    /// and returns where each of its variables landed. The objective of
    /// `other` is dropped.
    pub fn absorb(&mut self, prefix: &str, other: &MilpModel) -> Result<Vec<VarId>, MilpError> {
        let rename = |n: &str| {
            if prefix.is_empty() {
                n.to_string()
            } else {
                format!("{prefix}.{n}")
            }
        };
        let mut map = Vec::with_capacity(other.variables.len());
        for v in &other.variables {
            map.push(self.add_var(&rename(&v.name), v.kind, v.lower, v.upper)?);
        }
        for c in &other.constraints {
            let terms: Vec<(VarId, f64)> = c.terms.iter().map(|&(v, k)| (map[v.0], k)).collect();
            self.add_constraint(&rename(&c.name), terms, c.sense, c.rhs)?;
        }
        Ok(map)
    }

    /// Disjoint union of several models, each under its own prefix.
    pub fn merge(parts: &[(&str, &MilpModel)]) -> Result<(MilpModel, Vec<Vec<VarId>>), MilpError> {
        let mut merged = MilpModel::new();
        let maps = parts
            .iter()
            .map(|(prefix, m)| merged.absorb(prefix, m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((merged, maps))
    }

    /// Largest bound, integrality or constraint violation of `values`,
    /// with a description of where it occurs.
    pub fn max_violation(&self, values: &[f64]) -> (f64, String) {
        let mut worst = (0.0, String::new());
        let mut note = |amount: f64, what: &dyn Fn() -> String| {
            if amount > worst.0 {
                worst = (amount, what());
            }
        };
        for (var, &v) in self.variables.iter().zip(values) {
            note(var.lower - v, &|| format!("lower bound of {}", var.name));
            note(v - var.upper, &|| format!("upper bound of {}", var.name));
            if var.kind != VarKind::Continuous {
                note((v - v.round()).abs(), &|| format!("integrality of {}", var.name));
            }
        }
        for c in &self.constraints {
            note(c.violation(values), &|| format!("constraint {}", c.name));
        }
        worst
    }

    pub fn objective_value(&self, values: &[f64]) -> Option<f64> {
        match &self.objective {
            Objective::Feasibility => None,
            Objective::Minimize(e) | Objective::Maximize(e) => Some(e.evaluate(values)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_is_a_disjoint_union() {
        let mut a = MilpModel::new();
        for n in ["x", "y", "z"] {
            a.add_continuous(n, 0.0, 1.0).unwrap();
        }
        let mut b = MilpModel::new();
        let vs: Vec<VarId> = ["x", "y", "u", "w"].iter().map(|n| b.add_binary(n).unwrap()).collect();
        b.add_constraint("c", vec![(vs[0], 1.0), (vs[3], 1.0)], Sense::Le, 1.0).unwrap();
        let (m, maps) = MilpModel::merge(&[("a", &a), ("b", &b)]).unwrap();
        assert_eq!(m.var_count(), 7);
        assert_eq!(m.constraints().len(), 1);
        assert_eq!(m.variable(maps[1][3]).name, "b.w");
        assert_eq!(m.constraints()[0].terms, vec![(maps[1][0], 1.0), (maps[1][3], 1.0)]);
        let mut c = a.clone();
        assert!(matches!(c.absorb("", &a), Err(MilpError::DuplicateName(_))));
    }

    #[test]
    fn names_and_references_are_checked() {
        let mut m = MilpModel::new();
        assert!(m.add_binary("1x").is_err());
        assert!(m.add_binary("x y").is_err());
        let x = m.add_binary("x").unwrap();
        assert!(m.add_binary("x").is_err());
        assert!(m.add_constraint("c", vec![(VarId(5), 1.0)], Sense::Ge, 0.0).is_err());
        assert!(m.add_constraint("x", vec![(x, 1.0)], Sense::Ge, 0.0).is_err());
        assert!(m.add_continuous("y", 2.0, 1.0).is_err());
        assert!(m.add_continuous("y", f64::NAN, 1.0).is_err());
    }

    #[test]
    fn constants_fold_into_rhs_and_terms_merge() {
        let mut m = MilpModel::new();
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        let mut e = LinExpr::term(x, 2.0);
        e.add_term(x, 1.0).add_constant(4.0);
        m.add_constraint("c", e, Sense::Le, 10.0).unwrap();
        let c = &m.constraints()[0];
        assert_eq!(c.terms, vec![(x, 3.0)]);
        assert_eq!(c.rhs, 6.0);
        assert_eq!(c.violation(&[3.0]), 3.0);
        assert_eq!(m.max_violation(&[2.0]).0, 0.0);
    }

    #[test]
    fn binaries_are_unit_bounded() {
        let mut m = MilpModel::new();
        let b = m.add_var("b", VarKind::Binary, -5.0, 9.0).unwrap();
        assert_eq!((m.variable(b).lower, m.variable(b).upper), (0.0, 1.0));
        let (amount, what) = m.max_violation(&[0.5]);
        assert_eq!(amount, 0.5);
        assert!(what.contains("integrality"));
    }
}
