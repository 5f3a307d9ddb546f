use std::fmt::Write as _;

use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrality {
    Continuous,
    Binary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable<T> {
    pub name: String,
    pub lower: T,
    pub upper: T,
    pub integrality: Integrality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    fn lp_symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearConstraint<T> {
    pub name: String,
    pub terms: Vec<(VarId, T)>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T: Scalar> LinearConstraint<T> {
    pub fn lhs(&self, values: &[T]) -> T {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates the constraint (zero if satisfied).
    pub fn violation(&self, values: &[T]) -> T {
        let lhs = self.lhs(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(T::zero()),
            Relation::Ge => (self.rhs - lhs).max(T::zero()),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program (or binary integer program), always minimised.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LpProblem<T> {
    pub name: String,
    pub variables: Vec<Variable<T>>,
    pub constraints: Vec<LinearConstraint<T>>,
    /// Objective coefficient per variable.
    pub objective: Vec<T>,
    /// Free-form lines emitted as comments in the LP file header.
    pub comments: Vec<String>,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(name: impl Into<String>) -> Self {
        LpProblem {
            name: name.into(),
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            comments: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: T, upper: T) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integrality: Integrality::Continuous,
        });
        self.objective.push(T::zero());
        VarId(self.variables.len() - 1)
    }

    pub fn add_free_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, T::neg_infinity(), T::infinity())
    }

    pub fn add_nonneg_var(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, T::zero(), T::infinity())
    }

    pub fn add_binary_var(&mut self, name: impl Into<String>) -> VarId {
        let id = self.add_var(name, T::zero(), T::one());
        self.variables[id.0].integrality = Integrality::Binary;
        id
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(VarId, T)>, relation: Relation, rhs: T) {
        self.constraints.push(LinearConstraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
    }

    /// Adds `coef` to the objective coefficient of `var`.
    pub fn add_objective(&mut self, var: VarId, coef: T) {
        self.objective[var.0] += coef;
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integrality == Integrality::Binary)
    }

    pub fn objective_value(&self, values: &[T]) -> T {
        self.objective.iter().zip(values).map(|(&c, &x)| c * x).sum()
    }

    /// Largest violation over constraints and variable bounds.
    pub fn max_violation(&self, values: &[T]) -> T {
        let rows = self.constraints.iter().map(|c| c.violation(values));
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(T::zero()));
        rows.chain(bounds).fold(T::zero(), T::max)
    }

    /// Checks that every reference is declared and every coefficient finite.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.variables.len();
        if self.objective.len() != n {
            return Err("objective length differs from variable count".into());
        }
        if let Some(i) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(format!("objective coefficient of {} is not finite", self.variables[i].name));
        }
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(format!("variable {} has invalid bounds", v.name));
            }
        }
        for c in &self.constraints {
            if !c.rhs.is_finite() {
                return Err(format!("constraint {} has a non-finite right-hand side", c.name));
            }
            for &(v, a) in &c.terms {
                if v.0 >= n {
                    return Err(format!("constraint {} references undeclared variable {}", c.name, v.0));
                }
                if !a.is_finite() {
                    return Err(format!("constraint {} has a non-finite coefficient", c.name));
                }
            }
        }
        Ok(())
    }

    /// Renders the problem in CPLEX LP file syntax.
    pub fn to_lp_format(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "\\* {} *\\", sanitize_comment(&self.name));
        for line in &self.comments {
            let _ = writeln!(out, "\\* {} *\\", sanitize_comment(line));
        }
        out.push_str("Minimize\n");
        let obj: Vec<(VarId, T)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != T::zero())
            .map(|(i, &c)| (VarId(i), c))
            .collect();
        if obj.is_empty() && !self.variables.is_empty() {
            write_expr(&mut out, " obj:", &[(VarId(0), T::zero())], &self.variables);
        } else {
            write_expr(&mut out, " obj:", &obj, &self.variables);
        }
        out.push('\n');
        out.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let label = if c.name.is_empty() { format!("c{i}") } else { c.name.clone() };
            write_expr(&mut out, &format!(" {label}:"), &c.terms, &self.variables);
            let _ = writeln!(out, " {} {}", c.relation.lp_symbol(), fmt_num(c.rhs));
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            let (lo, hi) = (v.lower, v.upper);
            if v.integrality == Integrality::Binary {
                continue;
            }
            if lo == T::neg_infinity() && hi == T::infinity() {
                let _ = writeln!(out, " {} free", v.name);
            } else if lo == T::zero() && hi == T::infinity() {
                // default bounds
            } else {
                let lo_s = if lo == T::neg_infinity() { "-inf".to_string() } else { fmt_num(lo) };
                let hi_s = if hi == T::infinity() { "+inf".to_string() } else { fmt_num(hi) };
                let _ = writeln!(out, " {lo_s} <= {} <= {hi_s}", v.name);
            }
        }
        let binaries: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| v.integrality == Integrality::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in binaries.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize_comment(s: &str) -> String {
    s.replace("*\\", "* \\").replace('\n', " ")
}

fn fmt_num<T: Scalar>(v: T) -> String {
    let v = v.as_f64();
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

/// Writes `label t1 + t2 ...`, wrapping long expressions onto continuation
/// lines.
fn write_expr<T: Scalar>(out: &mut String, label: &str, terms: &[(VarId, T)], vars: &[Variable<T>]) {
    let mut line = String::from(label);
    for (k, &(v, a)) in terms.iter().enumerate() {
        let af = a.as_f64();
        let sign = if af < 0.0 { "-" } else { "+" };
        let mag = af.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", fmt_num(T::of(mag))) };
        let term = if k == 0 && sign == "+" {
            format!(" {coef}{}", vars[v.0].name)
        } else {
            format!(" {sign} {coef}{}", vars[v.0].name)
        };
        if line.len() + term.len() > 200 {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push_str(&term);
    }
    out.push_str(&line);
}
