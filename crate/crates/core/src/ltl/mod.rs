//! Linear temporal logic over comparison atoms.
//!
//! Atoms compare arithmetic terms built from program variables. A primed
//! variable (`cnt'`) names the value after one invocation of the component,
//! an unprimed one the value before it.

mod ground;
mod lexer;
mod parser;
mod render;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use ground::{ground_check, GroundingViolation};
pub use parser::{parse_ltl, parse_property_file, ParseError, PropertyLine};
pub use render::render_ltl;
pub(crate) use render::float_literal;

/// A scalar value in a program state or a formula literal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    UInt(u64),
    Float(f64),
}

impl Value {
    /// Integer view used for exact comparison. `None` for floats.
    pub fn as_i128(self) -> Option<i128> {
        match self {
            Value::Bool(b) => Some(b as i128),
            Value::Int(i) => Some(i as i128),
            Value::UInt(u) => Some(u as i128),
            Value::Float(_) => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Bool(b) => b as u8 as f64,
            Value::Int(i) => i as f64,
            Value::UInt(u) => u as f64,
            Value::Float(f) => f,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Int(i) => write!(f, "{i}"),
            Value::UInt(u) => write!(f, "{u}"),
            Value::Float(x) => f.write_str(&render::float_literal(*x)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarRef {
    pub name: String,
    pub primed: bool,
}

impl VarRef {
    pub fn new(name: impl Into<String>) -> Self {
        VarRef { name: name.into(), primed: false }
    }

    pub fn primed(name: impl Into<String>) -> Self {
        VarRef { name: name.into(), primed: true }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// Arithmetic term. Multiplication and division are deliberately absent.
#[derive(Debug, Clone, PartialEq)]
pub enum NumExpr {
    Var(VarRef),
    Lit(Value),
    Add(Box<NumExpr>, Box<NumExpr>),
    Sub(Box<NumExpr>, Box<NumExpr>),
}

impl NumExpr {
    pub fn var(name: &str) -> Self {
        NumExpr::Var(VarRef::new(name))
    }

    pub fn primed(name: &str) -> Self {
        NumExpr::Var(VarRef::primed(name))
    }

    pub fn int(i: i64) -> Self {
        NumExpr::Lit(Value::Int(i))
    }

    #[allow(clippy::should_implement_trait)] // two-argument constructor, not an operator
    pub fn add(l: NumExpr, r: NumExpr) -> Self {
        NumExpr::Add(Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(l: NumExpr, r: NumExpr) -> Self {
        NumExpr::Sub(Box::new(l), Box::new(r))
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarRef>) {
        match self {
            NumExpr::Var(v) => {
                out.insert(v.clone());
            }
            NumExpr::Lit(_) => {}
            NumExpr::Add(l, r) | NumExpr::Sub(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Visits every literal in the term.
    pub fn literals(&self, out: &mut Vec<Value>) {
        match self {
            NumExpr::Var(_) => {}
            NumExpr::Lit(v) => out.push(*v),
            NumExpr::Add(l, r) | NumExpr::Sub(l, r) => {
                l.literals(out);
                r.literals(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// `lhs op rhs`. A bare term `p` is stored as `p != FALSE`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub lhs: NumExpr,
    pub op: CmpOp,
    pub rhs: NumExpr,
}

impl Atom {
    pub fn new(lhs: NumExpr, op: CmpOp, rhs: NumExpr) -> Self {
        Atom { lhs, op, rhs }
    }

    /// Truthiness atom for a bare term.
    pub fn truthy(term: NumExpr) -> Self {
        Atom { lhs: term, op: CmpOp::Ne, rhs: NumExpr::Lit(Value::Bool(false)) }
    }

    pub fn is_truthy(&self) -> bool {
        self.op == CmpOp::Ne && self.rhs == NumExpr::Lit(Value::Bool(false))
    }

    pub fn literals(&self) -> Vec<Value> {
        let mut out = Vec::new();
        self.lhs.literals(&mut out);
        self.rhs.literals(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LtlFormula {
    Atom(Atom),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Iff(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Globally(Box<LtlFormula>),
    Finally(Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(lhs: NumExpr, op: CmpOp, rhs: NumExpr) -> Self {
        LtlFormula::Atom(Atom::new(lhs, op, rhs))
    }

    /// Bare proposition `name`.
    pub fn prop(name: &str) -> Self {
        LtlFormula::Atom(Atom::truthy(NumExpr::var(name)))
    }

    pub fn constant(b: bool) -> Self {
        LtlFormula::Atom(Atom::truthy(NumExpr::Lit(Value::Bool(b))))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: LtlFormula) -> Self {
        LtlFormula::Not(Box::new(f))
    }

    pub fn and(l: LtlFormula, r: LtlFormula) -> Self {
        LtlFormula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: LtlFormula, r: LtlFormula) -> Self {
        LtlFormula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: LtlFormula, r: LtlFormula) -> Self {
        LtlFormula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: LtlFormula, r: LtlFormula) -> Self {
        LtlFormula::Iff(Box::new(l), Box::new(r))
    }

    pub fn next(f: LtlFormula) -> Self {
        LtlFormula::Next(Box::new(f))
    }

    pub fn until(l: LtlFormula, r: LtlFormula) -> Self {
        LtlFormula::Until(Box::new(l), Box::new(r))
    }

    pub fn globally(f: LtlFormula) -> Self {
        LtlFormula::Globally(Box::new(f))
    }

    pub fn finally(f: LtlFormula) -> Self {
        LtlFormula::Finally(Box::new(f))
    }

    /// True when no temporal operator occurs anywhere in the formula.
    pub fn is_state_formula(&self) -> bool {
        match self {
            LtlFormula::Atom(_) => true,
            LtlFormula::Not(f) => f.is_state_formula(),
            LtlFormula::And(l, r)
            | LtlFormula::Or(l, r)
            | LtlFormula::Implies(l, r)
            | LtlFormula::Iff(l, r) => l.is_state_formula() && r.is_state_formula(),
            LtlFormula::Next(_)
            | LtlFormula::Until(_, _)
            | LtlFormula::Globally(_)
            | LtlFormula::Finally(_) => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            LtlFormula::Atom(_) => 1,
            LtlFormula::Not(f)
            | LtlFormula::Next(f)
            | LtlFormula::Globally(f)
            | LtlFormula::Finally(f) => 1 + f.depth(),
            LtlFormula::And(l, r)
            | LtlFormula::Or(l, r)
            | LtlFormula::Implies(l, r)
            | LtlFormula::Iff(l, r)
            | LtlFormula::Until(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Calls `f` on every atom, left to right.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            LtlFormula::Atom(a) => f(a),
            LtlFormula::Not(g)
            | LtlFormula::Next(g)
            | LtlFormula::Globally(g)
            | LtlFormula::Finally(g) => g.for_each_atom(f),
            LtlFormula::And(l, r)
            | LtlFormula::Or(l, r)
            | LtlFormula::Implies(l, r)
            | LtlFormula::Iff(l, r)
            | LtlFormula::Until(l, r) => {
                l.for_each_atom(f);
                r.for_each_atom(f);
            }
        }
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_ltl(self))
    }
}

impl std::str::FromStr for LtlFormula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ltl(s)
    }
}

/// Every variable reference occurring in `f`, primed and unprimed kept apart.
pub fn collect_vars(f: &LtlFormula) -> BTreeSet<VarRef> {
    let mut out = BTreeSet::new();
    f.for_each_atom(&mut |a| {
        a.lhs.collect_vars(&mut out);
        a.rhs.collect_vars(&mut out);
    });
    out
}

/// C identifier: letter or underscore, then letters, digits, underscores.
pub fn is_c_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
