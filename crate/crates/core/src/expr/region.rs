use std::fmt;

use super::{rfunc, Alpha, Expr};
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub unit: Option<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), unit: None }
    }

    pub fn with_unit(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self { name: name.into(), unit: Some(unit.into()) }
    }
}

/// The point set `{x : expr(x) >= 0}` over an ordered variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<S> {
    expr: Expr<S>,
    vars: Vec<Variable>,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignClass {
    Inside,
    Boundary,
    Outside,
}

impl SignClass {
    pub fn of<S: Scalar>(value: S, tol: S) -> Self {
        if value > tol {
            SignClass::Inside
        } else if value < -tol {
            SignClass::Outside
        } else {
            SignClass::Boundary
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SignClass::Inside => "inside",
            SignClass::Boundary => "boundary",
            SignClass::Outside => "outside",
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl<S: Scalar> Region<S> {
    /// Fails with `UnboundVariable` if `expr` mentions a name not in `vars`.
    pub fn new(expr: Expr<S>, vars: Vec<Variable>) -> Result<Self> {
        for name in expr.variables() {
            if !vars.iter().any(|v| v.name == name) {
                return Err(Error::UnboundVariable(name));
            }
        }
        Ok(Self { expr, vars, description: String::new() })
    }

    pub fn with_names(expr: Expr<S>, names: &[&str]) -> Result<Self> {
        Self::new(expr, names.iter().map(|n| Variable::new(*n)).collect())
    }

    pub fn described(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn expr(&self) -> &Expr<S> {
        &self.expr
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    /// Evaluates at a point given in variable-list order.
    pub fn eval_at(&self, point: &[S]) -> Result<S> {
        if point.len() != self.vars.len() {
            return Err(Error::DimensionMismatch { expected: self.vars.len(), found: point.len() });
        }
        self.expr.eval_with(&|name: &str| self.vars.iter().position(|v| v.name == name).map(|i| point[i]))
    }

    pub fn contains(&self, point: &[S]) -> Result<bool> {
        Ok(self.eval_at(point)? >= S::zero())
    }

    pub fn sign_class(&self, point: &[S], tol: S) -> Result<SignClass> {
        if tol < S::zero() {
            return Err(Error::InvalidArgument("negative tolerance".into()));
        }
        Ok(SignClass::of(self.eval_at(point)?, tol))
    }

    /// The region obtained by fixing one variable to a constant; the
    /// variable is dropped from the list.
    pub fn fix(&self, name: &str, value: S) -> Result<Region<S>> {
        if !self.vars.iter().any(|v| v.name == name) {
            return Err(Error::UnboundVariable(name.to_string()));
        }
        Ok(Region {
            expr: self.expr.substitute(name, value),
            vars: self.vars.iter().filter(|v| v.name != name).cloned().collect(),
            description: format!("{} at {} = {:?}", self.description, name, value),
        })
    }

    /// Same region with a transformed expression (e.g. canonicalized).
    pub fn map_expr(&self, f: impl FnOnce(&Expr<S>) -> Expr<S>) -> Region<S> {
        Region { expr: f(&self.expr), vars: self.vars.clone(), description: self.description.clone() }
    }

    fn same_names(&self, other: &Region<S>) -> bool {
        self.vars.len() == other.vars.len() && self.vars.iter().zip(&other.vars).all(|(a, b)| a.name == b.name)
    }
}

/// Set-theoretic description over primitive regions.
#[derive(Debug, Clone, PartialEq)]
pub enum BoolTree<S> {
    Leaf(Region<S>),
    And(Vec<BoolTree<S>>),
    Or(Vec<BoolTree<S>>),
    Not(Box<BoolTree<S>>),
}

impl<S: Scalar> BoolTree<S> {
    pub fn leaf(region: Region<S>) -> Self {
        BoolTree::Leaf(region)
    }

    pub fn not(tree: BoolTree<S>) -> Self {
        BoolTree::Not(Box::new(tree))
    }

    pub fn leaves(&self) -> Vec<&Region<S>> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Region<S>>) {
        match self {
            BoolTree::Leaf(r) => out.push(r),
            BoolTree::And(ch) | BoolTree::Or(ch) => ch.iter().for_each(|c| c.collect_leaves(out)),
            BoolTree::Not(c) => c.collect_leaves(out),
        }
    }

    fn to_expr(&self, alpha: Alpha<S>) -> Result<Expr<S>> {
        let fold = |children: &[BoolTree<S>], conj: bool| -> Result<Expr<S>> {
            let mut it = children.iter();
            let first = it.next().ok_or(Error::EmptyOperands)?.to_expr(alpha)?;
            it.try_fold(first, |acc, c| {
                let rhs = Box::new(c.to_expr(alpha)?);
                Ok(if conj { Expr::RAnd(alpha, Box::new(acc), rhs) } else { Expr::ROr(alpha, Box::new(acc), rhs) })
            })
        };
        match self {
            BoolTree::Leaf(r) => Ok(r.expr.clone()),
            BoolTree::And(ch) => fold(ch, true),
            BoolTree::Or(ch) => fold(ch, false),
            BoolTree::Not(c) => Ok(rfunc::r_not(c.to_expr(alpha)?)),
        }
    }
}

/// Turns a Boolean description into one region by substituting the leaf
/// functions into R-functions: `And → ∧α`, `Or → ∨α`, `Not → -`.
///
/// N-ary nodes nest to the left, `((f1 ∧ f2) ∧ f3)`.
pub fn compose<S: Scalar>(tree: &BoolTree<S>, alpha: S) -> Result<Region<S>> {
    let alpha = Alpha::new(alpha)?;
    let leaves = tree.leaves();
    let first = *leaves.first().ok_or(Error::EmptyOperands)?;
    if leaves.iter().any(|l| !l.same_names(first)) {
        return Err(Error::MixedVariableLists);
    }
    let expr = tree.to_expr(alpha)?;
    Ok(Region { expr, vars: first.vars.clone(), description: String::new() })
}
