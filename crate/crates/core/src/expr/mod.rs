//! Expression trees for real-valued implicit functions.
//!
//! An [`Expr`] is a closed-form function of named variables built from
//! constants, arithmetic, integer powers, `sqrt`, `abs`, `min`/`max` and the
//! parametric R-conjunction / R-disjunction nodes. There is deliberately no
//! division node.

mod region;
mod rfunc;
mod text;

use std::collections::{BTreeSet, HashMap};
use std::ops;

pub use region::{compose, BoolTree, Region, SignClass, Variable};
pub use rfunc::{canonicalize_alpha1, expand_rfunctions, r_and, r_and_value, r_not, r_or, r_or_value};
pub use text::{parse, serialize, Format};

use crate::error::{Error, Result};
use crate::Scalar;

/// Arguments of `sqrt` in `[-SQRT_TOL, 0)` are clamped to zero.
pub const SQRT_TOL: f64 = 1e-12;

/// Validated R-function parameter, `-1 < alpha <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha<S>(S);

impl<S: Scalar> Alpha<S> {
    pub fn new(alpha: S) -> Result<Self> {
        if alpha > -S::one() && alpha <= S::one() {
            Ok(Self(alpha))
        } else {
            Err(Error::AlphaOutOfRange(alpha.as_f64()))
        }
    }

    /// The min/max member of the family.
    pub fn one() -> Self {
        Self(S::one())
    }

    #[inline]
    pub fn get(self) -> S {
        self.0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.0 == S::one()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S> {
    Const(S),
    Var(String),
    Neg(Box<Expr<S>>),
    Add(Box<Expr<S>>, Box<Expr<S>>),
    Sub(Box<Expr<S>>, Box<Expr<S>>),
    Mul(Box<Expr<S>>, Box<Expr<S>>),
    Pow(Box<Expr<S>>, u32),
    Sqrt(Box<Expr<S>>),
    Abs(Box<Expr<S>>),
    Min(Box<Expr<S>>, Box<Expr<S>>),
    Max(Box<Expr<S>>, Box<Expr<S>>),
    RAnd(Alpha<S>, Box<Expr<S>>, Box<Expr<S>>),
    ROr(Alpha<S>, Box<Expr<S>>, Box<Expr<S>>),
}

impl<S: Scalar> Expr<S> {
    pub fn constant(value: S) -> Self {
        Expr::Const(value)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn pow(self, exponent: u32) -> Self {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn sqrt(self) -> Self {
        Expr::Sqrt(Box::new(self))
    }

    pub fn abs(self) -> Self {
        Expr::Abs(Box::new(self))
    }

    pub fn min(self, other: Self) -> Self {
        Expr::Min(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: Self) -> Self {
        Expr::Max(Box::new(self), Box::new(other))
    }

    /// Evaluates with variable values supplied by `lookup`.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<S>
    where
        F: Fn(&str) -> Option<S>,
    {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(name) => lookup(name).ok_or_else(|| Error::UnboundVariable(name.clone()))?,
            Expr::Neg(a) => -a.eval_with(lookup)?,
            Expr::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Expr::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            Expr::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Expr::Pow(a, n) => a.eval_with(lookup)?.powi(*n as i32),
            Expr::Sqrt(a) => checked_sqrt(a.eval_with(lookup)?)?,
            Expr::Abs(a) => a.eval_with(lookup)?.abs(),
            Expr::Min(a, b) => a.eval_with(lookup)?.min(b.eval_with(lookup)?),
            Expr::Max(a, b) => a.eval_with(lookup)?.max(b.eval_with(lookup)?),
            Expr::RAnd(alpha, a, b) => r_and_value(a.eval_with(lookup)?, b.eval_with(lookup)?, *alpha),
            Expr::ROr(alpha, a, b) => r_or_value(a.eval_with(lookup)?, b.eval_with(lookup)?, *alpha),
        })
    }

    pub fn eval(&self, point: &HashMap<String, S>) -> Result<S> {
        self.eval_with(&|name: &str| point.get(name).copied())
    }

    /// Evaluates with `(name, value)` bindings; the first match wins.
    pub fn eval_pairs(&self, bindings: &[(&str, S)]) -> Result<S> {
        self.eval_with(&|name: &str| bindings.iter().find(|(n, _)| *n == name).map(|(_, v)| *v))
    }

    /// Names of all variables referenced by the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(name) = e {
                out.insert(name.clone());
            }
        });
        out
    }

    /// Number of nodes for which `pred` holds.
    pub fn count(&self, pred: impl Fn(&Expr<S>) -> bool) -> usize {
        let mut n = 0;
        self.visit(&mut |e| {
            if pred(e) {
                n += 1;
            }
        });
        n
    }

    pub fn node_count(&self) -> usize {
        self.count(|_| true)
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Expr<S>)) {
        f(self);
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) | Expr::Abs(a) => a.visit(f),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Min(a, b)
            | Expr::Max(a, b)
            | Expr::RAnd(_, a, b)
            | Expr::ROr(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Bottom-up rewrite: children are rebuilt first, then `f` sees the node.
    pub fn rewrite(&self, f: &impl Fn(Expr<S>) -> Expr<S>) -> Expr<S> {
        let node = match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.rewrite(f))),
            Expr::Add(a, b) => Expr::Add(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.rewrite(f)), *n),
            Expr::Sqrt(a) => Expr::Sqrt(Box::new(a.rewrite(f))),
            Expr::Abs(a) => Expr::Abs(Box::new(a.rewrite(f))),
            Expr::Min(a, b) => Expr::Min(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::Max(a, b) => Expr::Max(Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::RAnd(al, a, b) => Expr::RAnd(*al, Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
            Expr::ROr(al, a, b) => Expr::ROr(*al, Box::new(a.rewrite(f)), Box::new(b.rewrite(f))),
        };
        f(node)
    }

    /// Replaces every occurrence of variable `name` by the constant `value`.
    pub fn substitute(&self, name: &str, value: S) -> Expr<S> {
        self.rewrite(&|e| match e {
            Expr::Var(ref n) if n == name => Expr::Const(value),
            other => other,
        })
    }

    /// Evaluates every subtree without variables down to a constant.
    ///
    /// A constant `sqrt` of a negative beyond tolerance is left unfolded so
    /// the error still surfaces at evaluation time.
    pub fn fold_constants(&self) -> Expr<S> {
        self.rewrite(&|e| {
            let foldable = match &e {
                Expr::Const(_) | Expr::Var(_) => false,
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sqrt(a) | Expr::Abs(a) => a.is_const(),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Min(a, b)
                | Expr::Max(a, b)
                | Expr::RAnd(_, a, b)
                | Expr::ROr(_, a, b) => a.is_const() && b.is_const(),
            };
            if foldable {
                if let Ok(v) = e.eval_with(&|_: &str| None) {
                    return Expr::Const(v);
                }
            }
            e
        })
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }
}

pub(crate) fn checked_sqrt<S: Scalar>(x: S) -> Result<S> {
    if x >= S::zero() {
        Ok(x.sqrt())
    } else if x >= -S::lit(SQRT_TOL) {
        Ok(S::zero())
    } else {
        Err(Error::NegativeSqrtArgument(x.as_f64()))
    }
}

impl<S: Scalar> From<S> for Expr<S> {
    fn from(value: S) -> Self {
        Expr::Const(value)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl<S> ops::$trait for Expr<S> {
            type Output = Expr<S>;
            fn $method(self, rhs: Expr<S>) -> Expr<S> {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);

impl<S> ops::Neg for Expr<S> {
    type Output = Expr<S>;
    fn neg(self) -> Expr<S> {
        Expr::Neg(Box::new(self))
    }
}
