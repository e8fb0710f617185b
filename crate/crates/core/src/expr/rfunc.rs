//! The R-alpha family of R-conjunctions and R-disjunctions.
//!
//! ```text
//! a ∧α b = (a + b - sqrt(a² + b² - 2αab)) / (1 + α)
//! a ∨α b = (a + b + sqrt(a² + b² - 2αab)) / (1 + α)
//! ```
//!
//! `α = 1` gives `min`/`max`, `α = 0` the classic `a + b ∓ sqrt(a² + b²)`.

use super::{Alpha, Expr};
use crate::error::Result;
use crate::Scalar;

/// Discriminant written as `(a-b)² + 2(1-α)ab`: both terms share a sign
/// with the true value, so it never goes negative in floating point and is
/// an exact square at `α = 1`.
#[inline]
fn discriminant<S: Scalar>(a: S, b: S, alpha: S) -> S {
    let d = a - b;
    d * d + S::lit(2.0) * (S::one() - alpha) * (a * b)
}

/// Value of `a ∧α b`.
///
/// Whichever branch of the formula cancels is rewritten through
/// `(a+b)² - D = 2(1+α)ab`, so small results keep full relative precision
/// and the sign always matches `min(a, b)`.
#[inline]
pub fn r_and_value<S: Scalar>(a: S, b: S, alpha: Alpha<S>) -> S {
    let alpha = alpha.get();
    let root = discriminant(a, b, alpha).sqrt();
    let s = a + b;
    if s > S::zero() {
        S::lit(2.0) * (a * b) / (s + root)
    } else {
        (s - root) / (S::one() + alpha)
    }
}

/// Value of `a ∨α b`; the mirror image of [`r_and_value`].
#[inline]
pub fn r_or_value<S: Scalar>(a: S, b: S, alpha: Alpha<S>) -> S {
    let alpha = alpha.get();
    let root = discriminant(a, b, alpha).sqrt();
    let s = a + b;
    if s < S::zero() {
        S::lit(2.0) * (a * b) / (s - root)
    } else {
        (s + root) / (S::one() + alpha)
    }
}

pub fn r_and<S: Scalar>(a: Expr<S>, b: Expr<S>, alpha: S) -> Result<Expr<S>> {
    Ok(Expr::RAnd(Alpha::new(alpha)?, Box::new(a), Box::new(b)))
}

pub fn r_or<S: Scalar>(a: Expr<S>, b: Expr<S>, alpha: S) -> Result<Expr<S>> {
    Ok(Expr::ROr(Alpha::new(alpha)?, Box::new(a), Box::new(b)))
}

/// R-negation, `-a`.
pub fn r_not<S: Scalar>(a: Expr<S>) -> Expr<S> {
    -a
}

/// Rewrites every `α = 1` node as `½((a+b) ∓ |a-b|)`. Other nodes are kept.
pub fn canonicalize_alpha1<S: Scalar>(expr: &Expr<S>) -> Expr<S> {
    expr.rewrite(&|e| match e {
        Expr::RAnd(alpha, a, b) if alpha.is_one() => half(Expr::Sub(sum(&a, &b), abs_diff(a, b))),
        Expr::ROr(alpha, a, b) if alpha.is_one() => half(Expr::Add(sum(&a, &b), abs_diff(a, b))),
        other => other,
    })
}

/// Rewrites every R-node into explicit arithmetic with a square root, i.e.
/// the textbook form of the R-alpha functions.
pub fn expand_rfunctions<S: Scalar>(expr: &Expr<S>) -> Expr<S> {
    expr.rewrite(&|e| match e {
        Expr::RAnd(alpha, a, b) => sqrt_form(alpha.get(), *a, *b, false),
        Expr::ROr(alpha, a, b) => sqrt_form(alpha.get(), *a, *b, true),
        other => other,
    })
}

fn sum<S: Scalar>(a: &Expr<S>, b: &Expr<S>) -> Box<Expr<S>> {
    Box::new(Expr::Add(Box::new(a.clone()), Box::new(b.clone())))
}

fn abs_diff<S: Scalar>(a: Box<Expr<S>>, b: Box<Expr<S>>) -> Box<Expr<S>> {
    Box::new(Expr::Abs(Box::new(Expr::Sub(a, b))))
}

fn half<S: Scalar>(e: Expr<S>) -> Expr<S> {
    Expr::Mul(Box::new(Expr::Const(S::lit(0.5))), Box::new(e))
}

fn sqrt_form<S: Scalar>(alpha: S, a: Expr<S>, b: Expr<S>, disjunction: bool) -> Expr<S> {
    let mut radicand = a.clone().pow(2) + b.clone().pow(2);
    if alpha != S::zero() {
        radicand = radicand - Expr::Const(S::lit(2.0) * alpha) * (a.clone() * b.clone());
    }
    let root = radicand.sqrt();
    let body = if disjunction { (a + b) + root } else { (a + b) - root };
    if alpha == S::zero() {
        body
    } else {
        Expr::Const(S::one() / (S::one() + alpha)) * body
    }
}
