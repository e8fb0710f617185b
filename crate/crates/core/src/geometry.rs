//! Implicit primitives and the reference 2D/3D composition cases.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::expr::{compose, BoolTree, Expr, Region};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Which side of `y = a(x - x0)² ∓ c` a parabola primitive keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `y - a(x-x0)² + c`
    OpensUp,
    /// `y + a(x-x0)² + c`
    OpensDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `-z + k(1 - x² - y²)`
    Under,
    /// `z + k(1 - x² - y²)`
    Above,
}

/// Elementary implicit inequality. Circle and parabola live in `(x, y)`,
/// the rest in `(x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrimitiveSpec<S> {
    Circle { cx: S, cy: S, radius: S },
    Parabola { a: S, x0: S, c: S, orientation: Orientation },
    Slab { axis: Axis, half_thickness: S },
    Paraboloid { side: Side, coeff: S },
    CylinderZ { radius: S },
}

const XY: [&str; 2] = ["x", "y"];
const XYZ: [&str; 3] = ["x", "y", "z"];

fn finite<S: Scalar>(what: &str, v: S) -> Result<S> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidSpec(format!("{what} must be finite")))
    }
}

fn positive<S: Scalar>(what: &str, v: S) -> Result<S> {
    if finite(what, v)? > S::zero() {
        Ok(v)
    } else {
        Err(Error::InvalidSpec(format!("{what} must be positive")))
    }
}

fn c<S: Scalar>(v: S) -> Expr<S> {
    Expr::Const(v)
}

fn v<S: Scalar>(name: &str) -> Expr<S> {
    Expr::var(name)
}

pub fn primitive<S: Scalar>(spec: &PrimitiveSpec<S>) -> Result<Region<S>> {
    let one = S::one();
    match *spec {
        PrimitiveSpec::Circle { cx, cy, radius } => {
            let (cx, cy, r) = (finite("cx", cx)?, finite("cy", cy)?, positive("radius", radius)?);
            let e = c(r * r) - (v("x") - c(cx)).pow(2) - (v("y") - c(cy)).pow(2);
            Ok(Region::with_names(e, &XY)?.described(format!("circle c=({cx:?},{cy:?}) r={r:?}")))
        }
        PrimitiveSpec::Parabola { a, x0, c: shift, orientation } => {
            let (a, x0, shift) = (finite("a", a)?, finite("x0", x0)?, finite("c", shift)?);
            let bowl = c(a) * (v("x") - c(x0)).pow(2);
            let e = match orientation {
                Orientation::OpensUp => v("y") - bowl + c(shift),
                Orientation::OpensDown => v("y") + bowl + c(shift),
            };
            Ok(Region::with_names(e, &XY)?.described(format!("parabola {orientation:?} a={a:?} x0={x0:?} c={shift:?}")))
        }
        PrimitiveSpec::Slab { axis, half_thickness } => {
            let h = positive("half-thickness", half_thickness)?;
            let e = c(h * h) - v(axis.name()).pow(2);
            Ok(Region::with_names(e, &XYZ)?.described(format!("slab |{}| <= {h:?}", axis.name())))
        }
        PrimitiveSpec::Paraboloid { side, coeff } => {
            let k = positive("coeff", coeff)?;
            let cap = c(k) * (c(one) - v("x").pow(2) - v("y").pow(2));
            let e = match side {
                Side::Under => -v("z") + cap,
                Side::Above => v("z") + cap,
            };
            Ok(Region::with_names(e, &XYZ)?.described(format!("paraboloid {side:?} k={k:?}")))
        }
        PrimitiveSpec::CylinderZ { radius } => {
            let r = positive("radius", radius)?;
            let e = c(r * r) - v("x").pow(2) - v("y").pow(2);
            Ok(Region::with_names(e, &XYZ)?.described(format!("z-cylinder r={r:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestCaseName {
    Circles,
    Parabolas,
    Slabs,
    ParaboloidCylinders,
}

impl TestCaseName {
    pub const ALL: [TestCaseName; 4] =
        [TestCaseName::Circles, TestCaseName::Parabolas, TestCaseName::Slabs, TestCaseName::ParaboloidCylinders];

    pub fn as_str(self) -> &'static str {
        match self {
            TestCaseName::Circles => "circles-4.1",
            TestCaseName::Parabolas => "parabolas-4.2",
            TestCaseName::Slabs => "slabs-A1",
            TestCaseName::ParaboloidCylinders => "paraboloid-cylinders-A2",
        }
    }
}

impl fmt::Display for TestCaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestCaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestCaseName::ALL.into_iter().find(|n| n.as_str() == s).ok_or_else(|| Error::UnknownTestCase(s.to_string()))
    }
}

/// A reference composition: two Boolean descriptions over shared
/// primitives, plus the bounds used to draw them.
#[derive(Debug, Clone)]
pub struct TestCase<S> {
    pub name: TestCaseName,
    pub params: Vec<(&'static str, S)>,
    pub primitives: Vec<Region<S>>,
    /// `[first, second]`, named by `labels`.
    pub trees: [BoolTree<S>; 2],
    pub labels: [&'static str; 2],
    pub alpha: S,
    pub bounds: Vec<(S, S)>,
}

impl<S: Scalar> TestCase<S> {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }
}

/// Builds a named case and composes both of its trees with `alpha = 1`.
///
/// Returns `(first, second, case)`: for the 2D cases and the slabs this is
/// the R-conjunction and R-disjunction; for the paraboloid case it is
/// `f1 ∧ f2` and `f1 ∧ f2 ∧ (¬f3 ∨ f4)`.
pub fn testcase<S: Scalar>(name: &str) -> Result<(Region<S>, Region<S>, TestCase<S>)> {
    let name: TestCaseName = name.parse()?;
    let case = build_case::<S>(name)?;
    let first = compose(&case.trees[0], case.alpha)?.described(format!("{name} {}", case.labels[0]));
    let second = compose(&case.trees[1], case.alpha)?.described(format!("{name} {}", case.labels[1]));
    Ok((first, second, case))
}

fn leaf<S: Scalar>(r: &Region<S>) -> BoolTree<S> {
    BoolTree::leaf(r.clone())
}

pub fn build_case<S: Scalar>(name: TestCaseName) -> Result<TestCase<S>> {
    let l = S::lit;
    let (params, primitives, trees, labels, bounds): (Vec<(&'static str, S)>, Vec<Region<S>>, _, _, _) = match name {
        TestCaseName::Circles => {
            let params =
                vec![("x0", l(1.0)), ("y0", l(2.0)), ("r0", l(1.5)), ("x1", l(1.0)), ("y1", l(1.0)), ("r1", l(1.0))];
            let p1 = primitive(&PrimitiveSpec::Circle { cx: params[0].1, cy: params[1].1, radius: params[2].1 })?;
            let p2 = primitive(&PrimitiveSpec::Circle { cx: params[3].1, cy: params[4].1, radius: params[5].1 })?;
            let trees = [BoolTree::And(vec![leaf(&p1), leaf(&p2)]), BoolTree::Or(vec![leaf(&p1), leaf(&p2)])];
            (params, vec![p1, p2], trees, ["and", "or"], vec![(l(-1.0), l(3.0)), (l(-0.5), l(4.0))])
        }
        TestCaseName::Parabolas => {
            let params = vec![("a", l(1.0)), ("x0", l(1.0)), ("d", l(3.0)), ("b", l(1.5))];
            let (a, x0) = (params[0].1, params[1].1);
            let p1 = primitive(&PrimitiveSpec::Parabola { a, x0, c: params[2].1, orientation: Orientation::OpensUp })?;
            let p2 =
                primitive(&PrimitiveSpec::Parabola { a, x0, c: params[3].1, orientation: Orientation::OpensDown })?;
            // keeps phi1 >= 0 and phi2 <= 0
            let trees = [
                BoolTree::And(vec![leaf(&p1), BoolTree::not(leaf(&p2))]),
                BoolTree::Or(vec![leaf(&p1), BoolTree::not(leaf(&p2))]),
            ];
            (params, vec![p1, p2], trees, ["and", "or"], vec![(l(-2.0), l(4.0)), (l(-6.0), l(2.0))])
        }
        TestCaseName::Slabs => {
            let params = vec![("a", l(2.0)), ("b", l(1.0)), ("c", l(2.0))];
            let prims = [Axis::X, Axis::Y, Axis::Z]
                .iter()
                .zip(&params)
                .map(|(&axis, &(_, h))| primitive(&PrimitiveSpec::Slab { axis, half_thickness: h }))
                .collect::<Result<Vec<_>>>()?;
            let leaves: Vec<_> = prims.iter().map(leaf).collect();
            let trees = [BoolTree::And(leaves.clone()), BoolTree::Or(leaves)];
            (params, prims, trees, ["and", "or"], vec![(l(-3.0), l(3.0)); 3])
        }
        TestCaseName::ParaboloidCylinders => {
            let params = vec![("k", l(0.6)), ("r_outer", l(0.5)), ("r_inner", l(0.3))];
            let k = params[0].1;
            let f1 = primitive(&PrimitiveSpec::Paraboloid { side: Side::Under, coeff: k })?;
            let f2 = primitive(&PrimitiveSpec::Paraboloid { side: Side::Above, coeff: k })?;
            let f3 = primitive(&PrimitiveSpec::CylinderZ { radius: params[1].1 })?;
            let f4 = primitive(&PrimitiveSpec::CylinderZ { radius: params[2].1 })?;
            let trees = [
                BoolTree::And(vec![leaf(&f1), leaf(&f2)]),
                BoolTree::And(vec![leaf(&f1), leaf(&f2), BoolTree::Or(vec![BoolTree::not(leaf(&f3)), leaf(&f4)])]),
            ];
            (params, vec![f1, f2, f3, f4], trees, ["and", "cutout"], vec![(l(-1.2), l(1.2)); 3])
        }
    };
    Ok(TestCase { name, params, primitives, trees, labels, alpha: S::one(), bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_primitive() {
        let r = primitive(&PrimitiveSpec::Circle { cx: 1.0, cy: 2.0, radius: 1.5 }).unwrap();
        assert_eq!(r.eval_at(&[1.0, 2.0]).unwrap(), 2.25);
    }

    #[test]
    fn slab_and_cylinder_boundaries() {
        let s = primitive(&PrimitiveSpec::Slab { axis: Axis::X, half_thickness: 2.0 }).unwrap();
        assert_eq!(s.eval_at(&[2.0, 7.0, -3.0]).unwrap(), 0.0);
        let cyl = primitive(&PrimitiveSpec::CylinderZ { radius: 0.5f64 }).unwrap();
        for z in [-4.0, 0.0, 11.0] {
            assert!(cyl.eval_at(&[0.3, 0.4, z]).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn paraboloid_sides() {
        let under = primitive(&PrimitiveSpec::Paraboloid { side: Side::Under, coeff: 0.6f64 }).unwrap();
        let above = primitive(&PrimitiveSpec::Paraboloid { side: Side::Above, coeff: 0.6f64 }).unwrap();
        assert!((under.eval_at(&[0.0, 0.0, 0.1]).unwrap() - 0.5).abs() < 1e-15);
        assert!((above.eval_at(&[0.0, 0.0, 0.1]).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            PrimitiveSpec::Circle { cx: 0.0, cy: 0.0, radius: 0.0 },
            PrimitiveSpec::Circle { cx: f64::NAN, cy: 0.0, radius: 1.0 },
            PrimitiveSpec::Slab { axis: Axis::Y, half_thickness: -1.0 },
            PrimitiveSpec::CylinderZ { radius: f64::INFINITY },
            PrimitiveSpec::Paraboloid { side: Side::Above, coeff: 0.0 },
            PrimitiveSpec::Parabola { a: 1.0, x0: f64::INFINITY, c: 0.0, orientation: Orientation::OpensUp },
        ] {
            assert!(matches!(primitive(&spec), Err(Error::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn unknown_case() {
        assert!(matches!(testcase::<f64>("cubes"), Err(Error::UnknownTestCase(n)) if n == "cubes"));
    }

    #[test]
    fn slab_intersection_at_origin() {
        let (and, or, _) = testcase::<f64>("slabs-A1").unwrap();
        // min(4, 1, 4) and max(4, 1, 4)
        assert_eq!(and.eval_at(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(or.eval_at(&[0.0, 0.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn cutout_keeps_inner_core() {
        let (_, cut, _) = testcase::<f64>("paraboloid-cylinders-A2").unwrap();
        // min(0.6, 0.6, max(-0.25, 0.09))
        assert!((cut.eval_at(&[0.0, 0.0, 0.0]).unwrap() - 0.09).abs() < 1e-15);
        // in the annulus: excluded
        assert!(cut.eval_at(&[0.4, 0.0, 0.0]).unwrap() < 0.0);
    }

    #[test]
    fn parabolas_match_closed_form_at_a_point() {
        let (and, or, case) = testcase::<f64>("parabolas-4.2").unwrap();
        assert_eq!(case.labels, ["and", "or"]);
        let (x, y): (f64, f64) = (0.7, -1.3);
        let k = 2.0 * x - x * x - 0.25;
        let m = (4.0 * y + 9.0).abs() / 4.0;
        assert!((and.eval_at(&[x, y]).unwrap() - (k - m)).abs() < 1e-12);
        assert!((or.eval_at(&[x, y]).unwrap() - (k + m)).abs() < 1e-12);
    }

    #[test]
    fn names_round_trip() {
        for n in TestCaseName::ALL {
            assert_eq!(n.as_str().parse::<TestCaseName>().unwrap(), n);
            let case = build_case::<f32>(n).unwrap();
            assert_eq!(case.dim(), case.primitives[0].dim());
        }
    }
}
