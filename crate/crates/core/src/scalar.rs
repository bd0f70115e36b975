//! Scalar fields on T³: exact trigonometric polynomials when possible,
//! expression trees otherwise.
//!
//! Arithmetic folds back to [`TrigPoly`] whenever both operands are
//! polynomial, so identities built from polynomial data stay exact.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::coeff::{self, Coeff};
use crate::expr::{ExprField, Node};
use crate::grid::{max_abs, Grid};
use crate::trig::TrigPoly;

#[derive(Clone, PartialEq)]
pub enum Scalar {
    Trig(TrigPoly),
    Expr(ExprField),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<TrigPoly> for Scalar {
    fn from(p: TrigPoly) -> Self {
        Scalar::Trig(p)
    }
}

impl From<ExprField> for Scalar {
    fn from(e: ExprField) -> Self {
        Scalar::from_expr(e)
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Trig(TrigPoly::zero())
    }

    pub fn one() -> Self {
        Scalar::Trig(TrigPoly::one())
    }

    pub fn constant(c: Coeff) -> Self {
        Scalar::Trig(TrigPoly::constant(c))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Trig(TrigPoly::from_int(n))
    }

    /// Wraps an expression, unwrapping bare leaves.
    pub fn from_expr(e: ExprField) -> Self {
        match e.node() {
            Node::Leaf(p) => Scalar::Trig(p.clone()),
            _ => Scalar::Expr(e),
        }
    }

    pub fn to_expr(&self) -> ExprField {
        match self {
            Scalar::Trig(p) => ExprField::leaf(p.clone()),
            Scalar::Expr(e) => e.clone(),
        }
    }

    pub fn as_trig(&self) -> Option<&TrigPoly> {
        match self {
            Scalar::Trig(p) => Some(p),
            Scalar::Expr(_) => None,
        }
    }

    /// Polynomial form, collapsing pure-polynomial trees.
    pub fn to_trig(&self) -> Option<TrigPoly> {
        match self {
            Scalar::Trig(p) => Some(p.clone()),
            Scalar::Expr(e) => e.to_trig(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Trig(_))
    }

    /// `Some(true/false)` for polynomial data, `None` when only a numerical
    /// check is possible.
    pub fn exact_zero(&self) -> Option<bool> {
        self.as_trig().map(TrigPoly::is_zero)
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        self.as_trig().and_then(TrigPoly::as_constant)
    }

    fn is_exact_zero(&self) -> bool {
        self.exact_zero() == Some(true)
    }

    fn is_exact_one(&self) -> bool {
        self.as_constant().is_some_and(|c| coeff::is_one(&c))
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match self {
            Scalar::Trig(p) => p.eval(x),
            Scalar::Expr(e) => e.eval(x),
        }
    }

    pub fn partial(&self, axis: usize) -> Scalar {
        match self {
            Scalar::Trig(p) => Scalar::Trig(p.partial(axis)),
            Scalar::Expr(e) => e.partial(axis),
        }
    }

    /// Quotient. Exact when the denominator is a nonzero constant; otherwise
    /// an expression node carrying the denominator's nonvanishing witness.
    pub fn div(&self, den: &Scalar) -> Scalar {
        if let Some(c) = den.as_constant() {
            if !coeff::is_zero_within_tol(&c) {
                let inv = coeff::one() / c;
                return match self {
                    Scalar::Trig(p) => Scalar::Trig(p.scale(&inv)),
                    Scalar::Expr(_) => self * &Scalar::constant(inv),
                };
            }
        }
        if self.is_exact_zero() {
            return Scalar::zero();
        }
        Scalar::Expr(ExprField::div_node(self.to_expr(), den.to_expr()))
    }

    pub fn recip(&self) -> Scalar {
        Scalar::one().div(self)
    }

    /// Square root; exact for perfect-square constants.
    pub fn sqrt(&self) -> Scalar {
        if let Some(c) = self.as_constant() {
            if let Some(r) = coeff::exact_sqrt(&c) {
                return Scalar::constant(r);
            }
        }
        Scalar::Expr(ExprField::sqrt_node(self.to_expr()))
    }

    pub fn powi(&self, n: i32) -> Scalar {
        match (self, n) {
            (_, 0) => Scalar::one(),
            (_, 1) => self.clone(),
            (Scalar::Trig(p), n) if n > 0 => Scalar::Trig(p.pow(n as u32)),
            _ => Scalar::Expr(ExprField::pow_node(self.to_expr(), n)),
        }
    }

    pub fn scale(&self, c: &Coeff) -> Scalar {
        match self {
            Scalar::Trig(p) => Scalar::Trig(p.scale(c)),
            Scalar::Expr(_) => self * &Scalar::constant(c.clone()),
        }
    }

    pub fn witnesses_pass(&self) -> bool {
        match self {
            Scalar::Trig(_) => true,
            Scalar::Expr(e) => e.witnesses_pass(),
        }
    }

    pub fn grid_values(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| self.eval(x))
    }

    /// Max-norm: exact zero for vanishing polynomials, grid maximum otherwise.
    pub fn max_norm(&self, grid: &Grid) -> f64 {
        if self.is_exact_zero() {
            return 0.0;
        }
        max_abs(&self.grid_values(grid))
    }

    /// Torus mean: exact for polynomials, grid (trapezoidal) mean otherwise.
    pub fn mean_f64(&self, grid: &Grid) -> f64 {
        match self {
            Scalar::Trig(p) => coeff::to_f64(&p.mean()),
            Scalar::Expr(_) => {
                let v = self.grid_values(grid);
                v.iter().sum::<f64>() / v.len() as f64
            }
        }
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Trig(a), Scalar::Trig(b)) => Scalar::Trig(a + b),
            _ if self.is_exact_zero() => o.clone(),
            _ if o.is_exact_zero() => self.clone(),
            _ => Scalar::Expr(ExprField::from_node(Node::Add(self.to_expr(), o.to_expr()))),
        }
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Trig(a), Scalar::Trig(b)) => Scalar::Trig(a - b),
            _ if o.is_exact_zero() => self.clone(),
            _ if self.is_exact_zero() => -o,
            _ => Scalar::Expr(ExprField::from_node(Node::Sub(self.to_expr(), o.to_expr()))),
        }
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        match (self, o) {
            (Scalar::Trig(a), Scalar::Trig(b)) => Scalar::Trig(a * b),
            _ if self.is_exact_zero() || o.is_exact_zero() => Scalar::zero(),
            _ if self.is_exact_one() => o.clone(),
            _ if o.is_exact_one() => self.clone(),
            _ => Scalar::Expr(ExprField::from_node(Node::Mul(self.to_expr(), o.to_expr()))),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Trig(p) => Scalar::Trig(-p),
            Scalar::Expr(e) => match e.node() {
                Node::Neg(a) => Scalar::from_expr(a.clone()),
                _ => Scalar::Expr(ExprField::from_node(Node::Neg(e.clone()))),
            },
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Trig(p) => write!(f, "{p:?}"),
            Scalar::Expr(e) => write!(f, "{e:?}"),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::format_scalar(self))
    }
}

/// Scalars serialize as DSL text.
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::dsl::format_scalar(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, sin_axis};

    #[test]
    fn polynomial_arithmetic_stays_exact() {
        let a = Scalar::from(sin_axis(2, 1));
        let b = Scalar::from(cos_axis(1, 1));
        let s = &(&a + &b) * &(&a - &b);
        assert!(s.is_exact());
        let q = s.div(&Scalar::from_int(4));
        assert!(q.is_exact());
    }

    #[test]
    fn quotient_by_nonconstant_records_witness() {
        let den = Scalar::from(&TrigPoly::from_int(2) + &cos_axis(2, 1));
        let q = Scalar::one().div(&den);
        assert!(!q.is_exact());
        assert!(q.witnesses_pass());
        let x = [0.1, 0.2, 0.3];
        assert!((q.eval(&x) - 1.0 / (2.0 + 0.3f64.cos())).abs() < 1e-15);
        let bad = Scalar::one().div(&Scalar::from(cos_axis(0, 1)));
        assert!(!bad.witnesses_pass());
    }

    #[test]
    fn symbolic_derivative_of_quotient() {
        let den = Scalar::from(&TrigPoly::from_int(2) + &cos_axis(2, 1));
        let q = Scalar::from(sin_axis(0, 1)).div(&den);
        let dq = q.partial(2);
        let x = [0.7, -0.4, 1.3];
        // d/dz sin x/(2+cos z) = sin x sin z/(2+cos z)²
        let expected = 0.7f64.sin() * 1.3f64.sin() / (2.0 + 1.3f64.cos()).powi(2);
        assert!((dq.eval(&x) - expected).abs() < 1e-14);
        let r = den.sqrt();
        let dr = r.partial(2);
        let expected = -1.3f64.sin() / (2.0 * (2.0 + 1.3f64.cos()).sqrt());
        assert!((dr.eval(&x) - expected).abs() < 1e-14);
    }

    #[test]
    fn pure_tree_collapses() {
        assert_eq!(Scalar::from_int(9).sqrt(), Scalar::from_int(3));
        let (a, b) = (sin_axis(0, 1), cos_axis(1, 2));
        let tree = ExprField::from_node(Node::Mul(ExprField::leaf(a.clone()), ExprField::leaf(b.clone())));
        assert_eq!(tree.to_trig(), Some(&a * &b));
        assert!(Scalar::from_int(2).powi(-1).to_trig().is_none());
    }
}
