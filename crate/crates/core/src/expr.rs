//! Expression trees over trigonometric-polynomial leaves.
//!
//! These carry the non-polynomial quantities (quotients, square roots) that
//! appear once frames, norms and metric inverses enter. Every quotient and
//! square root records a grid [`Certificate`] for its denominator/radicand.

use std::fmt;
use std::sync::Arc;

use crate::grid::{Certificate, VERIFY_GRID};
use crate::scalar::Scalar;
use crate::trig::TrigPoly;

#[derive(Clone, Debug)]
pub enum Node {
    Leaf(TrigPoly),
    Neg(ExprField),
    Add(ExprField, ExprField),
    Sub(ExprField, ExprField),
    Mul(ExprField, ExprField),
    /// Quotient with the nonvanishing witness of its denominator.
    Div(ExprField, ExprField, Certificate),
    /// Square root with the positivity witness of its radicand.
    Sqrt(ExprField, Certificate),
    /// Integer power; negative exponents carry a nonvanishing witness.
    Pow(ExprField, i32, Option<Certificate>),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone)]
pub struct ExprField(Arc<Node>);

impl ExprField {
    pub fn leaf(p: TrigPoly) -> Self {
        ExprField(Arc::new(Node::Leaf(p)))
    }

    pub(crate) fn from_node(n: Node) -> Self {
        ExprField(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn div_node(a: ExprField, b: ExprField) -> Self {
        let w = Certificate::nonvanishing(&Scalar::from_expr(b.clone()), VERIFY_GRID);
        Self::from_node(Node::Div(a, b, w))
    }

    pub(crate) fn sqrt_node(a: ExprField) -> Self {
        let w = Certificate::nonvanishing(&Scalar::from_expr(a.clone()), VERIFY_GRID);
        Self::from_node(Node::Sqrt(a, w))
    }

    pub(crate) fn pow_node(a: ExprField, n: i32) -> Self {
        let w = (n < 0).then(|| Certificate::nonvanishing(&Scalar::from_expr(a.clone()), VERIFY_GRID));
        Self::from_node(Node::Pow(a, n, w))
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match self.node() {
            Node::Leaf(p) => p.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b, _) => a.eval(x) / b.eval(x),
            Node::Sqrt(a, _) => a.eval(x).sqrt(),
            Node::Pow(a, n, _) => a.eval(x).powi(*n),
        }
    }

    /// Collapses a tree made only of polynomial operations back into a
    /// [`TrigPoly`].
    pub fn to_trig(&self) -> Option<TrigPoly> {
        match self.node() {
            Node::Leaf(p) => Some(p.clone()),
            Node::Neg(a) => a.to_trig().map(|p| -p),
            Node::Add(a, b) => Some(&a.to_trig()? + &b.to_trig()?),
            Node::Sub(a, b) => Some(&a.to_trig()? - &b.to_trig()?),
            Node::Mul(a, b) => Some(&a.to_trig()? * &b.to_trig()?),
            Node::Div(a, b, _) => {
                let den = b.to_trig()?.as_constant()?;
                if crate::coeff::is_zero_within_tol(&den) {
                    return None;
                }
                Some(a.to_trig()?.scale(&(crate::coeff::one() / den)))
            }
            Node::Sqrt(..) => None,
            Node::Pow(a, n, _) => (*n >= 0).then(|| a.to_trig().map(|p| p.pow(*n as u32))).flatten(),
        }
    }

    /// True when every quotient, root and negative power in the tree holds a
    /// passing witness.
    pub fn witnesses_pass(&self) -> bool {
        match self.node() {
            Node::Leaf(_) => true,
            Node::Neg(a) => a.witnesses_pass(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => a.witnesses_pass() && b.witnesses_pass(),
            Node::Div(a, b, w) => w.passed && a.witnesses_pass() && b.witnesses_pass(),
            Node::Sqrt(a, w) => w.positive() && a.witnesses_pass(),
            Node::Pow(a, _, w) => w.as_ref().is_none_or(|w| w.passed) && a.witnesses_pass(),
        }
    }

    /// Witnesses that failed, in tree order.
    pub fn failed_witnesses(&self) -> Vec<Certificate> {
        let mut out = Vec::new();
        self.collect_failed(&mut out);
        out
    }

    fn collect_failed(&self, out: &mut Vec<Certificate>) {
        match self.node() {
            Node::Leaf(_) => {}
            Node::Neg(a) => a.collect_failed(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.collect_failed(out);
                b.collect_failed(out);
            }
            Node::Div(a, b, w) => {
                if !w.passed {
                    out.push(w.clone());
                }
                a.collect_failed(out);
                b.collect_failed(out);
            }
            Node::Sqrt(a, w) => {
                if !w.positive() {
                    out.push(w.clone());
                }
                a.collect_failed(out);
            }
            Node::Pow(a, _, w) => {
                if let Some(w) = w.as_ref().filter(|w| !w.passed) {
                    out.push(w.clone());
                }
                a.collect_failed(out);
            }
        }
    }

    /// Symbolic partial derivative.
    pub fn partial(&self, axis: usize) -> Scalar {
        let s = |e: &ExprField| Scalar::from_expr(e.clone());
        match self.node() {
            Node::Leaf(p) => Scalar::Trig(p.partial(axis)),
            Node::Neg(a) => -&a.partial(axis),
            Node::Add(a, b) => &a.partial(axis) + &b.partial(axis),
            Node::Sub(a, b) => &a.partial(axis) - &b.partial(axis),
            Node::Mul(a, b) => &(&a.partial(axis) * &s(b)) + &(&s(a) * &b.partial(axis)),
            Node::Div(a, b, _) => {
                let (sa, sb) = (s(a), s(b));
                let num = &(&a.partial(axis) * &sb) - &(&sa * &b.partial(axis));
                num.div(&(&sb * &sb))
            }
            Node::Sqrt(a, _) => {
                let root = s(self);
                a.partial(axis).div(&(&Scalar::from_int(2) * &root))
            }
            Node::Pow(a, n, _) => {
                let sa = s(a);
                &(&Scalar::from_int(*n as i64) * &sa.powi(n - 1)) * &a.partial(axis)
            }
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Leaf(_) => 1,
            Node::Neg(a) | Node::Sqrt(a, _) | Node::Pow(a, _, _) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b, _) => 1 + a.size() + b.size(),
        }
    }
}

/// Structural equality; witnesses are derived data and do not participate.
impl PartialEq for ExprField {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (self.node(), other.node()) {
            (Node::Leaf(a), Node::Leaf(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) => a == b,
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b, _), Node::Div(c, d, _)) => a == c && b == d,
            (Node::Sqrt(a, _), Node::Sqrt(b, _)) => a == b,
            (Node::Pow(a, n, _), Node::Pow(b, m, _)) => n == m && a == b,
            _ => false,
        }
    }
}

impl fmt::Debug for ExprField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExprField({})", crate::dsl::format_expr(self))
    }
}
