use crate::coeff::{self, Coeff};
use crate::expr::{ExprField, Node};
use crate::scalar::Scalar;
use crate::trig::{Mode, Parity, TrigPoly};

const AXES: [&str; 3] = ["x", "y", "z"];

fn phase(k: Mode) -> String {
    let mut out = String::new();
    for (axis, &n) in k.0.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let sign = if n < 0 { "-" } else { "+" };
        if out.is_empty() {
            if n < 0 {
                out.push('-');
            }
        } else {
            out.push_str(&format!(" {sign} "));
        }
        if n.abs() != 1 {
            out.push_str(&format!("{}*", n.abs()));
        }
        out.push_str(AXES[axis]);
    }
    out
}

fn magnitude(c: &Coeff) -> String {
    coeff::format(&coeff::abs(c))
}

/// DSL text for a polynomial, e.g. `1/2*sin(2*z) + cos(y)`.
pub fn format_trig(p: &TrigPoly) -> String {
    let mut out = String::new();
    for (k, parity, c) in p.terms() {
        let neg = coeff::is_negative(c);
        let body = if k.is_zero() {
            magnitude(c)
        } else {
            let f = match parity {
                Parity::Cos => "cos",
                Parity::Sin => "sin",
            };
            let call = format!("{f}({})", phase(k));
            if coeff::is_one(&coeff::abs(c)) {
                call
            } else {
                format!("{}*{call}", magnitude(c))
            }
        };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Fully parenthesized DSL text for an expression tree.
pub fn format_expr(e: &ExprField) -> String {
    match e.node() {
        Node::Leaf(p) => format_trig(p),
        Node::Neg(a) => format!("-({})", format_expr(a)),
        Node::Add(a, b) => format!("({}) + ({})", format_expr(a), format_expr(b)),
        Node::Sub(a, b) => format!("({}) - ({})", format_expr(a), format_expr(b)),
        Node::Mul(a, b) => format!("({})*({})", format_expr(a), format_expr(b)),
        Node::Div(a, b, _) => format!("({})/({})", format_expr(a), format_expr(b)),
        Node::Sqrt(a, _) => format!("sqrt({})", format_expr(a)),
        Node::Pow(a, n, _) => format!("({})^{n}", format_expr(a)),
    }
}

pub fn format_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Trig(p) => format_trig(p),
        Scalar::Expr(e) => format_expr(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, sin_axis};

    #[test]
    fn trig_text() {
        let p = TrigPoly::sin(Mode::new(0, 0, 2), coeff::ratio(1, 2));
        let expected = if coeff::EXACT { "1/2*sin(2*z)" } else { "0.5*sin(2*z)" };
        assert_eq!(format_trig(&p), expected);
        let q = &(&cos_axis(1, 1) - &sin_axis(0, 1)) + &TrigPoly::from_int(-3);
        let expected = if coeff::EXACT { "-3 + cos(y) - sin(x)" } else { "-3.0 + cos(y) - sin(x)" };
        assert_eq!(format_trig(&q), expected);
        let r = TrigPoly::cos(Mode::new(1, -2, 0), coeff::one());
        assert_eq!(format_trig(&r), "cos(x - 2*y)");
        assert_eq!(format_trig(&TrigPoly::zero()), "0");
    }
}
