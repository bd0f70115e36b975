//! Recursive-descent parser for scalar expressions.
//!
//! ```text
//! expr  = term { ("+" | "-") term } ;
//! term  = unary { ("*" | "/") unary } ;
//! unary = ("+" | "-") unary | power ;
//! power = atom [ "^" [ "-" ] integer ] ;
//! atom  = number | ident | ident "(" expr ")" | "(" expr ")" ;
//! ```

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::lexer::{lex, Tok, Token};
use super::{ParseDiagnostic, Parsed};
use crate::coeff;
use crate::expr::Node;
use crate::scalar::Scalar;
use crate::trig::{Mode, TrigPoly};

/// Named rational constants available to expressions.
pub type Params = BTreeMap<String, BigRational>;

const MAX_DEPTH: usize = 64;
const MAX_EXPONENT: i64 = 16;
const MAX_WAVE_NUMBER: i64 = 1 << 20;

pub(crate) const RESERVED: [&str; 6] = ["x", "y", "z", "sin", "cos", "sqrt"];

#[derive(Clone, Debug)]
enum Val {
    /// Integer-linear-in-waiting combination of the coordinates.
    Linear([BigRational; 3]),
    Field(Scalar),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    params: &'a Params,
    warnings: Vec<ParseDiagnostic>,
    depth: usize,
    phase_depth: usize,
}

type PResult<T> = Result<T, ParseDiagnostic>;

/// Parses a scalar expression without parameters.
pub fn parse_scalar(src: &str) -> Result<Parsed<Scalar>, Vec<ParseDiagnostic>> {
    parse_scalar_with(src, &Params::new())
}

/// Parses a scalar expression, resolving identifiers against `params`.
pub fn parse_scalar_with(src: &str, params: &Params) -> Result<Parsed<Scalar>, Vec<ParseDiagnostic>> {
    let toks = lex(src).map_err(|e| vec![e])?;
    let mut p = Parser { toks, pos: 0, params, warnings: Vec::new(), depth: 0, phase_depth: 0 };
    let run = |p: &mut Parser| -> PResult<Scalar> {
        let (v, start, end) = p.expr()?;
        let t = p.peek();
        if t.tok != Tok::End {
            return Err(ParseDiagnostic::error(t.start, t.end, "unexpected token after expression"));
        }
        p.field(v, start, end)
    };
    match run(&mut p) {
        Ok(value) => Ok(Parsed { value, warnings: p.warnings }),
        Err(e) => {
            let mut all = vec![e];
            all.extend(p.warnings);
            Err(all)
        }
    }
}

fn rational_zero3() -> [BigRational; 3] {
    [BigRational::zero(), BigRational::zero(), BigRational::zero()]
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn coordinate_error(&self, start: usize, end: usize) -> ParseDiagnostic {
        if self.phase_depth > 0 {
            ParseDiagnostic::error(
                start,
                end,
                "nonlinear phase: trigonometric arguments must be integer-linear in x, y, z",
            )
        } else {
            ParseDiagnostic::error(start, end, "coordinates may only appear inside sin/cos arguments")
        }
    }

    fn field(&self, v: Val, start: usize, end: usize) -> PResult<Scalar> {
        match v {
            Val::Field(s) => Ok(s),
            Val::Linear(_) => Err(self.coordinate_error(start, end)),
        }
    }

    fn enter(&mut self, at: &Token) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseDiagnostic::error(at.start, at.end, "expression nested too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<(Val, usize, usize)> {
        let (mut acc, start, mut end) = self.term()?;
        loop {
            let op = self.peek().tok.clone();
            if op != Tok::Plus && op != Tok::Minus {
                return Ok((acc, start, end));
            }
            self.bump();
            let (rhs, _, e) = self.term()?;
            end = e;
            acc = self.additive(acc, rhs, op == Tok::Minus, start, end)?;
        }
    }

    fn additive(&self, a: Val, b: Val, minus: bool, start: usize, end: usize) -> PResult<Val> {
        let sign = |r: BigRational| if minus { -r } else { r };
        Ok(match (a, b) {
            (Val::Field(a), Val::Field(b)) => Val::Field(if minus { &a - &b } else { &a + &b }),
            (Val::Linear(a), Val::Linear(b)) => {
                let [b0, b1, b2] = b;
                let [a0, a1, a2] = a;
                Val::Linear([a0 + sign(b0), a1 + sign(b1), a2 + sign(b2)])
            }
            (Val::Linear(l), Val::Field(f)) if f.exact_zero() == Some(true) => Val::Linear(l),
            (Val::Field(f), Val::Linear(l)) if f.exact_zero() == Some(true) => {
                Val::Linear(if minus { l.map(|r| -r) } else { l })
            }
            _ => return Err(self.coordinate_error(start, end)),
        })
    }

    fn term(&mut self) -> PResult<(Val, usize, usize)> {
        let (mut acc, start, mut end) = self.unary()?;
        loop {
            let op = self.peek().tok.clone();
            if op != Tok::Star && op != Tok::Slash {
                return Ok((acc, start, end));
            }
            self.bump();
            let (rhs, rs, re) = self.unary()?;
            end = re;
            acc = if op == Tok::Star {
                self.multiply(acc, rhs, start, end)?
            } else {
                self.divide(acc, rhs, start, end, rs)?
            };
        }
    }

    fn scale_linear(l: [BigRational; 3], c: &BigRational) -> Val {
        Val::Linear(l.map(|v| v * c))
    }

    fn multiply(&self, a: Val, b: Val, start: usize, end: usize) -> PResult<Val> {
        match (a, b) {
            (Val::Field(a), Val::Field(b)) => Ok(Val::Field(&a * &b)),
            (Val::Linear(l), Val::Field(f)) | (Val::Field(f), Val::Linear(l)) => match f.as_constant() {
                Some(c) => Ok(Self::scale_linear(l, &coeff::to_rational(&c))),
                None => Err(self.coordinate_error(start, end)),
            },
            (Val::Linear(_), Val::Linear(_)) => Err(self.coordinate_error(start, end)),
        }
    }

    fn divide(&mut self, a: Val, b: Val, start: usize, end: usize, den_start: usize) -> PResult<Val> {
        let b = match b {
            Val::Field(f) => f,
            Val::Linear(_) => return Err(self.coordinate_error(start, end)),
        };
        if let Some(c) = b.as_constant() {
            if coeff::is_zero_within_tol(&c) {
                return Err(ParseDiagnostic::error(den_start, end, "division by zero"));
            }
        }
        match a {
            Val::Linear(l) => match b.as_constant() {
                Some(c) => Ok(Self::scale_linear(l, &(BigRational::from_integer(1.into()) / coeff::to_rational(&c)))),
                None => Err(self.coordinate_error(start, end)),
            },
            Val::Field(a) => {
                let q = a.div(&b);
                if let Scalar::Expr(e) = &q {
                    if let Node::Div(_, _, w) = e.node() {
                        if !w.passed {
                            self.warnings.push(ParseDiagnostic::warning(
                                den_start,
                                end,
                                format!("denominator has no nonvanishing witness on the {}³ grid", w.grid),
                            ));
                        }
                    }
                }
                Ok(Val::Field(q))
            }
        }
    }

    fn unary(&mut self) -> PResult<(Val, usize, usize)> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Minus | Tok::Plus => {
                self.enter(&t)?;
                self.bump();
                let (v, _, end) = self.unary()?;
                self.depth -= 1;
                let v = if t.tok == Tok::Minus {
                    match v {
                        Val::Field(f) => Val::Field(-&f),
                        Val::Linear(l) => Val::Linear(l.map(|r| -r)),
                    }
                } else {
                    v
                };
                Ok((v, t.start, end))
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult<(Val, usize, usize)> {
        let (base, start, mut end) = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok((base, start, end));
        }
        self.bump();
        let neg = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        let n = match &t.tok {
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                s.parse::<i64>().ok().filter(|n| *n <= MAX_EXPONENT)
            }
            _ => None,
        };
        let Some(n) = n else {
            return Err(ParseDiagnostic::error(
                t.start,
                t.end,
                format!("exponent must be an integer of magnitude at most {MAX_EXPONENT}"),
            ));
        };
        end = t.end;
        let n = if neg { -n } else { n } as i32;
        match base {
            Val::Linear(l) if n == 1 => Ok((Val::Linear(l), start, end)),
            Val::Linear(_) => Err(self.coordinate_error(start, end)),
            Val::Field(f) => {
                if n < 0 && f.as_constant().is_some_and(|c| coeff::is_zero_within_tol(&c)) {
                    return Err(ParseDiagnostic::error(start, end, "division by zero"));
                }
                Ok((Val::Field(f.powi(n)), start, end))
            }
        }
    }

    fn atom(&mut self) -> PResult<(Val, usize, usize)> {
        let t = self.bump();
        match &t.tok {
            Tok::Number(s) => match coeff::parse_decimal(s) {
                Some(c) => Ok((Val::Field(Scalar::constant(c)), t.start, t.end)),
                None => Err(ParseDiagnostic::error(t.start, t.end, format!("malformed number `{s}`"))),
            },
            Tok::LParen => {
                self.enter(&t)?;
                let (v, _, _) = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(ParseDiagnostic::error(close.start, close.end, "expected `)`"));
                }
                self.depth -= 1;
                Ok((v, t.start, close.end))
            }
            Tok::Ident(name) => self.ident(name.clone(), &t),
            Tok::End => Err(ParseDiagnostic::error(t.start, t.end, "unexpected end of expression")),
            _ => Err(ParseDiagnostic::error(t.start, t.end, "expected a number, identifier or `(`")),
        }
    }

    fn ident(&mut self, name: String, t: &Token) -> PResult<(Val, usize, usize)> {
        if let Some(axis) = ["x", "y", "z"].iter().position(|a| *a == name) {
            let mut l = rational_zero3();
            l[axis] = BigRational::from_integer(1.into());
            return Ok((Val::Linear(l), t.start, t.end));
        }
        if matches!(name.as_str(), "sin" | "cos" | "sqrt") {
            let open = self.bump();
            if open.tok != Tok::LParen {
                return Err(ParseDiagnostic::error(open.start, open.end, format!("expected `(` after `{name}`")));
            }
            self.enter(&open)?;
            let is_trig = name != "sqrt";
            if is_trig {
                self.phase_depth += 1;
            }
            let (arg, a_start, a_end) = self.expr()?;
            if is_trig {
                self.phase_depth -= 1;
            }
            let close = self.bump();
            if close.tok != Tok::RParen {
                return Err(ParseDiagnostic::error(close.start, close.end, "expected `)`"));
            }
            self.depth -= 1;
            let v = if is_trig {
                Val::Field(Scalar::from(self.trig(&name, arg, a_start, a_end)?))
            } else {
                let f = self.field(arg, a_start, a_end)?;
                let r = f.sqrt();
                if !r.witnesses_pass() && f.witnesses_pass() {
                    self.warnings.push(ParseDiagnostic::warning(a_start, a_end, "radicand has no positivity witness"));
                }
                Val::Field(r)
            };
            return Ok((v, t.start, close.end));
        }
        match self.params.get(&name) {
            Some(r) => Ok((Val::Field(Scalar::constant(coeff::from_rational(r))), t.start, t.end)),
            None => Err(ParseDiagnostic::error(t.start, t.end, format!("unknown identifier `{name}`"))),
        }
    }

    fn trig(&self, name: &str, arg: Val, start: usize, end: usize) -> PResult<TrigPoly> {
        let nonlinear = || {
            ParseDiagnostic::error(
                start,
                end,
                "nonlinear phase: trigonometric arguments must be integer-linear in x, y, z",
            )
        };
        let l = match arg {
            Val::Linear(l) => l,
            Val::Field(f) if f.exact_zero() == Some(true) => rational_zero3(),
            Val::Field(_) => return Err(nonlinear()),
        };
        let mut k = [0i32; 3];
        for (i, r) in l.iter().enumerate() {
            if !r.is_integer() {
                return Err(nonlinear());
            }
            let n = r.to_integer().to_i64().filter(|n| n.abs() <= MAX_WAVE_NUMBER);
            let Some(n) = n else {
                return Err(ParseDiagnostic::error(start, end, format!("wave number exceeds {MAX_WAVE_NUMBER}")));
            };
            k[i] = n as i32;
        }
        let k = Mode(k);
        Ok(if name == "sin" { TrigPoly::sin(k, coeff::one()) } else { TrigPoly::cos(k, coeff::one()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, sin_axis};

    fn ok(src: &str) -> Scalar {
        parse_scalar(src).unwrap_or_else(|e| panic!("{src}: {e:?}")).value
    }

    fn err(src: &str) -> ParseDiagnostic {
        parse_scalar(src).expect_err(src).remove(0)
    }

    #[test]
    fn literal_translation() {
        let expected = &sin_axis(2, 1) + &cos_axis(1, 1).scale(&coeff::ratio(1, 2));
        assert_eq!(ok("sin(z) + 0.5*cos(y)"), Scalar::from(expected));
        assert_eq!(ok("sin(-z)"), Scalar::from(-&sin_axis(2, 1)));
        assert_eq!(ok("cos(2*x - y + 0)").as_trig().unwrap().num_terms(), 1);
        assert_eq!(ok("2^3 - 8"), Scalar::zero());
        assert_eq!(ok("sin(z/1 + z)"), Scalar::from(sin_axis(2, 2)));
        assert_eq!(ok("-(-(1))"), Scalar::one());
    }

    #[test]
    fn params_substitute() {
        let mut params = Params::new();
        params.insert("A".into(), BigRational::from_integer(1.into()));
        params.insert("C".into(), BigRational::from_integer(1.into()));
        let s = parse_scalar_with("A*sin(z) + C*cos(y)", &params).unwrap().value;
        assert_eq!(s, Scalar::from(&sin_axis(2, 1) + &cos_axis(1, 1)));
    }

    #[test]
    fn rejections() {
        let e = err("sin(x*y)");
        assert!(e.message.starts_with("nonlinear phase"), "{}", e.message);
        assert_eq!((e.start, e.end), (4, 7));
        assert!(err("sin(x/2)").message.starts_with("nonlinear phase"));
        assert!(err("sin(sin(x))").message.starts_with("nonlinear phase"));
        assert!(err("cos(x + 1)").message.starts_with("nonlinear phase"));
        assert_eq!(err("foo + 1").message, "unknown identifier `foo`");
        assert_eq!(err("x").message, "coordinates may only appear inside sin/cos arguments");
        assert_eq!(err("1/0").message, "division by zero");
        assert_eq!(err("(1 + 2").message, "expected `)`");
        assert_eq!(err("").message, "unexpected end of expression");
        assert!(err("1 2").message.contains("unexpected token"));
        assert!(err("1e999999").message.contains("malformed number"));
    }

    #[test]
    fn division_produces_expression_with_witness() {
        let p = parse_scalar("1/(2+cos(z))").unwrap();
        assert!(p.warnings.is_empty());
        assert!(!p.value.is_exact());
        assert!(p.value.witnesses_pass());
        let p = parse_scalar("1/cos(x)").unwrap();
        assert_eq!(p.warnings.len(), 1);
        assert_eq!((p.warnings[0].start, p.warnings[0].end), (2, 8));
        let p = parse_scalar("sqrt(cos(x))").unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("{}1{}", "(".repeat(10_000), ")".repeat(10_000));
        assert_eq!(err(&src).message, "expression nested too deeply");
        let src = "-".repeat(10_000) + "1";
        assert_eq!(err(&src).message, "expression nested too deeply");
    }
}
