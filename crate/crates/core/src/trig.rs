//! Exact trigonometric polynomials on the 3-torus `[0, 2π)³`.
//!
//! A [`TrigPoly`] is a finite sum `Σ a_k cos(k·x) + b_k sin(k·x)` with integer
//! modes `k`. Storage is canonical: every stored mode is the lexicographically
//! positive representative of `{k, -k}`, `sin(0·x)` is never stored and no
//! coefficient is zero, so equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::coeff::{self, Coeff};

/// Integer wave vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Mode(pub [i32; 3]);

impl Mode {
    pub const ZERO: Mode = Mode([0, 0, 0]);

    pub fn new(kx: i32, ky: i32, kz: i32) -> Self {
        Mode([kx, ky, kz])
    }

    /// Unit mode along `axis`.
    pub fn axis(axis: usize) -> Self {
        let mut k = [0; 3];
        k[axis] = 1;
        Mode(k)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// First nonzero entry is positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => true,
        }
    }

    pub fn dot(&self, x: &[f64; 3]) -> f64 {
        self.0[0] as f64 * x[0] + self.0[1] as f64 * x[1] + self.0[2] as f64 * x[2]
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }

    pub fn max_abs(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        Mode([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        Mode([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode([-self.0[0], -self.0[1], -self.0[2]])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug)]
struct FloatTerm {
    k: [f64; 3],
    sin: bool,
    c: f64,
}

/// Exact finite Fourier sum on T³.
#[derive(Clone, Default)]
pub struct TrigPoly {
    terms: BTreeMap<(Mode, Parity), Coeff>,
    float: OnceLock<Vec<FloatTerm>>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(Mode::ZERO, Parity::Cos, c);
        p
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(coeff::int(n))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `c·cos(k·x)`.
    pub fn cos(k: Mode, c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(k, Parity::Cos, c);
        p
    }

    /// `c·sin(k·x)`.
    pub fn sin(k: Mode, c: Coeff) -> Self {
        let mut p = Self::zero();
        p.add_term(k, Parity::Sin, c);
        p
    }

    /// Builds a polynomial from arbitrary (possibly non-canonical) terms.
    pub fn from_terms<I: IntoIterator<Item = (Mode, Parity, Coeff)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (k, par, c) in terms {
            p.add_term(k, par, c);
        }
        p
    }

    /// Adds `c·trig(k·x)`, folding `k` to its canonical representative.
    pub fn add_term(&mut self, k: Mode, parity: Parity, c: Coeff) {
        if coeff::is_negligible(&c) {
            return;
        }
        let (k, c) = if k.is_canonical() {
            (k, c)
        } else {
            match parity {
                Parity::Cos => (-k, c),
                Parity::Sin => (-k, -c),
            }
        };
        if k.is_zero() && parity == Parity::Sin {
            return;
        }
        self.float = OnceLock::new();
        let key = (k, parity);
        let entry = self.terms.entry(key).or_insert_with(coeff::zero);
        *entry += c;
        if coeff::is_negligible(entry) {
            self.terms.remove(&key);
        }
    }

    /// Iterates stored terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Mode, Parity, &Coeff)> {
        self.terms.iter().map(|((k, p), c)| (*k, *p, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, k: Mode, parity: Parity) -> Coeff {
        self.terms.get(&(k, parity)).cloned().unwrap_or_else(coeff::zero)
    }

    /// Mean over the torus: the `cos(0·x)` coefficient.
    pub fn mean(&self) -> Coeff {
        self.coefficient(Mode::ZERO, Parity::Cos)
    }

    /// Exact zero test (`1e-12` per coefficient in float mode).
    pub fn is_zero(&self) -> bool {
        self.terms.values().all(coeff::is_zero_within_tol)
    }

    /// The constant value, if the polynomial has no nonzero modes.
    pub fn as_constant(&self) -> Option<Coeff> {
        let mut out = coeff::zero();
        for ((k, _), c) in &self.terms {
            if !k.is_zero() {
                if coeff::is_zero_within_tol(c) {
                    continue;
                }
                return None;
            }
            out = c.clone();
        }
        Some(out)
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn scale(&self, c: &Coeff) -> Self {
        if coeff::is_negligible(c) {
            return Self::zero();
        }
        let mut p = Self::zero();
        for ((k, par), v) in &self.terms {
            p.add_term(*k, *par, v.clone() * c.clone());
        }
        p
    }

    /// Exact product using the product-to-sum identities.
    pub fn mul_poly(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        let half = coeff::ratio(1, 2);
        for ((a, pa), ca) in &self.terms {
            for ((b, pb), cb) in &other.terms {
                let c = ca.clone() * cb.clone() * half.clone();
                let (sum, diff) = (*a + *b, *a - *b);
                match (pa, pb) {
                    // cos a cos b = ½[cos(a−b) + cos(a+b)]
                    (Parity::Cos, Parity::Cos) => {
                        out.add_term(diff, Parity::Cos, c.clone());
                        out.add_term(sum, Parity::Cos, c);
                    }
                    // sin a sin b = ½[cos(a−b) − cos(a+b)]
                    (Parity::Sin, Parity::Sin) => {
                        out.add_term(diff, Parity::Cos, c.clone());
                        out.add_term(sum, Parity::Cos, -c);
                    }
                    // sin a cos b = ½[sin(a+b) + sin(a−b)]
                    (Parity::Sin, Parity::Cos) => {
                        out.add_term(sum, Parity::Sin, c.clone());
                        out.add_term(diff, Parity::Sin, c);
                    }
                    // cos a sin b = ½[sin(a+b) − sin(a−b)]
                    (Parity::Cos, Parity::Sin) => {
                        out.add_term(sum, Parity::Sin, c.clone());
                        out.add_term(diff, Parity::Sin, -c);
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.mul_poly(self);
        }
        out
    }

    /// Partial derivative along coordinate `axis` (0 = x, 1 = y, 2 = z).
    pub fn partial(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for ((k, par), c) in &self.terms {
            let kj = k.0[axis];
            if kj == 0 {
                continue;
            }
            let kj = coeff::int(kj as i64);
            match par {
                Parity::Cos => out.add_term(*k, Parity::Sin, -(c.clone() * kj)),
                Parity::Sin => out.add_term(*k, Parity::Cos, c.clone() * kj),
            }
        }
        out
    }

    /// Exact translation `x ↦ x + (π/2)·quarters`.
    pub fn shift_quarter_periods(&self, quarters: [i32; 3]) -> Self {
        let mut out = Self::zero();
        for ((k, par), c) in &self.terms {
            let phase = k.0.iter().zip(quarters).map(|(&a, b)| a as i64 * b as i64).sum::<i64>();
            // cos(θ + φ), sin(θ + φ) with φ = phase·π/2
            let (cphi, sphi) = match phase.rem_euclid(4) {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            };
            match par {
                Parity::Cos => {
                    // cos(θ+φ) = cos θ cos φ − sin θ sin φ
                    out.add_term(*k, Parity::Cos, c.clone() * coeff::int(cphi));
                    out.add_term(*k, Parity::Sin, -(c.clone() * coeff::int(sphi)));
                }
                Parity::Sin => {
                    // sin(θ+φ) = sin θ cos φ + cos θ sin φ
                    out.add_term(*k, Parity::Sin, c.clone() * coeff::int(cphi));
                    out.add_term(*k, Parity::Cos, c.clone() * coeff::int(sphi));
                }
            }
        }
        out
    }

    fn float_terms(&self) -> &[FloatTerm] {
        self.float.get_or_init(|| {
            self.terms
                .iter()
                .map(|((k, p), c)| FloatTerm {
                    k: [k.0[0] as f64, k.0[1] as f64, k.0[2] as f64],
                    sin: *p == Parity::Sin,
                    c: coeff::to_f64(c),
                })
                .collect()
        })
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.float_terms()
            .iter()
            .map(|t| {
                let th = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
                if t.sin {
                    t.c * th.sin()
                } else {
                    t.c * th.cos()
                }
            })
            .sum()
    }

    /// Value and gradient at `x`.
    pub fn eval_with_gradient(&self, x: &[f64; 3]) -> (f64, [f64; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for t in self.float_terms() {
            let th = t.k[0] * x[0] + t.k[1] * x[1] + t.k[2] * x[2];
            let (s, c) = th.sin_cos();
            let (val, d) = if t.sin { (t.c * s, t.c * c) } else { (t.c * c, -t.c * s) };
            v += val;
            for j in 0..3 {
                g[j] += d * t.k[j];
            }
        }
        (v, g)
    }

    /// `Σ|c|`, an upper bound for `sup |p|`.
    pub fn sup_bound(&self) -> f64 {
        self.float_terms().iter().map(|t| t.c.abs()).sum()
    }

    /// `Σ|c|·|k|`, an upper bound for `sup |∇p|`.
    pub fn gradient_bound(&self) -> f64 {
        self.float_terms()
            .iter()
            .map(|t| t.c.abs() * (t.k[0] * t.k[0] + t.k[1] * t.k[1] + t.k[2] * t.k[2]).sqrt())
            .sum()
    }

    /// Exact lower bound `mean − Σ_{k≠0}|c|` for the polynomial's values.
    pub fn lower_bound(&self) -> Coeff {
        let mut lb = self.mean();
        for ((k, _), c) in &self.terms {
            if !k.is_zero() {
                lb -= coeff::abs(c);
            }
        }
        lb
    }

    /// Largest `|k_j|` over stored modes.
    pub fn max_mode(&self) -> i32 {
        self.terms.keys().map(|(k, _)| k.max_abs()).max().unwrap_or(0)
    }
}

impl PartialEq for TrigPoly {
    fn eq(&self, other: &Self) -> bool {
        if coeff::EXACT {
            self.terms == other.terms
        } else {
            (self - other).is_zero()
        }
    }
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrigPoly({})", crate::dsl::format_trig(self))
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::format_trig(self))
    }
}

impl Add<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, o: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        out += o;
        out
    }
}

impl AddAssign<&TrigPoly> for TrigPoly {
    fn add_assign(&mut self, o: &TrigPoly) {
        for ((k, p), c) in &o.terms {
            self.add_term(*k, *p, c.clone());
        }
    }
}

impl Sub<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, o: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for ((k, p), c) in &o.terms {
            out.add_term(*k, *p, -c.clone());
        }
        out
    }
}

impl Mul<&TrigPoly> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, o: &TrigPoly) -> TrigPoly {
        self.mul_poly(o)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(&coeff::int(-1))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<TrigPoly> for TrigPoly {
            type Output = TrigPoly;
            fn $m(self, o: TrigPoly) -> TrigPoly {
                (&self).$m(&o)
            }
        }
        impl $tr<&TrigPoly> for TrigPoly {
            type Output = TrigPoly;
            fn $m(self, o: &TrigPoly) -> TrigPoly {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        -&self
    }
}

/// Trigonometric trinomial shorthands used throughout the crate and tests.
pub fn sin_axis(axis: usize, n: i32) -> TrigPoly {
    let mut k = [0; 3];
    k[axis] = n;
    TrigPoly::sin(Mode(k), coeff::one())
}

pub fn cos_axis(axis: usize, n: i32) -> TrigPoly {
    let mut k = [0; 3];
    k[axis] = n;
    TrigPoly::cos(Mode(k), coeff::one())
}
