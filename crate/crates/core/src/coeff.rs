//! Coefficient ring for trigonometric polynomials.
//!
//! Exact rationals by default. The `float-coeffs` feature swaps in `f64`, in
//! which case every "exact" zero test is relaxed to [`FLOAT_EXACT_TOL`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient type used by [`crate::TrigPoly`].
#[cfg(not(feature = "float-coeffs"))]
pub type Coeff = BigRational;

/// Coefficient type used by [`crate::TrigPoly`].
#[cfg(feature = "float-coeffs")]
pub type Coeff = f64;

/// True when coefficients are exact rationals.
pub const EXACT: bool = cfg!(not(feature = "float-coeffs"));

/// Tolerance that replaces exact zero tests in float mode.
pub const FLOAT_EXACT_TOL: f64 = 1e-12;

/// Integer coefficient.
pub fn int(n: i64) -> Coeff {
    #[cfg(not(feature = "float-coeffs"))]
    {
        BigRational::from_integer(BigInt::from(n))
    }
    #[cfg(feature = "float-coeffs")]
    {
        n as f64
    }
}

/// The coefficient `num / den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Coeff {
    assert!(den != 0, "zero denominator");
    #[cfg(not(feature = "float-coeffs"))]
    {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    #[cfg(feature = "float-coeffs")]
    {
        num as f64 / den as f64
    }
}

pub fn zero() -> Coeff {
    Coeff::zero()
}

pub fn one() -> Coeff {
    Coeff::one()
}

/// Zero test used for canonical storage: exact in rational mode, and
/// `|c| < 1e-15` in float mode so that round-off does not leave ghost terms.
pub fn is_negligible(c: &Coeff) -> bool {
    #[cfg(not(feature = "float-coeffs"))]
    {
        c.is_zero()
    }
    #[cfg(feature = "float-coeffs")]
    {
        c.abs() < 1e-15
    }
}

/// Zero test used for identity checks.
pub fn is_zero_within_tol(c: &Coeff) -> bool {
    #[cfg(not(feature = "float-coeffs"))]
    {
        c.is_zero()
    }
    #[cfg(feature = "float-coeffs")]
    {
        c.abs() <= FLOAT_EXACT_TOL
    }
}

pub fn to_f64(c: &Coeff) -> f64 {
    #[cfg(not(feature = "float-coeffs"))]
    {
        c.to_f64().unwrap_or_else(|| {
            // numerator/denominator too large for a direct conversion
            let n = c.numer().to_f64().unwrap_or(f64::NAN);
            let d = c.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
    #[cfg(feature = "float-coeffs")]
    {
        *c
    }
}

/// Converts a float to a coefficient. In exact mode the binary value of the
/// float is represented exactly.
pub fn from_f64(x: f64) -> Option<Coeff> {
    #[cfg(not(feature = "float-coeffs"))]
    {
        BigRational::from_float(x)
    }
    #[cfg(feature = "float-coeffs")]
    {
        x.is_finite().then_some(x)
    }
}

pub fn from_rational(r: &BigRational) -> Coeff {
    #[cfg(not(feature = "float-coeffs"))]
    {
        r.clone()
    }
    #[cfg(feature = "float-coeffs")]
    {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

pub fn to_rational(c: &Coeff) -> BigRational {
    #[cfg(not(feature = "float-coeffs"))]
    {
        c.clone()
    }
    #[cfg(feature = "float-coeffs")]
    {
        BigRational::from_float(*c).unwrap_or_else(BigRational::zero)
    }
}

pub fn abs(c: &Coeff) -> Coeff {
    c.abs()
}

/// Returns the value as an `i64` when it is an integer.
pub fn as_integer(c: &Coeff) -> Option<i64> {
    #[cfg(not(feature = "float-coeffs"))]
    {
        if c.is_integer() {
            c.to_integer().to_i64()
        } else {
            None
        }
    }
    #[cfg(feature = "float-coeffs")]
    {
        let r = c.round();
        ((c - r).abs() <= FLOAT_EXACT_TOL && r.abs() < 9.0e15).then_some(r as i64)
    }
}

/// Exact square root of a perfect-square rational, if any.
pub fn exact_sqrt(c: &Coeff) -> Option<Coeff> {
    #[cfg(not(feature = "float-coeffs"))]
    {
        if c.is_negative() {
            return None;
        }
        let n = c.numer().sqrt();
        let d = c.denom().sqrt();
        (&n * &n == *c.numer() && &d * &d == *c.denom()).then(|| BigRational::new(n, d))
    }
    #[cfg(feature = "float-coeffs")]
    {
        (*c >= 0.0).then(|| c.sqrt())
    }
}

/// Parses a decimal literal (`12`, `0.5`, `1e-3`, `2.5E+2`) into a coefficient.
/// In exact mode the decimal value is represented exactly.
pub fn parse_decimal(s: &str) -> Option<Coeff> {
    let r = parse_decimal_rational(s)?;
    #[cfg(not(feature = "float-coeffs"))]
    {
        Some(r)
    }
    #[cfg(feature = "float-coeffs")]
    {
        let _ = r;
        s.parse::<f64>().ok()
    }
}

/// Largest decimal exponent accepted by [`parse_decimal_rational`].
pub const MAX_DECIMAL_EXPONENT: i32 = 400;

/// Exact decimal parsing into a rational, independent of the coefficient mode.
pub fn parse_decimal_rational(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    if exponent.abs() > MAX_DECIMAL_EXPONENT {
        return None;
    }
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(i) => (&mantissa[..i], &mantissa[i + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Some(r)
}

/// Text form that [`parse_decimal`] (or the DSL's `a/b`) reads back to the
/// same value: `3`, `-1/2` in exact mode, shortest round-trip float otherwise.
pub fn format(c: &Coeff) -> String {
    #[cfg(not(feature = "float-coeffs"))]
    {
        if c.is_integer() {
            c.numer().to_string()
        } else {
            format!("{}/{}", c.numer(), c.denom())
        }
    }
    #[cfg(feature = "float-coeffs")]
    {
        let s = format!("{c:?}");
        s
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn is_one(c: &Coeff) -> bool {
    #[cfg(not(feature = "float-coeffs"))]
    {
        c.is_one()
    }
    #[cfg(feature = "float-coeffs")]
    {
        (c - 1.0).abs() <= FLOAT_EXACT_TOL
    }
}

pub fn is_positive(c: &Coeff) -> bool {
    c.is_positive()
}

pub fn is_negative(c: &Coeff) -> bool {
    c.is_negative()
}
