//! ABC flows, Giroux normal forms, the Gauss-map triviality certificate and
//! the energy functional.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{self, Coeff};
use crate::field::{Metric, VectorField, VolumeForm};
use crate::form::KForm;
use crate::grid::{Grid, VERIFY_GRID};
use crate::scalar::Scalar;
use crate::trig::{cos_axis, sin_axis, TrigPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("ABC parameters must be nonnegative")]
    NegativeParameter,
    #[error("ABC parameters ({0}) are not normalized to 1 = A ≥ B ≥ C ≥ 0")]
    Unnormalized(String),
    #[error("Giroux index must be a positive integer, got {0}")]
    NonPositiveIndex(i64),
    #[error("field is singular on the {grid}³ grid (min |X|² = {min:.3e})")]
    SingularField { grid: usize, min: f64 },
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&coeff::format_rational(r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ABCParams {
    #[serde(serialize_with = "ser_rational")]
    pub a: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub b: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub c: BigRational,
    /// `1 = A ≥ B ≥ C ≥ 0`.
    pub normalized: bool,
}

impl ABCParams {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Result<Self, ModelError> {
        if a.is_negative() || b.is_negative() || c.is_negative() {
            return Err(ModelError::NegativeParameter);
        }
        let normalized = a.is_one() && a >= b && b >= c;
        Ok(ABCParams { a, b, c, normalized })
    }

    /// Integer-ratio shorthand: `from_ratios((1,1), (3,5), (3,5))`.
    pub fn from_ratios(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> Result<Self, ModelError> {
        let r = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self::new(r(a), r(b), r(c))
    }

    pub fn ints(a: i64, b: i64, c: i64) -> Result<Self, ModelError> {
        Self::from_ratios((a, 1), (b, 1), (c, 1))
    }

    fn label(&self) -> String {
        [&self.a, &self.b, &self.c].map(coeff::format_rational).join(", ")
    }
}

/// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
pub fn abc_field(p: &ABCParams) -> VectorField {
    let (a, b, c) = (coeff::from_rational(&p.a), coeff::from_rational(&p.b), coeff::from_rational(&p.c));
    let term = |t: TrigPoly, k: &Coeff| t.scale(k);
    VectorField::new([
        Scalar::from(&term(sin_axis(2, 1), &a) + &term(cos_axis(1, 1), &c)),
        Scalar::from(&term(sin_axis(0, 1), &b) + &term(cos_axis(2, 1), &a)),
        Scalar::from(&term(sin_axis(1, 1), &c) + &term(cos_axis(0, 1), &b)),
    ])
}

/// `B² + C² ≤ 1`, exactly, for normalized parameters.
pub fn abc_nonsingular(p: &ABCParams) -> Result<bool, ModelError> {
    if !p.normalized {
        return Err(ModelError::Unnormalized(p.label()));
    }
    Ok(&p.b * &p.b + &p.c * &p.c <= BigRational::one())
}

fn check_index(n: i64) -> Result<i32, ModelError> {
    if n <= 0 || n > i32::MAX as i64 {
        return Err(ModelError::NonPositiveIndex(n));
    }
    Ok(n as i32)
}

/// `αₙ = sin(nz) dx + cos(nz) dy`.
pub fn giroux_form(n: i64) -> Result<KForm, ModelError> {
    let n = check_index(n)?;
    Ok(KForm::one_form([Scalar::from(sin_axis(2, n)), Scalar::from(cos_axis(2, n)), Scalar::zero()]))
}

/// `Xₙ = sin(nz) ∂x + cos(nz) ∂y`, the Reeb field of `αₙ`.
pub fn giroux_reeb(n: i64) -> Result<VectorField, ModelError> {
    let n = check_index(n)?;
    Ok(VectorField::new([Scalar::from(sin_axis(2, n)), Scalar::from(cos_axis(2, n)), Scalar::zero()]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HomotopyVerdict {
    Trivial,
    Inconclusive,
}

/// A spherical cap missed by the Gauss map `X/|X|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmittedCap {
    pub center: [f64; 3],
    /// Angular radius in radians.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomotopyCertificate {
    pub verdict: HomotopyVerdict,
    pub omitted_cap: Option<OmittedCap>,
    pub resolution: usize,
    /// Smallest sampled angle between the image and the best candidate center.
    pub min_angle: f64,
    /// Continuity margin `G·h√3/min|X|`.
    pub margin: f64,
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn angle(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    (u[0] * v[0] + u[1] * v[1] + u[2] * v[2]).clamp(-1.0, 1.0).acos()
}

/// Candidate cap centers: the negated centroid of the image, then the 26
/// nonzero directions of `{−1,0,1}³`.
fn candidate_axes(units: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut sum = [0.0; 3];
    for u in units {
        for i in 0..3 {
            sum[i] += u[i];
        }
    }
    let n = units.len().max(1) as f64;
    let mean = [-sum[0] / n, -sum[1] / n, -sum[2] / n];
    let mut out: Vec<[f64; 3]> = Vec::with_capacity(27);
    if mean.iter().map(|c| c * c).sum::<f64>() > 1e-18 {
        out.extend(normalize(mean));
    }
    for i in [1, 0, -1] {
        for j in [1, 0, -1] {
            for k in [1, 0, -1] {
                if let Some(d) = normalize([i as f64, j as f64, k as f64]) {
                    out.push(d);
                }
            }
        }
    }
    out
}

/// Largest `|∇X_i|` bound over the components.
fn component_gradient(x: &VectorField, grid: &Grid) -> f64 {
    x.components()
        .iter()
        .map(|c| match c.as_trig() {
            Some(p) => p.gradient_bound(),
            None => grid.gradient_estimate(&c.grid_values(grid)),
        })
        .fold(0.0, f64::max)
}

/// Checks that no sample of `X/|X|` on an `n³` grid falls inside the cap.
fn cap_avoided(x: &VectorField, center: &[f64; 3], radius: f64, n: usize) -> bool {
    let grid = Grid::new(n);
    (0..grid.len()).all(|i| normalize(x.eval(&grid.point(i))).is_some_and(|u| angle(&u, center) > radius))
}

/// One-sided certificate that the Gauss map of `X` is null-homotopic: it
/// searches for a spherical cap that the sampled image provably avoids.
pub fn gauss_certificate(x: &VectorField, resolution: usize) -> Result<HomotopyCertificate, ModelError> {
    let grid = Grid::new(resolution);
    let ns = x.nonsingular_certificate(resolution);
    if !ns.passed {
        return Err(ModelError::SingularField { grid: resolution, min: ns.min_abs });
    }
    let vals: Vec<[f64; 3]> = (0..grid.len()).map(|i| x.eval(&grid.point(i))).collect();
    let min_norm = vals.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).fold(f64::INFINITY, f64::min);
    let units: Vec<[f64; 3]> = vals.iter().map(|v| normalize(*v).expect("nonsingular")).collect();
    let margin = component_gradient(x, &grid) * grid.spacing() * 3f64.sqrt() / min_norm;

    let mut best: Option<([f64; 3], f64)> = None;
    for axis in candidate_axes(&units) {
        let min_angle = units.iter().map(|u| angle(u, &axis)).fold(f64::INFINITY, f64::min);
        if best.is_none_or(|(_, m)| min_angle > m + 1e-12) {
            best = Some((axis, min_angle));
        }
    }
    let (center, min_angle) = best.expect("26 lattice directions");
    let radius = (min_angle - margin) / 2.0;
    let trivial = min_angle > margin && cap_avoided(x, &center, radius, 2 * resolution);
    Ok(HomotopyCertificate {
        verdict: if trivial { HomotopyVerdict::Trivial } else { HomotopyVerdict::Inconclusive },
        omitted_cap: trivial.then_some(OmittedCap { center, radius }),
        resolution,
        min_angle,
        margin,
    })
}

/// `E = ½∫ g(X,X) dμ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Energy {
    /// `E/π³` when the integrand is a trigonometric polynomial.
    pub pi_cubed_multiple: Option<Coeff>,
    pub value: f64,
}

impl Serialize for Energy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Energy", 3)?;
        st.serialize_field("exact", &self.pi_cubed_multiple.is_some())?;
        st.serialize_field("pi_cubed_multiple", &self.pi_cubed_multiple.as_ref().map(coeff::format))?;
        st.serialize_field("value", &self.value)?;
        st.end()
    }
}

pub fn energy(x: &VectorField, g: &Metric, mu: &VolumeForm) -> Energy {
    let integrand = &g.inner(x, x) * mu.density();
    match integrand.as_trig() {
        Some(p) => {
            // ½·(2π)³·mean = 4π³·mean
            let m = p.mean() * coeff::int(4);
            let value = coeff::to_f64(&m) * PI.powi(3);
            Energy { pi_cubed_multiple: Some(m), value }
        }
        None => {
            let mean = integrand.mean_f64(&Grid::new(2 * VERIFY_GRID));
            Energy { pi_cubed_multiple: None, value: 4.0 * PI.powi(3) * mean }
        }
    }
}

/// `A² + B² + C²` as a coefficient.
pub fn abc_energy_multiple(p: &ABCParams) -> Coeff {
    let s = &p.a * &p.a + &p.b * &p.b + &p.c * &p.c;
    coeff::from_rational(&(s * BigRational::from_integer(4.into())))
}

/// The field's Gauss-map certificate at the default verification grid.
pub fn gauss_certificate_default(x: &VectorField) -> Result<HomotopyCertificate, ModelError> {
    gauss_certificate(x, VERIFY_GRID)
}
