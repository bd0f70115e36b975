//! Vector fields, metrics and volume forms with scalar-field entries.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::form::KForm;
use crate::grid::{Certificate, Grid};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [Scalar; 3],
}

impl VectorField {
    pub fn new(comps: [Scalar; 3]) -> Self {
        VectorField { comps }
    }

    pub fn from_vec(v: Vec<Scalar>) -> Option<Self> {
        let arr: [Scalar; 3] = v.try_into().ok()?;
        Some(VectorField { comps: arr })
    }

    pub fn zero() -> Self {
        Self::new([Scalar::zero(), Scalar::zero(), Scalar::zero()])
    }

    /// Coordinate field `∂/∂x_axis`.
    pub fn coordinate(axis: usize) -> Self {
        let mut v = Self::zero();
        v.comps[axis] = Scalar::one();
        v
    }

    pub fn components(&self) -> &[Scalar; 3] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Scalar {
        &self.comps[i]
    }

    pub fn is_exact(&self) -> bool {
        self.comps.iter().all(Scalar::is_exact)
    }

    pub fn eval(&self, x: &[f64; 3]) -> [f64; 3] {
        [self.comps[0].eval(x), self.comps[1].eval(x), self.comps[2].eval(x)]
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        VectorField { comps: [f(&self.comps[0]), f(&self.comps[1]), f(&self.comps[2])] }
    }

    pub fn zip(&self, o: &Self, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Self {
        VectorField {
            comps: [f(&self.comps[0], &o.comps[0]), f(&self.comps[1], &o.comps[1]), f(&self.comps[2], &o.comps[2])],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map(|c| s * c)
    }

    /// Euclidean dot product of two fields.
    pub fn dot(&self, o: &Self) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..3 {
            acc = &acc + &(&self.comps[i] * &o.comps[i]);
        }
        acc
    }

    /// Euclidean cross product.
    pub fn cross_euclid(&self, o: &Self) -> Self {
        let (a, b) = (&self.comps, &o.comps);
        VectorField::new([
            &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
            &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
            &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
        ])
    }

    pub fn norm_sq_euclid(&self) -> Scalar {
        self.dot(self)
    }

    /// Exact zero test for polynomial data.
    pub fn exact_zero(&self) -> Option<bool> {
        let mut all = true;
        for c in &self.comps {
            all &= c.exact_zero()?;
        }
        Some(all)
    }

    /// Max-norm over the grid of the largest component.
    pub fn max_norm(&self, grid: &Grid) -> f64 {
        self.comps.iter().map(|c| c.max_norm(grid)).fold(0.0, f64::max)
    }

    pub fn witnesses_pass(&self) -> bool {
        self.comps.iter().all(Scalar::witnesses_pass)
    }

    /// Nonsingularity certificate: `min ‖X‖² > 0` (exact bound when possible).
    pub fn nonsingular_certificate(&self, n: usize) -> Certificate {
        Certificate::nonvanishing(&self.norm_sq_euclid(), n)
    }
}

impl Serialize for VectorField {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.comps.serialize(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric entry g{}{} differs from g{}{}", .0 + 1, .1 + 1, .1 + 1, .0 + 1)]
    NotSymmetric(usize, usize),
}

/// Symmetric 3×3 metric with scalar-field entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    entries: [[Scalar; 3]; 3],
}

impl Metric {
    pub fn new(entries: [[Scalar; 3]; 3]) -> Result<Self, MetricError> {
        for i in 0..3 {
            for j in i + 1..3 {
                if entries[i][j] != entries[j][i] {
                    return Err(MetricError::NotSymmetric(i, j));
                }
            }
        }
        Ok(Metric { entries })
    }

    pub fn euclidean() -> Self {
        Self::diagonal([Scalar::one(), Scalar::one(), Scalar::one()])
    }

    pub fn diagonal(d: [Scalar; 3]) -> Self {
        let z = Scalar::zero;
        let [a, b, c] = d;
        Metric { entries: [[a, z(), z()], [z(), b, z()], [z(), z(), c]] }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[[Scalar; 3]; 3] {
        &self.entries
    }

    pub fn is_euclidean(&self) -> bool {
        *self == Self::euclidean()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().flatten().all(Scalar::is_exact)
    }

    /// `g(u, v)`.
    pub fn inner(&self, u: &VectorField, v: &VectorField) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..3 {
            for j in 0..3 {
                let t = &(&self.entries[i][j] * u.component(i)) * v.component(j);
                acc = &acc + &t;
            }
        }
        acc
    }

    pub fn apply(&self, v: &[Scalar; 3]) -> [Scalar; 3] {
        std::array::from_fn(|i| {
            let mut acc = Scalar::zero();
            for j in 0..3 {
                acc = &acc + &(&self.entries[i][j] * &v[j]);
            }
            acc
        })
    }

    pub fn determinant(&self) -> Scalar {
        det3(&self.entries)
    }

    /// Cofactor matrix transpose; `g⁻¹ = adj(g)/det(g)`.
    pub fn adjugate(&self) -> [[Scalar; 3]; 3] {
        adjugate3(&self.entries)
    }

    /// Grid certificate that the leading principal minors stay positive.
    pub fn positivity_certificate(&self, n: usize) -> [Certificate; 3] {
        let e = &self.entries;
        let m1 = e[0][0].clone();
        let m2 = &(&e[0][0] * &e[1][1]) - &(&e[0][1] * &e[1][0]);
        let m3 = self.determinant();
        [m1, m2, m3].map(|m| Certificate::nonvanishing(&m, n))
    }

    pub fn is_positive_definite(&self, n: usize) -> bool {
        self.positivity_certificate(n).iter().all(Certificate::positive)
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(s)
    }
}

pub(crate) fn det3(m: &[[Scalar; 3]; 3]) -> Scalar {
    let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
    let t0 = &m[0][0] * &minor(1, 2, 2, 1);
    let t1 = &m[0][1] * &minor(0, 2, 2, 0);
    let t2 = &m[0][2] * &minor(0, 1, 1, 0);
    &(&t0 - &t1) + &t2
}

pub(crate) fn adjugate3(m: &[[Scalar; 3]; 3]) -> [[Scalar; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| &(&m[r0][c0] * &m[r1][c1]) - &(&m[r0][c1] * &m[r1][c0]);
    // adj[i][j] = cofactor C_{ji}
    [
        [cof(1, 2, 1, 2), -&cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-&cof(1, 2, 0, 2), cof(0, 2, 0, 2), -&cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -&cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ]
}

/// Volume form `m·dx∧dy∧dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeForm {
    density: Scalar,
}

impl VolumeForm {
    pub fn new(density: Scalar) -> Self {
        VolumeForm { density }
    }

    pub fn standard() -> Self {
        Self::new(Scalar::one())
    }

    pub fn density(&self) -> &Scalar {
        &self.density
    }

    pub fn to_kform(&self) -> KForm {
        KForm::three_form(self.density.clone())
    }

    pub fn is_standard(&self) -> bool {
        self.density == Scalar::one()
    }

    /// Constant-sign certificate for the density.
    pub fn certificate(&self, n: usize) -> Certificate {
        Certificate::nonvanishing(&self.density, n)
    }

    /// Riemannian volume `√det g · dx∧dy∧dz`.
    pub fn of_metric(g: &Metric) -> Self {
        Self::new(g.determinant().sqrt())
    }
}

impl Serialize for VolumeForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.density.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, TrigPoly};

    #[test]
    fn asymmetric_metric_rejected() {
        let mut e: [[Scalar; 3]; 3] = Metric::euclidean().entries().clone();
        e[0][1] = Scalar::from_int(1);
        assert_eq!(Metric::new(e), Err(MetricError::NotSymmetric(0, 1)));
    }

    #[test]
    fn adjugate_inverts() {
        let g = Metric::new([
            [Scalar::from_int(2), Scalar::from_int(1), Scalar::zero()],
            [Scalar::from_int(1), Scalar::from_int(3), Scalar::zero()],
            [Scalar::zero(), Scalar::zero(), Scalar::from(&TrigPoly::from_int(2) + &cos_axis(2, 1))],
        ])
        .unwrap();
        let adj = g.adjugate();
        let det = g.determinant();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Scalar::zero();
                for k in 0..3 {
                    acc = &acc + &(g.entry(i, k) * &adj[k][j]);
                }
                let expected = if i == j { det.clone() } else { Scalar::zero() };
                assert_eq!(acc, expected);
            }
        }
        assert!(g.is_positive_definite(16));
    }

    #[test]
    fn euclidean_volume_is_standard() {
        assert!(VolumeForm::of_metric(&Metric::euclidean()).is_standard());
    }
}
