//! Metric operators: musical isomorphisms, Hodge star, curl for an
//! independent metric/volume pair, divergence and cross product.

use serde::Serialize;
use thiserror::Error;

use crate::field::{Metric, VectorField, VolumeForm};
use crate::form::{ext_d, interior, wedge, FormError, KForm};
use crate::grid::{Certificate, Grid, VERIFY_GRID};
use crate::scalar::Scalar;

/// Grid tolerance for identities that cannot be decided exactly.
pub const NUMERIC_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error("metric determinant has no nonvanishing witness on the {0}³ grid")]
    NonInvertibleMetric(usize),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Field `V` with `ι_V(m dx∧dy∧dz) = b`.
pub(crate) fn two_form_to_field(b: &KForm, density: &Scalar) -> VectorField {
    debug_assert_eq!(b.degree(), 2);
    let c = b.components();
    // sorted basis: [dx∧dy, dx∧dz, dy∧dz]
    VectorField::new([c[2].div(density), (-&c[1]).div(density), c[0].div(density)])
}

/// `ι_V(m dx∧dy∧dz)`.
pub(crate) fn field_to_two_form(v: &VectorField, density: &Scalar) -> KForm {
    let c = v.components();
    KForm::two_form(density * &c[2], -&(density * &c[1]), density * &c[0])
}

/// `ι_X g`, the 1-form `v ↦ g(X, v)`.
pub fn flat(x: &VectorField, g: &Metric) -> KForm {
    KForm::one_form(g.apply(x.components()))
}

/// Inverse of [`flat`].
pub fn sharp(a: &KForm, g: &Metric) -> Result<VectorField, CalculusError> {
    if a.degree() != 1 {
        return Err(FormError::WrongDegree { expected: 1, got: a.degree() }.into());
    }
    let det = g.determinant();
    let cert = Certificate::nonvanishing(&det, VERIFY_GRID);
    if !cert.passed {
        return Err(CalculusError::NonInvertibleMetric(VERIFY_GRID));
    }
    let adj = g.adjugate();
    let comps: [Scalar; 3] = a.components().to_vec().try_into().expect("1-form");
    let m = Metric::new(adj).expect("adjugate of a symmetric matrix is symmetric");
    let v = m.apply(&comps);
    Ok(VectorField::new(v.map(|c| c.div(&det))))
}

/// Hodge star with respect to the Riemannian volume of `g`.
pub fn hodge(a: &KForm, g: &Metric) -> Result<KForm, CalculusError> {
    let vol = VolumeForm::of_metric(g);
    let s = vol.density();
    Ok(match a.degree() {
        0 => KForm::three_form(a.scalar() * s),
        1 => field_to_two_form(&sharp(a, g)?, s),
        2 => flat(&two_form_to_field(a, s), g),
        _ => KForm::function(a.scalar().div(s)),
    })
}

/// Curl for metric `g` and volume `μ`: the field `W` with `ι_W μ = d ι_X g`.
pub fn curl(x: &VectorField, g: &Metric, mu: &VolumeForm) -> VectorField {
    let beta = ext_d(&flat(x, g));
    two_form_to_field(&beta, mu.density())
}

/// Curl by the classical Riemannian formula `(* d ι_X g)^#`.
pub fn curl_hodge(x: &VectorField, g: &Metric) -> Result<VectorField, CalculusError> {
    let star = hodge(&ext_d(&flat(x, g)), g)?;
    sharp(&star, g)
}

/// Outcome of a divergence-free check `d ι_X μ = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct VolumeCheck {
    pub preserving: bool,
    /// Coefficient of `d ι_X μ` against `dx∧dy∧dz`.
    pub residual: Scalar,
    pub max_abs: f64,
    pub exact: bool,
}

pub fn is_volume_preserving(x: &VectorField, mu: &VolumeForm) -> VolumeCheck {
    volume_check_on(x, mu, &Grid::verification())
}

pub fn volume_check_on(x: &VectorField, mu: &VolumeForm, grid: &Grid) -> VolumeCheck {
    let d = ext_d(&interior(x, &mu.to_kform()).expect("3-form"));
    let residual = d.scalar().clone();
    match residual.exact_zero() {
        Some(z) => {
            VolumeCheck { preserving: z, max_abs: if z { 0.0 } else { residual.max_norm(grid) }, residual, exact: true }
        }
        None => {
            let max_abs = residual.max_norm(grid);
            VolumeCheck { preserving: max_abs < NUMERIC_IDENTITY_TOL, residual, max_abs, exact: false }
        }
    }
}

/// Cross product fixed by `ι_{V×W} μ_g = V♭ ∧ W♭`, with `μ_g` the metric volume.
pub fn cross(v: &VectorField, w: &VectorField, g: &Metric) -> VectorField {
    let b = wedge(&flat(v, g), &flat(w, g)).expect("1-forms");
    two_form_to_field(&b, VolumeForm::of_metric(g).density())
}
