//! Differential forms on T³ in the coordinate coframe `dx, dy, dz`.
//!
//! A k-form stores one coefficient per sorted multi-index; basis elements are
//! encoded as 3-bit masks (`dx = 0b001`, `dy = 0b010`, `dz = 0b100`), which
//! makes wedge signs, `d` and contraction uniform across degrees.

use thiserror::Error;

use crate::field::VectorField;
use crate::grid::Grid;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("wedge of degrees {0} and {1} exceeds 3")]
    DegreeOverflow(usize, usize),
    #[error("interior product of a 0-form")]
    DegreeZero,
    #[error("expected a {expected}-form, got a {got}-form")]
    WrongDegree { expected: usize, got: usize },
    #[error("a {degree}-form has {expected} components, got {got}")]
    ComponentCount { degree: usize, expected: usize, got: usize },
}

const BASIS: [&[u8]; 4] = [&[0b000], &[0b001, 0b010, 0b100], &[0b011, 0b101, 0b110], &[0b111]];

/// Sorted-index basis masks for a degree.
pub fn basis(degree: usize) -> &'static [u8] {
    BASIS[degree]
}

fn slot(degree: usize, mask: u8) -> usize {
    basis(degree).iter().position(|&m| m == mask).expect("mask of matching degree")
}

fn axes(mask: u8) -> impl Iterator<Item = usize> {
    (0..3).filter(move |a| mask & (1 << a) != 0)
}

/// Sign of `e_I ∧ e_J` relative to `e_{I∪J}` for disjoint masks.
fn wedge_sign(i: u8, j: u8) -> i64 {
    let inversions = axes(i).map(|a| axes(j).filter(|&b| b < a).count()).sum::<usize>();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Debug)]
pub struct KForm {
    degree: usize,
    comps: Vec<Scalar>,
    beyond_top: bool,
}

impl KForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= 3);
        KForm { degree, comps: vec![Scalar::zero(); basis(degree).len()], beyond_top: false }
    }

    /// Builds a form from coefficients in sorted-index order:
    /// `[f]`, `[dx, dy, dz]`, `[dx∧dy, dx∧dz, dy∧dz]`, `[dx∧dy∧dz]`.
    pub fn new(degree: usize, comps: Vec<Scalar>) -> Result<Self, FormError> {
        if degree > 3 {
            return Err(FormError::DegreeOverflow(degree, 0));
        }
        let expected = basis(degree).len();
        if comps.len() != expected {
            return Err(FormError::ComponentCount { degree, expected, got: comps.len() });
        }
        Ok(KForm { degree, comps, beyond_top: false })
    }

    pub fn function(f: Scalar) -> Self {
        KForm { degree: 0, comps: vec![f], beyond_top: false }
    }

    pub fn one_form(a: [Scalar; 3]) -> Self {
        KForm { degree: 1, comps: a.into(), beyond_top: false }
    }

    /// Two-form `a·dx∧dy + b·dx∧dz + c·dy∧dz`.
    pub fn two_form(dxdy: Scalar, dxdz: Scalar, dydz: Scalar) -> Self {
        KForm { degree: 2, comps: vec![dxdy, dxdz, dydz], beyond_top: false }
    }

    pub fn three_form(c: Scalar) -> Self {
        KForm { degree: 3, comps: vec![c], beyond_top: false }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Scalar] {
        &self.comps
    }

    /// True for the zero form returned by `d` of a 3-form.
    pub fn is_beyond_top(&self) -> bool {
        self.beyond_top
    }

    /// Coefficient of the basis element with the given (sorted) mask.
    pub fn coefficient(&self, mask: u8) -> &Scalar {
        &self.comps[slot(self.degree, mask)]
    }

    /// Coefficient of `dx_{i1} ∧ … ∧ dx_{ik}` for arbitrary index order.
    pub fn get(&self, idx: &[usize]) -> Scalar {
        assert_eq!(idx.len(), self.degree, "index length must match degree");
        let mut mask = 0u8;
        let mut sign = 1;
        for (p, &a) in idx.iter().enumerate() {
            if mask & (1 << a) != 0 {
                return Scalar::zero();
            }
            if idx[..p].iter().filter(|&&b| b > a).count() % 2 == 1 {
                sign = -sign;
            }
            mask |= 1 << a;
        }
        let c = self.coefficient(mask);
        if sign < 0 {
            -c
        } else {
            c.clone()
        }
    }

    /// The single coefficient of a 0- or 3-form.
    pub fn scalar(&self) -> &Scalar {
        assert!(self.degree == 0 || self.degree == 3);
        &self.comps[0]
    }

    pub fn is_exact(&self) -> bool {
        self.comps.iter().all(Scalar::is_exact)
    }

    /// Exact zero test for polynomial data, `None` otherwise.
    pub fn exact_zero(&self) -> Option<bool> {
        let mut all = true;
        for c in &self.comps {
            all &= c.exact_zero()?;
        }
        Some(all)
    }

    /// Max over components of the grid max-norm (0 for exactly vanishing data).
    pub fn max_norm(&self, grid: &Grid) -> f64 {
        self.comps.iter().map(|c| c.max_norm(grid)).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[f64; 3]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(x)).collect()
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        KForm { degree: self.degree, comps: self.comps.iter().map(f).collect(), beyond_top: false }
    }

    pub fn add(&self, o: &KForm) -> Result<KForm, FormError> {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &KForm) -> Result<KForm, FormError> {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: &Scalar) -> KForm {
        self.map(|c| c * s)
    }

    fn zip(&self, o: &KForm, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Result<KForm, FormError> {
        if self.degree != o.degree {
            return Err(FormError::WrongDegree { expected: self.degree, got: o.degree });
        }
        Ok(KForm {
            degree: self.degree,
            comps: self.comps.iter().zip(&o.comps).map(|(a, b)| f(a, b)).collect(),
            beyond_top: false,
        })
    }

    pub fn witnesses_pass(&self) -> bool {
        self.comps.iter().all(Scalar::witnesses_pass)
    }
}

/// Serializes as `{"degree": k, "components": [...]}` in sorted basis order.
impl serde::Serialize for KForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("KForm", 2)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("components", &self.comps)?;
        st.end()
    }
}

impl PartialEq for KForm {
    fn eq(&self, o: &Self) -> bool {
        self.degree == o.degree && self.comps == o.comps
    }
}

/// Exterior product; graded-antisymmetric.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm, FormError> {
    let degree = a.degree + b.degree;
    if degree > 3 {
        return Err(FormError::DegreeOverflow(a.degree, b.degree));
    }
    let mut out = KForm::zero(degree);
    for (i, &mi) in basis(a.degree).iter().enumerate() {
        for (j, &mj) in basis(b.degree).iter().enumerate() {
            if mi & mj != 0 {
                continue;
            }
            let prod = &a.comps[i] * &b.comps[j];
            let s = slot(degree, mi | mj);
            out.comps[s] = if wedge_sign(mi, mj) > 0 { &out.comps[s] + &prod } else { &out.comps[s] - &prod };
        }
    }
    Ok(out)
}

/// Exterior derivative. `d` of a 3-form is the zero 3-form flagged
/// [`KForm::is_beyond_top`].
pub fn ext_d(a: &KForm) -> KForm {
    if a.degree == 3 {
        let mut z = KForm::zero(3);
        z.beyond_top = true;
        return z;
    }
    let degree = a.degree + 1;
    let mut out = KForm::zero(degree);
    for (i, &mi) in basis(a.degree).iter().enumerate() {
        for j in 0..3 {
            let mj = 1u8 << j;
            if mi & mj != 0 {
                continue;
            }
            let dj = a.comps[i].partial(j);
            let s = slot(degree, mi | mj);
            out.comps[s] = if wedge_sign(mj, mi) > 0 { &out.comps[s] + &dj } else { &out.comps[s] - &dj };
        }
    }
    out
}

/// Contraction `ι_X a`.
pub fn interior(x: &VectorField, a: &KForm) -> Result<KForm, FormError> {
    if a.degree == 0 {
        return Err(FormError::DegreeZero);
    }
    let degree = a.degree - 1;
    let mut out = KForm::zero(degree);
    for (i, &mi) in basis(a.degree).iter().enumerate() {
        for (p, ax) in axes(mi).enumerate() {
            let rest = mi & !(1 << ax);
            let term = &x.components()[ax] * &a.comps[i];
            let s = slot(degree, rest);
            out.comps[s] = if p % 2 == 0 { &out.comps[s] + &term } else { &out.comps[s] - &term };
        }
    }
    Ok(out)
}

/// Lie derivative by Cartan's formula `L_X a = ι_X da + d ι_X a`.
pub fn lie_derivative(x: &VectorField, a: &KForm) -> KForm {
    let first = if a.degree == 3 { KForm::zero(3) } else { interior(x, &ext_d(a)).expect("degree ≥ 1") };
    if a.degree == 0 {
        return first;
    }
    let second = ext_d(&interior(x, a).expect("degree ≥ 1"));
    first.add(&second).expect("same degree")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::{cos_axis, sin_axis, TrigPoly};

    fn s(p: TrigPoly) -> Scalar {
        Scalar::from(p)
    }

    #[test]
    fn sin_dx_wedge_cos_dy() {
        let a = KForm::one_form([s(sin_axis(2, 1)), Scalar::zero(), Scalar::zero()]);
        let b = KForm::one_form([Scalar::zero(), s(cos_axis(2, 1)), Scalar::zero()]);
        let w = wedge(&a, &b).unwrap();
        let half_sin2z = TrigPoly::sin(crate::trig::Mode::new(0, 0, 2), crate::coeff::ratio(1, 2));
        assert_eq!(w, KForm::two_form(s(half_sin2z), Scalar::zero(), Scalar::zero()));
        assert_eq!(wedge(&a, &a).unwrap().exact_zero(), Some(true));
    }

    #[test]
    fn degree_overflow() {
        let a = KForm::two_form(Scalar::one(), Scalar::zero(), Scalar::zero());
        assert_eq!(wedge(&a, &a), Err(FormError::DegreeOverflow(2, 2)));
        let top = ext_d(&KForm::three_form(Scalar::one()));
        assert!(top.is_beyond_top());
        assert_eq!(top.exact_zero(), Some(true));
    }

    #[test]
    fn d_of_sin_nz_dx() {
        for n in 1..4 {
            let a = KForm::one_form([s(sin_axis(2, n)), Scalar::zero(), Scalar::zero()]);
            let da = ext_d(&a);
            // n cos(nz) dz∧dx = −n cos(nz) dx∧dz
            assert_eq!(da.get(&[2, 0]), s(cos_axis(2, n).scale(&crate::coeff::int(n as i64))));
            assert_eq!(da.get(&[0, 2]), s(cos_axis(2, n).scale(&crate::coeff::int(-(n as i64)))));
        }
    }

    #[test]
    fn contraction_of_basis() {
        let ex = VectorField::new([Scalar::one(), Scalar::zero(), Scalar::zero()]);
        let dxdy = KForm::two_form(Scalar::one(), Scalar::zero(), Scalar::zero());
        let c = interior(&ex, &dxdy).unwrap();
        assert_eq!(c, KForm::one_form([Scalar::zero(), Scalar::one(), Scalar::zero()]));
        assert_eq!(interior(&ex, &KForm::function(Scalar::one())), Err(FormError::DegreeZero));
    }

    #[test]
    fn lie_derivative_along_x_translation() {
        let ex = VectorField::new([Scalar::one(), Scalar::zero(), Scalar::zero()]);
        let a = KForm::one_form([Scalar::zero(), s(sin_axis(0, 1)), Scalar::zero()]);
        let l = lie_derivative(&ex, &a);
        assert_eq!(l, KForm::one_form([Scalar::zero(), s(cos_axis(0, 1)), Scalar::zero()]));
    }

    #[test]
    fn permuted_index_lookup() {
        let w = KForm::two_form(Scalar::from_int(1), Scalar::from_int(2), Scalar::from_int(3));
        assert_eq!(w.get(&[1, 0]), Scalar::from_int(-1));
        assert_eq!(w.get(&[2, 0]), Scalar::from_int(-2));
        assert_eq!(w.get(&[1, 1]), Scalar::zero());
    }
}
