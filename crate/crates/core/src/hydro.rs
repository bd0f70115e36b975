//! Beltrami detection, contact forms and Reeb fields, the adapted metric
//! that turns a rescaled Reeb field into a Beltrami field, and steady Euler
//! verification with pressure recovery.
//!
//! Cross products follow `ι_{V×W} μ_g = V♭ ∧ W♭` with `μ_g` the metric volume,
//! and the Euler 1-form is `β = −(X × ∇×X)♭`, so a steady solution has `dp = β`.

use serde::Serialize;
use thiserror::Error;

use crate::calculus::{
    cross, curl, flat, is_volume_preserving, two_form_to_field, CalculusError, NUMERIC_IDENTITY_TOL,
};
use crate::coeff::{self, Coeff};
use crate::field::{Metric, VectorField, VolumeForm};
use crate::form::{ext_d, interior, wedge, FormError, KForm};
use crate::grid::{Certificate, Grid, VERIFY_GRID};
use crate::scalar::Scalar;
use crate::trig::{Mode, Parity, TrigPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HydroError {
    #[error("field is singular: min |X|² = {:.3e} does not beat the margin {:.3e}", .0.min_abs, .0.margin)]
    SingularField(Certificate),
    #[error("1-form is not contact")]
    NotContact,
    #[error("contact density is not constant and has no nonvanishing witness")]
    NoWitness(Certificate),
    #[error("field is not the Reeb field of the form")]
    NotReeb,
    #[error("scale function has no positivity witness")]
    NonPositiveScale(Certificate),
    #[error("field is not rotational Beltrami (status {0:?})")]
    NonRotational(BeltramiStatus),
    #[error("1-form ι_X g is not closed; field is not curl-free")]
    NotCurlFree,
    #[error("every coordinate field degenerates against ker α somewhere on the grid")]
    DegenerateFrame,
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Size of a quantity that should vanish.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub max_abs: f64,
    /// Decided by exact polynomial comparison rather than on the grid.
    pub exact: bool,
    pub vanishes: bool,
}

impl Residual {
    pub fn zero() -> Self {
        Residual { max_abs: 0.0, exact: true, vanishes: true }
    }

    fn combine(parts: impl IntoIterator<Item = Residual>) -> Self {
        parts.into_iter().fold(Residual::zero(), |a, b| Residual {
            max_abs: a.max_abs.max(b.max_abs),
            exact: a.exact && b.exact,
            vanishes: a.vanishes && b.vanishes,
        })
    }

    pub fn of_scalar(s: &Scalar) -> Self {
        let grid = Grid::verification();
        match s.exact_zero() {
            Some(true) => Residual::zero(),
            Some(false) => Residual { max_abs: s.max_norm(&grid), exact: true, vanishes: false },
            None => {
                let m = s.max_norm(&grid);
                Residual { max_abs: m, exact: false, vanishes: m < NUMERIC_IDENTITY_TOL }
            }
        }
    }

    pub fn of_field(v: &VectorField) -> Self {
        Self::combine(v.components().iter().map(Self::of_scalar))
    }

    pub fn of_form(a: &KForm) -> Self {
        Self::combine(a.components().iter().map(Self::of_scalar))
    }
}

fn directional(x: &VectorField, f: &Scalar) -> Scalar {
    let mut acc = Scalar::zero();
    for i in 0..3 {
        acc = &acc + &(x.component(i) * &f.partial(i));
    }
    acc
}

fn one_form_field(a: &KForm) -> VectorField {
    VectorField::from_vec(a.components().to_vec()).expect("1-form has three components")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BeltramiStatus {
    Rotational,
    CurlFree,
    NonBeltrami,
    /// Parallel to its curl, but the factor is not certified nonvanishing.
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct BeltramiReport {
    pub status: BeltramiStatus,
    /// `f` with `∇×X = fX`.
    pub factor: Option<Scalar>,
    pub factor_certificate: Option<Certificate>,
    /// Max-norm of `∇×X − fX`, or of the colinearity wedge when no `f` exists.
    pub residual: Residual,
    /// Max-norm of `ι_X g ∧ ι_{∇×X} g`.
    pub colinearity: Residual,
    /// Max-norm of `ι_X df`.
    pub f_is_integral_residual: Option<Residual>,
    #[serde(skip)]
    pub curl: VectorField,
}

impl BeltramiReport {
    pub fn constant_factor(&self) -> Option<Coeff> {
        self.factor.as_ref().and_then(Scalar::as_constant)
    }
}

/// `c` with `w = c·x` exactly, if the data are polynomial and such `c` exists.
fn constant_ratio(x: &VectorField, w: &VectorField) -> Option<Coeff> {
    let (i, p) =
        x.components().iter().enumerate().find_map(|(i, c)| c.as_trig().filter(|p| !p.is_zero()).map(|p| (i, p)))?;
    let (k, par, c) = p.terms().next()?;
    let cw = w.component(i).as_trig()?.coefficient(k, par);
    let ratio = cw / c.clone();
    let diff = w.sub(&x.scale(&Scalar::constant(ratio.clone())));
    (diff.exact_zero() == Some(true)).then_some(ratio)
}

/// `(W·X)/|X|²`, with the denominator scaled to a monic leading term so the
/// result does not depend on a constant rescaling of `X`.
fn factor_quotient(x: &VectorField, w: &VectorField) -> Scalar {
    let mut num = w.dot(x);
    let mut den = x.norm_sq_euclid();
    if let Some(lead) = den.as_trig().and_then(|p| p.terms().next().map(|(_, _, c)| c.clone())) {
        let inv = coeff::one() / lead;
        num = num.scale(&inv);
        den = den.scale(&inv);
    }
    num.div(&den)
}

/// Decides whether `X` is parallel to its curl and extracts the factor.
pub fn beltrami_factor(x: &VectorField, g: &Metric, mu: &VolumeForm) -> Result<BeltramiReport, HydroError> {
    let w = curl(x, g, mu);
    let curl_res = Residual::of_field(&w);
    if curl_res.vanishes {
        return Ok(BeltramiReport {
            status: BeltramiStatus::CurlFree,
            factor: Some(Scalar::zero()),
            factor_certificate: None,
            residual: curl_res,
            colinearity: Residual::zero(),
            f_is_integral_residual: Some(Residual::zero()),
            curl: w,
        });
    }
    if let Some(c) = constant_ratio(x, &w) {
        let f = Scalar::constant(c);
        return Ok(BeltramiReport {
            status: BeltramiStatus::Rotational,
            factor_certificate: Some(Certificate::nonvanishing(&f, VERIFY_GRID)),
            factor: Some(f),
            residual: Residual::zero(),
            colinearity: Residual::zero(),
            f_is_integral_residual: Some(Residual::zero()),
            curl: w,
        });
    }
    let colinearity = Residual::of_form(&wedge(&flat(x, g), &flat(&w, g))?);
    if !colinearity.vanishes {
        return Ok(BeltramiReport {
            status: BeltramiStatus::NonBeltrami,
            factor: None,
            factor_certificate: None,
            residual: colinearity,
            colinearity,
            f_is_integral_residual: None,
            curl: w,
        });
    }
    let ns = x.nonsingular_certificate(VERIFY_GRID);
    if !ns.passed {
        return Err(HydroError::SingularField(ns));
    }
    let f = factor_quotient(x, &w);
    let residual = Residual::of_field(&w.sub(&x.scale(&f)));
    let cert = Certificate::nonvanishing(&f, VERIFY_GRID);
    let status = if cert.passed { BeltramiStatus::Rotational } else { BeltramiStatus::Mixed };
    let integral = Residual::of_scalar(&directional(x, &f));
    Ok(BeltramiReport {
        status,
        factor: Some(f),
        factor_certificate: Some(cert),
        residual,
        colinearity,
        f_is_integral_residual: Some(integral),
        curl: w,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ContactVerdict {
    Contact,
    Degenerate,
}

/// Where a certificate holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Domain {
    Whole,
    /// The torus minus the zero set of the form (or field); grid points where
    /// its squared norm is at most `GRID_ZERO_TOL` are excised.
    OffZeroSet,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContactReport {
    pub verdict: ContactVerdict,
    pub domain: Domain,
    pub form: KForm,
    /// Coefficient of `α∧dα` against `dx∧dy∧dz`.
    pub density: Scalar,
    pub min_abs_density: f64,
    pub density_certificate: Certificate,
    /// Certificate for `density/|α|²` off the zero set of `α`.
    pub off_zero_set_certificate: Option<Certificate>,
    pub excised_points: usize,
}

impl ContactReport {
    pub fn is_contact(&self) -> bool {
        self.verdict == ContactVerdict::Contact
    }
}

pub fn is_contact(alpha: &KForm) -> Result<ContactReport, HydroError> {
    if alpha.degree() != 1 {
        return Err(FormError::WrongDegree { expected: 1, got: alpha.degree() }.into());
    }
    let density = wedge(alpha, &ext_d(alpha))?.scalar().clone();
    let cert = Certificate::nonvanishing(&density, VERIFY_GRID);
    let mut report = ContactReport {
        verdict: if cert.passed { ContactVerdict::Contact } else { ContactVerdict::Degenerate },
        domain: Domain::Whole,
        form: alpha.clone(),
        min_abs_density: cert.min_abs,
        density: density.clone(),
        density_certificate: cert.clone(),
        off_zero_set_certificate: None,
        excised_points: 0,
    };
    if cert.passed || density.exact_zero() == Some(true) {
        return Ok(report);
    }
    let a2 = one_form_field(alpha).norm_sq_euclid();
    if Certificate::nonvanishing(&a2, VERIFY_GRID).passed {
        return Ok(report);
    }
    let (ratio, excised) = Certificate::off_zero_set(&density, &a2, VERIFY_GRID);
    if ratio.passed && excised > 0 {
        report.verdict = ContactVerdict::Contact;
        report.domain = Domain::OffZeroSet;
        report.excised_points = excised;
    }
    report.off_zero_set_certificate = Some(ratio);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct ReebCheck {
    pub holds: bool,
    pub strict: bool,
    pub domain: Domain,
    /// Max-norm of `ι_X dα`.
    pub kernel_residual: Residual,
    /// `ι_X α`.
    pub normalization: Scalar,
    /// Strict mode: max-norm of `ι_X α − 1`.
    pub normalization_residual: Option<Residual>,
    /// Relaxed mode: positivity of `ι_X α` (of `ι_X α/|X|²` off the zero set).
    pub positivity: Option<Certificate>,
    pub excised_points: usize,
}

/// Checks `ι_X dα = 0` and either `ι_X α = 1` (strict) or `ι_X α > 0`.
pub fn verify_reeb(alpha: &KForm, x: &VectorField, strict: bool) -> Result<ReebCheck, HydroError> {
    let contact = is_contact(alpha)?;
    if !contact.is_contact() {
        return Err(HydroError::NotContact);
    }
    let kernel = Residual::of_form(&interior(x, &ext_d(alpha))?);
    let norm = interior(x, alpha)?.scalar().clone();
    let mut check = ReebCheck {
        holds: false,
        strict,
        domain: Domain::Whole,
        kernel_residual: kernel,
        normalization: norm.clone(),
        normalization_residual: None,
        positivity: None,
        excised_points: 0,
    };
    if strict {
        let r = Residual::of_scalar(&(&norm - &Scalar::one()));
        check.holds = kernel.vanishes && r.vanishes;
        check.normalization_residual = Some(r);
        return Ok(check);
    }
    let mut cert = Certificate::nonvanishing(&norm, VERIFY_GRID);
    if !cert.positive() && contact.domain == Domain::OffZeroSet {
        let (c, excised) = Certificate::off_zero_set(&norm, &x.norm_sq_euclid(), VERIFY_GRID);
        if c.positive() {
            check.domain = Domain::OffZeroSet;
            check.excised_points = excised;
        }
        cert = c;
    }
    check.holds = kernel.vanishes && cert.positive();
    check.positivity = Some(cert);
    Ok(check)
}

/// The Reeb field of a contact form: `V/(α∧dα)` with `ι_V dx∧dy∧dz = dα`.
pub fn reeb_field(alpha: &KForm) -> Result<VectorField, HydroError> {
    let contact = is_contact(alpha)?;
    if !contact.is_contact() {
        return Err(HydroError::NotContact);
    }
    let v = two_form_to_field(&ext_d(alpha), &Scalar::one());
    let density = contact.density;
    if density.as_constant().is_some() {
        return Ok(v.map(|c| c.div(&density)));
    }
    if !contact.density_certificate.passed {
        return Err(HydroError::NoWitness(contact.density_certificate));
    }
    Ok(v.map(|c| c.div(&density)))
}

#[derive(Clone, Debug, Serialize)]
pub struct BeltramiContact {
    pub beltrami: BeltramiReport,
    pub contact: ContactReport,
    pub reeb_like: ReebCheck,
}

/// `α = ι_X g` for a rotational Beltrami field, with its contact and
/// Reeb-like certificates.
pub fn contact_from_beltrami(x: &VectorField, g: &Metric, mu: &VolumeForm) -> Result<BeltramiContact, HydroError> {
    let beltrami = beltrami_factor(x, g, mu)?;
    if beltrami.status != BeltramiStatus::Rotational {
        return Err(HydroError::NonRotational(beltrami.status));
    }
    let alpha = flat(x, g);
    let contact = is_contact(&alpha)?;
    if !contact.is_contact() {
        return Err(HydroError::NotContact);
    }
    let reeb_like = verify_reeb(&alpha, x, false)?;
    Ok(BeltramiContact { beltrami, contact, reeb_like })
}

#[derive(Clone, Debug, Serialize)]
pub struct FrameResiduals {
    /// `max |e^i(e_j) − δ_ij|`.
    pub duality: f64,
    /// `max(|α(e₂)|, |α(e₃)|)`.
    pub kernel: f64,
    /// `max |dα(e₂, e₃) − 1|`.
    pub symplectic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptedFrame {
    pub e1: VectorField,
    pub e2: VectorField,
    pub e3: VectorField,
    pub coframe: [KForm; 3],
    /// Coordinate axis whose projection onto `ker α` gives `e₂`.
    pub axis: usize,
    pub residuals: FrameResiduals,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptedMetric {
    pub metric: Metric,
    pub volume: VolumeForm,
    pub frame: AdaptedFrame,
    /// `Y = hX`.
    pub field: VectorField,
    /// Max grid norm of `curl(Y, g, μ) − Y`.
    pub beltrami_residual: f64,
    /// Max grid norm of `d ι_Y μ`.
    pub volume_residual: f64,
    /// Max grid norm of `ι_X dh`; zero exactly when `h` is an integral of `X`.
    pub h_invariance_residual: f64,
    pub verified: bool,
}

/// Tolerance for the adapted metric's Beltrami identity.
pub const ADAPTED_CURL_TOL: f64 = 1e-9;
/// Tolerance for the adapted metric's divergence identity.
pub const ADAPTED_DIV_TOL: f64 = 1e-10;

/// Metric `g` and volume `μ` in which `Y = hX` satisfies `∇×Y = Y`, for the
/// Reeb field `X` of `α` and a positive function `h`.
pub fn adapted_metric(alpha: &KForm, x: &VectorField, h: &Scalar) -> Result<AdaptedMetric, HydroError> {
    let reeb = verify_reeb(alpha, x, true)?;
    if !reeb.holds {
        return Err(HydroError::NotReeb);
    }
    let hcert = Certificate::nonvanishing(h, VERIFY_GRID);
    if !hcert.positive() {
        return Err(HydroError::NonPositiveScale(hcert));
    }
    let grid = Grid::verification();
    let a = one_form_field(alpha);
    let dalpha = ext_d(alpha);

    let mut best: Option<(usize, f64, VectorField, Scalar)> = None;
    for j in 0..3 {
        let u = VectorField::coordinate(j).sub(&x.scale(a.component(j)));
        let n2 = u.norm_sq_euclid();
        let min = n2.grid_values(&grid).into_iter().fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|b| min > b.1) {
            best = Some((j, min, u, n2));
        }
    }
    let (axis, _, u, u2) = best.expect("three candidates");
    if !Certificate::nonvanishing(&u2, VERIFY_GRID).passed {
        return Err(HydroError::DegenerateFrame);
    }
    let w = a.cross_euclid(&u);
    let d = interior(&w, &interior(&u, &dalpha)?)?.scalar().clone();
    if !Certificate::nonvanishing(&d, VERIFY_GRID).passed {
        return Err(HydroError::DegenerateFrame);
    }

    let e1 = x.clone();
    let e2 = u.clone();
    let e3 = w.map(|c| c.div(&d));
    let c1 = a.clone();
    let c2 = w.cross_euclid(x).map(|c| c.div(&u2));
    let c3 = x.cross_euclid(&u).map(|c| (c * &d).div(&u2));

    let hinv = h.recip();
    let entry = |i: usize, j: usize| {
        let t1 = &(&hinv * c1.component(i)) * c1.component(j);
        let t2 = c2.component(i) * c2.component(j);
        let t3 = c3.component(i) * c3.component(j);
        &(&t1 + &t2) + &t3
    };
    let mut m: [[Scalar; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in i..3 {
            m[i][j] = entry(i, j);
            m[j][i] = m[i][j].clone();
        }
    }
    let metric = Metric::new(m).expect("built symmetric");
    let volume = VolumeForm::new((&hinv * &d).div(&u2));

    let frame = [&e1, &e2, &e3];
    let coframe = [&c1, &c2, &c3];
    let mut duality = 0.0f64;
    for (i, ci) in coframe.iter().enumerate() {
        for (j, ej) in frame.iter().enumerate() {
            let delta = if i == j { Scalar::one() } else { Scalar::zero() };
            duality = duality.max((&ci.dot(ej) - &delta).max_norm(&grid));
        }
    }
    let kernel = a.dot(&e2).max_norm(&grid).max(a.dot(&e3).max_norm(&grid));
    let sympl = interior(&e3, &interior(&e2, &dalpha)?)?.scalar() - &Scalar::one();
    let residuals = FrameResiduals { duality, kernel, symplectic: sympl.max_norm(&grid) };

    let y = x.scale(h);
    let beltrami_residual = curl(&y, &metric, &volume).sub(&y).max_norm(&grid);
    let volume_residual = is_volume_preserving(&y, &volume).max_abs;
    let h_invariance_residual = directional(x, h).max_norm(&grid);
    let verified = beltrami_residual < ADAPTED_CURL_TOL && volume_residual < ADAPTED_DIV_TOL;

    Ok(AdaptedMetric {
        metric,
        volume,
        frame: AdaptedFrame {
            e1,
            e2,
            e3,
            coframe: [
                KForm::one_form(c1.components().clone()),
                KForm::one_form(c2.components().clone()),
                KForm::one_form(c3.components().clone()),
            ],
            axis,
            residuals,
        },
        field: y,
        beltrami_residual,
        volume_residual,
        h_invariance_residual,
        verified,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EulerVerdict {
    SteadyEuler,
    NotEuler,
}

#[derive(Clone, Debug, Serialize)]
pub struct EulerReport {
    pub verdict: EulerVerdict,
    /// Mean-zero pressure with `dp = β`.
    pub pressure: Option<Scalar>,
    pub pressure_is_constant: Option<bool>,
    /// Max-norm of `d ι_X μ`.
    pub volume_residual: Residual,
    /// `β = −(X × ∇×X)♭`.
    pub beta: KForm,
    /// Max-norm of `dβ`.
    pub closedness_residual: Residual,
    /// Torus means of the three components of `β`.
    pub exactness_obstruction: [f64; 3],
    /// Max-norm of `ι_X dp`.
    pub bernoulli_residual: Option<Residual>,
}

impl EulerReport {
    pub fn is_steady(&self) -> bool {
        self.verdict == EulerVerdict::SteadyEuler
    }
}

/// Mean-zero `p` with `dp = β`, by exact term-wise antidifferentiation.
fn antiderivative(beta: &[TrigPoly; 3]) -> TrigPoly {
    let mut modes: Vec<Mode> =
        beta.iter().flat_map(|b| b.terms().map(|(k, _, _)| k)).filter(|k| !k.is_zero()).collect();
    modes.sort();
    modes.dedup();
    let mut p = TrigPoly::zero();
    for k in modes {
        let k2 = coeff::int(k.norm_sq());
        let mut a = coeff::zero();
        let mut b = coeff::zero();
        for (j, bj) in beta.iter().enumerate() {
            let kj = coeff::int(k.0[j] as i64);
            b += kj.clone() * bj.coefficient(k, Parity::Cos);
            a -= kj * bj.coefficient(k, Parity::Sin);
        }
        p.add_term(k, Parity::Cos, a / k2.clone());
        p.add_term(k, Parity::Sin, b / k2);
    }
    p
}

/// Steady Euler check: `L_X μ = 0` and `X × (∇×X)` a gradient.
pub fn is_euler_steady(x: &VectorField, g: &Metric, mu: &VolumeForm) -> EulerReport {
    let vc = is_volume_preserving(x, mu);
    let volume_residual = Residual { max_abs: vc.max_abs, exact: vc.exact, vanishes: vc.preserving };
    let w = curl(x, g, mu);
    let beta = flat(&cross(x, &w, g), g).map(|c| -c);
    let closedness_residual = Residual::of_form(&ext_d(&beta));
    let grid = Grid::verification();
    let means: Vec<Residual> = beta
        .components()
        .iter()
        .map(|c| match c.as_trig() {
            Some(p) => {
                let m = p.mean();
                let z = coeff::is_zero_within_tol(&m);
                Residual { max_abs: coeff::to_f64(&m).abs(), exact: true, vanishes: z }
            }
            None => {
                let m = c.mean_f64(&grid);
                Residual { max_abs: m.abs(), exact: false, vanishes: m.abs() < NUMERIC_IDENTITY_TOL }
            }
        })
        .collect();
    let exactness_obstruction = [0, 1, 2].map(|i| {
        let c = &beta.components()[i];
        c.as_trig().map_or_else(|| c.mean_f64(&grid), |p| coeff::to_f64(&p.mean()))
    });
    let periods_vanish = means.iter().all(|m| m.vanishes);
    let steady = volume_residual.vanishes && closedness_residual.vanishes && periods_vanish;

    let mut report = EulerReport {
        verdict: if steady { EulerVerdict::SteadyEuler } else { EulerVerdict::NotEuler },
        pressure: None,
        pressure_is_constant: None,
        volume_residual,
        beta: beta.clone(),
        closedness_residual,
        exactness_obstruction,
        bernoulli_residual: None,
    };
    if !steady {
        return report;
    }
    let polys: Option<Vec<TrigPoly>> = beta.components().iter().map(Scalar::to_trig).collect();
    if let Some(polys) = polys {
        let polys: [TrigPoly; 3] = polys.try_into().expect("three components");
        let p = antiderivative(&polys);
        debug_assert_eq!(
            ext_d(&KForm::function(Scalar::from(p.clone()))),
            KForm::one_form(polys.clone().map(Scalar::from))
        );
        let p = Scalar::from(p);
        report.bernoulli_residual = Some(Residual::of_scalar(&directional(x, &p)));
        report.pressure_is_constant = Some(p.as_constant().is_some());
        report.pressure = Some(p);
    }
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct CurlFreeReport {
    pub form: KForm,
    /// Max-norm of `dα`.
    pub closedness_residual: Residual,
    /// Nonvanishing certificate for `|α|²`.
    pub nonvanishing: Certificate,
    /// `α` is closed and nowhere zero, so `ker α` integrates to a foliation.
    pub defines_foliation: bool,
}

/// The curl-free case: `α = ι_X g` is closed; reports whether it is also
/// nowhere zero.
pub fn curl_free_case(x: &VectorField, g: &Metric) -> Result<CurlFreeReport, HydroError> {
    let alpha = flat(x, g);
    let closedness_residual = Residual::of_form(&ext_d(&alpha));
    if !closedness_residual.vanishes {
        return Err(HydroError::NotCurlFree);
    }
    let nonvanishing = Certificate::nonvanishing(&one_form_field(&alpha).norm_sq_euclid(), VERIFY_GRID);
    Ok(CurlFreeReport { defines_foliation: nonvanishing.passed, form: alpha, closedness_residual, nonvanishing })
}
