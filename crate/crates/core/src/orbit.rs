//! Trajectories in the universal cover ℝ³, Poincaré sections and periodic
//! orbit search by shooting on the section return map.
//!
//! Integration uses the Dormand–Prince 5(4) pair with Hairer's fourth-order
//! dense output. Step control is on the absolute local error.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::field::VectorField;

/// Stage tolerances, each an order looser than its input noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Local error per integrator step.
    pub integrator: f64,
    /// Crossing time polish.
    pub crossing: f64,
    /// Return-map residual at which shooting stops.
    pub newton: f64,
    /// Closing distance in the cover for an accepted orbit.
    pub acceptance: f64,
}

impl Tolerances {
    pub const STANDARD: Tolerances = Tolerances { integrator: 1e-10, crossing: 1e-10, newton: 1e-8, acceptance: 1e-6 };
    pub const LOOSE: Tolerances = Tolerances { integrator: 1e-8, crossing: 1e-8, newton: 1e-6, acceptance: 1e-4 };
    pub const STRICT: Tolerances = Tolerances { integrator: 1e-12, crossing: 1e-12, newton: 1e-10, acceptance: 1e-8 };
    pub const PROFILES: [&'static str; 3] = ["standard", "loose", "strict"];

    pub fn profile(name: &str) -> Option<Tolerances> {
        match name {
            "standard" => Some(Self::STANDARD),
            "loose" => Some(Self::LOOSE),
            "strict" => Some(Self::STRICT),
            _ => None,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Error, Clone, PartialEq, Serialize)]
pub enum OrbitError {
    #[error("field has a component without a verified witness and cannot be integrated")]
    NotEvaluable,
    #[error("step size underflow at t = {t:.6e}, x = ({:.6}, {:.6}, {:.6})", x[0], x[1], x[2])]
    StepUnderflow { t: f64, x: [f64; 3] },
    #[error("non-finite field value at t = {t:.6e}")]
    NonFinite { t: f64 },
    #[error("integration time must be finite and nonnegative, got {0}")]
    InvalidTime(f64),
    #[error("section is empty")]
    EmptySection,
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

type V3 = [f64; 3];

fn axpy(y: &V3, h: f64, ks: &[&V3], coef: &[f64]) -> V3 {
    let mut out = *y;
    for (k, &a) in ks.iter().zip(coef) {
        for i in 0..3 {
            out[i] += h * a * k[i];
        }
    }
    out
}

fn dist(a: &V3, b: &V3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn norm_inf(v: &V3) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// A field scaled by a constant, evaluated in the cover.
struct Rhs<'a> {
    field: &'a VectorField,
    scale: f64,
}

impl Rhs<'_> {
    fn eval(&self, y: &V3) -> V3 {
        let v = self.field.eval(y);
        [self.scale * v[0], self.scale * v[1], self.scale * v[2]]
    }
}

/// One accepted step with its dense-output coefficients.
#[derive(Clone, Debug)]
struct Step {
    t0: f64,
    h: f64,
    y0: V3,
    y1: V3,
    rc: [V3; 4],
}

impl Step {
    fn at(&self, t: f64) -> V3 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; 3];
        for i in 0..3 {
            let [r2, r3, r4, r5] = [self.rc[0][i], self.rc[1][i], self.rc[2][i], self.rc[3][i]];
            out[i] = self.y0[i] + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
        }
        out
    }
}

struct Stepper<'a> {
    rhs: Rhs<'a>,
    tol: f64,
    t: f64,
    y: V3,
    k1: V3,
    h: f64,
    steps: usize,
    rejected: usize,
    max_error: f64,
}

impl<'a> Stepper<'a> {
    fn new(rhs: Rhs<'a>, y0: V3, tol: f64) -> Result<Self, OrbitError> {
        let k1 = rhs.eval(&y0);
        if k1.iter().any(|v| !v.is_finite()) {
            return Err(OrbitError::NonFinite { t: 0.0 });
        }
        let h = (0.5 * tol.powf(0.2) / norm_inf(&k1).max(1e-3)).min(0.5);
        Ok(Stepper { rhs, tol, t: 0.0, y: y0, k1, h, steps: 0, rejected: 0, max_error: 0.0 })
    }

    /// Raw Dormand–Prince stage evaluation from the current state.
    fn trial(&self, h: f64) -> (V3, V3, [V3; 7]) {
        let y = &self.y;
        let k1 = self.k1;
        let k2 = self.rhs.eval(&axpy(y, h, &[&k1], &A2));
        let k3 = self.rhs.eval(&axpy(y, h, &[&k1, &k2], &A3));
        let k4 = self.rhs.eval(&axpy(y, h, &[&k1, &k2, &k3], &A4));
        let k5 = self.rhs.eval(&axpy(y, h, &[&k1, &k2, &k3, &k4], &A5));
        let k6 = self.rhs.eval(&axpy(y, h, &[&k1, &k2, &k3, &k4, &k5], &A6));
        let y1 = axpy(y, h, &[&k1, &k2, &k3, &k4, &k5, &k6], &B);
        let k7 = self.rhs.eval(&y1);
        let ks = [k1, k2, k3, k4, k5, k6, k7];
        let mut err = [0.0; 3];
        for i in 0..3 {
            err[i] = h * (0..7).map(|s| E[s] * ks[s][i]).sum::<f64>();
        }
        (y1, err, ks)
    }

    /// Advances one accepted step, never past `t_limit`.
    fn step(&mut self, t_limit: f64) -> Result<Step, OrbitError> {
        loop {
            let h = self.h.min(t_limit - self.t);
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(OrbitError::StepUnderflow { t: self.t, x: self.y });
            }
            let (y1, err, ks) = self.trial(h);
            if y1.iter().chain(ks[6].iter()).any(|v| !v.is_finite()) {
                return Err(OrbitError::NonFinite { t: self.t });
            }
            let e = (err.iter().map(|x| (x / self.tol).powi(2)).sum::<f64>() / 3.0).sqrt();
            let fac = if e == 0.0 { 10.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 10.0) };
            if e <= 1.0 {
                let mut rc = [[0.0; 3]; 4];
                for i in 0..3 {
                    let ydiff = y1[i] - self.y[i];
                    let bspl = h * ks[0][i] - ydiff;
                    rc[0][i] = ydiff;
                    rc[1][i] = bspl;
                    rc[2][i] = ydiff - h * ks[6][i] - bspl;
                    rc[3][i] = h * (0..7).map(|s| D[s] * ks[s][i]).sum::<f64>();
                }
                let step = Step { t0: self.t, h, y0: self.y, y1, rc };
                self.t += h;
                self.y = y1;
                self.k1 = ks[6];
                self.steps += 1;
                self.max_error = self.max_error.max(e * self.tol);
                self.h = h * fac;
                return Ok(step);
            }
            self.rejected += 1;
            self.h = h * fac.min(1.0);
        }
    }

    /// Single unchecked step of size `h` from a recorded step start.
    fn shoot(&self, from: &Step, h: f64) -> V3 {
        let probe = Stepper {
            rhs: Rhs { field: self.rhs.field, scale: self.rhs.scale },
            tol: self.tol,
            t: from.t0,
            y: from.y0,
            k1: self.rhs.eval(&from.y0),
            h,
            steps: 0,
            rejected: 0,
            max_error: 0.0,
        };
        probe.trial(h).0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub max_local_error: f64,
}

/// Samples of a flowline in the cover, one per accepted step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<V3>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn end(&self) -> V3 {
        *self.points.last().expect("trajectory has its initial point")
    }

    /// Samples reduced to the fundamental domain `[0, 2π)³`.
    pub fn projected(&self) -> Vec<V3> {
        self.points.iter().map(project).collect()
    }
}

pub fn project(p: &V3) -> V3 {
    p.map(|c| {
        let r = c.rem_euclid(TAU);
        if TAU - r < 1e-12 {
            0.0
        } else {
            r + 0.0
        }
    })
}

fn evaluable(x: &VectorField) -> Result<(), OrbitError> {
    if x.is_exact() || x.witnesses_pass() {
        Ok(())
    } else {
        Err(OrbitError::NotEvaluable)
    }
}

fn flow_scaled(x: &VectorField, scale: f64, x0: V3, t_end: f64, tol: f64) -> Result<Trajectory, OrbitError> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(OrbitError::InvalidTime(t_end));
    }
    let mut st = Stepper::new(Rhs { field: x, scale }, x0, tol)?;
    let mut times = vec![0.0];
    let mut points = vec![x0];
    while st.t < t_end {
        let s = st.step(t_end)?;
        if t_end - st.t <= 1e-14 * t_end.max(1.0) {
            st.t = t_end;
        }
        times.push(s.t0 + s.h);
        points.push(s.y1);
    }
    Ok(Trajectory {
        times,
        points,
        stats: IntegratorStats { steps: st.steps, rejected: st.rejected, max_local_error: st.max_error },
    })
}

/// Integrates `ẏ = X(y)` in the cover from `x0` over `[0, t_end]`.
pub fn integrate(x: &VectorField, x0: V3, t_end: f64, tol: f64) -> Result<Trajectory, OrbitError> {
    evaluable(x)?;
    flow_scaled(x, 1.0, x0, t_end, tol)
}

/// Integrates `−X`, the time-reversed flow.
pub fn integrate_backward(x: &VectorField, x0: V3, t_end: f64, tol: f64) -> Result<Trajectory, OrbitError> {
    evaluable(x)?;
    flow_scaled(x, -1.0, x0, t_end, tol)
}

/// The coordinate plane `x_axis ≡ value (mod 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SectionPlane {
    pub axis: usize,
    pub value: f64,
}

impl SectionPlane {
    pub fn new(axis: usize, value: f64) -> Self {
        assert!(axis < 3, "axis out of range");
        SectionPlane { axis, value }
    }

    /// In-plane coordinate indices.
    pub fn transverse(&self) -> [usize; 2] {
        match self.axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }

    fn sheet(&self, c: f64) -> f64 {
        ((c - self.value) / TAU).floor()
    }

    /// `n×n` seeds on the plane, spaced uniformly from 0.
    pub fn lattice(&self, n: usize) -> Vec<V3> {
        let [a, b] = self.transverse();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut p = [0.0; 3];
                p[self.axis] = self.value;
                p[a] = TAU * i as f64 / n as f64;
                p[b] = TAU * j as f64 / n as f64;
                out.push(p);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub seed: usize,
    pub time: f64,
    /// Cover coordinates; the plane coordinate is exactly `value + 2πm`.
    pub point: V3,
    /// Sign of the normal velocity.
    pub direction: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionData {
    pub plane: SectionPlane,
    pub seeds: Vec<V3>,
    pub crossings: Vec<Crossing>,
    pub grazes: usize,
    pub failures: Vec<SeedFailure>,
}

impl SectionData {
    pub fn crossings_of(&self, seed: usize) -> impl Iterator<Item = &Crossing> {
        self.crossings.iter().filter(move |c| c.seed == seed)
    }
}

/// Normal velocity below this fraction of the speed counts as a graze.
pub const GRAZE_RATIO: f64 = 1e-6;

/// Default time allowance per requested crossing.
pub const TIME_PER_CROSSING: f64 = 100.0;

struct CrossingScan {
    crossings: Vec<(f64, V3, i8)>,
    grazes: usize,
}

/// Integrates until `want` transversal crossings pass `accept`, or the budget
/// runs out.
fn scan_crossings(
    rhs: Rhs<'_>,
    x0: V3,
    plane: &SectionPlane,
    want: usize,
    budget: f64,
    tol: &Tolerances,
    accept: impl Fn(i8) -> bool,
) -> Result<CrossingScan, OrbitError> {
    let mut st = Stepper::new(rhs, x0, tol.integrator)?;
    let mut out = CrossingScan { crossings: Vec::new(), grazes: 0 };
    let ax = plane.axis;
    while out.crossings.len() < want && st.t < budget {
        let s = st.step(budget)?;
        let (m0, m1) = (plane.sheet(s.y0[ax]), plane.sheet(s.y1[ax]));
        if m0 == m1 {
            continue;
        }
        let up = m1 > m0;
        let sheets: Vec<f64> = if up {
            ((m0 as i64 + 1)..=(m1 as i64)).map(|m| m as f64).collect()
        } else {
            ((m1 as i64 + 1)..=(m0 as i64)).rev().map(|m| m as f64).collect()
        };
        for m in sheets {
            let target = plane.value + TAU * m;
            let (t, p, vn, speed) = polish(&st, &s, ax, target, tol.crossing);
            if vn.abs() < GRAZE_RATIO * speed {
                out.grazes += 1;
                continue;
            }
            let dir = if vn > 0.0 { 1 } else { -1 };
            if t > tol.crossing && accept(dir) {
                out.crossings.push((t, p, dir));
                if out.crossings.len() == want {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Locates `x_ax = target` inside an accepted step: bisection on the dense
/// output, then Newton corrections through exact single steps.
fn polish(st: &Stepper<'_>, s: &Step, ax: usize, target: f64, tol: f64) -> (f64, V3, f64, f64) {
    let g = |t: f64| s.at(t)[ax] - target;
    let (mut lo, mut hi) = (s.t0, s.t0 + s.h);
    let glo = g(lo);
    for _ in 0..200 {
        if hi - lo <= 0.01 * tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut p = s.at(t);
    let mut v = st.rhs.eval(&p);
    for _ in 0..4 {
        let tau = t - s.t0;
        p = if tau > 0.0 { st.shoot(s, tau) } else { s.y0 };
        v = st.rhs.eval(&p);
        if v[ax] == 0.0 {
            break;
        }
        let dt = (p[ax] - target) / v[ax];
        t -= dt;
        if dt.abs() < tol {
            let tau = t - s.t0;
            p = if tau > 0.0 { st.shoot(s, tau) } else { s.y0 };
            v = st.rhs.eval(&p);
            break;
        }
    }
    p[ax] = target;
    let speed = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (t, p, v[ax], speed)
}

/// Records `crossings` transversal crossings of `plane` per seed. Seeds are
/// integrated in parallel and merged in seed order.
pub fn poincare(
    x: &VectorField,
    plane: SectionPlane,
    seeds: &[V3],
    crossings: usize,
    tol: &Tolerances,
    time_budget: Option<f64>,
) -> Result<SectionData, OrbitError> {
    evaluable(x)?;
    let budget = time_budget.unwrap_or(TIME_PER_CROSSING * crossings.max(1) as f64);
    let results: Vec<_> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| (i, scan_crossings(Rhs { field: x, scale: 1.0 }, s, &plane, crossings, budget, tol, |_| true)))
        .collect();
    let mut data = SectionData { plane, seeds: seeds.to_vec(), crossings: Vec::new(), grazes: 0, failures: Vec::new() };
    for (seed, r) in results {
        match r {
            Ok(scan) => {
                data.grazes += scan.grazes;
                if scan.crossings.len() < crossings {
                    data.failures.push(SeedFailure {
                        seed,
                        reason: format!("{} of {crossings} crossings within time {budget}", scan.crossings.len()),
                    });
                }
                data.crossings.extend(scan.crossings.into_iter().map(|(time, point, direction)| Crossing {
                    seed,
                    time,
                    point,
                    direction,
                }));
            }
            Err(e) => data.failures.push(SeedFailure { seed, reason: e.to_string() }),
        }
    }
    Ok(data)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orbit {
    /// Base point in `[0, 2π)³`, on the section plane.
    pub base_point: V3,
    pub period: f64,
    pub winding: [i64; 3],
    pub residual: f64,
    /// Eigenvalues of the linearized return map as `[re, im]` pairs.
    pub multipliers: Option<[[f64; 2]; 2]>,
    /// Number of section returns per period.
    pub returns: usize,
    pub seed: usize,
}

impl Orbit {
    pub fn contractible(&self) -> bool {
        contractible(self)
    }
}

/// Zero winding in the cover.
pub fn contractible(o: &Orbit) -> bool {
    o.winding == [0, 0, 0]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOptions {
    pub tolerances: Tolerances,
    pub max_iter: usize,
    /// Largest number of same-direction returns considered per candidate.
    pub max_returns: usize,
    /// In-plane distance (mod 2π) below which a return is a candidate.
    pub recurrence_radius: f64,
    pub max_candidates: usize,
    /// Base points closer than this along an orbit are identified.
    pub dedup_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tolerances: Tolerances::STANDARD,
            max_iter: 30,
            max_returns: 3,
            recurrence_radius: 0.25,
            max_candidates: 64,
            dedup_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Dropped {
    pub seed: usize,
    pub returns: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSearch {
    pub orbits: Vec<Orbit>,
    pub candidates: usize,
    pub dropped: Vec<Dropped>,
}

impl OrbitSearch {
    pub fn contractible_found(&self) -> bool {
        self.orbits.iter().any(contractible)
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    seed: usize,
    returns: usize,
    direction: i8,
    start: V3,
    period: f64,
    gap: f64,
}

fn wrap(d: f64) -> f64 {
    d - TAU * (d / TAU).round()
}

fn candidates(section: &SectionData, opts: &SearchOptions) -> Vec<Candidate> {
    let [a, b] = section.plane.transverse();
    let mut out = Vec::new();
    for seed in 0..section.seeds.len() {
        let cs: Vec<&Crossing> = section.crossings_of(seed).collect();
        for q in 1..=opts.max_returns {
            let mut best: Option<Candidate> = None;
            for dir in [1i8, -1] {
                let same: Vec<&&Crossing> = cs.iter().filter(|c| c.direction == dir).collect();
                for w in same.windows(q + 1) {
                    let (c0, c1) = (w[0], w[q]);
                    let gap = wrap(c1.point[a] - c0.point[a]).hypot(wrap(c1.point[b] - c0.point[b]));
                    if gap < opts.recurrence_radius && best.as_ref().is_none_or(|c| gap < c.gap) {
                        best = Some(Candidate {
                            seed,
                            returns: q,
                            direction: dir,
                            start: c0.point,
                            period: c1.time - c0.time,
                            gap,
                        });
                    }
                }
            }
            out.extend(best);
        }
    }
    out.sort_by(|x, y| x.gap.total_cmp(&y.gap).then(x.seed.cmp(&y.seed)).then(x.returns.cmp(&y.returns)));
    out.truncate(opts.max_candidates);
    out
}

struct ReturnMap<'a> {
    x: &'a VectorField,
    plane: SectionPlane,
    direction: i8,
    returns: usize,
    budget: f64,
    tol: Tolerances,
    /// Plane coordinate of the start sheet.
    level: f64,
}

impl ReturnMap<'_> {
    fn point(&self, s: [f64; 2]) -> V3 {
        let [a, b] = self.plane.transverse();
        let mut p = [0.0; 3];
        p[self.plane.axis] = self.level;
        p[a] = s[0];
        p[b] = s[1];
        p
    }

    /// The `returns`-th same-direction crossing from `s`: point and time.
    fn apply(&self, s: [f64; 2]) -> Option<(V3, f64)> {
        let dir = self.direction;
        let scan = scan_crossings(
            Rhs { field: self.x, scale: 1.0 },
            self.point(s),
            &self.plane,
            self.returns,
            self.budget,
            &self.tol,
            |d| d == dir,
        )
        .ok()?;
        let (t, p, _) = *scan.crossings.get(self.returns - 1)?;
        Some((p, t))
    }
}

fn residual_2d(rm: &ReturnMap<'_>, s: [f64; 2], shift: [f64; 2]) -> Option<([f64; 2], V3, f64)> {
    let [a, b] = rm.plane.transverse();
    let (p, t) = rm.apply(s)?;
    Some(([p[a] - s[0] - shift[0], p[b] - s[1] - shift[1]], p, t))
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Levenberg–Marquardt on `P(s) − s − 2πw` with a central-difference
/// Jacobian.
fn refine(x: &VectorField, plane: SectionPlane, c: &Candidate, opts: &SearchOptions) -> Result<Orbit, String> {
    let tol = opts.tolerances;
    let [a, b] = plane.transverse();
    let rm = ReturnMap {
        x,
        plane,
        direction: c.direction,
        returns: c.returns,
        budget: 3.0 * c.period + 10.0,
        tol,
        level: c.start[plane.axis],
    };
    let mut s = [c.start[a], c.start[b]];
    let first = rm.apply(s).ok_or("no return from candidate start")?;
    let shift = [TAU * ((first.0[a] - s[0]) / TAU).round(), TAU * ((first.0[b] - s[1]) / TAU).round()];
    let (mut f, _, _) = residual_2d(&rm, s, shift).ok_or("no return from candidate start")?;
    let mut lambda = 1e-6;
    let eps = 1e-6;
    let mut jac = [[0.0; 2]; 2];
    let mut iter = 0;
    let mut have_jac = false;
    loop {
        if norm2(f) < tol.newton && have_jac {
            break;
        }
        if iter >= opts.max_iter {
            return Err(format!("no convergence after {} iterations (|F| = {:.3e})", opts.max_iter, norm2(f)));
        }
        iter += 1;
        for j in 0..2 {
            let mut sp = s;
            let mut sm = s;
            sp[j] += eps;
            sm[j] -= eps;
            let fp = residual_2d(&rm, sp, shift).ok_or("return map undefined near candidate")?.0;
            let fm = residual_2d(&rm, sm, shift).ok_or("return map undefined near candidate")?.0;
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * eps);
            }
        }
        have_jac = true;
        if norm2(f) < tol.newton {
            break;
        }
        let jtj = [
            [jac[0][0] * jac[0][0] + jac[1][0] * jac[1][0], jac[0][0] * jac[0][1] + jac[1][0] * jac[1][1]],
            [jac[0][1] * jac[0][0] + jac[1][1] * jac[1][0], jac[0][1] * jac[0][1] + jac[1][1] * jac[1][1]],
        ];
        let jtf = [jac[0][0] * f[0] + jac[1][0] * f[1], jac[0][1] * f[0] + jac[1][1] * f[1]];
        let scale = (jtj[0][0] + jtj[1][1]).max(1e-300);
        let mut improved = false;
        while lambda < 1e12 {
            let m = [[jtj[0][0] + lambda * scale, jtj[0][1]], [jtj[1][0], jtj[1][1] + lambda * scale]];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let delta = [-(m[1][1] * jtf[0] - m[0][1] * jtf[1]) / det, -(m[0][0] * jtf[1] - m[1][0] * jtf[0]) / det];
            let trial = [s[0] + delta[0], s[1] + delta[1]];
            if let Some((ft, _, _)) = residual_2d(&rm, trial, shift) {
                if norm2(ft) < norm2(f) {
                    s = trial;
                    f = ft;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            return Err(format!("damping exhausted (|F| = {:.3e})", norm2(f)));
        }
    }
    let (_, end, period) = residual_2d(&rm, s, shift).ok_or("return map undefined at refined point")?;
    let base = rm.point(s);
    let winding = [0, 1, 2].map(|i| ((end[i] - base[i]) / TAU).round() as i64);
    let base = canonical_base(x, &plane, base, period, &tol);
    let closed = integrate(x, base, period, tol.integrator).map_err(|e| e.to_string())?.end();
    let target = [0, 1, 2].map(|i| base[i] + TAU * winding[i] as f64);
    let residual = dist(&closed, &target);
    if residual >= tol.acceptance {
        return Err(format!("closing residual {residual:.3e} exceeds {:.1e}", tol.acceptance));
    }
    let dp = [[jac[0][0] + 1.0, jac[0][1]], [jac[1][0], jac[1][1] + 1.0]];
    Ok(Orbit {
        base_point: base,
        period,
        winding,
        residual,
        multipliers: Some(eigenvalues(dp)),
        returns: c.returns,
        seed: c.seed,
    })
}

fn eigenvalues(m: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [[tr / 2.0 + r, 0.0], [tr / 2.0 - r, 0.0]]
    } else {
        let r = (-disc).sqrt();
        [[tr / 2.0, r], [tr / 2.0, -r]]
    }
}

fn torus_dist(p: &V3, q: &V3) -> f64 {
    (0..3).map(|i| wrap(p[i] - q[i]).powi(2)).sum::<f64>().sqrt()
}

/// Whether `o` is `e` (or an iterate of it) traversed from another point.
fn same_orbit(e: &Orbit, o: &Orbit, opts: &SearchOptions) -> bool {
    let k = (o.period / e.period).round();
    if k < 1.0 || (o.period - k * e.period).abs() > opts.tolerances.acceptance.max(1e-6) * k * e.period.max(1.0) {
        return false;
    }
    o.winding == e.winding.map(|w| w * k as i64) && torus_dist(&o.base_point, &e.base_point) < opts.dedup_tol
}

/// Lexicographically least section crossing over one period, so that an
/// orbit has the same base point whichever crossing it was found from.
fn canonical_base(x: &VectorField, plane: &SectionPlane, start: V3, period: f64, tol: &Tolerances) -> V3 {
    let on_plane = |p: &V3| {
        let mut q = project(p);
        q[plane.axis] = project(&[plane.value; 3])[0];
        q
    };
    let mut best = on_plane(&start);
    let budget = period * (1.0 - 1e-9);
    if let Ok(scan) = scan_crossings(Rhs { field: x, scale: 1.0 }, start, plane, usize::MAX, budget, tol, |_| true) {
        for (_, p, _) in scan.crossings {
            let q = on_plane(&p);
            if cmp_points_tol(&q, &best).is_lt() {
                best = q;
            }
        }
    }
    best
}

fn cmp_points_tol(p: &V3, q: &V3) -> std::cmp::Ordering {
    for i in 0..3 {
        if (p[i] - q[i]).abs() > 1e-7 {
            return p[i].total_cmp(&q[i]);
        }
    }
    std::cmp::Ordering::Equal
}

/// Periodic orbits seeded by near-recurrent section returns and refined by
/// shooting on the 2D return map. Orbits are deduplicated up to time shift,
/// iteration and deck transformation, then sorted by base point and period.
pub fn find_orbits(x: &VectorField, section: &SectionData, opts: &SearchOptions) -> Result<OrbitSearch, OrbitError> {
    evaluable(x)?;
    if section.crossings.is_empty() {
        return Err(OrbitError::EmptySection);
    }
    let cands = candidates(section, opts);
    let refined: Vec<_> = cands.par_iter().map(|c| (c, refine(x, section.plane, c, opts))).collect();
    let mut accepted = Vec::new();
    let mut dropped = Vec::new();
    for (c, r) in refined {
        match r {
            Ok(o) => accepted.push(o),
            Err(reason) => dropped.push(Dropped { seed: c.seed, returns: c.returns, reason }),
        }
    }
    accepted.sort_by(|p, q| p.period.total_cmp(&q.period).then(cmp_points(&p.base_point, &q.base_point)));
    let mut kept: Vec<Orbit> = Vec::new();
    for o in accepted {
        if !kept.iter().any(|e| same_orbit(e, &o, opts)) {
            kept.push(o);
        }
    }
    kept.sort_by(|p, q| cmp_points(&p.base_point, &q.base_point).then(p.period.total_cmp(&q.period)));
    Ok(OrbitSearch { orbits: kept, candidates: cands.len(), dropped })
}

fn cmp_points(p: &V3, q: &V3) -> std::cmp::Ordering {
    p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(p[2].total_cmp(&q[2]))
}
