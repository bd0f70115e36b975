use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reebkit::hydro::is_euler_steady;
use reebkit::models::{abc_field, ABCParams};
use reebkit::orbit::{
    contractible, find_orbits, integrate, integrate_backward, poincare, project, Orbit, SearchOptions, SectionPlane,
    Tolerances,
};
use reebkit::trig::sin_axis;
use reebkit::{Metric, Scalar, VectorField, VolumeForm};

const TOL: f64 = 1e-10;

fn abc(a: i64, b: i64, c: i64) -> VectorField {
    abc_field(&ABCParams::ints(a, b, c).unwrap())
}

fn flow(x: &VectorField, p: [f64; 3], t: f64) -> [f64; 3] {
    integrate(x, p, t, TOL).unwrap().end()
}

#[test]
fn time_reversal_returns_to_start() {
    let x = abc(1, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let p = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        let q = flow(&x, p, 3.0);
        let back = integrate_backward(&x, q, 3.0, TOL).unwrap().end();
        for i in 0..3 {
            assert!((back[i] - p[i]).abs() < 10.0 * TOL, "{p:?} -> {back:?}");
        }
    }
}

#[test]
fn flow_map_preserves_volume() {
    let x = abc(1, 1, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let eps = 1e-5;
    for _ in 0..5 {
        let p = [rng.random_range(0.0..TAU), rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)];
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let (mut pp, mut pm) = (p, p);
            pp[j] += eps;
            pm[j] -= eps;
            let (fp, fm) = (flow(&x, pp, 1.0), flow(&x, pm, 1.0));
            for i in 0..3 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * eps);
            }
        }
        let det = jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
            - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
            + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0]);
        assert!((det - 1.0).abs() < 1e-6, "det = {det}");
    }
}

#[test]
fn pressure_is_transported() {
    let shear = VectorField::new([Scalar::from(sin_axis(1, 1)), Scalar::zero(), Scalar::zero()]);
    let r = is_euler_steady(&shear, &Metric::euclidean(), &VolumeForm::standard());
    let p = r.pressure.unwrap();
    let traj = integrate(&shear, [0.2, 1.3, 0.4], 20.0, TOL).unwrap();
    let p0 = p.eval(&traj.points[0]);
    for q in &traj.points {
        assert!((p.eval(q) - p0).abs() < 1e-8);
    }
}

#[test]
fn abc100_return_on_x_plane() {
    let x = abc(1, 0, 0);
    let s = poincare(&x, SectionPlane::new(0, 0.0), &[[0.0, 0.0, FRAC_PI_2]], 1, &Tolerances::STANDARD, None).unwrap();
    assert!((s.crossings[0].time - TAU).abs() < 1e-10);
    assert_eq!(s.crossings[0].direction, 1);
}

#[test]
fn tangent_seed_reports_failure() {
    let x = abc(1, 0, 0);
    let s = poincare(&x, SectionPlane::new(1, 0.0), &[[0.0, 0.0, FRAC_PI_2]], 1, &Tolerances::STANDARD, Some(50.0))
        .unwrap();
    assert!(s.crossings.is_empty());
    assert_eq!(s.failures.len(), 1);
}

#[test]
fn abc100_orbit_with_x_winding() {
    let x = abc(1, 0, 0);
    let plane = SectionPlane::new(0, 0.0);
    let s = poincare(&x, plane, &[[0.0, 0.0, FRAC_PI_2]], 3, &Tolerances::STANDARD, None).unwrap();
    let found = find_orbits(&x, &s, &SearchOptions::default()).unwrap();
    let o = &found.orbits[0];
    assert!((o.base_point[2] - FRAC_PI_2).abs() < 1e-8);
    assert!((o.period - TAU).abs() < 1e-8);
    assert_eq!(o.winding, [1, 0, 0]);
}

#[test]
fn linear_flow_orbit_family() {
    let x = VectorField::coordinate(0);
    let plane = SectionPlane::new(0, 0.0);
    let seeds = plane.lattice(3);
    let s = poincare(&x, plane, &seeds, 3, &Tolerances::STANDARD, None).unwrap();
    let found = find_orbits(&x, &s, &SearchOptions::default()).unwrap();
    assert_eq!(found.orbits.len(), seeds.len());
    for o in &found.orbits {
        assert!((o.period - TAU).abs() < 1e-12);
        assert_eq!(o.winding, [1, 0, 0]);
        assert!(!contractible(o));
    }
}

#[test]
fn rescaled_field_has_same_orbits() {
    let x = abc(1, 1, 1);
    let plane = SectionPlane::new(2, 0.0);
    let seeds = plane.lattice(4);
    let opts = SearchOptions::default();
    let base = find_orbits(&x, &poincare(&x, plane, &seeds, 12, &opts.tolerances, None).unwrap(), &opts).unwrap();
    let c = 2.0;
    let y = x.scale(&Scalar::from_int(2));
    let scaled = find_orbits(&y, &poincare(&y, plane, &seeds, 12, &opts.tolerances, None).unwrap(), &opts).unwrap();
    assert!(!base.orbits.is_empty());
    assert_eq!(base.orbits.len(), scaled.orbits.len());
    for (o, s) in base.orbits.iter().zip(&scaled.orbits) {
        assert_eq!(o.winding, s.winding);
        assert!((o.period / c - s.period).abs() < 1e-6);
        for i in 0..3 {
            assert!((o.base_point[i] - s.base_point[i]).abs() < 1e-6);
        }
    }
}

#[test]
fn windings_are_integral() {
    let x = abc(1, 1, 1);
    let plane = SectionPlane::new(2, 0.0);
    let opts = SearchOptions::default();
    let s = poincare(&x, plane, &plane.lattice(4), 12, &opts.tolerances, None).unwrap();
    for o in find_orbits(&x, &s, &opts).unwrap().orbits {
        let end = flow(&x, o.base_point, o.period);
        for i in 0..3 {
            let d = end[i] - o.base_point[i] - TAU * o.winding[i] as f64;
            assert!(d.abs() <= o.residual + 1e-12);
        }
        assert!(o.residual < opts.tolerances.acceptance);
    }
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let x = abc(1, 1, 1);
    let plane = SectionPlane::new(2, 0.0);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let opts = SearchOptions::default();
            let s = poincare(&x, plane, &plane.lattice(6), 10, &opts.tolerances, None).unwrap();
            (s.clone(), find_orbits(&x, &s, &opts).unwrap())
        })
    };
    let (s1, o1) = run(1);
    let (s4, o4) = run(4);
    assert_eq!(s1, s4);
    assert_eq!(o1, o4);
}

#[test]
fn contractibility_is_zero_winding() {
    let mut o = Orbit {
        base_point: [0.0; 3],
        period: TAU,
        winding: [0, 1, 0],
        residual: 0.0,
        multipliers: None,
        returns: 1,
        seed: 0,
    };
    assert!(!contractible(&o));
    o.winding = [0, 0, 0];
    assert!(contractible(&o));
}

#[test]
fn projection_reduces_to_fundamental_domain() {
    let p = project(&[-PI, 3.0 * TAU + 1.0, TAU]);
    assert!((p[0] - PI).abs() < 1e-12 && (p[1] - 1.0).abs() < 1e-9 && p[2] == 0.0);
}
