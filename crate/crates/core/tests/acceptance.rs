//! Acceptance suite. Prints one line per criterion and fails if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use common::{any_form, field, form, fuzz_input, random_spec};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reebkit::coeff;
use reebkit::dsl::{parse_document, parse_scalar};
use reebkit::grid::Grid;
use reebkit::hydro::{
    adapted_metric, beltrami_factor, contact_from_beltrami, is_euler_steady, verify_reeb, ContactVerdict, Domain,
    EulerVerdict,
};
use reebkit::models::{
    abc_field, abc_nonsingular, energy, gauss_certificate, giroux_form, giroux_reeb, ABCParams, HomotopyVerdict,
};
use reebkit::orbit::{find_orbits, poincare, OrbitSearch, SearchOptions, SectionData, SectionPlane};
use reebkit::trig::{cos_axis, sin_axis};
use reebkit::{
    curl, ext_d, flat, interior, lie_derivative, parse_field_spec, serialize_field_spec, sharp, wedge, KForm, Metric,
    Scalar, TrigPoly, VectorField, VolumeForm,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn euclid() -> (Metric, VolumeForm) {
    (Metric::euclidean(), VolumeForm::standard())
}

/// Twenty normalized triples with `B² + C² ≤ 1`, boundary cases included.
fn nonsingular_triples() -> Vec<ABCParams> {
    let bc = [
        ((0, 1), (0, 1)),
        ((1, 1), (0, 1)),
        ((4, 5), (3, 5)),
        ((3, 5), (3, 5)),
        ((12, 13), (5, 13)),
        ((1, 2), (1, 2)),
        ((1, 2), (1, 3)),
        ((2, 3), (2, 3)),
        ((7, 10), (7, 10)),
        ((1, 5), (1, 10)),
        ((9, 10), (2, 5)),
        ((1, 3), (0, 1)),
        ((5, 7), (2, 7)),
        ((15, 17), (8, 17)),
        ((24, 25), (7, 25)),
        ((1, 4), (1, 4)),
        ((3, 4), (1, 2)),
        ((2, 3), (1, 6)),
        ((1, 10), (1, 100)),
        ((99, 100), (1, 10)),
    ];
    bc.into_iter().map(|(b, c)| ABCParams::from_ratios((1, 1), b, c).unwrap()).collect()
}

fn criterion_1() -> Outcome {
    let (g, mu) = euclid();
    let start = Instant::now();
    let triples = nonsingular_triples();
    for p in &triples {
        check(abc_nonsingular(p) == Ok(true), || format!("{p:?} is not in the nonsingular range"))?;
        let x = abc_field(p);
        let r = curl(&x, &g, &mu).sub(&x);
        check(r.exact_zero() == Some(true), || format!("curl(X) - X nonzero for {p:?}"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{} triples exact, {:.3} s", triples.len(), elapsed.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let (g, mu) = euclid();
    for n in 1..=5 {
        let a = giroux_form(n).unwrap();
        let x = giroux_reeb(n).unwrap();
        let vol = wedge(&a, &ext_d(&a)).unwrap();
        let expected = KForm::three_form(Scalar::from_int(n));
        check(vol.sub(&expected).unwrap().exact_zero() == Some(true), || format!("α∧dα ≠ {n} dx∧dy∧dz"))?;
        let r = verify_reeb(&a, &x, true).unwrap();
        let exact = r.kernel_residual.exact && r.normalization_residual.is_some_and(|n| n.exact && n.vanishes);
        check(r.holds && exact, || format!("strict Reeb check failed for n = {n}: {r:?}"))?;
        let f = beltrami_factor(&x, &g, &mu).unwrap().constant_factor();
        check(f == Some(coeff::int(n)), || format!("factor {f:?} for n = {n}"))?;
    }
    Ok("n = 1..5: density n, strict Reeb, factor n".into())
}

fn criterion_3() -> Outcome {
    let x = abc_field(&ABCParams::ints(1, 1, 1).unwrap());
    let (g, mu) = euclid();
    let c = contact_from_beltrami(&x, &g, &mu).unwrap();
    check(c.contact.verdict == ContactVerdict::Contact, || format!("verdict {:?}", c.contact.verdict))?;
    let norm_sq = x.norm_sq_euclid();
    let grid = Grid::new(32);
    let worst = grid.points().map(|p| (c.contact.density.eval(&p) - norm_sq.eval(&p)).abs()).fold(0.0, f64::max);
    check(worst < 1e-10, || format!("density vs |X|² off by {worst:e}"))?;
    check(c.reeb_like.holds, || "not Reeb-like".into())?;
    let domain = match c.contact.domain {
        Domain::Whole => "whole torus",
        Domain::OffZeroSet => "off the zero set",
    };
    Ok(format!("contact {domain}, max |density - |X|²| = {worst:.1e} on 32³, Reeb-like"))
}

fn criterion_4() -> Outcome {
    let alpha = giroux_form(1).unwrap();
    let x = giroux_reeb(1).unwrap();
    let grid = Grid::verification();
    let hs = [
        ("1", Scalar::one()),
        ("2", Scalar::from_int(2)),
        ("2+cos z", Scalar::from(&TrigPoly::from_int(2) + &cos_axis(2, 1))),
    ];
    let mut worst = (0.0f64, 0.0f64);
    for (name, h) in hs {
        let r = adapted_metric(&alpha, &x, &h).map_err(|e| format!("h = {name}: {e}"))?;
        let y = x.scale(&h);
        let belt = curl(&y, &r.metric, &r.volume).sub(&y).max_norm(&grid);
        let flux = ext_d(&interior(&y, &r.volume.to_kform()).unwrap()).max_norm(&grid);
        check(belt < 1e-9, || format!("h = {name}: curl residual {belt:e}"))?;
        check(flux < 1e-10, || format!("h = {name}: divergence residual {flux:e}"))?;
        worst = (worst.0.max(belt), worst.1.max(flux));
    }
    Ok(format!("h ∈ {{1, 2, 2+cos z}}: curl residual {:.1e}, divergence residual {:.1e}", worst.0, worst.1))
}

fn criterion_5() -> Outcome {
    let (g, mu) = euclid();
    let abc = is_euler_steady(&abc_field(&ABCParams::ints(1, 1, 1).unwrap()), &g, &mu);
    check(abc.verdict == EulerVerdict::SteadyEuler && abc.pressure_is_constant == Some(true), || {
        format!("ABC(1,1,1): {:?}, constant p {:?}", abc.verdict, abc.pressure_is_constant)
    })?;
    let shear = VectorField::new([Scalar::from(sin_axis(1, 1)), Scalar::zero(), Scalar::zero()]);
    let s = is_euler_steady(&shear, &g, &mu);
    check(s.verdict == EulerVerdict::SteadyEuler && s.pressure_is_constant == Some(false), || {
        format!("shear: {:?}, constant p {:?}", s.verdict, s.pressure_is_constant)
    })?;
    let b = s.bernoulli_residual.ok_or("shear: no Bernoulli residual")?;
    check(b.exact && b.vanishes && b.max_abs == 0.0, || format!("shear Bernoulli residual {b:?}"))?;
    let cyc =
        VectorField::new([Scalar::from(sin_axis(1, 1)), Scalar::from(sin_axis(2, 1)), Scalar::from(sin_axis(0, 1))]);
    let c = is_euler_steady(&cyc, &g, &mu);
    let cert = c.closedness_residual;
    check(c.verdict == EulerVerdict::NotEuler && cert.exact && !cert.vanishes, || {
        format!("(sin y, sin z, sin x): {:?}, dβ {cert:?}", c.verdict)
    })?;
    Ok(format!(
        "ABC steady with constant p; shear steady, Bernoulli exactly 0; cyclic NOT_EULER, |dβ| = {:.3}",
        cert.max_abs
    ))
}

/// `B² + C² ≤ 1` by integer cross-multiplication.
fn nonsingular_oracle(b: (i64, i64), c: (i64, i64)) -> bool {
    let (bn, bd, cn, cd) = (b.0 as i128, b.1 as i128, c.0 as i128, c.1 as i128);
    bn * bn * cd * cd + cn * cn * bd * bd <= bd * bd * cd * cd
}

fn criterion_6() -> Outcome {
    let mut table: Vec<((i64, i64), (i64, i64))> = vec![
        ((3, 5), (3, 5)),
        ((1, 1), (1, 10)),
        ((0, 1), (0, 1)),
        ((1, 1), (0, 1)),
        ((4, 5), (3, 5)),
        ((4, 5), (601, 1000)),
        ((12, 13), (5, 13)),
        ((12, 13), (51, 130)),
        ((1, 1), (1, 1_000_000)),
        ((707_107, 1_000_000), (707_106, 1_000_000)),
        ((707_107, 1_000_000), (707_107, 1_000_000)),
        ((24, 25), (7, 25)),
    ];
    let mut d = 1;
    while table.len() < 100 {
        d = d % 12 + 1;
        let i = table.len() as i64;
        let bn = (i * 7) % (d + 1);
        let cn = (i * 5) % (bn + 1);
        table.push(((bn, d), (cn, d)));
    }
    let (mut yes, mut no) = (0, 0);
    for (b, c) in &table {
        let p = ABCParams::from_ratios((1, 1), *b, *c).unwrap();
        let want = nonsingular_oracle(*b, *c);
        let got = abc_nonsingular(&p).map_err(|e| format!("{b:?}, {c:?}: {e}"))?;
        check(got == want, || format!("B = {}/{}, C = {}/{}: got {got}, oracle {want}", b.0, b.1, c.0, c.1))?;
        if want {
            yes += 1;
        } else {
            no += 1;
        }
    }
    Ok(format!("{} cases agree with the oracle ({yes} nonsingular, {no} singular)", table.len()))
}

fn criterion_7() -> Outcome {
    let (g, mu) = euclid();
    let triples = [
        (rat(1, 1), rat(1, 1), rat(1, 1)),
        (rat(1, 1), rat(0, 1), rat(0, 1)),
        (rat(0, 1), rat(0, 1), rat(0, 1)),
        (rat(1, 1), rat(2, 3), rat(1, 7)),
        (rat(1, 1), rat(3, 5), rat(3, 5)),
        (rat(2, 1), rat(5, 1), rat(3, 1)),
        (rat(1, 2), rat(1, 3), rat(1, 4)),
        (rat(1, 1), rat(4, 5), rat(3, 5)),
        (rat(7, 3), rat(0, 1), rat(11, 13)),
        (rat(1, 1), rat(1, 10), rat(1, 100)),
    ];
    for (a, b, c) in &triples {
        let p = ABCParams::new(a.clone(), b.clone(), c.clone()).unwrap();
        let e = energy(&abc_field(&p), &g, &mu);
        // ½(2π)³(A²+B²+C²) = 4(A²+B²+C²)π³
        let want = (a * a + b * b + c * c) * BigInt::from(4);
        let got = e.pi_cubed_multiple.ok_or_else(|| format!("({a}, {b}, {c}): no exact multiple"))?;
        check(coeff::is_zero_within_tol(&(got.clone() - coeff::from_rational(&want))), || {
            format!("({a}, {b}, {c}): got {got}π³, expected {want}π³")
        })?;
        let float = 0.5 * TAU.powi(3) * coeff::to_f64(&coeff::from_rational(&(a * a + b * b + c * c)));
        check((e.value - float).abs() <= 1e-12 * float.max(1.0), || format!("value {} vs {float}", e.value))?;
    }
    Ok(format!("{} triples equal ½(2π)³(A²+B²+C²) exactly", triples.len()))
}

fn abc111_sweep() -> (SectionData, OrbitSearch, Duration) {
    let x = abc_field(&ABCParams::ints(1, 1, 1).unwrap());
    let plane = SectionPlane::new(2, 0.0);
    let opts = SearchOptions::default();
    let start = Instant::now();
    let s = poincare(&x, plane, &plane.lattice(16), 20, &opts.tolerances, None).unwrap();
    let found = find_orbits(&x, &s, &opts).unwrap();
    (s, found, start.elapsed())
}

/// Recorded output of the documented ABC(1,1,1) sweep at the standard profile.
const SWEEP_SECTION_POINTS: usize = 5061;
const SWEEP_ORBITS: usize = 33;

fn criterion_8() -> Outcome {
    let x = abc_field(&ABCParams::ints(1, 0, 0).unwrap());
    let plane = SectionPlane::new(1, 0.0);
    let opts = SearchOptions::default();
    let s = poincare(&x, plane, &plane.lattice(4), 3, &opts.tolerances, None).unwrap();
    let found = find_orbits(&x, &s, &opts).unwrap();
    let o = found
        .orbits
        .iter()
        .find(|o| o.base_point.iter().all(|c| c.abs() < 1e-8))
        .ok_or("no orbit through the origin")?;
    let dt = (TAU - o.period).abs();
    check(dt < 1e-8 && o.winding == [0, 1, 0], || format!("period {} winding {:?}", o.period, o.winding))?;

    for n in 1..=3 {
        let c = gauss_certificate(&giroux_reeb(n).unwrap(), 32).map_err(|e| e.to_string())?;
        check(c.verdict == HomotopyVerdict::Trivial, || format!("X_{n}: {:?}", c.verdict))?;
    }

    let (s1, o1, t1) = abc111_sweep();
    check(t1 < Duration::from_secs(60), || format!("sweep took {t1:?}"))?;
    let (s2, o2, _) = abc111_sweep();
    check(s1 == s2 && o1 == o2, || "two sweeps differ".into())?;
    check(s1.crossings.len() == SWEEP_SECTION_POINTS && o1.orbits.len() == SWEEP_ORBITS, || {
        format!(
            "sweep gave {} section points and {} orbits, fixture has {SWEEP_SECTION_POINTS} and {SWEEP_ORBITS}",
            s1.crossings.len(),
            o1.orbits.len()
        )
    })?;
    let contractible = if o1.contractible_found() { "contractible orbit found" } else { "contractible: inconclusive" };
    Ok(format!(
        "ABC(1,0,0) |2π - T| = {dt:.1e} winding (0,1,0); Gauss TRIVIAL n = 1..3; ABC(1,1,1) sweep {:.1} s, {} points, {} orbits, stable; {contractible}",
        t1.as_secs_f64(),
        s1.crossings.len(),
        o1.orbits.len()
    ))
}

fn run_property<S: Strategy>(name: &str, strategy: S, test: impl Fn(S::Value) -> bool) -> Result<(), String> {
    let mut runner = TestRunner::new_with_rng(
        Config { cases: 200, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner
        .run(&strategy, |v| {
            prop_assert!(test(v));
            Ok(())
        })
        .map_err(|e| format!("{name}: {e}"))
}

fn is_zero(f: &KForm) -> bool {
    f.exact_zero() == Some(true)
}

fn spd_metric() -> impl Strategy<Value = Metric> {
    prop::array::uniform6(-3i64..=3).prop_map(|l| {
        let l = [[l[0], 0, 0], [l[1], l[2], 0], [l[3], l[4], l[5]]];
        let mut g: [[Scalar; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                let v: i64 = (0..3).map(|k| l[i][k] * l[j][k]).sum::<i64>() + i64::from(i == j);
                g[i][j] = Scalar::from_int(v);
            }
        }
        Metric::new(g).unwrap()
    })
}

fn criterion_9() -> Outcome {
    run_property("d² = 0", any_form(3, 3), |a| is_zero(&ext_d(&ext_d(&a))))?;
    run_property("Cartan", (field(2, 2), any_form(2, 2)), |(x, a)| {
        let direct = if a.degree() == 0 {
            interior(&x, &ext_d(&a)).unwrap()
        } else {
            let d_inner = ext_d(&interior(&x, &a).unwrap());
            if a.degree() == 3 {
                d_inner
            } else {
                d_inner.add(&interior(&x, &ext_d(&a)).unwrap()).unwrap()
            }
        };
        is_zero(&lie_derivative(&x, &a).sub(&direct).unwrap())
    })?;
    let pair = (0usize..=3)
        .prop_flat_map(|p| (0..=3 - p).prop_map(move |q| (p, q)))
        .prop_flat_map(|(p, q)| (form(p, 2, 2), form(q, 2, 2)));
    run_property("wedge anticommutativity", pair, |(a, b)| {
        let sign = if (a.degree() * b.degree()) % 2 == 1 { -1 } else { 1 };
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap().scale(&Scalar::from_int(sign));
        is_zero(&ab.sub(&ba).unwrap())
    })?;
    run_property("sharp∘flat", (field(2, 3), spd_metric()), |(x, g)| {
        sharp(&flat(&x, &g), &g).unwrap().sub(&x).exact_zero() == Some(true)
    })?;
    let density = (1i64..=5, 1i64..=3).prop_map(|(n, d)| VolumeForm::new(Scalar::constant(coeff::ratio(n, d))));
    run_property("div∘curl = 0", (field(2, 3), spd_metric(), density), |(x, g, mu)| {
        let w = curl(&x, &g, &mu);
        is_zero(&ext_d(&interior(&w, &mu.to_kform()).unwrap()))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let spec = random_spec(&mut rng, i);
        let text = serialize_field_spec(&spec);
        let back = parse_field_spec(&text).map_err(|e| format!("round trip {i}: {e:?}"))?.value;
        check(back == spec, || format!("round trip {i} changed the document"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10_000 {
        let src = fuzz_input(&mut rng);
        let outcome = std::panic::catch_unwind(|| {
            let _ = parse_scalar(&src);
            let _ = parse_field_spec(&src);
            let _ = parse_document(&src);
        });
        check(outcome.is_ok(), || format!("parser panicked on {src:?}"))?;
    }
    Ok("5 identities × 200 exact cases, 100 round trips, 10000 fuzz inputs".into())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("curl eigenfield identity", criterion_1),
        ("Giroux suite", criterion_2),
        ("Beltrami field gives contact form", criterion_3),
        ("adapted metric for scaled Reeb fields", criterion_4),
        ("Euler verification", criterion_5),
        ("nonsingularity criterion", criterion_6),
        ("energy", criterion_7),
        ("orbit evidence", criterion_8),
        ("property suites", criterion_9),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let n = i + 1;
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {n:>2} {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {n:>2} {name}: {why}");
                failed.push(n);
            }
        }
    }
    println!(
        "EXCL  10 Hofer's theorem, Weinstein conjecture cases, Arnold's decomposition, Novikov's theorem, \
         tight-structure classification: not reproducible numerically, evidence only via 8 and 9"
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
