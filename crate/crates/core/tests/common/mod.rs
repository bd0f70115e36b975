#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use reebkit::coeff;
use reebkit::dsl::Params;
use reebkit::trig::{Mode, Parity};
use reebkit::{FieldSpec, KForm, Metric, Scalar, TrigPoly, VectorField, VolumeForm};

pub const AXES: usize = 3;

/// Sparse trigonometric polynomials with small rational coefficients and
/// wave numbers in `[-max_k, max_k]`.
pub fn trig(max_k: i32, max_terms: usize) -> impl Strategy<Value = TrigPoly> {
    let term = (prop::array::uniform3(-max_k..=max_k), any::<bool>(), -6i64..=6, 1i64..=4);
    prop::collection::vec(term, 0..=max_terms).prop_map(|terms| {
        let mut p = TrigPoly::zero();
        for (k, sin, n, d) in terms {
            let parity = if sin { Parity::Sin } else { Parity::Cos };
            p.add_term(Mode::new(k[0], k[1], k[2]), parity, coeff::ratio(n, d));
        }
        p
    })
}

pub fn scalar(max_k: i32, max_terms: usize) -> impl Strategy<Value = Scalar> {
    trig(max_k, max_terms).prop_map(Scalar::from)
}

pub fn field(max_k: i32, max_terms: usize) -> impl Strategy<Value = VectorField> {
    prop::array::uniform3(scalar(max_k, max_terms)).prop_map(VectorField::new)
}

pub fn form(degree: usize, max_k: i32, max_terms: usize) -> impl Strategy<Value = KForm> {
    let n = [1, 3, 3, 1][degree];
    prop::collection::vec(scalar(max_k, max_terms), n).prop_map(move |c| KForm::new(degree, c).unwrap())
}

pub fn any_form(max_k: i32, max_terms: usize) -> impl Strategy<Value = KForm> {
    (0usize..=3).prop_flat_map(move |d| form(d, max_k, max_terms))
}

/// The 125 points `2π(i + 1/3)/5` per axis.
pub fn oracle_points() -> Vec<[f64; 3]> {
    let c = |i: usize| std::f64::consts::TAU * (i as f64 + 1.0 / 3.0) / 5.0;
    let mut out = Vec::with_capacity(125);
    for i in 0..5 {
        for j in 0..5 {
            for k in 0..5 {
                out.push([c(i), c(j), c(k)]);
            }
        }
    }
    out
}

/// Value and gradient of a polynomial summed term by term.
pub fn naive_eval(p: &TrigPoly, x: &[f64; 3]) -> (f64, [f64; 3]) {
    let mut v = 0.0;
    let mut g = [0.0; 3];
    for (k, parity, c) in p.terms() {
        let c = coeff::to_f64(c);
        let th: f64 = (0..3).map(|i| k.0[i] as f64 * x[i]).sum();
        let (val, d) = match parity {
            Parity::Cos => (c * th.cos(), -c * th.sin()),
            Parity::Sin => (c * th.sin(), c * th.cos()),
        };
        v += val;
        for i in 0..3 {
            g[i] += d * k.0[i] as f64;
        }
    }
    (v, g)
}

pub fn trig_of(s: &Scalar) -> &TrigPoly {
    s.as_trig().expect("polynomial scalar")
}

fn random_trig(rng: &mut ChaCha8Rng, max_terms: usize) -> TrigPoly {
    let mut p = TrigPoly::zero();
    for _ in 0..rng.random_range(0..=max_terms) {
        let k = Mode::new(rng.random_range(-3..=3), rng.random_range(-3..=3), rng.random_range(-3..=3));
        let parity = if rng.random_bool(0.5) { Parity::Sin } else { Parity::Cos };
        p.add_term(k, parity, coeff::ratio(rng.random_range(-9..=9), rng.random_range(1..=7)));
    }
    p
}

/// `c + cos(k·x)` with `c ≥ 2`, safely positive.
fn positive_trig(rng: &mut ChaCha8Rng) -> TrigPoly {
    let k = Mode::new(rng.random_range(0..=2), rng.random_range(-2..=2), 1);
    &TrigPoly::from_int(rng.random_range(2..=5)) + &TrigPoly::cos(k, coeff::one())
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let p = Scalar::from(random_trig(rng, 4));
    match rng.random_range(0..6) {
        0 => p.div(&Scalar::from(positive_trig(rng))),
        1 => &p + &Scalar::from(positive_trig(rng)).sqrt(),
        2 => Scalar::from(positive_trig(rng)).powi(-rng.random_range(1..=3)),
        3 => &p * &Scalar::from(positive_trig(rng)).recip(),
        _ => p,
    }
}

pub fn random_spec(rng: &mut ChaCha8Rng, i: usize) -> FieldSpec {
    let field = VectorField::new([random_scalar(rng), random_scalar(rng), random_scalar(rng)]);
    let mut spec = FieldSpec::new(format!("case_{i}"), field);
    if rng.random_bool(0.4) {
        let d = [0, 1, 2].map(|_| {
            if rng.random_bool(0.5) {
                Scalar::from(positive_trig(rng))
            } else {
                Scalar::constant(coeff::ratio(rng.random_range(1..=9), rng.random_range(1..=4)))
            }
        });
        let mut entries: [[Scalar; 3]; 3] = Default::default();
        for (i, s) in d.into_iter().enumerate() {
            entries[i][i] = s;
        }
        if rng.random_bool(0.5) {
            let off = Scalar::constant(coeff::ratio(1, rng.random_range(4..=8)));
            entries[0][1] = off.clone();
            entries[1][0] = off;
        }
        spec.metric = Metric::new(entries).unwrap();
    }
    if rng.random_bool(0.3) {
        spec.volume = VolumeForm::new(Scalar::from(positive_trig(rng)).recip());
    }
    let mut params = Params::new();
    for name in ["A", "beta", "k2"] {
        if rng.random_bool(0.3) {
            params.insert(
                name.to_string(),
                BigRational::new(BigInt::from(rng.random_range(-50..=50)), BigInt::from(rng.random_range(1..=9))),
            );
        }
    }
    spec.params = params;
    spec
}

const VOCAB: &[&str] = &[
    "sin",
    "cos",
    "sqrt",
    "(",
    ")",
    "x",
    "y",
    "z",
    "+",
    "-",
    "*",
    "/",
    "^",
    "1",
    "2",
    "0",
    "3.25",
    "1/2",
    "1e3",
    "1e999",
    "99999999999999999999",
    "[field]",
    "[metric]",
    "[params]",
    "[volume]",
    "[form]",
    "[bogus]",
    "=",
    "\n",
    "# c",
    "g12",
    "g21",
    "mu",
    "dx",
    "name",
    "A",
    " ",
    "π",
    "é",
    "\t",
    "[",
    "]",
    "--",
    "^-",
    "^40",
    ".",
];

/// Up to 40 pieces drawn from DSL vocabulary and stray characters.
pub fn fuzz_input(rng: &mut ChaCha8Rng) -> String {
    let len = rng.random_range(0..40);
    let mut src = String::new();
    for _ in 0..len {
        if rng.random_bool(0.1) {
            src.push(char::from_u32(rng.random_range(0x20..0x2FF)).unwrap_or('?'));
        } else {
            src.push_str(VOCAB[rng.random_range(0..VOCAB.len())]);
        }
    }
    src
}
