//! Uniform verification grids on T³ and the sign certificates built on them.
//!
//! A grid certificate is not a proof: it samples the function on an `n³`
//! lattice and demands that the smallest sampled magnitude beat a continuity
//! margin `2 · G · (h√3/2)`, where `G` bounds the gradient (rigorous for
//! trigonometric polynomials, finite-difference estimate otherwise).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::coeff;
use crate::scalar::Scalar;

/// Default verification grid resolution.
pub const VERIFY_GRID: usize = 32;

/// Safety factor applied to the continuity margin.
pub const WITNESS_MARGIN_FACTOR: f64 = 2.0;

/// Squared norms at or below this are treated as exact zeros of a sampled
/// field (stagnation points that land on grid nodes).
pub const GRID_ZERO_TOL: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "grid needs at least 2 points per axis");
        Grid { n }
    }

    pub fn verification() -> Self {
        Grid::new(VERIFY_GRID)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn half_diagonal(&self) -> f64 {
        self.spacing() * 3f64.sqrt() / 2.0
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Point with flat index `idx` (x slowest, z fastest).
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Samples `f` at every grid point; order matches [`Grid::point`].
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64; 3]) -> f64 + Sync,
    {
        (0..self.len()).into_par_iter().map(|i| f(&self.point(i))).collect()
    }

    /// Finite-difference estimate of `max |∇f|` from grid samples.
    pub fn gradient_estimate(&self, values: &[f64]) -> f64 {
        let n = self.n;
        let h = self.spacing();
        let mut max = [0.0f64; 3];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = values[(i * n + j) * n + k];
                    let nb = [
                        values[(((i + 1) % n) * n + j) * n + k],
                        values[(i * n + (j + 1) % n) * n + k],
                        values[(i * n + j) * n + (k + 1) % n],
                    ];
                    for a in 0..3 {
                        max[a] = max[a].max((nb[a] - v).abs() / h);
                    }
                }
            }
        }
        (max[0] * max[0] + max[1] * max[1] + max[2] * max[2]).sqrt()
    }
}

/// Max of `|v|` over a sample vector (0 for empty input).
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertMethod {
    /// Exact bound from the Fourier coefficients.
    ExactBound,
    /// Sampled on an `n³` grid with a continuity margin.
    Grid,
}

/// One-sided certificate that a scalar field never vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub method: CertMethod,
    pub grid: usize,
    /// +1 or −1 when every sample has that sign, 0 otherwise.
    pub sign: i8,
    pub min_abs: f64,
    pub max_abs: f64,
    pub gradient_bound: f64,
    pub margin: f64,
    pub passed: bool,
}

impl Certificate {
    /// Nonvanishing certificate for `s` on an `n³` grid.
    pub fn nonvanishing(s: &Scalar, n: usize) -> Certificate {
        if let Some(p) = s.as_trig() {
            if let Some(c) = p.as_constant() {
                let v = coeff::to_f64(&c);
                let zero = coeff::is_zero_within_tol(&c);
                return Certificate {
                    method: CertMethod::ExactBound,
                    grid: 0,
                    sign: if zero {
                        0
                    } else if v > 0.0 {
                        1
                    } else {
                        -1
                    },
                    min_abs: v.abs(),
                    max_abs: v.abs(),
                    gradient_bound: 0.0,
                    margin: 0.0,
                    passed: !zero,
                };
            }
            let lb = p.lower_bound();
            let ub = -(-p).lower_bound();
            if coeff::is_positive(&lb) && !coeff::is_zero_within_tol(&lb) {
                return Certificate {
                    method: CertMethod::ExactBound,
                    grid: 0,
                    sign: 1,
                    min_abs: coeff::to_f64(&lb),
                    max_abs: p.sup_bound(),
                    gradient_bound: p.gradient_bound(),
                    margin: 0.0,
                    passed: true,
                };
            }
            if coeff::is_negative(&ub) && !coeff::is_zero_within_tol(&ub) {
                return Certificate {
                    method: CertMethod::ExactBound,
                    grid: 0,
                    sign: -1,
                    min_abs: -coeff::to_f64(&ub),
                    max_abs: p.sup_bound(),
                    gradient_bound: p.gradient_bound(),
                    margin: 0.0,
                    passed: true,
                };
            }
        }
        let grid = Grid::new(n);
        let values = grid.sample(|x| s.eval(x));
        let gradient_bound = match s.as_trig() {
            Some(p) => p.gradient_bound(),
            None => grid.gradient_estimate(&values),
        };
        Certificate::from_samples(&values, gradient_bound, &grid)
    }

    /// Grid certificate from precomputed samples and a gradient bound.
    pub fn from_samples(values: &[f64], gradient_bound: f64, grid: &Grid) -> Certificate {
        let all_pos = values.iter().all(|&v| v > 0.0);
        let all_neg = values.iter().all(|&v| v < 0.0);
        let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let max_abs = max_abs(values);
        let margin = WITNESS_MARGIN_FACTOR * gradient_bound * grid.half_diagonal();
        let sign = if all_pos {
            1
        } else if all_neg {
            -1
        } else {
            0
        };
        let finite = values.iter().all(|v| v.is_finite());
        Certificate {
            method: CertMethod::Grid,
            grid: grid.n,
            sign,
            min_abs,
            max_abs,
            gradient_bound,
            margin,
            passed: !values.is_empty() && finite && sign != 0 && min_abs > margin && min_abs > coeff::FLOAT_EXACT_TOL,
        }
    }

    pub fn positive(&self) -> bool {
        self.passed && self.sign > 0
    }

    /// Nonvanishing certificate for `num/den` on the grid points where
    /// `den > GRID_ZERO_TOL`; `den` is a nonnegative quantity such as a
    /// squared norm. Returns the certificate and the number of excised points.
    pub fn off_zero_set(num: &Scalar, den: &Scalar, n: usize) -> (Certificate, usize) {
        let grid = Grid::new(n);
        let nv = grid.sample(|x| num.eval(x));
        let dv = grid.sample(|x| den.eval(x));
        let keep: Vec<bool> = dv.iter().map(|d| *d > GRID_ZERO_TOL).collect();
        let ratio: Vec<f64> = nv.iter().zip(&dv).map(|(a, b)| a / b).collect();
        let mut g = [0.0f64; 3];
        let h = grid.spacing();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let idx = (i * n + j) * n + k;
                    if !keep[idx] {
                        continue;
                    }
                    let nb =
                        [((i + 1) % n * n + j) * n + k, (i * n + (j + 1) % n) * n + k, (i * n + j) * n + (k + 1) % n];
                    for a in 0..3 {
                        if keep[nb[a]] {
                            g[a] = g[a].max((ratio[nb[a]] - ratio[idx]).abs() / h);
                        }
                    }
                }
            }
        }
        let gradient = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        let kept: Vec<f64> = ratio.iter().zip(&keep).filter(|(_, k)| **k).map(|(r, _)| *r).collect();
        let excised = keep.len() - kept.len();
        (Certificate::from_samples(&kept, gradient, &grid), excised)
    }
}
