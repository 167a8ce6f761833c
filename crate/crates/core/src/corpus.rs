//! Seeded generators of test functions.
//!
//! Every function is a constant plus a finite combination of point
//! indicators, so its values, support and tail are known exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::Expr;
use crate::integrator::ScalarFunction;
use crate::space::MeasurableSet;

/// Points used by generated functions lie below this.
pub const SUPPORT_BOUND: u64 = 12;

/// A function with its point values listed explicitly.
#[derive(Debug, Clone)]
pub struct Generated {
    pub function: ScalarFunction,
    /// Value beyond the listed points.
    pub base: f64,
    /// `(n, value)` pairs at the listed points, increasing in `n`.
    pub points: Vec<(u64, f64)>,
}

impl Generated {
    pub fn value(&self, n: u64) -> f64 {
        self.points
            .iter()
            .find(|(m, _)| *m == n)
            .map_or(self.base, |(_, x)| *x)
    }
}

/// `base + Σ (value_i - base) χ_{n_i}`, written as an expression.
fn build(label: &str, base: f64, points: Vec<(u64, f64)>) -> Generated {
    let mut expr = Expr::Num(base);
    for &(n, x) in &points {
        let bump = Expr::Num(x - base).mul(Expr::indicator(
            format!("P{n}"),
            MeasurableSet::singleton(n),
        ));
        expr = expr.add(bump);
    }
    let support = (base == 0.0).then(|| MeasurableSet::finite(points.iter().map(|p| p.0)));
    let function = ScalarFunction::new(label, expr, support).expect("support is exact");
    Generated {
        function,
        base,
        points,
    }
}

pub struct Corpus {
    rng: ChaCha8Rng,
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Corpus {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn points(&mut self, lo: f64, hi: f64) -> Vec<(u64, f64)> {
        let size = self.rng.gen_range(1..=6);
        let mut chosen: Vec<u64> = Vec::new();
        while chosen.len() < size {
            let n = self.rng.gen_range(0..SUPPORT_BOUND);
            if !chosen.contains(&n) {
                chosen.push(n);
            }
        }
        chosen.sort_unstable();
        chosen
            .into_iter()
            .map(|n| (n, self.rng.gen_range(lo..hi)))
            .collect()
    }

    /// Finitely supported, with values in `[-3, 3)` or `[0, 3)`.
    pub fn finite_support(&mut self, label: &str, signed: bool) -> Generated {
        let lo = if signed { -3.0 } else { 0.0 };
        let points = self.points(lo, 3.0);
        build(label, 0.0, points)
    }

    /// Bounded below by a positive constant.
    pub fn strictly_positive(&mut self, label: &str) -> Generated {
        let base = self.rng.gen_range(0.2..2.0);
        let points = self
            .points(0.0, 3.0)
            .into_iter()
            .map(|(n, x)| (n, base + x))
            .collect();
        build(label, base, points)
    }

    /// Positive `u` and `v` together with the tightest `α ≤ u/v ≤ β`.
    pub fn ratio_bounded(&mut self) -> (Generated, Generated, f64, f64) {
        let v = self.strictly_positive("v");
        let u = self.strictly_positive("u");
        let (mut alpha, mut beta) = (f64::INFINITY, 0.0f64);
        for n in 0..=SUPPORT_BOUND {
            let r = u.value(n) / v.value(n);
            alpha = alpha.min(r);
            beta = beta.max(r);
        }
        (u, v, alpha, beta)
    }

    /// `u = c·v` for a random positive `v`, so `α = β = c`.
    pub fn proportional(&mut self) -> (Generated, Generated, f64) {
        let v = self.strictly_positive("v");
        let c = self.rng.gen_range(0.25..4.0);
        let points = v.points.iter().map(|&(n, x)| (n, c * x)).collect();
        let u = build("u", c * v.base, points);
        (u, v, c)
    }
}
