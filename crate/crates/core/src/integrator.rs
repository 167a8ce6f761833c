//! Tagged partition sums and the Birkhoff weak integral.
//!
//! The reported value of an integral is always the partial sum over the
//! canonical singleton partition up to the horizon. Sampling refinements only
//! decides whether that value deserves the name: every stage compares it with
//! tagged sums over random refinements of a stage partition, under several tag
//! strategies and head enumeration orders.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{BinOp, EvalError, Expr, ParseError, SetBindings};
use crate::measures::{MeasureError, SetFunction};
use crate::partitions::{list_tag, split_cells, TaggedPartition, STRATEGIES};
use crate::space::{MeasurableSet, DEFAULT_HORIZON};

/// Exponents below this are rejected by [`p_norm`].
pub const MIN_EXPONENT: f64 = 1e-3;

/// How far declared supports are spot-checked.
const SUPPORT_CHECK_HORIZON: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot bound the tail of {0} beyond the horizon")]
    NonSummableTail(String),
    #[error("integral did not converge (status {:?}, oscillation {:e})", .0.status, .0.oscillation)]
    NotConverged(Box<IntegralResult>),
    #[error("exponent {0} is too small to invert reliably")]
    IllConditionedExponent(f64),
    #[error("tagged sum needs {wanted} cells but the partition has {available}")]
    DepthExceedsCells { wanted: usize, available: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{label} is {value} at {n}, outside its declared support")]
    OutsideSupport { label: String, n: u64, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// A real function on the naturals, optionally with a declared support
/// outside of which it vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    expr: Expr,
    support: Option<MeasurableSet>,
    label: String,
}

impl ScalarFunction {
    /// Builds a function, spot-checking the declared support.
    pub fn new(
        label: impl Into<String>,
        expr: Expr,
        support: Option<MeasurableSet>,
    ) -> Result<Self, FunctionError> {
        let f = ScalarFunction {
            expr,
            support,
            label: label.into(),
        };
        if let Some(s) = &f.support {
            for n in 0..SUPPORT_CHECK_HORIZON {
                if !s.member(n) {
                    let value = f.expr.eval(n)?;
                    if value != 0.0 {
                        return Err(FunctionError::OutsideSupport {
                            label: f.label,
                            n,
                            value,
                        });
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn parse(
        label: impl Into<String>,
        text: &str,
        support: Option<MeasurableSet>,
        sets: &SetBindings,
    ) -> Result<Self, FunctionError> {
        ScalarFunction::new(label, Expr::parse(text, sets)?, support)
    }

    fn derived(label: String, expr: Expr, support: Option<MeasurableSet>) -> Self {
        ScalarFunction {
            expr,
            support,
            label,
        }
    }

    pub fn constant(c: f64) -> Self {
        let support = (c == 0.0).then(MeasurableSet::empty);
        ScalarFunction::derived(format!("{c:?}"), Expr::Num(c), support)
    }

    pub fn zero() -> Self {
        ScalarFunction::constant(0.0)
    }

    /// `χ_set`.
    pub fn indicator(label: impl Into<String>, set: MeasurableSet) -> Self {
        let label = label.into();
        ScalarFunction::derived(
            format!("χ_{label}"),
            Expr::indicator(label, set.clone()),
            Some(set),
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn support(&self) -> Option<&MeasurableSet> {
        self.support.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, n: u64) -> Result<f64, EvalError> {
        self.expr.eval(n)
    }

    /// Upper bound on `|u(n)|` for `n ≥ from`; `None` if none can be found.
    pub fn sup_abs_from(&self, from: u64) -> Option<f64> {
        if let Some(s) = &self.support {
            let beyond = s.intersect(&MeasurableSet::at_least(from));
            if beyond.is_empty_known() {
                return Some(0.0);
            }
        }
        self.expr.range_from(from).map(|r| r.sup_abs())
    }

    pub fn abs(&self) -> Self {
        ScalarFunction::derived(
            format!("|{}|", self.label),
            self.expr.clone().abs(),
            self.support.clone(),
        )
    }

    pub fn scale(&self, c: f64) -> Self {
        let support = if c == 0.0 {
            Some(MeasurableSet::empty())
        } else {
            self.support.clone()
        };
        ScalarFunction::derived(
            format!("{c:?}·{}", self.label),
            Expr::Num(c).mul(self.expr.clone()),
            support,
        )
    }

    /// `self^e`. Nonpositive exponents lose the declared support.
    pub fn powf(&self, e: f64) -> Self {
        let support = if e > 0.0 { self.support.clone() } else { None };
        ScalarFunction::derived(
            format!("{}^{e:?}", self.label),
            self.expr.clone().powf(e),
            support,
        )
    }

    pub fn add(&self, other: &ScalarFunction) -> Self {
        pointwise(self, other, PointwiseOp::Sum)
    }

    pub fn mul(&self, other: &ScalarFunction) -> Self {
        pointwise(self, other, PointwiseOp::Product)
    }

    /// `self / other`; vanishes wherever the numerator does.
    pub fn div(&self, other: &ScalarFunction) -> Self {
        ScalarFunction::derived(
            format!("{}/{}", self.label, other.label),
            self.expr.clone().div(other.expr.clone()),
            self.support.clone(),
        )
    }

    /// `self · χ_set`.
    pub fn restrict(&self, set: &MeasurableSet) -> Self {
        let support = match &self.support {
            Some(s) => s.intersect(set),
            None => set.clone(),
        };
        ScalarFunction::derived(
            format!("{}·χ_{}", self.label, set.label()),
            self.expr
                .clone()
                .mul(Expr::indicator(set.label(), set.clone())),
            Some(support),
        )
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.label, self.expr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointwiseOp {
    Min,
    Max,
    AbsOfFirst,
    Sum,
    Product,
    Scale(f64),
}

fn union_support(a: &ScalarFunction, b: &ScalarFunction) -> Option<MeasurableSet> {
    Some(a.support.as_ref()?.union(b.support.as_ref()?))
}

/// Pointwise combination of two functions. Unary operations ignore `v`.
pub fn pointwise(u: &ScalarFunction, v: &ScalarFunction, op: PointwiseOp) -> ScalarFunction {
    let (a, b) = (u.expr.clone(), v.expr.clone());
    match op {
        PointwiseOp::Min => ScalarFunction::derived(
            format!("min({}, {})", u.label, v.label),
            Expr::binary(BinOp::Min, a, b),
            union_support(u, v),
        ),
        PointwiseOp::Max => ScalarFunction::derived(
            format!("max({}, {})", u.label, v.label),
            Expr::binary(BinOp::Max, a, b),
            union_support(u, v),
        ),
        PointwiseOp::AbsOfFirst => u.abs(),
        PointwiseOp::Sum => ScalarFunction::derived(
            format!("({} + {})", u.label, v.label),
            a.add(b),
            union_support(u, v),
        ),
        PointwiseOp::Product => {
            let support = match (&u.support, &v.support) {
                (Some(s), Some(t)) => Some(s.intersect(t)),
                (Some(s), None) | (None, Some(s)) => Some(s.clone()),
                (None, None) => None,
            };
            ScalarFunction::derived(format!("{}·{}", u.label, v.label), a.mul(b), support)
        }
        PointwiseOp::Scale(c) => u.scale(c),
    }
}

/// Sampling parameters shared by every integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationConfig {
    pub tol: f64,
    pub stages: u32,
    pub samples_per_stage: usize,
    pub horizon: u64,
    pub seed: u64,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            tol: 1e-8,
            stages: 8,
            samples_per_stage: 32,
            horizon: DEFAULT_HORIZON,
            seed: 42,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |m: &str| Err(IntegrationError::InvalidConfig(m.to_string()));
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.stages == 0 {
            return bad("stages must be positive");
        }
        if self.samples_per_stage == 0 {
            return bad("samples_per_stage must be positive");
        }
        if self.horizon < u64::from(self.stages) {
            return bad("horizon must be at least stages");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralStatus {
    Converged,
    Oscillating,
    TailUnresolved,
}

/// One tagged sum with the head cells and tags that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSum {
    pub sum: f64,
    pub cells: Vec<Vec<u64>>,
    pub tags: Vec<u64>,
}

/// Smallest and largest sums seen at the final stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremes {
    pub low: PartitionSum,
    pub high: PartitionSum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub oscillation: f64,
    /// The configured tolerance, widened to the rounding error of sums this
    /// large when that is bigger.
    pub tolerance: f64,
    pub status: IntegralStatus,
    pub partitions_examined: u64,
    pub stage_depth: u64,
    pub tail_bound: f64,
    pub stage_oscillations: Vec<f64>,
    pub extremes: Option<Extremes>,
}

impl IntegralResult {
    pub fn converged(&self) -> bool {
        self.status == IntegralStatus::Converged
    }
}

/// `Σ_{k<n} u(t_k) ν(B_k)` over the first `n` cells in canonical order.
pub fn tagged_sum(
    u: &ScalarFunction,
    nu: &SetFunction,
    tp: &TaggedPartition,
    n: usize,
) -> Result<f64, IntegrationError> {
    let mut sum = 0.0;
    let mut taken = 0;
    for (cell, tag) in tp.tagged_cells().take(n) {
        let value = u.eval(tag)?;
        // 0 · ν(B) = 0 even when ν(B) cannot be evaluated
        if value != 0.0 {
            sum += value * nu.evaluate(&cell)?;
        }
        taken += 1;
    }
    if taken < n {
        return Err(IntegrationError::DepthExceedsCells {
            wanted: n,
            available: taken,
        });
    }
    Ok(sum)
}

/// Upper bound on `Σ_{n ≥ h} |u(n)| ν({n})`.
fn tail_bound(u: &ScalarFunction, nu: &SetFunction, h: u64) -> Result<f64, IntegrationError> {
    let sup = u
        .sup_abs_from(h)
        .ok_or_else(|| IntegrationError::NonSummableTail(u.label.clone()))?;
    if sup == 0.0 {
        return Ok(0.0);
    }
    let bound = sup * nu.singleton_tail_sum(h);
    if bound.is_finite() {
        Ok(bound)
    } else {
        Err(IntegrationError::NonSummableTail(u.label.clone()))
    }
}

/// Cells of `[0, c)` on which `values` is constant, ordered by least element.
fn level_sets(values: &[f64], c: usize) -> Vec<Vec<u64>> {
    let mut keys: Vec<u64> = Vec::new();
    let mut cells: Vec<Vec<u64>> = Vec::new();
    for (n, &x) in values[..c].iter().enumerate() {
        let key = if x == 0.0 { 0 } else { x.to_bits() };
        match keys.iter().position(|&k| k == key) {
            Some(i) => cells[i].push(n as u64),
            None => {
                keys.push(key);
                cells.push(vec![n as u64]);
            }
        }
    }
    cells
}

fn stage_seed(seed: u64, stage: u32) -> u64 {
    seed ^ u64::from(stage).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Tracker {
    low: Option<PartitionSum>,
    high: Option<PartitionSum>,
    min: f64,
    max: f64,
    keep: bool,
}

impl Tracker {
    fn new(keep: bool) -> Self {
        Tracker {
            low: None,
            high: None,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            keep,
        }
    }

    fn record(&mut self, sum: f64, cells: &[Vec<u64>], tags: &[u64], order: Option<&[usize]>) {
        let snapshot = || {
            let (cells, tags) = match order {
                Some(o) => (
                    o.iter().map(|&i| cells[i].clone()).collect(),
                    o.iter().map(|&i| tags[i]).collect(),
                ),
                None => (cells.to_vec(), tags.to_vec()),
            };
            PartitionSum { sum, cells, tags }
        };
        if sum < self.min {
            self.min = sum;
            if self.keep {
                self.low = Some(snapshot());
            }
        }
        if sum > self.max {
            self.max = sum;
            if self.keep {
                self.high = Some(snapshot());
            }
        }
    }
}

/// Estimates the Birkhoff weak integral of `u` with respect to `nu`.
pub fn birkhoff_weak_integral(
    u: &ScalarFunction,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult, IntegrationError> {
    cfg.validate()?;
    let h = cfg.horizon;
    let values: Vec<f64> = (0..h).map(|n| u.eval(n)).collect::<Result<_, _>>()?;
    let measure = nu.cell_evaluator(h);
    let singles: Vec<f64> = (0..h)
        .map(|n| {
            let x = values[n as usize];
            if x == 0.0 {
                0.0
            } else {
                x * measure.singleton(n)
            }
        })
        .collect();
    let value: f64 = singles.iter().sum();
    let tail = tail_bound(u, nu, h)?;

    let mut examined = 0u64;
    let mut stage_oscillations = Vec::with_capacity(cfg.stages as usize);
    let mut extremes = None;
    let mut scale: f64 = singles.iter().map(|x| x.abs()).sum();
    for s in 1..=cfg.stages {
        let last = s == cfg.stages;
        let c = (h * u64::from(s)).div_ceil(u64::from(cfg.stages)) as usize;
        // singleton cells between the stage coverage and the horizon
        let rest: f64 = singles[c..].iter().sum();
        let head_sum =
            |cells: &[Vec<u64>], tags: &[u64], order: &mut dyn Iterator<Item = usize>| {
                let mut sum = 0.0;
                for i in order {
                    let x = values[tags[i] as usize];
                    if x != 0.0 {
                        sum += x * measure.eval(&cells[i]);
                    }
                }
                sum + rest
            };
        let mut tracker = Tracker::new(last);

        let base = level_sets(&values, c);
        let base_tags: Vec<u64> = base.iter().map(|cell| cell[0]).collect();
        let sum = head_sum(&base, &base_tags, &mut (0..base.len()));
        tracker.record(sum, &base, &base_tags, None);
        let singletons: Vec<Vec<u64>> = (0..c as u64).map(|n| vec![n]).collect();
        let single_tags: Vec<u64> = (0..c as u64).collect();
        let sum = head_sum(&singletons, &single_tags, &mut (0..c));
        tracker.record(sum, &singletons, &single_tags, None);
        examined += 2;

        let mut rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, s));
        for i in 0..cfg.samples_per_stage {
            let cells = split_cells(&base, &mut rng);
            let strategy = STRATEGIES[i % STRATEGIES.len()];
            let tags: Vec<u64> = cells
                .iter()
                .map(|cell| list_tag(cell, strategy, h, &mut rng))
                .collect();
            let sum = head_sum(&cells, &tags, &mut (0..cells.len()));
            tracker.record(sum, &cells, &tags, None);
            examined += 1;
            if i % 2 == 1 {
                let mut order: Vec<usize> = (0..cells.len()).collect();
                order.shuffle(&mut rng);
                let sum = head_sum(&cells, &tags, &mut order.iter().copied());
                tracker.record(sum, &cells, &tags, Some(&order));
                examined += 1;
            }
        }
        stage_oscillations.push(tracker.max - tracker.min);
        if last {
            scale = scale.max(tracker.max.abs()).max(tracker.min.abs());
            extremes = tracker
                .low
                .zip(tracker.high)
                .map(|(low, high)| Extremes { low, high });
        }
    }
    let oscillation = *stage_oscillations.last().expect("at least one stage");
    // reordering h products and sums moves the result by a few ulps of scale
    let tolerance = cfg.tol.max(h as f64 * f64::EPSILON * scale);
    let status = if oscillation > tolerance {
        IntegralStatus::Oscillating
    } else if tail > tolerance {
        IntegralStatus::TailUnresolved
    } else {
        IntegralStatus::Converged
    };
    Ok(IntegralResult {
        value,
        oscillation,
        tolerance,
        status,
        partitions_examined: examined,
        stage_depth: h,
        tail_bound: tail,
        stage_oscillations,
        extremes,
    })
}

/// `∫_E u dν`, computed as the integral of `u · χ_E`.
pub fn integrate_on(
    u: &ScalarFunction,
    set: &MeasurableSet,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<IntegralResult, IntegrationError> {
    birkhoff_weak_integral(&u.restrict(set), nu, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Norm {
    pub value: f64,
    pub p: f64,
    pub integral: IntegralResult,
}

/// `|u|^p` as an integrand.
pub fn abs_pow(u: &ScalarFunction, p: f64) -> ScalarFunction {
    if p == 1.0 {
        u.abs()
    } else {
        u.abs().powf(p)
    }
}

/// `‖u‖_p = (∫ |u|^p dν)^{1/p}`.
pub fn p_norm(
    u: &ScalarFunction,
    p: f64,
    nu: &SetFunction,
    cfg: &IntegrationConfig,
) -> Result<Norm, IntegrationError> {
    if !(p.is_finite() && p > 0.0) {
        return Err(IntegrationError::InvalidConfig(format!(
            "norm exponent must be positive, got {p}"
        )));
    }
    if p < MIN_EXPONENT {
        return Err(IntegrationError::IllConditionedExponent(p));
    }
    let integral = birkhoff_weak_integral(&abs_pow(u, p), nu, cfg)?;
    if !integral.converged() {
        return Err(IntegrationError::NotConverged(Box::new(integral)));
    }
    Ok(Norm {
        value: integral.value.max(0.0).powf(1.0 / p),
        p,
        integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::zoo::{self, *};
    use crate::measures::Distortion;
    use crate::partitions::{Partition, TaggedPartition};

    fn chi(v: &[u64]) -> ScalarFunction {
        ScalarFunction::indicator("B", MeasurableSet::finite(v.iter().copied()))
    }

    fn one() -> ScalarFunction {
        ScalarFunction::constant(1.0)
    }

    fn cfg() -> IntegrationConfig {
        IntegrationConfig::default()
    }

    #[test]
    fn tagged_sum_examples() {
        let nu = additive_geometric(0.5);
        let single = TaggedPartition::least(Partition::singletons());
        assert_eq!(tagged_sum(&chi(&[0, 1]), &nu, &single, 2).unwrap(), 0.75);
        let tp = TaggedPartition::least(Partition::from_lists(&[&[0, 1]]).unwrap());
        assert_eq!(
            tagged_sum(&ScalarFunction::zero(), &nu, &tp, 5).unwrap(),
            0.0
        );
        let mx = max_geometric(0.5);
        assert_eq!(tagged_sum(&chi(&[0, 1]), &mx, &tp, 1).unwrap(), 0.5);
    }

    #[test]
    fn tagged_sum_past_a_finite_family_is_an_error() {
        let p = Partition::new(
            vec![MeasurableSet::cofinite([0])],
            crate::partitions::TailRule::Singletons,
            "",
        )
        .unwrap();
        let tp = TaggedPartition::least(p);
        let nu = additive_geometric(0.5);
        assert!(tagged_sum(&one(), &nu, &tp, 2).is_ok());
        assert!(matches!(
            tagged_sum(&one(), &nu, &tp, 3),
            Err(IntegrationError::DepthExceedsCells {
                wanted: 3,
                available: 2
            })
        ));
    }

    #[test]
    fn integral_examples() {
        let nu = additive_geometric(0.5);
        let r = birkhoff_weak_integral(&one(), &nu, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.status, IntegralStatus::Converged);

        for m in zoo::all() {
            let r = birkhoff_weak_integral(&chi(&[]), &m, &cfg()).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.status, IntegralStatus::Converged, "{m}");
        }

        let mx = max_geometric(0.5);
        let r = birkhoff_weak_integral(&chi(&[0, 1]), &mx, &cfg()).unwrap();
        assert_eq!(r.status, IntegralStatus::Oscillating);
        assert!(r.oscillation >= 0.25);
        let ex = r.extremes.unwrap();
        assert_eq!(ex.low.sum, 0.5);
        assert_eq!(ex.high.sum, 0.75);
    }

    #[test]
    fn distorted_measures_oscillate_on_indicators() {
        let sq = distorted_geometric(0.5, Distortion::square());
        let r = birkhoff_weak_integral(&chi(&[0, 1]), &sq, &cfg()).unwrap();
        assert_eq!(r.status, IntegralStatus::Oscillating);
        assert!((r.oscillation - 0.25).abs() < 1e-12);
    }

    #[test]
    fn integrate_on_examples() {
        let nu = additive_geometric(0.5);
        let u = ScalarFunction::parse("u", "geom(0.5)", None, &SetBindings::new()).unwrap();
        let whole = integrate_on(&u, &MeasurableSet::everything(), &nu, &cfg()).unwrap();
        let direct = birkhoff_weak_integral(&u, &nu, &cfg()).unwrap();
        assert_eq!(whole.value, direct.value);
        let r = integrate_on(&one(), &MeasurableSet::finite([0]), &nu, &cfg()).unwrap();
        assert_eq!(r.value, 0.5);
        let r = integrate_on(&u, &MeasurableSet::empty(), &nu, &cfg()).unwrap();
        assert_eq!((r.value, r.status), (0.0, IntegralStatus::Converged));
    }

    #[test]
    fn restriction_is_additive() {
        let nu = additive_geometric(0.6);
        let u = ScalarFunction::parse("u", "1 + geom(0.5)", None, &SetBindings::new()).unwrap();
        let e = MeasurableSet::even();
        let a = integrate_on(&u, &e, &nu, &cfg()).unwrap().value;
        let b = integrate_on(&u, &e.complement(), &nu, &cfg())
            .unwrap()
            .value;
        let all = birkhoff_weak_integral(&u, &nu, &cfg()).unwrap().value;
        assert!((a + b - all).abs() < 1e-10);
    }

    #[test]
    fn p_norm_examples() {
        let nu = additive_geometric(0.5);
        let u = chi(&[0]).scale(2.0);
        let n = p_norm(&u, 2.0, &nu, &cfg()).unwrap();
        assert!((n.value - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(
            p_norm(&ScalarFunction::zero(), 3.0, &nu, &cfg())
                .unwrap()
                .value,
            0.0
        );
        assert!((p_norm(&chi(&[0]), 0.5, &nu, &cfg()).unwrap().value - 0.25).abs() < 1e-12);
        assert!(matches!(
            p_norm(&chi(&[0]), 1e-4, &nu, &cfg()),
            Err(IntegrationError::IllConditionedExponent(_))
        ));
        assert!(matches!(
            p_norm(&chi(&[0, 1]), 2.0, &max_geometric(0.5), &cfg()),
            Err(IntegrationError::NotConverged(_))
        ));
    }

    #[test]
    fn pointwise_examples() {
        let z = pointwise(&chi(&[0]), &chi(&[1]), PointwiseOp::Min);
        assert!((0..20).all(|n| z.eval(n).unwrap() == 0.0));
        let u = ScalarFunction::parse("u", "geom(0.3) - 0.2", None, &SetBindings::new()).unwrap();
        let m = pointwise(&u, &u, PointwiseOp::Max);
        assert!((0..20).all(|n| m.eval(n).unwrap() == u.eval(n).unwrap()));
        let a = pointwise(&chi(&[0]).scale(-3.0), &one(), PointwiseOp::AbsOfFirst);
        assert_eq!(a.eval(0).unwrap(), 3.0);
        assert_eq!(a.eval(1).unwrap(), 0.0);
        let s = pointwise(&chi(&[0]), &chi(&[1]), PointwiseOp::Sum);
        assert_eq!(s.support().unwrap(), &MeasurableSet::finite([0, 1]));
        let p = pointwise(&chi(&[0, 1]), &one(), PointwiseOp::Product);
        assert_eq!(p.support().unwrap(), &MeasurableSet::finite([0, 1]));
    }

    #[test]
    fn non_summable_tails_are_errors() {
        let nu = additive_geometric(0.5);
        let u = ScalarFunction::parse("u", "n", None, &SetBindings::new()).unwrap();
        assert!(matches!(
            birkhoff_weak_integral(&u, &nu, &cfg()),
            Err(IntegrationError::NonSummableTail(_))
        ));
    }

    #[test]
    fn slow_tails_are_unresolved() {
        let nu = additive_geometric(0.9);
        let r = birkhoff_weak_integral(&one(), &nu, &cfg()).unwrap();
        assert_eq!(r.status, IntegralStatus::TailUnresolved);
        assert!(r.tail_bound > 1e-8);
    }

    #[test]
    fn declared_supports_are_spot_checked() {
        let sets = SetBindings::new();
        let err = ScalarFunction::parse("u", "1", Some(MeasurableSet::finite([0])), &sets);
        assert!(matches!(
            err,
            Err(FunctionError::OutsideSupport { n: 1, .. })
        ));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let nu = additive_geometric(0.5);
        for c in [
            IntegrationConfig { tol: 0.0, ..cfg() },
            IntegrationConfig { stages: 0, ..cfg() },
            IntegrationConfig {
                samples_per_stage: 0,
                ..cfg()
            },
            IntegrationConfig {
                horizon: 4,
                stages: 8,
                ..cfg()
            },
        ] {
            assert!(matches!(
                birkhoff_weak_integral(&one(), &nu, &c),
                Err(IntegrationError::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn results_are_deterministic() {
        let mx = max_geometric(0.5);
        let a = birkhoff_weak_integral(&chi(&[0, 1, 2]), &mx, &cfg()).unwrap();
        let b = birkhoff_weak_integral(&chi(&[0, 1, 2]), &mx, &cfg()).unwrap();
        assert_eq!(a, b);
    }
}
