//! Non-additive set functions on the naturals and audits of their properties.
//!
//! A [`SetFunction`] is built from a nonnegative weight sequence `w(n)` in one
//! of three ways: additively (`ν(A) = Σ_{n∈A} w(n)`), through a distortion of
//! an additive base (`ν(A) = g(μ(A))`), or as a possibility measure
//! (`ν(A) = sup_{n∈A} w(n)`). Infinite sets are evaluated as the limit of the
//! prefixes `A ∩ [0, n)`.
//!
//! The audits never prove a property. `Passed` means no counterexample was
//! found at the configured sample budget.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::integrator::{self, IntegralStatus, IntegrationConfig, PartitionSum, ScalarFunction};
use crate::space::{Finiteness, MeasurableSet, SetKind, DEFAULT_HORIZON};

/// Default stopping threshold for prefix limits on infinite sets.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Threshold below which a measure value counts as zero.
pub const NULL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("set `{set}` has unknown finiteness")]
    UnknownFiniteness { set: String },
    #[error("prefix limit for `{set}` did not settle within the horizon (remainder bound {remainder:e})")]
    TailNotConverged { set: String, remainder: f64 },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid distortion: {0}")]
    InvalidDistortion(String),
    #[error("chain `{0}` is not increasing")]
    ChainNotIncreasing(String),
}

/// Nonnegative weights `w(n)` with a closed-form tail.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSequence {
    /// `w(n) = scale · ratio^n`, `0 ≤ ratio < 1`.
    Geometric { scale: f64, ratio: f64 },
    /// Explicit weights, zero past the end of the list.
    Explicit(Vec<f64>),
}

impl WeightSequence {
    /// `w(n) = (1 - ratio) · ratio^n`, a probability on ℕ.
    pub fn geometric(ratio: f64) -> Result<Self, MeasureError> {
        Self::scaled_geometric(ratio, 1.0 - ratio)
    }

    pub fn scaled_geometric(ratio: f64, scale: f64) -> Result<Self, MeasureError> {
        if !(0.0..1.0).contains(&ratio) {
            return Err(MeasureError::InvalidWeights(format!(
                "geometric ratio {ratio} must lie in [0, 1)"
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(MeasureError::InvalidWeights(format!(
                "geometric scale {scale} must be finite and nonnegative"
            )));
        }
        Ok(WeightSequence::Geometric { scale, ratio })
    }

    pub fn explicit(weights: Vec<f64>) -> Result<Self, MeasureError> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(MeasureError::InvalidWeights(format!(
                "weight {w} must be finite and nonnegative"
            )));
        }
        Ok(WeightSequence::Explicit(weights))
    }

    pub fn weight(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Geometric { scale, ratio } => {
                if n > i32::MAX as u64 {
                    0.0
                } else {
                    scale * ratio.powi(n as i32)
                }
            }
            WeightSequence::Explicit(w) => w.get(n as usize).copied().unwrap_or(0.0),
        }
    }

    /// `Σ_{k ≥ n} w(k)`.
    pub fn tail_sum(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Geometric { ratio, .. } => self.weight(n) / (1.0 - ratio),
            WeightSequence::Explicit(w) => w.iter().skip(n as usize).sum(),
        }
    }

    /// `sup_{k ≥ n} w(k)`.
    pub fn tail_sup(&self, n: u64) -> f64 {
        match self {
            WeightSequence::Geometric { .. } => self.weight(n),
            WeightSequence::Explicit(w) => w.iter().skip(n as usize).copied().fold(0.0, f64::max),
        }
    }

    /// `Σ_{k ≥ n} w(k)^e` for `e > 0`.
    fn powered_tail_sum(&self, n: u64, e: f64) -> f64 {
        match self {
            WeightSequence::Geometric { scale, ratio } => {
                let r = ratio.powf(e);
                scale.powf(e) * r.powf(n as f64) / (1.0 - r)
            }
            WeightSequence::Explicit(w) => w.iter().skip(n as usize).map(|x| x.powf(e)).sum(),
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Geometric { scale, ratio } => {
                if (scale - (1.0 - ratio)).abs() < 1e-15 {
                    write!(f, "geometric:{ratio}")
                } else {
                    write!(f, "geometric:{ratio}:{scale}")
                }
            }
            WeightSequence::Explicit(w) => {
                let items: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                write!(f, "list:{}", items.join(","))
            }
        }
    }
}

/// Accepts `geometric:<ratio>`, `geometric:<ratio>:<scale>` and
/// `list:<w0>,<w1>,...`.
impl FromStr for WeightSequence {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |what: &str| MeasureError::InvalidWeights(format!("{what} in `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("malformed number"));
        if let Some(rest) = s.strip_prefix("geometric:") {
            let parts: Vec<&str> = rest.split(':').collect();
            match parts.as_slice() {
                [r] => WeightSequence::geometric(num(r)?),
                [r, c] => WeightSequence::scaled_geometric(num(r)?, num(c)?),
                _ => Err(bad("expected geometric:<ratio>[:<scale>]")),
            }
        } else if let Some(rest) = s.strip_prefix("list:") {
            let w = rest.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            WeightSequence::explicit(w)
        } else {
            Err(bad("unknown weight family"))
        }
    }
}

/// Nondecreasing `g: [0, ∞) → [0, ∞)` with `g(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distortion {
    /// `g(x) = x^e`, `e > 0`.
    Power(f64),
}

impl Distortion {
    pub fn sqrt() -> Self {
        Distortion::Power(0.5)
    }

    pub fn square() -> Self {
        Distortion::Power(2.0)
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Distortion::Power(e) => x.powf(*e),
        }
    }

    pub fn is_concave(&self) -> bool {
        match self {
            Distortion::Power(e) => *e <= 1.0,
        }
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Power(e) if *e == 0.5 => f.write_str("sqrt"),
            Distortion::Power(e) if *e == 2.0 => f.write_str("square"),
            Distortion::Power(e) => write!(f, "pow:{e}"),
        }
    }
}

impl FromStr for Distortion {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sqrt" => Ok(Distortion::sqrt()),
            "square" => Ok(Distortion::square()),
            _ => {
                let e = s
                    .strip_prefix("pow:")
                    .and_then(|e| e.parse::<f64>().ok())
                    .ok_or_else(|| MeasureError::InvalidDistortion(s.to_string()))?;
                if !(e.is_finite() && e > 0.0) {
                    return Err(MeasureError::InvalidDistortion(s.to_string()));
                }
                Ok(Distortion::Power(e))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetFunctionKind {
    Additive(WeightSequence),
    Distorted { base: WeightSequence, g: Distortion },
    Max(WeightSequence),
}

/// Properties a set function claims; the audits decide whether to trust them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClaimedFlags {
    pub subadditive: bool,
    pub continuous_from_below: bool,
    pub a_integrable: bool,
}

impl ClaimedFlags {
    pub fn all() -> Self {
        ClaimedFlags {
            subadditive: true,
            continuous_from_below: true,
            a_integrable: true,
        }
    }

    /// Membership in the hypothesis class of the inequality theorems.
    pub fn in_hypothesis_class(&self) -> bool {
        self.subadditive && self.continuous_from_below && self.a_integrable
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetFunction {
    kind: SetFunctionKind,
    claimed: ClaimedFlags,
    label: String,
    horizon: u64,
    tail_tol: f64,
}

impl SetFunction {
    pub fn additive(weights: WeightSequence) -> Self {
        let label = format!("additive[{weights}]");
        SetFunction::with_kind(
            SetFunctionKind::Additive(weights),
            ClaimedFlags::all(),
            label,
        )
    }

    pub fn max(weights: WeightSequence) -> Self {
        let label = format!("max[{weights}]");
        let claimed = ClaimedFlags {
            subadditive: true,
            continuous_from_below: true,
            a_integrable: false,
        };
        SetFunction::with_kind(SetFunctionKind::Max(weights), claimed, label)
    }

    pub fn distorted(base: WeightSequence, g: Distortion) -> Self {
        let label = format!("distorted[{g}∘{base}]");
        let claimed = ClaimedFlags {
            subadditive: g.is_concave(),
            continuous_from_below: true,
            a_integrable: false,
        };
        SetFunction::with_kind(SetFunctionKind::Distorted { base, g }, claimed, label)
    }

    fn with_kind(kind: SetFunctionKind, claimed: ClaimedFlags, label: String) -> Self {
        SetFunction {
            kind,
            claimed,
            label,
            horizon: DEFAULT_HORIZON,
            tail_tol: DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_claims(mut self, claimed: ClaimedFlags) -> Self {
        self.claimed = claimed;
        self
    }

    /// Bounds the prefix iteration used on infinite sets.
    pub fn with_limits(mut self, horizon: u64, tail_tol: f64) -> Self {
        self.horizon = horizon.max(1);
        self.tail_tol = tail_tol;
        self
    }

    pub fn kind(&self) -> &SetFunctionKind {
        &self.kind
    }

    pub fn claimed(&self) -> ClaimedFlags {
        self.claimed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn is_additive(&self) -> bool {
        matches!(self.kind, SetFunctionKind::Additive(_))
    }

    /// The additive weight sequence, if this is an additive measure.
    pub fn additive_weights(&self) -> Option<&WeightSequence> {
        match &self.kind {
            SetFunctionKind::Additive(w) => Some(w),
            _ => None,
        }
    }

    /// `ν({n})`.
    pub fn singleton(&self, n: u64) -> f64 {
        match &self.kind {
            SetFunctionKind::Additive(w) | SetFunctionKind::Max(w) => w.weight(n),
            SetFunctionKind::Distorted { base, g } => g.apply(base.weight(n)),
        }
    }

    /// `Σ_{k ≥ n} ν({k})`.
    pub fn singleton_tail_sum(&self, n: u64) -> f64 {
        match &self.kind {
            SetFunctionKind::Additive(w) | SetFunctionKind::Max(w) => w.tail_sum(n),
            SetFunctionKind::Distorted {
                base,
                g: Distortion::Power(e),
            } => base.powered_tail_sum(n, *e),
        }
    }

    /// Exact value on an explicit finite set.
    pub fn evaluate_finite(&self, elements: &[u64]) -> f64 {
        match &self.kind {
            SetFunctionKind::Additive(w) => elements.iter().map(|&n| w.weight(n)).sum(),
            SetFunctionKind::Distorted { base, g } => {
                g.apply(elements.iter().map(|&n| base.weight(n)).sum())
            }
            SetFunctionKind::Max(w) => elements.iter().map(|&n| w.weight(n)).fold(0.0, f64::max),
        }
    }

    pub fn evaluate(&self, set: &MeasurableSet) -> Result<f64, MeasureError> {
        if let Some(v) = set.as_finite() {
            return Ok(self.evaluate_finite(v));
        }
        match set.finiteness() {
            Finiteness::Finite { .. } => {
                let elements = set.elements().expect("finite predicate enumerates");
                Ok(self.evaluate_finite(&elements))
            }
            Finiteness::Unknown => Err(MeasureError::UnknownFiniteness {
                set: set.label().to_string(),
            }),
            Finiteness::Infinite => self.prefix_limit(set),
        }
    }

    /// Evaluator for explicit subsets of `[0, h)` backed by a weight table.
    pub(crate) fn cell_evaluator(&self, h: u64) -> CellEvaluator {
        let (w, combine) = match &self.kind {
            SetFunctionKind::Additive(w) => (w, Combine::Sum),
            SetFunctionKind::Distorted { base, g } => (base, Combine::Distorted(*g)),
            SetFunctionKind::Max(w) => (w, Combine::Max),
        };
        CellEvaluator {
            table: (0..h).map(|n| w.weight(n)).collect(),
            combine,
        }
    }

    /// Limit of `ν(A ∩ [0, n))`, stopped once a bound on every later change
    /// drops below the tail tolerance.
    fn prefix_limit(&self, set: &MeasurableSet) -> Result<f64, MeasureError> {
        let mut base_sum = 0.0;
        let mut running_max: f64 = 0.0;
        let mut remainder = f64::INFINITY;
        for m in 0..self.horizon {
            if set.member(m) {
                match &self.kind {
                    SetFunctionKind::Additive(w) | SetFunctionKind::Distorted { base: w, .. } => {
                        base_sum += w.weight(m)
                    }
                    SetFunctionKind::Max(w) => running_max = running_max.max(w.weight(m)),
                }
            }
            let (value, bound) = match &self.kind {
                SetFunctionKind::Additive(w) => (base_sum, w.tail_sum(m + 1)),
                SetFunctionKind::Distorted { base, g } => {
                    let v = g.apply(base_sum);
                    (v, g.apply(base_sum + base.tail_sum(m + 1)) - v)
                }
                SetFunctionKind::Max(w) => {
                    (running_max, (w.tail_sup(m + 1) - running_max).max(0.0))
                }
            };
            remainder = bound;
            if bound < self.tail_tol {
                return Ok(value);
            }
        }
        Err(MeasureError::TailNotConverged {
            set: set.label().to_string(),
            remainder,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Combine {
    Sum,
    Distorted(Distortion),
    Max,
}

pub(crate) struct CellEvaluator {
    table: Vec<f64>,
    combine: Combine,
}

impl CellEvaluator {
    /// `ν(cell)`; every element must lie below the table's horizon.
    pub(crate) fn eval(&self, cell: &[u64]) -> f64 {
        let weights = cell.iter().map(|&n| self.table[n as usize]);
        match self.combine {
            Combine::Sum => weights.sum(),
            Combine::Distorted(g) => g.apply(weights.sum()),
            Combine::Max => weights.fold(0.0, f64::max),
        }
    }

    pub(crate) fn singleton(&self, n: u64) -> f64 {
        self.eval(&[n])
    }
}

impl fmt::Display for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Named set functions used throughout the tests and fixtures.
pub mod zoo {
    use super::*;

    pub fn additive_geometric(ratio: f64) -> SetFunction {
        SetFunction::additive(WeightSequence::geometric(ratio).expect("valid ratio"))
    }

    pub fn max_geometric(ratio: f64) -> SetFunction {
        SetFunction::max(WeightSequence::geometric(ratio).expect("valid ratio"))
    }

    pub fn distorted_geometric(ratio: f64, g: Distortion) -> SetFunction {
        SetFunction::distorted(WeightSequence::geometric(ratio).expect("valid ratio"), g)
    }

    /// Five additive measures with geometric or finite weight sequences.
    pub fn additive() -> Vec<SetFunction> {
        vec![
            additive_geometric(0.5),
            additive_geometric(0.25),
            additive_geometric(0.6),
            SetFunction::additive(WeightSequence::scaled_geometric(0.4, 3.0).unwrap()),
            SetFunction::additive(
                WeightSequence::explicit(vec![0.1, 0.0, 0.3, 0.25, 0.05, 0.2, 0.1]).unwrap(),
            ),
        ]
    }

    /// Subadditive or not, but none of these is 𝒜-integrable.
    pub fn non_additive() -> Vec<SetFunction> {
        vec![
            max_geometric(0.5),
            distorted_geometric(0.5, Distortion::sqrt()),
            distorted_geometric(0.5, Distortion::square()),
        ]
    }

    pub fn all() -> Vec<SetFunction> {
        let mut v = additive();
        v.extend(non_additive());
        v
    }
}

// --- audits -----------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Subadditivity,
    ContinuityFromBelow,
    AIntegrability,
    /// Pointwise ratio bounds `α ≤ u/v ≤ β`.
    RatioBound,
    /// Strictly positive integrand values on the evaluation window.
    StrictPositivity,
    /// A denominator integral that must be strictly positive.
    PositiveIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditVerdict {
    Passed,
    Failed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Pair {
        a: MeasurableSet,
        b: MeasurableSet,
        nu_a: f64,
        nu_b: f64,
        nu_union: f64,
        gap: f64,
    },
    Chain {
        chain: String,
        union_value: f64,
        limit: f64,
        gap: f64,
    },
    Integral {
        set: MeasurableSet,
        measure_value: f64,
        integral_value: f64,
        status: IntegralStatus,
        oscillation: f64,
        low: Option<PartitionSum>,
        high: Option<PartitionSum>,
        gap: f64,
    },
    Point {
        n: u64,
        value: f64,
        detail: String,
        gap: f64,
    },
}

impl Witness {
    pub fn gap(&self) -> f64 {
        match self {
            Witness::Pair { gap, .. }
            | Witness::Chain { gap, .. }
            | Witness::Integral { gap, .. }
            | Witness::Point { gap, .. } => *gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyAudit {
    pub property: Property,
    pub verdict: AuditVerdict,
    pub witness: Option<Witness>,
    pub samples_used: u64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl PropertyAudit {
    pub fn passed(property: Property, samples_used: u64, tolerance: f64) -> Self {
        PropertyAudit {
            property,
            verdict: AuditVerdict::Passed,
            witness: None,
            samples_used,
            tolerance,
            detail: None,
        }
    }

    /// A failure; the witness gap must reach the tolerance.
    pub fn failed(property: Property, witness: Witness, samples_used: u64, tolerance: f64) -> Self {
        debug_assert!(witness.gap() >= tolerance);
        PropertyAudit {
            property,
            verdict: AuditVerdict::Failed,
            witness: Some(witness),
            samples_used,
            tolerance,
            detail: None,
        }
    }

    pub fn inconclusive(property: Property, detail: impl Into<String>, tolerance: f64) -> Self {
        PropertyAudit {
            property,
            verdict: AuditVerdict::Inconclusive,
            witness: None,
            samples_used: 0,
            tolerance,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn is_failed(&self) -> bool {
        self.verdict == AuditVerdict::Failed
    }
}

/// Deterministic generator of disjoint finite pairs `(A, B)`.
///
/// All pairs of distinct singletons below `exhaustive_below` come first, in
/// lexicographic order, followed by `random_pairs` seeded random pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSampler {
    pub seed: u64,
    pub exhaustive_below: u64,
    pub random_pairs: usize,
    pub max_element: u64,
    pub max_size: usize,
}

impl Default for PairSampler {
    fn default() -> Self {
        PairSampler {
            seed: 42,
            exhaustive_below: 6,
            random_pairs: 64,
            max_element: 16,
            max_size: 4,
        }
    }
}

impl PairSampler {
    pub fn pairs(&self) -> Vec<(MeasurableSet, MeasurableSet)> {
        let mut out = Vec::new();
        for i in 0..self.exhaustive_below {
            for j in i + 1..self.exhaustive_below {
                out.push((MeasurableSet::singleton(i), MeasurableSet::singleton(j)));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pool: Vec<u64> = (0..self.max_element.max(2)).collect();
        let max_size = self.max_size.max(1);
        for _ in 0..self.random_pairs {
            pool.shuffle(&mut rng);
            let half = pool.len() / 2;
            let a = rng.gen_range(1..=max_size.min(half));
            let b = rng.gen_range(1..=max_size.min(pool.len() - half));
            out.push((
                MeasurableSet::finite(pool[..a].iter().copied()),
                MeasurableSet::finite(pool[half..half + b].iter().copied()),
            ));
        }
        out
    }
}

/// Samples disjoint pairs and looks for `ν(A ∪ B) > ν(A) + ν(B) + tol`.
/// Stops at the first counterexample.
pub fn subadditivity_audit(nu: &SetFunction, sampler: &PairSampler, tol: f64) -> PropertyAudit {
    let pairs = sampler.pairs();
    for (i, (a, b)) in pairs.iter().enumerate() {
        let (va, vb) = (
            nu.evaluate_finite(a.as_finite().unwrap()),
            nu.evaluate_finite(b.as_finite().unwrap()),
        );
        let vu = nu.evaluate_finite(a.union(b).as_finite().unwrap());
        let gap = vu - va - vb;
        if gap > tol {
            let witness = Witness::Pair {
                a: a.clone(),
                b: b.clone(),
                nu_a: va,
                nu_b: vb,
                nu_union: vu,
                gap,
            };
            return PropertyAudit::failed(Property::Subadditivity, witness, i as u64 + 1, tol);
        }
    }
    PropertyAudit::passed(Property::Subadditivity, pairs.len() as u64, tol)
}

/// An increasing chain `B_1 ⊂ B_2 ⊂ …` of finite sets with its declared union.
#[derive(Debug, Clone)]
pub struct Chain {
    pub label: String,
    pub links: Vec<MeasurableSet>,
    pub union: MeasurableSet,
}

impl Chain {
    pub fn new(
        label: impl Into<String>,
        links: Vec<MeasurableSet>,
        union: MeasurableSet,
    ) -> Result<Self, MeasureError> {
        let label = label.into();
        let finite_links = links.iter().all(|l| l.as_finite().is_some());
        let increasing = links.windows(2).all(|w| w[0].subset_of(&w[1], 0));
        if links.is_empty() || !finite_links || !increasing {
            return Err(MeasureError::ChainNotIncreasing(label));
        }
        Ok(Chain {
            label,
            links,
            union,
        })
    }

    /// `target ∩ [0, k)` for `k = 1..=length`.
    pub fn prefixes(target: &MeasurableSet, length: u64) -> Self {
        let links = (1..=length.max(1))
            .map(|k| MeasurableSet::finite(target.enumerate_prefix(k)))
            .collect();
        Chain {
            label: format!("prefixes of {}", target.label()),
            links,
            union: target.clone(),
        }
    }

    /// The standard chains: prefixes of `T`, of the evens and of `T \ {0}`.
    pub fn standard(length: u64) -> Vec<Chain> {
        vec![
            Chain::prefixes(&MeasurableSet::everything(), length),
            Chain::prefixes(&MeasurableSet::even(), length),
            Chain::prefixes(&MeasurableSet::cofinite([0]), length),
        ]
    }
}

/// Compares `ν(⋃ B_n)` with the last iterate of each chain.
pub fn continuity_below_audit(
    nu: &SetFunction,
    chains: &[Chain],
    tol: f64,
) -> Result<PropertyAudit, MeasureError> {
    for (i, chain) in chains.iter().enumerate() {
        let union_value = nu.evaluate(&chain.union)?;
        let last = chain.links.last().expect("chains are nonempty");
        let limit = nu.evaluate(last)?;
        let gap = (union_value - limit).abs();
        if gap > tol {
            let witness = Witness::Chain {
                chain: chain.label.clone(),
                union_value,
                limit,
                gap,
            };
            return Ok(PropertyAudit::failed(
                Property::ContinuityFromBelow,
                witness,
                i as u64 + 1,
                tol,
            ));
        }
    }
    Ok(PropertyAudit::passed(
        Property::ContinuityFromBelow,
        chains.len() as u64,
        tol,
    ))
}

/// Integrates `χ_B` and compares the result with `ν(B)`.
pub fn a_integrability_audit(
    nu: &SetFunction,
    set: &MeasurableSet,
    refinement_samples: usize,
    tol: f64,
    config: &IntegrationConfig,
) -> Result<PropertyAudit, integrator::IntegrationError> {
    if !matches!(set.kind(), SetKind::Finite(_) | SetKind::Cofinite(_)) {
        return Err(integrator::IntegrationError::InvalidConfig(format!(
            "𝒜-integrability probe set `{set}` must be finite or cofinite"
        )));
    }
    let cfg = IntegrationConfig {
        samples_per_stage: refinement_samples,
        ..config.clone()
    };
    let chi = ScalarFunction::indicator(set.label(), set.clone());
    let result = integrator::birkhoff_weak_integral(&chi, nu, &cfg)?;
    let measure_value = nu.evaluate(set)?;
    let mismatch = (result.value - measure_value).abs();
    let samples = result.partitions_examined;
    let make_witness = |gap: f64| Witness::Integral {
        set: set.clone(),
        measure_value,
        integral_value: result.value,
        status: result.status,
        oscillation: result.oscillation,
        low: result.extremes.as_ref().map(|e| e.low.clone()),
        high: result.extremes.as_ref().map(|e| e.high.clone()),
        gap,
    };
    let gap = result.oscillation.max(mismatch);
    match result.status {
        IntegralStatus::Converged if mismatch <= tol => Ok(PropertyAudit::passed(
            Property::AIntegrability,
            samples,
            tol,
        )),
        _ if gap > tol => Ok(PropertyAudit::failed(
            Property::AIntegrability,
            make_witness(gap),
            samples,
            tol,
        )),
        _ => Ok(PropertyAudit {
            property: Property::AIntegrability,
            verdict: AuditVerdict::Inconclusive,
            witness: Some(make_witness(gap)),
            samples_used: samples,
            tolerance: tol,
            detail: Some(format!("integral status {:?}", result.status)),
        }),
    }
}

/// Whether `u = v` outside a ν-null set.
///
/// Disagreements below `probe_horizon` are found pointwise. Beyond it, the
/// two functions must either be provably equal (interval enclosure of `u - v`
/// is `{0}`) or carry declared supports, whose union then bounds the
/// disagreement set.
pub fn nu_ae_equal(
    u: &ScalarFunction,
    v: &ScalarFunction,
    nu: &SetFunction,
    probe_horizon: u64,
) -> Result<bool, MeasureError> {
    let mut disagree = Vec::new();
    for n in 0..probe_horizon {
        let (a, b) = (u.eval(n), v.eval(n));
        if a != b {
            disagree.push(n);
        }
    }
    let head = MeasurableSet::finite(disagree);
    let diff = u
        .expr()
        .clone()
        .add(v.expr().clone().mul(crate::expr::Expr::Num(-1.0)));
    let tail_equal = diff
        .range_from(probe_horizon)
        .is_some_and(|r| r.lo == 0.0 && r.hi == 0.0);
    let d = if tail_equal {
        head
    } else {
        match (u.support(), v.support()) {
            (Some(su), Some(sv)) => {
                let beyond = su
                    .union(sv)
                    .intersect(&MeasurableSet::at_least(probe_horizon));
                head.union(&beyond)
            }
            _ => {
                return Err(MeasureError::UnknownFiniteness {
                    set: format!("disagreement set of {} and {}", u.label(), v.label()),
                })
            }
        }
    };
    Ok(nu.evaluate(&d)? <= NULL_TOLERANCE)
}
