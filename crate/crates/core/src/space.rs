//! The countable ground space (the naturals) and its measurable subsets.
//!
//! Every subset of the naturals is measurable here: the working σ-algebra is
//! the full power set. A [`MeasurableSet`] carries a decidable membership rule
//! and a finiteness classification that downstream code uses to decide whether
//! a set can be enumerated exactly or must be approached through prefixes.

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Default truncation index for numeric tail work.
pub const DEFAULT_HORIZON: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("prefix length {requested} exceeds horizon {horizon}")]
    BeyondHorizon { requested: u64, horizon: u64 },
}

/// The ground space `T = ℕ`, together with the horizon that bounds numeric
/// enumeration. The horizon never changes membership semantics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundSpace {
    horizon: u64,
    description: String,
}

impl GroundSpace {
    pub fn new(horizon: u64, description: impl Into<String>) -> Result<Self, SpaceError> {
        if horizon == 0 {
            return Err(SpaceError::ZeroHorizon);
        }
        Ok(GroundSpace {
            horizon,
            description: description.into(),
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Members of `set` below `n`, checking `n` against the horizon.
    pub fn enumerate_prefix(&self, set: &MeasurableSet, n: u64) -> Result<Vec<u64>, SpaceError> {
        if n > self.horizon {
            return Err(SpaceError::BeyondHorizon {
                requested: n,
                horizon: self.horizon,
            });
        }
        Ok(set.enumerate_prefix(n))
    }
}

impl Default for GroundSpace {
    fn default() -> Self {
        GroundSpace {
            horizon: DEFAULT_HORIZON,
            description: "naturals".to_string(),
        }
    }
}

/// Finiteness classification of a predicate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    /// Finite, with every member strictly below `bound`.
    Finite {
        bound: u64,
    },
    Infinite,
    Unknown,
}

/// Membership rule of a predicate set.
#[derive(Clone)]
pub enum Rule {
    Even,
    Odd,
    /// `n >= k`
    AtLeast(u64),
    /// `n < k`
    Below(u64),
    Custom {
        name: String,
        test: Arc<dyn Fn(u64) -> bool + Send + Sync>,
    },
    Not(Box<MeasurableSet>),
    And(Box<MeasurableSet>, Box<MeasurableSet>),
    Or(Box<MeasurableSet>, Box<MeasurableSet>),
}

impl Rule {
    fn holds(&self, n: u64) -> bool {
        match self {
            Rule::Even => n.is_multiple_of(2),
            Rule::Odd => n % 2 == 1,
            Rule::AtLeast(k) => n >= *k,
            Rule::Below(k) => n < *k,
            Rule::Custom { test, .. } => test(n),
            Rule::Not(s) => !s.member(n),
            Rule::And(a, b) => a.member(n) && b.member(n),
            Rule::Or(a, b) => a.member(n) || b.member(n),
        }
    }

    fn describe(&self) -> String {
        match self {
            Rule::Even => "even".into(),
            Rule::Odd => "odd".into(),
            Rule::AtLeast(k) => format!("geq:{k}"),
            Rule::Below(k) => format!("lt:{k}"),
            Rule::Custom { name, .. } => name.clone(),
            Rule::Not(s) => format!("not({})", s.label()),
            Rule::And(a, b) => format!("({} and {})", a.label(), b.label()),
            Rule::Or(a, b) => format!("({} or {})", a.label(), b.label()),
        }
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[derive(Debug, Clone)]
pub enum SetKind {
    /// Explicit sorted, deduplicated members.
    Finite(Vec<u64>),
    /// Everything except the sorted, deduplicated exclusions.
    Cofinite(Vec<u64>),
    Predicate {
        rule: Rule,
        finiteness: Finiteness,
    },
}

/// A subset of the naturals with decidable membership.
#[derive(Debug, Clone)]
pub struct MeasurableSet {
    kind: SetKind,
    label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetOp {
    Union,
    Intersect,
    Difference,
    Complement,
}

fn normalize(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v.dedup();
    v
}

fn list_label(prefix: &str, v: &[u64]) -> String {
    let items: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("{prefix}{{{}}}", items.join(","))
}

impl MeasurableSet {
    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Self {
        let v = normalize(elements.into_iter().collect());
        let label = list_label("", &v);
        MeasurableSet {
            kind: SetKind::Finite(v),
            label,
        }
    }

    pub fn empty() -> Self {
        MeasurableSet::finite(std::iter::empty())
    }

    pub fn singleton(n: u64) -> Self {
        MeasurableSet::finite([n])
    }

    /// The whole ground space.
    pub fn everything() -> Self {
        MeasurableSet {
            kind: SetKind::Cofinite(Vec::new()),
            label: "T".into(),
        }
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = u64>) -> Self {
        let v = normalize(excluded.into_iter().collect());
        let label = if v.is_empty() {
            "T".to_string()
        } else {
            list_label("T\\", &v)
        };
        MeasurableSet {
            kind: SetKind::Cofinite(v),
            label,
        }
    }

    /// `[0, n)`
    pub fn range(n: u64) -> Self {
        MeasurableSet::finite(0..n)
    }

    pub fn even() -> Self {
        Self::predicate(Rule::Even, Finiteness::Infinite)
    }

    pub fn odd() -> Self {
        Self::predicate(Rule::Odd, Finiteness::Infinite)
    }

    pub fn at_least(k: u64) -> Self {
        if k == 0 {
            return MeasurableSet::everything();
        }
        Self::predicate(Rule::AtLeast(k), Finiteness::Infinite)
    }

    pub fn below(k: u64) -> Self {
        Self::predicate(Rule::Below(k), Finiteness::Finite { bound: k })
    }

    /// A set given by an arbitrary membership test. A `Finite` classification
    /// must bound every member.
    pub fn custom(
        name: impl Into<String>,
        finiteness: Finiteness,
        test: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::predicate(
            Rule::Custom {
                name: name.into(),
                test: Arc::new(test),
            },
            finiteness,
        )
    }

    fn predicate(rule: Rule, finiteness: Finiteness) -> Self {
        let label = rule.describe();
        MeasurableSet {
            kind: SetKind::Predicate { rule, finiteness },
            label,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn member(&self, n: u64) -> bool {
        match &self.kind {
            SetKind::Finite(v) => v.binary_search(&n).is_ok(),
            SetKind::Cofinite(v) => v.binary_search(&n).is_err(),
            SetKind::Predicate { rule, finiteness } => match finiteness {
                Finiteness::Finite { bound } if n >= *bound => false,
                _ => rule.holds(n),
            },
        }
    }

    pub fn finiteness(&self) -> Finiteness {
        match &self.kind {
            SetKind::Finite(v) => Finiteness::Finite {
                bound: v.last().map_or(0, |m| m + 1),
            },
            SetKind::Cofinite(_) => Finiteness::Infinite,
            SetKind::Predicate { finiteness, .. } => *finiteness,
        }
    }

    pub fn is_empty_known(&self) -> bool {
        matches!(&self.kind, SetKind::Finite(v) if v.is_empty())
    }

    /// Explicit members when the set is held as an explicit list.
    pub fn as_finite(&self) -> Option<&[u64]> {
        match &self.kind {
            SetKind::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// All members, when the set is known to be finite.
    pub fn elements(&self) -> Option<Vec<u64>> {
        match &self.kind {
            SetKind::Finite(v) => Some(v.clone()),
            _ => match self.finiteness() {
                Finiteness::Finite { bound } => Some(self.enumerate_prefix(bound)),
                _ => None,
            },
        }
    }

    /// Sorted members strictly below `n`.
    pub fn enumerate_prefix(&self, n: u64) -> Vec<u64> {
        match &self.kind {
            SetKind::Finite(v) => v.iter().copied().take_while(|&m| m < n).collect(),
            _ => (0..n).filter(|&m| self.member(m)).collect(),
        }
    }

    /// Least member, searching no further than `limit`.
    pub fn least_below(&self, limit: u64) -> Option<u64> {
        match &self.kind {
            SetKind::Finite(v) => v.first().copied().filter(|&m| m < limit),
            _ => (0..limit).find(|&m| self.member(m)),
        }
    }

    pub fn union(&self, other: &MeasurableSet) -> MeasurableSet {
        use SetKind::*;
        let label = format!("({} ∪ {})", self.label, other.label);
        let set = match (&self.kind, &other.kind) {
            (Finite(a), Finite(b)) => MeasurableSet::finite(a.iter().chain(b).copied()),
            (Cofinite(a), Cofinite(b)) => {
                MeasurableSet::cofinite(a.iter().copied().filter(|x| b.binary_search(x).is_ok()))
            }
            (Finite(f), Cofinite(c)) | (Cofinite(c), Finite(f)) => {
                MeasurableSet::cofinite(c.iter().copied().filter(|x| f.binary_search(x).is_err()))
            }
            _ => {
                let finiteness = match (self.finiteness(), other.finiteness()) {
                    (Finiteness::Finite { bound: a }, Finiteness::Finite { bound: b }) => {
                        Finiteness::Finite { bound: a.max(b) }
                    }
                    (Finiteness::Infinite, _) | (_, Finiteness::Infinite) => Finiteness::Infinite,
                    _ => Finiteness::Unknown,
                };
                Self::predicate(
                    Rule::Or(Box::new(self.clone()), Box::new(other.clone())),
                    finiteness,
                )
            }
        };
        set.with_label(label)
    }

    pub fn intersect(&self, other: &MeasurableSet) -> MeasurableSet {
        use SetKind::*;
        let label = format!("({} ∩ {})", self.label, other.label);
        let set = match (&self.kind, &other.kind) {
            (Finite(a), _) => MeasurableSet::finite(a.iter().copied().filter(|&x| other.member(x))),
            (_, Finite(b)) => MeasurableSet::finite(b.iter().copied().filter(|&x| self.member(x))),
            (Cofinite(a), Cofinite(b)) => MeasurableSet::cofinite(a.iter().chain(b).copied()),
            _ => {
                let finiteness = match (self.finiteness(), other.finiteness()) {
                    (Finiteness::Finite { bound: a }, Finiteness::Finite { bound: b }) => {
                        Finiteness::Finite { bound: a.min(b) }
                    }
                    (Finiteness::Finite { bound }, _) | (_, Finiteness::Finite { bound }) => {
                        Finiteness::Finite { bound }
                    }
                    // removing finitely many points keeps an infinite set infinite
                    (Finiteness::Infinite, _) if matches!(other.kind, Cofinite(_)) => {
                        Finiteness::Infinite
                    }
                    (_, Finiteness::Infinite) if matches!(self.kind, Cofinite(_)) => {
                        Finiteness::Infinite
                    }
                    _ => Finiteness::Unknown,
                };
                Self::predicate(
                    Rule::And(Box::new(self.clone()), Box::new(other.clone())),
                    finiteness,
                )
            }
        };
        set.with_label(label)
    }

    pub fn complement(&self) -> MeasurableSet {
        let label = format!("({})ᶜ", self.label);
        let set = match &self.kind {
            SetKind::Finite(v) => MeasurableSet::cofinite(v.iter().copied()),
            SetKind::Cofinite(v) => MeasurableSet::finite(v.iter().copied()),
            SetKind::Predicate { rule, finiteness } => match (rule, finiteness) {
                (Rule::Even, _) => MeasurableSet::odd(),
                (Rule::Odd, _) => MeasurableSet::even(),
                (Rule::AtLeast(k), _) => MeasurableSet::below(*k),
                (Rule::Below(k), _) => MeasurableSet::at_least(*k),
                (Rule::Not(inner), _) => (**inner).clone(),
                (_, Finiteness::Finite { .. }) => {
                    Self::predicate(Rule::Not(Box::new(self.clone())), Finiteness::Infinite)
                }
                _ => Self::predicate(Rule::Not(Box::new(self.clone())), Finiteness::Unknown),
            },
        };
        set.with_label(label)
    }

    pub fn difference(&self, other: &MeasurableSet) -> MeasurableSet {
        let label = format!("({} \\ {})", self.label, other.label);
        self.intersect(&other.complement()).with_label(label)
    }

    /// Binary set algebra; `Complement` ignores `other`.
    pub fn apply(&self, other: &MeasurableSet, op: SetOp) -> MeasurableSet {
        match op {
            SetOp::Union => self.union(other),
            SetOp::Intersect => self.intersect(other),
            SetOp::Difference => self.difference(other),
            SetOp::Complement => self.complement(),
        }
    }

    /// Pointwise equality over `[0, horizon)`.
    pub fn agrees_below(&self, other: &MeasurableSet, horizon: u64) -> bool {
        (0..horizon).all(|n| self.member(n) == other.member(n))
    }

    /// Whether `self ⊆ other`, decided exactly when `self` is finite and
    /// pointwise over `[0, horizon)` otherwise.
    pub fn subset_of(&self, other: &MeasurableSet, horizon: u64) -> bool {
        match self.elements() {
            Some(v) => v.iter().all(|&n| other.member(n)),
            None => (0..horizon).all(|n| !self.member(n) || other.member(n)),
        }
    }
}

impl fmt::Display for MeasurableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Serializes in the configuration schema: `{"finite":[..]}`,
/// `{"cofinite_excl":[..]}` or `{"predicate":"<rule>"}`.
impl Serialize for MeasurableSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(1))?;
        match &self.kind {
            SetKind::Finite(v) => map.serialize_entry("finite", v)?,
            SetKind::Cofinite(v) => map.serialize_entry("cofinite_excl", v)?,
            SetKind::Predicate { rule, .. } => {
                map.serialize_entry("predicate", &rule.describe())?
            }
        }
        map.end()
    }
}

/// Exact equality for explicit kinds; predicates compare by rule text.
impl PartialEq for MeasurableSet {
    fn eq(&self, other: &Self) -> bool {
        match (&self.kind, &other.kind) {
            (SetKind::Finite(a), SetKind::Finite(b)) => a == b,
            (SetKind::Cofinite(a), SetKind::Cofinite(b)) => a == b,
            (SetKind::Predicate { rule: a, .. }, SetKind::Predicate { rule: b, .. }) => {
                a.describe() == b.describe()
            }
            _ => false,
        }
    }
}
