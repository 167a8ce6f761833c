//! Countable partitions of the naturals.
//!
//! A [`Partition`] is a finite list of explicit head cells followed by a
//! lazily generated tail: the naturals not covered by the head, either each in
//! its own cell or grouped into consecutive blocks with a cyclic length
//! pattern. Cells are enumerated head first, then tail cells by increasing
//! least element. That order is what partial tagged sums are taken over.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::space::{MeasurableSet, SetKind};

/// Pointwise checks on non-explicit cells look this far.
pub const VALIDATION_HORIZON: u64 = 1024;

/// Upper bound on the naturals scanned while generating tail cells.
const SCAN_CAP: u64 = 1 << 22;

/// Largest combined block period accepted by [`common_refinement`].
const MAX_MERGED_PERIOD: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("cell {index} is empty")]
    EmptyCell { index: usize },
    #[error("cells {first} and {second} overlap at {point}")]
    Overlap {
        first: usize,
        second: usize,
        point: u64,
    },
    #[error("block pattern must be nonempty with positive lengths")]
    InvalidPattern,
    #[error("bad split: {0}")]
    BadSplit(String),
    #[error("incompatible tails: {0}")]
    IncompatibleTails(String),
    #[error("tag {tag} is not in cell {cell}")]
    BadTag { cell: usize, tag: u64 },
    #[error("expected {expected} head tags, got {got}")]
    TagCount { expected: usize, got: usize },
}

/// How the naturals left uncovered by the head are grouped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailRule {
    Singletons,
    /// Consecutive blocks whose lengths cycle through the pattern.
    Blocks(Vec<u64>),
}

impl TailRule {
    pub fn blocks(pattern: Vec<u64>) -> Result<Self, PartitionError> {
        if pattern.is_empty() || pattern.contains(&0) {
            return Err(PartitionError::InvalidPattern);
        }
        Ok(TailRule::Blocks(pattern))
    }

    fn block_len(&self, j: usize) -> u64 {
        match self {
            TailRule::Singletons => 1,
            TailRule::Blocks(p) => p[j % p.len()],
        }
    }

    fn period(&self) -> u64 {
        match self {
            TailRule::Singletons => 1,
            TailRule::Blocks(p) => p.iter().sum(),
        }
    }

    fn rotated(&self, by: usize) -> TailRule {
        match self {
            TailRule::Singletons => TailRule::Singletons,
            TailRule::Blocks(p) => {
                let mut q = p.clone();
                q.rotate_left(by % p.len());
                TailRule::Blocks(q)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Partition {
    head: Vec<MeasurableSet>,
    tail: TailRule,
    label: String,
}

fn has_member(set: &MeasurableSet) -> bool {
    match set.kind() {
        SetKind::Finite(v) => !v.is_empty(),
        SetKind::Cofinite(_) => true,
        SetKind::Predicate { .. } => set.least_below(VALIDATION_HORIZON).is_some(),
    }
}

impl Partition {
    pub fn new(
        head: Vec<MeasurableSet>,
        tail: TailRule,
        label: impl Into<String>,
    ) -> Result<Self, PartitionError> {
        if let TailRule::Blocks(p) = &tail {
            if p.is_empty() || p.contains(&0) {
                return Err(PartitionError::InvalidPattern);
            }
        }
        for (index, cell) in head.iter().enumerate() {
            if !has_member(cell) {
                return Err(PartitionError::EmptyCell { index });
            }
        }
        // explicit cells: one pass over all members
        let mut owner: BTreeMap<u64, usize> = BTreeMap::new();
        for (i, cell) in head.iter().enumerate() {
            if let Some(v) = cell.as_finite() {
                for &m in v {
                    if let Some(&j) = owner.get(&m) {
                        return Err(PartitionError::Overlap {
                            first: j,
                            second: i,
                            point: m,
                        });
                    }
                    owner.insert(m, i);
                }
            }
        }
        // everything else pointwise
        let implicit: Vec<usize> = (0..head.len())
            .filter(|&i| head[i].as_finite().is_none())
            .collect();
        if !implicit.is_empty() {
            for n in 0..VALIDATION_HORIZON {
                let mut first = owner.get(&n).copied();
                for &i in &implicit {
                    if head[i].member(n) {
                        if let Some(j) = first {
                            return Err(PartitionError::Overlap {
                                first: j.min(i),
                                second: j.max(i),
                                point: n,
                            });
                        }
                        first = Some(i);
                    }
                }
            }
        }
        Ok(Partition {
            head,
            tail,
            label: label.into(),
        })
    }

    /// Every natural in its own cell.
    pub fn singletons() -> Self {
        Partition {
            head: Vec::new(),
            tail: TailRule::Singletons,
            label: "singletons".into(),
        }
    }

    /// Explicit finite head cells followed by singletons.
    pub fn from_lists(cells: &[&[u64]]) -> Result<Self, PartitionError> {
        let head = cells
            .iter()
            .map(|c| MeasurableSet::finite(c.iter().copied()))
            .collect();
        Partition::new(head, TailRule::Singletons, "")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn head(&self) -> &[MeasurableSet] {
        &self.head
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn covered(&self, n: u64) -> bool {
        self.head.iter().any(|c| c.member(n))
    }

    /// Exclusive bound on tail points when the head leaves only finitely
    /// many naturals uncovered.
    fn tail_limit(&self) -> u64 {
        let mut union = MeasurableSet::empty();
        for c in &self.head {
            union = union.union(c);
        }
        match union.kind() {
            SetKind::Cofinite(excl) => excl.last().map_or(0, |m| m + 1),
            _ => SCAN_CAP,
        }
    }

    /// The uncovered naturals in increasing order.
    pub fn tail_points(&self) -> impl Iterator<Item = u64> + '_ {
        let limit = self.tail_limit();
        (0..limit).filter(move |&n| !self.covered(n))
    }

    /// Tail cells in canonical order.
    pub fn tail_cells(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let mut points = self.tail_points().peekable();
        let mut j = 0usize;
        std::iter::from_fn(move || {
            points.peek()?;
            let len = self.tail.block_len(j) as usize;
            j += 1;
            Some(points.by_ref().take(len).collect())
        })
    }

    /// All cells in canonical order.
    pub fn cells(&self) -> impl Iterator<Item = MeasurableSet> + '_ {
        self.head
            .iter()
            .cloned()
            .chain(self.tail_cells().map(MeasurableSet::finite))
    }

    /// The `k`-th cell in canonical order, or `None` past the end of a
    /// finite family.
    pub fn cell_at(&self, k: usize) -> Option<MeasurableSet> {
        if k < self.head.len() {
            return Some(self.head[k].clone());
        }
        self.tail_cells()
            .nth(k - self.head.len())
            .map(MeasurableSet::finite)
    }

    /// Canonical cell index of every `n < h`.
    pub fn index_map(&self, h: u64) -> Vec<usize> {
        let mut out = Vec::with_capacity(h as usize);
        let mut block = 0usize;
        let mut used = 0u64;
        for n in 0..h {
            if let Some(i) = self.head.iter().position(|c| c.member(n)) {
                out.push(i);
                continue;
            }
            if used == self.tail.block_len(block) {
                block += 1;
                used = 0;
            }
            used += 1;
            out.push(self.head.len() + block);
        }
        out
    }

    /// Tail block starts, in increasing order, up to `limit` (exclusive).
    fn block_starts(&self, limit: u64) -> Vec<u64> {
        let mut starts = Vec::new();
        let mut block = 0usize;
        let mut used = 0u64;
        for n in 0..limit {
            if self.covered(n) {
                continue;
            }
            if starts.is_empty() || used == self.tail.block_len(block) {
                if !starts.is_empty() {
                    block += 1;
                }
                used = 0;
                starts.push(n);
            }
            used += 1;
        }
        starts
    }

    /// Largest explicit head element plus one; `None` if some head cell is
    /// not an explicit finite list.
    fn head_extent(&self) -> Option<u64> {
        let mut extent = 0;
        for c in &self.head {
            let v = c.as_finite()?;
            extent = extent.max(v.last().map_or(0, |m| m + 1));
        }
        Some(extent)
    }

    pub fn is_valid_below(&self, h: u64) -> bool {
        // cells are disjoint by construction; coverage is what can go wrong
        let idx = self.index_map(h);
        idx.len() as u64 == h
    }
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.tail == other.tail
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.head.iter().map(|c| c.label().to_string()).collect();
        let tail = match &self.tail {
            TailRule::Singletons => "singletons".to_string(),
            TailRule::Blocks(p) => format!("blocks{p:?}"),
        };
        write!(f, "[{}; {tail}]", cells.join(", "))
    }
}

#[derive(Serialize)]
#[serde(untagged)]
enum CellRepr<'a> {
    List(&'a [u64]),
    Set(&'a MeasurableSet),
}

/// `{"head": [[0,1],[2]], "tail": "singletons" | {"blocks": [..]}}`
impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let head: Vec<CellRepr> = self
            .head
            .iter()
            .map(|c| match c.as_finite() {
                Some(v) => CellRepr::List(v),
                None => CellRepr::Set(c),
            })
            .collect();
        let mut s = serializer.serialize_struct("Partition", 2)?;
        s.serialize_field("head", &head)?;
        match &self.tail {
            TailRule::Singletons => s.serialize_field("tail", "singletons")?,
            TailRule::Blocks(p) => {
                let mut m = BTreeMap::new();
                m.insert("blocks", p);
                s.serialize_field("tail", &m)?
            }
        }
        s.end()
    }
}

/// A partition with one tag per cell. Tail cells are tagged with their least
/// element.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPartition {
    partition: Partition,
    head_tags: Vec<u64>,
}

impl TaggedPartition {
    pub fn new(partition: Partition, head_tags: Vec<u64>) -> Result<Self, PartitionError> {
        if head_tags.len() != partition.head.len() {
            return Err(PartitionError::TagCount {
                expected: partition.head.len(),
                got: head_tags.len(),
            });
        }
        for (cell, (set, &tag)) in partition.head.iter().zip(&head_tags).enumerate() {
            if !set.member(tag) {
                return Err(PartitionError::BadTag { cell, tag });
            }
        }
        Ok(TaggedPartition {
            partition,
            head_tags,
        })
    }

    /// Least element of every cell.
    pub fn least(partition: Partition) -> Self {
        let head_tags = partition
            .head
            .iter()
            .map(|c| c.least_below(SCAN_CAP).expect("cells are nonempty"))
            .collect();
        TaggedPartition {
            partition,
            head_tags,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn head_tags(&self) -> &[u64] {
        &self.head_tags
    }

    /// `(cell, tag)` pairs in canonical order.
    pub fn tagged_cells(&self) -> impl Iterator<Item = (MeasurableSet, u64)> + '_ {
        self.partition
            .head
            .iter()
            .cloned()
            .zip(self.head_tags.iter().copied())
            .chain(self.partition.tail_cells().map(|c| {
                let t = c[0];
                (MeasurableSet::finite(c), t)
            }))
    }

    pub fn tag_at(&self, k: usize) -> Option<u64> {
        if k < self.head_tags.len() {
            return Some(self.head_tags[k]);
        }
        self.partition
            .tail_cells()
            .nth(k - self.head_tags.len())
            .map(|c| c[0])
    }

    /// The same tagged cells with the head enumerated in a random order.
    pub fn shuffled_head(&self, rng: &mut impl Rng) -> TaggedPartition {
        let mut order: Vec<usize> = (0..self.head_tags.len()).collect();
        order.shuffle(rng);
        TaggedPartition {
            partition: Partition {
                head: order
                    .iter()
                    .map(|&i| self.partition.head[i].clone())
                    .collect(),
                tail: self.partition.tail.clone(),
                label: self.partition.label.clone(),
            },
            head_tags: order.iter().map(|&i| self.head_tags[i]).collect(),
        }
    }
}

/// Whether every cell of `fine` meeting `[0, h)` lies inside one cell of
/// `coarse`, judged pointwise below `h`.
pub fn is_finer(fine: &Partition, coarse: &Partition, h: u64) -> bool {
    let f = fine.index_map(h);
    let c = coarse.index_map(h);
    let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
    for (fi, ci) in f.into_iter().zip(c) {
        match seen.insert(fi, ci) {
            Some(prev) if prev != ci => return false,
            _ => {}
        }
    }
    // cells of `fine` that straddle h must also stay inside one coarse cell
    // on their explicit part
    for cell in &fine.head {
        if let Some(v) = cell.as_finite() {
            if v.first().is_some_and(|&m| m < h) && v.last().is_some_and(|&m| m >= h) {
                let owner = |n: u64| coarse.index_map(n + 1)[n as usize];
                let first = owner(v[0]);
                if v.iter().any(|&m| owner(m) != first) {
                    return false;
                }
            }
        }
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The partition into all nonvoid intersections `B_n ∩ C_m`.
///
/// Head cells must be explicit finite lists. The result's head covers an
/// initial segment `[0, b)` in order of least element; beyond `b` the tails
/// of both inputs are merged in closed form.
pub fn common_refinement(p: &Partition, q: &Partition) -> Result<Partition, PartitionError> {
    let extent = match (p.head_extent(), q.head_extent()) {
        (Some(a), Some(b)) => a.max(b),
        _ => {
            return Err(PartitionError::IncompatibleTails(
                "head cells must be explicit finite sets".into(),
            ))
        }
    };
    let (start, tail) = match (&p.tail, &q.tail) {
        (TailRule::Singletons, _) | (_, TailRule::Singletons) => (extent, TailRule::Singletons),
        (TailRule::Blocks(_), TailRule::Blocks(_)) => {
            let (pp, qp) = (p.tail.period(), q.tail.period());
            let merged = pp / gcd(pp, qp) * qp;
            if merged > MAX_MERGED_PERIOD {
                return Err(PartitionError::IncompatibleTails(format!(
                    "merged block period {merged} is too long"
                )));
            }
            let limit = extent + 2 * merged + pp + qp;
            let ps = p.block_starts(limit + merged + 1);
            let qs: BTreeSet<u64> = q.block_starts(limit + merged + 1).into_iter().collect();
            let start = ps
                .iter()
                .copied()
                .find(|&b| b >= extent && qs.contains(&b))
                .ok_or_else(|| {
                    PartitionError::IncompatibleTails("block boundaries never align".into())
                })?;
            let bounds: BTreeSet<u64> = ps
                .iter()
                .copied()
                .chain(qs.iter().copied())
                .filter(|&b| b >= start && b <= start + merged)
                .collect();
            let bounds: Vec<u64> = bounds.into_iter().collect();
            let pattern: Vec<u64> = bounds.windows(2).map(|w| w[1] - w[0]).collect();
            (start, TailRule::blocks(pattern)?)
        }
    };
    let pi = p.index_map(start);
    let qi = q.index_map(start);
    let mut groups: BTreeMap<(usize, usize), Vec<u64>> = BTreeMap::new();
    let mut order = Vec::new();
    for n in 0..start {
        let key = (pi[n as usize], qi[n as usize]);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(n);
    }
    let head = order
        .into_iter()
        .map(|k| MeasurableSet::finite(groups.remove(&k).unwrap()))
        .collect();
    Partition::new(head, tail, format!("({} ∧ {})", p.label, q.label))
}

/// Replaces cell `k` by the two parts of `split`. Splitting a tail cell
/// first moves every tail cell up to `k` into the head.
pub fn refine_cell(
    p: &Partition,
    k: usize,
    split: (MeasurableSet, MeasurableSet),
) -> Result<Partition, PartitionError> {
    let cell = p
        .cell_at(k)
        .ok_or_else(|| PartitionError::BadSplit(format!("partition has no cell {k}")))?;
    let (a, b) = split;
    if !has_member(&a) || !has_member(&b) {
        return Err(PartitionError::BadSplit("parts must be nonvoid".into()));
    }
    let exact = a.as_finite().is_some() && b.as_finite().is_some() && cell.as_finite().is_some();
    let overlap = if exact {
        !a.intersect(&b).is_empty_known()
    } else {
        (0..VALIDATION_HORIZON).any(|n| a.member(n) && b.member(n))
    };
    if overlap {
        return Err(PartitionError::BadSplit(format!("{a} and {b} overlap")));
    }
    let covers = if exact {
        a.union(&b) == cell
    } else {
        a.union(&b).agrees_below(&cell, VALIDATION_HORIZON)
    };
    if !covers {
        return Err(PartitionError::BadSplit(format!(
            "{a} and {b} do not partition {cell}"
        )));
    }
    let (mut head, tail) = if k < p.head.len() {
        let mut head = p.head.clone();
        head.remove(k);
        (head, p.tail.clone())
    } else {
        let j = k - p.head.len();
        let mut head = p.head.clone();
        head.extend(p.tail_cells().take(j).map(MeasurableSet::finite));
        (head, p.tail.rotated(j + 1))
    };
    let at = k.min(head.len());
    head.insert(at, b);
    head.insert(at, a);
    Partition::new(head, tail, format!("{} split at {k}", p.label))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TagStrategy {
    Least,
    Greatest,
    Random,
}

/// Tag strategies in the rotation used by the samplers.
pub const STRATEGIES: [TagStrategy; 3] = [
    TagStrategy::Least,
    TagStrategy::Greatest,
    TagStrategy::Random,
];

fn pick_tag(cell: &MeasurableSet, strategy: TagStrategy, horizon: u64, rng: &mut impl Rng) -> u64 {
    match cell.as_finite() {
        Some(v) => list_tag(v, strategy, horizon, rng),
        None => {
            let least = cell.least_below(SCAN_CAP).expect("cells are nonempty");
            let within = cell.enumerate_prefix(horizon.max(least + 1));
            choose_tag(&within, least, strategy, rng)
        }
    }
}

fn choose_tag(within: &[u64], least: u64, strategy: TagStrategy, rng: &mut impl Rng) -> u64 {
    match strategy {
        TagStrategy::Least => least,
        TagStrategy::Greatest => within.last().copied().unwrap_or(least),
        TagStrategy::Random => within.choose(rng).copied().unwrap_or(least),
    }
}

/// Tag for an explicit sorted, nonempty cell.
pub(crate) fn list_tag(v: &[u64], strategy: TagStrategy, horizon: u64, rng: &mut impl Rng) -> u64 {
    let least = v[0];
    let end = v.partition_point(|&m| m < horizon.max(least + 1));
    choose_tag(&v[..end], least, strategy, rng)
}

/// Randomly splits some of the explicit cells, keeping their order.
pub(crate) fn split_cells(cells: &[Vec<u64>], rng: &mut impl Rng) -> Vec<Vec<u64>> {
    let mut out = Vec::with_capacity(cells.len());
    for v in cells {
        if v.len() >= 2 && rng.gen_bool(0.5) {
            out.extend(split_list(v, rng));
        } else {
            out.push(v.clone());
        }
    }
    out
}

fn split_list(v: &[u64], rng: &mut impl Rng) -> Vec<Vec<u64>> {
    let k = rng.gen_range(2..=v.len().min(4));
    let mut groups = vec![Vec::new(); k];
    for &m in v {
        groups[rng.gen_range(0..k)].push(m);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// `count` seeded refinements of `p`, each tagged by one of the least,
/// greatest-below-`horizon` or random-member strategies in rotation.
pub fn sample_refinements(
    p: &Partition,
    count: usize,
    seed: u64,
    horizon: u64,
) -> Vec<TaggedPartition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let mut head = Vec::with_capacity(p.head.len());
            for cell in &p.head {
                match cell.as_finite() {
                    Some(v) if v.len() >= 2 && rng.gen_bool(0.5) => {
                        head.extend(
                            split_list(v, &mut rng)
                                .into_iter()
                                .map(MeasurableSet::finite),
                        );
                    }
                    None if rng.gen_bool(0.5) => {
                        let members = cell.enumerate_prefix(horizon);
                        let carved: Vec<u64> = members
                            .iter()
                            .copied()
                            .filter(|_| rng.gen_bool(0.5))
                            .collect();
                        if carved.is_empty() {
                            head.push(cell.clone());
                        } else {
                            let part = MeasurableSet::finite(carved);
                            let rest = cell.difference(&part);
                            head.push(part);
                            head.push(rest);
                        }
                    }
                    _ => head.push(cell.clone()),
                }
            }
            let mut tail = p.tail.clone();
            if matches!(p.tail, TailRule::Blocks(_)) && rng.gen_bool(0.5) {
                let blocks: Vec<Vec<u64>> = p.tail_cells().take_while(|c| c[0] < horizon).collect();
                let taken = blocks.len();
                for b in blocks {
                    if b.len() >= 2 && rng.gen_bool(0.5) {
                        head.extend(
                            split_list(&b, &mut rng)
                                .into_iter()
                                .map(MeasurableSet::finite),
                        );
                    } else {
                        head.push(MeasurableSet::finite(b));
                    }
                }
                tail = p.tail.rotated(taken);
            }
            let strategy = STRATEGIES[i % STRATEGIES.len()];
            let tags = head
                .iter()
                .map(|c| pick_tag(c, strategy, horizon, &mut rng))
                .collect();
            let partition = Partition {
                head,
                tail,
                label: format!("{} refinement {i}", p.label),
            };
            TaggedPartition {
                partition,
                head_tags: tags,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fin(v: &[u64]) -> MeasurableSet {
        MeasurableSet::finite(v.iter().copied())
    }

    #[test]
    fn cell_at_examples() {
        let p = Partition::from_lists(&[&[0, 1]]).unwrap();
        assert_eq!(p.cell_at(0).unwrap(), fin(&[0, 1]));
        assert_eq!(p.cell_at(1).unwrap(), fin(&[2]));
        let b = Partition::new(vec![], TailRule::blocks(vec![2]).unwrap(), "pairs").unwrap();
        assert_eq!(b.cell_at(1).unwrap(), fin(&[2, 3]));
        let odd_tail =
            Partition::new(vec![MeasurableSet::even()], TailRule::Singletons, "").unwrap();
        assert_eq!(odd_tail.cell_at(3).unwrap(), fin(&[5]));
        let cofinite_head = Partition::new(
            vec![MeasurableSet::cofinite([1, 4])],
            TailRule::Singletons,
            "",
        )
        .unwrap();
        assert_eq!(cofinite_head.cell_at(2).unwrap(), fin(&[4]));
        assert!(cofinite_head.cell_at(3).is_none());
    }

    #[test]
    fn constructor_rejects_bad_families() {
        assert_eq!(
            Partition::from_lists(&[&[0, 1], &[1]]).unwrap_err(),
            PartitionError::Overlap {
                first: 0,
                second: 1,
                point: 1
            }
        );
        assert_eq!(
            Partition::from_lists(&[&[]]).unwrap_err(),
            PartitionError::EmptyCell { index: 0 }
        );
        assert!(Partition::new(
            vec![MeasurableSet::even(), fin(&[4])],
            TailRule::Singletons,
            ""
        )
        .is_err());
        assert_eq!(
            TailRule::blocks(vec![2, 0]),
            Err(PartitionError::InvalidPattern)
        );
    }

    #[test]
    fn finer_examples() {
        let s = Partition::singletons();
        let coarse = Partition::from_lists(&[&[0, 1]]).unwrap();
        let fine = Partition::from_lists(&[&[0], &[1]]).unwrap();
        let pairs = Partition::new(vec![], TailRule::blocks(vec![2]).unwrap(), "").unwrap();
        for p in [&s, &coarse, &fine, &pairs] {
            assert!(is_finer(&s, p, 32));
            assert!(is_finer(p, p, 32));
        }
        assert!(!is_finer(&coarse, &fine, 32));
        assert!(is_finer(&fine, &coarse, 32));
        assert!(is_finer(&coarse, &pairs, 32));
        assert!(!is_finer(&pairs, &coarse, 32));
        // a head cell reaching past the horizon is still checked on its members
        let wide = Partition::from_lists(&[&[0, 40]]).unwrap();
        assert!(!is_finer(&wide, &pairs, 8));
    }

    #[test]
    fn common_refinement_examples() {
        let p = Partition::from_lists(&[&[0, 1], &[2, 3]]).unwrap();
        let q = Partition::from_lists(&[&[0], &[1, 2, 3]]).unwrap();
        let r = common_refinement(&p, &q).unwrap();
        assert_eq!(r.head(), &[fin(&[0]), fin(&[1]), fin(&[2, 3])]);
        assert_eq!(r.tail(), &TailRule::Singletons);

        let same = common_refinement(&p, &p).unwrap();
        assert_eq!(same.head(), p.head());

        let s = common_refinement(&p, &Partition::singletons()).unwrap();
        assert!(is_finer(&s, &Partition::singletons(), 32));
        assert!(is_finer(&Partition::singletons(), &s, 32));
    }

    #[test]
    fn common_refinement_of_block_tails() {
        let twos = Partition::new(vec![], TailRule::blocks(vec![2]).unwrap(), "").unwrap();
        let threes = Partition::new(vec![], TailRule::blocks(vec![3]).unwrap(), "").unwrap();
        let r = common_refinement(&twos, &threes).unwrap();
        assert!(is_finer(&r, &twos, 200));
        assert!(is_finer(&r, &threes, 200));
        // cells of the meet below 12: {0,1},{2},{3},{4,5},{6,7},{8},{9},{10,11}
        let expected = [0, 0, 1, 2, 3, 3, 4, 4, 5, 6, 7, 7];
        let idx = r.index_map(12);
        assert_eq!(idx, expected);

        let shifted =
            Partition::new(vec![fin(&[0])], TailRule::blocks(vec![2]).unwrap(), "").unwrap();
        assert!(matches!(
            common_refinement(&twos, &shifted),
            Err(PartitionError::IncompatibleTails(_))
        ));
        let evens = Partition::new(vec![MeasurableSet::even()], TailRule::Singletons, "").unwrap();
        assert!(common_refinement(&evens, &twos).is_err());
    }

    #[test]
    fn refine_cell_examples() {
        let p = Partition::from_lists(&[&[0, 1]]).unwrap();
        let r = refine_cell(&p, 0, (fin(&[0]), fin(&[1]))).unwrap();
        assert_eq!(r.head(), &[fin(&[0]), fin(&[1])]);
        assert!(is_finer(&r, &p, 32));

        let blocks =
            Partition::new(vec![fin(&[0, 1])], TailRule::blocks(vec![2]).unwrap(), "").unwrap();
        let r = refine_cell(&blocks, 1, (fin(&[2]), fin(&[3]))).unwrap();
        assert_eq!(r.head(), &[fin(&[0, 1]), fin(&[2]), fin(&[3])]);
        assert_eq!(r.cell_at(3).unwrap(), fin(&[4, 5]));
        assert!(is_finer(&r, &blocks, 64));

        let later = refine_cell(&blocks, 3, (fin(&[6]), fin(&[7]))).unwrap();
        assert_eq!(later.cell_at(1).unwrap(), fin(&[2, 3]));
        assert_eq!(later.cell_at(3).unwrap(), fin(&[6]));
        assert_eq!(later.cell_at(5).unwrap(), fin(&[8, 9]));

        assert!(matches!(
            refine_cell(&p, 0, (fin(&[0]), fin(&[0, 1]))),
            Err(PartitionError::BadSplit(_))
        ));
        assert!(refine_cell(&p, 0, (fin(&[0]), fin(&[]))).is_err());
        assert!(refine_cell(&p, 1, (fin(&[2]), fin(&[3]))).is_err());

        let evens = Partition::new(vec![MeasurableSet::even()], TailRule::Singletons, "").unwrap();
        let r = refine_cell(
            &evens,
            0,
            (
                fin(&[0, 2]),
                MeasurableSet::even().difference(&fin(&[0, 2])),
            ),
        )
        .unwrap();
        assert!(is_finer(&r, &evens, 128));
    }

    #[test]
    fn sample_refinements_examples() {
        let s = Partition::singletons();
        let out = sample_refinements(&s, 1, 3, 16);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].partition(), &s);

        let p = Partition::from_lists(&[&[0, 1, 2, 3], &[4, 5, 6]]).unwrap();
        let a = sample_refinements(&p, 3, 11, 16);
        let b = sample_refinements(&p, 3, 11, 16);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| is_finer(t.partition(), &p, 32)));
        assert!(sample_refinements(&p, 0, 1, 16).is_empty());
    }

    #[test]
    fn tags_lie_in_their_cells() {
        let p = Partition::new(
            vec![fin(&[0, 1, 2, 3, 4]), MeasurableSet::at_least(20)],
            TailRule::blocks(vec![3, 1]).unwrap(),
            "",
        )
        .unwrap();
        for t in sample_refinements(&p, 12, 5, 32) {
            for (k, (cell, tag)) in t.tagged_cells().take(40).enumerate() {
                assert!(cell.member(tag), "cell {k} tag {tag}");
                assert_eq!(t.tag_at(k), Some(tag));
            }
            assert!(is_finer(t.partition(), &p, 64));
        }
        let tp = TaggedPartition::least(p.clone());
        assert!(TaggedPartition::new(p.clone(), vec![0]).is_err());
        assert!(TaggedPartition::new(p, vec![0, 7]).is_err());
        assert_eq!(tp.head_tags(), &[0, 20]);
    }

    #[test]
    fn serializes_in_config_schema() {
        let p = Partition::from_lists(&[&[0, 1], &[2]]).unwrap();
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"head":[[0,1],[2]],"tail":"singletons"}"#
        );
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        (
            proptest::collection::vec(0usize..4, 0..10),
            prop_oneof![Just(0u64), 1u64..4],
        )
            .prop_map(|(labels, block)| {
                let mut cells: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
                for (n, l) in labels.iter().enumerate() {
                    cells.entry(*l).or_default().push(n as u64);
                }
                let head = cells.into_values().map(MeasurableSet::finite).collect();
                let tail = if block == 0 {
                    TailRule::Singletons
                } else {
                    TailRule::blocks(vec![block]).unwrap()
                };
                Partition::new(head, tail, "").unwrap()
            })
    }

    proptest! {
        #[test]
        fn finer_is_reflexive_and_transitive(a in arb_partition(), seed in 0u64..1000) {
            prop_assert!(is_finer(&a, &a, 24));
            let b = sample_refinements(&a, 1, seed, 24).remove(0);
            let c = sample_refinements(b.partition(), 1, seed + 1, 24).remove(0);
            prop_assert!(is_finer(b.partition(), &a, 24));
            prop_assert!(is_finer(c.partition(), b.partition(), 24));
            prop_assert!(is_finer(c.partition(), &a, 24));
        }

        #[test]
        fn cells_are_disjoint_and_cover(p in arb_partition()) {
            let h = 40u64;
            let mut seen = vec![0u32; h as usize];
            for cell in p.cells().take_while(|c| c.least_below(h).is_some()) {
                for m in cell.enumerate_prefix(h) {
                    seen[m as usize] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
            prop_assert!(p.is_valid_below(h));
        }

        #[test]
        fn meet_refines_both(a in arb_partition(), b in arb_partition()) {
            if let Ok(r) = common_refinement(&a, &b) {
                prop_assert!(is_finer(&r, &a, 48));
                prop_assert!(is_finer(&r, &b, 48));
            }
        }
    }
}
