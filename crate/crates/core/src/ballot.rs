//! Ballots, voter-level preference over budgets, and profile-level dominance.
//!
//! Every predicate here lifts a voter's ranking of items to a ranking of
//! budgets by comparing the worst item one budget adds against the best
//! item the other adds (the minmax extension).

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Budget, ItemId, Mode, Proposal};

/// A strict ranking of every item, best first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl LinearOrder {
    pub fn new<I, S>(proposal: &Proposal, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if proposal.mode() != Mode::Unit {
            return Err(Error::UnsupportedBallot {
                kind: "linear",
                mode: proposal.mode(),
            });
        }
        let order = ids
            .into_iter()
            .map(|id| proposal.require(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(proposal.len(), order)
    }

    pub(crate) fn from_indices(n: usize, order: Vec<usize>) -> Result<Self> {
        let mut position = vec![usize::MAX; n];
        for (rank, &item) in order.iter().enumerate() {
            if position[item] != usize::MAX {
                return Err(Error::InvalidBallot(format!("item #{item} ranked twice")));
            }
            position[item] = rank;
        }
        if order.len() != n {
            return Err(Error::InvalidBallot(format!(
                "linear order ranks {} of {} items",
                order.len(),
                n
            )));
        }
        Ok(LinearOrder { order, position })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based ranks of the items selected by `budget`.
    pub fn positions(&self, budget: &Budget) -> Vec<usize> {
        let mut pos: Vec<usize> = self
            .order
            .iter()
            .enumerate()
            .filter(|(_, &item)| budget.contains(item))
            .map(|(rank, _)| rank + 1)
            .collect();
        pos.sort_unstable();
        pos
    }

    pub fn prefers(&self, b: &Budget, other: &Budget) -> bool {
        minmax_prefers(
            differing(b, other).map(|i| self.position[i]),
            differing(other, b).map(|i| self.position[i]),
        )
    }
}

/// A weak order: components `C_1 ≻ C_2 ≻ …`, each holding `(item, copies)`.
/// Components may be empty (remainders produce empty components).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPartition {
    mode: Mode,
    components: Vec<Vec<(usize, u64)>>,
}

impl OrderedPartition {
    /// Builds a partition from `(id, copies)` components. The copies of each
    /// item across all components must add up to the item's quantity.
    pub fn new<C, E, S>(proposal: &Proposal, components: C) -> Result<Self>
    where
        C: IntoIterator<Item = E>,
        E: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut comps = Vec::new();
        for component in components {
            let mut entries = Vec::new();
            for (id, k) in component {
                let item = proposal.require(id.as_ref())?;
                if k == 0 {
                    return Err(Error::InvalidBallot(format!(
                        "item {:?} listed with zero copies",
                        id.as_ref()
                    )));
                }
                entries.push((item, k));
            }
            comps.push(entries);
        }
        Self::from_indices(proposal, comps)
    }

    /// Unit-mode convenience: each component is a list of item ids.
    pub fn of_items<C, E, S>(proposal: &Proposal, components: C) -> Result<Self>
    where
        C: IntoIterator<Item = E>,
        E: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::new(
            proposal,
            components
                .into_iter()
                .map(|c| c.into_iter().map(|id| (id, 1u64)).collect::<Vec<_>>()),
        )
    }

    pub(crate) fn from_indices(
        proposal: &Proposal,
        components: Vec<Vec<(usize, u64)>>,
    ) -> Result<Self> {
        let mut total = vec![0u64; proposal.len()];
        let components: Vec<Vec<(usize, u64)>> = components
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                let mut merged: Vec<(usize, u64)> = Vec::with_capacity(c.len());
                for (item, k) in c {
                    total[item] = total[item].saturating_add(k);
                    match merged.last_mut() {
                        Some((last, q)) if *last == item => *q += k,
                        _ => merged.push((item, k)),
                    }
                }
                merged
            })
            .collect();
        for (item, &k) in proposal.items().iter().zip(&total) {
            if k != item.quantity() {
                return Err(Error::InvalidBallot(format!(
                    "item {:?} has {} copies across components, expected {}",
                    item.id().as_str(),
                    k,
                    item.quantity()
                )));
            }
        }
        Ok(OrderedPartition {
            mode: proposal.mode(),
            components,
        })
    }

    pub fn components(&self) -> &[Vec<(usize, u64)>] {
        &self.components
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Cumulative copy boundaries of `item`: after the `j`-th component that
    /// mentions it, this many copies have been ranked. Pairs are
    /// `(component index, cumulative count)`.
    pub fn boundaries(&self, item: usize) -> Vec<(usize, u64)> {
        let mut acc = 0;
        let mut out = Vec::new();
        for (ci, comp) in self.components.iter().enumerate() {
            if let Some(&(_, k)) = comp.iter().find(|(i, _)| *i == item) {
                acc += k;
                out.push((ci, acc));
            }
        }
        out
    }

    /// Component index holding the `copy`-th (1-based) copy of `item`.
    pub fn component_of_copy(&self, item: usize, copy: u64) -> Option<usize> {
        self.boundaries(item)
            .into_iter()
            .find(|&(_, upto)| copy <= upto)
            .map(|(ci, _)| ci)
    }

    /// Prefers on component indices, for unit-mode partitions: items in the
    /// same component are tied.
    pub fn prefers_by_component(&self, b: &Budget, other: &Budget) -> bool {
        let comp = self.unit_components();
        minmax_prefers(
            differing(b, other).map(|i| comp[i]),
            differing(other, b).map(|i| comp[i]),
        )
    }

    /// The unbudgeted remainder of `budget`: walking components in order,
    /// the budget's copies are consumed from the earliest components first.
    pub fn remainder(&self, budget: &Budget) -> OrderedPartition {
        let mut left: Vec<u64> = budget.counts().to_vec();
        let components = self
            .components
            .iter()
            .map(|comp| {
                comp.iter()
                    .filter_map(|&(item, k)| {
                        let taken = k.min(left[item]);
                        left[item] -= taken;
                        (k > taken).then_some((item, k - taken))
                    })
                    .collect()
            })
            .collect();
        OrderedPartition {
            mode: self.mode,
            components,
        }
    }

    /// Component-wise multiset difference `Rem_other \ Rem_b`: per component,
    /// the copies budgeted by `b` but not by `other`.
    pub fn ranked_difference(&self, b: &Budget, other: &Budget) -> Vec<Vec<(usize, u64)>> {
        let rem_b = self.remainder(b);
        let rem_other = self.remainder(other);
        rem_other
            .components
            .iter()
            .zip(&rem_b.components)
            .map(|(x, y)| {
                x.iter()
                    .filter_map(|&(item, k)| {
                        let have = y.iter().find(|(i, _)| *i == item).map_or(0, |&(_, q)| q);
                        (k > have).then(|| (item, k - have))
                    })
                    .collect()
            })
            .collect()
    }

    /// 1-based indices of the non-empty components of the ranked difference.
    pub fn ranked_difference_indices(&self, b: &Budget, other: &Budget) -> Vec<usize> {
        self.ranked_difference(b, other)
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Prefers for quantitative budgets, via ranked differences.
    pub fn prefers_quantitative(&self, b: &Budget, other: &Budget) -> bool {
        minmax_prefers(
            self.ranked_difference_indices(b, other).into_iter(),
            self.ranked_difference_indices(other, b).into_iter(),
        )
    }

    pub fn prefers(&self, b: &Budget, other: &Budget) -> bool {
        match self.mode {
            Mode::Unit => self.prefers_by_component(b, other),
            Mode::Quantitative => self.prefers_quantitative(b, other),
        }
    }

    fn unit_components(&self) -> Vec<usize> {
        let n = self
            .components
            .iter()
            .flatten()
            .map(|&(i, _)| i + 1)
            .max()
            .unwrap_or(0);
        let mut comp = vec![usize::MAX; n];
        for (ci, c) in self.components.iter().enumerate() {
            for &(item, _) in c {
                comp[item] = ci;
            }
        }
        comp
    }
}

/// A strict partial order given by precedence edges `(better, worse)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOrder {
    edges: Vec<(usize, usize)>,
    /// `before[a][b]`: `a` precedes `b` in the transitive closure.
    before: Vec<Vec<bool>>,
}

impl PartialOrder {
    pub fn new<I, S>(proposal: &Proposal, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        if proposal.mode() != Mode::Unit {
            return Err(Error::UnsupportedBallot {
                kind: "partial",
                mode: proposal.mode(),
            });
        }
        let edges = edges
            .into_iter()
            .map(|(a, b)| Ok((proposal.require(a.as_ref())?, proposal.require(b.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(proposal.len(), edges)
            .map_err(|cycle| Error::CyclicBallot(proposal.item(cycle).id().to_string()))
    }

    /// Computes the transitive closure; on a cycle returns an item on it.
    pub(crate) fn from_indices(
        n: usize,
        edges: Vec<(usize, usize)>,
    ) -> std::result::Result<Self, usize> {
        let mut before = vec![vec![false; n]; n];
        for &(a, b) in &edges {
            before[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if before[i][k] {
                    for j in 0..n {
                        if before[k][j] {
                            before[i][j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| before[i][i]) {
            return Err(i);
        }
        Ok(PartialOrder { edges, before })
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.before[a][b]
    }

    /// Every item only `other` holds is preceded by some item only `b`
    /// holds, and no item only `b` holds is preceded by an item only `other`
    /// holds. Equal budgets are never preferred.
    pub fn prefers(&self, b: &Budget, other: &Budget) -> bool {
        if b == other {
            return false;
        }
        let gain: Vec<usize> = differing(b, other).collect();
        let loss: Vec<usize> = differing(other, b).collect();
        loss.iter()
            .all(|&y| gain.iter().any(|&x| self.before[x][y]))
            && gain
                .iter()
                .all(|&x| !loss.iter().any(|&y| self.before[y][x]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ballot {
    Linear(LinearOrder),
    Partition(OrderedPartition),
    Partial(PartialOrder),
}

impl Ballot {
    pub fn kind(&self) -> &'static str {
        match self {
            Ballot::Linear(_) => "linear",
            Ballot::Partition(_) => "partition",
            Ballot::Partial(_) => "partial",
        }
    }

    pub fn prefers(&self, b: &Budget, other: &Budget) -> bool {
        match self {
            Ballot::Linear(v) => v.prefers(b, other),
            Ballot::Partition(v) => v.prefers(b, other),
            Ballot::Partial(v) => v.prefers(b, other),
        }
    }

    fn item_count(&self) -> Option<usize> {
        match self {
            Ballot::Linear(v) => Some(v.position.len()),
            Ballot::Partial(v) => Some(v.before.len()),
            Ballot::Partition(_) => None,
        }
    }
}

impl From<LinearOrder> for Ballot {
    fn from(v: LinearOrder) -> Self {
        Ballot::Linear(v)
    }
}

impl From<OrderedPartition> for Ballot {
    fn from(v: OrderedPartition) -> Self {
        Ballot::Partition(v)
    }
}

impl From<PartialOrder> for Ballot {
    fn from(v: PartialOrder) -> Self {
        Ballot::Partial(v)
    }
}

/// The ballots of an election; all of one kind.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Profile {
    ballots: Vec<Ballot>,
}

impl Profile {
    pub fn new(ballots: Vec<Ballot>) -> Result<Self> {
        if let Some(first) = ballots.first() {
            for b in &ballots[1..] {
                if b.kind() != first.kind() {
                    return Err(Error::MixedProfile {
                        first: first.kind(),
                        other: b.kind(),
                    });
                }
                if b.item_count() != first.item_count() {
                    return Err(Error::InvalidBallot(
                        "ballots range over different proposals".into(),
                    ));
                }
            }
        }
        Ok(Profile { ballots })
    }

    pub fn empty() -> Self {
        Profile::default()
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn len(&self) -> usize {
        self.ballots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ballots.is_empty()
    }

    pub fn preferring(&self, b: &Budget, other: &Budget) -> usize {
        self.ballots.iter().filter(|v| v.prefers(b, other)).count()
    }

    /// Strictly more than half of the ballots prefer `b` to `other`.
    /// Never holds for an empty profile.
    pub fn dominates(&self, b: &Budget, other: &Budget) -> bool {
        2 * self.preferring(b, other) > self.len()
    }

    pub fn weakly_dominates(&self, b: &Budget, other: &Budget) -> bool {
        !self.dominates(other, b)
    }
}

/// Items where `b` holds more copies than `other`.
fn differing<'a>(b: &'a Budget, other: &'a Budget) -> impl Iterator<Item = usize> + 'a {
    b.counts()
        .iter()
        .zip(other.counts())
        .enumerate()
        .filter(|(_, (x, y))| x > y)
        .map(|(i, _)| i)
}

/// `max(gain) < min(loss)` with `max(∅) = min(∅) = ∞`.
fn minmax_prefers(gain: impl Iterator<Item = usize>, loss: impl Iterator<Item = usize>) -> bool {
    let worst_gain = gain.max();
    let best_loss = loss.min();
    match (worst_gain, best_loss) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(g), Some(l)) => g.cmp(&l) == Ordering::Less,
    }
}

/// Item ids of an ordered partition, for display.
pub fn describe_partition(
    proposal: &Proposal,
    partition: &OrderedPartition,
) -> Vec<Vec<(ItemId, u64)>> {
    partition
        .components()
        .iter()
        .map(|c| {
            c.iter()
                .map(|&(i, k)| (proposal.item(i).id().clone(), k))
                .collect()
        })
        .collect()
}
