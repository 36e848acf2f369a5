//! Smith-consistent budgeting: rank items by iterated Schwartz-set
//! extraction from the majority graph, then prune the ranking against the
//! budget limit, preferring the previous budget when choosing among maximal
//! subsets of a component.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ballot::Profile;
use crate::error::Result;
use crate::majority::{build_majority_graph, MajorityGraph, VertexKey};
use crate::model::{Budget, Mode, Proposal};

/// Ordered partition `C_1 ≻ C_2 ≻ …` of the majority-graph vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedPartition {
    components: Vec<Vec<VertexKey>>,
}

impl RankedPartition {
    pub fn new(components: Vec<Vec<VertexKey>>) -> Self {
        RankedPartition { components }
    }

    pub fn components(&self) -> &[Vec<VertexKey>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn labels(&self, proposal: &Proposal) -> Vec<Vec<String>> {
        self.components
            .iter()
            .map(|c| c.iter().map(|k| k.label(proposal)).collect())
            .collect()
    }
}

/// Order among candidates of a component once previous-budget membership
/// has been taken into account. Items of the previous budget always go first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreakPolicy {
    /// Cheaper items first, then by id.
    #[default]
    Cost,
    /// Proposal order.
    Index,
    /// Lexicographic id order.
    Id,
}

impl TieBreakPolicy {
    pub fn compare(&self, proposal: &Proposal, a: usize, b: usize) -> Ordering {
        let (x, y) = (proposal.item(a), proposal.item(b));
        match self {
            TieBreakPolicy::Cost => x
                .first_copy_cost()
                .cmp(&y.first_copy_cost())
                .then_with(|| x.id().cmp(y.id())),
            TieBreakPolicy::Index => a.cmp(&b),
            TieBreakPolicy::Id => x.id().cmp(y.id()),
        }
    }
}

impl std::str::FromStr for TieBreakPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cost" => Ok(TieBreakPolicy::Cost),
            "index" => Ok(TieBreakPolicy::Index),
            "id" => Ok(TieBreakPolicy::Id),
            other => Err(format!("unknown tie-break policy {other:?} (expected cost, index or id)")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PruningOptions {
    pub tie_break: TieBreakPolicy,
    /// Pick the maximal subset closest to the previous budget exactly (unit
    /// mode, components of at most [`EXACT_COMPONENT_LIMIT`] items) instead
    /// of greedily.
    pub exact_knapsack: bool,
}

pub const EXACT_COMPONENT_LIMIT: usize = 20;

/// Iterated Schwartz-set extraction over the strict majority graph.
pub fn ranking(proposal: &Proposal, profile: &Profile) -> Result<RankedPartition> {
    Ok(rank_graph(&build_majority_graph(proposal, profile)?))
}

pub fn rank_graph(graph: &MajorityGraph) -> RankedPartition {
    let mut remaining: Vec<usize> = (0..graph.vertices().len()).collect();
    let mut components = Vec::new();
    while !remaining.is_empty() {
        let sub = graph.graph().induced(&remaining);
        let chosen = sub.schwartz_set();
        debug_assert!(!chosen.is_empty());
        let mut taken = vec![false; remaining.len()];
        for &i in &chosen {
            taken[i] = true;
        }
        components.push(chosen.iter().map(|&i| graph.vertices()[remaining[i]]).collect());
        remaining = remaining
            .into_iter()
            .zip(taken)
            .filter(|(_, t)| !t)
            .map(|(v, _)| v)
            .collect();
    }
    RankedPartition { components }
}

/// Walks the ranking and, per component, adds a maximal set of copies that
/// keeps the running budget within `limit`.
///
/// Greedy mode adds, per item in the component, as many of its copies as fit:
/// first the copies that the previous budget also held, then the rest, each
/// pass in tie-break order.
pub fn pruning(
    proposal: &Proposal,
    ranked: &RankedPartition,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Budget {
    let mut budget = proposal.empty_budget();
    let mut spent = 0u64;
    for component in ranked.components() {
        // item -> (copies offered, copies also held by prev)
        let mut offer: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
        for key in component {
            let held_before = prev.count(key.item);
            let prev_overlap = held_before
                .min(key.last)
                .saturating_sub(key.first - 1);
            let e = offer.entry(key.item).or_default();
            e.0 += key.copies();
            e.1 += prev_overlap;
        }
        let mut order: Vec<usize> = offer.keys().copied().collect();
        order.sort_by(|&a, &b| options.tie_break.compare(proposal, a, b));

        let exact = options.exact_knapsack
            && proposal.mode() == Mode::Unit
            && order.len() <= EXACT_COMPONENT_LIMIT;
        if exact {
            let chosen = closest_maximal_subset(proposal, &order, prev, limit - spent);
            for item in chosen {
                budget.add(item, 1);
                spent += proposal.item(item).cost_of(1);
            }
            continue;
        }

        for prev_pass in [true, false] {
            for &item in &order {
                let (offered, in_prev) = offer[&item];
                let want = if prev_pass { in_prev } else { offered - in_prev };
                if want == 0 {
                    continue;
                }
                let it = proposal.item(item);
                let held = budget.count(item);
                let m = it.max_affordable(held, want, limit - spent);
                if m > 0 {
                    spent += it.cost_of(held + m) - it.cost_of(held);
                    budget.add(item, m);
                }
            }
        }
    }
    debug_assert_eq!(proposal.cost(&budget), spent);
    budget
}

/// Among inclusion-maximal subsets of `items` fitting in `room`, one with the
/// least symmetric-difference cost to `prev`. Ties go to the subset that
/// includes the earliest item in prev-first tie-break order.
fn closest_maximal_subset(proposal: &Proposal, order: &[usize], prev: &Budget, room: u64) -> Vec<usize> {
    let mut items: Vec<usize> = order.to_vec();
    items.sort_by_key(|&i| !prev.contains(i));
    let cost: Vec<u64> = items.iter().map(|&i| proposal.item(i).cost_of(1)).collect();
    let total: u64 = cost.iter().sum();
    if total <= room {
        return items;
    }

    struct Search<'a> {
        cost: &'a [u64],
        in_prev: Vec<bool>,
        room: u64,
        chosen: Vec<bool>,
        best: Option<(u64, Vec<bool>)>,
    }

    impl Search<'_> {
        fn run(&mut self, i: usize, spent: u64, dist: u64) {
            if let Some((best, _)) = &self.best {
                if dist > *best {
                    return;
                }
            }
            if i == self.cost.len() {
                let left = self.room - spent;
                let maximal = (0..self.cost.len()).all(|j| self.chosen[j] || self.cost[j] > left);
                let better = self.best.as_ref().is_none_or(|(best, _)| dist < *best);
                if maximal && better {
                    self.best = Some((dist, self.chosen.clone()));
                }
                return;
            }
            let c = self.cost[i];
            if spent + c <= self.room {
                self.chosen[i] = true;
                let d = if self.in_prev[i] { dist } else { dist + c };
                self.run(i + 1, spent + c, d);
                self.chosen[i] = false;
            }
            let d = if self.in_prev[i] { dist + c } else { dist };
            self.run(i + 1, spent, d);
        }
    }

    let mut search = Search {
        cost: &cost,
        in_prev: items.iter().map(|&i| prev.contains(i)).collect(),
        room,
        chosen: vec![false; items.len()],
        best: None,
    };
    search.run(0, 0, 0);
    let (_, chosen) = search.best.expect("the empty set extends to a maximal subset");
    items
        .into_iter()
        .zip(chosen)
        .filter(|(_, c)| *c)
        .map(|(i, _)| i)
        .collect()
}

/// The result of one budgeting run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub ranking: RankedPartition,
    pub budget: Budget,
}

/// Ranks and prunes a unit-mode election.
pub fn sba(
    proposal: &Proposal,
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Result<Budget> {
    proposal.require_mode(Mode::Unit)?;
    Ok(run(proposal, profile, limit, prev, options)?.budget)
}

/// The quantitative variant: ranks copy-range vertices between split points
/// and prunes by prefixes of copies.
pub fn esba(
    proposal: &Proposal,
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Result<Budget> {
    proposal.require_mode(Mode::Quantitative)?;
    Ok(run(proposal, profile, limit, prev, options)?.budget)
}

/// Runs whichever of SBA or ESBA matches the proposal's mode.
pub fn run(
    proposal: &Proposal,
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Result<Outcome> {
    proposal.check(prev)?;
    let ranking = ranking(proposal, profile)?;
    let budget = pruning(proposal, &ranking, limit, prev, options);
    debug_assert!(proposal.exhaustive(&budget, limit).unwrap_or(false));
    Ok(Outcome { ranking, budget })
}
