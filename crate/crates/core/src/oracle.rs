//! Exponential reference: enumerate every feasible budget, build the
//! dominance graph over them, and read off Condorcet winners and the Smith
//! set. Only for desk-sized instances; size guards refuse anything larger.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::ballot::Profile;
use crate::error::{Error, Result};
use crate::majority::Digraph;
use crate::model::{Budget, ItemId, Mode, Proposal};
use crate::sba::{self, PruningOptions};

/// Largest unit-mode proposal the oracle will enumerate.
pub const MAX_UNIT_ITEMS: usize = 20;
/// Largest number of count vectors, `Π (q_i + 1)`, for quantitative proposals.
pub const MAX_QUANTITY_VECTORS: u128 = 1_000_000;
/// Largest number of feasible budgets the dominance graph is built over.
pub const MAX_GRAPH_BUDGETS: usize = 4096;

/// All budgets within `limit`, in lexicographic order of their count vectors.
pub fn enumerate_feasible(proposal: &Proposal, limit: u64) -> Result<Vec<Budget>> {
    match proposal.mode() {
        Mode::Unit if proposal.len() > MAX_UNIT_ITEMS => {
            return Err(Error::OracleRefused(format!(
                "{} items exceeds the enumeration guard of {MAX_UNIT_ITEMS}",
                proposal.len()
            )));
        }
        Mode::Quantitative => {
            let vectors = proposal
                .items()
                .iter()
                .try_fold(1u128, |acc, it| acc.checked_mul(it.quantity() as u128 + 1))
                .unwrap_or(u128::MAX);
            if vectors > MAX_QUANTITY_VECTORS {
                return Err(Error::OracleRefused(format!(
                    "{vectors} quantity combinations exceeds the guard of {MAX_QUANTITY_VECTORS}"
                )));
            }
        }
        Mode::Unit => {}
    }
    let mut out = Vec::new();
    let mut counts = vec![0u64; proposal.len()];
    enumerate_from(proposal, limit, 0, 0, &mut counts, &mut out);
    Ok(out)
}

fn enumerate_from(
    proposal: &Proposal,
    limit: u64,
    item: usize,
    spent: u64,
    counts: &mut Vec<u64>,
    out: &mut Vec<Budget>,
) {
    if item == proposal.len() {
        out.push(Budget::from_counts(counts.clone()));
        return;
    }
    let it = proposal.item(item);
    for k in 0..=it.quantity() {
        let cost = spent + it.cost_of(k);
        if cost > limit {
            break;
        }
        counts[item] = k;
        enumerate_from(proposal, limit, item + 1, cost, counts, out);
    }
    counts[item] = 0;
}

/// Feasible budgets with an arc `B → B'` whenever `B` dominates `B'`.
#[derive(Clone, Debug)]
pub struct BudgetsGraph {
    budgets: Vec<Budget>,
    dominance: Digraph,
}

pub fn budgets_graph(proposal: &Proposal, profile: &Profile, limit: u64) -> Result<BudgetsGraph> {
    let budgets = enumerate_feasible(proposal, limit)?;
    if budgets.len() > MAX_GRAPH_BUDGETS {
        return Err(Error::OracleRefused(format!(
            "{} feasible budgets exceeds the graph guard of {MAX_GRAPH_BUDGETS}",
            budgets.len()
        )));
    }
    let n = budgets.len();
    let mut dominance = Digraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && profile.dominates(&budgets[i], &budgets[j]) {
                dominance.add_arc(i, j);
            }
        }
    }
    Ok(BudgetsGraph { budgets, dominance })
}

impl BudgetsGraph {
    pub fn budgets(&self) -> &[Budget] {
        &self.budgets
    }

    pub fn dominance(&self) -> &Digraph {
        &self.dominance
    }

    pub fn index_of(&self, budget: &Budget) -> Option<usize> {
        self.budgets.binary_search(budget).ok()
    }

    /// Arc `B → B'` iff `B'` does not dominate `B` (self-loops omitted).
    pub fn weak_dominance(&self) -> Digraph {
        let n = self.budgets.len();
        Digraph::from_arcs(
            n,
            (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| i != j && !self.dominance.has_arc(j, i)),
        )
    }

    /// The budget dominating every other feasible budget, if any.
    pub fn condorcet_winner(&self) -> Option<&Budget> {
        let n = self.budgets.len();
        (0..n)
            .find(|&i| (0..n).all(|j| i == j || self.dominance.has_arc(i, j)))
            .map(|i| &self.budgets[i])
    }

    /// The Smith set of the budgets graph: the top strongly connected
    /// component of the (total) weak-dominance relation.
    pub fn smith_budgets(&self) -> Vec<Budget> {
        self.weak_dominance()
            .schwartz_set()
            .into_iter()
            .map(|i| self.budgets[i].clone())
            .collect()
    }

    /// Budgets with a weak-domination path to every feasible budget.
    pub fn weak_path_sources(&self) -> Vec<Budget> {
        let weak = self.weak_dominance();
        (0..self.budgets.len())
            .filter(|&i| reachable(&weak, i).iter().all(|&r| r))
            .map(|i| self.budgets[i].clone())
            .collect()
    }

    /// Whether a weak-domination path leads from `from` to `to`.
    pub fn weak_path(&self, from: &Budget, to: &Budget) -> Option<bool> {
        let (i, j) = (self.index_of(from)?, self.index_of(to)?);
        Some(reachable(&self.weak_dominance(), i)[j])
    }
}

fn reachable(g: &Digraph, start: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        for w in 0..g.len() {
            if g.has_arc(u, w) && !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub budget: BTreeMap<ItemId, u64>,
    pub cost: u64,
    pub limit: u64,
    pub feasible: bool,
    pub exhaustive: bool,
    pub smith_member: bool,
    pub smith_size: usize,
    pub feasible_budgets: usize,
    pub condorcet_winner: Option<BTreeMap<ItemId, u64>>,
    /// `None` when no Condorcet winner exists.
    pub condorcet_match: Option<bool>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.feasible && self.exhaustive && self.smith_member && self.condorcet_match != Some(false)
    }
}

/// Checks an arbitrary budget against the oracle.
pub fn verify_budget(
    proposal: &Proposal,
    profile: &Profile,
    limit: u64,
    budget: &Budget,
) -> Result<VerificationReport> {
    proposal.check(budget)?;
    let graph = budgets_graph(proposal, profile, limit)?;
    let feasible = proposal.feasible(budget, limit);
    let smith = graph.smith_budgets();
    let winner = graph.condorcet_winner();
    Ok(VerificationReport {
        budget: proposal.describe(budget),
        cost: proposal.cost(budget),
        limit,
        feasible,
        exhaustive: feasible && proposal.exhaustive(budget, limit)?,
        smith_member: smith.contains(budget),
        smith_size: smith.len(),
        feasible_budgets: graph.budgets().len(),
        condorcet_winner: winner.map(|w| proposal.describe(w)),
        condorcet_match: winner.map(|w| w == budget),
    })
}

/// Runs SBA or ESBA and checks its output against the oracle.
pub fn verify(
    proposal: &Proposal,
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Result<VerificationReport> {
    let outcome = sba::run(proposal, profile, limit, prev, options)?;
    verify_budget(proposal, profile, limit, &outcome.budget)
}
