//! Proposals, budgets and the cost predicates over them.
//!
//! A proposal is stored uniformly as a list of items with a quantity and a
//! cumulative cost function. Unit-mode proposals are the special case where
//! every quantity is one, so budgets are always count vectors aligned with
//! the proposal's item order.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Self {
        ItemId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for ItemId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_owned())
    }
}

impl From<String> for ItemId {
    fn from(s: String) -> Self {
        ItemId(s)
    }
}

impl From<&String> for ItemId {
    fn from(s: &String) -> Self {
        ItemId(s.clone())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Unit,
    Quantitative,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unit => "unit",
            Mode::Quantitative => "quantitative",
        })
    }
}

/// Total cost of the first `k` copies of an item.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostFunction {
    /// `table[k - 1]` is the cost of `k` copies.
    Table(Vec<u64>),
    /// Every copy costs the same amount.
    PerUnit(u64),
}

impl CostFunction {
    /// Cost of `k` copies; `k` must not exceed the item's quantity.
    pub fn of(&self, k: u64) -> u64 {
        if k == 0 {
            return 0;
        }
        match self {
            CostFunction::Table(table) => table[(k - 1) as usize],
            CostFunction::PerUnit(c) => c * k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    id: ItemId,
    quantity: u64,
    cost: CostFunction,
}

impl Item {
    pub fn unit(id: impl Into<ItemId>, cost: u64) -> Self {
        Item {
            id: id.into(),
            quantity: 1,
            cost: CostFunction::Table(vec![cost]),
        }
    }

    /// A quantitative item whose cumulative cost table is given explicitly.
    pub fn with_table(id: impl Into<ItemId>, cum_cost: Vec<u64>) -> Self {
        Item {
            id: id.into(),
            quantity: cum_cost.len() as u64,
            cost: CostFunction::Table(cum_cost),
        }
    }

    pub fn per_unit(id: impl Into<ItemId>, quantity: u64, unit_cost: u64) -> Self {
        Item {
            id: id.into(),
            quantity,
            cost: CostFunction::PerUnit(unit_cost),
        }
    }

    pub fn id(&self) -> &ItemId {
        &self.id
    }

    pub fn quantity(&self) -> u64 {
        self.quantity
    }

    pub fn cost_function(&self) -> &CostFunction {
        &self.cost
    }

    pub fn cost_of(&self, k: u64) -> u64 {
        self.cost.of(k)
    }

    /// Cost of a single copy; the per-item key used by cost-ordered tie-breaking.
    pub fn first_copy_cost(&self) -> u64 {
        self.cost.of(1)
    }

    /// Largest `m <= max_extra` such that going from `held` to `held + m`
    /// copies costs at most `room`. Relies on the cost function being
    /// non-decreasing, which `Proposal::new` enforces.
    pub fn max_affordable(&self, held: u64, max_extra: u64, room: u64) -> u64 {
        let max_extra = max_extra.min(self.quantity - held);
        let base = self.cost.of(held);
        match &self.cost {
            CostFunction::PerUnit(0) => max_extra,
            CostFunction::PerUnit(c) => max_extra.min(room / c),
            CostFunction::Table(_) => {
                let (mut lo, mut hi) = (0, max_extra);
                while lo < hi {
                    let mid = lo + (hi - lo).div_ceil(2);
                    if self.cost.of(held + mid) - base <= room {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                lo
            }
        }
    }

    fn validate(&self, mode: Mode) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidItem {
            id: self.id.to_string(),
            reason: reason.to_owned(),
        };
        if self.quantity == 0 {
            return Err(invalid("quantity must be positive"));
        }
        if mode == Mode::Unit && self.quantity != 1 {
            return Err(invalid("unit-mode items have quantity 1"));
        }
        if let CostFunction::Table(table) = &self.cost {
            if table.len() as u64 != self.quantity {
                return Err(invalid("cumulative cost table must list every quantity 1..=q"));
            }
            if table.windows(2).any(|w| w[1] < w[0]) {
                return Err(invalid("cumulative cost must be non-decreasing"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposal {
    mode: Mode,
    items: Vec<Item>,
    index: BTreeMap<ItemId, usize>,
}

impl Proposal {
    pub fn new(mode: Mode, items: Vec<Item>) -> Result<Self> {
        let mut index = BTreeMap::new();
        let mut total: u64 = 0;
        for (i, item) in items.iter().enumerate() {
            item.validate(mode)?;
            if index.insert(item.id.clone(), i).is_some() {
                return Err(Error::DuplicateItem(item.id.to_string()));
            }
            let full = match &item.cost {
                CostFunction::PerUnit(c) => c.checked_mul(item.quantity).ok_or(Error::CostOverflow)?,
                CostFunction::Table(t) => *t.last().expect("validated non-empty"),
            };
            total = total.checked_add(full).ok_or(Error::CostOverflow)?;
        }
        Ok(Proposal { mode, items, index })
    }

    /// A unit-mode proposal from `(id, cost)` pairs.
    pub fn unit<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<ItemId>,
    {
        Self::new(Mode::Unit, items.into_iter().map(|(id, c)| Item::unit(id, c)).collect())
    }

    pub fn quantitative(items: Vec<Item>) -> Result<Self> {
        Self::new(Mode::Quantitative, items)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, index: usize) -> &Item {
        &self.items[index]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id).ok_or_else(|| Error::UnknownItem(id.to_owned()))
    }

    pub fn require_mode(&self, expected: Mode) -> Result<()> {
        if self.mode == expected {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected,
                found: self.mode,
            })
        }
    }

    /// Builds a budget from `(id, count)` pairs; repeated ids accumulate.
    pub fn budget<I, S>(&self, entries: I) -> Result<Budget>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut counts = vec![0u64; self.len()];
        for (id, k) in entries {
            let i = self.require(id.as_ref())?;
            counts[i] += k;
        }
        let budget = Budget { counts };
        self.check(&budget)?;
        Ok(budget)
    }

    /// A budget holding one copy of each listed item.
    pub fn budget_of<I, S>(&self, ids: I) -> Result<Budget>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.budget(ids.into_iter().map(|id| (id, 1)))
    }

    pub fn empty_budget(&self) -> Budget {
        Budget {
            counts: vec![0; self.len()],
        }
    }

    pub fn full_budget(&self) -> Budget {
        Budget {
            counts: self.items.iter().map(|it| it.quantity).collect(),
        }
    }

    /// Validates that `budget` ranges over this proposal and respects quantities.
    pub fn check(&self, budget: &Budget) -> Result<()> {
        if budget.counts.len() != self.len() {
            return Err(Error::InvalidBallot(format!(
                "budget covers {} items but the proposal has {}",
                budget.counts.len(),
                self.len()
            )));
        }
        for (item, &k) in self.items.iter().zip(&budget.counts) {
            if k > item.quantity {
                return Err(Error::QuantityOutOfRange {
                    id: item.id.to_string(),
                    requested: k,
                    available: item.quantity,
                });
            }
        }
        Ok(())
    }

    pub fn cost(&self, budget: &Budget) -> u64 {
        self.items
            .iter()
            .zip(&budget.counts)
            .map(|(item, &k)| item.cost_of(k))
            .sum()
    }

    pub fn feasible(&self, budget: &Budget, limit: u64) -> bool {
        self.cost(budget) <= limit
    }

    /// True when no single further copy of any item fits under `limit`.
    pub fn exhaustive(&self, budget: &Budget, limit: u64) -> Result<bool> {
        let cost = self.cost(budget);
        if cost > limit {
            return Err(Error::InfeasibleBudget { cost, limit });
        }
        let room = limit - cost;
        Ok(self.items.iter().zip(&budget.counts).all(|(item, &k)| {
            k == item.quantity || item.cost_of(k + 1) - item.cost_of(k) > room
        }))
    }

    /// Cost of the symmetric difference, pricing the differing copies of an
    /// item at its cumulative cost between the two counts.
    pub fn symdiff_cost(&self, a: &Budget, b: &Budget) -> u64 {
        self.items
            .iter()
            .zip(a.counts.iter().zip(&b.counts))
            .map(|(item, (&x, &y))| item.cost_of(x.max(y)) - item.cost_of(x.min(y)))
            .sum()
    }

    /// Human-facing view of a budget: item id to selected count, zeros omitted.
    pub fn describe(&self, budget: &Budget) -> BTreeMap<ItemId, u64> {
        self.items
            .iter()
            .zip(&budget.counts)
            .filter(|(_, &k)| k > 0)
            .map(|(item, &k)| (item.id.clone(), k))
            .collect()
    }

    /// Selected item ids in lexicographic order (counts dropped).
    pub fn selected_ids(&self, budget: &Budget) -> Vec<&str> {
        self.describe(budget)
            .into_keys()
            .map(|id| self.items[self.index[&id]].id.as_str())
            .collect()
    }
}

/// A selection of copies from a proposal, stored as counts aligned with the
/// proposal's item order. Construct through [`Proposal::budget`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Budget {
    counts: Vec<u64>,
}

impl Budget {
    pub(crate) fn from_counts(counts: Vec<u64>) -> Self {
        Budget { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, item: usize) -> u64 {
        self.counts[item]
    }

    pub fn contains(&self, item: usize) -> bool {
        self.counts[item] > 0
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&k| k == 0)
    }

    /// Component-wise `self <= other`.
    pub fn is_subset(&self, other: &Budget) -> bool {
        self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    pub(crate) fn add(&mut self, item: usize, k: u64) {
        self.counts[item] += k;
    }
}
