//! Two-level (and recursively deeper) budgeting. Each section is ranked on
//! its own without a limit; the consolidation stage then votes over one
//! derived quantitative item per section, whose `k`-th copy stands for the
//! `k`-th item of the section's linearized ranking.

use std::collections::{BTreeMap, BTreeSet};

use crate::ballot::{OrderedPartition, Profile};
use crate::error::{Error, Result};
use crate::majority::VertexKey;
use crate::model::{Budget, Item, Mode, Proposal};
use crate::sba::{self, pruning, Outcome, PruningOptions, RankedPartition, TieBreakPolicy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    pub id: String,
    pub proposal: Proposal,
    pub profile: Profile,
}

/// Rejects sections sharing an id or an item id.
pub fn check_sections(sections: &[Section]) -> Result<()> {
    let mut ids = BTreeSet::new();
    let mut items = BTreeSet::new();
    for s in sections {
        if !ids.insert(s.id.as_str()) {
            return Err(Error::Format {
                path: format!("sections[{:?}]", s.id),
                reason: "duplicate section id".into(),
            });
        }
        for item in s.proposal.items() {
            if !items.insert(item.id().as_str()) {
                return Err(Error::DuplicateItem(item.id().to_string()));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionRanking {
    section_id: String,
    proposal: Proposal,
    ranked: RankedPartition,
    /// Copy ranges in funding order; a linear extension of `ranked`.
    linearized: Vec<VertexKey>,
}

impl SectionRanking {
    pub fn section_id(&self) -> &str {
        &self.section_id
    }

    pub fn proposal(&self) -> &Proposal {
        &self.proposal
    }

    pub fn ranked(&self) -> &RankedPartition {
        &self.ranked
    }

    pub fn linearized(&self) -> &[VertexKey] {
        &self.linearized
    }

    pub fn linearized_labels(&self) -> Vec<String> {
        self.linearized.iter().map(|k| k.label(&self.proposal)).collect()
    }

    /// Number of units (item copies) in the linearization.
    pub fn units(&self) -> u64 {
        self.linearized.iter().map(VertexKey::copies).sum()
    }

    /// The first `k` units of the linearization as a section budget.
    pub fn prefix(&self, k: u64) -> Budget {
        let mut budget = self.proposal.empty_budget();
        let mut left = k;
        for key in &self.linearized {
            if left == 0 {
                break;
            }
            let take = key.copies().min(left);
            budget.add(key.item, take);
            left -= take;
        }
        budget
    }

    /// Cost of each prefix, `1..=units()`.
    fn prefix_costs(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.proposal.len()];
        let mut spent = 0u64;
        let mut out = Vec::with_capacity(self.units() as usize);
        for key in &self.linearized {
            let item = self.proposal.item(key.item);
            for _ in 0..key.copies() {
                let held = counts[key.item];
                spent += item.cost_of(held + 1) - item.cost_of(held);
                counts[key.item] += 1;
                out.push(spent);
            }
        }
        out
    }

    /// Units that are fully funded by `budget`, counted from the start.
    fn funded_prefix(&self, budget: &Budget) -> u64 {
        let mut used = vec![0u64; self.proposal.len()];
        let mut units = 0;
        for key in &self.linearized {
            let avail = budget.count(key.item) - used[key.item];
            let take = avail.min(key.copies());
            units += take;
            used[key.item] += take;
            if take < key.copies() {
                break;
            }
        }
        units
    }
}

/// Ranks a section without any limit and linearizes the ranking: component
/// order, then tie-break order within a component, lower copy ranges first.
pub fn section_rank(section: &Section, tie_break: TieBreakPolicy) -> Result<SectionRanking> {
    let ranked = sba::ranking(&section.proposal, &section.profile)?;
    let mut linearized = Vec::new();
    for component in ranked.components() {
        let mut keys = component.clone();
        keys.sort_by(|a, b| {
            tie_break
                .compare(&section.proposal, a.item, b.item)
                .then(a.first.cmp(&b.first))
        });
        linearized.extend(keys);
    }
    Ok(SectionRanking {
        section_id: section.id.clone(),
        proposal: section.proposal.clone(),
        ranked,
        linearized,
    })
}

/// One quantitative item per non-empty section: id = section id, quantity =
/// number of units, and cumulative cost = cost of the first `k` units.
pub fn derive_proposal(rankings: &[SectionRanking]) -> Result<Proposal> {
    let items = rankings
        .iter()
        .filter(|r| r.units() > 0)
        .map(|r| {
            let table = r.prefix_costs();
            debug_assert!(table.windows(2).all(|w| w[0] <= w[1]));
            Item::with_table(r.section_id.as_str(), table)
        })
        .collect();
    Proposal::new(Mode::Quantitative, items)
}

/// Maps a budget over the derived proposal back to one budget per section.
pub fn expand(rankings: &[SectionRanking], derived: &Proposal, budget: &Budget) -> Vec<(String, Budget)> {
    rankings
        .iter()
        .map(|r| {
            let k = derived
                .index_of(&r.section_id)
                .map_or(0, |i| budget.count(i));
            (r.section_id.clone(), r.prefix(k))
        })
        .collect()
}

/// The previous spend of each section, as derived quantities: the longest
/// prefix of the section's linearization that its previous budget covers.
pub fn derived_prev(
    rankings: &[SectionRanking],
    derived: &Proposal,
    prevs: &BTreeMap<String, Budget>,
) -> Budget {
    let mut out = derived.empty_budget();
    for r in rankings {
        if let (Some(i), Some(prev)) = (derived.index_of(&r.section_id), prevs.get(&r.section_id)) {
            out.add(i, r.funded_prefix(prev));
        }
    }
    out
}

/// A consolidation ballot mirroring a voter's linear order over every item of
/// every section: unit `k` of a section ranks where the worst of its first
/// `k` items ranks, since funding it means funding that whole prefix.
pub fn mirror_ballot<S: AsRef<str>>(
    rankings: &[SectionRanking],
    derived: &Proposal,
    order: &[S],
) -> Result<OrderedPartition> {
    let rank: BTreeMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(r, id)| (id.as_ref(), r))
        .collect();
    let mut by_rank: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for r in rankings {
        let Some(d) = derived.index_of(&r.section_id) else {
            continue;
        };
        let mut worst = 0;
        for key in &r.linearized {
            let id = r.proposal.item(key.item).id().as_str();
            let here = *rank
                .get(id)
                .ok_or_else(|| Error::InvalidBallot(format!("order does not rank {id:?}")))?;
            worst = worst.max(here);
            by_rank.entry(worst).or_default().push((d, key.copies()));
        }
    }
    OrderedPartition::from_indices(derived, by_rank.into_values().collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Consolidation {
    pub derived: Proposal,
    pub outcome: Outcome,
    /// Section id and its funded prefix, in ranking order.
    pub sections: Vec<(String, Budget)>,
}

impl Consolidation {
    /// The implied section budget limits: what each funded prefix costs.
    pub fn section_limits(&self, rankings: &[SectionRanking]) -> BTreeMap<String, u64> {
        rankings
            .iter()
            .zip(&self.sections)
            .map(|(r, (id, b))| (id.clone(), r.proposal.cost(b)))
            .collect()
    }
}

/// Runs ESBA over the derived proposal and translates each section's
/// selected quantity back into its funded prefix. `profile` must range over
/// `derive_proposal(rankings)` and `prev` over the same proposal.
pub fn consolidate(
    rankings: &[SectionRanking],
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    options: PruningOptions,
) -> Result<Consolidation> {
    let derived = derive_proposal(rankings)?;
    let outcome = sba::run(&derived, profile, limit, prev, options)?;
    let sections = expand(rankings, &derived, &outcome.budget);
    Ok(Consolidation {
        derived,
        outcome,
        sections,
    })
}

/// Prunes each section's ranking by its own limit. Sections missing from
/// `limits` get nothing.
pub fn what_if_limits(
    rankings: &[SectionRanking],
    limits: &BTreeMap<String, u64>,
    prevs: &BTreeMap<String, Budget>,
    options: PruningOptions,
) -> Result<Vec<(String, Budget)>> {
    if let Some(unknown) = limits
        .keys()
        .find(|id| !rankings.iter().any(|r| &r.section_id == *id))
    {
        return Err(Error::UnknownSection(unknown.clone()));
    }
    rankings
        .iter()
        .map(|r| {
            let limit = limits.get(&r.section_id).copied().unwrap_or(0);
            let empty = r.proposal.empty_budget();
            let prev = prevs.get(&r.section_id).unwrap_or(&empty);
            r.proposal.check(prev)?;
            Ok((r.section_id.clone(), pruning(&r.proposal, &r.ranked, limit, prev, options)))
        })
        .collect()
}
