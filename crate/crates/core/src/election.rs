//! A compiled election and the reports produced from it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ballot::{OrderedPartition, Profile};
use crate::error::{Error, Result, ResultExt};
use crate::format::{BudgetDoc, EntryDoc};
use crate::hierarchy::{
    self, consolidate, derived_prev, mirror_ballot, section_rank, what_if_limits, Consolidation,
    Section, SectionRanking,
};
use crate::majority::{build_majority_graph, MajorityGraph};
use crate::model::{Budget, Mode, Proposal};
use crate::oracle::{self, VerificationReport};
use crate::sba::{self, Outcome, PruningOptions, RankedPartition};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Election {
    /// For sectioned elections, the union of all section items.
    pub proposal: Proposal,
    pub profile: Profile,
    pub limit: u64,
    pub prev: Budget,
    pub options: PruningOptions,
    pub hierarchy: Option<Hierarchy>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    pub sections: Vec<Section>,
    pub prevs: BTreeMap<String, Budget>,
    pub consolidation: ConsolidationBallots,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConsolidationBallots {
    /// Linear orders over every item, mirrored onto section units.
    Mirror(Vec<Vec<String>>),
    /// Partitions over section ids; a bare id means all of its units.
    Explicit(Vec<Vec<Vec<EntryDoc>>>),
}

/// Result of the sectioned procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierarchyOutcome {
    pub rankings: Vec<SectionRanking>,
    pub consolidation: Consolidation,
}

impl Election {
    pub fn majority_graph(&self) -> Result<MajorityGraph> {
        build_majority_graph(&self.proposal, &self.profile)
    }

    pub fn rank(&self) -> Result<RankedPartition> {
        sba::ranking(&self.proposal, &self.profile)
    }

    pub fn run(&self) -> Result<Outcome> {
        sba::run(&self.proposal, &self.profile, self.limit, &self.prev, self.options)
    }

    pub fn verify(&self) -> Result<VerificationReport> {
        oracle::verify(&self.proposal, &self.profile, self.limit, &self.prev, self.options)
    }

    pub fn hierarchy(&self) -> Result<&Hierarchy> {
        self.hierarchy.as_ref().ok_or_else(|| Error::Format {
            path: "sections".into(),
            reason: "this election has no sections".into(),
        })
    }

    pub fn section_rankings(&self) -> Result<Vec<SectionRanking>> {
        self.hierarchy()?
            .sections
            .iter()
            .map(|s| section_rank(s, self.options.tie_break).at(|| format!("sections[{:?}]", s.id)))
            .collect()
    }

    pub fn consolidate(&self) -> Result<HierarchyOutcome> {
        let h = self.hierarchy()?;
        let rankings = self.section_rankings()?;
        let derived = hierarchy::derive_proposal(&rankings)?;
        let ballots = match &h.consolidation {
            ConsolidationBallots::Mirror(orders) => orders
                .iter()
                .enumerate()
                .map(|(i, o)| {
                    mirror_ballot(&rankings, &derived, o)
                        .map(Into::into)
                        .at(|| format!("ballots[{i}]"))
                })
                .collect::<Result<Vec<_>>>()?,
            ConsolidationBallots::Explicit(docs) => docs
                .iter()
                .enumerate()
                .map(|(i, comps)| {
                    explicit_ballot(&derived, comps)
                        .map(Into::into)
                        .at(|| format!("consolidation_ballots[{i}]"))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let profile = Profile::new(ballots)?;
        let prev = derived_prev(&rankings, &derived, &h.prevs);
        let consolidation = consolidate(&rankings, &profile, self.limit, &prev, self.options)?;
        Ok(HierarchyOutcome {
            rankings,
            consolidation,
        })
    }

    /// Prunes every section by its own limit; missing sections get 0.
    pub fn what_if(&self, limits: &BTreeMap<String, u64>) -> Result<Vec<(String, Budget)>> {
        let h = self.hierarchy()?;
        let rankings = self.section_rankings()?;
        what_if_limits(&rankings, limits, &h.prevs, self.options)
    }

    pub fn budget_report(&self, outcome: &Outcome) -> BudgetReport {
        BudgetReport::new(&self.proposal, self.limit, outcome)
    }

    pub fn hierarchy_report(&self, out: &HierarchyOutcome) -> Result<HierarchyReport> {
        let direct = self.run()?;
        let c = &out.consolidation;
        let limits = c.section_limits(&out.rankings);
        Ok(HierarchyReport {
            sections: out
                .rankings
                .iter()
                .zip(&c.sections)
                .map(|(r, (id, b))| SectionReport {
                    section: id.clone(),
                    ranking: r.ranked().labels(r.proposal()),
                    linearized: r.linearized_labels(),
                    budget: BudgetDoc::of(r.proposal(), b),
                    cost: limits[id],
                })
                .collect(),
            derived: c
                .derived
                .items()
                .iter()
                .map(|it| DerivedItemReport {
                    id: it.id().to_string(),
                    cum_cost: (1..=it.quantity()).map(|k| it.cost_of(k)).collect(),
                })
                .collect(),
            consolidated: c
                .derived
                .describe(&c.outcome.budget)
                .into_iter()
                .map(|(id, k)| (id.to_string(), k))
                .collect(),
            limit: self.limit,
            direct: self.budget_report(&direct),
        })
    }

    pub fn what_if_report(&self, limits: &BTreeMap<String, u64>) -> Result<WhatIfReport> {
        let h = self.hierarchy()?;
        let budgets = self.what_if(limits)?;
        Ok(WhatIfReport {
            sections: h
                .sections
                .iter()
                .zip(budgets)
                .map(|(s, (id, b))| WhatIfSection {
                    limit: limits.get(&id).copied().unwrap_or(0),
                    cost: s.proposal.cost(&b),
                    budget: BudgetDoc::of(&s.proposal, &b),
                    section: id,
                })
                .collect(),
        })
    }

    pub fn section_rankings_report(&self) -> Result<Vec<SectionRankingReport>> {
        Ok(self
            .section_rankings()?
            .iter()
            .map(|r| SectionRankingReport {
                section: r.section_id().to_string(),
                ranking: r.ranked().labels(r.proposal()),
                linearized: r.linearized_labels(),
                units: r.units(),
            })
            .collect())
    }
}

fn explicit_ballot(derived: &Proposal, comps: &[Vec<EntryDoc>]) -> Result<OrderedPartition> {
    let resolved = comps
        .iter()
        .map(|c| {
            c.iter()
                .map(|e| match e {
                    EntryDoc::All(id) => Ok((id.as_str(), derived.item(derived.require(id)?).quantity())),
                    EntryDoc::Copies(id, k) => Ok((id.as_str(), *k)),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    OrderedPartition::new(derived, resolved)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BudgetReport {
    pub mode: Mode,
    pub limit: u64,
    pub cost: u64,
    pub budget: BudgetDoc,
    pub ranking: Vec<Vec<String>>,
}

impl BudgetReport {
    pub fn new(proposal: &Proposal, limit: u64, outcome: &Outcome) -> Self {
        BudgetReport {
            mode: proposal.mode(),
            limit,
            cost: proposal.cost(&outcome.budget),
            budget: BudgetDoc::of(proposal, &outcome.budget),
            ranking: outcome.ranking.labels(proposal),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionRankingReport {
    pub section: String,
    pub ranking: Vec<Vec<String>>,
    pub linearized: Vec<String>,
    pub units: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SectionReport {
    pub section: String,
    pub ranking: Vec<Vec<String>>,
    pub linearized: Vec<String>,
    pub budget: BudgetDoc,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DerivedItemReport {
    pub id: String,
    pub cum_cost: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HierarchyReport {
    pub sections: Vec<SectionReport>,
    pub derived: Vec<DerivedItemReport>,
    /// Units granted to each section.
    pub consolidated: BTreeMap<String, u64>,
    pub limit: u64,
    /// The flat election over all items, for comparison.
    pub direct: BudgetReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WhatIfSection {
    pub section: String,
    pub limit: u64,
    pub cost: u64,
    pub budget: BudgetDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WhatIfReport {
    pub sections: Vec<WhatIfSection>,
}
