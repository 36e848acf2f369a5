//! The JSON election file: parsing with path-named schema errors, semantic
//! compilation into an [`Election`], and canonical emission.
//!
//! ```json
//! {
//!   "proposal": {"mode": "unit", "items": [{"id": "a", "cost": 1}]},
//!   "ballots": [{"voter": "v1", "linear": ["a"]}],
//!   "limit": 3,
//!   "previous_budget": ["a"],
//!   "tie_break": "cost"
//! }
//! ```

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ballot::{Ballot, LinearOrder, OrderedPartition, PartialOrder, Profile};
use crate::election::{ConsolidationBallots, Election, Hierarchy};
use crate::error::{Error, Result, ResultExt};
use crate::hierarchy::{check_sections, Section};
use crate::model::{Budget, Item, Mode, Proposal};
use crate::sba::{PruningOptions, TieBreakPolicy};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal: Option<ProposalDoc>,
    #[serde(default)]
    pub ballots: Vec<BallotDoc>,
    pub limit: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous_budget: Option<BudgetDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<TieBreakPolicy>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub exact_knapsack: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<Vec<SectionDoc>>,
    /// Ballots over the per-section derived items. When absent, the
    /// top-level linear ballots are mirrored onto them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub consolidation_ballots: Option<Vec<BallotDoc>>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProposalDoc {
    #[serde(default)]
    pub mode: Mode,
    pub items: Vec<ItemDoc>,
}

/// Unit items carry `cost`; quantitative items carry either `cum_cost` or
/// `quantity` together with `unit_cost`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantity: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cum_cost: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_cost: Option<u64>,
}

/// Exactly one of `linear`, `partition` or `partial` must be present.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallotDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<Vec<EntryDoc>>>,
    /// `[a, b]` pairs meaning `a` comes before `b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial: Option<Vec<[String; 2]>>,
}

/// A partition entry: a bare id stands for every copy of the item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryDoc {
    All(String),
    Copies(String, u64),
}

/// A list of ids (one copy each) or a map from id to number of copies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetDoc {
    Ids(Vec<String>),
    Counts(BTreeMap<String, u64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDoc {
    pub id: String,
    pub proposal: ProposalDoc,
    #[serde(default)]
    pub ballots: Vec<BallotDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub previous_budget: Option<BudgetDoc>,
}

/// Deserializes an election file; schema errors name the offending path.
pub fn parse_election(bytes: &[u8]) -> Result<ElectionFile> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let file: ElectionFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Format {
        path: path_or_root(e.path().to_string()),
        reason: e.into_inner().to_string(),
    })?;
    Ok(file)
}

/// Parses and compiles in one step.
pub fn load_election(bytes: &[u8]) -> Result<Election> {
    parse_election(bytes)?.compile()
}

fn path_or_root(path: String) -> String {
    if path == "." || path.is_empty() {
        "$".into()
    } else {
        path
    }
}

/// Pretty JSON with object keys in lexicographic order and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("report types serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("values serialize");
    out.push('\n');
    out
}

impl BudgetDoc {
    /// Unit budgets as a sorted id list, quantitative ones as an id → count map.
    pub fn of(proposal: &Proposal, budget: &Budget) -> Self {
        match proposal.mode() {
            Mode::Unit => {
                let mut ids: Vec<String> =
                    proposal.selected_ids(budget).into_iter().map(String::from).collect();
                ids.sort();
                BudgetDoc::Ids(ids)
            }
            Mode::Quantitative => BudgetDoc::Counts(
                proposal
                    .describe(budget)
                    .into_iter()
                    .map(|(id, k)| (id.to_string(), k))
                    .collect(),
            ),
        }
    }

    pub fn resolve(&self, proposal: &Proposal) -> Result<Budget> {
        match self {
            BudgetDoc::Ids(ids) => {
                let mut seen = BTreeSet::new();
                if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
                    return Err(Error::Format {
                        path: String::new(),
                        reason: format!("{dup:?} listed twice"),
                    });
                }
                proposal.budget_of(ids)
            }
            BudgetDoc::Counts(map) => proposal.budget(map.iter().map(|(id, k)| (id, *k))),
        }
    }
}

/// The canonical serialization of a budget.
pub fn emit_budget(proposal: &Proposal, budget: &Budget) -> String {
    to_canonical_json(&BudgetDoc::of(proposal, budget))
}

impl ProposalDoc {
    pub fn compile(&self) -> Result<Proposal> {
        if self.items.is_empty() {
            return Err(Error::Format {
                path: "items".into(),
                reason: "a proposal needs at least one item".into(),
            });
        }
        let items = self
            .items
            .iter()
            .enumerate()
            .map(|(i, doc)| doc.compile(self.mode).at(|| format!("items[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Proposal::new(self.mode, items)
    }
}

impl ItemDoc {
    fn compile(&self, mode: Mode) -> Result<Item> {
        let bad = |reason: &str| Error::InvalidItem {
            id: self.id.clone(),
            reason: reason.into(),
        };
        match mode {
            Mode::Unit => match (self.cost, &self.quantity, &self.cum_cost, &self.unit_cost) {
                (Some(c), None, None, None) => Ok(Item::unit(self.id.as_str(), c)),
                (None, ..) => Err(bad("unit items need a cost")),
                _ => Err(bad("unit items take only an id and a cost")),
            },
            Mode::Quantitative => {
                if self.cost.is_some() {
                    return Err(bad("quantitative items take cum_cost or unit_cost, not cost"));
                }
                match (&self.cum_cost, self.unit_cost, self.quantity) {
                    (Some(table), None, q) => {
                        if q.is_some_and(|q| q != table.len() as u64) {
                            return Err(bad("quantity disagrees with the length of cum_cost"));
                        }
                        Ok(Item::with_table(self.id.as_str(), table.clone()))
                    }
                    (None, Some(c), Some(q)) => Ok(Item::per_unit(self.id.as_str(), q, c)),
                    (None, Some(_), None) => Err(bad("unit_cost needs a quantity")),
                    (Some(_), Some(_), _) => Err(bad("give cum_cost or unit_cost, not both")),
                    (None, None, _) => Err(bad("quantitative items need cum_cost or unit_cost")),
                }
            }
        }
    }
}

impl BallotDoc {
    pub fn compile(&self, proposal: &Proposal) -> Result<Ballot> {
        match (&self.linear, &self.partition, &self.partial) {
            (Some(order), None, None) => Ok(LinearOrder::new(proposal, order).at(|| "linear".into())?.into()),
            (None, Some(components), None) => {
                let resolved = components
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|e| match e {
                                EntryDoc::All(id) => {
                                    let i = proposal.require(id)?;
                                    Ok((id.as_str(), proposal.item(i).quantity()))
                                }
                                EntryDoc::Copies(id, k) => Ok((id.as_str(), *k)),
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
                    .at(|| "partition".into())?;
                Ok(OrderedPartition::new(proposal, resolved)
                    .at(|| "partition".into())?
                    .into())
            }
            (None, None, Some(edges)) => Ok(PartialOrder::new(
                proposal,
                edges.iter().map(|[a, b]| (a.as_str(), b.as_str())),
            )
            .at(|| "partial".into())?
            .into()),
            _ => Err(Error::Format {
                path: String::new(),
                reason: "a ballot needs exactly one of linear, partition or partial".into(),
            }),
        }
    }
}

/// Compiles ballots into a profile, rejecting repeated voter ids.
pub fn compile_profile(proposal: &Proposal, ballots: &[BallotDoc]) -> Result<Profile> {
    let mut voters = BTreeSet::new();
    let mut out = Vec::with_capacity(ballots.len());
    for (i, doc) in ballots.iter().enumerate() {
        if let Some(v) = &doc.voter {
            if !voters.insert(v.as_str()) {
                return Err(Error::Format {
                    path: format!("[{i}].voter"),
                    reason: format!("voter {v:?} has more than one ballot"),
                });
            }
        }
        out.push(doc.compile(proposal).at(|| format!("[{i}]"))?);
    }
    Profile::new(out)
}

fn prefix(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Format { path: p, reason } => Error::Format {
            path: join(path, &p),
            reason,
        },
        Error::At { path: p, source } => Error::At {
            path: join(path, &p),
            source,
        },
        other => other.at(path),
    }
}

fn join(outer: &str, inner: &str) -> String {
    if inner.is_empty() {
        outer.to_string()
    } else if inner.starts_with('[') {
        format!("{outer}{inner}")
    } else {
        format!("{outer}.{inner}")
    }
}

impl ElectionFile {
    pub fn to_canonical_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn options(&self) -> PruningOptions {
        PruningOptions {
            tie_break: self.tie_break.unwrap_or_default(),
            exact_knapsack: self.exact_knapsack,
        }
    }

    /// Validates ids, ballots and budgets against the proposal.
    pub fn compile(&self) -> Result<Election> {
        let (proposal, hierarchy_sections) = match (&self.proposal, &self.sections) {
            (Some(p), None) => (p.compile().map_err(prefix("proposal"))?, None),
            (None, Some(sections)) => {
                let sections = self.compile_sections(sections)?;
                (union_proposal(&sections)?, Some(sections))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Format {
                    path: "sections".into(),
                    reason: "give either a proposal or sections, not both".into(),
                })
            }
            (None, None) => {
                return Err(Error::Format {
                    path: "proposal".into(),
                    reason: "missing proposal".into(),
                })
            }
        };
        let profile = compile_profile(&proposal, &self.ballots).map_err(prefix("ballots"))?;
        let prev = match &self.previous_budget {
            Some(doc) => doc.resolve(&proposal).map_err(prefix("previous_budget"))?,
            None => proposal.empty_budget(),
        };
        let hierarchy = match hierarchy_sections {
            None => {
                if self.consolidation_ballots.is_some() {
                    return Err(Error::Format {
                        path: "consolidation_ballots".into(),
                        reason: "only meaningful with sections".into(),
                    });
                }
                None
            }
            Some((sections, prevs)) => {
                Some(self.compile_hierarchy(&proposal, &profile, &prev, sections, prevs)?)
            }
        };
        Ok(Election {
            proposal,
            profile,
            limit: self.limit,
            prev,
            options: self.options(),
            hierarchy,
        })
    }

    #[allow(clippy::type_complexity)]
    fn compile_sections(
        &self,
        docs: &[SectionDoc],
    ) -> Result<(Vec<Section>, BTreeMap<String, Option<Budget>>)> {
        if docs.is_empty() {
            return Err(Error::Format {
                path: "sections".into(),
                reason: "at least one section is required".into(),
            });
        }
        let mut sections = Vec::new();
        let mut prevs = BTreeMap::new();
        for (i, doc) in docs.iter().enumerate() {
            let path = format!("sections[{i}]");
            let proposal = doc
                .proposal
                .compile()
                .map_err(prefix(&format!("{path}.proposal")))?;
            let profile = compile_profile(&proposal, &doc.ballots)
                .map_err(prefix(&format!("{path}.ballots")))?;
            let prev = doc
                .previous_budget
                .as_ref()
                .map(|b| b.resolve(&proposal))
                .transpose()
                .map_err(prefix(&format!("{path}.previous_budget")))?;
            prevs.insert(doc.id.clone(), prev);
            sections.push(Section {
                id: doc.id.clone(),
                proposal,
                profile,
            });
        }
        check_sections(&sections)?;
        Ok((sections, prevs))
    }

    fn compile_hierarchy(
        &self,
        union: &Proposal,
        profile: &Profile,
        prev: &Budget,
        sections: Vec<Section>,
        explicit_prevs: BTreeMap<String, Option<Budget>>,
    ) -> Result<Hierarchy> {
        // Sections without their own previous budget inherit the top-level one.
        let prevs = sections
            .iter()
            .map(|s| {
                let own = explicit_prevs.get(&s.id).cloned().flatten();
                let budget = own.unwrap_or_else(|| restrict(union, prev, &s.proposal));
                (s.id.clone(), budget)
            })
            .collect();
        let consolidation = match &self.consolidation_ballots {
            Some(docs) => ConsolidationBallots::Explicit(
                docs.iter()
                    .enumerate()
                    .map(|(i, d)| match (&d.partition, &d.linear, &d.partial) {
                        (Some(c), None, None) => Ok(c.clone()),
                        _ => Err(Error::Format {
                            path: format!("consolidation_ballots[{i}]"),
                            reason: "consolidation ballots must be partitions over section ids".into(),
                        }),
                    })
                    .collect::<Result<_>>()?,
            ),
            None => {
                let orders = self
                    .ballots
                    .iter()
                    .map(|b| b.linear.clone())
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::Format {
                        path: "consolidation_ballots".into(),
                        reason: "required unless every top-level ballot is a linear order".into(),
                    })?;
                debug_assert_eq!(orders.len(), profile.len());
                ConsolidationBallots::Mirror(orders)
            }
        };
        Ok(Hierarchy {
            sections,
            prevs,
            consolidation,
        })
    }
}

/// All section items in one proposal, for the direct (flat) election.
fn union_proposal(sections: &(Vec<Section>, BTreeMap<String, Option<Budget>>)) -> Result<Proposal> {
    let sections = &sections.0;
    let mode = sections[0].proposal.mode();
    if let Some(i) = sections.iter().position(|s| s.proposal.mode() != mode) {
        return Err(Error::Format {
            path: format!("sections[{i}].proposal.mode"),
            reason: format!("all sections must share one mode ({mode})"),
        });
    }
    let items = sections
        .iter()
        .flat_map(|s| s.proposal.items().iter().cloned())
        .collect();
    Proposal::new(mode, items)
}

fn restrict(from: &Proposal, budget: &Budget, to: &Proposal) -> Budget {
    let entries: Vec<(&str, u64)> = to
        .items()
        .iter()
        .filter_map(|it| {
            let i = from.index_of(it.id().as_str())?;
            Some((it.id().as_str(), budget.count(i)))
        })
        .collect();
    to.budget(entries).expect("same items, same quantities")
}
