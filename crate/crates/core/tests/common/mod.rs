//! Reference implementations and random instance generators shared by the
//! integration suites. Nothing here calls into the ranking or pruning code
//! under test.

#![allow(dead_code)]

use std::collections::BTreeMap;

use dembudget::{
    Ballot, Budget, Item, LinearOrder, OrderedPartition, PartialOrder, Profile, Proposal,
    TieBreakPolicy,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Linear,
    Partition,
    Partial,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub proposal: Proposal,
    pub profile: Profile,
    pub limit: u64,
    pub prev: Budget,
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

pub fn random_linear(rng: &mut ChaCha8Rng, p: &Proposal) -> Ballot {
    let mut order: Vec<&str> = p.items().iter().map(|it| it.id().as_str()).collect();
    order.shuffle(rng);
    LinearOrder::new(p, order).unwrap().into()
}

pub fn random_partition(rng: &mut ChaCha8Rng, p: &Proposal) -> Ballot {
    let mut order: Vec<&str> = p.items().iter().map(|it| it.id().as_str()).collect();
    order.shuffle(rng);
    let mut comps: Vec<Vec<&str>> = Vec::new();
    for id in order {
        if comps.is_empty() || rng.gen_bool(0.5) {
            comps.push(vec![id]);
        } else {
            comps.last_mut().unwrap().push(id);
        }
    }
    OrderedPartition::of_items(p, comps).unwrap().into()
}

pub fn random_partial(rng: &mut ChaCha8Rng, p: &Proposal) -> Ballot {
    let mut order: Vec<&str> = p.items().iter().map(|it| it.id().as_str()).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            if rng.gen_bool(0.4) {
                edges.push((order[i], order[j]));
            }
        }
    }
    PartialOrder::new(p, edges).unwrap().into()
}

pub fn random_ballot(rng: &mut ChaCha8Rng, p: &Proposal, kind: Kind) -> Ballot {
    match kind {
        Kind::Linear => random_linear(rng, p),
        Kind::Partition => random_partition(rng, p),
        Kind::Partial => random_partial(rng, p),
    }
}

pub fn random_subset(rng: &mut ChaCha8Rng, p: &Proposal) -> Budget {
    let chosen: Vec<&str> = p
        .items()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .map(|it| it.id().as_str())
        .collect();
    p.budget_of(chosen).unwrap()
}

/// Up to `max_items` unit items with costs 1–4, ℓ ≤ 8, 1–7 voters and a
/// random previous budget.
pub fn unit_instance(rng: &mut ChaCha8Rng, max_items: usize, kind: Kind) -> Instance {
    let n = rng.gen_range(1..=max_items);
    let proposal = Proposal::unit(ids(n).into_iter().map(|id| (id, rng.gen_range(1..=4)))).unwrap();
    let voters = rng.gen_range(1..=7);
    let ballots = (0..voters).map(|_| random_ballot(rng, &proposal, kind)).collect();
    let profile = Profile::new(ballots).unwrap();
    let limit = rng.gen_range(0..=8);
    let prev = random_subset(rng, &proposal);
    Instance {
        proposal,
        profile,
        limit,
        prev,
    }
}

pub fn random_kind(rng: &mut ChaCha8Rng) -> Kind {
    *[Kind::Linear, Kind::Partition, Kind::Partial].choose(rng).unwrap()
}

/// A quantitative partition: each item's copies cut into random chunks that
/// land in random components.
pub fn random_quant_partition(rng: &mut ChaCha8Rng, p: &Proposal, max_components: usize) -> OrderedPartition {
    let z = rng.gen_range(1..=max_components);
    let mut comps: Vec<Vec<(String, u64)>> = vec![Vec::new(); z];
    for it in p.items() {
        let mut left = it.quantity();
        while left > 0 {
            let chunk = if left == 1 { 1 } else { rng.gen_range(1..=left) };
            comps[rng.gen_range(0..z)].push((it.id().to_string(), chunk));
            left -= chunk;
        }
    }
    comps.retain(|c| !c.is_empty());
    OrderedPartition::new(p, comps).unwrap()
}

/// ≤ 3 items, quantities ≤ 4, ≤ 5 voters, non-decreasing cost tables.
pub fn quant_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(1..=3);
    let items = ids(n)
        .into_iter()
        .map(|id| {
            let q = rng.gen_range(1..=4);
            let mut acc = 0;
            let table = (0..q)
                .map(|_| {
                    acc += rng.gen_range(0..=4);
                    acc
                })
                .collect();
            Item::with_table(id, table)
        })
        .collect();
    let proposal = Proposal::quantitative(items).unwrap();
    let voters = rng.gen_range(1..=5);
    let ballots = (0..voters)
        .map(|_| random_quant_partition(rng, &proposal, 4).into())
        .collect();
    let profile = Profile::new(ballots).unwrap();
    let total = proposal.cost(&proposal.full_budget());
    let limit = rng.gen_range(0..=total + 2);
    let prev = proposal
        .budget(
            proposal
                .items()
                .iter()
                .map(|it| (it.id().as_str(), rng.gen_range(0..=it.quantity()))),
        )
        .unwrap();
    Instance {
        proposal,
        profile,
        limit,
        prev,
    }
}

/// Direct reading of the linear-order preference: something is gained, and
/// everything gained ranks above everything lost.
pub fn linear_prefers_reference(order: &[usize], b: &Budget, other: &Budget) -> bool {
    let pos = |i: usize| order.iter().position(|&x| x == i).unwrap();
    let gained: Vec<usize> = (0..order.len()).filter(|&i| b.contains(i) && !other.contains(i)).collect();
    let lost: Vec<usize> = (0..order.len()).filter(|&i| other.contains(i) && !b.contains(i)).collect();
    !gained.is_empty() && gained.iter().all(|&g| lost.iter().all(|&l| pos(g) < pos(l)))
}

// ---------------------------------------------------------------- graphs

/// Vertices in a source strongly connected component, by transitive closure.
pub fn schwartz_by_closure(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let mut reach = adj.to_vec();
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .filter(|&v| (0..n).all(|u| !reach[u][v] || reach[v][u]))
        .collect()
}

fn members(mask: u32, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&i| mask & (1 << i) != 0)
}

/// Union of the inclusion-minimal non-empty sets with no arc entering them.
pub fn schwartz_brute(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let undominated = |mask: u32| {
        members(mask, n).all(|s| (0..n).filter(|&t| mask & (1 << t) == 0).all(|t| !adj[t][s]))
    };
    let sets: Vec<u32> = (1..(1u32 << n)).filter(|&m| undominated(m)).collect();
    let minimal = sets
        .iter()
        .filter(|&&m| !sets.iter().any(|&o| o != m && o & m == o));
    let union = minimal.fold(0u32, |acc, &m| acc | m);
    members(union, n).collect()
}

/// Smallest non-empty set whose members all beat every outsider.
pub fn smith_brute(adj: &[Vec<bool>]) -> Vec<usize> {
    let n = adj.len();
    let dominant = |mask: u32| {
        members(mask, n).all(|s| (0..n).filter(|&t| mask & (1 << t) == 0).all(|t| adj[s][t]))
    };
    let best = (1..(1u32 << n))
        .filter(|&m| dominant(m))
        .min_by_key(|m| m.count_ones())
        .unwrap_or(0);
    members(best, n).collect()
}

// ------------------------------------------------------ unit expansion SBA

/// How a ballot places one copy: a rank for totally preordered ballots, or
/// a precedence closure for partial orders.
enum Placement {
    Ranks(Vec<usize>),
    Closure(Vec<Vec<bool>>),
}

fn placement(ballot: &Ballot, p: &Proposal, copies: &[(usize, u64)]) -> Placement {
    match ballot {
        Ballot::Linear(v) => {
            let pos: BTreeMap<usize, usize> = v.order().iter().enumerate().map(|(r, &i)| (i, r)).collect();
            Placement::Ranks(copies.iter().map(|(i, _)| pos[i]).collect())
        }
        Ballot::Partition(v) => {
            let ranks = copies
                .iter()
                .map(|&(item, j)| {
                    let mut seen = 0;
                    for (c, comp) in v.components().iter().enumerate() {
                        seen += comp.iter().filter(|(i, _)| *i == item).map(|(_, k)| k).sum::<u64>();
                        if seen >= j {
                            return c;
                        }
                    }
                    unreachable!("copy {j} of item {item} is not placed")
                })
                .collect();
            Placement::Ranks(ranks)
        }
        Ballot::Partial(v) => {
            let n = p.len();
            let mut reach = vec![vec![false; n]; n];
            for &(a, b) in v.edges() {
                reach[a][b] = true;
            }
            for k in 0..n {
                for i in 0..n {
                    if reach[i][k] {
                        for j in 0..n {
                            if reach[k][j] {
                                reach[i][j] = true;
                            }
                        }
                    }
                }
            }
            let m = copies.len();
            let mut above = vec![vec![false; m]; m];
            for (x, &(a, _)) in copies.iter().enumerate() {
                for (y, &(b, _)) in copies.iter().enumerate() {
                    above[x][y] = reach[a][b];
                }
            }
            Placement::Closure(above)
        }
    }
}

fn policy_cmp(p: &Proposal, tb: TieBreakPolicy, a: usize, b: usize) -> std::cmp::Ordering {
    let (x, y) = (p.item(a), p.item(b));
    match tb {
        TieBreakPolicy::Cost => (x.cost_of(1), x.id()).cmp(&(y.cost_of(1), y.id())),
        TieBreakPolicy::Index => a.cmp(&b),
        TieBreakPolicy::Id => x.id().cmp(y.id()),
    }
}

/// SBA on the proposal with every copy as its own vertex: the pseudo-polynomial
/// reference for ESBA. Returns the ranked copies and the budget.
pub fn expansion_sba(
    p: &Proposal,
    profile: &Profile,
    limit: u64,
    prev: &Budget,
    tb: TieBreakPolicy,
) -> (Vec<Vec<(usize, u64)>>, Budget) {
    let copies: Vec<(usize, u64)> = p
        .items()
        .iter()
        .enumerate()
        .flat_map(|(i, it)| (1..=it.quantity()).map(move |j| (i, j)))
        .collect();
    let m = copies.len();
    let mut wins = vec![vec![0usize; m]; m];
    for ballot in profile.ballots() {
        match placement(ballot, p, &copies) {
            Placement::Ranks(r) => {
                for x in 0..m {
                    for y in 0..m {
                        if r[x] < r[y] {
                            wins[x][y] += 1;
                        }
                    }
                }
            }
            Placement::Closure(above) => {
                for x in 0..m {
                    for y in 0..m {
                        if above[x][y] {
                            wins[x][y] += 1;
                        }
                    }
                }
            }
        }
    }
    let n = profile.len();
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut ranking = Vec::new();
    while !remaining.is_empty() {
        let adj: Vec<Vec<bool>> = remaining
            .iter()
            .map(|&x| remaining.iter().map(|&y| 2 * wins[x][y] > n).collect())
            .collect();
        let top: Vec<usize> = schwartz_by_closure(&adj).into_iter().map(|i| remaining[i]).collect();
        remaining.retain(|x| !top.contains(x));
        ranking.push(top.iter().map(|&x| copies[x]).collect::<Vec<_>>());
    }

    let mut counts = vec![0u64; p.len()];
    let mut spent = 0u64;
    for component in &ranking {
        let mut order = component.clone();
        order.sort_by(|&(a, j), &(b, k)| {
            let pa = j <= prev.count(a);
            let pb = k <= prev.count(b);
            pb.cmp(&pa)
                .then_with(|| policy_cmp(p, tb, a, b))
                .then(j.cmp(&k))
        });
        for (item, _) in order {
            let it = p.item(item);
            let held = counts[item];
            if held == it.quantity() {
                continue;
            }
            let extra = it.cost_of(held + 1) - it.cost_of(held);
            if spent + extra <= limit {
                spent += extra;
                counts[item] += 1;
            }
        }
    }
    let budget = p
        .budget(p.items().iter().zip(&counts).map(|(it, &k)| (it.id().as_str(), k)))
        .unwrap();
    (ranking, budget)
}
