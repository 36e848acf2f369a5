//! Majority graphs over items (or copy ranges of quantitative items) and the
//! Schwartz and Smith tournament solutions.

use std::fmt::Write as _;

use crate::ballot::{Ballot, Profile};
use crate::error::{Error, Result};
use crate::model::{Mode, Proposal};

/// A dense directed graph on vertices `0..n` without self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    adj: Vec<bool>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Digraph::new(n);
        for (u, w) in arcs {
            g.add_arc(u, w);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn add_arc(&mut self, u: usize, w: usize) {
        assert!(u < self.n && w < self.n, "arc ({u},{w}) out of range");
        if u != w {
            self.adj[u * self.n + w] = true;
        }
    }

    pub fn has_arc(&self, u: usize, w: usize) -> bool {
        self.adj[u * self.n + w]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            (0..self.n)
                .filter(move |&w| self.has_arc(u, w))
                .map(move |w| (u, w))
        })
    }

    pub fn arc_count(&self) -> usize {
        self.adj.iter().filter(|&&a| a).count()
    }

    /// The subgraph induced by `keep`; vertex `i` of the result is `keep[i]`.
    pub fn induced(&self, keep: &[usize]) -> Digraph {
        let mut g = Digraph::new(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            for (j, &w) in keep.iter().enumerate() {
                if self.has_arc(u, w) {
                    g.adj[i * g.n + j] = true;
                }
            }
        }
        g
    }

    /// Adds both arcs between every pair that has neither.
    pub fn completed_with_ties(&self) -> Digraph {
        let mut g = self.clone();
        for u in 0..self.n {
            for w in 0..self.n {
                if u != w && !self.has_arc(u, w) && !self.has_arc(w, u) {
                    g.adj[u * self.n + w] = true;
                }
            }
        }
        g
    }

    /// Strongly connected components in reverse topological order of the
    /// condensation (sinks first). Iterative Tarjan.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        const UNSEEN: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNSEEN; n];
        let mut low = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut frames: Vec<(usize, usize)> = Vec::new();
        let mut components = Vec::new();
        let mut next = 0;

        for root in 0..n {
            if index[root] != UNSEEN {
                continue;
            }
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;
            frames.push((root, 0));

            while let Some(&(v, mut scan)) = frames.last() {
                let mut child = None;
                while scan < n {
                    let w = scan;
                    scan += 1;
                    if !self.has_arc(v, w) {
                        continue;
                    }
                    if index[w] == UNSEEN {
                        child = Some(w);
                        break;
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                }
                frames.last_mut().expect("non-empty").1 = scan;
                if let Some(w) = child {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                    continue;
                }
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("v is on the stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
        components
    }

    /// Minimal vertex sets receiving no arc from outside: the strongly
    /// connected components with no incoming arcs in the condensation.
    pub fn schwartz_components(&self) -> Vec<Vec<usize>> {
        let sccs = self.strongly_connected_components();
        let mut comp_of = vec![0; self.n];
        for (c, members) in sccs.iter().enumerate() {
            for &v in members {
                comp_of[v] = c;
            }
        }
        let mut entered = vec![false; sccs.len()];
        for (u, w) in self.arcs() {
            if comp_of[u] != comp_of[w] {
                entered[comp_of[w]] = true;
            }
        }
        let mut out: Vec<Vec<usize>> = sccs
            .into_iter()
            .zip(entered)
            .filter(|(_, e)| !e)
            .map(|(c, _)| c)
            .collect();
        out.sort();
        out
    }

    /// Union of the Schwartz components, sorted. Empty only for the empty graph.
    pub fn schwartz_set(&self) -> Vec<usize> {
        let mut set: Vec<usize> = self.schwartz_components().into_iter().flatten().collect();
        set.sort_unstable();
        set
    }

    /// Smallest prefix of the condensation's topological order whose members
    /// each have an arc to every vertex outside it. On tournaments this is the
    /// Smith set.
    pub fn smith_set(&self) -> Vec<usize> {
        let mut order = self.strongly_connected_components();
        order.reverse();
        let mut inside = vec![false; self.n];
        let mut set = Vec::new();
        for comp in order {
            for &v in &comp {
                inside[v] = true;
            }
            set.extend(comp);
            let beats_all = set.iter().all(|&x| {
                (0..self.n).all(|y| inside[y] || self.has_arc(x, y))
            });
            if beats_all {
                break;
            }
        }
        set.sort_unstable();
        set
    }
}

/// A majority-graph vertex: copies `first..=last` of an item. Unit-mode
/// vertices are always `1..=1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexKey {
    pub item: usize,
    pub first: u64,
    pub last: u64,
}

impl VertexKey {
    pub fn whole(item: usize) -> Self {
        VertexKey {
            item,
            first: 1,
            last: 1,
        }
    }

    pub fn copies(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn label(&self, proposal: &Proposal) -> String {
        let id = proposal.item(self.item).id();
        if proposal.mode() == Mode::Unit {
            id.to_string()
        } else {
            format!("{id}[{}..{}]", self.first, self.last)
        }
    }
}

/// Per item, the sorted union of every ballot's cumulative copy boundaries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitPoints {
    per_item: Vec<Vec<u64>>,
}

impl SplitPoints {
    pub fn points(&self, item: usize) -> &[u64] {
        &self.per_item[item]
    }

    /// The copy-range vertices, grouped by item in proposal order.
    pub fn vertices(&self) -> Vec<VertexKey> {
        let mut out = Vec::new();
        for (item, points) in self.per_item.iter().enumerate() {
            let mut first = 1;
            for &p in points {
                out.push(VertexKey {
                    item,
                    first,
                    last: p,
                });
                first = p + 1;
            }
        }
        out
    }
}

/// Merges each ballot's cumulative copy boundaries per item. Every item
/// always ends at its full quantity, so an empty profile gives one vertex
/// per item.
pub fn split_points(proposal: &Proposal, profile: &Profile) -> Result<SplitPoints> {
    let mut per_item: Vec<Vec<u64>> = proposal.items().iter().map(|it| vec![it.quantity()]).collect();
    for ballot in profile.ballots() {
        let Ballot::Partition(v) = ballot else {
            if proposal.mode() == Mode::Quantitative {
                return Err(Error::UnsupportedBallot {
                    kind: ballot.kind(),
                    mode: proposal.mode(),
                });
            }
            continue;
        };
        for (item, points) in per_item.iter_mut().enumerate() {
            let bounds = v.boundaries(item);
            let q = proposal.item(item).quantity();
            if bounds.last().map(|&(_, k)| k) != Some(q) {
                return Err(Error::InvalidBallot(format!(
                    "copies of {:?} do not sum to {q}",
                    proposal.item(item).id().as_str()
                )));
            }
            points.extend(bounds.into_iter().map(|(_, k)| k));
        }
    }
    for points in &mut per_item {
        points.sort_unstable();
        points.dedup();
    }
    Ok(SplitPoints { per_item })
}

/// The strict majority graph: arc `(u, w)` when strictly more than half of
/// the ballots rank `u` above `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MajorityGraph {
    vertices: Vec<VertexKey>,
    graph: Digraph,
}

impl MajorityGraph {
    pub fn new(vertices: Vec<VertexKey>, graph: Digraph) -> Self {
        assert_eq!(vertices.len(), graph.len());
        MajorityGraph { vertices, graph }
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn graph(&self) -> &Digraph {
        &self.graph
    }

    pub fn vertex_index(&self, key: &VertexKey) -> Option<usize> {
        self.vertices.iter().position(|k| k == key)
    }

    pub fn has_arc(&self, u: &VertexKey, w: &VertexKey) -> bool {
        match (self.vertex_index(u), self.vertex_index(w)) {
            (Some(i), Some(j)) => self.graph.has_arc(i, j),
            _ => false,
        }
    }

    /// Adds both arcs for every pair the strict graph leaves untied.
    pub fn weak(&self) -> MajorityGraph {
        MajorityGraph {
            vertices: self.vertices.clone(),
            graph: self.graph.completed_with_ties(),
        }
    }

    pub fn schwartz_components(&self) -> Vec<Vec<VertexKey>> {
        self.graph
            .schwartz_components()
            .into_iter()
            .map(|c| self.keys(&c))
            .collect()
    }

    pub fn schwartz_set(&self) -> Vec<VertexKey> {
        self.keys(&self.graph.schwartz_set())
    }

    pub fn smith_set(&self) -> Vec<VertexKey> {
        self.keys(&self.graph.smith_set())
    }

    pub fn keys(&self, indices: &[usize]) -> Vec<VertexKey> {
        indices.iter().map(|&i| self.vertices[i]).collect()
    }

    /// Debug export, one `u w` arc per line.
    pub fn to_arc_list(&self, proposal: &Proposal) -> String {
        let mut out = String::new();
        for (u, w) in self.graph.arcs() {
            let _ = writeln!(
                out,
                "{} {}",
                self.vertices[u].label(proposal),
                self.vertices[w].label(proposal)
            );
        }
        out
    }
}

/// Builds the strict majority graph. Quantitative proposals get one vertex
/// per copy range between consecutive split points.
pub fn build_majority_graph(proposal: &Proposal, profile: &Profile) -> Result<MajorityGraph> {
    let vertices = match proposal.mode() {
        Mode::Unit => (0..proposal.len()).map(VertexKey::whole).collect(),
        Mode::Quantitative => split_points(proposal, profile)?.vertices(),
    };
    let n = vertices.len();
    let mut tally = vec![0usize; n * n];
    for ballot in profile.ballots() {
        match ballot {
            Ballot::Partial(v) => {
                for (i, a) in vertices.iter().enumerate() {
                    for (j, b) in vertices.iter().enumerate() {
                        if v.precedes(a.item, b.item) {
                            tally[i * n + j] += 1;
                        }
                    }
                }
            }
            _ => {
                let rank = vertex_ranks(proposal, ballot, &vertices)?;
                for i in 0..n {
                    for j in 0..n {
                        if rank[i] < rank[j] {
                            tally[i * n + j] += 1;
                        }
                    }
                }
            }
        }
    }
    let voters = profile.len();
    let mut graph = Digraph::new(n);
    for i in 0..n {
        for j in 0..n {
            if 2 * tally[i * n + j] > voters {
                graph.add_arc(i, j);
            }
        }
    }
    Ok(MajorityGraph { vertices, graph })
}

/// Rank of each vertex in a linear or partition ballot (lower is better).
/// Every copy of a vertex must sit in one ballot component.
fn vertex_ranks(proposal: &Proposal, ballot: &Ballot, vertices: &[VertexKey]) -> Result<Vec<usize>> {
    match ballot {
        Ballot::Linear(v) => {
            let mut pos = vec![0; proposal.len()];
            for (r, &item) in v.order().iter().enumerate() {
                pos[item] = r;
            }
            Ok(vertices.iter().map(|k| pos[k.item]).collect())
        }
        Ballot::Partition(v) => vertices
            .iter()
            .map(|k| {
                let first = v.component_of_copy(k.item, k.first);
                let last = v.component_of_copy(k.item, k.last);
                match (first, last) {
                    (Some(a), Some(b)) if a == b => Ok(a),
                    _ => Err(Error::InvalidBallot(format!(
                        "ballot splits vertex {}",
                        k.label(proposal)
                    ))),
                }
            })
            .collect(),
        Ballot::Partial(_) => unreachable!("partial ballots tallied by precedence"),
    }
}
