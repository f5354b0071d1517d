//! The player interaction graph and its analytics.
//!
//! Every interaction behavior becomes one labeled, directed edge between two
//! players. Community detection works on the undirected collapse of that
//! multigraph (edge weight = number of interactions in either direction);
//! SCCs and max-flow work on the directed graph.
//!
//! The index-based algorithms live in [`community`], [`scc`] and [`flow`];
//! [`InteractionGraph`] maps player ids onto indices in ascending id order,
//! which fixes every tie-break.

pub mod community;
pub mod flow;
pub mod scc;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ids::*;
use crate::model::{BehaviorEvent, Timestamp};

pub use community::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Edge {
    pub source: PlayerId,
    pub target: PlayerId,
    pub label: String,
    pub event_id: EventId,
    pub at: Timestamp,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub project: Option<ProjectId>,
}

impl GraphFilter {
    fn accepts(&self, event: &BehaviorEvent, label: &str) -> bool {
        self.labels.as_ref().is_none_or(|l| l.contains(label))
            && self.from.is_none_or(|t| event.occurred_at >= t)
            && self.to.is_none_or(|t| event.occurred_at <= t)
            && self.project.as_ref().is_none_or(|p| *p == event.project)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Degrees {
    pub followers: usize,
    pub following: usize,
}

/// Disjoint communities covering every node, with their modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub communities: Vec<Vec<PlayerId>>,
    pub modularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MaxFlow {
    pub max_flow: f64,
    pub min_cut: Vec<CutEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEdge {
    pub source: PlayerId,
    pub target: PlayerId,
    pub capacity: f64,
}

/// Node-link document for visualization front ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLink {
    pub nodes: Vec<NodeLinkNode>,
    pub links: Vec<NodeLinkLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLinkNode {
    pub id: PlayerId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub community: Option<usize>,
    pub followers: usize,
    pub following: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeLinkLink {
    pub source: PlayerId,
    pub target: PlayerId,
    pub label: String,
    pub weight: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub nodes: BTreeSet<PlayerId>,
    pub edges: Vec<Edge>,
}

impl InteractionGraph {
    /// Builds the graph from the event log. Non-interaction events are
    /// ignored; interaction events whose endpoints are not in `players` are
    /// dropped.
    pub fn build<'a>(
        players: impl IntoIterator<Item = &'a PlayerId>,
        events: impl IntoIterator<Item = &'a BehaviorEvent>,
        filter: &GraphFilter,
    ) -> Self {
        let nodes: BTreeSet<PlayerId> = players.into_iter().cloned().collect();
        let edges = events
            .into_iter()
            .filter_map(|e| {
                let i = e.interaction.as_ref()?;
                let known = nodes.contains(&e.player) && nodes.contains(&i.target_player);
                (known && filter.accepts(e, &i.label)).then(|| Edge {
                    source: e.player.clone(),
                    target: i.target_player.clone(),
                    label: i.label.clone(),
                    event_id: e.event_id.clone(),
                    at: e.occurred_at,
                })
            })
            .collect();
        Self { nodes, edges }
    }

    fn require(&self, player: &str) -> Result<(), Error> {
        if self.nodes.contains(player) {
            Ok(())
        } else {
            Err(Error::UnknownPlayer(player.to_string()))
        }
    }

    /// Distinct counterparts on incoming and outgoing edges.
    pub fn degrees(&self, player: &str) -> Result<Degrees, Error> {
        self.require(player)?;
        let followers: BTreeSet<&PlayerId> = self
            .edges
            .iter()
            .filter(|e| e.target.as_str() == player && e.source.as_str() != player)
            .map(|e| &e.source)
            .collect();
        let following: BTreeSet<&PlayerId> = self
            .edges
            .iter()
            .filter(|e| e.source.as_str() == player && e.target.as_str() != player)
            .map(|e| &e.target)
            .collect();
        Ok(Degrees {
            followers: followers.len(),
            following: following.len(),
        })
    }

    fn node_list(&self) -> Vec<PlayerId> {
        self.nodes.iter().cloned().collect()
    }

    fn index_of(&self) -> BTreeMap<&PlayerId, usize> {
        self.nodes.iter().enumerate().map(|(i, p)| (p, i)).collect()
    }

    /// Undirected collapse with multiplicity weights; self-loops dropped.
    pub fn undirected(&self) -> WeightedGraph {
        let index = self.index_of();
        let mut g = WeightedGraph::new(self.nodes.len());
        for e in &self.edges {
            let (u, v) = (index[&e.source], index[&e.target]);
            if u != v {
                g.add_edge(u, v, 1.0);
            }
        }
        g
    }

    /// Deduplicated directed adjacency, sorted ascending.
    pub fn directed_adjacency(&self) -> Vec<Vec<usize>> {
        let index = self.index_of();
        let mut adj = alloc::vec![BTreeSet::new(); self.nodes.len()];
        for e in &self.edges {
            adj[index[&e.source]].insert(index[&e.target]);
        }
        adj.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    fn to_partition(&self, g: &WeightedGraph, labels: &[usize]) -> Partition {
        let nodes = self.node_list();
        let groups = community::groups(labels);
        Partition {
            modularity: community::modularity(g, labels),
            communities: groups
                .into_iter()
                .map(|members| members.into_iter().map(|i| nodes[i].clone()).collect())
                .collect(),
        }
    }

    pub fn louvain(&self) -> Partition {
        let g = self.undirected();
        let labels = community::louvain(&g);
        self.to_partition(&g, &labels)
    }

    pub fn girvan_newman(&self, target_communities: Option<usize>) -> Partition {
        let g = self.undirected();
        let labels = community::girvan_newman(&g, target_communities);
        self.to_partition(&g, &labels)
    }

    /// SCCs in reverse topological order of the condensation.
    pub fn tarjan_scc(&self) -> Vec<Vec<PlayerId>> {
        let nodes = self.node_list();
        scc::tarjan(&self.directed_adjacency())
            .into_iter()
            .map(|c| c.into_iter().map(|i| nodes[i].clone()).collect())
            .collect()
    }

    /// Max flow from `source` to `sink`. Edge capacity defaults to the
    /// number of parallel interactions; `overrides` replaces it per pair.
    pub fn edmonds_karp(
        &self,
        source: &str,
        sink: &str,
        overrides: &BTreeMap<(PlayerId, PlayerId), f64>,
    ) -> Result<MaxFlow, Error> {
        self.require(source)?;
        self.require(sink)?;
        if source == sink {
            return Err(Error::SameSourceSink);
        }
        let index = self.index_of();
        let nodes = self.node_list();
        let mut caps: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut pairs: BTreeMap<(&PlayerId, &PlayerId), f64> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.source != e.target) {
            *pairs.entry((&e.source, &e.target)).or_insert(0.0) += 1.0;
        }
        for ((s, t), count) in pairs {
            let cap = overrides
                .get(&(s.clone(), t.clone()))
                .copied()
                .unwrap_or(count);
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::InvalidCapacity);
            }
            caps.insert((index[s], index[t]), cap);
        }
        let result = flow::edmonds_karp(nodes.len(), &caps, index[&PlayerId::from(source)], index[&PlayerId::from(sink)]);
        Ok(MaxFlow {
            max_flow: result.value,
            min_cut: result
                .cut
                .into_iter()
                .map(|(u, v)| CutEdge {
                    source: nodes[u].clone(),
                    target: nodes[v].clone(),
                    capacity: caps[&(u, v)],
                })
                .collect(),
        })
    }

    pub fn node_link(&self, partition: Option<&Partition>) -> NodeLink {
        let community_of: BTreeMap<&PlayerId, usize> = partition
            .map(|p| {
                p.communities
                    .iter()
                    .enumerate()
                    .flat_map(|(c, members)| members.iter().map(move |m| (m, c)))
                    .collect()
            })
            .unwrap_or_default();
        let nodes = self
            .nodes
            .iter()
            .map(|id| {
                let d = self.degrees(id.as_str()).unwrap_or(Degrees {
                    followers: 0,
                    following: 0,
                });
                NodeLinkNode {
                    id: id.clone(),
                    community: community_of.get(id).copied(),
                    followers: d.followers,
                    following: d.following,
                }
            })
            .collect();
        let mut links: BTreeMap<(&PlayerId, &PlayerId, &str), usize> = BTreeMap::new();
        for e in &self.edges {
            *links.entry((&e.source, &e.target, e.label.as_str())).or_insert(0) += 1;
        }
        NodeLink {
            nodes,
            links: links
                .into_iter()
                .map(|((s, t, l), weight)| NodeLinkLink {
                    source: s.clone(),
                    target: t.clone(),
                    label: l.to_string(),
                    weight,
                })
                .collect(),
        }
    }
}
