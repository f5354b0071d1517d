//! Modularity, Louvain and Girvan–Newman over undirected weighted graphs.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

/// Undirected weighted graph on nodes `0..n` without self-loops.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<BTreeMap<usize, f64>>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        Self {
            adj: vec![BTreeMap::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Adds `w` to the weight of edge `{u, v}`. Self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) {
        if u == v {
            return;
        }
        *self.adj[u].entry(v).or_insert(0.0) += w;
        *self.adj[v].entry(u).or_insert(0.0) += w;
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[u].iter().map(|(&v, &w)| (v, w))
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, m)| m.iter().filter(move |(&v, _)| u < v).map(move |(&v, &w)| (u, v, w)))
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.adj[u].values().sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Removes one unit of weight from `{u, v}`, dropping the edge once
    /// nothing positive is left.
    fn remove_unit(&mut self, u: usize, v: usize) {
        let w = self.adj[u].get(&v).copied().unwrap_or(0.0) - 1.0;
        if w > 1e-12 {
            self.adj[u].insert(v, w);
            self.adj[v].insert(u, w);
        } else {
            self.adj[u].remove(&v);
            self.adj[v].remove(&u);
        }
    }
}

/// `Q = Σ_c (in_c / m − (deg_c / 2m)²)`; 0 for a graph without edges.
pub fn modularity(g: &WeightedGraph, labels: &[usize]) -> f64 {
    let m = g.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let mut inside: BTreeMap<usize, f64> = BTreeMap::new();
    let mut degree: BTreeMap<usize, f64> = BTreeMap::new();
    for (u, v, w) in g.edges() {
        if labels[u] == labels[v] {
            *inside.entry(labels[u]).or_insert(0.0) += w;
        }
    }
    for (u, &c) in labels.iter().enumerate() {
        *degree.entry(c).or_insert(0.0) += g.degree(u);
    }
    degree
        .iter()
        .map(|(c, d)| {
            let a = d / (2.0 * m);
            inside.get(c).copied().unwrap_or(0.0) / m - a * a
        })
        .sum()
}

/// Relabels communities 0.. in order of their smallest member.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Members of each community, communities ordered by smallest member.
pub fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let canon = canonical(labels);
    let k = canon.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (node, &c) in canon.iter().enumerate() {
        out[c].push(node);
    }
    out
}

const GAIN_EPSILON: f64 = 1e-12;
const MAX_PASSES: usize = 1000;

/// One aggregation level: weights between super-nodes plus internal weight.
struct Level {
    adj: Vec<BTreeMap<usize, f64>>,
    self_weight: Vec<f64>,
}

impl Level {
    fn degree(&self, u: usize) -> f64 {
        self.adj[u].values().sum::<f64>() + 2.0 * self.self_weight[u]
    }

    /// Local-move phase; returns per-node community labels and whether any
    /// node moved.
    fn local_moves(&self, m: f64, start: Vec<usize>) -> (Vec<usize>, bool) {
        let n = self.adj.len();
        let mut comm = start;
        let degrees: Vec<f64> = (0..n).map(|u| self.degree(u)).collect();
        let mut tot = vec![0.0; n];
        for u in 0..n {
            tot[comm[u]] += degrees[u];
        }
        let mut moved_any = false;
        for _ in 0..MAX_PASSES {
            let mut moved = false;
            for u in 0..n {
                let current = comm[u];
                let k = degrees[u];
                let mut links: BTreeMap<usize, f64> = BTreeMap::new();
                for (&v, &w) in &self.adj[u] {
                    *links.entry(comm[v]).or_insert(0.0) += w;
                }
                tot[current] -= k;
                let gain = |c: usize, tot: &[f64]| {
                    links.get(&c).copied().unwrap_or(0.0) - tot[c] * k / (2.0 * m)
                };
                let mut best = current;
                let mut best_gain = gain(current, &tot);
                for &c in links.keys() {
                    let g = gain(c, &tot);
                    if g > best_gain + GAIN_EPSILON {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k;
                if best != current {
                    comm[u] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (comm, moved_any)
    }

    fn aggregate(&self, labels: &[usize]) -> Level {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut adj = vec![BTreeMap::new(); k];
        let mut self_weight = vec![0.0; k];
        for (u, m) in self.adj.iter().enumerate() {
            self_weight[labels[u]] += self.self_weight[u];
            for (&v, &w) in m {
                if u < v {
                    let (a, b) = (labels[u], labels[v]);
                    if a == b {
                        self_weight[a] += w;
                    } else {
                        *adj[a].entry(b).or_insert(0.0) += w;
                        *adj[b].entry(a).or_insert(0.0) += w;
                    }
                }
            }
        }
        Level { adj, self_weight }
    }
}

/// Louvain community detection with a fixed ascending node visit order.
/// After the levels converge, single nodes of the original graph get one
/// more round of local moves against the final communities (multilevel
/// refinement); if that helps, aggregation resumes from the refined
/// partition. Returns a community label per node (canonical numbering).
pub fn louvain(g: &WeightedGraph) -> Vec<usize> {
    let n = g.len();
    let m = g.total_weight();
    if m == 0.0 {
        return (0..n).collect();
    }
    let base = Level {
        adj: g.adj.clone(),
        self_weight: vec![0.0; n],
    };
    let mut membership: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_PASSES {
        let mut level = base.aggregate(&membership);
        loop {
            let k = level.adj.len();
            let (labels, moved) = level.local_moves(m, (0..k).collect());
            if !moved {
                break;
            }
            let labels = canonical(&labels);
            for c in membership.iter_mut() {
                *c = labels[*c];
            }
            level = level.aggregate(&labels);
        }
        let before = modularity(g, &membership);
        let (refined, moved) = base.local_moves(m, membership.clone());
        let refined = canonical(&refined);
        if !moved || modularity(g, &refined) <= before + GAIN_EPSILON {
            break;
        }
        membership = refined;
    }
    canonical(&membership)
}

/// Connected-component labels.
fn components(g: &WeightedGraph) -> Vec<usize> {
    let n = g.len();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (v, _) in g.neighbors(u) {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Shortest-path edge betweenness over hop counts, keyed by `(u, v)` with
/// `u < v`. An edge of weight `w` stands for `w` parallel edges: it carries
/// `w` times the shortest paths, and the score returned is that of the
/// whole bundle.
pub fn edge_betweenness(g: &WeightedGraph) -> BTreeMap<(usize, usize), f64> {
    let n = g.len();
    let mut score: BTreeMap<(usize, usize), f64> = g.edges().map(|(u, v, _)| ((u, v), 0.0)).collect();
    for s in 0..n {
        let mut order = Vec::with_capacity(n);
        let mut preds: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for (v, w) in g.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u] * w;
                    preds[v].push((u, w));
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &(v, weight) in &preds[w] {
                let c = sigma[v] * weight / sigma[w] * (1.0 + delta[w]);
                let key = if v < w { (v, w) } else { (w, v) };
                *score.get_mut(&key).expect("edge present") += c;
                delta[v] += c;
            }
        }
    }
    // Each undirected pair was counted from both endpoints.
    for v in score.values_mut() {
        *v /= 2.0;
    }
    score
}

const BETWEENNESS_TIE: f64 = 1e-9;

/// Girvan–Newman divisive clustering on the multigraph a weighted graph
/// stands for. The parallel copy of highest betweenness is removed one at a
/// time (ties: smallest `(u, v)`); every split produces a
/// candidate partition, scored by modularity on the original graph.
/// Returns the candidate with `target` communities when given, else the
/// one of highest modularity (earliest on ties).
pub fn girvan_newman(g: &WeightedGraph, target: Option<usize>) -> Vec<usize> {
    dendrogram(g)
        .into_iter()
        .fold(None::<(Vec<usize>, f64, usize)>, |best, labels| {
            let count = labels.iter().max().map_or(0, |m| m + 1);
            let q = modularity(g, &labels);
            match (&best, target) {
                (None, _) => Some((labels, q, count)),
                (Some((_, _, best_count)), Some(t)) => {
                    if *best_count < t && count <= t {
                        Some((labels, q, count))
                    } else {
                        best
                    }
                }
                (Some((_, best_q, _)), None) => {
                    if q > *best_q + 1e-12 {
                        Some((labels, q, count))
                    } else {
                        best
                    }
                }
            }
        })
        .map(|(labels, _, _)| labels)
        .unwrap_or_default()
}

/// Every distinct component partition visited by Girvan–Newman, starting
/// with the components of `g` and ending with all singletons.
pub fn dendrogram(g: &WeightedGraph) -> Vec<Vec<usize>> {
    let mut work = g.clone();
    let mut levels = vec![canonical(&components(&work))];
    let mut count = count_of(&levels[0]);
    loop {
        let weights: BTreeMap<(usize, usize), f64> = work.edges().map(|(u, v, w)| ((u, v), w)).collect();
        let per_copy: Vec<((usize, usize), f64)> = edge_betweenness(&work)
            .into_iter()
            .map(|(e, s)| (e, s / weights[&e]))
            .collect();
        let Some(max) = per_copy.iter().map(|(_, s)| *s).reduce(f64::max) else {
            break;
        };
        let &((u, v), _) = per_copy
            .iter()
            .find(|(_, s)| *s >= max - BETWEENNESS_TIE)
            .expect("max exists");
        work.remove_unit(u, v);
        let labels = canonical(&components(&work));
        let c = count_of(&labels);
        if c != count {
            count = c;
            levels.push(labels);
        }
    }
    levels
}

fn count_of(labels: &[usize]) -> usize {
    labels.iter().copied().collect::<BTreeSet<_>>().len()
}
