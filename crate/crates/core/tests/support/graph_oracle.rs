//! Brute-force graph oracles: exhaustive partition search for modularity,
//! transitive closure for SCCs, and s-t cut enumeration for max flow.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, TimeZone, Utc};
use gamify_core::graph::{GraphFilter, InteractionGraph};
use gamify_core::model::{BehaviorEvent, Interaction};
use gamify_core::PlayerId;
use rand::Rng;

/// Undirected weighted edge list with `u < v`.
pub type Edges = BTreeMap<(usize, usize), f64>;

/// Q = Σ_c (in_c / m − (deg_c / 2m)²).
pub fn modularity(n: usize, edges: &Edges, labels: &[usize]) -> f64 {
    let m: f64 = edges.values().sum();
    if m == 0.0 {
        return 0.0;
    }
    let mut inside = vec![0.0; n];
    let mut degree = vec![0.0; n];
    for (&(u, v), &w) in edges {
        degree[labels[u]] += w;
        degree[labels[v]] += w;
        if labels[u] == labels[v] {
            inside[labels[u]] += w;
        }
    }
    (0..n)
        .map(|c| inside[c] / m - (degree[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Visits every set partition of `0..n` as a restricted growth string.
pub fn for_each_partition(n: usize, mut f: impl FnMut(&[usize])) {
    fn go(i: usize, n: usize, max: usize, labels: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if i == n {
            f(labels);
            return;
        }
        for c in 0..=max {
            labels[i] = c;
            go(i + 1, n, max.max(c + 1), labels, f);
        }
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut labels = vec![0; n];
    go(1, n, 1, &mut labels, &mut f);
}

pub fn max_modularity(n: usize, edges: &Edges) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_partition(n, |labels| best = best.max(modularity(n, edges, labels)));
    best
}

/// SCCs via reachability closure, each sorted, as a set.
pub fn scc_closure(n: usize, arcs: &BTreeSet<(usize, usize)>) -> BTreeSet<Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        reach[i][i] = true;
    }
    for &(u, v) in arcs {
        reach[u][v] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

/// Minimum capacity over every cut separating `s` from `t`.
pub fn min_cut(n: usize, caps: &BTreeMap<(usize, usize), f64>, s: usize, t: usize) -> f64 {
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let in_s = |v: usize| mask & (1 << v) != 0;
        if !in_s(s) || in_s(t) {
            continue;
        }
        let cap: f64 = caps
            .iter()
            .filter(|(&(u, v), _)| in_s(u) && !in_s(v))
            .map(|(_, c)| *c)
            .sum();
        best = best.min(cap);
    }
    best
}

pub fn player(i: usize) -> PlayerId {
    PlayerId::new(format!("p{i}"))
}

pub fn interaction_event(k: usize, from: usize, to: usize, label: &str) -> BehaviorEvent {
    BehaviorEvent {
        event_id: format!("ev{k}").into(),
        behavior_type: "GSE_HELPS".into(),
        player: player(from),
        tool: "tool".into(),
        project: "prj".into(),
        occurred_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap() + Duration::minutes(k as i64),
        artifact_id: None,
        artifact_name: None,
        task_attrs: None,
        interaction: Some(Interaction {
            target_player: player(to),
            label: label.into(),
        }),
    }
}

/// A random interaction multigraph on `n ≤ 10` players (ids p0..p9 sort
/// like their indices). Parallel and reverse edges appear naturally.
pub fn random_graph(rng: &mut impl Rng, n: usize, density: f64, connected: bool) -> (InteractionGraph, Vec<(usize, usize)>) {
    assert!(n <= 10);
    let mut arcs = Vec::new();
    if connected {
        for v in 1..n {
            let u = rng.gen_range(0..v);
            if rng.gen_bool(0.5) {
                arcs.push((u, v));
            } else {
                arcs.push((v, u));
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(density) {
                arcs.push((u, v));
                if rng.gen_bool(0.15) {
                    arcs.push((u, v));
                }
            }
        }
    }
    let players: Vec<PlayerId> = (0..n).map(player).collect();
    let events: Vec<BehaviorEvent> = arcs
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| interaction_event(k, u, v, "Helps"))
        .collect();
    (InteractionGraph::build(&players, &events, &GraphFilter::default()), arcs)
}

pub fn undirected_weights(arcs: &[(usize, usize)]) -> Edges {
    let mut e = Edges::new();
    for &(u, v) in arcs {
        *e.entry((u.min(v), u.max(v))).or_insert(0.0) += 1.0;
    }
    e
}

fn labels_of(n: usize, communities: &[Vec<PlayerId>]) -> Vec<usize> {
    let mut labels = vec![usize::MAX; n];
    for (c, members) in communities.iter().enumerate() {
        for m in members {
            let i: usize = m.as_str()[1..].parse().unwrap();
            labels[i] = c;
        }
    }
    labels
}

#[derive(Debug, Default, Clone)]
pub struct GraphReport {
    pub graphs: usize,
    pub gn_exact: usize,
    pub gn_worst_gap: f64,
    pub louvain_worst_ratio: f64,
    pub louvain_within: usize,
    pub scc_checked: usize,
    pub flow_checked: usize,
    /// Girvan–Newman results below the brute-force maximum.
    pub gn_misses: Vec<String>,
    /// Louvain results below 0.9 × the brute-force maximum.
    pub louvain_misses: Vec<String>,
    /// Everything else: wrong SCCs, wrong flows, misreported modularity,
    /// or a Girvan–Newman pick that is not the best level of its own
    /// dendrogram.
    pub failures: Vec<String>,
}

/// Runs every graph oracle over `count` random graphs with 2..=8 nodes.
/// Nothing returns early so the caller can report how far off each
/// algorithm is.
pub fn run_graph_oracles(seed: u64, count: usize) -> GraphReport {
    let mut rng = super::rng(seed);
    let mut r = GraphReport {
        louvain_worst_ratio: f64::INFINITY,
        ..GraphReport::default()
    };
    for i in 0..count {
        let n = rng.gen_range(2..=8);
        let density = rng.gen_range(0.05..0.45);
        let (g, arcs) = random_graph(&mut rng, n, density, true);
        r.graphs += 1;

        // Communities.
        let w = undirected_weights(&arcs);
        let best = max_modularity(n, &w);
        let wg = g.undirected();
        let levels = gamify_core::graph::community::dendrogram(&wg);
        let best_level = levels
            .iter()
            .map(|l| modularity(n, &w, l))
            .fold(f64::NEG_INFINITY, f64::max);
        for (name, p) in [("girvan-newman", g.girvan_newman(None)), ("louvain", g.louvain())] {
            let labels = labels_of(n, &p.communities);
            if labels.contains(&usize::MAX) {
                r.failures.push(format!("graph {i}: {name} partition does not cover all nodes"));
                continue;
            }
            let recomputed = modularity(n, &w, &labels);
            if (recomputed - p.modularity).abs() > 1e-9 {
                r.failures.push(format!(
                    "graph {i}: {name} reports Q={} but the partition has Q={recomputed}",
                    p.modularity
                ));
            }
            if name == "girvan-newman" {
                if (recomputed - best_level).abs() > 1e-9 {
                    r.failures.push(format!(
                        "graph {i}: girvan-newman picked Q={recomputed}, its dendrogram reaches {best_level}"
                    ));
                }
                let gap = best - recomputed;
                r.gn_worst_gap = r.gn_worst_gap.max(gap);
                if gap <= 1e-9 {
                    r.gn_exact += 1;
                } else {
                    r.gn_misses.push(format!("graph {i} (n={n}, arcs={arcs:?}): girvan-newman Q={recomputed}, max {best}"));
                }
            } else {
                let ratio = if best.abs() < 1e-12 { 1.0 } else { recomputed / best };
                r.louvain_worst_ratio = r.louvain_worst_ratio.min(ratio);
                if recomputed < 0.9 * best - 1e-12 {
                    r.louvain_misses.push(format!("graph {i} (n={n}, arcs={arcs:?}): louvain Q={recomputed}, max {best}"));
                } else {
                    r.louvain_within += 1;
                }
            }
        }

        // SCCs on a fresh, possibly disconnected digraph.
        let dn = rng.gen_range(1..=7);
        let (dg, darcs) = random_graph(&mut rng, dn, 0.25, false);
        let arcset: BTreeSet<(usize, usize)> = darcs.iter().copied().collect();
        let want = scc_closure(dn, &arcset);
        let got_ids = dg.tarjan_scc();
        let got: Vec<Vec<usize>> = got_ids
            .iter()
            .map(|c| c.iter().map(|p| p.as_str()[1..].parse().unwrap()).collect())
            .collect();
        let got_set: BTreeSet<Vec<usize>> = got.iter().cloned().collect();
        if got_set != want || got.len() != want.len() {
            r.failures.push(format!("digraph {i}: tarjan {got:?}, closure oracle {want:?}"));
        }
        let comp_of: BTreeMap<usize, usize> = got
            .iter()
            .enumerate()
            .flat_map(|(c, m)| m.iter().map(move |&v| (v, c)))
            .collect();
        for &(u, v) in &arcset {
            if comp_of[&u] < comp_of[&v] {
                r.failures.push(format!("digraph {i}: arc {u}->{v} breaks reverse topological order"));
            }
        }
        r.scc_checked += 1;

        // Max flow with random integer capacities on the same digraph.
        if dn >= 2 {
            let s = 0;
            let t = dn - 1;
            let mut overrides = BTreeMap::new();
            let mut caps: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for &(u, v) in &arcset {
                let c = f64::from(rng.gen_range(1..=9u32));
                overrides.insert((player(u), player(v)), c);
                caps.insert((u, v), c);
            }
            match dg.edmonds_karp(player(s).as_str(), player(t).as_str(), &overrides) {
                Ok(flow) => {
                    let want = min_cut(dn, &caps, s, t);
                    let cut: f64 = flow.min_cut.iter().map(|e| e.capacity).sum();
                    if flow.max_flow != want || cut != flow.max_flow {
                        r.failures.push(format!(
                            "digraph {i}: max flow {} / cut {cut}, brute-force min cut {want}",
                            flow.max_flow
                        ));
                    }
                }
                Err(e) => r.failures.push(format!("digraph {i}: edmonds-karp failed: {e}")),
            }
            r.flow_checked += 1;
        }
    }
    r
}
