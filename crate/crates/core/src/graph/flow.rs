//! Edmonds–Karp maximum flow with a witnessing minimum cut.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub value: f64,
    /// Saturated edges from the source side to the sink side.
    pub cut: Vec<(usize, usize)>,
}

/// Max flow from `s` to `t` over directed capacities `caps` on nodes `0..n`.
/// Augmenting paths are BFS-shortest with neighbors visited in ascending order.
pub fn edmonds_karp(n: usize, caps: &BTreeMap<(usize, usize), f64>, s: usize, t: usize) -> FlowResult {
    let mut residual: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (&(u, v), &c) in caps {
        if u == v {
            continue;
        }
        *residual[u].entry(v).or_insert(0.0) += c;
        residual[v].entry(u).or_insert(0.0);
    }
    let mut value = 0.0;
    loop {
        let parent = bfs(&residual, s);
        if parent[t].is_none() {
            break;
        }
        let mut bottleneck = f64::INFINITY;
        let mut v = t;
        while v != s {
            let u = parent[v].expect("on path");
            bottleneck = bottleneck.min(residual[u][&v]);
            v = u;
        }
        let mut v = t;
        while v != s {
            let u = parent[v].expect("on path");
            *residual[u].get_mut(&v).expect("forward arc") -= bottleneck;
            *residual[v].get_mut(&u).expect("reverse arc") += bottleneck;
            v = u;
        }
        value += bottleneck;
    }
    let parent = bfs(&residual, s);
    let reachable = |u: usize| u == s || parent[u].is_some();
    let cut = caps
        .iter()
        .filter(|(&(u, v), &c)| u != v && c > 0.0 && reachable(u) && !reachable(v))
        .map(|(&e, _)| e)
        .collect();
    FlowResult { value, cut }
}

fn bfs(residual: &[BTreeMap<usize, f64>], s: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; residual.len()];
    let mut seen = vec![false; residual.len()];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for (&v, &r) in &residual[u] {
            if r > 0.0 && !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                queue.push_back(v);
            }
        }
    }
    parent
}
