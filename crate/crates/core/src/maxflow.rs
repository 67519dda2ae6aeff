//! Dinic max-flow on integer capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i64,
}

/// Flow network with paired arcs: arc `2i` and its reverse `2i + 1`.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
    original: Vec<i64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork { head: vec![Vec::new(); nodes], arcs: Vec::new(), original: Vec::new() }
    }

    /// Adds `u -> v` with capacity `cap` and `v -> u` with capacity
    /// `reverse_cap`; returns the id of the forward arc.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64, reverse_cap: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to: v, cap });
        self.arcs.push(Arc { to: u, cap: reverse_cap });
        self.original.push(cap);
        self.original.push(reverse_cap);
        self.head[u].push(id);
        self.head[v].push(id + 1);
        id
    }

    /// Net flow along arc `id` in its forward direction.
    pub fn flow(&self, id: usize) -> i64 {
        self.original[id] - self.arcs[id].cap
    }

    pub fn residual(&self, id: usize) -> i64 {
        self.arcs[id].cap
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        let mut level = vec![0usize; self.head.len()];
        let mut next = vec![0usize; self.head.len()];
        while self.bfs(s, t, &mut level) {
            next.iter_mut().for_each(|x| *x = 0);
            loop {
                let pushed = self.dfs(s, t, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [usize]) -> bool {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.head[u] {
                let arc = &self.arcs[id];
                if arc.cap > 0 && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        level[t] != usize::MAX
    }

    fn dfs(&mut self, u: usize, t: usize, limit: i64, level: &[usize], next: &mut [usize]) -> i64 {
        if u == t {
            return limit;
        }
        while next[u] < self.head[u].len() {
            let id = self.head[u][next[u]];
            let (to, cap) = (self.arcs[id].to, self.arcs[id].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let pushed = self.dfs(to, t, limit.min(cap), level, next);
                if pushed > 0 {
                    self.arcs[id].cap -= pushed;
                    self.arcs[id ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Nodes reachable from `s` along arcs with positive residual capacity.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.head.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &id in &self.head[u] {
                let arc = &self.arcs[id];
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    stack.push(arc.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        let mut net = FlowNetwork::new(6);
        net.add_edge(0, 1, 10, 0);
        net.add_edge(0, 2, 10, 0);
        net.add_edge(1, 3, 4, 0);
        net.add_edge(1, 4, 8, 0);
        net.add_edge(2, 4, 9, 0);
        net.add_edge(3, 5, 10, 0);
        net.add_edge(4, 3, 6, 0);
        net.add_edge(4, 5, 10, 0);
        assert_eq!(net.max_flow(0, 5), 19);
    }

    #[test]
    fn undirected_arc_pair() {
        let mut net = FlowNetwork::new(3);
        net.add_edge(0, 1, 5, 0);
        let mid = net.add_edge(2, 1, 3, 3);
        net.add_edge(2, 0, 0, 0);
        assert_eq!(net.max_flow(0, 2), 3);
        assert_eq!(net.flow(mid), -3);
        assert_eq!(net.residual(mid), 6);
        let cut = net.reachable_from(0);
        assert_eq!(cut, vec![true, true, false]);
    }

    #[test]
    fn disconnected_sink() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, 10, 0);
        net.add_edge(2, 3, 5, 0);
        assert_eq!(net.max_flow(0, 3), 0);
    }
}
