//! Max-flow (Dinic) and min-cost flow (successive shortest paths) on small
//! integer-capacity networks. Both are deterministic: arcs are explored in
//! insertion order.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: i64,
    cost: f64,
}

#[derive(Clone, Debug)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

/// Handle to an arc added to a [`FlowNetwork`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArcId(usize);

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: i64) -> ArcId {
        self.add_arc_with_cost(from, to, cap, 0.0)
    }

    pub fn add_arc_with_cost(&mut self, from: usize, to: usize, cap: i64, cost: f64) -> ArcId {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        ArcId(id)
    }

    /// Units of flow currently on a forward arc.
    pub fn flow(&self, arc: ArcId) -> i64 {
        self.arcs[arc.0 ^ 1].cap
    }

    pub fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let n = self.out.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &a in &self.out[u] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && level[arc.to] == usize::MAX {
                        level[arc.to] = level[u] + 1;
                        queue.push_back(arc.to);
                    }
                }
            }
            if level[sink] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(source, sink, i64::MAX, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        limit: i64,
        level: &[usize],
        next: &mut [usize],
    ) -> i64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.out[u].len() {
            let a = self.out[u][next[u]];
            let (to, cap) = (self.arcs[a].to, self.arcs[a].cap);
            if cap > 0 && level[to] == level[u] + 1 {
                let pushed = self.augment(to, sink, limit.min(cap), level, next);
                if pushed > 0 {
                    self.arcs[a].cap -= pushed;
                    self.arcs[a ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0
    }

    /// Sends as much flow as possible at minimum total cost. Returns
    /// `(flow, cost)`. Arc costs must be non-negative.
    pub fn min_cost_max_flow(&mut self, source: usize, sink: usize) -> (i64, f64) {
        let n = self.out.len();
        let (mut flow, mut cost) = (0i64, 0.0f64);
        loop {
            // Bellman-Ford queue variant; residual arcs may carry negative cost.
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            let mut queued = vec![false; n];
            dist[source] = 0.0;
            let mut queue = VecDeque::from([source]);
            queued[source] = true;
            while let Some(u) = queue.pop_front() {
                queued[u] = false;
                for &a in &self.out[u] {
                    let arc = &self.arcs[a];
                    let nd = dist[u] + arc.cost;
                    if arc.cap > 0 && nd < dist[arc.to] - 1e-12 * nd.abs().max(1.0) {
                        dist[arc.to] = nd;
                        via[arc.to] = a;
                        if !queued[arc.to] {
                            queued[arc.to] = true;
                            queue.push_back(arc.to);
                        }
                    }
                }
            }
            if dist[sink].is_infinite() {
                return (flow, cost);
            }
            let mut push = i64::MAX;
            let mut v = sink;
            while v != source {
                let a = via[v];
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let a = via[v];
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                cost += push as f64 * self.arcs[a].cost;
                v = self.arcs[a ^ 1].to;
            }
            flow += push;
        }
    }
}
