//! Independent reference computations for the test suites.

use crate::kernels::LocalKernel;

/// Exact W1 between two equal-weight sample sets by solving the
/// transportation problem as a min-cost flow.
///
/// Masses are scaled to integers: every point of `a` supplies `b.len()` units
/// and every point of `b` absorbs `a.len()` units. Successive shortest paths
/// with Bellman-Ford are exact for integral capacities.
pub fn w1_transport_lp(a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    assert!(m > 0 && n > 0);
    let source = 0;
    let sink = m + n + 1;
    let mut g = FlowGraph::new(m + n + 2);
    for (i, x) in a.iter().enumerate() {
        g.add_edge(source, 1 + i, n as i64, 0.0);
        for (j, y) in b.iter().enumerate() {
            g.add_edge(1 + i, 1 + m + j, i64::MAX / 4, (x - y).abs());
        }
    }
    for j in 0..n {
        g.add_edge(1 + m + j, sink, m as i64, 0.0);
    }
    let (flow, cost) = g.min_cost_flow(source, sink);
    assert_eq!(flow, (m * n) as i64);
    cost / (m * n) as f64
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
    }

    fn min_cost_flow(&mut self, s: usize, t: usize) -> (i64, f64) {
        let nodes = self.adj.len();
        let mut flow = 0;
        let mut cost = 0.0;
        loop {
            let mut dist = vec![f64::INFINITY; nodes];
            let mut prev = vec![usize::MAX; nodes];
            dist[s] = 0.0;
            for _ in 0..nodes {
                let mut changed = false;
                for u in 0..nodes {
                    if dist[u].is_infinite() {
                        continue;
                    }
                    for &e in &self.adj[u] {
                        let edge = &self.edges[e];
                        let d = dist[u] + edge.cost;
                        if edge.cap > 0 && d < dist[edge.to] - 1e-15 {
                            dist[edge.to] = d;
                            prev[edge.to] = e;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[t].is_infinite() {
                return (flow, cost);
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                cost += push as f64 * self.edges[e].cost;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
    }
}

/// One explicit Euler step of the single-population model, written out
/// directly: `x_i + dt · α_i Σ_j κ_ij (x_j - x_i) / Σ_j κ_ij`, then clamped.
pub fn reference_euler_step(
    x: &[f64],
    alpha: &[f64],
    epsilon: &[f64],
    kernel: &LocalKernel,
    dt: f64,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        if alpha[i] == 0.0 {
            out.push(x[i]);
            continue;
        }
        let mut z = 0.0;
        let mut s = 0.0;
        for j in 0..x.len() {
            let k = kernel.eval(x[i], x[j], epsilon[i]);
            if k != 0.0 {
                z += k;
                s += k * (x[j] - x[i]);
            }
        }
        out.push((x[i] + dt * (alpha[i] * s / z)).clamp(-1.0, 1.0));
    }
    out
}

/// Hegselmann-Krause style step: move a fraction `α·dt` toward the mean of
/// the neighbors within `ε`.
pub fn hk_step(x: &[f64], alpha: f64, epsilon: f64, dt: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let neighbors: Vec<f64> = x
                .iter()
                .copied()
                .filter(|xj| (xi - xj).abs() <= epsilon)
                .collect();
            let mean = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
            (xi + alpha * dt * (mean - xi)).clamp(-1.0, 1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_matches_hand_values() {
        assert!((w1_transport_lp(&[-1.0], &[1.0]) - 2.0).abs() < 1e-15);
        assert!((w1_transport_lp(&[0.0, 1.0], &[0.5, 0.5]) - 0.5).abs() < 1e-15);
        // Three points at 0 against two at {0, 1}: move half the mass by 1.
        assert!((w1_transport_lp(&[0.0, 0.0, 0.0], &[0.0, 1.0]) - 0.5).abs() < 1e-15);
    }
}
