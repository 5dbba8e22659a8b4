use crate::distributions::w1_sorted;

use super::{AgentState, Partition, Scope};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FrozenAtStart,
    RecomputedAtStep(usize),
}

/// Group weights `K(μ^{Λ(i)}, μ^q, σ_i)` of one partition, one row per agent.
///
/// Rows differ between agents of the same group only when their threshold
/// radius or scope differs.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupWeightMatrix {
    n_groups: usize,
    values: Vec<f64>,
    provenance: Provenance,
}

impl GroupWeightMatrix {
    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Weight of group `group` as seen by agent `agent`.
    #[inline]
    pub fn get(&self, agent: usize, group: usize) -> f64 {
        self.values[agent * self.n_groups + group]
    }

    #[inline]
    pub fn row(&self, agent: usize) -> &[f64] {
        &self.values[agent * self.n_groups..(agent + 1) * self.n_groups]
    }
}

/// W1 from each agent's own group to every group of one partition.
/// `None` marks a group with no member inside the agent's scope.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GroupDistances {
    n_groups: usize,
    values: Vec<Option<f64>>,
}

/// Sorted opinions of each group of partition `r`.
pub fn group_distributions(
    opinions: &[f64],
    agents: &[AgentState],
    r: usize,
    n_groups: usize,
) -> Vec<Vec<f64>> {
    let mut groups = vec![Vec::new(); n_groups];
    for (x, agent) in opinions.iter().zip(agents) {
        groups[agent.groups[r]].push(*x);
    }
    for g in &mut groups {
        g.sort_by(f64::total_cmp);
    }
    groups
}

/// Pairwise W1 between groups; entries for empty groups are `None`.
pub(crate) fn distance_matrix(groups: &[Vec<f64>]) -> Vec<Vec<Option<f64>>> {
    let p = groups.len();
    let mut m = vec![vec![None; p]; p];
    for k in 0..p {
        if groups[k].is_empty() {
            continue;
        }
        m[k][k] = Some(0.0);
        for q in k + 1..p {
            if groups[q].is_empty() {
                continue;
            }
            let w = w1_sorted(&groups[k], &groups[q]);
            m[k][q] = Some(w);
            m[q][k] = Some(w);
        }
    }
    m
}

pub(crate) fn group_distances(
    opinions: &[f64],
    agents: &[AgentState],
    r: usize,
    n_groups: usize,
) -> GroupDistances {
    let groups = group_distributions(opinions, agents, r, n_groups);
    let global = distance_matrix(&groups);
    let mut values = Vec::with_capacity(agents.len() * n_groups);
    for (i, agent) in agents.iter().enumerate() {
        let own = agent.groups[r];
        match agent.scope {
            Scope::Bounded(s) => {
                let x = opinions[i];
                let window = |g: &[f64]| {
                    let lo = g.partition_point(|y| *y < x - s);
                    let hi = g.partition_point(|y| *y <= x + s);
                    (lo, hi)
                };
                let (lo, hi) = window(&groups[own]);
                let own_slice = &groups[own][lo..hi];
                for (q, g) in groups.iter().enumerate() {
                    if q == own {
                        values.push(Some(0.0));
                        continue;
                    }
                    let (lo, hi) = window(g);
                    values.push(if lo < hi && !own_slice.is_empty() {
                        Some(w1_sorted(own_slice, &g[lo..hi]))
                    } else {
                        None
                    });
                }
            }
            _ => values.extend_from_slice(&global[own]),
        }
    }
    GroupDistances { n_groups, values }
}

pub(crate) fn weights_from_distances(
    distances: &GroupDistances,
    agents: &[AgentState],
    r: usize,
    partition: &Partition,
    t: f64,
    provenance: Provenance,
) -> GroupWeightMatrix {
    let n_groups = distances.n_groups;
    let mut values = Vec::with_capacity(distances.values.len());
    for (i, agent) in agents.iter().enumerate() {
        let own = agent.groups[r];
        for q in 0..n_groups {
            let k = match distances.values[i * n_groups + q] {
                Some(w) => partition.kernel.eval_pair(w, t, q, own, agent.sigma),
                None => 0.0,
            };
            values.push(k);
        }
    }
    GroupWeightMatrix {
        n_groups,
        values,
        provenance,
    }
}

/// Live group weights of partition `r` from the current opinions. Agents with
/// a bounded scope only see peers within `s_i` of their own opinion.
pub fn recompute_group_weights(
    opinions: &[f64],
    agents: &[AgentState],
    r: usize,
    partition: &Partition,
    t: f64,
    step: usize,
) -> GroupWeightMatrix {
    let d = group_distances(opinions, agents, r, partition.n_groups());
    weights_from_distances(
        &d,
        agents,
        r,
        partition,
        t,
        Provenance::RecomputedAtStep(step),
    )
}
