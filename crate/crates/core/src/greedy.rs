//! Chunked greedy heuristic.
//!
//! Instead of searching all cuts of size `k` at once, repeatedly solve the
//! residual instance exactly with a small budget `x` and accumulate the
//! chosen devices until the budget is spent. Each chunk recomputes the
//! degree-one exclusion on its own residual graph.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{solve_direct_until, Solution, SolveConfig, SolveStatus};
use crate::graph::{remove_devices, AttackSet, DeviceId, Graph};
use crate::score::score;

pub const DEFAULT_CHUNK: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyConfig {
    pub budget_k: usize,
    pub chunk_x: usize,
    /// Template for every chunk; its `budget_k` is overwritten per chunk.
    pub inner: SolveConfig,
}

impl GreedyConfig {
    pub fn new(budget_k: usize, chunk_x: usize) -> Self {
        GreedyConfig {
            budget_k,
            chunk_x,
            inner: SolveConfig::new(chunk_x),
        }
    }

    pub fn with_inner(mut self, inner: SolveConfig) -> Self {
        self.inner = inner;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chunk_x == 0 {
            return Err(Error::invalid("chunk size must be at least 1"));
        }
        self.inner.validate()
    }
}

/// One exact subcall of the greedy loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkStep {
    pub budget: usize,
    pub added: Vec<DeviceId>,
    pub vulnerability_after: u64,
    pub subsets_evaluated: u64,
}

/// Budgets of the subcalls when no chunk stops early: `x` while `x` is
/// smaller than the remaining budget, then the remainder.
pub fn chunk_budgets(k: usize, x: usize) -> Vec<usize> {
    assert!(x > 0, "chunk size must be positive");
    let mut remaining = k;
    let mut out = Vec::new();
    while x < remaining {
        out.push(x);
        remaining -= x;
    }
    out.push(remaining);
    out
}

pub fn solve_greedy(g: &Graph, a: &AttackSet, config: &GreedyConfig) -> Result<Solution> {
    solve_greedy_traced(g, a, config).map(|(solution, _)| solution)
}

/// Greedy solve that also returns the per-chunk trace.
///
/// `status` is `optimal` when every chunk was solved exactly, which says
/// nothing about global optimality of the combined cut. All chunks share one
/// deadline derived from `inner.timeout`.
pub fn solve_greedy_traced(
    g: &Graph,
    a: &AttackSet,
    config: &GreedyConfig,
) -> Result<(Solution, Vec<ChunkStep>)> {
    let started = Instant::now();
    config.validate()?;
    a.check(g)?;
    let deadline = started + config.inner.timeout;
    let n0 = g.device_count() as u64;

    let mut chosen: Vec<DeviceId> = Vec::new();
    let mut residual = g.clone();
    let mut trace = Vec::new();
    let mut status = SolveStatus::Optimal;
    let mut evaluated = 0u64;

    for budget in chunk_budgets(config.budget_k, config.chunk_x) {
        let inner = SolveConfig { budget_k: budget, ..config.inner.clone() };
        let attacked = a.restricted_to(&residual);
        let step = solve_direct_until(&residual, &attacked, &inner, n0, deadline)?;
        evaluated += step.subsets_evaluated;
        if step.status == SolveStatus::TimeoutBestEffort {
            status = SolveStatus::TimeoutBestEffort;
        }
        trace.push(ChunkStep {
            budget,
            added: step.chosen.clone(),
            vulnerability_after: step.report.vulnerability,
            subsets_evaluated: step.subsets_evaluated,
        });
        residual = remove_devices(&residual, &step.chosen)?;
        chosen.extend_from_slice(&step.chosen);

        // Deleting nothing at zero vulnerability: later chunks cannot lower phi.
        if step.chosen.is_empty() && step.report.vulnerability == 0 {
            break;
        }
        if status == SolveStatus::TimeoutBestEffort {
            break;
        }
    }

    chosen.sort_unstable();
    let report = score(&residual, &a.restricted_to(&residual), n0)?;
    let solution = Solution {
        chosen,
        report,
        status,
        subsets_evaluated: evaluated,
        elapsed: started.elapsed(),
    };
    Ok((solution, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_direct;

    #[test]
    fn budgets_for_ten_by_three() {
        assert_eq!(chunk_budgets(10, 3), vec![3, 3, 3, 1]);
        assert_eq!(chunk_budgets(9, 3), vec![3, 3, 3]);
        assert_eq!(chunk_budgets(2, 3), vec![2]);
        assert_eq!(chunk_budgets(0, 3), vec![0]);
        assert_eq!(chunk_budgets(3, 3), vec![3]);
    }

    #[test]
    fn large_chunk_matches_direct() {
        let g = Graph::from_ids(0..7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 5)]).unwrap();
        let a = AttackSet::new([0, 3, 6]);
        for k in 0..4 {
            let direct = solve_direct(&g, &a, &SolveConfig::new(k)).unwrap();
            let greedy = solve_greedy(&g, &a, &GreedyConfig::new(k, k.max(1))).unwrap();
            assert_eq!(greedy.chosen, direct.chosen);
            assert_eq!(greedy.report, direct.report);
            assert_eq!(greedy.subsets_evaluated, direct.subsets_evaluated);
        }
    }

    #[test]
    fn no_attack_stops_after_first_chunk() {
        let g = Graph::from_ids(0..4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let (sol, trace) = solve_greedy_traced(&g, &AttackSet::empty(), &GreedyConfig::new(10, 3)).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.report.vulnerability, 0);
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn trace_follows_chunk_budgets() {
        // 12 isolated attacked pairs: every chunk has work to do
        let conns: Vec<_> = (0..12).map(|i| (2 * i, 2 * i + 1)).collect();
        let g = Graph::from_ids(0..24, conns).unwrap();
        let a = AttackSet::new((0..12).map(|i| 2 * i));
        let inner = SolveConfig::new(3).without_filter();
        let config = GreedyConfig::new(10, 3).with_inner(inner);
        let (sol, trace) = solve_greedy_traced(&g, &a, &config).unwrap();
        let budgets: Vec<_> = trace.iter().map(|s| s.budget).collect();
        assert_eq!(budgets, vec![3, 3, 3, 1]);
        assert_eq!(sol.chosen.len(), 10);
        assert_eq!(sol.report.vulnerability, 2);
    }

    #[test]
    fn rejects_zero_chunk() {
        let g = Graph::from_ids([0], []).unwrap();
        assert!(solve_greedy(&g, &AttackSet::empty(), &GreedyConfig::new(1, 0)).is_err());
    }
}
