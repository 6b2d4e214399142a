//! Exact solving by exhaustive enumeration of cuts of size at most `k`.
//!
//! Non-attacked devices of degree one never need to be cut: any optimal cut
//! using such a leaf can swap it for its neighbour (or drop it) without
//! worsening the objective. [`solve_direct`] drops them from the candidate
//! pool before enumerating. Candidates are split into work units keyed by
//! `(size, first position)` and evaluated in parallel; the reduction uses a
//! total order so the result does not depend on scheduling.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinations::{subsets_up_to, CombinationCursor};
use crate::error::{Error, Result};
use crate::graph::{remove_devices, AttackSet, DeviceId, Graph};
use crate::score::{phi, score, score_bruteforce, ScoreReport, Scorer};

/// Below this many candidates the solver stays on the calling thread.
const PARALLEL_THRESHOLD: u64 = 4096;
/// Evaluations between deadline checks.
const DEADLINE_STRIDE: u32 = 256;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    /// Lexicographic: minimise vulnerability, then maximise healthiness.
    #[default]
    Snpv,
    /// Vulnerability only.
    Cnpv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub budget_k: usize,
    pub objective_mode: ObjectiveMode,
    pub use_degree_one_filter: bool,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    /// Worker threads; `None` uses the global rayon pool.
    pub parallelism: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            budget_k: 0,
            objective_mode: ObjectiveMode::Snpv,
            use_degree_one_filter: true,
            timeout: DEFAULT_TIMEOUT,
            parallelism: None,
        }
    }
}

impl SolveConfig {
    pub fn new(budget_k: usize) -> Self {
        SolveConfig { budget_k, ..Default::default() }
    }

    pub fn with_mode(mut self, mode: ObjectiveMode) -> Self {
        self.objective_mode = mode;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn with_parallelism(mut self, workers: usize) -> Self {
        self.parallelism = Some(workers);
        self
    }

    pub fn without_filter(mut self) -> Self {
        self.use_degree_one_filter = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.timeout.is_zero() {
            return Err(Error::invalid("timeout must be positive"));
        }
        if self.parallelism == Some(0) {
            return Err(Error::invalid("parallelism must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Every candidate was evaluated.
    Optimal,
    /// The deadline hit first; the solution is the best candidate seen.
    TimeoutBestEffort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    /// Isolated device ids, ascending.
    pub chosen: Vec<DeviceId>,
    pub report: ScoreReport,
    pub status: SolveStatus,
    pub subsets_evaluated: u64,
    #[serde(rename = "elapsed_secs", with = "duration_secs")]
    pub elapsed: Duration,
}

impl Solution {
    pub fn objective(&self, mode: ObjectiveMode) -> i128 {
        objective_value(mode, &self.report)
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

pub(crate) fn objective_value(mode: ObjectiveMode, report: &ScoreReport) -> i128 {
    match mode {
        ObjectiveMode::Snpv => report.phi,
        ObjectiveMode::Cnpv => report.vulnerability as i128,
    }
}

/// Non-attacked devices of degree one, ascending.
pub fn excludable_devices(g: &Graph, a: &AttackSet) -> Vec<DeviceId> {
    g.ids()
        .filter(|&id| !a.contains(id) && g.degree(id) == Some(1))
        .collect()
}

/// Every subset of `eligible` with at most `k` members, ordered by size and
/// then lexicographically by sorted ids.
pub fn enumerate_candidates(eligible: &[DeviceId], k: usize) -> Candidates {
    let mut pool = eligible.to_vec();
    pool.sort_unstable();
    pool.dedup();
    let max_size = k.min(pool.len());
    Candidates {
        cursor: CombinationCursor::new(0, pool.len(), 0),
        pool,
        size: 0,
        max_size,
    }
}

#[derive(Debug, Clone)]
pub struct Candidates {
    pool: Vec<DeviceId>,
    cursor: CombinationCursor,
    size: usize,
    max_size: usize,
}

impl Iterator for Candidates {
    type Item = Vec<DeviceId>;

    fn next(&mut self) -> Option<Vec<DeviceId>> {
        loop {
            if let Some(positions) = self.cursor.next() {
                return Some(positions.iter().map(|&p| self.pool[p]).collect());
            }
            if self.size >= self.max_size {
                return None;
            }
            self.size += 1;
            self.cursor = CombinationCursor::new(0, self.pool.len(), self.size);
        }
    }
}

/// Best candidate under the total order (objective, size, sorted indices).
#[derive(Debug, Clone, PartialEq, Eq)]
struct Best {
    objective: i128,
    removed: Vec<usize>,
}

impl Ord for Best {
    fn cmp(&self, other: &Self) -> Ordering {
        self.objective
            .cmp(&other.objective)
            .then(self.removed.len().cmp(&other.removed.len()))
            .then_with(|| self.removed.cmp(&other.removed))
    }
}

impl PartialOrd for Best {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
struct UnitResult {
    best: Option<Best>,
    evaluated: u64,
}

impl UnitResult {
    fn merge(self, other: UnitResult) -> UnitResult {
        let best = match (self.best, other.best) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        UnitResult { best, evaluated: self.evaluated + other.evaluated }
    }
}

struct Search<'a> {
    eligible: &'a [usize],
    mode: ObjectiveMode,
    multiplier_base: u64,
    deadline: Instant,
    timed_out: &'a AtomicBool,
}

impl Search<'_> {
    fn objective(&self, vul: u64, heal: u64) -> i128 {
        match self.mode {
            ObjectiveMode::Snpv => phi(vul, heal, self.multiplier_base),
            ObjectiveMode::Cnpv => vul as i128,
        }
    }

    /// All candidates of `size` whose smallest eligible position is `first`.
    fn run_unit(&self, scorer: &mut Scorer<'_>, size: usize, first: usize) -> UnitResult {
        let mut result = UnitResult::default();
        if self.timed_out.load(AtomicOrdering::Relaxed) || Instant::now() >= self.deadline {
            self.timed_out.store(true, AtomicOrdering::Relaxed);
            return result;
        }
        let mut cursor = CombinationCursor::new(first + 1, self.eligible.len(), size - 1);
        let mut removed = vec![0usize; size];
        removed[0] = self.eligible[first];
        let mut since_check = 0u32;
        while let Some(rest) = cursor.next() {
            for (slot, &p) in removed[1..].iter_mut().zip(rest) {
                *slot = self.eligible[p];
            }
            let (vul, heal) = scorer.counts(&removed);
            result.evaluated += 1;
            let objective = self.objective(vul, heal);
            // candidates arrive in lexicographic order, so strict improvement
            // keeps the tie-break winner
            if result.best.as_ref().is_none_or(|b| objective < b.objective) {
                result.best = Some(Best { objective, removed: removed.clone() });
            }
            since_check += 1;
            if since_check == DEADLINE_STRIDE {
                since_check = 0;
                if self.timed_out.load(AtomicOrdering::Relaxed) || Instant::now() >= self.deadline {
                    self.timed_out.store(true, AtomicOrdering::Relaxed);
                    break;
                }
            }
        }
        result
    }
}

/// Exact solve: every cut of size `0..=k` drawn from the devices that
/// survive the degree-one filter.
pub fn solve_direct(g: &Graph, a: &AttackSet, config: &SolveConfig) -> Result<Solution> {
    let deadline = Instant::now() + config.timeout;
    solve_direct_until(g, a, config, g.device_count() as u64, deadline)
}

/// [`solve_direct`] with an explicit multiplier base and an absolute deadline.
pub(crate) fn solve_direct_until(
    g: &Graph,
    a: &AttackSet,
    config: &SolveConfig,
    multiplier_base: u64,
    deadline: Instant,
) -> Result<Solution> {
    let started = Instant::now();
    config.validate()?;
    a.check(g)?;

    let excluded = if config.use_degree_one_filter {
        excludable_devices(g, a)
    } else {
        Vec::new()
    };
    let eligible: Vec<usize> = (0..g.device_count())
        .filter(|&i| excluded.binary_search(&g.id_at(i)).is_err())
        .collect();
    let attacked = a.mask(g);
    let timed_out = AtomicBool::new(false);
    let search = Search {
        eligible: &eligible,
        mode: config.objective_mode,
        multiplier_base,
        deadline,
        timed_out: &timed_out,
    };

    let max_size = config.budget_k.min(eligible.len());
    let (vul, heal) = Scorer::new(g.adjacency(), &attacked).counts(&[]);
    let empty = UnitResult {
        best: Some(Best { objective: search.objective(vul, heal), removed: Vec::new() }),
        evaluated: 1,
    };
    let units: Vec<(usize, usize)> = (1..=max_size)
        .flat_map(|size| (0..=eligible.len() - size).map(move |first| (size, first)))
        .collect();

    let total = subsets_up_to(eligible.len() as u64, max_size as u64);
    let sequential = config.parallelism == Some(1) || total < PARALLEL_THRESHOLD;
    let run_parallel = || {
        units
            .par_iter()
            .map_init(
                || Scorer::new(g.adjacency(), &attacked),
                |scorer, &(size, first)| search.run_unit(scorer, size, first),
            )
            .reduce(UnitResult::default, UnitResult::merge)
    };
    let found = if sequential {
        let mut scorer = Scorer::new(g.adjacency(), &attacked);
        units
            .iter()
            .map(|&(size, first)| search.run_unit(&mut scorer, size, first))
            .fold(UnitResult::default(), UnitResult::merge)
    } else if let Some(workers) = config.parallelism {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(run_parallel)
    } else {
        run_parallel()
    };
    let found = empty.merge(found);

    let best = found.best.expect("the empty cut is always evaluated");
    let mut chosen: Vec<DeviceId> = best.removed.iter().map(|&i| g.id_at(i)).collect();
    chosen.sort_unstable();
    let residual = remove_devices(g, &chosen)?;
    let report = score(&residual, &a.restricted_to(&residual), multiplier_base)?;
    let status = if timed_out.load(AtomicOrdering::Relaxed) {
        SolveStatus::TimeoutBestEffort
    } else {
        SolveStatus::Optimal
    };
    Ok(Solution {
        chosen,
        report,
        status,
        subsets_evaluated: found.evaluated,
        elapsed: started.elapsed(),
    })
}

/// Reference solver: all subsets of `V` up to size `k`, no pruning, pairwise
/// scoring. Exponential with a large constant; intended for tiny instances.
pub fn solve_oracle(g: &Graph, a: &AttackSet, k: usize, mode: ObjectiveMode) -> Result<Solution> {
    let started = Instant::now();
    a.check(g)?;
    let n0 = g.device_count() as u64;
    let ids: Vec<DeviceId> = g.ids().collect();
    let mut best: Option<(i128, Vec<DeviceId>, ScoreReport)> = None;
    let mut evaluated = 0;
    for size in 0..=k.min(ids.len()) {
        for cut in ids.iter().copied().combinations(size) {
            let residual = remove_devices(g, &cut)?;
            let report = score_bruteforce(&residual, &a.restricted_to(&residual), n0)?;
            evaluated += 1;
            let objective = objective_value(mode, &report);
            if best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
                best = Some((objective, cut, report));
            }
        }
    }
    let (_, chosen, report) = best.expect("the empty cut is always evaluated");
    Ok(Solution {
        chosen,
        report,
        status: SolveStatus::Optimal,
        subsets_evaluated: evaluated,
        elapsed: started.elapsed(),
    })
}

pub(crate) mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}
