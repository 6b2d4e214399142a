//! Front-end helpers shared by the command line and the HTTP service:
//! scoring a manual cut and dispatching a solve request by algorithm name.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{solve_direct, solve_oracle, ObjectiveMode, Solution, SolveConfig, DEFAULT_TIMEOUT};
use crate::graph::{components, remove_devices, AttackSet, DeviceId, Graph};
use crate::greedy::{solve_greedy, GreedyConfig, DEFAULT_CHUNK};
use crate::score::{score, ScoreReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub devices: Vec<DeviceId>,
    pub size: u64,
    pub attacked_count: u64,
    pub vulnerable_pairs: u64,
    pub healthy_pairs: u64,
}

/// Score of `G - isolate` plus its component breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutReport {
    pub isolate: Vec<DeviceId>,
    #[serde(flatten)]
    pub report: ScoreReport,
    pub components: Vec<ComponentReport>,
}

/// Isolates `cut` and scores what is left with the original device count as
/// multiplier base. The cut may be of any size; unknown ids are rejected.
pub fn evaluate_cut(g: &Graph, a: &AttackSet, cut: &[DeviceId]) -> Result<CutReport> {
    a.check(g)?;
    if let Some(id) = cut.iter().find(|&&id| !g.contains(id)) {
        return Err(Error::invalid(format!("unknown device {id}")));
    }
    let mut isolate = cut.to_vec();
    isolate.sort_unstable();
    isolate.dedup();
    let residual = remove_devices(g, &isolate)?;
    let remaining = a.restricted_to(&residual);
    let report = score(&residual, &remaining, g.device_count() as u64)?;
    let components = components(&residual, &remaining)
        .into_iter()
        .map(|c| ComponentReport {
            size: c.summary.size,
            attacked_count: c.summary.attacked_count,
            vulnerable_pairs: c.summary.vulnerable_pairs(),
            healthy_pairs: c.summary.healthy_pairs(),
            devices: c.devices,
        })
        .collect();
    Ok(CutReport { isolate, report, components })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Direct,
    Greedy,
    /// Unpruned brute force; no timeout. Intended for small checks.
    Oracle,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Algorithm::Direct),
            "greedy" => Ok(Algorithm::Greedy),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(format!("unknown algorithm {other:?} (expected direct, greedy or oracle)")),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Direct => "direct",
            Algorithm::Greedy => "greedy",
            Algorithm::Oracle => "oracle",
        })
    }
}

impl FromStr for ObjectiveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "snpv" => Ok(ObjectiveMode::Snpv),
            "cnpv" => Ok(ObjectiveMode::Cnpv),
            other => Err(format!("unknown mode {other:?} (expected snpv or cnpv)")),
        }
    }
}

impl fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveMode::Snpv => "snpv",
            ObjectiveMode::Cnpv => "cnpv",
        })
    }
}

/// A solve described by plain parameters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveRequest {
    pub algo: Algorithm,
    pub k: usize,
    /// Greedy chunk size.
    pub x: usize,
    pub mode: ObjectiveMode,
    pub timeout_secs: u64,
    pub filter: bool,
    pub jobs: Option<usize>,
}

impl Default for SolveRequest {
    fn default() -> Self {
        SolveRequest {
            algo: Algorithm::Direct,
            k: 0,
            x: DEFAULT_CHUNK,
            mode: ObjectiveMode::Snpv,
            timeout_secs: DEFAULT_TIMEOUT.as_secs(),
            filter: true,
            jobs: None,
        }
    }
}

impl SolveRequest {
    pub fn config(&self) -> SolveConfig {
        let mut config = SolveConfig::new(self.k)
            .with_mode(self.mode)
            .with_timeout(Duration::from_secs(self.timeout_secs));
        config.use_degree_one_filter = self.filter;
        config.parallelism = self.jobs;
        config
    }

    pub fn validate(&self) -> Result<()> {
        if self.algo == Algorithm::Greedy {
            self.greedy_config().validate()
        } else {
            self.config().validate()
        }
    }

    fn greedy_config(&self) -> GreedyConfig {
        GreedyConfig::new(self.k, self.x).with_inner(self.config())
    }

    pub fn run(&self, g: &Graph, a: &AttackSet) -> Result<Solution> {
        self.validate()?;
        match self.algo {
            Algorithm::Direct => solve_direct(g, a, &self.config()),
            Algorithm::Greedy => solve_greedy(g, a, &self.greedy_config()),
            Algorithm::Oracle => solve_oracle(g, a, self.k, self.mode),
        }
    }
}
