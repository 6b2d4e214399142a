//! Problem instances: generators, attack sampling, the bundled karate club
//! graph and file formats.

mod io;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttackSet, DeviceId, Graph};

pub use io::{load_instance, parse_edge_list, read_instance, save_instance, write_edge_list, write_instance, InstanceFile};

/// One problem: a graph, its attacked devices and an optional budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    pub graph: Graph,
    pub attacked: AttackSet,
    pub budget: Option<usize>,
}

impl Instance {
    pub fn new(graph: Graph, attacked: AttackSet, budget: Option<usize>) -> Result<Self> {
        if let Some(id) = attacked.iter().find(|&id| !graph.contains(id)) {
            return Err(Error::Validation(format!("attacked device {id} is not in the graph")));
        }
        Ok(Instance { graph, attacked, budget })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    #[default]
    HalfEven,
    Floor,
    Ceil,
}

impl FromStr for Rounding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "half_even" => Ok(Rounding::HalfEven),
            "floor" => Ok(Rounding::Floor),
            "ceil" => Ok(Rounding::Ceil),
            other => Err(format!("unknown rounding mode {other:?} (expected half_even, floor or ceil)")),
        }
    }
}

impl fmt::Display for Rounding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rounding::HalfEven => "half_even",
            Rounding::Floor => "floor",
            Rounding::Ceil => "ceil",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    GeneratedTree { n: usize, branching: usize },
    BundledKarate,
    File(PathBuf),
}

/// Recipe for an instance: a topology plus a seeded attack sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub source: InstanceSource,
    pub attack_fraction_p: f64,
    pub seed: u64,
    #[serde(default)]
    pub rounding: Rounding,
}

impl InstanceSpec {
    pub fn build(&self, budget: Option<usize>) -> Result<Instance> {
        let graph = match &self.source {
            InstanceSource::GeneratedTree { n, branching } => generate_full_ary_tree(*n, *branching)?,
            InstanceSource::BundledKarate => load_karate(),
            InstanceSource::File(path) => load_instance(path)?.graph,
        };
        let attacked = sample_attacked(&graph, self.attack_fraction_p, self.seed, self.rounding)?;
        Instance::new(graph, attacked, budget)
    }
}

/// Full `r`-ary tree on devices `0..n`: device `i` has children
/// `r*i + 1 ..= r*i + r` (those below `n`).
pub fn generate_full_ary_tree(n: usize, r: usize) -> Result<Graph> {
    if n == 0 || r == 0 {
        return Err(Error::invalid(format!("tree needs n >= 1 and r >= 1, got n={n}, r={r}")));
    }
    let to_id = |i: usize| {
        DeviceId::try_from(i).map_err(|_| Error::invalid(format!("device index {i} does not fit a device id")))
    };
    let ids = (0..n).map(to_id).collect::<Result<Vec<_>>>()?;
    let connections = (1..n).map(|child| (ids[(child - 1) / r], ids[child]));
    Graph::from_ids(ids.iter().copied(), connections)
}

const ROUNDING_EPS: f64 = 1e-9;

/// Number of attacked devices for fraction `p` of `n` devices.
pub fn attacked_count(n: usize, p: f64, rounding: Rounding) -> Result<usize> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("attack fraction {p} is outside [0, 1]")));
    }
    let x = p * n as f64;
    let floor = x.floor();
    let frac = x - floor;
    let count = match rounding {
        Rounding::Floor if frac > 1.0 - ROUNDING_EPS => floor + 1.0,
        Rounding::Floor => floor,
        Rounding::Ceil if frac < ROUNDING_EPS => floor,
        Rounding::Ceil => floor + 1.0,
        Rounding::HalfEven if (frac - 0.5).abs() < ROUNDING_EPS => {
            if floor % 2.0 == 0.0 {
                floor
            } else {
                floor + 1.0
            }
        }
        Rounding::HalfEven => x.round(),
    };
    Ok((count as usize).min(n))
}

/// Uniform sample of `attacked_count(n, p)` devices.
///
/// The device ids are sorted, shuffled with a Fisher-Yates pass driven by
/// `ChaCha8Rng::seed_from_u64(seed)` (index `j` for position `i` drawn as a
/// `u64` in `0..=i`, walking `i` downwards), and the prefix is taken. The
/// scheme does not depend on pointer width.
pub fn sample_attacked(g: &Graph, p: f64, seed: u64, rounding: Rounding) -> Result<AttackSet> {
    let count = attacked_count(g.device_count(), p, rounding)?;
    let mut ids: Vec<DeviceId> = g.ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..ids.len()).rev() {
        let j = rng.gen_range(0..=i as u64) as usize;
        ids.swap(i, j);
    }
    Ok(AttackSet::new(ids.into_iter().take(count)))
}

const KARATE_EDGES: &str = include_str!("../../data/karate.edges");

/// Zachary's karate club network: 34 devices, 78 connections.
pub fn load_karate() -> Graph {
    parse_edge_list(KARATE_EDGES).expect("bundled karate edge list is well-formed")
}
