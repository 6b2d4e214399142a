//! Isolation planning for attacked device networks.
//!
//! Given a device graph, a set of attacked devices and a removal budget `k`,
//! pick at most `k` devices to isolate so that the number of device pairs
//! still connected to an attacked device is minimal and, among those cuts,
//! the number of connected healthy pairs is maximal.
//!
//! * [`graph`]: devices, connections, removal and connectivity queries.
//! * [`score`]: the component-based scoring kernel and a pairwise oracle.
//! * [`exact`]: exhaustive candidate enumeration with degree-one pruning.
//! * [`greedy`]: chunked heuristic built on the exact solver.
//! * [`ilp`]: integer program construction, LP export and assignment checks.
//! * [`plan`]: manual cut scoring and solve dispatch for front ends.
//! * [`instances`]: generators, attack sampling, the karate club graph and file I/O.

pub mod error;
pub mod exact;
pub mod graph;
pub mod greedy;
pub mod ilp;
pub mod instances;
pub mod plan;
pub mod score;

mod combinations;

pub use error::{Error, Result};
pub use exact::{
    enumerate_candidates, excludable_devices, solve_direct, solve_oracle, ObjectiveMode,
    Solution, SolveConfig, SolveStatus,
};
pub use graph::{are_connected, components, remove_devices, AttackSet, Component, ConnectionKind, Device, DeviceId, Graph};
pub use greedy::{chunk_budgets, solve_greedy, solve_greedy_traced, ChunkStep, GreedyConfig};
pub use instances::Instance;
pub use plan::{evaluate_cut, Algorithm, ComponentReport, CutReport, SolveRequest};
pub use score::{component_vulnerable_pairs, score, score_bruteforce, ComponentSummary, ScoreReport};
