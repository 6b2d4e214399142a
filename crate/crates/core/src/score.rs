//! Vulnerability, healthiness and the combined objective.
//!
//! A connected pair is *vulnerable* when at least one endpoint is attacked and
//! *healthy* otherwise. The objective `phi = (n0^2 + 1) * vul - heal` orders
//! residual graphs lexicographically: fewer vulnerable pairs first, then more
//! healthy pairs. `n0` is the device count of the original instance so that
//! all cuts of one instance share a multiplier.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{are_connected, components, AttackSet, Graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub size: u64,
    pub attacked_count: u64,
}

impl ComponentSummary {
    pub fn vulnerable_pairs(&self) -> u64 {
        vulnerable_pairs_unchecked(self.size, self.attacked_count)
    }

    pub fn healthy_pairs(&self) -> u64 {
        pairs(self.size) - self.vulnerable_pairs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreReport {
    pub vulnerability: u64,
    pub healthiness: u64,
    pub phi: i128,
    pub multiplier_base: u64,
}

impl ScoreReport {
    pub fn new(vulnerability: u64, healthiness: u64, multiplier_base: u64) -> Self {
        ScoreReport {
            vulnerability,
            healthiness,
            phi: phi(vulnerability, healthiness, multiplier_base),
            multiplier_base,
        }
    }

    /// Fewer vulnerable pairs first, then more healthy pairs.
    pub fn lexicographic_cmp(&self, other: &ScoreReport) -> Ordering {
        self.vulnerability
            .cmp(&other.vulnerability)
            .then(other.healthiness.cmp(&self.healthiness))
    }
}

pub(crate) fn phi(vulnerability: u64, healthiness: u64, multiplier_base: u64) -> i128 {
    let base = multiplier_base as i128;
    (base * base + 1) * vulnerability as i128 - healthiness as i128
}

/// `C(n, 2)`
pub(crate) fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn vulnerable_pairs_unchecked(size: u64, attacked: u64) -> u64 {
    pairs(attacked) + attacked * (size - attacked)
}

/// Vulnerable pairs inside one connected component: pairs among attacked
/// devices plus attacked/non-attacked pairs.
pub fn component_vulnerable_pairs(size: u64, attacked_count: u64) -> Result<u64> {
    if attacked_count > size {
        return Err(Error::invalid(format!(
            "attacked count {attacked_count} exceeds component size {size}"
        )));
    }
    Ok(vulnerable_pairs_unchecked(size, attacked_count))
}

fn check_inputs(g: &Graph, a: &AttackSet, multiplier_base: u64) -> Result<()> {
    a.check(g)?;
    if (multiplier_base as usize) < g.device_count() {
        return Err(Error::invalid(format!(
            "multiplier base {multiplier_base} is smaller than the device count {}",
            g.device_count()
        )));
    }
    Ok(())
}

/// Scores `g` by summing closed-form pair counts over its components.
pub fn score(g: &Graph, a: &AttackSet, multiplier_base: u64) -> Result<ScoreReport> {
    check_inputs(g, a, multiplier_base)?;
    let (vul, heal) = components(g, a)
        .iter()
        .fold((0, 0), |(v, h), c| (v + c.summary.vulnerable_pairs(), h + c.summary.healthy_pairs()));
    Ok(ScoreReport::new(vul, heal, multiplier_base))
}

/// Scores `g` by classifying every unordered device pair individually.
/// Quadratically many path searches; meant as a reference for small graphs.
pub fn score_bruteforce(g: &Graph, a: &AttackSet, multiplier_base: u64) -> Result<ScoreReport> {
    check_inputs(g, a, multiplier_base)?;
    let ids: Vec<_> = g.ids().collect();
    let (mut vul, mut heal) = (0u64, 0u64);
    for (i, &u) in ids.iter().enumerate() {
        for &v in &ids[i + 1..] {
            if !are_connected(g, u, v)?.is_connected() {
                continue;
            }
            if a.contains(u) || a.contains(v) {
                vul += 1;
            } else {
                heal += 1;
            }
        }
    }
    Ok(ScoreReport::new(vul, heal, multiplier_base))
}

/// Reusable scoring state for evaluating many cuts of one graph.
///
/// Removed devices are marked with the current epoch before the traversal, so
/// no per-candidate allocation or clearing is needed.
pub(crate) struct Scorer<'g> {
    adjacency: &'g [Vec<usize>],
    attacked: &'g [bool],
    marks: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
}

impl<'g> Scorer<'g> {
    pub(crate) fn new(adjacency: &'g [Vec<usize>], attacked: &'g [bool]) -> Self {
        Scorer {
            adjacency,
            attacked,
            marks: vec![0; adjacency.len()],
            epoch: 0,
            stack: Vec::with_capacity(adjacency.len()),
        }
    }

    /// `(vulnerability, healthiness)` of the graph minus the devices at
    /// `removed` (indices).
    pub(crate) fn counts(&mut self, removed: &[usize]) -> (u64, u64) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        for &r in removed {
            self.marks[r] = epoch;
        }
        let (mut vul, mut heal) = (0, 0);
        for start in 0..self.adjacency.len() {
            if self.marks[start] == epoch {
                continue;
            }
            self.marks[start] = epoch;
            self.stack.push(start);
            let (mut size, mut attacked) = (0u64, 0u64);
            while let Some(x) = self.stack.pop() {
                size += 1;
                attacked += self.attacked[x] as u64;
                for &y in &self.adjacency[x] {
                    if self.marks[y] != epoch {
                        self.marks[y] = epoch;
                        self.stack.push(y);
                    }
                }
            }
            let b = vulnerable_pairs_unchecked(size, attacked);
            vul += b;
            heal += pairs(size) - b;
        }
        (vul, heal)
    }
}
