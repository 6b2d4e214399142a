#![allow(dead_code)]

use cyberseg_core::{AttackSet, DeviceId, Graph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on `1..=max_n` devices with a random edge density.
pub fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.gen_range(1..=max_n);
    let density: f64 = rng.gen_range(0.0..0.8);
    let mut conns = Vec::new();
    for u in 0..n as DeviceId {
        for v in u + 1..n as DeviceId {
            if rng.gen_bool(density) {
                conns.push((u, v));
            }
        }
    }
    Graph::from_ids(0..n as DeviceId, conns).unwrap()
}

pub fn random_attack(rng: &mut ChaCha8Rng, g: &Graph, max_a: usize) -> AttackSet {
    let mut ids: Vec<DeviceId> = g.ids().collect();
    ids.shuffle(rng);
    let count = rng.gen_range(0..=max_a.min(ids.len()));
    AttackSet::new(ids.into_iter().take(count))
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_a: usize, max_k: usize) -> (Graph, AttackSet, usize) {
    let g = random_graph(rng, max_n);
    let a = random_attack(rng, &g, max_a);
    let k = rng.gen_range(0..=max_k);
    (g, a, k)
}

/// Connected graph with `n` devices and `m >= n - 1` connections: a random
/// spanning tree plus random extra links.
pub fn random_connected(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Graph {
    assert!(n >= 1 && m + 1 >= n && m <= n * (n - 1) / 2);
    let mut conns = std::collections::BTreeSet::new();
    for v in 1..n as DeviceId {
        let u = rng.gen_range(0..v);
        conns.insert((u, v));
    }
    while conns.len() < m {
        let u = rng.gen_range(0..n as DeviceId);
        let v = rng.gen_range(0..n as DeviceId);
        if u != v {
            conns.insert((u.min(v), u.max(v)));
        }
    }
    Graph::from_ids(0..n as DeviceId, conns).unwrap()
}
