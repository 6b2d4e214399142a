//! Undirected device graphs.
//!
//! Devices carry stable integer ids. Internally every graph keeps its devices
//! sorted by id and stores adjacency in index space, so index order and id
//! order coincide. Removing devices builds a new graph; ids are never
//! renumbered.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::ComponentSummary;

pub type DeviceId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Device {
    pub id: DeviceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Device {
    pub fn new(id: DeviceId) -> Self {
        Device { id, label: None }
    }

    pub fn labeled(id: DeviceId, label: impl Into<String>) -> Self {
        Device { id, label: Some(label.into()) }
    }
}

impl From<DeviceId> for Device {
    fn from(id: DeviceId) -> Self {
        Device::new(id)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    devices: Vec<Device>,
    adjacency: Vec<Vec<usize>>,
    connection_count: usize,
}

impl Graph {
    /// Builds a graph, rejecting duplicate ids, self-loops, duplicate
    /// connections and connections to unknown devices.
    pub fn new<D, C>(devices: D, connections: C) -> Result<Self>
    where
        D: IntoIterator,
        D::Item: Into<Device>,
        C: IntoIterator<Item = (DeviceId, DeviceId)>,
    {
        let mut devices: Vec<Device> = devices.into_iter().map(Into::into).collect();
        devices.sort_by_key(|d| d.id);
        if let Some(w) = devices.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Validation(format!("duplicate device id {}", w[0].id)));
        }

        let mut graph = Graph {
            adjacency: vec![Vec::new(); devices.len()],
            devices,
            connection_count: 0,
        };
        for (u, v) in connections {
            if u == v {
                return Err(Error::Validation(format!("self-loop on device {u}")));
            }
            let iu = graph
                .index_of(u)
                .ok_or_else(|| Error::Validation(format!("connection {{{u}, {v}}} references unknown device {u}")))?;
            let iv = graph
                .index_of(v)
                .ok_or_else(|| Error::Validation(format!("connection {{{u}, {v}}} references unknown device {v}")))?;
            graph.adjacency[iu].push(iv);
            graph.adjacency[iv].push(iu);
            graph.connection_count += 1;
        }
        for (i, list) in graph.adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (graph.devices[i].id, graph.devices[w[0]].id);
                return Err(Error::Validation(format!(
                    "duplicate connection {{{}, {}}}",
                    a.min(b),
                    a.max(b)
                )));
            }
        }
        Ok(graph)
    }

    /// Unlabeled devices `ids` joined by `connections`.
    pub fn from_ids<I, C>(ids: I, connections: C) -> Result<Self>
    where
        I: IntoIterator<Item = DeviceId>,
        C: IntoIterator<Item = (DeviceId, DeviceId)>,
    {
        Graph::new(ids.into_iter().map(Device::new), connections)
    }

    /// Graph whose device set is exactly the endpoints of `connections`.
    pub fn from_connections<C>(connections: C) -> Result<Self>
    where
        C: IntoIterator<Item = (DeviceId, DeviceId)>,
    {
        let connections: Vec<_> = connections.into_iter().collect();
        let ids: BTreeSet<DeviceId> = connections.iter().flat_map(|&(u, v)| [u, v]).collect();
        Graph::from_ids(ids, connections)
    }

    pub fn device_count(&self) -> usize {
        self.devices.len()
    }

    pub fn connection_count(&self) -> usize {
        self.connection_count
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    /// Devices sorted by id.
    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = DeviceId> + '_ {
        self.devices.iter().map(|d| d.id)
    }

    pub fn contains(&self, id: DeviceId) -> bool {
        self.index_of(id).is_some()
    }

    pub fn label(&self, id: DeviceId) -> Option<&str> {
        self.index_of(id).and_then(|i| self.devices[i].label.as_deref())
    }

    pub fn degree(&self, id: DeviceId) -> Option<usize> {
        self.index_of(id).map(|i| self.adjacency[i].len())
    }

    pub fn neighbors(&self, id: DeviceId) -> Option<impl Iterator<Item = DeviceId> + '_> {
        self.index_of(id)
            .map(|i| self.adjacency[i].iter().map(move |&j| self.devices[j].id))
    }

    pub fn has_connection(&self, u: DeviceId, v: DeviceId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(iu), Some(iv)) => self.adjacency[iu].binary_search(&iv).is_ok(),
            _ => false,
        }
    }

    /// Connections as `(min, max)` id pairs in lexicographic order.
    pub fn connections(&self) -> Vec<(DeviceId, DeviceId)> {
        let mut out = Vec::with_capacity(self.connection_count);
        for (i, list) in self.adjacency.iter().enumerate() {
            for &j in list.iter().filter(|&&j| j > i) {
                out.push((self.devices[i].id, self.devices[j].id));
            }
        }
        out
    }

    pub(crate) fn index_of(&self, id: DeviceId) -> Option<usize> {
        self.devices.binary_search_by_key(&id, |d| d.id).ok()
    }

    pub(crate) fn id_at(&self, index: usize) -> DeviceId {
        self.devices[index].id
    }

    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Copy of the graph without the devices flagged in `removed` (index space).
    pub(crate) fn without_mask(&self, removed: &[bool]) -> Graph {
        let mut remap = vec![usize::MAX; self.devices.len()];
        let mut devices = Vec::with_capacity(self.devices.len());
        for (i, d) in self.devices.iter().enumerate() {
            if !removed[i] {
                remap[i] = devices.len();
                devices.push(d.clone());
            }
        }
        let mut adjacency = vec![Vec::new(); devices.len()];
        let mut connection_count = 0;
        for (i, list) in self.adjacency.iter().enumerate() {
            if removed[i] {
                continue;
            }
            let ni = remap[i];
            adjacency[ni] = list.iter().filter(|&&j| !removed[j]).map(|&j| remap[j]).collect();
            connection_count += adjacency[ni].len();
        }
        Graph {
            devices,
            adjacency,
            connection_count: connection_count / 2,
        }
    }

    pub(crate) fn mask_of(&self, ids: &[DeviceId]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.devices.len()];
        for &id in ids {
            let i = self
                .index_of(id)
                .ok_or_else(|| Error::invalid(format!("unknown device {id}")))?;
            mask[i] = true;
        }
        Ok(mask)
    }
}

/// The attacked devices `A`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttackSet(BTreeSet<DeviceId>);

impl AttackSet {
    pub fn new<I: IntoIterator<Item = DeviceId>>(ids: I) -> Self {
        AttackSet(ids.into_iter().collect())
    }

    pub fn empty() -> Self {
        AttackSet::default()
    }

    pub fn contains(&self, id: DeviceId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = DeviceId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<DeviceId> {
        &self.0
    }

    /// Fails if an attacked device is not part of `graph`.
    pub fn check(&self, graph: &Graph) -> Result<()> {
        match self.0.iter().find(|&&id| !graph.contains(id)) {
            Some(id) => Err(Error::invalid(format!("attacked device {id} is not in the graph"))),
            None => Ok(()),
        }
    }

    /// The attacked devices that survive in `graph`.
    pub fn restricted_to(&self, graph: &Graph) -> AttackSet {
        AttackSet(self.0.iter().copied().filter(|&id| graph.contains(id)).collect())
    }

    pub(crate) fn mask(&self, graph: &Graph) -> Vec<bool> {
        let mut mask = vec![false; graph.device_count()];
        for id in &self.0 {
            if let Some(i) = graph.index_of(*id) {
                mask[i] = true;
            }
        }
        mask
    }
}

impl FromIterator<DeviceId> for AttackSet {
    fn from_iter<I: IntoIterator<Item = DeviceId>>(iter: I) -> Self {
        AttackSet::new(iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Direct,
    Indirect,
    None,
}

impl ConnectionKind {
    pub fn is_connected(self) -> bool {
        self != ConnectionKind::None
    }
}

/// `G - C`: deletes every device in `c` together with its incident connections.
pub fn remove_devices(g: &Graph, c: &[DeviceId]) -> Result<Graph> {
    let mask = g.mask_of(c)?;
    Ok(g.without_mask(&mask))
}

/// Classifies the relation between two distinct devices.
pub fn are_connected(g: &Graph, u: DeviceId, v: DeviceId) -> Result<ConnectionKind> {
    if u == v {
        return Err(Error::invalid(format!("connection query needs two distinct devices, got {u} twice")));
    }
    let iu = g.index_of(u).ok_or_else(|| Error::invalid(format!("unknown device {u}")))?;
    let iv = g.index_of(v).ok_or_else(|| Error::invalid(format!("unknown device {v}")))?;
    if g.adjacency[iu].binary_search(&iv).is_ok() {
        return Ok(ConnectionKind::Direct);
    }

    let mut seen = vec![false; g.device_count()];
    let mut queue = VecDeque::from([iu]);
    seen[iu] = true;
    while let Some(x) = queue.pop_front() {
        for &y in &g.adjacency[x] {
            if y == iv {
                return Ok(ConnectionKind::Indirect);
            }
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    Ok(ConnectionKind::None)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Member ids, ascending.
    pub devices: Vec<DeviceId>,
    pub summary: ComponentSummary,
}

/// Maximal connected device sets, ordered by their smallest device id.
/// Attacked ids absent from `g` are ignored.
pub fn components(g: &Graph, a: &AttackSet) -> Vec<Component> {
    let n = g.device_count();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut members = Vec::new();
        while let Some(x) = stack.pop() {
            members.push(x);
            for &y in &g.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        members.sort_unstable();
        let devices: Vec<DeviceId> = members.iter().map(|&i| g.id_at(i)).collect();
        let attacked_count = devices.iter().filter(|&&id| a.contains(id)).count() as u64;
        out.push(Component {
            summary: ComponentSummary {
                size: devices.len() as u64,
                attacked_count,
            },
            devices,
        });
    }
    out
}
