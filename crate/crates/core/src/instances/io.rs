use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Instance;
use crate::error::{Error, Result};
use crate::graph::{AttackSet, Device, DeviceId, Graph};

/// On-disk JSON layout of an [`Instance`].
///
/// Devices are plain ids or `{"id": .., "label": ..}` objects; connections
/// are two-element arrays.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub devices: Vec<DeviceEntry>,
    pub connections: Vec<[DeviceId; 2]>,
    #[serde(default)]
    pub attacked: Vec<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeviceEntry {
    Id(DeviceId),
    Labeled {
        id: DeviceId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
}

impl From<DeviceEntry> for Device {
    fn from(entry: DeviceEntry) -> Device {
        match entry {
            DeviceEntry::Id(id) => Device::new(id),
            DeviceEntry::Labeled { id, label } => Device { id, label },
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Instance> {
        let graph = Graph::new(file.devices, file.connections.iter().map(|&[u, v]| (u, v)))?;
        let unique: BTreeSet<_> = file.attacked.iter().copied().collect();
        if unique.len() != file.attacked.len() {
            return Err(Error::Validation("attacked list contains duplicates".into()));
        }
        Instance::new(graph, AttackSet::new(unique), file.budget)
    }
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> InstanceFile {
        InstanceFile::from(&inst)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> InstanceFile {
        InstanceFile {
            devices: inst
                .graph
                .devices()
                .iter()
                .map(|d| match &d.label {
                    None => DeviceEntry::Id(d.id),
                    Some(label) => DeviceEntry::Labeled { id: d.id, label: Some(label.clone()) },
                })
                .collect(),
            connections: inst.graph.connections().into_iter().map(|(u, v)| [u, v]).collect(),
            attacked: inst.attacked.iter().collect(),
            budget: inst.budget,
        }
    }
}

fn json_error(e: serde_json::Error) -> Error {
    if e.is_data() {
        // structurally valid JSON that fails instance validation
        Error::Validation(e.to_string())
    } else {
        Error::Parse { line: e.line(), message: e.to_string() }
    }
}

impl Instance {
    pub fn from_json_str(text: &str) -> Result<Instance> {
        serde_json::from_str(text).map_err(json_error)
    }

    /// Canonical pretty JSON: devices, connections and attacked ids sorted.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// Reads an instance as JSON when the first non-blank byte is `{`, otherwise
/// as an edge list without attacked devices.
pub fn read_instance<R: Read>(mut reader: R) -> Result<Instance> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    if text.trim_start().starts_with('{') {
        Instance::from_json_str(&text)
    } else {
        Instance::new(parse_edge_list(&text)?, AttackSet::empty(), None)
    }
}

pub fn write_instance<W: Write>(mut writer: W, inst: &Instance) -> Result<()> {
    writer.write_all(inst.to_json_string().as_bytes())?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    read_instance(fs::File::open(path)?)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    fs::write(path, inst.to_json_string())?;
    Ok(())
}

/// Parses `u v` connection lines. `#` starts a comment; `node u` declares a
/// device without connections.
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut ids = BTreeSet::new();
    let mut connections = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: n + 1, message };
        let id = |tok: &str| tok.parse::<DeviceId>().map_err(|_| err(format!("invalid device id {tok:?}")));
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["node", u] => {
                ids.insert(id(u)?);
            }
            [u, v] => {
                let (u, v) = (id(u)?, id(v)?);
                if u == v {
                    return Err(err(format!("self-loop on device {u}")));
                }
                ids.insert(u);
                ids.insert(v);
                connections.push((u, v));
            }
            _ => return Err(err(format!("expected `u v` or `node u`, got {line:?}"))),
        }
    }
    Graph::from_ids(ids, connections)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    for id in g.ids().filter(|&id| g.degree(id) == Some(0)) {
        let _ = writeln!(out, "node {id}");
    }
    for (u, v) in g.connections() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}
