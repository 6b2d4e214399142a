//! File-backed instance store: `<dir>/<id>.json` holds the canonical instance
//! JSON and `<dir>/<id>.meta.json` its name and creation time.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use cyberseg_core::Instance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub name: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone)]
pub struct StoredInstance {
    pub id: String,
    pub meta: Meta,
    pub instance: Arc<Instance>,
}

/// Listing entry; carries counts rather than the topology.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub id: String,
    pub name: String,
    pub created_at: DateTime<Utc>,
    pub device_count: usize,
    pub connection_count: usize,
    pub attacked_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

impl StoredInstance {
    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            id: self.id.clone(),
            name: self.meta.name.clone(),
            created_at: self.meta.created_at,
            device_count: self.instance.graph.device_count(),
            connection_count: self.instance.graph.connection_count(),
            attacked_count: self.instance.attacked.len(),
            budget: self.instance.budget,
        }
    }
}

#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    instances: RwLock<BTreeMap<String, StoredInstance>>,
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

impl Store {
    /// Opens `dir`, creating it if needed, and loads every stored instance.
    /// Files that fail to parse are skipped with a message on stderr.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Store> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut instances = BTreeMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
            let Some(id) = name.strip_suffix(".json") else { continue };
            if id.ends_with(".meta") {
                continue;
            }
            match load_one(&dir, id) {
                Ok(stored) => {
                    instances.insert(id.to_string(), stored);
                }
                Err(e) => eprintln!("skipping {}: {e}", path.display()),
            }
        }
        Ok(Store { dir, instances: RwLock::new(instances) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn insert(&self, instance: Instance, name: String) -> io::Result<StoredInstance> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let meta = Meta { name, created_at: Utc::now() };
        write_atomic(&self.dir.join(format!("{id}.meta.json")), &serde_json::to_string_pretty(&meta)?)?;
        write_atomic(&self.dir.join(format!("{id}.json")), &instance.to_json_string())?;
        let stored = StoredInstance { id: id.clone(), meta, instance: Arc::new(instance) };
        self.instances.write().expect("store lock").insert(id, stored.clone());
        Ok(stored)
    }

    pub fn get(&self, id: &str) -> Option<StoredInstance> {
        self.instances.read().expect("store lock").get(id).cloned()
    }

    pub fn list(&self) -> Vec<InstanceSummary> {
        let guard = self.instances.read().expect("store lock");
        let mut out: Vec<_> = guard.values().map(StoredInstance::summary).collect();
        out.sort_by(|a, b| (a.created_at, &a.id).cmp(&(b.created_at, &b.id)));
        out
    }

    /// Returns whether the instance existed.
    pub fn remove(&self, id: &str) -> io::Result<bool> {
        let mut guard = self.instances.write().expect("store lock");
        if guard.remove(id).is_none() {
            return Ok(false);
        }
        for file in [format!("{id}.json"), format!("{id}.meta.json")] {
            match fs::remove_file(self.dir.join(file)) {
                Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e),
                _ => {}
            }
        }
        Ok(true)
    }
}

fn load_one(dir: &Path, id: &str) -> Result<StoredInstance, String> {
    let text = fs::read_to_string(dir.join(format!("{id}.json"))).map_err(|e| e.to_string())?;
    let instance = Instance::from_json_str(&text).map_err(|e| e.to_string())?;
    let meta = fs::read_to_string(dir.join(format!("{id}.meta.json")))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_else(|| Meta { name: id.to_string(), created_at: Utc::now() });
    Ok(StoredInstance { id: id.to_string(), meta, instance: Arc::new(instance) })
}
