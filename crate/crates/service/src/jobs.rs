//! Background solve jobs.
//!
//! Every state change is journaled to `<dir>/jobs/<id>.json`. Jobs are not
//! resumed: on startup any journaled job that had not finished is marked
//! failed.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use cyberseg_core::{Instance, Solution, SolveRequest, SolveStatus};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Timeout,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Timeout | JobState::Failed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveJob {
    pub id: String,
    pub instance_id: String,
    pub params: SolveRequest,
    pub state: JobState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Solution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
}

type Key = (String, SolveRequest);

#[derive(Debug, Default)]
struct Inner {
    jobs: HashMap<String, SolveJob>,
    /// Unfinished jobs by (instance, params).
    active: HashMap<Key, String>,
}

#[derive(Debug)]
pub struct Jobs {
    dir: PathBuf,
    inner: Mutex<Inner>,
}

impl Jobs {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Jobs> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut inner = Inner::default();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let Ok(mut job) = fs::read_to_string(&path)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str::<SolveJob>(&t).map_err(|e| e.to_string()))
            else {
                eprintln!("skipping unreadable job file {}", path.display());
                continue;
            };
            if !job.state.is_terminal() {
                job.state = JobState::Failed;
                job.error = Some("service restarted before the job finished".into());
                job.finished_at = Some(Utc::now());
                fs::write(&path, serde_json::to_string_pretty(&job)?)?;
            }
            inner.jobs.insert(job.id.clone(), job);
        }
        Ok(Jobs { dir, inner: Mutex::new(inner) })
    }

    pub fn get(&self, id: &str) -> Option<SolveJob> {
        self.inner.lock().expect("jobs lock").jobs.get(id).cloned()
    }

    fn journal(&self, job: &SolveJob) {
        let path = self.dir.join(format!("{}.json", job.id));
        // write-then-rename so a concurrent reader never sees a partial file
        let tmp = path.with_extension("tmp");
        let written = serde_json::to_string_pretty(job)
            .map_err(io::Error::from)
            .and_then(|text| fs::write(&tmp, text))
            .and_then(|()| fs::rename(&tmp, &path));
        if let Err(e) = written {
            eprintln!("could not journal job {}: {e}", job.id);
        }
    }

    /// Registers a queued job, or returns the id of the identical job that is
    /// still unfinished.
    pub fn enqueue(&self, instance_id: &str, params: SolveRequest) -> Result<SolveJob, String> {
        let mut inner = self.inner.lock().expect("jobs lock");
        let key = (instance_id.to_string(), params.clone());
        if let Some(existing) = inner.active.get(&key) {
            return Err(existing.clone());
        }
        let job = SolveJob {
            id: uuid::Uuid::new_v4().simple().to_string(),
            instance_id: instance_id.to_string(),
            params,
            state: JobState::Queued,
            result: None,
            error: None,
            created_at: Utc::now(),
            finished_at: None,
        };
        inner.active.insert(key, job.id.clone());
        inner.jobs.insert(job.id.clone(), job.clone());
        self.journal(&job);
        Ok(job)
    }

    /// Applies `f` to the job; states only move forward.
    fn update(&self, id: &str, f: impl FnOnce(&mut SolveJob)) {
        let mut inner = self.inner.lock().expect("jobs lock");
        let Some(job) = inner.jobs.get_mut(id) else { return };
        let before = job.state;
        f(job);
        debug_assert!(job.state as u8 >= before as u8);
        let job = job.clone();
        if job.state.is_terminal() {
            inner.active.remove(&(job.instance_id.clone(), job.params.clone()));
        }
        drop(inner);
        self.journal(&job);
    }

    /// Runs the job to completion on the current thread.
    pub fn run(&self, id: &str, instance: &Instance) {
        let Some(job) = self.get(id) else { return };
        self.update(id, |j| j.state = JobState::Running);
        let outcome = job.params.run(&instance.graph, &instance.attacked);
        self.update(id, |j| {
            match outcome {
                Ok(solution) => {
                    j.state = match solution.status {
                        SolveStatus::Optimal => JobState::Done,
                        SolveStatus::TimeoutBestEffort => JobState::Timeout,
                    };
                    j.result = Some(solution);
                }
                Err(e) => {
                    j.state = JobState::Failed;
                    j.error = Some(e.to_string());
                }
            }
            j.finished_at = Some(Utc::now());
        });
    }

    /// Queues the job on the blocking thread pool.
    pub fn spawn(self: &Arc<Self>, id: String, instance: Arc<Instance>) {
        let jobs = Arc::clone(self);
        tokio::task::spawn_blocking(move || jobs.run(&id, &instance));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cyberseg_core::{AttackSet, Graph};

    fn path() -> Instance {
        let g = Graph::from_ids([0, 1, 2], [(0, 1), (1, 2)]).unwrap();
        Instance::new(g, AttackSet::new([1]), None).unwrap()
    }

    #[test]
    fn duplicate_active_jobs_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let jobs = Jobs::open(dir.path()).unwrap();
        let params = SolveRequest { k: 1, ..Default::default() };
        let first = jobs.enqueue("a", params.clone()).unwrap();
        assert_eq!(jobs.enqueue("a", params.clone()), Err(first.id.clone()));
        assert!(jobs.enqueue("b", params.clone()).is_ok());
        jobs.run(&first.id, &path());
        let done = jobs.get(&first.id).unwrap();
        assert_eq!(done.state, JobState::Done);
        assert_eq!(done.result.unwrap().chosen, vec![1]);
        assert!(jobs.enqueue("a", params).is_ok());
    }

    #[test]
    fn unfinished_jobs_fail_after_restart() {
        let dir = tempfile::tempdir().unwrap();
        let jobs = Jobs::open(dir.path()).unwrap();
        let pending = jobs.enqueue("a", SolveRequest::default()).unwrap();
        let finished = jobs.enqueue("a", SolveRequest { k: 1, ..Default::default() }).unwrap();
        jobs.run(&finished.id, &path());
        drop(jobs);

        let reopened = Jobs::open(dir.path()).unwrap();
        let job = reopened.get(&pending.id).unwrap();
        assert_eq!(job.state, JobState::Failed);
        assert!(job.error.unwrap().contains("restarted"));
        assert_eq!(reopened.get(&finished.id).unwrap().state, JobState::Done);
        // the failed job no longer blocks an identical submission
        assert!(reopened.enqueue("a", SolveRequest::default()).is_ok());
    }

    #[test]
    fn invalid_parameters_fail_the_job() {
        let dir = tempfile::tempdir().unwrap();
        let jobs = Jobs::open(dir.path()).unwrap();
        let job = jobs.enqueue("a", SolveRequest { timeout_secs: 0, ..Default::default() }).unwrap();
        jobs.run(&job.id, &path());
        assert_eq!(jobs.get(&job.id).unwrap().state, JobState::Failed);
    }
}
