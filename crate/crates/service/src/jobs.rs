use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use intervene_core::SearchControl;
use serde::{Deserialize, Serialize};

use crate::api::BoundResponse;
use crate::error::ErrorBody;

/// Finished jobs kept for polling before the oldest are dropped.
const RETAINED_FINISHED: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Running,
    Done,
    Failed,
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub explored: u64,
    pub total: u64,
}

/// What `GET /jobs/{job}` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    pub model: String,
    pub status: JobStatus,
    pub progress: Progress,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<BoundResponse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorBody>,
}

#[derive(Debug)]
enum Outcome {
    Running,
    Done(BoundResponse),
    Failed(ErrorBody),
    Cancelled,
}

#[derive(Debug)]
pub struct Job {
    id: u64,
    model: String,
    total: u64,
    pub control: SearchControl,
    outcome: Mutex<Outcome>,
}

impl Job {
    pub fn id(&self) -> String {
        self.id.to_string()
    }

    pub fn view(&self) -> JobView {
        let outcome = self.outcome.lock().unwrap();
        let (explored, _) = self.control.progress();
        let (status, result, error) = match &*outcome {
            Outcome::Running => (JobStatus::Running, None, None),
            Outcome::Done(r) => (JobStatus::Done, Some(r.clone()), None),
            Outcome::Failed(e) => (JobStatus::Failed, None, Some(e.clone())),
            Outcome::Cancelled => (JobStatus::Cancelled, None, None),
        };
        let explored = if status == JobStatus::Done {
            self.total
        } else {
            explored.min(self.total)
        };
        JobView {
            id: self.id(),
            model: self.model.clone(),
            status,
            progress: Progress {
                explored,
                total: self.total,
            },
            result,
            error,
        }
    }

    fn is_running(&self) -> bool {
        matches!(*self.outcome.lock().unwrap(), Outcome::Running)
    }

    /// Records the search outcome unless the job was cancelled meanwhile.
    pub fn finish(&self, result: Result<BoundResponse, ErrorBody>) {
        let mut outcome = self.outcome.lock().unwrap();
        if matches!(*outcome, Outcome::Running) {
            *outcome = match result {
                Ok(r) => Outcome::Done(r),
                Err(e) if e.code == "cancelled" => Outcome::Cancelled,
                Err(e) => Outcome::Failed(e),
            };
        }
    }

    /// Returns false if the job had already finished.
    pub fn cancel(&self) -> bool {
        let mut outcome = self.outcome.lock().unwrap();
        if matches!(*outcome, Outcome::Running) {
            self.control.cancel();
            *outcome = Outcome::Cancelled;
            true
        } else {
            false
        }
    }
}

/// Bound jobs, with a cap on concurrently running jobs per model.
#[derive(Debug)]
pub struct JobRegistry {
    next: AtomicU64,
    per_model: usize,
    jobs: Mutex<BTreeMap<u64, Arc<Job>>>,
}

impl JobRegistry {
    pub fn new(per_model: usize) -> Self {
        Self {
            next: AtomicU64::new(1),
            per_model,
            jobs: Mutex::new(BTreeMap::new()),
        }
    }

    /// Registers a running job, or `None` if the model is at its limit.
    pub fn start(&self, model: &str, total: u64) -> Option<Arc<Job>> {
        let mut jobs = self.jobs.lock().unwrap();
        let running = jobs
            .values()
            .filter(|j| j.model == model && j.is_running())
            .count();
        if running >= self.per_model {
            return None;
        }
        let finished: Vec<u64> = jobs
            .values()
            .filter(|j| !j.is_running())
            .map(|j| j.id)
            .collect();
        if finished.len() >= RETAINED_FINISHED {
            for id in &finished[..finished.len() + 1 - RETAINED_FINISHED] {
                jobs.remove(id);
            }
        }
        let job = Arc::new(Job {
            id: self.next.fetch_add(1, Ordering::Relaxed),
            model: model.to_string(),
            total,
            control: SearchControl::new(),
            outcome: Mutex::new(Outcome::Running),
        });
        jobs.insert(job.id, job.clone());
        Some(job)
    }

    pub fn get(&self, id: &str) -> Option<Arc<Job>> {
        let id: u64 = id.parse().ok()?;
        self.jobs.lock().unwrap().get(&id).cloned()
    }
}
