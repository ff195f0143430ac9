// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use harmnet_core::whatif::ScenarioOverlay;
use harmnet_core::{HarmConfig, HarmGraph, NodeId};
use serde_json::Value;
use tokio::sync::Semaphore;
use uuid::Uuid;

use crate::error::{ApiError, ErrorBody};

#[derive(Debug, Clone)]
pub struct Settings {
    /// Idle time after which a session is dropped.
    pub session_ttl: Duration,
    /// How long a ranking request waits before answering 202.
    pub ranking_timeout: Duration,
    /// Concurrent ranking jobs.
    pub workers: usize,
    /// Extra allowed CORS origins; localhost is always allowed.
    pub cors_origins: Vec<String>,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            session_ttl: Duration::from_secs(3600),
            ranking_timeout: Duration::from_secs(60),
            workers: std::thread::available_parallelism().map_or(2, |n| n.get()),
            cors_origins: Vec::new(),
        }
    }
}

pub struct Session {
    pub id: Uuid,
    pub target: NodeId,
    pub config: HarmConfig,
    pub overlay: ScenarioOverlay,
    pub baseline: f64,
}

pub struct SessionCell {
    last_used: Mutex<Instant>,
    pub session: Arc<tokio::sync::Mutex<Session>>,
}

impl SessionCell {
    fn touch(&self) {
        *self.last_used.lock().unwrap() = Instant::now();
    }

    fn idle(&self) -> Duration {
        self.last_used.lock().unwrap().elapsed()
    }
}

#[derive(Debug, Clone)]
pub enum JobState {
    Pending,
    Done(Value),
    Failed(ErrorBody),
}

struct Job {
    created: Instant,
    state: JobState,
}

pub struct AppState {
    pub settings: Settings,
    graph: RwLock<Option<Arc<HarmGraph>>>,
    sessions: Mutex<HashMap<Uuid, Arc<SessionCell>>>,
    jobs: Mutex<HashMap<Uuid, Job>>,
    pub pool: Arc<Semaphore>,
}

pub type Shared = Arc<AppState>;

impl AppState {
    pub fn new(settings: Settings) -> Shared {
        let workers = settings.workers.max(1);
        Arc::new(AppState {
            settings,
            graph: RwLock::new(None),
            sessions: Mutex::new(HashMap::new()),
            jobs: Mutex::new(HashMap::new()),
            pool: Arc::new(Semaphore::new(workers)),
        })
    }

    pub fn with_graph(settings: Settings, g: HarmGraph) -> Shared {
        let state = Self::new(settings);
        state.set_graph(g);
        state
    }

    /// Replaces the loaded graph. Existing sessions refer to node ids of the
    /// old graph, so they are dropped.
    pub fn set_graph(&self, g: HarmGraph) {
        *self.graph.write().unwrap() = Some(Arc::new(g));
        self.sessions.lock().unwrap().clear();
    }

    pub fn graph(&self) -> Option<Arc<HarmGraph>> {
        self.graph.read().unwrap().clone()
    }

    pub fn require_graph(&self) -> Result<Arc<HarmGraph>, ApiError> {
        self.graph().ok_or_else(ApiError::unavailable)
    }

    fn sweep(&self, sessions: &mut HashMap<Uuid, Arc<SessionCell>>) {
        let ttl = self.settings.session_ttl;
        sessions.retain(|_, cell| cell.idle() < ttl);
    }

    pub fn insert_session(&self, session: Session) -> Arc<SessionCell> {
        let id = session.id;
        let cell = Arc::new(SessionCell {
            last_used: Mutex::new(Instant::now()),
            session: Arc::new(tokio::sync::Mutex::new(session)),
        });
        let mut sessions = self.sessions.lock().unwrap();
        self.sweep(&mut sessions);
        sessions.insert(id, cell.clone());
        cell
    }

    pub fn session(&self, id: &str) -> Result<Arc<SessionCell>, ApiError> {
        let key = parse_id(id, "session")?;
        let mut sessions = self.sessions.lock().unwrap();
        self.sweep(&mut sessions);
        let cell = sessions.get(&key).cloned().ok_or_else(|| no_such("session", id))?;
        cell.touch();
        Ok(cell)
    }

    pub fn drop_session(&self, id: &str) -> Result<(), ApiError> {
        let key = parse_id(id, "session")?;
        let mut sessions = self.sessions.lock().unwrap();
        self.sweep(&mut sessions);
        sessions.remove(&key).map(|_| ()).ok_or_else(|| no_such("session", id))
    }

    pub fn session_count(&self) -> usize {
        let mut sessions = self.sessions.lock().unwrap();
        self.sweep(&mut sessions);
        sessions.len()
    }

    pub fn new_job(&self) -> Uuid {
        let id = Uuid::new_v4();
        let mut jobs = self.jobs.lock().unwrap();
        let ttl = self.settings.session_ttl;
        jobs.retain(|_, j| j.created.elapsed() < ttl || matches!(j.state, JobState::Pending));
        jobs.insert(
            id,
            Job {
                created: Instant::now(),
                state: JobState::Pending,
            },
        );
        id
    }

    pub fn finish_job(&self, id: Uuid, state: JobState) {
        if let Some(job) = self.jobs.lock().unwrap().get_mut(&id) {
            job.state = state;
        }
    }

    pub fn job(&self, id: &str) -> Result<JobState, ApiError> {
        let key = parse_id(id, "job")?;
        let jobs = self.jobs.lock().unwrap();
        jobs.get(&key).map(|j| j.state.clone()).ok_or_else(|| no_such("job", id))
    }
}

fn no_such(what: &str, id: &str) -> ApiError {
    ApiError::not_found(format!("no {what} `{id}`"))
}

fn parse_id(id: &str, what: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(id).map_err(|_| no_such(what, id))
}
