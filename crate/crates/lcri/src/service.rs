//! Proof sessions: in-memory store with write-through persistence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use lcri_core::kernel::{ProofState, ProofStep, Rejection, Side, Status};
use lcri_core::parse;
use lcri_core::program::Equation;
use lcri_core::templates::{self, AutoConfig, LemmaId, TemplateMatch};
use lcri_core::trace::{Trace, TraceError};
use lcri_core::{Program, Solver};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum ServiceError {
    NotFound(String),
    BadRequest(String),
    Rejected(Rejection),
    Tactic(String),
    Conflict { expected: u64, found: u64 },
    Replay(TraceError),
    Io(String),
}

impl ServiceError {
    pub fn code(&self) -> String {
        match self {
            ServiceError::NotFound(_) => "not_found".into(),
            ServiceError::BadRequest(_) => "bad_request".into(),
            ServiceError::Rejected(r) => serde_json::to_value(r)
                .ok()
                .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(String::from))
                .unwrap_or_else(|| "rejected".into()),
            ServiceError::Tactic(_) => "tactic_failed".into(),
            ServiceError::Conflict { .. } => "conflict".into(),
            ServiceError::Replay(_) => "replay_divergence".into(),
            ServiceError::Io(_) => "io".into(),
        }
    }
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServiceError::NotFound(id) => write!(f, "no session `{id}`"),
            ServiceError::BadRequest(m) | ServiceError::Tactic(m) | ServiceError::Io(m) => f.write_str(m),
            ServiceError::Rejected(r) => write!(f, "{r}"),
            ServiceError::Conflict { expected, found } => {
                write!(f, "session is at version {found}, request expected {expected}")
            }
            ServiceError::Replay(e) => write!(f, "{e}"),
        }
    }
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Meta {
    id: String,
    goal: String,
    created: u64,
    updated: u64,
    version: u64,
}

pub struct Session {
    pub id: String,
    pub source: String,
    pub program: Program,
    pub goal: Equation,
    pub state: ProofState,
    pub created: u64,
    pub updated: u64,
    /// Bumped by every accepted change.
    pub version: u64,
    /// Template matches of the program, found on creation.
    pub matches: Vec<TemplateMatch>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalView {
    pub index: usize,
    pub lhs: String,
    pub rhs: String,
    pub constraint: String,
    pub bound_left: Option<String>,
    pub bound_right: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementView {
    pub requirement: String,
    pub discharged: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub id: String,
    pub version: u64,
    pub goal: String,
    pub status: Status,
    pub goals: Vec<GoalView>,
    pub hypotheses: Vec<String>,
    pub axioms: Vec<String>,
    pub obligations: Vec<usize>,
    pub requirements: Vec<RequirementView>,
    pub steps: usize,
    pub created: u64,
    pub updated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub goal: String,
    pub status: Status,
    pub version: u64,
    pub created: u64,
    pub updated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tactic", rename_all = "snake_case")]
pub enum Tactic {
    TwoSided { target: usize },
    OneSided { target: usize, side: Side, entry: LemmaId },
    Auto { target: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticSuggestion {
    pub tactic: Tactic,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchView {
    pub symbol: String,
    pub kind: String,
    pub context: String,
    pub function: String,
    pub bound: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestions {
    pub target: usize,
    pub steps: Vec<ProofStep>,
    pub tactics: Vec<TacticSuggestion>,
    pub matches: Vec<MatchView>,
}

impl Session {
    fn new(id: String, source: String, program: Program, goal: Equation, solver: &Solver) -> Session {
        let t = now();
        Session {
            matches: templates::match_all(&program),
            state: ProofState::new(program.clone(), solver.clone(), goal.clone()),
            id,
            source,
            program,
            goal,
            created: t,
            updated: t,
            version: 0,
        }
    }

    pub fn view(&self) -> StateView {
        let mut st = self.state.clone();
        st.discharge_requirements();
        StateView {
            id: self.id.clone(),
            version: self.version,
            goal: self.goal.to_string(),
            status: st.status(),
            goals: st
                .goals()
                .iter()
                .enumerate()
                .map(|(index, c)| GoalView {
                    index,
                    lhs: c.equation.lhs.to_string(),
                    rhs: c.equation.rhs.to_string(),
                    constraint: c.equation.constraint.to_string(),
                    bound_left: c.bound(Side::Left).map(|t| t.to_string()),
                    bound_right: c.bound(Side::Right).map(|t| t.to_string()),
                })
                .collect(),
            hypotheses: st.hypotheses().iter().map(|h| h.to_string()).collect(),
            axioms: st.axioms().iter().map(|a| a.to_string()).collect(),
            obligations: st.obligations().iter().copied().collect(),
            requirements: st
                .requirements()
                .iter()
                .map(|r| RequirementView {
                    requirement: r.requirement.to_string(),
                    discharged: r.discharged,
                })
                .collect(),
            steps: st.trace().len(),
            created: self.created,
            updated: self.updated,
        }
    }

    fn summary(&self) -> SessionSummary {
        let v = self.view();
        SessionSummary {
            id: v.id,
            goal: v.goal,
            status: v.status,
            version: v.version,
            created: v.created,
            updated: v.updated,
        }
    }

    pub fn trace(&self) -> Trace {
        Trace::of(&self.program, &self.state)
    }

    pub fn suggestions(&self, target: usize) -> Suggestions {
        let steps = self.state.enumerate_steps(target);
        let mut tactics = Vec::new();
        if target < self.state.goals().len() {
            tactics.push(TacticSuggestion {
                tactic: Tactic::TwoSided { target },
                label: "two-sided template matching".into(),
            });
            for side in [Side::Left, Side::Right] {
                for e in templates::lemma_bank() {
                    tactics.push(TacticSuggestion {
                        tactic: Tactic::OneSided { target, side, entry: e.id },
                        label: format!("one-sided on the {side:?} side via {}", e.id).to_lowercase(),
                    });
                }
            }
            tactics.push(TacticSuggestion {
                tactic: Tactic::Auto { target },
                label: "automatic".into(),
            });
        }
        let matches = self
            .matches
            .iter()
            .map(|m| MatchView {
                symbol: m.symbol.to_string(),
                kind: m.kind.to_string(),
                context: m.context.to_string(),
                function: m.function.to_string(),
                bound: m.bound.to_string(),
            })
            .collect();
        Suggestions {
            target,
            steps,
            tactics,
            matches,
        }
    }

    fn check_version(&self, expected: Option<u64>) -> Result<(), ServiceError> {
        match expected {
            Some(e) if e != self.version => Err(ServiceError::Conflict {
                expected: e,
                found: self.version,
            }),
            _ => Ok(()),
        }
    }

    fn replace(&mut self, state: ProofState) {
        self.state = state;
        self.version += 1;
        self.updated = now();
    }

    fn replay(&self, steps: &[ProofStep]) -> Result<ProofState, ServiceError> {
        let mut t = self.trace();
        t.steps = steps.to_vec();
        let mut st = ProofState::new(self.program.clone(), self.state.solver().clone(), self.goal.clone()).with_mode(t.mode);
        for (index, s) in t.steps.iter().enumerate() {
            st.apply(s.clone()).map_err(|reason| {
                ServiceError::Replay(TraceError::Divergence {
                    index,
                    step: s.to_string(),
                    reason,
                })
            })?;
        }
        Ok(st)
    }
}

/// All sessions, keyed by id. Each session has its own lock, so steps on
/// one session are serialized while others proceed.
pub struct Store {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    dir: Option<PathBuf>,
    solver: Solver,
    auto: AutoConfig,
}

impl Store {
    pub fn new(solver: Solver, dir: Option<PathBuf>) -> Store {
        Store {
            sessions: Mutex::new(BTreeMap::new()),
            dir,
            solver,
            auto: AutoConfig::default(),
        }
    }

    /// Opens a store over `dir`, replaying every persisted session. Sessions
    /// whose trace does not replay are reported and left out.
    pub fn open(solver: Solver, dir: PathBuf) -> Result<(Store, Vec<(String, ServiceError)>), ServiceError> {
        std::fs::create_dir_all(&dir).map_err(|e| ServiceError::Io(e.to_string()))?;
        let store = Store::new(solver, Some(dir.clone()));
        let mut failures = Vec::new();
        let entries = std::fs::read_dir(&dir).map_err(|e| ServiceError::Io(e.to_string()))?;
        for entry in entries.flatten() {
            let id = entry.file_name().to_string_lossy().into_owned();
            match store.load(&entry.path()) {
                Ok(s) => {
                    store.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(s)));
                }
                Err(e) => failures.push((id, e)),
            }
        }
        Ok((store, failures))
    }

    fn load(&self, path: &Path) -> Result<Session, ServiceError> {
        let read = |name: &str| std::fs::read_to_string(path.join(name)).map_err(|e| ServiceError::Io(format!("{name}: {e}")));
        let source = read("program.lcstrs")?;
        let meta: Meta = serde_json::from_str(&read("session.json")?).map_err(|e| ServiceError::Io(e.to_string()))?;
        let trace = Trace::from_json(&read("trace.json")?).map_err(ServiceError::Replay)?;
        let program = parse::parse_program(&source).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let goal = trace.goal_equation(&program).map_err(ServiceError::Replay)?;
        let state = trace.replay(&program, &self.solver).map_err(ServiceError::Replay)?;
        let mut s = Session::new(meta.id, source, program, goal, &self.solver);
        s.state = state;
        s.created = meta.created;
        s.updated = meta.updated;
        s.version = meta.version;
        Ok(s)
    }

    fn persist(&self, s: &Session) -> Result<(), ServiceError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let d = dir.join(&s.id);
        let io = |e: std::io::Error| ServiceError::Io(e.to_string());
        std::fs::create_dir_all(&d).map_err(io)?;
        std::fs::write(d.join("program.lcstrs"), &s.source).map_err(io)?;
        std::fs::write(d.join("trace.json"), s.trace().to_json()).map_err(io)?;
        let meta = Meta {
            id: s.id.clone(),
            goal: s.goal.to_string(),
            created: s.created,
            updated: s.updated,
            version: s.version,
        };
        std::fs::write(d.join("session.json"), serde_json::to_string_pretty(&meta).expect("serializable")).map_err(io)
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.into()))
    }

    /// Creates a session for goal `goal` of the program (default the first),
    /// or for `equation` when given.
    pub fn create(&self, source: &str, goal: Option<usize>, equation: Option<&str>) -> Result<StateView, ServiceError> {
        let program = parse::parse_program(source).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        let eq = match equation {
            Some(text) => {
                parse::parse_equation(&program, text, &Default::default(), &[]).map_err(|e| ServiceError::BadRequest(e.to_string()))?
            }
            None => {
                let k = goal.unwrap_or(0);
                program
                    .goals
                    .get(k)
                    .cloned()
                    .ok_or_else(|| ServiceError::BadRequest(format!("program has no goal {k}")))?
            }
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let s = Session::new(id.clone(), source.into(), program, eq, &self.solver);
        self.persist(&s)?;
        let view = s.view();
        self.sessions.lock().unwrap().insert(id, Arc::new(Mutex::new(s)));
        Ok(view)
    }

    pub fn list(&self) -> Vec<SessionSummary> {
        let all: Vec<_> = self.sessions.lock().unwrap().values().cloned().collect();
        all.iter().map(|s| s.lock().unwrap().summary()).collect()
    }

    pub fn view(&self, id: &str) -> Result<StateView, ServiceError> {
        Ok(self.get(id)?.lock().unwrap().view())
    }

    pub fn delete(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .lock()
            .unwrap()
            .remove(id)
            .ok_or_else(|| ServiceError::NotFound(id.into()))?;
        if let Some(dir) = &self.dir {
            let _ = std::fs::remove_dir_all(dir.join(id));
        }
        Ok(())
    }

    pub fn suggestions(&self, id: &str, target: usize) -> Result<Suggestions, ServiceError> {
        Ok(self.get(id)?.lock().unwrap().suggestions(target))
    }

    fn modify(
        &self,
        id: &str,
        expected: Option<u64>,
        f: impl FnOnce(&Session) -> Result<ProofState, ServiceError>,
    ) -> Result<StateView, ServiceError> {
        let cell = self.get(id)?;
        let mut s = cell.lock().unwrap();
        s.check_version(expected)?;
        let next = f(&s)?;
        s.replace(next);
        self.persist(&s)?;
        Ok(s.view())
    }

    pub fn apply_step(&self, id: &str, step: ProofStep, expected: Option<u64>) -> Result<StateView, ServiceError> {
        self.modify(id, expected, |s| s.state.check(&step).map_err(ServiceError::Rejected))
    }

    pub fn apply_tactic(&self, id: &str, tactic: &Tactic, expected: Option<u64>) -> Result<StateView, ServiceError> {
        let cfg = self.auto.clone();
        self.modify(id, expected, |s| {
            let st = &s.state;
            match *tactic {
                Tactic::TwoSided { target } => templates::two_sided_from(st, target, &cfg)
                    .map(|r| r.state)
                    .map_err(|e| ServiceError::Tactic(e.join("; "))),
                Tactic::OneSided { target, side, entry } => templates::one_sided_from(st, target, side, entry, &cfg)
                    .map(|r| r.state)
                    .map_err(ServiceError::Tactic),
                Tactic::Auto { target } => {
                    let r = templates::auto_prove_from(st, target, &cfg);
                    if r.state.goals().len() < st.goals().len() {
                        Ok(r.state)
                    } else {
                        let why = r.residual().map(|g| format!("open: {g}")).unwrap_or_default();
                        Err(ServiceError::Tactic(format!("automatic proof failed; {why}")))
                    }
                }
            }
        })
    }

    /// Drops the last `count` steps and replays the rest.
    pub fn undo(&self, id: &str, count: usize, expected: Option<u64>) -> Result<StateView, ServiceError> {
        self.modify(id, expected, |s| {
            let steps = s.state.trace();
            if count > steps.len() {
                return Err(ServiceError::BadRequest(format!("only {} steps to undo", steps.len())));
            }
            s.replay(&steps[..steps.len() - count])
        })
    }

    pub fn export(&self, id: &str) -> Result<Trace, ServiceError> {
        Ok(self.get(id)?.lock().unwrap().trace())
    }

    /// Replaces the session's steps by those of `trace`, which must have been
    /// recorded for the same program and goal.
    pub fn import(&self, id: &str, trace: &Trace, expected: Option<u64>) -> Result<StateView, ServiceError> {
        let solver = self.solver.clone();
        self.modify(id, expected, |s| {
            let goal = trace.goal_equation(&s.program).map_err(ServiceError::Replay)?;
            if goal != s.goal {
                return Err(ServiceError::BadRequest(format!("trace proves {goal}, session goal is {}", s.goal)));
            }
            trace.replay(&s.program, &solver).map_err(ServiceError::Replay)
        })
    }
}
