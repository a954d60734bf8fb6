//! Planner contract and built-in planners.
//!
//! A planner receives the rendered prompt plus the snapshot it was rendered
//! from and answers with raw response text, which the harness parses.
//! Only the oracle looks at ground truth.

mod baseline;
mod oracle;
mod remote;
mod student;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actionlang::PromptText;
use crate::scenegraph::EnvSnapshot;
use crate::world::Task;

pub use baseline::{GreedyPlanner, RandomPlanner};
pub use oracle::{oracle_action, search_plan, OraclePlanner, Plan};
pub use remote::{PlanRequest, PlanResponse, RemotePlanner, PROTOCOL_VERSION};
pub use student::StudentPlanner;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    /// No answer within the configured timeout. Scored as a format violation.
    #[error("planner timed out")]
    Timeout,
    #[error("planner transport error: {0}")]
    Transport(String),
    #[error("invalid planner reference {0:?}")]
    BadRef(String),
    #[error("cannot load student checkpoint: {0}")]
    Checkpoint(String),
}

/// Everything a planner may look at for one step.
pub struct PlanContext<'a> {
    pub snapshot: &'a EnvSnapshot,
    pub task: &'a Task,
    pub prompt: &'a PromptText,
}

pub trait Planner: Send {
    fn name(&self) -> String;

    /// Raw response text for the current step.
    fn respond(&mut self, ctx: &PlanContext<'_>) -> Result<String, PlannerError>;
}

/// Which planner to run, as given on the command line or in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PlannerRef {
    Oracle,
    Random { seed: u64 },
    Greedy,
    Remote { addr: String },
    Student { checkpoint: PathBuf },
}

impl PlannerRef {
    pub fn build(&self) -> Result<Box<dyn Planner>, PlannerError> {
        Ok(match self {
            PlannerRef::Oracle => Box::new(OraclePlanner),
            PlannerRef::Random { seed } => Box::new(RandomPlanner::new(*seed)),
            PlannerRef::Greedy => Box::new(GreedyPlanner),
            PlannerRef::Remote { addr } => Box::new(RemotePlanner::new(addr.clone())),
            PlannerRef::Student { checkpoint } => Box::new(StudentPlanner::load(checkpoint)?),
        })
    }

    /// Whether two runs with this planner are expected to be identical.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, PlannerRef::Remote { .. })
    }
}

fn well_formed_addr(addr: &str) -> bool {
    match addr.rsplit_once(':') {
        Some((host, port)) => !host.is_empty() && port.parse::<u16>().is_ok(),
        None => false,
    }
}

impl FromStr for PlannerRef {
    type Err = PlannerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PlannerError::BadRef(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        match (kind, arg) {
            ("oracle", None) => Ok(PlannerRef::Oracle),
            ("greedy", None) => Ok(PlannerRef::Greedy),
            ("random", None) => Ok(PlannerRef::Random { seed: 0 }),
            ("random", Some(seed)) => seed
                .parse()
                .map(|seed| PlannerRef::Random { seed })
                .map_err(|_| bad()),
            ("remote", Some(addr)) if well_formed_addr(addr) => Ok(PlannerRef::Remote {
                addr: addr.to_string(),
            }),
            ("student", Some(path)) if !path.is_empty() => Ok(PlannerRef::Student {
                checkpoint: PathBuf::from(path),
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for PlannerRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlannerRef::Oracle => f.write_str("oracle"),
            PlannerRef::Random { seed } => write!(f, "random:{seed}"),
            PlannerRef::Greedy => f.write_str("greedy"),
            PlannerRef::Remote { addr } => write!(f, "remote:{addr}"),
            PlannerRef::Student { checkpoint } => write!(f, "student:{}", checkpoint.display()),
        }
    }
}

impl From<PlannerRef> for String {
    fn from(p: PlannerRef) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for PlannerRef {
    type Error = PlannerError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
