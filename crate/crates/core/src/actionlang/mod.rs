//! Action grammar, prompt rendering, response parsing and action execution.
//!
//! Commands follow `verb(arg, ...)`:
//!
//! ```text
//! command  = verb ws "(" ws [ arg { ws "," ws arg } ] ws ")"
//! verb     = "navigate" | "go_to_and_open" | "close" | "explore" | "done"
//! arg      = name | '"' name '"' | "'" name "'"
//! name     = ( lower | digit | "_" | "-" ) { lower | digit | "_" | "-" }
//! ```
//!
//! Verbs match case-insensitively and arguments are lowercased.

mod execute;
mod parse;
mod prompt;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use execute::{check_executable, execute, StepOutcome, Target};
pub use parse::{parse_command, parse_response, ParseFailure, PlannerResponse};
pub use prompt::{render_response, serialize_observation, PromptText, SYSTEM_PROMPT};

/// One high-level robot command.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Action {
    Navigate { room: String, object: String },
    GoToAndOpen { room: String, object: String },
    Close,
    Explore { room: String },
    Done,
}

/// Verb of an action, used as the student policy's action template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Navigate,
    GoToAndOpen,
    Close,
    Explore,
    Done,
}

impl Verb {
    pub const ALL: [Verb; 5] = [
        Verb::Navigate,
        Verb::GoToAndOpen,
        Verb::Close,
        Verb::Explore,
        Verb::Done,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Navigate => "navigate",
            Verb::GoToAndOpen => "go_to_and_open",
            Verb::Close => "close",
            Verb::Explore => "explore",
            Verb::Done => "done",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Verb::Navigate | Verb::GoToAndOpen => 2,
            Verb::Explore => 1,
            Verb::Close | Verb::Done => 0,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Verb> {
        Verb::ALL.into_iter().find(|v| v.as_str() == name)
    }
}

impl Action {
    pub fn verb(&self) -> Verb {
        match self {
            Action::Navigate { .. } => Verb::Navigate,
            Action::GoToAndOpen { .. } => Verb::GoToAndOpen,
            Action::Close => Verb::Close,
            Action::Explore { .. } => Verb::Explore,
            Action::Done => Verb::Done,
        }
    }

    pub fn navigate(room: &str, object: &str) -> Self {
        Action::Navigate {
            room: room.into(),
            object: object.into(),
        }
    }

    pub fn open(room: &str, object: &str) -> Self {
        Action::GoToAndOpen {
            room: room.into(),
            object: object.into(),
        }
    }

    pub fn explore(room: &str) -> Self {
        Action::Explore { room: room.into() }
    }

    /// Room argument, if the verb takes one.
    pub fn room(&self) -> Option<&str> {
        match self {
            Action::Navigate { room, .. }
            | Action::GoToAndOpen { room, .. }
            | Action::Explore { room } => Some(room),
            Action::Close | Action::Done => None,
        }
    }

    pub fn object(&self) -> Option<&str> {
        match self {
            Action::Navigate { object, .. } | Action::GoToAndOpen { object, .. } => Some(object),
            _ => None,
        }
    }
}

/// Canonical lowercase command text.
pub fn render_command(a: &Action) -> String {
    match a {
        Action::Navigate { room, object } => format!("navigate({room}, {object})"),
        Action::GoToAndOpen { room, object } => format!("go_to_and_open({room}, {object})"),
        Action::Close => "close()".into(),
        Action::Explore { room } => format!("explore({room})"),
        Action::Done => "done()".into(),
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_command(self))
    }
}

impl From<Action> for String {
    fn from(a: Action) -> String {
        render_command(&a)
    }
}

impl TryFrom<String> for Action {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        parse_command(&s).map_err(|f| format!("invalid command {s:?}: {f}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_renderings() {
        assert_eq!(render_command(&Action::Done), "done()");
        assert_eq!(render_command(&Action::explore("bedroom")), "explore(bedroom)");
        assert_eq!(render_command(&Action::Close), "close()");
        assert_eq!(
            render_command(&Action::open("kitchen", "cabinet_1")),
            "go_to_and_open(kitchen, cabinet_1)"
        );
    }

    #[test]
    fn serde_uses_command_text() {
        let a = Action::navigate("kitchen", "fridge_1");
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, r#""navigate(kitchen, fridge_1)""#);
        assert_eq!(serde_json::from_str::<Action>(&json).unwrap(), a);
        assert!(serde_json::from_str::<Action>(r#""fly()""#).is_err());
    }
}
