use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Action, ParseFailure};
use crate::navgraph::NodeId;
use crate::scenegraph::EnvSnapshot;
use crate::world::ObjectId;

/// Result of one step.
///
/// Exactly one of `action` and `parse_failure` is set. A parse failure is
/// never executable and moves nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub action: Option<Action>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parse_failure: Option<ParseFailure>,
    pub executable: bool,
    pub new_nodes: usize,
    pub dist_delta: f64,
    pub revealed: BTreeSet<ObjectId>,
    pub done_called: bool,
    /// Navigation nodes traversed, start and end included.
    #[serde(default)]
    pub path: Vec<NodeId>,
}

impl StepOutcome {
    pub fn parsed(&self) -> bool {
        self.parse_failure.is_none()
    }

    /// Counts as a retrial: unparseable or not executable.
    pub fn is_retrial(&self) -> bool {
        !self.executable
    }
}

/// What an executable action resolves to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Move(NodeId),
    Open { object: ObjectId, at: NodeId },
    Close(ObjectId),
    Done,
}

/// Decides executability from the agent-visible part of `s`: the scene
/// graph, the explored node set, open containers and the robot's node.
pub fn check_executable(a: &Action, s: &EnvSnapshot) -> Option<Target> {
    let reachable = |n: NodeId| s.site.table.distance(s.robot_node, n).is_finite();
    match a {
        Action::Navigate { room, object } => {
            let o = s.scene.object_by_name(room, object)?;
            let at = s.site.anchor(o.id);
            reachable(at).then_some(Target::Move(at))
        }
        Action::GoToAndOpen { room, object } => {
            let o = s.scene.object_by_name(room, object)?;
            let spec = s.house().object(o.id)?;
            if !spec.articulated || s.world.is_open(o.id) {
                return None;
            }
            let at = s.site.anchor(o.id);
            reachable(at).then_some(Target::Open { object: o.id, at })
        }
        Action::Close => s
            .world
            .opened
            .iter()
            .rev()
            .find(|o| s.site.anchor(**o) == s.robot_node)
            .map(|o| Target::Close(*o)),
        Action::Explore { room } => {
            let room = s.scene.room_by_name(room)?;
            s.unexplored_in(room.id)
                .into_iter()
                .filter(|n| reachable(*n))
                .min_by(|x, y| {
                    let dx = s.site.table.distance(s.robot_node, *x);
                    let dy = s.site.table.distance(s.robot_node, *y);
                    dx.total_cmp(&dy).then(x.cmp(y))
                })
                .map(Target::Move)
        }
        Action::Done => Some(Target::Done),
    }
}

/// Walks the shortest path to `to`, observing every room entered on the way.
/// Returns (distance, path, newly discovered node count).
fn walk(s: &mut EnvSnapshot, to: NodeId) -> (f64, Vec<NodeId>, usize) {
    let site = s.site.clone();
    let (d, path) = site
        .table
        .path(s.robot_node, to)
        .expect("target reachability checked");
    let mut rooms = Vec::new();
    let mut new = 0;
    for n in &path {
        if let Some(r) = site.room_of_node(*n) {
            if !rooms.contains(&r) {
                rooms.push(r);
                new += s.observe_room(r);
            }
        }
    }
    s.robot_node = to;
    s.world.robot_cell = site.nav().node(to).expect("node exists").cell;
    s.world.dist_total += d;
    (d, path, new)
}

/// Applies a parsed action (or a parse failure) to `s`.
///
/// Inexecutable actions and parse failures only advance the step counter
/// and the previous-action fields.
pub fn execute(parsed: &Result<Action, ParseFailure>, s: &EnvSnapshot) -> (EnvSnapshot, StepOutcome) {
    let mut next = s.clone();
    next.world.step_index += 1;
    let mut out = StepOutcome {
        action: parsed.as_ref().ok().cloned(),
        parse_failure: parsed.as_ref().err().copied(),
        executable: false,
        new_nodes: 0,
        dist_delta: 0.0,
        revealed: BTreeSet::new(),
        done_called: false,
        path: Vec::new(),
    };
    let target = parsed.as_ref().ok().and_then(|a| check_executable(a, s));
    next.prev_action = out.action.clone();
    next.prev_failed = target.is_none();
    let Some(target) = target else {
        return (next, out);
    };
    out.executable = true;
    match target {
        Target::Move(to) => {
            let (d, path, new) = walk(&mut next, to);
            out.dist_delta = d;
            out.path = path;
            out.new_nodes = new;
        }
        Target::Open { object, at } => {
            let (d, path, new) = walk(&mut next, at);
            out.dist_delta = d;
            out.path = path;
            next.world.opened.push(object);
            let room = s.house().object(object).expect("known object").room;
            out.new_nodes = new + next.observe_room(room);
        }
        Target::Close(object) => {
            next.world.opened.retain(|o| *o != object);
        }
        Target::Done => out.done_called = true,
    }
    out.revealed = next.world.seen.difference(&s.world.seen).copied().collect();
    (next, out)
}
