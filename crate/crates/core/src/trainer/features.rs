//! Fixed-length features for the student policy.
//!
//! Each candidate action gets the vector `[state | candidate]`. The state part
//! is shared by all candidates and also feeds the value head.

use serde::{Deserialize, Serialize};

use crate::actionlang::{check_executable, Action, Target, Verb};
use crate::scenegraph::{goal_visible, EnvSnapshot};
use crate::world::catalog::{container_affinity, room_affinity};
use crate::world::{RoomId, Task};

pub const FEATURE_VERSION: u32 = 1;

pub const STATE_FEATURES: [&str; 14] = [
    "bias",
    "goal_visible",
    "goal_room_known",
    "unexplored_rooms",
    "unexplored_nodes",
    "closed_containers",
    "dist_total",
    "step",
    "prev_none",
    "prev_navigate",
    "prev_open",
    "prev_close",
    "prev_explore",
    "prev_failed",
];

pub const CANDIDATE_FEATURES: [&str; 8] = [
    "travel",
    "room_affinity",
    "room_unexplored",
    "room_unexplored_nodes",
    "container_affinity",
    "goal_category",
    "repeat",
    "same_room",
];

pub const N_STATE: usize = STATE_FEATURES.len();
pub const N_FEATURES: usize = N_STATE + CANDIDATE_FEATURES.len();

const ROOM_SCALE: f64 = 4.0;
const NODE_SCALE: f64 = 20.0;
const DIST_SCALE: f64 = 20.0;
const STEP_SCALE: f64 = 30.0;
const TRAVEL_SCALE: f64 = 10.0;
const ROOM_NODE_SCALE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub action: Action,
    pub verb: Verb,
    pub phi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurized {
    pub state: Vec<f64>,
    pub candidates: Vec<Candidate>,
}

impl Featurized {
    pub fn index_of(&self, a: &Action) -> Option<usize> {
        self.candidates.iter().position(|c| &c.action == a)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.candidates.iter().map(|c| c.phi.clone()).collect()
    }

    pub fn verbs(&self) -> Vec<Verb> {
        self.candidates.iter().map(|c| c.verb).collect()
    }
}

/// Executable actions in id order (explore, open, navigate), then `close()`
/// if possible, then `done()`. With an empty scene graph the candidates are
/// `explore(<current room>)` and `done()`.
pub fn candidate_actions(s: &EnvSnapshot) -> Vec<Action> {
    let house = s.house();
    if s.scene.rooms.is_empty() {
        let mut out: Vec<Action> = s
            .robot_room()
            .map(|r| Action::explore(&house.room(r).name))
            .into_iter()
            .collect();
        out.push(Action::Done);
        return out;
    }
    let mut out = Vec::new();
    for room in s.scene.rooms.values() {
        out.push(Action::explore(&room.name));
    }
    for o in s.scene.objects.values() {
        out.push(Action::open(&house.room(o.room).name, &o.name));
    }
    for o in s.scene.objects.values() {
        out.push(Action::navigate(&house.room(o.room).name, &o.name));
    }
    out.push(Action::Close);
    out.retain(|a| check_executable(a, s).is_some());
    out.push(Action::Done);
    out
}

fn state_features(s: &EnvSnapshot, task: &Task) -> Vec<f64> {
    let house = s.house();
    let unexplored: Vec<(RoomId, usize)> = s
        .scene
        .rooms
        .keys()
        .map(|r| (*r, s.unexplored_in(*r).len()))
        .filter(|(_, n)| *n > 0)
        .collect();
    let goal_room_known = unexplored
        .iter()
        .any(|(r, _)| room_affinity(house.room(*r).label, &task.goal));
    let closed = s
        .scene
        .objects
        .values()
        .filter(|o| house.object(o.id).is_some_and(|x| x.articulated) && !s.world.is_open(o.id))
        .count();
    let prev = match s.prev_action.as_ref().map(Action::verb) {
        None | Some(Verb::Done) => 0,
        Some(Verb::Navigate) => 1,
        Some(Verb::GoToAndOpen) => 2,
        Some(Verb::Close) => 3,
        Some(Verb::Explore) => 4,
    };
    let mut f = vec![
        1.0,
        goal_visible(s, &task.goal) as u8 as f64,
        goal_room_known as u8 as f64,
        unexplored.len() as f64 / ROOM_SCALE,
        unexplored.iter().map(|(_, n)| *n).sum::<usize>() as f64 / NODE_SCALE,
        closed as f64 / ROOM_SCALE,
        s.world.dist_total / DIST_SCALE,
        s.world.step_index as f64 / STEP_SCALE,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        s.prev_failed as u8 as f64,
    ];
    f[8 + prev] = 1.0;
    f
}

fn candidate_features(s: &EnvSnapshot, task: &Task, a: &Action) -> Vec<f64> {
    let house = s.house();
    let travel = match check_executable(a, s) {
        Some(Target::Move(n)) | Some(Target::Open { at: n, .. }) => {
            s.site.table.distance(s.robot_node, n)
        }
        _ => 0.0,
    };
    let room = a.room().and_then(|name| s.scene.room_by_name(name));
    let object = match (a.room(), a.object()) {
        (Some(r), Some(o)) => s.scene.object_by_name(r, o),
        _ => None,
    };
    let unexplored = room.map_or(0, |r| s.unexplored_in(r.id).len());
    let container = object
        .and_then(|o| house.object(o.id))
        .is_some_and(|o| o.articulated && container_affinity(&o.category, &task.goal));
    vec![
        travel / TRAVEL_SCALE,
        room.is_some_and(|r| room_affinity(r.label, &task.goal)) as u8 as f64,
        (unexplored > 0) as u8 as f64,
        unexplored as f64 / ROOM_NODE_SCALE,
        container as u8 as f64,
        object.is_some_and(|o| o.category == task.goal) as u8 as f64,
        (s.prev_action.as_ref() == Some(a)) as u8 as f64,
        (room.is_some() && room.map(|r| r.id) == s.robot_room()) as u8 as f64,
    ]
}

pub fn featurize(s: &EnvSnapshot, task: &Task) -> Featurized {
    let state = state_features(s, task);
    let candidates = candidate_actions(s)
        .into_iter()
        .map(|a| {
            let mut phi = state.clone();
            phi.extend(candidate_features(s, task, &a));
            Candidate {
                verb: a.verb(),
                action: a,
                phi,
            }
        })
        .collect();
    Featurized { state, candidates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actionlang::execute;
    use crate::fixtures;
    use crate::scenegraph::Site;
    use crate::world::Cell;

    fn task() -> Task {
        Task {
            goal: "mug".into(),
            start_cell: Cell(12, 1),
        }
    }

    #[test]
    fn blank_snapshot_bootstraps_explore() {
        let site = Site::new(fixtures::two_room_house()).unwrap();
        let s = EnvSnapshot::blank(site, &task());
        let f = featurize(&s, &task());
        let acts: Vec<Action> = f.candidates.iter().map(|c| c.action.clone()).collect();
        assert_eq!(acts, vec![Action::explore("hallway"), Action::Done]);
    }

    #[test]
    fn hand_computed_fixture_features() {
        let site = Site::new(fixtures::two_room_house()).unwrap();
        let s = EnvSnapshot::start(site, &task());
        let f = featurize(&s, &task());
        // Hallway fully explored at the start; the kitchen (4 nodes) is known
        // through the doorway and can hold mugs. Nothing seen is closed.
        let expect_state = [
            1.0, 0.0, 1.0, 0.25, 0.2, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        assert_eq!(f.state, expect_state);
        let acts: Vec<String> = f.candidates.iter().map(|c| c.action.to_string()).collect();
        assert_eq!(
            acts,
            vec![
                "explore(kitchen)",
                "navigate(hallway, plant_1)",
                "navigate(hallway, shelf_1)",
                "done()"
            ]
        );
        // explore(kitchen): robot at (12,1); nearest unexplored kitchen node
        // is (2,4) via (2,1): 5.0 m along the hallway plus 2.5 m bridge.
        let explore = &f.candidates[0].phi[N_STATE..];
        assert_eq!(explore, &[0.75, 1.0, 1.0, 0.4, 0.0, 0.0, 0.0, 0.0]);
        let done = &f.candidates[3].phi[N_STATE..];
        assert_eq!(done, &[0.0; 8]);
        assert_eq!(f, featurize(&s, &task()));
        let (s1, _) = execute(&Ok(Action::explore("kitchen")), &s);
        let f1 = featurize(&s1, &task());
        assert_eq!(f1.state[3], 0.0, "every known room explored");
        assert_eq!(f1.state[12], 1.0, "previous action was explore");
        let open = f1.index_of(&Action::open("kitchen", "cabinet_1")).unwrap();
        assert_eq!(f1.candidates[open].phi[N_STATE + 4], 1.0, "cabinets hold mugs");
    }
}
