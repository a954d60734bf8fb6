use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{render_command, Action};
use crate::scenegraph::EnvSnapshot;
use crate::world::Task;

/// Task-level instructions: action menu and response format.
pub const SYSTEM_PROMPT: &str = include_str!("../../assets/system_prompt.txt");

/// Marker used when the scene graph holds no rooms.
pub const EMPTY_SCENE_MARKER: &str = "no rooms discovered yet";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub system: String,
    pub user: String,
}

impl PromptText {
    /// System and user blocks joined with a blank line.
    pub fn full(&self) -> String {
        format!("{}\n{}", self.system, self.user)
    }

    pub fn digest(&self) -> String {
        crate::canonical::short_digest(self.full())
    }
}

/// Renders the step-level observation. Rooms and objects are listed in id
/// order, so identical snapshots give identical bytes.
pub fn serialize_observation(s: &EnvSnapshot, task: &Task) -> PromptText {
    let house = s.house();
    let mut u = String::new();
    let _ = writeln!(u, "Target object: {}", task.goal);
    let here = s
        .robot_room()
        .map_or("unknown", |r| house.room(r).name.as_str());
    let _ = writeln!(u, "Current room: {here}");
    let _ = writeln!(u, "Distance travelled: {:.2} m", s.world.dist_total);
    if s.scene.rooms.is_empty() {
        let _ = writeln!(u, "Rooms and objects: {EMPTY_SCENE_MARKER}");
    } else {
        let _ = writeln!(u, "Rooms and objects:");
        for room in s.scene.rooms.values() {
            let state = if s.room_explored(room.id) {
                "explored"
            } else {
                "unexplored"
            };
            let away = s
                .site
                .room_nodes(room.id)
                .iter()
                .map(|n| s.site.table.distance(s.robot_node, *n))
                .fold(f64::INFINITY, f64::min);
            let objects: Vec<String> = s
                .scene
                .objects_in(room.id)
                .map(|o| {
                    let spec = house.object(o.id).expect("scene objects exist");
                    match (spec.articulated, s.world.is_open(o.id)) {
                        (false, _) => o.name.clone(),
                        (true, true) => format!("{} (open)", o.name),
                        (true, false) => format!("{} (closed)", o.name),
                    }
                })
                .collect();
            let listed = if objects.is_empty() {
                "no objects seen".to_string()
            } else {
                objects.join(", ")
            };
            let _ = writeln!(
                u,
                "- {} [{}, {}, {:.1} m away]: {}",
                room.name, room.label, state, away, listed
            );
        }
    }
    let prev = match (&s.prev_action, s.prev_failed) {
        (None, false) => "none".to_string(),
        (None, true) => "unparseable response (failed)".to_string(),
        (Some(a), true) => format!("{} (failed)", render_command(a)),
        (Some(a), false) => render_command(a),
    };
    let _ = writeln!(u, "Previous action: {prev}");
    PromptText {
        system: SYSTEM_PROMPT.to_string(),
        user: u,
    }
}

/// Formats a response block that [`super::parse_response`] accepts.
pub fn render_response(analysis: &str, reasoning: &str, action: &Action) -> String {
    format!(
        "Analysis: {analysis}\nReasoning: {reasoning}\nCommand: {}\n",
        render_command(action)
    )
}
