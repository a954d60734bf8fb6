use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{generate_scene_run, Cell, GenProfile, HouseSpec, WorldError};
use crate::seeds;

/// An object-search task: find any object of category `goal`, starting from
/// `start_cell`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub goal: String,
    pub start_cell: Cell,
}

/// Draws a start waypoint and a goal category that is not visible from it.
///
/// Start candidates are visited in a seeded random order until one leaves at
/// least one category out of sight.
pub fn sample_task(house: &HouseSpec, seed: u64) -> Result<Task, WorldError> {
    let mut rng = seeds::rng(seeds::mix(seed, seeds::tag::TASK));
    let mut starts: Vec<Cell> = house
        .rooms
        .iter()
        .flat_map(|r| r.bounds.waypoints())
        .collect();
    starts.shuffle(&mut rng);
    let categories = house.categories();
    for start in starts {
        let Some(room) = house.room_at(start) else {
            continue;
        };
        let visible: BTreeSet<&str> = house
            .room_visible(room, &[])
            .into_iter()
            .filter_map(|id| house.object(id))
            .map(|o| o.category.as_str())
            .collect();
        let hidden: Vec<&str> = categories.difference(&visible).copied().collect();
        if !hidden.is_empty() {
            let goal = hidden[rng.gen_range(0..hidden.len())];
            return Ok(Task {
                goal: goal.to_string(),
                start_cell: start,
            });
        }
    }
    Err(WorldError::NoValidTask)
}

/// House and task for one run of a scene: the layout comes from
/// `scene_seed`, objects and the task are redrawn per `run`.
pub fn scene_task(
    scene_seed: u64,
    run: u64,
    profile: &GenProfile,
) -> Result<(HouseSpec, Task), WorldError> {
    let house = generate_scene_run(scene_seed, run, profile)?;
    let task = sample_task(&house, seeds::mix(seeds::mix(scene_seed, seeds::tag::TASK), run))?;
    Ok((house, task))
}
