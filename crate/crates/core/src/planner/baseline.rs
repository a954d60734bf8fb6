use rand::Rng;

use super::{PlanContext, Planner, PlannerError};
use crate::actionlang::{render_response, Action};
use crate::scenegraph::{goal_visible, EnvSnapshot};
use crate::seeds;

/// Syntactically valid actions over the names the prompt shows. With an
/// empty scene graph only `explore(<current room>)` and `done()` remain.
pub fn random_candidates(s: &EnvSnapshot) -> Vec<Action> {
    let house = s.house();
    let mut out = Vec::new();
    if s.scene.rooms.is_empty() {
        if let Some(r) = s.robot_room() {
            out.push(Action::explore(&house.room(r).name));
        }
        out.push(Action::Done);
        return out;
    }
    for room in s.scene.rooms.values() {
        out.push(Action::explore(&room.name));
    }
    for o in s.scene.objects.values() {
        let room = &house.room(o.room).name;
        out.push(Action::navigate(room, &o.name));
        out.push(Action::open(room, &o.name));
    }
    out.push(Action::Close);
    out.push(Action::Done);
    out
}

/// Uniform choice over [`random_candidates`], seeded by the planner seed and
/// the snapshot digest.
#[derive(Debug, Clone)]
pub struct RandomPlanner {
    seed: u64,
}

impl RandomPlanner {
    pub fn new(seed: u64) -> Self {
        RandomPlanner { seed }
    }

    pub fn choose(&self, s: &EnvSnapshot) -> Action {
        let digest = u64::from_str_radix(&s.digest(), 16).expect("hex digest");
        let mut rng = seeds::rng(seeds::mix(self.seed, digest));
        let mut cands = random_candidates(s);
        cands.swap_remove(rng.gen_range(0..cands.len()))
    }
}

impl Planner for RandomPlanner {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn respond(&mut self, ctx: &PlanContext<'_>) -> Result<String, PlannerError> {
        let a = self.choose(ctx.snapshot);
        Ok(render_response("Random baseline.", "Uniform choice.", &a))
    }
}

/// Frontier baseline: stop once the goal is seen, otherwise open the nearest
/// closed known container, otherwise explore the nearest known room that
/// still has unexplored nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyPlanner;

impl GreedyPlanner {
    pub fn choose(s: &EnvSnapshot, goal: &str) -> Action {
        if goal_visible(s, goal) {
            return Action::Done;
        }
        let house = s.house();
        let table = &s.site.table;
        let container = s
            .scene
            .objects
            .values()
            .filter(|o| {
                house.object(o.id).is_some_and(|spec| spec.articulated) && !s.world.is_open(o.id)
            })
            .map(|o| (table.distance(s.robot_node, s.site.anchor(o.id)), o))
            .filter(|(d, _)| d.is_finite())
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
        if let Some((_, o)) = container {
            return Action::open(&house.room(o.room).name, &o.name);
        }
        let room = s
            .scene
            .rooms
            .values()
            .filter_map(|r| {
                let d = s
                    .unexplored_in(r.id)
                    .iter()
                    .map(|n| table.distance(s.robot_node, *n))
                    .fold(f64::INFINITY, f64::min);
                d.is_finite().then_some((d, r))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
        match room {
            Some((_, r)) => Action::explore(&r.name),
            None => Action::Done,
        }
    }
}

impl Planner for GreedyPlanner {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn respond(&mut self, ctx: &PlanContext<'_>) -> Result<String, PlannerError> {
        let a = Self::choose(ctx.snapshot, &ctx.task.goal);
        Ok(render_response("Greedy frontier baseline.", "Nearest container, then nearest frontier.", &a))
    }
}
