//! Two-level scene graph (rooms above seen objects) and the per-step
//! environment snapshot that pairs it with the explored part of the
//! navigation graph and the ground-truth world.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::actionlang::Action;
use crate::navgraph::{
    build_nav_graph, connect_rooms, decompose_rooms, DistanceTable, NavError, NavGraph, NodeId,
    Place, RoomSubgraph,
};
use crate::world::{self, HouseSpec, ObjectId, RoomId, RoomLabel, Task, WorldError, WorldState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("unknown object id {0}")]
    UnknownObjectId(ObjectId),
    #[error("unknown navigation node {0}")]
    UnknownNodeId(u32),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    World(#[from] WorldError),
}

/// Immutable per-house assets shared by every episode in that house.
#[derive(Debug)]
pub struct Site {
    pub house: Arc<HouseSpec>,
    /// Full graph including doorway nodes.
    pub full: NavGraph,
    pub rooms: Vec<RoomSubgraph>,
    /// Reconnected room graph the robot moves on, with all-pairs distances.
    pub table: DistanceTable,
    /// Node the robot stands on when it is "at" an object.
    pub anchors: BTreeMap<ObjectId, NodeId>,
}

impl Site {
    pub fn new(house: HouseSpec) -> Result<Arc<Site>, SceneError> {
        house.validate()?;
        let full = build_nav_graph(&house)?;
        let rooms = decompose_rooms(&full);
        let nav = connect_rooms(&rooms, &full)?;
        let anchors = house
            .objects
            .iter()
            .map(|o| {
                let node = nav
                    .nodes()
                    .iter()
                    .filter(|n| n.place == Place::Room(o.room))
                    .min_by_key(|n| (n.cell.manhattan(o.cell), n.id))
                    .map(|n| n.id)
                    .ok_or(NavError::DisconnectedFreeSpace)?;
                Ok((o.id, node))
            })
            .collect::<Result<_, SceneError>>()?;
        Ok(Arc::new(Site {
            house: Arc::new(house),
            full,
            rooms,
            table: DistanceTable::new(nav),
            anchors,
        }))
    }

    pub fn nav(&self) -> &NavGraph {
        self.table.graph()
    }

    pub fn room_of_node(&self, id: NodeId) -> Option<RoomId> {
        match self.nav().room_of(id) {
            Some(Place::Room(r)) => Some(r),
            _ => None,
        }
    }

    pub fn room_nodes(&self, room: RoomId) -> &[NodeId] {
        self.rooms
            .iter()
            .find(|r| r.room == room)
            .map_or(&[], |r| r.nodes.as_slice())
    }

    pub fn anchor(&self, id: ObjectId) -> NodeId {
        self.anchors[&id]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoomNode {
    pub id: RoomId,
    pub name: String,
    pub label: RoomLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectNode {
    pub id: ObjectId,
    pub name: String,
    pub category: String,
    pub room: RoomId,
}

/// Rooms and the objects seen in them. Every object node hangs off exactly
/// one room node; there are no other edges.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SceneGraph {
    pub rooms: BTreeMap<RoomId, RoomNode>,
    pub objects: BTreeMap<ObjectId, ObjectNode>,
}

impl SceneGraph {
    pub fn is_empty(&self) -> bool {
        self.rooms.is_empty() && self.objects.is_empty()
    }

    /// Room-to-object containment edges.
    pub fn edges(&self) -> Vec<(RoomId, ObjectId)> {
        self.objects.values().map(|o| (o.room, o.id)).collect()
    }

    pub fn objects_in(&self, room: RoomId) -> impl Iterator<Item = &ObjectNode> {
        self.objects.values().filter(move |o| o.room == room)
    }

    pub fn room_by_name(&self, name: &str) -> Option<&RoomNode> {
        self.rooms.values().find(|r| r.name == name)
    }

    pub fn object_by_name(&self, room: &str, object: &str) -> Option<&ObjectNode> {
        let room = self.room_by_name(room)?;
        self.objects_in(room.id).find(|o| o.name == object)
    }

    fn add_room(&mut self, house: &HouseSpec, id: RoomId) {
        self.rooms.entry(id).or_insert_with(|| {
            let r = house.room(id);
            RoomNode {
                id,
                name: r.name.clone(),
                label: r.label,
            }
        });
    }

    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_canonical_json(self)
    }
}

/// Environment state handed to planners: ground truth, scene graph, explored
/// navigation nodes and the previous action.
#[derive(Debug, Clone, Serialize)]
pub struct EnvSnapshot {
    #[serde(skip)]
    pub site: Arc<Site>,
    pub world: WorldState,
    pub robot_node: NodeId,
    pub scene: SceneGraph,
    pub nav_explored: BTreeSet<NodeId>,
    pub prev_action: Option<Action>,
    /// Whether the previous response failed to parse or execute.
    pub prev_failed: bool,
}

impl PartialEq for EnvSnapshot {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.site, &other.site)
            && self.world == other.world
            && self.robot_node == other.robot_node
            && self.scene == other.scene
            && self.nav_explored == other.nav_explored
            && self.prev_action == other.prev_action
            && self.prev_failed == other.prev_failed
    }
}

impl EnvSnapshot {
    /// Robot placed at the task start, nothing observed yet.
    pub fn blank(site: Arc<Site>, task: &Task) -> Self {
        let start_room = site.house.room_at(task.start_cell);
        let robot_node = site
            .nav()
            .node_at(task.start_cell)
            .or_else(|| {
                site.nav()
                    .nodes()
                    .iter()
                    .filter(|n| start_room.is_none_or(|r| n.place == Place::Room(r)))
                    .min_by_key(|n| (n.cell.manhattan(task.start_cell), n.id))
                    .map(|n| n.id)
            })
            .expect("navigation graph is non-empty");
        let cell = site.nav().node(robot_node).expect("node exists").cell;
        let world = WorldState::new(site.house.clone(), cell);
        EnvSnapshot {
            site,
            world,
            robot_node,
            scene: SceneGraph::default(),
            nav_explored: BTreeSet::new(),
            prev_action: None,
            prev_failed: false,
        }
    }

    /// Robot at the task start after its first look around.
    pub fn start(site: Arc<Site>, task: &Task) -> Self {
        let mut s = Self::blank(site, task);
        if let Some(room) = s.robot_room() {
            s.observe_room(room);
        }
        s
    }

    pub fn house(&self) -> &HouseSpec {
        &self.site.house
    }

    pub fn robot_room(&self) -> Option<RoomId> {
        self.site.room_of_node(self.robot_node)
    }

    /// Rooms whose navigation nodes are not all explored.
    pub fn unexplored_in(&self, room: RoomId) -> Vec<NodeId> {
        self.site
            .room_nodes(room)
            .iter()
            .filter(|n| !self.nav_explored.contains(n))
            .copied()
            .collect()
    }

    pub fn room_explored(&self, room: RoomId) -> bool {
        self.unexplored_in(room).is_empty()
    }

    /// Marks `room` as observed: its node and those of rooms visible through
    /// its doorways join the scene graph, all its navigation nodes count as
    /// discovered and its visible objects are revealed. Returns the number of
    /// newly discovered navigation nodes.
    pub fn observe_room(&mut self, room: RoomId) -> usize {
        let house = self.site.house.clone();
        self.scene.add_room(&house, room);
        for n in house.neighbors_of(room) {
            self.scene.add_room(&house, n);
        }
        let nodes: Vec<NodeId> = self.site.room_nodes(room).to_vec();
        let new = self.discover(&nodes);
        let visible: BTreeSet<ObjectId> =
            house.room_visible(room, &self.world.opened).into_iter().collect();
        self.add_objects(&visible);
        new
    }

    fn discover(&mut self, nodes: &[NodeId]) -> usize {
        nodes
            .iter()
            .filter(|n| self.nav_explored.insert(**n))
            .count()
    }

    fn add_objects(&mut self, ids: &BTreeSet<ObjectId>) {
        let house = self.site.house.clone();
        for id in ids {
            if self.scene.objects.contains_key(id) {
                continue;
            }
            let o = house.object(*id).expect("validated id");
            self.scene.add_room(&house, o.room);
            self.scene.objects.insert(
                *id,
                ObjectNode {
                    id: *id,
                    name: o.name.clone(),
                    category: o.category.clone(),
                    room: o.room,
                },
            );
        }
        self.world.seen.extend(ids.iter().copied());
    }

    /// Stable digest of the agent-visible state.
    pub fn digest(&self) -> String {
        crate::canonical::short_digest(crate::canonical::to_canonical_json(self))
    }
}

/// Adds newly seen objects to both the world's seen set and the scene graph.
pub fn update_scene_graph(
    s: &EnvSnapshot,
    newly_seen: &BTreeSet<ObjectId>,
) -> Result<EnvSnapshot, SceneError> {
    if let Some(bad) = newly_seen.iter().find(|id| s.house().object(**id).is_none()) {
        return Err(SceneError::UnknownObjectId(*bad));
    }
    let mut next = s.clone();
    next.world = world::reveal(&s.world, newly_seen)?;
    next.add_objects(newly_seen);
    Ok(next)
}

/// Marks navigation nodes explored and reports how many were new.
pub fn discover_nodes(
    s: &EnvSnapshot,
    node_ids: &[NodeId],
) -> Result<(EnvSnapshot, usize), SceneError> {
    if let Some(bad) = node_ids.iter().find(|n| !s.site.nav().contains(**n)) {
        return Err(SceneError::UnknownNodeId(bad.0));
    }
    let mut next = s.clone();
    let new = next.discover(node_ids);
    Ok((next, new))
}

pub fn goal_visible(s: &EnvSnapshot, goal_category: &str) -> bool {
    s.scene.objects.values().any(|o| o.category == goal_category)
}
