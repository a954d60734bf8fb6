//! Ground-truth houses and the world state that evolves during an episode.
//!
//! A house is a set of axis-aligned rectangular rooms on a unit lattice,
//! separated by one-cell walls and joined by single-cell doorways. Objects sit
//! on room cells; articulated objects (containers) may hide other objects until
//! they are opened.

pub mod catalog;
mod generate;
mod task;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{generate_house, generate_scene_run, GenProfile, RETRY_BUDGET};
pub use task::{sample_task, scene_task, Task};

/// Lattice spacing in meters.
pub const DEFAULT_CELL_SIZE: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("house generation failed for seed {seed} after {attempts} attempts")]
    GenerationFailed { seed: u64, attempts: u32 },
    #[error("invalid generation profile: {0}")]
    InvalidProfile(String),
    #[error("no valid task in house (every category is visible from every start)")]
    NoValidTask,
    #[error("unknown object id {0}")]
    UnknownObjectId(ObjectId),
    #[error("invalid house: {0}")]
    InvalidHouse(String),
}

/// Lattice coordinate `(x, y)`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell(pub i32, pub i32);

impl Cell {
    pub fn manhattan(self, other: Cell) -> i32 {
        (self.0 - other.0).abs() + (self.1 - other.1).abs()
    }

    pub fn neighbors(self) -> [Cell; 4] {
        let Cell(x, y) = self;
        [Cell(x + 1, y), Cell(x - 1, y), Cell(x, y + 1), Cell(x, y - 1)]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Inclusive cell rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i32 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> i32 {
        self.width() * self.height()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.0 >= self.x0 && c.0 <= self.x1 && c.1 >= self.y0 && c.1 <= self.y1
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        self.x0 <= o.x1 && o.x0 <= self.x1 && self.y0 <= o.y1 && o.y0 <= self.y1
    }

    /// Row-major cells.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y0..=self.y1).flat_map(move |y| (self.x0..=self.x1).map(move |x| Cell(x, y)))
    }

    /// Waypoints on a coarsened lattice: `ceil(len / 3)` evenly spread
    /// positions per axis, row-major.
    pub fn waypoints(&self) -> Vec<Cell> {
        let xs = spread(self.x0, self.width());
        let ys = spread(self.y0, self.height());
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| Cell(x, y)))
            .collect()
    }
}

fn spread(start: i32, len: i32) -> Vec<i32> {
    let m = ((len + 2) / 3).max(1);
    (0..m).map(|i| start + ((2 * i + 1) * len) / (2 * m)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoomId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for RoomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "room#{}", self.0)
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "object#{}", self.0)
    }
}

/// Closed room-type vocabulary. `OtherRoom` is the fallback tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoomLabel {
    Kitchen,
    LivingRoom,
    Bedroom,
    Bathroom,
    DiningRoom,
    Office,
    Hallway,
    OtherRoom,
}

impl RoomLabel {
    pub const ALL: [RoomLabel; 8] = [
        RoomLabel::Kitchen,
        RoomLabel::LivingRoom,
        RoomLabel::Bedroom,
        RoomLabel::Bathroom,
        RoomLabel::DiningRoom,
        RoomLabel::Office,
        RoomLabel::Hallway,
        RoomLabel::OtherRoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RoomLabel::Kitchen => "kitchen",
            RoomLabel::LivingRoom => "living-room",
            RoomLabel::Bedroom => "bedroom",
            RoomLabel::Bathroom => "bathroom",
            RoomLabel::DiningRoom => "dining-room",
            RoomLabel::Office => "office",
            RoomLabel::Hallway => "hallway",
            RoomLabel::OtherRoom => "other-room",
        }
    }
}

impl fmt::Display for RoomLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub label: RoomLabel,
    /// Unique lowercase name used in prompts and commands.
    pub name: String,
    pub bounds: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Doorway {
    pub room_a: RoomId,
    pub room_b: RoomId,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub id: ObjectId,
    /// Unique lowercase name used in prompts and commands.
    pub name: String,
    pub category: String,
    pub cell: Cell,
    pub room: RoomId,
    pub articulated: bool,
    pub contents: Vec<ObjectId>,
    /// Container holding this object, if any.
    pub inside: Option<ObjectId>,
    pub open: bool,
}

/// Occupancy lattice; `#` is wall and `.` is free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub width: i32,
    pub height: i32,
    pub rows: Vec<String>,
}

impl Grid {
    pub fn walls(width: i32, height: i32) -> Self {
        Grid {
            width,
            height,
            rows: vec!["#".repeat(width as usize); height as usize],
        }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.0 >= 0 && c.1 >= 0 && c.0 < self.width && c.1 < self.height
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && self.rows[c.1 as usize].as_bytes()[c.0 as usize] == b'.'
    }

    pub fn set_free(&mut self, c: Cell) {
        let row = &mut self.rows[c.1 as usize];
        row.replace_range(c.0 as usize..c.0 as usize + 1, ".");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseSpec {
    pub seed: u64,
    pub cell_size: f64,
    pub grid: Grid,
    pub rooms: Vec<Room>,
    pub doorways: Vec<Doorway>,
    pub objects: Vec<ObjectSpec>,
}

impl HouseSpec {
    /// Assembles a house from hand-placed parts, deriving the grid, and checks
    /// every house invariant.
    pub fn from_parts(
        seed: u64,
        cell_size: f64,
        rooms: Vec<Room>,
        doorways: Vec<Doorway>,
        objects: Vec<ObjectSpec>,
    ) -> Result<Self, WorldError> {
        let width = rooms.iter().map(|r| r.bounds.x1).max().unwrap_or(0) + 2;
        let height = rooms.iter().map(|r| r.bounds.y1).max().unwrap_or(0) + 2;
        let mut grid = Grid::walls(width, height);
        for room in &rooms {
            for c in room.bounds.cells() {
                grid.set_free(c);
            }
        }
        for d in &doorways {
            grid.set_free(d.cell);
        }
        let house = HouseSpec {
            seed,
            cell_size,
            grid,
            rooms,
            doorways,
            objects,
        };
        house.validate()?;
        Ok(house)
    }

    pub fn room(&self, id: RoomId) -> &Room {
        &self.rooms[id.0 as usize]
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectSpec> {
        self.objects.get(id.0 as usize).filter(|o| o.id == id)
    }

    pub fn room_by_name(&self, name: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.name == name)
    }

    pub fn room_at(&self, c: Cell) -> Option<RoomId> {
        self.rooms.iter().find(|r| r.bounds.contains(c)).map(|r| r.id)
    }

    pub fn doorway_at(&self, c: Cell) -> Option<usize> {
        self.doorways.iter().position(|d| d.cell == c)
    }

    /// Rooms sharing a doorway with `room`, sorted and deduplicated.
    pub fn neighbors_of(&self, room: RoomId) -> Vec<RoomId> {
        let set: BTreeSet<RoomId> = self
            .doorways
            .iter()
            .filter_map(|d| {
                if d.room_a == room {
                    Some(d.room_b)
                } else if d.room_b == room {
                    Some(d.room_a)
                } else {
                    None
                }
            })
            .collect();
        set.into_iter().collect()
    }

    pub fn categories(&self) -> BTreeSet<&str> {
        self.objects.iter().map(|o| o.category.as_str()).collect()
    }

    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        let house: HouseSpec = serde_json::from_str(text)
            .map_err(|e| WorldError::InvalidHouse(format!("parse error: {e}")))?;
        house.validate()?;
        Ok(house)
    }

    /// Checks all structural invariants, returning the first violation.
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidHouse(m));
        for (i, room) in self.rooms.iter().enumerate() {
            if room.id.0 as usize != i {
                return bad(format!("room index {i} carries id {}", room.id.0));
            }
            if room.bounds.width() < 1 || room.bounds.height() < 1 {
                return bad(format!("room {} has empty bounds", room.name));
            }
            for c in room.bounds.cells() {
                if !self.grid.is_free(c) {
                    return bad(format!("room {} cell {c} is not free", room.name));
                }
            }
            for other in &self.rooms[..i] {
                if room.bounds.intersects(&other.bounds) {
                    return bad(format!("rooms {} and {} overlap", other.name, room.name));
                }
                if other.name == room.name {
                    return bad(format!("duplicate room name {}", room.name));
                }
            }
        }
        for d in &self.doorways {
            if d.room_a == d.room_b
                || d.room_a.0 as usize >= self.rooms.len()
                || d.room_b.0 as usize >= self.rooms.len()
            {
                return bad(format!("doorway at {} names invalid rooms", d.cell));
            }
            if !self.grid.is_free(d.cell) || self.room_at(d.cell).is_some() {
                return bad(format!("doorway cell {} must be a free wall gap", d.cell));
            }
            let touches = |r: RoomId| {
                d.cell
                    .neighbors()
                    .iter()
                    .any(|n| self.room(r).bounds.contains(*n))
            };
            if !touches(d.room_a) || !touches(d.room_b) {
                return bad(format!("doorway at {} is not adjacent to both rooms", d.cell));
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.id.0 as usize != i {
                return bad(format!("object index {i} carries id {}", o.id.0));
            }
            if self.room_at(o.cell) != Some(o.room) {
                return bad(format!("object {} cell {} is not inside its room", o.name, o.cell));
            }
            if !o.articulated && (!o.contents.is_empty() || o.open) {
                return bad(format!("non-articulated object {} holds contents", o.name));
            }
            for c in &o.contents {
                match self.object(*c) {
                    Some(inner) if inner.inside == Some(o.id) && inner.room == o.room => {}
                    _ => return bad(format!("object {} lists invalid content {c}", o.name)),
                }
            }
            if let Some(parent) = o.inside {
                match self.object(parent) {
                    Some(p) if p.contents.contains(&o.id) => {}
                    _ => return bad(format!("object {} has dangling container", o.name)),
                }
            }
        }
        let mut names = BTreeSet::new();
        for o in &self.objects {
            if !names.insert(o.name.as_str()) {
                return bad(format!("duplicate object name {}", o.name));
            }
        }
        if !self.free_space_connected() {
            return bad("free space is disconnected".into());
        }
        Ok(())
    }

    /// Flood fill over room and doorway cells.
    pub fn free_space_connected(&self) -> bool {
        let mut free: BTreeSet<Cell> = self.rooms.iter().flat_map(|r| r.bounds.cells()).collect();
        free.extend(self.doorways.iter().map(|d| d.cell));
        let Some(&start) = free.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors() {
                if free.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == free.len()
    }

    /// Objects of `room` visible to an observer standing in it: everything
    /// not inside a container, plus contents of containers in `opened`.
    pub fn room_visible(&self, room: RoomId, opened: &[ObjectId]) -> Vec<ObjectId> {
        self.objects
            .iter()
            .filter(|o| o.room == room)
            .filter(|o| o.inside.is_none_or(|c| opened.contains(&c)))
            .map(|o| o.id)
            .collect()
    }
}

/// Mutable per-episode ground truth.
///
/// `seen` only grows and `dist_total` never decreases. The unseen set is
/// always derived as the complement of `seen`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldState {
    #[serde(skip)]
    pub house: Arc<HouseSpec>,
    pub robot_cell: Cell,
    pub seen: BTreeSet<ObjectId>,
    pub dist_total: f64,
    /// Currently open containers, in opening order.
    pub opened: Vec<ObjectId>,
    pub step_index: u32,
}

impl WorldState {
    pub fn new(house: Arc<HouseSpec>, robot_cell: Cell) -> Self {
        WorldState {
            house,
            robot_cell,
            seen: BTreeSet::new(),
            dist_total: 0.0,
            opened: Vec::new(),
            step_index: 0,
        }
    }

    pub fn unseen(&self) -> BTreeSet<ObjectId> {
        self.house
            .objects
            .iter()
            .map(|o| o.id)
            .filter(|id| !self.seen.contains(id))
            .collect()
    }

    pub fn robot_room(&self) -> Option<RoomId> {
        self.house.room_at(self.robot_cell)
    }

    pub fn is_open(&self, id: ObjectId) -> bool {
        self.opened.contains(&id)
    }
}

/// Objects visible from the robot's current room. A robot standing in a
/// doorway sees nothing.
pub fn visible_objects(state: &WorldState) -> BTreeSet<ObjectId> {
    match state.robot_room() {
        Some(room) => state
            .house
            .room_visible(room, &state.opened)
            .into_iter()
            .collect(),
        None => BTreeSet::new(),
    }
}

/// Adds `ids` to the seen set.
pub fn reveal(state: &WorldState, ids: &BTreeSet<ObjectId>) -> Result<WorldState, WorldError> {
    if let Some(bad) = ids.iter().find(|id| state.house.object(**id).is_none()) {
        return Err(WorldError::UnknownObjectId(*bad));
    }
    let mut next = state.clone();
    next.seen.extend(ids.iter().copied());
    Ok(next)
}

/// Groups objects by room, used by the generator and for diagnostics.
pub fn objects_by_room(house: &HouseSpec) -> BTreeMap<RoomId, Vec<ObjectId>> {
    let mut map: BTreeMap<RoomId, Vec<ObjectId>> = BTreeMap::new();
    for o in &house.objects {
        map.entry(o.room).or_default().push(o.id);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn waypoint_lattice_spreads_evenly() {
        assert_eq!(Rect::new(1, 1, 1, 1).waypoints(), vec![Cell(1, 1)]);
        assert_eq!(
            Rect::new(1, 1, 5, 1).waypoints(),
            vec![Cell(2, 1), Cell(4, 1)]
        );
        assert_eq!(Rect::new(0, 0, 5, 5).waypoints().len(), 4);
        assert_eq!(Rect::new(0, 0, 6, 2).waypoints().len(), 3);
    }

    #[test]
    fn closed_container_hides_contents() {
        let house = Arc::new(fixtures::two_room_house());
        let kitchen_cell = house.room_by_name("kitchen").unwrap().bounds.waypoints()[0];
        let state = WorldState::new(house.clone(), kitchen_cell);
        let visible = visible_objects(&state);
        let cabinet = house.objects.iter().find(|o| o.category == "cabinet").unwrap();
        let mug = house.objects.iter().find(|o| o.category == "mug").unwrap();
        assert!(visible.contains(&cabinet.id));
        assert!(!visible.contains(&mug.id));

        let mut opened = state.clone();
        opened.opened.push(cabinet.id);
        assert!(visible_objects(&opened).contains(&mug.id));
    }

    #[test]
    fn visibility_is_room_scoped() {
        let house = Arc::new(fixtures::two_room_house());
        let hall = house.room_by_name("hallway").unwrap().bounds.waypoints()[0];
        let state = WorldState::new(house.clone(), hall);
        let visible = visible_objects(&state);
        let kitchen = house.room_by_name("kitchen").unwrap().id;
        assert!(visible.iter().all(|id| house.object(*id).unwrap().room != kitchen));
    }

    #[test]
    fn reveal_is_idempotent_and_rejects_unknown_ids() {
        let house = Arc::new(fixtures::two_room_house());
        let state = WorldState::new(house.clone(), Cell(1, 1));
        assert_eq!(reveal(&state, &BTreeSet::new()).unwrap(), state);
        let ids = BTreeSet::from([ObjectId(0)]);
        let once = reveal(&state, &ids).unwrap();
        assert_eq!(reveal(&once, &ids).unwrap(), once);
        assert_eq!(
            reveal(&state, &BTreeSet::from([ObjectId(999)])),
            Err(WorldError::UnknownObjectId(ObjectId(999)))
        );
    }

    #[test]
    fn validate_rejects_overlapping_rooms() {
        let rooms = vec![
            Room {
                id: RoomId(0),
                label: RoomLabel::Kitchen,
                name: "kitchen".into(),
                bounds: Rect::new(1, 1, 3, 3),
            },
            Room {
                id: RoomId(1),
                label: RoomLabel::Office,
                name: "office".into(),
                bounds: Rect::new(3, 1, 5, 3),
            },
        ];
        assert!(HouseSpec::from_parts(0, 0.5, rooms, vec![], vec![]).is_err());
    }

    #[test]
    fn validate_rejects_disconnected_rooms() {
        let rooms = vec![
            Room {
                id: RoomId(0),
                label: RoomLabel::Kitchen,
                name: "kitchen".into(),
                bounds: Rect::new(1, 1, 3, 3),
            },
            Room {
                id: RoomId(1),
                label: RoomLabel::Office,
                name: "office".into(),
                bounds: Rect::new(5, 1, 7, 3),
            },
        ];
        let err = HouseSpec::from_parts(0, 0.5, rooms, vec![], vec![]).unwrap_err();
        assert!(err.to_string().contains("disconnected"));
    }
}
