//! Seeded procedural houses.
//!
//! Layout: a rectangle is split binary-space-partition style, with a one-cell
//! wall between the halves, until the drawn room count is reached. Rooms that
//! share a wall become doorway candidates; a random spanning tree of those
//! pairs (plus a few extra loops) gets one doorway cell each. Objects are then
//! drawn per room from the catalog.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::catalog;
use super::{
    Cell, Doorway, HouseSpec, ObjectId, ObjectSpec, Rect, Room, RoomId, RoomLabel,
    WorldError, DEFAULT_CELL_SIZE,
};
use crate::seeds;

/// Attempts before generation gives up and reports the seed.
pub const RETRY_BUDGET: u32 = 64;

const MIN_ROOM_SIDE: i32 = 3;
const CELLS_PER_ROOM: f64 = 30.0;
const EXTRA_DOOR_PROB: f64 = 0.25;
const MAX_CONTENTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenProfile {
    pub min_rooms: u32,
    pub max_rooms: u32,
    pub min_objects_per_room: u32,
    pub max_objects_per_room: u32,
    pub min_articulated: u32,
    pub cell_size: f64,
}

impl Default for GenProfile {
    fn default() -> Self {
        GenProfile {
            min_rooms: 3,
            max_rooms: 8,
            min_objects_per_room: 2,
            max_objects_per_room: 6,
            min_articulated: 1,
            cell_size: DEFAULT_CELL_SIZE,
        }
    }
}

impl GenProfile {
    pub fn with_rooms(min: u32, max: u32) -> Self {
        GenProfile {
            min_rooms: min,
            max_rooms: max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidProfile(m.into()));
        if self.min_rooms == 0 || self.min_rooms > self.max_rooms || self.max_rooms > 12 {
            return bad("room count bounds must satisfy 1 <= min_rooms <= max_rooms <= 12");
        }
        if self.min_objects_per_room == 0
            || self.min_objects_per_room > self.max_objects_per_room
            || self.max_objects_per_room > 9
        {
            return bad("object bounds must satisfy 1 <= min <= max <= 9 per room");
        }
        if self.min_articulated > self.max_rooms * self.max_objects_per_room {
            return bad("min_articulated exceeds the number of placeable objects");
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return bad("cell_size must be positive");
        }
        Ok(())
    }
}

/// House for `seed`; the same as run 0 of scene `seed`.
pub fn generate_house(seed: u64, profile: &GenProfile) -> Result<HouseSpec, WorldError> {
    generate_scene_run(seed, 0, profile)
}

/// The room layout depends only on `scene_seed`; object placement is redrawn
/// for each `run` of the scene.
pub fn generate_scene_run(
    scene_seed: u64,
    run: u64,
    profile: &GenProfile,
) -> Result<HouseSpec, WorldError> {
    profile.validate()?;
    let mut layout_rng = seeds::rng(seeds::mix(scene_seed, seeds::tag::LAYOUT));
    let mut object_rng = seeds::rng(seeds::mix(
        seeds::mix(scene_seed, seeds::tag::OBJECTS),
        run,
    ));
    let house_seed = if run == 0 {
        scene_seed
    } else {
        seeds::mix(scene_seed, run)
    };

    let mut layout = None;
    let mut attempts = 0;
    while attempts < RETRY_BUDGET {
        attempts += 1;
        if let Some(l) = try_layout(&mut layout_rng, profile) {
            layout = Some(l);
            break;
        }
    }
    let Some((rooms, doorways)) = layout else {
        return Err(WorldError::GenerationFailed {
            seed: scene_seed,
            attempts,
        });
    };

    while attempts < RETRY_BUDGET {
        attempts += 1;
        if let Some(objects) = try_populate(&mut object_rng, &rooms, &doorways, profile) {
            return HouseSpec::from_parts(house_seed, profile.cell_size, rooms, doorways, objects);
        }
    }
    Err(WorldError::GenerationFailed {
        seed: scene_seed,
        attempts,
    })
}

fn try_layout(rng: &mut ChaCha8Rng, profile: &GenProfile) -> Option<(Vec<Room>, Vec<Doorway>)> {
    let n = rng.gen_range(profile.min_rooms..=profile.max_rooms) as usize;
    let side = (n as f64 * CELLS_PER_ROOM).sqrt();
    let width = (side.round() as i32 + rng.gen_range(0..=2)).max(MIN_ROOM_SIDE);
    let height = ((n as f64 * CELLS_PER_ROOM / width as f64).round() as i32 + rng.gen_range(0..=2))
        .max(MIN_ROOM_SIDE);

    let mut rects = vec![Rect::new(1, 1, width, height)];
    while rects.len() < n {
        let splittable = |r: &Rect| {
            r.width() > 2 * MIN_ROOM_SIDE || r.height() > 2 * MIN_ROOM_SIDE
        };
        let (idx, _) = rects
            .iter()
            .enumerate()
            .filter(|(_, r)| splittable(r))
            .max_by_key(|(i, r)| (r.area(), std::cmp::Reverse(*i)))?;
        let r = rects[idx];
        let can_v = r.width() > 2 * MIN_ROOM_SIDE;
        let can_h = r.height() > 2 * MIN_ROOM_SIDE;
        let vertical = match (can_v, can_h) {
            (true, false) => true,
            (false, true) => false,
            _ if r.width() == r.height() => rng.gen_bool(0.5),
            _ => r.width() > r.height(),
        };
        let (a, b) = if vertical {
            let cut = rng.gen_range(MIN_ROOM_SIDE..=r.width() - MIN_ROOM_SIDE - 1);
            let wall = r.x0 + cut;
            (
                Rect::new(r.x0, r.y0, wall - 1, r.y1),
                Rect::new(wall + 1, r.y0, r.x1, r.y1),
            )
        } else {
            let cut = rng.gen_range(MIN_ROOM_SIDE..=r.height() - MIN_ROOM_SIDE - 1);
            let wall = r.y0 + cut;
            (
                Rect::new(r.x0, r.y0, r.x1, wall - 1),
                Rect::new(r.x0, wall + 1, r.x1, r.y1),
            )
        };
        rects[idx] = a;
        rects.push(b);
    }
    rects.sort_by_key(|r| (r.y0, r.x0));

    let rooms = label_rooms(rng, &rects);
    let doorways = place_doorways(rng, &rooms)?;
    Some((rooms, doorways))
}

fn label_rooms(rng: &mut ChaCha8Rng, rects: &[Rect]) -> Vec<Room> {
    let mut labels = vec![
        RoomLabel::Kitchen,
        RoomLabel::LivingRoom,
        RoomLabel::Bedroom,
        RoomLabel::Bathroom,
    ];
    labels.shuffle(rng);
    let extras = [
        RoomLabel::Bedroom,
        RoomLabel::Office,
        RoomLabel::DiningRoom,
        RoomLabel::Hallway,
        RoomLabel::Bathroom,
        RoomLabel::OtherRoom,
    ];
    while labels.len() < rects.len() {
        labels.push(*extras.choose(rng).expect("non-empty"));
    }
    labels.truncate(rects.len());
    labels.shuffle(rng);

    let mut totals: BTreeMap<RoomLabel, usize> = BTreeMap::new();
    for l in &labels {
        *totals.entry(*l).or_default() += 1;
    }
    let mut counters: BTreeMap<RoomLabel, usize> = BTreeMap::new();
    rects
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (rect, label))| {
            let k = counters.entry(label).or_default();
            *k += 1;
            let name = if totals[&label] > 1 {
                format!("{}_{}", label.as_str(), k)
            } else {
                label.as_str().to_string()
            };
            Room {
                id: RoomId(i as u32),
                label,
                name,
                bounds: *rect,
            }
        })
        .collect()
}

fn place_doorways(rng: &mut ChaCha8Rng, rooms: &[Room]) -> Option<Vec<Doorway>> {
    let room_at = |c: Cell| rooms.iter().find(|r| r.bounds.contains(c)).map(|r| r.id);
    let max_x = rooms.iter().map(|r| r.bounds.x1).max()?;
    let max_y = rooms.iter().map(|r| r.bounds.y1).max()?;

    let mut candidates: BTreeMap<(RoomId, RoomId), Vec<Cell>> = BTreeMap::new();
    for y in 1..=max_y {
        for x in 1..=max_x {
            let c = Cell(x, y);
            if room_at(c).is_some() {
                continue;
            }
            let touching: std::collections::BTreeSet<RoomId> =
                c.neighbors().iter().filter_map(|n| room_at(*n)).collect();
            // Only straight gaps between exactly two rooms become doorways.
            if touching.len() != 2 {
                continue;
            }
            for (p, q) in [
                (Cell(x - 1, y), Cell(x + 1, y)),
                (Cell(x, y - 1), Cell(x, y + 1)),
            ] {
                if let (Some(a), Some(b)) = (room_at(p), room_at(q)) {
                    if a != b {
                        candidates.entry((a.min(b), a.max(b))).or_default().push(c);
                    }
                }
            }
        }
    }

    let mut pairs: Vec<(RoomId, RoomId)> = candidates.keys().copied().collect();
    pairs.shuffle(rng);
    let mut parent: Vec<usize> = (0..rooms.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }

    let mut chosen = Vec::new();
    for (a, b) in pairs {
        let ra = find(&mut parent, a.0 as usize);
        let rb = find(&mut parent, b.0 as usize);
        let tree_edge = ra != rb;
        if tree_edge {
            parent[ra] = rb;
        }
        if tree_edge || rng.gen_bool(EXTRA_DOOR_PROB) {
            let cells = &candidates[&(a, b)];
            let cell = cells[rng.gen_range(0..cells.len())];
            chosen.push(Doorway {
                room_a: a,
                room_b: b,
                cell,
            });
        }
    }
    let root = find(&mut parent, 0);
    if (0..rooms.len()).any(|i| find(&mut parent, i) != root) {
        return None;
    }
    chosen.sort_by_key(|d| (d.room_a, d.room_b));
    Some(chosen)
}

fn try_populate(
    rng: &mut ChaCha8Rng,
    rooms: &[Room],
    doorways: &[Doorway],
    profile: &GenProfile,
) -> Option<Vec<ObjectSpec>> {
    let mut objects: Vec<ObjectSpec> = Vec::new();
    for room in rooms {
        let mut cells: Vec<Cell> = room
            .bounds
            .cells()
            .filter(|c| !doorways.iter().any(|d| d.cell.manhattan(*c) <= 1))
            .collect();
        cells.shuffle(rng);
        let want = rng.gen_range(profile.min_objects_per_room..=profile.max_objects_per_room);
        let count = (want as usize).min(cells.len());
        let menu = catalog::room_catalog(room.label);
        for &cell in &cells[..count] {
            let category = menu[rng.gen_range(0..menu.len())];
            let id = ObjectId(objects.len() as u32);
            let articulated = catalog::is_articulated(category);
            objects.push(ObjectSpec {
                id,
                name: String::new(),
                category: category.to_string(),
                cell,
                room: room.id,
                articulated,
                contents: vec![],
                inside: None,
                open: false,
            });
            if articulated {
                let items = catalog::container_items(category);
                let k = rng.gen_range(0..=MAX_CONTENTS);
                for _ in 0..k {
                    let item = items[rng.gen_range(0..items.len())];
                    let inner = ObjectId(objects.len() as u32);
                    objects[id.0 as usize].contents.push(inner);
                    objects.push(ObjectSpec {
                        id: inner,
                        name: String::new(),
                        category: item.to_string(),
                        cell,
                        room: room.id,
                        articulated: false,
                        contents: vec![],
                        inside: Some(id),
                        open: false,
                    });
                }
            }
        }
    }
    let articulated = objects.iter().filter(|o| o.articulated).count() as u32;
    if articulated < profile.min_articulated {
        return None;
    }
    let mut counters: BTreeMap<String, u32> = BTreeMap::new();
    for o in &mut objects {
        let k = counters.entry(o.category.clone()).or_default();
        *k += 1;
        o.name = format!("{}_{}", o.category, k);
    }
    Some(objects)
}
