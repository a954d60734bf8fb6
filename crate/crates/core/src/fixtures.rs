//! Small hand-built houses with known geometry, used by tests and examples.
//!
//! Layout of [`two_room_house`] (cell coordinates, `D` is the doorway):
//!
//! ```text
//!   x: 0123456789ABCDE
//! y=0  ###############
//! y=1  #.............#   hallway (1,1)-(13,1), waypoints x = 2,4,7,10,12
//! y=2  ##.D###########   doorway at (3,2)
//! y=3  #.....#           kitchen (1,3)-(5,7), waypoints (2|4, 4|6)
//!  ...
//! ```

use crate::world::{
    Cell, Doorway, HouseSpec, ObjectId, ObjectSpec, Rect, Room, RoomId, RoomLabel,
    DEFAULT_CELL_SIZE,
};

fn room(id: u32, label: RoomLabel, name: &str, bounds: Rect) -> Room {
    Room {
        id: RoomId(id),
        label,
        name: name.into(),
        bounds,
    }
}

fn object(id: u32, name: &str, category: &str, cell: Cell, room: u32) -> ObjectSpec {
    ObjectSpec {
        id: ObjectId(id),
        name: name.into(),
        category: category.into(),
        cell,
        room: RoomId(room),
        articulated: false,
        contents: vec![],
        inside: None,
        open: false,
    }
}

fn container(id: u32, name: &str, category: &str, cell: Cell, room: u32, contents: &[u32]) -> ObjectSpec {
    ObjectSpec {
        articulated: true,
        contents: contents.iter().map(|c| ObjectId(*c)).collect(),
        ..object(id, name, category, cell, room)
    }
}

fn contained(id: u32, name: &str, category: &str, parent: &ObjectSpec) -> ObjectSpec {
    ObjectSpec {
        inside: Some(parent.id),
        ..object(id, name, category, parent.cell, parent.room.0)
    }
}

/// Hallway (5 waypoints) above a kitchen (4 waypoints) with one doorway.
/// The kitchen holds `cabinet_1` (closed, contains `mug_1`) and `table_1`;
/// the hallway holds `plant_1` and `shelf_1`.
pub fn two_room_house() -> HouseSpec {
    let rooms = vec![
        room(0, RoomLabel::Hallway, "hallway", Rect::new(1, 1, 13, 1)),
        room(1, RoomLabel::Kitchen, "kitchen", Rect::new(1, 3, 5, 7)),
    ];
    let doorways = vec![Doorway {
        room_a: RoomId(0),
        room_b: RoomId(1),
        cell: Cell(3, 2),
    }];
    let cabinet = container(0, "cabinet_1", "cabinet", Cell(2, 5), 1, &[1]);
    let mug = contained(1, "mug_1", "mug", &cabinet);
    let objects = vec![
        cabinet,
        mug,
        object(2, "table_1", "table", Cell(4, 6), 1),
        object(3, "plant_1", "plant", Cell(7, 1), 0),
        object(4, "shelf_1", "shelf", Cell(12, 1), 0),
    ];
    HouseSpec::from_parts(1, DEFAULT_CELL_SIZE, rooms, doorways, objects)
        .expect("two-room fixture is valid")
}

/// Same geometry as [`two_room_house`], but the only category that can ever
/// be hidden is `microwave`, inside the kitchen cabinet. Both rooms carry a
/// cabinet so that category is visible from every start.
pub fn microwave_house() -> HouseSpec {
    let mut house = two_room_house();
    let cabinet = container(0, "cabinet_1", "cabinet", Cell(2, 5), 1, &[1]);
    let microwave = contained(1, "microwave_1", "microwave", &cabinet);
    house.objects = vec![
        cabinet,
        microwave,
        container(2, "cabinet_2", "cabinet", Cell(7, 1), 0, &[]),
    ];
    house.validate().expect("microwave fixture is valid");
    house
}

/// One 5x5 kitchen, no doorways.
pub fn one_room_house() -> HouseSpec {
    let rooms = vec![room(0, RoomLabel::Kitchen, "kitchen", Rect::new(1, 1, 5, 5))];
    let cabinet = container(0, "cabinet_1", "cabinet", Cell(2, 2), 0, &[1]);
    let mug = contained(1, "mug_1", "mug", &cabinet);
    let objects = vec![cabinet, mug, object(2, "table_1", "table", Cell(4, 4), 0)];
    HouseSpec::from_parts(2, DEFAULT_CELL_SIZE, rooms, vec![], objects)
        .expect("one-room fixture is valid")
}

/// A single straight corridor of `len` cells along y = 1.
pub fn corridor_house(len: i32) -> HouseSpec {
    let rooms = vec![room(0, RoomLabel::Hallway, "hallway", Rect::new(1, 1, len, 1))];
    HouseSpec::from_parts(3, DEFAULT_CELL_SIZE, rooms, vec![], vec![])
        .expect("corridor fixture is valid")
}

/// Three rooms in a row: office | hallway | bedroom, the keys hidden in the
/// bedroom drawer. Used for multi-room planning checks.
pub fn three_room_house() -> HouseSpec {
    let rooms = vec![
        room(0, RoomLabel::Office, "office", Rect::new(1, 1, 4, 4)),
        room(1, RoomLabel::Hallway, "hallway", Rect::new(6, 1, 8, 7)),
        room(2, RoomLabel::Bedroom, "bedroom", Rect::new(10, 1, 14, 5)),
    ];
    let doorways = vec![
        Doorway {
            room_a: RoomId(0),
            room_b: RoomId(1),
            cell: Cell(5, 2),
        },
        Doorway {
            room_a: RoomId(1),
            room_b: RoomId(2),
            cell: Cell(9, 4),
        },
    ];
    let desk_drawer = container(1, "drawer_1", "drawer", Cell(1, 4), 0, &[]);
    let drawer = container(3, "drawer_2", "drawer", Cell(13, 4), 2, &[4]);
    let keys = contained(4, "keys_1", "keys", &drawer);
    let objects = vec![
        object(0, "desk_1", "desk", Cell(2, 2), 0),
        desk_drawer,
        object(2, "plant_1", "plant", Cell(7, 6), 1),
        drawer,
        keys,
        object(5, "bed_1", "bed", Cell(11, 2), 2),
    ];
    HouseSpec::from_parts(4, DEFAULT_CELL_SIZE, rooms, doorways, objects)
        .expect("three-room fixture is valid")
}
