//! Fixed object vocabulary used by the house generator.
//!
//! The tables double as the commonsense prior handed to planners: which room
//! types usually hold a category, and which containers usually hold an item.

use super::RoomLabel;

/// Categories placed directly in a room of the given type.
pub fn room_catalog(label: RoomLabel) -> &'static [&'static str] {
    match label {
        RoomLabel::Kitchen => &[
            "fridge",
            "cabinet",
            "dishwasher",
            "table",
            "chair",
            "sink",
            "mug",
            "bowl",
            "apple",
        ],
        RoomLabel::LivingRoom => &[
            "sofa", "tv", "cabinet", "drawer", "table", "plant", "lamp", "remote", "book",
            "pillow",
        ],
        RoomLabel::Bedroom => &[
            "bed", "wardrobe", "drawer", "lamp", "book", "shoes", "pillow", "laptop",
        ],
        RoomLabel::Bathroom => &["toilet", "sink", "cabinet", "bathtub", "towel", "soap"],
        RoomLabel::DiningRoom => &["table", "chair", "cabinet", "plant", "plate", "bowl", "mug"],
        RoomLabel::Office => &["desk", "chair", "drawer", "shelf", "laptop", "book", "lamp"],
        RoomLabel::Hallway => &["shelf", "plant", "shoes", "cabinet", "keys"],
        RoomLabel::OtherRoom => &["shelf", "cabinet", "box", "plant", "bottle"],
    }
}

/// Items that a container category can hold. Empty for anything that is not
/// articulated.
pub fn container_items(category: &str) -> &'static [&'static str] {
    match category {
        "fridge" => &["apple", "milk", "bottle"],
        "cabinet" => &["mug", "bowl", "plate", "towel", "soap", "book"],
        "dishwasher" => &["plate", "bowl", "mug"],
        "wardrobe" => &["shirt", "shoes", "towel"],
        "drawer" => &["keys", "book", "laptop", "remote"],
        "box" => &["keys", "book", "bottle"],
        _ => &[],
    }
}

pub fn is_articulated(category: &str) -> bool {
    !container_items(category).is_empty()
}

/// True when `category` commonly appears in a room of type `label`, either in
/// the open or inside one of that room's usual containers.
pub fn room_affinity(label: RoomLabel, category: &str) -> bool {
    room_catalog(label)
        .iter()
        .any(|c| *c == category || container_items(c).contains(&category))
}

pub fn container_affinity(container: &str, item: &str) -> bool {
    container_items(container).contains(&item)
}
