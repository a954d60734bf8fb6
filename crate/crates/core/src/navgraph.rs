//! Navigation graph over free space.
//!
//! Each room contributes waypoints on a coarsened lattice of its interior,
//! joined to their lattice neighbours; each doorway contributes one node
//! linked to the nearest waypoint on either side. Removing the doorway nodes
//! splits the graph into per-room subgraphs, which are then reconnected by a
//! single bridge edge per adjacent room pair, weighted by the shortest path
//! between the closest node pair.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{Cell, HouseSpec, RoomId};

/// Tolerance for comparing path lengths, which are sums of half-meter steps.
pub const LENGTH_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NavError {
    #[error("free space is disconnected")]
    DisconnectedFreeSpace,
    #[error("no path from node {from} to node {to}")]
    Unreachable { from: u32, to: u32 },
    #[error("unknown node id {0}")]
    UnknownNodeId(u32),
    #[error("graph has no nodes")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

/// What part of the house a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Place {
    Room(RoomId),
    Doorway(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub cell: Cell,
    pub place: Place,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub length_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawGraph {
    cell_size: f64,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

/// Undirected weighted graph. Nodes are kept sorted by id and edges by
/// `(a, b)` with `a < b`, so serialization is canonical.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "RawGraph", into = "RawGraph")]
pub struct NavGraph {
    cell_size: f64,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: BTreeMap<NodeId, usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for NavGraph {
    fn eq(&self, other: &Self) -> bool {
        self.cell_size == other.cell_size && self.nodes == other.nodes && self.edges == other.edges
    }
}

impl From<RawGraph> for NavGraph {
    fn from(raw: RawGraph) -> Self {
        NavGraph::new(raw.cell_size, raw.nodes, raw.edges)
    }
}

impl From<NavGraph> for RawGraph {
    fn from(g: NavGraph) -> Self {
        RawGraph {
            cell_size: g.cell_size,
            nodes: g.nodes,
            edges: g.edges,
        }
    }
}

impl NavGraph {
    pub fn new(cell_size: f64, mut nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        nodes.sort_by_key(|n| n.id);
        let index: BTreeMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| if e.a <= e.b { e } else { Edge { a: e.b, b: e.a, ..e } })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        edges.dedup_by(|x, y| x.a == y.a && x.b == y.b);
        let mut adj = vec![Vec::new(); nodes.len()];
        for e in &edges {
            let (i, j) = (index[&e.a], index[&e.b]);
            adj[i].push((j, e.length_m));
            adj[j].push((i, e.length_m));
        }
        for list in &mut adj {
            list.sort_by_key(|x| x.0);
        }
        NavGraph {
            cell_size,
            nodes,
            edges,
            index,
            adj,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn room_of(&self, id: NodeId) -> Option<Place> {
        self.node(id).map(|n| n.place)
    }

    pub fn neighbors(&self, id: NodeId) -> Vec<(NodeId, f64)> {
        match self.index.get(&id) {
            Some(&i) => self.adj[i]
                .iter()
                .map(|&(j, w)| (self.nodes[j].id, w))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn room_nodes(&self, room: RoomId) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.place == Place::Room(room))
            .map(|n| n.id)
            .collect()
    }

    pub fn node_at(&self, cell: Cell) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.cell == cell).map(|n| n.id)
    }

    /// Node nearest to `cell` by lattice distance, ties to the smaller id.
    pub fn snap(&self, cell: Cell) -> Option<NodeId> {
        self.nodes
            .iter()
            .min_by_key(|n| (n.cell.manhattan(cell), n.id))
            .map(|n| n.id)
    }

    pub fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let d = self.dijkstra_index(0);
        d.iter().all(|x| x.is_finite())
    }

    /// Single-source distances, indexed like [`NavGraph::nodes`].
    fn dijkstra_index(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(HeapItem(nd, v));
                }
            }
        }
        dist
    }

    /// Distances from `source` to every node.
    pub fn distances_from(&self, source: NodeId) -> Result<BTreeMap<NodeId, f64>, NavError> {
        let &i = self
            .index
            .get(&source)
            .ok_or(NavError::UnknownNodeId(source.0))?;
        let d = self.dijkstra_index(i);
        Ok(self.nodes.iter().map(|n| n.id).zip(d).collect())
    }

    /// Shortest node-to-node path. Among equal-length paths the
    /// lexicographically smallest node sequence wins.
    pub fn node_path(&self, from: NodeId, to: NodeId) -> Result<(f64, Vec<NodeId>), NavError> {
        let &s = self.index.get(&from).ok_or(NavError::UnknownNodeId(from.0))?;
        let &t = self.index.get(&to).ok_or(NavError::UnknownNodeId(to.0))?;
        let to_target = self.dijkstra_index(t);
        if !to_target[s].is_finite() {
            return Err(NavError::Unreachable {
                from: from.0,
                to: to.0,
            });
        }
        Ok((to_target[s], self.trace(s, t, &to_target)))
    }

    fn trace(&self, s: usize, t: usize, to_target: &[f64]) -> Vec<NodeId> {
        let mut path = vec![self.nodes[s].id];
        let mut cur = s;
        while cur != t {
            let next = self.adj[cur]
                .iter()
                .filter(|&&(v, w)| (w + to_target[v] - to_target[cur]).abs() <= LENGTH_EPS)
                .map(|&(v, _)| v)
                .min_by_key(|&v| self.nodes[v].id)
                .expect("a shortest-path successor exists");
            path.push(self.nodes[next].id);
            cur = next;
        }
        path
    }

    /// Renders Graphviz DOT, one cluster per room.
    pub fn to_dot(&self, house: Option<&HouseSpec>) -> String {
        let mut out = String::from("graph navgraph {\n  node [shape=circle, fontsize=8];\n");
        let mut by_place: BTreeMap<Place, Vec<&Node>> = BTreeMap::new();
        for n in &self.nodes {
            by_place.entry(n.place).or_default().push(n);
        }
        for (place, nodes) in &by_place {
            match place {
                Place::Room(r) => {
                    let label = house
                        .map(|h| h.room(*r).name.clone())
                        .unwrap_or_else(|| format!("room {}", r.0));
                    let _ = writeln!(out, "  subgraph cluster_room{} {{\n    label=\"{label}\";", r.0);
                    for n in nodes {
                        let _ = writeln!(
                            out,
                            "    n{} [pos=\"{},{}!\"];",
                            n.id.0, n.cell.0, -n.cell.1
                        );
                    }
                    out.push_str("  }\n");
                }
                Place::Doorway(_) => {
                    for n in nodes {
                        let _ = writeln!(
                            out,
                            "  n{} [shape=box, pos=\"{},{}!\"];",
                            n.id.0, n.cell.0, -n.cell.1
                        );
                    }
                }
            }
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -- n{} [label=\"{:.1}\"];", e.a.0, e.b.0, e.length_m);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_canonical_json(&self) -> String {
        crate::canonical::to_canonical_json(self)
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-room component of the navigation graph, doorways removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSubgraph {
    pub room: RoomId,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<Edge>,
}

/// Builds the full navigation graph, doorway nodes included.
pub fn build_nav_graph(house: &HouseSpec) -> Result<NavGraph, NavError> {
    let cs = house.cell_size;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut next = 0u32;
    for room in &house.rooms {
        let wps = room.bounds.waypoints();
        let first = next;
        for &cell in &wps {
            nodes.push(Node {
                id: NodeId(next),
                cell,
                place: Place::Room(room.id),
            });
            next += 1;
        }
        for (i, a) in wps.iter().enumerate() {
            // Lattice neighbours: next waypoint in the same row, and the
            // nearest waypoint straight below in the same column.
            let right = wps[i + 1..].iter().position(|b| b.1 == a.1);
            let down = wps[i + 1..].iter().position(|b| b.0 == a.0);
            for j in [right, down].into_iter().flatten() {
                let b = wps[i + 1 + j];
                edges.push(Edge {
                    a: NodeId(first + i as u32),
                    b: NodeId(first + (i + 1 + j) as u32),
                    length_m: a.manhattan(b) as f64 * cs,
                });
            }
        }
    }
    for (d_idx, door) in house.doorways.iter().enumerate() {
        let door_id = NodeId(next);
        next += 1;
        nodes.push(Node {
            id: door_id,
            cell: door.cell,
            place: Place::Doorway(d_idx as u32),
        });
        for room in [door.room_a, door.room_b] {
            let nearest = nodes
                .iter()
                .filter(|n| n.place == Place::Room(room))
                .min_by_key(|n| (n.cell.manhattan(door.cell), n.id))
                .ok_or(NavError::DisconnectedFreeSpace)?;
            edges.push(Edge {
                a: nearest.id,
                b: door_id,
                length_m: nearest.cell.manhattan(door.cell) as f64 * cs,
            });
        }
    }
    let g = NavGraph::new(cs, nodes, edges);
    if g.is_empty() {
        return Err(NavError::Empty);
    }
    if !g.is_connected() {
        return Err(NavError::DisconnectedFreeSpace);
    }
    Ok(g)
}

/// Drops doorway nodes and their edges and groups what remains by room.
pub fn decompose_rooms(g: &NavGraph) -> Vec<RoomSubgraph> {
    let mut rooms: BTreeMap<RoomId, BTreeSet<NodeId>> = BTreeMap::new();
    for n in g.nodes() {
        if let Place::Room(r) = n.place {
            rooms.entry(r).or_default().insert(n.id);
        }
    }
    rooms
        .into_iter()
        .map(|(room, set)| RoomSubgraph {
            room,
            edges: g
                .edges()
                .iter()
                .filter(|e| set.contains(&e.a) && set.contains(&e.b))
                .cloned()
                .collect(),
            nodes: set.into_iter().collect(),
        })
        .collect()
}

/// Room pairs joined by at least one doorway node in `g`.
pub fn adjacent_room_pairs(g: &NavGraph) -> BTreeSet<(RoomId, RoomId)> {
    let mut pairs = BTreeSet::new();
    for n in g.nodes() {
        if let Place::Doorway(_) = n.place {
            let rooms: BTreeSet<RoomId> = g
                .neighbors(n.id)
                .into_iter()
                .filter_map(|(m, _)| match g.room_of(m) {
                    Some(Place::Room(r)) => Some(r),
                    _ => None,
                })
                .collect();
            let rooms: Vec<RoomId> = rooms.into_iter().collect();
            for i in 0..rooms.len() {
                for j in i + 1..rooms.len() {
                    pairs.insert((rooms[i], rooms[j]));
                }
            }
        }
    }
    pairs
}

/// Bridge between two rooms: the closest node pair under shortest-path
/// distance in `g`, ties broken by the smallest `(a, b)` id pair.
pub fn closest_pair(
    g: &NavGraph,
    a_nodes: &[NodeId],
    b_nodes: &[NodeId],
) -> Result<Edge, NavError> {
    let mut best: Option<Edge> = None;
    for &a in a_nodes {
        let dist = g.distances_from(a)?;
        for &b in b_nodes {
            let d = dist[&b];
            if !d.is_finite() {
                continue;
            }
            let better = match &best {
                None => true,
                Some(e) => d < e.length_m - LENGTH_EPS,
            };
            if better {
                best = Some(Edge { a, b, length_m: d });
            }
        }
    }
    best.ok_or(NavError::DisconnectedFreeSpace)
}

/// Reassembles room subgraphs into one graph without doorway nodes.
pub fn connect_rooms(subgraphs: &[RoomSubgraph], g: &NavGraph) -> Result<NavGraph, NavError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut members: BTreeMap<RoomId, &RoomSubgraph> = BTreeMap::new();
    for sg in subgraphs {
        members.insert(sg.room, sg);
        for id in &sg.nodes {
            let n = g.node(*id).ok_or(NavError::UnknownNodeId(id.0))?;
            nodes.push(n.clone());
        }
        edges.extend(sg.edges.iter().cloned());
    }
    for (ra, rb) in adjacent_room_pairs(g) {
        let (Some(a), Some(b)) = (members.get(&ra), members.get(&rb)) else {
            continue;
        };
        edges.push(closest_pair(g, &a.nodes, &b.nodes)?);
    }
    let out = NavGraph::new(g.cell_size(), nodes, edges);
    if !out.is_connected() {
        return Err(NavError::DisconnectedFreeSpace);
    }
    Ok(out)
}

/// Result of a cell-to-cell path query.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub length_m: f64,
    pub nodes: Vec<NodeId>,
}

/// Shortest path between two cells. Cells snap to their nearest node and the
/// straight lattice legs to and from those nodes count toward the length.
pub fn shortest_path(g: &NavGraph, from: Cell, to: Cell) -> Result<PathResult, NavError> {
    let a = g.snap(from).ok_or(NavError::Empty)?;
    let b = g.snap(to).ok_or(NavError::Empty)?;
    if from == to {
        return Ok(PathResult {
            length_m: 0.0,
            nodes: vec![a],
        });
    }
    let (d, nodes) = g.node_path(a, b)?;
    let legs = g.node(a).map_or(0, |n| n.cell.manhattan(from))
        + g.node(b).map_or(0, |n| n.cell.manhattan(to));
    Ok(PathResult {
        length_m: d + legs as f64 * g.cell_size(),
        nodes,
    })
}

/// Dense all-pairs distance table with lexicographic path reconstruction.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    graph: NavGraph,
    dist: Vec<Vec<f64>>,
}

impl DistanceTable {
    pub fn new(graph: NavGraph) -> Self {
        let dist = (0..graph.len()).map(|i| graph.dijkstra_index(i)).collect();
        DistanceTable { graph, dist }
    }

    pub fn graph(&self) -> &NavGraph {
        &self.graph
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        match (self.graph.index.get(&a), self.graph.index.get(&b)) {
            (Some(&i), Some(&j)) => self.dist[i][j],
            _ => f64::INFINITY,
        }
    }

    pub fn path(&self, a: NodeId, b: NodeId) -> Result<(f64, Vec<NodeId>), NavError> {
        let &i = self.graph.index.get(&a).ok_or(NavError::UnknownNodeId(a.0))?;
        let &j = self.graph.index.get(&b).ok_or(NavError::UnknownNodeId(b.0))?;
        if !self.dist[j][i].is_finite() {
            return Err(NavError::Unreachable { from: a.0, to: b.0 });
        }
        Ok((self.dist[j][i], self.graph.trace(i, j, &self.dist[j])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    /// Bellman-Ford over the edge list, independent of the Dijkstra path.
    fn bellman_ford(g: &NavGraph, s: NodeId) -> BTreeMap<NodeId, f64> {
        let mut d: BTreeMap<NodeId, f64> = g.node_ids().map(|n| (n, f64::INFINITY)).collect();
        d.insert(s, 0.0);
        for _ in 0..g.len() {
            for e in g.edges() {
                let (da, db) = (d[&e.a], d[&e.b]);
                if da + e.length_m < db {
                    d.insert(e.b, da + e.length_m);
                }
                if db + e.length_m < da {
                    d.insert(e.a, db + e.length_m);
                }
            }
        }
        d
    }

    #[test]
    fn one_room_house_has_no_doorway_nodes() {
        let g = build_nav_graph(&fixtures::one_room_house()).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g.nodes().iter().all(|n| matches!(n.place, Place::Room(_))));
        let subs = decompose_rooms(&g);
        assert_eq!(subs.len(), 1);
        assert_eq!(subs[0].nodes.len(), g.len());
        assert_eq!(subs[0].edges, g.edges());
        assert_eq!(connect_rooms(&subs, &g).unwrap(), g);
    }

    #[test]
    fn two_room_fixture_counts() {
        // Hallway: 5 waypoints, 4 edges. Kitchen: 2x2 lattice, 4 edges.
        // Doorway (3,2): linked to hallway (2,1) and kitchen (2,4).
        let g = build_nav_graph(&fixtures::two_room_house()).unwrap();
        assert_eq!(g.len(), 5 + 4 + 1);
        assert_eq!(g.edges().len(), 4 + 4 + 2);
        assert!(g.is_connected());
        let door = g
            .nodes()
            .iter()
            .find(|n| matches!(n.place, Place::Doorway(_)))
            .unwrap();
        assert_eq!(door.cell, Cell(3, 2));
        let cells: BTreeSet<Cell> = g
            .neighbors(door.id)
            .iter()
            .map(|(n, _)| g.node(*n).unwrap().cell)
            .collect();
        assert_eq!(cells, BTreeSet::from([Cell(2, 1), Cell(2, 4)]));
    }

    #[test]
    fn two_room_decompose_and_bridge() {
        let g = build_nav_graph(&fixtures::two_room_house()).unwrap();
        let subs = decompose_rooms(&g);
        assert_eq!(subs.len(), 2);
        for s in &subs {
            assert!(s.nodes.iter().all(|n| matches!(g.room_of(*n), Some(Place::Room(_)))));
        }
        let joined = connect_rooms(&subs, &g).unwrap();
        let bridges: Vec<&Edge> = joined
            .edges()
            .iter()
            .filter(|e| joined.room_of(e.a) != joined.room_of(e.b))
            .collect();
        assert_eq!(bridges.len(), 1);
        // (2,1) -> door (3,2) -> (2,4) is 2 + 3 cells, 2.5 m.
        let b = bridges[0];
        assert_eq!(g.node(b.a).unwrap().cell, Cell(2, 1));
        assert_eq!(g.node(b.b).unwrap().cell, Cell(2, 4));
        assert_eq!(b.length_m, 2.5);
    }

    #[test]
    fn corridor_of_four_cells_is_one_and_a_half_meters() {
        let g = build_nav_graph(&fixtures::corridor_house(4)).unwrap();
        let p = shortest_path(&g, Cell(1, 1), Cell(4, 1)).unwrap();
        assert_eq!(p.length_m, 1.5);
    }

    #[test]
    fn same_cell_is_zero() {
        let g = build_nav_graph(&fixtures::two_room_house()).unwrap();
        let p = shortest_path(&g, Cell(2, 4), Cell(2, 4)).unwrap();
        assert_eq!(p.length_m, 0.0);
        assert_eq!(p.nodes.len(), 1);
    }

    #[test]
    fn matches_bellman_ford_on_fixtures() {
        for house in [fixtures::two_room_house(), fixtures::three_room_house()] {
            let g = build_nav_graph(&house).unwrap();
            for s in g.node_ids() {
                let bf = bellman_ford(&g, s);
                let dj = g.distances_from(s).unwrap();
                for t in g.node_ids() {
                    assert!((bf[&t] - dj[&t]).abs() < 1e-9);
                    let (len, path) = g.node_path(s, t).unwrap();
                    assert!((len - bf[&t]).abs() < 1e-9);
                    let walked: f64 = path
                        .windows(2)
                        .map(|w| {
                            g.edges()
                                .iter()
                                .find(|e| (e.a, e.b) == (w[0].min(w[1]), w[0].max(w[1])))
                                .unwrap()
                                .length_m
                        })
                        .sum();
                    assert!((walked - len).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn lexicographic_tie_break() {
        // Square: 0-1, 0-2, 1-3, 2-3 all length 1. Two shortest 0->3 paths.
        let nodes = (0..4)
            .map(|i| Node {
                id: NodeId(i),
                cell: Cell(i as i32, 0),
                place: Place::Room(RoomId(0)),
            })
            .collect();
        let e = |a, b| Edge {
            a: NodeId(a),
            b: NodeId(b),
            length_m: 1.0,
        };
        let g = NavGraph::new(0.5, nodes, vec![e(0, 2), e(2, 3), e(0, 1), e(1, 3)]);
        let (_, path) = g.node_path(NodeId(0), NodeId(3)).unwrap();
        assert_eq!(path, vec![NodeId(0), NodeId(1), NodeId(3)]);
        let table = DistanceTable::new(g);
        assert_eq!(table.path(NodeId(0), NodeId(3)).unwrap().1, path);
    }

    #[test]
    fn unreachable_is_reported() {
        let nodes = (0..2)
            .map(|i| Node {
                id: NodeId(i),
                cell: Cell(i as i32, 0),
                place: Place::Room(RoomId(0)),
            })
            .collect();
        let g = NavGraph::new(0.5, nodes, vec![]);
        assert_eq!(
            g.node_path(NodeId(0), NodeId(1)),
            Err(NavError::Unreachable { from: 0, to: 1 })
        );
    }

    #[test]
    fn json_round_trip_rebuilds_adjacency() {
        let g = build_nav_graph(&fixtures::three_room_house()).unwrap();
        let text = g.to_canonical_json();
        let back: NavGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.neighbors(NodeId(0)), g.neighbors(NodeId(0)));
        assert!(g.to_dot(None).starts_with("graph navgraph {"));
    }
}
