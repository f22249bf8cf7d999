//! Room-to-room traversal: door structure, entry door, DFS ordering and
//! obstacle-avoiding routes over per-room visibility graphs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use image::{Rgb, RgbImage};
use thiserror::Error;

use crate::geometry::{polygon_centroid, Point, Polygon};
use crate::model::{DecorInstance, Door, Room, SemanticModel};
use crate::raster::{self, BinaryImage, Rect};
use crate::segmentation::rect_intersects_polygon;

#[derive(Debug, Error, PartialEq)]
pub enum NavigationError {
    #[error("door {0} belongs to no room")]
    OrphanDoor(usize),
    #[error("door {door} touches {count} rooms")]
    AmbiguousDoor { door: usize, count: usize },
    #[error("no outer door found")]
    NoEntry,
    #[error("rooms unreachable from the entry: {0:?}")]
    Disconnected(Vec<usize>),
    #[error("room {room}: no route from vertex {from} to vertex {to}")]
    Unroutable { room: usize, from: usize, to: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("cannot write overlay {path}: {message}")]
    Overlay { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, NavigationError>;

#[derive(Debug, Clone, PartialEq)]
pub struct NavParams {
    /// Distance (per axis) that obstacle corners are pushed into free space.
    pub corner_push: f64,
    pub max_corners: usize,
}

impl Default for NavParams {
    fn default() -> Self {
        NavParams { corner_push: 3.0, max_corners: 1000 }
    }
}

/// Door ids incident to each room, ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DoorStructure {
    pub rooms: BTreeMap<usize, Vec<usize>>,
}

impl DoorStructure {
    pub fn doors_of(&self, room: usize) -> &[usize] {
        self.rooms.get(&room).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Rooms listing door `door`, ascending.
    pub fn rooms_of(&self, door: usize) -> Vec<usize> {
        self.rooms.iter().filter(|(_, ds)| ds.contains(&door)).map(|(&r, _)| r).collect()
    }

    /// Room graph with an edge wherever two rooms list the same door.
    pub fn room_graph(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut g: BTreeMap<usize, BTreeSet<usize>> = self.rooms.keys().map(|&r| (r, BTreeSet::new())).collect();
        let mut by_door: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&r, ds) in &self.rooms {
            for &d in ds {
                by_door.entry(d).or_default().push(r);
            }
        }
        for rs in by_door.values() {
            if let [a, b] = rs[..] {
                g.entry(a).or_default().insert(b);
                g.entry(b).or_default().insert(a);
            }
        }
        g
    }

    /// Lowest door id shared by rooms `a` and `b`.
    pub fn shared_door(&self, a: usize, b: usize) -> Option<usize> {
        let db = self.doors_of(b);
        self.doors_of(a).iter().copied().find(|d| db.contains(d))
    }
}

/// A door belongs to a room when its window grown by 2 px meets the room
/// polygon.
pub fn build_door_structure(rooms: &[Room], doors: &[Door]) -> Result<DoorStructure> {
    let mut s = DoorStructure { rooms: rooms.iter().map(|r| (r.id, Vec::new())).collect() };
    let polys: Vec<(usize, Polygon)> = rooms.iter().map(|r| (r.id, r.polygon())).collect();
    let mut sorted: Vec<&Door> = doors.iter().collect();
    sorted.sort_by_key(|d| d.id);
    for d in sorted {
        let grown = d.bbox.dilate(2);
        let hit: Vec<usize> = polys.iter().filter(|(_, p)| rect_intersects_polygon(&grown, p)).map(|(id, _)| *id).collect();
        match hit.len() {
            0 => return Err(NavigationError::OrphanDoor(d.id)),
            1 | 2 => {
                for r in hit {
                    s.rooms.entry(r).or_default().push(d.id);
                }
            }
            n => return Err(NavigationError::AmbiguousDoor { door: d.id, count: n }),
        }
    }
    Ok(s)
}

/// The entry door is the lowest-id door that meets a single room and pokes
/// out of the plan boundary.
pub fn find_entry(rooms: &[Room], doors: &[Door], boundary: &Polygon) -> Result<(usize, usize)> {
    let structure = build_door_structure(rooms, doors)?;
    let mut ids: Vec<&Door> = doors.iter().collect();
    ids.sort_by_key(|d| d.id);
    for d in ids {
        let rs = structure.rooms_of(d.id);
        if rs.len() != 1 {
            continue;
        }
        let g = d.bbox.dilate(2);
        let corners = [(g.x0, g.y0), (g.x1, g.y0), (g.x1, g.y1), (g.x0, g.y1)];
        if corners.iter().any(|&(x, y)| !boundary.contains(&Point::new(x as f64, y as f64))) {
            return Ok((rs[0], d.id));
        }
    }
    Err(NavigationError::NoEntry)
}

/// DFS preorder from `entry`, expanding neighbours in ascending id; each
/// room comes with its DFS parent.
pub fn dfs_order(graph: &BTreeMap<usize, BTreeSet<usize>>, entry: usize) -> Result<Vec<(usize, Option<usize>)>> {
    if !graph.contains_key(&entry) {
        return Err(NavigationError::InvalidInput(format!("entry room {entry} not in graph")));
    }
    let mut order = Vec::new();
    let mut seen = BTreeSet::new();
    // stack of (room, parent); neighbours pushed in descending order so the
    // smallest is expanded first
    let mut stack = vec![(entry, None)];
    while let Some((r, parent)) = stack.pop() {
        if !seen.insert(r) {
            continue;
        }
        order.push((r, parent));
        if let Some(ns) = graph.get(&r) {
            for &n in ns.iter().rev() {
                if !seen.contains(&n) {
                    stack.push((n, Some(r)));
                }
            }
        }
    }
    let missing: Vec<usize> = graph.keys().copied().filter(|r| !seen.contains(r)).collect();
    if !missing.is_empty() {
        return Err(NavigationError::Disconnected(missing));
    }
    Ok(order)
}

fn px(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Walkable space of one room: room pixels plus its door windows, minus ink
/// outside the door windows.
#[derive(Debug, Clone, PartialEq)]
pub struct RoomSpace {
    origin: (i64, i64),
    blocked: BinaryImage,
}

impl RoomSpace {
    /// `region` marks the room pixels inside `region_box` (plan coordinates).
    pub fn new(plan: &BinaryImage, region_box: Rect, region: &BinaryImage, door_windows: &[Rect]) -> Self {
        let mut bounds = region_box;
        for w in door_windows {
            bounds = bounds.union(w);
        }
        let bounds = bounds.dilate(4);
        let blocked = BinaryImage::from_fn(bounds.width() as usize, bounds.height() as usize, |x, y| {
            let (gx, gy) = (bounds.x0 + x as i64, bounds.y0 + y as i64);
            if door_windows.iter().any(|w| w.contains(gx, gy)) {
                return false;
            }
            let inside = region_box.contains(gx, gy) && region.at(gx - region_box.x0, gy - region_box.y0);
            !inside || plan.at(gx, gy)
        });
        RoomSpace { origin: (bounds.x0, bounds.y0), blocked }
    }

    /// Obstacle raster over `bounds()`; foreground means not walkable.
    pub fn blocked(&self) -> &BinaryImage {
        &self.blocked
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(
            self.origin.0,
            self.origin.1,
            self.origin.0 + self.blocked.width() as i64 - 1,
            self.origin.1 + self.blocked.height() as i64 - 1,
        )
    }

    pub fn is_free(&self, p: &Point) -> bool {
        let (x, y) = (px(p.x) - self.origin.0, px(p.y) - self.origin.1);
        x >= 0 && y >= 0 && (x as usize) < self.blocked.width() && (y as usize) < self.blocked.height() && !self.blocked.get(x as usize, y as usize)
    }

    /// The segment sampled at 1 px steps touches no obstacle.
    pub fn segment_clear(&self, a: &Point, b: &Point) -> bool {
        let n = a.dist(b).ceil().max(1.0) as usize;
        (0..=n).all(|i| {
            let t = i as f64 / n as f64;
            self.is_free(&Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    pub vertices: Vec<Point>,
    /// Euclidean distance between mutually visible vertices, 0 otherwise.
    pub weights: Vec<Vec<f64>>,
}

impl VisibilityGraph {
    pub fn from_vertices(space: &RoomSpace, vertices: Vec<Point>) -> Self {
        let n = vertices.len();
        let mut weights = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                if space.segment_clear(&vertices[i], &vertices[j]) {
                    let d = vertices[i].dist(&vertices[j]);
                    weights[i][j] = d;
                    weights[j][i] = d;
                }
            }
        }
        VisibilityGraph { vertices, weights }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.vertices.iter().position(|v| v == p)
    }

    /// Appends a vertex and its visibility edges, returning its index.
    pub fn add_vertex(&mut self, space: &RoomSpace, p: Point) -> usize {
        let n = self.vertices.len();
        let row: Vec<f64> =
            self.vertices.iter().map(|v| if space.segment_clear(v, &p) { v.dist(&p) } else { 0.0 }).collect();
        for (i, r) in self.weights.iter_mut().enumerate() {
            r.push(row[i]);
        }
        let mut last = row;
        last.push(0.0);
        self.weights.push(last);
        self.vertices.push(p);
        n
    }

    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.windows(2).map(|w| self.vertices[w[0]].dist(&self.vertices[w[1]])).sum()
    }
}

const DIAGONALS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

fn free_around(space: &RoomSpace, p: &Point) -> usize {
    let (cx, cy) = (px(p.x), px(p.y));
    (-3..=3)
        .flat_map(|dy| (-3..=3).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| space.is_free(&Point::new((cx + dx) as f64, (cy + dy) as f64)))
        .count()
}

/// Pushes a corner pixel diagonally into the most open free quadrant.
fn push_corner(space: &RoomSpace, c: Point, d: f64) -> Option<Point> {
    let mut best: Option<(usize, Point)> = None;
    for (sx, sy) in DIAGONALS {
        let p = Point::new(c.x + sx * d, c.y + sy * d);
        if !space.is_free(&p) {
            continue;
        }
        let score = free_around(space, &p);
        if best.map_or(true, |(s, _)| score > s) {
            best = Some((score, p));
        }
    }
    best.map(|(_, p)| p)
}

/// Vertex list: door centroids, decor box corners pushed outward, then
/// pushed Harris corners of the obstacle raster; blocked and repeated points
/// are dropped.
pub fn build_visibility_graph(
    space: &RoomSpace,
    decors: &[DecorInstance],
    door_points: &[Point],
    params: &NavParams,
) -> VisibilityGraph {
    let d = params.corner_push;
    let mut vertices: Vec<Point> = Vec::new();
    let add = |p: Point, vs: &mut Vec<Point>| {
        if space.is_free(&p) && !vs.contains(&p) {
            vs.push(p);
        }
    };
    for &p in door_points {
        // door centroids are kept even if a stray pixel covers them
        if !vertices.contains(&p) {
            vertices.push(p);
        }
    }
    for dec in decors {
        let b = dec.bbox;
        for (x, y, sx, sy) in [(b.x0, b.y0, -1.0, -1.0), (b.x1, b.y0, 1.0, -1.0), (b.x1, b.y1, 1.0, 1.0), (b.x0, b.y1, -1.0, 1.0)] {
            add(Point::new(x as f64 + sx * d, y as f64 + sy * d), &mut vertices);
        }
    }
    let (ox, oy) = (space.origin.0 as f64, space.origin.1 as f64);
    for c in raster::harris_corners(&space.blocked, params.max_corners) {
        if let Some(p) = push_corner(space, Point::new(c.x as f64 + ox, c.y as f64 + oy), d) {
            add(p, &mut vertices);
        }
    }
    VisibilityGraph::from_vertices(space, vertices)
}

/// Dijkstra over the non-zero weights; among equally short paths the
/// lexicographically smallest vertex sequence wins.
pub fn route_room(g: &VisibilityGraph, from: usize, to: usize) -> Option<Vec<usize>> {
    let n = g.len();
    if from >= n || to >= n {
        return None;
    }
    const EPS: f64 = 1e-9;
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; n];
    let mut done = vec![false; n];
    best[from] = Some((0.0, vec![from]));
    loop {
        let mut pick: Option<usize> = None;
        for v in 0..n {
            if done[v] {
                continue;
            }
            if let Some((dv, pv)) = &best[v] {
                let better = match pick {
                    None => true,
                    Some(u) => {
                        let (du, pu) = best[u].as_ref().expect("picked vertex has a path");
                        *dv < du - EPS || ((dv - du).abs() <= EPS && pv < pu)
                    }
                };
                if better {
                    pick = Some(v);
                }
            }
        }
        let Some(u) = pick else { return None };
        if u == to {
            return best[u].take().map(|(_, p)| p);
        }
        done[u] = true;
        let (du, pu) = best[u].clone().expect("picked vertex has a path");
        for v in 0..n {
            let w = g.weights[u][v];
            if done[v] || w <= 0.0 {
                continue;
            }
            let cand = du + w;
            let replace = match &best[v] {
                None => true,
                Some((dv, pv)) => {
                    cand < dv - EPS || ((cand - dv).abs() <= EPS && {
                        let mut np = pu.clone();
                        np.push(v);
                        &np < pv
                    })
                }
            };
            if replace {
                let mut np = pu.clone();
                np.push(v);
                best[v] = Some((cand, np));
            }
        }
    }
}

/// How a route leaves its room.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    /// Through the given door into the next room.
    Door(usize),
    /// Out to the room centre and back through the entry door.
    Back,
    /// The walk ends at the room centre.
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub room: usize,
    pub entry_door: usize,
    pub exit: Exit,
    /// The room has a single door.
    pub dead_end: bool,
    /// The room was already visited earlier in the walk.
    pub revisit: bool,
    pub waypoints: Vec<Point>,
    /// For `Exit::Back`, index of the turn-around waypoint.
    pub turn_index: Option<usize>,
}

impl Route {
    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversalPlan {
    pub order: Vec<(usize, Option<usize>)>,
    pub routes: Vec<Route>,
}

impl TraversalPlan {
    pub fn visited_rooms(&self) -> BTreeSet<usize> {
        self.routes.iter().map(|r| r.room).collect()
    }

    /// Doors in the order they are first passed, starting with the entry.
    pub fn door_sequence(&self) -> Vec<usize> {
        let mut seq: Vec<usize> = Vec::new();
        for r in &self.routes {
            for d in [Some(r.entry_door), if let Exit::Door(x) = r.exit { Some(x) } else { None }].into_iter().flatten() {
                if !seq.contains(&d) {
                    seq.push(d);
                }
            }
        }
        seq
    }
}

/// A room's walkable space together with its visibility graph.
struct RoomNav<'a> {
    id: usize,
    space: &'a RoomSpace,
    graph: VisibilityGraph,
    door_vertex: BTreeMap<usize, usize>,
    centroid: Point,
}

impl RoomNav<'_> {
    fn path(&self, from: usize, to: usize) -> Result<Vec<Point>> {
        let p = route_room(&self.graph, from, to).ok_or(NavigationError::Unroutable { room: self.id, from, to })?;
        Ok(p.into_iter().map(|i| self.graph.vertices[i]).collect())
    }

    /// Free point nearest the centroid that the entry vertex can reach.
    fn centre_vertex(&mut self, from: usize) -> Result<usize> {
        let reach = reachable(&self.graph, from);
        let b = self.space.bounds();
        let (cx, cy) = (self.centroid.x, self.centroid.y);
        let mut cands: Vec<(f64, i64, i64)> = Vec::new();
        let r = 40;
        for y in (px(cy) - r)..=(px(cy) + r) {
            for x in (px(cx) - r)..=(px(cx) + r) {
                if b.contains(x, y) {
                    cands.push(((x as f64 - cx).hypot(y as f64 - cy), y, x));
                }
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut tries = 0;
        for (_, y, x) in cands {
            let p = Point::new(x as f64, y as f64);
            if !self.space.is_free(&p) {
                continue;
            }
            if let Some(i) = self.graph.index_of(&p) {
                if reach[i] {
                    return Ok(i);
                }
                continue;
            }
            if reach.iter().enumerate().any(|(i, &ok)| ok && self.space.segment_clear(&self.graph.vertices[i], &p)) {
                return Ok(self.graph.add_vertex(self.space, p));
            }
            tries += 1;
            if tries > 200 {
                break;
            }
        }
        // fall back to the reachable vertex nearest the centroid
        (0..self.graph.len())
            .filter(|&i| reach[i])
            .min_by(|&a, &b| self.graph.vertices[a].dist(&self.centroid).total_cmp(&self.graph.vertices[b].dist(&self.centroid)))
            .ok_or(NavigationError::Unroutable { room: self.id, from, to: from })
    }
}

fn reachable(g: &VisibilityGraph, from: usize) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for v in 0..g.len() {
            if !seen[v] && g.weights[u][v] > 0.0 {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Walks the DFS order from the model's entry door. Consecutive rooms that
/// share a door are joined directly; otherwise the walk turns back and
/// retraces DFS parents, re-entering each through the door it left by,
/// until it reaches a room adjacent to the next one.
pub fn navigate(model: &SemanticModel, spaces: &BTreeMap<usize, RoomSpace>, params: &NavParams) -> Result<TraversalPlan> {
    let entry_door = model.entry_door.ok_or(NavigationError::NoEntry)?;
    let structure = build_door_structure(&model.rooms, &model.doors)?;
    let entry_rooms = structure.rooms_of(entry_door);
    let &[entry_room] = &entry_rooms[..] else {
        return Err(NavigationError::InvalidInput(format!("entry door {entry_door} is not an outer door")));
    };
    let graph = structure.room_graph();
    let order = dfs_order(&graph, entry_room)?;
    let parent: BTreeMap<usize, Option<usize>> = order.iter().copied().collect();

    let mut navs: BTreeMap<usize, RoomNav> = BTreeMap::new();
    for room in &model.rooms {
        let space = spaces.get(&room.id).ok_or_else(|| NavigationError::InvalidInput(format!("no space for room {}", room.id)))?;
        let doors = structure.doors_of(room.id);
        let points: Vec<Point> = doors.iter().map(|&d| model.door(d).expect("door in structure").centroid).collect();
        let decors: Vec<DecorInstance> = room.decors.iter().map(|l| l.decor).collect();
        let graph = build_visibility_graph(space, &decors, &points, params);
        let door_vertex = doors.iter().map(|&d| (d, graph.index_of(&model.door(d).unwrap().centroid).unwrap())).collect();
        let centroid = polygon_centroid(&room.polygon())
            .map(|(x, y, _)| Point::new(x, y))
            .map_err(|e| NavigationError::InvalidInput(format!("room {}: {e}", room.id)))?;
        navs.insert(room.id, RoomNav { id: room.id, space, graph, door_vertex, centroid });
    }

    let mut routes = Vec::new();
    let mut entered_by: BTreeMap<usize, usize> = BTreeMap::new();
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut cur = entry_room;
    let mut door_in = entry_door;
    entered_by.insert(cur, door_in);
    for i in 0..order.len() {
        let next = order.get(i + 1).map(|&(r, _)| r);
        let dead_end = structure.doors_of(cur).len() == 1;
        let shared = next.and_then(|n| structure.shared_door(cur, n));
        let revisit = !visited.insert(cur);
        let nav = navs.get_mut(&cur).expect("room nav");
        let from = nav.door_vertex[&door_in];
        match (next, shared) {
            (Some(n), Some(d)) => {
                let waypoints = nav.path(from, nav.door_vertex[&d])?;
                routes.push(Route { room: cur, entry_door: door_in, exit: Exit::Door(d), dead_end, revisit, waypoints, turn_index: None });
                entered_by.insert(n, d);
                cur = n;
                door_in = d;
            }
            (None, _) => {
                let c = nav.centre_vertex(from)?;
                let out = nav.path(from, c)?;
                if dead_end {
                    let turn = out.len() - 1;
                    let mut waypoints = out.clone();
                    waypoints.extend(out.iter().rev().skip(1));
                    routes.push(Route { room: cur, entry_door: door_in, exit: Exit::Back, dead_end, revisit, waypoints, turn_index: Some(turn) });
                } else {
                    routes.push(Route { room: cur, entry_door: door_in, exit: Exit::End, dead_end, revisit, waypoints: out, turn_index: None });
                }
            }
            (Some(n), None) => {
                let c = nav.centre_vertex(from)?;
                let out = nav.path(from, c)?;
                let turn = out.len() - 1;
                let mut waypoints = out.clone();
                waypoints.extend(out.iter().rev().skip(1));
                routes.push(Route { room: cur, entry_door: door_in, exit: Exit::Back, dead_end, revisit, waypoints, turn_index: Some(turn) });
                // climb DFS parents until one is adjacent to `n`
                let mut back_door = door_in;
                let mut room = parent[&cur].ok_or_else(|| NavigationError::InvalidInput(format!("room {cur} has no way back")))?;
                loop {
                    let nav = navs.get_mut(&room).expect("room nav");
                    let from = nav.door_vertex[&back_door];
                    if let Some(d) = structure.shared_door(room, n) {
                        let waypoints = nav.path(from, nav.door_vertex[&d])?;
                        routes.push(Route { room, entry_door: back_door, exit: Exit::Door(d), dead_end: false, revisit: true, waypoints, turn_index: None });
                        entered_by.insert(n, d);
                        cur = n;
                        door_in = d;
                        break;
                    }
                    let up = entered_by[&room];
                    let waypoints = nav.path(from, nav.door_vertex[&up])?;
                    routes.push(Route { room, entry_door: back_door, exit: Exit::Door(up), dead_end: false, revisit: true, waypoints, turn_index: None });
                    back_door = up;
                    room = parent[&room].ok_or_else(|| NavigationError::InvalidInput(format!("no DFS ancestor of room {cur} reaches room {n}")))?;
                }
            }
        }
    }
    Ok(TraversalPlan { order, routes })
}

// 3x5 bitmaps for the overlay labels
const GLYPHS: [(char, [u8; 5]); 11] = [
    ('0', [0b111, 0b101, 0b101, 0b101, 0b111]),
    ('1', [0b010, 0b110, 0b010, 0b010, 0b111]),
    ('2', [0b111, 0b001, 0b111, 0b100, 0b111]),
    ('3', [0b111, 0b001, 0b111, 0b001, 0b111]),
    ('4', [0b101, 0b101, 0b111, 0b001, 0b001]),
    ('5', [0b111, 0b100, 0b111, 0b001, 0b111]),
    ('6', [0b111, 0b100, 0b111, 0b101, 0b111]),
    ('7', [0b111, 0b001, 0b010, 0b010, 0b010]),
    ('8', [0b111, 0b101, 0b111, 0b101, 0b111]),
    ('9', [0b111, 0b101, 0b111, 0b001, 0b111]),
    ('T', [0b111, 0b010, 0b010, 0b010, 0b010]),
];

fn draw_text(img: &mut RgbImage, text: &str, x: i64, y: i64, scale: i64, color: Rgb<u8>) {
    let mut cx = x;
    for ch in text.chars() {
        if let Some((_, rows)) = GLYPHS.iter().find(|(c, _)| *c == ch) {
            for (ry, row) in rows.iter().enumerate() {
                for rx in 0..3 {
                    if row & (0b100 >> rx) != 0 {
                        for sy in 0..scale {
                            for sx in 0..scale {
                                put(img, cx + rx * scale + sx, y + ry as i64 * scale + sy, color);
                            }
                        }
                    }
                }
            }
        }
        cx += 4 * scale;
    }
}

fn put(img: &mut RgbImage, x: i64, y: i64, color: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, color);
    }
}

fn draw_line(img: &mut RgbImage, a: &Point, b: &Point, color: Rgb<u8>) {
    let n = a.dist(b).ceil().max(1.0) as usize;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        put(img, px(a.x + t * (b.x - a.x)), px(a.y + t * (b.y - a.y)), color);
    }
}

/// Plan with routes drawn in red, turn points marked `T` and doors numbered
/// in the order they are passed.
pub fn render_overlay(plan: &BinaryImage, model: &SemanticModel, traversal: &TraversalPlan) -> RgbImage {
    let mut img = RgbImage::from_fn(plan.width() as u32, plan.height() as u32, |x, y| {
        if plan.get(x as usize, y as usize) {
            Rgb([0, 0, 0])
        } else {
            Rgb([255, 255, 255])
        }
    });
    let red = Rgb([220, 30, 30]);
    let blue = Rgb([30, 60, 220]);
    for r in &traversal.routes {
        for w in r.waypoints.windows(2) {
            draw_line(&mut img, &w[0], &w[1], red);
        }
        let last = r.waypoints.len().saturating_sub(1);
        for (i, p) in r.waypoints.iter().enumerate() {
            if i != 0 && i != last && Some(i) != r.turn_index {
                draw_text(&mut img, "T", px(p.x) + 2, px(p.y) - 12, 2, red);
            }
        }
    }
    for (k, d) in traversal.door_sequence().iter().enumerate() {
        if let Some(door) = model.door(*d) {
            draw_text(&mut img, &(k + 1).to_string(), px(door.centroid.x) - 3, px(door.centroid.y) - 5, 2, blue);
        }
    }
    img
}

pub fn save_overlay(img: &RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| NavigationError::Overlay { path: path.display().to_string(), message: e.to_string() })
}
