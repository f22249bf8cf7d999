//! Synthetic floor plans with exact ground truth.
//!
//! A 600x600 canvas is split by recursive axis-aligned cuts into rooms with
//! 4-px walls. Doors follow a random spanning tree of the wall adjacency
//! plus a few extra edges, and one outer door opens into the entry room.
//! Decor glyphs are stamped according to the room label.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decor::{dihedral_variants, glyph};
use crate::geometry::{bin_direction, polygon_centroid, BinScheme, Direction8, Point, Polygon};
use crate::lofd::{self, LofdVector};
use crate::model::{DecorClass, DecorInstance, Door, LocatedDecor, Room, RoomLabel, SemanticModel};
use crate::raster::{BinaryImage, Rect};
use crate::segmentation::{door_gap, door_glyph, DOOR_DEPTH, DOOR_SPAN};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Raster(#[from] crate::raster::RasterError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanSpec {
    pub seed: u64,
    pub room_count: usize,
    pub canvas: usize,
    pub margin: i64,
    pub wall: i64,
    /// Minimum interior side of a room.
    pub min_room_side: i64,
    /// Clearance kept around decors, from walls, doors and each other.
    pub clearance: i64,
    /// Chance that a shared wall outside the spanning tree also gets a door.
    pub extra_door_prob: f64,
}

impl PlanSpec {
    pub fn new(seed: u64, room_count: usize) -> Self {
        PlanSpec {
            seed,
            room_count,
            canvas: 600,
            margin: 40,
            wall: 4,
            min_room_side: 150,
            clearance: 10,
            extra_door_prob: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtRoom {
    pub id: usize,
    pub label: String,
    /// Interior pixels, inclusive `[x0, y0, x1, y1]`.
    pub interior: [i64; 4],
    pub polygon: Vec<[f64; 2]>,
    pub area_px: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtDoor {
    pub id: usize,
    /// Door window, inclusive.
    pub bbox: [i64; 4],
    /// Wall pixels cleared under the window.
    pub gap: [i64; 4],
    pub centroid: [f64; 2],
    pub rooms: Vec<usize>,
    pub entry: bool,
    pub variant: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtDecor {
    pub class: String,
    pub bbox: [i64; 4],
    pub room: usize,
    /// Index into the glyph's eight rotation/mirror variants.
    pub variant: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub wall_thickness: i64,
    pub walls: Vec<[i64; 4]>,
    pub rooms: Vec<GtRoom>,
    pub doors: Vec<GtDoor>,
    pub decors: Vec<GtDecor>,
}

pub fn rect_of(r: &[i64; 4]) -> Rect {
    Rect::new(r[0], r[1], r[2], r[3])
}

fn arr(r: &Rect) -> [i64; 4] {
    [r.x0, r.y0, r.x1, r.y1]
}

impl GroundTruth {
    /// Wall pixels, door gaps excluded.
    pub fn wall_mask(&self) -> BinaryImage {
        let mut img = BinaryImage::new(self.width, self.height);
        for w in &self.walls {
            img.fill_rect(&rect_of(w), true);
        }
        for d in &self.doors {
            img.fill_rect(&rect_of(&d.gap), false);
        }
        img
    }

    /// The plan raster this ground truth describes.
    pub fn render(&self) -> BinaryImage {
        let mut img = self.wall_mask();
        for d in &self.doors {
            img.stamp(&door_glyph(d.variant), d.bbox[0], d.bbox[1]);
        }
        for d in &self.decors {
            let class = DecorClass::from_slug(&d.class).expect("known decor class");
            let g = &dihedral_variants(&glyph(class))[d.variant as usize];
            img.stamp(g, d.bbox[0], d.bbox[1]);
        }
        img
    }

    pub fn room_label(&self, id: usize) -> Option<RoomLabel> {
        self.rooms.iter().find(|r| r.id == id).and_then(|r| RoomLabel::from_tag(&r.label))
    }

    pub fn room_decors(&self, id: usize) -> Vec<DecorInstance> {
        self.decors
            .iter()
            .filter(|d| d.room == id)
            .map(|d| DecorInstance::new(DecorClass::from_slug(&d.class).unwrap(), rect_of(&d.bbox)))
            .collect()
    }

    pub fn room_polygon(&self, id: usize) -> Option<Polygon> {
        self.rooms
            .iter()
            .find(|r| r.id == id)
            .map(|r| Polygon::new(r.polygon.iter().map(|p| Point::new(p[0], p[1])).collect()))
    }

    pub fn entry_door(&self) -> Option<&GtDoor> {
        self.doors.iter().find(|d| d.entry)
    }

    /// Room pairs joined by at least one door, `(lo, hi)`.
    pub fn adjacency(&self) -> BTreeSet<(usize, usize)> {
        self.doors
            .iter()
            .filter_map(|d| match d.rooms[..] {
                [a, b] => Some((a.min(b), a.max(b))),
                _ => None,
            })
            .collect()
    }

    /// The semantic model this plan should parse into, with room areas in
    /// px / `sqft_divisor` and directions binned by `bins`.
    pub fn semantic_model(&self, sqft_divisor: f64, bins: &BinScheme) -> SemanticModel {
        let dir = |from: &Point, to: &Point| bin_direction(from, to, bins).unwrap_or(Direction8::N);
        let centre = |poly: &Polygon| {
            let (x, y, _) = polygon_centroid(poly).expect("rooms have area");
            Point::new(x, y)
        };
        let all: Vec<Point> = self.rooms.iter().flat_map(|r| r.polygon.iter().map(|p| Point::new(p[0], p[1]))).collect();
        let (lo, hi) = Polygon::new(all).bounds();
        let plan_centre = Point::new((lo.x + hi.x) / 2.0, (lo.y + hi.y) / 2.0);
        let adjacency = self.adjacency();
        let rooms = self
            .rooms
            .iter()
            .map(|r| {
                let poly = self.room_polygon(r.id).expect("room exists");
                let c = centre(&poly);
                Room {
                    id: r.id,
                    label: RoomLabel::from_tag(&r.label).expect("known label"),
                    polygon: poly.vertices.clone(),
                    area_sqft: ((r.area_px as f64 / sqft_divisor) * 100.0).round() / 100.0,
                    neighbors: adjacency
                        .iter()
                        .filter_map(|&(a, b)| if a == r.id { Some(b) } else if b == r.id { Some(a) } else { None })
                        .collect(),
                    decors: self
                        .room_decors(r.id)
                        .into_iter()
                        .map(|d| LocatedDecor { decor: d, dir: dir(&c, &d.center()) })
                        .collect(),
                    global_dir: dir(&plan_centre, &c),
                }
            })
            .collect();
        let doors = self
            .doors
            .iter()
            .map(|d| Door { id: d.id, bbox: rect_of(&d.bbox), centroid: Point::new(d.centroid[0], d.centroid[1]), rooms: d.rooms.clone() })
            .collect();
        SemanticModel { rooms, doors, entry_door: self.entry_door().map(|d| d.id) }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ground truth serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<GroundTruth, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Region between wall lines: walls start at `x0`/`y0` and at `x1`/`y1`.
#[derive(Debug, Clone, Copy)]
struct Region {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

impl Region {
    fn interior(&self, wall: i64) -> Rect {
        Rect::new(self.x0 + wall, self.y0 + wall, self.x1 - 1, self.y1 - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

struct Layout {
    regions: Vec<Region>,
    walls: Vec<Rect>,
}

fn partition(spec: &PlanSpec, rng: &mut ChaCha8Rng) -> Option<Layout> {
    let (m, w) = (spec.margin, spec.wall);
    let far = spec.canvas as i64 - m - w;
    let mut regions = vec![Region { x0: m, y0: m, x1: far, y1: far }];
    let mut walls = vec![
        Rect::new(m, m, far + w - 1, m + w - 1),
        Rect::new(m, far, far + w - 1, far + w - 1),
        Rect::new(m, m, m + w - 1, far + w - 1),
        Rect::new(far, m, far + w - 1, far + w - 1),
    ];
    let min = spec.min_room_side;
    while regions.len() < spec.room_count {
        // candidates: regions with room for a cut, largest first
        let mut order: Vec<usize> = (0..regions.len()).collect();
        order.sort_by_key(|&i| {
            let r = regions[i];
            std::cmp::Reverse((r.x1 - r.x0) * (r.y1 - r.y0))
        });
        let mut done = false;
        for i in order {
            let r = regions[i];
            let (wd, ht) = (r.x1 - r.x0, r.y1 - r.y0);
            let mut axes = vec![wd >= ht, wd < ht];
            if wd == ht && rng.gen_bool(0.5) {
                axes.reverse();
            }
            for vertical in axes {
                let (a, b) = if vertical { (r.x0, r.x1) } else { (r.y0, r.y1) };
                let lo = a + w + min;
                let hi = b - w - min;
                if lo > hi {
                    continue;
                }
                let mid = (a + b) / 2;
                let spread = ((b - a) as f64 * 0.15) as i64;
                let p = rng.gen_range((mid - spread).max(lo)..=(mid + spread).min(hi).max((mid - spread).max(lo)));
                if vertical {
                    walls.push(Rect::new(p, r.y0, p + w - 1, r.y1 + w - 1));
                    regions[i] = Region { x1: p, ..r };
                    regions.push(Region { x0: p, ..r });
                } else {
                    walls.push(Rect::new(r.x0, p, r.x1 + w - 1, p + w - 1));
                    regions[i] = Region { y1: p, ..r };
                    regions.push(Region { y0: p, ..r });
                }
                done = true;
                break;
            }
            if done {
                break;
            }
        }
        if !done {
            return None;
        }
    }
    Some(Layout { regions, walls })
}

/// A wall segment shared by two regions, or by a region and the outside.
#[derive(Debug, Clone, Copy)]
struct Opening {
    vertical: bool,
    /// Position of the wall line.
    line: i64,
    /// Usable span along the wall (interior pixels on both sides).
    lo: i64,
    hi: i64,
}

fn shared_wall(a: &Region, b: &Region, wall: i64) -> Option<Opening> {
    let (ia, ib) = (a.interior(wall), b.interior(wall));
    if a.x1 == b.x0 || b.x1 == a.x0 {
        let line = if a.x1 == b.x0 { a.x1 } else { b.x1 };
        let (lo, hi) = (ia.y0.max(ib.y0), ia.y1.min(ib.y1));
        return (lo <= hi).then_some(Opening { vertical: true, line, lo, hi });
    }
    if a.y1 == b.y0 || b.y1 == a.y0 {
        let line = if a.y1 == b.y0 { a.y1 } else { b.y1 };
        let (lo, hi) = (ia.x0.max(ib.x0), ia.x1.min(ib.x1));
        return (lo <= hi).then_some(Opening { vertical: false, line, lo, hi });
    }
    None
}

fn outer_sides(r: &Region, spec: &PlanSpec) -> Vec<(Side, Opening)> {
    let far = spec.canvas as i64 - spec.margin - spec.wall;
    let i = r.interior(spec.wall);
    let mut out = Vec::new();
    if r.x0 == spec.margin {
        out.push((Side::Left, Opening { vertical: true, line: r.x0, lo: i.y0, hi: i.y1 }));
    }
    if r.x1 == far {
        out.push((Side::Right, Opening { vertical: true, line: r.x1, lo: i.y0, hi: i.y1 }));
    }
    if r.y0 == spec.margin {
        out.push((Side::Top, Opening { vertical: false, line: r.y0, lo: i.x0, hi: i.x1 }));
    }
    if r.y1 == far {
        out.push((Side::Bottom, Opening { vertical: false, line: r.y1, lo: i.x0, hi: i.x1 }));
    }
    out
}

/// Door window on `op` swinging into the region on the `positive` side.
fn place_door(
    op: &Opening,
    positive: bool,
    spec: &PlanSpec,
    taken: &[Rect],
    rng: &mut ChaCha8Rng,
) -> Option<(Rect, u8)> {
    let span = DOOR_SPAN as i64;
    let depth = DOOR_DEPTH as i64;
    let corner = 12;
    let (lo, hi) = (op.lo + corner, op.hi - corner - span + 1);
    if lo > hi {
        return None;
    }
    for _ in 0..50 {
        let s = rng.gen_range(lo..=hi);
        let hinge_high = rng.gen_bool(0.5);
        let across0 = if positive { op.line } else { op.line + spec.wall - depth };
        let window = if op.vertical {
            Rect::new(across0, s, across0 + depth - 1, s + span - 1)
        } else {
            Rect::new(s, across0, s + span - 1, across0 + depth - 1)
        };
        if taken.iter().any(|t| t.dilate(spec.clearance).intersects(&window)) {
            continue;
        }
        let variant = op.vertical as u8 | (positive as u8) << 1 | (hinge_high as u8) << 2;
        return Some((window, variant));
    }
    None
}

/// Mandatory classes (alternatives grouped) and optional ones with their
/// inclusion chance and count range.
fn decor_policy(label: RoomLabel, rng: &mut ChaCha8Rng) -> (Vec<DecorClass>, Vec<DecorClass>) {
    use DecorClass::*;
    let mut optional = Vec::new();
    let mut maybe = |rng: &mut ChaCha8Rng, class: DecorClass, p: f64, max: usize| {
        if rng.gen_bool(p) {
            let n = rng.gen_range(1..=max);
            optional.extend(std::iter::repeat(class).take(n));
        }
    };
    let mandatory = match label {
        RoomLabel::Bedroom => {
            maybe(rng, Wardrobe, 0.5, 1);
            maybe(rng, Table, 0.4, 1);
            maybe(rng, Chair, 0.5, 1);
            vec![Bed]
        }
        RoomLabel::Bathroom => {
            let sink = if rng.gen_bool(0.5) { Sink } else { TwinSink };
            vec![Tub, Toilet, sink]
        }
        RoomLabel::Entry => {
            maybe(rng, Wardrobe, 0.5, 1);
            let chairs = rng.gen_range(1..=2);
            vec![Chair; chairs]
        }
        RoomLabel::Kitchen => {
            maybe(rng, Table, 0.5, 1);
            maybe(rng, Chair, 0.5, 2);
            vec![Stove, LargeSink]
        }
        RoomLabel::Hall => {
            maybe(rng, Table, 0.6, 1);
            maybe(rng, Chair, 0.5, 2);
            vec![if rng.gen_bool(0.5) { Sofa } else { LargeSofa }]
        }
    };
    (mandatory, optional)
}

fn place_decor(
    class: DecorClass,
    interior: &Rect,
    spec: &PlanSpec,
    blocked: &[Rect],
    rng: &mut ChaCha8Rng,
) -> Option<(Rect, u8)> {
    let variants = dihedral_variants(&glyph(class));
    let c = spec.clearance;
    for _ in 0..200 {
        let v = rng.gen_range(0..8u8);
        let g = &variants[v as usize];
        let (gw, gh) = (g.width() as i64, g.height() as i64);
        let (xlo, xhi) = (interior.x0 + c, interior.x1 - c - gw + 1);
        let (ylo, yhi) = (interior.y0 + c, interior.y1 - c - gh + 1);
        if xlo > xhi || ylo > yhi {
            continue;
        }
        let x = rng.gen_range(xlo..=xhi);
        let y = rng.gen_range(ylo..=yhi);
        let bbox = Rect::new(x, y, x + gw - 1, y + gh - 1);
        if blocked.iter().any(|b| b.dilate(c).intersects(&bbox)) {
            continue;
        }
        return Some((bbox, v));
    }
    None
}

fn try_generate(spec: &PlanSpec, rng: &mut ChaCha8Rng) -> Option<GroundTruth> {
    let layout = partition(spec, rng)?;
    let w = spec.wall;
    let n = layout.regions.len();

    // ids in raster order of the interiors' top-left pixels
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| {
        let r = layout.regions[i].interior(w);
        (r.y0, r.x0)
    });
    let regions: Vec<Region> = order.iter().map(|&i| layout.regions[i]).collect();

    let mut edges: Vec<(usize, usize, Opening)> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if let Some(op) = shared_wall(&regions[a], &regions[b], w) {
                if op.hi - op.lo + 1 >= DOOR_SPAN as i64 + 24 {
                    edges.push((a, b, op));
                }
            }
        }
    }
    edges.shuffle(rng);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut chosen = Vec::new();
    for &(a, b, op) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            chosen.push((a, b, op));
        } else if rng.gen_bool(spec.extra_door_prob) {
            chosen.push((a, b, op));
        }
    }
    let root = find(&mut parent, 0);
    if (0..n).any(|i| find(&mut parent, i) != root) {
        return None;
    }

    let mut windows: Vec<Rect> = Vec::new();
    let mut doors: Vec<(Rect, u8, Vec<usize>, bool)> = Vec::new();
    for (a, b, op) in chosen {
        // the positive side is the region with the larger coordinate
        let swing_positive = rng.gen_bool(0.5);
        let (window, variant) = place_door(&op, swing_positive, spec, &windows, rng)?;
        windows.push(window);
        doors.push((window, variant, vec![a + 1, b + 1], false));
    }

    let with_outer: Vec<usize> = (0..n).filter(|&i| !outer_sides(&regions[i], spec).is_empty()).collect();
    let entry_room = *with_outer.choose(rng)?;
    let sides = outer_sides(&regions[entry_room], spec);
    let (side, op) = *sides.choose(rng)?;
    let positive = matches!(side, Side::Left | Side::Top);
    let (window, variant) = place_door(&op, positive, spec, &windows, rng)?;
    windows.push(window);
    doors.push((window, variant, vec![entry_room + 1], true));

    // labels: entry first, the others drawn without replacement
    let mut others = vec![RoomLabel::Bedroom, RoomLabel::Bathroom, RoomLabel::Kitchen, RoomLabel::Hall];
    others.shuffle(rng);
    let mut labels = vec![RoomLabel::Entry; n];
    let mut next = others.into_iter().cycle();
    for (i, l) in labels.iter_mut().enumerate() {
        if i != entry_room {
            *l = next.next().unwrap();
        }
    }

    let mut decors: Vec<GtDecor> = Vec::new();
    for i in 0..n {
        let interior = regions[i].interior(w);
        let mut blocked: Vec<Rect> = windows.clone();
        let (mandatory, optional) = decor_policy(labels[i], rng);
        let mut placed: Vec<(Rect, u8, DecorClass)> = Vec::new();
        for class in mandatory {
            let (bbox, v) = place_decor(class, &interior, spec, &blocked, rng)?;
            blocked.push(bbox);
            placed.push((bbox, v, class));
        }
        for class in optional {
            if let Some((bbox, v)) = place_decor(class, &interior, spec, &blocked, rng) {
                blocked.push(bbox);
                placed.push((bbox, v, class));
            }
        }
        placed.sort_by_key(|(b, _, _)| (b.y0, b.x0, b.y1, b.x1));
        decors.extend(placed.into_iter().map(|(b, v, c)| GtDecor {
            class: c.slug().to_string(),
            bbox: arr(&b),
            room: i + 1,
            variant: v,
        }));
    }

    doors.sort_by_key(|(r, _, _, _)| (r.y0, r.x0, r.y1, r.x1));
    let gt_doors = doors
        .into_iter()
        .enumerate()
        .map(|(k, (window, variant, mut rooms, entry))| {
            rooms.sort_unstable();
            let (cx, cy) = window.center();
            GtDoor {
                id: k + 1,
                bbox: arr(&window),
                gap: arr(&door_gap(&window, variant)),
                centroid: [cx, cy],
                rooms,
                entry,
                variant,
            }
        })
        .collect();

    let rooms = regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let it = r.interior(w);
            let (x0, y0, x1, y1) = (it.x0 as f64, it.y0 as f64, it.x1 as f64, it.y1 as f64);
            GtRoom {
                id: i + 1,
                label: labels[i].tag().to_string(),
                interior: arr(&it),
                polygon: vec![[x0, y0], [x0, y1], [x1, y1], [x1, y0]],
                area_px: it.area() as usize,
            }
        })
        .collect();

    Some(GroundTruth {
        seed: spec.seed,
        width: spec.canvas,
        height: spec.canvas,
        wall_thickness: w,
        walls: layout.walls.iter().map(arr).collect(),
        rooms,
        doors: gt_doors,
        decors,
    })
}

/// Generates one plan. Infeasible draws are retried from the same stream a
/// bounded number of times.
pub fn generate(spec: &PlanSpec) -> Result<(BinaryImage, GroundTruth), SynthError> {
    if !(3..=5).contains(&spec.room_count) {
        return Err(SynthError::InvalidSpec(format!("room_count must be 3, 4 or 5, got {}", spec.room_count)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..50 {
        if let Some(gt) = try_generate(spec, &mut rng) {
            return Ok((gt.render(), gt));
        }
    }
    Err(SynthError::GenerationFailed(format!(
        "no feasible layout for seed {} with {} rooms",
        spec.seed, spec.room_count
    )))
}

/// Seed of the `index`-th plan of a corpus.
pub fn plan_seed(corpus_seed: u64, index: usize) -> u64 {
    corpus_seed.wrapping_mul(1_000_003).wrapping_add(index as u64 + 1)
}

/// Room count of the `index`-th plan of a corpus: 5, 4, 3, 5, ...
pub fn plan_room_count(index: usize) -> usize {
    5 - index % 3
}

/// LOFD rows for every room of a plan, from its ground-truth decors.
pub fn ground_truth_features(gt: &GroundTruth, mean_distance: bool) -> Vec<(LofdVector, RoomLabel)> {
    gt.rooms
        .iter()
        .map(|r| {
            let poly = gt.room_polygon(r.id).unwrap();
            let (cx, cy, _) = polygon_centroid(&poly).expect("rooms have area");
            let v = lofd::compute_lofd(&Point::new(cx, cy), &gt.room_decors(r.id), mean_distance);
            (v, RoomLabel::from_tag(&r.label).unwrap())
        })
        .collect()
}

/// Writes `n` plans plus `features.csv` and a 70/30 `split.txt` under `out`.
pub fn generate_corpus(n: usize, seed: u64, out: &Path) -> Result<Vec<GroundTruth>, SynthError> {
    if n == 0 {
        return Err(SynthError::InvalidSpec("corpus size must be at least 1".into()));
    }
    let plans_dir = out.join("plans");
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| SynthError::Io { path, source }
    };
    fs::create_dir_all(&plans_dir).map_err(io(&plans_dir))?;
    let results: Vec<Result<GroundTruth, SynthError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let spec = PlanSpec::new(plan_seed(seed, i), plan_room_count(i));
            let (img, gt) = generate(&spec)?;
            let png = plans_dir.join(format!("{:04}.png", i + 1));
            img.save_png(&png)?;
            let json = plans_dir.join(format!("{:04}.json", i + 1));
            fs::write(&json, gt.to_json()).map_err(io(&json))?;
            Ok(gt)
        })
        .collect();
    let gts: Vec<GroundTruth> = results.into_iter().collect::<Result<_, _>>()?;

    let rows: Vec<(LofdVector, RoomLabel)> = gts.iter().flat_map(|gt| ground_truth_features(gt, false)).collect();
    let csv = out.join("features.csv");
    fs::write(&csv, lofd::write_feature_csv(&rows)).map_err(io(&csv))?;
    let split = out.join("split.txt");
    fs::write(&split, write_split(&split_rows(rows.len(), seed))).map_err(io(&split))?;
    Ok(gts)
}

/// Seeded 70/30 split: `true` marks a training row.
pub fn split_rows(rows: usize, seed: u64) -> Vec<bool> {
    let mut idx: Vec<usize> = (0..rows).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_5EED));
    let n_train = (0.7 * rows as f64).round() as usize;
    let mut train = vec![false; rows];
    for &i in &idx[..n_train] {
        train[i] = true;
    }
    train
}

pub fn write_split(train: &[bool]) -> String {
    train.iter().enumerate().map(|(i, &t)| format!("{}\t{}\n", i, if t { "train" } else { "test" })).collect()
}

pub fn read_split(text: &str) -> Result<Vec<bool>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let mut parts = line.split('\t');
        let row: usize = parts
            .next()
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| format!("split line {}: bad row index", n + 1))?;
        if row != out.len() {
            return Err(format!("split line {}: expected row {}, found {}", n + 1, out.len(), row));
        }
        match parts.next().map(str::trim) {
            Some("train") => out.push(true),
            Some("test") => out.push(false),
            _ => return Err(format!("split line {}: expected train or test", n + 1)),
        }
    }
    Ok(out)
}
