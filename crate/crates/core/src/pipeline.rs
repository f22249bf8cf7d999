//! Plan raster in, semantic model, routes and description out.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::Config;
use crate::decor::{classify_decors, SignatureLibrary};
use crate::geometry::{bin_direction, polygon_centroid, trace_boundary, BinScheme, Direction8, GeometryError, Point, Polygon};
use crate::grammar::{self, Description, GrammarError};
use crate::lofd::{compute_lofd, RoomClassifier};
use crate::model::{DecorInstance, Door, LocatedDecor, Room, SemanticModel};
use crate::navigation::{self, NavigationError, RoomSpace, TraversalPlan};
use crate::raster::{BinaryImage, Rect};
use crate::segmentation::{
    build_adjacency, detect_doors_in, extract_rooms, extract_walls, partition_rooms, room_area_sqft, DoorTemplate, RoomRegion,
    SegmentationError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("segmentation: {0}")]
    Segmentation(#[from] SegmentationError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("navigation: {0}")]
    Navigation(#[from] NavigationError),
    #[error("grammar: {0}")]
    Grammar(#[from] GrammarError),
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub model: SemanticModel,
    pub boundary: Polygon,
    pub regions: Vec<RoomRegion>,
    pub spaces: BTreeMap<usize, RoomSpace>,
    pub traversal: TraversalPlan,
    pub description: Description,
}

/// Direction of `target` seen from `origin`; North when the two coincide.
fn direction_or_north(origin: &Point, target: &Point, bins: &BinScheme) -> Direction8 {
    if origin.dist(target) < 1e-6 {
        return Direction8::N;
    }
    bin_direction(origin, target, bins).unwrap_or(Direction8::N)
}

fn centroid(p: &Polygon) -> Result<Point, GeometryError> {
    polygon_centroid(p).map(|(x, y, _)| Point::new(x, y))
}

/// Walls, doors and rooms of a plan together with the doors each room has.
pub struct Layout {
    pub walls: BinaryImage,
    pub regions: Vec<RoomRegion>,
    pub doors: Vec<Door>,
    /// Whether each door (same order) reaches the outside.
    pub outer: Vec<bool>,
}

pub fn segment(plan: &BinaryImage, cfg: &Config) -> Result<Layout, PipelineError> {
    let p = &cfg.segmentation;
    let walls = extract_walls(plan, p.se_radius, p.wall_min_thickness);
    let candidates = detect_doors_in(&plan.difference(&walls), &DoorTemplate::default(), p.score_min);
    let rects: Vec<Rect> = candidates.iter().map(|c| c.bbox).collect();
    let seg = extract_rooms(&walls, &rects, p)?;
    let adj = build_adjacency(&seg.rooms, &rects, &seg.exterior)?;
    // detections that touch no room are dropped and the rest renumbered
    let mut doors = Vec::new();
    let mut outer = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        if adj.door_rooms[i].is_empty() {
            continue;
        }
        doors.push(Door { id: doors.len() + 1, bbox: c.bbox, centroid: c.centroid, rooms: adj.door_rooms[i].clone() });
        outer.push(adj.outer[i]);
    }
    Ok(Layout { walls, regions: seg.rooms, doors, outer })
}

/// Runs the whole chain on a binarized plan.
pub fn analyze(
    plan: &BinaryImage,
    classifier: &RoomClassifier,
    library: &SignatureLibrary,
    cfg: &Config,
) -> Result<Analysis, PipelineError> {
    let layout = segment(plan, cfg)?;
    let bins = cfg.bins();

    let mut symbol_mask = layout.walls.clone();
    for d in &layout.doors {
        symbol_mask.fill_rect(&d.bbox, true);
    }
    let crops = partition_rooms(plan, &layout.regions);

    let mut rooms = Vec::new();
    for (region, (bbox, crop)) in layout.regions.iter().zip(&crops) {
        let found = classify_decors(crop, &symbol_mask.crop(bbox), library, cfg.min_blob_area, cfg.merge_gap);
        let decors: Vec<DecorInstance> = found
            .into_iter()
            .map(|d| DecorInstance::new(d.class, Rect::new(d.bbox.x0 + bbox.x0, d.bbox.y0 + bbox.y0, d.bbox.x1 + bbox.x0, d.bbox.y1 + bbox.y0)))
            .collect();
        let c = centroid(&region.polygon)?;
        let feature = compute_lofd(&c, &decors, cfg.lofd_mean_distance);
        let label = classifier.predict_one(&feature.to_array());
        let located = decors.iter().map(|d| LocatedDecor { decor: *d, dir: direction_or_north(&c, &d.center(), &bins) }).collect();
        let neighbors = layout
            .doors
            .iter()
            .filter(|d| d.rooms.len() == 2 && d.rooms.contains(&region.id))
            .flat_map(|d| d.rooms.iter().copied().filter(|&r| r != region.id))
            .collect();
        rooms.push(Room {
            id: region.id,
            label,
            polygon: region.polygon.vertices.clone(),
            area_sqft: room_area_sqft(region.pixel_area, cfg.segmentation.sqft_divisor),
            neighbors,
            decors: located,
            global_dir: Direction8::N,
        });
    }

    let corners: Vec<Point> = rooms.iter().flat_map(|r| r.polygon.iter().copied()).collect();
    let boundary = trace_boundary(&corners, cfg.boundary_shrink)?;
    let plan_centre = centroid(&boundary)?;
    for r in &mut rooms {
        r.global_dir = direction_or_north(&plan_centre, &centroid(&r.polygon())?, &bins);
    }

    let entry = match navigation::find_entry(&rooms, &layout.doors, &boundary) {
        Ok((_, d)) => d,
        Err(NavigationError::NoEntry) => layout
            .doors
            .iter()
            .zip(&layout.outer)
            .find(|(_, &o)| o)
            .map(|(d, _)| d.id)
            .ok_or(NavigationError::NoEntry)?,
        Err(e) => return Err(e.into()),
    };
    let model = SemanticModel { rooms, doors: layout.doors, entry_door: Some(entry) };

    let mut spaces = BTreeMap::new();
    for region in &layout.regions {
        let windows: Vec<Rect> = model.doors.iter().filter(|d| d.rooms.contains(&region.id)).map(|d| d.bbox).collect();
        spaces.insert(region.id, RoomSpace::new(plan, region.bbox, &region.mask, &windows));
    }
    let traversal = navigation::navigate(&model, &spaces, &cfg.navigation)?;
    let description = Description {
        gd: grammar::synthesize_gd(&model)?,
        nv: grammar::synthesize_nv(&traversal, cfg.step_px, &bins),
    };
    Ok(Analysis { model, boundary, regions: layout.regions, spaces, traversal, description })
}
