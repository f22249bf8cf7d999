//! Walls, doors, rooms and their adjacency.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::decor::dihedral_variants;
use crate::geometry::{segments_intersect, Point, Polygon};
use crate::raster::{self, BinaryImage, Connectivity, MorphOp, Rect, StructuringElement};

#[derive(Debug, Error, PartialEq)]
pub enum SegmentationError {
    #[error("segmentation failed: {0}")]
    Failed(String),
    #[error("door {door} touches {count} rooms")]
    AmbiguousDoor { door: usize, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationParams {
    pub se_radius: usize,
    pub wall_min_thickness: usize,
    pub score_min: f64,
    pub min_room_area: usize,
    pub dp_epsilon: f64,
    pub sqft_divisor: f64,
    /// How far beyond a door window to look for the wall ends it bridges.
    pub gap_slack: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            se_radius: 3,
            wall_min_thickness: 4,
            score_min: 0.6,
            min_room_area: 400,
            dp_epsilon: 2.0,
            sqft_divisor: 100.0,
            gap_slack: 3,
        }
    }
}

/// Door window size along the wall.
pub const DOOR_SPAN: usize = 24;
/// Door window size across the wall: the wall gap plus the swing.
pub const DOOR_DEPTH: usize = 28;
/// Rows of the window that cover the wall gap.
pub const DOOR_GAP: usize = 4;

/// Door window bitmap.
///
/// `variant` bit 0 puts the wall vertical, bit 1 swings the leaf towards +y
/// (or +x), bit 2 moves the hinge to the high end of the gap. Variant 2 is
/// the upright template: gap on top, leaf swinging down, hinge on the left.
pub fn door_glyph(variant: u8) -> BinaryImage {
    let vertical = variant & 1 != 0;
    let positive = variant & 2 != 0;
    let hinge_high = variant & 4 != 0;
    let (span, depth) = (DOOR_SPAN as i64, DOOR_DEPTH as i64);
    let gap = DOOR_GAP as i64;
    // local frame: u along the wall from the hinge, v away from the wall
    let ink = |u: i64, v: i64| {
        if v < gap {
            return false;
        }
        if u == 0 {
            return true;
        }
        let du = u as f64 + 0.5;
        let dv = (v - gap) as f64 + 0.5;
        let d = (du * du + dv * dv).sqrt();
        (span as f64 - 2.5..span as f64 - 0.5).contains(&d)
    };
    let (w, h) = if vertical { (depth, span) } else { (span, depth) };
    BinaryImage::from_fn(w as usize, h as usize, |x, y| {
        let (along, across) = if vertical { (y as i64, x as i64) } else { (x as i64, y as i64) };
        let u = if hinge_high { span - 1 - along } else { along };
        let v = if positive { across } else { depth - 1 - across };
        ink(u, v)
    })
}

/// The wall gap covered by a door window of the given variant placed at
/// `window`.
pub fn door_gap(window: &Rect, variant: u8) -> Rect {
    let gap = DOOR_GAP as i64;
    match (variant & 1 != 0, variant & 2 != 0) {
        (false, true) => Rect::new(window.x0, window.y0, window.x1, window.y0 + gap - 1),
        (false, false) => Rect::new(window.x0, window.y1 - gap + 1, window.x1, window.y1),
        (true, true) => Rect::new(window.x0, window.y0, window.x0 + gap - 1, window.y1),
        (true, false) => Rect::new(window.x1 - gap + 1, window.y0, window.x1, window.y1),
    }
}

#[derive(Debug, Clone)]
pub struct DoorTemplate {
    pub glyph: BinaryImage,
    pub scales: Vec<f64>,
}

impl Default for DoorTemplate {
    fn default() -> Self {
        DoorTemplate { glyph: door_glyph(2), scales: vec![0.75, 1.0, 1.25, 1.5] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoorCandidate {
    pub bbox: Rect,
    pub centroid: Point,
    pub score: f64,
}

/// Closing followed by removal of strokes thinner than `min_thickness`.
/// Only pixels that were ink in the plan are kept.
pub fn extract_walls(plan: &BinaryImage, se_radius: usize, min_thickness: usize) -> BinaryImage {
    let closed = if se_radius == 0 {
        plan.clone()
    } else {
        raster::morph(plan, &StructuringElement::square(se_radius), MorphOp::Close)
    };
    raster::open_box(&closed, min_thickness).intersection(plan)
}

struct Template {
    w: usize,
    h: usize,
    ink: Vec<(usize, usize)>,
    /// Grid cells `(x0, y0, x1, y1)` (exclusive ends) with their ink counts.
    cells: Vec<(usize, usize, usize, usize, u32)>,
}

const GRID: usize = 4;

/// Normalised cross-correlation of 0/1 vectors of length `n_px` with `n`
/// and `m` ones and `k` common ones.
fn ncc(n_px: f64, n: f64, m: f64, k: f64) -> f64 {
    let den = (n * (n_px - n) * m * (n_px - m)).sqrt();
    if den == 0.0 {
        return 0.0;
    }
    (n_px * k - n * m) / den
}

/// Multi-scale, multi-orientation template correlation against the plan's
/// symbol layer (ink that is not wall, under the default wall parameters).
/// Detections are returned in raster order of their windows.
pub fn detect_doors(plan: &BinaryImage, template: &DoorTemplate, score_min: f64) -> Vec<DoorCandidate> {
    let p = SegmentationParams::default();
    let walls = extract_walls(plan, p.se_radius, p.wall_min_thickness);
    detect_doors_in(&plan.difference(&walls), template, score_min)
}

/// [`detect_doors`] on an already separated symbol layer.
pub fn detect_doors_in(symbols: &BinaryImage, template: &DoorTemplate, score_min: f64) -> Vec<DoorCandidate> {
    let plan = symbols;
    let mut variants: Vec<BinaryImage> = Vec::new();
    for &s in &template.scales {
        let scaled = if s == 1.0 { template.glyph.clone() } else { template.glyph.scaled(s) };
        for v in dihedral_variants(&scaled) {
            if !v.is_blank() && !variants.contains(&v) {
                variants.push(v);
            }
        }
    }
    let templates: Vec<Template> = variants
        .iter()
        .map(|v| {
            // a strided pixel order finds misses early
            let raster: Vec<(usize, usize)> = v.foreground().collect();
            let stride = 7;
            let ink = (0..stride).flat_map(|k| raster.iter().skip(k).step_by(stride).cloned()).collect();
            let (w, h) = (v.width(), v.height());
            let mut cells = Vec::new();
            for gy in 0..GRID {
                for gx in 0..GRID {
                    let (x0, x1) = (gx * w / GRID, (gx + 1) * w / GRID);
                    let (y0, y1) = (gy * h / GRID, (gy + 1) * h / GRID);
                    let m = raster.iter().filter(|&&(x, y)| (x0..x1).contains(&x) && (y0..y1).contains(&y)).count();
                    if x1 > x0 && y1 > y0 {
                        cells.push((x0, y0, x1, y1, m as u32));
                    }
                }
            }
            Template { w, h, ink, cells }
        })
        .collect();

    let (w, h) = (plan.width(), plan.height());
    let mut integral = vec![0u32; (w + 1) * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            integral[(y + 1) * (w + 1) + x + 1] = plan.get(x, y) as u32 + integral[y * (w + 1) + x + 1]
                + integral[(y + 1) * (w + 1) + x]
                - integral[y * (w + 1) + x];
        }
    }
    let window_ink = |x: usize, y: usize, tw: usize, th: usize| {
        integral[(y + th) * (w + 1) + x + tw] + integral[y * (w + 1) + x]
            - integral[y * (w + 1) + x + tw]
            - integral[(y + th) * (w + 1) + x]
    };
    // overlap bound from per-cell ink counts
    let cell_bound = |t: &Template, x: usize, y: usize| -> f64 {
        t.cells
            .iter()
            .map(|&(x0, y0, x1, y1, m)| window_ink(x + x0, y + y0, x1 - x0, y1 - y0).min(m))
            .sum::<u32>() as f64
    };

    let cc = raster::connected_components(plan, Connectivity::Eight);
    let (boxes, areas) = (cc.bboxes(), cc.areas());

    let mut hits: Vec<DoorCandidate> = templates
        .par_iter()
        .flat_map_iter(|t| {
            let mut out = Vec::new();
            if t.w > w || t.h > h {
                return out;
            }
            let n_px = (t.w * t.h) as f64;
            let m = t.ink.len() as f64;
            // candidate windows enclose a whole symbol component of plausible size
            let (pw, ph) = (w - t.w + 1, h - t.h + 1);
            let mut candidate = vec![false; pw * ph];
            for (b, &a) in boxes.iter().zip(&areas).skip(1) {
                let Some(b) = b else { continue };
                if (a as f64) < 0.3 * m || b.width() as usize > t.w || b.height() as usize > t.h {
                    continue;
                }
                let (x_lo, x_hi) = ((b.x1 + 1 - t.w as i64).max(0) as usize, (b.x0 as usize).min(pw - 1));
                let (y_lo, y_hi) = ((b.y1 + 1 - t.h as i64).max(0) as usize, (b.y0 as usize).min(ph - 1));
                for y in y_lo..=y_hi {
                    for x in x_lo..=x_hi {
                        candidate[y * pw + x] = true;
                    }
                }
            }
            for y in 0..ph {
                for x in 0..pw {
                    if !candidate[y * pw + x] {
                        continue;
                    }
                    let n = window_ink(x, y, t.w, t.h) as f64;
                    if n == 0.0 || ncc(n_px, n, m, n.min(m)) < score_min {
                        continue;
                    }
                    // smallest overlap that can still reach score_min
                    let den = (n * (n_px - n) * m * (n_px - m)).sqrt();
                    let k_min = (score_min * den + n * m) / n_px;
                    if cell_bound(t, x, y) < k_min {
                        continue;
                    }
                    let allowed_misses = m - k_min;
                    let mut misses = 0.0;
                    for &(dx, dy) in &t.ink {
                        if !plan.get(x + dx, y + dy) {
                            misses += 1.0;
                            if misses > allowed_misses {
                                break;
                            }
                        }
                    }
                    if misses > allowed_misses {
                        continue;
                    }
                    let score = ncc(n_px, n, m, m - misses);
                    if score >= score_min {
                        let bbox = Rect::new(x as i64, y as i64, (x + t.w - 1) as i64, (y + t.h - 1) as i64);
                        let (cx, cy) = bbox.center();
                        out.push(DoorCandidate { bbox, centroid: Point::new(cx, cy), score });
                    }
                }
            }
            out
        })
        .collect();

    hits.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.area().cmp(&b.bbox.area()))
            .then((a.bbox.y0, a.bbox.x0, a.bbox.y1, a.bbox.x1).cmp(&(b.bbox.y0, b.bbox.x0, b.bbox.y1, b.bbox.x1)))
    });
    let mut kept: Vec<DoorCandidate> = Vec::new();
    for c in hits {
        let clash = kept.iter().any(|k| {
            let radius = (k.bbox.width().max(k.bbox.height()).max(c.bbox.width().max(c.bbox.height()))) as f64 / 2.0;
            k.centroid.dist(&c.centroid) < radius
        });
        if !clash {
            kept.push(c);
        }
    }
    kept.sort_by_key(|c| (c.bbox.y0, c.bbox.x0, c.bbox.y1, c.bbox.x1));
    kept
}

/// Paints the wall gaps under each door window. Rows (and columns) of the
/// window that have wall on both sides within `slack` pixels are bridged; if
/// no row or column qualifies the whole window is painted.
pub fn close_door_gaps(walls: &BinaryImage, doors: &[Rect], slack: usize) -> BinaryImage {
    let mut out = walls.clone();
    let s = slack as i64 + 1;
    for d in doors {
        let mut bridged = false;
        for y in d.y0..=d.y1 {
            let left = (1..=s).map(|k| d.x0 - k).find(|&x| walls.at(x, y));
            let right = (1..=s).map(|k| d.x1 + k).find(|&x| walls.at(x, y));
            if let (Some(l), Some(r)) = (left, right) {
                out.fill_rect(&Rect::new(l, y, r, y), true);
                bridged = true;
            }
        }
        for x in d.x0..=d.x1 {
            let top = (1..=s).map(|k| d.y0 - k).find(|&y| walls.at(x, y));
            let bottom = (1..=s).map(|k| d.y1 + k).find(|&y| walls.at(x, y));
            if let (Some(t), Some(b)) = (top, bottom) {
                out.fill_rect(&Rect::new(x, t, x, b), true);
                bridged = true;
            }
        }
        if !bridged {
            out.fill_rect(d, true);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomRegion {
    pub id: usize,
    pub polygon: Polygon,
    pub pixel_area: usize,
    pub bbox: Rect,
    /// Room pixels within `bbox`.
    pub mask: BinaryImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomSegmentation {
    pub rooms: Vec<RoomRegion>,
    /// Background reachable from the image border once door gaps are closed.
    pub exterior: BinaryImage,
    /// Wall image with the door gaps painted in.
    pub closed_walls: BinaryImage,
}

/// Rooms are the background components of the gap-closed wall image that
/// the border flood fill does not reach. Ids follow raster order.
pub fn extract_rooms(
    walls: &BinaryImage,
    doors: &[Rect],
    params: &SegmentationParams,
) -> Result<RoomSegmentation, SegmentationError> {
    let closed = close_door_gaps(walls, doors, params.gap_slack);
    let cc = raster::connected_components(&closed.complement(), Connectivity::Four);
    let (w, h) = (closed.width(), closed.height());
    let mut exterior_labels = BTreeSet::new();
    for x in 0..w {
        exterior_labels.insert(cc.get(x, 0));
        exterior_labels.insert(cc.get(x, h - 1));
    }
    for y in 0..h {
        exterior_labels.insert(cc.get(0, y));
        exterior_labels.insert(cc.get(w - 1, y));
    }
    exterior_labels.remove(&0);
    let exterior = BinaryImage::from_fn(w, h, |x, y| exterior_labels.contains(&cc.get(x, y)));

    let areas = cc.areas();
    let bboxes = cc.bboxes();
    let mut rooms = Vec::new();
    for label in 1..=cc.count() {
        let area = areas[label as usize];
        if exterior_labels.contains(&label) || area < params.min_room_area {
            continue;
        }
        let bbox = bboxes[label as usize].expect("non-empty component");
        let mask = BinaryImage::from_fn(bbox.width() as usize, bbox.height() as usize, |x, y| {
            cc.get(bbox.x0 as usize + x, bbox.y0 as usize + y) == label
        });
        let contour = moore_trace(&mask);
        let mut vertices: Vec<Point> = simplify_closed(&contour, params.dp_epsilon)
            .into_iter()
            .map(|(x, y)| Point::new((x + bbox.x0) as f64, (y + bbox.y0) as f64))
            .collect();
        if vertices.len() < 3 {
            // a component one pixel thin still needs an area-bearing outline
            vertices = vec![
                Point::new(bbox.x0 as f64, bbox.y0 as f64),
                Point::new(bbox.x1 as f64 + 0.5, bbox.y0 as f64),
                Point::new(bbox.x1 as f64 + 0.5, bbox.y1 as f64 + 0.5),
                Point::new(bbox.x0 as f64, bbox.y1 as f64 + 0.5),
            ];
        }
        let mut polygon = Polygon::new(vertices);
        if polygon.signed_area() < 0.0 {
            polygon = polygon.reversed();
        }
        rooms.push(RoomRegion { id: rooms.len() + 1, polygon, pixel_area: area, bbox, mask });
    }
    if rooms.is_empty() {
        return Err(SegmentationError::Failed("no enclosed room found".into()));
    }
    Ok(RoomSegmentation { rooms, exterior, closed_walls: closed })
}

/// Outer contour of the single component in `mask` (Moore neighbour tracing
/// with Jacob's stopping criterion), as pixel coordinates.
pub fn moore_trace(mask: &BinaryImage) -> Vec<(i64, i64)> {
    let Some(start) = (0..mask.height())
        .flat_map(|y| (0..mask.width()).map(move |x| (x, y)))
        .find(|&(x, y)| mask.get(x, y))
    else {
        return Vec::new();
    };
    let start = (start.0 as i64, start.1 as i64);
    // clockwise on screen, starting west
    const DIRS: [(i64, i64); 8] = [(-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1)];
    let dir_of = |from: (i64, i64), to: (i64, i64)| DIRS.iter().position(|&d| d == (to.0 - from.0, to.1 - from.1)).unwrap();

    let mut contour = vec![start];
    let mut cur = start;
    // the pixel west of the first pixel in raster order is background
    let mut back = (start.0 - 1, start.1);
    let mut first_move: Option<((i64, i64), (i64, i64))> = None;
    loop {
        let d0 = dir_of(cur, back);
        let mut next = None;
        for k in 1..=8 {
            let d = DIRS[(d0 + k) % 8];
            let p = (cur.0 + d.0, cur.1 + d.1);
            if mask.at(p.0, p.1) {
                next = Some(p);
                break;
            }
            back = p;
        }
        let Some(next) = next else {
            return contour;
        };
        match first_move {
            None => first_move = Some((cur, next)),
            Some(m) if m == (cur, next) => {
                contour.pop();
                return contour;
            }
            _ => {}
        }
        contour.push(next);
        cur = next;
    }
}

fn perpendicular_distance(p: (i64, i64), a: (i64, i64), b: (i64, i64)) -> f64 {
    let (px, py) = (p.0 as f64, p.1 as f64);
    let (ax, ay) = (a.0 as f64, a.1 as f64);
    let (bx, by) = (b.0 as f64, b.1 as f64);
    let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
    if len == 0.0 {
        return ((px - ax).powi(2) + (py - ay).powi(2)).sqrt();
    }
    ((bx - ax) * (ay - py) - (ax - px) * (by - ay)).abs() / len
}

fn douglas_peucker(points: &[(i64, i64)], eps: f64, out: &mut Vec<(i64, i64)>) {
    let (a, b) = (points[0], points[points.len() - 1]);
    let mut best = (0, 0.0);
    for (i, &p) in points.iter().enumerate().take(points.len() - 1).skip(1) {
        let d = perpendicular_distance(p, a, b);
        if d > best.1 {
            best = (i, d);
        }
    }
    if best.1 > eps {
        douglas_peucker(&points[..=best.0], eps, out);
        out.pop();
        douglas_peucker(&points[best.0..], eps, out);
    } else {
        out.push(a);
        out.push(b);
    }
}

/// Douglas-Peucker on a closed contour, split at the contour start and the
/// vertex farthest from it.
pub fn simplify_closed(contour: &[(i64, i64)], eps: f64) -> Vec<(i64, i64)> {
    if contour.len() < 4 {
        return contour.to_vec();
    }
    let a = contour[0];
    let far = (1..contour.len())
        .max_by(|&i, &j| {
            let di = (contour[i].0 - a.0).pow(2) + (contour[i].1 - a.1).pow(2);
            let dj = (contour[j].0 - a.0).pow(2) + (contour[j].1 - a.1).pow(2);
            di.cmp(&dj).then(j.cmp(&i))
        })
        .unwrap();
    let mut ring: Vec<(i64, i64)> = contour.to_vec();
    ring.push(a);
    let mut out = Vec::new();
    douglas_peucker(&ring[..=far], eps, &mut out);
    out.pop();
    douglas_peucker(&ring[far..], eps, &mut out);
    out.pop();
    out
}

pub fn room_area_sqft(pixel_area: usize, divisor: f64) -> f64 {
    pixel_area as f64 / divisor
}

/// Whether a pixel rectangle (taken as the square hull of its pixel
/// centres) meets a polygon.
pub fn rect_intersects_polygon(r: &Rect, poly: &Polygon) -> bool {
    let corners = [
        Point::new(r.x0 as f64, r.y0 as f64),
        Point::new(r.x1 as f64, r.y0 as f64),
        Point::new(r.x1 as f64, r.y1 as f64),
        Point::new(r.x0 as f64, r.y1 as f64),
    ];
    if poly.vertices.iter().any(|v| r.contains_point(v.x, v.y)) || corners.iter().any(|c| poly.contains(c)) {
        return true;
    }
    let n = poly.vertices.len();
    (0..n).any(|i| {
        let (a, b) = (&poly.vertices[i], &poly.vertices[(i + 1) % n]);
        (0..4).any(|k| segments_intersect(a, b, &corners[k], &corners[(k + 1) % 4]))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    /// Incident room ids per door, ascending; indexed like the door list.
    pub door_rooms: Vec<Vec<usize>>,
    /// Doors that meet exactly one room and the exterior.
    pub outer: Vec<bool>,
    /// Room-by-room shared-door matrix, indexed by room id - 1.
    pub am_d: Vec<Vec<u8>>,
    pub neighbors: Vec<BTreeSet<usize>>,
}

/// A door belongs to a room when its window, grown by 2 px, meets the room
/// polygon.
pub fn build_adjacency(
    rooms: &[RoomRegion],
    doors: &[Rect],
    exterior: &BinaryImage,
) -> Result<Adjacency, SegmentationError> {
    let n = rooms.len();
    let mut am_d = vec![vec![0u8; n]; n];
    let mut neighbors = vec![BTreeSet::new(); n];
    let mut door_rooms = Vec::with_capacity(doors.len());
    let mut outer = Vec::with_capacity(doors.len());
    for (i, d) in doors.iter().enumerate() {
        let grown = d.dilate(2);
        let hit: Vec<usize> = rooms.iter().filter(|r| rect_intersects_polygon(&grown, &r.polygon)).map(|r| r.id).collect();
        if hit.len() > 2 {
            return Err(SegmentationError::AmbiguousDoor { door: i + 1, count: hit.len() });
        }
        if let [a, b] = hit[..] {
            am_d[a - 1][b - 1] = 1;
            am_d[b - 1][a - 1] = 1;
            neighbors[a - 1].insert(b);
            neighbors[b - 1].insert(a);
        }
        let touches_exterior = (grown.y0..=grown.y1).any(|y| (grown.x0..=grown.x1).any(|x| exterior.at(x, y)));
        outer.push(hit.len() == 1 && touches_exterior);
        door_rooms.push(hit);
    }
    Ok(Adjacency { door_rooms, outer, am_d, neighbors })
}

/// Per-room crops of the plan over the polygon bounding box, with pixels
/// outside the polygon blanked.
pub fn partition_rooms(plan: &BinaryImage, rooms: &[RoomRegion]) -> Vec<(Rect, BinaryImage)> {
    rooms
        .iter()
        .map(|r| {
            let (lo, hi) = r.polygon.bounds();
            let bbox = Rect::new(lo.x.floor() as i64, lo.y.floor() as i64, hi.x.ceil() as i64, hi.y.ceil() as i64);
            let crop = BinaryImage::from_fn(bbox.width() as usize, bbox.height() as usize, |x, y| {
                let (gx, gy) = (bbox.x0 + x as i64, bbox.y0 + y as i64);
                plan.at(gx, gy) && r.polygon.contains(&Point::new(gx as f64, gy as f64))
            });
            (bbox, crop)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outline(w: usize, h: usize, m: i64, t: i64) -> BinaryImage {
        let mut img = BinaryImage::new(w, h);
        let (x1, y1) = (w as i64 - 1 - m, h as i64 - 1 - m);
        img.fill_rect(&Rect::new(m, m, x1, m + t - 1), true);
        img.fill_rect(&Rect::new(m, y1 - t + 1, x1, y1), true);
        img.fill_rect(&Rect::new(m, m, m + t - 1, y1), true);
        img.fill_rect(&Rect::new(x1 - t + 1, m, x1, y1), true);
        img
    }

    #[test]
    fn door_glyph_variants() {
        let base = door_glyph(2);
        assert_eq!((base.width(), base.height()), (DOOR_SPAN, DOOR_DEPTH));
        // gap rows are blank, the leaf hangs from the hinge
        for y in 0..DOOR_GAP {
            for x in 0..DOOR_SPAN {
                assert!(!base.get(x, y));
            }
        }
        for y in DOOR_GAP..DOOR_DEPTH {
            assert!(base.get(0, y));
        }
        let all: Vec<BinaryImage> = (0..8).map(door_glyph).collect();
        let dihedral = dihedral_variants(&base);
        for g in &all {
            assert!(dihedral.contains(g));
            assert_eq!(g.count(), base.count());
        }
        for v in 0..8u8 {
            let g = door_glyph(v);
            let window = Rect::new(0, 0, g.width() as i64 - 1, g.height() as i64 - 1);
            let gap = door_gap(&window, v);
            assert_eq!(gap.area(), (DOOR_SPAN * DOOR_GAP) as i64);
            assert!((gap.y0..=gap.y1).all(|y| (gap.x0..=gap.x1).all(|x| !g.at(x, y))));
        }
    }

    #[test]
    fn walls_of_a_clean_outline_are_unchanged() {
        assert!(extract_walls(&BinaryImage::new(20, 20), 3, 4).is_blank());
        let img = outline(60, 50, 5, 4);
        assert_eq!(extract_walls(&img, 3, 4), img);
    }

    #[test]
    fn thin_strokes_are_not_walls() {
        let mut img = outline(80, 80, 2, 4);
        img.fill_rect(&Rect::new(20, 30, 60, 31), true);
        let walls = extract_walls(&img, 3, 4);
        assert_eq!(walls, outline(80, 80, 2, 4));
    }

    #[test]
    fn area_conversion() {
        assert_eq!(room_area_sqft(0, 100.0), 0.0);
        assert_eq!(room_area_sqft(10000, 100.0), 100.0);
        assert_eq!(room_area_sqft(2550, 100.0), 25.5);
    }

    #[test]
    fn single_room_polygon_is_inner_rectangle() {
        let walls = outline(40, 30, 0, 2);
        let params = SegmentationParams { min_room_area: 10, ..Default::default() };
        let seg = extract_rooms(&walls, &[], &params).unwrap();
        assert_eq!(seg.rooms.len(), 1);
        let r = &seg.rooms[0];
        assert_eq!(r.pixel_area, 36 * 26);
        assert_eq!(r.bbox, Rect::new(2, 2, 37, 27));
        let mut vs: Vec<(i64, i64)> = r.polygon.vertices.iter().map(|p| (p.x as i64, p.y as i64)).collect();
        vs.sort();
        assert_eq!(vs, vec![(2, 2), (2, 27), (37, 2), (37, 27)]);
        assert!(extract_rooms(&BinaryImage::new(10, 10), &[], &params).is_err());
    }

    #[test]
    fn door_gap_closing_splits_rooms() {
        // 40x40 outline with a vertical partition at x 19..20 and a gap at y 15..22
        let mut walls = outline(40, 40, 0, 2);
        walls.fill_rect(&Rect::new(19, 0, 20, 39), true);
        walls.fill_rect(&Rect::new(19, 15, 20, 22), false);
        let params = SegmentationParams { min_room_area: 10, ..Default::default() };
        assert_eq!(extract_rooms(&walls, &[], &params).unwrap().rooms.len(), 1);
        let door = Rect::new(19, 15, 20, 22);
        let seg = extract_rooms(&walls, &[door], &params).unwrap();
        assert_eq!(seg.rooms.len(), 2);
        assert_eq!(seg.rooms[0].pixel_area, 17 * 36);
        assert_eq!(seg.rooms[1].pixel_area, 17 * 36);
        let adj = build_adjacency(&seg.rooms, &[door], &seg.exterior).unwrap();
        assert_eq!(adj.door_rooms, vec![vec![1, 2]]);
        assert_eq!(adj.am_d, vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(adj.outer, vec![false]);
    }

    #[test]
    fn moore_trace_of_shapes() {
        let single = BinaryImage::from_ascii("...\n.#.\n...");
        assert_eq!(moore_trace(&single), vec![(1, 1)]);
        let block = BinaryImage::from_ascii("##\n##");
        assert_eq!(moore_trace(&block), vec![(0, 0), (1, 0), (1, 1), (0, 1)]);
        let l = BinaryImage::from_ascii("#..\n#..\n###");
        let c: BTreeSet<(i64, i64)> = moore_trace(&l).into_iter().collect();
        assert_eq!(c, [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)].into_iter().collect());
    }

    #[test]
    fn rect_polygon_intersection() {
        let sq = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0), Point::new(0.0, 10.0)]);
        assert!(rect_intersects_polygon(&Rect::new(2, 2, 3, 3), &sq));
        assert!(rect_intersects_polygon(&Rect::new(-5, -5, 20, 20), &sq));
        assert!(rect_intersects_polygon(&Rect::new(8, -3, 12, 1), &sq));
        assert!(!rect_intersects_polygon(&Rect::new(12, 0, 14, 10), &sq));
    }

    #[test]
    fn detects_rotated_door_glyph() {
        let template = DoorTemplate::default();
        assert!(detect_doors(&outline(120, 120, 10, 4), &template, 0.6).is_empty());
        for v in 0..8u8 {
            let g = door_glyph(v);
            let mut plan = BinaryImage::new(100, 90);
            plan.stamp(&g, 31, 27);
            let found = detect_doors(&plan, &template, 0.6);
            assert_eq!(found.len(), 1, "variant {v}");
            assert_eq!(found[0].bbox, Rect::new(31, 27, 30 + g.width() as i64, 26 + g.height() as i64));
            assert!((found[0].score - 1.0).abs() < 1e-12);
        }
        let mut big = BinaryImage::new(100, 100);
        big.stamp(&door_glyph(2).scaled(1.5), 20, 20);
        assert_eq!(detect_doors(&big, &template, 0.6).len(), 1);
    }

    #[test]
    fn partition_blanks_outside_polygon() {
        let mut walls = outline(30, 30, 0, 2);
        walls.fill_rect(&Rect::new(14, 0, 15, 29), true);
        let params = SegmentationParams { min_room_area: 10, ..Default::default() };
        let seg = extract_rooms(&walls, &[], &params).unwrap();
        let mut plan = walls.clone();
        // a glyph straddling the partition
        plan.fill_rect(&Rect::new(10, 10, 20, 12), true);
        let crops = partition_rooms(&plan, &seg.rooms);
        assert_eq!(crops.len(), 2);
        let (b0, c0) = &crops[0];
        assert_eq!(*b0, Rect::new(2, 2, 13, 27));
        for (x, y) in c0.foreground() {
            let gx = b0.x0 + x as i64;
            assert!(gx <= 13);
            assert!((10..=12).contains(&(b0.y0 + y as i64)));
        }
        assert_eq!(c0.count(), 4 * 3);
    }
}
