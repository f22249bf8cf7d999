//! Plan boundary tracing, polygon centroids and eight-way direction binning.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("degenerate polygon (|area| < 1e-9)")]
    DegeneratePolygon,
    #[error("direction undefined for coincident points")]
    UndefinedDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn manhattan(&self, other: &Point) -> f64 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }
}

/// Ordered vertex list. Counter-clockwise polygons (in raw x/y coordinates)
/// have positive signed area.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Polygon { vertices }
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn reversed(&self) -> Polygon {
        Polygon { vertices: self.vertices.iter().rev().cloned().collect() }
    }

    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Point-in-polygon test; points on an edge count as inside.
    pub fn contains(&self, p: &Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if on_segment(&a, &b, p) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// True when no two non-adjacent edges touch.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
                let (c, d) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(&a, &b, &c, &d) {
                    return false;
                }
            }
        }
        true
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    cross(a, b, p).abs() <= 1e-9
        && p.x >= a.x.min(b.x) - 1e-9
        && p.x <= a.x.max(b.x) + 1e-9
        && p.y >= a.y.min(b.y) - 1e-9
        && p.y <= a.y.max(b.y) + 1e-9
}

pub fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(c, d, a) || on_segment(c, d, b) || on_segment(a, b, c) || on_segment(a, b, d)
}

/// Area-weighted centroid and signed area from the shoelace terms
/// `a_i = x_i*y_{i+1} - x_{i+1}*y_i`.
pub fn polygon_centroid(p: &Polygon) -> Result<(f64, f64, f64), GeometryError> {
    let n = p.vertices.len();
    if n < 3 {
        return Err(GeometryError::DegeneratePolygon);
    }
    let (mut sum_a, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (v, w) = (p.vertices[i], p.vertices[(i + 1) % n]);
        let a = v.x * w.y - w.x * v.y;
        sum_a += a;
        sx += a * (v.x + w.x);
        sy += a * (v.y + w.y);
    }
    let area = sum_a / 2.0;
    if area.abs() < 1e-9 {
        return Err(GeometryError::DegeneratePolygon);
    }
    Ok((sx / (6.0 * area), sy / (6.0 * area), area))
}

fn dedup_points(points: &[Point]) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out: Vec<Point> = points
        .iter()
        .filter(|p| seen.insert((p.x.to_bits(), p.y.to_bits())))
        .cloned()
        .collect();
    out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    out
}

/// Convex hull by monotone chain, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let pts = dedup_points(points);
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

type Edge = (usize, usize);

fn edge_key(a: usize, b: usize) -> Edge {
    (a.min(b), a.max(b))
}

/// Outer boundary of a point set controlled by a shrink factor `t` in [0, 1].
///
/// `t = 0` yields the convex hull. Larger values carve the Delaunay
/// triangulation from the outside inwards: the longest boundary edge is
/// removed while it is longer than `L_max - t (L_max - L_min)` and its
/// opposite vertex is still interior, which keeps the polygon simple and every
/// point enclosed.
pub fn trace_boundary(points: &[Point], t: f64) -> Result<Polygon, GeometryError> {
    let pts = dedup_points(points);
    if pts.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!("{} distinct points", pts.len())));
    }
    if convex_hull(&pts).len() < 3 {
        return Err(GeometryError::DegenerateInput("all points are collinear".into()));
    }
    let t = t.clamp(0.0, 1.0);

    let dpts: Vec<delaunator::Point> = pts.iter().map(|p| delaunator::Point { x: p.x, y: p.y }).collect();
    let tri = delaunator::triangulate(&dpts);
    let ntri = tri.triangles.len() / 3;

    // triangles incident to each undirected edge
    let mut edge_tris: HashMap<Edge, Vec<usize>> = HashMap::new();
    for ti in 0..ntri {
        let v = &tri.triangles[3 * ti..3 * ti + 3];
        for k in 0..3 {
            edge_tris.entry(edge_key(v[k], v[(k + 1) % 3])).or_default().push(ti);
        }
    }
    let len = |e: &Edge| pts[e.0].dist(&pts[e.1]);
    let (mut l_min, mut l_max) = (f64::INFINITY, 0.0f64);
    for e in edge_tris.keys() {
        let l = len(e);
        l_min = l_min.min(l);
        l_max = l_max.max(l);
    }
    let threshold = l_max - t * (l_max - l_min);

    let mut alive = vec![true; ntri];
    let mut boundary: BTreeSet<Edge> = edge_tris.iter().filter(|(_, ts)| ts.len() == 1).map(|(e, _)| *e).collect();
    let mut on_boundary = vec![false; pts.len()];
    for e in &boundary {
        on_boundary[e.0] = true;
        on_boundary[e.1] = true;
    }

    loop {
        // longest removable boundary edge; ties broken by lexicographic endpoints
        let mut best: Option<(Edge, usize, usize)> = None;
        for e in &boundary {
            let l = len(e);
            if l <= threshold {
                continue;
            }
            let ti = edge_tris[e].iter().cloned().find(|&ti| alive[ti]).expect("boundary edge has a live triangle");
            let v = &tri.triangles[3 * ti..3 * ti + 3];
            let opposite = v.iter().cloned().find(|&x| x != e.0 && x != e.1).unwrap();
            if on_boundary[opposite] {
                continue;
            }
            let better = match &best {
                None => true,
                Some((b, _, _)) => {
                    let lb = len(b);
                    l > lb || (l == lb && lex_edge(&pts, e) < lex_edge(&pts, b))
                }
            };
            if better {
                best = Some((*e, ti, opposite));
            }
        }
        let Some((e, ti, opposite)) = best else { break };
        alive[ti] = false;
        boundary.remove(&e);
        boundary.insert(edge_key(e.0, opposite));
        boundary.insert(edge_key(e.1, opposite));
        on_boundary[opposite] = true;
    }

    // walk the boundary cycle
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &boundary {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let start = *adj.keys().min().unwrap();
    let mut ring = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    loop {
        let next = adj[&cur].iter().cloned().find(|&n| n != prev).unwrap();
        if next == start {
            break;
        }
        ring.push(next);
        prev = cur;
        cur = next;
        if ring.len() > pts.len() {
            break;
        }
    }
    let mut poly = Polygon::new(ring.into_iter().map(|i| pts[i]).collect());
    if poly.signed_area() < 0.0 {
        poly = poly.reversed();
    }
    // start at the lexicographically smallest vertex so the output is canonical
    let first = (0..poly.vertices.len())
        .min_by(|&a, &b| {
            let (p, q) = (poly.vertices[a], poly.vertices[b]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
        })
        .unwrap();
    poly.vertices.rotate_left(first);
    Ok(poly)
}

fn lex_edge(pts: &[Point], e: &Edge) -> (u64, u64, u64, u64) {
    let (a, b) = (pts[e.0], pts[e.1]);
    let key = |p: Point| (p.x.to_bits(), p.y.to_bits());
    let (ka, kb) = (key(a), key(b));
    let (lo, hi) = if (a.x, a.y) <= (b.x, b.y) { (ka, kb) } else { (kb, ka) };
    (lo.0, lo.1, hi.0, hi.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction8 {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Direction8 {
    pub const ALL: [Direction8; 8] = [
        Direction8::N,
        Direction8::NE,
        Direction8::E,
        Direction8::SE,
        Direction8::S,
        Direction8::SW,
        Direction8::W,
        Direction8::NW,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Direction8::N => "N",
            Direction8::NE => "NE",
            Direction8::E => "E",
            Direction8::SE => "SE",
            Direction8::S => "S",
            Direction8::SW => "SW",
            Direction8::W => "W",
            Direction8::NW => "NW",
        }
    }

    pub fn from_code(s: &str) -> Option<Direction8> {
        Direction8::ALL.iter().cloned().find(|d| d.code() == s)
    }

    /// Spelled-out compass name, e.g. "North East".
    pub fn name(&self) -> &'static str {
        match self {
            Direction8::N => "North",
            Direction8::NE => "North East",
            Direction8::E => "East",
            Direction8::SE => "South East",
            Direction8::S => "South",
            Direction8::SW => "South West",
            Direction8::W => "West",
            Direction8::NW => "North West",
        }
    }
}

impl fmt::Display for Direction8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Eight angular sectors covering the circle. Angles are in degrees, measured
/// counter-clockwise from East with North at 90°.
#[derive(Debug, Clone, PartialEq)]
pub struct BinScheme {
    /// `(direction, lower bound inclusive, upper bound exclusive)`, lower bound
    /// normalised to [0, 360) and widths summing to 360.
    sectors: Vec<(Direction8, f64, f64)>,
}

impl BinScheme {
    /// 45° sectors centred on each compass direction.
    pub fn uniform() -> Self {
        Self::from_widths(45.0, 45.0)
    }

    /// Cardinal sectors 60° wide, diagonals 30°.
    pub fn nonuniform() -> Self {
        Self::from_widths(60.0, 30.0)
    }

    /// Sectors centred on each direction with the given cardinal and diagonal
    /// widths; `2 * (cardinal + diagonal)` must be 180.
    pub fn from_widths(cardinal: f64, diagonal: f64) -> Self {
        assert!((2.0 * (cardinal + diagonal) - 180.0).abs() < 1e-9, "sector widths must cover the circle");
        let centres = [
            (Direction8::E, 0.0),
            (Direction8::NE, 45.0),
            (Direction8::N, 90.0),
            (Direction8::NW, 135.0),
            (Direction8::W, 180.0),
            (Direction8::SW, 225.0),
            (Direction8::S, 270.0),
            (Direction8::SE, 315.0),
        ];
        let sectors = centres
            .iter()
            .enumerate()
            .map(|(i, &(d, c))| {
                let w = if i % 2 == 0 { cardinal } else { diagonal };
                ((c - w / 2.0).rem_euclid(360.0), w, d)
            })
            .map(|(lo, w, d)| (d, lo, lo + w))
            .collect();
        BinScheme { sectors }
    }

    pub fn sectors(&self) -> &[(Direction8, f64, f64)] {
        &self.sectors
    }

    /// Sector containing `theta` (degrees, any range).
    pub fn classify(&self, theta: f64) -> Direction8 {
        let th = theta.rem_euclid(360.0);
        for &(d, lo, hi) in &self.sectors {
            let rel = (th - lo).rem_euclid(360.0);
            if rel < hi - lo {
                return d;
            }
        }
        unreachable!("sectors cover the circle")
    }
}

/// Image-space bearing from `origin` to `target` in degrees, with image y
/// flipped so that 90° points up (North).
pub fn bearing(origin: &Point, target: &Point) -> Option<f64> {
    let (dx, dy) = (target.x - origin.x, origin.y - target.y);
    if dx == 0.0 && dy == 0.0 {
        return None;
    }
    Some(dy.atan2(dx).to_degrees().rem_euclid(360.0))
}

pub fn bin_direction(origin: &Point, target: &Point, scheme: &BinScheme) -> Result<Direction8, GeometryError> {
    bearing(origin, target).map(|th| scheme.classify(th)).ok_or(GeometryError::UndefinedDirection)
}
