//! Semantic floor-plan model and its XML interchange format.
//!
//! The XML document is the hand-off between the image front-end and the text
//! back-end:
//!
//! ```text
//! <RoomDetails entryDoor="1">
//!   <Room>
//!     <RoomID>1</RoomID>
//!     <RoomLabel>ENTRY</RoomLabel>
//!     <RoomArea>184.32</RoomArea>
//!     <RoomLocation>SW</RoomLocation>
//!     <RoomCoordinates>44,300 44,556 180,556 180,300</RoomCoordinates>
//!     <RoomNeighbors>2 3</RoomNeighbors>
//!     <RoomDecors>
//!       <Decor class="chair" cx="80.5" cy="400.5" dir="NW" x0="63" y0="383" x1="98" y1="418"/>
//!     </RoomDecors>
//!   </Room>
//!   <Doors>
//!     <Door id="1" cx="71.5" cy="543.5" x0="60" y0="530" x1="83" y1="557" rooms="1"/>
//!   </Doors>
//! </RoomDetails>
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Direction8, Point, Polygon};
use crate::raster::Rect;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("serialization refused: {0}")]
    SerializationRefused(String),
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

fn parse_err(path: &str, message: impl Into<String>) -> ModelError {
    ModelError::Parse { path: path.to_string(), message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RoomLabel {
    Bedroom = 1,
    Bathroom = 2,
    Entry = 3,
    Kitchen = 4,
    Hall = 5,
}

impl RoomLabel {
    pub const ALL: [RoomLabel; 5] =
        [RoomLabel::Bedroom, RoomLabel::Bathroom, RoomLabel::Entry, RoomLabel::Kitchen, RoomLabel::Hall];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<RoomLabel> {
        RoomLabel::ALL.get((code as usize).wrapping_sub(1)).cloned()
    }

    /// Upper-case tag used in XML.
    pub fn tag(self) -> &'static str {
        match self {
            RoomLabel::Bedroom => "BEDROOM",
            RoomLabel::Bathroom => "BATHROOM",
            RoomLabel::Entry => "ENTRY",
            RoomLabel::Kitchen => "KITCHEN",
            RoomLabel::Hall => "HALL",
        }
    }

    pub fn from_tag(s: &str) -> Option<RoomLabel> {
        RoomLabel::ALL.iter().cloned().find(|l| l.tag() == s)
    }

    /// Lower-case room name used in sentences.
    pub fn name(self) -> &'static str {
        match self {
            RoomLabel::Bedroom => "bedroom",
            RoomLabel::Bathroom => "bathroom",
            RoomLabel::Entry => "entry",
            RoomLabel::Kitchen => "kitchen",
            RoomLabel::Hall => "hall",
        }
    }
}

/// The twelve decor symbol classes, codes 1..=12.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DecorClass {
    Bed = 1,
    Sofa = 2,
    LargeSofa = 3,
    Table = 4,
    Chair = 5,
    Sink = 6,
    TwinSink = 7,
    LargeSink = 8,
    Tub = 9,
    Stove = 10,
    Wardrobe = 11,
    Toilet = 12,
}

impl DecorClass {
    pub const ALL: [DecorClass; 12] = [
        DecorClass::Bed,
        DecorClass::Sofa,
        DecorClass::LargeSofa,
        DecorClass::Table,
        DecorClass::Chair,
        DecorClass::Sink,
        DecorClass::TwinSink,
        DecorClass::LargeSink,
        DecorClass::Tub,
        DecorClass::Stove,
        DecorClass::Wardrobe,
        DecorClass::Toilet,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Zero-based position, convenient for feature vectors.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_code(code: u8) -> Option<DecorClass> {
        DecorClass::ALL.get((code as usize).wrapping_sub(1)).cloned()
    }

    /// Machine-friendly spelling, e.g. `large-sofa`.
    pub fn slug(self) -> &'static str {
        match self {
            DecorClass::Bed => "bed",
            DecorClass::Sofa => "sofa",
            DecorClass::LargeSofa => "large-sofa",
            DecorClass::Table => "table",
            DecorClass::Chair => "chair",
            DecorClass::Sink => "sink",
            DecorClass::TwinSink => "twin-sink",
            DecorClass::LargeSink => "large-sink",
            DecorClass::Tub => "tub",
            DecorClass::Stove => "stove",
            DecorClass::Wardrobe => "wardrobe",
            DecorClass::Toilet => "toilet",
        }
    }

    pub fn from_slug(s: &str) -> Option<DecorClass> {
        DecorClass::ALL.iter().cloned().find(|c| c.slug() == s)
    }

    /// Name used in sentences, e.g. `large sofa`.
    pub fn name(self) -> String {
        self.slug().replace('-', " ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecorInstance {
    pub class: DecorClass,
    pub bbox: Rect,
}

impl DecorInstance {
    pub fn new(class: DecorClass, bbox: Rect) -> Self {
        DecorInstance { class, bbox }
    }

    pub fn center(&self) -> Point {
        let (x, y) = self.bbox.center();
        Point::new(x, y)
    }
}

/// A decor together with its direction relative to the room centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatedDecor {
    pub decor: DecorInstance,
    pub dir: Direction8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Door {
    pub id: usize,
    pub bbox: Rect,
    pub centroid: Point,
    /// Incident rooms, ascending, one or two entries.
    pub rooms: Vec<usize>,
}

impl Door {
    pub fn is_outer(&self) -> bool {
        self.rooms.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: usize,
    pub label: RoomLabel,
    pub polygon: Vec<Point>,
    pub area_sqft: f64,
    pub neighbors: BTreeSet<usize>,
    pub decors: Vec<LocatedDecor>,
    pub global_dir: Direction8,
}

impl Room {
    pub fn polygon(&self) -> Polygon {
        Polygon::new(self.polygon.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemanticModel {
    pub rooms: Vec<Room>,
    pub doors: Vec<Door>,
    pub entry_door: Option<usize>,
}

impl SemanticModel {
    pub fn room(&self, id: usize) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn door(&self, id: usize) -> Option<&Door> {
        self.doors.iter().find(|d| d.id == id)
    }

    /// Room ids in ascending order.
    pub fn room_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.rooms.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Door-based room adjacency, keyed by room id pair `(lo, hi)`, listing
    /// shared door ids in ascending order.
    pub fn shared_doors(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for d in &self.doors {
            if let [a, b] = d.rooms[..] {
                map.entry((a.min(b), a.max(b))).or_default().push(d.id);
            }
        }
        for v in map.values_mut() {
            v.sort_unstable();
        }
        map
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut ids = BTreeSet::new();
        for r in &self.rooms {
            if !ids.insert(r.id) {
                return Err(format!("duplicate room id {}", r.id));
            }
        }
        for r in &self.rooms {
            if r.polygon.len() < 3 {
                return Err(format!("room {} polygon has fewer than 3 vertices", r.id));
            }
            if !(r.area_sqft > 0.0 && r.area_sqft.is_finite()) {
                return Err(format!("room {} area must be positive", r.id));
            }
            for &n in &r.neighbors {
                let other = self.room(n).ok_or_else(|| format!("room {} lists unknown neighbour {}", r.id, n))?;
                if n == r.id || !other.neighbors.contains(&r.id) {
                    return Err(format!("neighbour relation {}-{} is not symmetric", r.id, n));
                }
            }
            let poly = r.polygon();
            for d in &r.decors {
                if !poly.contains(&d.decor.center()) {
                    return Err(format!("decor {} lies outside room {}", d.decor.class.slug(), r.id));
                }
            }
        }
        let mut door_ids = BTreeSet::new();
        for d in &self.doors {
            if !door_ids.insert(d.id) {
                return Err(format!("duplicate door id {}", d.id));
            }
            if d.rooms.is_empty() || d.rooms.len() > 2 {
                return Err(format!("door {} must touch one or two rooms", d.id));
            }
            for r in &d.rooms {
                if !ids.contains(r) {
                    return Err(format!("door {} refers to unknown room {}", d.id, r));
                }
            }
        }
        match self.entry_door {
            Some(e) if !door_ids.contains(&e) => return Err(format!("entry door {} does not exist", e)),
            None if !self.doors.is_empty() => return Err("doors present but no entry door".into()),
            _ => {}
        }
        Ok(())
    }

    /// Canonical XML bytes. Rooms and doors are emitted by ascending id.
    pub fn to_xml(&self) -> Result<Vec<u8>, ModelError> {
        self.validate().map_err(ModelError::SerializationRefused)?;
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        if self.rooms.is_empty() && self.doors.is_empty() {
            out.push_str("<RoomDetails/>\n");
            return Ok(out.into_bytes());
        }
        match self.entry_door {
            Some(e) => writeln!(out, "<RoomDetails entryDoor=\"{}\">", e).unwrap(),
            None => out.push_str("<RoomDetails>\n"),
        }
        let mut rooms: Vec<&Room> = self.rooms.iter().collect();
        rooms.sort_by_key(|r| r.id);
        for r in rooms {
            out.push_str("  <Room>\n");
            writeln!(out, "    <RoomID>{}</RoomID>", r.id).unwrap();
            writeln!(out, "    <RoomLabel>{}</RoomLabel>", r.label.tag()).unwrap();
            writeln!(out, "    <RoomArea>{:.2}</RoomArea>", r.area_sqft).unwrap();
            writeln!(out, "    <RoomLocation>{}</RoomLocation>", r.global_dir.code()).unwrap();
            let coords: Vec<String> = r.polygon.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
            writeln!(out, "    <RoomCoordinates>{}</RoomCoordinates>", coords.join(" ")).unwrap();
            if r.neighbors.is_empty() {
                out.push_str("    <RoomNeighbors/>\n");
            } else {
                let ns: Vec<String> = r.neighbors.iter().map(|n| n.to_string()).collect();
                writeln!(out, "    <RoomNeighbors>{}</RoomNeighbors>", ns.join(" ")).unwrap();
            }
            if r.decors.is_empty() {
                out.push_str("    <RoomDecors/>\n");
            } else {
                out.push_str("    <RoomDecors>\n");
                for d in &r.decors {
                    let c = d.decor.center();
                    let b = d.decor.bbox;
                    writeln!(
                        out,
                        "      <Decor class=\"{}\" cx=\"{}\" cy=\"{}\" dir=\"{}\" x0=\"{}\" y0=\"{}\" x1=\"{}\" y1=\"{}\"/>",
                        d.decor.class.slug(),
                        c.x,
                        c.y,
                        d.dir.code(),
                        b.x0,
                        b.y0,
                        b.x1,
                        b.y1
                    )
                    .unwrap();
                }
                out.push_str("    </RoomDecors>\n");
            }
            out.push_str("  </Room>\n");
        }
        if !self.doors.is_empty() {
            out.push_str("  <Doors>\n");
            let mut doors: Vec<&Door> = self.doors.iter().collect();
            doors.sort_by_key(|d| d.id);
            for d in doors {
                let rooms: Vec<String> = d.rooms.iter().map(|r| r.to_string()).collect();
                writeln!(
                    out,
                    "    <Door id=\"{}\" cx=\"{}\" cy=\"{}\" x0=\"{}\" y0=\"{}\" x1=\"{}\" y1=\"{}\" rooms=\"{}\"/>",
                    d.id,
                    d.centroid.x,
                    d.centroid.y,
                    d.bbox.x0,
                    d.bbox.y0,
                    d.bbox.x1,
                    d.bbox.y1,
                    rooms.join(" ")
                )
                .unwrap();
            }
            out.push_str("  </Doors>\n");
        }
        out.push_str("</RoomDetails>\n");
        Ok(out.into_bytes())
    }

    pub fn from_xml(bytes: &[u8]) -> Result<SemanticModel, ModelError> {
        let text = std::str::from_utf8(bytes).map_err(|e| parse_err("", format!("invalid UTF-8: {e}")))?;
        let doc = roxmltree::Document::parse(text).map_err(|e| parse_err("", e.to_string()))?;
        let root = doc.root_element();
        if root.tag_name().name() != "RoomDetails" {
            return Err(parse_err(root.tag_name().name(), "root element must be RoomDetails"));
        }
        check_attrs(&root, "RoomDetails", &["entryDoor"])?;
        let entry_door = root.attribute("entryDoor").map(|v| parse_num::<usize>("RoomDetails@entryDoor", v)).transpose()?;

        let mut model = SemanticModel { entry_door, ..Default::default() };
        let mut seen_rooms = BTreeSet::new();
        for child in elements(&root) {
            match child.tag_name().name() {
                "Room" => {
                    let room = parse_room(&child)?;
                    if !seen_rooms.insert(room.id) {
                        return Err(parse_err("Room/RoomID", format!("duplicate room id {}", room.id)));
                    }
                    model.rooms.push(room);
                }
                "Doors" => {
                    for d in elements(&child) {
                        if d.tag_name().name() != "Door" {
                            return Err(parse_err(&format!("Doors/{}", d.tag_name().name()), "unknown element"));
                        }
                        model.doors.push(parse_door(&d)?);
                    }
                }
                other => return Err(parse_err(other, "unknown element")),
            }
        }
        model.rooms.sort_by_key(|r| r.id);
        model.doors.sort_by_key(|d| d.id);
        model.validate().map_err(|m| parse_err("RoomDetails", m))?;
        Ok(model)
    }
}

fn elements<'a, 'i>(node: &roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn check_attrs(node: &roxmltree::Node, path: &str, allowed: &[&str]) -> Result<(), ModelError> {
    for a in node.attributes() {
        if !allowed.contains(&a.name()) {
            return Err(parse_err(&format!("{}@{}", path, a.name()), "unknown attribute"));
        }
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(path: &str, s: &str) -> Result<T, ModelError> {
    s.trim().parse::<T>().map_err(|_| parse_err(path, format!("invalid number {s:?}")))
}

fn attr<'a>(node: &roxmltree::Node<'a, '_>, path: &str, name: &str) -> Result<&'a str, ModelError> {
    node.attribute(name).ok_or_else(|| parse_err(&format!("{path}@{name}"), "missing attribute"))
}

fn parse_bbox(node: &roxmltree::Node, path: &str) -> Result<Rect, ModelError> {
    let get = |n: &str| parse_num::<i64>(&format!("{path}@{n}"), attr(node, path, n)?);
    let (x0, y0, x1, y1) = (get("x0")?, get("y0")?, get("x1")?, get("y1")?);
    if x0 > x1 || y0 > y1 {
        return Err(parse_err(path, "inverted bounding box"));
    }
    Ok(Rect::new(x0, y0, x1, y1))
}

fn check_center(node: &roxmltree::Node, path: &str, expected: Point) -> Result<Point, ModelError> {
    let cx = parse_num::<f64>(&format!("{path}@cx"), attr(node, path, "cx")?)?;
    let cy = parse_num::<f64>(&format!("{path}@cy"), attr(node, path, "cy")?)?;
    if cx != expected.x || cy != expected.y {
        return Err(parse_err(path, "centre does not match bounding box"));
    }
    Ok(Point::new(cx, cy))
}

fn parse_room(node: &roxmltree::Node) -> Result<Room, ModelError> {
    check_attrs(node, "Room", &[])?;
    let mut fields: BTreeMap<&str, roxmltree::Node> = BTreeMap::new();
    for c in elements(node) {
        let name = c.tag_name().name();
        const KNOWN: [&str; 7] =
            ["RoomID", "RoomLabel", "RoomArea", "RoomLocation", "RoomCoordinates", "RoomNeighbors", "RoomDecors"];
        if !KNOWN.contains(&name) {
            return Err(parse_err(&format!("Room/{name}"), "unknown element"));
        }
        if fields.insert(name, c).is_some() {
            return Err(parse_err(&format!("Room/{name}"), "repeated element"));
        }
    }
    let field = |name: &str| -> Result<&roxmltree::Node, ModelError> {
        fields.get(name).ok_or_else(|| parse_err(&format!("Room/{name}"), "missing element"))
    };
    let text = |name: &str| -> Result<String, ModelError> { Ok(field(name)?.text().unwrap_or("").trim().to_string()) };

    let id = parse_num::<usize>("Room/RoomID", &text("RoomID")?)?;
    let label = RoomLabel::from_tag(&text("RoomLabel")?)
        .ok_or_else(|| parse_err("Room/RoomLabel", "unknown room label"))?;
    let area_sqft = parse_num::<f64>("Room/RoomArea", &text("RoomArea")?)?;
    let global_dir = Direction8::from_code(&text("RoomLocation")?)
        .ok_or_else(|| parse_err("Room/RoomLocation", "unknown direction"))?;
    let mut polygon = Vec::new();
    for pair in text("RoomCoordinates")?.split_whitespace() {
        let (x, y) = pair.split_once(',').ok_or_else(|| parse_err("Room/RoomCoordinates", "expected x,y"))?;
        polygon.push(Point::new(
            parse_num("Room/RoomCoordinates", x)?,
            parse_num("Room/RoomCoordinates", y)?,
        ));
    }
    let neighbors = text("RoomNeighbors")?
        .split_whitespace()
        .map(|s| parse_num::<usize>("Room/RoomNeighbors", s))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut decors = Vec::new();
    for d in elements(field("RoomDecors")?) {
        if d.tag_name().name() != "Decor" {
            return Err(parse_err(&format!("Room/RoomDecors/{}", d.tag_name().name()), "unknown element"));
        }
        let path = "Room/RoomDecors/Decor";
        check_attrs(&d, path, &["class", "cx", "cy", "dir", "x0", "y0", "x1", "y1"])?;
        let class = DecorClass::from_slug(attr(&d, path, "class")?)
            .ok_or_else(|| parse_err(&format!("{path}@class"), "unknown decor class"))?;
        let dir = Direction8::from_code(attr(&d, path, "dir")?)
            .ok_or_else(|| parse_err(&format!("{path}@dir"), "unknown direction"))?;
        let decor = DecorInstance::new(class, parse_bbox(&d, path)?);
        check_center(&d, path, decor.center())?;
        decors.push(LocatedDecor { decor, dir });
    }
    Ok(Room { id, label, polygon, area_sqft, neighbors, decors, global_dir })
}

fn parse_door(node: &roxmltree::Node) -> Result<Door, ModelError> {
    let path = "Doors/Door";
    check_attrs(node, path, &["id", "cx", "cy", "x0", "y0", "x1", "y1", "rooms"])?;
    let id = parse_num::<usize>(&format!("{path}@id"), attr(node, path, "id")?)?;
    let bbox = parse_bbox(node, path)?;
    let cx = parse_num::<f64>(&format!("{path}@cx"), attr(node, path, "cx")?)?;
    let cy = parse_num::<f64>(&format!("{path}@cy"), attr(node, path, "cy")?)?;
    let mut rooms = attr(node, path, "rooms")?
        .split_whitespace()
        .map(|s| parse_num::<usize>(&format!("{path}@rooms"), s))
        .collect::<Result<Vec<_>, _>>()?;
    rooms.sort_unstable();
    rooms.dedup();
    Ok(Door { id, bbox, centroid: Point::new(cx, cy), rooms })
}
