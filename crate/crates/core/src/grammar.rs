//! Sentence templates turning a semantic model and its traversal into a
//! general description and navigation directions.

use thiserror::Error;

use crate::geometry::{bin_direction, BinScheme, Direction8, Point};
use crate::model::{DecorClass, SemanticModel};
use crate::navigation::{Exit, TraversalPlan};

#[derive(Debug, Error, PartialEq)]
pub enum GrammarError {
    #[error("room {0} has no polygon to describe")]
    MissingGeometry(usize),
    #[error("room {room} lists unknown neighbour {neighbor}")]
    UnknownNeighbor { room: usize, neighbor: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Description {
    pub gd: Vec<String>,
    pub nv: Vec<String>,
}

pub const GD_HEADER: &str = "GENERAL DESCRIPTION";
pub const NV_HEADER: &str = "NAVIGATION";

const ROOM_NAMES: &str = "bedroom|bathroom|entry|kitchen|hall";
const DIRS: &str = "North|North East|East|South East|South|South West|West|North West";
const DECOR_NAMES: &str =
    "bed|sofa|large sofa|table|chair|sink|twin sink|large sink|tub|stove|wardrobe|toilet";

/// Surface pattern of each sentence rule, `(rule id, regex)`.
pub fn rule_patterns() -> Vec<(&'static str, String)> {
    let decor = format!("[0-9]+ ({DECOR_NAMES})s? at the ({DIRS})");
    vec![
        ("S1", r"^This floor plan has [0-9]+ rooms?\.$".to_string()),
        ("S2", format!(r"^There is (a|an) ({ROOM_NAMES})\.$")),
        ("S3", r"^It has an area of [0-9]+\.[0-9]{2} square feet\.$".to_string()),
        (
            "S4",
            format!(r"^Its neighboring (room is ({ROOM_NAMES})|rooms are ({ROOM_NAMES})(, ({ROOM_NAMES}))* and ({ROOM_NAMES}))\.$"),
        ),
        ("S5", format!(r"^It is located in the ({DIRS})\.$")),
        ("S6", format!(r"^This room has {decor}(, {decor})*\.$")),
        ("S7", format!(r"^Go [0-9]+ steps? in ({DIRS}) direction\.$")),
        ("S8", r"^There is a door and a room\.$".to_string()),
        ("S9", r"^You have to turn back\.$".to_string()),
    ]
}

fn plural(word: &str, n: usize) -> String {
    if n > 1 {
        format!("{word}s")
    } else {
        word.to_string()
    }
}

fn determiner(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn join_and(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// S1 once, then per room (ascending id) S2 to S5, and S6 when the room
/// holds decors. S4 is left out for a room without neighbours.
pub fn synthesize_gd(model: &SemanticModel) -> Result<Vec<String>, GrammarError> {
    let n = model.rooms.len();
    let mut out = vec![format!("This floor plan has {n} {}.", plural("room", n))];
    let mut rooms: Vec<_> = model.rooms.iter().collect();
    rooms.sort_by_key(|r| r.id);
    for room in rooms {
        if room.polygon.len() < 3 {
            return Err(GrammarError::MissingGeometry(room.id));
        }
        let name = room.label.name();
        out.push(format!("There is {} {name}.", determiner(name)));
        out.push(format!("It has an area of {:.2} square feet.", room.area_sqft));
        let mut names = Vec::new();
        for &nb in &room.neighbors {
            let other = model.room(nb).ok_or(GrammarError::UnknownNeighbor { room: room.id, neighbor: nb })?;
            names.push(other.label.name());
        }
        match names.len() {
            0 => {}
            1 => out.push(format!("Its neighboring room is {}.", names[0])),
            _ => out.push(format!("Its neighboring rooms are {}.", join_and(&names))),
        }
        out.push(format!("It is located in the {}.", room.global_dir.name()));
        let mut classes: Vec<(DecorClass, usize, Direction8)> = Vec::new();
        for d in &room.decors {
            match classes.iter_mut().find(|(c, _, _)| *c == d.decor.class) {
                Some(entry) => entry.1 += 1,
                None => classes.push((d.decor.class, 1, d.dir)),
            }
        }
        if !classes.is_empty() {
            let clauses: Vec<String> = classes
                .iter()
                .map(|(c, k, dir)| format!("{k} {} at the {}", plural(&c.name(), *k), dir.name()))
                .collect();
            out.push(format!("This room has {}.", clauses.join(", ")));
        }
    }
    Ok(out)
}

/// Steps for a move of `length` px: half-up rounding, at least one.
pub fn steps(length: f64, step_px: f64) -> usize {
    ((length / step_px + 0.5).floor() as usize).max(1)
}

fn go(a: &Point, b: &Point, step_px: f64, scheme: &BinScheme) -> Option<String> {
    let dir = bin_direction(a, b, scheme).ok()?;
    let n = steps(a.dist(b), step_px);
    Some(format!("Go {n} {} in {} direction.", plural("step", n), dir.name()))
}

/// One S7 per route segment. A route that turns back gets S9 at the turn;
/// S8 separates consecutive routes.
pub fn synthesize_nv(plan: &TraversalPlan, step_px: f64, scheme: &BinScheme) -> Vec<String> {
    let mut out = Vec::new();
    for (k, route) in plan.routes.iter().enumerate() {
        let w = &route.waypoints;
        let turn = match route.exit {
            Exit::Back => route.turn_index,
            _ => None,
        };
        for i in 1..w.len() {
            if turn == Some(i - 1) {
                out.push("You have to turn back.".to_string());
            }
            out.extend(go(&w[i - 1], &w[i], step_px, scheme));
        }
        if turn.is_some() && turn == Some(w.len() - 1) {
            out.push("You have to turn back.".to_string());
        }
        if k + 1 < plan.routes.len() {
            out.push("There is a door and a room.".to_string());
        }
    }
    out
}

/// Headed sections, one sentence per line. The navigation section is left
/// out when there are no directions.
pub fn render(d: &Description) -> String {
    let mut s = String::new();
    s.push_str(GD_HEADER);
    s.push('\n');
    for line in &d.gd {
        s.push_str(line);
        s.push('\n');
    }
    if !d.nv.is_empty() {
        s.push('\n');
        s.push_str(NV_HEADER);
        s.push('\n');
        for line in &d.nv {
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::model::{DecorInstance, LocatedDecor, Room, RoomLabel};
    use crate::navigation::Route;
    use crate::raster::Rect;

    fn room(id: usize, label: RoomLabel, neighbors: &[usize]) -> Room {
        Room {
            id,
            label,
            polygon: vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)],
            area_sqft: 25.5,
            neighbors: neighbors.iter().copied().collect::<BTreeSet<_>>(),
            decors: Vec::new(),
            global_dir: Direction8::NW,
        }
    }

    fn matching_rules(s: &str) -> Vec<&'static str> {
        rule_patterns()
            .into_iter()
            .filter(|(_, p)| regex::Regex::new(p).unwrap().is_match(s))
            .map(|(id, _)| id)
            .collect()
    }

    #[test]
    fn general_description() {
        let mut hall = room(2, RoomLabel::Hall, &[1, 3]);
        let chair = |x| LocatedDecor { decor: DecorInstance::new(DecorClass::Chair, Rect::new(x, 0, x + 5, 5)), dir: Direction8::NE };
        hall.decors = vec![
            chair(0),
            LocatedDecor { decor: DecorInstance::new(DecorClass::LargeSofa, Rect::new(0, 0, 5, 5)), dir: Direction8::S },
            chair(6),
        ];
        let model = SemanticModel {
            rooms: vec![room(1, RoomLabel::Entry, &[2]), hall, room(3, RoomLabel::Kitchen, &[2])],
            doors: Vec::new(),
            entry_door: None,
        };
        let gd = synthesize_gd(&model).unwrap();
        assert_eq!(gd[0], "This floor plan has 3 rooms.");
        assert_eq!(gd[1], "There is an entry.");
        assert_eq!(gd[2], "It has an area of 25.50 square feet.");
        assert_eq!(gd[3], "Its neighboring room is hall.");
        assert_eq!(gd[4], "It is located in the North West.");
        assert_eq!(gd[5], "There is a hall.");
        assert_eq!(gd[7], "Its neighboring rooms are entry and kitchen.");
        assert_eq!(gd[9], "This room has 2 chairs at the North East, 1 large sofa at the South.");
        assert_eq!(gd.len(), 1 + 5 * 3 - 2);
        for s in &gd {
            assert_eq!(matching_rules(s).len(), 1, "{s}");
        }
    }

    #[test]
    fn step_rounding() {
        assert_eq!(steps(57.0, 10.0), 6);
        assert_eq!(steps(55.0, 10.0), 6);
        assert_eq!(steps(54.9, 10.0), 5);
        assert_eq!(steps(2.0, 10.0), 1);
        let s = go(&Point::new(0.0, 57.0), &Point::new(0.0, 0.0), 10.0, &BinScheme::nonuniform()).unwrap();
        assert_eq!(s, "Go 6 steps in North direction.");
    }

    fn route(room: usize, exit: Exit, pts: &[(f64, f64)], turn: Option<usize>) -> Route {
        Route {
            room,
            entry_door: 1,
            exit,
            dead_end: exit == Exit::Back,
            revisit: false,
            waypoints: pts.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            turn_index: turn,
        }
    }

    #[test]
    fn navigation_sentences() {
        let plan = TraversalPlan {
            order: vec![(1, None), (2, Some(1))],
            routes: vec![
                route(1, Exit::Door(2), &[(0.0, 0.0), (30.0, 0.0), (30.0, 30.0)], None),
                route(2, Exit::Back, &[(30.0, 30.0), (30.0, 60.0), (30.0, 30.0)], Some(1)),
            ],
        };
        let nv = synthesize_nv(&plan, 10.0, &BinScheme::nonuniform());
        assert_eq!(
            nv,
            vec![
                "Go 3 steps in East direction.",
                "Go 3 steps in South direction.",
                "There is a door and a room.",
                "Go 3 steps in South direction.",
                "You have to turn back.",
                "Go 3 steps in North direction.",
            ]
        );
        for s in &nv {
            assert_eq!(matching_rules(s).len(), 1, "{s}");
        }
        // a route that starts and ends on the same door narrates no move
        let still = TraversalPlan {
            order: vec![(1, None), (2, Some(1))],
            routes: vec![route(1, Exit::Door(2), &[(5.0, 5.0)], None), route(2, Exit::End, &[(5.0, 5.0), (5.0, 25.0)], None)],
        };
        assert_eq!(synthesize_nv(&still, 10.0, &BinScheme::nonuniform())[0], "There is a door and a room.");
    }

    #[test]
    fn render_layout() {
        let d = Description { gd: vec!["This floor plan has 1 room.".into()], nv: Vec::new() };
        assert_eq!(render(&d), "GENERAL DESCRIPTION\nThis floor plan has 1 room.\n");
        let d = Description { gd: d.gd.clone(), nv: vec!["You have to turn back.".into()] };
        assert_eq!(
            render(&d),
            "GENERAL DESCRIPTION\nThis floor plan has 1 room.\n\nNAVIGATION\nYou have to turn back.\n"
        );
    }

    #[test]
    fn sentences_match_one_rule_only() {
        for s in ["There is a door and a room.", "There is a bedroom.", "Go 1 step in South West direction."] {
            assert_eq!(matching_rules(s).len(), 1, "{s}");
        }
        assert!(matching_rules("There is a garage.").is_empty());
    }
}
