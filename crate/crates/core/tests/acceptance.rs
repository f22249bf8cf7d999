//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use sugaman::config::Config;
use sugaman::decor::canonical_library;
use sugaman::geometry::{polygon_centroid, BinScheme, Direction8, Point, Polygon};
use sugaman::grammar::{self, rule_patterns};
use sugaman::lofd::{self, compute_lofd, ClassifierKind, Mlp, RoomClassifier, TrainConfig, N_CLASSES};
use sugaman::metrics::{bleu, meteor, rouge_n, tokenize, uniform_weights};
use sugaman::model::{DecorClass, DecorInstance, Door, LocatedDecor, Room, RoomLabel, SemanticModel};
use sugaman::navigation::{build_visibility_graph, route_room, Exit, NavParams, VisibilityGraph};
use sugaman::pipeline::{analyze, segment, Analysis};
use sugaman::raster::{BinaryImage, Rect};
use sugaman::synth::{generate, ground_truth_features, plan_room_count, plan_seed, split_rows, GroundTruth, PlanSpec};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9
}

fn toks(s: &str) -> Vec<String> {
    tokenize(s)
}

fn metrics_oracle() -> Outcome {
    let mut bad = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            bad.push(name.to_string());
        }
    };
    let (c, r) = (toks("the cat sat"), toks("the cat ate"));
    check("rouge-1 recall 2/3", close(rouge_n(&c, &[r.clone()], 1).unwrap().recall, 2.0 / 3.0));
    check("rouge-2 recall 1/2", close(rouge_n(&c, &[r], 2).unwrap().recall, 0.5));
    check("bleu clipping 2/3", close(bleu(&toks("a a a"), &[toks("a a")], &[1.0]).unwrap(), 2.0 / 3.0));
    check("bleu brevity e^-1", close(bleu(&toks("a"), &[toks("a b")], &[1.0]).unwrap(), (-1.0f64).exp()));
    check("meteor 5/6", close(meteor(&toks("a b c"), &toks("a b c")).score, 5.0 / 6.0));
    check("meteor 10/21", close(meteor(&toks("a x b"), &toks("a b")).score, 10.0 / 21.0));
    let text = toks("This floor plan has 5 rooms. There is an entry. Go 6 steps in North direction.");
    for n in 1..=3 {
        let s = rouge_n(&text, &[text.clone()], n).unwrap();
        check(&format!("identical rouge-{n} = 1"), s.recall == 1.0 && s.precision == 1.0 && s.f1 == 1.0);
    }
    for n in 1..=4 {
        check(&format!("identical bleu-{n} = 1"), bleu(&text, &[text.clone()], &uniform_weights(n)).unwrap() == 1.0);
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all oracle examples match".to_string() } else { format!("mismatched: {}", bad.join(", ")) })
}

/// Star-shaped, hence simple, polygon around (100, 100).
fn random_polygon(rng: &mut ChaCha8Rng) -> Polygon {
    let n = rng.gen_range(3..=8);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    let pts = angles
        .iter()
        .map(|a| {
            let r = rng.gen_range(30.0..90.0);
            Point::new(100.0 + r * a.cos(), 100.0 + r * a.sin())
        })
        .collect();
    Polygon::new(pts)
}

fn raster_centroid(p: &Polygon) -> Option<(f64, f64)> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for y in 0..200 {
        for x in 0..200 {
            let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
            if p.contains(&c) {
                sx += c.x;
                sy += c.y;
                n += 1;
            }
        }
    }
    (n > 0).then(|| (sx / n as f64, sy / n as f64))
}

fn geometry_oracle() -> Outcome {
    let square = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]);
    let tri = Polygon::new(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(0.0, 3.0)]);
    let exact = polygon_centroid(&square).unwrap() == (0.5, 0.5, 1.0) && polygon_centroid(&tri).unwrap() == (1.0, 1.0, 4.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut tested = 0;
    while tested < 50 {
        let p = random_polygon(&mut rng);
        if !p.is_simple() || p.area() < 500.0 {
            continue;
        }
        let (cx, cy, _) = polygon_centroid(&p).unwrap();
        let (rx, ry) = raster_centroid(&p).unwrap();
        worst = worst.max((cx - rx).hypot(cy - ry));
        tested += 1;
    }
    outcome(exact && worst <= 0.5, format!("square/triangle exact: {exact}; worst deviation over {tested} polygons {worst:.4} px"))
}

fn brute_lofd(center: &Point, decors: &[DecorInstance]) -> ([usize; N_CLASSES], [f64; N_CLASSES]) {
    let mut counts = [0usize; N_CLASSES];
    let mut sums = [0.0f64; N_CLASSES];
    let mut max = 0.0f64;
    for d in decors {
        max = max.max(center.manhattan(&d.center()));
    }
    for class in DecorClass::ALL {
        for d in decors {
            if d.class == class {
                counts[class.index()] += 1;
                sums[class.index()] += center.manhattan(&d.center());
            }
        }
    }
    let mut dists = [0.0; N_CLASSES];
    if max > 0.0 {
        for i in 0..N_CLASSES {
            if counts[i] > 0 {
                dists[i] = sums[i] / max;
            }
        }
    }
    (counts, dists)
}

fn lofd_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut exact, mut perm, mut scale) = (0, 0, 0);
    for _ in 0..1000 {
        let center = Point::new(rng.gen_range(0..400) as f64, rng.gen_range(0..400) as f64);
        let n = rng.gen_range(0..16);
        let mut decors: Vec<DecorInstance> = (0..n)
            .map(|_| {
                let (x, y) = (rng.gen_range(0..400), rng.gen_range(0..400));
                let class = *DecorClass::ALL.choose(&mut rng).unwrap();
                DecorInstance::new(class, Rect::new(x, y, x + rng.gen_range(0..60), y + rng.gen_range(0..60)))
            })
            .collect();
        let v = compute_lofd(&center, &decors, false);
        let (bc, bd) = brute_lofd(&center, &decors);
        if v.counts.iter().map(|&c| c as usize).eq(bc.iter().copied()) && v.dists == bd {
            exact += 1;
        }
        decors.shuffle(&mut rng);
        let p = compute_lofd(&center, &decors, false);
        if p.counts == v.counts && p.dists.iter().zip(&v.dists).all(|(a, b)| (a - b).abs() <= 1e-12) {
            perm += 1;
        }
        let scaled: Vec<DecorInstance> = decors
            .iter()
            .map(|d| DecorInstance::new(d.class, Rect::new(2 * d.bbox.x0, 2 * d.bbox.y0, 2 * d.bbox.x1, 2 * d.bbox.y1)))
            .collect();
        let s = compute_lofd(&Point::new(2.0 * center.x, 2.0 * center.y), &scaled, false);
        if s.counts == p.counts && s.dists.iter().zip(&p.dists).all(|(a, b)| (a - b).abs() <= 1e-12) {
            scale += 1;
        }
    }
    outcome(
        exact == 1000 && perm == 1000 && scale == 1000,
        format!("exact {exact}/1000, permutation {perm}/1000, scaling {scale}/1000"),
    )
}

fn gt_corpus(n: usize, seed: u64) -> Vec<GroundTruth> {
    (0..n).map(|i| generate(&PlanSpec::new(plan_seed(seed, i), plan_room_count(i))).unwrap().1).collect()
}

fn train_on(gts: &[GroundTruth], kind: ClassifierKind, seed: u64) -> RoomClassifier {
    let (xs, ys): (Vec<_>, Vec<_>) = gts.iter().flat_map(|g| ground_truth_features(g, false)).map(|(v, l)| (v.to_array(), l.code())).unzip();
    lofd::train(&xs, &ys, &TrainConfig::new(kind, seed)).unwrap()
}

fn classifier() -> Outcome {
    let gts = gt_corpus(200, 1);
    let rows: Vec<_> = gts.iter().flat_map(|g| ground_truth_features(g, false)).collect();
    let split = split_rows(rows.len(), 1);
    let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for ((v, l), t) in rows.iter().zip(&split) {
        if *t {
            xtr.push(v.to_array());
            ytr.push(l.code());
        } else {
            xte.push(v.to_array());
            yte.push(l.code());
        }
    }
    let mut detail = format!("{} plans, {} rooms;", gts.len(), rows.len());
    let mut pass = rows.len() >= 800;
    for kind in [ClassifierKind::Ovo, ClassifierKind::Mlp] {
        let clf = lofd::train(&xtr, &ytr, &TrainConfig::new(kind, 1)).unwrap();
        let acc = lofd::accuracy(&yte, &clf.predict(&xte));
        pass &= acc >= 0.90;
        detail.push_str(&format!(" {} test accuracy {:.4};", kind.name(), acc));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mlp = Mlp::random(&mut rng);
    let (xs, ys) = (&xtr[..40], &ytr[..40]);
    let analytic = mlp.gradient(xs, ys).params();
    let base = mlp.params();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..base.len() {
        let mut p = base.clone();
        let mut m = mlp.clone();
        p[i] = base[i] + h;
        m.set_params(&p);
        let up = m.loss(xs, ys);
        p[i] = base[i] - h;
        m.set_params(&p);
        let down = m.loss(xs, ys);
        worst = worst.max(((up - down) / (2.0 * h) - analytic[i]).abs());
    }
    pass &= worst <= 1e-5;
    detail.push_str(&format!(" gradient max deviation {worst:.2e}"));
    outcome(pass, detail)
}

fn plan(i: usize, seed: u64) -> (BinaryImage, GroundTruth) {
    generate(&PlanSpec::new(plan_seed(seed, i), plan_room_count(i))).unwrap()
}

/// Shortest simple path by enumeration; ties go to the smaller sequence.
fn exhaustive(g: &VisibilityGraph, from: usize, to: usize) -> Option<(f64, Vec<usize>)> {
    fn go(g: &VisibilityGraph, path: &mut Vec<usize>, to: usize, len: f64, best: &mut Option<(f64, Vec<usize>)>) {
        let u = *path.last().unwrap();
        if u == to {
            let better = match best {
                None => true,
                Some((bl, bp)) => len < *bl - 1e-9 || ((len - *bl).abs() <= 1e-9 && *path < *bp),
            };
            if better {
                *best = Some((len, path.clone()));
            }
            return;
        }
        for v in 0..g.len() {
            if g.weights[u][v] > 0.0 && !path.contains(&v) {
                path.push(v);
                go(g, path, to, len + g.weights[u][v], best);
                path.pop();
            }
        }
    }
    let mut best = None;
    go(g, &mut vec![from], to, 0.0, &mut best);
    best
}

fn oracle_agrees(g: &VisibilityGraph) -> (usize, usize) {
    let (mut ok, mut total) = (0, 0);
    for a in 0..g.len() {
        for b in 0..g.len() {
            total += 1;
            let got = route_room(g, a, b);
            let want = exhaustive(g, a, b);
            let same = match (&got, &want) {
                (None, None) => true,
                (Some(p), Some((len, q))) => p == q && (g.path_length(p) - len).abs() <= 1e-9,
                _ => false,
            };
            ok += usize::from(same);
        }
    }
    (ok, total)
}

fn other_room(model: &SemanticModel, door: usize, room: usize) -> Option<usize> {
    model.door(door)?.rooms.iter().copied().find(|&r| r != room)
}

fn navigation(clf: &RoomClassifier) -> Outcome {
    let cfg = Config::default();
    let lib = canonical_library();
    let params = NavParams::default();
    let (mut segs, mut clear, mut plans_ok, mut chained) = (0, 0, 0, 0);
    let (mut small_rooms, mut oracle_ok, mut oracle_total) = (0, 0, 0);
    let mut failures = Vec::new();
    for i in 0..50 {
        let (img, _) = plan(i, 2);
        let a = match analyze(&img, clf, &lib, &cfg) {
            Ok(a) => a,
            Err(e) => {
                failures.push(format!("plan {i}: {e}"));
                continue;
            }
        };
        for r in &a.traversal.routes {
            let space = &a.spaces[&r.room];
            for w in r.waypoints.windows(2) {
                segs += 1;
                clear += usize::from(space.segment_clear(&w[0], &w[1]));
            }
        }
        if a.traversal.visited_rooms().len() == a.model.rooms.len() {
            plans_ok += 1;
        }
        let routes = &a.traversal.routes;
        let linked = routes.windows(2).all(|w| {
            let (cur, next) = (&w[0], &w[1]);
            match cur.exit {
                Exit::Door(d) => next.entry_door == d && other_room(&a.model, d, cur.room) == Some(next.room),
                Exit::Back => next.entry_door == cur.entry_door && other_room(&a.model, cur.entry_door, cur.room) == Some(next.room),
                Exit::End => false,
            }
        });
        chained += usize::from(linked && routes.first().map(|r| Some(r.entry_door) == a.model.entry_door).unwrap_or(false));
        for room in &a.model.rooms {
            let doors: Vec<Point> = a.model.doors.iter().filter(|d| d.rooms.contains(&room.id)).map(|d| d.centroid).collect();
            let decors: Vec<DecorInstance> = room.decors.iter().map(|l| l.decor).collect();
            let space = &a.spaces[&room.id];
            let g = build_visibility_graph(space, &decors, &doors, &params);
            if g.len() <= 8 {
                small_rooms += 1;
                let (o, t) = oracle_agrees(&g);
                oracle_ok += o;
                oracle_total += t;
            }
            // every room also contributes its first eight vertices as a
            // small graph, so the oracle always gets exercised
            let sub = VisibilityGraph::from_vertices(space, g.vertices.iter().take(8).copied().collect());
            let (o, t) = oracle_agrees(&sub);
            oracle_ok += o;
            oracle_total += t;
        }
    }
    let pass = failures.is_empty() && segs > 0 && clear == segs && plans_ok == 50 && chained == 50 && oracle_ok == oracle_total;
    let mut detail = format!(
        "{clear}/{segs} segments collision-free; {plans_ok}/50 plans visit every room; {chained}/50 door chains consistent; \
         oracle {oracle_ok}/{oracle_total} vertex pairs ({small_rooms} rooms with |V_L| <= 8 plus 8-vertex subgraphs)"
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; errors: {}", failures.join("; ")));
    }
    outcome(pass, detail)
}

fn segmentation() -> Outcome {
    let cfg = Config::default();
    let (mut plans_ok, mut hits, mut total) = (0, 0, 0);
    let mut worst_centroid = 0.0f64;
    for i in 0..100 {
        let (img, gt) = plan(i, 3);
        let Ok(layout) = segment(&img, &cfg) else { continue };
        let mut good = layout.regions.len() == gt.rooms.len();
        for g in &gt.rooms {
            let inner = Rect::new(g.interior[0], g.interior[1], g.interior[2], g.interior[3]);
            let (cx, cy) = inner.center();
            let found = layout.regions.iter().find(|r| {
                let (x, y) = (cx as i64 - r.bbox.x0, cy as i64 - r.bbox.y0);
                r.bbox.contains(cx as i64, cy as i64) && r.mask.at(x, y)
            });
            match found {
                Some(r) if (r.pixel_area as f64 - g.area_px as f64).abs() <= 0.05 * g.area_px as f64 => {}
                _ => good = false,
            }
        }
        plans_ok += usize::from(good);
        for d in &gt.doors {
            total += 1;
            let nearest = layout
                .doors
                .iter()
                .map(|c| (c.centroid.x - d.centroid[0]).hypot(c.centroid.y - d.centroid[1]))
                .fold(f64::INFINITY, f64::min);
            if nearest <= 3.0 {
                hits += 1;
                worst_centroid = worst_centroid.max(nearest);
            }
        }
    }
    let recall = hits as f64 / total as f64;
    outcome(
        plans_ok >= 95 && recall >= 0.95,
        format!("{plans_ok}/100 plans with exact room count and areas within 5%; door recall {recall:.4} ({hits}/{total}), worst matched centroid error {worst_centroid:.2} px"),
    )
}

fn grammar_conformance(clf: &RoomClassifier) -> Outcome {
    let cfg = Config::default();
    let lib = canonical_library();
    let patterns: Vec<(&str, Regex)> = rule_patterns().into_iter().map(|(id, p)| (id, Regex::new(&p).unwrap())).collect();
    let (mut sentences, mut conforming, mut law_ok, mut deterministic) = (0, 0, 0, 0);
    let mut offenders = Vec::new();
    for i in 0..50 {
        let (img, _) = plan(i, 4);
        let Ok(a) = analyze(&img, clf, &lib, &cfg) else {
            offenders.push(format!("plan {i} failed to analyse"));
            continue;
        };
        for s in a.description.gd.iter().chain(&a.description.nv) {
            sentences += 1;
            let n = patterns.iter().filter(|(_, re)| re.is_match(s)).count();
            if n == 1 {
                conforming += 1;
            } else if offenders.len() < 5 {
                offenders.push(format!("{s:?} matches {n} rules"));
            }
        }
        let rooms = &a.model.rooms;
        let expected = 1 + 5 * rooms.len()
            - rooms.iter().filter(|r| r.decors.is_empty()).count()
            - rooms.iter().filter(|r| r.neighbors.is_empty()).count();
        law_ok += usize::from(a.description.gd.len() == expected);
        let again: Analysis = analyze(&img, clf, &lib, &cfg).unwrap();
        deterministic += usize::from(grammar::render(&again.description) == grammar::render(&a.description));
    }
    let mut detail =
        format!("{conforming}/{sentences} sentences match exactly one rule; count law {law_ok}/50; deterministic renders {deterministic}/50");
    if !offenders.is_empty() {
        detail.push_str(&format!("; {}", offenders.join("; ")));
    }
    outcome(sentences > 0 && conforming == sentences && law_ok == 50 && deterministic == 50, detail)
}

fn random_model(rng: &mut ChaCha8Rng) -> SemanticModel {
    let n = rng.gen_range(1..=6);
    let mut rooms: Vec<Room> = (1..=n)
        .map(|id| {
            let (x0, y0) = (rng.gen_range(0..500) as f64, rng.gen_range(0..500) as f64);
            let (w, h) = (rng.gen_range(60..200) as f64, rng.gen_range(60..200) as f64);
            let decors = (0..rng.gen_range(0..4))
                .map(|_| {
                    let x = x0 as i64 + rng.gen_range(5..40);
                    let y = y0 as i64 + rng.gen_range(5..40);
                    LocatedDecor {
                        decor: DecorInstance::new(*DecorClass::ALL.choose(rng).unwrap(), Rect::new(x, y, x + rng.gen_range(0..15), y + rng.gen_range(0..15))),
                        dir: *Direction8::ALL.choose(rng).unwrap(),
                    }
                })
                .collect();
            Room {
                id,
                label: *RoomLabel::ALL.choose(rng).unwrap(),
                polygon: vec![Point::new(x0, y0), Point::new(x0 + w + 0.5, y0), Point::new(x0 + w + 0.5, y0 + h), Point::new(x0, y0 + h)],
                area_sqft: rng.gen_range(1..100_000) as f64 / 100.0,
                neighbors: BTreeSet::new(),
                decors,
                global_dir: *Direction8::ALL.choose(rng).unwrap(),
            }
        })
        .collect();
    let mut doors = Vec::new();
    for id in 1..=rng.gen_range(0..5) {
        let a = rng.gen_range(1..=n);
        let mut rs = vec![a];
        if n > 1 && rng.gen_bool(0.6) {
            let b = (a % n) + 1;
            rs.push(b);
            rooms[a - 1].neighbors.insert(b);
            rooms[b - 1].neighbors.insert(a);
            rs.sort_unstable();
        }
        let (x, y) = (rng.gen_range(0..570), rng.gen_range(0..570));
        let bbox = Rect::new(x, y, x + 23, y + 27);
        let (cx, cy) = bbox.center();
        doors.push(Door { id, bbox, centroid: Point::new(cx, cy), rooms: rs });
    }
    let entry_door = if doors.is_empty() { None } else { Some(rng.gen_range(1..=doors.len())) };
    SemanticModel { rooms, doors, entry_door }
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn xml_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ok = 0;
    for _ in 0..100 {
        let m = random_model(&mut rng);
        let bytes = m.to_xml().unwrap();
        if SemanticModel::from_xml(&bytes).ok().as_ref() == Some(&m) {
            ok += 1;
        }
    }
    let bless = std::env::var_os("SUGAMAN_BLESS").is_some();
    let mut golden_ok = 0;
    let mut notes = Vec::new();
    for seed in [1u64, 2, 3] {
        let (_, gt) = generate(&PlanSpec::new(seed, 5)).unwrap();
        let bytes = gt.semantic_model(100.0, &BinScheme::nonuniform()).to_xml().unwrap();
        let path = golden_dir().join(format!("plan_{seed}.xml"));
        if bless {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&path, &bytes).unwrap();
        }
        match std::fs::read(&path) {
            Ok(want) if want == bytes => golden_ok += 1,
            Ok(_) => notes.push(format!("{} differs", path.display())),
            Err(e) => notes.push(format!("{}: {e}", path.display())),
        }
    }
    let mut detail = format!("{ok}/100 random models field-equal after round trip; {golden_ok}/3 golden files byte-equal");
    if !notes.is_empty() {
        detail.push_str(&format!("; {}", notes.join("; ")));
    }
    outcome(ok == 100 && golden_ok == 3, detail)
}

fn end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_sugaman");
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let run = |args: &[&str]| Command::new(bin).args(args).env_remove("SUGAMAN_CONFIG").output().unwrap();
    let synth = run(&["synth", "50", "--seed", "1", "--out", corpus.to_str().unwrap()]);
    if !synth.status.success() {
        return outcome(false, format!("synth failed: {}", String::from_utf8_lossy(&synth.stderr)));
    }
    let model = dir.path().join("model.txt");
    let train = run(&["train", corpus.to_str().unwrap(), "--seed", "1", "--model", model.to_str().unwrap()]);
    if !train.status.success() {
        return outcome(false, format!("train failed: {}", String::from_utf8_lossy(&train.stderr)));
    }
    let s1 = Regex::new(r"^This floor plan has ([0-9]+) rooms?\.$").unwrap();
    let mut ok = 0;
    let mut notes = Vec::new();
    for i in 1..=50 {
        let png = corpus.join("plans").join(format!("{i:04}.png"));
        let gt = GroundTruth::from_json(&std::fs::read_to_string(corpus.join("plans").join(format!("{i:04}.json"))).unwrap()).unwrap();
        let out = run(&["describe", png.to_str().unwrap(), "--model", model.to_str().unwrap()]);
        let text = String::from_utf8_lossy(&out.stdout);
        let count = text.lines().nth(1).and_then(|l| s1.captures(l)).and_then(|c| c[1].parse::<usize>().ok());
        if out.status.success() && count == Some(gt.rooms.len()) {
            ok += 1;
        } else if notes.len() < 3 {
            notes.push(format!("plan {i}: got {count:?}, want {} ({})", gt.rooms.len(), String::from_utf8_lossy(&out.stderr).trim()));
        }
    }
    let mut detail = format!("{ok}/50 descriptions state the true room count");
    if !notes.is_empty() {
        detail.push_str(&format!("; {}", notes.join("; ")));
    }
    outcome(ok == 50, detail)
}

fn main() {
    // a classifier for the criteria that need labelled rooms
    let clf = train_on(&gt_corpus(60, 99), ClassifierKind::Ovo, 1);
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        ("metrics oracle", Duration::from_secs(1), Box::new(metrics_oracle)),
        ("geometry oracle", Duration::from_secs(10), Box::new(geometry_oracle)),
        ("lofd oracle", Duration::from_secs(5), Box::new(lofd_oracle)),
        ("classifier", Duration::from_secs(120), Box::new(classifier)),
        ("navigation", Duration::from_secs(60), Box::new(|| navigation(&clf))),
        ("segmentation", Duration::from_secs(120), Box::new(segmentation)),
        ("grammar conformance", Duration::from_secs(30), Box::new(|| grammar_conformance(&clf))),
        ("xml round trip", Duration::from_secs(60), Box::new(xml_round_trip)),
        ("end to end", Duration::from_secs(300), Box::new(end_to_end)),
    ];
    let mut failed = 0;
    for (name, limit, check) in &criteria {
        let t = Instant::now();
        let o = check();
        let took = t.elapsed();
        let pass = o.pass && took <= *limit;
        failed += usize::from(!pass);
        println!(
            "{} {name}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
