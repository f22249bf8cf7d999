//! LOFD room features and the room classifiers trained on them.
//!
//! A room's LOFD vector holds per-class decor counts followed by per-class
//! summed Manhattan distances from the room centre, normalised by the largest
//! single-instance distance.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::Point;
use crate::model::{DecorClass, DecorInstance, RoomLabel};

pub const N_CLASSES: usize = 12;
pub const N_FEATURES: usize = 24;
pub const N_LABELS: usize = 5;
/// Counts are divided by this before training and prediction.
pub const COUNT_SCALE: f64 = 10.0;

#[derive(Debug, Error, PartialEq)]
pub enum LofdError {
    #[error("training error: {0}")]
    Training(String),
    #[error("malformed model file at line {line}: {message}")]
    Model { line: usize, message: String },
    #[error("malformed feature csv at line {line}: {message}")]
    Csv { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LofdVector {
    pub counts: [u32; N_CLASSES],
    pub dists: [f64; N_CLASSES],
}

impl LofdVector {
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        let mut out = [0.0; N_FEATURES];
        for c in 0..N_CLASSES {
            out[c] = self.counts[c] as f64;
            out[N_CLASSES + c] = self.dists[c];
        }
        out
    }

    pub fn from_array(a: &[f64; N_FEATURES]) -> Self {
        let mut v = LofdVector::default();
        for c in 0..N_CLASSES {
            v.counts[c] = a[c].round().max(0.0) as u32;
            v.dists[c] = a[N_CLASSES + c];
        }
        v
    }
}

/// LOFD of one room. With `mean_distance` the per-class sum is divided by
/// the class count as well.
pub fn compute_lofd(room_center: &Point, decors: &[DecorInstance], mean_distance: bool) -> LofdVector {
    let mut v = LofdVector::default();
    let mut raw = [0.0f64; N_CLASSES];
    let mut max = 0.0f64;
    for d in decors {
        let dist = room_center.manhattan(&d.center());
        let c = d.class.index();
        v.counts[c] += 1;
        raw[c] += dist;
        max = max.max(dist);
    }
    if max > 0.0 {
        for c in 0..N_CLASSES {
            if v.counts[c] > 0 {
                let k = if mean_distance { v.counts[c] as f64 } else { 1.0 };
                v.dists[c] = raw[c] / (k * max);
            }
        }
    }
    v
}

fn scaled(x: &[f64; N_FEATURES]) -> [f64; N_FEATURES] {
    let mut out = *x;
    for v in &mut out[..N_CLASSES] {
        *v /= COUNT_SCALE;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Ovo,
    Mlp,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Ovo => "ovo",
            ClassifierKind::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Option<ClassifierKind> {
        match s {
            "ovo" | "svm" => Some(ClassifierKind::Ovo),
            "mlp" => Some(ClassifierKind::Mlp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub kind: ClassifierKind,
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// SVM regularisation strength.
    pub lambda: f64,
    /// Fail when a label is missing from the training data.
    pub require_all_classes: bool,
}

impl TrainConfig {
    pub fn new(kind: ClassifierKind, seed: u64) -> Self {
        match kind {
            ClassifierKind::Ovo => TrainConfig {
                kind,
                seed,
                epochs: 100,
                learning_rate: 0.0,
                lambda: 1e-3,
                require_all_classes: true,
            },
            ClassifierKind::Mlp => TrainConfig {
                kind,
                seed,
                epochs: 3000,
                learning_rate: 0.5,
                lambda: 0.0,
                require_all_classes: true,
            },
        }
    }
}

/// One linear separator of class `pos` (+1) against `neg` (-1).
#[derive(Debug, Clone, PartialEq)]
pub struct Separator {
    pub pos: u8,
    pub neg: u8,
    /// False when one of the two classes had no training samples.
    pub active: bool,
    pub w: [f64; N_FEATURES],
    pub b: f64,
}

impl Separator {
    pub fn decision(&self, x: &[f64; N_FEATURES]) -> f64 {
        self.w.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// Hidden weights, 10 x 24.
    pub w1: Vec<[f64; N_FEATURES]>,
    pub b1: Vec<f64>,
    /// Output weights, 5 x 10.
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
}

pub const HIDDEN: usize = 10;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl Mlp {
    pub fn zeros() -> Mlp {
        Mlp {
            w1: vec![[0.0; N_FEATURES]; HIDDEN],
            b1: vec![0.0; HIDDEN],
            w2: vec![vec![0.0; HIDDEN]; N_LABELS],
            b2: vec![0.0; N_LABELS],
        }
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Mlp {
        let mut m = Mlp::zeros();
        let a1 = (6.0 / (N_FEATURES + HIDDEN) as f64).sqrt();
        let a2 = (6.0 / (HIDDEN + N_LABELS) as f64).sqrt();
        for row in &mut m.w1 {
            for v in row.iter_mut() {
                *v = rng.gen_range(-a1..a1);
            }
        }
        for row in &mut m.w2 {
            for v in row.iter_mut() {
                *v = rng.gen_range(-a2..a2);
            }
        }
        m
    }

    fn hidden(&self, x: &[f64; N_FEATURES]) -> [f64; HIDDEN] {
        let mut h = [0.0; HIDDEN];
        for (j, hj) in h.iter_mut().enumerate() {
            let z: f64 = self.w1[j].iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.b1[j];
            *hj = sigmoid(z);
        }
        h
    }

    /// Softmax class probabilities, index = label code - 1.
    pub fn probabilities(&self, x: &[f64; N_FEATURES]) -> [f64; N_LABELS] {
        let h = self.hidden(x);
        let mut z = [0.0; N_LABELS];
        for (k, zk) in z.iter_mut().enumerate() {
            *zk = self.w2[k].iter().zip(&h).map(|(w, h)| w * h).sum::<f64>() + self.b2[k];
        }
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut p = z.map(|v| (v - m).exp());
        let s: f64 = p.iter().sum();
        for v in &mut p {
            *v /= s;
        }
        p
    }

    /// Mean cross-entropy over the samples; labels are 1-5.
    pub fn loss(&self, xs: &[[f64; N_FEATURES]], ys: &[u8]) -> f64 {
        xs.iter().zip(ys).map(|(x, &y)| -self.probabilities(x)[y as usize - 1].max(1e-300).ln()).sum::<f64>()
            / xs.len() as f64
    }

    /// Gradient of [`Mlp::loss`] with respect to every parameter.
    pub fn gradient(&self, xs: &[[f64; N_FEATURES]], ys: &[u8]) -> Mlp {
        let mut g = Mlp::zeros();
        let n = xs.len() as f64;
        for (x, &y) in xs.iter().zip(ys) {
            let h = self.hidden(x);
            let mut delta2 = self.probabilities(x);
            delta2[y as usize - 1] -= 1.0;
            for k in 0..N_LABELS {
                g.b2[k] += delta2[k] / n;
                for j in 0..HIDDEN {
                    g.w2[k][j] += delta2[k] * h[j] / n;
                }
            }
            for j in 0..HIDDEN {
                let back: f64 = (0..N_LABELS).map(|k| delta2[k] * self.w2[k][j]).sum();
                let d1 = back * h[j] * (1.0 - h[j]);
                g.b1[j] += d1 / n;
                for (i, xi) in x.iter().enumerate() {
                    g.w1[j][i] += d1 * xi / n;
                }
            }
        }
        g
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::new();
        for row in &self.w1 {
            p.extend_from_slice(row);
        }
        p.extend_from_slice(&self.b1);
        for row in &self.w2 {
            p.extend_from_slice(row);
        }
        p.extend_from_slice(&self.b2);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        let mut it = p.iter().cloned();
        for row in &mut self.w1 {
            for v in row.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        for v in &mut self.b1 {
            *v = it.next().unwrap();
        }
        for row in &mut self.w2 {
            for v in row.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        for v in &mut self.b2 {
            *v = it.next().unwrap();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierParams {
    Ovo(Vec<Separator>),
    Mlp(Mlp),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomClassifier {
    pub seed: u64,
    pub params: ClassifierParams,
}

impl RoomClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self.params {
            ClassifierParams::Ovo(_) => ClassifierKind::Ovo,
            ClassifierParams::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    pub fn predict_one(&self, x: &[f64; N_FEATURES]) -> RoomLabel {
        let x = scaled(x);
        let code = match &self.params {
            ClassifierParams::Ovo(seps) => {
                let mut votes = [0u32; N_LABELS];
                for s in seps.iter().filter(|s| s.active) {
                    let winner = if s.decision(&x) >= 0.0 { s.pos } else { s.neg };
                    votes[winner as usize - 1] += 1;
                }
                // ties go to the lowest code
                let mut best = 0;
                for k in 1..N_LABELS {
                    if votes[k] > votes[best] {
                        best = k;
                    }
                }
                best as u8 + 1
            }
            ClassifierParams::Mlp(m) => {
                let p = m.probabilities(&x);
                let mut best = 0;
                for k in 1..N_LABELS {
                    if p[k] > p[best] {
                        best = k;
                    }
                }
                best as u8 + 1
            }
        };
        RoomLabel::from_code(code).unwrap()
    }

    pub fn predict(&self, features: &[[f64; N_FEATURES]]) -> Vec<RoomLabel> {
        features.iter().map(|x| self.predict_one(x)).collect()
    }

    /// Plain-text model: a header then weight rows with nine decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let row = |s: &mut String, vals: &[f64]| {
            let parts: Vec<String> = vals.iter().map(|v| format!("{:.9}", v)).collect();
            s.push_str(&parts.join(" "));
            s.push('\n');
        };
        writeln!(s, "sugaman-room-classifier").unwrap();
        writeln!(s, "kind {}", self.kind().name()).unwrap();
        writeln!(s, "seed {}", self.seed).unwrap();
        writeln!(s, "dims {} {}", N_FEATURES, N_LABELS).unwrap();
        writeln!(s, "count_scale {}", COUNT_SCALE).unwrap();
        match &self.params {
            ClassifierParams::Ovo(seps) => {
                writeln!(s, "separators {}", seps.len()).unwrap();
                for sep in seps {
                    writeln!(s, "pair {} {} {}", sep.pos, sep.neg, sep.active as u8).unwrap();
                    let mut v = sep.w.to_vec();
                    v.push(sep.b);
                    row(&mut s, &v);
                }
            }
            ClassifierParams::Mlp(m) => {
                writeln!(s, "hidden {}", HIDDEN).unwrap();
                writeln!(s, "w1").unwrap();
                for r in &m.w1 {
                    row(&mut s, r);
                }
                writeln!(s, "b1").unwrap();
                row(&mut s, &m.b1);
                writeln!(s, "w2").unwrap();
                for r in &m.w2 {
                    row(&mut s, r);
                }
                writeln!(s, "b2").unwrap();
                row(&mut s, &m.b2);
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<RoomClassifier, LofdError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines.next().map(|(i, l)| (i + 1, l.trim())).ok_or_else(|| LofdError::Model {
                line: text.lines().count() + 1,
                message: format!("unexpected end of file, expected {what}"),
            })
        };
        let bad = |line: usize, m: &str| LofdError::Model { line, message: m.to_string() };
        let keyed = |(line, l): (usize, &str), key: &str| -> Result<Vec<String>, LofdError> {
            let mut parts = l.split_whitespace();
            if parts.next() != Some(key) {
                return Err(LofdError::Model { line, message: format!("expected `{key}`") });
            }
            Ok(parts.map(str::to_string).collect())
        };
        let nums = |(line, l): (usize, &str), n: usize| -> Result<Vec<f64>, LofdError> {
            let v: Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
            let v = v.map_err(|_| LofdError::Model { line, message: "bad number".into() })?;
            if v.len() != n {
                return Err(LofdError::Model { line, message: format!("expected {n} values, found {}", v.len()) });
            }
            Ok(v)
        };

        let (l0, magic) = next("header")?;
        if magic != "sugaman-room-classifier" {
            return Err(bad(l0, "not a room classifier file"));
        }
        let kl = next("kind")?;
        let kind = keyed(kl, "kind")?
            .first()
            .and_then(|k| ClassifierKind::parse(k))
            .ok_or_else(|| bad(kl.0, "unknown classifier kind"))?;
        let sl = next("seed")?;
        let seed = keyed(sl, "seed")?.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad(sl.0, "bad seed"))?;
        let dl = next("dims")?;
        if keyed(dl, "dims")? != ["24", "5"] {
            return Err(bad(dl.0, "dims must be 24 5"));
        }
        let cl = next("count_scale")?;
        let scale: f64 =
            keyed(cl, "count_scale")?.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad(cl.0, "bad count scale"))?;
        if scale != COUNT_SCALE {
            return Err(bad(cl.0, "unsupported count scale"));
        }
        let params = match kind {
            ClassifierKind::Ovo => {
                let nl = next("separators")?;
                let n: usize =
                    keyed(nl, "separators")?.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad(nl.0, "bad count"))?;
                let mut seps = Vec::with_capacity(n);
                for _ in 0..n {
                    let pl = next("pair")?;
                    let p = keyed(pl, "pair")?;
                    let parsed: Option<(u8, u8, u8)> = match &p[..] {
                        [a, b, c] => a.parse().ok().zip(b.parse().ok()).zip(c.parse().ok()).map(|((a, b), c)| (a, b, c)),
                        _ => None,
                    };
                    let (pos, neg, active) = parsed.ok_or_else(|| bad(pl.0, "bad pair line"))?;
                    let v = nums(next("weights")?, N_FEATURES + 1)?;
                    let mut w = [0.0; N_FEATURES];
                    w.copy_from_slice(&v[..N_FEATURES]);
                    seps.push(Separator { pos, neg, active: active != 0, w, b: v[N_FEATURES] });
                }
                ClassifierParams::Ovo(seps)
            }
            ClassifierKind::Mlp => {
                let hl = next("hidden")?;
                if keyed(hl, "hidden")? != ["10"] {
                    return Err(bad(hl.0, "hidden layer must have 10 units"));
                }
                let mut m = Mlp::zeros();
                keyed(next("w1")?, "w1")?;
                for r in &mut m.w1 {
                    r.copy_from_slice(&nums(next("w1 row")?, N_FEATURES)?);
                }
                keyed(next("b1")?, "b1")?;
                m.b1 = nums(next("b1 row")?, HIDDEN)?;
                keyed(next("w2")?, "w2")?;
                for r in &mut m.w2 {
                    *r = nums(next("w2 row")?, HIDDEN)?;
                }
                keyed(next("b2")?, "b2")?;
                m.b2 = nums(next("b2 row")?, N_LABELS)?;
                ClassifierParams::Mlp(m)
            }
        };
        if let Some((line, _)) = lines.next() {
            return Err(bad(line, "trailing content"));
        }
        Ok(RoomClassifier { seed, params })
    }
}

fn train_separator(
    xs: &[[f64; N_FEATURES]],
    ys: &[u8],
    pos: u8,
    neg: u8,
    cfg: &TrainConfig,
) -> Separator {
    let idx: Vec<usize> = (0..xs.len()).filter(|&i| ys[i] == pos || ys[i] == neg).collect();
    let has = |c: u8| idx.iter().any(|&i| ys[i] == c);
    let mut sep = Separator { pos, neg, active: has(pos) && has(neg), w: [0.0; N_FEATURES], b: 0.0 };
    if !sep.active {
        return sep;
    }
    // Pegasos-style subgradient steps on the regularised hinge loss
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((pos as u64) << 8 | neg as u64));
    let mut order = idx;
    let mut t = 0usize;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (cfg.lambda * (t as f64 + 100.0));
            let y = if ys[i] == pos { 1.0 } else { -1.0 };
            let margin = y * sep.decision(&xs[i]);
            for w in &mut sep.w {
                *w *= 1.0 - eta * cfg.lambda;
            }
            if margin < 1.0 {
                for (w, x) in sep.w.iter_mut().zip(&xs[i]) {
                    *w += eta * y * x;
                }
                sep.b += eta * y;
            }
        }
    }
    sep
}

/// Trains a room classifier on raw LOFD rows and labels (codes 1-5).
pub fn train(features: &[[f64; N_FEATURES]], labels: &[u8], cfg: &TrainConfig) -> Result<RoomClassifier, LofdError> {
    if features.len() != labels.len() {
        return Err(LofdError::Training("feature and label counts differ".into()));
    }
    if features.is_empty() {
        return Err(LofdError::Training("no training samples".into()));
    }
    if let Some(bad) = labels.iter().find(|&&l| !(1..=5).contains(&l)) {
        return Err(LofdError::Training(format!("label {bad} outside 1-5")));
    }
    if features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LofdError::Training("non-finite feature value".into()));
    }
    if cfg.require_all_classes {
        for code in 1..=5u8 {
            if !labels.contains(&code) {
                let name = RoomLabel::from_code(code).unwrap().tag();
                return Err(LofdError::Training(format!("class {name} absent from training labels")));
            }
        }
    }
    let xs: Vec<[f64; N_FEATURES]> = features.iter().map(scaled).collect();
    let params = match cfg.kind {
        ClassifierKind::Ovo => {
            let pairs: Vec<(u8, u8)> = (1..=5u8).flat_map(|a| (a + 1..=5).map(move |b| (a, b))).collect();
            let seps = pairs.par_iter().map(|&(a, b)| train_separator(&xs, labels, a, b, cfg)).collect();
            ClassifierParams::Ovo(seps)
        }
        ClassifierKind::Mlp => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut m = Mlp::random(&mut rng);
            let mut p = m.params();
            for _ in 0..cfg.epochs {
                let g = m.gradient(&xs, labels).params();
                for (v, d) in p.iter_mut().zip(&g) {
                    *v -= cfg.learning_rate * d;
                }
                m.set_params(&p);
            }
            ClassifierParams::Mlp(m)
        }
    };
    Ok(RoomClassifier { seed: cfg.seed, params })
}

/// 5x5 confusion matrix, rows = truth, columns = prediction.
pub fn confusion(truth: &[u8], predicted: &[RoomLabel]) -> [[usize; N_LABELS]; N_LABELS] {
    let mut m = [[0; N_LABELS]; N_LABELS];
    for (t, p) in truth.iter().zip(predicted) {
        m[*t as usize - 1][p.code() as usize - 1] += 1;
    }
    m
}

pub fn accuracy(truth: &[u8], predicted: &[RoomLabel]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    truth.iter().zip(predicted).filter(|(t, p)| **t == p.code()).count() as f64 / truth.len() as f64
}

pub fn feature_csv_header() -> String {
    let mut cols: Vec<String> = DecorClass::ALL.iter().map(|c| format!("{}_count", c.slug())).collect();
    cols.extend(DecorClass::ALL.iter().map(|c| format!("{}_dist", c.slug())));
    cols.push("label".into());
    cols.join(",")
}

pub fn write_feature_csv(rows: &[(LofdVector, RoomLabel)]) -> String {
    let mut s = feature_csv_header();
    s.push('\n');
    for (v, label) in rows {
        let mut cols: Vec<String> = v.counts.iter().map(|c| c.to_string()).collect();
        cols.extend(v.dists.iter().map(|d| format!("{:.9}", d)));
        cols.push(label.code().to_string());
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

pub fn read_feature_csv(text: &str) -> Result<Vec<([f64; N_FEATURES], u8)>, LofdError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == feature_csv_header() => {}
        _ => return Err(LofdError::Csv { line: 1, message: "missing or unexpected header".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |m: &str| LofdError::Csv { line: i + 1, message: m.to_string() };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != N_FEATURES + 1 {
            return Err(bad(&format!("expected {} columns, found {}", N_FEATURES + 1, cols.len())));
        }
        let mut x = [0.0f64; N_FEATURES];
        for (slot, c) in x.iter_mut().zip(&cols) {
            *slot = c.parse().map_err(|_| bad("bad number"))?;
            if !slot.is_finite() {
                return Err(bad("non-finite value"));
            }
        }
        let label: u8 = cols[N_FEATURES].parse().map_err(|_| bad("bad label"))?;
        if !(1..=5).contains(&label) {
            return Err(bad("label outside 1-5"));
        }
        out.push((x, label));
    }
    Ok(out)
}
