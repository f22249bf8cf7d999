//! Flat `key = value` configuration holding every pipeline knob.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::decor::{DEFAULT_MERGE_GAP, DEFAULT_MIN_BLOB_AREA};
use crate::geometry::BinScheme;
use crate::lofd::{ClassifierKind, TrainConfig};
use crate::navigation::NavParams;
use crate::segmentation::SegmentationParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Grey level below which a pixel counts as ink.
    pub threshold: u8,
    pub segmentation: SegmentationParams,
    pub min_blob_area: usize,
    pub merge_gap: usize,
    pub lofd_mean_distance: bool,
    pub boundary_shrink: f64,
    pub navigation: NavParams,
    /// Pixels per narrated step.
    pub step_px: f64,
    /// Width of the N/E/S/W sectors in degrees; diagonals get the rest.
    pub cardinal_width: f64,
    pub classifier: ClassifierKind,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: u64,
    /// Signature library file; the built-in glyph library when unset.
    pub signature_library: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            threshold: 128,
            segmentation: SegmentationParams::default(),
            min_blob_area: DEFAULT_MIN_BLOB_AREA,
            merge_gap: DEFAULT_MERGE_GAP,
            lofd_mean_distance: false,
            boundary_shrink: 0.5,
            navigation: NavParams::default(),
            step_px: 10.0,
            cardinal_width: 60.0,
            classifier: ClassifierKind::Mlp,
            epochs: None,
            learning_rate: None,
            lambda: None,
            seed: 1,
            signature_library: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

impl Config {
    /// Starts from the defaults; `#` starts a comment, unknown keys fail.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError::Parse { line: i + 1, message };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            c.set(k.trim(), v.trim()).map_err(err)?;
        }
        c.check().map_err(|message| ConfigError::Parse { line: 0, message })?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Config::parse(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "threshold" => self.threshold = parse_num(v)?,
            "se_radius" => self.segmentation.se_radius = parse_num(v)?,
            "wall_min_thickness" => self.segmentation.wall_min_thickness = parse_num(v)?,
            "door_score_min" => self.segmentation.score_min = parse_num(v)?,
            "min_room_area" => self.segmentation.min_room_area = parse_num(v)?,
            "dp_epsilon" => self.segmentation.dp_epsilon = parse_num(v)?,
            "sqft_divisor" => self.segmentation.sqft_divisor = parse_num(v)?,
            "gap_slack" => self.segmentation.gap_slack = parse_num(v)?,
            "min_blob_area" => self.min_blob_area = parse_num(v)?,
            "merge_gap" => self.merge_gap = parse_num(v)?,
            "lofd_mean_distance" => self.lofd_mean_distance = parse_bool(v)?,
            "boundary_shrink" => self.boundary_shrink = parse_num(v)?,
            "corner_push" => self.navigation.corner_push = parse_num(v)?,
            "max_corners" => self.navigation.max_corners = parse_num(v)?,
            "step_px" => self.step_px = parse_num(v)?,
            "cardinal_width" => self.cardinal_width = parse_num(v)?,
            "classifier" => self.classifier = ClassifierKind::parse(v).ok_or_else(|| format!("unknown classifier {v:?}"))?,
            "epochs" => self.epochs = Some(parse_num(v)?),
            "learning_rate" => self.learning_rate = Some(parse_num(v)?),
            "lambda" => self.lambda = Some(parse_num(v)?),
            "seed" => self.seed = parse_num(v)?,
            "signature_library" => self.signature_library = Some(PathBuf::from(v)),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    fn check(&self) -> Result<(), String> {
        if !(self.cardinal_width > 0.0 && self.cardinal_width < 90.0) {
            return Err("cardinal_width must lie strictly between 0 and 90".into());
        }
        if !(0.0..=1.0).contains(&self.boundary_shrink) {
            return Err("boundary_shrink must lie in [0, 1]".into());
        }
        if self.step_px <= 0.0 || self.segmentation.sqft_divisor <= 0.0 {
            return Err("step_px and sqft_divisor must be positive".into());
        }
        Ok(())
    }

    pub fn bins(&self) -> BinScheme {
        BinScheme::from_widths(self.cardinal_width, 90.0 - self.cardinal_width)
    }

    pub fn train_config(&self, kind: ClassifierKind, seed: u64) -> TrainConfig {
        let mut t = TrainConfig::new(kind, seed);
        if let Some(e) = self.epochs {
            t.epochs = e;
        }
        if let Some(lr) = self.learning_rate {
            t.learning_rate = lr;
        }
        if let Some(l) = self.lambda {
            t.lambda = l;
        }
        t
    }

    /// Every key with its current value, parseable by [`Config::parse`].
    pub fn to_text(&self) -> String {
        let s = &self.segmentation;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("threshold", self.threshold.to_string());
        kv("se_radius", s.se_radius.to_string());
        kv("wall_min_thickness", s.wall_min_thickness.to_string());
        kv("door_score_min", s.score_min.to_string());
        kv("min_room_area", s.min_room_area.to_string());
        kv("dp_epsilon", s.dp_epsilon.to_string());
        kv("sqft_divisor", s.sqft_divisor.to_string());
        kv("gap_slack", s.gap_slack.to_string());
        kv("min_blob_area", self.min_blob_area.to_string());
        kv("merge_gap", self.merge_gap.to_string());
        kv("lofd_mean_distance", self.lofd_mean_distance.to_string());
        kv("boundary_shrink", self.boundary_shrink.to_string());
        kv("corner_push", self.navigation.corner_push.to_string());
        kv("max_corners", self.navigation.max_corners.to_string());
        kv("step_px", self.step_px.to_string());
        kv("cardinal_width", self.cardinal_width.to_string());
        kv("classifier", self.classifier.name().to_string());
        if let Some(e) = self.epochs {
            kv("epochs", e.to_string());
        }
        if let Some(lr) = self.learning_rate {
            kv("learning_rate", lr.to_string());
        }
        if let Some(l) = self.lambda {
            kv("lambda", l.to_string());
        }
        kv("seed", self.seed.to_string());
        if let Some(p) = &self.signature_library {
            kv("signature_library", p.display().to_string());
        }
        out
    }
}
