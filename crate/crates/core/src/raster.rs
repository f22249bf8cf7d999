//! Minimal binary-image kernel used by every other stage of the pipeline.
//!
//! Everything here works on [`BinaryImage`], a row-major occupancy raster where
//! `true` marks ink (walls, symbols). Pixels outside the image always read as
//! background.

use std::collections::VecDeque;
use std::path::Path;

use image::GrayImage;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, RasterError>;

/// Inclusive, axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Rect { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) as f64 / 2.0, (self.y0 + self.y1) as f64 / 2.0)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 as f64 && x <= self.x1 as f64 && y >= self.y0 as f64 && y <= self.y1 as f64
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(other.x0),
            y0: self.y0.min(other.y0),
            x1: self.x1.max(other.x1),
            y1: self.y1.max(other.y1),
        }
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn dilate(&self, r: i64) -> Rect {
        Rect { x0: self.x0 - r, y0: self.y0 - r, x1: self.x1 + r, y1: self.y1 + r }
    }

    /// Number of empty pixel columns/rows separating two boxes along the
    /// worse axis (0 when they touch or overlap).
    pub fn gap(&self, other: &Rect) -> i64 {
        let gx = (other.x0 - self.x1 - 1).max(self.x0 - other.x1 - 1).max(0);
        let gy = (other.y0 - self.y1 - 1).max(self.y0 - other.y1 - 1).max(0);
        gx.max(gy)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl std::fmt::Debug for BinaryImage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BinaryImage({}x{}, {} ink)", self.width, self.height, self.count())
    }
}

impl BinaryImage {
    /// All-background image. Panics on a zero dimension.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width >= 1 && height >= 1, "image dimensions must be positive");
        BinaryImage { width, height, data: vec![false; width * height] }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidInput("empty raster".into()));
        }
        if data.len() != width * height {
            return Err(RasterError::InvalidInput(format!(
                "data length {} does not match {}x{}",
                data.len(),
                width,
                height
            )));
        }
        Ok(BinaryImage { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut img = BinaryImage::new(width, height);
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        img
    }

    /// Parses an ASCII picture (`#` ink, anything else background), one row per line.
    pub fn from_ascii(s: &str) -> Self {
        let rows: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        BinaryImage::from_fn(width, rows.len(), |x, y| rows[y].as_bytes().get(x) == Some(&b'#'))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width as i64 - 1, self.height as i64 - 1)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Reads a pixel with out-of-bounds coordinates treated as background.
    #[inline]
    pub fn at(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return false;
        }
        self.data[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    /// Sets a pixel if it is inside the image; silently ignores the rest.
    #[inline]
    pub fn put(&mut self, x: i64, y: i64, v: bool) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.data[y as usize * self.width + x as usize] = v;
        }
    }

    pub fn fill_rect(&mut self, r: &Rect, v: bool) {
        for y in r.y0..=r.y1 {
            for x in r.x0..=r.x1 {
                self.put(x, y, v);
            }
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Iterates the coordinates of all ink pixels in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data.iter().enumerate().filter(|(_, &b)| b).map(move |(i, _)| (i % w, i / w))
    }

    pub fn complement(&self) -> BinaryImage {
        BinaryImage { width: self.width, height: self.height, data: self.data.iter().map(|b| !b).collect() }
    }

    fn zip_with(&self, other: &BinaryImage, f: impl Fn(bool, bool) -> bool) -> BinaryImage {
        assert_eq!((self.width, self.height), (other.width, other.height), "image size mismatch");
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn union(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && b)
    }

    /// Pixels of `self` that are not set in `other`.
    pub fn difference(&self, other: &BinaryImage) -> BinaryImage {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn is_subset_of(&self, other: &BinaryImage) -> bool {
        self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    /// Copies the pixels inside `r`; parts of `r` outside the image read as background.
    pub fn crop(&self, r: &Rect) -> BinaryImage {
        BinaryImage::from_fn(r.width() as usize, r.height() as usize, |x, y| {
            self.at(r.x0 + x as i64, r.y0 + y as i64)
        })
    }

    /// Grows the canvas by `pad` background pixels on every side.
    pub fn padded(&self, pad: usize) -> BinaryImage {
        let p = pad as i64;
        self.crop(&Rect::new(-p, -p, self.width as i64 - 1 + p, self.height as i64 - 1 + p))
    }

    /// Bounding box of the ink, if any.
    pub fn ink_bounds(&self) -> Option<Rect> {
        let mut it = self.foreground();
        let (x, y) = it.next()?;
        let mut r = Rect::new(x as i64, y as i64, x as i64, y as i64);
        for (x, y) in it {
            r = r.union(&Rect::new(x as i64, y as i64, x as i64, y as i64));
        }
        Some(r)
    }

    /// Stamps `src` with its top-left corner at (`x`, `y`), OR-ing ink.
    pub fn stamp(&mut self, src: &BinaryImage, x: i64, y: i64) {
        for (sx, sy) in src.foreground() {
            self.put(x + sx as i64, y + sy as i64, true);
        }
    }

    pub fn rotate90(&self) -> BinaryImage {
        // clockwise: (x, y) -> (h-1-y, x)
        let (w, h) = (self.width, self.height);
        BinaryImage::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }

    pub fn flip_horizontal(&self) -> BinaryImage {
        BinaryImage::from_fn(self.width, self.height, |x, y| self.get(self.width - 1 - x, y))
    }

    /// Nearest-neighbour rescale.
    pub fn scaled(&self, factor: f64) -> BinaryImage {
        let w = ((self.width as f64 * factor).round() as usize).max(1);
        let h = ((self.height as f64 * factor).round() as usize).max(1);
        BinaryImage::from_fn(w, h, |x, y| {
            let sx = (((x as f64 + 0.5) / factor) as usize).min(self.width - 1);
            let sy = (((y as f64 + 0.5) / factor) as usize).min(self.height - 1);
            self.get(sx, sy)
        })
    }

    /// Ink rendered black on white.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Luma([if self.get(x as usize, y as usize) { 0 } else { 255 }])
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_gray().save(path)?;
        Ok(())
    }
}

/// Loads a PNG as 8-bit grayscale (RGB is converted by luminance).
pub fn load_png(path: &Path) -> Result<GrayImage> {
    Ok(image::open(path)?.to_luma8())
}

/// Ink is every pixel darker than `threshold`.
pub fn binarize(gray: &GrayImage, threshold: u8) -> Result<BinaryImage> {
    if gray.width() == 0 || gray.height() == 0 {
        return Err(RasterError::InvalidInput("empty raster".into()));
    }
    let data = gray.pixels().map(|p| p.0[0] < threshold).collect();
    BinaryImage::from_vec(gray.width() as usize, gray.height() as usize, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeShape {
    Square,
    Cross,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
    shape: SeShape,
}

impl StructuringElement {
    pub fn new(radius: usize, shape: SeShape) -> Result<Self> {
        if radius == 0 {
            return Err(RasterError::InvalidInput("structuring element radius must be >= 1".into()));
        }
        Ok(StructuringElement { radius, shape })
    }

    pub fn square(radius: usize) -> Self {
        Self::new(radius, SeShape::Square).expect("radius >= 1")
    }

    pub fn cross(radius: usize) -> Self {
        Self::new(radius, SeShape::Cross).expect("radius >= 1")
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
    Open,
    Close,
}

/// 1-D running "any" (dilate) or "all" (erode) over a window of ±r along rows
/// or columns.
fn line_pass(img: &BinaryImage, r: usize, horizontal: bool, dilate: bool) -> BinaryImage {
    let (w, h) = (img.width, img.height);
    let (len, lines) = if horizontal { (w, h) } else { (h, w) };
    let mut out = BinaryImage::new(w, h);
    let mut prefix = vec![0u32; len + 1];
    for line in 0..lines {
        let idx = |i: usize| if horizontal { line * w + i } else { i * w + line };
        for i in 0..len {
            prefix[i + 1] = prefix[i] + img.data[idx(i)] as u32;
        }
        for i in 0..len {
            let lo = i.saturating_sub(r);
            let hi = (i + r).min(len - 1);
            let ink = prefix[hi + 1] - prefix[lo];
            out.data[idx(i)] = if dilate {
                ink > 0
            } else {
                // out-of-bounds pixels are background, so a clipped window fails
                i >= r && i + r < len && ink as usize == 2 * r + 1
            };
        }
    }
    out
}

fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let r = se.radius;
    match se.shape {
        SeShape::Square => line_pass(&line_pass(img, r, true, true), r, false, true),
        SeShape::Cross => line_pass(img, r, true, true).union(&line_pass(img, r, false, true)),
    }
}

fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let r = se.radius;
    match se.shape {
        SeShape::Square => line_pass(&line_pass(img, r, true, false), r, false, false),
        SeShape::Cross => line_pass(img, r, true, false).intersection(&line_pass(img, r, false, false)),
    }
}

/// Binary morphology. Opening and closing are evaluated on a canvas padded by
/// the SE radius so that closing stays extensive next to the image border.
pub fn morph(img: &BinaryImage, se: &StructuringElement, op: MorphOp) -> BinaryImage {
    match op {
        MorphOp::Erode => erode(img, se),
        MorphOp::Dilate => dilate(img, se),
        MorphOp::Open | MorphOp::Close => {
            let r = se.radius;
            let padded = img.padded(r);
            let out = if op == MorphOp::Open {
                dilate(&erode(&padded, se), se)
            } else {
                erode(&dilate(&padded, se), se)
            };
            out.crop(&Rect::new(r as i64, r as i64, (r + img.width - 1) as i64, (r + img.height - 1) as i64))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(i64, i64)] {
        match self {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel count per label; index 0 is unused.
    pub fn areas(&self) -> Vec<usize> {
        let mut areas = vec![0usize; self.count as usize + 1];
        for &l in &self.labels {
            if l > 0 {
                areas[l as usize] += 1;
            }
        }
        areas
    }

    /// Bounding box per label; index 0 is unused.
    pub fn bboxes(&self) -> Vec<Option<Rect>> {
        let mut boxes: Vec<Option<Rect>> = vec![None; self.count as usize + 1];
        for (i, &l) in self.labels.iter().enumerate() {
            if l == 0 {
                continue;
            }
            let (x, y) = ((i % self.width) as i64, (i / self.width) as i64);
            let p = Rect::new(x, y, x, y);
            let slot = &mut boxes[l as usize];
            *slot = Some(slot.map_or(p, |b| b.union(&p)));
        }
        boxes
    }

    /// Binary mask of a single label.
    pub fn mask(&self, label: u32) -> BinaryImage {
        BinaryImage {
            width: self.width,
            height: self.height,
            data: self.labels.iter().map(|&l| l == label).collect(),
        }
    }
}

/// Opening by a `side` x `side` box, even sides included: keeps the ink
/// pixels covered by at least one fully inked box.
pub fn open_box(img: &BinaryImage, side: usize) -> BinaryImage {
    let (w, h) = (img.width, img.height);
    if side == 0 {
        return img.clone();
    }
    if side > w || side > h {
        return BinaryImage::new(w, h);
    }
    let integral = |f: &dyn Fn(usize, usize) -> bool| {
        let mut s = vec![0u32; (w + 1) * (h + 1)];
        for y in 0..h {
            for x in 0..w {
                s[(y + 1) * (w + 1) + x + 1] =
                    f(x, y) as u32 + s[y * (w + 1) + x + 1] + s[(y + 1) * (w + 1) + x] - s[y * (w + 1) + x];
            }
        }
        s
    };
    let sum = |s: &[u32], x0: usize, y0: usize, x1: usize, y1: usize| {
        s[y1 * (w + 1) + x1] + s[y0 * (w + 1) + x0] - s[y0 * (w + 1) + x1] - s[y1 * (w + 1) + x0]
    };
    let ink = integral(&|x, y| img.get(x, y));
    let full = (side * side) as u32;
    // top-left anchors of fully inked boxes
    let anchors = integral(&|x, y| x + side <= w && y + side <= h && sum(&ink, x, y, x + side, y + side) == full);
    BinaryImage::from_fn(w, h, |x, y| {
        img.get(x, y) && sum(&anchors, (x + 1).saturating_sub(side), (y + 1).saturating_sub(side), x + 1, y + 1) > 0
    })
}

/// Flood-fill labelling. Labels start at 1 and follow the raster order of
/// each component's first pixel.
pub fn connected_components(img: &BinaryImage, connectivity: Connectivity) -> LabelImage {
    let (w, h) = (img.width, img.height);
    let mut labels = vec![0u32; w * h];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !img.data[start] || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if img.data[j] && labels[j] == 0 {
                    labels[j] = count;
                    queue.push_back(j);
                }
            }
        }
    }
    LabelImage { width: w, height: h, labels, count }
}

/// One box per 8-connected ink component, with nearby boxes merged so that
/// multi-stroke glyphs stay whole. Area filtering applies to merged groups.
pub fn detect_blobs(img: &BinaryImage, min_area: usize, merge_gap: usize) -> Vec<Rect> {
    let cc = connected_components(img, Connectivity::Eight);
    let areas = cc.areas();
    let mut groups: Vec<(Rect, usize)> = cc
        .bboxes()
        .into_iter()
        .zip(areas)
        .skip(1)
        .filter_map(|(b, a)| b.map(|b| (b, a)))
        .collect();

    let gap = merge_gap as i64;
    loop {
        let mut merged = false;
        'outer: for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                if groups[i].0.gap(&groups[j].0) <= gap {
                    let (b, a) = groups.swap_remove(j);
                    groups[i].0 = groups[i].0.union(&b);
                    groups[i].1 += a;
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let mut boxes: Vec<Rect> = groups.into_iter().filter(|&(_, a)| a >= min_area).map(|(b, _)| b).collect();
    boxes.sort_by_key(|b| (b.y0, b.x0, b.y1, b.x1));
    boxes
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub x: usize,
    pub y: usize,
    pub response: f64,
}

const HARRIS_K: f64 = 0.04;
const HARRIS_NMS_RADIUS: i64 = 3;
/// Responses below this fraction of the strongest one are discarded.
const HARRIS_REL_THRESHOLD: f64 = 0.01;

fn box3(src: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0.0;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        s += src[ny as usize * w + nx as usize];
                    }
                }
            }
            out[y * w + x] = s / 9.0;
        }
    }
    out
}

/// Harris response map (k = 0.04) on the box-smoothed 0/1 raster.
pub fn harris_response(img: &BinaryImage) -> Vec<f64> {
    let (w, h) = (img.width, img.height);
    let raw: Vec<f64> = img.data.iter().map(|&b| b as u8 as f64).collect();
    let smooth = box3(&raw, w, h);
    let at = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0.0
        } else {
            smooth[y as usize * w + x as usize]
        }
    };
    let mut ixx = vec![0.0; w * h];
    let mut iyy = vec![0.0; w * h];
    let mut ixy = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let gx = (at(x + 1, y) - at(x - 1, y)) / 2.0;
            let gy = (at(x, y + 1) - at(x, y - 1)) / 2.0;
            let i = y as usize * w + x as usize;
            ixx[i] = gx * gx;
            iyy[i] = gy * gy;
            ixy[i] = gx * gy;
        }
    }
    let (sxx, syy, sxy) = (box3(&ixx, w, h), box3(&iyy, w, h), box3(&ixy, w, h));
    (0..w * h)
        .map(|i| {
            let tr = sxx[i] + syy[i];
            sxx[i] * syy[i] - sxy[i] * sxy[i] - HARRIS_K * tr * tr
        })
        .collect()
}

/// Strongest Harris corners, at most `max_n`, strongest first (ties by y, x).
pub fn harris_corners(img: &BinaryImage, max_n: usize) -> Vec<Corner> {
    let w = img.width;
    let resp = harris_response(img);
    let peak = resp.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 1e-12 || max_n == 0 {
        return Vec::new();
    }
    let floor = peak * HARRIS_REL_THRESHOLD;
    let mut cands: Vec<Corner> = resp
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > floor)
        .map(|(i, &r)| Corner { x: i % w, y: i / w, response: r })
        .collect();
    cands.sort_by(|a, b| b.response.total_cmp(&a.response).then((a.y, a.x).cmp(&(b.y, b.x))));

    let mut kept: Vec<Corner> = Vec::new();
    for c in cands {
        let suppressed = kept.iter().any(|k| {
            (k.x as i64 - c.x as i64).abs() <= HARRIS_NMS_RADIUS && (k.y as i64 - c.y as i64).abs() <= HARRIS_NMS_RADIUS
        });
        if !suppressed {
            kept.push(c);
            if kept.len() == max_n {
                break;
            }
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| image::Luma([f(x, y)]))
    }

    #[test]
    fn binarize_extremes_and_checkerboard() {
        let white = binarize(&gray(7, 5, |_, _| 255), 128).unwrap();
        assert!(white.is_blank());
        let black = binarize(&gray(7, 5, |_, _| 0), 128).unwrap();
        assert_eq!(black.count(), 35);
        for (w, h) in [(7u32, 5u32), (4, 4), (1, 3)] {
            let board = binarize(&gray(w, h, |x, y| if (x + y) % 2 == 0 { 0 } else { 255 }), 128).unwrap();
            let mut expected = 0;
            for y in 0..h {
                for x in 0..w {
                    let ink = (x + y) % 2 == 0;
                    assert_eq!(board.get(x as usize, y as usize), ink);
                    expected += ink as usize;
                }
            }
            assert_eq!(board.count(), expected);
            let n = (w * h) as usize;
            assert!(expected == n / 2 || expected == n.div_ceil(2));
        }
    }

    #[test]
    fn binarize_rejects_empty() {
        assert!(binarize(&GrayImage::new(0, 0), 128).is_err());
    }

    #[test]
    fn se_radius_must_be_positive() {
        assert!(StructuringElement::new(0, SeShape::Square).is_err());
    }

    #[test]
    fn dilate_single_pixel_gives_block() {
        let mut img = BinaryImage::new(7, 7);
        img.set(3, 3, true);
        let d = morph(&img, &StructuringElement::square(1), MorphOp::Dilate);
        assert_eq!(d.count(), 9);
        for y in 2..=4 {
            for x in 2..=4 {
                assert!(d.get(x, y));
            }
        }
        let c = morph(&img, &StructuringElement::cross(1), MorphOp::Dilate);
        assert_eq!(c.count(), 5);
    }

    #[test]
    fn erode_blank_is_blank() {
        let img = BinaryImage::new(9, 4);
        assert!(morph(&img, &StructuringElement::square(2), MorphOp::Erode).is_blank());
    }

    #[test]
    fn close_fills_gap() {
        let img = BinaryImage::from_ascii(
            ".......
             ..#.#..
             .......",
        );
        let c = morph(&img, &StructuringElement::square(1), MorphOp::Close);
        assert!(c.get(2, 1) && c.get(3, 1) && c.get(4, 1));
        assert_eq!(c.count(), 3);
    }

    #[test]
    fn close_is_extensive_at_border() {
        let img = BinaryImage::from_ascii("#..#\n....\n#..#");
        let c = morph(&img, &StructuringElement::square(2), MorphOp::Close);
        assert!(img.is_subset_of(&c));
    }

    #[test]
    fn components_connectivity() {
        assert_eq!(connected_components(&BinaryImage::new(5, 5), Connectivity::Four).count(), 0);
        let squares = BinaryImage::from_ascii("##...\n##...\n...##\n...##");
        assert_eq!(connected_components(&squares, Connectivity::Eight).count(), 2);
        let diag = BinaryImage::from_ascii("#.\n.#");
        assert_eq!(connected_components(&diag, Connectivity::Four).count(), 2);
        assert_eq!(connected_components(&diag, Connectivity::Eight).count(), 1);
    }

    #[test]
    fn labels_follow_raster_order() {
        let img = BinaryImage::from_ascii("...#\n#...\n#..#");
        let cc = connected_components(&img, Connectivity::Four);
        assert_eq!(cc.get(3, 0), 1);
        assert_eq!(cc.get(0, 1), 2);
        assert_eq!(cc.get(3, 2), 3);
    }

    #[test]
    fn blobs() {
        assert!(detect_blobs(&BinaryImage::new(20, 20), 1, 3).is_empty());
        let mut img = BinaryImage::new(30, 30);
        img.fill_rect(&Rect::new(10, 10, 14, 14), true);
        assert_eq!(detect_blobs(&img, 25, 3), vec![Rect::new(10, 10, 14, 14)]);
        assert!(detect_blobs(&img, 26, 3).is_empty());

        // two strokes with two empty columns between them
        let mut strokes = BinaryImage::new(30, 30);
        strokes.fill_rect(&Rect::new(5, 5, 6, 15), true);
        strokes.fill_rect(&Rect::new(9, 5, 10, 15), true);
        assert_eq!(detect_blobs(&strokes, 1, 3), vec![Rect::new(5, 5, 10, 15)]);
        assert_eq!(detect_blobs(&strokes, 1, 1).len(), 2);
    }

    #[test]
    fn harris_blank_and_rectangle() {
        assert!(harris_corners(&BinaryImage::new(16, 16), 10).is_empty());
        let mut img = BinaryImage::new(32, 32);
        img.fill_rect(&Rect::new(8, 10, 21, 23), true);
        let corners = harris_corners(&img, 1000);
        assert!(corners.len() >= 4);
        let truth = [(8, 10), (21, 10), (8, 23), (21, 23)];
        for c in &corners[..4] {
            let near = truth
                .iter()
                .any(|&(tx, ty)| (c.x as i64 - tx).abs() <= 2 && (c.y as i64 - ty).abs() <= 2);
            assert!(near, "corner {:?} not near a rectangle corner", c);
        }
        for t in truth {
            assert!(corners[..4]
                .iter()
                .any(|c| (c.x as i64 - t.0).abs() <= 2 && (c.y as i64 - t.1).abs() <= 2));
        }
        assert_eq!(harris_corners(&img, 2).len(), 2);
    }

    fn brute_force_count(img: &BinaryImage, conn: Connectivity) -> u32 {
        // independent recursive flood fill
        fn fill(img: &BinaryImage, seen: &mut Vec<bool>, x: i64, y: i64, conn: Connectivity) {
            if !img.at(x, y) || seen[y as usize * img.width() + x as usize] {
                return;
            }
            seen[y as usize * img.width() + x as usize] = true;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if (dx == 0 && dy == 0) || (conn == Connectivity::Four && dx != 0 && dy != 0) {
                        continue;
                    }
                    fill(img, seen, x + dx, y + dy, conn);
                }
            }
        }
        let mut seen = vec![false; img.width() * img.height()];
        let mut n = 0;
        for y in 0..img.height() {
            for x in 0..img.width() {
                if img.get(x, y) && !seen[y * img.width() + x] {
                    n += 1;
                    fill(img, &mut seen, x as i64, y as i64, conn);
                }
            }
        }
        n
    }

    fn arb_image(max: usize) -> impl Strategy<Value = BinaryImage> {
        (1..=max, 1..=max).prop_flat_map(|(w, h)| {
            proptest::collection::vec(proptest::bool::weighted(0.45), w * h)
                .prop_map(move |d| BinaryImage::from_vec(w, h, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn components_match_flood_fill_oracle(img in arb_image(32)) {
            for conn in [Connectivity::Four, Connectivity::Eight] {
                let cc = connected_components(&img, conn);
                prop_assert_eq!(cc.count(), brute_force_count(&img, conn));
                prop_assert_eq!(&cc, &connected_components(&img, conn));
                for (i, &l) in cc.labels().iter().enumerate() {
                    prop_assert!(l <= cc.count());
                    prop_assert_eq!(l > 0, img.data()[i]);
                }
            }
        }

        #[test]
        fn morphology_laws(img in arb_image(24), r in 1usize..3, cross in any::<bool>()) {
            let se = if cross { StructuringElement::cross(r) } else { StructuringElement::square(r) };
            let closed = morph(&img, &se, MorphOp::Close);
            let opened = morph(&img, &se, MorphOp::Open);
            prop_assert!(img.is_subset_of(&closed));
            prop_assert!(opened.is_subset_of(&img));
            prop_assert_eq!(&morph(&closed, &se, MorphOp::Close), &closed);
            prop_assert_eq!(&morph(&opened, &se, MorphOp::Open), &opened);

            // duality away from the border
            let eroded = morph(&img, &se, MorphOp::Erode);
            let dual = morph(&img.complement(), &se, MorphOp::Dilate).complement();
            let r = r as i64;
            for y in r..img.height() as i64 - r {
                for x in r..img.width() as i64 - r {
                    prop_assert_eq!(eroded.at(x, y), dual.at(x, y));
                }
            }
        }

        #[test]
        fn box_opening_matches_brute_force(img in arb_image(16), side in 1usize..6) {
            let got = open_box(&img, side);
            let (w, h) = (img.width(), img.height());
            let mut want = BinaryImage::new(w, h);
            for y0 in 0..h {
                for x0 in 0..w {
                    if x0 + side <= w && y0 + side <= h
                        && (0..side).all(|dy| (0..side).all(|dx| img.get(x0 + dx, y0 + dy)))
                    {
                        want.fill_rect(&Rect::new(x0 as i64, y0 as i64, (x0 + side - 1) as i64, (y0 + side - 1) as i64), true);
                    }
                }
            }
            prop_assert_eq!(&got, &want);
            if side % 2 == 1 && side > 1 {
                prop_assert_eq!(&got, &morph(&img, &StructuringElement::square(side / 2), MorphOp::Open));
            }
        }

        #[test]
        fn harris_respects_cap(img in arb_image(20), n in 1usize..6) {
            prop_assert!(harris_corners(&img, n).len() <= n);
        }
    }
}
