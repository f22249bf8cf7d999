//! Decor symbol signatures and classification.
//!
//! A symbol's signature is the area of its three largest connected components
//! normalised by the largest one. The library holds the mean signature per
//! class; classification picks the nearest library entry.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{DecorClass, DecorInstance};
use crate::raster::{self, BinaryImage, Connectivity, MorphOp, Rect, StructuringElement};

#[derive(Debug, Error, PartialEq)]
pub enum DecorError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("incomplete library, missing classes: {0:?}")]
    IncompleteLibrary(Vec<&'static str>),
    #[error("malformed library file at line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub const DEFAULT_MIN_BLOB_AREA: usize = 30;
pub const DEFAULT_MERGE_GAP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature(pub [f64; 3]);

impl Signature {
    pub fn distance(&self, other: &Signature) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

/// Normalised areas of the three largest 8-connected components after a
/// radius-1 closing that heals broken strokes.
pub fn compute_signature(symbol: &BinaryImage) -> Result<Signature, DecorError> {
    if symbol.is_blank() {
        return Err(DecorError::InvalidInput("empty symbol".into()));
    }
    let healed = raster::morph(symbol, &StructuringElement::square(1), MorphOp::Close);
    let mut areas: Vec<usize> = raster::connected_components(&healed, Connectivity::Eight).areas()[1..].to_vec();
    areas.sort_unstable_by(|a, b| b.cmp(a));
    let a1 = areas[0] as f64;
    let mut r = [0.0; 3];
    for (slot, a) in r.iter_mut().zip(&areas) {
        *slot = *a as f64 / a1;
    }
    Ok(Signature(r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureLibrary {
    entries: [Signature; 12],
}

impl SignatureLibrary {
    pub fn get(&self, class: DecorClass) -> Signature {
        self.entries[class.index()]
    }

    /// Nearest class under Euclidean distance; ties go to the lowest code.
    pub fn nearest(&self, sig: &Signature) -> DecorClass {
        let mut best = (DecorClass::ALL[0], f64::INFINITY);
        for c in DecorClass::ALL {
            let d = self.get(c).distance(sig);
            if d < best.1 {
                best = (c, d);
            }
        }
        best.0
    }

    /// One `class_code r1 r2 r3` line per class, six decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in DecorClass::ALL {
            let r = self.get(c).0;
            writeln!(s, "{} {:.6} {:.6} {:.6}", c.code(), r[0], r[1], r[2]).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<SignatureLibrary, DecorError> {
        let mut entries: [Option<Signature>; 12] = [None; 12];
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |m: &str| DecorError::Malformed { line: i + 1, message: m.to_string() };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let code: u8 = parts[0].parse().map_err(|_| bad("bad class code"))?;
            let class = DecorClass::from_code(code).ok_or_else(|| bad("unknown class code"))?;
            let mut r = [0.0; 3];
            for (slot, p) in r.iter_mut().zip(&parts[1..]) {
                *slot = p.parse().map_err(|_| bad("bad ratio"))?;
            }
            if entries[class.index()].replace(Signature(r)).is_some() {
                return Err(bad("duplicate class"));
            }
        }
        let missing: Vec<&'static str> =
            DecorClass::ALL.iter().filter(|c| entries[c.index()].is_none()).map(|c| c.slug()).collect();
        if !missing.is_empty() {
            return Err(DecorError::IncompleteLibrary(missing));
        }
        Ok(SignatureLibrary { entries: entries.map(|e| e.unwrap()) })
    }
}

/// Per-class arithmetic mean of sample signatures.
pub fn build_library(samples: &[(DecorClass, BinaryImage)]) -> Result<SignatureLibrary, DecorError> {
    let mut sums = [[0.0f64; 3]; 12];
    let mut counts = [0usize; 12];
    for (class, img) in samples {
        let sig = compute_signature(img)?;
        for k in 0..3 {
            sums[class.index()][k] += sig.0[k];
        }
        counts[class.index()] += 1;
    }
    let missing: Vec<&'static str> =
        DecorClass::ALL.iter().filter(|c| counts[c.index()] == 0).map(|c| c.slug()).collect();
    if !missing.is_empty() {
        return Err(DecorError::IncompleteLibrary(missing));
    }
    let entries = std::array::from_fn(|i| Signature(sums[i].map(|s| s / counts[i] as f64)));
    Ok(SignatureLibrary { entries })
}

/// Library built from the canonical glyphs: eight 90°-rotation/mirror
/// variants plus two ×2 upscales per class.
pub fn canonical_library() -> SignatureLibrary {
    let samples: Vec<(DecorClass, BinaryImage)> = DecorClass::ALL
        .iter()
        .flat_map(|&c| {
            let g = glyph(c);
            let mut v: Vec<(DecorClass, BinaryImage)> = dihedral_variants(&g).into_iter().map(|img| (c, img)).collect();
            v.push((c, g.scaled(2.0)));
            v.push((c, g.rotate90().scaled(2.0)));
            v
        })
        .collect();
    build_library(&samples).expect("canonical glyphs cover every class")
}

/// Decors inside one room crop. Wall (and door) pixels are removed first;
/// boxes are in crop coordinates.
pub fn classify_decors(
    room_crop: &BinaryImage,
    wall_mask: &BinaryImage,
    library: &SignatureLibrary,
    min_area: usize,
    merge_gap: usize,
) -> Vec<DecorInstance> {
    let ink = room_crop.difference(wall_mask);
    raster::detect_blobs(&ink, min_area, merge_gap)
        .into_iter()
        .filter_map(|bbox| {
            let sig = compute_signature(&ink.crop(&bbox)).ok()?;
            Some(DecorInstance::new(library.nearest(&sig), bbox))
        })
        .collect()
}

/// The eight images reachable by 90° rotations and a mirror, in a fixed order.
pub fn dihedral_variants(img: &BinaryImage) -> Vec<BinaryImage> {
    let mut out = Vec::with_capacity(8);
    let mut cur = img.clone();
    for _ in 0..4 {
        out.push(cur.clone());
        out.push(cur.flip_horizontal());
        cur = cur.rotate90();
    }
    out
}

/// 2-px rectangle outline with outer extent `w` x `h` at (`x`, `y`).
fn outline(img: &mut BinaryImage, x: i64, y: i64, w: i64, h: i64) {
    img.fill_rect(&Rect::new(x, y, x + w - 1, y + 1), true);
    img.fill_rect(&Rect::new(x, y + h - 2, x + w - 1, y + h - 1), true);
    img.fill_rect(&Rect::new(x, y, x + 1, y + h - 1), true);
    img.fill_rect(&Rect::new(x + w - 2, y, x + w - 1, y + h - 1), true);
}

/// Canonical bitmap of a decor class.
///
/// Every glyph is a 2-px frame with nested parts; parallel strokes are at
/// least 8 px apart so that wall extraction never mistakes a glyph for a wall
/// and the frame keeps the parts inside one blob.
pub fn glyph(class: DecorClass) -> BinaryImage {
    let (w, h, parts): (i64, i64, &[(i64, i64, i64, i64)]) = match class {
        DecorClass::Bed => (56, 72, &[(10, 10, 14, 12), (32, 10, 14, 12)]),
        DecorClass::Sofa => (72, 36, &[(10, 10, 52, 16)]),
        DecorClass::LargeSofa => (104, 40, &[(10, 10, 38, 20), (56, 10, 38, 20)]),
        DecorClass::Table => (48, 48, &[]),
        DecorClass::Chair => (36, 36, &[(10, 10, 16, 16)]),
        DecorClass::Sink => (52, 48, &[(10, 10, 32, 16)]),
        DecorClass::TwinSink => (68, 40, &[(10, 10, 20, 20), (38, 10, 20, 20)]),
        DecorClass::LargeSink => (76, 44, &[(10, 10, 32, 24), (50, 10, 16, 16)]),
        DecorClass::Tub => (52, 100, &[(10, 10, 32, 80)]),
        DecorClass::Stove => (60, 60, &[(10, 10, 16, 16), (34, 10, 16, 16), (10, 34, 16, 16), (34, 34, 16, 16)]),
        DecorClass::Wardrobe => (84, 32, &[]),
        DecorClass::Toilet => (40, 60, &[(10, 10, 20, 12), (10, 30, 20, 20)]),
    };
    let mut img = BinaryImage::new(w as usize, h as usize);
    outline(&mut img, 0, 0, w, h);
    for &(x, y, pw, ph) in parts {
        outline(&mut img, x, y, pw, ph);
    }
    match class {
        // hanging rod
        DecorClass::Wardrobe => img.fill_rect(&Rect::new(10, 15, 73, 16), true),
        // tap
        DecorClass::Sink => img.fill_rect(&Rect::new(18, 34, 33, 35), true),
        _ => {}
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_examples() {
        let mut one = BinaryImage::new(10, 10);
        one.fill_rect(&Rect::new(2, 2, 6, 6), true);
        assert_eq!(compute_signature(&one).unwrap(), Signature([1.0, 0.0, 0.0]));

        let mut two = BinaryImage::new(20, 10);
        two.fill_rect(&Rect::new(1, 1, 4, 4), true);
        two.fill_rect(&Rect::new(10, 1, 13, 4), true);
        assert_eq!(compute_signature(&two).unwrap(), Signature([1.0, 1.0, 0.0]));

        // 100, 50, 25 and 10 px components, spaced beyond the healing radius
        let mut four = BinaryImage::new(60, 12);
        four.fill_rect(&Rect::new(0, 0, 9, 9), true);
        four.fill_rect(&Rect::new(14, 0, 23, 4), true);
        four.fill_rect(&Rect::new(28, 0, 32, 4), true);
        four.fill_rect(&Rect::new(37, 0, 46, 0), true);
        assert_eq!(compute_signature(&four).unwrap(), Signature([1.0, 0.5, 0.25]));

        assert!(compute_signature(&BinaryImage::new(4, 4)).is_err());
    }

    #[test]
    fn library_means() {
        let mut a = BinaryImage::new(10, 10);
        a.fill_rect(&Rect::new(2, 2, 6, 6), true);
        let mut b = BinaryImage::new(20, 10);
        b.fill_rect(&Rect::new(1, 1, 4, 4), true);
        b.fill_rect(&Rect::new(10, 1, 13, 4), true);
        let mut samples: Vec<(DecorClass, BinaryImage)> =
            DecorClass::ALL.iter().map(|&c| (c, glyph(c))).collect();
        let single = build_library(&samples).unwrap();
        for c in DecorClass::ALL {
            assert_eq!(single.get(c), compute_signature(&glyph(c)).unwrap());
        }
        samples.push((DecorClass::Bed, glyph(DecorClass::Bed)));
        assert_eq!(build_library(&samples).unwrap().get(DecorClass::Bed), single.get(DecorClass::Bed));

        samples.retain(|(c, _)| *c != DecorClass::Table);
        samples.push((DecorClass::Table, a));
        samples.push((DecorClass::Table, b));
        assert_eq!(build_library(&samples).unwrap().get(DecorClass::Table), Signature([1.0, 0.5, 0.0]));
    }

    #[test]
    fn missing_classes_listed() {
        let samples = vec![(DecorClass::Bed, glyph(DecorClass::Bed))];
        match build_library(&samples) {
            Err(DecorError::IncompleteLibrary(missing)) => {
                assert_eq!(missing.len(), 11);
                assert!(missing.contains(&"toilet"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn library_text_format() {
        let lib = canonical_library();
        let text = lib.to_text();
        assert_eq!(text.lines().count(), 12);
        assert!(text.lines().next().unwrap().starts_with("1 1.000000 "));
        let back = SignatureLibrary::from_text(&text).unwrap();
        for c in DecorClass::ALL {
            assert!(back.get(c).distance(&lib.get(c)) < 1e-6);
        }
        assert!(SignatureLibrary::from_text("1 1.0 0.5 0.0\n").is_err());
    }

    #[test]
    fn canonical_signatures_are_separated() {
        let lib = canonical_library();
        let mut min = f64::INFINITY;
        for a in DecorClass::ALL {
            for b in DecorClass::ALL {
                if a < b {
                    min = min.min(lib.get(a).distance(&lib.get(b)));
                }
            }
        }
        assert!(min > 0.04, "closest library pair only {min}");
    }

    #[test]
    fn signatures_invariant_to_rotation_and_scale() {
        for c in DecorClass::ALL {
            let g = glyph(c);
            let s = compute_signature(&g).unwrap();
            for v in dihedral_variants(&g) {
                assert_eq!(compute_signature(&v).unwrap(), s, "{c:?}");
            }
            let up = compute_signature(&g.scaled(2.0)).unwrap();
            assert!(up.distance(&s) < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn glyphs_do_not_survive_wall_extraction() {
        // the segmentation defaults: closing radius 3, then a 4x4 box opening
        for c in DecorClass::ALL {
            for g in dihedral_variants(&glyph(c)) {
                let closed = raster::morph(&g.padded(8), &StructuringElement::square(3), MorphOp::Close);
                let opened = raster::open_box(&closed, 4);
                assert!(opened.is_blank(), "{c:?}");
            }
        }
    }

    #[test]
    fn classify_exact_glyphs() {
        let lib = canonical_library();
        let walls = BinaryImage::new(200, 160);
        assert!(classify_decors(&walls, &walls, &lib, 30, 3).is_empty());
        for c in DecorClass::ALL {
            let g = glyph(c).rotate90();
            let mut crop = BinaryImage::new(200, 160);
            crop.stamp(&g, 20, 15);
            let found = classify_decors(&crop, &walls, &lib, 30, 3);
            assert_eq!(found.len(), 1, "{c:?}");
            assert_eq!(found[0].class, c);
            assert_eq!(
                found[0].bbox,
                Rect::new(20, 15, 20 + g.width() as i64 - 1, 15 + g.height() as i64 - 1)
            );
        }
    }

    #[test]
    fn walls_are_subtracted_before_blob_detection() {
        let lib = canonical_library();
        let mut crop = BinaryImage::new(120, 120);
        let mut walls = BinaryImage::new(120, 120);
        walls.fill_rect(&Rect::new(0, 0, 119, 3), true);
        crop.fill_rect(&Rect::new(0, 0, 119, 3), true);
        crop.stamp(&glyph(DecorClass::Chair), 40, 40);
        let found = classify_decors(&crop, &walls, &lib, 30, 3);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].class, DecorClass::Chair);
    }
}
