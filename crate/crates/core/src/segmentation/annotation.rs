use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::superpixels::SuperpixelMap;
use crate::error::{Error, Result};
use crate::graph::VertexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationKind {
    ScribbleForeground,
    ScribbleWithErrors,
    BoundingBox,
    LooseBox,
}

impl AnnotationKind {
    pub fn is_box(self) -> bool {
        matches!(self, AnnotationKind::BoundingBox | AnnotationKind::LooseBox)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrokeTag {
    #[serde(alias = "foreground")]
    Fg,
    #[serde(alias = "background")]
    Bg,
}

/// A polyline in pixel coordinates. Consecutive points are joined by
/// rasterized segments; a single point marks one pixel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stroke {
    pub tag: StrokeTag,
    pub points: Vec<[i64; 2]>,
}

/// Axis-aligned rectangle, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i64; 4]", into = "[i64; 4]")]
pub struct BoxRect {
    pub x: i64,
    pub y: i64,
    pub w: i64,
    pub h: i64,
}

impl From<[i64; 4]> for BoxRect {
    fn from([x, y, w, h]: [i64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BoxRect> for [i64; 4] {
    fn from(b: BoxRect) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BoxRect {
    pub fn new(x: i64, y: i64, w: i64, h: i64) -> Self {
        Self { x, y, w, h }
    }

    pub fn area(&self) -> i64 {
        self.w.max(0) * self.h.max(0)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.w && y < self.y + self.h
    }

    /// Intersection with `[0, width) x [0, height)`.
    pub fn clamp(&self, width: u32, height: u32) -> Self {
        let x0 = self.x.clamp(0, width as i64);
        let y0 = self.y.clamp(0, height as i64);
        let x1 = (self.x + self.w).clamp(0, width as i64);
        let y1 = (self.y + self.h).clamp(0, height as i64);
        Self::new(x0, y0, (x1 - x0).max(0), (y1 - y0).max(0))
    }

    /// Pixels of the one-pixel-wide outline.
    pub fn ring(&self) -> Vec<(i64, i64)> {
        if self.area() == 0 {
            return Vec::new();
        }
        let (x1, y1) = (self.x + self.w - 1, self.y + self.h - 1);
        let mut out = BTreeSet::new();
        for x in self.x..=x1 {
            out.insert((x, self.y));
            out.insert((x, y1));
        }
        for y in self.y..=y1 {
            out.insert((self.x, y));
            out.insert((x1, y));
        }
        out.into_iter().collect()
    }
}

/// Grows `b` by the same pad on every side so its area becomes
/// `(1 + looseness / 100)` times larger, then crops it to the image.
pub fn dilate_box(b: BoxRect, looseness_percent: f64, width: u32, height: u32) -> Result<BoxRect> {
    if !(looseness_percent >= 0.0 && looseness_percent.is_finite()) {
        return Err(Error::Annotation(format!(
            "looseness must be >= 0, got {looseness_percent}"
        )));
    }
    let (w, h) = (b.w as f64, b.h as f64);
    let factor = 1.0 + looseness_percent / 100.0;
    // (w + 2p)(h + 2p) = factor * w * h
    let disc = (w + h).powi(2) + 4.0 * w * h * (factor - 1.0);
    let pad = ((disc.sqrt() - (w + h)) / 4.0).round() as i64;
    Ok(BoxRect::new(b.x - pad, b.y - pad, b.w + 2 * pad, b.h + 2 * pad).clamp(width, height))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub kind: AnnotationKind,
    #[serde(default)]
    pub strokes: Vec<Stroke>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub rect: Option<BoxRect>,
    #[serde(default)]
    pub looseness: f64,
}

impl Annotation {
    pub fn scribble(points: Vec<[i64; 2]>) -> Self {
        Self {
            kind: AnnotationKind::ScribbleForeground,
            strokes: vec![Stroke {
                tag: StrokeTag::Fg,
                points,
            }],
            rect: None,
            looseness: 0.0,
        }
    }

    pub fn bounding_box(rect: BoxRect) -> Self {
        Self {
            kind: AnnotationKind::BoundingBox,
            strokes: Vec::new(),
            rect: Some(rect),
            looseness: 0.0,
        }
    }

    pub fn loose_box(rect: BoxRect, looseness: f64) -> Self {
        Self {
            kind: AnnotationKind::LooseBox,
            strokes: Vec::new(),
            rect: Some(rect),
            looseness,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("annotations serialize")
    }

    fn has(&self, tag: StrokeTag) -> bool {
        self.strokes
            .iter()
            .any(|s| s.tag == tag && !s.points.is_empty())
    }

    /// Structural checks that do not need the image.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Annotation(m.to_string()));
        if !(self.looseness >= 0.0 && self.looseness.is_finite()) {
            return fail("looseness must be a finite value >= 0");
        }
        if self.kind.is_box() {
            let Some(rect) = self.rect else {
                return fail("box annotations need a box");
            };
            if rect.w <= 0 || rect.h <= 0 {
                return fail("box has zero area");
            }
            if !self.strokes.is_empty() {
                return fail("box annotations carry no strokes");
            }
            return Ok(());
        }
        if self.rect.is_some() {
            return fail("scribble annotations carry no box");
        }
        if self.looseness != 0.0 {
            return fail("looseness applies to box annotations only");
        }
        if !self.has(StrokeTag::Fg) {
            return fail("no foreground stroke");
        }
        match self.kind {
            AnnotationKind::ScribbleForeground if self.has(StrokeTag::Bg) => {
                fail("scribble-foreground annotations have no background strokes")
            }
            AnnotationKind::ScribbleWithErrors if !self.has(StrokeTag::Bg) => {
                fail("scribble-with-errors needs a background stroke")
            }
            _ => Ok(()),
        }
    }

    /// The box the algorithm sees: dilated for loose boxes, cropped to the image.
    pub fn effective_box(&self, width: u32, height: u32) -> Result<Option<BoxRect>> {
        let Some(rect) = self.rect.filter(|_| self.kind.is_box()) else {
            return Ok(None);
        };
        let b = dilate_box(rect, self.looseness, width, height)?;
        if b.area() == 0 {
            return Err(Error::Annotation("box lies outside the image".into()));
        }
        Ok(Some(b))
    }
}

/// Pixels on the polyline, clipped to the image.
pub fn rasterize(stroke: &Stroke, width: u32, height: u32) -> Vec<(u32, u32)> {
    let mut out = BTreeSet::new();
    let mut push = |x: i64, y: i64| {
        if x >= 0 && y >= 0 && x < width as i64 && y < height as i64 {
            out.insert((y as u32, x as u32));
        }
    };
    let pts = &stroke.points;
    if let [[x, y]] = pts.as_slice() {
        push(*x, *y);
    }
    for seg in pts.windows(2) {
        let ([x0, y0], [x1, y1]) = (seg[0], seg[1]);
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            push(x, y);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }
    out.into_iter().map(|(y, x)| (x, y)).collect()
}

/// Whether the extracted union is the answer or its complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    Foreground,
    Complement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    /// Superpixels the extracted clusters must meet.
    pub seeds: VertexSet,
    /// Superpixels under background strokes (error-tolerant mode).
    pub background: VertexSet,
    pub mode: OutputMode,
    /// Box handed to the algorithm, after dilation and cropping.
    pub rect: Option<BoxRect>,
    /// Superpixels the graph is restricted to: those meeting the box.
    /// Everything else is background. `None` uses the whole image.
    pub domain: Option<VertexSet>,
}

pub fn annotation_to_constraints(ann: &Annotation, sp: &SuperpixelMap) -> Result<Constraints> {
    ann.validate()?;
    let (w, h) = (sp.width(), sp.height());
    if let Some(rect) = ann.effective_box(w, h)? {
        let seeds = VertexSet::from_iter_dedup(
            rect.ring()
                .into_iter()
                .map(|(x, y)| sp.label(x as u32, y as u32)),
        );
        let inside =
            (rect.y..rect.y + rect.h).flat_map(|y| (rect.x..rect.x + rect.w).map(move |x| (x, y)));
        let domain = VertexSet::from_iter_dedup(inside.map(|(x, y)| sp.label(x as u32, y as u32)));
        return Ok(Constraints {
            seeds,
            background: VertexSet::empty(),
            mode: OutputMode::Complement,
            rect: Some(rect),
            domain: Some(domain),
        });
    }
    let hits = |tag: StrokeTag| {
        VertexSet::from_iter_dedup(
            ann.strokes
                .iter()
                .filter(|s| s.tag == tag)
                .flat_map(|s| rasterize(s, w, h))
                .map(|(x, y)| sp.label(x, y)),
        )
    };
    let seeds = hits(StrokeTag::Fg);
    if seeds.is_empty() {
        return Err(Error::Annotation(
            "the foreground strokes miss every superpixel".into(),
        ));
    }
    Ok(Constraints {
        seeds,
        background: hits(StrokeTag::Bg),
        mode: OutputMode::Foreground,
        rect: None,
        domain: None,
    })
}
