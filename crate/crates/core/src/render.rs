//! Figures: the overview of `P` and `Q3` squares, the zoom on one `Q(j)`
//! with its sixteen cells, and levels of the Cantor tree.
//!
//! Scenes hold exact geometry. Coordinates are only turned into decimals
//! (SVG) or floats (PPM raster) at serialization time, and nothing here feeds
//! back into the certified computations.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{square_p, Construction, Level, QRect};
use crate::numbers::{QBox, Rat};
use crate::tree::CantorTree;

pub const DEFAULT_PRECISION: usize = 12;
pub const DEFAULT_WIDTH_PX: i64 = 800;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Outline,
    Fill,
}

/// Shape classes, in drawing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeClass {
    P,
    Q3Fill,
    Q2,
    Q1,
    Q3,
    R3,
    R2,
    R1,
    TreeRoot,
    TreeNode,
}

impl ShapeClass {
    fn css(self) -> &'static str {
        match self {
            ShapeClass::P => "p",
            ShapeClass::Q3Fill => "q3fill",
            ShapeClass::Q2 => "q2",
            ShapeClass::Q1 => "q1",
            ShapeClass::Q3 => "q3",
            ShapeClass::R3 => "r3",
            ShapeClass::R2 => "r2",
            ShapeClass::R1 => "r1",
            ShapeClass::TreeRoot => "troot",
            ShapeClass::TreeNode => "tnode",
        }
    }

    fn style(self) -> Style {
        match self {
            ShapeClass::Q3Fill | ShapeClass::Q2 | ShapeClass::Q1 | ShapeClass::TreeNode => {
                Style::Fill
            }
            _ => Style::Outline,
        }
    }

    /// Raster grey level; outlines are always black.
    fn grey(self) -> u8 {
        match self {
            ShapeClass::Q2 => 0xB0,
            ShapeClass::Q1 => 0x80,
            _ => 0x00,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub rect: QRect,
    pub class: ShapeClass,
    pub style: Style,
}

impl Shape {
    fn new(rect: QRect, class: ShapeClass) -> Self {
        Shape {
            rect,
            class,
            style: class.style(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Scene {
    pub viewport: QBox,
    pub shapes: Vec<Shape>,
    /// Pixels per unit.
    pub scale: Rat,
    pub metadata: Vec<(String, String)>,
}

impl Scene {
    fn new(viewport: QBox, mut shapes: Vec<Shape>, metadata: Vec<(String, String)>) -> Self {
        // Stable sort keeps construction order within a class.
        shapes.sort_by_key(|s| s.class);
        let scale = Rat::integer(DEFAULT_WIDTH_PX) / viewport.width();
        Scene {
            viewport,
            shapes,
            scale,
            metadata,
        }
    }

    pub fn count(&self, class: ShapeClass) -> usize {
        self.shapes.iter().filter(|s| s.class == class).count()
    }

    fn pixel_size(&self) -> (Rat, Rat) {
        (
            self.viewport.width() * &self.scale,
            self.viewport.height() * &self.scale,
        )
    }

    pub fn to_svg(&self, precision: usize) -> String {
        let fmt = |v: &Rat| v.to_decimal(precision);
        let (w, h) = self.pixel_size();
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
            fmt(&w),
            fmt(&h),
            fmt(&w),
            fmt(&h)
        );
        out.push_str("<metadata>");
        for (k, v) in &self.metadata {
            let _ = write!(out, "<meta name=\"{k}\" value=\"{v}\"/>");
        }
        out.push_str("</metadata>\n");
        out.push_str(
            "<style>\
rect{stroke-width:1}\
.p{fill:white;stroke:black}\
.q3fill{fill:black;stroke:none}\
.q2{fill:#b0b0b0;stroke:none}\
.q1{fill:#808080;stroke:none}\
.q3{fill:none;stroke:black;stroke-width:2}\
.r3{fill:none;stroke:black}\
.r2{fill:none;stroke:black;stroke-dasharray:4 2}\
.r1{fill:none;stroke:black;stroke-dasharray:1 2}\
.troot{fill:none;stroke:black}\
.tnode{fill:black;stroke:none}\
</style>\n",
        );
        let _ = writeln!(
            out,
            "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"none\"/>",
            fmt(&w),
            fmt(&h)
        );
        for s in &self.shapes {
            let b = s.rect.to_box();
            let x = (&b.x_lo - &self.viewport.x_lo) * &self.scale;
            let y = (&self.viewport.y_hi - &b.y_hi) * &self.scale;
            let side = s.rect.side() * &self.scale;
            let _ = writeln!(
                out,
                "<rect class=\"{}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                s.class.css(),
                fmt(&x),
                fmt(&y),
                fmt(&side),
                fmt(&side)
            );
        }
        out.push_str("</svg>\n");
        out
    }

    /// Binary PPM (P6, 8-bit): white background, fills in their grey level,
    /// outlines one pixel wide in black.
    pub fn to_ppm(&self) -> Vec<u8> {
        let (w, h) = self.pixel_size();
        let width = w.to_f64().ceil().max(1.0) as usize;
        let height = h.to_f64().ceil().max(1.0) as usize;
        let mut pixels = vec![0xFFu8; width * height * 3];
        let scale = self.scale.to_f64();
        let vx = self.viewport.x_lo.to_f64();
        let vy = self.viewport.y_hi.to_f64();
        for s in &self.shapes {
            let b = s.rect.to_box();
            let x0 = (b.x_lo.to_f64() - vx) * scale;
            let x1 = (b.x_hi.to_f64() - vx) * scale;
            let y0 = (vy - b.y_hi.to_f64()) * scale;
            let y1 = (vy - b.y_lo.to_f64()) * scale;
            let grey = s.class.grey();
            let lo = |v: f64| ((v - 1.0).floor().max(0.0)) as usize;
            let (px0, px1) = (lo(x0), ((x1 + 1.0).ceil().max(0.0) as usize).min(width));
            let (py0, py1) = (lo(y0), ((y1 + 1.0).ceil().max(0.0) as usize).min(height));
            for py in py0..py1 {
                let cy = py as f64 + 0.5;
                for px in px0..px1 {
                    let cx = px as f64 + 0.5;
                    let paint = match s.style {
                        Style::Fill => x0 <= cx && cx <= x1 && y0 <= cy && cy <= y1,
                        Style::Outline => {
                            let inside_outer = x0 - 0.5 <= cx
                                && cx <= x1 + 0.5
                                && y0 - 0.5 <= cy
                                && cy <= y1 + 0.5;
                            let inside_inner =
                                x0 + 0.5 < cx && cx < x1 - 0.5 && y0 + 0.5 < cy && cy < y1 - 0.5;
                            inside_outer && !inside_inner
                        }
                    };
                    if paint {
                        let i = (py * width + px) * 3;
                        pixels[i..i + 3].copy_from_slice(&[grey, grey, grey]);
                    }
                }
            }
        }
        let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
        out.extend_from_slice(&pixels);
        out
    }
}

fn check_viewport(v: &QBox) -> Result<()> {
    if v.width().is_positive() && v.height().is_positive() {
        Ok(())
    } else {
        Err(Error::EmptyViewport)
    }
}

/// Upper bound on shapes an overview may produce before it is refused.
pub const MAX_OVERVIEW_SHAPES: i64 = 1_000_000;

/// All `P(j,k)` outlines and filled `Q(j,3)` meeting the (closed) viewport.
pub fn render_overview(viewport: &QBox) -> Result<Scene> {
    check_viewport(viewport)?;
    let c = Construction::STANDARD;
    let to_i64 = |r: Rat| -> Result<i64> {
        num_traits::ToPrimitive::to_i64(&r.floor())
            .ok_or_else(|| Error::Invalid("viewport too far out".into()))
    };
    let jx0 = to_i64(&viewport.x_lo / &Rat::integer(2))? - 1;
    let jx1 = to_i64(&viewport.x_hi / &Rat::integer(2))? + 1;
    let ky0 = to_i64(&viewport.y_lo / &Rat::integer(2))? - 1;
    let ky1 = to_i64(&viewport.y_hi / &Rat::integer(2))? + 1;
    if (jx1 - jx0 + 1).saturating_mul(ky1 - ky0 + 1) > MAX_OVERVIEW_SHAPES {
        return Err(Error::Invalid("viewport covers too many squares".into()));
    }
    let mut shapes = Vec::new();
    for j in jx0..=jx1 {
        for k in ky0..=ky1 {
            let (Ok(j), Ok(k)) = (i32::try_from(j), i32::try_from(k)) else {
                continue;
            };
            let p = square_p(j, k);
            if p.intersects_box(viewport) {
                shapes.push(Shape::new(p, ShapeClass::P));
            }
        }
    }
    let q0 = (to_i64(viewport.x_lo.clone())? - 1).max(1);
    let q1 = to_i64(viewport.x_hi.clone())? + 1;
    for j in q0..=q1 {
        let Ok(j) = u32::try_from(j) else { continue };
        let q = c.square_q(j, Level::Three)?;
        if q.intersects_box(viewport) {
            shapes.push(Shape::new(q, ShapeClass::Q3Fill));
        }
    }
    Ok(Scene::new(
        viewport.clone(),
        shapes,
        vec![("figure".into(), "overview".into())],
    ))
}

/// Largest inset exaggeration that keeps `R1` at least half the size of
/// `R3`: `half(R3) / (r1_side_inset * delta(j))`.
pub fn max_exaggeration(j: u32) -> Result<Rat> {
    let c = Construction::STANDARD;
    let h3 = c.square_r(j, 1, Level::Three)?.half;
    Ok(h3 / (Rat::integer(c.r1_side_inset as i64) * c.delta(j)?))
}

/// `Q(j, 3)` outline, `Q(j, 2)` and `Q(j, 1)` shaded, the 4x4 grid of `R3`
/// cells and the dashed `R2` and dotted `R1` insets.
///
/// Insets are multiplied by `exaggerate`, clamped to [`max_exaggeration`];
/// both factors are written into the metadata.
pub fn render_q_zoom(j: u32, exaggerate: &Rat) -> Result<Scene> {
    if !exaggerate.is_positive() {
        return Err(Error::Invalid("exaggeration must be positive".into()));
    }
    let c = Construction::STANDARD;
    let d = c.delta(j)?;
    let max = max_exaggeration(j)?;
    let factor = exaggerate.clone().min(max.clone());
    let inset = &d * &factor;

    let q3 = c.square_q(j, Level::Three)?;
    let shrink = |r: &QRect, by: Rat| QRect::new(r.center.clone(), &r.half - &by);
    let mut shapes = vec![
        Shape::new(shrink(&q3, inset.clone())?, ShapeClass::Q2),
        Shape::new(shrink(&q3, &inset * &Rat::integer(2))?, ShapeClass::Q1),
        Shape::new(q3.clone(), ShapeClass::Q3),
    ];
    let r2_inset = &inset * &Rat::new(c.r2_side_inset as i64, 2);
    let r1_inset = &inset * &Rat::new(c.r1_side_inset as i64, 2);
    for l in 1..=16 {
        let r3 = c.square_r(j, l, Level::Three)?;
        shapes.push(Shape::new(shrink(&r3, r2_inset.clone())?, ShapeClass::R2));
        shapes.push(Shape::new(shrink(&r3, r1_inset.clone())?, ShapeClass::R1));
        shapes.push(Shape::new(r3, ShapeClass::R3));
    }
    let pad = &q3.half / &Rat::integer(4);
    let viewport = q3.to_box().inflate(&pad)?;
    let mut scene = Scene::new(viewport, shapes, Vec::new());
    let inset_px = &inset * &scene.scale;
    scene.metadata = vec![
        ("figure".into(), format!("q-zoom j={j}")),
        ("exaggerate_requested".into(), exaggerate.to_string()),
        ("exaggerate_effective".into(), factor.to_string()),
        ("exaggerate_clamped".into(), (exaggerate > &max).to_string()),
        ("inset_px".into(), inset_px.to_decimal(6)),
        (
            "insets_subpixel".into(),
            (inset_px < Rat::one()).to_string(),
        ),
    ];
    Ok(scene)
}

/// `R(1,1,1)` and every node of `T_depth`.
pub fn render_tree(depth: u32, cap: u128) -> Result<Scene> {
    let tree = CantorTree::default();
    let root = tree.root()?;
    let nodes = tree.enumerate_level(depth, cap)?;
    let mut shapes: Vec<Shape> = nodes
        .into_iter()
        .map(|n| Shape::new(n.rect, ShapeClass::TreeNode))
        .collect();
    if depth > 1 {
        shapes.push(Shape::new(root.rect.clone(), ShapeClass::TreeRoot));
    }
    let pad = &root.rect.half / &Rat::integer(16);
    let viewport = root.rect.to_box().inflate(&pad)?;
    Ok(Scene::new(
        viewport,
        shapes,
        vec![("figure".into(), format!("tree depth={depth}"))],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vp(x0: i64, x1: i64, y0: i64, y1: i64) -> QBox {
        QBox::new(x0.into(), x1.into(), y0.into(), y1.into()).unwrap()
    }

    #[test]
    fn overview_figure_layout() {
        let s = render_overview(&vp(-3, 9, -3, 5)).unwrap();
        assert!(s.count(ShapeClass::P) >= 20);
        for j in 1..=7 {
            let q = square_q3(j);
            assert!(s
                .shapes
                .iter()
                .any(|sh| sh.class == ShapeClass::Q3Fill && sh.rect == q));
        }
        for sh in &s.shapes {
            assert!(sh.rect.intersects_box(&s.viewport));
        }
        // Filled Q3 never meets a P outline.
        for q in s.shapes.iter().filter(|x| x.class == ShapeClass::Q3Fill) {
            for p in s.shapes.iter().filter(|x| x.class == ShapeClass::P) {
                assert!(q.rect.gap(&p.rect).is_positive());
            }
        }
    }

    fn square_q3(j: u32) -> QRect {
        Construction::STANDARD.square_q(j, Level::Three).unwrap()
    }

    #[test]
    fn overview_small_viewports() {
        let s = render_overview(&vp(0, 2, 0, 2)).unwrap();
        let got: Vec<_> = s.shapes.iter().map(|x| (x.class, x.rect.clone())).collect();
        assert_eq!(
            got,
            vec![
                (ShapeClass::P, square_p(0, 0)),
                (ShapeClass::Q3Fill, square_q3(1)),
                (ShapeClass::Q3Fill, square_q3(2)),
            ]
        );
        let gap = QBox::new(
            Rat::new(-200_001, 10_000),
            Rat::new(-199_999, 10_000),
            Rat::new(-1, 10_000),
            Rat::new(1, 10_000),
        )
        .unwrap();
        assert!(render_overview(&gap).unwrap().shapes.is_empty());
        assert_eq!(render_overview(&vp(0, 0, 0, 1)), Err(Error::EmptyViewport));
    }

    #[test]
    fn zoom_counts_and_insets() {
        let s = render_q_zoom(1, &Rat::one()).unwrap();
        assert_eq!(s.shapes.len(), 51);
        assert_eq!(s.count(ShapeClass::R1), 16);
        let q2 = s.shapes.iter().find(|x| x.class == ShapeClass::Q2).unwrap();
        let q3 = s.shapes.iter().find(|x| x.class == ShapeClass::Q3).unwrap();
        // inset / side of Q3 = delta_1 / (2 * 1/8) = 1/64
        assert_eq!(
            (&q3.rect.half - &q2.rect.half) / q3.rect.side(),
            Rat::new(1, 64)
        );
        let meta: std::collections::HashMap<_, _> = s.metadata.iter().cloned().collect();
        assert_eq!(meta["exaggerate_effective"], "1");
        assert_eq!(meta["insets_subpixel"], "false");
        assert_eq!(
            q2.rect,
            Construction::STANDARD.square_q(1, Level::Two).unwrap()
        );
    }

    #[test]
    fn zoom_exaggeration_is_clamped_and_recorded() {
        assert_eq!(max_exaggeration(1).unwrap(), Rat::integer(2));
        let s = render_q_zoom(1, &Rat::integer(8)).unwrap();
        let meta: std::collections::HashMap<_, _> = s.metadata.iter().cloned().collect();
        assert_eq!(meta["exaggerate_requested"], "8");
        assert_eq!(meta["exaggerate_effective"], "2");
        assert_eq!(meta["exaggerate_clamped"], "true");
        let s = render_q_zoom(6, &Rat::integer(8)).unwrap();
        let meta: std::collections::HashMap<_, _> = s.metadata.iter().cloned().collect();
        assert_eq!(meta["exaggerate_effective"], "8");
        let faithful = render_q_zoom(12, &Rat::one()).unwrap();
        let meta: std::collections::HashMap<_, _> = faithful.metadata.iter().cloned().collect();
        assert_eq!(meta["insets_subpixel"], "true");
        assert!(render_q_zoom(1, &Rat::zero()).is_err());
        assert!(render_q_zoom(0, &Rat::one()).is_err());
    }

    #[test]
    fn tree_scenes() {
        assert_eq!(render_tree(1, 1 << 16).unwrap().shapes.len(), 1);
        let s = render_tree(3, 1 << 16).unwrap();
        assert_eq!(s.count(ShapeClass::TreeNode), 256);
        let root = Construction::STANDARD.square_r(1, 1, Level::One).unwrap();
        for sh in &s.shapes {
            assert!(root.contains(&sh.rect).contained);
        }
        assert!(matches!(
            render_tree(8, 1 << 16),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn svg_is_deterministic_and_exact_before_rounding() {
        let a = render_q_zoom(1, &Rat::one())
            .unwrap()
            .to_svg(DEFAULT_PRECISION);
        let b = render_q_zoom(1, &Rat::one())
            .unwrap()
            .to_svg(DEFAULT_PRECISION);
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
        assert_eq!(a.matches("<rect class=").count(), 51);
        assert!(a.contains("class=\"r1\""));
        // Q3 spans 800 px * (1/4) / (1/4 + 1/16) = 640 px.
        assert!(a.contains("<rect class=\"q3\" x=\"80\" y=\"80\" width=\"640\" height=\"640\"/>"));
        let fine = render_q_zoom(3, &Rat::one())
            .unwrap()
            .to_svg(DEFAULT_PRECISION);
        let coarse = render_q_zoom(3, &Rat::one()).unwrap().to_svg(3);
        assert_ne!(fine, coarse);
    }

    #[test]
    fn ppm_raster() {
        let s = render_q_zoom(1, &Rat::integer(2)).unwrap();
        let ppm = s.to_ppm();
        let header = b"P6\n800 800\n255\n";
        assert_eq!(&ppm[..header.len()], header);
        assert_eq!(ppm.len(), header.len() + 800 * 800 * 3);
        let px = |x: usize, y: usize| ppm[header.len() + (y * 800 + x) * 3];
        assert_eq!(px(2, 2), 0xFF); // background
                                    // Insets are 20 px at this exaggeration: Q3 edge at 80, Q2 at 100, Q1 at 120.
        assert_eq!(px(80, 330), 0x00);
        assert_eq!(px(90, 330), 0xFF);
        assert_eq!(px(110, 330), 0xB0);
        assert_eq!(px(130, 330), 0x80);
        assert_eq!(s.to_ppm(), ppm);
    }
}
