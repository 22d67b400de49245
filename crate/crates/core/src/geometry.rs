//! Square families and rotation-free similarities of the construction.
//!
//! Notation used throughout the crate:
//!
//! * `P(j, k)`: the Fatou squares centred at `(2j+1, 2k+1)` with half-side
//!   `1 - 2^(-|j|-|k|-1)`, and `S(j, k)` the unit-half-side squares tiling the
//!   plane around them;
//! * `Q(j, m)`, `m = 3, 2, 1`: nested squares centred at the integer `j >= 1`;
//! * `R(j, l, m)`: the 16 cells of `Q(j, 3)` and their two insets;
//! * `phi(j, l)`: the similarity taking `R(j, l, 1)` onto `Q(j+1, 2)`.
//!
//! All constants come from a [`Construction`]; [`Construction::STANDARD`] is
//! the construction itself, other values exist so tests can check that the
//! proof ledger notices when a constant is changed.

use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numbers::{pow2, QBox, QPoint, Rat};

/// Nesting level of a `Q` or `R` square: 3 is the outermost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    One,
    Two,
    Three,
}

impl TryFrom<u8> for Level {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Level::One),
            2 => Ok(Level::Two),
            3 => Ok(Level::Three),
            other => Err(Error::Level(other)),
        }
    }
}

impl Level {
    pub fn index(self) -> u8 {
        match self {
            Level::One => 1,
            Level::Two => 2,
            Level::Three => 3,
        }
    }
}

/// Closed axis-aligned square.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRect {
    pub center: QPoint,
    pub half: Rat,
}

/// Result of an exact containment query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Containment {
    pub contained: bool,
    /// Minimum over the four sides of (outer bound - inner bound).
    pub margin: Rat,
}

impl QRect {
    pub fn new(center: QPoint, half: Rat) -> Result<Self> {
        if !half.is_positive() {
            return Err(Error::DegenerateSquare(half));
        }
        Ok(QRect { center, half })
    }

    pub fn side(&self) -> Rat {
        &self.half * &Rat::integer(2)
    }

    pub fn area(&self) -> Rat {
        self.side().square()
    }

    pub fn to_box(&self) -> QBox {
        QBox {
            x_lo: &self.center.x - &self.half,
            x_hi: &self.center.x + &self.half,
            y_lo: &self.center.y - &self.half,
            y_hi: &self.center.y + &self.half,
        }
    }

    /// Corners in the order bottom-left, bottom-right, top-right, top-left.
    pub fn corners(&self) -> [QPoint; 4] {
        let b = self.to_box();
        [
            QPoint::new(b.x_lo.clone(), b.y_lo.clone()),
            QPoint::new(b.x_hi.clone(), b.y_lo.clone()),
            QPoint::new(b.x_hi.clone(), b.y_hi.clone()),
            QPoint::new(b.x_lo, b.y_hi),
        ]
    }

    pub fn contains_point(&self, p: &QPoint) -> bool {
        self.center.linf_dist(p) <= self.half
    }

    pub fn on_boundary(&self, p: &QPoint) -> bool {
        self.center.linf_dist(p) == self.half
    }

    pub fn contains(&self, inner: &QRect) -> Containment {
        let margin = &self.half - &inner.half - self.center.linf_dist(&inner.center);
        Containment {
            contained: !margin.is_negative(),
            margin,
        }
    }

    /// Chebyshev gap between two closed squares: positive iff they are
    /// disjoint, in which case it is their L-infinity distance.
    pub fn gap(&self, other: &QRect) -> Rat {
        self.center.linf_dist(&other.center) - &self.half - &other.half
    }

    /// Closed intersection with a box.
    pub fn intersects_box(&self, b: &QBox) -> bool {
        self.to_box().intersects(b)
    }
}

impl Serialize for QRect {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            cx: &'a Rat,
            cy: &'a Rat,
            half: &'a Rat,
        }
        Repr {
            cx: &self.center.x,
            cy: &self.center.y,
            half: &self.half,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QRect {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            cx: Rat,
            cy: Rat,
            half: Rat,
        }
        let r = Repr::deserialize(deserializer)?;
        QRect::new(QPoint::new(r.cx, r.cy), r.half).map_err(serde::de::Error::custom)
    }
}

pub fn box_of_rect(s: &QRect) -> QBox {
    s.to_box()
}

pub fn rect_contains(outer: &QRect, inner: &QRect) -> Containment {
    outer.contains(inner)
}

/// `z -> scale * z + offset` with `scale > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: Rat,
    pub offset: QPoint,
}

impl AffineMap {
    pub fn new(scale: Rat, offset: QPoint) -> Result<Self> {
        if !scale.is_positive() {
            return Err(Error::NonPositiveScale(scale));
        }
        Ok(AffineMap { scale, offset })
    }

    pub fn identity() -> Self {
        AffineMap {
            scale: Rat::one(),
            offset: QPoint::ints(0, 0),
        }
    }

    pub fn apply(&self, z: &QPoint) -> QPoint {
        QPoint::new(
            &self.scale * &z.x + &self.offset.x,
            &self.scale * &z.y + &self.offset.y,
        )
    }

    pub fn apply_inverse(&self, w: &QPoint) -> QPoint {
        QPoint::new(
            (&w.x - &self.offset.x) / &self.scale,
            (&w.y - &self.offset.y) / &self.scale,
        )
    }

    pub fn apply_box(&self, b: &QBox) -> QBox {
        let lo = self.apply(&QPoint::new(b.x_lo.clone(), b.y_lo.clone()));
        let hi = self.apply(&QPoint::new(b.x_hi.clone(), b.y_hi.clone()));
        QBox {
            x_lo: lo.x,
            x_hi: hi.x,
            y_lo: lo.y,
            y_hi: hi.y,
        }
    }

    pub fn image(&self, s: &QRect) -> QRect {
        QRect {
            center: self.apply(&s.center),
            half: &s.half * &self.scale,
        }
    }

    pub fn preimage(&self, s: &QRect) -> QRect {
        QRect {
            center: self.apply_inverse(&s.center),
            half: &s.half / &self.scale,
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn after(&self, inner: &AffineMap) -> AffineMap {
        AffineMap {
            scale: &self.scale * &inner.scale,
            offset: self.apply(&inner.offset),
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = Rat::one() / &self.scale;
        AffineMap {
            offset: QPoint::new(-(&self.offset.x * &inv), -(&self.offset.y * &inv)),
            scale: inv,
        }
    }
}

pub fn affine_apply(m: &AffineMap, z: &QPoint) -> QPoint {
    m.apply(z)
}

pub fn affine_apply_box(m: &AffineMap, b: &QBox) -> QBox {
    m.apply_box(b)
}

pub fn affine_preimage(m: &AffineMap, s: &QRect) -> QRect {
    m.preimage(s)
}

/// Which piece of the model map's domain a point lies in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    P { j: i32, k: i32 },
    R2 { j: u32, l: u32, in_r1: bool },
    Q3Gap { j: u32 },
    Complement,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionTag {
    pub region: Region,
    /// The point lies on the boundary of the tagged square (`P`, `R2` or `Q3`).
    pub boundary: bool,
}

impl RegionTag {
    pub fn short(&self) -> String {
        let base = match &self.region {
            Region::P { j, k } => format!("P({j},{k})"),
            Region::R2 { j, l, in_r1 } => {
                format!("R2({j},{l}){}", if *in_r1 { "+R1" } else { "" })
            }
            Region::Q3Gap { j } => format!("Q3gap({j})"),
            Region::Complement => "complement".to_string(),
        };
        if self.boundary {
            format!("{base}@boundary")
        } else {
            base
        }
    }
}

/// The constants that define the square families.
///
/// `delta(j) = 2^-(delta_slope*j + delta_offset)`; `R(j,l,1)` and `R(j,l,2)`
/// have side `2^(-j-3) - inset*delta(j)`; `phi(j,l)` maps `R(j,l,1)` onto
/// `Q(j+1, phi_target)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Construction {
    pub delta_slope: u32,
    pub delta_offset: u32,
    pub r1_side_inset: u32,
    pub r2_side_inset: u32,
    pub phi_target: Level,
}

impl Default for Construction {
    fn default() -> Self {
        Construction::STANDARD
    }
}

fn check_j(j: u32) -> Result<()> {
    if j < 1 {
        return Err(Error::IndexBelowOne(j as i64));
    }
    Ok(())
}

fn check_l(l: u32) -> Result<()> {
    if !(1..=16).contains(&l) {
        return Err(Error::CellIndex(l));
    }
    Ok(())
}

/// `|d| <= 2^-e`, deciding from the denominator size when that suffices so
/// that huge `e` never materialises a huge power of two.
fn within_dyadic(d: &Rat, e: u64) -> bool {
    if d.is_zero() {
        return true;
    }
    if d.denom().bits() <= e {
        return false;
    }
    d.abs() <= pow2(-(e as i64))
}

impl Construction {
    pub const STANDARD: Construction = Construction {
        delta_slope: 2,
        delta_offset: 6,
        r1_side_inset: 4,
        r2_side_inset: 2,
        phi_target: Level::Two,
    };

    pub fn delta(&self, j: u32) -> Result<Rat> {
        check_j(j)?;
        Ok(pow2(
            -(self.delta_slope as i64 * j as i64 + self.delta_offset as i64),
        ))
    }

    pub fn square_q(&self, j: u32, level: Level) -> Result<QRect> {
        let d = self.delta(j)?;
        let h3 = pow2(-(j as i64) - 2);
        let half = match level {
            Level::Three => h3,
            Level::Two => h3 - d,
            Level::One => h3 - d * Rat::integer(2),
        };
        QRect::new(QPoint::new(Rat::integer(j as i64), Rat::zero()), half)
    }

    /// Center of the `l`-th cell of the 4x4 subdivision of `Q(j, 3)`, cells
    /// numbered row-major from the top-left.
    pub fn cell_center(&self, j: u32, l: u32) -> Result<QPoint> {
        check_j(j)?;
        check_l(l)?;
        let h3 = pow2(-(j as i64) - 2);
        let cell = pow2(-(j as i64) - 3);
        let row = ((l - 1) / 4) as i64;
        let col = ((l - 1) % 4) as i64;
        let x = Rat::integer(j as i64) - &h3 + &cell * &Rat::new(2 * col + 1, 2);
        let y = &h3 - &cell * &Rat::new(2 * row + 1, 2);
        Ok(QPoint::new(x, y))
    }

    pub fn square_r(&self, j: u32, l: u32, level: Level) -> Result<QRect> {
        let center = self.cell_center(j, l)?;
        let d = self.delta(j)?;
        let h3 = pow2(-(j as i64) - 4);
        let half = match level {
            Level::Three => h3,
            Level::Two => h3 - d * Rat::new(self.r2_side_inset as i64, 2),
            Level::One => h3 - d * Rat::new(self.r1_side_inset as i64, 2),
        };
        QRect::new(center, half)
    }

    /// Scale of `phi(j, l)`; independent of `l`.
    pub fn phi_scale(&self, j: u32) -> Result<Rat> {
        let target = self.square_q(j + 1, self.phi_target)?;
        let source = self.square_r(j, 1, Level::One)?;
        Ok(target.half / source.half)
    }

    pub fn phi(&self, j: u32, l: u32) -> Result<AffineMap> {
        let target = self.square_q(j + 1, self.phi_target)?;
        let source = self.square_r(j, l, Level::One)?;
        let scale = &target.half / &source.half;
        let offset = QPoint::new(
            &target.center.x - &scale * &source.center.x,
            &target.center.y - &scale * &source.center.y,
        );
        AffineMap::new(scale, offset)
    }

    /// Classifies `z` against `P`, the `R2` squares and the `Q3` squares.
    ///
    /// Candidate indices are found by rounding, so the cost does not depend
    /// on how far out `z` lies. Points beyond `Q(u32::MAX, 3)` are reported
    /// as complement.
    pub fn locate(&self, z: &QPoint) -> RegionTag {
        if let (Some(j), Some(k)) = (
            (&z.x / &Rat::integer(2)).floor().to_i32(),
            (&z.y / &Rat::integer(2)).floor().to_i32(),
        ) {
            let p = square_p(j, k);
            if p.contains_point(z) {
                return RegionTag {
                    boundary: p.on_boundary(z),
                    region: Region::P { j, k },
                };
            }
        }

        let complement = RegionTag {
            region: Region::Complement,
            boundary: false,
        };
        let Some(j) = z.x.round_half_up().to_u32() else {
            return complement;
        };
        if j < 1 {
            return complement;
        }
        let dx = &z.x - &Rat::integer(j as i64);
        if !within_dyadic(&dx, j as u64 + 2) || !within_dyadic(&z.y, j as u64 + 2) {
            return complement;
        }
        let q3 = self
            .square_q(j, Level::Three)
            .expect("j >= 1 checked above");

        // Cell under z, plus its neighbours in case insets are zero.
        let cell = pow2(-(j as i64) - 3);
        let h3 = &q3.half;
        let col = ((&dx + h3) / &cell)
            .floor()
            .to_i64()
            .unwrap_or(0)
            .clamp(0, 3);
        let row = ((h3 - &z.y) / &cell)
            .floor()
            .to_i64()
            .unwrap_or(0)
            .clamp(0, 3);
        for r in (row - 1).max(0)..=(row + 1).min(3) {
            for c in (col - 1).max(0)..=(col + 1).min(3) {
                let l = (r * 4 + c + 1) as u32;
                let r2 = self.square_r(j, l, Level::Two).expect("valid cell");
                if r2.contains_point(z) {
                    let r1 = self.square_r(j, l, Level::One).expect("valid cell");
                    return RegionTag {
                        boundary: r2.on_boundary(z),
                        region: Region::R2 {
                            j,
                            l,
                            in_r1: r1.contains_point(z),
                        },
                    };
                }
            }
        }
        RegionTag {
            boundary: q3.on_boundary(z),
            region: Region::Q3Gap { j },
        }
    }
}

pub fn delta(j: u32) -> Result<Rat> {
    Construction::STANDARD.delta(j)
}

/// `P(j, k)`: centre `(2j+1, 2k+1)`, half-side `1 - 2^(-|j|-|k|-1)`.
pub fn square_p(j: i32, k: i32) -> QRect {
    let n = j.unsigned_abs() as i64 + k.unsigned_abs() as i64 + 1;
    QRect {
        center: QPoint::ints(2 * j as i64 + 1, 2 * k as i64 + 1),
        half: Rat::one() - pow2(-n),
    }
}

/// `S(j, k)`: centre `(2j+1, 2k+1)`, half-side 1. These tile the plane.
pub fn square_s(j: i32, k: i32) -> QRect {
    QRect {
        center: QPoint::ints(2 * j as i64 + 1, 2 * k as i64 + 1),
        half: Rat::one(),
    }
}

pub fn square_q(j: u32, level: Level) -> Result<QRect> {
    Construction::STANDARD.square_q(j, level)
}

pub fn square_r(j: u32, l: u32, level: Level) -> Result<QRect> {
    Construction::STANDARD.square_r(j, l, level)
}

pub fn phi(j: u32, l: u32) -> Result<AffineMap> {
    Construction::STANDARD.phi(j, l)
}

pub fn locate(z: &QPoint) -> RegionTag {
    Construction::STANDARD.locate(z)
}
