//! The nested collections `T_j` as a 16-ary tree of exact preimage squares.
//!
//! Under the exact model every branch of the map is a similarity, so each
//! node of depth `j` is the preimage of some `R(j, l, 1)` under the composed
//! map `f^(j-1)`, and its 16 children are the preimages of the
//! `R(j+1, m, 1)`. Because `phi(j, l)` has the same scale for every `l`, all
//! nodes of one level are congruent and the per-level quantities have closed
//! forms; enumeration is kept as an independent cross-check.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{AffineMap, Construction, Level, QRect};
use crate::numbers::{pow2, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    /// Word over `1..=16` of length `depth - 1`.
    pub address: Vec<u8>,
    pub depth: u32,
    pub rect: QRect,
    /// Scale of `f^(depth-1)` on this node.
    pub contraction: Rat,
    /// `l` such that `f^(depth-1)(rect) = R(depth, l, 1)`.
    pub target: u32,
    /// The composed map `f^(depth-1)` restricted to this node.
    pub forward: AffineMap,
}

fn serialize_big<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub depth: u32,
    #[serde(serialize_with = "serialize_big")]
    pub node_count: BigInt,
    pub node_half_side: Rat,
    pub level_measure: Rat,
    /// `level_measure(j) - level_measure(j+1)` under the exact model.
    pub loss_to_next: Rat,
    /// Worst-case loss per node, `2^(-5j-5)`.
    pub worst_case_loss_bound: Rat,
}

impl LevelSummary {
    /// Worst-case loss of the whole level, `16^(j-1) * 2^(-5j-5) = 2^(-j-9)`.
    pub fn level_loss_bound(&self) -> Rat {
        Rat::from(self.node_count.clone()) * &self.worst_case_loss_bound
    }
}

pub fn node_count(j: u32) -> BigInt {
    BigInt::one() << (4 * (j.saturating_sub(1)) as usize)
}

/// Worst-case per-node loss at level `j`: `2^(-5j-5)`.
pub fn worst_case_loss_bound(j: u32) -> Rat {
    pow2(-5 * j as i64 - 5)
}

#[derive(Clone, Debug, Default)]
pub struct CantorTree {
    pub construction: Construction,
}

/// The sixteen `phi(j, l)` and the sixteen `R(j+1, m, 1)`, shared by every
/// node of level `j`.
struct LevelStep {
    depth: u32,
    phis: Vec<AffineMap>,
    images: Vec<QRect>,
}

impl LevelStep {
    fn new(c: &Construction, j: u32) -> Result<Self> {
        Ok(LevelStep {
            depth: j,
            phis: (1..=16).map(|l| c.phi(j, l)).collect::<Result<_>>()?,
            images: (1..=16)
                .map(|m| c.square_r(j + 1, m, Level::One))
                .collect::<Result<_>>()?,
        })
    }

    fn children(&self, node: &TreeNode) -> Vec<TreeNode> {
        let forward = self.phis[node.target as usize - 1].after(&node.forward);
        self.images
            .iter()
            .zip(1u32..)
            .map(|(image, m)| {
                let mut address = node.address.clone();
                address.push(m as u8);
                TreeNode {
                    address,
                    depth: self.depth + 1,
                    rect: forward.preimage(image),
                    contraction: forward.scale.clone(),
                    target: m,
                    forward: forward.clone(),
                }
            })
            .collect()
    }
}

impl CantorTree {
    pub fn new(construction: Construction) -> Self {
        CantorTree { construction }
    }

    pub fn root(&self) -> Result<TreeNode> {
        Ok(TreeNode {
            address: Vec::new(),
            depth: 1,
            rect: self.construction.square_r(1, 1, Level::One)?,
            contraction: Rat::one(),
            target: 1,
            forward: AffineMap::identity(),
        })
    }

    pub fn children(&self, node: &TreeNode) -> Result<Vec<TreeNode>> {
        let step = LevelStep::new(&self.construction, node.depth)?;
        Ok(step.children(node))
    }

    /// Half-side shared by every node of level `j`.
    pub fn node_half_side(&self, j: u32) -> Result<Rat> {
        let mut h = self.construction.square_r(j, 1, Level::One)?.half;
        for m in 1..j {
            h = h / self.construction.phi_scale(m)?;
        }
        Ok(h)
    }

    pub fn level_measure(&self, j: u32) -> Result<Rat> {
        let side = self.node_half_side(j)? * Rat::integer(2);
        Ok(Rat::from(node_count(j)) * side.square())
    }

    pub fn level_summary(&self, j: u32) -> Result<LevelSummary> {
        let node_half_side = self.node_half_side(j)?;
        let level_measure =
            Rat::from(node_count(j)) * (&node_half_side * &Rat::integer(2)).square();
        let next = self.level_measure(j + 1)?;
        Ok(LevelSummary {
            depth: j,
            node_count: node_count(j),
            node_half_side,
            loss_to_next: &level_measure - &next,
            level_measure,
            worst_case_loss_bound: worst_case_loss_bound(j),
        })
    }

    /// All nodes of level `j`, refused when `16^(j-1) > cap`.
    pub fn enumerate_level(&self, j: u32, cap: u128) -> Result<Vec<TreeNode>> {
        if j < 1 {
            return Err(Error::IndexBelowOne(j as i64));
        }
        let required = node_count(j);
        if required > BigInt::from(cap) {
            return Err(Error::CapExceeded {
                depth: j,
                required: required.to_u128().unwrap_or(u128::MAX),
                cap,
            });
        }
        let mut level = vec![self.root()?];
        for _ in 1..j {
            let step = LevelStep::new(&self.construction, level[0].depth)?;
            let mut next = Vec::with_capacity(level.len() * 16);
            for node in &level {
                next.extend(step.children(node));
            }
            level = next;
        }
        Ok(level)
    }

    /// Certified lower bound for the measure of the Cantor set: exact
    /// measure of level `d` minus the worst-case tail `sum_{j>=d} 2^(-j-9)`.
    pub fn measure_lower_bound(&self, d: u32) -> Result<Rat> {
        Ok(self.level_measure(d)? - pow2(-(d as i64) - 8))
    }
}

/// Smallest pairwise Chebyshev gap among `rects` (positive iff pairwise
/// disjoint), or `None` for fewer than two squares.
///
/// Squares are bucketed on a grid of pitch `4 * max half-side`. Pairs in
/// non-adjacent buckets have gap above `2 * max half-side`, so when a nearer
/// pair beats that the answer is exact; otherwise it falls back to all pairs.
pub fn min_pairwise_gap(rects: &[QRect]) -> Option<Rat> {
    if rects.len() < 2 {
        return None;
    }
    let max_half = rects
        .iter()
        .map(|r| r.half.clone())
        .max()
        .expect("non-empty");
    let pitch = &max_half * &Rat::integer(4);
    let key = |r: &QRect| -> (BigInt, BigInt) {
        (
            (&r.center.x / &pitch).floor(),
            (&r.center.y / &pitch).floor(),
        )
    };
    let mut buckets: HashMap<(BigInt, BigInt), Vec<usize>> = HashMap::new();
    for (i, r) in rects.iter().enumerate() {
        buckets.entry(key(r)).or_default().push(i);
    }
    let mut best: Option<Rat> = None;
    for (i, r) in rects.iter().enumerate() {
        let (bx, by) = key(r);
        for dx in -1i32..=1 {
            for dy in -1i32..=1 {
                let Some(ids) = buckets.get(&(&bx + dx, &by + dy)) else {
                    continue;
                };
                for &o in ids.iter().filter(|&&o| o > i) {
                    let g = r.gap(&rects[o]);
                    best = Some(match best {
                        Some(b) => b.min(g),
                        None => g,
                    });
                }
            }
        }
    }
    let far_floor = max_half * Rat::integer(2);
    match best {
        Some(b) if b <= far_floor => Some(b),
        _ => rects
            .iter()
            .enumerate()
            .flat_map(|(i, a)| rects[i + 1..].iter().map(move |b| a.gap(b)))
            .min(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ModelMap, OrbitStatus};
    use crate::geometry::{square_r, Region};

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn tree() -> CantorTree {
        CantorTree::default()
    }

    #[test]
    fn root_node() {
        let root = tree().root().unwrap();
        assert_eq!(root.rect.half, r(3, 128));
        assert_eq!(root.rect.area(), r(9, 4096));
        assert_eq!(root.rect.area(), r(9, 8) * pow2(-9));
        assert_eq!(root.contraction, Rat::one());
        assert_eq!(root.target, 1);
        assert!(root.address.is_empty());
    }

    #[test]
    fn children_of_root() {
        let t = tree();
        let root = t.root().unwrap();
        let kids = t.children(&root).unwrap();
        assert_eq!(kids.len(), 16);
        for (i, k) in kids.iter().enumerate() {
            assert_eq!(k.rect.half, r(1, 192));
            assert_eq!(k.contraction, r(21, 8));
            assert_eq!(k.address, vec![i as u8 + 1]);
            assert!(root.rect.contains(&k.rect).contained);
        }
        let grandkids: usize = kids.iter().map(|k| t.children(k).unwrap().len()).sum();
        assert_eq!(grandkids, 256);
        assert!(
            min_pairwise_gap(&kids.iter().map(|k| k.rect.clone()).collect::<Vec<_>>())
                .unwrap()
                .is_positive()
        );
    }

    #[test]
    fn level_summaries() {
        let t = tree();
        let s1 = t.level_summary(1).unwrap();
        assert_eq!(s1.level_measure, r(9, 4096));
        assert_eq!(s1.loss_to_next, r(17, 36864));
        assert_eq!(s1.worst_case_loss_bound, r(36, 36864));
        let s2 = t.level_summary(2).unwrap();
        assert_eq!(s2.node_count, BigInt::from(16));
        assert_eq!(s2.level_measure, r(1, 576));
        for j in 1..=32 {
            let s = t.level_summary(j).unwrap();
            assert_eq!(s.node_count, BigInt::from(16).pow(j - 1));
            assert_eq!(
                Rat::from(s.node_count.clone()) * (&s.node_half_side * &Rat::integer(2)).square(),
                s.level_measure
            );
            assert!(s.loss_to_next < s.level_loss_bound());
            assert!(s.loss_to_next.is_positive());
            assert_eq!(s.level_loss_bound(), pow2(-(j as i64) - 9));
        }
    }

    #[test]
    fn enumeration_and_cap() {
        let t = tree();
        let lvl1 = t.enumerate_level(1, 1).unwrap();
        assert_eq!(lvl1, vec![t.root().unwrap()]);
        let lvl3 = t.enumerate_level(3, 1_000_000).unwrap();
        assert_eq!(lvl3.len(), 256);
        let total: Rat = lvl3.iter().map(|n| n.rect.area()).sum();
        assert_eq!(total, t.level_summary(3).unwrap().level_measure);
        match t.enumerate_level(8, 1_000_000) {
            Err(Error::CapExceeded { required, .. }) => assert_eq!(required, 1u128 << 28),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn node_invariants() {
        let t = tree();
        let c = Construction::STANDARD;
        let root = t.root().unwrap();
        for n in t.enumerate_level(3, 256).unwrap() {
            let target = c.square_r(n.depth, n.target, Level::One).unwrap();
            assert_eq!(&n.rect.half * &n.contraction, target.half);
            assert!(root.rect.contains(&n.rect).contained);
            for (a, b) in n.rect.corners().iter().zip(target.corners().iter()) {
                assert_eq!(&n.forward.apply(a), b);
            }
        }
    }

    #[test]
    fn lower_bounds() {
        let t = tree();
        assert_eq!(t.measure_lower_bound(1).unwrap(), pow2(-12));
        let d2 = t.measure_lower_bound(2).unwrap();
        assert_eq!(d2, r(1, 576) - pow2(-10));
        assert!(d2 > pow2(-12));
        assert!(t.measure_lower_bound(5).unwrap() > t.measure_lower_bound(4).unwrap());
        for d in 1..=24 {
            let lb = t.measure_lower_bound(d).unwrap();
            assert!(lb <= t.level_measure(d).unwrap());
            assert!(lb <= t.measure_lower_bound(d + 1).unwrap());
        }
    }

    #[test]
    fn centre_orbits_follow_addresses() {
        let t = tree();
        let model = ModelMap::default();
        for n in t.enumerate_level(3, 256).unwrap().iter().step_by(17) {
            let o = model.orbit(&n.rect.center, n.depth as usize + 1);
            // Alive through depth - 1 steps, each landing in the addressed cell.
            for (step, &l) in n.address.iter().enumerate() {
                assert_eq!(
                    o.tags[step + 1].region,
                    Region::R2 {
                        j: step as u32 + 2,
                        l: l as u32,
                        in_r1: true
                    }
                );
            }
            assert_eq!(
                o.points[n.depth as usize - 1],
                square_r(n.depth, n.target, Level::One).unwrap().center
            );
            assert!(
                o.contractions[n.depth as usize - 1].clone().unwrap() > pow2(n.depth as i64 - 1)
            );
            assert_eq!(
                o.status,
                OrbitStatus::LeftModelDomain {
                    step: n.depth as usize + 1
                }
            );
        }
    }

    #[test]
    fn gap_finder() {
        let a = square_r(1, 1, Level::Three).unwrap();
        let b = square_r(1, 2, Level::Three).unwrap();
        assert!(min_pairwise_gap(&[a.clone(), b.clone()]).unwrap().is_zero());
        let a1 = square_r(1, 1, Level::One).unwrap();
        let b1 = square_r(1, 2, Level::One).unwrap();
        assert_eq!(min_pairwise_gap(&[a1, b1]).unwrap(), r(1, 64));
        assert!(min_pairwise_gap(std::slice::from_ref(&a)).is_none());
        assert!(min_pairwise_gap(&[a.clone(), a]).unwrap().is_negative());
    }
}
