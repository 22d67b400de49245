//! The piecewise model map standing in for the entire function.
//!
//! On `P` the function is within 1/2 of the constant `1+i`; on each
//! `R(j,l,2)` it is within `delta(j)^2` of `phi(j,l)`. The model map returns
//! the unperturbed value together with an enclosure of every admissible
//! value, and on `R(j,l,1)` an interval for `|f'|` obtained from Cauchy's
//! estimate with radius `delta(j)`. Outside `P ∪ R2` nothing is known and the
//! map is undefined.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Construction, Region, RegionTag};
use crate::numbers::{pow2, QBox, QPoint, Rat};

/// Sup-norm budgets for `|f - model|` on each piece of the domain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationBudget {
    pub on_p: Rat,
    pub construction: Construction,
}

impl PerturbationBudget {
    pub fn standard() -> Self {
        PerturbationBudget {
            on_p: Rat::new(1, 2),
            construction: Construction::STANDARD,
        }
    }

    /// `delta(j)^2`.
    pub fn on_r2(&self, j: u32) -> Result<Rat> {
        Ok(self.construction.delta(j)?.square())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeBound {
    pub lower: Rat,
    pub upper: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStep {
    pub tag: RegionTag,
    /// `None` outside the model domain.
    pub value: Option<QPoint>,
    pub enclosure: Option<QBox>,
    /// Present only on `R1` squares.
    pub derivative_bound: Option<DerivativeBound>,
    /// Scale of the affine branch used, if any.
    pub scale: Option<Rat>,
}

impl ModelStep {
    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitStatus {
    Alive,
    /// The iterate at index `step - 1` had no model image.
    LeftModelDomain {
        step: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<QPoint>,
    pub tags: Vec<RegionTag>,
    /// `contractions[i]` is `|(f^i)'|` under the exact model at the seed, or
    /// `None` once the orbit has been absorbed by `P`.
    pub contractions: Vec<Option<Rat>>,
    pub status: OrbitStatus,
}

impl OrbitRecord {
    pub fn contraction(&self) -> Option<&Rat> {
        self.contractions.last().and_then(|c| c.as_ref())
    }

    /// One JSON object per iterate: `{step, x, y, tag, contraction}`.
    pub fn json_lines(&self) -> Vec<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            step: usize,
            x: &'a Rat,
            y: &'a Rat,
            tag: String,
            contraction: Option<&'a Rat>,
        }
        self.points
            .iter()
            .zip(&self.tags)
            .zip(&self.contractions)
            .enumerate()
            .map(|(step, ((p, tag), c))| {
                serde_json::to_string(&Line {
                    step,
                    x: &p.x,
                    y: &p.y,
                    tag: tag.short(),
                    contraction: c.as_ref(),
                })
                .expect("orbit line serializes")
            })
            .collect()
    }
}

/// The model map for a given construction and `P` budget.
#[derive(Clone, Debug)]
pub struct ModelMap {
    pub budget: PerturbationBudget,
}

impl Default for ModelMap {
    fn default() -> Self {
        ModelMap {
            budget: PerturbationBudget::standard(),
        }
    }
}

impl ModelMap {
    pub fn new(budget: PerturbationBudget) -> Self {
        ModelMap { budget }
    }

    fn construction(&self) -> &Construction {
        &self.budget.construction
    }

    pub fn step(&self, z: &QPoint) -> ModelStep {
        let tag = self.construction().locate(z);
        match tag.region {
            Region::P { .. } => {
                let value = QPoint::ints(1, 1);
                let enclosure = QBox::point(&value)
                    .inflate(&self.budget.on_p)
                    .expect("budget is non-negative");
                ModelStep {
                    tag,
                    value: Some(value),
                    enclosure: Some(enclosure),
                    derivative_bound: None,
                    scale: None,
                }
            }
            Region::R2 { j, l, in_r1 } => {
                let c = self.construction();
                let map = c.phi(j, l).expect("locate returns valid indices");
                let delta = c.delta(j).expect("j >= 1");
                let value = map.apply(z);
                let enclosure = QBox::point(&value)
                    .inflate(&delta.square())
                    .expect("square is non-negative");
                let derivative_bound = in_r1.then(|| DerivativeBound {
                    lower: &map.scale - &delta,
                    upper: &map.scale + &delta,
                });
                ModelStep {
                    tag,
                    value: Some(value),
                    enclosure: Some(enclosure),
                    derivative_bound,
                    scale: Some(map.scale),
                }
            }
            Region::Q3Gap { .. } | Region::Complement => ModelStep {
                tag,
                value: None,
                enclosure: None,
                derivative_bound: None,
                scale: None,
            },
        }
    }

    pub fn orbit(&self, seed: &QPoint, n: usize) -> OrbitRecord {
        let mut points = vec![seed.clone()];
        let mut tags = vec![self.construction().locate(seed)];
        let mut contractions = vec![Some(Rat::one())];
        let mut status = OrbitStatus::Alive;
        for s in 1..=n {
            let step = self.step(points.last().expect("non-empty"));
            let Some(value) = step.value else {
                status = OrbitStatus::LeftModelDomain { step: s };
                break;
            };
            let prev = contractions.last().cloned().flatten();
            let next = match (prev, &step.scale) {
                (Some(c), Some(scale)) => Some(c * scale),
                _ => None,
            };
            tags.push(self.construction().locate(&value));
            points.push(value);
            contractions.push(next);
        }
        OrbitRecord {
            points,
            tags,
            contractions,
            status,
        }
    }
}

pub fn model_step(z: &QPoint) -> ModelStep {
    ModelMap::default().step(z)
}

pub fn orbit(seed: &QPoint, n: usize) -> OrbitRecord {
    ModelMap::default().orbit(seed, n)
}

/// Upper bound for `|f^j(z)|` on the Cantor set: `(j+1) + 2^(-j-3)`.
///
/// The iterate lies in `Q(j+1, 1)`, whose farthest corner has squared
/// modulus below the square of this value.
pub fn orbit_modulus_bound(j: u32) -> Rat {
    Rat::integer(j as i64 + 1) + pow2(-(j as i64) - 3)
}

/// Lower bound `2^(j+1) / (1 + ((j+1) + 2^(-j-3))^2)` for the spherical
/// derivative of `f^j` on the Cantor set.
pub fn marty_lower_bound(j: u32) -> Result<Rat> {
    if j < 1 {
        return Err(Error::IndexBelowOne(0));
    }
    Ok(pow2(j as i64 + 1) / (Rat::one() + orbit_modulus_bound(j).square()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivativeProduct {
    /// `prod (scale(m) - delta(m))`: valid for every admissible function.
    pub lower: Rat,
    /// `prod scale(m)`: the exact model.
    pub exact: Rat,
}

/// Derivative products along `depth` consecutive levels starting at `j = 1`.
pub fn derivative_product_bound(c: &Construction, depth: u32) -> Result<DerivativeProduct> {
    if depth < 1 {
        return Err(Error::IndexBelowOne(depth as i64));
    }
    let mut lower = Rat::one();
    let mut exact = Rat::one();
    for m in 1..=depth {
        let s = c.phi_scale(m)?;
        lower = lower * (&s - &c.delta(m)?);
        exact = exact * s;
    }
    Ok(DerivativeProduct { lower, exact })
}
