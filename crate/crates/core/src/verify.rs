//! The proof ledger.
//!
//! Each check re-derives one inequality or identity of the construction with
//! exact rationals and records its margin, the signed distance to failure.
//! Checks quantify over every admissible entire function by using the
//! worst-case perturbation budgets, never a sampled instance.
//!
//! Sub-checks come in three kinds:
//!
//! * `strict`: holds iff `margin > 0`;
//! * `non_strict`: holds iff `margin >= 0`;
//! * `identity`: `margin = lhs - rhs`, holds iff it is zero.
//!
//! A report's margin is the minimum over its strict sub-checks (or over its
//! non-strict ones when it has no strict sub-check).

use serde::{Deserialize, Serialize};

use crate::dynamics::{derivative_product_bound, marty_lower_bound};
use crate::error::{Error, Result};
use crate::geometry::{square_p, square_s, Construction, Level, QRect};
use crate::numbers::{pow2, QPoint, Rat};
use crate::tree::{min_pairwise_gap, node_count, worst_case_loss_bound, CantorTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Strict,
    NonStrict,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub kind: Kind,
    pub margin: Rat,
    pub holds: bool,
}

impl SubCheck {
    pub fn new(name: &str, kind: Kind, margin: Rat) -> Self {
        let holds = match kind {
            Kind::Strict => margin.is_positive(),
            Kind::NonStrict => !margin.is_negative(),
            Kind::Identity => margin.is_zero(),
        };
        SubCheck {
            name: name.to_string(),
            kind,
            margin,
            holds,
        }
    }

    pub fn strict(name: &str, margin: Rat) -> Self {
        SubCheck::new(name, Kind::Strict, margin)
    }

    pub fn non_strict(name: &str, margin: Rat) -> Self {
        SubCheck::new(name, Kind::NonStrict, margin)
    }

    pub fn identity(name: &str, lhs: &Rat, rhs: &Rat) -> Self {
        SubCheck::new(name, Kind::Identity, lhs - rhs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Every sub-check holds but the margin is exactly zero; strictness is
    /// supplied by a strict hypothesis outside the geometry.
    PassZeroMarginStrict,
    Fail,
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub params: Vec<i64>,
    pub statement: String,
    pub margin: Rat,
    pub verdict: Verdict,
    pub subchecks: Vec<SubCheck>,
}

impl CheckReport {
    pub fn from_subchecks(
        id: &str,
        params: Vec<i64>,
        statement: impl Into<String>,
        subchecks: Vec<SubCheck>,
    ) -> Self {
        let min_of = |kind: Kind| {
            subchecks
                .iter()
                .filter(|s| s.kind == kind)
                .map(|s| s.margin.clone())
                .min()
        };
        let margin = min_of(Kind::Strict)
            .or_else(|| min_of(Kind::NonStrict))
            .unwrap_or_else(Rat::zero);
        let verdict = if !subchecks.iter().all(|s| s.holds) {
            Verdict::Fail
        } else if margin.is_zero() {
            Verdict::PassZeroMarginStrict
        } else {
            Verdict::Pass
        };
        CheckReport {
            id: id.to_string(),
            params,
            statement: statement.into(),
            margin,
            verdict,
            subchecks,
        }
    }

    pub fn failing(&self) -> impl Iterator<Item = &SubCheck> {
        self.subchecks.iter().filter(|s| !s.holds)
    }
}

/// Partial sum, tail bound and closed form of the complement-measure series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub truncation: u32,
    pub partial_sum: Rat,
    pub tail_bound: Rat,
    pub closed_form: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Upper index for the `j`-indexed checks.
    pub j_max: u32,
    /// Lattice bound `|j|, |k| <= lattice` for the `P` squares.
    pub lattice: u32,
    pub marty_thresholds: Vec<i64>,
    pub marty_j_max: u32,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            j_max: 32,
            lattice: 16,
            marty_thresholds: vec![1, 100],
            marty_j_max: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
}

/// The JSON document written by `verify --report`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub version: u32,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl LedgerReport {
    pub fn new(checks: Vec<CheckReport>) -> Self {
        let pass = checks.iter().filter(|c| c.verdict.is_pass()).count();
        let fail = checks.len() - pass;
        LedgerReport {
            version: 1,
            checks,
            summary: Summary { pass, fail },
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn two() -> Rat {
    Rat::integer(2)
}

/// Checks bound to one construction and one `P` budget.
#[derive(Clone, Debug)]
pub struct Ledger {
    pub construction: Construction,
    pub p_budget: Rat,
}

impl Default for Ledger {
    fn default() -> Self {
        Ledger::new(Construction::STANDARD)
    }
}

impl Ledger {
    pub fn new(construction: Construction) -> Self {
        Ledger {
            construction,
            p_budget: Rat::new(1, 2),
        }
    }

    fn c(&self) -> &Construction {
        &self.construction
    }

    /// `delta(j)^2 < delta(j+1)`.
    pub fn check_budget_separation(&self, j: u32) -> Result<CheckReport> {
        let d = self.c().delta(j)?;
        let next = self.c().delta(j + 1)?;
        Ok(CheckReport::from_subchecks(
            "budget_separation",
            vec![j as i64],
            "delta(j)^2 < delta(j+1): perturbations on R2 are smaller than the next inset",
            vec![SubCheck::strict(
                "delta(j+1) - delta(j)^2",
                next - d.square(),
            )],
        ))
    }

    /// The same inequality for every `j >= 1` at once, on exponents:
    /// `2(aj+b) > a(j+1)+b` reduces to `aj + b - a > 0`, smallest at `j = 1`.
    pub fn check_budget_separation_symbolic(&self) -> CheckReport {
        let a = self.c().delta_slope as i64;
        let b = self.c().delta_offset as i64;
        let margin_at_1 = a + b - a;
        CheckReport::from_subchecks(
            "budget_separation_symbolic",
            vec![a, b],
            "exponent of delta(j)^2 exceeds exponent of delta(j+1) for all j >= 1",
            vec![
                SubCheck::strict("a*1 + b - a", Rat::integer(margin_at_1)),
                SubCheck::non_strict("slope a", Rat::integer(a)),
            ],
        )
    }

    /// `f(dR1) ∩ Q1 = ∅`, `f(R1) ⊂ Q3` and `f(R1) ∩ Q1 ≠ ∅` for every
    /// admissible `f`, all sixteen cells.
    pub fn check_covering(&self, j: u32) -> Result<CheckReport> {
        let eps = self.c().delta(j)?.square();
        let q1 = self.c().square_q(j + 1, Level::One)?;
        let q3 = self.c().square_q(j + 1, Level::Three)?;
        let mut boundary: Option<Rat> = None;
        let mut inside: Option<Rat> = None;
        let mut hits: Option<Rat> = None;
        let fold = |acc: &mut Option<Rat>, v: Rat| {
            *acc = Some(match acc.take() {
                Some(a) => a.min(v),
                None => v,
            });
        };
        for l in 1..=16 {
            let image = self
                .c()
                .phi(j, l)?
                .image(&self.c().square_r(j, l, Level::One)?);
            fold(&mut boundary, image.contains(&q1).margin - &eps);
            fold(&mut inside, q3.contains(&image).margin - &eps);
            fold(
                &mut hits,
                &q1.half - &q1.center.linf_dist(&image.center) - &eps,
            );
        }
        Ok(CheckReport::from_subchecks(
            "covering",
            vec![j as i64],
            "image of R1(j,l) under any admissible f covers Q1(j+1) and stays inside Q3(j+1)",
            vec![
                SubCheck::strict(
                    "dist(d phi(R1), Q1) - delta(j)^2",
                    boundary.expect("16 cells"),
                ),
                SubCheck::strict("dist(phi(R1), dQ3) - delta(j)^2", inside.expect("16 cells")),
                SubCheck::strict(
                    "phi(centre R1) in Q1 with room delta(j)^2",
                    hits.expect("16 cells"),
                ),
            ],
        ))
    }

    /// `phi' > 2 + delta(j)`, Cauchy radius `delta(j)` fits between `R1`
    /// and `dR2`, and hence `|f'| > 2` on `R1`.
    pub fn check_derivative(&self, j: u32) -> Result<CheckReport> {
        let scale = self.c().phi_scale(j)?;
        let d = self.c().delta(j)?;
        let r1 = self.c().square_r(j, 1, Level::One)?;
        let r2 = self.c().square_r(j, 1, Level::Two)?;
        let radius = r2.contains(&r1).margin;
        Ok(CheckReport::from_subchecks(
            "derivative",
            vec![j as i64],
            "phi'(j) > 2 + delta(j); Cauchy radius delta(j) fits in R2; |f'| > 2 on R1",
            vec![
                SubCheck::strict("phi' - 2 - delta(j)", &scale - &two() - &d),
                SubCheck::non_strict("dist(R1, dR2) - delta(j)", &radius - &d),
                SubCheck::identity("dist(R1, dR2) = delta(j)", &radius, &d),
                SubCheck::strict("phi' - delta(j) - 2", &scale - &d - two()),
            ],
        ))
    }

    /// `re f' > 2` on `R1`, so `f` is injective there.
    pub fn check_injectivity(&self, j: u32) -> Result<CheckReport> {
        let scale = self.c().phi_scale(j)?;
        let d = self.c().delta(j)?;
        Ok(CheckReport::from_subchecks(
            "injectivity",
            vec![j as i64],
            "re f' >= phi' - delta(j) > 2 on R1(j,l), so f is injective there",
            vec![SubCheck::strict("phi' - delta(j) - 2", scale - d - two())],
        ))
    }

    /// The disc of radius `budget` about `1+i` lies in `P(0,0)`.
    pub fn check_p_absorption_with_budget(&self, budget: &Rat) -> CheckReport {
        let p00 = square_p(0, 0);
        let target = QPoint::ints(1, 1);
        CheckReport::from_subchecks(
            "p_absorption",
            vec![0, 0],
            "f(P) lies within the budget of 1+i, inside P(0,0); zero margin is made strict by |f - (1+i)| < 1/2",
            vec![
                SubCheck::identity("centre P(0,0) = 1+i", &p00.center.linf_dist(&target), &Rat::zero()),
                SubCheck::non_strict("half(P(0,0)) - budget", &p00.half - budget),
            ],
        )
    }

    pub fn check_p_absorption(&self) -> CheckReport {
        self.check_p_absorption_with_budget(&self.p_budget.clone())
    }

    /// `P(j,k)` pairwise disjoint, `Q(j,3)` pairwise disjoint and disjoint
    /// from every `P(j',k')`, within the index bounds. Margins are Chebyshev
    /// gaps.
    pub fn check_disjointness(&self, lattice: u32, q_max: u32) -> Result<CheckReport> {
        let l = lattice as i32;
        let ps: Vec<QRect> = (-l..=l)
            .flat_map(|j| (-l..=l).map(move |k| square_p(j, k)))
            .collect();
        let qs: Vec<QRect> = (1..=q_max)
            .map(|j| self.c().square_q(j, Level::Three))
            .collect::<Result<_>>()?;
        let p_in_s = (-l..=l)
            .flat_map(|j| (-l..=l).map(move |k| square_s(j, k).contains(&square_p(j, k)).margin))
            .min()
            .expect("non-empty lattice");
        let pp = min_pairwise_gap(&ps).unwrap_or_else(|| p_in_s.clone() * two());
        let qq = min_pairwise_gap(&qs).unwrap_or_else(|| Rat::integer(1));
        let qp = qs
            .iter()
            .flat_map(|q| ps.iter().map(move |p| q.gap(p)))
            .min()
            .expect("non-empty");
        Ok(CheckReport::from_subchecks(
            "disjointness",
            vec![lattice as i64, q_max as i64],
            "P(j,k) pairwise disjoint, Q3(j) pairwise disjoint, Q3(j) disjoint from every P(j',k')",
            vec![
                SubCheck::strict("P(j,k) strictly inside S(j,k)", p_in_s),
                SubCheck::strict("min gap P-P", pp),
                SubCheck::strict("min gap Q3-Q3", qq),
                SubCheck::strict("min gap Q3-P", qp),
            ],
        ))
    }

    /// `meas(S \ P) = 8*2^(-n) - 4*4^(-n) < 4*2^(-|j|)*2^(-|k|)`, `n = |j|+|k|+1`.
    pub fn check_cell_measure(&self, j: i32, k: i32) -> CheckReport {
        let n = j.unsigned_abs() as i64 + k.unsigned_abs() as i64 + 1;
        let meas = square_s(j, k).area() - square_p(j, k).area();
        let first = Rat::integer(4) - Rat::integer(4) * (Rat::one() - pow2(-n)).square();
        let second = Rat::integer(8) * pow2(-n) - Rat::integer(4) * pow2(-2 * n);
        let bound =
            Rat::integer(4) * pow2(-(j.unsigned_abs() as i64)) * pow2(-(k.unsigned_abs() as i64));
        CheckReport::from_subchecks(
            "cell_measure",
            vec![j as i64, k as i64],
            "meas(S(j,k) minus P(j,k)) = 4 - 4(1-2^-n)^2 = 8*2^-n - 4*4^-n < 4*2^-|j|*2^-|k|",
            vec![
                SubCheck::identity("meas = 4 - 4(1-2^-n)^2", &meas, &first),
                SubCheck::identity("4 - 4(1-2^-n)^2 = 8*2^-n - 4*4^-n", &first, &second),
                SubCheck::strict("4*2^-|j|*2^-|k| - meas", bound - meas),
            ],
        )
    }

    pub fn check_complement_series(&self, n: u32) -> CheckReport {
        let s = measure_complement(n);
        let remainder = &s.closed_form - &s.partial_sum;
        CheckReport::from_subchecks(
            "complement_series",
            vec![n as i64],
            "meas(C minus P) = sum meas(S minus P) = 299/9 <= 4 * 3 * 3 = 36",
            vec![
                SubCheck::strict("closed - partial", remainder.clone()),
                SubCheck::non_strict("tail - (closed - partial)", &s.tail_bound - &remainder),
                SubCheck::strict("36 - closed", Rat::integer(36) - &s.closed_form),
            ],
        )
    }

    /// Re-derives the per-node loss chain at level `j` step by step.
    pub fn check_loss_chain(&self, j: u32) -> Result<CheckReport> {
        let c = self.c();
        let ji = j as i64;
        let prefactor = pow2(-2 * ji);
        let s3 = c.square_r(j + 1, 1, Level::Three)?.side();
        let s1 = c.square_r(j + 1, 1, Level::One)?.side();
        let inset = &s3 - &s1;
        let q3 = c.square_q(j + 1, Level::Three)?;

        let mut cell_area = Rat::zero();
        let mut annuli = Rat::zero();
        for m in 1..=16 {
            let r3 = c.square_r(j + 1, m, Level::Three)?;
            let r1 = c.square_r(j + 1, m, Level::One)?;
            cell_area = cell_area + r3.area();
            annuli = annuli + r3.area() - r1.area();
        }
        let step1 = &prefactor * &annuli;
        let step2 = &prefactor * &Rat::integer(16) * &(two() * &s3 * &inset - inset.square());
        let step3 = &prefactor * &Rat::integer(32) * &s3 * &inset;
        let step4 = pow2(-3 * ji + 3) * c.delta(j + 1)?;
        let step5 = worst_case_loss_bound(j);
        let expansion = derivative_product_bound(c, j)?.lower - pow2(ji);

        Ok(CheckReport::from_subchecks(
            "loss_chain",
            vec![j as i64],
            "per-node loss < 2^-2j * sum(R3 minus R1) = 2^-2j*16*(2*s*4d - 16d^2) < 2^(-3j+3) delta(j+1) = 2^(-5j-5)",
            vec![
                SubCheck::strict("min |(f^j)'| - 2^j", expansion),
                SubCheck::identity("R3 cells tile Q3(j+1)", &cell_area, &q3.area()),
                SubCheck::identity("annuli expand", &step1, &step2),
                SubCheck::strict("drop square term", &step3 - &step2),
                SubCheck::identity("= 2^(-3j+3) delta(j+1)", &step3, &step4),
                SubCheck::identity("2^(-3j+3) delta(j+1) = 2^(-5j-5)", &step4, &step5),
                SubCheck::strict("2^(-5j-5) - worst-case loss", &step5 - &step1),
            ],
        ))
    }

    /// Total worst-case loss `sum 16^(j-1) 2^(-5j-5) = 2^-9` is below
    /// `meas(R1(1,1)) = (9/8) 2^-9`.
    pub fn check_total_loss(&self, j_max: u32) -> Result<CheckReport> {
        let mut worst = Rat::zero();
        let mut partial = Rat::zero();
        for j in 1..=j_max.max(1) {
            let term = Rat::from(node_count(j)) * worst_case_loss_bound(j);
            let expected = pow2(-(j as i64) - 9);
            worst = worst.max((&term - &expected).abs());
            partial = partial + term;
        }
        let tail = pow2(-(j_max.max(1) as i64) - 9);
        let total = pow2(-9);
        let root = self.c().square_r(1, 1, Level::One)?.area();
        Ok(CheckReport::from_subchecks(
            "total_loss",
            vec![j_max as i64],
            "sum_j 16^(j-1) 2^(-5j-5) = sum 2^(-j-9) = 2^-9 < meas(R1(1,1)) = (9/8) 2^-9",
            vec![
                SubCheck::identity(
                    "termwise 16^(j-1) 2^(-5j-5) = 2^(-j-9)",
                    &worst,
                    &Rat::zero(),
                ),
                SubCheck::identity(
                    "partial + geometric tail = 2^-9",
                    &(&partial + &tail),
                    &total,
                ),
                SubCheck::identity(
                    "meas(R1(1,1)) = (9/8) 2^-9",
                    &root,
                    &(Rat::new(9, 8) * pow2(-9)),
                ),
                SubCheck::strict("meas(R1(1,1)) - 2^-9", &root - &total),
            ],
        ))
    }

    pub fn check_marty_divergence(&self, threshold: &Rat, j_max: u32) -> Result<CheckReport> {
        let mut found = None;
        for j in 1..=j_max {
            let b = marty_lower_bound(j)?;
            if &b > threshold {
                found = Some((j, b));
                break;
            }
        }
        let statement = format!(
            "spherical derivative lower bound 2^(j+1)/(1+((j+1)+2^(-j-3))^2) exceeds {threshold} for some j <= {j_max}"
        );
        Ok(match found {
            Some((j, b)) => CheckReport::from_subchecks(
                "marty_divergence",
                vec![j as i64, j_max as i64],
                statement,
                vec![SubCheck::strict(
                    "bound(first j) - threshold",
                    b - threshold,
                )],
            ),
            None => CheckReport::from_subchecks(
                "marty_divergence",
                vec![0, j_max as i64],
                statement,
                vec![SubCheck::strict(
                    "bound(j_max) - threshold",
                    marty_lower_bound(j_max.max(1))? - threshold,
                )],
            ),
        })
    }

    /// Exact-model loss of level `j` against the worst-case level bound.
    pub fn check_tree_level_loss(&self, j: u32) -> Result<CheckReport> {
        let tree = CantorTree::new(*self.c());
        let s = tree.level_summary(j)?;
        Ok(CheckReport::from_subchecks(
            "tree_level_loss",
            vec![j as i64],
            "exact-model loss of T_j is below 16^(j-1) 2^(-5j-5)",
            vec![
                SubCheck::strict(
                    "level bound - exact loss",
                    s.level_loss_bound() - &s.loss_to_next,
                ),
                SubCheck::non_strict("exact loss", s.loss_to_next),
            ],
        ))
    }

    pub fn check_tree_lower_bound(&self, d: u32) -> Result<CheckReport> {
        let tree = CantorTree::new(*self.c());
        let lb = tree.measure_lower_bound(d)?;
        Ok(CheckReport::from_subchecks(
            "tree_lower_bound",
            vec![d as i64],
            "meas(T_d) - sum_{j>=d} 2^(-j-9) > 0",
            vec![SubCheck::strict("lower bound", lb)],
        ))
    }

    /// Every check over the configured ranges, in a fixed order.
    pub fn run_all(&self, cfg: &VerifyConfig) -> Result<Vec<CheckReport>> {
        let js = 1..=cfg.j_max;
        let l = cfg.lattice as i32;
        let mut out = Vec::new();
        let wrap = |id: &'static str| {
            move |e: Error| Error::Check {
                id: id.to_string(),
                source: Box::new(e),
            }
        };

        for j in js.clone() {
            out.push(
                self.check_budget_separation(j)
                    .map_err(wrap("budget_separation"))?,
            );
        }
        out.push(self.check_budget_separation_symbolic());
        for j in js.clone() {
            out.push(self.check_covering(j).map_err(wrap("covering"))?);
        }
        for j in js.clone() {
            out.push(self.check_derivative(j).map_err(wrap("derivative"))?);
        }
        for j in js.clone() {
            out.push(self.check_injectivity(j).map_err(wrap("injectivity"))?);
        }
        out.push(self.check_p_absorption());
        out.push(
            self.check_disjointness(cfg.lattice, cfg.j_max)
                .map_err(wrap("disjointness"))?,
        );
        for j in -l..=l {
            for k in -l..=l {
                out.push(self.check_cell_measure(j, k));
            }
        }
        out.push(self.check_complement_series(cfg.lattice));
        for j in js.clone() {
            out.push(self.check_loss_chain(j).map_err(wrap("loss_chain"))?);
        }
        out.push(
            self.check_total_loss(cfg.j_max)
                .map_err(wrap("total_loss"))?,
        );
        for t in &cfg.marty_thresholds {
            out.push(
                self.check_marty_divergence(&Rat::integer(*t), cfg.marty_j_max)
                    .map_err(wrap("marty_divergence"))?,
            );
        }
        for j in js.clone() {
            out.push(
                self.check_tree_level_loss(j)
                    .map_err(wrap("tree_level_loss"))?,
            );
        }
        for d in js {
            out.push(
                self.check_tree_lower_bound(d)
                    .map_err(wrap("tree_lower_bound"))?,
            );
        }
        Ok(out)
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Result<LedgerReport> {
    Ok(LedgerReport::new(Ledger::default().run_all(cfg)?))
}

/// `sum_{|j|,|k| <= n} meas(S(j,k) \ P(j,k))`, summed cell by cell, with the
/// majorant tail `4 * (9 - A_n^2)`, `A_n = sum_{|j|<=n} 2^-|j|`, and the
/// closed form `4*3^2 - (5/3)^2 = 299/9`.
pub fn measure_complement(n: u32) -> SeriesResult {
    let l = n as i32;
    let partial_sum: Rat = (-l..=l)
        .flat_map(|j| (-l..=l).map(move |k| square_s(j, k).area() - square_p(j, k).area()))
        .sum();
    let a_n: Rat = (-l..=l).map(|j| pow2(-(j.unsigned_abs() as i64))).sum();
    let tail_bound = Rat::integer(4) * (Rat::integer(9) - a_n.square());
    // sum over Z of 2^-|j| is 1 + 2*(1/2)/(1-1/2) = 3, of 4^-|j| is 1 + 2*(1/4)/(3/4) = 5/3
    let sum2 = Rat::one() + two() * Rat::new(1, 2) / Rat::new(1, 2);
    let sum4 = Rat::one() + two() * Rat::new(1, 4) / Rat::new(3, 4);
    let closed_form = Rat::integer(4) * sum2.square() - sum4.square();
    SeriesResult {
        truncation: n,
        partial_sum,
        tail_bound,
        closed_form,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d)
    }

    fn ledger() -> Ledger {
        Ledger::default()
    }

    fn sub<'a>(rep: &'a CheckReport, name: &str) -> &'a SubCheck {
        rep.subchecks.iter().find(|s| s.name == name).expect(name)
    }

    #[test]
    fn budget_separation() {
        let rep = ledger().check_budget_separation(1).unwrap();
        assert_eq!(rep.margin, r(1, 1024) - r(1, 65536));
        assert_eq!(rep.verdict, Verdict::Pass);
        let rep = ledger().check_budget_separation(2).unwrap();
        assert_eq!(rep.margin, pow2(-12) - pow2(-20));
        let sym = ledger().check_budget_separation_symbolic();
        assert_eq!(sym.margin, Rat::integer(6));
        assert!(sym.verdict.is_pass());
    }

    #[test]
    fn covering() {
        let rep = ledger().check_covering(1).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(
            sub(&rep, "dist(d phi(R1), Q1) - delta(j)^2").margin,
            r(1, 1024) - pow2(-16)
        );
        assert_eq!(
            sub(&rep, "phi(centre R1) in Q1 with room delta(j)^2").margin,
            square_q1_half(2) - pow2(-16)
        );
        assert!(ledger().check_covering(32).unwrap().verdict.is_pass());
    }

    fn square_q1_half(j: u32) -> Rat {
        Construction::STANDARD.square_q(j, Level::One).unwrap().half
    }

    #[test]
    fn derivative() {
        let rep = ledger().check_derivative(1).unwrap();
        assert_eq!(sub(&rep, "phi' - 2 - delta(j)").margin, r(159, 256));
        assert!(sub(&rep, "dist(R1, dR2) = delta(j)").holds);
        assert_eq!(sub(&rep, "dist(R1, dR2) - delta(j)").margin, Rat::zero());
        assert_eq!(rep.verdict, Verdict::Pass);
        for j in 1..=64 {
            let rep = ledger().check_derivative(j).unwrap();
            assert!(sub(&rep, "phi' - delta(j) - 2").margin.is_positive());
        }
    }

    #[test]
    fn injectivity() {
        let rep = ledger().check_injectivity(1).unwrap();
        assert_eq!(rep.margin, r(21, 8) - r(1, 256) - Rat::integer(2));
        assert!(ledger().check_injectivity(10).unwrap().verdict.is_pass());
        let d = ledger().check_derivative(7).unwrap();
        assert_eq!(
            ledger().check_injectivity(7).unwrap().margin,
            sub(&d, "phi' - delta(j) - 2").margin
        );
    }

    #[test]
    fn p_absorption() {
        let rep = ledger().check_p_absorption();
        assert_eq!(rep.margin, Rat::zero());
        assert_eq!(rep.verdict, Verdict::PassZeroMarginStrict);
        let inner = ledger().check_p_absorption_with_budget(&(r(1, 2) - pow2(-20)));
        assert_eq!(inner.verdict, Verdict::Pass);
        assert_eq!(inner.margin, pow2(-20));
        let outer = ledger().check_p_absorption_with_budget(&(r(1, 2) + pow2(-20)));
        assert_eq!(outer.verdict, Verdict::Fail);
    }

    #[test]
    fn disjointness() {
        let rep = ledger().check_disjointness(8, 8).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        // Q3(1) = [7/8,9/8] x [-1/8,1/8] against P(0,0) = [1/2,3/2]^2.
        let q = Construction::STANDARD.square_q(1, Level::Three).unwrap();
        assert_eq!(q.gap(&square_p(0, 0)), r(3, 8));
        for j in 1..=20u32 {
            let a = Construction::STANDARD.square_q(j, Level::Three).unwrap();
            let b = Construction::STANDARD
                .square_q(j + 1, Level::Three)
                .unwrap();
            assert_eq!(
                a.gap(&b),
                Rat::one() - pow2(-(j as i64) - 2) - pow2(-(j as i64) - 3)
            );
        }
    }

    #[test]
    fn cell_measure() {
        let rep = ledger().check_cell_measure(0, 0);
        assert_eq!(rep.margin, Rat::one());
        assert_eq!(
            square_s(0, 0).area() - square_p(0, 0).area(),
            Rat::integer(3)
        );
        let rep = ledger().check_cell_measure(1, 0);
        assert_eq!(rep.margin, Rat::integer(2) - r(7, 4));
        assert_eq!(ledger().check_cell_measure(3, 2).verdict, Verdict::Pass);
    }

    /// Closed form of the truncated sum from the two one-dimensional
    /// geometric partial sums, independent of the cell-by-cell summation.
    fn complement_oracle(n: u32) -> (Rat, Rat) {
        let a = Rat::integer(3) - pow2(1 - n as i64);
        let b = r(5, 3) - r(2, 3) * pow2(-2 * n as i64);
        (Rat::integer(4) * a.square() - b.square(), r(299, 9))
    }

    #[test]
    fn complement_series() {
        let s = measure_complement(0);
        assert_eq!(s.partial_sum, Rat::integer(3));
        assert_eq!(s.closed_form, r(299, 9));
        assert!(Rat::integer(36) >= s.closed_form);
        for n in [0, 1, 2, 5, 17] {
            let s = measure_complement(n);
            let (partial, closed) = complement_oracle(n);
            assert_eq!(s.partial_sum, partial);
            assert_eq!(s.closed_form, closed);
            assert!((&s.closed_form - &s.partial_sum).abs() <= s.tail_bound);
        }
    }

    #[test]
    fn loss_chain() {
        let rep = ledger().check_loss_chain(1).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let worst = pow2(-10) - sub(&rep, "2^(-5j-5) - worst-case loss").margin.clone();
        assert!(worst < pow2(-10));
        assert!(r(17, 36864) < worst);
        for j in 1..=64 {
            assert_eq!(pow2(-3 * j + 3) * pow2(-2 * (j + 1) - 6), pow2(-5 * j - 5));
        }
    }

    #[test]
    fn total_loss() {
        let rep = ledger().check_total_loss(64).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.margin, pow2(-12));
        assert_eq!(Rat::from(node_count(1)) * pow2(-10), pow2(-10));
    }

    #[test]
    fn marty() {
        let first = |t: i64| {
            let rep = ledger()
                .check_marty_divergence(&Rat::integer(t), 64)
                .unwrap();
            assert!(rep.verdict.is_pass());
            rep.params[0]
        };
        assert_eq!(first(1), 4);
        assert_eq!(first(100), 14);
        assert_eq!(first(0), 1);
        let none = ledger()
            .check_marty_divergence(&Rat::integer(1000), 10)
            .unwrap();
        assert_eq!(none.verdict, Verdict::Fail);
    }

    #[test]
    fn tampered_delta_fails_separation() {
        let tampered = Construction {
            delta_slope: 1,
            delta_offset: 0,
            ..Construction::STANDARD
        };
        let l = Ledger::new(tampered);
        assert_eq!(l.check_budget_separation(1).unwrap().verdict, Verdict::Fail);
        assert_eq!(l.check_budget_separation_symbolic().verdict, Verdict::Fail);
        // Geometry-backed checks abort, naming the check.
        match l.run_all(&VerifyConfig::default()) {
            Err(Error::Check { id, .. }) => assert_eq!(id, "covering"),
            other => panic!("expected abort, got {:?}", other.map(|v| v.len())),
        }
    }

    #[test]
    fn small_config_passes() {
        let cfg = VerifyConfig {
            j_max: 1,
            lattice: 1,
            ..VerifyConfig::default()
        };
        let rep = run_all(&cfg).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.summary.pass, rep.checks.len());
    }

    #[test]
    fn margins_positive_through_64() {
        let l = ledger();
        for j in 1..=64 {
            for rep in [
                l.check_budget_separation(j).unwrap(),
                l.check_covering(j).unwrap(),
                l.check_derivative(j).unwrap(),
                l.check_injectivity(j).unwrap(),
                l.check_loss_chain(j).unwrap(),
            ] {
                assert!(rep.margin.is_positive(), "{} at {j}", rep.id);
                assert_eq!(rep.verdict, Verdict::Pass);
            }
        }
    }

    #[test]
    fn report_json_schema() {
        let cfg = VerifyConfig {
            j_max: 2,
            lattice: 1,
            ..VerifyConfig::default()
        };
        let rep = run_all(&cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["summary"]["fail"], 0);
        let first = &v["checks"][0];
        assert_eq!(first["id"], "budget_separation");
        assert_eq!(first["verdict"], "pass");
        assert!(first["margin"]["num"].is_string());
        let back: LedgerReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, rep);
    }
}
