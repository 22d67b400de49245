use std::collections::BTreeSet;

use fjl_core::geometry::{Construction, Level};
use fjl_core::verify::{Ledger, VerifyConfig};

fn cfg() -> VerifyConfig {
    VerifyConfig {
        j_max: 8,
        lattice: 4,
        ..VerifyConfig::default()
    }
}

fn failing_ids(c: Construction) -> BTreeSet<String> {
    Ledger::new(c)
        .run_all(&cfg())
        .expect("mutated ledger still runs to completion")
        .into_iter()
        .filter(|r| !r.verdict.is_pass())
        .map(|r| r.id)
        .collect()
}

#[test]
fn standard_construction_passes() {
    assert!(failing_ids(Construction::STANDARD).is_empty());
}

#[test]
fn coarser_delta_is_caught() {
    let c = Construction {
        delta_slope: 1,
        ..Construction::STANDARD
    };
    let ids = failing_ids(c);
    assert!(ids.contains("loss_chain"), "{ids:?}");
    assert!(ids.contains("total_loss"), "{ids:?}");
}

#[test]
fn thinner_r1_inset_is_caught() {
    let c = Construction {
        r1_side_inset: 1,
        ..Construction::STANDARD
    };
    let ids = failing_ids(c);
    assert!(ids.contains("derivative"), "{ids:?}");
}

#[test]
fn phi_onto_q3_is_caught() {
    let c = Construction {
        phi_target: Level::Three,
        ..Construction::STANDARD
    };
    let ids = failing_ids(c);
    assert!(ids.contains("covering"), "{ids:?}");
}
