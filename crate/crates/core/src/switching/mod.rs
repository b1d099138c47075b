//! Popular matchings of capacitated instances and their switching graphs.
//!
//! Given one popular matching `M`, every agent contributes one directed edge
//! between its two admissible houses, pointing away from where it sits. The
//! other popular matchings are exactly those obtained by reversing a
//! switching set of that graph.

mod graph;
mod labels;
mod set;

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use num_bigint::BigUint;

pub use graph::{
    build_switching_graph, compare_property_two, validate_switching_properties, Property, PropertyReport,
    PropertyViolation, SwitchingEdge, SwitchingGraph, Weight,
};
pub use labels::{
    compute_fs_cha, find_popular_cha, is_popular_cha, is_popular_cha_with, ChaLabels, ChaVerdict, ChaViolation,
};
pub use set::{
    apply_switching_move, decompose_difference, decompose_edge_set, enumerate_switching_sets, is_switching_edge_set,
    switching_edge_sets, SwitchingCycle, SwitchingPath, SwitchingSet,
};

use crate::instance::{Instance, Matching};
use crate::{Error, Result};

/// All popular matchings, reached from one of them by switching moves.
pub fn popular_matchings_cha(inst: &Instance) -> Result<Vec<Matching>> {
    if !inst.last_resorts_added() {
        return Err(Error::LastResortsMissing);
    }
    let Some(m) = find_popular_cha(inst)? else {
        return Ok(Vec::new());
    };
    let sg = build_switching_graph(inst, &m)?;
    let mut seen = BTreeSet::new();
    for set in enumerate_switching_sets(&sg)? {
        let (_, next) = apply_switching_move(&sg, &set)?;
        seen.insert(next);
    }
    Ok(seen.into_iter().collect())
}

/// Number of distinct popular matchings; zero when there are none.
pub fn count_popular_cha(inst: &Instance) -> Result<BigUint> {
    Ok(BigUint::from(popular_matchings_cha(inst)?.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::*;
    use crate::instance::Kind;
    use crate::oracle::Oracle;

    #[test]
    fn fixture_counts() {
        let c = fix_c().add_last_resorts().unwrap();
        assert_eq!(count_popular_cha(&c).unwrap(), 1u32.into());
        let a = fix_a().with_kind(Kind::Cha).unwrap().add_last_resorts().unwrap();
        assert_eq!(count_popular_cha(&a).unwrap(), 2u32.into());
        assert_eq!(count_popular_cha(&fix_c()), Err(Error::LastResortsMissing));
    }

    #[test]
    fn matches_oracle_on_fixtures() {
        for inst in [fix_a(), fix_c(), fix_e()] {
            let inst = inst.with_kind(Kind::Cha).unwrap().add_last_resorts().unwrap();
            let mut ours = popular_matchings_cha(&inst).unwrap();
            let mut theirs = Oracle::default().popular_matchings(&inst).unwrap();
            ours.sort();
            theirs.sort();
            assert_eq!(ours, theirs);
        }
    }
}
