//! Counting popular matchings with ties through perfect matchings.
//!
//! [`build_reduction`] turns an instance into a bipartite graph `G'` whose
//! perfect matchings number `|D|!` times the popular matchings, `D` being the
//! dummy agents that balance the sides. Perfect matchings are then counted
//! exactly ([`count_perfect_exact`]) or estimated ([`estimate_perfect`]).

mod estimate;
mod permanent;
mod reduction;

use num_bigint::BigUint;
use num_traits::Zero;

pub use estimate::{batch_seed, estimate_perfect, EstimateParams};
pub use permanent::{count_perfect_exact, count_perfect_exact_with_limit, DEFAULT_EXACT_LIMIT, MAX_EXACT_LIMIT};
pub use reduction::{build_reduction, check_complete_lists, LeftBlock, ReducedInstance, RightBlock};

use crate::count::{CountResult, CountValue};
use crate::instance::Instance;
use crate::oracle::Oracle;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountMode {
    /// Ryser permanent of `G'`, up to the given side length.
    Exact {
        limit: usize,
    },
    Estimate(EstimateParams),
    Oracle(Oracle),
}

impl CountMode {
    pub fn exact() -> Self {
        CountMode::Exact {
            limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::from(1u32), |acc, k| acc * k)
}

/// Counts popular matchings of a HA/HAT instance.
///
/// Exact and estimate modes need last resorts and complete lists; oracle mode
/// adds last resorts itself when missing.
pub fn count_popular_hat(inst: &Instance, mode: CountMode) -> Result<CountResult> {
    if let CountMode::Oracle(oracle) = mode {
        let inst = inst.ensure_last_resorts();
        return Ok(CountResult::oracle(oracle.count_popular(&inst)?));
    }
    let reduced = match build_reduction(inst) {
        Ok(r) => r,
        Err(Error::Unbalanced { .. }) => return Ok(CountResult::exact(BigUint::zero())),
        Err(e) => return Err(e),
    };
    let dummies = factorial(reduced.dummy_count);
    match mode {
        CountMode::Exact { limit } => {
            let perfect = count_perfect_exact_with_limit(&reduced.graph, limit)?;
            if !(&perfect % &dummies).is_zero() {
                return Err(Error::Internal(alloc::format!(
                    "{perfect} perfect matchings is not a multiple of {}!",
                    reduced.dummy_count
                )));
            }
            Ok(CountResult::exact(perfect / dummies))
        }
        CountMode::Estimate(params) => {
            let mut r = estimate_perfect(&reduced.graph, params)?;
            if let CountValue::Estimate(x) = r.value {
                let scale = num_traits::ToPrimitive::to_f64(&dummies).unwrap_or(f64::INFINITY);
                r.value = CountValue::Estimate(x / scale);
            }
            Ok(r)
        }
        CountMode::Oracle(_) => unreachable!(),
    }
}
