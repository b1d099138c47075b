use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::bipartite::BipartiteGraph;
use crate::{Error, Result};

/// Default largest side for exact counting.
pub const DEFAULT_EXACT_LIMIT: usize = 24;

/// Hard ceiling on the configurable limit: `33! < 2^127`, so the permanent of
/// any 0/1 matrix up to that size fits the signed 128-bit accumulator.
pub const MAX_EXACT_LIMIT: usize = 33;

/// Number of perfect matchings with the default size limit.
pub fn count_perfect_exact(g: &BipartiteGraph) -> Result<BigUint> {
    count_perfect_exact_with_limit(g, DEFAULT_EXACT_LIMIT)
}

/// Permanent of the biadjacency matrix by Ryser's inclusion-exclusion formula,
/// walking column subsets in Gray-code order so each step adds or removes a
/// single column from the running row sums.
///
/// Terms are accumulated with wrapping `i128` arithmetic: the sum is exact
/// modulo 2^128, and the true permanent is below 2^127, so the wrapped total
/// equals it.
pub fn count_perfect_exact_with_limit(g: &BipartiteGraph, limit: usize) -> Result<BigUint> {
    let n = g.left();
    if g.right() != n {
        return Err(Error::NotSquare {
            left: n,
            right: g.right(),
        });
    }
    let limit = limit.min(MAX_EXACT_LIMIT);
    if n > limit {
        return Err(Error::SizeLimit { size: n, limit });
    }
    if n == 0 {
        return Ok(BigUint::from(1u32));
    }
    if (0..n).any(|u| g.left_degree(u) == 0) || g.right_degrees().contains(&0) {
        return Ok(BigUint::from(0u32));
    }
    // columns[j] = rows adjacent to column j
    let columns: Vec<Vec<usize>> = g.transpose_adjacency();
    let mut row_sum = vec![0i128; n];
    let mut in_set = vec![false; n];
    let mut total: i128 = 0;
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let delta = if in_set[j] { -1 } else { 1 };
        in_set[j] = !in_set[j];
        size = (size as isize + delta as isize) as usize;
        for &r in &columns[j] {
            row_sum[r] += delta;
        }
        let mut prod: i128 = 1;
        for &s in &row_sum {
            if s == 0 {
                prod = 0;
                break;
            }
            prod = prod.wrapping_mul(s);
        }
        if prod != 0 {
            if (n - size).is_multiple_of(2) {
                total = total.wrapping_add(prod);
            } else {
                total = total.wrapping_sub(prod);
            }
        }
    }
    if total < 0 {
        return Err(Error::Internal("negative permanent".into()));
    }
    Ok(BigUint::from(total as u128))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(n: usize) -> BipartiteGraph {
        BipartiteGraph::new(n, n, (0..n).map(|i| (i, i))).unwrap()
    }

    #[test]
    fn small_permanents() {
        assert_eq!(
            count_perfect_exact(&BipartiteGraph::complete(2, 2)).unwrap(),
            2u32.into()
        );
        assert_eq!(
            count_perfect_exact(&BipartiteGraph::complete(3, 3)).unwrap(),
            6u32.into()
        );
        assert_eq!(count_perfect_exact(&diag(3)).unwrap(), 1u32.into());
        assert_eq!(
            count_perfect_exact(&BipartiteGraph::complete(0, 0)).unwrap(),
            1u32.into()
        );
        let missing = BipartiteGraph::new(2, 2, [(0, 0), (1, 0)]).unwrap();
        assert_eq!(count_perfect_exact(&missing).unwrap(), 0u32.into());
    }

    #[test]
    fn derangements_of_four() {
        let g = BipartiteGraph::new(
            4,
            4,
            (0..4).flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j))),
        )
        .unwrap();
        assert_eq!(count_perfect_exact(&g).unwrap(), 9u32.into());
    }

    #[test]
    fn large_complete_graph_does_not_overflow() {
        // 20! = 2432902008176640000
        let n = count_perfect_exact(&BipartiteGraph::complete(20, 20)).unwrap();
        assert_eq!(n.to_string(), "2432902008176640000");
    }

    #[test]
    fn limits_and_shape() {
        assert!(matches!(
            count_perfect_exact(&BipartiteGraph::complete(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            count_perfect_exact_with_limit(&diag(5), 4),
            Err(Error::SizeLimit { size: 5, limit: 4 })
        ));
    }
}
