use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bipartite::{self, BipartiteGraph};
use crate::count::CountResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateParams {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl EstimateParams {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        for (name, value) in [("epsilon", epsilon), ("delta", delta)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(EstimateParams { epsilon, delta, seed })
    }

    /// Number of independent batches whose median is reported.
    pub fn batches(&self) -> usize {
        (libm::ceil(libm::log(1.0 / self.delta)) as usize).max(1)
    }
}

/// Samples drawn to size the batches.
const PILOT_SAMPLES: usize = 256;
const MIN_BATCH: usize = 100;
const MAX_BATCH: usize = 1 << 21;
/// Chebyshev factor: a batch mean misses by more than epsilon with
/// probability at most 1/16 when the pilot variance is accurate.
const BATCH_FACTOR: f64 = 16.0;

/// Per-batch seed derivation (SplitMix64 finalizer over seed and batch index).
pub fn batch_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimates the number of perfect matchings by sequential importance sampling.
///
/// Rows are assigned one at a time; a column is drawn with probability
/// proportional to the Minc-Brégman upper bound on the permanent of what
/// remains, and each sample is the inverse of its path probability, which is
/// unbiased. The reported value is the median of `⌈ln(1/δ)⌉` batch means,
/// with batch sizes chosen from a pilot estimate of the relative variance.
///
/// Graphs without a perfect matching yield an exact zero.
pub fn estimate_perfect(g: &BipartiteGraph, params: EstimateParams) -> Result<CountResult> {
    let params = EstimateParams::new(params.epsilon, params.delta, params.seed)?;
    if g.left() != g.right() {
        return Err(Error::NotSquare {
            left: g.left(),
            right: g.right(),
        });
    }
    if !bipartite::max_matching(g).is_perfect() {
        return Ok(CountResult::exact(0u32.into()));
    }
    let sampler = Sampler::new(g);
    let k = params.batches();

    let mut pilot_rng = ChaCha8Rng::seed_from_u64(batch_seed(params.seed, k as u64));
    let pilot: Vec<f64> = (0..PILOT_SAMPLES).map(|_| sampler.sample(&mut pilot_rng)).collect();
    let batch = batch_size(&pilot, params.epsilon);

    let mut means: Vec<f64> = (0..k)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(batch_seed(params.seed, i as u64));
            let sum: f64 = (0..batch).map(|_| sampler.sample(&mut rng)).sum();
            sum / batch as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let median = if k % 2 == 1 {
        means[k / 2]
    } else {
        0.5 * (means[k / 2 - 1] + means[k / 2])
    };
    Ok(CountResult::estimate(median, params.epsilon, params.delta, params.seed))
}

fn batch_size(pilot: &[f64], epsilon: f64) -> usize {
    let n = pilot.len() as f64;
    let mean = pilot.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return MAX_BATCH;
    }
    let var = pilot.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let rel = var / (mean * mean);
    let want = libm::ceil(BATCH_FACTOR * rel / (epsilon * epsilon));
    (want as usize).clamp(MIN_BATCH, MAX_BATCH)
}

struct Sampler {
    n: usize,
    order: Vec<usize>,
    adj: Vec<Vec<usize>>,
    col_rows: Vec<Vec<usize>>,
    degree: Vec<usize>,
    // ln((d!)^(1/d)); index 0 unused
    log_bound: Vec<f64>,
}

impl Sampler {
    fn new(g: &BipartiteGraph) -> Self {
        let n = g.left();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&u| (g.left_degree(u), u));
        let mut log_bound = vec![f64::NEG_INFINITY; n + 1];
        let mut log_fact = 0.0;
        for (d, bound) in log_bound.iter_mut().enumerate().skip(1) {
            log_fact += libm::log(d as f64);
            *bound = log_fact / d as f64;
        }
        Sampler {
            n,
            order,
            adj: (0..n).map(|u| g.neighbors(u).to_vec()).collect(),
            col_rows: g.transpose_adjacency(),
            degree: (0..n).map(|u| g.left_degree(u)).collect(),
            log_bound,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let n = self.n;
        let mut deg = self.degree.clone();
        let mut col_free = vec![true; n];
        let mut row_done = vec![false; n];
        let mut weight = 1.0f64;
        let mut cand: Vec<(usize, f64)> = Vec::with_capacity(n);
        for &row in &self.order {
            row_done[row] = true;
            let mut base = 0.0;
            for r in 0..n {
                if !row_done[r] {
                    if deg[r] == 0 {
                        return 0.0;
                    }
                    base += self.log_bound[deg[r]];
                }
            }
            cand.clear();
            let mut best = f64::NEG_INFINITY;
            for &j in &self.adj[row] {
                if !col_free[j] {
                    continue;
                }
                let mut lb = base;
                for &r in &self.col_rows[j] {
                    if !row_done[r] {
                        lb += self.log_bound[deg[r] - 1] - self.log_bound[deg[r]];
                    }
                }
                if lb > f64::NEG_INFINITY {
                    best = best.max(lb);
                    cand.push((j, lb));
                }
            }
            if cand.is_empty() {
                return 0.0;
            }
            let mut total = 0.0;
            for c in cand.iter_mut() {
                c.1 = libm::exp(c.1 - best);
                total += c.1;
            }
            let mut u = rng.random::<f64>() * total;
            let mut pick = cand[cand.len() - 1];
            for &c in &cand {
                if u < c.1 {
                    pick = c;
                    break;
                }
                u -= c.1;
            }
            weight *= total / pick.1;
            let j = pick.0;
            col_free[j] = false;
            for &r in &self.col_rows[j] {
                if !row_done[r] {
                    deg[r] -= 1;
                }
            }
        }
        weight
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::count::{CountMethod, CountValue};

    fn value(r: &CountResult) -> f64 {
        r.value.as_f64()
    }

    #[test]
    fn complete_graphs() {
        let p = EstimateParams::new(0.1, 0.1, 1).unwrap();
        let r = estimate_perfect(&BipartiteGraph::complete(3, 3), p).unwrap();
        assert_eq!(r.method, CountMethod::Estimate);
        assert!((5.4..=6.6).contains(&value(&r)), "{r:?}");
        for seed in 0..5 {
            let p = EstimateParams::new(0.05, 0.2, seed).unwrap();
            let r = estimate_perfect(&BipartiteGraph::complete(2, 2), p).unwrap();
            assert!((value(&r) - 2.0).abs() <= 0.1, "{r:?}");
        }
    }

    #[test]
    fn no_perfect_matching_is_exact_zero() {
        let g = BipartiteGraph::new(2, 2, [(0, 0), (1, 0)]).unwrap();
        let r = estimate_perfect(&g, EstimateParams::new(0.1, 0.1, 3).unwrap()).unwrap();
        assert_eq!(r.method, CountMethod::Exact);
        assert_eq!(r.value, CountValue::Integer(0u32.into()));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = BipartiteGraph::new(4, 4, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 3), (3, 3), (3, 0)]).unwrap();
        let p = EstimateParams::new(0.1, 0.1, 42).unwrap();
        assert_eq!(estimate_perfect(&g, p).unwrap(), estimate_perfect(&g, p).unwrap());
    }

    #[test]
    fn parameters_are_checked() {
        assert!(EstimateParams::new(0.0, 0.5, 1).is_err());
        assert!(EstimateParams::new(0.5, 1.0, 1).is_err());
        assert!(EstimateParams::new(f64::NAN, 0.5, 1).is_err());
        assert_eq!(EstimateParams::new(0.1, 0.1, 0).unwrap().batches(), 3);
    }
}
