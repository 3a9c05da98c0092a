//! Exact optimum by forward dynamic programming over precedence-closed
//! subsets of locations. Intended as a test oracle for small instances.

use std::collections::HashMap;

use thiserror::Error;

use crate::model::{Instance, ModelError, NodeId, Tour};

pub const DEFAULT_NODE_LIMIT: usize = 20;
/// Hard ceiling imposed by the `u32` subset masks.
pub const MAX_NODE_LIMIT: usize = 31;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("instance has {nodes} locations, exact search is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub tour: Tour,
    /// Always true; the search is exhaustive.
    pub optimal: bool,
    /// Number of precedence-closed subsets visited.
    pub states: usize,
}

/// Optimal tour for instances with at most `node_limit` locations.
pub fn exact_oracle(instance: &Instance, node_limit: usize) -> Result<ExactSolution, ExactError> {
    let n = instance.location_count();
    let limit = node_limit.min(MAX_NODE_LIMIT);
    if n > limit {
        return Err(ExactError::TooLarge { nodes: n, limit });
    }
    let end = instance.end();
    if n == 0 {
        let tour = Tour::new(instance, vec![0, end])?;
        return Ok(ExactSolution {
            tour,
            optimal: true,
            states: 1,
        });
    }

    let bit = |node: NodeId| 1u32 << (node - 1);
    let parent_mask: Vec<u32> = (0..=n)
        .map(|k| {
            if k == 0 {
                0
            } else {
                instance.precedence().parents_of(k).iter().map(|&p| bit(p)).sum()
            }
        })
        .collect();

    // dp[idx * n + (last - 1)]: cheapest path from the depot through the
    // subset `masks[idx]` ending at `last`
    let mut index: HashMap<u32, usize> = HashMap::new();
    let mut masks: Vec<u32> = Vec::new();
    let mut dp: Vec<f64> = Vec::new();

    let mut layer: Vec<u32> = Vec::new();
    for k in 1..=n {
        if parent_mask[k] == 0 {
            let m = bit(k);
            index.insert(m, masks.len());
            masks.push(m);
            dp.extend(std::iter::repeat_n(f64::INFINITY, n));
            dp[(masks.len() - 1) * n + (k - 1)] = instance.cost(0, k);
            layer.push(m);
        }
    }

    for _ in 1..n {
        let mut next: Vec<u32> = Vec::new();
        for &mask in &layer {
            let from = index[&mask];
            for k in 1..=n {
                let b = bit(k);
                if mask & b != 0 || parent_mask[k] & !mask != 0 {
                    continue;
                }
                let grown = mask | b;
                let to = *index.entry(grown).or_insert_with(|| {
                    masks.push(grown);
                    dp.extend(std::iter::repeat_n(f64::INFINITY, n));
                    next.push(grown);
                    masks.len() - 1
                });
                let mut best = dp[to * n + (k - 1)];
                for last in 1..=n {
                    let c = dp[from * n + (last - 1)];
                    if c.is_finite() {
                        let v = c + instance.cost(last, k);
                        if v < best {
                            best = v;
                        }
                    }
                }
                dp[to * n + (k - 1)] = best;
            }
        }
        layer = next;
    }

    let full = ((1u64 << n) - 1) as u32;
    let full_idx = index[&full];
    let mut best = f64::INFINITY;
    let mut last = 0;
    for k in 1..=n {
        let v = dp[full_idx * n + (k - 1)] + instance.cost(k, end);
        if v < best {
            best = v;
            last = k;
        }
    }

    // walk back by matching the recorded values
    let mut order = vec![end, last];
    let mut mask = full;
    let mut cur = last;
    while mask.count_ones() > 1 {
        let here = dp[index[&mask] * n + (cur - 1)];
        let prev_mask = mask & !bit(cur);
        let prev_idx = index[&prev_mask];
        let prev = (1..=n)
            .filter(|&p| prev_mask & bit(p) != 0)
            .find(|&p| {
                let c = dp[prev_idx * n + (p - 1)];
                c.is_finite() && c + instance.cost(p, cur) == here
            })
            .expect("a predecessor reproduces the recorded cost");
        order.push(prev);
        mask = prev_mask;
        cur = prev;
    }
    order.push(0);
    order.reverse();

    Ok(ExactSolution {
        tour: Tour::new(instance, order)?,
        optimal: true,
        states: masks.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_tour, Commodity, Metric, Point};

    #[test]
    fn line_instance() {
        let inst = Instance::new(
            "line",
            Point::new(0.0, 0.0),
            vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![Commodity::new(0, vec![(1, 1.0), (2, -1.0)])],
            Metric::Euc2dContinuous,
        )
        .unwrap();
        let sol = exact_oracle(&inst, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(sol.tour.order(), &[0, 1, 2, 3]);
        assert_eq!(sol.tour.cost(), 4.0);
        // {1} and {1, 2}
        assert_eq!(sol.states, 2);
    }

    #[test]
    fn precedence_forces_the_long_way() {
        // parent far out on the right, child on the left
        let inst = Instance::new(
            "detour",
            Point::new(0.0, 0.0),
            vec![Point::new(10.0, 0.0), Point::new(-1.0, 0.0), Point::new(5.0, 0.0)],
            vec![Commodity::new(0, vec![(1, 1.0), (2, -1.0)])],
            Metric::Euc2dContinuous,
        )
        .unwrap();
        let sol = exact_oracle(&inst, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(sol.tour.cost(), 22.0);
        assert!(validate_tour(&inst, sol.tour.order()).unwrap().is_feasible());
    }

    #[test]
    fn size_limit_is_an_error() {
        let pts: Vec<Point> = (1..=6).map(|i| Point::new(i as f64, 0.0)).collect();
        let inst = Instance::new("free", Point::new(0.0, 0.0), pts, vec![], Metric::Euc2dRounded).unwrap();
        assert_eq!(
            exact_oracle(&inst, 5).unwrap_err(),
            ExactError::TooLarge { nodes: 6, limit: 5 }
        );
        let sol = exact_oracle(&inst, 6).unwrap();
        assert_eq!(sol.tour.cost(), 12.0);
        assert_eq!(sol.states, 63);
    }
}
