//! Seeded random instances and point clouds for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::TsplibPointCloud;
use crate::model::{Commodity, Instance, Metric, Point};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    /// Number of commodities.
    pub tasks: usize,
    /// Chance that a task has two pickups and one delivery.
    pub merge_probability: f64,
    /// Chance that a task has one pickup and two deliveries.
    pub split_probability: f64,
    /// Coordinates are integers drawn from `0..=extent`.
    pub extent: u32,
    pub metric: Metric,
}

impl RandomSpec {
    pub fn pairs(tasks: usize) -> Self {
        Self {
            tasks,
            merge_probability: 0.0,
            split_probability: 0.0,
            extent: 100,
            metric: Metric::Euc2dRounded,
        }
    }

    pub fn mixed(tasks: usize) -> Self {
        Self {
            merge_probability: 0.2,
            split_probability: 0.2,
            ..Self::pairs(tasks)
        }
    }

    pub fn with_extent(mut self, extent: u32) -> Self {
        self.extent = extent;
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

/// Draws an instance; node ids are shuffled so roles are not tied to ids.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, spec: &RandomSpec) -> Instance {
    // group sizes: (pickups, deliveries)
    let groups: Vec<(usize, usize)> = (0..spec.tasks)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < spec.merge_probability {
                (2, 1)
            } else if u < spec.merge_probability + spec.split_probability {
                (1, 2)
            } else {
                (1, 1)
            }
        })
        .collect();
    let n: usize = groups.iter().map(|(p, d)| p + d).sum();
    let mut ids: Vec<usize> = (1..=n).collect();
    ids.shuffle(rng);

    let mut next = ids.into_iter();
    let commodities = groups
        .iter()
        .enumerate()
        .map(|(m, &(p, d))| {
            let mut payloads = Vec::with_capacity(p + d);
            for _ in 0..p {
                payloads.push((next.next().unwrap(), d as f64));
            }
            for _ in 0..d {
                payloads.push((next.next().unwrap(), -(p as f64)));
            }
            Commodity::new(m, payloads)
        })
        .collect();

    let mut point = || {
        Point::new(
            rng.gen_range(0..=spec.extent) as f64,
            rng.gen_range(0..=spec.extent) as f64,
        )
    };
    let depot = point();
    let locations = (0..n).map(|_| point()).collect();
    Instance::new(format!("random-{n}"), depot, locations, commodities, spec.metric)
        .expect("random instances are valid by construction")
}

/// Uniform integer point cloud in a `extent x extent` square.
pub fn uniform_cloud<R: Rng + ?Sized>(rng: &mut R, n: usize, extent: u32) -> TsplibPointCloud {
    let coords = (0..n)
        .map(|_| {
            Point::new(
                rng.gen_range(0..=extent) as f64,
                rng.gen_range(0..=extent) as f64,
            )
        })
        .collect();
    TsplibPointCloud {
        name: format!("uniform{n}"),
        dimension: n,
        coords,
        ids: (1..=n).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_repeat() {
        let a = random_instance(&mut seeded(7), &RandomSpec::mixed(6));
        let b = random_instance(&mut seeded(7), &RandomSpec::mixed(6));
        assert_eq!(a, b);
    }

    #[test]
    fn every_location_is_in_one_group() {
        let inst = random_instance(&mut seeded(3), &RandomSpec::mixed(20));
        for k in inst.locations() {
            let groups = inst.commodities().iter().filter(|c| c.payload_at(k) != 0.0).count();
            assert_eq!(groups, 1, "node {k}");
        }
    }
}
