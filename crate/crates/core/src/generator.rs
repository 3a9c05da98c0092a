//! Deterministic conversion of a TSPLIB point cloud into a precedence
//! instance.
//!
//! Points are ranked by distance to the centroid (rank 1 is closest and
//! becomes the depot). The remaining ranks are paired from both ends of the
//! list moving inward, `(n, 2)`, `(n - 1, 3)`, ..., with the outer point as
//! the pickup. An odd remainder ends in a group of three where the innermost
//! point receives from the other two. Flipping the direction swaps every
//! pickup/delivery role.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{Provenance, TsplibPointCloud};
use crate::model::{Commodity, Instance, Metric, ModelError, NodeId, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Deliveries near the centroid, pickups on the periphery.
    ChildrenCentral,
    /// Pickups near the centroid, deliveries on the periphery.
    ParentsCentral,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::ChildrenCentral, Direction::ParentsCentral];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::ChildrenCentral => "children-central",
            Direction::ParentsCentral => "parents-central",
        }
    }

    /// Short suffix used in generated instance names.
    pub fn suffix(self) -> &'static str {
        match self {
            Direction::ChildrenCentral => "children",
            Direction::ParentsCentral => "parents",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "children-central" | "children" => Ok(Direction::ChildrenCentral),
            "parents-central" | "parents" => Ok(Direction::ParentsCentral),
            other => Err(GenError::UnknownDirection(other.to_string())),
        }
    }
}

/// How points at equal centroid distance are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TieBreak {
    /// Stable sort: equal distances keep their file order.
    #[default]
    FileOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub direction: Direction,
    pub tie_break: TieBreak,
    pub metric: Metric,
}

impl GeneratorConfig {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            tie_break: TieBreak::default(),
            metric: Metric::default(),
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("need at least 3 points to generate an instance, got {0}")]
    TooFewPoints(usize),
    #[error("unknown direction `{0}` (expected children or parents)")]
    UnknownDirection(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A precedence group by centroid rank (1-based; rank 1 is the depot).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RankGroup {
    /// `outer` has the larger rank.
    Pair { outer: usize, inner: usize },
    /// `inner` has the smallest rank of the three.
    Triple { inner: usize, outer: [usize; 2] },
}

/// Groups ranks `2..=n` from both ends inward.
pub fn rank_groups(n: usize) -> Vec<RankGroup> {
    let mut groups = Vec::with_capacity(n / 2);
    let (mut lo, mut hi) = (2usize, n);
    loop {
        let remaining = (hi + 1).saturating_sub(lo);
        match remaining {
            0 => break,
            3 => {
                groups.push(RankGroup::Triple {
                    inner: lo,
                    outer: [lo + 1, lo + 2],
                });
                break;
            }
            1 => unreachable!("pairing from both ends leaves 0 or 3 ranks, never 1"),
            _ => {
                groups.push(RankGroup::Pair {
                    outer: hi,
                    inner: lo,
                });
                lo += 1;
                hi -= 1;
            }
        }
    }
    groups
}

/// Centroid ranking: `order[r]` is the file index of the point with rank `r + 1`.
pub fn centroid_order(points: &[Point], tie_break: TieBreak) -> Vec<usize> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let centroid = Point::new(cx, cy);
    let dist: Vec<f64> = points.iter().map(|p| p.distance(&centroid)).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    match tie_break {
        TieBreak::FileOrder => order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b])),
    }
    order
}

pub fn generate(cloud: &TsplibPointCloud, config: GeneratorConfig) -> Result<Instance, GenError> {
    generate_with_provenance(cloud, config).map(|(instance, _)| instance)
}

/// Like [`generate`], also returning the provenance record (source name,
/// direction, and the TSPLIB id of every node).
pub fn generate_with_provenance(
    cloud: &TsplibPointCloud,
    config: GeneratorConfig,
) -> Result<(Instance, Provenance), GenError> {
    let n = cloud.coords.len();
    if n < 3 {
        return Err(GenError::TooFewPoints(n));
    }
    let order = centroid_order(&cloud.coords, config.tie_break);
    // rank r (1-based) becomes node r - 1; the end depot is node n
    let node_of = |rank: usize| -> NodeId { rank - 1 };

    let commodities = rank_groups(n)
        .into_iter()
        .enumerate()
        .map(|(id, group)| {
            let (inner, outer): (usize, Vec<usize>) = match group {
                RankGroup::Pair { outer, inner } => (inner, vec![outer]),
                RankGroup::Triple { inner, outer } => (inner, outer.to_vec()),
            };
            let k = outer.len() as f64;
            let payloads = match config.direction {
                Direction::ChildrenCentral => outer
                    .iter()
                    .map(|&r| (node_of(r), 1.0))
                    .chain(std::iter::once((node_of(inner), -k)))
                    .collect(),
                Direction::ParentsCentral => std::iter::once((node_of(inner), k))
                    .chain(outer.iter().map(|&r| (node_of(r), -1.0)))
                    .collect(),
            };
            Commodity::new(id, payloads)
        })
        .collect();

    let depot = cloud.coords[order[0]];
    let locations = order[1..].iter().map(|&i| cloud.coords[i]).collect();
    let name = format!("{}-{}", cloud.name, config.direction.suffix());
    let instance = Instance::new(name, depot, locations, commodities, config.metric)?;
    let provenance = Provenance {
        source: Some(cloud.name.clone()),
        direction: Some(config.direction),
        source_ids: Some(order.iter().map(|&i| cloud.ids[i]).collect()),
    };
    Ok((instance, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[(f64, f64)]) -> TsplibPointCloud {
        TsplibPointCloud {
            name: "test".into(),
            dimension: points.len(),
            coords: points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
            ids: (1..=points.len()).collect(),
        }
    }

    #[test]
    fn groups_for_even_and_odd_remainders() {
        use RankGroup::*;
        assert_eq!(
            rank_groups(5),
            vec![Pair { outer: 5, inner: 2 }, Pair { outer: 4, inner: 3 }]
        );
        assert_eq!(
            rank_groups(7),
            vec![
                Pair { outer: 7, inner: 2 },
                Pair { outer: 6, inner: 3 },
                Pair { outer: 5, inner: 4 },
            ]
        );
        assert_eq!(
            rank_groups(8),
            vec![
                Pair { outer: 8, inner: 2 },
                Pair { outer: 7, inner: 3 },
                Triple {
                    inner: 4,
                    outer: [5, 6]
                },
            ]
        );
        assert_eq!(rank_groups(3), vec![Pair { outer: 3, inner: 2 }]);
        assert_eq!(
            rank_groups(4),
            vec![Triple {
                inner: 2,
                outer: [3, 4]
            }]
        );
    }

    #[test]
    fn every_rank_is_grouped_once() {
        for n in 3..60 {
            let mut seen = vec![0; n + 1];
            for g in rank_groups(n) {
                match g {
                    RankGroup::Pair { outer, inner } => {
                        assert!(outer > inner);
                        seen[outer] += 1;
                        seen[inner] += 1;
                    }
                    RankGroup::Triple { inner, outer } => {
                        assert!(outer.iter().all(|&o| o > inner));
                        seen[inner] += 1;
                        for o in outer {
                            seen[o] += 1;
                        }
                    }
                }
            }
            assert!(seen[2..].iter().all(|&c| c == 1), "n = {n}");
        }
    }

    #[test]
    fn five_collinear_points() {
        // centroid at x = 2; ranks by file order on ties: x=2, x=1, x=3, x=0, x=4
        let c = cloud(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let (inst, prov) =
            generate_with_provenance(&c, GeneratorConfig::new(Direction::ChildrenCentral)).unwrap();
        assert_eq!(inst.depot(), Point::new(2.0, 0.0));
        assert_eq!(prov.source_ids.as_deref(), Some(&[3, 2, 4, 1, 5][..]));
        // nodes: 1 -> x=1, 2 -> x=3, 3 -> x=0, 4 -> x=4
        assert_eq!(inst.precedence().pairs(), vec![(3, 2), (4, 1)]);
        assert_eq!(inst.commodities()[0].payloads, vec![(4, 1.0), (1, -1.0)]);
        assert_eq!(inst.commodities()[1].payloads, vec![(3, 1.0), (2, -1.0)]);
        assert_eq!(inst.name(), "test-children");
    }

    #[test]
    fn seven_points_pair_exactly() {
        let c = cloud(&[
            (0.0, 0.0),
            (1.0, 0.1),
            (-2.0, 0.2),
            (3.0, 0.3),
            (-4.0, 0.4),
            (5.0, 0.5),
            (-6.0, 0.6),
        ]);
        let inst = generate(&c, GeneratorConfig::new(Direction::ChildrenCentral)).unwrap();
        assert_eq!(inst.commodities().len(), 3);
        assert!(inst
            .precedence()
            .child_nodes()
            .all(|k| inst.precedence().parents_of(k).len() == 1));
    }

    #[test]
    fn eight_points_make_one_triple() {
        let c = cloud(&[
            (0.0, 0.0),
            (1.0, 0.1),
            (-2.0, 0.2),
            (3.0, 0.3),
            (-4.0, 0.4),
            (5.0, 0.5),
            (-6.0, 0.6),
            (7.0, 0.7),
        ]);
        let inst = generate(&c, GeneratorConfig::new(Direction::ChildrenCentral)).unwrap();
        let two_parent: Vec<_> = inst
            .precedence()
            .child_nodes()
            .filter(|&k| inst.precedence().parents_of(k).len() == 2)
            .collect();
        // ranks 4, 5, 6 form the triple; rank 4 is node 3
        assert_eq!(two_parent, vec![3]);
        assert_eq!(inst.precedence().parents_of(3), &[4, 5]);
        assert_eq!(inst.commodities().len(), 3);
        assert_eq!(inst.commodities()[2].payload_at(3), -2.0);

        let flipped = generate(&c, GeneratorConfig::new(Direction::ParentsCentral)).unwrap();
        assert_eq!(flipped.precedence().children_of(3), &[4, 5]);
        assert_eq!(flipped.commodities()[2].payload_at(3), 2.0);
        assert_eq!(flipped.points(), inst.points());
    }

    #[test]
    fn rejects_tiny_clouds() {
        let c = cloud(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(
            generate(&c, GeneratorConfig::new(Direction::ParentsCentral)),
            Err(GenError::TooFewPoints(2))
        );
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("children".parse::<Direction>().unwrap(), Direction::ChildrenCentral);
        assert_eq!(
            "parents-central".parse::<Direction>().unwrap(),
            Direction::ParentsCentral
        );
        assert!("sideways".parse::<Direction>().is_err());
    }
}
