//! Instances, tours, costs and the payload semantics that decide feasibility.
//!
//! Node numbering: `0` is the start depot, `1..=N` are the service locations
//! and `N + 1` is the end depot, a second copy of the start depot at the same
//! position. Every commodity is picked up (positive payload) at one or more
//! nodes and dropped off (negative payload) at one or more nodes; a node that
//! picks up commodity `m` is a parent of every node that drops `m` off.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node in an [`Instance`].
pub type NodeId = usize;

/// Slack allowed on payload sums and the non-negativity check.
pub const PAYLOAD_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Pairwise cost convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Metric {
    /// TSPLIB `EUC_2D`: Euclidean distance rounded to the nearest integer.
    #[default]
    Euc2dRounded,
    /// Plain Euclidean distance.
    Euc2dContinuous,
}

impl Metric {
    pub fn distance(self, a: &Point, b: &Point) -> f64 {
        let d = a.distance(b);
        match self {
            Metric::Euc2dRounded => (d + 0.5).floor(),
            Metric::Euc2dContinuous => d,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euc2dRounded => "euc2d-rounded",
            Metric::Euc2dContinuous => "euc2d-continuous",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euc2d-rounded" | "rounded" | "euc_2d" => Ok(Metric::Euc2dRounded),
            "euc2d-continuous" | "continuous" => Ok(Metric::Euc2dContinuous),
            other => Err(ModelError::UnknownMetric(other.to_string())),
        }
    }
}

/// One item type moved around the tour, as signed payload per node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub id: usize,
    /// Nonzero payload entries; positive at pickups, negative at deliveries.
    pub payloads: Vec<(NodeId, f64)>,
}

impl Commodity {
    pub fn new(id: usize, payloads: Vec<(NodeId, f64)>) -> Self {
        Self { id, payloads }
    }

    pub fn payload_at(&self, node: NodeId) -> f64 {
        self.payloads
            .iter()
            .filter(|(n, _)| *n == node)
            .map(|(_, q)| *q)
            .sum()
    }

    pub fn total_pickup(&self) -> f64 {
        self.payloads.iter().map(|(_, q)| q.max(0.0)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Depot,
    Parent,
    Child,
    /// A location with no precedence relation.
    Free,
}

/// Parent/child relation derived from commodity payload signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedenceSet {
    parents_of: Vec<Vec<NodeId>>,
    children_of: Vec<Vec<NodeId>>,
    roles: Vec<Role>,
}

impl PrecedenceSet {
    /// Builds the relation for an instance with `node_count` nodes (both
    /// depot copies included). Commodities must already be range-checked.
    pub fn from_commodities(
        node_count: usize,
        commodities: &[Commodity],
    ) -> Result<Self, ModelError> {
        let end = node_count - 1;
        let mut parents_of = vec![Vec::new(); node_count];
        let mut children_of = vec![Vec::new(); node_count];
        let mut roles = vec![Role::Free; node_count];
        roles[0] = Role::Depot;
        roles[end] = Role::Depot;

        for c in commodities {
            for &(node, q) in &c.payloads {
                let role = if q > 0.0 { Role::Parent } else { Role::Child };
                match roles[node] {
                    Role::Free => roles[node] = role,
                    r if r == role => {}
                    _ => return Err(ModelError::MixedRole { node }),
                }
            }
            for &(p, _) in c.payloads.iter().filter(|(_, q)| *q > 0.0) {
                for &(k, _) in c.payloads.iter().filter(|(_, q)| *q < 0.0) {
                    parents_of[k].push(p);
                    children_of[p].push(k);
                }
            }
        }
        for list in parents_of.iter_mut().chain(children_of.iter_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            parents_of,
            children_of,
            roles,
        })
    }

    pub fn parents_of(&self, node: NodeId) -> &[NodeId] {
        &self.parents_of[node]
    }

    pub fn children_of(&self, node: NodeId) -> &[NodeId] {
        &self.children_of[node]
    }

    pub fn role(&self, node: NodeId) -> Role {
        self.roles[node]
    }

    pub fn is_parent(&self, node: NodeId) -> bool {
        self.roles[node] == Role::Parent
    }

    pub fn is_child(&self, node: NodeId) -> bool {
        self.roles[node] == Role::Child
    }

    pub fn parent_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.roles.len()).filter(|&i| self.roles[i] == Role::Parent)
    }

    pub fn child_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.roles.len()).filter(|&i| self.roles[i] == Role::Child)
    }

    /// All `(parent, child)` pairs, sorted.
    pub fn pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out: Vec<_> = self
            .children_of
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("point {index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("node {node} is out of range for an instance with {node_count} nodes")]
    InvalidNode { node: NodeId, node_count: usize },
    #[error("commodity {commodity} places payload on depot node {node}")]
    DepotPayload { commodity: usize, node: NodeId },
    #[error("commodity {commodity} has a zero payload entry at node {node}")]
    ZeroPayload { commodity: usize, node: NodeId },
    #[error("commodity {commodity} lists node {node} more than once")]
    DuplicatePayload { commodity: usize, node: NodeId },
    #[error("commodity {commodity} payloads sum to {sum}, expected 0")]
    CommodityImbalance { commodity: usize, sum: f64 },
    #[error("commodity id {commodity} is used more than once")]
    DuplicateCommodity { commodity: usize },
    #[error("node {node} is both a pickup and a delivery")]
    MixedRole { node: NodeId },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("tour must contain at least two nodes, got {0}")]
    TooShort(usize),
    #[error("tour must start at depot node 0, starts at {found}")]
    WrongStart { found: NodeId },
    #[error("tour must end at depot node {expected}, ends at {found}")]
    WrongEnd { expected: NodeId, found: NodeId },
    #[error("tour has {found} nodes, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("node {node} appears more than once (again at position {position})")]
    DuplicateNode { node: NodeId, position: usize },
    #[error("node {node} is never visited")]
    MissingNode { node: NodeId },
}

impl ModelError {
    /// True for errors about the shape of a node sequence, as opposed to
    /// errors about instance data.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            ModelError::TooShort(_)
                | ModelError::WrongStart { .. }
                | ModelError::WrongEnd { .. }
                | ModelError::WrongLength { .. }
                | ModelError::DuplicateNode { .. }
                | ModelError::MissingNode { .. }
                | ModelError::InvalidNode { .. }
        )
    }
}

/// A precedence-constrained TSP instance. Immutable once built.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    points: Vec<Point>,
    commodities: Vec<Commodity>,
    precedence: PrecedenceSet,
    metric: Metric,
    /// Dense row-major cost matrix over all nodes.
    costs: Vec<f64>,
    /// Per node, the `(commodity index, payload)` entries.
    node_payloads: Vec<Vec<(usize, f64)>>,
    diagonal: f64,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.points == other.points
            && self.commodities == other.commodities
            && self.metric == other.metric
    }
}

impl Instance {
    /// `locations` are the non-depot nodes `1..=N` in order.
    pub fn new(
        name: impl Into<String>,
        depot: Point,
        locations: Vec<Point>,
        commodities: Vec<Commodity>,
        metric: Metric,
    ) -> Result<Self, ModelError> {
        let mut points = Vec::with_capacity(locations.len() + 2);
        points.push(depot);
        points.extend(locations);
        points.push(depot);
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(ModelError::NonFinitePoint { index });
            }
        }
        let node_count = points.len();
        let end = node_count - 1;

        let mut node_payloads = vec![Vec::new(); node_count];
        for (m, c) in commodities.iter().enumerate() {
            if commodities[..m].iter().any(|o| o.id == c.id) {
                return Err(ModelError::DuplicateCommodity { commodity: c.id });
            }
            let mut seen = Vec::with_capacity(c.payloads.len());
            let mut sum = 0.0;
            let mut scale = 1.0f64;
            for &(node, q) in &c.payloads {
                if node >= node_count {
                    return Err(ModelError::InvalidNode { node, node_count });
                }
                if node == 0 || node == end {
                    return Err(ModelError::DepotPayload {
                        commodity: c.id,
                        node,
                    });
                }
                if q == 0.0 || !q.is_finite() {
                    return Err(ModelError::ZeroPayload {
                        commodity: c.id,
                        node,
                    });
                }
                if seen.contains(&node) {
                    return Err(ModelError::DuplicatePayload {
                        commodity: c.id,
                        node,
                    });
                }
                seen.push(node);
                sum += q;
                scale = scale.max(q.abs());
                node_payloads[node].push((m, q));
            }
            if sum.abs() > PAYLOAD_TOLERANCE * scale {
                return Err(ModelError::CommodityImbalance {
                    commodity: c.id,
                    sum,
                });
            }
        }
        let precedence = PrecedenceSet::from_commodities(node_count, &commodities)?;

        let mut costs = vec![0.0; node_count * node_count];
        for i in 0..node_count {
            for j in (i + 1)..node_count {
                let d = metric.distance(&points[i], &points[j]);
                costs[i * node_count + j] = d;
                costs[j * node_count + i] = d;
            }
        }

        let diagonal = bounding_box_diagonal(&points);
        Ok(Self {
            name: name.into(),
            points,
            commodities,
            precedence,
            metric,
            costs,
            node_payloads,
            diagonal,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Positions of all nodes, both depot copies included.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, node: NodeId) -> Point {
        self.points[node]
    }

    pub fn depot(&self) -> Point {
        self.points[0]
    }

    /// Total node count including both depot copies (`N + 2`).
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Number of non-depot nodes `N`.
    pub fn location_count(&self) -> usize {
        self.points.len() - 2
    }

    pub const fn start(&self) -> NodeId {
        0
    }

    pub fn end(&self) -> NodeId {
        self.points.len() - 1
    }

    pub fn is_depot(&self, node: NodeId) -> bool {
        node == 0 || node == self.end()
    }

    /// Non-depot node ids `1..=N`.
    pub fn locations(&self) -> std::ops::RangeInclusive<NodeId> {
        1..=self.location_count()
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn precedence(&self) -> &PrecedenceSet {
        &self.precedence
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    /// `(commodity index, payload)` entries at `node`.
    pub fn payloads_at(&self, node: NodeId) -> &[(usize, f64)] {
        &self.node_payloads[node]
    }

    /// Cost between two nodes. Panics if either id is out of range; see
    /// [`Instance::checked_cost`].
    #[inline]
    pub fn cost(&self, i: NodeId, j: NodeId) -> f64 {
        self.costs[i * self.points.len() + j]
    }

    pub fn checked_cost(&self, i: NodeId, j: NodeId) -> Result<f64, ModelError> {
        let node_count = self.node_count();
        for node in [i, j] {
            if node >= node_count {
                return Err(ModelError::InvalidNode { node, node_count });
            }
        }
        Ok(self.cost(i, j))
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        self.diagonal
    }

    /// Largest total pickup of any single commodity.
    pub fn max_commodity_load(&self) -> f64 {
        self.commodities
            .iter()
            .map(Commodity::total_pickup)
            .fold(0.0, f64::max)
    }
}

/// A complete tour from the start depot to the end depot.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    order: Vec<NodeId>,
    cost: f64,
}

impl Tour {
    /// Checks the structural invariants and caches the cost. Precedence
    /// feasibility is not checked here; see [`validate_tour`].
    pub fn new(instance: &Instance, order: Vec<NodeId>) -> Result<Self, ModelError> {
        check_structure(instance, &order)?;
        let cost = sum_costs(instance, &order);
        Ok(Self { order, cost })
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn into_order(self) -> Vec<NodeId> {
        self.order
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn bounding_box_diagonal(points: &[Point]) -> f64 {
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    lo.distance(&hi)
}

fn sum_costs(instance: &Instance, order: &[NodeId]) -> f64 {
    order.windows(2).map(|w| instance.cost(w[0], w[1])).sum()
}

/// Sum of consecutive-pair costs along an arbitrary node sequence.
pub fn tour_cost(instance: &Instance, order: &[NodeId]) -> Result<f64, ModelError> {
    if order.len() < 2 {
        return Err(ModelError::TooShort(order.len()));
    }
    let node_count = instance.node_count();
    let mut seen = vec![false; node_count];
    for (position, &node) in order.iter().enumerate() {
        if node >= node_count {
            return Err(ModelError::InvalidNode { node, node_count });
        }
        if std::mem::replace(&mut seen[node], true) {
            return Err(ModelError::DuplicateNode { node, position });
        }
    }
    Ok(sum_costs(instance, order))
}

fn check_structure(instance: &Instance, order: &[NodeId]) -> Result<(), ModelError> {
    let node_count = instance.node_count();
    if order.len() < 2 {
        return Err(ModelError::TooShort(order.len()));
    }
    if order[0] != 0 {
        return Err(ModelError::WrongStart { found: order[0] });
    }
    let last = order[order.len() - 1];
    if last != instance.end() {
        return Err(ModelError::WrongEnd {
            expected: instance.end(),
            found: last,
        });
    }
    let mut seen = vec![false; node_count];
    for (position, &node) in order.iter().enumerate() {
        if node >= node_count {
            return Err(ModelError::InvalidNode { node, node_count });
        }
        if std::mem::replace(&mut seen[node], true) {
            return Err(ModelError::DuplicateNode { node, position });
        }
    }
    if let Some(node) = seen.iter().position(|s| !s) {
        return Err(ModelError::MissingNode { node });
    }
    if order.len() != node_count {
        return Err(ModelError::WrongLength {
            expected: node_count,
            found: order.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrecedenceViolation {
    /// Payload of `commodity` dropped below zero when leaving `node`.
    NegativePayload {
        node: NodeId,
        position: usize,
        commodity: usize,
        payload: f64,
    },
    /// Payload of `commodity` is not back to zero at the end depot.
    UnbalancedEnd { commodity: usize, payload: f64 },
}

impl fmt::Display for PrecedenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrecedenceViolation::NegativePayload {
                node,
                position,
                commodity,
                payload,
            } => write!(
                f,
                "payload of commodity {commodity} is {payload} after node {node} (position {position})"
            ),
            PrecedenceViolation::UnbalancedEnd { commodity, payload } => write!(
                f,
                "payload of commodity {commodity} is {payload} at the end depot"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub cost: f64,
    /// Largest single-commodity payload carried at any point.
    pub max_payload: f64,
    pub violation: Option<PrecedenceViolation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violation.is_none()
    }
}

/// Simulates the per-commodity payload along `order`.
///
/// Payload starts at zero, each visited node adds its signed payload, and the
/// tour is infeasible at the first node where any commodity goes negative.
/// Structural problems (endpoints, duplicates, missing nodes) are returned as
/// errors rather than as a report.
pub fn validate_tour(
    instance: &Instance,
    order: &[NodeId],
) -> Result<FeasibilityReport, ModelError> {
    check_structure(instance, order)?;
    let mut load = vec![0.0f64; instance.commodities().len()];
    let mut max_payload = 0.0f64;
    let mut violation = None;
    'walk: for (position, &node) in order.iter().enumerate() {
        let entries = instance.payloads_at(node);
        for &(m, q) in entries {
            load[m] += q;
            max_payload = max_payload.max(load[m]);
        }
        let mut worst: Option<(usize, f64)> = None;
        for &(m, _) in entries {
            if load[m] < -PAYLOAD_TOLERANCE && worst.is_none_or(|(w, _)| m < w) {
                worst = Some((m, load[m]));
            }
        }
        if let Some((m, payload)) = worst {
            violation = Some(PrecedenceViolation::NegativePayload {
                node,
                position,
                commodity: instance.commodities()[m].id,
                payload,
            });
            break 'walk;
        }
    }
    if violation.is_none() {
        if let Some((m, &payload)) = load
            .iter()
            .enumerate()
            .find(|(_, y)| y.abs() > PAYLOAD_TOLERANCE)
        {
            violation = Some(PrecedenceViolation::UnbalancedEnd {
                commodity: instance.commodities()[m].id,
                payload,
            });
        }
    }
    Ok(FeasibilityReport {
        cost: sum_costs(instance, order),
        max_payload,
        violation,
    })
}

/// Position-index check: every child appears after all of its parents.
/// Independent of the payload simulation in [`validate_tour`].
pub fn respects_precedence(instance: &Instance, order: &[NodeId]) -> bool {
    let mut position = vec![usize::MAX; instance.node_count()];
    for (pos, &node) in order.iter().enumerate() {
        if node < position.len() {
            position[node] = pos;
        }
    }
    instance.precedence().pairs().into_iter().all(|(p, c)| {
        position[p] != usize::MAX && position[c] != usize::MAX && position[p] < position[c]
    })
}
