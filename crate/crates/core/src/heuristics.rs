//! Tour construction: precedence-aware convex hull cheapest insertion and
//! the feasible nearest-neighbor baseline.
//!
//! Cheapest insertion starts from the convex hull of the depot and all pickup
//! nodes, places the depot on that cycle, and then repeatedly inserts the
//! node whose best arc has the lowest ratio `(C[i][k] + C[k][j]) / C[i][j]`.
//! Each node's best arc is the one with the smallest added length by
//! default, or the smallest ratio with [`ArcRule::Ratio`]. A node may only go
//! into the part of the subtour that already visits all of its parents;
//! nodes with an uninserted parent are not candidates. The construction runs
//! once per hull orientation and keeps the cheaper tour.
//!
//! Ties are broken towards the smallest node id, then the earliest arc.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::geometry::convex_hull;
use crate::model::{validate_tour, Instance, ModelError, NodeId, Point, PrecedenceSet, Tour};
use crate::par;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeuristicError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no feasible node can be inserted; {remaining} nodes left")]
    Stuck { remaining: usize },
    #[error("constructed tour is infeasible: {0}")]
    Infeasible(String),
}

/// Scale guard for zero-length arcs, relative to the instance's bounding-box
/// diagonal.
pub const RATIO_EPSILON_SCALE: f64 = 1e-12;

fn ratio_epsilon(instance: &Instance) -> f64 {
    let eps = RATIO_EPSILON_SCALE * instance.bounding_box_diagonal();
    if eps > 0.0 {
        eps
    } else {
        f64::MIN_POSITIVE
    }
}

#[inline]
fn ratio_with(instance: &Instance, eps: f64, i: NodeId, j: NodeId, k: NodeId) -> f64 {
    let num = instance.cost(i, k) + instance.cost(k, j);
    let den = instance.cost(i, j);
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        1.0
    } else {
        num / eps
    }
}

/// Detour ratio of placing `k` between `i` and `j`. Zero-length arcs divide
/// by a small guard instead of zero, and a zero detour over a zero-length arc
/// is exactly 1.
pub fn insertion_ratio(instance: &Instance, i: NodeId, j: NodeId, k: NodeId) -> f64 {
    ratio_with(instance, ratio_epsilon(instance), i, j, k)
}

/// A partial tour with a position index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtour {
    order: Vec<NodeId>,
    position_of: Vec<usize>,
}

impl Subtour {
    pub fn new(node_count: usize, order: Vec<NodeId>) -> Self {
        let mut position_of = vec![ABSENT; node_count];
        for (p, &n) in order.iter().enumerate() {
            position_of[n] = p;
        }
        Self { order, position_of }
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.position_of[node] != ABSENT
    }

    pub fn position(&self, node: NodeId) -> Option<usize> {
        match self.position_of[node] {
            ABSENT => None,
            p => Some(p),
        }
    }

    pub fn arc_count(&self) -> usize {
        self.order.len().saturating_sub(1)
    }

    /// Arc `a` joins positions `a` and `a + 1`.
    pub fn arc(&self, a: usize) -> (NodeId, NodeId) {
        (self.order[a], self.order[a + 1])
    }

    /// Inserts `node` on arc `a`, i.e. at position `a + 1`.
    pub fn insert(&mut self, a: usize, node: NodeId) {
        debug_assert!(!self.contains(node));
        self.order.insert(a + 1, node);
        for p in (a + 1)..self.order.len() {
            self.position_of[self.order[p]] = p;
        }
    }

    /// Arc indices where `k` may be inserted: every arc if `k` has no
    /// parents, none if a parent is missing, otherwise the arcs from the
    /// latest parent onward.
    pub fn feasible_segment(&self, k: NodeId, precedence: &PrecedenceSet) -> Range<usize> {
        let end = self.arc_count();
        let mut start = 0;
        for &p in precedence.parents_of(k) {
            match self.position_of[p] {
                ABSENT => return 0..0,
                pos => start = start.max(pos),
            }
        }
        start..end
    }
}

/// Which way round the initial hull cycle is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Counterclockwise, as the hull is built.
    AsBuilt,
    /// Clockwise.
    Reversed,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::AsBuilt => "ccw",
            Orientation::Reversed => "cw",
        })
    }
}

/// How candidate ratios are found each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Evaluation {
    /// Rescan every candidate against every feasible arc: O(n^3) overall.
    Naive,
    /// Keep each candidate's best arc and only rescan when it is split.
    Incremental,
}

/// How a candidate's arc is chosen within its feasible segment. Candidates
/// are always ranked against each other by ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ArcRule {
    /// Smallest added length `C[i][k] + C[k][j] - C[i][j]`.
    #[default]
    Detour,
    /// Smallest ratio `(C[i][k] + C[k][j]) / C[i][j]`.
    Ratio,
}

impl ArcRule {
    pub fn as_str(self) -> &'static str {
        match self {
            ArcRule::Detour => "detour",
            ArcRule::Ratio => "ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AchciOptions {
    pub evaluation: Evaluation,
    pub arc_rule: ArcRule,
    /// Evaluate candidates and orientations on the rayon pool. Ignored
    /// without the `parallel` feature.
    pub parallel: bool,
}

impl Default for AchciOptions {
    fn default() -> Self {
        Self {
            evaluation: Evaluation::Incremental,
            arc_rule: ArcRule::Detour,
            parallel: true,
        }
    }
}

impl AchciOptions {
    pub fn sequential(evaluation: Evaluation) -> Self {
        Self {
            evaluation,
            parallel: false,
            ..Self::default()
        }
    }

    pub fn with_arc_rule(mut self, arc_rule: ArcRule) -> Self {
        self.arc_rule = arc_rule;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionCandidate {
    pub node: NodeId,
    /// Index of the arc in the subtour at the time of insertion.
    pub arc: usize,
    pub arc_nodes: (NodeId, NodeId),
    pub ratio: f64,
}

/// One construction run with its intermediate state, for inspection.
#[derive(Debug, Clone)]
pub struct AchciRun {
    pub orientation: Orientation,
    /// Hull of the depot and pickup nodes as node ids, in traversal order.
    pub hull: Vec<NodeId>,
    pub depot_inserted: bool,
    /// Subtour after placing and rotating to the depot.
    pub initial: Vec<NodeId>,
    /// Insertions in the order they were made.
    pub steps: Vec<InsertionCandidate>,
    pub tour: Tour,
}

/// Both orientations and the cheaper tour.
#[derive(Debug, Clone)]
pub struct AchciOutcome {
    pub as_built: AchciRun,
    pub reversed: AchciRun,
    pub best: Orientation,
}

impl AchciOutcome {
    pub fn run(&self, orientation: Orientation) -> &AchciRun {
        match orientation {
            Orientation::AsBuilt => &self.as_built,
            Orientation::Reversed => &self.reversed,
        }
    }

    pub fn tour(&self) -> &Tour {
        &self.run(self.best).tour
    }

    pub fn into_tour(self) -> Tour {
        match self.best {
            Orientation::AsBuilt => self.as_built.tour,
            Orientation::Reversed => self.reversed.tour,
        }
    }

    pub fn cost(&self) -> f64 {
        self.tour().cost()
    }
}

/// Hull of the depot and pickups, oriented, as node ids.
fn oriented_hull(instance: &Instance, orientation: Orientation) -> Vec<NodeId> {
    let precedence = instance.precedence();
    let nodes: Vec<NodeId> = std::iter::once(0).chain(precedence.parent_nodes()).collect();
    let points: Vec<Point> = nodes.iter().map(|&n| instance.point(n)).collect();
    let mut hull: Vec<NodeId> = convex_hull(&points)
        .expect("depot is always present")
        .into_iter()
        .map(|i| nodes[i])
        .collect();
    if orientation == Orientation::Reversed {
        hull.reverse();
    }
    hull
}

/// Places the depot on the hull cycle and opens the cycle at it.
fn initial_subtour(instance: &Instance, hull: &[NodeId], eps: f64) -> (Vec<NodeId>, bool) {
    let end = instance.end();
    if let Some(at) = hull.iter().position(|&n| n == 0) {
        let mut order = Vec::with_capacity(hull.len() + 1);
        order.extend_from_slice(&hull[at..]);
        order.extend_from_slice(&hull[..at]);
        order.push(end);
        return (order, false);
    }
    let k = hull.len();
    if k == 1 {
        return (vec![0, hull[0], end], true);
    }
    let mut best = 0;
    let mut best_ratio = f64::INFINITY;
    for t in 0..k {
        let r = ratio_with(instance, eps, hull[t], hull[(t + 1) % k], 0);
        if r < best_ratio {
            best_ratio = r;
            best = t;
        }
    }
    // depot goes between hull[best] and hull[best + 1]
    let mut order = Vec::with_capacity(k + 2);
    order.push(0);
    for step in 1..=k {
        order.push(hull[(best + step) % k]);
    }
    order.push(end);
    (order, true)
}

#[derive(Clone, Copy)]
struct Scorer<'a> {
    instance: &'a Instance,
    eps: f64,
    rule: ArcRule,
}

impl Scorer<'_> {
    #[inline]
    fn arc_key(&self, i: NodeId, j: NodeId, k: NodeId) -> f64 {
        match self.rule {
            ArcRule::Detour => {
                let c = |a, b| self.instance.cost(a, b);
                c(i, k) + c(k, j) - c(i, j)
            }
            ArcRule::Ratio => ratio_with(self.instance, self.eps, i, j, k),
        }
    }

    #[inline]
    fn ratio(&self, i: NodeId, j: NodeId, k: NodeId) -> f64 {
        ratio_with(self.instance, self.eps, i, j, k)
    }

    /// Earliest best arc for `k` within its feasible segment, as
    /// `(arc key, arc index)`.
    fn best_arc(&self, sub: &Subtour, k: NodeId) -> Option<(f64, usize)> {
        let seg = sub.feasible_segment(k, self.instance.precedence());
        let order = sub.order();
        let mut best: Option<(f64, usize)> = None;
        for a in seg {
            let key = self.arc_key(order[a], order[a + 1], k);
            if best.is_none_or(|(b, _)| key < b) {
                best = Some((key, a));
            }
        }
        best
    }
}

fn candidate_less(a: &InsertionCandidate, b: &InsertionCandidate) -> bool {
    a.ratio < b.ratio || (a.ratio == b.ratio && a.node < b.node)
}

fn construct_naive(
    scorer: Scorer<'_>,
    sub: &mut Subtour,
    parallel: bool,
    steps: &mut Vec<InsertionCandidate>,
) -> Result<(), HeuristicError> {
    let end = scorer.instance.end();
    let mut pending: Vec<NodeId> = (1..end).filter(|&n| !sub.contains(n)).collect();
    while !pending.is_empty() {
        let snapshot = &*sub;
        let pick = par::min_by_key(
            parallel,
            &pending,
            |&k| {
                scorer.best_arc(snapshot, k).map(|(_, arc)| {
                    let (i, j) = snapshot.arc(arc);
                    InsertionCandidate {
                        node: k,
                        arc,
                        arc_nodes: (i, j),
                        ratio: scorer.ratio(i, j, k),
                    }
                })
            },
            candidate_less,
        );
        let Some(c) = pick else {
            return Err(HeuristicError::Stuck {
                remaining: pending.len(),
            });
        };
        sub.insert(c.arc, c.node);
        steps.push(c);
        let at = pending.binary_search(&c.node).expect("pending node");
        pending.remove(at);
    }
    Ok(())
}

#[derive(Clone, Copy)]
struct Cached {
    key: f64,
    ratio: f64,
    from: NodeId,
    to: NodeId,
}

fn construct_incremental(
    scorer: Scorer<'_>,
    sub: &mut Subtour,
    steps: &mut Vec<InsertionCandidate>,
) -> Result<(), HeuristicError> {
    let instance = scorer.instance;
    let precedence = instance.precedence();
    let node_count = instance.node_count();
    let mut pending: Vec<NodeId> = (1..instance.end()).filter(|&n| !sub.contains(n)).collect();
    let mut cache: Vec<Option<Cached>> = vec![None; node_count];

    let scan = |sub: &Subtour, k: NodeId| -> Option<Cached> {
        scorer.best_arc(sub, k).map(|(key, a)| {
            let (from, to) = sub.arc(a);
            Cached {
                key,
                ratio: scorer.ratio(from, to, k),
                from,
                to,
            }
        })
    };
    for &k in &pending {
        cache[k] = scan(sub, k);
    }

    while !pending.is_empty() {
        let mut pick: Option<(usize, NodeId, Cached)> = None;
        for (idx, &k) in pending.iter().enumerate() {
            if let Some(c) = cache[k] {
                if pick.is_none_or(|(_, _, b)| c.ratio < b.ratio) {
                    pick = Some((idx, k, c));
                }
            }
        }
        let Some((idx, v, c)) = pick else {
            return Err(HeuristicError::Stuck {
                remaining: pending.len(),
            });
        };
        let arc = sub.position(c.from).expect("cached arc is in the subtour");
        sub.insert(arc, v);
        steps.push(InsertionCandidate {
            node: v,
            arc,
            arc_nodes: (c.from, c.to),
            ratio: c.ratio,
        });
        pending.remove(idx);
        cache[v] = None;

        let (a, b) = (c.from, c.to);
        let pos_a = arc;
        for &k in &pending {
            let Some(cur) = cache[k] else {
                continue;
            };
            if cur.from == a && cur.to == b {
                cache[k] = scan(sub, k);
                continue;
            }
            let start = sub.feasible_segment(k, precedence).start;
            let mut best = cur;
            let mut best_pos = sub.position(cur.from).expect("cached arc is in the subtour");
            for (from, to, pos) in [(a, v, pos_a), (v, b, pos_a + 1)] {
                if pos < start {
                    continue;
                }
                let key = scorer.arc_key(from, to, k);
                if key < best.key || (key == best.key && pos < best_pos) {
                    best = Cached {
                        key,
                        ratio: scorer.ratio(from, to, k),
                        from,
                        to,
                    };
                    best_pos = pos;
                }
            }
            cache[k] = Some(best);
        }
        for &k in precedence.children_of(v) {
            if !sub.contains(k) && cache[k].is_none() {
                cache[k] = scan(sub, k);
            }
        }
    }
    Ok(())
}

fn finish(instance: &Instance, order: Vec<NodeId>) -> Result<Tour, HeuristicError> {
    let report = validate_tour(instance, &order)?;
    if let Some(v) = report.violation {
        return Err(HeuristicError::Infeasible(v.to_string()));
    }
    Ok(Tour::new(instance, order)?)
}

/// Cheapest insertion in one hull orientation, with intermediate state.
pub fn achci_run(
    instance: &Instance,
    orientation: Orientation,
    options: &AchciOptions,
) -> Result<AchciRun, HeuristicError> {
    let eps = ratio_epsilon(instance);
    let scorer = Scorer {
        instance,
        eps,
        rule: options.arc_rule,
    };
    let hull = oriented_hull(instance, orientation);
    let (initial, depot_inserted) = initial_subtour(instance, &hull, eps);
    let mut sub = Subtour::new(instance.node_count(), initial.clone());
    let mut steps = Vec::with_capacity(instance.node_count());
    match options.evaluation {
        Evaluation::Naive => construct_naive(scorer, &mut sub, options.parallel, &mut steps)?,
        Evaluation::Incremental => construct_incremental(scorer, &mut sub, &mut steps)?,
    }
    let tour = finish(instance, sub.order)?;
    Ok(AchciRun {
        orientation,
        hull,
        depot_inserted,
        initial,
        steps,
        tour,
    })
}

pub fn achci_directional(
    instance: &Instance,
    orientation: Orientation,
) -> Result<Tour, HeuristicError> {
    achci_run(instance, orientation, &AchciOptions::default()).map(|r| r.tour)
}

/// Runs both orientations and keeps the cheaper tour (the counterclockwise
/// one on a tie).
pub fn achci_with(instance: &Instance, options: &AchciOptions) -> Result<AchciOutcome, HeuristicError> {
    let (a, r) = par::join(
        options.parallel,
        || achci_run(instance, Orientation::AsBuilt, options),
        || achci_run(instance, Orientation::Reversed, options),
    );
    let (as_built, reversed) = (a?, r?);
    let best = if reversed.tour.cost() < as_built.tour.cost() {
        Orientation::Reversed
    } else {
        Orientation::AsBuilt
    };
    Ok(AchciOutcome {
        as_built,
        reversed,
        best,
    })
}

pub fn achci(instance: &Instance) -> Result<AchciOutcome, HeuristicError> {
    achci_with(instance, &AchciOptions::default())
}

/// Greedy nearest feasible neighbor from the depot.
pub fn nearest_neighbor(instance: &Instance) -> Result<Tour, HeuristicError> {
    let precedence = instance.precedence();
    let end = instance.end();
    let mut missing_parents: Vec<usize> = (0..instance.node_count())
        .map(|n| precedence.parents_of(n).len())
        .collect();
    let mut visited = vec![false; instance.node_count()];
    let mut order = Vec::with_capacity(instance.node_count());
    order.push(0);
    visited[0] = true;
    let mut current = 0;
    for step in 0..instance.location_count() {
        let mut best: Option<(f64, NodeId)> = None;
        for k in 1..end {
            if visited[k] || missing_parents[k] > 0 {
                continue;
            }
            let d = instance.cost(current, k);
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, k));
            }
        }
        let Some((_, next)) = best else {
            return Err(HeuristicError::Stuck {
                remaining: instance.location_count() - step,
            });
        };
        visited[next] = true;
        for &c in precedence.children_of(next) {
            missing_parents[c] -= 1;
        }
        order.push(next);
        current = next;
    }
    order.push(end);
    finish(instance, order)
}
