//! Linearized MILP model of the problem, written as CPLEX LP text.
//!
//! Variables:
//! - `x_i_j` binary, 1 if the tour goes from `i` straight to `j`;
//! - `y_i_m` payload of commodity `m` carried when leaving `i`;
//! - `l_i_j_m` equal to `x_i_j * y_i_m`, enforced with four big-M rows;
//! - `u_i` visit positions, only with sequencing subtour constraints.
//!
//! Payload evolution is written in predecessor form:
//! `y_j_m = q_j_m + sum_i l_i_j_m` for every node `j` after the start depot.
//! Each node has exactly one predecessor, so this is the same as carrying
//! the predecessor's payload forward.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{validate_tour, Instance, ModelError, NodeId, Tour};

/// Largest location count for which every subtour set is written out.
pub const DFJ_NODE_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("{nodes} locations exceed the subtour enumeration cap of {cap}; use sequencing constraints instead")]
    TooManyForDfj { nodes: usize, cap: usize },
    #[error("warm start tour is infeasible: {0}")]
    InfeasibleWarmStart(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SubtourMode {
    /// One `sum x <= |S| - 1` row per location subset `S` with `|S| >= 2`.
    #[default]
    Dfj,
    /// Miller-Tucker-Zemlin position variables.
    Mtz,
}

impl SubtourMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SubtourMode::Dfj => "dfj",
            SubtourMode::Mtz => "mtz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MilpOptions {
    pub subtour: SubtourMode,
    /// Drop the `l` variables whose payload factor is a depot payload.
    pub sparse: bool,
    /// Overrides the big-M constant.
    pub big_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
    Integer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

/// Constraint families, for reporting which kind of row is violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    DepotOut,
    DepotIn,
    NoReturnToStart,
    NoLeavingEnd,
    OutDegree,
    InDegree,
    Flow,
    Subtour,
    Sequencing,
    PayloadInit,
    PayloadEvolution,
    BigM1,
    BigM2,
    BigM3,
    BigM4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    pub fn is_satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// What a substituted assignment got wrong.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Constraint { name: String, family: Family, lhs: f64 },
    Bound { variable: String, value: f64 },
    Integrality { variable: String, value: f64 },
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub name: String,
    pub metric: String,
    pub big_m: f64,
    pub subtour: SubtourMode,
    pub sparse: bool,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
    index: HashMap<String, usize>,
    node_count: usize,
    commodity_count: usize,
}

pub fn x_name(i: NodeId, j: NodeId) -> String {
    format!("x_{i}_{j}")
}

pub fn y_name(i: NodeId, m: usize) -> String {
    format!("y_{i}_{m}")
}

pub fn lambda_name(i: NodeId, j: NodeId, m: usize) -> String {
    format!("l_{i}_{j}_{m}")
}

pub fn u_name(i: NodeId) -> String {
    format!("u_{i}")
}

/// `max(3, 1 + largest total pickup of any commodity)`.
pub fn default_big_m(instance: &Instance) -> f64 {
    let load = instance
        .commodities()
        .iter()
        .map(|c| c.total_pickup())
        .fold(0.0, f64::max);
    (1.0 + load).max(3.0)
}

struct Builder {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, lower: f64, upper: f64) -> usize {
        let id = self.variables.len();
        self.index.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        id
    }

    fn row(&mut self, name: String, family: Family, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint {
            name,
            family,
            terms,
            sense,
            rhs,
        });
    }
}

impl MilpModel {
    pub fn build(instance: &Instance, options: &MilpOptions) -> Result<Self, MilpError> {
        let n = instance.location_count();
        if options.subtour == SubtourMode::Dfj && n > DFJ_NODE_CAP {
            return Err(MilpError::TooManyForDfj {
                nodes: n,
                cap: DFJ_NODE_CAP,
            });
        }
        let nodes = instance.node_count();
        let end = instance.end();
        let hm = instance.commodities().len();
        let big_m = options.big_m.unwrap_or_else(|| default_big_m(instance));
        let mut b = Builder {
            variables: Vec::new(),
            index: HashMap::new(),
            constraints: Vec::new(),
        };

        let mut x = vec![usize::MAX; nodes * nodes];
        let mut objective = Vec::new();
        for i in 0..nodes {
            for j in 0..nodes {
                if i != j {
                    let v = b.var(x_name(i, j), VarKind::Binary, 0.0, 1.0);
                    x[i * nodes + j] = v;
                    objective.push((v, instance.cost(i, j)));
                }
            }
        }
        let xv = |i: usize, j: usize| x[i * nodes + j];
        let mut y = vec![usize::MAX; nodes * hm];
        for i in 0..nodes {
            for m in 0..hm {
                y[i * hm + m] = b.var(y_name(i, m), VarKind::Continuous, 0.0, f64::INFINITY);
            }
        }
        let yv = |i: usize, m: usize| y[i * hm + m];
        let keep_lambda = |i: usize| !(options.sparse && (i == 0 || i == end));
        let mut lambda = vec![usize::MAX; nodes * nodes * hm];
        for i in 0..nodes {
            if !keep_lambda(i) {
                continue;
            }
            for j in 0..nodes {
                if i == j {
                    continue;
                }
                for m in 0..hm {
                    lambda[(i * nodes + j) * hm + m] = b.var(
                        lambda_name(i, j, m),
                        VarKind::Continuous,
                        f64::NEG_INFINITY,
                        f64::INFINITY,
                    );
                }
            }
        }

        // depot rows
        b.row(
            "depot_out".into(),
            Family::DepotOut,
            (1..nodes).map(|j| (xv(0, j), 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
        b.row(
            "depot_in".into(),
            Family::DepotIn,
            (0..end).map(|i| (xv(i, end), 1.0)).collect(),
            Sense::Eq,
            1.0,
        );
        b.row(
            "no_return_start".into(),
            Family::NoReturnToStart,
            (1..nodes).map(|i| (xv(i, 0), 1.0)).collect(),
            Sense::Eq,
            0.0,
        );
        b.row(
            "no_leave_end".into(),
            Family::NoLeavingEnd,
            (0..end).map(|j| (xv(end, j), 1.0)).collect(),
            Sense::Eq,
            0.0,
        );

        for k in 1..end {
            let others = (0..nodes).filter(|&o| o != k);
            b.row(
                format!("out_{k}"),
                Family::OutDegree,
                others.clone().map(|j| (xv(k, j), 1.0)).collect(),
                Sense::Eq,
                1.0,
            );
            b.row(
                format!("in_{k}"),
                Family::InDegree,
                others.clone().map(|i| (xv(i, k), 1.0)).collect(),
                Sense::Eq,
                1.0,
            );
            let mut flow: Vec<(usize, f64)> = others.clone().map(|i| (xv(i, k), 1.0)).collect();
            flow.extend(others.map(|j| (xv(k, j), -1.0)));
            b.row(format!("flow_{k}"), Family::Flow, flow, Sense::Eq, 0.0);
        }

        match options.subtour {
            SubtourMode::Dfj => {
                for mask in 1u32..(1u32 << n) {
                    let size = mask.count_ones() as usize;
                    if size < 2 {
                        continue;
                    }
                    let members: Vec<usize> = (1..=n).filter(|&k| mask & (1 << (k - 1)) != 0).collect();
                    let mut terms = Vec::with_capacity(size * (size - 1));
                    for &i in &members {
                        for &j in &members {
                            if i != j {
                                terms.push((xv(i, j), 1.0));
                            }
                        }
                    }
                    b.row(format!("sub_{mask}"), Family::Subtour, terms, Sense::Le, (size - 1) as f64);
                }
            }
            SubtourMode::Mtz => {
                let u: Vec<usize> = (0..nodes)
                    .map(|k| {
                        if (1..end).contains(&k) {
                            b.var(u_name(k), VarKind::Continuous, 1.0, n as f64)
                        } else {
                            usize::MAX
                        }
                    })
                    .collect();
                for i in 1..end {
                    for j in 1..end {
                        if i != j {
                            b.row(
                                format!("seq_{i}_{j}"),
                                Family::Sequencing,
                                vec![(u[i], 1.0), (u[j], -1.0), (xv(i, j), n as f64)],
                                Sense::Le,
                                (n - 1) as f64,
                            );
                        }
                    }
                }
            }
        }

        for m in 0..hm {
            b.row(format!("init_{m}"), Family::PayloadInit, vec![(yv(0, m), 1.0)], Sense::Eq, 0.0);
        }
        for j in 1..nodes {
            for (m, c) in instance.commodities().iter().enumerate() {
                let mut terms = vec![(yv(j, m), 1.0)];
                for i in 0..nodes {
                    if i != j && keep_lambda(i) {
                        terms.push((lambda[(i * nodes + j) * hm + m], -1.0));
                    }
                }
                b.row(format!("evo_{j}_{m}"), Family::PayloadEvolution, terms, Sense::Eq, c.payload_at(j));
            }
        }

        for i in 0..nodes {
            if !keep_lambda(i) {
                continue;
            }
            for j in 0..nodes {
                if i == j {
                    continue;
                }
                for m in 0..hm {
                    let l = lambda[(i * nodes + j) * hm + m];
                    let (xij, yim) = (xv(i, j), yv(i, m));
                    b.row(
                        format!("m1_{i}_{j}_{m}"),
                        Family::BigM1,
                        vec![(l, 1.0), (yim, -1.0), (xij, big_m)],
                        Sense::Le,
                        big_m,
                    );
                    b.row(
                        format!("m2_{i}_{j}_{m}"),
                        Family::BigM2,
                        vec![(l, 1.0), (yim, -1.0), (xij, -big_m)],
                        Sense::Ge,
                        -big_m,
                    );
                    b.row(
                        format!("m3_{i}_{j}_{m}"),
                        Family::BigM3,
                        vec![(l, 1.0), (xij, -big_m)],
                        Sense::Le,
                        0.0,
                    );
                    b.row(
                        format!("m4_{i}_{j}_{m}"),
                        Family::BigM4,
                        vec![(l, 1.0), (xij, big_m)],
                        Sense::Ge,
                        0.0,
                    );
                }
            }
        }

        Ok(Self {
            name: instance.name().to_string(),
            metric: instance.metric().to_string(),
            big_m,
            subtour: options.subtour,
            sparse: options.sparse,
            variables: b.variables,
            objective,
            constraints: b.constraints,
            index: b.index,
            node_count: nodes,
            commodity_count: hm,
        })
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Values of every variable for a fixed node order. Payloads are
    /// simulated along the order, so an order that breaks precedence gets
    /// negative payloads rather than an error.
    pub fn assignment_for_order(&self, instance: &Instance, order: &[NodeId]) -> Vec<f64> {
        debug_assert_eq!(instance.node_count(), self.node_count);
        let mut values = vec![0.0; self.variables.len()];
        let hm = self.commodity_count;
        let mut payload = vec![0.0; hm];
        let mut set = |name: String, v: f64| {
            if let Some(&id) = self.index.get(&name) {
                values[id] = v;
            }
        };
        for (pos, &node) in order.iter().enumerate() {
            for &(m, q) in instance.payloads_at(node) {
                payload[m] += q;
            }
            for (m, &p) in payload.iter().enumerate() {
                set(y_name(node, m), p);
            }
            if let Some(&next) = order.get(pos + 1) {
                set(x_name(node, next), 1.0);
                for (m, &p) in payload.iter().enumerate() {
                    set(lambda_name(node, next, m), p);
                }
            }
            set(u_name(node), pos as f64);
        }
        values
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Every bound, integrality or row violation of `values`.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        for (v, var) in self.variables.iter().enumerate() {
            let val = values[v];
            if val < var.lower - tol || val > var.upper + tol {
                out.push(Violation::Bound {
                    variable: var.name.clone(),
                    value: val,
                });
            }
            if var.kind != VarKind::Continuous && (val - val.round()).abs() > tol {
                out.push(Violation::Integrality {
                    variable: var.name.clone(),
                    value: val,
                });
            }
        }
        for c in &self.constraints {
            if !c.is_satisfied(values, tol) {
                out.push(Violation::Constraint {
                    name: c.name.clone(),
                    family: c.family,
                    lhs: c.lhs(values),
                });
            }
        }
        out
    }

    pub fn is_satisfied_by(&self, values: &[f64], tol: f64) -> bool {
        let vars_ok = self.variables.iter().zip(values).all(|(var, &val)| {
            val >= var.lower - tol
                && val <= var.upper + tol
                && (var.kind == VarKind::Continuous || (val - val.round()).abs() <= tol)
        });
        vars_ok && self.constraints.iter().all(|c| c.is_satisfied(values, tol))
    }

    /// CPLEX LP text of the model.
    pub fn to_lp(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ tsppc model {}", self.name);
        let _ = writeln!(s, "\\ metric {}", self.metric);
        let _ = writeln!(s, "\\ big_m {}", self.big_m);
        let _ = writeln!(s, "\\ subtour {}", self.subtour.as_str());
        let _ = writeln!(s, "\\ lambda {}", if self.sparse { "sparse" } else { "full" });
        if self.subtour == SubtourMode::Mtz {
            let _ = writeln!(s, "\\ subtour sets replaced by sequencing constraints");
        }
        s.push_str("Minimize\n obj:");
        self.write_terms(&mut s, &self.objective);
        s.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(s, " {}:", c.name);
            self.write_terms(&mut s, &c.terms);
            let _ = writeln!(s, " {} {}", c.sense.as_str(), Num(c.rhs));
        }
        s.push_str("Bounds\n");
        for v in &self.variables {
            if v.kind == VarKind::Binary {
                continue;
            }
            match (v.lower, v.upper) {
                (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => {
                    let _ = writeln!(s, " {} free", v.name);
                }
                (l, u) if l == 0.0 && u == f64::INFINITY => {}
                (l, u) if u == f64::INFINITY => {
                    let _ = writeln!(s, " {} >= {}", v.name, Num(l));
                }
                (l, u) => {
                    let _ = writeln!(s, " {} <= {} <= {}", Num(l), v.name, Num(u));
                }
            }
        }
        s.push_str("Binaries\n");
        let mut col = 0;
        for v in self.variables.iter().filter(|v| v.kind == VarKind::Binary) {
            let _ = write!(s, " {}", v.name);
            col += 1;
            if col % 10 == 0 {
                s.push('\n');
            }
        }
        if col % 10 != 0 {
            s.push('\n');
        }
        if self.variables.iter().any(|v| v.kind == VarKind::Integer) {
            s.push_str("General\n");
            for v in self.variables.iter().filter(|v| v.kind == VarKind::Integer) {
                let _ = writeln!(s, " {}", v.name);
            }
        }
        s.push_str("End\n");
        s
    }

    fn write_terms(&self, s: &mut String, terms: &[(usize, f64)]) {
        for (k, &(v, a)) in terms.iter().enumerate() {
            if k > 0 && k % 8 == 0 {
                s.push_str("\n   ");
            }
            let sign = if a < 0.0 { '-' } else { '+' };
            let mag = a.abs();
            if mag == 1.0 {
                let _ = write!(s, " {sign} {}", self.variables[v].name);
            } else {
                let _ = write!(s, " {sign} {} {}", Num(mag), self.variables[v].name);
            }
        }
        if terms.is_empty() {
            s.push_str(" 0");
        }
    }

    /// MIP start in the plain `name value` format, nonzero values only.
    pub fn to_mst(&self, values: &[f64]) -> String {
        let mut s = String::from("# MIP start\n");
        for (v, var) in self.variables.iter().enumerate() {
            if values[v] != 0.0 {
                let _ = writeln!(s, "{} {}", var.name, Num(values[v]));
            }
        }
        s
    }
}

/// Shortest round-trip decimal.
struct Num(f64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == self.0.trunc() && self.0.abs() < 1e15 {
            write!(f, "{}", self.0 as i64)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct MilpExport {
    pub model: MilpModel,
    pub lp: String,
    pub warm_start: Option<String>,
}

/// Builds the model and, given a feasible tour, its MIP start.
pub fn export_milp(
    instance: &Instance,
    warm_start: Option<&Tour>,
    options: &MilpOptions,
) -> Result<MilpExport, MilpError> {
    let start = match warm_start {
        Some(t) => {
            let report = validate_tour(instance, t.order())?;
            if let Some(v) = report.violation {
                return Err(MilpError::InfeasibleWarmStart(v.to_string()));
            }
            Some(t)
        }
        None => None,
    };
    let model = MilpModel::build(instance, options)?;
    let lp = model.to_lp();
    let warm_start = start.map(|t| model.to_mst(&model.assignment_for_order(instance, t.order())));
    Ok(MilpExport {
        model,
        lp,
        warm_start,
    })
}
