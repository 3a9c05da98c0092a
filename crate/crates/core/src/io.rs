//! Text formats: TSPLIB point clouds, the `.tsppc` instance extension and
//! tour documents.
//!
//! All formats are line-oriented, whitespace-delimited and use `.` as the
//! decimal separator regardless of locale. Keyword lines are `KEY : VALUE`.
//! Floats are written with Rust's shortest round-trip formatting, so
//! `read_instance(write_instance(x)) == x` bit for bit.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::generator::Direction;
use crate::model::{Commodity, Instance, Metric, ModelError, NodeId, Point, Tour};

/// Version written to and expected in `.tsppc` headers.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based; 0 when the problem is not tied to a line (e.g. a missing
    /// section at end of input).
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("unsupported EDGE_WEIGHT_TYPE `{0}` (only EUC_2D is supported)")]
    UnsupportedEdgeWeightType(String),
    #[error("unsupported TYPE `{0}`")]
    UnsupportedType(String),
    #[error("malformed line `{0}`")]
    Malformed(String),
    #[error("DIMENSION is {expected} but {found} coordinate records were found")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("format version {found} is not supported (expected {FORMAT_VERSION})")]
    VersionMismatch { found: String },
    #[error("node {node} is out of range (instance has nodes 0..={max})")]
    NodeOutOfRange { node: i64, max: usize },
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Coordinates of a TSPLIB `EUC_2D` problem, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct TsplibPointCloud {
    pub name: String,
    pub dimension: usize,
    pub coords: Vec<Point>,
    /// The node id given in the file for each coordinate record.
    pub ids: Vec<usize>,
}

enum Line<'a> {
    Blank,
    Keyword { key: String, value: &'a str },
    Data(&'a str),
}

fn classify(raw: &str) -> Line<'_> {
    let t = raw.trim();
    if t.is_empty() {
        return Line::Blank;
    }
    let first = t.as_bytes()[0];
    if first.is_ascii_digit() || first == b'-' || first == b'+' || first == b'.' {
        return Line::Data(t);
    }
    let (key, value) = match t.find(':') {
        Some(pos) => (&t[..pos], t[pos + 1..].trim()),
        None => match t.find(char::is_whitespace) {
            Some(pos) => (&t[..pos], t[pos..].trim()),
            None => (t, ""),
        },
    };
    Line::Keyword {
        key: key.trim().to_ascii_uppercase(),
        value,
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, raw: &str) -> Result<T, ParseError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| err(line, ParseErrorKind::Malformed(raw.trim().to_string())))
}

fn parse_coord(tok: Option<&str>, line: usize, raw: &str) -> Result<f64, ParseError> {
    let v: f64 = parse_num(tok, line, raw)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(err(line, ParseErrorKind::Malformed(raw.trim().to_string())))
    }
}

/// Parses a TSPLIB `TYPE: TSP` / `EDGE_WEIGHT_TYPE: EUC_2D` document.
///
/// Header keywords that do not affect geometry (`COMMENT`, `DISPLAY_DATA_TYPE`,
/// ...) are accepted and ignored.
pub fn parse_tsplib(text: &str) -> Result<TsplibPointCloud, ParseError> {
    let mut name = None;
    let mut dimension: Option<usize> = None;
    let mut edge_type: Option<String> = None;
    let mut coords = Vec::new();
    let mut ids = Vec::new();
    let mut in_coords = false;
    let mut saw_coords = false;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        match classify(raw) {
            Line::Blank => {}
            Line::Data(d) => {
                if !in_coords {
                    return Err(err(line, ParseErrorKind::Malformed(d.to_string())));
                }
                let mut tok = d.split_whitespace();
                let id: usize = parse_num(tok.next(), line, raw)?;
                let x = parse_coord(tok.next(), line, raw)?;
                let y = parse_coord(tok.next(), line, raw)?;
                if tok.next().is_some() {
                    return Err(err(line, ParseErrorKind::Malformed(d.to_string())));
                }
                ids.push(id);
                coords.push(Point::new(x, y));
            }
            Line::Keyword { key, value } => {
                in_coords = false;
                match key.as_str() {
                    "NAME" => name = Some(value.to_string()),
                    "TYPE" => {
                        let t = value.to_ascii_uppercase();
                        if t != "TSP" {
                            return Err(err(line, ParseErrorKind::UnsupportedType(value.to_string())));
                        }
                    }
                    "DIMENSION" => dimension = Some(parse_num(Some(value), line, raw)?),
                    "EDGE_WEIGHT_TYPE" => {
                        let t = value.to_ascii_uppercase();
                        if t != "EUC_2D" {
                            return Err(err(
                                line,
                                ParseErrorKind::UnsupportedEdgeWeightType(value.to_string()),
                            ));
                        }
                        edge_type = Some(t);
                    }
                    "NODE_COORD_SECTION" => {
                        in_coords = true;
                        saw_coords = true;
                    }
                    "EOF" => break,
                    k if k.ends_with("_SECTION") => {
                        return Err(err(line, ParseErrorKind::UnknownSection(k.to_string())))
                    }
                    _ => {}
                }
            }
        }
    }

    let end = last_line;
    let dimension = dimension.ok_or_else(|| err(end, ParseErrorKind::Missing("DIMENSION")))?;
    if edge_type.is_none() {
        return Err(err(end, ParseErrorKind::Missing("EDGE_WEIGHT_TYPE")));
    }
    if !saw_coords {
        return Err(err(end, ParseErrorKind::Missing("NODE_COORD_SECTION")));
    }
    if coords.len() != dimension {
        return Err(err(
            end,
            ParseErrorKind::DimensionMismatch {
                expected: dimension,
                found: coords.len(),
            },
        ));
    }
    Ok(TsplibPointCloud {
        name: name.unwrap_or_default(),
        dimension,
        coords,
        ids,
    })
}

/// Where an instance came from. All fields are optional for hand-written
/// instances.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub source: Option<String>,
    pub direction: Option<Direction>,
    /// TSPLIB id of nodes `0..=N` (the end depot shares node 0's id).
    pub source_ids: Option<Vec<usize>>,
}

/// An instance together with its provenance header.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub instance: Instance,
    pub provenance: Provenance,
}

impl InstanceFile {
    pub fn new(instance: Instance, provenance: Provenance) -> Self {
        Self {
            instance,
            provenance,
        }
    }
}

impl From<Instance> for InstanceFile {
    fn from(instance: Instance) -> Self {
        Self::new(instance, Provenance::default())
    }
}

/// Serializes an instance as a `.tsppc` document.
///
/// Coordinates are listed for nodes `0..=N`; the end depot `N + 1` is
/// implied by `DEPOT_SECTION`.
pub fn write_instance(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let prov = &file.provenance;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "NAME : {}", inst.name());
    let _ = writeln!(w, "TYPE : TSPPC");
    let _ = writeln!(w, "FORMAT_VERSION : {FORMAT_VERSION}");
    if let Some(source) = &prov.source {
        let _ = writeln!(w, "SOURCE : {source}");
    }
    if let Some(direction) = prov.direction {
        let _ = writeln!(w, "DIRECTION : {direction}");
    }
    let _ = writeln!(w, "METRIC : {}", inst.metric());
    let _ = writeln!(w, "DIMENSION : {}", inst.location_count() + 1);
    let _ = writeln!(w, "COMMODITIES : {}", inst.commodities().len());
    let _ = writeln!(w, "NODE_COORD_SECTION");
    for (i, p) in inst.points()[..inst.end()].iter().enumerate() {
        let _ = writeln!(w, "{i} {} {}", p.x, p.y);
    }
    let _ = writeln!(w, "DEPOT_SECTION\n0\n-1");
    let _ = writeln!(w, "PRECEDENCE_SECTION");
    for (p, c) in inst.precedence().pairs() {
        let _ = writeln!(w, "{p} {c}");
    }
    let _ = writeln!(w, "-1");
    let _ = writeln!(w, "PAYLOAD_SECTION");
    for c in inst.commodities() {
        for (node, q) in &c.payloads {
            let _ = writeln!(w, "{node} {} {q}", c.id);
        }
    }
    let _ = writeln!(w, "-1");
    if let Some(ids) = &prov.source_ids {
        let _ = writeln!(w, "SOURCE_ID_SECTION");
        for (node, id) in ids.iter().enumerate() {
            let _ = writeln!(w, "{node} {id}");
        }
        let _ = writeln!(w, "-1");
    }
    let _ = writeln!(w, "EOF");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Coords,
    Depot,
    Precedence,
    Payload,
    SourceIds,
}

/// Parses a `.tsppc` document written by [`write_instance`].
pub fn read_instance(text: &str) -> Result<InstanceFile, ParseError> {
    let mut name = String::new();
    let mut version = None;
    let mut metric = None;
    let mut dimension: Option<usize> = None;
    let mut prov = Provenance::default();
    let mut coords: Vec<(i64, Point, usize)> = Vec::new();
    let mut depots: Vec<(i64, usize)> = Vec::new();
    let mut precedence: Vec<(i64, i64, usize)> = Vec::new();
    let mut payloads: Vec<(i64, usize, f64, usize)> = Vec::new();
    let mut source_ids: Vec<(i64, usize, usize)> = Vec::new();
    let mut section = Section::None;
    let mut last_line = 0;
    let mut saw_eof = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        match classify(raw) {
            Line::Blank => {}
            Line::Data(d) => {
                let mut tok = d.split_whitespace();
                let first: i64 = parse_num(tok.next(), line, raw)?;
                if first == -1 && section != Section::Coords {
                    section = Section::None;
                    continue;
                }
                match section {
                    Section::None => {
                        return Err(err(line, ParseErrorKind::Malformed(d.to_string())))
                    }
                    Section::Coords => {
                        let x = parse_coord(tok.next(), line, raw)?;
                        let y = parse_coord(tok.next(), line, raw)?;
                        coords.push((first, Point::new(x, y), line));
                    }
                    Section::Depot => depots.push((first, line)),
                    Section::Precedence => {
                        let child: i64 = parse_num(tok.next(), line, raw)?;
                        precedence.push((first, child, line));
                    }
                    Section::Payload => {
                        let commodity: usize = parse_num(tok.next(), line, raw)?;
                        let q: f64 = parse_coord(tok.next(), line, raw)?;
                        payloads.push((first, commodity, q, line));
                    }
                    Section::SourceIds => {
                        let id: usize = parse_num(tok.next(), line, raw)?;
                        source_ids.push((first, id, line));
                    }
                }
                if tok.next().is_some() {
                    return Err(err(line, ParseErrorKind::Malformed(d.to_string())));
                }
            }
            Line::Keyword { key, value } => {
                section = Section::None;
                match key.as_str() {
                    "NAME" => name = value.to_string(),
                    "TYPE" => {
                        if !value.eq_ignore_ascii_case("TSPPC") {
                            return Err(err(line, ParseErrorKind::UnsupportedType(value.to_string())));
                        }
                    }
                    "FORMAT_VERSION" => {
                        if value.parse::<u32>().ok() != Some(FORMAT_VERSION) {
                            return Err(err(
                                line,
                                ParseErrorKind::VersionMismatch {
                                    found: value.to_string(),
                                },
                            ));
                        }
                        version = Some(FORMAT_VERSION);
                    }
                    "SOURCE" => prov.source = Some(value.to_string()),
                    "DIRECTION" => {
                        prov.direction = Some(value.parse().map_err(|_| {
                            err(line, ParseErrorKind::Malformed(raw.trim().to_string()))
                        })?)
                    }
                    "METRIC" => {
                        metric = Some(
                            value
                                .parse::<Metric>()
                                .map_err(|e| err(line, ParseErrorKind::Model(e)))?,
                        )
                    }
                    "DIMENSION" => dimension = Some(parse_num(Some(value), line, raw)?),
                    "COMMODITIES" | "COMMENT" => {}
                    "NODE_COORD_SECTION" => section = Section::Coords,
                    "DEPOT_SECTION" => section = Section::Depot,
                    "PRECEDENCE_SECTION" => section = Section::Precedence,
                    "PAYLOAD_SECTION" => section = Section::Payload,
                    "SOURCE_ID_SECTION" => section = Section::SourceIds,
                    "EOF" => {
                        saw_eof = true;
                        break;
                    }
                    k => return Err(err(line, ParseErrorKind::UnknownSection(k.to_string()))),
                }
            }
        }
    }
    let end_line = last_line;
    if !saw_eof {
        return Err(err(end_line, ParseErrorKind::Missing("EOF")));
    }
    if version.is_none() {
        return Err(err(end_line, ParseErrorKind::Missing("FORMAT_VERSION")));
    }
    let metric = metric.ok_or_else(|| err(end_line, ParseErrorKind::Missing("METRIC")))?;
    let dimension = dimension.ok_or_else(|| err(end_line, ParseErrorKind::Missing("DIMENSION")))?;
    if coords.len() != dimension {
        return Err(err(
            end_line,
            ParseErrorKind::DimensionMismatch {
                expected: dimension,
                found: coords.len(),
            },
        ));
    }
    if dimension == 0 {
        return Err(err(end_line, ParseErrorKind::Missing("depot coordinates")));
    }
    // node ids 0..dimension-1 as written, plus the implicit end depot
    let max = dimension;
    let check = |node: i64, line: usize| -> Result<NodeId, ParseError> {
        if node < 0 || node as usize > max {
            Err(err(line, ParseErrorKind::NodeOutOfRange { node, max }))
        } else {
            Ok(node as NodeId)
        }
    };

    let mut points = vec![None; dimension];
    for &(id, p, line) in &coords {
        let node = check(id, line)?;
        if node == dimension || points[node].is_some() {
            return Err(err(line, ParseErrorKind::Inconsistent(format!("coordinate record for node {id}"))));
        }
        points[node] = Some(p);
    }
    let points: Vec<Point> = points.into_iter().map(|p| p.expect("all nodes assigned")).collect();

    match depots.as_slice() {
        [(0, _)] => {}
        [] => return Err(err(end_line, ParseErrorKind::Missing("DEPOT_SECTION"))),
        [(other, line), ..] => {
            return Err(err(
                *line,
                ParseErrorKind::Inconsistent(format!("depot must be node 0, found {other}")),
            ))
        }
    }

    let mut commodities: Vec<Commodity> = Vec::new();
    for &(node, id, q, line) in &payloads {
        let node = check(node, line)?;
        match commodities.iter_mut().find(|c| c.id == id) {
            Some(c) => c.payloads.push((node, q)),
            None => commodities.push(Commodity::new(id, vec![(node, q)])),
        }
    }

    let depot = points[0];
    let locations = points[1..].to_vec();
    let instance = Instance::new(name, depot, locations, commodities, metric)
        .map_err(|e| err(end_line, ParseErrorKind::Model(e)))?;

    let mut listed = Vec::with_capacity(precedence.len());
    for &(p, c, line) in &precedence {
        listed.push((check(p, line)?, check(c, line)?));
    }
    listed.sort_unstable();
    let derived = instance.precedence().pairs();
    if listed != derived {
        return Err(err(
            end_line,
            ParseErrorKind::Inconsistent(
                "PRECEDENCE_SECTION does not match the pickups and deliveries in PAYLOAD_SECTION".into(),
            ),
        ));
    }

    if !source_ids.is_empty() {
        let mut ids = vec![None; dimension];
        for &(node, id, line) in &source_ids {
            let node = check(node, line)?;
            if node == dimension || ids[node].is_some() {
                return Err(err(line, ParseErrorKind::Inconsistent(format!("source id for node {node}"))));
            }
            ids[node] = Some(id);
        }
        if ids.iter().any(Option::is_none) {
            return Err(err(end_line, ParseErrorKind::Inconsistent("SOURCE_ID_SECTION is incomplete".into())));
        }
        prov.source_ids = Some(ids.into_iter().flatten().collect());
    }

    Ok(InstanceFile {
        instance,
        provenance: prov,
    })
}

/// A parsed tour document.
#[derive(Debug, Clone, PartialEq)]
pub struct TourDocument {
    pub name: String,
    pub order: Vec<NodeId>,
    pub cost: Option<f64>,
    pub metric: Option<Metric>,
    pub heuristic: Option<String>,
    pub instance: Option<String>,
}

/// Writes a TSPLIB `TOUR` document listing every node from the start depot
/// to the end depot, with cost, metric and heuristic in comment lines.
pub fn write_tour(tour: &Tour, instance: &Instance, heuristic: &str) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "NAME : {}.{heuristic}.tour", instance.name());
    let _ = writeln!(w, "TYPE : TOUR");
    let _ = writeln!(w, "COMMENT : instance = {}", instance.name());
    let _ = writeln!(w, "COMMENT : heuristic = {heuristic}");
    let _ = writeln!(w, "COMMENT : metric = {}", instance.metric());
    let _ = writeln!(w, "COMMENT : cost = {}", tour.cost());
    let _ = writeln!(w, "DIMENSION : {}", tour.len());
    let _ = writeln!(w, "TOUR_SECTION");
    for node in tour.order() {
        let _ = writeln!(w, "{node}");
    }
    let _ = writeln!(w, "-1\nEOF");
    out
}

pub fn parse_tour(text: &str) -> Result<TourDocument, ParseError> {
    let mut doc = TourDocument {
        name: String::new(),
        order: Vec::new(),
        cost: None,
        metric: None,
        heuristic: None,
        instance: None,
    };
    let mut dimension: Option<usize> = None;
    let mut in_tour = false;
    let mut saw_section = false;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        match classify(raw) {
            Line::Blank => {}
            Line::Data(d) => {
                if !in_tour {
                    return Err(err(line, ParseErrorKind::Malformed(d.to_string())));
                }
                for tok in d.split_whitespace() {
                    let v: i64 = parse_num(Some(tok), line, raw)?;
                    if v == -1 {
                        in_tour = false;
                        break;
                    }
                    if v < 0 {
                        return Err(err(line, ParseErrorKind::Malformed(d.to_string())));
                    }
                    doc.order.push(v as NodeId);
                }
            }
            Line::Keyword { key, value } => {
                in_tour = false;
                match key.as_str() {
                    "NAME" => doc.name = value.to_string(),
                    "TYPE" => {
                        if !value.eq_ignore_ascii_case("TOUR") {
                            return Err(err(line, ParseErrorKind::UnsupportedType(value.to_string())));
                        }
                    }
                    "COMMENT" => {
                        if let Some((k, v)) = value.split_once('=') {
                            let v = v.trim();
                            match k.trim() {
                                "cost" => doc.cost = v.parse().ok(),
                                "metric" => doc.metric = v.parse().ok(),
                                "heuristic" => doc.heuristic = Some(v.to_string()),
                                "instance" => doc.instance = Some(v.to_string()),
                                _ => {}
                            }
                        }
                    }
                    "DIMENSION" => dimension = Some(parse_num(Some(value), line, raw)?),
                    "TOUR_SECTION" => {
                        in_tour = true;
                        saw_section = true;
                    }
                    "EOF" => break,
                    k => return Err(err(line, ParseErrorKind::UnknownSection(k.to_string()))),
                }
            }
        }
    }
    if !saw_section {
        return Err(err(last_line, ParseErrorKind::Missing("TOUR_SECTION")));
    }
    if let Some(expected) = dimension {
        if expected != doc.order.len() {
            return Err(err(
                last_line,
                ParseErrorKind::DimensionMismatch {
                    expected,
                    found: doc.order.len(),
                },
            ));
        }
    }
    Ok(doc)
}

/// `1.23e+04`-style rendering with three significant figures.
pub struct Sci3(pub f64);

impl fmt::Display for Sci3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:.2e}", self.0);
        match s.split_once('e') {
            Some((mantissa, exp)) => {
                let e: i32 = exp.parse().unwrap_or(0);
                let sign = if e < 0 { '-' } else { '+' };
                write!(f, "{mantissa}e{sign}{:02}", e.abs())
            }
            None => f.write_str(&s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "NAME : tiny\nTYPE : TSP\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 3 4\n3 6.5 -1e2\nEOF\n";

    #[test]
    fn minimal_document() {
        let c = parse_tsplib(MINIMAL).unwrap();
        assert_eq!(c.name, "tiny");
        assert_eq!(c.dimension, 3);
        assert_eq!(
            c.coords,
            vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0), Point::new(6.5, -100.0)]
        );
        assert_eq!(c.ids, vec![1, 2, 3]);
    }

    #[test]
    fn keyword_without_spaces_and_missing_eof() {
        let c = parse_tsplib("NAME: a\nTYPE: TSP\nDIMENSION: 1\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n1 1 1\n").unwrap();
        assert_eq!(c.coords.len(), 1);
    }

    #[test]
    fn dimension_mismatch() {
        let text = "NAME : x\nDIMENSION : 5\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n2 1 0\n3 2 0\n4 3 0\nEOF\n";
        let e = parse_tsplib(text).unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::DimensionMismatch {
                expected: 5,
                found: 4
            }
        );
    }

    #[test]
    fn distinct_parse_errors() {
        let geo = "NAME : x\nDIMENSION : 1\nEDGE_WEIGHT_TYPE : GEO\nNODE_COORD_SECTION\n1 0 0\n";
        assert!(matches!(
            parse_tsplib(geo).unwrap_err(),
            ParseError {
                line: 3,
                kind: ParseErrorKind::UnsupportedEdgeWeightType(_)
            }
        ));
        let bad = "NAME : x\nDIMENSION : 1\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 zero\n";
        assert!(matches!(
            parse_tsplib(bad).unwrap_err(),
            ParseError {
                line: 5,
                kind: ParseErrorKind::Malformed(_)
            }
        ));
        let nosec = "NAME : x\nDIMENSION : 1\nEDGE_WEIGHT_TYPE : EUC_2D\n";
        assert_eq!(
            parse_tsplib(nosec).unwrap_err().kind,
            ParseErrorKind::Missing("NODE_COORD_SECTION")
        );
        let nodim = "NAME : x\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n";
        assert_eq!(parse_tsplib(nodim).unwrap_err().kind, ParseErrorKind::Missing("DIMENSION"));
        let explicit = "NAME : x\nDIMENSION : 1\nEDGE_WEIGHT_TYPE : EUC_2D\nEDGE_WEIGHT_SECTION\n0\n";
        assert!(matches!(
            parse_tsplib(explicit).unwrap_err().kind,
            ParseErrorKind::UnknownSection(_)
        ));
    }

    fn one_task() -> Instance {
        Instance::new(
            "one",
            Point::new(0.0, 0.0),
            vec![Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            vec![Commodity::new(0, vec![(1, 1.0), (2, -1.0)])],
            Metric::Euc2dRounded,
        )
        .unwrap()
    }

    #[test]
    fn one_task_round_trip() {
        let file = InstanceFile::from(one_task());
        let text = write_instance(&file);
        let section: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "PRECEDENCE_SECTION")
            .skip(1)
            .take_while(|l| *l != "-1")
            .collect();
        assert_eq!(section, vec!["1 2"]);
        assert_eq!(read_instance(&text).unwrap(), file);
    }

    #[test]
    fn precedence_out_of_range_is_rejected() {
        let text = write_instance(&InstanceFile::from(one_task()))
            .replace("PRECEDENCE_SECTION\n1 2\n", "PRECEDENCE_SECTION\n1 999\n");
        assert!(matches!(
            read_instance(&text).unwrap_err().kind,
            ParseErrorKind::NodeOutOfRange { node: 999, .. }
        ));
    }

    #[test]
    fn precedence_must_match_payloads() {
        let text = write_instance(&InstanceFile::from(one_task()))
            .replace("PRECEDENCE_SECTION\n1 2\n", "PRECEDENCE_SECTION\n2 1\n");
        assert!(matches!(
            read_instance(&text).unwrap_err().kind,
            ParseErrorKind::Inconsistent(_)
        ));
    }

    #[test]
    fn version_and_section_errors() {
        let base = write_instance(&InstanceFile::from(one_task()));
        let v2 = base.replace("FORMAT_VERSION : 1", "FORMAT_VERSION : 2");
        assert!(matches!(
            read_instance(&v2).unwrap_err().kind,
            ParseErrorKind::VersionMismatch { .. }
        ));
        let unknown = base.replace("DEPOT_SECTION", "WINDOW_SECTION");
        assert!(matches!(
            read_instance(&unknown).unwrap_err().kind,
            ParseErrorKind::UnknownSection(_)
        ));
    }

    #[test]
    fn tour_document() {
        let inst = one_task();
        let tour = Tour::new(&inst, vec![0, 1, 2, 3]).unwrap();
        let text = write_tour(&tour, &inst, "nn");
        let body: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "TOUR_SECTION")
            .skip(1)
            .take_while(|l| *l != "-1")
            .collect();
        assert_eq!(body, vec!["0", "1", "2", "3"]);
        let doc = parse_tour(&text).unwrap();
        assert_eq!(doc.order, vec![0, 1, 2, 3]);
        assert_eq!(doc.cost, Some(4.0));
        assert_eq!(doc.metric, Some(Metric::Euc2dRounded));
        assert_eq!(doc.heuristic.as_deref(), Some("nn"));
    }

    #[test]
    fn sci3_matches_table_style() {
        assert_eq!(Sci3(583.0).to_string(), "5.83e+02");
        assert_eq!(Sci3(11200.4).to_string(), "1.12e+04");
        assert_eq!(Sci3(0.00123).to_string(), "1.23e-03");
    }
}
