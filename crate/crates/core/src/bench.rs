//! Benchmark harness: heuristic comparison per generated instance, CSV
//! output, and the construction-time scaling study.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{generate, Direction, GenError, GeneratorConfig};
use crate::heuristics::{achci_with, nearest_neighbor, AchciOptions, Evaluation, HeuristicError};
use crate::io::{parse_tsplib, ParseError, Sci3, TsplibPointCloud};
use crate::model::{Metric, Tour};
use crate::par;

/// First field of the row that closes every complete CSV.
pub const COMPLETE_MARKER: &str = "#complete";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{name}: {source}")]
    Generate { name: String, source: GenError },
    #[error("{name}: {source}")]
    Heuristic {
        name: String,
        source: HeuristicError,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv has no completion marker")]
    Incomplete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub direction: String,
    pub nodes: usize,
    pub nn_cost: f64,
    pub achci_cost: f64,
    pub delta_percent: f64,
    pub nn_seconds: f64,
    pub achci_seconds: f64,
    pub metric: String,
}

impl BenchRecord {
    pub fn delta(nn: f64, achci: f64) -> f64 {
        100.0 * (achci - nn) / nn
    }
}

/// A record plus the tours it was computed from.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub record: BenchRecord,
    pub nn: Tour,
    pub achci: Tour,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub metric: Metric,
    pub achci: AchciOptions,
    /// Spread instances across the rayon pool.
    pub parallel: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            metric: Metric::default(),
            achci: AchciOptions::default(),
            parallel: true,
        }
    }
}

/// `.tsp` files in `dir`, sorted by file name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(PathBuf, TsplibPointCloud)>, BenchError> {
    let io_err = |source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsp"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
            let cloud = parse_tsplib(&text).map_err(|source| BenchError::Parse {
                path: path.clone(),
                source,
            })?;
            Ok((path, cloud))
        })
        .collect()
}

/// Runs both heuristics on one generated instance.
pub fn bench_one(
    cloud: &TsplibPointCloud,
    direction: Direction,
    options: &BenchOptions,
) -> Result<BenchOutcome, BenchError> {
    let config = GeneratorConfig::new(direction).with_metric(options.metric);
    let instance = generate(cloud, config).map_err(|source| BenchError::Generate {
        name: cloud.name.clone(),
        source,
    })?;
    let wrap = |source| BenchError::Heuristic {
        name: instance.name().to_string(),
        source,
    };
    let t = Instant::now();
    let nn = nearest_neighbor(&instance).map_err(wrap)?;
    let nn_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let achci = achci_with(&instance, &options.achci).map_err(wrap)?.into_tour();
    let achci_seconds = t.elapsed().as_secs_f64();
    Ok(BenchOutcome {
        record: BenchRecord {
            instance: cloud.name.clone(),
            direction: direction.as_str().to_string(),
            nodes: cloud.coords.len(),
            nn_cost: nn.cost(),
            achci_cost: achci.cost(),
            delta_percent: BenchRecord::delta(nn.cost(), achci.cost()),
            nn_seconds,
            achci_seconds,
            metric: options.metric.to_string(),
        },
        nn,
        achci,
    })
}

/// One outcome per (cloud, direction), in input order.
pub fn run_bench(
    clouds: &[TsplibPointCloud],
    directions: &[Direction],
    options: &BenchOptions,
) -> Result<Vec<BenchOutcome>, BenchError> {
    let jobs: Vec<(&TsplibPointCloud, Direction)> = clouds
        .iter()
        .flat_map(|c| directions.iter().map(move |&d| (c, d)))
        .collect();
    par::map(options.parallel, &jobs, |&(c, d)| bench_one(c, d, options))
        .into_iter()
        .collect()
}

const HEADER: [&str; 9] = [
    "instance",
    "direction",
    "nodes",
    "nn_cost",
    "achci_cost",
    "delta_percent",
    "nn_seconds",
    "achci_seconds",
    "metric",
];

/// CSV text of `records`, closed by the completion marker row. With
/// `compact`, costs use three significant figures and the delta one
/// decimal.
pub fn records_to_csv(records: &[BenchRecord], compact: bool) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for r in records {
        let (nn, ac, delta) = if compact {
            (
                Sci3(r.nn_cost).to_string(),
                Sci3(r.achci_cost).to_string(),
                format!("{:.1}", r.delta_percent),
            )
        } else {
            (
                r.nn_cost.to_string(),
                r.achci_cost.to_string(),
                r.delta_percent.to_string(),
            )
        };
        w.write_record([
            r.instance.clone(),
            r.direction.clone(),
            r.nodes.to_string(),
            nn,
            ac,
            delta,
            r.nn_seconds.to_string(),
            r.achci_seconds.to_string(),
            r.metric.clone(),
        ])?;
    }
    let rows = records.len().to_string();
    w.write_record([COMPLETE_MARKER, rows.as_str(), "", "", "", "", "", "", ""])?;
    let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses a full-precision CSV; fails unless the marker row is present and
/// its count matches.
pub fn records_from_csv(text: &str) -> Result<Vec<BenchRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.get(0) == Some(COMPLETE_MARKER) {
            let n: usize = row.get(1).and_then(|s| s.parse().ok()).ok_or(BenchError::Incomplete)?;
            return if n == out.len() {
                Ok(out)
            } else {
                Err(BenchError::Incomplete)
            };
        }
        out.push(row.deserialize(None)?);
    }
    Err(BenchError::Incomplete)
}

/// Writes `contents` next to `path` and renames it into place, so readers
/// never see a partial file.
pub fn write_atomically(path: &Path, contents: &str) -> Result<(), BenchError> {
    let io_err = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub instance: String,
    pub nodes: usize,
    pub heuristic: String,
    pub seconds: f64,
}

/// Least-squares line `seconds = slope * n^3 + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_cubic(points: &[(usize, f64)]) -> CubicFit {
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).powi(3)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    CubicFit {
        slope,
        intercept,
        r_squared,
    }
}

#[derive(Debug, Clone)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
    pub achci_fit: CubicFit,
}

impl TimingReport {
    pub fn to_csv(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.write_record([COMPLETE_MARKER, &self.rows.len().to_string(), "", ""])?;
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn seconds(&self, heuristic: &str) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| r.heuristic == heuristic)
            .map(|r| (r.nodes, r.seconds))
            .collect()
    }
}

fn median_seconds(repeats: usize, mut f: impl FnMut()) -> f64 {
    let mut times: Vec<f64> = (0..repeats.max(1))
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

/// Single-threaded wall time of both heuristics on the children-central
/// instance of each cloud, median of `repeats` runs, with a cubic fit of
/// the construction times.
pub fn timing_study(
    clouds: &[TsplibPointCloud],
    metric: Metric,
    evaluation: Evaluation,
    repeats: usize,
) -> Result<TimingReport, BenchError> {
    let mut rows = Vec::new();
    let options = AchciOptions::sequential(evaluation);
    for cloud in clouds {
        let config = GeneratorConfig::new(Direction::ChildrenCentral).with_metric(metric);
        let instance = generate(cloud, config).map_err(|source| BenchError::Generate {
            name: cloud.name.clone(),
            source,
        })?;
        let wrap = |source| BenchError::Heuristic {
            name: cloud.name.clone(),
            source,
        };
        // surface errors once, outside the timed closures
        nearest_neighbor(&instance).map_err(wrap)?;
        achci_with(&instance, &options).map_err(wrap)?;
        let nn = median_seconds(repeats, || {
            let _ = std::hint::black_box(nearest_neighbor(&instance));
        });
        let ac = median_seconds(repeats, || {
            let _ = std::hint::black_box(achci_with(&instance, &options));
        });
        for (heuristic, seconds) in [("nn", nn), ("achci", ac)] {
            rows.push(TimingRow {
                instance: cloud.name.clone(),
                nodes: cloud.coords.len(),
                heuristic: heuristic.to_string(),
                seconds,
            });
        }
    }
    let report = TimingReport {
        achci_fit: CubicFit {
            slope: 0.0,
            intercept: 0.0,
            r_squared: 0.0,
        },
        rows,
    };
    let achci_fit = fit_cubic(&report.seconds("achci"));
    Ok(TimingReport { achci_fit, ..report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, nn: f64, ac: f64) -> BenchRecord {
        BenchRecord {
            instance: name.into(),
            direction: "children-central".into(),
            nodes: 51,
            nn_cost: nn,
            achci_cost: ac,
            delta_percent: BenchRecord::delta(nn, ac),
            nn_seconds: 0.001,
            achci_seconds: 0.002,
            metric: "euc2d-rounded".into(),
        }
    }

    #[test]
    fn csv_round_trip_needs_marker() {
        let recs = vec![record("a", 583.0, 480.0), record("b", 1.0 / 3.0, 0.25)];
        let text = records_to_csv(&recs, false).unwrap();
        assert!(text.lines().last().unwrap().starts_with("#complete,2"));
        assert_eq!(records_from_csv(&text).unwrap(), recs);
        let cut: String = text.lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(records_from_csv(&cut), Err(BenchError::Incomplete)));
    }

    #[test]
    fn compact_format_rows() {
        let text = records_to_csv(&[record("eil51", 583.0, 480.0)], true).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert!(row.starts_with("eil51,children-central,51,5.83e+02,4.80e+02,-17.7,"), "{row}");
    }

    #[test]
    fn exact_cubic_fit() {
        let pts: Vec<(usize, f64)> = [10, 20, 40, 80].iter().map(|&n| (n, 2e-9 * (n as f64).powi(3) + 0.5)).collect();
        let fit = fit_cubic(&pts);
        assert!((fit.slope - 2e-9).abs() < 1e-15);
        assert!((fit.intercept - 0.5).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }
}
