//! Point sets, the supported metrics and distance-call accounting.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Minkowski metrics supported on point coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    L2,
    L1,
    LInf,
}

impl MetricKind {
    /// Evaluates the metric without instrumentation. Both slices must have the
    /// same length.
    #[inline]
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), q.len());
        let diffs = p.iter().zip(q).map(|(a, b)| (a - b).abs());
        match self {
            MetricKind::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            MetricKind::L1 => diffs.sum(),
            MetricKind::LInf => diffs.fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::L2 => "l2",
            MetricKind::L1 => "l1",
            MetricKind::LInf => "linf",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(MetricKind::L2),
            "l1" => Ok(MetricKind::L1),
            "linf" => Ok(MetricKind::LInf),
            other => Err(Error::Parameter(format!("unknown metric `{other}`"))),
        }
    }
}

/// Counts metric evaluations. One counter belongs to one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DistanceCounter {
    pub calls: u64,
}

impl DistanceCounter {
    #[inline]
    pub fn eval(&mut self, metric: MetricKind, p: &[f64], q: &[f64]) -> f64 {
        self.calls += 1;
        metric.eval(p, q)
    }
}

/// Checked, counted distance between two points.
pub fn distance(
    metric: MetricKind,
    p: &[f64],
    q: &[f64],
    counter: &mut DistanceCounter,
) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            index: 1,
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(counter.eval(metric, p, q))
}

/// A validated, immutable, nonempty set of distinct points of one dimension.
///
/// Coordinates are stored row-major in a single buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    metric: MetricKind,
    label: String,
}

impl PointSet {
    pub fn new(
        points: Vec<Vec<f64>>,
        metric: MetricKind,
        label: impl Into<String>,
    ) -> Result<Self> {
        validate(&points)?;
        let dim = points[0].len();
        let coords = points.into_iter().flatten().collect();
        Ok(PointSet {
            dim,
            coords,
            metric,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    /// Counted distance between points `i` and `j` of this set.
    #[inline]
    pub fn dist(&self, i: usize, j: usize, counter: &mut DistanceCounter) -> f64 {
        counter.eval(self.metric, self.point(i), self.point(j))
    }

    /// Errors unless both sets share metric and dimension.
    pub fn check_compatible(&self, other: &PointSet) -> Result<()> {
        if self.metric != other.metric {
            return Err(Error::Incompatible(format!(
                "metric {} vs {}",
                self.metric, other.metric
            )));
        }
        if self.dim != other.dim {
            return Err(Error::Incompatible(format!(
                "dimension {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

/// Accepts iff the list is nonempty with finite coordinates, one dimension
/// and no exact duplicates. Reports the first offending index.
pub fn validate(points: &[Vec<f64>]) -> Result<()> {
    let first = points.first().ok_or(Error::EmptySet)?;
    let dim = first.len();
    if dim == 0 {
        return Err(Error::DimensionMismatch {
            index: 0,
            expected: 1,
            found: 0,
        });
    }
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
    for (index, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                index,
                expected: dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        // +0.0 and -0.0 are the same coordinate.
        let key = p.iter().map(|&c| (c + 0.0).to_bits()).collect();
        if let Some(&first) = seen.get(&key) {
            return Err(Error::Duplicate { index, first });
        }
        seen.insert(key, index);
    }
    Ok(())
}

/// Diameter over minimum pairwise distance, by exhaustive pairs.
pub fn spread(set: &PointSet) -> Result<f64> {
    let n = set.len();
    if n < 2 {
        return Err(Error::UndefinedSpread);
    }
    let mut counter = DistanceCounter::default();
    let mut diam = 0.0f64;
    let mut min = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let d = set.dist(i, j, &mut counter);
            diam = diam.max(d);
            if d < min {
                min = d;
                if d == 0.0 {
                    return Err(Error::Duplicate { index: j, first: i });
                }
            }
        }
    }
    Ok(diam / min)
}

/// Parses the point-file text format: one point per line, coordinates split
/// by commas and/or whitespace, `#` comment lines and blank lines skipped.
pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("bad coordinate `{s}`"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {d} coordinates, found {}", coords.len()),
                })
            }
            Some(_) => {}
        }
        points.push(coords);
    }
    Ok(points)
}
