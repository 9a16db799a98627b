//! Linkages, pinned configurations, and configuration validation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, GeometryError, Point};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkageError {
    #[error("a linkage needs at least 3 edges, got {0}")]
    TooFewEdges(usize),
    #[error("edge {edge} has non-positive or non-finite length {length}")]
    BadLength { edge: usize, length: f64 },
    #[error("edge {edge} of length {length} is not shorter than the sum of the others ({rest})")]
    NotClosable { edge: usize, length: f64, rest: f64 },
}

/// Edge lengths `(l_1, …, l_n)` of a closed planar polygonal linkage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LinkageFile", into = "LinkageFile")]
pub struct Linkage {
    lengths: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LinkageFile {
    lengths: Vec<f64>,
}

impl TryFrom<LinkageFile> for Linkage {
    type Error = LinkageError;
    fn try_from(file: LinkageFile) -> Result<Self, LinkageError> {
        Linkage::new(file.lengths)
    }
}

impl From<Linkage> for LinkageFile {
    fn from(l: Linkage) -> Self {
        LinkageFile { lengths: l.lengths }
    }
}

impl Linkage {
    pub fn new(lengths: Vec<f64>) -> Result<Self, LinkageError> {
        if lengths.len() < 3 {
            return Err(LinkageError::TooFewEdges(lengths.len()));
        }
        for (edge, &length) in lengths.iter().enumerate() {
            if !(length.is_finite() && length > 0.0) {
                return Err(LinkageError::BadLength { edge, length });
            }
        }
        let total: f64 = lengths.iter().sum();
        for (edge, &length) in lengths.iter().enumerate() {
            let rest = total - length;
            if length >= rest {
                return Err(LinkageError::NotClosable { edge, length, rest });
            }
        }
        Ok(Linkage { lengths })
    }

    /// Edge lengths read off a closed vertex cycle.
    pub fn from_points(points: &[Point]) -> Result<Self, LinkageError> {
        let n = points.len();
        Linkage::new((0..n).map(|i| points[i].dist(points[(i + 1) % n])).collect())
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    pub fn perimeter(&self) -> f64 {
        self.lengths.iter().sum()
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lengths.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// Vertex positions `p_1..p_n` of a linkage, with `p_1 = (0, 0)` and
/// `p_2 = (0, l_1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<Point>,
}

impl Configuration {
    pub fn new(points: Vec<Point>) -> Self {
        Configuration { points }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn signed_area(&self) -> Result<f64, GeometryError> {
        geometry::signed_area(&self.points)
    }

    /// Reflection across the pinned edge line (the y axis).
    pub fn mirrored(&self) -> Configuration {
        Configuration { points: self.points.iter().map(|p| p.reflect_y()).collect() }
    }

    /// Move `p_1` to the origin and `p_2` onto the positive y axis.
    ///
    /// Returns `None` when `p_1 = p_2`.
    pub fn repinned(points: &[Point]) -> Option<Configuration> {
        let (a, b) = (*points.first()?, *points.get(1)?);
        let l1 = a.dist(b);
        if l1 == 0.0 {
            return None;
        }
        // Rotate so that b - a points along +y.
        let rot = std::f64::consts::FRAC_PI_2 - (b - a).angle();
        let (s, c) = rot.sin_cos();
        let mut out: Vec<Point> = points
            .iter()
            .map(|&p| {
                let v = p - a;
                Point::new(c * v.x - s * v.y, s * v.x + c * v.y)
            })
            .collect();
        out[0] = Point::ORIGIN;
        out[1] = Point::new(0.0, l1);
        Some(Configuration { points: out })
    }
}

/// One failed condition of [`validate_configuration`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PointCount { expected: usize, found: usize },
    /// `vertex` is 0 or 1; `found` is the offending position.
    Pinning { vertex: usize, expected: Point, found: Point },
    /// Edge `edge` joins `p_edge` and `p_{edge+1}` (0-based, cyclic).
    EdgeLength { edge: usize, expected: f64, found: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PointCount { expected, found } => {
                write!(f, "expected {expected} points, found {found}")
            }
            Violation::Pinning { vertex, expected, found } => {
                write!(f, "vertex {vertex} must be pinned at {expected}, found {found}")
            }
            Violation::EdgeLength { edge, expected, found } => {
                write!(f, "edge {edge} has length {found}, expected {expected}")
            }
        }
    }
}

/// Check edge lengths (within `tol * l_i`) and pinning (exact).
///
/// Returns every violation found; an empty list means `points` is a
/// configuration of `linkage`.
pub fn validate_configuration(linkage: &Linkage, points: &[Point], tol: f64) -> Vec<Violation> {
    let n = linkage.n();
    if points.len() != n {
        return vec![Violation::PointCount { expected: n, found: points.len() }];
    }
    let mut out = Vec::new();
    let pins = [Point::ORIGIN, Point::new(0.0, linkage.lengths()[0])];
    for (vertex, expected) in pins.into_iter().enumerate() {
        if points[vertex] != expected {
            out.push(Violation::Pinning { vertex, expected, found: points[vertex] });
        }
    }
    for (edge, &expected) in linkage.lengths().iter().enumerate() {
        let found = points[edge].dist(points[(edge + 1) % n]);
        if (found - expected).abs() > tol * expected {
            out.push(Violation::EdgeLength { edge, expected, found });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[[f64; 2]]) -> Vec<Point> {
        raw.iter().copied().map(Point::from).collect()
    }

    fn unit4() -> Linkage {
        Linkage::new(vec![1.0; 4]).unwrap()
    }

    #[test]
    fn rejects_bad_linkages() {
        assert_eq!(Linkage::new(vec![1.0, 1.0]), Err(LinkageError::TooFewEdges(2)));
        assert!(matches!(
            Linkage::new(vec![1.0, -1.0, 1.0]),
            Err(LinkageError::BadLength { edge: 1, .. })
        ));
        assert!(matches!(
            Linkage::new(vec![1.0, 1.0, 2.0]),
            Err(LinkageError::NotClosable { edge: 2, .. })
        ));
        assert!(Linkage::new(vec![1.0, 1.0, 1.9]).is_ok());
    }

    #[test]
    fn json_schema() {
        let l: Linkage = serde_json::from_str(r#"{"lengths":[3,1,1,2]}"#).unwrap();
        assert_eq!(l.lengths(), &[3.0, 1.0, 1.0, 2.0]);
        assert_eq!(serde_json::to_string(&l).unwrap(), r#"{"lengths":[3.0,1.0,1.0,2.0]}"#);
        assert!(serde_json::from_str::<Linkage>(r#"{"lengths":[5,1,1]}"#).is_err());
        let c: Configuration = serde_json::from_str(r#"{"points":[[0,0],[0,1],[-1,1]]}"#).unwrap();
        assert_eq!(c.points[2], Point::new(-1.0, 1.0));
    }

    #[test]
    fn square_is_valid() {
        let sq = pts(&[[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]]);
        assert!(validate_configuration(&unit4(), &sq, 1e-9).is_empty());
    }

    #[test]
    fn moved_vertex_breaks_two_edges() {
        let bad = pts(&[[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.5]]);
        let v = validate_configuration(&unit4(), &bad, 1e-9);
        let edges: Vec<usize> = v
            .iter()
            .filter_map(|v| match v {
                Violation::EdgeLength { edge, .. } => Some(*edge),
                _ => None,
            })
            .collect();
        // 0-based: edges 2 and 3 are the third and fourth edges.
        assert_eq!(edges, vec![2, 3]);
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn unpinned_first_vertex() {
        let bad = pts(&[[0.1, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]]);
        let v = validate_configuration(&unit4(), &bad, 1e-9);
        assert!(v.iter().any(|v| matches!(v, Violation::Pinning { vertex: 0, .. })));
    }

    #[test]
    fn wrong_point_count() {
        let v = validate_configuration(&unit4(), &pts(&[[0.0, 0.0]]), 1e-9);
        assert_eq!(v, vec![Violation::PointCount { expected: 4, found: 1 }]);
    }

    #[test]
    fn repinning_is_a_rigid_motion() {
        let raw = pts(&[[2.0, 1.0], [3.0, 1.0], [3.0, 2.0], [2.0, 2.0]]);
        let c = Configuration::repinned(&raw).unwrap();
        assert!(validate_configuration(&unit4(), &c.points, 1e-12).is_empty());
        let a0 = geometry::signed_area(&raw).unwrap();
        assert!((c.signed_area().unwrap() - a0).abs() < 1e-12);
    }
}
