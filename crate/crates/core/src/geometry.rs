//! Planar primitives: points, signed area, circumscribed circles, and the
//! per-edge measurements (orientation, half-angle) of a cyclic polygon.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative threshold below which the center is declared to lie on an edge
/// line: `|cross| / (|edge| * r)`.
pub const CENTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("no circle through the reference vertices: points are collinear")]
    DegenerateCircle,
    #[error("vertex {vertex} is off the circle by {deviation:e} (relative)")]
    NotCyclic { vertex: usize, deviation: f64 },
    #[error("edge {edge} passes through the center")]
    CentralEdge { edge: usize },
    #[error("edge {edge} has zero length")]
    VanishingEdge { edge: usize },
    #[error("edge {edge} of length {length} does not fit in a circle of radius {radius}")]
    NotInscribable { edge: usize, length: f64, radius: f64 },
}

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Point at `angle` on the circle of `radius` around `self`.
    pub fn polar(self, radius: f64, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(self.x + radius * c, self.y + radius * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; positive when `other` is
    /// counterclockwise from `self`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Polar angle of the vector in `(-π, π]`.
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Mirror image across the y axis.
    pub fn reflect_y(self) -> Point {
        Point::new(-self.x, self.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Edge orientation relative to the circumcenter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn of(value: f64) -> Sign {
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    /// `(-1)^count`
    pub fn parity(count: usize) -> Sign {
        if count.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, o: Sign) -> Sign {
        if self == o {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.as_i8()
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// The string `E = (ε_1, …, ε_n)`: `ε_i = +1` when the center lies to the
/// left of the directed edge `p_i → p_{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientationString(pub Vec<Sign>);

impl OrientationString {
    pub fn new(signs: Vec<Sign>) -> Self {
        OrientationString(signs)
    }

    pub fn all(sign: Sign, n: usize) -> Self {
        OrientationString(vec![sign; n])
    }

    /// Decode bit `i` of `bits` as edge `i` (set bit means `-1`).
    pub fn from_bits(bits: u64, n: usize) -> Self {
        OrientationString(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { Sign::Minus } else { Sign::Plus })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }

    /// `e(P)`: number of `+1` entries.
    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&s| s == Sign::Plus).count()
    }

    pub fn negated(&self) -> Self {
        OrientationString(self.0.iter().map(|&s| -s).collect())
    }

    /// Indices where `self` and `other` differ.
    pub fn diff(&self, other: &OrientationString) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

impl fmt::Display for OrientationString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Shoelace signed area of the closed vertex cycle.
///
/// Positive for counterclockwise simple polygons; self-intersecting cycles
/// get the winding-weighted area.
pub fn signed_area(points: &[Point]) -> Result<f64, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, found: points.len() });
    }
    let n = points.len();
    let twice: f64 = (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum();
    Ok(0.5 * twice)
}

/// Sum of edge lengths of the closed cycle.
pub fn perimeter(points: &[Point]) -> f64 {
    let n = points.len();
    (0..n).map(|i| points[i].dist(points[(i + 1) % n])).sum()
}

/// A circle through the vertices of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Point,
    pub radius: f64,
}

fn circumcircle(a: Point, b: Point, c: Point) -> Option<CircleFit> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    let scale = ab.dot(ab).max(ac.dot(ac));
    if d.abs() <= 1e-12 * scale || scale == 0.0 {
        return None;
    }
    let (ab2, ac2) = (ab.dot(ab), ac.dot(ac));
    let offset = Point::new(ac.y * ab2 - ab.y * ac2, ab.x * ac2 - ac.x * ab2) * (1.0 / d);
    Some(CircleFit { center: a + offset, radius: offset.norm() })
}

/// Fit the circle through `p_1`, `p_2` and a third vertex, and accept it if
/// every vertex lies on it within `tol * r`.
///
/// The third vertex is the one spanning the largest triangle with `p_1 p_2`,
/// which is `p_3` whenever that choice is well conditioned. Cyclic polygons
/// may have coincident vertices, so insisting on `p_3` would reject some of
/// them.
pub fn fit_circle(points: &[Point], tol: f64) -> Result<CircleFit, GeometryError> {
    if points.len() < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, found: points.len() });
    }
    let (a, b) = (points[0], points[1]);
    let third = (2..points.len())
        .max_by(|&i, &j| {
            let ci = (b - a).cross(points[i] - a).abs();
            let cj = (b - a).cross(points[j] - a).abs();
            ci.total_cmp(&cj)
        })
        .expect("at least three points");
    let fit = circumcircle(a, b, points[third]).ok_or(GeometryError::DegenerateCircle)?;
    for (vertex, p) in points.iter().enumerate() {
        let deviation = (p.dist(fit.center) - fit.radius).abs() / fit.radius;
        if deviation > tol {
            return Err(GeometryError::NotCyclic { vertex, deviation });
        }
    }
    Ok(fit)
}

/// `ε_i` for every edge of the closed cycle, by the side of `center`
/// relative to the directed edge.
pub fn edge_orientations(
    points: &[Point],
    center: Point,
) -> Result<OrientationString, GeometryError> {
    let n = points.len();
    if n < 2 {
        return Err(GeometryError::TooFewPoints { needed: 2, found: n });
    }
    let radius = points.iter().map(|p| p.dist(center)).sum::<f64>() / n as f64;
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = (points[i], points[(i + 1) % n]);
        let edge = q - p;
        let len = edge.norm();
        if len == 0.0 {
            return Err(GeometryError::VanishingEdge { edge: i });
        }
        let cross = edge.cross(center - p);
        if cross.abs() < CENTRAL_TOL * len * radius {
            return Err(GeometryError::CentralEdge { edge: i });
        }
        signs.push(Sign::of(cross));
    }
    Ok(OrientationString(signs))
}

/// Half central angles `α_i = arcsin(l_i / 2r)`, all in `(0, π/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfAngles {
    pub alphas: Vec<f64>,
    /// `|l_i - 2r| <= tol * r`: edge `i` is a diameter.
    pub central: Vec<bool>,
}

impl HalfAngles {
    pub fn any_central(&self) -> bool {
        self.central.iter().any(|&c| c)
    }
}

pub fn measure_half_angles(
    points: &[Point],
    fit: &CircleFit,
    tol: f64,
) -> Result<HalfAngles, GeometryError> {
    let n = points.len();
    let r = fit.radius;
    let mut alphas = Vec::with_capacity(n);
    let mut central = Vec::with_capacity(n);
    for i in 0..n {
        let length = points[i].dist(points[(i + 1) % n]);
        if length == 0.0 {
            return Err(GeometryError::VanishingEdge { edge: i });
        }
        if length > 2.0 * r * (1.0 + tol) {
            return Err(GeometryError::NotInscribable { edge: i, length, radius: r });
        }
        central.push((length - 2.0 * r).abs() <= tol * r);
        alphas.push((length / (2.0 * r)).min(1.0).asin());
    }
    Ok(HalfAngles { alphas, central })
}
