//! Cyclic deformations: vertices sliding along a fixed circle.
//!
//! A path is a linear interpolation `θ(t) = (1 − t) θ_A + t θ_B` of lifted
//! vertex angles on a circle of fixed radius `r`. Each frame is a cyclic
//! polygon of the time-dependent linkage `l_i(t) = 2r sin(|D_i(t)| / 2)`,
//! where `D_i = θ_{i+1} − θ_i` (indices mod n). In terms of the increments,
//!
//! - `ε_i = sign(sin D_i)` and `α_i = |wrap(D_i)| / 2`,
//! - `ε_i tan α_i = tan(D_i / 2)`, so `δ(t) = Σ tan(D_i(t) / 2)`.
//!
//! The sign data `(E, d, 𝓗)` changes only at three kinds of events: a flip
//! (`D_i` crosses a multiple of `2π`, the edge vanishes), a central crossing
//! (`D_i` crosses an odd multiple of `π`, the edge is a diameter and `δ` has
//! a pole) and a zero of `δ`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{edge_orientations, CircleFit, GeometryError, OrientationString, Point, Sign};
use crate::linkage::{Configuration, Linkage};
use crate::morse::{SignReport, DELTA_REL_TOL};
use crate::oracle::{oracle_index, OracleOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("a path needs at least 2 frames, got {0}")]
    TooFewSteps(usize),
    #[error("start has {start} angles, end has {end}")]
    SizeMismatch { start: usize, end: usize },
    #[error("need at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("events {first} and {second} coincide near t = {t}")]
    NonGenericPath { t: f64, first: String, second: String },
}

/// `x` reduced to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Lifted vertex angles about the circle's center, with
/// `θ_{i+1} − θ_i = 2 ε_i α_i` for `i < n`.
pub fn vertex_angles(points: &[Point], fit: &CircleFit) -> Result<Vec<f64>, GeometryError> {
    edge_orientations(points, fit.center)?;
    let raw: Vec<f64> = points.iter().map(|&p| (p - fit.center).angle()).collect();
    let mut out = Vec::with_capacity(points.len());
    let mut theta = raw[0];
    out.push(theta);
    for w in raw.windows(2) {
        theta += wrap_angle(w[1] - w[0]);
        out.push(theta);
    }
    Ok(out)
}

/// Shift each `angles[i]` by a multiple of `2π` to lie within `π` of
/// `reference[i]`.
pub fn lift_near(angles: &[f64], reference: &[f64]) -> Vec<f64> {
    angles.iter().zip(reference).map(|(&a, &r)| r + wrap_angle(a - r)).collect()
}

/// A straight path in lifted angle space on a circle of fixed radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularPath {
    start: Vec<f64>,
    end: Vec<f64>,
    radius: f64,
    steps: usize,
}

/// Build the path from `start` to `end` with `steps` frames at
/// `t = j / (steps − 1)`.
pub fn deform(start: &[f64], end: &[f64], radius: f64, steps: usize) -> Result<AngularPath, DeformError> {
    if start.len() != end.len() {
        return Err(DeformError::SizeMismatch { start: start.len(), end: end.len() });
    }
    if start.len() < 3 {
        return Err(DeformError::TooFewVertices(start.len()));
    }
    if steps < 2 {
        return Err(DeformError::TooFewSteps(steps));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(DeformError::BadRadius(radius));
    }
    Ok(AngularPath { start: start.to_vec(), end: end.to_vec(), radius, steps })
}

impl AngularPath {
    pub fn n(&self) -> usize {
        self.start.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn end(&self) -> &[f64] {
        &self.end
    }

    /// Parameter of frame `j`.
    pub fn frame_time(&self, j: usize) -> f64 {
        if j + 1 == self.steps {
            1.0
        } else {
            j as f64 / (self.steps - 1) as f64
        }
    }

    pub fn frame_times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(|j| self.frame_time(j))
    }

    /// `θ(t)`; `t` outside `[0, 1]` extrapolates linearly.
    pub fn angles_at(&self, t: f64) -> Vec<f64> {
        self.start.iter().zip(&self.end).map(|(&a, &b)| a + t * (b - a)).collect()
    }

    /// Increments `D_i(t) = θ_{i+1}(t) − θ_i(t)`, cyclically.
    pub fn increments_at(&self, t: f64) -> Vec<f64> {
        let th = self.angles_at(t);
        let n = th.len();
        (0..n).map(|i| th[(i + 1) % n] - th[i]).collect()
    }

    fn increment(&self, i: usize, t: f64) -> f64 {
        let j = (i + 1) % self.n();
        let at = |k: usize| self.start[k] + t * (self.end[k] - self.start[k]);
        at(j) - at(i)
    }

    /// Vertices on the circle of radius `r` about the origin.
    pub fn points_at(&self, t: f64) -> Vec<Point> {
        self.angles_at(t).into_iter().map(|a| Point::ORIGIN.polar(self.radius, a)).collect()
    }

    /// The frame moved rigidly so that `p_1` and `p_2` are pinned.
    pub fn configuration_at(&self, t: f64) -> Option<Configuration> {
        Configuration::repinned(&self.points_at(t))
    }

    /// `l_i(t) = 2r sin(|D_i| / 2)`; fails at a flip.
    pub fn linkage_at(&self, t: f64) -> Option<Linkage> {
        let lengths = self
            .increments_at(t)
            .into_iter()
            .map(|d| 2.0 * self.radius * (wrap_angle(d).abs() / 2.0).sin())
            .collect();
        Linkage::new(lengths).ok()
    }

    /// `δ(t) = Σ tan(D_i / 2)`.
    pub fn delta_at(&self, t: f64) -> f64 {
        (0..self.n()).map(|i| (self.increment(i, t) / 2.0).tan()).sum()
    }
}

/// Sign data of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub eps: OrientationString,
    pub alphas: Vec<f64>,
    /// `Σ tan(D_i / 2)`, computed without going through `E` and `α`.
    pub delta: f64,
    /// `None` when the frame is central or `δ` vanishes.
    pub report: Option<SignReport>,
}

impl Snapshot {
    pub fn at(path: &AngularPath, t: f64) -> Snapshot {
        let inc = path.increments_at(t);
        let eps = OrientationString(inc.iter().map(|d| Sign::of(d.sin())).collect());
        let alphas: Vec<f64> = inc.iter().map(|&d| wrap_angle(d).abs() / 2.0).collect();
        let report = SignReport::new(&alphas, &eps).ok();
        Snapshot { t, eps, alphas, delta: path.delta_at(t), report }
    }

    pub fn is_generic(&self) -> bool {
        self.report.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Flip,
    Central,
    DeltaZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    /// 0-based edge for flips and central crossings.
    pub edge: Option<usize>,
    pub t: f64,
    pub before: Snapshot,
    pub after: Snapshot,
}

impl Event {
    pub fn label(&self) -> String {
        match (self.kind, self.edge) {
            (EventKind::Flip, Some(i)) => format!("flip({})", i + 1),
            (EventKind::Central, Some(i)) => format!("central({})", i + 1),
            _ => "delta_zero".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventOptions {
    /// Bisection stops once the bracket is shorter than this.
    pub bisect_tol: f64,
    /// Events closer than this in `t` make the path non-generic.
    pub separation: f64,
}

impl Default for EventOptions {
    fn default() -> Self {
        EventOptions { bisect_tol: 1e-10, separation: 1e-8 }
    }
}

/// Sign convention for bracketing: zero counts as positive.
fn side(x: f64) -> bool {
    x >= 0.0
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let s_lo = side(f(lo));
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if side(f(mid)) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn sign_changes_on(f: &impl Fn(f64) -> f64, samples: &[f64], tol: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev = side(f(samples[0]));
    for w in samples.windows(2) {
        let cur = side(f(w[1]));
        if cur != prev {
            out.push(bisect(f, w[0], w[1], tol));
        }
        prev = cur;
    }
    out
}

/// Locate every flip, central crossing and zero of `δ` along the path,
/// sorted by `t`, with sign snapshots on either side.
///
/// Zeros of `δ` are searched separately on each open interval between
/// central crossings, where `δ` is continuous; the poles themselves are
/// never mistaken for zeros.
pub fn detect_events(path: &AngularPath, opts: &EventOptions) -> Result<Vec<Event>, DeformError> {
    let frames: Vec<f64> = path.frame_times().collect();
    let mut raw: Vec<(EventKind, Option<usize>, f64)> = Vec::new();
    for i in 0..path.n() {
        let g = |t: f64| path.increment(i, t).sin();
        for t in sign_changes_on(&g, &frames, opts.bisect_tol) {
            let kind =
                if path.increment(i, t).cos() > 0.0 { EventKind::Flip } else { EventKind::Central };
            raw.push((kind, Some(i), t));
        }
    }
    let mut poles: Vec<f64> =
        raw.iter().filter(|e| e.0 == EventKind::Central).map(|e| e.2).collect();
    poles.sort_by(f64::total_cmp);

    // δ is continuous on each piece between consecutive poles.
    let eta = 10.0 * opts.bisect_tol;
    let mut cuts = vec![(0.0, false)];
    cuts.extend(poles.iter().map(|&t| (t, true)));
    cuts.push((1.0, false));
    let delta = |t: f64| path.delta_at(t);
    for w in cuts.windows(2) {
        let (a, a_pole) = w[0];
        let (b, b_pole) = w[1];
        let lo = if a_pole { a + eta } else { a };
        let hi = if b_pole { b - eta } else { b };
        if hi <= lo {
            continue;
        }
        let mut samples = vec![lo];
        samples.extend(frames.iter().copied().filter(|&t| t > lo && t < hi));
        samples.push(hi);
        for t in sign_changes_on(&delta, &samples, opts.bisect_tol) {
            raw.push((EventKind::DeltaZero, None, t));
        }
    }
    raw.sort_by(|x, y| x.2.total_cmp(&y.2));

    let name = |e: &(EventKind, Option<usize>, f64)| match e.1 {
        Some(i) => format!("{:?}({})", e.0, i + 1).to_lowercase(),
        None => "delta_zero".to_string(),
    };
    for w in raw.windows(2) {
        if w[1].2 - w[0].2 < opts.separation {
            return Err(DeformError::NonGenericPath { t: w[0].2, first: name(&w[0]), second: name(&w[1]) });
        }
    }

    let mut events = Vec::with_capacity(raw.len());
    for (k, &(kind, edge, t)) in raw.iter().enumerate() {
        let mut gap = f64::INFINITY;
        if k > 0 {
            gap = gap.min(t - raw[k - 1].2);
        }
        if k + 1 < raw.len() {
            gap = gap.min(raw[k + 1].2 - t);
        }
        let h = (1e-6f64).min(gap / 3.0);
        events.push(Event {
            kind,
            edge,
            t,
            before: Snapshot::at(path, t - h),
            after: Snapshot::at(path, t + h),
        });
    }
    Ok(events)
}

/// One failed check of [`check_lemmas`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum LemmaViolation {
    /// An event whose before/after snapshots do not follow the table.
    Transition { event: usize, label: String, reason: String },
    /// A frame whose `(E, d, 𝓗)` differs from its neighbouring events.
    Constancy { frame: usize, t: f64 },
    /// `𝓗 · d · (−1)^e ≠ −1` with `d = sign Σ tan(D_i / 2)`.
    Identity { frame: usize, t: f64 },
    /// The formula's `𝓗` disagrees with the numerical Hessian.
    Oracle { frame: usize, t: f64, formula: i8, oracle: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct LemmaOptions {
    pub events: EventOptions,
    /// Compare against the numerical Hessian every `oracle_stride` frames;
    /// 0 disables the comparison.
    pub oracle_stride: usize,
    pub oracle: OracleOptions,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub events: Vec<Event>,
    pub frames_checked: usize,
    /// Frames where the sign data is undefined (central, or `δ = 0`).
    pub frames_skipped: usize,
    pub oracle_checked: usize,
    pub violations: Vec<LemmaViolation>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

type Signature = (OrientationString, Sign, Sign);

fn signature(s: &Snapshot) -> Option<Signature> {
    s.report.as_ref().map(|r| (s.eps.clone(), r.d, r.h_sign))
}

fn transition_reason(e: &Event) -> Option<String> {
    let (Some(b), Some(a)) = (signature(&e.before), signature(&e.after)) else {
        return Some("snapshot is not generic".to_string());
    };
    let flipped = b.0.diff(&a.0);
    let h_toggles = b.2 != a.2;
    let d_toggles = b.1 != a.1;
    let (want_eps, want_h, want_d) = match e.kind {
        EventKind::Flip => (e.edge.into_iter().collect::<Vec<_>>(), true, false),
        EventKind::Central => (e.edge.into_iter().collect(), false, true),
        EventKind::DeltaZero => (Vec::new(), true, true),
    };
    if flipped != want_eps {
        return Some(format!("E changed at {flipped:?}, expected {want_eps:?}"));
    }
    if h_toggles != want_h {
        return Some(format!("𝓗 {} → {}", b.2, a.2));
    }
    if d_toggles != want_d {
        return Some(format!("d {} → {}", b.1, a.1));
    }
    None
}

/// Detect the events of `path` and check every piece of sign bookkeeping:
/// the transition table at each event, constancy of `(E, d, 𝓗)` between
/// events, the frame-wise identity `𝓗 · d · (−1)^e = −1`, and optionally the
/// numerical Hessian determinant sign at sampled frames.
pub fn check_lemmas(path: &AngularPath, opts: &LemmaOptions) -> Result<LemmaReport, DeformError> {
    let events = detect_events(path, &opts.events)?;
    let mut violations = Vec::new();
    for (k, e) in events.iter().enumerate() {
        if let Some(reason) = transition_reason(e) {
            violations.push(LemmaViolation::Transition { event: k, label: e.label(), reason });
        }
    }

    let mut frames_checked = 0;
    let mut frames_skipped = 0;
    let mut oracle_checked = 0;
    let mut next = 0;
    for (j, t) in path.frame_times().enumerate() {
        while next < events.len() && events[next].t < t {
            next += 1;
        }
        let near = |e: &Event| (e.t - t).abs() < 2.0 * opts.events.bisect_tol;
        if events.get(next).is_some_and(near) || (next > 0 && near(&events[next - 1])) {
            frames_skipped += 1;
            continue;
        }
        let snap = Snapshot::at(path, t);
        let Some(sig) = signature(&snap) else {
            frames_skipped += 1;
            continue;
        };
        frames_checked += 1;
        let expected = if next > 0 {
            signature(&events[next - 1].after)
        } else if let Some(e) = events.first() {
            signature(&e.before)
        } else {
            None
        };
        if expected.is_some_and(|x| x != sig) {
            violations.push(LemmaViolation::Constancy { frame: j, t });
        }
        let d = Sign::of(snap.delta);
        if sig.2 * d * Sign::parity(sig.0.positives()) != Sign::Minus {
            violations.push(LemmaViolation::Identity { frame: j, t });
        }
        if opts.oracle_stride > 0 && j % opts.oracle_stride == 0 {
            if let Some(formula) = oracle_sign(path, t, &snap, &opts.oracle) {
                oracle_checked += 1;
                let want = sig.2.as_i8();
                if formula != want {
                    violations.push(LemmaViolation::Oracle { frame: j, t, formula: want, oracle: formula });
                }
            }
        }
    }
    Ok(LemmaReport { events, frames_checked, frames_skipped, oracle_checked, violations })
}

/// Oracle determinant sign at a frame that is safely away from every
/// degeneracy, or `None`.
fn oracle_sign(path: &AngularPath, t: f64, snap: &Snapshot, opts: &OracleOptions) -> Option<i8> {
    const MARGIN: f64 = 1e-4;
    let scale: f64 = snap.alphas.iter().map(|a| a.tan()).sum();
    let safe = snap.alphas.iter().all(|&a| a > MARGIN && a < PI / 2.0 - MARGIN)
        && snap.delta.abs() > 1e3 * DELTA_REL_TOL * scale;
    if !safe {
        return None;
    }
    let config = path.configuration_at(t)?;
    let linkage = Linkage::from_points(&config.points).ok()?;
    let verdict = oracle_index(&config.points, &linkage, opts).ok()?;
    verdict.is_morse().then_some(verdict.det_sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fit_circle;
    use crate::morse::morse_index_on;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn deg(a: &[f64]) -> Vec<f64> {
        a.iter().map(|x| x.to_radians()).collect()
    }

    fn with_oracle() -> LemmaOptions {
        LemmaOptions { oracle_stride: 97, ..LemmaOptions::default() }
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(-7.0 * TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn square_angles() {
        let sq: Vec<Point> =
            [[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]].map(Point::from).to_vec();
        let fit = fit_circle(&sq, 1e-12).unwrap();
        let th = vertex_angles(&sq, &fit).unwrap();
        for (a, b) in th.iter().zip(deg(&[-45.0, 45.0, 135.0, 225.0])) {
            assert!((a - b).abs() < 1e-12, "{th:?}");
        }
    }

    #[test]
    fn regular_pentagon_and_pentagram_increments() {
        for (step, inc) in [(1.0, 72f64), (2.0, 144.0)] {
            let pts: Vec<Point> =
                (0..5).map(|i| Point::new(1.0, 2.0).polar(0.8, 0.3 + step * 72f64.to_radians() * i as f64)).collect();
            let fit = CircleFit { center: Point::new(1.0, 2.0), radius: 0.8 };
            let th = vertex_angles(&pts, &fit).unwrap();
            for w in th.windows(2) {
                assert!((w[1] - w[0] - inc.to_radians()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vertex_angles_rejects_central_edges() {
        let pts: Vec<Point> = deg(&[0.0, 180.0, 270.0]).into_iter().map(|a| Point::ORIGIN.polar(1.0, a)).collect();
        let fit = CircleFit { center: Point::ORIGIN, radius: 1.0 };
        assert!(matches!(vertex_angles(&pts, &fit), Err(GeometryError::CentralEdge { edge: 0 })));
    }

    #[test]
    fn angles_reproduce_the_configuration() {
        let th = deg(&[10.0, 100.0, 200.0, 250.0]);
        let path = deform(&th, &th, 1.3, 5).unwrap();
        let pts = path.points_at(0.0);
        let fit = CircleFit { center: Point::ORIGIN, radius: 1.3 };
        let back = vertex_angles(&pts, &fit).unwrap();
        for (a, b) in back.iter().zip(&th) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = path.configuration_at(0.3).unwrap();
        let l = path.linkage_at(0.3).unwrap();
        assert!(crate::linkage::validate_configuration(&l, &c.points, 1e-12).is_empty());
    }

    #[test]
    fn deform_preconditions() {
        assert_eq!(deform(&[0.0; 3], &[0.0; 4], 1.0, 10), Err(DeformError::SizeMismatch { start: 3, end: 4 }));
        assert_eq!(deform(&[0.0; 3], &[0.0; 3], 1.0, 1), Err(DeformError::TooFewSteps(1)));
        assert_eq!(deform(&[0.0; 3], &[0.0; 3], -1.0, 4), Err(DeformError::BadRadius(-1.0)));
    }

    #[test]
    fn lift_near_stays_within_half_turn() {
        let lifted = lift_near(&[0.1, 7.0, -4.0], &[6.3, 0.5, 2.0]);
        for (a, r) in lifted.iter().zip([6.3, 0.5, 2.0]) {
            assert!((a - r).abs() <= PI);
        }
        assert!((lifted[0] - (0.1 + TAU)).abs() < 1e-12);
    }

    #[test]
    fn constant_path_has_no_events() {
        let th = deg(&[0.0, 72.0, 144.0, 216.0, 288.0]);
        let path = deform(&th, &th, 1.0, 50).unwrap();
        assert!(detect_events(&path, &EventOptions::default()).unwrap().is_empty());
        let report = check_lemmas(&path, &with_oracle()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.frames_checked, 50);
    }

    #[test]
    fn full_turn_of_one_square_vertex_is_not_generic() {
        // p_4 meets p_1 exactly when edge 3 is a diameter.
        let a = deg(&[-45.0, 45.0, 135.0, 225.0]);
        let b = deg(&[-45.0, 45.0, 135.0, 585.0]);
        let path = deform(&a, &b, 2f64.sqrt() / 2.0, 2000).unwrap();
        let err = detect_events(&path, &EventOptions::default()).unwrap_err();
        let DeformError::NonGenericPath { t, .. } = err else { panic!("{err:?}") };
        assert!((t - 0.25).abs() < 1e-8);
    }

    #[test]
    fn full_turn_with_offset_passes_each_vertex() {
        // Same sweep on a kite-like quadrilateral: θ_4 passes p_1, p_2
        // and p_3, each passage being one flip and one central crossing.
        let a = deg(&[0.0, 100.0, 200.0, 250.0]);
        let b = deg(&[0.0, 100.0, 200.0, 610.0]);
        let path = deform(&a, &b, 1.0, 2000).unwrap();
        let events = detect_events(&path, &EventOptions::default()).unwrap();
        let flips: Vec<usize> =
            events.iter().filter(|e| e.kind == EventKind::Flip).map(|e| e.edge.unwrap()).collect();
        let centrals: Vec<usize> =
            events.iter().filter(|e| e.kind == EventKind::Central).map(|e| e.edge.unwrap()).collect();
        // θ_4 − θ_3 goes 50° → 410°, θ_1 − θ_4 goes 110° → −250°.
        assert_eq!(flips, vec![3, 2]);
        assert_eq!(centrals, vec![2, 3]);
        let report = check_lemmas(&path, &with_oracle()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn constructed_flip() {
        // p_3 slides back past p_2: D_2 goes 10° → −10°.
        let a = deg(&[0.0, 100.0, 110.0, 250.0]);
        let b = deg(&[0.0, 100.0, 90.0, 250.0]);
        let path = deform(&a, &b, 1.0, 200).unwrap();
        let events = detect_events(&path, &EventOptions::default()).unwrap();
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!((e.kind, e.edge), (EventKind::Flip, Some(1)));
        assert!((e.t - 0.5).abs() < 1e-9);
        assert_eq!(e.before.eps.diff(&e.after.eps), vec![1]);
        let (b, a) = (e.before.report.clone().unwrap(), e.after.report.clone().unwrap());
        assert_eq!((b.h_sign, a.h_sign), (Sign::Minus, Sign::Plus));
        assert_eq!(b.d, a.d);
        let report = check_lemmas(&path, &with_oracle()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn constructed_central_crossing() {
        // p_4 slides back until edge 4 spans more than a half circle.
        let a = deg(&[0.0, 60.0, 120.0, 190.0]);
        let b = deg(&[0.0, 60.0, 120.0, 160.0]);
        let path = deform(&a, &b, 1.0, 300).unwrap();
        let events = detect_events(&path, &EventOptions::default()).unwrap();
        let kinds: Vec<_> = events.iter().map(|e| (e.kind, e.edge)).collect();
        assert_eq!(kinds, vec![(EventKind::Central, Some(3))]);
        let e = &events[0];
        assert!((e.t - 1.0 / 3.0).abs() < 1e-9);
        let (b, a) = (e.before.report.clone().unwrap(), e.after.report.clone().unwrap());
        assert_eq!(b.h_sign, a.h_sign);
        assert_eq!((b.d, a.d), (Sign::Plus, Sign::Minus));
        assert!(e.before.delta > 10.0 && e.after.delta < -1.0);
        let report = check_lemmas(&path, &with_oracle()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
    }

    #[test]
    fn pentagram_to_convex_pentagon() {
        let star = deg(&[0.0, 144.0, 288.0, 432.0, 576.0]);
        let convex = deg(&[0.0, 72.0, 144.0, 216.0, 288.0]);
        let path = deform(&star, &convex, 1.0, 2000).unwrap();
        let report = check_lemmas(&path, &with_oracle()).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert!(report.oracle_checked > 5);
        let edge_events: Vec<_> = report
            .events
            .iter()
            .filter(|e| e.kind != EventKind::DeltaZero)
            .map(|e| (e.kind, e.edge, (e.t * 1e6).round() / 1e6))
            .collect();
        // θ_1 − θ_5 = −576° + 288° t crosses −540° and −360°.
        assert_eq!(edge_events, vec![(EventKind::Central, Some(4), 0.125), (EventKind::Flip, Some(4), 0.75)]);
        // Ends at the convex pentagon: e = 5, d = +1, so 𝓗 = +1 and index 2.
        let last = Snapshot::at(&path, 1.0).report.unwrap();
        assert_eq!(last.h_sign, Sign::Plus);
        let fit = CircleFit { center: Point::ORIGIN, radius: 1.0 };
        assert_eq!(morse_index_on(&path.points_at(1.0), &fit).unwrap().index, 2);
    }

    #[test]
    fn random_paths_obey_the_transition_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut delta_zeros = 0;
        let mut checked = 0;
        for trial in 0..12 {
            let n = 5 + trial % 2;
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-TAU..2.0 * TAU)).collect();
            let path = deform(&a, &b, 1.0, 2000).unwrap();
            let Ok(report) = check_lemmas(&path, &with_oracle()) else { continue };
            checked += 1;
            assert!(report.passed(), "trial {trial}: {:?}", report.violations);
            delta_zeros += report.events.iter().filter(|e| e.kind == EventKind::DeltaZero).count();
        }
        assert!(checked >= 10);
        assert!(delta_zeros > 0);
    }
}
