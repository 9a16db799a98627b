//! Closed-form sign rules for cyclic configurations.
//!
//! For a non-central cyclic polygon with orientation string `E` and half
//! angles `α_i`, put `δ = Σ ε_i tan α_i`, `d = sign δ`, and let `e` count the
//! `+1` entries of `E`. The sign of the Hessian determinant of the signed
//! area is `𝓗 = −d · (−1)^e`.
//!
//! The Morse index is the number of sign changes in
//! `𝓗(P_3), 𝓗(P_4), …, 𝓗(P_n)`, where `P_i = (p_1, …, p_i)` is closed by
//! the chord `p_i → p_1` and `𝓗(P_3) = +1` by convention.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    self, edge_orientations, CircleFit, GeometryError, OrientationString, Point, Sign, CENTRAL_TOL,
};
use crate::linkage::Configuration;

/// `|δ| < DELTA_REL_TOL · Σ tan α_i` is treated as `δ = 0`.
pub const DELTA_REL_TOL: f64 = 1e-9;

/// Circle-fit tolerance used when a configuration is given without its
/// circle.
pub const FIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MorseError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("edge {edge} is a diameter (α = π/2)")]
    Central { edge: usize },
    #[error("δ = {delta:e} is zero within tolerance; 𝓗 is undefined")]
    NonGeneric { delta: f64 },
    #[error("{} alphas for {} orientations", .alphas, .eps)]
    LengthMismatch { alphas: usize, eps: usize },
    #[error("subconfiguration P_{size} must have 3 ≤ size < n")]
    BadSize { size: usize },
    #[error("chord p_{size} → p_1 passes through the center")]
    CentralSubconfiguration { size: usize },
    #[error("chord p_{size} → p_1 vanishes")]
    VanishingChord { size: usize },
    #[error("subconfiguration P_{size}: {source}")]
    Subconfiguration {
        size: usize,
        #[source]
        source: Box<MorseError>,
    },
}

/// `δ = Σ ε_i tan α_i`.
pub fn delta(alphas: &[f64], eps: &OrientationString) -> Result<f64, MorseError> {
    if alphas.len() != eps.len() {
        return Err(MorseError::LengthMismatch { alphas: alphas.len(), eps: eps.len() });
    }
    let mut sum = 0.0;
    for (edge, (&a, s)) in alphas.iter().zip(eps.signs()).enumerate() {
        if a >= FRAC_PI_2 - CENTRAL_TOL {
            return Err(MorseError::Central { edge });
        }
        sum += s.value() * a.tan();
    }
    Ok(sum)
}

/// `𝓗 = −sign(δ) · (−1)^e`; refuses `|δ| < tol`.
pub fn hessian_sign(eps: &OrientationString, delta: f64, tol: f64) -> Result<Sign, MorseError> {
    if delta.abs() < tol || delta.is_nan() {
        return Err(MorseError::NonGeneric { delta });
    }
    Ok(-Sign::of(delta) * Sign::parity(eps.positives()))
}

/// `(δ, d, e, 𝓗)` of one cyclic polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub delta: f64,
    pub d: Sign,
    pub e: usize,
    pub h_sign: Sign,
}

impl SignReport {
    /// Relative tolerance: `|δ| ≥ DELTA_REL_TOL · Σ tan α_i`.
    pub fn new(alphas: &[f64], eps: &OrientationString) -> Result<SignReport, MorseError> {
        let delta = delta(alphas, eps)?;
        let scale: f64 = alphas.iter().map(|a| a.tan()).sum();
        let h_sign = hessian_sign(eps, delta, DELTA_REL_TOL * scale)?;
        Ok(SignReport { delta, d: Sign::of(delta), e: eps.positives(), h_sign })
    }

    /// Sign data of a closed polygon inscribed in `fit`.
    pub fn of_polygon(points: &[Point], fit: &CircleFit) -> Result<SignReport, MorseError> {
        let eps = edge_orientations(points, fit.center)?;
        let n = points.len();
        let alphas: Vec<f64> = (0..n)
            .map(|i| {
                let l = points[i].dist(points[(i + 1) % n]);
                (l / (2.0 * fit.radius)).min(1.0).asin()
            })
            .collect();
        SignReport::new(&alphas, &eps)
    }
}

/// The closing chord `p_size → p_1` of a subconfiguration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub length: f64,
    pub eps: Sign,
    pub alpha: f64,
}

/// Closing chord of `P_size = (p_1, …, p_size)` (1-based `size`, with
/// `3 ≤ size ≤ n − 1`), oriented by the left/right rule on `p_size → p_1`.
pub fn closing_chord(points: &[Point], fit: &CircleFit, size: usize) -> Result<Chord, MorseError> {
    if size < 3 || size >= points.len() {
        return Err(MorseError::BadSize { size });
    }
    let (from, to) = (points[size - 1], points[0]);
    let chord = to - from;
    let length = chord.norm();
    if length < CENTRAL_TOL * fit.radius {
        return Err(MorseError::VanishingChord { size });
    }
    let cross = chord.cross(fit.center - from);
    if cross.abs() < CENTRAL_TOL * length * fit.radius {
        return Err(MorseError::CentralSubconfiguration { size });
    }
    let alpha = (length / (2.0 * fit.radius)).min(1.0).asin();
    Ok(Chord { length, eps: Sign::of(cross), alpha })
}

fn subconfiguration_sign(points: &[Point], fit: &CircleFit, size: usize) -> Result<Sign, MorseError> {
    let tag = |source: MorseError| MorseError::Subconfiguration { size, source: Box::new(source) };
    if size < points.len() {
        closing_chord(points, fit, size).map_err(tag)?;
    }
    let report = SignReport::of_polygon(&points[..size], fit).map_err(|e| match e {
        MorseError::Geometry(GeometryError::CentralEdge { edge }) if edge == size - 1 => {
            tag(MorseError::CentralSubconfiguration { size })
        }
        other => tag(other),
    })?;
    Ok(report.h_sign)
}

/// `𝓗(P_3), …, 𝓗(P_n)` with the first entry fixed to `+1`.
pub fn subconfig_sign_sequence(points: &[Point], fit: &CircleFit) -> Result<Vec<Sign>, MorseError> {
    let n = points.len();
    if n < 3 {
        return Err(GeometryError::TooFewPoints { needed: 3, found: n }.into());
    }
    let mut seq = vec![Sign::Plus];
    for size in 4..=n {
        seq.push(subconfiguration_sign(points, fit, size)?);
    }
    Ok(seq)
}

/// Number of adjacent sign changes.
pub fn sign_changes(seq: &[Sign]) -> usize {
    seq.windows(2).filter(|w| w[0] != w[1]).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub h_sequence: Vec<Sign>,
    pub index: usize,
    pub sign_report: SignReport,
}

/// Morse index from the subconfiguration sign sequence, for a polygon on a
/// known circle.
pub fn morse_index_on(points: &[Point], fit: &CircleFit) -> Result<MorseReport, MorseError> {
    let sign_report = SignReport::of_polygon(points, fit)?;
    let h_sequence = subconfig_sign_sequence(points, fit)?;
    let index = sign_changes(&h_sequence);
    Ok(MorseReport { h_sequence, index, sign_report })
}

/// Morse index of a cyclic configuration; the circle is fitted first.
pub fn morse_index(config: &Configuration) -> Result<MorseReport, MorseError> {
    let fit = geometry::fit_circle(&config.points, FIT_TOL)?;
    morse_index_on(&config.points, &fit)
}

/// How [`stable_morse_index`] reached its answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexRoute {
    /// The subconfiguration sequence of the configuration itself.
    Direct,
    /// The sequence of a nearby cyclic configuration, reached by sliding
    /// vertices along the circle.
    Perturbed,
}

/// Angular nudges tried by [`stable_morse_index`], in radians. Symmetric
/// polygons can have `δ(P_i)` vanishing to second order in the nudge, so
/// these stay well above `sqrt(DELTA_REL_TOL)`.
const NUDGES: [f64; 3] = [1e-3, -3e-3, 1e-2];

/// Like [`morse_index_on`], but if some subconfiguration is degenerate
/// (vanishing or central chord, `δ(P_i) = 0`), retry on a configuration
/// obtained by moving each vertex a tiny distance along the circle.
///
/// A nondegenerate critical point persists with the same index under small
/// changes of the edge lengths, and sliding vertices along the circle keeps
/// the polygon cyclic, so the perturbed polygon has the same Morse index.
/// The full polygon itself must be nondegenerate.
pub fn stable_morse_index(
    points: &[Point],
    fit: &CircleFit,
) -> Result<(MorseReport, IndexRoute), MorseError> {
    let sign_report = SignReport::of_polygon(points, fit)?;
    let first = match morse_index_on(points, fit) {
        Ok(report) => return Ok((report, IndexRoute::Direct)),
        Err(e) => e,
    };
    for nudge in NUDGES {
        let moved: Vec<Point> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                // Distinct, irregular offsets per vertex.
                let shift = nudge * ((i as f64 + 1.0) * 0.754_877_666).fract();
                fit.center.polar(fit.radius, (*p - fit.center).angle() + shift)
            })
            .collect();
        let Ok(h_sequence) = subconfig_sign_sequence(&moved, fit) else { continue };
        let Ok(moved_report) = SignReport::of_polygon(&moved, fit) else { continue };
        // The nudge must not cross a flip, central or δ = 0 event of P.
        if moved_report.d != sign_report.d
            || edge_orientations(&moved, fit.center)? != edge_orientations(points, fit.center)?
        {
            continue;
        }
        let index = sign_changes(&h_sequence);
        return Ok((MorseReport { h_sequence, index, sign_report }, IndexRoute::Perturbed));
    }
    Err(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn plus(n: usize) -> OrientationString {
        OrientationString::all(Sign::Plus, n)
    }

    /// Regular `{n/step}` polygon of unit side, counterclockwise (or
    /// clockwise for `dir = -1`), starting at angle `phase`.
    fn regular(n: usize, step: usize, dir: f64) -> (Vec<Point>, CircleFit) {
        let turn = 2.0 * PI * step as f64 / n as f64;
        let r = 1.0 / (2.0 * (turn / 2.0).sin());
        let center = Point::new(0.4, -0.2);
        let points = (0..n).map(|i| center.polar(r, 0.1 + dir * turn * i as f64)).collect();
        (points, CircleFit { center, radius: r })
    }

    #[test]
    fn delta_examples() {
        let a4 = [FRAC_PI_4; 4];
        assert!((delta(&a4, &plus(4)).unwrap() - 4.0).abs() < 1e-12);
        assert!((delta(&a4, &plus(4).negated()).unwrap() + 4.0).abs() < 1e-12);
        let star = [2.0 * PI / 5.0; 5];
        let d = delta(&star, &plus(5)).unwrap();
        assert!((d - 5.0 * (72f64).to_radians().tan()).abs() < 1e-12);
        assert!((d - 15.3884).abs() < 1e-4);
        assert!(matches!(
            delta(&[FRAC_PI_2, 0.3, 0.3], &plus(3)),
            Err(MorseError::Central { edge: 0 })
        ));
    }

    #[test]
    fn hessian_sign_examples() {
        assert_eq!(hessian_sign(&plus(5), 3.0, 1e-12).unwrap(), Sign::Plus);
        assert_eq!(hessian_sign(&plus(4), 4.0, 1e-12).unwrap(), Sign::Minus);
        assert_eq!(hessian_sign(&plus(5).negated(), -3.0, 1e-12).unwrap(), Sign::Plus);
        assert!(matches!(
            hessian_sign(&plus(4), 1e-15, 1e-12),
            Err(MorseError::NonGeneric { .. })
        ));
    }

    #[test]
    fn chord_of_convex_pentagon() {
        let (p, fit) = regular(5, 1, 1.0);
        let c = closing_chord(&p, &fit, 4).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((c.length - golden).abs() < 1e-12);
        assert_eq!(c.eps, Sign::Plus);
        assert!((c.alpha - 72f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn chord_of_pentagram() {
        let (p, fit) = regular(5, 2, 1.0);
        let c = closing_chord(&p, &fit, 4).unwrap();
        assert!((c.length - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert_eq!(c.eps, Sign::Minus);
        assert!((c.alpha - 36f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn square_diagonal_is_central() {
        let sq: Vec<Point> =
            [[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]].map(Point::from).to_vec();
        let fit = CircleFit { center: Point::new(-0.5, 0.5), radius: 2f64.sqrt() / 2.0 };
        assert_eq!(
            closing_chord(&sq, &fit, 3),
            Err(MorseError::CentralSubconfiguration { size: 3 })
        );
        assert_eq!(closing_chord(&sq, &fit, 4), Err(MorseError::BadSize { size: 4 }));
    }

    #[test]
    fn convex_pentagon_sequence() {
        let (p, fit) = regular(5, 1, 1.0);
        let seq = subconfig_sign_sequence(&p, &fit).unwrap();
        assert_eq!(seq, vec![Sign::Plus, Sign::Minus, Sign::Plus]);
        assert_eq!(morse_index_on(&p, &fit).unwrap().index, 2);
    }

    #[test]
    fn anticonvex_pentagon_sequence() {
        let (p, fit) = regular(5, 1, -1.0);
        let seq = subconfig_sign_sequence(&p, &fit).unwrap();
        assert_eq!(seq, vec![Sign::Plus; 3]);
        assert_eq!(morse_index_on(&p, &fit).unwrap().index, 0);
    }

    #[test]
    fn pentagram_sequence() {
        // Frozen after cross-checking with the Hessian oracle (index 0,
        // det sign +1): P_4 has e = 3 and δ = 3 tan 72° − tan 36° > 0.
        let (p, fit) = regular(5, 2, 1.0);
        let seq = subconfig_sign_sequence(&p, &fit).unwrap();
        assert_eq!(seq, vec![Sign::Plus; 3]);
        let report = morse_index_on(&p, &fit).unwrap();
        assert_eq!(report.index, 0);
        assert_eq!(report.sign_report.e, 5);
        assert_eq!(report.sign_report.h_sign, Sign::Plus);
        // Reversed pentagram: P_4 has e = 1, δ < 0, so 𝓗(P_4) = −1.
        let (p, fit) = regular(5, 2, -1.0);
        let report = morse_index_on(&p, &fit).unwrap();
        assert_eq!(report.h_sequence, vec![Sign::Plus, Sign::Minus, Sign::Plus]);
        assert_eq!(report.index, 2);
    }

    #[test]
    fn morse_index_of_square_and_kite() {
        let sq = Configuration::new(
            [[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]].map(Point::from).to_vec(),
        );
        // P_3 is never evaluated, so its diameter chord is harmless.
        let report = morse_index(&sq).unwrap();
        assert_eq!(report.h_sequence, vec![Sign::Plus, Sign::Minus]);
        assert_eq!(report.index, 1);
        let kite = Configuration::new(
            [[0.0, 0.0], [0.0, 1.0], [-0.9, 1.4], [-1.1, 0.2]].map(Point::from).to_vec(),
        );
        assert!(matches!(morse_index(&kite), Err(MorseError::Geometry(GeometryError::NotCyclic { .. }))));
    }

    #[test]
    fn degenerate_subconfiguration_falls_back_to_nudge() {
        // Equilateral pentagon, E = (+,+,+,+,−): p_4 = p_1.
        let r = 1.0 / 3f64.sqrt();
        let center = Point::new(0.3, 0.1);
        let turns = [1.0, 1.0, 1.0, 1.0];
        let mut theta = 0.2;
        let mut p = vec![center.polar(r, theta)];
        for t in turns {
            theta += t * 2.0 * PI / 3.0;
            p.push(center.polar(r, theta));
        }
        let fit = CircleFit { center, radius: r };
        assert!(matches!(
            morse_index_on(&p, &fit),
            Err(MorseError::Subconfiguration { size: 4, .. })
        ));
        let (report, route) = stable_morse_index(&p, &fit).unwrap();
        assert_eq!(route, IndexRoute::Perturbed);
        assert_eq!(report.index, 1);
        // 𝓗 comes from the polygon itself: e = 4, δ = 3 tan 60° > 0.
        assert_eq!(report.sign_report.h_sign, Sign::Minus);
    }

    #[test]
    fn sign_changes_counts_adjacent_flips() {
        use Sign::{Minus as M, Plus as P};
        assert_eq!(sign_changes(&[P]), 0);
        assert_eq!(sign_changes(&[P, M, M, P, M]), 3);
    }
}
