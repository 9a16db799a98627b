//! Enumeration of cyclic configurations.
//!
//! A cyclic configuration with orientation string `E` and winding `k` is
//! inscribed in a circle whose radius is a root of
//!
//! ```text
//! F(r) = Σ ε_i asin(l_i / 2r) − π k
//! ```
//!
//! on `r ≥ max l_i / 2`. Roots are bracketed on a fixed grid and refined by
//! bisection; each root is then turned back into vertex coordinates.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, OrientationString, Point};
use crate::linkage::{Configuration, Linkage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("radius {radius} is below the smallest admissible radius {min}")]
    Domain { radius: f64, min: f64 },
    #[error("edge {edge} is a diameter at radius {radius}; dF/dr is unbounded")]
    SingularDerivative { edge: usize, radius: f64 },
    #[error("orientation string has {found} entries, linkage has {expected} edges")]
    LengthMismatch { expected: usize, found: usize },
    #[error("descriptor does not close: angle sum misses 2πk by {gap:e}")]
    InconsistentDescriptor { gap: f64 },
    #[error("enumeration over 2^{0} orientation strings is not supported")]
    TooManyEdges(usize),
}

/// Tuning knobs for root bracketing and degeneracy detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Grid size on `(r_min, cap_factor * r_min]`.
    pub samples: usize,
    /// The search stops at `cap_factor * r_min`.
    pub cap_factor: f64,
    /// Bisection stops once the bracket is narrower than `root_rel_tol * r`.
    pub root_rel_tol: f64,
    /// Threshold for [`DegeneracyFlags`].
    pub degeneracy_tol: f64,
    /// Roots closer than `dedup_rel_tol * r` are merged.
    pub dedup_rel_tol: f64,
    /// `|F|` below this at a local extremum counts as a double root.
    pub residual_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            samples: 4096,
            cap_factor: 1e3,
            root_rel_tol: 1e-14,
            degeneracy_tol: 1e-7,
            dedup_rel_tol: 1e-10,
            residual_tol: 1e-10,
        }
    }
}

/// Near-degeneracy markers of a root `(L, E, r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegeneracyFlags {
    /// Edge `i` is (nearly) a diameter.
    pub central: Vec<bool>,
    /// `δ = Σ ε_i tan α_i` (nearly) vanishes: `r` is a multiple root.
    pub delta_zero: bool,
    /// Edge `i` subtends a vanishing arc.
    pub near_flip: Vec<bool>,
}

impl DegeneracyFlags {
    pub fn compute(linkage: &Linkage, eps: &OrientationString, radius: f64, tol: f64) -> Self {
        let mut central = Vec::with_capacity(linkage.n());
        let mut near_flip = Vec::with_capacity(linkage.n());
        let (mut delta, mut scale) = (0.0, 0.0);
        for (&l, &s) in linkage.lengths().iter().zip(eps.signs()) {
            central.push(2.0 * radius - l <= tol * 2.0 * radius);
            let alpha = half_angle(l, radius);
            near_flip.push(alpha < tol);
            let t = alpha.tan();
            delta += s.value() * t;
            scale += t;
        }
        DegeneracyFlags { central, delta_zero: delta.abs() < tol * scale, near_flip }
    }

    pub fn is_generic(&self) -> bool {
        !self.delta_zero && !self.central.iter().any(|&c| c) && !self.near_flip.iter().any(|&f| f)
    }
}

/// Smallest admissible circumradius: the longest edge as a diameter.
pub fn min_radius(linkage: &Linkage) -> f64 {
    linkage.max_length() / 2.0
}

fn half_angle(length: f64, radius: f64) -> f64 {
    (length / (2.0 * radius)).min(1.0).asin()
}

fn check_len(linkage: &Linkage, eps: &OrientationString) -> Result<(), SolverError> {
    if eps.len() != linkage.n() {
        return Err(SolverError::LengthMismatch { expected: linkage.n(), found: eps.len() });
    }
    Ok(())
}

/// `F(r) = Σ ε_i asin(l_i / 2r) − π k`.
pub fn f_value(
    linkage: &Linkage,
    eps: &OrientationString,
    k: i32,
    radius: f64,
) -> Result<f64, SolverError> {
    check_len(linkage, eps)?;
    let min = min_radius(linkage);
    if radius < min {
        return Err(SolverError::Domain { radius, min });
    }
    let sum: f64 = linkage
        .lengths()
        .iter()
        .zip(eps.signs())
        .map(|(&l, s)| s.value() * half_angle(l, radius))
        .sum();
    Ok(sum - PI * k as f64)
}

/// `dF/dr = −δ / r` with `δ = Σ ε_i tan α_i`.
pub fn f_derivative(
    linkage: &Linkage,
    eps: &OrientationString,
    radius: f64,
) -> Result<f64, SolverError> {
    check_len(linkage, eps)?;
    let min = min_radius(linkage);
    if radius < min {
        return Err(SolverError::Domain { radius, min });
    }
    let mut delta = 0.0;
    for (edge, (&l, s)) in linkage.lengths().iter().zip(eps.signs()).enumerate() {
        if l >= 2.0 * radius {
            return Err(SolverError::SingularDerivative { edge, radius });
        }
        delta += s.value() * half_angle(l, radius).tan();
    }
    Ok(-delta / radius)
}

/// A root of `F` together with its degeneracy markers.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRoot {
    pub radius: f64,
    pub flags: DegeneracyFlags,
}

/// Sampling grid shared by every `(E, k)` pair of one linkage: radii and
/// the per-edge `asin(l_i / 2r)` table.
struct Grid {
    radii: Vec<f64>,
    /// Row-major `samples × n`.
    asin: Vec<f64>,
    n: usize,
}

impl Grid {
    /// `r_min` itself, then radii `r_min + s` with `s` geometrically spaced
    /// from `1e-12 r_min` to `(cap - 1) r_min`, so the square-root
    /// steepness of `F` at `r_min` is resolved.
    fn new(linkage: &Linkage, opts: &SolverOptions) -> Grid {
        let r_min = min_radius(linkage);
        let samples = opts.samples.max(3);
        let (lo, hi) = (1e-12 * r_min, (opts.cap_factor - 1.0) * r_min);
        let ratio = (hi / lo).ln() / (samples - 2) as f64;
        let radii: Vec<f64> = std::iter::once(r_min)
            .chain((0..samples - 1).map(|j| r_min + lo * (ratio * j as f64).exp()))
            .collect();
        let n = linkage.n();
        let mut asin = Vec::with_capacity(samples * n);
        for &r in &radii {
            asin.extend(linkage.lengths().iter().map(|&l| half_angle(l, r)));
        }
        Grid { radii, asin, n }
    }

    /// `Σ ε_i asin(l_i / 2r_j)` for every grid point.
    fn angle_sums(&self, eps: &OrientationString) -> Vec<f64> {
        let w: Vec<f64> = eps.signs().iter().map(|s| s.value()).collect();
        self.asin
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(&w).map(|(a, s)| a * s).sum())
            .collect()
    }
}

/// Bisection until the bracket is narrower than `rel_tol * lo` and `|F|` is
/// below `1e-13`, or no float lies strictly inside. Near `r_min` the slope
/// of `F` is unbounded, so a narrow bracket alone does not close the
/// polygon.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 || (hi - lo <= rel_tol * lo && f_mid.abs() < 1e-13) {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimizer of a unimodal `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn feasible_windings(eps: &OrientationString) -> std::ops::RangeInclusive<i32> {
    // Σ ε_i α_i lies strictly inside (−m π/2, p π/2).
    let p = eps.positives() as i32;
    let m = eps.len() as i32 - p;
    let k_min = (-m).div_euclid(2) + 1;
    let k_max = (p + 1).div_euclid(2) - 1;
    k_min..=k_max
}

fn roots_on_grid(
    linkage: &Linkage,
    eps: &OrientationString,
    k: i32,
    grid: &Grid,
    sums: &[f64],
    opts: &SolverOptions,
) -> Vec<RadiusRoot> {
    let f = |r: f64| f_value(linkage, eps, k, r).expect("grid radii are admissible");
    let target = PI * k as f64;
    let g: Vec<f64> = sums.iter().map(|s| s - target).collect();
    let radii = &grid.radii;
    let mut found: Vec<(f64, bool)> = Vec::new();
    for j in 0..g.len() - 1 {
        if g[j] == 0.0 {
            found.push((radii[j], false));
        } else if (g[j] < 0.0) != (g[j + 1] < 0.0) && g[j + 1] != 0.0 {
            found.push((bisect(f, radii[j], radii[j + 1], opts.root_rel_tol), false));
        }
    }
    // Two roots inside one grid cell, or a tangential root: |F| dips
    // without a sign change.
    for j in 1..g.len() - 1 {
        let same = (g[j - 1] < 0.0) == (g[j] < 0.0) && (g[j] < 0.0) == (g[j + 1] < 0.0);
        if !(same && g[j].abs() <= g[j - 1].abs() && g[j].abs() <= g[j + 1].abs()) {
            continue;
        }
        let s = g[j].signum();
        let (r_star, v) = golden_min(|r| s * f(r), radii[j - 1], radii[j + 1]);
        if v < 0.0 {
            found.push((bisect(f, radii[j - 1], r_star, opts.root_rel_tol), false));
            found.push((bisect(f, r_star, radii[j + 1], opts.root_rel_tol), false));
        } else if v <= opts.residual_tol {
            found.push((r_star, true));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<RadiusRoot> = Vec::new();
    for (radius, tangential) in found {
        if let Some(last) = out.last_mut() {
            if (radius - last.radius).abs() < opts.dedup_rel_tol * radius {
                last.flags.delta_zero |= tangential;
                continue;
            }
        }
        let mut flags = DegeneracyFlags::compute(linkage, eps, radius, opts.degeneracy_tol);
        flags.delta_zero |= tangential;
        out.push(RadiusRoot { radius, flags });
    }
    out
}

/// All radii in `(r_min, cap_factor * r_min)` where `F_{L,E}` vanishes for
/// winding `k`, sorted ascending.
pub fn solve_radii(
    linkage: &Linkage,
    eps: &OrientationString,
    k: i32,
    opts: &SolverOptions,
) -> Result<Vec<RadiusRoot>, SolverError> {
    check_len(linkage, eps)?;
    if !feasible_windings(eps).contains(&k) {
        return Ok(Vec::new());
    }
    let grid = Grid::new(linkage, opts);
    let sums = grid.angle_sums(eps);
    Ok(roots_on_grid(linkage, eps, k, &grid, &sums, opts))
}

/// `(r, k, E, α, O)`: everything needed to rebuild a cyclic configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicDescriptor {
    pub radius: f64,
    pub winding: i32,
    pub eps: OrientationString,
    pub alphas: Vec<f64>,
    pub center: Point,
}

impl CyclicDescriptor {
    /// Descriptor of the root `radius` of `F_{L,E}` for winding `k`. The
    /// center sits on the left of the pinned first edge when `ε_1 = +1`.
    pub fn new(
        linkage: &Linkage,
        eps: OrientationString,
        winding: i32,
        radius: f64,
    ) -> Result<Self, SolverError> {
        check_len(linkage, &eps)?;
        let min = min_radius(linkage);
        if radius < min {
            return Err(SolverError::Domain { radius, min });
        }
        let alphas: Vec<f64> = linkage.lengths().iter().map(|&l| half_angle(l, radius)).collect();
        let l1 = linkage.lengths()[0];
        // Edge 1 runs along +y; its left side is −x.
        let offset = radius * alphas[0].cos();
        let center = Point::new(-eps.signs()[0].value() * offset, l1 / 2.0);
        Ok(CyclicDescriptor { radius, winding, eps, alphas, center })
    }

    /// `Σ 2 ε_i α_i − 2πk`.
    pub fn closure_gap(&self) -> f64 {
        let turn: f64 =
            self.alphas.iter().zip(self.eps.signs()).map(|(a, s)| 2.0 * s.value() * a).sum();
        turn - 2.0 * PI * self.winding as f64
    }

    /// Reflection across the pinned edge: `(E, k) ↦ (−E, −k)`.
    pub fn mirrored(&self) -> CyclicDescriptor {
        CyclicDescriptor {
            radius: self.radius,
            winding: -self.winding,
            eps: self.eps.negated(),
            alphas: self.alphas.clone(),
            center: self.center.reflect_y(),
        }
    }
}

/// Place the vertices on the descriptor's circle by the angle recurrence
/// `θ_{i+1} = θ_i + 2 ε_i α_i`, starting from the pinned `p_1`.
pub fn reconstruct(linkage: &Linkage, desc: &CyclicDescriptor) -> Result<Configuration, SolverError> {
    check_len(linkage, &desc.eps)?;
    let gap = desc.closure_gap();
    if gap.abs() > 1e-9 {
        return Err(SolverError::InconsistentDescriptor { gap });
    }
    let n = linkage.n();
    let mut theta = (Point::ORIGIN - desc.center).angle();
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        points.push(desc.center.polar(desc.radius, theta));
        theta += 2.0 * desc.eps.signs()[i].value() * desc.alphas[i];
    }
    points[0] = Point::ORIGIN;
    points[1] = Point::new(0.0, linkage.lengths()[0]);
    Ok(Configuration { points })
}

/// One enumerated cyclic configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicConfiguration {
    pub descriptor: CyclicDescriptor,
    pub configuration: Configuration,
    pub flags: DegeneracyFlags,
}

impl CyclicConfiguration {
    pub fn signed_area(&self) -> f64 {
        geometry::signed_area(&self.configuration.points).expect("n >= 3")
    }

    /// The convex, counterclockwise configuration.
    ///
    /// Its vertices go once around the circle counterclockwise. An edge with
    /// `ε = −1` then spans the long arc `2π − 2α`, so the condition is
    /// `k + #{ε_i = −1} = 1`: either all `ε = +1` and `k = 1`, or (center
    /// outside the polygon) one `ε = −1` and `k = 0`.
    pub fn is_convex_positive(&self) -> bool {
        let d = &self.descriptor;
        d.winding + (d.eps.len() - d.eps.positives()) as i32 == 1
    }

    /// The mirror of the convex configuration: `k − #{ε_i = +1} = −1`.
    pub fn is_convex_negative(&self) -> bool {
        let d = &self.descriptor;
        d.winding - d.eps.positives() as i32 == -1
    }
}

/// Largest `n` accepted by [`enumerate_cyclic`].
pub const MAX_ENUMERATION_EDGES: usize = 24;

/// Every cyclic configuration of `linkage`, over all orientation strings
/// and windings, sorted by `(k, E, r)`.
///
/// Cost grows as `2^n`.
pub fn enumerate_cyclic(
    linkage: &Linkage,
    opts: &SolverOptions,
) -> Result<Vec<CyclicConfiguration>, SolverError> {
    let n = linkage.n();
    if n > MAX_ENUMERATION_EDGES {
        return Err(SolverError::TooManyEdges(n));
    }
    let grid = Grid::new(linkage, opts);
    let perimeter = linkage.perimeter();
    let mut out: Vec<CyclicConfiguration> = Vec::new();
    for bits in 0..(1u64 << n) {
        let eps = OrientationString::from_bits(bits, n);
        let sums = grid.angle_sums(&eps);
        for k in feasible_windings(&eps) {
            for root in roots_on_grid(linkage, &eps, k, &grid, &sums, opts) {
                let descriptor = CyclicDescriptor::new(linkage, eps.clone(), k, root.radius)?;
                let Ok(configuration) = reconstruct(linkage, &descriptor) else {
                    // Only reachable for roots pinned against r_min, which
                    // carry the central flag.
                    debug_assert!(!root.flags.is_generic());
                    continue;
                };
                if let Ok(measured) =
                    geometry::edge_orientations(&configuration.points, descriptor.center)
                {
                    if measured != eps {
                        continue;
                    }
                }
                let duplicate = out.iter().any(|c| {
                    c.configuration
                        .points
                        .iter()
                        .zip(&configuration.points)
                        .all(|(a, b)| a.dist(*b) < 1e-9 * perimeter)
                });
                if !duplicate {
                    out.push(CyclicConfiguration { descriptor, configuration, flags: root.flags });
                }
            }
        }
    }
    out.sort_by(|a, b| {
        let (da, db) = (&a.descriptor, &b.descriptor);
        da.winding
            .cmp(&db.winding)
            .then_with(|| da.eps.cmp(&db.eps))
            .then_with(|| da.radius.total_cmp(&db.radius))
    });
    Ok(out)
}
