//! Numerical constrained-Hessian oracle.
//!
//! The moduli space is the zero set of `g_i = |p_i − p_{i+1}|² − l_i²`
//! (edges 2..n) in the free coordinates `(x_3, y_3, …, x_n, y_n)`. At a
//! critical point of the signed area `A` there are multipliers `λ` with
//! `∇A = Jᵀλ`, and the Morse index is the number of negative eigenvalues of
//! the Lagrangian Hessian `∇²A − Σ λ_i ∇²g_i` restricted to `ker J`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;
use crate::linkage::Linkage;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("need at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("{points} points for a linkage with {edges} edges")]
    SizeMismatch { points: usize, edges: usize },
    #[error("constraint Jacobian has rank {rank}, expected {expected}")]
    NonRegular { rank: usize, expected: usize },
}

/// Thresholds for rank and eigenvalue decisions, both relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Singular values below `rank_tol * σ_max` count as zero.
    pub rank_tol: f64,
    /// Eigenvalues below `eig_tol * max|eig|` count as zero.
    pub eig_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { rank_tol: 1e-9, eig_tol: 1e-7 }
    }
}

/// Eigenvalue sign counts of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub negatives: usize,
    pub zeros: usize,
    pub positives: usize,
}

impl Inertia {
    /// Sign of the determinant: `(−1)^negatives`, or 0 if singular.
    pub fn det_sign(&self) -> i8 {
        if self.zeros > 0 {
            0
        } else if self.negatives.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub multipliers: Vec<f64>,
    /// `‖∇A − Jᵀλ‖ / max(1, ‖∇A‖)`.
    pub residual: f64,
    pub inertia: Inertia,
    pub det_sign: i8,
    /// Morse index; `None` when the Hessian is singular.
    pub index: Option<usize>,
}

impl OracleVerdict {
    pub fn is_morse(&self) -> bool {
        self.index.is_some()
    }
}

fn free_dim(n: usize) -> usize {
    2 * (n - 2)
}

/// Column of coordinate `axis` (0 = x, 1 = y) of vertex `v`, if free.
fn col(v: usize, axis: usize) -> Option<usize> {
    (v >= 2).then(|| 2 * (v - 2) + axis)
}

fn check(points: &[Point], linkage: &Linkage) -> Result<usize, OracleError> {
    let n = points.len();
    if n < 3 {
        return Err(OracleError::TooFewVertices(n));
    }
    if linkage.n() != n {
        return Err(OracleError::SizeMismatch { points: n, edges: linkage.n() });
    }
    Ok(n)
}

/// Gradient of the shoelace area with respect to the free coordinates.
pub fn area_gradient(points: &[Point]) -> DVector<f64> {
    let n = points.len();
    let mut g = DVector::zeros(free_dim(n.max(2)));
    for v in 2..n {
        let (prev, next) = (points[v - 1], points[(v + 1) % n]);
        g[2 * (v - 2)] = 0.5 * (next.y - prev.y);
        g[2 * (v - 2) + 1] = 0.5 * (prev.x - next.x);
    }
    g
}

/// Constant Hessian of the shoelace area in the free coordinates.
pub fn area_hessian(n: usize) -> DMatrix<f64> {
    let m = free_dim(n);
    let mut h = DMatrix::zeros(m, m);
    for i in 0..n {
        let j = (i + 1) % n;
        // A ∋ ½ (x_i y_j − x_j y_i)
        if let (Some(xi), Some(yj)) = (col(i, 0), col(j, 1)) {
            h[(xi, yj)] += 0.5;
            h[(yj, xi)] += 0.5;
        }
        if let (Some(xj), Some(yi)) = (col(j, 0), col(i, 1)) {
            h[(xj, yi)] -= 0.5;
            h[(yi, xj)] -= 0.5;
        }
    }
    h
}

/// The constraints `g` for edges 2..n; edge 1 is fixed by the pinning.
pub fn constraint_values(points: &[Point], linkage: &Linkage) -> DVector<f64> {
    let n = points.len();
    DVector::from_iterator(
        n - 1,
        (1..n).map(|e| {
            let d = points[e].dist(points[(e + 1) % n]);
            d * d - linkage.lengths()[e].powi(2)
        }),
    )
}

/// Rows: edges 2..n. Row for edge `(a, b)` holds `2(p_a − p_b)` in the
/// columns of `a` and `2(p_b − p_a)` in those of `b`, where free.
pub fn jacobian(points: &[Point]) -> DMatrix<f64> {
    let n = points.len();
    let mut j = DMatrix::zeros(n - 1, free_dim(n));
    for e in 1..n {
        let (a, b) = (e, (e + 1) % n);
        let d = points[a] - points[b];
        for (v, s) in [(a, 2.0), (b, -2.0)] {
            if let (Some(cx), Some(cy)) = (col(v, 0), col(v, 1)) {
                j[(e - 1, cx)] = s * d.x;
                j[(e - 1, cy)] = s * d.y;
            }
        }
    }
    j
}

fn singular_values_sorted(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values_sorted(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel_tol * top && v > 0.0).count()
}

/// [`jacobian`], checked to have full row rank `n − 1`.
pub fn constraint_jacobian(
    points: &[Point],
    linkage: &Linkage,
    opts: &OracleOptions,
) -> Result<DMatrix<f64>, OracleError> {
    let n = check(points, linkage)?;
    let j = jacobian(points);
    let rank = numerical_rank(&j, opts.rank_tol);
    if rank < n - 1 {
        return Err(OracleError::NonRegular { rank, expected: n - 1 });
    }
    Ok(j)
}

/// Least-squares multipliers `λ` for `Jᵀλ = ∇A` and the relative residual.
pub fn criticality_residual(
    points: &[Point],
    linkage: &Linkage,
    opts: &OracleOptions,
) -> Result<(DVector<f64>, f64), OracleError> {
    let n = check(points, linkage)?;
    let j = constraint_jacobian(points, linkage, opts)?;
    let grad = area_gradient(points);
    let jt = j.transpose();
    let svd = jt.clone().svd(true, true);
    let top = svd.singular_values.max();
    let lambda = svd.solve(&grad, opts.rank_tol * top).expect("U and V were computed");
    if n == 3 {
        // Zero-dimensional moduli space: nothing to be critical along.
        return Ok((lambda, 0.0));
    }
    let residual = (&grad - &jt * &lambda).norm() / grad.norm().max(1.0);
    Ok((lambda, residual))
}

/// `∇²A − Σ λ_i ∇²g_i` in the free coordinates.
pub fn lagrangian_hessian(n: usize, lambda: &DVector<f64>) -> DMatrix<f64> {
    let mut w = area_hessian(n);
    for e in 1..n {
        let (a, b) = (e, (e + 1) % n);
        let l = lambda[e - 1];
        for axis in 0..2 {
            let (ca, cb) = (col(a, axis), col(b, axis));
            if let Some(ca) = ca {
                w[(ca, ca)] -= 2.0 * l;
            }
            if let Some(cb) = cb {
                w[(cb, cb)] -= 2.0 * l;
            }
            if let (Some(ca), Some(cb)) = (ca, cb) {
                w[(ca, cb)] += 2.0 * l;
                w[(cb, ca)] += 2.0 * l;
            }
        }
    }
    w
}

/// Orthonormal basis of `ker J` as columns, from the right singular
/// vectors of `J` padded to a square matrix.
pub fn tangent_basis(j: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = j.shape();
    let mut square = DMatrix::zeros(cols.max(rows), cols);
    square.view_mut((0, 0), (rows, cols)).copy_from(j);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("V requested");
    let top = svd.singular_values.max();
    let null: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rel_tol * top)
        .collect();
    let mut basis = DMatrix::zeros(cols, null.len());
    for (c, &i) in null.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// The Lagrangian Hessian restricted to the tangent space, `Zᵀ W Z`.
pub fn projected_hessian(
    points: &[Point],
    linkage: &Linkage,
    lambda: &DVector<f64>,
    opts: &OracleOptions,
) -> Result<DMatrix<f64>, OracleError> {
    let n = check(points, linkage)?;
    let j = constraint_jacobian(points, linkage, opts)?;
    let z = tangent_basis(&j, opts.rank_tol);
    if z.ncols() != n - 3 {
        return Err(OracleError::NonRegular { rank: free_dim(n) - z.ncols(), expected: n - 1 });
    }
    Ok(restrict(&lagrangian_hessian(n, lambda), &z))
}

/// `Zᵀ W Z`, symmetrized.
pub fn restrict(w: &DMatrix<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    let h = z.transpose() * w * z;
    (&h + h.transpose()) * 0.5
}

/// Eigenvalue sign counts; `|eig| < tol * max|eig|` counts as zero.
pub fn inertia(matrix: &DMatrix<f64>, tol: f64) -> Inertia {
    if matrix.nrows() == 0 {
        return Inertia { negatives: 0, zeros: 0, positives: 0 };
    }
    let eig = matrix.clone().symmetric_eigen().eigenvalues;
    let scale = eig.amax();
    let mut out = Inertia { negatives: 0, zeros: 0, positives: 0 };
    for &v in eig.iter() {
        if scale == 0.0 || v.abs() < tol * scale {
            out.zeros += 1;
        } else if v < 0.0 {
            out.negatives += 1;
        } else {
            out.positives += 1;
        }
    }
    out
}

/// Full oracle run on one configuration.
pub fn oracle_index(
    points: &[Point],
    linkage: &Linkage,
    opts: &OracleOptions,
) -> Result<OracleVerdict, OracleError> {
    let (lambda, residual) = criticality_residual(points, linkage, opts)?;
    let hess = projected_hessian(points, linkage, &lambda, opts)?;
    let inertia = inertia(&hess, opts.eig_tol);
    let det_sign = inertia.det_sign();
    Ok(OracleVerdict {
        multipliers: lambda.iter().copied().collect(),
        residual,
        inertia,
        det_sign,
        index: (inertia.zeros == 0).then_some(inertia.negatives),
    })
}

/// A random orthogonal `dim × dim` matrix (QR of a uniform random matrix,
/// signs fixed by the diagonal of `R`).
pub fn random_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Inertia of the projected Hessian in the tangent frame `Z Q`.
///
/// The inertia of a quadratic form does not depend on the basis, so this
/// must agree with [`oracle_index`] for every orthogonal `Q`.
pub fn reframed_inertia(
    points: &[Point],
    linkage: &Linkage,
    opts: &OracleOptions,
    q: &DMatrix<f64>,
) -> Result<Inertia, OracleError> {
    let n = check(points, linkage)?;
    let (lambda, _) = criticality_residual(points, linkage, opts)?;
    let j = constraint_jacobian(points, linkage, opts)?;
    let z = tangent_basis(&j, opts.rank_tol);
    if z.ncols() != q.nrows() {
        return Err(OracleError::NonRegular { rank: free_dim(n) - z.ncols(), expected: n - 1 });
    }
    let h = restrict(&lagrangian_hessian(n, &lambda), &(z * q));
    Ok(inertia(&h, opts.eig_tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::signed_area;

    fn pts(raw: &[[f64; 2]]) -> Vec<Point> {
        raw.iter().copied().map(Point::from).collect()
    }

    fn square() -> (Vec<Point>, Linkage) {
        (
            pts(&[[0.0, 0.0], [0.0, 1.0], [-1.0, 1.0], [-1.0, 0.0]]),
            Linkage::new(vec![1.0; 4]).unwrap(),
        )
    }

    fn set_free(points: &[Point], x: &DVector<f64>) -> Vec<Point> {
        let mut out = points.to_vec();
        for v in 2..points.len() {
            out[v] = Point::new(x[2 * (v - 2)], x[2 * (v - 2) + 1]);
        }
        out
    }

    fn free(points: &[Point]) -> DVector<f64> {
        DVector::from_iterator(
            free_dim(points.len()),
            points[2..].iter().flat_map(|p| [p.x, p.y]),
        )
    }

    #[test]
    fn square_gradient_entry() {
        let (p, _) = square();
        // ∂A/∂x_3 = (y_4 − y_2)/2
        assert_eq!(area_gradient(&p)[0], -0.5);
    }

    #[test]
    fn gradient_and_jacobian_match_finite_differences() {
        let p = pts(&[[0.0, 0.0], [0.0, 1.2], [-0.7, 1.9], [-1.6, 0.8], [-0.9, -0.3]]);
        let l = Linkage::from_points(&p).unwrap();
        let x = free(&p);
        let h = 1e-6;
        let g = area_gradient(&p);
        let j = jacobian(&p);
        for c in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[c] += h;
            xm[c] -= h;
            let (pp, pm) = (set_free(&p, &xp), set_free(&p, &xm));
            let fd = (signed_area(&pp).unwrap() - signed_area(&pm).unwrap()) / (2.0 * h);
            assert!((fd - g[c]).abs() < 1e-8);
            let dg = (constraint_values(&pp, &l) - constraint_values(&pm, &l)) / (2.0 * h);
            for r in 0..j.nrows() {
                assert!((dg[r] - j[(r, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn square_jacobian_is_regular() {
        let (p, l) = square();
        let j = constraint_jacobian(&p, &l, &OracleOptions::default()).unwrap();
        assert_eq!(j.shape(), (3, 4));
        assert_eq!(numerical_rank(&j, 1e-9), 3);
    }

    #[test]
    fn collinear_configuration_is_singular() {
        let p = pts(&[[0.0, 0.0], [0.0, 1.0], [0.0, 2.0], [0.0, 1.0]]);
        let l = Linkage::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            constraint_jacobian(&p, &l, &OracleOptions::default()),
            Err(OracleError::NonRegular { .. })
        ));
    }

    #[test]
    fn triangle_has_zero_dimensional_moduli() {
        let p = pts(&[[0.0, 0.0], [0.0, 1.0], [-0.8, 0.4]]);
        let l = Linkage::from_points(&p).unwrap();
        let v = oracle_index(&p, &l, &OracleOptions::default()).unwrap();
        assert_eq!(v.residual, 0.0);
        assert_eq!(v.index, Some(0));
        assert_eq!(v.det_sign, 1);
    }

    #[test]
    fn inertia_examples() {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 2.0]));
        assert_eq!(inertia(&d, 1e-7), Inertia { negatives: 1, zeros: 0, positives: 1 });
        assert_eq!(inertia(&DMatrix::zeros(2, 2), 1e-7), Inertia { negatives: 0, zeros: 2, positives: 0 });
        let one = DMatrix::from_element(1, 1, -3.0);
        assert_eq!(inertia(&one, 1e-7), Inertia { negatives: 1, zeros: 0, positives: 0 });
        assert_eq!(inertia(&one, 1e-7).det_sign(), -1);
    }

    #[test]
    fn square_is_a_nondegenerate_maximum() {
        let (p, l) = square();
        let v = oracle_index(&p, &l, &OracleOptions::default()).unwrap();
        assert!(v.residual < 1e-12);
        assert_eq!(v.index, Some(1));
        assert_eq!(v.det_sign, -1);
    }

    #[test]
    fn non_cyclic_configuration_is_not_critical() {
        // A kite: valid configuration of (1, 1, 1.2, 1.2)-ish lengths, off any circle.
        let p = pts(&[[0.0, 0.0], [0.0, 1.0], [-0.9, 1.4], [-1.1, 0.2]]);
        let l = Linkage::from_points(&p).unwrap();
        let (_, res) = criticality_residual(&p, &l, &OracleOptions::default()).unwrap();
        assert!(res > 1e-2, "{res}");
    }

    /// Newton projection back onto `g = 0` along the row space of `J`.
    fn project(p: &[Point], l: &Linkage, mut x: DVector<f64>) -> DVector<f64> {
        for _ in 0..50 {
            let q = set_free(p, &x);
            let g = constraint_values(&q, l);
            if g.norm() < 1e-15 {
                break;
            }
            let j = jacobian(&q);
            let jjt = &j * j.transpose();
            let step = j.transpose() * jjt.lu().solve(&g).unwrap();
            x -= step;
        }
        x
    }

    #[test]
    fn projected_hessian_matches_second_differences() {
        let l = Linkage::new(vec![1.3, 0.7, 1.1, 0.9, 1.6]).unwrap();
        let opts = OracleOptions::default();
        for item in crate::solver::enumerate_cyclic(&l, &Default::default()).unwrap() {
            let p = &item.configuration.points;
            let (lambda, _) = criticality_residual(p, &l, &opts).unwrap();
            let j = constraint_jacobian(p, &l, &opts).unwrap();
            let z = tangent_basis(&j, opts.rank_tol);
            let h = restrict(&lagrangian_hessian(p.len(), &lambda), &z);
            assert_eq!(h.shape(), (2, 2));
            let x0 = free(p);
            let a0 = signed_area(p).unwrap();
            let step = 1e-4;
            // Probe both basis directions and their sum.
            for dir in [z.column(0).into_owned(), z.column(1).into_owned(), z.column(0) + z.column(1)] {
                let along = |s: f64| {
                    let x = project(p, &l, &x0 + &dir * s);
                    signed_area(&set_free(p, &x)).unwrap()
                };
                let fd = (along(step) + along(-step) - 2.0 * a0) / (step * step);
                let coef = z.transpose() * &dir;
                let exact = (coef.transpose() * &h * &coef)[(0, 0)];
                assert!((fd - exact).abs() < 1e-3 * (1.0 + exact.abs()), "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn inertia_does_not_depend_on_tangent_frame() {
        let l = Linkage::new(vec![1.3, 0.7, 1.1, 0.9, 1.6, 1.2]).unwrap();
        let opts = OracleOptions::default();
        // A fixed orthogonal matrix mixing the three tangent directions.
        let q = DMatrix::from_row_slice(3, 3, &[0.3, -1.2, 0.5, 0.9, 0.4, -0.7, 0.2, 1.1, 0.8])
            .qr()
            .q();
        for item in crate::solver::enumerate_cyclic(&l, &Default::default()).unwrap() {
            let p = &item.configuration.points;
            let (lambda, _) = criticality_residual(p, &l, &opts).unwrap();
            let j = constraint_jacobian(p, &l, &opts).unwrap();
            let z = tangent_basis(&j, opts.rank_tol);
            let w = lagrangian_hessian(p.len(), &lambda);
            let a = inertia(&restrict(&w, &z), opts.eig_tol);
            let b = inertia(&restrict(&w, &(&z * &q)), opts.eig_tol);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn random_rotations_are_orthogonal_and_keep_inertia() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = random_rotation(4, &mut rng);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).amax() < 1e-12);
        let l = Linkage::new(vec![1.0, 1.2, 0.8, 1.5, 0.9, 1.1, 1.3]).unwrap();
        let opts = OracleOptions::default();
        for item in crate::solver::enumerate_cyclic(&l, &Default::default()).unwrap() {
            let p = &item.configuration.points;
            let base = oracle_index(p, &l, &opts).unwrap();
            let q = random_rotation(4, &mut rng);
            assert_eq!(reframed_inertia(p, &l, &opts, &q).unwrap(), base.inertia);
        }
    }
}
