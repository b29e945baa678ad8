//! Small dense linear algebra shared by the rest of the crate.
//!
//! Everything here works on column vectors in ℝᴺ with N at most a dozen or
//! so. Storage is nalgebra's dynamic matrices; the factorizations are written
//! out by hand so that their sign conventions are fixed and documented.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Numerical thresholds used throughout a computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual norm below which a vector counts as linearly dependent.
    pub ortho_tol: f64,
    /// Residual norm accepted by Newton correctors.
    pub newton_tol: f64,
    /// Distance at which a traced curve counts as closed.
    pub closure_tol: f64,
    /// Largest rotation angle (radians) allowed between consecutive frames.
    pub lift_angle_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ortho_tol: 1e-10,
            newton_tol: 1e-10,
            closure_tol: 1e-6,
            lift_angle_max: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("ortho_tol", self.ortho_tol),
            ("newton_tol", self.newton_tol),
            ("closure_tol", self.closure_tol),
            ("lift_angle_max", self.lift_angle_max),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::validation(
                    "tolerances positive",
                    format!("{name} = {value}"),
                ));
            }
        }
        if self.lift_angle_max >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::validation(
                "lift_angle_max < pi/2",
                format!("lift_angle_max = {}", self.lift_angle_max),
            ));
        }
        Ok(())
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass.
///
/// The output spans the same flag of subspaces as the input, in order, and
/// each output vector has positive inner product with its input.
pub fn orthonormalize(vectors: &[Vector], tol: &Tolerances) -> Result<Vec<Vector>> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let dim = first.len();
    if vectors.len() > dim {
        return Err(Error::RankDeficient(format!(
            "{} vectors in dimension {dim}",
            vectors.len()
        )));
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(vectors.len());
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        let mut u = v.clone();
        for _pass in 0..2 {
            for q in &basis {
                let c = q.dot(&u);
                u.axpy(-c, q, 1.0);
            }
        }
        let norm = u.norm();
        if !norm.is_finite() || norm < tol.ortho_tol {
            return Err(Error::RankDeficient(format!(
                "vector {i} has residual norm {norm:.3e}"
            )));
        }
        basis.push(u / norm);
    }
    Ok(basis)
}

/// Stack vectors as the rows of a matrix.
pub fn rows_to_matrix(rows: &[Vector]) -> Matrix {
    let ncols = rows.first().map_or(0, |r| r.len());
    Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vector> {
    (0..m.nrows()).map(|i| m.row(i).transpose()).collect()
}

/// Minimum-norm solution of the underdetermined system `a · x = b`.
///
/// Uses an LQ factorization built from [`orthonormalize`] on the rows of `a`.
pub fn least_squares(a: &Matrix, b: &Vector, tol: &Tolerances) -> Result<Vector> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            actual: b.len(),
        });
    }
    let q = orthonormalize(&matrix_rows(a), tol)?;
    let m = q.len();
    // a = L·Q with L lower triangular.
    let mut y = vec![0.0; m];
    for i in 0..m {
        let row = a.row(i);
        let mut acc = b[i];
        for (j, yj) in y.iter().enumerate().take(i) {
            acc -= row.dot(&q[j].transpose()) * yj;
        }
        let diag = row.dot(&q[i].transpose());
        y[i] = acc / diag;
    }
    let mut x = Vector::zeros(a.ncols());
    for (qi, yi) in q.iter().zip(&y) {
        x.axpy(*yi, qi, 1.0);
    }
    Ok(x)
}

/// Unit vector spanning the kernel of an n×(n+1) matrix of rank n.
///
/// With `previous` the sign makes ⟨t, previous⟩ > 0; without it the first
/// coordinate of magnitude above `ortho_tol` is made positive.
pub fn kernel_direction(j: &Matrix, previous: Option<&Vector>, tol: &Tolerances) -> Result<Vector> {
    let n = j.ncols();
    if j.nrows() + 1 != n {
        return Err(Error::RankDeficient(format!(
            "{}x{} matrix cannot have a one-dimensional kernel of full row rank",
            j.nrows(),
            n
        )));
    }
    let q = orthonormalize(&matrix_rows(j), tol)?;
    let mut best: Option<Vector> = None;
    let mut best_norm = -1.0;
    for k in 0..n {
        let mut r = Vector::zeros(n);
        r[k] = 1.0;
        for _pass in 0..2 {
            for qi in &q {
                let c = qi.dot(&r);
                r.axpy(-c, qi, 1.0);
            }
        }
        let norm = r.norm();
        if norm > best_norm {
            best_norm = norm;
            best = Some(r);
        }
    }
    let mut t = best.expect("n >= 1") / best_norm;
    let flip = match previous {
        Some(p) => t.dot(p) < 0.0,
        None => t
            .iter()
            .find(|c| c.abs() > tol.ortho_tol)
            .is_some_and(|c| *c < 0.0),
    };
    if flip {
        t = -t;
    }
    Ok(t)
}

/// Default central-difference step for a point `p`.
pub fn fd_step(p: &Vector) -> f64 {
    1e-6 * (1.0 + p.norm())
}

/// Central-difference Jacobian of `f` at `p`.
pub fn jacobian_fd<F>(f: F, p: &Vector, h: f64) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let n = p.len();
    let mut cols: Vec<Vector> = Vec::with_capacity(n);
    for k in 0..n {
        let mut plus = p.clone();
        let mut minus = p.clone();
        plus[k] += h;
        minus[k] -= h;
        let fp = f(&plus)?;
        let fm = f(&minus)?;
        if fp.len() != fm.len() {
            return Err(Error::EvaluationFailure(
                "map returned vectors of different lengths".into(),
            ));
        }
        cols.push((fp - fm) / (2.0 * h));
    }
    let m = cols.first().map_or(0, |c| c.len());
    Ok(Matrix::from_fn(m, n, |i, j| cols[j][i]))
}

/// A plane rotation by `angle` taking `e_a` towards `e_b` (a < b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub a: usize,
    pub b: usize,
    pub angle: f64,
}

impl Givens {
    pub fn matrix(&self, dim: usize) -> Matrix {
        let mut g = Matrix::identity(dim, dim);
        let (s, c) = self.angle.sin_cos();
        g[(self.a, self.a)] = c;
        g[(self.b, self.b)] = c;
        g[(self.b, self.a)] = s;
        g[(self.a, self.b)] = -s;
        g
    }

    pub fn scaled(&self, factor: f64) -> Givens {
        Givens {
            angle: self.angle * factor,
            ..*self
        }
    }
}

/// Factor a special orthogonal matrix as `G₁·G₂·…·G_K`.
///
/// Sub-diagonal entries are eliminated column by column, top to bottom.
/// Factors with zero angle are omitted.
pub fn givens_factorization(r: &Matrix) -> Result<Vec<Givens>> {
    let m = r.nrows();
    if r.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: r.ncols(),
        });
    }
    check_special_orthogonal(r, 1e-8)?;
    let mut work = r.clone();
    let mut factors = Vec::new();
    for col in 0..m {
        for row in (col + 1)..m {
            let x_a = work[(col, col)];
            let x_b = work[(row, col)];
            if x_b == 0.0 && x_a >= 0.0 {
                continue;
            }
            let phi = x_b.atan2(x_a);
            let g = Givens {
                a: col,
                b: row,
                angle: phi,
            };
            // Apply G(a, b, -phi) from the left to the two affected rows.
            let (s, c) = phi.sin_cos();
            for k in 0..m {
                let ra = work[(col, k)];
                let rb = work[(row, k)];
                work[(col, k)] = c * ra + s * rb;
                work[(row, k)] = -s * ra + c * rb;
            }
            factors.push(g);
        }
    }
    let defect = (&work - Matrix::identity(m, m)).norm();
    if defect > 1e-6 {
        return Err(Error::NotOrthogonal {
            defect,
            det: r.determinant(),
        });
    }
    Ok(factors)
}

/// Frobenius defect of `RᵀR − I`, with the determinant sign checked.
pub fn check_special_orthogonal(r: &Matrix, max_defect: f64) -> Result<()> {
    let m = r.nrows();
    let defect = (r.transpose() * r - Matrix::identity(m, m)).norm();
    let det = r.determinant();
    if !(defect <= max_defect) || det <= 0.0 {
        return Err(Error::NotOrthogonal { defect, det });
    }
    Ok(())
}

/// Orthogonal projection of `v` onto the complement of the orthonormal set `basis`.
pub fn project_out(v: &Vector, basis: &[Vector]) -> Vector {
    let mut u = v.clone();
    for _pass in 0..2 {
        for q in basis {
            let c = q.dot(&u);
            u.axpy(-c, q, 1.0);
        }
    }
    u
}

/// Complete an orthonormal set to an orthonormal basis using coordinate
/// vectors in order, skipping those that are (nearly) dependent.
pub fn complete_basis(partial: &[Vector], dim: usize) -> Vec<Vector> {
    let mut basis: Vec<Vector> = partial.to_vec();
    let mut extra = Vec::new();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = Vector::zeros(dim);
        e[k] = 1.0;
        let r = project_out(&e, &basis);
        let norm = r.norm();
        // Coordinate vectors with a small residual are skipped; the remaining
        // ones have residual at least 1/sqrt(dim) by pigeonhole.
        if norm > 0.5 / (dim as f64).sqrt() {
            let u = r / norm;
            basis.push(u.clone());
            extra.push(u);
        }
    }
    extra
}
