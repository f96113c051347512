//! Pointwise multilinear algebra and finite-difference operators on a single
//! coordinate chart.
//!
//! Conventions, fixed for the whole crate:
//!
//! * a 1-form `η = η_I dx^I` is stored as its component covector `η_I`;
//! * its exterior derivative is the antisymmetric matrix
//!   `(dη)_{IJ} = ∂_I η_J − ∂_J η_I`;
//! * contraction acts on the first slot, `(i(v)ω)_J = Σ_I v^I ω_{IJ}`;
//! * the wedge of two covectors is `(a∧b)_{IJ} = a_I b_J − a_J b_I`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Finite-difference step for O(1)-scaled charts.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

pub(crate) type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub(crate) type VectorFn = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;
pub(crate) type MatrixFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// A point of the chart. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vector);

impl std::ops::Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::from_vector(Vector::from_vec(coords))
    }

    pub fn from_vector(coords: Vector) -> Result<Self> {
        if coords.iter().all(|c| c.is_finite()) {
            Ok(Point(coords))
        } else {
            Err(Error::NonFinite("point coordinates"))
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &Vector {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub(crate) fn expect_dim(&self, dim: usize, context: &'static str) -> Result<()> {
        expect_len(self.dim(), dim, context)
    }
}

pub(crate) fn expect_len(got: usize, expected: usize, context: &'static str) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

pub(crate) fn check_finite(v: &Vector, context: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )))
    }
}

/// A smooth function on the chart, with an optional analytic gradient.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    value: ScalarFn,
    gradient: Option<VectorFn>,
}

impl ScalarField {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField {
            dim,
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            dim,
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::with_gradient(dim, move |_| c, move |_| Vector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        x.expect_dim(self.dim, "scalar field")?;
        let v = (self.value)(x.as_slice());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("scalar field value"))
        }
    }

    /// Analytic gradient when supplied, otherwise central differences with step `h`.
    pub fn gradient(&self, x: &Point, h: f64) -> Result<Vector> {
        x.expect_dim(self.dim, "scalar field")?;
        match &self.gradient {
            Some(g) => {
                let grad = g(x.as_slice());
                expect_len(grad.len(), self.dim, "scalar field gradient")?;
                check_finite(&grad, "scalar field gradient")?;
                Ok(grad)
            }
            None => fd_gradient(|y| (self.value)(y), x, h),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// A differential 1-form on the chart together with its exterior derivative.
#[derive(Clone)]
pub struct CoordinateForm {
    dim: usize,
    coeffs: VectorFn,
    dcoeffs: MatrixFn,
}

impl CoordinateForm {
    pub fn new(
        dim: usize,
        coeffs: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
        dcoeffs: impl Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        CoordinateForm {
            dim,
            coeffs: Arc::new(coeffs),
            dcoeffs: Arc::new(dcoeffs),
        }
    }

    /// Form whose exterior derivative is taken by finite differences of the
    /// coefficients.
    pub fn from_coeffs(
        dim: usize,
        coeffs: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        let coeffs: VectorFn = Arc::new(coeffs);
        let inner = coeffs.clone();
        let dcoeffs = move |x: &[f64]| {
            fd_curl(|y| inner(y), x, DEFAULT_FD_STEP)
                .unwrap_or_else(|_| Matrix::from_element(dim, dim, f64::NAN))
        };
        CoordinateForm {
            dim,
            coeffs,
            dcoeffs: Arc::new(dcoeffs),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self, x: &Point) -> Result<Vector> {
        x.expect_dim(self.dim, "1-form")?;
        self.coeffs_raw(x.as_slice())
    }

    pub(crate) fn coeffs_raw(&self, x: &[f64]) -> Result<Vector> {
        let c = (self.coeffs)(x);
        expect_len(c.len(), self.dim, "1-form coefficients")?;
        check_finite(&c, "1-form coefficients")?;
        Ok(c)
    }

    pub fn exterior_derivative(&self, x: &Point) -> Result<Matrix> {
        x.expect_dim(self.dim, "1-form")?;
        let d = (self.dcoeffs)(x.as_slice());
        if d.nrows() != self.dim || d.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "exterior derivative",
                expected: self.dim,
                got: d.nrows().max(d.ncols()),
            });
        }
        if !d.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("exterior derivative"));
        }
        Ok(d)
    }

    /// Finite-difference curl of the coefficients, independent of `dcoeffs`.
    pub fn fd_exterior_derivative(&self, x: &Point, h: f64) -> Result<Matrix> {
        x.expect_dim(self.dim, "1-form")?;
        fd_curl(|y| (self.coeffs)(y), x.as_slice(), h)
    }
}

impl fmt::Debug for CoordinateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoordinateForm")
            .field("dim", &self.dim)
            .finish()
    }
}

/// Anything that can be evaluated as a tangent vector at chart points.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> Result<Vector>;
}

/// A vector field given by a coordinate expression.
#[derive(Clone)]
pub struct VectorFieldExpr {
    dim: usize,
    value: VectorFn,
}

impl VectorFieldExpr {
    pub fn new(dim: usize, value: impl Fn(&[f64]) -> Vector + Send + Sync + 'static) -> Self {
        VectorFieldExpr {
            dim,
            value: Arc::new(value),
        }
    }

    /// Constant coordinate field `∂/∂x^index`.
    pub fn coordinate(dim: usize, index: usize) -> Self {
        Self::new(dim, move |_| {
            let mut v = Vector::zeros(dim);
            v[index] = 1.0;
            v
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, move |_| Vector::zeros(dim))
    }

    pub fn at(&self, x: &Point) -> Result<Vector> {
        x.expect_dim(self.dim, "vector field")?;
        self.eval(x.as_slice())
    }
}

impl VectorField for VectorFieldExpr {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<Vector> {
        let v = (self.value)(x);
        expect_len(v.len(), self.dim, "vector field value")?;
        check_finite(&v, "vector field value")?;
        Ok(v)
    }
}

impl fmt::Debug for VectorFieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldExpr")
            .field("dim", &self.dim)
            .finish()
    }
}

/// `i(v)ω` with contraction on the first slot: `w_J = Σ_I v^I ω_{IJ}`.
pub fn interior_product_2form(omega: &Matrix, v: &Vector) -> Result<Vector> {
    if omega.nrows() != omega.ncols() {
        return Err(Error::DimensionMismatch {
            context: "2-form must be square",
            expected: omega.nrows(),
            got: omega.ncols(),
        });
    }
    expect_len(v.len(), omega.nrows(), "interior product")?;
    Ok(omega.tr_mul(v))
}

/// `(a∧b)_{IJ} = a_I b_J − a_J b_I`.
pub fn wedge(a: &Vector, b: &Vector) -> Result<Matrix> {
    expect_len(b.len(), a.len(), "wedge product")?;
    Ok(a * b.transpose() - b * a.transpose())
}

/// Central-difference gradient `(f(x+he_I) − f(x−he_I)) / 2h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &Point, h: f64) -> Result<Vector> {
    fd_gradient_try(|y| Ok(f(y)), x.as_slice(), h)
}

pub(crate) fn fd_gradient_try(
    f: impl Fn(&[f64]) -> Result<f64>,
    x: &[f64],
    h: f64,
) -> Result<Vector> {
    check_step(h)?;
    let mut y = x.to_vec();
    let mut grad = Vector::zeros(x.len());
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = f(&y)?;
        y[i] = x[i] - h;
        let fm = f(&y)?;
        y[i] = x[i];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFinite("finite-difference gradient"));
        }
        grad[i] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// Central-difference Jacobian `J[(i, j)] = ∂F_i/∂x^j`.
fn fd_jacobian(f: impl Fn(&[f64]) -> Result<Vector>, x: &[f64], h: f64) -> Result<Matrix> {
    check_step(h)?;
    let m = x.len();
    let mut y = x.to_vec();
    let mut cols = Vec::with_capacity(m);
    for j in 0..m {
        y[j] = x[j] + h;
        let fp = f(&y)?;
        y[j] = x[j] - h;
        let fm = f(&y)?;
        y[j] = x[j];
        let col = (fp - fm) / (2.0 * h);
        check_finite(&col, "finite-difference Jacobian")?;
        cols.push(col);
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok(Matrix::from_fn(rows, m, |i, j| cols[j][i]))
}

fn fd_curl(coeffs: impl Fn(&[f64]) -> Vector, x: &[f64], h: f64) -> Result<Matrix> {
    let jac = fd_jacobian(|y| Ok(coeffs(y)), x, h)?;
    // jac[(J, I)] = ∂_I η_J
    Ok(jac.transpose() - &jac)
}

/// Directional derivative of a vector field along `dir`, by a symmetric
/// difference along the unit direction.
fn directional_derivative(
    field: &dyn VectorField,
    x: &[f64],
    dir: &Vector,
    h: f64,
) -> Result<Vector> {
    let norm = dir.norm();
    if norm == 0.0 {
        return Ok(Vector::zeros(field.dim()));
    }
    let base = Vector::from_column_slice(x);
    let step = dir * (h / norm);
    let fp = field.eval((&base + &step).as_slice())?;
    let fm = field.eval((&base - &step).as_slice())?;
    Ok((fp - fm) * (norm / (2.0 * h)))
}

/// `[X, Y]^i = X(Y^i) − Y(X^i)` by central differences.
pub fn lie_bracket_fd(
    x_field: &dyn VectorField,
    y_field: &dyn VectorField,
    x: &Point,
    h: f64,
) -> Result<Vector> {
    check_step(h)?;
    x.expect_dim(x_field.dim(), "Lie bracket")?;
    x.expect_dim(y_field.dim(), "Lie bracket")?;
    let xv = x_field.eval(x.as_slice())?;
    let yv = y_field.eval(x.as_slice())?;
    let x_of_y = directional_derivative(y_field, x.as_slice(), &xv, h)?;
    let y_of_x = directional_derivative(x_field, x.as_slice(), &yv, h)?;
    Ok(x_of_y - y_of_x)
}

/// Lie derivative of a 1-form by Cartan's formula `L_Y η = i(Y)dη + d(i(Y)η)`.
pub fn lie_derivative_oneform(
    y_field: &dyn VectorField,
    eta: &CoordinateForm,
    x: &Point,
    h: f64,
) -> Result<Vector> {
    x.expect_dim(eta.dim(), "Lie derivative")?;
    x.expect_dim(y_field.dim(), "Lie derivative")?;
    let y = y_field.eval(x.as_slice())?;
    let contracted = interior_product_2form(&eta.exterior_derivative(x)?, &y)?;
    let exact = fd_gradient_try(
        |p| {
            let c = eta.coeffs_raw(p)?;
            let v = y_field.eval(p)?;
            Ok(c.dot(&v))
        },
        x.as_slice(),
        h,
    )?;
    Ok(contracted + exact)
}

/// Derivative of a function along a vector field, `Y(f) = ⟨df, Y⟩`.
pub fn lie_derivative_scalar(
    y_field: &dyn VectorField,
    f: &ScalarField,
    x: &Point,
    h: f64,
) -> Result<f64> {
    let grad = f.gradient(x, h)?;
    let y = y_field.eval(x.as_slice())?;
    expect_len(y.len(), grad.len(), "Lie derivative of function")?;
    Ok(grad.dot(&y))
}

/// Singular-value summary of a matrix at a relative threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values in decreasing order.
    pub singular_values: Vec<f64>,
    /// Smallest retained singular value relative to the largest (1 when rank 0).
    pub smallest_retained: f64,
    /// Largest discarded singular value relative to the largest (0 when none).
    pub largest_discarded: f64,
}

struct Decomposition {
    info: RankInfo,
    nullspace: Vec<Vector>,
}

fn decompose(matrix: &Matrix, tol: f64) -> Result<Decomposition> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    let cols = matrix.ncols();
    if matrix.nrows() == 0 || cols == 0 {
        return Ok(Decomposition {
            info: RankInfo {
                rank: 0,
                singular_values: Vec::new(),
                smallest_retained: 1.0,
                largest_discarded: 0.0,
            },
            nullspace: (0..cols)
                .map(|i| Vector::from_fn(cols, |j, _| f64::from(u8::from(i == j))))
                .collect(),
        });
    }
    if !matrix.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("rank computation"));
    }
    // Pad wide matrices with zero rows so V is square.
    let padded = if matrix.nrows() < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.view_mut((0, 0), (matrix.nrows(), cols)).copy_from(matrix);
        p
    } else {
        matrix.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or(Error::NonFinite("singular value decomposition"))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let largest = sv.first().copied().unwrap_or(0.0);

    let (rank, smallest_retained, largest_discarded) = if largest == 0.0 {
        (0, 1.0, 0.0)
    } else {
        let rank = sv.iter().filter(|&&s| s > tol * largest).count();
        let retained = sv[rank - 1] / largest;
        let discarded = sv.get(rank).map_or(0.0, |s| s / largest);
        (rank, retained, discarded)
    };
    let nullspace = order[rank..]
        .iter()
        .map(|&i| v_t.row(i).transpose())
        .collect();

    Ok(Decomposition {
        info: RankInfo {
            rank,
            singular_values: sv,
            smallest_retained,
            largest_discarded,
        },
        nullspace,
    })
}

pub fn rank_info(matrix: &Matrix, tol: f64) -> Result<RankInfo> {
    decompose(matrix, tol).map(|d| d.info)
}

/// Number of singular values above `tol · σ_max` of the matrix whose rows are `rows`.
pub fn rank_with_tolerance(rows: &[Vector], tol: f64) -> Result<usize> {
    let matrix = rows_to_matrix(rows)?;
    Ok(decompose(&matrix, tol)?.info.rank)
}

/// Orthonormal basis of the numerical nullspace.
pub fn nullspace_with_tolerance(matrix: &Matrix, tol: f64) -> Result<Vec<Vector>> {
    Ok(decompose(matrix, tol)?.nullspace)
}

pub(crate) fn rows_to_matrix(rows: &[Vector]) -> Result<Matrix> {
    let Some(first) = rows.first() else {
        return Ok(Matrix::zeros(0, 0));
    };
    let m = first.len();
    for r in rows {
        expect_len(r.len(), m, "matrix rows")?;
    }
    Ok(Matrix::from_fn(rows.len(), m, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn p(xs: &[f64]) -> Point {
        Point::new(xs.to_vec()).unwrap()
    }

    /// η = ds − p dq in (q, p, s).
    fn contact_form() -> CoordinateForm {
        CoordinateForm::new(
            3,
            |x| v(&[-x[1], 0.0, 1.0]),
            |_| {
                let mut d = Matrix::zeros(3, 3);
                d[(0, 1)] = 1.0;
                d[(1, 0)] = -1.0;
                d
            },
        )
    }

    #[test]
    fn interior_product_examples() {
        let zero = Matrix::zeros(3, 3);
        assert_eq!(
            interior_product_2form(&zero, &v(&[1.0, 2.0, 3.0])).unwrap(),
            v(&[0.0, 0.0, 0.0])
        );

        let area = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(
            interior_product_2form(&area, &v(&[1.0, 0.0])).unwrap(),
            v(&[0.0, 1.0])
        );

        // du∧dp on (u, p, a, b); i(∂_p)(du∧dp) = −du by hand
        let du = v(&[1.0, 0.0, 0.0, 0.0]);
        let dp = v(&[0.0, 1.0, 0.0, 0.0]);
        let omega = wedge(&du, &dp).unwrap();
        assert_eq!(
            interior_product_2form(&omega, &dp).unwrap(),
            v(&[-1.0, 0.0, 0.0, 0.0])
        );
    }

    #[test]
    fn interior_product_rejects_mismatch() {
        let omega = Matrix::zeros(3, 3);
        assert!(matches!(
            interior_product_2form(&omega, &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn fd_gradient_examples() {
        let g = fd_gradient(|x| x.iter().sum(), &p(&[0.3, -2.0, 5.0]), 1e-5).unwrap();
        for gi in g.iter() {
            assert_abs_diff_eq!(*gi, 1.0, epsilon = 1e-9);
        }

        let g = fd_gradient(|x| x[0] * x[0], &p(&[1.0]), 1e-3).unwrap();
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-9);

        let f = |x: &[f64]| x[0].sin() * x[1].cos();
        let g = fd_gradient(f, &p(&[0.3, 0.7]), 1e-4).unwrap();
        let exact = [0.3f64.cos() * 0.7f64.cos(), -(0.3f64.sin()) * 0.7f64.sin()];
        assert_abs_diff_eq!(g[0], exact[0], epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], exact[1], epsilon = 1e-8);
    }

    #[test]
    fn fd_gradient_rejects_non_finite_and_bad_step() {
        assert!(matches!(
            fd_gradient(|x| 1.0 / x[0], &p(&[1e-9]), 1e-9),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            fd_gradient(|x| x[0], &p(&[1.0]), 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn fd_gradient_converges_at_order_two() {
        let f = |x: &[f64]| (1.3 * x[0]).exp() * x[1].sin();
        let at = p(&[0.4, 0.9]);
        let exact = 1.3 * (1.3f64 * 0.4).exp() * 0.9f64.sin();
        let err = |h: f64| (fd_gradient(f, &at, h).unwrap()[0] - exact).abs();
        let ratio = err(1e-2) / err(5e-3);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn lie_bracket_examples() {
        let d1 = VectorFieldExpr::coordinate(2, 0);
        let d2 = VectorFieldExpr::coordinate(2, 1);
        assert_eq!(
            lie_bracket_fd(&d1, &d2, &p(&[0.5, 0.5]), 1e-5).unwrap(),
            v(&[0.0, 0.0])
        );

        // X = x∂_y, Y = y∂_x; [X, Y] = x∂_x − y∂_y by hand
        let xf = VectorFieldExpr::new(2, |x| v(&[0.0, x[0]]));
        let yf = VectorFieldExpr::new(2, |x| v(&[x[1], 0.0]));
        let b = lie_bracket_fd(&xf, &yf, &p(&[1.0, 2.0]), 1e-5).unwrap();
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[1], -2.0, epsilon = 1e-9);

        let w = VectorFieldExpr::new(2, |x| v(&[x[0] * x[1], x[0].sin()]));
        let self_bracket = lie_bracket_fd(&w, &w, &p(&[0.3, -0.4]), 1e-5).unwrap();
        assert!(self_bracket.amax() < 1e-12);
    }

    #[test]
    fn lie_derivative_examples() {
        let eta = contact_form();
        let reeb = VectorFieldExpr::coordinate(3, 2);
        let l = lie_derivative_oneform(&reeb, &eta, &p(&[0.2, 0.7, -0.1]), 1e-5).unwrap();
        assert!(l.amax() < 1e-12);

        let dq = VectorFieldExpr::coordinate(3, 0);
        let l = lie_derivative_oneform(&dq, &eta, &p(&[0.2, 0.7, -0.1]), 1e-5).unwrap();
        assert!(l.amax() < 1e-9);

        // L_{q∂q}(ds − p dq) = −p dq by hand
        let scale = VectorFieldExpr::new(3, |x| v(&[x[0], 0.0, 0.0]));
        let l = lie_derivative_oneform(&scale, &eta, &p(&[1.0, 1.0, 0.0]), 1e-5).unwrap();
        assert_abs_diff_eq!(l[0], -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(l[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(l[2], 0.0, epsilon = 1e-9);
    }

    /// Polynomial-coefficient forms and fields with hand-derived Lie derivatives.
    #[test]
    fn lie_derivative_matches_polynomial_suite() {
        // η = x y dx + z² dy + x dz, Y = (y, x z, 1) on R³.
        let eta = CoordinateForm::from_coeffs(3, |x| v(&[x[0] * x[1], x[2] * x[2], x[0]]));
        let y = VectorFieldExpr::new(3, |x| v(&[x[1], x[0] * x[2], 1.0]));
        // i(Y)η = x y² + x z³ + x
        // d(i(Y)η) = (y² + z³ + 1, 2xy, 3xz²)
        // dη_{IJ} = ∂_I η_J − ∂_J η_I:
        //   (x,y): ∂_x η_y − ∂_y η_x = −x ; (x,z): ∂_x η_z − ∂_z η_x = 1 ; (y,z): ∂_y η_z − ∂_z η_y = −2z
        // i(Y)dη_J = Σ_I Y^I dη_IJ:
        //   J=x: Y^y(x) + Y^z(−1) = xz·x − 1
        //   J=y: Y^x(−x) + Y^z(2z) = −xy + 2z
        //   J=z: Y^x(1) + Y^y(−2z) = y − 2xz²
        let exact = |x: f64, yy: f64, z: f64| {
            v(&[
                yy * yy + z.powi(3) + 1.0 + x * x * z - 1.0,
                2.0 * x * yy - x * yy + 2.0 * z,
                3.0 * x * z * z + yy - 2.0 * x * z * z,
            ])
        };
        for pt in [[0.3, -0.2, 0.5], [1.0, 1.0, 1.0], [-0.7, 0.4, 0.1]] {
            let got = lie_derivative_oneform(&y, &eta, &p(&pt), 1e-4).unwrap();
            let want = exact(pt[0], pt[1], pt[2]);
            assert!((got - want).amax() < 1e-6);
        }
    }

    #[test]
    fn fd_exterior_derivative_matches_analytic() {
        let eta = contact_form();
        let at = p(&[0.4, -1.2, 3.0]);
        let fd = eta.fd_exterior_derivative(&at, 1e-5).unwrap();
        let exact = eta.exterior_derivative(&at).unwrap();
        assert!((fd - &exact).amax() < 1e-9);
        assert!((&exact + exact.transpose()).amax() < 1e-12);
    }

    #[test]
    fn rank_examples() {
        let id = [
            v(&[1.0, 0.0, 0.0]),
            v(&[0.0, 1.0, 0.0]),
            v(&[0.0, 0.0, 1.0]),
        ];
        assert_eq!(rank_with_tolerance(&id, DEFAULT_RANK_TOL).unwrap(), 3);
        assert!(
            nullspace_with_tolerance(&rows_to_matrix(&id).unwrap(), DEFAULT_RANK_TOL)
                .unwrap()
                .is_empty()
        );

        let dup = [v(&[1.0, 0.0]), v(&[1.0, 0.0])];
        assert_eq!(rank_with_tolerance(&dup, DEFAULT_RANK_TOL).unwrap(), 1);

        assert_eq!(rank_with_tolerance(&[], DEFAULT_RANK_TOL).unwrap(), 0);
        let empty = Matrix::zeros(0, 4);
        assert_eq!(
            nullspace_with_tolerance(&empty, DEFAULT_RANK_TOL)
                .unwrap()
                .len(),
            4
        );
        assert!(rank_with_tolerance(&id, 0.0).is_err());
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace_with_tolerance(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(ns.len(), 2);
        for n in &ns {
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-12);
            assert!((&a * n).amax() < 1e-12);
        }
        assert!(ns[0].dot(&ns[1]).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn interior_product_is_antisymmetric_and_linear(
            entries in prop::collection::vec(-5.0f64..5.0, 16),
            a in prop::collection::vec(-5.0f64..5.0, 4),
            b in prop::collection::vec(-5.0f64..5.0, 4),
            s in -3.0f64..3.0,
        ) {
            let m = Matrix::from_row_slice(4, 4, &entries);
            let omega = &m - m.transpose();
            let a = v(&a);
            let b = v(&b);
            let ia = interior_product_2form(&omega, &a).unwrap();
            prop_assert!(ia.dot(&a).abs() < 1e-10);
            let lhs = interior_product_2form(&omega, &(&a * s + &b)).unwrap();
            let rhs = &ia * s + interior_product_2form(&omega, &b).unwrap();
            prop_assert!((lhs - rhs).amax() < 1e-10);
        }

        #[test]
        fn lie_bracket_is_antisymmetric(c in prop::collection::vec(-2.0f64..2.0, 6), x in -1.0f64..1.0, y in -1.0f64..1.0) {
            let cc = c.clone();
            let xf = VectorFieldExpr::new(2, move |p| v(&[c[0] * p[0] * p[1] + c[1], c[2] * p[0].sin()]));
            let yf = VectorFieldExpr::new(2, move |p| v(&[cc[3] * p[1] * p[1], cc[4] * p[0] + cc[5] * p[1]]));
            let at = p(&[x, y]);
            let ab = lie_bracket_fd(&xf, &yf, &at, 1e-5).unwrap();
            let ba = lie_bracket_fd(&yf, &xf, &at, 1e-5).unwrap();
            prop_assert!((ab + ba).amax() < 1e-8);
        }
    }
}
