use super::structure::{point_structure, stacked_d_eta};
use super::{KContactSystem, StructureCondition};
use crate::chart::{
    lie_bracket_fd, rows_to_matrix, Matrix, Point, Vector, VectorField, DEFAULT_RANK_TOL,
};
use crate::error::{Error, Result};

/// Residual tolerance for the pointwise Reeb solve.
pub const REEB_TOL: f64 = 1e-8;

/// The k Reeb vectors at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ReebFrame {
    pub vectors: Vec<Vector>,
    /// Max-norm residual of the stacked defining system.
    pub residual: f64,
}

/// The `(k + km) × m` matrix of the defining relations `⟨η^α, R⟩` and
/// `i(R)dη^α`.
pub fn reeb_system_matrix(sys: &KContactSystem, x: &Point) -> Result<Matrix> {
    let m = sys.dim();
    let eta = rows_to_matrix(&sys.eta_rows(x)?)?;
    let d_stack = stacked_d_eta(&sys.d_etas(x)?);
    let mut a = Matrix::zeros(eta.nrows() + d_stack.nrows(), m);
    a.view_mut((0, 0), (eta.nrows(), m)).copy_from(&eta);
    a.view_mut((eta.nrows(), 0), (d_stack.nrows(), m))
        .copy_from(&d_stack);
    Ok(a)
}

/// Solves `⟨η^α, R_β⟩ = δ^α_β`, `i(R_β)dη^α = 0` by least squares.
pub fn solve_reeb(sys: &KContactSystem, x: &Point, tol: f64) -> Result<ReebFrame> {
    let k = sys.k();
    let m = sys.dim();
    let a = reeb_system_matrix(sys, x)?;
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > DEFAULT_RANK_TOL * largest)
        .count();
    if largest == 0.0 || rank < m {
        let ps = point_structure(sys, x, DEFAULT_RANK_TOL)?;
        let condition = ps
            .failed(k)
            .first()
            .copied()
            .unwrap_or(StructureCondition::Transversality);
        return Err(Error::StructureViolated {
            condition,
            point: x.as_slice().to_vec(),
        });
    }

    let mut vectors = Vec::with_capacity(k);
    let mut residual: f64 = 0.0;
    for beta in 0..k {
        let mut b = Vector::zeros(a.nrows());
        b[beta] = 1.0;
        let r = svd
            .solve(&b, DEFAULT_RANK_TOL * largest)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        residual = residual.max((&a * &r - &b).amax());
        vectors.push(r);
    }
    if !(residual <= tol) {
        return Err(Error::ReebResidual { residual, tol });
    }
    Ok(ReebFrame { vectors, residual })
}

/// The Reeb field `R_α`, solved pointwise wherever it is evaluated.
#[derive(Clone, Debug)]
pub struct ReebField {
    sys: KContactSystem,
    alpha: usize,
}

impl ReebField {
    pub fn new(sys: &KContactSystem, alpha: usize) -> Result<Self> {
        if alpha >= sys.k() {
            return Err(Error::InvalidArgument(format!(
                "Reeb index {alpha} out of range for k = {}",
                sys.k()
            )));
        }
        Ok(ReebField {
            sys: sys.clone(),
            alpha,
        })
    }
}

impl VectorField for ReebField {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vector> {
        let p = Point::new(x.to_vec())?;
        Ok(solve_reeb(&self.sys, &p, REEB_TOL)?
            .vectors
            .swap_remove(self.alpha))
    }
}

pub fn reeb_fields(sys: &KContactSystem) -> Vec<ReebField> {
    (0..sys.k())
        .map(|a| ReebField {
            sys: sys.clone(),
            alpha: a,
        })
        .collect()
}

/// `max_{α<β} |[R_α, R_β](x)|` with finite-difference brackets.
pub fn reeb_commutator_norm(sys: &KContactSystem, x: &Point, h: f64) -> Result<f64> {
    let fields = reeb_fields(sys);
    let mut worst: f64 = 0.0;
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            worst = worst.max(lie_bracket_fd(&fields[a], &fields[b], x, h)?.amax());
        }
    }
    Ok(worst)
}
