use std::fmt;

use serde::Serialize;

use super::KContactSystem;
use crate::chart::{rank_info, rows_to_matrix, Matrix, Point, RankInfo};
use crate::error::{Error, Result};

/// The three defining conditions of a k-contact structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StructureCondition {
    /// The contact codistribution spanned by the `η^α` has rank k.
    ContactRank,
    /// The Reeb distribution `∩ ker dη^α` has rank k.
    ReebRank,
    /// The contact and Reeb distributions intersect trivially.
    Transversality,
}

impl fmt::Display for StructureCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureCondition::ContactRank => write!(f, "(i) contact distribution has corank k"),
            StructureCondition::ReebRank => write!(f, "(ii) Reeb distribution has rank k"),
            StructureCondition::Transversality => write!(
                f,
                "(iii) contact and Reeb distributions intersect trivially"
            ),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PointStructure {
    pub point: Point,
    /// Rank of the k×m matrix of η-coefficients.
    pub contact_rank: usize,
    /// Dimension of `∩ ker dη^α`.
    pub reeb_dim: usize,
    /// Dimension of `∩ (ker η^α ∩ ker dη^α)`.
    pub intersection_dim: usize,
    pub contact: RankInfo,
    pub reeb: RankInfo,
    pub joint: RankInfo,
}

impl PointStructure {
    pub fn failed(&self, k: usize) -> Vec<StructureCondition> {
        let mut out = Vec::new();
        if self.contact_rank != k {
            out.push(StructureCondition::ContactRank);
        }
        if self.reeb_dim != k {
            out.push(StructureCondition::ReebRank);
        }
        if self.intersection_dim != 0 {
            out.push(StructureCondition::Transversality);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct StructureReport {
    pub k: usize,
    pub tol: f64,
    pub points: Vec<PointStructure>,
    pub contact_rank_ok: bool,
    pub reeb_rank_ok: bool,
    pub transversality_ok: bool,
    /// Smallest retained relative singular value over all rank computations.
    pub min_retained: f64,
    /// Largest discarded relative singular value over all rank computations.
    pub max_discarded: f64,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.contact_rank_ok && self.reeb_rank_ok && self.transversality_ok
    }

    pub fn failed_conditions(&self) -> Vec<StructureCondition> {
        let mut out = Vec::new();
        if !self.contact_rank_ok {
            out.push(StructureCondition::ContactRank);
        }
        if !self.reeb_rank_ok {
            out.push(StructureCondition::ReebRank);
        }
        if !self.transversality_ok {
            out.push(StructureCondition::Transversality);
        }
        out
    }
}

/// Stacks the rows `(dη^α)^T` whose joint kernel is the Reeb distribution.
pub(crate) fn stacked_d_eta(d_etas: &[Matrix]) -> Matrix {
    let m = d_etas.first().map_or(0, |d| d.ncols());
    let mut out = Matrix::zeros(d_etas.len() * m, m);
    for (a, d) in d_etas.iter().enumerate() {
        out.view_mut((a * m, 0), (m, m)).copy_from(&d.transpose());
    }
    out
}

pub(crate) fn point_structure(sys: &KContactSystem, x: &Point, tol: f64) -> Result<PointStructure> {
    let m = sys.dim();
    let eta = rows_to_matrix(&sys.eta_rows(x)?)?;
    let d_stack = stacked_d_eta(&sys.d_etas(x)?);
    let mut joint = Matrix::zeros(d_stack.nrows() + eta.nrows(), m);
    joint
        .view_mut((0, 0), (d_stack.nrows(), m))
        .copy_from(&d_stack);
    joint
        .view_mut((d_stack.nrows(), 0), (eta.nrows(), m))
        .copy_from(&eta);

    let contact = rank_info(&eta, tol)?;
    let reeb = rank_info(&d_stack, tol)?;
    let joint = rank_info(&joint, tol)?;
    Ok(PointStructure {
        point: x.clone(),
        contact_rank: contact.rank,
        reeb_dim: m - reeb.rank,
        intersection_dim: m - joint.rank,
        contact,
        reeb,
        joint,
    })
}

/// Samples the k-contact conditions at each point. Condition failures are
/// reported, not raised.
pub fn verify_structure(
    sys: &KContactSystem,
    points: &[Point],
    tol: f64,
) -> Result<StructureReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "structure verification needs at least one point".into(),
        ));
    }
    let k = sys.k();
    let per_point = points
        .iter()
        .map(|x| point_structure(sys, x, tol))
        .collect::<Result<Vec<_>>>()?;

    let infos = || {
        per_point
            .iter()
            .flat_map(|p| [&p.contact, &p.reeb, &p.joint])
    };
    let min_retained = infos()
        .map(|i| i.smallest_retained)
        .fold(f64::INFINITY, f64::min);
    let max_discarded = infos().map(|i| i.largest_discarded).fold(0.0, f64::max);

    Ok(StructureReport {
        k,
        tol,
        contact_rank_ok: per_point.iter().all(|p| p.contact_rank == k),
        reeb_rank_ok: per_point.iter().all(|p| p.reeb_dim == k),
        transversality_ok: per_point.iter().all(|p| p.intersection_dim == 0),
        points: per_point,
        min_retained,
        max_discarded,
    })
}
