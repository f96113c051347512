use super::{Boundary, SectionGrid};
use crate::chart::Vector;
use crate::error::{Error, Result};
use crate::kcontact::{hdw_residual_kvector, HdwResidual, KContactSystem, KVectorAtPoint};

/// Second-order three-point derivative at `t0` on a possibly uneven stencil.
pub fn central_time_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let hm = t[1] - t[0];
    let hp = t[2] - t[1];
    (hm * hm * f[2] - hp * hp * f[0] + (hp * hp - hm * hm) * f[1]) / (hm * hp * (hm + hp))
}

/// Left and right spatial neighbours of an interior node.
pub(crate) fn neighbours(psi: &SectionGrid, ti: usize, xi: usize) -> Result<(usize, usize)> {
    let n = psi.grid().len();
    let interior_t = ti >= 1 && ti + 1 < psi.n_times();
    let (ok_x, left, right) = match psi.grid().boundary() {
        Boundary::DirichletZero => (xi >= 1 && xi + 1 < n, xi.wrapping_sub(1), xi + 1),
        Boundary::Periodic => {
            let m = n - 1;
            let i = xi % m;
            (xi < n, (i + m - 1) % m, (i + 1) % m)
        }
    };
    if !interior_t || !ok_x {
        return Err(Error::BoundaryNode {
            time: ti,
            space: xi,
        });
    }
    Ok((left, right))
}

/// `(∂ψ/∂t, ∂ψ/∂x)` at an interior node by central differences.
pub fn section_derivatives(psi: &SectionGrid, ti: usize, xi: usize) -> Result<(Vector, Vector)> {
    let (left, right) = neighbours(psi, ti, xi)?;
    let m = psi.coordinates().len();
    let ts = psi.times();
    let stencil = [ts[ti - 1], ts[ti], ts[ti + 1]];
    let inv_2dx = 1.0 / (2.0 * psi.grid().dx());
    let (mut dt, mut dx) = (Vector::zeros(m), Vector::zeros(m));
    for c in 0..m {
        let name = &psi.coordinates()[c];
        let f = |t: usize, x: usize| psi.field(t, name).expect("known coordinate")[x];
        dt[c] = central_time_derivative(stencil, [f(ti - 1, xi), f(ti, xi), f(ti + 1, xi)]);
        dx[c] = (f(ti, right) - f(ti, left)) * inv_2dx;
    }
    Ok((dt, dx))
}

/// Field-equation residual of the section at node `(ti, xi)`, with the
/// k-vector replaced by the discrete first prolongation `(∂_t ψ, ∂_x ψ)`.
pub fn hdw_residual_section(
    sys: &KContactSystem,
    psi: &SectionGrid,
    ti: usize,
    xi: usize,
) -> Result<HdwResidual> {
    if sys.k() != 2 {
        return Err(Error::WrongK {
            expected: 2,
            got: sys.k(),
        });
    }
    if sys.dim() != psi.coordinates().len() {
        return Err(Error::DimensionMismatch {
            context: "section coordinates",
            expected: sys.dim(),
            got: psi.coordinates().len(),
        });
    }
    let (dt, dx) = section_derivatives(psi, ti, xi)?;
    hdw_residual_kvector(sys, &KVectorAtPoint::new(vec![dt, dx])?, &psi.point(ti, xi))
}

/// Every node where [`hdw_residual_section`] is defined.
pub fn interior_nodes(psi: &SectionGrid) -> Vec<(usize, usize)> {
    let n = psi.grid().len();
    let xs: Vec<usize> = match psi.grid().boundary() {
        Boundary::DirichletZero => (1..n - 1).collect(),
        Boundary::Periodic => (0..n - 1).collect(),
    };
    (1..psi.n_times().saturating_sub(1))
        .flat_map(|ti| xs.iter().map(move |&xi| (ti, xi)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualScan {
    /// Largest `max(‖r1‖₂, |r2|)` over interior nodes.
    pub max: f64,
    pub mean: f64,
    pub max_form: f64,
    pub max_energy: f64,
    /// `(time index, node index)` of the largest residual.
    pub worst: (usize, usize),
    pub nodes: usize,
}

pub fn residual_scan(sys: &KContactSystem, psi: &SectionGrid) -> Result<ResidualScan> {
    let nodes = interior_nodes(psi);
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(
            "section has no interior nodes".into(),
        ));
    }
    let mut scan = ResidualScan {
        max: 0.0,
        mean: 0.0,
        max_form: 0.0,
        max_energy: 0.0,
        worst: nodes[0],
        nodes: nodes.len(),
    };
    let mut total = 0.0;
    for &(ti, xi) in &nodes {
        let r = hdw_residual_section(sys, psi, ti, xi)?;
        let norm = r.norm();
        total += norm;
        if norm > scan.max {
            scan.max = norm;
            scan.worst = (ti, xi);
        }
        scan.max_form = scan.max_form.max(r.form.norm());
        scan.max_energy = scan.max_energy.max(r.energy.abs());
    }
    scan.mean = total / nodes.len() as f64;
    Ok(scan)
}
