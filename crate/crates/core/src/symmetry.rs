//! Symmetries of k-contact systems and the dissipation laws they induce.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::chart::{
    fd_gradient_try, lie_bracket_fd, lie_derivative_oneform, lie_derivative_scalar, Point, Vector,
    VectorField, VectorFieldExpr,
};
use crate::error::{Error, Result};
use crate::kcontact::{
    contact_hamiltonian_vector_field, reeb_fields, solve_reeb, KContactSystem, REEB_TOL,
};
use crate::pde::{
    central_time_derivative, interior_nodes, neighbours, residual_scan, ResidualScan, SectionGrid,
};

/// What a candidate field is claimed to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    HamiltonianKContact,
    Dynamical,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct SymmetryCandidate {
    pub name: String,
    pub field: VectorFieldExpr,
    pub claim: SymmetryKind,
}

impl SymmetryCandidate {
    pub fn new(name: impl Into<String>, field: VectorFieldExpr, claim: SymmetryKind) -> Self {
        SymmetryCandidate {
            name: name.into(),
            field,
            claim,
        }
    }

    fn check_dim(&self, sys: &KContactSystem) -> Result<()> {
        if self.field.dim() != sys.dim() {
            return Err(Error::DimensionMismatch {
                context: "symmetry field",
                expected: sys.dim(),
                got: self.field.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HamiltonianSymmetryReport {
    /// `max_{α, x} ‖L_Y η^α‖_∞`
    pub max_lie_eta: f64,
    /// `max_x |L_Y H|`
    pub max_lie_h: f64,
    pub tol: f64,
    pub passed: bool,
}

impl HamiltonianSymmetryReport {
    pub fn worst(&self) -> f64 {
        self.max_lie_eta.max(self.max_lie_h)
    }
}

fn require_points(points: &[Point]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "symmetry checks need at least one point".into(),
        ));
    }
    Ok(())
}

/// Checks `L_Y η^α = 0` and `L_Y H = 0` at each point.
pub fn check_hamiltonian_symmetry(
    sys: &KContactSystem,
    y: &SymmetryCandidate,
    points: &[Point],
    h: f64,
    tol: f64,
) -> Result<HamiltonianSymmetryReport> {
    require_points(points)?;
    y.check_dim(sys)?;
    let (mut max_lie_eta, mut max_lie_h) = (0.0f64, 0.0f64);
    for x in points {
        for eta in sys.etas() {
            max_lie_eta = max_lie_eta.max(lie_derivative_oneform(&y.field, eta, x, h)?.amax());
        }
        max_lie_h = max_lie_h.max(lie_derivative_scalar(&y.field, sys.hamiltonian(), x, h)?.abs());
    }
    Ok(HamiltonianSymmetryReport {
        max_lie_eta,
        max_lie_h,
        tol,
        passed: max_lie_eta < tol && max_lie_h < tol,
    })
}

/// `max_{α, x} ‖[Y, R_α](x)‖_∞`.
pub fn check_reeb_preservation(
    sys: &KContactSystem,
    y: &SymmetryCandidate,
    points: &[Point],
    h: f64,
) -> Result<f64> {
    require_points(points)?;
    y.check_dim(sys)?;
    let reeb = reeb_fields(sys);
    let mut worst: f64 = 0.0;
    for x in points {
        for r in &reeb {
            worst = worst.max(lie_bracket_fd(&y.field, r, x, h)?.amax());
        }
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawProvenance {
    /// `F^α = −i(Y)η^α` for the named field.
    InducedFrom(String),
    UserSupplied,
}

type LawFn = dyn Fn(&[f64]) -> Result<Vector> + Send + Sync;

/// A map `F: M → R^k` tested as a dissipation law.
#[derive(Clone)]
pub struct DissipationLaw {
    dim: usize,
    k: usize,
    components: Arc<LawFn>,
    pub provenance: LawProvenance,
}

impl fmt::Debug for DissipationLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DissipationLaw")
            .field("dim", &self.dim)
            .field("k", &self.k)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl DissipationLaw {
    pub fn user_supplied(
        dim: usize,
        k: usize,
        f: impl Fn(&[f64]) -> Vector + Send + Sync + 'static,
    ) -> Self {
        DissipationLaw {
            dim,
            k,
            components: Arc::new(move |x| Ok(f(x))),
            provenance: LawProvenance::UserSupplied,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                context: "dissipation law",
                expected: self.dim,
                got: x.len(),
            });
        }
        let v = (self.components)(x)?;
        if v.len() != self.k {
            return Err(Error::DimensionMismatch {
                context: "dissipation law components",
                expected: self.k,
                got: v.len(),
            });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("dissipation law"));
        }
        Ok(v)
    }

    /// The same law with component `alpha` multiplied by `factor`.
    pub fn scaled_component(&self, alpha: usize, factor: f64) -> Self {
        let inner = Arc::clone(&self.components);
        DissipationLaw {
            dim: self.dim,
            k: self.k,
            components: Arc::new(move |x| {
                let mut v = inner(x)?;
                if alpha < v.len() {
                    v[alpha] *= factor;
                }
                Ok(v)
            }),
            provenance: LawProvenance::UserSupplied,
        }
    }
}

/// `F^α = −⟨η^α, Y⟩`.
pub fn induced_dissipation_law(
    sys: &KContactSystem,
    y: &SymmetryCandidate,
) -> Result<DissipationLaw> {
    y.check_dim(sys)?;
    let etas = sys.etas().to_vec();
    let field = y.field.clone();
    Ok(DissipationLaw {
        dim: sys.dim(),
        k: sys.k(),
        components: Arc::new(move |x| {
            let p = Point::new(x.to_vec())?;
            let yv = field.eval(x)?;
            etas.iter()
                .map(|e| Ok(-e.coeffs(&p)?.dot(&yv)))
                .collect::<Result<Vec<f64>>>()
                .map(Vector::from_vec)
        }),
        provenance: LawProvenance::InducedFrom(y.name.clone()),
    })
}

fn reeb_rates(sys: &KContactSystem, x: &Point) -> Result<Vec<f64>> {
    let dh = sys.hamiltonian_gradient(x)?;
    Ok(solve_reeb(sys, x, REEB_TOL)?
        .vectors
        .iter()
        .map(|r| dh.dot(r))
        .collect())
}

/// `∂_t(F^t∘ψ) + ∂_x(F^x∘ψ) + Σ_α (L_{R_α}H)(ψ)·F^α(ψ)` at an interior node.
pub fn dissipation_residual_section(
    sys: &KContactSystem,
    law: &DissipationLaw,
    psi: &SectionGrid,
    ti: usize,
    xi: usize,
) -> Result<f64> {
    if sys.k() != 2 || law.k() != 2 {
        return Err(Error::WrongK {
            expected: 2,
            got: sys.k().min(law.k()),
        });
    }
    let (left, right) = neighbours(psi, ti, xi)?;
    let f = |t: usize, x: usize| law.eval(psi.point(t, x).as_slice());
    let ts = psi.times();
    let ft = central_time_derivative(
        [ts[ti - 1], ts[ti], ts[ti + 1]],
        [f(ti - 1, xi)?[0], f(ti, xi)?[0], f(ti + 1, xi)?[0]],
    );
    let fx = (f(ti, right)?[1] - f(ti, left)?[1]) / (2.0 * psi.grid().dx());
    let here = psi.point(ti, xi);
    let rates = reeb_rates(sys, &here)?;
    let value = law.eval(here.as_slice())?;
    Ok(ft + fx + rates[0] * value[0] + rates[1] * value[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DissipationScan {
    pub max: f64,
    pub mean: f64,
    pub worst: (usize, usize),
    pub nodes: usize,
}

/// [`dissipation_residual_section`] over every interior node.
pub fn dissipation_scan(
    sys: &KContactSystem,
    law: &DissipationLaw,
    psi: &SectionGrid,
) -> Result<DissipationScan> {
    let nodes = interior_nodes(psi);
    if nodes.is_empty() {
        return Err(Error::InvalidArgument(
            "section has no interior nodes".into(),
        ));
    }
    let mut scan = DissipationScan {
        max: 0.0,
        mean: 0.0,
        worst: nodes[0],
        nodes: nodes.len(),
    };
    let mut total = 0.0;
    for &(ti, xi) in &nodes {
        let r = dissipation_residual_section(sys, law, psi, ti, xi)?.abs();
        total += r;
        if r > scan.max {
            scan.max = r;
            scan.worst = (ti, xi);
        }
    }
    scan.mean = total / nodes.len() as f64;
    Ok(scan)
}

/// `Σ_α ⟨dF^α, X_α⟩ + (L_{R_α}H)·F^α` at `x`, with `dF^α` by finite differences.
pub fn dissipation_residual_kvector<F: VectorField>(
    sys: &KContactSystem,
    law: &DissipationLaw,
    fields: &[F],
    x: &Point,
    h: f64,
) -> Result<f64> {
    if fields.len() != sys.k() || law.k() != sys.k() {
        return Err(Error::WrongK {
            expected: sys.k(),
            got: fields.len(),
        });
    }
    let rates = reeb_rates(sys, x)?;
    let value = law.eval(x.as_slice())?;
    let mut total = 0.0;
    for (alpha, field) in fields.iter().enumerate() {
        let grad = fd_gradient_try(|p| Ok(law.eval(p)?[alpha]), x.as_slice(), h)?;
        total += grad.dot(&field.eval(x.as_slice())?) + rates[alpha] * value[alpha];
    }
    Ok(total)
}

/// Text carried by every probe report.
pub const PROBE_CAVEAT: &str = "transport of sections certifies a dynamical symmetry only for integrable solution k-vector fields";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub epsilon: f64,
    pub before: f64,
    pub after: f64,
    /// `after − before` of the maximal section residual.
    pub growth: f64,
    pub tol: f64,
    pub passed: bool,
    pub caveat: &'static str,
}

/// Time-`epsilon` flow of `y` from `x` by RK4 with `substeps` steps.
pub fn flow(y: &dyn VectorField, x: &[f64], epsilon: f64, substeps: usize) -> Result<Vec<f64>> {
    let n = substeps.max(1);
    let h = epsilon / n as f64;
    let mut p = Vector::from_column_slice(x);
    for _ in 0..n {
        let k1 = y.eval(p.as_slice())?;
        let k2 = y.eval((&p + &k1 * (0.5 * h)).as_slice())?;
        let k3 = y.eval((&p + &k2 * (0.5 * h)).as_slice())?;
        let k4 = y.eval((&p + &k3 * h).as_slice())?;
        p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("symmetry flow"));
        }
    }
    Ok(p.as_slice().to_vec())
}

/// Substeps used by [`dynamical_symmetry_probe`] for the flow of `Y`.
pub const PROBE_FLOW_SUBSTEPS: usize = 16;

/// Transports `psi` by the time-`epsilon` flow of `y` and re-measures the
/// section residual. Passes iff the maximal residual grows by less than `tol`.
pub fn dynamical_symmetry_probe(
    sys: &KContactSystem,
    y: &SymmetryCandidate,
    psi: &SectionGrid,
    epsilon: f64,
    tol: f64,
) -> Result<(ProbeReport, SectionGrid)> {
    y.check_dim(sys)?;
    let before: ResidualScan = residual_scan(sys, psi)?;
    let moved = psi.map_points(|p| flow(&y.field, p, epsilon, PROBE_FLOW_SUBSTEPS))?;
    let after = residual_scan(sys, &moved)?;
    let growth = after.max - before.max;
    Ok((
        ProbeReport {
            epsilon,
            before: before.max,
            after: after.max,
            growth,
            tol,
            passed: growth < tol,
            caveat: PROBE_CAVEAT,
        },
        moved,
    ))
}

/// Named symmetry fields of the model zoo.
pub mod catalog {
    use super::*;

    fn expr(dim: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> VectorFieldExpr {
        VectorFieldExpr::new(dim, move |x| Vector::from_vec(f(x)))
    }

    /// `∂/∂u` on the damped string.
    pub fn string_translation() -> SymmetryCandidate {
        SymmetryCandidate::new(
            "translation",
            VectorFieldExpr::coordinate(5, 0),
            SymmetryKind::HamiltonianKContact,
        )
    }

    /// Simultaneous rotation of `(q¹, q²)`, `(p^t_1, p^t_2)`, `(p^x_1, p^x_2)`
    /// on the coupled strings.
    pub fn coupled_rotation() -> SymmetryCandidate {
        SymmetryCandidate::new(
            "rotation",
            expr(8, |x| vec![-x[1], x[0], -x[3], x[2], -x[5], x[4], 0.0, 0.0]),
            SymmetryKind::HamiltonianKContact,
        )
    }

    /// `∂/∂v` on the Burgers system.
    pub fn burgers_v_shift() -> SymmetryCandidate {
        SymmetryCandidate::new(
            "v-shift",
            VectorFieldExpr::coordinate(6, 1),
            SymmetryKind::Dynamical,
        )
    }

    /// `∂/∂v − ½u ∂/∂s^t` on the Burgers system; preserves both forms and `H`.
    pub fn burgers_compensated_shift() -> SymmetryCandidate {
        SymmetryCandidate::new(
            "v-shift-compensated",
            expr(6, |x| vec![0.0, 1.0, 0.0, 0.0, -0.5 * x[0], 0.0]),
            SymmetryKind::Unknown,
        )
    }

    /// `u ∂/∂u` on the Burgers system.
    pub fn burgers_scaling() -> SymmetryCandidate {
        SymmetryCandidate::new(
            "u-scaling",
            expr(6, |x| vec![x[0], 0.0, 0.0, 0.0, 0.0, 0.0]),
            SymmetryKind::Unknown,
        )
    }

    /// `∂/∂x^index` in a chart of dimension `dim`.
    pub fn coordinate_shift(dim: usize, index: usize, name: &str) -> SymmetryCandidate {
        SymmetryCandidate::new(
            name,
            VectorFieldExpr::coordinate(dim, index),
            SymmetryKind::Unknown,
        )
    }

    /// The contact Hamiltonian vector field of a k = 1 system, as a candidate
    /// symmetry of itself.
    pub fn hamiltonian_self_field(sys: &KContactSystem) -> Result<SymmetryCandidate> {
        if sys.k() != 1 {
            return Err(Error::WrongK {
                expected: 1,
                got: sys.k(),
            });
        }
        let owned = sys.clone();
        let field = VectorFieldExpr::new(sys.dim(), move |x| {
            let p = Point::new(x.to_vec()).expect("finite point");
            contact_hamiltonian_vector_field(&owned, &p).expect("k = 1 Darboux system")
        });
        Ok(SymmetryCandidate::new(
            "hamiltonian-field",
            field,
            SymmetryKind::Dynamical,
        ))
    }
}
