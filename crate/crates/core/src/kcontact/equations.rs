//! The k-contact Hamilton–De Donder–Weyl equations, in every formulation the
//! toolkit checks: contraction form, Lie-derivative form, the Reeb-free form
//! through `Ω^α = −H dη^α + dH∧η^α`, and the explicit Darboux-coordinate rates.

use super::reeb::{solve_reeb, REEB_TOL};
use super::KContactSystem;
use crate::chart::{
    expect_len, interior_product_2form, lie_derivative_oneform, wedge, Matrix, Point, Vector,
    VectorField,
};
use crate::error::{Error, Result};

/// `|H|` at or below this value is treated as outside `O = {H ≠ 0}`.
pub const OPEN_SET_THRESHOLD: f64 = 1e-12;

/// Values `X_1(x), .., X_k(x)` of a k-vector field at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct KVectorAtPoint(Vec<Vector>);

impl KVectorAtPoint {
    pub fn new(vectors: Vec<Vector>) -> Result<Self> {
        if let Some(first) = vectors.first() {
            for v in &vectors {
                expect_len(v.len(), first.len(), "k-vector components")?;
                crate::chart::check_finite(v, "k-vector components")?;
            }
        }
        Ok(KVectorAtPoint(vectors))
    }

    pub fn zero(k: usize, dim: usize) -> Self {
        KVectorAtPoint(vec![Vector::zeros(dim); k])
    }

    pub fn components(&self) -> &[Vector] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        KVectorAtPoint(self.0.iter().map(|v| v * s).collect())
    }
}

/// Residual pair of the field equations: the 1-form equation and the scalar
/// energy constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct HdwResidual {
    pub form: Vector,
    pub energy: f64,
}

impl HdwResidual {
    /// `max(‖form‖₂, |energy|)`.
    pub fn norm(&self) -> f64 {
        self.form.norm().max(self.energy.abs())
    }
}

struct PointData {
    h: f64,
    dh: Vector,
    etas: Vec<Vector>,
    d_etas: Vec<Matrix>,
    /// `L_{R_α} H = ⟨dH, R_α⟩`
    reeb_rates: Vec<f64>,
}

fn point_data(sys: &KContactSystem, x: &Point) -> Result<PointData> {
    let h = sys.hamiltonian().value(x)?;
    let dh = sys.hamiltonian_gradient(x)?;
    let frame = solve_reeb(sys, x, REEB_TOL)?;
    Ok(PointData {
        h,
        reeb_rates: frame.vectors.iter().map(|r| dh.dot(r)).collect(),
        etas: sys.eta_rows(x)?,
        d_etas: sys.d_etas(x)?,
        dh,
    })
}

fn check_kvector(sys: &KContactSystem, xs: &KVectorAtPoint) -> Result<()> {
    expect_len(xs.k(), sys.k(), "k-vector arity")?;
    for v in xs.components() {
        expect_len(v.len(), sys.dim(), "k-vector component dimension")?;
    }
    Ok(())
}

fn energy_residual(data: &PointData, xs: &KVectorAtPoint) -> f64 {
    data.etas
        .iter()
        .zip(xs.components())
        .map(|(e, v)| e.dot(v))
        .sum::<f64>()
        + data.h
}

/// Residuals of `Σ i(X_α)dη^α = dH − (L_{R_α}H)η^α` and `Σ i(X_α)η^α = −H`.
pub fn hdw_residual_kvector(
    sys: &KContactSystem,
    xs: &KVectorAtPoint,
    x: &Point,
) -> Result<HdwResidual> {
    check_kvector(sys, xs)?;
    let data = point_data(sys, x)?;
    let mut form = -&data.dh;
    for a in 0..sys.k() {
        form += interior_product_2form(&data.d_etas[a], &xs.components()[a])?;
        form += &data.etas[a] * data.reeb_rates[a];
    }
    Ok(HdwResidual {
        form,
        energy: energy_residual(&data, xs),
    })
}

/// `Σ i(X_α)dη^α − dH`, the k-symplectic residual with `ω^α = dη^α`.
pub fn ksymplectic_residual(
    sys: &KContactSystem,
    xs: &KVectorAtPoint,
    x: &Point,
) -> Result<Vector> {
    check_kvector(sys, xs)?;
    let mut out = -sys.hamiltonian_gradient(x)?;
    for (d, v) in sys.d_etas(x)?.iter().zip(xs.components()) {
        out += interior_product_2form(d, v)?;
    }
    Ok(out)
}

/// `Σ_α L_{X_α}η^α + (L_{R_α}H)η^α`, zero when the Lie-derivative form of the
/// first field equation holds.
pub fn lie_form_residual<F: VectorField>(
    sys: &KContactSystem,
    fields: &[F],
    x: &Point,
    h: f64,
) -> Result<Vector> {
    expect_len(fields.len(), sys.k(), "k-vector arity")?;
    let data = point_data(sys, x)?;
    let mut out = Vector::zeros(sys.dim());
    for (a, (eta, field)) in sys.etas().iter().zip(fields).enumerate() {
        out += lie_derivative_oneform(field, eta, x, h)?;
        out += &data.etas[a] * data.reeb_rates[a];
    }
    Ok(out)
}

/// `Ω^α = −H dη^α + dH ∧ η^α`.
pub fn omega_forms(sys: &KContactSystem, x: &Point) -> Result<Vec<Matrix>> {
    let h = sys.hamiltonian().value(x)?;
    let dh = sys.hamiltonian_gradient(x)?;
    sys.d_etas(x)?
        .iter()
        .zip(sys.eta_rows(x)?)
        .map(|(d, eta)| Ok(d * (-h) + wedge(&dh, &eta)?))
        .collect()
}

/// Residuals of `Σ i(X_α)Ω^α = 0` and `Σ i(X_α)η^α = −H`, defined on `H ≠ 0`.
pub fn residual_no_reeb(
    sys: &KContactSystem,
    xs: &KVectorAtPoint,
    x: &Point,
) -> Result<HdwResidual> {
    check_kvector(sys, xs)?;
    let h = sys.hamiltonian().value(x)?;
    if h.abs() <= OPEN_SET_THRESHOLD {
        return Err(Error::OutsideOpenSet {
            value: h.abs(),
            threshold: OPEN_SET_THRESHOLD,
        });
    }
    let mut form = Vector::zeros(sys.dim());
    for (omega, v) in omega_forms(sys, x)?.iter().zip(xs.components()) {
        form += interior_product_2form(omega, v)?;
    }
    let energy = sys
        .eta_rows(x)?
        .iter()
        .zip(xs.components())
        .map(|(e, v)| e.dot(v))
        .sum::<f64>()
        + h;
    Ok(HdwResidual { form, energy })
}

/// Right-hand sides of the field equations in Darboux coordinates:
///
/// * `∂q^i/∂t^α = ∂H/∂p_i^α`
/// * `Σ_α ∂p_i^α/∂t^α = −(∂H/∂q^i + p_i^α ∂H/∂s^α)`
/// * `Σ_α ∂s^α/∂t^α = p_i^α ∂H/∂p_i^α − H`
#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxRates {
    /// `q_rates[α][i]`
    pub q_rates: Vec<Vec<f64>>,
    /// Summed momentum divergence per `i`.
    pub p_divergence: Vec<f64>,
    pub s_divergence: f64,
}

pub fn darboux_hdw_rhs(sys: &KContactSystem, x: &Point) -> Result<DarbouxRates> {
    let layout = sys.require_darboux()?;
    let (n, k) = (layout.n(), layout.k());
    let xs = x.as_slice();
    let h = sys.hamiltonian().value(x)?;
    let dh = sys.hamiltonian_gradient(x)?;

    let q_rates = (0..k)
        .map(|a| (0..n).map(|i| dh[layout.p(a, i)]).collect())
        .collect();
    let p_divergence = (0..n)
        .map(|i| {
            let dissipation: f64 = (0..k).map(|a| xs[layout.p(a, i)] * dh[layout.s(a)]).sum();
            -(dh[layout.q(i)] + dissipation)
        })
        .collect();
    let s_divergence = (0..k)
        .flat_map(|a| (0..n).map(move |i| (a, i)))
        .map(|(a, i)| xs[layout.p(a, i)] * dh[layout.p(a, i)])
        .sum::<f64>()
        - h;
    Ok(DarbouxRates {
        q_rates,
        p_divergence,
        s_divergence,
    })
}

/// The contact Hamiltonian vector field of a k = 1 system in Darboux coordinates.
pub fn contact_hamiltonian_vector_field(sys: &KContactSystem, x: &Point) -> Result<Vector> {
    if sys.k() != 1 {
        return Err(Error::WrongK {
            expected: 1,
            got: sys.k(),
        });
    }
    let kv = canonical_kvector(sys, x, &KVectorSplit::FirstComponent)?;
    Ok(kv.0.into_iter().next().expect("k = 1"))
}

/// How the summed momentum and action divergences of the Darboux equations
/// are distributed among the k components, and how the components that the
/// equations leave free are fixed.
#[derive(Clone, Debug, PartialEq)]
pub enum KVectorSplit {
    /// Everything on `X_1`; free components zero.
    FirstComponent,
    /// Divergences split by weights summing to one; free components zero.
    Weights(Vec<f64>),
    /// Starts from [`KVectorSplit::FirstComponent`] and applies the
    /// minimum-norm change to the undetermined entries (the split of the
    /// divergences and the off-diagonal momentum and action components) that
    /// gives `X_α(H) = −H·R_α(H)` for every α. Such fields also solve the
    /// Reeb-free equations wherever `H ≠ 0`.
    EnergyBalanced,
}

/// A k-vector field solving the field equations, built from the explicit
/// Darboux-coordinate formulas.
pub fn canonical_kvector(
    sys: &KContactSystem,
    x: &Point,
    split: &KVectorSplit,
) -> Result<KVectorAtPoint> {
    let layout = sys.require_darboux()?;
    let (n, k, m) = (layout.n(), layout.k(), sys.dim());
    let rates = darboux_hdw_rhs(sys, x)?;

    let weights = match split {
        KVectorSplit::Weights(w) => {
            expect_len(w.len(), k, "split weights")?;
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "split weights must sum to 1, got {total}"
                )));
            }
            w.clone()
        }
        _ => (0..k).map(|a| if a == 0 { 1.0 } else { 0.0 }).collect(),
    };

    let mut comps = vec![Vector::zeros(m); k];
    for (a, comp) in comps.iter_mut().enumerate() {
        for i in 0..n {
            comp[layout.q(i)] = rates.q_rates[a][i];
            comp[layout.p(a, i)] = weights[a] * rates.p_divergence[i];
        }
        comp[layout.s(a)] = weights[a] * rates.s_divergence;
    }

    if *split == KVectorSplit::EnergyBalanced {
        balance_energy(sys, layout, x, &mut comps)?;
    }
    KVectorAtPoint::new(comps)
}

/// Adjusts the entries `X_α^{p^β_i}`, `X_α^{s^β}` while keeping every
/// divergence `Σ_α X_α^{p^α_i}`, `Σ_α X_α^{s^α}` fixed.
fn balance_energy(
    sys: &KContactSystem,
    layout: &super::DarbouxLayout,
    x: &Point,
    comps: &mut [Vector],
) -> Result<()> {
    let (n, k) = (layout.n(), layout.k());
    let h = sys.hamiltonian().value(x)?;
    let dh = sys.hamiltonian_gradient(x)?;
    // per component, the coordinates that may change
    let slots: Vec<usize> = (0..k)
        .flat_map(|b| {
            (0..n)
                .map(move |i| layout.p(b, i))
                .chain(std::iter::once(layout.s(b)))
        })
        .collect();
    let per = slots.len();
    let unknowns = k * per;
    let rows = k + n + 1;
    let mut a = Matrix::zeros(rows, unknowns);
    let mut rhs = Vector::zeros(rows);
    for alpha in 0..k {
        for (j, &c) in slots.iter().enumerate() {
            a[(alpha, alpha * per + j)] = dh[c];
        }
        rhs[alpha] = -h * dh[layout.s(alpha)] - dh.dot(&comps[alpha]);
    }
    for alpha in 0..k {
        for i in 0..n {
            a[(k + i, alpha * per + alpha * (n + 1) + i)] = 1.0;
        }
        a[(k + n, alpha * per + alpha * (n + 1) + n)] = 1.0;
    }
    let scale = a.amax().max(1.0);
    let svd = a.clone().svd(true, true);
    let delta = svd
        .solve(&rhs, 1e-12 * scale)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let miss = (&a * &delta - &rhs).amax();
    if miss > 1e-9 * (1.0 + rhs.amax()) {
        return Err(Error::InvalidArgument(format!(
            "energy balance impossible at this point (mismatch {miss:e})"
        )));
    }
    for (alpha, comp) in comps.iter_mut().enumerate() {
        for (j, &c) in slots.iter().enumerate() {
            comp[c] += delta[alpha * per + j];
        }
    }
    Ok(())
}

/// One component `X_α` of [`canonical_kvector`], as a vector field.
#[derive(Clone, Debug)]
pub struct KVectorComponent {
    sys: KContactSystem,
    split: KVectorSplit,
    alpha: usize,
}

impl VectorField for KVectorComponent {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vector> {
        let p = Point::new(x.to_vec())?;
        let kv = canonical_kvector(&self.sys, &p, &self.split)?;
        Ok(kv.0[self.alpha].clone())
    }
}

pub fn canonical_kvector_fields(
    sys: &KContactSystem,
    split: &KVectorSplit,
) -> Result<Vec<KVectorComponent>> {
    sys.require_darboux()?;
    Ok((0..sys.k())
        .map(|alpha| KVectorComponent {
            sys: sys.clone(),
            split: split.clone(),
            alpha,
        })
        .collect())
}
