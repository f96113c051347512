//! k-contact Hamiltonian systems: structure verification, Reeb frames and the
//! Hamilton–De Donder–Weyl field equations.

mod equations;
mod reeb;
mod structure;

pub use equations::{
    canonical_kvector, canonical_kvector_fields, contact_hamiltonian_vector_field, darboux_hdw_rhs,
    hdw_residual_kvector, ksymplectic_residual, lie_form_residual, omega_forms, residual_no_reeb,
    DarbouxRates, HdwResidual, KVectorAtPoint, KVectorComponent, KVectorSplit, OPEN_SET_THRESHOLD,
};
pub use reeb::{
    reeb_commutator_norm, reeb_fields, reeb_system_matrix, solve_reeb, ReebField, ReebFrame,
    REEB_TOL,
};
pub use structure::{verify_structure, PointStructure, StructureCondition, StructureReport};

use crate::chart::{expect_len, CoordinateForm, Point, ScalarField, Vector, DEFAULT_FD_STEP};
use crate::error::{Error, Result};

/// Positions of Darboux coordinates `(q^i, p_i^α, s^α)` among the chart
/// coordinates, in which `η^α = ds^α − p_i^α dq^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxLayout {
    q: Vec<usize>,
    p: Vec<Vec<usize>>,
    s: Vec<usize>,
}

impl DarbouxLayout {
    /// Ordering `q^1..q^n, p^1_1..p^1_n, .., p^k_1..p^k_n, s^1..s^k`.
    pub fn standard(n: usize, k: usize) -> Self {
        DarbouxLayout {
            q: (0..n).collect(),
            p: (0..k)
                .map(|a| (0..n).map(|i| n + a * n + i).collect())
                .collect(),
            s: (0..k).map(|a| n + k * n + a).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    pub fn dim(&self) -> usize {
        self.n() + self.k() * self.n() + self.k()
    }

    pub fn q(&self, i: usize) -> usize {
        self.q[i]
    }

    pub fn p(&self, alpha: usize, i: usize) -> usize {
        self.p[alpha][i]
    }

    pub fn s(&self, alpha: usize) -> usize {
        self.s[alpha]
    }

    /// The contact form `η^α = ds^α − p_i^α dq^i`, with `dη^α = dq^i ∧ dp_i^α`.
    pub fn contact_form(&self, alpha: usize) -> CoordinateForm {
        let m = self.dim();
        let (q, p, s) = (self.q.clone(), self.p[alpha].clone(), self.s[alpha]);
        let (q2, p2) = (q.clone(), p.clone());
        CoordinateForm::new(
            m,
            move |x| {
                let mut c = Vector::zeros(m);
                c[s] = 1.0;
                for (&qi, &pi) in q.iter().zip(&p) {
                    c[qi] = -x[pi];
                }
                c
            },
            move |_| {
                let mut d = crate::chart::Matrix::zeros(m, m);
                for (&qi, &pi) in q2.iter().zip(&p2) {
                    d[(qi, pi)] = 1.0;
                    d[(pi, qi)] = -1.0;
                }
                d
            },
        )
    }
}

/// A k-contact Hamiltonian system `(M, η^α, H)` on a single chart.
#[derive(Clone, Debug)]
pub struct KContactSystem {
    name: String,
    coordinate_names: Vec<String>,
    etas: Vec<CoordinateForm>,
    hamiltonian: ScalarField,
    darboux: Option<DarbouxLayout>,
}

impl KContactSystem {
    pub fn new(
        name: impl Into<String>,
        coordinate_names: Vec<String>,
        etas: Vec<CoordinateForm>,
        hamiltonian: ScalarField,
    ) -> Result<Self> {
        let m = coordinate_names.len();
        if etas.is_empty() {
            return Err(Error::InvalidArgument(
                "a k-contact system needs k >= 1 forms".into(),
            ));
        }
        if etas.len() > m {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds dimension {m}",
                etas.len()
            )));
        }
        for eta in &etas {
            expect_len(eta.dim(), m, "contact form dimension")?;
        }
        expect_len(hamiltonian.dim(), m, "Hamiltonian dimension")?;
        Ok(KContactSystem {
            name: name.into(),
            coordinate_names,
            etas,
            hamiltonian,
            darboux: None,
        })
    }

    /// System in Darboux coordinates with the canonical forms of `layout`.
    pub fn darboux(
        name: impl Into<String>,
        coordinate_names: Vec<String>,
        layout: DarbouxLayout,
        hamiltonian: ScalarField,
    ) -> Result<Self> {
        let etas = (0..layout.k()).map(|a| layout.contact_form(a)).collect();
        Self::new(name, coordinate_names, etas, hamiltonian)?.with_darboux(layout)
    }

    pub fn with_darboux(mut self, layout: DarbouxLayout) -> Result<Self> {
        if layout.n() == 0 {
            return Err(Error::InvalidArgument("Darboux layout needs n >= 1".into()));
        }
        expect_len(layout.dim(), self.dim(), "Darboux layout dimension")?;
        expect_len(layout.k(), self.k(), "Darboux layout k")?;
        self.darboux = Some(layout);
        Ok(self)
    }

    pub fn with_hamiltonian(mut self, hamiltonian: ScalarField) -> Result<Self> {
        expect_len(hamiltonian.dim(), self.dim(), "Hamiltonian dimension")?;
        self.hamiltonian = hamiltonian;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coordinate_names.len()
    }

    pub fn k(&self) -> usize {
        self.etas.len()
    }

    pub fn etas(&self) -> &[CoordinateForm] {
        &self.etas
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.hamiltonian
    }

    pub fn coordinate_names(&self) -> &[String] {
        &self.coordinate_names
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.coordinate_names.iter().position(|c| c == name)
    }

    pub fn darboux_layout(&self) -> Option<&DarbouxLayout> {
        self.darboux.as_ref()
    }

    pub(crate) fn require_darboux(&self) -> Result<&DarbouxLayout> {
        self.darboux
            .as_ref()
            .ok_or_else(|| Error::MissingLayout(self.name.clone()))
    }

    pub fn hamiltonian_gradient(&self, x: &Point) -> Result<Vector> {
        self.hamiltonian.gradient(x, DEFAULT_FD_STEP)
    }

    /// Coefficient rows `η^α_I` at `x`.
    pub fn eta_rows(&self, x: &Point) -> Result<Vec<Vector>> {
        x.expect_dim(self.dim(), "k-contact system")?;
        self.etas.iter().map(|e| e.coeffs(x)).collect()
    }

    pub fn d_etas(&self, x: &Point) -> Result<Vec<crate::chart::Matrix>> {
        x.expect_dim(self.dim(), "k-contact system")?;
        self.etas.iter().map(|e| e.exterior_derivative(x)).collect()
    }
}
