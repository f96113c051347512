//! The model zoo: concrete k-contact systems packaged with their parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{CoordinateForm, Matrix, Point, ScalarField, Vector};
use crate::error::{Error, Result};
use crate::kcontact::{DarbouxLayout, KContactSystem};

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg.to_string()))
    }
}

/// Physical parameters of the damped string `u_tt − c²u_xx + k u_t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DampedStringParams {
    /// Linear mass density.
    pub rho: f64,
    /// Tension.
    pub tau: f64,
    /// Damping constant.
    pub damp: f64,
}

impl DampedStringParams {
    pub fn validate(&self) -> Result<()> {
        require(
            self.rho > 0.0 && self.rho.is_finite(),
            "rho must be positive",
        )?;
        require(
            self.tau > 0.0 && self.tau.is_finite(),
            "tau must be positive",
        )?;
        require(
            self.damp >= 0.0 && self.damp.is_finite(),
            "damping must be non-negative",
        )
    }

    pub fn wave_speed_squared(&self) -> f64 {
        self.tau / self.rho
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed_squared().sqrt()
    }
}

impl Default for DampedStringParams {
    fn default() -> Self {
        DampedStringParams {
            rho: 1.0,
            tau: 1.0,
            damp: 0.2,
        }
    }
}

/// Parameters of the contact Burgers system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BurgersParams {
    /// Diffusion coefficient.
    pub diff: f64,
    /// Coupling constant; `−1/diff` gives Burgers' equation, `0` the heat equation.
    pub gamma: f64,
}

impl BurgersParams {
    /// Burgers' equation proper: `γ = −1/k`.
    pub fn burgers(diff: f64) -> Self {
        BurgersParams {
            diff,
            gamma: -1.0 / diff,
        }
    }

    pub fn heat(diff: f64) -> Self {
        BurgersParams { diff, gamma: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.diff > 0.0 && self.diff.is_finite(),
            "diffusion coefficient must be positive",
        )?;
        require(self.gamma.is_finite(), "gamma must be finite")
    }
}

/// Coupling potential `G(z)`, `z = sqrt((q¹)² + (q²)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Coupling {
    None,
    /// `G = ½ c z²`
    Harmonic {
        stiffness: f64,
    },
    /// `G = ¼ c z⁴`
    Quartic {
        strength: f64,
    },
}

impl Coupling {
    pub fn value(&self, q1: f64, q2: f64) -> f64 {
        let z2 = q1 * q1 + q2 * q2;
        match *self {
            Coupling::None => 0.0,
            Coupling::Harmonic { stiffness } => 0.5 * stiffness * z2,
            Coupling::Quartic { strength } => 0.25 * strength * z2 * z2,
        }
    }

    /// `(∂G/∂q¹, ∂G/∂q²)`.
    pub fn gradient(&self, q1: f64, q2: f64) -> (f64, f64) {
        let factor = match *self {
            Coupling::None => 0.0,
            Coupling::Harmonic { stiffness } => stiffness,
            Coupling::Quartic { strength } => strength * (q1 * q1 + q2 * q2),
        };
        (factor * q1, factor * q2)
    }
}

/// Sign of the spatial-momentum kinetic term in the coupled-strings
/// Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpatialSignature {
    /// `+½ Σ (p^x_i)²`: the field equations are elliptic in `(t, x)`.
    Euclidean,
    /// `−½ Σ (p^x_i)²`: the field equations are damped wave equations.
    Lorentzian,
}

impl SpatialSignature {
    pub fn sign(self) -> f64 {
        match self {
            SpatialSignature::Euclidean => 1.0,
            SpatialSignature::Lorentzian => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledStringsParams {
    pub gamma: f64,
    pub coupling: Coupling,
    pub signature: SpatialSignature,
}

impl CoupledStringsParams {
    pub fn validate(&self) -> Result<()> {
        require(
            self.gamma >= 0.0 && self.gamma.is_finite(),
            "gamma must be non-negative",
        )?;
        match self.coupling {
            Coupling::Harmonic { stiffness: c } | Coupling::Quartic { strength: c } => {
                require(c.is_finite(), "coupling constant must be finite")
            }
            Coupling::None => Ok(()),
        }
    }
}

impl Default for CoupledStringsParams {
    fn default() -> Self {
        CoupledStringsParams {
            gamma: 0.1,
            coupling: Coupling::Harmonic { stiffness: 1.0 },
            signature: SpatialSignature::Euclidean,
        }
    }
}

/// Damped oscillator with unit mass and stiffness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub gamma: f64,
}

impl OscillatorParams {
    pub fn validate(&self) -> Result<()> {
        require(
            self.gamma >= 0.0 && self.gamma.is_finite(),
            "gamma must be non-negative",
        )
    }
}

/// Canonical structure `η^α = ds^α − p_i^α dq^i` on `(⊕^k T*R^n) × R^k`,
/// with `H ≡ 0`.
pub fn build_canonical(n: usize, k: usize) -> Result<KContactSystem> {
    require(n >= 1 && k >= 1, "canonical model needs n, k >= 1")?;
    let layout = DarbouxLayout::standard(n, k);
    let m = layout.dim();
    let mut coords = vec![String::new(); m];
    for i in 0..n {
        coords[layout.q(i)] = format!("q{}", i + 1);
        for a in 0..k {
            coords[layout.p(a, i)] = format!("p{}_{}", a + 1, i + 1);
        }
    }
    for a in 0..k {
        coords[layout.s(a)] = format!("s{}", a + 1);
    }
    KContactSystem::darboux(
        format!("canonical(n={n},k={k})"),
        coords,
        layout,
        ScalarField::constant(m, 0.0),
    )
}

/// The 2-contact structure `η¹ = ds − ½(y dx − x dy)`, `η² = dt − p dx − q dy`
/// on `R⁶` with coordinates `(x, y, p, q, s, t)`; `H ≡ 0`.
pub fn build_example3() -> Result<KContactSystem> {
    let eta1 = CoordinateForm::new(
        6,
        |c| Vector::from_column_slice(&[-0.5 * c[1], 0.5 * c[0], 0.0, 0.0, 1.0, 0.0]),
        |_| {
            let mut d = Matrix::zeros(6, 6);
            d[(0, 1)] = 1.0;
            d[(1, 0)] = -1.0;
            d
        },
    );
    let eta2 = CoordinateForm::new(
        6,
        |c| Vector::from_column_slice(&[-c[2], -c[3], 0.0, 0.0, 0.0, 1.0]),
        |_| {
            let mut d = Matrix::zeros(6, 6);
            d[(0, 2)] = 1.0;
            d[(2, 0)] = -1.0;
            d[(1, 3)] = 1.0;
            d[(3, 1)] = -1.0;
            d
        },
    );
    KContactSystem::new(
        "example3",
        names(&["x", "y", "p", "q", "s", "t"]),
        vec![eta1, eta2],
        ScalarField::constant(6, 0.0),
    )
}

/// Damped string on `(u, p^t, p^x, s^t, s^x)` with
/// `H = (p^t)²/2ρ − (p^x)²/2τ + k s^t`.
pub fn build_damped_string(p: DampedStringParams) -> Result<KContactSystem> {
    p.validate()?;
    let DampedStringParams { rho, tau, damp } = p;
    let h = ScalarField::with_gradient(
        5,
        move |x| x[1] * x[1] / (2.0 * rho) - x[2] * x[2] / (2.0 * tau) + damp * x[3],
        move |x| Vector::from_column_slice(&[0.0, x[1] / rho, -x[2] / tau, damp, 0.0]),
    );
    KContactSystem::darboux(
        "damped-string",
        names(&["u", "p_t", "p_x", "s_t", "s_x"]),
        DarbouxLayout::standard(1, 2),
        h,
    )
}

fn burgers_hamiltonian(dim: usize, idx: [usize; 4], p: BurgersParams) -> ScalarField {
    let BurgersParams { diff, gamma } = p;
    let [u, px, qx, sx] = idx;
    ScalarField::with_gradient(
        dim,
        move |x| -x[px] * x[qx] / diff + gamma * x[u] * x[sx],
        move |x| {
            let mut g = Vector::zeros(dim);
            g[u] = gamma * x[sx];
            g[px] = -x[qx] / diff;
            g[qx] = -x[px] / diff;
            g[sx] = gamma * x[u];
            g
        },
    )
}

/// Contactified heat/Burgers system on `(u, v, p^x, q^x, s^t, s^x)`:
/// `η^t = ds^t − ½(−v du + u dv)`, `η^x = ds^x − p^x du − q^x dv`,
/// `H = −(1/k) p^x q^x + γ u s^x`.
pub fn build_burgers(p: BurgersParams) -> Result<KContactSystem> {
    p.validate()?;
    let eta_t = CoordinateForm::new(
        6,
        |c| Vector::from_column_slice(&[0.5 * c[1], -0.5 * c[0], 0.0, 0.0, 1.0, 0.0]),
        |_| {
            let mut d = Matrix::zeros(6, 6);
            d[(0, 1)] = -1.0;
            d[(1, 0)] = 1.0;
            d
        },
    );
    let eta_x = CoordinateForm::new(
        6,
        |c| Vector::from_column_slice(&[-c[2], -c[3], 0.0, 0.0, 0.0, 1.0]),
        |_| {
            let mut d = Matrix::zeros(6, 6);
            d[(0, 2)] = 1.0;
            d[(2, 0)] = -1.0;
            d[(1, 3)] = 1.0;
            d[(3, 1)] = -1.0;
            d
        },
    );
    KContactSystem::new(
        "burgers",
        names(&["u", "v", "p_x", "q_x", "s_t", "s_x"]),
        vec![eta_t, eta_x],
        burgers_hamiltonian(6, [0, 2, 3, 5], p),
    )
}

/// The Burgers Hamiltonian on the full canonical space
/// `⊕²T*R² × R²` with coordinates `(u, v, p_t, q_t, p_x, q_x, s_t, s_x)`.
/// Restricting to `p_t = −½v`, `q_t = ½u` recovers [`build_burgers`]. Useful
/// for reading the Darboux-form rates; it is not an evolution system.
pub fn build_burgers_canonical_lift(p: BurgersParams) -> Result<KContactSystem> {
    p.validate()?;
    KContactSystem::darboux(
        "burgers-lift",
        names(&["u", "v", "p_t", "q_t", "p_x", "q_x", "s_t", "s_x"]),
        DarbouxLayout::standard(2, 2),
        burgers_hamiltonian(8, [0, 4, 5, 7], p),
    )
}

/// Two strings `(q¹, q²)` with momenta `p^t_i, p^x_i` and
/// `H = ½Σ(p^t_i)² ± ½Σ(p^x_i)² + G(z) + γ s^t`.
pub fn build_coupled_strings(p: CoupledStringsParams) -> Result<KContactSystem> {
    p.validate()?;
    let CoupledStringsParams {
        gamma,
        coupling,
        signature,
    } = p;
    let sign = signature.sign();
    let h = ScalarField::with_gradient(
        8,
        move |x| {
            0.5 * (x[2] * x[2] + x[3] * x[3])
                + 0.5 * sign * (x[4] * x[4] + x[5] * x[5])
                + coupling.value(x[0], x[1])
                + gamma * x[6]
        },
        move |x| {
            let (g1, g2) = coupling.gradient(x[0], x[1]);
            Vector::from_column_slice(&[g1, g2, x[2], x[3], sign * x[4], sign * x[5], gamma, 0.0])
        },
    );
    KContactSystem::darboux(
        "coupled-strings",
        names(&["q1", "q2", "p_t1", "p_t2", "p_x1", "p_x2", "s_t", "s_x"]),
        DarbouxLayout::standard(2, 2),
        h,
    )
}

/// Contact oscillator on `(q, p, s)` with `η = ds − p dq` and
/// `H = ½p² + ½q² + γs`.
pub fn build_damped_oscillator(p: OscillatorParams) -> Result<KContactSystem> {
    p.validate()?;
    let gamma = p.gamma;
    let h = ScalarField::with_gradient(
        3,
        move |x| 0.5 * x[1] * x[1] + 0.5 * x[0] * x[0] + gamma * x[2],
        move |x| Vector::from_column_slice(&[x[0], x[1], gamma]),
    );
    KContactSystem::darboux(
        "damped-oscillator",
        names(&["q", "p", "s"]),
        DarbouxLayout::standard(1, 1),
        h,
    )
}

/// The canonical n = 1, k = 2 forms with the second form replaced by the
/// first. Not a k-contact structure.
pub fn build_degenerate_duplicate() -> Result<KContactSystem> {
    let canonical = build_canonical(1, 2)?;
    let eta = canonical.etas()[0].clone();
    KContactSystem::new(
        "degenerate-duplicate",
        canonical.coordinate_names().to_vec(),
        vec![eta.clone(), eta],
        ScalarField::constant(5, 0.0),
    )
}

/// Seeded uniform points in the box `[−half_width, half_width]^dim`.
pub fn sample_points(dim: usize, count: usize, seed: u64, half_width: f64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coords = (0..dim)
                .map(|_| rng.gen_range(-half_width..=half_width))
                .collect();
            Point::new(coords).expect("finite samples")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DEFAULT_RANK_TOL;
    use crate::kcontact::{darboux_hdw_rhs, solve_reeb, verify_structure, REEB_TOL};

    fn pt(xs: &[f64]) -> Point {
        Point::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn canonical_dimensions() {
        assert_eq!(build_canonical(1, 1).unwrap().dim(), 3);
        let c = build_canonical(1, 2).unwrap();
        assert_eq!(c.dim(), 5);
        assert_eq!(c.coordinate_names(), &["q1", "p1_1", "p2_1", "s1", "s2"]);
        assert_eq!(build_canonical(2, 3).unwrap().dim(), 2 + 6 + 3);
        assert!(build_canonical(0, 1).is_err());
    }

    #[test]
    fn canonical_contact_form_coefficients() {
        let c = build_canonical(1, 2).unwrap();
        let x = pt(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        let rows = c.eta_rows(&x).unwrap();
        assert_eq!(rows[0].as_slice(), &[-0.2, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rows[1].as_slice(), &[-0.3, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn example3_exterior_derivatives() {
        let sys = build_example3().unwrap();
        let x = pt(&[0.3, -0.6, 0.2, 1.1, 0.0, 2.0]);
        let d = sys.d_etas(&x).unwrap();
        let mut dxdy = Matrix::zeros(6, 6);
        dxdy[(0, 1)] = 1.0;
        dxdy[(1, 0)] = -1.0;
        assert_eq!(d[0], dxdy);
        for eta in sys.etas() {
            let fd = eta.fd_exterior_derivative(&x, 1e-5).unwrap();
            assert!((fd - eta.exterior_derivative(&x).unwrap()).amax() < 1e-9);
        }
        let frame = solve_reeb(&sys, &x, REEB_TOL).unwrap();
        assert!(
            (&frame.vectors[0] - Vector::from_column_slice(&[0., 0., 0., 0., 1., 0.])).amax()
                < 1e-12
        );
        assert!(
            (&frame.vectors[1] - Vector::from_column_slice(&[0., 0., 0., 0., 0., 1.])).amax()
                < 1e-12
        );
    }

    #[test]
    fn burgers_forms_match_their_differentials() {
        let sys = build_burgers(BurgersParams::burgers(0.1)).unwrap();
        let x = pt(&[0.3, -0.6, 0.2, 1.1, 0.4, 2.0]);
        let d = sys.d_etas(&x).unwrap();
        // dη^t = −du∧dv
        assert_eq!(d[0][(0, 1)], -1.0);
        assert_eq!(d[0][(1, 0)], 1.0);
        for eta in sys.etas() {
            let fd = eta.fd_exterior_derivative(&x, 1e-5).unwrap();
            assert!((fd - eta.exterior_derivative(&x).unwrap()).amax() < 1e-9);
        }
        let heat = build_burgers(BurgersParams::heat(0.1)).unwrap();
        for (a, b) in sys.etas().iter().zip(heat.etas()) {
            assert_eq!(a.coeffs(&x).unwrap(), b.coeffs(&x).unwrap());
            assert_eq!(
                a.exterior_derivative(&x).unwrap(),
                b.exterior_derivative(&x).unwrap()
            );
        }
    }

    #[test]
    fn damped_string_rates() {
        let params = DampedStringParams {
            rho: 2.0,
            tau: 3.0,
            damp: 0.5,
        };
        let sys = build_damped_string(params).unwrap();
        let rates = darboux_hdw_rhs(&sys, &pt(&[0.1, 2.0, 0.0, 0.3, 0.0])).unwrap();
        assert_eq!(rates.q_rates[0][0], 1.0);
        let x = pt(&[0.1, 0.7, -0.4, 0.3, 0.9]);
        let rates = darboux_hdw_rhs(&sys, &x).unwrap();
        assert!((rates.q_rates[1][0] - 0.4 / 3.0).abs() < 1e-15);
        assert!((rates.p_divergence[0] + 0.5 * 0.7).abs() < 1e-15);
        let expected_s = 0.49 / 4.0 - 0.16 / 6.0 - 0.5 * 0.3;
        assert!((rates.s_divergence - expected_s).abs() < 1e-15);

        let undamped = build_damped_string(DampedStringParams {
            damp: 0.0,
            ..params
        })
        .unwrap();
        assert_eq!(darboux_hdw_rhs(&undamped, &x).unwrap().p_divergence[0], 0.0);
    }

    #[test]
    fn burgers_lift_spatial_constraint() {
        let p = BurgersParams::burgers(0.25);
        let sys = build_burgers_canonical_lift(p).unwrap();
        // gauge state v = 0, p^x = 0
        let x = pt(&[0.7, 0.0, 0.0, 0.35, 0.0, -0.8, 0.0, 0.0]);
        let rates = darboux_hdw_rhs(&sys, &x).unwrap();
        assert!((rates.q_rates[1][0] - 0.8 / 0.25).abs() < 1e-14);
        assert!((rates.q_rates[1][0] - (-x.as_slice()[5] / p.diff)).abs() < 1e-14);
    }

    #[test]
    fn oscillator_reeb_rate_is_gamma() {
        let sys = build_damped_oscillator(OscillatorParams { gamma: 0.3 }).unwrap();
        let x = pt(&[0.4, -0.2, 1.5]);
        let r = solve_reeb(&sys, &x, REEB_TOL).unwrap();
        let dh = sys.hamiltonian_gradient(&x).unwrap();
        assert!((dh.dot(&r.vectors[0]) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn every_model_passes_structure_at_sampled_points() {
        let models = [
            build_canonical(1, 1).unwrap(),
            build_canonical(2, 3).unwrap(),
            build_example3().unwrap(),
            build_damped_string(DampedStringParams::default()).unwrap(),
            build_burgers(BurgersParams::burgers(0.1)).unwrap(),
            build_burgers_canonical_lift(BurgersParams::burgers(0.1)).unwrap(),
            build_coupled_strings(CoupledStringsParams::default()).unwrap(),
            build_damped_oscillator(OscillatorParams { gamma: 0.3 }).unwrap(),
        ];
        for sys in &models {
            let pts = sample_points(sys.dim(), 50, 7, 1.0);
            let report = verify_structure(sys, &pts, DEFAULT_RANK_TOL).unwrap();
            assert!(
                report.passed(),
                "{} failed {:?}",
                sys.name(),
                report.failed_conditions()
            );
            assert!(report.min_retained > 1e-6, "{}", sys.name());
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(build_damped_string(DampedStringParams {
            rho: 0.0,
            tau: 1.0,
            damp: 0.0
        })
        .is_err());
        assert!(build_burgers(BurgersParams {
            diff: -1.0,
            gamma: 0.0
        })
        .is_err());
        assert!(build_damped_oscillator(OscillatorParams { gamma: -0.1 }).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_points(4, 3, 11, 1.0), sample_points(4, 3, 11, 1.0));
        assert_ne!(sample_points(4, 3, 11, 1.0), sample_points(4, 3, 12, 1.0));
    }
}
