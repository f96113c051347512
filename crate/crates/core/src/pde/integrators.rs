use super::{Boundary, Gauge, SectionGrid, SpaceGrid};
use crate::error::{Error, Result};
use crate::models::{
    BurgersParams, CoupledStringsParams, DampedStringParams, OscillatorParams, SpatialSignature,
};

/// Time stepping request. The step actually used is `t_end / ceil(t_end / dt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeStepping {
    pub t_end: f64,
    pub dt: f64,
    /// Store a snapshot every this many steps; the final state is always stored.
    pub save_every: usize,
}

impl TimeStepping {
    pub fn new(t_end: f64, dt: f64, save_every: usize) -> Result<Self> {
        let s = TimeStepping {
            t_end,
            dt,
            save_every,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.save_every == 0 {
            return Err(Error::InvalidArgument(
                "save_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    fn check_bound(&self, bound: f64, rule: &'static str) -> Result<()> {
        if self.dt > bound {
            return Err(Error::Stability {
                dt: self.dt,
                bound,
                rule,
            });
        }
        Ok(())
    }
}

/// Classical RK4 on `y' = f(y)`, calling `save` at `t = 0`, every
/// `save_every` steps, and at the end.
fn run_rk4(
    y: &mut [f64],
    stepping: &TimeStepping,
    mut rhs: impl FnMut(&[f64], &mut [f64]),
    mut save: impl FnMut(f64, &[f64]),
) -> Result<()> {
    let n = y.len();
    let steps = stepping.steps();
    let dt = stepping.effective_dt();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    save(0.0, y);
    for step in 1..=steps {
        rhs(y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + dt * k3[i];
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = if step == steps {
            stepping.t_end
        } else {
            step as f64 * dt
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        if step % stepping.save_every == 0 || step == steps {
            save(t, y);
        }
    }
    Ok(())
}

/// `∂_x u` with central differences everywhere; at the two ends the missing
/// neighbour is a cubic extrapolation `u_{−1} = 4u_0 − 6u_1 + 4u_2 − u_3`.
/// This keeps the end values' truncation error in step with the interior
/// stencil, so differencing `∂_x u` once more stays second order next to the
/// boundary.
fn dirichlet_slope(u: &[f64], dx: f64, out: &mut [f64]) {
    let n = u.len();
    let inv = 1.0 / (2.0 * dx);
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - u[i - 1]) * inv;
    }
    out[0] = (-4.0 * u[0] + 7.0 * u[1] - 4.0 * u[2] + u[3]) * inv;
    out[n - 1] = (4.0 * u[n - 1] - 7.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * inv;
}

/// Central `∂_x u` on the `M = N − 1` independent nodes of a periodic grid.
fn periodic_slope(u: &[f64], dx: f64, out: &mut [f64]) {
    let m = u.len();
    let inv = 1.0 / (2.0 * dx);
    for i in 0..m {
        out[i] = (u[(i + 1) % m] - u[(i + m - 1) % m]) * inv;
    }
}

fn require_boundary(grid: &SpaceGrid, b: Boundary, what: &str) -> Result<()> {
    if grid.boundary() != b {
        return Err(Error::InvalidArgument(format!("{what} needs a {b:?} grid")));
    }
    Ok(())
}

fn sample_dirichlet(grid: &SpaceGrid, f: &dyn Fn(f64) -> f64, what: &str) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = grid.nodes().into_iter().map(f).collect();
    let scale = 1.0 + v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let n = v.len();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial profile"));
    }
    if v[0].abs() > 1e-10 * scale || v[n - 1].abs() > 1e-10 * scale {
        return Err(Error::InvalidArgument(format!(
            "{what} must vanish at both ends for zero Dirichlet data"
        )));
    }
    v[0] = 0.0;
    v[n - 1] = 0.0;
    Ok(v)
}

fn sample_periodic(grid: &SpaceGrid, f: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    let v: Vec<f64> = grid.nodes().into_iter().map(f).collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("initial profile"));
    }
    let n = v.len();
    let scale = 1.0 + v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if (v[0] - v[n - 1]).abs() > 1e-10 * scale {
        return Err(Error::InvalidArgument(
            "initial profile is not periodic".into(),
        ));
    }
    Ok(v[..n - 1].to_vec())
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Damped string `u_tt − c²u_xx + k u_t = 0` with zero Dirichlet data. Evolves
/// `(u, p^t, s^t)`; `p^x := −τ u_x` and `s^x ≡ 0`.
pub fn integrate_damped_string(
    params: DampedStringParams,
    grid: &SpaceGrid,
    u0: impl Fn(f64) -> f64,
    v0: impl Fn(f64) -> f64,
    stepping: &TimeStepping,
) -> Result<SectionGrid> {
    params.validate()?;
    stepping.validate()?;
    require_boundary(grid, Boundary::DirichletZero, "the damped string")?;
    let dx = grid.dx();
    stepping.check_bound(0.5 * dx / params.wave_speed(), "dt <= 0.5 dx / c")?;

    let DampedStringParams { rho, tau, damp } = params;
    let n = grid.len();
    let mut y = vec![0.0; 3 * n];
    y[..n].copy_from_slice(&sample_dirichlet(grid, &u0, "initial displacement")?);
    let v = sample_dirichlet(grid, &v0, "initial velocity")?;
    for i in 0..n {
        y[n + i] = rho * v[i];
    }

    let inv_dx2 = 1.0 / (dx * dx);
    let mut slope = vec![0.0; n];
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let (u, rest) = y.split_at(n);
        let (pt, st) = rest.split_at(n);
        let mut sl = vec![0.0; n];
        dirichlet_slope(u, dx, &mut sl);
        dy[0] = 0.0;
        dy[n - 1] = 0.0;
        dy[n] = 0.0;
        dy[2 * n - 1] = 0.0;
        for i in 1..n - 1 {
            dy[i] = pt[i] / rho;
            dy[n + i] = tau * (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_dx2 - damp * pt[i];
        }
        for i in 0..n {
            let px = -tau * sl[i];
            dy[2 * n + i] = pt[i] * pt[i] / (2.0 * rho) - px * px / (2.0 * tau) - damp * st[i];
        }
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    run_rk4(&mut y, stepping, rhs, |t, y| {
        let u = &y[..n];
        dirichlet_slope(u, dx, &mut slope);
        times.push(t);
        values.push(vec![
            u.to_vec(),
            y[n..2 * n].to_vec(),
            slope.iter().map(|s| -tau * s).collect(),
            y[2 * n..].to_vec(),
            vec![0.0; n],
        ]);
    })?;
    SectionGrid::new(
        "damped-string",
        Gauge::DampedString,
        *grid,
        names(&["u", "p_t", "p_x", "s_t", "s_x"]),
        times,
        values,
    )
}

/// `Σ p_t²/2ρ dx + Σ τ/2 ((u_{i+1} − u_i)/dx)² dx`, exactly conserved by the
/// undamped semi-discrete string.
pub fn discrete_string_energy(
    params: DampedStringParams,
    psi: &SectionGrid,
    ti: usize,
) -> Result<f64> {
    let u = psi
        .field(ti, "u")
        .ok_or_else(|| Error::InvalidArgument("section has no field u".into()))?;
    let pt = psi
        .field(ti, "p_t")
        .ok_or_else(|| Error::InvalidArgument("section has no field p_t".into()))?;
    let dx = psi.grid().dx();
    let kinetic: f64 = pt.iter().map(|p| p * p / (2.0 * params.rho)).sum::<f64>() * dx;
    let potential: f64 = u
        .windows(2)
        .map(|w| {
            let s = (w[1] - w[0]) / dx;
            0.5 * params.tau * s * s
        })
        .sum::<f64>()
        * dx;
    Ok(kinetic + potential)
}

fn burgers_section(
    model: &str,
    grid: &SpaceGrid,
    diff: f64,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
) -> Result<SectionGrid> {
    let n = grid.len();
    let dx = grid.dx();
    let mut slope = vec![0.0; n - 1];
    let values = states
        .into_iter()
        .map(|u| {
            periodic_slope(&u, dx, &mut slope);
            let mut full = u.clone();
            full.push(u[0]);
            let mut qx: Vec<f64> = slope.iter().map(|s| -diff * s).collect();
            qx.push(qx[0]);
            vec![
                full,
                vec![0.0; n],
                vec![0.0; n],
                qx,
                vec![0.0; n],
                vec![0.0; n],
            ]
        })
        .collect();
    SectionGrid::new(
        model,
        Gauge::Burgers,
        *grid,
        names(&["u", "v", "p_x", "q_x", "s_t", "s_x"]),
        times,
        values,
    )
}

fn collect_states(
    y: &mut [f64],
    stepping: &TimeStepping,
    rhs: impl FnMut(&[f64], &mut [f64]),
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    run_rk4(y, stepping, rhs, |t, y| {
        times.push(t);
        states.push(y.to_vec());
    })?;
    Ok((times, states))
}

/// `u_t = k u_xx + γk u u_x` on a periodic grid, in the gauge
/// `v ≡ p^x ≡ s^t ≡ s^x ≡ 0`, `q^x := −k u_x`.
pub fn integrate_burgers(
    params: BurgersParams,
    grid: &SpaceGrid,
    u0: impl Fn(f64) -> f64,
    stepping: &TimeStepping,
) -> Result<SectionGrid> {
    params.validate()?;
    stepping.validate()?;
    require_boundary(grid, Boundary::Periodic, "the Burgers system")?;
    let BurgersParams { diff, gamma } = params;
    let dx = grid.dx();
    let mut y = sample_periodic(grid, &u0)?;
    stepping.check_bound(0.25 * dx * dx / diff, "dt <= 0.25 dx^2 / k")?;
    let speed = (gamma * diff).abs() * y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if speed > 0.0 {
        stepping.check_bound(0.5 * dx / speed, "dt <= 0.5 dx / max|u|")?;
    }

    let m = y.len();
    let inv_dx2 = 1.0 / (dx * dx);
    let inv_2dx = 1.0 / (2.0 * dx);
    let gk = gamma * diff;
    let rhs = |u: &[f64], du: &mut [f64]| {
        for i in 0..m {
            let (l, r) = ((i + m - 1) % m, (i + 1) % m);
            du[i] = diff * ((u[l] - 2.0 * u[i] + u[r]) * inv_dx2);
        }
        if gamma != 0.0 {
            for i in 0..m {
                let (l, r) = ((i + m - 1) % m, (i + 1) % m);
                du[i] += gk * u[i] * ((u[r] - u[l]) * inv_2dx);
            }
        }
    };
    let (times, states) = collect_states(&mut y, stepping, rhs)?;
    burgers_section("burgers", grid, diff, times, states)
}

/// Reference heat solver `u_t = k u_xx` on a periodic grid, written
/// independently of [`integrate_burgers`] with the same stencil and stepping.
pub fn integrate_heat(
    diff: f64,
    grid: &SpaceGrid,
    u0: impl Fn(f64) -> f64,
    stepping: &TimeStepping,
) -> Result<SectionGrid> {
    BurgersParams::heat(diff).validate()?;
    stepping.validate()?;
    require_boundary(grid, Boundary::Periodic, "the heat equation")?;
    let dx = grid.dx();
    stepping.check_bound(0.25 * dx * dx / diff, "dt <= 0.25 dx^2 / k")?;
    let mut y = sample_periodic(grid, &u0)?;
    let inv_dx2 = 1.0 / (dx * dx);
    let rhs = |u: &[f64], du: &mut [f64]| {
        let m = u.len();
        du[0] = diff * ((u[m - 1] - 2.0 * u[0] + u[1]) * inv_dx2);
        for i in 1..m - 1 {
            du[i] = diff * ((u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_dx2);
        }
        du[m - 1] = diff * ((u[m - 2] - 2.0 * u[m - 1] + u[0]) * inv_dx2);
    };
    let (times, states) = collect_states(&mut y, stepping, rhs)?;
    burgers_section("heat", grid, diff, times, states)
}

/// Two coupled damped strings with unit density and tension, zero Dirichlet
/// data. Evolves `(q^i, p^t_i, s^t)`; `p^x_i := −∂_x q^i`, `s^x ≡ 0`.
pub fn integrate_coupled_strings(
    params: CoupledStringsParams,
    grid: &SpaceGrid,
    q1_0: impl Fn(f64) -> f64,
    q2_0: impl Fn(f64) -> f64,
    stepping: &TimeStepping,
) -> Result<SectionGrid> {
    params.validate()?;
    stepping.validate()?;
    if params.signature != SpatialSignature::Lorentzian {
        return Err(Error::InvalidArgument(
            "the Euclidean-signature coupled strings are elliptic in (t, x); simulate the Lorentzian signature".into(),
        ));
    }
    require_boundary(grid, Boundary::DirichletZero, "the coupled strings")?;
    let dx = grid.dx();
    stepping.check_bound(0.5 * dx, "dt <= 0.5 dx / c")?;

    let CoupledStringsParams {
        gamma, coupling, ..
    } = params;
    let n = grid.len();
    let mut y = vec![0.0; 5 * n];
    y[..n].copy_from_slice(&sample_dirichlet(grid, &q1_0, "initial q1")?);
    y[n..2 * n].copy_from_slice(&sample_dirichlet(grid, &q2_0, "initial q2")?);

    let inv_dx2 = 1.0 / (dx * dx);
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let (q1, q2) = (&y[..n], &y[n..2 * n]);
        let (p1, p2) = (&y[2 * n..3 * n], &y[3 * n..4 * n]);
        let st = &y[4 * n..];
        let mut s1 = vec![0.0; n];
        let mut s2 = vec![0.0; n];
        dirichlet_slope(q1, dx, &mut s1);
        dirichlet_slope(q2, dx, &mut s2);
        for b in [0, n - 1] {
            dy[b] = 0.0;
            dy[n + b] = 0.0;
            dy[2 * n + b] = 0.0;
            dy[3 * n + b] = 0.0;
        }
        for i in 1..n - 1 {
            let (g1, g2) = coupling.gradient(q1[i], q2[i]);
            dy[i] = p1[i];
            dy[n + i] = p2[i];
            dy[2 * n + i] = (q1[i - 1] - 2.0 * q1[i] + q1[i + 1]) * inv_dx2 - g1 - gamma * p1[i];
            dy[3 * n + i] = (q2[i - 1] - 2.0 * q2[i] + q2[i + 1]) * inv_dx2 - g2 - gamma * p2[i];
        }
        for i in 0..n {
            dy[4 * n + i] = 0.5 * (p1[i] * p1[i] + p2[i] * p2[i])
                - 0.5 * (s1[i] * s1[i] + s2[i] * s2[i])
                - coupling.value(q1[i], q2[i])
                - gamma * st[i];
        }
    };

    let mut times = Vec::new();
    let mut values = Vec::new();
    let (mut s1, mut s2) = (vec![0.0; n], vec![0.0; n]);
    run_rk4(&mut y, stepping, rhs, |t, y| {
        dirichlet_slope(&y[..n], dx, &mut s1);
        dirichlet_slope(&y[n..2 * n], dx, &mut s2);
        times.push(t);
        values.push(vec![
            y[..n].to_vec(),
            y[n..2 * n].to_vec(),
            y[2 * n..3 * n].to_vec(),
            y[3 * n..4 * n].to_vec(),
            s1.iter().map(|s| -s).collect(),
            s2.iter().map(|s| -s).collect(),
            y[4 * n..].to_vec(),
            vec![0.0; n],
        ]);
    })?;
    SectionGrid::new(
        "coupled-strings",
        Gauge::CoupledStrings,
        *grid,
        names(&["q1", "q2", "p_t1", "p_t2", "p_x1", "p_x2", "s_t", "s_x"]),
        times,
        values,
    )
}

/// A sampled ODE trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(q, p, s)` at each time.
    pub states: Vec<[f64; 3]>,
}

impl Trajectory {
    /// `H = ½p² + ½q² + γs` along the trajectory.
    pub fn energies(&self, params: OscillatorParams) -> Vec<f64> {
        self.states
            .iter()
            .map(|[q, p, s]| 0.5 * p * p + 0.5 * q * q + params.gamma * s)
            .collect()
    }
}

/// RK4 for the contact Hamiltonian vector field `(p, −q − γp, p² − H)` of the
/// damped oscillator.
pub fn integrate_damped_oscillator(
    params: OscillatorParams,
    ic: [f64; 3],
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    params.validate()?;
    let stepping = TimeStepping::new(t_end, dt, 1)?;
    if ic.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("oscillator initial state"));
    }
    let gamma = params.gamma;
    let mut y = ic.to_vec();
    let rhs = |y: &[f64], dy: &mut [f64]| {
        let (q, p, s) = (y[0], y[1], y[2]);
        let h = 0.5 * p * p + 0.5 * q * q + gamma * s;
        dy[0] = p;
        dy[1] = -q - gamma * p;
        dy[2] = p * p - h;
    };
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
    };
    run_rk4(&mut y, &stepping, rhs, |t, y| {
        traj.times.push(t);
        traj.states.push([y[0], y[1], y[2]]);
    })?;
    Ok(traj)
}
