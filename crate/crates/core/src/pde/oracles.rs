//! Closed-form and spectral reference solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Gauge, SectionGrid, SpaceGrid};
use crate::error::{Error, Result};
use crate::models::{BurgersParams, DampedStringParams};

/// Resolution of the Cole–Hopf transforms.
pub const DEFAULT_ORACLE_MODES: usize = 4096;

/// `H(0)·e^{−γt}`, the energy of the damped contact oscillator.
pub fn oscillator_energy_oracle(gamma: f64, h0: f64, t: f64) -> f64 {
    h0 * (-gamma * t).exp()
}

/// Exact damped-string solution for `u(0, x) = sin(nπ(x − x0)/L)`,
/// `u_t(0, x) = 0`, zero Dirichlet data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalStringOracle {
    params: DampedStringParams,
    x0: f64,
    wavenumber: f64,
    omega: f64,
}

impl ModalStringOracle {
    pub fn new(params: DampedStringParams, mode: u32, x0: f64, x1: f64) -> Result<Self> {
        params.validate()?;
        if mode == 0 || !(x1 > x0) {
            return Err(Error::InvalidArgument(
                "modal oracle needs mode >= 1 and x0 < x1".into(),
            ));
        }
        let wavenumber = mode as f64 * PI / (x1 - x0);
        let omega2 = params.wave_speed_squared() * wavenumber * wavenumber
            - 0.25 * params.damp * params.damp;
        if !(omega2 > 0.0) {
            return Err(Error::Oracle(format!("mode {mode} is not underdamped")));
        }
        Ok(ModalStringOracle {
            params,
            x0,
            wavenumber,
            omega: omega2.sqrt(),
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn shape(&self, x: f64) -> (f64, f64) {
        let a = self.wavenumber * (x - self.x0);
        (a.sin(), self.wavenumber * a.cos())
    }

    fn amplitude(&self, t: f64) -> (f64, f64) {
        let k = self.params.damp;
        let w = self.omega;
        let decay = (-0.5 * k * t).exp();
        let a = decay * ((w * t).cos() + k / (2.0 * w) * (w * t).sin());
        let c2k2 = self.params.wave_speed_squared() * self.wavenumber * self.wavenumber;
        let da = -decay * c2k2 / w * (w * t).sin();
        (a, da)
    }

    pub fn displacement(&self, t: f64, x: f64) -> f64 {
        self.amplitude(t).0 * self.shape(x).0
    }

    pub fn velocity(&self, t: f64, x: f64) -> f64 {
        self.amplitude(t).1 * self.shape(x).0
    }

    pub fn slope(&self, t: f64, x: f64) -> f64 {
        self.amplitude(t).0 * self.shape(x).1
    }

    fn action_rate(&self, t: f64, x: f64, s: f64) -> f64 {
        let DampedStringParams { rho, tau, damp } = self.params;
        let ut = self.velocity(t, x);
        let ux = self.slope(t, x);
        0.5 * rho * ut * ut - 0.5 * tau * ux * ux - damp * s
    }

    /// The exact section in the solver's gauge. `s^t`, which has no closed
    /// form, is integrated from `s^t(0) = 0` by RK4 with `substeps` steps
    /// between consecutive times.
    pub fn section(&self, grid: &SpaceGrid, times: &[f64], substeps: usize) -> Result<SectionGrid> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidArgument(
                "oracle section times must start at 0".into(),
            ));
        }
        let substeps = substeps.max(1);
        let DampedStringParams { rho, tau, .. } = self.params;
        let xs = grid.nodes();
        let mut s = vec![0.0; xs.len()];
        let mut values = Vec::with_capacity(times.len());
        let mut prev = 0.0;
        for &t in times {
            let h = (t - prev) / substeps as f64;
            for step in 0..substeps {
                let t0 = prev + step as f64 * h;
                for (si, &x) in s.iter_mut().zip(&xs) {
                    let k1 = self.action_rate(t0, x, *si);
                    let k2 = self.action_rate(t0 + 0.5 * h, x, *si + 0.5 * h * k1);
                    let k3 = self.action_rate(t0 + 0.5 * h, x, *si + 0.5 * h * k2);
                    let k4 = self.action_rate(t0 + h, x, *si + h * k3);
                    *si += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            prev = t;
            values.push(vec![
                xs.iter().map(|&x| self.displacement(t, x)).collect(),
                xs.iter().map(|&x| rho * self.velocity(t, x)).collect(),
                xs.iter().map(|&x| -tau * self.slope(t, x)).collect(),
                s.clone(),
                vec![0.0; xs.len()],
            ]);
        }
        SectionGrid::new(
            "damped-string-exact",
            Gauge::DampedString,
            *grid,
            ["u", "p_t", "p_x", "s_t", "s_x"]
                .iter()
                .map(|c| c.to_string())
                .collect(),
            times.to_vec(),
            values,
        )
    }
}

/// Spectral solution of `u_t = k u_xx + γk u u_x` with periodic data: the
/// Cole–Hopf transform for `γ ≠ 0`, a Fourier series for `γ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ColeHopfOracle {
    x0: f64,
    length: f64,
    diff: f64,
    mean: f64,
    /// `a = −γk`; `v = a·u` solves `v_t + v v_x = k v_xx`.
    scale: f64,
    /// `(κ_j, C_j)` with the periodic field `Re Σ C_j e^{iκ_j θ}`.
    coeffs: Vec<(f64, Complex64)>,
}

impl ColeHopfOracle {
    pub fn new(
        u0: impl Fn(f64) -> f64,
        x0: f64,
        x1: f64,
        params: BurgersParams,
        modes: usize,
    ) -> Result<Self> {
        params.validate()?;
        if !(x1 > x0) || modes < 16 || modes % 2 != 0 {
            return Err(Error::InvalidArgument(
                "oracle needs x0 < x1 and an even mode count >= 16".into(),
            ));
        }
        let (a0, a1) = (u0(x0), u0(x1));
        if !a0.is_finite() || (a0 - a1).abs() > 1e-10 * (1.0 + a0.abs()) {
            return Err(Error::Oracle("initial profile is not periodic".into()));
        }
        let length = x1 - x0;
        let m = modes;
        let samples: Vec<f64> = (0..m)
            .map(|n| u0(x0 + length * n as f64 / m as f64))
            .collect();
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("oracle initial profile"));
        }
        let mean = samples.iter().sum::<f64>() / m as f64;
        let scale = -params.gamma * params.diff;

        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(m);
        let kappa = |j: usize| -> f64 {
            let f = if j <= m / 2 {
                j as f64
            } else {
                j as f64 - m as f64
            };
            2.0 * PI * f / length
        };

        let field: Vec<f64> = if scale == 0.0 {
            samples.iter().map(|u| u - mean).collect()
        } else {
            // antiderivative of w0 = a(u0 − ū), then φ0 = exp(−W/2k)
            let inverse = planner.plan_fft_inverse(m);
            let mut buf: Vec<Complex64> = samples
                .iter()
                .map(|u| Complex64::new(scale * (u - mean), 0.0))
                .collect();
            forward.process(&mut buf);
            for (j, c) in buf.iter_mut().enumerate() {
                *c = if j == 0 || j == m / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    *c / Complex64::new(0.0, kappa(j))
                };
            }
            inverse.process(&mut buf);
            let expo: Vec<f64> = buf
                .iter()
                .map(|c| -c.re / m as f64 / (2.0 * params.diff))
                .collect();
            let top = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            expo.iter().map(|e| (e - top).exp()).collect()
        };

        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        forward.process(&mut buf);
        let reference = buf[..m / 2].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let coeffs = (0..m / 2)
            .filter(|&j| reference > 0.0 && buf[j].norm() >= 1e-14 * reference)
            .map(|j| {
                let weight = if j == 0 { 1.0 } else { 2.0 };
                (kappa(j), buf[j] * (weight / m as f64))
            })
            .collect();
        Ok(ColeHopfOracle {
            x0,
            length,
            diff: params.diff,
            mean,
            scale,
            coeffs,
        })
    }

    /// Number of retained Fourier coefficients.
    pub fn retained_modes(&self) -> usize {
        self.coeffs.len()
    }

    /// Field value and its first two θ-derivatives at time `t`.
    fn series(&self, t: f64, theta: f64) -> (f64, f64, f64) {
        let (mut f, mut f1, mut f2) = (0.0, 0.0, 0.0);
        for &(kappa, c) in &self.coeffs {
            let e = c
                * (-self.diff * kappa * kappa * t).exp()
                * Complex64::from_polar(1.0, kappa * theta);
            f += e.re;
            f1 += (e * Complex64::new(0.0, kappa)).re;
            f2 -= kappa * kappa * e.re;
        }
        (f, f1, f2)
    }

    /// `(u, u_x)` at `(t, x)`.
    pub fn value_and_slope(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "oracle time must be non-negative, got {t}"
            )));
        }
        let xi = x - self.scale * self.mean * t;
        let theta = (xi - self.x0).rem_euclid(self.length);
        let (f, f1, f2) = self.series(t, theta);
        if self.scale == 0.0 {
            return Ok((self.mean + f, f1));
        }
        if !(f > 0.0) {
            return Err(Error::NonFinite("Cole–Hopf potential"));
        }
        let k = self.diff;
        let w = -2.0 * k * f1 / f;
        let wx = -2.0 * k * (f2 / f - (f1 / f) * (f1 / f));
        Ok((self.mean + w / self.scale, wx / self.scale))
    }

    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.value_and_slope(t, x)?.0)
    }

    /// The exact section in the Burgers gauge, `q^x = −k u_x`.
    pub fn section(&self, grid: &SpaceGrid, times: &[f64]) -> Result<SectionGrid> {
        let xs = grid.nodes();
        let n = xs.len();
        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let mut u = Vec::with_capacity(n);
            let mut qx = Vec::with_capacity(n);
            for &x in &xs {
                let (v, s) = self.value_and_slope(t, x)?;
                u.push(v);
                qx.push(-self.diff * s);
            }
            values.push(vec![
                u,
                vec![0.0; n],
                vec![0.0; n],
                qx,
                vec![0.0; n],
                vec![0.0; n],
            ]);
        }
        SectionGrid::new(
            "burgers-exact",
            Gauge::Burgers,
            *grid,
            ["u", "v", "p_x", "q_x", "s_t", "s_x"]
                .iter()
                .map(|c| c.to_string())
                .collect(),
            times.to_vec(),
            values,
        )
    }
}
