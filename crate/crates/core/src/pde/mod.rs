//! Method-of-lines solvers for the 1+1-dimensional model field theories,
//! their gauge-fixed sections, analytic oracles, and section residuals.

mod integrators;
mod oracles;
mod residual;

use std::io::{self, Write};

use serde::Serialize;

pub use integrators::{
    discrete_string_energy, integrate_burgers, integrate_coupled_strings,
    integrate_damped_oscillator, integrate_damped_string, integrate_heat, TimeStepping, Trajectory,
};
pub use oracles::{
    oscillator_energy_oracle, ColeHopfOracle, ModalStringOracle, DEFAULT_ORACLE_MODES,
};
pub(crate) use residual::neighbours;
pub use residual::{
    central_time_derivative, hdw_residual_section, interior_nodes, residual_scan,
    section_derivatives, ResidualScan,
};

use crate::chart::Point;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    DirichletZero,
    /// The last node repeats the first.
    Periodic,
}

/// Uniform grid `x_i = x0 + i·dx`, `dx = (x1 − x0)/(N − 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpaceGrid {
    x0: f64,
    x1: f64,
    n: usize,
    boundary: Boundary,
}

impl SpaceGrid {
    pub const MIN_NODES: usize = 8;

    pub fn new(x0: f64, x1: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs x0 < x1, got [{x0}, {x1}]"
            )));
        }
        if n < Self::MIN_NODES {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(SpaceGrid {
            x0,
            x1,
            n,
            boundary,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x1
        } else {
            self.x0 + i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Grid with the spacing halved: `2N − 1` nodes on the same interval.
    pub fn refined(&self) -> Self {
        SpaceGrid {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// Gauge fixing of the non-evolved fields for each simulated model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Gauge {
    /// `s^x ≡ 0`, `p^x := −τ u_x`.
    DampedString,
    /// `v ≡ p^x ≡ s^t ≡ s^x ≡ 0`, `q^x := −k u_x`.
    Burgers,
    /// `s^x ≡ 0`, `p^x_i := −∂_x q^i`.
    CoupledStrings,
}

impl Gauge {
    pub fn tag(self) -> &'static str {
        match self {
            Gauge::DampedString => "damped-string",
            Gauge::Burgers => "burgers",
            Gauge::CoupledStrings => "coupled-strings",
        }
    }

    /// Fields held identically zero.
    pub fn pinned_zero(self) -> &'static [&'static str] {
        match self {
            Gauge::DampedString | Gauge::CoupledStrings => &["s_x"],
            Gauge::Burgers => &["v", "p_x", "s_t", "s_x"],
        }
    }

    /// Fields defined from spatial derivatives instead of evolved.
    pub fn constraint_fields(self) -> &'static [&'static str] {
        match self {
            Gauge::DampedString => &["p_x"],
            Gauge::Burgers => &["q_x"],
            Gauge::CoupledStrings => &["p_x1", "p_x2"],
        }
    }
}

/// A discretised section `ψ(t, x)`: every model coordinate at every saved
/// time and grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionGrid {
    model: String,
    gauge: Gauge,
    grid: SpaceGrid,
    coordinates: Vec<String>,
    times: Vec<f64>,
    /// `values[time][coordinate][node]`
    values: Vec<Vec<Vec<f64>>>,
}

impl SectionGrid {
    pub fn new(
        model: impl Into<String>,
        gauge: Gauge,
        grid: SpaceGrid,
        coordinates: Vec<String>,
        times: Vec<f64>,
        values: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "section snapshots",
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "section times must increase strictly".into(),
            ));
        }
        for (snap, &t) in values.iter().zip(&times) {
            if snap.len() != coordinates.len() {
                return Err(Error::DimensionMismatch {
                    context: "section coordinates",
                    expected: coordinates.len(),
                    got: snap.len(),
                });
            }
            for field in snap {
                if field.len() != grid.len() {
                    return Err(Error::DimensionMismatch {
                        context: "section nodes",
                        expected: grid.len(),
                        got: field.len(),
                    });
                }
                if field.iter().any(|v| !v.is_finite()) {
                    return Err(Error::BlowUp { t });
                }
            }
        }
        Ok(SectionGrid {
            model: model.into(),
            gauge,
            grid,
            coordinates,
            times,
            values,
        })
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn coordinate_index(&self, name: &str) -> Option<usize> {
        self.coordinates.iter().position(|c| c == name)
    }

    pub fn field(&self, ti: usize, name: &str) -> Option<&[f64]> {
        let c = self.coordinate_index(name)?;
        self.values.get(ti).map(|snap| snap[c].as_slice())
    }

    pub fn field_mut(&mut self, ti: usize, name: &str) -> Option<&mut Vec<f64>> {
        let c = self.coordinate_index(name)?;
        self.values.get_mut(ti).map(|snap| &mut snap[c])
    }

    pub fn last_field(&self, name: &str) -> Option<&[f64]> {
        self.field(self.n_times().checked_sub(1)?, name)
    }

    pub fn point(&self, ti: usize, xi: usize) -> Point {
        Point::new(self.values[ti].iter().map(|f| f[xi]).collect())
            .expect("section values are finite")
    }

    /// Applies `f` to the full coordinate vector at every node.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let m = self.coordinates.len();
        let mut values = self.values.clone();
        let mut buf = vec![0.0; m];
        for snap in values.iter_mut() {
            for xi in 0..self.grid.len() {
                for c in 0..m {
                    buf[c] = snap[c][xi];
                }
                let out = f(&buf)?;
                if out.len() != m {
                    return Err(Error::DimensionMismatch {
                        context: "mapped section point",
                        expected: m,
                        got: out.len(),
                    });
                }
                for c in 0..m {
                    snap[c][xi] = out[c];
                }
            }
        }
        SectionGrid::new(
            self.model.clone(),
            self.gauge,
            self.grid,
            self.coordinates.clone(),
            self.times.clone(),
            values,
        )
    }

    /// Columns written by [`SectionGrid::write_csv`] after `t` and `x`.
    pub fn csv_columns(&self) -> Vec<&str> {
        let pinned = self.gauge.pinned_zero();
        self.coordinates
            .iter()
            .map(String::as_str)
            .filter(|c| !pinned.contains(c))
            .collect()
    }

    /// One row per `(t, x)` node, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let cols = self.csv_columns();
        let idx: Vec<usize> = cols
            .iter()
            .map(|c| self.coordinate_index(c).expect("known column"))
            .collect();
        write!(w, "t,x")?;
        for c in &cols {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
        for (snap, t) in self.values.iter().zip(&self.times) {
            for xi in 0..self.grid.len() {
                write!(w, "{:.16e},{:.16e}", t, self.grid.x(xi))?;
                for &c in &idx {
                    write!(w, ",{:.16e}", snap[c][xi])?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }
}
