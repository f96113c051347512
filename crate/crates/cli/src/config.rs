//! Run configuration: a flat JSON object, overridden by command-line flags.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use kcontact::kcontact::KContactSystem;
use kcontact::models::{
    build_burgers, build_canonical, build_coupled_strings, build_damped_oscillator,
    build_damped_string, build_degenerate_duplicate, build_example3, BurgersParams,
    CoupledStringsParams, Coupling, DampedStringParams, OscillatorParams, SpatialSignature,
};
use kcontact::pde::{Boundary, SpaceGrid, TimeStepping};

use crate::CliError;

pub const DEFAULT_OUT: &str = "kcontact-out";
pub const OUT_ENV: &str = "KCONTACT_OUT";

/// Every key accepted in the config file. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub rho: Option<f64>,
    pub tau: Option<f64>,
    pub damp: Option<f64>,
    pub diff: Option<f64>,
    pub gamma: Option<f64>,
    pub coupling: Option<String>,
    pub coupling_strength: Option<f64>,
    pub signature: Option<String>,
    pub x0: Option<f64>,
    pub x1: Option<f64>,
    pub nodes: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub save_every: Option<usize>,
    pub initial: Option<String>,
    pub amplitude: Option<f64>,
    pub initial_q2: Option<String>,
    pub amplitude_q2: Option<f64>,
    pub q0: Option<f64>,
    pub p0: Option<f64>,
    pub s0: Option<f64>,
    pub points: Option<usize>,
    pub half_width: Option<f64>,
    pub symmetry: Option<String>,
    pub epsilon: Option<f64>,
    pub residual_scan: Option<bool>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }
}

/// Values given on the command line; they win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelId {
    Canonical,
    Example3,
    DampedString,
    Burgers,
    CoupledStrings,
    DampedOscillator,
    DegenerateDuplicate,
}

impl ModelId {
    pub const ALL: [(&'static str, ModelId); 7] = [
        ("canonical", ModelId::Canonical),
        ("example3", ModelId::Example3),
        ("damped-string", ModelId::DampedString),
        ("burgers", ModelId::Burgers),
        ("coupled-strings", ModelId::CoupledStrings),
        ("damped-oscillator", ModelId::DampedOscillator),
        ("degenerate-duplicate", ModelId::DegenerateDuplicate),
    ];

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, id)| *id)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!(
                    "unknown model `{s}`; expected one of {}",
                    names.join(", ")
                ))
            })
    }

    pub fn name(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(_, id)| *id == self)
            .map(|(n, _)| *n)
            .expect("listed")
    }
}

/// Named initial profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    /// `sin(mode·π·(x − x0)/L)` on Dirichlet grids, `sin(2·mode·π·(x − x0)/L)` on periodic ones.
    Sine(u32),
    Gaussian {
        center: f64,
        width: f64,
    },
    Constant(f64),
}

impl Profile {
    /// Accepts `sine:<mode>`, `gaussian:<center>:<width>` and `constant:<value>`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "bad initial profile `{s}`; use sine:N, gaussian:C:W or constant:V"
            ))
        };
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| {
            parts
                .get(i)
                .and_then(|p| p.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
        };
        match (parts[0], parts.len()) {
            ("sine", 2) => parts[1]
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|m| *m > 0)
                .map(Profile::Sine)
                .ok_or_else(bad),
            ("gaussian", 3) => match (num(1), num(2)) {
                (Some(center), Some(width)) if width > 0.0 => {
                    Ok(Profile::Gaussian { center, width })
                }
                _ => Err(bad()),
            },
            ("constant", 2) => num(1).map(Profile::Constant).ok_or_else(bad),
            _ => Err(bad()),
        }
    }

    pub fn eval(self, amplitude: f64, grid: &SpaceGrid, x: f64) -> f64 {
        let theta = (x - grid.x0()) / grid.length();
        match self {
            Profile::Sine(m) => {
                let waves = match grid.boundary() {
                    Boundary::DirichletZero => m as f64,
                    Boundary::Periodic => 2.0 * m as f64,
                };
                amplitude * (waves * PI * theta).sin()
            }
            Profile::Gaussian { center, width } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Profile::Constant(c) => amplitude * c,
        }
    }
}

/// Fully resolved configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: ModelId,
    pub n: usize,
    pub k: usize,
    pub string: DampedStringParams,
    pub burgers: BurgersParams,
    pub coupled: CoupledStringsParams,
    pub oscillator: OscillatorParams,
    pub x0: f64,
    pub x1: f64,
    pub nodes: usize,
    /// `None` picks a stable step from the grid.
    pub dt: Option<f64>,
    pub t_end: f64,
    /// `None` stores snapshots about `dx/2` apart in time.
    pub save_every: Option<usize>,
    pub initial: Profile,
    pub amplitude: f64,
    pub initial_q2: Profile,
    pub amplitude_q2: f64,
    pub oscillator_ic: [f64; 3],
    pub points: usize,
    pub half_width: f64,
    pub symmetry: Option<String>,
    pub epsilon: f64,
    pub residual_scan: bool,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "`{name}` must be positive, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{name}` must be finite")))
    }
}

impl RunConfig {
    /// Merges file values, flags and the environment. `env_out` is the value
    /// of `KCONTACT_OUT`, passed in so tests need not touch the process
    /// environment.
    pub fn resolve(
        file: FileConfig,
        flags: Overrides,
        env_out: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let model_name = flags.model.or(file.model).ok_or_else(|| {
            CliError::Config("no model given; use --model or the `model` key".into())
        })?;
        let model = ModelId::parse(&model_name)?;

        let string_default = DampedStringParams::default();
        let string = DampedStringParams {
            rho: positive("rho", file.rho.unwrap_or(string_default.rho))?,
            tau: positive("tau", file.tau.unwrap_or(string_default.tau))?,
            damp: finite("damp", file.damp.unwrap_or(string_default.damp))?,
        };
        let diff = positive("diff", file.diff.unwrap_or(0.1))?;
        let burgers = BurgersParams {
            diff,
            gamma: finite("gamma", file.gamma.unwrap_or(-1.0 / diff))?,
        };
        let strength = finite("coupling_strength", file.coupling_strength.unwrap_or(1.0))?;
        let coupling = match file.coupling.as_deref().unwrap_or("harmonic") {
            "none" => Coupling::None,
            "harmonic" => Coupling::Harmonic {
                stiffness: strength,
            },
            "quartic" => Coupling::Quartic { strength },
            other => {
                return Err(CliError::Config(format!(
                    "unknown coupling `{other}`; use none, harmonic or quartic"
                )))
            }
        };
        let signature = match file.signature.as_deref().unwrap_or("lorentzian") {
            "lorentzian" => SpatialSignature::Lorentzian,
            "euclidean" => SpatialSignature::Euclidean,
            other => {
                return Err(CliError::Config(format!(
                    "unknown signature `{other}`; use lorentzian or euclidean"
                )))
            }
        };
        let coupled = CoupledStringsParams {
            gamma: finite("gamma", file.gamma.unwrap_or(0.1))?,
            coupling,
            signature,
        };
        let oscillator = OscillatorParams {
            gamma: finite("gamma", file.gamma.unwrap_or(0.3))?,
        };

        let (x0, x1) = (file.x0.unwrap_or(0.0), file.x1.unwrap_or(1.0));
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(CliError::Config(format!("need x0 < x1, got [{x0}, {x1}]")));
        }
        let default_nodes = if model == ModelId::Burgers { 129 } else { 101 };
        let nodes = file.nodes.unwrap_or(default_nodes);
        if nodes < SpaceGrid::MIN_NODES {
            return Err(CliError::Config(format!(
                "`nodes` must be at least {}",
                SpaceGrid::MIN_NODES
            )));
        }
        let dt = file.dt.map(|v| positive("dt", v)).transpose()?;
        let default_t_end = match model {
            ModelId::Burgers => 0.25,
            ModelId::DampedOscillator => 5.0,
            _ => 1.0,
        };
        let t_end = positive("t_end", file.t_end.unwrap_or(default_t_end))?;
        let save_every = file.save_every;
        if save_every == Some(0) {
            return Err(CliError::Config("`save_every` must be at least 1".into()));
        }
        let tol = positive("tol", flags.tol.or(file.tol).unwrap_or(1e-6))?;
        let points = file.points.unwrap_or(20);
        if points == 0 {
            return Err(CliError::Config("`points` must be at least 1".into()));
        }
        let out = flags
            .out
            .or(env_out)
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

        Ok(RunConfig {
            model,
            n: file.n.unwrap_or(1),
            k: file.k.unwrap_or(2),
            string,
            burgers,
            coupled,
            oscillator,
            x0,
            x1,
            nodes,
            dt,
            t_end,
            save_every,
            initial: Profile::parse(file.initial.as_deref().unwrap_or("sine:1"))?,
            amplitude: finite("amplitude", file.amplitude.unwrap_or(1.0))?,
            initial_q2: Profile::parse(file.initial_q2.as_deref().unwrap_or("sine:2"))?,
            amplitude_q2: finite("amplitude_q2", file.amplitude_q2.unwrap_or(0.5))?,
            oscillator_ic: [
                finite("q0", file.q0.unwrap_or(1.0))?,
                finite("p0", file.p0.unwrap_or(0.0))?,
                finite("s0", file.s0.unwrap_or(0.0))?,
            ],
            points,
            half_width: positive("half_width", file.half_width.unwrap_or(2.0))?,
            symmetry: file.symmetry,
            epsilon: finite("epsilon", file.epsilon.unwrap_or(0.1))?,
            residual_scan: file.residual_scan.unwrap_or(true),
            tol,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out,
        })
    }

    pub fn system(&self) -> Result<KContactSystem, CliError> {
        let built = match self.model {
            ModelId::Canonical => {
                if self.n == 0 || self.k == 0 {
                    return Err(CliError::Config(
                        "canonical model needs n >= 1 and k >= 1".into(),
                    ));
                }
                build_canonical(self.n, self.k)
            }
            ModelId::Example3 => build_example3(),
            ModelId::DampedString => build_damped_string(self.string),
            ModelId::Burgers => build_burgers(self.burgers),
            ModelId::CoupledStrings => build_coupled_strings(self.coupled),
            ModelId::DampedOscillator => build_damped_oscillator(self.oscillator),
            ModelId::DegenerateDuplicate => build_degenerate_duplicate(),
        };
        built.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self, nodes: usize) -> Result<SpaceGrid, CliError> {
        let boundary = if self.model == ModelId::Burgers {
            Boundary::Periodic
        } else {
            Boundary::DirichletZero
        };
        SpaceGrid::new(self.x0, self.x1, nodes, boundary)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// The requested step, or one a fixed fraction inside the stability bound.
    pub fn time_step(&self, grid: &SpaceGrid) -> f64 {
        if let Some(dt) = self.dt {
            return dt;
        }
        let dx = grid.dx();
        match self.model {
            ModelId::Burgers => {
                let diffusive = 0.2 * dx * dx / self.burgers.diff;
                let umax = (0..grid.len())
                    .map(|i| self.initial.eval(self.amplitude, grid, grid.x(i)).abs())
                    .fold(0.0, f64::max);
                let speed = (self.burgers.gamma * self.burgers.diff).abs() * umax;
                if speed > 0.0 {
                    diffusive.min(0.4 * dx / speed)
                } else {
                    diffusive
                }
            }
            ModelId::DampedString => 0.25 * dx / self.string.wave_speed(),
            ModelId::DampedOscillator => 1e-3,
            _ => 0.25 * dx,
        }
    }

    /// Stepping with step `dt` on `grid`.
    pub fn stepping(&self, grid: &SpaceGrid, dt: f64) -> Result<TimeStepping, CliError> {
        let save_every = self
            .save_every
            .unwrap_or_else(|| ((0.5 * grid.dx() / dt).round() as usize).max(1));
        TimeStepping::new(self.t_end, dt, save_every).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> FileConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn flags_win_over_environment_and_file() {
        let f = file(r#"{"model": "burgers", "out": "from-file", "seed": 3, "tol": 0.5}"#);
        let cfg =
            RunConfig::resolve(f.clone(), Overrides::default(), Some("from-env".into())).unwrap();
        assert_eq!(cfg.out, PathBuf::from("from-env"));
        assert_eq!((cfg.seed, cfg.tol), (3, 0.5));
        let flags = Overrides {
            model: Some("damped-string".into()),
            out: Some("from-flag".into()),
            seed: Some(9),
            tol: Some(1e-3),
        };
        let cfg = RunConfig::resolve(f, flags, Some("from-env".into())).unwrap();
        assert_eq!(cfg.model, ModelId::DampedString);
        assert_eq!(cfg.out, PathBuf::from("from-flag"));
        assert_eq!((cfg.seed, cfg.tol), (9, 1e-3));
    }

    #[test]
    fn burgers_defaults_to_the_burgers_coupling() {
        let cfg = RunConfig::resolve(
            file(r#"{"model": "burgers", "diff": 0.05}"#),
            Overrides::default(),
            None,
        )
        .unwrap();
        assert_eq!(cfg.burgers.gamma, -20.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"model": "burgers", "typo": 1}"#).is_err());
        for json in [
            r#"{}"#,
            r#"{"model": "nope"}"#,
            r#"{"model": "burgers", "tol": -1}"#,
            r#"{"model": "burgers", "x0": 2, "x1": 1}"#,
            r#"{"model": "burgers", "initial": "square:1"}"#,
            r#"{"model": "burgers", "nodes": 3}"#,
            r#"{"model": "coupled-strings", "coupling": "cubic"}"#,
        ] {
            assert!(
                RunConfig::resolve(file(json), Overrides::default(), None).is_err(),
                "{json}"
            );
        }
    }

    #[test]
    fn profiles() {
        let g = SpaceGrid::new(0.0, 1.0, 11, Boundary::DirichletZero).unwrap();
        assert_eq!(Profile::parse("sine:2").unwrap(), Profile::Sine(2));
        assert!((Profile::Sine(1).eval(2.0, &g, 0.5) - 2.0).abs() < 1e-15);
        let p = SpaceGrid::new(0.0, 1.0, 11, Boundary::Periodic).unwrap();
        assert!((Profile::Sine(1).eval(1.0, &p, 0.25) - 1.0).abs() < 1e-15);
        assert_eq!(
            Profile::parse("gaussian:0.5:0.1").unwrap(),
            Profile::Gaussian {
                center: 0.5,
                width: 0.1
            }
        );
        assert_eq!(
            Profile::parse("constant:0.7").unwrap().eval(1.0, &g, 0.3),
            0.7
        );
        for bad in [
            "sine:0",
            "sine",
            "gaussian:0.5",
            "gaussian:0.5:-1",
            "constant:x",
            "",
        ] {
            assert!(Profile::parse(bad).is_err(), "{bad}");
        }
    }
}
