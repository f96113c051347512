use std::path::Path;

use kcontact::chart::{Point, Vector};
use kcontact::kcontact::{
    canonical_kvector_fields, contact_hamiltonian_vector_field, reeb_commutator_norm, solve_reeb,
    verify_structure, KContactSystem, KVectorSplit, StructureCondition, REEB_TOL,
};
use kcontact::models::sample_points;
use kcontact::pde::{
    central_time_derivative, integrate_burgers, integrate_coupled_strings,
    integrate_damped_oscillator, integrate_damped_string, interior_nodes, oscillator_energy_oracle,
    residual_scan, ColeHopfOracle, ModalStringOracle, SectionGrid, SpaceGrid, TimeStepping,
    Trajectory, DEFAULT_ORACLE_MODES,
};
use kcontact::symmetry::catalog::{
    burgers_compensated_shift, burgers_scaling, burgers_v_shift, coordinate_shift,
    coupled_rotation, hamiltonian_self_field, string_translation,
};
use kcontact::symmetry::{
    check_hamiltonian_symmetry, check_reeb_preservation, dissipation_residual_kvector,
    dissipation_residual_section, dynamical_symmetry_probe, flow, induced_dissipation_law,
    DissipationLaw, SymmetryCandidate, SymmetryKind, PROBE_FLOW_SUBSTEPS,
};
use kcontact::Error;

use crate::config::{ModelId, Profile, RunConfig};
use crate::report::{numeric_csv, write_file, CheckRow, RunReport, Status};
use crate::CliError;

pub const RANK_TOL: f64 = 1e-9;
pub const FD_STEP: f64 = 1e-5;
pub const FRAME_TOL: f64 = 1e-10;
/// Half-width of the accepted window around the expected convergence order.
pub const ORDER_SLACK: f64 = 0.3;
/// Smallest refinement order accepted as "decreasing at the discretization order".
pub const MIN_ORDER: f64 = 1.7;

/// Errors from the numerical core: bad parameters or a missing oracle are
/// configuration problems, everything else is a failed check.
fn core_error(check: &str, tol: f64, e: Error) -> Result<CheckRow, CliError> {
    match e {
        Error::InvalidArgument(_) | Error::Oracle(_) => Err(CliError::Config(e.to_string())),
        other => Ok(CheckRow::error(check, tol, other)),
    }
}

fn sample(cfg: &RunConfig, sys: &KContactSystem) -> Vec<Point> {
    sample_points(sys.dim(), cfg.points, cfg.seed, cfg.half_width)
}

fn emit(report: &mut RunReport, dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    write_file(&path, text.as_bytes())?;
    report.files.push(path);
    Ok(())
}

/// Coordinates whose unit vectors are the expected Reeb frame.
fn expected_reeb(cfg: &RunConfig, sys: &KContactSystem) -> Option<Vec<usize>> {
    if let Some(layout) = sys.darboux_layout() {
        return Some((0..layout.k()).map(|a| layout.s(a)).collect());
    }
    let names: &[&str] = match cfg.model {
        ModelId::Example3 => &["s", "t"],
        ModelId::Burgers => &["s_t", "s_x"],
        _ => return None,
    };
    names.iter().map(|n| sys.coordinate_index(n)).collect()
}

pub fn verify(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let sys = cfg.system()?;
    let pts = sample(cfg, &sys);
    let mut report = RunReport::default();
    let structure =
        verify_structure(&sys, &pts, RANK_TOL).map_err(|e| CliError::Config(e.to_string()))?;
    let k = sys.k();
    let m = sys.dim();

    let deficits = [
        (
            StructureCondition::ContactRank,
            structure
                .points
                .iter()
                .map(|p| p.contact_rank.abs_diff(k))
                .max(),
        ),
        (
            StructureCondition::ReebRank,
            structure
                .points
                .iter()
                .map(|p| p.reeb_dim.abs_diff(k))
                .max(),
        ),
        (
            StructureCondition::Transversality,
            structure.points.iter().map(|p| p.intersection_dim).max(),
        ),
    ];
    for (cond, deficit) in deficits {
        let d = deficit.unwrap_or(0) as f64;
        let failing = structure
            .points
            .iter()
            .filter(|p| p.failed(k).contains(&cond))
            .count();
        report.push(CheckRow::below(
            format!("structure-{}", condition_tag(cond)),
            d,
            0.5,
            format!(
                "{cond}; rank defect {d} at worst, failing at {failing}/{} points, min retained singular value {:.3e}",
                pts.len(),
                structure.min_retained
            ),
        ));
    }

    let mut rows = Vec::new();
    for (i, p) in structure.points.iter().enumerate() {
        let mut row = vec![
            i as f64,
            p.contact_rank as f64,
            p.reeb_dim as f64,
            p.intersection_dim as f64,
            p.contact
                .smallest_retained
                .min(p.reeb.smallest_retained)
                .min(p.joint.smallest_retained),
        ];
        row.extend_from_slice(p.point.as_slice());
        rows.push(row);
    }
    let coords = sys.coordinate_names().join(",");
    emit(
        &mut report,
        dir,
        "structure.csv",
        &numeric_csv(
            &format!("point,contact_rank,reeb_dim,intersection_dim,min_retained,{coords}"),
            rows,
        ),
    )?;

    if !structure.passed() {
        return Ok(report);
    }

    let expected = expected_reeb(cfg, &sys);
    let (mut residual, mut frame_err, mut bracket) = (0.0f64, 0.0f64, 0.0f64);
    let mut reeb_rows = Vec::new();
    for (i, x) in pts.iter().enumerate() {
        let frame = match solve_reeb(&sys, x, REEB_TOL) {
            Ok(f) => f,
            Err(e) => {
                report.push(core_error("reeb-frame", REEB_TOL, e)?);
                return Ok(report);
            }
        };
        residual = residual.max(frame.residual);
        for (a, r) in frame.vectors.iter().enumerate() {
            if let Some(idx) = &expected {
                let mut unit = Vector::zeros(m);
                unit[idx[a]] = 1.0;
                frame_err = frame_err.max((r - unit).amax());
            }
            let mut row = vec![i as f64, (a + 1) as f64];
            row.extend(r.iter());
            reeb_rows.push(row);
        }
        match reeb_commutator_norm(&sys, x, FD_STEP) {
            Ok(b) => bracket = bracket.max(b),
            Err(e) => {
                report.push(core_error("reeb-commutator", cfg.tol, e)?);
                return Ok(report);
            }
        }
    }
    report.push(CheckRow::below(
        "reeb-frame",
        residual,
        REEB_TOL,
        "defining relations of the solved frame",
    ));
    if let Some(idx) = &expected {
        let names: Vec<&str> = idx
            .iter()
            .map(|&i| sys.coordinate_names()[i].as_str())
            .collect();
        report.push(CheckRow::below(
            "reeb-coordinate-frame",
            frame_err,
            FRAME_TOL,
            format!("frame compared with d/d{}", names.join(", d/d")),
        ));
    }
    report.push(CheckRow::below(
        "reeb-commutator",
        bracket,
        cfg.tol,
        "max |[R_a, R_b]| by finite differences",
    ));
    emit(
        &mut report,
        dir,
        "reeb.csv",
        &numeric_csv(&format!("point,alpha,{coords}"), reeb_rows),
    )?;
    Ok(report)
}

fn condition_tag(c: StructureCondition) -> &'static str {
    match c {
        StructureCondition::ContactRank => "contact-rank",
        StructureCondition::ReebRank => "reeb-rank",
        StructureCondition::Transversality => "transversality",
    }
}

/// Grid and stepping of refinement level `level` (nodes `(N − 1)·2^level + 1`).
fn level_setup(cfg: &RunConfig, level: u32) -> Result<(SpaceGrid, TimeStepping), CliError> {
    let base = cfg.grid(cfg.nodes)?;
    let grid = cfg.grid((cfg.nodes - 1) * (1 << level) + 1)?;
    let dt = match cfg.dt {
        None => cfg.time_step(&grid),
        Some(dt) => {
            let ratio = grid.dx() / base.dx();
            if cfg.model == ModelId::Burgers {
                dt * ratio * ratio
            } else {
                dt * ratio
            }
        }
    };
    let stepping = cfg.stepping(&grid, dt)?;
    Ok((grid, stepping))
}

fn simulate_section(
    cfg: &RunConfig,
    grid: &SpaceGrid,
    stepping: &TimeStepping,
) -> Result<SectionGrid, CliError> {
    let ic = |x: f64| cfg.initial.eval(cfg.amplitude, grid, x);
    let result = match cfg.model {
        ModelId::DampedString => integrate_damped_string(cfg.string, grid, ic, |_| 0.0, stepping),
        ModelId::Burgers => integrate_burgers(cfg.burgers, grid, ic, stepping),
        ModelId::CoupledStrings => {
            let ic2 = |x: f64| cfg.initial_q2.eval(cfg.amplitude_q2, grid, x);
            integrate_coupled_strings(cfg.coupled, grid, ic, ic2, stepping)
        }
        _ => {
            return Err(CliError::Config(format!(
                "model `{}` has no field-theory solver",
                cfg.model.name()
            )))
        }
    };
    result.map_err(|e| match e {
        Error::InvalidArgument(_) | Error::Oracle(_) => CliError::Config(e.to_string()),
        other => CliError::Numerical(other),
    })
}

fn simulate_level(cfg: &RunConfig, level: u32) -> Result<SectionGrid, CliError> {
    let (grid, stepping) = level_setup(cfg, level)?;
    simulate_section(cfg, &grid, &stepping)
}

fn oscillator_run(cfg: &RunConfig, dt: f64) -> Result<Trajectory, CliError> {
    integrate_damped_oscillator(cfg.oscillator, cfg.oscillator_ic, cfg.t_end, dt).map_err(|e| {
        match e {
            Error::InvalidArgument(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    })
}

fn energy_error(cfg: &RunConfig, traj: &Trajectory) -> (f64, Vec<Vec<f64>>) {
    let energies = traj.energies(cfg.oscillator);
    let h0 = energies[0];
    let scale = if h0.abs() > 0.0 { h0.abs() } else { 1.0 };
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for ((&t, &e), [q, p, s]) in traj.times.iter().zip(&energies).zip(&traj.states) {
        let exact = oscillator_energy_oracle(cfg.oscillator.gamma, h0, t);
        worst = worst.max((e - exact).abs() / scale);
        rows.push(vec![t, *q, *p, *s, e, exact]);
    }
    (worst, rows)
}

/// A numerical failure inside a command becomes an `error` row.
fn numerical_row(
    check: &str,
    tol: f64,
    r: Result<RunReport, CliError>,
) -> Result<RunReport, CliError> {
    match r {
        Err(CliError::Numerical(e)) => {
            let mut report = RunReport::default();
            report.push(CheckRow::error(check, tol, e));
            Ok(report)
        }
        other => other,
    }
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    numerical_row("simulate", cfg.tol, simulate_inner(cfg, dir))
}

fn simulate_inner(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::default();
    if cfg.model == ModelId::DampedOscillator {
        let dt = cfg.dt.unwrap_or(1e-3);
        let traj = oscillator_run(cfg, dt)?;
        let (worst, rows) = energy_error(cfg, &traj);
        emit(
            &mut report,
            dir,
            "trajectory.csv",
            &numeric_csv("t,q,p,s,H,H_exact", rows),
        )?;
        report.push(CheckRow::below(
            "energy-decay",
            worst,
            cfg.tol,
            format!(
                "|H(t) - H(0) exp(-gamma t)| / |H(0)| over {} steps of {dt}",
                traj.times.len() - 1
            ),
        ));
        return Ok(report);
    }
    let psi = simulate_level(cfg, 0)?;
    emit(&mut report, dir, "section.csv", &psi.to_csv_string())?;
    report.push(CheckRow::with_status(
        "simulate",
        Status::Pass,
        0.0,
        cfg.tol,
        format!(
            "{} nodes, {} snapshots, t_end {}",
            psi.grid().len(),
            psi.n_times(),
            cfg.t_end
        ),
    ));
    if cfg.residual_scan {
        let sys = cfg.system()?;
        let rows = section_residual_rows(&sys, &psi)?;
        emit(
            &mut report,
            dir,
            "residual.csv",
            &numeric_csv("t,x,form,energy", rows),
        )?;
        let coarse = residual_scan(&sys, &psi).map_err(CliError::Numerical)?;
        let fine = residual_scan(&sys, &simulate_level(cfg, 1)?).map_err(CliError::Numerical)?;
        report.push(refinement_row(
            "residual-scan",
            coarse.max,
            fine.max,
            cfg.tol,
        ));
    }
    Ok(report)
}

fn section_residual_rows(
    sys: &KContactSystem,
    psi: &SectionGrid,
) -> Result<Vec<Vec<f64>>, CliError> {
    interior_nodes(psi)
        .into_iter()
        .map(|(ti, xi)| {
            let r = kcontact::pde::hdw_residual_section(sys, psi, ti, xi)
                .map_err(CliError::Numerical)?;
            Ok(vec![
                psi.times()[ti],
                psi.grid().x(xi),
                r.form.norm(),
                r.energy,
            ])
        })
        .collect()
}

/// A discretisation residual passes when it is already below `tol`, or when it
/// decreases at order at least [`MIN_ORDER`] under one grid halving.
fn refinement_row(check: &str, coarse: f64, fine: f64, tol: f64) -> CheckRow {
    let order = (coarse / fine).log2();
    let status = if coarse < tol || order >= MIN_ORDER {
        Status::Pass
    } else {
        Status::Fail
    };
    CheckRow::with_status(
        check,
        status,
        coarse,
        tol,
        format!("max {coarse:.3e} at N, {fine:.3e} at 2N-1, observed order {order:.3}"),
    )
}

fn order_rows(report: &mut RunReport, errors: &[f64], expected: f64, what: &str) {
    for (i, w) in errors.windows(2).enumerate() {
        let order = (w[0] / w[1]).log2();
        report.push(CheckRow::below(
            format!("observed-order-{}", i + 1),
            (order - expected).abs(),
            ORDER_SLACK,
            format!(
                "{what}: error {:.3e} -> {:.3e}, order {order:.3}, expected {expected}",
                w[0], w[1]
            ),
        ));
    }
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn convergence(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    numerical_row("convergence", cfg.tol, convergence_inner(cfg, dir))
}

fn convergence_inner(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::default();
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    match cfg.model {
        ModelId::DampedOscillator => {
            let dt0 = cfg.dt.unwrap_or(0.1);
            for level in 0..3 {
                let dt = dt0 / f64::from(1u32 << level);
                let (err, _) = energy_error(cfg, &oscillator_run(cfg, dt)?);
                rows.push(vec![level as f64, 0.0, 0.0, dt, err]);
                errors.push(err);
            }
            order_rows(
                &mut report,
                &errors,
                4.0,
                "energy vs closed form, dt halved",
            );
        }
        ModelId::DampedString => {
            let Profile::Sine(mode) = cfg.initial else {
                return Err(CliError::Config(
                    "string oracle needs a sine:N initial profile".into(),
                ));
            };
            let oracle = ModalStringOracle::new(cfg.string, mode, cfg.x0, cfg.x1)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for level in 0..3 {
                let (grid, stepping) = level_setup(cfg, level)?;
                let psi = simulate_section(cfg, &grid, &stepping)?;
                let nodes = grid.nodes();
                let mut err: f64 = 0.0;
                for (ti, &t) in psi.times().iter().enumerate() {
                    let exact: Vec<f64> = nodes
                        .iter()
                        .map(|&x| cfg.amplitude * oracle.displacement(t, x))
                        .collect();
                    err = err.max(linf(psi.field(ti, "u").unwrap_or(&[]), &exact));
                }
                rows.push(vec![
                    level as f64,
                    grid.len() as f64,
                    grid.dx(),
                    stepping.effective_dt(),
                    err,
                ]);
                errors.push(err);
            }
            order_rows(&mut report, &errors, 2.0, "displacement vs modal solution");
        }
        ModelId::Burgers => {
            let grid0 = cfg.grid(cfg.nodes)?;
            let ic = |x: f64| cfg.initial.eval(cfg.amplitude, &grid0, x);
            let oracle = ColeHopfOracle::new(ic, cfg.x0, cfg.x1, cfg.burgers, DEFAULT_ORACLE_MODES)
                .map_err(|e| CliError::Config(e.to_string()))?;
            for level in 0..3 {
                let (grid, stepping) = level_setup(cfg, level)?;
                let psi = simulate_section(cfg, &grid, &stepping)?;
                let t = *psi.times().last().unwrap_or(&0.0);
                let exact = grid
                    .nodes()
                    .iter()
                    .map(|&x| oracle.value(t, x))
                    .collect::<kcontact::Result<Vec<f64>>>()
                    .map_err(CliError::Numerical)?;
                let err = linf(psi.last_field("u").unwrap_or(&[]), &exact);
                rows.push(vec![
                    level as f64,
                    grid.len() as f64,
                    grid.dx(),
                    stepping.effective_dt(),
                    err,
                ]);
                errors.push(err);
            }
            order_rows(
                &mut report,
                &errors,
                2.0,
                "final profile vs Cole-Hopf solution",
            );
        }
        other => {
            return Err(CliError::Config(format!(
                "no oracle available for model `{}`",
                other.name()
            )));
        }
    }
    emit(
        &mut report,
        dir,
        "convergence.csv",
        &numeric_csv("level,nodes,dx,dt,error", rows),
    )?;
    Ok(report)
}

/// Resolves a symmetry name for the configured model.
fn candidate(cfg: &RunConfig, sys: &KContactSystem) -> Result<SymmetryCandidate, CliError> {
    let default = match cfg.model {
        ModelId::DampedString => Some("translation"),
        ModelId::CoupledStrings => Some("rotation"),
        ModelId::Burgers => Some("v-shift-compensated"),
        ModelId::DampedOscillator => Some("hamiltonian-field"),
        ModelId::Canonical => Some("reeb:1"),
        _ => None,
    };
    let name = cfg.symmetry.as_deref().or(default).ok_or_else(|| {
        CliError::Config(format!(
            "model `{}` has no default symmetry; set `symmetry`",
            cfg.model.name()
        ))
    })?;
    let mismatch = || {
        CliError::Config(format!(
            "symmetry `{name}` is not defined for model `{}`",
            cfg.model.name()
        ))
    };
    let y = match (name, cfg.model) {
        ("translation", ModelId::DampedString) => string_translation(),
        ("rotation", ModelId::CoupledStrings) => coupled_rotation(),
        ("v-shift", ModelId::Burgers) => burgers_v_shift(),
        ("v-shift-compensated", ModelId::Burgers) => {
            let mut y = burgers_compensated_shift();
            y.claim = SymmetryKind::HamiltonianKContact;
            y
        }
        ("u-scaling", ModelId::Burgers) => burgers_scaling(),
        ("hamiltonian-field", ModelId::DampedOscillator) => {
            hamiltonian_self_field(sys).map_err(|e| CliError::Config(e.to_string()))?
        }
        (n, _) if n.starts_with("reeb:") => {
            let layout = sys.darboux_layout().ok_or_else(mismatch)?;
            let alpha: usize = n[5..].parse().map_err(|_| mismatch())?;
            if alpha == 0 || alpha > layout.k() {
                return Err(mismatch());
            }
            let mut y = coordinate_shift(sys.dim(), layout.s(alpha - 1), n);
            y.claim = SymmetryKind::HamiltonianKContact;
            y
        }
        _ => return Err(mismatch()),
    };
    Ok(y)
}

pub fn dissipation(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    numerical_row("dissipation-law", cfg.tol, dissipation_inner(cfg, dir))
}

fn dissipation_inner(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let sys = cfg.system()?;
    let y = candidate(cfg, &sys)?;
    let law = induced_dissipation_law(&sys, &y).map_err(|e| CliError::Config(e.to_string()))?;
    let mut report = RunReport::default();
    if cfg.model == ModelId::DampedOscillator {
        let dt = cfg.dt.unwrap_or(1e-3);
        let traj = oscillator_run(cfg, dt)?;
        let (decay, _) = energy_error(cfg, &traj);
        let fields = canonical_kvector_fields(&sys, &KVectorSplit::FirstComponent)
            .map_err(CliError::Numerical)?;
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for (&t, state) in traj.times.iter().zip(&traj.states) {
            let x = Point::new(state.to_vec()).map_err(CliError::Numerical)?;
            let r = dissipation_residual_kvector(&sys, &law, &fields, &x, FD_STEP)
                .map_err(CliError::Numerical)?;
            let f = law.eval(x.as_slice()).map_err(CliError::Numerical)?[0];
            worst = worst.max(r.abs());
            rows.push(vec![t, f, r]);
        }
        emit(
            &mut report,
            dir,
            "dissipation.csv",
            &numeric_csv("t,F,residual", rows),
        )?;
        report.push(CheckRow::below(
            "dissipation-law",
            worst,
            cfg.tol,
            format!(
                "dF(X) + R(H) F along the trajectory, F induced by {}",
                y.name
            ),
        ));
        report.push(CheckRow::below(
            "energy-decay",
            decay,
            cfg.tol,
            format!("H decays as exp(-{} t)", cfg.oscillator.gamma),
        ));
        return Ok(report);
    }
    let psi = simulate_level(cfg, 0)?;
    let rows = law_rows(&sys, &law, &psi)?;
    let coarse = rows.iter().map(|r| r[2].abs()).fold(0.0, f64::max);
    emit(
        &mut report,
        dir,
        "dissipation.csv",
        &numeric_csv("t,x,residual", rows),
    )?;
    let fine_psi = simulate_level(cfg, 1)?;
    let fine = law_rows(&sys, &law, &fine_psi)?
        .iter()
        .map(|r| r[2].abs())
        .fold(0.0, f64::max);
    let mut row = refinement_row("dissipation-law", coarse, fine, cfg.tol);
    row.detail = format!("law induced by {}: {}", y.name, row.detail);
    report.push(row);
    Ok(report)
}

fn law_rows(
    sys: &KContactSystem,
    law: &DissipationLaw,
    psi: &SectionGrid,
) -> Result<Vec<Vec<f64>>, CliError> {
    interior_nodes(psi)
        .into_iter()
        .map(|(ti, xi)| {
            let r =
                dissipation_residual_section(sys, law, psi, ti, xi).map_err(CliError::Numerical)?;
            Ok(vec![psi.times()[ti], psi.grid().x(xi), r])
        })
        .collect()
}

/// Largest mismatch between central time differences of the trajectory and
/// the contact Hamiltonian field.
fn trajectory_residual(
    sys: &KContactSystem,
    times: &[f64],
    states: &[Vec<f64>],
) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for i in 1..states.len().saturating_sub(1) {
        let x = Point::new(states[i].clone()).map_err(CliError::Numerical)?;
        let rhs = contact_hamiltonian_vector_field(sys, &x).map_err(CliError::Numerical)?;
        for c in 0..states[i].len() {
            let d = central_time_derivative(
                [times[i - 1], times[i], times[i + 1]],
                [states[i - 1][c], states[i][c], states[i + 1][c]],
            );
            worst = worst.max((d - rhs[c]).abs());
        }
    }
    Ok(worst)
}

pub fn symmetry(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    numerical_row("symmetry", cfg.tol, symmetry_inner(cfg, dir))
}

fn symmetry_inner(cfg: &RunConfig, dir: &Path) -> Result<RunReport, CliError> {
    let sys = cfg.system()?;
    let y = candidate(cfg, &sys)?;
    let pts = sample(cfg, &sys);
    let mut report = RunReport::default();

    let mut rows = Vec::new();
    for (i, x) in pts.iter().enumerate() {
        let one = std::slice::from_ref(x);
        let h = check_hamiltonian_symmetry(&sys, &y, one, FD_STEP, cfg.tol)
            .map_err(CliError::Numerical)?;
        let b = check_reeb_preservation(&sys, &y, one, FD_STEP).map_err(CliError::Numerical)?;
        rows.push(vec![i as f64, h.max_lie_eta, h.max_lie_h, b]);
    }
    emit(
        &mut report,
        dir,
        "symmetry.csv",
        &numeric_csv("point,lie_eta,lie_h,reeb_bracket", rows),
    )?;

    let ham = check_hamiltonian_symmetry(&sys, &y, &pts, FD_STEP, cfg.tol)
        .map_err(CliError::Numerical)?;
    report.push(CheckRow::below(
        "hamiltonian-symmetry",
        ham.worst(),
        cfg.tol,
        format!(
            "{}: max |L_Y eta| {:.3e}, max |L_Y H| {:.3e}",
            y.name, ham.max_lie_eta, ham.max_lie_h
        ),
    ));
    let bracket = check_reeb_preservation(&sys, &y, &pts, FD_STEP).map_err(CliError::Numerical)?;
    report.push(CheckRow::below(
        "reeb-preservation",
        bracket,
        cfg.tol,
        "max |[Y, R_a]|",
    ));

    let probe = match cfg.model {
        ModelId::DampedString | ModelId::Burgers | ModelId::CoupledStrings => {
            match simulate_level(cfg, 0) {
                Ok(psi) => {
                    let (p, _) = dynamical_symmetry_probe(&sys, &y, &psi, cfg.epsilon, cfg.tol)
                        .map_err(CliError::Numerical)?;
                    report.push(CheckRow::below(
                        "transport-probe",
                        p.growth,
                        cfg.tol,
                        format!(
                            "section residual {:.3e} -> {:.3e} after flowing by eps = {}; {}",
                            p.before, p.after, p.epsilon, p.caveat
                        ),
                    ));
                    Some(p.passed)
                }
                Err(CliError::Config(msg)) => {
                    report.push(CheckRow::with_status(
                        "transport-probe",
                        Status::Pass,
                        0.0,
                        cfg.tol,
                        format!("skipped: {msg}"),
                    ));
                    None
                }
                Err(e) => return Err(e),
            }
        }
        ModelId::DampedOscillator => {
            let traj = oscillator_run(cfg, cfg.dt.unwrap_or(1e-3))?;
            let states: Vec<Vec<f64>> = traj.states.iter().map(|s| s.to_vec()).collect();
            let before = trajectory_residual(&sys, &traj.times, &states)?;
            let moved = states
                .iter()
                .map(|s| flow(&y.field, s, cfg.epsilon, PROBE_FLOW_SUBSTEPS))
                .collect::<kcontact::Result<Vec<_>>>()
                .map_err(CliError::Numerical)?;
            let after = trajectory_residual(&sys, &traj.times, &moved)?;
            let growth = after - before;
            report.push(CheckRow::below(
                "transport-probe",
                growth,
                cfg.tol,
                format!(
                    "trajectory residual {before:.3e} -> {after:.3e} after flowing by eps = {}",
                    cfg.epsilon
                ),
            ));
            Some(growth < cfg.tol)
        }
        _ => None,
    };

    let observed = if ham.passed && bracket < cfg.tol {
        SymmetryKind::HamiltonianKContact
    } else if probe == Some(true) {
        SymmetryKind::Dynamical
    } else {
        SymmetryKind::Unknown
    };
    let consistent = match y.claim {
        SymmetryKind::HamiltonianKContact => observed == SymmetryKind::HamiltonianKContact,
        SymmetryKind::Dynamical => observed != SymmetryKind::Unknown,
        SymmetryKind::Unknown => true,
    };
    report.push(CheckRow::below(
        "classification",
        if consistent { 0.0 } else { 1.0 },
        0.5,
        format!(
            "claimed {}, observed {}",
            kind_name(y.claim),
            kind_name(observed)
        ),
    ));
    Ok(report)
}

fn kind_name(k: SymmetryKind) -> &'static str {
    match k {
        SymmetryKind::HamiltonianKContact => "hamiltonian-k-contact",
        SymmetryKind::Dynamical => "dynamical",
        SymmetryKind::Unknown => "none",
    }
}
