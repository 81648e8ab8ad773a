use std::time::Instant;

use quasi1d::physics::euler::{Primitive, DEFAULT_GAMMA};
use quasi1d::physics::{Euler, EulerAux, InterfaceFlux};
use quasi1d::semidisc::boundary::{euler_stagnation_inflow, euler_subsonic_outflow};
use quasi1d::semidisc::{AuxSampling, BoundaryCondition, BoundaryConditions, Mesh1D, Semidiscretization};
use quasi1d::time_integration::Control;

use super::swe::join;
use super::{check_doubling, check_elements, check_time, evolve, operator, ConvergenceKind, ReferenceSolution};
use crate::cases::euler as cases;
use crate::manufactured::EulerManufactured;
use crate::nozzle::{exact_nozzle_solution, LavalNozzle, NozzleRegime};
use crate::report::{ConvergenceTable, DataSet, ExperimentReport};
use crate::{invalid, ExperimentError, TimeStepping};

#[derive(Debug, Clone, PartialEq)]
pub struct EulerEcConfig {
    pub degree: usize,
    pub elements: usize,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub gamma: f64,
    /// Nodal sampling puts the vertex at `x = 0` on the right state, which keeps
    /// the unpenalized run positive; one-sided sampling loses positivity early.
    pub sampling: AuxSampling,
}

impl Default for EulerEcConfig {
    fn default() -> Self {
        Self {
            degree: 3,
            elements: 64,
            flux: InterfaceFlux::EntropyConservative,
            t_final: 2.0,
            stepping: TimeStepping::adaptive(1e-10),
            gamma: DEFAULT_GAMMA,
            sampling: AuxSampling::Nodal,
        }
    }
}

/// Discontinuous periodic problem on `[-1, 1]`; records the entropy residual,
/// total entropy and conserved totals after every accepted step.
pub fn run_euler_ec(cfg: &EulerEcConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_elements(cfg.elements)?;
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    let eq = Euler::new(cfg.gamma);
    let semi = Semidiscretization::with_sampling(
        eq,
        operator(cfg.degree)?,
        Mesh1D::uniform(-1.0, 1.0, cfg.elements)?,
        cases::ec_width,
        cfg.flux,
        BoundaryConditions::periodic(),
        cfg.sampling,
    )?;
    let mut u = semi.project(|x, aux| eq.conservative(cases::ec_initial(x), aux));

    let mut series = DataSet::new("entropy", &["t", "entropy_residual", "total_entropy", "mass", "momentum", "energy"]);
    let mut momentum_residual = 0.0_f64;
    let mut momentum_relative = 0.0_f64;
    let mut failure = None;
    let mut record = |t: f64, state: &[f64], series: &mut DataSet| -> Result<(), ExperimentError> {
        let du = semi.rhs_vec(t, state)?;
        let rate = semi.entropy_rate(state, &du)?;
        let totals = semi.conserved_totals(state)?;
        let balance = semi.momentum_balance_with(state, &du, t)?;
        momentum_residual = momentum_residual.max(balance.residual());
        momentum_relative = momentum_relative.max(balance.relative_residual());
        series.push(vec![t, rate.rate, semi.total_entropy(state)?, totals[0], totals[1], totals[2]]);
        Ok(())
    };
    if cfg.t_final == 0.0 {
        record(0.0, &u, &mut series)?;
    }
    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, 1, |info, state| match record(info.t, state, &mut series) {
        Ok(()) => Control::Continue,
        Err(e) => {
            failure = Some(e);
            Control::Stop
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let residual = series.column("entropy_residual").unwrap_or_default();
    let entropy = series.column("total_entropy").unwrap_or_default();
    let drift = |name: &str| {
        let c = series.column(name).unwrap_or_default();
        let first = c[0];
        c.iter().map(|v| (v - first).abs()).fold(0.0, f64::max) / first.abs().max(f64::MIN_POSITIVE)
    };
    let mut report = ExperimentReport::new("euler-ec")
        .with_config("degree", cfg.degree)
        .with_config("elements", cfg.elements)
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("gamma", cfg.gamma)
        .with_config("sampling", format!("{:?}", cfg.sampling).to_lowercase())
        .with_config("domain", "[-1, 1]")
        .with_config("boundary", "periodic");
    report.set_metric("max_abs_entropy_residual", residual.iter().map(|r| r.abs()).fold(0.0, f64::max));
    report.set_metric("max_entropy_residual", residual.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    report.set_metric(
        "max_entropy_increase",
        entropy.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
    );
    report.set_metric("entropy_change", entropy[entropy.len() - 1] - entropy[0]);
    report.set_metric("mass_drift", drift("mass"));
    report.set_metric("energy_drift", drift("energy"));
    report.set_metric("max_momentum_identity_residual", momentum_residual);
    report.set_metric("max_momentum_identity_relative", momentum_relative);
    report.set_metric("samples", series.rows.len() as f64);
    report.datasets.push(series);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerConvergenceConfig {
    pub kind: ConvergenceKind,
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub gamma: f64,
    pub domain: (f64, f64),
    /// Periodic boundaries instead of weakly imposed boundary data (exact
    /// solution for the manufactured case, initial state otherwise).
    pub periodic: bool,
    pub reference_degree: usize,
    pub reference_elements: usize,
}

impl EulerConvergenceConfig {
    pub fn new(kind: ConvergenceKind) -> Self {
        let elements = match kind {
            ConvergenceKind::Manufactured => vec![5, 10, 20, 40, 80],
            ConvergenceKind::FineGrid => vec![2, 4, 8, 16, 32],
            ConvergenceKind::FineGridNonuniform => vec![4, 8, 16, 32, 64],
        };
        Self {
            kind,
            degrees: vec![1, 2, 3],
            elements,
            flux: InterfaceFlux::LaxFriedrichs,
            t_final: 0.1,
            stepping: TimeStepping::rk4(0.25),
            gamma: DEFAULT_GAMMA,
            domain: (-1.0, 1.0),
            periodic: kind != ConvergenceKind::Manufactured,
            reference_degree: 2,
            reference_elements: 24000,
        }
    }
}

pub fn run_euler_convergence(cfg: &EulerConvergenceConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_doubling(&cfg.elements)?;
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    if cfg.degrees.is_empty() {
        return invalid("at least one degree is required");
    }
    let (xl, xr) = cfg.domain;
    if !(xl < xr) {
        return invalid(format!("invalid domain [{xl}, {xr}]"));
    }
    let eq = Euler::new(cfg.gamma);
    let mms = EulerManufactured::new(cfg.gamma);
    let gamma = cfg.gamma;
    let nonuniform = cfg.kind == ConvergenceKind::FineGridNonuniform;
    let mesh = |elements: usize| -> Result<Mesh1D, ExperimentError> {
        check_elements(elements)?;
        Ok(if nonuniform {
            Mesh1D::mapped(xl, xr, elements, cases::nonuniform_map)?
        } else {
            Mesh1D::uniform(xl, xr, elements)?
        })
    };
    let boundaries = || -> BoundaryConditions<Euler> {
        if cfg.periodic {
            return BoundaryConditions::periodic();
        }
        match cfg.kind {
            ConvergenceKind::Manufactured => BoundaryConditions::new(
                BoundaryCondition::custom("exact", move |_: &[f64; 3], aux: &EulerAux, t| mms.exact_scaled(xl, t, aux)),
                BoundaryCondition::custom("exact", move |_: &[f64; 3], aux: &EulerAux, t| mms.exact_scaled(xr, t, aux)),
            ),
            _ => {
                let data = move |x: f64| {
                    move |_: &[f64; 3], aux: &EulerAux, _t: f64| eq.conservative(cases::fine_grid_initial(x, gamma), aux)
                };
                BoundaryConditions::new(
                    BoundaryCondition::custom("initial", data(xl)),
                    BoundaryCondition::custom("initial", data(xr)),
                )
            }
        }
    };
    let fine_grid = |degree: usize, elements: usize| -> Result<(Semidiscretization<Euler>, Vec<f64>), ExperimentError> {
        let semi = Semidiscretization::new(eq, operator(degree)?, mesh(elements)?, cases::fine_grid_width, cfg.flux, boundaries())?;
        let mut u = semi.project(|x, aux| eq.conservative(cases::fine_grid_initial(x, gamma), aux));
        evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;
        Ok((semi, u))
    };

    let mut report = ExperimentReport::new("euler-convergence")
        .with_config("kind", cfg.kind)
        .with_config("degrees", join(&cfg.degrees))
        .with_config("elements", join(&cfg.elements))
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("gamma", cfg.gamma)
        .with_config("domain", format!("[{xl}, {xr}]"))
        .with_config("boundary", if cfg.periodic { "periodic" } else { "weak dirichlet" });

    let reference = match cfg.kind {
        ConvergenceKind::Manufactured => None,
        _ => {
            report.set_config("reference_degree", cfg.reference_degree);
            report.set_config("reference_elements", cfg.reference_elements);
            let (semi, u) = fine_grid(cfg.reference_degree, cfg.reference_elements)?;
            Some(ReferenceSolution::new(semi, &u))
        }
    };

    for &degree in &cfg.degrees {
        let mut errors = Vec::new();
        for &elements in &cfg.elements {
            let error = match &reference {
                None => {
                    let semi = Semidiscretization::new(
                        eq,
                        operator(degree)?,
                        mesh(elements)?,
                        EulerManufactured::aux,
                        cfg.flux,
                        boundaries(),
                    )?
                    .with_source(move |x, t, _| mms.source(x, t));
                    let mut u = semi.project(|x, aux| mms.exact_scaled(x, 0.0, aux));
                    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;
                    semi.l2_error(&u, |x| mms.exact(x, cfg.t_final))?
                }
                Some(r) => {
                    let (semi, u) = fine_grid(degree, elements)?;
                    semi.l2_error(&u, |x| r.at(x))?
                }
            };
            errors.push((elements, error));
        }
        let table = ConvergenceTable::from_errors(degree, &errors);
        if let Some(rate) = table.finest_rate() {
            report.set_metric(&format!("finest_rate_N{degree}"), rate);
        }
        report.tables.push(table);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NozzleConfig {
    pub regime: NozzleRegime,
    pub degree: usize,
    pub elements: usize,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub gamma: f64,
    pub geometry: LavalNozzle,
    /// Outlet pressure over stagnation pressure.
    pub outlet_ratio: f64,
    pub rho0: f64,
    pub p0: f64,
}

impl NozzleConfig {
    pub fn new(regime: NozzleRegime) -> Self {
        let (elements, outlet_ratio) = match regime {
            NozzleRegime::Subsonic => (16, 0.995),
            NozzleRegime::Transonic => (64, 0.75),
        };
        Self {
            regime,
            degree: 3,
            elements,
            flux: InterfaceFlux::LaxFriedrichs,
            t_final: 5.0,
            stepping: TimeStepping::adaptive(1e-8),
            gamma: DEFAULT_GAMMA,
            geometry: LavalNozzle::default(),
            outlet_ratio,
            rho0: 1.0,
            p0: 1.0,
        }
    }
}

pub fn run_euler_nozzle(cfg: &NozzleConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_elements(cfg.elements)?;
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    let exact = exact_nozzle_solution(cfg.geometry, cfg.regime, cfg.gamma, cfg.rho0, cfg.p0, cfg.outlet_ratio)?;
    let eq = Euler::new(cfg.gamma);
    let geometry = cfg.geometry;
    let inflow = exact.primitive(geometry.x_left);
    let p_exit = cfg.outlet_ratio * cfg.p0;
    let semi = Semidiscretization::new(
        eq,
        operator(cfg.degree)?,
        Mesh1D::uniform(geometry.x_left, geometry.x_right, cfg.elements)?,
        move |x| EulerAux::new(geometry.width(x)),
        cfg.flux,
        BoundaryConditions::new(euler_stagnation_inflow(eq, cfg.rho0, cfg.p0), euler_subsonic_outflow(eq, p_exit)),
    )?;
    let mut u = semi.project(|_, aux| eq.conservative(inflow, aux));
    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;

    let du = semi.rhs_vec(cfg.t_final, &u)?;
    let x = semi.coordinates();
    let mut profile = DataSet::new("profile", &["x", "rho", "u", "p", "mach", "exact_mach", "exact_p"]);
    let mut mach = Vec::with_capacity(x.len());
    for (g, aux) in semi.aux().iter().enumerate() {
        let state = semi.state_at(&u, g);
        let Primitive { rho, vel, p } = eq.primitive(&state, aux);
        let m = eq.mach(&state, aux);
        mach.push(m);
        let ex = exact.primitive(x[g]);
        profile.push(vec![x[g], rho, vel, p, m, exact.mach(x[g]), ex.p]);
    }

    let mut report = ExperimentReport::new(format!("euler-nozzle-{}", cfg.regime))
        .with_config("regime", cfg.regime)
        .with_config("degree", cfg.degree)
        .with_config("elements", cfg.elements)
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("gamma", cfg.gamma)
        .with_config("outlet_ratio", cfg.outlet_ratio)
        .with_config("geometry", format!("a = {} + {} (x - {})^2 on [{}, {}]", geometry.throat_width, geometry.curvature, geometry.x_throat, geometry.x_left, geometry.x_right))
        .with_config("boundary", "stagnation inflow (rho0, p0), subsonic outflow (p)");
    report.set_metric("rhs_norm", semi.weighted_norm(&du)?);
    report.set_metric("max_mach", mach.iter().cloned().fold(0.0, f64::max));
    let l2 = semi.l2_error(&u, |x| {
        let aux = EulerAux::new(1.0);
        eq.conservative(exact.primitive(x), &aux)
    })?;
    report.set_metric("l2_error", l2);
    if let Some(xs) = exact.shock_position {
        report.set_metric("exact_shock_position", xs);
    }
    let sonic = (1..mach.len()).find(|&i| mach[i - 1] < 1.0 && mach[i] >= 1.0);
    if let Some(s) = sonic {
        report.set_metric("sonic_point", 0.5 * (x[s - 1] + x[s]));
        let shock = (s + 1..mach.len())
            .filter(|&i| mach[i - 1] > 1.0 && mach[i] <= 1.0)
            .max_by(|&i, &j| (mach[i - 1] - mach[i]).total_cmp(&(mach[j - 1] - mach[j])));
        if let Some(i) = shock {
            report.set_metric("shock_position", 0.5 * (x[i - 1] + x[i]));
        }
    }
    report.datasets.push(profile);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
